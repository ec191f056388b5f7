//! Keyed 64-bit mixers used for placement hashes, Bloom index hashes and the
//! Feistel round function. These are statistical mixers, not cryptographic
//! primitives.

#[inline]
pub fn fmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
pub fn keyed_mix(key: u64, x: u64) -> u64 {
    fmix64(fmix64(x.wrapping_add(key)) ^ key.rotate_left(29))
}

/// `keyed_mix(key, x) mod range`.
#[inline]
pub fn keyed_index(key: u64, x: u64, range: usize) -> usize {
    debug_assert!(range > 0);
    (keyed_mix(key, x) % range as u64) as usize
}
