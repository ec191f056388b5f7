//! MSB-first bit serialization used by the memory auditor.

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct BitWriter {
    bytes: Vec<u8>,
    len: u64,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends the low `width` bits of `value`, most significant first.
    pub fn push(&mut self, value: u64, width: u32) {
        assert!(width <= 64);
        for i in (0..width).rev() {
            self.push_bit((value >> i) & 1 == 1);
        }
    }

    pub fn push_bit(&mut self, bit: bool) {
        let byte = (self.len / 8) as usize;
        if byte == self.bytes.len() {
            self.bytes.push(0);
        }
        if bit {
            self.bytes[byte] |= 0x80 >> (self.len % 8);
        }
        self.len += 1;
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }
}

#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    bytes: &'a [u8],
    pos: u64,
    len: u64,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8], len: u64) -> Self {
        assert!(len <= bytes.len() as u64 * 8);
        Self { bytes, pos: 0, len }
    }

    pub fn read_bit(&mut self) -> Option<bool> {
        if self.pos >= self.len {
            return None;
        }
        let b = self.bytes[(self.pos / 8) as usize] & (0x80 >> (self.pos % 8)) != 0;
        self.pos += 1;
        Some(b)
    }

    pub fn read(&mut self, width: u32) -> Option<u64> {
        let mut v = 0u64;
        for _ in 0..width {
            v = (v << 1) | self.read_bit()? as u64;
        }
        Some(v)
    }

    pub fn remaining(&self) -> u64 {
        self.len - self.pos
    }
}

/// Smallest `b` with `2^b >= x`; zero for `x <= 1`.
pub fn ceil_log2(x: u64) -> u32 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ceil_log2_values() {
        assert_eq!(ceil_log2(0), 0);
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(24), 5);
        assert_eq!(ceil_log2(1024), 10);
        assert_eq!(ceil_log2(1025), 11);
    }

    #[test]
    fn msb_first_layout() {
        let mut w = BitWriter::new();
        w.push(0b101, 3);
        w.push(0xF, 4);
        w.push_bit(true);
        w.push(1, 2);
        assert_eq!(w.len(), 10);
        assert_eq!(w.as_bytes(), &[0b1011_1111, 0b0100_0000]);
    }

    proptest! {
        #[test]
        fn write_then_read(fields in proptest::collection::vec((any::<u64>(), 0u32..=64), 0..40)) {
            let mut w = BitWriter::new();
            for &(v, width) in &fields {
                w.push(v, width);
            }
            let total: u64 = fields.iter().map(|&(_, width)| width as u64).sum();
            prop_assert_eq!(w.len(), total);
            let mut r = BitReader::new(w.as_bytes(), w.len());
            for &(v, width) in &fields {
                let mask = if width == 64 { u64::MAX } else { (1u64 << width) - 1 };
                prop_assert_eq!(r.read(width), Some(v & mask));
            }
            prop_assert_eq!(r.remaining(), 0);
        }
    }
}
