use rand_chacha::ChaCha8Rng;

use crate::filter::MembershipView;
use crate::params::Universe;

/// Universes up to this width are enumerated instead of sampled.
pub const EXHAUSTIVE_LIMIT_BITS: u32 = 16;

/// Fraction of the universe on which `a` and `b` disagree.
pub fn err_estimate(
    a: &dyn MembershipView,
    b: &dyn MembershipView,
    universe: Universe,
    sample_count: usize,
    rng: &mut ChaCha8Rng,
) -> f64 {
    fraction(universe, sample_count, rng, |x| a.contains(x) != b.contains(x))
}

/// Fraction of the universe `view` accepts, true and false positives alike.
pub fn mu_estimate(view: &dyn MembershipView, universe: Universe, sample_count: usize, rng: &mut ChaCha8Rng) -> f64 {
    fraction(universe, sample_count, rng, |x| view.contains(x))
}

fn fraction(
    universe: Universe,
    sample_count: usize,
    rng: &mut ChaCha8Rng,
    mut pred: impl FnMut(crate::params::Element) -> bool,
) -> f64 {
    if universe.bits() <= EXHAUSTIVE_LIMIT_BITS {
        let hits = universe.iter().filter(|&x| pred(x)).count();
        return hits as f64 / universe.size() as f64;
    }
    let samples = sample_count.max(1);
    let hits = (0..samples).filter(|_| pred(universe.sample(rng))).count();
    hits as f64 / samples as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloom::BloomFilter;
    use crate::filter::ExactSetFilter;
    use crate::params::{Element, ElementSet};
    use crate::seed;

    #[test]
    fn err_of_self_is_zero() {
        let u = Universe::new(10).unwrap();
        let set = ElementSet::sample(4, u, &mut seed::rng(1)).unwrap();
        let f = BloomFilter::build(&set, 16, 2).unwrap();
        assert_eq!(err_estimate(&f, &f, u, 0, &mut seed::rng(0)), 0.0);
    }

    #[test]
    fn err_between_empty_and_full_arrays() {
        let u = Universe::new(10).unwrap();
        let empty = BloomFilter::empty(16, vec![1, 2, 3]);
        let full = BloomFilter::saturated(16, vec![1, 2, 3]);
        assert_eq!(err_estimate(&empty, &full, u, 0, &mut seed::rng(0)), 1.0);
        assert_eq!(mu_estimate(&full, u, 0, &mut seed::rng(0)), 1.0);
        assert_eq!(mu_estimate(&empty, u, 0, &mut seed::rng(0)), 0.0);
    }

    #[test]
    fn exact_set_mu_is_n_over_u() {
        let u = Universe::new(12).unwrap();
        let set = ElementSet::sample(37, u, &mut seed::rng(3)).unwrap();
        let f = ExactSetFilter::new(&set);
        assert_eq!(mu_estimate(&f, u, 0, &mut seed::rng(0)), 37.0 / 4096.0);
    }

    #[test]
    fn sampled_estimate_for_wide_universes() {
        let u = Universe::new(32).unwrap();
        let half = |x: Element| x.0 & 1 == 0;
        let mu = mu_estimate(&half, u, 100_000, &mut seed::rng(4));
        assert!((mu - 0.5).abs() < 0.01);
    }
}
