//! Approximate set-membership filters that remain accurate when queried by
//! adaptive adversaries, together with the adversarial challenge game and a
//! set of concrete attacks used to measure them.
//!
//! The crate ships three filter families:
//!
//! * [`bloom::BloomFilter`], the classic construction. It is accurate on
//!   fresh random queries but an adversary who learns its state can name
//!   false positives at will.
//! * [`shield::ShieldedFilter`], which wraps any filter and feeds it the image
//!   of every input under a secret keyed permutation. Only the key has to stay
//!   secret.
//! * [`cuckoo::CuckooFilter`], which stores `ell`-bit fingerprints drawn from
//!   an exactly k-wise independent family inside a two-table cuckoo layout and
//!   compares them one bit at a time with a per-cell cyclic cursor. It
//!   resists `t` adaptive queries from computationally unbounded adversaries.
//!
//! [`game::run_challenge`] plays one round of the challenge game and
//! [`game::estimate_success_rate`] wraps it in a Monte-Carlo campaign.

pub mod adversary;
pub mod bits;
pub mod bloom;
pub mod criteria;
pub mod cuckoo;
pub mod error;
pub mod filter;
pub mod game;
pub mod gf;
pub mod hash_family;
pub mod mix;
pub mod params;
pub mod perm;
pub mod seed;
pub mod shield;

pub use error::{Error, Result};
pub use filter::{Filter, FilterBuilder, FilterFactory, MembershipView, RepKind};
pub use params::{minimal_error, Element, ElementSet, FilterParams, Universe};
