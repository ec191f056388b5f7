//! The filter contract shared by every construction.
//!
//! A filter is built once from a set and then answers membership queries
//! through [`Filter::query`], the possibly state-changing interface `Q(x)`.
//! Steady filters never change under queries; unsteady ones may. Either way
//! the answer on members is always `true`.

use std::collections::HashSet;

use crate::bits::BitWriter;
use crate::error::Result;
use crate::params::{Element, ElementSet, FilterParams, Universe};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RepKind {
    /// Deterministic query algorithm, representation immutable under queries.
    Steady,
    /// Queries may rewrite the representation.
    Unsteady,
}

/// A deterministic, side-effect free membership answer for a fixed
/// representation. This is what an adversary holds when a representation is
/// published, and what the error estimators compare.
pub trait MembershipView {
    fn contains(&self, x: Element) -> bool;
}

impl<F: Fn(Element) -> bool> MembershipView for F {
    fn contains(&self, x: Element) -> bool {
        self(x)
    }
}

/// A small enumerable space of candidate representations sharing the
/// filter's public parameters. Used by the exhaustive consistency attack.
pub trait RepresentationSpace {
    /// Number of candidates.
    fn len(&self) -> u64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Bits of secret state the space ranges over (`log2 len` for complete
    /// spaces).
    fn secret_bits(&self) -> u64;

    /// Answer of candidate `index` on `x`.
    fn candidate_contains(&self, index: u64, x: Element) -> bool;

    fn candidate(&self, index: u64) -> Box<dyn MembershipView + Send + Sync>;
}

/// Measured per-query cost, reported by filters that count it.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct QueryCost {
    pub queries: u64,
    pub bit_comparisons: u64,
}

pub trait Filter: Send {
    fn kind(&self) -> RepKind;

    /// The query interface `Q(x)`. Mutates the representation for unsteady
    /// filters.
    fn query(&mut self, x: Element) -> bool;

    /// Exact representation size in bits.
    fn bits(&self) -> u64;

    /// Serializes the representation; writes exactly [`Filter::bits`] bits.
    fn write_bits(&self, out: &mut BitWriter);

    /// The representation as an offline oracle, if this instance was built
    /// in a debug mode that publishes it.
    fn published(&self) -> Option<&dyn MembershipView> {
        None
    }

    /// The space of representations consistent with the public parameters,
    /// if it is small enough to enumerate.
    fn representation_space(&self) -> Option<Box<dyn RepresentationSpace + '_>> {
        None
    }

    fn query_cost(&self) -> Option<QueryCost> {
        None
    }
}

impl Filter for Box<dyn Filter> {
    fn kind(&self) -> RepKind {
        (**self).kind()
    }
    fn query(&mut self, x: Element) -> bool {
        (**self).query(x)
    }
    fn bits(&self) -> u64 {
        (**self).bits()
    }
    fn write_bits(&self, out: &mut BitWriter) {
        (**self).write_bits(out)
    }
    fn published(&self) -> Option<&dyn MembershipView> {
        (**self).published()
    }
    fn representation_space(&self) -> Option<Box<dyn RepresentationSpace + '_>> {
        (**self).representation_space()
    }
    fn query_cost(&self) -> Option<QueryCost> {
        (**self).query_cost()
    }
}

/// Builds a concrete filter type.
pub trait FilterBuilder: Send + Sync {
    type Output: Filter + 'static;

    fn label(&self) -> String;

    fn build(&self, set: &ElementSet, params: &FilterParams, seed: u64) -> Result<Self::Output>;
}

/// Object-safe builder used by the game runner and experiment configs.
pub trait FilterFactory: Send + Sync {
    fn label(&self) -> String;

    fn build_boxed(&self, set: &ElementSet, params: &FilterParams, seed: u64) -> Result<Box<dyn Filter>>;
}

impl<B: FilterBuilder> FilterFactory for B {
    fn label(&self) -> String {
        FilterBuilder::label(self)
    }

    fn build_boxed(&self, set: &ElementSet, params: &FilterParams, seed: u64) -> Result<Box<dyn Filter>> {
        Ok(Box::new(self.build(set, params, seed)?))
    }
}

/// Serialized size of a filter, for auditing [`Filter::bits`].
pub fn serialized_bits(filter: &dyn Filter) -> u64 {
    let mut w = BitWriter::new();
    filter.write_bits(&mut w);
    w.len()
}

/// Stores the set verbatim; never errs. Serves as the zero-error reference.
#[derive(Debug, Clone)]
pub struct ExactSetFilter {
    members: HashSet<Element>,
    sorted: Vec<Element>,
    universe: Universe,
}

impl ExactSetFilter {
    pub fn new(set: &ElementSet) -> Self {
        let mut sorted: Vec<Element> = set.iter().collect();
        sorted.sort_unstable();
        Self { members: set.iter().collect(), sorted, universe: set.universe() }
    }
}

impl MembershipView for ExactSetFilter {
    fn contains(&self, x: Element) -> bool {
        self.members.contains(&x)
    }
}

impl Filter for ExactSetFilter {
    fn kind(&self) -> RepKind {
        RepKind::Steady
    }

    fn query(&mut self, x: Element) -> bool {
        MembershipView::contains(self, x)
    }

    fn bits(&self) -> u64 {
        self.sorted.len() as u64 * self.universe.bits() as u64
    }

    fn write_bits(&self, out: &mut BitWriter) {
        for x in &self.sorted {
            out.push(x.0, self.universe.bits());
        }
    }

    /// Holds no secret: the representation is a function of the set alone.
    fn published(&self) -> Option<&dyn MembershipView> {
        Some(self)
    }

    fn representation_space(&self) -> Option<Box<dyn RepresentationSpace + '_>> {
        Some(Box::new(SingletonSpace(self)))
    }
}

/// With no secret randomness the only representation consistent with the
/// public set is the filter itself.
struct SingletonSpace<'a>(&'a ExactSetFilter);

impl RepresentationSpace for SingletonSpace<'_> {
    fn len(&self) -> u64 {
        1
    }

    fn secret_bits(&self) -> u64 {
        0
    }

    fn candidate_contains(&self, _index: u64, x: Element) -> bool {
        MembershipView::contains(self.0, x)
    }

    fn candidate(&self, _index: u64) -> Box<dyn MembershipView + Send + Sync> {
        Box::new(self.0.clone())
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ExactSetBuilder;

impl FilterBuilder for ExactSetBuilder {
    type Output = ExactSetFilter;

    fn label(&self) -> String {
        "exact_set".into()
    }

    fn build(&self, set: &ElementSet, _params: &FilterParams, _seed: u64) -> Result<ExactSetFilter> {
        Ok(ExactSetFilter::new(set))
    }
}
