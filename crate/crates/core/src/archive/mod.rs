//! Non-dominated archive, Pareto dominance, and front quality metrics.

mod entry;
mod frontier;
mod hypervolume;
mod sparsity;

pub use entry::{PolicyEntry, Source};
pub use frontier::{FrontierDoc, FrontierEntry, FRONTIER_SCHEMA_VERSION};
pub use hypervolume::hypervolume;
pub use sparsity::sparsity;

use crate::objective::ObjectiveVector;
use crate::{Error, Result, Scalar};

/// Anything carrying an evaluated objective vector.
pub trait HasObjectives<T> {
    fn objectives(&self) -> &[T];
}

impl<T> HasObjectives<T> for ObjectiveVector<T> {
    fn objectives(&self) -> &[T] {
        self
    }
}

impl<T> HasObjectives<T> for Vec<T> {
    fn objectives(&self) -> &[T] {
        self
    }
}

/// `a` is at least as good as `b` everywhere and differs somewhere.
pub fn dominates<T: Scalar>(a: &[T], b: &[T]) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    Ok(dominates_unchecked(a, b))
}

pub(crate) fn dominates_unchecked<T: Scalar>(a: &[T], b: &[T]) -> bool {
    let mut strict = false;
    for (&x, &y) in a.iter().zip(b) {
        if x < y {
            return false;
        }
        if x > y {
            strict = true;
        }
    }
    strict
}

/// Objective-space point dominated by every policy of interest. Anchors the
/// hypervolume and the distance used for selection.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct ReferencePoint<T = f64>(pub ObjectiveVector<T>);

impl<T: Scalar> ReferencePoint<T> {
    pub fn new(z: Vec<T>) -> Self {
        ReferencePoint(ObjectiveVector::new(z))
    }

    pub fn m(&self) -> usize {
        self.0.m()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    /// Every component of `p` is at least the matching reference component.
    pub fn is_dominated_by(&self, p: &[T]) -> bool {
        p.len() == self.m() && p.iter().zip(self.0.iter()).all(|(&x, &z)| x >= z)
    }

    pub fn check(&self, p: &[T]) -> Result<()> {
        if p.len() != self.m() {
            return Err(Error::DimensionMismatch {
                expected: self.m(),
                actual: p.len(),
            });
        }
        if self.is_dominated_by(p) {
            Ok(())
        } else {
            Err(Error::BelowReference {
                point: format!("{:?}", p),
                reference: format!("{:?}", self.as_slice()),
            })
        }
    }
}

/// Mutually non-dominated collection. Equal objective vectors keep the entry
/// inserted first.
#[derive(Clone, Debug)]
pub struct NonDominatedSet<E> {
    entries: Vec<E>,
}

impl<E> Default for NonDominatedSet<E> {
    fn default() -> Self {
        NonDominatedSet { entries: Vec::new() }
    }
}

impl<E> NonDominatedSet<E> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[E] {
        &self.entries
    }

    pub fn iter(&self) -> std::slice::Iter<'_, E> {
        self.entries.iter()
    }

    pub fn into_entries(self) -> Vec<E> {
        self.entries
    }
}

impl<E> NonDominatedSet<E> {
    /// Adds `entry` unless a member dominates or equals it, evicting members it
    /// dominates. Returns whether it was accepted.
    pub fn insert<T: Scalar>(&mut self, entry: E) -> bool
    where
        E: HasObjectives<T>,
    {
        let cand = entry.objectives();
        let rejected = self.entries.iter().any(|e| {
            let o = e.objectives();
            o == cand || dominates_unchecked(o, cand)
        });
        if rejected {
            return false;
        }
        self.entries
            .retain(|e| !dominates_unchecked(cand, e.objectives()));
        self.entries.push(entry);
        true
    }

    pub fn points<T: Scalar>(&self) -> Vec<&[T]>
    where
        E: HasObjectives<T>,
    {
        self.entries.iter().map(|e| e.objectives()).collect()
    }

    pub fn hypervolume<T: Scalar>(&self, z: &ReferencePoint<T>) -> Result<T>
    where
        E: HasObjectives<T>,
    {
        hypervolume(&self.points(), z)
    }

    pub fn sparsity<T: Scalar>(&self) -> Option<T>
    where
        E: HasObjectives<T>,
    {
        sparsity(&self.points())
    }

    /// True when no pair of members dominates one another.
    pub fn is_mutually_non_dominated<T: Scalar>(&self) -> bool
    where
        E: HasObjectives<T>,
    {
        let pts = self.points();
        pts.iter().enumerate().all(|(i, a)| {
            pts.iter()
                .enumerate()
                .all(|(j, b)| i == j || !dominates_unchecked(a, b))
        })
    }
}

impl<E> IntoIterator for NonDominatedSet<E> {
    type Item = E;
    type IntoIter = std::vec::IntoIter<E>;
    fn into_iter(self) -> Self::IntoIter {
        self.entries.into_iter()
    }
}

impl<'a, E> IntoIterator for &'a NonDominatedSet<E> {
    type Item = &'a E;
    type IntoIter = std::slice::Iter<'a, E>;
    fn into_iter(self) -> Self::IntoIter {
        self.entries.iter()
    }
}
