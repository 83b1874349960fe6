//! Vector-valued returns and rewards.

use std::ops::{Deref, Index};

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Scalar};

/// One value per objective: a reward, a return, or an expected return.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectiveVector<T = f64>(Vec<T>);

impl<T: Scalar> ObjectiveVector<T> {
    pub fn new(values: Vec<T>) -> Self {
        ObjectiveVector(values)
    }

    pub fn zeros(m: usize) -> Self {
        ObjectiveVector(vec![T::zero(); m])
    }

    /// Like [`ObjectiveVector::new`] but rejects NaN and infinities.
    pub fn finite(values: Vec<T>) -> Result<Self> {
        if values.iter().all(|v| v.is_finite()) {
            Ok(ObjectiveVector(values))
        } else {
            Err(Error::NonFinite("objective vector"))
        }
    }

    pub fn m(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<T> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn dot(&self, weights: &[T]) -> T {
        self.0.iter().zip(weights).map(|(&a, &b)| a * b).sum()
    }

    pub fn scaled(&self, c: T) -> Self {
        ObjectiveVector(self.0.iter().map(|&v| v * c).collect())
    }

    /// In-place `self += c * other`.
    pub fn add_scaled(&mut self, other: &Self, c: T) {
        for (a, &b) in self.0.iter_mut().zip(&other.0) {
            *a += c * b;
        }
    }

    pub fn check_len(&self, m: usize) -> Result<()> {
        if self.m() == m {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: m,
                actual: self.m(),
            })
        }
    }
}

impl<T> Deref for ObjectiveVector<T> {
    type Target = [T];
    fn deref(&self) -> &[T] {
        &self.0
    }
}

impl<T> Index<usize> for ObjectiveVector<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

impl<T> From<Vec<T>> for ObjectiveVector<T> {
    fn from(v: Vec<T>) -> Self {
        ObjectiveVector(v)
    }
}

impl<T: std::fmt::Display> std::fmt::Display for ObjectiveVector<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}
