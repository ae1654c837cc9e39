//! Dense real vectors.

use std::ops::{Add, Index, Mul, Sub};

use crate::error::{Error, Result};

/// Dense vector of `f64` entries.
///
/// Constructors reject NaN/Inf entries and zero dimension. Arithmetic on
/// already-constructed vectors does not re-validate; callers feeding
/// divergent trajectories back through [`Vector::new`] will get an error.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector(Vec<f64>);

impl Vector {
    /// Builds a vector, rejecting empty input and non-finite entries.
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Empty("vector"));
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("vector entries"));
        }
        Ok(Vector(entries))
    }

    /// Zero vector of dimension `d` (`d` must be positive).
    pub fn zeros(d: usize) -> Self {
        assert!(d > 0, "vector dimension must be positive");
        Vector(vec![0.0; d])
    }

    pub fn filled(d: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; d])
    }

    pub(crate) fn from_raw(entries: Vec<f64>) -> Self {
        debug_assert!(!entries.is_empty());
        Vector(entries)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    /// Euclidean (l2) norm.
    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, s: f64) -> Vector {
        Vector(self.0.iter().map(|x| x * s).collect())
    }

    /// `self + s * other`, used by the optimizer update rules.
    pub fn axpy(&self, s: f64, other: &Vector) -> Vector {
        debug_assert_eq!(self.dim(), other.dim());
        Vector(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + s * b)
                .collect(),
        )
    }

    /// Returns an error unless `other` has the same dimension.
    pub fn check_dim(&self, other: &Vector) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Add for &Vector {
    type Output = Vector;
    fn add(self, rhs: &Vector) -> Vector {
        self.axpy(1.0, rhs)
    }
}

impl Sub for &Vector {
    type Output = Vector;
    fn sub(self, rhs: &Vector) -> Vector {
        self.axpy(-1.0, rhs)
    }
}

impl Mul<f64> for &Vector {
    type Output = Vector;
    fn mul(self, s: f64) -> Vector {
        self.scale(s)
    }
}
