//! Dense real vectors.

use std::ops::Index;

use crate::error::{Error, Result};

/// A dense vector of `f64` coordinates with all entries finite.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DenseVector(Vec<f64>);

impl DenseVector {
    pub fn zeros(n: usize) -> Self {
        DenseVector(vec![0.0; n])
    }

    /// Wraps `values`, rejecting NaN or infinite entries.
    pub fn from_vec(values: Vec<f64>) -> Result<Self> {
        if values.iter().all(|v| v.is_finite()) {
            Ok(DenseVector(values))
        } else {
            Err(Error::NonFinite("DenseVector::from_vec"))
        }
    }

    /// Unit basis vector `e_i` of length `n`.
    pub fn basis(n: usize, i: usize) -> Self {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        DenseVector(v)
    }

    pub(crate) fn from_vec_unchecked(values: Vec<f64>) -> Self {
        DenseVector(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn dot(&self, other: &DenseVector) -> Result<f64> {
        dot(self, other)
    }

    pub fn norm2(&self) -> f64 {
        norm2(self)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub(crate) fn check_len(&self, expected: usize) -> Result<()> {
        if self.len() == expected {
            Ok(())
        } else {
            Err(Error::Dimension {
                expected,
                found: self.len(),
            })
        }
    }
}

impl Index<usize> for DenseVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl TryFrom<Vec<f64>> for DenseVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        DenseVector::from_vec(values)
    }
}

impl AsRef<[f64]> for DenseVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// `sum_i a_i b_i`.
pub fn dot(a: &DenseVector, b: &DenseVector) -> Result<f64> {
    b.check_len(a.len())?;
    Ok(dot_slices(a.as_slice(), b.as_slice()))
}

/// Euclidean norm.
pub fn norm2(a: &DenseVector) -> f64 {
    dot_slices(a.as_slice(), a.as_slice()).sqrt()
}

/// Returns `alpha * x + y`.
pub fn axpy(alpha: f64, x: &DenseVector, y: &DenseVector) -> Result<DenseVector> {
    y.check_len(x.len())?;
    let out: Vec<f64> = x.iter().zip(y.iter()).map(|(xi, yi)| alpha * xi + yi).collect();
    if out.iter().all(|v| v.is_finite()) {
        Ok(DenseVector(out))
    } else {
        Err(Error::NonFinite("axpy"))
    }
}

#[inline]
pub(crate) fn dot_slices(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn norm_slice(a: &[f64]) -> f64 {
    dot_slices(a, a).sqrt()
}
