use nalgebra::DVector;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::C64;
use crate::error::{Error, Result};

/// Dense complex column vector.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexVector(DVector<C64>);

impl ComplexVector {
    pub fn new(entries: Vec<C64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyDimension);
        }
        Ok(Self(DVector::from_vec(entries)))
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "zero-dimensional vector");
        Self(DVector::zeros(dim))
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize) -> C64) -> Self {
        assert!(dim > 0, "zero-dimensional vector");
        Self(DVector::from_fn(dim, |i, _| f(i)))
    }

    /// Unit vector along coordinate `index`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[index] = C64::new(1.0, 0.0);
        v
    }

    pub(crate) fn from_inner(inner: DVector<C64>) -> Self {
        debug_assert!(!inner.is_empty());
        Self(inner)
    }

    pub fn inner(&self) -> &DVector<C64> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[C64] {
        self.0.as_slice()
    }

    pub fn get(&self, i: usize) -> C64 {
        self.0[i]
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.norm_squared()
    }

    /// Inner product `selfᴴ other` (conjugate-linear in `self`).
    pub fn dot(&self, other: &Self) -> C64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch in dot");
        self.0.dotc(&other.0)
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self(&self.0 * C64::new(factor, 0.0))
    }

    pub fn scale_complex(&self, factor: C64) -> Self {
        Self(&self.0 * factor)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch in add");
        Self(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch in sub");
        Self(&self.0 - &other.0)
    }

    /// `self + factor * other`
    pub fn axpy(&self, factor: C64, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch in axpy");
        Self(&self.0 + &other.0 * factor)
    }

    /// Unit vector in the direction of `self`, or `None` for the zero vector.
    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm();
        if n > 0.0 && n.is_finite() {
            Some(self.scale(1.0 / n))
        } else {
            None
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|z| *z == C64::new(0.0, 0.0))
    }
}

impl Serialize for ComplexVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.0.iter().map(|z| [z.re, z.im]).collect();
        pairs.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(deserializer)?;
        let entries = pairs.into_iter().map(|[re, im]| C64::new(re, im)).collect();
        ComplexVector::new(entries).map_err(serde::de::Error::custom)
    }
}
