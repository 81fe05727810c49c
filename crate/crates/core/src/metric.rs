//! Metric signatures `(+,...,+,-,...,-)` and the hat map.
//!
//! Positive slots always come first. A Euclidean space has `neg == 0`, the
//! Minkowskian space `M^{d+1}` has `neg == 1`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    pub pos: usize,
    pub neg: usize,
}

impl Signature {
    pub fn new(pos: usize, neg: usize) -> Result<Self> {
        if pos == 0 {
            return Err(Error::InvalidSignature(format!(
                "signature ({pos},{neg}) needs at least one positive slot"
            )));
        }
        Ok(Self { pos, neg })
    }

    pub fn euclidean(dim: usize) -> Self {
        Self { pos: dim, neg: 0 }
    }

    /// Minkowskian signature of total dimension `dim` (one negative slot).
    pub fn minkowski(dim: usize) -> Self {
        Self {
            pos: dim - 1,
            neg: 1,
        }
    }

    pub fn dim(&self) -> usize {
        self.pos + self.neg
    }

    pub fn is_euclidean(&self) -> bool {
        self.neg == 0
    }

    pub fn is_minkowski(&self) -> bool {
        self.neg == 1
    }

    /// `+1.0` or `-1.0` for coordinate slot `k`.
    pub fn sign(&self, k: usize) -> f64 {
        if k < self.pos {
            1.0
        } else {
            -1.0
        }
    }

    /// The diagonal Gram matrix `J`.
    pub fn gram(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim(), self.dim(), |r, c| {
            if r == c {
                self.sign(r)
            } else {
                0.0
            }
        })
    }

    /// Unchecked inner product; callers guarantee matching lengths.
    pub fn inner(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        a.iter()
            .zip(b.iter())
            .enumerate()
            .map(|(k, (x, y))| self.sign(k) * x * y)
            .sum()
    }

    pub fn norm_sq(&self, a: &DVector<f64>) -> f64 {
        self.inner(a, a)
    }

    /// Unchecked hat map.
    pub fn hat(&self, a: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            a.len(),
            a.iter().enumerate().map(|(k, x)| self.sign(k) * x),
        )
    }

    fn check(&self, v: &DVector<f64>) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: v.len(),
            });
        }
        Ok(())
    }
}

impl std::fmt::Display for Signature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.pos, self.neg)
    }
}

/// Which family a cone lands in: the new axis is positive for a Euclidean
/// cone and negative for a Minkowskian one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConeKind {
    Euclidean,
    Minkowski,
}

impl ConeKind {
    /// Signature of the ambient space after adding the cone axis as the last
    /// coordinate.
    pub fn extend(self, sig: Signature) -> Result<Signature> {
        match self {
            ConeKind::Euclidean if sig.neg > 0 => Err(Error::InvalidSignature(format!(
                "a Euclidean cone axis cannot follow the negative slots of {sig}"
            ))),
            ConeKind::Euclidean => Ok(Signature::euclidean(sig.pos + 1)),
            ConeKind::Minkowski => Ok(Signature {
                pos: sig.pos,
                neg: sig.neg + 1,
            }),
        }
    }

    /// Sign of the last coordinate in the cone ambient space.
    pub fn axis_sign(self) -> f64 {
        match self {
            ConeKind::Euclidean => 1.0,
            ConeKind::Minkowski => -1.0,
        }
    }
}

/// Signature inner product `sum_pos a_k b_k - sum_neg a_k b_k`.
pub fn signature_inner(a: &DVector<f64>, b: &DVector<f64>, sig: Signature) -> Result<f64> {
    sig.check(a)?;
    sig.check(b)?;
    Ok(sig.inner(a, b))
}

/// Negates the coordinates in negative slots. An involution.
pub fn hat(a: &DVector<f64>, sig: Signature) -> Result<DVector<f64>> {
    sig.check(a)?;
    Ok(sig.hat(a))
}
