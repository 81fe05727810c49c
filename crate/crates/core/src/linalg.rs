//! Numerical rank, kernels and cokernels of small dense matrices.
//!
//! Rank is the count of singular values above
//! `max(rows, cols) * sigma_max * rank_rel_tol`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NumericPolicy {
    pub rank_rel_tol: f64,
    pub group_tol: f64,
    pub sample_count: usize,
    pub rng_seed: u64,
}

impl Default for NumericPolicy {
    fn default() -> Self {
        Self {
            rank_rel_tol: 1e-12,
            group_tol: 1e-9,
            sample_count: 5,
            rng_seed: 0,
        }
    }
}

impl NumericPolicy {
    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if !ok(self.rank_rel_tol) || !ok(self.group_tol) {
            return Err(Error::InvalidArgument(
                "tolerances must be finite and strictly positive".into(),
            ));
        }
        if self.sample_count == 0 {
            return Err(Error::InvalidArgument("sample_count must be at least 1".into()));
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            rng_seed: seed,
            ..self.clone()
        }
    }
}

/// A linear subspace stored as a matrix of orthonormal columns.
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace {
    ambient_dim: usize,
    basis: DMatrix<f64>,
}

impl Subspace {
    pub fn new(ambient_dim: usize, basis: DMatrix<f64>) -> Self {
        debug_assert_eq!(basis.nrows(), ambient_dim);
        Self { ambient_dim, basis }
    }

    pub fn zero(ambient_dim: usize) -> Self {
        Self::new(ambient_dim, DMatrix::zeros(ambient_dim, 0))
    }

    pub fn full(ambient_dim: usize) -> Self {
        Self::new(ambient_dim, DMatrix::identity(ambient_dim, ambient_dim))
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn vector(&self, k: usize) -> DVector<f64> {
        self.basis.column(k).into_owned()
    }

    pub fn project(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.basis * (self.basis.transpose() * v)
    }

    /// Distance from `v` to the subspace.
    pub fn distance(&self, v: &DVector<f64>) -> f64 {
        (v - self.project(v)).norm()
    }

    pub fn contains(&self, v: &DVector<f64>, tol: f64) -> bool {
        self.distance(v) <= tol * v.norm().max(1.0)
    }
}

fn check_finite(m: &DMatrix<f64>) -> Result<()> {
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            if !m[(r, c)].is_finite() {
                return Err(Error::NonFinite { row: r, col: c });
            }
        }
    }
    Ok(())
}

/// Singular values together with a full `cols x cols` right factor `V`.
/// Wide matrices are padded with zero rows so that `V` is complete.
fn full_right_svd(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let (rows, cols) = m.shape();
    let padded = if rows < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v = svd.v_t.expect("requested V^T").transpose();
    (svd.singular_values.iter().copied().collect(), v)
}

fn threshold(shape: (usize, usize), sigma: &[f64], rel_tol: f64) -> f64 {
    let smax = sigma.iter().copied().fold(0.0, f64::max);
    shape.0.max(shape.1) as f64 * smax * rel_tol
}

/// Numerical rank with the relative threshold of `policy`.
pub fn numeric_rank(m: &DMatrix<f64>, policy: &NumericPolicy) -> Result<usize> {
    rank_with_tol(m, policy.rank_rel_tol)
}

pub fn rank_with_tol(m: &DMatrix<f64>, rel_tol: f64) -> Result<usize> {
    check_finite(m)?;
    if m.is_empty() {
        return Ok(0);
    }
    let sigma: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    let smax = sigma.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return Ok(0);
    }
    let tol = threshold(m.shape(), &sigma, rel_tol);
    Ok(sigma.iter().filter(|&&s| s > tol).count())
}

/// Orthonormal basis of the right null space.
pub fn kernel(m: &DMatrix<f64>, policy: &NumericPolicy) -> Result<Subspace> {
    check_finite(m)?;
    let (rows, cols) = m.shape();
    if cols == 0 {
        return Ok(Subspace::zero(0));
    }
    if rows == 0 {
        return Ok(Subspace::full(cols));
    }
    let (sigma, v) = full_right_svd(m);
    let tol = threshold((rows, cols), &sigma, policy.rank_rel_tol);
    let keep: Vec<usize> = (0..cols).filter(|&k| sigma[k] <= tol).collect();
    Ok(Subspace::new(cols, v.select_columns(&keep)))
}

/// Orthonormal basis of the left null space, i.e. the kernel of `m^T`.
pub fn cokernel(m: &DMatrix<f64>, policy: &NumericPolicy) -> Result<Subspace> {
    kernel(&m.transpose(), policy)
}

/// Kernel with an absolute singular-value cut-off. Used for fixed subspaces of
/// group elements, where entries are `O(1)` by construction.
pub fn kernel_abs(m: &DMatrix<f64>, tol: f64) -> Result<Subspace> {
    check_finite(m)?;
    let (rows, cols) = m.shape();
    if cols == 0 {
        return Ok(Subspace::zero(0));
    }
    if rows == 0 {
        return Ok(Subspace::full(cols));
    }
    let (sigma, v) = full_right_svd(m);
    let keep: Vec<usize> = (0..cols).filter(|&k| sigma[k] <= tol).collect();
    Ok(Subspace::new(cols, v.select_columns(&keep)))
}

/// Orthonormal basis of the column space of `m`.
pub fn column_space(m: &DMatrix<f64>, policy: &NumericPolicy) -> Result<Subspace> {
    check_finite(m)?;
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Ok(Subspace::zero(rows));
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let sigma: Vec<f64> = svd.singular_values.iter().copied().collect();
    let smax = sigma.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return Ok(Subspace::zero(rows));
    }
    let tol = threshold((rows, cols), &sigma, policy.rank_rel_tol);
    let keep: Vec<usize> = (0..sigma.len()).filter(|&k| sigma[k] > tol).collect();
    Ok(Subspace::new(rows, u.select_columns(&keep)))
}

/// Canonical orthonormal basis of `space`: Gram-Schmidt applied to the
/// projections of the standard basis vectors, in coordinate order.
/// Coordinate-aligned subspaces come out as unit coordinate vectors.
pub fn canonical_basis(space: &Subspace, tol: f64) -> DMatrix<f64> {
    let d = space.ambient_dim();
    let mut cols: Vec<DVector<f64>> = Vec::with_capacity(space.dim());
    for k in 0..d {
        if cols.len() == space.dim() {
            break;
        }
        let mut v = space.project(&DVector::from_fn(d, |r, _| if r == k { 1.0 } else { 0.0 }));
        for c in &cols {
            let dot = c.dot(&v);
            v -= c * dot;
        }
        let norm = v.norm();
        if norm > tol.max(1e-6) {
            cols.push(v / norm);
        }
    }
    for v in cols.iter_mut() {
        for x in v.iter_mut() {
            if x.abs() < 1e-15 {
                *x = 0.0;
            }
        }
    }
    if cols.is_empty() {
        DMatrix::zeros(d, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Frobenius-norm residual helper `||m x|| / max(1, ||x||)`.
pub fn relative_residual(m: &DMatrix<f64>, x: &DVector<f64>) -> f64 {
    if m.ncols() == 0 {
        return 0.0;
    }
    (m * x).norm() / x.norm().max(1.0)
}

/// Residual of a row vector against the rows of `m`: `||w m|| / max(1, ||w||)`.
pub fn relative_left_residual(m: &DMatrix<f64>, w: &DVector<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    (m.transpose() * w).norm() / w.norm().max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p() -> NumericPolicy {
        NumericPolicy::default()
    }

    #[test]
    fn rank_examples() {
        assert_eq!(numeric_rank(&DMatrix::identity(3, 3), &p()).unwrap(), 3);
        assert_eq!(numeric_rank(&DMatrix::from_element(2, 2, 1.0), &p()).unwrap(), 1);
        assert_eq!(numeric_rank(&DMatrix::zeros(3, 4), &p()).unwrap(), 0);
        assert_eq!(numeric_rank(&DMatrix::zeros(0, 4), &p()).unwrap(), 0);
    }

    #[test]
    fn non_finite_is_an_error() {
        let mut m = DMatrix::identity(2, 2);
        m[(1, 0)] = f64::NAN;
        assert!(matches!(
            numeric_rank(&m, &p()),
            Err(Error::NonFinite { row: 1, col: 0 })
        ));
        assert!(kernel(&m, &p()).is_err());
    }

    #[test]
    fn kernel_examples() {
        let k = kernel(&DMatrix::zeros(2, 3), &p()).unwrap();
        assert_eq!(k.dim(), 3);
        let k = kernel(&DMatrix::from_row_slice(1, 2, &[1.0, -1.0]), &p()).unwrap();
        assert_eq!(k.dim(), 1);
        let v = k.vector(0);
        let s = 1.0 / 2f64.sqrt();
        assert!((v[0].abs() - s).abs() < 1e-12 && (v[0] - v[1]).abs() < 1e-12);
    }

    #[test]
    fn cokernel_examples() {
        assert_eq!(cokernel(&DMatrix::zeros(2, 3), &p()).unwrap().dim(), 2);
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 1.0, 2.0, 3.0]);
        let c = cokernel(&m, &p()).unwrap();
        assert_eq!(c.dim(), 1);
        let w = c.vector(0);
        assert!((w[0] + w[1]).abs() < 1e-12);
        assert!((w[0].abs() - 1.0 / 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rank_nullity_on_random_6x8() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for r in 0..=6 {
            // rank-r product of random factors
            let a = DMatrix::from_fn(6, r, |_, _| rng.random_range(-1.0..1.0));
            let b = DMatrix::from_fn(r, 8, |_, _| rng.random_range(-1.0..1.0));
            let m = &a * &b;
            let rank = numeric_rank(&m, &p()).unwrap();
            assert_eq!(rank, r);
            assert_eq!(rank + kernel(&m, &p()).unwrap().dim(), 8);
            assert_eq!(rank + cokernel(&m, &p()).unwrap().dim(), 6);
        }
    }

    #[test]
    fn canonical_basis_prefers_coordinate_axes() {
        let s = Subspace::new(2, DMatrix::from_column_slice(2, 1, &[0.0, -1.0]));
        let b = canonical_basis(&s, 1e-9);
        assert_eq!(b, DMatrix::from_column_slice(2, 1, &[0.0, 1.0]));
        let b = canonical_basis(&Subspace::full(3), 1e-9);
        assert_eq!(b, DMatrix::identity(3, 3));
    }

    proptest! {
        #[test]
        fn rank_invariant_under_row_permutation_and_scaling(
            seed in 0u64..1000, r in 0usize..5,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = DMatrix::from_fn(5, r, |_, _| rng.random_range(-1.0..1.0));
            let b = DMatrix::from_fn(r, 7, |_, _| rng.random_range(-1.0..1.0));
            let m = &a * &b;
            let base = numeric_rank(&m, &p()).unwrap();
            let mut perm: Vec<usize> = (0..5).collect();
            for i in (1..5).rev() { perm.swap(i, rng.random_range(0..=i)); }
            let mut t = m.select_rows(&perm);
            for i in 0..5 { let s = rng.random_range(0.5..2.0); t.row_mut(i).scale_mut(s); }
            for j in 0..7 { let s = rng.random_range(0.5..2.0); t.column_mut(j).scale_mut(s); }
            prop_assert_eq!(numeric_rank(&t, &p()).unwrap(), base);
            let k = kernel(&m, &p()).unwrap();
            for c in 0..k.dim() {
                prop_assert!((&m * k.vector(c)).norm() < 1e-10);
            }
        }
    }
}
