//! The orbit rigidity matrix: one row per edge orbit, one column block per
//! vertex-orbit representative. Its kernel and cokernel are the fully
//! symmetric motions and stresses.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cokernel, kernel, numeric_rank, NumericPolicy, Subspace};
use crate::rigidity::{spans_ambient, trivial_generators};
use crate::symmetry::{
    compute_orbits, fixed_subspace, sample_with, validate_symmetric, EdgeOrbitForm, OrbitData,
    SymFramework,
};

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitRow {
    /// Representative edge (minimum index in its orbit).
    pub edge: usize,
    pub form: EdgeOrbitForm,
    /// Case 2 with `y(p_i) = y^{-1}(p_i)`, written `2 (p_i - y(p_i)) M_i`.
    pub special: bool,
    pub orbit_size: usize,
}

#[derive(Clone, Debug)]
pub struct OrbitRigidityMatrix {
    pub matrix: DMatrix<f64>,
    pub rows: Vec<OrbitRow>,
    pub col_blocks: Vec<Range<usize>>,
    pub bases: Vec<DMatrix<f64>>,
    pub orbits: OrbitData,
}

impl OrbitRigidityMatrix {
    pub fn rank(&self, policy: &NumericPolicy) -> Result<usize> {
        numeric_rank(&self.matrix, policy)
    }

    pub fn n_cols(&self) -> usize {
        self.matrix.ncols()
    }
}

/// `M_i` for every representative: canonical bases of the fixed subspaces.
pub fn default_bases(sf: &SymFramework, orbits: &OrbitData, policy: &NumericPolicy) -> Result<Vec<DMatrix<f64>>> {
    orbits
        .reps
        .iter()
        .map(|&i| fixed_subspace(sf, i, policy).map(|s| s.basis().clone()))
        .collect()
}

pub fn orbit_matrix(sf: &SymFramework, policy: &NumericPolicy) -> Result<OrbitRigidityMatrix> {
    let orbits = compute_orbits(sf);
    let bases = default_bases(sf, &orbits, policy)?;
    orbit_matrix_with_bases(sf, orbits, bases, policy)
}

/// Orbit matrix for caller-supplied bases `M_i` (columns spanning `U(p_i)`).
pub fn orbit_matrix_with_bases(
    sf: &SymFramework,
    orbits: OrbitData,
    bases: Vec<DMatrix<f64>>,
    policy: &NumericPolicy,
) -> Result<OrbitRigidityMatrix> {
    let fw = sf.framework();
    let g = sf.group();
    let sig = fw.signature();
    let d = fw.dim();
    if bases.len() != orbits.n_vertex_orbits() || bases.iter().any(|b| b.nrows() != d) {
        return Err(Error::InvalidArgument(
            "one basis with D rows is needed per vertex orbit".into(),
        ));
    }
    let mut col_blocks = Vec::with_capacity(bases.len());
    let mut start = 0;
    for b in &bases {
        col_blocks.push(start..start + b.ncols());
        start += b.ncols();
    }
    let block_of = |v: usize| orbits.orbit_of_vertex[v];

    let mut matrix = DMatrix::zeros(orbits.n_edge_orbits(), start);
    let mut rows = Vec::with_capacity(orbits.n_edge_orbits());
    for (r, (&edge, form)) in orbits.edge_reps.iter().zip(&orbits.forms).enumerate() {
        let mut special = false;
        match *form {
            EdgeOrbitForm::Distinct { i, x, j } => {
                let xi = g.inverse(x);
                let bi = sig.hat(&(fw.point(i) - g.element(x) * fw.point(j))).transpose() * &bases[block_of(i)];
                let bj = sig.hat(&(fw.point(j) - g.element(xi) * fw.point(i))).transpose() * &bases[block_of(j)];
                matrix.view_mut((r, col_blocks[block_of(i)].start), (1, bi.ncols())).copy_from(&bi);
                matrix.view_mut((r, col_blocks[block_of(j)].start), (1, bj.ncols())).copy_from(&bj);
            }
            EdgeOrbitForm::Same { i, y } => {
                let p = fw.point(i);
                let yp = g.element(y) * p;
                let yinvp = g.element(g.inverse(y)) * p;
                special = (&yp - &yinvp).norm() <= policy.group_tol * p.norm().max(1.0);
                let v = if special {
                    2.0 * (p - &yp)
                } else {
                    2.0 * p - &yp - &yinvp
                };
                let bi = sig.hat(&v).transpose() * &bases[block_of(i)];
                matrix.view_mut((r, col_blocks[block_of(i)].start), (1, bi.ncols())).copy_from(&bi);
            }
        }
        rows.push(OrbitRow {
            edge,
            form: *form,
            special,
            orbit_size: orbits.edge_orbits[r].len(),
        });
    }
    Ok(OrbitRigidityMatrix {
        matrix,
        rows,
        col_blocks,
        bases,
        orbits,
    })
}

/// Kernel of the orbit matrix, in orbit coordinates.
pub fn symmetric_motions(om: &OrbitRigidityMatrix, policy: &NumericPolicy) -> Result<Subspace> {
    kernel(&om.matrix, policy)
}

/// Cokernel of the orbit matrix, one entry per edge orbit.
pub fn symmetric_stresses(om: &OrbitRigidityMatrix, policy: &NumericPolicy) -> Result<Subspace> {
    cokernel(&om.matrix, policy)
}

/// `L`: orbit coordinates to full velocities, `u_{x(i)} = M_x M_i v_i`.
pub fn lift_matrix(sf: &SymFramework, om: &OrbitRigidityMatrix) -> DMatrix<f64> {
    let g = sf.group();
    let tm = sf.type_map();
    let d = sf.framework().dim();
    let n = sf.framework().n_vertices();
    let mut l = DMatrix::zeros(d * n, om.n_cols());
    for (o, &i) in om.orbits.reps.iter().enumerate() {
        let cols = om.col_blocks[o].clone();
        let mut done = vec![false; n];
        for k in 0..g.order() {
            let v = tm.apply(k, i);
            if std::mem::replace(&mut done[v], true) {
                continue;
            }
            let block = g.element(k) * &om.bases[o];
            l.view_mut((v * d, cols.start), (d, cols.len())).copy_from(&block);
        }
    }
    l
}

pub fn lift_motion(sf: &SymFramework, om: &OrbitRigidityMatrix, v: &DVector<f64>) -> Result<DVector<f64>> {
    if v.len() != om.n_cols() {
        return Err(Error::DimensionMismatch {
            expected: om.n_cols(),
            found: v.len(),
        });
    }
    Ok(lift_matrix(sf, om) * v)
}

/// Full stress from orbit coordinates: `w_e = omega_o * s_max / |o|`, where
/// `s_max` is the largest edge-orbit size. The weights make `w` a genuine
/// self-stress; with equal orbit sizes this is a plain copy.
pub fn lift_stress(om: &OrbitRigidityMatrix, omega: &DVector<f64>) -> Result<DVector<f64>> {
    if omega.len() != om.rows.len() {
        return Err(Error::DimensionMismatch {
            expected: om.rows.len(),
            found: omega.len(),
        });
    }
    let n_edges = om.orbits.orbit_of_edge.len();
    let s_max = om.rows.iter().map(|r| r.orbit_size).max().unwrap_or(1) as f64;
    Ok(DVector::from_fn(n_edges, |e, _| {
        let o = om.orbits.orbit_of_edge[e];
        omega[o] * s_max / om.rows[o].orbit_size as f64
    }))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymmetricReport {
    pub group_order: usize,
    pub vertex_orbits: usize,
    pub edge_orbits: usize,
    pub orbit_rank: usize,
    pub sym_motion_dim: usize,
    pub sym_trivial_dim: usize,
    pub sym_flex_dim: usize,
    pub sym_stress_dim: usize,
}

/// Symmetric trivial motions are `T ∩ im L`, of dimension
/// `rank T + rank L - rank [T L]`.
pub fn symmetric_trivial_dim(
    sf: &SymFramework,
    om: &OrbitRigidityMatrix,
    fix_origin: bool,
    policy: &NumericPolicy,
) -> Result<usize> {
    let fw = sf.framework();
    let t = trivial_generators(fw.config().points(), fw.signature(), fix_origin);
    let l = lift_matrix(sf, om);
    let mut both = DMatrix::zeros(t.nrows(), t.ncols() + l.ncols());
    both.view_mut((0, 0), t.shape()).copy_from(&t);
    both.view_mut((0, t.ncols()), l.shape()).copy_from(&l);
    let rt = numeric_rank(&t, policy)?;
    let rl = numeric_rank(&l, policy)?;
    let rb = numeric_rank(&both, policy)?;
    Ok(rt + rl - rb)
}

pub fn symmetric_analysis(
    sf: &SymFramework,
    om: &OrbitRigidityMatrix,
    fix_origin: bool,
    policy: &NumericPolicy,
) -> Result<SymmetricReport> {
    let rank = om.rank(policy)?;
    let sym_motion_dim = om.n_cols() - rank;
    let sym_trivial_dim = symmetric_trivial_dim(sf, om, fix_origin, policy)?;
    Ok(SymmetricReport {
        group_order: sf.group().order(),
        vertex_orbits: om.orbits.n_vertex_orbits(),
        edge_orbits: om.orbits.n_edge_orbits(),
        orbit_rank: rank,
        sym_motion_dim,
        sym_trivial_dim,
        sym_flex_dim: sym_motion_dim.saturating_sub(sym_trivial_dim),
        sym_stress_dim: om.rows.len() - rank,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SRegularity {
    pub rank: usize,
    pub max_rank: usize,
    pub s_regular: bool,
}

/// Compares the orbit-matrix rank at `p` with the maximum over
/// `policy.sample_count` random symmetric configurations (and `p` itself).
pub fn s_regular_with<R: Rng + ?Sized>(
    sf: &SymFramework,
    om: &OrbitRigidityMatrix,
    policy: &NumericPolicy,
    rng: &mut R,
) -> Result<SRegularity> {
    policy.validate()?;
    let d = sf.framework().dim();
    let spaces: Vec<Subspace> = om.bases.iter().map(|b| Subspace::new(d, b.clone())).collect();
    let rank = om.rank(policy)?;
    let mut max_rank = rank;
    for _ in 0..policy.sample_count {
        let c = sample_with(sf.type_map(), &om.orbits, &spaces, rng)?;
        let fw = sf.framework().with_config(c)?;
        let sample = validate_symmetric(&fw, sf.type_map(), policy)?;
        let m = orbit_matrix_with_bases(&sample, om.orbits.clone(), om.bases.clone(), policy)?;
        max_rank = max_rank.max(m.rank(policy)?);
    }
    Ok(SRegularity {
        rank,
        max_rank,
        s_regular: rank == max_rank,
    })
}

pub fn s_regular<R: Rng + ?Sized>(sf: &SymFramework, policy: &NumericPolicy, rng: &mut R) -> Result<bool> {
    let om = orbit_matrix(sf, policy)?;
    Ok(s_regular_with(sf, &om, policy, rng)?.s_regular)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlexPrediction {
    /// S-regular with a nontrivial symmetric flex. Always false when
    /// `withheld`.
    pub predicted: bool,
    /// Joints fail to span the ambient space; no prediction is made.
    pub withheld: bool,
    pub s_regular: bool,
    pub sym_flex_dim: usize,
}

/// Predicts a symmetric finite flex: an S-regular point whose orbit matrix
/// has a non-trivial kernel.
pub fn predict_finite_flex<R: Rng + ?Sized>(
    sf: &SymFramework,
    policy: &NumericPolicy,
    rng: &mut R,
) -> Result<FlexPrediction> {
    let om = orbit_matrix(sf, policy)?;
    predict_with(sf, &om, false, policy, rng)
}

pub fn predict_with<R: Rng + ?Sized>(
    sf: &SymFramework,
    om: &OrbitRigidityMatrix,
    fix_origin: bool,
    policy: &NumericPolicy,
    rng: &mut R,
) -> Result<FlexPrediction> {
    let report = symmetric_analysis(sf, om, fix_origin, policy)?;
    let reg = s_regular_with(sf, om, policy, rng)?;
    let withheld = !spans_ambient(sf.framework().config(), fix_origin, policy)?;
    Ok(FlexPrediction {
        predicted: !withheld && reg.s_regular && report.sym_flex_dim > 0,
        withheld,
        s_regular: reg.s_regular,
        sym_flex_dim: report.sym_flex_dim,
    })
}
