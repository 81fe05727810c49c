//! Rigidity matrices in any signature, motion and stress spaces, and
//! Monte-Carlo regular-point estimates.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::framework::{Configuration, Framework};
use crate::graph::Graph;
use crate::linalg::{cokernel, column_space, kernel, numeric_rank, NumericPolicy, Subspace};
use crate::metric::Signature;

pub use crate::orbit::{predict_finite_flex, FlexPrediction};

/// `|E| x (D n)` matrix whose row for `{i, j}` holds `hat(p_i - p_j)` in
/// block `i` and `hat(p_j - p_i)` in block `j`.
#[derive(Clone, Debug)]
pub struct RigidityMatrix {
    pub matrix: DMatrix<f64>,
    pub edges: Vec<(usize, usize)>,
    pub block: usize,
}

impl RigidityMatrix {
    pub fn col_block(&self, i: usize) -> Range<usize> {
        i * self.block..(i + 1) * self.block
    }

    pub fn rank(&self, policy: &NumericPolicy) -> Result<usize> {
        numeric_rank(&self.matrix, policy)
    }
}

pub fn rigidity_matrix(fw: &Framework) -> RigidityMatrix {
    let d = fw.dim();
    let sig = fw.signature();
    let edges = fw.graph().edges().to_vec();
    let mut m = DMatrix::zeros(edges.len(), d * fw.n_vertices());
    for (r, &(i, j)) in edges.iter().enumerate() {
        let diff = sig.hat(&(fw.point(i) - fw.point(j)));
        for k in 0..d {
            m[(r, i * d + k)] = diff[k];
            m[(r, j * d + k)] = -diff[k];
        }
    }
    RigidityMatrix {
        matrix: m,
        edges,
        block: d,
    }
}

pub fn infinitesimal_motions(fw: &Framework, policy: &NumericPolicy) -> Result<Subspace> {
    kernel(&rigidity_matrix(fw).matrix, policy)
}

pub fn self_stresses(fw: &Framework, policy: &NumericPolicy) -> Result<Subspace> {
    cokernel(&rigidity_matrix(fw).matrix, policy)
}

/// Generators `u_i = A p_i + t` of the trivial motions, one column each:
/// translations first (unless `fix_origin`), then `A = J K` for the standard
/// skew basis `K = E_ab - E_ba`, `a < b`.
pub fn trivial_generators(points: &[DVector<f64>], sig: Signature, fix_origin: bool) -> DMatrix<f64> {
    let d = sig.dim();
    let n = points.len();
    let mut cols: Vec<DVector<f64>> = Vec::new();
    if !fix_origin {
        for k in 0..d {
            cols.push(DVector::from_fn(d * n, |r, _| if r % d == k { 1.0 } else { 0.0 }));
        }
    }
    for a in 0..d {
        for b in a + 1..d {
            let mut u = DVector::zeros(d * n);
            for (i, p) in points.iter().enumerate() {
                // (J K p)_a = s_a p_b, (J K p)_b = -s_b p_a
                u[i * d + a] = sig.sign(a) * p[b];
                u[i * d + b] = -sig.sign(b) * p[a];
            }
            cols.push(u);
        }
    }
    if cols.is_empty() {
        DMatrix::zeros(d * n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Span of the trivial motions evaluated at the configuration.
pub fn trivial_motion_basis(fw: &Framework, fix_origin: bool, policy: &NumericPolicy) -> Result<Subspace> {
    column_space(
        &trivial_generators(fw.config().points(), fw.signature(), fix_origin),
        policy,
    )
}

/// Whether the joints span the ambient space: affinely, or linearly when the
/// origin is a fixed point of the geometry.
pub fn spans_ambient(config: &Configuration, linear: bool, policy: &NumericPolicy) -> Result<bool> {
    let d = config.dim();
    let n = config.len();
    if n == 0 {
        return Ok(d == 0);
    }
    let centroid = if linear {
        DVector::zeros(d)
    } else {
        config.points().iter().fold(DVector::zeros(d), |a, p| a + p) / n as f64
    };
    let m = DMatrix::from_fn(d, n, |r, c| config.point(c)[r] - centroid[r]);
    Ok(numeric_rank(&m, policy)? == d)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdicts {
    pub infinitesimally_rigid: bool,
    pub independent: bool,
    pub isostatic: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub n_vertices: usize,
    pub n_edges: usize,
    pub dimension: usize,
    pub rank: usize,
    pub motion_dim: usize,
    pub trivial_dim: usize,
    pub flex_dim: usize,
    pub stress_dim: usize,
    pub spans_ambient: bool,
    pub verdicts: Verdicts,
}

impl AnalysisReport {
    pub(crate) fn assemble(rows: usize, cols: usize, rank: usize, trivial_dim: usize, spans: bool, n: usize, dim: usize) -> Self {
        let motion_dim = cols - rank;
        let flex_dim = motion_dim.saturating_sub(trivial_dim);
        let stress_dim = rows - rank;
        let infinitesimally_rigid = flex_dim == 0 && spans;
        let independent = stress_dim == 0;
        Self {
            n_vertices: n,
            n_edges: rows,
            dimension: dim,
            rank,
            motion_dim,
            trivial_dim,
            flex_dim,
            stress_dim,
            spans_ambient: spans,
            verdicts: Verdicts {
                infinitesimally_rigid,
                independent,
                isostatic: infinitesimally_rigid && independent,
            },
        }
    }
}

pub fn analyze(fw: &Framework, policy: &NumericPolicy) -> Result<AnalysisReport> {
    analyze_with(fw, false, policy)
}

/// As [`analyze`], but with `origin_fixed` only rotations count as trivial
/// and the span test is linear. Used for coned frameworks whose cone joint
/// sits at the origin.
pub fn analyze_with(fw: &Framework, origin_fixed: bool, policy: &NumericPolicy) -> Result<AnalysisReport> {
    let r = rigidity_matrix(fw);
    let rank = r.rank(policy)?;
    let trivial = trivial_motion_basis(fw, origin_fixed, policy)?.dim();
    let spans = spans_ambient(fw.config(), origin_fixed, policy)?;
    Ok(AnalysisReport::assemble(
        r.matrix.nrows(),
        r.matrix.ncols(),
        rank,
        trivial,
        spans,
        fw.n_vertices(),
        fw.dim(),
    ))
}

/// Uniform random configuration in `[-1, 1]^dim`, redrawn on the (probability
/// zero) event of coincident joints.
pub fn random_config<R: Rng + ?Sized>(n: usize, dim: usize, rng: &mut R) -> Configuration {
    loop {
        let points = (0..n)
            .map(|_| DVector::from_fn(dim, |_, _| rng.random_range(-1.0..=1.0)))
            .collect();
        if let Ok(c) = Configuration::new(dim, points) {
            return c;
        }
    }
}

/// Monte-Carlo estimate of the generic rank of a graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegularEstimate {
    pub max_rank: usize,
    pub samples: usize,
}

impl RegularEstimate {
    pub fn is_regular(&self, fw: &Framework, policy: &NumericPolicy) -> Result<bool> {
        Ok(rigidity_matrix(fw).rank(policy)? == self.max_rank)
    }
}

/// Maximum rank over `policy.sample_count` random placements. Exact with
/// probability one, since regular points form a dense open set.
pub fn estimate_regular<R: Rng + ?Sized>(
    g: &Graph,
    sig: Signature,
    policy: &NumericPolicy,
    rng: &mut R,
) -> Result<RegularEstimate> {
    policy.validate()?;
    let mut max_rank = 0;
    for _ in 0..policy.sample_count {
        let c = random_config(g.n_vertices(), sig.dim(), rng);
        let fw = Framework::new(g.clone(), c, sig)?;
        max_rank = max_rank.max(rigidity_matrix(&fw).rank(policy)?);
    }
    Ok(RegularEstimate {
        max_rank,
        samples: policy.sample_count,
    })
}
