//! Coning and the transfers it induces.
//!
//! A Euclidean framework `(G, p)` in `E^d` is embedded at height one,
//! `p̄_i = (p_i, 1)`, and joined to a cone joint at the origin. Joints may then
//! be slid along their rays (`q_i = α_i p̄_i`), pushed onto the sphere, the
//! hyperboloid or de Sitter space, inverted through the origin, or have the
//! signature of some coordinates switched. Every step preserves the rigidity
//! data; [`verify_transfer`] checks that clause by clause.
//!
//! The cone joint is vertex `n` internally (vertex 0 in the external
//! numbering) and its columns are omitted unless asked for: it is pinned.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::framework::{Configuration, Framework};
use crate::graph::Graph;
use crate::linalg::{cokernel, kernel, numeric_rank, NumericPolicy};
use crate::metric::{ConeKind, Signature};
use crate::orbit::{
    default_bases, lift_motion, lift_stress, orbit_matrix_with_bases, predict_with,
    s_regular_with, symmetric_analysis, OrbitRigidityMatrix, SymmetricReport,
};
use crate::rigidity::{
    analyze, estimate_regular, random_config, rigidity_matrix, trivial_generators, spans_ambient,
    AnalysisReport, RigidityMatrix,
};
use crate::symmetry::{compute_orbits, validate_symmetric, EdgeOrbitForm, PointGroup, SymFramework, TypeMap};

/// Joints closer than this to the unit sphere are rejected by the hyperbolic
/// and de Sitter targets.
pub const DOMAIN_MARGIN: f64 = 1e-8;

/// Residual bound for transferred motions and stresses.
pub const TRANSFER_TOL: f64 = 1e-8;

/// Geometry a framework is analysed in or transferred to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum MetricTag {
    EuclideanPlane,
    EuclideanCone,
    Hemisphere,
    WholeSphere,
    MinkowskiCone,
    Hyperbolic,
    DeSitter,
    /// Minkowskian cone followed by signature switches down to `(p, q)`.
    Signature(Signature),
}

impl MetricTag {
    pub fn cone_kind(self) -> Option<ConeKind> {
        match self {
            MetricTag::EuclideanPlane => None,
            MetricTag::EuclideanCone | MetricTag::Hemisphere | MetricTag::WholeSphere => Some(ConeKind::Euclidean),
            MetricTag::MinkowskiCone | MetricTag::Hyperbolic | MetricTag::DeSitter | MetricTag::Signature(_) => {
                Some(ConeKind::Minkowski)
            }
        }
    }
}

impl fmt::Display for MetricTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricTag::EuclideanPlane => f.write_str("euclidean_plane"),
            MetricTag::EuclideanCone => f.write_str("euclidean_cone"),
            MetricTag::Hemisphere => f.write_str("hemisphere"),
            MetricTag::WholeSphere => f.write_str("whole_sphere"),
            MetricTag::MinkowskiCone => f.write_str("minkowski_cone"),
            MetricTag::Hyperbolic => f.write_str("hyperbolic"),
            MetricTag::DeSitter => f.write_str("de_sitter"),
            MetricTag::Signature(s) => write!(f, "signature({},{})", s.pos, s.neg),
        }
    }
}

impl FromStr for MetricTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        Ok(match t {
            "euclidean_plane" => MetricTag::EuclideanPlane,
            "euclidean_cone" => MetricTag::EuclideanCone,
            "hemisphere" => MetricTag::Hemisphere,
            "whole_sphere" => MetricTag::WholeSphere,
            "minkowski_cone" => MetricTag::MinkowskiCone,
            "hyperbolic" => MetricTag::Hyperbolic,
            "de_sitter" => MetricTag::DeSitter,
            _ => {
                let inner = t
                    .strip_prefix("signature(")
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(|| Error::InvalidArgument(format!("unknown metric tag `{t}`")))?;
                let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
                let parse = |x: &str| {
                    x.parse::<usize>()
                        .map_err(|_| Error::InvalidArgument(format!("bad signature count `{x}` in `{t}`")))
                };
                if parts.len() != 2 {
                    return Err(Error::InvalidArgument(format!("expected signature(p,q), got `{t}`")));
                }
                MetricTag::Signature(Signature::new(parse(parts[0])?, parse(parts[1])?)?)
            }
        })
    }
}

impl From<MetricTag> for String {
    fn from(t: MetricTag) -> String {
        t.to_string()
    }
}

impl TryFrom<String> for MetricTag {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// The cone graph `G * o`: vertex `n` joined to every vertex.
pub fn cone_graph(g: &Graph) -> Graph {
    g.cone()
}

/// A coned framework: joints `q_i = α_i (p_i, 1)` over a Euclidean base, with
/// the cone joint pinned at the origin.
#[derive(Clone, Debug)]
pub struct ConedFramework {
    base: SymFramework,
    kind: ConeKind,
    alphas: Vec<f64>,
    joints: Vec<DVector<f64>>,
    signature: Signature,
    /// `S*` acting on the joints; `None` once a step broke the symmetry.
    type_map: Option<TypeMap>,
}

fn embed(p: &DVector<f64>, alpha: f64) -> DVector<f64> {
    let d = p.len();
    DVector::from_fn(d + 1, |r, _| alpha * if r < d { p[r] } else { 1.0 })
}

impl ConedFramework {
    pub fn base(&self) -> &SymFramework {
        &self.base
    }

    pub fn base_framework(&self) -> &Framework {
        self.base.framework()
    }

    pub fn kind(&self) -> ConeKind {
        self.kind
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn joints(&self) -> &[DVector<f64>] {
        &self.joints
    }

    pub fn joint(&self, i: usize) -> &DVector<f64> {
        &self.joints[i]
    }

    pub fn signature(&self) -> Signature {
        self.signature
    }

    /// Ambient dimension `D + 1`.
    pub fn dim(&self) -> usize {
        self.signature.dim()
    }

    pub fn n_joints(&self) -> usize {
        self.joints.len()
    }

    pub fn type_map(&self) -> Option<&TypeMap> {
        self.type_map.as_ref()
    }

    /// Signature the cone had before any switches.
    pub fn cone_signature(&self) -> Signature {
        self.kind
            .extend(self.base.framework().signature())
            .expect("base is Euclidean")
    }

    /// The framework on `G * o` with the cone joint at the origin.
    pub fn full_framework(&self) -> Result<Framework> {
        let mut points = self.joints.clone();
        points.push(DVector::zeros(self.dim()));
        Framework::new(
            cone_graph(self.base.framework().graph()),
            Configuration::new(self.dim(), points)?,
            self.signature,
        )
    }

    /// The full framework with `S*` acting (cone joint fixed), when the
    /// symmetry survived.
    pub fn sym_framework(&self, policy: &NumericPolicy) -> Result<Option<SymFramework>> {
        match &self.type_map {
            None => Ok(None),
            Some(tm) => validate_symmetric(&self.full_framework()?, &tm.with_fixed_vertex(), policy).map(Some),
        }
    }

    fn with_alphas(&self, alphas: Vec<f64>, type_map: Option<TypeMap>) -> Self {
        let joints = self
            .base
            .framework()
            .config()
            .points()
            .iter()
            .zip(&alphas)
            .map(|(p, &a)| embed(p, a))
            .collect();
        Self {
            base: self.base.clone(),
            kind: self.kind,
            alphas,
            joints,
            signature: self.signature,
            type_map,
        }
    }

    /// The per-coordinate signs `D` relating the current signature to the
    /// cone signature before switches.
    pub fn flip_mask(&self) -> Vec<f64> {
        let s0 = self.cone_signature();
        (0..self.dim())
            .map(|t| if s0.sign(t) == self.signature.sign(t) { 1.0 } else { -1.0 })
            .collect()
    }
}

/// Domain test for targets that live on a quadric.
pub fn check_domain(fw: &Framework, target: MetricTag) -> Result<()> {
    let inside = match target {
        MetricTag::Hyperbolic => true,
        MetricTag::DeSitter => false,
        _ => return Ok(()),
    };
    for (i, p) in fw.config().points().iter().enumerate() {
        let r = p.norm();
        let reason = if (r - 1.0).abs() <= DOMAIN_MARGIN {
            Some(format!("|p| = {r} lies within {DOMAIN_MARGIN:e} of the unit circle"))
        } else if inside && r > 1.0 {
            Some(format!("|p| = {r} lies outside the unit disc"))
        } else if !inside && r < 1.0 {
            Some(format!("|p| = {r} lies inside the unit disc"))
        } else {
            None
        };
        if let Some(reason) = reason {
            return Err(Error::Domain {
                target: target.to_string(),
                vertex: i + 1,
                reason,
            });
        }
    }
    Ok(())
}

/// Cones a Euclidean (symmetric) framework at height one.
pub fn cone(sf: &SymFramework, kind: ConeKind) -> Result<ConedFramework> {
    let base_sig = sf.framework().signature();
    if !base_sig.is_euclidean() {
        return Err(Error::InvalidSignature(format!(
            "coning starts from a Euclidean framework, got signature {base_sig}"
        )));
    }
    let signature = kind.extend(base_sig)?;
    let n = sf.framework().n_vertices();
    let proto = ConedFramework {
        base: sf.clone(),
        kind,
        alphas: vec![],
        joints: vec![],
        signature,
        type_map: Some(sf.type_map().extended(kind)?),
    };
    let tm = proto.type_map.clone();
    Ok(proto.with_alphas(vec![1.0; n], tm))
}

/// Cones with the kind the target needs, after checking its domain. Joints
/// stay at height one; see [`realize`] for the full placement.
pub fn cone_framework(sf: &SymFramework, target: MetricTag) -> Result<ConedFramework> {
    let kind = target.cone_kind().ok_or_else(|| {
        Error::InvalidArgument("euclidean_plane is the base geometry, not a cone target".into())
    })?;
    check_domain(sf.framework(), target)?;
    if let MetricTag::Signature(s) = target {
        if s.dim() != sf.framework().dim() + 1 {
            return Err(Error::InvalidSignature(format!(
                "target {s} needs dimension {}",
                sf.framework().dim() + 1
            )));
        }
    }
    cone(sf, kind)
}

fn constant_on_orbits(sf: &SymFramework, alphas: &[f64]) -> bool {
    compute_orbits(sf).vertex_orbits.iter().all(|orb| {
        orb.iter()
            .all(|&v| (alphas[v] - alphas[orb[0]]).abs() <= 1e-12 * alphas[orb[0]].abs())
    })
}

/// Places joint `i` at `α_i p̄_i`. The `S*` action is kept only when the
/// scalars are constant on vertex orbits.
pub fn pull_vertices(cf: &ConedFramework, alphas: &[f64]) -> Result<ConedFramework> {
    if alphas.len() != cf.n_joints() {
        return Err(Error::DimensionMismatch {
            expected: cf.n_joints(),
            found: alphas.len(),
        });
    }
    if let Some(k) = alphas.iter().position(|a| !a.is_finite() || *a == 0.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha for vertex {} must be finite and nonzero",
            k + 1
        )));
    }
    let tm = cf.type_map.clone().filter(|_| constant_on_orbits(&cf.base, alphas));
    Ok(cf.with_alphas(alphas.to_vec(), tm))
}

/// [`pull_vertices`] with one scalar per vertex orbit.
pub fn pull_orbits(cf: &ConedFramework, orbit_alphas: &[f64]) -> Result<ConedFramework> {
    let orbits = compute_orbits(&cf.base);
    if orbit_alphas.len() != orbits.n_vertex_orbits() {
        return Err(Error::DimensionMismatch {
            expected: orbits.n_vertex_orbits(),
            found: orbit_alphas.len(),
        });
    }
    let alphas: Vec<f64> = (0..cf.n_joints())
        .map(|v| orbit_alphas[orbits.orbit_of_vertex[v]])
        .collect();
    pull_vertices(cf, &alphas)
}

/// Applies `q -> -q` to the selected joints.
pub fn invert_vertices(cf: &ConedFramework, vertices: &[usize]) -> Result<ConedFramework> {
    let mut alphas = cf.alphas.clone();
    for &v in vertices {
        if v >= alphas.len() {
            return Err(Error::InvalidArgument(format!("no vertex {}", v + 1)));
        }
        alphas[v] = -alphas[v];
    }
    pull_vertices(cf, &alphas)
}

/// Inverts whole vertex orbits, which keeps the `S*` symmetry.
pub fn invert_orbits(cf: &ConedFramework, orbits: &[usize]) -> Result<ConedFramework> {
    let data = compute_orbits(&cf.base);
    let mut vertices = Vec::new();
    for &o in orbits {
        let members = data
            .vertex_orbits
            .get(o)
            .ok_or_else(|| Error::InvalidArgument(format!("no vertex orbit {}", o + 1)))?;
        vertices.extend_from_slice(members);
    }
    invert_vertices(cf, &vertices)
}

fn require_unflipped(cf: &ConedFramework, kind: ConeKind, what: &str) -> Result<()> {
    if cf.kind != kind || cf.signature != cf.cone_signature() {
        return Err(Error::InvalidArgument(format!(
            "{what} needs a {} cone without signature switches",
            match kind {
                ConeKind::Euclidean => "Euclidean",
                ConeKind::Minkowski => "Minkowskian",
            }
        )));
    }
    Ok(())
}

fn push_with(cf: &ConedFramework, scale: impl Fn(&DVector<f64>) -> f64) -> Result<ConedFramework> {
    let alphas: Vec<f64> = cf
        .base
        .framework()
        .config()
        .points()
        .iter()
        .zip(&cf.alphas)
        .map(|(p, a)| a.signum() * scale(p))
        .collect();
    pull_vertices(cf, &alphas)
}

/// Scales every joint onto the unit sphere, keeping the side of the origin.
pub fn push_to_sphere(cf: &ConedFramework) -> Result<ConedFramework> {
    require_unflipped(cf, ConeKind::Euclidean, "the sphere")?;
    push_with(cf, |p| 1.0 / (p.norm_squared() + 1.0).sqrt())
}

/// Scales joints onto `<q, q> = -1`; needs `|p_i| < 1`.
pub fn push_to_hyperboloid(cf: &ConedFramework) -> Result<ConedFramework> {
    require_unflipped(cf, ConeKind::Minkowski, "the hyperboloid")?;
    check_domain(cf.base_framework(), MetricTag::Hyperbolic)?;
    push_with(cf, |p| 1.0 / (1.0 - p.norm_squared()).sqrt())
}

/// Scales joints onto `<q, q> = +1`; needs `|p_i| > 1`.
pub fn push_to_de_sitter(cf: &ConedFramework) -> Result<ConedFramework> {
    require_unflipped(cf, ConeKind::Minkowski, "de Sitter space")?;
    check_domain(cf.base_framework(), MetricTag::DeSitter)?;
    push_with(cf, |p| 1.0 / (p.norm_squared() - 1.0).sqrt())
}

/// Central projection back to the height-one hyperplane.
pub fn project_back(cf: &ConedFramework) -> Result<Framework> {
    let d = cf.dim() - 1;
    let mut points = Vec::with_capacity(cf.n_joints());
    for (i, q) in cf.joints.iter().enumerate() {
        let h = q[d];
        if h.abs() <= 1e-12 {
            return Err(Error::Domain {
                target: "projection".into(),
                vertex: i + 1,
                reason: "joint lies on the hyperplane at infinity".into(),
            });
        }
        points.push(q.rows(0, d) / h);
    }
    Framework::new(
        cf.base_framework().graph().clone(),
        Configuration::new(d, points)?,
        Signature::euclidean(d),
    )
}

/// Switches the signature of `|k|` slots without touching coordinates:
/// `k > 0` turns the first `k` negative slots positive, `k < 0` turns the
/// last `|k|` positive slots negative. Switching back uses `-k`.
pub fn flip_signature(sig: Signature, k: i32) -> Result<Signature> {
    let m = k.unsigned_abs() as usize;
    if k >= 0 && m <= sig.neg {
        Ok(Signature {
            pos: sig.pos + m,
            neg: sig.neg - m,
        })
    } else if k < 0 && m < sig.pos {
        Ok(Signature {
            pos: sig.pos - m,
            neg: sig.neg + m,
        })
    } else {
        Err(Error::InvalidArgument(format!("cannot switch {k} slots of signature {sig}")))
    }
}

/// Slot signs `D` with `R(flipped) = R D`; motions map by `u -> D u`.
pub fn flip_mask(sig: Signature, k: i32) -> Result<Vec<f64>> {
    let new = flip_signature(sig, k)?;
    Ok((0..sig.dim())
        .map(|t| if sig.sign(t) == new.sign(t) { 1.0 } else { -1.0 })
        .collect())
}

/// The same joints read in a switched signature. This negates the rigidity
/// matrix columns of the switched slots, so ranks are unchanged.
pub fn signature_flip(fw: &Framework, k: i32) -> Result<Framework> {
    Framework::new(fw.graph().clone(), fw.config().clone(), flip_signature(fw.signature(), k)?)
}

/// Signature switch on a cone. Errors if a nontrivial group stops preserving
/// the new form.
pub fn flip_cone(cf: &ConedFramework, k: i32, policy: &NumericPolicy) -> Result<ConedFramework> {
    let signature = flip_signature(cf.signature, k)?;
    let type_map = match &cf.type_map {
        None => None,
        Some(tm) => {
            let g = tm.group();
            if !g.preserves(signature, policy.group_tol) {
                return Err(Error::InvalidGroup(format!(
                    "the symmetry group does not preserve signature {signature}"
                )));
            }
            let group = PointGroup::new(signature, g.elements().to_vec(), policy.group_tol)?;
            Some(TypeMap::new(group, tm.perms().to_vec())?)
        }
    };
    Ok(ConedFramework {
        signature,
        type_map,
        ..cf.clone()
    })
}

/// Optional steps between coning and the final placement.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TransferOptions {
    /// One ray scalar per vertex orbit (cone targets only).
    pub alphas: Option<Vec<f64>>,
    /// Vertex orbits to invert (0-based).
    pub invert_orbits: Vec<usize>,
    /// Single joints to invert (0-based); breaks the cone symmetry unless
    /// they form whole orbits.
    pub invert_vertices: Vec<usize>,
}

pub fn realize(sf: &SymFramework, target: MetricTag, policy: &NumericPolicy) -> Result<ConedFramework> {
    realize_with(sf, target, &TransferOptions::default(), policy)
}

/// Cone, pull, push, invert and switch signature as the target requires.
pub fn realize_with(
    sf: &SymFramework,
    target: MetricTag,
    opts: &TransferOptions,
    policy: &NumericPolicy,
) -> Result<ConedFramework> {
    let mut cf = cone_framework(sf, target)?;
    if let Some(a) = &opts.alphas {
        cf = pull_orbits(&cf, a)?;
    }
    cf = match target {
        MetricTag::Hemisphere | MetricTag::WholeSphere => push_to_sphere(&cf)?,
        MetricTag::Hyperbolic => push_to_hyperboloid(&cf)?,
        MetricTag::DeSitter => push_to_de_sitter(&cf)?,
        _ => cf,
    };
    let inverting = !opts.invert_orbits.is_empty() || !opts.invert_vertices.is_empty();
    if inverting && target == MetricTag::Hemisphere {
        return Err(Error::InvalidArgument(
            "the hemisphere keeps every joint above the equator; use whole_sphere to invert".into(),
        ));
    }
    if !opts.invert_orbits.is_empty() {
        cf = invert_orbits(&cf, &opts.invert_orbits)?;
    }
    if !opts.invert_vertices.is_empty() {
        cf = invert_vertices(&cf, &opts.invert_vertices)?;
    }
    if let MetricTag::Signature(s) = target {
        cf = flip_cone(&cf, 1 - s.neg as i32, policy)?;
    }
    Ok(cf)
}

fn subtract_rows(m: &mut DMatrix<f64>, touches: &[Vec<usize>]) {
    for (r, cs) in touches.iter().enumerate() {
        for &c in cs {
            let row = m.row(c).clone_owned();
            let mut target = m.row_mut(r);
            target -= row;
        }
    }
}

/// `touches[e]`: coning rows subtracted from base row `e` in the modified
/// matrix.
fn plain_touches(g: &Graph) -> Vec<Vec<usize>> {
    let m = g.n_edges();
    g.edges().iter().map(|&(i, j)| vec![m + i, m + j]).collect()
}

/// Cone rigidity matrix, rows `E` then `{i, o}`, without cone columns.
/// The modified form subtracts the coning rows `{i, o}`, `{j, o}` from each
/// row `{i, j}`, leaving blocks `-hat(q_j)` and `-hat(q_i)`.
pub fn cone_rigidity_matrix(cf: &ConedFramework, modified: bool) -> Result<RigidityMatrix> {
    let mut r = cone_rigidity_matrix_full(cf, modified)?;
    let cols = cf.dim() * cf.n_joints();
    r.matrix = r.matrix.columns(0, cols).clone_owned();
    Ok(r)
}

/// As [`cone_rigidity_matrix`] with the cone joint's columns kept.
pub fn cone_rigidity_matrix_full(cf: &ConedFramework, modified: bool) -> Result<RigidityMatrix> {
    let fw = cf.full_framework()?;
    let mut r = rigidity_matrix(&fw);
    if modified {
        subtract_rows(&mut r.matrix, &plain_touches(cf.base_framework().graph()));
    }
    Ok(r)
}

/// Orbit data of a symmetric cone.
#[derive(Clone, Debug)]
pub struct ConeOrbit {
    pub sf: SymFramework,
    /// Unmodified `O_*`: base edge orbits then one coning row per orbit;
    /// blocks `M_i* = diag(M_i, 1)`, the cone joint has no columns.
    pub matrix: OrbitRigidityMatrix,
    pub base_rows: usize,
    touches: Vec<Vec<usize>>,
}

impl ConeOrbit {
    pub fn modified(&self) -> DMatrix<f64> {
        let mut m = self.matrix.matrix.clone();
        subtract_rows(&mut m, &self.touches);
        m
    }
}

pub fn cone_orbit(cf: &ConedFramework, policy: &NumericPolicy) -> Result<ConeOrbit> {
    let sf = cf.sym_framework(policy)?.ok_or_else(|| {
        Error::InvalidGroup("the cone symmetry was broken by a partial-orbit step".into())
    })?;
    let base_orbits = compute_orbits(cf.base());
    let base_bases = default_bases(cf.base(), &base_orbits, policy)?;
    let orbits = compute_orbits(&sf);
    let n = cf.n_joints();
    let mut reps = base_orbits.reps.clone();
    reps.push(n);
    debug_assert_eq!(orbits.reps, reps);
    let d1 = cf.dim();
    let mut bases: Vec<DMatrix<f64>> = base_bases
        .iter()
        .map(|m| {
            let mut b = DMatrix::zeros(d1, m.ncols() + 1);
            b.view_mut((0, 0), m.shape()).copy_from(m);
            b[(d1 - 1, m.ncols())] = 1.0;
            b
        })
        .collect();
    bases.push(DMatrix::zeros(d1, 0));
    let base_rows = base_orbits.n_edge_orbits();
    let touches = base_orbits
        .forms
        .iter()
        .map(|f| match *f {
            EdgeOrbitForm::Distinct { i, j, .. } => vec![
                base_rows + base_orbits.orbit_of_vertex[i],
                base_rows + base_orbits.orbit_of_vertex[j],
            ],
            EdgeOrbitForm::Same { i, .. } => vec![base_rows + base_orbits.orbit_of_vertex[i]],
        })
        .collect();
    let matrix = orbit_matrix_with_bases(&sf, orbits, bases, policy)?;
    Ok(ConeOrbit {
        sf,
        matrix,
        base_rows,
        touches,
    })
}

/// `O_*` or, when `modified`, the matrix with coning rows subtracted once
/// per touched orbit.
pub fn cone_orbit_matrix(cf: &ConedFramework, modified: bool, policy: &NumericPolicy) -> Result<DMatrix<f64>> {
    let co = cone_orbit(cf, policy)?;
    Ok(if modified { co.modified() } else { co.matrix.matrix })
}

/// `||m x|| / (||m||_F ||x||)`, zero for a zero vector or matrix.
pub fn scaled_residual(m: &DMatrix<f64>, x: &DVector<f64>) -> f64 {
    let scale = m.norm() * x.norm();
    if scale == 0.0 {
        0.0
    } else {
        (m * x).norm() / scale
    }
}

/// Base motion to cone motion: `v_i = α_i (u_i, ∓ u_i·p_i)` (minus for a
/// Euclidean cone, plus for a Minkowskian one), then the switch signs.
pub fn transfer_velocity(cf: &ConedFramework, u: &DVector<f64>) -> Result<DVector<f64>> {
    let base = cf.base_framework();
    let d = base.dim();
    let n = base.n_vertices();
    if u.len() != d * n {
        return Err(Error::DimensionMismatch {
            expected: d * n,
            found: u.len(),
        });
    }
    let res = scaled_residual(&rigidity_matrix(base).matrix, u);
    if res > TRANSFER_TOL {
        return Err(Error::NotAMotion(res));
    }
    let s = -cf.kind.axis_sign();
    let mask = cf.flip_mask();
    let mut v = DVector::zeros((d + 1) * n);
    for i in 0..n {
        let ui = u.rows(i * d, d);
        let last = s * ui.dot(base.point(i));
        for k in 0..=d {
            let x = if k < d { ui[k] } else { last };
            v[i * (d + 1) + k] = mask[k] * cf.alphas[i] * x;
        }
    }
    Ok(v)
}

/// Base stress to cone stress. Bars carry `ω_ij / (α_i α_j)` and row `{i, o}`
/// takes `-(1/α_i) Σ_j ω_ij (1/α_j - 1/α_i)` (zero at height one). The
/// modified matrix adds `Σ_j` of the bar coefficients at `i` to that row.
pub fn transfer_stress(cf: &ConedFramework, w: &DVector<f64>, modified: bool) -> Result<DVector<f64>> {
    let base = cf.base_framework();
    let g = base.graph();
    let m = g.n_edges();
    if w.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: w.len(),
        });
    }
    let r = rigidity_matrix(base).matrix;
    let res = scaled_residual(&r.transpose(), w);
    if res > TRANSFER_TOL {
        return Err(Error::NotAStress(res));
    }
    let a = &cf.alphas;
    let n = base.n_vertices();
    let mut out = DVector::zeros(m + n);
    for (e, &(i, j)) in g.edges().iter().enumerate() {
        out[e] = w[e] / (a[i] * a[j]);
        out[m + i] -= w[e] * (1.0 / a[j] - 1.0 / a[i]) / a[i];
        out[m + j] -= w[e] * (1.0 / a[i] - 1.0 / a[j]) / a[j];
    }
    if modified {
        for (e, &(i, j)) in g.edges().iter().enumerate() {
            out[m + i] += out[e];
            out[m + j] += out[e];
        }
    }
    Ok(out)
}

/// Orbit-coordinate version of [`transfer_velocity`]: lift, transfer, and
/// read off the `M_i*` coordinates of each representative.
pub fn transfer_orbit_velocity(
    cf: &ConedFramework,
    base_om: &OrbitRigidityMatrix,
    co: &ConeOrbit,
    v: &DVector<f64>,
) -> Result<DVector<f64>> {
    let u = lift_motion(cf.base(), base_om, v)?;
    let full = transfer_velocity(cf, &u)?;
    let d1 = cf.dim();
    let mut out = DVector::zeros(co.matrix.n_cols());
    for (o, &i) in co.matrix.orbits.reps.iter().enumerate() {
        let cols = co.matrix.col_blocks[o].clone();
        if cols.is_empty() {
            continue;
        }
        let coords = co.matrix.bases[o].transpose() * full.rows(i * d1, d1);
        out.rows_mut(cols.start, cols.len()).copy_from(&coords);
    }
    Ok(out)
}

/// Orbit-coordinate version of [`transfer_stress`]. Unmodified coning rows
/// carry the height-one value zero; the modified matrix adds the orbit rows
/// touching each orbit, Case 2 rows once.
pub fn transfer_orbit_stress(
    cf: &ConedFramework,
    base_om: &OrbitRigidityMatrix,
    co: &ConeOrbit,
    omega: &DVector<f64>,
    modified: bool,
) -> Result<DVector<f64>> {
    let w = lift_stress(base_om, omega)?;
    let full = transfer_stress(cf, &w, false)?;
    let om = &co.matrix;
    let s_max = om.rows.iter().map(|r| r.orbit_size).max().unwrap_or(1) as f64;
    let mut out = DVector::from_fn(om.rows.len(), |r, _| full[om.rows[r].edge] * om.rows[r].orbit_size as f64 / s_max);
    if modified {
        for (r, cs) in co.touches.iter().enumerate() {
            for &c in cs {
                out[c] += out[r];
            }
        }
    }
    Ok(out)
}

/// Analysis of the cone with the cone joint pinned: only rotations are
/// trivial and the span test is linear.
pub fn analyze_cone(cf: &ConedFramework, policy: &NumericPolicy) -> Result<AnalysisReport> {
    let r = cone_rigidity_matrix(cf, false)?;
    let rank = numeric_rank(&r.matrix, policy)?;
    let trivial = numeric_rank(&trivial_generators(&cf.joints, cf.signature, true), policy)?;
    let config = Configuration::new(cf.dim(), cf.joints.clone())?;
    let spans = spans_ambient(&config, true, policy)?;
    Ok(AnalysisReport::assemble(
        r.matrix.nrows(),
        r.matrix.ncols(),
        rank,
        trivial,
        spans,
        cf.n_joints(),
        cf.dim(),
    ))
}

/// Maximum pinned-cone rank over random joints in `R^{D+1}`.
pub fn estimate_cone_regular(
    g: &Graph,
    sig: Signature,
    policy: &NumericPolicy,
    rng: &mut ChaCha8Rng,
) -> Result<usize> {
    policy.validate()?;
    let n = g.n_vertices();
    let d1 = sig.dim();
    let cg = cone_graph(g);
    let mut best = 0;
    for _ in 0..policy.sample_count {
        let c = loop {
            let mut pts = random_config(n, d1, rng).points().to_vec();
            pts.push(DVector::zeros(d1));
            if let Ok(c) = Configuration::new(d1, pts) {
                break c;
            }
        };
        let fw = Framework::new(cg.clone(), c, sig)?;
        let m = rigidity_matrix(&fw).matrix.columns(0, d1 * n).clone_owned();
        best = best.max(numeric_rank(&m, policy)?);
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Clause {
    pub clause: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferReport {
    pub target: MetricTag,
    pub base: AnalysisReport,
    pub cone: AnalysisReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base_symmetric: Option<SymmetricReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cone_symmetric: Option<SymmetricReport>,
    pub clauses: Vec<Clause>,
    pub all_pass: bool,
}

struct Ledger(Vec<Clause>);

impl Ledger {
    fn check(&mut self, clause: &str, pass: bool, detail: String) {
        self.0.push(Clause {
            clause: clause.into(),
            pass,
            detail,
        });
    }

    fn eq<T: PartialEq + fmt::Debug>(&mut self, clause: &str, base: T, cone: T) {
        let detail = format!("base {base:?}, cone {cone:?}");
        self.check(clause, base == cone, detail);
    }

    fn residual(&mut self, clause: &str, worst: f64) {
        self.check(clause, worst <= TRANSFER_TOL, format!("max residual {worst:.3e}"));
    }
}

fn worst<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    it.into_iter().fold(0.0, f64::max)
}

/// Realizes the target and checks every transfer clause: ranks, motion,
/// trivial, flex and stress dimensions, residuals of transferred vectors,
/// verdicts, regularity, projection, the quadric, and the symmetric analogues
/// when a nontrivial group survives. Regularity uses matched seeds.
pub fn verify_transfer(
    sf: &SymFramework,
    target: MetricTag,
    opts: &TransferOptions,
    policy: &NumericPolicy,
) -> Result<TransferReport> {
    policy.validate()?;
    let cf = realize_with(sf, target, opts, policy)?;
    let base = sf.framework();
    let n = base.n_vertices();
    let mut l = Ledger(Vec::new());

    let base_r = rigidity_matrix(base).matrix;
    let cone_r = cone_rigidity_matrix(&cf, false)?.matrix;
    let cone_mod = cone_rigidity_matrix(&cf, true)?.matrix;
    let base_report = analyze(base, policy)?;
    let cone_report = analyze_cone(&cf, policy)?;

    let rank_mod = numeric_rank(&cone_mod, policy)?;
    l.eq("cone_rank", base_report.rank + n, cone_report.rank);
    l.eq("modified_rank", cone_report.rank, rank_mod);
    l.eq("trivial_dim", base_report.trivial_dim, cone_report.trivial_dim);
    l.eq("flex_dim", base_report.flex_dim, cone_report.flex_dim);
    l.eq("stress_dim", base_report.stress_dim, cone_report.stress_dim);
    l.eq(
        "infinitesimally_rigid",
        base_report.verdicts.infinitesimally_rigid,
        cone_report.verdicts.infinitesimally_rigid,
    );
    l.eq("isostatic", base_report.verdicts.isostatic, cone_report.verdicts.isostatic);

    let full = cone_rigidity_matrix_full(&cf, false)?.matrix;
    let pinned_kernel = cone_r.ncols() - cone_report.rank;
    let free_kernel = full.ncols() - numeric_rank(&full, policy)?;
    l.eq("cone_columns", pinned_kernel + cf.dim(), free_kernel);

    let motions = kernel(&base_r, policy)?;
    let moved: Vec<DVector<f64>> = (0..motions.dim())
        .map(|k| transfer_velocity(&cf, &motions.vector(k)))
        .collect::<Result<_>>()?;
    l.residual("motion_transfer", worst(moved.iter().map(|v| scaled_residual(&cone_r, v))));
    let d1 = cf.dim();
    let cfr = &cf;
    let perp = worst(moved.iter().flat_map(|v| {
        (0..n).map(move |i| {
            let vi = v.rows(i * d1, d1).clone_owned();
            let q = cfr.joint(i);
            cfr.signature().inner(&vi, q).abs() / (vi.norm() * q.norm()).max(1e-300)
        })
    }));
    l.residual("motion_perpendicular", perp);

    let stresses = cokernel(&base_r, policy)?;
    let mut plain = 0.0f64;
    let mut modified = 0.0f64;
    for k in 0..stresses.dim() {
        let w = stresses.vector(k);
        plain = plain.max(scaled_residual(&cone_r.transpose(), &transfer_stress(&cf, &w, false)?));
        modified = modified.max(scaled_residual(&cone_mod.transpose(), &transfer_stress(&cf, &w, true)?));
    }
    l.residual("stress_transfer", plain);
    l.residual("modified_stress_transfer", modified);

    let seed = policy.rng_seed;
    let est = estimate_regular(base.graph(), base.signature(), policy, &mut ChaCha8Rng::seed_from_u64(seed))?;
    let cone_max = estimate_cone_regular(base.graph(), cf.signature(), policy, &mut ChaCha8Rng::seed_from_u64(seed))?;
    let base_regular = est.is_regular(base, policy)?;
    let cone_regular = cone_report.rank == cone_max;
    l.eq("regular", base_regular, cone_regular);

    let back = project_back(&cf)?;
    let gap = worst(
        back.config()
            .points()
            .iter()
            .zip(base.config().points())
            .map(|(a, b)| (a - b).norm() / b.norm().max(1.0)),
    );
    l.check("project_back", gap <= 1e-10, format!("max deviation {gap:.3e}"));

    let quadric = match target {
        MetricTag::Hemisphere | MetricTag::WholeSphere => Some(1.0),
        MetricTag::Hyperbolic => Some(-1.0),
        MetricTag::DeSitter => Some(1.0),
        _ => None,
    };
    if let Some(level) = quadric {
        let dev = worst(cf.joints().iter().map(|q| (cf.signature().norm_sq(q) - level).abs()));
        l.check("quadric", dev <= 1e-10, format!("max |<q,q> - ({level})| = {dev:.3e}"));
    }
    if target == MetricTag::Hemisphere {
        let low = cf.joints().iter().map(|q| q[d1 - 1]).fold(f64::INFINITY, f64::min);
        l.check("upper_hemisphere", low > 0.0, format!("lowest height {low:.3e}"));
    }

    let mut base_symmetric = None;
    let mut cone_symmetric = None;
    if !sf.group().is_trivial() {
        let base_om = crate::orbit::orbit_matrix(sf, policy)?;
        let bsr = symmetric_analysis(sf, &base_om, false, policy)?;
        match cf.type_map() {
            None => l.check(
                "cone_symmetric",
                true,
                "symmetry deliberately broken by partial inversion; symmetric clauses skipped".into(),
            ),
            Some(_) => {
                let co = cone_orbit(&cf, policy)?;
                l.check("cone_symmetric", true, format!("validated under S* of order {}", sf.group().order()));
                let csr = symmetric_analysis(&co.sf, &co.matrix, true, policy)?;
                let k = base_om.orbits.n_vertex_orbits();
                l.eq("sym_cone_rank", bsr.orbit_rank + k, csr.orbit_rank);
                l.eq("sym_modified_rank", csr.orbit_rank, numeric_rank(&co.modified(), policy)?);
                l.eq("sym_trivial_dim", bsr.sym_trivial_dim, csr.sym_trivial_dim);
                l.eq("sym_flex_dim", bsr.sym_flex_dim, csr.sym_flex_dim);
                l.eq("sym_stress_dim", bsr.sym_stress_dim, csr.sym_stress_dim);

                let sm = kernel(&base_om.matrix, policy)?;
                let mut res = 0.0f64;
                for k in 0..sm.dim() {
                    let v = transfer_orbit_velocity(&cf, &base_om, &co, &sm.vector(k))?;
                    res = res.max(scaled_residual(&co.matrix.matrix, &v));
                }
                l.residual("sym_motion_transfer", res);

                let ss = cokernel(&base_om.matrix, policy)?;
                let modified_o = co.modified();
                let (mut rp, mut rm) = (0.0f64, 0.0f64);
                for k in 0..ss.dim() {
                    let w = ss.vector(k);
                    let a = transfer_orbit_stress(&cf, &base_om, &co, &w, false)?;
                    let b = transfer_orbit_stress(&cf, &base_om, &co, &w, true)?;
                    rp = rp.max(scaled_residual(&co.matrix.matrix.transpose(), &a));
                    rm = rm.max(scaled_residual(&modified_o.transpose(), &b));
                }
                l.residual("sym_stress_transfer", rp);
                l.residual("sym_modified_stress_transfer", rm);

                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let bp = predict_with(sf, &base_om, false, policy, &mut rng)?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let cp = predict_with(&co.sf, &co.matrix, true, policy, &mut rng)?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let br = s_regular_with(sf, &base_om, policy, &mut rng)?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let cr = s_regular_with(&co.sf, &co.matrix, policy, &mut rng)?;
                l.eq("s_regular", br.s_regular, cr.s_regular);
                l.eq("finite_flex_prediction", bp.predicted, cp.predicted);
                cone_symmetric = Some(csr);
            }
        }
        base_symmetric = Some(bsr);
    }

    let all_pass = l.0.iter().all(|c| c.pass);
    Ok(TransferReport {
        target,
        base: base_report,
        cone: cone_report,
        base_symmetric,
        cone_symmetric,
        clauses: l.0,
        all_pass,
    })
}
