//! Tensegrity frameworks: cables carry tension, struts compression.
//!
//! A tensegrity is infinitesimally rigid iff its bar framework is and it has
//! a self-stress that is strictly positive on cables and strictly negative on
//! struts. The stress search is a small LP over a cokernel basis `N`:
//! maximize `t` subject to `(N z)_e >= t` on cables, `(N z)_e <= -t` on
//! struts and `|z|_inf <= 1`.

use minilp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem, Variable};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::coning::{invert_vertices, realize_with, ConedFramework, MetricTag, TransferOptions};
use crate::error::{Error, Result};
use crate::framework::Framework;
use crate::linalg::{cokernel, NumericPolicy};
use crate::orbit::{lift_stress, orbit_matrix};
use crate::rigidity::{analyze, rigidity_matrix};
use crate::symmetry::{compute_orbits, validate_symmetric, SymFramework};

/// Margin a strict proper stress must clear.
pub const STRICT_MARGIN: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MemberKind {
    Bar,
    Cable,
    Strut,
}

impl MemberKind {
    /// Cable and strut trade places; bars stay bars.
    pub fn swapped(self) -> Self {
        match self {
            MemberKind::Bar => MemberKind::Bar,
            MemberKind::Cable => MemberKind::Strut,
            MemberKind::Strut => MemberKind::Cable,
        }
    }

    /// Required sign of the stress: +1 cable, -1 strut, 0 free.
    pub fn sign(self) -> f64 {
        match self {
            MemberKind::Bar => 0.0,
            MemberKind::Cable => 1.0,
            MemberKind::Strut => -1.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Tensegrity {
    sf: SymFramework,
    kinds: Vec<MemberKind>,
}

impl Tensegrity {
    pub fn new(fw: Framework, kinds: Vec<MemberKind>) -> Result<Self> {
        Self::symmetric(SymFramework::trivial(fw), kinds)
    }

    /// Kinds must be constant on edge orbits.
    pub fn symmetric(sf: SymFramework, kinds: Vec<MemberKind>) -> Result<Self> {
        let m = sf.framework().graph().n_edges();
        if kinds.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: kinds.len(),
            });
        }
        let orbits = compute_orbits(&sf);
        for orb in &orbits.edge_orbits {
            if let Some(&e) = orb.iter().find(|&&e| kinds[e] != kinds[orb[0]]) {
                return Err(Error::InvalidArgument(format!(
                    "edges {} and {} share an orbit but have different member kinds",
                    orb[0] + 1,
                    e + 1
                )));
            }
        }
        Ok(Self { sf, kinds })
    }

    pub fn framework(&self) -> &Framework {
        self.sf.framework()
    }

    pub fn sym_framework(&self) -> &SymFramework {
        &self.sf
    }

    pub fn kinds(&self) -> &[MemberKind] {
        &self.kinds
    }

    fn signed_edges(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.kinds
            .iter()
            .enumerate()
            .filter(|(_, k)| **k != MemberKind::Bar)
            .map(|(e, k)| (e, k.sign()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProperStress {
    pub stress: Vec<f64>,
    /// Smallest signed value over cables and struts (infinite when there are
    /// none).
    pub margin: f64,
}

fn stress_basis(tf: &Tensegrity, symmetric: bool, policy: &NumericPolicy) -> Result<DMatrix<f64>> {
    if symmetric && !tf.sf.group().is_trivial() {
        let om = orbit_matrix(&tf.sf, policy)?;
        let ss = cokernel(&om.matrix, policy)?;
        let cols = (0..ss.dim())
            .map(|k| lift_stress(&om, &ss.vector(k)))
            .collect::<Result<Vec<_>>>()?;
        let m = tf.framework().graph().n_edges();
        Ok(if cols.is_empty() {
            DMatrix::zeros(m, 0)
        } else {
            DMatrix::from_columns(&cols)
        })
    } else {
        Ok(cokernel(&rigidity_matrix(tf.framework()).matrix, policy)?.basis().clone())
    }
}

fn margin_of(tf: &Tensegrity, w: &DVector<f64>) -> f64 {
    tf.signed_edges().map(|(e, s)| s * w[e]).fold(f64::INFINITY, f64::min)
}

/// Searches for a proper self-stress. With `strict`, returns one whose signed
/// margin exceeds [`STRICT_MARGIN`] or `None`; otherwise returns a proper
/// stress maximizing the total signed load, which is zero when only the zero
/// stress is proper. `symmetric` restricts the search to lifted symmetric
/// stresses.
pub fn proper_stress(tf: &Tensegrity, strict: bool, symmetric: bool, policy: &NumericPolicy) -> Result<Option<ProperStress>> {
    let n_mat = stress_basis(tf, symmetric, policy)?;
    let k = n_mat.ncols();
    let m = n_mat.nrows();
    let signed: Vec<(usize, f64)> = tf.signed_edges().collect();
    if signed.is_empty() || k == 0 {
        let zero = DVector::zeros(m);
        let vacuous = signed.is_empty();
        return Ok((vacuous || !strict).then(|| ProperStress {
            stress: zero.as_slice().to_vec(),
            margin: if vacuous { f64::INFINITY } else { 0.0 },
        }));
    }
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let z: Vec<Variable> = (0..k)
        .map(|c| {
            let load = if strict {
                0.0
            } else {
                signed.iter().map(|&(e, sg)| sg * n_mat[(e, c)]).sum()
            };
            lp.add_var(load, (-1.0, 1.0))
        })
        .collect();
    let t = strict.then(|| lp.add_var(1.0, (0.0, f64::INFINITY)));
    for &(e, sg) in &signed {
        // sg * (N z)_e - t >= 0
        let mut row = LinearExpr::empty();
        for (c, &v) in z.iter().enumerate() {
            row.add(v, sg * n_mat[(e, c)]);
        }
        if let Some(t) = t {
            row.add(t, -1.0);
        }
        lp.add_constraint(row, ComparisonOp::Ge, 0.0);
    }
    let sol = lp
        .solve()
        .map_err(|e| Error::InvalidArgument(format!("stress LP failed: {e}")))?;
    let z = DVector::from_fn(k, |c, _| sol[z[c]]);
    let w = &n_mat * z;
    let margin = margin_of(tf, &w);
    if strict && margin <= STRICT_MARGIN {
        return Ok(None);
    }
    Ok(Some(ProperStress {
        stress: w.as_slice().to_vec(),
        margin,
    }))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensegrityVerdict {
    pub rigid: bool,
    pub bar_framework_rigid: bool,
    pub strict_stress: Option<ProperStress>,
}

/// Rigid bar framework plus a strictly proper self-stress.
pub fn tensegrity_rigid(tf: &Tensegrity, policy: &NumericPolicy) -> Result<TensegrityVerdict> {
    verdict(tf, false, policy)
}

/// As [`tensegrity_rigid`], searching only `S`-symmetric stresses.
pub fn tensegrity_rigid_symmetric(tf: &Tensegrity, policy: &NumericPolicy) -> Result<TensegrityVerdict> {
    verdict(tf, true, policy)
}

fn verdict(tf: &Tensegrity, symmetric: bool, policy: &NumericPolicy) -> Result<TensegrityVerdict> {
    let bar = analyze(tf.framework(), policy)?.verdicts.infinitesimally_rigid;
    let strict_stress = proper_stress(tf, true, symmetric, policy)?;
    Ok(TensegrityVerdict {
        rigid: bar && strict_stress.is_some(),
        bar_framework_rigid: bar,
        strict_stress,
    })
}

/// A coned tensegrity: the full framework on `G * o` with the base kinds and
/// bars to the cone joint.
#[derive(Clone, Debug)]
pub struct ConeTensegrity {
    pub cone: ConedFramework,
    pub base_kinds: Vec<MemberKind>,
    pub tensegrity: Tensegrity,
}

fn build_cone(cf: ConedFramework, base_kinds: Vec<MemberKind>, policy: &NumericPolicy) -> Result<ConeTensegrity> {
    let full = cf.full_framework()?;
    let sf = match cf.type_map() {
        Some(tm) => validate_symmetric(&full, &tm.with_fixed_vertex(), policy)?,
        None => SymFramework::trivial(full),
    };
    let mut kinds = base_kinds.clone();
    kinds.extend(std::iter::repeat_n(MemberKind::Bar, cf.n_joints()));
    let tensegrity = Tensegrity::symmetric(sf, kinds)?;
    Ok(ConeTensegrity {
        cone: cf,
        base_kinds,
        tensegrity,
    })
}

/// Cones a tensegrity into `target`. Ray scalars must stay positive; use
/// [`invert_tensegrity`] for inversions, which also relabels members.
pub fn cone_tensegrity(
    tf: &Tensegrity,
    target: MetricTag,
    alphas: Option<Vec<f64>>,
    policy: &NumericPolicy,
) -> Result<ConeTensegrity> {
    if alphas.as_ref().is_some_and(|a| a.iter().any(|&x| x <= 0.0)) {
        return Err(Error::InvalidArgument(
            "tensegrity coning keeps joints in the upper half-space; invert explicitly".into(),
        ));
    }
    let opts = TransferOptions {
        alphas,
        ..Default::default()
    };
    let cf = realize_with(&tf.sf, target, &opts, policy)?;
    build_cone(cf, tf.kinds.clone(), policy)
}

/// Inverts the selected joints and swaps cable/strut on every edge with
/// exactly one inverted end. Coning edges stay bars.
pub fn invert_tensegrity(ct: &ConeTensegrity, vertices: &[usize], policy: &NumericPolicy) -> Result<ConeTensegrity> {
    let n = ct.cone.n_joints();
    let mut flipped = vec![false; n];
    for &v in vertices {
        if v >= n {
            return Err(Error::InvalidArgument(format!("no vertex {}", v + 1)));
        }
        flipped[v] ^= true;
    }
    let g = ct.cone.base_framework().graph();
    let kinds = g
        .edges()
        .iter()
        .zip(&ct.base_kinds)
        .map(|(&(i, j), &k)| if flipped[i] != flipped[j] { k.swapped() } else { k })
        .collect();
    let selected: Vec<usize> = (0..n).filter(|&v| flipped[v]).collect();
    build_cone(invert_vertices(&ct.cone, &selected)?, kinds, policy)
}

/// [`invert_tensegrity`] on whole vertex orbits of the base.
pub fn invert_tensegrity_orbits(ct: &ConeTensegrity, orbits: &[usize], policy: &NumericPolicy) -> Result<ConeTensegrity> {
    let data = compute_orbits(ct.cone.base());
    let mut vertices = Vec::new();
    for &o in orbits {
        vertices.extend_from_slice(
            data.vertex_orbits
                .get(o)
                .ok_or_else(|| Error::InvalidArgument(format!("no vertex orbit {}", o + 1)))?,
        );
    }
    invert_tensegrity(ct, &vertices, policy)
}
