//! JSON documents: framework input files and analysis reports.
//!
//! Vertex ids and permutation entries are 1-based on disk. A framework
//! document with a `symmetry` block may list the whole group or just
//! generators; the group is closed on load.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::coning::{Clause, MetricTag, TransferReport};
use crate::error::{Error, Result};
use crate::framework::{Configuration, Framework};
use crate::graph::Graph;
use crate::linalg::NumericPolicy;
use crate::metric::Signature;
use crate::orbit::{FlexPrediction, SymmetricReport};
use crate::rigidity::AnalysisReport;
use crate::symmetry::{validate_symmetric, SymFramework, TypeMap};
use crate::tensegrity::{MemberKind, Tensegrity, TensegrityVerdict};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexDoc {
    pub id: usize,
    pub coords: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDoc {
    pub u: usize,
    pub v: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<MemberKind>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementDoc {
    pub matrix: Vec<Vec<f64>>,
    pub vertex_perm: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymmetryDoc {
    pub elements: Vec<ElementDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameworkDocument {
    pub format_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub dimension: usize,
    pub signature: Signature,
    pub vertices: Vec<VertexDoc>,
    pub edges: Vec<EdgeDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symmetry: Option<SymmetryDoc>,
    /// Space the coordinates live in; informational only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric_tag: Option<MetricTag>,
}

/// A validated document.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub sf: SymFramework,
    /// Present when any edge carries a `kind`; unlabeled edges are bars.
    pub kinds: Option<Vec<MemberKind>>,
    pub metric_tag: Option<MetricTag>,
    pub has_symmetry: bool,
}

impl Loaded {
    pub fn framework(&self) -> &Framework {
        self.sf.framework()
    }

    pub fn tensegrity(&self) -> Result<Option<Tensegrity>> {
        self.kinds
            .clone()
            .map(|k| Tensegrity::symmetric(self.sf.clone(), k))
            .transpose()
    }
}

fn doc_err(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Document {
        path: path.into(),
        message: message.into(),
    }
}

fn check_finite(path: String, xs: &[f64]) -> Result<()> {
    match xs.iter().position(|x| !x.is_finite()) {
        Some(k) => Err(doc_err(format!("{path}[{k}]"), "value is not finite")),
        None => Ok(()),
    }
}

impl FrameworkDocument {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| doc_err(format!("line {}, column {}", e.line(), e.column()), e.to_string()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| match e {
            Error::Document { path: at, message } => doc_err(format!("{}: {at}", path.display()), message),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("documents always serialize");
        s.push('\n');
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        Ok(std::fs::write(path, self.to_json())?)
    }

    /// Validates every field and builds the (symmetric) framework.
    pub fn load(&self, policy: &NumericPolicy) -> Result<Loaded> {
        if self.format_version != FORMAT_VERSION {
            return Err(doc_err(
                "format_version",
                format!("unsupported version {} (expected {FORMAT_VERSION})", self.format_version),
            ));
        }
        let d = self.dimension;
        let sig = Signature::new(self.signature.pos, self.signature.neg)
            .map_err(|e| doc_err("signature", e.to_string()))?;
        if sig.dim() != d {
            return Err(doc_err(
                "signature",
                format!("signature ({},{}) does not match dimension {d}", sig.pos, sig.neg),
            ));
        }
        let n = self.vertices.len();
        let mut slot: Vec<Option<usize>> = vec![None; n];
        for (k, v) in self.vertices.iter().enumerate() {
            if v.id == 0 || v.id > n {
                return Err(doc_err(format!("vertices[{k}].id"), format!("id {} outside 1..={n}", v.id)));
            }
            if let Some(prev) = slot[v.id - 1] {
                return Err(doc_err(
                    format!("vertices[{k}].id"),
                    format!("id {} already used by vertices[{prev}]", v.id),
                ));
            }
            slot[v.id - 1] = Some(k);
            if v.coords.len() != d {
                return Err(doc_err(
                    format!("vertices[{k}].coords"),
                    format!("expected {d} coordinates, found {}", v.coords.len()),
                ));
            }
            check_finite(format!("vertices[{k}].coords"), &v.coords)?;
        }
        let points = slot
            .iter()
            .map(|k| DVector::from_column_slice(&self.vertices[k.expect("ids are a bijection")].coords))
            .collect();

        let mut edges = Vec::with_capacity(self.edges.len());
        for (k, e) in self.edges.iter().enumerate() {
            for (name, x) in [("u", e.u), ("v", e.v)] {
                if x == 0 || x > n {
                    return Err(doc_err(
                        format!("edges[{k}].{name}"),
                        format!("edge {} references vertex {x}, outside 1..={n}", k + 1),
                    ));
                }
            }
            edges.push((e.u - 1, e.v - 1));
        }
        let graph = Graph::new(n, edges).map_err(|e| doc_err("edges", e.to_string()))?;
        let fw = Framework::new(graph, Configuration::new(d, points)?, sig)?;

        let (sf, has_symmetry) = match &self.symmetry {
            None => (SymFramework::trivial(fw), false),
            Some(sym) => {
                let gens = sym
                    .elements
                    .iter()
                    .enumerate()
                    .map(|(k, el)| element(k, el, d, n))
                    .collect::<Result<Vec<_>>>()?;
                let tm = if gens.is_empty() {
                    TypeMap::identity(sig, n)
                } else {
                    TypeMap::generate(sig, &gens, policy.group_tol).map_err(|e| doc_err("symmetry", e.to_string()))?
                };
                let sf = validate_symmetric(&fw, &tm, policy).map_err(|e| doc_err("symmetry", e.to_string()))?;
                (sf, true)
            }
        };

        let kinds = self
            .edges
            .iter()
            .any(|e| e.kind.is_some())
            .then(|| self.edges.iter().map(|e| e.kind.unwrap_or(MemberKind::Bar)).collect::<Vec<_>>());
        if let Some(k) = &kinds {
            Tensegrity::symmetric(sf.clone(), k.clone()).map_err(|e| doc_err("edges", e.to_string()))?;
        }
        Ok(Loaded {
            sf,
            kinds,
            metric_tag: self.metric_tag,
            has_symmetry,
        })
    }

    /// Serializes a framework, listing every group element when `type_map`
    /// is nontrivial.
    pub fn from_framework(
        fw: &Framework,
        type_map: Option<&TypeMap>,
        kinds: Option<&[MemberKind]>,
        metric_tag: Option<MetricTag>,
    ) -> Self {
        let vertices = fw
            .config()
            .points()
            .iter()
            .enumerate()
            .map(|(i, p)| VertexDoc {
                id: i + 1,
                coords: p.iter().map(|&x| clean(x)).collect(),
            })
            .collect();
        let edges = fw
            .graph()
            .edges()
            .iter()
            .enumerate()
            .map(|(k, &(u, v))| EdgeDoc {
                u: u + 1,
                v: v + 1,
                kind: kinds.map(|ks| ks[k]),
            })
            .collect();
        let symmetry = type_map.filter(|tm| !tm.group().is_trivial()).map(|tm| SymmetryDoc {
            elements: (0..tm.group().order())
                .filter(|&k| k != tm.group().identity_index())
                .map(|k| {
                    let m = tm.group().element(k);
                    ElementDoc {
                        matrix: (0..m.nrows()).map(|r| m.row(r).iter().map(|&x| clean(x)).collect()).collect(),
                        vertex_perm: tm.perm(k).iter().map(|&i| i + 1).collect(),
                    }
                })
                .collect(),
        });
        Self {
            format_version: FORMAT_VERSION,
            name: None,
            dimension: fw.dim(),
            signature: fw.signature(),
            vertices,
            edges,
            symmetry,
            metric_tag,
        }
    }
}

/// Drops `-0.0` so emitted files diff cleanly.
fn clean(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x
    }
}

fn element(k: usize, el: &ElementDoc, d: usize, n: usize) -> Result<(DMatrix<f64>, Vec<usize>)> {
    let at = format!("symmetry.elements[{k}]");
    if el.matrix.len() != d || el.matrix.iter().any(|r| r.len() != d) {
        return Err(doc_err(format!("{at}.matrix"), format!("matrix must be {d}x{d}")));
    }
    for (r, row) in el.matrix.iter().enumerate() {
        check_finite(format!("{at}.matrix[{r}]"), row)?;
    }
    if el.vertex_perm.len() != n {
        return Err(doc_err(
            format!("{at}.vertex_perm"),
            format!("expected {n} entries, found {}", el.vertex_perm.len()),
        ));
    }
    let mut seen = vec![false; n];
    for &x in &el.vertex_perm {
        if x == 0 || x > n || std::mem::replace(&mut seen[x - 1], true) {
            return Err(doc_err(format!("{at}.vertex_perm"), "not a permutation of 1..=n"));
        }
    }
    let m = DMatrix::from_fn(d, d, |r, c| el.matrix[r][c]);
    Ok((m, el.vertex_perm.iter().map(|&x| x - 1).collect()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricBlock {
    pub metric: String,
    pub report: AnalysisReport,
}

/// Rank at the given placement against the sampled generic rank.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Regularity {
    pub rank: usize,
    pub max_rank: usize,
    pub samples: usize,
    pub regular: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactCheck {
    pub rational: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_rank: Option<usize>,
    pub numeric_rank: usize,
    pub agree: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBlock {
    pub kind: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub policy: NumericPolicy,
    pub version: String,
}

impl Provenance {
    pub fn new(policy: &NumericPolicy) -> Self {
        Self {
            seed: policy.rng_seed,
            policy: policy.clone(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub format_version: u32,
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    #[serde(default)]
    pub analyses: Vec<MetricBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regularity: Option<Regularity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symmetric: Option<SymmetricReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prediction: Option<FlexPrediction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<ExactCheck>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tensegrity: Option<TensegrityVerdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cone_tensegrity: Option<TensegrityVerdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transfer: Option<TransferReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorBlock>,
    pub provenance: Provenance,
}

impl ReportDocument {
    pub fn new(command: &str, policy: &NumericPolicy) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            command: command.into(),
            input: None,
            analyses: Vec::new(),
            regularity: None,
            symmetric: None,
            prediction: None,
            exact: None,
            tensegrity: None,
            cone_tensegrity: None,
            transfer: None,
            error: None,
            provenance: Provenance::new(policy),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Failed transfer clauses, if any.
    pub fn failed_clauses(&self) -> Vec<&Clause> {
        self.transfer
            .iter()
            .flat_map(|t| t.clauses.iter().filter(|c| !c.pass))
            .collect()
    }
}
