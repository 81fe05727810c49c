use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::metric::Signature;

/// Minimum separation between joints.
pub const MIN_SEPARATION: f64 = 1e-6;

/// Joint positions, one vector per vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct Configuration {
    dim: usize,
    points: Vec<DVector<f64>>,
}

impl Configuration {
    pub fn new(dim: usize, points: Vec<DVector<f64>>) -> Result<Self> {
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                });
            }
        }
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                if (&points[i] - &points[j]).norm() <= MIN_SEPARATION {
                    return Err(Error::CoincidentJoints(i + 1, j + 1));
                }
            }
        }
        Ok(Self { dim, points })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let dim = rows.first().map_or(0, |r| r.len());
        Self::new(
            dim,
            rows.iter().map(|r| DVector::from_column_slice(r)).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &DVector<f64> {
        &self.points[i]
    }

    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    /// All coordinates stacked vertex by vertex.
    pub fn flat(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.dim * self.points.len(),
            self.points.iter().flat_map(|p| p.iter().copied()),
        )
    }
}

/// A bar-joint framework `(G, p)` in a space of the given signature.
#[derive(Clone, Debug, PartialEq)]
pub struct Framework {
    graph: Graph,
    config: Configuration,
    signature: Signature,
}

impl Framework {
    pub fn new(graph: Graph, config: Configuration, signature: Signature) -> Result<Self> {
        if config.dim() != signature.dim() {
            return Err(Error::DimensionMismatch {
                expected: signature.dim(),
                found: config.dim(),
            });
        }
        if config.len() != graph.n_vertices() {
            return Err(Error::InvalidArgument(format!(
                "graph has {} vertices but the configuration has {} points",
                graph.n_vertices(),
                config.len()
            )));
        }
        Ok(Self {
            graph,
            config,
            signature,
        })
    }

    pub fn euclidean(graph: Graph, config: Configuration) -> Result<Self> {
        let sig = Signature::euclidean(config.dim());
        Self::new(graph, config, sig)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn config(&self) -> &Configuration {
        &self.config
    }

    pub fn signature(&self) -> Signature {
        self.signature
    }

    pub fn dim(&self) -> usize {
        self.signature.dim()
    }

    pub fn n_vertices(&self) -> usize {
        self.graph.n_vertices()
    }

    pub fn point(&self, i: usize) -> &DVector<f64> {
        self.config.point(i)
    }

    /// Same graph and signature, new positions.
    pub fn with_config(&self, config: Configuration) -> Result<Self> {
        Self::new(self.graph.clone(), config, self.signature)
    }

    pub fn with_graph(&self, graph: Graph) -> Result<Self> {
        Self::new(graph, self.config.clone(), self.signature)
    }
}
