//! JSON network description.
//!
//! ```json
//! {
//!   "nodes": [{"id": 1, "epsilon": 1.0}, {"id": 2, "epsilon": 0.5}],
//!   "edges": [{"u": 1, "v": 2, "weight": 1.0}],
//!   "noise": {"sigma_omega": 1.0, "sigma_v": 1.0}
//! }
//! ```
//!
//! `noise` is optional (unit separable noise). `noise.omega` is an `n×n`
//! factor with rows and columns in node-id order; `noise.gamma` is `m×m` with
//! rows and columns in the order edges are listed in the file.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, Network};
use crate::operators::{CovarianceFactor, NoiseModel, ScaleWeightPair};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    pub id: usize,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub sigma_omega: f64,
    pub sigma_v: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpecFile {
    pub nodes: Vec<NodeSpec>,
    pub edges: Vec<EdgeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseSpec>,
}

/// A validated network with parameters in `κ` order.
#[derive(Debug, Clone)]
pub struct LoadedNetwork {
    pub net: Network,
    pub params: ScaleWeightPair,
    pub noise: NoiseModel,
}

fn square(rows: &[Vec<f64>], dim: usize, name: &str) -> Result<DMatrix<f64>> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(Error::Parse(format!("{name} must be a {dim}x{dim} matrix")));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Parse(format!("{name} has non-finite entries")));
    }
    Ok(DMatrix::from_fn(dim, dim, |i, j| rows[i][j]))
}

impl NetworkSpecFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    /// Builds a spec from a graph and parameters given in `κ` order.
    pub fn from_network(net: &Network, params: &ScaleWeightPair, noise: Option<NoiseSpec>) -> Self {
        let nodes = params
            .epsilon()
            .iter()
            .enumerate()
            .map(|(i, &epsilon)| NodeSpec { id: i + 1, epsilon })
            .collect();
        let edges = net
            .ordering
            .edges()
            .iter()
            .zip(params.weights().iter())
            .map(|(&(u, v), &weight)| EdgeSpec { u, v, weight })
            .collect();
        NetworkSpecFile { nodes, edges, noise }
    }

    fn edge_pairs(&self) -> Vec<Edge> {
        self.edges.iter().map(|e| (e.u, e.v)).collect()
    }

    pub fn graph(&self) -> Result<Graph> {
        let n = self.nodes.len();
        let mut seen = vec![false; n];
        for node in &self.nodes {
            if node.id == 0 || node.id > n || std::mem::replace(&mut seen[node.id - 1], true) {
                return Err(Error::Parse(format!(
                    "node ids must be exactly 1..={n}; bad id {}",
                    node.id
                )));
            }
        }
        Graph::new(n, &self.edge_pairs())
    }

    /// Validates everything and lays parameters out for the default spanning
    /// tree, or for `tree` when given.
    pub fn load(&self, tree: Option<&[Edge]>) -> Result<LoadedNetwork> {
        let graph = self.graph()?;
        let net = match tree {
            Some(t) => Network::with_tree(graph, t)?,
            None => Network::new(graph)?,
        };
        let n = self.nodes.len();
        let m = self.edges.len();

        let mut eps = DVector::zeros(n);
        for node in &self.nodes {
            eps[node.id - 1] = node.epsilon;
        }
        // file position of the edge at each κ index
        let mut file_index = vec![0usize; m];
        let mut w = DVector::zeros(m);
        for (k, e) in self.edges.iter().enumerate() {
            let pos = net.ordering.index_of((e.u, e.v)).expect("edge in ordering");
            file_index[pos] = k;
            w[pos] = e.weight;
        }
        let params = ScaleWeightPair::new(eps, w)?;

        let noise = match &self.noise {
            None => NoiseModel::default(),
            Some(spec) => {
                let omega = match &spec.omega {
                    Some(rows) => CovarianceFactor::Matrix(square(rows, n, "omega")?),
                    None => CovarianceFactor::Separable,
                };
                let gamma = match &spec.gamma {
                    Some(rows) => {
                        let g = square(rows, m, "gamma")?;
                        CovarianceFactor::Matrix(DMatrix::from_fn(m, m, |a, b| {
                            g[(file_index[a], file_index[b])]
                        }))
                    }
                    None => CovarianceFactor::Separable,
                };
                let model = NoiseModel {
                    sigma_omega: spec.sigma_omega,
                    sigma_v: spec.sigma_v,
                    omega,
                    gamma,
                };
                model.validate()?;
                model
            }
        };
        Ok(LoadedNetwork { net, params, noise })
    }
}
