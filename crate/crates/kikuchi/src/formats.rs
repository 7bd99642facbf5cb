//! JSON model files and command-line value syntax.
//!
//! Two model shapes are accepted. A region graph:
//!
//! ```json
//! {"num_vertices": 5, "domain_size": 2, "regions": [[0], [1], [0, 1]],
//!  "log_potentials": [[0.0, 0.0], [0.0, 0.0], [0.3, -0.3, -0.3, 0.3]]}
//! ```
//!
//! and a pairwise Ising model with spins `±1` (potentials `γ_s x_s` and
//! `γ_st x_s x_t`); the `gamma_*` arrays may be omitted to describe a bare
//! graph:
//!
//! ```json
//! {"n": 3, "edges": [[0, 1], [1, 2]], "gamma_s": [0.1, 0.0, 0.05], "gamma_st": [1.0, -0.5]}
//! ```

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use kikuchi_core::models::{Graph, IsingModel};
use kikuchi_core::objective::ExactSolution;
use kikuchi_core::polytope::GraphFamily;
use kikuchi_core::{FactorTable, RegionGraph};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DomainSize {
    Uniform(usize),
    PerVertex(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionGraphFile {
    pub num_vertices: usize,
    pub domain_size: DomainSize,
    pub regions: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_potentials: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsingFile {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_s: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_st: Option<Vec<f64>>,
}

impl IsingFile {
    pub fn from_model(model: &IsingModel) -> Self {
        Self {
            n: model.num_vertices(),
            edges: model.graph().edges().iter().map(|&(s, t)| [s, t]).collect(),
            gamma_s: Some(model.gamma_s().to_vec()),
            gamma_st: Some(model.gamma_st().to_vec()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelFile {
    Regions(RegionGraphFile),
    Ising(IsingFile),
}

/// A parsed and validated model file.
#[derive(Clone, Debug)]
pub enum Model {
    Regions {
        graph: RegionGraph,
        theta: Option<Vec<FactorTable>>,
    },
    Pairwise {
        graph: Graph,
        ising: Option<IsingModel>,
    },
}

impl Model {
    pub fn from_file(file: ModelFile) -> Result<Self> {
        match file {
            ModelFile::Regions(f) => {
                let graph = match f.domain_size {
                    DomainSize::Uniform(d) => RegionGraph::new(f.num_vertices, d, f.regions)?,
                    DomainSize::PerVertex(ds) => {
                        if ds.len() != f.num_vertices {
                            return Err(invalid("domain_size list must have one entry per vertex"));
                        }
                        RegionGraph::with_domain_sizes(ds, f.regions)?
                    }
                };
                let theta = match f.log_potentials {
                    None => None,
                    Some(tables) => {
                        if tables.len() != graph.num_regions() {
                            return Err(invalid("log_potentials must have one table per region"));
                        }
                        let theta = tables
                            .into_iter()
                            .enumerate()
                            .map(|(r, values)| {
                                FactorTable::new(graph.region(r).to_vec(), graph.cards(r), values)
                            })
                            .collect::<std::result::Result<Vec<_>, _>>()?;
                        Some(theta)
                    }
                };
                Ok(Self::Regions { graph, theta })
            }
            ModelFile::Ising(f) => {
                let graph = Graph::new(f.n, f.edges.iter().map(|e| (e[0], e[1])).collect())?;
                let ising = match (f.gamma_s, f.gamma_st) {
                    (None, None) => None,
                    (Some(gs), Some(gst)) => Some(IsingModel::new(graph.clone(), gs, gst)?),
                    _ => return Err(invalid("gamma_s and gamma_st must be given together")),
                };
                Ok(Self::Pairwise { graph, ising })
            }
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_file(read_json(path)?)
    }

    /// The region graph the model lives on (vertices then edges for
    /// pairwise files).
    pub fn region_graph(&self) -> Result<RegionGraph> {
        match self {
            Self::Regions { graph, .. } => Ok(graph.clone()),
            Self::Pairwise { graph, .. } => Ok(RegionGraph::pairwise(
                graph.num_vertices(),
                2,
                graph.edges(),
            )?),
        }
    }

    /// Log-potentials aligned with [`Model::region_graph`]; zero when the
    /// file gives none.
    pub fn log_potentials(&self) -> Result<Vec<FactorTable>> {
        let rg = self.region_graph()?;
        Ok(match self {
            Self::Regions { theta: Some(t), .. } => t.clone(),
            Self::Pairwise { ising: Some(m), .. } => m.log_potentials(),
            _ => (0..rg.num_regions())
                .map(|r| FactorTable::zeros_for(&rg, r))
                .collect(),
        })
    }
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    text.push('\n');
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// `k<n>`, `t<n>` or `file:<path>`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GraphSpec {
    Family(GraphFamily),
    File(PathBuf),
}

impl FromStr for GraphSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(path) = s.strip_prefix("file:") {
            return Ok(Self::File(PathBuf::from(path)));
        }
        let lower = s.to_ascii_lowercase();
        let (kind, n) = lower.split_at(1.min(lower.len()));
        let n: usize = n.parse().map_err(|_| {
            invalid(format!(
                "graph spec `{s}`: expected k<n>, t<n> or file:<path>"
            ))
        })?;
        match kind {
            "k" => Ok(Self::Family(GraphFamily::Complete(n))),
            "t" => Ok(Self::Family(GraphFamily::Torus(n))),
            _ => Err(invalid(format!(
                "graph spec `{s}`: expected k<n>, t<n> or file:<path>"
            ))),
        }
    }
}

impl fmt::Display for GraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Family(GraphFamily::Complete(n)) => write!(f, "k{n}"),
            Self::Family(GraphFamily::Torus(n)) => write!(f, "t{n}"),
            Self::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

impl Serialize for GraphSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for GraphSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl GraphSpec {
    /// The graph itself plus, for file specs, any potentials the file carries.
    pub fn resolve(&self) -> Result<(Graph, Option<IsingModel>)> {
        match self {
            Self::Family(f) => Ok((f.graph()?, None)),
            Self::File(path) => match Model::load(path)? {
                Model::Pairwise { graph, ising } => Ok((graph, ising)),
                Model::Regions { .. } => Err(invalid(format!(
                    "{}: expected a pairwise model ({{\"n\", \"edges\", ...}})",
                    path.display()
                ))),
            },
        }
    }
}

/// Comma- or whitespace-separated reals, or a JSON array.
pub fn parse_weight_list(s: &str) -> Result<Vec<f64>> {
    let trimmed = s.trim();
    let out: Vec<f64> = if trimmed.starts_with('[') {
        serde_json::from_str(trimmed).map_err(|e| invalid(format!("weights: {e}")))?
    } else {
        trimmed
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(parse_real)
            .collect::<Result<_>>()?
    };
    if out.is_empty() {
        return Err(invalid("weight list is empty"));
    }
    Ok(out)
}

/// A real number or a simple fraction such as `1/2`.
fn parse_real(t: &str) -> Result<f64> {
    let bad = || invalid(format!("`{t}` is not a number"));
    match t.split_once('/') {
        Some((a, b)) => {
            let (a, b): (f64, f64) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
            Ok(a / b)
        }
        None => t.parse().map_err(|_| bad()),
    }
}

/// Weights read from a file holding either a JSON array or the list syntax
/// of [`parse_weight_list`].
pub fn read_weight_file(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_weight_list(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRecord {
    pub scope: Vec<usize>,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleRecord {
    pub log_partition: f64,
    pub entropy: f64,
    pub marginals: Vec<TableRecord>,
}

impl From<&ExactSolution> for OracleRecord {
    fn from(s: &ExactSolution) -> Self {
        Self {
            log_partition: s.log_partition,
            entropy: s.entropy,
            marginals: s
                .marginals
                .tables()
                .iter()
                .map(|t| TableRecord {
                    scope: t.scope().to_vec(),
                    values: t.values().to_vec(),
                })
                .collect(),
        }
    }
}
