//! ρ-sweeps: uniform edge weights on a grid, several random message
//! initializations per grid point, one CSV row per run.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use kikuchi_core::message_passing::{run_pairwise_rsp, Init, Schedule, SolverOptions};
use kikuchi_core::models::{
    sample_ising, CouplingKind, IsingModel, DEFAULT_OMEGA_S, DEFAULT_OMEGA_ST,
};
use kikuchi_core::objective::exact_log_partition;
use kikuchi_core::polytope::{
    graph_thresholds, uniform_weight_thresholds, Thresholds, MAX_SUBSET_VERTICES,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::formats::{write_json, GraphSpec};

pub const CSV_HEADER: [&str; 7] = [
    "rho",
    "init_seed",
    "objective",
    "delta_final",
    "iterations",
    "converged",
    "exact_logZ",
];

/// Largest vertex count for which sweeps attach the exact log partition.
pub const ORACLE_MAX_VERTICES: usize = 26;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Attractive,
    Mixed,
}

impl From<Kind> for CouplingKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Attractive => CouplingKind::Attractive,
            Kind::Mixed => CouplingKind::Mixed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleName {
    Parallel,
    Sequential,
}

impl From<ScheduleName> for Schedule {
    fn from(s: ScheduleName) -> Self {
        match s {
            ScheduleName::Parallel => Schedule::Parallel,
            ScheduleName::Sequential => Schedule::Sequential,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub graph: GraphSpec,
    pub kind: Kind,
    /// Seed of the sampled potentials.
    pub seed: u64,
    pub rho_min: f64,
    pub rho_max: f64,
    pub rho_steps: usize,
    pub inits: usize,
    /// Seed of the first initialization; run `i` uses `init_seed + i`.
    pub init_seed: u64,
    pub damping: f64,
    pub tol: f64,
    pub max_iters: usize,
    pub schedule: ScheduleName,
    pub out: PathBuf,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            graph: GraphSpec::Family(kikuchi_core::polytope::GraphFamily::Complete(5)),
            kind: Kind::Mixed,
            seed: 0,
            rho_min: 0.0,
            rho_max: 2.0,
            rho_steps: 81,
            inits: 8,
            init_seed: 0,
            damping: 0.5,
            tol: 1e-10,
            max_iters: 2500,
            schedule: ScheduleName::Parallel,
            out: PathBuf::from("sweep.csv"),
        }
    }
}

/// Every field optional; used for config files and command-line overrides.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialSweepConfig {
    pub graph: Option<GraphSpec>,
    pub kind: Option<Kind>,
    pub seed: Option<u64>,
    #[serde(alias = "rho-min")]
    pub rho_min: Option<f64>,
    #[serde(alias = "rho-max")]
    pub rho_max: Option<f64>,
    #[serde(alias = "rho-steps")]
    pub rho_steps: Option<usize>,
    pub inits: Option<usize>,
    #[serde(alias = "init-seed")]
    pub init_seed: Option<u64>,
    pub damping: Option<f64>,
    pub tol: Option<f64>,
    #[serde(alias = "max-iters")]
    pub max_iters: Option<usize>,
    pub schedule: Option<ScheduleName>,
    pub out: Option<PathBuf>,
}

impl PartialSweepConfig {
    /// Fields set in `self` win over `other`.
    pub fn or(self, other: Self) -> Self {
        Self {
            graph: self.graph.or(other.graph),
            kind: self.kind.or(other.kind),
            seed: self.seed.or(other.seed),
            rho_min: self.rho_min.or(other.rho_min),
            rho_max: self.rho_max.or(other.rho_max),
            rho_steps: self.rho_steps.or(other.rho_steps),
            inits: self.inits.or(other.inits),
            init_seed: self.init_seed.or(other.init_seed),
            damping: self.damping.or(other.damping),
            tol: self.tol.or(other.tol),
            max_iters: self.max_iters.or(other.max_iters),
            schedule: self.schedule.or(other.schedule),
            out: self.out.or(other.out),
        }
    }

    pub fn resolve(self) -> Result<SweepConfig> {
        let d = SweepConfig::default();
        let cfg = SweepConfig {
            graph: self.graph.unwrap_or(d.graph),
            kind: self.kind.unwrap_or(d.kind),
            seed: self.seed.unwrap_or(d.seed),
            rho_min: self.rho_min.unwrap_or(d.rho_min),
            rho_max: self.rho_max.unwrap_or(d.rho_max),
            rho_steps: self.rho_steps.unwrap_or(d.rho_steps),
            inits: self.inits.unwrap_or(d.inits),
            init_seed: self.init_seed.unwrap_or(d.init_seed),
            damping: self.damping.unwrap_or(d.damping),
            tol: self.tol.unwrap_or(d.tol),
            max_iters: self.max_iters.unwrap_or(d.max_iters),
            schedule: self.schedule.unwrap_or(d.schedule),
            out: self.out.unwrap_or(d.out),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho_min <= self.rho_max) || !self.rho_min.is_finite() || !self.rho_max.is_finite()
        {
            return Err(invalid("rho_min must not exceed rho_max"));
        }
        if self.rho_steps == 0 {
            return Err(invalid("rho_steps must be at least 1"));
        }
        if self.inits == 0 {
            return Err(invalid("inits must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.damping) {
            return Err(invalid("damping must lie in [0, 1)"));
        }
        if !(self.tol > 0.0) {
            return Err(invalid("tol must be positive"));
        }
        if self.max_iters == 0 {
            return Err(invalid("max_iters must be at least 1"));
        }
        Ok(())
    }

    pub fn rho_grid(&self) -> Vec<f64> {
        if self.rho_steps == 1 {
            return vec![self.rho_min];
        }
        let h = (self.rho_max - self.rho_min) / (self.rho_steps - 1) as f64;
        (0..self.rho_steps)
            .map(|i| {
                if i + 1 == self.rho_steps {
                    self.rho_max
                } else {
                    self.rho_min + i as f64 * h
                }
            })
            .collect()
    }

    pub fn solver_options(&self, init_seed: u64) -> SolverOptions {
        SolverOptions {
            damping: self.damping,
            tol: self.tol,
            max_iters: self.max_iters,
            schedule: self.schedule.into(),
            init: Init::Random(init_seed),
        }
    }

    /// The model the sweep runs on: potentials from the file when present,
    /// otherwise sampled on the graph with `kind` and `seed`.
    pub fn model(&self) -> Result<IsingModel> {
        let (graph, given) = self.graph.resolve()?;
        match given {
            Some(m) => Ok(m),
            None => Ok(sample_ising(
                &graph,
                self.kind.into(),
                DEFAULT_OMEGA_S,
                DEFAULT_OMEGA_ST,
                self.seed,
            )?),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub rho: f64,
    pub init_seed: u64,
    /// `NaN` when the solver could not run (zero weights).
    pub objective: f64,
    pub delta_final: f64,
    pub iterations: usize,
    pub converged: bool,
    pub exact_log_z: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub rho_tree: Option<f64>,
    pub rho_cycle: Option<f64>,
    #[serde(rename = "exact_logZ")]
    pub exact_log_z: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct SweepOutput {
    pub model: IsingModel,
    pub rows: Vec<SweepRow>,
    pub sidecar: Sidecar,
}

pub fn thresholds_for(spec: &GraphSpec, model: &IsingModel) -> Option<Thresholds> {
    match spec {
        GraphSpec::Family(f) => uniform_weight_thresholds(*f).ok(),
        GraphSpec::File(_) if model.num_vertices() <= MAX_SUBSET_VERTICES => {
            graph_thresholds(model.graph()).ok()
        }
        GraphSpec::File(_) => None,
    }
}

/// Runs every `(ρ, init)` cell. Rows come back ordered by `ρ` then
/// initialization, independent of scheduling.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepOutput> {
    cfg.validate()?;
    let model = cfg.model()?;
    let exact_log_z = if model.num_vertices() <= ORACLE_MAX_VERTICES {
        Some(exact_log_partition(
            &model.region_graph(),
            &model.log_potentials(),
        )?)
    } else {
        None
    };
    let cells: Vec<(f64, u64)> = cfg
        .rho_grid()
        .into_iter()
        .flat_map(|rho| (0..cfg.inits as u64).map(move |i| (rho, cfg.init_seed + i)))
        .collect();
    let m = model.graph().num_edges();
    let rows = with_thread_cap(|| {
        cells
            .par_iter()
            .map(|&(rho, init_seed)| run_cell(&model, m, rho, init_seed, cfg, exact_log_z))
            .collect::<Result<Vec<_>>>()
    })??;
    let thresholds = thresholds_for(&cfg.graph, &model);
    Ok(SweepOutput {
        model,
        rows,
        sidecar: Sidecar {
            rho_tree: thresholds.map(|t| t.rho_tree),
            rho_cycle: thresholds.map(|t| t.rho_cycle),
            exact_log_z,
        },
    })
}

fn run_cell(
    model: &IsingModel,
    m: usize,
    rho: f64,
    init_seed: u64,
    cfg: &SweepConfig,
    exact: Option<f64>,
) -> Result<SweepRow> {
    let row = |objective, delta_final, iterations, converged| SweepRow {
        rho,
        init_seed,
        objective,
        delta_final,
        iterations,
        converged,
        exact_log_z: exact,
    };
    if rho <= 0.0 {
        // the reweighted update divides by the edge weight
        return Ok(row(f64::NAN, f64::NAN, 0, false));
    }
    match run_pairwise_rsp(model, &vec![rho; m], cfg.solver_options(init_seed)) {
        Ok(res) => Ok(row(
            res.objective.total,
            res.delta_final,
            res.iterations,
            res.converged,
        )),
        Err(kikuchi_core::Error::NonFiniteMessage { iteration }) => {
            Ok(row(f64::NAN, f64::INFINITY, iteration, false))
        }
        Err(e) => Err(e.into()),
    }
}

/// Runs `f` on a pool capped by `KIKUCHI_THREADS` when that is set.
pub fn with_thread_cap<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    match std::env::var("KIKUCHI_THREADS") {
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .map_err(|_| invalid(format!("KIKUCHI_THREADS=`{v}` is not a thread count")))?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| invalid(e.to_string()))?;
            Ok(pool.install(f))
        }
        Err(_) => Ok(f()),
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            format_real(r.rho),
            r.init_seed.to_string(),
            format_real(r.objective),
            format_real(r.delta_final),
            r.iterations.to_string(),
            r.converged.to_string(),
            r.exact_log_z.map(format_real).unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

/// Sidecar path next to the CSV: `sweep.csv` → `sweep.json`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

/// Writes the CSV and its sidecar.
pub fn write_outputs(output: &SweepOutput, csv_path: &Path) -> Result<PathBuf> {
    let file = fs::File::create(csv_path).map_err(|source| Error::Io {
        path: csv_path.to_path_buf(),
        source,
    })?;
    write_csv(&output.rows, std::io::BufWriter::new(file))?;
    let side = sidecar_path(csv_path);
    write_json(&side, &output.sidecar)?;
    Ok(side)
}

pub fn read_csv(path: &Path) -> Result<Vec<SweepRow>> {
    let file = fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_csv(file)
}

pub fn parse_csv<R: std::io::Read>(input: R) -> Result<Vec<SweepRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers()?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(invalid(format!(
            "unexpected CSV header; expected {}",
            CSV_HEADER.join(",")
        )));
    }
    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let bad = |field: &str| invalid(format!("row {}: bad {field}", line + 1));
        let real = |i: usize, name: &str| rec[i].parse::<f64>().map_err(|_| bad(name));
        rows.push(SweepRow {
            rho: real(0, "rho")?,
            init_seed: rec[1].parse().map_err(|_| bad("init_seed"))?,
            objective: real(2, "objective")?,
            delta_final: real(3, "delta_final")?,
            iterations: rec[4].parse().map_err(|_| bad("iterations"))?,
            converged: rec[5].parse().map_err(|_| bad("converged"))?,
            exact_log_z: if rec[6].is_empty() {
                None
            } else {
                Some(real(6, "exact_logZ")?)
            },
        });
    }
    Ok(rows)
}
