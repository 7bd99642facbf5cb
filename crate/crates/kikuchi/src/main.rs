use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use kikuchi::formats::{
    parse_weight_list, read_json, read_weight_file, write_json, GraphSpec, Model, OracleRecord,
};
use kikuchi::plot::{aggregate, write_plot_csv};
use kikuchi::report::{concavity_report, family_listing, oracle, polytope_report, Weights};
use kikuchi::sweep::{read_csv, run_sweep, write_outputs, Kind, PartialSweepConfig, ScheduleName};
use kikuchi_core::polytope::{graph_thresholds, sample_conv_f, uniform_weight_thresholds};
use kikuchi_core::RegionGraph;

#[derive(Parser)]
#[command(
    name = "kikuchi",
    version,
    about = "Reweighted Kikuchi and Bethe approximations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a ρ-sweep with several message initializations per grid point.
    Sweep(SweepArgs),
    /// Check whether region or factor weights give a concave objective.
    CheckConcavity(CheckArgs),
    /// Queries on the single-cycle-forest polytope.
    #[command(subcommand)]
    Polytope(PolytopeCommand),
    /// Exact log partition function, entropy and marginals by enumeration.
    Oracle(OracleArgs),
    /// Aggregate a sweep CSV per ρ for plotting.
    PlotData(PlotArgs),
}

#[derive(Args)]
struct SweepArgs {
    /// JSON file with any of the flag values; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `k<n>`, `t<n>` or `file:<path>`.
    #[arg(long)]
    graph: Option<GraphSpec>,
    #[arg(long, value_parser = parse_kind)]
    kind: Option<Kind>,
    /// Seed of the sampled potentials.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, allow_negative_numbers = true)]
    rho_min: Option<f64>,
    #[arg(long)]
    rho_max: Option<f64>,
    #[arg(long)]
    rho_steps: Option<usize>,
    /// Random initializations per grid point.
    #[arg(long)]
    inits: Option<usize>,
    /// Seed of the first initialization; later ones count up from it.
    #[arg(long)]
    init_seed: Option<u64>,
    #[arg(long)]
    damping: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long, value_parser = parse_schedule)]
    schedule: Option<ScheduleName>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_kind(s: &str) -> Result<Kind, String> {
    match s.to_ascii_lowercase().as_str() {
        "attractive" => Ok(Kind::Attractive),
        "mixed" => Ok(Kind::Mixed),
        _ => Err(format!("unknown kind `{s}` (attractive or mixed)")),
    }
}

fn parse_schedule(s: &str) -> Result<ScheduleName, String> {
    match s.to_ascii_lowercase().as_str() {
        "parallel" => Ok(ScheduleName::Parallel),
        "sequential" => Ok(ScheduleName::Sequential),
        _ => Err(format!("unknown schedule `{s}` (parallel or sequential)")),
    }
}

impl SweepArgs {
    fn overrides(self) -> (Option<PathBuf>, PartialSweepConfig) {
        let p = PartialSweepConfig {
            graph: self.graph,
            kind: self.kind,
            seed: self.seed,
            rho_min: self.rho_min,
            rho_max: self.rho_max,
            rho_steps: self.rho_steps,
            inits: self.inits,
            init_seed: self.init_seed,
            damping: self.damping,
            tol: self.tol,
            max_iters: self.max_iters,
            schedule: self.schedule,
            out: self.out,
        };
        (self.config, p)
    }
}

#[derive(Args)]
#[group(id = "weight_source", required = true, multiple = false)]
struct WeightArgs {
    /// One weight per factor (non-singleton region), e.g. `1,1/2,1`.
    #[arg(long, group = "weight_source", allow_hyphen_values = true)]
    factor_weights: Option<String>,
    /// One weight per region.
    #[arg(long, group = "weight_source", allow_hyphen_values = true)]
    weights: Option<String>,
    /// File with factor weights (JSON array or list).
    #[arg(long, group = "weight_source")]
    weights_file: Option<PathBuf>,
}

impl WeightArgs {
    fn resolve(self) -> Result<Weights> {
        Ok(
            match (self.factor_weights, self.weights, self.weights_file) {
                (Some(s), _, _) => Weights::Factors(parse_weight_list(&s)?),
                (_, Some(s), _) => Weights::Regions(parse_weight_list(&s)?),
                (_, _, Some(p)) => Weights::Factors(read_weight_file(&p)?),
                _ => bail!("no weights given"),
            },
        )
    }
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    weights: WeightArgs,
}

/// A two-layer graph given either as a model file or a named family.
#[derive(Args)]
#[group(id = "graph_source", required = true, multiple = false)]
struct GraphSource {
    #[arg(long, group = "graph_source")]
    model: Option<PathBuf>,
    /// `k<n>`, `t<n>` or `file:<path>`.
    #[arg(long, group = "graph_source")]
    graph: Option<GraphSpec>,
}

impl GraphSource {
    fn region_graph(&self) -> Result<RegionGraph> {
        if let Some(path) = &self.model {
            return Ok(Model::load(path)?.region_graph()?);
        }
        let (g, _) = self
            .graph
            .as_ref()
            .expect("clap enforces one source")
            .resolve()?;
        Ok(RegionGraph::pairwise(g.num_vertices(), 2, g.edges())?)
    }
}

#[derive(Subcommand)]
enum PolytopeCommand {
    /// Membership of factor weights in the concavity polytope and the forest hull.
    Check {
        #[command(flatten)]
        source: GraphSource,
        #[arg(long, allow_hyphen_values = true)]
        factor_weights: Option<String>,
        #[arg(long, conflicts_with = "factor_weights")]
        weights_file: Option<PathBuf>,
    },
    /// Random points of the forest hull, one JSON array per line.
    Sample {
        #[command(flatten)]
        source: GraphSource,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Uniform-weight thresholds ρ_tree and ρ_cycle of a pairwise graph.
    Thresholds {
        #[arg(long)]
        graph: GraphSpec,
    },
    /// Every single-cycle-forest-inducing factor subset, as 0/1 strings.
    Enumerate {
        #[command(flatten)]
        source: GraphSource,
    },
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    model: PathBuf,
    /// Where to write log Z, entropy and marginal tables as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    /// Sweep CSV.
    #[arg(long)]
    input: PathBuf,
    /// Aggregate CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Sweep(args) => sweep(args),
        Command::CheckConcavity(args) => {
            let model = Model::load(&args.model)?;
            print!("{}", concavity_report(&model, &args.weights.resolve()?)?);
            Ok(())
        }
        Command::Polytope(cmd) => polytope(cmd),
        Command::Oracle(args) => {
            let sol = oracle(&Model::load(&args.model)?)?;
            println!("log_partition {:.16e}", sol.log_partition);
            println!("entropy {:.16e}", sol.entropy);
            if let Some(out) = args.out {
                write_json(&out, &OracleRecord::from(&sol))?;
            }
            Ok(())
        }
        Command::PlotData(args) => {
            let rows = aggregate(&read_csv(&args.input)?)?;
            match args.out {
                Some(path) => {
                    let file = File::create(&path)
                        .with_context(|| format!("creating {}", path.display()))?;
                    write_plot_csv(&rows, BufWriter::new(file))?;
                }
                None => write_plot_csv(&rows, io::stdout().lock())?,
            }
            Ok(())
        }
    }
}

fn sweep(args: SweepArgs) -> Result<()> {
    let (config, flags) = args.overrides();
    let merged = match config {
        Some(path) => flags.or(read_json::<PartialSweepConfig>(&path)?),
        None => flags,
    };
    let cfg = merged.resolve()?;
    let output = run_sweep(&cfg)?;
    let sidecar = write_outputs(&output, &cfg.out)?;
    let converged = output.rows.iter().filter(|r| r.converged).count();
    eprintln!(
        "wrote {} rows ({converged} converged) to {} and {}",
        output.rows.len(),
        cfg.out.display(),
        sidecar.display()
    );
    Ok(())
}

fn polytope(cmd: PolytopeCommand) -> Result<()> {
    match cmd {
        PolytopeCommand::Check {
            source,
            factor_weights,
            weights_file,
        } => {
            let w = match (factor_weights, weights_file) {
                (Some(s), _) => parse_weight_list(&s)?,
                (_, Some(p)) => read_weight_file(&p)?,
                _ => bail!("give --factor-weights or --weights-file"),
            };
            let graph = source.region_graph()?;
            print!("{}", polytope_report(&graph, &w)?);
        }
        PolytopeCommand::Sample {
            source,
            count,
            seed,
        } => {
            let graph = source.region_graph()?;
            let view = graph.two_layer_view()?;
            let mut out = io::stdout().lock();
            for point in sample_conv_f(&view, count, seed) {
                writeln!(out, "{}", serde_json::to_string(&point)?)?;
            }
        }
        PolytopeCommand::Thresholds { graph } => {
            let t = match &graph {
                GraphSpec::Family(f) => uniform_weight_thresholds(*f)?,
                GraphSpec::File(_) => graph_thresholds(&graph.resolve()?.0)?,
            };
            println!("rho_tree {}", t.rho_tree);
            println!("rho_cycle {}", t.rho_cycle);
        }
        PolytopeCommand::Enumerate { source } => {
            print!("{}", family_listing(&source.region_graph()?)?)
        }
    }
    Ok(())
}
