//! Command-line front end: generate topologies, build trees, schedule,
//! verify, sweep and solve tiny instances exactly. Subcommands exchange
//! plain text files so any stage can be audited on its own.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aggsched::experiments::summarize;
use aggsched::netgen::{parse_topology, write_topology};
use aggsched::par::with_threads;
use aggsched::schedule::{parse_schedule, schedule_with_rounds, write_schedule};
use aggsched::tree::{parse_tree, write_tree};
use aggsched::{
    brute_force_optimal, build_ddas_tree, build_spt_tree, compute_layers, generate_network, run_sweep,
    verify_schedule, AggregationTree, CandidatePolicy, Execution, Figure, Layering, Network, Params, Scheme, SinkPlacement,
    SweepSpec,
};
use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "aggsched", version, about = "Aggregation scheduling for duty-cycled sensor networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random connected topology.
    Gen {
        #[command(flatten)]
        params: ParamArgs,
        /// Topology output file (stdout when omitted).
        #[arg(short, long = "dump-topology", visible_alias = "out")]
        out: Option<PathBuf>,
    },
    /// Build an aggregation tree.
    Tree {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_enum, default_value_t = Method::Ddas)]
        method: Method,
        /// Tree output file (stdout when omitted).
        #[arg(short, long = "dump-tree", visible_alias = "out")]
        out: Option<PathBuf>,
    },
    /// Build a tree and schedule it; prints the aggregation delay.
    Sched {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_enum, default_value_t = Method::Ddas)]
        method: Method,
        #[arg(long, value_enum, default_value_t = Policy::AllLeaves)]
        policy: Policy,
        /// Schedule output file.
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(long)]
        dump_topology: Option<PathBuf>,
        #[arg(long)]
        dump_tree: Option<PathBuf>,
    },
    /// Check a schedule against a topology and tree; exits 1 on violations.
    Verify {
        #[arg(long)]
        topology: PathBuf,
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        schedule: PathBuf,
    },
    /// Run a parameter sweep and write CSV files.
    Sweep {
        /// Flat key = value sweep file.
        #[arg(long, conflicts_with = "figure", required_unless_present = "figure")]
        config: Option<PathBuf>,
        /// Built-in sweep: fig2a, fig2b, fig3a or fig3b.
        #[arg(long)]
        figure: Option<String>,
        /// Extend the node-count sweep to 800 nodes.
        #[arg(long, requires = "figure")]
        extended: bool,
        #[arg(long, default_value_t = 100, requires = "figure")]
        trials: usize,
        #[arg(long, default_value_t = 3, requires = "figure")]
        channels: u32,
        #[arg(long, default_value_t = 42, requires = "figure")]
        seed: u64,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Also write a whitespace-separated `x mean...` file.
        #[arg(long)]
        emit_plotdata: bool,
    },
    /// Exact minimum delay of a tiny instance, next to the greedy delay.
    Oracle {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_enum, default_value_t = Method::Ddas)]
        method: Method,
        #[arg(long, value_enum, default_value_t = Policy::AllLeaves)]
        policy: Policy,
        /// Search horizon in slots (default 3T).
        #[arg(long)]
        horizon: Option<u64>,
        /// Optimal schedule output file.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct ParamArgs {
    #[arg(long, default_value_t = 200)]
    nodes: usize,
    #[arg(long, default_value_t = 100.0)]
    area: f64,
    #[arg(long, default_value_t = 20.0)]
    range: f64,
    /// Interference range (defaults to --range).
    #[arg(long)]
    irange: Option<f64>,
    #[arg(long, default_value_t = 20)]
    period: u32,
    #[arg(long, default_value_t = 2)]
    active: u32,
    #[arg(long, default_value_t = 3)]
    channels: u32,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Sink position: random, center or corner.
    #[arg(long, default_value = "random")]
    sink: SinkPlacement,
}

impl ParamArgs {
    fn params(&self) -> Params {
        Params {
            node_count: self.nodes,
            area_side: self.area,
            comm_range: self.range,
            interference_range: self.irange.unwrap_or(self.range),
            period_length: self.period,
            active_slot_count: self.active,
            channel_count: self.channels,
            rng_seed: self.seed,
            sink_placement: self.sink,
        }
    }
}

#[derive(Args)]
struct Source {
    #[command(flatten)]
    params: ParamArgs,
    /// Read the topology from a file instead of generating it.
    #[arg(long)]
    load_topology: Option<PathBuf>,
}

impl Source {
    fn network(&self) -> anyhow::Result<Network> {
        match &self.load_topology {
            Some(path) => Ok(parse_topology(&read(path)?)?),
            None => Ok(generate_network(&self.params.params())?),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Ddas,
    Spt,
}

impl Method {
    fn build(self, net: &Network, lay: &Layering) -> AggregationTree {
        match self {
            Method::Ddas => build_ddas_tree(net, lay),
            Method::Spt => build_spt_tree(net, lay),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Policy {
    AllLeaves,
    Layered,
}

impl From<Policy> for CandidatePolicy {
    fn from(p: Policy) -> Self {
        match p {
            Policy::AllLeaves => CandidatePolicy::AllLeaves,
            Policy::Layered => CandidatePolicy::DeepestLayerOnly,
        }
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn emit(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Gen { params, out } => {
            let net = generate_network(&params.params())?;
            emit(out.as_deref(), &write_topology(&net))?;
        }
        Command::Tree { source, method, out } => {
            let net = source.network()?;
            let lay = compute_layers(&net);
            let tree = method.build(&net, &lay);
            emit(out.as_deref(), &write_tree(&tree, &lay))?;
        }
        Command::Sched {
            source,
            method,
            policy,
            out,
            dump_topology,
            dump_tree,
        } => {
            let net = source.network()?;
            let lay = compute_layers(&net);
            let tree = method.build(&net, &lay);
            let (sched, rounds) = schedule_with_rounds(&net, &tree, policy.into());
            if let Some(p) = &dump_topology {
                emit(Some(p), &write_topology(&net))?;
            }
            if let Some(p) = &dump_tree {
                emit(Some(p), &write_tree(&tree, &lay))?;
            }
            match &out {
                Some(p) => emit(Some(p), &write_schedule(&sched))?,
                None => print!("{}", write_schedule(&sched)),
            }
            eprintln!("rounds {}", rounds.len());
            eprintln!("delay {}", sched.delay());
        }
        Command::Verify { topology, tree, schedule } => {
            let net = parse_topology(&read(&topology)?)?;
            let tree = parse_tree(&read(&tree)?, net.node_count())?;
            let sched = parse_schedule(&read(&schedule)?)?;
            let violations = verify_schedule(&net, &tree, &sched);
            for v in &violations {
                println!("{v}");
            }
            if !violations.is_empty() {
                eprintln!("{} violations", violations.len());
                return Ok(ExitCode::from(1));
            }
            println!("ok delay {}", sched.delay());
        }
        Command::Sweep {
            config,
            figure,
            extended,
            trials,
            channels,
            seed,
            out_dir,
            jobs,
            emit_plotdata,
        } => {
            let (name, spec) = match (config, figure) {
                (Some(path), _) => {
                    let spec = SweepSpec::parse_config(&read(&path)?)?;
                    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("sweep").to_string();
                    (stem, spec)
                }
                (None, Some(f)) => {
                    let fig: Figure = f.parse()?;
                    (fig.name().to_string(), fig.spec(channels, trials, seed, extended))
                }
                (None, None) => bail!("either --config or --figure is required"),
            };
            let threads = if jobs == 0 {
                std::thread::available_parallelism().map_or(1, |n| n.get())
            } else {
                jobs
            };
            let result = with_threads(threads, || run_sweep(&spec, Execution::Parallel))?;
            fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
            emit(Some(&out_dir.join(format!("{name}_trials.csv"))), &result.trials_csv()?)?;
            emit(Some(&out_dir.join(format!("{name}_summary.csv"))), &result.summary_csv()?)?;
            if emit_plotdata {
                emit(Some(&out_dir.join(format!("{name}.dat"))), &result.plot_data())?;
            }
            print!("{}", result.summary_csv()?);
            for baseline in [Scheme::Ndas, Scheme::SptDas] {
                if let Ok(rows) = summarize(&result, Scheme::Ddas, baseline) {
                    println!("# DDAS vs {baseline}: relative improvement");
                    for r in rows {
                        println!("{} {:.4}", r.sweep_value, r.relative);
                    }
                }
            }
        }
        Command::Oracle {
            source,
            method,
            policy,
            horizon,
            out,
        } => {
            let net = source.network()?;
            let lay = compute_layers(&net);
            let tree = method.build(&net, &lay);
            let horizon = horizon.unwrap_or(3 * u64::from(net.params().period_length));
            let greedy = schedule_with_rounds(&net, &tree, policy.into()).0;
            match brute_force_optimal(&net, &tree, horizon)? {
                Some(best) => {
                    println!("optimal_delay {}", best.delay());
                    if let Some(p) = &out {
                        emit(Some(p), &write_schedule(&best))?;
                    }
                }
                None => println!("optimal_delay none (> {horizon})"),
            }
            println!("greedy_delay {}", greedy.delay());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<aggsched::Error>() {
                Some(aggsched::Error::InvalidArgument(_)) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
