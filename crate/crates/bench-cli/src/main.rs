//! Command-line interface for lifelong routing experiments.

use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use lifelong_vrp::dree::{EngineConfig, StrategyKind};
use lifelong_vrp::policy::{greedy_rollout, read_checkpoint, write_checkpoint};
use lifelong_vrp::metrics::compute_metrics;
use lifelong_vrp::seeding::rng_from_seed;
use lifelong_vrp::vrp::{optimality_gap, reference_solve, ProblemKind};

use llvrp_bench::emit::{parse_curves_csv, write_atomic};
use llvrp_bench::profiles::Profile;
use llvrp_bench::runner::{execute, RunConfig};
use llvrp_bench::{libdata, scenario, svg, tsplib};

#[derive(Parser)]
#[command(name = "llvrp", about = "Lifelong learning for vehicle routing", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a scenario file from a named profile.
    GenScenario(GenScenarioArgs),
    /// Train one strategy on a scenario and emit run artifacts.
    Run(RunArgs),
    /// Solve a TSPLIB-format file and report the gap to its reference.
    EvalLib(EvalLibArgs),
    /// Recompute lifelong metrics from a curves.csv file.
    Metrics(MetricsArgs),
    /// Render a curves.csv file as an SVG plot.
    Plot(PlotArgs),
}

#[derive(Args)]
struct GenScenarioArgs {
    /// Output scenario path.
    #[arg(long)]
    out: PathBuf,
    /// Preset: desk or full.
    #[arg(long, default_value = "desk")]
    profile: String,
    /// Problem variant: tsp or cvrp.
    #[arg(long, default_value = "tsp")]
    problem: String,
    /// Seed for randomly placed distribution anchors.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file to train on.
    #[arg(long)]
    scenario: PathBuf,
    /// Directory for curves.csv, metrics.json, and curves.svg.
    #[arg(long)]
    out: PathBuf,
    /// Training strategy, e.g. dree or fine-tuning.
    #[arg(long, default_value = "dree")]
    strategy: String,
    /// Training seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Optional sizing preset applied before explicit overrides.
    #[arg(long)]
    profile: Option<String>,
    /// Weight of the behavior-replay loss.
    #[arg(long)]
    alpha: Option<f64>,
    /// Weight of the instance-replay loss.
    #[arg(long)]
    beta: Option<f64>,
    /// Experience buffer capacity in entries.
    #[arg(long)]
    buffer: Option<usize>,
    /// Smallest adaptive replay interval.
    #[arg(long)]
    interval_lb: Option<u32>,
    /// Largest adaptive replay interval.
    #[arg(long)]
    interval_ub: Option<u32>,
    /// Instances per training batch.
    #[arg(long)]
    batch_size: Option<usize>,
    /// Batches per epoch.
    #[arg(long)]
    batches: Option<u32>,
    /// Rollout starts per instance.
    #[arg(long)]
    n_starts: Option<usize>,
    /// Adam learning rate.
    #[arg(long)]
    lr: Option<f64>,
    /// Extra per-epoch batches granted to replay-free strategies.
    #[arg(long)]
    parity_extra: Option<u32>,
    /// Fix the replay cadence instead of adapting it.
    #[arg(long)]
    fixed_interval: Option<f64>,
    /// Held-out instances per principal.
    #[arg(long)]
    test_size: Option<usize>,
    /// Seed of the held-out instance stream.
    #[arg(long)]
    test_seed: Option<u64>,
    /// Local-search restarts for held-out reference costs.
    #[arg(long)]
    test_restarts: Option<u32>,
    /// Write the final policy parameters to this path.
    #[arg(long)]
    save_params: Option<PathBuf>,
}

#[derive(Args)]
struct EvalLibArgs {
    /// TSPLIB-format instance file.
    #[arg(long)]
    file: PathBuf,
    /// Local-search restarts.
    #[arg(long, default_value_t = 50)]
    restarts: u32,
    /// Seed for restart positions.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Evaluate a saved policy checkpoint as well.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Greedy starts when evaluating a policy.
    #[arg(long, default_value_t = 8)]
    starts: usize,
}

#[derive(Args)]
struct MetricsArgs {
    /// curves.csv produced by a run.
    #[arg(long)]
    curves: PathBuf,
}

#[derive(Args)]
struct PlotArgs {
    /// curves.csv produced by a run.
    #[arg(long)]
    curves: PathBuf,
    /// Output SVG path.
    #[arg(long)]
    out: PathBuf,
    /// Epochs between adjacent principals; inferred when omitted.
    #[arg(long)]
    interval: Option<u32>,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::GenScenario(args) => gen_scenario(args),
        Command::Run(args) => run(args),
        Command::EvalLib(args) => eval_lib(args),
        Command::Metrics(args) => metrics(args),
        Command::Plot(args) => plot(args),
    }
}

fn gen_scenario(args: GenScenarioArgs) -> Result<()> {
    let profile = Profile::parse(&args.profile)?;
    let problem = ProblemKind::parse(&args.problem)?;
    let s = profile.scenario(problem, args.seed);
    write_atomic(&args.out, scenario::emit(&s).as_bytes())?;
    println!(
        "wrote {} ({} principals over {} epochs)",
        args.out.display(),
        s.principals.len(),
        s.total_epochs
    );
    Ok(())
}

fn run(args: RunArgs) -> Result<()> {
    let s = scenario::parse_file(&args.scenario)?;
    let strategy = StrategyKind::parse(&args.strategy)?;
    let mut cfg = RunConfig::new(EngineConfig::new(strategy), args.seed);
    if let Some(p) = &args.profile {
        Profile::parse(p)?.apply(&mut cfg);
    }
    macro_rules! override_opt {
        ($($src:expr => $dst:expr;)*) => {
            $(if let Some(v) = $src { $dst = v; })*
        };
    }
    override_opt! {
        args.alpha => cfg.engine.alpha;
        args.beta => cfg.engine.beta;
        args.buffer => cfg.engine.buffer_capacity;
        args.interval_lb => cfg.engine.interval_lb;
        args.interval_ub => cfg.engine.interval_ub;
        args.batch_size => cfg.engine.batch_size;
        args.batches => cfg.engine.batches_per_epoch;
        args.n_starts => cfg.engine.n_starts;
        args.lr => cfg.engine.learning_rate;
        args.parity_extra => cfg.engine.parity_extra_batches;
        args.test_size => cfg.test_size;
        args.test_seed => cfg.test_seed;
        args.test_restarts => cfg.test_restarts;
    }
    if args.fixed_interval.is_some() {
        cfg.engine.fixed_interval = args.fixed_interval;
    }

    let started = Instant::now();
    let output = execute(&s, &cfg, &args.out)?;
    let elapsed = started.elapsed();

    if let Some(path) = &args.save_params {
        write_checkpoint(path, &output.record.params)
            .with_context(|| format!("writing {}", path.display()))?;
    }

    println!("strategy {} seed {}", strategy.name(), args.seed);
    println!("average_performance     {:.4}", output.metrics.average_performance);
    println!("average_forgetting      {:.4}", output.metrics.average_forgetting);
    println!("average_max_forgetting  {:.4}", output.metrics.average_max_forgetting);
    println!("average_best            {:.4}", output.metrics.average_best);
    println!("enhancements            {}", output.record.enhancements);
    println!("artifacts in {}", args.out.display());
    println!("wall time {:.2}s", elapsed.as_secs_f64());
    Ok(())
}

fn eval_lib(args: EvalLibArgs) -> Result<()> {
    let lib = tsplib::parse_file(&args.file)?;
    println!(
        "instance {}: {} customers ({})",
        lib.name,
        lib.instance.n(),
        lib.instance.kind().name()
    );

    let started = Instant::now();
    let mut rng = rng_from_seed(args.seed);
    let cost = reference_solve(&lib.instance, args.restarts, &mut rng)?;
    println!(
        "local search ({} restarts): {} in {:.2}s",
        args.restarts,
        cost,
        started.elapsed().as_secs_f64()
    );

    match libdata::lookup(&lib.name) {
        Ok(entry) => {
            let reference = entry.implied_reference();
            println!(
                "published: {} at gap {}% (reference {:.2})",
                entry.distance, entry.gap_percent, reference
            );
            println!("local search gap: {:+.2}%", optimality_gap(cost, reference)?);
            if let Some(path) = &args.params {
                let params = read_checkpoint(path)?;
                let policy_cost = greedy_policy_cost(&params, &lib.instance, args.starts)?;
                println!(
                    "policy greedy ({} starts): {} gap {:+.2}%",
                    args.starts,
                    policy_cost,
                    optimality_gap(policy_cost, reference)?
                );
            }
        }
        Err(_) => {
            println!("no embedded reference entry; reporting raw cost only");
            if let Some(path) = &args.params {
                let params = read_checkpoint(path)?;
                let policy_cost = greedy_policy_cost(&params, &lib.instance, args.starts)?;
                println!("policy greedy ({} starts): {}", args.starts, policy_cost);
            }
        }
    }
    Ok(())
}

fn greedy_policy_cost(
    params: &lifelong_vrp::policy::PolicyParams,
    instance: &lifelong_vrp::vrp::Instance,
    starts: usize,
) -> Result<f64> {
    if starts == 0 {
        bail!("need at least one start");
    }
    let mut best = f64::INFINITY;
    for start in 0..starts.min(instance.n()) {
        best = best.min(greedy_rollout(params, instance, start)?.cost);
    }
    Ok(best)
}

fn metrics(args: MetricsArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.curves)
        .with_context(|| format!("reading {}", args.curves.display()))?;
    let (names, ledger) = parse_curves_csv(&text)?;
    let m = compute_metrics(&ledger)?;
    println!("tasks: {}", names.join(", "));
    println!("average_performance     {:.4}", m.average_performance);
    println!("average_forgetting      {:.4}", m.average_forgetting);
    println!("average_max_forgetting  {:.4}", m.average_max_forgetting);
    println!("average_best            {:.4}", m.average_best);
    Ok(())
}

fn plot(args: PlotArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.curves)
        .with_context(|| format!("reading {}", args.curves.display()))?;
    let (names, ledger) = parse_curves_csv(&text)?;
    let interval = match args.interval {
        Some(i) => i,
        None => {
            let segments = (names.len() - 1).max(1) as u32;
            if ledger.horizon() % segments != 0 {
                bail!(
                    "cannot infer --interval: horizon {} not divisible by {} segments",
                    ledger.horizon(),
                    segments
                );
            }
            ledger.horizon() / segments
        }
    };
    let rendered = svg::render(&ledger, &names, interval)?;
    write_atomic(&args.out, rendered.as_bytes())?;
    println!("wrote {}", args.out.display());
    Ok(())
}
