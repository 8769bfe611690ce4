//! Command-line front end: analyze, sweep, simulate, optimize.
//!
//! Exit codes: 0 success; 2 configuration or usage error; 3 unstable
//! offered load (or no stable grid point); 4 series truncation failure.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use linkseg::config::{load_config, ConfigFile};
use linkseg::error::Error;
use linkseg::queue::{self, QueueingMetrics};
use linkseg::segment::SegmentationStats;
use linkseg::sim;
use linkseg::sweep::{self, SweepOutcome, SweepRow, SweepSpec};

#[derive(Parser)]
#[command(
    name = "linkseg",
    version,
    about = "Mean response time of segmented message traffic over a single link"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form metrics for the configured payload size.
    Analyze(AnalyzeArgs),
    /// Closed-form metrics across the payload grid, as CSV.
    Sweep(SweepArgs),
    /// Discrete-event simulation, reported beside the closed forms.
    Simulate(SimulateArgs),
    /// Search the payload grid for the smallest mean response time.
    Optimize(OptimizeArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Configuration file.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Also write the metrics as a one-row CSV file.
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
    /// Override the configured arrival rate (messages/second).
    #[arg(long, value_name = "X")]
    lambda: Option<f64>,
}

#[derive(Args)]
struct SweepArgs {
    /// Configuration file.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Write the CSV here instead of standard output.
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
    /// Arrival rate (messages/second); repeat for one curve per rate.
    /// Overrides the configured rate.
    #[arg(long, value_name = "X")]
    lambda: Vec<f64>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Configuration file.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Also write the estimates as a one-row CSV file.
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
    /// Override the configured arrival rate (messages/second).
    #[arg(long, value_name = "X")]
    lambda: Option<f64>,
    /// Override the configured simulation seed.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
}

#[derive(Args)]
struct OptimizeArgs {
    /// Configuration file.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Also write the refinement trace as a CSV file.
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
    /// Override the configured arrival rate (messages/second).
    #[arg(long, value_name = "X")]
    lambda: Option<f64>,
    /// Refinement rounds around the best coarse grid point.
    #[arg(long, value_name = "K", default_value_t = 2)]
    refine: u32,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(args) => cmd_analyze(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Optimize(args) => cmd_optimize(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidParameter(_)
        | Error::Parse { .. }
        | Error::Io(_)
        | Error::TooFewPoints(_) => 2,
        Error::Unstable { .. } | Error::NoStablePoint => 3,
        Error::Truncation { .. } => 4,
    }
}

fn write_text(path: &PathBuf, text: &str) -> Result<(), Error> {
    std::fs::write(path, text)?;
    Ok(())
}

fn scenario_line(cfg: &ConfigFile, lambda: f64, payload: f64) -> String {
    format!(
        "scenario: lambda = {} msg/s, payload = {} bytes, header = {} bytes, \
         capacity = {} bytes/s",
        lambda,
        payload,
        cfg.link.header,
        cfg.link.bytes_per_second()
    )
}

fn print_metrics(stats: &SegmentationStats, metrics: &QueueingMetrics) {
    println!(
        "pi_E     = {}  (edge-packet probability)",
        stats.edge_probability
    );
    println!("ell_p    = {} bytes  (mean packet payload)", stats.mean_packet);
    println!(
        "sigma_p2 = {} bytes^2  (packet payload variance)",
        stats.packet_variance
    );
    println!("EX       = {} packets  (mean packets per message)", stats.mean_batch);
    println!(
        "EX2      = {} packets^2  (second moment of packets per message)",
        stats.mean_batch_sq
    );
    println!("ES       = {} s  (mean packet service time)", metrics.es);
    println!(
        "ES2      = {} s^2  (second moment of packet service time)",
        metrics.es2
    );
    println!("a        = {}  (offered load)", metrics.load);
    println!("EW1      = {} s  (mean queueing delay)", metrics.ew1);
    println!("EW2      = {} s  (mean segmentation delay)", metrics.ew2);
    println!("EW       = {} s  (mean waiting time)", metrics.ew);
    println!("ER       = {} s  (mean response time)", metrics.er);
    if metrics.high_load {
        println!("note: offered load exceeds 0.95; the queue operates close to saturation");
    }
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<(), Error> {
    let cfg = load_config(&args.config)?;
    let scenario = cfg.scenario(args.lambda)?;
    let stats = linkseg::segment::segmentation_stats(&scenario.dist, scenario.payload, cfg.tolerance)?;
    let metrics = queue::metrics_from_stats(scenario.lambda, &stats, scenario.payload, &scenario.link)?;
    println!("{}", scenario_line(&cfg, scenario.lambda, scenario.payload));
    print_metrics(&stats, &metrics);
    if let Some(path) = &args.csv {
        let mut text = String::from(
            "lambda,ell_d,pi_E,ell_p,sigma_p2,EX,EX2,ES,ES2,a,EW1,EW2,EW,ER\n",
        );
        writeln!(
            text,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            scenario.lambda,
            scenario.payload,
            stats.edge_probability,
            stats.mean_packet,
            stats.packet_variance,
            stats.mean_batch,
            stats.mean_batch_sq,
            metrics.es,
            metrics.es2,
            metrics.load,
            metrics.ew1,
            metrics.ew2,
            metrics.ew,
            metrics.er
        )
        .expect("writing to String cannot fail");
        write_text(path, &text)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

/// Arrival rates to evaluate: the `--lambda` overrides in flag order, or
/// the configured rate.
fn lambda_set(cfg: &ConfigFile, overrides: &[f64]) -> Result<Vec<f64>, Error> {
    if overrides.is_empty() {
        return Ok(vec![cfg.lambda]);
    }
    for &lambda in overrides {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "--lambda must be positive and finite, got {lambda}"
            )));
        }
    }
    Ok(overrides.to_vec())
}

/// The payload grid for sweep/optimize. A configured default grid is
/// resolved with the smallest arrival rate under consideration so it
/// covers the widest stable range; rows for larger rates then report
/// their own stability status.
fn resolve_grid(cfg: &ConfigFile, lambdas: &[f64]) -> Result<Vec<f64>, Error> {
    let Some(grid_spec) = &cfg.payload.grid else {
        return Err(Error::InvalidParameter(
            "this command needs a payload grid (set grid keys in [payload])".into(),
        ));
    };
    match grid_spec.expand() {
        Some(grid) => Ok(grid),
        None => {
            let min_lambda = lambdas.iter().copied().fold(f64::INFINITY, f64::min);
            sweep::default_grid(
                &cfg.distribution()?,
                min_lambda,
                &cfg.link_params()?,
                cfg.tolerance,
            )
        }
    }
}

fn sweep_csv_row(lambda: f64, row: &SweepRow) -> String {
    match &row.outcome {
        SweepOutcome::Stable { stats, metrics } => format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},ok\n",
            lambda,
            row.payload,
            stats.edge_probability,
            stats.mean_batch,
            stats.mean_batch_sq,
            metrics.es,
            metrics.es2,
            metrics.load,
            metrics.ew1,
            metrics.ew2,
            metrics.ew,
            metrics.er
        ),
        SweepOutcome::Unstable {
            stats,
            es,
            es2,
            load,
        } => format!(
            "{},{},{},{},{},{},{},{},,,,,unstable\n",
            lambda,
            row.payload,
            stats.edge_probability,
            stats.mean_batch,
            stats.mean_batch_sq,
            es,
            es2,
            load
        ),
        SweepOutcome::TruncationFailed => {
            format!("{},{},,,,,,,,,,,truncation\n", lambda, row.payload)
        }
    }
}

fn cmd_sweep(args: SweepArgs) -> Result<(), Error> {
    let cfg = load_config(&args.config)?;
    let lambdas = lambda_set(&cfg, &args.lambda)?;
    let grid = resolve_grid(&cfg, &lambdas)?;
    let dist = cfg.distribution()?;
    let link = cfg.link_params()?;

    let mut csv = String::from("lambda,ell_d,pi_E,EX,EX2,ES,ES2,a,EW1,EW2,EW,ER,status\n");
    let mut rows_written = 0usize;
    for &lambda in &lambdas {
        let spec = SweepSpec {
            dist: dist.clone(),
            link,
            lambda,
            grid: grid.clone(),
            tol: cfg.tolerance,
        };
        for row in sweep::sweep(&spec)? {
            csv.push_str(&sweep_csv_row(lambda, &row));
            rows_written += 1;
        }
    }
    match &args.csv {
        Some(path) => {
            write_text(path, &csv)?;
            println!(
                "wrote {} rows ({} payload sizes x {} arrival rates) to {}",
                rows_written,
                grid.len(),
                lambdas.len(),
                path.display()
            );
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn ci_flag(analytic: f64, estimate: sim::Estimate) -> &'static str {
    if (analytic - estimate.value).abs() <= estimate.half_width {
        "closed form within CI"
    } else {
        "closed form OUTSIDE CI"
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), Error> {
    let cfg = load_config(&args.config)?;
    let Some(mut sim_cfg) = cfg.sim else {
        return Err(Error::InvalidParameter(
            "this command needs a [sim] section in the configuration".into(),
        ));
    };
    if let Some(seed) = args.seed {
        sim_cfg.base_seed = seed;
    }
    let scenario = cfg.scenario(args.lambda)?;
    let metrics = queue::response_time(&scenario, cfg.tolerance)?;
    let result = sim::run(&scenario, &sim_cfg, cfg.tolerance)?;

    println!("{}", scenario_line(&cfg, scenario.lambda, scenario.payload));
    println!(
        "simulated {} messages ({} replications x {}, seed {}, {}% confidence)",
        result.messages_simulated,
        sim_cfg.replications,
        sim_cfg.measured_messages,
        sim_cfg.base_seed,
        sim_cfg.confidence_level * 100.0
    );
    let row = |name: &str, est: sim::Estimate, analytic: Option<f64>| match analytic {
        Some(value) => println!(
            "{name} = {} +/- {} s  | closed form {} ({})",
            est.value,
            est.half_width,
            value,
            ci_flag(value, est)
        ),
        None => println!("{name} = {} +/- {} s", est.value, est.half_width),
    };
    row("W1        ", result.mean_w1, Some(metrics.ew1));
    row("W2        ", result.mean_w2, Some(metrics.ew2));
    row("R composed", result.mean_r_composed, Some(metrics.er));
    row("R packet  ", result.mean_r_packet, None);
    println!(
        "utilization = {}  | offered load a = {}",
        result.utilization, metrics.load
    );
    let outside = [
        (metrics.ew1, result.mean_w1),
        (metrics.ew2, result.mean_w2),
        (metrics.er, result.mean_r_composed),
    ]
    .iter()
    .filter(|(analytic, est)| (analytic - est.value).abs() > est.half_width)
    .count();
    if outside > 0 {
        println!("warning: {outside} closed-form value(s) fall outside their confidence intervals");
    }

    if let Some(path) = &args.csv {
        let mut text = String::from(
            "mean_W1,hw_W1,mean_W2,hw_W2,mean_R_composed,hw_R_composed,\
             mean_R_packet,hw_R_packet,utilization,messages\n",
        );
        writeln!(
            text,
            "{},{},{},{},{},{},{},{},{},{}",
            result.mean_w1.value,
            result.mean_w1.half_width,
            result.mean_w2.value,
            result.mean_w2.half_width,
            result.mean_r_composed.value,
            result.mean_r_composed.half_width,
            result.mean_r_packet.value,
            result.mean_r_packet.half_width,
            result.utilization,
            result.messages_simulated
        )
        .expect("writing to String cannot fail");
        write_text(path, &text)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_optimize(args: OptimizeArgs) -> Result<(), Error> {
    let cfg = load_config(&args.config)?;
    let lambdas = lambda_set(&cfg, args.lambda.as_slice())?;
    let lambda = lambdas[0];
    let grid = resolve_grid(&cfg, &lambdas)?;
    println!(
        "coarse grid: {} payload sizes in [{}, {}] bytes, lambda = {} msg/s",
        grid.len(),
        grid.first().copied().unwrap_or(f64::NAN),
        grid.last().copied().unwrap_or(f64::NAN),
        lambda
    );
    let spec = SweepSpec {
        dist: cfg.distribution()?,
        link: cfg.link_params()?,
        lambda,
        grid,
        tol: cfg.tolerance,
    };
    let (best_payload, best_er, trace) = sweep::minimize_payload_traced(&spec, args.refine)?;
    for step in &trace {
        println!(
            "round {}: bracket [{}, {}] bytes -> best {} bytes, ER = {} s",
            step.round, step.low, step.high, step.best_payload, step.best_er
        );
    }
    println!("best payload ell_d* = {best_payload} bytes");
    println!("mean response time ER* = {best_er} s");

    if let Some(path) = &args.csv {
        let mut text = String::from("round,low,high,best_payload,best_er\n");
        for step in &trace {
            writeln!(
                text,
                "{},{},{},{},{}",
                step.round, step.low, step.high, step.best_payload, step.best_er
            )
            .expect("writing to String cannot fail");
        }
        write_text(path, &text)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
