//! `curveflow`: run, sweep, and check generalized curve shortening flows.
//!
//! Exit codes: 0 success, 1 a monitor (or containment, or hypothesis check)
//! failed, 2 usage or configuration error, 3 runtime failure.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use curveflow::diagnostics::{self, MonitorReport};
use curveflow::flow::{self, ContainmentConfig, FlowScheme, SnapshotCadence, StopReason};
use curveflow::io::{self, CurveDescriptor, RunEcho, RunSummary};
use curveflow::{AngleGrid, DiffScheme, FlowError, IoError, SpeedLaw};

#[derive(Parser)]
#[command(name = "curveflow", version, about = "Generalized curve shortening flow v = G(k)k for convex curves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one flow and write series.csv, snap_<i>.csv and summary.json.
    Run(RunArgs),
    /// Co-evolve an outer and an inner curve and track their support gap.
    Containment(ContainmentArgs),
    /// Run every combination of laws and resolutions in parallel.
    Sweep(SweepArgs),
    /// Probe a speed law against the flow hypotheses.
    CheckLaw(CheckLawArgs),
    /// Re-run the configuration echoed in a summary.json.
    Replay(ReplayArgs),
}

#[derive(Args, Clone)]
struct FlowArgs {
    /// Initial curve: circle:R, ellipse:a,b or fourier:m:amp,...
    #[arg(long, default_value = "circle:1")]
    curve: String,
    /// Evolved representation: curvature, support or both.
    #[arg(long, default_value = "curvature")]
    scheme: FlowScheme,
    /// Derivative operator: fourier or central-fd4.
    #[arg(long, default_value = "fourier")]
    diff: DiffScheme,
    #[arg(long, default_value_t = 0.8)]
    c_cfl: f64,
    /// Stop when the area falls to this fraction of the initial area.
    #[arg(long, default_value_t = 1e-3)]
    area_floor: f64,
    /// Stop when k_max reaches this value (default 1e6·k_max(0)).
    #[arg(long)]
    k_cap: Option<f64>,
    #[arg(long, default_value_t = 100_000_000)]
    max_steps: u64,
    /// Snapshot every N accepted steps instead of by area ratio.
    #[arg(long, conflicts_with = "area_ratio")]
    every_steps: Option<u64>,
    /// Snapshot whenever the area drops by this factor.
    #[arg(long)]
    area_ratio: Option<f64>,
    /// Apply the 2/3-rule filter to the second-derivative term.
    #[arg(long)]
    dealias: bool,
    /// Run laws that fail the hypothesis probes; limits are then not asserted.
    #[arg(long)]
    allow_out_of_hypothesis: bool,
    /// Seed for the random phases of fourier curves.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl FlowArgs {
    fn echo(&self, law: &str, n: usize) -> RunEcho {
        let mut echo = RunEcho::new(law, &self.curve, n);
        echo.scheme = self.scheme;
        echo.diff = self.diff;
        echo.c_cfl = self.c_cfl;
        echo.area_floor = self.area_floor;
        echo.k_cap = self.k_cap;
        echo.max_steps = self.max_steps;
        echo.cadence = match (self.every_steps, self.area_ratio) {
            (Some(m), _) => SnapshotCadence::EverySteps(m),
            (None, Some(r)) => SnapshotCadence::AreaRatio(r),
            (None, None) => SnapshotCadence::default(),
        };
        echo.dealias = self.dealias;
        echo.allow_out_of_hypothesis = self.allow_out_of_hypothesis;
        echo.seed = self.seed;
        echo
    }
}

#[derive(Args)]
struct RunArgs {
    /// Speed law, e.g. power:1 or power:1/3.
    #[arg(long)]
    law: String,
    /// Grid size (power of two, at least 32).
    #[arg(long, default_value_t = 256)]
    n: usize,
    #[command(flatten)]
    flow: FlowArgs,
    /// Output directory.
    #[arg(long, default_value = "curveflow-out")]
    out: PathBuf,
}

#[derive(Args)]
struct ContainmentArgs {
    /// Speed law, e.g. power:1.
    #[arg(long)]
    law: String,
    /// Curve descriptor of the enclosing curve.
    #[arg(long)]
    outer: String,
    /// Curve descriptor of the enclosed curve.
    #[arg(long)]
    inner: String,
    #[arg(long, default_value_t = 256)]
    n: usize,
    #[arg(long, default_value = "fourier")]
    diff: DiffScheme,
    #[arg(long, default_value_t = 0.8)]
    c_cfl: f64,
    #[arg(long, default_value_t = 1e-3)]
    area_floor: f64,
    #[arg(long, default_value_t = 100_000_000)]
    max_steps: u64,
    #[arg(long, conflicts_with = "area_ratio")]
    every_steps: Option<u64>,
    #[arg(long)]
    area_ratio: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for containment.csv.
    #[arg(long, default_value = "curveflow-out")]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// Speed law; repeat for several.
    #[arg(long = "law", required = true)]
    laws: Vec<String>,
    /// Grid size; repeat for several.
    #[arg(long = "n", default_values_t = [256])]
    ns: Vec<usize>,
    #[command(flatten)]
    flow: FlowArgs,
    /// Parent directory; each run writes into its own subdirectory.
    #[arg(long, default_value = "curveflow-sweep")]
    out: PathBuf,
}

#[derive(Args)]
struct CheckLawArgs {
    /// Speed law, e.g. power:2.
    #[arg(long)]
    law: String,
    /// Probe interval lo,hi.
    #[arg(long, default_value = "0.01,1e4")]
    range: String,
    #[arg(long, default_value_t = 256)]
    probes: usize,
}

#[derive(Args)]
struct ReplayArgs {
    /// A summary.json written by an earlier run.
    summary: PathBuf,
    #[arg(long, default_value = "curveflow-replay")]
    out: PathBuf,
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    fn runtime(message: impl Into<String>) -> Self {
        Self { code: 3, message: message.into() }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Format(_) | IoError::Law(_) | IoError::Geometry(_) | IoError::Oracle(_) => Failure::usage(e.to_string()),
            other => Failure::runtime(other.to_string()),
        }
    }
}

impl From<FlowError> for Failure {
    fn from(e: FlowError) -> Self {
        match e {
            FlowError::Config(_) => Failure::usage(e.to_string()),
            other => Failure::runtime(other.to_string()),
        }
    }
}

/// Outcome of one completed run.
struct RunOutcome {
    label: String,
    stop_reason: StopReason,
    monitors: Vec<MonitorReport>,
}

impl RunOutcome {
    fn code(&self) -> u8 {
        if self.stop_reason == StopReason::ConvexityLoss {
            3
        } else if diagnostics::any_failed(&self.monitors) {
            1
        } else {
            0
        }
    }
}

fn execute(echo: &RunEcho, out: &Path) -> Result<RunOutcome, Failure> {
    let config = echo.flow_config()?;
    let traj = flow::run(&config)?;
    let monitors = diagnostics::run_all(&traj, &config.law);
    let summary = RunSummary::new(echo.clone(), &traj, monitors.clone());
    io::emit_timeseries(out, &traj, &summary)?;

    let last = traj.last().expect("a run records at least the initial snapshot");
    let mut err = std::io::stderr().lock();
    let _ = writeln!(
        err,
        "{} {}: stop {} at t = {:e} after {} steps ({} rejected), A/A0 = {:.3e}",
        echo.law,
        echo.curve,
        traj.stop_reason,
        last.t(),
        traj.steps.accepted,
        traj.steps.rejected,
        last.summary.area / traj.initial_area
    );
    if let Some(om) = &traj.omega {
        let _ = writeln!(err, "blow-up time in [{:?}, {:?}]", om.omega_lo, om.omega_hi);
    }
    if traj.out_of_hypothesis {
        let _ = writeln!(err, "law is outside the flow hypotheses; asymptotic monitors are not asserted");
    }
    Ok(RunOutcome { label: format!("{} n={}", echo.law, echo.n), stop_reason: traj.stop_reason, monitors })
}

fn report(outcome: &RunOutcome) {
    let mut stdout = std::io::stdout().lock();
    let _ = writeln!(stdout, "{}", outcome.label);
    let _ = write!(stdout, "{}", diagnostics::format_table(&outcome.monitors));
}

fn cmd_run(args: RunArgs) -> Result<u8, Failure> {
    let outcome = execute(&args.flow.echo(&args.law, args.n), &args.out)?;
    report(&outcome);
    Ok(outcome.code())
}

fn cmd_replay(args: ReplayArgs) -> Result<u8, Failure> {
    let text = fs::read_to_string(&args.summary)
        .map_err(|e| Failure::runtime(format!("cannot read {}: {e}", args.summary.display())))?;
    let summary = io::parse_summary(&text).map_err(|e| Failure::usage(e.to_string()))?;
    let outcome = execute(&summary.config, &args.out)?;
    report(&outcome);
    Ok(outcome.code())
}

fn sanitize(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' }).collect()
}

fn cmd_sweep(args: SweepArgs) -> Result<u8, Failure> {
    let jobs: Vec<(RunEcho, PathBuf)> = args
        .laws
        .iter()
        .flat_map(|law| args.ns.iter().map(move |&n| (law, n)))
        .map(|(law, n)| (args.flow.echo(law, n), args.out.join(format!("{}_n{n}", sanitize(law)))))
        .collect();
    let results: Vec<Result<RunOutcome, Failure>> = jobs.par_iter().map(|(echo, dir)| execute(echo, dir)).collect();
    let mut code = 0;
    for ((echo, _), result) in jobs.iter().zip(results) {
        match result {
            Ok(outcome) => {
                report(&outcome);
                code = code.max(outcome.code());
            }
            Err(f) => {
                eprintln!("{} n={}: {}", echo.law, echo.n, f.message);
                code = code.max(f.code);
            }
        }
    }
    Ok(code)
}

fn parse_range(s: &str) -> Result<(f64, f64), Failure> {
    let (lo, hi) = s.split_once(',').ok_or_else(|| Failure::usage(format!("range must be lo,hi, got '{s}'")))?;
    let parse = |v: &str| v.trim().parse::<f64>().map_err(|_| Failure::usage(format!("bad range bound '{v}'")));
    Ok((parse(lo)?, parse(hi)?))
}

fn cmd_check_law(args: CheckLawArgs) -> Result<u8, Failure> {
    let law = SpeedLaw::parse(&args.law).map_err(|e| Failure::usage(e.to_string()))?;
    let (lo, hi) = parse_range(&args.range)?;
    let rep = law.check_hypotheses(lo, hi, args.probes).map_err(|e| Failure::usage(e.to_string()))?;
    println!("{rep}");
    Ok(if rep.all_ok() { 0 } else { 1 })
}

fn cmd_containment(args: ContainmentArgs) -> Result<u8, Failure> {
    let law = SpeedLaw::parse(&args.law).map_err(|e| Failure::usage(e.to_string()))?;
    let grid = AngleGrid::new(args.n).map_err(|e| Failure::usage(e.to_string()))?;
    let support = |descriptor: &str| -> Result<curveflow::SupportProfile, Failure> {
        let initial = descriptor.parse::<CurveDescriptor>()?.build(grid, args.seed)?;
        Ok(initial.both().map_err(|e| Failure::usage(e.to_string()))?.1)
    };
    let (outer, inner) = (support(&args.outer)?, support(&args.inner)?);
    let config = ContainmentConfig {
        diff: args.diff,
        c_cfl: args.c_cfl,
        area_floor: args.area_floor,
        max_steps: args.max_steps,
        cadence: match (args.every_steps, args.area_ratio) {
            (Some(m), _) => SnapshotCadence::EverySteps(m),
            (None, Some(r)) => SnapshotCadence::AreaRatio(r),
            (None, None) => SnapshotCadence::default(),
        },
    };
    let rep = flow::containment_run(&outer, &inner, &law, &config)?;

    fs::create_dir_all(&args.out).map_err(|e| Failure::runtime(e.to_string()))?;
    let mut csv = String::from("t,min_gap,contained\n");
    for s in &rep.samples {
        csv.push_str(&format!("{:?},{:?},{}\n", s.t, s.min_gap, s.contained));
    }
    fs::write(args.out.join("containment.csv"), csv).map_err(|e| Failure::runtime(e.to_string()))?;

    let worst = rep.samples.iter().map(|s| s.min_gap).fold(f64::INFINITY, f64::min);
    eprintln!(
        "stop {} at t = {:e} ({} samples, {} curve first)",
        rep.stop_reason,
        rep.samples.last().map_or(0.0, |s| s.t),
        rep.samples.len(),
        if rep.inner_stopped_first { "inner" } else { "outer" }
    );
    println!("containment {}: min gap {worst:e}, tolerance {:e}", if rep.holds() { "holds" } else { "VIOLATED" }, rep.tolerance);
    Ok(if rep.stop_reason == StopReason::ConvexityLoss {
        3
    } else if rep.holds() {
        0
    } else {
        1
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Containment(a) => cmd_containment(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::CheckLaw(a) => cmd_check_law(a),
        Command::Replay(a) => cmd_replay(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
