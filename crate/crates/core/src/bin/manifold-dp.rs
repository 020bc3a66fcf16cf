//! Command-line front end.
//!
//! Exit codes: 0 success, 1 validation failure, 2 configuration error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use manifold_dp::calibration::{
    bm_epsilon, bm_time_for_budget, ewg_rate, langevin_epsilon, langevin_time_for_budget, rdp_to_dp_budget, rl_rate,
    RdpBudget,
};
use manifold_dp::frechet::{sensitivity_bound, Dataset, Regime, SensitivityContext};
use manifold_dp::harness::{run_experiment, validate, write_outputs, ExperimentConfig, Scenario, Settings, Suite};
use manifold_dp::manifold::{uniform_ball_sample, uniform_ball_samples, ManifoldSpec, Point};
use manifold_dp::mechanisms::Mechanism;
use manifold_dp::parallel::Parallelism;
use manifold_dp::release::{private_pmean, ReleaseMechanism, ReleaseRequest};
use manifold_dp::rng::{derive_seed, RngState};
use manifold_dp::{Error, Result};

#[derive(Parser)]
#[command(name = "manifold-dp", version, about = "Rényi-DP release of manifold-valued means via diffusions")]
struct Cli {
    /// Worker threads (0 = all cores, 1 = sequential).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Privately release the p-mean of a dataset.
    Release(ReleaseArgs),
    /// Diffusion time or noise rate for given budgets.
    Calibrate(CalibrateArgs),
    /// Sensitivity bound of the constrained p-mean.
    Sensitivity(SensitivityArgs),
    /// Run the mechanism comparison grid and write CSV tables.
    Experiment(ExperimentArgs),
    /// Run property suites and emit a JSON report.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct ReleaseArgs {
    #[arg(long, default_value = "sphere:2")]
    manifold: String,
    /// CSV of ambient coordinates, one point per row; omit to draw a
    /// uniform sample of size --n from the ball.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    eps: f64,
    #[arg(long, value_enum, default_value_t = DiffusionKind::Bm)]
    mechanism: DiffusionKind,
    #[arg(long, default_value_t = 1.1)]
    lambda: f64,
    #[arg(long, default_value = "center")]
    anchor: String,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long, default_value_t = manifold_dp::harness::config::DEFAULT_SEED)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum DiffusionKind {
    Bm,
    Langevin,
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long, default_value = "sphere:2")]
    manifold: String,
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    #[arg(long = "eps", required = true, value_delimiter = ',')]
    eps: Vec<f64>,
    #[arg(long)]
    delta: f64,
    #[arg(long, default_value = "bm")]
    mechanism: String,
    #[arg(long, default_value_t = 1.1)]
    lambda: f64,
}

#[derive(Args)]
struct SensitivityArgs {
    #[arg(long, default_value = "sphere:2")]
    manifold: String,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[arg(long)]
    r: f64,
    #[arg(long = "n", required = true, value_delimiter = ',')]
    n: Vec<usize>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Flat key=value file; command-line flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    manifold: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long = "eps", value_delimiter = ',')]
    eps: Vec<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long = "n", value_delimiter = ',')]
    n: Vec<usize>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    anchor: Option<String>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    mechanisms: Vec<String>,
    #[arg(long)]
    resample_dataset: Option<bool>,
    #[arg(long, default_value = "results")]
    out: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    /// Suites to run (default: all).
    #[arg(long = "suite", value_delimiter = ',')]
    suites: Vec<String>,
    #[arg(long, default_value_t = manifold_dp::harness::config::DEFAULT_SEED)]
    seed: u64,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parallelism(threads: usize) -> Parallelism {
    match threads {
        0 => Parallelism::Parallel,
        1 => Parallelism::Sequential,
        n => Parallelism::Threads(n),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let par = parallelism(cli.threads);
    let outcome = match cli.command {
        Command::Release(a) => release(a),
        Command::Calibrate(a) => calibrate(a),
        Command::Sensitivity(a) => sensitivity(a),
        Command::Experiment(a) => experiment(a, par),
        Command::Validate(a) => return run_validate(a, par),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn default_radius(spec: &ManifoldSpec) -> f64 {
    ExperimentConfig::for_manifold(*spec).r
}

fn read_points(path: &Path, spec: ManifoldSpec) -> Result<Vec<Point>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|source| Error::Csv { path: path.into(), source })?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|source| Error::Csv { path: path.into(), source })?;
        let coords = rec
            .iter()
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::Config(format!("{}: non-numeric coordinate", path.display())))?;
        out.push(Point::projected(spec, coords)?);
    }
    Ok(out)
}

fn release(a: ReleaseArgs) -> Result<()> {
    let spec: ManifoldSpec = a.manifold.parse()?;
    let o = spec.origin();
    let r = a.r.unwrap_or_else(|| default_radius(&spec));
    let points = match &a.data {
        Some(path) => read_points(path, spec)?,
        None => uniform_ball_samples(&o, r, a.n, &mut RngState::new(derive_seed(a.seed, 1, 0), 0).rng())?,
    };
    let data = Dataset::new(points, o.clone(), r)?;
    let mechanism = match a.mechanism {
        DiffusionKind::Bm => ReleaseMechanism::Bm,
        DiffusionKind::Langevin => {
            let (anchor, provenance) = match a.anchor.parse::<Scenario>()? {
                Scenario::AnchorAtCenter => (o.clone(), "ball centre".to_string()),
                Scenario::AnchorRandomInBall => {
                    let s = derive_seed(a.seed, 2, 0);
                    (uniform_ball_sample(&o, r, &mut RngState::new(s, 0).rng())?, format!("uniform in ball, seed {s}"))
                }
            };
            ReleaseMechanism::Langevin { lambda: a.lambda, anchor, provenance }
        }
    };
    let mut req = ReleaseRequest::new(data, a.p, RdpBudget::new(a.alpha, a.eps)?, mechanism);
    req.n_step = a.steps;
    let rec = private_pmean(&req, RngState::new(a.seed, 0))?;
    println!("{}", serde_json::to_string_pretty(&rec).expect("record serializes"));
    Ok(())
}

fn calibrate(a: CalibrateArgs) -> Result<()> {
    let spec: ManifoldSpec = a.manifold.parse()?;
    let k = spec.ric_lower_k();
    let mech = Mechanism::parse(&a.mechanism)?;
    println!("mechanism,epsilon,parameter,value,check");
    for &eps in &a.eps {
        let budget = RdpBudget::new(a.alpha, eps)?;
        let (name, value, check) = match mech {
            Mechanism::Bm => {
                let t = bm_time_for_budget(k, &budget, a.delta)?;
                ("t", t, bm_epsilon(k, a.alpha, a.delta, t))
            }
            Mechanism::Langevin => {
                let t = langevin_time_for_budget(k, a.lambda, &budget, a.delta)?;
                ("t", t, langevin_epsilon(k, a.lambda, a.alpha, a.delta, t)?)
            }
            Mechanism::Rl => {
                let star = rdp_to_dp_budget(&budget);
                ("sigma", rl_rate(a.delta, star, true), star)
            }
            Mechanism::Ewg => ("sigma", ewg_rate(a.delta, &budget), f64::NAN),
        };
        println!("{},{eps},{name},{value:.16e},{check:.16e}", mech.label());
    }
    Ok(())
}

fn sensitivity(a: SensitivityArgs) -> Result<()> {
    let spec: ManifoldSpec = a.manifold.parse()?;
    println!("n,regime,delta");
    for &n in &a.n {
        let ctx = SensitivityContext::for_spec(&spec, a.p, a.r, n)?;
        let regime = match ctx.regime {
            Regime::GeneralSmallBall => "general-small-ball",
            Regime::Hadamard => "hadamard",
            Regime::CompactPositive => "compact-positive",
        };
        println!("{n},{regime},{:.16e}", sensitivity_bound(&ctx)?);
    }
    Ok(())
}

fn experiment(a: ExperimentArgs, par: Parallelism) -> Result<()> {
    let mut s = match &a.config {
        Some(path) => Settings::from_file(path)?,
        None => Settings::default(),
    };
    let one = |v: Option<String>| v.into_iter().collect::<Vec<_>>();
    s.set("manifold", one(a.manifold));
    s.set("alpha", one(a.alpha.map(|v| v.to_string())));
    s.set("eps", a.eps.iter().map(f64::to_string));
    s.set("p", one(a.p.map(|v| v.to_string())));
    s.set("n", a.n.iter().map(usize::to_string));
    s.set("r", one(a.r.map(|v| v.to_string())));
    s.set("lambda", one(a.lambda.map(|v| v.to_string())));
    s.set("anchor", one(a.anchor));
    s.set("steps", one(a.steps.map(|v| v.to_string())));
    s.set("trials", one(a.trials.map(|v| v.to_string())));
    s.set("seed", one(a.seed.map(|v| v.to_string())));
    s.set("mechanisms", a.mechanisms);
    s.set("resample-dataset", one(a.resample_dataset.map(|v| v.to_string())));
    let out_dir = s.last("out").map(PathBuf::from).filter(|_| a.out == Path::new("results")).unwrap_or(a.out);
    let cfg = ExperimentConfig::from_settings(&s)?;
    let out = run_experiment(&cfg, par)?;
    for path in write_outputs(&out, &out_dir)? {
        println!("wrote {}", path.display());
    }
    let errors = out.aggregates.iter().filter(|a| a.is_error()).count();
    if errors > 0 {
        eprintln!("{errors} cell(s) aborted; see error rows in aggregates.csv");
    }
    Ok(())
}

fn run_validate(a: ValidateArgs, par: Parallelism) -> ExitCode {
    let suites: Vec<Suite> = if a.suites.is_empty() {
        Suite::ALL.to_vec()
    } else {
        match a.suites.iter().map(|s| s.parse()).collect::<Result<_>>() {
            Ok(s) => s,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        }
    };
    let reports: Vec<_> = suites.into_iter().map(|s| validate(s, a.seed, par)).collect();
    let json = serde_json::to_string_pretty(&reports).expect("report serializes");
    match &a.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &json) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => println!("{json}"),
    }
    for r in &reports {
        eprintln!("{}: {}", r.suite, if r.passed { "pass" } else { "FAIL" });
    }
    if reports.iter().all(|r| r.passed) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
