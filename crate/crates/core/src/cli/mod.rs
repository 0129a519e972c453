//! The `kvar` command-line tool.
//!
//! Exit codes: 0 success, 2 usage or parameter error, 3 I/O error.
//! `KVAR_THREADS` is the fallback for `--threads`.

mod config;
mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use log::info;
use serde::Serialize;

use crate::analytic::{
    clustered_bound, kvar_exponential, kvar_taylor_approx, kvar_two_point, kvar_uniform, varinf_integral,
    varinf_tukey, varinf_unit_square, varinf_weibull, Limit,
};
use crate::error::{KvarError, Result};
use crate::experiments::{
    fit_loglog_slope, gmm_sweep, lowdim_sweep, spec_sweep, sphere_curves, Sweep, DEFAULT_K_MIN,
};
use crate::kvariance::{estimate_kvar, EstimatorOptions};
use crate::measures::{load_dataset, quantile1d, MeasureSpec};

pub use config::{parse_config, parse_kgrid};
pub use output::{real, RunManifest};

#[derive(Parser, Debug, Serialize)]
#[command(name = "kvar", version, about = "k-variance of probability measures")]
pub struct Cli {
    /// Worker threads (falls back to KVAR_THREADS); never changes results.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// File of `key = value` lines supplying defaults for any flag.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
pub enum Command {
    /// Monte-Carlo estimate of the k-variance of a named law or a dataset.
    Estimate(EstimateArgs),
    /// Print a closed-form value.
    ClosedForm {
        #[command(subcommand)]
        formula: Formula,
    },
    /// Estimate over a grid of k and write one CSV per curve.
    Sweep {
        #[command(subcommand)]
        kind: SweepKind,
    },
    /// Rerun the command recorded in a manifest.
    Replay(ReplayArgs),
}

/// A named law and its parameters.
#[derive(Args, Debug, Clone, Serialize)]
pub struct FamilyArgs {
    /// uniform01, uniform-cube, exponential, weibull, tukey-lambda, logistic,
    /// gaussian, gmm, low-rank-gaussian, sphere or two-point.
    #[arg(long)]
    pub family: Option<String>,
    /// Ambient dimension.
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub rate: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub shape: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    /// Mixture separation, |x| < 1.
    #[arg(long, allow_negative_numbers = true)]
    pub x: Option<f64>,
    /// Intrinsic dimension.
    #[arg(long)]
    pub dprime: Option<usize>,
    /// Gaussian mean, comma separated (default 0).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub mean: Vec<f64>,
    /// Gaussian per-coordinate variance, comma separated (default 1).
    #[arg(long, value_delimiter = ',')]
    pub variance: Vec<f64>,
}

impl FamilyArgs {
    pub fn spec(&self) -> Result<MeasureSpec> {
        let name = self
            .family
            .as_deref()
            .ok_or_else(|| KvarError::param("family", "a family (or a dataset) is required"))?;
        let need_f = |v: Option<f64>, arg: &'static str| {
            v.ok_or_else(|| KvarError::param(arg, format!("required by family {name}")))
        };
        let need_dprime = || {
            self.dprime
                .ok_or_else(|| KvarError::param("dprime", format!("required by family {name}")))
        };
        let dim = self.dim;
        Ok(match name {
            "uniform01" | "uniform" => MeasureSpec::Uniform01,
            "uniform-cube" => MeasureSpec::UniformCube { dim },
            "exponential" => MeasureSpec::Exponential { rate: self.rate },
            "weibull" => MeasureSpec::Weibull { shape: need_f(self.shape, "shape")? },
            "tukey-lambda" | "tukey" => MeasureSpec::TukeyLambda { lambda: need_f(self.lambda, "lambda")? },
            "logistic" => MeasureSpec::Logistic,
            "gaussian" => {
                let mean = if self.mean.is_empty() { vec![0.0; dim] } else { self.mean.clone() };
                let variance = if self.variance.is_empty() { vec![1.0; mean.len()] } else { self.variance.clone() };
                MeasureSpec::Gaussian { mean, variance }
            }
            "gmm" => MeasureSpec::GaussianMixture { x: need_f(self.x, "x")?, dim },
            "low-rank-gaussian" | "lowdim" => MeasureSpec::LowRankGaussian { intrinsic: need_dprime()?, ambient: dim },
            "sphere" => MeasureSpec::SphereUniform { intrinsic: need_dprime()?, ambient: dim },
            "two-point" => MeasureSpec::TwoPoint { dim },
            other => return Err(KvarError::UnsupportedFamily(other.to_string())),
        })
    }
}

#[derive(Args, Debug, Serialize)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    /// CSV of points, one per row; sampled with replacement.
    #[arg(long, conflicts_with = "family")]
    pub dataset: Option<PathBuf>,
    #[arg(long)]
    pub k: usize,
    /// Number of independent trials.
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Support radius R; adds the concentration radius column.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Write the CSV here (plus a manifest) instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Serialize)]
pub enum Formula {
    /// k/(6(k+1)) for Unif[0,1].
    Uniform {
        #[arg(long)]
        k: u64,
    },
    /// H_k / rate² for Exp(rate).
    Exponential {
        #[arg(long)]
        k: u64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        rate: f64,
    },
    /// Limit for the Weibull law of shape alpha.
    WeibullInf {
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
    },
    /// Limit 2/((λ+1)(λ+2)) for Tukey's lambda law.
    TukeyInf {
        #[arg(long, allow_negative_numbers = true)]
        lambda: f64,
    },
    /// Two atoms at distance 1 in dimension d.
    TwoPoint {
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        d: usize,
    },
    /// Limit for the uniform law on the unit square.
    UnitSquareInf,
    /// Numerical ∫ u(1−u) [(F⁻¹)′(u)]² du for a one-dimensional family.
    IntegralLimit {
        #[command(flatten)]
        family: FamilyArgs,
        /// Level-0 quadrature nodes (at least 64).
        #[arg(long, default_value_t = 64)]
        nodes: usize,
    },
    /// Quantile-density approximation of the k-variance of a 1-D family.
    Taylor {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        k: usize,
    },
    /// 168 √m / k^{1/2−2/d} for m-cluster laws, d > 4.
    Clustered {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        d: usize,
    },
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SweepArgs {
    /// a:b:x2 (doubling), a:b:+s (step s) or a comma list.
    #[arg(long, value_parser = parse_grid_arg)]
    pub kgrid: KGrid,
    /// Trials per grid point.
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Fit log-log slopes and print them.
    #[arg(long)]
    pub fit: bool,
    /// Smallest k used by the fit.
    #[arg(long, default_value_t = DEFAULT_K_MIN)]
    pub kmin: usize,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

/// Parsed `--kgrid`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KGrid(pub Vec<usize>);

fn parse_grid_arg(s: &str) -> std::result::Result<KGrid, String> {
    parse_kgrid(s).map(KGrid)
}

#[derive(Subcommand, Debug, Serialize)]
pub enum SweepKind {
    /// Two-component Gaussian mixtures, one curve per x.
    Gmm {
        #[arg(long)]
        d: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<f64>,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Low-rank Gaussians, one curve per intrinsic dimension.
    Lowdim {
        #[arg(long, value_delimiter = ',', required = true)]
        dprime: Vec<usize>,
        #[arg(long)]
        d: usize,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Uniform spheres S^{d′−1}, one curve per d′.
    Sphere {
        #[arg(long, value_delimiter = ',', required = true)]
        dprime: Vec<usize>,
        #[arg(long)]
        d: usize,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Bootstrap curve of a CSV dataset.
    Dataset {
        #[arg(long)]
        path: PathBuf,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Curve of a named law.
    Family {
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        sweep: SweepArgs,
    },
}

#[derive(Args, Debug, Serialize)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    /// Replacement output file for a replayed `estimate`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Replacement output directory for a replayed `sweep`.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

fn command() -> clap::Command {
    fn override_self(cmd: clap::Command) -> clap::Command {
        cmd.args_override_self(true).mut_subcommands(override_self)
    }
    override_self(Cli::command())
}

/// Runs the tool on `argv` (including the program name) and returns the exit
/// code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    match run_inner(&argv) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("kvar: {e}");
            if e.is_io() {
                3
            } else {
                2
            }
        }
    }
}

fn run_inner(argv: &[OsString]) -> Result<i32> {
    let argv = config::expand(argv)?;
    let matches = match command().try_get_matches_from(&argv) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return Ok(e.exit_code());
        }
    };
    let cli = Cli::from_arg_matches(&matches).map_err(|e| KvarError::param("arguments", e.to_string()))?;
    let threads = match cli.threads {
        Some(t) => Some(t),
        None => match std::env::var("KVAR_THREADS") {
            Ok(v) if !v.trim().is_empty() => Some(
                v.trim()
                    .parse::<usize>()
                    .map_err(|_| KvarError::param("KVAR_THREADS", format!("not a thread count: {v:?}")))?,
            ),
            _ => None,
        },
    };
    let ctx = RunContext {
        argv: argv.iter().map(|a| a.to_string_lossy().into_owned()).collect(),
        started: SystemTime::now(),
    };
    let go = || dispatch(&cli, &ctx);
    match threads {
        None => go()?,
        Some(0) => return Err(KvarError::param("threads", "must be at least 1")),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| KvarError::param("threads", e.to_string()))?
            .install(go)?,
    }
    Ok(0)
}

struct RunContext {
    argv: Vec<String>,
    started: SystemTime,
}

impl RunContext {
    fn manifest(&self, command: &str, params: &impl Serialize, seed: Option<u64>, outputs: Vec<PathBuf>) -> RunManifest {
        RunManifest {
            tool: "kvar".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            argv: self.argv.clone(),
            params: serde_json::to_value(params).expect("arguments serialize"),
            master_seed: seed,
            started_unix_seconds: self
                .started
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs_f64())
                .unwrap_or(0.0),
            outputs,
        }
    }
}

fn dispatch(cli: &Cli, ctx: &RunContext) -> Result<()> {
    match &cli.command {
        Command::Estimate(args) => cmd_estimate(args, ctx),
        Command::ClosedForm { formula } => cmd_closed_form(formula),
        Command::Sweep { kind } => cmd_sweep(kind, ctx),
        Command::Replay(args) => cmd_replay(args),
    }
}

fn stdout(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| KvarError::io("<stdout>", e))
}

fn cmd_estimate(args: &EstimateArgs, ctx: &RunContext) -> Result<()> {
    let spec = match &args.dataset {
        Some(path) => MeasureSpec::Dataset(Arc::new(load_dataset(path)?)),
        None => args.family.spec()?,
    };
    let opts = EstimatorOptions { threads: None, radius: args.radius };
    let est = estimate_kvar(&spec, args.k, args.n, args.seed, &opts)?;
    let csv = output::estimate_csv(&est)?;
    match &args.out {
        None => stdout(&csv),
        Some(path) => {
            output::write_file(path, &csv)?;
            let manifest_path = estimate_manifest_path(path);
            ctx.manifest("estimate", args, Some(args.seed), vec![path.clone()])
                .write(&manifest_path)?;
            info!("wrote {} and {}", path.display(), manifest_path.display());
            Ok(())
        }
    }
}

fn limit_text(v: Limit) -> String {
    match v {
        Limit::Finite(x) => format!("{x:?}"),
        Limit::Infinite => "infinite".into(),
    }
}

fn cmd_closed_form(formula: &Formula) -> Result<()> {
    let text = match formula {
        Formula::Uniform { k } => format!("{:?}", kvar_uniform(*k)?),
        Formula::Exponential { k, rate } => format!("{:?}", kvar_exponential(*k, *rate)?),
        Formula::WeibullInf { alpha } => limit_text(varinf_weibull(*alpha)?),
        Formula::TukeyInf { lambda } => {
            let t = varinf_tukey(*lambda)?;
            if !t.guaranteed {
                eprintln!("kvar: for lambda < 2 this value only bounds the upper limit");
            }
            format!("{:?}", t.value)
        }
        Formula::TwoPoint { k, d } => format!("{:?}", kvar_two_point(*k, *d)?),
        Formula::UnitSquareInf => format!("{:?}", varinf_unit_square()),
        Formula::IntegralLimit { family, nodes } => {
            limit_text(varinf_integral(&quantile1d(&family.spec()?)?, *nodes)?)
        }
        Formula::Taylor { family, k } => format!("{:?}", kvar_taylor_approx(&quantile1d(&family.spec()?)?, *k)?),
        Formula::Clustered { k, m, d } => format!("{:?}", clustered_bound(*k, *m, *d)?),
    };
    stdout(&(text + "\n"))
}

fn cmd_sweep(kind: &SweepKind, ctx: &RunContext) -> Result<()> {
    let (sweeps, args): (Vec<Sweep>, &SweepArgs) = match kind {
        SweepKind::Gmm { d, x, sweep } => (gmm_sweep(x, *d, &sweep.kgrid.0, sweep.n, sweep.seed)?, sweep),
        SweepKind::Lowdim { dprime, d, sweep } => {
            (lowdim_sweep(dprime, *d, &sweep.kgrid.0, sweep.n, sweep.seed)?, sweep)
        }
        SweepKind::Sphere { dprime, d, sweep } => {
            (sphere_curves(dprime, *d, &sweep.kgrid.0, sweep.n, sweep.seed)?, sweep)
        }
        SweepKind::Dataset { path, sweep } => {
            let handle = Arc::new(load_dataset(path)?);
            let label = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "dataset".into());
            let s = spec_sweep(MeasureSpec::Dataset(handle), &label, &sweep.kgrid.0, sweep.n, sweep.seed)?;
            (vec![s], sweep)
        }
        SweepKind::Family { family, sweep } => {
            let spec = family.spec()?;
            let label = spec.name().to_string();
            (vec![spec_sweep(spec, &label, &sweep.kgrid.0, sweep.n, sweep.seed)?], sweep)
        }
    };

    let dir = &args.out_dir;
    std::fs::create_dir_all(dir).map_err(|e| KvarError::io(dir, e))?;
    let mut outputs = Vec::new();
    for s in &sweeps {
        let path = dir.join(format!("{}.csv", s.label));
        output::write_file(&path, &output::sweep_csv(s)?)?;
        outputs.push(path);
    }
    if args.fit {
        let fits = sweeps
            .iter()
            .map(|s| Ok((s.label.clone(), fit_loglog_slope(&s.records, args.kmin)?)))
            .collect::<Result<Vec<_>>>()?;
        let csv = output::fits_csv(&fits)?;
        let path = dir.join("fits.csv");
        output::write_file(&path, &csv)?;
        outputs.push(path);
        stdout(&csv)?;
    }
    let manifest_path = dir.join("manifest.json");
    ctx.manifest("sweep", kind, Some(args.seed), outputs.clone())
        .write(&manifest_path)?;
    for p in outputs.iter().chain([&manifest_path]) {
        info!("wrote {}", p.display());
    }
    Ok(())
}

fn cmd_replay(args: &ReplayArgs) -> Result<()> {
    let manifest = RunManifest::read(&args.manifest)?;
    if manifest.argv.get(1).is_some_and(|c| c == "replay") {
        return Err(KvarError::param("manifest", "cannot replay a replay"));
    }
    let mut argv = manifest.argv.clone();
    if let Some(out) = &args.out {
        argv.push(format!("--out={}", out.display()));
    }
    if let Some(dir) = &args.out_dir {
        argv.push(format!("--out-dir={}", dir.display()));
    }
    let argv: Vec<OsString> = argv.into_iter().map(OsString::from).collect();
    let matches = command()
        .try_get_matches_from(&argv)
        .map_err(|e| KvarError::param("manifest", e.to_string()))?;
    let cli = Cli::from_arg_matches(&matches).map_err(|e| KvarError::param("manifest", e.to_string()))?;
    let ctx = RunContext {
        argv: argv.iter().map(|a| a.to_string_lossy().into_owned()).collect(),
        started: SystemTime::now(),
    };
    dispatch(&cli, &ctx)
}

/// Path of the manifest written next to an `estimate --out` file.
pub fn estimate_manifest_path(out: &Path) -> PathBuf {
    out.with_extension("manifest.json")
}
