//! CSV-emitting front end: every figure-style sweep of the library as a
//! deterministic subcommand. Output bytes are identical across runs and
//! thread counts; floats carry nine significant digits.

mod spec;

use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;

use cvghz::entanglement::tangle_of_state;
use cvghz::ghz::{ghz_covariance, GhzParams, PhotonOpSpec};
use cvghz::nonlocality::{lossy_operated_ghz, max_b3_over_r, maximize_b3, threshold_efficiency};
use cvghz::teleportation::{
    epr_sum, fidelity_state, optimal_gain, output_wigner, threshold_squeezing, GainMode,
    TeleportConfig,
};
use cvghz::{Error, GridRange};

use spec::{ComplexSpec, ConfigFile, PairSpec, RangeSpec, SchemeSpec, StepRangeSpec};

const DEFAULT_T_INTENSITY: f64 = 0.99;
const DEFAULT_S: f64 = 0.01;

#[derive(Parser)]
#[command(
    name = "cvghz",
    version,
    about = "Sweeps and checks for photon-operated three-mode CV GHZ states",
    after_help = "Every value flag can also come from a --config file with one\n\
                  key=value pair per line (command-line flags win). Sweep points\n\
                  whose conditioning has zero success probability are skipped."
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Closed-form GHZ covariance matrix as (i, j, value) triplets
    GhzCov(GhzCovArgs),
    /// Gaussian tangle vs squeezing
    Tangle(TangleArgs),
    /// Maximal Mermin-Klyshko value vs squeezing
    Mk(MkArgs),
    /// Maximal MK value vs detection efficiency (joint r, x maximization)
    MkNoise(MkNoiseArgs),
    /// Teleportation-network fidelity vs squeezing
    Fidelity(FidelityArgs),
    /// EPR correlation sum vs squeezing
    Epr(EprArgs),
    /// Teleported output Wigner function on a phase-space grid
    Contour(ContourArgs),
    /// Threshold squeezing (fidelity) or detection efficiency (mk-noise)
    Thresholds(ThresholdsArgs),
    /// Cross-representation equivalence suite; exits 0 iff every check passes
    OracleCheck(OracleArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Photon-operation scheme: `sub:A,C`, `add:B`, ... or `none`
    #[arg(long)]
    ops: Option<SchemeSpec>,
    /// Intensity transmittance of the subtraction tap beam splitter
    #[arg(long)]
    t: Option<f64>,
    /// Interaction strength of the addition amplifier
    #[arg(long)]
    s: Option<f64>,
    /// Write the CSV to this file instead of standard output
    #[arg(long)]
    out: Option<String>,
    /// Worker threads for the sweep (0 or absent: all cores)
    #[arg(long)]
    threads: Option<usize>,
    /// key=value file supplying defaults for this subcommand's flags
    #[arg(long)]
    config: Option<String>,
}

#[derive(Args)]
struct GhzCovArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// p-squeezing of the first input mode
    #[arg(long)]
    r1: Option<f64>,
    /// x-squeezing of the remaining input modes
    #[arg(long)]
    r2: Option<f64>,
    /// Number of modes
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Args)]
struct TangleArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Squeezing sweep `min:max:steps`
    #[arg(long)]
    r: Option<RangeSpec>,
}

#[derive(Args)]
struct MkArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Squeezing sweep `min:max:steps`
    #[arg(long)]
    r: Option<RangeSpec>,
    /// Detection efficiency applied to every mode
    #[arg(long)]
    eta: Option<f64>,
}

#[derive(Args)]
struct MkNoiseArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Detection-efficiency sweep `min:max:steps`
    #[arg(long)]
    eta: Option<RangeSpec>,
    /// Inner squeezing search range `min:max:steps`
    #[arg(long = "r-range")]
    r_range: Option<RangeSpec>,
}

#[derive(Args)]
struct FidelityArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Squeezing sweep `min:max:steps`
    #[arg(long)]
    r: Option<RangeSpec>,
    /// Feed-forward gain mode
    #[arg(long, value_enum)]
    gain: Option<GainArg>,
}

#[derive(Args)]
struct EprArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Squeezing sweep `min:max:steps`
    #[arg(long)]
    r: Option<RangeSpec>,
    /// Mode pair for the x-difference variance, e.g. `A,C`
    #[arg(long)]
    pair: Option<PairSpec>,
}

#[derive(Args)]
struct ContourArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Squeezing of the resource state
    #[arg(long)]
    r: Option<f64>,
    /// Coherent input amplitude, e.g. `1` or `2+3i`
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<ComplexSpec>,
    /// Feed-forward gain
    #[arg(long)]
    g: Option<f64>,
    /// Phase-space grid `min:max:step` for both axes
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<StepRangeSpec>,
}

#[derive(Args)]
struct ThresholdsArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Which threshold to compute
    #[arg(long, value_enum)]
    task: Option<TaskArg>,
    /// Gain mode for the fidelity task
    #[arg(long, value_enum)]
    gain: Option<GainArg>,
}

#[derive(Args)]
struct OracleArgs {
    /// Seed for the sampled Wigner comparison points
    #[arg(long)]
    seed: Option<u64>,
    /// Write the CSV to this file instead of standard output
    #[arg(long)]
    out: Option<String>,
    /// key=value file supplying defaults for this subcommand's flags
    #[arg(long)]
    config: Option<String>,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum GainArg {
    Unit,
    Optimal,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum TaskArg {
    Fidelity,
    #[value(name = "mk-noise")]
    MkNoise,
}

enum AppError {
    /// Bad flag or config values: exit 2.
    Usage(String),
    /// Degenerate physics (zero probability everywhere, no crossing, ...) or
    /// failed checks: exit 3.
    Run(String),
}

impl From<Error> for AppError {
    fn from(e: Error) -> Self {
        AppError::Run(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(AppError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(AppError::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

/// Nine significant digits, scientific notation.
fn fmt(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.8e}")
}

/// Quotes a text field if it contains CSV metacharacters.
fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn write_csv(out: &Option<String>, header: &str, rows: &[String]) -> Result<(), AppError> {
    let mut sink: Box<dyn Write> = match out {
        Some(path) => Box::new(
            std::fs::File::create(path)
                .map_err(|e| AppError::Usage(format!("cannot create `{path}`: {e}")))?,
        ),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut text = String::with_capacity(rows.len() * 40 + header.len() + 1);
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(row);
        text.push('\n');
    }
    sink.write_all(text.as_bytes())
        .map_err(|e| AppError::Run(format!("write failed: {e}")))?;
    Ok(())
}

/// Resolved scheme and couplings shared by the sweep subcommands.
struct Scheme {
    ops: Vec<PhotonOpSpec>,
    label: String,
}

fn resolve_scheme(common: &mut CommonArgs, config: &ConfigFile) -> Result<Scheme, AppError> {
    config.fill(&mut common.ops, "ops").map_err(AppError::Usage)?;
    config.fill(&mut common.t, "t").map_err(AppError::Usage)?;
    config.fill(&mut common.s, "s").map_err(AppError::Usage)?;
    if common.out.is_none() {
        let mut out_slot: Option<String> = None;
        config.fill(&mut out_slot, "out").map_err(AppError::Usage)?;
        common.out = out_slot;
    }
    config.fill(&mut common.threads, "threads").map_err(AppError::Usage)?;

    let scheme = common.ops.clone().unwrap_or_else(SchemeSpec::none);
    let t_intensity = common.t.unwrap_or(DEFAULT_T_INTENSITY);
    let s = common.s.unwrap_or(DEFAULT_S);
    if !(t_intensity > 0.0 && t_intensity < 1.0) {
        return Err(AppError::Usage(format!(
            "--t must lie in (0, 1), got {t_intensity}"
        )));
    }
    if !(s > 0.0) {
        return Err(AppError::Usage(format!("--s must be positive, got {s}")));
    }
    let label = scheme.label();
    let ops = match scheme.kind {
        None => Vec::new(),
        Some(cvghz::OpKind::Subtract) => scheme
            .modes
            .iter()
            .map(|&m| PhotonOpSpec::subtract_with(m, t_intensity.sqrt()))
            .collect::<Result<_, _>>()
            .map_err(|e| AppError::Usage(e.to_string()))?,
        Some(cvghz::OpKind::Add) => scheme
            .modes
            .iter()
            .map(|&m| PhotonOpSpec::add_with(m, s))
            .collect::<Result<_, _>>()
            .map_err(|e| AppError::Usage(e.to_string()))?,
    };
    Ok(Scheme { ops, label })
}

fn load_config(path: &Option<String>) -> Result<ConfigFile, AppError> {
    match path {
        Some(p) => ConfigFile::load(p).map_err(AppError::Usage),
        None => Ok(ConfigFile::default()),
    }
}

fn in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, AppError> {
    match threads {
        None | Some(0) => Ok(f()),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| AppError::Usage(format!("cannot build thread pool: {e}")))?
            .install(|| Ok(f())),
    }
}

/// Evaluates the sweep in parallel, keeps rows in parameter order, skips
/// zero-probability points, and fails only if nothing survives.
fn sweep<F>(points: &[f64], threads: Option<usize>, eval: F) -> Result<Vec<String>, AppError>
where
    F: Fn(f64) -> Result<String, Error> + Sync,
{
    let results =
        in_pool(threads, || points.par_iter().map(|&p| eval(p)).collect::<Vec<_>>())?;
    let mut rows = Vec::with_capacity(results.len());
    let mut last_err = None;
    for res in results {
        match res {
            Ok(row) => rows.push(row),
            Err(Error::ZeroSuccessProbability | Error::NonPositiveNorm) => continue,
            Err(e) => last_err = Some(e),
        }
    }
    if let Some(e) = last_err {
        return Err(e.into());
    }
    if rows.is_empty() {
        return Err(Error::ZeroSuccessProbability.into());
    }
    Ok(rows)
}

fn run(cmd: Cmd) -> Result<(), AppError> {
    match cmd {
        Cmd::GhzCov(mut args) => {
            let config = load_config(&args.common.config)?;
            let _ = resolve_scheme(&mut args.common, &config)?;
            config.fill(&mut args.r1, "r1").map_err(AppError::Usage)?;
            config.fill(&mut args.r2, "r2").map_err(AppError::Usage)?;
            config.fill(&mut args.n, "n").map_err(AppError::Usage)?;
            let r1 = args.r1.ok_or_else(|| AppError::Usage("missing --r1".into()))?;
            let r2 = args.r2.ok_or_else(|| AppError::Usage("missing --r2".into()))?;
            let n = args.n.unwrap_or(3);
            let params = GhzParams::new(n, r1, r2).map_err(|e| AppError::Usage(e.to_string()))?;
            let v = ghz_covariance(&params);
            let mut rows = Vec::new();
            for i in 0..v.dim() {
                for j in 0..v.dim() {
                    rows.push(format!("{i},{j},{}", fmt(v.matrix()[(i, j)])));
                }
            }
            write_csv(&args.common.out, "i,j,value", &rows)
        }

        Cmd::Tangle(mut args) => {
            let config = load_config(&args.common.config)?;
            let scheme = resolve_scheme(&mut args.common, &config)?;
            config.fill(&mut args.r, "r").map_err(AppError::Usage)?;
            let range = args.r.map(|r| r.0).unwrap_or(GridRange {
                min: 0.005,
                max: 1.0,
                steps: 200,
            });
            let points: Vec<f64> = range.points().collect();
            let rows = sweep(&points, args.common.threads, |r| {
                let state = cvghz::ghz::photon_operated_ghz(r, &scheme.ops)?;
                Ok(format!("{},{}", fmt(r), fmt(tangle_of_state(&state)?)))
            })?;
            write_csv(&args.common.out, "r,tangle", &rows)
        }

        Cmd::Mk(mut args) => {
            let config = load_config(&args.common.config)?;
            let scheme = resolve_scheme(&mut args.common, &config)?;
            config.fill(&mut args.r, "r").map_err(AppError::Usage)?;
            config.fill(&mut args.eta, "eta").map_err(AppError::Usage)?;
            let range = args.r.map(|r| r.0).unwrap_or(GridRange {
                min: 0.01,
                max: 2.0,
                steps: 200,
            });
            let eta = args.eta.unwrap_or(1.0);
            if !(0.0..=1.0).contains(&eta) {
                return Err(AppError::Usage(format!("--eta must lie in [0, 1], got {eta}")));
            }
            let points: Vec<f64> = range.points().collect();
            let rows = sweep(&points, args.common.threads, |r| {
                let state = lossy_operated_ghz(r, &scheme.ops, eta)?;
                let (x, b3) = maximize_b3(&state)?;
                Ok(format!("{},{},{}", fmt(r), fmt(x), fmt(b3)))
            })?;
            write_csv(&args.common.out, "r,x_star,b3", &rows)
        }

        Cmd::MkNoise(mut args) => {
            let config = load_config(&args.common.config)?;
            let scheme = resolve_scheme(&mut args.common, &config)?;
            config.fill(&mut args.eta, "eta").map_err(AppError::Usage)?;
            config.fill(&mut args.r_range, "r-range").map_err(AppError::Usage)?;
            let etas = args.eta.map(|r| r.0).unwrap_or(GridRange {
                min: 0.6,
                max: 1.0,
                steps: 81,
            });
            let r_range = args.r_range.map(|r| r.0).unwrap_or(GridRange {
                min: 0.005,
                max: 2.0,
                steps: 200,
            });
            let points: Vec<f64> = etas.points().collect();
            // The inner maximization already fans out over squeezing points.
            let rows = in_pool(args.common.threads, || {
                points
                    .iter()
                    .map(|&eta| {
                        let m = max_b3_over_r(&scheme.ops, eta, &r_range)?;
                        Ok(format!(
                            "{},{},{},{}",
                            fmt(eta),
                            fmt(m.r),
                            fmt(m.x),
                            fmt(m.value)
                        ))
                    })
                    .collect::<Result<Vec<_>, Error>>()
            })??;
            write_csv(&args.common.out, "eta,r_star,x_star,b3", &rows)
        }

        Cmd::Fidelity(mut args) => {
            let config = load_config(&args.common.config)?;
            let scheme = resolve_scheme(&mut args.common, &config)?;
            config.fill(&mut args.r, "r").map_err(AppError::Usage)?;
            config.fill(&mut args.gain, "gain").map_err(AppError::Usage)?;
            let range = args.r.map(|r| r.0).unwrap_or(GridRange {
                min: 0.005,
                max: 1.0,
                steps: 200,
            });
            let gain = args.gain.unwrap_or(GainArg::Unit);
            let points: Vec<f64> = range.points().collect();
            let rows = sweep(&points, args.common.threads, |r| {
                let state = cvghz::ghz::photon_operated_ghz(r, &scheme.ops)?;
                let (g, f) = match gain {
                    GainArg::Unit => (1.0, fidelity_state(&state, 1.0)?),
                    GainArg::Optimal => optimal_gain(&state)?,
                };
                Ok(format!("{},{},{}", fmt(r), fmt(g), fmt(f)))
            })?;
            write_csv(&args.common.out, "r,g,fidelity", &rows)
        }

        Cmd::Epr(mut args) => {
            let config = load_config(&args.common.config)?;
            let scheme = resolve_scheme(&mut args.common, &config)?;
            config.fill(&mut args.r, "r").map_err(AppError::Usage)?;
            config.fill(&mut args.pair, "pair").map_err(AppError::Usage)?;
            let range = args.r.map(|r| r.0).unwrap_or(GridRange {
                min: 0.005,
                max: 1.0,
                steps: 200,
            });
            let PairSpec(a, b) = args.pair.unwrap_or(PairSpec(cvghz::Mode::A, cvghz::Mode::C));
            let points: Vec<f64> = range.points().collect();
            let rows = sweep(&points, args.common.threads, |r| {
                let state = cvghz::ghz::photon_operated_ghz(r, &scheme.ops)?;
                Ok(format!("{},{}", fmt(r), fmt(epr_sum(&state, (a, b))?)))
            })?;
            write_csv(&args.common.out, "r,epr_sum", &rows)
        }

        Cmd::Contour(mut args) => {
            let config = load_config(&args.common.config)?;
            let scheme = resolve_scheme(&mut args.common, &config)?;
            config.fill(&mut args.r, "r").map_err(AppError::Usage)?;
            config.fill(&mut args.alpha, "alpha").map_err(AppError::Usage)?;
            config.fill(&mut args.g, "g").map_err(AppError::Usage)?;
            config.fill(&mut args.grid, "grid").map_err(AppError::Usage)?;
            let r = args.r.unwrap_or(0.3);
            let alpha = args.alpha.map(|c| c.0).unwrap_or(Complex64::new(1.0, 0.0));
            let g = args.g.unwrap_or(1.0);
            let grid = args.grid.unwrap_or(StepRangeSpec {
                min: -4.0,
                max: 4.0,
                step: 0.05,
            });
            let state = cvghz::ghz::photon_operated_ghz(r, &scheme.ops)?;
            let teleport = TeleportConfig {
                gain: g,
                input_alpha: alpha,
            };
            let axis = grid.points();
            let values = output_wigner(&state, &teleport, &axis, &axis)?;
            let mut rows = Vec::with_capacity(values.len());
            for (i, &x) in axis.iter().enumerate() {
                for (j, &p) in axis.iter().enumerate() {
                    rows.push(format!(
                        "{},{},{}",
                        fmt(x),
                        fmt(p),
                        fmt(values[i * axis.len() + j])
                    ));
                }
            }
            write_csv(&args.common.out, "x,p,w", &rows)
        }

        Cmd::Thresholds(mut args) => {
            let config = load_config(&args.common.config)?;
            let scheme = resolve_scheme(&mut args.common, &config)?;
            config.fill(&mut args.task, "task").map_err(AppError::Usage)?;
            config.fill(&mut args.gain, "gain").map_err(AppError::Usage)?;
            let task = args
                .task
                .ok_or_else(|| AppError::Usage("missing --task (fidelity or mk-noise)".into()))?;
            let gain = args.gain.unwrap_or(GainArg::Unit);
            let threads = args.common.threads;
            let row = match task {
                TaskArg::Fidelity => {
                    let mode = match gain {
                        GainArg::Unit => GainMode::Unit,
                        GainArg::Optimal => GainMode::Optimal,
                    };
                    let r = in_pool(threads, || threshold_squeezing(&scheme.ops, mode))??;
                    format!("fidelity,{},{},{}", csv_field(&scheme.label), gain_name(gain), fmt(r))
                }
                TaskArg::MkNoise => {
                    let eta = in_pool(threads, || threshold_efficiency(&scheme.ops))??;
                    format!("mk-noise,{},,{}", csv_field(&scheme.label), fmt(eta))
                }
            };
            write_csv(&args.common.out, "task,ops,gain,threshold", &[row])
        }

        Cmd::OracleCheck(mut args) => {
            let config = load_config(&args.config)?;
            config.fill(&mut args.seed, "seed").map_err(AppError::Usage)?;
            if args.out.is_none() {
                let mut out_slot: Option<String> = None;
                config.fill(&mut out_slot, "out").map_err(AppError::Usage)?;
                args.out = out_slot;
            }
            let seed = args.seed.unwrap_or(12345);
            let checks = cvghz::checks::run_oracle_checks(seed);
            let rows: Vec<String> = checks
                .iter()
                .map(|c| {
                    format!(
                        "{},{},{}",
                        csv_field(&c.name),
                        if c.passed { "pass" } else { "fail" },
                        fmt(c.max_err)
                    )
                })
                .collect();
            write_csv(&args.out, "check,status,max_err", &rows)?;
            if checks.iter().all(|c| c.passed) {
                Ok(())
            } else {
                Err(AppError::Run("oracle equivalence checks failed".into()))
            }
        }
    }
}

fn gain_name(g: GainArg) -> &'static str {
    match g {
        GainArg::Unit => "unit",
        GainArg::Optimal => "optimal",
    }
}

impl std::str::FromStr for GainArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "unit" => Ok(GainArg::Unit),
            "optimal" => Ok(GainArg::Optimal),
            other => Err(format!("unknown gain mode `{other}`")),
        }
    }
}

impl std::str::FromStr for TaskArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fidelity" => Ok(TaskArg::Fidelity),
            "mk-noise" => Ok(TaskArg::MkNoise),
            other => Err(format!("unknown task `{other}`")),
        }
    }
}
