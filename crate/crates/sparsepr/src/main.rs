//! Batch command-line front door: JSON in, JSON out, deterministic given
//! `--seed`. Verdicts (including `ambiguous` and `not_covered`) are data and
//! exit 0; malformed input exits 2; solver failures exit 1.

use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand_core::{RngCore, SeedableRng};
use serde::Serialize;

use sparsepr::formats::{
    acf_from_doc, acf_to_doc, signal_from_doc, signal_to_doc, verdict_to_doc,
    AcfDoc, AnyAcf, AnySignal, DocScalar, FormatError, GridDoc, ScalarMode, ScalarValue,
    SignalDoc, VerdictDoc,
};
use sparsepr::ingest::{
    acf_from_magnitude, channel_periodogram, speckle_average, IngestError, MagnitudeGrid,
};
use sparsepr_core::coefficients::{classify_uniqueness_1d, recover_coefficients};
use sparsepr_core::multidim::{check_general_position, recover_multidim, RecoverOptions};
use sparsepr_core::oracle::sweep_agreement;
use sparsepr_core::scalar::{Rational, Scalar, Tolerance};
use sparsepr_core::signal::{compute_acf, DeltaAcf, Spike, SpikeSignal};
use sparsepr_core::turnpike::{
    generate_bekir_pair, support_uniqueness, triangular_n, DifferenceMultiset,
    SupportVerdict,
};

#[derive(Parser)]
#[command(name = "sparsepr", version, about = "Sparse phase retrieval from autocorrelation data")]
struct Cli {
    /// Pretty-print JSON output.
    #[arg(long, global = true)]
    pretty: bool,
    /// Matching tolerance for floating mode (overrides SPARSEPR_EPS).
    #[arg(long, global = true)]
    eps: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random spike signal (signal JSON on stdout).
    Gen(GenArgs),
    /// Compute the ACF of a signal (signal JSON in, acf JSON out).
    Acf(AcfArgs),
    /// Classify a 1-D ACF: unique / ambiguous / not_covered, with signals.
    /// Also accepts a bare JSON array of positive differences.
    Solve1d(InputArgs),
    /// Verdict plus collision report and (for dim >= 2) visibility report.
    Classify(ClassifyArgs),
    /// Recover a signal from an ACF (projection-based for dim >= 2).
    Recover(RecoverArgs),
    /// Recover spike coefficients given a support and an ACF.
    Coeffs(CoeffsArgs),
    /// Convert Fourier-magnitude measurements into an ACF.
    #[command(subcommand)]
    Ingest(IngestCommand),
    /// Brute-force verification commands.
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    dim: usize,
    #[arg(long)]
    n: usize,
    /// Resample until the difference multiset is collision-free.
    #[arg(long)]
    collision_free: bool,
    /// Emit the X branch of the six-point counterexample family at p1,p2
    /// (unit coefficients, dim 1).
    #[arg(long, value_name = "P1,P2")]
    bekir: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "exact")]
    mode: String,
}

#[derive(Args)]
struct InputArgs {
    /// Input file; stdin when omitted or "-".
    input: Option<PathBuf>,
    /// Force the scalar mode instead of inferring it.
    #[arg(long)]
    mode: Option<String>,
}

#[derive(Args)]
struct AcfArgs {
    input: Option<PathBuf>,
    #[arg(long)]
    mode: Option<String>,
    /// Emit the half-support form (zero lag plus one representative per pair).
    #[arg(long)]
    half: bool,
}

#[derive(Args)]
struct ClassifyArgs {
    input: Option<PathBuf>,
    #[arg(long)]
    mode: Option<String>,
    /// Seed for the projection resampler (dim >= 2 verdicts).
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct RecoverArgs {
    input: Option<PathBuf>,
    #[arg(long)]
    mode: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Resampling budget per needed direction.
    #[arg(long, default_value_t = 64)]
    attempts: usize,
    /// Total accepted directions to gather (default dim + 1).
    #[arg(long)]
    directions: Option<usize>,
}

#[derive(Args)]
struct CoeffsArgs {
    /// Signal JSON whose positions give the support.
    support: PathBuf,
    /// ACF JSON.
    acf: PathBuf,
    #[arg(long)]
    mode: Option<String>,
}

#[derive(Subcommand)]
enum IngestCommand {
    /// Extract a delta ACF from a |F|^2 grid (grid JSON in, acf JSON out).
    Magnitude(MagnitudeArgs),
    /// Average a speckle stack, divide out the atmosphere PSD, extract the ACF.
    Speckle(SpeckleArgs),
    /// Periodogram of channel output samples, then ACF extraction.
    Channel(MagnitudeArgs),
}

#[derive(Args)]
struct MagnitudeArgs {
    input: Option<PathBuf>,
    /// Relative threshold for delta extraction.
    #[arg(long, default_value_t = 1e-6)]
    tau: f64,
}

#[derive(Args)]
struct SpeckleArgs {
    /// Stack JSON: {"grids": [grid, ...]}.
    input: Option<PathBuf>,
    /// Atmosphere PSD grid JSON.
    #[arg(long)]
    psd: PathBuf,
    /// PSD floor as a fraction of its maximum.
    #[arg(long, default_value_t = 1e-6)]
    floor: f64,
    #[arg(long, default_value_t = 1e-6)]
    tau: f64,
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Compare solver and exhaustive enumeration on all integer supports.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    bound: i64,
}

enum CliError {
    /// Malformed input: exit 2.
    Input(String),
    /// Solver or internal failure: exit 1.
    Run(String),
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<sparsepr_core::Error> for CliError {
    fn from(e: sparsepr_core::Error) -> Self {
        CliError::Run(e.to_string())
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        CliError::Run(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let eps = cli
        .eps
        .or_else(|| {
            std::env::var("SPARSEPR_EPS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(1e-9);
    if !(eps > 0.0) || !eps.is_finite() {
        eprintln!("error: tolerance must be a positive finite number, got {eps}");
        return ExitCode::from(2);
    }
    let tol = Tolerance::new(eps);
    match run(cli.command, tol) {
        Ok(output) => {
            let rendered = if cli.pretty {
                serde_json::to_string_pretty(&output).expect("serializable")
            } else {
                serde_json::to_string(&output).expect("serializable")
            };
            println!("{rendered}");
            ExitCode::SUCCESS
        }
        Err(CliError::Input(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
        Err(CliError::Run(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

fn read_input(path: &Option<PathBuf>) -> Result<String, CliError> {
    match path {
        Some(p) if p.as_os_str() != "-" => {
            std::fs::read_to_string(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))
        }
        _ => {
            let mut buffer = String::new();
            std::io::stdin()
                .read_to_string(&mut buffer)
                .map_err(|e| CliError::Input(format!("stdin: {e}")))?;
            Ok(buffer)
        }
    }
}

fn parse_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Input(e.to_string()))
}

fn parse_mode(mode: &Option<String>) -> Result<Option<ScalarMode>, CliError> {
    mode.as_deref()
        .map(|m| m.parse().map_err(|e: FormatError| CliError::Input(e.to_string())))
        .transpose()
}

fn run(command: Command, tol: Tolerance) -> Result<serde_json::Value, CliError> {
    match command {
        Command::Gen(args) => {
            let doc = generate(&args, tol)?;
            Ok(serde_json::to_value(doc).expect("serializable"))
        }
        Command::Acf(args) => {
            let text = read_input(&args.input)?;
            let doc: SignalDoc = parse_json(&text)?;
            let signal = signal_from_doc(&doc, parse_mode(&args.mode)?, tol)?;
            let acf_doc = match &signal {
                AnySignal::Exact(s) => {
                    let acf = compute_acf(s, tol);
                    acf_to_doc(&if args.half { acf.to_half() } else { acf })
                }
                AnySignal::Float(s) => {
                    let acf = compute_acf(s, tol);
                    acf_to_doc(&if args.half { acf.to_half() } else { acf })
                }
            };
            Ok(serde_json::to_value(acf_doc).expect("serializable"))
        }
        Command::Solve1d(args) => {
            let text = read_input(&args.input)?;
            let value: serde_json::Value = parse_json(&text)?;
            let verdict = if value.is_array() {
                solve_bare_diffs(&value, parse_mode(&args.mode)?, tol)?
            } else {
                let doc: AcfDoc = parse_json(&text)?;
                match acf_from_doc(&doc, parse_mode(&args.mode)?, tol)? {
                    AnyAcf::Exact(acf) => verdict_to_doc(&classify_uniqueness_1d(&acf, tol)?),
                    AnyAcf::Float(acf) => verdict_to_doc(&classify_uniqueness_1d(&acf, tol)?),
                }
            };
            Ok(serde_json::to_value(verdict).expect("serializable"))
        }
        Command::Classify(args) => {
            let text = read_input(&args.input)?;
            let doc: AcfDoc = parse_json(&text)?;
            let acf = acf_from_doc(&doc, parse_mode(&args.mode)?, tol)?;
            let report = match &acf {
                AnyAcf::Exact(a) => classify_full(a, args.seed, tol)?,
                AnyAcf::Float(a) => classify_full(a, args.seed, tol)?,
            };
            Ok(serde_json::to_value(report).expect("serializable"))
        }
        Command::Recover(args) => {
            let text = read_input(&args.input)?;
            let doc: AcfDoc = parse_json(&text)?;
            let acf = acf_from_doc(&doc, parse_mode(&args.mode)?, tol)?;
            let opts = RecoverOptions {
                attempts_per_direction: args.attempts,
                direction_count: args.directions,
            };
            let verdict = match &acf {
                AnyAcf::Exact(a) => recover_any(a, args.seed, &opts, tol)?,
                AnyAcf::Float(a) => recover_any(a, args.seed, &opts, tol)?,
            };
            Ok(serde_json::to_value(verdict).expect("serializable"))
        }
        Command::Coeffs(args) => {
            let support_doc: SignalDoc = parse_json(&read_input(&Some(args.support.clone()))?)?;
            let acf_doc: AcfDoc = parse_json(&read_input(&Some(args.acf.clone()))?)?;
            let acf = acf_from_doc(&acf_doc, parse_mode(&args.mode)?, tol)?;
            // The support follows the ACF's scalar mode.
            let values: Vec<ScalarValue> = match &acf {
                AnyAcf::Exact(a) => {
                    match signal_from_doc(&support_doc, Some(ScalarMode::Exact), tol)? {
                        AnySignal::Exact(s) => coeffs_any(&s, a, tol)?,
                        AnySignal::Float(_) => unreachable!("mode forced"),
                    }
                }
                AnyAcf::Float(a) => {
                    match signal_from_doc(&support_doc, Some(ScalarMode::Float), tol)? {
                        AnySignal::Float(s) => coeffs_any(&s, a, tol)?,
                        AnySignal::Exact(_) => unreachable!("mode forced"),
                    }
                }
            };
            Ok(serde_json::to_value(values).expect("serializable"))
        }
        Command::Ingest(cmd) => {
            let acf_doc = run_ingest(cmd, tol)?;
            Ok(serde_json::to_value(acf_doc).expect("serializable"))
        }
        Command::Oracle(OracleCommand::Sweep(args)) => {
            let report = sweep_agreement(args.n, args.bound)?;
            Ok(serde_json::json!({
                "n": args.n,
                "bound": args.bound,
                "examined": report.examined,
                "collision_free": report.collision_free,
                "agreements": report.agreements,
                "disagreements": report.disagreements,
                "pass": report.all_agree(),
            }))
        }
    }
}

fn coeffs_any<S: DocScalar>(
    support: &SpikeSignal<S>,
    acf: &DeltaAcf<S>,
    tol: Tolerance,
) -> Result<Vec<ScalarValue>, CliError> {
    let positions: Vec<S> = support
        .spikes()
        .iter()
        .map(|s| {
            if s.pos.len() == 1 {
                Ok(s.pos[0].clone())
            } else {
                Err(CliError::Input("coeffs expects a 1-D support".into()))
            }
        })
        .collect::<Result<_, _>>()?;
    let coefs = recover_coefficients(&positions, acf, tol)?;
    Ok(coefs.iter().map(DocScalar::to_value).collect())
}

fn recover_any<S: DocScalar>(
    acf: &DeltaAcf<S>,
    seed: u64,
    opts: &RecoverOptions,
    tol: Tolerance,
) -> Result<VerdictDoc, CliError> {
    if acf.dim() == 1 {
        return Ok(verdict_to_doc(&classify_uniqueness_1d(acf, tol)?));
    }
    let recovery = recover_multidim(acf, seed, opts, tol)?;
    let accepted = recovery
        .attempts
        .iter()
        .filter(|a| a.outcome == sparsepr_core::multidim::AttemptOutcome::Accepted)
        .count();
    eprintln!(
        "directions: {} accepted of {} attempts",
        accepted,
        recovery.attempts.len()
    );
    Ok(verdict_to_doc(&recovery.verdict))
}

#[derive(Serialize)]
struct CollisionDoc {
    has_collisions: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    inferred_n: Option<usize>,
}

#[derive(Serialize)]
struct VisibilityDeltaDoc {
    lag: Vec<ScalarValue>,
    visible: bool,
}

#[derive(Serialize)]
struct VisibilityDoc {
    all_visible: bool,
    deltas: Vec<VisibilityDeltaDoc>,
}

#[derive(Serialize)]
struct ClassifyDoc {
    verdict: VerdictDoc,
    collision: CollisionDoc,
    #[serde(skip_serializing_if = "Option::is_none")]
    visibility: Option<VisibilityDoc>,
}

fn classify_full<S: DocScalar>(
    acf: &DeltaAcf<S>,
    seed: u64,
    tol: Tolerance,
) -> Result<ClassifyDoc, CliError> {
    let positive = acf.nonzero_lags().len() / 2;
    let inferred_n = if positive == 0 { Some(1) } else { triangular_n(positive) };
    let collision = CollisionDoc { has_collisions: inferred_n.is_none(), inferred_n };
    let visibility = if acf.dim() >= 2 {
        let report = check_general_position(acf, tol)?;
        Some(VisibilityDoc {
            all_visible: report.all_visible,
            deltas: report
                .deltas
                .into_iter()
                .map(|(lag, visible)| VisibilityDeltaDoc {
                    lag: lag.iter().map(DocScalar::to_value).collect(),
                    visible,
                })
                .collect(),
        })
    } else {
        None
    };
    let verdict = if acf.dim() == 1 {
        verdict_to_doc(&classify_uniqueness_1d(acf, tol)?)
    } else {
        recover_any(acf, seed, &RecoverOptions::default(), tol)?
    };
    Ok(ClassifyDoc { verdict, collision, visibility })
}

/// A bare JSON array of positive differences: run the support-level
/// trichotomy and emit unit-coefficient signals.
fn solve_bare_diffs(
    value: &serde_json::Value,
    mode: Option<ScalarMode>,
    tol: Tolerance,
) -> Result<VerdictDoc, CliError> {
    let items: Vec<ScalarValue> =
        serde_json::from_value(value.clone()).map_err(|e| CliError::Input(e.to_string()))?;
    let mode = mode.unwrap_or_else(|| {
        if items.iter().any(|v| matches!(v, ScalarValue::Exact(_))) {
            ScalarMode::Exact
        } else {
            ScalarMode::Float
        }
    });
    match mode {
        ScalarMode::Exact => bare_diffs_verdict::<Rational>(&items, tol),
        ScalarMode::Float => bare_diffs_verdict::<f64>(&items, tol),
    }
}

fn bare_diffs_verdict<S: DocScalar>(
    items: &[ScalarValue],
    tol: Tolerance,
) -> Result<VerdictDoc, CliError> {
    let diffs: Vec<S> = items
        .iter()
        .map(S::from_value)
        .collect::<Result<_, FormatError>>()?;
    let multiset = DifferenceMultiset::new(diffs).map_err(|e| CliError::Input(e.to_string()))?;
    let verdict = support_uniqueness(&multiset, tol)?;
    Ok(match verdict {
        SupportVerdict::UniqueSupport(class) => VerdictDoc {
            verdict: "unique".into(),
            reason: None,
            signals: vec![signal_to_doc(class.representative())],
        },
        SupportVerdict::TwoSupports { x, y, .. } => VerdictDoc {
            verdict: "ambiguous".into(),
            reason: None,
            signals: vec![
                signal_to_doc(x.representative()),
                signal_to_doc(y.representative()),
            ],
        },
        SupportVerdict::HasCollisions => VerdictDoc {
            verdict: "not_covered".into(),
            reason: Some("collisions".into()),
            signals: Vec::new(),
        },
    })
}

fn run_ingest(cmd: IngestCommand, tol: Tolerance) -> Result<AcfDoc, CliError> {
    #[derive(serde::Deserialize)]
    struct StackDoc {
        grids: Vec<GridDoc>,
    }
    #[derive(serde::Deserialize)]
    struct SamplesDoc {
        samples: Vec<Vec<f64>>,
    }
    let (grid, tau) = match cmd {
        IngestCommand::Magnitude(args) => {
            let doc: GridDoc = parse_json(&read_input(&args.input)?)?;
            let grid = MagnitudeGrid::new(doc.dims, doc.values, tol)
                .map_err(|e| CliError::Input(e.to_string()))?;
            (grid, args.tau)
        }
        IngestCommand::Speckle(args) => {
            let stack_doc: StackDoc = parse_json(&read_input(&args.input)?)?;
            let psd_doc: GridDoc = parse_json(&read_input(&Some(args.psd.clone()))?)?;
            let stack = stack_doc
                .grids
                .into_iter()
                .map(|g| MagnitudeGrid::new(g.dims, g.values, tol))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| CliError::Input(e.to_string()))?;
            let psd = MagnitudeGrid::new(psd_doc.dims, psd_doc.values, tol)
                .map_err(|e| CliError::Input(e.to_string()))?;
            (speckle_average(&stack, &psd, args.floor)?, args.tau)
        }
        IngestCommand::Channel(args) => {
            let doc: SamplesDoc = parse_json(&read_input(&args.input)?)?;
            (channel_periodogram(&doc.samples)?, args.tau)
        }
    };
    let extracted = acf_from_magnitude(&grid, tau, tol)?;
    if extracted.aliasing_warning {
        eprintln!("warning: energy at Nyquist lags; the half-grid extent assumption may be violated");
    }
    Ok(acf_to_doc(&extracted.acf))
}

fn generate(args: &GenArgs, tol: Tolerance) -> Result<SignalDoc, CliError> {
    let mode: ScalarMode = args
        .mode
        .parse()
        .map_err(|e: FormatError| CliError::Input(e.to_string()))?;
    if let Some(spec) = &args.bekir {
        if args.dim != 1 {
            return Err(CliError::Input("--bekir requires --dim 1".into()));
        }
        if args.n != 6 {
            return Err(CliError::Input("--bekir requires --n 6".into()));
        }
        let parts: Vec<&str> = spec.split(',').collect();
        if parts.len() != 2 {
            return Err(CliError::Input("--bekir expects P1,P2".into()));
        }
        return match mode {
            ScalarMode::Exact => {
                let p = [
                    Rational::from_value(&ScalarValue::Exact(parts[0].trim().into()))?,
                    Rational::from_value(&ScalarValue::Exact(parts[1].trim().into()))?,
                ];
                let (x, _) = generate_bekir_pair(&p, tol)?;
                Ok(signal_to_doc(&x))
            }
            ScalarMode::Float => {
                let p1: f64 = parts[0].trim().parse().map_err(|_| {
                    CliError::Input(format!("invalid parameter {:?}", parts[0]))
                })?;
                let p2: f64 = parts[1].trim().parse().map_err(|_| {
                    CliError::Input(format!("invalid parameter {:?}", parts[1]))
                })?;
                let (x, _) = generate_bekir_pair(&[p1, p2], tol)?;
                Ok(signal_to_doc(&x))
            }
        };
    }
    if args.dim == 0 || args.n == 0 {
        return Err(CliError::Input("--dim and --n must be positive".into()));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(args.seed);
    match mode {
        ScalarMode::Exact => Ok(signal_to_doc(&random_exact_signal(args, &mut rng, tol)?)),
        ScalarMode::Float => Ok(signal_to_doc(&random_float_signal(args, &mut rng, tol)?)),
    }
}

fn has_collisions_exact(signal: &SpikeSignal<Rational>, tol: Tolerance) -> bool {
    sparsepr_core::signal::detect_collisions(signal, tol).has_collisions
}

fn random_exact_signal(
    args: &GenArgs,
    rng: &mut rand_chacha::ChaCha8Rng,
    tol: Tolerance,
) -> Result<SpikeSignal<Rational>, CliError> {
    let range = (4 * args.n * args.n).max(50) as u64;
    for _ in 0..10_000 {
        let mut positions = std::collections::BTreeSet::new();
        while positions.len() < args.n {
            let pos: Vec<i64> = (0..args.dim)
                .map(|_| (rng.next_u64() % range) as i64)
                .collect();
            positions.insert(pos);
        }
        let spikes: Vec<Spike<Rational>> = positions
            .into_iter()
            .map(|pos| Spike {
                pos: pos.into_iter().map(Rational::from_int).collect(),
                coef: Rational::from_int(1 + (rng.next_u64() % 9) as i64),
            })
            .collect();
        let signal = SpikeSignal::new(args.dim, spikes, tol).map_err(CliError::from)?;
        if args.collision_free && has_collisions_exact(&signal, tol) {
            continue;
        }
        return Ok(signal);
    }
    Err(CliError::Run("could not generate a collision-free signal".into()))
}

fn random_float_signal(
    args: &GenArgs,
    rng: &mut rand_chacha::ChaCha8Rng,
    tol: Tolerance,
) -> Result<SpikeSignal<f64>, CliError> {
    fn unit(rng: &mut rand_chacha::ChaCha8Rng) -> f64 {
        (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
    for _ in 0..10_000 {
        let spikes: Vec<Spike<f64>> = (0..args.n)
            .map(|_| Spike {
                pos: (0..args.dim).map(|_| 10.0 * unit(rng)).collect(),
                coef: 0.5 + 2.5 * unit(rng),
            })
            .collect();
        let signal = match SpikeSignal::new(args.dim, spikes, tol) {
            Ok(s) => s,
            Err(_) => continue,
        };
        if args.collision_free
            && sparsepr_core::signal::detect_collisions(&signal, tol).has_collisions
        {
            continue;
        }
        return Ok(signal);
    }
    Err(CliError::Run("could not generate a collision-free signal".into()))
}

