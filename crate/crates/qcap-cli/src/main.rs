//! Command-line surface for the channel toolkit: loads channels and sequence
//! specs from JSON, runs the estimators and verification suites, and emits
//! deterministic JSON or human-readable reports.
//!
//! Exit codes: 0 success, 2 malformed input, 3 contract violation,
//! 4 verification failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use qcap_core::bounds::{
    hashing_capacity_bound, ideal_capacity, max_coherent_information_state,
    partial_transposition_bound, unit_conversion_check,
};
use qcap_core::equivalence::{equivalence_chain, ChainConfig};
use qcap_core::error::Error as CoreError;
use qcap_core::fidelity::{
    average_fidelity_closed, average_fidelity_mc, channel_fidelity, inf_entanglement_fidelity,
    min_fidelity,
};
use qcap_core::json::channel_from_json;
use qcap_core::sequences::{
    counterexample_delta, counterexample_demonstration, extend_coding, half_sqrt_ratio_epsilons,
    DeltaFunction, RatePair, SeqSpec, SequencePrefix,
};
use qcap_core::supnorms::{cb_norm, ideal_delta_lower};
use qcap_core::verify::{run_suite, VerifyConfig};
use qcap_core::{Channel, DensityOperator, Superoperator};

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(
    name = "qcap",
    about = "Numerical toolkit for quantum channel fidelities, norms and capacity bounds",
    version
)]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct GlobalOpts {
    /// Seed for every random stream (restarts, Monte-Carlo samples).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Multi-start restarts for the optimizing estimators.
    #[arg(long, global = true, default_value_t = 256)]
    restarts: u32,
    /// Monte-Carlo sample count.
    #[arg(long, global = true, default_value_t = 100_000)]
    samples: u64,
    /// Slack applied to inequality checks.
    #[arg(long, global = true, default_value_t = 1e-6)]
    tolerance: f64,
    /// Emit compact JSON (default).
    #[arg(long, global = true, conflicts_with = "pretty")]
    json: bool,
    /// Emit a human-readable report instead of JSON.
    #[arg(long, global = true)]
    pretty: bool,
}

#[derive(Subcommand)]
enum Command {
    /// All fidelity measures of a channel loaded from JSON.
    Fidelity { channel: PathBuf },
    /// The dimension-independent error-measure equivalence chain.
    Chain { channel: PathBuf },
    /// Capacity bounds: partial transposition, coherent information, hashing rates.
    Bounds { channel: PathBuf },
    /// Ideal-channel capacity and simulation-error formulas.
    Ideal { n: usize, m: usize },
    /// Rate-sequence extension or sparse-block counterexample from a spec file.
    Sequences { spec: PathBuf },
    /// Runs a module verification suite (norms, channels, fidelity, supnorms,
    /// equivalence, bounds, sequences, all).
    Verify { suite: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(all_passed) => {
            if all_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(4)
            }
        }
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                CoreError::Parse(_) => ExitCode::from(2),
                _ => ExitCode::from(3),
            }
        }
    }
}

fn read_file(path: &PathBuf) -> Result<String, CoreError> {
    std::fs::read_to_string(path)
        .map_err(|e| CoreError::Parse(format!("cannot read {}: {e}", path.display())))
}

fn load_channel(path: &PathBuf) -> Result<Channel, CoreError> {
    channel_from_json(&read_file(path)?)
}

#[derive(Serialize)]
struct ParamsEcho {
    seed: u64,
    restarts: u32,
    samples: u64,
    tolerance: f64,
}

impl From<&GlobalOpts> for ParamsEcho {
    fn from(g: &GlobalOpts) -> Self {
        Self {
            seed: g.seed,
            restarts: g.restarts,
            samples: g.samples,
            tolerance: g.tolerance,
        }
    }
}

fn vector_dto(v: &qcap_core::UnitVector) -> Vec<[f64; 2]> {
    v.amplitudes().iter().map(|z| [z.re, z.im]).collect()
}

fn matrix_dto(m: &qcap_core::CMat) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
        .collect()
}

fn emit<T: Serialize>(global: &GlobalOpts, report: &T, pretty_text: String) -> bool {
    if global.pretty {
        println!("{pretty_text}");
    } else {
        println!("{}", serde_json::to_string(report).expect("serializable report"));
    }
    true
}

fn run(cli: &Cli) -> Result<bool, CoreError> {
    let g = &cli.global;
    match &cli.command {
        Command::Fidelity { channel } => cmd_fidelity(g, channel),
        Command::Chain { channel } => cmd_chain(g, channel),
        Command::Bounds { channel } => cmd_bounds(g, channel),
        Command::Ideal { n, m } => cmd_ideal(g, *n, *m),
        Command::Sequences { spec } => cmd_sequences(g, spec),
        Command::Verify { suite } => cmd_verify(g, suite),
    }
}

#[derive(Serialize)]
struct FidelityReport {
    schema: u32,
    command: &'static str,
    params: ParamsEcho,
    dim: usize,
    channel_fidelity: f64,
    average_fidelity_closed: f64,
    average_fidelity_mc: McValue,
    min_fidelity: WitnessedValue,
    inf_entanglement_fidelity: StateWitnessedValue,
}

#[derive(Serialize)]
struct McValue {
    mean: f64,
    std_err: f64,
    samples: u64,
}

#[derive(Serialize)]
struct WitnessedValue {
    value: f64,
    witness: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct StateWitnessedValue {
    value: f64,
    witness: Vec<Vec<[f64; 2]>>,
}

fn cmd_fidelity(g: &GlobalOpts, path: &PathBuf) -> Result<bool, CoreError> {
    let t = load_channel(path)?;
    if !t.is_square() {
        return Err(CoreError::Dimension(
            "fidelity report needs a square channel".into(),
        ));
    }
    let fc = channel_fidelity(&t)?;
    let avg_closed = average_fidelity_closed(&t)?;
    let (mc_mean, mc_se) = average_fidelity_mc(&t, g.samples, g.seed)?;
    let (min_f, min_w) = min_fidelity(&t, g.restarts, g.seed)?;
    let (inf_fe, inf_w) = inf_entanglement_fidelity(&t, g.restarts, g.seed)?;
    let report = FidelityReport {
        schema: SCHEMA_VERSION,
        command: "fidelity",
        params: g.into(),
        dim: t.dim_in(),
        channel_fidelity: fc,
        average_fidelity_closed: avg_closed,
        average_fidelity_mc: McValue {
            mean: mc_mean,
            std_err: mc_se,
            samples: g.samples,
        },
        min_fidelity: WitnessedValue {
            value: min_f,
            witness: vector_dto(&min_w),
        },
        inf_entanglement_fidelity: StateWitnessedValue {
            value: inf_fe,
            witness: matrix_dto(inf_w.matrix()),
        },
    };
    let pretty = format!(
        "fidelity report (dim {dim}, seed {seed}, restarts {restarts}, samples {samples})\n\
         F_c              = {fc:.6}\n\
         F_avg (closed)   = {closed:.6}\n\
         F_avg (MC)       = {mc:.6} ± {se:.2e}\n\
         F_min            = {minf:.6}  (witness certified)\n\
         inf F_e          = {inf:.6}  (witness certified)",
        dim = t.dim_in(),
        seed = g.seed,
        restarts = g.restarts,
        samples = g.samples,
        fc = fc,
        closed = avg_closed,
        mc = mc_mean,
        se = mc_se,
        minf = min_f,
        inf = inf_fe,
    );
    Ok(emit(g, &report, pretty))
}

#[derive(Serialize)]
struct ChainCliReport {
    schema: u32,
    command: &'static str,
    params: ParamsEcho,
    #[serde(flatten)]
    chain: qcap_core::equivalence::ChainReport,
}

fn cmd_chain(g: &GlobalOpts, path: &PathBuf) -> Result<bool, CoreError> {
    let t = load_channel(path)?;
    let chain = equivalence_chain(
        &t,
        &ChainConfig {
            restarts: g.restarts,
            seed: g.seed,
            slack: g.tolerance,
        },
    )?;
    let all_pass = chain.all_pass;
    let mut pretty = format!(
        "equivalence chain (dim {}, seed {}, restarts {})\n\
         1 - inf F_e        = {:.6}\n\
         4·sqrt(1 - F_min)  = {:.6}\n\
         4·sqrt(op norm)    = {:.6}\n\
         4·sqrt(cb norm)    = {:.6}\n\
         8·(1 - inf F_e)^¼  = {:.6}",
        chain.dim,
        g.seed,
        g.restarts,
        chain.one_minus_inf_fe,
        chain.four_sqrt_one_minus_min_f,
        chain.four_sqrt_opnorm,
        chain.four_sqrt_cbnorm,
        chain.eight_fourth_root
    );
    for link in &chain.links {
        pretty.push_str(&format!(
            "\n  [{}] {}",
            if link.pass { "ok" } else { "VIOLATED" },
            link.name
        ));
    }
    let report = ChainCliReport {
        schema: SCHEMA_VERSION,
        command: "chain",
        params: g.into(),
        chain,
    };
    emit(g, &report, pretty);
    Ok(all_pass)
}

#[derive(Serialize)]
struct BoundsReport {
    schema: u32,
    command: &'static str,
    params: ParamsEcho,
    dim_in: usize,
    dim_out: usize,
    partial_transposition: QThetaDto,
    max_coherent_information: CoherentDto,
    hashing: HashingDto,
}

#[derive(Serialize)]
struct QThetaDto {
    value: f64,
    cb_estimate: f64,
    ancilla_dim: usize,
    restarts: u32,
}

#[derive(Serialize)]
struct CoherentDto {
    value: f64,
    restarts: u32,
    argmax_state: Vec<Vec<[f64; 2]>>,
}

#[derive(Serialize)]
struct HashingDto {
    /// cb-distance estimate of the channel itself from the ideal channel,
    /// usable as Δ for an N = 1 hashing scheme when the dimension is prime.
    delta_estimate: f64,
    bound_at_estimate: Option<f64>,
    table: Vec<HashingRow>,
}

#[derive(Serialize)]
struct HashingRow {
    delta: f64,
    raw_bound: f64,
    clamped_bound: f64,
}

fn cmd_bounds(g: &GlobalOpts, path: &PathBuf) -> Result<bool, CoreError> {
    let t = load_channel(path)?;
    let q_theta = partial_transposition_bound(&t, g.restarts, g.seed)?;
    let (ic, state) = max_coherent_information_state(&t, g.restarts.min(64), g.seed)?;
    let d = t.dim_in();
    let hashing = if t.is_square() {
        let diff = t
            .to_superoperator()
            .difference(&Superoperator::identity_map(d))?;
        let delta_est = cb_norm(&diff, None, g.restarts, g.seed)?.value;
        let bound_at = if qcap_core::bounds::is_prime(d)
            && delta_est < 1.0 / (2.0 * std::f64::consts::E)
        {
            Some(hashing_capacity_bound(d, 1, delta_est)?)
        } else {
            None
        };
        let table = if qcap_core::bounds::is_prime(d) {
            [0.0, 1e-3, 1e-2, 5e-2]
                .iter()
                .map(|&delta| {
                    let raw = hashing_capacity_bound(d, 1, delta)?;
                    Ok(HashingRow {
                        delta,
                        raw_bound: raw,
                        clamped_bound: raw.max(0.0),
                    })
                })
                .collect::<Result<Vec<_>, CoreError>>()?
        } else {
            Vec::new()
        };
        HashingDto {
            delta_estimate: delta_est,
            bound_at_estimate: bound_at,
            table,
        }
    } else {
        HashingDto {
            delta_estimate: f64::NAN,
            bound_at_estimate: None,
            table: Vec::new(),
        }
    };
    let pretty = format!(
        "capacity bounds (dim {}→{}, seed {}, restarts {})\n\
         Q_Theta (partial transposition) = {:.6}  [cb estimate {:.6}, ancilla {}]\n\
         max I_c (single letter)         = {:.6}\n\
         hashing: channel cb-distance Δ  = {:.6}, bound at Δ = {}",
        t.dim_in(),
        t.dim_out(),
        g.seed,
        g.restarts,
        q_theta.value,
        q_theta.cb_estimate.value,
        q_theta.cb_estimate.ancilla_dim,
        ic,
        hashing.delta_estimate,
        hashing
            .bound_at_estimate
            .map(|b| format!("{b:.6}"))
            .unwrap_or_else(|| "n/a".to_string()),
    );
    let report = BoundsReport {
        schema: SCHEMA_VERSION,
        command: "bounds",
        params: g.into(),
        dim_in: t.dim_in(),
        dim_out: t.dim_out(),
        partial_transposition: QThetaDto {
            value: q_theta.value,
            cb_estimate: q_theta.cb_estimate.value,
            ancilla_dim: q_theta.cb_estimate.ancilla_dim,
            restarts: g.restarts,
        },
        max_coherent_information: CoherentDto {
            value: ic,
            restarts: g.restarts.min(64),
            argmax_state: matrix_dto(state.matrix()),
        },
        hashing,
    };
    Ok(emit(g, &report, pretty))
}

#[derive(Serialize)]
struct IdealReport {
    schema: u32,
    command: &'static str,
    params: ParamsEcho,
    n: usize,
    m: usize,
    capacity: f64,
    /// Exact lower bound on inf ‖D id_n E − id_m‖_cb.
    delta_lower_forward: f64,
    /// Same with the roles of n and m exchanged.
    delta_lower_reverse: f64,
    unit_check: qcap_core::bounds::UnitConversionCheck,
}

fn cmd_ideal(g: &GlobalOpts, n: usize, m: usize) -> Result<bool, CoreError> {
    let capacity = ideal_capacity(n, m)?;
    let forward = ideal_delta_lower(n, m)?;
    let reverse = ideal_delta_lower(m, n)?;
    let unit_check = unit_conversion_check(n, m, m * m)?;
    let pretty = format!(
        "ideal channels: Q(id_{n}, id_{m}) = {capacity:.4}\n\
         simulation error lower bounds: Δ(id_{n} → id_{m}) ≥ {forward:.4}, Δ(id_{m} → id_{n}) ≥ {reverse:.4}\n\
         unit conversion check ({m} vs {sq}): {ok}",
        sq = m * m,
        ok = if unit_check.holds { "holds" } else { "VIOLATED" },
    );
    let ok = unit_check.holds;
    let report = IdealReport {
        schema: SCHEMA_VERSION,
        command: "ideal",
        params: g.into(),
        n,
        m,
        capacity,
        delta_lower_forward: forward,
        delta_lower_reverse: reverse,
        unit_check,
    };
    emit(g, &report, pretty);
    Ok(ok)
}

/// Sequence job description accepted by `qcap sequences`.
#[derive(Deserialize)]
#[serde(tag = "task", rename_all = "snake_case")]
enum SequenceJob {
    /// Transfer a coding guarantee from source block sizes to a target pair.
    Extend {
        source_n: SeqSpec,
        source_m: SeqSpec,
        target_n: SeqSpec,
        target_m: SeqSpec,
        block_errors: EpsSpec,
    },
    /// Evaluate the sparse-block counterexample rows.
    Counterexample {
        blocks: SeqSpec,
        block_errors: EpsSpec,
        mu_lo: usize,
        mu_hi: usize,
    },
}

#[derive(Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
enum EpsSpec {
    /// ε_μ = 1/μ.
    InverseIndex,
    /// ε_μ = √(N_μ/N_{μ+1})/2, derived from the block sequence.
    HalfSqrtRatio,
    Explicit { values: Vec<f64> },
}

impl EpsSpec {
    fn build(&self, blocks: &SequencePrefix) -> Result<Vec<f64>, CoreError> {
        match self {
            EpsSpec::InverseIndex => {
                Ok((1..=blocks.len()).map(|mu| 1.0 / mu as f64).collect())
            }
            EpsSpec::HalfSqrtRatio => half_sqrt_ratio_epsilons(blocks),
            EpsSpec::Explicit { values } => Ok(values.clone()),
        }
    }
}

#[derive(Serialize)]
struct SequencesReport<T: Serialize> {
    schema: u32,
    command: &'static str,
    params: ParamsEcho,
    task: &'static str,
    result: T,
}

fn cmd_sequences(g: &GlobalOpts, path: &PathBuf) -> Result<bool, CoreError> {
    let job: SequenceJob = serde_json::from_str(&read_file(path)?)
        .map_err(|e| CoreError::Parse(format!("sequence spec: {e}")))?;
    match job {
        SequenceJob::Extend {
            source_n,
            source_m,
            target_n,
            target_m,
            block_errors,
        } => {
            let source = RatePair::new(
                SequencePrefix::from_spec(&source_n)?,
                SequencePrefix::from_spec(&source_m)?,
            )?;
            let target = RatePair::new(
                SequencePrefix::from_spec(&target_n)?,
                SequencePrefix::from_spec(&target_m)?,
            )?;
            let eps = block_errors.build(&source.n_seq)?;
            let delta = DeltaFunction::from_blocks(&source.n_seq, &eps)?;
            let transcript = extend_coding(&delta, &source, &target)?;
            let ok = transcript.all_certified_from.is_some();
            let pretty = format!(
                "extension transcript: {} certified / {} rows; tail certified from ν = {:?}\n\
                 target tail sup rate {:.4} < source tail inf rate {:.4}",
                transcript.certified,
                transcript.rows.len(),
                transcript.all_certified_from,
                transcript.target_tail_sup_rate,
                transcript.source_tail_inf_rate
            );
            let report = SequencesReport {
                schema: SCHEMA_VERSION,
                command: "sequences",
                params: g.into(),
                task: "extend",
                result: transcript,
            };
            emit(g, &report, pretty);
            Ok(ok)
        }
        SequenceJob::Counterexample {
            blocks,
            block_errors,
            mu_lo,
            mu_hi,
        } => {
            let prefix = SequencePrefix::from_spec(&blocks)?;
            let eps = block_errors.build(&prefix)?;
            // construction re-checks monotonicity/subadditivity on the grid
            let _delta = counterexample_delta(&prefix, &eps)?;
            let rows = counterexample_demonstration(mu_lo, mu_hi)?;
            let pretty = rows
                .iter()
                .map(|r| {
                    format!(
                        "μ = {}: Δ(n_μ, m_μ) = {:.4} with rate m/n = {:.3e}",
                        r.mu, r.delta, r.rate
                    )
                })
                .collect::<Vec<_>>()
                .join("\n");
            let report = SequencesReport {
                schema: SCHEMA_VERSION,
                command: "sequences",
                params: g.into(),
                task: "counterexample",
                result: rows,
            };
            emit(g, &report, pretty);
            Ok(true)
        }
    }
}

#[derive(Serialize)]
struct VerifyCliReport {
    schema: u32,
    command: &'static str,
    params: ParamsEcho,
    suites: Vec<qcap_core::verify::SuiteReport>,
    passed: bool,
}

fn cmd_verify(g: &GlobalOpts, suite: &str) -> Result<bool, CoreError> {
    let cfg = VerifyConfig {
        seed: g.seed,
        restarts: g.restarts.min(64),
        samples: g.samples,
    };
    let suites = run_suite(suite, &cfg)?;
    let passed = suites.iter().all(|s| s.passed);
    let mut pretty = String::new();
    for s in &suites {
        pretty.push_str(&format!(
            "suite {} (seed {}): {}\n",
            s.suite,
            s.seed,
            if s.passed { "pass" } else { "FAIL" }
        ));
        for c in &s.checks {
            pretty.push_str(&format!(
                "  [{}] {} — {}\n",
                if c.pass { "ok" } else { "FAIL" },
                c.name,
                c.detail
            ));
        }
    }
    pretty.pop();
    let report = VerifyCliReport {
        schema: SCHEMA_VERSION,
        command: "verify",
        params: g.into(),
        suites,
        passed,
    };
    emit(g, &report, pretty);
    Ok(passed)
}

/// Density-operator helper kept for the report DTOs.
#[allow(dead_code)]
fn density_dto(rho: &DensityOperator) -> Vec<Vec<[f64; 2]>> {
    matrix_dto(rho.matrix())
}
