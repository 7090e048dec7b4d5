//! `lpbounds`: batch evaluation of L^p triangle-inequality refinements.
//!
//! Exit status is 0 when every check holds, 1 when a violation survives the
//! multiprecision recheck and 2 on usage or input errors.

mod files;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lpbounds::check::{CheckOutcome, TolerancePolicy, Verdict};
use lpbounds::harness::{
    catalog, ensemble_compare_with, verify_suite, CheckInput, EnsembleOptions, GeneratorSpec, InequalityId,
    SuiteConfig, VerdictCounts,
};
use lpbounds::measure::Regime;
use lpbounds::multi::summability_report;
use lpbounds::pairwise::{gamma_p, theorem1_check_with, BoundReport, PairInput};
use lpbounds::search::{mooney_witness, optimize, Objective, SearchProblem, WitnessRequest};
use serde::{Deserialize, Serialize};

use files::{emit, parse, read_document, read_text, to_json, Document, PairFile, SequenceSpec};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Output(String),
    #[error(transparent)]
    Library(#[from] lpbounds::error::Error),
}

#[derive(Parser)]
#[command(
    name = "lpbounds",
    version,
    about = "Sharp refinements of the L^p triangle inequality on finite measure spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Report path; `.json` gives a structured report, anything else CSV. Defaults to stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Relative equality tolerance.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every applicable inequality on a pair or family file.
    Eval {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run the default verification suite on generated inputs.
    Verify {
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest number of atoms per generated space.
        #[arg(long, default_value_t = 32)]
        atoms: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Compare the tightness of the two-function upper and lower bounds.
    Compare {
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        atoms: usize,
        /// Generator spec file holding one spec or a list; IID by default.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Search for extremal pairs.
    Search {
        /// Objective name, e.g. `max_gap_sandwich_minus_mooney`.
        #[arg(long)]
        spec: String,
        #[arg(long)]
        p: f64,
        /// Atoms of the searched space.
        #[arg(long, default_value_t = 4)]
        atoms: usize,
        #[arg(long, default_value_t = 2000)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Pair file used as an extra starting point.
        #[arg(long)]
        input: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Build a pair attaining equality in the Mooney bound with `Γ = 2 alpha`.
    Witness {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        p: f64,
        /// Pair file to write; the equality row goes to stdout.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Tabulate the n-function quantities of a sequence for n up to `nmax`
    /// (or the length of an explicit list).
    Sequence {
        /// Sequence spec file.
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 1000)]
        nmax: usize,
        #[command(flatten)]
        common: Common,
    },
}

/// One CSV report line.
#[derive(Debug, Serialize)]
struct ReportRow<'a> {
    id: &'a str,
    regime: &'a str,
    lhs: f64,
    rhs: f64,
    margin: f64,
    verdict: &'a str,
    tier: &'a str,
}

#[derive(Debug, Serialize)]
struct Row {
    id: InequalityId,
    regime: Regime,
    outcome: CheckOutcome,
}

impl Row {
    fn csv(&self) -> ReportRow<'_> {
        ReportRow {
            id: self.id.as_str(),
            regime: self.regime.as_str(),
            lhs: self.outcome.lhs,
            rhs: self.outcome.rhs,
            margin: self.outcome.margin,
            verdict: self.outcome.verdict.as_str(),
            tier: self.outcome.precision_tier.as_str(),
        }
    }
}

fn csv_bytes(rows: &[Row]) -> Result<Vec<u8>, CliError> {
    let err = |e: csv::Error| CliError::Output(e.to_string());
    // headers are written by hand so that an empty report still has them
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(["id", "regime", "lhs", "rhs", "margin", "verdict", "tier"])
        .map_err(err)?;
    for r in rows {
        w.serialize(r.csv()).map_err(err)?;
    }
    w.into_inner().map_err(|e| CliError::Output(e.to_string()))
}

fn is_json(path: Option<&Path>) -> bool {
    path.and_then(|p| p.extension())
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

fn policy(tol: f64) -> Result<TolerancePolicy, CliError> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(CliError::Input(format!("--tol {tol} must be finite and positive")));
    }
    Ok(TolerancePolicy::new(tol))
}

fn status(rows: &[Row]) -> ExitCode {
    if rows.iter().any(|r| r.outcome.verdict == Verdict::ConfirmedViolation) {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn run_keys(input: &CheckInput, ids: &[InequalityId], policy: &TolerancePolicy) -> Result<Vec<Row>, CliError> {
    let mut rows = Vec::new();
    for &id in ids {
        match catalog::check(id, input, policy) {
            Ok(outcome) => rows.push(Row {
                id,
                regime: input.regime(),
                outcome,
            }),
            Err(e) if catalog::is_not_applicable(&e) => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(rows)
}

#[derive(Serialize)]
struct EvalReport<'a> {
    p: f64,
    ratio: Option<f64>,
    gamma: Option<f64>,
    bounds: Option<BoundReport>,
    rows: &'a [Row],
}

fn eval(input: &Path, common: &Common) -> Result<ExitCode, CliError> {
    let policy = policy(common.tol)?;
    let (check_input, pair) = match read_document(input)? {
        Document::Pair(file) => {
            let pair = file.to_pair(input)?;
            (CheckInput::Pair(pair.clone()), Some(pair))
        }
        Document::Family(file) => {
            let (functions, p) = file.to_functions(input)?;
            (CheckInput::Family { functions, p }, None)
        }
    };
    let ids: Vec<InequalityId> = match &check_input {
        CheckInput::Pair(_) => InequalityId::ALL.to_vec(),
        _ => vec![
            InequalityId::Eq7MooneySum,
            InequalityId::Thm2Upper,
            InequalityId::Thm2Lower,
            InequalityId::Lemma21Chain,
        ],
    };
    let ids: Vec<_> = ids
        .into_iter()
        .filter(|id| *id != InequalityId::Lemma31Scalar)
        .collect();
    let rows = run_keys(&check_input, &ids, &policy)?;
    let out = common.output.as_deref();
    let bytes = if is_json(out) {
        let bounds = pair.as_ref().and_then(|pr| theorem1_check_with(pr, &policy).ok());
        to_json(&EvalReport {
            p: check_input.p(),
            ratio: pair.as_ref().map(PairInput::ratio),
            gamma: pair.as_ref().map(|pr| gamma_p(pr).gamma),
            bounds,
            rows: &rows,
        })?
    } else {
        csv_bytes(&rows)?
    };
    emit(out, &bytes)?;
    Ok(status(&rows))
}

fn verify(p: f64, trials: usize, seed: u64, atoms: usize, common: &Common) -> Result<ExitCode, CliError> {
    if atoms < 2 {
        return Err(CliError::Input(format!("--atoms {atoms} must be at least 2")));
    }
    let cfg = SuiteConfig {
        max_atoms: atoms,
        policy: policy(common.tol)?,
        ..SuiteConfig::new(p, trials, seed)
    };
    let records = verify_suite(&cfg)?;
    let counts = VerdictCounts::tally(&records);
    let rows: Vec<Row> = records
        .iter()
        .map(|r| Row {
            id: r.id,
            regime: r.regime,
            outcome: r.outcome,
        })
        .collect();
    let out = common.output.as_deref();
    #[derive(Serialize)]
    struct VerifyReport<'a> {
        p: f64,
        trials: usize,
        seed: u64,
        counts: VerdictCounts,
        rows: &'a [Row],
    }
    let bytes = if is_json(out) {
        to_json(&VerifyReport {
            p,
            trials,
            seed,
            counts,
            rows: &rows,
        })?
    } else {
        csv_bytes(&rows)?
    };
    emit(out, &bytes)?;
    eprintln!(
        "{} checks: {} strict, {} equality, {} candidate, {} confirmed violation, {} rechecked",
        counts.total(),
        counts.strict_hold,
        counts.equality_within_tol,
        counts.violation_candidate,
        counts.confirmed_violation,
        counts.escalated
    );
    Ok(status(&rows))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SpecList {
    One(GeneratorSpec),
    Many(Vec<GeneratorSpec>),
}

fn compare(
    p: f64,
    trials: usize,
    seed: u64,
    atoms: usize,
    spec: Option<&Path>,
    common: &Common,
) -> Result<ExitCode, CliError> {
    let specs = match spec {
        Some(path) => {
            let text = read_text(path)?;
            match parse::<SpecList>(path, &text)? {
                SpecList::One(s) => vec![s],
                SpecList::Many(v) => v,
            }
        }
        None => vec![GeneratorSpec::iid(atoms, seed)],
    };
    for s in &specs {
        s.validate()?;
    }
    let opts = EnsembleOptions {
        policy: policy(common.tol)?,
        ..EnsembleOptions::default()
    };
    let stats = ensemble_compare_with(p, trials, &specs, &opts)?;
    emit(common.output.as_deref(), &to_json(&stats)?)?;
    Ok(if stats.failed_trials > 0 {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

#[allow(clippy::too_many_arguments)]
fn search(
    objective: &str,
    p: f64,
    atoms: usize,
    budget: usize,
    seed: u64,
    input: Option<&Path>,
    common: &Common,
) -> Result<ExitCode, CliError> {
    let objective: Objective = objective.parse()?;
    let mut problem = SearchProblem::new(objective, atoms, p, budget, seed);
    if let Some(path) = input {
        let text = read_text(path)?;
        let file: PairFile = parse(path, &text)?;
        let pair = file.to_pair(path)?;
        problem = problem.with_start(pair.f().values().to_vec(), pair.g().values().to_vec());
    }
    let result = optimize(&problem)?;
    emit(common.output.as_deref(), &to_json(&result)?)?;
    Ok(if result.defect {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

fn witness(alpha: f64, p: f64, output: Option<&Path>, tol: f64) -> Result<ExitCode, CliError> {
    let pair = mooney_witness(WitnessRequest { alpha, p })?;
    let policy = policy(tol)?;
    let input = CheckInput::Pair(pair.clone());
    let rows = run_keys(&input, &[InequalityId::Eq5Mooney], &policy)?;
    let file = to_json(&PairFile::from_pair(&pair))?;
    let table = csv_bytes(&rows)?;
    match output {
        Some(path) => {
            files::write_atomic(path, &file)?;
            emit(None, &table)?;
        }
        None => {
            emit(None, &file)?;
            eprint!("{}", String::from_utf8_lossy(&table));
        }
    }
    Ok(if rows.iter().all(|r| r.outcome.is_equality()) {
        status(&rows)
    } else {
        ExitCode::from(1)
    })
}

fn sequence(spec: &Path, p: f64, nmax: usize, common: &Common) -> Result<ExitCode, CliError> {
    let text = read_text(spec)?;
    let seq: SequenceSpec = parse(spec, &text)?;
    let family = seq.to_family(spec, nmax)?;
    let report = summability_report(&family, p)?;
    emit(common.output.as_deref(), &to_json(&report)?)?;
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match &cli.command {
        Command::Eval { input, common } => eval(input, common),
        Command::Verify {
            p,
            trials,
            seed,
            atoms,
            common,
        } => verify(*p, *trials, *seed, *atoms, common),
        Command::Compare {
            p,
            trials,
            seed,
            atoms,
            spec,
            common,
        } => compare(*p, *trials, *seed, *atoms, spec.as_deref(), common),
        Command::Search {
            spec,
            p,
            atoms,
            budget,
            seed,
            input,
            common,
        } => search(spec, *p, *atoms, *budget, *seed, input.as_deref(), common),
        Command::Witness { alpha, p, output, tol } => witness(*alpha, *p, output.as_deref(), *tol),
        Command::Sequence { spec, p, nmax, common } => sequence(spec, *p, *nmax, common),
    }
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("lpbounds: {e}");
            ExitCode::from(2)
        }
    }
}
