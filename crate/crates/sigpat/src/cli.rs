//! Batch command-line frontend: reads transaction, label, and optional
//! matrix files, runs calibration, extraction, baseline comparison, or
//! the FWER-vs-J sweep, and writes one machine-readable report.
//!
//! Reports are built in memory and written in a single call, so a failing
//! run never leaves a partial file behind. All randomness flows from
//! `--seed`; two invocations with the same flags produce byte-identical
//! output (the comparison's wall-clock column is the one exception).

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analysis::{fwer_sweep, sweep_csv, SupportHistogram};
use crate::baselines::{bonferroni_threshold, fastwy_threshold, tarone_lamp_threshold};
use crate::engine::{compute_threshold, extract_significant, CalibrationResult};
use crate::error::{Error, Result};
use crate::exact_test::{PValueMode, PsiTable};
use crate::miner::{enumerate_frequent, parse_fimi, parse_labels, ConstantFloor, PatternEvent, TransactionDatabase};
use crate::permutation::{generate_permutations, load_permutations, LabelVector, MatrixSeed, PermutationMatrix};

#[derive(Debug, Parser)]
#[command(
    name = "sigpat",
    version,
    about = "Significant pattern mining with family-wise error control"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Calibrate the corrected significance threshold on a dataset.
    Calibrate(RunArgs),
    /// Calibrate, then report every significant pattern.
    Mine(RunArgs),
    /// Run the calibration alongside baseline correction methods.
    Compare(CompareArgs),
    /// Tabulate the empirical FWER across permutation counts.
    FwerCurve(CurveArgs),
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Transaction database: one transaction per line, space-separated
    /// item identifiers.
    #[arg(long)]
    transactions: PathBuf,

    /// Class labels: one 0 or 1 per line, aligned with the transactions.
    #[arg(long)]
    labels: PathBuf,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    input: InputArgs,

    /// Per-pattern significance level the FWER is controlled at.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,

    /// Number of label permutations J.
    #[arg(long, default_value_t = 10_000)]
    permutations: usize,

    /// Seed for permutation generation.
    #[arg(long, default_value_t = 0, conflicts_with = "matrix")]
    seed: u64,

    /// Explicit permutation matrix file: J lines of N space-separated
    /// 0/1 labels. Replaces seeded generation.
    #[arg(long)]
    matrix: Option<PathBuf>,

    /// Tail convention for Fisher's exact test.
    #[arg(long, value_enum, default_value_t = ModeArg::OneTailed)]
    mode: ModeArg,

    /// Report format.
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,

    /// Write the report here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[command(flatten)]
    run: RunArgs,

    /// Baselines to run next to the calibration engine.
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = vec![
        BaselineArg::Bonferroni,
        BaselineArg::Tarone,
        BaselineArg::Fastwy,
    ])]
    baselines: Vec<BaselineArg>,
}

#[derive(Debug, Args)]
struct CurveArgs {
    #[command(flatten)]
    input: InputArgs,

    /// Per-pattern significance level the FWER is controlled at.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,

    /// Permutation counts to sweep, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = vec![100, 1000])]
    j_list: Vec<usize>,

    /// Fresh-matrix repetitions per permutation count.
    #[arg(long, default_value_t = 10)]
    repetitions: usize,

    /// Seed for the sweep's matrix-seed stream.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Write the CSV here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    OneTailed,
    TwoTailed,
}

impl From<ModeArg> for PValueMode {
    fn from(mode: ModeArg) -> Self {
        match mode {
            ModeArg::OneTailed => PValueMode::OneTailed,
            ModeArg::TwoTailed => PValueMode::TwoTailed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum BaselineArg {
    Bonferroni,
    Tarone,
    Fastwy,
}

/// Entry point for the binary: parses arguments, runs the command, and
/// maps failures onto the documented exit codes.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Calibrate(args) => cmd_calibrate(&args),
        Command::Mine(args) => cmd_mine(&args),
        Command::Compare(args) => cmd_compare(&args),
        Command::FwerCurve(args) => cmd_fwer_curve(&args),
    }
}

/// Attributes a parse failure to the file it came from.
fn with_path(err: Error, path: &Path) -> Error {
    let name = path.display();
    match err {
        Error::MalformedInput { line, reason } => {
            Error::MalformedInput { line, reason: format!("{name}: {reason}") }
        }
        Error::MalformedMatrix { line, reason } => {
            Error::MalformedMatrix { line, reason: format!("{name}: {reason}") }
        }
        Error::DegenerateLabels { reason } => {
            Error::DegenerateLabels { reason: format!("{name}: {reason}") }
        }
        other => other,
    }
}

fn read_input(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|err| Error::MalformedInput {
        line: None,
        reason: format!("{}: {err}", path.display()),
    })
}

struct LoadedRun {
    db: TransactionDatabase,
    labels: LabelVector,
    matrix: PermutationMatrix,
    alpha: f64,
    mode: PValueMode,
}

fn load_run(args: &RunArgs) -> Result<LoadedRun> {
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(Error::InvalidConfig { reason: format!("alpha {} outside (0, 1)", args.alpha) });
    }
    if args.permutations == 0 {
        return Err(Error::InvalidConfig { reason: "permutations must be at least 1".into() });
    }
    let db = parse_fimi(&read_input(&args.input.transactions)?)
        .map_err(|e| with_path(e, &args.input.transactions))?;
    let labels = parse_labels(&read_input(&args.input.labels)?, db.transaction_count())
        .map_err(|e| with_path(e, &args.input.labels))?;
    let matrix = match &args.matrix {
        Some(path) => load_permutations(&read_input(path)?, &labels).map_err(|e| with_path(e, path))?,
        None => generate_permutations(&labels, args.permutations, args.seed),
    };
    Ok(LoadedRun { db, labels, matrix, alpha: args.alpha, mode: args.mode.into() })
}

/// `seed` report field: the generation seed, or the string "external"
/// when the matrix came from a file.
#[derive(Serialize)]
#[serde(untagged)]
enum SeedField {
    Number(u64),
    Text(&'static str),
}

impl SeedField {
    fn of(matrix: &PermutationMatrix) -> Self {
        match matrix.seed() {
            MatrixSeed::Generated(s) => SeedField::Number(s),
            MatrixSeed::External => SeedField::Text("external"),
        }
    }

    fn as_csv(&self) -> String {
        match self {
            SeedField::Number(s) => s.to_string(),
            SeedField::Text(t) => (*t).to_string(),
        }
    }
}

#[derive(Serialize)]
struct CalibrateReport {
    delta_star: f64,
    k_star: usize,
    sigma_l: usize,
    sigma_u: usize,
    n: usize,
    #[serde(rename = "N")]
    db_size: usize,
    #[serde(rename = "J")]
    permutations: usize,
    alpha: f64,
    mode: &'static str,
    flipped_labels: bool,
    fwer_at_delta_star: f64,
    patterns_visited: u64,
    testable_visited: u64,
    seed: SeedField,
}

impl CalibrateReport {
    fn new(result: &CalibrationResult, labels: &LabelVector, matrix: &PermutationMatrix) -> Self {
        CalibrateReport {
            delta_star: result.delta_star,
            k_star: result.k_star,
            sigma_l: result.sigma_l_final,
            sigma_u: result.sigma_u_final,
            n: labels.class_size(),
            db_size: labels.db_size(),
            permutations: result.permutations,
            alpha: result.alpha,
            mode: result.mode.as_str(),
            flipped_labels: result.flipped,
            fwer_at_delta_star: result.fwer_at_delta_star,
            patterns_visited: result.patterns_visited,
            testable_visited: result.testable_visited,
            seed: SeedField::of(matrix),
        }
    }

    fn csv(&self) -> String {
        let mut out = String::from(
            "delta_star,k_star,sigma_l,sigma_u,n,N,J,alpha,mode,flipped_labels,\
             fwer_at_delta_star,patterns_visited,testable_visited,seed\n",
        );
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            self.delta_star,
            self.k_star,
            self.sigma_l,
            self.sigma_u,
            self.n,
            self.db_size,
            self.permutations,
            self.alpha,
            self.mode,
            self.flipped_labels,
            self.fwer_at_delta_star,
            self.patterns_visited,
            self.testable_visited,
            self.seed.as_csv(),
        ));
        out
    }
}

fn write_report(output: Option<&PathBuf>, content: &str) -> Result<()> {
    match output {
        Some(path) => std::fs::write(path, content)?,
        None => print!("{content}"),
    }
    Ok(())
}

fn to_json(value: &impl Serialize) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    text
}

fn cmd_calibrate(args: &RunArgs) -> Result<()> {
    let run = load_run(args)?;
    let result = compute_threshold(&run.db, &run.labels, &run.matrix, run.alpha, run.mode)?;
    let report = CalibrateReport::new(&result, &run.labels, &run.matrix);
    let content = match args.format {
        FormatArg::Json => to_json(&report),
        FormatArg::Csv => report.csv(),
    };
    write_report(args.output.as_ref(), &content)
}

#[derive(Serialize)]
struct PatternRow {
    items: Vec<u32>,
    support: usize,
    a: usize,
    pvalue: f64,
}

#[derive(Serialize)]
struct MineReport {
    #[serde(flatten)]
    calibration: CalibrateReport,
    patterns: Vec<PatternRow>,
}

fn cmd_mine(args: &RunArgs) -> Result<()> {
    let run = load_run(args)?;
    let result = compute_threshold(&run.db, &run.labels, &run.matrix, run.alpha, run.mode)?;
    let patterns: Vec<PatternRow> = extract_significant(&run.db, &run.labels, &result)
        .into_iter()
        .map(|p| PatternRow { items: p.itemset, support: p.support, a: p.minor_count, pvalue: p.pvalue })
        .collect();
    let report =
        MineReport { calibration: CalibrateReport::new(&result, &run.labels, &run.matrix), patterns };
    let content = match args.format {
        FormatArg::Json => to_json(&report),
        FormatArg::Csv => {
            let mut out = String::from("items,support,a,pvalue\n");
            for row in &report.patterns {
                let items: Vec<String> = row.items.iter().map(|i| i.to_string()).collect();
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    items.join(" "),
                    row.support,
                    row.a,
                    row.pvalue
                ));
            }
            out
        }
    };
    write_report(args.output.as_ref(), &content)
}

#[derive(Serialize)]
struct MethodRow {
    method: &'static str,
    delta: f64,
    fwer_at_delta: f64,
    stopping_support: usize,
    memory_bytes: u64,
    seconds: f64,
}

#[derive(Serialize)]
struct CompareReport {
    n: usize,
    #[serde(rename = "N")]
    db_size: usize,
    #[serde(rename = "J")]
    permutations: usize,
    alpha: f64,
    mode: &'static str,
    seed: SeedField,
    methods: Vec<MethodRow>,
}

fn cmd_compare(args: &CompareArgs) -> Result<()> {
    let run = load_run(&args.run)?;
    let db_size = run.labels.db_size();
    let class_size = run.labels.class_size();
    let psi = PsiTable::new(class_size, db_size);

    let started = Instant::now();
    let engine = compute_threshold(&run.db, &run.labels, &run.matrix, run.alpha, run.mode)?;
    let engine_seconds = started.elapsed().as_secs_f64();

    let mut methods = Vec::new();
    methods.push(MethodRow {
        method: "wylight",
        delta: engine.delta_star,
        fwer_at_delta: engine.fwer_at_delta_star,
        stopping_support: engine.sigma_l_final,
        memory_bytes: db_size as u64 * engine.permutations as u64,
        seconds: engine_seconds,
    });

    for baseline in &args.baselines {
        match baseline {
            BaselineArg::Bonferroni => {
                let started = Instant::now();
                // Bonferroni divides by the full lattice size, which a
                // plain frequent-pattern pass at floor 1 counts
                let mut all = ConstantFloor { floor: 1, callback: |_: &PatternEvent| {} };
                let count = enumerate_frequent(&run.db, &mut all).max(1);
                let delta = bonferroni_threshold(count, run.alpha);
                methods.push(MethodRow {
                    method: "bonferroni",
                    delta,
                    fwer_at_delta: engine.min_pvalues.empirical_fwer(delta),
                    stopping_support: psi.support_floor(delta).unwrap_or(0),
                    memory_bytes: 0,
                    seconds: started.elapsed().as_secs_f64(),
                });
            }
            BaselineArg::Tarone => {
                let started = Instant::now();
                let (delta, _m) = tarone_lamp_threshold(&run.db, class_size, db_size, run.alpha);
                methods.push(MethodRow {
                    method: "tarone",
                    delta,
                    fwer_at_delta: engine.min_pvalues.empirical_fwer(delta),
                    stopping_support: psi.support_floor(delta).unwrap_or(0),
                    memory_bytes: 0,
                    seconds: started.elapsed().as_secs_f64(),
                });
            }
            BaselineArg::Fastwy => {
                let started = Instant::now();
                let (delta, mins, sigma_worst) =
                    fastwy_threshold(&run.db, &run.labels, &run.matrix, run.alpha, run.mode)?;
                // price the occurrence lists FastWY would retain at its
                // deepest floor: four bytes per stored transaction index
                let hist = SupportHistogram::mined(&run.db, sigma_worst);
                let cost: u64 = hist
                    .counts()
                    .iter()
                    .enumerate()
                    .skip(sigma_worst)
                    .map(|(x, &c)| x as u64 * c)
                    .sum();
                methods.push(MethodRow {
                    method: "fastwy",
                    delta,
                    fwer_at_delta: mins.empirical_fwer(delta),
                    stopping_support: sigma_worst,
                    memory_bytes: 4 * cost,
                    seconds: started.elapsed().as_secs_f64(),
                });
            }
        }
    }

    let report = CompareReport {
        n: class_size,
        db_size,
        permutations: run.matrix.permutations(),
        alpha: run.alpha,
        mode: run.mode.as_str(),
        seed: SeedField::of(&run.matrix),
        methods,
    };
    let content = match args.run.format {
        FormatArg::Json => to_json(&report),
        FormatArg::Csv => {
            let mut out = String::from("method,delta,fwer_at_delta,stopping_support,memory_bytes,seconds\n");
            for row in &report.methods {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    row.method,
                    row.delta,
                    row.fwer_at_delta,
                    row.stopping_support,
                    row.memory_bytes,
                    row.seconds
                ));
            }
            out
        }
    };
    write_report(args.run.output.as_ref(), &content)
}

fn cmd_fwer_curve(args: &CurveArgs) -> Result<()> {
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(Error::InvalidConfig { reason: format!("alpha {} outside (0, 1)", args.alpha) });
    }
    let db = parse_fimi(&read_input(&args.input.transactions)?)
        .map_err(|e| with_path(e, &args.input.transactions))?;
    let labels = parse_labels(&read_input(&args.input.labels)?, db.transaction_count())
        .map_err(|e| with_path(e, &args.input.labels))?;
    let rows = fwer_sweep(&db, &labels, args.alpha, &args.j_list, args.repetitions, args.seed)?;
    write_report(args.output.as_ref(), &sweep_csv(&rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::error::ErrorKind;

    fn parse(line: &[&str]) -> std::result::Result<Cli, clap::Error> {
        Cli::try_parse_from(line)
    }

    #[test]
    fn defaults_follow_the_standard_conventions() {
        let cli = parse(&["sigpat", "calibrate", "--transactions", "t.dat", "--labels", "l.dat"])
            .unwrap();
        let Command::Calibrate(args) = cli.command else { panic!("wrong command") };
        assert_eq!(args.alpha, 0.05);
        assert_eq!(args.permutations, 10_000);
        assert_eq!(args.seed, 0);
        assert!(args.matrix.is_none());
        assert!(args.mode == ModeArg::OneTailed);
        assert!(args.format == FormatArg::Json);
        assert!(args.output.is_none());
    }

    #[test]
    fn seed_and_matrix_are_mutually_exclusive() {
        let err = parse(&[
            "sigpat", "calibrate", "--transactions", "t", "--labels", "l", "--seed", "7",
            "--matrix", "m.txt",
        ])
        .unwrap_err();
        assert_eq!(err.kind(), ErrorKind::ArgumentConflict);

        // either alone is fine
        assert!(parse(&[
            "sigpat", "calibrate", "--transactions", "t", "--labels", "l", "--matrix", "m.txt"
        ])
        .is_ok());
        assert!(parse(&[
            "sigpat", "calibrate", "--transactions", "t", "--labels", "l", "--seed", "7"
        ])
        .is_ok());
    }

    #[test]
    fn compare_accepts_a_baseline_subset() {
        let cli = parse(&[
            "sigpat", "compare", "--transactions", "t", "--labels", "l", "--baselines",
            "tarone,fastwy",
        ])
        .unwrap();
        let Command::Compare(args) = cli.command else { panic!("wrong command") };
        assert_eq!(args.baselines, vec![BaselineArg::Tarone, BaselineArg::Fastwy]);
    }

    #[test]
    fn curve_takes_a_j_list() {
        let cli = parse(&[
            "sigpat",
            "fwer-curve",
            "--transactions",
            "t",
            "--labels",
            "l",
            "--j-list",
            "50,150",
            "--repetitions",
            "3",
        ])
        .unwrap();
        let Command::FwerCurve(args) = cli.command else { panic!("wrong command") };
        assert_eq!(args.j_list, vec![50, 150]);
        assert_eq!(args.repetitions, 3);
    }

    #[test]
    fn json_report_preserves_field_order() {
        let report = CalibrateReport {
            delta_star: 0.25,
            k_star: 2,
            sigma_l: 1,
            sigma_u: 3,
            n: 4,
            db_size: 8,
            permutations: 10,
            alpha: 0.05,
            mode: "one-tailed",
            flipped_labels: false,
            fwer_at_delta_star: 0.0,
            patterns_visited: 5,
            testable_visited: 3,
            seed: SeedField::Number(0),
        };
        let json = serde_json::to_string(&report).unwrap();
        let keys: Vec<&str> = json
            .split('"')
            .skip(1)
            .step_by(2)
            .take_while(|k| *k != "one-tailed")
            .collect();
        assert_eq!(
            keys,
            vec![
                "delta_star",
                "k_star",
                "sigma_l",
                "sigma_u",
                "n",
                "N",
                "J",
                "alpha",
                "mode"
            ]
        );
        assert!(json.contains("\"seed\":0"));

        let external = serde_json::to_string(&SeedField::Text("external")).unwrap();
        assert_eq!(external, "\"external\"");
    }

    #[test]
    fn path_attribution_keeps_the_error_class() {
        let attributed = with_path(
            Error::MalformedInput { line: Some(2), reason: "bad token".into() },
            Path::new("data/t.dat"),
        );
        match attributed {
            Error::MalformedInput { line: Some(2), reason } => {
                assert!(reason.starts_with("data/t.dat"));
            }
            other => panic!("wrong variant: {other:?}"),
        }
        assert_eq!(
            with_path(Error::Exhausted, Path::new("x")).exit_code(),
            Error::Exhausted.exit_code()
        );
    }
}
