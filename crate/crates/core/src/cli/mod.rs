//! The `qamp` command-line front end.
//!
//! Exit codes: 0 success, 1 I/O or internal failure, 2 unusable input or
//! parameter, 3 dimension mismatch, 4 normalization estimate undefined,
//! 5 verification failure.

pub mod json;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::complexmat::{dagger_oracle, prepare, PreparedMatrix, DEFAULT_SLACK, ORACLE_TOLERANCE};
use crate::conjugator::hermitian_conjugate;
use crate::encoder::{decode, encode, EncodedBlock};
use crate::error::Error;
use crate::estimator::estimate_g;
use crate::multiplier::{run_pipeline, Manipulations};
use crate::registers::RegisterLayout;
use crate::resources::resource_report;

use json::{complex_value, matrix_value, parse_matrix_file, prepared_file_value, raw_file_value, to_json_line, MatrixFile};

pub const TOOL: &str = "qamp";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Tolerance for the conjugation round trip check.
pub const CONJUGATE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Parser)]
#[command(name = "qamp", version, about = "Amplitude-encoded complex matrix multiplication on a statevector simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Scale a matrix by 1/(s + c) and add the slack amplitude.
    Prepare {
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SLACK, allow_negative_numbers = true)]
        c: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Multiply two matrices through the circuit and report the product.
    Multiply {
        a: PathBuf,
        b: PathBuf,
        #[command(flatten)]
        manipulations: ManipulationArgs,
        /// Select the manipulations through control qubits.
        #[arg(long)]
        controlled: bool,
        /// Slack parameter for inputs that are not prepared yet.
        #[arg(long, default_value_t = DEFAULT_SLACK, allow_negative_numbers = true)]
        c: f64,
        #[command(flatten)]
        verify: VerifyArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Hermitian-conjugate a matrix through its encoding.
    Conjugate {
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SLACK, allow_negative_numbers = true)]
        c: f64,
        #[command(flatten)]
        verify: VerifyArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Estimate the normalization G from sampled slack-branch measurements.
    EstimateG {
        a: PathBuf,
        b: PathBuf,
        #[command(flatten)]
        manipulations: ManipulationArgs,
        #[arg(long, default_value_t = 100_000)]
        shots: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_SLACK, allow_negative_numbers = true)]
        c: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print qubit, gate and depth counts.
    Report {
        #[arg(long)]
        n: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, Args)]
pub struct ManipulationArgs {
    /// Use the conjugate transpose of the first matrix.
    #[arg(long)]
    pub dagger_a: bool,
    /// Use the conjugate transpose of the second matrix.
    #[arg(long)]
    pub dagger_b: bool,
    /// Exchange the factors.
    #[arg(long)]
    pub swap_order: bool,
}

impl From<ManipulationArgs> for Manipulations {
    fn from(m: ManipulationArgs) -> Self {
        Manipulations::new(m.dagger_a, m.dagger_b, m.swap_order)
    }
}

#[derive(Debug, Clone, Copy, Args)]
pub struct VerifyArgs {
    /// Check the result against the classical oracle (default).
    #[arg(long, overrides_with = "no_verify")]
    verify: bool,
    /// Skip the oracle check.
    #[arg(long, overrides_with = "verify")]
    no_verify: bool,
}

impl VerifyArgs {
    pub fn enabled(&self) -> bool {
        !self.no_verify
    }
}

#[derive(Debug)]
enum Failure {
    Io(String),
    Input(String),
    Lib(Error),
    Verification(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Input(_) => 2,
            Failure::Verification(_) => 5,
            Failure::Lib(e) => match e {
                Error::Parameter(_) | Error::Validation(_) | Error::Manipulation(_) => 2,
                Error::Dimension(_) | Error::Layout(_) => 3,
                Error::MethodUndefined { .. } | Error::EstimateUnavailable { .. } => 4,
                Error::Qubit(_) | Error::Measurement { .. } => 1,
            },
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Io(m) | Failure::Input(m) | Failure::Verification(m) => m.clone(),
            Failure::Lib(e @ Error::MethodUndefined { .. }) => format!(
                "{e}; both inputs need a nonzero slack amplitude b for G to be recoverable from the slack branch"
            ),
            Failure::Lib(e) => e.to_string(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

/// Parses `args`, runs one command, and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if code == 0 { out } else { err };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    let pool = match thread_pool() {
        Ok(p) => p,
        Err(f) => return report_failure(&f, err),
    };
    let outcome = match pool.install(|| execute(&cli.command)) {
        Ok(o) => o,
        Err(f) => return report_failure(&f, err),
    };
    if let Err(f) = emit(&outcome.text, outcome.path.as_deref(), out) {
        return report_failure(&f, err);
    }
    match outcome.failure {
        Some(f) => report_failure(&f, err),
        None => 0,
    }
}

/// What a command produced: the text, where it goes, and a failure to raise
/// after writing it.
struct Outcome {
    text: String,
    path: Option<PathBuf>,
    failure: Option<Failure>,
}

impl Outcome {
    fn written(text: String, path: &Option<PathBuf>) -> Self {
        Self {
            text,
            path: path.clone(),
            failure: None,
        }
    }
}

fn report_failure(f: &Failure, err: &mut dyn Write) -> u8 {
    let _ = writeln!(err, "{TOOL}: error: {}", f.message());
    f.code()
}

fn thread_pool() -> Result<rayon::ThreadPool, Failure> {
    let threads = match std::env::var("QAMP_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| Failure::Input(format!("QAMP_THREADS = {v:?} is not a nonnegative integer")))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Failure::Io(format!("cannot start worker threads: {e}")))
}

fn read_matrix(path: &Path) -> Result<MatrixFile, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    parse_matrix_file(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn prepared(file: MatrixFile, c: f64) -> Result<PreparedMatrix, Failure> {
    match file {
        MatrixFile::Raw(m) => Ok(prepare(&m, c)?),
        MatrixFile::Prepared(pm) => Ok(pm),
    }
}

fn emit(text: &str, path: Option<&Path>, out: &mut dyn Write) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Io(format!("stdout: {e}"))),
    }
}

fn path_value(p: &Option<PathBuf>) -> Value {
    p.as_ref().map_or(Value::Null, |p| Value::String(p.display().to_string()))
}

fn header(command: &str, flags: Value) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("tool".into(), TOOL.into());
    m.insert("version".into(), VERSION.into());
    m.insert("command".into(), command.into());
    m.insert("flags".into(), flags);
    m
}

fn execute(command: &Command) -> Result<Outcome, Failure> {
    match command {
        Command::Prepare { input, c, output } => {
            let pm = prepared_from_raw(read_matrix(input)?, *c)?;
            Ok(Outcome::written(to_json_line(&prepared_file_value(&pm)), output))
        }
        Command::Multiply {
            a,
            b,
            manipulations,
            controlled,
            c,
            verify,
            output,
        } => {
            let pm1 = prepared(read_matrix(a)?, *c)?;
            let pm2 = prepared(read_matrix(b)?, *c)?;
            if pm1.n() != pm2.n() {
                return Err(Error::Dimension(format!(
                    "{} has n = {} but {} has n = {}",
                    a.display(),
                    pm1.n(),
                    b.display(),
                    pm2.n()
                ))
                .into());
            }
            let layout = RegisterLayout::new(pm1.n(), *controlled)?;
            let m = Manipulations::from(*manipulations);
            let res = run_pipeline(&pm1, &pm2, m, &layout)?;
            let flags = json!({
                "a": a.display().to_string(),
                "b": b.display().to_string(),
                "dagger_a": m.dagger_first,
                "dagger_b": m.dagger_second,
                "swap_order": m.swap_order,
                "controlled": controlled,
                "c": c,
                "verify": verify.enabled(),
                "output": path_value(output),
            });
            let mut report = header("multiply", flags);
            report.insert("n".into(), pm1.n().into());
            report.insert("layout".into(), serde_json::to_value(layout.summary()).expect("layout summary"));
            report.insert("matrix_hat".into(), matrix_value(&res.matrix_hat));
            report.insert("matrix_recovered".into(), matrix_value(&res.recovered()));
            report.insert("scale_back".into(), res.scale_back.into());
            report.insert("b_hat".into(), complex_value(res.b_hat));
            report.insert("g".into(), res.g_exact.into());
            report.insert("branch_probability".into(), res.branch_probability.into());
            report.insert("residual".into(), res.residual.into());
            let failed = verify.enabled() && !(res.oracle_error <= ORACLE_TOLERANCE);
            if verify.enabled() {
                report.insert(
                    "verification".into(),
                    json!({
                        "oracle_error": res.oracle_error,
                        "max_error_at": [res.oracle_error_at.0, res.oracle_error_at.1],
                        "tolerance": ORACLE_TOLERANCE,
                        "passed": !failed,
                    }),
                );
            }
            let mut outcome = Outcome::written(to_json_line(&Value::Object(report)), output);
            if failed {
                outcome.failure = Some(Failure::Verification(format!(
                    "oracle error {:e} at entry ({}, {}) exceeds {ORACLE_TOLERANCE:e}",
                    res.oracle_error, res.oracle_error_at.0, res.oracle_error_at.1
                )));
            }
            Ok(outcome)
        }
        Command::Conjugate {
            input,
            c,
            verify,
            output,
        } => {
            let file = read_matrix(input)?;
            let (text, error, at) = match file {
                MatrixFile::Raw(m) => {
                    let pm = prepare(&m, *c)?;
                    let conj = conjugate_prepared(&pm)?;
                    let result = conj.matrix().scale(pm.scale_back());
                    let (error, at) = result.max_abs_diff(&dagger_oracle(&m))?;
                    (to_json_line(&raw_file_value(&result)), error, at)
                }
                MatrixFile::Prepared(pm) => {
                    let conj = conjugate_prepared(&pm)?;
                    let (error, at) = conj.matrix().max_abs_diff(&dagger_oracle(pm.matrix()))?;
                    (to_json_line(&prepared_file_value(&conj)), error, at)
                }
            };
            let mut outcome = Outcome::written(text, output);
            if verify.enabled() && !(error <= CONJUGATE_TOLERANCE) {
                outcome.failure = Some(Failure::Verification(format!(
                    "conjugate differs from the oracle by {error:e} at entry ({}, {})",
                    at.0, at.1
                )));
            }
            Ok(outcome)
        }
        Command::EstimateG {
            a,
            b,
            manipulations,
            shots,
            seed,
            c,
            output,
        } => {
            let pm1 = prepared(read_matrix(a)?, *c)?;
            let pm2 = prepared(read_matrix(b)?, *c)?;
            if pm1.n() != pm2.n() {
                return Err(Error::Dimension(format!("n = {} and n = {} differ", pm1.n(), pm2.n())).into());
            }
            let m = Manipulations::from(*manipulations);
            let est = estimate_g(&pm1, &pm2, m, *shots, *seed)?;
            let flags = json!({
                "a": a.display().to_string(),
                "b": b.display().to_string(),
                "dagger_a": m.dagger_first,
                "dagger_b": m.dagger_second,
                "swap_order": m.swap_order,
                "shots": shots,
                "seed": seed,
                "c": c,
                "output": path_value(output),
            });
            let mut report = header("estimate-g", flags);
            if let Value::Object(fields) = serde_json::to_value(&est).expect("estimate fields") {
                report.extend(fields);
            }
            Ok(Outcome::written(to_json_line(&Value::Object(report)), output))
        }
        Command::Report { n, output } => {
            if *n < 1 {
                return Err(Failure::Input("--n must be at least 1".into()));
            }
            let mut report = header("report", json!({ "n": n, "output": path_value(output) }));
            report.insert(
                "resources".into(),
                serde_json::to_value(resource_report(*n)?).expect("resource report"),
            );
            Ok(Outcome::written(to_json_line(&Value::Object(report)), output))
        }
    }
}

fn prepared_from_raw(file: MatrixFile, c: f64) -> Result<PreparedMatrix, Failure> {
    match file {
        MatrixFile::Raw(m) => Ok(prepare(&m, c)?),
        MatrixFile::Prepared(_) => Err(Failure::Input(
            "input is already prepared (it has b, s_original and c fields)".into(),
        )),
    }
}

fn conjugate_prepared(pm: &PreparedMatrix) -> Result<PreparedMatrix, Failure> {
    let block = EncodedBlock::standalone(pm.n())?;
    let state = hermitian_conjugate(encode(pm, &block)?, &block)?;
    let d = decode(&state, &block)?;
    Ok(PreparedMatrix::from_parts(d.matrix, d.b, pm.s_original(), pm.c())?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (u8, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("qamp").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn version_and_help_exit_zero() {
        let (code, out, _) = run_capture(&["--version"]);
        assert_eq!(code, 0);
        assert!(out.contains(VERSION));
        assert_eq!(run_capture(&["--help"]).0, 0);
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run_capture(&[]).0, 2);
        assert_eq!(run_capture(&["multiply"]).0, 2);
        assert_eq!(run_capture(&["report", "--n", "x"]).0, 2);
    }

    #[test]
    fn report_command() {
        let (code, out, _) = run_capture(&["report", "--n", "2"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["resources"]["qubits"], 14);
        assert_eq!(v["tool"], TOOL);
        assert_eq!(v["flags"]["n"], 2);
        assert_eq!(run_capture(&["report", "--n", "0"]).0, 2);
    }

    #[test]
    fn verify_flag_defaults_on() {
        let cli = Cli::try_parse_from(["qamp", "conjugate", "x.json"]).unwrap();
        let Command::Conjugate { verify, .. } = cli.command else { panic!() };
        assert!(verify.enabled());
        let cli = Cli::try_parse_from(["qamp", "conjugate", "x.json", "--no-verify"]).unwrap();
        let Command::Conjugate { verify, .. } = cli.command else { panic!() };
        assert!(!verify.enabled());
        let cli = Cli::try_parse_from(["qamp", "conjugate", "x.json", "--no-verify", "--verify"]).unwrap();
        let Command::Conjugate { verify, .. } = cli.command else { panic!() };
        assert!(verify.enabled());
    }

    #[test]
    fn failure_codes() {
        assert_eq!(Failure::Lib(Error::Dimension(String::new())).code(), 3);
        assert_eq!(Failure::Lib(Error::Parameter(String::new())).code(), 2);
        assert_eq!(Failure::Lib(Error::MethodUndefined { s1: 0.0 }).code(), 4);
        assert_eq!(Failure::Verification(String::new()).code(), 5);
        assert_eq!(Failure::Io(String::new()).code(), 1);
    }

    #[test]
    fn missing_file_is_io_error() {
        let (code, _, err) = run_capture(&["prepare", "/nonexistent/matrix.json"]);
        assert_eq!(code, 1);
        assert!(err.starts_with("qamp: error:"));
        assert_eq!(err.lines().count(), 1);
    }
}
