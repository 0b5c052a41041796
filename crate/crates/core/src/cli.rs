//! Command-line front end. The binary is a thin wrapper around [`run`].
//!
//! ```text
//! pauli-deconv ptm --config CH.toml [--diagonal-only] [--format csv|json] [--out FILE]
//! pauli-deconv deconvolve --observable OBS.txt (--config CH.toml | --report REPORT.csv)
//!                         --measurements MEAS.txt [--repetitions M] [--format csv|json]
//! pauli-deconv characterize --config CH.toml [--entries full|LABEL,...] [--shots N] [--seed S]
//! pauli-deconv experiment --config EXP.toml [--shots N] [--seed S] [--format csv|json] [--out FILE]
//! pauli-deconv check-positivity (--n N [--k all|LABEL|INDEX] | --matrix FILE)
//! ```
//!
//! Relative `--out` paths are resolved against `$PAULI_DECONV_OUT_DIR` when it
//! is set. Exit codes: 0 success, 2 config or parse error, 3 mathematical
//! error (non-invertible, non-unital, failed positivity), 4 resource cap.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::channels::{Channel, ChannelConfig};
use crate::characterization::{
    estimate_diagonal, estimate_full_ptm, is_positive_semidefinite, positivity_coefficients,
    probe_state, CharacterizationMode, CharacterizedPtm,
};
use crate::deconvolution::{
    parse_measurements, plan_general_repeated, plan_pauli_repeated, DeconvolutionPlan,
    DEFAULT_COND_WARN, DEFAULT_INV_TOL,
};
use crate::error::{Error, Result};
use crate::observable::Observable;
use crate::pauli::{Operator, PauliIndex};
use crate::simulator::{records_to_csv, run_experiment, ExperimentConfig};
use crate::textio::{fmt_f64, parse_f64, tokens};

pub const OUT_DIR_ENV: &str = "PAULI_DECONV_OUT_DIR";
/// Largest `n` accepted by `check-positivity --k all`.
pub const MAX_POSITIVITY_ALL_QUBITS: usize = 4;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_MATH: i32 = 3;
pub const EXIT_CAP: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "pauli-deconv", version, about = "Pauli transfer matrices and noise deconvolution")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compute a channel's Pauli transfer matrix.
    Ptm {
        #[arg(long)]
        config: PathBuf,
        /// Emit only the diagonal (allowed up to 6 qubits).
        #[arg(long)]
        diagonal_only: bool,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recover a noiseless expectation value from noisy measurements.
    Deconvolve {
        #[arg(long)]
        observable: PathBuf,
        #[arg(long, conflicts_with = "report", required_unless_present = "report")]
        config: Option<PathBuf>,
        /// Characterization report used instead of a channel config.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        measurements: PathBuf,
        /// Number of times the channel acted on the state.
        #[arg(long, default_value_t = 1)]
        repetitions: u32,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate PTM entries from probe states.
    Characterize {
        #[arg(long)]
        config: PathBuf,
        /// `full`, or a comma-separated list of Pauli labels or indices.
        #[arg(long, default_value = "full")]
        entries: String,
        /// 0 selects exact expectations.
        #[arg(long, default_value_t = 0)]
        shots: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a repeated-noise deconvolution experiment.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `shots` from the config.
        #[arg(long)]
        shots: Option<u64>,
        /// Overrides `seed` from the config.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check probe-state positivity with the characteristic-polynomial test.
    CheckPositivity {
        #[arg(long, required_unless_present = "matrix")]
        n: Option<usize>,
        /// `all`, a Pauli label, or a flat index.
        #[arg(long, default_value = "all")]
        k: String,
        /// Whitespace-separated real matrix, one row per line.
        #[arg(long, conflicts_with = "n")]
        matrix: Option<PathBuf>,
    },
}

/// Process exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::QubitCapExceeded { .. } => EXIT_CAP,
        Error::NonInvertibleChannel { .. }
        | Error::SingularPtm { .. }
        | Error::NonUnitalChannel { .. }
        | Error::NotPositiveSemidefinite { .. }
        | Error::NotUnitTrace(_)
        | Error::NonHermitianInput { .. }
        | Error::NotTracePreserving { .. }
        | Error::ProbabilityOutOfRange(_)
        | Error::IdentityProbe => EXIT_MATH,
        _ => EXIT_CONFIG,
    }
}

/// Parses `args` (program name first) and runs the command, writing results
/// to `out` (or the `--out` file) and diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn with_path(path: &Path, e: Error) -> Error {
    match e {
        Error::Parse {
            line,
            column,
            message,
        } => Error::Parse {
            line,
            column,
            message: format!("{}: {message}", path.display()),
        },
        Error::Config(message) => Error::Config(format!("{}: {message}", path.display())),
        other => other,
    }
}

fn resolve_out(path: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if path.is_relative() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}

fn emit(text: &str, dest: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    match dest {
        Some(path) => {
            let path = resolve_out(path);
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent)?;
            }
            fs::write(&path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
        }
        None => out.write_all(text.as_bytes()).map_err(Error::from),
    }
}

fn load_channel(path: &Path) -> Result<(ChannelConfig, Channel)> {
    let cfg = ChannelConfig::from_toml_str(&read(path)?).map_err(|e| with_path(path, e))?;
    let ch = cfg.build()?;
    Ok((cfg, ch))
}

fn json_text(value: serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(&value).expect("json value serializes");
    s.push('\n');
    s
}

fn execute(cmd: Command, out: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Ptm {
            config,
            diagonal_only,
            format,
            out: dest,
        } => {
            let (_, ch) = load_channel(&config)?;
            let text = ptm_text(&ch, diagonal_only, format)?;
            emit(&text, dest.as_deref(), out)?;
            Ok(EXIT_OK)
        }
        Command::Deconvolve {
            observable,
            config,
            report,
            measurements,
            repetitions,
            format,
            out: dest,
        } => {
            let obs = Observable::parse(&read(&observable)?).map_err(|e| with_path(&observable, e))?;
            let meas = parse_measurements(&read(&measurements)?).map_err(|e| with_path(&measurements, e))?;
            let plan = match (config, report) {
                (Some(path), _) => {
                    let (_, ch) = load_channel(&path)?;
                    plan_for_channel(&obs, &ch, repetitions)?
                }
                (None, Some(path)) => {
                    let rep = CharacterizedPtm::from_report(&read(&path)?).map_err(|e| with_path(&path, e))?;
                    plan_for_report(&obs, &rep, repetitions)?
                }
                (None, None) => unreachable!("clap requires --config or --report"),
            };
            let est = plan.deconvolve_estimates(&meas)?;
            let path = if plan.is_diagonal() { "diagonal" } else { "general" };
            let text = match format {
                Format::Csv => format!(
                    "expectation,std_error,entries_consulted,path,repetitions\n{},{},{},{},{}\n",
                    fmt_f64(est.value),
                    fmt_f64(est.std_error),
                    plan.entries_consulted(),
                    path,
                    repetitions
                ),
                Format::Json => json_text(json!({
                    "expectation": est.value,
                    "std_error": est.std_error,
                    "entries_consulted": plan.entries_consulted(),
                    "path": path,
                    "repetitions": repetitions,
                    "condition_number": plan.condition_number(),
                })),
            };
            emit(&text, dest.as_deref(), out)?;
            Ok(EXIT_OK)
        }
        Command::Characterize {
            config,
            entries,
            shots,
            seed,
            format,
            out: dest,
        } => {
            let (_, ch) = load_channel(&config)?;
            let rep = if entries.trim() == "full" {
                estimate_full_ptm(&ch, shots, seed)?
            } else {
                let ks = parse_entry_list(&entries, ch.n())?;
                estimate_diagonal(&ch, &ks, shots, seed)?
            };
            let text = match format {
                Format::Csv => rep.to_report(),
                Format::Json => json_text(json!({
                    "n": rep.n(),
                    "mode": rep.mode(),
                    "shots": rep.shots(),
                    "seed": rep.seed(),
                    "probes": rep.probe_count(),
                    "entries": rep.entries().iter().map(|((j, k), e)| json!({
                        "j": j.label(),
                        "k": k.label(),
                        "estimate": e.value,
                        "std_error": e.std_error,
                    })).collect::<Vec<_>>(),
                })),
            };
            emit(&text, dest.as_deref(), out)?;
            Ok(EXIT_OK)
        }
        Command::Experiment {
            config,
            shots,
            seed,
            format,
            out: dest,
        } => {
            let mut cfg = ExperimentConfig::from_toml_str(&read(&config)?).map_err(|e| with_path(&config, e))?;
            if let Some(s) = shots {
                cfg.shots = s;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let records = run_experiment(&cfg)?;
            let text = match format {
                Format::Csv => records_to_csv(&records),
                Format::Json => json_text(serde_json::to_value(&records).expect("records serialize")),
            };
            emit(&text, dest.as_deref(), out)?;
            Ok(EXIT_OK)
        }
        Command::CheckPositivity { n, k, matrix } => check_positivity(n, &k, matrix.as_deref(), out),
    }
}

fn plan_for_channel(obs: &Observable, ch: &Channel, m: u32) -> Result<DeconvolutionPlan> {
    match ch.to_diagonal()? {
        Some(diag) => plan_pauli_repeated(obs, &diag, m, DEFAULT_INV_TOL),
        None => plan_general_repeated(obs, &*ch.ptm()?, m, DEFAULT_COND_WARN),
    }
}

fn plan_for_report(obs: &Observable, rep: &CharacterizedPtm, m: u32) -> Result<DeconvolutionPlan> {
    match rep.mode() {
        CharacterizationMode::DiagonalOnly => plan_pauli_repeated(obs, rep, m, DEFAULT_INV_TOL),
        CharacterizationMode::Full => {
            let ptm = rep.to_ptm()?;
            if ptm.is_diagonal() {
                plan_pauli_repeated(obs, &ptm, m, DEFAULT_INV_TOL)
            } else {
                plan_general_repeated(obs, &ptm, m, DEFAULT_COND_WARN)
            }
        }
    }
}

fn ptm_text(ch: &Channel, diagonal_only: bool, format: Format) -> Result<String> {
    let n = ch.n();
    let labels: Vec<String> = PauliIndex::all(n)?.map(|k| k.label()).collect();
    if diagonal_only {
        let diag: Vec<f64> = PauliIndex::all(n)?
            .map(|k| ch.diagonal_entry(k))
            .collect::<Result<_>>()?;
        return Ok(match format {
            Format::Csv => {
                let mut s = String::from("k,lambda\n");
                for (l, v) in labels.iter().zip(&diag) {
                    s.push_str(&format!("{l},{}\n", fmt_f64(*v)));
                }
                s
            }
            Format::Json => json_text(json!({ "n": n, "labels": labels, "diagonal": diag })),
        });
    }
    let ptm = ch.ptm()?;
    let side = ptm.side();
    Ok(match format {
        Format::Csv => {
            let mut s = format!("j,{}\n", labels.join(","));
            for (j, l) in labels.iter().enumerate() {
                s.push_str(l);
                for q in 0..side {
                    s.push(',');
                    s.push_str(&fmt_f64(ptm.matrix()[(j, q)]));
                }
                s.push('\n');
            }
            s
        }
        Format::Json => {
            let rows: Vec<Vec<f64>> = (0..side)
                .map(|j| (0..side).map(|q| ptm.matrix()[(j, q)]).collect())
                .collect();
            json_text(json!({ "n": n, "labels": labels, "matrix": rows }))
        }
    })
}

fn parse_pauli(spec: &str, n: usize) -> Result<PauliIndex> {
    let spec = spec.trim();
    let k = match spec.parse::<usize>() {
        Ok(k) => PauliIndex::new(n, k)?,
        Err(_) => PauliIndex::from_label(spec)?,
    };
    if k.n() != n {
        return Err(Error::Config(format!("Pauli {spec:?} does not act on {n} qubit(s)")));
    }
    Ok(k)
}

fn parse_entry_list(list: &str, n: usize) -> Result<Vec<PauliIndex>> {
    list.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_pauli(s, n))
        .collect()
}

fn parse_matrix(text: &str) -> Result<Operator> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let Some(toks) = tokens(line) else { continue };
        rows.push(
            toks.iter()
                .map(|t| parse_f64(t, i + 1))
                .collect::<Result<Vec<f64>>>()?,
        );
    }
    Operator::from_real_rows(&rows)
}

fn positivity_row(name: &str, s: &[f64]) -> (String, bool) {
    let pass = is_positive_semidefinite(s);
    let values: Vec<String> = s.iter().map(|v| fmt_f64(*v)).collect();
    let verdict = if pass { "PASS" } else { "FAIL" };
    (format!("{name},{},{verdict}\n", values.join(",")), pass)
}

fn check_positivity(n: Option<usize>, k: &str, matrix: Option<&Path>, out: &mut dyn Write) -> Result<i32> {
    let mut rows = Vec::new();
    let dim;
    if let Some(path) = matrix {
        let rho = parse_matrix(&read(path)?).map_err(|e| with_path(path, e))?;
        dim = rho.dim();
        rows.push(positivity_row("matrix", &positivity_coefficients(&rho)));
    } else {
        let n = n.expect("clap requires --n without --matrix");
        let ks: Vec<PauliIndex> = if k.trim() == "all" {
            if n > MAX_POSITIVITY_ALL_QUBITS {
                return Err(Error::QubitCapExceeded {
                    n,
                    max: MAX_POSITIVITY_ALL_QUBITS,
                });
            }
            PauliIndex::all(n)?.skip(1).collect()
        } else {
            vec![parse_pauli(k, n)?]
        };
        dim = 1 << n;
        for k in ks {
            let probe = probe_state(k)?;
            rows.push(positivity_row(&k.label(), &positivity_coefficients(probe.operator())));
        }
    }
    let header: Vec<String> = (0..=dim).map(|m| format!("S{m}")).collect();
    let mut text = format!("k,{},verdict\n", header.join(","));
    let mut all_pass = true;
    for (row, pass) in rows {
        text.push_str(&row);
        all_pass &= pass;
    }
    out.write_all(text.as_bytes())?;
    Ok(if all_pass { EXIT_OK } else { EXIT_MATH })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("pauli-deconv").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::QubitCapExceeded { n: 7, max: 6 }), EXIT_CAP);
        assert_eq!(exit_code(&Error::IdentityProbe), EXIT_MATH);
        assert_eq!(exit_code(&Error::Config("x".into())), EXIT_CONFIG);
    }

    #[test]
    fn positivity_single_qubit() {
        let (code, out, _) = run_capture(&["check-positivity", "--n", "1", "--k", "3"]);
        assert_eq!(code, 0);
        assert_eq!(out, "k,S0,S1,S2,verdict\nZ,1.0,1.0,0.0,PASS\n");
    }

    #[test]
    fn positivity_cap() {
        let (code, _, err) = run_capture(&["check-positivity", "--n", "5"]);
        assert_eq!(code, EXIT_CAP, "{err}");
    }

    #[test]
    fn usage_errors_exit_two() {
        let (code, _, _) = run_capture(&["ptm"]);
        assert_eq!(code, EXIT_CONFIG);
        let (code, out, _) = run_capture(&["--help"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("check-positivity"));
    }

    #[test]
    fn entry_lists() {
        let ks = parse_entry_list("ZZ, 5,XI", 2).unwrap();
        assert_eq!(
            ks.iter().map(|k| k.label()).collect::<Vec<_>>(),
            vec!["ZZ", "XX", "XI"]
        );
        assert!(parse_entry_list("ZZZ", 2).is_err());
    }
}
