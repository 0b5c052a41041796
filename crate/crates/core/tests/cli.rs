//! End-to-end runs of the `pauli-deconv` binary.

mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use common::depolarizing_lambda3;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pauli-deconv"));
    cmd.env_remove("PAULI_DECONV_OUT_DIR");
    cmd
}

fn preset(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("presets").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn ptm_bit_flip_diagonal() {
    let o = run(&["ptm", "--config", preset("bit_flip_n1.toml").to_str().unwrap(), "--diagonal-only"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "k,lambda\nI,1.0\nX,1.0\nY,0.8\nZ,0.8\n");
}

#[test]
fn ptm_identity_full_matrix() {
    let o = run(&["ptm", "--config", preset("identity_n2.toml").to_str().unwrap()]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "j,II,IX,IY,IZ,XI,XX,XY,XZ,YI,YX,YY,YZ,ZI,ZX,ZY,ZZ");
    for (j, line) in lines.enumerate() {
        let values: Vec<f64> = line.split(',').skip(1).map(|v| v.parse().unwrap()).collect();
        for (q, v) in values.iter().enumerate() {
            assert_eq!(*v, if j == q { 1.0 } else { 0.0 });
        }
    }
}

#[test]
fn ptm_three_qubit_depolarizing_entry() {
    let o = run(&["ptm", "--config", preset("zzz_channel.toml").to_str().unwrap(), "--diagonal-only"]);
    let text = stdout(&o);
    let row = text.lines().find(|l| l.starts_with("ZZZ,")).unwrap();
    let value: f64 = row[4..].parse().unwrap();
    assert!((value - depolarizing_lambda3(0.00052, 0.25)).abs() < 1e-15);
}

#[test]
fn ptm_json_and_caps() {
    let dir = tempfile::tempdir().unwrap();
    let big = write(dir.path(), "big.toml", "family = \"depolarizing\"\nn = 6\nq = 0.1\n");
    let o = run(&["ptm", "--config", &big]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    let o = run(&["ptm", "--config", &big, "--diagonal-only", "--format", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["diagonal"].as_array().unwrap().len(), 4096);
}

#[test]
fn parse_errors_report_position() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "family = \"bit_flip\"\nn = 1\np = \"high\"\n");
    let o = run(&["ptm", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    let obs = write(dir.path(), "o.txt", "Z 1.0\nQ 2.0\n");
    let meas = write(dir.path(), "m.txt", "Z 0.5\n");
    let o = run(&["deconvolve", "--observable", &obs, "--config", preset("bit_flip_n1.toml").to_str().unwrap(), "--measurements", &meas]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2, column 1"), "{}", stderr(&o));
}

#[test]
fn deconvolve_examples() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bf.toml", "family = \"bit_flip\"\nn = 1\np = 0.25\n");
    let obs = write(dir.path(), "z.txt", "Z 1.0\n");
    let meas = write(dir.path(), "m.txt", "Z 0.5\n");
    let o = run(&["deconvolve", "--observable", &obs, "--config", &cfg, "--measurements", &meas]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        stdout(&o),
        "expectation,std_error,entries_consulted,path,repetitions\n1.0,0.0,1,diagonal,1\n"
    );

    let id = write(dir.path(), "id.toml", "family = \"identity\"\nn = 2\n");
    let obs2 = write(dir.path(), "o2.txt", "ZZ 2.0\nXI -0.5\n");
    let meas2 = write(dir.path(), "m2.txt", "ZZ 0.25 0.01\nXI 0.5 0.02\n");
    let o = run(&["deconvolve", "--observable", &obs2, "--config", &id, "--measurements", &meas2]);
    let row = stdout(&o).lines().nth(1).unwrap().to_string();
    let fields: Vec<&str> = row.split(',').collect();
    assert_eq!(fields[0].parse::<f64>().unwrap(), 2.0 * 0.25 - 0.5 * 0.5);
    assert!((fields[1].parse::<f64>().unwrap() - (0.02f64.powi(2) + 0.01f64.powi(2)).sqrt()).abs() < 1e-15);
    assert_eq!(fields[2], "2");

    let missing = write(dir.path(), "m3.txt", "ZZ 0.25\n");
    let o = run(&["deconvolve", "--observable", &obs2, "--config", &id, "--measurements", &missing]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("XI"));

    let dep = write(dir.path(), "dep.toml", "family = \"depolarizing\"\nn = 1\nq = 1.0\n");
    let o = run(&["deconvolve", "--observable", &obs, "--config", &dep, "--measurements", &meas]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn deconvolve_general_path_and_repetitions() {
    let dir = tempfile::tempdir().unwrap();
    let obs = write(dir.path(), "zz.txt", "ZZ 1.0\n");
    // μ = 1 leaves ⟨ZZ⟩ untouched, so the identity-like reconstruction echoes it.
    let cfg = write(dir.path(), "ad.toml", "family = \"amp_damp_corr\"\neta = 0.3\nmu = 1.0\n");
    let meas = write(dir.path(), "m.txt", "ZZ 0.4\n");
    let o = run(&["deconvolve", "--observable", &obs, "--config", &cfg, "--measurements", &meas, "--format", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["expectation"].as_f64().unwrap() - 0.4).abs() < 1e-12);
    assert_eq!(v["path"], "general");
    assert_eq!(v["entries_consulted"], 256);

    let o = run(&[
        "deconvolve", "--observable", preset("zzz.obs").to_str().unwrap(),
        "--config", preset("zzz_channel.toml").to_str().unwrap(),
        "--measurements", preset("zzz_measurement.txt").to_str().unwrap(),
        "--repetitions", "3",
    ]);
    let value: f64 = stdout(&o).lines().nth(1).unwrap().split(',').next().unwrap().parse().unwrap();
    assert!((value - 0.99755 / depolarizing_lambda3(0.00052, 0.25).powi(3)).abs() < 1e-12);
}

#[test]
fn characterize_examples() {
    let o = run(&["characterize", "--config", preset("identity_n2.toml").to_str().unwrap()]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 1 + 15 * 15);
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let expected = if f[0] == f[1] { "1.0" } else { "0.0" };
        assert_eq!(f[2], expected, "{line}");
    }

    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "dep.toml", "family = \"depolarizing\"\nn = 1\nq = 0.2\n");
    let o = run(&["characterize", "--config", &cfg, "--entries", "3"]);
    assert_eq!(stdout(&o), "j,k,estimate,std_error,shots,seed\nZ,Z,0.8,0.0,0,0\n");

    let o = run(&["characterize", "--config", preset("amp_damp_corr.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("not unital"));
}

#[test]
fn characterization_report_feeds_deconvolution() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.csv");
    let o = run(&[
        "characterize", "--config", preset("bit_flip_n2.toml").to_str().unwrap(),
        "--entries", "ZZ,XZ", "--out", report.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let obs = write(dir.path(), "o.txt", "ZZ 1.0\n");
    let meas = write(dir.path(), "m.txt", "ZZ 0.5\n");
    let from_report = run(&["deconvolve", "--observable", &obs, "--report", report.to_str().unwrap(), "--measurements", &meas]);
    let from_config = run(&["deconvolve", "--observable", &obs, "--config", preset("bit_flip_n2.toml").to_str().unwrap(), "--measurements", &meas]);
    assert!(from_report.status.success(), "{}", stderr(&from_report));
    let a: f64 = stdout(&from_report).lines().nth(1).unwrap().split(',').next().unwrap().parse().unwrap();
    let b: f64 = stdout(&from_config).lines().nth(1).unwrap().split(',').next().unwrap().parse().unwrap();
    assert!((a - b).abs() < 1e-12);
}

#[test]
fn experiment_presets() {
    let o = run(&["experiment", "--config", preset("zzz_deconvolution_exact.toml").to_str().unwrap()]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().next().unwrap(), "mu,q,m,k,shots,seed,noisy,noisy_stderr,deconvolved,deconvolved_stderr");
    assert_eq!(text.lines().count(), 42);
    for line in text.lines().skip(1) {
        let deconv: f64 = line.split(',').nth(8).unwrap().parse().unwrap();
        assert!((deconv - 1.0).abs() < 1e-9);
    }

    let o = run(&["experiment", "--config", preset("zzz_decay_mu_grid.toml").to_str().unwrap()]);
    let text = stdout(&o);
    let mus: std::collections::BTreeSet<&str> = text.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(mus.len(), 5);
    assert_eq!(text.lines().count(), 1 + 5 * 41);
}

#[test]
fn outputs_are_byte_identical() {
    let decay = preset("zzz_deconvolution.toml");
    let args = ["experiment", "--config", decay.to_str().unwrap(), "--seed", "11"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["experiment", "--config", preset("zzz_deconvolution.toml").to_str().unwrap(), "--seed", "12"]);
    assert_ne!(a.stdout, c.stdout);
    let dep = preset("depolarizing_n2.toml");
    let args = ["characterize", "--config", dep.to_str().unwrap(), "--shots", "1000", "--seed", "5"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn out_dir_env_var() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .env("PAULI_DECONV_OUT_DIR", dir.path())
        .args(["ptm", "--config", preset("bit_flip_n1.toml").to_str().unwrap(), "--out", "sub/ptm.csv"])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let written = std::fs::read_to_string(dir.path().join("sub/ptm.csv")).unwrap();
    assert!(written.starts_with("j,I,X,Y,Z\n"));
}

#[test]
fn check_positivity_examples() {
    let o = run(&["check-positivity", "--n", "1", "--k", "3"]);
    assert_eq!(stdout(&o), "k,S0,S1,S2,verdict\nZ,1.0,1.0,0.0,PASS\n");

    let o = run(&["check-positivity", "--n", "2", "--k", "all"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().skip(1).filter(|l| l.ends_with(",PASS")).count(), 15);

    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "m.txt", "# not PSD\n1.5 0.0\n0.0 -0.5\n");
    let o = run(&["check-positivity", "--matrix", &m]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).trim_end().ends_with("FAIL"));
}
