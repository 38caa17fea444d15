use std::path::Path;
use std::process::{Command, Output};

fn quantumness(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quantumness")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field(text: &str, key: &str) -> f64 {
    let start = text.find(&format!("{key}=")).unwrap() + key.len() + 1;
    text[start..].split_whitespace().next().unwrap().parse().unwrap()
}

fn out_dir(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

#[test]
fn closed_quantum_free_energy() {
    let o = quantumness(&["free-energy", "--model", "jc", "--x", "400", "--q", "0.5", "--beta", "2", "--treatment", "quantum", "--method", "closed"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!((field(&text, "F_Q") - -11.289_183_061_889_581).abs() < 1e-9);
    assert!(text.contains("method=closed_form"));
}

#[test]
fn decoupled_classical_free_energy() {
    let o = quantumness(&["free-energy", "--model", "rabi", "--x", "25", "--q", "0", "--beta", "5", "--treatment", "classical", "--method", "numeric"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (w, big, beta) = (0.2f64, 5.0f64, 5.0f64);
    let want = -(2.0 * (beta * big / 2.0).cosh() / (beta * w)).ln() / beta;
    assert!((field(&stdout(&o), "F_C") - want).abs() < 1e-9);
}

#[test]
fn flag_errors_exit_two() {
    let o = quantumness(&["free-energy", "--model", "jc", "--q", "0.5", "--beta", "2", "--treatment", "quantum"]);
    assert_eq!(o.status.code(), Some(2));
    let o = quantumness(&["quantumness", "--model", "jc", "--eta", "0.5", "--x", "25", "--q", "0.5", "--beta", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("contradicts"));
    let o = quantumness(&["free-energy", "--model", "jc", "--x", "25", "--q", "1", "--beta", "2", "--treatment", "quantum", "--method", "closed"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn non_convergence_exits_three() {
    // the superradiant displacement at this x needs far more Fock states than the cap
    let o = quantumness(&["free-energy", "--model", "rabi", "--x", "1e6", "--q", "1.5", "--beta", "5", "--treatment", "quantum"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn quantumness_prints_all_three() {
    let o = quantumness(&["quantumness", "--model", "rabi", "--x", "25", "--q", "0.6", "--beta", "5"]);
    assert!(o.status.success());
    let t = stdout(&o);
    let d = field(&t, "delta_qc");
    assert!((d - (field(&t, "F_Q") - field(&t, "F_C"))).abs() < 1e-10);
    assert!((d - 0.006_088_053).abs() < 1e-8);
}

#[test]
fn scan_then_fit() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_dir(dir.path());
    let o = quantumness(&["--out", &out, "scan", "--model", "jc", "--x-log", "100,10000,6", "--q", "0.3,0.7", "--beta", "2", "--name", "jc"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("jc.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "x,q,eta,beta,F_Q,F_C,delta_qc,err,method_q,method_c");
    assert_eq!(lines.count(), 12);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("jc.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["rows"].as_array().unwrap().len(), 12);
    assert_eq!(manifest["tolerances"]["eps"], 1e-10);

    let csv_path = dir.path().join("jc.csv");
    let o = quantumness(&["fit", "--input", csv_path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.starts_with("q,eta,beta,A,B,residual_rms,A_closed,B_closed\n"));
    assert_eq!(text.lines().count(), 3);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("jc.manifest.json")).unwrap()).unwrap();
    let fits = manifest["fits"].as_array().unwrap();
    assert_eq!(fits.len(), 2);
    assert!(fits[0]["A"].as_f64().unwrap() > 0.0);
}

#[test]
fn table1_has_six_cells() {
    let dir = tempfile::tempdir().unwrap();
    let o = quantumness(&["--out", &out_dir(dir.path()), "table1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("table1.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 6);
    assert!(rows[0].starts_with("JC (n) quantum,"));
    assert!(rows[5].starts_with("(sr) classical,"));
}

#[test]
fn figure_4b_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let o = quantumness(&["--out", &out_dir(dir.path()), "--threads", "2", "figure", "--id", "4b"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("figure_4b.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').take(4).map(|c| c.parse().unwrap()).collect();
        assert_eq!((cols[0], cols[2], cols[3]), (100.0, 0.5, 5.0));
    }
}

#[test]
fn figure_2a_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let o = quantumness(&["--out", &out_dir(dir.path()), "figure", "--id", "2a"]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(dir.path().join("figure_2a.csv")).unwrap();
    let mut qs: Vec<String> = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().to_string()).collect();
    qs.dedup();
    assert_eq!(qs, vec!["3.00000000000e-1", "7.00000000000e-1", "1.50000000000e0"]);
    assert!(csv.lines().skip(1).all(|l| l.split(',').nth(2) == Some("1.00000000000e0") && l.split(',').nth(3) == Some("2.00000000000e0")));
}

#[test]
fn experiment_has_ratio_column() {
    let dir = tempfile::tempdir().unwrap();
    let o = quantumness(&["--out", &out_dir(dir.path()), "experiment", "--two-pi"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("experiment.csv")).unwrap();
    assert!(csv.lines().next().unwrap().ends_with(",ratio"));
    assert_eq!(csv.lines().count(), 16);
    let max = csv
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap().abs())
        .fold(0.0, f64::max);
    assert!(max > 1e-3 && max < 3e-2, "{max}");
}
