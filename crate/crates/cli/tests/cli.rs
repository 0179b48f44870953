use std::fs;
use std::process::{Command, Output};

use edgelaw::mc::ks_distance;
use edgelaw::tails::gumbel_cdf;

fn edgelaw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_edgelaw")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Header row and data rows, with comment lines dropped.
fn table(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn comment(text: &str, key: &str) -> Option<String> {
    text.lines()
        .filter_map(|l| l.strip_prefix("# "))
        .find_map(|l| l.strip_prefix(&format!("{key} = ")).map(String::from))
}

#[test]
fn eval_rows_order_and_monotonicity() {
    let o = edgelaw(&["eval", "--t-min", "-3", "--t-max", "1", "--steps", "2", "--sigma", "0"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let (header, rows) = table(&text);
    assert_eq!(header, ["t", "sigma", "F_fredholm", "err_est"]);
    assert_eq!(rows.len(), 2);
    assert_eq!(comment(&text, "steps").as_deref(), Some("2"));

    let o = edgelaw(&["eval", "--steps", "7", "--sigma", "1", "--sigma", "0"]);
    let (_, rows) = table(&stdout(&o));
    let parsed: Vec<(f64, f64, f64)> = rows
        .iter()
        .map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap(), r[2].parse().unwrap()))
        .collect();
    for w in parsed.windows(2) {
        if w[0].1 == w[1].1 {
            assert!(w[1].0 > w[0].0 && w[1].2 >= w[0].2);
        } else {
            assert!(w[1].1 > w[0].1);
        }
    }
    // 17 significant digits in scientific notation.
    assert!(rows[0][2].contains('e') && rows[0][2].split('e').next().unwrap().len() == 18);
}

#[test]
fn eval_is_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.csv");
    let mut runs = Vec::new();
    for _ in 0..2 {
        let o = edgelaw(&["eval", "--steps", "4", "--sigma", "0.5", "--out", path.to_str().unwrap()]);
        assert!(o.status.success());
        runs.push(fs::read(&path).unwrap());
    }
    assert!(!runs[0].is_empty());
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn exit_codes() {
    assert_eq!(edgelaw(&["eval", "--steps", "2", "--out", "/nonexistent/dir/x.csv"]).status.code(), Some(2));
    assert_eq!(edgelaw(&["eval", "--t-min", "2", "--t-max", "1"]).status.code(), Some(3));
    assert_eq!(edgelaw(&["eval", "--steps", "1"]).status.code(), Some(3));
    assert_eq!(edgelaw(&["eval", "--no-such-flag"]).status.code(), Some(3));
    assert_eq!(edgelaw(&["mc", "--tau", "1.5", "--n", "8", "--trials", "2"]).status.code(), Some(3));
    assert_eq!(edgelaw(&["--help"]).status.code(), Some(0));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# grid\nt-min = -2\nt-max = 0\nsteps = 5\nsigma = 0,1\n").unwrap();
    let o = edgelaw(&["eval", "--config", cfg.to_str().unwrap(), "--steps", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let (_, rows) = table(&text);
    assert_eq!(rows.len(), 6);
    assert_eq!(comment(&text, "t-min").unwrap().parse::<f64>().unwrap(), -2.0);
    assert_eq!(comment(&text, "steps").as_deref(), Some("3"));

    fs::write(&cfg, "steps\n").unwrap();
    assert_eq!(edgelaw(&["eval", "--config", cfg.to_str().unwrap()]).status.code(), Some(3));
    assert_eq!(edgelaw(&["eval", "--config", "/nonexistent.cfg"]).status.code(), Some(2));
}

#[test]
fn tails_three_rows_per_point_and_validity() {
    let o = edgelaw(&["tails", "--regime", "thm2", "--t-min", "6", "--t-max", "8", "--steps", "2", "--sigma", "1"]);
    assert!(o.status.success());
    let (header, rows) = table(&stdout(&o));
    assert_eq!(header.len(), 8);
    assert_eq!(rows.len(), 6);
    let sources: Vec<&str> = rows.iter().map(|r| r[2].as_str()).collect();
    assert_eq!(sources[..3], ["fredholm", "right_thm2", "difference"]);
    for r in rows.iter().filter(|r| r[2] == "difference") {
        assert!(r[6].parse::<f64>().unwrap().is_finite());
        assert_eq!(r[7], "true");
    }

    let o = edgelaw(&["tails", "--regime", "left", "--t-min", "-6", "--t-max", "-5", "--steps", "2", "--sigma", "0.1"]);
    assert!(o.status.success());
    let (_, rows) = table(&stdout(&o));
    assert!(rows.iter().all(|r| r[7] == "false"));
}

#[test]
fn mc_rows_seed_and_ks_recomputation() {
    let args = ["mc", "--n", "32", "--trials", "40", "--seed", "9", "--law", "ginue-matched"];
    let a = edgelaw(&args);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let b = edgelaw(&args);
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let (header, rows) = table(&text);
    assert_eq!(header, ["trial", "sample"]);
    assert_eq!(rows.len(), 40);
    let samples: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    let ks: f64 = comment(&text, "summary.ks").unwrap().parse().unwrap();
    assert!((ks - ks_distance(&samples, gumbel_cdf)).abs() <= 1e-12);
    assert_eq!(comment(&text, "summary.reference").as_deref(), Some("gumbel"));
}

#[test]
fn traceid_report() {
    let o = edgelaw(&["traceid", "--t", "1", "--sigma", "0.8"]);
    assert!(o.status.success());
    let (header, rows) = table(&stdout(&o));
    assert!(header.contains(&"m_x".to_string()) && header.contains(&"L_2d".to_string()));
    assert_eq!(rows.len(), 2);
    for r in &rows {
        assert!(r[3].parse::<f64>().unwrap() <= 1e-5);
    }
    let o = edgelaw(&["traceid", "--t", "1", "--sigma", "0"]);
    let (_, rows) = table(&stdout(&o));
    assert!(rows[0][3].parse::<f64>().unwrap() <= 1e-12);
}

#[test]
fn idpii_table() {
    let o = edgelaw(&["idpii", "--sigma", "1", "--steps", "3", "--m-h", "24"]);
    assert!(o.status.success());
    let (header, rows) = table(&stdout(&o));
    assert_eq!(header[2], "F_idpii");
    assert_eq!(rows.len(), 3);
    for r in &rows {
        assert!(r[4].parse::<f64>().unwrap() <= 1e-5);
    }
    assert_eq!(edgelaw(&["idpii", "--t-min", "-3"]).status.code(), Some(3));
}

#[test]
fn selftest_passes_and_detects_a_perturbed_constant() {
    let o = edgelaw(&["selftest"]);
    let text = stdout(&o);
    assert!(o.status.success(), "{text}");
    assert!(text.lines().filter(|l| l.starts_with("PASS")).count() >= 6);

    let o = edgelaw(&["selftest", "--only", "tails", "--zeta-shift", "1e-3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL tails"));
    assert_eq!(edgelaw(&["selftest", "--only", "nothing"]).status.code(), Some(3));
}
