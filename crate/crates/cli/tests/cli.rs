use std::process::{Command, Output};

use sphavg_core::pilot::PilotTable;

fn sphavg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sphavg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn verify_gauss_single_denominator() {
    let out = sphavg(&["verify-gauss", "--qmax", "1", "--d", "4", "--no-banner"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "q,p,d,max_abs_dev_sum_identity,max_bound_excess");
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("1,0,4,0e0,"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&sphavg(&["verify-gauss", "--qmax", "x"])), 2);
    assert_eq!(code(&sphavg(&["no-such-command"])), 2);
    assert_eq!(code(&sphavg(&["ratio-survey", "--d", "2", "--lambda", "0"])), 2);
    // randomized commands insist on a seed
    assert_eq!(code(&sphavg(&["residual", "--regime", "small", "--d", "25", "--lambda", "1"])), 2);
    let out = sphavg(&["residual", "--regime", "intermediate", "--d", "5", "--lambda", "100", "--seed", "1"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("100 < 100*5"));
    assert_eq!(code(&sphavg(&["--refreeze", "ratio-survey", "--d", "2", "--lambda", "1"])), 2);
}

#[test]
fn over_budget_exits_three() {
    let out = sphavg(&["decompose", "--d", "16", "--lambda", "100000", "--n", "1", "--seed", "1"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("1.6e11"));
}

#[test]
fn ratio_survey_rows() {
    let out = sphavg(&["ratio-survey", "--d", "2,4", "--lambda", "1,3", "--no-banner"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("2,3,empty,,"));
    let row = text.lines().find(|l| l.starts_with("4,1,")).unwrap();
    let cells: Vec<&str> = row.split(',').collect();
    assert_eq!(cells[3].parse::<f64>().unwrap(), 0.125);
    let product: f64 = cells[5].parse().unwrap();
    assert!((product - 2.0 * std::f64::consts::PI.powi(2) / 8.0).abs() < 1e-14);
}

#[test]
fn output_is_deterministic_without_banner() {
    let args = ["residual", "--regime", "folded", "--d", "8", "--lambda", "4", "--samples", "50", "--seed", "9"];
    let mut quiet = args.to_vec();
    quiet.push("--no-banner");
    let a = sphavg(&quiet);
    let b = sphavg(&quiet);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let with_banner = stdout(&sphavg(&args));
    assert!(with_banner.starts_with("# sphavg residual generated "));
    assert_eq!(with_banner.split_once('\n').unwrap().1, stdout(&a));
    let text = stdout(&a);
    let origin = text.lines().nth(1).unwrap();
    assert!(origin.starts_with("0,"));
    assert_eq!(origin.split(',').nth(4), Some("0e0"));
    assert!(text.lines().last().unwrap().starts_with("summary,"));
}

#[test]
fn config_file_and_dat_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    let csv = dir.path().join("out.csv");
    let dat = dir.path().join("out.dat");
    std::fs::write(
        &cfg,
        format!(
            "# decomposition at exploration scale\ncommand = decompose\nd = 2\nlambda = 4\nn = 1..3\nseed = 1\nsamples = 2\nno_banner = true\nout = {}\ndat = {}\n",
            csv.display(),
            dat.display()
        ),
    )
    .unwrap();
    let out = sphavg(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3 * 3);
    let dat = std::fs::read_to_string(&dat).unwrap();
    assert!(dat.starts_with("#d lambda n xi_index"));
    assert_eq!(dat.lines().count(), csv.lines().count());
    // explicit flags override the file
    let over = sphavg(&["--config", cfg.to_str().unwrap(), "decompose", "--n", "2", "--out", "/dev/stdout"]);
    assert_eq!(code(&over), 0);
    assert_eq!(stdout(&over).lines().count(), 1 + 3);
}

#[test]
fn refreeze_then_regression_failure() {
    let dir = tempfile::tempdir().unwrap();
    let pilot = dir.path().join("pilot.txt");
    let p = pilot.to_str().unwrap();
    let args = ["residual", "--regime", "small", "--d", "25", "--lambda", "1", "--samples", "100", "--seed", "3", "--no-banner", "--out", "/dev/null", "--pilot", p];
    let mut freeze = args.to_vec();
    freeze.push("--refreeze");
    assert_eq!(code(&sphavg(&freeze)), 0);
    let table = PilotTable::parse(&std::fs::read_to_string(&pilot).unwrap()).unwrap();
    let frozen = table.require("residual.small.d25.lambda1.max_ratio").unwrap();
    assert!(table.get("maximal.d2.L32.scales0-1-2.trials2.seed42.max").is_some());
    assert_eq!(code(&sphavg(&args)), 0);
    // a tighter threshold than the data supports is a verification failure
    let mut tight = table.clone();
    tight.set("residual.small.d25.lambda1.max_ratio", frozen / 2.0, vec![]);
    std::fs::write(&pilot, tight.render()).unwrap();
    let out = sphavg(&args);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("exceeds the frozen threshold"));
}

#[test]
fn maximal_survey_single_scale_contracts() {
    let out = sphavg(&[
        "maximal-survey", "--dims", "2,3", "--side", "12", "--scales", "1", "--trials", "3",
        "--seed", "5", "--matrix-side", "10", "--no-banner",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    let ratio = header.iter().position(|h| *h == "ratio").unwrap();
    let gap = header.iter().position(|h| *h == "certificate_gap").unwrap();
    for line in text.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        if cells[0] == "scalar" {
            assert!(cells[ratio].parse::<f64>().unwrap() <= 1.0 + 1e-10);
        } else {
            assert!(cells[gap].parse::<f64>().unwrap() <= 1e-6);
        }
    }
}

#[test]
fn missing_pilot_file_is_a_usage_error() {
    let out = sphavg(&["--pilot", "/nonexistent/pilot.txt", "ratio-survey", "--d", "2", "--lambda", "1"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn builtin_decomposition_reference_reproduces() {
    let out = sphavg(&["decompose", "--d", "16", "--lambda", "1024", "--n", "5", "--seed", "42", "--no-banner"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let origin = text.lines().nth(1).unwrap();
    // both q = 1 fractions contribute at the origin
    let major: f64 = origin.split(',').nth(5).unwrap().parse().unwrap();
    assert!((major - 2.0).abs() < 0.01);
}
