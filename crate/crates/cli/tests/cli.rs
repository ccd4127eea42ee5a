use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_magnus-umq"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> serde_json::Value {
    let mut a = args.to_vec();
    a.extend(["--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(v["schema"], "magnus-umq/1");
    v["result"].clone()
}

#[test]
fn theta_values() {
    assert_eq!(stdout(&["theta", "--k", "4", "--lambda", "1/2", "--q", "1"]), "5/48\n");
    assert_eq!(stdout(&["theta", "--k", "1"]), "1\n");
    // plain norm of the (1,1) piece is λ(1-λ)
    assert_eq!(stdout(&["theta", "--a", "1", "--b", "1", "--q", "plain"]), "1/4\n");
    assert_eq!(stdout(&["theta", "--a", "1", "--b", "1", "--q", "plain", "--lambda", "1/3"]), "2/9\n");
}

#[test]
fn bounds_by_method() {
    let r = json(&["bound", "--method", "pth-root", "--q", "2"]);
    assert!((r["lower"].as_f64().unwrap() - 2.04151779232).abs() < 1e-9);
    let r = json(&["bound", "--method", "trivial-upper", "--q", "2"]);
    assert!((r["upper"].as_f64().unwrap() - 2.24492409662).abs() < 1e-9);
    let t = stdout(&["bound", "--method", "log", "--q", "2", "--format", "text"]);
    assert!(t.starts_with("2.0408"), "{t}");
}

#[test]
fn bch_quantities() {
    assert_eq!(stdout(&["bch", "--l1", "--x1", "0", "--x2", "0"]), "0\n");
    let r = json(&["bch", "--critical-lambda"]);
    assert!((r["lambda"].as_f64().unwrap() - 0.3586552).abs() < 1e-6);
    let r = json(&["bch", "--scan-c2", "--q", "1", "--grid", "200"]);
    assert!(r["value"].as_f64().unwrap() > 2.89847930);
}

#[test]
fn scan_csv_header() {
    let s = stdout(&["scan", "--points", "3", "--q", "2"]);
    let lines: Vec<_> = s.lines().collect();
    assert_eq!(lines[0], "lambda,w,c_bound");
    assert_eq!(lines.len(), 4);
}

#[test]
fn deterministic_output() {
    let args = ["verify-convexity", "--trials", "300", "--seed", "11", "--n", "4", "--p", "3"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
    let args = ["radius", "--p", "4", "--n", "128", "--q", "2"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["theta", "--k", "4", "--q", "foo"][..],
        &["theta", "--k", "4", "--lambda", "3/2"],
        &["theta", "--k", "4", "--q", "1/2"],
        &["bound", "--method", "closed-form"],
        &["verify", "--only", "13"],
        &["no-such-command"],
    ] {
        assert_eq!(run(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn out_file() {
    let dir = std::env::temp_dir().join(format!("magnus-umq-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join("theta.txt");
    let out = run(&["theta", "--k", "4", "--out", p.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&p).unwrap(), "5/48\n");
    std::fs::remove_dir_all(dir).unwrap();
}
