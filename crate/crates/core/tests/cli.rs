use std::io::{BufRead, BufReader};
use std::path::Path;
use std::process::{Command, Output, Stdio};

fn ilnl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ilnl"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = ilnl(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

struct Workspace {
    dir: tempfile::TempDir,
}

impl Workspace {
    /// Small generated data plus a trained source checkpoint.
    fn new() -> Self {
        let ws = Self {
            dir: tempfile::tempdir().unwrap(),
        };
        ok(&["gen-data", "--out-dir", &ws.p("data"), "--n-source", "600", "--n-target", "300"]);
        ok(&["train-source", "--data", &ws.p("data/source.csv"), "--out", &ws.p("fs.ckpt"), "--hidden", "", "--iterations", "300"]);
        ws
    }

    fn p(&self, rel: &str) -> String {
        self.dir.path().join(rel).display().to_string()
    }
}

const FAST: [&str; 4] = ["--iterations", "150", "--hidden", "8"];

#[test]
fn train_source_writes_report_and_is_deterministic() {
    let ws = Workspace::new();
    let stdout = ok(&["train-source", "--data", &ws.p("data/source.csv"), "--out", &ws.p("b.ckpt"), "--hidden", "", "--iterations", "300"]);
    assert!(stdout.contains("source accuracy"));
    assert_eq!(std::fs::read(ws.p("fs.ckpt")).unwrap(), std::fs::read(ws.p("b.ckpt")).unwrap());
    let report = std::fs::read_to_string(ws.p("fs.ckpt.report.csv")).unwrap();
    assert!(report.starts_with("# seed=0, config-hash="));
}

#[test]
fn usage_data_and_transport_exit_codes() {
    let ws = Workspace::new();
    assert_eq!(ilnl(&["train-source", "--out", &ws.p("x.ckpt")]).status.code(), Some(2));
    assert_eq!(ilnl(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        ilnl(&["train-source", "--data", &ws.p("missing.csv"), "--out", &ws.p("x.ckpt")]).status.code(),
        Some(3)
    );
    std::fs::write(ws.p("bad.csv"), "1.0,2.0,0\n1.0,oops,1\n").unwrap();
    let out = ilnl(&["train-source", "--data", &ws.p("bad.csv"), "--out", &ws.p("x.ckpt")]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let port = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let out = ilnl(&["adapt", "--endpoint", &format!("http://127.0.0.1:{port}"), "--target", &ws.p("data/target.csv"), "--run-dir", &ws.p("r")]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn adapt_variants_and_report() {
    let ws = Workspace::new();
    let ckpt = ws.p("fs.ckpt");
    let target = ws.p("data/target.csv");
    let run = ws.p("run");
    let mut args = vec!["adapt", "--checkpoint", &ckpt];
    args.extend(["--target", &target, "--steps", "3", "--no-early-stop", "--run-dir", &run]);
    args.extend(FAST);
    ok(&args);
    let trace = std::fs::read_to_string(ws.p("run/trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 5);
    // Unlabeled target: accuracy columns stay empty.
    assert!(trace.lines().nth(2).unwrap().contains(",,,step_1/model.ckpt"));

    let run1 = ws.p("noiter");
    let mut args = vec!["adapt", "--checkpoint", &ckpt];
    args.extend(["--target", &target, "--steps", "3", "--no-iter", "--no-category-sampling", "--no-rescale", "--run-dir", &run1]);
    args.extend(FAST);
    ok(&args);
    assert_eq!(std::fs::read_to_string(ws.p("noiter/trace.csv")).unwrap().lines().count(), 3);

    let stdout = ok(&["report", "--run-dir", &run, "--eval", &ws.p("data/target_eval.csv")]);
    assert_eq!(stdout.matches("wrote ").count(), 5);
    let stdout = ok(&["report", "--run-dir", &run]);
    assert!(stdout.contains("note:"));
    assert!(Path::new(&ws.p("run/report/epsilon_curve.csv")).exists());
}

#[test]
fn validation_set_and_config_file() {
    let ws = Workspace::new();
    // Labels ride along in the target file for scoring only.
    std::fs::write(
        ws.p("adapt.cfg"),
        format!(
            "# fast settings\nsteps = 1\niterations = 150\nhidden = 8\ntarget = {}\ntarget_labels = true\nseed = 4\n",
            ws.p("data/target_eval.csv")
        ),
    )
    .unwrap();
    let stdout = ok(&[
        "adapt", "--config", &ws.p("adapt.cfg"), "--checkpoint", &ws.p("fs.ckpt"),
        "--val-set", &ws.p("data/target_eval.csv"), "--run-dir", &ws.p("val"), "--seed", "5",
    ]);
    assert!(stdout.contains("label_acc 0."), "{stdout}");
    let trace = std::fs::read_to_string(ws.p("val/trace.csv")).unwrap();
    assert!(trace.starts_with("# seed=5,"), "flag should override the file: {trace}");
    let row: Vec<&str> = trace.lines().nth(2).unwrap().split(',').collect();
    // With the whole target as validation, ε is exactly the label error.
    let eps: f64 = row[1].parse().unwrap();
    let label_acc: f64 = row[2].parse().unwrap();
    assert!((eps - (1.0 - label_acc)).abs() < 1e-12);
}

#[test]
fn serve_and_eval_over_http() {
    let ws = Workspace::new();
    let mut child = Command::new(env!("CARGO_BIN_EXE_ilnl"))
        .args(["serve", "--checkpoint", &ws.p("fs.ckpt"), "--bind", "127.0.0.1:0"])
        .env("RUST_LOG", "warn")
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stdout.take().unwrap()).read_line(&mut line).unwrap();
    let url = line.trim().strip_prefix("listening on ").unwrap().to_string();

    let remote = ok(&["eval", "--endpoint", &url, "--data", &ws.p("data/target_eval.csv"), "--out", &ws.p("tm.csv")]);
    let local = ok(&["eval", "--checkpoint", &ws.p("fs.ckpt"), "--data", &ws.p("data/target_eval.csv")]);
    assert_eq!(remote, local);
    let matrix = std::fs::read_to_string(ws.p("tm.csv")).unwrap();
    assert!(matrix.lines().nth(1).unwrap().starts_with("true_class,p0"));

    let mut args = vec!["adapt", "--endpoint", &url];
    let target = ws.p("data/target.csv");
    let run = ws.p("remote");
    args.extend(["--target", &target, "--steps", "2", "--no-early-stop", "--run-dir", &run]);
    args.extend(FAST);
    ok(&args);
    assert_eq!(std::fs::read_to_string(ws.p("remote/trace.csv")).unwrap().lines().count(), 4);
    child.kill().unwrap();
    let _ = child.wait();
}
