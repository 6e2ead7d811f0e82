use std::path::Path;
use std::process::{Command, Output};

fn diagfim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_diagfim")).args(args).output().unwrap()
}

fn configs() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs"))
}

#[test]
fn run_writes_trace_with_header() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("regression.json");
    let out = diagfim(&["run", "--config", cfg.to_str().unwrap(), "--output-dir", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert!(text.starts_with("epoch,group,quantity,value\n"));
}

#[test]
fn seed_override_is_echoed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("classification.json");
    let out = diagfim(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--output-dir",
        dir.path().to_str().unwrap(),
        "--seed",
        "9",
        "--threads",
        "1",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let echo = std::fs::read_to_string(dir.path().join("config.json")).unwrap();
    assert!(echo.contains("\"seed\": 9"));
}

#[test]
fn bounds_on_example_checkpoint() {
    let ck = configs().join("example_checkpoint.json");
    let out = diagfim(&["bounds", "--checkpoint", ck.to_str().unwrap(), "--input", "-0.5,1.25"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = table.lines().filter(|l| l.starts_with("layer")).collect();
    assert_eq!(rows.len(), 12);
    for row in rows {
        let f: Vec<&str> = row.split_whitespace().collect();
        let (lo, v, hi): (f64, f64, f64) = (f[2].parse().unwrap(), f[3].parse().unwrap(), f[4].parse().unwrap());
        let tol = 1e-9 * v.abs().max(hi.abs()).max(lo.abs());
        assert!(lo <= v + tol && v <= hi + tol, "{row}");
        assert_eq!(f[5], "yes");
    }
}

#[test]
fn exit_codes() {
    assert_eq!(diagfim(&["--help"]).status.code(), Some(0));
    assert_eq!(diagfim(&["run", "--help"]).status.code(), Some(0));
    assert_eq!(diagfim(&["--no-such-flag"]).status.code(), Some(1));
    assert_eq!(diagfim(&["run"]).status.code(), Some(1));
    assert_eq!(diagfim(&["run", "--config", "/does/not/exist.json"]).status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"task":"regression","dataset":"synthetic_gaussian_blobs","layer_dims":[2,3,2],
            "activation":"sigmoid","epochs":0,"learning_rate":0.1,"n_fim_samples":10,
            "probe_inputs":2,"seed":1}"#,
    )
    .unwrap();
    let out = diagfim(&["run", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("epochs"));

    // Diverging training is a numerical failure.
    let diverge = dir.path().join("diverge.json");
    std::fs::write(
        &diverge,
        format!(
            r#"{{"task":"regression","dataset":"synthetic_gaussian_blobs","layer_dims":[2,2],
                "activation":"identity","epochs":50,"learning_rate":1e6,"n_fim_samples":10,
                "probe_inputs":2,"seed":1,"output_dir":"{}"}}"#,
            dir.path().join("out").display()
        ),
    )
    .unwrap();
    assert_eq!(diagfim(&["run", "--config", diverge.to_str().unwrap()]).status.code(), Some(2));

    let ck = configs().join("example_checkpoint.json");
    let out = diagfim(&["bounds", "--checkpoint", ck.to_str().unwrap(), "--input", "1.0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn help_documents_flags() {
    let top = String::from_utf8(diagfim(&["--help"]).stdout).unwrap();
    for flag in ["--output-dir", "--seed", "--threads", "run", "verify", "bounds"] {
        assert!(top.contains(flag), "missing {flag}");
    }
    let bounds = String::from_utf8(diagfim(&["bounds", "--help"]).stdout).unwrap();
    for flag in ["--checkpoint", "--input", "--head", "--n-samples"] {
        assert!(bounds.contains(flag), "missing {flag}");
    }
}
