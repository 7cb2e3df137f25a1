//! End-to-end runs of the command-line tool.

use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracurv"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("fracurv-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn analyze_cantor_row() {
    let o = run(&[
        "analyze",
        "--preset",
        "cantor-square",
        "--eps-min",
        "0.159",
        "--eps-max",
        "0.16",
        "--ppd",
        "100",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "eps,c0,c1,c2,c0_var,near_critical,h,target_error"
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "0.16");
    assert_eq!(row[1], "4");
    assert_eq!(row[6], "0.0032");
}

#[test]
fn analyze_koch_is_connected_at_large_eps() {
    let o = run(&[
        "analyze",
        "--preset",
        "koch",
        "--eps-min",
        "0.3",
        "--ppd",
        "2",
    ]);
    assert!(o.status.success());
    for line in stdout(&o).lines().skip(1) {
        assert_eq!(line.split(',').nth(1), Some("1"), "{line}");
    }
}

#[test]
fn output_is_deterministic() {
    let args = [
        "analyze",
        "--preset",
        "uset",
        "--eps-min",
        "0.05",
        "--eps-max",
        "0.5",
        "--ppd",
        "3",
    ];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn exit_codes() {
    assert_eq!(
        run(&[
            "analyze",
            "--preset",
            "koch",
            "--eps-min",
            "0.5",
            "--eps-max",
            "0.2"
        ])
        .status
        .code(),
        Some(1)
    );
    assert_eq!(
        run(&["analyze", "--preset", "koch", "--h-ratio", "0.2"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(run(&["analyze", "--preset", "nope"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        run(&["analyze", "--ifs", "/nonexistent/ifs.json"])
            .status
            .code(),
        Some(3)
    );
    let bad = [
        "render",
        "--preset",
        "koch",
        "--eps",
        "0.111",
        "--svg",
        "/nonexistent/dir/x.svg",
    ];
    assert_eq!(run(&bad).status.code(), Some(3));
}

#[test]
fn config_file_overrides_flags() {
    let cfg = tmp("config.json");
    std::fs::write(&cfg, r#"{"eps_min": 0.4, "eps_max": 1.0, "ppd": 1}"#).unwrap();
    let o = run(&[
        "analyze",
        "--preset",
        "koch",
        "--eps-min",
        "0.001",
        "--config",
        cfg.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let rows: Vec<String> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap().to_string())
        .collect();
    assert_eq!(rows, ["1"]);
    std::fs::write(&cfg, r#"{"epsilon": 1}"#).unwrap();
    assert_eq!(
        run(&[
            "analyze",
            "--preset",
            "koch",
            "--config",
            cfg.to_str().unwrap()
        ])
        .status
        .code(),
        Some(1)
    );
}

#[test]
fn ifs_from_json() {
    let path = tmp("square.json");
    std::fs::write(
        &path,
        r#"{"name": "halves", "R": 3.0, "open_set": [[0,0],[1,0],[1,1],[0,1]],
            "maps": [{"ratio": 0.5, "rotation_deg": 0, "reflect": false, "translation": [0, 0]},
                     {"ratio": 0.5, "rotation_deg": 0, "reflect": false, "translation": [0.5, 0]},
                     {"ratio": 0.5, "rotation_deg": 0, "reflect": false, "translation": [0, 0.5]},
                     {"ratio": 0.5, "rotation_deg": 0, "reflect": false, "translation": [0.5, 0.5]}]}"#,
    )
    .unwrap();
    let o = run(&[
        "analyze",
        "--ifs",
        path.to_str().unwrap(),
        "--eps-min",
        "0.2",
        "--eps-max",
        "0.3",
        "--ppd",
        "1",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let row: Vec<String> = stdout(&o)
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(String::from)
        .collect();
    let area: f64 = row[3].parse().unwrap();
    assert!(
        (area - (1.0 + 1.2 + std::f64::consts::PI * 0.09)).abs() < 1e-2,
        "{area}"
    );
}

#[test]
fn scan_koch_is_bounded() {
    let csv = tmp("koch_scan.csv");
    let o = run(&[
        "scan",
        "scbc",
        "--preset",
        "koch",
        "--pair",
        "1,2",
        "--eps-min",
        "0.01",
        "--eps-max",
        "1",
        "--ppd",
        "6",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["verdict"], "bounded");
    assert!(v["bound"].as_f64().unwrap() <= 7.0 / 6.0 + 0.05);
    assert_eq!(v["kind"]["type"], "scbc_pair");
    assert_eq!(v["thresholds"]["slope"], -0.15);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next(), Some("eps,value,near_critical"));
    assert_eq!(text.lines().count(), 14);
}

#[test]
fn scan_rejects_bad_pairs() {
    assert_eq!(
        run(&[
            "scan",
            "scbc",
            "--preset",
            "koch",
            "--pair",
            "1,1",
            "--eps-min",
            "0.1"
        ])
        .status
        .code(),
        Some(1)
    );
    assert_eq!(
        run(&[
            "scan",
            "scbc",
            "--preset",
            "koch",
            "--pair",
            "1,3",
            "--eps-min",
            "0.1"
        ])
        .status
        .code(),
        Some(1)
    );
}

#[test]
fn oracle_values() {
    let v: serde_json::Value =
        serde_json::from_slice(&run(&["oracle", "--preset", "uset", "--eps", "0.01"]).stdout)
            .unwrap();
    assert_eq!(v["J"], 3);
    assert_eq!(v["c0_var"], 1.5);
    let o = run(&["oracle", "--preset", "cantor-square", "--eps", "0.17"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["N"], 2);
    assert_eq!(v["alpha"], 2.74488360927);
    assert_eq!(
        run(&["oracle", "--preset", "cantor-square", "--eps", "0.1"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn render_svg() {
    let o = run(&["render", "--preset", "koch", "--eps", "0.1111111111"]);
    assert!(o.status.success());
    let svg = stdout(&o);
    assert!(svg.starts_with("<svg") && svg.matches("Z").count() >= 1);
    let o = run(&[
        "render",
        "--preset",
        "uset",
        "--eps",
        "0.0222222222",
        "--pair",
        "1,2",
    ]);
    assert!(stdout(&o).contains("#d62728\" stroke-width"));
    assert!(stdout(&o).matches("<path").count() >= 3);
}

#[test]
fn fractal_header() {
    let o = run(&[
        "fractal",
        "--preset",
        "cantor-square",
        "--p",
        "0.25",
        "--k",
        "2",
        "--delta",
        "1e-4",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["D"], 1.0);
    assert_eq!(v["eta"], 0.69314718056 * 2.0);
    let (a, i) = (
        v["value_avg"].as_f64().unwrap(),
        v["value_integral"].as_f64().unwrap(),
    );
    assert!((a - i).abs() <= 0.05 * i, "{a} vs {i}");
    assert_eq!(v["esslim_band"], serde_json::Value::Null);
    assert_eq!(
        run(&["fractal", "--preset", "koch", "--k", "3"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn dump_words() {
    let o = run(&["dump-words", "--preset", "uset", "--eps", "0.5"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["kind"], "sigma");
    assert_eq!(v["words"].as_array().unwrap().len(), 49);
    let o = run(&[
        "dump-words",
        "--preset",
        "uset",
        "--eps",
        "0.05",
        "--word",
        "1,1",
        "--lambda",
        "18",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(!v["neighbors"].as_array().unwrap().is_empty());
}
