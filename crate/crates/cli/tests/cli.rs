use std::path::PathBuf;
use std::process::{Command, Output};

use stubborn_dyn::graph::{generate, GraphKind};
use stubborn_dyn::io;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_stubborn-dyn"))
}

fn exec(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn edge_lines(text: &str) -> usize {
    text.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .count()
}

fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse::<f64>().unwrap()).collect())
        .collect()
}

#[test]
fn generate_ring() {
    let out = exec(&["generate", "--kind", "ring", "--n", "11"]);
    assert!(out.status.success());
    assert_eq!(edge_lines(&stdout(&out)), 11);
}

#[test]
fn generate_small_world_is_reproducible() {
    let a = scratch("sw_a.txt");
    let b = scratch("sw_b.txt");
    for path in [&a, &b] {
        let st = bin()
            .args([
                "generate",
                "--kind",
                "small-world",
                "--side",
                "32",
                "--q",
                "1",
                "--alpha",
                "2",
                "--seed",
                "7",
                "--out",
            ])
            .arg(path)
            .status()
            .unwrap();
        assert!(st.success());
    }
    let (x, y) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert!(!x.is_empty());
    assert_eq!(x, y);
}

#[test]
fn generate_erdos_renyi_lambda() {
    let out = exec(&[
        "generate",
        "--kind",
        "erdos-renyi",
        "--n",
        "100",
        "--lambda",
        "1.5",
        "--seed",
        "3",
    ]);
    assert!(out.status.success());
    let p = 1.5 * 100f64.ln() / 100.0;
    let direct = generate(&GraphKind::ErdosRenyi { n: 100, p }, Some(3)).unwrap();
    assert_eq!(stdout(&out), io::write_graph(&direct));
}

#[test]
fn simulate_bipartite_flags_oscillation() {
    let out = exec(&["simulate", "--kind", "ring", "--n", "6", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("oscillat"));
    let traj = stdout(&out);
    assert!(traj.starts_with("t,x_1,"));
}

#[test]
fn simulate_noisy_converges() {
    let out = exec(&[
        "simulate",
        "--kind",
        "ring",
        "--n",
        "6",
        "--seed",
        "1",
        "--epsilon",
        "0.1",
    ]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn equilibrium_line_network() {
    let opinions = scratch("line3_opinions.txt");
    std::fs::write(&opinions, "1 1\n2 0.3\n3 0\n").unwrap();
    let hitting = scratch("line3_hitting.csv");
    let out = bin()
        .args([
            "equilibrium",
            "--kind",
            "line",
            "--n",
            "3",
            "--stubborn",
            "1:1,3:1",
            "--opinions",
        ])
        .arg(&opinions)
        .arg("--hitting")
        .arg(&hitting)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    assert!(text.starts_with("i,x_inf\n"));
    let rows = csv_rows(&text);
    for (row, want) in rows.iter().zip([0.75, 0.5, 0.25]) {
        assert!((row[1] - want).abs() <= 1e-10);
    }
    let summary: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(summary["max_deviation"].as_f64().unwrap() <= 1e-10);
    assert!(std::fs::read_to_string(&hitting).unwrap().lines().count() > 1);
}

#[test]
fn bounds_complete_graph() {
    let out = exec(&[
        "bounds",
        "--kind",
        "complete",
        "--n",
        "11",
        "--stubborn",
        "1:1",
    ]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["T_upper_eta"].as_f64(), Some(422.0));
    let t = report["T_exact"].as_f64().unwrap();
    assert!(report["T_lower"].as_f64().unwrap() <= t && t <= 422.0);
}

#[test]
fn sweep_keeps_the_sandwich() {
    let out = exec(&[
        "sweep",
        "--kind",
        "complete",
        "--n",
        "11",
        "--stubborn",
        "1:1",
        "--sweep",
        "k1",
        "--range",
        "0.1:100:12:log",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    assert_eq!(
        text.lines().next(),
        Some("K_1,T_exact,T_upper_eta,T_upper_xi,T_lower")
    );
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 12);
    assert_eq!(rows[0][0], 0.1);
    assert_eq!(rows[11][0], 100.0);
    assert!(rows.windows(2).all(|w| w[0][0] < w[1][0]));
    for r in &rows {
        assert!(r[4] <= r[1] * (1.0 + 1e-9));
        assert!(r[1] <= r[2].min(r[3]) * (1.0 + 1e-9));
    }
}

#[test]
fn sweep_over_n() {
    let out = exec(&[
        "sweep", "--kind", "ring", "--sweep", "n", "--range", "5,7,9", "--k1", "2",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows = csv_rows(&stdout(&out));
    assert_eq!(
        rows.iter().map(|r| r[0]).collect::<Vec<_>>(),
        vec![5.0, 7.0, 9.0]
    );
    assert!(rows.windows(2).all(|w| w[0][1] < w[1][1]));
}

#[test]
fn empty_range_is_rejected() {
    let out = exec(&[
        "sweep",
        "--kind",
        "ring",
        "--n",
        "11",
        "--stubborn",
        "1:1",
        "--sweep",
        "k1",
        "--range",
        "1:10:0",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bad_input_is_rejected() {
    assert_eq!(
        exec(&["bounds", "--kind", "ring", "--n", "5", "--stubborn", "9:1"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(exec(&["generate"]).status.code(), Some(1));
}

#[test]
fn graph_files_round_trip() {
    let path = scratch("grid.txt");
    assert!(bin()
        .args(["generate", "--kind", "grid", "--side", "4", "--out"])
        .arg(&path)
        .status()
        .unwrap()
        .success());
    let from_file = bin()
        .args(["spectral", "--graph"])
        .arg(&path)
        .args(["--stubborn", "6:inf"])
        .output()
        .unwrap();
    let from_kind = exec(&[
        "spectral",
        "--kind",
        "grid",
        "--side",
        "4",
        "--stubborn",
        "6:inf",
    ]);
    assert!(from_file.status.success());
    assert_eq!(stdout(&from_file), stdout(&from_kind));
}

#[test]
fn thread_count_does_not_change_results() {
    let args = [
        "sweep",
        "--kind",
        "erdos-renyi",
        "--n",
        "14",
        "--p",
        "0.4",
        "--seed",
        "2",
        "--stubborn",
        "1:1,5:inf",
        "--sweep",
        "k1",
        "--range",
        "0.5:20:8:log",
        "--mode",
        "exact",
    ];
    let one = bin()
        .env("STUBBORN_DYN_THREADS", "1")
        .args(args)
        .output()
        .unwrap();
    let four = bin()
        .env("STUBBORN_DYN_THREADS", "4")
        .args(args)
        .output()
        .unwrap();
    assert!(
        one.status.success(),
        "{}",
        String::from_utf8_lossy(&one.stderr)
    );
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn random_opinions_follow_the_seed() {
    let args = [
        "equilibrium",
        "--kind",
        "ring",
        "--n",
        "9",
        "--stubborn",
        "1:1,5:2",
        "--seed",
        "4",
    ];
    assert_eq!(exec(&args).stdout, exec(&args).stdout);
}
