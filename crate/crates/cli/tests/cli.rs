use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const STD: &str = "{ alpha = 1.0, beta = 0.0, gamma = -6.0, c = 1.0, y0 = 0.0 }";

const SMALL_RUN: &str = r#"
[simulate]
length = 20.0
h = 0.1
t_final = 1.0
frames = 4
"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kdv-star"))
}

fn graph_file(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, body).unwrap();
    path
}

fn real_line(extra: &str) -> String {
    format!(
        "edges_minus = [{STD}]\nedges_plus = [{STD}]\n\n[coupling]\nkind = \"continuity\"\nU = [1.0]\n{extra}"
    )
}

fn run(args: &[&str], graph: Option<&Path>, out: &Path) -> Output {
    let mut cmd = bin();
    cmd.args(args).arg("--out").arg(out);
    if let Some(g) = graph {
        cmd.arg("--graph").arg(g);
    }
    cmd.output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn data_rows(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split_whitespace().map(|x| x.parse().unwrap()).collect())
        .collect()
}

#[test]
fn check_passes_on_the_balanced_line() {
    let dir = TempDir::new().unwrap();
    let g = graph_file(&dir, "line.toml", &real_line(""));
    let out = dir.path().join("out");
    let o = run(&["check"], Some(&g), &out);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&out.join("report.json"))["pass"], true);
    assert!(out.join("report.txt").exists());
    let m = json(&out.join("manifest.json"));
    assert_eq!(m["command"], "check");
    assert_eq!(m["inputs"][0]["bytes"], real_line("").len());
    assert!(m["versions"]["kdv-star"].is_string());
}

#[test]
fn check_names_c6_for_unbalanced_drift() {
    let dir = TempDir::new().unwrap();
    let body = r#"
edges_minus = [{ alpha = 18.0, beta = 1.0, gamma = -12.0, c = 3.0, y0 = 0.0 }]
edges_plus = [
  { alpha = 1.0, beta = 1.0, gamma = -6.0, c = 1.0, y0 = 0.0 },
  { alpha = 1.0, beta = 1.0, gamma = -6.0, c = 1.0, y0 = 0.0 },
]

[coupling]
kind = "continuity"
U = [0.16666666666666666, 0.16666666666666666]
"#;
    let g = graph_file(&dir, "drift.toml", body);
    let out = dir.path().join("out");
    let o = run(&["check"], Some(&g), &out);
    assert_eq!(code(&o), 1);
    let report = json(&out.join("report.json"));
    let failed: Vec<&str> = report["conditions"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["pass"] == false)
        .map(|c| c["id"].as_str().unwrap())
        .collect();
    assert_eq!(failed, ["C6"]);
    assert!(String::from_utf8_lossy(&o.stdout).contains("C6"));
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let missing = dir.path().join("missing.toml");
    assert_eq!(code(&run(&["check"], Some(&missing), &out)), 2);

    let broken = graph_file(&dir, "broken.toml", "edges_minus = [");
    assert_eq!(code(&run(&["check"], Some(&broken), &out)), 2);

    let uncoupled = graph_file(
        &dir,
        "uncoupled.toml",
        &format!("edges_minus = [{STD}]\nedges_plus = [{STD}]\n"),
    );
    assert_eq!(code(&run(&["check"], Some(&uncoupled), &out)), 2);

    let g = graph_file(&dir, "line.toml", &real_line(""));
    assert_eq!(code(&run(&["check", "--tol", "-1"], Some(&g), &out)), 2);
    assert_eq!(
        code(&run(&["wave", "--range", "1:0:0.1"], Some(&g), &out)),
        2
    );
    assert_eq!(code(&bin().arg("check").output().unwrap()), 2);
}

#[test]
fn wave_samples_every_edge_with_small_residual() {
    let dir = TempDir::new().unwrap();
    let g = graph_file(&dir, "line.toml", &real_line(""));
    let out = dir.path().join("out");
    let o = run(&["wave", "--range", "-15:15:0.25"], Some(&g), &out);
    assert_eq!(code(&o), 0);
    for name in ["wave_minus0.tsv", "wave_plus0.tsv"] {
        let rows = data_rows(&out.join(name));
        assert_eq!(rows.len(), 30 * 4 + 1);
        assert_eq!(rows[0][0], -15.0);
        let worst = rows.iter().map(|r| r[5].abs()).fold(0.0, f64::max);
        assert!(worst <= 1e-8, "{worst}");
        assert!(rows.iter().all(|r| r.len() == 6));
    }
}

#[test]
fn wave_rejects_an_edge_without_a_solitary_wave() {
    let dir = TempDir::new().unwrap();
    let body = format!("edges_minus = [{STD}]\nedges_plus = [{{ alpha = 1.0, beta = -2.0, gamma = -6.0, c = 1.0, y0 = 0.0 }}]\n");
    let g = graph_file(&dir, "bad.toml", &body);
    let o = run(&["wave"], Some(&g), &dir.path().join("out"));
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("plus[0]"));
}

#[test]
fn phase_portrait_of_the_reference_parameters() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let o = run(
        &[
            "phase", "--alpha", "1", "--beta", "0", "--gamma", "1", "--c", "1", "--a", "0",
        ],
        None,
        &out,
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let pts = data_rows(&out.join("stationary_points.tsv"));
    let mut found: Vec<(f64, f64)> = pts.iter().map(|r| (r[0], r[1])).collect();
    found.sort_by(|a, b| a.0.total_cmp(&b.0));
    assert_eq!(found, [(-2.0, 0.0), (0.0, 0.0)]);
    assert_eq!(
        json(&out.join("phase.json"))["classification"],
        "CenterAndSaddle"
    );

    let orbit = data_rows(&out.join("orbit.tsv"));
    let h0 = orbit[0][3];
    assert!(orbit.iter().all(|r| (r[3] - h0).abs() <= 1e-6));
    assert_eq!(data_rows(&out.join("vector_field.tsv")).len(), 41 * 41);
}

#[test]
fn phase_reports_no_stationary_point() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    // (β + c)² + 2Aγ = 1 - 4 < 0
    let o = run(
        &[
            "phase", "--alpha", "1", "--gamma", "1", "--c", "1", "--a", "-2", "--range", "-3:3:11",
        ],
        None,
        &out,
    );
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(out.join("vector_field.tsv")).unwrap();
    assert!(text.starts_with("# classification NoStationaryPoint\n"));
    assert!(!out.join("orbit.tsv").exists());
    assert_eq!(data_rows(&out.join("vector_field.tsv")).len(), 121);
}

#[test]
fn phase_reads_an_edge_from_a_graph_file() {
    let dir = TempDir::new().unwrap();
    let g = graph_file(&dir, "line.toml", &real_line(""));
    let out = dir.path().join("out");
    assert_eq!(code(&run(&["phase", "--edge", "plus0"], Some(&g), &out)), 0);
    assert_eq!(
        json(&out.join("manifest.json"))["parameters"]["gamma"],
        -6.0
    );
    assert_eq!(code(&run(&["phase", "--edge", "plus3"], Some(&g), &out)), 2);
}

#[test]
fn simulate_balanced_line_passes() {
    let dir = TempDir::new().unwrap();
    let g = graph_file(&dir, "line.toml", &real_line(SMALL_RUN));
    let out = dir.path().join("out");
    let o = run(&["simulate"], Some(&g), &out);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = json(&out.join("summary.json"));
    assert_eq!(s["pass"], true);
    assert!(s["final_error"].as_f64().unwrap() < 1e-2);
    assert_eq!(
        fs::read_to_string(out.join("diagnostics.jsonl"))
            .unwrap()
            .lines()
            .count(),
        5
    );
    let frame = data_rows(&out.join("frames/frame_0004.tsv"));
    assert_eq!(frame.len(), 2 * 201);
}

#[test]
fn simulate_refuses_a_failing_graph_unless_overridden() {
    let dir = TempDir::new().unwrap();
    let body = format!(
        "edges_minus = [{STD}]\nedges_plus = [{{ alpha = 1.0, beta = 0.0, gamma = -7.2, c = 1.0, y0 = 0.0 }}]\n\n\
         [coupling]\nkind = \"continuity\"\nU = [1.0]\n{SMALL_RUN}"
    );
    let g = graph_file(&dir, "skew.toml", &body);
    let refused = dir.path().join("refused");
    let o = run(&["simulate"], Some(&g), &refused);
    assert_eq!(code(&o), 1);
    assert!(!refused.join("summary.json").exists());

    let forced = dir.path().join("forced");
    let o = run(&["simulate", "--override-check"], Some(&g), &forced);
    assert_eq!(code(&o), 1);
    let s = json(&forced.join("summary.json"));
    assert_eq!(s["checklist_pass"], false);
    assert!(s["peak_vertex"]["trace_to_y"].as_f64().unwrap() > 1e-3);
}

#[test]
fn simulate_rejects_an_unstable_time_step() {
    let dir = TempDir::new().unwrap();
    let g = graph_file(
        &dir,
        "line.toml",
        &real_line("[simulate]\nh = 0.1\ndt = 0.01\n"),
    );
    let o = run(&["simulate"], Some(&g), &dir.path().join("out"));
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("stability"));
}

#[test]
fn simulate_reports_blow_up_with_the_last_stable_frame() {
    let dir = TempDir::new().unwrap();
    let g = graph_file(
        &dir,
        "line.toml",
        &real_line(&format!("{SMALL_RUN}blowup_factor = 1.0000001\n")),
    );
    let out = dir.path().join("out");
    let o = run(&["simulate"], Some(&g), &out);
    assert_eq!(code(&o), 3);
    assert!(!data_rows(&out.join("last_stable.tsv")).is_empty());
    assert!(out.join("manifest.json").exists());
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let g = graph_file(&dir, "line.toml", &real_line(""));
    let read = |sub: &str, file: &str| fs::read(dir.path().join(sub).join(file)).unwrap();
    for sub in ["a", "b"] {
        assert_eq!(code(&run(&["check"], Some(&g), &dir.path().join(sub))), 0);
        let phase = dir.path().join(sub).join("phase");
        assert_eq!(
            code(&run(
                &["phase", "--alpha", "2", "--beta", "0.5", "--gamma", "-3", "--c", "1"],
                None,
                &phase
            )),
            0
        );
    }
    for file in ["report.json", "report.txt", "manifest.json"] {
        assert_eq!(read("a", file), read("b", file));
    }
    for file in ["phase.json", "orbit.tsv", "vector_field.tsv"] {
        assert_eq!(read("a/phase", file), read("b/phase", file));
    }
}
