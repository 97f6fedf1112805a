use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn corrmv(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_corrmv"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = corrmv(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(path: impl AsRef<Path>) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn failure(dir: &Path, args: &[&str]) -> Value {
    let out = corrmv(dir, args);
    assert_eq!(out.status.code(), Some(2), "{args:?}");
    let stderr = String::from_utf8(out.stderr).unwrap();
    let line = stderr.lines().last().expect("error line");
    serde_json::from_str(line).unwrap()
}

fn write(dir: &Path, name: &str, body: &str) {
    fs::write(dir.join(name), body).unwrap();
}

#[test]
fn synth_then_fit_through_manifest() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    ok(d, &["--out", "lab", "--seed", "2", "synth", "labeled", "--classes", "3", "--per-class", "8"]);
    ok(d, &["--config", "lab/manifest.json", "--out", "fit", "fit-mv", "--max-outer", "4"]);
    for f in ["x.csv", "w1.csv", "w2.csv", "weights.csv", "trace.csv", "model.json", "run.json"] {
        assert!(d.join("fit").join(f).exists(), "{f}");
    }
    let x = fs::read_to_string(d.join("fit/x.csv")).unwrap();
    assert_eq!(x.lines().count(), 10);
    assert_eq!(x.lines().next().unwrap().split(',').count(), 24);

    let run = json(d.join("fit/run.json"));
    assert_eq!(run["command"], "fit-mv");
    assert_eq!(run["seed"], 2);
    assert_eq!(run["inputs"].as_array().unwrap().len(), 2);
    assert_eq!(run["inputs"][0]["sha256"].as_str().unwrap().len(), 64);

    let stdout = ok(d, &["--out", "fit", "eval", "knn", "--features", "fit/x.csv", "--labels", "lab/labels.csv"]);
    let report: Value = serde_json::from_str(stdout.trim()).unwrap();
    let acc = report["accuracy"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&acc));
    assert_eq!(json(d.join("fit/eval.json")), report);
}

#[test]
fn embed_and_score_a_point_set() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    ok(d, &["--out", "ps", "--seed", "1", "synth", "pointset"]);
    ok(d, &["--config", "ps/manifest.json", "--out", "emb", "embed", "--max-iter", "20"]);
    let report = json(d.join("emb/embedding.json"));
    assert_eq!(report["corrections"].as_array().unwrap().len(), 2);
    assert_eq!(report["corrections"][0]["clean"], true);
    assert_eq!(fs::read_to_string(d.join("emb/trace.csv")).unwrap().lines().count(), 21);

    let stdout = ok(
        d,
        &["--out", "emb", "eval", "procrustes", "--estimate", "emb/configuration.csv", "--reference", "ps/points.csv"],
    );
    let score: Value = serde_json::from_str(stdout.trim()).unwrap();
    assert!(score["rmse"].as_f64().unwrap().is_finite());

    ok(d, &["--out", "cmds", "embed", "--solver", "cmds", "--view", "ps/view1.csv", "--view", "ps/view2.csv"]);
    assert!(!d.join("cmds/trace.csv").exists());
}

#[test]
fn retrieval_on_clean_clusters() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    ok(d, &["--out", "cl", "--seed", "3", "synth", "cluster", "--fractions", "0,0"]);
    let stdout = ok(
        d,
        &["--out", "ev", "eval", "retrieval", "--distances", "cl/view1.csv", "--labels", "cl/labels.csv"],
    );
    let score: Value = serde_json::from_str(stdout.trim()).unwrap();
    assert_eq!(score["metric"], "retrieval");
}

#[test]
fn recipe_summary_is_deterministic() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    ok(d, &["--out", "a", "--seed", "5", "recipe", "pointset-25"]);
    ok(d, &["--out", "b", "--seed", "5", "recipe", "pointset-25"]);
    let a = fs::read(d.join("a/summary.json")).unwrap();
    let b = fs::read(d.join("b/summary.json")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn mismatched_view_sizes_name_both_files() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    write(d, "a.csv", "1,2,3\n4,5,6\n");
    write(d, "b.csv", "1,2\n3,4\n");
    let err = failure(d, &["fit-mv", "--view", "a.csv", "--view", "b.csv"]);
    assert_eq!(err["error"], "validation");
    let msg = err["message"].as_str().unwrap();
    assert!(msg.contains("a.csv") && msg.contains("b.csv"), "{msg}");
    assert!(msg.contains('3') && msg.contains('2'), "{msg}");
}

#[test]
fn non_square_dissimilarity_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    write(d, "d.csv", "0,1,2\n1,0,3\n");
    let err = failure(d, &["embed", "--solver", "ree", "--view", "d.csv"]);
    assert_eq!(err["error"], "validation");
}

#[test]
fn bad_cell_reports_its_line() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    write(d, "a.csv", "1,2\n3,oops\n");
    let err = failure(d, &["fit-mv", "--view", "a.csv"]);
    assert!(err["message"].as_str().unwrap().contains('2'));
}

#[test]
fn sanitize_reports_symmetrization_and_clamping() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    write(d, "d.csv", "0,2,-0.1\n4,0,1\n-0.1,1,0\n");
    ok(d, &["--out", "o", "embed", "--solver", "cmds", "--view", "d.csv"]);
    let c = &json(d.join("o/embedding.json"))["corrections"][0];
    assert_eq!(c["clean"], false);
    assert_eq!(c["max_asymmetry"].as_f64().unwrap(), 2.0);
    assert_eq!(c["negatives_clamped"].as_u64().unwrap(), 2);
    assert_eq!(c["min_value"].as_f64().unwrap(), -0.1);
}

#[test]
fn mfeat_directory_ingest() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    fs::create_dir(d.join("mfeat")).unwrap();
    for (name, dim) in [("mfeat-zer", 47), ("mfeat-mor", 6)] {
        let mut body = String::new();
        for i in 0..20 {
            let row: Vec<String> = (0..dim).map(|j| format!("{}", (i * 7 + j * 3) % 11)).collect();
            body.push_str(&format!("  {}\n", row.join("  ")));
        }
        write(&d.join("mfeat"), name, &body);
    }
    ok(d, &["--out", "o", "fit-mv", "--mfeat", "mfeat", "--mfeat-views", "zer,mor", "--latent-dim", "3", "--max-outer", "2"]);
    let x = fs::read_to_string(d.join("o/x.csv")).unwrap();
    assert_eq!(x.lines().count(), 3);
    assert_eq!(x.lines().next().unwrap().split(',').count(), 20);
}

#[test]
fn manifest_solver_must_fit_task() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    write(d, "v.csv", "1,2\n3,4\n");
    write(d, "m.json", r#"{"task": "fit-mv", "views": ["v.csv"], "solver": "cmvree"}"#);
    let err = failure(d, &["--config", "m.json", "fit-mv"]);
    assert_eq!(err["error"], "validation");
}

#[test]
fn usage_errors_exit_two() {
    let tmp = TempDir::new().unwrap();
    let err = failure(tmp.path(), &["fit-mv", "--solver", "nonsense"]);
    assert_eq!(err["error"], "usage");
}
