use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hypercontrast"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn")
}

fn ok_json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON record")
}

fn zoo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/zoo.json")
}

const TOY: &str = r#"{"schema_version":1,"num_nodes":8,
"hyperedges":[[0,1,2],[2,3],[3,4,5],[5,6,7],[0,7],[1,4,6]],
"features":[[1,0,0],[1,0.2,0],[0.9,0,0.1],[0.5,0.5,0],[0,1,0],[0,1,0.2],[0,0,1],[0.1,0,1]],
"labels":[0,0,0,1,1,1,2,2]}"#;

const TOY_CONFIG: &str = r#"{"epochs":4,"node_dim":6,"hyperedge_dim":5,"proj_hidden":4,"learning_rate":0.01}"#;

struct Fixture {
    dir: tempfile::TempDir,
}

impl Fixture {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("toy.json"), TOY).unwrap();
        std::fs::write(dir.path().join("cfg.json"), TOY_CONFIG).unwrap();
        Self { dir }
    }

    fn path(&self, name: &str) -> String {
        self.dir.path().join(name).display().to_string()
    }
}

#[test]
fn stats_reports_zoo_degrees() {
    let v = ok_json(&["stats", zoo().to_str().unwrap(), "--json"]);
    assert_eq!(v["nodes"], 101);
    assert_eq!(v["hyperedges"], 43);
    assert_eq!(v["memberships"], 1717);
    assert_eq!(format!("{:.2}", v["avg_node_degree"].as_f64().unwrap()), "17.00");
    assert_eq!(format!("{:.2}", v["avg_hyperedge_size"].as_f64().unwrap()), "39.93");
    let table = String::from_utf8(run(&["stats", zoo().to_str().unwrap()]).stdout).unwrap();
    for field in ["# nodes", "# hyperedges", "avg. hyperedge size", "max. node degree", "# features", "# classes"] {
        assert!(table.contains(field), "missing {field}");
    }
}

#[test]
fn stats_of_one_edge() {
    let f = Fixture::new();
    let p = f.path("one.json");
    std::fs::write(&p, r#"{"schema_version":1,"num_nodes":3,"hyperedges":[[0,1,2]],"features":[[0],[0],[0]],"labels":[0,0,0]}"#)
        .unwrap();
    let v = ok_json(&["stats", &p, "--json"]);
    assert_eq!(v["avg_hyperedge_size"], 3.0);
}

#[test]
fn split_writes_disjoint_files() {
    let f = Fixture::new();
    let v = ok_json(&["split", &f.path("toy.json"), "--count", "2", "--seed", "5", "--out", &f.path("splits")]);
    let files = v["files"].as_array().unwrap();
    assert_eq!(files.len(), 2);
    for (i, file) in files.iter().enumerate() {
        let s = hypercontrast::dataio::load_split(Path::new(file.as_str().unwrap()), Some(8)).unwrap();
        assert_eq!(s.seed, 5 + i as u64);
    }
    let one = ok_json(&["split", &f.path("toy.json"), "--count", "1", "--out", &f.path("one")]);
    assert_eq!(one["files"].as_array().unwrap().len(), 1);
    let bad = run(&["split", &f.path("toy.json"), "--ratios", "0.5,0.6,0.1", "--out", &f.path("bad")]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn training_is_reproducible_and_variants_switch_terms() {
    let f = Fixture::new();
    let train = |variant: &str, out: &str| {
        ok_json(&["train", &f.path("toy.json"), "--config", &f.path("cfg.json"), "--seed", "3", "--variant", variant, "--out", &f.path(out)])
    };
    let a = train("tricl", "a");
    let b = train("tricl", "b");
    assert_eq!(a["digest"], b["digest"]);

    let n = train("tricl-n", "n");
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(f.path("n/summary.json")).unwrap()).unwrap();
    for epoch in summary["loss_breakdown"].as_array().unwrap() {
        assert!(epoch["group"].is_null() && epoch["membership"].is_null());
        assert_eq!(epoch["total"], epoch["node"]);
    }
    assert_ne!(n["digest"], a["digest"]);

    train("loss-mask=0,0,1", "m");
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(f.path("m/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["config"]["use_node_loss"], false);
    assert!(summary["loss_breakdown"][0]["membership"].is_number());
}

#[test]
fn embeddings_agree_across_formats_and_random_init_is_seeded() {
    let f = Fixture::new();
    ok_json(&["train", &f.path("toy.json"), "--config", &f.path("cfg.json"), "--out", &f.path("run")]);
    let model = f.path("run/model.json");
    let csv = ok_json(&["embed", &f.path("toy.json"), "--model", &model, "--out", &f.path("e.csv")]);
    assert_eq!((csv["rows"].as_u64(), csv["cols"].as_u64()), (Some(8), Some(6)));
    ok_json(&["embed", &f.path("toy.json"), "--model", &model, "--out", &f.path("e.bin")]);
    use hypercontrast::dataio::{load_embeddings, EmbeddingFormat};
    let c = load_embeddings(Path::new(&f.path("e.csv")), EmbeddingFormat::Csv).unwrap();
    let b = load_embeddings(Path::new(&f.path("e.bin")), EmbeddingFormat::Binary).unwrap();
    assert_eq!(c, b);

    let r = |seed: &str, out: &str| {
        ok_json(&["embed", &f.path("toy.json"), "--random-init", "--config", &f.path("cfg.json"), "--seed", seed, "--out", &f.path(out)]);
        std::fs::read(f.path(out)).unwrap()
    };
    assert_eq!(r("1", "r1.bin"), r("1", "r1b.bin"));
    assert_ne!(r("1", "r1.bin"), r("2", "r2.bin"));
}

#[test]
fn evaluation_updates_the_summary() {
    let f = Fixture::new();
    ok_json(&["train", &f.path("toy.json"), "--config", &f.path("cfg.json"), "--out", &f.path("run")]);
    ok_json(&["split", &f.path("toy.json"), "--count", "1", "--ratios", "0.5,0.25,0.25", "--out", &f.path("splits")]);
    let summary = f.path("run/summary.json");
    let c = ok_json(&[
        "eval-classify",
        &f.path("toy.json"),
        "--model",
        &f.path("run/model.json"),
        "--splits",
        &f.path("splits/split_00.json"),
        "--summary",
        &summary,
    ]);
    assert_eq!(c["per_split"].as_array().unwrap().len(), 1);
    let k = ok_json(&["eval-cluster", &f.path("toy.json"), "--model", &f.path("run/model.json"), "--summary", &summary]);
    assert_eq!(k["per_run_nmi"].as_array().unwrap().len(), 5);

    let s = hypercontrast::report::load_summary(Path::new(&summary)).unwrap();
    assert!(s.classification.is_some() && s.clustering.is_some() && s.silhouette.is_some());
    assert_eq!(s.compute_digest(), s.digest);
    assert_eq!(s.loss_trace.len(), 4);
}

#[test]
fn errors_are_single_json_lines() {
    let f = Fixture::new();
    let cases: [(&[&str], i32); 4] = [
        (&["eval-classify", &f.path("toy.json"), "--embeddings", &f.path("none.bin")], 1),
        (&["train", &f.path("missing.json"), "--out", &f.path("x")], 1),
        (&["train", &f.path("toy.json"), "--variant", "loss-mask=1,0", "--out", &f.path("x")], 2),
        (&["no-such-command"], 2),
    ];
    for (args, code) in cases {
        let out = run(args);
        assert_eq!(out.status.code(), Some(code), "{args:?}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert_eq!(err.lines().count(), 1, "{err}");
        let v: Value = serde_json::from_str(&err).unwrap();
        assert!(v["error"].is_string() && v["message"].is_string());
    }
}

#[test]
fn bundled_configs_load() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut count = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let cfg = hypercontrast::dataio::load_config(&entry.unwrap().path()).unwrap();
        assert!(cfg.name.is_some());
        count += 1;
    }
    assert_eq!(count, 10);
    let cora = hypercontrast::dataio::load_config(
        &Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/cora_cocitation.json"),
    )
    .unwrap();
    assert_eq!(cora.omega_g, 4.0);
}
