//! Replays the checked-in fuzz seeds through the same checks as the fuzz
//! targets, so the corpus stays exercised on a stable toolchain.

use std::fs;
use std::path::{Path, PathBuf};

use hypercontrast::dataio::{
    dataset_to_file, parse_config, parse_dataset, parse_embeddings_binary, parse_embeddings_csv, parse_hyperedge_text,
    parse_model, parse_split,
};

fn seeds(target: &str) -> Vec<(PathBuf, Vec<u8>)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap().to_string_lossy().starts_with("seed_"))
        .map(|p| {
            let bytes = fs::read(&p).unwrap();
            (p, bytes)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

fn text(bytes: &[u8]) -> &str {
    std::str::from_utf8(bytes).expect("text seeds are UTF-8")
}

fn accepted(target: &str, ok: impl Fn(&[u8]) -> bool) -> Vec<String> {
    seeds(target)
        .into_iter()
        .filter(|(_, b)| ok(b))
        .map(|(p, _)| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect()
}

#[test]
fn dataset_seeds() {
    let ok = accepted("dataset_json", |b| match parse_dataset(text(b)) {
        Ok(d) => {
            let again = serde_json::to_string(&dataset_to_file(&d)).unwrap();
            assert_eq!(parse_dataset(&again).unwrap(), d);
            true
        }
        Err(_) => false,
    });
    assert_eq!(ok, ["seed_single.json", "seed_toy.json"]);
}

#[test]
fn hyperedge_text_seeds() {
    let ok = accepted("hyperedge_text", |b| match parse_hyperedge_text(text(b), None) {
        Ok(h) => parse_hyperedge_text(text(b), Some(h.num_nodes())).is_ok(),
        Err(_) => false,
    });
    assert_eq!(ok, ["seed_basic.txt", "seed_single.txt"]);
}

#[test]
fn config_seeds() {
    let ok = accepted("run_config", |b| parse_config(text(b)).map(|c| c.train_config()).is_ok());
    assert_eq!(ok.len(), 4);
}

#[test]
fn split_seeds() {
    let ok = accepted("split_json", |b| parse_split(text(b), None).is_ok());
    assert_eq!(ok, ["seed_toy.json"]);
}

#[test]
fn embedding_seeds() {
    let bin = accepted("embeddings_binary", |b| parse_embeddings_binary(b).is_ok());
    assert_eq!(bin, ["seed_empty.bin", "seed_toy.bin"]);
    let csv = accepted("embeddings_csv", |b| parse_embeddings_csv(text(b)).is_ok());
    assert_eq!(csv.len(), 3);
    let from_bin = parse_embeddings_binary(&seeds("embeddings_binary")[2].1).unwrap();
    let from_csv = parse_embeddings_csv(text(&seeds("embeddings_csv")[2].1)).unwrap();
    assert_eq!(from_bin, from_csv);
}

#[test]
fn model_seeds() {
    let ok = accepted("model_json", |b| parse_model(text(b)).is_ok());
    assert_eq!(ok, ["seed_toy.json"]);
}
