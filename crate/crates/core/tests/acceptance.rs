//! Acceptance suite. Every criterion prints exactly one line:
//! `PASS`, `FAIL`, `WARN` (soft checks) or `NOT RUN`, followed by the
//! measured values and the threshold.
//!
//! Tests take a shared lock so that wall-clock budgets are measured
//! without other criteria competing for the CPU.

use std::path::{Path, PathBuf};
use std::sync::{Mutex, MutexGuard, OnceLock};
use std::time::{Duration, Instant};

use hypercontrast::augment::make_views;
use hypercontrast::dataio::{load_config, load_dataset, write_embeddings_binary, RunConfigFile};
use hypercontrast::diff::{grad_check, DiffError, Tape, Var};
use hypercontrast::eval::{evaluate_classification, kmeans, mean_std, nmi, pairwise_f1, ProbeConfig};
use hypercontrast::hgraph::{
    add_self_loops, random_split, remove_isolated_nodes, Hypergraph, LabeledDataset, Membership, Split,
};
use hypercontrast::linalg::{Matrix, Real};
use hypercontrast::loss::{
    membership_loss, node_loss, sample_membership_negatives, subsampled_contrast, ComponentSwitches, LossConfig,
    LossError, MembershipMode, MembershipTargets,
};
use hypercontrast::model::{encode_values, EncoderKind, GraphOps, ModelDims, ModelParams, ParamGroup};
use hypercontrast::report::RunSummary;
use hypercontrast::seed;
use hypercontrast::trainer::{embed, objective, train, EpochInputs, TrainConfig, TrainingData};
use rand::Rng;

fn serial() -> MutexGuard<'static, ()> {
    static LOCK: Mutex<()> = Mutex::new(());
    LOCK.lock().unwrap_or_else(|e| e.into_inner())
}

fn line(status: &str, id: u32, title: &str, detail: impl AsRef<str>) {
    println!("{status:<7} [{id:>2}] {title}: {}", detail.as_ref());
}

fn verdict(id: u32, title: &str, ok: bool, detail: impl AsRef<str>) {
    line(if ok { "PASS" } else { "FAIL" }, id, title, detail);
    assert!(ok, "criterion {id} failed");
}

fn soft(id: u32, title: &str, ok: bool, detail: impl AsRef<str>) {
    line(if ok { "PASS" } else { "WARN" }, id, title, detail);
}

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn uniform(rows: usize, cols: usize, rng: &mut impl Rng) -> Matrix<f64> {
    Matrix::from_vec(rows, cols, (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

/// Random hypergraph with non-empty hyperedges of random positive weight.
fn random_hypergraph(n: usize, m: usize, max_size: usize, rng: &mut impl Rng) -> Hypergraph {
    let mut memberships = Vec::new();
    for j in 0..m {
        let size = rng.random_range(1..=max_size.min(n));
        for i in rand::seq::index::sample(rng, n, size) {
            memberships.push(Membership { node: i, hyperedge: j });
        }
    }
    let weights = (0..m).map(|_| rng.random_range(0.5..2.0)).collect();
    Hypergraph::with_attributes(n, m, memberships, weights, vec![false; m]).unwrap()
}

// ---------------------------------------------------------------------------
// 1. Gradient oracle

fn gradient_report(kind: EncoderKind, run_seed: u64) -> (Vec<(ParamGroup, String, f64)>, usize) {
    let mut rng = seed::stream(run_seed, &[]);
    let h = random_hypergraph(8, 5, 4, &mut rng);
    let x = uniform(8, 4, &mut rng);
    let d = LabeledDataset::new(h, x, vec![0; 8], 1).unwrap();
    let cfg = TrainConfig {
        node_dim: 3,
        hyperedge_dim: 3,
        proj_hidden: 3,
        encoder: kind,
        seed: run_seed,
        loss: LossConfig { tau_n: 0.5, tau_g: 0.7, tau_m: 0.8, omega_g: 1.5, omega_m: 0.75, ..LossConfig::default() },
        ..TrainConfig::default()
    };
    let data = TrainingData::<f64>::new(&d);
    let mut params = ModelParams::<f64>::init(cfg.model_dims(4), run_seed).unwrap();
    // Non-zero biases so that every bias and slope gradient is exercised.
    let specs = params.specs().to_vec();
    for (s, t) in specs.iter().zip(params.tensors_mut()) {
        if s.rows == 1 && !s.decay && s.group != ParamGroup::Slope {
            *t = uniform(1, s.cols, &mut rng).map(|v| 0.3 * v);
        }
    }
    let (v1, v2) = make_views(&data.features, &data.hypergraph, &cfg.augment, run_seed, 0);
    let ops1 = GraphOps::new(kind, &add_self_loops(&v1.hypergraph));
    let ops2 = GraphOps::new(kind, &add_self_loops(&v2.hypergraph));
    let sample = sample_membership_negatives(&data.targets, None, &mut seed::stream(run_seed, &[3]));
    let inputs = EpochInputs {
        x1: &v1.features,
        x2: &v2.features,
        ops1: &ops1,
        ops2: &ops2,
        eligible: &data.eligible,
        targets: &data.targets,
        sample: Some(&sample),
    };
    let layout = params.layout().clone();
    let build = |tape: &mut Tape<f64>, vars: &[Var]| -> Result<Var, DiffError> {
        let mut rng = seed::stream(0, &[]);
        match objective(tape, &layout, vars, &inputs, &cfg.loss, &mut rng) {
            Ok(parts) => Ok(parts.total),
            Err(LossError::Diff(e)) => Err(e),
            Err(e) => Err(DiffError::Contract { op: "objective", detail: e.to_string() }),
        }
    };
    let named: Vec<(String, Matrix<f64>)> =
        specs.iter().zip(params.tensors()).map(|(s, t)| (s.name.clone(), t.clone())).collect();
    let report = grad_check(build, &named, 1e-6, 1e-4).unwrap();
    let excluded = report.params.iter().map(|p| p.excluded).sum();
    let rows = specs.iter().zip(&report.params).map(|(s, p)| (s.group, p.name.clone(), p.max_rel_error)).collect();
    (rows, excluded)
}

#[test]
fn c01_gradient_oracle() {
    let _g = serial();
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut groups = std::collections::BTreeMap::<String, f64>::new();
    let mut excluded = 0;
    for (kind, s) in [(EncoderKind::MeanPool, 1), (EncoderKind::MeanPool, 2), (EncoderKind::Hgnn, 3)] {
        let (rows, ex) = gradient_report(kind, s);
        excluded += ex;
        for (group, _, err) in rows {
            let e = groups.entry(format!("{group:?}")).or_default();
            *e = e.max(err);
            worst = worst.max(err);
        }
    }
    let elapsed = start.elapsed();
    let required = ["ThetaE", "ThetaV", "Theta", "Bias", "Slope", "NodeHead", "HyperedgeHead", "Discriminator"];
    let covered = required.iter().all(|g| groups.contains_key(*g));
    verdict(
        1,
        "gradient oracle",
        covered && worst < 1e-4 && elapsed < Duration::from_secs(60),
        format!("max rel error {worst:.2e} (< 1e-4) over {groups:?}, {excluded} kink entries excluded, {elapsed:.1?} (< 60s)"),
    );
}

// ---------------------------------------------------------------------------
// 2. Loss identities

fn scalar(f: impl FnOnce(&mut Tape<f64>) -> Result<Var, LossError>) -> f64 {
    let mut t = Tape::new();
    let v = f(&mut t).unwrap();
    t.scalar(v)
}

#[test]
fn c02_loss_identities() {
    let _g = serial();
    let mut rng = seed::stream(2, &[]);
    let row = uniform(1, 6, &mut rng);
    let same = Matrix::from_rows(&vec![row.row(0).to_vec(); 7]).unwrap();
    let a = scalar(|t| {
        let (x, y) = (t.constant(same.clone()), t.constant(same.clone()));
        node_loss(t, x, y, 0.5)
    });
    let err_a = (a - 7f64.ln()).abs();

    let eye = Matrix::<f64>::identity(3);
    let b = scalar(|t| {
        let (x, y) = (t.constant(eye.clone()), t.constant(eye.clone()));
        node_loss(t, x, y, 1.0)
    });
    let e = std::f64::consts::E;
    let err_b = (b + (e / (e + 2.0)).ln()).abs();

    let (u, v) = (uniform(9, 4, &mut rng), uniform(9, 4, &mut rng));
    let full = scalar(|t| {
        let (x, y) = (t.constant(u.clone()), t.constant(v.clone()));
        node_loss(t, x, y, 0.6)
    });
    let sub = scalar(|t| {
        let (x, y) = (t.constant(u.clone()), t.constant(v.clone()));
        subsampled_contrast(t, x, y, 0.6, 8, &mut seed::stream(9, &[]))
    });
    let exact_c = full.to_bits() == sub.to_bits();

    let h = random_hypergraph(10, 6, 4, &mut rng);
    let targets = MembershipTargets::new(&h);
    let sample = sample_membership_negatives(&targets, None, &mut seed::stream(4, &[]));
    let (z, y) = (uniform(10, 3, &mut rng), uniform(6, 3, &mut rng));
    let d = scalar(|t| {
        let (zv, yv, s) = (t.constant(z.clone()), t.constant(y.clone()), t.constant(Matrix::zeros(3, 3)));
        membership_loss(t, zv, yv, zv, yv, s, &targets, &sample, 1.0, MembershipMode::Sampled)
    });
    let err_d = (d - 2.0 * 2f64.ln()).abs();

    verdict(
        2,
        "loss identities",
        err_a < 1e-9 && err_b < 1e-9 && exact_c && err_d < 1e-9,
        format!(
            "(a) |L_n - ln 7| = {err_a:.1e}; (b) |L_n + ln(e/(e+2))| = {err_b:.1e}; (c) k = m-1 bitwise equal: {exact_c}; \
             (d) |L_m - 2 ln 2| = {err_d:.1e} (tol 1e-9)"
        ),
    );
}

// ---------------------------------------------------------------------------
// 3. Encoder oracle

fn prelu(v: f64, a: f64) -> f64 {
    if v >= 0.0 {
        v
    } else {
        a * v
    }
}

fn dense_matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    a.iter()
        .map(|r| (0..b[0].len()).map(|c| r.iter().zip(b).map(|(x, row)| x * row[c]).sum()).collect())
        .collect()
}

fn affine_prelu(m: &[Vec<f64>], theta: &Matrix<f64>, bias: &Matrix<f64>, slope: f64) -> Vec<Vec<f64>> {
    dense_matmul(m, &theta.to_rows())
        .into_iter()
        .map(|r| r.iter().zip(bias.row(0)).map(|(v, b)| prelu(v + b, slope)).collect())
        .collect()
}

/// Encoder written with the dense incidence matrix `H`, diagonal `W`, `D_V`, `D_E`.
fn dense_encoder(params: &ModelParams<f64>, x: &Matrix<f64>, h: &Hypergraph) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let inc: Matrix<f64> = h.incidence_dense();
    let (n, m) = inc.shape();
    let w = h.weights();
    let dv: Vec<f64> = (0..n).map(|i| (0..m).map(|j| inc.get(i, j) * w[j]).sum()).collect();
    let de: Vec<f64> = (0..m).map(|j| (0..n).map(|i| inc.get(i, j)).sum()).collect();
    let inv = |v: f64| if v == 0.0 { 0.0 } else { 1.0 / v };
    // Left factors as explicit dense matrices.
    let de_ht: Vec<Vec<f64>> = (0..m).map(|j| (0..n).map(|i| inv(de[j]) * inc.get(i, j)).collect()).collect();
    let dv_hw: Vec<Vec<f64>> = (0..n).map(|i| (0..m).map(|j| inv(dv[i]) * inc.get(i, j) * w[j]).collect()).collect();
    let ht_dv: Vec<Vec<f64>> = (0..m).map(|j| (0..n).map(|i| inc.get(i, j) * inv(dv[i].sqrt())).collect()).collect();
    let dv_hw_de: Vec<Vec<f64>> =
        (0..n).map(|i| (0..m).map(|j| inv(dv[i].sqrt()) * inc.get(i, j) * w[j] * inv(de[j])).collect()).collect();
    let get = |name: String| params.get(&name).unwrap().clone();
    let mut p = x.to_rows();
    let mut q = Vec::new();
    for k in 0..params.dims().layers {
        match params.dims().kind {
            EncoderKind::MeanPool => {
                let se = get(format!("layer{k}.slope_e")).get(0, 0);
                q = affine_prelu(&dense_matmul(&de_ht, &p), &get(format!("layer{k}.theta_e")), &get(format!("layer{k}.b_e")), se);
                let sv = get(format!("layer{k}.slope_v")).get(0, 0);
                p = affine_prelu(&dense_matmul(&dv_hw, &q), &get(format!("layer{k}.theta_v")), &get(format!("layer{k}.b_v")), sv);
            }
            EncoderKind::Hgnn => {
                q = dense_matmul(&ht_dv, &p);
                let s = get(format!("layer{k}.slope")).get(0, 0);
                p = affine_prelu(&dense_matmul(&dv_hw_de, &q), &get(format!("layer{k}.theta")), &get(format!("layer{k}.b")), s);
            }
        }
    }
    (p, q)
}

fn max_rel_diff<T: Real>(got: &Matrix<T>, want: &[Vec<f64>]) -> f64 {
    let mut worst = 0.0f64;
    for (r, row) in want.iter().enumerate() {
        assert_eq!(row.len(), got.cols());
        for (c, &w) in row.iter().enumerate() {
            let g = got.get(r, c).to_f64().unwrap();
            worst = worst.max((g - w).abs() / w.abs().max(1.0));
        }
    }
    worst
}

#[test]
fn c03_encoder_oracle() {
    let _g = serial();
    let (mut worst64, mut worst32) = (0.0f64, 0.0f64);
    for inst in 0..30u64 {
        let mut rng = seed::stream(300 + inst, &[]);
        let n = rng.random_range(2..=50);
        let m = rng.random_range(1..=20);
        let h = add_self_loops(&random_hypergraph(n, m, 8, &mut rng));
        let kind = if inst % 2 == 0 { EncoderKind::MeanPool } else { EncoderKind::Hgnn };
        let layers = 1 + (inst as usize / 2) % 2;
        let dims = ModelDims { kind, input_dim: 5, node_dim: 4, hyperedge_dim: 3, proj_hidden: 2, layers };
        let mut params = ModelParams::<f64>::init(dims, inst).unwrap();
        let specs = params.specs().to_vec();
        for (s, t) in specs.iter().zip(params.tensors_mut()) {
            if s.group == ParamGroup::Bias {
                *t = uniform(1, s.cols, &mut rng);
            }
        }
        let x = uniform(n, 5, &mut rng);

        let (p, q) = encode_values(&params, &x, &h).unwrap();
        let (rp, rq) = dense_encoder(&params, &x, &h);
        worst64 = worst64.max(max_rel_diff(&p, &rp)).max(max_rel_diff(&q, &rq));

        // The 32-bit run is compared with the reference on the same rounded inputs.
        let (p32, x32) = (params.cast::<f32>(), x.cast::<f32>());
        let (p, q) = encode_values(&p32, &x32, &h).unwrap();
        let (rp, rq) = dense_encoder(&p32.cast::<f64>(), &x32.cast::<f64>(), &h);
        worst32 = worst32.max(max_rel_diff(&p, &rp)).max(max_rel_diff(&q, &rq));
    }
    verdict(
        3,
        "encoder oracle",
        worst64 < 1e-12 && worst32 < 1e-6,
        format!("30 instances, max error 64-bit {worst64:.1e} (< 1e-12), 32-bit {worst32:.1e} (< 1e-6)"),
    );
}

// ---------------------------------------------------------------------------
// 4. Metric oracles

fn f1_by_pairs(a: &[usize], b: &[usize]) -> f64 {
    let (mut tp, mut pred, mut truth) = (0u64, 0u64, 0u64);
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            let (same_t, same_p) = (a[i] == a[j], b[i] == b[j]);
            tp += u64::from(same_t && same_p);
            truth += u64::from(same_t);
            pred += u64::from(same_p);
        }
    }
    if pred == 0 {
        0.0
    } else {
        2.0 * tp as f64 / (pred + truth) as f64
    }
}

fn nmi_by_table(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len() as f64;
    let ka = a.iter().max().unwrap() + 1;
    let kb = b.iter().max().unwrap() + 1;
    let mut table = vec![vec![0.0; kb]; ka];
    for (&x, &y) in a.iter().zip(b) {
        table[x][y] += 1.0;
    }
    let row: Vec<f64> = table.iter().map(|r| r.iter().sum()).collect();
    let col: Vec<f64> = (0..kb).map(|c| table.iter().map(|r| r[c]).sum()).collect();
    let entropy = |v: &[f64]| -v.iter().filter(|&&c| c > 0.0).map(|&c| c / n * (c / n).ln()).sum::<f64>();
    let (ha, hb) = (entropy(&row), entropy(&col));
    let mut mi = 0.0;
    for x in 0..ka {
        for y in 0..kb {
            let c = table[x][y];
            if c > 0.0 {
                mi += c / n * (c * n / (row[x] * col[y])).ln();
            }
        }
    }
    match (ha == 0.0, hb == 0.0) {
        (true, true) => 1.0,
        (true, false) | (false, true) => 0.0,
        _ => mi / ((ha + hb) / 2.0),
    }
}

fn gaussian(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.random_range(f64::EPSILON..1.0);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

#[test]
fn c04_metric_oracles() {
    let _g = serial();
    let mut rng = seed::stream(4, &[]);
    let (mut f1_exact, mut nmi_worst) = (true, 0.0f64);
    for _ in 0..100 {
        let n = rng.random_range(2..=50);
        let (ka, kb) = (rng.random_range(1..=6), rng.random_range(1..=6));
        let a: Vec<usize> = (0..n).map(|_| rng.random_range(0..ka)).collect();
        let b: Vec<usize> = (0..n).map(|_| rng.random_range(0..kb)).collect();
        f1_exact &= pairwise_f1(&a, &b).unwrap() == f1_by_pairs(&a, &b);
        nmi_worst = nmi_worst.max((nmi(&a, &b).unwrap() - nmi_by_table(&a, &b)).abs());
    }

    let centers = [(0.0, 0.0), (10.0, 0.0), (5.0, 8.660254037844386)];
    let mut perfect = 0;
    for s in 0..100u64 {
        let mut rng = seed::stream(1000 + s, &[]);
        let mut rows = Vec::with_capacity(300);
        let mut labels = Vec::with_capacity(300);
        for (c, &(cx, cy)) in centers.iter().enumerate() {
            for _ in 0..100 {
                rows.push(vec![cx + 0.1 * gaussian(&mut rng), cy + 0.1 * gaussian(&mut rng)]);
                labels.push(c);
            }
        }
        let pts = Matrix::from_rows(&rows).unwrap();
        let r = kmeans(&pts, 3, s).unwrap();
        perfect += usize::from(nmi(&labels, &r.assignments).unwrap() == 1.0);
    }
    verdict(
        4,
        "metric oracles",
        f1_exact && nmi_worst < 1e-10 && perfect >= 95,
        format!("pairwise F1 exact on 100 partitions: {f1_exact}; NMI max diff {nmi_worst:.1e} (< 1e-10); k-means NMI = 1 on {perfect}/100 seeds (>= 95)"),
    );
}

// ---------------------------------------------------------------------------
// Zoo runs shared by criteria 5, 8 and 9.

struct Zoo {
    data: LabeledDataset,
    splits: Vec<Split>,
    config: RunConfigFile,
}

fn zoo() -> &'static Zoo {
    static ZOO: OnceLock<Zoo> = OnceLock::new();
    ZOO.get_or_init(|| {
        let root = repo_root();
        let data = load_dataset(&root.join("data/zoo.json")).expect("data/zoo.json");
        let (data, _) = remove_isolated_nodes(&data);
        let splits = (0..20).map(|s| random_split(data.num_nodes(), [0.1, 0.1, 0.8], s).unwrap()).collect();
        let config = load_config(&root.join("configs/zoo.json")).expect("configs/zoo.json");
        Zoo { data, splits, config }
    })
}

/// Mean probe accuracy over the 20 splits for one training seed.
fn zoo_accuracy(cfg: &TrainConfig) -> f64 {
    let z = zoo();
    let model = train(&z.data, cfg).unwrap();
    let emb = embed(&model, &z.data).unwrap();
    evaluate_classification(&emb, &z.data.labels, z.data.num_classes, &z.splits, &ProbeConfig::default()).unwrap().mean
}

fn zoo_config(seed: u64) -> TrainConfig {
    TrainConfig { seed, ..zoo().config.train_config() }
}

/// Per-seed accuracies of the full model for seeds `0..10`; the first five
/// form the reproduction run.
fn zoo_baseline() -> &'static (Vec<f64>, Duration) {
    static BASE: OnceLock<(Vec<f64>, Duration)> = OnceLock::new();
    BASE.get_or_init(|| {
        let start = Instant::now();
        let first: Vec<f64> = (0..5).map(|s| zoo_accuracy(&zoo_config(s))).collect();
        let elapsed = start.elapsed();
        let rest = (5..10).map(|s| zoo_accuracy(&zoo_config(s)));
        (first.into_iter().chain(rest).collect(), elapsed)
    })
}

#[test]
fn c05_zoo_reproduction() {
    let _g = serial();
    let c = &zoo().config;
    let exact = (c.p_f, c.p_m, c.tau_n, c.tau_g, c.tau_m, c.omega_g, c.omega_m, c.learning_rate, c.epochs, c.node_dim)
        == (0.4, 0.2, 0.9, 0.9, 1.0, 2.0, 2.0, 1e-3, 100, 128);
    let (accs, elapsed) = zoo_baseline();
    let (mean, std) = mean_std(&accs[..5]);
    verdict(
        5,
        "Zoo reproduction",
        exact && mean >= 0.69 && *elapsed < Duration::from_secs(300),
        format!(
            "mean accuracy {:.2}% (std over seeds {:.2}) over 20 splits x 5 seeds (>= 69%), {elapsed:.1?} (< 300s)",
            100.0 * mean,
            100.0 * std
        ),
    );
}

// ---------------------------------------------------------------------------
// 6 and 7. Cora co-citation

fn cora_path() -> Option<PathBuf> {
    let p = std::env::var_os("HYPERCONTRAST_CORA_C")
        .map(PathBuf::from)
        .unwrap_or_else(|| repo_root().join("data/cora_cocitation.json"));
    p.exists().then_some(p)
}

fn cora_accuracies(switches: ComponentSwitches) -> (Vec<f64>, Duration) {
    let root = repo_root();
    let data = load_dataset(&cora_path().unwrap()).unwrap();
    let (data, _) = remove_isolated_nodes(&data);
    let splits: Vec<Split> = (0..20).map(|s| random_split(data.num_nodes(), [0.1, 0.1, 0.8], s).unwrap()).collect();
    let base = load_config(&root.join("configs/cora_cocitation.json")).unwrap().train_config();
    let start = Instant::now();
    let accs = (0..3)
        .map(|s| {
            let mut cfg = TrainConfig { seed: s, ..base };
            cfg.loss.components = switches;
            let model = train(&data, &cfg).unwrap();
            let emb = embed(&model, &data).unwrap();
            evaluate_classification(&emb, &data.labels, data.num_classes, &splits, &ProbeConfig::default()).unwrap().mean
        })
        .collect();
    (accs, start.elapsed())
}

#[test]
fn c06_cora_reproduction() {
    let _g = serial();
    if cora_path().is_none() {
        // Reported as a failure, not hidden: the dataset is not distributed
        // with the repository and could not be fetched. Supply it through
        // `HYPERCONTRAST_CORA_C` or data/cora_cocitation.json to run.
        line("FAIL", 6, "Cora-C reproduction", "dataset unavailable, criterion not met (accuracy >= 78% unverified)");
        return;
    }
    let (accs, elapsed) = cora_accuracies(ComponentSwitches::TRICL);
    let mean = mean_std(&accs).0;
    verdict(
        6,
        "Cora-C reproduction",
        mean >= 0.78 && elapsed < Duration::from_secs(1800),
        format!("mean accuracy {:.2}% over 20 splits x 3 seeds (>= 78%), {elapsed:.1?} (< 1800s)", 100.0 * mean),
    );
}

#[test]
fn c07_cora_ablation_trend() {
    let _g = serial();
    if cora_path().is_none() {
        line("NOT RUN", 7, "Cora-C ablation trend", "dataset unavailable");
        return;
    }
    let full = mean_std(&cora_accuracies(ComponentSwitches::TRICL).0).0;
    let node = mean_std(&cora_accuracies(ComponentSwitches::NODE_ONLY).0).0;
    soft(
        7,
        "Cora-C ablation trend",
        full >= node - 0.003,
        format!("TriCL {:.2}% vs TriCL-N {:.2}% (TriCL >= TriCL-N - 0.3)", 100.0 * full, 100.0 * node),
    );
}

// ---------------------------------------------------------------------------
// 8. Subsampling robustness

#[test]
fn c08_subsampling_robustness() {
    let _g = serial();
    let full = mean_std(&zoo_baseline().0[..5]).0;
    let sub: Vec<f64> = (0..5)
        .map(|s| {
            let mut cfg = zoo_config(s);
            cfg.loss.negatives_k = Some(2);
            zoo_accuracy(&cfg)
        })
        .collect();
    let sub = mean_std(&sub).0;
    let drop = 100.0 * (full - sub);
    verdict(
        8,
        "subsampling robustness",
        drop < 2.0,
        format!("all negatives {:.3}%, k = 2 {:.3}%, degradation {drop:.3} points (< 2)", 100.0 * full, 100.0 * sub),
    );
}

// ---------------------------------------------------------------------------
// 9. Self-loop ablation

#[test]
fn c09_self_loop_direction() {
    let _g = serial();
    let with = mean_std(&zoo_baseline().0).0;
    let without: Vec<f64> = (0..10).map(|s| zoo_accuracy(&TrainConfig { self_loops: false, ..zoo_config(s) })).collect();
    let without = mean_std(&without).0;
    soft(
        9,
        "self-loop direction",
        with >= without - 0.01,
        format!("Zoo, 10 seeds: with self-loops {:.2}%, without {:.2}% (with >= without - 1)", 100.0 * with, 100.0 * without),
    );
}

// ---------------------------------------------------------------------------
// 10. Determinism

#[test]
fn c10_determinism() {
    let _g = serial();
    let z = zoo();
    let run = |precision| {
        let cfg = TrainConfig { seed: 17, precision, ..zoo_config(17) };
        let model = train(&z.data, &cfg).unwrap();
        let mut summary = RunSummary::new(RunConfigFile { seed: 17, ..z.config.clone() }, vec![17]);
        summary.loss_trace = model.loss_trace.clone();
        summary.mean_epoch_ms = Some(model.mean_epoch_ms());
        summary.seal();
        (summary, write_embeddings_binary(&embed(&model, &z.data).unwrap()))
    };
    let mut ok = true;
    for precision in [hypercontrast::trainer::Precision::F32, hypercontrast::trainer::Precision::F64] {
        let (a, ea) = run(precision);
        let (b, eb) = run(precision);
        let same_trace = a.loss_trace.iter().map(|v| v.to_bits()).eq(b.loss_trace.iter().map(|v| v.to_bits()));
        ok &= same_trace && a.digest == b.digest && ea == eb;
    }
    verdict(10, "determinism", ok, "two runs per precision: identical loss traces, summary digests and binary embeddings");
}
