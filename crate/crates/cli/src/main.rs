//! `hypercontrast` command-line tool.
//!
//! Every failure is reported as a single JSON line on stderr and a nonzero
//! exit code: 2 for invalid arguments, 1 for everything else.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hypercontrast::dataio::{
    load_config, load_dataset, load_embeddings, load_model, load_split, save_dataset, save_embeddings,
    save_model, save_split, DataError, EmbeddingFormat, RunConfigFile, SplitFile,
};
use hypercontrast::eval::{evaluate_classification, evaluate_clustering, silhouette, EvalError};
use hypercontrast::hgraph::{random_split, remove_isolated_nodes, HypergraphError, LabeledDataset};
use hypercontrast::linalg::Matrix;
use hypercontrast::loss::ComponentSwitches;
use hypercontrast::report::{dataset_stats, load_summary, save_summary, RunSummary};
use hypercontrast::trainer::{embed, train, TrainError, TrainedModel};
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Graph(#[from] HypergraphError),
    #[error("{0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            Self::Usage(_) => "usage",
            Self::Data(_) => "data",
            Self::Train(_) => "train",
            Self::Eval(_) => "eval",
            Self::Graph(_) => "graph",
            Self::Config(_) => "config",
            Self::Io { .. } => "io",
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Parser)]
#[command(name = "hypercontrast", version, about = "Contrastive hypergraph embeddings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print dataset statistics.
    Stats {
        dataset: PathBuf,
        /// Emit JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Drop nodes that belong to no hyperedge and write the reindexed dataset.
    Clean {
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write random train/valid/test splits, one file per split.
    Split {
        dataset: PathBuf,
        #[arg(long, default_value = "0.1,0.1,0.8")]
        ratios: Ratios,
        /// Split `i` uses seed `seed + i`.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        count: usize,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Train an encoder and write `model.json` and `summary.json`.
    Train {
        dataset: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// tricl, tricl-n, tricl-ng, or loss-mask=N,G,M with 0/1 flags.
        #[arg(long, default_value = "tricl")]
        variant: Variant,
        #[arg(long)]
        epochs: Option<usize>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Write node embeddings of a trained or randomly initialized encoder.
    Embed {
        dataset: PathBuf,
        #[arg(long, conflicts_with = "random_init", required_unless_present = "random_init")]
        model: Option<PathBuf>,
        /// Use an untrained encoder built from `--config` and `--seed`.
        #[arg(long)]
        random_init: bool,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        /// Defaults to csv for a `.csv` path and binary otherwise.
        #[arg(long)]
        format: Option<Format>,
    },
    /// Linear-probe accuracy over one or more split files.
    EvalClassify {
        dataset: PathBuf,
        #[command(flatten)]
        source: EmbeddingSource,
        #[arg(long = "splits", num_args = 1..)]
        splits: Vec<PathBuf>,
        #[arg(long)]
        probe_l2: Option<f64>,
        #[arg(long)]
        probe_lr: Option<f64>,
        #[arg(long)]
        probe_epochs: Option<usize>,
        /// Run summary to update with the result.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// k-means NMI and pairwise F1, plus the silhouette of the true labels.
    EvalCluster {
        dataset: PathBuf,
        #[command(flatten)]
        source: EmbeddingSource,
        #[arg(long, default_value_t = 5)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        summary: Option<PathBuf>,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct EmbeddingSource {
    /// Embedding file (csv or binary, chosen by extension).
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// Trained model; embeddings are computed on the fly.
    #[arg(long)]
    model: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Binary,
}

impl From<Format> for EmbeddingFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => Self::Csv,
            Format::Binary => Self::Binary,
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Ratios([f64; 3]);

impl FromStr for Ratios {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|_| format!("not a number: {p:?}")))
            .collect::<Result<_, _>>()?;
        <[f64; 3]>::try_from(parts).map(Ratios).map_err(|_| "expected three comma-separated ratios".into())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Variant(ComponentSwitches);

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tricl" => return Ok(Self(ComponentSwitches::TRICL)),
            "tricl-n" => return Ok(Self(ComponentSwitches::NODE_ONLY)),
            "tricl-ng" => return Ok(Self(ComponentSwitches::NODE_GROUP)),
            _ => {}
        }
        let mask = s.strip_prefix("loss-mask=").ok_or_else(|| format!("unknown variant {s:?}"))?;
        let flags: Vec<bool> = mask
            .split(',')
            .map(|f| match f.trim() {
                "1" | "true" => Ok(true),
                "0" | "false" => Ok(false),
                other => Err(format!("loss-mask flag must be 0 or 1, found {other:?}")),
            })
            .collect::<Result<_, _>>()?;
        match flags[..] {
            [node, group, membership] => Ok(Self(ComponentSwitches { node, group, membership })),
            _ => Err("loss-mask needs three flags: node,group,membership".into()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let first = e.to_string().lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ").to_string();
            return report(&CliError::Usage(first));
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(&e),
    }
}

fn report(e: &CliError) -> ExitCode {
    eprintln!("{}", json!({ "error": e.kind(), "message": e.to_string() }));
    ExitCode::from(e.exit_code())
}

fn print_json<T: serde::Serialize>(value: &T) {
    println!("{}", serde_json::to_string(value).expect("plain data serializes"));
}

fn create_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn config_or_default(path: Option<&Path>) -> Result<RunConfigFile, CliError> {
    Ok(match path {
        Some(p) => load_config(p)?,
        None => RunConfigFile::default(),
    })
}

fn check_width(model: &TrainedModel, d: &LabeledDataset) -> Result<(), CliError> {
    let expected = model.params.dims().input_dim;
    if expected != d.num_features() {
        return Err(CliError::Config(format!(
            "model expects {expected} input features, dataset has {}",
            d.num_features()
        )));
    }
    Ok(())
}

fn embed_with(model: &TrainedModel, d: &LabeledDataset) -> Result<Matrix<f64>, CliError> {
    check_width(model, d)?;
    embed(model, d).map_err(|e| CliError::Config(e.to_string()))
}

fn load_source(source: &EmbeddingSource, d: &LabeledDataset) -> Result<Matrix<f64>, CliError> {
    let emb = match (&source.embeddings, &source.model) {
        (Some(p), _) => load_embeddings(p, EmbeddingFormat::from_path(p))?.cast::<f64>(),
        (None, Some(m)) => embed_with(&load_model(m)?, d)?,
        (None, None) => return Err(CliError::Usage("either --embeddings or --model is required".into())),
    };
    if emb.rows() != d.num_nodes() {
        return Err(CliError::Config(format!("embeddings have {} rows, dataset has {} nodes", emb.rows(), d.num_nodes())));
    }
    Ok(emb)
}

fn update_summary(path: Option<&Path>, apply: impl FnOnce(&mut RunSummary)) -> Result<(), CliError> {
    if let Some(p) = path {
        let mut s = if p.exists() { load_summary(p)? } else { RunSummary::new(RunConfigFile::default(), Vec::new()) };
        apply(&mut s);
        save_summary(&mut s, p)?;
    }
    Ok(())
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Stats { dataset, json } => {
            let stats = dataset_stats(&load_dataset(&dataset)?);
            if json {
                print_json(&stats);
            } else {
                print!("{}", stats.to_table());
            }
        }
        Command::Clean { dataset, out } => {
            let d = load_dataset(&dataset)?;
            let (cleaned, map) = remove_isolated_nodes(&d);
            save_dataset(&cleaned, &out)?;
            let removed = map.iter().filter(|m| m.is_none()).count();
            print_json(&json!({ "nodes": cleaned.num_nodes(), "removed": removed, "out": out }));
        }
        Command::Split { dataset, ratios, seed, count, out } => {
            if count == 0 {
                return Err(CliError::Config("--count must be at least 1".into()));
            }
            let n = load_dataset(&dataset)?.num_nodes();
            create_dir(&out)?;
            let mut files = Vec::with_capacity(count);
            for i in 0..count {
                let s = seed + i as u64;
                let split = random_split(n, ratios.0, s)?;
                let path = out.join(format!("split_{i:02}.json"));
                save_split(&SplitFile::new(s, &split), &path)?;
                files.push(path);
            }
            print_json(&json!({ "files": files }));
        }
        Command::Train { dataset, config, seed, variant, epochs, out } => {
            let d = load_dataset(&dataset)?;
            let mut cfg = config_or_default(config.as_deref())?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(e) = epochs {
                cfg.epochs = e;
            }
            let Variant(c) = variant;
            (cfg.use_node_loss, cfg.use_group_loss, cfg.use_membership_loss) = (c.node, c.group, c.membership);
            cfg.validate()?;
            let model = train(&d, &cfg.train_config())?;
            create_dir(&out)?;
            let model_path = out.join("model.json");
            let summary_path = out.join("summary.json");
            save_model(&model, &model_path)?;
            let mut summary = RunSummary::new(cfg.clone(), vec![cfg.seed]);
            summary.loss_trace = model.loss_trace.clone();
            summary.loss_breakdown = model.breakdown.clone();
            summary.skipped_memberships = model.skipped_memberships;
            summary.mean_epoch_ms = Some(model.mean_epoch_ms());
            summary.artifacts.insert("model".into(), model_path.display().to_string());
            summary.artifacts.insert("summary".into(), summary_path.display().to_string());
            save_summary(&mut summary, &summary_path)?;
            print_json(&json!({
                "final_loss": model.loss_trace.last(),
                "mean_epoch_ms": summary.mean_epoch_ms,
                "digest": summary.digest,
                "model": model_path,
                "summary": summary_path,
            }));
        }
        Command::Embed { dataset, model, random_init, config, seed, out, format } => {
            let d = load_dataset(&dataset)?;
            let trained = if random_init {
                let mut cfg = config_or_default(config.as_deref())?;
                if let Some(s) = seed {
                    cfg.seed = s;
                }
                TrainedModel::random_init(d.num_features(), &cfg.train_config())?
            } else {
                let path = model.ok_or_else(|| CliError::Usage("--model is required without --random-init".into()))?;
                load_model(&path)?
            };
            let emb = embed_with(&trained, &d)?;
            let format = format.map_or_else(|| EmbeddingFormat::from_path(&out), Into::into);
            save_embeddings(&emb, &out, format)?;
            print_json(&json!({ "rows": emb.rows(), "cols": emb.cols(), "format": format, "out": out }));
        }
        Command::EvalClassify { dataset, source, splits, probe_l2, probe_lr, probe_epochs, summary } => {
            if splits.is_empty() {
                return Err(CliError::Config("at least one --splits file is required".into()));
            }
            let d = load_dataset(&dataset)?;
            let emb = load_source(&source, &d)?;
            let splits = splits
                .iter()
                .map(|p| load_split(p, Some(d.num_nodes())).map(|f| f.split()))
                .collect::<Result<Vec<_>, _>>()?;
            let mut rc = RunConfigFile::default();
            rc.probe_l2 = probe_l2.unwrap_or(rc.probe_l2);
            rc.probe_lr = probe_lr.unwrap_or(rc.probe_lr);
            rc.probe_epochs = probe_epochs.unwrap_or(rc.probe_epochs);
            rc.validate()?;
            let result = evaluate_classification(&emb, &d.labels, d.num_classes, &splits, &rc.probe_config())?;
            print_json(&result);
            update_summary(summary.as_deref(), |s| s.classification = Some(result))?;
        }
        Command::EvalCluster { dataset, source, runs, seed, summary } => {
            let d = load_dataset(&dataset)?;
            let emb = load_source(&source, &d)?;
            let result = evaluate_clustering(&emb, &d.labels, d.num_classes, runs, seed)?;
            let sil = silhouette(&emb, &d.labels)?;
            print_json(&json!({ "nmi": result.nmi, "f1": result.f1, "silhouette": sil, "per_run_nmi": result.per_run_nmi }));
            update_summary(summary.as_deref(), |s| {
                s.clustering = Some(result);
                s.silhouette = Some(sil);
            })?;
        }
    }
    Ok(())
}
