//! `tcm-stance`: batch command-line pipeline for stance classification of
//! TCM-related microblog posts.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use tcm_stance::config::PipelineConfig;
use tcm_stance::corpus::{load_tweets, load_users, to_jsonl};
use tcm_stance::evaluation::{
    adjust, compute_metrics, cross_validate, format_value, metrics_csv, predictions_from_tsv,
    predictions_to_tsv, scored_pairs, sweep, sweep_csv, write_metrics_rows, PredictionRecord,
    SweepAxis, SweepRow, METRICS_CSV_HEADER,
};
use tcm_stance::features::{collect_stats, select_features, vectorize, FeatureSet};
use tcm_stance::pipeline::{label_documents, prepare};
use tcm_stance::preprocess::{documents_from_jsonl, Document};
use tcm_stance::report::{
    keyword_report, keywords_csv, line_chart, timeseries, timeseries_csv, Granularity,
};
use tcm_stance::resources::Resources;
use tcm_stance::supervision::LabeledDataset;
use tcm_stance::svm::{train, Model};
use tcm_stance::synth::{generate, SynthConfig};
use tcm_stance::Stance;

mod values;

#[derive(Parser, Debug)]
#[command(
    name = "tcm-stance",
    version,
    about = "Stance classification of TCM-related microblog posts"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalOpts {
    /// Flat `key = value` pipeline configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random choice (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Also dump the produced CSV to standard output.
    #[arg(long, global = true)]
    print: bool,
    /// Number of chi-square features.
    #[arg(long, global = true)]
    k: Option<usize>,
    /// SVM cost parameter.
    #[arg(long = "c", global = true)]
    c: Option<f64>,
    /// Relative cost of the Supporting class, in (0, 1].
    #[arg(long, global = true)]
    wi: Option<f64>,
    /// Minimum per-user consistency ratio for adjustment, in [0.5, 1].
    #[arg(long, global = true)]
    gamma_min: Option<f64>,
    /// Number of cross-validation folds.
    #[arg(long, global = true)]
    folds: Option<usize>,
    /// Select features once on the whole dataset instead of per fold.
    #[arg(long, global = true)]
    leaky_selection: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic corpus: tweets.jsonl, users.jsonl, gold.tsv.
    Synth(SynthArgs),
    /// Flatten reposts and preprocess a corpus into documents.
    Prep {
        #[arg(long)]
        tweets: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Keep on-topic documents and label them by their author's tags.
    Label {
        #[arg(long)]
        documents: PathBuf,
        #[arg(long)]
        users: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Where to write on-topic documents whose author has no stance.
        #[arg(long)]
        unlabeled: Option<PathBuf>,
    },
    /// Select features on a labeled dataset and train a model.
    Train {
        #[arg(long)]
        labeled: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        features: PathBuf,
    },
    /// Stratified cross-validation; writes a metrics CSV.
    Cv {
        #[arg(long)]
        labeled: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write the out-of-fold predictions.
        #[arg(long)]
        predictions: Option<PathBuf>,
    },
    /// Cross-validate along one parameter axis; writes CSV and an SVG chart.
    Sweep {
        #[arg(long)]
        labeled: PathBuf,
        #[arg(long)]
        axis: SweepAxis,
        /// `start..end:step` or a comma-separated list.
        #[arg(long, value_parser = values::parse_values)]
        values: values::Values,
        #[arg(long)]
        out: PathBuf,
        /// Chart path; defaults to the CSV path with an `.svg` extension.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Classify documents with a trained model.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        documents: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Relabel each user's posts with their majority prediction.
    Adjust {
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Write before/after metrics when gold labels are present.
        #[arg(long)]
        metrics: Option<PathBuf>,
    },
    /// Per-period prediction counts as CSV and an SVG chart.
    ReportTimeseries {
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "month")]
        granularity: Granularity,
        /// Chart path; defaults to the CSV path with an `.svg` extension.
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Chart log10 counts instead of raw counts.
        #[arg(long)]
        log: bool,
    },
    /// Top chi-square terms of each class.
    ReportKeywords {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 10)]
        top_n: usize,
    },
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long)]
    users_pos: Option<usize>,
    #[arg(long)]
    users_neg: Option<usize>,
    #[arg(long)]
    min_tweets: Option<usize>,
    #[arg(long)]
    max_tweets: Option<usize>,
    #[arg(long)]
    signal: Option<f64>,
    #[arg(long)]
    tag_noise: Option<f64>,
    #[arg(long)]
    label_noise: Option<f64>,
    #[arg(long)]
    months: Option<u32>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tcm-stance: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn pipeline_config(g: &GlobalOpts) -> Result<PipelineConfig> {
    let mut cfg = match &g.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(v) = g.seed {
        cfg.seed = v;
    }
    if let Some(v) = g.k {
        cfg.k = v;
    }
    if let Some(v) = g.c {
        cfg.c = v;
    }
    if let Some(v) = g.wi {
        cfg.wi = v;
    }
    if let Some(v) = g.gamma_min {
        cfg.gamma_min = v;
    }
    if let Some(v) = g.folds {
        cfg.k_folds = v;
    }
    cfg.leaky_selection |= g.leaky_selection;
    cfg.validate()?;
    Ok(cfg)
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Writes a CSV artifact, echoing it to stdout in `--print` mode.
fn emit_csv(path: &Path, csv: &str, print: bool) -> Result<()> {
    write(path, csv)?;
    if print {
        print!("{csv}");
    }
    Ok(())
}

fn read_documents(path: &Path) -> Result<Vec<Document>> {
    Ok(documents_from_jsonl(
        &path.display().to_string(),
        &read(path)?,
    )?)
}

fn read_labeled(path: &Path) -> Result<LabeledDataset> {
    let docs = read_documents(path)?;
    let total = docs.len();
    let ds = LabeledDataset::from_documents(docs);
    if ds.documents.len() < total {
        log::warn!(
            "{}: {} unlabeled documents ignored",
            path.display(),
            total - ds.documents.len()
        );
    }
    if ds.documents.is_empty() {
        bail!("{}: no labeled documents", path.display());
    }
    Ok(ds)
}

fn svg_path(csv: &Path, svg: Option<PathBuf>) -> PathBuf {
    svg.unwrap_or_else(|| csv.with_extension("svg"))
}

fn run(cli: Cli) -> Result<()> {
    let cfg = pipeline_config(&cli.global)?;
    let print = cli.global.print;
    match cli.command {
        Command::Synth(args) => run_synth(args, cfg.seed),
        Command::Prep { tweets, out } => {
            let res = Resources::load(&cfg.resources)?;
            let loaded = load_tweets(&tweets)?;
            if loaded.skipped > 0 {
                log::warn!(
                    "{}: {} malformed lines skipped",
                    tweets.display(),
                    loaded.skipped
                );
            }
            let (docs, stats) = prepare(&loaded.records, &res);
            log::info!("{stats:?}");
            write(&out, &to_jsonl(&docs))
        }
        Command::Label {
            documents,
            users,
            out,
            unlabeled,
        } => {
            let res = Resources::load(&cfg.resources)?;
            let docs = read_documents(&documents)?;
            let loaded = load_users(&users)?;
            if loaded.skipped > 0 {
                log::warn!(
                    "{}: {} malformed lines skipped",
                    users.display(),
                    loaded.skipped
                );
            }
            let (ds, rest, stats) = label_documents(docs, &loaded.records, &res);
            log::info!("{stats:?}");
            write(&out, &to_jsonl(&ds.documents))?;
            if let Some(path) = unlabeled {
                write(&path, &to_jsonl(&rest))?;
            }
            Ok(())
        }
        Command::Train {
            labeled,
            model,
            features,
        } => {
            let ds = read_labeled(&labeled)?;
            let fs = select_features(&collect_stats(&ds.documents)?, cfg.k)?;
            let data: Vec<_> = ds
                .documents
                .iter()
                .enumerate()
                .map(|(i, d)| (vectorize(d, &fs), ds.label(i)))
                .collect();
            let m = train(&data, &fs, &cfg.train_config())?;
            write(&features, &fs.to_tsv())?;
            write(&model, &m.to_text())
        }
        Command::Cv {
            labeled,
            out,
            predictions,
        } => {
            let ds = read_labeled(&labeled)?;
            let outcome = cross_validate(&ds, &cfg.cv_options())?;
            if let Some(path) = predictions {
                write(&path, &predictions_to_tsv(&outcome.predictions))?;
            }
            emit_csv(&out, &metrics_csv(&outcome.report), print)
        }
        Command::Sweep {
            labeled,
            axis,
            values,
            out,
            svg,
        } => {
            let ds = read_labeled(&labeled)?;
            let rows = sweep(&ds, axis, &values.0, &cfg.cv_options())?;
            write(&svg_path(&out, svg), &sweep_chart(axis, &rows))?;
            emit_csv(&out, &sweep_csv(&rows), print)
        }
        Command::Predict {
            model,
            features,
            documents,
            out,
        } => {
            let m = Model::from_text(&read(&model)?)?;
            let fs = FeatureSet::from_tsv(&read(&features)?)?;
            m.check_features(&fs)?;
            let records = read_documents(&documents)?
                .iter()
                .map(|d| {
                    let p = m.predict_document(&fs, d)?;
                    Ok(PredictionRecord {
                        tweet_id: d.tweet_id.clone(),
                        user_id: d.user_id.clone(),
                        created_at: d.created_at,
                        gold: d.label,
                        stance: p.stance,
                        margin: p.margin,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            write(&out, &predictions_to_tsv(&records))
        }
        Command::Adjust {
            predictions,
            out,
            metrics,
        } => {
            let records = predictions_from_tsv(&read(&predictions)?)?;
            let adjusted = adjust(&records, cfg.gamma_min)?;
            write(&out, &predictions_to_tsv(&adjusted))?;
            if let Some(path) = metrics {
                let before = compute_metrics(&scored_pairs(&records))
                    .context("metrics need predictions with gold labels")?;
                let after = compute_metrics(&scored_pairs(&adjusted))?;
                let mut csv = format!("{METRICS_CSV_HEADER}\n");
                write_metrics_rows(&mut csv, "before", &before);
                write_metrics_rows(&mut csv, "after", &after);
                emit_csv(&path, &csv, print)?;
            }
            Ok(())
        }
        Command::ReportTimeseries {
            predictions,
            out,
            granularity,
            svg,
            log,
        } => {
            let records = predictions_from_tsv(&read(&predictions)?)?;
            let items: Vec<_> = records.iter().map(|r| (r.created_at, r.stance)).collect();
            let buckets = timeseries(&items, granularity);
            let labels: Vec<String> = buckets.iter().map(|b| b.period.clone()).collect();
            let scale = |n: usize| {
                if log {
                    if n == 0 {
                        f64::NAN
                    } else {
                        (n as f64).log10()
                    }
                } else {
                    n as f64
                }
            };
            let series = vec![
                (
                    "support",
                    buckets.iter().map(|b| scale(b.count_support)).collect(),
                ),
                (
                    "oppose",
                    buckets.iter().map(|b| scale(b.count_oppose)).collect(),
                ),
            ];
            let title = if log {
                "posts per period (log10)"
            } else {
                "posts per period"
            };
            write(&svg_path(&out, svg), &line_chart(title, &labels, &series))?;
            emit_csv(&out, &timeseries_csv(&buckets), print)
        }
        Command::ReportKeywords {
            features,
            out,
            top_n,
        } => {
            let fs = FeatureSet::from_tsv(&read(&features)?)?;
            emit_csv(&out, &keywords_csv(&keyword_report(&fs, top_n)), print)
        }
    }
}

fn run_synth(args: SynthArgs, seed: u64) -> Result<()> {
    let mut sc = SynthConfig {
        seed,
        ..SynthConfig::default()
    };
    if let Some(v) = args.users_pos {
        sc.n_users_pos = v;
    }
    if let Some(v) = args.users_neg {
        sc.n_users_neg = v;
    }
    if let Some(v) = args.min_tweets {
        sc.tweets_per_user.0 = v;
    }
    if let Some(v) = args.max_tweets {
        sc.tweets_per_user.1 = v;
    }
    if let Some(v) = args.signal {
        sc.signal_strength = v;
    }
    if let Some(v) = args.tag_noise {
        sc.tag_noise = v;
    }
    if let Some(v) = args.label_noise {
        sc.label_noise = v;
    }
    if let Some(v) = args.months {
        sc.months = v;
    }
    let corpus = generate(&sc)?;
    write(&args.out_dir.join("tweets.jsonl"), &corpus.tweets_jsonl())?;
    write(&args.out_dir.join("users.jsonl"), &corpus.users_jsonl())?;
    write(&args.out_dir.join("gold.tsv"), &corpus.gold_tsv())
}

fn sweep_chart(axis: SweepAxis, rows: &[SweepRow]) -> String {
    let labels: Vec<String> = rows.iter().map(|r| format_value(r.value)).collect();
    let col = |f: &dyn Fn(&SweepRow) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    let series = vec![
        (
            "support precision",
            col(&|r| r.report.class(Stance::Supporting).precision),
        ),
        (
            "support recall",
            col(&|r| r.report.class(Stance::Supporting).recall),
        ),
        (
            "oppose precision",
            col(&|r| r.report.class(Stance::Opposing).precision),
        ),
        (
            "oppose recall",
            col(&|r| r.report.class(Stance::Opposing).recall),
        ),
        ("micro F1", col(&|r| r.report.micro_f1())),
    ];
    line_chart(&format!("metrics by {}", axis.name()), &labels, &series)
}
