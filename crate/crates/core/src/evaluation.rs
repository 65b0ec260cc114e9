//! Metrics, stratified cross-validation, per-user consistency adjustment
//! and parameter sweeps.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use chrono::NaiveDateTime;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::timestamp;
use crate::error::{Error, Result};
use crate::features::{collect_stats, select_features, vectorize, FeatureSet, SparseVector};
use crate::stance::Stance;
use crate::supervision::LabeledDataset;
use crate::svm::{train, TrainConfig};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClassCounts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

/// Per-class confusion counts. In the binary setting one class's false
/// positives are the other's false negatives.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub support: ClassCounts,
    pub oppose: ClassCounts,
}

impl ConfusionCounts {
    pub fn from_pairs(pairs: &[(Stance, Stance)]) -> Self {
        let mut c = ConfusionCounts::default();
        for &(gold, pred) in pairs {
            match (gold, pred) {
                (Stance::Supporting, Stance::Supporting) => c.support.tp += 1,
                (Stance::Opposing, Stance::Opposing) => c.oppose.tp += 1,
                (Stance::Supporting, Stance::Opposing) => {
                    c.support.fn_ += 1;
                    c.oppose.fp += 1;
                }
                (Stance::Opposing, Stance::Supporting) => {
                    c.oppose.fn_ += 1;
                    c.support.fp += 1;
                }
            }
        }
        c
    }

    pub fn class(&self, stance: Stance) -> ClassCounts {
        match stance {
            Stance::Supporting => self.support,
            Stance::Opposing => self.oppose,
        }
    }

    pub fn total(&self) -> usize {
        self.support.tp + self.support.fn_ + self.oppose.tp + self.oppose.fn_
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl ClassMetrics {
    /// Precision, recall and their harmonic mean; zero denominators give 0.
    pub fn from_counts(c: ClassCounts) -> Self {
        let precision = ratio(c.tp, c.tp + c.fp, "precision");
        let recall = ratio(c.tp, c.tp + c.fn_, "recall");
        ClassMetrics {
            precision,
            recall,
            f1: f1(precision, recall),
        }
    }
}

fn ratio(num: usize, den: usize, what: &str) -> f64 {
    if den == 0 {
        log::warn!("{what} has a zero denominator, reported as 0");
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// F1 = 2PR / (P + R), 0 when both are 0.
pub fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub support: ClassMetrics,
    pub oppose: ClassMetrics,
    /// Metrics over counts pooled across both classes.
    pub micro: ClassMetrics,
    pub macro_f1: f64,
    pub counts: ConfusionCounts,
}

impl MetricsReport {
    pub fn class(&self, stance: Stance) -> ClassMetrics {
        match stance {
            Stance::Supporting => self.support,
            Stance::Opposing => self.oppose,
        }
    }

    pub fn micro_f1(&self) -> f64 {
        self.micro.f1
    }
}

/// Metrics from `(gold, predicted)` pairs.
pub fn compute_metrics(pairs: &[(Stance, Stance)]) -> Result<MetricsReport> {
    if pairs.is_empty() {
        return Err(Error::InvalidInput(
            "cannot compute metrics of zero predictions".into(),
        ));
    }
    let counts = ConfusionCounts::from_pairs(pairs);
    let support = ClassMetrics::from_counts(counts.support);
    let oppose = ClassMetrics::from_counts(counts.oppose);
    let pooled = ClassCounts {
        tp: counts.support.tp + counts.oppose.tp,
        fp: counts.support.fp + counts.oppose.fp,
        fn_: counts.support.fn_ + counts.oppose.fn_,
    };
    Ok(MetricsReport {
        support,
        oppose,
        micro: ClassMetrics::from_counts(pooled),
        macro_f1: (support.f1 + oppose.f1) / 2.0,
        counts,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Shuffles each class with `seed` and deals it round-robin into `k`
/// folds. The deal continues across classes so fold sizes differ by at
/// most one. Index lists are sorted.
pub fn stratified_kfold(labels: &[Stance], k: usize, seed: u64) -> Result<Vec<Fold>> {
    if k < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 folds, got {k}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0usize; labels.len()];
    let mut next = 0;
    for stance in Stance::ALL {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == stance).collect();
        if members.len() < k {
            return Err(Error::InvalidInput(format!(
                "class {stance} has {} examples, fewer than {k} folds",
                members.len()
            )));
        }
        members.shuffle(&mut rng);
        for i in members {
            assignment[i] = next;
            next = (next + 1) % k;
        }
    }
    Ok((0..k)
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) =
                (0..labels.len()).partition(|&i| assignment[i] == f);
            Fold { train, test }
        })
        .collect())
}

/// A scored post. `gold` is present for evaluation data.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionRecord {
    pub tweet_id: String,
    pub user_id: String,
    pub created_at: NaiveDateTime,
    pub gold: Option<Stance>,
    pub stance: Stance,
    pub margin: f64,
}

impl PredictionRecord {
    pub const TSV_HEADER: &'static str = "tweet_id\tuser_id\tcreated_at\tstance\tmargin\tgold";

    pub fn to_tsv_line(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{:.6}\t{}",
            self.tweet_id,
            self.user_id,
            timestamp::format(&self.created_at),
            self.stance,
            self.margin,
            self.gold.map(Stance::as_str).unwrap_or("")
        )
    }
}

/// Serializes predictions as TSV with a header line.
pub fn predictions_to_tsv(records: &[PredictionRecord]) -> String {
    let mut out = String::from(PredictionRecord::TSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.to_tsv_line());
        out.push('\n');
    }
    out
}

pub fn predictions_from_tsv(text: &str) -> Result<Vec<PredictionRecord>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.is_empty() || (i == 0 && line == PredictionRecord::TSV_HEADER) {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        let [tweet_id, user_id, created_at, stance, margin, gold] = cols[..] else {
            return Err(Error::parse(
                "predictions",
                lineno,
                "expected 6 tab-separated columns",
            ));
        };
        let bad = |what: &str| Error::parse("predictions", lineno, format!("bad {what}"));
        out.push(PredictionRecord {
            tweet_id: tweet_id.to_string(),
            user_id: user_id.to_string(),
            created_at: timestamp::parse(created_at).map_err(|_| bad("timestamp"))?,
            stance: stance.parse().map_err(|_| bad("stance"))?,
            margin: margin.parse().map_err(|_| bad("margin"))?,
            gold: if gold.is_empty() {
                None
            } else {
                Some(gold.parse().map_err(|_| bad("gold stance"))?)
            },
        });
    }
    Ok(out)
}

/// `(gold, predicted)` pairs of every record carrying a gold label.
pub fn scored_pairs(records: &[PredictionRecord]) -> Vec<(Stance, Stance)> {
    records
        .iter()
        .filter_map(|r| r.gold.map(|g| (g, r.stance)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvOptions {
    /// Feature count, clamped to the vocabulary of each training portion.
    pub k_features: usize,
    pub folds: usize,
    /// Select features once on the whole dataset instead of per fold.
    pub leaky_selection: bool,
    /// Also supplies the fold-shuffling seed.
    pub train: TrainConfig,
}

impl Default for CvOptions {
    fn default() -> Self {
        CvOptions {
            k_features: 3000,
            folds: 5,
            leaky_selection: false,
            train: TrainConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvOutcome {
    pub report: MetricsReport,
    /// Out-of-fold predictions in dataset order.
    pub predictions: Vec<PredictionRecord>,
}

fn fit_and_score(
    dataset: &LabeledDataset,
    fs: &FeatureSet,
    train_idx: &[usize],
    test_idx: &[usize],
    cfg: &TrainConfig,
    out: &mut [Option<PredictionRecord>],
) -> Result<()> {
    let data: Vec<(SparseVector, Stance)> = train_idx
        .iter()
        .map(|&i| (vectorize(&dataset.documents[i], fs), dataset.label(i)))
        .collect();
    let model = train(&data, fs, cfg)?;
    for &i in test_idx {
        let doc = &dataset.documents[i];
        let p = model.predict(&vectorize(doc, fs))?;
        out[i] = Some(PredictionRecord {
            tweet_id: doc.tweet_id.clone(),
            user_id: doc.user_id.clone(),
            created_at: doc.created_at,
            gold: doc.label,
            stance: p.stance,
            margin: p.margin,
        });
    }
    Ok(())
}

/// Stratified k-fold cross-validation. Unless `leaky_selection` is set,
/// features are selected on each training portion only.
pub fn cross_validate(dataset: &LabeledDataset, opts: &CvOptions) -> Result<CvOutcome> {
    opts.train.validate()?;
    let labels = dataset.labels();
    let folds = stratified_kfold(&labels, opts.folds, opts.train.seed)?;
    let shared = if opts.leaky_selection {
        Some(select_features(
            &collect_stats(&dataset.documents)?,
            opts.k_features,
        )?)
    } else {
        None
    };
    let mut slots: Vec<Option<PredictionRecord>> = vec![None; dataset.documents.len()];
    for fold in &folds {
        let fs = match &shared {
            Some(fs) => fs.clone(),
            None => select_features(
                &collect_stats(fold.train.iter().map(|&i| &dataset.documents[i]))?,
                opts.k_features,
            )?,
        };
        fit_and_score(
            dataset,
            &fs,
            &fold.train,
            &fold.test,
            &opts.train,
            &mut slots,
        )?;
    }
    let predictions: Vec<PredictionRecord> = slots
        .into_iter()
        .map(|p| p.expect("every example lies in exactly one test fold"))
        .collect();
    let report = compute_metrics(&scored_pairs(&predictions))?;
    Ok(CvOutcome {
        report,
        predictions,
    })
}

/// Per-user tally of predicted stances.
#[derive(Debug, Clone, PartialEq)]
pub struct UserVote {
    pub user_id: String,
    pub c_s: usize,
    pub c_o: usize,
    pub gamma: f64,
}

impl UserVote {
    /// The strict majority stance, if any.
    pub fn majority(&self) -> Option<Stance> {
        match self.c_s.cmp(&self.c_o) {
            std::cmp::Ordering::Greater => Some(Stance::Supporting),
            std::cmp::Ordering::Less => Some(Stance::Opposing),
            std::cmp::Ordering::Equal => None,
        }
    }
}

/// γ = max(Cs, Co) / (Cs + Co), always in [0.5, 1].
pub fn gamma_of(c_s: usize, c_o: usize) -> Result<f64> {
    if c_s + c_o == 0 {
        return Err(Error::InvalidInput(
            "gamma is undefined for a user with no predictions".into(),
        ));
    }
    Ok(c_s.max(c_o) as f64 / (c_s + c_o) as f64)
}

/// Tallies predictions per user, ordered by user id.
pub fn user_votes(records: &[PredictionRecord]) -> Vec<UserVote> {
    let mut tally: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for r in records {
        let e = tally.entry(r.user_id.as_str()).or_default();
        match r.stance {
            Stance::Supporting => e.0 += 1,
            Stance::Opposing => e.1 += 1,
        }
    }
    tally
        .into_iter()
        .map(|(user, (c_s, c_o))| UserVote {
            user_id: user.to_string(),
            c_s,
            c_o,
            gamma: gamma_of(c_s, c_o).expect("tallied users have at least one prediction"),
        })
        .collect()
}

/// Relabels every post of a user with the user's majority stance when a
/// strict majority exists and γ ≥ `gamma_min`. Margins are left as
/// predicted.
pub fn adjust(records: &[PredictionRecord], gamma_min: f64) -> Result<Vec<PredictionRecord>> {
    if !(0.5..=1.0).contains(&gamma_min) {
        return Err(Error::InvalidInput(format!(
            "gamma_min must lie in [0.5, 1], got {gamma_min}"
        )));
    }
    let targets: BTreeMap<String, Stance> = user_votes(records)
        .into_iter()
        .filter(|v| v.gamma >= gamma_min)
        .filter_map(|v| v.majority().map(|s| (v.user_id, s)))
        .collect();
    Ok(records
        .iter()
        .map(|r| {
            let mut r = r.clone();
            if let Some(&s) = targets.get(&r.user_id) {
                r.stance = s;
            }
            r
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    FeatureCount,
    Wi,
    GammaMin,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::FeatureCount => "k",
            SweepAxis::Wi => "wi",
            SweepAxis::GammaMin => "gamma",
        }
    }

    fn check(self, v: f64) -> Result<()> {
        let ok = match self {
            SweepAxis::FeatureCount => v >= 1.0 && v.fract() == 0.0,
            SweepAxis::Wi => v > 0.0 && v <= 1.0,
            SweepAxis::GammaMin => (0.5..=1.0).contains(&v),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "{v} is not a valid {} value",
                self.name()
            )))
        }
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "k" => Ok(SweepAxis::FeatureCount),
            "wi" => Ok(SweepAxis::Wi),
            "gamma" => Ok(SweepAxis::GammaMin),
            other => Err(format!(
                "unknown sweep axis `{other}` (expected k, wi or gamma)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub report: MetricsReport,
}

/// Evaluates each value of one parameter with the others held at `base`.
/// Feature-count and wi points run a full cross-validation each; the
/// gamma axis adjusts the pooled out-of-fold predictions of one
/// cross-validation at `base`. Rows come back in ascending value order.
pub fn sweep(
    dataset: &LabeledDataset,
    axis: SweepAxis,
    values: &[f64],
    base: &CvOptions,
) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::InvalidInput("sweep needs at least one value".into()));
    }
    for &v in values {
        axis.check(v)?;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);

    let mut rows = Vec::with_capacity(sorted.len());
    match axis {
        SweepAxis::GammaMin => {
            let outcome = cross_validate(dataset, base)?;
            for value in sorted {
                let adjusted = adjust(&outcome.predictions, value)?;
                rows.push(SweepRow {
                    value,
                    report: compute_metrics(&scored_pairs(&adjusted))?,
                });
            }
        }
        SweepAxis::FeatureCount | SweepAxis::Wi => {
            for value in sorted {
                let mut opts = *base;
                if axis == SweepAxis::FeatureCount {
                    opts.k_features = value as usize;
                } else {
                    opts.train.wi = value;
                }
                rows.push(SweepRow {
                    value,
                    report: cross_validate(dataset, &opts)?.report,
                });
            }
        }
    }
    Ok(rows)
}

pub const METRICS_CSV_HEADER: &str = "axis_value,class,precision,recall,f1,micro_f1,macro_f1";

/// Appends three rows (`support`, `oppose`, `total`) for one report. The
/// `total` row carries the pooled (micro) precision, recall and F1.
pub fn write_metrics_rows(out: &mut String, axis_value: &str, r: &MetricsReport) {
    for (name, m) in [
        ("support", r.support),
        ("oppose", r.oppose),
        ("total", r.micro),
    ] {
        let _ = writeln!(
            out,
            "{axis_value},{name},{:.4},{:.4},{:.4},{:.4},{:.4}",
            m.precision, m.recall, m.f1, r.micro.f1, r.macro_f1
        );
    }
}

/// Metrics CSV for a single evaluation; the axis column is left empty.
pub fn metrics_csv(report: &MetricsReport) -> String {
    let mut out = format!("{METRICS_CSV_HEADER}\n");
    write_metrics_rows(&mut out, "", report);
    out
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = format!("{METRICS_CSV_HEADER}\n");
    for row in rows {
        write_metrics_rows(&mut out, &format_value(row.value), &row.report);
    }
    out
}

/// Shortest decimal form of a sweep value after rounding off float noise
/// (e.g. `0.30000000000000004` prints as `0.3`).
pub fn format_value(v: f64) -> String {
    let rounded = (v * 1e9).round() / 1e9;
    format!("{rounded}")
}
