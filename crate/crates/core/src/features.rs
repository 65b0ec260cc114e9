//! Chi-square feature selection and binary vectorization.
//!
//! Probabilities are maximum-likelihood document-frequency estimates over
//! the labeled corpus. `pos` refers to the Supporting class throughout.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::preprocess::Document;
use crate::stance::Stance;

/// Document-frequency counts of one term against the two classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermStats {
    pub term: String,
    pub n_total: usize,
    pub df_pos: usize,
    pub df_neg: usize,
    pub n_pos: usize,
    pub n_neg: usize,
}

impl TermStats {
    fn check(&self) -> Result<()> {
        if self.n_pos + self.n_neg != self.n_total
            || self.df_pos > self.n_pos
            || self.df_neg > self.n_neg
        {
            return Err(Error::InvalidInput(format!(
                "inconsistent counts for `{}`",
                self.term
            )));
        }
        if self.n_pos == 0 || self.n_neg == 0 {
            return Err(Error::InvalidInput(format!(
                "chi-square of `{}` needs documents of both classes",
                self.term
            )));
        }
        if self.df_pos + self.df_neg == 0 {
            return Err(Error::InvalidInput(format!(
                "term `{}` occurs in no document",
                self.term
            )));
        }
        Ok(())
    }

    /// Swaps the roles of the two classes.
    pub fn swapped(&self) -> TermStats {
        TermStats {
            term: self.term.clone(),
            n_total: self.n_total,
            df_pos: self.df_neg,
            df_neg: self.df_pos,
            n_pos: self.n_neg,
            n_neg: self.n_pos,
        }
    }

    /// True when the term co-occurs with Supporting more often than
    /// independence predicts: P(t, c) > P(t) P(c).
    pub fn direction(&self) -> Stance {
        let joint = self.df_pos as u128 * self.n_total as u128;
        let independent = (self.df_pos + self.df_neg) as u128 * self.n_pos as u128;
        if joint > independent {
            Stance::Supporting
        } else {
            Stance::Opposing
        }
    }
}

/// Counts, for every distinct token, how many documents of each class
/// contain it. Output is sorted by term.
pub fn collect_stats<'a, I>(docs: I) -> Result<Vec<TermStats>>
where
    I: IntoIterator<Item = &'a Document>,
{
    let mut df: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    let (mut n_pos, mut n_neg) = (0, 0);
    for doc in docs {
        let label = doc.label.ok_or_else(|| {
            Error::InvalidInput(format!("document {} has no label", doc.tweet_id))
        })?;
        match label {
            Stance::Supporting => n_pos += 1,
            Stance::Opposing => n_neg += 1,
        }
        let distinct: HashSet<&str> = doc.tokens.iter().map(String::as_str).collect();
        for term in distinct {
            let entry = df.entry(term).or_default();
            match label {
                Stance::Supporting => entry.0 += 1,
                Stance::Opposing => entry.1 += 1,
            }
        }
    }
    if n_pos == 0 || n_neg == 0 {
        let only = if n_pos == 0 {
            Stance::Opposing
        } else {
            Stance::Supporting
        };
        return Err(Error::SingleClass(only.to_string()));
    }
    Ok(df
        .into_iter()
        .map(|(term, (df_pos, df_neg))| TermStats {
            term: term.to_string(),
            n_total: n_pos + n_neg,
            df_pos,
            df_neg,
            n_pos,
            n_neg,
        })
        .collect())
}

/// χ²(t, c) = N [P(t,c) P(¬t,¬c) − P(t,¬c) P(¬t,c)]² / [P(t) P(¬t) P(c) P(¬c)].
///
/// Terms present in every document (or, degenerately, none) score 0.
pub fn chi_square(s: &TermStats) -> Result<f64> {
    s.check()?;
    let n = s.n_total as f64;
    let df = s.df_pos + s.df_neg;
    if df == s.n_total {
        return Ok(0.0);
    }
    let p_t_c = s.df_pos as f64 / n;
    let p_t_nc = s.df_neg as f64 / n;
    let p_nt_c = (s.n_pos - s.df_pos) as f64 / n;
    let p_nt_nc = (s.n_neg - s.df_neg) as f64 / n;
    let p_t = df as f64 / n;
    let p_c = s.n_pos as f64 / n;
    let diff = p_t_c * p_nt_nc - p_t_nc * p_nt_c;
    Ok(n * diff * diff / (p_t * (1.0 - p_t) * p_c * (1.0 - p_c)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureEntry {
    pub term: String,
    pub score: f64,
    pub direction: Stance,
}

/// The selected vocabulary, ranked by chi-square. Feature ids are list
/// positions.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    entries: Vec<FeatureEntry>,
    index: HashMap<String, u32>,
}

impl FeatureSet {
    pub fn from_entries(entries: Vec<FeatureEntry>) -> Result<Self> {
        let mut index = HashMap::with_capacity(entries.len());
        for (id, e) in entries.iter().enumerate() {
            if e.term.is_empty() || e.term.contains(['\t', '\n']) {
                return Err(Error::InvalidInput(format!(
                    "invalid feature term {:?}",
                    e.term
                )));
            }
            if index.insert(e.term.clone(), id as u32).is_some() {
                return Err(Error::InvalidInput(format!(
                    "duplicate feature term `{}`",
                    e.term
                )));
            }
        }
        Ok(FeatureSet { entries, index })
    }

    pub fn entries(&self) -> &[FeatureEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn id_of(&self, term: &str) -> Option<u32> {
        self.index.get(term).copied()
    }

    /// SHA-256 over the ordered term list, hex encoded. Ties a model to
    /// the vocabulary it was trained on.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        for e in &self.entries {
            hasher.update(e.term.as_bytes());
            hasher.update(b"\n");
        }
        hasher
            .finalize()
            .iter()
            .fold(String::with_capacity(64), |mut s, b| {
                let _ = write!(s, "{b:02x}");
                s
            })
    }

    /// `rank \t term \t score \t direction`, one line per feature, rank
    /// starting at 1 and scores with six decimals.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (rank, e) in self.entries.iter().enumerate() {
            let _ = writeln!(
                out,
                "{}\t{}\t{:.6}\t{}",
                rank + 1,
                e.term,
                e.score,
                e.direction
            );
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            let [rank, term, score, direction] = cols[..] else {
                return Err(Error::parse(
                    "features",
                    lineno,
                    "expected 4 tab-separated columns",
                ));
            };
            let rank: usize = rank
                .parse()
                .map_err(|_| Error::parse("features", lineno, format!("bad rank `{rank}`")))?;
            if rank != entries.len() + 1 {
                return Err(Error::parse(
                    "features",
                    lineno,
                    format!("rank {rank} out of sequence"),
                ));
            }
            let score: f64 = score
                .parse()
                .map_err(|_| Error::parse("features", lineno, format!("bad score `{score}`")))?;
            let direction = direction
                .parse()
                .map_err(|msg: String| Error::parse("features", lineno, msg))?;
            entries.push(FeatureEntry {
                term: term.to_string(),
                score,
                direction,
            });
        }
        FeatureSet::from_entries(entries)
    }
}

/// Top-`k` terms by chi-square; equal scores are ordered by term. Takes
/// every term when fewer than `k` exist.
pub fn select_features(stats: &[TermStats], k: usize) -> Result<FeatureSet> {
    if k == 0 {
        return Err(Error::InvalidInput(
            "feature count must be at least 1".into(),
        ));
    }
    let mut scored = stats
        .iter()
        .map(|s| {
            Ok(FeatureEntry {
                term: s.term.clone(),
                score: chi_square(s)?,
                direction: s.direction(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    scored.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.term.cmp(&b.term))
    });
    scored.truncate(k);
    FeatureSet::from_entries(scored)
}

/// Binary bag-of-words vector: sorted, distinct feature ids.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct SparseVector {
    indices: Vec<u32>,
}

impl SparseVector {
    pub fn from_indices(mut indices: Vec<u32>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        SparseVector { indices }
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    /// Feature values; every stored feature is exactly 1.
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.indices.iter().map(|_| 1.0)
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

pub fn vectorize(doc: &Document, fs: &FeatureSet) -> SparseVector {
    vectorize_tokens(&doc.tokens, fs)
}

pub fn vectorize_tokens<S: AsRef<str>>(tokens: &[S], fs: &FeatureSet) -> SparseVector {
    SparseVector::from_indices(tokens.iter().filter_map(|t| fs.id_of(t.as_ref())).collect())
}
