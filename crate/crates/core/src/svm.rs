//! Class-weighted linear SVM trained by dual coordinate descent.
//!
//! The solver minimizes the L1-loss dual
//!
//! ```text
//! f(α) = ½ Σᵢ Σⱼ αᵢ αⱼ yᵢ yⱼ ⟨xᵢ, xⱼ⟩ − Σᵢ αᵢ,   0 ≤ αᵢ ≤ Cᵢ
//! ```
//!
//! one coordinate at a time, keeping `w = Σ αᵢ yᵢ xᵢ` up to date. The bias
//! is learned as the weight of a constant feature appended to every
//! example, which removes the `Σ αᵢ yᵢ = 0` constraint. Supporting
//! examples get cost `C·wi`, Opposing examples `C`.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::features::{vectorize, FeatureSet, SparseVector};
use crate::preprocess::Document;
use crate::stance::Stance;

const MODEL_HEADER: &str = "stance-svm v1";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    /// Base misclassification cost.
    pub c: f64,
    /// Cost multiplier for the majority (Supporting) class, in (0, 1].
    pub wi: f64,
    /// Stop once the largest projected gradient of an epoch falls below this.
    pub tolerance: f64,
    pub max_epochs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            c: 1.0,
            wi: 0.9,
            tolerance: 1e-4,
            max_epochs: 1000,
            seed: 42,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::InvalidInput(format!(
                "C must be positive, got {}",
                self.c
            )));
        }
        if !(self.wi > 0.0 && self.wi <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "wi must lie in (0, 1], got {}",
                self.wi
            )));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::InvalidInput(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_epochs == 0 {
            return Err(Error::InvalidInput("max_epochs must be at least 1".into()));
        }
        Ok(())
    }

    /// Upper bound of αᵢ for an example of the given class.
    pub fn cost_for(&self, stance: Stance) -> f64 {
        match stance {
            Stance::Supporting => self.c * self.wi,
            Stance::Opposing => self.c,
        }
    }
}

/// A dual problem over sparse real-valued rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    rows: Vec<Vec<(u32, f64)>>,
    labels: Vec<f64>,
    costs: Vec<f64>,
    dim: usize,
}

impl Problem {
    /// `labels` must be ±1 with both signs present; `costs` are the box
    /// upper bounds.
    pub fn new(
        rows: Vec<Vec<(u32, f64)>>,
        labels: Vec<f64>,
        costs: Vec<f64>,
        dim: usize,
    ) -> Result<Self> {
        if rows.len() != labels.len() || rows.len() != costs.len() {
            return Err(Error::InvalidInput(
                "rows, labels and costs differ in length".into(),
            ));
        }
        if labels.iter().any(|&y| y != 1.0 && y != -1.0) {
            return Err(Error::InvalidInput("labels must be +1 or -1".into()));
        }
        if !labels.contains(&1.0) {
            return Err(Error::SingleClass(Stance::Opposing.to_string()));
        }
        if !labels.contains(&-1.0) {
            return Err(Error::SingleClass(Stance::Supporting.to_string()));
        }
        if costs.iter().any(|&c| !(c.is_finite() && c > 0.0)) {
            return Err(Error::InvalidInput(
                "costs must be positive and finite".into(),
            ));
        }
        for row in &rows {
            for &(j, v) in row {
                if !v.is_finite() {
                    return Err(Error::NonFinite("problem construction"));
                }
                if j as usize >= dim {
                    return Err(Error::InvalidInput(format!(
                        "feature {j} outside dimension {dim}"
                    )));
                }
            }
        }
        Ok(Problem {
            rows,
            labels,
            costs,
            dim,
        })
    }

    /// Builds the problem for binary examples over `k` features. With
    /// `bias`, feature `k` is a constant 1 on every row.
    pub fn from_binary(
        data: &[(SparseVector, Stance)],
        k: usize,
        cfg: &TrainConfig,
        bias: bool,
    ) -> Result<Self> {
        let dim = if bias { k + 1 } else { k };
        let rows = data
            .iter()
            .map(|(x, _)| {
                let mut row: Vec<(u32, f64)> = x.indices().iter().map(|&j| (j, 1.0)).collect();
                if bias {
                    row.push((k as u32, 1.0));
                }
                row
            })
            .collect();
        let labels = data.iter().map(|(_, s)| s.sign()).collect();
        let costs = data.iter().map(|(_, s)| cfg.cost_for(*s)).collect();
        Problem::new(rows, labels, costs, dim)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn rows(&self) -> &[Vec<(u32, f64)>] {
        &self.rows
    }

    /// w = Σ αᵢ yᵢ xᵢ.
    pub fn primal_weights(&self, alphas: &[f64]) -> Vec<f64> {
        let mut w = vec![0.0; self.dim];
        for ((row, &y), &a) in self.rows.iter().zip(&self.labels).zip(alphas) {
            if a != 0.0 {
                for &(j, v) in row {
                    w[j as usize] += a * y * v;
                }
            }
        }
        w
    }

    /// The dual objective ½‖Σ αᵢ yᵢ xᵢ‖² − Σ αᵢ. Errors if `alphas` leaves
    /// the feasible box.
    pub fn dual_objective(&self, alphas: &[f64]) -> Result<f64> {
        if alphas.len() != self.len() {
            return Err(Error::InvalidInput("one alpha per example required".into()));
        }
        if let Some(i) =
            (0..alphas.len()).find(|&i| !(alphas[i] >= 0.0 && alphas[i] <= self.costs[i]))
        {
            return Err(Error::InvalidInput(format!(
                "alpha[{i}] = {} outside [0, {}]",
                alphas[i], self.costs[i]
            )));
        }
        let w = self.primal_weights(alphas);
        Ok(0.5 * w.iter().map(|v| v * v).sum::<f64>() - alphas.iter().sum::<f64>())
    }

    /// Dual coordinate descent with a seeded random permutation per epoch.
    pub fn solve(&self, tolerance: f64, max_epochs: usize, seed: u64) -> Result<Solution> {
        let n = self.len();
        let diag: Vec<f64> = self
            .rows
            .iter()
            .map(|r| r.iter().map(|(_, v)| v * v).sum())
            .collect();
        let mut alphas = vec![0.0; n];
        let mut w = vec![0.0; self.dim];
        let mut order: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut epochs = 0;
        let mut max_violation = f64::INFINITY;

        while epochs < max_epochs {
            order.shuffle(&mut rng);
            max_violation = 0.0;
            for &i in &order {
                let row = &self.rows[i];
                let y = self.labels[i];
                let upper = self.costs[i];
                let grad = y * row.iter().map(|&(j, v)| w[j as usize] * v).sum::<f64>() - 1.0;
                let projected = if alphas[i] <= 0.0 {
                    grad.min(0.0)
                } else if alphas[i] >= upper {
                    grad.max(0.0)
                } else {
                    grad
                };
                max_violation = f64::max(max_violation, projected.abs());
                if projected.abs() <= 1e-12 {
                    continue;
                }
                let old = alphas[i];
                // an all-zero row makes the objective linear in αᵢ
                alphas[i] = if diag[i] > 0.0 {
                    (old - grad / diag[i]).clamp(0.0, upper)
                } else {
                    upper
                };
                let delta = (alphas[i] - old) * y;
                for &(j, v) in row {
                    w[j as usize] += delta * v;
                }
            }
            epochs += 1;
            if !max_violation.is_finite() || w.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("training"));
            }
            if max_violation < tolerance {
                break;
            }
        }
        Ok(Solution {
            alphas,
            weights: w,
            epochs,
            max_violation,
            converged: max_violation < tolerance,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub alphas: Vec<f64>,
    pub weights: Vec<f64>,
    pub epochs: usize,
    /// Largest projected-gradient magnitude seen in the final epoch.
    pub max_violation: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainMeta {
    pub c: f64,
    pub wi: f64,
    pub seed: u64,
    /// Absent for hand-built models.
    pub epochs: Option<usize>,
    pub max_violation: Option<f64>,
}

/// A linear decision function over `k` binary features plus bias.
/// Positive margins map to Supporting, negative to Opposing.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    weights: Vec<f64>,
    feature_digest: String,
    pub meta: TrainMeta,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub stance: Stance,
    pub margin: f64,
}

impl Model {
    /// `weights` holds one weight per feature followed by the bias.
    pub fn from_weights(
        weights: Vec<f64>,
        feature_digest: String,
        meta: TrainMeta,
    ) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidInput(
                "a model needs at least the bias weight".into(),
            ));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite("model weights"));
        }
        Ok(Model {
            weights,
            feature_digest,
            meta,
        })
    }

    pub fn n_features(&self) -> usize {
        self.weights.len() - 1
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> f64 {
        self.weights[self.weights.len() - 1]
    }

    pub fn feature_digest(&self) -> &str {
        &self.feature_digest
    }

    pub fn check_features(&self, fs: &FeatureSet) -> Result<()> {
        let found = fs.digest();
        if found != self.feature_digest || fs.len() != self.n_features() {
            return Err(Error::DigestMismatch {
                expected: self.feature_digest.clone(),
                found,
            });
        }
        Ok(())
    }

    /// Margin w·x + b; a zero margin resolves to Supporting.
    pub fn predict(&self, x: &SparseVector) -> Result<Prediction> {
        let k = self.n_features();
        let mut margin = self.bias();
        for &j in x.indices() {
            let j = j as usize;
            if j >= k {
                return Err(Error::InvalidInput(format!(
                    "feature {j} outside model dimension {k}"
                )));
            }
            margin += self.weights[j];
        }
        let stance = if margin >= 0.0 {
            Stance::Supporting
        } else {
            Stance::Opposing
        };
        Ok(Prediction { stance, margin })
    }

    /// Vectorizes and scores a document after checking that `fs` is the
    /// vocabulary this model was trained on.
    pub fn predict_document(&self, fs: &FeatureSet, doc: &Document) -> Result<Prediction> {
        self.check_features(fs)?;
        self.predict(&vectorize(doc, fs))
    }

    /// Text form: header, `K`, `C`, `wi`, `seed`, `digest`, optional
    /// `epochs` and `violation` lines, then K+1 weights (bias last) with 17
    /// significant digits.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{MODEL_HEADER}");
        let _ = writeln!(out, "K {}", self.n_features());
        let _ = writeln!(out, "C {:?}", self.meta.c);
        let _ = writeln!(out, "wi {:?}", self.meta.wi);
        let _ = writeln!(out, "seed {}", self.meta.seed);
        let _ = writeln!(out, "digest {}", self.feature_digest);
        if let Some(e) = self.meta.epochs {
            let _ = writeln!(out, "epochs {e}");
        }
        if let Some(v) = self.meta.max_violation {
            let _ = writeln!(out, "violation {v:?}");
        }
        for w in &self.weights {
            let _ = writeln!(out, "{w:.16e}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        let bad = |line: usize, msg: &str| Error::parse("model", line, msg);
        if lines.next().map(|(_, l)| l) != Some(MODEL_HEADER) {
            return Err(bad(1, "missing `stance-svm v1` header"));
        }
        let mut field = |name: &str| -> Result<String> {
            let (line, l) = lines.next().ok_or_else(|| bad(0, "truncated header"))?;
            l.strip_prefix(name)
                .and_then(|rest| rest.strip_prefix(' '))
                .map(str::to_string)
                .ok_or_else(|| bad(line, &format!("expected `{name} <value>`")))
        };
        let k: usize = field("K")?.parse().map_err(|_| bad(2, "bad K"))?;
        let c: f64 = field("C")?.parse().map_err(|_| bad(3, "bad C"))?;
        let wi: f64 = field("wi")?.parse().map_err(|_| bad(4, "bad wi"))?;
        let seed: u64 = field("seed")?.parse().map_err(|_| bad(5, "bad seed"))?;
        let digest = field("digest")?;
        let (mut epochs, mut max_violation) = (None, None);
        let mut weights = Vec::with_capacity(k + 1);
        for (line, l) in lines.filter(|(_, l)| !l.is_empty()) {
            if let Some(v) = l.strip_prefix("epochs ") {
                epochs = Some(v.parse().map_err(|_| bad(line, "bad epochs"))?);
            } else if let Some(v) = l.strip_prefix("violation ") {
                max_violation = Some(v.parse().map_err(|_| bad(line, "bad violation"))?);
            } else {
                weights.push(l.parse::<f64>().map_err(|_| bad(line, "bad weight"))?);
            }
        }
        if weights.len() != k + 1 {
            return Err(Error::InvalidInput(format!(
                "model declares K = {k} but has {} weights",
                weights.len()
            )));
        }
        Model::from_weights(
            weights,
            digest,
            TrainMeta {
                c,
                wi,
                seed,
                epochs,
                max_violation,
            },
        )
    }
}

/// Trains on binary vectors over the features of `fs`.
pub fn train(data: &[(SparseVector, Stance)], fs: &FeatureSet, cfg: &TrainConfig) -> Result<Model> {
    cfg.validate()?;
    let problem = Problem::from_binary(data, fs.len(), cfg, true)?;
    let solution = problem.solve(cfg.tolerance, cfg.max_epochs, cfg.seed)?;
    if !solution.converged {
        log::info!(
            "dual coordinate descent stopped after {} epochs with violation {:.3e}",
            solution.epochs,
            solution.max_violation
        );
    }
    Model::from_weights(
        solution.weights,
        fs.digest(),
        TrainMeta {
            c: cfg.c,
            wi: cfg.wi,
            seed: cfg.seed,
            epochs: Some(solution.epochs),
            max_violation: Some(solution.max_violation),
        },
    )
}
