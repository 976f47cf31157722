//! Binomial-deviance gradient boosting.

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::binning::{bin_column, BinnedColumn};
use super::tree::{grow, GrowInput, Tree};
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::seed::rng_for;

/// Leaf values are clipped to this many log-odds.
pub const LEAF_CLIP: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub min_samples_leaf: usize,
    /// Fraction of rows drawn (without replacement) for each tree.
    pub subsample: f64,
    /// Upper bound on candidate thresholds per feature.
    pub max_bins: usize,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Hyperparameters {
            n_trees: 200,
            max_depth: 3,
            learning_rate: 0.1,
            min_samples_leaf: 20,
            subsample: 1.0,
            max_bins: 255,
        }
    }
}

impl Hyperparameters {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return bad("learning_rate must be in (0, 1]");
        }
        if self.max_depth == 0 {
            return bad("max_depth must be at least 1");
        }
        if self.min_samples_leaf == 0 {
            return bad("min_samples_leaf must be at least 1");
        }
        if !(self.subsample > 0.0 && self.subsample <= 1.0) {
            return bad("subsample must be in (0, 1]");
        }
        if !(2..=255).contains(&self.max_bins) {
            return bad("max_bins must be in [2, 255]");
        }
        Ok(())
    }
}

/// Trained ensemble: `p = sigmoid(initial_score + learning_rate * sum(trees))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbmModel {
    pub catalog_version: String,
    pub feature_names: Vec<String>,
    pub hyperparameters: Hyperparameters,
    pub initial_score: f64,
    pub learning_rate: f64,
    pub trees: Vec<Tree>,
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl GbmModel {
    /// Raw log-odds for one row aligned to the model catalog (`NaN` = missing).
    pub fn score(&self, row: &[f64]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.predict(row)).sum();
        self.initial_score + self.learning_rate * sum
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        sigmoid(self.score(row))
    }

    pub fn check_catalog(&self, m: &FeatureMatrix) -> Result<()> {
        if m.catalog().version() != self.catalog_version {
            return Err(Error::CatalogMismatch {
                expected: self.catalog_version.clone(),
                found: m.catalog().version().to_string(),
            });
        }
        Ok(())
    }

    /// Probabilities for the given matrix rows.
    pub fn predict_rows(&self, m: &FeatureMatrix, rows: &[usize]) -> Result<Vec<f64>> {
        self.check_catalog(m)?;
        Ok(rows.iter().map(|&r| self.predict(m.row(r))).collect())
    }

    /// Features that appear in at least one split.
    pub fn used_features(&self) -> Vec<bool> {
        let mut used = vec![false; self.feature_names.len()];
        for t in &self.trees {
            for (f, _) in t.splits() {
                used[f] = true;
            }
        }
        used
    }

    pub fn n_leaves(&self) -> usize {
        self.trees.iter().map(Tree::n_leaves).sum()
    }
}

/// Training data for one fit: matrix rows (duplicates allowed, as produced by
/// up-sampling) and the per-row positive flag.
#[derive(Debug, Clone, Copy)]
pub struct TrainData<'a> {
    pub matrix: &'a FeatureMatrix,
    /// `positive[r]` is true when matrix row `r` is illiterate.
    pub positive: &'a [bool],
    pub rows: &'a [usize],
}

/// Distinct rows with their multiplicities, in ascending row order.
pub(crate) fn compress(rows: &[usize]) -> (Vec<usize>, Vec<f64>) {
    let mut sorted = rows.to_vec();
    sorted.sort_unstable();
    let mut uniq: Vec<usize> = Vec::new();
    let mut w: Vec<f64> = Vec::new();
    for r in sorted {
        if uniq.last() == Some(&r) {
            *w.last_mut().expect("paired") += 1.0;
        } else {
            uniq.push(r);
            w.push(1.0);
        }
    }
    (uniq, w)
}

/// Per-round diagnostics.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainTrace {
    /// Mean binomial deviance on the training rows before any tree and after
    /// each round.
    pub deviance: Vec<f64>,
}

fn mean_deviance(y: &[f64], scores: &[f64], w: &[f64]) -> f64 {
    let mut d = 0.0;
    let mut tw = 0.0;
    for i in 0..y.len() {
        let p = sigmoid(scores[i]).clamp(1e-300, 1.0 - 1e-16);
        d -= w[i] * (y[i] * p.ln() + (1.0 - y[i]) * (1.0 - p).ln());
        tw += w[i];
    }
    2.0 * d / tw
}

pub fn train(data: TrainData<'_>, hp: &Hyperparameters, seed: u64) -> Result<GbmModel> {
    train_with(data, hp, seed, None).map(|(m, _)| m)
}

/// Fits a model; `allowed` restricts which catalog features may be split on.
pub fn train_with(
    data: TrainData<'_>,
    hp: &Hyperparameters,
    seed: u64,
    allowed: Option<&[bool]>,
) -> Result<(GbmModel, TrainTrace)> {
    hp.validate()?;
    let m = data.matrix;
    let (rows, weight) = compress(data.rows);
    let y: Vec<f64> = rows.iter().map(|&r| f64::from(u8::from(data.positive[r]))).collect();
    let w_pos: f64 = y.iter().zip(&weight).map(|(y, w)| y * w).sum();
    let w_all: f64 = weight.iter().sum();
    if w_pos < 2.0 || w_all - w_pos < 2.0 {
        return Err(Error::InvalidInput(
            "training needs at least two rows of each class".into(),
        ));
    }
    for &r in &rows {
        if m.row(r)
            .iter()
            .enumerate()
            .any(|(c, v)| !m.is_missing(r, c) && !v.is_finite())
        {
            return Err(Error::InvalidInput(format!(
                "non-finite feature value in row `{}`",
                m.ids()[r]
            )));
        }
    }

    let n_features = m.n_cols();
    let columns: Vec<BinnedColumn> = (0..n_features)
        .filter(|&f| allowed.is_none_or(|a| a[f]))
        .map(|f| bin_column(m, f, &rows, &weight, hp.max_bins))
        .filter(|c| c.n_bins() > 0)
        .collect();

    let p_bar = w_pos / w_all;
    let initial_score = (p_bar / (1.0 - p_bar)).ln();
    let mut model = GbmModel {
        catalog_version: m.catalog().version().to_string(),
        feature_names: m.catalog().names().map(str::to_string).collect(),
        hyperparameters: hp.clone(),
        initial_score,
        learning_rate: hp.learning_rate,
        trees: Vec::with_capacity(hp.n_trees),
    };

    let n = rows.len();
    let mut scores = vec![initial_score; n];
    let mut wresid = vec![0.0; n];
    let mut whess = vec![0.0; n];
    let mut trace = TrainTrace {
        deviance: vec![mean_deviance(&y, &scores, &weight)],
    };
    let mut rng = rng_for(seed, "gbm/subsample");
    let n_sub = ((hp.subsample * n as f64).round() as usize).clamp(1, n);
    let min_leaf = hp.min_samples_leaf as f64;

    for _ in 0..hp.n_trees {
        for i in 0..n {
            let p = sigmoid(scores[i]);
            wresid[i] = weight[i] * (y[i] - p);
            whess[i] = weight[i] * p * (1.0 - p);
        }
        let mut idx: Vec<u32> = if n_sub < n {
            let mut v: Vec<u32> = sample(&mut rng, n, n_sub).into_iter().map(|i| i as u32).collect();
            v.sort_unstable();
            v
        } else {
            (0..n as u32).collect()
        };
        let input = GrowInput {
            columns: &columns,
            weight: &weight,
            wresid: &wresid,
            whess: &whess,
            max_depth: hp.max_depth,
            min_leaf,
            leaf_clip: LEAF_CLIP,
        };
        let tree = grow(&input, &mut idx);
        for (i, &r) in rows.iter().enumerate() {
            scores[i] += hp.learning_rate * tree.predict(m.row(r));
        }
        model.trees.push(tree);
        trace.deviance.push(mean_deviance(&y, &scores, &weight));
    }
    Ok((model, trace))
}
