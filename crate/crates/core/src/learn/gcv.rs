//! Backward feature elimination driven by a generalized cross-validation
//! estimate of error.
//!
//! `GCV = MSE / (1 - C/N)^2` where MSE is the weighted mean squared
//! probability residual on the training rows, `N` the (weighted) row count
//! and `C = leaves * penalty` the effective parameter count. Each step
//! retrains a reduced-budget model without each remaining feature and drops
//! the one whose removal raises GCV least. Features the current model never
//! splits on are dropped first, one per step, at zero cost.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gbm::{compress, sigmoid, train_with, GbmModel, Hyperparameters, TrainData};
use super::sampling::upsample_minority;
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::seed::derive_seed;

/// Candidate column, GCV increase, and the retrained model with its GCV.
type Candidate = (usize, f64, Option<(GbmModel, f64)>);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GcvOptions {
    /// Cost per leaf in the effective parameter count.
    pub penalty: f64,
    /// Trees per candidate retrain.
    pub budget_trees: usize,
    /// Stop once the cheapest removal raises GCV by more than this fraction
    /// of the current GCV.
    pub tolerance: f64,
    /// Never shrink the active set below this size.
    pub min_features: usize,
    /// Balance classes before fitting. Off by default: duplicated rows
    /// inflate `N` and hide complexity from the penalty.
    pub upsample: bool,
}

impl Default for GcvOptions {
    fn default() -> Self {
        GcvOptions {
            penalty: 3.0,
            budget_trees: 50,
            tolerance: 0.0,
            min_features: 1,
            upsample: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EliminationStep {
    pub removed: usize,
    pub name: String,
    pub gcv_before: f64,
    pub gcv_after: f64,
    /// `gcv_after - gcv_before`; may be negative.
    pub increase: f64,
    /// Candidates that needed a retrain (unused features are free).
    pub retrained: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GcvSelection {
    pub selected: Vec<usize>,
    pub selected_names: Vec<String>,
    /// `(feature, GCV increase when removed)`; selected features carry their
    /// increase at the final, rejected step.
    pub scores: Vec<(String, f64)>,
    pub trace: Vec<EliminationStep>,
    pub final_gcv: f64,
}

/// GCV of `model` on compressed training rows.
pub fn gcv_of(
    model: &GbmModel,
    m: &FeatureMatrix,
    positive: &[bool],
    rows: &[usize],
    weights: &[f64],
    penalty: f64,
) -> Result<f64> {
    let n: f64 = weights.iter().sum();
    let c = model.n_leaves() as f64 * penalty;
    if n <= c {
        return Err(Error::GcvUndefined(format!(
            "{} effective parameters for {} rows",
            c, n
        )));
    }
    let mut sse = 0.0;
    for (&r, &w) in rows.iter().zip(weights) {
        let y = f64::from(u8::from(positive[r]));
        let e = y - model.predict(m.row(r));
        sse += w * e * e;
    }
    Ok(sse / n / (1.0 - c / n).powi(2))
}

/// Step-by-step eliminator; also drives [`gcv_backward_eliminate`].
pub struct GcvEliminator<'a> {
    matrix: &'a FeatureMatrix,
    positive: &'a [bool],
    balanced: Vec<usize>,
    uniq: Vec<usize>,
    weights: Vec<f64>,
    hp: Hyperparameters,
    seed: u64,
    opts: GcvOptions,
    active: Vec<bool>,
    current: Option<(GbmModel, f64)>,
    trace: Vec<EliminationStep>,
    scores: Vec<Option<f64>>,
    final_increases: Vec<(usize, f64)>,
    finished: bool,
}

impl<'a> GcvEliminator<'a> {
    /// Every retrain sees the same (optionally up-sampled) row set.
    pub fn new(
        matrix: &'a FeatureMatrix,
        positive: &'a [bool],
        rows: &[usize],
        hp: &Hyperparameters,
        seed: u64,
        opts: GcvOptions,
    ) -> Result<Self> {
        if matrix.n_cols() < 2 {
            return Err(Error::InvalidInput("elimination needs at least two features".into()));
        }
        let balanced = if opts.upsample {
            upsample_minority(rows, positive, derive_seed(seed, "gcv/upsample"))?
        } else {
            rows.to_vec()
        };
        let (uniq, weights) = compress(&balanced);
        let hp = Hyperparameters {
            n_trees: opts.budget_trees,
            ..hp.clone()
        };
        Ok(GcvEliminator {
            matrix,
            positive,
            balanced,
            uniq,
            weights,
            hp,
            seed,
            opts,
            active: vec![true; matrix.n_cols()],
            current: None,
            trace: Vec::new(),
            scores: vec![None; matrix.n_cols()],
            final_increases: Vec::new(),
            finished: false,
        })
    }

    pub fn active(&self) -> &[bool] {
        &self.active
    }

    fn fit(&self, active: &[bool]) -> Result<(GbmModel, f64)> {
        let (model, _) = train_with(
            TrainData {
                matrix: self.matrix,
                positive: self.positive,
                rows: &self.balanced,
            },
            &self.hp,
            derive_seed(self.seed, "gcv/train"),
            Some(active),
        )?;
        let g = gcv_of(
            &model,
            self.matrix,
            self.positive,
            &self.uniq,
            &self.weights,
            self.opts.penalty,
        )?;
        Ok((model, g))
    }

    /// GCV of the intercept-only model.
    fn null_gcv(&self) -> f64 {
        let n: f64 = self.weights.iter().sum();
        let pos: f64 = self
            .uniq
            .iter()
            .zip(&self.weights)
            .filter(|(r, _)| self.positive[**r])
            .map(|(_, w)| w)
            .sum();
        let p = sigmoid((pos / (n - pos)).ln());
        (pos * (1.0 - p).powi(2) + (n - pos) * p * p) / n
    }

    /// Performs one elimination; `None` once the stopping rule fires.
    pub fn next_step(&mut self) -> Result<Option<EliminationStep>> {
        if self.finished {
            return Ok(None);
        }
        if self.current.is_none() {
            self.current = Some(self.fit(&self.active)?);
        }
        let (model, gcv_now) = self.current.clone().expect("fitted above");
        let candidates: Vec<usize> = (0..self.active.len()).filter(|&f| self.active[f]).collect();
        let used = model.used_features();

        if candidates.len() > self.opts.min_features {
            if let Some(&f) = candidates.iter().find(|&&f| !used[f]) {
                // Dropping a feature the model never split on leaves it
                // unchanged, so it costs nothing and needs no retrain.
                return Ok(Some(self.commit(f, 0.0, (model, gcv_now), 0)));
            }
        }
        let results: Vec<Candidate> = if candidates.len() == 1 {
            vec![(candidates[0], self.null_gcv() - gcv_now, None)]
        } else {
            candidates
                .par_iter()
                .map(|&f| {
                    let mut act = self.active.clone();
                    act[f] = false;
                    let (m2, g2) = self.fit(&act)?;
                    Ok((f, g2 - gcv_now, Some((m2, g2))))
                })
                .collect::<Result<_>>()?
        };
        let retrained = results.iter().filter(|r| r.2.is_some()).count();
        let best = results
            .iter()
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
            .expect("at least one candidate");

        let stop = candidates.len() <= self.opts.min_features || best.1 > self.opts.tolerance * gcv_now.abs();
        if stop {
            self.final_increases = results.iter().map(|r| (r.0, r.1)).collect();
            self.finished = true;
            return Ok(None);
        }
        let next = best.2.clone().unwrap_or((model, gcv_now));
        Ok(Some(self.commit(best.0, best.1, next, retrained)))
    }

    fn commit(&mut self, f: usize, inc: f64, next: (GbmModel, f64), retrained: usize) -> EliminationStep {
        let gcv_before = self.current.as_ref().map_or(f64::NAN, |c| c.1);
        self.active[f] = false;
        self.scores[f] = Some(inc);
        self.current = Some(next);
        let step = EliminationStep {
            removed: f,
            name: self.matrix.catalog().get(f).name.clone(),
            gcv_before,
            gcv_after: gcv_before + inc,
            increase: inc,
            retrained,
        };
        self.trace.push(step.clone());
        step
    }

    /// Runs to the stopping rule.
    pub fn run(mut self) -> Result<GcvSelection> {
        while self.next_step()?.is_some() {}
        for (f, inc) in &self.final_increases {
            self.scores[*f] = Some(*inc);
        }
        let cat = self.matrix.catalog();
        let selected: Vec<usize> = (0..self.active.len()).filter(|&f| self.active[f]).collect();
        Ok(GcvSelection {
            selected_names: selected.iter().map(|&f| cat.get(f).name.clone()).collect(),
            selected,
            scores: self
                .scores
                .iter()
                .enumerate()
                .map(|(f, s)| (cat.get(f).name.clone(), s.unwrap_or(0.0)))
                .collect(),
            final_gcv: self.current.as_ref().map_or(f64::NAN, |c| c.1),
            trace: self.trace,
        })
    }
}

/// Backward elimination over all catalog features of `matrix`, trained on
/// `rows`.
pub fn gcv_backward_eliminate(
    matrix: &FeatureMatrix,
    positive: &[bool],
    rows: &[usize],
    hp: &Hyperparameters,
    seed: u64,
    opts: GcvOptions,
) -> Result<GcvSelection> {
    GcvEliminator::new(matrix, positive, rows, hp, seed, opts)?.run()
}
