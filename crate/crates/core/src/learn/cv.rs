use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gbm::{train, Hyperparameters, TrainData};
use super::metrics::{evaluate, EvalReport};
use super::sampling::upsample_minority;
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::seed::{derive_seed, rng_for};

/// Deals shuffled positives, then shuffled negatives, round-robin into `k`
/// folds, continuing the deal where the positives stopped so fold sizes differ
/// by at most one. Each fold is sorted.
pub fn stratified_folds(positive: &[bool], rows: &[usize], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::Config("cross-validation needs k >= 2".into()));
    }
    let mut pos: Vec<usize> = rows.iter().copied().filter(|&r| positive[r]).collect();
    let mut neg: Vec<usize> = rows.iter().copied().filter(|&r| !positive[r]).collect();
    if k > pos.len().min(neg.len()) {
        return Err(Error::InvalidInput(format!(
            "k = {k} exceeds the minority class size {}",
            pos.len().min(neg.len())
        )));
    }
    let mut rng = rng_for(seed, "cv/folds");
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);
    let mut folds = vec![Vec::new(); k];
    for (i, r) in pos.iter().chain(&neg).enumerate() {
        folds[i % k].push(*r);
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvSummary {
    pub k: usize,
    pub folds: Vec<EvalReport>,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    pub mean_sensitivity: f64,
    pub mean_specificity: f64,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n;
    (m, v.sqrt())
}

/// Stratified k-fold cross-validation. Up-sampling happens inside each
/// training fold only; validation folds keep their natural prevalence.
pub fn cross_validate(
    m: &FeatureMatrix,
    positive: &[bool],
    rows: &[usize],
    k: usize,
    hp: &Hyperparameters,
    seed: u64,
) -> Result<CvSummary> {
    let folds = stratified_folds(positive, rows, k, seed)?;
    let reports: Vec<EvalReport> = (0..k)
        .into_par_iter()
        .map(|i| {
            let train_rows: Vec<usize> = folds
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .flat_map(|(_, f)| f.iter().copied())
                .collect();
            let fold_seed = derive_seed(seed, &format!("cv/fold{i}"));
            let balanced = upsample_minority(&train_rows, positive, fold_seed)?;
            let model = train(
                TrainData {
                    matrix: m,
                    positive,
                    rows: &balanced,
                },
                hp,
                fold_seed,
            )?;
            let train_acc = evaluate(&model, m, positive, &train_rows, 0.5)?.accuracy;
            Ok(evaluate(&model, m, positive, &folds[i], 0.5)?.with_train_accuracy(train_acc))
        })
        .collect::<Result<_>>()?;
    let acc: Vec<f64> = reports.iter().map(|r| r.accuracy).collect();
    let (mean_accuracy, std_accuracy) = mean_std(&acc);
    let avg = |f: fn(&EvalReport) -> Option<f64>| {
        let v: Vec<f64> = reports.iter().filter_map(f).collect();
        mean_std(&v).0
    };
    Ok(CvSummary {
        k,
        mean_sensitivity: avg(|r| r.sensitivity),
        mean_specificity: avg(|r| r.specificity),
        folds: reports,
        mean_accuracy,
        std_accuracy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_folds_of_one_hundred() {
        let positive: Vec<bool> = (0..1000).map(|i| i < 68).collect();
        let rows: Vec<usize> = (0..1000).collect();
        let folds = stratified_folds(&positive, &rows, 10, 5).unwrap();
        assert!(folds.iter().all(|f| f.len() == 100));
        let mut all: Vec<usize> = folds.concat();
        all.sort_unstable();
        assert_eq!(all, rows);
        for f in &folds {
            let p = f.iter().filter(|&&r| positive[r]).count();
            assert!(p == 6 || p == 7);
        }
    }

    #[test]
    fn bad_k() {
        let positive = [true, true, false, false, false];
        let rows = [0, 1, 2, 3, 4];
        assert!(stratified_folds(&positive, &rows, 1, 0).is_err());
        assert!(stratified_folds(&positive, &rows, 3, 0).is_err());
        assert!(stratified_folds(&positive, &rows, 2, 0).is_ok());
    }
}
