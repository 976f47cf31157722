//! Boosting checked against hand-computed Newton steps.

use litmap_core::features::{Family, FeatureDef, Kind};
use litmap_core::learn::{sigmoid, train_with, Hyperparameters, TrainData};
use litmap_core::{Catalog, FeatureMatrix};
use serde::Deserialize;

pub fn matrix(names: &[&str], rows: &[Vec<f64>]) -> FeatureMatrix {
    let defs = names
        .iter()
        .map(|n| FeatureDef {
            name: n.to_string(),
            family: Family::Social,
            kind: Kind::Numeric,
        })
        .collect();
    let rows = rows
        .iter()
        .enumerate()
        .map(|(i, r)| (format!("r{i:03}"), r.iter().map(|&v| Some(v)).collect()))
        .collect();
    FeatureMatrix::from_rows(Catalog::new(defs).unwrap(), rows).unwrap()
}

pub fn hp(n_trees: usize, max_depth: usize, learning_rate: f64) -> Hyperparameters {
    Hyperparameters {
        n_trees,
        max_depth,
        learning_rate,
        min_samples_leaf: 1,
        subsample: 1.0,
        max_bins: 255,
    }
}

/// Largest deviation from the two-row example: x = {0, 1}, y = {0, 1}, one
/// depth-1 round at learning rate 1 gives initial score 0, leaves -2 and +2.
///
/// Each row enters twice: the trainer wants two rows per class, and equal
/// weights leave every Newton quantity unchanged.
pub fn two_row_error() -> f64 {
    let m = matrix(&["x"], &[vec![0.0], vec![1.0]]);
    let positive = [false, true];
    let data = TrainData {
        matrix: &m,
        positive: &positive,
        rows: &[0, 0, 1, 1],
    };
    let (model, _) = train_with(data, &hp(1, 1, 1.0), 0, None).unwrap();
    let tree = &model.trees[0];
    [
        model.initial_score.abs(),
        (tree.predict(m.row(0)) + 2.0).abs(),
        (tree.predict(m.row(1)) - 2.0).abs(),
        (model.predict(m.row(0)) - sigmoid(-2.0)).abs(),
        (model.predict(m.row(1)) - sigmoid(2.0)).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

#[derive(Deserialize)]
struct Fixture {
    x: Vec<Vec<f64>>,
    y: Vec<u8>,
    learning_rate: f64,
    max_depth: usize,
    initial_score: f64,
    initial_deviance: f64,
    rounds: Vec<Round>,
}

#[derive(Deserialize)]
struct Round {
    probabilities: Vec<f64>,
    deviance: f64,
}

/// Largest deviation, over rounds 1 to 3, from the frozen eight-row fixture
/// (probabilities, deviance and initial score).
pub fn eight_row_error() -> f64 {
    let fx: Fixture = serde_json::from_str(include_str!("../fixtures/gbm_newton.json")).expect("fixture parses");
    let m = matrix(&["x1", "x2"], &fx.x);
    let positive: Vec<bool> = fx.y.iter().map(|&y| y == 1).collect();
    let rows: Vec<usize> = (0..fx.y.len()).collect();
    let mut worst: f64 = 0.0;
    for (k, round) in fx.rounds.iter().enumerate() {
        let data = TrainData {
            matrix: &m,
            positive: &positive,
            rows: &rows,
        };
        let (model, trace) = train_with(data, &hp(k + 1, fx.max_depth, fx.learning_rate), 0, None).unwrap();
        worst = worst
            .max((model.initial_score - fx.initial_score).abs())
            .max((trace.deviance[0] - fx.initial_deviance).abs())
            .max((trace.deviance[k + 1] - round.deviance).abs());
        for (r, want) in round.probabilities.iter().enumerate() {
            worst = worst.max((model.predict(m.row(r)) - want).abs());
        }
    }
    worst
}
