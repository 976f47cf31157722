use serde::{Deserialize, Serialize};

use super::gbm::GbmModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScore {
    pub index: usize,
    pub name: String,
    pub score: f64,
}

/// Residual-SSE reduction summed per feature over every split of every tree,
/// scaled so the top feature scores 100. Sorted by score, ties by catalog
/// index. A model without splits scores every feature 0.
pub fn split_gain_importance(model: &GbmModel) -> Vec<FeatureScore> {
    let mut total = vec![0.0; model.feature_names.len()];
    for t in &model.trees {
        for (f, g) in t.splits() {
            total[f] += g;
        }
    }
    let max = total.iter().copied().fold(0.0, f64::max);
    let mut out: Vec<FeatureScore> = total
        .iter()
        .enumerate()
        .map(|(i, &g)| FeatureScore {
            index: i,
            name: model.feature_names[i].clone(),
            score: if max > 0.0 { 100.0 * g / max } else { 0.0 },
        })
        .collect();
    out.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.index.cmp(&b.index)));
    out
}

/// 1-based rank of `name` in a ranked list.
pub fn rank_of(ranked: &[FeatureScore], name: &str) -> Option<usize> {
    ranked.iter().position(|s| s.name == name).map(|p| p + 1)
}
