//! Rank-based discretization of feature columns for split finding.
//!
//! Bin boundaries depend only on the order of values (and the row weights),
//! never on their magnitudes, so any strictly increasing transform of a
//! column yields the same partitions.

use crate::features::{FeatureMatrix, Kind};

pub(crate) const MISSING: u8 = u8::MAX;

#[derive(Debug, Clone)]
pub(crate) enum BinEdges {
    /// Upper (inclusive) value of each bin, ascending.
    Numeric(Vec<f64>),
    /// Category code held by each bin; `overflow` marks a trailing shared bin
    /// for codes beyond the bin budget, which never enters a split set.
    Categorical { codes: Vec<u32>, overflow: bool },
}

#[derive(Debug, Clone)]
pub(crate) struct BinnedColumn {
    pub feature: usize,
    pub edges: BinEdges,
    /// One code per training row; [`MISSING`] for missing values.
    pub codes: Vec<u8>,
}

impl BinnedColumn {
    pub fn n_bins(&self) -> usize {
        match &self.edges {
            BinEdges::Numeric(u) => u.len(),
            BinEdges::Categorical { codes, overflow } => codes.len() + usize::from(*overflow),
        }
    }
}

/// Groups sorted `(value, weight)` pairs into at most `max_bins` bins of
/// roughly equal weight; returns each bin's upper value.
fn numeric_uppers(mut vals: Vec<(f64, f64)>, max_bins: usize) -> Vec<f64> {
    vals.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut distinct: Vec<(f64, f64)> = Vec::new();
    for (v, w) in vals {
        match distinct.last_mut() {
            Some(last) if last.0 == v => last.1 += w,
            _ => distinct.push((v, w)),
        }
    }
    if distinct.len() <= max_bins {
        return distinct.into_iter().map(|d| d.0).collect();
    }
    let total: f64 = distinct.iter().map(|d| d.1).sum();
    let step = total / max_bins as f64;
    let mut uppers = Vec::with_capacity(max_bins);
    let mut cum = 0.0;
    let last = distinct.len() - 1;
    for (i, (v, w)) in distinct.iter().enumerate() {
        cum += w;
        let target = step * (uppers.len() + 1) as f64;
        if i == last || (cum >= target && uppers.len() + 1 < max_bins) {
            uppers.push(*v);
        }
    }
    uppers
}

pub(crate) fn bin_column(
    m: &FeatureMatrix,
    feature: usize,
    rows: &[usize],
    weights: &[f64],
    max_bins: usize,
) -> BinnedColumn {
    let present: Vec<(f64, f64)> = rows
        .iter()
        .zip(weights)
        .filter_map(|(&r, &w)| m.get(r, feature).map(|v| (v, w)))
        .collect();
    match m.catalog().get(feature).kind {
        Kind::Numeric => {
            let uppers = numeric_uppers(present, max_bins);
            let codes = rows
                .iter()
                .map(|&r| match m.get(r, feature) {
                    None => MISSING,
                    Some(v) => uppers.partition_point(|&u| u < v) as u8,
                })
                .collect();
            BinnedColumn {
                feature,
                edges: BinEdges::Numeric(uppers),
                codes,
            }
        }
        Kind::Categorical => {
            let mut freq: Vec<(u32, f64)> = Vec::new();
            for (v, w) in present {
                let c = v as u32;
                match freq.iter_mut().find(|f| f.0 == c) {
                    Some(f) => f.1 += w,
                    None => freq.push((c, w)),
                }
            }
            let overflow = freq.len() > max_bins;
            if overflow {
                // Keep the most frequent codes, ties by code.
                freq.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
                freq.truncate(max_bins - 1);
            }
            let mut codes_kept: Vec<u32> = freq.into_iter().map(|f| f.0).collect();
            codes_kept.sort_unstable();
            let other = codes_kept.len() as u8;
            let codes = rows
                .iter()
                .map(|&r| match m.get(r, feature) {
                    None => MISSING,
                    Some(v) => match codes_kept.binary_search(&(v as u32)) {
                        Ok(i) => i as u8,
                        Err(_) => other,
                    },
                })
                .collect();
            BinnedColumn {
                feature,
                edges: BinEdges::Categorical {
                    codes: codes_kept,
                    overflow,
                },
                codes,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn few_distinct_values_get_one_bin_each() {
        let u = numeric_uppers(vec![(3.0, 1.0), (1.0, 1.0), (3.0, 1.0), (2.0, 1.0)], 8);
        assert_eq!(u, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn many_values_respect_the_budget() {
        let vals: Vec<(f64, f64)> = (0..1000).map(|i| (i as f64, 1.0)).collect();
        let u = numeric_uppers(vals, 10);
        assert_eq!(u.len(), 10);
        assert_eq!(*u.last().unwrap(), 999.0);
        assert!(u.windows(2).all(|w| w[0] < w[1]));
        // Equal-weight bins of 100 values.
        assert_eq!(u[0], 99.0);
    }
}
