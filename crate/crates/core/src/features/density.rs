use serde::Serialize;

use super::matrix::FeatureMatrix;
use crate::error::{Error, Result};

/// Two class-conditional histograms over one shared bin grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassDensity {
    pub feature: String,
    pub log_transformed: bool,
    /// `n_bins + 1` edges; the last bin is closed on the right.
    pub edges: Vec<f64>,
    /// Per-bin mass for the illiterate class; sums to 1 when non-empty.
    pub illiterate: Vec<f64>,
    pub literate: Vec<f64>,
    pub n_illiterate: usize,
    pub n_literate: usize,
    /// Present values dropped because the log transform was undefined.
    pub dropped_non_positive: usize,
}

impl ClassDensity {
    pub fn mean_bin(mass: &[f64]) -> f64 {
        mass.iter().enumerate().map(|(i, m)| i as f64 * m).sum()
    }
}

/// Normalized per-class histograms of one feature. `illiterate[r]` flags the
/// positive class for matrix row `r`. With `log`, non-positive values are
/// dropped and the rest mapped through `ln`.
pub fn feature_density(
    m: &FeatureMatrix,
    illiterate: &[bool],
    feature: &str,
    n_bins: usize,
    log: bool,
) -> Result<ClassDensity> {
    if n_bins < 2 {
        return Err(Error::InvalidInput("n_bins must be at least 2".into()));
    }
    let col = m
        .catalog()
        .index_of(feature)
        .ok_or_else(|| Error::InvalidInput(format!("unknown feature `{feature}`")))?;
    let mut dropped = 0;
    let mut vals: Vec<(f64, bool)> = Vec::new();
    for (r, v) in m.column(col).enumerate() {
        let Some(v) = v else { continue };
        if log {
            if v <= 0.0 {
                dropped += 1;
                continue;
            }
            vals.push((v.ln(), illiterate[r]));
        } else {
            vals.push((v, illiterate[r]));
        }
    }
    if vals.is_empty() {
        return Err(Error::InvalidInput(format!("feature `{feature}` has no usable values")));
    }
    let lo = vals.iter().map(|v| v.0).fold(f64::INFINITY, f64::min);
    let hi = vals.iter().map(|v| v.0).fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) };
    let width = (hi - lo) / n_bins as f64;
    let edges: Vec<f64> = (0..=n_bins)
        .map(|i| if i == n_bins { hi } else { lo + i as f64 * width })
        .collect();
    let mut counts = [vec![0usize; n_bins], vec![0usize; n_bins]];
    for &(v, ill) in &vals {
        let b = (((v - lo) / width) as usize).min(n_bins - 1);
        counts[usize::from(!ill)][b] += 1;
    }
    let norm = |c: &[usize]| {
        let t: usize = c.iter().sum();
        c.iter()
            .map(|&x| if t == 0 { 0.0 } else { x as f64 / t as f64 })
            .collect::<Vec<_>>()
    };
    Ok(ClassDensity {
        feature: feature.to_string(),
        log_transformed: log,
        edges,
        illiterate: norm(&counts[0]),
        literate: norm(&counts[1]),
        n_illiterate: counts[0].iter().sum(),
        n_literate: counts[1].iter().sum(),
        dropped_non_positive: dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{Catalog, Family, FeatureDef, Kind};

    fn one_column(vals: &[f64]) -> FeatureMatrix {
        let cat = Catalog::new(vec![FeatureDef {
            name: "x".into(),
            family: Family::Social,
            kind: Kind::Numeric,
        }])
        .unwrap();
        FeatureMatrix::from_rows(
            cat,
            vals.iter()
                .enumerate()
                .map(|(i, &v)| (format!("s{i:03}"), vec![Some(v)]))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn constant_feature_occupies_one_bin() {
        let m = one_column(&[3.0; 6]);
        let d = feature_density(&m, &[true, false, true, false, false, false], "x", 5, false).unwrap();
        assert_eq!(d.illiterate.iter().filter(|&&p| p > 0.0).count(), 1);
        assert_eq!(d.illiterate.iter().sum::<f64>(), 1.0);
        assert_eq!(d.literate.iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn binary_feature_two_bins_gives_class_frequencies() {
        let m = one_column(&[0.0, 1.0, 1.0, 0.0, 0.0, 1.0]);
        let ill = [true, true, true, false, false, false];
        let d = feature_density(&m, &ill, "x", 2, false).unwrap();
        assert_eq!(d.illiterate, vec![1.0 / 3.0, 2.0 / 3.0]);
        assert_eq!(d.literate, vec![2.0 / 3.0, 1.0 / 3.0]);
    }

    #[test]
    fn log_drops_non_positive() {
        let m = one_column(&[0.0, 1.0, std::f64::consts::E]);
        let d = feature_density(&m, &[true, false, false], "x", 2, true).unwrap();
        assert_eq!(d.dropped_non_positive, 1);
        assert_eq!(d.edges, vec![0.0, 0.5, 1.0]);
        assert_eq!(d.n_illiterate, 0);
        assert_eq!(d.illiterate, vec![0.0, 0.0]);
    }

    #[test]
    fn errors() {
        let m = one_column(&[1.0]);
        assert!(feature_density(&m, &[true], "x", 1, false).is_err());
        assert!(feature_density(&m, &[true], "y", 4, false).is_err());
        assert!(feature_density(&one_column(&[-1.0]), &[true], "x", 4, true).is_err());
    }
}
