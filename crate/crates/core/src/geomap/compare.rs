//! Predicted-versus-actual surface statistics and high-rate pockets.

use serde::{Deserialize, Serialize};

use super::idw::Surface;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceComparison {
    /// Cells with data on both surfaces.
    pub valid_cells: usize,
    pub mean_abs_error: Option<f64>,
    pub p90_abs_error: Option<f64>,
    /// Pearson correlation over valid cells; `None` when either side is
    /// constant or fewer than two cells are valid.
    pub correlation: Option<f64>,
}

/// Nearest-rank quantile of unsorted values.
fn quantile(values: &mut [f64], q: f64) -> f64 {
    values.sort_by(f64::total_cmp);
    let rank = ((q * values.len() as f64).ceil() as usize).clamp(1, values.len());
    values[rank - 1]
}

pub fn compare_surfaces(predicted: &Surface, actual: &Surface) -> Result<SurfaceComparison> {
    if predicted.spec != actual.spec || predicted.values.len() != actual.values.len() {
        return Err(Error::InvalidInput("surfaces are on different grids".into()));
    }
    let pairs: Vec<(f64, f64)> = predicted
        .values
        .iter()
        .zip(&actual.values)
        .filter_map(|(a, b)| Some(((*a)?, (*b)?)))
        .collect();
    let n = pairs.len();
    if n == 0 {
        return Ok(SurfaceComparison {
            valid_cells: 0,
            mean_abs_error: None,
            p90_abs_error: None,
            correlation: None,
        });
    }
    let mut err: Vec<f64> = pairs.iter().map(|(a, b)| (a - b).abs()).collect();
    let mae = err.iter().sum::<f64>() / n as f64;
    let p90 = quantile(&mut err, 0.9);
    let nf = n as f64;
    let (ma, mb) = (
        pairs.iter().map(|p| p.0).sum::<f64>() / nf,
        pairs.iter().map(|p| p.1).sum::<f64>() / nf,
    );
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (a, b) in &pairs {
        sab += (a - ma) * (b - mb);
        saa += (a - ma).powi(2);
        sbb += (b - mb).powi(2);
    }
    let correlation = (n >= 2 && saa > 0.0 && sbb > 0.0).then(|| (sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0));
    Ok(SurfaceComparison {
        valid_cells: n,
        mean_abs_error: Some(mae),
        p90_abs_error: Some(p90),
        correlation,
    })
}

/// The `q` quantile of a surface's valid cells.
pub fn surface_quantile(s: &Surface, q: f64) -> Option<f64> {
    let mut v: Vec<f64> = s.values.iter().flatten().copied().collect();
    (!v.is_empty()).then(|| quantile(&mut v, q))
}

/// 4-connected components of cells strictly above the `q` quantile, each a
/// list of `(col, row)` in scan order. Components are ordered by their first
/// cell.
pub fn high_rate_components(s: &Surface, q: f64) -> Vec<Vec<(usize, usize)>> {
    let Some(cut) = surface_quantile(s, q) else {
        return Vec::new();
    };
    let (w, h) = (s.n_cols, s.n_rows);
    let hot: Vec<bool> = s.values.iter().map(|v| v.is_some_and(|x| x > cut)).collect();
    let mut seen = vec![false; w * h];
    let mut out = Vec::new();
    for start in 0..w * h {
        if !hot[start] || seen[start] {
            continue;
        }
        let mut comp = Vec::new();
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(c) = stack.pop() {
            let (col, row) = (c % w, c / w);
            comp.push((col, row));
            let mut visit = |n: usize| {
                if hot[n] && !seen[n] {
                    seen[n] = true;
                    stack.push(n);
                }
            };
            if col > 0 {
                visit(c - 1);
            }
            if col + 1 < w {
                visit(c + 1);
            }
            if row > 0 {
                visit(c - w);
            }
            if row + 1 < h {
                visit(c + w);
            }
        }
        comp.sort_by_key(|&(c, r)| (r, c));
        out.push(comp);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geomap::GridSpec;

    fn surf(values: Vec<Option<f64>>, n_cols: usize) -> Surface {
        let n_rows = values.len() / n_cols;
        Surface {
            spec: GridSpec::default(),
            n_cols,
            n_rows,
            values,
        }
    }

    #[test]
    fn identical_surfaces() {
        let a = surf(vec![Some(0.1), Some(0.2), Some(0.5), None], 2);
        let c = compare_surfaces(&a, &a).unwrap();
        assert_eq!(c.mean_abs_error, Some(0.0));
        assert!((c.correlation.unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(c.valid_cells, 3);
    }

    #[test]
    fn constant_surface_has_no_correlation() {
        let a = surf(vec![Some(0.1), Some(0.2), Some(0.5), Some(0.3)], 2);
        let b = surf(vec![Some(0.2); 4], 2);
        assert_eq!(compare_surfaces(&a, &b).unwrap().correlation, None);
    }

    #[test]
    fn two_separate_pockets() {
        let mut v = vec![Some(0.0); 25];
        v[0] = Some(1.0);
        v[1] = Some(1.0);
        v[24] = Some(1.0);
        let comps = high_rate_components(&surf(v, 5), 0.8);
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0], vec![(0, 0), (1, 0)]);
        assert_eq!(comps[1], vec![(4, 4)]);
    }
}
