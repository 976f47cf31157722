//! k-nearest-neighbor inverse distance weighting onto a regular grid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kdtree::KdTree;
use crate::error::{Error, Result};
use crate::geo::{haversine_km, LonLat};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lon_min: f64,
    pub lat_min: f64,
    pub lon_max: f64,
    pub lat_max: f64,
    /// Cell edge in degrees.
    pub cell_deg: f64,
    pub power: f64,
    /// Neighbors per cell.
    pub k: usize,
    /// Cells closer than this to a sample take its value exactly.
    pub epsilon_km: f64,
    /// Samples farther than this are ignored.
    pub max_distance_km: Option<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            lon_min: 0.0,
            lat_min: 0.0,
            lon_max: 1.0,
            lat_max: 1.0,
            cell_deg: 0.005,
            power: 2.0,
            k: 8,
            epsilon_km: 0.001,
            max_distance_km: None,
        }
    }
}

impl GridSpec {
    /// Box around `points` padded by one cell on every side.
    pub fn covering(points: &[LonLat], cell_deg: f64) -> Result<GridSpec> {
        if points.is_empty() {
            return Err(Error::InvalidInput("no points to cover".into()));
        }
        let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
        for p in points {
            x0 = x0.min(p.lon);
            y0 = y0.min(p.lat);
            x1 = x1.max(p.lon);
            y1 = y1.max(p.lat);
        }
        let spec = GridSpec {
            lon_min: x0 - cell_deg,
            lat_min: y0 - cell_deg,
            lon_max: x1 + cell_deg,
            lat_max: y1 + cell_deg,
            cell_deg,
            ..GridSpec::default()
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lon_min < self.lon_max && self.lat_min < self.lat_max) {
            return Err(Error::Config("grid bounding box is degenerate".into()));
        }
        if !(self.cell_deg > 0.0 && self.cell_deg.is_finite()) {
            return Err(Error::Config("grid cell size must be positive".into()));
        }
        if !(self.power > 0.0 && self.power.is_finite()) {
            return Err(Error::Config("IDW power must be positive".into()));
        }
        if self.k == 0 {
            return Err(Error::Config("IDW neighbor count must be at least 1".into()));
        }
        if !(self.epsilon_km >= 0.0) {
            return Err(Error::Config("IDW exactness radius must be non-negative".into()));
        }
        if self.max_distance_km.is_some_and(|d| !(d > 0.0)) {
            return Err(Error::Config("IDW max distance must be positive".into()));
        }
        Ok(())
    }

    pub fn n_cols(&self) -> usize {
        (((self.lon_max - self.lon_min) / self.cell_deg).ceil() as usize).max(1)
    }

    pub fn n_rows(&self) -> usize {
        (((self.lat_max - self.lat_min) / self.cell_deg).ceil() as usize).max(1)
    }

    /// Center of cell `(col, row)`; row 0 is the southern edge.
    pub fn center(&self, col: usize, row: usize) -> LonLat {
        LonLat::new(
            self.lon_min + (col as f64 + 0.5) * self.cell_deg,
            self.lat_min + (row as f64 + 0.5) * self.cell_deg,
        )
    }
}

/// Interpolated grid, row-major from the south-west corner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Surface {
    pub spec: GridSpec,
    pub n_cols: usize,
    pub n_rows: usize,
    /// `None` marks a no-data cell.
    pub values: Vec<Option<f64>>,
}

impl Surface {
    pub fn get(&self, col: usize, row: usize) -> Option<f64> {
        self.values[row * self.n_cols + col]
    }

    pub fn valid_cells(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }
}

/// Spatial index over the samples of one interpolation.
pub struct Interpolator<'a> {
    samples: &'a [(LonLat, f64)],
    tree: KdTree,
    spec: &'a GridSpec,
}

impl<'a> Interpolator<'a> {
    pub fn new(samples: &'a [(LonLat, f64)], spec: &'a GridSpec) -> Result<Self> {
        spec.validate()?;
        if let Some((_, v)) = samples.iter().find(|s| !s.1.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite sample value {v}")));
        }
        let pts: Vec<LonLat> = samples.iter().map(|s| s.0).collect();
        Ok(Interpolator {
            samples,
            tree: KdTree::new(&pts),
            spec,
        })
    }

    /// Normalized weights `(sample index, weight)` for a query; empty when no
    /// sample is in range. A sample within the exactness radius gets weight 1.
    pub fn weights(&self, q: LonLat) -> Vec<(usize, f64)> {
        let mut near: Vec<(usize, f64)> = self
            .tree
            .nearest(q, self.spec.k)
            .into_iter()
            .map(|(i, _)| (i, haversine_km(q, self.samples[i].0)))
            .filter(|&(_, d)| self.spec.max_distance_km.is_none_or(|m| d <= m))
            .collect();
        if near.is_empty() {
            return near;
        }
        near.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        if near[0].1 < self.spec.epsilon_km || near[0].1 == 0.0 {
            return vec![(near[0].0, 1.0)];
        }
        let raw: Vec<f64> = near.iter().map(|&(_, d)| d.powf(-self.spec.power)).collect();
        let total: f64 = raw.iter().sum();
        near.iter().zip(raw).map(|(&(i, _), w)| (i, w / total)).collect()
    }

    pub fn value(&self, q: LonLat) -> Option<f64> {
        let w = self.weights(q);
        if w.is_empty() {
            return None;
        }
        let (mut lo, mut hi, mut acc) = (f64::MAX, f64::MIN, 0.0);
        for &(i, wi) in &w {
            let v = self.samples[i].1;
            lo = lo.min(v);
            hi = hi.max(v);
            acc += wi * v;
        }
        // Rounding can push a convex combination a hair outside its inputs.
        Some(acc.clamp(lo, hi))
    }
}

/// Normalized IDW weights for one query point.
pub fn idw_weights(samples: &[(LonLat, f64)], spec: &GridSpec, q: LonLat) -> Result<Vec<(usize, f64)>> {
    Ok(Interpolator::new(samples, spec)?.weights(q))
}

/// Interpolates `samples` (position, value) onto every cell of `spec`.
pub fn idw_interpolate(samples: &[(LonLat, f64)], spec: &GridSpec) -> Result<Surface> {
    if samples.is_empty() {
        return Err(Error::InvalidInput("IDW needs at least one sample".into()));
    }
    let interp = Interpolator::new(samples, spec)?;
    let (n_cols, n_rows) = (spec.n_cols(), spec.n_rows());
    let values = (0..n_cols * n_rows)
        .into_par_iter()
        .map(|c| interp.value(spec.center(c % n_cols, c / n_cols)))
        .collect();
    Ok(Surface {
        spec: spec.clone(),
        n_cols,
        n_rows,
        values,
    })
}
