//! Tower-level aggregation of predictions and labels, IDW surfaces and
//! their export.

mod aggregate;
mod compare;
mod export;
mod idw;
mod kdtree;

pub use aggregate::{aggregate_towers, TowerEstimate, DEFAULT_MIN_COUNT};
pub use compare::{compare_surfaces, high_rate_components, surface_quantile, SurfaceComparison};
pub use export::{export_surface, surface_geojson, SurfaceFormat};
pub use idw::{idw_interpolate, idw_weights, GridSpec, Interpolator, Surface};
pub use kdtree::{chord_to_km, KdTree};

use crate::error::{Error, Result};
use crate::geo::LonLat;

/// Predicted and actual surfaces on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfacePair {
    pub predicted: Surface,
    pub actual: Surface,
    pub comparison: SurfaceComparison,
}

/// Interpolates both rates of `estimates` with the same `spec`.
pub fn surface_pair(estimates: &[TowerEstimate], spec: &GridSpec) -> Result<SurfacePair> {
    let pick = |f: fn(&TowerEstimate) -> Option<f64>| -> Vec<(LonLat, f64)> {
        estimates
            .iter()
            .filter_map(|e| Some((LonLat::new(e.longitude, e.latitude), f(e)?)))
            .collect()
    };
    let pred = pick(|e| e.predicted_rate);
    let act = pick(|e| e.actual_rate);
    if pred.is_empty() || act.is_empty() {
        return Err(Error::Validation(
            "every tower is below the minimum subscriber count".into(),
        ));
    }
    let predicted = idw_interpolate(&pred, spec)?;
    let actual = idw_interpolate(&act, spec)?;
    let comparison = compare_surfaces(&predicted, &actual)?;
    Ok(SurfacePair {
        predicted,
        actual,
        comparison,
    })
}
