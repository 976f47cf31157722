//! Spherical geodesy shared by the mobility features and the IDW surfaces.

/// Mean Earth radius (WGS84 arithmetic mean), km.
pub const EARTH_RADIUS_KM: f64 = 6371.0088;

use serde::{Deserialize, Serialize};

/// A WGS84 position in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LonLat {
    pub lon: f64,
    pub lat: f64,
}

impl LonLat {
    pub const fn new(lon: f64, lat: f64) -> Self {
        LonLat { lon, lat }
    }

    /// Unit vector on the sphere.
    pub fn to_unit(self) -> [f64; 3] {
        let (lat, lon) = (self.lat.to_radians(), self.lon.to_radians());
        [lat.cos() * lon.cos(), lat.cos() * lon.sin(), lat.sin()]
    }

    /// Inverse of [`LonLat::to_unit`]; the input need not be normalized.
    pub fn from_vector(v: [f64; 3]) -> Self {
        let hyp = (v[0] * v[0] + v[1] * v[1]).sqrt();
        LonLat {
            lon: v[1].atan2(v[0]).to_degrees(),
            lat: v[2].atan2(hyp).to_degrees(),
        }
    }
}

/// Great-circle distance in km (haversine formula).
pub fn haversine_km(a: LonLat, b: LonLat) -> f64 {
    let (lat1, lat2) = (a.lat.to_radians(), b.lat.to_radians());
    let dlat = lat2 - lat1;
    let dlon = (b.lon - a.lon).to_radians();
    let h = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}

/// Weighted spherical centroid: the normalized mean of unit vectors.
///
/// Returns `None` when the weights are all zero or the mean vector vanishes
/// (antipodal configurations).
pub fn weighted_centroid<I>(points: I) -> Option<LonLat>
where
    I: IntoIterator<Item = (LonLat, f64)>,
{
    let mut acc = [0.0f64; 3];
    let mut total = 0.0;
    for (p, w) in points {
        let u = p.to_unit();
        for k in 0..3 {
            acc[k] += w * u[k];
        }
        total += w;
    }
    let norm = (acc[0] * acc[0] + acc[1] * acc[1] + acc[2] * acc[2]).sqrt();
    if total <= 0.0 || norm < 1e-15 {
        return None;
    }
    Some(LonLat::from_vector(acc))
}
