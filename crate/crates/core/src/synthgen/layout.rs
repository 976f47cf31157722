//! Tower layout: disc-shaped zones scattered over a lon/lat box.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::PopulationConfig;
use crate::geo::{haversine_km, LonLat};
use crate::ingest::Tower;
use crate::seed::rng_for;

const KM_PER_DEG_LAT: f64 = 111.195;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Zone {
    pub index: usize,
    pub center: LonLat,
    pub radius_km: f64,
    pub weight: f64,
    /// Indices into [`Layout::towers`].
    pub towers: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    /// Sorted by id.
    pub towers: Vec<Tower>,
    pub tower_zone: Vec<usize>,
    pub zones: Vec<Zone>,
}

impl Layout {
    /// Zones whose weight exceeds the mean weight.
    pub fn high_zones(&self) -> Vec<usize> {
        let mean = self.zones.iter().map(|z| z.weight).sum::<f64>() / self.zones.len() as f64;
        self.zones.iter().filter(|z| z.weight > mean).map(|z| z.index).collect()
    }

    pub fn position(&self, tower: usize) -> LonLat {
        let t = &self.towers[tower];
        LonLat::new(t.longitude, t.latitude)
    }

    /// `k` towers nearest to `tower` (itself first), ties by index.
    pub fn nearest(&self, tower: usize, k: usize) -> Vec<usize> {
        let p = self.position(tower);
        let mut d: Vec<(f64, usize)> = (0..self.towers.len())
            .map(|i| (haversine_km(p, self.position(i)), i))
            .collect();
        d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut out = vec![tower];
        out.extend(
            d.into_iter()
                .map(|x| x.1)
                .filter(|&i| i != tower)
                .take(k.saturating_sub(1)),
        );
        out
    }
}

fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

/// Districts tile the box in a `g x g` grid, independent of the zones.
fn district_of(c: &PopulationConfig, lon: f64, lat: f64) -> String {
    let g = c.district_grid as f64;
    let col = (((lon - c.lon_min) / (c.lon_max - c.lon_min)) * g)
        .floor()
        .clamp(0.0, g - 1.0) as usize;
    let row = (((lat - c.lat_min) / (c.lat_max - c.lat_min)) * g)
        .floor()
        .clamp(0.0, g - 1.0) as usize;
    format!("D{}", row * c.district_grid + col + 1)
}

pub fn build_layout(c: &PopulationConfig) -> Layout {
    let mut rng = rng_for(c.seed, "layout");
    let lat0 = 0.5 * (c.lat_min + c.lat_max);
    let km_per_deg_lon = KM_PER_DEG_LAT * lat0.to_radians().cos();
    let width = (c.lon_max - c.lon_min) * km_per_deg_lon;
    let height = (c.lat_max - c.lat_min) * KM_PER_DEG_LAT;
    let r = c.zone_radius_km.min(0.5 * width).min(0.5 * height);

    // Zone centers in planar km, kept apart by rejection with a shrinking gap.
    let mut centers: Vec<(f64, f64)> = Vec::new();
    let mut gap = 2.5 * r;
    while centers.len() < c.n_zones {
        let mut placed = false;
        for _ in 0..2000 {
            let x = rng.random_range(r..=width - r);
            let y = rng.random_range(r..=height - r);
            if centers
                .iter()
                .all(|&(a, b)| ((a - x).powi(2) + (b - y).powi(2)).sqrt() >= gap)
            {
                centers.push((x, y));
                placed = true;
                break;
            }
        }
        if !placed {
            gap *= 0.9;
        }
    }

    let weights = c.zone_weights();
    let mut raw: Vec<(f64, f64, usize)> = Vec::with_capacity(c.n_towers);
    for t in 0..c.n_towers {
        let z = t % c.n_zones;
        let (cx, cy) = centers[z];
        let rho = r * rng.random::<f64>().sqrt();
        let theta = rng.random_range(0.0..std::f64::consts::TAU);
        let lon = c.lon_min + (cx + rho * theta.cos()) / km_per_deg_lon;
        let lat = c.lat_min + (cy + rho * theta.sin()) / KM_PER_DEG_LAT;
        raw.push((round6(lon), round6(lat), z));
    }

    let width_digits = c.n_towers.to_string().len().max(3);
    let towers: Vec<Tower> = raw
        .iter()
        .enumerate()
        .map(|(i, &(lon, lat, _))| Tower {
            tower_id: format!("T{:0w$}", i + 1, w = width_digits),
            longitude: lon,
            latitude: lat,
            district: district_of(c, lon, lat),
        })
        .collect();
    let tower_zone: Vec<usize> = raw.iter().map(|r| r.2).collect();
    let zones = centers
        .iter()
        .enumerate()
        .map(|(z, &(cx, cy))| Zone {
            index: z,
            center: LonLat::new(
                round6(c.lon_min + cx / km_per_deg_lon),
                round6(c.lat_min + cy / KM_PER_DEG_LAT),
            ),
            radius_km: r,
            weight: weights[z],
            towers: (0..c.n_towers).filter(|&t| tower_zone[t] == z).collect(),
        })
        .collect();
    Layout {
        towers,
        tower_zone,
        zones,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn towers_stay_in_their_discs() {
        let c = PopulationConfig::default();
        let l = build_layout(&c);
        assert_eq!(l.towers.len(), 200);
        for (t, &z) in l.tower_zone.iter().enumerate() {
            let d = haversine_km(l.position(t), l.zones[z].center);
            assert!(d <= l.zones[z].radius_km * 1.01 + 0.001, "{d}");
        }
        let ids: Vec<&str> = l.towers.iter().map(|t| t.tower_id.as_str()).collect();
        let mut sorted = ids.clone();
        sorted.sort();
        assert_eq!(ids, sorted);
        assert_eq!(l.high_zones(), vec![0, 1, 2]);
    }
}
