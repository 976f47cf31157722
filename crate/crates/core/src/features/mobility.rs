use std::collections::BTreeMap;

use super::accumulator::Activity;
use super::partial::{FeatureValue, PartialFeatures};
use super::stats::entropy;
use crate::geo::{haversine_km, weighted_centroid};
use crate::ingest::TowerTable;

const MOBILITY: &[&str] = &[
    "home_longitude",
    "home_latitude",
    "home_district",
    "home_share",
    "places_visited",
    "places_entropy",
    "radius_of_gyration_km",
    "districts_visited",
];

/// Modal tower; ties go to the lexicographically smallest tower id.
pub fn home_tower(act: &Activity) -> Option<usize> {
    let mut best: Option<(usize, u64)> = None;
    // Ascending index order is ascending tower-id order.
    for (&t, &n) in &act.towers {
        if best.is_none_or(|(_, m)| n > m) {
            best = Some((t, n));
        }
    }
    best.map(|(t, _)| t)
}

/// Radius of gyration in km around the visit-weighted spherical centroid.
pub fn radius_of_gyration(visits: &BTreeMap<usize, u64>, towers: &TowerTable) -> Option<f64> {
    let total: u64 = visits.values().sum();
    if total == 0 {
        return None;
    }
    if visits.len() == 1 {
        return Some(0.0);
    }
    let c = weighted_centroid(visits.iter().map(|(&t, &n)| (towers.position(t), n as f64)))?;
    let ss: f64 = visits
        .iter()
        .map(|(&t, &n)| {
            let d = haversine_km(towers.position(t), c);
            n as f64 * d * d
        })
        .sum();
    Some((ss / total as f64).sqrt())
}

pub fn mobility_features(act: &Activity, towers: &TowerTable) -> PartialFeatures {
    let mut out = PartialFeatures::default();
    let Some(home) = home_tower(act) else {
        for name in MOBILITY {
            out.push(name, FeatureValue::Missing);
        }
        return out;
    };
    let total: u64 = act.towers.values().sum();
    let home_t = towers.get(home);
    out.num("home_longitude", home_t.longitude);
    out.num("home_latitude", home_t.latitude);
    out.push("home_district", FeatureValue::Category(home_t.district.clone()));
    out.num("home_share", act.towers[&home] as f64 / total as f64);
    out.num("places_visited", act.towers.len() as f64);
    out.opt("places_entropy", entropy(act.towers.values().copied()));
    out.opt("radius_of_gyration_km", radius_of_gyration(&act.towers, towers));
    let mut districts: Vec<&str> = act.towers.keys().map(|&t| towers.get(t).district.as_str()).collect();
    districts.sort_unstable();
    districts.dedup();
    out.num("districts_visited", districts.len() as f64);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::accumulator::Calendar;
    use crate::geo::EARTH_RADIUS_KM;
    use crate::ingest::{ObservationWindow, Tower};
    use chrono::NaiveDate;

    fn table(points: &[(&str, f64, f64)]) -> TowerTable {
        TowerTable::new(
            points
                .iter()
                .map(|&(id, lon, lat)| Tower {
                    tower_id: id.into(),
                    longitude: lon,
                    latitude: lat,
                    district: format!("D{}", id),
                })
                .collect(),
        )
        .unwrap()
    }

    fn activity(visits: &[(usize, u64)]) -> Activity {
        let cal = Calendar::new(ObservationWindow::new(NaiveDate::from_ymd_opt(2016, 1, 4).unwrap(), 7));
        let mut a = Activity::new(&cal);
        a.towers = visits.iter().copied().collect();
        a.events = visits.iter().map(|v| v.1).sum();
        a
    }

    #[test]
    fn single_tower_is_degenerate() {
        let t = table(&[("T1", 90.4, 23.7)]);
        let f = mobility_features(&activity(&[(0, 9)]), &t);
        assert_eq!(f.value("radius_of_gyration_km"), Some(0.0));
        assert_eq!(f.value("places_entropy"), Some(0.0));
        assert_eq!(f.value("places_visited"), Some(1.0));
        assert_eq!(f.value("home_share"), Some(1.0));
    }

    #[test]
    fn two_towers_two_km_apart_on_a_meridian() {
        // 2 km of arc expressed in degrees of latitude.
        let dlat = (2.0 / EARTH_RADIUS_KM).to_degrees();
        let t = table(&[("T1", 90.4, 23.7), ("T2", 90.4, 23.7 + dlat)]);
        let f = mobility_features(&activity(&[(0, 2), (1, 2)]), &t);
        let rg = f.value("radius_of_gyration_km").unwrap();
        assert!((rg - 1.0).abs() < 1e-6, "{rg}");
    }

    #[test]
    fn visit_entropy_1_1_2() {
        let t = table(&[("T1", 90.4, 23.7), ("T2", 90.41, 23.7), ("T3", 90.42, 23.7)]);
        let f = mobility_features(&activity(&[(0, 1), (1, 1), (2, 2)]), &t);
        assert!((f.value("places_entropy").unwrap() - 1.0397).abs() < 5e-5);
        assert_eq!(f.value("home_longitude"), Some(90.42));
        assert_eq!(f.value("districts_visited"), Some(3.0));
    }

    #[test]
    fn home_tie_goes_to_smallest_id() {
        let t = table(&[("T2", 1.0, 1.0), ("T10", 2.0, 2.0)]);
        // Index 0 is "T10", the lexicographically smaller id.
        assert_eq!(home_tower(&activity(&[(0, 3), (1, 3)])), Some(0));
        assert_eq!(t.get(0).tower_id, "T10");
    }

    #[test]
    fn no_events_masks_everything() {
        let t = table(&[("T1", 90.4, 23.7)]);
        let f = mobility_features(&activity(&[]), &t);
        for name in MOBILITY {
            assert_eq!(f.get(name), Some(&FeatureValue::Missing));
        }
    }
}
