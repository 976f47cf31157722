//! Per-tower predicted and actual illiteracy rates.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::TowerTable;

pub const DEFAULT_MIN_COUNT: usize = 5;

/// One tower's rates. A rate is `None` when fewer than `min_count`
/// subscribers back it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TowerEstimate {
    pub tower_id: String,
    pub longitude: f64,
    pub latitude: f64,
    /// Mean predicted probability over scored subscribers homed here.
    pub predicted_rate: Option<f64>,
    /// Fraction labeled illiterate among ground-truth subscribers homed here.
    pub actual_rate: Option<f64>,
    /// Scored subscribers homed here, before suppression.
    pub subscriber_count: usize,
    /// Ground-truth subscribers homed here, before suppression.
    pub labeled_count: usize,
}

/// Aggregates `predictions` (subscriber, probability) and `truth`
/// (subscriber, is illiterate) by home tower. Subscribers without a home
/// tower are skipped; a home tower missing from `towers` is an error.
/// Output is in tower-id order and lists every tower.
pub fn aggregate_towers(
    predictions: &[(String, f64)],
    truth: &[(String, bool)],
    home: &BTreeMap<String, String>,
    towers: &TowerTable,
    min_count: usize,
) -> Result<Vec<TowerEstimate>> {
    let mut pred: Vec<(f64, usize)> = vec![(0.0, 0); towers.len()];
    let mut act: Vec<(usize, usize)> = vec![(0, 0); towers.len()];
    let locate = |id: &str| -> Result<Option<usize>> {
        let Some(t) = home.get(id) else {
            return Ok(None);
        };
        towers
            .index_of(t)
            .map(Some)
            .ok_or_else(|| Error::Validation(format!("home tower {t} of {id} is not in the tower file")))
    };
    for (id, p) in predictions {
        if !(0.0..=1.0).contains(p) {
            return Err(Error::InvalidInput(format!(
                "probability {p} for {id} is outside [0, 1]"
            )));
        }
        if let Some(t) = locate(id)? {
            pred[t].0 += p;
            pred[t].1 += 1;
        }
    }
    for (id, ill) in truth {
        if let Some(t) = locate(id)? {
            act[t].0 += usize::from(*ill);
            act[t].1 += 1;
        }
    }
    let min_count = min_count.max(1);
    Ok(towers
        .iter()
        .enumerate()
        .map(|(i, t)| TowerEstimate {
            tower_id: t.tower_id.clone(),
            longitude: t.longitude,
            latitude: t.latitude,
            predicted_rate: (pred[i].1 >= min_count).then(|| (pred[i].0 / pred[i].1 as f64).clamp(0.0, 1.0)),
            actual_rate: (act[i].1 >= min_count).then(|| act[i].0 as f64 / act[i].1 as f64),
            subscriber_count: pred[i].1,
            labeled_count: act[i].1,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Tower;

    fn fixture() -> (TowerTable, BTreeMap<String, String>) {
        let towers = TowerTable::new(vec![
            Tower {
                tower_id: "A".into(),
                longitude: 0.0,
                latitude: 0.0,
                district: "d".into(),
            },
            Tower {
                tower_id: "B".into(),
                longitude: 1.0,
                latitude: 0.0,
                district: "d".into(),
            },
        ])
        .unwrap();
        let mut home = BTreeMap::new();
        for (s, t) in [("s1", "A"), ("s2", "A"), ("s3", "A"), ("s4", "B")] {
            home.insert(s.to_string(), t.to_string());
        }
        (towers, home)
    }

    #[test]
    fn mean_and_suppression() {
        let (towers, home) = fixture();
        let preds: Vec<(String, f64)> = [("s1", 0.2), ("s2", 0.4), ("s3", 0.6), ("s4", 0.9)]
            .iter()
            .map(|(s, p)| (s.to_string(), *p))
            .collect();
        let truth: Vec<(String, bool)> = ["s1", "s2", "s3"].iter().map(|s| (s.to_string(), false)).collect();
        let est = aggregate_towers(&preds, &truth, &home, &towers, 1).unwrap();
        assert!((est[0].predicted_rate.unwrap() - 0.4).abs() < 1e-15);
        assert_eq!(est[0].actual_rate, Some(0.0));
        assert_eq!(est[1].actual_rate, None);
        assert_eq!(est.iter().map(|e| e.subscriber_count).sum::<usize>(), 4);

        let est = aggregate_towers(&preds, &truth, &home, &towers, 5).unwrap();
        assert_eq!(est[0].predicted_rate, None);
        assert_eq!(est[0].subscriber_count, 3);
    }

    #[test]
    fn unknown_home_tower() {
        let (towers, mut home) = fixture();
        home.insert("s9".into(), "Z".into());
        let preds = vec![("s9".to_string(), 0.5)];
        assert!(aggregate_towers(&preds, &[], &home, &towers, 1).is_err());
    }
}
