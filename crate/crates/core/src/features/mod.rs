//! Per-subscriber financial, mobility and social features.

mod accumulator;
mod catalog;
mod density;
mod financial;
mod matrix;
mod mobility;
mod partial;
mod social;
pub mod stats;

use std::collections::BTreeMap;

pub use accumulator::{Activity, ActivityBuilder, Calendar};
pub use catalog::{Catalog, Family, FeatureDef, Kind};
pub use density::{feature_density, ClassDensity};
pub use financial::financial_features;
pub use matrix::{assemble_matrix, read_catalog, FeatureMatrix};
pub use mobility::{home_tower, mobility_features, radius_of_gyration};
pub use partial::{FeatureValue, PartialFeatures};
pub use social::social_features;

use rayon::prelude::*;

use crate::error::Result;
use crate::ingest::{HandsetRecord, TowerTable};

/// All three families for one subscriber.
pub fn subscriber_features(
    act: &Activity,
    handset: Option<&HandsetRecord>,
    cal: &Calendar,
    towers: &TowerTable,
) -> PartialFeatures {
    let mut p = financial_features(act, handset, cal);
    p.extend(mobility_features(act, towers));
    p.extend(social_features(act));
    p
}

/// Feature matrix plus each row's home tower id (absent without events).
#[derive(Debug, Clone)]
pub struct Featurized {
    pub matrix: FeatureMatrix,
    pub home_towers: Vec<Option<String>>,
}

/// Computes features for every subscriber in `activities`, in parallel.
pub fn featurize(
    activities: &BTreeMap<String, Activity>,
    handsets: &BTreeMap<String, HandsetRecord>,
    cal: &Calendar,
    towers: &TowerTable,
    catalog: &Catalog,
) -> Result<Featurized> {
    let entries: Vec<(&String, &Activity)> = activities.iter().collect();
    let partials: Vec<(String, PartialFeatures, Option<String>)> = entries
        .par_iter()
        .map(|(id, act)| {
            let p = subscriber_features(act, handsets.get(*id), cal, towers);
            let home = home_tower(act).map(|t| towers.get(t).tower_id.clone());
            ((*id).clone(), p, home)
        })
        .collect();
    // `activities` is sorted, so the assembled row order matches.
    let home_towers = partials.iter().map(|p| p.2.clone()).collect();
    let matrix = assemble_matrix(partials.into_iter().map(|(id, p, _)| (id, p)).collect(), catalog)?;
    Ok(Featurized { matrix, home_towers })
}
