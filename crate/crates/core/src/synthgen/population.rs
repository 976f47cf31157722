//! Labels, handsets and home towers.

use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::seq::index::sample;
use rand::Rng;

use super::config::PopulationConfig;
use super::layout::Layout;
use crate::ingest::{DeviceClass, HandsetRecord, LiteracyLabel};
use crate::seed::rng_for;

const SMART: [(&str, &str); 5] = [
    ("Samsung", "Galaxy"),
    ("Xiaomi", "Redmi"),
    ("Symphony", "Roar"),
    ("Walton", "Primo"),
    ("Huawei", "Y"),
];
const FEATURE: [(&str, &str); 4] = [
    ("Nokia", "Asha"),
    ("Symphony", "B"),
    ("Walton", "Olvio"),
    ("Itel", "it"),
];
const BASIC: [(&str, &str); 4] = [("Nokia", "1000"), ("Symphony", "D"), ("Itel", "Basic"), ("Walton", "L")];

#[derive(Debug, Clone, PartialEq)]
pub struct Subscriber {
    pub id: String,
    pub illiterate: bool,
    /// Index into the layout's towers.
    pub home: usize,
    pub handset: HandsetRecord,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    /// Sorted by id.
    pub subscribers: Vec<Subscriber>,
}

impl Population {
    pub fn labels(&self) -> Vec<LiteracyLabel> {
        self.subscribers
            .iter()
            .map(|s| LiteracyLabel {
                subscriber_id: s.id.clone(),
                literate: !s.illiterate,
            })
            .collect()
    }

    pub fn handsets(&self) -> Vec<HandsetRecord> {
        self.subscribers.iter().map(|s| s.handset.clone()).collect()
    }

    pub fn n_illiterate(&self) -> usize {
        self.subscribers.iter().filter(|s| s.illiterate).count()
    }
}

pub fn generate_population(c: &PopulationConfig, layout: &Layout) -> Population {
    let mut rng = rng_for(c.seed, "population");
    let n = c.n_subscribers;
    let mut illiterate = vec![false; n];
    for i in sample(&mut rng, n, c.n_illiterate()).into_iter() {
        illiterate[i] = true;
    }
    let zone_pick = WeightedIndex::new(layout.zones.iter().map(|z| z.weight)).expect("positive weights");
    let width = n.to_string().len().max(5);

    let subscribers = (0..n)
        .map(|i| {
            let id = format!("s{:0w$}", i + 1, w = width);
            let ill = illiterate[i];
            let home = if ill {
                let z = &layout.zones[zone_pick.sample(&mut rng)];
                z.towers[rng.random_range(0..z.towers.len())]
            } else {
                rng.random_range(0..layout.towers.len())
            };
            let p = c.profile(ill);
            let class = WeightedIndex::new([p.p_basic, p.p_feature, p.p_smart])
                .expect("validated device weights")
                .sample(&mut rng);
            let (device_class, models, camera_p) = match class {
                0 => (DeviceClass::Basic, &BASIC[..], 0.15),
                1 => (DeviceClass::Feature, &FEATURE[..], 0.7),
                _ => (DeviceClass::Smart, &SMART[..], 1.0),
            };
            let (maker, brand) = models[rng.random_range(0..models.len())];
            let handset = HandsetRecord {
                subscriber_id: id.clone(),
                manufacturer: maker.to_string(),
                brand: brand.to_string(),
                camera_enabled: rng.random_bool(camera_p),
                device_class,
            };
            Subscriber {
                id,
                illiterate: ill,
                home,
                handset,
            }
        })
        .collect();
    Population { subscribers }
}
