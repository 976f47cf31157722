//! Seeded synthetic populations whose phone usage depends on literacy.
//!
//! Illiterate subscribers receive fewer SMS, spread their communication over
//! fewer contacts, use less data, visit fewer towers and live mostly in the
//! high-weight zones. Everything is derived from one root seed; each
//! subscriber has its own stream so output does not depend on scheduling.

mod config;
mod events;
mod layout;
mod population;

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{BehaviorProfile, PopulationConfig};
pub use events::{generate_subscriber, SubscriberStream};
pub use layout::{build_layout, Layout, Zone};
pub use population::{generate_population, Population, Subscriber};

use crate::error::Result;
use crate::ingest::{CdrEvent, Channel, Direction, HandsetRecord, LiteracyLabel, RecordWriter, TopUpEvent, Tower};
use crate::provenance::{create_file, file_digest, write_file, Provenance};

pub const CDR_FILE: &str = "cdr.csv";
pub const TOPUPS_FILE: &str = "topups.csv";
pub const TOWERS_FILE: &str = "towers.csv";
pub const HANDSETS_FILE: &str = "handsets.csv";
pub const LABELS_FILE: &str = "labels.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Catalog features carrying the planted class differences.
pub const PLANTED_SIGNALS: [&str; 6] = [
    "home_longitude",
    "home_latitude",
    "sms_in_count",
    "contact_entropy",
    "internet_volume",
    "places_visited",
];

const CHUNK: usize = 256;

/// Class means measured on the generated streams.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ObservedProfile {
    pub subscribers: usize,
    pub sms_in_per_day: f64,
    pub sms_out_per_day: f64,
    pub voice_in_per_day: f64,
    pub voice_out_per_day: f64,
    pub data_events_per_day: f64,
    pub data_bytes_per_day: f64,
    pub contact_pool: f64,
    pub place_pool: f64,
    pub topups_per_subscriber: f64,
    pub topup_amount: f64,
}

#[derive(Default)]
struct Tally {
    n: usize,
    sms_in: u64,
    sms_out: u64,
    voice_in: u64,
    voice_out: u64,
    data: u64,
    bytes: u64,
    contacts: usize,
    places: usize,
    topups: usize,
    amount: f64,
}

impl Tally {
    fn add(&mut self, s: &SubscriberStream) {
        self.n += 1;
        for e in &s.events {
            match (e.channel, e.direction) {
                (Channel::Sms, Direction::In) => self.sms_in += 1,
                (Channel::Sms, Direction::Out) => self.sms_out += 1,
                (Channel::Voice, Direction::In) => self.voice_in += 1,
                (Channel::Voice, Direction::Out) => self.voice_out += 1,
                (Channel::Data, _) => {
                    self.data += 1;
                    self.bytes += e.volume_bytes.unwrap_or(0);
                }
                _ => {}
            }
        }
        self.contacts += s.contact_pool;
        self.places += s.place_pool;
        self.topups += s.topups.len();
        self.amount += s.topups.iter().map(|t| t.amount).sum::<f64>();
    }

    fn profile(&self, days: f64) -> ObservedProfile {
        let n = self.n.max(1) as f64;
        let per_day = |x: u64| x as f64 / n / days;
        ObservedProfile {
            subscribers: self.n,
            sms_in_per_day: per_day(self.sms_in),
            sms_out_per_day: per_day(self.sms_out),
            voice_in_per_day: per_day(self.voice_in),
            voice_out_per_day: per_day(self.voice_out),
            data_events_per_day: per_day(self.data),
            data_bytes_per_day: per_day(self.bytes),
            contact_pool: self.contacts as f64 / n,
            place_pool: self.places as f64 / n,
            topups_per_subscriber: self.topups as f64 / n,
            topup_amount: if self.topups == 0 {
                0.0
            } else {
                self.amount / self.topups as f64
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassProfile {
    pub configured: BehaviorProfile,
    pub observed: ObservedProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneSummary {
    pub index: usize,
    pub center_longitude: f64,
    pub center_latitude: f64,
    pub radius_km: f64,
    pub weight: f64,
    pub high_illiteracy: bool,
    pub towers: Vec<String>,
    pub illiterate_homes: usize,
    pub literate_homes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub provenance: Provenance,
    pub config: BTreeMap<String, String>,
    pub subscribers: usize,
    pub illiterate: usize,
    pub cdr_rows: u64,
    pub topup_rows: u64,
    pub profiles: BTreeMap<String, ClassProfile>,
    pub zones: Vec<ZoneSummary>,
    pub planted_signals: Vec<String>,
    /// sha256 of every data file written alongside the manifest.
    pub files: BTreeMap<String, String>,
}

impl Manifest {
    pub fn read(path: &Path) -> Result<Manifest> {
        let text = std::fs::read_to_string(path).map_err(|e| crate::error::Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

fn write_records<T: crate::ingest::CsvRecord>(
    path: &Path,
    comment: &str,
    rows: impl IntoIterator<Item = T>,
) -> Result<()> {
    let mut w = RecordWriter::<_, T>::new(create_file(path)?, Some(comment))?;
    for r in rows {
        w.write(&r)?;
    }
    w.finish()?;
    Ok(())
}

/// Generates the population and writes the five CSV files plus the manifest
/// into `dir`, which must exist.
pub fn write_bundle(c: &PopulationConfig, dir: &Path, provenance: &Provenance) -> Result<Manifest> {
    c.validate()?;
    let layout = build_layout(c);
    let pop = generate_population(c, &layout);
    let comment = provenance.comment_line();
    let comment = comment.as_str();

    write_records::<Tower>(&dir.join(TOWERS_FILE), comment, layout.towers.iter().cloned())?;
    write_records::<LiteracyLabel>(&dir.join(LABELS_FILE), comment, pop.labels())?;
    write_records::<HandsetRecord>(&dir.join(HANDSETS_FILE), comment, pop.handsets())?;

    let mut cdr = RecordWriter::<_, CdrEvent>::new(create_file(&dir.join(CDR_FILE))?, Some(comment))?;
    let mut top = RecordWriter::<_, TopUpEvent>::new(create_file(&dir.join(TOPUPS_FILE))?, Some(comment))?;
    let (mut ill, mut lit) = (Tally::default(), Tally::default());
    let (mut cdr_rows, mut topup_rows) = (0u64, 0u64);
    for chunk in pop.subscribers.chunks(CHUNK) {
        let streams: Vec<SubscriberStream> = chunk.par_iter().map(|s| generate_subscriber(c, &layout, s)).collect();
        for (s, st) in chunk.iter().zip(&streams) {
            if s.illiterate { &mut ill } else { &mut lit }.add(st);
            for e in &st.events {
                cdr.write(e)?;
            }
            for t in &st.topups {
                top.write(t)?;
            }
            cdr_rows += st.events.len() as u64;
            topup_rows += st.topups.len() as u64;
        }
    }
    cdr.finish()?;
    top.finish()?;

    let days = f64::from(c.observation_days);
    let mut profiles = BTreeMap::new();
    profiles.insert(
        "illiterate".to_string(),
        ClassProfile {
            configured: c.illiterate.clone(),
            observed: ill.profile(days),
        },
    );
    profiles.insert(
        "literate".to_string(),
        ClassProfile {
            configured: c.literate.clone(),
            observed: lit.profile(days),
        },
    );
    let high = layout.high_zones();
    let zones = layout
        .zones
        .iter()
        .map(|z| {
            let homes = |want: bool| {
                pop.subscribers
                    .iter()
                    .filter(|s| s.illiterate == want && layout.tower_zone[s.home] == z.index)
                    .count()
            };
            ZoneSummary {
                index: z.index,
                center_longitude: z.center.lon,
                center_latitude: z.center.lat,
                radius_km: z.radius_km,
                weight: z.weight,
                high_illiteracy: high.contains(&z.index),
                towers: z.towers.iter().map(|&t| layout.towers[t].tower_id.clone()).collect(),
                illiterate_homes: homes(true),
                literate_homes: homes(false),
            }
        })
        .collect();
    let mut files = BTreeMap::new();
    for name in [CDR_FILE, TOPUPS_FILE, TOWERS_FILE, HANDSETS_FILE, LABELS_FILE] {
        files.insert(name.to_string(), file_digest(&dir.join(name))?);
    }
    let kv = c.to_kv();
    let manifest = Manifest {
        format: "litmap-synth-manifest".to_string(),
        provenance: provenance.clone(),
        config: kv
            .keys()
            .map(|k| (k.to_string(), kv.get(k).unwrap_or_default().to_string()))
            .collect(),
        subscribers: pop.subscribers.len(),
        illiterate: pop.n_illiterate(),
        cdr_rows,
        topup_rows,
        profiles,
        zones,
        planted_signals: PLANTED_SIGNALS.iter().map(|s| s.to_string()).collect(),
        files,
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    write_file(&dir.join(MANIFEST_FILE), text)?;
    Ok(manifest)
}
