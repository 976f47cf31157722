//! File layout and small readers/writers for command outputs.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use litmap_core::features::read_catalog;
use litmap_core::ingest::{open, read_labels, LiteracyLabel, ParseOptions};
use litmap_core::learn::Split;
use litmap_core::provenance::{create_file, Provenance};
use litmap_core::synthgen::LABELS_FILE;
use litmap_core::{Error, FeatureMatrix, Result};
use serde::Serialize;

pub const FEATURES_FILE: &str = "features.csv";
pub const CATALOG_FILE: &str = "catalog.csv";
pub const HOME_TOWERS_FILE: &str = "home_towers.csv";
pub const VALIDATION_FILE: &str = "validation.json";
pub const MODEL_FILE: &str = "model.json";
pub const REPORT_FILE: &str = "report.json";
pub const SPLIT_FILE: &str = "split.csv";
pub const CV_FILE: &str = "cv.json";
pub const SELECTION_FILE: &str = "selection.json";
pub const TOWER_RATES_FILE: &str = "tower_rates.csv";
pub const COMPARISON_FILE: &str = "comparison.json";

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Fails with a usage error when any of `paths` is missing.
pub fn require_inputs<P: AsRef<Path>>(paths: &[P]) -> Result<()> {
    for p in paths {
        let p = p.as_ref();
        if !p.exists() {
            return Err(Error::Config(format!("input `{}` does not exist", p.display())));
        }
    }
    Ok(())
}

pub fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create_file(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n").map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

/// A JSON artifact: provenance plus a payload flattened alongside it.
#[derive(Serialize)]
pub struct Stamped<'a, T: Serialize> {
    pub provenance: &'a Provenance,
    #[serde(flatten)]
    pub body: T,
}

pub fn features_inputs(dir: &Path) -> [PathBuf; 2] {
    [dir.join(FEATURES_FILE), dir.join(CATALOG_FILE)]
}

pub fn read_features(dir: &Path) -> Result<FeatureMatrix> {
    let [features, catalog] = features_inputs(dir);
    require_inputs(&[&features, &catalog])?;
    let catalog = read_catalog(open(&catalog)?)?;
    FeatureMatrix::read_csv(open(&features)?, catalog)
}

pub fn read_labels_in(data: &Path) -> Result<BTreeMap<String, LiteracyLabel>> {
    let path = data.join(LABELS_FILE);
    require_inputs(&[&path])?;
    let (labels, errors) = read_labels(open(&path)?, ParseOptions { strict: true })?;
    debug_assert!(errors.is_empty());
    Ok(labels)
}

fn csv_writer(path: &Path, prov: &Provenance) -> Result<csv::Writer<std::io::BufWriter<File>>> {
    let mut w = create_file(path)?;
    w.write_all(prov.comment_line().as_bytes()).map_err(io_err(path))?;
    Ok(csv::Writer::from_writer(w))
}

fn csv_reader(path: &Path) -> Result<csv::Reader<BufReader<File>>> {
    Ok(csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(open(path)?))
}

fn finish(mut w: csv::Writer<std::io::BufWriter<File>>, path: &Path) -> Result<()> {
    w.flush().map_err(io_err(path))
}

pub fn write_home_towers(path: &Path, m: &FeatureMatrix, home: &[Option<String>], prov: &Provenance) -> Result<()> {
    let mut w = csv_writer(path, prov)?;
    w.write_record(["subscriber_id", "home_tower"])?;
    for (id, h) in m.ids().iter().zip(home) {
        w.write_record([id.as_str(), h.as_deref().unwrap_or("")])?;
    }
    finish(w, path)
}

/// Home towers aligned to the rows of `m`.
pub fn read_home_towers(path: &Path, m: &FeatureMatrix) -> Result<Vec<Option<String>>> {
    require_inputs(&[path])?;
    let mut by_id = BTreeMap::new();
    for rec in csv_reader(path)?.records() {
        let rec = rec?;
        let h = rec.get(1).unwrap_or("");
        by_id.insert(rec[0].to_string(), (!h.is_empty()).then(|| h.to_string()));
    }
    m.ids()
        .iter()
        .map(|id| {
            by_id
                .remove(id)
                .ok_or_else(|| Error::Validation(format!("{}: no home tower row for {id}", path.display())))
        })
        .collect()
}

pub fn write_split(path: &Path, m: &FeatureMatrix, split: &Split, prov: &Provenance) -> Result<()> {
    let mut part = vec![""; m.n_rows()];
    for &r in &split.train {
        part[r] = "train";
    }
    for &r in &split.test {
        part[r] = "test";
    }
    let mut w = csv_writer(path, prov)?;
    w.write_record(["subscriber_id", "part"])?;
    for (id, p) in m.ids().iter().zip(part) {
        w.write_record([id.as_str(), p])?;
    }
    finish(w, path)
}

/// Reads a split written by [`write_split`] against the rows of `m`.
pub fn read_split(path: &Path, m: &FeatureMatrix) -> Result<Split> {
    require_inputs(&[path])?;
    let mut split = Split {
        train: Vec::new(),
        test: Vec::new(),
    };
    for rec in csv_reader(path)?.records() {
        let rec = rec?;
        let id = &rec[0];
        let row = m
            .row_of(id)
            .ok_or_else(|| Error::Validation(format!("{}: unknown subscriber {id}", path.display())))?;
        match rec.get(1) {
            Some("train") => split.train.push(row),
            Some("test") => split.test.push(row),
            other => {
                return Err(Error::Validation(format!(
                    "{}: bad part {:?} for {id}",
                    path.display(),
                    other.unwrap_or("")
                )))
            }
        }
    }
    split.train.sort_unstable();
    split.test.sort_unstable();
    Ok(split)
}

pub fn write_tower_rates(path: &Path, rates: &[litmap_core::geomap::TowerEstimate], prov: &Provenance) -> Result<()> {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut w = csv_writer(path, prov)?;
    w.write_record([
        "tower_id",
        "longitude",
        "latitude",
        "predicted_rate",
        "actual_rate",
        "subscriber_count",
        "labeled_count",
    ])?;
    for e in rates {
        w.write_record([
            e.tower_id.clone(),
            e.longitude.to_string(),
            e.latitude.to_string(),
            opt(e.predicted_rate),
            opt(e.actual_rate),
            e.subscriber_count.to_string(),
            e.labeled_count.to_string(),
        ])?;
    }
    finish(w, path)
}

pub fn write_density(path: &Path, d: &litmap_core::features::ClassDensity, prov: &Provenance) -> Result<()> {
    let mut w = csv_writer(path, prov)?;
    w.write_record(["bin_lo", "bin_hi", "illiterate", "literate"])?;
    for i in 0..d.illiterate.len() {
        w.write_record([
            d.edges[i].to_string(),
            d.edges[i + 1].to_string(),
            d.illiterate[i].to_string(),
            d.literate[i].to_string(),
        ])?;
    }
    finish(w, path)
}
