//! Run configuration: one flat `key = value` file shared by every command,
//! with `--set key=value` and `--seed` overrides on top.

use std::path::Path;

use litmap_core::geomap::{GridSpec, DEFAULT_MIN_COUNT};
use litmap_core::ingest::ObservationWindow;
use litmap_core::kv::KeyValues;
use litmap_core::learn::{GcvOptions, Hyperparameters, SplitSpec};
use litmap_core::synthgen::{Manifest, PopulationConfig, MANIFEST_FILE};
use litmap_core::{Error, Result};

/// Keys that are not generator settings.
pub const RUN_KEYS: &[&str] = &[
    "train_fraction",
    "stratified",
    "n_trees",
    "max_depth",
    "learning_rate",
    "min_samples_leaf",
    "subsample",
    "max_bins",
    "threshold",
    "cell_deg",
    "idw_power",
    "idw_k",
    "epsilon_km",
    "max_distance_km",
    "min_count",
    "gcv_penalty",
    "gcv_budget_trees",
    "gcv_tolerance",
    "gcv_min_features",
    "gcv_upsample",
];

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub population: PopulationConfig,
    pub seed: u64,
    pub split: SplitSpec,
    pub hyperparameters: Hyperparameters,
    pub threshold: f64,
    /// Bounding box is filled in from the tower table at map time.
    pub grid: GridSpec,
    pub min_count: usize,
    pub gcv: GcvOptions,
    window_keys_set: bool,
}

impl RunConfig {
    pub fn from_kv(kv: &KeyValues, seed_override: Option<u64>) -> Result<Self> {
        let synth_keys = PopulationConfig::known_keys();
        let mut synth = KeyValues::default();
        for k in kv.keys() {
            if synth_keys.iter().any(|s| s == k) {
                synth.set(k, kv.get(k).unwrap_or_default());
            } else if !RUN_KEYS.contains(&k) {
                return Err(Error::Config(format!("unknown key `{k}`")));
            }
        }
        if let Some(s) = seed_override {
            synth.set("seed", s);
        }
        let population = PopulationConfig::from_kv(&synth)?;
        let seed = population.seed;

        let mut split = SplitSpec {
            seed,
            ..SplitSpec::default()
        };
        kv.apply("train_fraction", &mut split.train_fraction)?;
        kv.apply("stratified", &mut split.stratified)?;

        let mut hp = Hyperparameters::default();
        kv.apply("n_trees", &mut hp.n_trees)?;
        kv.apply("max_depth", &mut hp.max_depth)?;
        kv.apply("learning_rate", &mut hp.learning_rate)?;
        kv.apply("min_samples_leaf", &mut hp.min_samples_leaf)?;
        kv.apply("subsample", &mut hp.subsample)?;
        kv.apply("max_bins", &mut hp.max_bins)?;
        hp.validate()?;

        let mut threshold = 0.5;
        kv.apply("threshold", &mut threshold)?;
        if !(0.0..=1.0).contains(&threshold) {
            return Err(Error::Config("threshold must be in [0, 1]".into()));
        }

        let mut grid = GridSpec::default();
        kv.apply("cell_deg", &mut grid.cell_deg)?;
        kv.apply("idw_power", &mut grid.power)?;
        kv.apply("idw_k", &mut grid.k)?;
        kv.apply("epsilon_km", &mut grid.epsilon_km)?;
        if kv.get("max_distance_km").is_some() {
            let mut d = 0.0;
            kv.apply("max_distance_km", &mut d)?;
            grid.max_distance_km = Some(d);
        }
        grid.validate()?;

        let mut min_count = DEFAULT_MIN_COUNT;
        kv.apply("min_count", &mut min_count)?;

        let mut gcv = GcvOptions::default();
        kv.apply("gcv_penalty", &mut gcv.penalty)?;
        kv.apply("gcv_budget_trees", &mut gcv.budget_trees)?;
        kv.apply("gcv_tolerance", &mut gcv.tolerance)?;
        kv.apply("gcv_min_features", &mut gcv.min_features)?;
        kv.apply("gcv_upsample", &mut gcv.upsample)?;

        Ok(RunConfig {
            population,
            seed,
            split,
            hyperparameters: hp,
            threshold,
            grid,
            min_count,
            gcv,
            window_keys_set: kv.get("window_start").is_some() || kv.get("observation_days").is_some(),
        })
    }

    /// Reads `path` (if any), then applies `overrides` (`key=value`).
    pub fn load(path: Option<&Path>, overrides: &[String], seed: Option<u64>) -> Result<Self> {
        let mut kv = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::Io {
                    path: p.to_path_buf(),
                    source: e,
                })?;
                KeyValues::parse(&text)?
            }
            None => KeyValues::default(),
        };
        for o in overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override `{o}` is not key=value")))?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || v.is_empty() {
                return Err(Error::Config(format!("override `{o}` is not key=value")));
            }
            kv.set(k, v);
        }
        RunConfig::from_kv(&kv, seed)
    }

    /// Observation window for a data directory: the configured one, or the
    /// generator's when the directory carries a manifest and the config is
    /// silent.
    pub fn window_for(&self, data_dir: &Path) -> Result<ObservationWindow> {
        let manifest = data_dir.join(MANIFEST_FILE);
        if !self.window_keys_set && manifest.exists() {
            let m = Manifest::read(&manifest)?;
            let mut kv = KeyValues::default();
            for key in ["window_start", "observation_days"] {
                if let Some(v) = m.config.get(key) {
                    kv.set(key, v);
                }
            }
            let c = PopulationConfig::from_kv(&kv)?;
            return Ok(ObservationWindow::new(c.window_start, c.observation_days));
        }
        Ok(ObservationWindow::new(
            self.population.window_start,
            self.population.observation_days,
        ))
    }
}
