//! End-to-end stages shared by the command-line tool, tests and benches.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{featurize, Activity, ActivityBuilder, Calendar, Catalog, FeatureMatrix, Featurized};
use crate::geomap::{aggregate_towers, TowerEstimate};
use crate::ingest::{
    drain, open, parse_cdr, parse_topups, read_handsets, read_labels, BundleValidator, HandsetRecord, LiteracyLabel,
    ObservationWindow, ParseOptions, RowError, TowerTable, ValidationReport,
};
use crate::learn::{
    evaluate, train, upsample_minority, EvalReport, GbmModel, Hyperparameters, Split, SplitSpec, TrainData,
};
use crate::synthgen::{CDR_FILE, HANDSETS_FILE, LABELS_FILE, TOPUPS_FILE, TOWERS_FILE};

/// Locations of the five input files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BundlePaths {
    pub cdr: PathBuf,
    pub topups: PathBuf,
    pub towers: PathBuf,
    pub handsets: PathBuf,
    pub labels: PathBuf,
}

impl BundlePaths {
    /// The file names written by the generator, inside `dir`.
    pub fn in_dir(dir: &Path) -> Self {
        BundlePaths {
            cdr: dir.join(CDR_FILE),
            topups: dir.join(TOPUPS_FILE),
            towers: dir.join(TOWERS_FILE),
            handsets: dir.join(HANDSETS_FILE),
            labels: dir.join(LABELS_FILE),
        }
    }

    pub fn all(&self) -> [&Path; 5] {
        [&self.cdr, &self.topups, &self.towers, &self.handsets, &self.labels]
    }
}

/// Parsed inputs with per-subscriber activity for labeled subscribers.
#[derive(Debug)]
pub struct Bundle {
    pub towers: TowerTable,
    pub labels: BTreeMap<String, LiteracyLabel>,
    pub handsets: BTreeMap<String, HandsetRecord>,
    pub activities: BTreeMap<String, Activity>,
    pub calendar: Calendar,
    pub report: ValidationReport,
    /// Row-level parse errors by file kind.
    pub row_errors: BTreeMap<String, Vec<RowError>>,
    pub cdr_rows: u64,
    pub topup_rows: u64,
}

impl Bundle {
    /// Fails when events reference towers absent from the tower file.
    pub fn require_consistent(&self) -> Result<()> {
        if self.report.blocks_pipeline() {
            return Err(Error::Validation(format!(
                "events reference unknown towers: {}",
                self.report.missing_towers.join(", ")
            )));
        }
        Ok(())
    }

    pub fn n_row_errors(&self) -> usize {
        self.row_errors.values().map(Vec::len).sum()
    }
}

/// Streams the CDR and top-up files once, building activities and the
/// validation report together.
pub fn load_bundle(paths: &BundlePaths, window: ObservationWindow, opts: ParseOptions) -> Result<Bundle> {
    let (towers, tower_errors) = TowerTable::read(open(&paths.towers)?, opts)?;
    let (labels, label_errors) = read_labels(open(&paths.labels)?, opts)?;
    let (handsets, handset_errors) = read_handsets(open(&paths.handsets)?, opts)?;

    let mut validator = BundleValidator::new(window, towers.iter());
    let mut builder = ActivityBuilder::new(window, &towers);
    for id in labels.keys() {
        builder.touch(id);
    }
    let mut row_errors = BTreeMap::new();

    let mut cdr_errors = Vec::new();
    let mut cdr_rows = 0;
    for row in parse_cdr(open(&paths.cdr)?, opts)? {
        match row {
            Ok(ev) => {
                cdr_rows += 1;
                validator.observe_event(&ev);
                if labels.contains_key(&ev.subscriber_id) {
                    builder.add_event(&ev);
                }
            }
            Err(e) if opts.strict => {
                return Err(Error::Row {
                    source_name: "cdr".into(),
                    line: e.line,
                    message: e.message,
                })
            }
            Err(e) => cdr_errors.push(e),
        }
    }
    let (topups, topup_errors) = drain(parse_topups(open(&paths.topups)?, opts)?, opts)?;
    let topup_rows = topups.len() as u64;
    for t in &topups {
        validator.observe_topup(t);
        if labels.contains_key(&t.subscriber_id) {
            builder.add_topup(t);
        }
    }
    for (name, errs) in [
        ("towers", tower_errors),
        ("labels", label_errors),
        ("handsets", handset_errors),
        ("cdr", cdr_errors),
        ("topups", topup_errors),
    ] {
        if !errs.is_empty() {
            row_errors.insert(name.to_string(), errs);
        }
    }
    let calendar = *builder.calendar();
    let activities = builder.finish();
    let report = validator.finish(&labels);
    Ok(Bundle {
        towers,
        labels,
        handsets,
        activities,
        calendar,
        report,
        row_errors,
        cdr_rows,
        topup_rows,
    })
}

/// One feature row per labeled subscriber.
pub fn featurize_bundle(bundle: &Bundle, catalog: &Catalog) -> Result<Featurized> {
    bundle.require_consistent()?;
    featurize(
        &bundle.activities,
        &bundle.handsets,
        &bundle.calendar,
        &bundle.towers,
        catalog,
    )
}

/// Positive-class flags aligned to matrix rows.
pub fn positives(m: &FeatureMatrix, labels: &BTreeMap<String, LiteracyLabel>) -> Result<Vec<bool>> {
    m.ids()
        .iter()
        .map(|id| {
            labels
                .get(id)
                .map(LiteracyLabel::is_illiterate)
                .ok_or_else(|| Error::Validation(format!("no label for subscriber {id}")))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainOptions {
    pub split: SplitSpec,
    pub hyperparameters: Hyperparameters,
    pub threshold: f64,
    pub seed: u64,
}

impl TrainOptions {
    pub fn with_seed(seed: u64) -> Self {
        TrainOptions {
            split: SplitSpec {
                seed,
                ..SplitSpec::default()
            },
            hyperparameters: Hyperparameters::default(),
            threshold: 0.5,
            seed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: GbmModel,
    pub split: Split,
    pub report: EvalReport,
}

/// Split, up-sample the training part, train, and evaluate on the held-out
/// part. Training accuracy is measured on the original (not up-sampled)
/// training rows.
pub fn train_and_evaluate(m: &FeatureMatrix, positive: &[bool], opts: &TrainOptions) -> Result<TrainOutcome> {
    let split = crate::learn::split(positive, &opts.split)?;
    let model = train_on(m, positive, &split.train, &opts.hyperparameters, opts.seed)?;
    let train_acc = evaluate(&model, m, positive, &split.train, opts.threshold)?.accuracy;
    let report = evaluate(&model, m, positive, &split.test, opts.threshold)?.with_train_accuracy(train_acc);
    Ok(TrainOutcome { model, split, report })
}

/// Up-samples `rows` and trains on the result.
pub fn train_on(
    m: &FeatureMatrix,
    positive: &[bool],
    rows: &[usize],
    hp: &Hyperparameters,
    seed: u64,
) -> Result<GbmModel> {
    let balanced = upsample_minority(rows, positive, seed)?;
    train(
        TrainData {
            matrix: m,
            positive,
            rows: &balanced,
        },
        hp,
        seed,
    )
}

/// Tower rates: predictions over `scored` rows, ground truth over `truth`
/// rows. `home` is aligned to matrix rows.
#[allow(clippy::too_many_arguments)]
pub fn tower_estimates(
    m: &FeatureMatrix,
    positive: &[bool],
    home: &[Option<String>],
    towers: &TowerTable,
    model: &GbmModel,
    scored: &[usize],
    truth: &[usize],
    min_count: usize,
) -> Result<Vec<TowerEstimate>> {
    let probs = model.predict_rows(m, scored)?;
    let ids = m.ids();
    let preds: Vec<(String, f64)> = scored.iter().zip(probs).map(|(&r, p)| (ids[r].clone(), p)).collect();
    let gt: Vec<(String, bool)> = truth.iter().map(|&r| (ids[r].clone(), positive[r])).collect();
    let home_map: BTreeMap<String, String> = ids
        .iter()
        .zip(home)
        .filter_map(|(id, h)| Some((id.clone(), h.clone()?)))
        .collect();
    aggregate_towers(&preds, &gt, &home_map, towers, min_count)
}
