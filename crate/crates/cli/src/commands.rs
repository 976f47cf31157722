use std::path::{Path, PathBuf};

use litmap_core::features::{feature_density, Catalog};
use litmap_core::geomap::{
    export_surface, high_rate_components, surface_pair, GridSpec, SurfaceComparison, SurfaceFormat,
};
use litmap_core::ingest::{ObservationWindow, ParseOptions, ValidationReport};
use litmap_core::learn::{
    cross_validate, evaluate, gcv_backward_eliminate, read_model, split, split_gain_importance, train_with,
    upsample_minority, write_model, CvSummary, EliminationStep, FeatureScore, GcvOptions, Hyperparameters,
    ModelDocument, SplitSpec, TrainData,
};
use litmap_core::pipeline::{
    featurize_bundle, load_bundle, positives, tower_estimates, train_and_evaluate, BundlePaths, TrainOptions,
};
use litmap_core::provenance::{create_file, Provenance};
use litmap_core::synthgen::write_bundle;
use litmap_core::{Error, EvalReport, FeatureMatrix, GbmModel, LonLat, Result};
use log::{info, warn};
use serde::Serialize;

use crate::artifacts::*;
use crate::config::RunConfig;

/// Settings shared by every command.
pub struct Context {
    pub config: RunConfig,
    pub config_path: Option<PathBuf>,
    pub strict: bool,
}

impl Context {
    /// Provenance over the config file (if any) and `inputs`.
    fn provenance<P: AsRef<Path>>(&self, inputs: &[P]) -> Result<Provenance> {
        let mut p = Provenance::new(self.config.seed);
        if let Some(c) = &self.config_path {
            p = p.with_input(c)?;
        }
        for i in inputs {
            p = p.with_input(i.as_ref())?;
        }
        Ok(p)
    }

    fn parse_options(&self) -> ParseOptions {
        ParseOptions { strict: self.strict }
    }
}

pub fn synth(ctx: &Context, out: &Path) -> Result<()> {
    create_dir(out)?;
    let prov = ctx.provenance::<&Path>(&[])?;
    let m = write_bundle(&ctx.config.population, out, &prov)?;
    info!(
        "wrote {} subscribers ({} illiterate), {} CDR rows, {} top-ups to {}",
        m.subscribers,
        m.illiterate,
        m.cdr_rows,
        m.topup_rows,
        out.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct ValidationDoc<'a> {
    window: ObservationWindow,
    cdr_rows: u64,
    topup_rows: u64,
    labeled_subscribers: usize,
    report: &'a ValidationReport,
    /// Rejected rows per input file.
    rejected_rows: std::collections::BTreeMap<String, usize>,
}

pub fn featurize(ctx: &Context, data: &Path, out: &Path) -> Result<()> {
    let paths = BundlePaths::in_dir(data);
    require_inputs(&paths.all())?;
    let window = ctx.config.window_for(data)?;
    let bundle = load_bundle(&paths, window, ctx.parse_options())?;
    for (file, errs) in &bundle.row_errors {
        warn!(
            "{file}: skipped {} malformed rows (first: line {}: {})",
            errs.len(),
            errs[0].line,
            errs[0].message
        );
    }
    let f = featurize_bundle(&bundle, &Catalog::default_catalog())?;
    let prov = ctx.provenance(&paths.all())?;
    let comment = prov.comment_line();

    create_dir(out)?;
    f.matrix
        .write_csv(create_file(&out.join(FEATURES_FILE))?, Some(&comment))?;
    f.matrix
        .write_catalog(create_file(&out.join(CATALOG_FILE))?, Some(&comment))?;
    write_home_towers(&out.join(HOME_TOWERS_FILE), &f.matrix, &f.home_towers, &prov)?;
    write_json(
        &out.join(VALIDATION_FILE),
        &Stamped {
            provenance: &prov,
            body: ValidationDoc {
                window,
                cdr_rows: bundle.cdr_rows,
                topup_rows: bundle.topup_rows,
                labeled_subscribers: bundle.labels.len(),
                report: &bundle.report,
                rejected_rows: bundle.row_errors.iter().map(|(k, v)| (k.clone(), v.len())).collect(),
            },
        },
    )?;
    info!(
        "wrote {} x {} feature matrix to {}",
        f.matrix.n_rows(),
        f.matrix.n_cols(),
        out.display()
    );
    Ok(())
}

/// Matrix, class flags and the provenance of both inputs.
fn load_labeled(ctx: &Context, data: &Path, features: &Path) -> Result<(FeatureMatrix, Vec<bool>, Provenance)> {
    let m = read_features(features)?;
    let labels = read_labels_in(data)?;
    let pos = positives(&m, &labels)?;
    let [fp, cp] = features_inputs(features);
    let prov = ctx.provenance(&[fp, cp, data.join(litmap_core::synthgen::LABELS_FILE)])?;
    Ok((m, pos, prov))
}

#[derive(Serialize)]
struct ReportDoc<'a> {
    split: &'a SplitSpec,
    hyperparameters: &'a Hyperparameters,
    n_train: usize,
    n_test: usize,
    report: &'a EvalReport,
    importance: Vec<FeatureScore>,
}

fn log_report(what: &str, r: &EvalReport) {
    let pct = |x: Option<f64>| x.map_or("n/a".to_string(), |v| format!("{:.1}%", 100.0 * v));
    info!(
        "{what}: accuracy {:.1}% (95% CI {:.1}-{:.1}), sensitivity {}, specificity {}, lift {}",
        100.0 * r.accuracy,
        100.0 * r.accuracy_ci95.0,
        100.0 * r.accuracy_ci95.1,
        pct(r.sensitivity),
        pct(r.specificity),
        r.lift.map_or("n/a".to_string(), |l| format!("{l:.2}")),
    );
}

pub fn train(ctx: &Context, data: &Path, features: &Path, out: &Path, folds: Option<usize>) -> Result<()> {
    let (m, pos, prov) = load_labeled(ctx, data, features)?;
    let c = &ctx.config;
    let opts = TrainOptions {
        split: c.split.clone(),
        hyperparameters: c.hyperparameters.clone(),
        threshold: c.threshold,
        seed: c.seed,
    };
    let outcome = train_and_evaluate(&m, &pos, &opts)?;
    log_report("test", &outcome.report);

    create_dir(out)?;
    write_model(
        create_file(&out.join(MODEL_FILE))?,
        &ModelDocument::new(outcome.model.clone(), Some(prov.clone())),
    )?;
    write_split(&out.join(SPLIT_FILE), &m, &outcome.split, &prov)?;
    write_json(
        &out.join(REPORT_FILE),
        &Stamped {
            provenance: &prov,
            body: ReportDoc {
                split: &c.split,
                hyperparameters: &c.hyperparameters,
                n_train: outcome.split.train.len(),
                n_test: outcome.split.test.len(),
                report: &outcome.report,
                importance: split_gain_importance(&outcome.model),
            },
        },
    )?;
    if let Some(k) = folds {
        let cv = cross_validate(&m, &pos, &outcome.split.train, k, &c.hyperparameters, c.seed)?;
        info!(
            "{k}-fold CV on training rows: accuracy {:.1}% +/- {:.1}",
            100.0 * cv.mean_accuracy,
            100.0 * cv.std_accuracy
        );
        write_json(
            &out.join(CV_FILE),
            &Stamped::<&CvSummary> {
                provenance: &prov,
                body: &cv,
            },
        )?;
    }
    Ok(())
}

fn load_model(path: &Path, m: &FeatureMatrix) -> Result<GbmModel> {
    require_inputs(&[path])?;
    let doc = read_model(litmap_core::ingest::open(path)?)?;
    doc.model.check_catalog(m)?;
    Ok(doc.model)
}

fn split_beside(model: &Path, explicit: Option<&Path>) -> PathBuf {
    explicit
        .map(Path::to_path_buf)
        .unwrap_or_else(|| model.parent().unwrap_or(Path::new(".")).join(SPLIT_FILE))
}

#[derive(Serialize)]
struct EvaluationDoc<'a> {
    rows: &'a str,
    report: &'a EvalReport,
    importance: Vec<FeatureScore>,
}

pub fn evaluate_cmd(
    ctx: &Context,
    data: &Path,
    features: &Path,
    model_path: &Path,
    split_path: Option<&Path>,
    all_rows: bool,
    out: &Path,
) -> Result<()> {
    let (m, pos, prov) = load_labeled(ctx, data, features)?;
    let model = load_model(model_path, &m)?;
    let prov = prov.with_input(model_path)?;
    let (rows, which) = if all_rows {
        ((0..m.n_rows()).collect::<Vec<_>>(), "all")
    } else {
        let sp = split_beside(model_path, split_path);
        (read_split(&sp, &m)?.test, "test")
    };
    let report = evaluate(&model, &m, &pos, &rows, ctx.config.threshold)?;
    log_report(which, &report);
    write_json(
        out,
        &Stamped {
            provenance: &prov,
            body: EvaluationDoc {
                rows: which,
                report: &report,
                importance: split_gain_importance(&model),
            },
        },
    )
}

#[derive(Serialize)]
struct SelectionDoc<'a> {
    options: &'a GcvOptions,
    selected: &'a [String],
    /// GCV increase when each feature was removed (or would have been).
    scores: &'a [(String, f64)],
    trace: &'a [EliminationStep],
    final_gcv: f64,
}

pub fn select_features(ctx: &Context, data: &Path, features: &Path, out: &Path) -> Result<()> {
    let (m, pos, prov) = load_labeled(ctx, data, features)?;
    let c = &ctx.config;
    let sp = split(&pos, &c.split)?;
    let sel = gcv_backward_eliminate(&m, &pos, &sp.train, &c.hyperparameters, c.seed, c.gcv.clone())?;
    info!(
        "GCV elimination kept {} of {} features after {} steps",
        sel.selected.len(),
        m.n_cols(),
        sel.trace.len()
    );

    // Final model on the kept features at the full tree budget.
    let mut active = vec![false; m.n_cols()];
    for &f in &sel.selected {
        active[f] = true;
    }
    let balanced = upsample_minority(&sp.train, &pos, c.seed)?;
    let (model, _) = train_with(
        TrainData {
            matrix: &m,
            positive: &pos,
            rows: &balanced,
        },
        &c.hyperparameters,
        c.seed,
        Some(&active),
    )?;
    let train_acc = evaluate(&model, &m, &pos, &sp.train, c.threshold)?.accuracy;
    let report = evaluate(&model, &m, &pos, &sp.test, c.threshold)?.with_train_accuracy(train_acc);
    log_report("selected-feature model, test", &report);

    create_dir(out)?;
    write_json(
        &out.join(SELECTION_FILE),
        &Stamped {
            provenance: &prov,
            body: SelectionDoc {
                options: &c.gcv,
                selected: &sel.selected_names,
                scores: &sel.scores,
                trace: &sel.trace,
                final_gcv: sel.final_gcv,
            },
        },
    )?;
    write_model(
        create_file(&out.join(MODEL_FILE))?,
        &ModelDocument::new(model.clone(), Some(prov.clone())),
    )?;
    write_split(&out.join(SPLIT_FILE), &m, &sp, &prov)?;
    write_json(
        &out.join(REPORT_FILE),
        &Stamped {
            provenance: &prov,
            body: ReportDoc {
                split: &c.split,
                hyperparameters: &c.hyperparameters,
                n_train: sp.train.len(),
                n_test: sp.test.len(),
                report: &report,
                importance: split_gain_importance(&model),
            },
        },
    )
}

#[derive(Serialize)]
struct ComparisonDoc<'a> {
    grid: &'a GridSpec,
    n_cols: usize,
    n_rows: usize,
    towers_with_prediction: usize,
    towers_with_truth: usize,
    comparison: &'a SurfaceComparison,
    /// 4-connected components of predicted cells above the 90th percentile.
    high_rate_components: Vec<usize>,
}

pub fn map(
    ctx: &Context,
    data: &Path,
    features: &Path,
    model_path: &Path,
    split_path: Option<&Path>,
    format: SurfaceFormat,
    out: &Path,
) -> Result<()> {
    let (m, pos, prov) = load_labeled(ctx, data, features)?;
    let model = load_model(model_path, &m)?;
    let sp_path = split_beside(model_path, split_path);
    let sp = read_split(&sp_path, &m)?;
    let home_path = features.join(HOME_TOWERS_FILE);
    let home = read_home_towers(&home_path, &m)?;
    let paths = BundlePaths::in_dir(data);
    require_inputs(&[&paths.towers])?;
    let (towers, _) = litmap_core::ingest::TowerTable::read(
        litmap_core::ingest::open(&paths.towers)?,
        ParseOptions { strict: true },
    )?;
    let prov = prov
        .with_input(model_path)?
        .with_input(&sp_path)?
        .with_input(&home_path)?
        .with_input(&paths.towers)?;

    let est = tower_estimates(
        &m,
        &pos,
        &home,
        &towers,
        &model,
        &sp.test,
        &sp.train,
        ctx.config.min_count,
    )?;
    let pts: Vec<LonLat> = towers.iter().map(|t| LonLat::new(t.longitude, t.latitude)).collect();
    let bbox = GridSpec::covering(&pts, ctx.config.grid.cell_deg)?;
    let spec = GridSpec {
        lon_min: bbox.lon_min,
        lat_min: bbox.lat_min,
        lon_max: bbox.lon_max,
        lat_max: bbox.lat_max,
        ..ctx.config.grid.clone()
    };
    let pair = surface_pair(&est, &spec)?;
    let components = high_rate_components(&pair.predicted, 0.9);
    match pair.comparison.correlation {
        Some(r) => info!("surface correlation {r:.3} over {} cells", pair.comparison.valid_cells),
        None => warn!("surface correlation undefined"),
    }

    create_dir(out)?;
    for (name, s) in [("predicted", &pair.predicted), ("actual", &pair.actual)] {
        let path = out.join(format!("{name}.{}", format.extension()));
        let mut w = create_file(&path)?;
        export_surface(s, format, Some(&prov), &mut w)?;
        std::io::Write::flush(&mut w).map_err(|e| Error::Io { path, source: e })?;
    }
    write_tower_rates(&out.join(TOWER_RATES_FILE), &est, &prov)?;
    write_json(
        &out.join(COMPARISON_FILE),
        &Stamped {
            provenance: &prov,
            body: ComparisonDoc {
                grid: &spec,
                n_cols: pair.predicted.n_cols,
                n_rows: pair.predicted.n_rows,
                towers_with_prediction: est.iter().filter(|e| e.predicted_rate.is_some()).count(),
                towers_with_truth: est.iter().filter(|e| e.actual_rate.is_some()).count(),
                comparison: &pair.comparison,
                high_rate_components: components.iter().map(Vec::len).collect(),
            },
        },
    )
}

/// Up to five catalog names close to `name`, best first.
pub fn near_matches<'a>(name: &str, candidates: impl Iterator<Item = &'a str>) -> Vec<&'a str> {
    let mut scored: Vec<(f64, &str)> = candidates
        .map(|c| {
            let mut s = strsim::jaro_winkler(name, c);
            if c.contains(name) || name.contains(c) {
                s = s.max(0.9);
            }
            (s, c)
        })
        .filter(|(s, _)| *s >= 0.75)
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(b.1)));
    scored.into_iter().take(5).map(|(_, c)| c).collect()
}

pub fn density(
    ctx: &Context,
    data: &Path,
    features: &Path,
    feature: &str,
    bins: usize,
    log: bool,
    out: &Path,
) -> Result<()> {
    let (m, pos, prov) = load_labeled(ctx, data, features)?;
    if m.catalog().index_of(feature).is_none() {
        let near = near_matches(feature, m.catalog().names());
        let hint = if near.is_empty() {
            String::new()
        } else {
            format!("; did you mean {}?", near.join(", "))
        };
        return Err(Error::Config(format!("unknown feature `{feature}`{hint}")));
    }
    let d = feature_density(&m, &pos, feature, bins, log)?;
    if d.dropped_non_positive > 0 {
        warn!(
            "dropped {} non-positive values before the log transform",
            d.dropped_non_positive
        );
    }
    if let Some(dir) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    write_density(out, &d, &prov)?;
    info!(
        "{feature}: {} illiterate and {} literate values in {bins} bins",
        d.n_illiterate, d.n_literate
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn near_matches_finds_typos_and_substrings() {
        let names = ["sms_in_count", "sms_out_count", "contact_entropy", "places_visited"];
        let got = near_matches("sms_in_cnt", names.iter().copied());
        assert_eq!(got[0], "sms_in_count");
        assert!(near_matches("entropy", names.iter().copied()).contains(&"contact_entropy"));
        assert!(near_matches("zzzz", names.iter().copied()).is_empty());
    }
}
