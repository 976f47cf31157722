use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use litmap_core::geomap::{idw_interpolate, GridSpec};
use litmap_core::ingest::{open, parse_cdr, ObservationWindow, ParseOptions};
use litmap_core::learn::{train, upsample_minority, Hyperparameters, TrainData};
use litmap_core::pipeline::{featurize_bundle, load_bundle, positives, BundlePaths};
use litmap_core::provenance::Provenance;
use litmap_core::synthgen::{write_bundle, PopulationConfig, CDR_FILE};
use litmap_core::{Catalog, LonLat};

fn config() -> PopulationConfig {
    PopulationConfig {
        n_subscribers: 500,
        observation_days: 30,
        n_towers: 60,
        seed: 1,
        ..PopulationConfig::default()
    }
}

fn pipeline(c: &mut Criterion) {
    let cfg = config();
    let window = ObservationWindow::new(cfg.window_start, cfg.observation_days);
    let dir = tempfile::tempdir().unwrap();
    write_bundle(&cfg, dir.path(), &Provenance::new(cfg.seed)).unwrap();
    let paths = BundlePaths::in_dir(dir.path());
    let catalog = Catalog::default_catalog();

    let mut g = c.benchmark_group("pipeline");
    g.sample_size(10);
    g.bench_function("synth_500", |b| {
        b.iter(|| {
            let out = tempfile::tempdir().unwrap();
            write_bundle(&cfg, out.path(), &Provenance::new(cfg.seed)).unwrap()
        })
    });
    g.bench_function("parse_cdr", |b| {
        b.iter(|| {
            parse_cdr(open(&dir.path().join(CDR_FILE)).unwrap(), ParseOptions::default())
                .unwrap()
                .filter(Result::is_ok)
                .count()
        })
    });

    let bundle = load_bundle(&paths, window, ParseOptions::default()).unwrap();
    g.bench_function("featurize_500", |b| {
        b.iter(|| featurize_bundle(black_box(&bundle), &catalog).unwrap())
    });

    let f = featurize_bundle(&bundle, &catalog).unwrap();
    let pos = positives(&f.matrix, &bundle.labels).unwrap();
    let rows: Vec<usize> = (0..pos.len()).collect();
    let balanced = upsample_minority(&rows, &pos, 1).unwrap();
    let hp = Hyperparameters {
        n_trees: 50,
        ..Hyperparameters::default()
    };
    g.bench_function("train_50_trees", |b| {
        b.iter(|| {
            let data = TrainData {
                matrix: &f.matrix,
                positive: &pos,
                rows: &balanced,
            };
            train(data, &hp, 1).unwrap()
        })
    });
    g.finish();
}

fn interpolation(c: &mut Criterion) {
    let samples: Vec<(LonLat, f64)> = (0..200)
        .map(|i| {
            let (x, y) = ((i * 37 % 200) as f64, (i * 91 % 200) as f64);
            (
                LonLat::new(90.33 + x * 0.00075, 23.70 + y * 0.00065),
                (i % 17) as f64 / 17.0,
            )
        })
        .collect();
    let pts: Vec<LonLat> = samples.iter().map(|s| s.0).collect();
    let spec = GridSpec::covering(&pts, 0.002).unwrap();
    c.bench_function("idw_grid", |b| {
        b.iter(|| idw_interpolate(black_box(&samples), &spec).unwrap())
    });
}

criterion_group!(benches, pipeline, interpolation);
criterion_main!(benches);
