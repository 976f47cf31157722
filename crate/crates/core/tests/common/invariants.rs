//! Randomized invariants across ingest, features, learn and geomap, shared by
//! the `properties` tests and the acceptance run.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{Duration, NaiveDate};
use litmap_core::features::{
    financial_features, radius_of_gyration, social_features, Activity, ActivityBuilder, Calendar, Family, FeatureDef,
    Kind,
};
use litmap_core::geomap::{aggregate_towers, GridSpec, Interpolator};
use litmap_core::ingest::{
    parse_cdr, CdrEvent, Channel, Direction, ObservationWindow, ParseOptions, RecordWriter, Tower, TowerTable,
};
use litmap_core::learn::{train_with, upsample_minority, ConfusionMatrix, EvalReport, Hyperparameters, TrainData};
use litmap_core::{Catalog, FeatureMatrix, LonLat};
use proptest::prelude::*;

fn start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2016, 1, 4).unwrap()
}

fn towers(points: &[(f64, f64)]) -> TowerTable {
    TowerTable::new(
        points
            .iter()
            .enumerate()
            .map(|(i, &(lon, lat))| Tower {
                tower_id: format!("T{i:02}"),
                longitude: lon,
                latitude: lat,
                district: "D".into(),
            })
            .collect(),
    )
    .unwrap()
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

#[derive(Debug, Clone)]
struct EventSpec {
    sub: u8,
    offset_s: i64,
    out: bool,
    channel: usize,
    peer: u8,
    amount: u32,
    tower: usize,
    charge_cents: u32,
}

fn event_spec(days: i64, n_towers: usize) -> impl Strategy<Value = EventSpec> {
    (
        0u8..4,
        0..days * 86_400,
        any::<bool>(),
        0usize..6,
        0u8..10,
        0u32..100_000,
        0..n_towers,
        0u32..5_000,
    )
        .prop_map(
            |(sub, offset_s, out, channel, peer, amount, tower, charge_cents)| EventSpec {
                sub,
                offset_s,
                out,
                channel,
                peer,
                amount,
                tower,
                charge_cents,
            },
        )
}

fn build_event(e: &EventSpec, window: &ObservationWindow) -> CdrEvent {
    let ch = Channel::ALL[e.channel];
    CdrEvent {
        subscriber_id: format!("s{}", e.sub),
        timestamp: window.start + Duration::seconds(e.offset_s),
        direction: if e.out { Direction::Out } else { Direction::In },
        channel: ch,
        peer_id: ch.has_peer().then(|| format!("p{}", e.peer)),
        duration_s: ch.has_duration().then_some(u64::from(e.amount % 3600)),
        volume_bytes: (ch == Channel::Data).then_some(u64::from(e.amount)),
        tower_id: format!("T{:02}", e.tower),
        charge: f64::from(e.charge_cents) / 100.0,
    }
}

fn numeric_matrix(cols: &[Vec<f64>]) -> FeatureMatrix {
    let defs = (0..cols.len())
        .map(|i| FeatureDef {
            name: format!("f{i}"),
            family: Family::Social,
            kind: Kind::Numeric,
        })
        .collect();
    let n = cols[0].len();
    let rows = (0..n)
        .map(|r| (format!("r{r:04}"), cols.iter().map(|c| Some(c[r])).collect()))
        .collect();
    FeatureMatrix::from_rows(Catalog::new(defs).unwrap(), rows).unwrap()
}

/// Small labeled data set: two numeric columns on a coarse grid and labels
/// with at least two rows per class.
fn labeled_data() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<bool>)> {
    (12usize..60).prop_flat_map(|n| {
        (
            prop::collection::vec(0i32..40, n),
            prop::collection::vec(-20i32..20, n),
            prop::collection::vec(any::<bool>(), n),
        )
            .prop_map(|(a, b, mut y)| {
                y[0] = true;
                y[1] = true;
                y[2] = false;
                y[3] = false;
                (
                    a.into_iter().map(f64::from).collect(),
                    b.into_iter().map(f64::from).collect(),
                    y,
                )
            })
    })
}

fn train_data_hp(n_trees: usize, depth: usize, lr: f64, min_leaf: usize) -> Hyperparameters {
    Hyperparameters {
        n_trees,
        max_depth: depth,
        learning_rate: lr,
        min_samples_leaf: min_leaf,
        subsample: 1.0,
        max_bins: 255,
    }
}

/// Distinct sample points on a 0.001-degree lattice with values.
fn idw_samples() -> impl Strategy<Value = Vec<(LonLat, f64)>> {
    prop::collection::btree_map((0i32..200, 0i32..200), 0.0f64..1.0, 1..15).prop_map(|m| {
        m.into_iter()
            .map(|((x, y), v)| (LonLat::new(f64::from(x) * 0.001, f64::from(y) * 0.001), v))
            .collect()
    })
}

fn idw_spec(samples: &[(LonLat, f64)], k: usize, power: f64) -> GridSpec {
    let pts: Vec<LonLat> = samples.iter().map(|s| s.0).collect();
    GridSpec {
        k,
        power,
        ..GridSpec::covering(&pts, 0.02).unwrap()
    }
}

fn cells(spec: &GridSpec) -> Vec<LonLat> {
    let mut out = Vec::new();
    for r in 0..spec.n_rows() {
        for c in 0..spec.n_cols() {
            out.push(spec.center(c, r));
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 128,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    fn contact_entropy_bounds(counts in prop::collection::vec(1u64..50, 1..20)) {
        let cal = Calendar::new(ObservationWindow::new(start(), 7));
        let mut act = Activity::new(&cal);
        for (i, &c) in counts.iter().enumerate() {
            act.peers.insert(format!("p{i:02}"), [c / 2, c - c / 2]);
        }
        let f = social_features(&act);
        let k = counts.len();
        prop_assert_eq!(f.value("degree"), Some(k as f64));
        let h = f.value("contact_entropy").unwrap();
        let max = (k as f64).ln();
        prop_assert!(h >= 0.0 && h <= max + 1e-12, "{} not in [0, {}]", h, max);
        if k == 1 {
            prop_assert_eq!(h, 0.0);
        } else {
            prop_assert!(h > 0.0);
        }
        let uniform = counts.iter().all(|&c| c == counts[0]);
        if uniform {
            prop_assert!((h - max).abs() < 1e-12);
        } else {
            prop_assert!(h < max - 1e-12);
        }
    }

    fn gyration_nonnegative_zero_iff_one_place_and_shift_invariant(
        base_lon in -170.0f64..170.0,
        base_lat in -60.0f64..60.0,
        offsets in prop::collection::vec((0i32..50, 0i32..50, 1u64..20), 1..8),
        shift in -180.0f64..180.0,
    ) {
        let pts: Vec<(f64, f64)> = offsets
            .iter()
            .map(|&(dx, dy, _)| (base_lon + f64::from(dx) * 0.01, base_lat + f64::from(dy) * 0.01))
            .collect();
        let visits: BTreeMap<usize, u64> = offsets.iter().enumerate().map(|(i, o)| (i, o.2)).collect();
        let rg = radius_of_gyration(&visits, &towers(&pts)).unwrap();
        prop_assert!(rg >= 0.0);
        let distinct: BTreeSet<(i32, i32)> = offsets.iter().map(|o| (o.0, o.1)).collect();
        if distinct.len() == 1 {
            prop_assert!(rg < 1e-9, "{}", rg);
        } else {
            prop_assert!(rg > 0.1, "{}", rg);
        }
        let wrap = |lon: f64| (lon + shift + 180.0).rem_euclid(360.0) - 180.0;
        let moved: Vec<(f64, f64)> = pts.iter().map(|&(lon, lat)| (wrap(lon), lat)).collect();
        let rg2 = radius_of_gyration(&visits, &towers(&moved)).unwrap();
        prop_assert!((rg - rg2).abs() < 1e-6, "{} vs {}", rg, rg2);
    }

    fn doubling_topups_scales_amounts(amounts in prop::collection::vec(1u32..1000, 1..30), days in 7u32..120) {
        let cal = Calendar::new(ObservationWindow::new(start(), days));
        let mut one = Activity::new(&cal);
        let mut two = Activity::new(&cal);
        for (i, &a) in amounts.iter().enumerate() {
            let t = i as i64 * 3600;
            one.topups.push((t, f64::from(a) / 2.0));
            two.topups.push((t, f64::from(a)));
        }
        let f1 = financial_features(&one, None, &cal);
        let f2 = financial_features(&two, None, &cal);
        for name in ["recharge_amount_mean", "recharge_amount_median", "spending_speed"] {
            let (a, b) = (f1.value(name).unwrap(), f2.value(name).unwrap());
            prop_assert!(rel_close(2.0 * a, b, 1e-12), "{}: {} {}", name, a, b);
        }
        let (v1, v2) = (f1.value("recharge_amount_var").unwrap(), f2.value("recharge_amount_var").unwrap());
        prop_assert!(rel_close(2.0 * v1.sqrt(), v2.sqrt(), 1e-12));
        for name in ["recharge_amount_cov", "recharge_fraction_lowest", "recharge_fraction_highest"] {
            let (a, b) = (f1.value(name).unwrap(), f2.value(name).unwrap());
            prop_assert!((a - b).abs() <= 1e-12, "{}: {} {}", name, a, b);
        }
    }

    fn window_halves_add_up(
        specs in prop::collection::vec(event_spec(14, 3), 0..80),
        cut in 1u32..14,
    ) {
        let table = towers(&[(0.0, 0.0), (0.01, 0.0), (0.0, 0.01)]);
        let whole = ObservationWindow::new(start(), 14);
        let first = ObservationWindow::new(start(), cut);
        let second = ObservationWindow::new(start() + Duration::days(i64::from(cut)), 14 - cut);
        let mut b_all = ActivityBuilder::new(whole, &table);
        let mut b_1 = ActivityBuilder::new(first, &table);
        let mut b_2 = ActivityBuilder::new(second, &table);
        for s in &specs {
            let ev = build_event(s, &whole);
            prop_assert!(b_all.add_event(&ev));
            let (in1, in2) = (b_1.add_event(&ev), b_2.add_event(&ev));
            prop_assert!(in1 != in2);
        }
        let (all, h1, h2) = (b_all.finish(), b_1.finish(), b_2.finish());
        for (id, act) in &all {
            for d in Direction::ALL {
                for ch in Channel::ALL {
                    let part = |m: &BTreeMap<String, Activity>| m.get(id).map_or(0, |a| a.count(d, ch));
                    prop_assert_eq!(act.count(d, ch), part(&h1) + part(&h2));
                }
            }
        }
    }

    fn cdr_round_trip_and_total_parsing(
        specs in prop::collection::vec(event_spec(30, 5), 0..60),
        junk_at in prop::collection::vec(0usize..60, 0..5),
    ) {
        let window = ObservationWindow::new(start(), 30);
        let events: Vec<CdrEvent> = specs.iter().map(|s| build_event(s, &window)).collect();
        let mut w = RecordWriter::new(Vec::new(), None).unwrap();
        for ev in &events {
            w.write(ev).unwrap();
        }
        let bytes = w.finish().unwrap();
        let back: Vec<CdrEvent> = parse_cdr(bytes.as_slice(), ParseOptions::default())
            .unwrap()
            .collect::<Result<_, _>>()
            .unwrap();
        prop_assert_eq!(&back, &events);

        let text = String::from_utf8(bytes).unwrap();
        let mut lines: Vec<&str> = text.lines().collect();
        for &j in &junk_at {
            let at = 1 + j.min(lines.len() - 1);
            lines.insert(at, "s1,not-a-time,IN,SMS,p1,,,T00,0");
        }
        let joined = lines.join("\n") + "\n";
        let mut reader = parse_cdr(joined.as_bytes(), ParseOptions::default()).unwrap();
        let (mut ok, mut bad) = (0u64, 0u64);
        for r in reader.by_ref() {
            if r.is_ok() { ok += 1 } else { bad += 1 }
        }
        prop_assert_eq!(ok, events.len() as u64);
        prop_assert_eq!(bad, junk_at.len() as u64);
        prop_assert_eq!(reader.rows_read(), ok + bad);
    }

    fn idw_exactness_and_maximum_principle(samples in idw_samples(), k in 1usize..9, power in 1.0f64..3.0) {
        let spec = idw_spec(&samples, k, power);
        let interp = Interpolator::new(&samples, &spec).unwrap();
        for (p, v) in &samples {
            prop_assert_eq!(interp.value(*p), Some(*v));
        }
        for q in cells(&spec) {
            let w = interp.weights(q);
            prop_assert!(!w.is_empty());
            let total: f64 = w.iter().map(|e| e.1).sum();
            prop_assert!((total - 1.0).abs() <= 1e-12, "weights sum to {}", total);
            prop_assert!(w.iter().all(|e| e.1.is_finite() && e.1 >= 0.0));
            let lo = w.iter().map(|e| samples[e.0].1).fold(f64::MAX, f64::min);
            let hi = w.iter().map(|e| samples[e.0].1).fold(f64::MIN, f64::max);
            let v = interp.value(q).unwrap();
            prop_assert!(v >= lo && v <= hi, "{} outside [{}, {}]", v, lo, hi);
        }
    }

    fn idw_shift_invariance(samples in idw_samples(), k in 1usize..9, c in -100.0f64..100.0) {
        let spec = idw_spec(&samples, k, 2.0);
        let shifted: Vec<(LonLat, f64)> = samples.iter().map(|&(p, v)| (p, v + c)).collect();
        let a = Interpolator::new(&samples, &spec).unwrap();
        let b = Interpolator::new(&shifted, &spec).unwrap();
        for q in cells(&spec) {
            let (va, vb) = (a.value(q).unwrap(), b.value(q).unwrap());
            prop_assert!((va + c - vb).abs() <= 1e-9, "{} + {} vs {}", va, c, vb);
        }
    }

    fn aggregation_conserves_subscribers(
        homes in prop::collection::vec((0usize..6, 0.0f64..=1.0, any::<bool>()), 0..80),
        min_count in 1usize..8,
    ) {
        let table = towers(&[(0.0, 0.0), (0.1, 0.0), (0.2, 0.0), (0.0, 0.1), (0.1, 0.1), (0.2, 0.1)]);
        let mut home = BTreeMap::new();
        let mut preds = Vec::new();
        let mut truth = Vec::new();
        for (i, &(t, p, y)) in homes.iter().enumerate() {
            let id = format!("s{i:03}");
            home.insert(id.clone(), format!("T{t:02}"));
            preds.push((id.clone(), p));
            truth.push((id, y));
        }
        let est = aggregate_towers(&preds, &truth, &home, &table, min_count).unwrap();
        prop_assert_eq!(est.iter().map(|e| e.subscriber_count).sum::<usize>(), homes.len());
        prop_assert_eq!(est.iter().map(|e| e.labeled_count).sum::<usize>(), homes.len());
        for e in &est {
            prop_assert_eq!(e.predicted_rate.is_some(), e.subscriber_count >= min_count);
        }
    }

    fn upsampling_balances_within_support(labels in prop::collection::vec(any::<bool>(), 2..200), seed in any::<u64>()) {
        let mut positive = labels;
        positive[0] = true;
        positive[1] = false;
        let rows: Vec<usize> = (0..positive.len()).collect();
        let out = upsample_minority(&rows, &positive, seed).unwrap();
        let n_pos = out.iter().filter(|&&r| positive[r]).count();
        prop_assert_eq!(n_pos, out.len() - n_pos);
        prop_assert_eq!(&out[..rows.len()], &rows[..]);
        let minority = positive.iter().filter(|&&p| p).count() * 2 < positive.len();
        for &r in &out[rows.len()..] {
            prop_assert_eq!(positive[r], minority);
        }
        prop_assert_eq!(upsample_minority(&rows, &positive, seed).unwrap(), out);
    }

    fn gbm_ignores_monotone_transforms(
        (a, b, y) in labeled_data(),
        which in 0usize..3,
        depth in 1usize..4,
        min_leaf in 1usize..4,
    ) {
        let transformed: Vec<f64> = a
            .iter()
            .map(|&x| match which {
                0 => 3.0 * x - 7.0,
                1 => x * x * x,
                _ => (x / 8.0).exp(),
            })
            .collect();
        let m1 = numeric_matrix(&[a.clone(), b.clone()]);
        let m2 = numeric_matrix(&[transformed, b]);
        let rows: Vec<usize> = (0..y.len()).collect();
        let hp = train_data_hp(8, depth, 0.3, min_leaf);
        let fit = |m: &FeatureMatrix| {
            train_with(TrainData { matrix: m, positive: &y, rows: &rows }, &hp, 1, None).unwrap().0
        };
        let (g1, g2) = (fit(&m1), fit(&m2));
        for (t1, t2) in g1.trees.iter().zip(&g2.trees) {
            prop_assert_eq!(t1.n_leaves(), t2.n_leaves());
            let f1: Vec<usize> = t1.splits().map(|s| s.0).collect();
            let f2: Vec<usize> = t2.splits().map(|s| s.0).collect();
            prop_assert_eq!(f1, f2);
        }
        for r in rows {
            prop_assert_eq!(g1.predict(m1.row(r)).to_bits(), g2.predict(m2.row(r)).to_bits());
        }
    }

    fn deviance_never_rises(
        (a, b, y) in labeled_data(),
        lr in 0.01f64..=0.1,
        depth in 1usize..4,
        min_leaf in 1usize..6,
    ) {
        let m = numeric_matrix(&[a, b]);
        let rows: Vec<usize> = (0..y.len()).collect();
        let hp = train_data_hp(15, depth, lr, min_leaf);
        let (_, trace) = train_with(TrainData { matrix: &m, positive: &y, rows: &rows }, &hp, 2, None).unwrap();
        for w in trace.deviance.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12, "{:?}", trace.deviance);
        }
    }

    fn metrics_match_hand_counts(
        cases in prop::collection::vec((0u32..=100, any::<bool>()), 1..300),
        t in 1u32..100,
    ) {
        // Whole-percent scores against half-percent thresholds: no score
        // sits on either t or 1 - t.
        let probs: Vec<f64> = cases.iter().map(|c| f64::from(c.0) / 100.0).collect();
        let truth: Vec<bool> = cases.iter().map(|c| c.1).collect();
        let threshold = (f64::from(t) + 0.5) / 100.0;
        let (mut tp, mut fp, mut tn, mut fn_) = (0u64, 0u64, 0u64, 0u64);
        for (p, y) in probs.iter().zip(&truth) {
            let pred = *p >= threshold;
            match (pred, *y) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, false) => tn += 1,
                (false, true) => fn_ += 1,
            }
        }
        let cm = ConfusionMatrix::from_scores(&probs, &truth, threshold);
        prop_assert_eq!((cm.tp, cm.fp, cm.tn, cm.fn_), (tp, fp, tn, fn_));
        let r = EvalReport::from_confusion(cm, threshold).unwrap();
        let n = probs.len() as f64;
        prop_assert!((r.accuracy - (tp + tn) as f64 / n).abs() < 1e-15);
        prop_assert_eq!(r.sensitivity, (tp + fn_ > 0).then(|| tp as f64 / (tp + fn_) as f64));
        prop_assert_eq!(r.specificity, (tn + fp > 0).then(|| tn as f64 / (tn + fp) as f64));
        prop_assert_eq!(r.precision, (tp + fp > 0).then(|| tp as f64 / (tp + fp) as f64));
        prop_assert!((r.prevalence - (tp + fn_) as f64 / n).abs() < 1e-15);
        prop_assert!(r.accuracy_ci95.0 <= r.accuracy && r.accuracy <= r.accuracy_ci95.1);

        let flipped_probs: Vec<f64> = probs.iter().map(|p| 1.0 - p).collect();
        let flipped_truth: Vec<bool> = truth.iter().map(|y| !y).collect();
        let f = EvalReport::from_confusion(
            ConfusionMatrix::from_scores(&flipped_probs, &flipped_truth, 1.0 - threshold),
            1.0 - threshold,
        )
        .unwrap();
        prop_assert_eq!(f.sensitivity, r.specificity);
        prop_assert_eq!(f.specificity, r.sensitivity);
        prop_assert_eq!(f.accuracy, r.accuracy);
    }
}

/// Every suite by name; each panics on a counterexample.
pub const SUITES: &[(&str, fn())] = &[
    ("contact_entropy_bounds", contact_entropy_bounds),
    (
        "gyration_nonnegative_zero_iff_one_place_and_shift_invariant",
        gyration_nonnegative_zero_iff_one_place_and_shift_invariant,
    ),
    ("doubling_topups_scales_amounts", doubling_topups_scales_amounts),
    ("window_halves_add_up", window_halves_add_up),
    ("cdr_round_trip_and_total_parsing", cdr_round_trip_and_total_parsing),
    (
        "idw_exactness_and_maximum_principle",
        idw_exactness_and_maximum_principle,
    ),
    ("idw_shift_invariance", idw_shift_invariance),
    ("aggregation_conserves_subscribers", aggregation_conserves_subscribers),
    ("upsampling_balances_within_support", upsampling_balances_within_support),
    ("gbm_ignores_monotone_transforms", gbm_ignores_monotone_transforms),
    ("deviance_never_rises", deviance_never_rises),
    ("metrics_match_hand_counts", metrics_match_hand_counts),
];
