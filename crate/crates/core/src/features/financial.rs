use super::accumulator::{Activity, Calendar};
use super::partial::{FeatureValue, PartialFeatures};
use super::stats::{mean, median, variance};
use crate::ingest::{Channel, Direction, HandsetRecord};

const RECHARGE: &[&str] = &[
    "recharge_count",
    "recharge_amount_mean",
    "recharge_amount_median",
    "recharge_amount_var",
    "recharge_amount_cov",
    "recharge_amount_min",
    "recharge_amount_max",
    "recharge_fraction_lowest",
    "recharge_fraction_highest",
    "spending_speed",
    "recharge_gap_mean_days",
    "recharge_weekly_mean",
    "recharge_weekly_median",
    "recharge_weekly_var",
    "recharge_monthly_mean",
    "recharge_monthly_median",
    "recharge_monthly_var",
];

fn block_stats(out: &mut PartialFeatures, prefix: &str, totals: &[f64]) {
    out.opt(&format!("{prefix}_mean"), mean(totals));
    out.opt(&format!("{prefix}_median"), median(totals));
    out.opt(&format!("{prefix}_var"), variance(totals));
}

/// Airtime-purchase, revenue and handset features.
///
/// With no top-ups every recharge feature is missing. Charges come from the
/// CDR side and are always present.
pub fn financial_features(act: &Activity, handset: Option<&HandsetRecord>, cal: &Calendar) -> PartialFeatures {
    let mut out = PartialFeatures::default();
    let amounts: Vec<f64> = act.topups.iter().map(|&(_, a)| a).collect();

    if amounts.is_empty() {
        for name in RECHARGE {
            out.push(name, FeatureValue::Missing);
        }
    } else {
        let n = amounts.len() as f64;
        let m = mean(&amounts).expect("non-empty");
        let var = variance(&amounts).expect("non-empty");
        let lo = amounts.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = amounts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let total: f64 = amounts.iter().sum();
        out.num("recharge_count", n);
        out.num("recharge_amount_mean", m);
        out.opt("recharge_amount_median", median(&amounts));
        out.num("recharge_amount_var", var);
        out.opt("recharge_amount_cov", (m != 0.0).then(|| var.sqrt() / m));
        out.num("recharge_amount_min", lo);
        out.num("recharge_amount_max", hi);
        out.num(
            "recharge_fraction_lowest",
            amounts.iter().filter(|&&a| a == lo).count() as f64 / n,
        );
        out.num(
            "recharge_fraction_highest",
            amounts.iter().filter(|&&a| a == hi).count() as f64 / n,
        );
        out.num("spending_speed", total / f64::from(cal.window.days));

        let mut times: Vec<i64> = act.topups.iter().map(|&(t, _)| t).collect();
        times.sort_unstable();
        let gaps: Vec<f64> = times.windows(2).map(|w| (w[1] - w[0]) as f64 / 86_400.0).collect();
        out.opt("recharge_gap_mean_days", mean(&gaps));

        let mut weekly = vec![0.0; cal.n_weeks];
        let mut monthly = vec![0.0; cal.n_months];
        for &(t, a) in &act.topups {
            if let Some(w) = cal.week_of(t) {
                weekly[w] += a;
            }
            if let Some(mo) = cal.month_of(t) {
                monthly[mo] += a;
            }
        }
        block_stats(&mut out, "recharge_weekly", &weekly);
        block_stats(&mut out, "recharge_monthly", &monthly);
    }

    let mut total = 0.0;
    for dir in [Direction::Out, Direction::In] {
        for ch in Channel::ALL {
            let c = act.charge(dir, ch);
            total += c;
            let d = if dir == Direction::Out { "out" } else { "in" };
            out.num(&format!("charge_{d}_{}", ch.token().to_lowercase()), c);
        }
    }
    // The CDR schema carries no roaming flag.
    out.push("charge_roaming", FeatureValue::Missing);
    out.num("charge_total", total);

    match handset {
        Some(h) => {
            out.push("handset_manufacturer", FeatureValue::Category(h.manufacturer.clone()));
            out.push("handset_brand", FeatureValue::Category(h.brand.clone()));
            out.push(
                "handset_camera",
                FeatureValue::Category(u8::from(h.camera_enabled).to_string()),
            );
            out.push(
                "handset_device_class",
                FeatureValue::Category(h.device_class.token().to_string()),
            );
        }
        None => {
            for name in [
                "handset_manufacturer",
                "handset_brand",
                "handset_camera",
                "handset_device_class",
            ] {
                out.push(name, FeatureValue::Missing);
            }
        }
    }
    out
}
