use super::accumulator::Activity;
use super::partial::{FeatureValue, PartialFeatures};
use super::stats::{entropy, mean, median, variance};
use crate::ingest::{Channel, Direction};

/// Contact-network and usage-volume features.
pub fn social_features(act: &Activity) -> PartialFeatures {
    let mut out = PartialFeatures::default();
    let degree = act.peers.len();
    let peer_events: u64 = act.peers.values().map(|n| n[0] + n[1]).sum();
    out.num("degree", degree as f64);
    out.num("degree_in", act.peers.values().filter(|n| n[0] > 0).count() as f64);
    out.num("degree_out", act.peers.values().filter(|n| n[1] > 0).count() as f64);
    if degree == 0 {
        out.push("interactions_per_contact", FeatureValue::Missing);
        out.push("contact_entropy", FeatureValue::Missing);
    } else {
        out.num("interactions_per_contact", peer_events as f64 / degree as f64);
        out.opt("contact_entropy", entropy(act.peers.values().map(|n| n[0] + n[1])));
    }

    for ch in Channel::ALL {
        for (dir, d) in [(Direction::In, "in"), (Direction::Out, "out")] {
            let name = format!("{}_{d}_count", ch.token().to_lowercase());
            out.num(&name, act.count(dir, ch) as f64);
        }
    }
    for ch in [Channel::Voice, Channel::Video] {
        for (dir, d) in [(Direction::In, "in"), (Direction::Out, "out")] {
            let name = format!("{}_{d}_duration", ch.token().to_lowercase());
            out.num(&name, act.duration(dir, ch) as f64);
        }
    }
    let (vin, vout) = (act.volumes[Direction::In.index()], act.volumes[Direction::Out.index()]);
    out.num("data_volume_in", vin as f64);
    out.num("data_volume_out", vout as f64);
    out.num("internet_volume", (vin + vout) as f64);

    let sms: Vec<f64> = act.weekly_sms.iter().map(|&x| x as f64).collect();
    let data: Vec<f64> = act.weekly_data.iter().map(|&x| x as f64).collect();
    out.opt("sms_weekly_mean", mean(&sms));
    out.opt("sms_weekly_median", median(&sms));
    out.opt("sms_weekly_var", variance(&sms));
    out.opt("internet_weekly_mean", mean(&data));
    out.opt("internet_weekly_median", median(&data));
    out.opt("internet_weekly_var", variance(&data));
    out.num("total_events", act.events as f64);
    out
}
