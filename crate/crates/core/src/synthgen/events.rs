//! Per-subscriber CDR and top-up streams.

use chrono::{DateTime, Duration, NaiveTime, Utc};
use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp, LogNormal, Poisson, StandardNormal};

use super::config::{BehaviorProfile, PopulationConfig};
use super::layout::Layout;
use super::population::Subscriber;
use crate::ingest::{CdrEvent, Channel, Direction, TopUpEvent};
use crate::seed::rng_for;

const TOPUP_MENU: [f64; 9] = [10.0, 20.0, 25.0, 50.0, 100.0, 150.0, 200.0, 300.0, 500.0];
const VAS_CODES: [&str; 5] = ["2222", "3456", "16216", "21213", "28000"];
const DATA_IN_SHARE: f64 = 0.75;

/// Everything generated for one subscriber, plus the draws behind it.
#[derive(Debug, Clone)]
pub struct SubscriberStream {
    pub events: Vec<CdrEvent>,
    pub topups: Vec<TopUpEvent>,
    pub contact_pool: usize,
    pub place_pool: usize,
}

fn cents(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// Mean-one log-normal multiplier.
fn multiplier(rng: &mut ChaCha8Rng, sigma: f64) -> f64 {
    if sigma == 0.0 {
        return 1.0;
    }
    let z: f64 = rng.sample(StandardNormal);
    (sigma * z - 0.5 * sigma * sigma).exp()
}

fn poisson(rng: &mut ChaCha8Rng, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive mean").sample(rng) as u64
}

/// Pool size jittered by up to half either way, never below one.
fn jitter(rng: &mut ChaCha8Rng, size: usize) -> usize {
    let d = size / 2;
    if d == 0 {
        return size;
    }
    (size + rng.random_range(0..=2 * d) - d).max(1)
}

fn peer_id(rng: &mut ChaCha8Rng) -> String {
    format!("01{:09}", rng.random_range(0..1_000_000_000u32))
}

fn charge_of(ch: Channel, dir: Direction, duration: Option<u64>, volume: Option<u64>) -> f64 {
    let minutes = duration.map_or(0.0, |d| d.div_ceil(60) as f64);
    match (ch, dir) {
        (Channel::Data, _) => cents(volume.unwrap_or(0) as f64 / 1e6 * 0.25),
        (_, Direction::In) => 0.0,
        (Channel::Voice, Direction::Out) => minutes,
        (Channel::Video, Direction::Out) => 2.0 * minutes,
        (Channel::Sms, Direction::Out) => 0.5,
        (Channel::Mms, Direction::Out) => 2.0,
        (Channel::Vas, Direction::Out) => 2.0,
    }
}

pub fn generate_subscriber(c: &PopulationConfig, layout: &Layout, s: &Subscriber) -> SubscriberStream {
    let mut rng = rng_for(c.seed, &format!("subscriber/{}", s.id));
    let p: &BehaviorProfile = c.profile(s.illiterate);
    let days = f64::from(c.observation_days);
    let window_s = i64::from(c.observation_days) * 86_400;
    let start: DateTime<Utc> = c.window_start.and_time(NaiveTime::MIN).and_utc();
    let activity = multiplier(&mut rng, c.activity_sigma);

    let contact_pool = jitter(&mut rng, p.contact_pool);
    let contacts: Vec<String> = (0..contact_pool).map(|_| peer_id(&mut rng)).collect();
    let spread = c.contact_decay_spread;
    let decay = if spread > 0.0 {
        (p.contact_decay + rng.random_range(-spread..=spread)).clamp(0.05, 1.0)
    } else {
        p.contact_decay
    };
    let contact_pick = WeightedIndex::new((0..contact_pool).map(|i| decay.powi(i as i32))).expect("positive");

    let place_pool = jitter(&mut rng, p.place_pool).min(layout.towers.len());
    let places = layout.nearest(s.home, place_pool);
    let place_weights: Vec<f64> = if place_pool == 1 {
        vec![1.0]
    } else {
        let rest = (1.0 - p.home_share) / (place_pool - 1) as f64;
        std::iter::once(p.home_share)
            .chain(std::iter::repeat_n(rest, place_pool - 1))
            .collect()
    };
    let place_pick = WeightedIndex::new(&place_weights).ok();

    let streams = [
        (Channel::Voice, Some(Direction::In), p.voice_in_rate),
        (Channel::Voice, Some(Direction::Out), p.voice_out_rate),
        (Channel::Sms, Some(Direction::In), p.sms_in_rate),
        (Channel::Sms, Some(Direction::Out), p.sms_out_rate),
        (Channel::Mms, Some(Direction::In), p.mms_rate),
        (Channel::Mms, Some(Direction::Out), p.mms_rate),
        (Channel::Video, Some(Direction::In), p.video_rate),
        (Channel::Video, Some(Direction::Out), p.video_rate),
        (Channel::Data, None, p.data_rate),
        (Channel::Vas, None, p.vas_rate),
    ];
    let voice_len = Exp::new(1.0 / p.voice_mean_duration_s).expect("positive mean");
    let video_len = Exp::new(1.0 / p.video_mean_duration_s).expect("positive mean");
    let volume = Exp::new(1.0 / p.data_mean_volume_bytes).expect("positive mean");

    let mut timed: Vec<(i64, CdrEvent)> = Vec::new();
    for (ch, fixed_dir, rate) in streams {
        let m = multiplier(&mut rng, c.channel_sigma);
        let n = poisson(&mut rng, rate * days * activity * m);
        for _ in 0..n {
            let offset = rng.random_range(0..window_s);
            let dir = fixed_dir.unwrap_or_else(|| {
                let in_share = if ch == Channel::Data { DATA_IN_SHARE } else { 0.5 };
                if rng.random_bool(in_share) {
                    Direction::In
                } else {
                    Direction::Out
                }
            });
            let tower = match &place_pick {
                Some(w) => places[w.sample(&mut rng)],
                None => places[0],
            };
            let peer_id = match ch {
                Channel::Data => None,
                Channel::Vas => Some(VAS_CODES[rng.random_range(0..VAS_CODES.len())].to_string()),
                _ => Some(contacts[contact_pick.sample(&mut rng)].clone()),
            };
            let duration_s = match ch {
                Channel::Voice => Some(voice_len.sample(&mut rng).ceil().max(1.0) as u64),
                Channel::Video => Some(video_len.sample(&mut rng).ceil().max(1.0) as u64),
                _ => None,
            };
            let volume_bytes = (ch == Channel::Data).then(|| {
                let scale = if dir == Direction::In { 1.0 } else { 0.25 };
                (volume.sample(&mut rng) * scale).ceil() as u64
            });
            let charge = charge_of(ch, dir, duration_s, volume_bytes);
            timed.push((
                offset,
                CdrEvent {
                    subscriber_id: s.id.clone(),
                    timestamp: start + Duration::seconds(offset),
                    direction: dir,
                    channel: ch,
                    peer_id,
                    duration_s,
                    volume_bytes,
                    tower_id: layout.towers[tower].tower_id.clone(),
                    charge,
                },
            ));
        }
    }
    timed.sort_by_key(|e| e.0);

    let mut topups = Vec::new();
    let gap = Exp::new(activity / (p.topup_mean_gap_days * 86_400.0)).expect("positive rate");
    let sigma: f64 = 0.5;
    let mu = (p.topup_mean_amount * activity.sqrt()).ln() - 0.5 * sigma * sigma;
    let amount = LogNormal::new(mu, sigma).expect("finite parameters");
    let mut t = gap.sample(&mut rng);
    while (t as i64) < window_s {
        let want: f64 = amount.sample(&mut rng);
        let pick = TOPUP_MENU
            .iter()
            .copied()
            .min_by(|a, b| (a - want).abs().total_cmp(&(b - want).abs()))
            .expect("non-empty menu");
        topups.push(TopUpEvent {
            subscriber_id: s.id.clone(),
            timestamp: start + Duration::seconds(t as i64),
            amount: pick,
        });
        t += gap.sample(&mut rng);
    }

    SubscriberStream {
        events: timed.into_iter().map(|e| e.1).collect(),
        topups,
        contact_pool,
        place_pool,
    }
}
