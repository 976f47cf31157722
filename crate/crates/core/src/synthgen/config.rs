//! Generator configuration and per-class behavior profiles.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kv::KeyValues;

/// Rate parameters for one literacy class. Rates are events per day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviorProfile {
    pub sms_in_rate: f64,
    pub sms_out_rate: f64,
    pub voice_in_rate: f64,
    pub voice_out_rate: f64,
    pub voice_mean_duration_s: f64,
    pub mms_rate: f64,
    pub video_rate: f64,
    pub video_mean_duration_s: f64,
    pub data_rate: f64,
    pub data_mean_volume_bytes: f64,
    pub vas_rate: f64,
    pub contact_pool: usize,
    /// Ratio between consecutive contact weights; smaller is more concentrated.
    pub contact_decay: f64,
    pub place_pool: usize,
    /// Share of place visits spent at the home tower.
    pub home_share: f64,
    pub topup_mean_amount: f64,
    pub topup_mean_gap_days: f64,
    pub p_basic: f64,
    pub p_feature: f64,
    pub p_smart: f64,
}

impl BehaviorProfile {
    pub fn literate() -> Self {
        BehaviorProfile {
            sms_in_rate: 1.6,
            sms_out_rate: 0.7,
            voice_in_rate: 1.5,
            voice_out_rate: 1.5,
            voice_mean_duration_s: 95.0,
            mms_rate: 0.02,
            video_rate: 0.03,
            video_mean_duration_s: 180.0,
            data_rate: 1.2,
            data_mean_volume_bytes: 2_250_000.0,
            vas_rate: 0.08,
            contact_pool: 30,
            contact_decay: 0.85,
            place_pool: 7,
            home_share: 0.5,
            topup_mean_amount: 60.0,
            topup_mean_gap_days: 6.0,
            p_basic: 0.28,
            p_feature: 0.35,
            p_smart: 0.37,
        }
    }

    pub fn illiterate() -> Self {
        BehaviorProfile {
            sms_in_rate: 1.0,
            sms_out_rate: 0.6,
            voice_in_rate: 1.5,
            voice_out_rate: 1.5,
            voice_mean_duration_s: 95.0,
            mms_rate: 0.015,
            video_rate: 0.025,
            video_mean_duration_s: 180.0,
            data_rate: 1.0,
            data_mean_volume_bytes: 1_800_000.0,
            vas_rate: 0.07,
            contact_pool: 30,
            contact_decay: 0.82,
            place_pool: 5,
            home_share: 0.5,
            topup_mean_amount: 55.0,
            topup_mean_gap_days: 6.5,
            p_basic: 0.28,
            p_feature: 0.35,
            p_smart: 0.37,
        }
    }

    fn validate(&self, class: &str) -> Result<()> {
        let rates = [
            ("sms_in_rate", self.sms_in_rate),
            ("sms_out_rate", self.sms_out_rate),
            ("voice_in_rate", self.voice_in_rate),
            ("voice_out_rate", self.voice_out_rate),
            ("mms_rate", self.mms_rate),
            ("video_rate", self.video_rate),
            ("data_rate", self.data_rate),
            ("vas_rate", self.vas_rate),
            ("p_basic", self.p_basic),
            ("p_feature", self.p_feature),
            ("p_smart", self.p_smart),
        ];
        for (k, v) in rates {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{class}.{k} must be a non-negative number")));
            }
        }
        let means = [
            ("voice_mean_duration_s", self.voice_mean_duration_s),
            ("video_mean_duration_s", self.video_mean_duration_s),
            ("data_mean_volume_bytes", self.data_mean_volume_bytes),
            ("topup_mean_amount", self.topup_mean_amount),
            ("topup_mean_gap_days", self.topup_mean_gap_days),
        ];
        for (k, v) in means {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{class}.{k} must be positive")));
            }
        }
        if self.contact_pool == 0 || self.place_pool == 0 {
            return Err(Error::Config(format!("{class}: pool sizes must be at least 1")));
        }
        if !(self.contact_decay > 0.0 && self.contact_decay <= 1.0) {
            return Err(Error::Config(format!("{class}.contact_decay must be in (0, 1]")));
        }
        if !(self.home_share > 0.0 && self.home_share <= 1.0) {
            return Err(Error::Config(format!("{class}.home_share must be in (0, 1]")));
        }
        if self.p_basic + self.p_feature + self.p_smart <= 0.0 {
            return Err(Error::Config(format!("{class}: device-class weights are all zero")));
        }
        Ok(())
    }

    fn apply(&mut self, kv: &KeyValues, class: &str) -> Result<()> {
        let k = |name: &str| format!("{class}.{name}");
        kv.apply(&k("sms_in_rate"), &mut self.sms_in_rate)?;
        kv.apply(&k("sms_out_rate"), &mut self.sms_out_rate)?;
        kv.apply(&k("voice_in_rate"), &mut self.voice_in_rate)?;
        kv.apply(&k("voice_out_rate"), &mut self.voice_out_rate)?;
        kv.apply(&k("voice_mean_duration_s"), &mut self.voice_mean_duration_s)?;
        kv.apply(&k("mms_rate"), &mut self.mms_rate)?;
        kv.apply(&k("video_rate"), &mut self.video_rate)?;
        kv.apply(&k("video_mean_duration_s"), &mut self.video_mean_duration_s)?;
        kv.apply(&k("data_rate"), &mut self.data_rate)?;
        kv.apply(&k("data_mean_volume_bytes"), &mut self.data_mean_volume_bytes)?;
        kv.apply(&k("vas_rate"), &mut self.vas_rate)?;
        kv.apply(&k("contact_pool"), &mut self.contact_pool)?;
        kv.apply(&k("contact_decay"), &mut self.contact_decay)?;
        kv.apply(&k("place_pool"), &mut self.place_pool)?;
        kv.apply(&k("home_share"), &mut self.home_share)?;
        kv.apply(&k("topup_mean_amount"), &mut self.topup_mean_amount)?;
        kv.apply(&k("topup_mean_gap_days"), &mut self.topup_mean_gap_days)?;
        kv.apply(&k("p_basic"), &mut self.p_basic)?;
        kv.apply(&k("p_feature"), &mut self.p_feature)?;
        kv.apply(&k("p_smart"), &mut self.p_smart)?;
        Ok(())
    }
}

const PROFILE_KEYS: [&str; 20] = [
    "sms_in_rate",
    "sms_out_rate",
    "voice_in_rate",
    "voice_out_rate",
    "voice_mean_duration_s",
    "mms_rate",
    "video_rate",
    "video_mean_duration_s",
    "data_rate",
    "data_mean_volume_bytes",
    "vas_rate",
    "contact_pool",
    "contact_decay",
    "place_pool",
    "home_share",
    "topup_mean_amount",
    "topup_mean_gap_days",
    "p_basic",
    "p_feature",
    "p_smart",
];

const GLOBAL_KEYS: [&str; 17] = [
    "n_subscribers",
    "illiterate_prevalence",
    "observation_days",
    "window_start",
    "n_towers",
    "n_zones",
    "zone_illiteracy_weights",
    "zone_radius_km",
    "district_grid",
    "lon_min",
    "lon_max",
    "lat_min",
    "lat_max",
    "activity_sigma",
    "channel_sigma",
    "contact_decay_spread",
    "seed",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationConfig {
    pub n_subscribers: usize,
    pub illiterate_prevalence: f64,
    pub observation_days: u32,
    pub window_start: NaiveDate,
    pub n_towers: usize,
    pub n_zones: usize,
    /// One multiplier per zone; empty means the built-in pattern.
    pub zone_illiteracy_weights: Vec<f64>,
    pub zone_radius_km: f64,
    /// Districts per side of the square district grid.
    pub district_grid: usize,
    pub lon_min: f64,
    pub lon_max: f64,
    pub lat_min: f64,
    pub lat_max: f64,
    /// Log-scale spread of the per-subscriber activity multiplier.
    pub activity_sigma: f64,
    /// Log-scale spread of the per-subscriber, per-channel multiplier.
    pub channel_sigma: f64,
    /// Half-width of the uniform per-subscriber offset to `contact_decay`.
    pub contact_decay_spread: f64,
    pub seed: u64,
    pub illiterate: BehaviorProfile,
    pub literate: BehaviorProfile,
}

impl Default for PopulationConfig {
    fn default() -> Self {
        PopulationConfig {
            n_subscribers: 5000,
            illiterate_prevalence: 0.068,
            observation_days: 90,
            window_start: NaiveDate::from_ymd_opt(2016, 1, 4).expect("valid date"),
            n_towers: 200,
            n_zones: 8,
            zone_illiteracy_weights: Vec::new(),
            zone_radius_km: 1.6,
            district_grid: 2,
            lon_min: 90.33,
            lon_max: 90.48,
            lat_min: 23.70,
            lat_max: 23.85,
            activity_sigma: 0.2,
            channel_sigma: 0.35,
            contact_decay_spread: 0.1,
            seed: 42,
            illiterate: BehaviorProfile::illiterate(),
            literate: BehaviorProfile::literate(),
        }
    }
}

impl PopulationConfig {
    /// Every key accepted by [`PopulationConfig::from_kv`].
    pub fn known_keys() -> Vec<String> {
        let mut keys: Vec<String> = GLOBAL_KEYS.iter().map(|s| s.to_string()).collect();
        for class in ["illiterate", "literate"] {
            keys.extend(PROFILE_KEYS.iter().map(|k| format!("{class}.{k}")));
        }
        keys
    }

    /// Defaults overridden by `kv`; unknown keys are rejected.
    pub fn from_kv(kv: &KeyValues) -> Result<Self> {
        let known = Self::known_keys();
        let known: Vec<&str> = known.iter().map(String::as_str).collect();
        kv.reject_unknown(&known)?;
        let mut c = PopulationConfig::default();
        kv.apply("n_subscribers", &mut c.n_subscribers)?;
        kv.apply("illiterate_prevalence", &mut c.illiterate_prevalence)?;
        kv.apply("observation_days", &mut c.observation_days)?;
        kv.apply("window_start", &mut c.window_start)?;
        kv.apply("n_towers", &mut c.n_towers)?;
        kv.apply("n_zones", &mut c.n_zones)?;
        if let Some(v) = kv.get("zone_illiteracy_weights") {
            c.zone_illiteracy_weights = v
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Config(format!("key `zone_illiteracy_weights`: cannot parse `{v}`: {e}")))?;
        }
        kv.apply("zone_radius_km", &mut c.zone_radius_km)?;
        kv.apply("district_grid", &mut c.district_grid)?;
        kv.apply("lon_min", &mut c.lon_min)?;
        kv.apply("lon_max", &mut c.lon_max)?;
        kv.apply("lat_min", &mut c.lat_min)?;
        kv.apply("lat_max", &mut c.lat_max)?;
        kv.apply("activity_sigma", &mut c.activity_sigma)?;
        kv.apply("channel_sigma", &mut c.channel_sigma)?;
        kv.apply("contact_decay_spread", &mut c.contact_decay_spread)?;
        kv.apply("seed", &mut c.seed)?;
        c.illiterate.apply(kv, "illiterate")?;
        c.literate.apply(kv, "literate")?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_subscribers == 0 {
            return Err(Error::Config("n_subscribers must be positive".into()));
        }
        let p = self.illiterate_prevalence;
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Config("illiterate_prevalence must be in (0, 1)".into()));
        }
        if self.observation_days == 0 {
            return Err(Error::Config("observation_days must be positive".into()));
        }
        if self.n_towers == 0 || self.n_zones == 0 {
            return Err(Error::Config("n_towers and n_zones must be positive".into()));
        }
        if self.n_zones > self.n_towers {
            return Err(Error::Config("n_zones must not exceed n_towers".into()));
        }
        if !self.zone_illiteracy_weights.is_empty() {
            if self.zone_illiteracy_weights.len() != self.n_zones {
                return Err(Error::Config(format!(
                    "zone_illiteracy_weights has {} entries for {} zones",
                    self.zone_illiteracy_weights.len(),
                    self.n_zones
                )));
            }
            if self
                .zone_illiteracy_weights
                .iter()
                .any(|w| !(*w > 0.0 && w.is_finite()))
            {
                return Err(Error::Config("zone_illiteracy_weights must be positive".into()));
            }
        }
        if self.district_grid == 0 {
            return Err(Error::Config("district_grid must be at least 1".into()));
        }
        if !(self.zone_radius_km > 0.0) {
            return Err(Error::Config("zone_radius_km must be positive".into()));
        }
        if !(self.lon_min < self.lon_max && self.lat_min < self.lat_max)
            || self.lon_min < -180.0
            || self.lon_max > 180.0
            || self.lat_min < -90.0
            || self.lat_max > 90.0
        {
            return Err(Error::Config("bounding box is empty or out of range".into()));
        }
        if !(self.activity_sigma >= 0.0 && self.channel_sigma >= 0.0) {
            return Err(Error::Config("sigma values must be non-negative".into()));
        }
        if !(0.0..1.0).contains(&self.contact_decay_spread) {
            return Err(Error::Config("contact_decay_spread must be in [0, 1)".into()));
        }
        self.illiterate.validate("illiterate")?;
        self.literate.validate("literate")
    }

    /// Zone multipliers: the configured ones, or weight 12 on the first
    /// three zones and 1 elsewhere.
    pub fn zone_weights(&self) -> Vec<f64> {
        if !self.zone_illiteracy_weights.is_empty() {
            return self.zone_illiteracy_weights.clone();
        }
        (0..self.n_zones).map(|z| if z < 3 { 12.0 } else { 1.0 }).collect()
    }

    pub fn n_illiterate(&self) -> usize {
        (self.n_subscribers as f64 * self.illiterate_prevalence).round() as usize
    }

    pub fn profile(&self, illiterate: bool) -> &BehaviorProfile {
        if illiterate {
            &self.illiterate
        } else {
            &self.literate
        }
    }

    /// Every setting as a key-value document.
    pub fn to_kv(&self) -> KeyValues {
        let mut kv = KeyValues::default();
        kv.set("n_subscribers", self.n_subscribers);
        kv.set("illiterate_prevalence", self.illiterate_prevalence);
        kv.set("observation_days", self.observation_days);
        kv.set("window_start", self.window_start);
        kv.set("n_towers", self.n_towers);
        kv.set("n_zones", self.n_zones);
        let w: Vec<String> = self.zone_weights().iter().map(f64::to_string).collect();
        kv.set("zone_illiteracy_weights", w.join(","));
        kv.set("zone_radius_km", self.zone_radius_km);
        kv.set("district_grid", self.district_grid);
        kv.set("lon_min", self.lon_min);
        kv.set("lon_max", self.lon_max);
        kv.set("lat_min", self.lat_min);
        kv.set("lat_max", self.lat_max);
        kv.set("activity_sigma", self.activity_sigma);
        kv.set("channel_sigma", self.channel_sigma);
        kv.set("contact_decay_spread", self.contact_decay_spread);
        kv.set("seed", self.seed);
        for (class, p) in [("illiterate", &self.illiterate), ("literate", &self.literate)] {
            let v = serde_json::to_value(p).expect("profile serializes");
            for (k, val) in v.as_object().expect("profile is an object") {
                kv.set(&format!("{class}.{k}"), val);
            }
        }
        kv
    }
}
