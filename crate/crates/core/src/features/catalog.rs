use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Family {
    Financial,
    Mobility,
    Social,
}

impl Family {
    pub fn token(self) -> &'static str {
        match self {
            Family::Financial => "FINANCIAL",
            Family::Mobility => "MOBILITY",
            Family::Social => "SOCIAL",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Family::Financial, Family::Mobility, Family::Social]
            .into_iter()
            .find(|f| f.token() == s)
    }
}

/// Categorical features are split by equality, never by order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Kind {
    Numeric,
    Categorical,
}

impl Kind {
    pub fn token(self) -> &'static str {
        match self {
            Kind::Numeric => "NUMERIC",
            Kind::Categorical => "CATEGORICAL",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "NUMERIC" => Some(Kind::Numeric),
            "CATEGORICAL" => Some(Kind::Categorical),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureDef {
    pub name: String,
    pub family: Family,
    pub kind: Kind,
}

/// Ordered, versioned list of features.
///
/// The version string is derived from the names and kinds, so two catalogs
/// compare equal exactly when their columns line up.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Catalog {
    defs: Vec<FeatureDef>,
    version: String,
}

use Family::*;
use Kind::*;

const DEFAULT: &[(&str, Family, Kind)] = &[
    // Airtime purchases.
    ("recharge_count", Financial, Numeric),
    ("recharge_amount_mean", Financial, Numeric),
    ("recharge_amount_median", Financial, Numeric),
    ("recharge_amount_var", Financial, Numeric),
    ("recharge_amount_cov", Financial, Numeric),
    ("recharge_amount_min", Financial, Numeric),
    ("recharge_amount_max", Financial, Numeric),
    ("recharge_fraction_lowest", Financial, Numeric),
    ("recharge_fraction_highest", Financial, Numeric),
    ("spending_speed", Financial, Numeric),
    ("recharge_gap_mean_days", Financial, Numeric),
    ("recharge_weekly_mean", Financial, Numeric),
    ("recharge_weekly_median", Financial, Numeric),
    ("recharge_weekly_var", Financial, Numeric),
    ("recharge_monthly_mean", Financial, Numeric),
    ("recharge_monthly_median", Financial, Numeric),
    ("recharge_monthly_var", Financial, Numeric),
    // Revenue.
    ("charge_out_voice", Financial, Numeric),
    ("charge_out_sms", Financial, Numeric),
    ("charge_out_mms", Financial, Numeric),
    ("charge_out_video", Financial, Numeric),
    ("charge_out_data", Financial, Numeric),
    ("charge_out_vas", Financial, Numeric),
    ("charge_in_voice", Financial, Numeric),
    ("charge_in_sms", Financial, Numeric),
    ("charge_in_mms", Financial, Numeric),
    ("charge_in_video", Financial, Numeric),
    ("charge_in_data", Financial, Numeric),
    ("charge_in_vas", Financial, Numeric),
    ("charge_roaming", Financial, Numeric),
    ("charge_total", Financial, Numeric),
    // Handset.
    ("handset_manufacturer", Financial, Categorical),
    ("handset_brand", Financial, Categorical),
    ("handset_camera", Financial, Categorical),
    ("handset_device_class", Financial, Categorical),
    // Mobility.
    ("home_longitude", Mobility, Numeric),
    ("home_latitude", Mobility, Numeric),
    ("home_district", Mobility, Categorical),
    ("home_share", Mobility, Numeric),
    ("places_visited", Mobility, Numeric),
    ("places_entropy", Mobility, Numeric),
    ("radius_of_gyration_km", Mobility, Numeric),
    ("districts_visited", Mobility, Numeric),
    // Social network.
    ("degree", Social, Numeric),
    ("degree_in", Social, Numeric),
    ("degree_out", Social, Numeric),
    ("interactions_per_contact", Social, Numeric),
    ("contact_entropy", Social, Numeric),
    // General usage.
    ("voice_in_count", Social, Numeric),
    ("voice_out_count", Social, Numeric),
    ("sms_in_count", Social, Numeric),
    ("sms_out_count", Social, Numeric),
    ("mms_in_count", Social, Numeric),
    ("mms_out_count", Social, Numeric),
    ("video_in_count", Social, Numeric),
    ("video_out_count", Social, Numeric),
    ("data_in_count", Social, Numeric),
    ("data_out_count", Social, Numeric),
    ("vas_in_count", Social, Numeric),
    ("vas_out_count", Social, Numeric),
    ("voice_in_duration", Social, Numeric),
    ("voice_out_duration", Social, Numeric),
    ("video_in_duration", Social, Numeric),
    ("video_out_duration", Social, Numeric),
    ("data_volume_in", Social, Numeric),
    ("data_volume_out", Social, Numeric),
    ("internet_volume", Social, Numeric),
    ("sms_weekly_mean", Social, Numeric),
    ("sms_weekly_median", Social, Numeric),
    ("sms_weekly_var", Social, Numeric),
    ("internet_weekly_mean", Social, Numeric),
    ("internet_weekly_median", Social, Numeric),
    ("internet_weekly_var", Social, Numeric),
    ("total_events", Social, Numeric),
];

impl Catalog {
    pub fn new(defs: Vec<FeatureDef>) -> Result<Self, String> {
        for (i, d) in defs.iter().enumerate() {
            if defs[..i].iter().any(|e| e.name == d.name) {
                return Err(format!("duplicate feature name `{}`", d.name));
            }
        }
        let mut h = Sha256::new();
        for d in &defs {
            h.update(d.name.as_bytes());
            h.update([0u8]);
            h.update(d.kind.token().as_bytes());
            h.update([0u8]);
        }
        let digest = h.finalize();
        let version = format!(
            "catalog-{}",
            digest[..4].iter().map(|b| format!("{b:02x}")).collect::<String>()
        );
        Ok(Catalog { defs, version })
    }

    pub fn default_catalog() -> Self {
        Catalog::new(
            DEFAULT
                .iter()
                .map(|&(name, family, kind)| FeatureDef {
                    name: name.to_string(),
                    family,
                    kind,
                })
                .collect(),
        )
        .expect("default catalog names are unique")
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn len(&self) -> usize {
        self.defs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.defs.is_empty()
    }

    pub fn defs(&self) -> &[FeatureDef] {
        &self.defs
    }

    pub fn get(&self, i: usize) -> &FeatureDef {
        &self.defs[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.defs.iter().position(|d| d.name == name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.defs.iter().map(|d| d.name.as_str())
    }

    pub fn kinds(&self) -> Vec<Kind> {
        self.defs.iter().map(|d| d.kind).collect()
    }

    /// Copy with one extra column appended.
    pub fn with_extra(&self, def: FeatureDef) -> Result<Self, String> {
        let mut defs = self.defs.clone();
        defs.push(def);
        Catalog::new(defs)
    }
}
