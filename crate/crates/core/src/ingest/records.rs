use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, NaiveDateTime, Utc};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    In,
    Out,
}

impl Direction {
    pub const ALL: [Direction; 2] = [Direction::In, Direction::Out];

    pub fn token(self) -> &'static str {
        match self {
            Direction::In => "IN",
            Direction::Out => "OUT",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Accepts the canonical `IN`/`OUT` and the one-letter `I`/`O` forms.
impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "I" | "IN" => Ok(Direction::In),
            "O" | "OUT" => Ok(Direction::Out),
            _ => Err(format!("bad direction `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Channel {
    Voice,
    Sms,
    Mms,
    Video,
    Data,
    Vas,
}

impl Channel {
    pub const ALL: [Channel; 6] = [
        Channel::Voice,
        Channel::Sms,
        Channel::Mms,
        Channel::Video,
        Channel::Data,
        Channel::Vas,
    ];

    pub fn token(self) -> &'static str {
        match self {
            Channel::Voice => "VOICE",
            Channel::Sms => "SMS",
            Channel::Mms => "MMS",
            Channel::Video => "VIDEO",
            Channel::Data => "DATA",
            Channel::Vas => "VAS",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Voice and video carry a duration.
    pub fn has_duration(self) -> bool {
        matches!(self, Channel::Voice | Channel::Video)
    }

    /// Every channel except DATA names a counterpart.
    pub fn has_peer(self) -> bool {
        self != Channel::Data
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Channel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Channel::ALL
            .into_iter()
            .find(|c| c.token() == s)
            .ok_or_else(|| format!("bad channel `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DeviceClass {
    Basic,
    Feature,
    Smart,
}

impl DeviceClass {
    pub const ALL: [DeviceClass; 3] = [DeviceClass::Basic, DeviceClass::Feature, DeviceClass::Smart];

    pub fn token(self) -> &'static str {
        match self {
            DeviceClass::Basic => "BASIC",
            DeviceClass::Feature => "FEATURE",
            DeviceClass::Smart => "SMART",
        }
    }
}

impl FromStr for DeviceClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DeviceClass::ALL
            .into_iter()
            .find(|c| c.token() == s)
            .ok_or_else(|| format!("bad device_class `{s}`"))
    }
}

/// One communication event.
#[derive(Debug, Clone, PartialEq)]
pub struct CdrEvent {
    pub subscriber_id: String,
    pub timestamp: DateTime<Utc>,
    pub direction: Direction,
    pub channel: Channel,
    pub peer_id: Option<String>,
    pub duration_s: Option<u64>,
    pub volume_bytes: Option<u64>,
    pub tower_id: String,
    pub charge: f64,
}

impl CdrEvent {
    /// Checks the channel-dependent optional fields and the charge sign.
    pub fn check(&self) -> Result<(), String> {
        let ch = self.channel;
        match (ch.has_peer(), &self.peer_id) {
            (false, Some(_)) => return Err(format!("peer_id must be empty for {ch}")),
            (true, None) => return Err(format!("peer_id is required for {ch}")),
            _ => {}
        }
        match (ch.has_duration(), self.duration_s) {
            (false, Some(_)) => return Err(format!("duration_s must be empty for {ch}")),
            (true, None) => return Err(format!("duration_s is required for {ch}")),
            _ => {}
        }
        match (ch == Channel::Data, self.volume_bytes) {
            (false, Some(_)) => return Err(format!("volume_bytes must be empty for {ch}")),
            (true, None) => return Err("volume_bytes is required for DATA".to_string()),
            _ => {}
        }
        if !(self.charge >= 0.0 && self.charge.is_finite()) {
            return Err("charge must be non-negative".to_string());
        }
        Ok(())
    }
}

/// One airtime recharge.
#[derive(Debug, Clone, PartialEq)]
pub struct TopUpEvent {
    pub subscriber_id: String,
    pub timestamp: DateTime<Utc>,
    pub amount: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tower {
    pub tower_id: String,
    pub longitude: f64,
    pub latitude: f64,
    pub district: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HandsetRecord {
    pub subscriber_id: String,
    pub manufacturer: String,
    pub brand: String,
    pub camera_enabled: bool,
    pub device_class: DeviceClass,
}

/// `literate == false` is the positive (illiterate) class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiteracyLabel {
    pub subscriber_id: String,
    pub literate: bool,
}

impl LiteracyLabel {
    pub fn is_illiterate(&self) -> bool {
        !self.literate
    }
}

const TS_FORMAT: &str = "%Y-%m-%dT%H:%M:%SZ";

/// Parses `YYYY-MM-DDTHH:MM:SSZ`.
pub fn parse_timestamp(s: &str) -> Result<DateTime<Utc>, String> {
    if !s.ends_with('Z') {
        return Err(format!("timestamp `{s}` must be UTC with trailing Z"));
    }
    NaiveDateTime::parse_from_str(s, TS_FORMAT)
        .map(|t| t.and_utc())
        .map_err(|e| format!("bad timestamp `{s}`: {e}"))
}

pub fn format_timestamp(t: &DateTime<Utc>) -> String {
    t.format(TS_FORMAT).to_string()
}
