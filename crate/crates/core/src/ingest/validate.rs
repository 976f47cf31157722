//! Referential checks across a parsed bundle.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Duration, NaiveDate, Utc};
use serde::{Deserialize, Serialize};

use super::records::*;

/// Half-open observation window `[start, start + days)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservationWindow {
    pub start: DateTime<Utc>,
    pub days: u32,
}

impl ObservationWindow {
    pub fn new(start: NaiveDate, days: u32) -> Self {
        ObservationWindow {
            start: start.and_hms_opt(0, 0, 0).expect("midnight").and_utc(),
            days,
        }
    }

    pub fn end(&self) -> DateTime<Utc> {
        self.start + Duration::days(i64::from(self.days))
    }

    pub fn contains(&self, t: &DateTime<Utc>) -> bool {
        *t >= self.start && *t < self.end()
    }

    /// Seconds since the window start.
    pub fn offset_s(&self, t: &DateTime<Utc>) -> i64 {
        (*t - self.start).num_seconds()
    }
}

/// Problems found by [`BundleValidator`]. Only `missing_towers` blocks the
/// pipeline.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub missing_towers: Vec<String>,
    pub unlabeled_subscribers: Vec<String>,
    pub zero_event_subscribers: Vec<String>,
    pub out_of_window_events: u64,
    pub out_of_window_topups: u64,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self == &ValidationReport::default()
    }

    pub fn blocks_pipeline(&self) -> bool {
        !self.missing_towers.is_empty()
    }
}

/// Accumulates the referential checks while events stream past.
#[derive(Debug)]
pub struct BundleValidator {
    window: ObservationWindow,
    tower_ids: BTreeSet<String>,
    missing_towers: BTreeSet<String>,
    event_subscribers: BTreeSet<String>,
    out_of_window_events: u64,
    out_of_window_topups: u64,
}

impl BundleValidator {
    pub fn new<'a>(window: ObservationWindow, towers: impl IntoIterator<Item = &'a Tower>) -> Self {
        BundleValidator {
            window,
            tower_ids: towers.into_iter().map(|t| t.tower_id.clone()).collect(),
            missing_towers: BTreeSet::new(),
            event_subscribers: BTreeSet::new(),
            out_of_window_events: 0,
            out_of_window_topups: 0,
        }
    }

    pub fn observe_event(&mut self, ev: &CdrEvent) {
        if !self.tower_ids.contains(&ev.tower_id) && !self.missing_towers.contains(&ev.tower_id) {
            self.missing_towers.insert(ev.tower_id.clone());
        }
        if !self.event_subscribers.contains(&ev.subscriber_id) {
            self.event_subscribers.insert(ev.subscriber_id.clone());
        }
        if !self.window.contains(&ev.timestamp) {
            self.out_of_window_events += 1;
        }
    }

    pub fn observe_topup(&mut self, t: &TopUpEvent) {
        if !self.window.contains(&t.timestamp) {
            self.out_of_window_topups += 1;
        }
    }

    /// `labels` maps subscriber id to label; handsets carry no references
    /// worth checking beyond their own uniqueness.
    pub fn finish<V>(self, labels: &BTreeMap<String, V>) -> ValidationReport {
        ValidationReport {
            missing_towers: self.missing_towers.into_iter().collect(),
            unlabeled_subscribers: self
                .event_subscribers
                .iter()
                .filter(|s| !labels.contains_key(*s))
                .cloned()
                .collect(),
            zero_event_subscribers: labels
                .keys()
                .filter(|s| !self.event_subscribers.contains(*s))
                .cloned()
                .collect(),
            out_of_window_events: self.out_of_window_events,
            out_of_window_topups: self.out_of_window_topups,
        }
    }
}

/// Whole-bundle convenience wrapper over [`BundleValidator`].
pub fn validate_bundle<'a>(
    window: ObservationWindow,
    events: impl IntoIterator<Item = &'a CdrEvent>,
    topups: impl IntoIterator<Item = &'a TopUpEvent>,
    towers: &[Tower],
    labels: &[LiteracyLabel],
) -> ValidationReport {
    let mut v = BundleValidator::new(window, towers);
    for e in events {
        v.observe_event(e);
    }
    for t in topups {
        v.observe_topup(t);
    }
    let labels: BTreeMap<String, bool> = labels.iter().map(|l| (l.subscriber_id.clone(), l.literate)).collect();
    v.finish(&labels)
}
