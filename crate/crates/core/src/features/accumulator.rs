//! Per-subscriber running aggregates.
//!
//! Feature computation never holds raw events: each event is folded into the
//! subscriber's [`Activity`] as it streams past, so memory scales with the
//! number of subscribers, towers and contacts rather than with file size.

use std::collections::BTreeMap;

use chrono::Datelike;

use crate::ingest::{CdrEvent, Channel, Direction, ObservationWindow, TopUpEvent, TowerTable};

const DAY_S: i64 = 86_400;

/// Calendar blocks used for the weekly and monthly aggregates: ISO weeks
/// (Monday start) and 30-day blocks, both fully contained in the window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Calendar {
    pub window: ObservationWindow,
    first_week_day: i64,
    pub n_weeks: usize,
    pub n_months: usize,
}

impl Calendar {
    pub fn new(window: ObservationWindow) -> Self {
        // Windows start at midnight, so day indices line up with dates.
        let wd = i64::from(window.start.weekday().num_days_from_monday());
        let first_week_day = (7 - wd) % 7;
        let days = i64::from(window.days);
        let n_weeks = ((days - first_week_day).max(0) / 7) as usize;
        let n_months = (days / 30) as usize;
        Calendar {
            window,
            first_week_day,
            n_weeks,
            n_months,
        }
    }

    /// Day index since the window start, or `None` outside the window.
    fn day(&self, offset_s: i64) -> Option<i64> {
        (offset_s >= 0 && offset_s < i64::from(self.window.days) * DAY_S).then_some(offset_s / DAY_S)
    }

    pub fn week_of(&self, offset_s: i64) -> Option<usize> {
        let d = self.day(offset_s)? - self.first_week_day;
        if d < 0 {
            return None;
        }
        let w = (d / 7) as usize;
        (w < self.n_weeks).then_some(w)
    }

    pub fn month_of(&self, offset_s: i64) -> Option<usize> {
        let m = (self.day(offset_s)? / 30) as usize;
        (m < self.n_months).then_some(m)
    }
}

/// Running aggregates for one subscriber.
#[derive(Debug, Clone, PartialEq)]
pub struct Activity {
    /// `[direction][channel]` event counts.
    pub counts: [[u64; 6]; 2],
    /// `[direction][channel]` summed seconds (voice and video only).
    pub durations: [[u64; 6]; 2],
    /// `[direction]` summed DATA bytes.
    pub volumes: [u64; 2],
    /// `[direction][channel]` summed charges.
    pub charges: [[f64; 6]; 2],
    /// Tower index -> events.
    pub towers: BTreeMap<usize, u64>,
    /// Peer id -> `[in, out]` person-to-person events (VAS short codes are
    /// services, not contacts).
    pub peers: BTreeMap<String, [u64; 2]>,
    pub weekly_sms: Vec<u64>,
    pub weekly_data: Vec<u64>,
    /// `(seconds since window start, amount)` in arrival order.
    pub topups: Vec<(i64, f64)>,
    pub events: u64,
}

impl Activity {
    pub fn new(cal: &Calendar) -> Self {
        Activity {
            counts: [[0; 6]; 2],
            durations: [[0; 6]; 2],
            volumes: [0; 2],
            charges: [[0.0; 6]; 2],
            towers: BTreeMap::new(),
            peers: BTreeMap::new(),
            weekly_sms: vec![0; cal.n_weeks],
            weekly_data: vec![0; cal.n_weeks],
            topups: Vec::new(),
            events: 0,
        }
    }

    /// Folds one event in. Events outside the window are ignored and return
    /// `false`, as do events at towers absent from `towers`.
    pub fn add_event(&mut self, ev: &CdrEvent, cal: &Calendar, towers: &TowerTable) -> bool {
        let off = cal.window.offset_s(&ev.timestamp);
        if !cal.window.contains(&ev.timestamp) {
            return false;
        }
        let Some(tower) = towers.index_of(&ev.tower_id) else {
            return false;
        };
        let (d, c) = (ev.direction.index(), ev.channel.index());
        self.events += 1;
        self.counts[d][c] += 1;
        self.charges[d][c] += ev.charge;
        if let Some(s) = ev.duration_s {
            self.durations[d][c] += s;
        }
        if let Some(v) = ev.volume_bytes {
            self.volumes[d] += v;
        }
        *self.towers.entry(tower).or_insert(0) += 1;
        if let (Some(peer), false) = (&ev.peer_id, ev.channel == Channel::Vas) {
            match self.peers.get_mut(peer.as_str()) {
                Some(n) => n[d] += 1,
                None => {
                    let mut n = [0; 2];
                    n[d] = 1;
                    self.peers.insert(peer.clone(), n);
                }
            }
        }
        if let Some(w) = cal.week_of(off) {
            match ev.channel {
                Channel::Sms => self.weekly_sms[w] += 1,
                Channel::Data => self.weekly_data[w] += ev.volume_bytes.unwrap_or(0),
                _ => {}
            }
        }
        true
    }

    pub fn add_topup(&mut self, t: &TopUpEvent, cal: &Calendar) -> bool {
        if !cal.window.contains(&t.timestamp) {
            return false;
        }
        self.topups.push((cal.window.offset_s(&t.timestamp), t.amount));
        true
    }

    /// Combines two activities over disjoint event sets.
    pub fn merge(&mut self, other: &Activity) {
        for d in 0..2 {
            for c in 0..6 {
                self.counts[d][c] += other.counts[d][c];
                self.durations[d][c] += other.durations[d][c];
                self.charges[d][c] += other.charges[d][c];
            }
            self.volumes[d] += other.volumes[d];
        }
        for (t, n) in &other.towers {
            *self.towers.entry(*t).or_insert(0) += n;
        }
        for (p, n) in &other.peers {
            let e = self.peers.entry(p.clone()).or_insert([0; 2]);
            e[0] += n[0];
            e[1] += n[1];
        }
        for (a, b) in self.weekly_sms.iter_mut().zip(&other.weekly_sms) {
            *a += b;
        }
        for (a, b) in self.weekly_data.iter_mut().zip(&other.weekly_data) {
            *a += b;
        }
        self.topups.extend_from_slice(&other.topups);
        self.events += other.events;
    }

    pub fn count(&self, dir: Direction, ch: Channel) -> u64 {
        self.counts[dir.index()][ch.index()]
    }

    pub fn duration(&self, dir: Direction, ch: Channel) -> u64 {
        self.durations[dir.index()][ch.index()]
    }

    pub fn charge(&self, dir: Direction, ch: Channel) -> f64 {
        self.charges[dir.index()][ch.index()]
    }
}

/// Builds activities for a set of subscribers from event streams.
#[derive(Debug)]
pub struct ActivityBuilder<'a> {
    cal: Calendar,
    towers: &'a TowerTable,
    activities: BTreeMap<String, Activity>,
}

impl<'a> ActivityBuilder<'a> {
    pub fn new(window: ObservationWindow, towers: &'a TowerTable) -> Self {
        ActivityBuilder {
            cal: Calendar::new(window),
            towers,
            activities: BTreeMap::new(),
        }
    }

    pub fn calendar(&self) -> &Calendar {
        &self.cal
    }

    fn slot(&mut self, id: &str) -> &mut Activity {
        if !self.activities.contains_key(id) {
            self.activities.insert(id.to_string(), Activity::new(&self.cal));
        }
        self.activities.get_mut(id).expect("inserted above")
    }

    /// Registers a subscriber with no events yet.
    pub fn touch(&mut self, id: &str) {
        self.slot(id);
    }

    pub fn add_event(&mut self, ev: &CdrEvent) -> bool {
        let (cal, towers) = (self.cal, self.towers);
        self.slot(&ev.subscriber_id).add_event(ev, &cal, towers)
    }

    pub fn add_topup(&mut self, t: &TopUpEvent) -> bool {
        let cal = self.cal;
        self.slot(&t.subscriber_id).add_topup(t, &cal)
    }

    pub fn finish(self) -> BTreeMap<String, Activity> {
        self.activities
    }
}
