//! Single-pass CSV readers and writers for the five input schemas.

use std::io::{Read, Write};

use csv::StringRecord;

use super::records::*;
use crate::error::{Error, Result};

/// Row-level failure; the row is consumed and reported, never emitted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowError {
    /// 1-based line number in the source file.
    pub line: u64,
    pub message: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseOptions {
    /// Stop at the first bad row.
    pub strict: bool,
}

/// A record type with a fixed CSV header.
pub trait CsvRecord: Sized {
    const HEADER: &'static [&'static str];
    const NAME: &'static str;

    fn from_record(rec: &StringRecord) -> Result<Self, String>;

    fn write_fields(&self, out: &mut Vec<String>);
}

fn opt_str(s: &str) -> Option<String> {
    (!s.is_empty()).then(|| s.to_string())
}

fn opt_u64(s: &str, field: &str) -> Result<Option<u64>, String> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse()
        .map(Some)
        .map_err(|_| format!("{field} must be a non-negative integer, found `{s}`"))
}

fn decimal(s: &str, field: &str) -> Result<f64, String> {
    let v: f64 = s
        .parse()
        .map_err(|_| format!("{field} must be a decimal number, found `{s}`"))?;
    if !v.is_finite() {
        return Err(format!("{field} must be finite"));
    }
    Ok(v)
}

fn required<'a>(s: &'a str, field: &str) -> Result<&'a str, String> {
    if s.is_empty() {
        Err(format!("{field} is required"))
    } else {
        Ok(s)
    }
}

fn fmt_opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

impl CsvRecord for CdrEvent {
    const HEADER: &'static [&'static str] = &[
        "subscriber_id",
        "timestamp",
        "direction",
        "channel",
        "peer_id",
        "duration_s",
        "volume_bytes",
        "tower_id",
        "charge",
    ];
    const NAME: &'static str = "cdr";

    fn from_record(r: &StringRecord) -> Result<Self, String> {
        let ev = CdrEvent {
            subscriber_id: required(&r[0], "subscriber_id")?.to_string(),
            timestamp: parse_timestamp(&r[1])?,
            direction: r[2].parse()?,
            channel: r[3].parse()?,
            peer_id: opt_str(&r[4]),
            duration_s: opt_u64(&r[5], "duration_s")?,
            volume_bytes: opt_u64(&r[6], "volume_bytes")?,
            tower_id: required(&r[7], "tower_id")?.to_string(),
            charge: decimal(&r[8], "charge")?,
        };
        ev.check()?;
        Ok(ev)
    }

    fn write_fields(&self, out: &mut Vec<String>) {
        out.extend([
            self.subscriber_id.clone(),
            format_timestamp(&self.timestamp),
            self.direction.token().to_string(),
            self.channel.token().to_string(),
            self.peer_id.clone().unwrap_or_default(),
            fmt_opt(&self.duration_s),
            fmt_opt(&self.volume_bytes),
            self.tower_id.clone(),
            self.charge.to_string(),
        ]);
    }
}

impl CsvRecord for TopUpEvent {
    const HEADER: &'static [&'static str] = &["subscriber_id", "timestamp", "amount"];
    const NAME: &'static str = "topups";

    fn from_record(r: &StringRecord) -> Result<Self, String> {
        let amount = decimal(&r[2], "amount")?;
        if amount <= 0.0 {
            return Err("amount must be positive".to_string());
        }
        Ok(TopUpEvent {
            subscriber_id: required(&r[0], "subscriber_id")?.to_string(),
            timestamp: parse_timestamp(&r[1])?,
            amount,
        })
    }

    fn write_fields(&self, out: &mut Vec<String>) {
        out.extend([
            self.subscriber_id.clone(),
            format_timestamp(&self.timestamp),
            self.amount.to_string(),
        ]);
    }
}

impl CsvRecord for Tower {
    const HEADER: &'static [&'static str] = &["tower_id", "longitude", "latitude", "district"];
    const NAME: &'static str = "towers";

    fn from_record(r: &StringRecord) -> Result<Self, String> {
        let longitude = decimal(&r[1], "longitude")?;
        let latitude = decimal(&r[2], "latitude")?;
        if !(-180.0..=180.0).contains(&longitude) {
            return Err(format!("longitude {longitude} out of range"));
        }
        if !(-90.0..=90.0).contains(&latitude) {
            return Err(format!("latitude {latitude} out of range"));
        }
        Ok(Tower {
            tower_id: required(&r[0], "tower_id")?.to_string(),
            longitude,
            latitude,
            district: r[3].to_string(),
        })
    }

    fn write_fields(&self, out: &mut Vec<String>) {
        out.extend([
            self.tower_id.clone(),
            self.longitude.to_string(),
            self.latitude.to_string(),
            self.district.clone(),
        ]);
    }
}

fn bool01(s: &str, field: &str) -> Result<bool, String> {
    match s {
        "0" => Ok(false),
        "1" => Ok(true),
        _ => Err(format!("{field} must be 0 or 1, found `{s}`")),
    }
}

impl CsvRecord for HandsetRecord {
    const HEADER: &'static [&'static str] = &[
        "subscriber_id",
        "manufacturer",
        "brand",
        "camera_enabled",
        "device_class",
    ];
    const NAME: &'static str = "handsets";

    fn from_record(r: &StringRecord) -> Result<Self, String> {
        Ok(HandsetRecord {
            subscriber_id: required(&r[0], "subscriber_id")?.to_string(),
            manufacturer: r[1].to_string(),
            brand: r[2].to_string(),
            camera_enabled: bool01(&r[3], "camera_enabled")?,
            device_class: r[4].parse()?,
        })
    }

    fn write_fields(&self, out: &mut Vec<String>) {
        out.extend([
            self.subscriber_id.clone(),
            self.manufacturer.clone(),
            self.brand.clone(),
            u8::from(self.camera_enabled).to_string(),
            self.device_class.token().to_string(),
        ]);
    }
}

impl CsvRecord for LiteracyLabel {
    const HEADER: &'static [&'static str] = &["subscriber_id", "literate"];
    const NAME: &'static str = "labels";

    fn from_record(r: &StringRecord) -> Result<Self, String> {
        Ok(LiteracyLabel {
            subscriber_id: required(&r[0], "subscriber_id")?.to_string(),
            literate: bool01(&r[1], "literate")?,
        })
    }

    fn write_fields(&self, out: &mut Vec<String>) {
        out.extend([self.subscriber_id.clone(), u8::from(self.literate).to_string()]);
    }
}

/// Streaming reader yielding one `Result` per data row, in file order.
///
/// Lines starting with `#` before or between rows are provenance comments and
/// are skipped. In strict mode the iterator ends after the first row error.
pub struct RecordReader<R: Read, T: CsvRecord> {
    inner: csv::Reader<R>,
    raw: StringRecord,
    strict: bool,
    done: bool,
    rows: u64,
    errors: u64,
    _marker: std::marker::PhantomData<T>,
}

impl<R: Read, T: CsvRecord> RecordReader<R, T> {
    /// Fails if the header does not match `T::HEADER` exactly.
    pub fn new(reader: R, opts: ParseOptions) -> Result<Self> {
        let mut inner = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .comment(Some(b'#'))
            .from_reader(reader);
        let header = inner.headers()?.clone();
        let found: Vec<&str> = header.iter().collect();
        if found != T::HEADER {
            return Err(Error::Header {
                path: T::NAME.to_string(),
                expected: T::HEADER.join(","),
                found: found.join(","),
            });
        }
        Ok(RecordReader {
            inner,
            raw: StringRecord::new(),
            strict: opts.strict,
            done: false,
            rows: 0,
            errors: 0,
            _marker: std::marker::PhantomData,
        })
    }

    pub fn rows_read(&self) -> u64 {
        self.rows
    }

    pub fn errors_seen(&self) -> u64 {
        self.errors
    }

    fn decode(&self) -> Result<T, String> {
        if self.raw.len() != T::HEADER.len() {
            return Err(format!("expected {} fields, found {}", T::HEADER.len(), self.raw.len()));
        }
        T::from_record(&self.raw)
    }
}

impl<R: Read, T: CsvRecord> Iterator for RecordReader<R, T> {
    type Item = Result<T, RowError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        match self.inner.read_record(&mut self.raw) {
            Ok(false) => {
                self.done = true;
                None
            }
            Ok(true) => {
                self.rows += 1;
                let line = self.raw.position().map_or(0, |p| p.line());
                let out = self.decode().map_err(|message| RowError { line, message });
                if out.is_err() {
                    self.errors += 1;
                    self.done = self.strict;
                }
                Some(out)
            }
            Err(e) => {
                self.rows += 1;
                self.errors += 1;
                // Encoding errors are confined to the row; anything else
                // leaves the stream position unknown.
                let recoverable = matches!(e.kind(), csv::ErrorKind::Utf8 { .. });
                self.done = self.strict || !recoverable;
                let line = e.position().map_or(0, |p| p.line());
                Some(Err(RowError {
                    line,
                    message: e.to_string(),
                }))
            }
        }
    }
}

pub fn parse_cdr<R: Read>(r: R, opts: ParseOptions) -> Result<RecordReader<R, CdrEvent>> {
    RecordReader::new(r, opts)
}

pub fn parse_topups<R: Read>(r: R, opts: ParseOptions) -> Result<RecordReader<R, TopUpEvent>> {
    RecordReader::new(r, opts)
}

pub fn parse_towers<R: Read>(r: R, opts: ParseOptions) -> Result<RecordReader<R, Tower>> {
    RecordReader::new(r, opts)
}

pub fn parse_handsets<R: Read>(r: R, opts: ParseOptions) -> Result<RecordReader<R, HandsetRecord>> {
    RecordReader::new(r, opts)
}

pub fn parse_labels<R: Read>(r: R, opts: ParseOptions) -> Result<RecordReader<R, LiteracyLabel>> {
    RecordReader::new(r, opts)
}

/// Writes records under their canonical header, optionally preceded by a
/// `#` comment line.
pub struct RecordWriter<W: Write, T: CsvRecord> {
    inner: csv::Writer<W>,
    fields: Vec<String>,
    _marker: std::marker::PhantomData<T>,
}

impl<W: Write, T: CsvRecord> RecordWriter<W, T> {
    pub fn new(mut w: W, comment: Option<&str>) -> Result<Self> {
        if let Some(c) = comment {
            let c = c.trim_end_matches('\n');
            writeln!(w, "{c}").map_err(|e| Error::io(T::NAME, e))?;
        }
        let mut inner = csv::WriterBuilder::new().from_writer(w);
        inner.write_record(T::HEADER)?;
        Ok(RecordWriter {
            inner,
            fields: Vec::with_capacity(T::HEADER.len()),
            _marker: std::marker::PhantomData,
        })
    }

    pub fn write(&mut self, rec: &T) -> Result<()> {
        self.fields.clear();
        rec.write_fields(&mut self.fields);
        self.inner.write_record(&self.fields)?;
        Ok(())
    }

    pub fn finish(self) -> Result<W> {
        self.inner.into_inner().map_err(|e| Error::io(T::NAME, e.into_error()))
    }
}
