//! Keyed in-memory tables for the small input files.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use super::reader::*;
use super::records::*;
use crate::error::{Error, Result};
use crate::geo::LonLat;

/// Drains a reader into records and row errors. In strict mode the first row
/// error becomes a hard error.
pub fn drain<R: Read, T: CsvRecord>(reader: RecordReader<R, T>, opts: ParseOptions) -> Result<(Vec<T>, Vec<RowError>)> {
    let mut ok = Vec::new();
    let mut bad = Vec::new();
    for row in reader {
        match row {
            Ok(r) => ok.push(r),
            Err(e) if opts.strict => {
                return Err(Error::Row {
                    source_name: T::NAME.to_string(),
                    line: e.line,
                    message: e.message,
                })
            }
            Err(e) => bad.push(e),
        }
    }
    Ok((ok, bad))
}

pub fn open(path: &Path) -> Result<BufReader<File>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(BufReader::with_capacity(1 << 20, f))
}

/// Towers sorted by id; indices follow lexicographic id order.
#[derive(Debug, Clone, Default)]
pub struct TowerTable {
    towers: Vec<Tower>,
    index: HashMap<String, usize>,
}

impl TowerTable {
    /// Fails on a duplicate `tower_id`.
    pub fn new(mut towers: Vec<Tower>) -> Result<Self> {
        towers.sort_by(|a, b| a.tower_id.cmp(&b.tower_id));
        if let Some(w) = towers.windows(2).find(|w| w[0].tower_id == w[1].tower_id) {
            return Err(Error::DuplicateKey {
                source_name: Tower::NAME.to_string(),
                key: w[0].tower_id.clone(),
            });
        }
        let index = towers
            .iter()
            .enumerate()
            .map(|(i, t)| (t.tower_id.clone(), i))
            .collect();
        Ok(TowerTable { towers, index })
    }

    pub fn read<R: Read>(r: R, opts: ParseOptions) -> Result<(Self, Vec<RowError>)> {
        let (rows, errors) = drain(parse_towers(r, opts)?, opts)?;
        Ok((TowerTable::new(rows)?, errors))
    }

    pub fn index_of(&self, tower_id: &str) -> Option<usize> {
        self.index.get(tower_id).copied()
    }

    pub fn get(&self, idx: usize) -> &Tower {
        &self.towers[idx]
    }

    pub fn by_id(&self, tower_id: &str) -> Option<&Tower> {
        self.index_of(tower_id).map(|i| &self.towers[i])
    }

    pub fn position(&self, idx: usize) -> LonLat {
        let t = &self.towers[idx];
        LonLat::new(t.longitude, t.latitude)
    }

    pub fn len(&self) -> usize {
        self.towers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.towers.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Tower> {
        self.towers.iter()
    }
}

fn keyed<T, F>(rows: Vec<T>, key: F, name: &str) -> Result<BTreeMap<String, T>>
where
    F: Fn(&T) -> &str,
{
    let mut out = BTreeMap::new();
    for r in rows {
        let k = key(&r).to_string();
        if out.contains_key(&k) {
            return Err(Error::DuplicateKey {
                source_name: name.to_string(),
                key: k,
            });
        }
        out.insert(k, r);
    }
    Ok(out)
}

/// Labels keyed by subscriber; a repeated subscriber is a hard error.
pub fn read_labels<R: Read>(r: R, opts: ParseOptions) -> Result<(BTreeMap<String, LiteracyLabel>, Vec<RowError>)> {
    let (rows, errors) = drain(parse_labels(r, opts)?, opts)?;
    Ok((keyed(rows, |l| &l.subscriber_id, LiteracyLabel::NAME)?, errors))
}

/// Handsets keyed by subscriber; a repeated subscriber is a hard error.
pub fn read_handsets<R: Read>(r: R, opts: ParseOptions) -> Result<(BTreeMap<String, HandsetRecord>, Vec<RowError>)> {
    let (rows, errors) = drain(parse_handsets(r, opts)?, opts)?;
    Ok((keyed(rows, |h| &h.subscriber_id, HandsetRecord::NAME)?, errors))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_label_is_fatal() {
        let err = read_labels(
            "subscriber_id,literate\ns1,0\ns1,1\n".as_bytes(),
            ParseOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::DuplicateKey { ref key, .. } if key == "s1"));
    }

    #[test]
    fn duplicate_tower_is_fatal() {
        let err = TowerTable::read(
            "tower_id,longitude,latitude,district\nT1,1,1,A\nT1,2,2,B\n".as_bytes(),
            ParseOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::DuplicateKey { .. }));
    }

    #[test]
    fn towers_are_indexed_lexicographically() {
        let (t, _) = TowerTable::read(
            "tower_id,longitude,latitude,district\nT2,1,1,A\nT10,2,2,B\nT1,3,3,C\n".as_bytes(),
            ParseOptions::default(),
        )
        .unwrap();
        assert_eq!(t.index_of("T1"), Some(0));
        assert_eq!(t.index_of("T10"), Some(1));
        assert_eq!(t.index_of("T2"), Some(2));
    }

    #[test]
    fn strict_drain_fails_on_bad_row() {
        let opts = ParseOptions { strict: true };
        let err = read_labels("subscriber_id,literate\ns1,7\n".as_bytes(), opts).unwrap_err();
        assert!(matches!(err, Error::Row { line: 2, .. }));
    }
}
