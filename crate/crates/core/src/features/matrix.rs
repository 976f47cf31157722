use std::collections::HashMap;
use std::io::{Read, Write};

use super::catalog::{Catalog, Family, FeatureDef, Kind};
use super::partial::{FeatureValue, PartialFeatures};
use crate::error::{Error, Result};

/// Dense subscriber x feature matrix with an explicit missing mask.
///
/// Missing entries hold `NaN` as a sentinel and are flagged in the mask;
/// consumers go through the mask, never through the sentinel.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    catalog: Catalog,
    ids: Vec<String>,
    values: Vec<f64>,
    missing: Vec<bool>,
    /// Per column: category labels in code order (empty for numeric columns).
    categories: Vec<Vec<String>>,
}

impl FeatureMatrix {
    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn n_rows(&self) -> usize {
        self.ids.len()
    }

    pub fn n_cols(&self) -> usize {
        self.catalog.len()
    }

    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        let i = row * self.n_cols() + col;
        (!self.missing[i]).then(|| self.values[i])
    }

    pub fn is_missing(&self, row: usize, col: usize) -> bool {
        self.missing[row * self.n_cols() + col]
    }

    /// Raw row with `NaN` at missing entries.
    pub fn row(&self, row: usize) -> &[f64] {
        let n = self.n_cols();
        &self.values[row * n..(row + 1) * n]
    }

    pub fn row_of(&self, id: &str) -> Option<usize> {
        self.ids.binary_search_by(|s| s.as_str().cmp(id)).ok()
    }

    pub fn categories(&self, col: usize) -> &[String] {
        &self.categories[col]
    }

    pub fn column(&self, col: usize) -> impl Iterator<Item = Option<f64>> + '_ {
        (0..self.n_rows()).map(move |r| self.get(r, col))
    }

    /// Builds a matrix from raw parts; `None` entries are missing.
    pub fn from_rows(catalog: Catalog, rows: Vec<(String, Vec<Option<f64>>)>) -> Result<Self> {
        let n = catalog.len();
        let mut rows = rows;
        rows.sort_by(|a, b| a.0.cmp(&b.0));
        if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::DuplicateKey {
                source_name: "features".into(),
                key: w[0].0.clone(),
            });
        }
        let mut m = FeatureMatrix {
            categories: vec![Vec::new(); n],
            catalog,
            ids: Vec::with_capacity(rows.len()),
            values: Vec::with_capacity(rows.len() * n),
            missing: Vec::with_capacity(rows.len() * n),
        };
        for (id, vals) in rows {
            if vals.len() != n {
                return Err(Error::InvalidInput(format!(
                    "row `{id}` has {} values, catalog has {n}",
                    vals.len()
                )));
            }
            for v in vals {
                if let Some(x) = v {
                    if !x.is_finite() {
                        return Err(Error::InvalidInput(format!("non-finite value in row `{id}`")));
                    }
                }
                m.values.push(v.unwrap_or(f64::NAN));
                m.missing.push(v.is_none());
            }
            m.ids.push(id);
        }
        Ok(m)
    }

    /// Copy with one more column appended.
    pub fn with_column(&self, def: FeatureDef, values: &[Option<f64>]) -> Result<Self> {
        assert_eq!(values.len(), self.n_rows());
        let catalog = self.catalog.with_extra(def).map_err(Error::InvalidInput)?;
        let rows = (0..self.n_rows())
            .map(|r| {
                let mut v: Vec<Option<f64>> = (0..self.n_cols()).map(|c| self.get(r, c)).collect();
                v.push(values[r]);
                (self.ids[r].clone(), v)
            })
            .collect();
        let mut out = FeatureMatrix::from_rows(catalog, rows)?;
        out.categories[..self.n_cols()].clone_from_slice(&self.categories);
        Ok(out)
    }

    /// Copy with `f` applied to every present value of column `col`.
    pub fn map_column(&self, col: usize, f: impl Fn(f64) -> f64) -> Self {
        let mut out = self.clone();
        let n = self.n_cols();
        for r in 0..self.n_rows() {
            let i = r * n + col;
            if !out.missing[i] {
                out.values[i] = f(out.values[i]);
            }
        }
        out
    }

    /// CSV with header `subscriber_id,<catalog names>`; missing = empty.
    pub fn write_csv<W: Write>(&self, w: W, comment: Option<&str>) -> Result<()> {
        let mut w = w;
        if let Some(c) = comment {
            w.write_all(c.as_bytes()).map_err(|e| Error::io("features", e))?;
        }
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["subscriber_id"];
        header.extend(self.catalog.names());
        out.write_record(&header)?;
        let mut fields: Vec<String> = Vec::with_capacity(self.n_cols() + 1);
        for r in 0..self.n_rows() {
            fields.clear();
            fields.push(self.ids[r].clone());
            for c in 0..self.n_cols() {
                fields.push(self.get(r, c).map(|v| v.to_string()).unwrap_or_default());
            }
            out.write_record(&fields)?;
        }
        out.flush().map_err(|e| Error::io("features", e))?;
        Ok(())
    }

    /// Reads a matrix written by [`FeatureMatrix::write_csv`]; the header must
    /// match `catalog` exactly.
    pub fn read_csv<R: Read>(r: R, catalog: Catalog) -> Result<Self> {
        let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r);
        let header = rd.headers()?.clone();
        let expected: Vec<&str> = std::iter::once("subscriber_id").chain(catalog.names()).collect();
        let found: Vec<&str> = header.iter().collect();
        if found != expected {
            return Err(Error::CatalogMismatch {
                expected: catalog.version().to_string(),
                found: "feature file header".to_string(),
            });
        }
        let mut rows = Vec::new();
        for (i, rec) in rd.records().enumerate() {
            let rec = rec?;
            let vals = rec
                .iter()
                .skip(1)
                .map(|s| {
                    if s.is_empty() {
                        Ok(None)
                    } else {
                        s.parse::<f64>().map(Some).map_err(|_| Error::Row {
                            source_name: "features".into(),
                            line: i as u64 + 2,
                            message: format!("bad number `{s}`"),
                        })
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push((rec[0].to_string(), vals));
        }
        FeatureMatrix::from_rows(catalog, rows)
    }

    /// Sidecar listing `name,family,kind,categories` (categories `|`-joined
    /// in code order).
    pub fn write_catalog<W: Write>(&self, w: W, comment: Option<&str>) -> Result<()> {
        let mut w = w;
        if let Some(c) = comment {
            w.write_all(c.as_bytes()).map_err(|e| Error::io("catalog", e))?;
        }
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["name", "family", "kind", "categories"])?;
        for (i, d) in self.catalog.defs().iter().enumerate() {
            out.write_record([
                d.name.as_str(),
                d.family.token(),
                d.kind.token(),
                &self.categories[i].join("|"),
            ])?;
        }
        out.flush().map_err(|e| Error::io("catalog", e))?;
        Ok(())
    }
}

/// Reads a catalog sidecar.
pub fn read_catalog<R: Read>(r: R) -> Result<Catalog> {
    let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r);
    let mut defs = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let bad = || {
            Error::InvalidInput(format!(
                "bad catalog row `{}`",
                rec.iter().collect::<Vec<_>>().join(",")
            ))
        };
        defs.push(FeatureDef {
            name: rec.get(0).ok_or_else(bad)?.to_string(),
            family: rec.get(1).and_then(Family::parse).ok_or_else(bad)?,
            kind: rec.get(2).and_then(Kind::parse).ok_or_else(bad)?,
        });
    }
    Catalog::new(defs).map_err(Error::InvalidInput)
}

/// Lays per-subscriber partials out in catalog order, rows sorted by id.
///
/// Categorical labels are integer-encoded by order of first appearance in
/// that sorted row order.
pub fn assemble_matrix(partials: Vec<(String, PartialFeatures)>, catalog: &Catalog) -> Result<FeatureMatrix> {
    let n = catalog.len();
    let mut partials = partials;
    partials.sort_by(|a, b| a.0.cmp(&b.0));
    let index: HashMap<&str, usize> = catalog.names().enumerate().map(|(i, s)| (s, i)).collect();
    let mut dicts: Vec<Vec<String>> = vec![Vec::new(); n];
    let mut rows = Vec::with_capacity(partials.len());
    for (id, p) in partials {
        let mut vals = vec![None; n];
        for (name, v) in p.values {
            let Some(&c) = index.get(name.as_str()) else {
                return Err(Error::InvalidInput(format!(
                    "feature `{name}` is not in catalog {}",
                    catalog.version()
                )));
            };
            vals[c] = match v {
                FeatureValue::Numeric(x) => Some(x),
                FeatureValue::Missing => None,
                FeatureValue::Category(label) => {
                    if catalog.get(c).kind != Kind::Categorical {
                        return Err(Error::InvalidInput(format!(
                            "category given for numeric feature `{name}`"
                        )));
                    }
                    let d = &mut dicts[c];
                    let code = match d.iter().position(|s| *s == label) {
                        Some(k) => k,
                        None => {
                            d.push(label);
                            d.len() - 1
                        }
                    };
                    Some(code as f64)
                }
            };
        }
        rows.push((id, vals));
    }
    let mut m = FeatureMatrix::from_rows(catalog.clone(), rows)?;
    m.categories = dicts;
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn partial(vals: &[(&str, FeatureValue)]) -> PartialFeatures {
        PartialFeatures {
            values: vals.iter().map(|(n, v)| (n.to_string(), v.clone())).collect(),
        }
    }

    #[test]
    fn shape_and_sorted_rows() {
        let cat = Catalog::default_catalog();
        let m = assemble_matrix(
            vec![
                ("s2".into(), partial(&[("degree", FeatureValue::Numeric(2.0))])),
                ("s1".into(), partial(&[("degree", FeatureValue::Numeric(1.0))])),
            ],
            &cat,
        )
        .unwrap();
        assert_eq!((m.n_rows(), m.n_cols()), (2, cat.len()));
        assert_eq!(m.ids(), &["s1".to_string(), "s2".to_string()]);
        let c = cat.index_of("degree").unwrap();
        assert_eq!(m.get(0, c), Some(1.0));
        assert!(m.is_missing(0, 0));
        assert!(m.row(0)[0].is_nan());
    }

    #[test]
    fn unknown_feature_is_rejected() {
        let cat = Catalog::default_catalog();
        let err = assemble_matrix(
            vec![("s1".into(), partial(&[("shoe_size", FeatureValue::Numeric(9.0))]))],
            &cat,
        )
        .unwrap_err();
        assert!(err.to_string().contains("shoe_size"));
    }

    #[test]
    fn categories_encode_by_first_appearance() {
        let cat = Catalog::default_catalog();
        let cls = |s: &str| partial(&[("handset_device_class", FeatureValue::Category(s.into()))]);
        let m = assemble_matrix(
            vec![
                ("s3".into(), cls("BASIC")),
                ("s1".into(), cls("SMART")),
                ("s2".into(), cls("BASIC")),
            ],
            &cat,
        )
        .unwrap();
        let c = cat.index_of("handset_device_class").unwrap();
        let codes: Vec<_> = m.column(c).collect();
        assert_eq!(codes, vec![Some(0.0), Some(1.0), Some(1.0)]);
        assert_eq!(m.categories(c), &["SMART".to_string(), "BASIC".to_string()]);
    }

    #[test]
    fn csv_round_trip() {
        let cat = Catalog::default_catalog();
        let m = assemble_matrix(
            vec![
                ("a".into(), partial(&[("degree", FeatureValue::Numeric(0.1 + 0.2))])),
                ("b".into(), partial(&[("home_share", FeatureValue::Numeric(1.0 / 3.0))])),
            ],
            &cat,
        )
        .unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf, Some("# test\n")).unwrap();
        let mut side = Vec::new();
        m.write_catalog(&mut side, None).unwrap();
        let back = FeatureMatrix::read_csv(buf.as_slice(), read_catalog(side.as_slice()).unwrap()).unwrap();
        for r in 0..2 {
            for c in 0..cat.len() {
                assert_eq!(back.get(r, c), m.get(r, c));
            }
        }
    }
}
