//! GeoJSON and CSV renderings of a surface.

use std::io::Write;

use serde_json::{json, Map, Value};

use super::idw::Surface;
use crate::error::{Error, Result};
use crate::provenance::Provenance;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfaceFormat {
    GeoJson,
    Csv,
}

impl SurfaceFormat {
    pub fn extension(self) -> &'static str {
        match self {
            SurfaceFormat::GeoJson => "geojson",
            SurfaceFormat::Csv => "csv",
        }
    }
}

impl std::str::FromStr for SurfaceFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "geojson" => Ok(SurfaceFormat::GeoJson),
            "csv" => Ok(SurfaceFormat::Csv),
            _ => Err(format!("unknown surface format `{s}` (expected geojson or csv)")),
        }
    }
}

/// GeoJSON FeatureCollection with one polygon per cell.
pub fn surface_geojson(s: &Surface, provenance: Option<&Provenance>) -> Value {
    let sp = &s.spec;
    let mut features = Vec::with_capacity(s.values.len());
    for row in 0..s.n_rows {
        for col in 0..s.n_cols {
            let x0 = sp.lon_min + col as f64 * sp.cell_deg;
            let y0 = sp.lat_min + row as f64 * sp.cell_deg;
            let (x1, y1) = (x0 + sp.cell_deg, y0 + sp.cell_deg);
            let mut props = Map::new();
            props.insert("col".into(), json!(col));
            props.insert("row".into(), json!(row));
            match s.get(col, row) {
                Some(v) => {
                    props.insert("rate".into(), json!(v));
                    props.insert("no_data".into(), json!(false));
                }
                None => {
                    props.insert("no_data".into(), json!(true));
                }
            }
            features.push(json!({
                "type": "Feature",
                "geometry": {
                    "type": "Polygon",
                    "coordinates": [[[x0, y0], [x1, y0], [x1, y1], [x0, y1], [x0, y0]]],
                },
                "properties": props,
            }));
        }
    }
    let mut fc = json!({
        "type": "FeatureCollection",
        "grid": sp,
        "features": features,
    });
    if let Some(p) = provenance {
        fc["provenance"] = json!(p);
    }
    fc
}

/// Writes `s` in `format`. Output depends only on the inputs.
pub fn export_surface<W: Write>(
    s: &Surface,
    format: SurfaceFormat,
    provenance: Option<&Provenance>,
    w: W,
) -> Result<()> {
    let mut w = w;
    let io = |e| Error::io("surface", e);
    match format {
        SurfaceFormat::GeoJson => {
            serde_json::to_writer(&mut w, &surface_geojson(s, provenance))?;
            w.write_all(b"\n").map_err(io)?;
        }
        SurfaceFormat::Csv => {
            if let Some(p) = provenance {
                w.write_all(p.comment_line().as_bytes()).map_err(io)?;
            }
            writeln!(w, "lon_center,lat_center,rate").map_err(io)?;
            for row in 0..s.n_rows {
                for col in 0..s.n_cols {
                    let c = s.spec.center(col, row);
                    match s.get(col, row) {
                        Some(v) => writeln!(w, "{},{},{}", c.lon, c.lat, v),
                        None => writeln!(w, "{},{},", c.lon, c.lat),
                    }
                    .map_err(io)?;
                }
            }
        }
    }
    w.flush().map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geomap::GridSpec;

    fn two_by_two() -> Surface {
        let spec = GridSpec {
            lon_min: 0.0,
            lat_min: 0.0,
            lon_max: 1.0,
            lat_max: 1.0,
            cell_deg: 0.5,
            ..GridSpec::default()
        };
        Surface {
            spec,
            n_cols: 2,
            n_rows: 2,
            values: vec![Some(0.1), None, Some(0.3), Some(0.4)],
        }
    }

    #[test]
    fn four_features_and_no_data_flag() {
        let v = surface_geojson(&two_by_two(), None);
        let f = v["features"].as_array().unwrap();
        assert_eq!(f.len(), 4);
        assert_eq!(f[1]["properties"]["no_data"], json!(true));
        assert!(f[1]["properties"].get("rate").is_none());
        assert_eq!(f[0]["properties"]["rate"], json!(0.1));
    }

    #[test]
    fn byte_stable() {
        let s = two_by_two();
        for fmt in [SurfaceFormat::GeoJson, SurfaceFormat::Csv] {
            let mut a = Vec::new();
            let mut b = Vec::new();
            export_surface(&s, fmt, None, &mut a).unwrap();
            export_surface(&s, fmt, None, &mut b).unwrap();
            assert_eq!(a, b);
        }
        let mut c = Vec::new();
        export_surface(&s, SurfaceFormat::Csv, None, &mut c).unwrap();
        let text = String::from_utf8(c).unwrap();
        assert_eq!(text.lines().nth(2), Some("0.75,0.25,"));
    }
}
