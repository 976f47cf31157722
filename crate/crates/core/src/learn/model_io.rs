//! Versioned JSON model documents.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::gbm::GbmModel;
use crate::error::{Error, Result};
use crate::provenance::Provenance;

pub const MODEL_FORMAT: &str = "litmap-gbm";
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub format: String,
    pub format_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
    #[serde(flatten)]
    pub model: GbmModel,
}

impl ModelDocument {
    pub fn new(model: GbmModel, provenance: Option<Provenance>) -> Self {
        ModelDocument {
            format: MODEL_FORMAT.to_string(),
            format_version: MODEL_FORMAT_VERSION,
            provenance,
            model,
        }
    }
}

pub fn write_model<W: Write>(w: W, doc: &ModelDocument) -> Result<()> {
    let mut w = w;
    serde_json::to_writer_pretty(&mut w, doc)?;
    w.write_all(b"\n").map_err(|e| Error::io("model", e))?;
    Ok(())
}

pub fn read_model<R: Read>(r: R) -> Result<ModelDocument> {
    let doc: ModelDocument = serde_json::from_reader(r)?;
    if doc.format != MODEL_FORMAT || doc.format_version != MODEL_FORMAT_VERSION {
        return Err(Error::InvalidInput(format!(
            "unsupported model format {} v{}",
            doc.format, doc.format_version
        )));
    }
    Ok(doc)
}
