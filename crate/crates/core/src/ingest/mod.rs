//! Streaming parsers, writers and referential validation for the five input
//! files: CDR events, top-ups, towers, handsets and literacy labels.

mod reader;
mod records;
mod tables;
mod validate;

pub use reader::*;
pub use records::*;
pub use tables::*;
pub use validate::*;
