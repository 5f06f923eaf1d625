//! File formats: the G4DS Gaussian-sequence container, PFM float images and
//! 8-bit PNG previews.

mod g4ds;
mod pfm;
mod png;
pub mod reader;

pub use g4ds::{decode_sequence, encode_sequence, read_sequence, write_sequence, G4DS_MAGIC, G4DS_VERSION};
pub use pfm::{decode_pfm, encode_pfm, read_pfm, write_pfm};
pub use png::{read_png, write_png};
