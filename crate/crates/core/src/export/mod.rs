//! Deterministic serialization: JSON for round-trips, DOT for rendering.

pub mod dot;
pub mod json;

pub use dot::{gks_to_dot, DotOptions, ExtensionDisplay, RankDirection};
pub use json::{
    document_from_json, document_to_json, gks_from_json, gks_to_json, Document, GksRecord, Snapshot,
};
