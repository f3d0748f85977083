//! Granular knowledge structures over information tables.
//!
//! Formulas of a small decision logic are evaluated over an
//! [`InformationTable`] to form [`ConceptGranule`]s, which are organized
//! into partially ordered, optionally leveled structures ([`Gks`]). The
//! [`ops`] module builds and combines structures; [`navigate`] moves
//! between levels and views; [`export`] renders JSON and DOT.

pub mod error;
pub mod export;
pub mod fixtures;
pub mod formula;
pub mod gks;
pub mod granule;
pub mod navigate;
pub mod ops;
pub mod table;

pub use error::{Error, Result, SyntaxError};
pub use formula::{canonical_text, evaluate, parse_formula, AtomicFormula, Formula, Relation};
pub use gks::{Edge, Gks, NodeId, RelationName};
pub use granule::{leq, make_granule, same_intension, ConceptGranule};
pub use navigate::{switch_view, zoom, zoom_in, zoom_out, Direction};
pub use ops::{
    build_attribute_value_structure, difference_gks, generalize, intersect_gks, product, union_gks,
    ProductFactor, ProductOptions, StructureDelta,
};
pub use table::{
    ingest_csv, merge_universes, InformationTable, IngestConfig, ObjectId, ObjectIdSet, ValueSet,
};
