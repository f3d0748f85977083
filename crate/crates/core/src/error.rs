use std::fmt;

use thiserror::Error;

/// Parse failure for the formula language.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntaxError {
    /// Byte offset into the input where parsing stopped.
    pub offset: usize,
    /// Tokens that would have been accepted at `offset`.
    pub expected: Vec<&'static str>,
    /// What was actually found there (`end of input` when exhausted).
    pub found: String,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "at byte {}: expected {}, found {}",
            self.offset,
            self.expected.join(" or "),
            self.found
        )
    }
}

impl std::error::Error for SyntaxError {}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("duplicate object id {id:?} at row {row}")]
    DuplicateObject { id: String, row: usize },
    #[error("duplicate attribute {name:?} at column {column}")]
    DuplicateAttribute { name: String, column: usize },
    #[error("row {row} has {found} fields, header has {expected}")]
    MalformedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row}: empty object id in column {column}")]
    EmptyObjectId { row: usize, column: usize },
    #[error("id column {0} not found in header")]
    UnknownIdColumn(String),
    #[error(
        "value {value:?} of attribute {attribute:?} (row {row}) is outside its declared domain"
    )]
    ValueOutsideDomain {
        attribute: String,
        value: String,
        row: usize,
    },
    #[error("csv: {0}")]
    Csv(String),
    #[error("unknown attribute {0:?}")]
    UnknownAttribute(String),
    #[error("relation {relation} is not supported on attribute {attribute:?}")]
    UnsupportedRelation { attribute: String, relation: String },
    #[error("syntax error {0}")]
    Syntax(SyntaxError),
    #[error("granules are bound to different tables ({0:?} and {1:?})")]
    TableMismatch(String, String),
    #[error("attribute {0:?} has no observed values")]
    EmptyDomain(String),
    #[error("shared granule {shared} does not contain the extension of {node}")]
    SharedNotSuper { shared: String, node: String },
    #[error("no input structures given")]
    NoInputs,
    #[error("root intensions differ: {0} vs {1}")]
    RootMismatch(String, String),
    #[error("structure is not a two-level hierarchy: {0}")]
    NotTwoLevel(String),
    #[error("{child} is not contained in its parent {parent}")]
    NotFiner { child: String, parent: String },
    #[error("structure has no level assignment")]
    NotLeveled,
    #[error("selected nodes lie on different levels")]
    MixedLevels,
    #[error("empty node selection")]
    EmptySelection,
    #[error("selection is already at the finest level")]
    AtFinestLevel,
    #[error("selection is already at the coarsest level")]
    AtCoarsestLevel,
    #[error("region is not bipartite: {0}")]
    NotBipartite(String),
    #[error("unknown node {0}")]
    UnknownNode(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
}

impl Error {
    /// Stable machine-readable code, shared by the CLI and the HTTP service.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DuplicateObject { .. } => "DuplicateObject",
            Error::DuplicateAttribute { .. } => "DuplicateAttribute",
            Error::MalformedRow { .. } => "MalformedRow",
            Error::EmptyObjectId { .. } => "EmptyObjectId",
            Error::UnknownIdColumn(_) => "UnknownIdColumn",
            Error::ValueOutsideDomain { .. } => "ValueOutsideDomain",
            Error::Csv(_) => "CsvError",
            Error::UnknownAttribute(_) => "UnknownAttribute",
            Error::UnsupportedRelation { .. } => "UnsupportedRelation",
            Error::Syntax(_) => "SyntaxError",
            Error::TableMismatch(..) => "TableMismatch",
            Error::EmptyDomain(_) => "EmptyDomain",
            Error::SharedNotSuper { .. } => "SharedNotSuper",
            Error::NoInputs => "NoInputs",
            Error::RootMismatch(..) => "RootMismatch",
            Error::NotTwoLevel(_) => "NotTwoLevel",
            Error::NotFiner { .. } => "NotFiner",
            Error::NotLeveled => "NotLeveled",
            Error::MixedLevels => "MixedLevels",
            Error::EmptySelection => "EmptySelection",
            Error::AtFinestLevel => "AtFinestLevel",
            Error::AtCoarsestLevel => "AtCoarsestLevel",
            Error::NotBipartite(_) => "NotBipartite",
            Error::UnknownNode(_) => "UnknownNode",
            Error::Schema(_) => "SchemaError",
            Error::InvariantViolation(_) => "InvariantViolation",
        }
    }
}

impl From<SyntaxError> for Error {
    fn from(e: SyntaxError) -> Self {
        Error::Syntax(e)
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
