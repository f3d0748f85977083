//! Concept granules: a formula (intension) paired with the set of objects
//! satisfying it (extension), ordered by extension inclusion.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::formula::{evaluate, Formula};
use crate::table::{InformationTable, ObjectIdSet};

#[derive(Debug, Clone)]
pub struct ConceptGranule {
    intension: Formula,
    extension: ObjectIdSet,
    label: String,
    table: Arc<InformationTable>,
}

impl ConceptGranule {
    pub fn intension(&self) -> &Formula {
        &self.intension
    }

    pub fn extension(&self) -> &ObjectIdSet {
        &self.extension
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn table(&self) -> &Arc<InformationTable> {
        &self.table
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Re-evaluates the intension on another table, keeping the label.
    pub fn rebind(&self, table: &Arc<InformationTable>) -> Result<ConceptGranule> {
        make_granule(self.intension.clone(), table, Some(self.label.clone()))
    }

    pub fn record(&self) -> GranuleRecord {
        GranuleRecord {
            label: self.label.clone(),
            intension: self.intension.canonical_text(),
            extension: self.extension.iter().map(|id| id.to_string()).collect(),
        }
    }
}

/// Two granules are equal when they have the same intension, extension and
/// label and are bound to equal tables.
impl PartialEq for ConceptGranule {
    fn eq(&self, other: &Self) -> bool {
        self.intension == other.intension
            && self.extension == other.extension
            && self.label == other.label
            && (Arc::ptr_eq(&self.table, &other.table) || self.table == other.table)
    }
}

/// JSON rendering of a granule; the extension is sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GranuleRecord {
    pub label: String,
    pub intension: String,
    pub extension: Vec<String>,
}

/// Builds `(f, m(f))` on `table`. The label defaults to the canonical text
/// of `f`.
pub fn make_granule(
    f: Formula,
    table: &Arc<InformationTable>,
    label: Option<String>,
) -> Result<ConceptGranule> {
    let extension = evaluate(&f, table)?;
    let label = label.unwrap_or_else(|| f.canonical_text());
    Ok(ConceptGranule {
        intension: f,
        extension,
        label,
        table: Arc::clone(table),
    })
}

/// Maps the extension of `g` into the id space of `target`, when `target` is
/// `g`'s table or a merge containing it.
pub(crate) fn lift_extension(g: &ConceptGranule, target: &InformationTable) -> Option<ObjectIdSet> {
    let prefix = target.prefix_of(g.table.name())?;
    if prefix.is_empty() {
        return (*g.table == *target).then(|| g.extension.clone());
    }
    Some(g.extension.iter().map(|id| id.namespaced(prefix)).collect())
}

fn same_table(a: &Arc<InformationTable>, b: &Arc<InformationTable>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// Checks that both granules can be compared, returning their extensions in
/// a common id space.
pub(crate) fn comparable(
    g1: &ConceptGranule,
    g2: &ConceptGranule,
) -> Result<(ObjectIdSet, ObjectIdSet)> {
    if same_table(&g1.table, &g2.table) {
        return Ok((g1.extension.clone(), g2.extension.clone()));
    }
    if let Some(lifted) = lift_extension(g1, &g2.table) {
        return Ok((lifted, g2.extension.clone()));
    }
    if let Some(lifted) = lift_extension(g2, &g1.table) {
        return Ok((g1.extension.clone(), lifted));
    }
    Err(Error::TableMismatch(
        g1.table.name().to_string(),
        g2.table.name().to_string(),
    ))
}

/// `g1 ⪯ g2` iff the extension of `g1` is contained in that of `g2`.
pub fn leq(g1: &ConceptGranule, g2: &ConceptGranule) -> Result<bool> {
    let (e1, e2) = comparable(g1, g2)?;
    Ok(e1.is_subset(&e2))
}

/// Syntactic intension equality via canonical text.
pub fn same_intension(g1: &ConceptGranule, g2: &ConceptGranule) -> bool {
    g1.intension.canonical_text() == g2.intension.canonical_text()
}

pub(crate) fn bound_to_same_table(a: &ConceptGranule, b: &ConceptGranule) -> bool {
    same_table(&a.table, &b.table)
}
