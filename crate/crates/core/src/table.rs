//! Information tables: a finite universe of objects described by a fixed
//! list of attributes, where every cell holds a (possibly empty) set of
//! value tokens.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::Read;

use indexmap::IndexSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::Relation;

/// Separator between a namespace prefix and the local part of an object id.
pub const NAMESPACE_SEP: &str = "::";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectId(String);

impl ObjectId {
    pub fn new(id: impl Into<String>) -> Option<Self> {
        let id = id.into();
        if id.is_empty() {
            None
        } else {
            Some(ObjectId(id))
        }
    }

    /// Prefix `self` with `namespace`. Distinct namespaces never collide.
    pub fn namespaced(&self, namespace: &str) -> ObjectId {
        ObjectId(format!("{namespace}{NAMESPACE_SEP}{}", self.0))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub type ObjectIdSet = BTreeSet<ObjectId>;

/// Finite set of value tokens, kept in first-insertion order.
///
/// The empty set encodes a missing cell.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValueSet(IndexSet<String>);

impl ValueSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, value: impl Into<String>) -> bool {
        self.0.insert(value.into())
    }

    pub fn contains(&self, value: &str) -> bool {
        self.0.contains(value)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> + '_ {
        self.0.iter().map(String::as_str)
    }

    fn extend_from(&mut self, other: &ValueSet) {
        for v in other.iter() {
            self.insert(v);
        }
    }
}

impl<S: Into<String>> FromIterator<S> for ValueSet {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        ValueSet(iter.into_iter().map(Into::into).collect())
    }
}

impl Serialize for ValueSet {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.0.iter())
    }
}

impl<'de> Deserialize<'de> for ValueSet {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let values = Vec::<String>::deserialize(deserializer)?;
        Ok(values.into_iter().collect())
    }
}

/// Where a merged table's objects came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeSource {
    /// Name of the source table.
    pub table: String,
    /// Namespace path prepended to that table's object ids.
    pub prefix: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum IdColumn {
    #[default]
    First,
    Index(usize),
    Name(String),
}

#[derive(Debug, Clone)]
pub struct IngestConfig {
    pub name: String,
    pub id_column: IdColumn,
    /// Cell content marking a missing value.
    pub missing: String,
    /// Separator between values of a multi-valued cell.
    pub separator: String,
    /// Optional declared value domains; cells outside them are rejected.
    pub declared_domains: BTreeMap<String, Vec<String>>,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig {
            name: "table".to_string(),
            id_column: IdColumn::First,
            missing: "–".to_string(),
            separator: ";".to_string(),
            declared_domains: BTreeMap::new(),
        }
    }
}

impl IngestConfig {
    pub fn named(name: impl Into<String>) -> Self {
        IngestConfig {
            name: name.into(),
            ..Self::default()
        }
    }
}

/// Non-fatal findings of [`InformationTable::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TableWarning {
    EmptyUniverse,
    NoAttributes,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InformationTable {
    name: String,
    universe: Vec<ObjectId>,
    attributes: Vec<String>,
    /// `cells[object][attribute]`
    cells: Vec<Vec<ValueSet>>,
    relations: Vec<BTreeSet<Relation>>,
    declared: Vec<Option<ValueSet>>,
    sources: Vec<MergeSource>,
    object_index: HashMap<ObjectId, usize>,
    attribute_index: HashMap<String, usize>,
}

impl InformationTable {
    /// Builds a table from rows of `(object id, one ValueSet per attribute)`.
    pub fn new(
        name: impl Into<String>,
        attributes: Vec<String>,
        rows: Vec<(ObjectId, Vec<ValueSet>)>,
    ) -> Result<Self> {
        let mut attribute_index = HashMap::with_capacity(attributes.len());
        for (column, a) in attributes.iter().enumerate() {
            if attribute_index.insert(a.clone(), column).is_some() {
                return Err(Error::DuplicateAttribute {
                    name: a.clone(),
                    column: column + 1,
                });
            }
        }
        let mut universe = Vec::with_capacity(rows.len());
        let mut cells = Vec::with_capacity(rows.len());
        let mut object_index = HashMap::with_capacity(rows.len());
        for (row, (id, values)) in rows.into_iter().enumerate() {
            if values.len() != attributes.len() {
                return Err(Error::MalformedRow {
                    row: row + 1,
                    expected: attributes.len(),
                    found: values.len(),
                });
            }
            if object_index.insert(id.clone(), row).is_some() {
                return Err(Error::DuplicateObject {
                    id: id.to_string(),
                    row: row + 1,
                });
            }
            universe.push(id);
            cells.push(values);
        }
        let n = attributes.len();
        Ok(InformationTable {
            name: name.into(),
            universe,
            attributes,
            cells,
            relations: vec![Relation::ALL.iter().copied().collect(); n],
            declared: vec![None; n],
            sources: Vec::new(),
            object_index,
            attribute_index,
        })
    }

    /// Replaces the observed value domain of `attribute` with a declared one.
    pub fn with_declared_domain(mut self, attribute: &str, domain: ValueSet) -> Result<Self> {
        let column = self.attribute_position(attribute)?;
        for (row, cells) in self.cells.iter().enumerate() {
            if let Some(v) = cells[column].iter().find(|v| !domain.contains(v)) {
                return Err(Error::ValueOutsideDomain {
                    attribute: attribute.to_string(),
                    value: v.to_string(),
                    row: row + 1,
                });
            }
        }
        self.declared[column] = Some(domain);
        Ok(self)
    }

    /// Restricts the relation symbols usable on `attribute`.
    pub fn with_relations(
        mut self,
        attribute: &str,
        relations: BTreeSet<Relation>,
    ) -> Result<Self> {
        let column = self.attribute_position(attribute)?;
        self.relations[column] = relations;
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn universe(&self) -> &[ObjectId] {
        &self.universe
    }

    pub fn attributes(&self) -> &[String] {
        &self.attributes
    }

    pub fn len(&self) -> usize {
        self.universe.len()
    }

    pub fn is_empty(&self) -> bool {
        self.universe.is_empty()
    }

    pub fn sources(&self) -> &[MergeSource] {
        &self.sources
    }

    pub fn has_attribute(&self, attribute: &str) -> bool {
        self.attribute_index.contains_key(attribute)
    }

    pub fn attribute_position(&self, attribute: &str) -> Result<usize> {
        self.attribute_index
            .get(attribute)
            .copied()
            .ok_or_else(|| Error::UnknownAttribute(attribute.to_string()))
    }

    pub fn object_position(&self, id: &ObjectId) -> Option<usize> {
        self.object_index.get(id).copied()
    }

    pub fn cell(&self, object: usize, attribute: usize) -> &ValueSet {
        &self.cells[object][attribute]
    }

    pub fn cell_by_name(&self, id: &ObjectId, attribute: &str) -> Result<&ValueSet> {
        let column = self.attribute_position(attribute)?;
        let row = self
            .object_position(id)
            .ok_or_else(|| Error::UnknownNode(id.to_string()))?;
        Ok(&self.cells[row][column])
    }

    pub fn relations(&self, attribute: &str) -> Result<&BTreeSet<Relation>> {
        Ok(&self.relations[self.attribute_position(attribute)?])
    }

    pub fn supports(&self, attribute: &str, relation: Relation) -> Result<bool> {
        Ok(self.relations(attribute)?.contains(&relation))
    }

    /// The value domain of `attribute`: the declared domain when one was
    /// given, otherwise every observed token in first-occurrence order.
    pub fn value_domain(&self, attribute: &str) -> Result<ValueSet> {
        let column = self.attribute_position(attribute)?;
        if let Some(declared) = &self.declared[column] {
            return Ok(declared.clone());
        }
        let mut domain = ValueSet::new();
        for row in &self.cells {
            domain.extend_from(&row[column]);
        }
        Ok(domain)
    }

    pub fn all_ids(&self) -> ObjectIdSet {
        self.universe.iter().cloned().collect()
    }

    /// Checks the structural invariants. Returns warnings for conditions
    /// that are tolerated, such as an empty universe.
    pub fn validate(&self) -> Result<Vec<TableWarning>> {
        let mut seen = BTreeSet::new();
        for (row, id) in self.universe.iter().enumerate() {
            if id.as_str().is_empty() {
                return Err(Error::InvariantViolation(format!(
                    "empty object id at row {}",
                    row + 1
                )));
            }
            if !seen.insert(id) {
                return Err(Error::DuplicateObject {
                    id: id.to_string(),
                    row: row + 1,
                });
            }
        }
        let mut names = BTreeSet::new();
        for (column, a) in self.attributes.iter().enumerate() {
            if !names.insert(a) {
                return Err(Error::DuplicateAttribute {
                    name: a.clone(),
                    column: column + 1,
                });
            }
        }
        if self.cells.len() != self.universe.len()
            || self.cells.iter().any(|r| r.len() != self.attributes.len())
        {
            return Err(Error::InvariantViolation(
                "cell grid does not cover universe × attributes".into(),
            ));
        }
        for (column, a) in self.attributes.iter().enumerate() {
            let domain = self.value_domain(a)?;
            for (row, cells) in self.cells.iter().enumerate() {
                if let Some(v) = cells[column].iter().find(|v| !domain.contains(v)) {
                    return Err(Error::ValueOutsideDomain {
                        attribute: a.clone(),
                        value: v.to_string(),
                        row: row + 1,
                    });
                }
            }
            if !self.relations[column].contains(&Relation::Eq)
                || !self.relations[column].contains(&Relation::Neq)
            {
                return Err(Error::InvariantViolation(format!(
                    "attribute {a:?} lacks the equality/inequality relations"
                )));
            }
        }
        let mut warnings = Vec::new();
        if self.universe.is_empty() {
            warnings.push(TableWarning::EmptyUniverse);
        }
        if self.attributes.is_empty() {
            warnings.push(TableWarning::NoAttributes);
        }
        Ok(warnings)
    }

    /// Namespace path under which objects of `table` appear in `self`, if
    /// `table` is `self` (empty path) or one of its merge sources.
    pub fn prefix_of(&self, table: &str) -> Option<&str> {
        if self.name == table {
            return Some("");
        }
        self.sources
            .iter()
            .find(|s| s.table == table)
            .map(|s| s.prefix.as_str())
    }
}

/// Reads a table from CSV. The id column becomes the universe; every other
/// column becomes an attribute.
pub fn ingest_csv<R: Read>(source: R, config: &IngestConfig) -> Result<InformationTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source);
    let mut records = reader.records();
    let header = match records.next() {
        Some(h) => h?,
        None => return Err(Error::Csv("missing header row".into())),
    };
    let id_column = match &config.id_column {
        IdColumn::First => 0,
        IdColumn::Index(i) if *i < header.len() => *i,
        IdColumn::Index(i) => return Err(Error::UnknownIdColumn(i.to_string())),
        IdColumn::Name(n) => header
            .iter()
            .position(|h| h == n)
            .ok_or_else(|| Error::UnknownIdColumn(n.clone()))?,
    };
    if header.is_empty() {
        return Err(Error::Csv("empty header row".into()));
    }
    let mut seen = BTreeSet::new();
    for (column, h) in header.iter().enumerate() {
        if !seen.insert(h) {
            return Err(Error::DuplicateAttribute {
                name: h.to_string(),
                column: column + 1,
            });
        }
    }
    let attributes: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|(c, _)| *c != id_column)
        .map(|(_, h)| h.to_string())
        .collect();

    let mut rows = Vec::new();
    let mut ids = BTreeSet::new();
    for (i, record) in records.enumerate() {
        let record = record?;
        // header is row 1
        let row = i + 2;
        if record.len() != header.len() {
            return Err(Error::MalformedRow {
                row,
                expected: header.len(),
                found: record.len(),
            });
        }
        let id = ObjectId::new(&record[id_column]).ok_or(Error::EmptyObjectId {
            row,
            column: id_column + 1,
        })?;
        if !ids.insert(id.clone()) {
            return Err(Error::DuplicateObject {
                id: id.to_string(),
                row,
            });
        }
        let values = record
            .iter()
            .enumerate()
            .filter(|(c, _)| *c != id_column)
            .map(|(_, cell)| parse_cell(cell, config))
            .collect();
        rows.push((id, values));
    }

    let mut table = InformationTable::new(config.name.clone(), attributes, rows)?;
    for (attribute, domain) in &config.declared_domains {
        table = table
            .with_declared_domain(attribute, domain.iter().cloned().collect())
            .map_err(|e| match e {
                // `new` numbers data rows from 1; shift past the header
                Error::ValueOutsideDomain {
                    attribute,
                    value,
                    row,
                } => Error::ValueOutsideDomain {
                    attribute,
                    value,
                    row: row + 1,
                },
                e => e,
            })?;
    }
    Ok(table)
}

fn parse_cell(cell: &str, config: &IngestConfig) -> ValueSet {
    if cell == config.missing {
        return ValueSet::new();
    }
    let parts: Box<dyn Iterator<Item = &str>> = if config.separator.is_empty() {
        Box::new(std::iter::once(cell))
    } else {
        Box::new(cell.split(config.separator.as_str()))
    };
    parts
        .map(str::trim)
        .filter(|v| !v.is_empty() && *v != config.missing)
        .collect()
}

/// Disjoint union of two tables. Object ids are prefixed with their source
/// table's name (`name.1` / `name.2` when both names coincide); attributes
/// absent from a source table are missing for its objects.
pub fn merge_universes(left: &InformationTable, right: &InformationTable) -> InformationTable {
    let (lp, rp) = if left.name == right.name {
        (format!("{}.1", left.name), format!("{}.2", right.name))
    } else {
        (left.name.clone(), right.name.clone())
    };

    let mut attributes: IndexSet<String> = left.attributes.iter().cloned().collect();
    attributes.extend(right.attributes.iter().cloned());
    let attributes: Vec<String> = attributes.into_iter().collect();

    let mut rows = Vec::with_capacity(left.len() + right.len());
    for (table, prefix) in [(left, &lp), (right, &rp)] {
        for (r, id) in table.universe.iter().enumerate() {
            let values = attributes
                .iter()
                .map(|a| match table.attribute_index.get(a) {
                    Some(&c) => table.cells[r][c].clone(),
                    None => ValueSet::new(),
                })
                .collect();
            rows.push((id.namespaced(prefix), values));
        }
    }

    let name = format!("{}+{}", left.name, right.name);
    let mut merged = InformationTable::new(name, attributes, rows)
        .expect("namespaced ids and deduplicated attributes cannot collide");

    for (c, a) in merged.attributes.clone().iter().enumerate() {
        let mut relations: Option<BTreeSet<Relation>> = None;
        let mut declared: Option<ValueSet> = None;
        for table in [left, right] {
            if let Some(&sc) = table.attribute_index.get(a) {
                relations = Some(match relations {
                    None => table.relations[sc].clone(),
                    Some(r) => r.intersection(&table.relations[sc]).copied().collect(),
                });
                if let Some(d) = &table.declared[sc] {
                    declared.get_or_insert_with(ValueSet::new).extend_from(d);
                }
            }
        }
        if let Some(r) = relations {
            merged.relations[c] = r;
        }
        merged.declared[c] = declared;
    }

    for (table, prefix) in [(left, &lp), (right, &rp)] {
        merged.sources.push(MergeSource {
            table: table.name.clone(),
            prefix: prefix.clone(),
        });
        for s in &table.sources {
            merged.sources.push(MergeSource {
                table: s.table.clone(),
                prefix: format!("{prefix}{NAMESPACE_SEP}{}", s.prefix),
            });
        }
    }
    merged
}

/// Serialized form of a table, used for snapshots and structure documents.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableRecord {
    pub name: String,
    pub attributes: Vec<String>,
    pub objects: Vec<ObjectRecord>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub relations: BTreeMap<String, Vec<Relation>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub declared_domains: BTreeMap<String, ValueSet>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sources: Vec<MergeSource>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObjectRecord {
    pub id: ObjectId,
    pub cells: Vec<ValueSet>,
}

impl From<&InformationTable> for TableRecord {
    fn from(t: &InformationTable) -> Self {
        let full: BTreeSet<Relation> = Relation::ALL.iter().copied().collect();
        TableRecord {
            name: t.name.clone(),
            attributes: t.attributes.clone(),
            objects: t
                .universe
                .iter()
                .zip(&t.cells)
                .map(|(id, cells)| ObjectRecord {
                    id: id.clone(),
                    cells: cells.clone(),
                })
                .collect(),
            relations: t
                .attributes
                .iter()
                .zip(&t.relations)
                .filter(|(_, r)| **r != full)
                .map(|(a, r)| (a.clone(), r.iter().copied().collect()))
                .collect(),
            declared_domains: t
                .attributes
                .iter()
                .zip(&t.declared)
                .filter_map(|(a, d)| d.as_ref().map(|d| (a.clone(), d.clone())))
                .collect(),
            sources: t.sources.clone(),
        }
    }
}

impl TryFrom<TableRecord> for InformationTable {
    type Error = Error;

    fn try_from(r: TableRecord) -> Result<Self> {
        let rows = r.objects.into_iter().map(|o| (o.id, o.cells)).collect();
        let mut table = InformationTable::new(r.name, r.attributes, rows)?;
        for (a, rel) in r.relations {
            table = table.with_relations(&a, rel.into_iter().collect())?;
        }
        for (a, d) in r.declared_domains {
            table = table.with_declared_domain(&a, d)?;
        }
        table.sources = r.sources;
        table.validate()?;
        Ok(table)
    }
}

impl Serialize for InformationTable {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        TableRecord::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for InformationTable {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let record = TableRecord::deserialize(deserializer)?;
        InformationTable::try_from(record).map_err(serde::de::Error::custom)
    }
}
