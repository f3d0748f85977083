use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::parse_formula;
use crate::gks::{Gks, NodeId, RelationName};
use crate::granule::make_granule;
use crate::table::InformationTable;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeRecord {
    pub id: NodeId,
    pub label: String,
    pub intension: String,
    pub extension: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRecord {
    pub child: NodeId,
    pub parent: NodeId,
    pub relation: RelationName,
}

/// Wire form of a structure: nodes sorted by id, edges by (child, parent).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GksRecord {
    pub table: String,
    pub nodes: Vec<NodeRecord>,
    pub edges: Vec<EdgeRecord>,
}

impl From<&Gks> for GksRecord {
    fn from(g: &Gks) -> Self {
        GksRecord {
            table: g.table().name().to_string(),
            nodes: g
                .nodes()
                .iter()
                .map(|(id, n)| {
                    let r = n.record();
                    NodeRecord {
                        id: *id,
                        label: r.label,
                        intension: r.intension,
                        extension: r.extension,
                        level: g.level(*id),
                    }
                })
                .collect(),
            edges: g
                .edges()
                .iter()
                .map(|e| EdgeRecord {
                    child: e.child,
                    parent: e.parent,
                    relation: e.relation.clone(),
                })
                .collect(),
        }
    }
}

impl GksRecord {
    /// Rebuilds the structure on `table`, re-evaluating every intension and
    /// re-checking all structure invariants.
    pub fn into_gks(self, table: &Arc<InformationTable>) -> Result<Gks> {
        if self.table != table.name() {
            return Err(Error::Schema(format!(
                "structure is bound to table {:?}, got {:?}",
                self.table,
                table.name()
            )));
        }
        let leveled = self.nodes.iter().filter(|n| n.level.is_some()).count();
        if leveled != 0 && leveled != self.nodes.len() {
            return Err(Error::Schema(
                "levels must be given for all nodes or none".into(),
            ));
        }
        let mut g = Gks::new(Arc::clone(table));
        for n in self.nodes {
            let formula = parse_formula(&n.intension)
                .map_err(|e| Error::Schema(format!("node {}: intension {e}", n.id)))?;
            let granule = make_granule(formula, table, Some(n.label))?;
            let actual: Vec<String> = granule
                .extension()
                .iter()
                .map(|id| id.to_string())
                .collect();
            let stored: BTreeSet<&String> = n.extension.iter().collect();
            if stored.len() != n.extension.len() || actual.iter().collect::<BTreeSet<_>>() != stored
            {
                return Err(Error::InvariantViolation(format!(
                    "node {}: stored extension differs from m({})",
                    n.id, n.intension
                )));
            }
            g.insert_node(n.id, granule)?;
            if let Some(l) = n.level {
                g.set_level(n.id, l)?;
            }
        }
        for e in self.edges {
            for end in [e.child, e.parent] {
                if g.node(end).is_err() {
                    return Err(Error::Schema(format!("edge references unknown node {end}")));
                }
            }
            g.add_edge(e.child, e.parent, e.relation)?;
        }
        g.validate()?;
        Ok(g)
    }
}

pub fn gks_to_json(g: &Gks) -> String {
    serde_json::to_string_pretty(&GksRecord::from(g)).expect("records serialize")
}

pub fn gks_from_json(text: &str, table: &Arc<InformationTable>) -> Result<Gks> {
    let record: GksRecord = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    record.into_gks(table)
}

/// A structure bundled with the table it is bound to, so it can be passed
/// between processes without re-ingesting the source data.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    pub table: InformationTable,
    pub gks: GksRecord,
}

impl Document {
    pub fn of(g: &Gks) -> Self {
        Document {
            table: (**g.table()).clone(),
            gks: GksRecord::from(g),
        }
    }

    pub fn into_gks(self) -> Result<Gks> {
        self.gks.into_gks(&Arc::new(self.table))
    }
}

pub fn document_to_json(g: &Gks) -> String {
    serde_json::to_string_pretty(&Document::of(g)).expect("documents serialize")
}

pub fn document_from_json(text: &str) -> Result<Gks> {
    let doc: Document = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    doc.into_gks()
}

/// Serializable snapshot of named tables and structures.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Snapshot {
    pub revision: u64,
    pub tables: BTreeMap<String, InformationTable>,
    pub structures: BTreeMap<String, GksRecord>,
}
