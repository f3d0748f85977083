//! Granular knowledge structures: concept granules connected by ordered
//! relation edges, optionally arranged into levels (1 = coarsest).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::evaluate;
use crate::granule::{leq, ConceptGranule};
use crate::table::InformationTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

impl std::str::FromStr for NodeId {
    type Err = std::num::ParseIntError;

    /// Accepts `n3` or `3`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.strip_prefix('n').unwrap_or(s).parse().map(NodeId)
    }
}

/// Tag carried by every edge.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RelationName(String);

impl RelationName {
    pub const PARTIAL_ORDER: &'static str = "partial-order";
    pub const VIEW_OF: &'static str = "view-of";

    pub fn new(name: impl Into<String>) -> Self {
        RelationName(name.into())
    }

    pub fn partial_order() -> Self {
        RelationName(Self::PARTIAL_ORDER.to_string())
    }

    pub fn view_of() -> Self {
        RelationName(Self::VIEW_OF.to_string())
    }

    pub fn is_partial_order(&self) -> bool {
        self.0 == Self::PARTIAL_ORDER
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl Default for RelationName {
    fn default() -> Self {
        Self::partial_order()
    }
}

impl fmt::Display for RelationName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Ordered pair `⟨child, parent⟩`; for partial-order edges the child's
/// extension is contained in the parent's.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub child: NodeId,
    pub parent: NodeId,
    pub relation: RelationName,
}

impl Edge {
    pub fn partial_order(child: NodeId, parent: NodeId) -> Self {
        Edge {
            child,
            parent,
            relation: RelationName::partial_order(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Gks {
    table: Arc<InformationTable>,
    nodes: BTreeMap<NodeId, ConceptGranule>,
    edges: BTreeSet<Edge>,
    levels: Option<BTreeMap<NodeId, u32>>,
}

impl PartialEq for Gks {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.table, &other.table) || self.table == other.table)
            && self.nodes == other.nodes
            && self.edges == other.edges
            && self.levels == other.levels
    }
}

impl Gks {
    /// Empty structure over `table`. Build it up with [`Gks::add_node`] and
    /// [`Gks::add_edge`], then call [`Gks::validate`].
    pub fn new(table: Arc<InformationTable>) -> Self {
        Gks {
            table,
            nodes: BTreeMap::new(),
            edges: BTreeSet::new(),
            levels: None,
        }
    }

    pub fn table(&self) -> &Arc<InformationTable> {
        &self.table
    }

    pub fn nodes(&self) -> &BTreeMap<NodeId, ConceptGranule> {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> Result<&ConceptGranule> {
        self.nodes
            .get(&id)
            .ok_or_else(|| Error::UnknownNode(id.to_string()))
    }

    pub fn edges(&self) -> &BTreeSet<Edge> {
        &self.edges
    }

    pub fn levels(&self) -> Option<&BTreeMap<NodeId, u32>> {
        self.levels.as_ref()
    }

    pub fn level(&self, id: NodeId) -> Option<u32> {
        self.levels.as_ref().and_then(|l| l.get(&id).copied())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn next_id(&self) -> NodeId {
        NodeId(self.nodes.keys().next_back().map_or(0, |n| n.0 + 1))
    }

    /// Adds a granule, which must be bound to this structure's table.
    pub fn add_node(&mut self, granule: ConceptGranule) -> Result<NodeId> {
        self.check_binding(&granule)?;
        let id = self.next_id();
        self.nodes.insert(id, granule);
        Ok(id)
    }

    /// Adds a granule under an explicit id, replacing nothing.
    pub fn insert_node(&mut self, id: NodeId, granule: ConceptGranule) -> Result<()> {
        self.check_binding(&granule)?;
        if self.nodes.contains_key(&id) {
            return Err(Error::Schema(format!("duplicate node id {id}")));
        }
        self.nodes.insert(id, granule);
        Ok(())
    }

    pub fn add_edge(
        &mut self,
        child: NodeId,
        parent: NodeId,
        relation: RelationName,
    ) -> Result<()> {
        for n in [child, parent] {
            self.node(n)?;
        }
        self.edges.insert(Edge {
            child,
            parent,
            relation,
        });
        Ok(())
    }

    pub fn set_level(&mut self, id: NodeId, level: u32) -> Result<()> {
        self.node(id)?;
        self.levels
            .get_or_insert_with(BTreeMap::new)
            .insert(id, level);
        Ok(())
    }

    pub fn clear_levels(&mut self) {
        self.levels = None;
    }

    fn check_binding(&self, granule: &ConceptGranule) -> Result<()> {
        let t = granule.table();
        if Arc::ptr_eq(t, &self.table) || **t == *self.table {
            Ok(())
        } else {
            Err(Error::TableMismatch(
                t.name().to_string(),
                self.table.name().to_string(),
            ))
        }
    }

    /// Nodes with no outgoing edge.
    pub fn roots(&self) -> Vec<NodeId> {
        let with_parent: BTreeSet<NodeId> = self.edges.iter().map(|e| e.child).collect();
        self.nodes
            .keys()
            .filter(|n| !with_parent.contains(n))
            .copied()
            .collect()
    }

    pub fn children(&self, id: NodeId) -> Vec<NodeId> {
        self.edges
            .iter()
            .filter(|e| e.parent == id)
            .map(|e| e.child)
            .collect()
    }

    pub fn parents(&self, id: NodeId) -> Vec<NodeId> {
        self.edges
            .iter()
            .filter(|e| e.child == id)
            .map(|e| e.parent)
            .collect()
    }

    /// Node with the given id (`n3` / `3`) or, failing that, the unique node
    /// with that label.
    pub fn resolve(&self, key: &str) -> Result<NodeId> {
        if let Ok(id) = key.parse::<NodeId>() {
            if self.nodes.contains_key(&id) {
                return Ok(id);
            }
        }
        let mut hits = self.nodes.iter().filter(|(_, g)| g.label() == key);
        match (hits.next(), hits.next()) {
            (Some((id, _)), None) => Ok(*id),
            (Some(_), Some(_)) => Err(Error::UnknownNode(format!("{key} (ambiguous label)"))),
            _ => Err(Error::UnknownNode(key.to_string())),
        }
    }

    pub fn find_by_label(&self, label: &str) -> Option<NodeId> {
        self.nodes
            .iter()
            .find(|(_, g)| g.label() == label)
            .map(|(id, _)| *id)
    }

    /// Nodes at `level`, in id order.
    pub fn level_members(&self, level: u32) -> Vec<NodeId> {
        self.levels
            .iter()
            .flat_map(|l| l.iter())
            .filter(|(_, l)| **l == level)
            .map(|(n, _)| *n)
            .collect()
    }

    pub fn max_level(&self) -> Option<u32> {
        self.levels.as_ref().and_then(|l| l.values().max().copied())
    }

    /// Decomposes a two-level hierarchy into its root and children: one
    /// root, every other node has exactly one partial-order edge to it.
    pub fn two_level(&self) -> Result<(NodeId, Vec<NodeId>)> {
        let roots = self.roots();
        let [root] = roots[..] else {
            return Err(Error::NotTwoLevel(format!("{} roots", roots.len())));
        };
        let children: Vec<NodeId> = self.nodes.keys().filter(|n| **n != root).copied().collect();
        if self.edges.len() != children.len() {
            return Err(Error::NotTwoLevel("nodes below the children".into()));
        }
        for e in &self.edges {
            if e.parent != root {
                return Err(Error::NotTwoLevel(format!(
                    "edge {} -> {} skips the root",
                    e.child, e.parent
                )));
            }
            if !e.relation.is_partial_order() {
                return Err(Error::NotTwoLevel(format!("edge tagged {}", e.relation)));
            }
        }
        Ok((root, children))
    }

    /// Checks every structural invariant: edge endpoints exist, granules are
    /// bound to this table and carry their true extension, partial-order
    /// edges respect inclusion, the edge relation is acyclic, and levels (if
    /// present) cover all nodes with children exactly one level finer.
    pub fn validate(&self) -> Result<()> {
        for (id, g) in &self.nodes {
            self.check_binding(g)
                .map_err(|e| Error::InvariantViolation(format!("{id}: {e}")))?;
            let actual = evaluate(g.intension(), &self.table)?;
            if &actual != g.extension() {
                return Err(Error::InvariantViolation(format!(
                    "{id} extension differs from m({})",
                    g.intension()
                )));
            }
        }
        for e in &self.edges {
            let (Some(c), Some(p)) = (self.nodes.get(&e.child), self.nodes.get(&e.parent)) else {
                return Err(Error::InvariantViolation(format!(
                    "edge {} -> {} references a missing node",
                    e.child, e.parent
                )));
            };
            if e.child == e.parent {
                return Err(Error::InvariantViolation(format!(
                    "self-loop on {}",
                    e.child
                )));
            }
            if e.relation.is_partial_order() && !leq(c, p)? {
                return Err(Error::InvariantViolation(format!(
                    "partial-order edge {} -> {}: {:?} is not contained in {:?}",
                    e.child,
                    e.parent,
                    c.label(),
                    p.label()
                )));
            }
        }
        self.check_acyclic()?;
        if let Some(levels) = &self.levels {
            for id in self.nodes.keys() {
                match levels.get(id) {
                    None => return Err(Error::InvariantViolation(format!("{id} has no level"))),
                    Some(0) => return Err(Error::InvariantViolation(format!("{id} has level 0"))),
                    Some(_) => {}
                }
            }
            if let Some(stray) = levels.keys().find(|n| !self.nodes.contains_key(n)) {
                return Err(Error::InvariantViolation(format!(
                    "level assigned to missing node {stray}"
                )));
            }
            for e in &self.edges {
                if levels[&e.child] != levels[&e.parent] + 1 {
                    return Err(Error::InvariantViolation(format!(
                        "edge {} -> {} joins levels {} and {}",
                        e.child, e.parent, levels[&e.child], levels[&e.parent]
                    )));
                }
            }
        }
        Ok(())
    }

    fn check_acyclic(&self) -> Result<()> {
        let mut indegree: BTreeMap<NodeId, usize> = self.nodes.keys().map(|n| (*n, 0)).collect();
        for e in &self.edges {
            *indegree.entry(e.parent).or_default() += 1;
        }
        let mut ready: Vec<NodeId> = indegree
            .iter()
            .filter(|(_, d)| **d == 0)
            .map(|(n, _)| *n)
            .collect();
        let mut seen = 0;
        while let Some(n) = ready.pop() {
            seen += 1;
            for e in self.edges.iter().filter(|e| e.child == n) {
                let d = indegree.get_mut(&e.parent).expect("endpoint checked");
                *d -= 1;
                if *d == 0 {
                    ready.push(e.parent);
                }
            }
        }
        if seen == indegree.len() {
            Ok(())
        } else {
            Err(Error::InvariantViolation(
                "edge relation has a cycle".into(),
            ))
        }
    }

    /// Copies every node and edge of `other` into `self` under fresh ids,
    /// shifting levels by `level_shift`. Returns the id mapping.
    pub(crate) fn absorb(
        &mut self,
        other: &Gks,
        level_shift: u32,
    ) -> Result<BTreeMap<NodeId, NodeId>> {
        let mut map = BTreeMap::new();
        for (old, g) in &other.nodes {
            let new = self.add_node(g.clone())?;
            if let Some(l) = other.level(*old) {
                self.set_level(new, l + level_shift)?;
            }
            map.insert(*old, new);
        }
        for e in &other.edges {
            self.add_edge(map[&e.child], map[&e.parent], e.relation.clone())?;
        }
        Ok(map)
    }

    pub(crate) fn replace_edges(&mut self, edges: BTreeSet<Edge>) {
        self.edges = edges;
    }

    pub(crate) fn replace_levels(&mut self, levels: Option<BTreeMap<NodeId, u32>>) {
        self.levels = levels;
    }
}
