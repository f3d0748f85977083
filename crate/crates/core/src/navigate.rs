//! Moving between levels (zoom-in / zoom-out) and re-orienting a region of
//! a structure to read it from another view.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::gks::{Edge, Gks, NodeId, RelationName};
use crate::granule::leq;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    In,
    Out,
}

impl std::str::FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "in" => Ok(Direction::In),
            "out" => Ok(Direction::Out),
            other => Err(format!(
                "unknown direction {other:?}, expected \"in\" or \"out\""
            )),
        }
    }
}

fn selection_level(g: &Gks, nodes: &BTreeSet<NodeId>) -> Result<u32> {
    let levels = g.levels().ok_or(Error::NotLeveled)?;
    let mut level = None;
    for n in nodes {
        g.node(*n)?;
        let l = levels[n];
        if *level.get_or_insert(l) != l {
            return Err(Error::MixedLevels);
        }
    }
    level.ok_or(Error::EmptySelection)
}

/// The nodes one level finer that have an edge to some selected node.
pub fn zoom_in(g: &Gks, nodes: &BTreeSet<NodeId>) -> Result<BTreeSet<NodeId>> {
    let level = selection_level(g, nodes)?;
    let finer: BTreeSet<NodeId> = g
        .edges()
        .iter()
        .filter(|e| nodes.contains(&e.parent) && g.level(e.child) == Some(level + 1))
        .map(|e| e.child)
        .collect();
    if finer.is_empty() {
        return Err(Error::AtFinestLevel);
    }
    Ok(finer)
}

/// The nodes one level coarser reached by an edge from some selected node.
pub fn zoom_out(g: &Gks, nodes: &BTreeSet<NodeId>) -> Result<BTreeSet<NodeId>> {
    let level = selection_level(g, nodes)?;
    let coarser: BTreeSet<NodeId> = g
        .edges()
        .iter()
        .filter(|e| nodes.contains(&e.child) && level > 1 && g.level(e.parent) == Some(level - 1))
        .map(|e| e.parent)
        .collect();
    if coarser.is_empty() {
        return Err(Error::AtCoarsestLevel);
    }
    Ok(coarser)
}

pub fn zoom(g: &Gks, direction: Direction, nodes: &BTreeSet<NodeId>) -> Result<BTreeSet<NodeId>> {
    match direction {
        Direction::In => zoom_in(g, nodes),
        Direction::Out => zoom_out(g, nodes),
    }
}

fn common_level(g: &Gks, family: &BTreeSet<NodeId>, name: &str) -> Result<Option<u32>> {
    let Some(levels) = g.levels() else {
        return Ok(None);
    };
    let distinct: BTreeSet<u32> = family.iter().map(|n| levels[n]).collect();
    match distinct.len() {
        1 => Ok(distinct.into_iter().next()),
        _ => Err(Error::NotBipartite(format!(
            "{name} nodes span several levels"
        ))),
    }
}

/// Reverses every edge between `lower` and `upper`, so the former children
/// read as parents, and swaps the two families' levels. Reversed edges are
/// tagged `view-of`; a reversed `view-of` edge returns to `partial-order`
/// when inclusion holds in its new direction.
///
/// Every edge between the families must run lower → upper, and no node
/// outside them may have an edge into either family.
pub fn switch_view(g: &Gks, upper: &BTreeSet<NodeId>, lower: &BTreeSet<NodeId>) -> Result<Gks> {
    for n in upper.iter().chain(lower) {
        g.node(*n)?;
    }
    if let Some(n) = upper.intersection(lower).next() {
        return Err(Error::NotBipartite(format!("{n} is in both families")));
    }
    if upper.is_empty() || lower.is_empty() {
        return Ok(g.clone());
    }
    let in_region = |n: &NodeId| upper.contains(n) || lower.contains(n);

    let mut edges = BTreeSet::new();
    for e in g.edges() {
        match (in_region(&e.child), in_region(&e.parent)) {
            (false, false) => {
                edges.insert(e.clone());
            }
            (false, true) => {
                return Err(Error::NotBipartite(format!(
                    "{} outside the region has an edge into {}",
                    e.child, e.parent
                )))
            }
            (true, false) => {
                edges.insert(e.clone());
            }
            (true, true) => {
                if !(lower.contains(&e.child) && upper.contains(&e.parent)) {
                    return Err(Error::NotBipartite(format!(
                        "edge {} -> {} does not run from lower to upper",
                        e.child, e.parent
                    )));
                }
                let (child, parent) = (e.parent, e.child);
                let relation = if e.relation.is_partial_order() {
                    RelationName::view_of()
                } else if e.relation.as_str() == RelationName::VIEW_OF
                    && leq(g.node(child)?, g.node(parent)?)?
                {
                    RelationName::partial_order()
                } else {
                    e.relation.clone()
                };
                edges.insert(Edge {
                    child,
                    parent,
                    relation,
                });
            }
        }
    }

    let mut out = g.clone();
    out.replace_edges(edges);
    if let (Some(up), Some(low)) = (
        common_level(g, upper, "upper")?,
        common_level(g, lower, "lower")?,
    ) {
        let mut levels: BTreeMap<NodeId, u32> = g.levels().cloned().unwrap_or_default();
        for n in upper {
            levels.insert(*n, low);
        }
        for n in lower {
            levels.insert(*n, up);
        }
        out.replace_levels(Some(levels));
    }
    out.validate().map_err(|e| match e {
        Error::InvariantViolation(msg) => Error::NotBipartite(msg),
        e => e,
    })?;
    Ok(out)
}
