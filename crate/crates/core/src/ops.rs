//! Construction and combination of granular knowledge structures:
//! attribute-value structures, generalization, union, intersection,
//! difference and product.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use indexmap::IndexSet;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::formula::{AtomicFormula, Formula};
use crate::gks::{Gks, NodeId, RelationName};
use crate::granule::{bound_to_same_table, comparable, leq, make_granule, ConceptGranule};
use crate::table::{merge_universes, InformationTable};

/// Which operand of a binary operation a node came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct NodeRef {
    pub input: Side,
    pub node: NodeId,
}

impl NodeRef {
    fn first(node: NodeId) -> Self {
        NodeRef {
            input: Side::First,
            node,
        }
    }

    fn second(node: NodeId) -> Self {
        NodeRef {
            input: Side::Second,
            node,
        }
    }
}

/// Audit trail of a union, intersection or difference. Every input node
/// appears exactly once: in a merged pair, in `kept` or in `dropped`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct StructureDelta {
    /// Input nodes unified because their intensions coincide.
    pub merged: Vec<(NodeRef, NodeRef)>,
    /// Input nodes carried into the result on their own.
    pub kept: Vec<NodeRef>,
    /// Input nodes with no counterpart in the result.
    pub dropped: Vec<NodeRef>,
    /// Result node → the input nodes it was built from.
    pub provenance: BTreeMap<NodeId, Vec<NodeRef>>,
}

impl StructureDelta {
    fn record(&mut self, result: NodeId, source: NodeRef) {
        self.provenance.entry(result).or_default().push(source);
    }

    /// Every input node mentioned by the delta, with multiplicity.
    pub fn mentioned(&self) -> Vec<NodeRef> {
        self.merged
            .iter()
            .flat_map(|(a, b)| [*a, *b])
            .chain(self.kept.iter().copied())
            .chain(self.dropped.iter().copied())
            .collect()
    }
}

/// Two-level structure over the equality granules of `attribute`: a level-1
/// root whose intension is the disjunction of `(attribute = v)` over the
/// value domain, labeled with the attribute name, and one level-2 child per
/// value, labeled with the value.
pub fn build_attribute_value_structure(
    table: &Arc<InformationTable>,
    attribute: &str,
) -> Result<Gks> {
    let domain = table.value_domain(attribute)?;
    let root_formula = Formula::any_of(attribute, domain.iter())
        .ok_or_else(|| Error::EmptyDomain(attribute.to_string()))?;
    let mut g = Gks::new(Arc::clone(table));
    let root = g.add_node(make_granule(
        root_formula,
        table,
        Some(attribute.to_string()),
    )?)?;
    g.set_level(root, 1)?;
    for value in domain.iter() {
        let child = g.add_node(make_granule(
            Formula::eq(attribute, value),
            table,
            Some(value.to_string()),
        )?)?;
        g.set_level(child, 2)?;
        g.add_edge(child, root, RelationName::partial_order())?;
    }
    g.validate()?;
    Ok(g)
}

/// Places a new super-granule with intension `shared` above the roots of
/// every input. Input levels shift one finer; the new granule is level 1.
pub fn generalize(inputs: &[Gks], shared: &AtomicFormula, label: &str) -> Result<Gks> {
    let first = inputs.first().ok_or(Error::NoInputs)?;
    let table = Arc::clone(first.table());
    for g in inputs {
        if !(Arc::ptr_eq(g.table(), &table) || **g.table() == *table) {
            return Err(Error::TableMismatch(
                table.name().to_string(),
                g.table().name().to_string(),
            ));
        }
    }
    let top = make_granule(
        Formula::Atom(shared.clone()),
        &table,
        Some(label.to_string()),
    )?;
    for g in inputs {
        for root in g.roots() {
            let granule = g.node(root)?;
            if !granule.extension().is_subset(top.extension()) {
                return Err(Error::SharedNotSuper {
                    shared: shared.to_string(),
                    node: granule.label().to_string(),
                });
            }
        }
    }
    let leveled = inputs.iter().all(|g| g.levels().is_some());
    let mut out = Gks::new(Arc::clone(&table));
    let top_id = out.add_node(top)?;
    if leveled {
        out.set_level(top_id, 1)?;
    }
    for g in inputs {
        let map = out.absorb(g, 1)?;
        for root in g.roots() {
            out.add_edge(map[&root], top_id, RelationName::partial_order())?;
        }
    }
    out.validate()?;
    Ok(out)
}

struct TwoLevel<'g> {
    root: (NodeId, &'g ConceptGranule),
    children: Vec<(NodeId, &'g ConceptGranule)>,
}

impl<'g> TwoLevel<'g> {
    fn of(g: &'g Gks) -> Result<Self> {
        let (root, children) = g.two_level()?;
        Ok(TwoLevel {
            root: (root, g.node(root)?),
            children: children
                .into_iter()
                .map(|c| Ok((c, g.node(c)?)))
                .collect::<Result<_>>()?,
        })
    }

    fn child_keys(&self) -> HashMap<String, NodeId> {
        let mut keys = HashMap::new();
        for (id, g) in &self.children {
            keys.entry(g.intension().canonical_text()).or_insert(*id);
        }
        keys
    }
}

/// Intension for the combined root of two two-level structures.
///
/// Roots match when their intensions are syntactically equal. Two
/// attribute-value roots on the same attribute also match even when their
/// value lists differ; the combined root is then the disjunction over both
/// value lists.
fn combined_root(first: &ConceptGranule, second: &ConceptGranule) -> Result<Formula> {
    let (f1, f2) = (first.intension(), second.intension());
    if let (Some((a1, v1)), Some((a2, v2))) =
        (f1.as_attribute_disjunction(), f2.as_attribute_disjunction())
    {
        if a1 == a2 {
            let values: IndexSet<&str> = v1.into_iter().chain(v2).collect();
            return Ok(Formula::any_of(a1, values).expect("disjunctions have at least one atom"));
        }
    }
    if f1.canonical_text() == f2.canonical_text() {
        return Ok(f1.clone());
    }
    Err(Error::RootMismatch(
        f1.canonical_text(),
        f2.canonical_text(),
    ))
}

fn two_level_result(table: &Arc<InformationTable>, root: ConceptGranule) -> Result<(Gks, NodeId)> {
    let mut out = Gks::new(Arc::clone(table));
    let root_id = out.add_node(root)?;
    out.set_level(root_id, 1)?;
    Ok((out, root_id))
}

fn add_child(out: &mut Gks, root: NodeId, child: ConceptGranule) -> Result<NodeId> {
    let id = out.add_node(child)?;
    out.set_level(id, 2)?;
    out.add_edge(id, root, RelationName::partial_order())?;
    Ok(id)
}

/// Union of two two-level structures sharing a root concept. The result
/// lives on the merged table; children with the same intension collapse
/// into one node whose extension covers both sources.
pub fn union_gks(g1: &Gks, g2: &Gks) -> Result<(Gks, StructureDelta)> {
    let (a, b) = (TwoLevel::of(g1)?, TwoLevel::of(g2)?);
    let root_formula = combined_root(a.root.1, b.root.1)?;
    let table = Arc::new(merge_universes(g1.table(), g2.table()));
    let mut delta = StructureDelta::default();

    let root = make_granule(root_formula, &table, Some(a.root.1.label().to_string()))?;
    let (mut out, root_id) = two_level_result(&table, root)?;
    delta
        .merged
        .push((NodeRef::first(a.root.0), NodeRef::second(b.root.0)));
    delta.record(root_id, NodeRef::first(a.root.0));
    delta.record(root_id, NodeRef::second(b.root.0));

    let mut by_key: HashMap<String, (NodeId, NodeRef)> = HashMap::new();
    let sides = [(Side::First, &a.children), (Side::Second, &b.children)];
    for (side, children) in sides {
        for (id, child) in children {
            let source = NodeRef {
                input: side,
                node: *id,
            };
            let key = child.intension().canonical_text();
            match by_key.get(&key) {
                Some((result, first_source)) => {
                    delta.merged.push((*first_source, source));
                    delta.record(*result, source);
                }
                None => {
                    let result = add_child(&mut out, root_id, child.rebind(&table)?)?;
                    by_key.insert(key, (result, source));
                    delta.record(result, source);
                }
            }
        }
    }
    // children that found no partner are "kept"
    let merged_members: Vec<NodeRef> = delta.merged.iter().flat_map(|(x, y)| [*x, *y]).collect();
    for (result, sources) in &delta.provenance {
        if *result == root_id {
            continue;
        }
        for s in sources {
            if !merged_members.contains(s) {
                delta.kept.push(*s);
            }
        }
    }
    out.validate()?;
    Ok((out, delta))
}

/// Intersection of two two-level structures sharing a root concept: the
/// children whose intension occurs in both, evaluated on the merged table.
pub fn intersect_gks(g1: &Gks, g2: &Gks) -> Result<(Gks, StructureDelta)> {
    let (a, b) = (TwoLevel::of(g1)?, TwoLevel::of(g2)?);
    let root_formula = combined_root(a.root.1, b.root.1)?;
    let table = Arc::new(merge_universes(g1.table(), g2.table()));
    let mut delta = StructureDelta::default();

    let root = make_granule(root_formula, &table, Some(a.root.1.label().to_string()))?;
    let (mut out, root_id) = two_level_result(&table, root)?;
    delta
        .merged
        .push((NodeRef::first(a.root.0), NodeRef::second(b.root.0)));
    delta.record(root_id, NodeRef::first(a.root.0));
    delta.record(root_id, NodeRef::second(b.root.0));

    let first_keys = a.child_keys();
    let second_keys = b.child_keys();
    let mut used_second = Vec::new();
    for (id, child) in &a.children {
        let key = child.intension().canonical_text();
        match second_keys.get(&key) {
            Some(partner) if first_keys[&key] == *id => {
                let result = add_child(&mut out, root_id, child.rebind(&table)?)?;
                delta
                    .merged
                    .push((NodeRef::first(*id), NodeRef::second(*partner)));
                delta.record(result, NodeRef::first(*id));
                delta.record(result, NodeRef::second(*partner));
                used_second.push(*partner);
            }
            _ => delta.dropped.push(NodeRef::first(*id)),
        }
    }
    for (id, _) in &b.children {
        if !used_second.contains(id) {
            delta.dropped.push(NodeRef::second(*id));
        }
    }
    out.validate()?;
    Ok((out, delta))
}

/// Difference of two two-level structures sharing a root concept: the first
/// structure's root and those of its children whose intension occurs in no
/// child of the second. Extensions stay as in the first structure.
pub fn difference_gks(g1: &Gks, g2: &Gks) -> Result<(Gks, StructureDelta)> {
    let (a, b) = (TwoLevel::of(g1)?, TwoLevel::of(g2)?);
    combined_root(a.root.1, b.root.1)?;
    let mut delta = StructureDelta::default();

    let (mut out, root_id) = two_level_result(g1.table(), a.root.1.clone())?;
    delta.kept.push(NodeRef::first(a.root.0));
    delta.dropped.push(NodeRef::second(b.root.0));
    delta.record(root_id, NodeRef::first(a.root.0));

    let second_keys = b.child_keys();
    for (id, child) in &a.children {
        if second_keys.contains_key(&child.intension().canonical_text()) {
            delta.dropped.push(NodeRef::first(*id));
        } else {
            let result = add_child(&mut out, root_id, (*child).clone())?;
            delta.kept.push(NodeRef::first(*id));
            delta.record(result, NodeRef::first(*id));
        }
    }
    for (id, _) in &b.children {
        delta.dropped.push(NodeRef::second(*id));
    }
    out.validate()?;
    Ok((out, delta))
}

/// One operand of [`product`]: a granule and its one-level-finer children.
#[derive(Debug, Clone)]
pub struct ProductFactor {
    pub parent: ConceptGranule,
    pub children: Vec<ConceptGranule>,
}

impl ProductFactor {
    /// Root and children of a two-level structure, optionally restricted to
    /// the children whose labels appear in `select` (in `select` order).
    pub fn from_two_level(g: &Gks, select: Option<&[String]>) -> Result<Self> {
        let (root, children) = g.two_level()?;
        let children = match select {
            None => children
                .into_iter()
                .map(|c| g.node(c).cloned())
                .collect::<Result<_>>()?,
            Some(labels) => labels
                .iter()
                .map(|l| {
                    children
                        .iter()
                        .map(|c| g.node(*c))
                        .find(|n| n.as_ref().is_ok_and(|n| n.label() == l))
                        .unwrap_or_else(|| Err(Error::UnknownNode(l.clone())))
                        .cloned()
                })
                .collect::<Result<_>>()?,
        };
        Ok(ProductFactor {
            parent: g.node(root)?.clone(),
            children,
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct ProductOptions {
    /// Shared atomic formula and label for a super-granule above both parents.
    pub shared: Option<(AtomicFormula, String)>,
    /// Keep conjunction granules with an empty extension.
    pub keep_empty: bool,
}

/// Product of two granules through their children: one conjunction granule
/// `φi ∧ ϕj` per pair of children, linked to both. Levels, coarsest first:
/// the optional shared super-granule, the two parents, their children, the
/// conjunctions.
pub fn product(left: &ProductFactor, right: &ProductFactor, opts: &ProductOptions) -> Result<Gks> {
    let table = Arc::clone(left.parent.table());
    let all = std::iter::once(&right.parent)
        .chain(&left.children)
        .chain(&right.children);
    for g in all {
        if !bound_to_same_table(&left.parent, g) {
            return Err(Error::TableMismatch(
                table.name().to_string(),
                g.table().name().to_string(),
            ));
        }
    }
    for factor in [left, right] {
        for child in &factor.children {
            if !leq(child, &factor.parent)? {
                return Err(Error::NotFiner {
                    child: child.label().to_string(),
                    parent: factor.parent.label().to_string(),
                });
            }
        }
    }

    let mut out = Gks::new(Arc::clone(&table));
    let mut base = 0;
    let top = match &opts.shared {
        Some((formula, label)) => {
            let top = make_granule(Formula::Atom(formula.clone()), &table, Some(label.clone()))?;
            for parent in [&left.parent, &right.parent] {
                let (inner, outer) = comparable(parent, &top)?;
                if !inner.is_subset(&outer) {
                    return Err(Error::SharedNotSuper {
                        shared: formula.to_string(),
                        node: parent.label().to_string(),
                    });
                }
            }
            base = 1;
            let id = out.add_node(top)?;
            out.set_level(id, 1)?;
            Some(id)
        }
        None => None,
    };

    let mut child_ids = [Vec::new(), Vec::new()];
    let mut parent_ids = Vec::new();
    for factor in [left, right] {
        let id = out.add_node(factor.parent.clone())?;
        out.set_level(id, base + 1)?;
        if let Some(top) = top {
            out.add_edge(id, top, RelationName::partial_order())?;
        }
        parent_ids.push(id);
    }
    for (side, factor) in [left, right].into_iter().enumerate() {
        for child in &factor.children {
            let id = out.add_node(child.clone())?;
            out.set_level(id, base + 2)?;
            out.add_edge(id, parent_ids[side], RelationName::partial_order())?;
            child_ids[side].push(id);
        }
    }
    for (i, ci) in left.children.iter().enumerate() {
        for (j, cj) in right.children.iter().enumerate() {
            let conj = make_granule(
                ci.intension().clone().and(cj.intension().clone()),
                &table,
                Some(format!("{} & {}", ci.label(), cj.label())),
            )?;
            if conj.extension().is_empty() && !opts.keep_empty {
                continue;
            }
            let id = out.add_node(conj)?;
            out.set_level(id, base + 3)?;
            out.add_edge(id, child_ids[0][i], RelationName::partial_order())?;
            out.add_edge(id, child_ids[1][j], RelationName::partial_order())?;
        }
    }
    out.validate()?;
    Ok(out)
}
