#![allow(dead_code)]

pub mod dot;

use std::collections::BTreeSet;
use std::sync::Arc;

use gks_core::fixtures;
use gks_core::*;
use proptest::prelude::*;
use rand::Rng;

pub const VALUES: [&str; 3] = ["v0", "v1", "v2"];
/// Value never stored in a generated table.
pub const ABSENT: &str = "v9";

pub fn attr(i: usize) -> String {
    format!("a{i}")
}

/// `cells[row][attr]` holds value indices into [`VALUES`].
pub type TableSpec = Vec<Vec<Vec<usize>>>;

pub fn table_from_spec(name: &str, attributes: usize, cells: &TableSpec) -> InformationTable {
    let rows = cells
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let id = ObjectId::new(format!("o{i}")).unwrap();
            let values = row
                .iter()
                .map(|cell| cell.iter().map(|v| VALUES[*v]).collect::<ValueSet>())
                .collect();
            (id, values)
        })
        .collect();
    InformationTable::new(name, (0..attributes).map(attr).collect(), rows).unwrap()
}

fn cell_strategy() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::btree_set(0..VALUES.len(), 0..=2).prop_map(|s| s.into_iter().collect())
}

/// Up to 8 objects, 1 to 4 attributes, values drawn from three tokens.
pub fn table_strategy() -> impl Strategy<Value = (usize, TableSpec)> {
    (1usize..=4).prop_flat_map(|attributes| {
        (
            Just(attributes),
            prop::collection::vec(prop::collection::vec(cell_strategy(), attributes), 0..=8),
        )
    })
}

pub fn formula_strategy(attributes: usize) -> impl Strategy<Value = Formula> {
    let value = prop::sample::select(vec!["v0", "v1", "v2", ABSENT]);
    let leaf = (0..attributes, value, any::<bool>()).prop_map(|(a, v, eq)| {
        if eq {
            Formula::eq(attr(a), v)
        } else {
            Formula::neq(attr(a), v)
        }
    });
    leaf.prop_recursive(4, 32, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(l, r)| l.and(r)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| l.or(r)),
            inner.prop_map(Formula::not),
        ]
    })
}

pub fn random_spec<R: Rng>(rng: &mut R) -> (usize, TableSpec) {
    let attributes = rng.gen_range(1..=4);
    let objects = rng.gen_range(0..=8);
    let spec = (0..objects)
        .map(|_| {
            (0..attributes)
                .map(|_| {
                    let mut cell: Vec<usize> =
                        (0..VALUES.len()).filter(|_| rng.gen_bool(0.4)).collect();
                    cell.truncate(2);
                    cell
                })
                .collect()
        })
        .collect();
    (attributes, spec)
}

pub fn random_formula<R: Rng>(rng: &mut R, attributes: usize, depth: usize) -> Formula {
    if depth == 0 || rng.gen_bool(0.3) {
        let a = attr(rng.gen_range(0..attributes));
        let v = ["v0", "v1", "v2", ABSENT][rng.gen_range(0..4)];
        return if rng.gen_bool(0.5) {
            Formula::eq(a, v)
        } else {
            Formula::neq(a, v)
        };
    }
    match rng.gen_range(0..3) {
        0 => random_formula(rng, attributes, depth - 1).and(random_formula(
            rng,
            attributes,
            depth - 1,
        )),
        1 => random_formula(rng, attributes, depth - 1).or(random_formula(
            rng,
            attributes,
            depth - 1,
        )),
        _ => random_formula(rng, attributes, depth - 1).not(),
    }
}

/// Truth of `f` for one row, read straight from the cells.
pub fn row_truth(f: &Formula, t: &InformationTable, row: usize) -> bool {
    match f {
        Formula::Atom(a) => {
            let cell = t.cell(row, t.attribute_position(&a.attribute).unwrap());
            match a.relation {
                Relation::Eq => cell.iter().any(|v| v == a.value),
                Relation::Neq => !cell.is_empty() && cell.iter().all(|v| v != a.value),
            }
        }
        Formula::And(l, r) => row_truth(l, t, row) && row_truth(r, t, row),
        Formula::Or(l, r) => row_truth(l, t, row) || row_truth(r, t, row),
        Formula::Not(inner) => !row_truth(inner, t, row),
    }
}

/// Row-scan oracle for m(f).
pub fn oracle(f: &Formula, t: &InformationTable) -> ObjectIdSet {
    (0..t.len())
        .filter(|row| row_truth(f, t, *row))
        .map(|row| t.universe()[row].clone())
        .collect()
}

pub fn labels(g: &Gks, nodes: &BTreeSet<NodeId>) -> Vec<String> {
    nodes
        .iter()
        .map(|n| g.node(*n).unwrap().label().to_string())
        .collect()
}

pub fn child_intensions(g: &Gks) -> Vec<String> {
    let (_, children) = g.two_level().unwrap();
    let mut out: Vec<String> = children
        .iter()
        .map(|c| g.node(*c).unwrap().intension().canonical_text())
        .collect();
    out.sort();
    out
}

pub fn fixture_tables() -> Vec<Arc<InformationTable>> {
    vec![
        Arc::new(fixtures::table1()),
        Arc::new(fixtures::corpus()),
        Arc::new(fixtures::proceedings_a()),
        Arc::new(fixtures::proceedings_b()),
        Arc::new(fixtures::fields()),
    ]
}

/// Every attribute-value structure over the bundled tables.
pub fn attribute_structures() -> Vec<(String, Gks)> {
    let mut out = Vec::new();
    for t in fixture_tables() {
        for a in t.attributes() {
            let g = build_attribute_value_structure(&t, a).unwrap();
            out.push((format!("{}.{}", t.name(), a), g));
        }
    }
    out
}

pub fn rough_sets() -> AtomicFormula {
    AtomicFormula::eq("Discipline", "Rough Sets")
}

/// Named structures covering every construction operation.
pub fn fixture_structures() -> Vec<(String, Gks)> {
    let mut out = attribute_structures();
    let t1 = Arc::new(fixtures::table1());
    let theory = build_attribute_value_structure(&t1, "Theory").unwrap();
    let domain = build_attribute_value_structure(&t1, "Application Domain").unwrap();
    out.push((
        "generalized".into(),
        generalize(
            &[theory.clone(), domain.clone()],
            &rough_sets(),
            "Rough Sets",
        )
        .unwrap(),
    ));
    let a =
        build_attribute_value_structure(&Arc::new(fixtures::proceedings_a()), "Theory").unwrap();
    let b =
        build_attribute_value_structure(&Arc::new(fixtures::proceedings_b()), "Theory").unwrap();
    out.push(("union".into(), union_gks(&a, &b).unwrap().0));
    out.push(("intersect".into(), intersect_gks(&a, &b).unwrap().0));
    out.push(("difference".into(), difference_gks(&a, &b).unwrap().0));
    out.push(("product".into(), example_product(true)));
    out.push(("fields".into(), fixtures::fields_view_structure()));
    out
}

/// {LR, RA, DR} × {IR, MS, IS} on the synthetic corpus under [Rough Sets].
pub fn example_product(keep_empty: bool) -> Gks {
    let t = Arc::new(fixtures::corpus());
    let theory = build_attribute_value_structure(&t, "Theory").unwrap();
    let domain = build_attribute_value_structure(&t, "Application Domain").unwrap();
    let pick = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let left = ProductFactor::from_two_level(&theory, Some(&pick(&["LR", "RA", "DR"]))).unwrap();
    let right = ProductFactor::from_two_level(&domain, Some(&pick(&["IR", "MS", "IS"]))).unwrap();
    product(
        &left,
        &right,
        &ProductOptions {
            shared: Some((rough_sets(), "Rough Sets".into())),
            keep_empty,
        },
    )
    .unwrap()
}

/// Checks zoom round-trips between every pair of adjacent full levels.
pub fn zoom_round_trips(g: &Gks) -> Result<usize, String> {
    let Some(max) = g.max_level() else {
        return Ok(0);
    };
    let mut checked = 0;
    for level in 1..max {
        let coarse: BTreeSet<NodeId> = g.level_members(level).into_iter().collect();
        let fine: BTreeSet<NodeId> = g.level_members(level + 1).into_iter().collect();
        let down = zoom_in(g, &coarse).map_err(|e| format!("zoom_in level {level}: {e}"))?;
        let back = zoom_out(g, &down).map_err(|e| format!("zoom_out after zoom_in: {e}"))?;
        if back != coarse {
            return Err(format!("zoom_out(zoom_in(level {level})) = {back:?}"));
        }
        let up = zoom_out(g, &fine).map_err(|e| format!("zoom_out level {}: {e}", level + 1))?;
        let again = zoom_in(g, &up).map_err(|e| format!("zoom_in after zoom_out: {e}"))?;
        if again != fine {
            return Err(format!(
                "zoom_in(zoom_out(level {})) = {again:?}",
                level + 1
            ));
        }
        checked += 2;
    }
    Ok(checked)
}
