//! Bundled example data.
//!
//! `table1` is the seven-paper excerpt of the proceedings analysis.
//! `corpus` is a synthetic corpus whose Theory and Application Domain
//! columns range over the full value sets of that analysis. `proceedings_a`
//! and `proceedings_b` are two synthetic proceedings whose theory sets
//! differ by exactly {LR, RA}, and `fields` backs the field/topic view
//! switch.

use std::sync::Arc;

use crate::formula::Formula;
use crate::gks::{Gks, RelationName};
use crate::granule::make_granule;
use crate::table::{ingest_csv, InformationTable, IngestConfig};

pub const TABLE1_CSV: &str = include_str!("../fixtures/table1.csv");
pub const CORPUS_CSV: &str = include_str!("../fixtures/corpus.csv");
pub const PROCEEDINGS_A_CSV: &str = include_str!("../fixtures/rsfdgrc2005.csv");
pub const PROCEEDINGS_B_CSV: &str = include_str!("../fixtures/rskt2006.csv");
pub const FIELDS_CSV: &str = include_str!("../fixtures/fields.csv");

fn load(csv: &str, name: &str) -> InformationTable {
    ingest_csv(csv.as_bytes(), &IngestConfig::named(name)).expect("bundled fixture is well-formed")
}

pub fn table1() -> InformationTable {
    load(TABLE1_CSV, "table1")
}

pub fn corpus() -> InformationTable {
    load(CORPUS_CSV, "corpus")
}

pub fn proceedings_a() -> InformationTable {
    load(PROCEEDINGS_A_CSV, "rsfdgrc2005")
}

pub fn proceedings_b() -> InformationTable {
    load(PROCEEDINGS_B_CSV, "rskt2006")
}

pub fn fields() -> InformationTable {
    load(FIELDS_CSV, "fields")
}

/// Fields [RS] and [FS] (level 1) over the topics [ML] and [DR] (level 2),
/// each topic linked to both fields.
pub fn fields_view_structure() -> Gks {
    let table = Arc::new(fields());
    let mut g = Gks::new(Arc::clone(&table));
    let granule = |attr: &str, value: &str| {
        make_granule(Formula::eq(attr, value), &table, Some(value.to_string()))
            .expect("fixture attributes exist")
    };
    let rs = g.add_node(granule("Field", "RS")).unwrap();
    let fs = g.add_node(granule("Field", "FS")).unwrap();
    let ml = g.add_node(granule("Topic", "ML")).unwrap();
    let dr = g.add_node(granule("Topic", "DR")).unwrap();
    for (n, level) in [(rs, 1), (fs, 1), (ml, 2), (dr, 2)] {
        g.set_level(n, level).unwrap();
    }
    for child in [ml, dr] {
        for parent in [rs, fs] {
            g.add_edge(child, parent, RelationName::partial_order())
                .unwrap();
        }
    }
    g.validate().expect("fixture structure is consistent");
    g
}
