use std::collections::BTreeMap;
use std::fmt::Write;

use crate::gks::{Gks, RelationName};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RankDirection {
    /// Coarse granules drawn at the bottom (`rankdir=BT`).
    #[default]
    CoarseAtBottom,
    /// Coarse granules drawn at the top (`rankdir=TB`).
    CoarseAtTop,
}

/// What to append to a node's label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExtensionDisplay {
    #[default]
    Hidden,
    Ids,
    Count,
}

#[derive(Debug, Clone)]
pub struct DotOptions {
    pub rank: RankDirection,
    pub extensions: ExtensionDisplay,
    /// Relation name → DOT edge attributes (e.g. `style=dashed`).
    pub edge_styles: BTreeMap<String, String>,
}

impl Default for DotOptions {
    fn default() -> Self {
        DotOptions {
            rank: RankDirection::default(),
            extensions: ExtensionDisplay::default(),
            edge_styles: BTreeMap::from([(
                RelationName::VIEW_OF.to_string(),
                "style=dashed".to_string(),
            )]),
        }
    }
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Renders `g` as a DOT digraph. Each edge is written parent → child with
/// `dir=back`, so the arrow points from the finer granule to the coarser
/// one and parents rank below their children by default.
pub fn gks_to_dot(g: &Gks, opts: &DotOptions) -> String {
    let mut out = String::new();
    let rankdir = match opts.rank {
        RankDirection::CoarseAtBottom => "BT",
        RankDirection::CoarseAtTop => "TB",
    };
    writeln!(out, "digraph gks {{").unwrap();
    writeln!(out, "  rankdir={rankdir};").unwrap();
    writeln!(out, "  node [shape=box];").unwrap();
    for (id, n) in g.nodes() {
        let label = match opts.extensions {
            ExtensionDisplay::Hidden => n.label().to_string(),
            ExtensionDisplay::Count => format!("{} ({})", n.label(), n.extension().len()),
            ExtensionDisplay::Ids => {
                let ids: Vec<&str> = n.extension().iter().map(|i| i.as_str()).collect();
                format!("{}\n{{{}}}", n.label(), ids.join(", "))
            }
        };
        writeln!(out, "  {id} [label={}];", quote(&label)).unwrap();
    }
    let mut by_level: BTreeMap<u32, Vec<String>> = BTreeMap::new();
    for (id, level) in g.levels().into_iter().flatten() {
        by_level.entry(*level).or_default().push(id.to_string());
    }
    for members in by_level.values().filter(|m| m.len() > 1) {
        writeln!(out, "  {{ rank=same; {}; }}", members.join("; ")).unwrap();
    }
    for e in g.edges() {
        write!(out, "  {} -> {} [dir=back", e.parent, e.child).unwrap();
        if let Some(style) = opts.edge_styles.get(e.relation.as_str()) {
            write!(out, ", {style}").unwrap();
        }
        if !e.relation.is_partial_order() {
            write!(out, ", label={}", quote(e.relation.as_str())).unwrap();
        }
        writeln!(out, "];").unwrap();
    }
    writeln!(out, "}}").unwrap();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::ops::build_attribute_value_structure;
    use std::sync::Arc;

    #[test]
    fn table_one_theory_dot() {
        let g = build_attribute_value_structure(&Arc::new(fixtures::table1()), "Theory").unwrap();
        let dot = gks_to_dot(&g, &DotOptions::default());
        assert!(dot.starts_with("digraph gks {\n  rankdir=BT;\n"));
        assert_eq!(dot.matches(" [label=").count(), 6);
        assert_eq!(dot.matches(" -> ").count(), 5);
        assert!(dot.contains("  n0 -> n3 [dir=back];\n"));
        assert_eq!(dot, gks_to_dot(&g, &DotOptions::default()));
    }

    #[test]
    fn extension_display() {
        let g = build_attribute_value_structure(&Arc::new(fixtures::table1()), "Theory").unwrap();
        let ids = gks_to_dot(
            &g,
            &DotOptions {
                extensions: ExtensionDisplay::Ids,
                ..Default::default()
            },
        );
        assert!(ids.contains(r#"n3 [label="LR\n{No.25, No.29}"];"#));
        let counts = gks_to_dot(
            &g,
            &DotOptions {
                extensions: ExtensionDisplay::Count,
                rank: RankDirection::CoarseAtTop,
                ..Default::default()
            },
        );
        assert!(counts.contains(r#"n0 [label="Theory (7)"];"#));
        assert!(counts.contains("rankdir=TB;"));
    }

    #[test]
    fn isolated_nodes_and_quoting() {
        let t = Arc::new(fixtures::table1());
        let mut g = crate::gks::Gks::new(t.clone());
        g.add_node(
            crate::granule::make_granule(
                crate::formula::Formula::eq("Theory", "FCA"),
                &t,
                Some("say \"hi\"".into()),
            )
            .unwrap(),
        )
        .unwrap();
        let dot = gks_to_dot(&g, &DotOptions::default());
        assert!(!dot.contains("->"));
        assert!(dot.contains(r#"n0 [label="say \"hi\""];"#));
    }
}
