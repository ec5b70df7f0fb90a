use std::fmt::Write;

use super::{Cdag, SubCdagFamily};
use crate::vertex::Role;

/// Graphviz rendering. With a family, each member becomes its own cluster;
/// vertices outside every member are drawn at top level.
pub fn to_dot(g: &Cdag, family: Option<&SubCdagFamily>) -> String {
    let mut out = String::new();
    let name = |v: u32| g.id(v).to_string();
    let shape = |v: u32| match g.role(v) {
        Role::InputA | Role::InputB => "box",
        Role::Product => "doublecircle",
        _ => "circle",
    };
    let node = |out: &mut String, v: u32, indent: &str| {
        let _ = writeln!(out, "{indent}\"{}\" [shape={}];", name(v), shape(v));
    };

    out.push_str("digraph cdag {\n  rankdir=BT;\n");
    let mut clustered = vec![false; g.vertex_count()];
    if let Some(fam) = family {
        for (k, members) in fam.members.iter().enumerate() {
            let _ = writeln!(out, "  subgraph cluster_{k} {{");
            let _ = writeln!(out, "    label=\"level {} #{}\";", fam.level, k + 1);
            for &v in members {
                clustered[v as usize] = true;
                node(&mut out, v, "    ");
            }
            out.push_str("  }\n");
        }
    }
    for v in 0..g.vertex_count() as u32 {
        if !clustered[v as usize] {
            node(&mut out, v, "  ");
        }
    }
    for (u, v) in g.edges() {
        let _ = writeln!(out, "  \"{}\" -> \"{}\";", name(u), name(v));
    }
    out.push_str("}\n");
    out
}
