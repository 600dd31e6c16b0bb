//! Graphviz export of a program's active graph.

use std::fmt::Write as _;

use crate::graph::Program;

/// Renders active nodes only. Inputs are boxes `in<i>`, program nodes are
/// labeled `<index>:<FUNCTION> p=<param>`, and each output is a node
/// labeled with its action index. `x` edges are solid, `y` edges dashed.
pub fn to_dot(program: &Program) -> String {
    let mut out = String::from("digraph program {\n  rankdir=LR;\n");
    let active = program.active_nodes();
    for &i in &active {
        match program.node(i) {
            None => writeln!(out, "  n{i} [shape=box, label=\"in{i}\"];").unwrap(),
            Some(node) => writeln!(
                out,
                "  n{i} [shape=ellipse, label=\"{i}:{} p={:.2}\"];",
                node.function, node.param
            )
            .unwrap(),
        }
    }
    for (a, _) in program.outputs().iter().enumerate() {
        writeln!(out, "  out{a} [shape=doublecircle, label=\"{a}\"];").unwrap();
    }
    for &i in &active {
        if let Some(node) = program.node(i) {
            if node.function.reads_x() {
                writeln!(out, "  n{} -> n{i} [style=solid];", node.x).unwrap();
            }
            if node.function.reads_y() {
                writeln!(out, "  n{} -> n{i} [style=dashed];", node.y).unwrap();
            }
        }
    }
    for (a, &o) in program.outputs().iter().enumerate() {
        writeln!(out, "  n{o} -> out{a};").unwrap();
    }
    out.push_str("}\n");
    out
}
