use std::fmt::Write;

use crate::cgp::Genotype;

/// Input indices the program actually reads.
pub fn used_inputs(genotype: &Genotype) -> Vec<usize> {
    genotype.used_inputs()
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' | '\\' => {
                out.push('\\');
                out.push(c);
            }
            '\n' => out.push_str("\\n"),
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}

fn vertex(genotype: &Genotype, address: usize) -> String {
    if address < genotype.n_inputs() {
        format!("in{address}")
    } else {
        format!("n{address}")
    }
}

/// Graphviz rendering of the active program. Inputs are boxes, function
/// nodes are labelled with their operator, and edges follow data flow into
/// a single `output` vertex. An edge that reads the previous step's value
/// (source at or after its consumer) is dashed.
///
/// Panics if `input_names` does not have one entry per input.
pub fn export_dot(genotype: &Genotype, input_names: &[String]) -> String {
    assert_eq!(
        input_names.len(),
        genotype.n_inputs(),
        "one name per genotype input"
    );
    let active = genotype.active_nodes();
    let mut dot = String::new();
    dot.push_str("digraph cgp {\n  rankdir=LR;\n");

    for i in used_inputs(genotype) {
        let _ = writeln!(
            dot,
            "  in{i} [shape=box, label={}];",
            quote(&input_names[i])
        );
    }
    for &a in &active {
        let node = genotype.node_at(a).expect("active node");
        let _ = writeln!(
            dot,
            "  n{a} [shape=ellipse, label={}];",
            quote(node.function.symbol())
        );
    }
    dot.push_str("  output [shape=doublecircle, label=\"output\"];\n");

    for &a in &active {
        let node = genotype.node_at(a).expect("active node");
        for (slot, &src) in node.inputs.iter().enumerate() {
            let style = if src >= a { ", style=dashed" } else { "" };
            let _ = writeln!(
                dot,
                "  {} -> n{a} [label=\"{slot}\"{style}];",
                vertex(genotype, src)
            );
        }
    }
    let _ = writeln!(dot, "  {} -> output;", vertex(genotype, genotype.output()));
    dot.push_str("}\n");
    dot
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cgp::{Function, Node};

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("x{i}")).collect()
    }

    #[test]
    fn output_on_input_only() {
        let g = Genotype::new(
            5,
            vec![Node {
                function: Function::Add,
                inputs: [0, 1],
            }],
            3,
            false,
        )
        .unwrap();
        let dot = export_dot(&g, &names(5));
        assert_eq!(dot.matches("shape=box").count(), 1);
        assert_eq!(dot.matches("shape=ellipse").count(), 0);
        assert!(dot.contains("in3 -> output;"));
        assert_eq!(used_inputs(&g), vec![3]);
    }

    #[test]
    fn self_loop_is_dashed() {
        let g = Genotype::new(
            1,
            vec![Node {
                function: Function::Add,
                inputs: [0, 1],
            }],
            1,
            true,
        )
        .unwrap();
        let dot = export_dot(&g, &["PCC".into()]);
        assert!(dot.contains("n1 -> n1 [label=\"1\", style=dashed];"));
        assert!(dot.contains("in0 -> n1 [label=\"0\"];"));
    }

    #[test]
    fn names_are_escaped() {
        let g = Genotype::new(
            1,
            vec![Node {
                function: Function::Mul,
                inputs: [0, 0],
            }],
            0,
            false,
        )
        .unwrap();
        let dot = export_dot(&g, &["a \"quoted\" name".into()]);
        assert!(dot.contains(r#"label="a \"quoted\" name""#));
    }
}
