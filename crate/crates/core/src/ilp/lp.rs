//! CPLEX LP text output.

use std::fmt::{Display, Write};

use super::{IlpMode, IlpModel, Var};

/// Soft limit before a long expression continues on the next line.
const LINE_WIDTH: usize = 200;

/// Renders the model as an LP file. Output depends only on the model.
pub fn emit_lp(model: &IlpModel) -> String {
    let mut out = String::new();
    let mode = match model.mode() {
        IlpMode::Lexicographic => "lexicographic",
        IlpMode::VulnerabilityOnly => "vulnerability_only",
    };
    let _ = writeln!(
        out,
        "\\ device isolation model: {} devices, {} connections, budget {}, objective {}",
        model.devices().len(),
        model.connection_count(),
        model.budget(),
        mode
    );

    out.push_str("Minimize\n");
    let mut objective = model.objective();
    if objective.is_empty() {
        // LP readers expect at least one objective term
        if let Some(first) = model.node_vars().next() {
            objective.push((0, first));
        }
    }
    write_expression(&mut out, " obj:", &objective);
    out.push('\n');

    out.push_str("Subject To\n");
    for row in model.rows() {
        let head = format!(" {}:", row.name);
        write_expression(&mut out, &head, &row.terms);
        let _ = writeln!(out, " {} {}", row.sense.symbol(), row.rhs);
    }

    out.push_str("Binary\n");
    for var in model.node_vars().chain(model.pair_vars()) {
        let _ = writeln!(out, " {var}");
    }
    out.push_str("End\n");
    out
}

fn write_expression<C>(out: &mut String, head: &str, terms: &[(C, Var)])
where
    C: Copy + Display + PartialOrd + Default + std::ops::Neg<Output = C> + PartialEq + From<i8>,
{
    out.push_str(head);
    if terms.is_empty() {
        out.push_str(" 0");
        return;
    }
    let mut line_len = head.len();
    let one = C::from(1);
    for (idx, &(coef, var)) in terms.iter().enumerate() {
        let negative = coef < C::default();
        let magnitude = if negative { -coef } else { coef };
        let mut term = String::new();
        match (idx, negative) {
            (0, false) => {}
            (0, true) => term.push_str(" -"),
            (_, false) => term.push_str(" +"),
            (_, true) => term.push_str(" -"),
        }
        if magnitude == one {
            let _ = write!(term, " {var}");
        } else {
            let _ = write!(term, " {magnitude} {var}");
        }
        if line_len + term.len() > LINE_WIDTH {
            out.push_str("\n   ");
            line_len = 3;
        }
        line_len += term.len();
        out.push_str(&term);
    }
}
