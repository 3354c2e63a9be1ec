use super::{Atom, LtlFormula, NumExpr};

/// Canonical, fully parenthesised rendering. `parse_ltl` inverts it exactly.
pub fn render_ltl(f: &LtlFormula) -> String {
    let mut out = String::new();
    formula(f, &mut out);
    out
}

fn formula(f: &LtlFormula, out: &mut String) {
    let binary = |l: &LtlFormula, op: &str, r: &LtlFormula, out: &mut String| {
        out.push('(');
        formula(l, out);
        out.push(' ');
        out.push_str(op);
        out.push(' ');
        formula(r, out);
        out.push(')');
    };
    let wrapped = |op: &str, g: &LtlFormula, out: &mut String| {
        out.push_str(op);
        out.push('(');
        formula(g, out);
        out.push(')');
    };
    match f {
        LtlFormula::Atom(a) => atom(a, out),
        LtlFormula::Not(g) => {
            out.push('~');
            formula(g, out);
        }
        LtlFormula::And(l, r) => binary(l, "&", r, out),
        LtlFormula::Or(l, r) => binary(l, "|", r, out),
        LtlFormula::Implies(l, r) => binary(l, "->", r, out),
        LtlFormula::Iff(l, r) => binary(l, "<->", r, out),
        LtlFormula::Until(l, r) => binary(l, "U", r, out),
        LtlFormula::Next(g) => wrapped("X", g, out),
        LtlFormula::Globally(g) => wrapped("G", g, out),
        LtlFormula::Finally(g) => wrapped("F", g, out),
    }
}

fn atom(a: &Atom, out: &mut String) {
    if a.is_truthy() {
        term(&a.lhs, out);
        return;
    }
    out.push('(');
    term(&a.lhs, out);
    out.push(' ');
    out.push_str(a.op.symbol());
    out.push(' ');
    term(&a.rhs, out);
    out.push(')');
}

pub(crate) fn term(e: &NumExpr, out: &mut String) {
    match e {
        NumExpr::Var(v) => out.push_str(&v.to_string()),
        NumExpr::Lit(v) => out.push_str(&v.to_string()),
        NumExpr::Add(l, r) | NumExpr::Sub(l, r) => {
            let op = if matches!(e, NumExpr::Add(..)) { " + " } else { " - " };
            out.push('(');
            term(l, out);
            out.push_str(op);
            term(r, out);
            out.push(')');
        }
    }
}

/// Shortest round-tripping decimal; always carries a `.` or an exponent.
pub(crate) fn float_literal(x: f64) -> String {
    let s = format!("{x:?}");
    debug_assert!(s.contains('.') || s.contains('e') || !x.is_finite());
    s
}
