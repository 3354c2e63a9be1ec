//! Rendering conditions as C expressions.

use std::collections::BTreeSet;

use super::{Condition, HarnessError, HarnessSpec, Role};
use crate::knowledge::Category;
use crate::ltl::{render_ltl, Atom, LtlFormula, NumExpr, Value};

/// Prefix of the saved pre-call copy of a global.
pub(crate) const PRE_PREFIX: &str = "__pre_";

pub(crate) fn c_literal(v: Value) -> String {
    match v {
        Value::Bool(b) => if b { "1" } else { "0" }.to_string(),
        Value::Int(i) if i == i64::MIN => "(-9223372036854775807LL - 1)".to_string(),
        Value::Int(i) if i32::try_from(i).is_ok() => i.to_string(),
        Value::Int(i) if (0..=u32::MAX as i64).contains(&i) => format!("{i}u"),
        Value::Int(i) => format!("{i}LL"),
        Value::UInt(u) if u <= u32::MAX as u64 => format!("{u}u"),
        Value::UInt(u) => format!("{u}ULL"),
        Value::Float(x) => crate::ltl::float_literal(x),
    }
}

pub(crate) fn render_condition(c: &Condition, spec: &HarnessSpec) -> Result<String, HarnessError> {
    render_formula(&c.expr, c.role, spec)
}

fn render_formula(f: &LtlFormula, role: Role, spec: &HarnessSpec) -> Result<String, HarnessError> {
    Ok(match f {
        LtlFormula::Atom(a) => render_atom(a, role, spec)?,
        LtlFormula::Not(g) => format!("!{}", render_formula(g, role, spec)?),
        LtlFormula::And(l, r) => format!("({} && {})", render_formula(l, role, spec)?, render_formula(r, role, spec)?),
        LtlFormula::Or(l, r) => format!("({} || {})", render_formula(l, role, spec)?, render_formula(r, role, spec)?),
        other => {
            return Err(HarnessError::UnsupportedExpr {
                expr: render_ltl(other),
                reason: "not expressible as a C condition".into(),
            })
        }
    })
}

fn render_atom(a: &Atom, role: Role, spec: &HarnessSpec) -> Result<String, HarnessError> {
    let l = render_num(&a.lhs, role, spec)?;
    if a.is_truthy() {
        return Ok(format!("({l} != 0)"));
    }
    Ok(format!("({l} {} {})", a.op.symbol(), render_num(&a.rhs, role, spec)?))
}

fn render_num(e: &NumExpr, role: Role, spec: &HarnessSpec) -> Result<String, HarnessError> {
    Ok(match e {
        NumExpr::Lit(v) => c_literal(*v),
        NumExpr::Add(l, r) => format!("({} + {})", render_num(l, role, spec)?, render_num(r, role, spec)?),
        NumExpr::Sub(l, r) => format!("({} - {})", render_num(l, role, spec)?, render_num(r, role, spec)?),
        NumExpr::Var(v) => {
            let var = spec.var(&v.name).ok_or_else(|| HarnessError::UngroundedVariable(v.name.clone()))?;
            let unsupported = |reason: &str| HarnessError::UnsupportedExpr { expr: v.to_string(), reason: reason.into() };
            if var.is_buffer {
                return Err(unsupported("buffers cannot be compared as scalars"));
            }
            match (role, var.category, v.primed) {
                (Role::Pre, _, true) => return Err(unsupported("preconditions read the pre-call state only")),
                (_, Category::ReturnValue, false) => return Err(unsupported("the return value has no pre-call state")),
                (Role::Post, Category::StateVariable | Category::OutputPort, false) => format!("{PRE_PREFIX}{}", v.name),
                _ => v.name.clone(),
            }
        }
    })
}

/// Globals whose pre-call value a postcondition reads.
pub(crate) fn saved_globals(spec: &HarnessSpec) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for a in &spec.postconditions {
        for v in crate::ltl::collect_vars(&a.condition.expr) {
            if v.primed {
                continue;
            }
            if let Some(var) = spec.var(&v.name) {
                if matches!(var.category, Category::StateVariable | Category::OutputPort) {
                    out.insert(v.name);
                }
            }
        }
    }
    out
}
