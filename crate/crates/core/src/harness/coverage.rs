//! Boundary-value check that a set of harness preconditions leaves no input
//! regime untested.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::{HarnessError, HarnessGroup, SymbolicVar};
use crate::knowledge::ValueType;
use crate::ltl::{collect_vars, render_ltl, LtlFormula, Value};
use crate::monitor::{eval_atom, StateSnapshot, TraceEvent, DEFAULT_EPS};

const MAX_VALUATIONS: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageReport {
    pub covered: bool,
    /// First valuation (in enumeration order) that no group's preconditions
    /// admit. Covers every non-buffer variable.
    pub witness: Option<BTreeMap<String, Value>>,
    /// Number of valuations examined.
    pub checked: u64,
}

/// Enumerates, for every variable read by some precondition, the boundary
/// values around each precondition literal plus the type extremes, and checks
/// that each combination satisfies at least one group's preconditions.
pub fn precondition_coverage(groups: &[HarnessGroup], vars: &[SymbolicVar]) -> Result<CoverageReport, HarnessError> {
    let scalars: Vec<&SymbolicVar> = vars.iter().filter(|v| !v.is_buffer).collect();
    let minimum = |v: &SymbolicVar| domain(v.value_type, &[])[0];

    if groups.is_empty() {
        let witness = scalars.iter().map(|v| (v.name.clone(), minimum(v))).collect();
        return Ok(CoverageReport { covered: false, witness: Some(witness), checked: 0 });
    }

    let mut used = BTreeSet::new();
    let mut literals = Vec::new();
    for g in groups {
        for c in &g.spec.preconditions {
            for v in collect_vars(&c.expr) {
                if v.primed {
                    return Err(HarnessError::UnsupportedExpr {
                        expr: render_ltl(&c.expr),
                        reason: "precondition refers to a post-call value".into(),
                    });
                }
                used.insert(v.name);
            }
            c.expr.for_each_atom(&mut |a| literals.extend(a.literals()));
        }
    }
    for name in &used {
        match vars.iter().find(|v| &v.name == name) {
            None => return Err(HarnessError::UngroundedVariable(name.clone())),
            Some(v) if v.is_buffer => {
                return Err(HarnessError::UnsupportedExpr {
                    expr: name.clone(),
                    reason: "buffers cannot appear in preconditions".into(),
                })
            }
            Some(_) => {}
        }
    }

    let enumerated: Vec<&SymbolicVar> = scalars.iter().copied().filter(|v| used.contains(&v.name)).collect();
    let domains: Vec<Vec<Value>> = enumerated.iter().map(|v| domain(v.value_type, &literals)).collect();
    let total = domains.iter().map(|d| d.len() as u128).product::<u128>();
    if total > MAX_VALUATIONS {
        return Err(HarnessError::TooManyValuations(total));
    }

    let mut index = vec![0usize; domains.len()];
    let mut checked = 0u64;
    loop {
        let mut snapshot = StateSnapshot::default();
        for (k, v) in enumerated.iter().enumerate() {
            snapshot.insert(v.name.clone(), domains[k][index[k]]);
        }
        checked += 1;
        let event = TraceEvent { pre: snapshot, ..Default::default() };
        if !admitted(groups, &event) {
            let witness = scalars
                .iter()
                .map(|v| (v.name.clone(), event.pre.get(&v.name).unwrap_or_else(|| minimum(v))))
                .collect();
            return Ok(CoverageReport { covered: false, witness: Some(witness), checked });
        }
        // Odometer, last variable fastest.
        let mut k = index.len();
        loop {
            if k == 0 {
                return Ok(CoverageReport { covered: true, witness: None, checked });
            }
            k -= 1;
            index[k] += 1;
            if index[k] < domains[k].len() {
                break;
            }
            index[k] = 0;
        }
    }
}

fn admitted(groups: &[HarnessGroup], event: &TraceEvent) -> bool {
    groups.iter().any(|g| g.spec.preconditions.iter().all(|c| holds(&c.expr, event)))
}

fn holds(f: &LtlFormula, event: &TraceEvent) -> bool {
    match f {
        LtlFormula::Atom(a) => eval_atom(a, event, DEFAULT_EPS).expect("every precondition variable is enumerated"),
        LtlFormula::Not(g) => !holds(g, event),
        LtlFormula::And(l, r) => holds(l, event) && holds(r, event),
        LtlFormula::Or(l, r) => holds(l, event) || holds(r, event),
        _ => unreachable!("conditions are checked to be boolean combinations of atoms"),
    }
}

/// Candidate values in probe order: `l-1, l, l+1` for each literal in
/// ascending order, then the type minimum and maximum; clipped and
/// deduplicated.
fn domain(t: ValueType, literals: &[Value]) -> Vec<Value> {
    if t.is_float() {
        let max = if t == ValueType::Float32 { f32::MAX as f64 } else { f64::MAX };
        let mut ls: Vec<f64> = literals.iter().map(|v| v.as_f64()).collect();
        ls.sort_by(f64::total_cmp);
        let mut out: Vec<f64> = Vec::new();
        for x in ls.iter().flat_map(|l| [l - 1.0, *l, l + 1.0]).chain([-max, max]) {
            let x = x.clamp(-max, max);
            if !out.contains(&x) {
                out.push(x);
            }
        }
        return out.into_iter().map(Value::Float).collect();
    }
    let (lo, hi) = t.int_range().expect("scalar integer type");
    let mut ls: Vec<i128> = literals
        .iter()
        .flat_map(|v| match v.as_i128() {
            Some(i) => vec![i],
            None => vec![v.as_f64().floor() as i128, v.as_f64().ceil() as i128],
        })
        .collect();
    ls.sort();
    ls.dedup();
    let mut out: Vec<i128> = Vec::new();
    for x in ls.iter().flat_map(|l| [l - 1, *l, l + 1]).chain([lo, hi]) {
        let x = x.clamp(lo, hi);
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out.into_iter()
        .map(|x| match t {
            ValueType::Bool => Value::Bool(x != 0),
            _ => match i64::try_from(x) {
                Ok(i) => Value::Int(i),
                Err(_) => Value::UInt(x as u64),
            },
        })
        .collect()
}
