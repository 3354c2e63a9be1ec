use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::trace::{Trace, TraceEvent};
use crate::ltl::{Atom, CmpOp, LtlFormula, NumExpr, Value};

pub const DEFAULT_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum EvalError {
    #[error("variable `{name}` missing at trace position {position}")]
    MissingVariable { name: String, position: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MonitorResult {
    Holds,
    Fails,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonitorVerdict {
    pub result: MonitorResult,
    /// Earliest falsifying event, only for `G(state formula)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violating_position: Option<usize>,
}

impl MonitorVerdict {
    pub fn holds(&self) -> bool {
        self.result == MonitorResult::Holds
    }
}

#[derive(Debug, Clone, Copy)]
enum Num {
    Exact(i128),
    Approx(f64),
}

impl Num {
    fn from_value(v: Value) -> Num {
        match v.as_i128() {
            Some(i) => Num::Exact(i),
            None => Num::Approx(v.as_f64()),
        }
    }

    fn to_f64(self) -> f64 {
        match self {
            Num::Exact(i) => i as f64,
            Num::Approx(x) => x,
        }
    }
}

fn lookup(event: &TraceEvent, name: &str, primed: bool, position: usize) -> Result<Value, EvalError> {
    let snap = if primed { &event.post } else { &event.pre };
    let name_with_prime = || if primed { format!("{name}'") } else { name.to_string() };
    snap.get(name).ok_or_else(|| EvalError::MissingVariable { name: name_with_prime(), position })
}

fn eval_num(e: &NumExpr, event: &TraceEvent, position: usize) -> Result<Num, EvalError> {
    Ok(match e {
        NumExpr::Var(v) => Num::from_value(lookup(event, &v.name, v.primed, position)?),
        NumExpr::Lit(v) => Num::from_value(*v),
        NumExpr::Add(l, r) | NumExpr::Sub(l, r) => {
            let add = matches!(e, NumExpr::Add(..));
            let (a, b) = (eval_num(l, event, position)?, eval_num(r, event, position)?);
            match (a, b) {
                (Num::Exact(x), Num::Exact(y)) => {
                    let exact = if add { x.checked_add(y) } else { x.checked_sub(y) };
                    match exact {
                        Some(z) => Num::Exact(z),
                        None if add => Num::Approx(x as f64 + y as f64),
                        None => Num::Approx(x as f64 - y as f64),
                    }
                }
                _ if add => Num::Approx(a.to_f64() + b.to_f64()),
                _ => Num::Approx(a.to_f64() - b.to_f64()),
            }
        }
    })
}

pub(crate) fn eval_atom_at(a: &Atom, event: &TraceEvent, position: usize, eps: f64) -> Result<bool, EvalError> {
    let l = eval_num(&a.lhs, event, position)?;
    let r = eval_num(&a.rhs, event, position)?;
    Ok(match (l, r) {
        (Num::Exact(x), Num::Exact(y)) => compare(x.cmp(&y), a.op),
        _ => {
            let (x, y) = (l.to_f64(), r.to_f64());
            match a.op {
                CmpOp::Eq => (x - y).abs() <= eps,
                CmpOp::Ne => (x - y).abs() > eps,
                CmpOp::Lt => x < y,
                CmpOp::Le => x <= y,
                CmpOp::Gt => x > y,
                CmpOp::Ge => x >= y,
            }
        }
    })
}

fn compare(ord: Ordering, op: CmpOp) -> bool {
    match op {
        CmpOp::Eq => ord == Ordering::Equal,
        CmpOp::Ne => ord != Ordering::Equal,
        CmpOp::Lt => ord == Ordering::Less,
        CmpOp::Le => ord != Ordering::Greater,
        CmpOp::Gt => ord == Ordering::Greater,
        CmpOp::Ge => ord != Ordering::Less,
    }
}

/// Evaluates an atom on a single event: unprimed names read the pre-state,
/// primed names the post-state. Integers compare exactly; a float operand
/// switches to tolerance `eps` for `==`/`!=`.
pub fn eval_atom(a: &Atom, event: &TraceEvent, eps: f64) -> Result<bool, EvalError> {
    eval_atom_at(a, event, 0, eps)
}

/// LTLf evaluation at position 0 of a complete trace, with strong next.
pub fn evaluate(f: &LtlFormula, trace: &Trace, eps: f64) -> Result<MonitorVerdict, EvalError> {
    let sat = satisfaction(f, &trace.events, eps)?;
    let holds = sat[0];
    let violating_position = match f {
        LtlFormula::Globally(body) if !holds && body.is_state_formula() => {
            let inner = satisfaction(body, &trace.events, eps)?;
            inner.iter().position(|b| !b)
        }
        _ => None,
    };
    Ok(MonitorVerdict {
        result: if holds { MonitorResult::Holds } else { MonitorResult::Fails },
        violating_position,
    })
}

/// Truth value of `f` at every position, computed bottom-up.
fn satisfaction(f: &LtlFormula, events: &[TraceEvent], eps: f64) -> Result<Vec<bool>, EvalError> {
    let n = events.len();
    let pointwise = |l: Vec<bool>, r: Vec<bool>, op: fn(bool, bool) -> bool| {
        l.into_iter().zip(r).map(|(a, b)| op(a, b)).collect::<Vec<_>>()
    };
    Ok(match f {
        LtlFormula::Atom(a) => events
            .iter()
            .enumerate()
            .map(|(i, e)| eval_atom_at(a, e, i, eps))
            .collect::<Result<_, _>>()?,
        LtlFormula::Not(g) => satisfaction(g, events, eps)?.into_iter().map(|b| !b).collect(),
        LtlFormula::And(l, r) => {
            pointwise(satisfaction(l, events, eps)?, satisfaction(r, events, eps)?, |a, b| a && b)
        }
        LtlFormula::Or(l, r) => {
            pointwise(satisfaction(l, events, eps)?, satisfaction(r, events, eps)?, |a, b| a || b)
        }
        LtlFormula::Implies(l, r) => {
            pointwise(satisfaction(l, events, eps)?, satisfaction(r, events, eps)?, |a, b| !a || b)
        }
        LtlFormula::Iff(l, r) => {
            pointwise(satisfaction(l, events, eps)?, satisfaction(r, events, eps)?, |a, b| a == b)
        }
        LtlFormula::Next(g) => {
            let inner = satisfaction(g, events, eps)?;
            (0..n).map(|i| i + 1 < n && inner[i + 1]).collect()
        }
        LtlFormula::Until(l, r) => {
            let (lv, rv) = (satisfaction(l, events, eps)?, satisfaction(r, events, eps)?);
            let mut out = vec![false; n];
            let mut later = false;
            for i in (0..n).rev() {
                later = rv[i] || (lv[i] && later);
                out[i] = later;
            }
            out
        }
        LtlFormula::Finally(g) => {
            let inner = satisfaction(g, events, eps)?;
            let mut out = vec![false; n];
            let mut later = false;
            for i in (0..n).rev() {
                later = later || inner[i];
                out[i] = later;
            }
            out
        }
        LtlFormula::Globally(g) => {
            let inner = satisfaction(g, events, eps)?;
            let mut out = vec![false; n];
            let mut later = true;
            for i in (0..n).rev() {
                later = later && inner[i];
                out[i] = later;
            }
            out
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltl::parse_ltl;
    use crate::monitor::trace::StateSnapshot;

    const LENGTH_RULE: &str =
        "G(reLen != 19 -> F(cntLenRd' = cntLenRd + 1 && totalLenRd' = totalLenRd + 1 && reVal = FALSE))";

    fn ev(pre: StateSnapshot, post: StateSnapshot) -> TraceEvent {
        TraceEvent { pre, post, label: None }
    }

    fn atom(s: &str) -> Atom {
        match parse_ltl(s).unwrap() {
            LtlFormula::Atom(a) => a,
            other => panic!("not an atom: {other:?}"),
        }
    }

    #[test]
    fn antecedent_boundary() {
        let e = ev(StateSnapshot::from([("reLen", Value::Int(18))]), StateSnapshot::default());
        assert!(eval_atom(&atom("reLen != 19"), &e, DEFAULT_EPS).unwrap());
    }

    #[test]
    fn primed_reads_post_state() {
        let e = ev(
            StateSnapshot::from([("cntLenRd", Value::Int(3))]),
            StateSnapshot::from([("cntLenRd", Value::Int(4))]),
        );
        assert!(eval_atom(&atom("cntLenRd' = cntLenRd + 1"), &e, DEFAULT_EPS).unwrap());
        assert!(!eval_atom(&atom("cntLenRd = cntLenRd' + 1"), &e, DEFAULT_EPS).unwrap());
    }

    #[test]
    fn float_equality_uses_eps() {
        let e = ev(StateSnapshot::from([("x", Value::Float(0.1 + 0.2))]), StateSnapshot::default());
        assert!(eval_atom(&atom("x = 0.3"), &e, 1e-9).unwrap());
        assert!(!eval_atom(&atom("x != 0.3"), &e, 1e-9).unwrap());
        assert!(!eval_atom(&atom("x = 0.3"), &e, 0.0).unwrap());
    }

    #[test]
    fn integers_compare_exactly_across_signedness() {
        let e = ev(
            StateSnapshot::from([("u", Value::UInt(u64::MAX)), ("i", Value::Int(-1)), ("b", Value::Bool(true))]),
            StateSnapshot::default(),
        );
        assert!(eval_atom(&atom("u > i"), &e, 0.0).unwrap());
        assert!(eval_atom(&atom("u = 18446744073709551615"), &e, 0.0).unwrap());
        assert!(eval_atom(&atom("b = 1"), &e, 0.0).unwrap());
        assert!(eval_atom(&atom("b"), &e, 0.0).unwrap());
        assert!(eval_atom(&atom("i + 1 = FALSE"), &e, 0.0).unwrap());
    }

    #[test]
    fn missing_variable_reports_position() {
        let t = Trace::new(vec![
            ev(StateSnapshot::from([("a", Value::Int(1))]), StateSnapshot::default()),
            ev(StateSnapshot::default(), StateSnapshot::default()),
        ])
        .unwrap();
        let err = evaluate(&parse_ltl("G(a > 0)").unwrap(), &t, 0.0).unwrap_err();
        assert_eq!(err, EvalError::MissingVariable { name: "a".into(), position: 1 });
        let err = evaluate(&parse_ltl("a' > 0").unwrap(), &t, 0.0).unwrap_err();
        assert_eq!(err, EvalError::MissingVariable { name: "a'".into(), position: 0 });
    }

    fn bools(values: &[bool]) -> Trace {
        Trace::new(
            values
                .iter()
                .map(|b| ev(StateSnapshot::from([("p", Value::Bool(*b))]), StateSnapshot::default()))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn strong_next_at_last_position() {
        let v = evaluate(&parse_ltl("X p").unwrap(), &bools(&[true]), 0.0).unwrap();
        assert_eq!(v.result, MonitorResult::Fails);
    }

    #[test]
    fn eventually_everywhere_when_p_is_last() {
        // Brute force: at each i in 0..3 the witness k = 2 satisfies p.
        let v = evaluate(&parse_ltl("G(true U p)").unwrap(), &bools(&[false, false, true]), 0.0).unwrap();
        assert_eq!(v.result, MonitorResult::Holds);
    }

    #[test]
    fn violating_position_for_safety_shape() {
        let v = evaluate(&parse_ltl("G p").unwrap(), &bools(&[true, false, false]), 0.0).unwrap();
        assert_eq!(v, MonitorVerdict { result: MonitorResult::Fails, violating_position: Some(1) });
        let v = evaluate(&parse_ltl("G F p").unwrap(), &bools(&[true, false]), 0.0).unwrap();
        assert_eq!(v.violating_position, None);
    }

    fn length_rule_event(pre_ret: i64) -> TraceEvent {
        ev(
            StateSnapshot::from([
                ("reLen", Value::Int(18)),
                ("cntLenRd", Value::Int(3)),
                ("totalLenRd", Value::Int(5)),
                ("reVal", Value::Int(pre_ret)),
            ]),
            StateSnapshot::from([
                ("cntLenRd", Value::Int(4)),
                ("totalLenRd", Value::Int(6)),
                ("reVal", Value::Int(0)),
            ]),
        )
    }

    #[test]
    fn length_rule_single_event() {
        let f = parse_ltl(LENGTH_RULE).unwrap();
        // The unprimed `reVal = FALSE` reads the pre-state: with pre.reVal = 1
        // the F-body is false at the only position, so the formula fails.
        let t = Trace::new(vec![length_rule_event(1)]).unwrap();
        assert_eq!(evaluate(&f, &t, DEFAULT_EPS).unwrap().result, MonitorResult::Fails);
        let t = Trace::new(vec![length_rule_event(0)]).unwrap();
        assert_eq!(evaluate(&f, &t, DEFAULT_EPS).unwrap().result, MonitorResult::Holds);
    }

    #[test]
    fn evaluate_is_pure() {
        let f = parse_ltl("p U X p").unwrap();
        let t = bools(&[false, true, true]);
        assert_eq!(evaluate(&f, &t, 0.0).unwrap(), evaluate(&f, &t, 0.0).unwrap());
    }
}
