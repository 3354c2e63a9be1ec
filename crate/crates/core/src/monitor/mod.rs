//! Finite-trace monitoring of LTL properties.

mod eval;
mod trace;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use eval::{eval_atom, evaluate, EvalError, MonitorResult, MonitorVerdict, DEFAULT_EPS};
pub use trace::{load_trace, parse_trace, StateSnapshot, Trace, TraceError, TraceEvent};

use crate::ltl::{render_ltl, LtlFormula};

#[derive(Debug, Clone, PartialEq)]
pub struct MonitoredProperty {
    pub id: String,
    pub formula: LtlFormula,
}

/// A trace source: loaded successfully or with the load error kept.
#[derive(Debug)]
pub struct TraceInput {
    pub name: String,
    pub trace: Result<Trace, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cell {
    Verdict(MonitorVerdict),
    Error(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PropertyStatus {
    /// Holds on every trace (and there is at least one).
    Proved,
    /// Fails on at least one trace.
    Failed,
    /// No failure seen, but some cell could not be evaluated.
    Unevaluated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyRow {
    pub id: String,
    pub ltl: String,
    pub cells: Vec<Cell>,
    pub status: PropertyStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub proved: usize,
    pub all: usize,
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.proved, self.all)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorMatrix {
    pub traces: Vec<String>,
    pub rows: Vec<PropertyRow>,
    pub summary: Summary,
}

/// Evaluates every property on every trace. Per-cell failures are recorded
/// and never abort the matrix.
pub fn monitor_all(props: &[MonitoredProperty], traces: &[TraceInput], eps: f64) -> MonitorMatrix {
    let rows: Vec<PropertyRow> = props
        .iter()
        .map(|p| {
            let cells: Vec<Cell> = traces
                .iter()
                .map(|t| match &t.trace {
                    Ok(trace) => match evaluate(&p.formula, trace, eps) {
                        Ok(v) => Cell::Verdict(v),
                        Err(e) => Cell::Error(e.to_string()),
                    },
                    Err(e) => Cell::Error(format!("trace not loaded: {e}")),
                })
                .collect();
            let status = row_status(&cells);
            PropertyRow { id: p.id.clone(), ltl: render_ltl(&p.formula), cells, status }
        })
        .collect();
    let proved = rows.iter().filter(|r| r.status == PropertyStatus::Proved).count();
    MonitorMatrix {
        traces: traces.iter().map(|t| t.name.clone()).collect(),
        summary: Summary { proved, all: rows.len() },
        rows,
    }
}

fn row_status(cells: &[Cell]) -> PropertyStatus {
    if cells.iter().any(|c| matches!(c, Cell::Verdict(v) if !v.holds())) {
        PropertyStatus::Failed
    } else if cells.is_empty() || cells.iter().any(|c| matches!(c, Cell::Error(_))) {
        PropertyStatus::Unevaluated
    } else {
        PropertyStatus::Proved
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltl::{parse_ltl, Value};

    fn prop(id: &str, s: &str) -> MonitoredProperty {
        MonitoredProperty { id: id.into(), formula: parse_ltl(s).unwrap() }
    }

    fn trace(values: &[i64]) -> TraceInput {
        let events = values
            .iter()
            .map(|v| TraceEvent {
                pre: StateSnapshot::from([("x", Value::Int(*v))]),
                post: StateSnapshot::default(),
                label: None,
            })
            .collect();
        TraceInput { name: format!("t{values:?}"), trace: Ok(Trace::new(events).unwrap()) }
    }

    #[test]
    fn all_traces_rule() {
        let m = monitor_all(&[prop("P", "G(x > 0)")], &[trace(&[1]), trace(&[1, 0]), trace(&[2])], 0.0);
        assert_eq!(m.summary, Summary { proved: 0, all: 1 });
        assert_eq!(m.rows[0].status, PropertyStatus::Failed);
    }

    #[test]
    fn no_traces_means_unevaluated() {
        let m = monitor_all(&[prop("P", "G(x > 0)")], &[], 0.0);
        assert_eq!(m.summary.to_string(), "0/1");
        assert_eq!(m.rows[0].status, PropertyStatus::Unevaluated);
    }

    #[test]
    fn bad_trace_does_not_stop_others() {
        let bad = TraceInput { name: "bad".into(), trace: Err("line 1: nope".into()) };
        let m = monitor_all(&[prop("P", "G(x > 0)"), prop("Q", "F(x = 0)")], &[trace(&[1]), bad, trace(&[0])], 0.0);
        assert!(matches!(m.rows[0].cells[0], Cell::Verdict(_)));
        assert!(matches!(m.rows[0].cells[1], Cell::Error(_)));
        assert!(matches!(m.rows[0].cells[2], Cell::Verdict(_)));
        assert_eq!(m.rows[0].status, PropertyStatus::Failed);
        assert_eq!(m.rows[1].status, PropertyStatus::Failed);
    }

    #[test]
    fn proved_when_every_trace_holds() {
        let m = monitor_all(&[prop("P", "G(x >= 0)")], &[trace(&[1]), trace(&[0, 3])], 0.0);
        assert_eq!(m.summary.to_string(), "1/1");
    }
}
