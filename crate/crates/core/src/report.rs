//! Aggregates verdicts and monitor results into a safety grid and a
//! functional proved/all table with an `All` totals row.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backends::{safety_matrix, SafetyProperty, Tool, Verdict, VerdictKind, VerdictResult};
use crate::monitor::PropertyStatus;

pub const VERDICTS_FILE: &str = "verdicts.jsonl";
pub const MONITOR_FILE: &str = "monitor.jsonl";

/// Functional columns, in display order. `Trace` is the TRACE+KLEE column.
pub const FUNCTIONAL_COLUMNS: [Tool; 3] = [Tool::Cbmc, Tool::Cpachecker, Tool::Trace];

/// One line of `monitor.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorRecord {
    pub ip: String,
    pub property: String,
    pub ltl: String,
    pub status: PropertyStatus,
    /// Traces on which the property holds, out of `traces`.
    pub holds: usize,
    pub traces: usize,
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("no {VERDICTS_FILE} or {MONITOR_FILE} under {}", .0.display())]
    MissingResults(PathBuf),
    #[error("cannot read {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}:{line}: {message}", path.display())]
    Malformed { path: PathBuf, line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Count {
    pub proved: usize,
    pub all: usize,
}

impl std::ops::AddAssign for Count {
    fn add_assign(&mut self, o: Count) {
        self.proved += o.proved;
        self.all += o.all;
    }
}

impl fmt::Display for Count {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.proved, self.all)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SafetyStatus {
    Ok,
    Fail,
    Timeout,
    Unsupported,
    /// Exploration finished without finding an error (no proof).
    NoViolation,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SafetyCell {
    pub status: SafetyStatus,
    /// Violated properties, in table order.
    pub violated: Vec<SafetyProperty>,
    /// Result per safety-property label.
    pub results: BTreeMap<String, VerdictResult>,
}

impl SafetyCell {
    pub fn text(&self) -> String {
        match self.status {
            SafetyStatus::Ok => "OK".into(),
            SafetyStatus::Fail => {
                let tags: Vec<&str> = self.violated.iter().map(|p| p.abbreviation()).collect();
                format!("FAIL({})", tags.join(", "))
            }
            SafetyStatus::Timeout => "TIMEOUT".into(),
            SafetyStatus::Unsupported => "UNSUPPORTED".into(),
            SafetyStatus::NoViolation => "NO-VIOLATION".into(),
            SafetyStatus::Unknown => "UNKNOWN".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IpRow {
    pub ip_name: String,
    /// Missing tools had no safety verdicts.
    pub safety: BTreeMap<Tool, SafetyCell>,
    pub functional: BTreeMap<Tool, Count>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub rows: Vec<IpRow>,
    pub totals: BTreeMap<Tool, Count>,
    pub notes: Vec<String>,
}

fn safety_cell(tool: Tool, verdicts: &[&Verdict]) -> SafetyCell {
    let results: BTreeMap<String, VerdictResult> = verdicts.iter().map(|v| (v.subject.clone(), v.result)).collect();
    let mut violated: Vec<SafetyProperty> = verdicts
        .iter()
        .filter(|v| v.result == VerdictResult::Violated)
        .filter_map(|v| SafetyProperty::from_label(&v.subject))
        .collect();
    violated.sort();
    violated.dedup();
    let any = |r: VerdictResult| verdicts.iter().any(|v| v.result == r);
    let status = if any(VerdictResult::Violated) {
        SafetyStatus::Fail
    } else if any(VerdictResult::Timeout) {
        SafetyStatus::Timeout
    } else if verdicts.iter().all(|v| v.result == VerdictResult::Unsupported) {
        SafetyStatus::Unsupported
    } else if any(VerdictResult::Unknown) || any(VerdictResult::Unsupported) {
        if tool == Tool::Klee && !any(VerdictResult::Unsupported) {
            SafetyStatus::NoViolation
        } else {
            SafetyStatus::Unknown
        }
    } else {
        SafetyStatus::Ok
    };
    SafetyCell { status, violated, results }
}

/// Builds the report. Rows follow first appearance of each IP.
pub fn build_report(verdicts: &[Verdict], monitor: &[MonitorRecord]) -> Report {
    let mut order: Vec<String> = Vec::new();
    for ip in verdicts.iter().map(|v| &v.ip).chain(monitor.iter().map(|m| &m.ip)) {
        if !order.contains(ip) {
            order.push(ip.clone());
        }
    }
    let mut notes = Vec::new();
    let mut totals: BTreeMap<Tool, Count> = FUNCTIONAL_COLUMNS.iter().map(|t| (*t, Count::default())).collect();
    let rows = order
        .into_iter()
        .map(|ip| {
            let mut safety = BTreeMap::new();
            let mut functional = BTreeMap::new();
            for tool in Tool::VERIFIERS {
                let mine: Vec<&Verdict> = verdicts.iter().filter(|v| v.ip == ip && v.tool == tool).collect();
                let (s, f): (Vec<&Verdict>, Vec<&Verdict>) = mine.iter().partition(|v| v.kind == VerdictKind::Safety);
                if !s.is_empty() {
                    let cell = safety_cell(tool, &s);
                    let supported = safety_matrix(tool);
                    for p in cell.violated.iter().filter(|p| !supported.contains(p)) {
                        notes.push(format!("{ip}: {tool} reported {p}, which is outside its documented support matrix"));
                    }
                    safety.insert(tool, cell);
                }
                if !f.is_empty() && FUNCTIONAL_COLUMNS.contains(&tool) {
                    let c = Count { proved: f.iter().filter(|v| v.result == VerdictResult::Proved).count(), all: f.len() };
                    functional.insert(tool, c);
                }
            }
            let mon: Vec<&MonitorRecord> = monitor.iter().filter(|m| m.ip == ip).collect();
            if !mon.is_empty() {
                let c = Count { proved: mon.iter().filter(|m| m.status == PropertyStatus::Proved).count(), all: mon.len() };
                functional.insert(Tool::Trace, c);
            }
            for (t, c) in &functional {
                *totals.entry(*t).or_default() += *c;
            }
            IpRow { ip_name: ip, safety, functional }
        })
        .collect();
    Report { rows, totals, notes }
}

fn column_title(t: Tool) -> &'static str {
    match t {
        Tool::Cbmc => "CBMC",
        Tool::Cpachecker => "CPAChecker",
        Tool::Klee => "KLEE",
        Tool::Trace => "TRACE+KLEE",
    }
}

fn table(out: &mut String, header: &[String], rows: &[Vec<String>]) {
    let widths: Vec<usize> = (0..header.len())
        .map(|i| rows.iter().map(|r| r[i].len()).chain([header[i].len()]).max().unwrap_or(0))
        .collect();
    let line = |out: &mut String, cells: &[String]| {
        let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        let _ = writeln!(out, "{}", padded.join("  ").trim_end());
    };
    line(out, header);
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    line(out, &rule);
    for r in rows {
        line(out, r);
    }
}

impl Report {
    pub fn render_text(&self) -> String {
        let mut out = String::from("Safety properties\n\n");
        let mut header = vec!["IP".to_string()];
        header.extend(Tool::VERIFIERS.iter().map(|t| column_title(*t).to_string()));
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                let mut cells = vec![r.ip_name.clone()];
                cells.extend(Tool::VERIFIERS.iter().map(|t| r.safety.get(t).map_or("-".into(), SafetyCell::text)));
                cells
            })
            .collect();
        table(&mut out, &header, &rows);

        out.push_str("\nFunctional correctness properties (proved/all)\n\n");
        let mut header = vec!["IP".to_string()];
        header.extend(FUNCTIONAL_COLUMNS.iter().map(|t| column_title(*t).to_string()));
        let mut rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                let mut cells = vec![r.ip_name.clone()];
                cells.extend(FUNCTIONAL_COLUMNS.iter().map(|t| r.functional.get(t).map_or("-".into(), Count::to_string)));
                cells
            })
            .collect();
        let mut all = vec!["All".to_string()];
        all.extend(FUNCTIONAL_COLUMNS.iter().map(|t| self.totals.get(t).copied().unwrap_or_default().to_string()));
        rows.push(all);
        table(&mut out, &header, &rows);

        if !self.notes.is_empty() {
            out.push_str("\nNotes\n");
            for n in &self.notes {
                let _ = writeln!(out, "- {n}");
            }
        }
        out
    }

    pub fn render_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }

    /// `All` row as `a/b, c/d, e/f`.
    pub fn totals_line(&self) -> String {
        FUNCTIONAL_COLUMNS
            .iter()
            .map(|t| self.totals.get(t).copied().unwrap_or_default().to_string())
            .collect::<Vec<_>>()
            .join(", ")
    }
}

fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path, out: &mut Vec<T>) -> Result<(), ReportError> {
    let text = std::fs::read_to_string(path).map_err(|source| ReportError::Io { path: path.to_path_buf(), source })?;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let v = serde_json::from_str(line)
            .map_err(|e| ReportError::Malformed { path: path.to_path_buf(), line: i + 1, message: e.to_string() })?;
        out.push(v);
    }
    Ok(())
}

/// Reads result files from `dir` and from its immediate subdirectories
/// (sorted), so several per-IP output directories can be combined.
pub fn load_results(dir: &Path) -> Result<(Vec<Verdict>, Vec<MonitorRecord>), ReportError> {
    let mut dirs = vec![dir.to_path_buf()];
    if let Ok(rd) = std::fs::read_dir(dir) {
        let mut subs: Vec<PathBuf> = rd.filter_map(Result::ok).map(|e| e.path()).filter(|p| p.is_dir()).collect();
        subs.sort();
        dirs.extend(subs);
    }
    let mut verdicts = Vec::new();
    let mut monitor = Vec::new();
    let mut found = false;
    for d in dirs {
        let v = d.join(VERDICTS_FILE);
        if v.is_file() {
            found = true;
            read_jsonl(&v, &mut verdicts)?;
        }
        let m = d.join(MONITOR_FILE);
        if m.is_file() {
            found = true;
            read_jsonl(&m, &mut monitor)?;
        }
    }
    if !found {
        return Err(ReportError::MissingResults(dir.to_path_buf()));
    }
    Ok((verdicts, monitor))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(ip: &str, tool: Tool, kind: VerdictKind, subject: &str, result: VerdictResult) -> Verdict {
        Verdict {
            ip: ip.into(),
            tool,
            kind,
            subject: subject.into(),
            result,
            counterexample: None,
            wall_time: 0.0,
            tool_version: "t".into(),
        }
    }

    fn safety(ip: &str, tool: Tool, violated: &[SafetyProperty], rest: VerdictResult) -> Vec<Verdict> {
        let mut out: Vec<Verdict> = safety_matrix(tool)
            .into_iter()
            .filter(|p| !violated.contains(p))
            .map(|p| v(ip, tool, VerdictKind::Safety, p.label(), rest))
            .collect();
        out.extend(violated.iter().map(|p| v(ip, tool, VerdictKind::Safety, p.label(), VerdictResult::Violated)));
        out
    }

    #[test]
    fn safety_cells() {
        use SafetyProperty::*;
        let mut vs = safety("A", Tool::Cbmc, &[IntegerOverflow, FloatingPointArithmeticOverflow], VerdictResult::Proved);
        vs.extend(safety("A", Tool::Cpachecker, &[FloatingPointArithmeticOverflow], VerdictResult::Proved));
        vs.extend(safety("A", Tool::Klee, &[], VerdictResult::Unknown));
        let r = build_report(&vs, &[]);
        let row = &r.rows[0];
        assert_eq!(row.safety[&Tool::Cbmc].text(), "FAIL(IO, FPO)");
        assert_eq!(row.safety[&Tool::Cpachecker].text(), "FAIL(FPO)");
        assert_eq!(row.safety[&Tool::Klee].text(), "NO-VIOLATION");
        assert_eq!(r.notes.len(), 1);
        assert!(r.notes[0].contains("cpachecker"));
    }

    #[test]
    fn unsupported_and_timeout_cells() {
        let vs = [safety("A", Tool::Cbmc, &[], VerdictResult::Unsupported), safety("A", Tool::Klee, &[], VerdictResult::Timeout)].concat();
        let r = build_report(&vs, &[]);
        assert_eq!(r.rows[0].safety[&Tool::Cbmc].text(), "UNSUPPORTED");
        assert_eq!(r.rows[0].safety[&Tool::Klee].text(), "TIMEOUT");
        assert!(!r.rows[0].safety.contains_key(&Tool::Cpachecker));
        assert!(r.render_text().contains("UNSUPPORTED"));
    }

    #[test]
    fn single_ip_totals_equal_its_row() {
        let vs = vec![
            v("A", Tool::Cbmc, VerdictKind::Functional, "P1", VerdictResult::Proved),
            v("A", Tool::Cbmc, VerdictKind::Functional, "P2", VerdictResult::Violated),
        ];
        let mon = vec![MonitorRecord { ip: "A".into(), property: "L1".into(), ltl: "x".into(), status: PropertyStatus::Proved, holds: 1, traces: 1 }];
        let r = build_report(&vs, &mon);
        assert_eq!(r.totals[&Tool::Cbmc], r.rows[0].functional[&Tool::Cbmc]);
        assert_eq!(r.totals_line(), "1/2, 0/0, 1/1");
        let text = r.render_text();
        assert!(text.contains("All"), "{text}");
    }

    #[test]
    fn empty_dir_is_missing_results() {
        let d = tempfile::tempdir().unwrap();
        assert!(matches!(load_results(d.path()), Err(ReportError::MissingResults(_))));
    }
}
