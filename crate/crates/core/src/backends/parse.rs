//! Verifier output parsers. Anything without a recognizable conclusion is an
//! error; no verdict is ever guessed.

use std::collections::BTreeMap;

use super::run::CapturedOutput;
use super::{subject_names, uniform_verdicts, BackendError, SafetyProperty, Subjects, Tool, Verdict, VerdictKind, VerdictResult};

const EXCERPT: usize = 200;

fn excerpt(s: &str) -> String {
    let t = s.trim();
    match t.char_indices().nth(EXCERPT) {
        Some((i, _)) => format!("{}...", &t[..i]),
        None if t.is_empty() => "<empty>".into(),
        None => t.to_string(),
    }
}

/// Per-subject findings accumulated while reading an output.
#[derive(Default)]
struct Findings {
    violated: BTreeMap<String, Vec<String>>,
    proved: Vec<String>,
}

impl Findings {
    fn violate(&mut self, subject: impl Into<String>, evidence: &str) {
        self.violated.entry(subject.into()).or_default().push(evidence.trim().to_string());
    }
}

/// Builds verdicts for the expected subjects (plus any violated extras).
/// `otherwise` is the result for subjects with no specific finding.
fn assemble(ip: &str, tool: Tool, subjects: &Subjects, raw: &CapturedOutput, f: Findings, otherwise: VerdictResult) -> Vec<Verdict> {
    let (kind, mut names) = subject_names(tool, subjects);
    for extra in f.violated.keys() {
        if !names.contains(extra) {
            names.push(extra.clone());
        }
    }
    if kind == VerdictKind::Safety {
        names.sort_by_key(|n| SafetyProperty::from_label(n).map(|p| p as usize).unwrap_or(usize::MAX));
    }
    names
        .into_iter()
        .map(|subject| {
            let (result, counterexample) = match f.violated.get(&subject) {
                Some(ev) => (VerdictResult::Violated, Some(ev.join("\n"))),
                None if f.proved.contains(&subject) => (VerdictResult::Proved, None),
                None => (otherwise, None),
            };
            Verdict {
                ip: ip.to_string(),
                tool,
                kind,
                subject,
                result,
                counterexample,
                wall_time: raw.wall_time,
                tool_version: raw.tool_version.clone(),
            }
        })
        .collect()
}

pub fn parse_verdicts(ip: &str, tool: Tool, subjects: &Subjects, raw: &CapturedOutput) -> Result<Vec<Verdict>, BackendError> {
    if raw.timed_out {
        return Ok(uniform_verdicts(ip, tool, subjects, VerdictResult::Timeout, raw.wall_time, &raw.tool_version));
    }
    let text = raw.combined();
    let unrecognized = || BackendError::UnrecognizedOutput { tool, excerpt: excerpt(&text) };
    match tool {
        Tool::Cbmc => parse_cbmc(ip, subjects, raw, &text).ok_or_else(unrecognized),
        Tool::Cpachecker => parse_cpachecker(ip, subjects, raw, &text).ok_or_else(unrecognized),
        Tool::Klee => parse_klee(ip, subjects, raw, &text).ok_or_else(unrecognized),
        Tool::Trace => Err(unrecognized()),
    }
}

/// `[func.class.N] line L description: STATUS`
fn cbmc_result_line(line: &str) -> Option<(&str, &str, &str)> {
    let rest = line.trim().strip_prefix('[')?;
    let (id, rest) = rest.split_once(']')?;
    let (desc, status) = rest.trim().rsplit_once(": ")?;
    let status = status.trim();
    if !matches!(status, "SUCCESS" | "FAILURE" | "UNKNOWN" | "ERROR") {
        return None;
    }
    let class = id.rsplit('.').nth(1).unwrap_or("");
    let desc = match desc.strip_prefix("line ") {
        Some(r) => r.split_once(' ').map_or(r, |(_, d)| d),
        None => desc,
    };
    Some((class, desc.trim(), status))
}

fn cbmc_safety_class(class: &str, desc: &str) -> Option<SafetyProperty> {
    use SafetyProperty::*;
    let d = desc.to_ascii_lowercase();
    Some(match class {
        "overflow" if d.contains("float") => FloatingPointArithmeticOverflow,
        "overflow" => IntegerOverflow,
        "array_bounds" => OutOfBoundsArrayAccess,
        "pointer_dereference" => InvalidPointerDereference,
        "division-by-zero" => DivisionByZero,
        "pointer_arithmetic" => PointerArithmeticOverflow,
        "undefined-shift" => ShiftOperationOverflow,
        "memory-leak" => MemoryLeak,
        _ => return None,
    })
}

fn parse_cbmc(ip: &str, subjects: &Subjects, raw: &CapturedOutput, text: &str) -> Option<Vec<Verdict>> {
    let successful = text.contains("VERIFICATION SUCCESSFUL");
    let failed = text.contains("VERIFICATION FAILED");
    if !successful && !failed {
        return None;
    }
    let mut f = Findings::default();
    for line in text.lines() {
        let Some((class, desc, status)) = cbmc_result_line(line) else { continue };
        let subject = match subjects {
            Subjects::Safety => match cbmc_safety_class(class, desc) {
                Some(p) => p.label().to_string(),
                None => continue,
            },
            Subjects::Functional(_) if class == "assertion" => desc.to_string(),
            Subjects::Functional(_) => continue,
        };
        match status {
            "FAILURE" => f.violate(subject, line),
            "SUCCESS" => f.proved.push(subject),
            _ => {}
        }
    }
    // A successful run proves every check; after a failure, only checks
    // reported SUCCESS are known to hold (safety checks not instantiated
    // for this program trivially hold).
    let otherwise = match subjects {
        _ if successful => VerdictResult::Proved,
        Subjects::Safety => VerdictResult::Proved,
        Subjects::Functional(_) => VerdictResult::Unknown,
    };
    Some(assemble(ip, Tool::Cbmc, subjects, raw, f, otherwise))
}

fn cpachecker_property(prop: &str) -> Option<SafetyProperty> {
    use SafetyProperty::*;
    let p = prop.to_ascii_lowercase();
    Some(if p.contains("float") {
        FloatingPointArithmeticOverflow
    } else if p.contains("overflow") {
        IntegerOverflow
    } else if p.contains("memtrack") || p.contains("memcleanup") || p.contains("leak") {
        MemoryLeak
    } else if p.contains("deref") || p.contains("valid-free") {
        InvalidPointerDereference
    } else if p.contains("termination") {
        Termination
    } else if p.contains("race") {
        DataRace
    } else if p.contains("deadlock") || p.contains("dead lock") {
        DeadLock
    } else {
        return None;
    })
}

fn parse_cpachecker(ip: &str, subjects: &Subjects, raw: &CapturedOutput, text: &str) -> Option<Vec<Verdict>> {
    let line = text.lines().find(|l| l.contains("Verification result:"))?;
    let result = line.split_once("Verification result:")?.1.trim();
    let mut f = Findings::default();
    let otherwise = if result.starts_with("TRUE") {
        VerdictResult::Proved
    } else if result.starts_with("UNKNOWN") {
        VerdictResult::Unknown
    } else if result.starts_with("FALSE") {
        let prop = result.split_once("Property violation (").and_then(|(_, r)| r.rsplit_once(')')).map(|(p, _)| p);
        match subjects {
            Subjects::Safety => match prop.and_then(cpachecker_property) {
                Some(p) => f.violate(p.label(), line),
                None => log::warn!("cpachecker violation not attributable to a safety property: {line}"),
            },
            // Every assertion shares one error location, so a violation
            // is attributable only when the harness asserts one property.
            Subjects::Functional(ids) if ids.len() == 1 => f.violate(ids[0].clone(), line),
            Subjects::Functional(_) => log::warn!("cpachecker violation shared by several properties: {line}"),
        }
        VerdictResult::Unknown
    } else {
        return None;
    };
    Some(assemble(ip, Tool::Cpachecker, subjects, raw, f, otherwise))
}

fn klee_error_class(msg: &str) -> Option<SafetyProperty> {
    use SafetyProperty::*;
    let m = msg.to_ascii_lowercase();
    Some(if m.contains("out of bound") {
        OutOfBoundsArrayAccess
    } else if m.contains("divide by zero") || m.contains("division by zero") {
        DivisionByZero
    } else if m.contains("overshift") || m.contains("shift") {
        ShiftOperationOverflow
    } else if m.contains("leak") {
        MemoryLeak
    } else if m.contains("overflow") {
        IntegerOverflow
    } else if m.contains("memory error") || m.contains("pointer") || m.contains("free") {
        InvalidPointerDereference
    } else {
        return None;
    })
}

fn quoted(s: &str) -> Option<&str> {
    let start = s.find('"')? + 1;
    let len = s[start..].find('"')?;
    Some(&s[start..start + len])
}

fn parse_klee(ip: &str, subjects: &Subjects, raw: &CapturedOutput, text: &str) -> Option<Vec<Verdict>> {
    let mut f = Findings::default();
    let mut errors = 0;
    for line in text.lines() {
        let Some(msg) = line.trim().strip_prefix("KLEE: ERROR:") else { continue };
        errors += 1;
        let assertion = msg.to_ascii_lowercase().contains("assertion fail");
        match subjects {
            Subjects::Functional(_) if assertion => match quoted(msg) {
                Some(id) => f.violate(id, msg),
                None => log::warn!("klee assertion failure without a property id: {msg}"),
            },
            Subjects::Safety if !assertion => match klee_error_class(msg) {
                Some(p) => f.violate(p.label(), msg),
                None => log::warn!("unclassified klee error: {msg}"),
            },
            _ => {}
        }
    }
    if errors == 0 && !text.contains("KLEE: done") {
        return None;
    }
    // Exploration without an error is not a proof.
    Some(assemble(ip, Tool::Klee, subjects, raw, f, VerdictResult::Unknown))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::safety_matrix;

    fn raw(stdout: &str) -> CapturedOutput {
        CapturedOutput {
            stdout: stdout.into(),
            stderr: String::new(),
            exit_code: Some(10),
            timed_out: false,
            wall_time: 0.5,
            tool_version: "t".into(),
        }
    }

    fn by_subject(vs: &[Verdict]) -> BTreeMap<&str, VerdictResult> {
        vs.iter().map(|v| (v.subject.as_str(), v.result)).collect()
    }

    const CBMC_OVERFLOW: &str = "\
** Results:
overflow.c function main
[main.overflow.1] line 5 arithmetic overflow on signed + in x + 1: FAILURE

** 1 of 1 failed (2 iterations)
VERIFICATION FAILED
";

    #[test]
    fn cbmc_overflow_is_integer_overflow() {
        let vs = parse_verdicts("ip", Tool::Cbmc, &Subjects::Safety, &raw(CBMC_OVERFLOW)).unwrap();
        let m = by_subject(&vs);
        assert_eq!(vs.len(), 8);
        assert_eq!(m["Integer Overflow"], VerdictResult::Violated);
        assert_eq!(m["Division by Zero"], VerdictResult::Proved);
        let io = vs.iter().find(|v| v.subject == "Integer Overflow").unwrap();
        assert!(io.counterexample.as_deref().unwrap().contains("arithmetic overflow on signed +"));
    }

    #[test]
    fn cbmc_float_overflow_and_functional_assertions() {
        let out = "[f.overflow.2] line 9 arithmetic overflow on floating-point addition in a + b: FAILURE\nVERIFICATION FAILED\n";
        let m = parse_verdicts("ip", Tool::Cbmc, &Subjects::Safety, &raw(out)).unwrap();
        assert_eq!(by_subject(&m)["Floating Point Arithmetic Overflow"], VerdictResult::Violated);
        assert_eq!(by_subject(&m)["Integer Overflow"], VerdictResult::Proved);

        let out = "[main.assertion.1] line 40 P1: SUCCESS\n[main.assertion.2] line 41 P2: FAILURE\n[main.assertion.3] line 42 P2: SUCCESS\nVERIFICATION FAILED\n";
        let ids = Subjects::Functional(vec!["P1".into(), "P2".into(), "P3".into()]);
        let vs = parse_verdicts("ip", Tool::Cbmc, &ids, &raw(out)).unwrap();
        let m = by_subject(&vs);
        assert_eq!((m["P1"], m["P2"], m["P3"]), (VerdictResult::Proved, VerdictResult::Violated, VerdictResult::Unknown));
        let ok = parse_verdicts("ip", Tool::Cbmc, &ids, &raw("VERIFICATION SUCCESSFUL\n")).unwrap();
        assert!(ok.iter().all(|v| v.result == VerdictResult::Proved));
    }

    #[test]
    fn cpachecker_results() {
        let ok = parse_verdicts("ip", Tool::Cpachecker, &Subjects::Safety, &raw("Verification result: TRUE. No property violation found by chosen configuration.\n")).unwrap();
        assert_eq!(ok.len(), 5);
        assert!(ok.iter().all(|v| v.result == VerdictResult::Proved));

        let out = "Verification result: FALSE. Property violation (unreach-call: reach_error();) found by chosen configuration.\n";
        let one = parse_verdicts("ip", Tool::Cpachecker, &Subjects::Functional(vec!["P1".into()]), &raw(out)).unwrap();
        assert_eq!(one[0].result, VerdictResult::Violated);
        let two = parse_verdicts("ip", Tool::Cpachecker, &Subjects::Functional(vec!["P1".into(), "P2".into()]), &raw(out)).unwrap();
        assert!(two.iter().all(|v| v.result == VerdictResult::Unknown));

        let out = "Verification result: FALSE. Property violation (no-overflow) found by chosen configuration.\n";
        let s = parse_verdicts("ip", Tool::Cpachecker, &Subjects::Safety, &raw(out)).unwrap();
        assert_eq!(by_subject(&s)["Integer Overflow"], VerdictResult::Violated);
        assert_eq!(by_subject(&s)["Termination"], VerdictResult::Unknown);
    }

    #[test]
    fn klee_results() {
        let out = "KLEE: output directory is \"x\"\nKLEE: done: total instructions = 100\nKLEE: done: completed paths = 4\n";
        let s = parse_verdicts("ip", Tool::Klee, &Subjects::Safety, &raw(out)).unwrap();
        assert!(s.iter().all(|v| v.result == VerdictResult::Unknown && v.counterexample.is_none()));

        let out = "KLEE: ERROR: h.c:30: ASSERTION FAIL: 0 && (\"P2\")\nKLEE: ERROR: f.c:12: memory error: out of bound pointer\nKLEE: done: completed paths = 4\n";
        let f = parse_verdicts("ip", Tool::Klee, &Subjects::Functional(vec!["P1".into(), "P2".into()]), &raw(out)).unwrap();
        assert_eq!(by_subject(&f)["P2"], VerdictResult::Violated);
        assert_eq!(by_subject(&f)["P1"], VerdictResult::Unknown);
        let s = parse_verdicts("ip", Tool::Klee, &Subjects::Safety, &raw(out)).unwrap();
        assert_eq!(by_subject(&s)["Out of Bounds Array Access"], VerdictResult::Violated);
    }

    #[test]
    fn timeouts_and_garbage() {
        let mut r = raw("");
        r.exit_code = Some(0);
        for tool in Tool::VERIFIERS {
            assert!(matches!(parse_verdicts("ip", tool, &Subjects::Safety, &r), Err(BackendError::UnrecognizedOutput { .. })));
        }
        r.timed_out = true;
        let vs = parse_verdicts("ip", Tool::Klee, &Subjects::Safety, &r).unwrap();
        assert!(vs.iter().all(|v| v.result == VerdictResult::Timeout));
        assert_eq!(vs.len(), safety_matrix(Tool::Klee).len());
    }
}
