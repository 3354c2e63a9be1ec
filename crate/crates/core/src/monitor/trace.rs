use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

use crate::ltl::{is_c_identifier, Value};

/// Variable valuation at one instant.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
#[serde(transparent)]
pub struct StateSnapshot(pub BTreeMap<String, Value>);

impl StateSnapshot {
    pub fn get(&self, name: &str) -> Option<Value> {
        self.0.get(name).copied()
    }

    pub fn insert(&mut self, name: impl Into<String>, v: Value) {
        self.0.insert(name.into(), v);
    }
}

impl<const N: usize> From<[(&str, Value); N]> for StateSnapshot {
    fn from(items: [(&str, Value); N]) -> Self {
        StateSnapshot(items.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
    }
}

impl<'de> Deserialize<'de> for StateSnapshot {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct SnapshotVisitor;

        impl<'de> Visitor<'de> for SnapshotVisitor {
            type Value = StateSnapshot;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an object mapping variable names to numbers or booleans")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<StateSnapshot, A::Error> {
                let mut out = BTreeMap::new();
                while let Some(key) = map.next_key::<String>()? {
                    if !is_c_identifier(&key) {
                        return Err(serde::de::Error::custom(format!("`{key}` is not a valid identifier")));
                    }
                    let value: Value = map.next_value()?;
                    if out.insert(key.clone(), value).is_some() {
                        return Err(serde::de::Error::custom(format!("duplicate key `{key}`")));
                    }
                }
                Ok(StateSnapshot(out))
            }
        }

        d.deserialize_map(SnapshotVisitor)
    }
}

/// One invocation of the component: the state before and after the call.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TraceEvent {
    pub pre: StateSnapshot,
    pub post: StateSnapshot,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub events: Vec<TraceEvent>,
    /// Traces are complete runs; prefix semantics are not supported.
    pub complete: bool,
}

impl Trace {
    pub fn new(events: Vec<TraceEvent>) -> Result<Self, TraceError> {
        if events.is_empty() {
            return Err(TraceError::EmptyTrace);
        }
        Ok(Trace { events, complete: true })
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Every variable name appearing in any snapshot.
    pub fn variable_names(&self) -> BTreeSet<String> {
        self.events
            .iter()
            .flat_map(|e| e.pre.0.keys().chain(e.post.0.keys()))
            .cloned()
            .collect()
    }

    /// JSON Lines rendering, one complete event per line.
    pub fn to_jsonl(&self) -> String {
        let mut s = String::new();
        for e in &self.events {
            s.push_str(&serde_json::to_string(e).expect("trace event serialises"));
            s.push('\n');
        }
        s
    }
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("cannot read trace {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("trace format error at line {line}: {message}")]
    TraceFormatError { line: usize, message: String },
    #[error("trace contains no events")]
    EmptyTrace,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLine {
    pre: Option<StateSnapshot>,
    post: Option<StateSnapshot>,
    label: Option<String>,
}

pub fn load_trace(path: &Path) -> Result<Trace, TraceError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| TraceError::Io { path: path.to_path_buf(), source })?;
    parse_trace(&text)
}

/// Parses JSON Lines. Each line is either a full event
/// `{"pre": .., "post": .., "label": ..}` or half of one: a `{"pre": ..}`
/// line immediately followed by a `{"post": .., "label": ..}` line, which is
/// what instrumented harnesses print around the call.
pub fn parse_trace(text: &str) -> Result<Trace, TraceError> {
    let mut events = Vec::new();
    let mut pending: Option<(usize, StateSnapshot)> = None;
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| TraceError::TraceFormatError { line: line_no, message };
        let raw: RawLine = serde_json::from_str(line).map_err(|e| err(e.to_string()))?;
        match (pending.take(), raw.pre, raw.post) {
            (None, Some(pre), Some(post)) => events.push(TraceEvent { pre, post, label: raw.label }),
            (None, Some(pre), None) => {
                if raw.label.is_some() {
                    return Err(err("label belongs on the post line".into()));
                }
                pending = Some((line_no, pre));
            }
            (Some((_, pre)), None, Some(post)) => events.push(TraceEvent { pre, post, label: raw.label }),
            (Some((open, _)), _, _) => {
                return Err(err(format!("pre-state on line {open} has no matching post-state")))
            }
            (None, None, Some(_)) => return Err(err("post-state without a preceding pre-state".into())),
            (None, None, None) => return Err(err("line has neither `pre` nor `post`".into())),
        }
    }
    if let Some((open, _)) = pending {
        return Err(TraceError::TraceFormatError {
            line: open,
            message: "pre-state has no matching post-state".into(),
        });
    }
    Trace::new(events)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_line_trace() {
        let t = parse_trace(
            "{\"pre\": {\"a\": 1}, \"post\": {\"a\": 2}}\n{\"pre\": {\"a\": 2}, \"post\": {\"a\": 3.5}, \"label\": \"x\"}\n",
        )
        .unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.events[0].pre.get("a"), Some(Value::Int(1)));
        assert_eq!(t.events[1].post.get("a"), Some(Value::Float(3.5)));
        assert_eq!(t.events[1].label.as_deref(), Some("x"));
    }

    #[test]
    fn value_inference() {
        let t = parse_trace(
            "{\"pre\": {\"i\": -3, \"u\": 18446744073709551615, \"f\": 1.0, \"b\": true}, \"post\": {}}",
        )
        .unwrap();
        let pre = &t.events[0].pre;
        assert_eq!(pre.get("i"), Some(Value::Int(-3)));
        assert_eq!(pre.get("u"), Some(Value::UInt(u64::MAX)));
        assert_eq!(pre.get("f"), Some(Value::Float(1.0)));
        assert_eq!(pre.get("b"), Some(Value::Bool(true)));
    }

    #[test]
    fn split_lines_merge() {
        let t = parse_trace("{\"pre\": {\"a\": 1}}\n{\"post\": {\"a\": 2}, \"label\": \"v0\"}\n").unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.events[0].post.get("a"), Some(Value::Int(2)));
    }

    #[test]
    fn empty_file() {
        assert!(matches!(parse_trace(""), Err(TraceError::EmptyTrace)));
        assert!(matches!(parse_trace("\n\n"), Err(TraceError::EmptyTrace)));
    }

    #[test]
    fn duplicate_key_rejected() {
        let e = parse_trace("{\"pre\": {\"a\": 1}, \"post\": {}}\n{\"pre\": {\"a\": 1, \"a\": 2}, \"post\": {}}")
            .unwrap_err();
        assert!(matches!(e, TraceError::TraceFormatError { line: 2, .. }), "{e}");
    }

    #[test]
    fn malformed_lines() {
        for bad in [
            "{\"pre\": {\"a\": \"str\"}, \"post\": {}}",
            "{\"pre\": {\"9a\": 1}, \"post\": {}}",
            "{\"pre\": {}, \"post\": {}, \"extra\": 1}",
            "{\"post\": {}}",
            "{}",
            "not json",
            "{\"pre\": {}}\n{\"pre\": {}}",
            "{\"pre\": {}}",
        ] {
            assert!(
                matches!(parse_trace(bad), Err(TraceError::TraceFormatError { .. })),
                "accepted {bad:?}"
            );
        }
    }

    #[test]
    fn jsonl_round_trip() {
        let text = "{\"pre\":{\"a\":1},\"post\":{\"a\":2},\"label\":\"x\"}\n";
        let t = parse_trace(text).unwrap();
        assert_eq!(t.to_jsonl(), text);
    }
}
