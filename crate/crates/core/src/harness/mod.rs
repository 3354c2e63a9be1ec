//! Verification-harness generation.
//!
//! A harness declares the component's variables, makes them nondeterministic,
//! assumes the preconditions, calls the entry function once and asserts the
//! postconditions. Properties sharing a precondition set share a harness.

mod cexpr;
mod coverage;
mod emit;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use coverage::{precondition_coverage, CoverageReport};
pub use emit::{emit_harness, emit_safety_harness, emit_trace_harness, harness_file_name, safety_file_name};

use crate::knowledge::{augment_dictionary, Category, DataDictionaryEntry, ValueType};
use crate::ltl::{collect_vars, parse_ltl, render_ltl, LtlFormula, Value};

/// Buffer length used when the configuration does not give one.
pub const DEFAULT_BUFFER_LEN: usize = 19;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Cbmc,
    Cpachecker,
    Klee,
    Trace,
}

impl Backend {
    pub const VERIFIERS: [Backend; 3] = [Backend::Cbmc, Backend::Cpachecker, Backend::Klee];

    pub fn as_str(self) -> &'static str {
        match self {
            Backend::Cbmc => "cbmc",
            Backend::Cpachecker => "cpachecker",
            Backend::Klee => "klee",
            Backend::Trace => "trace",
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Backend {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cbmc" => Ok(Backend::Cbmc),
            "cpachecker" => Ok(Backend::Cpachecker),
            "klee" => Ok(Backend::Klee),
            "trace" => Ok(Backend::Trace),
            other => Err(HarnessError::UnsupportedBackend(other.to_string())),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum HarnessError {
    #[error("unsupported backend `{0}`")]
    UnsupportedBackend(String),
    #[error("variable `{0}` is not declared in the data dictionary")]
    UngroundedVariable(String),
    #[error("unsupported condition `{expr}`: {reason}")]
    UnsupportedExpr { expr: String, reason: String },
    #[error("invalid test vector {index}: {reason}")]
    InvalidVector { index: usize, reason: String },
    #[error("coverage check needs {0} valuations, more than the enumeration limit")]
    TooManyValuations(u128),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Pre,
    Post,
}

/// Quantifier- and operator-free boolean condition over dictionary variables:
/// comparison atoms combined with `&`, `|` and `~`.
#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub expr: LtlFormula,
    pub role: Role,
}

impl Condition {
    pub fn new(expr: LtlFormula, role: Role) -> Result<Self, HarnessError> {
        check_condition_grammar(&expr)?;
        if role == Role::Pre {
            if let Some(v) = collect_vars(&expr).into_iter().find(|v| v.primed) {
                return Err(HarnessError::UnsupportedExpr {
                    expr: render_ltl(&expr),
                    reason: format!("precondition refers to post-state value `{v}`"),
                });
            }
        }
        Ok(Condition { expr, role })
    }

    pub fn parse(text: &str, role: Role) -> Result<Self, HarnessError> {
        let expr = parse_ltl(text).map_err(|e| HarnessError::UnsupportedExpr {
            expr: text.to_string(),
            reason: e.to_string(),
        })?;
        Condition::new(expr, role)
    }

    pub fn render(&self) -> String {
        render_ltl(&self.expr)
    }
}

fn check_condition_grammar(f: &LtlFormula) -> Result<(), HarnessError> {
    let reject = |reason: &str| {
        Err(HarnessError::UnsupportedExpr { expr: render_ltl(f), reason: reason.to_string() })
    };
    match f {
        LtlFormula::Atom(_) => Ok(()),
        LtlFormula::Not(g) => check_condition_grammar(g),
        LtlFormula::And(l, r) | LtlFormula::Or(l, r) => {
            check_condition_grammar(l)?;
            check_condition_grammar(r)
        }
        LtlFormula::Implies(..) | LtlFormula::Iff(..) => reject("only `&`, `|` and `~` may combine atoms"),
        LtlFormula::Next(_) | LtlFormula::Until(..) | LtlFormula::Globally(_) | LtlFormula::Finally(_) => {
            reject("temporal operators are not allowed in pre/post-conditions")
        }
    }
}

/// A property expressed as a Hoare-style contract of one entry call.
#[derive(Debug, Clone, PartialEq)]
pub struct HarnessProperty {
    pub id: String,
    pub pre: Vec<Condition>,
    pub post: Vec<Condition>,
}

/// Splits `G(pre -> post)`, `G(pre -> F post)` and `G(post)` (state-formula
/// bodies only) into top-level conjuncts. Other shapes return `None`.
pub fn contract_from_ltl(f: &LtlFormula) -> Option<(Vec<LtlFormula>, Vec<LtlFormula>)> {
    let LtlFormula::Globally(body) = f else { return None };
    let (pre, post) = match body.as_ref() {
        LtlFormula::Implies(a, b) => {
            let b = match b.as_ref() {
                LtlFormula::Finally(inner) => inner.as_ref(),
                other => other,
            };
            (Some(a.as_ref()), b)
        }
        other => (None, other),
    };
    if !post.is_state_formula() || !pre.is_none_or(LtlFormula::is_state_formula) {
        return None;
    }
    let mut pres = Vec::new();
    if let Some(p) = pre {
        conjuncts(p, &mut pres);
    }
    let mut posts = Vec::new();
    conjuncts(post, &mut posts);
    Some((pres, posts))
}

fn conjuncts(f: &LtlFormula, out: &mut Vec<LtlFormula>) {
    match f {
        LtlFormula::And(l, r) => {
            conjuncts(l, out);
            conjuncts(r, out);
        }
        other => out.push(other.clone()),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolicVar {
    pub name: String,
    pub value_type: ValueType,
    pub category: Category,
    pub is_buffer: bool,
    pub buffer_len: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assertion {
    pub property: String,
    pub condition: Condition,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarnessSpec {
    pub ip_name: String,
    pub entry_symbol: String,
    pub header_includes: Vec<String>,
    /// Every non-return dictionary entry, in dictionary order.
    pub symbolic_vars: Vec<SymbolicVar>,
    /// The entry function's result variable.
    pub return_var: SymbolicVar,
    pub preconditions: Vec<Condition>,
    pub postconditions: Vec<Assertion>,
}

impl HarnessSpec {
    pub(crate) fn input_ports(&self) -> impl Iterator<Item = &SymbolicVar> {
        self.symbolic_vars.iter().filter(|v| v.category == Category::InputPort)
    }

    pub(crate) fn globals(&self) -> impl Iterator<Item = &SymbolicVar> {
        self.symbolic_vars.iter().filter(|v| v.category != Category::InputPort)
    }

    pub(crate) fn var(&self, name: &str) -> Option<&SymbolicVar> {
        self.symbolic_vars.iter().chain(std::iter::once(&self.return_var)).find(|v| v.name == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarnessGroup {
    /// Sorted canonical renderings of the preconditions joined by ` & `
    /// (`TRUE` for none).
    pub key: String,
    pub members: Vec<String>,
    pub spec: HarnessSpec,
}

impl HarnessGroup {
    /// First eight hex digits of the SHA-256 of the key.
    pub fn key_hash8(&self) -> String {
        key_hash8(&self.key)
    }
}

pub fn key_hash8(key: &str) -> String {
    hex::encode(Sha256::digest(key.as_bytes()))[..8].to_string()
}

/// Everything a harness needs to know about the component besides its
/// properties.
#[derive(Debug, Clone)]
pub struct HarnessContext {
    pub ip_name: String,
    pub entry_symbol: String,
    pub header_includes: Vec<String>,
    /// Dictionary without the implicit return entry; it is added here.
    pub dictionary: Vec<DataDictionaryEntry>,
    pub buffer_len: usize,
}

impl HarnessContext {
    pub fn augmented(&self) -> Vec<DataDictionaryEntry> {
        augment_dictionary(&self.dictionary, &self.entry_symbol)
    }

    fn base_spec(&self) -> HarnessSpec {
        let dict = self.augmented();
        let to_var = |e: &DataDictionaryEntry| SymbolicVar {
            name: e.name.clone(),
            value_type: e.value_type,
            category: e.category,
            is_buffer: e.value_type.is_buffer(),
            buffer_len: e.value_type.is_buffer().then_some(self.buffer_len),
        };
        HarnessSpec {
            ip_name: self.ip_name.clone(),
            entry_symbol: self.entry_symbol.clone(),
            header_includes: self.header_includes.clone(),
            symbolic_vars: dict.iter().filter(|e| e.category != Category::ReturnValue).map(to_var).collect(),
            return_var: dict
                .iter()
                .find(|e| e.category == Category::ReturnValue)
                .map(to_var)
                .expect("augmented dictionary has a return entry"),
            preconditions: Vec::new(),
            postconditions: Vec::new(),
        }
    }

    /// Harness with neither preconditions nor postconditions, for the
    /// tools' built-in safety checks.
    pub fn safety_group(&self) -> HarnessGroup {
        HarnessGroup { key: "SAFETY".into(), members: Vec::new(), spec: self.base_spec() }
    }
}

pub fn precondition_key(pre: &[Condition]) -> String {
    let mut rendered: Vec<String> = pre.iter().map(Condition::render).collect();
    rendered.sort();
    rendered.dedup();
    if rendered.is_empty() {
        "TRUE".into()
    } else {
        rendered.join(" & ")
    }
}

/// Groups properties by their canonical precondition set. Groups are ordered
/// by key, members by id.
pub fn group_properties(props: &[HarnessProperty], ctx: &HarnessContext) -> Vec<HarnessGroup> {
    let mut by_key: BTreeMap<String, Vec<&HarnessProperty>> = BTreeMap::new();
    for p in props {
        by_key.entry(precondition_key(&p.pre)).or_default().push(p);
    }
    by_key
        .into_iter()
        .map(|(key, mut members)| {
            members.sort_by(|a, b| natural_cmp(&a.id, &b.id));
            let mut spec = ctx.base_spec();
            let mut seen = Vec::new();
            for c in &members[0].pre {
                let r = c.render();
                if !seen.contains(&r) {
                    seen.push(r);
                    spec.preconditions.push(c.clone());
                }
            }
            spec.preconditions.sort_by_key(Condition::render);
            for m in &members {
                for c in &m.post {
                    spec.postconditions.push(Assertion { property: m.id.clone(), condition: c.clone() });
                }
            }
            HarnessGroup { key, members: members.iter().map(|m| m.id.clone()).collect(), spec }
        })
        .collect()
}

/// Orders `P2` before `P10`.
pub(crate) fn natural_cmp(a: &str, b: &str) -> std::cmp::Ordering {
    let split = |s: &str| {
        let digits = s.len() - s.trim_end_matches(|c: char| c.is_ascii_digit()).len();
        let (head, tail) = s.split_at(s.len() - digits);
        (head.to_string(), tail.parse::<u64>().unwrap_or(0), s.to_string())
    };
    split(a).cmp(&split(b))
}

/// One concrete input assignment for a trace harness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VectorValue {
    Scalar(Value),
    Bytes(Vec<u8>),
}

pub type TestVector = BTreeMap<String, VectorValue>;
