//! External verifier integration: support matrix, subprocess runner, output
//! parsers and a replaying mock.

mod parse;
mod run;

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use parse::parse_verdicts;
pub use run::{record_mock, replay_mock, resolve_tool, run_backend, CapturedOutput, RunRequest, ToolConfig, MOCK_VERSION};

pub use crate::harness::Backend as Tool;

/// Runtime-error classes the verifiers can check without user assertions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SafetyProperty {
    #[serde(rename = "Out of Bounds Array Access")]
    OutOfBoundsArrayAccess,
    #[serde(rename = "Invalid Pointer Dereference")]
    InvalidPointerDereference,
    #[serde(rename = "Division by Zero")]
    DivisionByZero,
    #[serde(rename = "Integer Overflow")]
    IntegerOverflow,
    #[serde(rename = "Pointer Arithmetic Overflow")]
    PointerArithmeticOverflow,
    #[serde(rename = "Floating Point Arithmetic Overflow")]
    FloatingPointArithmeticOverflow,
    #[serde(rename = "Shift Operation Overflow")]
    ShiftOperationOverflow,
    #[serde(rename = "Memory Leak")]
    MemoryLeak,
    #[serde(rename = "Termination")]
    Termination,
    #[serde(rename = "Data Race")]
    DataRace,
    #[serde(rename = "Dead Lock")]
    DeadLock,
}

use SafetyProperty::*;

impl SafetyProperty {
    /// In table order.
    pub const ALL: [SafetyProperty; 11] = [
        OutOfBoundsArrayAccess,
        InvalidPointerDereference,
        DivisionByZero,
        IntegerOverflow,
        PointerArithmeticOverflow,
        FloatingPointArithmeticOverflow,
        ShiftOperationOverflow,
        MemoryLeak,
        Termination,
        DataRace,
        DeadLock,
    ];

    pub fn label(self) -> &'static str {
        match self {
            OutOfBoundsArrayAccess => "Out of Bounds Array Access",
            InvalidPointerDereference => "Invalid Pointer Dereference",
            DivisionByZero => "Division by Zero",
            IntegerOverflow => "Integer Overflow",
            PointerArithmeticOverflow => "Pointer Arithmetic Overflow",
            FloatingPointArithmeticOverflow => "Floating Point Arithmetic Overflow",
            ShiftOperationOverflow => "Shift Operation Overflow",
            MemoryLeak => "Memory Leak",
            Termination => "Termination",
            DataRace => "Data Race",
            DeadLock => "Dead Lock",
        }
    }

    /// Short tag used in report cells, e.g. `FAIL(IO)`.
    pub fn abbreviation(self) -> &'static str {
        match self {
            OutOfBoundsArrayAccess => "OOB",
            InvalidPointerDereference => "IPD",
            DivisionByZero => "DBZ",
            IntegerOverflow => "IO",
            PointerArithmeticOverflow => "PAO",
            FloatingPointArithmeticOverflow => "FPO",
            ShiftOperationOverflow => "SOO",
            MemoryLeak => "ML",
            Termination => "TERM",
            DataRace => "DR",
            DeadLock => "DL",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.label() == s)
    }
}

impl fmt::Display for SafetyProperty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Properties each tool checks automatically, in table order.
pub fn safety_matrix(tool: Tool) -> Vec<SafetyProperty> {
    match tool {
        Tool::Cbmc => vec![
            OutOfBoundsArrayAccess,
            InvalidPointerDereference,
            DivisionByZero,
            IntegerOverflow,
            PointerArithmeticOverflow,
            FloatingPointArithmeticOverflow,
            ShiftOperationOverflow,
            MemoryLeak,
        ],
        Tool::Cpachecker => vec![InvalidPointerDereference, IntegerOverflow, Termination, DataRace, DeadLock],
        Tool::Klee => vec![
            OutOfBoundsArrayAccess,
            InvalidPointerDereference,
            DivisionByZero,
            ShiftOperationOverflow,
            MemoryLeak,
        ],
        Tool::Trace => Vec::new(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerdictKind {
    Safety,
    Functional,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerdictResult {
    Proved,
    Violated,
    Unknown,
    Timeout,
    Unsupported,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub ip: String,
    pub tool: Tool,
    pub kind: VerdictKind,
    /// Property id, or a safety-property label.
    pub subject: String,
    pub result: VerdictResult,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<String>,
    pub wall_time: f64,
    pub tool_version: String,
}

/// What a run is expected to report on.
#[derive(Debug, Clone, PartialEq)]
pub enum Subjects {
    /// The tool's supported safety properties.
    Safety,
    /// Property ids asserted in a functional harness.
    Functional(Vec<String>),
}

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("{0} executable not found (set tools.{0}.path or add it to PATH)")]
    ToolNotFound(Tool),
    #[error("cannot run {tool}: {message}")]
    SpawnError { tool: Tool, message: String },
    #[error("unrecognized {tool} output: {excerpt}")]
    UnrecognizedOutput { tool: Tool, excerpt: String },
    #[error("no recorded output `{name}` in {}", dir.display())]
    MockFixtureMissing { name: String, dir: PathBuf },
    #[error("invalid mock fixture `{name}`: {message}")]
    MockFixtureInvalid { name: String, message: String },
}

/// One verdict per expected subject with the same result, e.g. for timeouts.
pub fn uniform_verdicts(
    ip: &str,
    tool: Tool,
    subjects: &Subjects,
    result: VerdictResult,
    wall_time: f64,
    tool_version: &str,
) -> Vec<Verdict> {
    let (kind, names) = subject_names(tool, subjects);
    names
        .into_iter()
        .map(|subject| Verdict {
            ip: ip.to_string(),
            tool,
            kind,
            subject,
            result,
            counterexample: None,
            wall_time,
            tool_version: tool_version.to_string(),
        })
        .collect()
}

pub(crate) fn subject_names(tool: Tool, subjects: &Subjects) -> (VerdictKind, Vec<String>) {
    match subjects {
        Subjects::Safety => (VerdictKind::Safety, safety_matrix(tool).iter().map(|p| p.label().to_string()).collect()),
        Subjects::Functional(ids) => (VerdictKind::Functional, ids.clone()),
    }
}
