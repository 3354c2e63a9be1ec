//! Requirement analysis and verification toolchain for reusable software IP
//! components.
//!
//! The pipeline reads a knowledge model (data dictionary plus natural
//! language requirements), mines LTL properties through an LLM, emits
//! verification harnesses for CBMC, CPAchecker and KLEE, runs those tools,
//! and checks the mined properties against recorded execution traces.

pub mod backends;
pub mod config;
pub mod harness;
pub mod knowledge;
pub mod llm;
pub mod ltl;
pub mod mining;
pub mod monitor;
pub mod orchestrator;
pub mod report;

pub use knowledge::{
    parse_knowledge_model, resolve_term, Category, DataDictionaryEntry, Requirement, RequirementDoc,
    Resolution, ValueType,
};
pub use ltl::{collect_vars, ground_check, parse_ltl, render_ltl, LtlFormula, ParseError, Value, VarRef};
pub use monitor::{evaluate, load_trace, MonitorVerdict, Trace, TraceEvent};
