//! IP knowledge model: the data dictionary and the requirement document.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ltl::is_c_identifier;

/// Name of the implicit dictionary entry standing for the entry function's
/// return value.
pub const RETURN_NAME: &str = "__ret";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueType {
    Uint8Buffer,
    Uint8,
    Uint16,
    Uint32,
    Int32,
    Int64,
    Float32,
    Float64,
    Bool,
}

impl ValueType {
    pub fn as_str(self) -> &'static str {
        match self {
            ValueType::Uint8Buffer => "uint8_buffer",
            ValueType::Uint8 => "uint8",
            ValueType::Uint16 => "uint16",
            ValueType::Uint32 => "uint32",
            ValueType::Int32 => "int32",
            ValueType::Int64 => "int64",
            ValueType::Float32 => "float32",
            ValueType::Float64 => "float64",
            ValueType::Bool => "bool",
        }
    }

    pub fn is_buffer(self) -> bool {
        self == ValueType::Uint8Buffer
    }

    pub fn is_float(self) -> bool {
        matches!(self, ValueType::Float32 | ValueType::Float64)
    }

    /// Inclusive integer range of the type; `None` for floats and buffers.
    pub fn int_range(self) -> Option<(i128, i128)> {
        Some(match self {
            ValueType::Uint8 => (0, u8::MAX as i128),
            ValueType::Uint16 => (0, u16::MAX as i128),
            ValueType::Uint32 => (0, u32::MAX as i128),
            ValueType::Int32 => (i32::MIN as i128, i32::MAX as i128),
            ValueType::Int64 => (i64::MIN as i128, i64::MAX as i128),
            ValueType::Bool => (0, 1),
            ValueType::Float32 | ValueType::Float64 | ValueType::Uint8Buffer => return None,
        })
    }
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    InputPort,
    StateVariable,
    OutputPort,
    ReturnValue,
}

impl Category {
    pub fn label(self) -> &'static str {
        match self {
            Category::InputPort => "input port",
            Category::StateVariable => "state variable",
            Category::OutputPort => "output port",
            Category::ReturnValue => "return value",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataDictionaryEntry {
    pub name: String,
    #[serde(rename = "type")]
    pub value_type: ValueType,
    pub category: Category,
    pub explanation: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Filter,
    Standardize,
    Translate,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Filter => "filter",
            Stage::Standardize => "standardize",
            Stage::Translate => "translate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub stage: Stage,
    pub tool: String,
    pub timestamp: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Requirement {
    pub id: u32,
    pub raw_text: String,
    pub temporal: Option<bool>,
    pub temporal_rationale: Option<String>,
    pub explicit_text: Option<String>,
    pub provenance: Vec<Provenance>,
}

impl Requirement {
    pub fn new(id: u32, raw_text: impl Into<String>) -> Self {
        Requirement { id, raw_text: raw_text.into(), ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RequirementDoc {
    pub ip_name: String,
    pub entry_symbol: String,
    pub requirements: Vec<Requirement>,
    pub dictionary: Vec<DataDictionaryEntry>,
}

#[derive(Debug, Error)]
pub enum KnowledgeError {
    #[error("knowledge model not found: {}", .0.display())]
    FileNotFound(PathBuf),
    #[error("io error reading {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("schema error at line {line}: {message}")]
    SchemaError { line: usize, message: String },
    #[error("duplicate dictionary name `{0}`")]
    DuplicateName(String),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDoc {
    ip_name: String,
    entry_symbol: String,
    dictionary: Vec<DataDictionaryEntry>,
    requirements: Vec<RawRequirement>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRequirement {
    id: u32,
    text: String,
}

pub fn parse_knowledge_model(path: &Path) -> Result<RequirementDoc, KnowledgeError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            KnowledgeError::FileNotFound(path.to_path_buf())
        } else {
            KnowledgeError::Io { path: path.to_path_buf(), source: e }
        }
    })?;
    parse_knowledge_model_str(&text)
}

pub fn parse_knowledge_model_str(text: &str) -> Result<RequirementDoc, KnowledgeError> {
    if text.starts_with('\u{feff}') {
        return Err(KnowledgeError::SchemaError { line: 1, message: "byte order mark not allowed".into() });
    }
    let raw: RawDoc = serde_json::from_str(text)
        .map_err(|e| KnowledgeError::SchemaError { line: e.line(), message: e.to_string() })?;
    let schema = |needle: &str, message: String| KnowledgeError::SchemaError {
        line: line_of(text, needle),
        message,
    };

    if !is_c_identifier(&raw.entry_symbol) {
        return Err(schema(
            &raw.entry_symbol,
            format!("entry_symbol `{}` is not a C identifier", raw.entry_symbol),
        ));
    }
    let mut seen = HashSet::new();
    for e in &raw.dictionary {
        if !is_c_identifier(&e.name) {
            return Err(schema(&format!("\"{}\"", e.name), format!("`{}` is not a C identifier", e.name)));
        }
        if e.explanation.trim().is_empty() {
            return Err(schema(&format!("\"{}\"", e.name), format!("entry `{}` has an empty explanation", e.name)));
        }
        if !seen.insert(e.name.as_str()) {
            return Err(KnowledgeError::DuplicateName(e.name.clone()));
        }
    }
    if raw.dictionary.iter().filter(|e| e.category == Category::ReturnValue).count() > 1 {
        return Err(schema("return_value", "at most one return_value entry is allowed".into()));
    }
    for (idx, r) in raw.requirements.iter().enumerate() {
        if r.id as usize != idx + 1 {
            return Err(schema(
                &format!("\"id\": {}", r.id),
                format!("requirement ids must be sequential from 1; found {} at position {}", r.id, idx + 1),
            ));
        }
        if r.text.trim().is_empty() {
            return Err(schema(&format!("\"id\": {}", r.id), format!("requirement {} has empty text", r.id)));
        }
    }

    Ok(RequirementDoc {
        ip_name: raw.ip_name,
        entry_symbol: raw.entry_symbol,
        requirements: raw.requirements.into_iter().map(|r| Requirement::new(r.id, r.text)).collect(),
        dictionary: raw.dictionary,
    })
}

/// Best-effort 1-based line of the first occurrence of `needle`.
fn line_of(text: &str, needle: &str) -> usize {
    text.find(needle).map(|at| text[..at].matches('\n').count() + 1).unwrap_or(1)
}

impl RequirementDoc {
    /// Serialises the document back to the knowledge-model schema.
    pub fn to_json(&self) -> String {
        let raw = RawDoc {
            ip_name: self.ip_name.clone(),
            entry_symbol: self.entry_symbol.clone(),
            dictionary: self.dictionary.clone(),
            requirements: self
                .requirements
                .iter()
                .map(|r| RawRequirement { id: r.id, text: r.raw_text.clone() })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&raw).expect("knowledge model serialises");
        s.push('\n');
        s
    }

    /// Dictionary plus the implicit `__ret` entry when no return value is declared.
    pub fn augmented_dictionary(&self) -> Vec<DataDictionaryEntry> {
        augment_dictionary(&self.dictionary, &self.entry_symbol)
    }

    pub fn requirement(&self, id: u32) -> Option<&Requirement> {
        self.requirements.iter().find(|r| r.id == id)
    }
}

/// Adds `__ret` (uint32) unless the dictionary declares a return value.
pub fn augment_dictionary(dict: &[DataDictionaryEntry], entry_symbol: &str) -> Vec<DataDictionaryEntry> {
    let mut out = dict.to_vec();
    if !dict.iter().any(|e| e.category == Category::ReturnValue) {
        out.push(DataDictionaryEntry {
            name: RETURN_NAME.to_string(),
            value_type: ValueType::Uint32,
            category: Category::ReturnValue,
            explanation: format!("Return value of {entry_symbol}"),
        });
    }
    out
}

/// Name of the return-value entry of an augmented dictionary.
pub fn return_entry(dict: &[DataDictionaryEntry]) -> Option<&DataDictionaryEntry> {
    dict.iter().find(|e| e.category == Category::ReturnValue)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Resolution {
    Resolved(String),
    Ambiguous(Vec<String>),
    Unresolved,
}

fn tokens(s: &str) -> BTreeSet<String> {
    s.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .collect()
}

/// Maps a descriptive phrase to a dictionary name.
///
/// An exact name match wins (case-sensitive first, then case-insensitive).
/// Otherwise each entry scores the number of distinct term tokens found in
/// its explanation; the unique best positive score wins and ties are
/// reported as `Ambiguous`, sorted by name.
pub fn resolve_term(term: &str, dict: &[DataDictionaryEntry]) -> Resolution {
    let trimmed = term.trim();
    if let Some(e) = dict.iter().find(|e| e.name == trimmed) {
        return Resolution::Resolved(e.name.clone());
    }
    let mut ci: Vec<&str> = dict
        .iter()
        .filter(|e| e.name.eq_ignore_ascii_case(trimmed))
        .map(|e| e.name.as_str())
        .collect();
    match ci.len() {
        0 => {}
        1 => return Resolution::Resolved(ci[0].to_string()),
        _ => {
            ci.sort_unstable();
            return Resolution::Ambiguous(ci.into_iter().map(String::from).collect());
        }
    }

    let wanted = tokens(trimmed);
    let scored: Vec<(usize, &str)> = dict
        .iter()
        .map(|e| (tokens(&e.explanation).intersection(&wanted).count(), e.name.as_str()))
        .collect();
    let best = scored.iter().map(|(s, _)| *s).max().unwrap_or(0);
    if best == 0 {
        return Resolution::Unresolved;
    }
    let mut winners: Vec<String> =
        scored.iter().filter(|(s, _)| *s == best).map(|(_, n)| n.to_string()).collect();
    if winners.len() == 1 {
        Resolution::Resolved(winners.remove(0))
    } else {
        winners.sort_unstable();
        Resolution::Ambiguous(winners)
    }
}

/// Markdown-style table used when presenting the dictionary to an LLM.
pub fn dictionary_table(dict: &[DataDictionaryEntry]) -> String {
    let mut s = String::from("| Data Name | Data Type | Category | Explanation |\n|---|---|---|---|\n");
    for e in dict {
        s.push_str(&format!(
            "| {} | {} | {} | {} |\n",
            e.name,
            e.value_type,
            e.category.label(),
            e.explanation
        ));
    }
    s
}
