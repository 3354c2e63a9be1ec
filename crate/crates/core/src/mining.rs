//! Requirement mining: temporal filtering, standardization against the data
//! dictionary, and translation into LTL.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::knowledge::{dictionary_table, Provenance, Requirement, RequirementDoc, Stage};
use crate::llm::{ChatModel, ChatRequest, LlmError};
use crate::ltl::{ground_check, parse_ltl, render_ltl, GroundingViolation, LtlFormula};

pub const DEFAULT_MAX_RETRIES: usize = 2;

/// Keywords the fallback classifier treats as temporal cues.
pub const TEMPORAL_KEYWORDS: [&str; 11] =
    ["after", "before", "during", "until", "when", "whenever", "eventually", "always", "next", "within", "then"];

const SYSTEM_PROMPT: &str = "You are an expert in software requirements engineering and linear temporal logic.";
const FORMULA_LABEL: &str = "LTL Formula:";

const FILTER_PROMPT: &str = include_str!("../prompts/filter.txt");
const STANDARDIZE_PROMPT: &str = include_str!("../prompts/standardize.txt");
const TRANSLATE_PROMPT: &str = include_str!("../prompts/translate.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PromptTemplate {
    pub stage: Stage,
    pub body: &'static str,
}

impl PromptTemplate {
    pub fn bundled(stage: Stage) -> Self {
        let body = match stage {
            Stage::Filter => FILTER_PROMPT,
            Stage::Standardize => STANDARDIZE_PROMPT,
            Stage::Translate => TRANSLATE_PROMPT,
        };
        PromptTemplate { stage, body }
    }

    /// Substitutes `{name}` placeholders; unknown placeholders are left as is.
    pub fn render(&self, vars: &[(&str, &str)]) -> String {
        let mut out = self.body.to_string();
        for (k, v) in vars {
            out = out.replace(&format!("{{{k}}}"), v);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinedProperty {
    pub requirement_id: u32,
    pub explicit_text: String,
    pub formula: LtlFormula,
    pub llm_explanation: String,
    /// Empty when every variable is grounded.
    pub grounding: Vec<GroundingViolation>,
    pub attempts: usize,
}

/// One entry of `mined.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinedRecord {
    pub id: u32,
    pub explicit_text: String,
    pub ltl: String,
    pub explanation: String,
    pub grounding_violations: Vec<String>,
}

impl From<&MinedProperty> for MinedRecord {
    fn from(p: &MinedProperty) -> Self {
        MinedRecord {
            id: p.requirement_id,
            explicit_text: p.explicit_text.clone(),
            ltl: render_ltl(&p.formula),
            explanation: p.llm_explanation.clone(),
            grounding_violations: p.grounding.iter().map(ToString::to_string).collect(),
        }
    }
}

#[derive(Debug, Error)]
pub enum MiningError {
    #[error("requirement {0}: standardized text names no dictionary variable")]
    StandardizationUngrounded(u32),
    #[error("requirement {id}: no parseable LTL formula after retries: {last_error}")]
    TranslationUnparseable { id: u32, last_error: String },
    #[error("requirement {id}: {stage} stage failed: {source}")]
    Llm { id: u32, stage: &'static str, source: LlmError },
}

impl MiningError {
    pub fn requirement_id(&self) -> u32 {
        match self {
            MiningError::StandardizationUngrounded(id) => *id,
            MiningError::TranslationUnparseable { id, .. } | MiningError::Llm { id, .. } => *id,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Mined,
    Skipped,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RequirementOutcome {
    pub id: u32,
    pub temporal: bool,
    pub rationale: String,
    pub outcome: Outcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub attempts: BTreeMap<&'static str, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MiningReport {
    pub requirements: usize,
    pub temporal: usize,
    pub standardized: usize,
    pub translated: usize,
    pub grounded: usize,
    pub errors: usize,
    pub outcomes: Vec<RequirementOutcome>,
}

#[derive(Debug)]
pub struct MiningOutput {
    pub properties: Vec<MinedProperty>,
    pub errors: Vec<MiningError>,
    pub report: MiningReport,
    /// Input requirements annotated with classification and explicit text.
    pub requirements: Vec<Requirement>,
}

#[derive(Debug, Clone)]
pub struct MiningConfig {
    pub max_retries: usize,
    /// Requirements processed concurrently.
    pub jobs: usize,
    pub tool: String,
}

impl Default for MiningConfig {
    fn default() -> Self {
        MiningConfig { max_retries: DEFAULT_MAX_RETRIES, jobs: 2, tool: "llm".into() }
    }
}

fn ask(client: &dyn ChatModel, user: String) -> Result<String, LlmError> {
    client.chat(&ChatRequest::new(SYSTEM_PROMPT, user, client.model_id())).map(|r| r.text)
}

/// Deterministic keyword classifier: temporal iff any keyword occurs as a
/// whole word, case-insensitively.
pub fn fallback_classify(text: &str) -> (bool, String) {
    let words: Vec<String> = text
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect();
    let hits: Vec<String> =
        TEMPORAL_KEYWORDS.iter().filter(|k| words.iter().any(|w| w == *k)).map(|k| format!("'{k}'")).collect();
    if hits.is_empty() {
        (false, "fallback: no temporal cue".into())
    } else {
        (true, format!("fallback: matched {}", hits.join(",")))
    }
}

fn parse_classification(answer: &str) -> Option<(bool, String)> {
    let trimmed = answer.trim_start();
    let token: String = trimmed.chars().take_while(|c| c.is_ascii_alphabetic() || *c == '-' || *c == '_').collect();
    let verdict = match token.to_ascii_uppercase().as_str() {
        "TEMPORAL" => true,
        "NON-TEMPORAL" | "NON_TEMPORAL" | "NONTEMPORAL" => false,
        _ => return None,
    };
    let rest = trimmed[token.len()..].trim_start_matches(|c: char| c.is_whitespace() || ":.-".contains(c)).trim();
    let rationale = if rest.is_empty() { token.to_ascii_uppercase() } else { rest.to_string() };
    Some((verdict, rationale))
}

/// Asks the model whether a requirement is temporal, falling back to the
/// keyword classifier if the model is unavailable or never answers in the
/// expected format.
pub fn classify_temporal(req: &Requirement, client: &dyn ChatModel, max_retries: usize) -> (bool, String, usize) {
    let base = PromptTemplate::bundled(Stage::Filter).render(&[("requirement", &req.raw_text)]);
    let mut prompt = base.clone();
    for attempt in 1..=max_retries + 1 {
        match ask(client, prompt) {
            Ok(answer) => {
                if let Some((t, why)) = parse_classification(&answer) {
                    return (t, why, attempt);
                }
                log::debug!("requirement {}: unparseable classification {answer:?}", req.id);
            }
            Err(e) => {
                log::info!("requirement {}: classifier unavailable ({e}), using keywords", req.id);
                let (t, why) = fallback_classify(&req.raw_text);
                return (t, why, attempt);
            }
        }
        prompt = format!("{base}\n\nYour previous answer did not begin with TEMPORAL or NON-TEMPORAL. Answer again in the required format.");
    }
    let (t, why) = fallback_classify(&req.raw_text);
    (t, why, max_retries + 1)
}

fn mentions_word(text: &str, word: &str) -> bool {
    let is_ident = |c: char| c.is_ascii_alphanumeric() || c == '_';
    text.match_indices(word).any(|(i, _)| {
        let before = text[..i].chars().next_back();
        let after = text[i + word.len()..].chars().next();
        !before.is_some_and(is_ident) && !after.is_some_and(is_ident)
    })
}

/// The standardized sentence: the text after a `Standardized Requirement:`
/// label if the answer has one, otherwise the whole answer.
fn extract_explicit(answer: &str) -> String {
    let label = "Standardized Requirement:";
    let body = match answer.find(label) {
        Some(i) => answer[i + label.len()..].lines().next().unwrap_or(""),
        None => answer,
    };
    body.trim().trim_matches(|c| c == '"' || c == '“' || c == '”').trim().to_string()
}

/// Rewrites a requirement so that every quantity is named by its dictionary
/// variable. One corrective retry if the answer names no variable.
pub fn standardize(req: &Requirement, doc: &RequirementDoc, client: &dyn ChatModel) -> Result<(String, usize), MiningError> {
    let dict = doc.augmented_dictionary();
    let table = dictionary_table(&dict);
    let base = PromptTemplate::bundled(Stage::Standardize)
        .render(&[("dictionary_table", table.trim_end()), ("requirement", &req.raw_text)]);
    let grounded = |text: &str| dict.iter().any(|e| mentions_word(text, &e.name));

    let answer = ask(client, base.clone()).map_err(|source| MiningError::Llm { id: req.id, stage: "standardize", source })?;
    let explicit = extract_explicit(&answer);
    if grounded(&explicit) {
        return Ok((explicit, 1));
    }
    let retry = format!(
        "{base}\n\nYour previous answer did not use any Data Name from the knowledge model table. \
         Rewrite the standardized requirement naming every variable by its exact Data Name."
    );
    match ask(client, retry) {
        Ok(answer) => {
            let explicit = extract_explicit(&answer);
            if grounded(&explicit) {
                Ok((explicit, 2))
            } else {
                Err(MiningError::StandardizationUngrounded(req.id))
            }
        }
        Err(e) => {
            log::info!("requirement {}: standardization retry unavailable: {e}", req.id);
            Err(MiningError::StandardizationUngrounded(req.id))
        }
    }
}

fn extract_formula(answer: &str) -> Result<String, String> {
    let line = answer
        .lines()
        .find(|l| l.contains(FORMULA_LABEL))
        .ok_or_else(|| format!("answer has no `{FORMULA_LABEL}` line"))?;
    let f = line[line.find(FORMULA_LABEL).unwrap() + FORMULA_LABEL.len()..].trim();
    let f = f.trim_matches('`').trim();
    let f = f.strip_prefix("\\(").and_then(|s| s.strip_suffix("\\)")).unwrap_or(f).trim();
    Ok(f.to_string())
}

fn extract_explanation(answer: &str) -> String {
    match answer.find("Explanation:") {
        Some(i) => answer[i + "Explanation:".len()..].trim().to_string(),
        None => String::new(),
    }
}

/// Translates an explicit requirement into LTL, feeding parser diagnostics
/// back to the model on failure.
pub fn translate(
    id: u32,
    explicit_text: &str,
    client: &dyn ChatModel,
    max_retries: usize,
) -> Result<(LtlFormula, String, usize), MiningError> {
    let base = PromptTemplate::bundled(Stage::Translate).render(&[("explicit_text", explicit_text)]);
    let mut prompt = base.clone();
    let mut last_error = String::new();
    for attempt in 1..=max_retries + 1 {
        let answer = match ask(client, prompt) {
            Ok(a) => a,
            Err(source) if attempt == 1 => return Err(MiningError::Llm { id, stage: "translate", source }),
            Err(e) => {
                log::info!("requirement {id}: translation retry unavailable: {e}");
                break;
            }
        };
        let parsed = extract_formula(&answer).and_then(|text| parse_ltl(&text).map_err(|e| format!("`{text}`: {e}")));
        match parsed {
            Ok(f) => return Ok((f, extract_explanation(&answer), attempt)),
            Err(e) => last_error = e,
        }
        prompt = format!(
            "{base}\n\nYour previous LTL formula could not be parsed: {last_error}\n\
             Answer again in the same format, with the whole formula on one line after `{FORMULA_LABEL}`."
        );
    }
    Err(MiningError::TranslationUnparseable { id, last_error })
}

struct Processed {
    requirement: Requirement,
    outcome: RequirementOutcome,
    result: Option<Result<MinedProperty, MiningError>>,
}

fn provenance(stage: Stage, cfg: &MiningConfig) -> Provenance {
    Provenance {
        stage,
        tool: cfg.tool.clone(),
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
    }
}

fn process(req: &Requirement, doc: &RequirementDoc, client: &dyn ChatModel, cfg: &MiningConfig) -> Processed {
    let mut annotated = req.clone();
    let mut attempts = BTreeMap::new();
    let (temporal, rationale, n) = classify_temporal(req, client, cfg.max_retries);
    attempts.insert("filter", n);
    annotated.temporal = Some(temporal);
    annotated.temporal_rationale = Some(rationale.clone());
    annotated.provenance.push(provenance(Stage::Filter, cfg));

    let mut outcome = RequirementOutcome { id: req.id, temporal, rationale, outcome: Outcome::Skipped, error: None, attempts };
    if !temporal {
        return Processed { requirement: annotated, outcome, result: None };
    }

    let result = standardize(req, doc, client).and_then(|(explicit, n_std)| {
        outcome.attempts.insert("standardize", n_std);
        annotated.explicit_text = Some(explicit.clone());
        annotated.provenance.push(provenance(Stage::Standardize, cfg));
        let (formula, llm_explanation, n_tr) = translate(req.id, &explicit, client, cfg.max_retries)?;
        outcome.attempts.insert("translate", n_tr);
        annotated.provenance.push(provenance(Stage::Translate, cfg));
        let grounding = ground_check(&formula, &doc.dictionary);
        Ok(MinedProperty {
            requirement_id: req.id,
            explicit_text: explicit,
            formula,
            llm_explanation,
            grounding,
            attempts: n_tr,
        })
    });
    match &result {
        Ok(_) => outcome.outcome = Outcome::Mined,
        Err(e) => {
            outcome.outcome = Outcome::Error;
            outcome.error = Some(e.to_string());
        }
    }
    Processed { requirement: annotated, outcome, result: Some(result) }
}

/// Runs every requirement through filter → standardize → translate →
/// grounding. Per-requirement failures are collected, never fatal.
pub fn mine(doc: &RequirementDoc, client: &dyn ChatModel, cfg: &MiningConfig) -> MiningOutput {
    let reqs = &doc.requirements;
    let slots: Vec<Mutex<Option<Processed>>> = reqs.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = cfg.jobs.clamp(1, reqs.len().max(1));
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(req) = reqs.get(i) else { break };
                let p = process(req, doc, client, cfg);
                *slots[i].lock().unwrap_or_else(|e| e.into_inner()) = Some(p);
            });
        }
    });
    let mut processed: Vec<Processed> =
        slots.into_iter().map(|m| m.into_inner().unwrap_or_else(|e| e.into_inner()).expect("every slot filled")).collect();
    processed.sort_by_key(|p| p.requirement.id);

    let mut properties = Vec::new();
    let mut errors = Vec::new();
    let mut requirements = Vec::new();
    let mut outcomes = Vec::new();
    let mut standardized = 0;
    for p in processed {
        if p.requirement.explicit_text.is_some() {
            standardized += 1;
        }
        match p.result {
            Some(Ok(m)) => properties.push(m),
            Some(Err(e)) => errors.push(e),
            None => {}
        }
        requirements.push(p.requirement);
        outcomes.push(p.outcome);
    }
    let report = MiningReport {
        requirements: reqs.len(),
        temporal: outcomes.iter().filter(|o| o.temporal).count(),
        standardized,
        translated: properties.len(),
        grounded: properties.iter().filter(|p| p.grounding.is_empty()).count(),
        errors: errors.len(),
        outcomes,
    };
    MiningOutput { properties, errors, report, requirements }
}

/// `mined.json` text: a pretty-printed array with a trailing newline.
pub fn mined_json(props: &[MinedProperty]) -> String {
    let records: Vec<MinedRecord> = props.iter().map(MinedRecord::from).collect();
    let mut s = serde_json::to_string_pretty(&records).expect("records serialise");
    s.push('\n');
    s
}
