//! Command implementations: mine, harness, verify, monitor, report.
//!
//! Each command reads the project config and earlier artifacts from the
//! output directory and writes its own artifacts there under stable names.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backends::{
    parse_verdicts, replay_mock, resolve_tool, run_backend, uniform_verdicts, BackendError, RunRequest, Subjects, Tool,
    Verdict, VerdictResult,
};
use crate::config::{ConfigError, LlmMode, ProjectConfig};
use crate::harness::{
    contract_from_ltl, emit_harness, emit_safety_harness, emit_trace_harness, group_properties, harness_file_name,
    precondition_coverage, safety_file_name, Backend, Condition, HarnessContext, HarnessError, HarnessGroup,
    HarnessProperty, Role, TestVector,
};
use crate::knowledge::{parse_knowledge_model, KnowledgeError, RequirementDoc};
use crate::llm::{LlmClient, LlmError, Mode, OnlineConfig, ENV_MODEL};
use crate::ltl::{parse_ltl, parse_property_file, LtlFormula};
use crate::mining::{mine, mined_json, MinedRecord, MiningConfig};
use crate::monitor::{load_trace, monitor_all, MonitorMatrix, MonitoredProperty, PropertyStatus, Summary, TraceInput};
use crate::report::{build_report, load_results, MonitorRecord, ReportError, MONITOR_FILE, VERDICTS_FILE};

pub const MINED_FILE: &str = "mined.json";
pub const MINING_REPORT_FILE: &str = "mining_report.json";
pub const HARNESS_DIR: &str = "harnesses";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const COVERAGE_FILE: &str = "coverage.json";
pub const MATRIX_FILE: &str = "monitor_matrix.json";
/// Timestamped, so excluded from reproducibility comparisons.
pub const SESSION_LOG: &str = "logs/llm_session.jsonl";

#[derive(Debug, Error)]
pub enum CmdError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Knowledge(#[from] KnowledgeError),
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error("FixtureMissing: offline LLM fixture directory {} does not exist", .0.display())]
    FixtureDirMissing(PathBuf),
    #[error("{}: {message}", path.display())]
    Invalid { path: PathBuf, message: String },
    #[error("io error on {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error("no harness manifest at {}; run `harness` first", .0.display())]
    MissingHarnesses(PathBuf),
    #[error(transparent)]
    Report(#[from] ReportError),
}

impl CmdError {
    /// Every command error is an environment or configuration problem.
    pub fn exit_code(&self) -> u8 {
        2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    /// The analysis itself found problems (violations, ungrounded
    /// properties, uncovered input space).
    Findings,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Success => 0,
            Status::Findings => 1,
        }
    }

    fn from_findings(any: bool) -> Self {
        if any {
            Status::Findings
        } else {
            Status::Success
        }
    }
}

/// Result of a command: its status plus human-readable summary lines.
#[derive(Debug)]
pub struct CmdOutcome {
    pub status: Status,
    pub lines: Vec<String>,
}

/// Command-line overrides of config values.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    /// Forces offline LLM mode with this fixture directory.
    pub offline: Option<PathBuf>,
    pub timeout_s: Option<u64>,
    pub output_dir: Option<PathBuf>,
}

/// A loaded project: config plus knowledge model.
#[derive(Debug, Clone)]
pub struct Project {
    pub cfg: ProjectConfig,
    pub doc: RequirementDoc,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CmdError + '_ {
    move |source| CmdError::Io { path: path.to_path_buf(), source }
}

fn write(path: &Path, text: &str) -> Result<(), CmdError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    std::fs::write(path, text).map_err(io_err(path))
}

fn read(path: &Path) -> Result<String, CmdError> {
    std::fs::read_to_string(path).map_err(io_err(path))
}

fn invalid(path: &Path, message: impl Into<String>) -> CmdError {
    CmdError::Invalid { path: path.to_path_buf(), message: message.into() }
}

fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("artifact serialises");
    s.push('\n');
    s
}

fn jsonl<T: Serialize>(items: &[T]) -> String {
    items.iter().map(|i| serde_json::to_string(i).expect("artifact serialises") + "\n").collect()
}

impl Project {
    pub fn load(config: &Path, ov: &Overrides) -> Result<Self, CmdError> {
        let mut cfg = ProjectConfig::load(config)?;
        if let Some(dir) = &ov.offline {
            cfg.llm.mode = LlmMode::Offline;
            cfg.llm.fixtures = Some(dir.clone());
        }
        if let Some(t) = ov.timeout_s {
            cfg.timeout_s = t;
        }
        if let Some(o) = &ov.output_dir {
            cfg.output_dir = o.clone();
        }
        let doc = parse_knowledge_model(&cfg.knowledge_model)?;
        std::fs::create_dir_all(&cfg.output_dir).map_err(io_err(&cfg.output_dir))?;
        Ok(Project { cfg, doc })
    }

    pub fn out(&self, name: &str) -> PathBuf {
        self.cfg.output_dir.join(name)
    }

    pub fn harness_context(&self) -> HarnessContext {
        HarnessContext {
            ip_name: self.doc.ip_name.clone(),
            entry_symbol: self.doc.entry_symbol.clone(),
            header_includes: self.cfg.header_includes(),
            dictionary: self.doc.dictionary.clone(),
            buffer_len: self.cfg.buffer_len,
        }
    }

    fn llm_client(&self) -> Result<LlmClient, CmdError> {
        let model = std::env::var(ENV_MODEL).ok().filter(|m| !m.is_empty()).unwrap_or_else(|| self.cfg.llm.model.clone());
        let mode = match self.cfg.llm.mode {
            LlmMode::Offline => {
                let dir = self.cfg.llm.fixtures.clone().ok_or_else(|| {
                    invalid(&self.cfg.knowledge_model, "offline LLM mode needs llm.fixtures or --offline")
                })?;
                if !dir.is_dir() {
                    return Err(CmdError::FixtureDirMissing(dir));
                }
                Mode::Offline(dir)
            }
            LlmMode::Online => Mode::Online(OnlineConfig::from_env()?),
        };
        Ok(LlmClient::new(mode, model)
            .with_max_in_flight(self.cfg.max_parallel_jobs)
            .with_session_log(&self.out(SESSION_LOG))?)
    }

    /// Mined records from an earlier `mine` run, if any.
    fn mined_records(&self) -> Result<Vec<MinedRecord>, CmdError> {
        let path = self.out(MINED_FILE);
        if !self.cfg.use_mined || !path.is_file() {
            return Ok(Vec::new());
        }
        serde_json::from_str(&read(&path)?).map_err(|e| invalid(&path, e.to_string()))
    }

    fn ltl_file(&self) -> Result<Vec<(String, LtlFormula)>, CmdError> {
        let Some(path) = &self.cfg.ltl_properties else { return Ok(Vec::new()) };
        let lines = parse_property_file(&read(path)?).map_err(|(line, e)| invalid(path, format!("line {line}: {e}")))?;
        Ok(lines.into_iter().enumerate().map(|(i, l)| (format!("L{}", i + 1), l.formula)).collect())
    }

    /// Functional properties for harnesses: the manual overrides (`P*`) and
    /// grounded, contract-shaped mined formulas (`R*`). The property file is
    /// for the monitor only.
    pub fn functional_properties(&self) -> Result<Vec<HarnessProperty>, CmdError> {
        let mut props = Vec::new();
        if let Some(path) = &self.cfg.property_overrides {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct Raw {
                id: String,
                #[serde(default)]
                pre: Vec<String>,
                post: Vec<String>,
            }
            let raws: Vec<Raw> = serde_json::from_str(&read(path)?).map_err(|e| invalid(path, e.to_string()))?;
            for r in raws {
                let conds = |texts: &[String], role| {
                    texts
                        .iter()
                        .map(|t| Condition::parse(t, role).map_err(|e| invalid(path, format!("{}: {e}", r.id))))
                        .collect::<Result<Vec<_>, _>>()
                };
                props.push(HarnessProperty { pre: conds(&r.pre, Role::Pre)?, post: conds(&r.post, Role::Post)?, id: r.id });
            }
        }
        for (id, f) in self.grounded_mined()? {
            let Some((pre, post)) = contract_from_ltl(&f) else {
                log::info!("{id}: not a single-call contract; monitored only");
                continue;
            };
            let conds = |fs: Vec<LtlFormula>, role| fs.into_iter().map(|f| Condition::new(f, role)).collect::<Result<Vec<_>, _>>();
            match (conds(pre, Role::Pre), conds(post, Role::Post)) {
                (Ok(pre), Ok(post)) => props.push(HarnessProperty { id, pre, post }),
                (Err(e), _) | (_, Err(e)) => log::warn!("{id}: not usable in a harness: {e}"),
            }
        }
        let mut seen = BTreeSet::new();
        for p in &props {
            if !seen.insert(p.id.as_str()) {
                return Err(invalid(&self.cfg.knowledge_model, format!("duplicate property id `{}`", p.id)));
            }
        }
        Ok(props)
    }

    /// Mined formulas whose variables all exist; the rest cannot be
    /// harnessed or observed on a trace.
    fn grounded_mined(&self) -> Result<Vec<(String, LtlFormula)>, CmdError> {
        let mut out = Vec::new();
        for r in self.mined_records()? {
            if !r.grounding_violations.is_empty() {
                log::warn!("R{}: skipped, not grounded ({})", r.id, r.grounding_violations.join("; "));
                continue;
            }
            match parse_ltl(&r.ltl) {
                Ok(f) => out.push((format!("R{}", r.id), f)),
                Err(e) => log::warn!("R{}: skipped, unparseable mined formula: {e}", r.id),
            }
        }
        Ok(out)
    }

    /// Properties for the trace monitor: the property file plus grounded
    /// mined ones.
    pub fn monitored_properties(&self) -> Result<Vec<MonitoredProperty>, CmdError> {
        Ok(self
            .ltl_file()?
            .into_iter()
            .chain(self.grounded_mined()?)
            .map(|(id, formula)| MonitoredProperty { id, formula })
            .collect())
    }
}

pub fn cmd_mine(p: &Project) -> Result<CmdOutcome, CmdError> {
    let client = p.llm_client()?;
    let cfg = MiningConfig { max_retries: p.cfg.llm.max_retries, jobs: p.cfg.max_parallel_jobs, ..Default::default() };
    let out = mine(&p.doc, &client, &cfg);
    write(&p.out(MINED_FILE), &mined_json(&out.properties))?;
    write(&p.out(MINING_REPORT_FILE), &pretty(&out.report))?;

    let r = &out.report;
    let mut lines = vec![format!(
        "mine: {} requirements, {} temporal, {} translated, {} grounded, {} errors",
        r.requirements, r.temporal, r.translated, r.grounded, r.errors
    )];
    for e in &out.errors {
        lines.push(format!("  error: {e}"));
    }
    for m in out.properties.iter().filter(|m| !m.grounding.is_empty()) {
        let v: Vec<String> = m.grounding.iter().map(ToString::to_string).collect();
        lines.push(format!("  requirement {}: grounding: {}", m.requirement_id, v.join("; ")));
    }
    let findings = !out.errors.is_empty() || out.properties.iter().any(|m| !m.grounding.is_empty());
    Ok(CmdOutcome { status: Status::from_findings(findings), lines })
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HarnessKind {
    Safety,
    Functional,
    Trace,
}

/// One emitted harness, as recorded in `harnesses/manifest.json`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub backend: Backend,
    pub kind: HarnessKind,
    pub file: String,
    pub key: String,
    pub members: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CoverageRecord {
    groups: usize,
    covered: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<std::collections::BTreeMap<String, crate::ltl::Value>>,
    checked: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

pub fn trace_harness_name(ip: &str) -> String {
    format!("{ip}_trace.c")
}

fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>, CmdError> {
    serde_json::from_str(&read(path)?).map_err(|e| invalid(path, e.to_string()))
}

/// Emits the safety harness and one harness per precondition group for each
/// backend, and a trace harness when `Backend::Trace` is requested.
pub fn cmd_harness(p: &Project, backends: &[Backend]) -> Result<CmdOutcome, CmdError> {
    let ctx = p.harness_context();
    let dict = ctx.augmented();
    let groups: Vec<HarnessGroup> = group_properties(&p.functional_properties()?, &ctx);
    let safety = ctx.safety_group();
    let dir = p.out(HARNESS_DIR);
    let mut entries = Vec::new();
    let mut lines = Vec::new();
    for &b in backends {
        if b == Backend::Trace {
            let path = p.cfg.test_vectors.as_ref().ok_or_else(|| invalid(&p.cfg.knowledge_model, "trace harness needs test_vectors"))?;
            let vectors: Vec<TestVector> = serde_json::from_str(&read(path)?).map_err(|e| invalid(path, e.to_string()))?;
            let file = trace_harness_name(&ctx.ip_name);
            write(&dir.join(&file), &emit_trace_harness(&safety, &vectors)?)?;
            lines.push(format!("harness: {file} ({} test vectors)", vectors.len()));
            entries.push(ManifestEntry { backend: b, kind: HarnessKind::Trace, file, key: safety.key.clone(), members: Vec::new() });
            continue;
        }
        let file = safety_file_name(&ctx.ip_name, b);
        write(&dir.join(&file), &emit_safety_harness(&ctx, b)?)?;
        entries.push(ManifestEntry { backend: b, kind: HarnessKind::Safety, file, key: safety.key.clone(), members: Vec::new() });
        for g in &groups {
            let file = harness_file_name(&ctx.ip_name, b, g);
            write(&dir.join(&file), &emit_harness(g, &dict, b)?)?;
            entries.push(ManifestEntry { backend: b, kind: HarnessKind::Functional, file, key: g.key.clone(), members: g.members.clone() });
        }
        lines.push(format!("harness: {b}: 1 safety + {} functional harnesses", groups.len()));
    }

    let manifest_path = dir.join(MANIFEST_FILE);
    let mut manifest = if manifest_path.is_file() { read_manifest(&manifest_path)? } else { Vec::new() };
    manifest.retain(|e| !backends.contains(&e.backend));
    manifest.extend(entries);
    manifest.sort();
    write(&manifest_path, &pretty(&manifest))?;

    let cov = match precondition_coverage(&groups, &safety.spec.symbolic_vars) {
        Ok(c) => CoverageRecord { groups: groups.len(), covered: Some(c.covered), witness: c.witness, checked: c.checked, error: None },
        Err(e) => CoverageRecord { groups: groups.len(), covered: None, witness: None, checked: 0, error: Some(e.to_string()) },
    };
    match (cov.covered, &cov.witness, &cov.error) {
        (Some(true), _, _) => lines.push(format!("coverage: preconditions cover the input space ({} valuations checked)", cov.checked)),
        (Some(false), w, _) => lines.push(format!("coverage: uncovered input, e.g. {}", serde_json::to_string(w).unwrap_or_default())),
        (None, _, e) => lines.push(format!("coverage: not checked: {}", e.as_deref().unwrap_or(""))),
    }
    write(&dir.join(COVERAGE_FILE), &pretty(&cov))?;
    Ok(CmdOutcome { status: Status::from_findings(cov.covered == Some(false)), lines })
}

struct Job<'a> {
    entry: &'a ManifestEntry,
    subjects: Subjects,
}

fn run_job(p: &Project, job: &Job, available: &[(Tool, Result<(), String>)]) -> Vec<Verdict> {
    let tool = job.entry.backend;
    let ip = &p.doc.ip_name;
    let timeout = p.cfg.timeout_s;
    let unsupported = |why: &str| {
        log::warn!("{}: {why}; reporting Unsupported", job.entry.file);
        uniform_verdicts(ip, tool, &job.subjects, VerdictResult::Unsupported, 0.0, "none")
    };
    let raw = if let Some(dir) = &p.cfg.mock {
        let stem = job.entry.file.trim_end_matches(".c");
        replay_mock(dir, stem, timeout)
    } else {
        if let Some((_, Err(why))) = available.iter().find(|(t, _)| *t == tool) {
            return unsupported(why);
        }
        let harness_dir = p.out(HARNESS_DIR);
        let mut include_dirs = vec![harness_dir.clone()];
        include_dirs.extend(p.cfg.include_dirs());
        run_backend(&RunRequest {
            tool,
            harness: harness_dir.join(&job.entry.file),
            sources: p.cfg.implementation.sources.clone(),
            include_dirs,
            timeout_s: timeout,
            config: p.cfg.tool_config(tool),
            work_dir: p.out("work").join(job.entry.file.trim_end_matches(".c")),
        })
    };
    match raw.and_then(|raw| parse_verdicts(ip, tool, &job.subjects, &raw)) {
        Ok(v) => v,
        Err(e @ (BackendError::ToolNotFound(_) | BackendError::MockFixtureMissing { .. })) => unsupported(&e.to_string()),
        Err(e) => {
            log::warn!("{}: {e}; reporting Unknown", job.entry.file);
            uniform_verdicts(ip, tool, &job.subjects, VerdictResult::Unknown, 0.0, "unknown")
        }
    }
}

/// Runs `jobs` on at most `workers` threads, keeping input order.
fn fan_out<T: Sync, R: Send>(items: &[T], workers: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let slots: Vec<Mutex<Option<R>>> = items.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..workers.clamp(1, items.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(item) = items.get(i) else { break };
                let r = f(item);
                *slots[i].lock().unwrap_or_else(|e| e.into_inner()) = Some(r);
            });
        }
    });
    slots.into_iter().map(|m| m.into_inner().unwrap_or_else(|e| e.into_inner()).expect("every slot filled")).collect()
}

/// Runs the selected verifiers: every safety harness first, then the
/// functional ones. Missing tools degrade to `Unsupported` verdicts.
pub fn cmd_verify(p: &Project, tools: &[Tool]) -> Result<CmdOutcome, CmdError> {
    let manifest_path = p.out(HARNESS_DIR).join(MANIFEST_FILE);
    if !manifest_path.is_file() {
        return Err(CmdError::MissingHarnesses(manifest_path));
    }
    let manifest = read_manifest(&manifest_path)?;
    let tools: Vec<Tool> = Tool::VERIFIERS.into_iter().filter(|t| tools.contains(t)).collect();
    let available: Vec<(Tool, Result<(), String>)> = tools
        .iter()
        .map(|&t| (t, if p.cfg.mock.is_some() { Ok(()) } else { resolve_tool(t, &p.cfg.tool_config(t)).map(|_| ()).map_err(|e| e.to_string()) }))
        .collect();
    let mut lines = Vec::new();
    for (t, a) in &available {
        if let Err(why) = a {
            lines.push(format!("warning: {t}: {why}"));
        }
    }

    let mut verdicts = Vec::new();
    for kind in [HarnessKind::Safety, HarnessKind::Functional] {
        let jobs: Vec<Job> = tools
            .iter()
            .flat_map(|t| manifest.iter().filter(move |e| e.backend == *t))
            .filter(|e| e.kind == kind)
            .map(|entry| Job {
                entry,
                subjects: match kind {
                    HarnessKind::Safety => Subjects::Safety,
                    _ => Subjects::Functional(entry.members.clone()),
                },
            })
            .collect();
        for vs in fan_out(&jobs, p.cfg.max_parallel_jobs, |j| run_job(p, j, &available)) {
            verdicts.extend(vs);
        }
    }
    write(&p.out(VERDICTS_FILE), &jsonl(&verdicts))?;

    for t in &tools {
        let mine: Vec<&Verdict> = verdicts.iter().filter(|v| v.tool == *t).collect();
        let count = |r| mine.iter().filter(|v| v.result == r).count();
        lines.push(format!(
            "verify: {t}: {} verdicts, {} proved, {} violated, {} unknown, {} timeout, {} unsupported",
            mine.len(),
            count(VerdictResult::Proved),
            count(VerdictResult::Violated),
            count(VerdictResult::Unknown),
            count(VerdictResult::Timeout),
            count(VerdictResult::Unsupported)
        ));
    }
    let findings = verdicts.iter().any(|v| v.result == VerdictResult::Violated);
    Ok(CmdOutcome { status: Status::from_findings(findings), lines })
}

fn load_traces(dir: Option<&Path>) -> Result<Vec<TraceInput>, CmdError> {
    let Some(dir) = dir.filter(|d| d.is_dir()) else { return Ok(Vec::new()) };
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io_err(dir))?
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    paths.sort();
    Ok(paths
        .iter()
        .map(|path| TraceInput {
            name: path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
            trace: load_trace(path).map_err(|e| e.to_string()),
        })
        .collect())
}

/// Checks every monitored property on every trace in the traces directory.
pub fn cmd_monitor(p: &Project) -> Result<CmdOutcome, CmdError> {
    let props = p.monitored_properties()?;
    let traces = load_traces(p.cfg.traces.as_deref())?;
    let eps = p.cfg.eps;
    let rows = fan_out(&props, p.cfg.max_parallel_jobs, |prop| monitor_all(std::slice::from_ref(prop), &traces, eps).rows);
    let rows: Vec<_> = rows.into_iter().flatten().collect();
    let proved = rows.iter().filter(|r| r.status == PropertyStatus::Proved).count();
    let matrix = MonitorMatrix {
        traces: traces.iter().map(|t| t.name.clone()).collect(),
        summary: Summary { proved, all: rows.len() },
        rows,
    };
    write(&p.out(MATRIX_FILE), &pretty(&matrix))?;

    let records: Vec<MonitorRecord> = matrix
        .rows
        .iter()
        .map(|r| MonitorRecord {
            ip: p.doc.ip_name.clone(),
            property: r.id.clone(),
            ltl: r.ltl.clone(),
            status: r.status,
            holds: r.cells.iter().filter(|c| matches!(c, crate::monitor::Cell::Verdict(v) if v.holds())).count(),
            traces: r.cells.len(),
        })
        .collect();
    write(&p.out(MONITOR_FILE), &jsonl(&records))?;

    let mut lines = vec![format!("monitor: {} properties hold on all {} traces", matrix.summary, matrix.traces.len())];
    for (t, input) in traces.iter().enumerate() {
        if let Err(e) = &input.trace {
            lines.push(format!("  trace {} ({}): {e}", t + 1, input.name));
        }
    }
    for r in matrix.rows.iter().filter(|r| r.status != PropertyStatus::Proved) {
        lines.push(format!("  {}: {:?}", r.id, r.status));
    }
    let findings = matrix.rows.iter().any(|r| r.status == PropertyStatus::Failed);
    Ok(CmdOutcome { status: Status::from_findings(findings), lines })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Json,
}

/// Renders the report over all results under `results_dir`, writing it to
/// `out` (default `results_dir/report.txt|json`). Returns the rendering.
pub fn cmd_report(results_dir: &Path, format: ReportFormat, out: Option<&Path>) -> Result<String, CmdError> {
    let (verdicts, monitor) = load_results(results_dir)?;
    let report = build_report(&verdicts, &monitor);
    let (text, default_name) = match format {
        ReportFormat::Text => (report.render_text(), "report.txt"),
        ReportFormat::Json => (report.render_json(), "report.json"),
    };
    let dest = out.map(Path::to_path_buf).unwrap_or_else(|| results_dir.join(default_name));
    write(&dest, &text)?;
    Ok(text)
}

/// The offline pipeline: mine → harness → verify → monitor → report. Returns
/// each step's status; stops at the first command error.
pub fn run_pipeline(p: &Project) -> Result<Vec<(&'static str, Status)>, CmdError> {
    let mut backends = Tool::VERIFIERS.to_vec();
    if p.cfg.test_vectors.is_some() {
        backends.push(Backend::Trace);
    }
    let steps = vec![
        ("mine", cmd_mine(p)?.status),
        ("harness", cmd_harness(p, &backends)?.status),
        ("verify", cmd_verify(p, &Tool::VERIFIERS)?.status),
        ("monitor", cmd_monitor(p)?.status),
    ];
    cmd_report(&p.cfg.output_dir, ReportFormat::Text, None)?;
    Ok(steps)
}
