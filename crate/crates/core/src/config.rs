//! Project configuration: binds one component's knowledge model, formal
//! properties and implementation, plus tool and LLM settings.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::backends::ToolConfig;
use crate::harness::DEFAULT_BUFFER_LEN;
use crate::llm::DEFAULT_MODEL;
use crate::mining::DEFAULT_MAX_RETRIES;
use crate::monitor::DEFAULT_EPS;

pub const DEFAULT_CONFIG_NAME: &str = "ipverify.json";
pub const DEFAULT_TIMEOUT_S: u64 = 300;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid config {}: {message}", path.display())]
    Invalid { path: PathBuf, message: String },
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Implementation {
    /// Header declaring the entry function and globals.
    pub header: Option<PathBuf>,
    #[serde(default)]
    pub sources: Vec<PathBuf>,
    #[serde(default)]
    pub include_dirs: Vec<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LlmMode {
    #[default]
    Offline,
    Online,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LlmSettings {
    #[serde(default)]
    pub mode: LlmMode,
    /// Recorded responses for offline mode.
    pub fixtures: Option<PathBuf>,
    #[serde(default = "default_model")]
    pub model: String,
    #[serde(default = "default_retries")]
    pub max_retries: usize,
}

fn default_model() -> String {
    DEFAULT_MODEL.into()
}

fn default_retries() -> usize {
    DEFAULT_MAX_RETRIES
}

impl Default for LlmSettings {
    fn default() -> Self {
        LlmSettings { mode: LlmMode::Offline, fixtures: None, model: default_model(), max_retries: default_retries() }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tools {
    #[serde(default)]
    pub cbmc: ToolConfig,
    #[serde(default)]
    pub cpachecker: ToolConfig,
    #[serde(default)]
    pub klee: ToolConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectConfig {
    pub knowledge_model: PathBuf,
    /// Manual pre/post-conditions: `[{"id", "pre": [..], "post": [..]}]`.
    pub property_overrides: Option<PathBuf>,
    /// Hand-written LTL property file, one formula per line.
    pub ltl_properties: Option<PathBuf>,
    /// Whether mined properties join the monitored and harnessed sets.
    #[serde(default = "yes")]
    pub use_mined: bool,
    /// Directory of `*.jsonl` traces.
    pub traces: Option<PathBuf>,
    /// JSON array of test vectors for the trace harness.
    pub test_vectors: Option<PathBuf>,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub implementation: Implementation,
    #[serde(default = "default_buffer_len")]
    pub buffer_len: usize,
    #[serde(default)]
    pub llm: LlmSettings,
    #[serde(default)]
    pub tools: Tools,
    /// Directory of recorded tool outputs; replaces real tool runs.
    pub mock: Option<PathBuf>,
    #[serde(default = "default_timeout")]
    pub timeout_s: u64,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_jobs")]
    pub max_parallel_jobs: usize,
}

fn yes() -> bool {
    true
}

fn default_buffer_len() -> usize {
    DEFAULT_BUFFER_LEN
}

fn default_timeout() -> u64 {
    DEFAULT_TIMEOUT_S
}

fn default_eps() -> f64 {
    DEFAULT_EPS
}

fn default_jobs() -> usize {
    2
}

impl ProjectConfig {
    /// Reads a config and resolves every path against its directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        let base = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        Self::from_str_at(&text, base).map_err(|message| ConfigError::Invalid { path: path.to_path_buf(), message })
    }

    pub fn from_str_at(text: &str, base: &Path) -> Result<Self, String> {
        let mut c: ProjectConfig = serde_json::from_str(text).map_err(|e| e.to_string())?;
        if c.buffer_len == 0 {
            return Err("buffer_len must be positive".into());
        }
        if !(c.eps.is_finite() && c.eps >= 0.0) {
            return Err("eps must be a finite non-negative number".into());
        }
        c.max_parallel_jobs = c.max_parallel_jobs.max(1);
        let abs = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        abs(&mut c.knowledge_model);
        abs(&mut c.output_dir);
        for p in [&mut c.property_overrides, &mut c.ltl_properties, &mut c.traces, &mut c.test_vectors, &mut c.mock, &mut c.llm.fixtures]
            .into_iter()
            .flatten()
        {
            abs(p);
        }
        let imp = &mut c.implementation;
        imp.header.iter_mut().chain(imp.sources.iter_mut()).chain(imp.include_dirs.iter_mut()).for_each(abs);
        for t in [&mut c.tools.cbmc, &mut c.tools.cpachecker, &mut c.tools.klee] {
            // Bare names are looked up on PATH; only paths are rebased.
            if let Some(p) = t.path.as_mut().filter(|p| p.components().count() > 1) {
                abs(p);
            }
        }
        Ok(c)
    }

    /// `#include` names for harnesses: the header's file name, found via
    /// its directory on the include path.
    pub fn header_includes(&self) -> Vec<String> {
        self.implementation
            .header
            .iter()
            .filter_map(|h| h.file_name())
            .map(|n| n.to_string_lossy().into_owned())
            .collect()
    }

    pub fn include_dirs(&self) -> Vec<PathBuf> {
        let mut dirs: Vec<PathBuf> =
            self.implementation.header.iter().filter_map(|h| h.parent().map(Path::to_path_buf)).collect();
        for d in &self.implementation.include_dirs {
            if !dirs.contains(d) {
                dirs.push(d.clone());
            }
        }
        dirs
    }

    pub fn tool_config(&self, tool: crate::backends::Tool) -> ToolConfig {
        use crate::backends::Tool;
        match tool {
            Tool::Cbmc => self.tools.cbmc.clone(),
            Tool::Cpachecker => self.tools.cpachecker.clone(),
            Tool::Klee => self.tools.klee.clone(),
            Tool::Trace => ToolConfig::default(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paths_resolve_against_config_dir() {
        let c = ProjectConfig::from_str_at(
            r#"{"knowledge_model": "km.json", "output_dir": "out",
                "implementation": {"header": "src/a.h", "sources": ["src/a.c"]},
                "llm": {"fixtures": "llm"}, "tools": {"cbmc": {"path": "bin/cbmc"}, "klee": {"path": "klee"}}}"#,
            Path::new("/p"),
        )
        .unwrap();
        assert_eq!(c.knowledge_model, Path::new("/p/km.json"));
        assert_eq!(c.implementation.sources, [PathBuf::from("/p/src/a.c")]);
        assert_eq!(c.llm.fixtures.as_deref(), Some(Path::new("/p/llm")));
        assert_eq!(c.tools.cbmc.path.as_deref(), Some(Path::new("/p/bin/cbmc")));
        assert_eq!(c.tools.klee.path.as_deref(), Some(Path::new("klee")));
        assert_eq!(c.header_includes(), ["a.h"]);
        assert_eq!(c.include_dirs(), [PathBuf::from("/p/src")]);
        assert_eq!((c.timeout_s, c.buffer_len, c.max_parallel_jobs), (300, 19, 2));
        assert!(c.use_mined);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        let base = Path::new(".");
        assert!(ProjectConfig::from_str_at(r#"{"knowledge_model": "k", "output_dir": "o", "extra": 1}"#, base).is_err());
        assert!(ProjectConfig::from_str_at(r#"{"knowledge_model": "k", "output_dir": "o", "buffer_len": 0}"#, base).is_err());
        assert!(ProjectConfig::from_str_at(r#"{"output_dir": "o"}"#, base).is_err());
    }
}
