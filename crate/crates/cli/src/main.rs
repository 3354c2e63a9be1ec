//! `ipverify`: mine, harness, verify, monitor and report for one software IP
//! component described by a project file.
//!
//! Exit codes: 0 success, 1 analysis findings, 2 environment or
//! configuration error, 64 usage error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ipverify_core::backends::Tool;
use ipverify_core::config::DEFAULT_CONFIG_NAME;
use ipverify_core::harness::Backend;
use ipverify_core::orchestrator::{
    cmd_harness, cmd_monitor, cmd_mine, cmd_report, cmd_verify, CmdError, CmdOutcome, Overrides, Project, ReportFormat,
};

const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "ipverify", version, about = "Requirement mining and multi-backend verification for software IP components")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Project file.
    #[arg(long, default_value = DEFAULT_CONFIG_NAME)]
    project: PathBuf,
    /// Output directory (overrides the project's output_dir).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Translate requirements into LTL properties (mined.json).
    Mine {
        #[command(flatten)]
        common: Common,
        /// Replay recorded LLM responses from this directory.
        #[arg(long, value_name = "FIXTURES")]
        offline: Option<PathBuf>,
    },
    /// Emit verification harnesses (harnesses/).
    Harness {
        #[command(flatten)]
        common: Common,
        /// cbmc, cpachecker, klee or trace; repeatable. Default: all verifiers,
        /// plus trace when test vectors are configured.
        #[arg(long, value_parser = parse_backend)]
        backend: Vec<Backend>,
    },
    /// Run verifiers on the emitted harnesses (verdicts.jsonl).
    Verify {
        #[command(flatten)]
        common: Common,
        /// cbmc, cpachecker or klee; repeatable. Default: all three.
        #[arg(long, value_parser = parse_verifier)]
        backend: Vec<Tool>,
        /// Per-run timeout in seconds (overrides timeout_s).
        #[arg(long)]
        timeout: Option<u64>,
    },
    /// Check properties against recorded traces (monitor.jsonl).
    Monitor {
        #[command(flatten)]
        common: Common,
    },
    /// Render the safety and functional result tables.
    Report {
        /// Results directory; defaults to the project's output_dir.
        results_dir: Option<PathBuf>,
        #[arg(long, default_value = DEFAULT_CONFIG_NAME)]
        project: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Report file (default: report.txt or report.json in the results directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

fn parse_backend(s: &str) -> Result<Backend, String> {
    s.parse::<Backend>().map_err(|e| e.to_string())
}

fn parse_verifier(s: &str) -> Result<Tool, String> {
    match parse_backend(s)? {
        Tool::Trace => Err("trace harnesses are not run by `verify`".into()),
        t => Ok(t),
    }
}

fn load(common: &Common, offline: Option<PathBuf>, timeout_s: Option<u64>) -> Result<Project, CmdError> {
    Project::load(&common.project, &Overrides { offline, timeout_s, output_dir: common.out.clone() })
}

fn finish(outcome: CmdOutcome) -> u8 {
    for line in &outcome.lines {
        println!("{line}");
    }
    outcome.status.exit_code()
}

fn run(cmd: Cmd) -> Result<u8, CmdError> {
    match cmd {
        Cmd::Mine { common, offline } => Ok(finish(cmd_mine(&load(&common, offline, None)?)?)),
        Cmd::Harness { common, backend } => {
            let p = load(&common, None, None)?;
            let backends = if backend.is_empty() {
                let mut all = Tool::VERIFIERS.to_vec();
                if p.cfg.test_vectors.is_some() {
                    all.push(Backend::Trace);
                }
                all
            } else {
                backend
            };
            Ok(finish(cmd_harness(&p, &backends)?))
        }
        Cmd::Verify { common, backend, timeout } => {
            let p = load(&common, None, timeout)?;
            let tools = if backend.is_empty() { Tool::VERIFIERS.to_vec() } else { backend };
            Ok(finish(cmd_verify(&p, &tools)?))
        }
        Cmd::Monitor { common } => Ok(finish(cmd_monitor(&load(&common, None, None)?)?)),
        Cmd::Report { results_dir, project, format, out } => {
            let dir = match results_dir {
                Some(d) => d,
                None => Project::load(&project, &Overrides::default())?.cfg.output_dir,
            };
            let format = match format {
                Format::Text => ReportFormat::Text,
                Format::Json => ReportFormat::Json,
            };
            print!("{}", cmd_report(&dir, format, out.as_deref())?);
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli.cmd) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
