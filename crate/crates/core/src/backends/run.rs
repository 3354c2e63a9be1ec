use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{BackendError, Tool};

/// Tool version reported for replayed outputs without a recorded version.
pub const MOCK_VERSION: &str = "mock-replay";

const CBMC_FLAGS: &[&str] = &[
    "--bounds-check",
    "--pointer-check",
    "--div-by-zero-check",
    "--signed-overflow-check",
    "--pointer-overflow-check",
    "--conversion-check",
    "--float-overflow-check",
    "--undefined-shift-check",
    "--memory-leak-check",
    "--unwind",
    "32",
];
const CPACHECKER_FLAGS: &[&str] = &["--preprocess", "--default"];

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToolConfig {
    #[serde(default)]
    pub path: Option<PathBuf>,
    /// Replaces the built-in default flags when non-empty.
    #[serde(default)]
    pub flags: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct RunRequest {
    pub tool: Tool,
    pub harness: PathBuf,
    pub sources: Vec<PathBuf>,
    pub include_dirs: Vec<PathBuf>,
    pub timeout_s: u64,
    pub config: ToolConfig,
    /// Scratch directory for intermediate files.
    pub work_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapturedOutput {
    pub stdout: String,
    pub stderr: String,
    pub exit_code: Option<i32>,
    pub timed_out: bool,
    pub wall_time: f64,
    pub tool_version: String,
}

impl CapturedOutput {
    /// stdout followed by stderr; KLEE reports on stderr.
    pub fn combined(&self) -> String {
        if self.stderr.is_empty() {
            self.stdout.clone()
        } else {
            format!("{}\n{}", self.stdout, self.stderr)
        }
    }
}

fn default_name(tool: Tool) -> &'static str {
    match tool {
        Tool::Cbmc => "cbmc",
        Tool::Cpachecker => "cpachecker",
        Tool::Klee => "klee",
        Tool::Trace => "cc",
    }
}

fn is_executable(p: &Path) -> bool {
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        p.metadata().map(|m| m.is_file() && m.permissions().mode() & 0o111 != 0).unwrap_or(false)
    }
    #[cfg(not(unix))]
    {
        p.is_file()
    }
}

fn find_on_path(name: &str) -> Option<PathBuf> {
    std::env::split_paths(&std::env::var_os("PATH")?).map(|d| d.join(name)).find(|p| is_executable(p))
}

/// Configured path (absolute, relative or bare name) or PATH lookup.
pub fn resolve_tool(tool: Tool, cfg: &ToolConfig) -> Result<PathBuf, BackendError> {
    let found = match &cfg.path {
        Some(p) if p.components().count() > 1 || p.is_absolute() => is_executable(p).then(|| p.clone()),
        Some(p) => find_on_path(&p.to_string_lossy()),
        None => find_on_path(default_name(tool)),
    };
    found.ok_or(BackendError::ToolNotFound(tool))
}

struct Finished {
    stdout: String,
    stderr: String,
    exit_code: Option<i32>,
    timed_out: bool,
}

fn run_until(mut cmd: Command, tool: Tool, deadline: Instant) -> Result<Finished, BackendError> {
    let spawn_err = |e: std::io::Error| BackendError::SpawnError { tool, message: e.to_string() };
    let mut child = cmd.stdin(Stdio::null()).stdout(Stdio::piped()).stderr(Stdio::piped()).spawn().map_err(spawn_err)?;
    let mut out_pipe = child.stdout.take().expect("piped");
    let mut err_pipe = child.stderr.take().expect("piped");
    let out_reader = thread::spawn(move || {
        let mut v = Vec::new();
        let _ = out_pipe.read_to_end(&mut v);
        v
    });
    let err_reader = thread::spawn(move || {
        let mut v = Vec::new();
        let _ = err_pipe.read_to_end(&mut v);
        v
    });
    let mut timed_out = false;
    let status = loop {
        if let Some(s) = child.try_wait().map_err(spawn_err)? {
            break Some(s);
        }
        if Instant::now() >= deadline {
            timed_out = true;
            let _ = child.kill();
            let _ = child.wait();
            break None;
        }
        thread::sleep(Duration::from_millis(10));
    };
    let stdout = String::from_utf8_lossy(&out_reader.join().unwrap_or_default()).into_owned();
    let stderr = String::from_utf8_lossy(&err_reader.join().unwrap_or_default()).into_owned();
    Ok(Finished { stdout, stderr, exit_code: status.and_then(|s| s.code()), timed_out })
}

fn tool_version(exe: &Path, tool: Tool) -> String {
    let mut cmd = Command::new(exe);
    cmd.arg("--version");
    match run_until(cmd, tool, Instant::now() + Duration::from_secs(20)) {
        Ok(f) if !f.timed_out => format!("{}\n{}", f.stdout, f.stderr)
            .lines()
            .map(str::trim)
            .find(|l| !l.is_empty())
            .unwrap_or("unknown")
            .to_string(),
        _ => "unknown".into(),
    }
}

fn flags(cfg: &ToolConfig, defaults: &[&str]) -> Vec<String> {
    if cfg.flags.is_empty() {
        defaults.iter().map(|s| s.to_string()).collect()
    } else {
        cfg.flags.clone()
    }
}

/// Runs one tool on one harness, killing it at the timeout. A zero timeout
/// reports a timeout without starting anything.
pub fn run_backend(req: &RunRequest) -> Result<CapturedOutput, BackendError> {
    let exe = resolve_tool(req.tool, &req.config)?;
    let version = tool_version(&exe, req.tool);
    if req.timeout_s == 0 {
        return Ok(CapturedOutput {
            stdout: String::new(),
            stderr: String::new(),
            exit_code: None,
            timed_out: true,
            wall_time: 0.0,
            tool_version: version,
        });
    }
    let start = Instant::now();
    let deadline = start + Duration::from_secs(req.timeout_s);
    let includes: Vec<String> = req.include_dirs.iter().map(|d| format!("-I{}", d.display())).collect();

    let finished = match req.tool {
        Tool::Cbmc => {
            let mut cmd = Command::new(&exe);
            cmd.args(flags(&req.config, CBMC_FLAGS)).args(&includes).arg(&req.harness).args(&req.sources);
            run_until(cmd, req.tool, deadline)?
        }
        Tool::Cpachecker => {
            let mut cmd = Command::new(&exe);
            cmd.args(flags(&req.config, CPACHECKER_FLAGS));
            cmd.arg("--timelimit").arg(format!("{}s", req.timeout_s));
            cmd.arg("--outputpath").arg(req.work_dir.join("cpachecker-out"));
            cmd.arg(&req.harness).args(&req.sources);
            run_until(cmd, req.tool, deadline)?
        }
        Tool::Klee => match klee_bitcode(req, &includes, deadline)? {
            Ok(bitcode) => {
                let out_dir = req.work_dir.join("klee-out");
                let _ = std::fs::remove_dir_all(&out_dir);
                let mut cmd = Command::new(&exe);
                cmd.arg(format!("--output-dir={}", out_dir.display())).args(flags(&req.config, &[])).arg(bitcode);
                run_until(cmd, req.tool, deadline)?
            }
            Err(failed) => failed,
        },
        Tool::Trace => return Err(BackendError::SpawnError { tool: req.tool, message: "not a verifier".into() }),
    };
    Ok(CapturedOutput {
        stdout: finished.stdout,
        stderr: finished.stderr,
        exit_code: finished.exit_code,
        timed_out: finished.timed_out,
        wall_time: start.elapsed().as_secs_f64(),
        tool_version: version,
    })
}

/// Compiles harness and sources to one LLVM bitcode file. A failed step is
/// returned as the run's output.
fn klee_bitcode(req: &RunRequest, includes: &[String], deadline: Instant) -> Result<Result<PathBuf, Finished>, BackendError> {
    let missing = |name: &str| BackendError::SpawnError { tool: req.tool, message: format!("`{name}` not found on PATH") };
    let clang = find_on_path("clang").ok_or_else(|| missing("clang"))?;
    let link = find_on_path("llvm-link").ok_or_else(|| missing("llvm-link"))?;
    std::fs::create_dir_all(&req.work_dir)
        .map_err(|e| BackendError::SpawnError { tool: req.tool, message: e.to_string() })?;
    let mut objects = Vec::new();
    for (i, src) in std::iter::once(&req.harness).chain(&req.sources).enumerate() {
        let bc = req.work_dir.join(format!("unit{i}.bc"));
        let mut cmd = Command::new(&clang);
        cmd.args(["-emit-llvm", "-c", "-g", "-O0", "-Xclang", "-disable-O0-optnone"]).args(includes).arg(src).arg("-o").arg(&bc);
        let f = run_until(cmd, req.tool, deadline)?;
        if f.timed_out || f.exit_code != Some(0) {
            return Ok(Err(f));
        }
        objects.push(bc);
    }
    let linked = req.work_dir.join("linked.bc");
    let mut cmd = Command::new(link);
    cmd.args(&objects).arg("-o").arg(&linked);
    let f = run_until(cmd, req.tool, deadline)?;
    if f.timed_out || f.exit_code != Some(0) {
        return Ok(Err(f));
    }
    Ok(Ok(linked))
}

/// Replays `{name}.stdout`, `{name}.exit` and the optional `{name}.stderr`,
/// `{name}.time` (seconds) and `{name}.version`. The run counts as timed out
/// when `timeout_s` is zero or below the recorded time.
pub fn replay_mock(dir: &Path, name: &str, timeout_s: u64) -> Result<CapturedOutput, BackendError> {
    let read = |ext: &str| std::fs::read_to_string(dir.join(format!("{name}.{ext}"))).ok();
    let missing = || BackendError::MockFixtureMissing { name: name.to_string(), dir: dir.to_path_buf() };
    let invalid = |message: String| BackendError::MockFixtureInvalid { name: name.to_string(), message };
    let stdout = read("stdout").ok_or_else(missing)?;
    let exit = read("exit").ok_or_else(missing)?;
    let exit = exit.trim();
    let exit_code = match exit {
        "" | "none" => None,
        s => Some(s.parse::<i32>().map_err(|e| invalid(format!("exit code `{s}`: {e}")))?),
    };
    let wall_time = match read("time") {
        Some(t) => t.trim().parse::<f64>().map_err(|e| invalid(format!("time `{}`: {e}", t.trim())))?,
        None => 0.0,
    };
    let timed_out = timeout_s == 0 || wall_time > timeout_s as f64;
    Ok(CapturedOutput {
        stdout,
        stderr: read("stderr").unwrap_or_default(),
        exit_code,
        timed_out,
        wall_time,
        tool_version: read("version").map(|v| v.trim().to_string()).unwrap_or_else(|| MOCK_VERSION.to_string()),
    })
}

/// Writes a captured run in the layout `replay_mock` reads.
pub fn record_mock(dir: &Path, name: &str, out: &CapturedOutput) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let path = |ext: &str| dir.join(format!("{name}.{ext}"));
    std::fs::write(path("stdout"), &out.stdout)?;
    if !out.stderr.is_empty() {
        std::fs::write(path("stderr"), &out.stderr)?;
    }
    let exit = out.exit_code.map(|c| c.to_string()).unwrap_or_else(|| "none".into());
    std::fs::write(path("exit"), format!("{exit}\n"))?;
    std::fs::write(path("time"), format!("{}\n", out.wall_time))?;
    std::fs::write(path("version"), format!("{}\n", out.tool_version))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[cfg(unix)]
    fn stub(dir: &Path, name: &str, body: &str) -> PathBuf {
        use std::os::unix::fs::PermissionsExt;
        let p = dir.join(name);
        std::fs::write(&p, format!("#!/bin/sh\n{body}\n")).unwrap();
        std::fs::set_permissions(&p, std::fs::Permissions::from_mode(0o755)).unwrap();
        p
    }

    fn request(tool: Tool, path: PathBuf, timeout_s: u64, work: &Path) -> RunRequest {
        RunRequest {
            tool,
            harness: work.join("h.c"),
            sources: vec![],
            include_dirs: vec![],
            timeout_s,
            config: ToolConfig { path: Some(path), flags: vec![] },
            work_dir: work.to_path_buf(),
        }
    }

    #[cfg(unix)]
    #[test]
    fn captures_output_and_exit_code() {
        let dir = tempfile::tempdir().unwrap();
        let exe = stub(dir.path(), "fakecbmc", "if [ \"$1\" = --version ]; then echo 6.1.1; exit 0; fi\necho VERIFICATION SUCCESSFUL\necho warn >&2\nexit 0");
        let out = run_backend(&request(Tool::Cbmc, exe, 10, dir.path())).unwrap();
        assert_eq!(out.stdout.trim(), "VERIFICATION SUCCESSFUL");
        assert_eq!(out.stderr.trim(), "warn");
        assert_eq!(out.exit_code, Some(0));
        assert!(!out.timed_out);
        assert_eq!(out.tool_version, "6.1.1");
    }

    #[cfg(unix)]
    #[test]
    fn kills_at_timeout() {
        let dir = tempfile::tempdir().unwrap();
        let exe = stub(dir.path(), "sleeper", "[ \"$1\" = --version ] && exit 0\nexec sleep 30");
        let t = Instant::now();
        let out = run_backend(&request(Tool::Cbmc, exe, 1, dir.path())).unwrap();
        assert!(out.timed_out);
        assert!(t.elapsed() < Duration::from_secs(10));
    }

    #[test]
    fn missing_executable() {
        let dir = tempfile::tempdir().unwrap();
        let r = request(Tool::Cbmc, dir.path().join("no-such-cbmc"), 10, dir.path());
        assert!(matches!(run_backend(&r), Err(BackendError::ToolNotFound(Tool::Cbmc))));
        let bare = ToolConfig { path: Some("definitely-not-a-tool-xyz".into()), flags: vec![] };
        assert!(matches!(resolve_tool(Tool::Klee, &bare), Err(BackendError::ToolNotFound(Tool::Klee))));
    }

    #[test]
    fn mock_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let out = CapturedOutput {
            stdout: "Verification result: TRUE.\n".into(),
            stderr: "note\n".into(),
            exit_code: Some(0),
            timed_out: false,
            wall_time: 1.5,
            tool_version: "CPAchecker 3.0".into(),
        };
        record_mock(dir.path(), "x", &out).unwrap();
        assert_eq!(replay_mock(dir.path(), "x", 300).unwrap(), out);
        assert!(replay_mock(dir.path(), "x", 1).unwrap().timed_out);
        assert!(replay_mock(dir.path(), "x", 0).unwrap().timed_out);
        assert!(matches!(replay_mock(dir.path(), "y", 300), Err(BackendError::MockFixtureMissing { .. })));
    }

    #[test]
    fn mock_defaults() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("a.stdout"), "KLEE: done\n").unwrap();
        std::fs::write(dir.path().join("a.exit"), "0\n").unwrap();
        let out = replay_mock(dir.path(), "a", 300).unwrap();
        assert_eq!((out.wall_time, out.tool_version.as_str()), (0.0, MOCK_VERSION));
        std::fs::write(dir.path().join("a.exit"), "zero\n").unwrap();
        assert!(matches!(replay_mock(dir.path(), "a", 300), Err(BackendError::MockFixtureInvalid { .. })));
    }
}
