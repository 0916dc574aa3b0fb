use std::io::Read;
use std::path::Path;
use std::process::{Command, ExitStatus, Stdio};
use std::sync::{Arc, Condvar, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use regex::Regex;
use serde::Deserialize;

use super::measure::{
    evaluate, ChannelPolicy, ItemContext, Measure, MeasureDescriptor, MeasureResult, RequiredRate,
    Scale,
};
use crate::signal::{load_wav, save_wav};
use crate::{AudioSignal, Error, Result};

/// Configuration of an external full-reference tool that prints its score.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdapterConfig {
    pub name: String,
    pub executable: String,
    /// Argument template; `{ref}` and `{test}` are replaced by WAV paths.
    pub args: Vec<String>,
    /// Regex with one capture group holding the score on stdout.
    pub pattern: String,
    pub timeout_secs: f64,
    /// Rate the tool expects; `None` passes signals at their native rate.
    #[serde(default)]
    pub required_rate: Option<u32>,
    #[serde(default)]
    pub scale_min: Option<f64>,
    #[serde(default)]
    pub scale_max: Option<f64>,
    #[serde(default = "default_true")]
    pub higher_is_better: bool,
}

fn default_true() -> bool {
    true
}

/// Counting semaphore bounding concurrent subprocesses.
#[derive(Debug)]
pub(crate) struct ConcurrencyLimit {
    free: Mutex<usize>,
    cond: Condvar,
}

impl ConcurrencyLimit {
    pub fn new(limit: usize) -> Arc<Self> {
        Arc::new(Self {
            free: Mutex::new(limit.max(1)),
            cond: Condvar::new(),
        })
    }

    pub fn default_limit() -> usize {
        thread::available_parallelism().map_or(1, |n| n.get())
    }

    fn acquire(&self) -> Permit<'_> {
        let mut free = self.free.lock().unwrap_or_else(|e| e.into_inner());
        while *free == 0 {
            free = self.cond.wait(free).unwrap_or_else(|e| e.into_inner());
        }
        *free -= 1;
        Permit(self)
    }
}

struct Permit<'a>(&'a ConcurrencyLimit);

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().unwrap_or_else(|e| e.into_inner()) += 1;
        self.0.cond.notify_one();
    }
}

#[derive(Debug, Clone)]
pub struct ToolOutput {
    pub status: ExitStatus,
    pub stdout: String,
    pub stderr: String,
}

/// Runs `executable args...`, killing it after `timeout`.
pub fn run_tool(executable: &str, args: &[String], timeout: Duration) -> Result<ToolOutput> {
    let mut child = Command::new(executable)
        .args(args)
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| Error::Measure(format!("cannot start {executable}: {e}")))?;
    let drain = |pipe: Option<Box<dyn Read + Send>>| {
        thread::spawn(move || {
            let mut buf = Vec::new();
            if let Some(mut p) = pipe {
                let _ = p.read_to_end(&mut buf);
            }
            String::from_utf8_lossy(&buf).into_owned()
        })
    };
    let out = drain(child.stdout.take().map(|p| Box::new(p) as Box<dyn Read + Send>));
    let err = drain(child.stderr.take().map(|p| Box::new(p) as Box<dyn Read + Send>));

    let deadline = Instant::now() + timeout;
    let status = loop {
        if let Some(status) = child.try_wait()? {
            break status;
        }
        if Instant::now() >= deadline {
            let _ = child.kill();
            let _ = child.wait();
            return Err(Error::Measure(format!(
                "{executable} timed out after {:.1} s",
                timeout.as_secs_f64()
            )));
        }
        thread::sleep(Duration::from_millis(5));
    };
    Ok(ToolOutput {
        status,
        stdout: out.join().unwrap_or_default(),
        stderr: err.join().unwrap_or_default(),
    })
}

fn substitute(template: &[String], reference: &Path, test: &Path) -> Vec<String> {
    template
        .iter()
        .map(|a| {
            a.replace("{ref}", &reference.to_string_lossy())
                .replace("{test}", &test.to_string_lossy())
        })
        .collect()
}

pub(crate) fn compile_pattern(pattern: &str) -> Result<Regex> {
    let re = Regex::new(pattern)
        .map_err(|e| Error::InvalidParameter(format!("bad pattern {pattern:?}: {e}")))?;
    if re.captures_len() != 2 {
        return Err(Error::InvalidParameter(format!(
            "pattern {pattern:?} must have exactly one capture group"
        )));
    }
    Ok(re)
}

pub(crate) fn extract_scalar(re: &Regex, stdout: &str) -> Result<f64> {
    let caps = re
        .captures(stdout)
        .ok_or_else(|| Error::Measure(format!("output does not match {:?}", re.as_str())))?;
    let text = caps.get(1).map_or("", |m| m.as_str()).trim();
    text.parse::<f64>()
        .map_err(|_| Error::Measure(format!("cannot parse {text:?} as a number")))
}

/// Writes both signals to a private temporary directory, runs the tool and
/// returns its stdout. Nonzero exit status is an error.
pub(crate) fn invoke_on_signals(
    executable: &str,
    args: &[String],
    timeout_secs: f64,
    limit: &ConcurrencyLimit,
    reference: &AudioSignal,
    test: &AudioSignal,
) -> Result<String> {
    if !(timeout_secs > 0.0) {
        return Err(Error::InvalidParameter("timeout must be positive".into()));
    }
    let dir = tempfile::Builder::new().prefix("aqm-").tempdir()?;
    let ref_path = dir.path().join("ref.wav");
    let test_path = dir.path().join("test.wav");
    save_wav(reference, &ref_path)?;
    save_wav(test, &test_path)?;
    let args = substitute(args, &ref_path, &test_path);
    let output = {
        let _permit = limit.acquire();
        run_tool(executable, &args, Duration::from_secs_f64(timeout_secs))?
    };
    if !output.status.success() {
        return Err(Error::Measure(format!(
            "{executable} exited with {}: {}",
            output.status,
            output.stderr.trim()
        )));
    }
    Ok(output.stdout)
}

/// A measure computed by an external program.
pub struct ExternalAdapter {
    desc: MeasureDescriptor,
    config: AdapterConfig,
    pattern: Regex,
    limit: Arc<ConcurrencyLimit>,
}

impl ExternalAdapter {
    /// Subprocesses are limited to the number of CPUs.
    pub fn new(config: AdapterConfig) -> Result<Self> {
        Self::with_limit(config, ConcurrencyLimit::default_limit())
    }

    pub fn with_limit(config: AdapterConfig, max_concurrent: usize) -> Result<Self> {
        let pattern = compile_pattern(&config.pattern)?;
        let scale = match (config.scale_min, config.scale_max) {
            (None, None) => Scale::unbounded(config.higher_is_better),
            (lo, hi) => Scale::new(
                lo.unwrap_or(f64::NEG_INFINITY),
                hi.unwrap_or(f64::INFINITY),
                config.higher_is_better,
            )?,
        };
        Ok(Self {
            desc: MeasureDescriptor {
                name: config.name.clone(),
                scale,
                required_rate: config.required_rate.map_or(RequiredRate::Native, RequiredRate::Hz),
                needs_sources: false,
                channel_policy: ChannelPolicy::Native,
            },
            config,
            pattern,
            limit: ConcurrencyLimit::new(max_concurrent),
        })
    }

    /// Loads both files and evaluates the tool on them.
    pub fn run_files(&self, reference_path: &Path, test_path: &Path) -> MeasureResult {
        let load = || -> Result<(AudioSignal, AudioSignal)> {
            Ok((load_wav(reference_path)?, load_wav(test_path)?))
        };
        match load() {
            Ok((r, t)) => evaluate(self, &r, &t, &ItemContext::default()),
            Err(e) => MeasureResult::invalid(&self.desc.name, e.to_string()),
        }
    }
}

impl Measure for ExternalAdapter {
    fn descriptor(&self) -> &MeasureDescriptor {
        &self.desc
    }

    fn compute(&self, reference: &AudioSignal, test: &AudioSignal, _: &ItemContext<'_>) -> Result<f64> {
        let stdout = invoke_on_signals(
            &self.config.executable,
            &self.config.args,
            self.config.timeout_secs,
            &self.limit,
            reference,
            test,
        )?;
        extract_scalar(&self.pattern, &stdout)
    }
}

/// External PEAQ-style tool printing the two MOVs used by the 2f-model.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MovToolConfig {
    pub executable: String,
    pub args: Vec<String>,
    pub adb_pattern: String,
    pub avg_mod_diff_1_pattern: String,
    pub timeout_secs: f64,
    #[serde(default)]
    pub required_rate: Option<u32>,
}
