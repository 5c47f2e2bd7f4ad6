//! Output plumbing: atomic file writes, fixed-width float formatting,
//! CSV and JSON emitters, the run manifest, and exit-code classification.

use std::io::Write as _;
use std::path::Path;

use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use kgsim_core::Error as CoreError;

/// Formats a float with 17 significant digits, enough to reproduce the
/// exact f64 bit pattern on re-parse.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes bytes to `path` atomically: a temp file in the same directory,
/// flushed, then renamed over the target.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir)?;
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    let tmp = dir.join(format!("{name}.tmp-{}", std::process::id()));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.flush()?;
    }
    std::fs::rename(&tmp, path)
}

/// CSV accumulator: header row first, comma separated, '.' decimal
/// separator, LF line endings.
pub struct Csv {
    buf: String,
    columns: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Csv {
        Csv {
            buf: format!("{}\n", header.join(",")),
            columns: header.len(),
        }
    }

    /// Appends one row; cells are already formatted (empty string for a
    /// missing value).
    pub fn row(&mut self, cells: &[String]) {
        assert_eq!(cells.len(), self.columns, "csv row width mismatch");
        self.buf.push_str(&cells.join(","));
        self.buf.push('\n');
    }

    pub fn bytes(&self) -> &[u8] {
        self.buf.as_bytes()
    }
}

/// Pretty-prints a JSON value with every number rendered through
/// [`fmt17`]; serde_json's shortest-roundtrip output would drop digits.
pub fn render_json(value: &Value) -> String {
    let mut out = String::new();
    render_into(value, 0, &mut out);
    out.push('\n');
    out
}

fn render_into(value: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(num) => {
            if let Some(i) = num.as_i64() {
                out.push_str(&i.to_string());
            } else if let Some(u) = num.as_u64() {
                out.push_str(&u.to_string());
            } else {
                out.push_str(&fmt17(num.as_f64().unwrap_or(f64::NAN)));
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                out.push_str(&pad);
                out.push_str("  ");
                render_into(item, indent + 1, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (i, (key, item)) in map.iter().enumerate() {
                out.push_str(&pad);
                out.push_str("  ");
                out.push_str(&Value::String(key.clone()).to_string());
                out.push_str(": ");
                render_into(item, indent + 1, out);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad);
            out.push('}');
        }
    }
}

/// Content hash of the run's defining parameters: sha256 over their JSON
/// rendering, prefixed with the algorithm name. The output directory and
/// plotting switches do not change what is computed, so they stay out of
/// the hash; identical physics hashes identically wherever it lands.
pub fn config_hash(config: &RunConfig) -> String {
    let json = serde_json::json!({
        "command": config.command,
        "p": config.p,
        "omega": config.omega.request(),
        "a": config.a,
        "L": config.length,
        "n": config.n,
        "dt": config.dt,
        "t_end": config.t_end,
        "R": config.r,
        "record_every": config.record_every,
        "k": config.k,
        "dense_cap": config.dense_cap,
    });
    let text = render_json(&json);
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    format!("sha256:{:x}", hasher.finalize())
}

pub fn unix_ms() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

/// Key scalars every run manifest carries; optional entries stay null
/// when the command does not compute them.
#[derive(Clone, Debug, Default)]
pub struct ManifestScalars {
    pub omega_c: Option<f64>,
    pub phi_l2sq: Option<f64>,
    pub energy: Option<f64>,
    pub charge: Option<f64>,
    pub momentum: Option<f64>,
    pub coercivity_margin: Option<f64>,
    pub t_star: Option<f64>,
    pub min_slope: Option<f64>,
}

/// Run manifest: the configuration echo, code version, wall-clock
/// bracket, final status, and the key scalar block.
pub struct Manifest {
    pub config: RunConfig,
    pub started_unix_ms: u64,
    pub finished_unix_ms: u64,
    pub status: String,
    pub scalars: ManifestScalars,
}

fn opt(value: Option<f64>) -> Value {
    match value {
        Some(x) => serde_json::json!(x),
        None => Value::Null,
    }
}

impl Manifest {
    pub fn render(&self) -> String {
        let value = serde_json::json!({
            "config": serde_json::to_value(&self.config).expect("config serializes"),
            "config_hash": config_hash(&self.config),
            "code_version": env!("CARGO_PKG_VERSION"),
            "started_unix_ms": self.started_unix_ms,
            "finished_unix_ms": self.finished_unix_ms,
            "status": self.status,
            "scalars": {
                "omega_c": opt(self.scalars.omega_c),
                "phi_l2sq": opt(self.scalars.phi_l2sq),
                "energy": opt(self.scalars.energy),
                "charge": opt(self.scalars.charge),
                "momentum": opt(self.scalars.momentum),
                "coercivity_margin": opt(self.scalars.coercivity_margin),
                "t_star": opt(self.scalars.t_star),
                "min_slope": opt(self.scalars.min_slope),
            },
        });
        render_json(&value)
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        write_atomic(&dir.join("manifest.json"), self.render().as_bytes())
    }
}

/// Command failure with its process exit code.
#[derive(Debug)]
pub enum CmdError {
    /// Bad input: exit 2, no output files written.
    Validation(String),
    /// Runtime failure: exit 4.
    Internal(String),
}

impl CmdError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CmdError::Validation(_) => 2,
            CmdError::Internal(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CmdError::Validation(m) | CmdError::Internal(m) => m,
        }
    }
}

impl From<CoreError> for CmdError {
    fn from(err: CoreError) -> CmdError {
        match err {
            CoreError::InvalidParameter(_)
            | CoreError::GridConfig(_)
            | CoreError::ProfileAccuracy(_)
            | CoreError::DenseCap(_) => CmdError::Validation(err.to_string()),
            CoreError::Eigensolver(_) | CoreError::Mismatch(_) | CoreError::FitFailure(_) => {
                CmdError::Internal(err.to_string())
            }
        }
    }
}

impl From<std::io::Error> for CmdError {
    fn from(err: std::io::Error) -> CmdError {
        CmdError::Internal(format!("io: {err}"))
    }
}
