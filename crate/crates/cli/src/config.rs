//! Run configuration: defaults, key=value config files, flag overrides.
//!
//! Precedence per field: command-line flag, then config-file entry, then
//! (for the output root) the KGSIM_OUT_DIR environment variable, then the
//! built-in default. Every run is seed-free; the assembled configuration
//! is echoed verbatim into the run manifest.

use std::collections::HashMap;
use std::path::PathBuf;

use clap::Args;
use kgsim_core::ground_state::critical_frequency;

/// Requested frequency: a literal value or "critical", resolved against p.
#[derive(Clone, Debug, PartialEq)]
pub enum OmegaSpec {
    Critical,
    Value(f64),
}

impl OmegaSpec {
    pub fn parse(text: &str) -> Result<Self, String> {
        let text = text.trim();
        if text.eq_ignore_ascii_case("critical") {
            return Ok(OmegaSpec::Critical);
        }
        text.parse::<f64>()
            .map(OmegaSpec::Value)
            .map_err(|_| format!("omega must be a real number or \"critical\", got {text:?}"))
    }

    pub fn resolve(&self, p: f64) -> kgsim_core::Result<f64> {
        match self {
            OmegaSpec::Critical => critical_frequency(p),
            OmegaSpec::Value(x) => Ok(*x),
        }
    }

    /// The request as given, for the config echo and the content hash.
    pub fn request(&self) -> String {
        match self {
            OmegaSpec::Critical => "critical".into(),
            OmegaSpec::Value(x) => crate::output::fmt17(*x),
        }
    }
}

impl serde::Serialize for OmegaSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.request())
    }
}

/// Flags shared by every subcommand. Each is optional; unset fields fall
/// back to the config file and then to defaults.
#[derive(Args, Clone, Debug, Default)]
pub struct CommonArgs {
    /// key=value configuration file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Nonlinearity exponent, 1 < p < 5.
    #[arg(long)]
    pub p: Option<f64>,
    /// Frequency: a real in (−1, 1) or "critical".
    #[arg(long)]
    pub omega: Option<String>,
    /// Radial perturbation size; the initial datum is (1+a)Φ_ω.
    #[arg(long)]
    pub a: Option<f64>,
    /// Spatial period; the domain is [−L/2, L/2).
    #[arg(long = "L")]
    pub length: Option<f64>,
    /// Grid size; a power of two.
    #[arg(long)]
    pub n: Option<usize>,
    /// Time step.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Integration endpoint.
    #[arg(long = "t-end")]
    pub t_end: Option<f64>,
    /// Virial cutoff radius; the window support is [−2R, 2R].
    #[arg(long = "R")]
    pub r: Option<f64>,
    /// Samples are recorded every this many steps.
    #[arg(long = "record-every")]
    pub record_every: Option<usize>,
    /// Number of eigenpairs reported by spectrum runs.
    #[arg(long)]
    pub k: Option<usize>,
    /// Largest dense eigenproblem dimension accepted.
    #[arg(long = "dense-cap")]
    pub dense_cap: Option<usize>,
    /// Output directory; defaults to $KGSIM_OUT_DIR, then ./kgsim-out.
    #[arg(long = "out-dir", alias = "out")]
    pub out_dir: Option<PathBuf>,
    /// Also emit a gnuplot script next to the CSV output.
    #[arg(long)]
    pub gnuplot: bool,
}

/// Sweep-only flags: value lists forming the Cartesian run grid.
#[derive(Args, Clone, Debug, Default)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Exponents to sweep (comma separated).
    #[arg(long = "p-grid", value_delimiter = ',')]
    pub p_grid: Option<Vec<f64>>,
    /// Frequency ratios ω/ω_c(p) to sweep (comma separated).
    #[arg(long = "omega-ratio", value_delimiter = ',')]
    pub omega_ratio: Option<Vec<f64>>,
    /// Perturbation sizes to sweep (comma separated).
    #[arg(long = "a-grid", value_delimiter = ',')]
    pub a_grid: Option<Vec<f64>>,
    /// Parallel run bound; 0 picks the machine default.
    #[arg(long)]
    pub parallelism: Option<usize>,
}

/// One fully assembled, seed-free run configuration.
#[derive(Clone, Debug, serde::Serialize)]
pub struct RunConfig {
    pub command: String,
    pub p: f64,
    pub omega: OmegaSpec,
    pub a: f64,
    #[serde(rename = "L")]
    pub length: f64,
    pub n: usize,
    pub dt: f64,
    pub t_end: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub record_every: usize,
    pub k: usize,
    pub dense_cap: usize,
    pub out_dir: String,
    pub gnuplot: bool,
}

/// The sweep grid next to its base configuration.
#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub base: RunConfig,
    pub p_grid: Vec<f64>,
    pub omega_ratio: Vec<f64>,
    pub a_grid: Vec<f64>,
    pub parallelism: usize,
}

const KNOWN_KEYS: &[&str] = &[
    "p",
    "omega",
    "a",
    "L",
    "n",
    "dt",
    "t_end",
    "R",
    "record_every",
    "k",
    "dense_cap",
    "out_dir",
    "gnuplot",
    "p_grid",
    "omega_ratio",
    "a_grid",
    "parallelism",
];

/// Parses a key=value file: one entry per line, '#' starts a comment,
/// blank lines are skipped, unknown keys are rejected.
pub fn parse_config_file(path: &std::path::Path) -> Result<HashMap<String, String>, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config file {}: {e}", path.display()))?;
    let mut map = HashMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key=value, got {raw:?}", lineno + 1))?;
        let key = key.trim();
        if !KNOWN_KEYS.contains(&key) {
            return Err(format!("line {}: unknown key {key:?}", lineno + 1));
        }
        map.insert(key.to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn from_map<T: std::str::FromStr>(
    map: &HashMap<String, String>,
    key: &str,
) -> Result<Option<T>, String> {
    match map.get(key) {
        None => Ok(None),
        Some(text) => text
            .parse::<T>()
            .map(Some)
            .map_err(|_| format!("config key {key}: cannot parse {text:?}")),
    }
}

fn parse_list(text: &str) -> Result<Vec<f64>, String> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|item| {
            item.trim()
                .parse::<f64>()
                .map_err(|_| format!("cannot parse list entry {item:?}"))
        })
        .collect()
}

impl RunConfig {
    /// Merges flags over the config file over the defaults.
    pub fn assemble(command: &str, args: &CommonArgs) -> Result<RunConfig, String> {
        let map = match &args.config {
            Some(path) => parse_config_file(path)?,
            None => HashMap::new(),
        };
        Self::assemble_with(command, args, &map)
    }

    pub fn assemble_with(
        command: &str,
        args: &CommonArgs,
        map: &HashMap<String, String>,
    ) -> Result<RunConfig, String> {
        let omega = match (&args.omega, map.get("omega")) {
            (Some(text), _) => OmegaSpec::parse(text)?,
            (None, Some(text)) => OmegaSpec::parse(text)?,
            (None, None) => OmegaSpec::Critical,
        };
        let out_dir = args
            .out_dir
            .clone()
            .map(|p| p.display().to_string())
            .or_else(|| map.get("out_dir").cloned())
            .or_else(|| std::env::var("KGSIM_OUT_DIR").ok())
            .unwrap_or_else(|| "kgsim-out".into());
        Ok(RunConfig {
            command: command.to_string(),
            p: args.p.or(from_map(map, "p")?).unwrap_or(3.0),
            omega,
            a: args.a.or(from_map(map, "a")?).unwrap_or(0.01),
            length: args.length.or(from_map(map, "L")?).unwrap_or(100.0),
            n: args.n.or(from_map(map, "n")?).unwrap_or(1024),
            dt: args.dt.or(from_map(map, "dt")?).unwrap_or(5e-3),
            t_end: args.t_end.or(from_map(map, "t_end")?).unwrap_or(50.0),
            r: args.r.or(from_map(map, "R")?).unwrap_or(20.0),
            record_every: args
                .record_every
                .or(from_map(map, "record_every")?)
                .unwrap_or(10),
            k: args.k.or(from_map(map, "k")?).unwrap_or(6),
            dense_cap: args
                .dense_cap
                .or(from_map(map, "dense_cap")?)
                .unwrap_or(kgsim_core::linearized::DEFAULT_DENSE_CAP),
            out_dir,
            gnuplot: args.gnuplot || from_map(map, "gnuplot")?.unwrap_or(false),
        })
    }
}

impl SweepConfig {
    pub fn assemble(args: &SweepArgs) -> Result<SweepConfig, String> {
        let map = match &args.common.config {
            Some(path) => parse_config_file(path)?,
            None => HashMap::new(),
        };
        let base = RunConfig::assemble_with("sweep", &args.common, &map)?;
        let list_of = |flag: &Option<Vec<f64>>, key: &str, fallback: Vec<f64>| {
            match (flag, map.get(key)) {
                (Some(values), _) => Ok(values.clone()),
                (None, Some(text)) => parse_list(text),
                (None, None) => Ok(fallback),
            }
        };
        Ok(SweepConfig {
            p_grid: list_of(&args.p_grid, "p_grid", vec![base.p])?,
            omega_ratio: list_of(&args.omega_ratio, "omega_ratio", vec![1.0])?,
            a_grid: list_of(&args.a_grid, "a_grid", vec![base.a])?,
            parallelism: args
                .parallelism
                .or(from_map(&map, "parallelism")?)
                .unwrap_or(0),
            base,
        })
    }
}
