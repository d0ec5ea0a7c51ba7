//! Run configuration: a plain-text key = value file mirroring the command
//! flags, with explicit flags taking precedence over file entries and file
//! entries over built-in defaults.

use anyhow::{anyhow, bail, Context, Result};
use splitop::dipole::ThetaMode;
use splitop::forcefield::Axis;
use splitop::propagator::Splitting;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// How the dipole-operated state is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DipoleMode {
    /// Multiply by the dipole diagonal and renormalize.
    Exact,
    /// Emulate the ancilla block-encoding circuit and post-select.
    Circuit,
}

impl DipoleMode {
    pub fn as_str(self) -> &'static str {
        match self {
            DipoleMode::Exact => "exact",
            DipoleMode::Circuit => "circuit",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(DipoleMode::Exact),
            "circuit" => Ok(DipoleMode::Circuit),
            other => bail!("unknown dipole mode '{other}' (expected exact or circuit)"),
        }
    }
}

/// Which reference state seeds the dipole operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialState {
    Harmonic,
    Ite,
}

impl InitialState {
    pub fn as_str(self) -> &'static str {
        match self {
            InitialState::Harmonic => "harmonic",
            InitialState::Ite => "ite",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "harmonic" | "gauss" => Ok(InitialState::Harmonic),
            "ite" => Ok(InitialState::Ite),
            other => bail!("unknown initial state '{other}' (expected harmonic or ite)"),
        }
    }
}

/// Fully resolved run parameters shared by the pipeline commands.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub field: PathBuf,
    pub qubits_per_mode: usize,
    pub length: f64,
    pub axes: Vec<Axis>,
    pub initial_state: InitialState,
    pub dtau_fs: f64,
    pub ite_tol_cm: f64,
    pub total_time_fs: f64,
    pub n_steps: usize,
    pub record_stride: usize,
    pub splitting: Splitting,
    pub dipole_order: usize,
    pub dipole_mode: DipoleMode,
    pub beta_margin: f64,
    pub shots: u64,
    pub seed: u64,
    pub pad_factor: usize,
    pub energy_max_cm: f64,
    pub window_threshold: f64,
    pub out_dir: PathBuf,
}

/// Flag values a command may carry; `None` defers to the config file and
/// the built-in default.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub field: Option<PathBuf>,
    pub qubits_per_mode: Option<usize>,
    pub length: Option<f64>,
    pub axes: Option<String>,
    pub initial_state: Option<String>,
    pub dtau_fs: Option<f64>,
    pub ite_tol_cm: Option<f64>,
    pub total_time_fs: Option<f64>,
    pub n_steps: Option<usize>,
    pub record_stride: Option<usize>,
    pub splitting: Option<String>,
    pub dipole_order: Option<usize>,
    pub dipole_mode: Option<String>,
    pub beta_margin: Option<f64>,
    pub shots: Option<u64>,
    pub seed: Option<u64>,
    pub pad_factor: Option<usize>,
    pub energy_max_cm: Option<f64>,
    pub window_threshold: Option<f64>,
    pub out_dir: Option<PathBuf>,
}

const KNOWN_KEYS: [&str; 20] = [
    "field",
    "qubits-per-mode",
    "length",
    "axes",
    "initial-state",
    "dtau-fs",
    "ite-tol-cm",
    "total-time-fs",
    "n-steps",
    "record-stride",
    "splitting",
    "dipole-order",
    "dipole-mode",
    "beta-margin",
    "shots",
    "seed",
    "pad-factor",
    "energy-max-cm",
    "window-threshold",
    "out-dir",
];

/// Parse `key = value` lines; `#` starts a comment, blank lines are
/// skipped, unknown keys are rejected with their line number.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("config line {}: expected key = value, got '{line}'", idx + 1))?;
        let key = key.trim();
        let value = value.trim();
        if !KNOWN_KEYS.contains(&key) {
            bail!("config line {}: unknown key '{key}'", idx + 1);
        }
        if map.insert(key.to_string(), value.to_string()).is_some() {
            bail!("config line {}: key '{key}' given twice", idx + 1);
        }
    }
    Ok(map)
}

fn lookup<T, F>(
    flag: Option<T>,
    map: &BTreeMap<String, String>,
    key: &str,
    parse: F,
) -> Result<Option<T>>
where
    F: FnOnce(&str) -> Result<T>,
{
    if flag.is_some() {
        return Ok(flag);
    }
    match map.get(key) {
        Some(v) => parse(v)
            .map(Some)
            .with_context(|| format!("config key '{key}'")),
        None => Ok(None),
    }
}

fn parse_num<T: std::str::FromStr>(s: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.parse::<T>().map_err(|e| anyhow!("invalid value '{s}': {e}"))
}

pub fn parse_axes(s: &str) -> Result<Vec<Axis>> {
    let mut axes = Vec::new();
    for part in s.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let axis =
            Axis::parse(part).ok_or_else(|| anyhow!("unknown axis '{part}' (expected x, y, or z)"))?;
        if axes.contains(&axis) {
            bail!("axis '{part}' listed twice");
        }
        axes.push(axis);
    }
    if axes.is_empty() {
        bail!("axis list is empty");
    }
    Ok(axes)
}

/// Merge flags over the optional config file over defaults. `field` is the
/// only parameter without a default.
pub fn resolve(config_path: Option<&Path>, ov: &Overrides) -> Result<RunConfig> {
    let map = match config_path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading config file {}", p.display()))?;
            parse_config_text(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => BTreeMap::new(),
    };

    let field = lookup(ov.field.clone(), &map, "field", |s| Ok(PathBuf::from(s)))?
        .ok_or_else(|| anyhow!("no force field given (flag --field or config key 'field')"))?;

    let cfg = RunConfig {
        field,
        qubits_per_mode: lookup(ov.qubits_per_mode, &map, "qubits-per-mode", parse_num)?
            .unwrap_or(4),
        length: lookup(ov.length, &map, "length", parse_num)?.unwrap_or(10.0),
        axes: match lookup(ov.axes.clone(), &map, "axes", |s| Ok(s.to_string()))? {
            Some(s) => parse_axes(&s)?,
            None => vec![Axis::X, Axis::Z],
        },
        initial_state: match lookup(ov.initial_state.clone(), &map, "initial-state", |s| {
            Ok(s.to_string())
        })? {
            Some(s) => InitialState::parse(&s)?,
            None => InitialState::Ite,
        },
        dtau_fs: lookup(ov.dtau_fs, &map, "dtau-fs", parse_num)?.unwrap_or(0.1),
        ite_tol_cm: lookup(ov.ite_tol_cm, &map, "ite-tol-cm", parse_num)?.unwrap_or(1e-8),
        total_time_fs: lookup(ov.total_time_fs, &map, "total-time-fs", parse_num)?
            .unwrap_or(3950.0),
        n_steps: lookup(ov.n_steps, &map, "n-steps", parse_num)?.unwrap_or(60_000),
        record_stride: lookup(ov.record_stride, &map, "record-stride", parse_num)?.unwrap_or(1),
        splitting: match lookup(ov.splitting.clone(), &map, "splitting", |s| Ok(s.to_string()))? {
            Some(s) => Splitting::parse(&s)?,
            None => Splitting::KineticHalf,
        },
        dipole_order: lookup(ov.dipole_order, &map, "dipole-order", parse_num)?.unwrap_or(3),
        dipole_mode: match lookup(ov.dipole_mode.clone(), &map, "dipole-mode", |s| {
            Ok(s.to_string())
        })? {
            Some(s) => DipoleMode::parse(&s)?,
            None => DipoleMode::Exact,
        },
        beta_margin: lookup(ov.beta_margin, &map, "beta-margin", parse_num)?.unwrap_or(20.0),
        shots: lookup(ov.shots, &map, "shots", parse_num)?.unwrap_or(0),
        seed: lookup(ov.seed, &map, "seed", parse_num)?.unwrap_or(1),
        pad_factor: lookup(ov.pad_factor, &map, "pad-factor", parse_num)?.unwrap_or(4),
        energy_max_cm: lookup(ov.energy_max_cm, &map, "energy-max-cm", parse_num)?
            .unwrap_or(12_000.0),
        window_threshold: lookup(ov.window_threshold, &map, "window-threshold", parse_num)?
            .unwrap_or(1e-3),
        out_dir: lookup(ov.out_dir.clone(), &map, "out-dir", |s| Ok(PathBuf::from(s)))?
            .unwrap_or_else(|| PathBuf::from("runs/out")),
    };

    if !(1..=3).contains(&cfg.dipole_order) {
        bail!("dipole order must be 1, 2, or 3, got {}", cfg.dipole_order);
    }
    if cfg.n_steps == 0 {
        bail!("n-steps must be positive");
    }
    if cfg.record_stride == 0 || cfg.n_steps % cfg.record_stride != 0 {
        bail!(
            "record-stride {} must be positive and divide n-steps {}",
            cfg.record_stride,
            cfg.n_steps
        );
    }
    Ok(cfg)
}

impl RunConfig {
    /// Resolved parameters as the key = value map echoed into manifests.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("field".into(), self.field.display().to_string());
        m.insert("qubits-per-mode".into(), self.qubits_per_mode.to_string());
        m.insert("length".into(), format!("{}", self.length));
        m.insert(
            "axes".into(),
            self.axes
                .iter()
                .map(|a| a.as_str())
                .collect::<Vec<_>>()
                .join(","),
        );
        m.insert("initial-state".into(), self.initial_state.as_str().into());
        m.insert("dtau-fs".into(), format!("{}", self.dtau_fs));
        m.insert("ite-tol-cm".into(), format!("{}", self.ite_tol_cm));
        m.insert("total-time-fs".into(), format!("{}", self.total_time_fs));
        m.insert("n-steps".into(), self.n_steps.to_string());
        m.insert("record-stride".into(), self.record_stride.to_string());
        m.insert("splitting".into(), self.splitting.as_str().into());
        m.insert("dipole-order".into(), self.dipole_order.to_string());
        m.insert("dipole-mode".into(), self.dipole_mode.as_str().into());
        m.insert("beta-margin".into(), format!("{}", self.beta_margin));
        m.insert("shots".into(), self.shots.to_string());
        m.insert("seed".into(), self.seed.to_string());
        m.insert("pad-factor".into(), self.pad_factor.to_string());
        m.insert("energy-max-cm".into(), format!("{}", self.energy_max_cm));
        m.insert(
            "window-threshold".into(),
            format!("{}", self.window_threshold),
        );
        m.insert("out-dir".into(), self.out_dir.display().to_string());
        m
    }

    /// Scheme label `mu<order>_<state>` used in scan tables; the harmonic
    /// reference state is labeled "gauss".
    pub fn scheme_label(&self) -> String {
        let state = match self.initial_state {
            InitialState::Harmonic => "gauss",
            InitialState::Ite => "ite",
        };
        format!("mu{}_{state}", self.dipole_order)
    }

    pub fn theta_mode(&self) -> ThetaMode {
        ThetaMode::Taylor
    }
}
