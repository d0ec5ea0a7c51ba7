//! On-disk artifact formats: state snapshots (CSV of index, re, im),
//! autocorrelation series (CSV of t_fs, re, im), JSON sidecars carrying the
//! metadata the next stage needs, and the run manifest with content hashes.
//!
//! Every float is written with enough digits to round-trip exactly, so a
//! fixed config and seed produce byte-identical artifacts.

use anyhow::{anyhow, bail, Context, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use splitop::grid::{make_grid, GridSpec, Space, Wavefunction};
use splitop::propagator::{AutocorrelationSeries, Splitting};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: u32 = 1;

/// Sidecar written next to a state snapshot (`<snapshot>.json`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateSidecar {
    pub schema_version: u32,
    /// "state" for prepared reference states, "dipole-state" after the
    /// dipole stage.
    pub kind: String,
    pub field_name: String,
    pub qubits_per_mode: usize,
    pub n_modes: usize,
    pub length: f64,
    pub initial_state: String,
    /// Ground-state reference energy used to unwind spectra downstream.
    pub e0_cm: f64,
    pub iterations: usize,
    pub converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axis: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation_order: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dipole_mode: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_norm_sq: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub success_probability: Option<f64>,
}

impl StateSidecar {
    pub fn grid(&self) -> Result<GridSpec> {
        make_grid(self.qubits_per_mode, self.n_modes, self.length)
            .map_err(|e| anyhow!("sidecar grid is invalid: {e}"))
    }
}

/// Sidecar written next to an autocorrelation CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AutocorrSidecar {
    pub schema_version: u32,
    pub kind: String,
    pub axis: String,
    pub e0_cm: f64,
    pub mu_norm_sq: f64,
    pub total_time_fs: f64,
    pub n_steps: usize,
    pub record_stride: usize,
    pub dt_fs: f64,
    pub splitting: String,
    pub shots: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub field_name: String,
    pub qubits_per_mode: usize,
    pub n_modes: usize,
    pub length: f64,
}

/// The JSON sidecar lives next to its artifact with `.json` appended.
pub fn sidecar_path(artifact: &Path) -> PathBuf {
    let mut name = artifact.as_os_str().to_os_string();
    name.push(".json");
    PathBuf::from(name)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).context("serializing JSON")?;
    std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Write a wavefunction as `index,re,im` rows.
pub fn write_state(path: &Path, psi: &Wavefunction) -> Result<()> {
    let mut out = String::with_capacity(psi.amps.len() * 48 + 16);
    out.push_str("index,re,im\n");
    for (i, a) in psi.amps.iter().enumerate() {
        out.push_str(&format!("{i},{:.17e},{:.17e}\n", a.re, a.im));
    }
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

/// Read a snapshot back onto the sidecar's grid.
pub fn read_state(path: &Path, sidecar: &StateSidecar) -> Result<Wavefunction> {
    let g = sidecar.grid()?;
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let mut amps = vec![Complex64::new(0.0, 0.0); g.total_points()];
    let mut seen = 0usize;
    for (ln, line) in text.lines().enumerate() {
        if ln == 0 {
            if line.trim() != "index,re,im" {
                bail!("{}: line 1: expected header 'index,re,im'", path.display());
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let err = || anyhow!("{}: line {}: expected index,re,im", path.display(), ln + 1);
        let idx: usize = parts.next().ok_or_else(err)?.trim().parse().map_err(|_| err())?;
        let re: f64 = parts.next().ok_or_else(err)?.trim().parse().map_err(|_| err())?;
        let im: f64 = parts.next().ok_or_else(err)?.trim().parse().map_err(|_| err())?;
        if idx >= amps.len() {
            bail!(
                "{}: line {}: index {} outside the {}-point grid",
                path.display(),
                ln + 1,
                idx,
                amps.len()
            );
        }
        amps[idx] = Complex64::new(re, im);
        seen += 1;
    }
    if seen != amps.len() {
        bail!(
            "{}: expected {} amplitude rows, found {}",
            path.display(),
            amps.len(),
            seen
        );
    }
    Ok(Wavefunction { grid: g, amps, space: Space::Position })
}

/// Write an autocorrelation series as `t_fs,re,im` rows (the normalized
/// overlap; the sidecar carries the mu-norm weight).
pub fn write_autocorr(path: &Path, times_fs: &[f64], values: &[Complex64]) -> Result<()> {
    let mut out = String::with_capacity(values.len() * 64 + 16);
    out.push_str("t_fs,re,im\n");
    for (t, v) in times_fs.iter().zip(values) {
        out.push_str(&format!("{:.17e},{:.17e},{:.17e}\n", t, v.re, v.im));
    }
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

/// Read an autocorrelation CSV plus sidecar back into the series type the
/// spectrum stage consumes (the stored final state is not kept on disk and
/// comes back empty).
pub fn read_autocorr(path: &Path) -> Result<(AutocorrelationSeries, AutocorrSidecar)> {
    let sidecar: AutocorrSidecar = read_json(&sidecar_path(path))?;
    if sidecar.schema_version != SCHEMA_VERSION {
        bail!(
            "{}: schema version {} (this build reads {})",
            sidecar_path(path).display(),
            sidecar.schema_version,
            SCHEMA_VERSION
        );
    }
    let g = make_grid(sidecar.qubits_per_mode, sidecar.n_modes, sidecar.length)
        .map_err(|e| anyhow!("sidecar grid is invalid: {e}"))?;
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        if ln == 0 {
            if line.trim() != "t_fs,re,im" {
                bail!("{}: line 1: expected header 't_fs,re,im'", path.display());
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let err = || anyhow!("{}: line {}: expected t_fs,re,im", path.display(), ln + 1);
        let t: f64 = parts.next().ok_or_else(err)?.trim().parse().map_err(|_| err())?;
        let re: f64 = parts.next().ok_or_else(err)?.trim().parse().map_err(|_| err())?;
        let im: f64 = parts.next().ok_or_else(err)?.trim().parse().map_err(|_| err())?;
        times.push(t);
        values.push(Complex64::new(re, im));
    }
    if times.len() < 2 {
        bail!("{}: need at least two samples", path.display());
    }
    let splitting = Splitting::parse(&sidecar.splitting)
        .map_err(|e| anyhow!("sidecar splitting: {e}"))?;
    let series = AutocorrelationSeries {
        dt_fs: sidecar.dt_fs,
        record_stride: sidecar.record_stride,
        times_fs: times,
        values,
        splitting,
        final_state: Wavefunction::zero(g, Space::Position),
    };
    Ok((series, sidecar))
}

/// One hashed output in the manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArtifactEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Reproducibility record written at the end of a pipeline or scan run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub command: String,
    pub tool_version: String,
    pub config: BTreeMap<String, String>,
    pub config_sha256: String,
    pub artifacts: Vec<ArtifactEntry>,
    pub timings_ms: BTreeMap<String, u64>,
}

pub fn sha256_bytes(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes =
        std::fs::read(path).with_context(|| format!("hashing {}", path.display()))?;
    Ok(sha256_bytes(&bytes))
}

/// Hash and record every artifact path (relative to the run directory).
pub fn collect_artifacts(dir: &Path, names: &[&Path]) -> Result<Vec<ArtifactEntry>> {
    let mut entries = Vec::new();
    for name in names {
        let full = dir.join(name);
        let meta = std::fs::metadata(&full)
            .with_context(|| format!("stat {}", full.display()))?;
        entries.push(ArtifactEntry {
            path: name.display().to_string(),
            sha256: sha256_file(&full)?,
            bytes: meta.len(),
        });
    }
    Ok(entries)
}
