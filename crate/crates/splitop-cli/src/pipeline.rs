//! In-process pipeline: reference state, dipole operation, propagation,
//! spectrum, band reports. The file-writing commands and the scan loop all
//! run through this module, and a cache lets parameter scans reuse the
//! expensive stages (ITE relaxation, propagations) across points.

use crate::config::{DipoleMode, InitialState, RunConfig};
use crate::io::{
    collect_artifacts, sidecar_path, write_autocorr, write_json, write_state, ArtifactEntry,
    AutocorrSidecar, Manifest, StateSidecar, SCHEMA_VERSION,
};
use anyhow::{anyhow, bail, Context, Result};
use num_complex::Complex64;
use serde::Serialize;
use splitop::dipole::{apply_dipole, apply_dipole_direct, choose_beta, ThetaMode};
use splitop::forcefield::{parse_forcefield, Axis, ForceField};
use splitop::grid::{make_grid, GridSpec, Wavefunction};
use splitop::hamiltonian::expectation_energy;
use splitop::measurement::sample_series;
use splitop::propagator::{propagate, AutocorrelationSeries, PropagationConfig};
use splitop::spectrum::{compute_spectrum, BandReport, Spectrum, SpectrumConfig};
use splitop::state_prep::{harmonic_ground_state, imaginary_time_evolve, IteOptions, IteResult};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub fn load_field(path: &Path) -> Result<ForceField> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading force field {}", path.display()))?;
    let mut ff = parse_forcefield(&text).map_err(|e| anyhow!("parsing {}: {e}", path.display()))?;
    if ff.name.is_empty() {
        ff.name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "field".into());
    }
    Ok(ff)
}

/// Offset mixed into the sampling seed so each axis draws an independent,
/// axis-stable stream.
fn axis_seed(seed: u64, axis: Axis) -> u64 {
    let offset = match axis {
        Axis::X => 0,
        Axis::Y => 1,
        Axis::Z => 2,
    };
    seed.wrapping_add(offset)
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct StateKey {
    field: String,
    qubits_per_mode: usize,
    length_bits: u64,
    dtau_bits: u64,
    tol_bits: u64,
}

impl StateKey {
    fn of(cfg: &RunConfig) -> StateKey {
        StateKey {
            field: cfg.field.display().to_string(),
            qubits_per_mode: cfg.qubits_per_mode,
            length_bits: cfg.length.to_bits(),
            dtau_bits: cfg.dtau_fs.to_bits(),
            tol_bits: cfg.ite_tol_cm.to_bits(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct SeriesKey {
    axis: char,
    order: usize,
    mode: &'static str,
    state: &'static str,
    splitting: &'static str,
    margin_bits: u64,
    time_bits: u64,
    n_steps: usize,
    record_stride: usize,
    shots: u64,
    seed: u64,
}

/// Memo for repeated in-process runs over the same field and grid. Keyed
/// stages are invalidated whenever the field, grid, or ITE controls change.
#[derive(Default)]
pub struct PipelineCache {
    key: Option<StateKey>,
    ite: Option<IteResult>,
    series: BTreeMap<SeriesKey, (AutocorrelationSeries, f64)>,
}

impl PipelineCache {
    fn sync(&mut self, cfg: &RunConfig) {
        let key = StateKey::of(cfg);
        if self.key.as_ref() != Some(&key) {
            self.key = Some(key);
            self.ite = None;
            self.series.clear();
        }
    }
}

/// Everything one axis contributes downstream.
pub struct AxisRun {
    pub axis: Axis,
    pub mu_norm_sq: f64,
    pub beta: Option<f64>,
    pub success_probability: Option<f64>,
    /// Normalized overlap series actually used downstream (shot-sampled
    /// when shots > 0).
    pub series: AutocorrelationSeries,
}

pub struct PipelineResult {
    pub field_name: String,
    pub grid: GridSpec,
    /// Reference energy all spectra are unwound against: the ITE ground
    /// energy, regardless of which state seeds the dipole operation.
    pub e0_ref_cm: f64,
    pub ite_iterations: usize,
    pub ite_converged: bool,
    pub initial_state_energy_cm: f64,
    pub initial: Wavefunction,
    pub axis_runs: Vec<AxisRun>,
    pub spectrum_total: Spectrum,
    pub spectra_per_axis: Vec<Spectrum>,
    pub bands: Vec<BandReport>,
    pub timings_ms: BTreeMap<String, u64>,
}

fn ensure_ite(cfg: &RunConfig, ff: &ForceField, g: GridSpec, cache: &mut PipelineCache) -> Result<IteResult> {
    if let Some(ite) = &cache.ite {
        return Ok(ite.clone());
    }
    let opts = IteOptions {
        dtau_fs: cfg.dtau_fs,
        tol_cm: cfg.ite_tol_cm,
        ..IteOptions::default()
    };
    let ite = imaginary_time_evolve(ff, g, opts).map_err(|e| anyhow!("ground-state relaxation: {e}"))?;
    cache.ite = Some(ite.clone());
    Ok(ite)
}

/// Dipole-operate `initial` along one axis per the configured mode.
/// Returns (state, mu_norm_sq, beta, success_probability).
fn dipole_stage(
    cfg: &RunConfig,
    ff: &ForceField,
    g: GridSpec,
    initial: &Wavefunction,
    axis: Axis,
) -> Result<(Wavefunction, f64, Option<f64>, Option<f64>)> {
    match cfg.dipole_mode {
        DipoleMode::Exact => {
            let (state, mu_norm_sq) = apply_dipole_direct(initial, ff, axis, cfg.dipole_order)
                .map_err(|e| anyhow!("dipole ({axis}): {e}"))?;
            Ok((state, mu_norm_sq, None, None))
        }
        DipoleMode::Circuit => {
            let beta = choose_beta(ff, g, axis, cfg.dipole_order, cfg.beta_margin)
                .map_err(|e| anyhow!("dipole scale ({axis}): {e}"))?;
            let app = apply_dipole(initial, ff, axis, cfg.dipole_order, beta, ThetaMode::Taylor)
                .map_err(|e| anyhow!("dipole circuit ({axis}): {e}"))?;
            Ok((
                app.branch,
                app.mu_norm_sq,
                Some(beta),
                Some(app.success_probability),
            ))
        }
    }
}

/// Run the full pipeline in memory. Propagations and the ITE relaxation
/// are reused from `cache` when the parameters match.
pub fn run_pipeline_in_memory(cfg: &RunConfig, cache: &mut PipelineCache) -> Result<PipelineResult> {
    cache.sync(cfg);
    let ff = load_field(&cfg.field)?;
    let g = make_grid(cfg.qubits_per_mode, ff.n_modes, cfg.length)
        .map_err(|e| anyhow!("grid construction: {e}"))?;
    let mut timings = BTreeMap::new();

    let t0 = Instant::now();
    let ite = ensure_ite(cfg, &ff, g, cache)?;
    timings.insert("prepare".into(), t0.elapsed().as_millis() as u64);
    let e0_ref_cm = ite.e0_cm;

    let (initial, initial_energy) = match cfg.initial_state {
        InitialState::Ite => (ite.psi.clone(), ite.e0_cm),
        InitialState::Harmonic => {
            let psi = harmonic_ground_state(g);
            let e = expectation_energy(&psi, &ff).map_err(|e| anyhow!("harmonic energy: {e}"))?;
            (psi, e)
        }
    };

    let state_label: &'static str = match cfg.initial_state {
        InitialState::Ite => "ite",
        InitialState::Harmonic => "gauss",
    };

    let mut axis_runs = Vec::new();
    for &axis in &cfg.axes {
        let key = SeriesKey {
            axis: axis.as_str().chars().next().unwrap(),
            order: cfg.dipole_order,
            mode: cfg.dipole_mode.as_str(),
            state: state_label,
            splitting: cfg.splitting.as_str(),
            margin_bits: cfg.beta_margin.to_bits(),
            time_bits: cfg.total_time_fs.to_bits(),
            n_steps: cfg.n_steps,
            record_stride: cfg.record_stride,
            shots: cfg.shots,
            seed: cfg.seed,
        };

        let t_axis = Instant::now();
        let (state, mu_norm_sq, beta, success_probability) =
            dipole_stage(cfg, &ff, g, &initial, axis)?;

        let series = if let Some((cached, cached_norm)) = cache.series.get(&key) {
            debug_assert!((cached_norm - mu_norm_sq).abs() <= 1e-12 * mu_norm_sq.abs());
            cached.clone()
        } else {
            let pcfg = PropagationConfig {
                total_time_fs: cfg.total_time_fs,
                n_steps: cfg.n_steps,
                splitting: cfg.splitting,
                record_stride: cfg.record_stride,
            };
            let mut series = propagate(&state, &state, &ff, &pcfg)
                .map_err(|e| anyhow!("propagation ({axis}): {e}"))?;
            if cfg.shots > 0 {
                series.values = sample_series(
                    &series.values,
                    1.0,
                    cfg.shots,
                    axis_seed(cfg.seed, axis),
                )
                .map_err(|e| anyhow!("shot sampling ({axis}): {e}"))?;
            }
            cache.series.insert(key, (series.clone(), mu_norm_sq));
            series
        };
        timings.insert(
            format!("axis_{axis}"),
            t_axis.elapsed().as_millis() as u64,
        );

        axis_runs.push(AxisRun {
            axis,
            mu_norm_sq,
            beta,
            success_probability,
            series,
        });
    }

    let t_spec = Instant::now();
    let scfg = SpectrumConfig {
        pad_factor: cfg.pad_factor,
        energy_max_cm: cfg.energy_max_cm,
        window_threshold: cfg.window_threshold,
    };
    let contributions: Vec<(&AutocorrelationSeries, f64)> = axis_runs
        .iter()
        .map(|r| (&r.series, r.mu_norm_sq))
        .collect();
    let spectrum_total = compute_spectrum(&contributions, e0_ref_cm, &scfg)
        .map_err(|e| anyhow!("spectrum transform: {e}"))?;
    let mut spectra_per_axis = Vec::new();
    for r in &axis_runs {
        spectra_per_axis.push(
            compute_spectrum(&[(&r.series, r.mu_norm_sq)], e0_ref_cm, &scfg)
                .map_err(|e| anyhow!("spectrum transform ({}): {e}", r.axis))?,
        );
    }
    let bands = spectrum_total.bands(cfg.window_threshold);
    timings.insert("spectrum".into(), t_spec.elapsed().as_millis() as u64);

    Ok(PipelineResult {
        field_name: ff.name.clone(),
        grid: g,
        e0_ref_cm,
        ite_iterations: ite.iterations,
        ite_converged: ite.converged,
        initial_state_energy_cm: initial_energy,
        initial,
        axis_runs,
        spectrum_total,
        spectra_per_axis,
        bands,
        timings_ms: timings,
    })
}

/// Serializable mirror of a band report for the JSON artifact.
#[derive(Debug, Clone, Serialize)]
pub struct BandRow {
    pub e_lo_cm: f64,
    pub e_hi_cm: f64,
    pub centroid_cm: f64,
    pub ci95_cm: f64,
    pub intensity_km_mol: f64,
    pub peak_sigma: f64,
    pub n_points: usize,
}

impl From<&BandReport> for BandRow {
    fn from(b: &BandReport) -> BandRow {
        BandRow {
            e_lo_cm: b.e_lo_cm,
            e_hi_cm: b.e_hi_cm,
            centroid_cm: b.centroid_cm,
            ci95_cm: b.ci95_cm,
            intensity_km_mol: b.intensity_km_mol,
            peak_sigma: b.peak_sigma,
            n_points: b.n_points,
        }
    }
}

/// Write the spectrum CSV (energy, one sigma column per axis, total), the
/// band-report JSON, and the gnuplot-ready two-column file.
pub fn write_spectrum_files(
    prefix: &Path,
    axes: &[Axis],
    per_axis: &[&Spectrum],
    total: &Spectrum,
    bands: &[BandReport],
) -> Result<Vec<PathBuf>> {
    if axes.len() != per_axis.len() {
        bail!("one spectrum per axis required");
    }
    for s in per_axis {
        if s.energies_cm.len() != total.energies_cm.len() {
            bail!("axis spectra and total spectrum disagree on the energy grid");
        }
    }

    let csv_path = prefix.with_extension("csv");
    let mut out = String::new();
    out.push_str("e_cm");
    for a in axes {
        out.push_str(&format!(",sigma_{a}"));
    }
    out.push_str(",sigma_total\n");
    for i in 0..total.energies_cm.len() {
        out.push_str(&format!("{:.17e}", total.energies_cm[i]));
        for s in per_axis {
            out.push_str(&format!(",{:.17e}", s.sigma[i]));
        }
        out.push_str(&format!(",{:.17e}\n", total.sigma[i]));
    }
    std::fs::write(&csv_path, out)
        .with_context(|| format!("writing {}", csv_path.display()))?;

    let bands_path = PathBuf::from(format!("{}_bands.json", prefix.display()));
    let rows: Vec<BandRow> = bands.iter().map(BandRow::from).collect();
    write_json(&bands_path, &rows)?;

    let dat_path = prefix.with_extension("dat");
    let mut dat = String::from("# e_cm sigma_total\n");
    for (e, s) in total.energies_cm.iter().zip(&total.sigma) {
        dat.push_str(&format!("{:.17e} {:.17e}\n", e, s));
    }
    std::fs::write(&dat_path, dat)
        .with_context(|| format!("writing {}", dat_path.display()))?;

    Ok(vec![csv_path, bands_path, dat_path])
}

/// Run the pipeline and write every artifact plus the manifest under
/// `cfg.out_dir`.
pub fn run_pipeline_to_disk(
    cfg: &RunConfig,
    cache: &mut PipelineCache,
) -> Result<(Manifest, PipelineResult)> {
    let total_t = Instant::now();
    let result = run_pipeline_in_memory(cfg, cache)?;
    let dir = &cfg.out_dir;
    std::fs::create_dir_all(dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;

    let mut names: Vec<PathBuf> = Vec::new();

    // Reference state.
    let state_rel = PathBuf::from("state.csv");
    write_state(&dir.join(&state_rel), &result.initial)?;
    let state_sidecar = StateSidecar {
        schema_version: SCHEMA_VERSION,
        kind: "state".into(),
        field_name: result.field_name.clone(),
        qubits_per_mode: result.grid.n_qubits_per_mode(),
        n_modes: result.grid.n_modes(),
        length: result.grid.length(),
        initial_state: cfg.initial_state.as_str().into(),
        e0_cm: result.e0_ref_cm,
        iterations: result.ite_iterations,
        converged: result.ite_converged,
        axis: None,
        truncation_order: None,
        dipole_mode: None,
        beta: None,
        mu_norm_sq: None,
        success_probability: None,
    };
    write_json(&sidecar_path(&dir.join(&state_rel)), &state_sidecar)?;
    names.push(state_rel.clone());
    names.push(sidecar_path(&state_rel));

    // Autocorrelation series per axis.
    for run in &result.axis_runs {
        let rel = PathBuf::from(format!("autocorr_{}.csv", run.axis));
        write_autocorr(&dir.join(&rel), &run.series.times_fs, &run.series.values)?;
        let sidecar = AutocorrSidecar {
            schema_version: SCHEMA_VERSION,
            kind: "autocorrelation".into(),
            axis: run.axis.as_str().into(),
            e0_cm: result.e0_ref_cm,
            mu_norm_sq: run.mu_norm_sq,
            total_time_fs: cfg.total_time_fs,
            n_steps: cfg.n_steps,
            record_stride: cfg.record_stride,
            dt_fs: cfg.total_time_fs / cfg.n_steps as f64,
            splitting: cfg.splitting.as_str().into(),
            shots: cfg.shots,
            seed: (cfg.shots > 0).then(|| axis_seed(cfg.seed, run.axis)),
            field_name: result.field_name.clone(),
            qubits_per_mode: result.grid.n_qubits_per_mode(),
            n_modes: result.grid.n_modes(),
            length: result.grid.length(),
        };
        write_json(&sidecar_path(&dir.join(&rel)), &sidecar)?;
        names.push(rel.clone());
        names.push(sidecar_path(&rel));
    }

    // Spectrum artifacts.
    let per_axis: Vec<&Spectrum> = result.spectra_per_axis.iter().collect();
    let spec_files = write_spectrum_files(
        &dir.join("spectrum"),
        &cfg.axes,
        &per_axis,
        &result.spectrum_total,
        &result.bands,
    )?;
    for f in spec_files {
        names.push(PathBuf::from(f.file_name().unwrap()));
    }

    let name_refs: Vec<&Path> = names.iter().map(|p| p.as_path()).collect();
    let artifacts = collect_artifacts(dir, &name_refs)?;
    let mut timings = result.timings_ms.clone();
    timings.insert("total".into(), total_t.elapsed().as_millis() as u64);

    let echo = cfg.echo();
    let config_text: String = echo
        .iter()
        .map(|(k, v)| format!("{k} = {v}\n"))
        .collect();
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        command: "pipeline".into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        config: echo,
        config_sha256: crate::io::sha256_bytes(config_text.as_bytes()),
        artifacts,
        timings_ms: timings,
    };
    write_json(&dir.join("manifest.json"), &manifest)?;
    Ok((manifest, result))
}

/// One (time, step-count) scan point.
#[derive(Debug, Clone, Copy)]
pub struct ScanPoint {
    pub total_time_fs: f64,
    pub n_steps: usize,
}

/// Parse "3950:60000,7900:120000" into scan points.
pub fn parse_pairs(s: &str) -> Result<Vec<ScanPoint>> {
    let mut points = Vec::new();
    for part in s.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (t, n) = part
            .split_once(':')
            .ok_or_else(|| anyhow!("scan pair '{part}' must be T_fs:n_steps"))?;
        points.push(ScanPoint {
            total_time_fs: t
                .trim()
                .parse()
                .map_err(|e| anyhow!("scan pair '{part}': bad time: {e}"))?,
            n_steps: n
                .trim()
                .parse()
                .map_err(|e| anyhow!("scan pair '{part}': bad step count: {e}"))?,
        });
    }
    if points.is_empty() {
        bail!("scan pair list is empty");
    }
    Ok(points)
}

/// Parse scheme labels ("mu3_ite,mu1_gauss", or "all" for the four
/// order x state combinations).
pub fn parse_schemes(s: &str) -> Result<Vec<(usize, InitialState)>> {
    if s.trim() == "all" {
        return Ok(vec![
            (3, InitialState::Ite),
            (1, InitialState::Ite),
            (3, InitialState::Harmonic),
            (1, InitialState::Harmonic),
        ]);
    }
    let mut schemes = Vec::new();
    for part in s.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let rest = part
            .strip_prefix("mu")
            .ok_or_else(|| anyhow!("scheme '{part}' must look like mu3_ite"))?;
        let (order, state) = rest
            .split_once('_')
            .ok_or_else(|| anyhow!("scheme '{part}' must look like mu3_ite"))?;
        let order: usize = order
            .parse()
            .map_err(|e| anyhow!("scheme '{part}': bad order: {e}"))?;
        schemes.push((order, InitialState::parse(state)?));
    }
    if schemes.is_empty() {
        bail!("scheme list is empty");
    }
    Ok(schemes)
}

/// Run the pipeline over every (point, scheme) combination, write each
/// run's artifacts under its own subdirectory, and emit a long-format
/// comparison CSV (one row per band per run).
pub fn run_scan(
    base: &RunConfig,
    points: &[ScanPoint],
    schemes: &[(usize, InitialState)],
    cache: &mut PipelineCache,
) -> Result<Manifest> {
    let total_t = Instant::now();
    let dir = &base.out_dir;
    std::fs::create_dir_all(dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;

    let mut csv = String::from(
        "t_fs,n_steps,dt_fs,scheme,e_lo_cm,e_hi_cm,centroid_cm,ci95_cm,intensity_km_mol,peak_sigma,n_points\n",
    );
    let mut names: Vec<PathBuf> = Vec::new();
    let mut timings = BTreeMap::new();

    for point in points {
        for &(order, state) in schemes {
            let mut cfg = base.clone();
            cfg.total_time_fs = point.total_time_fs;
            cfg.n_steps = point.n_steps;
            cfg.dipole_order = order;
            cfg.initial_state = state;
            let label = cfg.scheme_label();
            let sub = format!("T{}_nt{}_{}", point.total_time_fs, point.n_steps, label);
            cfg.out_dir = dir.join(&sub);

            let t_point = Instant::now();
            let (_, result) = run_pipeline_to_disk(&cfg, cache)
                .with_context(|| format!("scan point {sub}"))?;
            timings.insert(sub.clone(), t_point.elapsed().as_millis() as u64);

            let dt = point.total_time_fs / point.n_steps as f64;
            for b in &result.bands {
                csv.push_str(&format!(
                    "{},{},{:.17e},{label},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{}\n",
                    point.total_time_fs,
                    point.n_steps,
                    dt,
                    b.e_lo_cm,
                    b.e_hi_cm,
                    b.centroid_cm,
                    b.ci95_cm,
                    b.intensity_km_mol,
                    b.peak_sigma,
                    b.n_points
                ));
            }
            names.push(PathBuf::from(format!("{sub}/manifest.json")));
        }
    }

    let scan_rel = PathBuf::from("scan.csv");
    std::fs::write(dir.join(&scan_rel), csv)
        .with_context(|| format!("writing {}", dir.join(&scan_rel).display()))?;
    names.push(scan_rel);

    let name_refs: Vec<&Path> = names.iter().map(|p| p.as_path()).collect();
    let artifacts: Vec<ArtifactEntry> = collect_artifacts(dir, &name_refs)?;
    timings.insert("total".into(), total_t.elapsed().as_millis() as u64);

    let echo = base.echo();
    let config_text: String = echo
        .iter()
        .map(|(k, v)| format!("{k} = {v}\n"))
        .collect();
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        command: "scan".into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        config: echo,
        config_sha256: crate::io::sha256_bytes(config_text.as_bytes()),
        artifacts,
        timings_ms: timings,
    };
    write_json(&dir.join("manifest.json"), &manifest)?;
    Ok(manifest)
}

/// Helper shared by commands that need a single complex value restated.
pub fn complex_csv(v: Complex64) -> String {
    format!("{:.17e},{:.17e}", v.re, v.im)
}
