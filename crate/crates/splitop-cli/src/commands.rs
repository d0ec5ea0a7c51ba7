//! File-based stage commands. Each reads its inputs (snapshot + sidecar),
//! performs one pipeline stage, and writes the artifact the next stage
//! consumes; `pipeline` and `scan` chain the same stages in process.

use crate::config::{DipoleMode, InitialState, RunConfig};
use crate::io::{
    read_autocorr, read_json, read_state, sidecar_path, write_autocorr, write_json, write_state,
    AutocorrSidecar, StateSidecar, SCHEMA_VERSION,
};
use crate::pipeline::{load_field, write_spectrum_files};
use anyhow::{anyhow, bail, Context, Result};
use splitop::dipole::{apply_dipole, apply_dipole_direct, choose_beta, ThetaMode};
use splitop::forcefield::Axis;
use splitop::grid::make_grid;
use splitop::hamiltonian::expectation_energy;
use splitop::measurement::sample_series;
use splitop::propagator::{propagate, AutocorrelationSeries, PropagationConfig};
use splitop::spectrum::{compute_spectrum, Spectrum, SpectrumConfig};
use splitop::state_prep::{harmonic_ground_state, imaginary_time_evolve, IteOptions};
use splitop_oracle::{diagonalize, stick_spectrum, DEFAULT_STICK_FLOOR};
use std::path::{Path, PathBuf};

/// `prepare`: relax (or sample) the reference state and write it with a
/// sidecar carrying its energy. The standalone command reports the energy
/// of the state it wrote; the pipeline command always references spectra
/// to the relaxed ground energy.
pub fn cmd_prepare(cfg: &RunConfig, out: &Path) -> Result<()> {
    let ff = load_field(&cfg.field)?;
    let g = make_grid(cfg.qubits_per_mode, ff.n_modes, cfg.length)
        .map_err(|e| anyhow!("grid construction: {e}"))?;

    let (psi, e0_cm, iterations, converged) = match cfg.initial_state {
        InitialState::Ite => {
            let opts = IteOptions {
                dtau_fs: cfg.dtau_fs,
                tol_cm: cfg.ite_tol_cm,
                ..IteOptions::default()
            };
            let r = imaginary_time_evolve(&ff, g, opts)
                .map_err(|e| anyhow!("ground-state relaxation: {e}"))?;
            (r.psi, r.e0_cm, r.iterations, r.converged)
        }
        InitialState::Harmonic => {
            let psi = harmonic_ground_state(g);
            let e = expectation_energy(&psi, &ff)
                .map_err(|e| anyhow!("harmonic energy: {e}"))?;
            (psi, e, 0, true)
        }
    };

    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .with_context(|| format!("creating {}", parent.display()))?;
        }
    }
    write_state(out, &psi)?;
    let sidecar = StateSidecar {
        schema_version: SCHEMA_VERSION,
        kind: "state".into(),
        field_name: ff.name.clone(),
        qubits_per_mode: g.n_qubits_per_mode(),
        n_modes: g.n_modes(),
        length: g.length(),
        initial_state: cfg.initial_state.as_str().into(),
        e0_cm,
        iterations,
        converged,
        axis: None,
        truncation_order: None,
        dipole_mode: None,
        beta: None,
        mu_norm_sq: None,
        success_probability: None,
    };
    write_json(&sidecar_path(out), &sidecar)?;
    println!(
        "prepared {} state: E0 = {:.6} cm^-1, {} iterations, converged = {}",
        cfg.initial_state.as_str(),
        e0_cm,
        iterations,
        converged
    );
    println!("wrote {}", out.display());
    Ok(())
}

/// `dipole`: apply the dipole stage to a prepared state.
pub fn cmd_dipole(cfg: &RunConfig, state_path: &Path, axis: Axis, out: &Path) -> Result<()> {
    let sidecar: StateSidecar = read_json(&sidecar_path(state_path))?;
    if sidecar.schema_version != SCHEMA_VERSION {
        bail!(
            "{}: schema version {} (this build reads {})",
            sidecar_path(state_path).display(),
            sidecar.schema_version,
            SCHEMA_VERSION
        );
    }
    let psi = read_state(state_path, &sidecar)?;
    let ff = load_field(&cfg.field)?;
    if ff.name != sidecar.field_name {
        bail!(
            "state was prepared for field '{}' but '{}' was given",
            sidecar.field_name,
            ff.name
        );
    }
    let g = psi.grid;

    let (state, mu_norm_sq, beta, success_probability) = match cfg.dipole_mode {
        DipoleMode::Exact => {
            let (s, n2) = apply_dipole_direct(&psi, &ff, axis, cfg.dipole_order)
                .map_err(|e| anyhow!("dipole ({axis}): {e}"))?;
            (s, n2, None, None)
        }
        DipoleMode::Circuit => {
            let beta = choose_beta(&ff, g, axis, cfg.dipole_order, cfg.beta_margin)
                .map_err(|e| anyhow!("dipole scale ({axis}): {e}"))?;
            let app = apply_dipole(&psi, &ff, axis, cfg.dipole_order, beta, ThetaMode::Taylor)
                .map_err(|e| anyhow!("dipole circuit ({axis}): {e}"))?;
            (
                app.branch,
                app.mu_norm_sq,
                Some(beta),
                Some(app.success_probability),
            )
        }
    };

    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .with_context(|| format!("creating {}", parent.display()))?;
        }
    }
    write_state(out, &state)?;
    let out_sidecar = StateSidecar {
        kind: "dipole-state".into(),
        axis: Some(axis.as_str().into()),
        truncation_order: Some(cfg.dipole_order),
        dipole_mode: Some(cfg.dipole_mode.as_str().into()),
        beta,
        mu_norm_sq: Some(mu_norm_sq),
        success_probability,
        ..sidecar
    };
    write_json(&sidecar_path(out), &out_sidecar)?;
    println!(
        "dipole ({}, order {}, {}): |mu psi|^2 = {:.6e}",
        axis,
        cfg.dipole_order,
        cfg.dipole_mode.as_str(),
        mu_norm_sq
    );
    if let (Some(b), Some(p)) = (beta, success_probability) {
        println!("  beta = {b:.6e}, success probability = {p:.6e}");
    }
    println!("wrote {}", out.display());
    Ok(())
}

/// `propagate`: evolve a (dipole-operated) state and record the normalized
/// autocorrelation series.
pub fn cmd_propagate(cfg: &RunConfig, state_path: &Path, out: &Path) -> Result<()> {
    let sidecar: StateSidecar = read_json(&sidecar_path(state_path))?;
    if sidecar.schema_version != SCHEMA_VERSION {
        bail!(
            "{}: schema version {} (this build reads {})",
            sidecar_path(state_path).display(),
            sidecar.schema_version,
            SCHEMA_VERSION
        );
    }
    let psi = read_state(state_path, &sidecar)?;
    let ff = load_field(&cfg.field)?;
    if ff.name != sidecar.field_name {
        bail!(
            "state was prepared for field '{}' but '{}' was given",
            sidecar.field_name,
            ff.name
        );
    }

    let pcfg = PropagationConfig {
        total_time_fs: cfg.total_time_fs,
        n_steps: cfg.n_steps,
        splitting: cfg.splitting,
        record_stride: cfg.record_stride,
    };
    let mut series = propagate(&psi, &psi, &ff, &pcfg)
        .map_err(|e| anyhow!("propagation: {e}"))?;

    let axis = sidecar.axis.clone().unwrap_or_else(|| "-".into());
    let seed = if cfg.shots > 0 {
        let offset = match axis.as_str() {
            "x" => 0,
            "y" => 1,
            "z" => 2,
            _ => 3,
        };
        let seed = cfg.seed.wrapping_add(offset);
        series.values = sample_series(&series.values, 1.0, cfg.shots, seed)
            .map_err(|e| anyhow!("shot sampling: {e}"))?;
        Some(seed)
    } else {
        None
    };

    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .with_context(|| format!("creating {}", parent.display()))?;
        }
    }
    write_autocorr(out, &series.times_fs, &series.values)?;
    let out_sidecar = AutocorrSidecar {
        schema_version: SCHEMA_VERSION,
        kind: "autocorrelation".into(),
        axis,
        e0_cm: sidecar.e0_cm,
        mu_norm_sq: sidecar.mu_norm_sq.unwrap_or(1.0),
        total_time_fs: cfg.total_time_fs,
        n_steps: cfg.n_steps,
        record_stride: cfg.record_stride,
        dt_fs: cfg.total_time_fs / cfg.n_steps as f64,
        splitting: cfg.splitting.as_str().into(),
        shots: cfg.shots,
        seed,
        field_name: sidecar.field_name.clone(),
        qubits_per_mode: sidecar.qubits_per_mode,
        n_modes: sidecar.n_modes,
        length: sidecar.length,
    };
    write_json(&sidecar_path(out), &out_sidecar)?;
    println!(
        "propagated {} steps over {} fs ({}), recorded {} samples",
        cfg.n_steps,
        cfg.total_time_fs,
        cfg.splitting,
        series.values.len()
    );
    println!("wrote {}", out.display());
    Ok(())
}

/// `spectrum`: transform one autocorrelation CSV per axis into the
/// cross-section spectrum, band reports, and a gnuplot file.
pub fn cmd_spectrum(
    cfg: &RunConfig,
    inputs: &[PathBuf],
    e0_override: Option<f64>,
    out_prefix: &Path,
) -> Result<()> {
    if inputs.is_empty() {
        bail!("no autocorrelation files given");
    }
    let mut axes: Vec<Axis> = Vec::new();
    let mut series_list: Vec<(AutocorrelationSeries, AutocorrSidecar)> = Vec::new();
    for path in inputs {
        let (series, sidecar) = read_autocorr(path)?;
        let axis = Axis::parse(&sidecar.axis).ok_or_else(|| {
            anyhow!(
                "{}: axis '{}' in the sidecar is not x, y, or z",
                path.display(),
                sidecar.axis
            )
        })?;
        if axes.contains(&axis) {
            bail!("axis '{axis}' appears in more than one input");
        }
        axes.push(axis);
        series_list.push((series, sidecar));
    }

    let e0_cm = e0_override.unwrap_or(series_list[0].1.e0_cm);
    for (_, sc) in &series_list {
        if e0_override.is_none() && (sc.e0_cm - e0_cm).abs() > 1e-9 * e0_cm.abs().max(1.0) {
            bail!(
                "inputs disagree on E0 ({} vs {}); pass an explicit --e0",
                sc.e0_cm,
                e0_cm
            );
        }
    }

    let scfg = SpectrumConfig {
        pad_factor: cfg.pad_factor,
        energy_max_cm: cfg.energy_max_cm,
        window_threshold: cfg.window_threshold,
    };
    let contributions: Vec<(&AutocorrelationSeries, f64)> = series_list
        .iter()
        .map(|(s, sc)| (s, sc.mu_norm_sq))
        .collect();
    let total = compute_spectrum(&contributions, e0_cm, &scfg)
        .map_err(|e| anyhow!("spectrum transform: {e}"))?;
    let mut per_axis: Vec<Spectrum> = Vec::new();
    for (s, sc) in &series_list {
        per_axis.push(
            compute_spectrum(&[(s, sc.mu_norm_sq)], e0_cm, &scfg)
                .map_err(|e| anyhow!("spectrum transform ({}): {e}", sc.axis))?,
        );
    }
    let bands = total.bands(cfg.window_threshold);

    if let Some(parent) = out_prefix.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .with_context(|| format!("creating {}", parent.display()))?;
        }
    }
    let per_axis_refs: Vec<&Spectrum> = per_axis.iter().collect();
    let files = write_spectrum_files(out_prefix, &axes, &per_axis_refs, &total, &bands)?;
    println!(
        "spectrum over {} energies (dE = {:.4} cm^-1), {} bands above threshold",
        total.energies_cm.len(),
        total.de_cm,
        bands.len()
    );
    for b in &bands {
        println!(
            "  band [{:.1}, {:.1}] cm^-1: centroid {:.2} +- {:.2}, intensity {:.3} km/mol",
            b.e_lo_cm, b.e_hi_cm, b.centroid_cm, b.ci95_cm, b.intensity_km_mol
        );
    }
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

/// `oracle`: dense diagonalization and stick spectra.
pub fn cmd_oracle(cfg: &RunConfig, out_prefix: &Path) -> Result<()> {
    let ff = load_field(&cfg.field)?;
    let g = make_grid(cfg.qubits_per_mode, ff.n_modes, cfg.length)
        .map_err(|e| anyhow!("grid construction: {e}"))?;
    let es = diagonalize(&ff, g).map_err(|e| anyhow!("diagonalization: {e}"))?;

    if let Some(parent) = out_prefix.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .with_context(|| format!("creating {}", parent.display()))?;
        }
    }

    let levels_path = PathBuf::from(format!("{}_levels.csv", out_prefix.display()));
    let mut out = String::from("level,e_cm,e_rel_cm\n");
    let e0 = es.ground_energy_cm();
    for k in 0..es.len() {
        out.push_str(&format!(
            "{k},{:.17e},{:.17e}\n",
            es.energy_cm(k),
            es.energy_cm(k) - e0
        ));
    }
    std::fs::write(&levels_path, out)
        .with_context(|| format!("writing {}", levels_path.display()))?;

    let sticks_path = PathBuf::from(format!("{}_sticks.csv", out_prefix.display()));
    let mut out = String::from("axis,level,frequency_cm,strength_debye_sq,intensity_km_mol\n");
    for &axis in &cfg.axes {
        let sticks = stick_spectrum(&es, &ff, axis, cfg.dipole_order, DEFAULT_STICK_FLOOR)
            .map_err(|e| anyhow!("stick spectrum ({axis}): {e}"))?;
        for s in sticks {
            out.push_str(&format!(
                "{axis},{},{:.17e},{:.17e},{:.17e}\n",
                s.level, s.frequency_cm, s.strength_debye_sq, s.intensity_km_mol
            ));
        }
    }
    std::fs::write(&sticks_path, out)
        .with_context(|| format!("writing {}", sticks_path.display()))?;

    println!(
        "diagonalized {} x {} Hamiltonian: E0 = {:.6} cm^-1",
        es.len(),
        es.len(),
        e0
    );
    println!("wrote {}", levels_path.display());
    println!("wrote {}", sticks_path.display());
    Ok(())
}

/// `resources`: print the gate accounting and optionally write it as JSON.
pub fn cmd_resources(cfg: &RunConfig, json_out: Option<&Path>) -> Result<()> {
    let ff = load_field(&cfg.field)?;
    let report = splitop::circuit::resources::resource_report(
        &ff,
        cfg.qubits_per_mode,
        cfg.dipole_order,
        Some(cfg.n_steps as u64),
    )
    .map_err(|e| anyhow!("resource accounting: {e}"))?;

    println!(
        "field: {}   modes: {}   qubits per mode: {}",
        report.field_name, report.n_modes, report.qubits_per_mode
    );
    let q = &report.qubits;
    println!(
        "qubits: register {}, dipole ancilla {}, decomposition ancillas {}, readout ancilla {} -> total {}",
        q.register, q.dipole_ancilla, q.decomposition_ancillas, q.readout_ancilla, q.total
    );
    println!();
    println!("index-coincidence gate table (n = {}):", report.qubits_per_mode);
    for (label, gates) in &report.coincidence_gate_table {
        println!("  {label:<9} {gates}");
    }
    println!();
    println!(
        "state preparation: {} gates per register, {} total",
        report.state_prep_gates_per_register, report.state_prep_gates
    );
    println!();
    println!("time step:");
    println!("  potential blocks by degree:");
    for row in &report.step.potential_rows {
        let blocks: Vec<String> = row
            .blocks
            .iter()
            .map(|b| {
                if b.is_empty() {
                    "const".to_string()
                } else {
                    b.iter().map(|m| m.to_string()).collect::<Vec<_>>().join("")
                }
            })
            .collect();
        println!(
            "    degree {}: {} blocks [{}], {} gates",
            row.degree,
            row.blocks.len(),
            blocks.join(" "),
            row.gates
        );
    }
    println!("  potential total: {}", report.step.potential_gates);
    println!(
        "  kinetic diagonal: {} per register, {} total",
        report.step.kinetic_gates_per_register, report.step.kinetic_gates
    );
    println!(
        "  qft: {} per register, {} total",
        report.step.qft_gates_per_register, report.step.qft_gates
    );
    println!("  step total: {}", report.step.step_gates);
    println!();
    for d in &report.dipole {
        println!(
            "dipole ({}, order {}): one-sided {}, both sides {}",
            d.axis, d.truncation_order, d.one_sided_gates, d.both_sides_gates
        );
        for row in &d.rows {
            let blocks: Vec<String> = row
                .blocks
                .iter()
                .map(|b| {
                    if b.is_empty() {
                        "const".to_string()
                    } else {
                        b.iter().map(|m| m.to_string()).collect::<Vec<_>>().join("")
                    }
                })
                .collect();
            println!(
                "    degree {}: {} blocks [{}], {} gates",
                row.degree,
                row.blocks.len(),
                blocks.join(" "),
                row.gates
            );
        }
    }
    if let (Some(n), Some(total)) = (report.n_steps, report.propagation_gates) {
        println!();
        println!("propagation: {} steps -> {} gates", n, total);
    }

    if let Some(path) = json_out {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)
                    .with_context(|| format!("creating {}", parent.display()))?;
            }
        }
        write_json(path, &report)?;
        println!();
        println!("wrote {}", path.display());
    }
    Ok(())
}
