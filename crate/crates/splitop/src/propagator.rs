//! Real-time split-operator propagation on the mode grid.
//!
//! One step of the symmetric splitting advances the state by dt through
//! diagonal phase multiplications in alternating spaces:
//!
//! ```text
//! kinetic-half:    U = exp(-i K dt/2) exp(-i V dt) exp(-i K dt/2)
//! potential-half:  U = exp(-i V dt/2) exp(-i K dt) exp(-i V dt/2)
//! ```
//!
//! with every phase exp(-i 2 pi c E dt) for a diagonal energy E in cm^-1.
//! The driver merges adjacent half factors between steps, so a long run
//! costs one potential phase, one kinetic phase, and two transforms per
//! step; recording points re-split the merged factor so the autocorrelation
//! samples the symmetric-step state exactly.

use crate::error::{Error, Result};
use crate::fft::ModeTransform;
use crate::forcefield::ForceField;
use crate::grid::{inner_product, GridSpec, Space, Wavefunction};
use crate::hamiltonian::{kinetic_energy, potential_on_grid};
use crate::units::phase_angle;
use num_complex::Complex64;

/// Which operator takes the symmetric half steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Splitting {
    KineticHalf,
    PotentialHalf,
}

impl Splitting {
    pub fn as_str(self) -> &'static str {
        match self {
            Splitting::KineticHalf => "kinetic-half",
            Splitting::PotentialHalf => "potential-half",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "kinetic-half" | "kinetic_half" | "k" => Ok(Splitting::KineticHalf),
            "potential-half" | "potential_half" | "v" => Ok(Splitting::PotentialHalf),
            other => Err(Error::InvalidInput(format!(
                "unknown splitting '{other}' (expected kinetic-half or potential-half)"
            ))),
        }
    }
}

impl std::fmt::Display for Splitting {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Run controls for a propagation.
#[derive(Debug, Clone, Copy)]
pub struct PropagationConfig {
    /// Total propagated time in fs; dt = total_time_fs / n_steps.
    pub total_time_fs: f64,
    pub n_steps: usize,
    pub splitting: Splitting,
    /// Record the autocorrelation every this many steps (must divide
    /// n_steps). 1 records every step.
    pub record_stride: usize,
}

impl PropagationConfig {
    pub fn dt_fs(&self) -> f64 {
        self.total_time_fs / self.n_steps as f64
    }

    fn validate(&self) -> Result<()> {
        if self.n_steps == 0 {
            return Err(Error::InvalidInput("n_steps must be at least 1".into()));
        }
        if self.total_time_fs == 0.0 || !self.total_time_fs.is_finite() {
            return Err(Error::InvalidInput(format!(
                "total time must be finite and nonzero, got {}",
                self.total_time_fs
            )));
        }
        if self.record_stride == 0 || self.n_steps % self.record_stride != 0 {
            return Err(Error::InvalidInput(format!(
                "record stride {} must be positive and divide n_steps {}",
                self.record_stride, self.n_steps
            )));
        }
        Ok(())
    }
}

/// Sampled overlap series A(t_k) = <ref | psi(t_k)> plus the state at the
/// final time.
#[derive(Debug, Clone)]
pub struct AutocorrelationSeries {
    /// Step size of the underlying propagation in fs.
    pub dt_fs: f64,
    /// Steps between recorded samples.
    pub record_stride: usize,
    /// Recorded times, starting at 0.
    pub times_fs: Vec<f64>,
    /// Overlap samples, one per recorded time.
    pub values: Vec<Complex64>,
    pub splitting: Splitting,
    pub final_state: Wavefunction,
}

impl AutocorrelationSeries {
    /// Spacing of the recorded samples in fs.
    pub fn dt_record_fs(&self) -> f64 {
        self.dt_fs * self.record_stride as f64
    }
}

/// Precomputed diagonal phase tables for one (force field, grid, dt,
/// splitting) combination, with a step method for tests and short runs.
pub struct Propagator {
    grid: GridSpec,
    splitting: Splitting,
    k_half: Vec<Complex64>,
    k_full: Vec<Complex64>,
    v_half: Vec<Complex64>,
    v_full: Vec<Complex64>,
    transform: ModeTransform,
}

fn phase_table(energies: &[f64], dt_fs: f64) -> Vec<Complex64> {
    energies
        .iter()
        .map(|e| Complex64::from_polar(1.0, -phase_angle(*e, dt_fs)))
        .collect()
}

fn apply_table(amps: &mut [Complex64], table: &[Complex64]) {
    for (a, p) in amps.iter_mut().zip(table) {
        *a *= p;
    }
}

impl Propagator {
    pub fn new(ff: &ForceField, g: GridSpec, dt_fs: f64, splitting: Splitting) -> Result<Self> {
        let v = potential_on_grid(ff, g)?;
        let k = kinetic_energy(g, &ff.omega).combined();
        Ok(Propagator {
            grid: g,
            splitting,
            k_half: phase_table(&k, 0.5 * dt_fs),
            k_full: phase_table(&k, dt_fs),
            v_half: phase_table(&v.values, 0.5 * dt_fs),
            v_full: phase_table(&v.values, dt_fs),
            transform: ModeTransform::new(g),
        })
    }

    /// One full symmetric step, position representation in and out. Costs
    /// four transforms for the kinetic-half splitting (the long-run driver
    /// merges these); used for step-level tests and cross-checks.
    pub fn step(&mut self, psi: &mut Wavefunction) -> Result<()> {
        if psi.grid != self.grid || psi.space != Space::Position {
            return Err(Error::GridMismatch(
                "step expects a position-space state on the propagator grid".into(),
            ));
        }
        match self.splitting {
            Splitting::KineticHalf => {
                self.transform.forward(psi);
                apply_table(&mut psi.amps, &self.k_half);
                self.transform.inverse(psi);
                apply_table(&mut psi.amps, &self.v_full);
                self.transform.forward(psi);
                apply_table(&mut psi.amps, &self.k_half);
                self.transform.inverse(psi);
            }
            Splitting::PotentialHalf => {
                apply_table(&mut psi.amps, &self.v_half);
                self.transform.forward(psi);
                apply_table(&mut psi.amps, &self.k_full);
                self.transform.inverse(psi);
                apply_table(&mut psi.amps, &self.v_half);
            }
        }
        Ok(())
    }
}

/// Propagate `psi0` for the configured time and sample the overlap against
/// `reference` at every recorded step, including t = 0. Both states must be
/// position-space on the same grid. Aborts with the failing step index if a
/// recorded value stops being finite.
pub fn propagate(
    psi0: &Wavefunction,
    reference: &Wavefunction,
    ff: &ForceField,
    cfg: &PropagationConfig,
) -> Result<AutocorrelationSeries> {
    cfg.validate()?;
    if psi0.grid != reference.grid {
        return Err(Error::GridMismatch(
            "initial and reference states live on different grids".into(),
        ));
    }
    if psi0.space != Space::Position || reference.space != Space::Position {
        return Err(Error::GridMismatch(
            "propagation expects position-space states".into(),
        ));
    }
    let dt = cfg.dt_fs();
    let prop = Propagator::new(ff, psi0.grid, dt, cfg.splitting)?;
    let Propagator {
        k_half,
        k_full,
        v_half,
        v_full,
        mut transform,
        ..
    } = prop;

    let stride = cfg.record_stride;
    let n_rec = cfg.n_steps / stride + 1;
    let mut times = Vec::with_capacity(n_rec);
    let mut values = Vec::with_capacity(n_rec);
    let mut psi = psi0.clone();

    let record = |values: &mut Vec<Complex64>,
                      times: &mut Vec<f64>,
                      state: &Wavefunction,
                      reference: &Wavefunction,
                      step: usize|
     -> Result<()> {
        let a = inner_product(reference, state)?;
        if !a.re.is_finite() || !a.im.is_finite() {
            return Err(Error::Numerical(format!(
                "autocorrelation became non-finite at step {step} (t = {} fs)",
                step as f64 * dt
            )));
        }
        times.push(step as f64 * dt);
        values.push(a);
        Ok(())
    };

    match cfg.splitting {
        Splitting::KineticHalf => {
            // Momentum-resident loop. The unitary transform preserves inner
            // products, so overlaps are taken against the transformed
            // reference without leaving momentum space.
            let mut ref_hat = reference.clone();
            transform.forward(&mut ref_hat);
            transform.forward(&mut psi);
            record(&mut values, &mut times, &psi, &ref_hat, 0)?;
            apply_table(&mut psi.amps, &k_half);
            for k in 1..=cfg.n_steps {
                transform.inverse(&mut psi);
                apply_table(&mut psi.amps, &v_full);
                transform.forward(&mut psi);
                if k % stride == 0 {
                    apply_table(&mut psi.amps, &k_half);
                    record(&mut values, &mut times, &psi, &ref_hat, k)?;
                    if k < cfg.n_steps {
                        apply_table(&mut psi.amps, &k_half);
                    }
                } else {
                    apply_table(&mut psi.amps, &k_full);
                }
            }
            transform.inverse(&mut psi);
        }
        Splitting::PotentialHalf => {
            record(&mut values, &mut times, &psi, reference, 0)?;
            apply_table(&mut psi.amps, &v_half);
            for k in 1..=cfg.n_steps {
                transform.forward(&mut psi);
                apply_table(&mut psi.amps, &k_full);
                transform.inverse(&mut psi);
                if k % stride == 0 {
                    apply_table(&mut psi.amps, &v_half);
                    record(&mut values, &mut times, &psi, reference, k)?;
                    if k < cfg.n_steps {
                        apply_table(&mut psi.amps, &v_half);
                    }
                } else {
                    apply_table(&mut psi.amps, &v_full);
                }
            }
        }
    }

    Ok(AutocorrelationSeries {
        dt_fs: dt,
        record_stride: stride,
        times_fs: times,
        values,
        splitting: cfg.splitting,
        final_state: psi,
    })
}

/// Run the same propagation under both splittings and return the pair
/// (kinetic-half series, potential-half series).
pub fn compare_splittings(
    psi0: &Wavefunction,
    reference: &Wavefunction,
    ff: &ForceField,
    total_time_fs: f64,
    n_steps: usize,
    record_stride: usize,
) -> Result<(AutocorrelationSeries, AutocorrelationSeries)> {
    let base = PropagationConfig {
        total_time_fs,
        n_steps,
        splitting: Splitting::KineticHalf,
        record_stride,
    };
    let a = propagate(psi0, reference, ff, &base)?;
    let b = propagate(
        psi0,
        reference,
        ff,
        &PropagationConfig {
            splitting: Splitting::PotentialHalf,
            ..base
        },
    )?;
    Ok((a, b))
}
