//! `splitop`: grid emulation of split-operator vibrational dynamics with
//! circuit-faithful gate accounting.
//!
//! Every numeric parameter can come from three places, in precedence
//! order: an explicit flag, a `key = value` line in the file named by
//! `--config`, then the built-in default.

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use splitop::forcefield::Axis;
use splitop_cli::commands::{
    cmd_dipole, cmd_oracle, cmd_prepare, cmd_propagate, cmd_resources, cmd_spectrum,
};
use splitop_cli::config::{resolve, Overrides, RunConfig};
use splitop_cli::pipeline::{parse_pairs, parse_schemes, run_pipeline_to_disk, run_scan, PipelineCache};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "splitop",
    version,
    about = "Split-operator emulation of vibrational infrared spectra with gate-level accounting"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand; each maps to the config key of the
/// same name.
#[derive(Args, Debug, Default)]
struct CommonArgs {
    /// Key = value config file supplying defaults for all flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Force-field coefficient file (.ff).
    #[arg(long)]
    field: Option<PathBuf>,
    /// Qubits per mode; the per-mode grid has 2^n points.
    #[arg(long)]
    qubits_per_mode: Option<usize>,
    /// Grid length in dimensionless normal coordinates.
    #[arg(long)]
    length: Option<f64>,
    /// Comma-separated dipole axes (default x,z).
    #[arg(long)]
    axes: Option<String>,
    /// Reference state: ite or harmonic.
    #[arg(long)]
    initial_state: Option<String>,
    /// Imaginary-time step in fs.
    #[arg(long)]
    dtau_fs: Option<f64>,
    /// Imaginary-time energy convergence threshold in cm^-1.
    #[arg(long)]
    ite_tol_cm: Option<f64>,
    /// Total propagation time in fs.
    #[arg(long)]
    total_time_fs: Option<f64>,
    /// Number of propagation steps.
    #[arg(long)]
    n_steps: Option<usize>,
    /// Record the autocorrelation every this many steps.
    #[arg(long)]
    record_stride: Option<usize>,
    /// Splitting pattern: kinetic-half or potential-half.
    #[arg(long)]
    splitting: Option<String>,
    /// Dipole Taylor truncation order (1, 2, or 3).
    #[arg(long)]
    dipole_order: Option<usize>,
    /// Dipole stage: exact (multiply and renormalize) or circuit
    /// (ancilla block encoding).
    #[arg(long)]
    dipole_mode: Option<String>,
    /// Scale margin for the circuit dipole mode: beta = margin * max|mu|.
    #[arg(long)]
    beta_margin: Option<f64>,
    /// Shots per recorded point (0 = exact expectation values).
    #[arg(long)]
    shots: Option<u64>,
    /// Base seed for shot sampling.
    #[arg(long)]
    seed: Option<u64>,
    /// Zero-padding factor of the spectral transform.
    #[arg(long)]
    pad_factor: Option<usize>,
    /// Upper edge of the reported spectrum in cm^-1.
    #[arg(long)]
    energy_max_cm: Option<f64>,
    /// Band windows keep sigma above this fraction of the peak.
    #[arg(long)]
    window_threshold: Option<f64>,
    /// Directory where artifacts land; relative output paths resolve
    /// against it.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

/// Resolve a stage output path against the configured output directory:
/// absolute paths pass through, relative ones land under `out-dir`.
fn in_out_dir(cfg: &RunConfig, path: &PathBuf) -> PathBuf {
    if path.is_absolute() {
        path.clone()
    } else {
        cfg.out_dir.join(path)
    }
}

impl CommonArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let ov = Overrides {
            field: self.field.clone(),
            qubits_per_mode: self.qubits_per_mode,
            length: self.length,
            axes: self.axes.clone(),
            initial_state: self.initial_state.clone(),
            dtau_fs: self.dtau_fs,
            ite_tol_cm: self.ite_tol_cm,
            total_time_fs: self.total_time_fs,
            n_steps: self.n_steps,
            record_stride: self.record_stride,
            splitting: self.splitting.clone(),
            dipole_order: self.dipole_order,
            dipole_mode: self.dipole_mode.clone(),
            beta_margin: self.beta_margin,
            shots: self.shots,
            seed: self.seed,
            pad_factor: self.pad_factor,
            energy_max_cm: self.energy_max_cm,
            window_threshold: self.window_threshold,
            out_dir: self.out_dir.clone(),
        };
        resolve(self.config.as_deref(), &ov)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Relax or sample the reference state and write a snapshot.
    Prepare {
        #[command(flatten)]
        common: CommonArgs,
        /// Snapshot path (CSV; a .json sidecar is written next to it).
        #[arg(long, default_value = "state.csv")]
        out: PathBuf,
    },
    /// Apply the dipole stage to a prepared snapshot.
    Dipole {
        #[command(flatten)]
        common: CommonArgs,
        /// Input state snapshot from `prepare`.
        #[arg(long)]
        state: PathBuf,
        /// Dipole axis (x, y, or z).
        #[arg(long)]
        axis: String,
        /// Output snapshot path.
        #[arg(long, default_value = "mu_state.csv")]
        out: PathBuf,
    },
    /// Propagate a snapshot and record its autocorrelation series.
    Propagate {
        #[command(flatten)]
        common: CommonArgs,
        /// Input state snapshot (usually a `dipole` output).
        #[arg(long)]
        state: PathBuf,
        /// Output series path (CSV; sidecar written next to it).
        #[arg(long, default_value = "autocorr.csv")]
        out: PathBuf,
    },
    /// Transform autocorrelation series into the cross-section spectrum.
    Spectrum {
        #[command(flatten)]
        common: CommonArgs,
        /// Autocorrelation CSVs, one per axis (repeatable).
        #[arg(long = "autocorr", required = true)]
        autocorr: Vec<PathBuf>,
        /// Override the reference energy (cm^-1) from the sidecars.
        #[arg(long)]
        e0: Option<f64>,
        /// Output prefix: writes <prefix>.csv, <prefix>_bands.json,
        /// <prefix>.dat.
        #[arg(long, default_value = "spectrum")]
        out_prefix: PathBuf,
    },
    /// Dense exact diagonalization: eigenvalues and stick spectra.
    Oracle {
        #[command(flatten)]
        common: CommonArgs,
        /// Output prefix: writes <prefix>_levels.csv and
        /// <prefix>_sticks.csv.
        #[arg(long, default_value = "oracle")]
        out_prefix: PathBuf,
    },
    /// Gate and qubit accounting for the circuit formulation.
    Resources {
        #[command(flatten)]
        common: CommonArgs,
        /// Also write the report as JSON to this path.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Run the pipeline over (time, steps) points and scheme variants.
    Scan {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated T_fs:n_steps pairs (default: the configured
        /// single point).
        #[arg(long)]
        pairs: Option<String>,
        /// Comma-separated scheme labels like mu3_ite, or "all" for the
        /// four order x state combinations (default: the configured
        /// scheme).
        #[arg(long)]
        schemes: Option<String>,
    },
    /// Run prepare -> dipole -> propagate -> spectrum and write a manifest.
    Pipeline {
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Prepare { common, out } => {
            let cfg = common.resolve().context("prepare: configuration")?;
            cmd_prepare(&cfg, &in_out_dir(&cfg, &out)).context("prepare")
        }
        Command::Dipole { common, state, axis, out } => {
            let cfg = common.resolve().context("dipole: configuration")?;
            let axis = Axis::parse(&axis)
                .with_context(|| format!("dipole: unknown axis '{axis}' (expected x, y, or z)"))?;
            cmd_dipole(&cfg, &state, axis, &in_out_dir(&cfg, &out)).context("dipole")
        }
        Command::Propagate { common, state, out } => {
            let cfg = common.resolve().context("propagate: configuration")?;
            cmd_propagate(&cfg, &state, &in_out_dir(&cfg, &out)).context("propagate")
        }
        Command::Spectrum { common, autocorr, e0, out_prefix } => {
            let cfg = common.resolve().context("spectrum: configuration")?;
            cmd_spectrum(&cfg, &autocorr, e0, &in_out_dir(&cfg, &out_prefix)).context("spectrum")
        }
        Command::Oracle { common, out_prefix } => {
            let cfg = common.resolve().context("oracle: configuration")?;
            cmd_oracle(&cfg, &in_out_dir(&cfg, &out_prefix)).context("oracle")
        }
        Command::Resources { common, json } => {
            let cfg = common.resolve().context("resources: configuration")?;
            let json = json.map(|p| in_out_dir(&cfg, &p));
            cmd_resources(&cfg, json.as_deref()).context("resources")
        }
        Command::Scan { common, pairs, schemes } => {
            let cfg = common.resolve().context("scan: configuration")?;
            let points = match pairs {
                Some(p) => parse_pairs(&p).context("scan: --pairs")?,
                None => vec![splitop_cli::pipeline::ScanPoint {
                    total_time_fs: cfg.total_time_fs,
                    n_steps: cfg.n_steps,
                }],
            };
            let scheme_list = match schemes {
                Some(s) => parse_schemes(&s).context("scan: --schemes")?,
                None => vec![(cfg.dipole_order, cfg.initial_state)],
            };
            let mut cache = PipelineCache::default();
            let manifest =
                run_scan(&cfg, &points, &scheme_list, &mut cache).context("scan")?;
            println!(
                "scan complete: {} artifacts under {}",
                manifest.artifacts.len(),
                cfg.out_dir.display()
            );
            Ok(())
        }
        Command::Pipeline { common } => {
            let cfg = common.resolve().context("pipeline: configuration")?;
            let mut cache = PipelineCache::default();
            let (manifest, result) =
                run_pipeline_to_disk(&cfg, &mut cache).context("pipeline")?;
            println!(
                "pipeline complete: E0 = {:.6} cm^-1, {} bands, {} artifacts under {}",
                result.e0_ref_cm,
                result.bands.len(),
                manifest.artifacts.len(),
                cfg.out_dir.display()
            );
            for b in &result.bands {
                println!(
                    "  band [{:.1}, {:.1}] cm^-1: centroid {:.2} +- {:.2}, intensity {:.3} km/mol",
                    b.e_lo_cm, b.e_hi_cm, b.centroid_cm, b.ci95_cm, b.intensity_km_mol
                );
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
