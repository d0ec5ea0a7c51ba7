//! Sum-of-products force field: harmonic wavenumbers, cubic/quartic
//! potential coefficients, and dipole-surface coefficients per axis.
//!
//! The potential and dipole surfaces are polynomials in the dimensionless
//! normal coordinates Q_i:
//!
//! ```text
//! V/hc  = sum_i (omega_i/2) Q_i^2 + sum k_ijk Q_i Q_j Q_k
//!                                 + sum k_ijkl Q_i Q_j Q_k Q_l     [cm^-1]
//! mu^a  = sum_i mu_i Q_i + sum mu_ij Q_i Q_j + sum mu_ijk Q_i Q_j Q_k  [debye]
//! ```
//!
//! Coefficient keys are canonical sorted index tuples, and each stored
//! coefficient is the total weight of its distinct monomial (the sums above
//! run over distinct sorted tuples once). Published force fields differ on
//! this point, so it is worth stating loudly: a file value `cubic 0 0 1 c`
//! means the potential contains exactly c * Q0^2 Q1, with no further
//! permutation multiplicity.
//!
//! There is deliberately no constant dipole term: it would only add an
//! elastic zero-energy line to the spectrum.

use crate::error::{Error, Result};
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Cartesian dipole axis label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn parse(s: &str) -> Option<Axis> {
        match s {
            "x" | "X" => Some(Axis::X),
            "y" | "Y" => Some(Axis::Y),
            "z" | "Z" => Some(Axis::Z),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }

    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Dipole coefficients for one axis, keyed by canonical sorted index tuples.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DipoleSurface {
    pub linear: BTreeMap<usize, f64>,
    pub quadratic: BTreeMap<[usize; 2], f64>,
    pub cubic: BTreeMap<[usize; 3], f64>,
}

impl DipoleSurface {
    pub fn is_empty(&self) -> bool {
        self.linear.is_empty() && self.quadratic.is_empty() && self.cubic.is_empty()
    }
}

/// Parsed and validated force field.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceField {
    pub name: String,
    pub n_modes: usize,
    /// Harmonic wavenumbers omega_i in cm^-1, index = mode.
    pub omega: Vec<f64>,
    /// Cubic coefficients k_ijk in cm^-1, canonical sorted keys.
    pub cubic: BTreeMap<[usize; 3], f64>,
    /// Quartic coefficients k_ijkl in cm^-1, canonical sorted keys.
    pub quartic: BTreeMap<[usize; 4], f64>,
    /// Dipole surfaces; axes with no coefficients contribute zero.
    pub dipole: BTreeMap<Axis, DipoleSurface>,
}

impl ForceField {
    pub fn dipole_surface(&self, axis: Axis) -> Option<&DipoleSurface> {
        self.dipole.get(&axis).filter(|s| !s.is_empty())
    }

    /// Axes that carry at least one coefficient, in x, y, z order.
    pub fn active_axes(&self) -> Vec<Axis> {
        Axis::ALL
            .iter()
            .copied()
            .filter(|a| self.dipole_surface(*a).is_some())
            .collect()
    }
}

fn parse_index(tok: &str, n_modes: usize, line: usize) -> Result<usize> {
    let idx: usize = tok.parse().map_err(|_| Error::Parse {
        line,
        message: format!("expected a mode index, got '{tok}'"),
    })?;
    if idx >= n_modes {
        return Err(Error::Parse {
            line,
            message: format!("mode index {idx} out of range (modes declared: {n_modes})"),
        });
    }
    Ok(idx)
}

fn parse_value(tok: &str, line: usize) -> Result<f64> {
    let v: f64 = tok.parse().map_err(|_| Error::Parse {
        line,
        message: format!("expected a numeric value, got '{tok}'"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            message: format!("non-finite value '{tok}'"),
        });
    }
    Ok(v)
}

/// Parse the line-oriented `.ff` format.
///
/// Grammar, one datum per line, `#` starts a comment, tokens whitespace
/// separated, indices 0-based:
///
/// ```text
/// modes N
/// omega i value
/// cubic i j k value
/// quartic i j k l value
/// mu AXIS i value
/// mu AXIS i j value
/// mu AXIS i j k value
/// ```
///
/// The `modes` line must come before any coefficient. Indices are
/// canonicalized by sorting; supplying both `cubic 0 1 0` and `cubic 0 0 1`
/// is a duplicate-key error, as is repeating any line for the same key.
pub fn parse_forcefield(text: &str) -> Result<ForceField> {
    let mut n_modes: Option<usize> = None;
    let mut omega: BTreeMap<usize, f64> = BTreeMap::new();
    let mut cubic: BTreeMap<[usize; 3], f64> = BTreeMap::new();
    let mut quartic: BTreeMap<[usize; 4], f64> = BTreeMap::new();
    let mut dipole: BTreeMap<Axis, DipoleSurface> = BTreeMap::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let toks: Vec<&str> = content.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        match toks[0] {
            "modes" => {
                if n_modes.is_some() {
                    return Err(Error::Parse {
                        line,
                        message: "duplicate 'modes' line".into(),
                    });
                }
                if toks.len() != 2 {
                    return Err(Error::Parse {
                        line,
                        message: "expected 'modes N'".into(),
                    });
                }
                let n: usize = toks[1].parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("expected a positive mode count, got '{}'", toks[1]),
                })?;
                if n == 0 {
                    return Err(Error::Parse {
                        line,
                        message: "mode count must be positive".into(),
                    });
                }
                n_modes = Some(n);
            }
            "omega" => {
                let d = n_modes.ok_or(Error::Parse {
                    line,
                    message: "'omega' before 'modes'".into(),
                })?;
                if toks.len() != 3 {
                    return Err(Error::Parse {
                        line,
                        message: "expected 'omega i value'".into(),
                    });
                }
                let i = parse_index(toks[1], d, line)?;
                let v = parse_value(toks[2], line)?;
                if v <= 0.0 {
                    return Err(Error::Parse {
                        line,
                        message: format!("omega_{i} must be positive, got {v}"),
                    });
                }
                if omega.insert(i, v).is_some() {
                    return Err(Error::Parse {
                        line,
                        message: format!("duplicate omega for mode {i}"),
                    });
                }
            }
            "cubic" => {
                let d = n_modes.ok_or(Error::Parse {
                    line,
                    message: "'cubic' before 'modes'".into(),
                })?;
                if toks.len() != 5 {
                    return Err(Error::Parse {
                        line,
                        message: "expected 'cubic i j k value'".into(),
                    });
                }
                let mut key = [
                    parse_index(toks[1], d, line)?,
                    parse_index(toks[2], d, line)?,
                    parse_index(toks[3], d, line)?,
                ];
                key.sort_unstable();
                let v = parse_value(toks[4], line)?;
                if cubic.insert(key, v).is_some() {
                    return Err(Error::Parse {
                        line,
                        message: format!("duplicate cubic coefficient {key:?}"),
                    });
                }
            }
            "quartic" => {
                let d = n_modes.ok_or(Error::Parse {
                    line,
                    message: "'quartic' before 'modes'".into(),
                })?;
                if toks.len() != 6 {
                    return Err(Error::Parse {
                        line,
                        message: "expected 'quartic i j k l value'".into(),
                    });
                }
                let mut key = [
                    parse_index(toks[1], d, line)?,
                    parse_index(toks[2], d, line)?,
                    parse_index(toks[3], d, line)?,
                    parse_index(toks[4], d, line)?,
                ];
                key.sort_unstable();
                let v = parse_value(toks[5], line)?;
                if quartic.insert(key, v).is_some() {
                    return Err(Error::Parse {
                        line,
                        message: format!("duplicate quartic coefficient {key:?}"),
                    });
                }
            }
            "mu" => {
                let d = n_modes.ok_or(Error::Parse {
                    line,
                    message: "'mu' before 'modes'".into(),
                })?;
                if toks.len() < 4 || toks.len() > 6 {
                    return Err(Error::Parse {
                        line,
                        message: "expected 'mu AXIS i [j [k]] value'".into(),
                    });
                }
                let axis = Axis::parse(toks[1]).ok_or(Error::Parse {
                    line,
                    message: format!("unknown axis '{}' (expected x, y, or z)", toks[1]),
                })?;
                let v = parse_value(toks[toks.len() - 1], line)?;
                let idx_toks = &toks[2..toks.len() - 1];
                let surface = dipole.entry(axis).or_default();
                match idx_toks.len() {
                    1 => {
                        let i = parse_index(idx_toks[0], d, line)?;
                        if surface.linear.insert(i, v).is_some() {
                            return Err(Error::Parse {
                                line,
                                message: format!("duplicate linear mu {axis} {i}"),
                            });
                        }
                    }
                    2 => {
                        let mut key = [
                            parse_index(idx_toks[0], d, line)?,
                            parse_index(idx_toks[1], d, line)?,
                        ];
                        key.sort_unstable();
                        if surface.quadratic.insert(key, v).is_some() {
                            return Err(Error::Parse {
                                line,
                                message: format!("duplicate quadratic mu {axis} {key:?}"),
                            });
                        }
                    }
                    3 => {
                        let mut key = [
                            parse_index(idx_toks[0], d, line)?,
                            parse_index(idx_toks[1], d, line)?,
                            parse_index(idx_toks[2], d, line)?,
                        ];
                        key.sort_unstable();
                        if surface.cubic.insert(key, v).is_some() {
                            return Err(Error::Parse {
                                line,
                                message: format!("duplicate cubic mu {axis} {key:?}"),
                            });
                        }
                    }
                    _ => unreachable!("token count bounded above"),
                }
            }
            other => {
                return Err(Error::Parse {
                    line,
                    message: format!("unknown directive '{other}'"),
                });
            }
        }
    }

    let n_modes = n_modes.ok_or(Error::Parse {
        line: 0,
        message: "missing 'modes' line".into(),
    })?;
    for i in 0..n_modes {
        if !omega.contains_key(&i) {
            return Err(Error::InvalidInput(format!(
                "missing omega for mode {i}"
            )));
        }
    }
    let omega: Vec<f64> = (0..n_modes).map(|i| omega[&i]).collect();
    if dipole.values().all(|s| s.is_empty()) {
        return Err(Error::InvalidInput(
            "force field has no dipole coefficients on any axis; \
             the spectrum would be identically zero"
                .into(),
        ));
    }

    Ok(ForceField {
        name: String::new(),
        n_modes,
        omega,
        cubic,
        quartic,
        dipole,
    })
}

/// Serialize back to the `.ff` format. `parse_forcefield(serialize(ff))`
/// reproduces `ff` exactly (keys are already canonical; floats are written
/// with shortest round-trip formatting).
pub fn serialize(ff: &ForceField) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "modes {}", ff.n_modes);
    for (i, w) in ff.omega.iter().enumerate() {
        let _ = writeln!(out, "omega {i} {w}");
    }
    for (k, v) in &ff.cubic {
        let _ = writeln!(out, "cubic {} {} {} {v}", k[0], k[1], k[2]);
    }
    for (k, v) in &ff.quartic {
        let _ = writeln!(out, "quartic {} {} {} {} {v}", k[0], k[1], k[2], k[3]);
    }
    for (axis, s) in &ff.dipole {
        for (i, v) in &s.linear {
            let _ = writeln!(out, "mu {axis} {i} {v}");
        }
        for (k, v) in &s.quadratic {
            let _ = writeln!(out, "mu {axis} {} {} {v}", k[0], k[1]);
        }
        for (k, v) in &s.cubic {
            let _ = writeln!(out, "mu {axis} {} {} {} {v}", k[0], k[1], k[2]);
        }
    }
    out
}

/// One validation finding; `error` distinguishes hard failures from
/// warnings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub error: bool,
    pub message: String,
}

/// Structural and boundedness checks beyond what parsing enforces. An empty
/// list means clean; warnings flag fields that parse but risk unphysical
/// behavior on a large grid.
pub fn validate(ff: &ForceField, grid_half_extent: f64) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for (i, w) in ff.omega.iter().enumerate() {
        if *w <= 0.0 {
            out.push(Diagnostic {
                error: true,
                message: format!("omega_{i} = {w} is not positive"),
            });
        }
    }
    for (k, v) in &ff.quartic {
        if k[0] == k[1] && k[1] == k[2] && k[2] == k[3] && *v < 0.0 {
            out.push(Diagnostic {
                error: false,
                message: format!(
                    "quartic diagonal k_{0}{0}{0}{0} = {v} < 0 risks a potential \
                     unbounded below on the grid edge",
                    k[0]
                ),
            });
        }
    }
    // Corner probe: the harmonic part must dominate every odd/negative term
    // at the grid boundary, otherwise the split propagator can tunnel into a
    // spurious edge well. Probe all sign corners at |Q_i| = half extent.
    let q = grid_half_extent;
    let n_corners = 1usize << ff.n_modes;
    let mut min_v = f64::INFINITY;
    for corner in 0..n_corners {
        let qs: Vec<f64> = (0..ff.n_modes)
            .map(|m| if corner >> m & 1 == 1 { q } else { -q })
            .collect();
        let mut v = 0.0;
        for (m, w) in ff.omega.iter().enumerate() {
            v += 0.5 * w * qs[m] * qs[m];
        }
        for (k, c) in &ff.cubic {
            v += c * qs[k[0]] * qs[k[1]] * qs[k[2]];
        }
        for (k, c) in &ff.quartic {
            v += c * qs[k[0]] * qs[k[1]] * qs[k[2]] * qs[k[3]];
        }
        min_v = min_v.min(v);
    }
    if min_v < 0.0 {
        out.push(Diagnostic {
            error: false,
            message: format!(
                "potential reaches {min_v:.1} cm^-1 at a grid corner; \
                 anharmonic terms overpower the harmonic walls"
            ),
        });
    }
    out
}
