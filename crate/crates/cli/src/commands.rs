//! One function per subcommand. Each returns plain data; writing is left to
//! [`crate::output`] except for the sweep, which persists rows as it goes.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::sync::mpsc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use softguide::bs::{trap_eigenvalues, TrapState};
use softguide::resonance::{fit_decay, DecayFit, GoldenRule, ResonancePole, ResonanceSystem};
use softguide::transverse::{solve_modes, TransverseMode};

use crate::config::RunConfig;
use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeRow {
    pub n: usize,
    pub energy: f64,
    pub kappa: f64,
    pub m_left: f64,
    pub m_right: f64,
}

pub fn modes(cfg: &RunConfig) -> Result<Vec<ModeRow>> {
    let modes = solve_modes(&cfg.profile()?, cfg.numerics.mode_tol)?;
    Ok(modes
        .iter()
        .map(|m| ModeRow {
            n: m.index,
            energy: m.energy,
            kappa: m.kappa,
            m_left: m.m_left,
            m_right: m.m_right,
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrapRow {
    pub n: usize,
    pub energy: f64,
    pub residual: f64,
    pub multiplicity: usize,
}

fn trap_states(cfg: &RunConfig) -> Result<Vec<TrapState>> {
    Ok(trap_eigenvalues(&cfg.measure()?, cfg.trap.beta, cfg.numerics.trap_tol)?)
}

pub fn trap(cfg: &RunConfig) -> Result<Vec<TrapRow>> {
    Ok(trap_states(cfg)?
        .iter()
        .map(|s| TrapRow {
            n: s.index,
            energy: s.energy,
            residual: s.residual,
            multiplicity: s.multiplicity,
        })
        .collect())
}

/// Modes, trap states and the system at the configured placement.
struct Setup {
    modes: Vec<TransverseMode<f64>>,
    states: Vec<TrapState>,
}

impl Setup {
    fn new(cfg: &RunConfig) -> Result<Self> {
        Ok(Self {
            modes: solve_modes(&cfg.profile()?, cfg.numerics.mode_tol)?,
            states: trap_states(cfg)?,
        })
    }

    fn system(&self, cfg: &RunConfig, measure: &softguide::measure::KatoMeasure, n: usize) -> Result<ResonanceSystem> {
        Ok(ResonanceSystem::from_parts(
            measure,
            &cfg.profile()?,
            &self.modes,
            &self.states,
            n,
            cfg.numerics.radius,
        )?)
    }
}

pub fn pole(cfg: &RunConfig, n: usize) -> Result<ResonancePole> {
    let setup = Setup::new(cfg)?;
    let sys = setup.system(cfg, &cfg.measure()?, n)?;
    Ok(sys.find_pole(&cfg.pole_options())?)
}

pub fn golden_rule(cfg: &RunConfig, n: usize) -> Result<GoldenRule> {
    let setup = Setup::new(cfg)?;
    let sys = setup.system(cfg, &cfg.measure()?, n)?;
    Ok(sys.golden_rule()?)
}

/// One line of the sweep results file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub rho: f64,
    pub re_z: f64,
    pub im_z: f64,
    pub gamma_leading: f64,
    pub gamma: f64,
    pub residual: f64,
    pub iters: usize,
}

impl From<&ResonancePole> for SweepRow {
    fn from(p: &ResonancePole) -> Self {
        Self {
            rho: p.rho,
            re_z: p.z.re,
            im_z: p.z.im,
            gamma_leading: p.gamma_leading,
            gamma: p.gamma,
            residual: p.newton_residual,
            iters: p.iterations,
        }
    }
}

pub const SWEEP_HEADER: [&str; 7] = ["rho", "re_z", "im_z", "gamma_leading", "gamma", "residual", "iters"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeCheck {
    pub fit: DecayFit,
    pub target: f64,
    pub rel_dev: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepFailure {
    pub rho: f64,
    pub error: String,
    pub exit_code: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub config_hash: String,
    pub n: usize,
    pub trap_energy: f64,
    /// Number of open transverse channels.
    pub segment: usize,
    /// `E_j`, the highest open threshold, when `j > 0`.
    pub open_threshold: Option<f64>,
    pub rows: usize,
    pub resumed: usize,
    /// Fit of `ln gamma` against `rho`; target slope `-2 sqrt|E_j|`, 10% margin.
    pub gamma: Option<SlopeCheck>,
    /// Fit of `ln |Re z - E|`; the decay rate must reach `0.9 sqrt(2 |E|)`.
    pub shift: Option<SlopeCheck>,
    /// `|Im z - gamma_leading| / |gamma_leading|` along the grid.
    pub leading_gap: Vec<f64>,
    pub leading_gap_decreasing: bool,
    /// Fit of exact `e^{-2 rho}` samples; checks the fitting code itself.
    pub self_test: SlopeCheck,
    pub failures: Vec<SweepFailure>,
    pub notes: Vec<String>,
}

pub struct SweepOutcome {
    pub results: PathBuf,
    pub report_path: PathBuf,
    pub report: FitReport,
}

fn key(rho: f64) -> u64 {
    rho.to_bits()
}

/// Rows already in the results file. A trailing partial line left by an
/// interrupted run is cut off.
fn existing_rows(path: &Path) -> Result<Vec<SweepRow>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    let keep = bytes.iter().rposition(|b| *b == b'\n').map_or(0, |i| i + 1);
    if keep != bytes.len() {
        OpenOptions::new().write(true).open(path)?.set_len(keep as u64)?;
    }
    let mut reader = csv::Reader::from_reader(&bytes[..keep]);
    if keep > 0 {
        let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
        if header != SWEEP_HEADER {
            return Err(CliError::Config(format!("{} has an unexpected header", path.display())));
        }
    }
    Ok(reader.deserialize().collect::<std::result::Result<_, _>>()?)
}

fn slope_check(samples: &[(f64, f64)], target: f64) -> Result<SlopeCheck> {
    let fit = fit_decay(samples)?;
    let rel_dev = ((fit.slope - target) / target).abs();
    Ok(SlopeCheck {
        fit,
        target,
        rel_dev,
        pass: rel_dev <= 0.1,
    })
}

/// Runs the pole solver over the configured `rho` grid, appending each new
/// row to `sweep-<hash>.csv` in grid order. Rows already present for the
/// same configuration hash are reused.
pub fn sweep(cfg: &RunConfig, n: usize, out_dir: &Path) -> Result<SweepOutcome> {
    std::fs::create_dir_all(out_dir)?;
    let hash = cfg.sweep_hash(n);
    let results = out_dir.join(format!("sweep-{hash}.csv"));
    let grid = cfg.sweep.grid();
    let mut done: BTreeMap<u64, SweepRow> = existing_rows(&results)?.into_iter().map(|r| (key(r.rho), r)).collect();
    let resumed = grid.iter().filter(|r| done.contains_key(&key(**r))).count();
    let todo: Vec<f64> = grid.iter().copied().filter(|r| !done.contains_key(&key(*r))).collect();

    let setup = Setup::new(cfg)?;
    let state = setup
        .states
        .iter()
        .find(|s| s.index == n)
        .ok_or_else(|| CliError::Config(format!("trap level {n} does not exist ({} found)", setup.states.len())))?;
    let compute = |rho: f64| -> Result<SweepRow> {
        let measure = cfg.measure_at(rho)?;
        let sys = setup.system(cfg, &measure, n)?;
        let mut row = SweepRow::from(&sys.find_pole(&cfg.pole_options())?);
        row.rho = rho;
        Ok(row)
    };

    let fresh = results.metadata().map(|m| m.len() == 0).unwrap_or(true);
    let file = OpenOptions::new().create(true).append(true).open(&results)?;
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    if fresh {
        writer.write_record(SWEEP_HEADER)?;
        writer.flush()?;
    }

    let mut failures = Vec::new();
    let mut first_error: Option<CliError> = None;
    let mut write_error: Option<CliError> = None;
    let (tx, rx) = mpsc::channel::<(usize, Result<SweepRow>)>();
    std::thread::scope(|s| {
        let todo = &todo;
        let compute = &compute;
        s.spawn(move || {
            todo.par_iter()
                .enumerate()
                .for_each_with(tx, |tx, (i, rho)| {
                    let _ = tx.send((i, compute(*rho)));
                });
        });
        let mut pending = BTreeMap::new();
        let mut next = 0;
        for (i, r) in rx {
            pending.insert(i, r);
            while let Some(r) = pending.remove(&next) {
                match r {
                    Ok(row) => {
                        if write_error.is_none() {
                            if let Err(e) = writer.serialize(row).and_then(|_| writer.flush().map_err(Into::into)) {
                                write_error = Some(e.into());
                            }
                        }
                        done.insert(key(row.rho), row);
                    }
                    Err(e) => {
                        failures.push(SweepFailure {
                            rho: todo[next],
                            error: e.to_string(),
                            exit_code: e.exit_code(),
                        });
                        first_error.get_or_insert(e);
                    }
                }
                next += 1;
            }
        }
    });
    if let Some(e) = write_error {
        return Err(e);
    }

    let rows: Vec<SweepRow> = grid.iter().filter_map(|r| done.get(&key(*r)).copied()).collect();
    let segment = setup.modes.iter().filter(|m| m.energy < state.energy).count();
    let open_threshold = segment.checked_sub(1).map(|j| setup.modes[j].energy);
    let mut notes = Vec::new();
    let gamma = match open_threshold {
        Some(e_j) if rows.len() >= 4 => {
            Some(slope_check(&rows.iter().map(|r| (r.rho, r.gamma)).collect::<Vec<_>>(), -2.0 * e_j.abs().sqrt())?)
        }
        Some(_) => {
            notes.push("fewer than 4 rows; no width fit".into());
            None
        }
        None => {
            notes.push("no open channel: the pole is real and has no width".into());
            None
        }
    };
    let shift_target = -(2.0 * state.energy.abs()).sqrt();
    let shifts: Vec<(f64, f64)> = rows.iter().map(|r| (r.rho, (r.re_z - state.energy).abs())).collect();
    let shift = if rows.len() >= 4 {
        match fit_decay(&shifts) {
            Ok(fit) => Some(SlopeCheck {
                rel_dev: ((fit.slope - shift_target) / shift_target).abs(),
                pass: fit.slope <= 0.9 * shift_target,
                fit,
                target: shift_target,
            }),
            Err(e) => {
                notes.push(format!("shift fit: {e}"));
                None
            }
        }
    } else {
        None
    };
    let leading_gap: Vec<f64> = rows
        .iter()
        .filter(|r| r.gamma_leading != 0.0)
        .map(|r| ((r.im_z - r.gamma_leading) / r.gamma_leading).abs())
        .collect();
    let synthetic: Vec<(f64, f64)> = (0..6).map(|k| (1.0 + 0.5 * k as f64, (-2.0 * (1.0 + 0.5 * k as f64)).exp())).collect();
    let report = FitReport {
        config_hash: hash.clone(),
        n,
        trap_energy: state.energy,
        segment,
        open_threshold,
        rows: rows.len(),
        resumed,
        gamma,
        shift,
        leading_gap_decreasing: leading_gap.windows(2).all(|w| w[1] < w[0]),
        leading_gap,
        self_test: slope_check(&synthetic, -2.0)?,
        failures,
        notes,
    };
    let report_path = out_dir.join(format!("fit-{hash}.json"));
    std::fs::write(&report_path, serde_json::to_string_pretty(&report)? + "\n")?;
    write_plot(&out_dir.join(format!("gamma-{hash}.dat")), rows.iter().map(|r| (r.rho, r.gamma)))?;
    write_plot(&out_dir.join(format!("shift-{hash}.dat")), shifts.into_iter())?;
    if let Some(first) = first_error {
        return Err(CliError::PartialSweep {
            failed: report.failures.len(),
            total: grid.len(),
            first: Box::new(first),
        });
    }
    Ok(SweepOutcome {
        results,
        report_path,
        report,
    })
}

/// Two whitespace-separated columns, one point per line.
fn write_plot(path: &Path, points: impl Iterator<Item = (f64, f64)>) -> Result<()> {
    let mut f = std::io::BufWriter::new(File::create(path)?);
    for (x, y) in points {
        writeln!(f, "{x:e} {y:e}")?;
    }
    f.flush()?;
    Ok(())
}
