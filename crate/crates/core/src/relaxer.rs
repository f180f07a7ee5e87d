//! Step-wise variational minimisation of the discrete energy.
//!
//! Each sweep visits every interior site once, in a freshly shuffled order,
//! and proposes a random displacement of `(phi, psi)` there. A proposal is
//! kept only if it strictly lowers the total energy; the change is computed
//! from the site's two links and its potential term, which is exactly the
//! change of the full functional. The proposal amplitude is multiplied by
//! `anneal_factor` after every sweep that accepts nothing.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::charges::DEFAULT_SNAP_TOL;
use crate::error::{Error, Result};
use crate::lattice::{fmt_sig, total_energy, FieldState};
use crate::model::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelaxConfig {
    pub step_amplitude: f64,
    pub anneal_factor: f64,
    pub max_sweeps: usize,
    /// Convergence when the relative energy decrease over `window` sweeps
    /// falls below this.
    pub tol: f64,
    pub window: usize,
    pub rng_seed: u64,
    /// Stop once annealing has shrunk the amplitude below this.
    pub min_amplitude: f64,
}

impl Default for RelaxConfig {
    fn default() -> Self {
        RelaxConfig {
            step_amplitude: 0.01,
            anneal_factor: 0.5,
            max_sweeps: 200_000,
            tol: 1e-10,
            window: 100,
            rng_seed: 42,
            min_amplitude: 1e-9,
        }
    }
}

impl RelaxConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if !(self.step_amplitude.is_finite() && self.step_amplitude > 0.0) {
            return bad(format!("step_amplitude must be positive, got {}", self.step_amplitude));
        }
        if !(self.anneal_factor > 0.0 && self.anneal_factor < 1.0) {
            return bad(format!("anneal_factor must lie in (0, 1), got {}", self.anneal_factor));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return bad(format!("tol must be positive, got {}", self.tol));
        }
        if self.window == 0 {
            return bad("window must be at least 1".into());
        }
        if !(self.min_amplitude >= 0.0) {
            return bad(format!("min_amplitude must be non-negative, got {}", self.min_amplitude));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub sweep: usize,
    pub total_energy: f64,
    pub accepted: usize,
    pub amplitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    /// Relative decrease over the window dropped below `tol`.
    Plateau,
    /// Amplitude annealed below `min_amplitude`.
    AmplitudeExhausted,
    MaxSweeps,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RelaxOutcome {
    pub state: FieldState,
    /// Energy after each sweep, row 0 being the seed. Energies are the seed
    /// energy plus the accumulated accepted changes, so the column never
    /// increases.
    pub trace: Vec<TraceRow>,
    pub converged: bool,
    pub stop: StopReason,
    pub sweeps: usize,
    pub initial_energy: f64,
    /// Full re-integration of the returned state.
    pub final_energy: f64,
}

impl RelaxOutcome {
    pub fn energy_decrease(&self) -> f64 {
        self.initial_energy - self.final_energy
    }

    pub fn into_result(self) -> Result<RelaxOutcome> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NonConvergence(format!(
                "relaxation stopped after {} sweeps at energy {}",
                self.sweeps, self.final_energy
            )))
        }
    }
}

/// Energy change from moving site `i` (interior) to `(phi, psi)`.
#[inline]
pub fn site_energy_change(s: &FieldState, i: usize, phi: f64, psi: f64, p: &ModelParams) -> f64 {
    let eps = s.grid.eps();
    let (f, g) = (s.phi[i], s.psi[i]);
    let (df, dg) = (phi - f, psi - g);
    let link_f = df * (2.0 * f - s.phi[i - 1] - s.phi[i + 1] + df);
    let link_g = dg * (2.0 * g - s.psi[i - 1] - s.psi[i + 1] + dg);
    (link_f + link_g) / eps + eps * (p.potential(phi, psi) - p.potential(f, g))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepStats {
    pub accepted: usize,
    pub energy_change: f64,
}

/// One pass over all interior sites in random order.
pub fn sweep<R: Rng>(state: &mut FieldState, amplitude: f64, rng: &mut R, p: &ModelParams) -> SweepStats {
    let mut order: Vec<usize> = (1..state.grid.n - 1).collect();
    sweep_in_order(state, amplitude, rng, p, &mut order)
}

fn sweep_in_order<R: Rng>(
    state: &mut FieldState,
    amplitude: f64,
    rng: &mut R,
    p: &ModelParams,
    order: &mut [usize],
) -> SweepStats {
    order.shuffle(rng);
    let mut stats = SweepStats { accepted: 0, energy_change: 0.0 };
    for &i in order.iter() {
        let new_phi = state.phi[i] + amplitude * (2.0 * rng.gen::<f64>() - 1.0);
        let new_psi = state.psi[i] + amplitude * (2.0 * rng.gen::<f64>() - 1.0);
        let d = site_energy_change(state, i, new_phi, new_psi, p);
        if d < 0.0 {
            state.phi[i] = new_phi;
            state.psi[i] = new_psi;
            stats.accepted += 1;
            stats.energy_change += d;
        }
    }
    stats
}

pub fn relax(seed: &FieldState, cfg: &RelaxConfig, p: &ModelParams) -> Result<RelaxOutcome> {
    cfg.validate()?;
    seed.validate()?;
    if !seed.is_static() {
        return Err(Error::Precondition("relaxation needs a static seed".into()));
    }
    for (phi, psi) in [seed.left(), seed.right()] {
        let (v, d) = p.nearest_vacuum(phi, psi);
        if d >= DEFAULT_SNAP_TOL {
            return Err(Error::Precondition(format!(
                "endpoint ({phi}, {psi}) is {d:.3e} away from vacuum {v}; boundaries must be pinned at vacua"
            )));
        }
    }

    let mut state = seed.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut order: Vec<usize> = (1..state.grid.n - 1).collect();
    let mut amplitude = cfg.step_amplitude;
    let initial_energy = total_energy(&state, p);
    let mut energy = initial_energy;
    let mut trace = Vec::with_capacity(cfg.max_sweeps.min(1 << 16) + 1);
    trace.push(TraceRow { sweep: 0, total_energy: energy, accepted: 0, amplitude });

    let mut stop = StopReason::MaxSweeps;
    let mut sweeps = 0;
    for k in 1..=cfg.max_sweeps {
        sweeps = k;
        let used = amplitude;
        let stats = sweep_in_order(&mut state, used, &mut rng, p, &mut order);
        energy += stats.energy_change;
        trace.push(TraceRow { sweep: k, total_energy: energy, accepted: stats.accepted, amplitude: used });
        if stats.accepted == 0 {
            amplitude *= cfg.anneal_factor;
            if amplitude < cfg.min_amplitude {
                stop = StopReason::AmplitudeExhausted;
                break;
            }
        }
        if k >= cfg.window {
            let before = trace[k - cfg.window].total_energy;
            if before - energy < cfg.tol * energy.abs().max(f64::MIN_POSITIVE) {
                stop = StopReason::Plateau;
                break;
            }
        }
    }
    let final_energy = total_energy(&state, p);
    Ok(RelaxOutcome {
        state,
        trace,
        converged: stop != StopReason::MaxSweeps,
        stop,
        sweeps,
        initial_energy,
        final_energy,
    })
}

pub const TRACE_HEADER: &str = "sweep,total_energy,accepted,amplitude";

pub fn write_trace<W: Write>(mut w: W, trace: &[TraceRow]) -> Result<()> {
    writeln!(w, "{TRACE_HEADER}")?;
    for r in trace {
        writeln!(w, "{},{},{},{}", r.sweep, fmt_sig(r.total_energy), r.accepted, fmt_sig(r.amplitude))?;
    }
    Ok(())
}
