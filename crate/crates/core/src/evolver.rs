//! Leapfrog (kick-drift-kick) integration of the coupled field equations
//! `phi_tt = phi_xx - dV/dphi`, `psi_tt = psi_xx - dV/dpsi` with both
//! endpoints held fixed.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::charges::{charges, Charge};
use crate::error::{Error, Result};
use crate::experiments::{track_solitons, TrackedSoliton};
use crate::lattice::{fmt_sig, save_snapshot, total_energy, total_momentum, FieldState, Grid};
use crate::model::ModelParams;

/// Largest `dt / eps` accepted; the characteristic speed is 1.
pub const CFL_LIMIT: f64 = 0.5;

/// Blow-up threshold in units of `max(phi0, psi0)`.
pub const BLOW_UP_FACTOR: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Boundary {
    /// Endpoints keep their initial values and have zero velocity.
    Pinned,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveConfig {
    pub dt: f64,
    pub t_end: f64,
    pub snapshot_every: usize,
    pub boundary: Boundary,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        EvolveConfig::for_grid(&Grid::default())
    }
}

impl EvolveConfig {
    /// `dt = 0.4 eps`, `t_end = 50`, a snapshot per unit time.
    pub fn for_grid(grid: &Grid) -> Self {
        let dt = 0.4 * grid.eps();
        EvolveConfig {
            dt,
            t_end: 50.0,
            snapshot_every: ((1.0 / dt).round() as usize).max(1),
            boundary: Boundary::Pinned,
        }
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidInput(format!("dt must be positive, got {}", self.dt)));
        }
        if self.dt > CFL_LIMIT * grid.eps() {
            return Err(Error::InvalidInput(format!(
                "dt = {} violates dt <= {CFL_LIMIT} eps = {}",
                self.dt,
                CFL_LIMIT * grid.eps()
            )));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(Error::InvalidInput(format!("t_end must be non-negative, got {}", self.t_end)));
        }
        if self.snapshot_every == 0 {
            return Err(Error::InvalidInput("snapshot_every must be at least 1".into()));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}

/// `phi_xx - dV/dphi` and `psi_xx - dV/dpsi` at interior sites, zero at the ends.
pub fn accelerations(s: &FieldState, p: &ModelParams, acc_phi: &mut [f64], acc_psi: &mut [f64]) {
    let n = s.grid.n;
    let inv = 1.0 / (s.grid.eps() * s.grid.eps());
    acc_phi[0] = 0.0;
    acc_psi[0] = 0.0;
    acc_phi[n - 1] = 0.0;
    acc_psi[n - 1] = 0.0;
    for i in 1..n - 1 {
        let (gp, gs) = p.grad_potential(s.phi[i], s.psi[i]);
        acc_phi[i] = (s.phi[i - 1] - 2.0 * s.phi[i] + s.phi[i + 1]) * inv - gp;
        acc_psi[i] = (s.psi[i - 1] - 2.0 * s.psi[i] + s.psi[i + 1]) * inv - gs;
    }
}

/// Integrator with a cached acceleration so each step costs one force
/// evaluation.
pub struct Leapfrog {
    acc_phi: Vec<f64>,
    acc_psi: Vec<f64>,
    fresh: bool,
    steps: usize,
    limit: f64,
}

impl Leapfrog {
    pub fn new(grid: &Grid, p: &ModelParams) -> Self {
        Leapfrog {
            acc_phi: vec![0.0; grid.n],
            acc_psi: vec![0.0; grid.n],
            fresh: false,
            steps: 0,
            limit: BLOW_UP_FACTOR * p.phi0.max(p.psi0),
        }
    }

    pub fn steps_taken(&self) -> usize {
        self.steps
    }

    /// Advances `s` by `dt` (which may be negative).
    pub fn advance(&mut self, s: &mut FieldState, dt: f64, p: &ModelParams) -> Result<()> {
        let n = s.grid.n;
        if !self.fresh {
            accelerations(s, p, &mut self.acc_phi, &mut self.acc_psi);
        }
        let half = 0.5 * dt;
        for i in 1..n - 1 {
            s.phi_t[i] += half * self.acc_phi[i];
            s.psi_t[i] += half * self.acc_psi[i];
            s.phi[i] += dt * s.phi_t[i];
            s.psi[i] += dt * s.psi_t[i];
        }
        for i in [0, n - 1] {
            s.phi_t[i] = 0.0;
            s.psi_t[i] = 0.0;
        }
        accelerations(s, p, &mut self.acc_phi, &mut self.acc_psi);
        self.fresh = true;
        let mut bad = false;
        for i in 1..n - 1 {
            s.phi_t[i] += half * self.acc_phi[i];
            s.psi_t[i] += half * self.acc_psi[i];
            bad |= !(s.phi[i].abs() <= self.limit && s.psi[i].abs() <= self.limit);
        }
        self.steps += 1;
        if bad {
            return Err(Error::BlowUp { step: self.steps, t: self.steps as f64 * dt });
        }
        Ok(())
    }

    /// Forget the cached acceleration (after the state was changed externally).
    pub fn invalidate(&mut self) {
        self.fresh = false;
    }
}

fn check_dt(dt: f64, grid: &Grid) -> Result<()> {
    if !dt.is_finite() || dt.abs() > CFL_LIMIT * grid.eps() {
        return Err(Error::InvalidInput(format!(
            "|dt| = {} violates the limit {}",
            dt.abs(),
            CFL_LIMIT * grid.eps()
        )));
    }
    Ok(())
}

/// One kick-drift-kick step. Time-reversible: `step(step(s, dt), -dt)`
/// returns `s` up to round-off.
pub fn step(s: &FieldState, dt: f64, p: &ModelParams) -> Result<FieldState> {
    check_dt(dt, &s.grid)?;
    let mut out = s.clone();
    Leapfrog::new(&s.grid, p).advance(&mut out, dt, p)?;
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Snapshot {
    pub step: usize,
    pub t: f64,
    pub total_energy: f64,
    pub total_momentum: f64,
    /// `(Q_H, Q_V)`, absent when the ends are not near vacua.
    pub charges: Option<(Charge, Charge)>,
    pub solitons: Vec<TrackedSoliton>,
    pub tracking_error: Option<String>,
    pub state: FieldState,
}

impl Snapshot {
    fn take(step: usize, t: f64, s: &FieldState, p: &ModelParams) -> Snapshot {
        let (solitons, tracking_error) = match track_solitons(s, p) {
            Ok(v) => (v, None),
            Err(e) => (Vec::new(), Some(e.to_string())),
        };
        Snapshot {
            step,
            t,
            total_energy: total_energy(s, p),
            total_momentum: total_momentum(s),
            charges: charges(s, p).ok(),
            solitons,
            tracking_error,
            state: s.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub params: ModelParams,
    pub config: EvolveConfig,
    pub snapshots: Vec<Snapshot>,
}

impl RunReport {
    pub fn initial(&self) -> &Snapshot {
        &self.snapshots[0]
    }

    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("a run has at least one snapshot")
    }

    pub fn final_state(&self) -> &FieldState {
        &self.last().state
    }

    /// Largest `|E(t) - E(0)| / E(0)` over the snapshots (absolute when `E(0) = 0`).
    pub fn max_energy_drift(&self) -> f64 {
        let e0 = self.initial().total_energy;
        let scale = if e0.abs() > 0.0 { e0.abs() } else { 1.0 };
        self.snapshots
            .iter()
            .map(|s| (s.total_energy - e0).abs() / scale)
            .fold(0.0, f64::max)
    }

    pub fn charges_conserved(&self) -> bool {
        let q0 = self.initial().charges;
        q0.is_some() && self.snapshots.iter().all(|s| s.charges == q0)
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }
}

pub fn evolve(s: &FieldState, cfg: &EvolveConfig, p: &ModelParams) -> Result<RunReport> {
    cfg.validate(&s.grid)?;
    s.validate()?;
    let mut state = s.clone();
    let mut lf = Leapfrog::new(&s.grid, p);
    let steps = cfg.steps();
    let mut snapshots = vec![Snapshot::take(0, 0.0, &state, p)];
    for k in 1..=steps {
        lf.advance(&mut state, cfg.dt, p)?;
        if k % cfg.snapshot_every == 0 || k == steps {
            snapshots.push(Snapshot::take(k, k as f64 * cfg.dt, &state, p));
        }
    }
    Ok(RunReport { params: *p, config: *cfg, snapshots })
}

pub const INDEX_HEADER: &str = "t,snapshot_path,total_energy,QH,QV";

/// Writes one lattice CSV per snapshot into `dir` plus `index.csv`.
pub fn write_run(dir: &Path, report: &RunReport) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let index_path = dir.join("index.csv");
    let mut index = BufWriter::new(fs::File::create(&index_path)?);
    writeln!(index, "{INDEX_HEADER}")?;
    for snap in &report.snapshots {
        let name = format!("snapshot_{:06}.csv", snap.step);
        save_snapshot(&dir.join(&name), &snap.state, &report.params)?;
        let (qh, qv) = match snap.charges {
            Some((h, v)) => (h.value().to_string(), v.value().to_string()),
            None => ("nan".into(), "nan".into()),
        };
        writeln!(index, "{},{name},{},{qh},{qv}", fmt_sig(snap.t), fmt_sig(snap.total_energy))?;
    }
    index.flush()?;
    Ok(index_path)
}
