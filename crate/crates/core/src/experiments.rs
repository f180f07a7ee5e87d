//! Scripted experiments: soliton tracking, the stimulated decay of V-type
//! solitons, and the census of relaxed masses and charges.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::charges::{charges, classify_sector, Charge, Family, SectorLabel};
use crate::error::{Error, Result};
use crate::evolver::{evolve, EvolveConfig, RunReport};
use crate::lattice::{energy_density, fmt_sig, total_energy, FieldState, Grid};
use crate::model::{ModelParams, Vacuum};
use crate::relaxer::{relax, RelaxConfig, RelaxOutcome};
use crate::seeds::SeedSpec;

/// Fraction of [`barrier_density`] above which a site belongs to a soliton core.
pub const TRACK_THRESHOLD: f64 = 0.1;

/// Products must end further apart than this (in units of `x`) for a decay.
pub const DECAY_SEPARATION: f64 = 5.0;

/// Largest potential met on the straight segments joining adjacent vacua.
pub fn barrier_density(p: &ModelParams) -> f64 {
    let mut worst: f64 = 0.0;
    for label in SectorLabel::all() {
        let (a0, b0) = label.from_vacuum().coords(p);
        let (a1, b1) = label.to_vacuum().coords(p);
        for k in 0..=1000 {
            let t = k as f64 / 1000.0;
            worst = worst.max(p.potential(a0 + t * (a1 - a0), b0 + t * (b1 - b0)));
        }
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackedSoliton {
    /// Energy-weighted centroid of the core.
    pub position: f64,
    pub sector: SectorLabel,
    /// Energy inside the core zone.
    pub core_energy: f64,
}

/// Splits the state into near-vacuum plateaus and high-density cores and
/// labels each core by the vacua on either side. Cores flanked by the same
/// vacuum (radiation lumps) carry no charge and are skipped.
pub fn track_solitons(s: &FieldState, p: &ModelParams) -> Result<Vec<TrackedSoliton>> {
    let density = energy_density(s, p);
    let threshold = TRACK_THRESHOLD * barrier_density(p);
    let n = s.grid.n;

    let mut zones: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i < n {
        if density[i] > threshold {
            let start = i;
            while i < n && density[i] > threshold {
                i += 1;
            }
            zones.push((start, i - 1));
        } else {
            i += 1;
        }
    }
    if zones.is_empty() {
        return Ok(Vec::new());
    }
    if zones[0].0 == 0 || zones[zones.len() - 1].1 == n - 1 {
        return Err(Error::TrackingAmbiguous("a soliton core touches the boundary".into()));
    }

    // plateaus: before the first zone, between zones, after the last one
    let mut gaps = vec![(0, zones[0].0 - 1)];
    for w in zones.windows(2) {
        gaps.push((w[0].1 + 1, w[1].0 - 1));
    }
    gaps.push((zones[zones.len() - 1].1 + 1, n - 1));

    let reach = 0.5 * p.phi0.min(p.psi0);
    let plateau_vacua = gaps
        .iter()
        .map(|&(a, b)| {
            let k = (a..=b)
                .min_by(|&x, &y| density[x].total_cmp(&density[y]))
                .expect("gaps are non-empty");
            let (v, d) = p.nearest_vacuum(s.phi[k], s.psi[k]);
            if d > reach {
                Err(Error::TrackingAmbiguous(format!(
                    "plateau around x = {:.3} is {d:.3} away from any vacuum",
                    s.grid.x(k)
                )))
            } else {
                Ok(v)
            }
        })
        .collect::<Result<Vec<Vacuum>>>()?;

    let mut out = Vec::new();
    for (k, &(a, b)) in zones.iter().enumerate() {
        let (left, right) = (plateau_vacua[k], plateau_vacua[k + 1]);
        if left == right {
            continue;
        }
        let sector = SectorLabel::new(left, right).map_err(|_| {
            Error::TrackingAmbiguous(format!(
                "core at x = {:.3} joins non-adjacent vacua {left} and {right}",
                s.grid.x((a + b) / 2)
            ))
        })?;
        let (mut m, mut mx) = (0.0, 0.0);
        for j in a..=b {
            m += density[j];
            mx += density[j] * s.grid.x(j);
        }
        out.push(TrackedSoliton {
            position: mx / m,
            sector,
            core_energy: m * s.grid.eps(),
        });
    }
    Ok(out)
}

/// Scales the deviation of `phi` from the straight line joining its two
/// endpoint values by `factor`; `psi` is untouched.
pub fn pump_phi(s: &FieldState, factor: f64, p: &ModelParams) -> Result<FieldState> {
    if !(factor.is_finite() && factor > 0.0) {
        return Err(Error::InvalidPump(format!("factor must be positive, got {factor}")));
    }
    if !s.is_static() {
        return Err(Error::InvalidPump("only static states can be pumped".into()));
    }
    let n = s.grid.n;
    let (left, right) = (s.phi[0], s.phi[n - 1]);
    let mut out = s.clone();
    for i in 0..n {
        let t = i as f64 / (n - 1) as f64;
        let background = left + t * (right - left);
        out.phi[i] = s.phi[i] + (factor - 1.0) * (s.phi[i] - background);
    }
    for (phi, psi) in [out.left(), out.right()] {
        let (v, d) = p.nearest_vacuum(phi, psi);
        if d >= crate::charges::DEFAULT_SNAP_TOL {
            return Err(Error::InvalidPump(format!(
                "pumped endpoint ({phi}, {psi}) is {d:.3e} from vacuum {v}"
            )));
        }
    }
    Ok(out)
}

/// Relaxes the analytic seed of `sector` centred at `center`.
pub fn relax_sector(
    sector: SectorLabel,
    center: f64,
    grid: Grid,
    cfg: &RelaxConfig,
    p: &ModelParams,
) -> Result<RelaxOutcome> {
    let seed = SeedSpec::for_sector(sector, center).build(grid, p)?;
    relax(&seed, cfg, p)
}

/// Least-squares slope of `y` against `t`.
pub fn fit_velocity(samples: &[(f64, f64)]) -> Option<f64> {
    if samples.len() < 2 {
        return None;
    }
    let n = samples.len() as f64;
    let (st, sy) = samples.iter().fold((0.0, 0.0), |a, &(t, y)| (a.0 + t, a.1 + y));
    let (mt, my) = (st / n, sy / n);
    let (mut num, mut den) = (0.0, 0.0);
    for &(t, y) in samples {
        num += (t - mt) * (y - my);
        den += (t - mt) * (t - mt);
    }
    (den > 0.0).then(|| num / den)
}

/// Positions of the unique soliton of `sector` in each snapshot at or after `t_from`.
pub fn track_history(run: &RunReport, sector: SectorLabel, t_from: f64) -> Vec<(f64, f64)> {
    run.snapshots
        .iter()
        .filter(|s| s.t >= t_from - 1e-12)
        .filter_map(|s| {
            let mut hits = s.solitons.iter().filter(|k| k.sector == sector);
            match (hits.next(), hits.next()) {
                (Some(k), None) => Some((s.t, k.position)),
                _ => None,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayProduct {
    pub sector: SectorLabel,
    pub position: f64,
    /// Slope of position against time over the second half of the run, cut
    /// off once reflections from the boundaries can arrive.
    pub velocity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBudget {
    pub parent_rest_energy: f64,
    pub pump_energy: f64,
    pub product_rest_masses: f64,
    /// `sum (gamma_i - 1) M_i` from the measured product velocities.
    pub product_kinetic: f64,
    /// Final energy minus product rest and kinetic energy.
    pub radiation_remainder: f64,
    pub final_energy: f64,
    /// `|E_final - (E_parent + E_pump)| / (E_parent + E_pump)`.
    pub closure_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub parent: SectorLabel,
    pub pumped_factor: f64,
    pub parent_relaxed: bool,
    pub decayed: bool,
    /// Products in the final snapshot, left to right.
    pub products: Vec<DecayProduct>,
    pub energy_budget: EnergyBudget,
    pub charge_sum_matches: bool,
    /// The left product starts at the parent's left vacuum, moves left, and
    /// the right product mirrors it.
    pub chirality: Option<Chirality>,
    pub t_end: f64,
    /// Time after which radiation reflected at the pinned ends can be back at
    /// the parent's position.
    pub clean_until: f64,
    pub tracking_error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chirality {
    pub left_mover: SectorLabel,
    pub right_mover: SectorLabel,
}

/// A relaxed V-type parent plus the rest masses of its D-type decay products,
/// ready for pump-and-evolve runs.
pub struct DecayLab {
    pub parent: SectorLabel,
    pub params: ModelParams,
    pub evolve: EvolveConfig,
    pub relaxed: RelaxOutcome,
    pub split: (SectorLabel, SectorLabel),
    pub product_masses: (f64, f64),
}

impl DecayLab {
    pub fn new(
        parent: SectorLabel,
        grid: Grid,
        relax_cfg: &RelaxConfig,
        evolve_cfg: &EvolveConfig,
        p: &ModelParams,
    ) -> Result<Self> {
        if parent.family() != Family::V {
            return Err(Error::InvalidInput(format!(
                "decay experiments need a V-type parent, got {parent}"
            )));
        }
        evolve_cfg.validate(&grid)?;
        let split = parent
            .splits()
            .into_iter()
            .find(|(a, b)| a.family() == Family::D && b.family() == Family::D)
            .expect("V sectors split through the central vacuum");
        let jobs = [parent, split.0, split.1];
        let mut outcomes: Vec<RelaxOutcome> = jobs
            .par_iter()
            .map(|&l| relax_sector(l, 0.0, grid, relax_cfg, p))
            .collect::<Result<Vec<_>>>()?;
        let b = outcomes.pop().expect("three jobs");
        let a = outcomes.pop().expect("three jobs");
        let relaxed = outcomes.pop().expect("three jobs");
        Ok(DecayLab {
            parent,
            params: *p,
            evolve: *evolve_cfg,
            relaxed,
            split,
            product_masses: (a.final_energy, b.final_energy),
        })
    }

    /// Pump by `factor`, evolve, and read off the products.
    pub fn run(&self, factor: f64) -> Result<(DecayReport, RunReport)> {
        let p = &self.params;
        let parent_state = &self.relaxed.state;
        let pumped = pump_phi(parent_state, factor, p)?;
        let e_parent = self.relaxed.final_energy;
        let e_pumped = total_energy(&pumped, p);
        let run = evolve(&pumped, &self.evolve, p)?;
        let last = run.last();

        let g = parent_state.grid;
        let center = track_solitons(parent_state, p)
            .ok()
            .and_then(|v| {
                let n = v.len() as f64;
                (n > 0.0).then(|| v.iter().map(|k| k.position).sum::<f64>() / n)
            })
            .unwrap_or(0.5 * (g.x_min + g.x_max));
        let clean_until = 2.0 * (g.x_max - center).min(center - g.x_min);

        // velocities come from the second half of the window before
        // reflections from the pinned ends can reach the products
        let t_hi = last.t.min(clean_until);
        let products: Vec<DecayProduct> = last
            .solitons
            .iter()
            .map(|k| {
                let track: Vec<_> = track_history(&run, k.sector, 0.5 * t_hi)
                    .into_iter()
                    .filter(|&(t, _)| t <= t_hi + 1e-12)
                    .collect();
                DecayProduct {
                    sector: k.sector,
                    position: k.position,
                    velocity: fit_velocity(&track).unwrap_or(0.0),
                }
            })
            .collect();

        let (qh, qv) = self.parent.charges();
        let sum_h: Charge = products.iter().map(|d| d.sector.charges().0).sum();
        let sum_v: Charge = products.iter().map(|d| d.sector.charges().1).sum();
        let charge_sum_matches = !products.is_empty() && (sum_h, sum_v) == (qh, qv);

        let two_d = products.len() == 2 && products.iter().all(|d| d.sector.family() == Family::D);
        let decayed = two_d
            && charge_sum_matches
            && products[1].position - products[0].position > DECAY_SEPARATION;

        let mass_of = |l: SectorLabel| {
            if l == self.split.0 {
                self.product_masses.0
            } else if l == self.split.1 {
                self.product_masses.1
            } else {
                0.0
            }
        };
        let (rest, kinetic) = products.iter().fold((0.0, 0.0), |(r, k), d| {
            let m = mass_of(d.sector);
            let v = d.velocity.clamp(-0.999_999, 0.999_999);
            (r + m, k + (1.0 / (1.0 - v * v).sqrt() - 1.0) * m)
        });
        let e_final = last.total_energy;
        let budget = EnergyBudget {
            parent_rest_energy: e_parent,
            pump_energy: e_pumped - e_parent,
            product_rest_masses: rest,
            product_kinetic: kinetic,
            radiation_remainder: e_final - rest - kinetic,
            final_energy: e_final,
            closure_error: (e_final - e_pumped).abs() / e_pumped.abs().max(f64::MIN_POSITIVE),
        };

        let chirality = decayed.then(|| {
            let (l, r) = (products[0], products[1]);
            Chirality { left_mover: l.sector, right_mover: r.sector }
        });

        let report = DecayReport {
            parent: self.parent,
            pumped_factor: factor,
            parent_relaxed: self.relaxed.converged,
            decayed,
            products,
            energy_budget: budget,
            charge_sum_matches,
            chirality,
            t_end: last.t,
            clean_until,
            tracking_error: last.tracking_error.clone(),
        };
        Ok((report, run))
    }

    pub fn scan(&self, factors: &[f64]) -> Result<Vec<DecayReport>> {
        factors
            .par_iter()
            .map(|&f| self.run(f).map(|(r, _)| r))
            .collect()
    }
}

/// `1.1, 1.2, ..., 2.0`.
pub fn default_pump_factors() -> Vec<f64> {
    (11..=20).map(|k| k as f64 / 10.0).collect()
}

/// Relax `parent`, pump its `phi` by `factor`, evolve and classify the outcome.
pub fn decay_experiment(
    parent: SectorLabel,
    factor: f64,
    grid: Grid,
    relax_cfg: &RelaxConfig,
    evolve_cfg: &EvolveConfig,
    p: &ModelParams,
) -> Result<DecayReport> {
    DecayLab::new(parent, grid, relax_cfg, evolve_cfg, p)?
        .run(factor)
        .map(|(r, _)| r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stability {
    Stable,
    Metastable,
}

impl std::fmt::Display for Stability {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stability::Stable => "stable",
            Stability::Metastable => "metastable",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusRow {
    pub sector: SectorLabel,
    pub mass: f64,
    pub qh: Charge,
    pub qv: Charge,
    pub stability: Stability,
    pub decay_mode: Option<(SectorLabel, SectorLabel)>,
    pub converged: bool,
    pub sweeps: usize,
    /// Largest relative energy change during the stability run.
    pub energy_drift: f64,
    /// Displacement of the soliton over the stability run, when it stayed a
    /// single soliton of the original sector.
    pub center_drift: Option<f64>,
    /// Solitons found at the end of the stability run.
    pub final_solitons: Vec<SectorLabel>,
    #[serde(skip)]
    pub relaxed: Option<FieldState>,
}

impl CensusRow {
    pub fn intact(&self) -> bool {
        self.final_solitons == [self.sector]
    }
}

/// Sectors in the order of the reference mass table.
pub fn census_sectors() -> Vec<SectorLabel> {
    ["D_AB", "D_AC", "D_DA", "D_EA", "H_BC", "V_EC", "H_DE", "V_DB"]
        .iter()
        .map(|s| s.parse().expect("valid sector"))
        .collect()
}

/// A split is a decay channel when both products are lighter together than
/// the parent. Product masses are looked up by unordered vacuum pair, since
/// a sector and its parity image have the same mass.
pub fn decay_channel(
    sector: SectorLabel,
    mass: f64,
    masses: &BTreeMap<(Vacuum, Vacuum), f64>,
) -> Option<(SectorLabel, SectorLabel)> {
    let key = |l: SectorLabel| {
        let (a, b) = (l.from_vacuum(), l.to_vacuum());
        if a < b {
            (a, b)
        } else {
            (b, a)
        }
    };
    sector
        .splits()
        .into_iter()
        .filter_map(|(a, b)| {
            let m = masses.get(&key(a))? + masses.get(&key(b))?;
            (m < mass).then_some((m, (a, b)))
        })
        .min_by(|x, y| x.0.total_cmp(&y.0))
        .map(|(_, s)| s)
}

struct RowRun {
    sector: SectorLabel,
    outcome: RelaxOutcome,
    charges: (Charge, Charge),
    energy_drift: f64,
    center_drift: Option<f64>,
    final_solitons: Vec<SectorLabel>,
}

fn census_row(
    sector: SectorLabel,
    grid: Grid,
    relax_cfg: &RelaxConfig,
    evolve_cfg: &EvolveConfig,
    p: &ModelParams,
) -> Result<RowRun> {
    let outcome = relax_sector(sector, 0.0, grid, relax_cfg, p)?;
    let q = charges(&outcome.state, p)?;
    let run = evolve(&outcome.state, evolve_cfg, p)?;
    let start = &run.initial().solitons;
    let end = &run.last().solitons;
    let center_drift = match (start.as_slice(), end.as_slice()) {
        ([a], [b]) if a.sector == sector && b.sector == sector => Some((b.position - a.position).abs()),
        _ => None,
    };
    Ok(RowRun {
        sector,
        charges: q,
        energy_drift: run.max_energy_drift(),
        center_drift,
        final_solitons: end.iter().map(|k| k.sector).collect(),
        outcome,
    })
}

/// Relaxes every sector of the mass table, runs a stability evolution on
/// each, and marks a row metastable when a two-soliton split is lighter.
pub fn census(
    p: &ModelParams,
    grid: Grid,
    relax_cfg: &RelaxConfig,
    evolve_cfg: &EvolveConfig,
) -> Result<Vec<CensusRow>> {
    evolve_cfg.validate(&grid)?;
    let runs: Vec<RowRun> = census_sectors()
        .into_par_iter()
        .map(|l| census_row(l, grid, relax_cfg, evolve_cfg, p))
        .collect::<Result<Vec<_>>>()?;
    let mut masses = BTreeMap::new();
    for r in &runs {
        let (a, b) = (r.sector.from_vacuum(), r.sector.to_vacuum());
        masses.insert(if a < b { (a, b) } else { (b, a) }, r.outcome.final_energy);
    }
    Ok(runs
        .into_iter()
        .map(|r| {
            let mass = r.outcome.final_energy;
            let decay_mode = decay_channel(r.sector, mass, &masses);
            CensusRow {
                sector: r.sector,
                mass,
                qh: r.charges.0,
                qv: r.charges.1,
                stability: if decay_mode.is_some() { Stability::Metastable } else { Stability::Stable },
                decay_mode,
                converged: r.outcome.converged,
                sweeps: r.outcome.sweeps,
                energy_drift: r.energy_drift,
                center_drift: r.center_drift,
                final_solitons: r.final_solitons,
                relaxed: Some(r.outcome.state),
            }
        })
        .collect())
}

fn mean_mass(rows: &[CensusRow], family: Family) -> Option<f64> {
    let v: Vec<f64> = rows.iter().filter(|r| r.sector.family() == family).map(|r| r.mass).collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// `M(V) - 2 M(D)`, the kinetic energy two D solitons need to fuse into a V
/// soliton, from the mean census masses of each family.
pub fn binding_energy(rows: &[CensusRow]) -> Result<f64> {
    let v = mean_mass(rows, Family::V)
        .ok_or_else(|| Error::InvalidInput("census has no V-type rows".into()))?;
    let d = mean_mass(rows, Family::D)
        .ok_or_else(|| Error::InvalidInput("census has no D-type rows".into()))?;
    Ok(v - 2.0 * d)
}

pub const CENSUS_HEADER: &str = "sector,mass,QH,QV,stability,decay_mode";

pub fn write_census<W: Write>(mut w: W, rows: &[CensusRow]) -> Result<()> {
    writeln!(w, "{CENSUS_HEADER}")?;
    for r in rows {
        let mode = match r.decay_mode {
            Some((a, b)) => format!("{}->{a}+{b}", r.sector),
            None => "--".into(),
        };
        writeln!(
            w,
            "{},{},{},{},{},{mode}",
            r.sector,
            fmt_sig(r.mass),
            r.qh.value(),
            r.qv.value(),
            r.stability
        )?;
    }
    Ok(())
}

/// Classifies a relaxed state and checks it kept the seed's sector.
pub fn check_sector(s: &FieldState, expected: SectorLabel, p: &ModelParams) -> Result<()> {
    let got = classify_sector(s, p)?;
    if got != expected {
        return Err(Error::Unclassifiable(format!("expected {expected}, found {got}")));
    }
    Ok(())
}
