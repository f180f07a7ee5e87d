//! Analytic initial configurations.
//!
//! The H, V and Table-style D seeds are the kinks of the one-field models
//! obtained by freezing the state on a straight line through two vacua
//! (`psi = ±psi0`, `phi = ±phi0`, or the ray `psi = (psi0/phi0) phi`). They
//! are not solutions of the coupled equations; the relaxer takes them from
//! there. For `phi0 == psi0 == a` the potential is
//! `(lambda^2 / 2) [phi^2 (psi^2 - a^2)^2 + psi^2 (phi^2 - a^2)^2]` with
//! `lambda = sqrt 2`, and static D kinks solve the first-order system
//!
//! ```text
//! phi' = -lambda phi (psi^2 - a^2),    psi' = -lambda psi (phi^2 - a^2)
//! ```
//!
//! whose symmetric solution is known in closed form.

use serde::{Deserialize, Serialize};

use crate::charges::{Family, SectorLabel};
use crate::error::{Error, Result};
use crate::lattice::{FieldState, Grid};
use crate::model::{ModelParams, Vacuum};

/// Coupling of the first-order reduction. Matching the reduced potential to
/// the model requires `lambda^2 / 2 = 1`.
pub const LAMBDA: f64 = std::f64::consts::SQRT_2;

/// RK4 sub-steps per grid interval in [`bps_integrate`].
pub const BPS_SUBSTEPS: usize = 16;

/// Default displacement of the BPS starting point from its corner vacuum.
pub const BPS_START_OFFSET: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SeedKind {
    H,
    V,
    DTable1,
    DExactSymmetric,
    BpsD,
}

/// Recipe for an initial configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeedSpec {
    pub kind: SeedKind,
    pub sector: SectorLabel,
    pub center: f64,
    pub velocity: f64,
}

impl SeedSpec {
    /// The analytic constrained seed for `sector`, at rest at `center`.
    pub fn for_sector(sector: SectorLabel, center: f64) -> Self {
        let kind = match sector.family() {
            Family::H => SeedKind::H,
            Family::V => SeedKind::V,
            Family::D => SeedKind::DTable1,
        };
        SeedSpec { kind, sector, center, velocity: 0.0 }
    }

    pub fn build(&self, grid: Grid, p: &ModelParams) -> Result<FieldState> {
        if !(self.velocity.abs() < 1.0) {
            return Err(Error::InvalidInput(format!(
                "seed velocity must satisfy |v| < 1, got {}",
                self.velocity
            )));
        }
        let family = self.sector.family();
        let (from, to) = (self.sector.from_vacuum(), self.sector.to_vacuum());
        let wrong_family = || {
            Error::InvalidInput(format!("{:?} seed cannot build sector {}", self.kind, self.sector))
        };
        let state = match self.kind {
            SeedKind::H if family == Family::H => {
                let (fp, fs) = from.signs();
                let (tp, _) = to.signs();
                debug_assert_eq!(fp, -tp);
                seed_h(grid, tp, fs, self.center, p)?
            }
            SeedKind::V if family == Family::V => {
                let (fp, fs) = from.signs();
                let (_, ts) = to.signs();
                debug_assert_eq!(fs, -ts);
                seed_v(grid, ts, fp, self.center, p)?
            }
            SeedKind::DTable1 if family == Family::D => {
                seed_d_table1(grid, self.sector, self.center, p)?
            }
            SeedKind::DExactSymmetric if family == Family::D => {
                seed_d_exact_symmetric(grid, self.sector, self.center, p)?
            }
            SeedKind::BpsD if family == Family::D => {
                require_symmetric(p)?;
                let corner = self.sector.corner().expect("D sector has a corner");
                let start = bps_start(corner, p.phi0, BPS_START_OFFSET);
                let s = bps_integrate(grid, p.phi0, start)?;
                if self.sector.from_vacuum().is_center() {
                    s
                } else {
                    s.reflected_onto(grid)?
                }
            }
            _ => return Err(wrong_family()),
        };
        if self.velocity == 0.0 {
            Ok(state)
        } else {
            boost(&state, self.velocity)
        }
    }
}

fn check_sign(name: &str, s: i8) -> Result<f64> {
    match s {
        1 | -1 => Ok(s as f64),
        _ => Err(Error::InvalidInput(format!("{name} must be +1 or -1, got {s}"))),
    }
}

fn require_symmetric(p: &ModelParams) -> Result<()> {
    if p.is_symmetric() {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "the first-order reduction needs phi0 == psi0, got ({}, {})",
            p.phi0, p.psi0
        )))
    }
}

/// Horizontal kink `phi = sign phi0 tanh(sqrt2 phi0 psi0 (x - center))` at
/// constant `psi = psi_branch psi0`.
pub fn seed_h(grid: Grid, sign: i8, psi_branch: i8, center: f64, p: &ModelParams) -> Result<FieldState> {
    let s = check_sign("sign", sign)?;
    let b = check_sign("psi_branch", psi_branch)?;
    let k = std::f64::consts::SQRT_2 * p.phi0 * p.psi0;
    FieldState::from_profile(grid, |x| (s * p.phi0 * (k * (x - center)).tanh(), b * p.psi0))
}

/// Vertical kink `psi = sign psi0 tanh(sqrt2 phi0 psi0 (x - center))` at
/// constant `phi = phi_branch phi0`.
pub fn seed_v(grid: Grid, sign: i8, phi_branch: i8, center: f64, p: &ModelParams) -> Result<FieldState> {
    let s = check_sign("sign", sign)?;
    let b = check_sign("phi_branch", phi_branch)?;
    let k = std::f64::consts::SQRT_2 * p.phi0 * p.psi0;
    FieldState::from_profile(grid, |x| (b * p.phi0, s * p.psi0 * (k * (x - center)).tanh()))
}

/// `1 / (1 + exp(-z))` without overflow.
fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn d_orientation(sector: SectorLabel) -> Result<(f64, f64, f64)> {
    let corner = sector
        .corner()
        .ok_or_else(|| Error::InvalidInput(format!("{sector} is not a D sector")))?;
    let (sp, ss) = corner.signs();
    // +1 when the profile climbs from the centre to the corner
    let dir = if sector.from_vacuum() == Vacuum::A { 1.0 } else { -1.0 };
    Ok((sp as f64, ss as f64, dir))
}

/// Diagonal kink on the ray from `A` to the sector's corner:
/// `(phi, psi) = t (±phi0, ±psi0)` with
/// `t^2 = 1 / (1 + exp(∓2 sqrt2 phi0 psi0 (x - center)))`.
pub fn seed_d_table1(grid: Grid, sector: SectorLabel, center: f64, p: &ModelParams) -> Result<FieldState> {
    let (sp, ss, dir) = d_orientation(sector)?;
    let k = 2.0 * std::f64::consts::SQRT_2 * p.phi0 * p.psi0;
    FieldState::from_profile(grid, |x| {
        let t = logistic(dir * k * (x - center)).sqrt();
        (sp * p.phi0 * t, ss * p.psi0 * t)
    })
}

/// Exact static D solution for `phi0 == psi0 == a`:
/// `phi^2 = psi^2 = (a^2 / 2) [1 ± tanh(lambda a^2 (x - center))]`, with the
/// signs of `phi` and `psi` taken from the sector's corner.
pub fn seed_d_exact_symmetric(
    grid: Grid,
    sector: SectorLabel,
    center: f64,
    p: &ModelParams,
) -> Result<FieldState> {
    require_symmetric(p)?;
    let (sp, ss, dir) = d_orientation(sector)?;
    let a = p.phi0;
    FieldState::from_profile(grid, |x| {
        let u = a * logistic(2.0 * dir * LAMBDA * a * a * (x - center)).sqrt();
        (sp * u, ss * u)
    })
}

/// Point at distance `offset` from the corner vacuum `corner` of the
/// `phi0 == psi0 == a` model, displaced towards the centre. That is the
/// direction along which the first-order flow, run backwards in `x`, leaves
/// the corner.
pub fn bps_start(corner: Vacuum, a: f64, offset: f64) -> (f64, f64) {
    let (sp, ss) = corner.signs();
    let r = a - offset / std::f64::consts::SQRT_2;
    (sp as f64 * r, ss as f64 * r)
}

fn bps_flow(a: f64, phi: f64, psi: f64) -> (f64, f64) {
    (
        -LAMBDA * phi * (psi * psi - a * a),
        -LAMBDA * psi * (phi * phi - a * a),
    )
}

/// Integrates the first-order system from `start` (placed at the right end
/// of the grid, next to a corner vacuum) leftwards with fixed-step RK4. The
/// result is a D kink from the central vacuum to that corner.
pub fn bps_integrate(grid: Grid, a: f64, start: (f64, f64)) -> Result<FieldState> {
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::InvalidInput(format!("scale must be positive, got {a}")));
    }
    let (phi0, psi0) = start;
    if !(phi0.is_finite() && psi0.is_finite()) || phi0 == 0.0 || psi0 == 0.0 {
        return Err(Error::InvalidInput(format!("start ({phi0}, {psi0}) is not near a corner")));
    }
    let corner_dist = (phi0.abs() - a).hypot(psi0.abs() - a);
    if corner_dist > 0.05 * a {
        return Err(Error::InvalidInput(format!(
            "start ({phi0}, {psi0}) is {corner_dist:.3e} from the nearest corner vacuum"
        )));
    }
    let n = grid.n;
    let h = -grid.eps() / BPS_SUBSTEPS as f64;
    let mut phi = vec![0.0; n];
    let mut psi = vec![0.0; n];
    let (mut u, mut w) = start;
    phi[n - 1] = u;
    psi[n - 1] = w;
    for i in (0..n - 1).rev() {
        for _ in 0..BPS_SUBSTEPS {
            let k1 = bps_flow(a, u, w);
            let k2 = bps_flow(a, u + 0.5 * h * k1.0, w + 0.5 * h * k1.1);
            let k3 = bps_flow(a, u + 0.5 * h * k2.0, w + 0.5 * h * k2.1);
            let k4 = bps_flow(a, u + h * k3.0, w + h * k3.1);
            u += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
            w += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        }
        if !(u.abs() <= 10.0 * a && w.abs() <= 10.0 * a) {
            return Err(Error::NonConvergence(format!(
                "first-order integration diverged at x = {} ({u}, {w})",
                grid.x(i)
            )));
        }
        phi[i] = u;
        psi[i] = w;
    }
    FieldState::at_rest(grid, phi, psi)
}

/// Centre `x0` of the closed-form symmetric solution passing through
/// `(u, u)` at position `x`.
pub fn symmetric_center_through(x: f64, u: f64, a: f64) -> f64 {
    x + ((a * a) / (u * u) - 1.0).ln() / (2.0 * LAMBDA * a * a)
}

/// Residual of the D-orbit law
/// `(phi^2 - phi0^2) - phi0^2 ln(phi^2/phi0^2) = (psi^2 - psi0^2) - psi0^2 ln(psi^2/psi0^2)`.
pub fn orbit_residual(phi: f64, psi: f64, p: &ModelParams) -> Result<f64> {
    if phi == 0.0 || psi == 0.0 || !phi.is_finite() || !psi.is_finite() {
        return Err(Error::OrbitDomain { phi, psi });
    }
    let side = |f: f64, f0: f64| {
        let r = (f * f) / (f0 * f0);
        f0 * f0 * (r - 1.0 - r.ln())
    };
    Ok(side(phi, p.phi0) - side(psi, p.psi0))
}

/// Catmull-Rom interpolation of uniformly sampled data; constant outside.
struct Resampler<'a> {
    grid: Grid,
    f: &'a [f64],
}

impl Resampler<'_> {
    /// Value and slope at `x`.
    fn eval(&self, x: f64) -> (f64, f64) {
        let n = self.grid.n;
        let eps = self.grid.eps();
        if x <= self.grid.x_min {
            return (self.f[0], 0.0);
        }
        if x >= self.grid.x_max {
            return (self.f[n - 1], 0.0);
        }
        let r = (x - self.grid.x_min) / eps;
        let i = (r.floor() as usize).min(n - 2);
        let t = r - i as f64;
        let at = |k: isize| self.f[(i as isize + k).clamp(0, n as isize - 1) as usize];
        let (p0, p1, p2, p3) = (at(-1), at(0), at(1), at(2));
        let m1 = 0.5 * (p2 - p0);
        let m2 = 0.5 * (p3 - p1);
        let (t2, t3) = (t * t, t * t * t);
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * p1
            + (t3 - 2.0 * t2 + t) * m1
            + (-2.0 * t3 + 3.0 * t2) * p2
            + (t3 - t2) * m2;
        let dv = (6.0 * t2 - 6.0 * t) * p1
            + (3.0 * t2 - 4.0 * t + 1.0) * m1
            + (-6.0 * t2 + 6.0 * t) * p2
            + (3.0 * t2 - 2.0 * t) * m2;
        (v, dv / eps)
    }
}

/// Lorentz boost of a static state: `f(x) -> f(gamma x)` with time
/// derivative `-gamma v f'(gamma x)`, i.e. the moving solution at `t = 0`.
pub fn boost(s: &FieldState, v: f64) -> Result<FieldState> {
    if !(v.abs() < 1.0) {
        return Err(Error::InvalidInput(format!("boost velocity must satisfy |v| < 1, got {v}")));
    }
    if !s.is_static() {
        return Err(Error::Precondition("only static states can be boosted".into()));
    }
    if v == 0.0 {
        return Ok(s.clone());
    }
    let gamma = 1.0 / (1.0 - v * v).sqrt();
    let g = s.grid;
    let rp = Resampler { grid: g, f: &s.phi };
    let rs = Resampler { grid: g, f: &s.psi };
    let mut out = s.clone();
    for i in 0..g.n {
        let xb = gamma * g.x(i);
        let (fp, dp) = rp.eval(xb);
        let (fs, ds) = rs.eval(xb);
        out.phi[i] = fp;
        out.psi[i] = fs;
        out.phi_t[i] = -gamma * v * dp;
        out.psi_t[i] = -gamma * v * ds;
    }
    // the outermost samples are untouched so the boundary values stay exact
    for i in [0, g.n - 1] {
        out.phi[i] = s.phi[i];
        out.psi[i] = s.psi[i];
        out.phi_t[i] = 0.0;
        out.psi_t[i] = 0.0;
    }
    Ok(out)
}

impl FieldState {
    /// Parity image resampled back onto `grid` (exact when the grid is
    /// symmetric about the origin).
    pub fn reflected_onto(&self, grid: Grid) -> Result<FieldState> {
        let r = self.reflected();
        if r.grid == grid {
            return Ok(r);
        }
        let rp = Resampler { grid: r.grid, f: &r.phi };
        let rs = Resampler { grid: r.grid, f: &r.psi };
        let (phi, psi) = grid
            .points()
            .into_iter()
            .map(|x| (rp.eval(x).0, rs.eval(x).0))
            .unzip();
        FieldState::at_rest(grid, phi, psi)
    }
}
