//! The self-interaction potential, its gradient and its vacuum set.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Field scales `phi0` and `psi0` of the potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub phi0: f64,
    pub psi0: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams { phi0: 1.0, psi0: 2.0 }
    }
}

impl ModelParams {
    pub fn new(phi0: f64, psi0: f64) -> Result<Self> {
        let p = ModelParams { phi0, psi0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.phi0.is_finite() && self.psi0.is_finite() && self.phi0 > 0.0 && self.psi0 > 0.0)
        {
            return Err(Error::InvalidInput(format!(
                "field scales must be positive and finite, got phi0 = {}, psi0 = {}",
                self.phi0, self.psi0
            )));
        }
        Ok(())
    }

    /// `phi0 == psi0`, the case with the `phi <-> psi` duality and the
    /// first-order (BPS) reduction.
    pub fn is_symmetric(&self) -> bool {
        self.phi0 == self.psi0
    }

    #[inline]
    pub fn potential(&self, phi: f64, psi: f64) -> f64 {
        let a = psi * psi - self.psi0 * self.psi0;
        let b = phi * phi - self.phi0 * self.phi0;
        phi * phi * a * a + psi * psi * b * b
    }

    /// `(dV/dphi, dV/dpsi)`.
    #[inline]
    pub fn grad_potential(&self, phi: f64, psi: f64) -> (f64, f64) {
        let a = psi * psi - self.psi0 * self.psi0;
        let b = phi * phi - self.phi0 * self.phi0;
        (
            2.0 * phi * a * a + 4.0 * phi * psi * psi * b,
            2.0 * psi * b * b + 4.0 * psi * phi * phi * a,
        )
    }

    pub fn vacua(&self) -> [VacuumPoint; 5] {
        Vacuum::ALL.map(|label| {
            let (phi, psi) = label.coords(self);
            VacuumPoint { label, phi, psi }
        })
    }

    /// The vacuum closest (euclidean, in field space) to `(phi, psi)` and its distance.
    pub fn nearest_vacuum(&self, phi: f64, psi: f64) -> (Vacuum, f64) {
        let mut best = (Vacuum::A, f64::INFINITY);
        for v in Vacuum::ALL {
            let (vp, vs) = v.coords(self);
            let d = (phi - vp).hypot(psi - vs);
            if d < best.1 {
                best = (v, d);
            }
        }
        best
    }
}

/// Labels of the five vacua.
///
/// `A` is the origin, the corners are `B = (-phi0, psi0)`, `C = (phi0, psi0)`,
/// `D = (-phi0, -psi0)` and `E = (phi0, -psi0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Vacuum {
    A,
    B,
    C,
    D,
    E,
}

impl Vacuum {
    pub const ALL: [Vacuum; 5] = [Vacuum::A, Vacuum::B, Vacuum::C, Vacuum::D, Vacuum::E];

    /// Signs `(s_phi, s_psi)` of the vacuum coordinates; zero for the centre.
    pub fn signs(self) -> (i8, i8) {
        match self {
            Vacuum::A => (0, 0),
            Vacuum::B => (-1, 1),
            Vacuum::C => (1, 1),
            Vacuum::D => (-1, -1),
            Vacuum::E => (1, -1),
        }
    }

    pub fn from_signs(s_phi: i8, s_psi: i8) -> Option<Vacuum> {
        Vacuum::ALL.into_iter().find(|v| v.signs() == (s_phi, s_psi))
    }

    pub fn coords(self, p: &ModelParams) -> (f64, f64) {
        let (sp, ss) = self.signs();
        (sp as f64 * p.phi0, ss as f64 * p.psi0)
    }

    pub fn is_center(self) -> bool {
        self == Vacuum::A
    }

    pub fn as_char(self) -> char {
        match self {
            Vacuum::A => 'A',
            Vacuum::B => 'B',
            Vacuum::C => 'C',
            Vacuum::D => 'D',
            Vacuum::E => 'E',
        }
    }
}

impl fmt::Display for Vacuum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

impl TryFrom<char> for Vacuum {
    type Error = Error;

    fn try_from(c: char) -> Result<Self> {
        match c {
            'A' => Ok(Vacuum::A),
            'B' => Ok(Vacuum::B),
            'C' => Ok(Vacuum::C),
            'D' => Ok(Vacuum::D),
            'E' => Ok(Vacuum::E),
            _ => Err(Error::InvalidInput(format!("unknown vacuum label '{c}'"))),
        }
    }
}

impl FromStr for Vacuum {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut chars = s.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => Vacuum::try_from(c),
            _ => Err(Error::InvalidInput(format!("unknown vacuum label '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VacuumPoint {
    pub label: Vacuum,
    pub phi: f64,
    pub psi: f64,
}
