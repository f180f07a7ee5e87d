//! Topological charges, sector labels and multi-soliton arrays.
//!
//! `Q_H = [phi(+inf) - phi(-inf)] / (2 phi0)` and
//! `Q_V = [psi(+inf) - psi(-inf)] / (2 psi0)`; both are half-integers for any
//! configuration that starts and ends in a vacuum.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::lattice::FieldState;
use crate::model::{ModelParams, Vacuum};

/// Largest allowed distance between an endpoint and its vacuum, and between
/// a raw charge and its snapped half-integer.
pub const DEFAULT_SNAP_TOL: f64 = 0.05;

/// A half-integer, stored as a count of halves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Charge(i32);

impl Charge {
    pub const ZERO: Charge = Charge(0);

    pub fn from_halves(halves: i32) -> Self {
        Charge(halves)
    }

    pub fn halves(self) -> i32 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    /// Nearest half-integer to `raw`, if it lies within `tol`.
    pub fn snap(raw: f64, tol: f64) -> Option<Charge> {
        let halves = (2.0 * raw).round();
        if !halves.is_finite() || (raw - halves / 2.0).abs() >= tol {
            return None;
        }
        Some(Charge(halves as i32))
    }
}

impl std::ops::Add for Charge {
    type Output = Charge;
    fn add(self, rhs: Charge) -> Charge {
        Charge(self.0 + rhs.0)
    }
}

impl std::ops::Neg for Charge {
    type Output = Charge;
    fn neg(self) -> Charge {
        Charge(-self.0)
    }
}

impl std::iter::Sum for Charge {
    fn sum<I: Iterator<Item = Charge>>(iter: I) -> Charge {
        iter.fold(Charge::ZERO, |a, b| a + b)
    }
}

impl fmt::Display for Charge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl Serialize for Charge {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.value())
    }
}

impl<'de> Deserialize<'de> for Charge {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = f64::deserialize(d)?;
        Charge::snap(raw, 1e-9)
            .ok_or_else(|| serde::de::Error::custom(format!("{raw} is not a half-integer")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    /// Corner to corner at fixed `psi` sign.
    H,
    /// Corner to corner at fixed `phi` sign.
    V,
    /// Corner to the central vacuum or back.
    D,
}

impl Family {
    /// Family of a single soliton from `from` to `to`, or `None` when the pair
    /// is not adjacent.
    pub fn of(from: Vacuum, to: Vacuum) -> Option<Family> {
        if from == to {
            return None;
        }
        if from.is_center() || to.is_center() {
            return Some(Family::D);
        }
        let (fp, fs) = from.signs();
        let (tp, ts) = to.signs();
        if fs == ts {
            Some(Family::H)
        } else if fp == tp {
            Some(Family::V)
        } else {
            None
        }
    }

    fn as_char(self) -> char {
        match self {
            Family::H => 'H',
            Family::V => 'V',
            Family::D => 'D',
        }
    }
}

/// A single-soliton sector: the vacuum at `x -> -inf`, the vacuum at
/// `x -> +inf`, and the family their relative position implies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SectorLabel {
    from: Vacuum,
    to: Vacuum,
    family: Family,
}

impl SectorLabel {
    pub fn new(from: Vacuum, to: Vacuum) -> Result<Self> {
        match Family::of(from, to) {
            Some(family) => Ok(SectorLabel { from, to, family }),
            None if from == to => Err(Error::Unclassifiable(format!(
                "both ends sit in vacuum {from}; no soliton"
            ))),
            None => Err(Error::MultiSoliton(from, to)),
        }
    }

    pub fn from_vacuum(&self) -> Vacuum {
        self.from
    }

    pub fn to_vacuum(&self) -> Vacuum {
        self.to
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// The anti-soliton (same vacua, opposite order).
    pub fn reversed(&self) -> SectorLabel {
        SectorLabel { from: self.to, to: self.from, family: self.family }
    }

    /// The corner vacuum of a D sector.
    pub fn corner(&self) -> Option<Vacuum> {
        match self.family {
            Family::D if self.from.is_center() => Some(self.to),
            Family::D => Some(self.from),
            _ => None,
        }
    }

    /// Exact `(Q_H, Q_V)` of the sector.
    pub fn charges(&self) -> (Charge, Charge) {
        let (fp, fs) = self.from.signs();
        let (tp, ts) = self.to.signs();
        (Charge((tp - fp) as i32), Charge((ts - fs) as i32))
    }

    /// All sixteen single-soliton sectors.
    pub fn all() -> Vec<SectorLabel> {
        let mut out = Vec::new();
        for from in Vacuum::ALL {
            for to in Vacuum::ALL {
                if let Ok(s) = SectorLabel::new(from, to) {
                    out.push(s);
                }
            }
        }
        out
    }

    /// Two-soliton splits `self = a + b` through an intermediate vacuum.
    pub fn splits(&self) -> Vec<(SectorLabel, SectorLabel)> {
        Vacuum::ALL
            .into_iter()
            .filter_map(|mid| {
                let a = SectorLabel::new(self.from, mid).ok()?;
                let b = SectorLabel::new(mid, self.to).ok()?;
                Some((a, b))
            })
            .collect()
    }
}

impl fmt::Display for SectorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}{}", self.family.as_char(), self.from, self.to)
    }
}

impl FromStr for SectorLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::InvalidInput(format!(
                "'{s}' is not a sector; valid sectors are {}",
                SectorLabel::all()
                    .iter()
                    .map(|l| l.to_string())
                    .collect::<Vec<_>>()
                    .join(", ")
            ))
        };
        let chars: Vec<char> = s.trim().chars().collect();
        if chars.len() != 4 || chars[1] != '_' {
            return Err(bad());
        }
        let from = Vacuum::try_from(chars[2]).map_err(|_| bad())?;
        let to = Vacuum::try_from(chars[3]).map_err(|_| bad())?;
        let label = SectorLabel::new(from, to).map_err(|_| bad())?;
        if label.family.as_char() != chars[0] {
            return Err(bad());
        }
        Ok(label)
    }
}

impl Serialize for SectorLabel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SectorLabel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn endpoint_vacua(s: &FieldState, p: &ModelParams, tol: f64) -> Result<(Vacuum, Vacuum)> {
    let mut ends = [Vacuum::A; 2];
    for (k, (phi, psi)) in [s.left(), s.right()].into_iter().enumerate() {
        let (v, d) = p.nearest_vacuum(phi, psi);
        if d >= tol {
            let side = if k == 0 { "left" } else { "right" };
            return Err(Error::Unclassifiable(format!(
                "{side} endpoint ({phi}, {psi}) is {d:.3e} from the nearest vacuum {v}"
            )));
        }
        ends[k] = v;
    }
    Ok((ends[0], ends[1]))
}

fn snapped(raw: f64, tol: f64, what: &str) -> Result<Charge> {
    Charge::snap(raw, tol)
        .ok_or_else(|| Error::Unclassifiable(format!("{what} = {raw} is not near a half-integer")))
}

pub fn charge_h(s: &FieldState, p: &ModelParams) -> Result<Charge> {
    charge_h_with_tol(s, p, DEFAULT_SNAP_TOL)
}

pub fn charge_h_with_tol(s: &FieldState, p: &ModelParams, tol: f64) -> Result<Charge> {
    endpoint_vacua(s, p, tol)?;
    snapped((s.right().0 - s.left().0) / (2.0 * p.phi0), tol, "Q_H")
}

pub fn charge_v(s: &FieldState, p: &ModelParams) -> Result<Charge> {
    charge_v_with_tol(s, p, DEFAULT_SNAP_TOL)
}

pub fn charge_v_with_tol(s: &FieldState, p: &ModelParams, tol: f64) -> Result<Charge> {
    endpoint_vacua(s, p, tol)?;
    snapped((s.right().1 - s.left().1) / (2.0 * p.psi0), tol, "Q_V")
}

/// `(Q_H, Q_V)` with the default tolerance.
pub fn charges(s: &FieldState, p: &ModelParams) -> Result<(Charge, Charge)> {
    Ok((charge_h(s, p)?, charge_v(s, p)?))
}

pub fn classify_sector(s: &FieldState, p: &ModelParams) -> Result<SectorLabel> {
    classify_sector_with_tol(s, p, DEFAULT_SNAP_TOL)
}

pub fn classify_sector_with_tol(s: &FieldState, p: &ModelParams, tol: f64) -> Result<SectorLabel> {
    let (from, to) = endpoint_vacua(s, p, tol)?;
    SectorLabel::new(from, to)
}

/// True iff each soliton ends in the vacuum where the next one starts.
pub fn validate_array(sectors: &[SectorLabel]) -> bool {
    sectors.windows(2).all(|w| w[0].to_vacuum() == w[1].from_vacuum())
}

/// [`validate_array`] over textual labels; a label that does not name a
/// valid sector makes the array invalid.
pub fn validate_array_names(names: &[&str]) -> bool {
    names
        .iter()
        .map(|n| n.parse::<SectorLabel>())
        .collect::<Result<Vec<_>>>()
        .map(|v| validate_array(&v))
        .unwrap_or(false)
}
