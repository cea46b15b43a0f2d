//! Kinetic entropy densities and their Legendre duals.
//!
//! Each model supplies the primal density `eta` together with the dual
//! `eta_star` and its first two derivatives. The ansatz of the moment closure
//! is `eta_star'(alpha . m)`, so the dual quantities are on the hot path of
//! every optimizer iteration.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Largest argument whose exponential is still finite.
const EXP_ARG_MAX: f64 = 709.782_712_893_384;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EntropyKind {
    MaxwellBoltzmann,
    BoseEinstein,
    FermiDirac,
    Quadratic,
}

/// Values of the dual entropy and its first two derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualValues {
    pub value: f64,
    pub first: f64,
    pub second: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EntropyModel {
    pub kind: EntropyKind,
}

impl EntropyModel {
    pub const MAXWELL_BOLTZMANN: Self = Self::new(EntropyKind::MaxwellBoltzmann);
    pub const BOSE_EINSTEIN: Self = Self::new(EntropyKind::BoseEinstein);
    pub const FERMI_DIRAC: Self = Self::new(EntropyKind::FermiDirac);
    pub const QUADRATIC: Self = Self::new(EntropyKind::Quadratic);

    pub const fn new(kind: EntropyKind) -> Self {
        Self { kind }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            EntropyKind::MaxwellBoltzmann => "Maxwell-Boltzmann",
            EntropyKind::BoseEinstein => "Bose-Einstein",
            EntropyKind::FermiDirac => "Fermi-Dirac",
            EntropyKind::Quadratic => "quadratic",
        }
    }

    /// Closed bounds `(lo, hi)` of the domain of `eta`.
    pub fn domain(&self) -> (f64, f64) {
        match self.kind {
            EntropyKind::MaxwellBoltzmann | EntropyKind::BoseEinstein => (0.0, f64::INFINITY),
            EntropyKind::FermiDirac => (0.0, 1.0),
            EntropyKind::Quadratic => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// Upper end of the domain of `eta_star` (exclusive for Bose-Einstein).
    pub fn dual_domain_hi(&self) -> f64 {
        match self.kind {
            EntropyKind::BoseEinstein => 0.0,
            _ => f64::INFINITY,
        }
    }

    fn domain_error(&self, what: &'static str, value: f64) -> Error {
        Error::Domain {
            entropy: self.name(),
            what,
            value,
        }
    }

    /// The entropy density `eta(z)`; boundary values use their limits
    /// (`0 log 0 = 0`).
    pub fn eta(&self, z: f64) -> Result<f64> {
        let (lo, hi) = self.domain();
        if !(z >= lo && z <= hi) {
            return Err(self.domain_error("eta argument", z));
        }
        Ok(match self.kind {
            EntropyKind::MaxwellBoltzmann => xlogx(z) - z,
            EntropyKind::BoseEinstein => xlogx(z) - xlogx(1.0 + z),
            EntropyKind::FermiDirac => xlogx(z) + xlogx(1.0 - z),
            EntropyKind::Quadratic => 0.5 * z * z,
        })
    }

    /// `eta'(z)`, the inverse of `eta_star'`. Only defined on the interior.
    pub fn eta_prime(&self, z: f64) -> Result<f64> {
        let (lo, hi) = self.domain();
        if !(z > lo && z < hi) {
            return Err(self.domain_error("eta' argument", z));
        }
        Ok(match self.kind {
            EntropyKind::MaxwellBoltzmann => z.ln(),
            EntropyKind::BoseEinstein => (z / (1.0 + z)).ln(),
            EntropyKind::FermiDirac => (z / (1.0 - z)).ln(),
            EntropyKind::Quadratic => z,
        })
    }

    pub fn eta_star(&self, y: f64) -> Result<f64> {
        self.dual(y).map(|d| d.value)
    }

    pub fn eta_star_prime(&self, y: f64) -> Result<f64> {
        self.dual(y).map(|d| d.first)
    }

    pub fn eta_star_second(&self, y: f64) -> Result<f64> {
        self.dual(y).map(|d| d.second)
    }

    fn check_exp(&self, y: f64) -> Result<()> {
        if y.is_nan() {
            return Err(self.domain_error("eta_star argument", y));
        }
        if y > EXP_ARG_MAX {
            return Err(Error::Overflow(y));
        }
        Ok(())
    }

    /// `eta_star`, `eta_star'` and `eta_star''` at `y`, sharing one
    /// exponential.
    #[inline]
    pub fn dual(&self, y: f64) -> Result<DualValues> {
        match self.kind {
            EntropyKind::MaxwellBoltzmann => {
                self.check_exp(y)?;
                let e = y.exp();
                Ok(DualValues {
                    value: e,
                    first: e,
                    second: e,
                })
            }
            EntropyKind::BoseEinstein => {
                self.check_exp(y)?;
                if y >= 0.0 {
                    return Err(self.domain_error("eta_star argument", y));
                }
                let e = y.exp();
                // 1 - e^y, accurate near y = 0
                let one_minus = -y.exp_m1();
                Ok(DualValues {
                    value: -one_minus.ln(),
                    first: e / one_minus,
                    second: e / (one_minus * one_minus),
                })
            }
            EntropyKind::FermiDirac => {
                self.check_exp(y)?;
                let e = y.exp();
                let p = 1.0 / (1.0 + (-y).exp());
                let value = if y > 0.0 { y + (-y).exp().ln_1p() } else { e.ln_1p() };
                Ok(DualValues {
                    value,
                    first: p,
                    second: p * (1.0 - p),
                })
            }
            EntropyKind::Quadratic => {
                if !y.is_finite() {
                    return Err(self.domain_error("eta_star argument", y));
                }
                Ok(DualValues {
                    value: 0.5 * y * y,
                    first: y,
                    second: 1.0,
                })
            }
        }
    }
}

impl fmt::Display for EntropyModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EntropyModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let kind = match s.to_ascii_lowercase().as_str() {
            "mb" | "maxwell-boltzmann" => EntropyKind::MaxwellBoltzmann,
            "be" | "bose-einstein" => EntropyKind::BoseEinstein,
            "fd" | "fermi-dirac" => EntropyKind::FermiDirac,
            "quadratic" | "quad" => EntropyKind::Quadratic,
            other => return Err(Error::argument(format!("unknown entropy '{other}'"))),
        };
        Ok(Self::new(kind))
    }
}

fn xlogx(z: f64) -> f64 {
    if z == 0.0 {
        0.0
    } else {
        z * z.ln()
    }
}
