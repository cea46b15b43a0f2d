//! Low-storage strong-stability-preserving Runge-Kutta schemes. Every scheme
//! is a chain of forward-Euler stages joined by convex combinations.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Ten stages, second order.
    Ssprk2Stage10,
    /// Sixteen stages, third order.
    Ssprk3Stage16,
    /// Ten stages, fourth order.
    Ssprk4Stage10,
}

impl Scheme {
    /// The scheme paired with `k` spatial modes (degree `k - 1`).
    pub fn for_modes(k: usize) -> Result<Self> {
        match k {
            1 | 2 => Ok(Scheme::Ssprk2Stage10),
            3 => Ok(Scheme::Ssprk3Stage16),
            4 => Ok(Scheme::Ssprk4Stage10),
            _ => Err(Error::argument(format!("no time integrator paired with k = {k}"))),
        }
    }

    pub fn order(self) -> usize {
        match self {
            Scheme::Ssprk2Stage10 => 2,
            Scheme::Ssprk3Stage16 => 3,
            Scheme::Ssprk4Stage10 => 4,
        }
    }

    pub fn stages(self) -> usize {
        match self {
            Scheme::Ssprk2Stage10 | Scheme::Ssprk4Stage10 => 10,
            Scheme::Ssprk3Stage16 => 16,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Ssprk2Stage10 => "ssprk(10,2)",
            Scheme::Ssprk3Stage16 => "ssprk(16,3)",
            Scheme::Ssprk4Stage10 => "ssprk(10,4)",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ssprk(10,2)" | "ssprk2" => Ok(Scheme::Ssprk2Stage10),
            "ssprk(16,3)" | "ssprk3" => Ok(Scheme::Ssprk3Stage16),
            "ssprk(10,4)" | "ssprk4" => Ok(Scheme::Ssprk4Stage10),
            _ => Err(Error::argument(format!("unknown time integrator '{s}'"))),
        }
    }
}

/// A state vector with its (formal) time, combined linearly together.
/// Carrying the time through the same combinations as the state gives every
/// stage its correct evaluation time.
struct Register {
    u: Vec<f64>,
    t: f64,
}

impl Register {
    fn euler<F>(&mut self, h: f64, rhs: &mut F, scratch: &mut Vec<f64>) -> Result<()>
    where
        F: FnMut(&[f64], f64, &mut Vec<f64>) -> Result<()>,
    {
        rhs(&self.u, self.t, scratch)?;
        for (a, b) in self.u.iter_mut().zip(scratch.iter()) {
            *a += h * b;
        }
        self.t += h;
        Ok(())
    }

    /// `self = a * self + b * other`.
    fn combine(&mut self, a: f64, other: &Register, b: f64) {
        for (x, y) in self.u.iter_mut().zip(&other.u) {
            *x = a * *x + b * y;
        }
        self.t = a * self.t + b * other.t;
    }
}

/// Advances `u` from `t` by `dt`. `rhs(u, t, out)` writes the time derivative
/// into `out` (resized by the callee as needed).
pub fn step<F>(scheme: Scheme, u: &mut [f64], t: f64, dt: f64, mut rhs: F) -> Result<()>
where
    F: FnMut(&[f64], f64, &mut Vec<f64>) -> Result<()>,
{
    let mut scratch = Vec::with_capacity(u.len());
    let mut q1 = Register { u: u.to_vec(), t };
    match scheme {
        Scheme::Ssprk2Stage10 => {
            let s = 10usize;
            let h = dt / (s - 1) as f64;
            for _ in 0..s - 1 {
                q1.euler(h, &mut rhs, &mut scratch)?;
            }
            q1.euler(h, &mut rhs, &mut scratch)?;
            let base = Register { u: u.to_vec(), t };
            q1.combine((s - 1) as f64 / s as f64, &base, 1.0 / s as f64);
        }
        Scheme::Ssprk3Stage16 => {
            let n = 4usize;
            let h = dt / (n * n - n) as f64;
            let first = (n - 1) * (n - 2) / 2;
            let mid = n * (n + 1) / 2;
            for _ in 0..first {
                q1.euler(h, &mut rhs, &mut scratch)?;
            }
            let q2 = Register {
                u: q1.u.clone(),
                t: q1.t,
            };
            for _ in first + 1..mid {
                q1.euler(h, &mut rhs, &mut scratch)?;
            }
            q1.euler(h, &mut rhs, &mut scratch)?;
            let nf = n as f64;
            q1.combine((nf - 1.0) / (2.0 * nf - 1.0), &q2, nf / (2.0 * nf - 1.0));
            for _ in mid + 1..=n * n {
                q1.euler(h, &mut rhs, &mut scratch)?;
            }
        }
        Scheme::Ssprk4Stage10 => {
            let h = dt / 6.0;
            let mut q2 = Register { u: u.to_vec(), t };
            for _ in 0..5 {
                q1.euler(h, &mut rhs, &mut scratch)?;
            }
            q2.combine(1.0 / 25.0, &q1, 9.0 / 25.0);
            q1.combine(-5.0, &q2, 15.0);
            for _ in 0..4 {
                q1.euler(h, &mut rhs, &mut scratch)?;
            }
            rhs(&q1.u, q1.t, &mut scratch)?;
            for ((a, b), c) in q2.u.iter_mut().zip(&q1.u).zip(scratch.iter()) {
                *a += 0.6 * b + dt / 10.0 * c;
            }
            q1 = q2;
        }
    }
    u.copy_from_slice(&q1.u);
    Ok(())
}
