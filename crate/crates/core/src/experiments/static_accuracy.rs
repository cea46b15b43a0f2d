//! Accuracy of the regularized closure on projected, mostly non-realizable
//! moment vectors taken from a smooth curve in the realizable set.

use crate::basis::{distance, gauss_lobatto, legendre_basis, legendre_values, BasisSet, MomentVector};
use crate::dual::{solve_dual, RegularizationConfig};
use crate::entropy::EntropyModel;
use crate::error::{Error, Result};

use super::{with_orders, ConvergenceRow, ParamRule};

#[derive(Debug, Clone, PartialEq)]
pub struct StaticTestConfig {
    /// Steepness of the moment curve; larger values approach the boundary of
    /// the realizable set.
    pub steepness: f64,
    /// Number of spatial polynomial modes (degree `k - 1`).
    pub k: usize,
    pub dx_list: Vec<f64>,
    pub order: usize,
    pub velocity_points: usize,
    pub spatial_points: usize,
    pub gamma_rule: ParamRule,
    pub tau_rule: ParamRule,
    pub model: EntropyModel,
}

impl StaticTestConfig {
    /// Setup of the published accuracy table for one value of `k`.
    pub fn reference(k: usize) -> Self {
        Self {
            steepness: 200.0,
            k,
            dx_list: (1..=9).map(|p| 2f64.powi(-p)).collect(),
            order: 7,
            velocity_points: 40,
            spatial_points: 20,
            gamma_rule: ParamRule::DxPowK { factor: 1.0 },
            tau_rule: ParamRule::DxPowK { factor: 1.0 },
            model: EntropyModel::MAXWELL_BOLTZMANN,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::argument("k must be at least 1"));
        }
        if self.dx_list.is_empty()
            || self.dx_list.iter().any(|&d| !(d > 0.0))
            || self.dx_list.windows(2).any(|w| w[1] >= w[0])
        {
            return Err(Error::argument("dx_list must be positive and strictly decreasing"));
        }
        if self.steepness <= 1.0 {
            return Err(Error::argument("curve steepness must exceed 1"));
        }
        Ok(())
    }
}

/// The curve `x -> <m exp(a0(x) + a1(x) mu)>` with `max_x u_0(x) = 1`.
pub struct MomentCurve {
    steepness: f64,
    offset: f64,
}

impl MomentCurve {
    pub fn new(steepness: f64) -> Self {
        let km1 = steepness - 1.0;
        // log(2 sinh(km1)) without overflow
        let log_2sinh = km1 + (-(-2.0 * km1).exp()).ln_1p();
        Self {
            steepness,
            offset: km1.ln() - log_2sinh - 1.0,
        }
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Multipliers `(a0, a1)` of the curve at `x`.
    pub fn multipliers(&self, x: f64) -> (f64, f64) {
        (-x.sin() + self.offset, self.steepness + x.sin())
    }

    pub fn moments(&self, x: f64, basis: &BasisSet) -> MomentVector {
        let (a0, a1) = self.multipliers(x);
        basis.moments_of_fn(|mu| (a0 + a1 * mu).exp())
    }
}

/// Evaluates at `x = 0` the degree-`k-1` L2 projection of the curve on
/// `[0, dx]`.
pub fn projected_left_value(
    curve: &MomentCurve,
    basis: &BasisSet,
    k: usize,
    dx: f64,
    spatial_points: usize,
) -> Result<MomentVector> {
    let rule = gauss_lobatto(spatial_points)?;
    let n = basis.len();
    let mut coeffs = vec![vec![0.0; n]; k];
    let mut p = vec![0.0; k];
    for (&xi, &w) in rule.nodes.iter().zip(&rule.weights) {
        let x = 0.5 * dx * (xi + 1.0);
        let u = curve.moments(x, basis);
        legendre_values(k - 1, xi, &mut p);
        for (l, c) in coeffs.iter_mut().enumerate() {
            let s = 0.5 * (2 * l + 1) as f64 * w * p[l];
            for (ci, ui) in c.iter_mut().zip(u.iter()) {
                *ci += s * ui;
            }
        }
    }
    // P_l(-1) = (-1)^l
    let mut out = vec![0.0; n];
    for (l, c) in coeffs.iter().enumerate() {
        let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
        for (o, ci) in out.iter_mut().zip(c) {
            *o += sign * ci;
        }
    }
    Ok(MomentVector(out))
}

/// Per-resolution outcome, including solver diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct StaticSample {
    pub dx: f64,
    pub gamma: f64,
    pub tau: f64,
    pub error: f64,
    pub iterations: usize,
    pub multiplier_norm: f64,
}

pub fn static_samples(cfg: &StaticTestConfig) -> Result<Vec<StaticSample>> {
    cfg.validate()?;
    let basis = legendre_basis(cfg.order, gauss_lobatto(cfg.velocity_points)?);
    let curve = MomentCurve::new(cfg.steepness);
    let exact = curve.moments(0.0, &basis);
    cfg.dx_list
        .iter()
        .map(|&dx| {
            let v = projected_left_value(&curve, &basis, cfg.k, dx, cfg.spatial_points)?;
            let gamma = cfg.gamma_rule.eval(dx, cfg.k);
            let tau = cfg.tau_rule.eval(dx, cfg.k);
            let reg = RegularizationConfig::new(gamma, tau);
            let sol = solve_dual(&v, &reg, &basis, cfg.model, None)?;
            Ok(StaticSample {
                dx,
                gamma,
                tau,
                error: distance(&sol.vhat_of_alpha, &exact),
                iterations: sol.iterations,
                multiplier_norm: sol.alpha.norm(),
            })
        })
        .collect()
}

/// Error table `|v_hat(alpha) - u(0)|` against `dx` with observed orders.
pub fn run_static_accuracy(cfg: &StaticTestConfig) -> Result<Vec<ConvergenceRow>> {
    let samples = static_samples(cfg)?;
    Ok(with_orders(samples.iter().map(|s| (s.dx, s.error)).collect(), true))
}
