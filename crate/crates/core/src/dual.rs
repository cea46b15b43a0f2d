//! Tikhonov-regularized dual problem for the multipliers.
//!
//! For a moment vector `v` the multipliers minimize
//!
//! ```text
//! phi(alpha) = <eta_star(alpha . m)> + gamma/2 |Gamma alpha|^2 - alpha . v
//! ```
//!
//! where `Gamma = diag(mask)` selects the regularized components. The
//! objective is strictly convex with Hessian
//! `<m m^T eta_star''(alpha . m)> + gamma Gamma`, so a damped Newton method
//! converges from any evaluable starting point. The solve stops on the first
//! iterate whose gradient norm `|v_hat(alpha) + gamma Gamma alpha - v|` is at
//! most `tau`.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::basis::{BasisSet, MomentVector, MultiplierVector};
use crate::entropy::{EntropyKind, EntropyModel};
use crate::error::{Error, Result};

/// Which moment components carry the Tikhonov penalty.
#[derive(Debug, Clone, PartialEq)]
pub enum Mask {
    /// Every component is regularized.
    Full,
    /// Per-component selection; `true` means regularized.
    Partial(Vec<bool>),
}

impl Mask {
    /// Regularize every component except the first `exact` ones.
    pub fn skip_leading(exact: usize, n: usize) -> Self {
        Mask::Partial((0..n).map(|i| i >= exact).collect())
    }

    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        match self {
            Mask::Full => 1.0,
            Mask::Partial(m) => {
                if m[i] {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn is_full(&self) -> bool {
        match self {
            Mask::Full => true,
            Mask::Partial(m) => m.iter().all(|&b| b),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularizationConfig {
    pub gamma: f64,
    pub mask: Mask,
    /// Stopping tolerance on the dual gradient norm.
    pub tau: f64,
    pub max_iter: usize,
    /// Sufficient-decrease constant of the Armijo test.
    pub armijo_slope: f64,
    pub backtrack_factor: f64,
    pub max_backtracks: usize,
    pub lm_damping_init: f64,
    pub lm_shrink: f64,
    pub lm_grow: f64,
}

impl Default for RegularizationConfig {
    fn default() -> Self {
        Self {
            gamma: 0.0,
            mask: Mask::Full,
            tau: 1e-10,
            max_iter: 1000,
            armijo_slope: 1e-4,
            backtrack_factor: 0.5,
            max_backtracks: 40,
            lm_damping_init: 0.0,
            lm_shrink: 0.1,
            lm_grow: 10.0,
        }
    }
}

impl RegularizationConfig {
    pub fn new(gamma: f64, tau: f64) -> Self {
        Self {
            gamma,
            tau,
            ..Self::default()
        }
    }

    pub fn with_mask(mut self, mask: Mask) -> Self {
        self.mask = mask;
        self
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::argument(format!("gamma must be >= 0, got {}", self.gamma)));
        }
        if !(self.tau > 0.0) {
            return Err(Error::argument(format!("tau must be > 0, got {}", self.tau)));
        }
        if let Mask::Partial(m) = &self.mask {
            if m.len() != n {
                return Err(Error::argument(format!(
                    "regularization mask has length {} but there are {n} moments",
                    m.len()
                )));
            }
        }
        if !(self.armijo_slope > 0.0 && self.armijo_slope < 1.0)
            || !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0)
        {
            return Err(Error::argument("line-search constants must lie in (0, 1)"));
        }
        Ok(())
    }

    #[inline]
    fn penalty(&self, i: usize) -> f64 {
        self.gamma * self.mask.weight(i)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub alpha: MultiplierVector,
    /// `<m G_alpha>`.
    pub vhat_of_alpha: MomentVector,
    /// `G_alpha` at the velocity nodes.
    pub ansatz: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Returned when the optimizer exhausts its iteration budget.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverFailure {
    pub moments: MomentVector,
    pub last_alpha: MultiplierVector,
    pub residual_norm: f64,
    pub iterations: usize,
}

impl fmt::Display for SolverFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "dual solver did not converge after {} iterations (residual {:.3e}, v = {:?}, last alpha = {:?})",
            self.iterations, self.residual_norm, self.moments.0, self.last_alpha.0
        )
    }
}

impl std::error::Error for SolverFailure {}

fn check_dims(basis: &BasisSet, len: usize, what: &str) -> Result<()> {
    if len != basis.len() {
        return Err(Error::argument(format!(
            "{what} has {len} components but the basis has {}",
            basis.len()
        )));
    }
    Ok(())
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `G_alpha(mu_q) = eta_star'(alpha . m(mu_q))` at every velocity node.
pub fn ansatz_at_nodes(alpha: &[f64], basis: &BasisSet, model: EntropyModel) -> Result<Vec<f64>> {
    check_dims(basis, alpha.len(), "multiplier vector")?;
    (0..basis.num_nodes())
        .map(|q| model.eta_star_prime(dot(alpha, basis.at_node(q))))
        .collect()
}

/// `v_hat(alpha) = <m G_alpha>`.
pub fn vhat(alpha: &[f64], basis: &BasisSet, model: EntropyModel) -> Result<MomentVector> {
    let g = ansatz_at_nodes(alpha, basis, model)?;
    basis.moments_of(&g)
}

/// `v_hat(alpha) + gamma Gamma alpha`, the inverse of the regularized
/// multiplier map.
pub fn vhat_gamma(
    alpha: &[f64],
    cfg: &RegularizationConfig,
    basis: &BasisSet,
    model: EntropyModel,
) -> Result<MomentVector> {
    let mut v = vhat(alpha, basis, model)?;
    for (i, vi) in v.iter_mut().enumerate() {
        *vi += cfg.penalty(i) * alpha[i];
    }
    Ok(v)
}

/// Value of the minimized dual objective; `+inf` when the ansatz cannot be
/// evaluated.
pub fn dual_objective(
    alpha: &[f64],
    v: &[f64],
    cfg: &RegularizationConfig,
    basis: &BasisSet,
    model: EntropyModel,
) -> Result<f64> {
    check_dims(basis, alpha.len(), "multiplier vector")?;
    check_dims(basis, v.len(), "moment vector")?;
    Ok(objective(alpha, v, cfg, basis, model))
}

pub fn dual_gradient(
    alpha: &[f64],
    v: &[f64],
    cfg: &RegularizationConfig,
    basis: &BasisSet,
    model: EntropyModel,
) -> Result<Vec<f64>> {
    check_dims(basis, v.len(), "moment vector")?;
    let mut g = vhat_gamma(alpha, cfg, basis, model)?.0;
    for (gi, vi) in g.iter_mut().zip(v) {
        *gi -= vi;
    }
    Ok(g)
}

/// `H_gamma(alpha) = <m m^T eta_star''(alpha . m)> + gamma Gamma`, row-major.
pub fn dual_hessian(
    alpha: &[f64],
    cfg: &RegularizationConfig,
    basis: &BasisSet,
    model: EntropyModel,
) -> Result<DMatrix<f64>> {
    check_dims(basis, alpha.len(), "multiplier vector")?;
    let n = basis.len();
    let mut ws = Workspace::new(n);
    let zeros = vec![0.0; n];
    full_eval(alpha, &zeros, cfg, basis, model, &mut ws)?;
    Ok(ws.hessian_matrix())
}

/// Scratch buffers reused across iterations of one solve.
struct Workspace {
    n: usize,
    value: f64,
    grad: Vec<f64>,
    vhat: Vec<f64>,
    /// Upper triangle of the Hessian, row-major full storage.
    hess: Vec<f64>,
    trial: Vec<f64>,
    ansatz: Vec<f64>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Self {
            n,
            value: 0.0,
            grad: vec![0.0; n],
            vhat: vec![0.0; n],
            hess: vec![0.0; n * n],
            trial: vec![0.0; n],
            ansatz: Vec::new(),
        }
    }

    fn hessian_matrix(&self) -> DMatrix<f64> {
        let n = self.n;
        DMatrix::from_fn(n, n, |i, j| {
            if i <= j {
                self.hess[i * n + j]
            } else {
                self.hess[j * n + i]
            }
        })
    }
}

fn penalty_energy(alpha: &[f64], cfg: &RegularizationConfig) -> f64 {
    if cfg.gamma == 0.0 {
        return 0.0;
    }
    0.5 * alpha
        .iter()
        .enumerate()
        .map(|(i, a)| cfg.penalty(i) * a * a)
        .sum::<f64>()
}

/// Objective only; `+inf` on evaluation errors.
fn objective(alpha: &[f64], v: &[f64], cfg: &RegularizationConfig, basis: &BasisSet, model: EntropyModel) -> f64 {
    let w = &basis.quadrature().weights;
    let mut acc = 0.0;
    for (q, wq) in w.iter().enumerate() {
        match model.eta_star(dot(alpha, basis.at_node(q))) {
            Ok(e) => acc += wq * e,
            Err(_) => return f64::INFINITY,
        }
    }
    let value = acc + penalty_energy(alpha, cfg) - dot(alpha, v);
    if value.is_nan() {
        f64::INFINITY
    } else {
        value
    }
}

/// Objective, gradient, moments and Hessian in one pass over the nodes.
fn full_eval(
    alpha: &[f64],
    v: &[f64],
    cfg: &RegularizationConfig,
    basis: &BasisSet,
    model: EntropyModel,
    ws: &mut Workspace,
) -> Result<()> {
    let n = ws.n;
    let w = &basis.quadrature().weights;
    ws.vhat.iter_mut().for_each(|x| *x = 0.0);
    ws.hess.iter_mut().for_each(|x| *x = 0.0);
    ws.ansatz.clear();
    let mut acc = 0.0;
    for (q, &wq) in w.iter().enumerate() {
        let m = basis.at_node(q);
        let d = model.dual(dot(alpha, m))?;
        ws.ansatz.push(d.first);
        acc += wq * d.value;
        let g1 = wq * d.first;
        let g2 = wq * d.second;
        for i in 0..n {
            ws.vhat[i] += g1 * m[i];
            let s = g2 * m[i];
            let row = &mut ws.hess[i * n..(i + 1) * n];
            for j in i..n {
                row[j] += s * m[j];
            }
        }
    }
    for i in 0..n {
        let p = cfg.penalty(i);
        ws.hess[i * n + i] += p;
        ws.grad[i] = ws.vhat[i] + p * alpha[i] - v[i];
    }
    ws.value = acc + penalty_energy(alpha, cfg) - dot(alpha, v);
    Ok(())
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Starting point when no warm start is supplied: the isotropic ansatz
/// reproducing `v_0` for the nonlinear entropies, the Gram solve for the
/// quadratic one.
pub fn initial_multipliers(v: &[f64], basis: &BasisSet, model: EntropyModel) -> MultiplierVector {
    let n = basis.len();
    let mut alpha = vec![0.0; n];
    match model.kind {
        EntropyKind::Quadratic => {
            let gram = DMatrix::from_row_slice(n, n, &basis.gram());
            if let Some(ch) = gram.cholesky() {
                let sol = ch.solve(&DVector::from_column_slice(v));
                alpha.copy_from_slice(sol.as_slice());
            }
        }
        _ => {
            // m_0 may be scaled (orthonormal basis), so match <m_0 G> = v_0
            // with G constant.
            let m0 = basis.eval(0, 0);
            let measure: f64 = basis.quadrature().weights.iter().sum();
            let target = (v[0] / (measure * m0)).max(1e-10);
            let target = match model.kind {
                // Fermi-Dirac densities live in (0, 1)
                EntropyKind::FermiDirac => target.min(1.0 - 1e-10),
                _ => target,
            };
            alpha[0] = model.eta_prime(target).unwrap_or(0.0) / m0;
        }
    }
    MultiplierVector(alpha)
}

/// Damped Newton solve of the regularized dual problem.
///
/// Search directions come from `(H + lambda I) d = -g` with Levenberg-Marquardt
/// damping `lambda`, followed by Armijo backtracking on the objective. Once
/// the predicted decrease falls below the rounding level of the objective,
/// a step is also accepted if it reduces the gradient norm.
pub fn solve_dual(
    v: &[f64],
    cfg: &RegularizationConfig,
    basis: &BasisSet,
    model: EntropyModel,
    warm_start: Option<&[f64]>,
) -> Result<DualSolution> {
    let n = basis.len();
    check_dims(basis, v.len(), "moment vector")?;
    cfg.validate(n)?;
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::argument(format!("moment vector is not finite: {v:?}")));
    }

    let mut ws = Workspace::new(n);
    let mut alpha = match warm_start {
        Some(a) => {
            check_dims(basis, a.len(), "warm start")?;
            a.to_vec()
        }
        None => initial_multipliers(v, basis, model).0,
    };
    if full_eval(&alpha, v, cfg, basis, model, &mut ws).is_err() {
        // warm start not evaluable for this v; fall back to the default
        alpha = initial_multipliers(v, basis, model).0;
        full_eval(&alpha, v, cfg, basis, model, &mut ws)?;
    }

    let mut lambda = cfg.lm_damping_init;
    let mut grad_norm = norm(&ws.grad);
    let mut iterations = 0;
    let mut trial_ws = Workspace::new(n);

    loop {
        if grad_norm <= cfg.tau {
            return Ok(DualSolution {
                alpha: MultiplierVector(alpha),
                vhat_of_alpha: MomentVector(ws.vhat),
                ansatz: ws.ansatz,
                residual_norm: grad_norm,
                iterations,
                converged: true,
            });
        }
        if iterations >= cfg.max_iter {
            return Err(SolverFailure {
                moments: MomentVector(v.to_vec()),
                last_alpha: MultiplierVector(alpha),
                residual_norm: grad_norm,
                iterations,
            }
            .into());
        }
        iterations += 1;

        let hess = ws.hessian_matrix();
        let diag_scale = (0..n).map(|i| hess[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
        let lambda_seed = 1e-8 * diag_scale;
        let grad = DVector::from_column_slice(&ws.grad);

        let mut accepted = false;
        // Each attempt either accepts a step or increases the damping.
        for _ in 0..60 {
            let mut damped = hess.clone();
            for i in 0..n {
                damped[(i, i)] += lambda;
            }
            let dir = match damped.cholesky() {
                Some(ch) => ch.solve(&(-&grad)),
                None => {
                    lambda = (lambda * cfg.lm_grow).max(lambda_seed);
                    continue;
                }
            };
            let slope = grad.dot(&dir);
            if !(slope < 0.0) || dir.iter().any(|x| !x.is_finite()) {
                lambda = (lambda * cfg.lm_grow).max(lambda_seed);
                continue;
            }
            let f0 = ws.value;
            let noise = 64.0 * f64::EPSILON * (f0.abs() + norm(&alpha) * norm(v) + 1.0);
            let mut t = 1.0;
            for _ in 0..=cfg.max_backtracks {
                for i in 0..n {
                    ws.trial[i] = alpha[i] + t * dir[i];
                }
                let f_trial = match full_eval(&ws.trial, v, cfg, basis, model, &mut trial_ws) {
                    Ok(()) if !trial_ws.value.is_nan() => trial_ws.value,
                    _ => f64::INFINITY,
                };
                let armijo = f_trial <= f0 + cfg.armijo_slope * t * slope;
                let in_noise = f_trial.is_finite() && -t * slope <= noise;
                if armijo || in_noise {
                    let g_trial = norm(&trial_ws.grad);
                    if armijo || g_trial < grad_norm {
                        alpha.copy_from_slice(&ws.trial);
                        std::mem::swap(&mut ws, &mut trial_ws);
                        grad_norm = g_trial;
                        accepted = true;
                        break;
                    }
                }
                t *= cfg.backtrack_factor;
            }
            if accepted {
                lambda *= cfg.lm_shrink;
                if lambda < lambda_seed {
                    lambda = 0.0;
                }
                break;
            }
            lambda = (lambda * cfg.lm_grow).max(lambda_seed);
        }
        if !accepted {
            // no productive step exists at this precision
            return Err(SolverFailure {
                moments: MomentVector(v.to_vec()),
                last_alpha: MultiplierVector(alpha),
                residual_norm: grad_norm,
                iterations,
            }
            .into());
        }
    }
}

/// `|alpha . (v - v_hat_gamma(alpha))|`; vanishes at an exact solution.
pub fn complementary_slackness_gap(v: &[f64], sol: &DualSolution, cfg: &RegularizationConfig) -> f64 {
    sol.alpha
        .iter()
        .enumerate()
        .map(|(i, a)| a * (v[i] - sol.vhat_of_alpha[i] - cfg.penalty(i) * a))
        .sum::<f64>()
        .abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{gauss_lobatto, legendre_basis};
    use approx::assert_abs_diff_eq;

    fn basis(order: usize) -> BasisSet {
        legendre_basis(order, gauss_lobatto(40).unwrap())
    }

    const MB: EntropyModel = EntropyModel::MAXWELL_BOLTZMANN;

    #[test]
    fn ansatz_values() {
        let b = basis(1);
        assert!(ansatz_at_nodes(&[0.0, 0.0], &b, MB).unwrap().iter().all(|&g| g == 1.0));
        let g = ansatz_at_nodes(&[2f64.ln(), 0.0], &b, MB).unwrap();
        assert!(g.iter().all(|&x| (x - 2.0).abs() < 1e-15));
        let g = ansatz_at_nodes(&[0.3, -1.2], &b, EntropyModel::QUADRATIC).unwrap();
        for (q, gq) in g.iter().enumerate() {
            assert_abs_diff_eq!(*gq, 0.3 - 1.2 * b.quadrature().nodes[q], epsilon = 1e-15);
        }
        assert!(ansatz_at_nodes(&[0.0], &b, MB).is_err());
    }

    #[test]
    fn objective_gradient_hessian_values() {
        let b = basis(0);
        let c0 = RegularizationConfig::new(0.0, 1e-10);
        let c1 = RegularizationConfig::new(1.0, 1e-10);
        assert_abs_diff_eq!(
            dual_objective(&[0.0], &[2.0], &c0, &b, MB).unwrap(),
            2.0,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            dual_objective(&[0.0], &[2.0], &c1, &b, MB).unwrap(),
            2.0,
            epsilon = 1e-14
        );
        let q = EntropyModel::QUADRATIC;
        assert_abs_diff_eq!(
            dual_objective(&[1.0], &[0.0], &c0, &b, q).unwrap(),
            1.0,
            epsilon = 1e-14
        );

        assert_abs_diff_eq!(
            dual_gradient(&[0.0], &[2.0], &c0, &b, MB).unwrap()[0],
            0.0,
            epsilon = 1e-14
        );
        let c5 = RegularizationConfig::new(5.0, 1e-10);
        assert_abs_diff_eq!(
            dual_gradient(&[0.0], &[2.0], &c5, &b, MB).unwrap()[0],
            0.0,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            dual_gradient(&[1.5f64.ln()], &[2.0], &c0, &b, MB).unwrap()[0],
            1.0,
            epsilon = 1e-14
        );

        let ch = RegularizationConfig::new(0.5, 1e-10);
        assert_abs_diff_eq!(dual_hessian(&[0.0], &ch, &b, MB).unwrap()[(0, 0)], 2.5, epsilon = 1e-14);
        let b1 = basis(1);
        let h = dual_hessian(&[0.0, 0.0], &c0, &b1, MB).unwrap();
        assert_abs_diff_eq!(h[(0, 0)], 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(h[(1, 1)], 2.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(h[(0, 1)], 0.0, epsilon = 1e-14);
        let b3 = basis(3);
        let h = dual_hessian(&[0.4, -0.3, 0.2, 0.1], &c0, &b3, q).unwrap();
        let g = b3.gram();
        for i in 0..4 {
            for j in 0..4 {
                assert_abs_diff_eq!(h[(i, j)], g[i * 4 + j], epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn vhat_gamma_values() {
        let b = basis(0);
        let c3 = RegularizationConfig::new(3.0, 1e-10);
        assert_abs_diff_eq!(vhat_gamma(&[0.0], &c3, &b, MB).unwrap()[0], 2.0, epsilon = 1e-14);
        let c1 = RegularizationConfig::new(1.0, 1e-10);
        let e = std::f64::consts::E;
        assert_abs_diff_eq!(
            vhat_gamma(&[1.0], &c1, &b, MB).unwrap()[0],
            2.0 * e + 1.0,
            epsilon = 1e-13
        );
        let c0 = RegularizationConfig::new(0.0, 1e-10);
        let b2 = basis(2);
        let a = [0.1, 0.5, -0.3];
        assert_eq!(vhat_gamma(&a, &c0, &b2, MB).unwrap(), vhat(&a, &b2, MB).unwrap());
    }

    /// Bisection on the scalar equation `2 e^a = v0`.
    fn bisect_scalar(v0: f64) -> f64 {
        let (mut lo, mut hi) = (-50.0f64, 50.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if 2.0 * mid.exp() < v0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn scalar_solves() {
        let b = basis(0);
        let c0 = RegularizationConfig::new(0.0, 1e-12);
        let s = solve_dual(&[2.0], &c0, &b, MB, None).unwrap();
        assert!(s.converged);
        assert_abs_diff_eq!(s.alpha[0], 0.0, epsilon = 1e-12);
        let c1 = RegularizationConfig::new(1.0, 1e-12);
        let s = solve_dual(&[2.0], &c1, &b, MB, None).unwrap();
        assert_abs_diff_eq!(s.alpha[0], 0.0, epsilon = 1e-12);
        let s = solve_dual(&[3.0], &c0, &b, MB, None).unwrap();
        let oracle = bisect_scalar(3.0);
        assert_abs_diff_eq!(oracle, 0.405_465_108_108_164_4, epsilon = 1e-12);
        assert_abs_diff_eq!(s.alpha[0], oracle, epsilon = 1e-11);
    }

    /// Plain gradient descent with a fixed step on the same objective, as an
    /// independent check of the Newton solve.
    fn gradient_descent(v: &[f64], cfg: &RegularizationConfig, b: &BasisSet) -> Vec<f64> {
        let mut alpha = vec![0.0; v.len()];
        for _ in 0..200_000 {
            let g = dual_gradient(&alpha, v, cfg, b, MB).unwrap();
            if norm(&g) < 1e-11 {
                break;
            }
            for (a, gi) in alpha.iter_mut().zip(&g) {
                *a -= 0.2 * gi;
            }
        }
        alpha
    }

    #[test]
    fn non_realizable_vector_is_solvable() {
        let b = basis(1);
        let cfg = RegularizationConfig::new(1e-2, 1e-11);
        let v = [1.0, 1.05];
        let s = solve_dual(&v, &cfg, &b, MB, None).unwrap();
        assert!(s.converged && s.alpha.is_finite());
        assert!(s.residual_norm <= cfg.tau);
        let oracle = gradient_descent(&v, &cfg, &b);
        for (a, o) in s.alpha.iter().zip(&oracle) {
            assert_abs_diff_eq!(*a, *o, epsilon = 1e-7);
        }
        // the image is realizable even though v is not
        let vh = &s.vhat_of_alpha;
        assert!(vh[1].abs() < vh[0]);
    }

    #[test]
    fn failure_carries_last_iterate() {
        let b = basis(3);
        let cfg = RegularizationConfig {
            max_iter: 2,
            ..RegularizationConfig::new(0.0, 1e-14)
        };
        let err = solve_dual(&[1.0, 0.9, 0.8, 0.7], &cfg, &b, MB, None).unwrap_err();
        match err {
            Error::Solver(f) => {
                assert_eq!(f.iterations, 2);
                assert!(f.residual_norm > 1e-14);
                assert_eq!(f.last_alpha.len(), 4);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn argument_validation() {
        let b = basis(1);
        let cfg = RegularizationConfig::new(0.1, 1e-10);
        assert!(solve_dual(&[1.0], &cfg, &b, MB, None).is_err());
        assert!(solve_dual(&[1.0, f64::NAN], &cfg, &b, MB, None).is_err());
        let bad = RegularizationConfig::new(-1.0, 1e-10);
        assert!(solve_dual(&[1.0, 0.0], &bad, &b, MB, None).is_err());
        let bad = RegularizationConfig::new(0.1, 0.0);
        assert!(solve_dual(&[1.0, 0.0], &bad, &b, MB, None).is_err());
        let bad = RegularizationConfig::new(0.1, 1e-3).with_mask(Mask::Partial(vec![true]));
        assert!(solve_dual(&[1.0, 0.0], &bad, &b, MB, None).is_err());
    }

    #[test]
    fn warm_start_outside_domain_falls_back() {
        let b = basis(1);
        let cfg = RegularizationConfig::new(0.0, 1e-10);
        let v = [-0.5, 0.0];
        let be = EntropyModel::BOSE_EINSTEIN;
        // BE needs alpha . m < 0 everywhere
        let s = solve_dual(
            &[1.0, 0.2],
            &RegularizationConfig::new(0.1, 1e-10),
            &b,
            be,
            Some(&[5.0, 0.0]),
        );
        assert!(s.is_ok());
        let s = solve_dual(&v, &cfg, &b, MB, None);
        // non-positive density mass has no unregularized solution
        assert!(s.is_err());
    }

    #[test]
    fn slackness_gap() {
        let b = basis(0);
        let cfg = RegularizationConfig::new(0.0, 1e-12);
        let s = solve_dual(&[2.0], &cfg, &b, MB, None).unwrap();
        assert_eq!(complementary_slackness_gap(&[2.0], &s, &cfg), 0.0);
        let b = basis(3);
        let cfg = RegularizationConfig::new(0.05, 1e-9);
        let v = [1.0, 0.95, 0.3, -0.2];
        let s = solve_dual(&v, &cfg, &b, MB, None).unwrap();
        let gap = complementary_slackness_gap(&v, &s, &cfg);
        assert!(gap <= s.alpha.norm() * cfg.tau * (1.0 + 1e-12));
    }

    #[test]
    fn all_entropies_solve() {
        let b = basis(3);
        let v = [0.8, 0.2, 0.05, 0.01];
        for model in [
            EntropyModel::MAXWELL_BOLTZMANN,
            EntropyModel::BOSE_EINSTEIN,
            EntropyModel::FERMI_DIRAC,
            EntropyModel::QUADRATIC,
        ] {
            let cfg = RegularizationConfig::new(1e-3, 1e-10);
            let s = solve_dual(&v, &cfg, &b, model, None).unwrap();
            let r = dual_gradient(&s.alpha, &v, &cfg, &b, model).unwrap();
            assert!(norm(&r) <= 1e-10, "{model}");
        }
    }
}
