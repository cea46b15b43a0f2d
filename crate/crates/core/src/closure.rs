//! Regularized closure quantities built on the dual solver: flux, isotropic
//! scattering term, moment regularization map and entropy pair. Also hosts
//! the closed-form special cases used as oracles and the accuracy-bound
//! probe.
//!
//! The regularized system is rotationally (here: parity) invariant but not
//! translation invariant, so no Galilean-boost property is provided.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::basis::{distance, BasisSet, MomentVector, MultiplierVector, Normalization};
use crate::dual::{self, DualSolution, RegularizationConfig};
use crate::entropy::{EntropyKind, EntropyModel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WarmStartPolicy {
    /// Every solve starts from the isotropic initial guess.
    None,
    /// Callers pass the previous multipliers at the same location.
    #[default]
    PerCallCache,
}

#[derive(Debug, Clone)]
pub struct ClosureContext {
    pub basis: BasisSet,
    pub model: EntropyModel,
    pub cfg: RegularizationConfig,
    pub warm_start_policy: WarmStartPolicy,
    /// `mu_q * m(mu_q) * w_q`, node-major.
    flux_weights: Vec<f64>,
}

/// Everything the transport solver needs at one state.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosureValues {
    pub alpha: MultiplierVector,
    /// `v_hat(alpha_gamma(v))`, the realizable image of `v`.
    pub regularized: MomentVector,
    pub flux: MomentVector,
    pub iterations: usize,
}

impl ClosureContext {
    pub fn new(basis: BasisSet, model: EntropyModel, cfg: RegularizationConfig) -> Result<Self> {
        cfg.validate(basis.len())?;
        let n = basis.len();
        let quad = basis.quadrature();
        let mut flux_weights = vec![0.0; n * quad.len()];
        for (q, chunk) in flux_weights.chunks_mut(n).enumerate() {
            let s = quad.nodes[q] * quad.weights[q];
            for (c, m) in chunk.iter_mut().zip(basis.at_node(q)) {
                *c = s * m;
            }
        }
        Ok(Self {
            basis,
            model,
            cfg,
            warm_start_policy: WarmStartPolicy::default(),
            flux_weights,
        })
    }

    pub fn with_warm_start_policy(mut self, policy: WarmStartPolicy) -> Self {
        self.warm_start_policy = policy;
        self
    }

    pub fn n(&self) -> usize {
        self.basis.len()
    }

    pub fn solve(&self, v: &[f64], warm: Option<&[f64]>) -> Result<DualSolution> {
        let warm = match self.warm_start_policy {
            WarmStartPolicy::None => None,
            WarmStartPolicy::PerCallCache => warm,
        };
        dual::solve_dual(v, &self.cfg, &self.basis, self.model, warm)
    }

    /// `<mu m G_alpha>`.
    pub fn flux_of_multipliers(&self, alpha: &[f64]) -> Result<MomentVector> {
        let g = dual::ansatz_at_nodes(alpha, &self.basis, self.model)?;
        Ok(self.weighted_flux(&g))
    }

    fn weighted_flux(&self, g: &[f64]) -> MomentVector {
        let n = self.n();
        let mut out = vec![0.0; n];
        for (q, gq) in g.iter().enumerate() {
            for (o, c) in out.iter_mut().zip(&self.flux_weights[q * n..(q + 1) * n]) {
                *o += gq * c;
            }
        }
        MomentVector(out)
    }

    /// Solves once and returns the multipliers with the regularized moments
    /// and the flux.
    pub fn evaluate(&self, v: &[f64], warm: Option<&[f64]>) -> Result<ClosureValues> {
        let sol = self.solve(v, warm)?;
        let flux = self.weighted_flux(&sol.ansatz);
        Ok(ClosureValues {
            alpha: sol.alpha,
            regularized: sol.vhat_of_alpha,
            flux,
            iterations: sol.iterations,
        })
    }

    /// Jacobian of the regularized flux,
    /// `<mu m m^T eta_star''> (H + gamma Gamma)^{-1}`.
    pub fn flux_jacobian(&self, v: &[f64]) -> Result<DMatrix<f64>> {
        let sol = self.solve(v, None)?;
        let h = dual::dual_hessian(&sol.alpha, &self.cfg, &self.basis, self.model)?;
        let n = self.n();
        let mut b = DMatrix::<f64>::zeros(n, n);
        for q in 0..self.basis.num_nodes() {
            let m = self.basis.at_node(q);
            let y: f64 = m.iter().zip(sol.alpha.iter()).map(|(a, b)| a * b).sum();
            let d2 = self.model.eta_star_second(y)?;
            let wq = self.basis.quadrature().weights[q] * self.basis.quadrature().nodes[q] * d2;
            for i in 0..n {
                for j in 0..n {
                    b[(i, j)] += wq * m[i] * m[j];
                }
            }
        }
        let hinv = h
            .try_inverse()
            .ok_or_else(|| Error::argument("regularized Hessian is singular"))?;
        Ok(b * hinv)
    }
}

/// Regularized flux `f_gamma(v) = <mu m G_{alpha_gamma(v)}>`.
pub fn flux(v: &[f64], ctx: &ClosureContext) -> Result<MomentVector> {
    let sol = ctx.solve(v, None)?;
    ctx.flux_of_multipliers(&sol.alpha)
}

/// `v_hat(alpha_gamma(v))`, equal to `v - gamma Gamma alpha_gamma(v)` up to
/// the solver tolerance.
pub fn regularized_moments(v: &[f64], ctx: &ClosureContext) -> Result<MomentVector> {
    Ok(ctx.solve(v, None)?.vhat_of_alpha)
}

/// Applies `sigma_s R` with `R = diag(0, -1, ..., -1)` to a moment vector.
pub fn scatter(regularized: &[f64], sigma_s: f64) -> MomentVector {
    let mut out: Vec<f64> = regularized.iter().map(|x| -sigma_s * x).collect();
    if let Some(first) = out.first_mut() {
        *first = 0.0;
    }
    MomentVector(out)
}

/// Isotropic-scattering term `sigma_s R v_hat(alpha_gamma(v))`.
pub fn collision_isotropic(v: &[f64], sigma_s: f64, ctx: &ClosureContext) -> Result<MomentVector> {
    if !(sigma_s >= 0.0) {
        return Err(Error::argument(format!("sigma_s must be >= 0, got {sigma_s}")));
    }
    if sigma_s == 0.0 {
        return Ok(MomentVector::zeros(v.len()));
    }
    Ok(scatter(&regularized_moments(v, ctx)?, sigma_s))
}

/// Entropy `h_gamma(v) = <eta(G)> + gamma/2 |Gamma alpha|^2` and entropy flux
/// `j_gamma(v) = <mu eta(G)>` at the regularized multipliers.
pub fn entropy_pair(v: &[f64], ctx: &ClosureContext) -> Result<(f64, f64)> {
    let sol = ctx.solve(v, None)?;
    entropy_pair_of_multipliers(&sol.alpha, ctx)
}

pub fn entropy_pair_of_multipliers(alpha: &[f64], ctx: &ClosureContext) -> Result<(f64, f64)> {
    let g = dual::ansatz_at_nodes(alpha, &ctx.basis, ctx.model)?;
    let quad = ctx.basis.quadrature();
    let mut h = 0.0;
    let mut j = 0.0;
    for (q, gq) in g.iter().enumerate() {
        let e = ctx.model.eta(*gq)?;
        h += quad.weights[q] * e;
        j += quad.weights[q] * quad.nodes[q] * e;
    }
    let penalty: f64 = alpha
        .iter()
        .enumerate()
        .map(|(i, a)| ctx.cfg.gamma * ctx.cfg.mask.weight(i) * a * a)
        .sum();
    Ok((h + 0.5 * penalty, j))
}

/// Closed-form regularized P_N flux for the quadratic entropy in the
/// orthonormal Legendre basis: the unregularized flux damped by
/// `1 / (1 + gamma)`.
pub fn pn_filter_closure(v: &[f64], gamma: f64, model: EntropyModel) -> Result<MomentVector> {
    if model.kind != EntropyKind::Quadratic {
        return Err(Error::argument(format!(
            "the filtered P_N closure needs the quadratic entropy, got {model}"
        )));
    }
    if !(gamma >= 0.0) {
        return Err(Error::argument("gamma must be >= 0"));
    }
    // <mu p_i p_{i+1}> = (i+1) / sqrt((2i+1)(2i+3))
    let coupling = |i: usize| (i + 1) as f64 / (((2 * i + 1) * (2 * i + 3)) as f64).sqrt();
    let n = v.len();
    let out = (0..n)
        .map(|i| {
            let lower = if i > 0 { coupling(i - 1) * v[i - 1] } else { 0.0 };
            let upper = if i + 1 < n { coupling(i) * v[i + 1] } else { 0.0 };
            (lower + upper) / (1.0 + gamma)
        })
        .collect();
    Ok(MomentVector(out))
}

/// Right-hand side `coth(a) - 1/a + (gamma / v0) a` of the first-order
/// multiplier equation for M_1 with only `v_1` regularized.
pub fn m1_moment_ratio(alpha1: f64, gamma: f64, v0: f64) -> f64 {
    let langevin = if alpha1.abs() < 1e-4 {
        alpha1 / 3.0 - alpha1.powi(3) / 45.0
    } else {
        1.0 / alpha1.tanh() - 1.0 / alpha1
    };
    langevin + gamma / v0 * alpha1
}

/// Inverts [`m1_moment_ratio`] for `alpha1` by bisection.
pub fn m1_first_multiplier(ratio: f64, gamma: f64, v0: f64) -> Result<f64> {
    if !(v0 > 0.0) {
        return Err(Error::argument("v0 must be positive"));
    }
    if gamma == 0.0 && ratio.abs() >= 1.0 {
        return Err(Error::argument(format!(
            "|v1/v0| = {} is not realizable without regularization",
            ratio.abs()
        )));
    }
    let mut hi = 1.0f64;
    while m1_moment_ratio(hi, gamma, v0) < ratio.abs() {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::argument("M1 ratio out of range"));
        }
    }
    let mut lo = 0.0f64;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if m1_moment_ratio(mid, gamma, v0) < ratio.abs() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).copysign(ratio))
}

fn euler_discriminant(v0: f64, v1: f64, v2: f64, gamma: f64) -> Result<(f64, f64)> {
    if !(v0 > 0.0) {
        return Err(Error::argument(format!(
            "v0 = {v0} must be positive for the partially regularized Euler closure"
        )));
    }
    if !(gamma > 0.0) {
        return Err(Error::argument("gamma must be positive"));
    }
    let p = v2 * v0 - v1 * v1;
    Ok((p, (p * p + 2.0 * gamma * v0.powi(3)).sqrt()))
}

/// Regularized second moment `v_hat_2` of the 1-D Euler closure on the whole
/// line when only `v_2` is regularized.
pub fn euler_reg_closure(v0: f64, v1: f64, v2: f64, gamma: f64) -> Result<f64> {
    let (p, root) = euler_discriminant(v0, v1, v2, gamma)?;
    // p + root computed without cancellation when p < 0
    let sum = if p >= 0.0 {
        p + root
    } else {
        2.0 * gamma * v0.powi(3) / (root - p)
    };
    Ok(v0 * (v1 * v1 / (v0 * v0) + sum / (2.0 * v0 * v0)))
}

/// The matching multiplier `alpha_gamma_2`.
pub fn euler_reg_multiplier(v0: f64, v1: f64, v2: f64, gamma: f64) -> Result<f64> {
    let (p, root) = euler_discriminant(v0, v1, v2, gamma)?;
    Ok((p - root) / (2.0 * gamma * v0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyProbeReport {
    pub samples: usize,
    /// Largest `|v_hat(alpha_gamma(v^delta)) - v| / (delta + M gamma)` with a
    /// tight solve.
    pub max_ratio: f64,
    /// Largest error over `2 delta + M gamma + 2 tau` with the loose solve.
    pub max_ratio_tau: f64,
    pub violations: usize,
    pub violations_tau: usize,
    pub failures: usize,
    pub m_used: f64,
    pub delta_used: f64,
    pub gamma_used: f64,
    pub tau_used: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeSettings {
    pub radius: f64,
    pub delta: f64,
    pub gamma: f64,
    /// Tolerance of the loose solve checked against the tau-inflated bound.
    pub tau: f64,
    /// Tolerance of the tight solve checked against the exact-solve bound.
    pub tight_tau: f64,
    pub samples: usize,
    pub seed: u64,
}

impl Default for ProbeSettings {
    fn default() -> Self {
        Self {
            radius: 5.0,
            delta: 1e-3,
            gamma: 1e-3,
            tau: 1e-3,
            tight_tau: 1e-11,
            samples: 200,
            seed: 20_190_501,
        }
    }
}

/// Draws a point uniformly from the ball of the given radius.
fn sample_ball(rng: &mut impl Rng, n: usize, radius: f64) -> Vec<f64> {
    let dir = unit_vector(rng, n);
    let r = radius * rng.random::<f64>().powf(1.0 / n as f64);
    dir.into_iter().map(|x| r * x).collect()
}

fn unit_vector(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    loop {
        // normal components give an isotropic direction
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Empirical check of the accuracy bounds for the moment regularization map.
///
/// Moment vectors are generated in multiplier space (`v = v_hat(alpha)` with
/// `|alpha| < M`), so they lie in the set of bounded-multiplier moments by
/// construction, then perturbed by exactly `delta` in a random direction.
pub fn accuracy_probe(settings: &ProbeSettings, ctx: &ClosureContext) -> Result<AccuracyProbeReport> {
    let ProbeSettings {
        radius,
        delta,
        gamma,
        tau,
        tight_tau,
        samples,
        seed,
    } = *settings;
    if !(radius > 0.0 && delta >= 0.0 && gamma >= 0.0 && tau > 0.0 && tight_tau > 0.0) || delta + radius * gamma == 0.0
    {
        return Err(Error::argument("probe parameters out of range"));
    }
    let n = ctx.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tight = RegularizationConfig {
        gamma,
        tau: tight_tau,
        ..ctx.cfg.clone()
    };
    let loose = RegularizationConfig {
        gamma,
        tau,
        ..ctx.cfg.clone()
    };
    let bound = delta + radius * gamma;
    let bound_tau = 2.0 * delta + radius * gamma + 2.0 * tau;
    let mut report = AccuracyProbeReport {
        samples: 0,
        max_ratio: 0.0,
        max_ratio_tau: 0.0,
        violations: 0,
        violations_tau: 0,
        failures: 0,
        m_used: radius,
        delta_used: delta,
        gamma_used: gamma,
        tau_used: tau,
    };
    for _ in 0..samples {
        let alpha = sample_ball(&mut rng, n, radius);
        let v = dual::vhat(&alpha, &ctx.basis, ctx.model)?;
        let dir = unit_vector(&mut rng, n);
        let v_delta: Vec<f64> = v.iter().zip(&dir).map(|(a, d)| a + delta * d).collect();

        let tight_sol = dual::solve_dual(&v_delta, &tight, &ctx.basis, ctx.model, None);
        let loose_sol = dual::solve_dual(&v_delta, &loose, &ctx.basis, ctx.model, None);
        match (tight_sol, loose_sol) {
            (Ok(t), Ok(l)) => {
                let err = distance(&t.vhat_of_alpha, &v);
                let err_tau = distance(&l.vhat_of_alpha, &v);
                report.samples += 1;
                report.max_ratio = report.max_ratio.max(err / bound);
                report.max_ratio_tau = report.max_ratio_tau.max(err_tau / bound_tau);
                report.violations += usize::from(err > bound);
                report.violations_tau += usize::from(err_tau > bound_tau);
            }
            _ => report.failures += 1,
        }
    }
    Ok(report)
}

/// True when the basis has the unit-norm Legendre scaling the analytic P_N
/// filter formula assumes.
pub fn is_orthonormal(basis: &BasisSet) -> bool {
    basis.normalization() == Normalization::Orthonormal
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{gauss_lobatto, legendre_basis, orthonormal_basis};
    use crate::dual::Mask;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn ctx(order: usize, model: EntropyModel, gamma: f64) -> ClosureContext {
        ClosureContext::new(
            legendre_basis(order, gauss_lobatto(40).unwrap()),
            model,
            RegularizationConfig::new(gamma, 1e-12),
        )
        .unwrap()
    }

    const MB: EntropyModel = EntropyModel::MAXWELL_BOLTZMANN;

    #[test]
    fn isotropic_flux_and_collision() {
        for gamma in [0.0, 1e-2, 1.0] {
            let c = ctx(3, MB, gamma);
            let v = [1.7, 0.0, 0.0, 0.0];
            let f = flux(&v, &c).unwrap();
            assert_abs_diff_eq!(f[0], 0.0, epsilon = 1e-14);
            let r = collision_isotropic(&v, 2.0, &c).unwrap();
            assert_eq!(r[0], 0.0);
            if gamma == 0.0 {
                assert!(r.norm() < 1e-12);
            }
        }
        let c = ctx(3, MB, 0.1);
        let r = collision_isotropic(&[1.0, 0.5, 0.2, 0.1], 0.0, &c).unwrap();
        assert!(r.iter().all(|&x| x == 0.0));
        assert!(collision_isotropic(&[1.0, 0.5, 0.2, 0.1], -1.0, &c).is_err());
    }

    #[test]
    fn unregularized_flux_for_realizable_input() {
        let c = ctx(2, MB, 0.0);
        let alpha = [0.2, 0.7, -0.4];
        let v = dual::vhat(&alpha, &c.basis, MB).unwrap();
        let f = flux(&v, &c).unwrap();
        let direct = c.flux_of_multipliers(&alpha).unwrap();
        for i in 0..3 {
            assert_abs_diff_eq!(f[i], direct[i], epsilon = 1e-10);
        }
        let r = regularized_moments(&v, &c).unwrap();
        assert!(distance(&r, &v) < 1e-12);
    }

    #[test]
    fn evaluate_agrees_with_separate_calls() {
        let c = ctx(3, MB, 1e-8);
        for v in [[0.5, 0.3, 0.1, 0.02], [1.0, 0.9, 0.8, 0.7]] {
            let vals = c.evaluate(&v, None).unwrap();
            let f = flux(&v, &c).unwrap();
            for i in 0..4 {
                assert_abs_diff_eq!(vals.flux[i], f[i], epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn regularized_moments_scalar() {
        let c = ctx(0, MB, 1.0);
        let r = regularized_moments(&[2.0], &c).unwrap();
        assert_abs_diff_eq!(r[0], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn entropy_pair_values() {
        let c = ctx(0, MB, 0.0);
        let (h, j) = entropy_pair(&[2.0], &c).unwrap();
        assert_abs_diff_eq!(h, -2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(j, 0.0, epsilon = 1e-14);
        // isotropic quadratic ansatz v0/2: h = <(v0/2)^2 / 2> = v0^2 / 4
        let c = ctx(3, EntropyModel::QUADRATIC, 0.0);
        let v0 = 1.3;
        let (h, _) = entropy_pair(&[v0, 0.0, 0.0, 0.0], &c).unwrap();
        assert_abs_diff_eq!(h, v0 * v0 / 4.0, epsilon = 1e-12);
    }

    #[test]
    fn pn_filter_matches_solver() {
        let basis = orthonormal_basis(5, gauss_lobatto(40).unwrap());
        assert!(is_orthonormal(&basis));
        let v = [0.8, -0.3, 0.5, 0.1, -0.7, 0.25];
        for gamma in [0.0, 0.3, 1.0, 4.0] {
            let c = ClosureContext::new(
                basis.clone(),
                EntropyModel::QUADRATIC,
                RegularizationConfig::new(gamma, 1e-13),
            )
            .unwrap();
            let numeric = flux(&v, &c).unwrap();
            let analytic = pn_filter_closure(&v, gamma, EntropyModel::QUADRATIC).unwrap();
            for i in 0..6 {
                assert_abs_diff_eq!(numeric[i], analytic[i], epsilon = 1e-10);
            }
        }
        let f0 = pn_filter_closure(&v, 0.0, EntropyModel::QUADRATIC).unwrap();
        let f1 = pn_filter_closure(&v, 1.0, EntropyModel::QUADRATIC).unwrap();
        for i in 0..6 {
            assert_abs_diff_eq!(f1[i], 0.5 * f0[i], epsilon = 1e-15);
        }
        assert!(pn_filter_closure(&v, 1.0, MB).is_err());
    }

    #[test]
    fn m1_ratio_values() {
        assert_eq!(m1_moment_ratio(0.0, 0.0, 1.0), 0.0);
        assert!(m1_moment_ratio(1e-6, 0.0, 1.0).abs() < 1e-6);
        assert_abs_diff_eq!(m1_moment_ratio(300.0, 0.0, 1.0), 1.0, epsilon = 4e-3);
        let expect = 1.0 / 2f64.tanh() - 0.5 + 0.2;
        assert_abs_diff_eq!(m1_moment_ratio(2.0, 0.1, 1.0), expect, epsilon = 1e-15);
        assert_abs_diff_eq!(expect, 0.737_314_720_7, epsilon = 1e-9);
        // series and closed form agree across the switch
        let a = 1.0001e-4f64;
        let closed = 1.0 / a.tanh() - 1.0 / a;
        assert_abs_diff_eq!(m1_moment_ratio(a, 0.0, 1.0), closed, epsilon = 1e-12);
        let a1 = m1_first_multiplier(expect, 0.1, 1.0).unwrap();
        assert_abs_diff_eq!(a1, 2.0, epsilon = 1e-8);
        assert!(m1_first_multiplier(1.2, 0.0, 1.0).is_err());
        assert!(m1_first_multiplier(1.2, 0.1, 1.0).is_ok());
    }

    #[test]
    fn m1_partial_regularization_matches_solver() {
        let basis = legendre_basis(1, gauss_lobatto(40).unwrap());
        for (v0, v1, gamma) in [(1.0, 0.5, 0.1), (2.0, -1.5, 0.05), (1.0, 1.3, 0.2), (0.5, 0.0, 1.0)] {
            let cfg = RegularizationConfig::new(gamma, 1e-13).with_mask(Mask::skip_leading(1, 2));
            let sol = dual::solve_dual(&[v0, v1], &cfg, &basis, MB, None).unwrap();
            let analytic = m1_first_multiplier(v1 / v0, gamma, v0).unwrap();
            assert_relative_eq!(sol.alpha[1], analytic, max_relative = 1e-8, epsilon = 1e-12);
        }
    }

    #[test]
    fn euler_closed_form() {
        // identity-like behaviour for realizable v2 as gamma -> 0
        assert_relative_eq!(
            euler_reg_closure(1.0, 0.0, 1.0, 1e-12).unwrap(),
            1.0,
            max_relative = 1e-10
        );
        let tiny = euler_reg_closure(1.0, 0.0, -1.0, 1e-8).unwrap();
        assert!(tiny > 0.0 && tiny < 1e-7);
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        assert_relative_eq!(
            euler_reg_closure(1.0, 0.0, 1.0, 2.0).unwrap(),
            golden,
            max_relative = 1e-15
        );
        assert!(euler_reg_closure(0.0, 0.0, 1.0, 1.0).is_err());
        assert!(euler_reg_multiplier(-1.0, 0.0, 1.0, 1.0).is_err());
        // consistency: v2 = v_hat_2 + gamma alpha_2
        let (v0, v1, v2, g) = (1.5, 0.4, 0.2, 0.3);
        let vh = euler_reg_closure(v0, v1, v2, g).unwrap();
        let a2 = euler_reg_multiplier(v0, v1, v2, g).unwrap();
        assert_relative_eq!(vh + g * a2, v2, max_relative = 1e-13);
    }

    #[test]
    fn euler_matches_truncated_line_solver() {
        let half = 12.0;
        let quad = gauss_lobatto(200).unwrap().mapped(-half, half);
        let basis = BasisSet::from_fn(2, quad, |i, x| x.powi(i as i32));
        for (v0, v1, v2, gamma) in [(1.0, 0.0, 1.0, 2.0), (1.0, 0.3, 0.5, 0.5), (2.0, -0.5, 0.1, 1.0)] {
            let cfg = RegularizationConfig::new(gamma, 1e-12).with_mask(Mask::skip_leading(2, 3));
            let sol = dual::solve_dual(&[v0, v1, v2], &cfg, &basis, MB, None).unwrap();
            let exact = euler_reg_closure(v0, v1, v2, gamma).unwrap();
            assert_relative_eq!(sol.vhat_of_alpha[2], exact, max_relative = 1e-6);
            let a2 = euler_reg_multiplier(v0, v1, v2, gamma).unwrap();
            assert_relative_eq!(sol.alpha[2], a2, max_relative = 1e-6);
        }
    }

    #[test]
    fn analytic_flux_jacobian_matches_finite_differences() {
        let c = ctx(3, MB, 1e-2);
        let v = [1.0, 0.4, 0.3, -0.1];
        let jac = c.flux_jacobian(&v).unwrap();
        let h = 1e-6 * (1.0 + 1.0);
        for j in 0..4 {
            let mut vp = v;
            let mut vm = v;
            vp[j] += h;
            vm[j] -= h;
            let fp = flux(&vp, &c).unwrap();
            let fm = flux(&vm, &c).unwrap();
            for i in 0..4 {
                assert_abs_diff_eq!((fp[i] - fm[i]) / (2.0 * h), jac[(i, j)], epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn small_probe_run() {
        let c = ctx(3, MB, 1e-3);
        let settings = ProbeSettings {
            samples: 20,
            ..ProbeSettings::default()
        };
        let r = accuracy_probe(&settings, &c).unwrap();
        assert_eq!(r.samples + r.failures, 20);
        assert_eq!(r.violations, 0);
        assert_eq!(r.violations_tau, 0);
        // no regularization: the error is the perturbation itself
        let unreg = ProbeSettings {
            delta: 1e-4,
            gamma: 0.0,
            samples: 10,
            ..ProbeSettings::default()
        };
        let r = accuracy_probe(&unreg, &c).unwrap();
        assert!(r.max_ratio <= 1.0 + 1e-6, "{r:?}");
        assert!(r.max_ratio > 0.99, "{r:?}");
    }
}
