//! Convergence study against the manufactured solution
//! `w(t, x) = <m exp(a0 + a1 mu)>` with `a0 = -sin(x - t) + 4t + c` and
//! `a1 = K + sin(x - t)`. The source is computed with the unregularized flux,
//! so the regularized scheme converges to `w` only as `gamma -> 0`.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::basis::{gauss_lobatto, legendre_basis, BasisSet};
use crate::closure::ClosureContext;
use crate::dg::{l1_error, volume_points, Boundary, Discretization, Mesh1D, SlabProblem, TimeIntegrator};
use crate::dual::RegularizationConfig;
use crate::entropy::EntropyModel;
use crate::error::{Error, Result};

use super::{with_orders, ConvergenceRow, ParamRule};

#[derive(Debug, Clone, PartialEq)]
pub struct ManufacturedConfig {
    pub order: usize,
    pub steepness: f64,
    pub t_final: f64,
    /// Spatial modes per cell.
    pub k: usize,
    pub cells: Vec<usize>,
    pub gamma_rule: ParamRule,
    pub tau_rule: ParamRule,
    pub velocity_points: usize,
    pub model: EntropyModel,
    pub dt_scale: f64,
    /// In-cell Gauss-Lobatto size; `None` uses the discretization default.
    pub volume_points: Option<usize>,
}

impl ManufacturedConfig {
    pub fn reference(k: usize) -> Self {
        Self {
            order: 3,
            steepness: 5.0,
            t_final: PI / 5.0,
            k,
            cells: vec![320, 640, 1280],
            gamma_rule: ParamRule::DxPowK { factor: 0.1 },
            tau_rule: ParamRule::DxPowK { factor: 0.1 },
            velocity_points: 20,
            model: EntropyModel::MAXWELL_BOLTZMANN,
            dt_scale: 1.0,
            volume_points: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.model != EntropyModel::MAXWELL_BOLTZMANN {
            return Err(Error::argument(
                "the manufactured solution is built for the Maxwell-Boltzmann entropy",
            ));
        }
        if self.cells.is_empty() || self.cells.contains(&0) {
            return Err(Error::argument("cell counts must be positive"));
        }
        if !(self.t_final > 0.0) || !(self.steepness > 1.0) {
            return Err(Error::argument("t_final must be positive and K > 1"));
        }
        Ok(())
    }
}

/// The exact solution and its source on a given velocity basis.
#[derive(Debug, Clone)]
pub struct ManufacturedSolution {
    steepness: f64,
    offset: f64,
    basis: BasisSet,
}

impl ManufacturedSolution {
    pub fn new(steepness: f64, t_final: f64, basis: BasisSet) -> Self {
        let km1 = steepness - 1.0;
        let log_2sinh = km1 + (-(-2.0 * km1).exp()).ln_1p();
        Self {
            steepness,
            offset: km1.ln() - log_2sinh - 1.0 - 4.0 * t_final,
            basis,
        }
    }

    pub fn multipliers(&self, t: f64, x: f64) -> (f64, f64) {
        let s = (x - t).sin();
        (-s + 4.0 * t + self.offset, self.steepness + s)
    }

    pub fn moments(&self, t: f64, x: f64) -> Vec<f64> {
        let (a0, a1) = self.multipliers(t, x);
        self.basis.moments_of_fn(|mu| (a0 + a1 * mu).exp()).0
    }

    /// `d_t w + d_x f(w)` evaluated through the multipliers.
    pub fn source(&self, t: f64, x: f64) -> Vec<f64> {
        let (a0, a1) = self.multipliers(t, x);
        let c = (x - t).cos();
        let (dt0, dt1) = (c + 4.0, -c);
        let (dx0, dx1) = (-c, c);
        self.basis
            .moments_of_fn(|mu| {
                let g = (a0 + a1 * mu).exp();
                (dt0 + mu * dt1 + mu * (dx0 + mu * dx1)) * g
            })
            .0
    }
}

/// Outcome of one resolution, with solver statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct ManufacturedSample {
    pub cells: usize,
    pub gamma: f64,
    pub tau: f64,
    pub error: f64,
    pub steps: usize,
    pub solves: u64,
    pub newton_iterations: u64,
}

pub fn manufactured_sample(cfg: &ManufacturedConfig, cells: usize) -> Result<ManufacturedSample> {
    cfg.validate()?;
    let basis = legendre_basis(cfg.order, gauss_lobatto(cfg.velocity_points)?);
    let exact = Arc::new(ManufacturedSolution::new(cfg.steepness, cfg.t_final, basis.clone()));
    let mesh = Mesh1D::new(-PI, PI, cells, Boundary::Periodic)?;
    let dx = mesh.dx();
    let gamma = cfg.gamma_rule.eval(dx, cfg.k);
    let tau = cfg.tau_rule.eval(dx, cfg.k);
    let ctx = ClosureContext::new(basis, cfg.model, RegularizationConfig::new(gamma, tau))?;
    let (e0, e1) = (exact.clone(), exact.clone());
    let problem = SlabProblem {
        sigma_a: 0.0,
        sigma_s: 0.0,
        source: Some(Arc::new(move |t, x| e0.source(t, x))),
        initial: Arc::new(move |x| e1.moments(0.0, x)),
    };
    let points = cfg.volume_points.unwrap_or(volume_points(cfg.k));
    let mut disc = Discretization::with_volume_points(mesh, problem, ctx, cfg.k, points)?;
    let mut state = disc.project_initial()?;
    let mut integrator = TimeIntegrator::for_modes(cfg.k)?;
    integrator.dt_scale = cfg.dt_scale;
    let steps = disc.run_to(&mut state, cfg.t_final, &integrator, |_, _| {})?;
    let t = cfg.t_final;
    let error = l1_error(&state, |x| exact.moments(t, x)[0], &disc.mesh);
    Ok(ManufacturedSample {
        cells,
        gamma,
        tau,
        error,
        steps,
        solves: disc.solves,
        newton_iterations: disc.newton_iterations,
    })
}

pub fn manufactured_samples(cfg: &ManufacturedConfig) -> Result<Vec<ManufacturedSample>> {
    cfg.cells.iter().map(|&c| manufactured_sample(cfg, c)).collect()
}

/// `L1` error of the zeroth moment at `t_final` against cell count.
pub fn run_manufactured(cfg: &ManufacturedConfig) -> Result<Vec<ConvergenceRow>> {
    let samples = manufactured_samples(cfg)?;
    Ok(with_orders(
        samples.iter().map(|s| (s.cells as f64, s.error)).collect(),
        false,
    ))
}
