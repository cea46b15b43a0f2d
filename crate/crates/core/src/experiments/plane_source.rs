//! Plane-source benchmark: an isotropic pulse at the origin of an
//! (almost) vacuum slab, smoothed into a narrow Gaussian and floored so the
//! Maxwell-Boltzmann ansatz never has to reach zero.

use std::sync::Arc;

use crate::basis::{gauss_lobatto, legendre_basis, BasisSet};
use crate::closure::{entropy_pair, ClosureContext};
use crate::dg::{Boundary, DGState, Discretization, Mesh1D, SlabProblem, TimeIntegrator};
use crate::dual::RegularizationConfig;
use crate::entropy::EntropyModel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PlaneSourceConfig {
    pub x_lo: f64,
    pub x_hi: f64,
    /// Width of the initial Gaussian.
    pub width: f64,
    /// Lower bound on the initial and boundary densities.
    pub floor: f64,
    pub t_final: f64,
    pub order: usize,
    pub cells: usize,
    pub k: usize,
    pub gamma: f64,
    pub tau: f64,
    pub sigma_s: f64,
    pub sigma_a: f64,
    pub velocity_points: usize,
    pub model: EntropyModel,
    /// Record mass and entropy every this many steps (0 disables).
    pub diagnostics_every: usize,
    /// Profile samples per cell, equispaced at cell-interior points.
    pub profile_points: usize,
    pub dt_scale: f64,
}

impl Default for PlaneSourceConfig {
    fn default() -> Self {
        Self {
            x_lo: -1.2,
            x_hi: 1.2,
            width: 0.01,
            floor: 0.5e-8,
            t_final: 1.0,
            order: 5,
            cells: 400,
            k: 4,
            gamma: 1e-6,
            tau: 1e-7,
            sigma_s: 1.0,
            sigma_a: 0.0,
            velocity_points: 40,
            model: EntropyModel::MAXWELL_BOLTZMANN,
            diagnostics_every: 50,
            profile_points: 1,
            dt_scale: 1.0,
        }
    }
}

impl PlaneSourceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.floor > 0.0) {
            return Err(Error::argument("the density floor must be positive"));
        }
        if !(self.width > 0.0 && self.t_final > 0.0) {
            return Err(Error::argument("width and t_final must be positive"));
        }
        if self.cells == 0 || self.profile_points == 0 {
            return Err(Error::argument("cells and profile points must be positive"));
        }
        Ok(())
    }

    /// Initial density, independent of direction.
    pub fn initial_density(&self, x: f64) -> f64 {
        let s = self.width;
        ((-(x * x) / (s * s)).exp() / s).max(self.floor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostic {
    pub time: f64,
    pub mass: f64,
    /// `sum_cells h_gamma(cell mean) dx`.
    pub entropy: f64,
}

#[derive(Debug, Clone)]
pub struct PlaneSourceResult {
    pub config: PlaneSourceConfig,
    pub state: DGState,
    /// `(x, u(x))` samples at the final time.
    pub profile: Vec<(f64, Vec<f64>)>,
    pub diagnostics: Vec<Diagnostic>,
    pub steps: usize,
    pub solves: u64,
    pub newton_iterations: u64,
}

impl PlaneSourceResult {
    /// Largest `|u_0(x) - u_0(-x)|` over the profile samples.
    pub fn asymmetry(&self) -> f64 {
        let p = &self.profile;
        (0..p.len() / 2)
            .map(|i| (p[i].1[0] - p[p.len() - 1 - i].1[0]).abs())
            .fold(0.0, f64::max)
    }

    /// Largest `x` in `(0, x_max]` at which `u_0` reaches `threshold`; with
    /// `x_max` between two fronts this locates the inner one.
    pub fn front_location(&self, threshold: f64, x_max: f64) -> Option<f64> {
        self.profile
            .iter()
            .filter(|(x, u)| *x > 0.0 && *x <= x_max && u[0] >= threshold)
            .map(|(x, _)| *x)
            .fold(None, |acc, x| Some(acc.map_or(x, |a: f64| a.max(x))))
    }
}

fn isotropic_moments(basis: &BasisSet, density: f64) -> Vec<f64> {
    basis.moments_of_fn(|_| density).0
}

fn diagnostic(state: &DGState, disc: &Discretization) -> Result<Diagnostic> {
    let dx = disc.mesh.dx();
    let mut entropy = 0.0;
    for cell in 0..state.num_cells {
        entropy += entropy_pair(state.cell_mean(cell), &disc.ctx)?.0;
    }
    Ok(Diagnostic {
        time: state.time,
        mass: state.total(0, dx),
        entropy: entropy * dx,
    })
}

pub fn run_plane_source(cfg: &PlaneSourceConfig) -> Result<PlaneSourceResult> {
    cfg.validate()?;
    let basis = legendre_basis(cfg.order, gauss_lobatto(cfg.velocity_points)?);
    let ctx = ClosureContext::new(basis.clone(), cfg.model, RegularizationConfig::new(cfg.gamma, cfg.tau))?;
    let ghost = isotropic_moments(&basis, cfg.floor);
    let (gl, gr) = (ghost.clone(), ghost);
    let mesh = Mesh1D::new(
        cfg.x_lo,
        cfg.x_hi,
        cfg.cells,
        Boundary::Inflow {
            left: Arc::new(move |_| gl.clone()),
            right: Arc::new(move |_| gr.clone()),
        },
    )?;
    let init_cfg = cfg.clone();
    let init_basis = basis.clone();
    let problem = SlabProblem {
        sigma_a: cfg.sigma_a,
        sigma_s: cfg.sigma_s,
        source: None,
        initial: Arc::new(move |x| isotropic_moments(&init_basis, init_cfg.initial_density(x))),
    };
    let mut disc = Discretization::new(mesh, problem, ctx, cfg.k)?;
    let mut state = disc.project_initial()?;
    let mut integrator = TimeIntegrator::for_modes(cfg.k)?;
    integrator.dt_scale = cfg.dt_scale;

    let mut diagnostics = Vec::new();
    if cfg.diagnostics_every > 0 {
        diagnostics.push(diagnostic(&state, &disc)?);
    }
    let mut step_count = 0usize;
    let mut diag_error = None;
    let steps = disc.run_to(&mut state, cfg.t_final, &integrator, |s, d| {
        step_count += 1;
        let last = s.time >= cfg.t_final;
        if cfg.diagnostics_every > 0
            && (step_count.is_multiple_of(cfg.diagnostics_every) || last)
            && diag_error.is_none()
        {
            match diagnostic(s, d) {
                Ok(x) => diagnostics.push(x),
                Err(e) => diag_error = Some(e),
            }
        }
    })?;
    if let Some(e) = diag_error {
        return Err(e);
    }

    let mut profile = Vec::with_capacity(cfg.cells * cfg.profile_points);
    let n = basis.len();
    let mut u = vec![0.0; n];
    for cell in 0..cfg.cells {
        for p in 0..cfg.profile_points {
            let xi = -1.0 + (2 * p + 1) as f64 / cfg.profile_points as f64;
            state.eval(cell, xi, &mut u);
            profile.push((disc.mesh.to_physical(cell, xi), u.clone()));
        }
    }
    Ok(PlaneSourceResult {
        config: cfg.clone(),
        state,
        profile,
        diagnostics,
        steps,
        solves: disc.solves,
        newton_iterations: disc.newton_iterations,
    })
}
