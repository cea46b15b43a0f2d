//! Discontinuous-Galerkin discretization of the regularized slab moment
//! system
//!
//! ```text
//! d_t u + d_x f_gamma(u) = sigma_s R v_hat(alpha_gamma(u)) - sigma_a u + s
//! ```
//!
//! with modal Legendre polynomials in each cell, the Lax-Friedrichs flux and
//! the SSP Runge-Kutta schemes of [`ssp`].

pub mod ssp;

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::basis::{gauss_lobatto, legendre_derivatives, legendre_values, QuadratureRule};
use crate::closure::{scatter, ClosureContext, WarmStartPolicy};
use crate::error::{Error, Result};

pub use ssp::Scheme;

/// Moment-valued function of time (boundary data).
pub type TimeFn = Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>;
/// Moment-valued function of space (initial data).
pub type SpaceFn = Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>;
/// Moment-valued function of `(t, x)` (source).
pub type SourceFn = Arc<dyn Fn(f64, f64) -> Vec<f64> + Send + Sync>;

#[derive(Clone)]
pub enum Boundary {
    Periodic,
    /// Ghost states outside the left and right ends.
    Inflow {
        left: TimeFn,
        right: TimeFn,
    },
}

impl fmt::Debug for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Boundary::Periodic => f.write_str("Periodic"),
            Boundary::Inflow { .. } => f.write_str("Inflow"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Mesh1D {
    pub x_lo: f64,
    pub x_hi: f64,
    pub num_cells: usize,
    pub boundary: Boundary,
}

impl Mesh1D {
    pub fn new(x_lo: f64, x_hi: f64, num_cells: usize, boundary: Boundary) -> Result<Self> {
        if num_cells == 0 {
            return Err(Error::argument("mesh needs at least one cell"));
        }
        if !(x_hi > x_lo) {
            return Err(Error::argument(format!("empty domain ({x_lo}, {x_hi})")));
        }
        Ok(Self {
            x_lo,
            x_hi,
            num_cells,
            boundary,
        })
    }

    pub fn dx(&self) -> f64 {
        (self.x_hi - self.x_lo) / self.num_cells as f64
    }

    pub fn cell_center(&self, cell: usize) -> f64 {
        self.x_lo + (cell as f64 + 0.5) * self.dx()
    }

    /// Physical coordinate of reference point `xi` in `[-1, 1]`.
    pub fn to_physical(&self, cell: usize, xi: f64) -> f64 {
        self.cell_center(cell) + 0.5 * self.dx() * xi
    }
}

/// Modal coefficients, laid out cell-major, then mode, then moment
/// component.
#[derive(Debug, Clone, PartialEq)]
pub struct DGState {
    pub coeffs: Vec<f64>,
    pub num_cells: usize,
    /// Number of modes per cell (polynomial degree `k - 1`).
    pub k: usize,
    /// Number of moment components.
    pub n: usize,
    pub time: f64,
}

impl DGState {
    pub fn zeros(num_cells: usize, k: usize, n: usize) -> Self {
        Self {
            coeffs: vec![0.0; num_cells * k * n],
            num_cells,
            k,
            n,
            time: 0.0,
        }
    }

    pub fn mode(&self, cell: usize, mode: usize) -> &[f64] {
        let start = (cell * self.k + mode) * self.n;
        &self.coeffs[start..start + self.n]
    }

    pub fn mode_mut(&mut self, cell: usize, mode: usize) -> &mut [f64] {
        let start = (cell * self.k + mode) * self.n;
        &mut self.coeffs[start..start + self.n]
    }

    pub fn cell_mean(&self, cell: usize) -> &[f64] {
        self.mode(cell, 0)
    }

    /// Value of the moment polynomial at reference point `xi` of `cell`.
    pub fn eval(&self, cell: usize, xi: f64, out: &mut [f64]) {
        let mut p = vec![0.0; self.k];
        legendre_values(self.k - 1, xi, &mut p);
        out.iter_mut().for_each(|x| *x = 0.0);
        for (j, pj) in p.iter().enumerate() {
            for (o, c) in out.iter_mut().zip(self.mode(cell, j)) {
                *o += pj * c;
            }
        }
    }

    /// `sum_cells mean_c * dx` for component `c`, summed in cell order.
    pub fn total(&self, component: usize, dx: f64) -> f64 {
        (0..self.num_cells).map(|j| self.cell_mean(j)[component]).sum::<f64>() * dx
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|x| x.is_finite())
    }
}

#[derive(Clone)]
pub struct SlabProblem {
    pub sigma_a: f64,
    pub sigma_s: f64,
    pub source: Option<SourceFn>,
    pub initial: SpaceFn,
}

impl fmt::Debug for SlabProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SlabProblem")
            .field("sigma_a", &self.sigma_a)
            .field("sigma_s", &self.sigma_s)
            .field("source", &self.source.is_some())
            .finish_non_exhaustive()
    }
}

impl SlabProblem {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_a >= 0.0 && self.sigma_s >= 0.0) {
            return Err(Error::argument("cross sections must be nonnegative"));
        }
        Ok(())
    }
}

/// Smallest Gauss-Lobatto size `Q` with `2Q - 2 >= k`, and its endpoint weight
/// on the unit interval, `1 / (Q (Q - 1))`.
pub fn cfl_weight(k: usize) -> (usize, f64) {
    let q = (k.div_ceil(2) + 1).max(2);
    (q, 1.0 / (q * (q - 1)) as f64)
}

/// Default in-cell Gauss-Lobatto size: the smallest admissible one, raised to
/// `k` so the volume term of a linear flux is integrated exactly (the
/// three-point rule is unstable for `k = 4`).
pub fn volume_points(k: usize) -> usize {
    cfl_weight(k).0.max(k)
}

/// `w_Q dx / (1 + w_Q dx (sigma_a + sigma_s))` for a `q`-point rule.
pub fn timestep(dx: f64, sigma_a: f64, sigma_s: f64, q: usize) -> f64 {
    let w = 1.0 / (q * (q - 1)) as f64;
    w * dx / (1.0 + w * dx * (sigma_a + sigma_s))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeIntegrator {
    pub scheme: Scheme,
    /// Unit-interval endpoint weight entering the step size.
    pub cfl_weight: f64,
    /// Multiplier on the step size; 1 reproduces the standard choice.
    pub dt_scale: f64,
}

impl TimeIntegrator {
    pub fn for_modes(k: usize) -> Result<Self> {
        Ok(Self {
            scheme: Scheme::for_modes(k)?,
            cfl_weight: cfl_weight(k).1,
            dt_scale: 1.0,
        })
    }

    pub fn dt(&self, dx: f64, problem: &SlabProblem) -> f64 {
        let w = self.cfl_weight;
        self.dt_scale * w * dx / (1.0 + w * dx * (problem.sigma_a + problem.sigma_s))
    }
}

/// Closure values at every volume node, node-major within each cell.
struct NodalData {
    u: Vec<f64>,
    flux: Vec<f64>,
    /// `sigma_s R v_hat`, or zeros when there is no scattering.
    collision: Vec<f64>,
}

/// The spatial operator with its quadrature tables and warm-start cache.
pub struct Discretization {
    pub mesh: Mesh1D,
    pub problem: SlabProblem,
    pub ctx: ClosureContext,
    pub k: usize,
    /// Volume rule on `[-1, 1]`; its endpoints double as interface traces.
    volume: QuadratureRule,
    /// `P_j(xi_q)`, node-major.
    phi: Vec<f64>,
    /// `P_j'(xi_q)`, node-major.
    dphi: Vec<f64>,
    warm: Vec<f64>,
    warm_valid: bool,
    /// Number of closure solves and Newton iterations since construction.
    pub solves: u64,
    pub newton_iterations: u64,
}

impl Discretization {
    /// Uses [`volume_points`] nodes per cell.
    pub fn new(mesh: Mesh1D, problem: SlabProblem, ctx: ClosureContext, k: usize) -> Result<Self> {
        Self::with_volume_points(mesh, problem, ctx, k, volume_points(k))
    }

    pub fn with_volume_points(
        mesh: Mesh1D,
        problem: SlabProblem,
        ctx: ClosureContext,
        k: usize,
        points: usize,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::argument("k must be at least 1"));
        }
        problem.validate()?;
        let volume = gauss_lobatto(points)?;
        let nq = volume.len();
        let mut phi = vec![0.0; nq * k];
        let mut dphi = vec![0.0; nq * k];
        for q in 0..nq {
            legendre_values(k - 1, volume.nodes[q], &mut phi[q * k..(q + 1) * k]);
            legendre_derivatives(k - 1, volume.nodes[q], &mut dphi[q * k..(q + 1) * k]);
        }
        let n = ctx.n();
        Ok(Self {
            warm: vec![0.0; mesh.num_cells * nq * n],
            warm_valid: false,
            mesh,
            problem,
            ctx,
            k,
            volume,
            phi,
            dphi,
            solves: 0,
            newton_iterations: 0,
        })
    }

    pub fn n(&self) -> usize {
        self.ctx.n()
    }

    pub fn nodes_per_cell(&self) -> usize {
        self.volume.len()
    }

    /// Forgets cached multipliers, e.g. after replacing the state by hand.
    pub fn reset_warm_starts(&mut self) {
        self.warm_valid = false;
    }

    /// Per-cell L2 projection of the initial moments, by a 20-point
    /// Gauss-Lobatto rule.
    pub fn project_initial(&self) -> Result<DGState> {
        project(&self.mesh, self.k, self.n(), |x| (self.problem.initial)(x))
    }

    fn nodal_values(&mut self, coeffs: &[f64], t: f64) -> Result<NodalData> {
        let n = self.n();
        let k = self.k;
        let nq = self.volume.len();
        let stride = nq * n;
        let num_cells = self.mesh.num_cells;
        let mut data = NodalData {
            u: vec![0.0; num_cells * stride],
            flux: vec![0.0; num_cells * stride],
            collision: vec![0.0; num_cells * stride],
        };
        let use_warm = self.warm_valid && self.ctx.warm_start_policy == WarmStartPolicy::PerCallCache;
        let ctx = &self.ctx;
        let phi = &self.phi;
        let sigma_s = self.problem.sigma_s;

        let results: Vec<Result<(u64, u64)>> = data
            .u
            .par_chunks_mut(stride)
            .zip(data.flux.par_chunks_mut(stride))
            .zip(data.collision.par_chunks_mut(stride))
            .zip(self.warm.par_chunks_mut(stride))
            .enumerate()
            .map(|(cell, (((u, f), c), warm))| {
                let modes = &coeffs[cell * k * n..(cell + 1) * k * n];
                let mut iters = 0u64;
                for q in 0..nq {
                    let uq = &mut u[q * n..(q + 1) * n];
                    for j in 0..k {
                        let p = phi[q * k + j];
                        for (x, m) in uq.iter_mut().zip(&modes[j * n..(j + 1) * n]) {
                            *x += p * m;
                        }
                    }
                    let seed = use_warm.then(|| &warm[q * n..(q + 1) * n]);
                    let vals = ctx.evaluate(uq, seed).map_err(|e| Error::Closure {
                        cell,
                        node: q,
                        time: t,
                        source: Box::new(e),
                    })?;
                    iters += vals.iterations as u64;
                    warm[q * n..(q + 1) * n].copy_from_slice(&vals.alpha);
                    f[q * n..(q + 1) * n].copy_from_slice(&vals.flux);
                    if sigma_s > 0.0 {
                        c[q * n..(q + 1) * n].copy_from_slice(&scatter(&vals.regularized, sigma_s));
                    }
                }
                Ok((nq as u64, iters))
            })
            .collect();
        for r in results {
            let (s, i) = r?;
            self.solves += s;
            self.newton_iterations += i;
        }
        self.warm_valid = true;
        Ok(data)
    }

    /// Inflow ghost state and its flux next to `cell`.
    fn ghost(&self, data: &TimeFn, t: f64, cell: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        let u = data(t);
        if u.len() != self.n() {
            return Err(Error::argument("boundary data has the wrong length"));
        }
        let vals = self.ctx.evaluate(&u, None).map_err(|e| Error::Closure {
            cell,
            node: usize::MAX,
            time: t,
            source: Box::new(e),
        })?;
        Ok((u, vals.flux.0))
    }

    /// Time derivative of the modal coefficients.
    pub fn rhs(&mut self, coeffs: &[f64], t: f64, out: &mut Vec<f64>) -> Result<()> {
        let n = self.n();
        let k = self.k;
        let nq = self.volume.len();
        let num_cells = self.mesh.num_cells;
        if coeffs.len() != num_cells * k * n {
            return Err(Error::argument("state has the wrong size"));
        }
        let data = self.nodal_values(coeffs, t)?;
        let stride = nq * n;
        let last = (nq - 1) * n;

        // states and fluxes just outside each end of the domain
        let (left_ghost, right_ghost) = match &self.mesh.boundary {
            Boundary::Periodic => {
                let l = (num_cells - 1) * stride + last;
                let r = 0;
                (
                    (data.u[l..l + n].to_vec(), data.flux[l..l + n].to_vec()),
                    (data.u[r..r + n].to_vec(), data.flux[r..r + n].to_vec()),
                )
            }
            Boundary::Inflow { left, right } => (self.ghost(left, t, 0)?, self.ghost(right, t, num_cells - 1)?),
        };

        // interface i sits between cells i - 1 and i
        let mut numerical = vec![0.0; (num_cells + 1) * n];
        for (i, fhat) in numerical.chunks_mut(n).enumerate() {
            let (um, fm) = if i == 0 {
                (&left_ghost.0[..], &left_ghost.1[..])
            } else {
                let o = (i - 1) * stride + last;
                (&data.u[o..o + n], &data.flux[o..o + n])
            };
            let (up, fp) = if i == num_cells {
                (&right_ghost.0[..], &right_ghost.1[..])
            } else {
                let o = i * stride;
                (&data.u[o..o + n], &data.flux[o..o + n])
            };
            for c in 0..n {
                fhat[c] = 0.5 * (fm[c] + fp[c]) - 0.5 * (up[c] - um[c]);
            }
        }

        let dx = self.mesh.dx();
        let mesh = &self.mesh;
        let problem = &self.problem;
        let w = &self.volume.weights;
        let xi = &self.volume.nodes;
        let (phi, dphi) = (&self.phi, &self.dphi);
        out.clear();
        out.resize(coeffs.len(), 0.0);
        out.par_chunks_mut(k * n).enumerate().for_each(|(cell, rhs)| {
            let f = &data.flux[cell * stride..(cell + 1) * stride];
            let col = &data.collision[cell * stride..(cell + 1) * stride];
            let fl = &numerical[cell * n..(cell + 1) * n];
            let fr = &numerical[(cell + 1) * n..(cell + 2) * n];
            let sources: Vec<Vec<f64>> = match &problem.source {
                Some(s) => (0..nq).map(|q| s(t, mesh.to_physical(cell, xi[q]))).collect(),
                None => Vec::new(),
            };
            for j in 0..k {
                let scale = (2 * j + 1) as f64 / dx;
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                let r = &mut rhs[j * n..(j + 1) * n];
                for c in 0..n {
                    let mut volume = 0.0;
                    let mut local = 0.0;
                    for q in 0..nq {
                        volume += w[q] * f[q * n + c] * dphi[q * k + j];
                        let mut g = col[q * n + c];
                        if let Some(s) = sources.get(q) {
                            g += s[c];
                        }
                        local += w[q] * g * phi[q * k + j];
                    }
                    let surface = fr[c] - sign * fl[c];
                    let u_jc = coeffs[(cell * k + j) * n + c];
                    r[c] = scale * (volume - surface + 0.5 * dx * local) - problem.sigma_a * u_jc;
                }
            }
        });
        Ok(())
    }

    /// One step of size `dt` with the given scheme.
    pub fn step(&mut self, state: &mut DGState, dt: f64, scheme: Scheme) -> Result<()> {
        let t = state.time;
        ssp::step(scheme, &mut state.coeffs, t, dt, |u, s, out| self.rhs(u, s, out))?;
        state.time = t + dt;
        Ok(())
    }

    /// Steps to `t_final`, shrinking the last step to land on it exactly.
    /// `observer` sees the state after every step.
    pub fn run_to<O>(
        &mut self,
        state: &mut DGState,
        t_final: f64,
        integrator: &TimeIntegrator,
        mut observer: O,
    ) -> Result<usize>
    where
        O: FnMut(&DGState, &Self),
    {
        let dt = integrator.dt(self.mesh.dx(), &self.problem);
        let mut steps = 0;
        while state.time < t_final {
            let remaining = t_final - state.time;
            // avoid a sliver step from rounding in the accumulated time
            let h = if remaining <= dt * (1.0 + 1e-10) { remaining } else { dt };
            self.step(state, h, integrator.scheme)?;
            steps += 1;
            if remaining <= dt * (1.0 + 1e-10) {
                state.time = t_final;
            }
            if !state.is_finite() {
                return Err(Error::argument(format!(
                    "state became non-finite at t = {}",
                    state.time
                )));
            }
            observer(state, self);
        }
        Ok(steps)
    }
}

/// Per-cell L2 projection of `f` onto `k` Legendre modes using a 20-point
/// Gauss-Lobatto rule.
pub fn project<F>(mesh: &Mesh1D, k: usize, n: usize, f: F) -> Result<DGState>
where
    F: Fn(f64) -> Vec<f64> + Sync,
{
    if k == 0 {
        return Err(Error::argument("k must be at least 1"));
    }
    let rule = gauss_lobatto(20)?;
    let mut state = DGState::zeros(mesh.num_cells, k, n);
    let mut p = vec![0.0; k];
    let table: Vec<Vec<f64>> = rule
        .nodes
        .iter()
        .map(|&x| {
            legendre_values(k - 1, x, &mut p);
            p.clone()
        })
        .collect();
    let bad = state
        .coeffs
        .par_chunks_mut(k * n)
        .enumerate()
        .map(|(cell, c)| {
            for (q, &xi) in rule.nodes.iter().enumerate() {
                let u = f(mesh.to_physical(cell, xi));
                if u.len() != n {
                    return true;
                }
                for j in 0..k {
                    let s = 0.5 * (2 * j + 1) as f64 * rule.weights[q] * table[q][j];
                    for (cj, ui) in c[j * n..(j + 1) * n].iter_mut().zip(&u) {
                        *cj += s * ui;
                    }
                }
            }
            false
        })
        .reduce(|| false, |a, b| a || b);
    if bad {
        return Err(Error::argument("initial data has the wrong length"));
    }
    Ok(state)
}

/// `sum_cells int |u_0 - reference|` with a 20-point Gauss-Lobatto rule per
/// cell.
pub fn l1_error<F>(state: &DGState, reference: F, mesh: &Mesh1D) -> f64
where
    F: Fn(f64) -> f64 + Sync,
{
    let rule = gauss_lobatto(20).expect("20-point rule");
    let k = state.k;
    let table: Vec<Vec<f64>> = rule
        .nodes
        .iter()
        .map(|&x| {
            let mut p = vec![0.0; k];
            legendre_values(k - 1, x, &mut p);
            p
        })
        .collect();
    let half = 0.5 * mesh.dx();
    let per_cell: Vec<f64> = (0..state.num_cells)
        .into_par_iter()
        .map(|cell| {
            let mut acc = 0.0;
            for (q, &xi) in rule.nodes.iter().enumerate() {
                let u0: f64 = (0..k).map(|j| table[q][j] * state.mode(cell, j)[0]).sum();
                acc += rule.weights[q] * (u0 - reference(mesh.to_physical(cell, xi))).abs();
            }
            acc * half
        })
        .collect();
    per_cell.iter().sum()
}
