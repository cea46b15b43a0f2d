use std::f64::consts::PI;
use std::sync::Arc;

use regmn::basis::{gauss_lobatto, legendre_basis, BasisSet};
use regmn::closure::ClosureContext;
use regmn::dg::{cfl_weight, timestep, Boundary, DGState, Discretization, Mesh1D, SlabProblem, TimeIntegrator};
use regmn::dual::{vhat, RegularizationConfig};
use regmn::entropy::EntropyModel;
use regmn::experiments::manufactured::manufactured_sample;
use regmn::experiments::{run_plane_source, ManufacturedConfig, PlaneSourceConfig};

const MB: EntropyModel = EntropyModel::MAXWELL_BOLTZMANN;

fn periodic(basis: &BasisSet, k: usize, cells: usize, sigma_s: f64, initial: regmn::dg::SpaceFn) -> Discretization {
    let ctx = ClosureContext::new(basis.clone(), MB, RegularizationConfig::new(1e-3, 1e-12)).unwrap();
    let mesh = Mesh1D::new(-PI, PI, cells, Boundary::Periodic).unwrap();
    let problem = SlabProblem {
        sigma_a: 0.0,
        sigma_s,
        source: None,
        initial,
    };
    Discretization::new(mesh, problem, ctx, k).unwrap()
}

fn smooth_initial(basis: &BasisSet) -> regmn::dg::SpaceFn {
    let b = basis.clone();
    Arc::new(move |x: f64| vhat(&[0.3 * x.sin(), 1.5 + x.cos()], &b, MB).unwrap().0)
}

#[test]
fn periodic_runs_conserve_mass() {
    let basis = legendre_basis(1, gauss_lobatto(20).unwrap());
    for k in [2, 3] {
        for sigma_s in [0.0, 2.0] {
            let mut disc = periodic(&basis, k, 32, sigma_s, smooth_initial(&basis));
            let mut state = disc.project_initial().unwrap();
            let dx = disc.mesh.dx();
            let m0 = state.total(0, dx);
            let integrator = TimeIntegrator::for_modes(k).unwrap();
            disc.run_to(&mut state, 0.5, &integrator, |_, _| {}).unwrap();
            let drift = (state.total(0, dx) - m0).abs() / 0.5;
            assert!(drift <= 1e-12, "k {k} sigma_s {sigma_s}: drift {drift:e}");
        }
    }
}

#[test]
fn isotropic_constant_state_is_steady() {
    let basis = legendre_basis(3, gauss_lobatto(20).unwrap());
    let iso = basis.moments_of_fn(|_| 0.7).0;
    let init = iso.clone();
    let mut disc = periodic(&basis, 3, 16, 1.0, Arc::new(move |_| init.clone()));
    let mut state = disc.project_initial().unwrap();
    let start = state.clone();
    let integrator = TimeIntegrator::for_modes(3).unwrap();
    let dt = integrator.dt(disc.mesh.dx(), &disc.problem);
    for _ in 0..100 {
        disc.step(&mut state, dt, integrator.scheme).unwrap();
    }
    let change = state
        .coeffs
        .iter()
        .zip(&start.coeffs)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(change <= 1e-12, "{change:e}");
}

#[test]
fn inflow_of_the_same_state_keeps_it_steady() {
    let basis = legendre_basis(3, gauss_lobatto(20).unwrap());
    let iso = basis.moments_of_fn(|_| 2.0).0;
    let ctx = ClosureContext::new(basis, MB, RegularizationConfig::new(1e-2, 1e-12)).unwrap();
    let (l, r, init) = (iso.clone(), iso.clone(), iso.clone());
    let mesh = Mesh1D::new(
        0.0,
        1.0,
        10,
        Boundary::Inflow {
            left: Arc::new(move |_| l.clone()),
            right: Arc::new(move |_| r.clone()),
        },
    )
    .unwrap();
    let problem = SlabProblem {
        sigma_a: 0.0,
        sigma_s: 0.5,
        source: None,
        initial: Arc::new(move |_| init.clone()),
    };
    let mut disc = Discretization::new(mesh, problem, ctx, 2).unwrap();
    let mut state = disc.project_initial().unwrap();
    let integrator = TimeIntegrator::for_modes(2).unwrap();
    disc.run_to(&mut state, 0.2, &integrator, |_, _| {}).unwrap();
    for cell in 0..10 {
        for (a, b) in state.cell_mean(cell).iter().zip(&iso) {
            assert!((a - b).abs() <= 1e-12);
        }
    }
}

#[test]
fn absorption_decays_mass_exponentially() {
    let basis = legendre_basis(1, gauss_lobatto(20).unwrap());
    let ctx = ClosureContext::new(basis.clone(), MB, RegularizationConfig::new(1e-3, 1e-12)).unwrap();
    let mesh = Mesh1D::new(-PI, PI, 16, Boundary::Periodic).unwrap();
    let problem = SlabProblem {
        sigma_a: 0.8,
        sigma_s: 0.0,
        source: None,
        initial: smooth_initial(&basis),
    };
    let mut disc = Discretization::new(mesh, problem, ctx, 3).unwrap();
    let mut state = disc.project_initial().unwrap();
    let dx = disc.mesh.dx();
    let m0 = state.total(0, dx);
    let integrator = TimeIntegrator::for_modes(3).unwrap();
    disc.run_to(&mut state, 0.5, &integrator, |_, _| {}).unwrap();
    let expected = m0 * (-0.8f64 * 0.5).exp();
    assert!((state.total(0, dx) - expected).abs() <= 1e-6 * expected);
}

#[test]
fn plane_source_entropy_does_not_increase() {
    let cfg = PlaneSourceConfig {
        order: 3,
        cells: 60,
        k: 2,
        t_final: 0.3,
        width: 0.1,
        gamma: 1e-4,
        tau: 1e-8,
        velocity_points: 20,
        diagnostics_every: 3,
        ..PlaneSourceConfig::default()
    };
    let r = run_plane_source(&cfg).unwrap();
    assert!(r.diagnostics.len() > 3);
    for w in r.diagnostics.windows(2) {
        assert!(w[1].entropy <= w[0].entropy + 1e-10 * w[0].entropy.abs().max(1.0));
    }
    let m0 = r.diagnostics[0].mass;
    assert!(r.diagnostics.iter().all(|d| (d.mass - m0).abs() <= 1e-10 * m0));
    assert!(r.asymmetry() <= 1e-10);
}

#[test]
fn manufactured_self_convergence_on_coarse_meshes() {
    let cfg = ManufacturedConfig {
        k: 2,
        cells: vec![20, 40, 80],
        ..ManufacturedConfig::reference(2)
    };
    let errors: Vec<f64> = cfg
        .cells
        .iter()
        .map(|&c| manufactured_sample(&cfg, c).unwrap().error)
        .collect();
    for w in errors.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order > 1.5, "{errors:?}");
    }
}

#[test]
fn timestep_examples() {
    assert_eq!(cfl_weight(2), (2, 0.5));
    assert_eq!(cfl_weight(3).0, 3);
    assert_eq!(cfl_weight(4).0, 3);
    let dt = timestep(0.01, 0.0, 1.0, 2);
    assert!((dt - 0.005 / 1.005).abs() < 1e-15);
    assert!((timestep(0.1, 0.0, 0.0, 3) - 0.1 / 6.0).abs() < 1e-15);
}

#[test]
fn state_totals_use_cell_means() {
    let mut s = DGState::zeros(4, 2, 1);
    for c in 0..4 {
        s.mode_mut(c, 0)[0] = c as f64;
        s.mode_mut(c, 1)[0] = 10.0;
    }
    assert_eq!(s.total(0, 0.5), 3.0);
}
