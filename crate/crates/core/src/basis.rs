//! Velocity discretization on `[-1, 1]`: Gauss-Lobatto quadrature and the
//! Legendre moment basis evaluated at its nodes.

use std::ops::{Deref, DerefMut};

use crate::error::{Error, Result};

/// Number of velocity quadrature points used when nothing else is configured.
pub const DEFAULT_VELOCITY_POINTS: usize = 40;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    /// The rule mapped affinely from `[-1, 1]` onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> Self {
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        Self {
            nodes: self.nodes.iter().map(|x| c + h * x).collect(),
            weights: self.weights.iter().map(|w| h * w).collect(),
        }
    }

    /// Weight of the endpoint nodes for the rule rescaled to an interval of
    /// unit length.
    pub fn unit_endpoint_weight(&self) -> f64 {
        0.5 * self.weights[0]
    }
}

/// Values `P_0(x), ..., P_order(x)` of the Legendre polynomials.
pub fn legendre_values(order: usize, x: f64, out: &mut [f64]) {
    debug_assert!(out.len() > order);
    out[0] = 1.0;
    if order == 0 {
        return;
    }
    out[1] = x;
    for k in 2..=order {
        let kf = k as f64;
        out[k] = ((2.0 * kf - 1.0) * x * out[k - 1] - (kf - 1.0) * out[k - 2]) / kf;
    }
}

/// Derivatives `P_0'(x), ..., P_order'(x)`.
pub fn legendre_derivatives(order: usize, x: f64, out: &mut [f64]) {
    let mut p = vec![0.0; order + 1];
    legendre_values(order, x, &mut p);
    out[0] = 0.0;
    for k in 1..=order {
        // P_k' = k P_{k-1} + x P_{k-1}'
        out[k] = k as f64 * p[k - 1] + x * out[k - 1];
    }
}

/// `q`-point Gauss-Lobatto rule on `[-1, 1]`.
///
/// Interior nodes are roots of `P'_{q-1}`; they are found by Newton iteration
/// from Chebyshev-Gauss-Lobatto starting points. Nodes are returned in
/// ascending order and are exactly symmetric about zero.
pub fn gauss_lobatto(q: usize) -> Result<QuadratureRule> {
    if q < 2 {
        return Err(Error::argument(format!(
            "Gauss-Lobatto rule needs at least 2 points, got {q}"
        )));
    }
    let n = q - 1;
    let nf = n as f64;
    let mut x: Vec<f64> = (0..q).map(|i| -(std::f64::consts::PI * i as f64 / nf).cos()).collect();
    let mut p = vec![0.0; n + 1];
    let mut last = vec![0.0; q];
    for xi in x.iter_mut().take(q - 1).skip(1) {
        for _ in 0..100 {
            legendre_values(n, *xi, &mut p);
            // Newton step for (1 - x^2) P_n'(x) written via P_n, P_{n-1}.
            let step = (*xi * p[n] - p[n - 1]) / (q as f64 * p[n]);
            *xi -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
    }
    for (i, xi) in x.iter().enumerate() {
        legendre_values(n, *xi, &mut p);
        last[i] = p[n];
    }
    let mut weights: Vec<f64> = last.iter().map(|&pn| 2.0 / (nf * (nf + 1.0) * pn * pn)).collect();
    // enforce exact mirror symmetry
    for i in 0..q / 2 {
        let j = q - 1 - i;
        let xm = 0.5 * (x[j] - x[i]);
        x[i] = -xm;
        x[j] = xm;
        let wm = 0.5 * (weights[i] + weights[j]);
        weights[i] = wm;
        weights[j] = wm;
    }
    if q % 2 == 1 {
        x[q / 2] = 0.0;
    }
    Ok(QuadratureRule { nodes: x, weights })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// Raw Legendre polynomials with `P_i(1) = 1`.
    Legendre,
    /// Legendre polynomials scaled to unit `L^2(-1, 1)` norm.
    Orthonormal,
    /// User-supplied functions, e.g. monomials on a truncated velocity line.
    Custom,
}

/// Moment basis evaluated on a velocity quadrature.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSet {
    order: usize,
    normalization: Normalization,
    quad: QuadratureRule,
    /// `m_i(mu_q)` stored node-major: `values[q * n + i]`.
    values: Vec<f64>,
}

impl BasisSet {
    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of moment components, `order + 1`.
    pub fn len(&self) -> usize {
        self.order + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn quadrature(&self) -> &QuadratureRule {
        &self.quad
    }

    pub fn num_nodes(&self) -> usize {
        self.quad.len()
    }

    /// Basis vector `m(mu_q)` at quadrature node `q`.
    #[inline]
    pub fn at_node(&self, q: usize) -> &[f64] {
        let n = self.len();
        &self.values[q * n..(q + 1) * n]
    }

    /// `m_i(mu_q)`.
    pub fn eval(&self, i: usize, q: usize) -> f64 {
        self.values[q * self.len() + i]
    }

    /// Evaluates `m(mu)` at an arbitrary velocity (Legendre bases only).
    pub fn eval_at(&self, mu: f64, out: &mut [f64]) {
        assert!(
            self.normalization != Normalization::Custom,
            "custom bases are only known at their quadrature nodes"
        );
        legendre_values(self.order, mu, out);
        if self.normalization == Normalization::Orthonormal {
            for (i, v) in out.iter_mut().enumerate().take(self.len()) {
                *v *= orthonormal_scale(i);
            }
        }
    }

    /// Basis `m_i(v) = f(i, v)` for `i = 0..=order` on an arbitrary
    /// quadrature (nodes need not lie in `[-1, 1]`).
    pub fn from_fn(order: usize, quad: QuadratureRule, f: impl Fn(usize, f64) -> f64) -> Self {
        let n = order + 1;
        let values = quad
            .nodes
            .iter()
            .flat_map(|&x| (0..n).map(move |i| (i, x)))
            .map(|(i, x)| f(i, x))
            .collect();
        Self {
            order,
            normalization: Normalization::Custom,
            quad,
            values,
        }
    }

    /// `<m g>` for density values `g` at the quadrature nodes.
    pub fn moments_of(&self, density: &[f64]) -> Result<MomentVector> {
        if density.len() != self.num_nodes() {
            return Err(Error::argument(format!(
                "density has {} values but the quadrature has {} nodes",
                density.len(),
                self.num_nodes()
            )));
        }
        let n = self.len();
        let mut out = vec![0.0; n];
        for (q, (&g, &w)) in density.iter().zip(&self.quad.weights).enumerate() {
            let wg = w * g;
            for (o, &m) in out.iter_mut().zip(self.at_node(q)) {
                *o += wg * m;
            }
        }
        Ok(MomentVector(out))
    }

    /// Moments `<m g>` of a density given as a function of velocity.
    pub fn moments_of_fn(&self, g: impl Fn(f64) -> f64) -> MomentVector {
        let density: Vec<f64> = self.quad.nodes.iter().map(|&mu| g(mu)).collect();
        self.moments_of(&density).expect("lengths agree by construction")
    }

    /// Gram matrix `<m m^T>` in row-major order.
    pub fn gram(&self) -> Vec<f64> {
        let n = self.len();
        let mut g = vec![0.0; n * n];
        for q in 0..self.num_nodes() {
            let w = self.quad.weights[q];
            let m = self.at_node(q);
            for i in 0..n {
                for j in 0..n {
                    g[i * n + j] += w * m[i] * m[j];
                }
            }
        }
        g
    }
}

fn orthonormal_scale(i: usize) -> f64 {
    ((2 * i + 1) as f64 / 2.0).sqrt()
}

/// Legendre basis of the given order on a velocity quadrature.
pub fn legendre_basis(order: usize, quad: QuadratureRule) -> BasisSet {
    build_basis(order, quad, Normalization::Legendre)
}

/// Orthonormal Legendre basis of the given order.
pub fn orthonormal_basis(order: usize, quad: QuadratureRule) -> BasisSet {
    build_basis(order, quad, Normalization::Orthonormal)
}

fn build_basis(order: usize, quad: QuadratureRule, normalization: Normalization) -> BasisSet {
    let n = order + 1;
    let mut values = vec![0.0; n * quad.len()];
    let mut basis = BasisSet {
        order,
        normalization,
        quad,
        values: Vec::new(),
    };
    for (q, chunk) in values.chunks_mut(n).enumerate() {
        basis.eval_at(basis.quad.nodes[q], chunk);
    }
    basis.values = values;
    basis
}

macro_rules! vector_newtype {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Default)]
        pub struct $name(pub Vec<f64>);

        impl $name {
            pub fn zeros(n: usize) -> Self {
                Self(vec![0.0; n])
            }

            pub fn norm(&self) -> f64 {
                self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
            }

            pub fn is_finite(&self) -> bool {
                self.0.iter().all(|x| x.is_finite())
            }

            pub fn into_inner(self) -> Vec<f64> {
                self.0
            }
        }

        impl Deref for $name {
            type Target = [f64];

            fn deref(&self) -> &[f64] {
                &self.0
            }
        }

        impl DerefMut for $name {
            fn deref_mut(&mut self) -> &mut [f64] {
                &mut self.0
            }
        }

        impl From<Vec<f64>> for $name {
            fn from(v: Vec<f64>) -> Self {
                Self(v)
            }
        }

        impl From<&[f64]> for $name {
            fn from(v: &[f64]) -> Self {
                Self(v.to_vec())
            }
        }
    };
}

vector_newtype!(
    /// Velocity moments `u_i ~ <m_i f>`. Need not be realizable.
    MomentVector
);
vector_newtype!(
    /// Lagrange multipliers `alpha` parameterizing the ansatz
    /// `eta_star'(alpha . m)`.
    MultiplierVector
);

/// Euclidean distance between two equally sized vectors.
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}
