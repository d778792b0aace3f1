//! Radial velocity grid for the Larmor-radius axis and its weighted quadrature.
//!
//! Nodes are cell-centered on a uniform grid, u_j = (j - 1/2) du, which keeps
//! the coordinate singularity of (1/u) d/du (u d/du .) off the grid. The
//! quadrature realizes integrals against the measure 2 pi u du. Interior
//! weights are the midpoint ones, 2 pi u_j du; the first and last four nodes
//! carry Gregory-type end corrections that make the rule exact for
//! polynomial integrands up to degree 2 and fourth-order accurate for smooth
//! ones. All correction coefficients keep the weights strictly positive.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Gregory end-correction coefficients for the composite midpoint rule,
/// applied symmetrically to the first and last four samples of u * g(u).
/// Exact rationals: 703/5760, -463/1920, 101/640, -223/5760.
const GREGORY4: [f64; 4] = [
    703.0 / 5760.0,
    -463.0 / 1920.0,
    101.0 / 640.0,
    -223.0 / 5760.0,
];

/// Polynomial degree (in the integrand g) the corrected rule integrates exactly.
pub const QUADRATURE_EXACT_DEGREE: usize = 2;
/// Nominal convergence order of the corrected rule for smooth integrands.
pub const QUADRATURE_ORDER: usize = 4;

/// Weight functions used by the norm family on the radial axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightKind {
    /// 2 pi u — the plain radial measure.
    U,
    /// 2 pi u (1 + u^2) — the moment weight.
    M,
    /// 1 + u^2.
    MTilde,
    /// 2 pi u (1 + u^2) / u = 2 pi (1 + u^2).
    InverseU,
}

impl WeightKind {
    /// Ratio of this weight function to the base measure 2 pi u.
    #[inline]
    pub fn ratio(self, u: f64) -> f64 {
        match self {
            WeightKind::U => 1.0,
            WeightKind::M => 1.0 + u * u,
            WeightKind::MTilde => (1.0 + u * u) / (2.0 * PI * u),
            WeightKind::InverseU => (1.0 + u * u) / u,
        }
    }
}

/// Discretization of u in (0, u_max] with quadrature for the 2 pi u du measure.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    du: f64,
    u_max: f64,
}

impl VelocityGrid {
    pub fn new(n_u: usize, u_max: f64) -> Result<Self> {
        if n_u == 0 {
            return Err(Error::Config("velocity grid needs at least one node".into()));
        }
        if !(u_max.is_finite() && u_max > 0.0) {
            return Err(Error::Config(format!("u_max must be positive and finite, got {u_max}")));
        }
        let du = u_max / n_u as f64;
        let nodes: Vec<f64> = (1..=n_u).map(|j| (j as f64 - 0.5) * du).collect();
        let mut weights: Vec<f64> = nodes.iter().map(|&u| 2.0 * PI * u * du).collect();
        if n_u >= 8 {
            for (i, &g) in GREGORY4.iter().enumerate() {
                weights[i] += 2.0 * PI * nodes[i] * du * g;
                weights[n_u - 1 - i] += 2.0 * PI * nodes[n_u - 1 - i] * du * g;
            }
        }
        debug_assert!(weights.iter().all(|&w| w > 0.0));
        Ok(Self { nodes, weights, du, u_max })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    #[inline]
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Quadrature weights against 2 pi u du.
    #[inline]
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        self.du
    }

    #[inline]
    pub fn u_max(&self) -> f64 {
        self.u_max
    }

    /// Weights for the requested weight kind (quadrature against k(u) du).
    pub fn weights_for(&self, kind: WeightKind) -> Vec<f64> {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&u, &w)| w * kind.ratio(u))
            .collect()
    }

    /// Quadrature of the sampled integrand against the requested weight.
    pub fn integrate_u(&self, samples: &[f64], kind: WeightKind) -> Result<f64> {
        if samples.len() != self.nodes.len() {
            return Err(Error::Shape(format!(
                "expected {} samples, got {}",
                self.nodes.len(),
                samples.len()
            )));
        }
        Ok(self
            .nodes
            .iter()
            .zip(&self.weights)
            .zip(samples)
            .map(|((&u, &w), &g)| w * kind.ratio(u) * g)
            .sum())
    }

    /// Plain midpoint inner product against u du: sum_j u_j du a_j b_j.
    /// This is the product in which the radial diffusion stencil is exactly
    /// self-adjoint, and whose induced mass functional the solver conserves
    /// to roundoff.
    pub fn inner_u(&self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), self.nodes.len());
        debug_assert_eq!(b.len(), self.nodes.len());
        self.nodes
            .iter()
            .zip(a.iter().zip(b))
            .map(|(&u, (&x, &y))| u * self.du * x * y)
            .sum()
    }

    /// Midpoint weights 2 pi u_j du (no end corrections).
    pub fn midpoint_weight(&self, j: usize) -> f64 {
        2.0 * PI * self.nodes[j] * self.du
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn weights_sum_to_disc_area() {
        for &(n, umax) in &[(8usize, 1.0), (32, 6.0), (513, 19.0)] {
            let g = VelocityGrid::new(n, umax).unwrap();
            let total: f64 = g.weights().iter().sum();
            assert_relative_eq!(total, PI * umax * umax, max_relative = 1e-13);
        }
    }

    #[test]
    fn exact_on_low_degree_polynomials() {
        let g = VelocityGrid::new(24, 1.0).unwrap();
        let ones = vec![1.0; g.len()];
        assert_relative_eq!(g.integrate_u(&ones, WeightKind::U).unwrap(), PI, max_relative = 1e-13);
        let lin: Vec<f64> = g.nodes().to_vec();
        assert_relative_eq!(
            g.integrate_u(&lin, WeightKind::U).unwrap(),
            2.0 * PI / 3.0,
            max_relative = 1e-13
        );
        let quad: Vec<f64> = g.nodes().iter().map(|&u| u * u).collect();
        assert_relative_eq!(g.integrate_u(&quad, WeightKind::U).unwrap(), PI / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn constant_times_two_covers_m_weight() {
        // integral of 2 pi u (1+u^2) over [0,1] = pi (1/1 + 1/2) ... check directly
        let g = VelocityGrid::new(64, 1.0).unwrap();
        let ones = vec![1.0; g.len()];
        let m = g.integrate_u(&ones, WeightKind::M).unwrap();
        assert_relative_eq!(m, PI + PI / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn weights_positive() {
        for n in [1usize, 2, 5, 8, 9, 32, 100] {
            let g = VelocityGrid::new(n, 3.0).unwrap();
            assert!(g.weights().iter().all(|&w| w > 0.0), "n = {n}");
        }
    }

    #[test]
    fn sample_count_mismatch_is_shape_error() {
        let g = VelocityGrid::new(16, 2.0).unwrap();
        assert!(matches!(
            g.integrate_u(&[1.0; 15], WeightKind::U),
            Err(crate::error::Error::Shape(_))
        ));
    }

    #[test]
    fn bad_config_rejected() {
        assert!(VelocityGrid::new(0, 1.0).is_err());
        assert!(VelocityGrid::new(8, -1.0).is_err());
        assert!(VelocityGrid::new(8, f64::NAN).is_err());
    }
}
