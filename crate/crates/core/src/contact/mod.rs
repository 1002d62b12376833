//! Weak (almost) contact metric structures and their verification.
//!
//! A structure is the quintuple `(φ, Q, ξ, η, g)` given by chart coefficients; `g`
//! comes from the chart. `Q̃ = Q − id` measures the distance from the classical
//! case, where `Q` is the identity.

mod checks;
mod construct;
mod einstein;
pub mod ntensors;

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::{gdot, matvec};
use crate::manifold::{full_frame, orthonormal_frame_d, ChartManifold, Ctx, TensorField};
use crate::riemann::Geometry;
use crate::tensor::{JTensor, Slot};

pub use checks::{
    classify, identity_suite, killing_equivalence, nabla_phi_lhs, nabla_phi_rhs, ntensor_suite, verify_axioms, Classification, KillingEquivalence,
    SuiteLevel, Tolerances,
};
pub use construct::{
    construct_from_killing, construct_from_killing_at, homothety, product_extension_check, KILLING_THRESHOLD,
    POSITIVITY_THRESHOLD,
};
pub use einstein::{einstein_diagnostic, EinsteinDiagnostic};

/// The nested classes, weakest first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LadderLevel {
    NotWeakAlmostContact,
    WeakAlmostContact,
    WeakAlmostContactMetric,
    WeakContactMetric,
    WeakKContact,
}

impl fmt::Display for LadderLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LadderLevel::NotWeakAlmostContact => "not weak almost contact",
            LadderLevel::WeakAlmostContact => "weak almost contact",
            LadderLevel::WeakAlmostContactMetric => "weak almost contact metric",
            LadderLevel::WeakContactMetric => "weak contact metric",
            LadderLevel::WeakKContact => "weak K-contact",
        })
    }
}

#[derive(Clone)]
pub struct WeakStructure {
    chart: Arc<ChartManifold>,
    phi: TensorField,
    q: TensorField,
    xi: TensorField,
    eta: TensorField,
}

impl fmt::Debug for WeakStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeakStructure").field("chart", &self.chart.name()).finish_non_exhaustive()
    }
}

impl WeakStructure {
    pub fn new(
        chart: Arc<ChartManifold>,
        phi: TensorField,
        q: TensorField,
        xi: TensorField,
        eta: TensorField,
    ) -> WeakStructure {
        WeakStructure { chart, phi, q, xi, eta }
    }

    pub fn chart(&self) -> &Arc<ChartManifold> {
        &self.chart
    }

    pub fn phi(&self) -> &TensorField {
        &self.phi
    }

    pub fn q(&self) -> &TensorField {
        &self.q
    }

    pub fn xi(&self) -> &TensorField {
        &self.xi
    }

    pub fn eta(&self) -> &TensorField {
        &self.eta
    }

    /// `Q̃ = Q − id`.
    pub fn q_tilde(&self) -> TensorField {
        let q = self.q.clone();
        TensorField::new(vec![Slot::Up, Slot::Down], move |ctx| {
            let q = q.eval(ctx)?;
            Ok(q.sub(&JTensor::identity11(ctx.dim(), q.order())))
        })
    }

    pub fn with_phi(&self, phi: TensorField) -> WeakStructure {
        WeakStructure { phi, ..self.clone() }
    }

    pub fn with_q(&self, q: TensorField) -> WeakStructure {
        WeakStructure { q, ..self.clone() }
    }

    pub fn with_xi(&self, xi: TensorField) -> WeakStructure {
        WeakStructure { xi, ..self.clone() }
    }

    pub fn with_eta(&self, eta: TensorField) -> WeakStructure {
        WeakStructure { eta, ..self.clone() }
    }

    /// Evaluates every field and the Riemannian data at `p`.
    pub fn local(&self, p: &[f64], order: usize) -> Result<LocalStructure> {
        let ctx = Ctx::new(p, order)?;
        let geom = Geometry::at(&self.chart, &ctx)?;
        let phi = self.phi.eval(&ctx)?;
        let q = self.q.eval(&ctx)?;
        let xi = self.xi.eval(&ctx)?;
        let eta = self.eta.eval(&ctx)?;
        Ok(LocalStructure { ctx, geom, phi, q, xi, eta })
    }
}

/// A structure evaluated at one point: jets for every field.
#[derive(Debug)]
pub struct LocalStructure {
    pub ctx: Ctx,
    pub geom: Geometry,
    pub phi: JTensor,
    pub q: JTensor,
    pub xi: JTensor,
    pub eta: JTensor,
}

impl LocalStructure {
    pub fn dim(&self) -> usize {
        self.ctx.dim()
    }

    pub fn half_dim(&self) -> usize {
        (self.dim() - 1) / 2
    }

    pub fn order(&self) -> usize {
        self.ctx.order()
    }

    pub fn q_tilde(&self) -> JTensor {
        self.q.sub(&JTensor::identity11(self.dim(), self.q.order()))
    }

    pub fn g(&self) -> Vec<f64> {
        self.geom.metric_value()
    }

    pub fn xi_v(&self) -> Vec<f64> {
        self.xi.values()
    }

    pub fn eta_v(&self) -> Vec<f64> {
        self.eta.values()
    }

    pub fn phi_x(&self, x: &[f64]) -> Vec<f64> {
        matvec(&self.phi.values(), x)
    }

    pub fn q_x(&self, x: &[f64]) -> Vec<f64> {
        matvec(&self.q.values(), x)
    }

    pub fn eta_x(&self, x: &[f64]) -> f64 {
        self.eta_v().iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn gdot(&self, a: &[f64], b: &[f64]) -> f64 {
        gdot(&self.g(), a, b)
    }

    /// Trace of `Q` on `𝒟`, i.e. the full trace minus the `Qξ = ξ` eigenvalue.
    /// This is the reading under which `tr Q = 2n + tr Q̃` and `Ric(ξ,ξ) = tr Q`.
    pub fn trace_q(&self) -> f64 {
        let q = self.q.values();
        (0..self.dim()).map(|i| q[i * self.dim() + i]).sum::<f64>() - 1.0
    }

    pub fn trace_q_tilde(&self) -> f64 {
        let q = self.q.values();
        (0..self.dim()).map(|i| q[i * self.dim() + i] - 1.0).sum()
    }

    /// Orthonormal basis of `ker η` built around `ξ`.
    pub fn frame_d(&self) -> Result<Vec<Vec<f64>>> {
        orthonormal_frame_d(&self.g(), &self.xi_v())
    }

    /// `ξ/|ξ|` followed by the basis of `𝒟`.
    pub fn frame(&self) -> Result<Vec<Vec<f64>>> {
        full_frame(&self.g(), &self.xi_v())
    }

    /// Chart-constant extension of a vector at this point.
    pub fn constant(&self, v: &[f64]) -> JTensor {
        JTensor::constant_vector(v, self.order())
    }

    /// Frame vectors plus `extra` pseudo-random vectors, reproducible from `seed`.
    pub fn test_vectors(&self, seed: u64, extra: usize) -> Result<Vec<Vec<f64>>> {
        let mut out = self.frame()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..extra {
            out.push((0..self.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect());
        }
        Ok(out)
    }
}

/// Per-point seed for random test vectors.
pub(crate) fn point_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(index as u64 + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::{ellipsoid, round_sphere};

    #[test]
    fn sphere_trace_q_is_two_and_q_tilde_vanishes() {
        let s = round_sphere().unwrap().structure().unwrap();
        let ls = s.local(&[0.6, 0.2, -0.4], 3).unwrap();
        assert!((ls.trace_q() - 2.0).abs() < 1e-12);
        assert!(ls.q_tilde().max_abs() < 1e-12);
        assert!(ls.trace_q_tilde().abs() < 1e-12);
    }

    #[test]
    fn trace_split_on_the_ellipsoid() {
        let s = ellipsoid(2.0).unwrap().structure().unwrap();
        let ls = s.local(&[0.9, 1.0, 2.0], 3).unwrap();
        assert!((ls.trace_q() - (2.0 + ls.trace_q_tilde())).abs() < 1e-12);
        assert!(ls.q_tilde().max_abs() > 1e-3);
    }

    #[test]
    fn test_vectors_are_reproducible() {
        let s = ellipsoid(2.0).unwrap().structure().unwrap();
        let ls = s.local(&[0.9, 1.0, 2.0], 2).unwrap();
        let a = ls.test_vectors(point_seed(3, 1), 2).unwrap();
        assert_eq!(a, ls.test_vectors(point_seed(3, 1), 2).unwrap());
        assert_ne!(a, ls.test_vectors(point_seed(4, 1), 2).unwrap());
        assert_eq!(a.len(), 5);
        assert!((ls.gdot(&a[0], &ls.xi_v()) - 1.0).abs() < 1e-12);
    }
}
