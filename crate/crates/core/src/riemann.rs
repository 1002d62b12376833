//! Levi-Civita connection, curvature and the derivative operators built on it.
//!
//! Curvature convention: `R(X,Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_{[X,Y]}Z`, stored as
//! `R[l, k, i, j] = R^l_{kij}` with `R(∂_i, ∂_j)∂_k = R^l_{kij} ∂_l`. With this
//! sign the round sphere has sectional curvature `+1` and
//! `Ric(X,Y) = tr(Z ↦ R(Z,X)Y)`.
//!
//! Every jet derivative costs one order: from a metric at order `k` the
//! Christoffel symbols carry order `k − 1`, curvature `k − 2`, and `∇Ric`
//! `k − 3`.

use std::cell::OnceCell;

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::linalg::{gdot, inverse, min_eigenvalue};
use crate::manifold::{full_frame, ChartManifold, Ctx};
use crate::tensor::{bracket, derive_along, JTensor, Slot};

/// Smallest metric eigenvalue still treated as positive definite.
pub const MIN_METRIC_EIGENVALUE: f64 = 1e-10;

/// Pointwise Riemannian data as jets.
#[derive(Debug)]
pub struct Geometry {
    dim: usize,
    g: JTensor,
    ginv: JTensor,
    gamma: JTensor,
    riemann: OnceCell<JTensor>,
    ricci: OnceCell<JTensor>,
}

impl Geometry {
    pub fn at(chart: &ChartManifold, ctx: &Ctx) -> Result<Geometry> {
        Geometry::from_metric(chart.metric(ctx)?)
    }

    pub fn from_metric(g: JTensor) -> Result<Geometry> {
        let n = g.dim();
        let g0 = g.values();
        let lam = min_eigenvalue(&g0, n);
        if !(lam > MIN_METRIC_EIGENVALUE) {
            return Err(Error::SingularMetric(lam));
        }
        let ginv = metric_inverse(&g, &g0)?;
        let dg = g.partial()?;
        // Γ^k_ij = ½ g^{kl}(∂_i g_jl + ∂_j g_il − ∂_l g_ij); dg[a, b, c] = ∂_c g_ab.
        let gamma = JTensor::from_fn(n, vec![Slot::Up, Slot::Down, Slot::Down], |kij| {
            let (k, i, j) = (kij[0], kij[1], kij[2]);
            let mut acc: Option<Jet> = None;
            for l in 0..n {
                let inner = dg.get(&[j, l, i]) + dg.get(&[i, l, j]) - dg.get(&[i, j, l]);
                let term = ginv.get(&[k, l]) * &inner;
                match acc.as_mut() {
                    Some(a) => *a += &term,
                    None => acc = Some(term),
                }
            }
            acc.expect("dim >= 1").scale(0.5)
        });
        Ok(Geometry { dim: n, g, ginv, gamma, riemann: OnceCell::new(), ricci: OnceCell::new() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn metric(&self) -> &JTensor {
        &self.g
    }

    pub fn metric_inverse(&self) -> &JTensor {
        &self.ginv
    }

    pub fn christoffel(&self) -> &JTensor {
        &self.gamma
    }

    pub fn metric_value(&self) -> Vec<f64> {
        self.g.values()
    }

    /// Order of the metric jets this geometry was built from.
    pub fn order(&self) -> usize {
        self.g.order()
    }

    fn require(&self, needed: usize) -> Result<()> {
        if self.order() < needed {
            return Err(Error::InsufficientOrder { needed, have: self.order() });
        }
        Ok(())
    }

    pub fn riemann(&self) -> Result<&JTensor> {
        self.require(2)?;
        if self.riemann.get().is_none() {
            let r = self.build_riemann()?;
            let _ = self.riemann.set(r);
        }
        Ok(self.riemann.get().expect("initialised"))
    }

    fn build_riemann(&self) -> Result<JTensor> {
        let n = self.dim;
        let gam = &self.gamma;
        let dgam = gam.partial()?;
        Ok(JTensor::from_fn(n, vec![Slot::Up, Slot::Down, Slot::Down, Slot::Down], |idx| {
            let (l, k, i, j) = (idx[0], idx[1], idx[2], idx[3]);
            let mut acc = dgam.get(&[l, j, k, i]) - dgam.get(&[l, i, k, j]);
            for m in 0..n {
                acc += &(gam.get(&[l, i, m]) * gam.get(&[m, j, k]));
                acc += &(-(gam.get(&[l, j, m]) * gam.get(&[m, i, k])));
            }
            acc
        }))
    }

    /// Ricci tensor by index contraction `Ric_jk = R^i_{kij}`.
    pub fn ricci(&self) -> Result<&JTensor> {
        if self.ricci.get().is_none() {
            let r = self.riemann()?;
            let ric = r.trace(0, 2).transpose(0, 1);
            let _ = self.ricci.set(ric);
        }
        Ok(self.ricci.get().expect("initialised"))
    }

    pub fn scalar_curvature(&self) -> Result<f64> {
        let ric = self.ricci()?.values();
        let ginv = self.ginv.values();
        Ok(ric.iter().zip(&ginv).map(|(a, b)| a * b).sum())
    }

    /// `R(X,Y)Z` at the point.
    pub fn curvature_apply(&self, x: &[f64], y: &[f64], z: &[f64]) -> Result<Vec<f64>> {
        let r = self.riemann()?;
        Ok(r.eval_partial(&[None, Some(z), Some(x), Some(y)]))
    }

    /// `g(R(X,Y)Z, W)`.
    pub fn curvature4(&self, x: &[f64], y: &[f64], z: &[f64], w: &[f64]) -> Result<f64> {
        let rz = self.curvature_apply(x, y, z)?;
        Ok(gdot(&self.metric_value(), &rz, w))
    }

    /// Sectional curvature of the plane spanned by `x`, `y`.
    pub fn sectional(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let g = self.metric_value();
        let denom = gdot(&g, x, x) * gdot(&g, y, y) - gdot(&g, x, y).powi(2);
        if denom.abs() < 1e-14 {
            return Err(Error::DegeneratePlane(denom));
        }
        Ok(self.curvature4(x, y, y, x)? / denom)
    }

    /// Ricci values by frame contraction `Σ_i g(R(e_i, X)Y, e_i)` over a
    /// g-orthonormal frame built around the first coordinate direction.
    pub fn ricci_by_frame(&self) -> Result<Vec<f64>> {
        let n = self.dim;
        let g = self.metric_value();
        let mut seed = vec![0.0; n];
        seed[0] = 1.0;
        let frame = full_frame(&g, &seed)?;
        let r = self.riemann()?;
        let mut out = vec![0.0; n * n];
        let basis = |k: usize| {
            let mut v = vec![0.0; n];
            v[k] = 1.0;
            v
        };
        for a in 0..n {
            for b in 0..n {
                let (x, y) = (basis(a), basis(b));
                out[a * n + b] = frame
                    .iter()
                    .map(|e| gdot(&g, &r.eval_partial(&[None, Some(&y), Some(e), Some(&x)]), e))
                    .sum();
            }
        }
        Ok(out)
    }

    /// `(Ric, τ)` at the point. Ricci is contracted over an orthonormal frame; debug
    /// builds cross-check it against the index contraction.
    pub fn ricci_and_scalar(&self) -> Result<(Vec<f64>, f64)> {
        let by_frame = self.ricci_by_frame()?;
        let by_index = self.ricci()?.values();
        debug_assert!(
            by_frame.iter().zip(&by_index).all(|(a, b)| (a - b).abs() <= 1e-9 * (1.0 + b.abs())),
            "ricci frame/index contraction mismatch: {by_frame:?} vs {by_index:?}"
        );
        let ginv = self.ginv.values();
        let tau = by_frame.iter().zip(&ginv).map(|(a, b)| a * b).sum();
        Ok((by_frame, tau))
    }

    /// Covariant derivative with the derivative slot appended last.
    pub fn nabla(&self, t: &JTensor) -> Result<JTensor> {
        t.covariant(&self.gamma)
    }

    /// `∇_X T` for a vector field `X`.
    pub fn nabla_along(&self, t: &JTensor, x: &JTensor) -> Result<JTensor> {
        let d = self.nabla(t)?;
        Ok(d.contract(d.rank() - 1, x))
    }

    /// `(∇_c Ric)_{ab} ξ^a` as an m×m array indexed `[b][c]`, i.e. the value of
    /// `(∇_{∂_c} Ric)(ξ, ∂_b)`.
    pub fn nabla_ricci_contracted(&self, xi: &[f64]) -> Result<Vec<f64>> {
        self.require(3)?;
        let dric = self.nabla(self.ricci()?)?;
        Ok(dric.eval_partial(&[Some(xi), None, None]))
    }

    pub fn lower(&self, v: &JTensor) -> JTensor {
        self.g.contract(0, v).relabel(vec![Slot::Down])
    }

    pub fn raise(&self, w: &JTensor) -> JTensor {
        self.ginv.contract(0, w).relabel(vec![Slot::Up])
    }

    /// `g(X, Y)` as a scalar jet.
    pub fn inner(&self, x: &JTensor, y: &JTensor) -> JTensor {
        self.g.contract(0, x).contract(0, y)
    }

    /// `(£_X g)` via the bracket definition.
    pub fn lie_metric(&self, x: &JTensor) -> Result<JTensor> {
        self.g.lie(x)
    }

    /// `g(∇_Y X, Z) + g(∇_Z X, Y)`, the connection form of `£_X g`.
    pub fn killing_form(&self, x: &JTensor) -> Result<JTensor> {
        let nx = self.nabla(x)?; // [a; c] = (∇_c X)^a
        let n = self.dim;
        let g = &self.g;
        Ok(JTensor::from_fn(n, vec![Slot::Down, Slot::Down], |yz| {
            let (y, z) = (yz[0], yz[1]);
            let mut acc = g.get(&[0, z]) * nx.get(&[0, y]) + g.get(&[0, y]) * nx.get(&[0, z]);
            for a in 1..n {
                acc += &(g.get(&[a, z]) * nx.get(&[a, y]) + g.get(&[a, y]) * nx.get(&[a, z]));
            }
            acc
        }))
    }

    /// Gradient vector field `g^{ij} ∂_j f`.
    pub fn gradient(&self, f: &JTensor) -> Result<JTensor> {
        Ok(self.raise(&f.partial()?.relabel(vec![Slot::Down])))
    }

    /// Hessian `∇df`, cross-checked against `½ £_{∇f} g`.
    pub fn hessian(&self, f: &JTensor) -> Result<JTensor> {
        let df = f.partial()?;
        let hess = self.nabla(&df)?;
        let alt = self.lie_metric(&self.gradient(f)?)?.scale(0.5);
        let gap = hess.values().iter().zip(alt.values()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let scale = 1.0 + hess.max_abs();
        if gap > 1e-6 * scale {
            return Err(Error::InternalInconsistency(format!("hessian routes differ by {gap:e}")));
        }
        Ok(hess)
    }

    /// Nijenhuis torsion `φ²[X,Y] + [φX, φY] − φ[φX,Y] − φ[X,φY]`.
    pub fn nijenhuis(phi: &JTensor, x: &JTensor, y: &JTensor) -> Result<JTensor> {
        let px = phi.act(x);
        let py = phi.act(y);
        let phi2 = phi.compose(phi);
        let t1 = phi2.act(&bracket(x, y)?);
        let t2 = bracket(&px, &py)?;
        let t3 = phi.act(&bracket(&px, y)?);
        let t4 = phi.act(&bracket(x, &py)?);
        Ok(t1.add(&t2).sub(&t3).sub(&t4))
    }
}

/// `g^{-1}` as jets: with `g = g₀ + H`, `g^{-1} = Σ_k (−g₀^{-1}H)^k g₀^{-1}`,
/// which terminates because `H` has no constant part.
fn metric_inverse(g: &JTensor, g0: &[f64]) -> Result<JTensor> {
    let n = g.dim();
    let order = g.order();
    let inv0 = inverse(g0, n)?;
    let slots = vec![Slot::Up, Slot::Up];
    let c0 = JTensor::constant(n, slots.clone(), order, &inv0);
    let h = g.map(|j| j - j.value());
    // step = −g₀^{-1} H, a (1,1) tensor.
    let step = c0.outer(&h).trace(1, 2).scale(-1.0);
    let mut term = c0.clone();
    let mut acc = c0;
    for _ in 0..order {
        term = step.outer(&term).trace(1, 2);
        acc = acc.add(&term);
    }
    Ok(acc)
}

/// Exterior derivative of a 0-, 1- or 2-form evaluated on vector fields with the
/// `1/(k+1)` normalisation: `dη(X,Y) = ½{X η(Y) − Y η(X) − η([X,Y])}` and the
/// matching one-third formula for 2-forms. Functions (`k = 0`) give `df(X) = X(f)`.
pub fn exterior_derivative_eval(form: &JTensor, args: &[&JTensor]) -> Result<JTensor> {
    let k = form.rank();
    if args.len() != k + 1 {
        return Err(Error::DimensionMismatch { expected: k + 1, got: args.len() });
    }
    let apply = |xs: &[&JTensor]| -> JTensor {
        let mut t = form.clone();
        for x in xs.iter().rev() {
            t = t.contract(t.rank() - 1, x);
        }
        t
    };
    match k {
        0 => derive_along(form, args[0]),
        1 => {
            let (x, y) = (args[0], args[1]);
            let a = derive_along(&apply(&[y]), x)?;
            let b = derive_along(&apply(&[x]), y)?;
            let c = apply(&[&bracket(x, y)?]);
            Ok(a.sub(&b).sub(&c).scale(0.5))
        }
        2 => {
            let (x, y, z) = (args[0], args[1], args[2]);
            let t1 = derive_along(&apply(&[y, z]), x)?;
            let t2 = derive_along(&apply(&[z, x]), y)?;
            let t3 = derive_along(&apply(&[x, y]), z)?;
            let t4 = apply(&[&bracket(x, y)?, z]);
            let t5 = apply(&[&bracket(z, x)?, y]);
            let t6 = apply(&[&bracket(y, z)?, x]);
            Ok(t1.add(&t2).add(&t3).sub(&t4).sub(&t5).sub(&t6).scale(1.0 / 3.0))
        }
        other => Err(Error::UnsupportedDegree(other)),
    }
}

/// Components of `dω` on coordinate fields, same normalisation as
/// [`exterior_derivative_eval`]. The result keeps jets, so `d(dω)` is available.
pub fn exterior_derivative(form: &JTensor) -> Result<JTensor> {
    let k = form.rank();
    let d = form.partial()?; // derivative slot last
    let n = form.dim();
    match k {
        0 => Ok(d),
        1 => Ok(JTensor::from_fn(n, vec![Slot::Down; 2], |ij| {
            (d.get(&[ij[1], ij[0]]) - d.get(&[ij[0], ij[1]])).scale(0.5)
        })),
        2 => Ok(JTensor::from_fn(n, vec![Slot::Down; 3], |xyz| {
            let (x, y, z) = (xyz[0], xyz[1], xyz[2]);
            (d.get(&[y, z, x]) + d.get(&[z, x, y]) + d.get(&[x, y, z])).scale(1.0 / 3.0)
        })),
        other => Err(Error::UnsupportedDegree(other)),
    }
}

impl JTensor {
    /// Reinterprets slot variances without touching components.
    pub fn relabel(&self, slots: Vec<Slot>) -> JTensor {
        assert_eq!(slots.len(), self.rank());
        JTensor::new(self.dim(), slots, self.data().to_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{euclidean_metric, MetricSource};
    use std::sync::Arc;

    fn round_s3() -> ChartManifold {
        // g = diag(1, cos²ρ, sin²ρ)
        let metric = MetricSource::Direct(Arc::new(|ctx: &Ctx| {
            let x = ctx.coords();
            let (c, s) = (x[0].cos(), x[0].sin());
            let z = x[0].zero_like();
            let one = x[0].lift(1.0);
            Ok(JTensor::new(
                3,
                vec![Slot::Down, Slot::Down],
                vec![one, z.clone(), z.clone(), z.clone(), &c * &c, z.clone(), z.clone(), z, &s * &s],
            ))
        }));
        ChartManifold::new("s3", &["rho", "t1", "t2"], &[0.0, -3.0, -3.0], &[1.5, 3.0, 3.0], metric).unwrap()
    }

    fn euclid() -> ChartManifold {
        ChartManifold::new("r3", &["x", "y", "z"], &[-1.0; 3], &[1.0; 3], euclidean_metric()).unwrap()
    }

    #[test]
    fn flat_metric_has_no_connection_or_curvature() {
        let geo = Geometry::at(&euclid(), &Ctx::new(&[0.1, 0.2, 0.3], 3).unwrap()).unwrap();
        assert!(geo.christoffel().values().iter().all(|v| *v == 0.0));
        assert!(geo.riemann().unwrap().values().iter().all(|v| *v == 0.0));
        let (ric, tau) = geo.ricci_and_scalar().unwrap();
        assert!(ric.iter().all(|v| *v == 0.0));
        assert_eq!(tau, 0.0);
    }

    #[test]
    fn sphere_christoffels_at_quarter_pi() {
        let p = [std::f64::consts::FRAC_PI_4, 0.0, 0.0];
        let geo = Geometry::at(&round_s3(), &Ctx::new(&p, 2).unwrap()).unwrap();
        let gam = geo.christoffel();
        assert!((gam.value(&[0, 1, 1]) - 0.5).abs() < 1e-15);
        assert!((gam.value(&[0, 2, 2]) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn sphere_curvature_is_one() {
        let geo = Geometry::at(&round_s3(), &Ctx::new(&[0.6, 0.3, -0.4], 2).unwrap()).unwrap();
        let e = |k: usize| {
            let mut v = vec![0.0; 3];
            v[k] = 1.0;
            v
        };
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            assert!((geo.sectional(&e(a), &e(b)).unwrap() - 1.0).abs() < 1e-12);
        }
        let (ric, tau) = geo.ricci_and_scalar().unwrap();
        let g = geo.metric_value();
        for (r, gv) in ric.iter().zip(&g) {
            assert!((r - 2.0 * gv).abs() < 1e-12);
        }
        assert!((tau - 6.0).abs() < 1e-12);
    }

    #[test]
    fn sectional_scale_invariance_and_degenerate_plane() {
        let geo = Geometry::at(&round_s3(), &Ctx::new(&[0.6, 0.3, -0.4], 2).unwrap()).unwrap();
        let x = [0.3, 0.7, -0.2];
        let y = [0.1, -0.4, 0.9];
        let y2: Vec<f64> = y.iter().map(|v| 2.0 * v).collect();
        let a = geo.sectional(&x, &y).unwrap();
        let b = geo.sectional(&x, &y2).unwrap();
        assert!((a - b).abs() < 1e-12);
        assert!(matches!(geo.sectional(&x, &x), Err(Error::DegeneratePlane(_))));
    }

    #[test]
    fn curvature_needs_second_order() {
        let geo = Geometry::at(&round_s3(), &Ctx::new(&[0.6, 0.3, -0.4], 1).unwrap()).unwrap();
        assert!(matches!(geo.riemann(), Err(Error::InsufficientOrder { needed: 2, have: 1 })));
        assert!(matches!(geo.nabla_ricci_contracted(&[0.0, 1.0, 0.0]), Err(Error::InsufficientOrder { .. })));
    }

    #[test]
    fn sphere_has_parallel_ricci() {
        let geo = Geometry::at(&round_s3(), &Ctx::new(&[0.6, 0.3, -0.4], 3).unwrap()).unwrap();
        let v = geo.nabla_ricci_contracted(&[0.0, 1.0, 1.0]).unwrap();
        assert!(v.iter().all(|x| x.abs() < 1e-12), "{v:?}");
    }

    #[test]
    fn one_form_convention_carries_one_half() {
        let ctx = Ctx::new(&[0.4, -0.3, 0.2], 2).unwrap();
        let x = ctx.coords();
        let z = x[0].zero_like();
        let eta = JTensor::covector(vec![z.clone(), x[0].clone(), z]);
        let d = exterior_derivative(&eta).unwrap();
        assert!((d.value(&[0, 1]) - 0.5).abs() < 1e-15);
        let ex = JTensor::constant_vector(&[1.0, 0.0, 0.0], 2);
        let ey = JTensor::constant_vector(&[0.0, 1.0, 0.0], 2);
        let inv = exterior_derivative_eval(&eta, &[&ex, &ey]).unwrap();
        assert!((inv.at(0).value() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn d_squared_vanishes_on_functions() {
        let ctx = Ctx::new(&[0.4, -0.3, 0.2], 3).unwrap();
        let x = ctx.coords();
        let f = JTensor::scalar(&x[0].sin() * &x[1]);
        let ddf = exterior_derivative(&exterior_derivative(&f).unwrap()).unwrap();
        assert!(ddf.max_abs() < 1e-11);
    }

    #[test]
    fn hessian_of_half_square_is_metric() {
        let ctx = Ctx::new(&[0.4, -0.3, 0.2], 2).unwrap();
        let geo = Geometry::at(&euclid(), &ctx).unwrap();
        let x = ctx.coords();
        let f = JTensor::scalar((&x[0] * &x[0] + &x[1] * &x[1] + &x[2] * &x[2]).scale(0.5));
        let h = geo.hessian(&f).unwrap();
        assert_eq!(h.values(), geo.metric_value());
        let c = JTensor::scalar(ctx.constant(3.0));
        assert!(geo.hessian(&c).unwrap().values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn lie_of_radial_field_on_flat_space() {
        let ctx = Ctx::new(&[0.4, -0.3, 0.2], 2).unwrap();
        let geo = Geometry::at(&euclid(), &ctx).unwrap();
        let x = ctx.coords();
        let z = x[0].zero_like();
        let field = JTensor::vector(vec![x[0].clone(), z.clone(), z]);
        let lie = geo.lie_metric(&field).unwrap().values();
        assert_eq!(lie, vec![2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let alt = geo.killing_form(&field).unwrap().values();
        assert_eq!(lie, alt);
    }

    #[test]
    fn flat_constant_structure_has_no_torsion() {
        let ctx = Ctx::new(&[0.4, -0.3, 0.2], 2).unwrap();
        let phi = JTensor::constant(
            3,
            vec![Slot::Up, Slot::Down],
            2,
            &[0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        );
        let _ = ctx;
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            let mut x = vec![0.0; 3];
            x[a] = 1.0;
            let mut y = vec![0.0; 3];
            y[b] = 1.0;
            let n = Geometry::nijenhuis(&phi, &JTensor::constant_vector(&x, 2), &JTensor::constant_vector(&y, 2))
                .unwrap();
            assert!(n.values().iter().all(|v| *v == 0.0));
        }
    }
}
