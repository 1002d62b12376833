use std::sync::Arc;

use super::checks::{verify_axioms, Tolerances};
use super::WeakStructure;
use crate::error::{Error, Result};
use crate::linalg::{gdot, hybrid_residual, matvec};
use crate::manifold::{sample_points, ChartManifold, Ctx, MetricSource, SamplePlan, TensorField};
use crate::riemann::Geometry;
use crate::tensor::Slot;

/// Bound on `|g(ξ,ξ) − 1|` and on `£_ξ g` at probe points.
pub const KILLING_THRESHOLD: f64 = 1e-8;
/// `ξ`-sectional curvature must exceed this for `Q` to be positive.
pub const POSITIVITY_THRESHOLD: f64 = 1e-8;

const PROBE_COUNT: usize = 16;

/// Builds the structure of a unit Killing field with positive `ξ`-sectional
/// curvature, probing hypotheses at default sample points.
pub fn construct_from_killing(chart: Arc<ChartManifold>, xi: TensorField) -> Result<WeakStructure> {
    let plan = SamplePlan { count: PROBE_COUNT, ..SamplePlan::default() };
    let probe = sample_points(&chart, &plan)?;
    construct_from_killing_at(chart, xi, &probe)
}

/// `η = g(·, ξ)`, `φ = −∇ξ`, `QX = R(X,ξ)ξ + η(X)ξ`; hypotheses checked at `probe`.
pub fn construct_from_killing_at(
    chart: Arc<ChartManifold>,
    xi: TensorField,
    probe: &[Vec<f64>],
) -> Result<WeakStructure> {
    for p in probe {
        let ctx = Ctx::new(p, 3)?;
        let geom = Geometry::at(&chart, &ctx)?;
        let x = xi.eval(&ctx)?;
        let xv = x.values();
        let g = geom.metric_value();
        let unit = gdot(&g, &xv, &xv);
        if (unit - 1.0).abs() > KILLING_THRESHOLD {
            return Err(Error::NotUnit(unit));
        }
        let lie = geom.lie_metric(&x)?.values();
        let killing = hybrid_residual(&lie, &vec![0.0; lie.len()]);
        if killing > KILLING_THRESHOLD {
            return Err(Error::NotKilling(killing));
        }
        for e in crate::manifold::orthonormal_frame_d(&g, &xv)? {
            let k = geom.sectional(&xv, &e)?;
            if !(k > POSITIVITY_THRESHOLD) {
                return Err(Error::DegenerateQ(k));
            }
        }
    }

    let eta = {
        let (chart, xi) = (chart.clone(), xi.clone());
        TensorField::new(vec![Slot::Down], move |ctx| {
            let geom = Geometry::at(&chart, ctx)?;
            Ok(geom.lower(&xi.eval(ctx)?))
        })
    };
    let phi = {
        let (chart, xi) = (chart.clone(), xi.clone());
        TensorField::new(vec![Slot::Up, Slot::Down], move |ctx| {
            let geom = Geometry::at(&chart, ctx)?;
            Ok(geom.nabla(&xi.eval(ctx)?)?.scale(-1.0))
        })
    };
    let q = {
        let (chart, xi) = (chart.clone(), xi.clone());
        TensorField::new(vec![Slot::Up, Slot::Down], move |ctx| {
            let geom = Geometry::at(&chart, ctx)?;
            let x = xi.eval(ctx)?;
            let r = geom.riemann()?; // R[l,k,i,j], R(X,ξ)ξ = R[l,k,i,j] ξ^k X^i ξ^j
            let rxx = r.contract(3, &x).contract(1, &x);
            let low = geom.lower(&x);
            Ok(rxx.add(&x.outer(&low)))
        })
    };
    let s = WeakStructure::new(chart, phi, q, xi, eta);
    let report = verify_axioms(&s, probe, &Tolerances::default())?;
    if let Some(bad) = report.failures().next() {
        return Err(Error::InternalInconsistency(format!(
            "constructed structure fails {} (residual {:?})",
            bad.check_name, bad.max_residual
        )));
    }
    Ok(s)
}

/// Rescales a structure: `φ′ = λ^{-1/2} φ`, `Q′ = λ^{-1}(Q − ξ⊗η) + ξ⊗η`,
/// `g′ = √λ (g − η⊗η) + η⊗η`.
pub fn homothety(s: &WeakStructure, lambda: f64) -> Result<WeakStructure> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("homothety factor must be positive, got {lambda}")));
    }
    if lambda == 1.0 {
        return Ok(s.clone());
    }
    let root = lambda.sqrt();
    let old = s.chart().clone();
    let (xi, eta, q) = (s.xi().clone(), s.eta().clone(), s.q().clone());

    let metric = {
        let (old, eta) = (old.clone(), eta.clone());
        MetricSource::Direct(Arc::new(move |ctx: &Ctx| {
            let g = old.metric(ctx)?;
            let e = eta.eval(ctx)?;
            let ee = e.outer(&e);
            Ok(g.sub(&ee).scale(root).add(&ee).truncate(ctx.order()))
        }))
    };
    let chart = Arc::new(old.with_metric(format!("{}*{lambda}", old.name()), metric));
    let q2 = {
        let (xi, eta) = (xi.clone(), eta.clone());
        TensorField::new(vec![Slot::Up, Slot::Down], move |ctx| {
            let xe = xi.eval(ctx)?.outer(&eta.eval(ctx)?);
            Ok(q.eval(ctx)?.sub(&xe).scale(1.0 / lambda).add(&xe))
        })
    };
    Ok(WeakStructure::new(chart, s.phi().scaled(1.0 / root), q2, xi, eta))
}

/// `‖φ̄²(X, a∂_t) + Q̄(X, a∂_t)‖` on `M × ℝ`, with
/// `φ̄(X, a∂_t) = (φX − aξ, η(X)∂_t)` and `Q̄(X, a∂_t) = (QX, a∂_t)`.
pub fn product_extension_check(s: &WeakStructure, p: &[f64], x: &[f64], a: f64) -> Result<f64> {
    let ls = s.local(p, 3)?;
    let phi = ls.phi.values();
    let xi = ls.xi_v();
    let phibar = |v: &[f64], t: f64| -> (Vec<f64>, f64) {
        let pv = matvec(&phi, v);
        (pv.iter().zip(&xi).map(|(p, x)| p - t * x).collect(), ls.eta_x(v))
    };
    let (v1, t1) = phibar(x, a);
    let (v2, t2) = phibar(&v1, t1);
    let qx = ls.q_x(x);
    let mut lhs = v2;
    lhs.push(t2);
    let mut rhs: Vec<f64> = qx.iter().map(|v| -v).collect();
    rhs.push(-a);
    Ok(lhs.iter().zip(&rhs).map(|(l, r)| (l - r).abs()).fold(0.0, f64::max))
}
