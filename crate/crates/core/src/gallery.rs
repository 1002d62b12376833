//! Closed-form example manifolds with their Reeb fields.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use crate::contact::{construct_from_killing, LadderLevel, WeakStructure};
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::manifold::{euclidean_metric, ChartManifold, MetricSource, TensorField};
use crate::tensor::Slot;

/// What the gallery promises about an entry at default tolerances.
#[derive(Clone, Debug, PartialEq)]
pub struct Expected {
    /// `None` when the Killing construction is expected to fail.
    pub level: Option<LadderLevel>,
    pub classical: Option<bool>,
    pub normal: Option<bool>,
    /// Expected construction error variant name, e.g. `"DegenerateQ"`.
    pub construct_error: Option<&'static str>,
}

#[derive(Clone, Debug)]
pub struct GalleryEntry {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub chart: Arc<ChartManifold>,
    pub xi: TensorField,
    pub expected: Expected,
}

impl GalleryEntry {
    /// The structure of the entry's unit Killing field.
    pub fn structure(&self) -> Result<WeakStructure> {
        construct_from_killing(self.chart.clone(), self.xi.clone())
    }
}

/// Names accepted by [`lookup`], with a one-line description.
pub const ENTRIES: [(&str, &str); 4] = [
    ("ellipsoid", "3-ellipsoid u1^2 + u2^2 + a(u3^2 + u4^2) = 1, xi = d/dt1 + sqrt(a) d/dt2 (param a > 0)"),
    ("round_sphere", "unit 3-sphere, the classical Sasakian case"),
    ("flat_torus", "flat 3-torus with xi = d/dz; Killing but with zero xi-sectional curvature"),
    ("flat_torus_zero_phi", "flat 3-torus with the candidate phi = 0, Q = id (not weak almost contact)"),
];

fn param(params: &BTreeMap<String, f64>, key: &str, default: f64) -> f64 {
    params.get(key).copied().unwrap_or(default)
}

fn check_keys(params: &BTreeMap<String, f64>, allowed: &[&str]) -> Result<()> {
    match params.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(Error::InvalidParameter(format!("unknown parameter `{k}`"))),
        None => Ok(()),
    }
}

fn dimension(params: &BTreeMap<String, f64>) -> Result<()> {
    let n = param(params, "n", 1.0);
    if n != 1.0 {
        return Err(Error::InvalidParameter(format!("only n = 1 is implemented, got n = {n}")));
    }
    Ok(())
}

/// Entry by name and parameters.
pub fn lookup(name: &str, params: &BTreeMap<String, f64>) -> Result<GalleryEntry> {
    match name {
        "ellipsoid" => {
            check_keys(params, &["a", "n"])?;
            dimension(params)?;
            ellipsoid(param(params, "a", 2.0))
        }
        "round_sphere" => {
            check_keys(params, &["n"])?;
            dimension(params)?;
            round_sphere()
        }
        "flat_torus" | "flat_torus_zero_phi" => {
            check_keys(params, &[])?;
            flat_torus()
        }
        other => Err(Error::UnknownManifold(other.to_string())),
    }
}

/// Structure for a named entry: the Killing construction, or the zero-`φ`
/// candidate for `flat_torus_zero_phi`.
pub fn lookup_structure(name: &str, params: &BTreeMap<String, f64>) -> Result<WeakStructure> {
    let entry = lookup(name, params)?;
    match name {
        "flat_torus_zero_phi" => Ok(flat_torus_candidate()),
        _ => entry.structure(),
    }
}

/// The ellipsoid `u1² + u2² + a(u3² + u4²) = 1` in the chart
/// `u = (cos ρ cos t1, cos ρ sin t1, sin ρ cos t2/√a, sin ρ sin t2/√a)`.
///
/// The ambient field `(−u2, u1, −√a u4, √a u3)` pushes forward to
/// `∂_{t1} + √a ∂_{t2}`.
pub fn ellipsoid(a: f64) -> Result<GalleryEntry> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidParameter(format!("ellipsoid needs a > 0, got {a}")));
    }
    let s = a.sqrt();
    let map = Arc::new(move |x: &[Jet]| -> Result<Vec<Jet>> {
        let (rho, t1, t2) = (&x[0], &x[1], &x[2]);
        let (c, sn) = (rho.cos(), rho.sin().scale(1.0 / s));
        Ok(vec![&c * &t1.cos(), &c * &t1.sin(), &sn * &t2.cos(), &sn * &t2.sin()])
    });
    let chart = ChartManifold::new(
        format!("ellipsoid(a={a})"),
        &["rho", "t1", "t2"],
        &[0.0, -PI, -PI],
        &[FRAC_PI_2, PI, PI],
        MetricSource::Embedding { ambient: 4, map },
    )?;
    let xi = TensorField::constant(vec![Slot::Up], vec![0.0, 1.0, s]);
    let round = a == 1.0;
    Ok(GalleryEntry {
        name: if round { "round_sphere".into() } else { "ellipsoid".into() },
        params: if round { BTreeMap::new() } else { BTreeMap::from([("a".to_string(), a)]) },
        chart: Arc::new(chart),
        xi,
        expected: Expected {
            level: Some(LadderLevel::WeakKContact),
            classical: Some(round),
            normal: Some(round),
            construct_error: None,
        },
    })
}

pub fn round_sphere() -> Result<GalleryEntry> {
    ellipsoid(1.0)
}

/// Euclidean `(x, y, z)` box with `ξ = ∂_z`.
pub fn flat_torus() -> Result<GalleryEntry> {
    let chart = ChartManifold::new("flat_torus", &["x", "y", "z"], &[0.0; 3], &[2.0 * PI; 3], euclidean_metric())?;
    Ok(GalleryEntry {
        name: "flat_torus".into(),
        params: BTreeMap::new(),
        chart: Arc::new(chart),
        xi: TensorField::constant(vec![Slot::Up], vec![0.0, 0.0, 1.0]),
        expected: Expected { level: None, classical: None, normal: None, construct_error: Some("DegenerateQ") },
    })
}

/// `φ = 0`, `Q = id`, `ξ = ∂_z`, `η = dz` on the flat torus.
pub fn flat_torus_candidate() -> WeakStructure {
    let entry = flat_torus().expect("flat torus chart is valid");
    let id = vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
    WeakStructure::new(
        entry.chart,
        TensorField::constant(vec![Slot::Up, Slot::Down], vec![0.0; 9]),
        TensorField::constant(vec![Slot::Up, Slot::Down], id),
        entry.xi,
        TensorField::constant(vec![Slot::Down], vec![0.0, 0.0, 1.0]),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{gdot, hybrid_residual};
    use crate::manifold::{sample_points, Ctx, SamplePlan};
    use crate::riemann::Geometry;

    #[test]
    fn ellipsoid_metric_is_diagonal_closed_form() {
        let e = ellipsoid(2.0).unwrap();
        for p in sample_points(&e.chart, &SamplePlan { count: 10, ..Default::default() }).unwrap() {
            let (s, c) = (p[0].sin(), p[0].cos());
            let want = [s * s + c * c / 2.0, 0.0, 0.0, 0.0, c * c, 0.0, 0.0, 0.0, s * s / 2.0];
            let g = e.chart.metric_value(&p).unwrap();
            assert!(hybrid_residual(&g, &want) < 1e-14, "{g:?}");
        }
    }

    #[test]
    fn ellipsoid_xi_is_unit_and_killing() {
        for a in [0.5, 2.0, 5.0] {
            let e = ellipsoid(a).unwrap();
            for p in sample_points(&e.chart, &SamplePlan { count: 20, ..Default::default() }).unwrap() {
                let ctx = Ctx::new(&p, 2).unwrap();
                let geom = Geometry::at(&e.chart, &ctx).unwrap();
                let xi = e.xi.eval(&ctx).unwrap();
                let g = geom.metric_value();
                assert!((gdot(&g, &xi.values(), &xi.values()) - 1.0).abs() < 1e-12);
                assert!(geom.lie_metric(&xi).unwrap().max_abs() < 1e-10);
            }
        }
    }

    #[test]
    fn invalid_parameters() {
        assert!(matches!(ellipsoid(0.0), Err(Error::InvalidParameter(_))));
        assert!(matches!(ellipsoid(-1.0), Err(Error::InvalidParameter(_))));
        let n3 = BTreeMap::from([("n".to_string(), 3.0)]);
        assert!(matches!(lookup("ellipsoid", &n3), Err(Error::InvalidParameter(_))));
        assert!(matches!(lookup("klein_bottle", &BTreeMap::new()), Err(Error::UnknownManifold(_))));
    }

    #[test]
    fn flat_torus_is_flat() {
        let e = flat_torus().unwrap();
        let ctx = Ctx::new(&[1.0, 2.0, 3.0], 3).unwrap();
        let geom = Geometry::at(&e.chart, &ctx).unwrap();
        assert_eq!(geom.riemann().unwrap().max_abs(), 0.0);
        let xi = e.xi.eval(&ctx).unwrap().values();
        assert_eq!(geom.ricci().unwrap().eval(&[&xi, &xi]), 0.0);
    }
}
