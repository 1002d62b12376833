//! Coordinate charts, tensor fields given by chart coefficients, sampling and
//! orthonormal frames.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{seed_internal, seed_point, Jet};
use crate::linalg::{gdot, min_eigenvalue};
use crate::tensor::{JTensor, Slot};

/// Evaluation context: a chart point with coordinates seeded as jets.
#[derive(Clone, Debug)]
pub struct Ctx {
    point: Vec<f64>,
    order: usize,
    coords: Vec<Jet>,
}

impl Ctx {
    pub fn new(point: &[f64], order: usize) -> Result<Ctx> {
        let coords = seed_point(point, order)?;
        Ok(Ctx { point: point.to_vec(), order, coords })
    }

    pub fn point(&self) -> &[f64] {
        &self.point
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coords(&self) -> &[Jet] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.point.len()
    }

    pub fn constant(&self, v: f64) -> Jet {
        Jet::constant(self.dim(), self.order, v)
    }
}

pub type CoordMap = Arc<dyn Fn(&[Jet]) -> Result<Vec<Jet>> + Send + Sync>;
pub type FieldFn = Arc<dyn Fn(&Ctx) -> Result<JTensor> + Send + Sync>;

#[derive(Clone)]
pub enum MetricSource {
    /// Metric components as a function of the evaluation context; must return
    /// a symmetric `[Down, Down]` tensor at the context order.
    Direct(FieldFn),
    /// Map into `R^ambient`; the metric is the pulled-back Euclidean one.
    Embedding { ambient: usize, map: CoordMap },
}

impl fmt::Debug for MetricSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricSource::Direct(_) => f.write_str("Direct(..)"),
            MetricSource::Embedding { ambient, .. } => write!(f, "Embedding(R^{ambient})"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ChartManifold {
    name: String,
    labels: Vec<String>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    metric: MetricSource,
}

impl ChartManifold {
    pub fn new(
        name: impl Into<String>,
        labels: &[&str],
        lower: &[f64],
        upper: &[f64],
        metric: MetricSource,
    ) -> Result<ChartManifold> {
        let dim = labels.len();
        if dim < 3 || dim.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!("chart dimension must be odd and >= 3, got {dim}")));
        }
        if lower.len() != dim || upper.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: lower.len().min(upper.len()) });
        }
        if lower.iter().zip(upper).any(|(l, u)| !(l < u)) {
            return Err(Error::EmptyDomain);
        }
        Ok(ChartManifold {
            name: name.into(),
            labels: labels.iter().map(|s| s.to_string()).collect(),
            lower: lower.to_vec(),
            upper: upper.to_vec(),
            metric,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    /// `n` in `dim = 2n + 1`.
    pub fn half_dim(&self) -> usize {
        (self.dim() - 1) / 2
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn bounds(&self) -> (&[f64], &[f64]) {
        (&self.lower, &self.upper)
    }

    pub fn metric_source(&self) -> &MetricSource {
        &self.metric
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim() && p.iter().zip(&self.lower).zip(&self.upper).all(|((x, l), u)| l < x && x < u)
    }

    /// Metric jets at the context order.
    pub fn metric(&self, ctx: &Ctx) -> Result<JTensor> {
        if ctx.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: ctx.dim() });
        }
        match &self.metric {
            MetricSource::Direct(f) => {
                let g = f(ctx)?;
                g.expect_dim(self.dim())?;
                Ok(g)
            }
            MetricSource::Embedding { ambient, map } => {
                let x = seed_internal(ctx.point(), ctx.order() + 1)?;
                let jac = embedding_jacobian(map, &x, *ambient)?;
                Ok(pullback(&jac, self.dim()))
            }
        }
    }

    /// Metric value at a point as a row-major matrix.
    pub fn metric_value(&self, p: &[f64]) -> Result<Vec<f64>> {
        Ok(self.metric(&Ctx::new(p, 1)?)?.values())
    }

    /// Metric derived by transforming this chart's metric; keeps labels and domain.
    pub fn with_metric(&self, name: impl Into<String>, metric: MetricSource) -> ChartManifold {
        ChartManifold { name: name.into(), metric, ..self.clone() }
    }
}

/// `J[A][i] = ∂F^A/∂x^i` as jets one order below the seed.
fn embedding_jacobian(map: &CoordMap, x: &[Jet], ambient: usize) -> Result<Vec<Vec<Jet>>> {
    let f = map(x)?;
    if f.len() != ambient {
        return Err(Error::DimensionMismatch { expected: ambient, got: f.len() });
    }
    f.iter()
        .map(|fa| (0..x.len()).map(|i| fa.derivative(i)).collect::<Result<Vec<_>>>())
        .collect()
}

fn pullback(jac: &[Vec<Jet>], dim: usize) -> JTensor {
    JTensor::from_fn(dim, vec![Slot::Down, Slot::Down], |ij| {
        let (i, j) = (ij[0], ij[1]);
        let mut acc = &jac[0][i] * &jac[0][j];
        for row in &jac[1..] {
            acc += &(&row[i] * &row[j]);
        }
        acc
    })
}

/// Induced metric value `g_ij = Σ_A ∂_i F^A ∂_j F^A` at `p`.
///
/// Fails with [`Error::DegenerateChart`] when the Jacobian is rank deficient.
pub fn induced_metric(ambient: usize, map: &CoordMap, p: &[f64]) -> Result<Vec<f64>> {
    let x = seed_internal(p, 1)?;
    let jac = embedding_jacobian(map, &x, ambient)?;
    let g = pullback(&jac, p.len()).values();
    let lam = min_eigenvalue(&g, p.len());
    if lam <= 1e-10 {
        return Err(Error::DegenerateChart(format!("embedding jacobian rank deficient at {p:?} (min eigenvalue {lam:e})")));
    }
    Ok(g)
}

/// A tensor field specified by chart coefficients.
#[derive(Clone)]
pub struct TensorField {
    slots: Vec<Slot>,
    f: FieldFn,
}

impl fmt::Debug for TensorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TensorField({:?})", self.slots)
    }
}

impl TensorField {
    pub fn new(slots: Vec<Slot>, f: impl Fn(&Ctx) -> Result<JTensor> + Send + Sync + 'static) -> Self {
        TensorField { slots, f: Arc::new(f) }
    }

    /// Closed-form components as functions of the coordinate jets.
    pub fn from_coords(
        slots: Vec<Slot>,
        f: impl Fn(&[Jet]) -> Result<Vec<Jet>> + Send + Sync + 'static,
    ) -> Self {
        let s = slots.clone();
        TensorField::new(slots, move |ctx| Ok(JTensor::new(ctx.dim(), s.clone(), f(ctx.coords())?)))
    }

    pub fn vector(f: impl Fn(&[Jet]) -> Result<Vec<Jet>> + Send + Sync + 'static) -> Self {
        TensorField::from_coords(vec![Slot::Up], f)
    }

    pub fn covector(f: impl Fn(&[Jet]) -> Result<Vec<Jet>> + Send + Sync + 'static) -> Self {
        TensorField::from_coords(vec![Slot::Down], f)
    }

    /// (1,1) tensor; components row-major `T^i_j`.
    pub fn endomorphism(f: impl Fn(&[Jet]) -> Result<Vec<Jet>> + Send + Sync + 'static) -> Self {
        TensorField::from_coords(vec![Slot::Up, Slot::Down], f)
    }

    pub fn scalar(f: impl Fn(&[Jet]) -> Result<Jet> + Send + Sync + 'static) -> Self {
        TensorField::from_coords(Vec::new(), move |x| Ok(vec![f(x)?]))
    }

    /// Chart-constant components.
    pub fn constant(slots: Vec<Slot>, values: Vec<f64>) -> Self {
        let s = slots.clone();
        TensorField::new(slots, move |ctx| Ok(JTensor::constant(ctx.dim(), s.clone(), ctx.order(), &values)))
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn eval(&self, ctx: &Ctx) -> Result<JTensor> {
        (self.f)(ctx)
    }

    pub fn scaled(&self, k: f64) -> TensorField {
        let f = self.f.clone();
        TensorField::new(self.slots.clone(), move |ctx| Ok(f(ctx)?.scale(k)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplePlan {
    pub count: usize,
    pub seed: u64,
    pub margin: f64,
}

impl Default for SamplePlan {
    fn default() -> Self {
        SamplePlan { count: 100, seed: 0, margin: 0.05 }
    }
}

const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut scale = inv;
    let mut out = 0.0;
    while index > 0 {
        out += (index % base) as f64 * scale;
        index /= base;
        scale *= inv;
    }
    out
}

/// Deterministic Halton points inside the margin-shrunk domain box.
pub fn sample_points(chart: &ChartManifold, plan: &SamplePlan) -> Result<Vec<Vec<f64>>> {
    sample_box(&chart.lower, &chart.upper, plan)
}

pub fn sample_box(lower: &[f64], upper: &[f64], plan: &SamplePlan) -> Result<Vec<Vec<f64>>> {
    if !(plan.margin > 0.0 && plan.margin < 0.5) {
        return Err(Error::InvalidParameter(format!("margin {} outside (0, 0.5)", plan.margin)));
    }
    if lower.len() > PRIMES.len() {
        return Err(Error::DimensionMismatch { expected: PRIMES.len(), got: lower.len() });
    }
    let boxes: Vec<(f64, f64)> = lower
        .iter()
        .zip(upper)
        .map(|(&l, &u)| {
            let w = u - l;
            (l + plan.margin * w, u - plan.margin * w)
        })
        .collect();
    if boxes.iter().any(|(l, u)| !(l < u)) {
        return Err(Error::EmptyDomain);
    }
    Ok((0..plan.count as u64)
        .map(|i| {
            let index = plan.seed + i + 1;
            boxes
                .iter()
                .zip(PRIMES)
                .map(|(&(l, u), base)| l + radical_inverse(index, base) * (u - l))
                .collect()
        })
        .collect())
}

/// g-orthonormal basis of the g-orthogonal complement of `xi`.
///
/// Coordinate vectors are projected off `xi` and orthonormalised in index order;
/// projections with norm below `1e-8` are skipped.
pub fn orthonormal_frame_d(g: &[f64], xi: &[f64]) -> Result<Vec<Vec<f64>>> {
    let n = xi.len();
    let xx = gdot(g, xi, xi);
    if !(xx > 0.0) {
        return Err(Error::DegenerateFrame { found: 0, needed: n - 1 });
    }
    let mut frame: Vec<Vec<f64>> = Vec::with_capacity(n - 1);
    for k in 0..n {
        if frame.len() == n - 1 {
            break;
        }
        let mut v = vec![0.0; n];
        v[k] = 1.0;
        let c = gdot(g, &v, xi) / xx;
        for (vi, xi) in v.iter_mut().zip(xi) {
            *vi -= c * xi;
        }
        for e in &frame {
            let c = gdot(g, &v, e);
            for (vi, ei) in v.iter_mut().zip(e) {
                *vi -= c * ei;
            }
        }
        let norm = gdot(g, &v, &v).max(0.0).sqrt();
        if norm < 1e-8 {
            continue;
        }
        frame.push(v.into_iter().map(|x| x / norm).collect());
    }
    if frame.len() < n - 1 {
        return Err(Error::DegenerateFrame { found: frame.len(), needed: n - 1 });
    }
    Ok(frame)
}

/// `xi / |xi|` followed by [`orthonormal_frame_d`].
pub fn full_frame(g: &[f64], xi: &[f64]) -> Result<Vec<Vec<f64>>> {
    let norm = gdot(g, xi, xi).max(0.0).sqrt();
    let mut out = vec![xi.iter().map(|x| x / norm).collect::<Vec<_>>()];
    out.extend(orthonormal_frame_d(g, xi)?);
    Ok(out)
}

/// Euclidean metric on a chart of the given dimension.
pub fn euclidean_metric() -> MetricSource {
    MetricSource::Direct(Arc::new(|ctx: &Ctx| {
        let n = ctx.dim();
        let values: Vec<f64> = (0..n * n).map(|k| if k / n == k % n { 1.0 } else { 0.0 }).collect();
        Ok(JTensor::constant(n, vec![Slot::Down, Slot::Down], ctx.order(), &values))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::bracket;

    fn euclid3() -> ChartManifold {
        ChartManifold::new("r3", &["x", "y", "z"], &[-1.0; 3], &[1.0; 3], euclidean_metric()).unwrap()
    }

    #[test]
    fn chart_dimension_must_be_odd() {
        let err = ChartManifold::new("bad", &["x", "y"], &[0.0; 2], &[1.0; 2], euclidean_metric());
        assert!(matches!(err, Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn circle_embedding_has_unit_metric() {
        // A one-dimensional helper: the chart constructor insists on odd dim >= 3,
        // so go through the free function directly.
        let map: CoordMap = Arc::new(|x: &[Jet]| Ok(vec![x[0].cos(), x[0].sin()]));
        let g = induced_metric(2, &map, &[0.7]).unwrap();
        assert!((g[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rank_deficient_embedding_is_degenerate() {
        let map: CoordMap = Arc::new(|x: &[Jet]| Ok(vec![&x[0] + &x[1], &x[0] + &x[1], x[2].clone()]));
        assert!(matches!(induced_metric(3, &map, &[0.1, 0.2, 0.3]), Err(Error::DegenerateChart(_))));
    }

    #[test]
    fn sample_points_stay_inside_margin() {
        let plan = SamplePlan { count: 2, seed: 0, margin: 0.1 };
        let pts = sample_box(&[0.0], &[1.0], &plan).unwrap();
        assert_eq!(pts.len(), 2);
        assert_ne!(pts[0], pts[1]);
        assert!(pts.iter().all(|p| (0.1..=0.9).contains(&p[0])));
    }

    #[test]
    fn sampling_is_deterministic_and_seed_dependent() {
        let chart = euclid3();
        let plan = SamplePlan { count: 10, seed: 3, margin: 0.05 };
        assert_eq!(sample_points(&chart, &plan).unwrap(), sample_points(&chart, &plan).unwrap());
        let other = SamplePlan { seed: 4, ..plan.clone() };
        assert_ne!(sample_points(&chart, &plan).unwrap(), sample_points(&chart, &other).unwrap());
    }

    #[test]
    fn bad_margin_rejected() {
        let plan = SamplePlan { count: 1, seed: 0, margin: 0.5 };
        assert!(sample_points(&euclid3(), &plan).is_err());
    }

    #[test]
    fn euclidean_frame_for_dz() {
        let g = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
        let frame = orthonormal_frame_d(&g, &[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(frame, vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]);
    }

    #[test]
    fn zero_xi_has_no_frame() {
        let g = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
        assert!(matches!(orthonormal_frame_d(&g, &[0.0; 3]), Err(Error::DegenerateFrame { .. })));
    }

    #[test]
    fn coordinate_fields_commute() {
        let ctx = Ctx::new(&[0.2, 0.3, 0.4], 2).unwrap();
        let e1 = JTensor::constant_vector(&[0.0, 1.0, 0.0], 2);
        let e2 = JTensor::constant_vector(&[0.0, 0.0, 1.0], 2);
        let _ = ctx;
        assert!(bracket(&e1, &e2).unwrap().values().iter().all(|v| *v == 0.0));
    }
}
