//! Central finite-difference oracle for the connection and curvature.
//!
//! Works only from point values of the metric, so it shares no code path with
//! the jet pipeline beyond `ChartManifold::metric_value`.

use crate::error::Result;
use crate::linalg::{hybrid_residual, inverse};
use crate::manifold::{ChartManifold, Ctx};
use crate::report::{CheckReport, Checks};
use crate::riemann::Geometry;

/// Default step for the central differences.
pub const FD_STEP: f64 = 1e-4;

/// Agreement required between jets and differences at [`FD_STEP`].
pub const ORACLE_TOLERANCE: f64 = 1e-5;

fn shifted(p: &[f64], k: usize, d: f64) -> Vec<f64> {
    let mut q = p.to_vec();
    q[k] += d;
    q
}

/// `Γ^k_ij` flattened as `[k][i][j]`.
pub fn christoffel_fd(chart: &ChartManifold, p: &[f64], h: f64) -> Result<Vec<f64>> {
    let n = p.len();
    let g = chart.metric_value(p)?;
    let ginv = inverse(&g, n)?;
    // dg[c][a][b] = ∂_c g_ab
    let mut dg = vec![0.0; n * n * n];
    for c in 0..n {
        let plus = chart.metric_value(&shifted(p, c, h))?;
        let minus = chart.metric_value(&shifted(p, c, -h))?;
        for ab in 0..n * n {
            dg[c * n * n + ab] = (plus[ab] - minus[ab]) / (2.0 * h);
        }
    }
    let d = |c: usize, a: usize, b: usize| dg[(c * n + a) * n + b];
    let mut out = vec![0.0; n * n * n];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let s: f64 = (0..n).map(|l| ginv[k * n + l] * (d(i, j, l) + d(j, i, l) - d(l, i, j))).sum();
                out[(k * n + i) * n + j] = 0.5 * s;
            }
        }
    }
    Ok(out)
}

/// `∂_c ∂_d g_ab` flattened as `[c][d][a][b]`.
fn metric_second_fd(chart: &ChartManifold, p: &[f64], h: f64) -> Result<Vec<f64>> {
    let n = p.len();
    let nn = n * n;
    let g0 = chart.metric_value(p)?;
    let mut out = vec![0.0; nn * nn];
    for c in 0..n {
        for d in c..n {
            let dd: Vec<f64> = if c == d {
                let plus = chart.metric_value(&shifted(p, c, h))?;
                let minus = chart.metric_value(&shifted(p, c, -h))?;
                (0..nn).map(|k| (plus[k] - 2.0 * g0[k] + minus[k]) / (h * h)).collect()
            } else {
                let at = |sc: f64, sd: f64| chart.metric_value(&shifted(&shifted(p, c, sc * h), d, sd * h));
                let (pp, pm, mp, mm) = (at(1.0, 1.0)?, at(1.0, -1.0)?, at(-1.0, 1.0)?, at(-1.0, -1.0)?);
                (0..nn).map(|k| (pp[k] - pm[k] - mp[k] + mm[k]) / (4.0 * h * h)).collect()
            };
            out[(c * n + d) * nn..(c * n + d + 1) * nn].copy_from_slice(&dd);
            out[(d * n + c) * nn..(d * n + c + 1) * nn].copy_from_slice(&dd);
        }
    }
    Ok(out)
}

/// `R^l_{kij}` flattened as `[l][k][i][j]`.
///
/// Built from second differences of the metric, so the inverse metric enters
/// only after differencing and does not amplify roundoff.
pub fn riemann_fd(chart: &ChartManifold, p: &[f64], h: f64) -> Result<Vec<f64>> {
    let n = p.len();
    let g = chart.metric_value(p)?;
    let ginv = inverse(&g, n)?;
    let gam = christoffel_fd(chart, p, h)?;
    let ddg = metric_second_fd(chart, p, h)?;
    let dd = |c: usize, d: usize, a: usize, b: usize| ddg[((c * n + d) * n + a) * n + b];
    let gm = |a: usize, b: usize, c: usize| gam[(a * n + b) * n + c];
    // R_lkij = g(R(∂i,∂j)∂k, ∂l)
    let mut lowered = vec![0.0; n.pow(4)];
    for l in 0..n {
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut acc = 0.5 * (dd(k, i, l, j) + dd(l, j, k, i) - dd(k, j, l, i) - dd(l, i, k, j));
                    for e in 0..n {
                        for f in 0..n {
                            acc += g[e * n + f] * (gm(e, k, i) * gm(f, l, j) - gm(e, k, j) * gm(f, l, i));
                        }
                    }
                    lowered[((l * n + k) * n + i) * n + j] = acc;
                }
            }
        }
    }
    let mut out = vec![0.0; n.pow(4)];
    for l in 0..n {
        for rest in 0..n.pow(3) {
            out[l * n.pow(3) + rest] = (0..n).map(|m| ginv[l * n + m] * lowered[m * n.pow(3) + rest]).sum();
        }
    }
    Ok(out)
}

/// `Ric_jk = R^i_{kij}` flattened as `[j][k]`.
pub fn ricci_fd(chart: &ChartManifold, p: &[f64], h: f64) -> Result<Vec<f64>> {
    let n = p.len();
    let r = riemann_fd(chart, p, h)?;
    let mut out = vec![0.0; n * n];
    for j in 0..n {
        for k in 0..n {
            out[j * n + k] = (0..n).map(|i| r[((i * n + k) * n + i) * n + j]).sum();
        }
    }
    Ok(out)
}

/// Residuals of jet Christoffel symbols, curvature and Ricci against the
/// differences at each point.
pub fn oracle_suite(chart: &ChartManifold, points: &[Vec<f64>], h: f64, tol: f64) -> Result<CheckReport> {
    let mut checks = Checks::new();
    for p in points {
        let ctx = Ctx::new(p, 3)?;
        let geom = Geometry::at(chart, &ctx)?;
        let gam = hybrid_residual(&geom.christoffel().values(), &christoffel_fd(chart, p, h)?);
        let riem = hybrid_residual(&geom.riemann()?.values(), &riemann_fd(chart, p, h)?);
        let ric = hybrid_residual(&geom.ricci()?.values(), &ricci_fd(chart, p, h)?);
        checks.record("oracle.christoffel", "Gamma^k_ij = g^kl (d_i g_jl + d_j g_il - d_l g_ij) / 2", tol, gam);
        checks.record("oracle.riemann", "R^l_kij = d_i Gamma^l_jk - d_j Gamma^l_ik + Gamma Gamma terms", tol, riem);
        checks.record("oracle.ricci", "Ric_jk = R^i_kij", tol, ric);
    }
    Ok(checks.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::ellipsoid;
    use crate::manifold::{sample_points, SamplePlan};

    #[test]
    fn jets_agree_with_differences_on_the_ellipsoid() {
        let e = ellipsoid(2.0).unwrap();
        let pts = sample_points(&e.chart, &SamplePlan { count: 5, ..Default::default() }).unwrap();
        let r = oracle_suite(&e.chart, &pts, FD_STEP, ORACLE_TOLERANCE).unwrap();
        assert!(r.all_pass(), "{}", r.to_text());
        assert!(r.max("oracle.christoffel") < 1e-7);
    }

    #[test]
    fn round_sphere_ricci_is_twice_the_metric() {
        let e = ellipsoid(1.0).unwrap();
        let p = [0.7, 0.3, -1.1];
        let ric = ricci_fd(&e.chart, &p, FD_STEP).unwrap();
        let g = e.chart.metric_value(&p).unwrap();
        let want: Vec<f64> = g.iter().map(|v| 2.0 * v).collect();
        assert!(hybrid_residual(&ric, &want) < 1e-6, "{ric:?}");
    }
}
