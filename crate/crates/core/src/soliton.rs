//! Generalized Ricci soliton residuals and the lemma chain leading to the
//! rigidity criterion for gradient solitons on weak K-contact manifolds.

use serde::{Deserialize, Serialize};

use crate::contact::{LadderLevel, LocalStructure, Tolerances, WeakStructure};
use crate::error::{Error, Result};
use crate::linalg::{gdot, hybrid_residual, hybrid_scalar, max_abs};
use crate::manifold::TensorField;
use crate::report::{CheckReport, Checks};
use crate::tensor::{derive_along, JTensor};

/// Jet order used for all soliton evaluations: Hessians of Lie derivatives
/// need three orders of the potential.
pub const SOLITON_ORDER: usize = 3;

/// Bound on `|c1 (λ + 2 c2 n + c2 tr Q̃) + 1|` below which the rigidity
/// criterion is excluded.
pub const NONDEGENERACY_THRESHOLD: f64 = 1e-6;

/// `(c1, c2, λ)` in `½ £_X g = −c1 X♭⊗X♭ + c2 Ric + λ g`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolitonParams {
    pub c1: f64,
    pub c2: f64,
    pub lambda: f64,
}

impl SolitonParams {
    pub fn new(c1: f64, c2: f64, lambda: f64) -> SolitonParams {
        SolitonParams { c1, c2, lambda }
    }

    /// `λ + 2 c2 n + c2 tr Q̃`.
    pub fn shift(&self, n: usize, tr_q_tilde: f64) -> f64 {
        self.lambda + 2.0 * self.c2 * n as f64 + self.c2 * tr_q_tilde
    }

    /// Affine combination `α p + (1 − α) q`.
    pub fn lerp(&self, other: &SolitonParams, alpha: f64) -> SolitonParams {
        let mix = |a: f64, b: f64| alpha * a + (1.0 - alpha) * b;
        SolitonParams::new(mix(self.c1, other.c1), mix(self.c2, other.c2), mix(self.lambda, other.lambda))
    }
}

#[derive(Clone, Debug)]
pub enum SolitonData {
    /// A vector field `X`.
    VectorField(TensorField),
    /// A potential `f` with `X = ∇f`.
    Potential(TensorField),
    /// `Hess f1 = −c1 df2⊗df2 + c2 Ric + λ g`.
    TwoPotentials(TensorField, TensorField),
}

impl SolitonData {
    /// The field entering the Lie-derivative lemma: `X`, `∇f` or `∇f1`.
    fn vector(&self, ls: &LocalStructure) -> Result<JTensor> {
        match self {
            SolitonData::VectorField(x) => x.eval(&ls.ctx),
            SolitonData::Potential(f) | SolitonData::TwoPotentials(f, _) => ls.geom.gradient(&f.eval(&ls.ctx)?),
        }
    }

    /// The potential whose square enters the quadratic term, if any.
    fn quadratic_potential(&self) -> Option<&TensorField> {
        match self {
            SolitonData::VectorField(_) => None,
            SolitonData::Potential(f) | SolitonData::TwoPotentials(_, f) => Some(f),
        }
    }
}

fn sym_product(a: &[f64]) -> Vec<f64> {
    a.iter().flat_map(|x| a.iter().map(move |y| x * y)).collect()
}

/// `lhs − rhs` of the soliton equation as a symmetric `n×n` matrix.
pub fn soliton_residual(s: &WeakStructure, data: &SolitonData, params: &SolitonParams, p: &[f64]) -> Result<Vec<f64>> {
    let ls = s.local(p, SOLITON_ORDER)?;
    soliton_residual_at(&ls, data, params)
}

fn soliton_residual_at(ls: &LocalStructure, data: &SolitonData, params: &SolitonParams) -> Result<Vec<f64>> {
    let geom = &ls.geom;
    let (lhs, flat) = match data {
        SolitonData::VectorField(x) => {
            let x = x.eval(&ls.ctx)?;
            (geom.lie_metric(&x)?.scale(0.5).values(), geom.lower(&x).values())
        }
        SolitonData::Potential(f) => {
            let f = f.eval(&ls.ctx)?;
            (geom.hessian(&f)?.values(), f.partial()?.values())
        }
        SolitonData::TwoPotentials(f1, f2) => {
            let f1 = f1.eval(&ls.ctx)?;
            let f2 = f2.eval(&ls.ctx)?;
            (geom.hessian(&f1)?.values(), f2.partial()?.values())
        }
    };
    let ric = geom.ricci()?.values();
    let g = ls.g();
    let quad = sym_product(&flat);
    Ok((0..lhs.len())
        .map(|k| lhs[k] - (-params.c1 * quad[k] + params.c2 * ric[k] + params.lambda * g[k]))
        .collect())
}

/// `−c1 a Hess f2 − (−c1 df2⊗df2 + c2 Ric + λ g)`, the two-potential equation
/// after substituting `df1 = −c1 a df2`.
pub fn reduced_two_potential_residual(
    s: &WeakStructure,
    f2: &TensorField,
    params: &SolitonParams,
    a: f64,
    p: &[f64],
) -> Result<Vec<f64>> {
    let ls = s.local(p, SOLITON_ORDER)?;
    let f2 = f2.eval(&ls.ctx)?;
    let hess = ls.geom.hessian(&f2)?.values();
    let quad = sym_product(&f2.partial()?.values());
    let ric = ls.geom.ricci()?.values();
    let g = ls.g();
    Ok((0..hess.len())
        .map(|k| -params.c1 * a * hess[k] - (-params.c1 * quad[k] + params.c2 * ric[k] + params.lambda * g[k]))
        .collect())
}

/// Max of `|Ric(ξ, e)|` over an orthonormal frame of `𝒟`, relative to `|Ric|`.
pub fn ric_xi_d_residual(ls: &LocalStructure) -> Result<f64> {
    let ric = ls.geom.ricci()?;
    let xi = ls.xi_v();
    let scale = 1.0 + ric.max_abs();
    Ok(ls.frame_d()?.iter().map(|e| ric.eval(&[&xi, e]).abs() / scale).fold(0.0, f64::max))
}

/// Outcome of one lemma at one point.
#[derive(Clone, Debug, PartialEq)]
pub enum LemmaOutcome {
    Residual(f64),
    Skipped(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct LemmaValue {
    pub name: &'static str,
    pub anchor: &'static str,
    pub outcome: LemmaOutcome,
}

const LIE_LIE_G: (&str, &str) = ("lemma.lie_lie_g", "(L_xi(L_X g))(Y, xi) = g(QX, Y) + g(nabla_xi nabla_xi X, Y) + Y g(nabla_xi X, xi)");
const LIE_LIE_G_CLASSICAL: (&str, &str) =
    ("lemma.lie_lie_g_classical", "(L_xi(L_X g))(Y, xi) = g(X, Y) + g(nabla_xi nabla_xi X, Y) + Y g(nabla_xi X, xi)");
const LIE_DF_DF: (&str, &str) = ("lemma.lie_df_df", "L_xi(df (x) df)(Y, xi) = Y(xi(f)) xi(f) + Y(f) xi(xi(f))");
const NABLA_XI_GRAD_F: (&str, &str) = ("lemma.nabla_xi_grad_f", "nabla_xi grad f = (lambda + 2 c2 n + c2 tr Qt) xi - c1 xi(f) grad f");

fn value(name: (&'static str, &'static str), outcome: LemmaOutcome) -> LemmaValue {
    LemmaValue { name: name.0, anchor: name.1, outcome }
}

/// Local test of the weak K-contact hypotheses: `£_ξ g = 0` and `∇ξ = −φ`.
fn kcontact_at(ls: &LocalStructure, tol: f64) -> Result<Option<String>> {
    let lie = ls.geom.lie_metric(&ls.xi)?.values();
    let killing = hybrid_residual(&lie, &vec![0.0; lie.len()]);
    let nxi = ls.geom.nabla(&ls.xi)?.values();
    let mphi: Vec<f64> = ls.phi.values().iter().map(|v| -v).collect();
    let e30 = hybrid_residual(&nxi, &mphi);
    if killing > tol || e30 > tol {
        return Ok(Some(format!("not weak K-contact here: L_xi g {killing:.3e}, nabla xi + phi {e30:.3e}")));
    }
    Ok(None)
}

/// The three lemmas at one point with a test vector `y`.
///
/// The Lie-derivative lemma is reported in two forms. On a weak K-contact
/// manifold `R(X,ξ)ξ = QX − η(X)ξ`, so the first term is `g(QX, Y)`; the
/// classical form with `g(X, Y)` holds only where `Q̃X ⟂ Y` and is skipped,
/// with its measured residual, when it does not.
pub fn lemma_checks(
    s: &WeakStructure,
    data: &SolitonData,
    params: &SolitonParams,
    p: &[f64],
    y: &[f64],
    tol: f64,
) -> Result<Vec<LemmaValue>> {
    let ls = s.local(p, SOLITON_ORDER)?;
    let geom = &ls.geom;
    let xi = &ls.xi;
    let xi_v = ls.xi_v();
    let g = ls.g();
    let mut out = Vec::new();

    // Lemma on Lie derivatives of df⊗df: holds for any metric, f, ξ, Y.
    match data.quadratic_potential() {
        Some(f) => {
            let f = f.eval(&ls.ctx)?;
            let df = f.partial()?.relabel(vec![crate::tensor::Slot::Down]);
            let lhs = df.outer(&df).lie(xi)?.eval(&[y, &xi_v]);
            let xf = derive_along(&f, xi)?; // ξ(f)
            let y_xf = derive_along(&xf, &ls.constant(y))?.at(0).value();
            let y_f = df.eval(&[y]);
            let xxf = derive_along(&xf, xi)?.at(0).value();
            let rhs = y_xf * xf.at(0).value() + y_f * xxf;
            out.push(value(LIE_DF_DF, LemmaOutcome::Residual(hybrid_scalar(lhs, rhs))));
        }
        None => out.push(value(LIE_DF_DF, LemmaOutcome::Skipped("no potential in soliton data".into()))),
    }

    let not_k = kcontact_at(&ls, tol)?;
    let eta_y = ls.eta_x(y);
    let lie_skip = match (&not_k, eta_y.abs() > tol) {
        (Some(r), _) => Some(r.clone()),
        (None, true) => Some(format!("Y not orthogonal to xi: eta(Y) = {eta_y:.3e}")),
        _ => None,
    };
    match lie_skip {
        Some(reason) => {
            out.push(value(LIE_LIE_G, LemmaOutcome::Skipped(reason.clone())));
            out.push(value(LIE_LIE_G_CLASSICAL, LemmaOutcome::Skipped(reason)));
        }
        None => {
            let x = data.vector(&ls)?;
            let lhs = geom.lie_metric(&x)?.lie(xi)?.eval(&[y, &xi_v]);
            let nx = geom.nabla_along(&x, xi)?; // ∇_ξ X
            let nnx = geom.nabla_along(&nx, xi)?.values();
            let y_term = derive_along(&geom.inner(&nx, xi), &ls.constant(y))?.at(0).value();
            let common = gdot(&g, &nnx, y) + y_term;
            let xv = x.values();
            let weak = hybrid_scalar(lhs, gdot(&g, &ls.q_x(&xv), y) + common);
            let classical = hybrid_scalar(lhs, gdot(&g, &xv, y) + common);
            out.push(value(LIE_LIE_G, LemmaOutcome::Residual(weak)));
            out.push(value(
                LIE_LIE_G_CLASSICAL,
                if classical <= tol {
                    LemmaOutcome::Residual(classical)
                } else {
                    LemmaOutcome::Skipped(format!("holds only where g(Qt X, Y) = 0; measured residual {classical:.3e}"))
                },
            ));
        }
    }

    // Gradient soliton lemma.
    let grad_outcome = match data {
        SolitonData::VectorField(_) => LemmaOutcome::Skipped("needs a gradient soliton".into()),
        SolitonData::Potential(f) | SolitonData::TwoPotentials(f, _) => {
            let sol = max_abs(&soliton_residual_at(&ls, data, params)?);
            let ric_d = ric_xi_d_residual(&ls)?;
            if let Some(r) = &not_k {
                LemmaOutcome::Skipped(r.clone())
            } else if sol > tol {
                LemmaOutcome::Skipped(format!("soliton equation not satisfied: residual {sol:.3e}"))
            } else if ric_d > tol {
                LemmaOutcome::Skipped(format!("Ric(xi, D) != 0: residual {ric_d:.3e}"))
            } else {
                let f1 = f.eval(&ls.ctx)?;
                let f2 = match data {
                    SolitonData::TwoPotentials(_, f2) => f2.eval(&ls.ctx)?,
                    _ => f1.clone(),
                };
                let lhs = geom.nabla_along(&geom.gradient(&f1)?, xi)?.values();
                let grad2 = geom.gradient(&f2)?.values();
                let xf2 = gdot(&g, &grad2, &xi_v);
                let shift = params.shift(ls.half_dim(), ls.trace_q_tilde());
                let rhs: Vec<f64> = xi_v.iter().zip(&grad2).map(|(x, d)| shift * x - params.c1 * xf2 * d).collect();
                LemmaOutcome::Residual(hybrid_residual(&lhs, &rhs))
            }
        }
    };
    out.push(value(NABLA_XI_GRAD_F, grad_outcome));
    Ok(out)
}

/// Lemma residuals over points, with frame vectors of `𝒟` as `Y`.
pub fn lemma_suite(
    s: &WeakStructure,
    data: &SolitonData,
    params: &SolitonParams,
    points: &[Vec<f64>],
    opts: &Tolerances,
) -> Result<CheckReport> {
    let mut checks = Checks::new();
    for p in points {
        let ls = s.local(p, SOLITON_ORDER)?;
        for y in ls.frame_d()? {
            for v in lemma_checks(s, data, params, p, &y, opts.identity)? {
                match v.outcome {
                    LemmaOutcome::Residual(r) => checks.record(v.name, v.anchor, opts.identity, r),
                    LemmaOutcome::Skipped(reason) => checks.skip(v.name, v.anchor, opts.identity, reason),
                }
            }
        }
    }
    Ok(checks.finish())
}

/// Soliton residual over points as a report.
pub fn soliton_suite(
    s: &WeakStructure,
    data: &SolitonData,
    params: &SolitonParams,
    points: &[Vec<f64>],
    opts: &Tolerances,
) -> Result<CheckReport> {
    let mut checks = Checks::new();
    let anchor = match data {
        SolitonData::VectorField(_) => "L_X g / 2 = -c1 X# (x) X# + c2 Ric + lambda g",
        SolitonData::Potential(_) => "Hess f = -c1 df (x) df + c2 Ric + lambda g",
        SolitonData::TwoPotentials(..) => "Hess f1 = -c1 df2 (x) df2 + c2 Ric + lambda g",
    };
    for p in points {
        let r = soliton_residual(s, data, params, p)?;
        let ls = s.local(p, SOLITON_ORDER)?;
        let scale = 1.0 + max_abs(ls.geom.ricci()?.values().as_slice()).max(max_abs(&ls.g()));
        checks.record("soliton.equation", anchor, opts.identity, max_abs(&r) / scale);
    }
    Ok(checks.finish())
}

/// How the rigidity criterion fared.
#[derive(Clone, Debug, PartialEq)]
pub enum Theorem51Outcome {
    /// All hypotheses hold and the conclusion was verified.
    Confirmed,
    /// All hypotheses hold but the conclusion failed.
    ConclusionFailed,
    /// `c1 (λ + 2 c2 n + c2 tr Q̃) = −1`, the excluded case; carries the value.
    NonDegeneracyViolated(f64),
    /// Names of the hypotheses that do not hold.
    HypothesisFailed(Vec<String>),
}

#[derive(Clone, Debug)]
pub struct Theorem51Diagnostic {
    pub outcome: Theorem51Outcome,
    pub report: CheckReport,
}

/// Checks the hypotheses of the gradient-soliton rigidity criterion and, when
/// they hold, asserts `∇f = 0` and (for `c2 ≠ 0`) that the metric is Einstein.
///
/// Failed hypotheses are recorded as skipped with the measured value; only the
/// conclusion can fail.
pub fn theorem51_diagnostic(
    s: &WeakStructure,
    f: &TensorField,
    params: &SolitonParams,
    points: &[Vec<f64>],
    opts: &Tolerances,
) -> Result<Theorem51Diagnostic> {
    if points.is_empty() {
        return Err(Error::EmptyDomain);
    }
    let tol = opts.identity;
    let data = SolitonData::Potential(f.clone());
    let level = crate::contact::classify(s, points, opts)?.level;

    let mut sol_max: f64 = 0.0;
    let mut ric_max: f64 = 0.0;
    let mut grad_res = Vec::new();
    let mut einstein_res = Vec::new();
    let mut traces = Vec::new();
    let mut dims = 0;
    for p in points {
        let ls = s.local(p, SOLITON_ORDER)?;
        dims = ls.half_dim();
        let r = soliton_residual_at(&ls, &data, params)?;
        let scale = 1.0 + max_abs(ls.geom.ricci()?.values().as_slice());
        sol_max = sol_max.max(max_abs(&r) / scale);
        ric_max = ric_max.max(ric_xi_d_residual(&ls)?);
        traces.push(ls.trace_q_tilde());
        let grad = ls.geom.gradient(&f.eval(&ls.ctx)?)?.values();
        grad_res.push(max_abs(&grad));
        let (ric, tau) = ls.geom.ricci_and_scalar()?;
        let m = ls.dim() as f64;
        let target: Vec<f64> = ls.g().iter().map(|g| tau / m * g).collect();
        einstein_res.push(hybrid_residual(&ric, &target));
    }
    let count = traces.len() as f64;
    let mean = traces.iter().sum::<f64>() / count;
    let std = (traces.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / count).sqrt();
    let nondeg = params.c1 * params.shift(dims, mean) + 1.0;

    let mut checks = Checks::new();
    let mut failed = Vec::new();
    let mut hypothesis = |name: &'static str, anchor: &'static str, measured: f64, ok: bool, tolerance: f64| {
        if ok {
            checks.record(name, anchor, tolerance, measured);
        } else {
            checks.skip(name, anchor, tolerance, format!("hypothesis not met: measured {measured:.3e}"));
            failed.push(name.to_string());
        }
    };
    hypothesis(
        "rigidity.hyp.kcontact",
        "xi Killing, weak contact metric",
        if level == LadderLevel::WeakKContact { 0.0 } else { 1.0 },
        level == LadderLevel::WeakKContact,
        tol,
    );
    hypothesis("rigidity.hyp.trqt_constant", "tr Qt = const", std, std <= tol, tol);
    hypothesis("rigidity.hyp.soliton", "Hess f = -c1 df (x) df + c2 Ric + lambda g", sol_max, sol_max <= tol, tol);
    hypothesis("rigidity.hyp.ric_xi_d", "Ric(xi, X) = 0 for X in D", ric_max, ric_max <= tol, tol);
    let nondeg_ok = nondeg.abs() > NONDEGENERACY_THRESHOLD;
    if nondeg_ok {
        checks.record("rigidity.hyp.nondegenerate", "c1 (lambda + 2 c2 n + c2 tr Qt) != -1", 0.0, 0.0);
    } else {
        checks.skip(
            "rigidity.hyp.nondegenerate",
            "c1 (lambda + 2 c2 n + c2 tr Qt) != -1",
            0.0,
            format!("excluded case: c1 (lambda + 2 c2 n + c2 tr Qt) + 1 = {nondeg:.3e}"),
        );
    }

    let applicable = failed.is_empty() && nondeg_ok;
    let conclusion_skip = |checks: &mut Checks, reason: &str| {
        checks.skip("rigidity.f_constant", "grad f = 0", tol, reason);
        checks.skip("rigidity.einstein", "Ric = tau/(2n+1) g", tol, reason);
    };
    let outcome = if applicable {
        for r in &grad_res {
            checks.record("rigidity.f_constant", "grad f = 0", tol, *r);
        }
        if params.c2.abs() > 1e-12 {
            for r in &einstein_res {
                checks.record("rigidity.einstein", "Ric = tau/(2n+1) g", tol, *r);
            }
        } else {
            checks.skip("rigidity.einstein", "Ric = tau/(2n+1) g", tol, "c2 = 0: no Einstein conclusion");
        }
        let ok = grad_res.iter().all(|r| *r <= tol)
            && (params.c2.abs() <= 1e-12 || einstein_res.iter().all(|r| *r <= tol));
        if ok {
            Theorem51Outcome::Confirmed
        } else {
            Theorem51Outcome::ConclusionFailed
        }
    } else if !nondeg_ok {
        conclusion_skip(&mut checks, "excluded case");
        Theorem51Outcome::NonDegeneracyViolated(nondeg)
    } else {
        conclusion_skip(&mut checks, "hypotheses not met");
        Theorem51Outcome::HypothesisFailed(failed)
    };
    Ok(Theorem51Diagnostic { outcome, report: checks.finish() })
}

/// `Ric = a g + b μ⊗μ` for a unit 1-form `μ`.
#[derive(Clone, Debug)]
pub struct QuasiEinsteinParams {
    pub a: f64,
    pub b: f64,
    pub mu: TensorField,
}

/// `Ric − a g − b μ⊗μ` as an `n×n` matrix.
pub fn quasi_einstein_residual(s: &WeakStructure, qe: &QuasiEinsteinParams, p: &[f64]) -> Result<Vec<f64>> {
    let ls = s.local(p, SOLITON_ORDER)?;
    let mu = qe.mu.eval(&ls.ctx)?.values();
    let ginv = ls.geom.metric_inverse().values();
    let norm = gdot(&ginv, &mu, &mu);
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::NotUnit(norm));
    }
    let ric = ls.geom.ricci()?.values();
    let g = ls.g();
    let mm = sym_product(&mu);
    Ok((0..ric.len()).map(|k| ric[k] - qe.a * g[k] - qe.b * mm[k]).collect())
}
