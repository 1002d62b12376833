use super::checks::{level_of, verify_axioms, Tolerances};
use super::{LadderLevel, WeakStructure};
use crate::error::Result;
use crate::linalg::{hybrid_residual, hybrid_scalar, max_abs};
use crate::report::{CheckReport, Checks};

const NABLA_RIC: (&str, &str) = ("einstein.nabla_ric_xi", "(nabla Ric)(xi, .) = 0");
const TRQ_CONST: (&str, &str) = ("einstein.trq_constant", "tr Q = const");
const RICCI: (&str, &str) = ("einstein.ricci", "Ric = (tr Q) g");
const SCALAR: (&str, &str) = ("einstein.scalar", "tau = (2n+1) tr Q");

/// Hypotheses and conclusion of the Einstein criterion for weak K-contact
/// structures.
#[derive(Clone, Debug)]
pub struct EinsteinDiagnostic {
    /// Whether both hypotheses hold, so the conclusion was asserted.
    pub applicable: bool,
    pub nabla_ric_max: Option<f64>,
    /// Population standard deviation of `tr Q` over the points.
    pub trq_std: Option<f64>,
    pub trq_mean: Option<f64>,
    pub report: CheckReport,
}

pub fn einstein_diagnostic(s: &WeakStructure, points: &[Vec<f64>], opts: &Tolerances) -> Result<EinsteinDiagnostic> {
    let level = level_of(&verify_axioms(s, points, opts)?);
    let mut checks = Checks::new();
    if level < LadderLevel::WeakKContact {
        let reason = format!("hypothesis not met: structure classifies as {level}");
        for (name, anchor) in [NABLA_RIC, TRQ_CONST, RICCI, SCALAR] {
            checks.skip(name, anchor, opts.identity, reason.clone());
        }
        return Ok(EinsteinDiagnostic {
            applicable: false,
            nabla_ric_max: None,
            trq_std: None,
            trq_mean: None,
            report: checks.finish(),
        });
    }

    let mut traces = Vec::with_capacity(points.len());
    let mut ricci_res = Vec::with_capacity(points.len());
    let mut scalar_res = Vec::with_capacity(points.len());
    let mut nabla_res = Vec::with_capacity(points.len());
    let mut nabla_ric_max: f64 = 0.0;
    for p in points {
        let ls = s.local(p, opts.jet_order)?;
        let n = ls.dim();
        let dric = ls.geom.nabla_ricci_contracted(&ls.xi_v())?;
        let r = max_abs(&dric) / (1.0 + max_abs(ls.geom.ricci()?.values().as_slice()));
        nabla_ric_max = nabla_ric_max.max(r);
        nabla_res.push(r);

        let tr = ls.trace_q();
        let (ric, tau) = ls.geom.ricci_and_scalar()?;
        let target: Vec<f64> = ls.g().iter().map(|g| tr * g).collect();
        ricci_res.push(hybrid_residual(&ric, &target));
        scalar_res.push(hybrid_scalar(tau, n as f64 * tr));
        traces.push(tr);
    }
    let count = traces.len().max(1) as f64;
    let mean = traces.iter().sum::<f64>() / count;
    let std = (traces.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / count).sqrt();
    let spread = std / (1.0 + mean.abs());

    // A failed hypothesis is not a failure of the criterion: it is reported as
    // skipped with the measured value.
    let nabla_ok = nabla_ric_max <= opts.identity;
    let trace_ok = spread <= opts.identity;
    if nabla_ok {
        for r in &nabla_res {
            checks.record(NABLA_RIC.0, NABLA_RIC.1, opts.identity, *r);
        }
    } else {
        checks.skip(NABLA_RIC.0, NABLA_RIC.1, opts.identity, format!("hypothesis not met: max {nabla_ric_max:.3e}"));
    }
    if trace_ok {
        checks.record(TRQ_CONST.0, TRQ_CONST.1, opts.identity, spread);
    } else {
        checks.skip(TRQ_CONST.0, TRQ_CONST.1, opts.identity, format!("hypothesis not met: std tr Q {std:.3e}"));
    }
    let applicable = nabla_ok && trace_ok;
    if applicable {
        for (r, t) in ricci_res.iter().zip(&scalar_res) {
            checks.record(RICCI.0, RICCI.1, opts.identity, *r);
            checks.record(SCALAR.0, SCALAR.1, opts.identity, *t);
        }
    } else {
        let reason = "criterion not applicable: a hypothesis is not met";
        checks.skip(RICCI.0, RICCI.1, opts.identity, reason);
        checks.skip(SCALAR.0, SCALAR.1, opts.identity, reason);
    }
    Ok(EinsteinDiagnostic {
        applicable,
        nabla_ric_max: Some(nabla_ric_max),
        trq_std: Some(std),
        trq_mean: Some(mean),
        report: checks.finish(),
    })
}
