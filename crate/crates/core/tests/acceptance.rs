//! End-to-end acceptance criteria. Prints one line per criterion and exits
//! non-zero if any fails.

use std::collections::BTreeMap;
use std::process::ExitCode;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use weakcontact::contact::{nabla_phi_lhs, nabla_phi_rhs};
use weakcontact::gallery::{ellipsoid, flat_torus, flat_torus_candidate, round_sphere};
use weakcontact::linalg::{gdot, hybrid_scalar, max_abs};
use weakcontact::oracle::{oracle_suite, FD_STEP, ORACLE_TOLERANCE};
use weakcontact::riemann::{exterior_derivative, exterior_derivative_eval};
use weakcontact::soliton::{lemma_checks, LemmaOutcome};
use weakcontact::*;

type Outcome = std::result::Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const SAMPLES: usize = 100;

fn points(s: &WeakStructure, count: usize) -> Vec<Vec<f64>> {
    sample_points(s.chart(), &SamplePlan { count, ..Default::default() }).expect("sampling")
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn all_pass(r: &CheckReport, what: &str) -> std::result::Result<(), String> {
    match r.failures().next() {
        None => Ok(()),
        Some(c) => Err(format!("{what}: {} failed with {:?}", c.check_name, c.max_residual)),
    }
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn round_sphere_criterion() -> Outcome {
    let s = round_sphere().map_err(e)?.structure().map_err(e)?;
    let pts = points(&s, SAMPLES);
    let opts = Tolerances::default();
    let c = classify(&s, &pts, &opts).map_err(e)?;
    let qt = c.q_tilde_norms.iter().copied().fold(0.0, f64::max);
    ensure(qt < 1e-8, || format!("max |Qt| = {qt:e}"))?;
    let (mut k_err, mut ric_err): (f64, f64) = (0.0, 0.0);
    for p in &pts {
        let ls = s.local(p, 3).map_err(e)?;
        let xi = ls.xi_v();
        for v in ls.frame_d().map_err(e)? {
            k_err = k_err.max((ls.geom.sectional(&xi, &v).map_err(e)? - 1.0).abs());
        }
        ric_err = ric_err.max((ls.geom.ricci().map_err(e)?.eval(&[&xi, &xi]) - 2.0).abs());
    }
    ensure(k_err < 1e-8, || format!("K(xi, X) off by {k_err:e}"))?;
    ensure(ric_err < 1e-8, || format!("Ric(xi, xi) off by {ric_err:e}"))?;
    let d = einstein_diagnostic(&s, &pts, &opts).map_err(e)?;
    ensure(d.applicable, || "Einstein criterion not applicable".into())?;
    let (mut ein, mut tau_err): (f64, f64) = (0.0, 0.0);
    for p in &pts {
        let ls = s.local(p, 3).map_err(e)?;
        let (ric, tau) = ls.geom.ricci_and_scalar().map_err(e)?;
        let two_g: Vec<f64> = ls.g().iter().map(|g| 2.0 * g).collect();
        ein = ein.max(max_abs(&ric.iter().zip(&two_g).map(|(a, b)| a - b).collect::<Vec<_>>()));
        tau_err = tau_err.max((tau - 6.0).abs()).max((tau - 3.0 * ls.trace_q()).abs());
    }
    ensure(ein < 1e-7, || format!("|Ric - 2g| = {ein:e}"))?;
    ensure(tau_err < 1e-6, || format!("tau off by {tau_err:e}"))?;
    Ok(format!("|Qt| {qt:.1e}, K(xi,X)-1 {k_err:.1e}, Ric-2g {ein:.1e}, tau-6 {tau_err:.1e}"))
}

fn ellipsoid_criterion() -> Outcome {
    let entry = ellipsoid(2.0).map_err(e)?;
    let s = entry.structure().map_err(e)?;
    let pts = points(&s, SAMPLES);
    let (mut unit, mut killing): (f64, f64) = (0.0, 0.0);
    for p in &pts {
        let ctx = Ctx::new(p, 2).map_err(e)?;
        let geom = Geometry::at(&entry.chart, &ctx).map_err(e)?;
        let xi = entry.xi.eval(&ctx).map_err(e)?;
        let xv = xi.values();
        unit = unit.max((gdot(&geom.metric_value(), &xv, &xv) - 1.0).abs());
        killing = killing.max(geom.lie_metric(&xi).map_err(e)?.max_abs());
    }
    ensure(unit < 1e-10, || format!("|g(xi,xi) - 1| = {unit:e}"))?;
    ensure(killing < 1e-8, || format!("L_xi g = {killing:e}"))?;
    let opts = Tolerances::default();
    let c = classify(&s, &pts, &opts).map_err(e)?;
    ensure(c.level == LadderLevel::WeakKContact && !c.classical, || format!("classified {} classical {}", c.level, c.classical))?;
    let big = c.q_tilde_norms.iter().filter(|q| **q > 1e-3).count();
    ensure(big * 10 >= pts.len() * 9, || format!("|Qt| > 1e-3 at only {big} of {} points", pts.len()))?;
    all_pass(&c.report, "axioms")?;
    let k = identity_suite(&s, &pts, SuiteLevel::KContact, &opts).map_err(e)?;
    all_pass(&k, "K-contact identities")?;
    let worst = k.checks.iter().filter_map(|c| c.max_residual.filter(|_| c.tolerance > 0.0)).fold(0.0, f64::max);
    Ok(format!("weak K-contact, non-classical at {big}/{} points, worst identity {worst:.1e}", pts.len()))
}

fn killing_biconditional_criterion() -> Outcome {
    let mut worst: f64 = 0.0;
    for a in [0.5, 2.0, 5.0] {
        let s = ellipsoid(a).map_err(e)?.structure().map_err(e)?;
        let k = killing_equivalence(&s, &points(&s, SAMPLES), &Tolerances::default()).map_err(e)?;
        ensure(k.nabla_xi_plus_phi < 1e-7 && k.lie_xi_g < 1e-7, || format!("a = {a}: {k:?}"))?;
        worst = worst.max(k.nabla_xi_plus_phi).max(k.lie_xi_g);
    }
    Ok(format!("max of |nabla xi + phi| and |L_xi g| over a in {{0.5, 2, 5}}: {worst:.1e}"))
}

fn contact_metric_criterion() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut worst_formula: f64 = 0.0;
    let mut worst_vanishing: f64 = 0.0;
    for (name, entry) in [("round_sphere", round_sphere()), ("ellipsoid", ellipsoid(2.0))] {
        let s = entry.map_err(e)?.structure().map_err(e)?;
        let pts = points(&s, SAMPLES);
        let r = identity_suite(&s, &pts, SuiteLevel::ContactMetric, &Tolerances::default()).map_err(e)?;
        for check in ["cm.n2", "cm.n4", "cm.geodesic_xi"] {
            let v = r.max(check);
            ensure(v < 1e-8, || format!("{name}: {check} = {v:e}"))?;
            worst_vanishing = worst_vanishing.max(v);
        }
        for _ in 0..50 {
            let p = &pts[rng.gen_range(0..pts.len())];
            let ls = s.local(p, 3).map_err(e)?;
            let frame = ls.frame().map_err(e)?;
            let mut pick = || frame[rng.gen_range(0..frame.len())].clone();
            let (x, y, z) = (pick(), pick(), pick());
            let r = hybrid_scalar(nabla_phi_lhs(&ls, &x, &y, &z).map_err(e)?, nabla_phi_rhs(&ls, &x, &y, &z).map_err(e)?);
            ensure(r < 1e-7, || format!("{name}: nabla phi formula residual {r:e}"))?;
            worst_formula = worst_formula.max(r);
        }
    }
    Ok(format!("N2, N4, nabla_xi xi <= {worst_vanishing:.1e}; nabla phi formula <= {worst_formula:.1e} on 100 triples"))
}

fn exterior_derivative_criterion() -> Outcome {
    let ctx = Ctx::new(&[0.4, -0.3, 0.2], 3).map_err(e)?;
    let x = ctx.coords();
    let z = x[0].zero_like();
    let eta = JTensor::covector(vec![z.clone(), x[0].clone(), z]);
    let ex = JTensor::constant_vector(&[1.0, 0.0, 0.0], 3);
    let ey = JTensor::constant_vector(&[0.0, 1.0, 0.0], 3);
    let half = exterior_derivative_eval(&eta, &[&ex, &ey]).map_err(e)?.at(0).value();
    ensure((half - 0.5).abs() < 1e-15, || format!("d eta(dx, dy) = {half}"))?;

    let f = JTensor::scalar(&(&x[0].sin() * &x[1]) + &x[2].exp());
    let ddf = exterior_derivative(&exterior_derivative(&f).map_err(e)?).map_err(e)?.max_abs();
    let w = JTensor::covector(vec![&x[1] * &x[2], x[0].cos(), &x[0] * &x[1].sin()]);
    let ddw = exterior_derivative(&exterior_derivative(&w).map_err(e)?).map_err(e)?.max_abs();
    ensure(ddf < 1e-9 && ddw < 1e-9, || format!("d(df) = {ddf:e}, d(dw) = {ddw:e}"))?;

    let mut worst: f64 = 0.0;
    for entry in [round_sphere(), ellipsoid(2.0)] {
        let s = entry.map_err(e)?.structure().map_err(e)?;
        let r = identity_suite(&s, &points(&s, SAMPLES), SuiteLevel::ContactMetric, &Tolerances::default()).map_err(e)?;
        for check in ["cm.dphi_closed", "cm.dphi_cyclic"] {
            worst = worst.max(r.max(check));
        }
    }
    ensure(worst < 1e-8, || format!("d Phi residual {worst:e}"))?;
    Ok(format!("d eta = 1/2, dd <= {:.1e}, d Phi <= {worst:.1e}", ddf.max(ddw)))
}

fn negative_paths_criterion() -> Outcome {
    let t = flat_torus().map_err(e)?;
    match t.structure() {
        Err(Error::DegenerateQ(_)) => {}
        other => return Err(format!("flat torus construction gave {:?}", other.map(|_| ()))),
    }
    let ctx = Ctx::new(&[1.0, 2.0, 3.0], 3).map_err(e)?;
    let xi = t.xi.eval(&ctx).map_err(e)?.values();
    let ric = Geometry::at(&t.chart, &ctx).map_err(e)?.ricci().map_err(e)?.eval(&[&xi, &xi]);
    ensure(ric == 0.0, || format!("flat torus Ric(xi, xi) = {ric:e}"))?;

    let entry = ellipsoid(2.0).map_err(e)?;
    let s = entry.structure().map_err(e)?;
    let bad = s.with_phi(s.phi().scaled(1.1));
    let r = verify_axioms(&bad, &points(&s, 20), &Tolerances::default()).map_err(e)?;
    let compat = r.max("metric.compatible");
    ensure(compat > 0.05, || format!("scaled phi compatibility residual only {compat:e}"))?;
    match construct_from_killing(entry.chart.clone(), entry.xi.scaled(1.05)) {
        Err(Error::NotUnit(_)) => {}
        other => return Err(format!("non-unit xi gave {:?}", other.map(|_| ()))),
    }
    Ok(format!("DegenerateQ, Ric(xi,xi) = 0, scaled phi residual {compat:.3}, NotUnit"))
}

fn random_potential(rng: &mut ChaCha8Rng, labels: &[String]) -> String {
    let mut c = || (rng.gen_range(-2.0f64..2.0) * 100.0).round() / 100.0;
    let (a, b, z) = (&labels[0], &labels[1], &labels[2]);
    format!(
        "{} * sin({} * {a} + {}) * {b}^2 + {} * cos({z}) * {a} + {} * {b} * {z} + {}",
        c(),
        c(),
        c(),
        c(),
        c(),
        c()
    )
}

fn soliton_criterion() -> Outcome {
    let opts = Tolerances::default();
    let sphere = round_sphere().map_err(e)?.structure().map_err(e)?;
    let pts = points(&sphere, SAMPLES);
    let zero = SolitonData::VectorField(TensorField::constant(vec![Slot::Up], vec![0.0; 3]));
    let r = soliton_suite(&sphere, &zero, &SolitonParams::new(0.0, 1.0, -2.0), &pts, &opts).map_err(e)?;
    let sol = r.max("soliton.equation");
    ensure(sol < 1e-8, || format!("S3 zero-field residual {sol:e}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut lie_df_df: f64 = 0.0;
    let none = BTreeMap::new();
    for name in ["ellipsoid", "round_sphere", "flat_torus", "flat_torus_zero_phi"] {
        let s = match name {
            "flat_torus" | "flat_torus_zero_phi" => flat_torus_candidate(),
            _ => lookup_structure(name, &none).map_err(e)?,
        };
        let labels = s.chart().labels().to_vec();
        let few = points(&s, 3);
        for _ in 0..20 {
            let f = parse_potential(&random_potential(&mut rng, &labels), &labels).map_err(e)?;
            let data = SolitonData::Potential(f);
            for p in &few {
                let y = [0.3, -0.8, 0.5];
                for v in lemma_checks(&s, &data, &SolitonParams::new(0.0, 0.0, 0.0), p, &y, opts.identity).map_err(e)? {
                    if let ("lemma.lie_df_df", LemmaOutcome::Residual(r)) = (v.name, &v.outcome) {
                        lie_df_df = lie_df_df.max(*r);
                    }
                }
            }
        }
    }
    ensure(lie_df_df < 1e-9, || format!("df (x) df Lie lemma residual {lie_df_df:e}"))?;

    let labels = sphere.chart().labels().to_vec();
    let constant = parse_potential("1.5", &labels).map_err(e)?;
    let trivial = theorem51_diagnostic(&sphere, &constant, &SolitonParams::new(1.0, 1.0, -2.0), &pts, &opts).map_err(e)?;
    ensure(trivial.outcome == Theorem51Outcome::Confirmed, || format!("trivial case: {:?}", trivial.outcome))?;
    let log = parse_potential("ln(cos(rho) * cos(t1))", &labels).map_err(e)?;
    let right: Vec<_> = pts.iter().filter(|p| p[1].cos() > 0.1).cloned().collect();
    let excluded = theorem51_diagnostic(&sphere, &log, &SolitonParams::new(1.0, 0.0, -1.0), &right, &opts).map_err(e)?;
    ensure(matches!(excluded.outcome, Theorem51Outcome::NonDegeneracyViolated(_)), || {
        format!("excluded case: {:?}", excluded.outcome)
    })?;

    let ell = ellipsoid(2.0).map_err(e)?.structure().map_err(e)?;
    let labels = ell.chart().labels().to_vec();
    let f = parse_potential(&random_potential(&mut rng, &labels), &labels).map_err(e)?;
    let params = SolitonParams::new(0.4, 1.3, -0.7);
    let mut diff: f64 = 0.0;
    for p in points(&ell, 10) {
        let one = soliton_residual(&ell, &SolitonData::Potential(f.clone()), &params, &p).map_err(e)?;
        let two = soliton_residual(&ell, &SolitonData::TwoPotentials(f.clone(), f.clone()), &params, &p).map_err(e)?;
        diff = diff.max(one.iter().zip(&two).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    }
    ensure(diff <= 1e-12, || format!("two-potential form differs by {diff:e}"))?;
    Ok(format!("S3 residual {sol:.1e}, Lie lemma {lie_df_df:.1e}, trivial case confirmed, excluded case detected"))
}

fn oracle_criterion() -> Outcome {
    let entry = ellipsoid(2.0).map_err(e)?;
    let pts = sample_points(&entry.chart, &SamplePlan { count: 20, ..Default::default() }).map_err(e)?;
    let r = oracle_suite(&entry.chart, &pts, FD_STEP, ORACLE_TOLERANCE).map_err(e)?;
    all_pass(&r, "oracle")?;
    let worst = ["oracle.christoffel", "oracle.riemann", "oracle.ricci"].map(|c| r.max(c));
    Ok(format!("Gamma {:.1e}, R {:.1e}, Ric {:.1e}", worst[0], worst[1], worst[2]))
}

fn determinism_criterion() -> Outcome {
    let mut config = RunConfig::new("ellipsoid");
    config.params.insert("a".into(), 2.0);
    config.sampling.count = 20;
    config.sampling.seed = 7;
    let residuals = |r: &CheckReport| serde_json::to_string(&r.checks).expect("serialise");
    let first = run_suite(&config).map_err(e)?;
    let second = run_suite(&config).map_err(e)?;
    ensure(residuals(&first) == residuals(&second), || "residual fields differ between runs".into())?;
    all_pass(&first, "full run")?;
    Ok(format!("{} records identical across two runs", first.checks.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("round sphere", round_sphere_criterion),
        ("ellipsoid a=2", ellipsoid_criterion),
        ("killing iff nabla xi = -phi", killing_biconditional_criterion),
        ("contact metric consequences", contact_metric_criterion),
        ("exterior derivative convention", exterior_derivative_criterion),
        ("negative and degenerate paths", negative_paths_criterion),
        ("soliton suite", soliton_criterion),
        ("finite-difference oracle", oracle_criterion),
        ("determinism", determinism_criterion),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {} ({name}): PASS  {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL  {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
