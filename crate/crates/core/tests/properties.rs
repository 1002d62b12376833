use std::sync::OnceLock;

use proptest::prelude::*;
use weakcontact::contact::ntensors::{n1, n2, n5, n5_tensorial};
use weakcontact::gallery::ellipsoid;
use weakcontact::jet::{seed_point, Jet};
use weakcontact::linalg::hybrid_residual;
use weakcontact::soliton::{lemma_checks, LemmaOutcome};
use weakcontact::*;

struct Fixture {
    s: WeakStructure,
    points: Vec<Vec<f64>>,
}

fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let s = ellipsoid(2.0).unwrap().structure().unwrap();
        let points = sample_points(s.chart(), &SamplePlan { count: 64, seed: 3, ..Default::default() }).unwrap();
        Fixture { s, points }
    })
}

fn vec3() -> impl Strategy<Value = [f64; 3]> {
    [-1.5f64..1.5, -1.5f64..1.5, -1.5f64..1.5]
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

/// A smooth positive function `f = 1 + ½ sin(c·x)` as a jet.
fn bump(x: &[Jet], c: &[f64; 3]) -> Jet {
    let arg = x.iter().zip(c).fold(x[0].zero_like(), |acc, (xi, ci)| acc + xi.scale(*ci));
    arg.sin().scale(0.5) + x[0].lift(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jet_elementary_identities(p in vec3()) {
        let x = seed_point(&p, 3).unwrap();
        let one = (&x[0].sin() * &x[0].sin()) + (&x[0].cos() * &x[0].cos());
        let unit = x[0].lift(1.0);
        prop_assert!(one.coeffs().iter().zip(unit.coeffs()).all(|(a, b)| (a - b).abs() < 1e-12));

        let u = x[1].exp();
        let back = u.ln().unwrap();
        prop_assert!(back.coeffs().iter().zip(x[1].coeffs()).all(|(a, b)| (a - b).abs() < 1e-10));

        let (f, g) = (&x[0] * &x[2].cos(), x[1].exp());
        let lhs = (&f * &g).derivative(2).unwrap();
        let rhs = &f.derivative(2).unwrap() * &g.truncate(2) + &f.truncate(2) * &g.derivative(2).unwrap();
        prop_assert!(lhs.coeffs().iter().zip(rhs.coeffs()).all(|(a, b)| (a - b).abs() < 1e-10));
    }

    #[test]
    fn mixed_partials_commute(p in vec3()) {
        let x = seed_point(&p, 3).unwrap();
        let f = (&x[0] * &x[1]).sin() + (&x[1] * &x[2]).exp();
        let a = f.derivative(0).unwrap().derivative(2).unwrap();
        let b = f.derivative(2).unwrap().derivative(0).unwrap();
        prop_assert!(a.coeffs().iter().zip(b.coeffs()).all(|(u, v)| (u - v).abs() < 1e-10));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn n_tensors_are_antisymmetric(i in 0usize..64, x in vec3(), y in vec3(), z in vec3()) {
        let fx = fixture();
        let ls = fx.s.local(&fx.points[i], 3).unwrap();
        let (x, y, z) = (ls.constant(&x), ls.constant(&y), ls.constant(&z));
        let a = n1(&ls, &x, &y).unwrap().values();
        let b: Vec<f64> = n1(&ls, &y, &x).unwrap().values().iter().map(|v| -v).collect();
        prop_assert!(hybrid_residual(&a, &b) < 1e-10);
        let (a, b) = (n2(&ls, &x, &y).unwrap().at(0).value(), n2(&ls, &y, &x).unwrap().at(0).value());
        prop_assert!(close(a, -b, 1e-10));
        let (a, b) = (n5(&ls, &x, &y, &z).unwrap().at(0).value(), n5(&ls, &x, &z, &y).unwrap().at(0).value());
        prop_assert!(close(a, -b, 1e-10));
        let a = n5_tensorial(&ls, &x, &y, &z).unwrap().at(0).value();
        let b = n5_tensorial(&ls, &x, &z, &y).unwrap().at(0).value();
        prop_assert!(close(a, -b, 1e-10));
    }

    #[test]
    fn n1_is_function_linear(i in 0usize..64, x in vec3(), y in vec3(), c in vec3()) {
        let fx = fixture();
        let ls = fx.s.local(&fx.points[i], 3).unwrap();
        let f = bump(ls.ctx.coords(), &c);
        let (x, y) = (ls.constant(&x), ls.constant(&y));
        let scaled = n1(&ls, &x.scale_jet(&f), &y).unwrap().values();
        let plain: Vec<f64> = n1(&ls, &x, &y).unwrap().values().iter().map(|v| v * f.value()).collect();
        prop_assert!(hybrid_residual(&scaled, &plain) < 1e-9);
    }

    #[test]
    fn corrected_n5_is_tensorial_in_its_second_slot(i in 0usize..64, c in vec3()) {
        let fx = fixture();
        let ls = fx.s.local(&fx.points[i], 3).unwrap();
        let f = bump(ls.ctx.coords(), &c);
        let (x, y, z) = (ls.constant(&[1.0, 0.3, 0.0]), ls.constant(&[0.2, 1.0, -0.5]), ls.constant(&[0.4, -0.6, 1.0]));
        let fy = y.scale_jet(&f);
        let lhs = n5_tensorial(&ls, &x, &fy, &z).unwrap().at(0).value();
        let rhs = f.value() * n5_tensorial(&ls, &x, &y, &z).unwrap().at(0).value();
        prop_assert!(close(lhs, rhs, 1e-9), "{lhs} vs {rhs}");
    }

    #[test]
    fn homothety_round_trip(i in 0usize..64, lambda in 0.2f64..5.0) {
        let fx = fixture();
        let p = &fx.points[i];
        let back = homothety(&homothety(&fx.s, lambda).unwrap(), 1.0 / lambda).unwrap();
        let (a, b) = (fx.s.local(p, 2).unwrap(), back.local(p, 2).unwrap());
        prop_assert!(hybrid_residual(&a.g(), &b.g()) < 1e-10);
        prop_assert!(hybrid_residual(&a.phi.values(), &b.phi.values()) < 1e-10);
        prop_assert!(hybrid_residual(&a.q.values(), &b.q.values()) < 1e-10);
    }

    #[test]
    fn soliton_residual_is_affine_in_parameters(
        i in 0usize..64,
        a in [-2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0],
        b in [-2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0],
        alpha in -1.0f64..2.0,
    ) {
        let fx = fixture();
        let labels = fx.s.chart().labels().to_vec();
        let f = parse_potential(&format!("sin({}) * {} + {}^2 / 3", labels[0], labels[1], labels[2]), &labels).unwrap();
        let data = SolitonData::Potential(f);
        let (pa, pb) = (SolitonParams::new(a[0], a[1], a[2]), SolitonParams::new(b[0], b[1], b[2]));
        let p = &fx.points[i];
        let ra = soliton_residual(&fx.s, &data, &pa, p).unwrap();
        let rb = soliton_residual(&fx.s, &data, &pb, p).unwrap();
        let mixed = soliton_residual(&fx.s, &data, &pa.lerp(&pb, alpha), p).unwrap();
        let want: Vec<f64> = ra.iter().zip(&rb).map(|(u, v)| alpha * u + (1.0 - alpha) * v).collect();
        prop_assert!(hybrid_residual(&mixed, &want) < 1e-10);
    }

    #[test]
    fn df_squared_lie_lemma_holds_for_random_potentials(
        i in 0usize..64,
        k in [-2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0],
        y in vec3(),
    ) {
        let fx = fixture();
        let labels = fx.s.chart().labels().to_vec();
        let (u, v, w) = (&labels[0], &labels[1], &labels[2]);
        let src = format!("{} * sin({u} + {} * {v}) + {} * cos({w}) * {u} + {} * {v}^2 * {w}", k[0], k[1], k[2], k[3]);
        let data = SolitonData::Potential(parse_potential(&src, &labels).unwrap());
        let values = lemma_checks(&fx.s, &data, &SolitonParams::new(0.0, 0.0, 0.0), &fx.points[i], &y, 1e-7).unwrap();
        let lie_df_df = values.iter().find(|v| v.name == "lemma.lie_df_df").unwrap();
        match &lie_df_df.outcome {
            LemmaOutcome::Residual(r) => prop_assert!(*r < 1e-9, "{src}: {r}"),
            LemmaOutcome::Skipped(why) => prop_assert!(false, "skipped: {why}"),
        }
    }
}
