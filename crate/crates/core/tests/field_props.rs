//! Vector-field properties: the two smoothness routes and their agreement,
//! the restriction identity, bracket algebra (antisymmetry, bilinearity,
//! oracle agreement, Leibniz, Jacobi), and derivation equivalence.

use std::sync::Arc;

use liegeom::calculus::{map_mul, map_partial, map_scale, ProbeConfig, RealMap};
use liegeom::field::{
    bracket_derivation_apply, is_derivation_check, lie_bracket, smooth_vf_check, vf_of_derivation,
    Derivation, VectorField,
};
use liegeom::geometry::{Chart, ChartId, Manifold, Region, Sample};
use liegeom::models::{function_battery, interval_two_chart_manifold, random_polynomial_comps};
use liegeom::tangent::tangent_apply;

fn cfg() -> ProbeConfig {
    ProbeConfig::default()
}

fn plane() -> Arc<Manifold> {
    let region = Region::boxed(
        vec![-2.0, -2.0],
        vec![2.0, 2.0],
        vec![
            Sample::new(vec![0.0, 0.0], 0.4),
            Sample::new(vec![0.7, -0.3], 0.4),
            Sample::new(vec![-0.5, 0.6], 0.4),
        ],
    )
    .unwrap();
    Arc::new(
        Manifold::new(
            vec![Chart::identity(ChartId::new("id"), region).unwrap()],
            3,
        )
        .unwrap(),
    )
}

fn line_with_origin_sample() -> Arc<Manifold> {
    let region = Region::boxed(
        vec![-1.5],
        vec![1.5],
        vec![
            Sample::new(vec![0.0], 0.3),
            Sample::new(vec![0.8], 0.3),
            Sample::new(vec![-0.7], 0.3),
        ],
    )
    .unwrap();
    Arc::new(
        Manifold::new(
            vec![Chart::identity(ChartId::new("id"), region).unwrap()],
            3,
        )
        .unwrap(),
    )
}

fn field_on(m: &Arc<Manifold>, comps: RealMap) -> VectorField {
    VectorField::from_chart_comps(Arc::clone(m), m.charts()[0].id(), comps).unwrap()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

#[test]
fn smoothness_iff_sharp_action_is_smooth() {
    // positive instance: both routes pass AND X♯f passes the probe for all
    // battery f; negative instance: |x| components fail both routes and the
    // sharp action fails too. The two routes never disagree.
    let m = line_with_origin_sample();
    let battery = function_battery(1);
    let carrier = m.carrier_region();
    let probe = cfg().with_order(2);

    let good = field_on(
        &m,
        RealMap::new(1, 1, |xs| vec![xs[0].powi(2).add_const(0.5)]),
    );
    let report = smooth_vf_check(&good, &probe).unwrap();
    assert!(report.passed && report.consistent);
    for f in &battery {
        let xf = good.sharp(f).unwrap();
        let sharp_probe = ProbeConfig {
            order: 2.min(xf.max_order()),
            ..probe.clone()
        };
        let r = liegeom::calculus::smooth_on_probe(&carrier, &xf, &sharp_probe).unwrap();
        assert!(r.passed, "X♯f failed for a battery map");
    }

    let kinked = field_on(&m, RealMap::new(1, 1, |xs| vec![xs[0].abs()]));
    let report = smooth_vf_check(&kinked, &probe).unwrap();
    assert!(!report.bundle_passed);
    assert!(!report.local_passed);
    assert!(report.consistent, "the two routes disagreed");
    // and the sharp action of the kinked field fails the probe on some f
    let xf = kinked.sharp(&battery[1]).unwrap();
    let sharp_probe = ProbeConfig { order: 1, ..probe };
    let r = liegeom::calculus::smooth_on_probe(&carrier, &xf, &sharp_probe).unwrap();
    assert!(!r.passed);
}

#[test]
fn restriction_identity_on_open_subsets() {
    // (X↾U) ♯ f agrees with X ♯ f on U, and stays probe-smooth there
    let m = plane();
    let x = field_on(
        &m,
        RealMap::new(2, 2, |xs| vec![xs[0].lift(0.0), xs[0].clone()]),
    );
    let u = Region::ball(vec![0.0, 0.0], 1.0, vec![Sample::new(vec![0.0, 0.0], 0.3)]).unwrap();
    let xu = x.restrict(&u).unwrap();
    let battery = function_battery(2);
    for f in battery.iter().take(5) {
        let xf = x.sharp(f).unwrap();
        let xuf = xu.sharp(f).unwrap();
        for p in xu.manifold().carrier_samples() {
            let a = xf.eval_scalar(&p).unwrap();
            let b = xuf.eval_scalar(&p).unwrap();
            assert!((a - b).abs() <= 1e-10);
        }
        let carrier = xu.manifold().carrier_region();
        let probe = ProbeConfig {
            order: 2.min(xuf.max_order()),
            ..cfg()
        };
        let r = liegeom::calculus::smooth_on_probe(&carrier, &xuf, &probe).unwrap();
        assert!(r.passed);
    }
}

#[test]
fn bracket_bilinearity_and_antisymmetry() {
    let m = plane();
    let x = field_on(&m, random_polynomial_comps(2, 100));
    let y = field_on(&m, random_polynomial_comps(2, 101));
    let z = field_on(&m, random_polynomial_comps(2, 102));
    let points = m.carrier_samples();

    // antisymmetry: [X, Y] = -[Y, X] componentwise within 1e-10
    let xy = lie_bracket(&x, &y).unwrap();
    let yx = lie_bracket(&y, &x).unwrap();
    for p in &points {
        let a = xy.apply(p).unwrap().comps;
        let b = yx.apply(p).unwrap().comps;
        let sum: Vec<f64> = a.iter().zip(&b).map(|(u, v)| u + v).collect();
        assert!(max_abs(&sum) <= 1e-10);
    }

    // bilinearity over reals
    let combo = x.scale(2.0).unwrap().add(&y.scale(-0.5).unwrap()).unwrap();
    let lhs = lie_bracket(&combo, &z).unwrap();
    let rhs = lie_bracket(&x, &z)
        .unwrap()
        .scale(2.0)
        .unwrap()
        .add(&lie_bracket(&y, &z).unwrap().scale(-0.5).unwrap())
        .unwrap();
    for p in &points {
        let a = lhs.apply(p).unwrap().comps;
        let b = rhs.apply(p).unwrap().comps;
        let diff: Vec<f64> = a.iter().zip(&b).map(|(u, v)| u - v).collect();
        assert!(max_abs(&diff) <= 1e-10);
    }
}

#[test]
fn bracket_oracle_agreement_within_1e6() {
    let m = plane();
    let x = field_on(&m, random_polynomial_comps(2, 200));
    let y = field_on(&m, random_polynomial_comps(2, 201));
    let bracket = lie_bracket(&x, &y).unwrap();
    let battery = function_battery(2);
    for p in m.carrier_samples() {
        for f in battery.iter().take(6) {
            let via_coords = tangent_apply(&m, &bracket.apply(&p).unwrap(), f).unwrap();
            let via_derivation = bracket_derivation_apply(&x, &y, &p, f).unwrap();
            assert!(
                (via_coords - via_derivation).abs() <= 1e-6,
                "oracle mismatch {}",
                (via_coords - via_derivation).abs()
            );
        }
    }
}

#[test]
fn bracket_leibniz_within_1e7() {
    // [X,Y]♯(f·g) = f·([X,Y]♯g) + g·([X,Y]♯f) pointwise
    let m = plane();
    let x = field_on(&m, random_polynomial_comps(2, 300));
    let y = field_on(&m, random_polynomial_comps(2, 301));
    let bracket = lie_bracket(&x, &y).unwrap();
    let battery = function_battery(2);
    for f in battery.iter().take(4) {
        for g in battery.iter().skip(4).take(4) {
            let fg = map_mul(f, g).unwrap();
            let b_fg = bracket.sharp(&fg).unwrap();
            let b_f = bracket.sharp(f).unwrap();
            let b_g = bracket.sharp(g).unwrap();
            for p in m.carrier_samples() {
                let lhs = b_fg.eval_scalar(&p).unwrap();
                let rhs = f.eval_scalar(&p).unwrap() * b_g.eval_scalar(&p).unwrap()
                    + g.eval_scalar(&p).unwrap() * b_f.eval_scalar(&p).unwrap();
                assert!(
                    (lhs - rhs).abs() <= 1e-7,
                    "Leibniz defect {}",
                    (lhs - rhs).abs()
                );
            }
        }
    }
}

#[test]
fn bracket_jacobi_for_ten_seeded_triples() {
    let m = plane();
    let points = m.carrier_samples();
    for seed in 0..10u64 {
        let x = field_on(&m, random_polynomial_comps(2, 1000 + 3 * seed));
        let y = field_on(&m, random_polynomial_comps(2, 1001 + 3 * seed));
        let z = field_on(&m, random_polynomial_comps(2, 1002 + 3 * seed));
        let t1 = lie_bracket(&x, &lie_bracket(&y, &z).unwrap()).unwrap();
        let t2 = lie_bracket(&y, &lie_bracket(&z, &x).unwrap()).unwrap();
        let t3 = lie_bracket(&z, &lie_bracket(&x, &y).unwrap()).unwrap();
        for p in &points {
            let mut sum = t1.apply(p).unwrap().comps;
            for (s, v) in sum.iter_mut().zip(t2.apply(p).unwrap().comps) {
                *s += v;
            }
            for (s, v) in sum.iter_mut().zip(t3.apply(p).unwrap().comps) {
                *s += v;
            }
            assert!(
                max_abs(&sum) <= 1e-5,
                "Jacobi defect {} at seed {seed}",
                max_abs(&sum)
            );
        }
    }
}

#[test]
fn field_apply_is_chart_independent() {
    // evaluating through either chart of a two-chart manifold and changing
    // charts gives the same vector within 1e-8
    let m = Arc::new(interval_two_chart_manifold().unwrap());
    let x = field_on(
        &m,
        RealMap::new(1, 1, |xs| vec![xs[0].powi(2).add_const(0.3)]),
    );
    let ident = m.charts()[0].clone();
    let cubic = m.charts()[1].clone();
    for p in m.carrier_samples() {
        let via_first = x.apply(&p).unwrap();
        // read components directly from the cubic chart's map
        let y = cubic.apply(&p).unwrap();
        let direct = x.comps_in(cubic.id()).unwrap().eval(&y).unwrap();
        let converted = liegeom::tangent::change_chart(&m, &via_first, &cubic).unwrap();
        for (a, b) in direct.iter().zip(&converted.comps) {
            assert!((a - b).abs() <= 1e-8);
        }
        let _ = &ident;
    }
}

#[test]
fn sharp_fails_outside_the_carrier() {
    let m = plane();
    let x = field_on(&m, random_polynomial_comps(2, 7));
    let f = function_battery(2).remove(4);
    let xf = x.sharp(&f).unwrap();
    assert!(xf.eval_scalar(&[5.0, 5.0]).is_err());
}

#[test]
fn derivation_from_smooth_field_passes_check() {
    let m = plane();
    let x = field_on(&m, random_polynomial_comps(2, 400));
    let d = Derivation::from_field(&x);
    let battery = function_battery(2);
    let report = is_derivation_check(&m, &d, &battery[..4], &battery[4..8], &cfg()).unwrap();
    assert!(
        report.passed,
        "linear {} leibniz {} smooth {}",
        report.linear_residual, report.leibniz_residual, report.outputs_smooth
    );
}

#[test]
fn derivation_equivalence_round_trips() {
    let m = plane();
    let battery = function_battery(2);

    // X → D → X′ reproduces components within 1e-8
    let x = field_on(&m, random_polynomial_comps(2, 500));
    let d = Derivation::from_field(&x);
    let x2 = vf_of_derivation(&d, &m).unwrap();
    for p in m.carrier_samples() {
        let a = x.apply(&p).unwrap().comps;
        let b = x2.apply(&p).unwrap().comps;
        let diff: Vec<f64> = a.iter().zip(&b).map(|(u, v)| u - v).collect();
        assert!(max_abs(&diff) <= 1e-8);
    }

    // D → X → D′ reproduces battery actions within 1e-6; D is built
    // directly from partial-derivative operators, not from a field
    let d = Derivation::new(2, |f| {
        let fx = map_partial(f, 0)?;
        let fy = map_partial(f, 1)?;
        liegeom::calculus::map_add(&map_scale(2.0, &fx), &map_scale(-0.5, &fy))
    });
    let x = vf_of_derivation(&d, &m).unwrap();
    let d2 = Derivation::from_field(&x);
    for f in battery.iter().take(6) {
        let df = d.apply(f).unwrap();
        let d2f = d2.apply(f).unwrap();
        for p in m.carrier_samples() {
            let a = df.eval_scalar(&p).unwrap();
            let b = d2f.eval_scalar(&p).unwrap();
            assert!((a - b).abs() <= 1e-6, "round trip defect {}", (a - b).abs());
        }
    }
}

#[test]
fn bracket_requires_matching_manifolds() {
    let m1 = plane();
    let m2 = line_with_origin_sample();
    let x = field_on(&m1, random_polynomial_comps(2, 1));
    let y = field_on(&m2, random_polynomial_comps(1, 2));
    assert!(lie_bracket(&x, &y).is_err());
}
