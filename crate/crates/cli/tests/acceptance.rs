//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! (run with `--nocapture` to see them). Tolerances are pinned here.

use std::process::Command;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use liegeom::calculus::{
    fd_derivative, fd_second, map_compose, map_mul, smooth_on_probe, ProbeConfig, RealMap,
};
use liegeom::field::{
    bracket_derivation_apply, lie_bracket, smooth_vf_check, vf_of_derivation, Derivation,
    VectorField,
};
use liegeom::geometry::{smooth_compat, Chart, ChartId, Manifold, Region, Sample};
use liegeom::groups::{
    automorphism_check, diff_group, group_axioms_check, DiffGroupElement, PartialMap,
};
use liegeom::lie::{action_check, lie_algebra_of, ActionSpec};
use liegeom::models::{
    cube_root_chart_pair, det, disk_manifold, disk_rotations, euclidean_lie_group,
    euclidean_manifold, function_battery, interval_two_chart_manifold, matrix_inv,
    nonlinear_chart_pair, random_polynomial_comps, SquareMatrix,
};
use liegeom::tangent::{
    apply_chart_tm, atlas_tm_check, component_function, coordinate_vector, inv_chart_tm,
    push_forward, tangent_apply, TangentVector,
};

fn cfg() -> ProbeConfig {
    ProbeConfig::default()
}

fn report(criterion: u32, name: &str, passed: bool, detail: &str) {
    println!(
        "criterion {criterion:2} ({name}): {} — {detail}",
        if passed { "PASS" } else { "FAIL" }
    );
    assert!(passed, "criterion {criterion} ({name}) failed: {detail}");
}

fn seeded_points(dim: usize, n: usize, half: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| (0..dim).map(|_| rng.gen_range(-half..half)).collect())
        .collect()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn plane() -> Arc<Manifold> {
    Arc::new(euclidean_manifold(2).unwrap())
}

fn field_on(m: &Arc<Manifold>, comps: RealMap) -> VectorField {
    VectorField::from_chart_comps(Arc::clone(m), m.charts()[0].id(), comps).unwrap()
}

/// Criterion 1: order-1/2 jet entries match central differences within 1e-5
/// at 100 seeded points for the 10-map battery over ℝ¹ and ℝ².
#[test]
fn criterion_01_ad_vs_fd_oracle() {
    let mut worst = 0.0f64;
    for dim in [1usize, 2] {
        for (mi, f) in function_battery(dim).iter().enumerate() {
            for p in seeded_points(dim, 100, 1.4, 90 + mi as u64) {
                let jet = &f.jet_eval(&p, 2).unwrap()[0];
                for i in 0..dim {
                    let mut dir = vec![0.0; dim];
                    dir[i] = 1.0;
                    let fd1 = fd_derivative(f, &p, &dir, 1e-5).unwrap()[0];
                    worst = worst.max((jet.gradient()[i] - fd1).abs() / (1.0 + fd1.abs()));
                    for j in i..dim {
                        let fd2 = fd_second(f, &p, i, j, 1e-4).unwrap()[0];
                        let ad2 = jet.partial(&[i, j]).unwrap();
                        worst = worst.max((ad2 - fd2).abs() / (1.0 + fd2.abs()));
                    }
                }
            }
        }
    }
    report(
        1,
        "ad_vs_fd_oracle",
        worst <= 1e-5,
        &format!("max residual {worst:.3e} over 2000 points (tol 1e-5)"),
    );
}

/// Criterion 2: identity atlas and the nonlinear pair pass compatibility at
/// order 3; the cube-root pair fails with a reported residual near 0.
#[test]
fn criterion_02_chart_compatibility() {
    let order3 = cfg().with_order(3);
    let m = euclidean_manifold(2).unwrap();
    let ident_ok = {
        let c = &m.charts()[0];
        smooth_compat(c, c, &order3).unwrap().passed
    };
    let (i1, cubic) = nonlinear_chart_pair().unwrap();
    let nonlinear = smooth_compat(&i1, &cubic, &order3).unwrap();
    let (i2, cbrt) = cube_root_chart_pair().unwrap();
    let counterexample = smooth_compat(&i2, &cbrt, &cfg().with_order(1)).unwrap();
    let fails_near_zero = !counterexample.passed
        && counterexample
            .failures
            .iter()
            .any(|f| f.point[0].abs() < 1e-3);
    let passed = ident_ok && nonlinear.passed && fails_near_zero;
    report(
        2,
        "chart_compatibility",
        passed,
        &format!(
            "identity {}, nonlinear residual {:.3e}, counterexample failures near 0: {}",
            ident_ok, nonlinear.max_fd_residual, fails_near_zero
        ),
    );
}

/// Criterion 3: for 50 random tangent vectors the component/basis
/// representation reproduces the action within 1e-8 on the battery.
#[test]
fn criterion_03_tangent_coordinatization() {
    let m = Arc::new(interval_two_chart_manifold().unwrap());
    let battery = function_battery(1);
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let samples = m.carrier_samples();
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let p = samples[rng.gen_range(0..samples.len())].clone();
        let chart = m.charts()[rng.gen_range(0..2)].clone();
        let comps = vec![rng.gen_range(-2.0..2.0)];
        let v = TangentVector::new(&m, chart.id(), p.clone(), comps).unwrap();
        for f in &battery {
            let direct = tangent_apply(&m, &v, f).unwrap();
            let comps_in = component_function(&m, &v, &chart).unwrap();
            let mut recomposed = 0.0;
            for (i, c) in comps_in.iter().enumerate() {
                let mut dir = vec![0.0; 1];
                dir[i] = 1.0;
                let basis = coordinate_vector(&m, &chart, &p, &dir).unwrap();
                recomposed += c * tangent_apply(&m, &basis, f).unwrap();
            }
            worst = worst.max((direct - recomposed).abs());
        }
    }
    report(
        3,
        "tangent_coordinatization",
        worst <= 1e-8,
        &format!("max representation defect {worst:.3e} (tol 1e-8)"),
    );
}

/// Criterion 4: bundle chart forward∘inverse identity within 1e-8 on 50
/// sampled points per chart; the nonlinear TM transition passes at order 3.
#[test]
fn criterion_04_bundle_charts() {
    let m = Arc::new(interval_two_chart_manifold().unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let mut worst = 0.0f64;
    for chart in m.charts() {
        let mut done = 0;
        while done < 50 {
            let s = &chart.codomain().samples()[rng.gen_range(0..chart.codomain().samples().len())];
            let x = vec![s.point[0] + rng.gen_range(-0.5..0.5) * s.clearance];
            if !chart.codomain().contains(&x) {
                continue;
            }
            let u = vec![rng.gen_range(-2.0..2.0)];
            let tm = inv_chart_tm(&m, chart, &x, &u).unwrap();
            let (x2, u2) = apply_chart_tm(&m, chart, &tm).unwrap();
            worst = worst.max(max_abs_diff(&x2, &x)).max(max_abs_diff(&u2, &u));
            done += 1;
        }
    }
    let transition = atlas_tm_check(
        &m,
        &ChartId::new("interval"),
        &ChartId::new("cubic"),
        &cfg().with_order(3),
    )
    .unwrap();
    let passed = worst <= 1e-8 && transition.passed;
    report(
        4,
        "bundle_charts",
        passed,
        &format!(
            "round-trip defect {worst:.3e} (tol 1e-8), transition residual {:.3e}",
            transition.max_fd_residual
        ),
    );
}

/// Criterion 5: the push-forward defining equation within 1e-7 on 20
/// (F, v, f) triples including nonlinear F, plus functoriality within 1e-7.
#[test]
fn criterion_05_push_forward() {
    let m = plane();
    let big = Region::entire(
        2,
        (vec![-40.0, -40.0], vec![40.0, 40.0]),
        vec![Sample::new(vec![0.0, 0.0], 0.5)],
    )
    .unwrap();
    let dst = Arc::new(
        Manifold::new(vec![Chart::identity(ChartId::new("id"), big).unwrap()], 3).unwrap(),
    );
    let id = m.charts()[0].id().clone();
    let maps: Vec<RealMap> = vec![
        RealMap::identity(2),
        RealMap::affine(vec![vec![2.0, 1.0], vec![0.0, 1.0]], vec![0.3, -0.2]),
        RealMap::new(2, 2, |xs| {
            vec![
                xs[0].powi(3).scale(0.2).add(&xs[0]),
                xs[1].add(&xs[0].mul(&xs[1]).scale(0.3)),
            ]
        }),
        RealMap::new(2, 2, |xs| {
            vec![xs[0].sin().add(&xs[0]), xs[1].exp().scale(0.5)]
        }),
    ];
    let battery = function_battery(2);
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let mut worst = 0.0f64;
    let mut triples = 0;
    for f_map in &maps {
        for _ in 0..5 {
            let p = vec![rng.gen_range(-0.9..0.9), rng.gen_range(-0.9..0.9)];
            let comps = vec![rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)];
            let v = TangentVector::new(&m, &id, p, comps).unwrap();
            let test_fn = &battery[rng.gen_range(4..battery.len())];
            let pushed = push_forward(f_map, &m, &dst, &v, &cfg()).unwrap();
            let lhs = tangent_apply(&dst, &pushed, test_fn).unwrap();
            let rhs = tangent_apply(&m, &v, &map_compose(test_fn, f_map).unwrap()).unwrap();
            worst = worst.max((lhs - rhs).abs());
            triples += 1;
        }
    }
    // functoriality d(G∘F) = dG ∘ dF
    let f_map = &maps[2];
    let g_map = &maps[1];
    let gf = map_compose(g_map, f_map).unwrap();
    let mut funct_worst = 0.0f64;
    for _ in 0..5 {
        let p = vec![rng.gen_range(-0.9..0.9), rng.gen_range(-0.9..0.9)];
        let comps = vec![rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)];
        let v = TangentVector::new(&m, &id, p, comps).unwrap();
        let direct = push_forward(&gf, &m, &dst, &v, &cfg()).unwrap();
        let staged = {
            let mid = push_forward(f_map, &m, &dst, &v, &cfg()).unwrap();
            push_forward(g_map, &dst, &dst, &mid, &cfg()).unwrap()
        };
        for fb in battery.iter().take(6) {
            let a = tangent_apply(&dst, &direct, fb).unwrap();
            let b = tangent_apply(&dst, &staged, fb).unwrap();
            funct_worst = funct_worst.max((a - b).abs());
        }
    }
    let passed = worst <= 1e-7 && funct_worst <= 1e-7;
    report(
        5,
        "push_forward",
        passed,
        &format!(
            "defining equation {worst:.3e} over {triples} triples, functoriality {funct_worst:.3e} (tol 1e-7)"
        ),
    );
}

/// Criterion 6: the positive field passes both smoothness routes and its
/// sharp action stays probe-smooth; the |x| field fails both routes; the
/// routes never disagree on any fixture.
#[test]
fn criterion_06_smoothness_routes() {
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
    let m = Arc::new(
        Manifold::new(
            vec![Chart::identity(ChartId::new("id"), region).unwrap()],
            3,
        )
        .unwrap(),
    );
    let battery = function_battery(1);
    let probe = cfg().with_order(2);

    let positive = field_on(
        &m,
        RealMap::new(1, 1, |xs| vec![xs[0].powi(2).add_const(0.5)]),
    );
    let pos_report = smooth_vf_check(&positive, &probe).unwrap();
    let mut sharp_ok = true;
    let carrier = m.carrier_region();
    for f in &battery {
        let xf = positive.sharp(f).unwrap();
        let p = ProbeConfig {
            order: probe.order.min(xf.max_order()),
            ..probe.clone()
        };
        if !smooth_on_probe(&carrier, &xf, &p).unwrap().passed {
            sharp_ok = false;
        }
    }

    let kinked = field_on(&m, RealMap::new(1, 1, |xs| vec![xs[0].abs()]));
    let kink_report = smooth_vf_check(&kinked, &probe).unwrap();

    let consistent = pos_report.consistent && kink_report.consistent;
    let passed = pos_report.passed
        && sharp_ok
        && !kink_report.bundle_passed
        && !kink_report.local_passed
        && consistent;
    report(
        6,
        "smoothness_routes",
        passed,
        &format!(
            "positive passed {}, sharp smooth {}, kinked bundle/local {}/{}, routes consistent {}",
            pos_report.passed,
            sharp_ok,
            kink_report.bundle_passed,
            kink_report.local_passed,
            consistent
        ),
    );
}

/// Criterion 7: bracket algebra: antisymmetry 1e-10, route agreement 1e-6,
/// Leibniz 1e-7, Jacobi 1e-5 over 10 seeded triples on ℝ².
#[test]
fn criterion_07_bracket_algebra() {
    let m = plane();
    let battery = function_battery(2);
    let points = m.carrier_samples();

    let mut antisym = 0.0f64;
    let mut oracle = 0.0f64;
    let mut leibniz = 0.0f64;
    let mut jacobi = 0.0f64;

    for seed in 0..10u64 {
        let x = field_on(&m, random_polynomial_comps(2, 7000 + 3 * seed));
        let y = field_on(&m, random_polynomial_comps(2, 7001 + 3 * seed));
        let z = field_on(&m, random_polynomial_comps(2, 7002 + 3 * seed));

        let xy = lie_bracket(&x, &y).unwrap();
        let yx = lie_bracket(&y, &x).unwrap();
        for p in &points {
            let a = xy.apply(p).unwrap().comps;
            let b = yx.apply(p).unwrap().comps;
            antisym = antisym.max(max_abs(
                &a.iter().zip(&b).map(|(u, v)| u + v).collect::<Vec<_>>(),
            ));
        }

        for p in &points {
            // nonlinear and transcendental test functions exercise the two
            // routes differently; linear ones agree trivially
            for f in battery.iter().skip(4).take(6) {
                let via_coords = tangent_apply(&m, &xy.apply(p).unwrap(), f).unwrap();
                let via_derivation = bracket_derivation_apply(&x, &y, p, f).unwrap();
                oracle = oracle.max((via_coords - via_derivation).abs());
            }
        }

        let f = &battery[4];
        let g = &battery[7];
        let fg = map_mul(f, g).unwrap();
        let b_fg = xy.sharp(&fg).unwrap();
        let b_f = xy.sharp(f).unwrap();
        let b_g = xy.sharp(g).unwrap();
        for p in &points {
            let lhs = b_fg.eval_scalar(p).unwrap();
            let rhs = f.eval_scalar(p).unwrap() * b_g.eval_scalar(p).unwrap()
                + g.eval_scalar(p).unwrap() * b_f.eval_scalar(p).unwrap();
            leibniz = leibniz.max((lhs - rhs).abs());
        }

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
            jacobi = jacobi.max(max_abs(&sum));
        }
    }
    let passed = antisym <= 1e-10 && oracle <= 1e-6 && leibniz <= 1e-7 && jacobi <= 1e-5;
    report(
        7,
        "bracket_algebra",
        passed,
        &format!(
            "antisymmetry {antisym:.3e} (1e-10), oracle {oracle:.3e} (1e-6), leibniz {leibniz:.3e} (1e-7), jacobi {jacobi:.3e} (1e-5)"
        ),
    );
}

/// Criterion 8: derivation equivalence round trips: X→D→X′ components
/// within 1e-8, D→X→D′ battery actions within 1e-6.
#[test]
fn criterion_08_derivation_round_trips() {
    let m = plane();
    let battery = function_battery(2);

    let x = field_on(&m, random_polynomial_comps(2, 800));
    let d = Derivation::from_field(&x);
    let x2 = vf_of_derivation(&d, &m).unwrap();
    let mut comp_defect = 0.0f64;
    for p in m.carrier_samples() {
        comp_defect = comp_defect.max(max_abs_diff(
            &x.apply(&p).unwrap().comps,
            &x2.apply(&p).unwrap().comps,
        ));
    }

    let d = Derivation::new(2, |f| {
        let fx = liegeom::calculus::map_partial(f, 0)?;
        let fy = liegeom::calculus::map_partial(f, 1)?;
        liegeom::calculus::map_add(
            &liegeom::calculus::map_scale(1.5, &fx),
            &liegeom::calculus::map_scale(-0.75, &fy),
        )
    });
    let x = vf_of_derivation(&d, &m).unwrap();
    let d2 = Derivation::from_field(&x);
    let mut action_defect = 0.0f64;
    for f in battery.iter().take(8) {
        let df = d.apply(f).unwrap();
        let d2f = d2.apply(f).unwrap();
        for p in m.carrier_samples() {
            action_defect = action_defect
                .max((df.eval_scalar(&p).unwrap() - d2f.eval_scalar(&p).unwrap()).abs());
        }
    }
    let passed = comp_defect <= 1e-8 && action_defect <= 1e-6;
    report(
        8,
        "derivation_round_trips",
        passed,
        &format!("components {comp_defect:.3e} (1e-8), actions {action_defect:.3e} (1e-6)"),
    );
}

/// Criterion 9: Diff-group laws on 6 affine fixtures over the disk within
/// 1e-9; a half-domain map is rejected by the automorphism check.
#[test]
fn criterion_09_diff_group() {
    let m = Arc::new(disk_manifold().unwrap());
    let carrier = m.carrier_region();
    let elements: Vec<DiffGroupElement> = disk_rotations(6)
        .into_iter()
        .map(|(f, f_inv)| {
            DiffGroupElement::new(
                PartialMap::new(f, carrier.clone()).unwrap(),
                PartialMap::new(f_inv, carrier.clone()).unwrap(),
            )
        })
        .collect();
    let g = diff_group(Arc::clone(&m), cfg());
    let laws = group_axioms_check(&g, &elements, 1e-9).unwrap();

    let half = Region::new(
        2,
        |p: &[f64]| p[0] > 0.05 && p[0] * p[0] + p[1] * p[1] < 1.0,
        vec![Sample::new(vec![0.5, 0.0], 0.2)],
        None,
    )
    .unwrap();
    let half_map = PartialMap::id_on(half);
    let rejected = !automorphism_check(&m, &half_map, &half_map.clone(), &cfg())
        .unwrap()
        .passed;

    let passed = laws.passed && rejected;
    report(
        9,
        "diff_group",
        passed,
        &format!(
            "assoc {:.3e}, identity {:.3e}, inverse {:.3e} (tol 1e-9), half-domain rejected {}",
            laws.assoc_residual, laws.identity_residual, laws.inverse_residual, rejected
        ),
    );
}

/// Criterion 10: both built-in Lie groups construct with passing
/// certificates; A·A⁻¹ = I within 1e-8 on 20 seeded matrices; the
/// determinant gradient at I along B equals trace(B) within 1e-6.
#[test]
fn criterion_10_lie_group_instances() {
    let eucl = euclidean_lie_group(2, &cfg()).unwrap();
    let gl = liegeom::models::gl_group(2, &cfg()).unwrap();
    let certs_ok = eucl.mult_certificate().passed
        && eucl.inv_certificate().passed
        && gl.mult_certificate().passed
        && gl.inv_certificate().passed;

    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let mut inverse_defect = 0.0f64;
    let mut produced = 0;
    while produced < 20 {
        let flat: Vec<f64> = SquareMatrix::identity(2)
            .flatten()
            .iter()
            .map(|&x| x + rng.gen_range(-0.3..0.3))
            .collect();
        let a = SquareMatrix::from_flat(2, &flat).unwrap();
        if a.det().abs() < 0.3 {
            continue;
        }
        let inv = matrix_inv(&a).unwrap();
        let prod = a.mul(&inv);
        inverse_defect = inverse_defect.max(max_abs_diff(
            &prod.flatten(),
            &SquareMatrix::identity(2).flatten(),
        ));
        produced += 1;
    }

    let dmap = det(3).unwrap();
    let eye = SquareMatrix::identity(3).flatten();
    let grad = dmap.jet_eval(&eye, 1).unwrap()[0].gradient().to_vec();
    let mut trace_defect = 0.0f64;
    for seed in 0..5u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(2000 + seed);
        let b: Vec<f64> = (0..9).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let directional: f64 = grad.iter().zip(&b).map(|(g, v)| g * v).sum();
        let trace = b[0] + b[4] + b[8];
        trace_defect = trace_defect.max((directional - trace).abs());
    }

    let passed = certs_ok && inverse_defect <= 1e-8 && trace_defect <= 1e-6;
    report(
        10,
        "lie_group_instances",
        passed,
        &format!(
            "certificates {certs_ok}, A·A⁻¹ defect {inverse_defect:.3e} (1e-8), det gradient vs trace {trace_defect:.3e} (1e-6)"
        ),
    );
}

/// Criterion 11: the left action is a homomorphism within 1e-9 at samples,
/// the unit acts as the identity, and the joint action map passes the
/// product-manifold probe.
#[test]
fn criterion_11_left_action() {
    let g = euclidean_lie_group(2, &cfg()).unwrap();
    let elements: Vec<Vec<f64>> = g
        .sampled_elements(3, 11)
        .unwrap()
        .into_iter()
        .take(4)
        .collect();
    let mut hom_defect = 0.0f64;
    for ga in &elements {
        for gb in &elements {
            let l_ab = g.left_action(&g.mul(ga, gb).unwrap(), &cfg()).unwrap();
            let l_a = g.left_action(ga, &cfg()).unwrap();
            let l_b = g.left_action(gb, &cfg()).unwrap();
            let composed = liegeom::groups::pmap_compose(&l_a, &l_b).unwrap();
            for p in g.manifold().carrier_samples() {
                hom_defect = hom_defect.max(max_abs_diff(
                    &l_ab.apply(&p).unwrap(),
                    &composed.apply(&p).unwrap(),
                ));
            }
        }
    }
    let l_unit = g.left_action(g.unit(), &cfg()).unwrap();
    let mut unit_defect = 0.0f64;
    for p in g.manifold().carrier_samples() {
        unit_defect = unit_defect.max(max_abs_diff(&l_unit.apply(&p).unwrap(), &p));
    }
    // joint smoothness through the full action check
    let rho = ActionSpec {
        per_element: Arc::new({
            let g2 = euclidean_lie_group(2, &cfg()).unwrap();
            move |gp: &[f64]| g2.left_action(gp, &cfg())
        }),
        joint: g.times().clone(),
    };
    let action = action_check(&g, g.manifold(), &rho, &elements[..2], &cfg()).unwrap();

    let passed = hom_defect <= 1e-9 && unit_defect == 0.0 && action.joint.passed;
    report(
        11,
        "left_action",
        passed,
        &format!(
            "homomorphism {hom_defect:.3e} (1e-9), unit defect {unit_defect:.1e}, joint probe {}",
            action.joint.passed
        ),
    );
}

/// Criterion 12: the Lie algebra of the Euclidean group is abelian
/// (residual < 1e-10); GL(2) structure constants equal matrix-commutator
/// constants within 1e-6 with closure < 1e-6 and Jacobi < 1e-5.
#[test]
fn criterion_12_lie_algebra_of_g() {
    let eucl = euclidean_lie_group(2, &cfg()).unwrap();
    let battery2 = function_battery(2);
    let abelian = lie_algebra_of(&eucl, &battery2[..4], &cfg(), 1e-6).unwrap();
    let mut abelian_defect = 0.0f64;
    for (_, coeffs) in &abelian.structure {
        abelian_defect = abelian_defect.max(max_abs(coeffs));
    }

    let gl = liegeom::models::gl_group(2, &cfg()).unwrap();
    let battery4 = function_battery(4);
    let algebra = lie_algebra_of(&gl, &battery4[..4], &cfg(), 1e-6).unwrap();
    let mut structure_defect = 0.0f64;
    for ((i, j), coeffs) in &algebra.structure {
        let mut ei = vec![0.0; 4];
        ei[*i] = 1.0;
        let mut ej = vec![0.0; 4];
        ej[*j] = 1.0;
        let a = SquareMatrix::from_flat(2, &ei).unwrap();
        let b = SquareMatrix::from_flat(2, &ej).unwrap();
        structure_defect = structure_defect.max(max_abs_diff(coeffs, &a.commutator(&b).flatten()));
    }

    let passed = abelian.passed
        && abelian_defect <= 1e-10
        && algebra.smooth_ok
        && structure_defect <= 1e-6
        && algebra.closure.bracket_span_residual <= 1e-6
        && algebra.algebra.jacobi_residual <= 1e-5;
    report(
        12,
        "lie_algebra_of_g",
        passed,
        &format!(
            "abelian defect {abelian_defect:.3e} (1e-10), structure vs commutators {structure_defect:.3e} (1e-6), closure {:.3e} (1e-6), jacobi {:.3e} (1e-5)",
            algebra.closure.bracket_span_residual, algebra.algebra.jacobi_residual
        ),
    );
}

/// Criterion 13: CLI determinism and the exit-code contract.
#[test]
fn criterion_13_cli_determinism_and_exit_codes() {
    let exe = env!("CARGO_BIN_EXE_liegeom");
    let run = |args: &[&str]| Command::new(exe).args(args).output().unwrap();

    let json_args = [
        "verify",
        "--model",
        "gl:2",
        "--seed",
        "7",
        "--samples",
        "8",
        "--format",
        "json",
    ];
    let a = run(&json_args);
    let b = run(&json_args);
    let identical = a.stdout == b.stdout && !a.stdout.is_empty();
    let json_ok = a.status.code() == Some(0);

    let pass_run = run(&["verify", "--model", "euclidean:2", "--samples", "8"]);
    let fail_run = run(&[
        "verify",
        "--model",
        "gl:2",
        "--tol",
        "1e-30",
        "--samples",
        "8",
    ]);
    let usage_run = run(&["verify", "--model", "nope"]);
    let flag_usage_run = run(&["verify"]);

    let codes_ok = pass_run.status.code() == Some(0)
        && fail_run.status.code() == Some(1)
        && usage_run.status.code() == Some(2)
        && flag_usage_run.status.code() == Some(2);

    let passed = identical && json_ok && codes_ok;
    report(
        13,
        "cli_determinism_and_exit_codes",
        passed,
        &format!(
            "byte-identical {} ({} bytes), exit codes pass/fail/usage = {:?}/{:?}/{:?} and {:?}",
            identical,
            a.stdout.len(),
            pass_run.status.code(),
            fail_run.status.code(),
            usage_run.status.code(),
            flag_usage_run.status.code()
        ),
    );
}
