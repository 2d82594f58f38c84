//! Diffeomorphism-group properties: inverse uniqueness at sample level, the
//! correspondence between the existence-style and explicit-operator group
//! axioms, and the group laws on affine fixtures.

use std::sync::Arc;

use liegeom::calculus::{ProbeConfig, RealMap};
use liegeom::groups::{
    automorphism_check, diff_group, group_axioms_check, inverse_existence_check, pmap_compose,
    DiffGroupElement, GroupOn, PartialMap,
};
use liegeom::models::{disk_manifold, disk_rotations, euclidean_manifold, test_diffeos};

fn cfg() -> ProbeConfig {
    ProbeConfig::default()
}

fn rotation_elements() -> (Arc<liegeom::geometry::Manifold>, Vec<DiffGroupElement>) {
    let m = Arc::new(disk_manifold().unwrap());
    let carrier = m.carrier_region();
    let elements = disk_rotations(6)
        .into_iter()
        .map(|(f, f_inv)| {
            DiffGroupElement::new(
                PartialMap::new(f, carrier.clone()).unwrap(),
                PartialMap::new(f_inv, carrier.clone()).unwrap(),
            )
        })
        .collect();
    (m, elements)
}

#[test]
fn rotation_fixtures_satisfy_the_group_laws() {
    let (m, elements) = rotation_elements();
    let g = diff_group(Arc::clone(&m), cfg());
    let report = group_axioms_check(&g, &elements, 1e-9).unwrap();
    assert!(report.closure_ok, "closure failed");
    assert!(report.unit_member);
    assert!(report.inverse_members);
    assert!(report.assoc_residual <= 1e-9);
    assert!(report.identity_residual <= 1e-9);
    assert!(report.inverse_residual <= 1e-9);
    assert!(report.passed);
}

#[test]
fn half_domain_map_is_rejected() {
    let m = disk_manifold().unwrap();
    // identity restricted to the right half-disk: domain mismatch
    let half = liegeom::geometry::Region::new(
        2,
        |p: &[f64]| p[0] > 0.05 && p[0] * p[0] + p[1] * p[1] < 1.0,
        vec![liegeom::geometry::Sample::new(vec![0.5, 0.0], 0.2)],
        None,
    )
    .unwrap();
    let f = PartialMap::id_on(half.clone());
    let f_inv = PartialMap::id_on(half);
    let report = automorphism_check(&m, &f, &f_inv, &cfg()).unwrap();
    assert!(!report.dom_matches_carrier);
    assert!(!report.passed);
}

#[test]
fn inverse_uniqueness_at_sample_level() {
    // two inverses of the same rotation, built differently, agree at every
    // carrier sample
    let (m, _) = rotation_elements();
    let theta = 2.0 * std::f64::consts::PI / 6.0;
    let carrier = m.carrier_region();
    let rot = |t: f64| {
        RealMap::affine(
            vec![vec![t.cos(), -t.sin()], vec![t.sin(), t.cos()]],
            vec![0.0, 0.0],
        )
    };
    let f = PartialMap::new(rot(theta), carrier.clone()).unwrap();
    let inv1 = PartialMap::new(rot(-theta), carrier.clone()).unwrap();
    let inv2 = PartialMap::new(rot(2.0 * std::f64::consts::PI - theta), carrier).unwrap();
    for inv in [&inv1, &inv2] {
        let report = automorphism_check(&m, &f, inv, &cfg()).unwrap();
        assert!(report.passed);
    }
    for p in m.carrier_samples() {
        let a = inv1.apply(&p).unwrap();
        let b = inv2.apply(&p).unwrap();
        let diff = a
            .iter()
            .zip(&b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(diff <= 1e-9, "two inverses diverge by {diff}");
    }
}

#[test]
fn explicit_and_existential_inverse_checks_correspond() {
    let (m, elements) = rotation_elements();
    let g = diff_group(m, cfg());
    // explicit-operator route passes
    let explicit = group_axioms_check(&g, &elements, 1e-9).unwrap();
    assert!(explicit.passed);
    // the explicit inverses witness the existence-style axiom over the
    // closed element set
    let witnesses = inverse_existence_check(&g, &elements, &elements, 1e-9)
        .unwrap()
        .expect("every rotation has an inverse among the fixtures");
    assert_eq!(witnesses.len(), elements.len());
    // and the witnesses define an explicit-operator group that passes again
    let table: Vec<(DiffGroupElement, DiffGroupElement)> = elements
        .iter()
        .cloned()
        .zip(witnesses.iter().cloned())
        .collect();
    let g2 = GroupOn {
        carrier_contains: g.carrier_contains.clone(),
        op: g.op.clone(),
        unit: g.unit.clone(),
        inv: {
            let dist = g.distance.clone();
            Arc::new(move |el: &DiffGroupElement| {
                let (_, w) = table
                    .iter()
                    .min_by(|(a, _), (b, _)| dist(a, el).total_cmp(&dist(b, el)))
                    .expect("non-empty witness table");
                Ok(w.clone())
            })
        },
        distance: g.distance.clone(),
    };
    let report = group_axioms_check(&g2, &elements, 1e-9).unwrap();
    assert!(report.passed);
}

#[test]
fn affine_diffeos_of_the_plane_are_automorphisms() {
    let m = euclidean_manifold(2).unwrap();
    let carrier = m.carrier_region();
    for (f, f_inv) in test_diffeos(2) {
        let pf = PartialMap::new(f, carrier.clone()).unwrap();
        let pf_inv = PartialMap::new(f_inv, carrier.clone()).unwrap();
        let report = automorphism_check(&m, &pf, &pf_inv, &cfg()).unwrap();
        assert!(report.passed);
    }
}

#[test]
fn composition_respects_domains() {
    let (m, elements) = rotation_elements();
    let r1 = &elements[1];
    let r2 = &elements[2];
    let composed = pmap_compose(&r1.pmap, &r2.pmap).unwrap();
    for p in m.carrier_samples() {
        let via_composed = composed.apply(&p).unwrap();
        let via_stages = r1.pmap.apply(&r2.pmap.apply(&p).unwrap()).unwrap();
        for (a, b) in via_composed.iter().zip(&via_stages) {
            assert!((a - b).abs() <= 1e-12);
        }
    }
    // outside the disk both are absent
    assert_eq!(composed.apply(&[2.0, 0.0]), None);
}
