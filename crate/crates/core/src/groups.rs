//! Partial maps, abstract group axiom checking, and the diffeomorphism
//! group of a manifold over partial maps.
//!
//! Partial maps return `None` outside their domain, so `None` licenses the
//! conclusion "the point is not in the domain", never a numeric value in
//! disguise. The diffeomorphism group is never materialized as a set; it is
//! a membership judgment (`automorphism_check`) plus operations closed on
//! checked elements.

use std::sync::Arc;

use crate::calculus::{ProbeConfig, RealMap};
use crate::error::{Error, Result};
use crate::geometry::{diffeomorphism_check, DiffeoReport, Manifold, Region};

/// A total map together with an explicit domain region; application outside
/// the domain yields `None`.
#[derive(Debug, Clone)]
pub struct PartialMap {
    map: RealMap,
    dom: Region,
}

impl PartialMap {
    pub fn new(map: RealMap, dom: Region) -> Result<PartialMap> {
        if map.in_dim() != dom.ambient_dim() {
            return Err(Error::dim(
                dom.ambient_dim(),
                map.in_dim(),
                "partial map domain",
            ));
        }
        Ok(PartialMap { map, dom })
    }

    /// The identity restricted to `dom`.
    pub fn id_on(dom: Region) -> PartialMap {
        let n = dom.ambient_dim();
        PartialMap {
            map: RealMap::identity(n),
            dom,
        }
    }

    /// `Some(f(x))` iff `x` is in the domain, else `None`.
    pub fn apply(&self, x: &[f64]) -> Option<Vec<f64>> {
        if !self.dom.contains(x) {
            return None;
        }
        self.map.eval(x).ok()
    }

    /// The underlying total map (the unwrapped function).
    pub fn total(&self) -> &RealMap {
        &self.map
    }

    pub fn dom(&self) -> &Region {
        &self.dom
    }
}

/// Domain-respecting composition `g ∘ f`: the domain is
/// `{x ∈ dom f | f(x) ∈ dom g}` with samples propagated by filtering.
/// Filtering away every sample is flagged, never guessed around.
pub fn pmap_compose(g: &PartialMap, f: &PartialMap) -> Result<PartialMap> {
    if f.map.out_dim() != g.map.in_dim() {
        return Err(Error::dim(
            g.map.in_dim(),
            f.map.out_dim(),
            "partial composition",
        ));
    }
    let f_contains = f.dom.contains_fn();
    let g_contains = g.dom.contains_fn();
    let f_total = f.map.clone();
    let mut samples = Vec::new();
    for s in f.dom.samples() {
        if let Some(y) = f.apply(&s.point) {
            if g.dom.contains(&y) {
                samples.push(s.clone());
            }
        }
    }
    if samples.is_empty() {
        return Err(Error::EmptyComposition);
    }
    let bounds = f.dom.bounds().map(|(l, h)| (l.to_vec(), h.to_vec()));
    let dom = Region::unchecked(
        f.dom.ambient_dim(),
        move |x: &[f64]| {
            if !f_contains(x) {
                return false;
            }
            match f_total.eval(x) {
                Ok(y) => y.iter().all(|v| v.is_finite()) && g_contains(&y),
                Err(_) => false,
            }
        },
        samples,
        bounds,
    );
    Ok(PartialMap {
        map: crate::calculus::map_compose(&g.map, &f.map)?,
        dom,
    })
}

/// Result of checking that a partial map is an automorphism of a manifold.
#[derive(Debug, Clone)]
pub struct AutomorphismReport {
    /// Sample-level equality of the map's domain with the carrier.
    pub dom_matches_carrier: bool,
    pub diffeo: DiffeoReport,
    pub passed: bool,
}

/// Check that `f` (with candidate inverse `f_inv`) is a diffeomorphism of
/// `m` onto itself whose domain is exactly the carrier, at sample level.
pub fn automorphism_check(
    m: &Manifold,
    f: &PartialMap,
    f_inv: &PartialMap,
    cfg: &ProbeConfig,
) -> Result<AutomorphismReport> {
    if f.map.in_dim() != m.ambient_dim() {
        return Err(Error::dim(
            m.ambient_dim(),
            f.map.in_dim(),
            "automorphism candidate",
        ));
    }
    // dom f = carrier, judged at both sample families
    let mut dom_matches_carrier = true;
    for p in m.carrier_samples() {
        if f.apply(&p).is_none() {
            dom_matches_carrier = false;
        }
    }
    for s in f.dom.samples() {
        if !m.carrier_contains(&s.point) {
            dom_matches_carrier = false;
        }
    }
    let diffeo = diffeomorphism_check(m, m, &f.map, &f_inv.map, cfg)?;
    let passed = dom_matches_carrier && diffeo.passed;
    Ok(AutomorphismReport {
        dom_matches_carrier,
        diffeo,
        passed,
    })
}

/// An element of the diffeomorphism group: a partial map with carrier domain
/// and its inverse.
#[derive(Debug, Clone)]
pub struct DiffGroupElement {
    pub pmap: PartialMap,
    pub inverse_pmap: PartialMap,
}

impl DiffGroupElement {
    pub fn new(pmap: PartialMap, inverse_pmap: PartialMap) -> DiffGroupElement {
        DiffGroupElement { pmap, inverse_pmap }
    }
}

type Contains<T> = Arc<dyn Fn(&T) -> bool + Send + Sync>;
type BinOp<T> = Arc<dyn Fn(&T, &T) -> Result<T> + Send + Sync>;
type UnOp<T> = Arc<dyn Fn(&T) -> Result<T> + Send + Sync>;
type Distance<T> = Arc<dyn Fn(&T, &T) -> f64 + Send + Sync>;

/// A group structure on some element type: carrier membership, composition,
/// unit, explicit inverse, and a distance used for tolerance checks.
/// Nothing is assumed; `group_axioms_check` verifies the laws.
#[derive(Clone)]
pub struct GroupOn<T> {
    pub carrier_contains: Contains<T>,
    pub op: BinOp<T>,
    pub unit: T,
    pub inv: UnOp<T>,
    pub distance: Distance<T>,
}

impl<T> std::fmt::Debug for GroupOn<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("GroupOn")
    }
}

impl<T: Clone> GroupOn<T> {
    /// Derived subtraction `a · b⁻¹`.
    pub fn sub(&self, a: &T, b: &T) -> Result<T> {
        (self.op)(a, &(self.inv)(b)?)
    }
}

/// Outcome of the explicit-operator group axioms check.
#[derive(Debug, Clone)]
pub struct GroupReport {
    pub closure_ok: bool,
    pub unit_member: bool,
    pub inverse_members: bool,
    pub assoc_residual: f64,
    pub identity_residual: f64,
    pub inverse_residual: f64,
    pub passed: bool,
}

/// Check closure, associativity, the two-sided identity, unit membership,
/// and that the explicit inverse witnesses two-sided inverses, over the
/// provided finite element sample, all within `tol`.
pub fn group_axioms_check<T: Clone>(
    g: &GroupOn<T>,
    elements: &[T],
    tol: f64,
) -> Result<GroupReport> {
    if elements.is_empty() {
        return Err(Error::Invalid(
            "group check needs at least one element".into(),
        ));
    }
    let mut closure_ok = true;
    let mut assoc_residual = 0.0f64;
    let mut identity_residual = 0.0f64;
    let mut inverse_residual = 0.0f64;

    for a in elements {
        for b in elements {
            let ab = (g.op)(a, b)?;
            if !(g.carrier_contains)(&ab) {
                closure_ok = false;
            }
            for c in elements {
                let ab_c = (g.op)(&ab, c)?;
                let bc = (g.op)(b, c)?;
                let a_bc = (g.op)(a, &bc)?;
                assoc_residual = assoc_residual.max((g.distance)(&ab_c, &a_bc));
            }
        }
    }
    let unit_member = (g.carrier_contains)(&g.unit);
    let mut inverse_members = true;
    for a in elements {
        let ua = (g.op)(&g.unit, a)?;
        let au = (g.op)(a, &g.unit)?;
        identity_residual = identity_residual
            .max((g.distance)(&ua, a))
            .max((g.distance)(&au, a));
        let ia = (g.inv)(a)?;
        if !(g.carrier_contains)(&ia) {
            inverse_members = false;
        }
        let left = (g.op)(&ia, a)?;
        let right = (g.op)(a, &ia)?;
        inverse_residual = inverse_residual
            .max((g.distance)(&left, &g.unit))
            .max((g.distance)(&right, &g.unit));
    }

    let passed = closure_ok
        && unit_member
        && inverse_members
        && assoc_residual <= tol
        && identity_residual <= tol
        && inverse_residual <= tol;
    Ok(GroupReport {
        closure_ok,
        unit_member,
        inverse_members,
        assoc_residual,
        identity_residual,
        inverse_residual,
        passed,
    })
}

/// The existence-style inverse axiom: every element has some two-sided
/// inverse among `candidates`. Returns the witnesses (one per element) or
/// `None` when some element has no witness.
pub fn inverse_existence_check<T: Clone>(
    g: &GroupOn<T>,
    elements: &[T],
    candidates: &[T],
    tol: f64,
) -> Result<Option<Vec<T>>> {
    let mut witnesses = Vec::with_capacity(elements.len());
    for a in elements {
        let mut found = None;
        for y in candidates {
            let left = (g.op)(y, a)?;
            let right = (g.op)(a, y)?;
            if (g.distance)(&left, &g.unit) <= tol && (g.distance)(&right, &g.unit) <= tol {
                found = Some(y.clone());
                break;
            }
        }
        match found {
            Some(w) => witnesses.push(w),
            None => return Ok(None),
        }
    }
    Ok(Some(witnesses))
}

/// The diffeomorphism group of `m` as a `GroupOn` over checked elements:
/// composition respects domains, the unit is the identity on the carrier,
/// inversion swaps the stored inverse, membership is `automorphism_check`,
/// and distance is the sup-difference at carrier samples.
pub fn diff_group(m: Arc<Manifold>, cfg: ProbeConfig) -> GroupOn<DiffGroupElement> {
    let carrier = m.carrier_region();
    let unit = DiffGroupElement::new(
        PartialMap::id_on(carrier.clone()),
        PartialMap::id_on(carrier),
    );
    let m_contains = Arc::clone(&m);
    let contains_cfg = cfg.clone();
    let carrier_contains: Contains<DiffGroupElement> = Arc::new(move |el| {
        automorphism_check(&m_contains, &el.pmap, &el.inverse_pmap, &contains_cfg)
            .map(|r| r.passed)
            .unwrap_or(false)
    });
    let op: BinOp<DiffGroupElement> = Arc::new(|g2, g1| {
        Ok(DiffGroupElement::new(
            pmap_compose(&g2.pmap, &g1.pmap)?,
            pmap_compose(&g1.inverse_pmap, &g2.inverse_pmap)?,
        ))
    });
    let inv: UnOp<DiffGroupElement> = Arc::new(|el| {
        Ok(DiffGroupElement::new(
            el.inverse_pmap.clone(),
            el.pmap.clone(),
        ))
    });
    let m_dist = Arc::clone(&m);
    let distance: Distance<DiffGroupElement> = Arc::new(move |a, b| {
        let mut worst = 0.0f64;
        for p in m_dist.carrier_samples() {
            match (a.pmap.apply(&p), b.pmap.apply(&p)) {
                (Some(x), Some(y)) => {
                    worst = worst.max(
                        x.iter()
                            .zip(&y)
                            .map(|(u, v)| (u - v).abs())
                            .fold(0.0, f64::max),
                    );
                }
                _ => return f64::INFINITY,
            }
        }
        worst
    });
    GroupOn {
        carrier_contains,
        op,
        unit,
        inv,
        distance,
    }
}
