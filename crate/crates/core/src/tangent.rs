//! Tangent vectors, coordinate/component functions, push-forwards, and the
//! tangent-bundle charting functions.
//!
//! A tangent vector is stored as finite coordinates in a designated chart;
//! its action as a derivation on scalar maps is recovered by
//! [`tangent_apply`]. Chart changes are Jacobians of transition maps, and
//! the defining functional equation of the push-forward,
//! `dF(v)(f) = v(f ∘ F)`, is what the tests verify.

use std::sync::Arc;

use crate::calculus::{
    map_compose, map_sub, substitute, Ctx, ProbeConfig, RealMap, SmoothnessReport, Taylor,
};
use crate::error::{Error, Result};
use crate::geometry::manifold::overlap_image_region;
use crate::geometry::{Chart, ChartId, Manifold, Region, Sample};

/// A tangent vector at `base`, coordinatized in the chart `chart_id`.
#[derive(Debug, Clone)]
pub struct TangentVector {
    pub base: Vec<f64>,
    pub chart_id: ChartId,
    pub comps: Vec<f64>,
}

impl TangentVector {
    /// Build a tangent vector, checking that `base` lies in the referenced
    /// chart's domain and that the component count matches the chart
    /// dimension.
    pub fn new(
        m: &Manifold,
        chart_id: &ChartId,
        base: Vec<f64>,
        comps: Vec<f64>,
    ) -> Result<TangentVector> {
        let chart = m
            .chart(chart_id)
            .ok_or_else(|| Error::Invalid(format!("unknown chart id `{chart_id}`")))?;
        if !chart.contains(&base) {
            return Err(Error::OutOfDomain {
                chart: chart_id.as_str().into(),
            });
        }
        if comps.len() != chart.chart_dim() {
            return Err(Error::dim(
                chart.chart_dim(),
                comps.len(),
                "tangent components",
            ));
        }
        Ok(TangentVector {
            base,
            chart_id: chart_id.clone(),
            comps,
        })
    }
}

/// A point of the tangent bundle: a base point with a tangent vector at it.
#[derive(Debug, Clone)]
pub struct TMPoint {
    pub base: Vec<f64>,
    pub vec: TangentVector,
}

impl TMPoint {
    pub fn new(vec: TangentVector) -> TMPoint {
        TMPoint {
            base: vec.base.clone(),
            vec,
        }
    }
}

fn chart_of<'m>(m: &'m Manifold, v: &TangentVector) -> Result<&'m Chart> {
    m.chart(&v.chart_id)
        .ok_or_else(|| Error::Invalid(format!("unknown chart id `{}`", v.chart_id)))
}

/// Apply a tangent vector to a scalar map on the ambient space:
/// `v(f) = Σᵢ compsᵢ · ∂ᵢ(f ∘ ψ⁻¹)(ψ(p))`.
pub fn tangent_apply(m: &Manifold, v: &TangentVector, f: &RealMap) -> Result<f64> {
    if f.out_dim() != 1 {
        return Err(Error::dim(
            1,
            f.out_dim(),
            "derivation argument must be scalar",
        ));
    }
    if f.in_dim() != m.ambient_dim() {
        return Err(Error::dim(
            m.ambient_dim(),
            f.in_dim(),
            "derivation argument",
        ));
    }
    let chart = chart_of(m, v)?;
    let local = map_compose(f, chart.inv())?;
    let y = chart.apply(&v.base)?;
    let jet = local.jet_eval(&y, 1)?;
    if !jet[0].is_finite() {
        return Err(Error::EvaluationFailure {
            context: format!("jet of test function at chart point {y:?}"),
        });
    }
    Ok(jet[0]
        .gradient()
        .iter()
        .zip(&v.comps)
        .map(|(g, c)| g * c)
        .sum())
}

/// The coordinate tangent vector of `chart` at `p` along direction `b`:
/// its action is the directional derivative of `f ∘ ψ⁻¹` at `ψ(p)` along `b`.
pub fn coordinate_vector(
    m: &Manifold,
    chart: &Chart,
    p: &[f64],
    b: &[f64],
) -> Result<TangentVector> {
    TangentVector::new(m, chart.id(), p.to_vec(), b.to_vec())
}

/// The i-th coordinate test function of a chart at `p`:
/// `x ↦ (ψ(x) − ψ(p)) · eᵢ`.
pub fn coord_test_function(chart: &Chart, p: &[f64], i: usize) -> Result<RealMap> {
    let yi = chart.apply(p)?[i];
    let proj = chart.fwd().component(i);
    map_sub(&proj, &RealMap::constant(chart.ambient_dim(), vec![yi]))
}

/// Components of `v` in an arbitrary covering chart, computed by acting on
/// the chart's coordinate functions.
pub fn component_function(m: &Manifold, v: &TangentVector, chart: &Chart) -> Result<Vec<f64>> {
    if !chart.contains(&v.base) {
        return Err(Error::OutOfDomain {
            chart: chart.id().as_str().into(),
        });
    }
    (0..chart.chart_dim())
        .map(|i| {
            let f = coord_test_function(chart, &v.base, i)?;
            tangent_apply(m, v, &f)
        })
        .collect()
}

/// Re-express `v` in another covering chart via the transition Jacobian.
/// The derivation action is preserved.
pub fn change_chart(m: &Manifold, v: &TangentVector, target: &Chart) -> Result<TangentVector> {
    if !target.contains(&v.base) {
        return Err(Error::OutOfDomain {
            chart: target.id().as_str().into(),
        });
    }
    let source = chart_of(m, v)?;
    if source.id() == target.id() {
        return Ok(v.clone());
    }
    let transition = map_compose(target.fwd(), source.inv())?;
    let y = source.apply(&v.base)?;
    let jac = transition.jacobian(&y)?;
    let comps = jac
        .iter()
        .map(|row| row.iter().zip(&v.comps).map(|(a, c)| a * c).sum())
        .collect();
    TangentVector::new(m, target.id(), v.base.clone(), comps)
}

/// Push a tangent vector forward along a map `f: src → dst`.
///
/// Searches atlas pairs `(c1, c2)` around `v.base` exactly as the smoothness
/// check does; the result is based at `f(p)` in the witnessing destination
/// chart with components `J_{c2∘f∘c1⁻¹}(c1(p)) · comps`.
pub fn push_forward(
    f: &RealMap,
    src: &Manifold,
    dst: &Manifold,
    v: &TangentVector,
    cfg: &ProbeConfig,
) -> Result<TangentVector> {
    use crate::calculus::smooth_on_probe;

    let p = &v.base;
    let fp = f.eval(p)?;
    for c1 in src.charts() {
        if !c1.contains(p) {
            continue;
        }
        'dst: for c2 in dst.charts() {
            if !c2.contains(&fp) {
                continue;
            }
            for s in c1.domain().samples() {
                let y = f.eval(&s.point)?;
                if !y.iter().all(|t| t.is_finite()) || !c2.contains(&y) {
                    continue 'dst;
                }
            }
            let transition = map_compose(c2.fwd(), &map_compose(f, c1.inv())?)?;
            let probe = smooth_on_probe(c1.codomain(), &transition, cfg)?;
            if !probe.passed {
                continue;
            }
            let v1 = change_chart(src, v, c1)?;
            let y = c1.apply(p)?;
            let jac = transition.jacobian(&y)?;
            let comps: Vec<f64> = jac
                .iter()
                .map(|row| row.iter().zip(&v1.comps).map(|(a, c)| a * c).sum())
                .collect();
            return TangentVector::new(dst, c2.id(), fp, comps);
        }
    }
    Err(Error::OutOfAtlas)
}

/// Membership in the bundle-chart domain of `c`: the base point lies in the
/// chart domain (the vector part ranges over the whole tangent space).
pub fn domain_tm_contains(c: &Chart, tm: &TMPoint) -> bool {
    c.contains(&tm.base)
}

/// Membership in the bundle-chart codomain of `c`.
pub fn codomain_tm_contains(c: &Chart, x: &[f64]) -> bool {
    c.codomain().contains(x)
}

/// Forward bundle chart: `(p, v) ↦ (c(p), components of v in c)`.
pub fn apply_chart_tm(m: &Manifold, c: &Chart, tm: &TMPoint) -> Result<(Vec<f64>, Vec<f64>)> {
    let x = c.apply(&tm.base)?;
    let u = component_function(m, &tm.vec, c)?;
    Ok((x, u))
}

/// Inverse bundle chart: `(x, u) ↦ (c⁻¹(x), Σᵢ uᵢ · coordinate vector i)`.
pub fn inv_chart_tm(m: &Manifold, c: &Chart, x: &[f64], u: &[f64]) -> Result<TMPoint> {
    let base = c.apply_inv(x)?;
    let vec = TangentVector::new(m, c.id(), base, u.to_vec())?;
    Ok(TMPoint::new(vec))
}

/// The bundle transition map on ℝ²ᵉ:
/// `(x, u) ↦ (τ(x), J_τ(x) · u)` with `τ = c2 ∘ c1⁻¹`.
pub fn tm_transition(c1: &Chart, c2: &Chart) -> Result<RealMap> {
    let tau = map_compose(c2.fwd(), c1.inv())?;
    let e = c1.chart_dim();
    if tau.max_order() == 0 {
        return Err(Error::UnsupportedOrder {
            requested: 1,
            max: 0,
        });
    }
    let cap = tau.max_order() - 1;
    Ok(RealMap::from_jet_fn(2 * e, 2 * e, cap, move |p, k| {
        let (x, u) = p.split_at(e);
        let ctx2 = Ctx::get(2 * e, k);
        let x_vars: Vec<Taylor> = x
            .iter()
            .enumerate()
            .map(|(i, &v)| Taylor::variable(Arc::clone(&ctx2), v, i))
            .collect();
        let u_vars: Vec<Taylor> = u
            .iter()
            .enumerate()
            .map(|(j, &v)| Taylor::variable(Arc::clone(&ctx2), v, e + j))
            .collect();
        let st = tau.jet_series(x, k + 1)?;
        let st_k: Vec<Taylor> = st.iter().map(|t| t.truncate(k)).collect();
        let mut out = substitute(&st_k, &x_vars);
        for ti in &st {
            let mut acc: Option<Taylor> = None;
            for (j, uj) in u_vars.iter().enumerate() {
                let dj = substitute(&[ti.derive(j)], &x_vars);
                let term = dj[0].mul(uj);
                acc = Some(match acc {
                    None => term,
                    Some(a) => a.add(&term),
                });
            }
            out.push(acc.expect("at least one coordinate"));
        }
        Ok(out)
    }))
}

/// Fixed vector parts paired with sampled base coordinates when probing
/// bundle-chart transitions.
fn tm_probe_vectors(e: usize) -> Vec<Vec<f64>> {
    let mut list = vec![vec![0.0; e]];
    let mut alternating = vec![0.0; e];
    for (i, slot) in alternating.iter_mut().enumerate() {
        *slot = if i % 2 == 0 { 1.0 } else { -0.5 };
    }
    list.push(alternating);
    let mut ramp = vec![0.0; e];
    for (i, slot) in ramp.iter_mut().enumerate() {
        *slot = 0.3 + 0.2 * i as f64;
    }
    list.push(ramp);
    list
}

/// Probe smoothness of the bundle transition `chart_TM(c2) ∘ chart_TM(c1)⁻¹`
/// on sampled `(x, u)` pairs over the chart overlap. Vacuously passes when
/// the overlap has no samples.
pub fn atlas_tm_check(
    m: &Manifold,
    c1: &ChartId,
    c2: &ChartId,
    cfg: &ProbeConfig,
) -> Result<SmoothnessReport> {
    let c1 = m
        .chart(c1)
        .ok_or_else(|| Error::Invalid(format!("unknown chart id `{c1}`")))?;
    let c2 = m
        .chart(c2)
        .ok_or_else(|| Error::Invalid(format!("unknown chart id `{c2}`")))?;
    let base_region = overlap_image_region(c1, c2)?;
    if base_region.samples().is_empty() {
        return Ok(SmoothnessReport::vacuous(cfg.order, cfg.seed));
    }
    let e = c1.chart_dim();
    let mut samples = Vec::new();
    for s in base_region.samples() {
        for u in tm_probe_vectors(e) {
            let mut point = s.point.clone();
            point.extend_from_slice(&u);
            samples.push(Sample::new(point, s.clearance));
        }
    }
    let base_contains = base_region.contains_fn();
    let region = Region::unchecked(
        2 * e,
        move |p: &[f64]| base_contains(&p[..e]),
        samples,
        None,
    );
    let transition = tm_transition(c1, c2)?;
    crate::calculus::smooth_on_probe(&region, &transition, cfg)
}
