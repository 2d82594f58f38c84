//! Vector fields on manifolds: the ♯-action on functions, restriction, the
//! two smoothness characterizations, derivations, and the Lie bracket.
//!
//! A field is stored as per-chart component maps (chart codomain ℝᵉ → ℝᵉ)
//! with a transition-consistency invariant, so jets can flow through the
//! components for smoothness probes and bracket computation. Out-of-carrier
//! behavior is undefined by construction: every operation refuses points
//! outside the carrier rather than returning zero.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::calculus::{
    map_add, map_compose, map_jacobian_apply, map_mul, map_partial, map_scale, map_stack, map_sub,
    smooth_on_probe, ProbeConfig, RealMap, SmoothnessReport,
};
use crate::error::{Error, Result};
use crate::geometry::{charts_submanifold, Chart, ChartId, Manifold, Region, Sample};
use crate::tangent::TangentVector;
use crate::tol;

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Two fields live on "the same manifold" when they share the Arc or have
/// structurally identical atlases (same chart ids and dimensions).
pub fn same_manifold(a: &Manifold, b: &Manifold) -> bool {
    a.ambient_dim() == b.ambient_dim()
        && a.dim() == b.dim()
        && a.charts().len() == b.charts().len()
        && a.charts()
            .iter()
            .zip(b.charts())
            .all(|(x, y)| x.id() == y.id())
}

/// Component maps of a field expressed in chart `target`, derived from its
/// components in chart `source` via the transition Jacobian:
/// `y ↦ J_{target∘source⁻¹}(w(y)) · comps(w(y))` with `w = source ∘ target⁻¹`.
fn transported_comps(source: &Chart, target: &Chart, comps: &RealMap) -> Result<RealMap> {
    if source.id() == target.id() {
        return Ok(comps.clone());
    }
    let tau = map_compose(target.fwd(), source.inv())?;
    let w = map_compose(source.fwd(), target.inv())?;
    map_compose(&map_jacobian_apply(&tau, comps)?, &w)
}

/// A vector field: per-chart component maps over a shared manifold.
#[derive(Debug, Clone)]
pub struct VectorField {
    manifold: Arc<Manifold>,
    comps: BTreeMap<ChartId, RealMap>,
}

impl VectorField {
    /// Build a field from explicit per-chart components, validating that
    /// every chart is covered, component shapes match, and components agree
    /// across sampled chart overlaps through the transition Jacobian.
    pub fn new(manifold: Arc<Manifold>, comps: BTreeMap<ChartId, RealMap>) -> Result<VectorField> {
        let e = manifold.dim();
        for chart in manifold.charts() {
            let c = comps.get(chart.id()).ok_or_else(|| {
                Error::Invalid(format!("missing components for chart `{}`", chart.id()))
            })?;
            if c.in_dim() != e || c.out_dim() != e {
                return Err(Error::dim(
                    e,
                    c.in_dim().max(c.out_dim()),
                    "field components",
                ));
            }
        }
        let field = VectorField { manifold, comps };
        field.check_transition_consistency()?;
        Ok(field)
    }

    /// Build a field from components in one chart, transporting them to all
    /// other charts through transition Jacobians.
    pub fn from_chart_comps(
        manifold: Arc<Manifold>,
        chart_id: &ChartId,
        comps: RealMap,
    ) -> Result<VectorField> {
        let source = manifold
            .chart(chart_id)
            .ok_or_else(|| Error::Invalid(format!("unknown chart id `{chart_id}`")))?
            .clone();
        let mut map = BTreeMap::new();
        for chart in manifold.charts() {
            map.insert(
                chart.id().clone(),
                transported_comps(&source, chart, &comps)?,
            );
        }
        VectorField::new(manifold, map)
    }

    /// Constant components in the first chart.
    pub fn constant(manifold: Arc<Manifold>, comps: Vec<f64>) -> Result<VectorField> {
        let e = manifold.dim();
        let id = manifold.charts()[0].id().clone();
        VectorField::from_chart_comps(manifold, &id, RealMap::constant(e, comps))
    }

    /// The zero field.
    pub fn zero(manifold: Arc<Manifold>) -> Result<VectorField> {
        let e = manifold.dim();
        VectorField::constant(manifold, vec![0.0; e])
    }

    fn check_transition_consistency(&self) -> Result<()> {
        let charts = self.manifold.charts();
        for (i, c1) in charts.iter().enumerate() {
            for c2 in &charts[i + 1..] {
                let comps1 = &self.comps[c1.id()];
                let comps2 = &self.comps[c2.id()];
                let transported = transported_comps(c1, c2, comps1)?;
                for s in c1.domain().samples().iter().chain(c2.domain().samples()) {
                    if !(c1.contains(&s.point) && c2.contains(&s.point)) {
                        continue;
                    }
                    let y2 = c2.apply(&s.point)?;
                    let direct = comps2.eval(&y2)?;
                    let via_jacobian = transported.eval(&y2)?;
                    let res = max_abs_diff(&direct, &via_jacobian);
                    if !(res <= tol::FIELD_TRANSITION) {
                        return Err(Error::InconsistentComponents {
                            chart1: c1.id().to_string(),
                            chart2: c2.id().to_string(),
                            residual: res,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn manifold(&self) -> &Arc<Manifold> {
        &self.manifold
    }

    pub fn comps_in(&self, chart_id: &ChartId) -> Option<&RealMap> {
        self.comps.get(chart_id)
    }

    /// The tangent vector assigned at `p`, in the first covering chart.
    pub fn apply(&self, p: &[f64]) -> Result<TangentVector> {
        let chart = self.manifold.covering_chart(p)?;
        let y = chart.apply(p)?;
        let comps = self.comps[chart.id()].eval(&y)?;
        if !comps.iter().all(|v| v.is_finite()) {
            return Err(Error::EvaluationFailure {
                context: format!("field components at {p:?}"),
            });
        }
        TangentVector::new(&self.manifold, chart.id(), p.to_vec(), comps)
    }

    /// The ♯-action: the scalar map `p ↦ X_p(f)`, itself jet-evaluable (the
    /// outer evaluation consumes one derivative order of `f`).
    pub fn sharp(&self, f: &RealMap) -> Result<RealMap> {
        let a = self.manifold.ambient_dim();
        if f.in_dim() != a || f.out_dim() != 1 {
            return Err(Error::dim(a, f.in_dim(), "sharp action argument"));
        }
        let mut per_chart: Vec<RealMap> = Vec::new();
        let mut cap = usize::MAX;
        for chart in self.manifold.charts() {
            let local_f = map_compose(f, chart.inv())?;
            let comps = &self.comps[chart.id()];
            let mut acc: Option<RealMap> = None;
            for i in 0..self.manifold.dim() {
                let term = map_mul(&comps.component(i), &map_partial(&local_f, i)?)?;
                acc = Some(match acc {
                    None => term,
                    Some(prev) => map_add(&prev, &term)?,
                });
            }
            let on_chart = acc.expect("manifold dimension is positive");
            let on_ambient = map_compose(&on_chart, chart.fwd())?;
            cap = cap.min(on_ambient.max_order());
            per_chart.push(on_ambient);
        }
        let manifold = Arc::clone(&self.manifold);
        Ok(RealMap::from_jet_fn(a, 1, cap, move |p, k| {
            let idx = manifold
                .charts()
                .iter()
                .position(|c| c.contains(p))
                .ok_or(Error::OutOfCarrier)?;
            per_chart[idx].jet_series(p, k)
        }))
    }

    /// Restrict the field to the submanifold over `within`. Charts that lose
    /// all samples are dropped with the submanifold.
    pub fn restrict(&self, within: &Region) -> Result<VectorField> {
        let sub = charts_submanifold(&self.manifold, within)?;
        let mut comps = BTreeMap::new();
        for chart in sub.charts() {
            comps.insert(chart.id().clone(), self.comps[chart.id()].clone());
        }
        VectorField::new(Arc::new(sub), comps)
    }

    /// Pointwise sum with another field on the same manifold.
    pub fn add(&self, other: &VectorField) -> Result<VectorField> {
        if !same_manifold(&self.manifold, &other.manifold) {
            return Err(Error::Invalid("fields live on different manifolds".into()));
        }
        let mut comps = BTreeMap::new();
        for (id, c) in &self.comps {
            comps.insert(id.clone(), map_add(c, &other.comps[id])?);
        }
        VectorField::new(Arc::clone(&self.manifold), comps)
    }

    /// Pointwise real scaling.
    pub fn scale(&self, s: f64) -> Result<VectorField> {
        let mut comps = BTreeMap::new();
        for (id, c) in &self.comps {
            comps.insert(id.clone(), map_scale(s, c));
        }
        VectorField::new(Arc::clone(&self.manifold), comps)
    }
}

/// Report of the two-route smoothness check for a vector field.
#[derive(Debug, Clone)]
pub struct SmoothVfReport {
    /// Bundle route: per carrier sample, the witnessing chart and verdict.
    pub per_sample: Vec<(Vec<f64>, ChartId, bool)>,
    /// Local route: per-chart component probes.
    pub local_reports: Vec<(ChartId, SmoothnessReport)>,
    pub bundle_passed: bool,
    pub local_passed: bool,
    /// The two characterizations must agree; disagreement is an internal
    /// inconsistency, not a smoothness verdict.
    pub consistent: bool,
    pub max_residual: f64,
    pub passed: bool,
}

/// The bundle-route composite for chart `c`:
/// `y ↦ (bundle chart of c)((p, X_p))` at `p = c⁻¹(y)`, with `X_p` evaluated
/// through the field's own chart dispatch.
fn bundle_local_map(field: &VectorField, c: &Chart) -> Result<RealMap> {
    let e = c.chart_dim();
    let manifold = Arc::clone(&field.manifold);
    let field = field.clone();
    let c = c.clone();
    let ident = RealMap::identity(e);
    // jets dispatch on the first covering chart of c⁻¹(y); around generic
    // probe points that choice is locally constant. Components derived by
    // chart transport already carry their reduced order cap.
    let cap = field
        .comps
        .values()
        .map(|m| m.max_order())
        .min()
        .unwrap_or(0);
    Ok(RealMap::from_jet_fn(e, 2 * e, cap, move |y, k| {
        let p = c.inv().eval(y)?;
        let covering = manifold.covering_chart(&p)?;
        let comps_here = if covering.id() == c.id() {
            field.comps[c.id()].clone()
        } else {
            transported_comps(covering, &c, &field.comps[covering.id()])?
        };
        let stacked = map_stack(&ident, &comps_here)?;
        stacked.jet_series(y, k)
    }))
}

/// Run both smoothness characterizations of a vector field and require them
/// to agree: (a) the bundle route probes `chart_TM ∘ (p ↦ (p, X_p)) ∘ c⁻¹`
/// around every carrier sample; (b) the local route probes each per-chart
/// component map over its chart codomain.
pub fn smooth_vf_check(field: &VectorField, cfg: &ProbeConfig) -> Result<SmoothVfReport> {
    let m = field.manifold();
    let mut max_residual = 0.0f64;

    // route (a): bundle charts around each carrier sample
    let mut per_sample = Vec::new();
    for point in m.carrier_samples() {
        let mut verdict = false;
        let mut witness = None;
        for chart in m.charts() {
            if !chart.contains(&point) {
                continue;
            }
            let bundle = bundle_local_map(field, chart)?;
            let order = cfg.order.min(bundle.max_order());
            let y = chart.apply(&point)?;
            let clearance = chart
                .domain()
                .samples()
                .iter()
                .find(|s| max_abs_diff(&s.point, &point) < 1e-12)
                .map(|s| s.clearance)
                .unwrap_or(1e-3);
            let jac = chart.fwd().jacobian(&point)?;
            let row_norm = jac
                .iter()
                .map(|row| row.iter().map(|x| x.abs()).sum::<f64>())
                .fold(0.0, f64::max);
            let local = Region::unchecked(
                chart.chart_dim(),
                {
                    let cod = chart.codomain().clone();
                    move |q: &[f64]| cod.contains(q)
                },
                vec![Sample::new(y, clearance / row_norm.max(1.0) / 2.0)],
                None,
            );
            let report = smooth_on_probe(
                &local,
                &bundle,
                &ProbeConfig {
                    order,
                    ..cfg.clone()
                },
            )?;
            max_residual = max_residual.max(report.max_fd_residual);
            if report.passed {
                verdict = true;
                witness = Some(chart.id().clone());
                break;
            }
            if witness.is_none() {
                witness = Some(chart.id().clone());
            }
        }
        per_sample.push((
            point,
            witness.expect("carrier samples are covered"),
            verdict,
        ));
    }
    let bundle_passed = per_sample.iter().all(|(_, _, ok)| *ok);

    // route (b): per-chart component probes
    let mut local_reports = Vec::new();
    for chart in m.charts() {
        let comps = &field.comps[chart.id()];
        let order = cfg.order.min(comps.max_order());
        let report = smooth_on_probe(
            chart.codomain(),
            comps,
            &ProbeConfig {
                order,
                ..cfg.clone()
            },
        )?;
        max_residual = max_residual.max(report.max_fd_residual);
        local_reports.push((chart.id().clone(), report));
    }
    let local_passed = local_reports.iter().all(|(_, r)| r.passed);

    let consistent = bundle_passed == local_passed;
    Ok(SmoothVfReport {
        per_sample,
        local_reports,
        bundle_passed,
        local_passed,
        consistent,
        max_residual,
        passed: bundle_passed && local_passed && consistent,
    })
}

/// The Lie bracket `[X, Y]` by the coordinate formula
/// `[X,Y]ⁱ = Σⱼ (Xʲ ∂ⱼYⁱ − Yʲ ∂ⱼXⁱ)` per chart. The derivation form
/// `p, f ↦ X_p(Y♯f) − Y_p(X♯f)` is the independent oracle; see
/// [`bracket_derivation_apply`].
pub fn lie_bracket(x: &VectorField, y: &VectorField) -> Result<VectorField> {
    if !same_manifold(&x.manifold, &y.manifold) {
        return Err(Error::Invalid(
            "bracket operands live on different manifolds".into(),
        ));
    }
    let mut comps = BTreeMap::new();
    for chart in x.manifold.charts() {
        let xc = &x.comps[chart.id()];
        let yc = &y.comps[chart.id()];
        let jy_x = map_jacobian_apply(yc, xc)?;
        let jx_y = map_jacobian_apply(xc, yc)?;
        comps.insert(chart.id().clone(), map_sub(&jy_x, &jx_y)?);
    }
    VectorField::new(Arc::clone(&x.manifold), comps)
}

/// Derivation-form action of the bracket at a point:
/// `(X♯(Y♯f) − Y♯(X♯f))(p)`. Independent of the coordinate formula.
pub fn bracket_derivation_apply(
    x: &VectorField,
    y: &VectorField,
    p: &[f64],
    f: &RealMap,
) -> Result<f64> {
    let ysf = y.sharp(f)?;
    let xsf = x.sharp(f)?;
    let x_ysf = x.sharp(&ysf)?;
    let y_xsf = y.sharp(&xsf)?;
    Ok(x_ysf.eval_scalar(p)? - y_xsf.eval_scalar(p)?)
}

/// An operator taking scalar maps to scalar maps, candidate derivation.
#[derive(Clone)]
pub struct Derivation {
    in_dim: usize,
    action: Arc<dyn Fn(&RealMap) -> Result<RealMap> + Send + Sync>,
}

impl std::fmt::Debug for Derivation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Derivation(dim {})", self.in_dim)
    }
}

impl Derivation {
    pub fn new<F>(in_dim: usize, action: F) -> Derivation
    where
        F: Fn(&RealMap) -> Result<RealMap> + Send + Sync + 'static,
    {
        Derivation {
            in_dim,
            action: Arc::new(action),
        }
    }

    /// The derivation induced by a smooth field: `f ↦ X♯f`.
    pub fn from_field(field: &VectorField) -> Derivation {
        let field = field.clone();
        Derivation::new(field.manifold().ambient_dim(), move |f| field.sharp(f))
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn apply(&self, f: &RealMap) -> Result<RealMap> {
        if f.in_dim() != self.in_dim || f.out_dim() != 1 {
            return Err(Error::dim(self.in_dim, f.in_dim(), "derivation argument"));
        }
        (self.action)(f)
    }
}

/// Report of the derivation axioms check.
#[derive(Debug, Clone)]
pub struct DerivationReport {
    pub linear_residual: f64,
    pub leibniz_residual: f64,
    pub outputs_smooth: bool,
    pub passed: bool,
}

/// Check linearity, the Leibniz identity, and smoothness of outputs for a
/// candidate derivation, pointwise at carrier samples over the supplied
/// function batteries.
pub fn is_derivation_check(
    m: &Manifold,
    d: &Derivation,
    f_battery: &[RealMap],
    g_battery: &[RealMap],
    cfg: &ProbeConfig,
) -> Result<DerivationReport> {
    if f_battery.is_empty() || g_battery.is_empty() {
        return Err(Error::Invalid(
            "derivation check needs non-empty batteries".into(),
        ));
    }
    let points = m.carrier_samples();
    let mut linear_residual = 0.0f64;
    let mut leibniz_residual = 0.0f64;

    for f in f_battery {
        for g in g_battery {
            let df = d.apply(f)?;
            let dg = d.apply(g)?;
            let d_sum = d.apply(&map_add(f, g)?)?;
            let d_scaled = d.apply(&map_scale(2.5, f))?;
            let d_prod = d.apply(&map_mul(f, g)?)?;
            for p in &points {
                let fv = f.eval_scalar(p)?;
                let gv = g.eval_scalar(p)?;
                let dfv = df.eval_scalar(p)?;
                let dgv = dg.eval_scalar(p)?;
                // additivity and homogeneity
                linear_residual = linear_residual
                    .max((d_sum.eval_scalar(p)? - (dfv + dgv)).abs())
                    .max((d_scaled.eval_scalar(p)? - 2.5 * dfv).abs());
                // Leibniz: D(fg) = f·Dg + g·Df
                leibniz_residual =
                    leibniz_residual.max((d_prod.eval_scalar(p)? - (fv * dgv + gv * dfv)).abs());
            }
        }
    }

    // codomain clause: outputs stay jet-evaluable and probe-smooth
    let carrier = m.carrier_region();
    let mut outputs_smooth = true;
    for f in f_battery {
        let df = d.apply(f)?;
        let order = cfg.order.min(df.max_order());
        let report = smooth_on_probe(
            &carrier,
            &df,
            &ProbeConfig {
                order,
                ..cfg.clone()
            },
        )?;
        if !report.passed {
            outputs_smooth = false;
        }
    }

    let passed = linear_residual <= tol::DERIVATION_POINTWISE
        && leibniz_residual <= tol::DERIVATION_POINTWISE
        && outputs_smooth;
    Ok(DerivationReport {
        linear_residual,
        leibniz_residual,
        outputs_smooth,
        passed,
    })
}

/// Recover a vector field from a derivation by applying it to the chart
/// coordinate functions: `compsᵢ(y) = (D χᵢ)(c⁻¹(y))` with `χᵢ = cᵢ`.
pub fn vf_of_derivation(d: &Derivation, m: &Arc<Manifold>) -> Result<VectorField> {
    let mut comps = BTreeMap::new();
    for chart in m.charts() {
        let mut stacked: Option<RealMap> = None;
        for i in 0..m.dim() {
            let coord = chart.fwd().component(i);
            let applied = d.apply(&coord)?;
            stacked = Some(match stacked {
                None => applied,
                Some(prev) => map_stack(&prev, &applied)?,
            });
        }
        let on_chart = map_compose(&stacked.expect("positive dimension"), chart.inv())?;
        comps.insert(chart.id().clone(), on_chart);
    }
    VectorField::new(Arc::clone(m), comps)
}
