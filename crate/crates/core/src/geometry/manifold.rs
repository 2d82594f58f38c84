//! Atlases, smooth compatibility, manifolds, and smoothness of maps between
//! manifolds.

use crate::calculus::{
    map_compose, map_pair, smooth_on_probe, ProbeConfig, RealMap, SmoothnessReport,
};
use crate::error::{Error, Result};
use crate::geometry::chart::{Chart, ChartId};
use crate::geometry::region::{Region, Sample};

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Probe region for one direction of a transition map: the image under
/// `base.fwd` of the sampled overlap of the two chart domains.
pub(crate) fn overlap_image_region(base: &Chart, other: &Chart) -> Result<Region> {
    let mut samples = Vec::new();
    for s in base
        .domain()
        .samples()
        .iter()
        .chain(other.domain().samples())
    {
        if base.contains(&s.point) && other.contains(&s.point) {
            let y = base.fwd().eval(&s.point)?;
            let jac = base.fwd().jacobian(&s.point)?;
            let row_norm = jac
                .iter()
                .map(|row| row.iter().map(|x| x.abs()).sum::<f64>())
                .fold(0.0, f64::max);
            samples.push(Sample::new(y, s.clearance / row_norm.max(1.0) / 2.0));
        }
    }
    let base_cod = base.codomain().clone();
    let base_inv = base.inv().clone();
    let dom_a = base.domain().contains_fn();
    let dom_b = other.domain().contains_fn();
    Ok(Region::unchecked(
        base.chart_dim(),
        move |y: &[f64]| {
            if !base_cod.contains(y) {
                return false;
            }
            match base_inv.eval(y) {
                Ok(x) => dom_a(&x) && dom_b(&x),
                Err(_) => false,
            }
        },
        samples,
        None,
    ))
}

/// Probe smooth compatibility of two charts: the transitions `c2 ∘ c1⁻¹` and
/// `c1 ∘ c2⁻¹` must pass the smoothness probe on the images of the sampled
/// domain overlap. Charts with no sampled overlap are vacuously compatible.
pub fn smooth_compat(c1: &Chart, c2: &Chart, cfg: &ProbeConfig) -> Result<SmoothnessReport> {
    if c1.ambient_dim() != c2.ambient_dim() {
        return Err(Error::dim(
            c1.ambient_dim(),
            c2.ambient_dim(),
            "chart ambient dimensions",
        ));
    }
    if c1.chart_dim() != c2.chart_dim() {
        return Err(Error::dim(
            c1.chart_dim(),
            c2.chart_dim(),
            "chart codomain dimensions",
        ));
    }
    let mut merged: Option<SmoothnessReport> = None;
    for (base, other) in [(c1, c2), (c2, c1)] {
        let region = overlap_image_region(base, other)?;
        let report = if region.samples().is_empty() {
            SmoothnessReport::vacuous(cfg.order, cfg.seed)
        } else {
            let transition = map_compose(other.fwd(), base.inv())?;
            smooth_on_probe(&region, &transition, cfg)?
        };
        merged = Some(match merged {
            None => report,
            Some(m) => m.merged(report),
        });
    }
    Ok(merged.expect("two directions probed"))
}

/// A manifold: a non-empty atlas of pairwise smoothly compatible charts over
/// one ambient space. Construction probes every chart pair and fails with the
/// offending pair on the first incompatibility.
#[derive(Debug, Clone)]
pub struct Manifold {
    charts: Vec<Chart>,
    probe_order: usize,
    compat_reports: Vec<(ChartId, ChartId, SmoothnessReport)>,
}

impl Manifold {
    pub fn new(charts: Vec<Chart>, probe_order: usize) -> Result<Manifold> {
        Manifold::with_config(charts, &ProbeConfig::default().with_order(probe_order))
    }

    pub fn with_config(charts: Vec<Chart>, cfg: &ProbeConfig) -> Result<Manifold> {
        if charts.is_empty() {
            return Err(Error::Invalid("a manifold needs at least one chart".into()));
        }
        let a = charts[0].ambient_dim();
        let e = charts[0].chart_dim();
        for c in &charts {
            if c.ambient_dim() != a {
                return Err(Error::dim(a, c.ambient_dim(), "atlas ambient dimension"));
            }
            if c.chart_dim() != e {
                return Err(Error::dim(e, c.chart_dim(), "atlas chart dimension"));
            }
        }
        for i in 0..charts.len() {
            for j in (i + 1)..charts.len() {
                if charts[i].id() == charts[j].id() {
                    return Err(Error::Invalid(format!(
                        "duplicate chart id `{}` in atlas",
                        charts[i].id()
                    )));
                }
            }
        }
        let mut compat_reports = Vec::new();
        for i in 0..charts.len() {
            for j in i..charts.len() {
                let report = smooth_compat(&charts[i], &charts[j], cfg)?;
                if !report.passed {
                    return Err(Error::IncompatibleCharts {
                        chart1: charts[i].id().to_string(),
                        chart2: charts[j].id().to_string(),
                        residual: report.max_fd_residual,
                    });
                }
                compat_reports.push((charts[i].id().clone(), charts[j].id().clone(), report));
            }
        }
        Ok(Manifold {
            charts,
            probe_order: cfg.order,
            compat_reports,
        })
    }

    pub fn charts(&self) -> &[Chart] {
        &self.charts
    }

    pub fn probe_order(&self) -> usize {
        self.probe_order
    }

    pub fn compat_reports(&self) -> &[(ChartId, ChartId, SmoothnessReport)] {
        &self.compat_reports
    }

    pub fn chart(&self, id: &ChartId) -> Option<&Chart> {
        self.charts.iter().find(|c| c.id() == id)
    }

    pub fn ambient_dim(&self) -> usize {
        self.charts[0].ambient_dim()
    }

    /// Dimension of the manifold (the chart codomain dimension).
    pub fn dim(&self) -> usize {
        self.charts[0].chart_dim()
    }

    pub fn carrier_contains(&self, p: &[f64]) -> bool {
        self.charts.iter().any(|c| c.contains(p))
    }

    /// First chart (in declaration order) whose domain contains `p`.
    pub fn covering_chart(&self, p: &[f64]) -> Result<&Chart> {
        self.charts
            .iter()
            .find(|c| c.contains(p))
            .ok_or(Error::OutOfCarrier)
    }

    /// Union of chart-domain samples, deduplicated across charts.
    pub fn carrier_samples(&self) -> Vec<Vec<f64>> {
        let mut points: Vec<Vec<f64>> = Vec::new();
        for c in &self.charts {
            for s in c.domain().samples() {
                let dup = points.iter().any(|p| max_abs_diff(p, &s.point) < 1e-12);
                if !dup {
                    points.push(s.point.clone());
                }
            }
        }
        points
    }

    /// The carrier as a region: union of chart domains, with the union of
    /// domain samples.
    pub fn carrier_region(&self) -> Region {
        let charts = self.charts.clone();
        let dim = self.ambient_dim();
        let mut samples = Vec::new();
        for c in &self.charts {
            for s in c.domain().samples() {
                let dup = samples
                    .iter()
                    .any(|t: &Sample| max_abs_diff(&t.point, &s.point) < 1e-12);
                if !dup {
                    samples.push(s.clone());
                }
            }
        }
        let bounds = self.charts[0].domain().bounds().map(|(l, h)| {
            let mut lo = l.to_vec();
            let mut hi = h.to_vec();
            for c in &self.charts[1..] {
                if let Some((l2, h2)) = c.domain().bounds() {
                    for i in 0..lo.len() {
                        lo[i] = lo[i].min(l2[i]);
                        hi[i] = hi[i].max(h2[i]);
                    }
                }
            }
            (lo, hi)
        });
        Region::unchecked(
            dim,
            move |p: &[f64]| charts.iter().any(|c| c.contains(p)),
            samples,
            bounds,
        )
    }
}

/// Restrict a manifold to the open set `within`: every chart is restricted,
/// charts whose restricted domain has no surviving samples are dropped, and
/// the result is revalidated. Errors when every chart is dropped.
pub fn charts_submanifold(m: &Manifold, within: &Region) -> Result<Manifold> {
    let mut kept = Vec::new();
    for c in m.charts() {
        match c.restrict(within) {
            Ok(rc) => kept.push(rc),
            Err(Error::DegenerateRegion { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    if kept.is_empty() {
        return Err(Error::EmptySubmanifold);
    }
    Manifold::new(kept, m.probe_order())
}

fn product_region(a: &Region, b: &Region) -> Region {
    let (da, db) = (a.ambient_dim(), b.ambient_dim());
    let ca = a.contains_fn();
    let cb = b.contains_fn();
    let mut samples = Vec::new();
    for sa in a.samples() {
        for sb in b.samples() {
            let mut p = sa.point.clone();
            p.extend_from_slice(&sb.point);
            samples.push(Sample::new(p, sa.clearance.min(sb.clearance)));
        }
    }
    let bounds = match (a.bounds(), b.bounds()) {
        (Some((la, ha)), Some((lb, hb))) => {
            let mut lo = la.to_vec();
            lo.extend_from_slice(lb);
            let mut hi = ha.to_vec();
            hi.extend_from_slice(hb);
            Some((lo, hi))
        }
        _ => None,
    };
    Region::unchecked(
        da + db,
        move |p: &[f64]| ca(&p[..da]) && cb(&p[da..]),
        samples,
        bounds,
    )
}

/// The product manifold: charts are pairwise products of the factors'
/// charts; compatibility is re-probed on the product.
pub fn prod_charts(m1: &Manifold, m2: &Manifold) -> Result<Manifold> {
    let mut charts = Vec::new();
    for c1 in m1.charts() {
        for c2 in m2.charts() {
            let id = ChartId::new(format!("{}*{}", c1.id(), c2.id()));
            let domain = product_region(c1.domain(), c2.domain());
            let codomain = product_region(c1.codomain(), c2.codomain());
            let fwd = map_pair(c1.fwd(), c2.fwd());
            let inv = map_pair(c1.inv(), c2.inv());
            charts.push(Chart::new(id, domain, codomain, fwd, inv)?);
        }
    }
    Manifold::new(charts, m1.probe_order().min(m2.probe_order()))
}

/// Per-carrier-sample record of the witnessing chart pair for a smoothness
/// check between manifolds.
#[derive(Debug, Clone)]
pub struct SampleWitness {
    pub point: Vec<f64>,
    pub witness: Option<(ChartId, ChartId)>,
}

/// Result of probing a map between manifolds for smoothness.
#[derive(Debug, Clone)]
pub struct DiffReport {
    pub per_sample: Vec<SampleWitness>,
    pub pair_reports: Vec<(ChartId, ChartId, SmoothnessReport)>,
    pub passed: bool,
}

impl DiffReport {
    /// Worst probe residual among chart pairs actually used as witnesses.
    pub fn witness_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for sw in &self.per_sample {
            if let Some((a, b)) = &sw.witness {
                for (pa, pb, rep) in &self.pair_reports {
                    if pa == a && pb == b {
                        worst = worst.max(rep.max_fd_residual);
                    }
                }
            }
        }
        worst
    }

    /// Points that found no witnessing chart pair.
    pub fn failed_points(&self) -> Vec<&[f64]> {
        self.per_sample
            .iter()
            .filter(|sw| sw.witness.is_none())
            .map(|sw| sw.point.as_slice())
            .collect()
    }
}

/// Check smoothness of `f: src → dst` in the chart sense: every carrier
/// sample of `src` needs a chart pair `(c1, c2)` with the sample in
/// `dom c1`, `f(dom c1 samples) ⊆ dom c2`, and `c2 ∘ f ∘ c1⁻¹` passing the
/// smoothness probe on `c1`'s codomain. A missing witness makes the report
/// fail; it is not an error.
pub fn diff_check(
    src: &Manifold,
    dst: &Manifold,
    f: &RealMap,
    cfg: &ProbeConfig,
) -> Result<DiffReport> {
    if f.in_dim() != src.ambient_dim() {
        return Err(Error::dim(src.ambient_dim(), f.in_dim(), "map domain"));
    }
    if f.out_dim() != dst.ambient_dim() {
        return Err(Error::dim(dst.ambient_dim(), f.out_dim(), "map codomain"));
    }

    let n1 = src.charts().len();
    let n2 = dst.charts().len();
    let mut feasible = vec![vec![None as Option<bool>; n2]; n1];
    let mut pair_reports = Vec::new();

    let check_pair = |i: usize,
                      j: usize,
                      feasible: &mut Vec<Vec<Option<bool>>>,
                      pair_reports: &mut Vec<(ChartId, ChartId, SmoothnessReport)>|
     -> Result<bool> {
        if let Some(known) = feasible[i][j] {
            return Ok(known);
        }
        let c1 = &src.charts()[i];
        let c2 = &dst.charts()[j];
        // image condition: f maps the sampled domain of c1 into dom c2
        let mut images_inside = true;
        for s in c1.domain().samples() {
            let y = f.eval(&s.point)?;
            if !y.iter().all(|v| v.is_finite()) || !c2.contains(&y) {
                images_inside = false;
                break;
            }
        }
        let ok = if images_inside {
            let transition = map_compose(c2.fwd(), &map_compose(f, c1.inv())?)?;
            let report = smooth_on_probe(c1.codomain(), &transition, cfg)?;
            let passed = report.passed;
            pair_reports.push((c1.id().clone(), c2.id().clone(), report));
            passed
        } else {
            false
        };
        feasible[i][j] = Some(ok);
        Ok(ok)
    };

    let mut per_sample = Vec::new();
    for point in src.carrier_samples() {
        let mut witness = None;
        'search: for i in 0..n1 {
            if !src.charts()[i].contains(&point) {
                continue;
            }
            for j in 0..n2 {
                if check_pair(i, j, &mut feasible, &mut pair_reports)? {
                    witness = Some((src.charts()[i].id().clone(), dst.charts()[j].id().clone()));
                    break 'search;
                }
            }
        }
        per_sample.push(SampleWitness { point, witness });
    }

    let passed = per_sample.iter().all(|sw| sw.witness.is_some());
    Ok(DiffReport {
        per_sample,
        pair_reports,
        passed,
    })
}

/// Result of a two-sided diffeomorphism check.
#[derive(Debug, Clone)]
pub struct DiffeoReport {
    pub passed: bool,
    pub forward: DiffReport,
    pub backward: DiffReport,
    pub max_inverse_residual: f64,
}

/// Check that `f: m1 → m2` and `f_inv` are smooth in both directions and
/// mutually inverse (within tolerance) at carrier samples.
pub fn diffeomorphism_check(
    m1: &Manifold,
    m2: &Manifold,
    f: &RealMap,
    f_inv: &RealMap,
    cfg: &ProbeConfig,
) -> Result<DiffeoReport> {
    let forward = diff_check(m1, m2, f, cfg)?;
    let backward = diff_check(m2, m1, f_inv, cfg)?;
    let mut max_inverse_residual = 0.0f64;
    for x in m1.carrier_samples() {
        let y = f.eval(&x)?;
        let back = f_inv.eval(&y)?;
        max_inverse_residual = max_inverse_residual.max(max_abs_diff(&back, &x));
    }
    for y in m2.carrier_samples() {
        let x = f_inv.eval(&y)?;
        let fwd = f.eval(&x)?;
        max_inverse_residual = max_inverse_residual.max(max_abs_diff(&fwd, &y));
    }
    let passed =
        forward.passed && backward.passed && max_inverse_residual <= crate::tol::DIFFEO_INVERSE;
    Ok(DiffeoReport {
        passed,
        forward,
        backward,
        max_inverse_residual,
    })
}
