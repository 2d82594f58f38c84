//! Charts: local homeomorphisms from ambient space into ℝᵉ.

use crate::calculus::RealMap;
use crate::error::{Error, Result};
use crate::geometry::region::{Region, Sample};
use crate::tol;

/// Stable chart identifier, used for tangent-vector bookkeeping and reports.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChartId(pub String);

impl ChartId {
    pub fn new(s: impl Into<String>) -> ChartId {
        ChartId(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl std::fmt::Display for ChartId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// A chart: an open domain in ambient ℝᵃ, an open codomain in ℝᵉ, and a
/// mutually inverse pair of maps between them. Construction verifies the
/// round trips and membership at every declared sample.
#[derive(Debug, Clone)]
pub struct Chart {
    id: ChartId,
    domain: Region,
    codomain: Region,
    fwd: RealMap,
    inv: RealMap,
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

impl Chart {
    pub fn new(
        id: ChartId,
        domain: Region,
        codomain: Region,
        fwd: RealMap,
        inv: RealMap,
    ) -> Result<Chart> {
        let bad = |reason: String| Error::BadChart {
            chart: id.0.clone(),
            reason,
        };
        if fwd.in_dim() != domain.ambient_dim() || inv.out_dim() != domain.ambient_dim() {
            return Err(bad(
                "forward/inverse maps do not match the domain dimension".into(),
            ));
        }
        if fwd.out_dim() != codomain.ambient_dim() || inv.in_dim() != codomain.ambient_dim() {
            return Err(bad(
                "forward/inverse maps do not match the codomain dimension".into(),
            ));
        }
        let chart = Chart {
            id,
            domain,
            codomain,
            fwd,
            inv,
        };
        for s in chart.domain.samples() {
            let y = chart.fwd.eval(&s.point)?;
            if !chart.codomain.contains(&y) {
                return Err(Error::BadChart {
                    chart: chart.id.0.clone(),
                    reason: format!(
                        "forward image of domain sample {:?} leaves the codomain",
                        s.point
                    ),
                });
            }
            let back = chart.inv.eval(&y)?;
            let res = max_abs_diff(&back, &s.point);
            if !(res <= tol::CHART_ROUNDTRIP) {
                return Err(Error::BadChart {
                    chart: chart.id.0.clone(),
                    reason: format!(
                        "inv∘fwd deviates by {res:.3e} at domain sample {:?}",
                        s.point
                    ),
                });
            }
        }
        for s in chart.codomain.samples() {
            let x = chart.inv.eval(&s.point)?;
            if !chart.domain.contains(&x) {
                return Err(Error::BadChart {
                    chart: chart.id.0.clone(),
                    reason: format!(
                        "inverse image of codomain sample {:?} leaves the domain",
                        s.point
                    ),
                });
            }
            let fwd = chart.fwd.eval(&x)?;
            let res = max_abs_diff(&fwd, &s.point);
            if !(res <= tol::CHART_ROUNDTRIP) {
                return Err(Error::BadChart {
                    chart: chart.id.0.clone(),
                    reason: format!(
                        "fwd∘inv deviates by {res:.3e} at codomain sample {:?}",
                        s.point
                    ),
                });
            }
        }
        Ok(chart)
    }

    /// Build a chart whose codomain is derived as the image of the domain:
    /// membership is `inv(y) ∈ domain` plus the forward round trip, and the
    /// codomain samples are the forward images of the domain samples with
    /// Jacobian-shrunk clearances.
    pub fn from_forward(id: ChartId, domain: Region, fwd: RealMap, inv: RealMap) -> Result<Chart> {
        let mut samples = Vec::with_capacity(domain.samples().len());
        for s in domain.samples() {
            let y = fwd.eval(&s.point)?;
            let jac = fwd.jacobian(&s.point)?;
            let row_norm = jac
                .iter()
                .map(|row| row.iter().map(|x| x.abs()).sum::<f64>())
                .fold(0.0, f64::max);
            let clearance = s.clearance / row_norm.max(1.0) / 2.0;
            samples.push(Sample::new(y, clearance));
        }
        let dom_contains = domain.contains_fn();
        let inv_clone = inv.clone();
        let fwd_clone = fwd.clone();
        let e = fwd.out_dim();
        let codomain = Region::unchecked(
            e,
            move |y: &[f64]| {
                let x = match inv_clone.eval(y) {
                    Ok(x) => x,
                    Err(_) => return false,
                };
                if !x.iter().all(|v| v.is_finite()) || !dom_contains(&x) {
                    return false;
                }
                match fwd_clone.eval(&x) {
                    Ok(back) => max_abs_diff(&back, y) <= tol::CHART_ROUNDTRIP,
                    Err(_) => false,
                }
            },
            samples,
            None,
        );
        Chart::new(id, domain, codomain, fwd, inv)
    }

    /// Identity chart over `region`.
    pub fn identity(id: ChartId, region: Region) -> Result<Chart> {
        let n = region.ambient_dim();
        Chart::new(
            id,
            region.clone(),
            region,
            RealMap::identity(n),
            RealMap::identity(n),
        )
    }

    /// Restrict the chart's domain to `domain ∩ within`, rebuilding the
    /// codomain as the image of the restriction. Errors with
    /// `DegenerateRegion` when no domain sample survives.
    pub fn restrict(&self, within: &Region) -> Result<Chart> {
        let restricted = self.domain.intersect(within)?;
        Chart::from_forward(
            self.id.clone(),
            restricted,
            self.fwd.clone(),
            self.inv.clone(),
        )
    }

    pub fn id(&self) -> &ChartId {
        &self.id
    }

    pub fn domain(&self) -> &Region {
        &self.domain
    }

    pub fn codomain(&self) -> &Region {
        &self.codomain
    }

    pub fn fwd(&self) -> &RealMap {
        &self.fwd
    }

    pub fn inv(&self) -> &RealMap {
        &self.inv
    }

    pub fn ambient_dim(&self) -> usize {
        self.domain.ambient_dim()
    }

    pub fn chart_dim(&self) -> usize {
        self.codomain.ambient_dim()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        self.domain.contains(p)
    }

    /// Apply the chart to a point of its domain.
    pub fn apply(&self, p: &[f64]) -> Result<Vec<f64>> {
        if !self.contains(p) {
            return Err(Error::OutOfDomain {
                chart: self.id.0.clone(),
            });
        }
        self.fwd.eval(p)
    }

    /// Apply the inverse to a point of the codomain.
    pub fn apply_inv(&self, y: &[f64]) -> Result<Vec<f64>> {
        if !self.codomain.contains(y) {
            return Err(Error::OutOfDomain {
                chart: self.id.0.clone(),
            });
        }
        self.inv.eval(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interval(lo: f64, hi: f64, pts: &[f64], r: f64) -> Region {
        Region::boxed(
            vec![lo],
            vec![hi],
            pts.iter().map(|&p| Sample::new(vec![p], r)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn identity_chart_roundtrips() {
        let c = Chart::identity(ChartId::new("id"), interval(-1.0, 1.0, &[0.0, 0.5], 0.2)).unwrap();
        assert_eq!(c.apply(&[0.25]).unwrap(), vec![0.25]);
        assert!(c.apply(&[3.0]).is_err());
    }

    #[test]
    fn scaling_chart_from_forward() {
        let dom = interval(-1.0, 1.0, &[0.0, 0.5, -0.5], 0.2);
        let fwd = RealMap::scalar(1, |xs| xs[0].scale(2.0));
        let inv = RealMap::scalar(1, |xs| xs[0].scale(0.5));
        let c = Chart::from_forward(ChartId::new("x2"), dom, fwd, inv).unwrap();
        assert!(c.codomain().contains(&[1.5]));
        assert!(!c.codomain().contains(&[2.5]));
        assert_eq!(c.apply(&[0.5]).unwrap(), vec![1.0]);
    }

    #[test]
    fn broken_inverse_is_rejected() {
        let dom = interval(-1.0, 1.0, &[0.0, 0.5], 0.2);
        let fwd = RealMap::scalar(1, |xs| xs[0].scale(2.0));
        let wrong_inv = RealMap::scalar(1, |xs| xs[0].scale(2.0));
        let err = Chart::from_forward(ChartId::new("bad"), dom, fwd, wrong_inv);
        assert!(matches!(err, Err(Error::BadChart { .. })));
    }

    #[test]
    fn restriction_narrows_domain() {
        let c = Chart::identity(
            ChartId::new("id"),
            interval(-1.0, 1.0, &[0.0, 0.5, -0.5], 0.2),
        )
        .unwrap();
        let u = interval(-0.3, 0.3, &[0.0], 0.1);
        let r = c.restrict(&u).unwrap();
        assert!(r.contains(&[0.1]));
        assert!(!r.contains(&[0.5]));
        // the 0.0 samples of both operands collapse to one
        assert_eq!(r.domain().samples().len(), 1);
    }
}
