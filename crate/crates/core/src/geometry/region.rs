//! Open-set descriptors with executable membership and probe samples.

use std::sync::Arc;

use crate::error::{Error, Result};

/// Finite-difference step sizes used by the probes; region samples guarantee
/// that stencil points within their clearance radius stay inside the region.
pub const FD_STEP_ORDER1: f64 = 1e-5;
pub const FD_STEP_ORDER2: f64 = 1e-4;

/// A declared interior point of a region together with a clearance radius:
/// the probe stencil within this radius is promised to stay in the region.
#[derive(Debug, Clone)]
pub struct Sample {
    pub point: Vec<f64>,
    pub clearance: f64,
}

impl Sample {
    pub fn new(point: Vec<f64>, clearance: f64) -> Sample {
        Sample { point, clearance }
    }
}

/// An open subset of ℝⁿ: a membership predicate, sampled interior points
/// with clearance radii, and optional axis-aligned bounds.
///
/// Every universally quantified claim in this crate ("smooth on U") is probed
/// at region samples plus seeded jitter inside their clearance balls.
#[derive(Clone)]
pub struct Region {
    ambient_dim: usize,
    contains: Arc<dyn Fn(&[f64]) -> bool + Send + Sync>,
    samples: Vec<Sample>,
    bounds: Option<(Vec<f64>, Vec<f64>)>,
}

impl std::fmt::Debug for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Region")
            .field("ambient_dim", &self.ambient_dim)
            .field("samples", &self.samples.len())
            .field("bounds", &self.bounds)
            .finish()
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl Region {
    /// Build a region, validating every sample against the membership
    /// predicate and the finite-difference stencil containment contract.
    pub fn new<F>(
        ambient_dim: usize,
        contains: F,
        samples: Vec<Sample>,
        bounds: Option<(Vec<f64>, Vec<f64>)>,
    ) -> Result<Region>
    where
        F: Fn(&[f64]) -> bool + Send + Sync + 'static,
    {
        let region = Region {
            ambient_dim,
            contains: Arc::new(contains),
            samples,
            bounds,
        };
        if region.samples.is_empty() {
            return Err(Error::DegenerateRegion {
                context: "region constructed with no samples".into(),
            });
        }
        for (index, s) in region.samples.iter().enumerate() {
            region
                .validate_sample(s)
                .map_err(|reason| Error::BadRegionSample { index, reason })?;
        }
        Ok(region)
    }

    /// Crate-internal constructor for derived probe regions (chart overlaps,
    /// composed domains). Skips validation and tolerates empty sample lists;
    /// consumers must handle emptiness explicitly.
    pub(crate) fn unchecked<F>(
        ambient_dim: usize,
        contains: F,
        samples: Vec<Sample>,
        bounds: Option<(Vec<f64>, Vec<f64>)>,
    ) -> Region
    where
        F: Fn(&[f64]) -> bool + Send + Sync + 'static,
    {
        Region {
            ambient_dim,
            contains: Arc::new(contains),
            samples,
            bounds,
        }
    }

    fn validate_sample(&self, s: &Sample) -> std::result::Result<(), String> {
        if s.point.len() != self.ambient_dim {
            return Err(format!(
                "sample dimension {} does not match ambient dimension {}",
                s.point.len(),
                self.ambient_dim
            ));
        }
        if !(s.clearance > 0.0) {
            return Err("clearance radius must be positive".into());
        }
        if !self.contains(&s.point) {
            return Err("sample point fails the membership predicate".into());
        }
        // Probe stencil points lying within the clearance ball must be inside.
        let mut probe = s.point.clone();
        for &h in &[FD_STEP_ORDER1, FD_STEP_ORDER2] {
            for i in 0..self.ambient_dim {
                if h <= s.clearance {
                    for sign in [-1.0, 1.0] {
                        probe.copy_from_slice(&s.point);
                        probe[i] += sign * h;
                        if !self.contains(&probe) {
                            return Err(format!(
                                "stencil point at axis {i} step {h:+e} escapes the region"
                            ));
                        }
                    }
                }
                // cross-stencil corners used by second-order differences
                if h * std::f64::consts::SQRT_2 <= s.clearance {
                    for j in (i + 1)..self.ambient_dim {
                        for (si, sj) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                            probe.copy_from_slice(&s.point);
                            probe[i] += si * h;
                            probe[j] += sj * h;
                            if !self.contains(&probe) {
                                return Err(format!(
                                    "cross-stencil point at axes ({i},{j}) escapes the region"
                                ));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Open axis-aligned box `lo < x < hi`.
    pub fn boxed(lo: Vec<f64>, hi: Vec<f64>, samples: Vec<Sample>) -> Result<Region> {
        assert_eq!(lo.len(), hi.len());
        let dim = lo.len();
        let (l, h) = (lo.clone(), hi.clone());
        Region::new(
            dim,
            move |p: &[f64]| {
                p.iter()
                    .zip(&l)
                    .zip(&h)
                    .all(|((x, lo), hi)| lo < x && x < hi)
            },
            samples,
            Some((lo, hi)),
        )
    }

    /// All of ℝⁿ, with `bounds` indicating a box that sampling should favor.
    pub fn entire(
        dim: usize,
        bounds: (Vec<f64>, Vec<f64>),
        samples: Vec<Sample>,
    ) -> Result<Region> {
        Region::new(dim, |_: &[f64]| true, samples, Some(bounds))
    }

    /// Open Euclidean ball.
    pub fn ball(center: Vec<f64>, radius: f64, samples: Vec<Sample>) -> Result<Region> {
        let dim = center.len();
        let c = center.clone();
        let bounds = (
            center.iter().map(|x| x - radius).collect(),
            center.iter().map(|x| x + radius).collect(),
        );
        Region::new(
            dim,
            move |p: &[f64]| {
                let d2: f64 = p.iter().zip(&c).map(|(x, c)| (x - c) * (x - c)).sum();
                d2 < radius * radius
            },
            samples,
            Some(bounds),
        )
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.ambient_dim && (self.contains)(p)
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn bounds(&self) -> Option<(&[f64], &[f64])> {
        self.bounds
            .as_ref()
            .map(|(l, h)| (l.as_slice(), h.as_slice()))
    }

    /// Intersect with another region over the same ambient space. Samples are
    /// kept where the combined membership holds, with clearance shrunk (up to
    /// three halvings) until the stencil contract validates; samples that
    /// never validate are dropped. Errors if no sample survives.
    pub fn intersect(&self, other: &Region) -> Result<Region> {
        if self.ambient_dim != other.ambient_dim {
            return Err(Error::dim(
                self.ambient_dim,
                other.ambient_dim,
                "region intersection",
            ));
        }
        let a = Arc::clone(&self.contains);
        let b = Arc::clone(&other.contains);
        let bounds = match (&self.bounds, &other.bounds) {
            (Some((l1, h1)), Some((l2, h2))) => Some((
                l1.iter().zip(l2).map(|(a, b)| a.max(*b)).collect(),
                h1.iter().zip(h2).map(|(a, b)| a.min(*b)).collect(),
            )),
            (Some(x), None) | (None, Some(x)) => Some(x.clone()),
            (None, None) => None,
        };
        let combined = Region {
            ambient_dim: self.ambient_dim,
            contains: Arc::new(move |p: &[f64]| a(p) && b(p)),
            samples: Vec::new(),
            bounds,
        };
        let mut kept = Vec::new();
        for s in self.samples.iter().chain(other.samples.iter()) {
            if !combined.contains(&s.point) {
                continue;
            }
            let mut r = s.clearance;
            for _ in 0..4 {
                let candidate = Sample::new(s.point.clone(), r);
                if combined.validate_sample(&candidate).is_ok() {
                    kept.push(candidate);
                    break;
                }
                r /= 2.0;
            }
        }
        // drop near-duplicate sample points collected from both operands
        let mut dedup: Vec<Sample> = Vec::new();
        for s in kept {
            let close = dedup.iter().any(|t| {
                let d: f64 = t
                    .point
                    .iter()
                    .zip(&s.point)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                d.sqrt() < 1e-12 * (1.0 + norm(&s.point))
            });
            if !close {
                dedup.push(s);
            }
        }
        if dedup.is_empty() {
            return Err(Error::DegenerateRegion {
                context: "intersection has no surviving samples".into(),
            });
        }
        Ok(Region {
            samples: dedup,
            ..combined
        })
    }

    pub(crate) fn contains_fn(&self) -> Arc<dyn Fn(&[f64]) -> bool + Send + Sync> {
        Arc::clone(&self.contains)
    }
}
