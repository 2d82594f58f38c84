//! Finite-difference oracle and the numerical smoothness probe.
//!
//! Infinite differentiability is not decidable numerically; the engine's
//! surrogate is: jets up to a configured order evaluate to finite values and
//! the first- and second-order jet entries agree with central finite
//! differences at every probe point. Probe points are the region's declared
//! samples plus seeded jitter inside their clearance balls, so runs are
//! reproducible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::map::RealMap;
use crate::error::{Error, Result};
use crate::geometry::region::{Region, FD_STEP_ORDER1, FD_STEP_ORDER2};

/// Probe parameters. `tol` is applied relative to `1 + |estimate|`.
#[derive(Debug, Clone)]
pub struct ProbeConfig {
    pub order: usize,
    pub n_samples: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            order: 3,
            n_samples: 24,
            tol: 1e-5,
            seed: 0,
        }
    }
}

impl ProbeConfig {
    pub fn with_order(mut self, order: usize) -> Self {
        self.order = order;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_samples(mut self, n: usize) -> Self {
        self.n_samples = n;
        self
    }
}

/// One probe violation: where, at which derivative order, and how large.
#[derive(Debug, Clone)]
pub struct ProbeFailure {
    pub point: Vec<f64>,
    pub order: usize,
    pub residual: f64,
}

/// Aggregate result of a smoothness probe.
#[derive(Debug, Clone)]
pub struct SmoothnessReport {
    pub order_probed: usize,
    pub samples_checked: usize,
    pub max_fd_residual: f64,
    pub passed: bool,
    pub failures: Vec<ProbeFailure>,
    pub seed: u64,
}

impl SmoothnessReport {
    fn from_parts(
        order_probed: usize,
        samples_checked: usize,
        max_fd_residual: f64,
        failures: Vec<ProbeFailure>,
        seed: u64,
    ) -> SmoothnessReport {
        SmoothnessReport {
            order_probed,
            samples_checked,
            max_fd_residual,
            passed: failures.is_empty(),
            failures,
            seed,
        }
    }

    /// A vacuous pass (no points to check, e.g. disjoint chart overlap).
    pub fn vacuous(order: usize, seed: u64) -> SmoothnessReport {
        SmoothnessReport::from_parts(order, 0, 0.0, Vec::new(), seed)
    }

    /// Merge two reports (e.g. the two directions of a compatibility check).
    pub fn merged(self, other: SmoothnessReport) -> SmoothnessReport {
        let mut failures = self.failures;
        failures.extend(other.failures);
        SmoothnessReport::from_parts(
            self.order_probed.max(other.order_probed),
            self.samples_checked + other.samples_checked,
            self.max_fd_residual.max(other.max_fd_residual),
            failures,
            self.seed,
        )
    }
}

/// Central finite difference of `f` at `p` along `direction` with step `h`,
/// one estimate per output coordinate.
pub fn fd_derivative(f: &RealMap, p: &[f64], direction: &[f64], h: f64) -> Result<Vec<f64>> {
    if p.len() != f.in_dim() {
        return Err(Error::dim(f.in_dim(), p.len(), "fd point"));
    }
    if direction.len() != f.in_dim() {
        return Err(Error::dim(f.in_dim(), direction.len(), "fd direction"));
    }
    let plus: Vec<f64> = p.iter().zip(direction).map(|(x, d)| x + h * d).collect();
    let minus: Vec<f64> = p.iter().zip(direction).map(|(x, d)| x - h * d).collect();
    let fp = f.eval(&plus)?;
    let fm = f.eval(&minus)?;
    Ok(fp
        .iter()
        .zip(&fm)
        .map(|(a, b)| (a - b) / (2.0 * h))
        .collect())
}

/// Central second difference `∂²f/∂xᵢ∂xⱼ` at `p` with step `h`.
pub fn fd_second(f: &RealMap, p: &[f64], i: usize, j: usize, h: f64) -> Result<Vec<f64>> {
    let shifted = |di: f64, dj: f64| -> Vec<f64> {
        let mut q = p.to_vec();
        q[i] += di * h;
        q[j] += dj * h;
        q
    };
    if i == j {
        let fp = f.eval(&shifted(1.0, 0.0))?;
        let f0 = f.eval(p)?;
        let fm = f.eval(&shifted(-1.0, 0.0))?;
        Ok(fp
            .iter()
            .zip(&f0)
            .zip(&fm)
            .map(|((a, b), c)| (a - 2.0 * b + c) / (h * h))
            .collect())
    } else {
        let fpp = f.eval(&shifted(1.0, 1.0))?;
        let fpm = f.eval(&shifted(1.0, -1.0))?;
        let fmp = f.eval(&shifted(-1.0, 1.0))?;
        let fmm = f.eval(&shifted(-1.0, -1.0))?;
        Ok(fpp
            .iter()
            .zip(&fpm)
            .zip(fmp.iter().zip(&fmm))
            .map(|((a, b), (c, d))| (a - b - c + d) / (4.0 * h * h))
            .collect())
    }
}

/// Deterministic probe points: every declared sample, then seeded jitter
/// inside clearance balls until `n_samples` points are gathered (jittered
/// candidates that escape the region are skipped, never replaced).
pub fn probe_points(region: &Region, n_samples: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut points: Vec<Vec<f64>> = region.samples().iter().map(|s| s.point.clone()).collect();
    if points.len() >= n_samples || region.samples().is_empty() {
        return points;
    }
    let dim = region.ambient_dim();
    let scale = 1.0 / (2.0 * (dim as f64).sqrt());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let extra = n_samples - points.len();
    for k in 0..extra {
        let s = &region.samples()[k % region.samples().len()];
        let candidate: Vec<f64> = s
            .point
            .iter()
            .map(|&x| x + s.clearance * scale * rng.gen_range(-1.0..1.0))
            .collect();
        if region.contains(&candidate) {
            points.push(candidate);
        }
    }
    points
}

/// Probe `f` for smoothness of order `cfg.order` on `region`.
///
/// At every probe point the jets up to the requested order must be finite,
/// and first/second-order jet entries must match central finite differences
/// within `tol · (1 + |estimate|)`. An empty probe set is an error, never a
/// silent pass.
pub fn smooth_on_probe(
    region: &Region,
    f: &RealMap,
    cfg: &ProbeConfig,
) -> Result<SmoothnessReport> {
    if region.ambient_dim() != f.in_dim() {
        return Err(Error::dim(f.in_dim(), region.ambient_dim(), "probe region"));
    }
    let points = probe_points(region, cfg.n_samples, cfg.seed);
    if points.is_empty() {
        return Err(Error::DegenerateRegion {
            context: "smoothness probe has no sample points".into(),
        });
    }
    let dim = f.in_dim();
    let mut failures = Vec::new();
    let mut max_residual = 0.0f64;

    for point in &points {
        let jets = f.jet_eval(point, cfg.order)?;
        let mut point_worst = 0.0f64;
        let mut finite = true;
        for jet in &jets {
            if !jet.is_finite() {
                finite = false;
            }
        }
        if !finite {
            failures.push(ProbeFailure {
                point: point.clone(),
                order: cfg.order,
                residual: f64::INFINITY,
            });
            max_residual = f64::INFINITY;
            continue;
        }

        if cfg.order >= 1 {
            for i in 0..dim {
                let mut dir = vec![0.0; dim];
                dir[i] = 1.0;
                let fd = fd_derivative(f, point, &dir, FD_STEP_ORDER1)?;
                for (out, jet) in jets.iter().enumerate() {
                    let est = fd[out];
                    let res = (jet.gradient()[i] - est).abs() / (1.0 + est.abs());
                    point_worst = point_worst.max(res);
                    if res > cfg.tol {
                        failures.push(ProbeFailure {
                            point: point.clone(),
                            order: 1,
                            residual: res,
                        });
                    }
                }
            }
        }
        if cfg.order >= 2 {
            for i in 0..dim {
                for j in i..dim {
                    let fd = fd_second(f, point, i, j, FD_STEP_ORDER2)?;
                    for (out, jet) in jets.iter().enumerate() {
                        let est = fd[out];
                        let ad = jet.partial(&[i, j])?;
                        let res = (ad - est).abs() / (1.0 + est.abs());
                        point_worst = point_worst.max(res);
                        if res > cfg.tol {
                            failures.push(ProbeFailure {
                                point: point.clone(),
                                order: 2,
                                residual: res,
                            });
                        }
                    }
                }
            }
        }
        max_residual = max_residual.max(point_worst);
    }

    Ok(SmoothnessReport::from_parts(
        cfg.order,
        points.len(),
        max_residual,
        failures,
        cfg.seed,
    ))
}
