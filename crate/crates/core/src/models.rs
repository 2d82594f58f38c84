//! Concrete instances: Euclidean manifolds and groups, the general linear
//! group GL(n, ℝ) with determinant/adjugate machinery, and fixture charts,
//! diffeomorphisms, and function batteries used by the verification suites.
//!
//! Matrices are flattened row-major into ℝ^{n²}, so GL(n) is literally an
//! open region of an ambient Euclidean space charted by the identity.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::calculus::{ProbeConfig, RealMap, Taylor};
use crate::error::{Error, Result};
use crate::geometry::{Chart, ChartId, Manifold, Region, Sample};
use crate::lie::LieGroup;
use crate::tol;

/// A dense square matrix stored row-major, the GL ambient representation.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl SquareMatrix {
    pub fn new(n: usize, entries: Vec<f64>) -> Result<SquareMatrix> {
        if entries.len() != n * n {
            return Err(Error::dim(n * n, entries.len(), "matrix entries"));
        }
        Ok(SquareMatrix { n, entries })
    }

    pub fn identity(n: usize) -> SquareMatrix {
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1.0;
        }
        SquareMatrix { n, entries }
    }

    pub fn from_flat(n: usize, flat: &[f64]) -> Result<SquareMatrix> {
        SquareMatrix::new(n, flat.to_vec())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.entries.clone()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.entries[i * self.n + j] = v;
    }

    pub fn mul(&self, other: &SquareMatrix) -> SquareMatrix {
        let n = self.n;
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += self.get(i, k) * other.get(k, j);
                }
                entries[i * n + j] = acc;
            }
        }
        SquareMatrix { n, entries }
    }

    pub fn sub(&self, other: &SquareMatrix) -> SquareMatrix {
        SquareMatrix {
            n: self.n,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn commutator(&self, other: &SquareMatrix) -> SquareMatrix {
        self.mul(other).sub(&other.mul(self))
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn det(&self) -> f64 {
        det_value(self.n, &self.entries)
    }
}

fn det_value(n: usize, flat: &[f64]) -> f64 {
    if n <= 4 {
        return det_cofactor(n, flat);
    }
    // LU with partial pivoting for larger matrices
    let mut a = flat.to_vec();
    let mut det = 1.0;
    for col in 0..n {
        let (pivot_row, pivot) = (col..n)
            .map(|r| (r, a[r * n + col].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .expect("non-empty column");
        if pivot == 0.0 {
            return 0.0;
        }
        if pivot_row != col {
            for j in 0..n {
                a.swap(col * n + j, pivot_row * n + j);
            }
            det = -det;
        }
        det *= a[col * n + col];
        for r in (col + 1)..n {
            let factor = a[r * n + col] / a[col * n + col];
            for j in col..n {
                a[r * n + j] -= factor * a[col * n + j];
            }
        }
    }
    det
}

fn det_cofactor(n: usize, flat: &[f64]) -> f64 {
    match n {
        0 => 1.0,
        1 => flat[0],
        2 => flat[0] * flat[3] - flat[1] * flat[2],
        _ => {
            let mut acc = 0.0;
            for j in 0..n {
                let minor = minor_of(n, flat, 0, j);
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                acc += sign * flat[j] * det_cofactor(n - 1, &minor);
            }
            acc
        }
    }
}

fn minor_of<T: Clone>(n: usize, flat: &[T], row: usize, col: usize) -> Vec<T> {
    let mut out = Vec::with_capacity((n - 1) * (n - 1));
    for i in 0..n {
        if i == row {
            continue;
        }
        for j in 0..n {
            if j == col {
                continue;
            }
            out.push(flat[i * n + j].clone());
        }
    }
    out
}

fn det_taylor(n: usize, flat: &[Taylor]) -> Taylor {
    match n {
        0 => unreachable!("0x0 determinants are handled by the callers"),
        1 => flat[0].clone(),
        2 => flat[0].mul(&flat[3]).sub(&flat[1].mul(&flat[2])),
        _ => {
            let mut acc: Option<Taylor> = None;
            for j in 0..n {
                let minor = minor_of(n, flat, 0, j);
                let mut term = flat[j].mul(&det_taylor(n - 1, &minor));
                if j % 2 == 1 {
                    term = term.neg();
                }
                acc = Some(match acc {
                    None => term,
                    Some(prev) => prev.add(&term),
                });
            }
            acc.expect("positive dimension")
        }
    }
}

fn adjugate_taylor(n: usize, flat: &[Taylor]) -> Vec<Taylor> {
    if n == 1 {
        return vec![flat[0].lift(1.0)];
    }
    // adj(A)[j][i] = (-1)^{i+j} det(minor_{ij})
    let mut out = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let minor = minor_of(n, flat, i, j);
            let mut c = det_taylor(n - 1, &minor);
            if (i + j) % 2 == 1 {
                c = c.neg();
            }
            out.push(c);
        }
    }
    out
}

/// The determinant as a jet-evaluable map on ℝ^{n²}. Cofactor expansion
/// keeps it polynomial (hence jet-exact) for `n ≤ 4`; larger sizes fall
/// back to an LU evaluation that supports values only (jet requests error).
pub fn det(n: usize) -> Result<RealMap> {
    if n == 0 {
        return Err(Error::Invalid("determinant needs n >= 1".into()));
    }
    if n <= 4 {
        Ok(RealMap::scalar(n * n, move |xs| det_taylor(n, xs)))
    } else {
        Ok(RealMap::from_jet_fn(n * n, 1, 0, move |p, _order| {
            let ctx = crate::calculus::Ctx::get(n * n, 0);
            Ok(vec![Taylor::constant(ctx, det_value(n, p))])
        }))
    }
}

/// The adjugate (transpose of the cofactor matrix).
pub fn adjugate(a: &SquareMatrix) -> SquareMatrix {
    let n = a.n;
    let mut entries = vec![0.0; n * n];
    for j in 0..n {
        for i in 0..n {
            let minor = minor_of(n, &a.entries, i, j);
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            entries[j * n + i] = sign * det_cofactor(n - 1, &minor);
        }
    }
    SquareMatrix { n, entries }
}

/// Matrix inverse by `adjugate / det`; near-singular matrices are refused.
pub fn matrix_inv(a: &SquareMatrix) -> Result<SquareMatrix> {
    let d = a.det();
    if d.abs() <= tol::SINGULAR_DET {
        return Err(Error::SingularMatrix { det: d });
    }
    let adj = adjugate(a);
    Ok(SquareMatrix {
        n: a.n,
        entries: adj.entries.iter().map(|x| x / d).collect(),
    })
}

fn euclid_samples(n: usize) -> Vec<Sample> {
    let mut samples = vec![Sample::new(vec![0.0; n], 0.4)];
    let mut alt = vec![0.0; n];
    for (i, slot) in alt.iter_mut().enumerate() {
        *slot = if i % 2 == 0 { 0.8 } else { -0.6 };
    }
    samples.push(Sample::new(alt, 0.4));
    let mut third = vec![0.0; n];
    third[0] = -0.9;
    if n > 1 {
        third[n - 1] = 0.5;
    }
    samples.push(Sample::new(third, 0.4));
    samples
}

/// The Euclidean manifold ℝⁿ: a single identity chart whose membership is
/// everywhere true, sampled in a box around the origin.
pub fn euclidean_manifold(n: usize) -> Result<Manifold> {
    if n == 0 {
        return Err(Error::Invalid("euclidean manifold needs n >= 1".into()));
    }
    let region = Region::entire(n, (vec![-3.0; n], vec![3.0; n]), euclid_samples(n))?;
    let chart = Chart::identity(ChartId::new("eucl"), region)?;
    Manifold::new(vec![chart], 3)
}

/// The additive Lie group (ℝⁿ, +, 0, negation).
pub fn euclidean_lie_group(n: usize, cfg: &ProbeConfig) -> Result<LieGroup> {
    let region = Region::entire(n, (vec![-3.0; n], vec![3.0; n]), euclid_samples(n))?;
    let chart = Chart::identity(ChartId::new("eucl"), region)?;
    let m = Arc::new(Manifold::with_config(vec![chart], cfg)?);
    let times = RealMap::new(2 * n, n, move |xs| {
        (0..n).map(|i| xs[i].add(&xs[n + i])).collect()
    });
    let inverse = RealMap::new(n, n, move |xs| xs.iter().map(|x| x.neg()).collect());
    LieGroup::new(m, times, vec![0.0; n], inverse, cfg)
}

fn gl_samples(n: usize) -> Vec<Sample> {
    let clearance = 0.02;
    let mut samples = vec![Sample::new(SquareMatrix::identity(n).flatten(), clearance)];
    match n {
        1 => {
            for v in [0.7, 1.5, -0.7, -1.5] {
                samples.push(Sample::new(vec![v], clearance));
            }
        }
        _ => {
            let mut diag = SquareMatrix::identity(n);
            for i in 0..n {
                diag.set(i, i, if i % 2 == 0 { 1.2 } else { 0.8 });
            }
            samples.push(Sample::new(diag.flatten(), clearance));

            let mut skew = SquareMatrix::identity(n);
            skew.set(0, 1, 0.3);
            skew.set(1, 0, -0.2);
            samples.push(Sample::new(skew.flatten(), clearance));

            let mut mixed = SquareMatrix::identity(n);
            mixed.set(0, 0, 0.9);
            mixed.set(0, 1, 0.4);
            mixed.set(1, 0, 0.5);
            mixed.set(1, 1, 1.1);
            samples.push(Sample::new(mixed.flatten(), clearance));

            if n == 2 {
                // a negative-determinant representative
                samples.push(Sample::new(vec![0.0, 1.0, 1.0, 0.0], clearance));
            }
        }
    }
    samples
}

/// The open region `{A : |det A| > δ}` in ℝ^{n²}, sampled at the identity
/// and fixed well-conditioned perturbations.
pub fn gl_region(n: usize) -> Result<Region> {
    let dim = n * n;
    Region::new(
        dim,
        move |p: &[f64]| det_value(n, p).abs() > tol::GL_REGION_MARGIN,
        gl_samples(n),
        Some((vec![-2.0; dim], vec![2.0; dim])),
    )
}

/// The manifold underlying GL(n): the identity chart restricted to the
/// invertible region.
pub fn gl_manifold(n: usize) -> Result<Manifold> {
    let chart = Chart::identity(ChartId::new("gl"), gl_region(n)?)?;
    Manifold::new(vec![chart], 3)
}

/// Matrix multiplication as a jet-evaluable map ℝ^{2n²} → ℝ^{n²}.
pub fn matrix_product_map(n: usize) -> RealMap {
    RealMap::new(2 * n * n, n * n, move |xs| {
        let (a, b) = xs.split_at(n * n);
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut acc: Option<Taylor> = None;
                for k in 0..n {
                    let term = a[i * n + k].mul(&b[k * n + j]);
                    acc = Some(match acc {
                        None => term,
                        Some(prev) => prev.add(&term),
                    });
                }
                out.push(acc.expect("n >= 1"));
            }
        }
        out
    })
}

/// Matrix inversion `A ↦ adjugate(A) / det(A)` as a jet-evaluable map;
/// smooth wherever the determinant does not vanish.
pub fn matrix_inverse_map(n: usize) -> RealMap {
    RealMap::new(n * n, n * n, move |xs| {
        let d = det_taylor(n, xs);
        adjugate_taylor(n, xs)
            .into_iter()
            .map(|c| c.div(&d))
            .collect()
    })
}

/// The general linear group GL(n, ℝ) for `n ∈ {1, 2, 3}`: identity chart on
/// the invertible region, matrix product, identity matrix unit, and
/// adjugate-over-determinant inverse.
pub fn gl_group(n: usize, cfg: &ProbeConfig) -> Result<LieGroup> {
    if !(1..=3).contains(&n) {
        return Err(Error::Invalid(format!(
            "gl_group supports n in {{1, 2, 3}}, got {n}"
        )));
    }
    let chart = Chart::identity(ChartId::new("gl"), gl_region(n)?)?;
    let m = Arc::new(Manifold::with_config(vec![chart], cfg)?);
    LieGroup::new(
        m,
        matrix_product_map(n),
        SquareMatrix::identity(n).flatten(),
        matrix_inverse_map(n),
        cfg,
    )
}

/// The open unit disk in ℝ² with an identity chart.
pub fn disk_manifold() -> Result<Manifold> {
    let region = Region::ball(
        vec![0.0, 0.0],
        1.0,
        vec![
            Sample::new(vec![0.0, 0.0], 0.3),
            Sample::new(vec![0.5, 0.0], 0.2),
            Sample::new(vec![0.0, -0.4], 0.2),
            Sample::new(vec![-0.3, 0.3], 0.15),
        ],
    )?;
    let chart = Chart::identity(ChartId::new("disk"), region)?;
    Manifold::new(vec![chart], 3)
}

fn rotation_map(theta: f64) -> RealMap {
    RealMap::affine(
        vec![
            vec![theta.cos(), -theta.sin()],
            vec![theta.sin(), theta.cos()],
        ],
        vec![0.0, 0.0],
    )
}

/// Rotations of the plane by multiples of 2π/count with their exact
/// inverses; they close under composition and preserve the unit disk.
pub fn disk_rotations(count: usize) -> Vec<(RealMap, RealMap)> {
    (0..count)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / count as f64;
            (rotation_map(theta), rotation_map(-theta))
        })
        .collect()
}

/// Affine diffeomorphism fixtures of ℝⁿ: maps `x ↦ Ax + b` with invertible
/// `A` paired with their exact inverses. The identity is always included.
pub fn test_diffeos(n: usize) -> Vec<(RealMap, RealMap)> {
    let mut list = vec![(RealMap::identity(n), RealMap::identity(n))];
    // uniform scaling
    let mut s = vec![vec![0.0; n]; n];
    let mut s_inv = vec![vec![0.0; n]; n];
    for i in 0..n {
        s[i][i] = 2.0;
        s_inv[i][i] = 0.5;
    }
    list.push((
        RealMap::affine(s, vec![0.0; n]),
        RealMap::affine(s_inv, vec![0.0; n]),
    ));
    // translation
    let mut b = vec![0.0; n];
    b[0] = 0.3;
    let eye = |_: ()| -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            m[i][i] = 1.0;
        }
        m
    };
    list.push((
        RealMap::affine(eye(()), b.clone()),
        RealMap::affine(eye(()), b.iter().map(|x| -x).collect()),
    ));
    if n >= 2 {
        let theta = std::f64::consts::FRAC_PI_3;
        let mut r = eye(());
        let mut r_inv = eye(());
        r[0][0] = theta.cos();
        r[0][1] = -theta.sin();
        r[1][0] = theta.sin();
        r[1][1] = theta.cos();
        r_inv[0][0] = theta.cos();
        r_inv[0][1] = theta.sin();
        r_inv[1][0] = -theta.sin();
        r_inv[1][1] = theta.cos();
        list.push((
            RealMap::affine(r, vec![0.0; n]),
            RealMap::affine(r_inv, vec![0.0; n]),
        ));
        // shear with unit determinant
        let mut sh = eye(());
        let mut sh_inv = eye(());
        sh[0][1] = 0.5;
        sh_inv[0][1] = -0.5;
        list.push((
            RealMap::affine(sh, vec![0.0; n]),
            RealMap::affine(sh_inv, vec![0.0; n]),
        ));
    } else {
        list.push((
            RealMap::scalar(1, |xs| xs[0].neg()),
            RealMap::scalar(1, |xs| xs[0].neg()),
        ));
    }
    list
}

fn interval_samples() -> Vec<Sample> {
    vec![
        Sample::new(vec![0.0], 0.2),
        Sample::new(vec![0.7], 0.2),
        Sample::new(vec![-0.7], 0.2),
    ]
}

/// The strictly increasing cubic `x ↦ x³ + x` and its global inverse by the
/// closed-form real root (the discriminant `u²/4 + 1/27` is positive).
pub fn cubic_chart_maps() -> (RealMap, RealMap) {
    let fwd = RealMap::scalar(1, |xs| xs[0].powi(3).add(&xs[0]));
    let inv = RealMap::scalar(1, |xs| {
        let u = &xs[0];
        let half = u.scale(0.5);
        let disc = half.mul(&half).add_const(1.0 / 27.0);
        let root = disc.sqrt();
        half.add(&root).cbrt().add(&half.sub(&root).cbrt())
    });
    (fwd, inv)
}

/// A smoothly compatible two-chart atlas on an interval: the identity and
/// the cubic `x³ + x` (globally smoothly invertible).
pub fn nonlinear_chart_pair() -> Result<(Chart, Chart)> {
    let region = Region::boxed(vec![-1.2], vec![1.2], interval_samples())?;
    let ident = Chart::identity(ChartId::new("interval"), region.clone())?;
    let (fwd, inv) = cubic_chart_maps();
    let cubic = Chart::from_forward(ChartId::new("cubic"), region, fwd, inv)?;
    Ok((ident, cubic))
}

/// The incompatible counterexample pair: the identity and the cube root
/// `x ↦ x^(1/3)` (whose transition from the identity chart has a singular
/// derivative at 0).
pub fn cube_root_chart_pair() -> Result<(Chart, Chart)> {
    let region = Region::boxed(vec![-1.2], vec![1.2], interval_samples())?;
    let ident = Chart::identity(ChartId::new("interval"), region.clone())?;
    let fwd = RealMap::scalar(1, |xs| xs[0].cbrt());
    let inv = RealMap::scalar(1, |xs| xs[0].powi(3));
    let codomain = Region::boxed(
        vec![-1.07],
        vec![1.07],
        vec![
            Sample::new(vec![0.0], 0.1),
            Sample::new(vec![0.888], 0.05),
            Sample::new(vec![-0.888], 0.05),
        ],
    )?;
    let cbrt = Chart::new(ChartId::new("cbrt"), region, codomain, fwd, inv)?;
    Ok((ident, cbrt))
}

/// The two-chart interval manifold built from [`nonlinear_chart_pair`].
pub fn interval_two_chart_manifold() -> Result<Manifold> {
    let (a, b) = nonlinear_chart_pair()?;
    Manifold::new(vec![a, b], 3)
}

/// The fixed scalar test battery for dimension `dim`: eight polynomial maps
/// and two transcendental maps, deterministic per dimension.
pub fn function_battery(dim: usize) -> Vec<RealMap> {
    let mut battery: Vec<RealMap> = Vec::with_capacity(10);
    battery.push(RealMap::constant(dim, vec![1.0]));
    battery.push(RealMap::scalar(dim, |xs| xs[0].clone()));
    battery.push(RealMap::scalar(dim, move |xs| xs[dim - 1].clone()));
    battery.push(RealMap::scalar(dim, |xs| {
        xs.iter().skip(1).fold(xs[0].clone(), |acc, x| acc.add(x))
    }));
    battery.push(RealMap::scalar(dim, |xs| xs[0].mul(&xs[0])));
    if dim >= 2 {
        battery.push(RealMap::scalar(dim, |xs| xs[0].mul(&xs[1])));
    } else {
        battery.push(RealMap::scalar(dim, |xs| xs[0].powi(3)));
    }
    battery.push(RealMap::scalar(dim, |xs| {
        let mut acc = xs[0].mul(&xs[0]);
        for (i, x) in xs.iter().enumerate().skip(1) {
            acc = acc.add(&x.mul(x).scale((i + 1) as f64));
        }
        acc
    }));
    battery.push(RealMap::scalar(dim, move |xs| {
        xs[0].mul(&xs[0]).mul(&xs[dim - 1]).add(&xs[0])
    }));
    battery.push(RealMap::scalar(dim, |xs| {
        let mut arg = xs[0].clone();
        for x in xs.iter().skip(1) {
            arg = arg.add(&x.scale(0.3));
        }
        arg.sin()
    }));
    battery.push(RealMap::scalar(dim, |xs| {
        let mut arg = xs[0].scale(0.3);
        for (i, x) in xs.iter().enumerate().skip(1) {
            arg = arg.add(&x.scale(0.3 * 0.5f64.powi(i as i32)));
        }
        arg.exp()
    }));
    battery
}

/// A seeded random polynomial component map (degree ≤ 2 per output) for
/// bracket fixtures on manifolds of dimension `dim`.
pub fn random_polynomial_comps(dim: usize, seed: u64) -> RealMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs = Vec::new();
    for _out in 0..dim {
        let constant: f64 = rng.gen_range(-1.0..1.0);
        let linear: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let quadratic: Vec<f64> = (0..dim * dim).map(|_| rng.gen_range(-0.5..0.5)).collect();
        coeffs.push((constant, linear, quadratic));
    }
    RealMap::new(dim, dim, move |xs| {
        coeffs
            .iter()
            .map(|(c0, lin, quad)| {
                let mut acc = xs[0].lift(*c0);
                for (x, &c) in xs.iter().zip(lin) {
                    acc = acc.add(&x.scale(c));
                }
                for i in 0..xs.len() {
                    for j in 0..xs.len() {
                        let c = quad[i * xs.len() + j];
                        if c != 0.0 {
                            acc = acc.add(&xs[i].mul(&xs[j]).scale(c));
                        }
                    }
                }
                acc
            })
            .collect()
    })
}
