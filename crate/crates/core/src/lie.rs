//! Lie groups (manifolds with smooth multiplication and inversion), group
//! actions through the diffeomorphism group, left-invariant vector fields,
//! Lie algebra axiom checks, and the Lie algebra of a Lie group.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::calculus::{
    map_add, map_compose, map_fix, map_pair, map_partial, map_scale, ProbeConfig, RealMap,
};
use crate::error::{Error, Result};
use crate::field::{lie_bracket, same_manifold, smooth_vf_check, VectorField};
use crate::geometry::{diff_check, prod_charts, DiffReport, Manifold};
use crate::groups::{automorphism_check, group_axioms_check, pmap_compose, GroupOn, PartialMap};
use crate::tangent::{change_chart, push_forward, tangent_apply, TangentVector};

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// A Lie group: a manifold with a group structure whose multiplication (on
/// the product manifold) and inversion carry passing smoothness
/// certificates from construction.
#[derive(Debug, Clone)]
pub struct LieGroup {
    manifold: Arc<Manifold>,
    times: RealMap,
    unit: Vec<f64>,
    inverse: RealMap,
    product: Arc<Manifold>,
    mult_certificate: DiffReport,
    inv_certificate: DiffReport,
}

impl LieGroup {
    /// Assemble a Lie group: the group axioms must hold at carrier samples,
    /// and multiplication/inversion must pass their smoothness checks.
    pub fn new(
        manifold: Arc<Manifold>,
        times: RealMap,
        unit: Vec<f64>,
        inverse: RealMap,
        cfg: &ProbeConfig,
    ) -> Result<LieGroup> {
        let a = manifold.ambient_dim();
        if times.in_dim() != 2 * a || times.out_dim() != a {
            return Err(Error::dim(
                2 * a,
                times.in_dim(),
                "group multiplication map",
            ));
        }
        if inverse.in_dim() != a || inverse.out_dim() != a {
            return Err(Error::dim(a, inverse.in_dim(), "group inversion map"));
        }
        if unit.len() != a {
            return Err(Error::dim(a, unit.len(), "group unit"));
        }
        if !manifold.carrier_contains(&unit) {
            return Err(Error::NotALieGroup {
                reason: "unit lies outside the carrier".into(),
            });
        }

        let group = point_group(&manifold, &times, &unit, &inverse);
        let axioms = group_axioms_check(&group, &manifold.carrier_samples(), 1e-9)?;
        if !axioms.passed {
            return Err(Error::NotALieGroup {
                reason: format!(
                    "group axioms fail at samples (assoc {:.2e}, identity {:.2e}, inverse {:.2e}, closure {})",
                    axioms.assoc_residual, axioms.identity_residual, axioms.inverse_residual,
                    axioms.closure_ok
                ),
            });
        }

        let product = Arc::new(prod_charts(&manifold, &manifold)?);
        let mult_certificate = diff_check(&product, &manifold, &times, cfg)?;
        if !mult_certificate.passed {
            return Err(Error::NotALieGroup {
                reason: "multiplication failed its smoothness certificate".into(),
            });
        }
        let inv_certificate = diff_check(&manifold, &manifold, &inverse, cfg)?;
        if !inv_certificate.passed {
            return Err(Error::NotALieGroup {
                reason: "inversion failed its smoothness certificate".into(),
            });
        }

        Ok(LieGroup {
            manifold,
            times,
            unit,
            inverse,
            product,
            mult_certificate,
            inv_certificate,
        })
    }

    pub fn manifold(&self) -> &Arc<Manifold> {
        &self.manifold
    }

    pub fn product_manifold(&self) -> &Arc<Manifold> {
        &self.product
    }

    pub fn times(&self) -> &RealMap {
        &self.times
    }

    pub fn unit(&self) -> &[f64] {
        &self.unit
    }

    pub fn inverse_map(&self) -> &RealMap {
        &self.inverse
    }

    pub fn mult_certificate(&self) -> &DiffReport {
        &self.mult_certificate
    }

    pub fn inv_certificate(&self) -> &DiffReport {
        &self.inv_certificate
    }

    /// Multiply two elements.
    pub fn mul(&self, g: &[f64], h: &[f64]) -> Result<Vec<f64>> {
        let mut p = g.to_vec();
        p.extend_from_slice(h);
        self.times.eval(&p)
    }

    /// Invert an element.
    pub fn inv(&self, g: &[f64]) -> Result<Vec<f64>> {
        self.inverse.eval(g)
    }

    /// The group as an abstract `GroupOn` over carrier points.
    pub fn point_group(&self) -> GroupOn<Vec<f64>> {
        point_group(&self.manifold, &self.times, &self.unit, &self.inverse)
    }

    /// Left multiplication `y ↦ g·y` with a fresh smoothness certificate.
    pub fn left_mult(&self, g: &[f64], cfg: &ProbeConfig) -> Result<(RealMap, DiffReport)> {
        if !self.manifold.carrier_contains(g) {
            return Err(Error::OutOfCarrier);
        }
        let fixed: Vec<(usize, f64)> = g.iter().cloned().enumerate().collect();
        let map = map_fix(&self.times, &fixed)?;
        let certificate = diff_check(&self.manifold, &self.manifold, &map, cfg)?;
        Ok((map, certificate))
    }

    /// The left action `𝓛(g)`: left multiplication restricted to the
    /// carrier as a partial map. Its inverse action is `𝓛(g⁻¹)`.
    pub fn left_action(&self, g: &[f64], cfg: &ProbeConfig) -> Result<PartialMap> {
        let (map, _) = self.left_mult(g, cfg)?;
        PartialMap::new(map, self.manifold.carrier_region())
    }

    /// Deterministic group elements for homomorphism and action checks:
    /// the unit, the carrier samples, products of the first few sample
    /// pairs, and seeded jittered carrier points.
    pub fn sampled_elements(&self, extra: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
        let mut elements = vec![self.unit.clone()];
        let samples = self.manifold.carrier_samples();
        elements.extend(samples.iter().cloned());
        for i in 0..samples.len().min(2) {
            for j in 0..samples.len().min(2) {
                elements.push(self.mul(&samples[i], &samples[j])?);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let carrier = self.manifold.carrier_region();
        for k in 0..extra {
            let s = &carrier.samples()[k % carrier.samples().len()];
            let candidate: Vec<f64> = s
                .point
                .iter()
                .map(|&x| x + s.clearance * 0.4 * rng.gen_range(-1.0..1.0))
                .collect();
            if self.manifold.carrier_contains(&candidate) {
                elements.push(candidate);
            }
        }
        // deduplicate
        let mut unique: Vec<Vec<f64>> = Vec::new();
        for e in elements {
            if !unique.iter().any(|u| max_abs_diff(u, &e) < 1e-12) {
                unique.push(e);
            }
        }
        Ok(unique)
    }
}

fn point_group(
    m: &Arc<Manifold>,
    times: &RealMap,
    unit: &[f64],
    inverse: &RealMap,
) -> GroupOn<Vec<f64>> {
    let mc = Arc::clone(m);
    let times = times.clone();
    let inverse = inverse.clone();
    GroupOn {
        carrier_contains: Arc::new(move |p: &Vec<f64>| mc.carrier_contains(p)),
        op: Arc::new(move |a: &Vec<f64>, b: &Vec<f64>| {
            let mut p = a.clone();
            p.extend_from_slice(b);
            times.eval(&p)
        }),
        unit: unit.to_vec(),
        inv: Arc::new(move |a: &Vec<f64>| inverse.eval(a)),
        distance: Arc::new(|a: &Vec<f64>, b: &Vec<f64>| max_abs_diff(a, b)),
    }
}

/// A group action given both elementwise (for automorphism checks) and as a
/// joint map `(g, m) ↦ ρ_g(m)` (for the product-manifold smoothness probe).
pub struct ActionSpec {
    pub per_element: Arc<dyn Fn(&[f64]) -> Result<PartialMap> + Send + Sync>,
    pub joint: RealMap,
}

/// Report of a Lie group action check.
#[derive(Debug)]
pub struct ActionReport {
    pub automorphisms_ok: bool,
    pub hom_residual: f64,
    pub joint: DiffReport,
    pub passed: bool,
}

/// Check that `rho` defines an action of `g` on `m2`: each `ρ(g)` is an
/// automorphism of `m2` (with inverse `ρ(g⁻¹)`), `ρ` is a homomorphism into
/// the diffeomorphism group at sample level, and the joint map is smooth on
/// the product manifold.
pub fn action_check(
    g: &LieGroup,
    m2: &Manifold,
    rho: &ActionSpec,
    sample_gs: &[Vec<f64>],
    cfg: &ProbeConfig,
) -> Result<ActionReport> {
    let mut automorphisms_ok = true;
    for gp in sample_gs {
        let el = (rho.per_element)(gp)?;
        let el_inv = (rho.per_element)(&g.inv(gp)?)?;
        let report = automorphism_check(m2, &el, &el_inv, cfg)?;
        if !report.passed {
            automorphisms_ok = false;
        }
    }

    let mut hom_residual = 0.0f64;
    for ga in sample_gs {
        for gb in sample_gs {
            let rho_ab = (rho.per_element)(&g.mul(ga, gb)?)?;
            let composed = pmap_compose(&(rho.per_element)(ga)?, &(rho.per_element)(gb)?)?;
            for p in m2.carrier_samples() {
                match (rho_ab.apply(&p), composed.apply(&p)) {
                    (Some(x), Some(y)) => {
                        hom_residual = hom_residual.max(max_abs_diff(&x, &y));
                    }
                    _ => hom_residual = f64::INFINITY,
                }
            }
        }
    }

    let product = prod_charts(&g.manifold(), m2)?;
    let joint = diff_check(&product, m2, &rho.joint, cfg)?;

    let passed = automorphisms_ok && hom_residual <= 1e-8 && joint.passed;
    Ok(ActionReport {
        automorphisms_ok,
        hom_residual,
        joint,
        passed,
    })
}

/// Check invariance of a field under a checked self-map `f`:
/// at carrier samples `p` and battery functions, compare the field at
/// `f(p)` with the push-forward of the field at `p`.
pub fn invariant_under_check(
    x: &VectorField,
    f: &RealMap,
    battery: &[RealMap],
    tol: f64,
    cfg: &ProbeConfig,
) -> Result<(bool, f64)> {
    let m = x.manifold();
    let mut residual = 0.0f64;
    for p in m.carrier_samples() {
        let fp = f.eval(&p)?;
        if !m.carrier_contains(&fp) {
            return Err(Error::OutOfCarrier);
        }
        let direct = x.apply(&fp)?;
        let pushed = push_forward(f, m, m, &x.apply(&p)?, cfg)?;
        for fb in battery {
            let lhs = tangent_apply(m, &direct, fb)?;
            let rhs = tangent_apply(m, &pushed, fb)?;
            residual = residual.max((lhs - rhs).abs());
        }
    }
    Ok((residual <= tol, residual))
}

/// Extend a tangent vector at the unit to a left-invariant field:
/// `X(g) = (push-forward of left multiplication by g)(v)`, realized per
/// chart as the second-block Jacobian of the multiplication map at
/// `(g, unit)` applied to the components of `v`.
pub fn left_invariant_extend(g: &LieGroup, v: &TangentVector) -> Result<VectorField> {
    if max_abs_diff(&v.base, g.unit()) > 1e-12 {
        return Err(Error::Invalid(
            "left-invariant extension needs a tangent vector at the unit".into(),
        ));
    }
    let m = g.manifold();
    let unit_chart = m.covering_chart(g.unit())?;
    let v_unit = change_chart(m, v, unit_chart)?;
    let z0 = unit_chart.apply(g.unit())?;
    let e = m.dim();

    let mut comps = std::collections::BTreeMap::new();
    for chart in m.charts() {
        // mult_c(y, z) = c(times(c⁻¹(y), cu⁻¹(z))) on ℝ^{2e}
        let unflatten = map_pair(chart.inv(), unit_chart.inv());
        let mult_c = map_compose(chart.fwd(), &map_compose(g.times(), &unflatten)?)?;
        let mut acc: Option<RealMap> = None;
        for (j, &vj) in v_unit.comps.iter().enumerate() {
            if vj == 0.0 {
                continue;
            }
            let dj = map_partial(&mult_c, e + j)?;
            let term = map_scale(vj, &dj);
            acc = Some(match acc {
                None => term,
                Some(prev) => map_add(&prev, &term)?,
            });
        }
        let summed = match acc {
            Some(a) => a,
            None => RealMap::constant(2 * e, vec![0.0; e]),
        };
        let fixed: Vec<(usize, f64)> = z0.iter().enumerate().map(|(j, &z)| (e + j, z)).collect();
        comps.insert(chart.id().clone(), map_fix(&summed, &fixed)?);
    }
    VectorField::new(Arc::clone(m), comps)
}

/// Residual maxima for the abstract Lie algebra axioms over a finite set of
/// fields.
#[derive(Debug, Clone)]
pub struct LieAlgebraReport {
    pub bilinear_residual: f64,
    pub alternating_residual: f64,
    pub jacobi_residual: f64,
    pub passed: bool,
}

fn comps_at(field: &VectorField, p: &[f64]) -> Result<Vec<f64>> {
    Ok(field.apply(p)?.comps)
}

/// Check bilinearity, antisymmetry, and the Jacobi identity of the standard
/// bracket over the given fields, componentwise at carrier samples within
/// `tol`.
pub fn lie_algebra_check(elements: &[VectorField], tol: f64) -> Result<LieAlgebraReport> {
    lie_algebra_check_with(elements, &lie_bracket, tol)
}

/// Like [`lie_algebra_check`] but over an arbitrary candidate bracket
/// operation, so broken brackets can be probed too.
pub fn lie_algebra_check_with<B>(
    elements: &[VectorField],
    bracket: &B,
    tol: f64,
) -> Result<LieAlgebraReport>
where
    B: Fn(&VectorField, &VectorField) -> Result<VectorField>,
{
    if elements.is_empty() {
        return Err(Error::Invalid("lie algebra check needs elements".into()));
    }
    let m = elements[0].manifold();
    for e in elements {
        if !same_manifold(m, e.manifold()) {
            return Err(Error::Invalid("fields live on different manifolds".into()));
        }
    }
    let points = m.carrier_samples();

    // bilinearity: [a·x + b·y, z] = a[x,z] + b[y,z] (and the right slot by
    // antisymmetry), checked on the first pair against every z
    let mut bilinear_residual = 0.0f64;
    if elements.len() >= 2 {
        let (a, b) = (2.0, -0.5);
        let x = &elements[0];
        let y = &elements[1];
        let combo = x.scale(a)?.add(&y.scale(b)?)?;
        for z in elements {
            let lhs = bracket(&combo, z)?;
            let rhs_x = bracket(x, z)?.scale(a)?;
            let rhs_y = bracket(y, z)?.scale(b)?;
            let rhs = rhs_x.add(&rhs_y)?;
            for p in &points {
                bilinear_residual =
                    bilinear_residual.max(max_abs_diff(&comps_at(&lhs, p)?, &comps_at(&rhs, p)?));
            }
        }
    }

    let mut alternating_residual = 0.0f64;
    for x in elements {
        let xx = bracket(x, x)?;
        for p in &points {
            let c = comps_at(&xx, p)?;
            alternating_residual =
                alternating_residual.max(c.iter().map(|v| v.abs()).fold(0.0, f64::max));
        }
    }

    let mut jacobi_residual = 0.0f64;
    let n = elements.len();
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                let (x, y, z) = (&elements[i], &elements[j], &elements[k]);
                let t1 = bracket(x, &bracket(y, z)?)?;
                let t2 = bracket(y, &bracket(z, x)?)?;
                let t3 = bracket(z, &bracket(x, y)?)?;
                for p in &points {
                    let mut sum = comps_at(&t1, p)?;
                    for (s, v) in sum.iter_mut().zip(comps_at(&t2, p)?) {
                        *s += v;
                    }
                    for (s, v) in sum.iter_mut().zip(comps_at(&t3, p)?) {
                        *s += v;
                    }
                    jacobi_residual =
                        jacobi_residual.max(sum.iter().map(|v| v.abs()).fold(0.0, f64::max));
                }
            }
        }
    }

    let passed = bilinear_residual <= tol && alternating_residual <= tol && jacobi_residual <= tol;
    Ok(LieAlgebraReport {
        bilinear_residual,
        alternating_residual,
        jacobi_residual,
        passed,
    })
}

/// Solve the least-squares system `A·c ≈ rhs` (A given as rows) by normal
/// equations with partial pivoting. Errors on rank deficiency.
fn least_squares(rows: &[Vec<f64>], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = rows.first().map(|r| r.len()).unwrap_or(0);
    if n == 0 || rows.len() < n {
        return Err(Error::InconclusiveSpan {
            context: format!("{} equations for {} unknowns", rows.len(), n),
        });
    }
    let mut ata = vec![vec![0.0f64; n]; n];
    let mut atb = vec![0.0f64; n];
    for (row, &b) in rows.iter().zip(rhs) {
        for i in 0..n {
            for j in 0..n {
                ata[i][j] += row[i] * row[j];
            }
            atb[i] += row[i] * b;
        }
    }
    let scale = ata
        .iter()
        .flat_map(|r| r.iter())
        .map(|x| x.abs())
        .fold(0.0, f64::max);
    // gaussian elimination with partial pivoting
    for col in 0..n {
        let (pivot_row, pivot) = (col..n)
            .map(|r| (r, ata[r][col].abs()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty");
        if pivot <= 1e-10 * scale.max(1e-300) {
            return Err(Error::InconclusiveSpan {
                context: format!("pivot {pivot:.3e} at column {col}"),
            });
        }
        ata.swap(col, pivot_row);
        atb.swap(col, pivot_row);
        for r in (col + 1)..n {
            let factor = ata[r][col] / ata[col][col];
            for c in col..n {
                ata[r][c] -= factor * ata[col][c];
            }
            atb[r] -= factor * atb[col];
        }
    }
    let mut x = vec![0.0f64; n];
    for col in (0..n).rev() {
        let mut acc = atb[col];
        for c in (col + 1)..n {
            acc -= ata[col][c] * x[c];
        }
        x[col] = acc / ata[col][col];
    }
    Ok(x)
}

/// Express `field` in the span of `basis` at the carrier samples: returns
/// the least-squares coefficients and the worst componentwise residual.
pub fn span_fit(basis: &[VectorField], field: &VectorField) -> Result<(Vec<f64>, f64)> {
    let m = field.manifold();
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for p in m.carrier_samples() {
        let target = comps_at(field, &p)?;
        let basis_comps: Vec<Vec<f64>> = basis
            .iter()
            .map(|b| comps_at(b, &p))
            .collect::<Result<_>>()?;
        for component in 0..target.len() {
            rows.push(basis_comps.iter().map(|c| c[component]).collect());
            rhs.push(target[component]);
        }
    }
    let coeffs = least_squares(&rows, &rhs)?;
    let mut residual = 0.0f64;
    for (row, &b) in rows.iter().zip(&rhs) {
        let fit: f64 = row.iter().zip(&coeffs).map(|(a, c)| a * c).sum();
        residual = residual.max((fit - b).abs());
    }
    Ok((coeffs, residual))
}

/// Report of the Lie subalgebra (bracket closure + subspace) check.
#[derive(Debug, Clone)]
pub struct SubalgebraReport {
    /// Per bracket pair `(i, j)`: the span coefficients of `[xᵢ, xⱼ]`.
    pub bracket_coeffs: Vec<((usize, usize), Vec<f64>)>,
    pub bracket_span_residual: f64,
    pub subspace_residual: f64,
    pub passed: bool,
}

/// Check that the fields in `sub` form a Lie subalgebra of the smooth
/// fields: pairwise brackets stay in their span (least-squares residual
/// below `tol`), and sampled sums/scalings stay in the span too.
pub fn lie_subalgebra_check(sub: &[VectorField], tol: f64) -> Result<SubalgebraReport> {
    if sub.is_empty() {
        return Err(Error::Invalid(
            "subalgebra check needs at least one field".into(),
        ));
    }
    let mut bracket_coeffs = Vec::new();
    let mut bracket_span_residual = 0.0f64;
    for i in 0..sub.len() {
        for j in i..sub.len() {
            let b = lie_bracket(&sub[i], &sub[j])?;
            let (coeffs, residual) = span_fit(sub, &b)?;
            bracket_span_residual = bracket_span_residual.max(residual);
            bracket_coeffs.push(((i, j), coeffs));
        }
    }
    // subspace closure under a sampled sum and scaling
    let mut subspace_residual = 0.0f64;
    let sum = sub[0].add(sub.last().expect("non-empty"))?;
    let (_, r1) = span_fit(sub, &sum)?;
    subspace_residual = subspace_residual.max(r1);
    let scaled = sub[0].scale(2.5)?;
    let (_, r2) = span_fit(sub, &scaled)?;
    subspace_residual = subspace_residual.max(r2);

    let passed = bracket_span_residual <= tol && subspace_residual <= tol;
    Ok(SubalgebraReport {
        bracket_coeffs,
        bracket_span_residual,
        subspace_residual,
        passed,
    })
}

/// The Lie algebra of a Lie group: the standard basis of the tangent space
/// at the unit extended to left-invariant fields, with smoothness,
/// invariance, algebra-axiom, and closure checks.
#[derive(Debug)]
pub struct LieAlgebraOf {
    pub basis: Vec<VectorField>,
    /// Structure constants: for each pair `(i, j)` the coefficients of
    /// `[Xᵢ, Xⱼ]` in the basis.
    pub structure: Vec<((usize, usize), Vec<f64>)>,
    pub smooth_ok: bool,
    pub invariance_residual: f64,
    pub algebra: LieAlgebraReport,
    pub closure: SubalgebraReport,
    pub passed: bool,
}

/// Construct the Lie algebra of `g` and run the full verification battery.
/// Sub-check failures are reported, not raised; the construction is always
/// returned for inspection.
pub fn lie_algebra_of(
    g: &LieGroup,
    battery: &[RealMap],
    cfg: &ProbeConfig,
    tol: f64,
) -> Result<LieAlgebraOf> {
    let m = g.manifold();
    let e = m.dim();
    let unit_chart = m.covering_chart(g.unit())?;

    let mut basis = Vec::with_capacity(e);
    for i in 0..e {
        let mut dir = vec![0.0; e];
        dir[i] = 1.0;
        let v = TangentVector::new(m, unit_chart.id(), g.unit().to_vec(), dir)?;
        basis.push(left_invariant_extend(g, &v)?);
    }

    let mut smooth_ok = true;
    for x in &basis {
        let order = cfg.order.min(
            m.charts()
                .iter()
                .filter_map(|c| x.comps_in(c.id()).map(|m| m.max_order()))
                .min()
                .unwrap_or(cfg.order),
        );
        let report = smooth_vf_check(
            x,
            &ProbeConfig {
                order,
                ..cfg.clone()
            },
        )?;
        if !report.passed {
            smooth_ok = false;
        }
    }

    let mut invariance_residual = 0.0f64;
    for gp in g.sampled_elements(2, cfg.seed)?.iter().take(4) {
        let (lmap, _) = g.left_mult(gp, cfg)?;
        for x in &basis {
            let (_, residual) = invariant_under_check(x, &lmap, battery, tol, cfg)?;
            invariance_residual = invariance_residual.max(residual);
        }
    }

    let algebra = lie_algebra_check(&basis, tol.max(1e-5))?;
    let closure = lie_subalgebra_check(&basis, tol)?;
    let structure = closure.bracket_coeffs.clone();

    let passed = smooth_ok && invariance_residual <= tol && algebra.passed && closure.passed;
    Ok(LieAlgebraOf {
        basis,
        structure,
        smooth_ok,
        invariance_residual,
        algebra,
        closure,
        passed,
    })
}
