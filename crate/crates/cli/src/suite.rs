//! Model loading and the fixed verification suite.

use std::path::PathBuf;
use std::sync::Arc;

use serde::Deserialize;

use liegeom::calculus::{ProbeConfig, RealMap};
use liegeom::error::Error as CoreError;
use liegeom::expr;
use liegeom::field::{bracket_derivation_apply, lie_bracket, smooth_vf_check, VectorField};
use liegeom::geometry::{Chart, ChartId, Manifold, Region, Sample};
use liegeom::groups::{diff_group, group_axioms_check, DiffGroupElement, PartialMap};
use liegeom::lie::{invariant_under_check, left_invariant_extend, lie_algebra_of, LieGroup};
use liegeom::models::{
    disk_manifold, disk_rotations, euclidean_lie_group, function_battery, gl_group,
    random_polynomial_comps, SquareMatrix,
};
use liegeom::tangent::{coord_test_function, TangentVector};

use crate::report::{CheckRow, ConfigEcho, SuiteReport};

/// CLI failure modes, mapped onto the exit-code contract.
#[derive(Debug)]
pub enum CliError {
    /// Bad model strings, malformed expressions, unreadable files: exit 2.
    Usage(String),
    /// Computation that could not produce a verdict: exit 1.
    Run(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Run(m) => write!(f, "{m}"),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> CliError {
        CliError::Run(e.to_string())
    }
}

/// Built-in and file-defined models.
#[derive(Debug, Clone)]
pub enum Model {
    Euclidean(usize),
    Gl(usize),
    Custom(PathBuf),
}

impl Model {
    pub fn parse(s: &str) -> Result<Model, CliError> {
        if let Some(rest) = s.strip_prefix("euclidean:") {
            let n: usize = rest
                .parse()
                .map_err(|_| CliError::Usage(format!("bad dimension in model `{s}`")))?;
            if n == 0 {
                return Err(CliError::Usage(
                    "euclidean dimension must be positive".into(),
                ));
            }
            return Ok(Model::Euclidean(n));
        }
        if let Some(rest) = s.strip_prefix("gl:") {
            let n: usize = rest
                .parse()
                .map_err(|_| CliError::Usage(format!("bad dimension in model `{s}`")))?;
            if !(1..=3).contains(&n) {
                return Err(CliError::Usage("gl model supports n in {1, 2, 3}".into()));
            }
            return Ok(Model::Gl(n));
        }
        if let Some(rest) = s.strip_prefix("custom:") {
            return Ok(Model::Custom(PathBuf::from(rest)));
        }
        Err(CliError::Usage(format!(
            "unknown model `{s}` (expected euclidean:<n>, gl:<n>, or custom:<path>)"
        )))
    }

    pub fn name(&self) -> String {
        match self {
            Model::Euclidean(n) => format!("euclidean:{n}"),
            Model::Gl(n) => format!("gl:{n}"),
            Model::Custom(p) => format!("custom:{}", p.display()),
        }
    }
}

/// Run configuration shared by all subcommands.
#[derive(Debug, Clone)]
pub struct RunCfg {
    pub order: usize,
    pub samples: usize,
    pub tol: f64,
    pub seed: u64,
}

impl RunCfg {
    pub fn validate(&self) -> Result<(), CliError> {
        if !(1..=4).contains(&self.order) {
            return Err(CliError::Usage("order must be in [1, 4]".into()));
        }
        if self.samples == 0 {
            return Err(CliError::Usage("samples must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(CliError::Usage("tol must be positive".into()));
        }
        Ok(())
    }

    pub fn probe(&self) -> ProbeConfig {
        ProbeConfig {
            order: self.order,
            n_samples: self.samples,
            tol: self.tol,
            seed: self.seed,
        }
    }

    /// Probe used while *constructing* models: never tighter than the
    /// default, so that an aggressive `--tol` fails at the check rows (with
    /// a full residual listing) instead of aborting construction.
    pub fn build_probe(&self) -> ProbeConfig {
        ProbeConfig {
            tol: self.tol.max(ProbeConfig::default().tol),
            ..self.probe()
        }
    }
}

// -- custom model file schema ------------------------------------------------

#[derive(Debug, Deserialize)]
struct CustomSample {
    point: Vec<f64>,
    clearance: f64,
}

#[derive(Debug, Deserialize)]
struct CustomRegion {
    lo: Vec<f64>,
    hi: Vec<f64>,
    samples: Vec<CustomSample>,
    /// When set, membership is everywhere-true and the box only guides
    /// sampling (needed for groups whose operation escapes any box).
    #[serde(default)]
    unbounded: bool,
}

#[derive(Debug, Deserialize)]
struct CustomChart {
    id: String,
    fwd: Vec<String>,
    inv: Vec<String>,
    domain: CustomRegion,
}

#[derive(Debug, Deserialize)]
struct CustomFields {
    x: Vec<String>,
    y: Vec<String>,
}

#[derive(Debug, Deserialize)]
struct CustomGroup {
    times: Vec<String>,
    unit: Vec<f64>,
    inv: Vec<String>,
}

#[derive(Debug, Deserialize)]
struct CustomModel {
    ambient_dim: usize,
    #[serde(default = "default_probe_order")]
    probe_order: usize,
    charts: Vec<CustomChart>,
    fields: Option<CustomFields>,
    group: Option<CustomGroup>,
}

fn default_probe_order() -> usize {
    3
}

fn parse_polynomial_map(exprs: &[String], in_dim: usize) -> Result<RealMap, CliError> {
    let joined = exprs.join(",");
    expr::parse_component_list(&joined, in_dim).map_err(|e| CliError::Usage(e.to_string()))
}

/// A loaded model: its manifold, optionally its group structure, and
/// optionally file-provided bracket fixture fields.
pub struct LoadedModel {
    pub manifold: Arc<Manifold>,
    pub group: Option<LieGroup>,
    pub fields: Option<(RealMap, RealMap)>,
}

pub fn load_model(model: &Model, cfg: &RunCfg) -> Result<LoadedModel, CliError> {
    let probe = cfg.build_probe();
    match model {
        Model::Euclidean(n) => {
            let group = euclidean_lie_group(*n, &probe)?;
            Ok(LoadedModel {
                manifold: Arc::clone(group.manifold()),
                group: Some(group),
                fields: None,
            })
        }
        Model::Gl(n) => {
            let group = gl_group(*n, &probe)?;
            Ok(LoadedModel {
                manifold: Arc::clone(group.manifold()),
                group: Some(group),
                fields: None,
            })
        }
        Model::Custom(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            let parsed: CustomModel = serde_json::from_str(&text)
                .map_err(|e| CliError::Usage(format!("bad model file: {e}")))?;
            let a = parsed.ambient_dim;
            if a == 0 {
                return Err(CliError::Usage("ambient_dim must be positive".into()));
            }
            let mut charts = Vec::new();
            for c in &parsed.charts {
                let samples = c
                    .domain
                    .samples
                    .iter()
                    .map(|s| Sample::new(s.point.clone(), s.clearance))
                    .collect();
                let bounds = (c.domain.lo.clone(), c.domain.hi.clone());
                let domain = if c.domain.unbounded {
                    Region::entire(a, bounds, samples)
                } else {
                    Region::boxed(c.domain.lo.clone(), c.domain.hi.clone(), samples)
                }
                .map_err(|e| CliError::Usage(format!("chart `{}` domain: {e}", c.id)))?;
                let fwd = parse_polynomial_map(&c.fwd, a)?;
                let inv = parse_polynomial_map(&c.inv, fwd.out_dim())?;
                charts.push(
                    Chart::from_forward(ChartId::new(c.id.clone()), domain, fwd, inv)
                        .map_err(CliError::from)?,
                );
            }
            let atlas_probe = probe
                .clone()
                .with_order(parsed.probe_order.min(probe.order));
            let manifold = Arc::new(Manifold::with_config(charts, &atlas_probe)?);
            let group = match &parsed.group {
                Some(g) => {
                    let times = parse_polynomial_map(&g.times, 2 * a)?;
                    let inv = parse_polynomial_map(&g.inv, a)?;
                    Some(LieGroup::new(
                        Arc::clone(&manifold),
                        times,
                        g.unit.clone(),
                        inv,
                        &probe,
                    )?)
                }
                None => None,
            };
            let e = manifold.dim();
            let fields = match &parsed.fields {
                Some(f) => Some((
                    parse_polynomial_map(&f.x, e)?,
                    parse_polynomial_map(&f.y, e)?,
                )),
                None => None,
            };
            Ok(LoadedModel {
                manifold,
                group,
                fields,
            })
        }
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn fixture_fields(
    loaded: &LoadedModel,
    seed: u64,
) -> Result<(VectorField, VectorField, VectorField), CliError> {
    let m = &loaded.manifold;
    let e = m.dim();
    let chart0 = m.charts()[0].id().clone();
    let (cx, cy) = match &loaded.fields {
        Some((x, y)) => (x.clone(), y.clone()),
        None => (
            random_polynomial_comps(e, seed),
            random_polynomial_comps(e, seed + 1),
        ),
    };
    let cz = random_polynomial_comps(e, seed + 2);
    Ok((
        VectorField::from_chart_comps(Arc::clone(m), &chart0, cx)?,
        VectorField::from_chart_comps(Arc::clone(m), &chart0, cy)?,
        VectorField::from_chart_comps(Arc::clone(m), &chart0, cz)?,
    ))
}

/// Run the verification suite in its fixed order and assemble the report.
pub fn run_suite(model: &Model, cfg: &RunCfg) -> Result<SuiteReport, CliError> {
    cfg.validate()?;
    let probe = cfg.build_probe();
    let tol = cfg.tol;
    let mut checks: Vec<CheckRow> = Vec::new();

    let loaded = load_model_for_suite(model, cfg, &mut checks)?;
    let echo = ConfigEcho {
        model: model.name(),
        order: cfg.order,
        samples: cfg.samples,
        tol: cfg.tol,
        seed: cfg.seed,
    };
    let loaded = match loaded {
        Some(l) => l,
        None => return Ok(SuiteReport::new(echo, checks)),
    };
    let m = &loaded.manifold;

    // 1. manifold compatibility (probes already ran during construction)
    {
        let mut residual = 0.0f64;
        let mut samples = 0;
        for (_, _, r) in m.compat_reports() {
            residual = residual.max(r.max_fd_residual);
            samples += r.samples_checked;
        }
        checks.push(CheckRow::new(
            "manifold_compat",
            residual <= tol,
            residual,
            samples,
            "smooth_compat",
        ));
    }

    // 2 + 3. group axioms and Lie group certificates
    if let Some(group) = &loaded.group {
        let axioms = group_axioms_check(&group.point_group(), &m.carrier_samples(), tol)?;
        let residual = axioms
            .assoc_residual
            .max(axioms.identity_residual)
            .max(axioms.inverse_residual);
        checks.push(CheckRow::new(
            "group_axioms",
            axioms.passed,
            residual,
            m.carrier_samples().len(),
            "grp_on",
        ));

        let cert_residual = group
            .mult_certificate()
            .witness_residual()
            .max(group.inv_certificate().witness_residual());
        checks.push(CheckRow::new(
            "lie_group_certificates",
            group.mult_certificate().passed
                && group.inv_certificate().passed
                && cert_residual <= tol,
            cert_residual,
            group.mult_certificate().per_sample.len() + group.inv_certificate().per_sample.len(),
            "lie_grp",
        ));
    }

    // 4. diffeomorphism group laws on the rotation fixtures over the disk
    {
        let disk = Arc::new(disk_manifold()?);
        let carrier = disk.carrier_region();
        let elements: Vec<DiffGroupElement> = disk_rotations(6)
            .into_iter()
            .map(|(f, f_inv)| {
                Ok(DiffGroupElement::new(
                    PartialMap::new(f, carrier.clone())?,
                    PartialMap::new(f_inv, carrier.clone())?,
                ))
            })
            .collect::<Result<_, CoreError>>()?;
        let g = diff_group(Arc::clone(&disk), probe.clone());
        let report = group_axioms_check(&g, &elements, tol)?;
        let residual = report
            .assoc_residual
            .max(report.identity_residual)
            .max(report.inverse_residual);
        checks.push(CheckRow::new(
            "diff_group",
            report.passed,
            residual,
            elements.len(),
            "Diff_grp",
        ));
    }

    // 5. vector field smoothness (both routes must pass and agree)
    let (fx, fy, fz) = fixture_fields(&loaded, cfg.seed)?;
    {
        let report = smooth_vf_check(&fx, &probe)?;
        checks.push(CheckRow::new(
            "vf_smoothness",
            report.passed && report.max_residual <= tol,
            report.max_residual,
            report.per_sample.len(),
            "smooth_vector_field",
        ));
    }

    // 6. bracket properties
    {
        let points = m.carrier_samples();
        let battery = function_battery(m.ambient_dim());
        let bxy = lie_bracket(&fx, &fy)?;
        let byx = lie_bracket(&fy, &fx)?;

        let mut antisym = 0.0f64;
        for p in &points {
            let a = bxy.apply(p)?.comps;
            let b = byx.apply(p)?.comps;
            let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
            antisym = antisym.max(sum.iter().map(|v| v.abs()).fold(0.0, f64::max));
        }
        checks.push(CheckRow::new(
            "bracket_antisymmetry",
            antisym <= tol,
            antisym,
            points.len(),
            "lie_bracket_def",
        ));

        let mut oracle = 0.0f64;
        for p in &points {
            for (i, f) in battery.iter().enumerate().take(4) {
                let via_coords = liegeom::tangent::tangent_apply(m, &bxy.apply(p)?, f)?;
                let via_derivation = bracket_derivation_apply(&fx, &fy, p, f)?;
                oracle = oracle.max((via_coords - via_derivation).abs());
                let _ = i;
            }
        }
        checks.push(CheckRow::new(
            "bracket_oracle_agreement",
            oracle <= tol,
            oracle,
            points.len(),
            "lie_bracket_def",
        ));

        let mut leibniz = 0.0f64;
        for (f, g) in battery.iter().take(3).zip(battery.iter().skip(3).take(3)) {
            let fg = liegeom::calculus::map_mul(f, g)?;
            let b_fg = bxy.sharp(&fg)?;
            let b_f = bxy.sharp(f)?;
            let b_g = bxy.sharp(g)?;
            for p in &points {
                let lhs = b_fg.eval_scalar(p)?;
                let rhs = f.eval_scalar(p)? * b_g.eval_scalar(p)?
                    + g.eval_scalar(p)? * b_f.eval_scalar(p)?;
                leibniz = leibniz.max((lhs - rhs).abs());
            }
        }
        checks.push(CheckRow::new(
            "bracket_leibniz",
            leibniz <= tol,
            leibniz,
            points.len(),
            "product_rule_lie_bracket",
        ));

        let mut jacobi = 0.0f64;
        let t1 = lie_bracket(&fx, &lie_bracket(&fy, &fz)?)?;
        let t2 = lie_bracket(&fy, &lie_bracket(&fz, &fx)?)?;
        let t3 = lie_bracket(&fz, &lie_bracket(&fx, &fy)?)?;
        for p in &points {
            let mut sum = t1.apply(p)?.comps;
            for (s, v) in sum.iter_mut().zip(t2.apply(p)?.comps) {
                *s += v;
            }
            for (s, v) in sum.iter_mut().zip(t3.apply(p)?.comps) {
                *s += v;
            }
            jacobi = jacobi.max(sum.iter().map(|v| v.abs()).fold(0.0, f64::max));
        }
        checks.push(CheckRow::new(
            "bracket_jacobi",
            jacobi <= tol,
            jacobi,
            points.len(),
            "lie_bracket_jacobi",
        ));
    }

    // 7 + 8. left invariance and the Lie algebra of the group
    if let Some(group) = &loaded.group {
        let battery = function_battery(m.ambient_dim());
        let e = m.dim();
        let unit_chart = m.covering_chart(group.unit())?;
        let mut invariance = 0.0f64;
        let mut inv_ok = true;
        for i in 0..e {
            let mut dir = vec![0.0; e];
            dir[i] = 1.0;
            let v = TangentVector::new(m, unit_chart.id(), group.unit().to_vec(), dir)?;
            let x = left_invariant_extend(group, &v)?;
            for gp in group.sampled_elements(1, cfg.seed)?.iter().take(3) {
                let (lmap, _) = group.left_mult(gp, &probe)?;
                let (ok, residual) =
                    invariant_under_check(&x, &lmap, &battery[..4], tol.max(1e-6), &probe)?;
                inv_ok &= ok;
                invariance = invariance.max(residual);
            }
        }
        checks.push(CheckRow::new(
            "left_invariance",
            inv_ok && invariance <= tol,
            invariance,
            e * 3,
            "L_invariant",
        ));

        let algebra = lie_algebra_of(group, &battery[..4], &probe, tol.max(1e-6))?;
        let residual = algebra
            .invariance_residual
            .max(algebra.algebra.jacobi_residual)
            .max(algebra.closure.bracket_span_residual);
        checks.push(CheckRow::new(
            "lie_algebra_of",
            algebra.passed && residual <= tol,
            residual,
            algebra.basis.len(),
            "lie_algebra_of_left_invariant_svf",
        ));
    }

    Ok(SuiteReport::new(echo, checks))
}

/// Model loading with graceful degradation: a failed group construction is
/// recorded as failing certificate rows instead of aborting the suite.
fn load_model_for_suite(
    model: &Model,
    cfg: &RunCfg,
    checks: &mut Vec<CheckRow>,
) -> Result<Option<LoadedModel>, CliError> {
    match load_model(model, cfg) {
        Ok(l) => Ok(Some(l)),
        Err(CliError::Usage(u)) => Err(CliError::Usage(u)),
        Err(CliError::Run(msg)) => {
            // construction-time failure: report the certificate rows as
            // failed so the exit code reflects a check failure
            checks.push(CheckRow {
                name: "lie_group_certificates".into(),
                passed: false,
                max_residual: None,
                samples: 0,
                paper_anchor: format!("lie_grp ({msg})"),
            });
            Ok(None)
        }
    }
}

/// Structure constants of a gl model in text form, appended to verify output.
pub fn structure_constants_text(model: &Model, cfg: &RunCfg) -> Result<Option<String>, CliError> {
    let Model::Gl(n) = model else {
        return Ok(None);
    };
    let probe = cfg.build_probe();
    let group = gl_group(*n, &probe)?;
    let m = group.manifold();
    let battery = function_battery(m.ambient_dim());
    let algebra = lie_algebra_of(&group, &battery[..4], &probe, cfg.tol.max(1e-6))?;
    let mut out = String::from("structure constants ([Xi, Xj] coefficients in the basis):\n");
    for ((i, j), coeffs) in &algebra.structure {
        let rendered: Vec<String> = coeffs.iter().map(|c| format!("{c:+.6e}")).collect();
        out.push_str(&format!("  [{i},{j}]: {}\n", rendered.join(" ")));
    }
    // cross-check against matrix commutators
    let mut worst = 0.0f64;
    for ((i, j), coeffs) in &algebra.structure {
        let mut ei = vec![0.0; n * n];
        ei[*i] = 1.0;
        let mut ej = vec![0.0; n * n];
        ej[*j] = 1.0;
        let a = SquareMatrix::from_flat(*n, &ei).map_err(CliError::from)?;
        let b = SquareMatrix::from_flat(*n, &ej).map_err(CliError::from)?;
        worst = worst.max(max_abs_diff(coeffs, &a.commutator(&b).flatten()));
    }
    out.push_str(&format!(
        "  max deviation from matrix commutators: {worst:.6e}\n"
    ));
    Ok(Some(out))
}

/// Output of the bracket computation at a point.
#[derive(Debug, serde::Serialize)]
pub struct BracketOutput {
    pub point: Vec<f64>,
    pub coordinate_route: Vec<f64>,
    pub derivation_route: Vec<f64>,
    pub discrepancy: f64,
}

/// Compute `[X, Y]` at a point from both routes.
pub fn run_bracket(
    model: &Model,
    cfg: &RunCfg,
    field_x: &str,
    field_y: &str,
    point: &str,
) -> Result<BracketOutput, CliError> {
    cfg.validate()?;
    let loaded = load_model(model, cfg)?;
    let m = &loaded.manifold;
    let e = m.dim();

    let parse_field = |s: &str| -> Result<VectorField, CliError> {
        let comps = expr::parse_component_list(s, e).map_err(|e| CliError::Usage(e.to_string()))?;
        if comps.out_dim() != e {
            return Err(CliError::Usage(format!(
                "field needs {e} components, got {}",
                comps.out_dim()
            )));
        }
        VectorField::from_chart_comps(Arc::clone(m), m.charts()[0].id(), comps)
            .map_err(CliError::from)
    };
    let x = parse_field(field_x)?;
    let y = parse_field(field_y)?;

    let p: Vec<f64> = point
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("bad coordinate `{t}` in point")))
        })
        .collect::<Result<_, _>>()?;
    if p.len() != m.ambient_dim() {
        return Err(CliError::Usage(format!(
            "point needs {} coordinates, got {}",
            m.ambient_dim(),
            p.len()
        )));
    }
    if !m.carrier_contains(&p) {
        return Err(CliError::Run(format!(
            "point {p:?} lies outside the model carrier"
        )));
    }

    let bracket = lie_bracket(&x, &y)?;
    let coordinate_route = bracket.apply(&p)?.comps;

    let chart = m.covering_chart(&p)?;
    let mut derivation_route = Vec::with_capacity(e);
    for i in 0..e {
        let chi = coord_test_function(chart, &p, i)?;
        derivation_route.push(bracket_derivation_apply(&x, &y, &p, &chi)?);
    }
    let discrepancy = max_abs_diff(&coordinate_route, &derivation_route);
    Ok(BracketOutput {
        point: p,
        coordinate_route,
        derivation_route,
        discrepancy,
    })
}
