//! Jet-evaluable maps between Euclidean spaces and their combinators.
//!
//! A [`RealMap`] is a total map ℝᵐ → ℝⁿ that can be queried for plain values
//! and for jets (derivative data) at any point. Most maps are built as
//! closures over [`Taylor`] scalars, so the chain and product rules are
//! applied by the arithmetic itself; maps that *produce* derivative data
//! (like [`map_partial`]) provide jets directly.

use std::sync::Arc;

use super::jet::Jet;
use super::taylor::{substitute, Ctx, Taylor};
use crate::error::{Error, Result};

/// Default cap on jet order. Triple-nested bracket computations need three
/// derivative orders below the cap, hence 4.
pub const DEFAULT_MAX_ORDER: usize = 4;

type ClosureFn = dyn Fn(&[Taylor]) -> Vec<Taylor> + Send + Sync;
type JetProviderFn = dyn Fn(&[f64], usize) -> Result<Vec<Taylor>> + Send + Sync;

#[derive(Clone)]
enum Kind {
    /// Generic arithmetic on Taylor scalars; differentiable to any order.
    Closure(Arc<ClosureFn>),
    /// Direct jet provider `(point, order) -> expansions`.
    JetFn(Arc<JetProviderFn>),
}

/// A total map ℝᵐ → ℝⁿ with jet evaluation up to a per-map order cap.
#[derive(Clone)]
pub struct RealMap {
    in_dim: usize,
    out_dim: usize,
    max_order: usize,
    kind: Kind,
}

impl std::fmt::Debug for RealMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "RealMap({} -> {}, max_order {})",
            self.in_dim, self.out_dim, self.max_order
        )
    }
}

impl RealMap {
    /// Build a map from arithmetic on Taylor scalars. The closure receives
    /// one scalar per input variable and must return `out_dim` outputs.
    pub fn new<F>(in_dim: usize, out_dim: usize, f: F) -> RealMap
    where
        F: Fn(&[Taylor]) -> Vec<Taylor> + Send + Sync + 'static,
    {
        assert!(
            in_dim >= 1 && out_dim >= 1,
            "map dimensions must be positive"
        );
        RealMap {
            in_dim,
            out_dim,
            max_order: DEFAULT_MAX_ORDER,
            kind: Kind::Closure(Arc::new(f)),
        }
    }

    /// Build a scalar-valued map.
    pub fn scalar<F>(in_dim: usize, f: F) -> RealMap
    where
        F: Fn(&[Taylor]) -> Taylor + Send + Sync + 'static,
    {
        RealMap::new(in_dim, 1, move |xs| vec![f(xs)])
    }

    /// Build a map from a direct jet provider. The provider receives the
    /// evaluation point and the requested order and returns one expansion per
    /// output coordinate (in a `Ctx::get(in_dim, order)` layout).
    pub fn from_jet_fn<F>(in_dim: usize, out_dim: usize, max_order: usize, f: F) -> RealMap
    where
        F: Fn(&[f64], usize) -> Result<Vec<Taylor>> + Send + Sync + 'static,
    {
        RealMap {
            in_dim,
            out_dim,
            max_order,
            kind: Kind::JetFn(Arc::new(f)),
        }
    }

    pub fn with_max_order(mut self, max_order: usize) -> RealMap {
        self.max_order = max_order;
        self
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// Taylor expansions of every output coordinate at `p`.
    pub fn jet_series(&self, p: &[f64], order: usize) -> Result<Vec<Taylor>> {
        if p.len() != self.in_dim {
            return Err(Error::dim(self.in_dim, p.len(), "map evaluation point"));
        }
        if order > self.max_order {
            return Err(Error::UnsupportedOrder {
                requested: order,
                max: self.max_order,
            });
        }
        let out = match &self.kind {
            Kind::Closure(f) => {
                let ctx = Ctx::get(self.in_dim, order);
                let vars: Vec<Taylor> = p
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| Taylor::variable(Arc::clone(&ctx), v, i))
                    .collect();
                f(&vars)
            }
            Kind::JetFn(f) => f(p, order)?,
        };
        debug_assert_eq!(out.len(), self.out_dim, "map returned wrong arity");
        Ok(out)
    }

    /// Jets of every output coordinate at `p` up to `order`.
    ///
    /// This is the `jet_eval` operation: derivative tensors computed by
    /// forward propagation of truncated Taylor arithmetic.
    pub fn jet_eval(&self, p: &[f64], order: usize) -> Result<Vec<Jet>> {
        Ok(self
            .jet_series(p, order)?
            .iter()
            .map(Jet::from_series)
            .collect())
    }

    /// Plain evaluation (an order-0 jet).
    pub fn eval(&self, p: &[f64]) -> Result<Vec<f64>> {
        Ok(self.jet_series(p, 0)?.iter().map(|t| t.value()).collect())
    }

    /// Evaluate a scalar map.
    pub fn eval_scalar(&self, p: &[f64]) -> Result<f64> {
        let v = self.eval(p)?;
        Ok(v[0])
    }

    /// Jacobian matrix at `p` as `out_dim` rows of length `in_dim`.
    pub fn jacobian(&self, p: &[f64]) -> Result<Vec<Vec<f64>>> {
        let jets = self.jet_eval(p, 1)?;
        Ok(jets.iter().map(|j| j.gradient().to_vec()).collect())
    }

    /// The identity on ℝⁿ.
    pub fn identity(n: usize) -> RealMap {
        RealMap::new(n, n, |xs| xs.to_vec())
    }

    /// The constant map to `values`.
    pub fn constant(in_dim: usize, values: Vec<f64>) -> RealMap {
        assert!(!values.is_empty());
        RealMap::new(in_dim, values.len(), move |xs| {
            values.iter().map(|&v| xs[0].lift(v)).collect()
        })
    }

    /// Affine map `x ↦ A x + b` with `A` given as rows.
    pub fn affine(matrix: Vec<Vec<f64>>, offset: Vec<f64>) -> RealMap {
        let out_dim = matrix.len();
        let in_dim = matrix[0].len();
        assert_eq!(out_dim, offset.len());
        assert!(matrix.iter().all(|row| row.len() == in_dim));
        RealMap::new(in_dim, out_dim, move |xs| {
            matrix
                .iter()
                .zip(&offset)
                .map(|(row, &b)| {
                    let mut acc = xs[0].lift(b);
                    for (x, &a) in xs.iter().zip(row) {
                        if a != 0.0 {
                            acc = acc.add(&x.scale(a));
                        }
                    }
                    acc
                })
                .collect()
        })
    }

    /// Select output coordinates `indices` of the input.
    pub fn projection(in_dim: usize, indices: Vec<usize>) -> RealMap {
        assert!(indices.iter().all(|&i| i < in_dim));
        RealMap::new(in_dim, indices.len(), move |xs| {
            indices.iter().map(|&i| xs[i].clone()).collect()
        })
    }

    /// Select one output coordinate of this map.
    pub fn component(&self, i: usize) -> RealMap {
        assert!(i < self.out_dim);
        let inner = self.clone();
        RealMap::from_jet_fn(self.in_dim, 1, self.max_order, move |p, k| {
            let s = inner.jet_series(p, k)?;
            Ok(vec![s[i].clone()])
        })
    }
}

fn check_same_shape(f: &RealMap, g: &RealMap, context: &'static str) -> Result<()> {
    if f.in_dim != g.in_dim {
        return Err(Error::dim(f.in_dim, g.in_dim, context));
    }
    if f.out_dim != g.out_dim {
        return Err(Error::dim(f.out_dim, g.out_dim, context));
    }
    Ok(())
}

/// Composition `g ∘ f`. The chain rule is realized by Taylor substitution.
pub fn map_compose(g: &RealMap, f: &RealMap) -> Result<RealMap> {
    if f.out_dim != g.in_dim {
        return Err(Error::dim(g.in_dim, f.out_dim, "composition arity"));
    }
    let max_order = f.max_order.min(g.max_order);
    let composed = match (&f.kind, &g.kind) {
        (Kind::Closure(fc), Kind::Closure(gc)) => {
            let fc = Arc::clone(fc);
            let gc = Arc::clone(gc);
            RealMap {
                in_dim: f.in_dim,
                out_dim: g.out_dim,
                max_order,
                kind: Kind::Closure(Arc::new(move |xs| gc(&fc(xs)))),
            }
        }
        _ => {
            let f = f.clone();
            let g = g.clone();
            RealMap::from_jet_fn(f.in_dim, g.out_dim, max_order, move |p, k| {
                let inner = f.jet_series(p, k)?;
                match &g.kind {
                    Kind::Closure(gc) => Ok(gc(&inner)),
                    Kind::JetFn(_) => {
                        let mid: Vec<f64> = inner.iter().map(|t| t.value()).collect();
                        let outer = g.jet_series(&mid, k)?;
                        Ok(substitute(&outer, &inner))
                    }
                }
            })
        }
    };
    Ok(composed)
}

fn lift2(
    f: &RealMap,
    g: &RealMap,
    out_dim: usize,
    op: impl Fn(&[Taylor], &[Taylor]) -> Vec<Taylor> + Send + Sync + 'static,
) -> RealMap {
    let max_order = f.max_order.min(g.max_order);
    match (&f.kind, &g.kind) {
        (Kind::Closure(fc), Kind::Closure(gc)) => {
            let fc = Arc::clone(fc);
            let gc = Arc::clone(gc);
            RealMap {
                in_dim: f.in_dim,
                out_dim,
                max_order,
                kind: Kind::Closure(Arc::new(move |xs| op(&fc(xs), &gc(xs)))),
            }
        }
        _ => {
            let f = f.clone();
            let g = g.clone();
            RealMap::from_jet_fn(f.in_dim, out_dim, max_order, move |p, k| {
                Ok(op(&f.jet_series(p, k)?, &g.jet_series(p, k)?))
            })
        }
    }
}

/// Pointwise sum of two maps of equal shape.
pub fn map_add(f: &RealMap, g: &RealMap) -> Result<RealMap> {
    check_same_shape(f, g, "pointwise sum")?;
    Ok(lift2(f, g, f.out_dim, |a, b| {
        a.iter().zip(b).map(|(x, y)| x.add(y)).collect()
    }))
}

/// Pointwise difference.
pub fn map_sub(f: &RealMap, g: &RealMap) -> Result<RealMap> {
    check_same_shape(f, g, "pointwise difference")?;
    Ok(lift2(f, g, f.out_dim, |a, b| {
        a.iter().zip(b).map(|(x, y)| x.sub(y)).collect()
    }))
}

/// Pointwise (componentwise) product.
pub fn map_mul(f: &RealMap, g: &RealMap) -> Result<RealMap> {
    check_same_shape(f, g, "pointwise product")?;
    Ok(lift2(f, g, f.out_dim, |a, b| {
        a.iter().zip(b).map(|(x, y)| x.mul(y)).collect()
    }))
}

/// Scalar multiple `s · f`.
pub fn map_scale(s: f64, f: &RealMap) -> RealMap {
    let f = f.clone();
    RealMap::from_jet_fn(f.in_dim, f.out_dim, f.max_order, move |p, k| {
        Ok(f.jet_series(p, k)?.iter().map(|t| t.scale(s)).collect())
    })
}

/// Partial derivative `∂f/∂x_var` as a map; one jet order dearer than `f`.
pub fn map_partial(f: &RealMap, var: usize) -> Result<RealMap> {
    if var >= f.in_dim {
        return Err(Error::dim(f.in_dim, var + 1, "partial derivative variable"));
    }
    if f.max_order == 0 {
        return Err(Error::UnsupportedOrder {
            requested: 1,
            max: 0,
        });
    }
    let inner = f.clone();
    Ok(RealMap::from_jet_fn(
        f.in_dim,
        f.out_dim,
        f.max_order - 1,
        move |p, k| {
            let s = inner.jet_series(p, k + 1)?;
            Ok(s.iter().map(|t| t.derive(var)).collect())
        },
    ))
}

/// `x ↦ J_tau(x) · v(x)`: the Jacobian of `tau` applied to the vector map
/// `v`, evaluated pointwise. Shapes: `tau: ℝᵐ → ℝⁿ`, `v: ℝᵐ → ℝᵐ`.
pub fn map_jacobian_apply(tau: &RealMap, v: &RealMap) -> Result<RealMap> {
    if tau.in_dim != v.in_dim {
        return Err(Error::dim(tau.in_dim, v.in_dim, "jacobian-apply inputs"));
    }
    if v.out_dim != tau.in_dim {
        return Err(Error::dim(tau.in_dim, v.out_dim, "jacobian-apply vector"));
    }
    if tau.max_order == 0 {
        return Err(Error::UnsupportedOrder {
            requested: 1,
            max: 0,
        });
    }
    let tau = tau.clone();
    let v = v.clone();
    let max_order = (tau.max_order - 1).min(v.max_order);
    Ok(RealMap::from_jet_fn(
        tau.in_dim,
        tau.out_dim,
        max_order,
        move |p, k| {
            let st = tau.jet_series(p, k + 1)?;
            let sv = v.jet_series(p, k)?;
            let out = st
                .iter()
                .map(|ti| {
                    let mut acc: Option<Taylor> = None;
                    for (j, vj) in sv.iter().enumerate() {
                        let term = ti.derive(j).mul(vj);
                        acc = Some(match acc {
                            None => term,
                            Some(a) => a.add(&term),
                        });
                    }
                    acc.expect("at least one input variable")
                })
                .collect();
            Ok(out)
        },
    ))
}

/// Fix some input coordinates to constants, producing a map on the rest.
/// `fixed` lists (input index, value) pairs.
pub fn map_fix(f: &RealMap, fixed: &[(usize, f64)]) -> Result<RealMap> {
    let mut is_fixed = vec![None; f.in_dim];
    for &(i, v) in fixed {
        if i >= f.in_dim {
            return Err(Error::dim(f.in_dim, i + 1, "fixed input index"));
        }
        is_fixed[i] = Some(v);
    }
    let free: Vec<usize> = (0..f.in_dim).filter(|&i| is_fixed[i].is_none()).collect();
    if free.is_empty() {
        return Err(Error::Invalid("cannot fix every input of a map".into()));
    }
    let new_in = free.len();
    let inner = f.clone();
    let max_order = f.max_order;
    Ok(match &f.kind {
        Kind::Closure(fc) => {
            let fc = Arc::clone(fc);
            RealMap {
                in_dim: new_in,
                out_dim: f.out_dim,
                max_order,
                kind: Kind::Closure(Arc::new(move |xs| {
                    let mut full = Vec::with_capacity(is_fixed.len());
                    let mut next = 0;
                    for slot in &is_fixed {
                        match slot {
                            Some(v) => full.push(xs[0].lift(*v)),
                            None => {
                                full.push(xs[next].clone());
                                next += 1;
                            }
                        }
                    }
                    fc(&full)
                })),
            }
        }
        Kind::JetFn(_) => RealMap::from_jet_fn(new_in, f.out_dim, max_order, move |p, k| {
            let ctx = Ctx::get(p.len(), k);
            let mut full_point = Vec::with_capacity(is_fixed.len());
            let mut inners = Vec::with_capacity(is_fixed.len());
            let mut next = 0;
            for slot in &is_fixed {
                match slot {
                    Some(v) => {
                        full_point.push(*v);
                        inners.push(Taylor::constant(Arc::clone(&ctx), *v));
                    }
                    None => {
                        full_point.push(p[next]);
                        inners.push(Taylor::variable(Arc::clone(&ctx), p[next], next));
                        next += 1;
                    }
                }
            }
            let s = inner.jet_series(&full_point, k)?;
            Ok(substitute(&s, &inners))
        }),
    })
}

/// Product map `(x, y) ↦ (f(x), g(y))`.
pub fn map_pair(f: &RealMap, g: &RealMap) -> RealMap {
    let (fi, gi) = (f.in_dim, g.in_dim);
    let in_dim = fi + gi;
    let out_dim = f.out_dim + g.out_dim;
    match (&f.kind, &g.kind) {
        (Kind::Closure(fc), Kind::Closure(gc)) => {
            let fc = Arc::clone(fc);
            let gc = Arc::clone(gc);
            RealMap {
                in_dim,
                out_dim,
                max_order: f.max_order.min(g.max_order),
                kind: Kind::Closure(Arc::new(move |xs| {
                    let mut out = fc(&xs[..fi]);
                    out.extend(gc(&xs[fi..]));
                    out
                })),
            }
        }
        _ => {
            let f = f.clone();
            let g = g.clone();
            RealMap::from_jet_fn(
                in_dim,
                out_dim,
                f.max_order.min(g.max_order),
                move |p, k| {
                    let ctx = Ctx::get(in_dim, k);
                    let sf = f.jet_series(&p[..fi], k)?;
                    let sg = g.jet_series(&p[fi..], k)?;
                    let embed = |series: &[Taylor], offset: usize, arity: usize| {
                        let inners: Vec<Taylor> = (0..arity)
                            .map(|i| Taylor::variable(Arc::clone(&ctx), p[offset + i], offset + i))
                            .collect();
                        substitute(series, &inners)
                    };
                    let mut out = embed(&sf, 0, fi);
                    out.extend(embed(&sg, fi, gi));
                    Ok(out)
                },
            )
        }
    }
}

/// Stack outputs of two maps over the same input: `x ↦ (f(x), g(x))`.
pub fn map_stack(f: &RealMap, g: &RealMap) -> Result<RealMap> {
    if f.in_dim != g.in_dim {
        return Err(Error::dim(f.in_dim, g.in_dim, "stacked maps input"));
    }
    Ok(lift2(f, g, f.out_dim + g.out_dim, |a, b| {
        let mut out = a.to_vec();
        out.extend_from_slice(b);
        out
    }))
}
