//! Truncated multivariate Taylor arithmetic.
//!
//! `Taylor` is the scalar that flows through every map in this crate. It
//! carries the value of an expression at a point together with all mixed
//! partial derivatives up to a truncation order `K`, stored as polynomial
//! coefficients `c_α = ∂^α f / α!` over multi-indices `|α| ≤ K`. Arithmetic
//! and elementary functions propagate these coefficients exactly (product
//! rule, chain rule), so derivative extraction is exact up to floating-point
//! rounding, with no step-size error.
//!
//! Singular operations (division by zero value, `sqrt` at zero, ...) do not
//! error; they produce non-finite coefficients that downstream probes detect
//! via [`Taylor::is_finite`].

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Largest `n × n` product table we are willing to materialize (entries).
/// Larger layouts fall back to per-entry index ranking.
const PROD_TABLE_LIMIT: usize = 4_000_000;

fn factorial(j: usize) -> f64 {
    const TABLE: [f64; 13] = [
        1.0,
        1.0,
        2.0,
        6.0,
        24.0,
        120.0,
        720.0,
        5040.0,
        40320.0,
        362880.0,
        3628800.0,
        39916800.0,
        479001600.0,
    ];
    TABLE[j]
}

/// Coefficient layout shared by all `Taylor` values of one (dim, order) pair.
///
/// Multi-indices are enumerated degree block by degree block; within a block
/// the leading exponent ascends. `prod` caches the index of `α + β` for every
/// pair, which makes multiplication a flat double loop.
pub struct Ctx {
    dim: usize,
    order: usize,
    midx: Vec<Box<[u8]>>,
    /// start of each degree block; `deg_offsets[d]..deg_offsets[d+1]`
    deg_offsets: Vec<usize>,
    pos: HashMap<Box<[u8]>, u32>,
    prod: Option<Vec<u32>>,
    /// α! per index
    fact: Vec<f64>,
    /// total degree per index
    deg: Vec<u8>,
}

fn gen_degree(out: &mut Vec<Vec<u8>>, prefix: &mut Vec<u8>, d: usize, vars: usize) {
    if vars == 1 {
        prefix.push(d as u8);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for e in 0..=d {
        prefix.push(e as u8);
        gen_degree(out, prefix, d - e, vars - 1);
        prefix.pop();
    }
}

impl Ctx {
    /// Fetch (or build) the shared layout for `dim` variables at order `order`.
    pub fn get(dim: usize, order: usize) -> Arc<Ctx> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Ctx>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("ctx cache poisoned");
        if let Some(ctx) = guard.get(&(dim, order)) {
            return Arc::clone(ctx);
        }
        let ctx = Arc::new(Ctx::build(dim, order));
        guard.insert((dim, order), Arc::clone(&ctx));
        ctx
    }

    fn build(dim: usize, order: usize) -> Ctx {
        assert!(dim >= 1, "Taylor context needs at least one variable");
        let mut midx: Vec<Vec<u8>> = Vec::new();
        let mut deg_offsets = Vec::with_capacity(order + 2);
        for d in 0..=order {
            deg_offsets.push(midx.len());
            gen_degree(&mut midx, &mut Vec::new(), d, dim);
        }
        deg_offsets.push(midx.len());
        let midx: Vec<Box<[u8]>> = midx.into_iter().map(Vec::into_boxed_slice).collect();
        let n = midx.len();

        let mut pos = HashMap::with_capacity(n);
        for (i, a) in midx.iter().enumerate() {
            pos.insert(a.clone(), i as u32);
        }
        let fact: Vec<f64> = midx
            .iter()
            .map(|a| a.iter().map(|&e| factorial(e as usize)).product())
            .collect();
        let deg: Vec<u8> = midx.iter().map(|a| a.iter().sum()).collect();

        let prod = if n * n <= PROD_TABLE_LIMIT {
            let mut table = vec![u32::MAX; n * n];
            let mut sum = vec![0u8; dim];
            for i in 0..n {
                for j in 0..n {
                    if (deg[i] + deg[j]) as usize > order {
                        continue;
                    }
                    for v in 0..dim {
                        sum[v] = midx[i][v] + midx[j][v];
                    }
                    table[i * n + j] = pos[&sum[..]];
                }
            }
            Some(table)
        } else {
            None
        };

        Ctx {
            dim,
            order,
            midx,
            deg_offsets,
            pos,
            prod,
            fact,
            deg,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.midx.len()
    }

    fn index_of(&self, alpha: &[u8]) -> Option<usize> {
        self.pos.get(alpha).map(|&i| i as usize)
    }

    /// Index of the multi-index with a single 1 at `var`.
    fn unit_index(&self, var: usize) -> usize {
        debug_assert!(self.order >= 1);
        let mut a = vec![0u8; self.dim];
        a[var] = 1;
        self.index_of(&a).expect("unit multi-index present")
    }

    /// `α!` for the multi-index at `idx`.
    pub fn alpha_factorial(&self, idx: usize) -> f64 {
        self.fact[idx]
    }

    pub fn multi_index(&self, idx: usize) -> &[u8] {
        &self.midx[idx]
    }

    /// End of the coefficient range holding degrees `0..=d`.
    fn degree_end(&self, d: usize) -> usize {
        self.deg_offsets[d.min(self.order) + 1]
    }
}

/// A truncated Taylor expansion of a scalar expression at a point.
#[derive(Clone)]
pub struct Taylor {
    ctx: Arc<Ctx>,
    c: Vec<f64>,
}

impl std::fmt::Debug for Taylor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Taylor")
            .field("dim", &self.ctx.dim)
            .field("order", &self.ctx.order)
            .field("value", &self.c[0])
            .finish()
    }
}

impl Taylor {
    pub fn constant(ctx: Arc<Ctx>, v: f64) -> Taylor {
        let mut c = vec![0.0; ctx.len()];
        c[0] = v;
        Taylor { ctx, c }
    }

    /// The `var`-th input variable seeded at `v`: value `v`, unit first
    /// derivative along `var`, zero elsewhere.
    pub fn variable(ctx: Arc<Ctx>, v: f64, var: usize) -> Taylor {
        assert!(var < ctx.dim, "variable index out of range");
        let mut c = vec![0.0; ctx.len()];
        c[0] = v;
        if ctx.order >= 1 {
            let i = ctx.unit_index(var);
            c[i] = 1.0;
        }
        Taylor { ctx, c }
    }

    /// A constant with the same layout as `self`.
    pub fn lift(&self, v: f64) -> Taylor {
        Taylor::constant(Arc::clone(&self.ctx), v)
    }

    pub fn ctx(&self) -> &Arc<Ctx> {
        &self.ctx
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn order(&self) -> usize {
        self.ctx.order
    }

    pub fn dim(&self) -> usize {
        self.ctx.dim
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    /// Coefficient `c_α`; zero when `α` is absent (degree above order).
    pub fn coeff(&self, alpha: &[u8]) -> f64 {
        self.ctx.index_of(alpha).map_or(0.0, |i| self.c[i])
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|x| x.is_finite())
    }

    /// Drop coefficients above `order`.
    pub fn truncate(&self, order: usize) -> Taylor {
        if order >= self.ctx.order {
            return self.clone();
        }
        let ctx = Ctx::get(self.ctx.dim, order);
        let c = self.c[..ctx.len()].to_vec();
        Taylor { ctx, c }
    }

    fn align(a: &Taylor, b: &Taylor) -> (Taylor, Taylor) {
        assert_eq!(
            a.ctx.dim, b.ctx.dim,
            "Taylor operands live in different variable spaces"
        );
        if Arc::ptr_eq(&a.ctx, &b.ctx) {
            return (a.clone(), b.clone());
        }
        let k = a.ctx.order.min(b.ctx.order);
        (a.truncate(k), b.truncate(k))
    }

    pub fn add(&self, rhs: &Taylor) -> Taylor {
        let (mut a, b) = Taylor::align(self, rhs);
        for (x, y) in a.c.iter_mut().zip(&b.c) {
            *x += y;
        }
        a
    }

    pub fn sub(&self, rhs: &Taylor) -> Taylor {
        let (mut a, b) = Taylor::align(self, rhs);
        for (x, y) in a.c.iter_mut().zip(&b.c) {
            *x -= y;
        }
        a
    }

    pub fn neg(&self) -> Taylor {
        let mut a = self.clone();
        for x in a.c.iter_mut() {
            *x = -*x;
        }
        a
    }

    pub fn scale(&self, s: f64) -> Taylor {
        let mut a = self.clone();
        for x in a.c.iter_mut() {
            *x *= s;
        }
        a
    }

    pub fn add_const(&self, v: f64) -> Taylor {
        let mut a = self.clone();
        a.c[0] += v;
        a
    }

    pub fn mul(&self, rhs: &Taylor) -> Taylor {
        let (a, b) = Taylor::align(self, rhs);
        let ctx = Arc::clone(&a.ctx);
        let n = ctx.len();
        let order = ctx.order;
        let mut out = vec![0.0; n];
        if let Some(prod) = &ctx.prod {
            for i in 0..n {
                let av = a.c[i];
                if av == 0.0 {
                    continue;
                }
                let jmax = ctx.degree_end(order - ctx.deg[i] as usize);
                let row = &prod[i * n..i * n + jmax];
                for (j, &p) in row.iter().enumerate() {
                    let bv = b.c[j];
                    if bv == 0.0 || p == u32::MAX {
                        continue;
                    }
                    out[p as usize] += av * bv;
                }
            }
        } else {
            let mut sum = vec![0u8; ctx.dim];
            for i in 0..n {
                let av = a.c[i];
                if av == 0.0 {
                    continue;
                }
                let jmax = ctx.degree_end(order - ctx.deg[i] as usize);
                for j in 0..jmax {
                    let bv = b.c[j];
                    if bv == 0.0 {
                        continue;
                    }
                    for v in 0..ctx.dim {
                        sum[v] = ctx.midx[i][v] + ctx.midx[j][v];
                    }
                    if let Some(p) = ctx.index_of(&sum) {
                        out[p] += av * bv;
                    }
                }
            }
        }
        Taylor { ctx, c: out }
    }

    /// Compose with a univariate function given its derivatives at the value:
    /// `derivs[j] = f⁽ʲ⁾(self.value())` for `j = 0..=order`.
    pub fn apply_univariate(&self, derivs: &[f64]) -> Taylor {
        let k = self.ctx.order;
        assert!(derivs.len() > k, "need derivatives up to the context order");
        let mut nil = self.clone();
        nil.c[0] = 0.0;
        let mut res = self.lift(derivs[k] / factorial(k));
        for j in (0..k).rev() {
            res = res.mul(&nil);
            res.c[0] += derivs[j] / factorial(j);
        }
        res
    }

    pub fn recip(&self) -> Taylor {
        let u = self.value();
        let k = self.ctx.order;
        let mut d = vec![0.0; k + 1];
        let mut acc = 1.0 / u;
        for (j, slot) in d.iter_mut().enumerate() {
            *slot = acc;
            acc *= -((j + 1) as f64) / u;
        }
        self.apply_univariate(&d)
    }

    pub fn div(&self, rhs: &Taylor) -> Taylor {
        self.mul(&rhs.recip())
    }

    pub fn exp(&self) -> Taylor {
        let e = self.value().exp();
        let d = vec![e; self.ctx.order + 1];
        self.apply_univariate(&d)
    }

    pub fn ln(&self) -> Taylor {
        let u = self.value();
        let k = self.ctx.order;
        let mut d = vec![0.0; k + 1];
        d[0] = u.ln();
        let mut sign = 1.0;
        for j in 1..=k {
            d[j] = sign * factorial(j - 1) / u.powi(j as i32);
            sign = -sign;
        }
        self.apply_univariate(&d)
    }

    pub fn sin(&self) -> Taylor {
        let (s, c) = self.value().sin_cos();
        let cycle = [s, c, -s, -c];
        let d: Vec<f64> = (0..=self.ctx.order).map(|j| cycle[j % 4]).collect();
        self.apply_univariate(&d)
    }

    pub fn cos(&self) -> Taylor {
        let (s, c) = self.value().sin_cos();
        let cycle = [c, -s, -c, s];
        let d: Vec<f64> = (0..=self.ctx.order).map(|j| cycle[j % 4]).collect();
        self.apply_univariate(&d)
    }

    /// Real power with fractional exponent; derivatives are singular at 0.
    pub fn powf(&self, r: f64) -> Taylor {
        let u = self.value();
        let k = self.ctx.order;
        let mut d = vec![0.0; k + 1];
        let mut coeff = 1.0;
        for (j, slot) in d.iter_mut().enumerate() {
            *slot = coeff * u.powf(r - j as f64);
            coeff *= r - j as f64;
        }
        self.apply_univariate(&d)
    }

    pub fn sqrt(&self) -> Taylor {
        self.powf(0.5)
    }

    /// Real cube root (defined for negative values, singular at 0).
    pub fn cbrt(&self) -> Taylor {
        let u = self.value();
        let k = self.ctx.order;
        let root = u.cbrt();
        let mut d = vec![0.0; k + 1];
        let mut coeff = 1.0;
        for (j, slot) in d.iter_mut().enumerate() {
            // u^(1/3 - j) written as cbrt(u) / u^j to stay real for u < 0
            *slot = coeff * root / u.powi(j as i32);
            coeff *= 1.0 / 3.0 - j as f64;
        }
        self.apply_univariate(&d)
    }

    /// Integer power, exact for polynomials (valid at zero values).
    pub fn powi(&self, n: i32) -> Taylor {
        if n < 0 {
            return self.powi(-n).recip();
        }
        let u = self.value();
        let k = self.ctx.order;
        let n = n as usize;
        let mut d = vec![0.0; k + 1];
        for (j, slot) in d.iter_mut().enumerate() {
            if j > n {
                break;
            }
            let mut coeff = 1.0;
            for i in 0..j {
                coeff *= (n - i) as f64;
            }
            *slot = coeff * u.powi((n - j) as i32);
        }
        self.apply_univariate(&d)
    }

    /// Branch on the sign of the value. At exactly zero the positive branch
    /// is taken; the resulting (wrong) derivatives at a kink are exactly what
    /// finite-difference probes are there to catch.
    pub fn abs(&self) -> Taylor {
        if self.value() >= 0.0 {
            self.clone()
        } else {
            self.neg()
        }
    }

    /// Partial derivative with respect to variable `var`, one order lower.
    pub fn derive(&self, var: usize) -> Taylor {
        assert!(
            self.ctx.order >= 1,
            "cannot differentiate an order-0 expansion"
        );
        let ctx = Ctx::get(self.ctx.dim, self.ctx.order - 1);
        let mut c = vec![0.0; ctx.len()];
        let mut alpha = vec![0u8; self.ctx.dim];
        for (i, slot) in c.iter_mut().enumerate() {
            alpha.copy_from_slice(ctx.multi_index(i));
            alpha[var] += 1;
            let src = self
                .ctx
                .index_of(&alpha)
                .expect("shifted multi-index present");
            *slot = self.c[src] * alpha[var] as f64;
        }
        Taylor { ctx, c }
    }
}

/// Substitute expansions `inners` into the expansions `outers`.
///
/// `outers` must be expanded at the point `(inners[0].value(), ...,
/// inners[n-1].value())`; the result is the expansion of the composite in the
/// inners' variables. All orders must agree.
pub fn substitute(outers: &[Taylor], inners: &[Taylor]) -> Vec<Taylor> {
    assert!(!inners.is_empty());
    let inner_ctx = Arc::clone(inners[0].ctx());
    for t in inners {
        assert!(Arc::ptr_eq(t.ctx(), &inner_ctx), "inner layouts must match");
    }
    let k = inner_ctx.order;

    // powers[i][e] = (inner_i - value_i)^e
    let one = Taylor::constant(Arc::clone(&inner_ctx), 1.0);
    let powers: Vec<Vec<Taylor>> = inners
        .iter()
        .map(|t| {
            let mut nil = t.clone();
            nil.c[0] = 0.0;
            let mut col = Vec::with_capacity(k + 1);
            col.push(one.clone());
            for e in 1..=k {
                let prev = &col[e - 1];
                col.push(prev.mul(&nil));
            }
            col
        })
        .collect();

    outers
        .iter()
        .map(|outer| {
            assert_eq!(
                outer.ctx().dim,
                inners.len(),
                "arity mismatch in substitution"
            );
            assert_eq!(outer.ctx().order, k, "order mismatch in substitution");
            let mut res = Taylor::constant(Arc::clone(&inner_ctx), 0.0);
            for (idx, &cv) in outer.coeffs().iter().enumerate() {
                if cv == 0.0 {
                    continue;
                }
                let alpha = outer.ctx().multi_index(idx);
                let mut term: Option<Taylor> = None;
                for (i, &e) in alpha.iter().enumerate() {
                    if e == 0 {
                        continue;
                    }
                    let p = &powers[i][e as usize];
                    term = Some(match term {
                        None => p.clone(),
                        Some(t) => t.mul(p),
                    });
                }
                match term {
                    None => res.c[0] += cv,
                    Some(t) => {
                        for (x, y) in res.c.iter_mut().zip(&t.c) {
                            *x += cv * y;
                        }
                    }
                }
            }
            res
        })
        .collect()
}

macro_rules! impl_binop {
    ($trait:ident, $fn:ident) => {
        impl std::ops::$trait for &Taylor {
            type Output = Taylor;
            fn $fn(self, rhs: &Taylor) -> Taylor {
                Taylor::$fn(self, rhs)
            }
        }
        impl std::ops::$trait for Taylor {
            type Output = Taylor;
            fn $fn(self, rhs: Taylor) -> Taylor {
                Taylor::$fn(&self, &rhs)
            }
        }
    };
}

impl_binop!(Add, add);
impl_binop!(Sub, sub);
impl_binop!(Mul, mul);
impl_binop!(Div, div);

impl std::ops::Neg for &Taylor {
    type Output = Taylor;
    fn neg(self) -> Taylor {
        Taylor::neg(self)
    }
}

impl std::ops::Neg for Taylor {
    type Output = Taylor;
    fn neg(self) -> Taylor {
        Taylor::neg(&self)
    }
}
