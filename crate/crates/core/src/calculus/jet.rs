//! Jets: dense derivative tensors of a scalar map at a point.

use super::taylor::Taylor;
use crate::error::{Error, Result};

/// Truncated derivative data of one scalar output at a point: the value and
/// all derivative tensors up to `order`. The rank-`r` tensor is stored dense
/// with `dim^r` entries in row-major index order and is symmetric under index
/// permutation by construction (entries of equal multi-index are written from
/// the same Taylor coefficient).
#[derive(Debug, Clone)]
pub struct Jet {
    dim: usize,
    order: usize,
    tensors: Vec<Vec<f64>>,
}

impl Jet {
    /// Expand a Taylor series into dense derivative tensors,
    /// `T[i₁..i_r] = ∂_{i₁}..∂_{i_r} f = c_α · α!`.
    pub fn from_series(series: &Taylor) -> Jet {
        let dim = series.dim();
        let order = series.order();
        let mut tensors = Vec::with_capacity(order + 1);
        let mut alpha = vec![0u8; dim];
        for r in 0..=order {
            let size = dim.pow(r as u32);
            let mut t = vec![0.0; size];
            let mut idx = vec![0usize; r];
            for flat in 0..size {
                // decode flat index into r axis indices
                let mut rem = flat;
                for slot in idx.iter_mut().rev() {
                    *slot = rem % dim;
                    rem /= dim;
                }
                alpha.iter_mut().for_each(|a| *a = 0);
                for &i in &idx {
                    alpha[i] += 1;
                }
                let c = series.coeff(&alpha);
                // c_α · α! is the mixed partial for this index multiset
                let fact: f64 = alpha
                    .iter()
                    .map(|&e| (1..=e as u64).product::<u64>() as f64)
                    .product();
                t[flat] = c * fact;
            }
            tensors.push(t);
        }
        Jet {
            dim,
            order,
            tensors,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.tensors[0][0]
    }

    /// The rank-1 tensor (the gradient). Panics if order 0.
    pub fn gradient(&self) -> &[f64] {
        &self.tensors[1]
    }

    /// The dense rank-`r` tensor.
    pub fn tensor(&self, r: usize) -> &[f64] {
        &self.tensors[r]
    }

    /// Entry of the rank-`indices.len()` tensor.
    pub fn partial(&self, indices: &[usize]) -> Result<f64> {
        let r = indices.len();
        if r > self.order {
            return Err(Error::UnsupportedOrder {
                requested: r,
                max: self.order,
            });
        }
        let mut flat = 0usize;
        for &i in indices {
            if i >= self.dim {
                return Err(Error::dim(self.dim, i + 1, "jet partial index"));
            }
            flat = flat * self.dim + i;
        }
        Ok(self.tensors[r][flat])
    }

    pub fn is_finite(&self) -> bool {
        self.tensors.iter().all(|t| t.iter().all(|x| x.is_finite()))
    }

    /// Maximum absolute deviation from index-permutation symmetry over all
    /// tensors. Zero for jets built by `from_series`.
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 2..=self.order {
            let t = &self.tensors[r];
            let size = t.len();
            let mut idx = vec![0usize; r];
            for flat in 0..size {
                let mut rem = flat;
                for slot in idx.iter_mut().rev() {
                    *slot = rem % self.dim;
                    rem /= self.dim;
                }
                // compare against the sorted-index representative
                let mut sorted = idx.clone();
                sorted.sort_unstable();
                let mut rep = 0usize;
                for &i in &sorted {
                    rep = rep * self.dim + i;
                }
                worst = worst.max((t[flat] - t[rep]).abs());
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::taylor::Ctx;

    #[test]
    fn tensors_from_series() {
        // f(x, y) = x^2 y at (2, 3)
        let ctx = Ctx::get(2, 2);
        let x = Taylor::variable(std::sync::Arc::clone(&ctx), 2.0, 0);
        let y = Taylor::variable(ctx, 3.0, 1);
        let f = x.mul(&x).mul(&y);
        let jet = Jet::from_series(&f);
        assert_eq!(jet.value(), 12.0);
        assert_eq!(jet.gradient(), &[12.0, 4.0]); // (2xy, x^2)
                                                  // Hessian [[2y, 2x], [2x, 0]]
        assert_eq!(jet.tensor(2), &[6.0, 4.0, 4.0, 0.0]);
        assert_eq!(jet.symmetry_defect(), 0.0);
    }

    #[test]
    fn partial_rejects_bad_requests() {
        let ctx = Ctx::get(1, 1);
        let x = Taylor::variable(ctx, 1.0, 0);
        let jet = Jet::from_series(&x);
        assert!(jet.partial(&[0, 0]).is_err());
        assert!(jet.partial(&[3]).is_err());
    }
}
