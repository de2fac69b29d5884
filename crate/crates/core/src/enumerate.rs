//! LLL pre-reduction and Fincke–Pohst enumeration of lattice points in
//! (possibly shifted) Euclidean balls.

use crate::error::{Error, Result};
use crate::geometry::IntegerMatrix;

/// Node budget per enumeration.
pub const DEFAULT_NODE_BUDGET: u64 = 10_000_000;
/// Lovász parameter for pre-reduction.
pub const LLL_DELTA: f64 = 0.99;

/// Counts visited nodes and fails once the limit is crossed.
#[derive(Clone, Debug)]
pub struct Budget {
    limit: u64,
    used: u64,
    best: Option<f64>,
}

impl Budget {
    pub fn new(limit: u64) -> Self {
        Self {
            limit,
            used: 0,
            best: None,
        }
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// Records the best objective value seen so far, reported on exhaustion.
    pub fn note_best(&mut self, value: f64) {
        self.best = Some(self.best.map_or(value, |b| b.min(value)));
    }

    #[inline]
    fn tick(&mut self) -> Result<()> {
        self.used += 1;
        if self.used > self.limit {
            Err(Error::BudgetExceeded {
                budget: self.limit,
                best: self.best,
            })
        } else {
            Ok(())
        }
    }
}

impl Default for Budget {
    fn default() -> Self {
        Self::new(DEFAULT_NODE_BUDGET)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

/// Modified Gram–Schmidt with one re-orthogonalization pass. Returns the
/// orthonormal directions and the upper-triangular `R` (row `i`, column `j`)
/// with `b_j = Σ_i R[i][j] q_i` and `R[i][i] > 0`.
fn qr(cols: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let k = cols.len();
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut r = vec![vec![0.0; k]; k];
    for (j, col) in cols.iter().enumerate() {
        let mut v = col.clone();
        for _pass in 0..2 {
            for (i, qi) in q.iter().enumerate() {
                let c = dot(qi, &v);
                r[i][j] += c;
                for (vv, qq) in v.iter_mut().zip(qi) {
                    *vv -= c * qq;
                }
            }
        }
        let len = norm_sq(&v).sqrt();
        let scale = norm_sq(col).sqrt();
        if !(len > 1e-14 * scale.max(f64::MIN_POSITIVE)) {
            return Err(Error::InvalidInput("linearly dependent basis".into()));
        }
        r[j][j] = len;
        q.push(v.into_iter().map(|x| x / len).collect());
    }
    Ok((q, r))
}

/// Result of LLL: reduced columns and the integer change of basis whose
/// columns are the coefficient vectors of the reduced columns.
#[derive(Clone, Debug)]
pub struct LllResult {
    pub columns: Vec<Vec<f64>>,
    pub transform: IntegerMatrix,
}

/// LLL-reduces the lattice generated by `eval(e_1), …, eval(e_k)`, where
/// `eval` maps an integer coefficient vector to its lattice vector. Columns
/// are re-evaluated from their coefficients after every change, so rounding
/// does not accumulate across size reductions.
pub fn lll_reduce<F>(rank: usize, eval: F, delta: f64) -> Result<LllResult>
where
    F: Fn(&[i64]) -> Vec<f64>,
{
    let mut coeffs: Vec<Vec<i64>> = (0..rank)
        .map(|j| (0..rank).map(|i| i64::from(i == j)).collect())
        .collect();
    let mut cols: Vec<Vec<f64>> = coeffs.iter().map(|c| eval(c)).collect();
    let mut k = 1usize;
    let mut guard = 0u32;
    while k < rank {
        guard += 1;
        if guard > 100_000 {
            return Err(Error::Internal("LLL failed to terminate".into()));
        }
        let (ortho, b_sq) = gram_schmidt_sq(&cols[..k])?;
        for j in (0..k).rev() {
            let mu = dot(&cols[k], &ortho[j]) / b_sq[j];
            let q = mu.round();
            if q != 0.0 {
                if q.abs() > 9.0e15 {
                    return Err(Error::PrecisionExhausted { residual: q.abs() });
                }
                let q = q as i64;
                let (head, tail) = coeffs.split_at_mut(k);
                for (a, b) in tail[0].iter_mut().zip(&head[j]) {
                    *a -= q * b;
                }
                cols[k] = eval(&coeffs[k]);
            }
        }
        let (ortho, b_sq) = gram_schmidt_sq(&cols[..=k])?;
        let mu = dot(&cols[k], &ortho[k - 1]) / b_sq[k - 1];
        if b_sq[k] >= (delta - mu * mu) * b_sq[k - 1] {
            k += 1;
        } else {
            cols.swap(k, k - 1);
            coeffs.swap(k, k - 1);
            k = (k - 1).max(1);
        }
    }
    let transform = IntegerMatrix::from_columns(&coeffs)?;
    Ok(LllResult {
        columns: cols,
        transform,
    })
}

/// Unnormalized Gram–Schmidt vectors and their squared lengths.
fn gram_schmidt_sq(cols: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let mut ortho: Vec<Vec<f64>> = Vec::with_capacity(cols.len());
    let mut sq = Vec::with_capacity(cols.len());
    for col in cols {
        let mut v = col.clone();
        for (o, s) in ortho.iter().zip(&sq) {
            let c = dot(&v, o) / s;
            for (vv, oo) in v.iter_mut().zip(o) {
                *vv -= c * oo;
            }
        }
        let n = norm_sq(&v);
        if !(n > 0.0) {
            return Err(Error::InvalidInput("linearly dependent basis".into()));
        }
        ortho.push(v);
        sq.push(n);
    }
    Ok((ortho, sq))
}

/// Visits every `z ∈ Z^k` with `|B z + c|² ≤ radius_sq`, where `B` has the
/// given columns and `c` is an optional offset. The visitor receives `z`; it
/// should recompute the vector itself if it needs it exactly. A relative slack
/// of `1e-9` on the radius guards against points on the boundary being lost
/// to rounding, so visitors must apply their own exact test.
pub fn enumerate_ball(
    cols: &[Vec<f64>],
    offset: Option<&[f64]>,
    radius_sq: f64,
    budget: &mut Budget,
    visit: &mut dyn FnMut(&[i64]),
) -> Result<()> {
    let k = cols.len();
    if k == 0 {
        return Ok(());
    }
    let (q, r) = qr(cols)?;
    let (c_proj, c_perp_sq) = match offset {
        Some(c) => {
            let proj: Vec<f64> = q.iter().map(|qi| dot(qi, c)).collect();
            let perp = (norm_sq(c) - norm_sq(&proj)).max(0.0);
            (proj, perp)
        }
        None => (vec![0.0; k], 0.0),
    };
    let limit = radius_sq * (1.0 + 1e-9) + 1e-300 - c_perp_sq;
    if limit < 0.0 {
        return Ok(());
    }
    let mut z = vec![0i64; k];
    let mut state = Search {
        r: &r,
        c: &c_proj,
        limit,
        budget,
        visit,
    };
    state.descend(k - 1, &mut z, 0.0)
}

struct Search<'a> {
    r: &'a [Vec<f64>],
    c: &'a [f64],
    limit: f64,
    budget: &'a mut Budget,
    visit: &'a mut dyn FnMut(&[i64]),
}

impl Search<'_> {
    fn descend(&mut self, level: usize, z: &mut [i64], partial: f64) -> Result<()> {
        let k = z.len();
        let rii = self.r[level][level];
        let shift = self.c[level]
            + (level + 1..k)
                .map(|j| self.r[level][j] * z[j] as f64)
                .sum::<f64>();
        let center = -shift / rii;
        let rem = self.limit - partial;
        if rem < 0.0 {
            return Ok(());
        }
        let width = rem.sqrt() / rii;
        let lo = (center - width).ceil();
        let hi = (center + width).floor();
        if !(lo.is_finite() && hi.is_finite()) || hi - lo > 1e15 {
            return Err(Error::BudgetExceeded {
                budget: self.budget.limit(),
                best: None,
            });
        }
        let (lo, hi) = (lo as i64, hi as i64);
        for zi in lo..=hi {
            self.budget.tick()?;
            let val = rii * zi as f64 + shift;
            let p = partial + val * val;
            if p > self.limit {
                continue;
            }
            z[level] = zi;
            if level == 0 {
                (self.visit)(z);
            } else {
                self.descend(level - 1, z, p)?;
            }
        }
        z[level] = 0;
        Ok(())
    }
}
