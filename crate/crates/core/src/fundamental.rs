//! The fundamental domain cut out by minimizing
//! `F(g)² = ‖g‖_F²‖g⁻¹‖_F² / (‖g‖_F² + ‖g⁻¹‖_F²)` along each coset `gΓ`,
//! the reduction map `ι`, and a proxy metric on `X = G/Γ`.
//!
//! Reduction is exact: for any `h` in the coset, `min(‖h‖_F², ‖h⁻¹‖_F²) ≤
//! 2F(h)²`, so every element at least as good as a seed with value `F₀` is a
//! basis of `Λ` or of `Λ*` with Frobenius norm at most `√2·F₀`. Both sets are
//! enumerated completely.

use serde::{Deserialize, Serialize};

use crate::enumerate::{enumerate_ball, lll_reduce, norm_sq, Budget, DEFAULT_NODE_BUDGET, LLL_DELTA};
use crate::error::{Error, Result};
use crate::geometry::{IntegerMatrix, SpecialLinearMatrix};
use crate::lattice::{integer_rank, successive_minima, LatticeDescriptor};

/// Margin added to `√2·F` when bounding the certified enumeration.
pub const CERTIFICATE_MARGIN: f64 = 1e-6;
/// Relative window inside which two `F` values count as a tie.
pub const TIE_TOL: f64 = 1e-9;
/// Grid used to compare tied candidates entrywise.
pub const TIE_GRID: f64 = 1e-12;

pub fn f_value(g: &SpecialLinearMatrix) -> f64 {
    f_from_norms(g.frobenius_sq(), g.inverse_frobenius_sq())
}

fn f_from_norms(a: f64, b: f64) -> f64 {
    (a * b / (a + b)).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    /// Largest Frobenius radius enumerated on `Λ` or `Λ*`.
    pub frobenius_bound: f64,
    /// Number of coset elements compared.
    pub candidates: usize,
    /// False only for `d ≥ 4` runs that hit the budget and report a best effort.
    pub certified: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedRepresentative {
    pub rep: SpecialLinearMatrix,
    /// `g = rep·gamma`.
    pub gamma: IntegerMatrix,
    pub fvalue: f64,
    pub certificate: Certificate,
}

/// Which lattice a basis search runs on: `gZ^d` or the dual `(g⁻¹)ᵀZ^d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Side {
    Primal,
    Dual,
}

fn side_vector(g: &SpecialLinearMatrix, side: Side, coeffs: &[i64]) -> Vec<f64> {
    match side {
        Side::Primal => g.lattice_vector(coeffs),
        Side::Dual => g.dual_lattice_vector(coeffs),
    }
}

/// All `C ∈ SL_d(Z)` with `‖g·C‖_F² ≤ frob_sq_bound`.
pub fn enumerate_unimodular_bases(
    g: &SpecialLinearMatrix,
    frob_sq_bound: f64,
    budget: &mut Budget,
) -> Result<Vec<IntegerMatrix>> {
    unimodular_bases(g, Side::Primal, frob_sq_bound, budget)
}

fn unimodular_bases(
    g: &SpecialLinearMatrix,
    side: Side,
    bound: f64,
    budget: &mut Budget,
) -> Result<Vec<IntegerMatrix>> {
    let d = g.dim();
    // Below d no unimodular matrix fits (AM–GM on the singular values).
    if !(bound >= d as f64 * (1.0 - 1e-12)) {
        return Ok(Vec::new());
    }
    let red = lll_reduce(d, |c| side_vector(g, side, c), LLL_DELTA)?;
    // Short list: every primitive-or-not lattice vector that can be a column.
    let mut short: Vec<(f64, Vec<i64>)> = Vec::new();
    let mut err = None;
    enumerate_ball(&red.columns, None, bound, budget, &mut |z| {
        if z.iter().all(|&x| x == 0) {
            return;
        }
        match red.transform.mul_vec(z) {
            Ok(c) => {
                let len = norm_sq(&side_vector(g, side, &c));
                if len <= bound {
                    short.push((len, c));
                }
            }
            Err(e) => {
                err.get_or_insert(e);
            }
        }
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    if short.is_empty() {
        return Ok(Vec::new());
    }
    short.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));

    // Successive minima from the short list: the i-th column of a basis
    // sorted by length is at least λ_i.
    let mut minima: Vec<f64> = Vec::with_capacity(d);
    let mut independent: Vec<Vec<i64>> = Vec::with_capacity(d);
    for (len, c) in &short {
        if minima.len() == d {
            break;
        }
        independent.push(c.clone());
        if integer_rank(&independent) == independent.len() {
            minima.push(*len);
        } else {
            independent.pop();
        }
    }
    if minima.len() < d {
        return Ok(Vec::new());
    }

    // Search bases with nondecreasing column lengths, then restore the rest
    // of the set by signed column permutations, which preserve ‖h‖_F.
    let mut sorted = Vec::new();
    let mut chosen: Vec<usize> = Vec::with_capacity(d - 1);
    let search = SortedSearch {
        g,
        side,
        bound,
        short: &short,
        minima: &minima,
    };
    search.choose(&mut chosen, 0.0, budget, &mut sorted)?;
    let perms = signed_permutations(d)?;
    let mut all = std::collections::BTreeSet::new();
    for c in &sorted {
        for p in &perms {
            all.insert(c.mul(p)?.row_major().to_vec());
        }
    }
    all.into_iter().map(|rm| IntegerMatrix::new(d, &rm)).collect()
}

/// Determinant-one signed permutation matrices.
fn signed_permutations(d: usize) -> Result<Vec<IntegerMatrix>> {
    let mut perms: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..d {
        let mut next = Vec::new();
        for p in &perms {
            for i in (0..d).filter(|i| !p.contains(i)) {
                let mut q = p.clone();
                q.push(i);
                next.push(q);
            }
        }
        perms = next;
    }
    let mut out = Vec::new();
    for p in perms {
        for signs in 0u32..1 << d {
            let mut rows = vec![0i64; d * d];
            for (col, &row) in p.iter().enumerate() {
                rows[row * d + col] = if signs >> col & 1 == 1 { -1 } else { 1 };
            }
            let m = IntegerMatrix::new(d, &rows)?;
            if m.det() == 1 {
                out.push(m);
            }
        }
    }
    Ok(out)
}

/// Relative slack on length comparisons between columns.
const ORDER_SLACK: f64 = 1e-9;

struct SortedSearch<'a> {
    g: &'a SpecialLinearMatrix,
    side: Side,
    bound: f64,
    short: &'a [(f64, Vec<i64>)],
    minima: &'a [f64],
}

impl SortedSearch<'_> {
    /// Least possible squared length of columns `k..d` when column `k−1`
    /// has squared length `prev`.
    fn tail_floor(&self, k: usize, prev: f64) -> f64 {
        self.minima[k..].iter().map(|&l| l.max(prev) * (1.0 - ORDER_SLACK)).sum()
    }

    fn choose(&self, chosen: &mut Vec<usize>, used: f64, budget: &mut Budget, out: &mut Vec<IntegerMatrix>) -> Result<()> {
        let d = self.g.dim();
        let k = chosen.len();
        let prev = chosen.last().map_or(0.0, |&i| self.short[i].0);
        if k == d - 1 {
            let cols: Vec<Vec<i64>> = chosen.iter().map(|&i| self.short[i].1.clone()).collect();
            let floor = prev * (1.0 - ORDER_SLACK);
            return complete_last_column(self.g, self.side, self.bound - used, floor, &cols, budget, out);
        }
        let from = self.short.partition_point(|s| s.0 < prev * (1.0 - ORDER_SLACK));
        for (i, (len, _)) in self.short.iter().enumerate().skip(from) {
            if *len < self.minima[k] * (1.0 - ORDER_SLACK) {
                continue;
            }
            if used + len + self.tail_floor(k + 1, *len) > self.bound * (1.0 + 1e-12) {
                // sorted by length: nothing further fits either
                break;
            }
            budget.note_best(used + len);
            chosen.push(i);
            self.choose(chosen, used + len, budget, out)?;
            chosen.pop();
        }
        Ok(())
    }
}

/// Signed cofactors `n` with `det[c_1 … c_{d−1} | c] = n·c`.
fn cofactor_vector(cols: &[Vec<i64>], d: usize) -> Result<Vec<i128>> {
    let mut n = Vec::with_capacity(d);
    for i in 0..d {
        let mut minor = Vec::with_capacity((d - 1) * (d - 1));
        for r in (0..d).filter(|&r| r != i) {
            for c in cols {
                minor.push(c[r]);
            }
        }
        let det = IntegerMatrix::new(d - 1, &minor)?.det();
        let sign = if (i + d - 1) % 2 == 0 { 1 } else { -1 };
        n.push(sign * det);
    }
    Ok(n)
}

/// Unimodular `W` with `n·W = (1, 0, …, 0)`; requires `gcd(n) = 1`.
fn complement_basis(n: &[i128]) -> Option<Vec<Vec<i128>>> {
    let d = n.len();
    // columns of W, starting from the identity
    let mut w: Vec<Vec<i128>> = (0..d)
        .map(|j| (0..d).map(|i| i128::from(i == j)).collect())
        .collect();
    let mut row: Vec<i128> = n.to_vec();
    // Euclid on the row entries via column operations until one entry remains.
    loop {
        let nonzero: Vec<usize> = (0..d).filter(|&j| row[j] != 0).collect();
        if nonzero.len() <= 1 {
            break;
        }
        let p = *nonzero.iter().min_by_key(|&&j| row[j].abs()).unwrap();
        for &j in &nonzero {
            if j != p {
                let q = row[j].div_euclid(row[p]);
                row[j] -= q * row[p];
                let wp = w[p].clone();
                for (a, b) in w[j].iter_mut().zip(&wp) {
                    *a -= q * b;
                }
            }
        }
    }
    let p = (0..d).find(|&j| row[j] != 0)?;
    if row[p].abs() != 1 {
        return None;
    }
    if row[p] == -1 {
        for x in w[p].iter_mut() {
            *x = -*x;
        }
    }
    w.swap(0, p);
    Some(w)
}

fn to_i64(v: i128) -> Result<i64> {
    i64::try_from(v).map_err(|_| Error::PrecisionExhausted { residual: v as f64 })
}

fn complete_last_column(
    g: &SpecialLinearMatrix,
    side: Side,
    remaining: f64,
    min_len: f64,
    cols: &[Vec<i64>],
    budget: &mut Budget,
    out: &mut Vec<IntegerMatrix>,
) -> Result<()> {
    let d = g.dim();
    if remaining < 0.0 {
        return Ok(());
    }
    let n = cofactor_vector(cols, d)?;
    let Some(w) = complement_basis(&n) else {
        // columns not extendable to a basis (dependent or non-primitive)
        return Ok(());
    };
    let w0: Vec<i64> = w[0].iter().map(|&x| to_i64(x)).collect::<Result<_>>()?;
    let kernel: Vec<Vec<i64>> = w[1..]
        .iter()
        .map(|c| c.iter().map(|&x| to_i64(x)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let combine = |z: &[i64]| -> Vec<i64> {
        let mut c = w0.clone();
        for (k, &zk) in kernel.iter().zip(z) {
            for (ci, ki) in c.iter_mut().zip(k) {
                *ci += zk * ki;
            }
        }
        c
    };
    let kernel_combine = |z: &[i64]| -> Vec<i64> {
        let mut c = vec![0i64; d];
        for (k, &zk) in kernel.iter().zip(z) {
            for (ci, ki) in c.iter_mut().zip(k) {
                *ci += zk * ki;
            }
        }
        c
    };
    let offset = side_vector(g, side, &w0);
    let k_red = lll_reduce(d - 1, |z| side_vector(g, side, &kernel_combine(z)), LLL_DELTA)?;
    let mut err = None;
    enumerate_ball(&k_red.columns, Some(&offset), remaining, budget, &mut |z| {
        let z = match k_red.transform.mul_vec(z) {
            Ok(z) => z,
            Err(e) => {
                err.get_or_insert(e);
                return;
            }
        };
        let last = combine(&z);
        let len = norm_sq(&side_vector(g, side, &last));
        if len > remaining || len < min_len {
            return;
        }
        let mut all = cols.to_vec();
        all.push(last);
        match IntegerMatrix::from_columns(&all) {
            Ok(c) if c.det() == 1 => out.push(c),
            Ok(_) => {}
            Err(e) => {
                err.get_or_insert(e);
            }
        }
    })?;
    err.map_or(Ok(()), Err)
}

/// All matrices `h = basis·C`, `C ∈ SL_d(Z)`, with `‖h‖_F ≤ frobenius_bound`.
pub fn candidate_bases(lattice: &LatticeDescriptor, frobenius_bound: f64) -> Result<Vec<SpecialLinearMatrix>> {
    if !frobenius_bound.is_finite() {
        return Err(Error::Precondition("frobenius bound must be finite".into()));
    }
    let mut budget = Budget::new(lattice.node_budget());
    let g = lattice.basis();
    let cs = enumerate_unimodular_bases(g, frobenius_bound * frobenius_bound, &mut budget)?;
    cs.iter().map(|c| g.mul_int(c)).collect()
}

/// Flips the sign of the last column when `det U = −1`.
fn make_special(u: &IntegerMatrix) -> Result<IntegerMatrix> {
    if u.det() == 1 {
        return Ok(u.clone());
    }
    let d = u.dim();
    let mut rows = u.to_rows();
    for row in rows.iter_mut() {
        row[d - 1] = -row[d - 1];
    }
    IntegerMatrix::from_rows(&rows)
}

/// Row-major entries snapped to the tie grid.
fn tie_key(h: &SpecialLinearMatrix) -> Vec<i64> {
    h.row_major()
        .iter()
        .map(|x| (x / TIE_GRID).round() as i64)
        .collect()
}

/// The `F`-minimal element of `gΓ`. Among elements whose `F` is within
/// `1e-9·max(1, F)` of the minimum, the one with the lexicographically largest
/// row-major entries (on a `1e-12` grid) is chosen.
pub fn reduce(g: &SpecialLinearMatrix) -> Result<ReducedRepresentative> {
    reduce_with_budget(g, DEFAULT_NODE_BUDGET)
}

pub fn reduce_with_budget(g: &SpecialLinearMatrix, node_budget: u64) -> Result<ReducedRepresentative> {
    let d = g.dim();
    let mut budget = Budget::new(node_budget);

    // Seed from LLL of the primal and (for d ≥ 3) the dual lattice.
    let mut seeds = vec![IntegerMatrix::identity(d)];
    let u = lll_reduce(d, |c| g.lattice_vector(c), LLL_DELTA)?.transform;
    seeds.push(make_special(&u)?);
    if d >= 3 {
        let u = lll_reduce(d, |c| g.dual_lattice_vector(c), LLL_DELTA)?.transform;
        seeds.push(make_special(&u)?.inverse_unimodular()?.transpose());
    }
    let mut f0 = f64::INFINITY;
    for c in &seeds {
        f0 = f0.min(f_value(&g.mul_int(c)?));
    }
    let bound = std::f64::consts::SQRT_2 * f0 + CERTIFICATE_MARGIN;
    // Sorted basis lengths dominate the successive minima, so every basis has
    // A ≥ Σλ_i(Λ)² and B ≥ Σλ_i(Λ*)². As F² = AB/(A+B) grows in both, a
    // basis tying the best F obeys A ≤ F²B_lo/(B_lo − F²), and symmetrically.
    let target = f0 + TIE_TOL * f0.max(1.0) + CERTIFICATE_MARGIN;
    let lo = |l: &LatticeDescriptor| -> Result<f64> {
        Ok(successive_minima(l)?.iter().map(|x| x * x).sum::<f64>() * (1.0 - 1e-9))
    };
    let lattice = LatticeDescriptor::with_budget(g.clone(), node_budget);
    let (a_lo, b_lo) = (lo(&lattice)?, lo(&lattice.dual())?);
    let cap = |other_lo: f64| {
        let t2 = target * target;
        if other_lo > t2 {
            t2 * other_lo / (other_lo - t2) * (1.0 + 1e-9)
        } else {
            f64::INFINITY
        }
    };
    let primal_sq = (bound * bound).min(cap(b_lo));
    let dual_sq = (bound * bound).min(cap(a_lo));

    let mut certified = true;
    let mut gammas: Vec<IntegerMatrix> = Vec::new();
    let searched = (|| -> Result<()> {
        gammas.extend(unimodular_bases(g, Side::Primal, primal_sq, &mut budget)?);
        // For d = 2, ‖h⁻¹‖_F = ‖h‖_F, so the dual search finds nothing new.
        if d >= 3 {
            for c in unimodular_bases(g, Side::Dual, dual_sq, &mut budget)? {
                // (g C)⁻ᵀ = g⁻ᵀ C⁻ᵀ, so a dual basis g⁻ᵀC' comes from C = C'⁻ᵀ.
                gammas.push(c.inverse_unimodular()?.transpose());
            }
        }
        Ok(())
    })();
    match searched {
        Ok(()) => {}
        Err(Error::BudgetExceeded { .. }) if d >= 4 => {
            certified = false;
            gammas.extend(seeds.iter().cloned());
        }
        Err(e) => return Err(e),
    }
    if gammas.is_empty() {
        return Err(Error::Internal("certified enumeration missed the seed".into()));
    }

    let mut scored: Vec<(f64, SpecialLinearMatrix, IntegerMatrix)> = Vec::with_capacity(gammas.len());
    for c in gammas {
        let h = g.mul_int(&c)?;
        scored.push((f_value(&h), h, c));
    }
    let best_f = scored.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let tol = TIE_TOL * best_f.max(1.0);
    let candidates = scored.len();
    let (fvalue, rep, c) = scored
        .into_iter()
        .filter(|s| s.0 <= best_f + tol)
        .max_by(|a, b| tie_key(&a.1).cmp(&tie_key(&b.1)))
        .expect("nonempty");
    Ok(ReducedRepresentative {
        rep,
        gamma: c.inverse_unimodular()?,
        fvalue,
        certificate: Certificate {
            frobenius_bound: if d >= 3 { primal_sq.max(dual_sq) } else { primal_sq }.sqrt(),
            candidates,
            certified,
        },
    })
}

/// `ι(gΓ)`.
pub fn iota(g: &SpecialLinearMatrix) -> Result<SpecialLinearMatrix> {
    Ok(reduce(g)?.rep)
}

/// Right-invariant proxy metric on `G`: `‖g h⁻¹ − Id‖_F`.
pub fn proxy_distance(g: &SpecialLinearMatrix, h: &SpecialLinearMatrix) -> Result<f64> {
    let p = g.mul(&h.inv())?;
    let d = g.dim();
    Ok((0..d)
        .flat_map(|i| (0..d).map(move |j| (i, j)))
        .map(|(i, j)| {
            let e = p.get(i, j) - if i == j { 1.0 } else { 0.0 };
            e * e
        })
        .sum::<f64>()
        .sqrt())
}

/// Proxy distance on `X` between `xΓ` and `zΓ`, certified below `cutoff`.
///
/// If `‖h z⁻¹ − Id‖_F < c` then `‖h‖_F ≤ (1 + c)‖z‖_F`, so enumerating the
/// coset of `x` inside that Frobenius ball finds every element closer than the
/// cutoff. Returns `None` when the distance is at least `cutoff`.
pub fn distance_x(x: &SpecialLinearMatrix, z: &SpecialLinearMatrix, cutoff: f64) -> Result<Option<f64>> {
    let mut budget = Budget::default();
    distance_x_with_budget(x, z, cutoff, &mut budget)
}

pub fn distance_x_with_budget(
    x: &SpecialLinearMatrix,
    z: &SpecialLinearMatrix,
    cutoff: f64,
    budget: &mut Budget,
) -> Result<Option<f64>> {
    if !(cutoff > 0.0 && cutoff.is_finite()) {
        return Err(Error::Precondition(format!("cutoff {cutoff} must be positive")));
    }
    let radius = z.frobenius_sq().sqrt() * (1.0 + cutoff) + CERTIFICATE_MARGIN;
    let mut best: Option<f64> = None;
    for c in enumerate_unimodular_bases(x, radius * radius, budget)? {
        let dist = proxy_distance(&x.mul_int(&c)?, z)?;
        if dist < cutoff && best.map_or(true, |b| dist < b) {
            best = Some(dist);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m2(a: f64, b: f64, c: f64, d: f64) -> SpecialLinearMatrix {
        SpecialLinearMatrix::new(2, &[a, b, c, d]).unwrap()
    }

    #[test]
    fn f_value_examples() {
        assert!((f_value(&SpecialLinearMatrix::identity(2)) - 1.0).abs() < 1e-15);
        assert!((f_value(&SpecialLinearMatrix::identity(3)) - 1.5f64.sqrt()).abs() < 1e-15);
        let g = m2(1.5, 0.4, -0.2, 0.6133333333333333);
        assert!((f_value(&g) - f_value(&g.inv())).abs() < 1e-14);
    }

    #[test]
    fn integer_cosets_reduce_to_identity() {
        for d in 2..=3 {
            let g = SpecialLinearMatrix::identity(d);
            let r = reduce(&g).unwrap();
            assert_eq!(r.rep, SpecialLinearMatrix::identity(d));
            assert!(r.gamma.is_identity());
            assert!((r.fvalue - (d as f64 / 2.0).sqrt()).abs() < 1e-12);
        }
        let gamma = IntegerMatrix::new(3, &[2, 1, 0, 1, 1, 0, 3, 5, 1]).unwrap();
        let g = SpecialLinearMatrix::identity(3).mul_int(&gamma).unwrap();
        let r = reduce(&g).unwrap();
        assert!(r.rep.max_abs_diff(&SpecialLinearMatrix::identity(3)) < 1e-12);
        assert_eq!(r.gamma, gamma);
    }

    #[test]
    fn diagonal_is_already_reduced() {
        let g = m2(2.0, 0.0, 0.0, 0.5);
        let r = reduce(&g).unwrap();
        assert_eq!(r.rep, g);
        assert!(r.gamma.is_identity());
    }

    #[test]
    fn shear_reduces_mod_one() {
        let g = m2(1.0, 7.3, 0.0, 1.0);
        let r = reduce(&g).unwrap();
        assert!(r.rep.max_abs_diff(&m2(1.0, 0.3, 0.0, 1.0)) < 1e-12);
        assert_eq!(r.gamma, IntegerMatrix::new(2, &[1, 7, 0, 1]).unwrap());
        let back = r.rep.mul_int(&r.gamma).unwrap();
        assert!(back.max_abs_diff(&g) < 1e-12);
    }

    #[test]
    fn candidate_bases_of_z2() {
        let l = LatticeDescriptor::new(SpecialLinearMatrix::identity(2));
        let c = candidate_bases(&l, 1.5).unwrap();
        assert_eq!(c.len(), 4);
        assert!(candidate_bases(&l, 1.4).unwrap().is_empty());
        let more = candidate_bases(&l, 2.5).unwrap();
        for h in &c {
            assert!(more.contains(h));
        }
    }

    #[test]
    fn complement_basis_is_unimodular() {
        for n in [vec![3i128, 5], vec![-4, 9, 6], vec![0, 0, -1], vec![6, 10, 15]] {
            let w = complement_basis(&n).unwrap();
            let cols: Vec<Vec<i64>> = w.iter().map(|c| c.iter().map(|&x| x as i64).collect()).collect();
            let m = IntegerMatrix::from_columns(&cols).unwrap();
            assert_eq!(m.det().abs(), 1);
            let first: i128 = n.iter().zip(&w[0]).map(|(a, b)| a * b).sum();
            assert_eq!(first, 1);
            for c in &w[1..] {
                assert_eq!(n.iter().zip(c).map(|(a, b)| a * b).sum::<i128>(), 0);
            }
        }
        assert!(complement_basis(&[2, 4]).is_none());
    }

    #[test]
    fn proxy_metric_basics() {
        let g = m2(1.2, 0.3, 0.1, 0.8583333333333333);
        assert!(proxy_distance(&g, &g).unwrap() < 1e-12);
        let x = SpecialLinearMatrix::identity(2);
        let z = m2(1.0, 0.01, 0.0, 1.0);
        let d = distance_x(&x, &z, 0.5).unwrap().unwrap();
        assert!((d - 0.01).abs() < 1e-12);
        // shifting x within its coset does not change the distance
        let xg = x.mul_int(&IntegerMatrix::new(2, &[3, 2, 1, 1]).unwrap()).unwrap();
        let d2 = distance_x(&xg, &z, 0.5).unwrap().unwrap();
        assert!((d - d2).abs() < 1e-12);
        let far = m2(3.0, 0.0, 0.0, 1.0 / 3.0);
        assert_eq!(distance_x(&far, &x, 0.5).unwrap(), None);
    }
}
