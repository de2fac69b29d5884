//! Geometry of the unimodular lattice `Λ = gZ^d`: shortest vectors,
//! successive minima, the dual lattice, the height `ht` and the Siegel
//! transform of radial step functions.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::enumerate::{enumerate_ball, lll_reduce, norm_sq, Budget, LllResult, DEFAULT_NODE_BUDGET, LLL_DELTA};
use crate::error::{Error, Result};
use crate::geometry::{euclidean_norm, sup_norm, SpecialLinearMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    Sup,
    Euclidean,
}

impl Norm {
    pub fn of(self, v: &[f64]) -> f64 {
        match self {
            Norm::Sup => sup_norm(v),
            Norm::Euclidean => euclidean_norm(v),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShortestVector {
    /// Coefficients with respect to the descriptor's basis columns.
    pub coeffs: Vec<i64>,
    pub length: f64,
}

/// The lattice spanned by the columns of a basis in `SL_d(R)`, with
/// write-once caches for the pre-reduced basis and derived invariants.
#[derive(Debug)]
pub struct LatticeDescriptor {
    basis: SpecialLinearMatrix,
    budget: u64,
    reduced: OnceLock<LllResult>,
    minima: OnceLock<Vec<f64>>,
    shortest_sup: OnceLock<ShortestVector>,
}

impl Clone for LatticeDescriptor {
    fn clone(&self) -> Self {
        Self {
            basis: self.basis.clone(),
            budget: self.budget,
            reduced: self.reduced.clone(),
            minima: self.minima.clone(),
            shortest_sup: self.shortest_sup.clone(),
        }
    }
}

impl LatticeDescriptor {
    pub fn new(basis: SpecialLinearMatrix) -> Self {
        Self::with_budget(basis, DEFAULT_NODE_BUDGET)
    }

    pub fn with_budget(basis: SpecialLinearMatrix, budget: u64) -> Self {
        Self {
            basis,
            budget,
            reduced: OnceLock::new(),
            minima: OnceLock::new(),
            shortest_sup: OnceLock::new(),
        }
    }

    pub fn basis(&self) -> &SpecialLinearMatrix {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn node_budget(&self) -> u64 {
        self.budget
    }

    /// LLL-reduced basis. Only used to keep enumeration small; every answer
    /// is certified by exhaustive enumeration.
    pub fn reduced(&self) -> Result<&LllResult> {
        if let Some(r) = self.reduced.get() {
            return Ok(r);
        }
        let basis = &self.basis;
        let r = lll_reduce(self.dim(), |c| basis.lattice_vector(c), LLL_DELTA)?;
        Ok(self.reduced.get_or_init(|| r))
    }

    /// Visits every nonzero lattice vector of Euclidean length at most
    /// `radius`, passing basis coefficients and the vector.
    pub fn for_each_vector_within(
        &self,
        radius: f64,
        visit: &mut dyn FnMut(&[i64], &[f64]),
    ) -> Result<()> {
        let red = self.reduced()?;
        let u = &red.transform;
        let mut budget = Budget::new(self.budget);
        let r_sq = radius * radius;
        let mut coeffs = vec![0i64; self.dim()];
        let mut err = None;
        enumerate_ball(&red.columns, None, r_sq, &mut budget, &mut |z| {
            if z.iter().all(|&x| x == 0) {
                return;
            }
            match u.mul_vec(z) {
                Ok(c) => coeffs.copy_from_slice(&c),
                Err(e) => {
                    err.get_or_insert(e);
                    return;
                }
            }
            let v = self.basis.lattice_vector(&coeffs);
            if norm_sq(&v) <= r_sq {
                visit(&coeffs, &v);
            }
        })?;
        err.map_or(Ok(()), Err)
    }

    pub fn dual(&self) -> LatticeDescriptor {
        LatticeDescriptor::with_budget(self.basis.inv().transpose(), self.budget)
    }
}

/// Orders ties deterministically: sign fixed so the first nonzero coefficient
/// is positive, then lexicographically smallest coefficients.
fn canonical_sign(c: &[i64]) -> Vec<i64> {
    match c.iter().find(|&&x| x != 0) {
        Some(&x) if x < 0 => c.iter().map(|v| -v).collect(),
        _ => c.to_vec(),
    }
}

pub fn shortest_vector(lattice: &LatticeDescriptor, norm: Norm) -> Result<ShortestVector> {
    if norm == Norm::Sup {
        if let Some(sv) = lattice.shortest_sup.get() {
            return Ok(sv.clone());
        }
    }
    let red = lattice.reduced()?;
    let d = lattice.dim() as f64;
    // A reduced column bounds the minimum; for the sup norm the Euclidean
    // search radius is inflated by √d since |v|_∞ ≤ |v|_2 ≤ √d |v|_∞.
    let radius = match norm {
        Norm::Euclidean => red
            .columns
            .iter()
            .map(|c| euclidean_norm(c))
            .fold(f64::INFINITY, f64::min),
        Norm::Sup => {
            d.sqrt()
                * red
                    .columns
                    .iter()
                    .map(|c| sup_norm(c))
                    .fold(f64::INFINITY, f64::min)
        }
    } * (1.0 + 1e-12);
    let mut best: Option<ShortestVector> = None;
    lattice.for_each_vector_within(radius, &mut |coeffs, v| {
        let len = norm.of(v);
        let cand = canonical_sign(coeffs);
        let better = match &best {
            None => true,
            Some(b) => {
                let tol = 1e-12 * b.length;
                len < b.length - tol || (len <= b.length + tol && cand < b.coeffs)
            }
        };
        if better {
            best = Some(ShortestVector {
                coeffs: cand,
                length: len,
            });
        }
    })?;
    let sv = best.ok_or_else(|| Error::Internal("no lattice vector inside reduced-basis radius".into()))?;
    if norm == Norm::Sup {
        let _ = lattice.shortest_sup.set(sv.clone());
    }
    Ok(sv)
}

/// Euclidean successive minima `λ_1 ≤ … ≤ λ_d`.
pub fn successive_minima(lattice: &LatticeDescriptor) -> Result<Vec<f64>> {
    if let Some(m) = lattice.minima.get() {
        return Ok(m.clone());
    }
    let red = lattice.reduced()?;
    // The reduced columns are d independent vectors, so λ_d is at most the longest.
    let radius = red
        .columns
        .iter()
        .map(|c| euclidean_norm(c))
        .fold(0.0, f64::max)
        * (1.0 + 1e-12);
    let mut vectors: Vec<(f64, Vec<i64>)> = Vec::new();
    lattice.for_each_vector_within(radius, &mut |c, v| vectors.push((euclidean_norm(v), c.to_vec())))?;
    vectors.sort_by(|a, b| a.0.total_cmp(&b.0));
    let d = lattice.dim();
    let mut chosen: Vec<Vec<i64>> = Vec::with_capacity(d);
    let mut minima = Vec::with_capacity(d);
    for (len, c) in vectors {
        chosen.push(c);
        if integer_rank(&chosen) == chosen.len() {
            minima.push(len);
            if minima.len() == d {
                break;
            }
        } else {
            chosen.pop();
        }
    }
    if minima.len() != d {
        return Err(Error::Internal("failed to find d independent vectors".into()));
    }
    let _ = lattice.minima.set(minima.clone());
    Ok(minima)
}

/// Exact rank of a set of integer vectors (fraction-free elimination).
pub(crate) fn integer_rank(vectors: &[Vec<i64>]) -> usize {
    let mut rows: Vec<Vec<i128>> = vectors
        .iter()
        .map(|v| v.iter().map(|&x| x as i128).collect())
        .collect();
    let cols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..cols {
        let Some(p) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else {
            continue;
        };
        rows.swap(rank, p);
        for r in 0..rows.len() {
            if r != rank && rows[r][col] != 0 {
                let (a, b) = (rows[rank][col], rows[r][col]);
                let g = num_integer::gcd(a, b);
                let (fa, fb) = (b / g, a / g);
                for c in 0..cols {
                    rows[r][c] = rows[r][c] * fb - rows[rank][c] * fa;
                }
                let g_row = rows[r].iter().fold(0i128, |acc, &x| num_integer::gcd(acc, x));
                if g_row > 1 {
                    for x in rows[r].iter_mut() {
                        *x /= g_row;
                    }
                }
            }
        }
        rank += 1;
    }
    rank
}

/// `ht(x) = 1 / min_{v ≠ 0} |gv|_∞`.
pub fn height(lattice: &LatticeDescriptor) -> Result<f64> {
    Ok(1.0 / shortest_vector(lattice, Norm::Sup)?.length)
}

/// Membership in `K(ε) = {ht ≤ ε⁻¹}`.
pub fn in_k(lattice: &LatticeDescriptor, epsilon: f64) -> Result<bool> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::Precondition(format!("epsilon {epsilon} not in (0, 1]")));
    }
    Ok(height(lattice)? <= 1.0 / epsilon)
}

/// Basis `(g⁻¹)ᵀ` of the dual lattice.
pub fn dual_basis(lattice: &LatticeDescriptor) -> LatticeDescriptor {
    lattice.dual()
}

/// A radial step function: `f(v) = value_k` for the first step whose radius
/// satisfies `|v| ≤ radius_k`, and zero beyond the last radius.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialStep {
    pub norm: Norm,
    /// `(radius, value)` pairs.
    pub steps: Vec<(f64, f64)>,
}

impl RadialStep {
    pub fn indicator(norm: Norm, radius: f64) -> Self {
        Self {
            norm,
            steps: vec![(radius, 1.0)],
        }
    }

    pub fn support_radius(&self) -> f64 {
        self.steps.iter().map(|s| s.0).fold(0.0, f64::max)
    }

    pub fn eval(&self, v: &[f64]) -> f64 {
        let r = self.norm.of(v);
        let mut steps = self.steps.clone();
        steps.sort_by(|a, b| a.0.total_cmp(&b.0));
        steps
            .iter()
            .find(|(radius, _)| r <= *radius)
            .map_or(0.0, |s| s.1)
    }

    fn validate(&self) -> Result<()> {
        if self.steps.is_empty() || self.steps.iter().any(|(r, v)| !(r.is_finite() && *r > 0.0) || !v.is_finite()) {
            return Err(Error::Precondition("radial step needs finite positive radii".into()));
        }
        Ok(())
    }
}

/// `f̃(Λ) = Σ_{v ∈ Λ∖{0}} f(v)` by exhaustive enumeration over the support.
pub fn siegel_transform(f: &RadialStep, lattice: &LatticeDescriptor) -> Result<f64> {
    f.validate()?;
    let mut steps = f.steps.clone();
    steps.sort_by(|a, b| a.0.total_cmp(&b.0));
    let r_f = f.support_radius();
    let search = match f.norm {
        Norm::Euclidean => r_f,
        Norm::Sup => r_f * (lattice.dim() as f64).sqrt(),
    } * (1.0 + 1e-12);
    let mut total = 0.0;
    lattice.for_each_vector_within(search, &mut |_, v| {
        let r = f.norm.of(v);
        if let Some((_, val)) = steps.iter().find(|(radius, _)| r <= *radius) {
            total += val;
        }
    })?;
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lat(rows: &[f64], d: usize) -> LatticeDescriptor {
        LatticeDescriptor::new(SpecialLinearMatrix::new(d, rows).unwrap())
    }

    #[test]
    fn integer_lattice_invariants() {
        for d in 2..=3 {
            let l = LatticeDescriptor::new(SpecialLinearMatrix::identity(d));
            let sv = shortest_vector(&l, Norm::Sup).unwrap();
            assert_eq!(sv.length, 1.0);
            assert_eq!(successive_minima(&l).unwrap(), vec![1.0; d]);
            assert_eq!(height(&l).unwrap(), 1.0);
            assert!(in_k(&l, 1.0).unwrap());
            assert!(in_k(&l, 0.9).unwrap());
            assert_eq!(dual_basis(&l).basis(), &SpecialLinearMatrix::identity(d));
        }
    }

    #[test]
    fn diagonal_lattices() {
        let e = std::f64::consts::E;
        let l = lat(&[e, 0.0, 0.0, 1.0 / e], 2);
        let sv = shortest_vector(&l, Norm::Sup).unwrap();
        assert!((sv.length - 1.0 / e).abs() < 1e-15);
        assert_eq!(sv.coeffs, vec![0, 1]);
        assert!((height(&l).unwrap() - e).abs() < 1e-12);

        let l = lat(&[2.0, 0.0, 0.0, 0.5], 2);
        let mins = successive_minima(&l).unwrap();
        assert!((mins[0] - 0.5).abs() < 1e-15 && (mins[1] - 2.0).abs() < 1e-15);
        let dual = dual_basis(&l);
        assert!(dual.basis().max_abs_diff(&SpecialLinearMatrix::new(2, &[0.5, 0.0, 0.0, 2.0]).unwrap()) < 1e-15);

        let l = lat(&[4.0, 0.0, 0.0, 0.25], 2);
        assert!(!in_k(&l, 0.5).unwrap());
        assert!(in_k(&l, 0.25).unwrap());
        assert!(in_k(&l, 0.0).is_err());
    }

    #[test]
    fn siegel_transform_of_integer_lattice() {
        let l = LatticeDescriptor::new(SpecialLinearMatrix::identity(2));
        assert_eq!(siegel_transform(&RadialStep::indicator(Norm::Sup, 0.1), &l).unwrap(), 0.0);
        assert_eq!(siegel_transform(&RadialStep::indicator(Norm::Sup, 1.0), &l).unwrap(), 8.0);
        assert_eq!(siegel_transform(&RadialStep::indicator(Norm::Euclidean, 1.0), &l).unwrap(), 4.0);
        let two_step = RadialStep {
            norm: Norm::Euclidean,
            steps: vec![(1.0, 2.0), (1.5, 1.0)],
        };
        // 4 axis points at value 2, 4 diagonal points at value 1
        assert_eq!(siegel_transform(&two_step, &l).unwrap(), 12.0);
    }

    #[test]
    fn integer_rank_detects_dependence() {
        assert_eq!(integer_rank(&[vec![1, 2, 3], vec![2, 4, 6]]), 1);
        assert_eq!(integer_rank(&[vec![1, 0, 0], vec![0, 1, 0], vec![1, 1, 0]]), 2);
        assert_eq!(integer_rank(&[vec![2, 1], vec![1, 1]]), 2);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let l = LatticeDescriptor::with_budget(SpecialLinearMatrix::identity(3), 5);
        let err = siegel_transform(&RadialStep::indicator(Norm::Euclidean, 10.0), &l).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }));
    }
}
