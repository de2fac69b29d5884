//! Matrices in `SL_d(R)` and `SL_d(Z)`, points of the fiber torus, affine
//! lattices `g w(b) Γ̂`, the diagonal flow and the horospherical embedding.

use nalgebra::DMatrix;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::dd::{dd_matmul, Dd};
use crate::error::{Error, Result};

/// Tolerance for group identities (determinant, `g g⁻¹ = Id`).
pub const GROUP_TOL: f64 = 1e-9;
/// Below this determinant drift a matrix is accepted untouched.
const DET_RENORMALIZE_FLOOR: f64 = 1e-12;

/// A real `d×d` matrix of determinant one with its inverse kept alongside.
///
/// Inverses of products are formed as products of inverses, so matrices with
/// large entries (deep in the cusp) keep an accurate inverse even though their
/// determinant can no longer be recomputed accurately from the entries.
/// Products also carry a low-order tail per entry (double-double), which is
/// what keeps `a_s u g γ` accurate to `O(ε)` once reduced back to size one.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct SpecialLinearMatrix {
    entries: DMatrix<f64>,
    inverse: DMatrix<f64>,
    entries_lo: Option<DMatrix<f64>>,
    inverse_lo: Option<DMatrix<f64>>,
}

impl PartialEq for SpecialLinearMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries && self.inverse == other.inverse
    }
}

impl SpecialLinearMatrix {
    /// Builds a matrix from row-major entries, validating `|det - 1| ≤ 1e-9`.
    /// Drift above `1e-12` is removed by rescaling the first column.
    pub fn new(dim: usize, row_major: &[f64]) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidInput(format!("dimension {dim} < 2")));
        }
        if row_major.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: row_major.len(),
            });
        }
        if row_major.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite matrix entry".into()));
        }
        let mut entries = DMatrix::from_row_slice(dim, dim, row_major);
        let det = entries.clone().lu().determinant();
        if (det - 1.0).abs() > GROUP_TOL {
            return Err(Error::NotUnimodular { det });
        }
        if (det - 1.0).abs() > DET_RENORMALIZE_FLOOR {
            let mut col = entries.column_mut(0);
            col /= det;
        }
        let inverse = entries
            .clone()
            .try_inverse()
            .ok_or(Error::NotUnimodular { det })?;
        let scale = max_abs(&entries).max(1.0) * max_abs(&inverse).max(1.0);
        let residual = max_abs(&(&entries * &inverse - DMatrix::identity(dim, dim)));
        if residual > GROUP_TOL * scale {
            return Err(Error::Internal(format!(
                "inverse residual {residual:e} after construction"
            )));
        }
        Ok(Self::from_parts(entries, inverse))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut flat = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::ShapeMismatch {
                    expected_rows: dim,
                    expected_cols: dim,
                    rows: dim,
                    cols: row.len(),
                });
            }
            flat.extend_from_slice(row);
        }
        Self::new(dim, &flat)
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_parts(DMatrix::identity(dim, dim), DMatrix::identity(dim, dim))
    }

    /// Pairs a matrix with a known inverse. Callers guarantee the pair is
    /// consistent (products of validated matrices, exact integer inverses).
    pub(crate) fn from_parts(entries: DMatrix<f64>, inverse: DMatrix<f64>) -> Self {
        debug_assert_eq!(entries.shape(), inverse.shape());
        Self {
            entries,
            inverse,
            entries_lo: None,
            inverse_lo: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.inverse
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn inv(&self) -> Self {
        Self {
            entries: self.inverse.clone(),
            inverse: self.entries.clone(),
            entries_lo: self.inverse_lo.clone(),
            inverse_lo: self.entries_lo.clone(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            entries: self.entries.transpose(),
            inverse: self.inverse.transpose(),
            entries_lo: self.entries_lo.as_ref().map(|m| m.transpose()),
            inverse_lo: self.inverse_lo.as_ref().map(|m| m.transpose()),
        }
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        check_dim(self.dim(), rhs.dim())?;
        let (entries, entries_lo) = dd_matmul(
            &self.entries,
            self.entries_lo.as_ref(),
            &rhs.entries,
            rhs.entries_lo.as_ref(),
        );
        let (inverse, inverse_lo) = dd_matmul(
            &rhs.inverse,
            rhs.inverse_lo.as_ref(),
            &self.inverse,
            self.inverse_lo.as_ref(),
        );
        Ok(Self {
            entries,
            inverse,
            entries_lo: Some(entries_lo),
            inverse_lo: Some(inverse_lo),
        })
    }

    /// `g·γ`, with the inverse formed from the exact integer inverse of `γ`.
    pub fn mul_int(&self, gamma: &IntegerMatrix) -> Result<Self> {
        check_dim(self.dim(), gamma.dim())?;
        let gamma_inv = gamma.inverse_unimodular()?;
        let (entries, entries_lo) =
            dd_matmul(&self.entries, self.entries_lo.as_ref(), &gamma.to_real(), None);
        let (inverse, inverse_lo) =
            dd_matmul(&gamma_inv.to_real(), None, &self.inverse, self.inverse_lo.as_ref());
        Ok(Self {
            entries,
            inverse,
            entries_lo: Some(entries_lo),
            inverse_lo: Some(inverse_lo),
        })
    }

    /// Lattice vector `g·v` evaluated in double-double and rounded once.
    pub fn lattice_vector(&self, coeffs: &[i64]) -> Vec<f64> {
        let d = self.dim();
        (0..d)
            .map(|i| {
                let mut acc = Dd::default();
                for (j, &c) in coeffs.iter().enumerate() {
                    if c != 0 {
                        let e = crate::dd::dd_at(&self.entries, self.entries_lo.as_ref(), i, j);
                        acc = acc.add(e.mul(Dd::new(c as f64, 0.0)));
                    }
                }
                acc.hi + acc.lo
            })
            .collect()
    }

    /// Same as [`Self::lattice_vector`] for the dual lattice `(g⁻¹)ᵀ Z^d`.
    pub fn dual_lattice_vector(&self, coeffs: &[i64]) -> Vec<f64> {
        let d = self.dim();
        (0..d)
            .map(|i| {
                let mut acc = Dd::default();
                for (j, &c) in coeffs.iter().enumerate() {
                    if c != 0 {
                        // ((g⁻¹)ᵀ)_{ij} = (g⁻¹)_{ji}
                        let e = crate::dd::dd_at(&self.inverse, self.inverse_lo.as_ref(), j, i);
                        acc = acc.add(e.mul(Dd::new(c as f64, 0.0)));
                    }
                }
                acc.hi + acc.lo
            })
            .collect()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.entries.column(j).iter().copied().collect()
    }

    pub fn row_major(&self) -> Vec<f64> {
        let d = self.dim();
        let mut out = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                out.push(self.entries[(i, j)]);
            }
        }
        out
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        (0..d)
            .map(|i| (0..d).map(|j| self.entries[(i, j)]).collect())
            .collect()
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.entries.iter().map(|x| x * x).sum()
    }

    pub fn inverse_frobenius_sq(&self) -> f64 {
        self.inverse.iter().map(|x| x * x).sum()
    }

    /// `g v` for a real vector.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let d = self.dim();
        (0..d)
            .map(|i| (0..d).map(|j| self.entries[(i, j)] * v[j]).sum())
            .collect()
    }

    /// `g v` for an integer coefficient vector, i.e. a point of the lattice `gZ^d`.
    pub fn apply_int(&self, v: &[i64]) -> Vec<f64> {
        let d = self.dim();
        (0..d)
            .map(|i| (0..d).map(|j| self.entries[(i, j)] * v[j] as f64).sum())
            .collect()
    }

    /// Largest entrywise deviation from `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        max_abs(&(&self.entries - &other.entries))
    }
}

impl TryFrom<Vec<Vec<f64>>> for SpecialLinearMatrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows(&rows)
    }
}

impl From<SpecialLinearMatrix> for Vec<Vec<f64>> {
    fn from(m: SpecialLinearMatrix) -> Self {
        m.to_rows()
    }
}

/// An integer `d×d` matrix. Elements of `Γ = SL_d(Z)` are integer matrices with
/// determinant exactly `+1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<i64>>", into = "Vec<Vec<i64>>")]
pub struct IntegerMatrix {
    dim: usize,
    data: Vec<i64>,
}

impl IntegerMatrix {
    pub fn new(dim: usize, row_major: &[i64]) -> Result<Self> {
        if row_major.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: row_major.len(),
            });
        }
        Ok(Self {
            dim,
            data: row_major.to_vec(),
        })
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidInput("ragged integer matrix".into()));
        }
        Self::new(dim, &rows.concat())
    }

    /// Builds from columns given as coefficient vectors.
    pub fn from_columns(cols: &[Vec<i64>]) -> Result<Self> {
        let dim = cols.len();
        let mut data = vec![0; dim * dim];
        for (j, col) in cols.iter().enumerate() {
            if col.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: col.len(),
                });
            }
            for (i, &v) in col.iter().enumerate() {
                data[i * dim + j] = v;
            }
        }
        Ok(Self { dim, data })
    }

    pub fn identity(dim: usize) -> Self {
        let mut data = vec![0; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = 1;
        }
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.dim + j]
    }

    pub fn row_major(&self) -> &[i64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<i64>> {
        self.data.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<i64> {
        (0..self.dim).map(|i| self.get(i, j)).collect()
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.dim)
    }

    pub fn to_real(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j) as f64)
    }

    pub fn transpose(&self) -> Self {
        let d = self.dim;
        let mut data = vec![0; d * d];
        for i in 0..d {
            for j in 0..d {
                data[j * d + i] = self.data[i * d + j];
            }
        }
        Self { dim: d, data }
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        check_dim(self.dim, rhs.dim)?;
        let d = self.dim;
        let mut data = vec![0i64; d * d];
        for i in 0..d {
            for j in 0..d {
                let mut acc: i128 = 0;
                for k in 0..d {
                    acc += self.get(i, k) as i128 * rhs.get(k, j) as i128;
                }
                data[i * d + j] = narrow(acc)?;
            }
        }
        Ok(Self { dim: d, data })
    }

    pub fn mul_vec(&self, v: &[i64]) -> Result<Vec<i64>> {
        check_dim(self.dim, v.len())?;
        (0..self.dim)
            .map(|i| {
                let acc: i128 = (0..self.dim)
                    .map(|j| self.get(i, j) as i128 * v[j] as i128)
                    .sum();
                narrow(acc)
            })
            .collect()
    }

    /// Exact determinant by cofactor-free fraction-free elimination (Bareiss).
    pub fn det(&self) -> i128 {
        let d = self.dim;
        if d == 0 {
            return 1;
        }
        let mut a: Vec<i128> = self.data.iter().map(|&x| x as i128).collect();
        let mut sign = 1i128;
        let mut prev = 1i128;
        for k in 0..d {
            if a[k * d + k] == 0 {
                let Some(p) = (k + 1..d).find(|&r| a[r * d + k] != 0) else {
                    return 0;
                };
                for c in 0..d {
                    a.swap(k * d + c, p * d + c);
                }
                sign = -sign;
            }
            for i in k + 1..d {
                for j in k + 1..d {
                    a[i * d + j] = (a[i * d + j] * a[k * d + k] - a[i * d + k] * a[k * d + j]) / prev;
                }
            }
            prev = a[k * d + k];
        }
        sign * a[d * d - 1]
    }

    pub fn is_in_gamma(&self) -> bool {
        self.det() == 1
    }

    /// Exact inverse of a matrix with determinant `±1`, via the adjugate.
    pub fn inverse_unimodular(&self) -> Result<Self> {
        let det = self.det();
        if det != 1 && det != -1 {
            return Err(Error::NotInGamma { det });
        }
        let d = self.dim;
        let mut data = vec![0i64; d * d];
        for i in 0..d {
            for j in 0..d {
                let cof = self.minor(j, i).det();
                let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
                data[i * d + j] = narrow(sign * cof * det)?;
            }
        }
        Ok(Self { dim: d, data })
    }

    fn minor(&self, skip_row: usize, skip_col: usize) -> Self {
        let d = self.dim;
        if d == 1 {
            return Self { dim: 0, data: vec![] };
        }
        let mut data = Vec::with_capacity((d - 1) * (d - 1));
        for i in (0..d).filter(|&i| i != skip_row) {
            for j in (0..d).filter(|&j| j != skip_col) {
                data.push(self.get(i, j));
            }
        }
        Self { dim: d - 1, data }
    }

    /// `max |γ_ij|, |(γ⁻¹)_ij|`, the integer analogue of [`matrix_norm`].
    pub fn matrix_norm(&self) -> Result<i64> {
        let inv = self.inverse_unimodular()?;
        Ok(self
            .data
            .iter()
            .chain(inv.data.iter())
            .map(|x| x.abs())
            .max()
            .unwrap_or(0))
    }

    /// Operator norm for the sup-norm: maximum absolute row sum.
    pub fn operator_norm(&self) -> f64 {
        self.data
            .chunks(self.dim)
            .map(|r| r.iter().map(|x| x.abs() as f64).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

impl TryFrom<Vec<Vec<i64>>> for IntegerMatrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<i64>>) -> Result<Self> {
        Self::from_rows(&rows)
    }
}

impl From<IntegerMatrix> for Vec<Vec<i64>> {
    fn from(m: IntegerMatrix) -> Self {
        m.to_rows()
    }
}

fn narrow(x: i128) -> Result<i64> {
    i64::try_from(x).map_err(|_| Error::Internal(format!("integer overflow: {x}")))
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

pub(crate) fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Coordinates of a torus point: all exact rationals or all floating.
#[derive(Clone, Debug, PartialEq)]
pub enum TorusCoords {
    Rational(Vec<Ratio<i64>>),
    Float(Vec<f64>),
}

/// A point of `T^d = R^d / Z^d`, normalized into `[0,1)^d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<CoordRepr>", into = "Vec<CoordRepr>")]
pub struct TorusPoint {
    coords: TorusCoords,
}

impl TorusPoint {
    pub fn rational(coords: &[Ratio<i64>]) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidInput("empty torus point".into()));
        }
        Ok(Self {
            coords: TorusCoords::Rational(coords.iter().map(normalize_ratio).collect()),
        })
    }

    /// From `(numerator, denominator)` pairs.
    pub fn from_fractions(pairs: &[(i64, i64)]) -> Result<Self> {
        let ratios = pairs
            .iter()
            .map(|&(p, q)| {
                if q == 0 {
                    Err(Error::InvalidInput("zero denominator".into()))
                } else {
                    Ok(Ratio::new(p, q))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::rational(&ratios)
    }

    pub fn float(coords: &[f64]) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidInput("empty torus point".into()));
        }
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite torus coordinate".into()));
        }
        Ok(Self {
            coords: TorusCoords::Float(coords.iter().map(|&x| wrap_unit(x)).collect()),
        })
    }

    /// Parses coordinates such as `"1/3"`, `"0"` (exact) or `"0.25"` (floating).
    /// Mixing exact and floating forms in one point is rejected.
    pub fn parse(items: &[&str]) -> Result<Self> {
        let reprs = items
            .iter()
            .map(|s| {
                let s = s.trim();
                if s.contains('.') || s.contains('e') || s.contains('E') {
                    s.parse::<f64>()
                        .map(CoordRepr::Num)
                        .map_err(|e| Error::InvalidInput(format!("{s}: {e}")))
                } else {
                    Ok(CoordRepr::Str(s.to_string()))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::try_from(reprs)
    }

    pub fn dim(&self) -> usize {
        match &self.coords {
            TorusCoords::Rational(v) => v.len(),
            TorusCoords::Float(v) => v.len(),
        }
    }

    pub fn coords(&self) -> &TorusCoords {
        &self.coords
    }

    pub fn is_rational(&self) -> bool {
        matches!(self.coords, TorusCoords::Rational(_))
    }

    pub fn rationals(&self) -> Option<&[Ratio<i64>]> {
        match &self.coords {
            TorusCoords::Rational(v) => Some(v),
            TorusCoords::Float(_) => None,
        }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        match &self.coords {
            TorusCoords::Rational(v) => v.iter().map(|r| *r.numer() as f64 / *r.denom() as f64).collect(),
            TorusCoords::Float(v) => v.clone(),
        }
    }

    /// Sup-norm distance on the torus.
    pub fn distance(&self, other: &Self) -> f64 {
        self.to_f64()
            .iter()
            .zip(other.to_f64())
            .map(|(a, b)| torus_gap(a - b))
            .fold(0.0, f64::max)
    }
}

/// Distance from `x` to the nearest integer.
pub fn torus_gap(x: f64) -> f64 {
    let f = x - x.round();
    f.abs()
}

fn wrap_unit(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

fn normalize_ratio(r: &Ratio<i64>) -> Ratio<i64> {
    let q = *r.denom();
    let p = r.numer().mod_floor(&q);
    Ratio::new(p, q)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoordRepr {
    Str(String),
    Num(f64),
}

impl TryFrom<Vec<CoordRepr>> for TorusPoint {
    type Error = Error;
    fn try_from(items: Vec<CoordRepr>) -> Result<Self> {
        let strings = items.iter().filter(|c| matches!(c, CoordRepr::Str(_))).count();
        if strings == items.len() {
            let ratios = items
                .iter()
                .map(|c| match c {
                    CoordRepr::Str(s) => parse_ratio(s),
                    CoordRepr::Num(_) => unreachable!(),
                })
                .collect::<Result<Vec<_>>>()?;
            Self::rational(&ratios)
        } else if strings == 0 {
            let vals: Vec<f64> = items
                .iter()
                .map(|c| match c {
                    CoordRepr::Num(x) => *x,
                    CoordRepr::Str(_) => unreachable!(),
                })
                .collect();
            Self::float(&vals)
        } else {
            Err(Error::InvalidInput(
                "torus point mixes exact and floating coordinates".into(),
            ))
        }
    }
}

impl From<TorusPoint> for Vec<CoordRepr> {
    fn from(p: TorusPoint) -> Self {
        match p.coords {
            TorusCoords::Rational(v) => v
                .iter()
                .map(|r| CoordRepr::Str(format!("{}/{}", r.numer(), r.denom())))
                .collect(),
            TorusCoords::Float(v) => v.into_iter().map(CoordRepr::Num).collect(),
        }
    }
}

/// Parses `"p/q"` or an integer `"p"`.
pub fn parse_ratio(s: &str) -> Result<Ratio<i64>> {
    let bad = || Error::InvalidInput(format!("not a rational: {s:?}"));
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s.trim(), "1"),
    };
    let p: i64 = p.parse().map_err(|_| bad())?;
    let q: i64 = q.parse().map_err(|_| bad())?;
    if q == 0 {
        return Err(bad());
    }
    Ok(Ratio::new(p, q))
}

/// A point `y = g w(b) Γ̂` of the space of affine lattices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineLatticePoint {
    pub linear: SpecialLinearMatrix,
    pub torus: TorusPoint,
}

impl AffineLatticePoint {
    pub fn new(linear: SpecialLinearMatrix, torus: TorusPoint) -> Result<Self> {
        check_dim(linear.dim(), torus.dim())?;
        Ok(Self { linear, torus })
    }
}

/// `d = m + n` split used by the flow `a_t = diag(e^{nt} Id_m, e^{-mt} Id_n)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "(usize, usize)", into = "(usize, usize)")]
pub struct SplittingSignature {
    m: usize,
    n: usize,
}

impl SplittingSignature {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidInput(format!("signature ({m},{n}) needs m,n >= 1")));
        }
        Ok(Self { m, n })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.m + self.n
    }
}

impl TryFrom<(usize, usize)> for SplittingSignature {
    type Error = Error;
    fn try_from((m, n): (usize, usize)) -> Result<Self> {
        Self::new(m, n)
    }
}

impl From<SplittingSignature> for (usize, usize) {
    fn from(s: SplittingSignature) -> Self {
        (s.m, s.n)
    }
}

/// `max_ij (|g_ij|, |(g⁻¹)_ij|)`.
pub fn matrix_norm(g: &SpecialLinearMatrix) -> f64 {
    max_abs(g.entries()).max(max_abs(g.inverse()))
}

/// Operator norm with respect to the sup-norm on `R^d`: the maximum absolute
/// row sum.
pub fn operator_norm(g: &SpecialLinearMatrix) -> f64 {
    g.entries()
        .row_iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn diagonal_flow(t: f64, sig: SplittingSignature) -> Result<SpecialLinearMatrix> {
    let d = sig.dim();
    if !t.is_finite() || t.abs() * d as f64 > 600.0 {
        return Err(Error::FlowOverflow(t.abs() * d as f64));
    }
    let (m, n) = (sig.m() as f64, sig.n() as f64);
    let diag: Vec<f64> = (0..d)
        .map(|i| if i < sig.m() { (n * t).exp() } else { (-m * t).exp() })
        .collect();
    let inv: Vec<f64> = (0..d)
        .map(|i| if i < sig.m() { (-n * t).exp() } else { (m * t).exp() })
        .collect();
    Ok(SpecialLinearMatrix::from_parts(
        DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag)),
        DMatrix::from_diagonal(&nalgebra::DVector::from_vec(inv)),
    ))
}

/// `φ(A) = [[Id_m, A], [0, Id_n]]`, with inverse `φ(-A)`.
pub fn horo_embed(a: &DMatrix<f64>, sig: SplittingSignature) -> Result<SpecialLinearMatrix> {
    let (m, n) = (sig.m(), sig.n());
    if a.shape() != (m, n) {
        return Err(Error::ShapeMismatch {
            expected_rows: m,
            expected_cols: n,
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    let d = m + n;
    let mut entries = DMatrix::identity(d, d);
    let mut inverse = DMatrix::identity(d, d);
    for i in 0..m {
        for j in 0..n {
            entries[(i, m + j)] = a[(i, j)];
            inverse[(i, m + j)] = -a[(i, j)];
        }
    }
    Ok(SpecialLinearMatrix::from_parts(entries, inverse))
}

/// Left action of `G` on affine lattices: only the linear part moves.
pub fn affine_apply(g: &SpecialLinearMatrix, y: &AffineLatticePoint) -> Result<AffineLatticePoint> {
    check_dim(g.dim(), y.linear.dim())?;
    Ok(AffineLatticePoint {
        linear: g.mul(&y.linear)?,
        torus: y.torus.clone(),
    })
}

/// `γ b mod Z^d`, exact for rational `b`.
pub fn torus_act(gamma: &IntegerMatrix, b: &TorusPoint) -> Result<TorusPoint> {
    check_dim(gamma.dim(), b.dim())?;
    let d = gamma.dim();
    match b.coords() {
        TorusCoords::Rational(coords) => {
            let q = coords.iter().fold(1i64, |acc, r| acc.lcm(r.denom()));
            let nums: Vec<i128> = coords
                .iter()
                .map(|r| (*r.numer() as i128) * (q / r.denom()) as i128)
                .collect();
            let out = (0..d)
                .map(|i| {
                    let s: i128 = (0..d).map(|j| gamma.get(i, j) as i128 * nums[j]).sum();
                    let p = s.rem_euclid(q as i128) as i64;
                    Ratio::new(p, q)
                })
                .collect::<Vec<_>>();
            TorusPoint::rational(&out)
        }
        TorusCoords::Float(coords) => {
            let out: Vec<f64> = (0..d)
                .map(|i| (0..d).map(|j| gamma.get(i, j) as f64 * coords[j]).sum())
                .collect();
            TorusPoint::float(&out)
        }
    }
}

/// Sup norm of a real vector.
pub fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

pub fn euclidean_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Smallest `q` with `q·b ∈ Z^d` for exact rational `b`.
pub fn lcm_of_denominators(coords: &[Ratio<i64>]) -> i64 {
    coords
        .iter()
        .filter(|r| !r.is_zero())
        .fold(1i64, |acc, r| acc.lcm(&r.denom().abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn diag2(a: f64) -> SpecialLinearMatrix {
        SpecialLinearMatrix::new(2, &[a, 0.0, 0.0, 1.0 / a]).unwrap()
    }

    #[test]
    fn norms_of_simple_matrices() {
        assert_eq!(matrix_norm(&SpecialLinearMatrix::identity(2)), 1.0);
        assert_eq!(matrix_norm(&diag2(2.0)), 2.0);
        assert_eq!(operator_norm(&SpecialLinearMatrix::identity(2)), 1.0);
        assert_eq!(operator_norm(&diag2(3.0)), 3.0);
    }

    #[test]
    fn rejects_non_unimodular() {
        let err = SpecialLinearMatrix::new(2, &[2.0, 0.0, 0.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::NotUnimodular { .. }));
        assert!(SpecialLinearMatrix::new(2, &[1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn determinant_drift_is_renormalized() {
        let g = SpecialLinearMatrix::new(2, &[1.0 + 5e-10, 0.0, 0.0, 1.0]).unwrap();
        let det = g.entries().clone().lu().determinant();
        assert!((det - 1.0).abs() < 1e-15);
    }

    #[test]
    fn diagonal_flow_values() {
        let s11 = SplittingSignature::new(1, 1).unwrap();
        let id = diagonal_flow(0.0, s11).unwrap();
        assert_eq!(id, SpecialLinearMatrix::identity(2));
        let a = diagonal_flow(2f64.ln(), s11).unwrap();
        assert!(a.max_abs_diff(&diag2(2.0)) < 1e-15);
        let s12 = SplittingSignature::new(1, 2).unwrap();
        let a = diagonal_flow(1.0, s12).unwrap();
        let e = std::f64::consts::E;
        let expect = SpecialLinearMatrix::new(3, &[e * e, 0., 0., 0., 1. / e, 0., 0., 0., 1. / e]).unwrap();
        assert!(a.max_abs_diff(&expect) < 1e-12);
        assert!(matches!(diagonal_flow(301.0, s11), Err(Error::FlowOverflow(_))));
    }

    #[test]
    fn horo_embed_values_and_shape() {
        let s = SplittingSignature::new(1, 1).unwrap();
        let u = horo_embed(&DMatrix::from_element(1, 1, 0.3), s).unwrap();
        assert_eq!(u.to_rows(), vec![vec![1.0, 0.3], vec![0.0, 1.0]]);
        let zero = horo_embed(&DMatrix::zeros(1, 1), s).unwrap();
        assert_eq!(zero, SpecialLinearMatrix::identity(2));
        assert!(horo_embed(&DMatrix::zeros(2, 1), s).is_err());
    }

    #[test]
    fn flow_conjugates_horospherical_coordinates() {
        let sig = SplittingSignature::new(2, 1).unwrap();
        let a = DMatrix::from_row_slice(2, 1, &[0.3, -0.2]);
        let t = 0.7;
        let lhs = diagonal_flow(t, sig)
            .unwrap()
            .mul(&horo_embed(&a, sig).unwrap())
            .unwrap()
            .mul(&diagonal_flow(-t, sig).unwrap())
            .unwrap();
        let rhs = horo_embed(&(a * (3.0 * t).exp()), sig).unwrap();
        assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn torus_act_exact_rational() {
        let gamma = IntegerMatrix::new(2, &[1, 1, 0, 1]).unwrap();
        let b = TorusPoint::from_fractions(&[(1, 3), (2, 3)]).unwrap();
        let out = torus_act(&gamma, &b).unwrap();
        assert_eq!(out, TorusPoint::from_fractions(&[(0, 1), (2, 3)]).unwrap());
        let y = AffineLatticePoint::new(SpecialLinearMatrix::identity(2), b.clone()).unwrap();
        assert_eq!(affine_apply(&SpecialLinearMatrix::identity(2), &y).unwrap(), y);
    }

    #[test]
    fn torus_point_serde_round_trip() {
        let b = TorusPoint::from_fractions(&[(1, 3), (-1, 4)]).unwrap();
        let json = serde_json::to_string(&b).unwrap();
        assert_eq!(json, r#"["1/3","3/4"]"#);
        let back: TorusPoint = serde_json::from_str(&json).unwrap();
        assert_eq!(back, b);
        let mixed: std::result::Result<TorusPoint, _> = serde_json::from_str(r#"["1/3", 0.5]"#);
        assert!(mixed.is_err());
        let g: SpecialLinearMatrix = serde_json::from_str("[[2.0,0.0],[0.0,0.5]]").unwrap();
        assert_eq!(g, diag2(2.0));
    }

    #[test]
    fn integer_inverse_and_det() {
        let g = IntegerMatrix::new(3, &[2, 1, 0, 1, 1, 0, 0, 3, 1]).unwrap();
        assert_eq!(g.det(), 1);
        let inv = g.inverse_unimodular().unwrap();
        assert!(g.mul(&inv).unwrap().is_identity());
        assert!(IntegerMatrix::new(2, &[2, 0, 0, 1]).unwrap().inverse_unimodular().is_err());
    }

    fn sl2() -> impl Strategy<Value = SpecialLinearMatrix> {
        (-2.0f64..2.0, -2.0f64..2.0, 0.2f64..3.0, -2.0f64..2.0).prop_map(|(x, y, s, a)| {
            // [[s, x],[0, 1/s]] · [[1,0],[y,1]] · [[1,a],[0,1]]
            let p = SpecialLinearMatrix::new(2, &[s, x, 0.0, 1.0 / s]).unwrap();
            let q = SpecialLinearMatrix::new(2, &[1.0, 0.0, y, 1.0]).unwrap();
            let r = SpecialLinearMatrix::new(2, &[1.0, a, 0.0, 1.0]).unwrap();
            p.mul(&q).unwrap().mul(&r).unwrap()
        })
    }

    fn gamma2() -> impl Strategy<Value = IntegerMatrix> {
        prop::collection::vec((0usize..2, -3i64..=3), 1..5).prop_map(|ops| {
            let mut g = IntegerMatrix::identity(2);
            for (kind, k) in ops {
                let e = if kind == 0 { [1, k, 0, 1] } else { [1, 0, k, 1] };
                g = g.mul(&IntegerMatrix::new(2, &e).unwrap()).unwrap();
            }
            g
        })
    }

    proptest! {
        #[test]
        fn matrix_norm_symmetries(g in sl2()) {
            let n = matrix_norm(&g);
            prop_assert_eq!(n, matrix_norm(&g.inv()));
            prop_assert_eq!(n, matrix_norm(&g.transpose()));
            prop_assert!(operator_norm(&g) <= 2.0 * n + 1e-12);
        }

        #[test]
        fn matrix_norm_submultiplicative(g1 in sl2(), g2 in sl2()) {
            // C = d suffices: each entry of a product is a sum of d products.
            let prod = g1.mul(&g2).unwrap();
            prop_assert!(matrix_norm(&prod) <= 2.0 * matrix_norm(&g1) * matrix_norm(&g2) * (1.0 + 1e-12));
        }

        #[test]
        fn operator_norm_bounds_action(g in sl2(), v in prop::collection::vec(-5.0f64..5.0, 2)) {
            prop_assert!(sup_norm(&g.apply(&v)) <= operator_norm(&g) * sup_norm(&v) * (1.0 + 1e-12));
        }

        #[test]
        fn products_keep_accurate_inverse(g in sl2(), h in sl2()) {
            let p = g.mul(&h).unwrap();
            let resid = max_abs(&(p.entries() * p.inverse() - DMatrix::identity(2, 2)));
            prop_assert!(resid < 1e-9 * matrix_norm(&p).powi(2).max(1.0));
        }

        #[test]
        fn torus_action_is_a_group_action(g1 in gamma2(), g2 in gamma2(), p1 in 0i64..12, p2 in 0i64..12, q in 1i64..13) {
            let b = TorusPoint::from_fractions(&[(p1, q), (p2, q)]).unwrap();
            let lhs = torus_act(&g1, &torus_act(&g2, &b).unwrap()).unwrap();
            let rhs = torus_act(&g1.mul(&g2).unwrap(), &b).unwrap();
            prop_assert_eq!(&lhs, &rhs);
            let den = lcm_of_denominators(lhs.rationals().unwrap());
            prop_assert_eq!(q % den, 0);
        }
    }
}
