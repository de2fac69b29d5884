//! Fourier coefficients and ball concentration of empirical measures on
//! `T^d`, and a constructive search for the row/column selection in the
//! flattening lemma.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{torus_gap, TorusCoords, TorusPoint};
use crate::orbit::EmpiricalTorusMeasure;

/// Largest frequency box a spectrum may cover.
pub const MAX_SPECTRUM_SIZE: u64 = 10_000_000;
/// Largest center grid for [`max_concentration`].
pub const MAX_CENTER_GRID: u64 = 10_000_000;

/// `m·b mod 1` in `[0, 1)`, reduced exactly for rational points.
pub fn phase(m: &[i64], b: &TorusPoint) -> f64 {
    match b.coords() {
        TorusCoords::Rational(c) => {
            let q = c.iter().fold(1i128, |acc, r| num_integer::lcm(acc, *r.denom() as i128));
            let num: i128 = c
                .iter()
                .zip(m)
                .map(|(r, &mi)| *r.numer() as i128 * (q / *r.denom() as i128) * mi as i128)
                .sum();
            num.rem_euclid(q) as f64 / q as f64
        }
        TorusCoords::Float(c) => c
            .iter()
            .zip(m)
            .map(|(x, &mi)| x * mi as f64)
            .sum::<f64>()
            .rem_euclid(1.0),
    }
}

fn character(m: &[i64], b: &TorusPoint) -> Complex64 {
    let p = phase(m, b);
    if p == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    // sin/cos of −2πp with p folded to (−1/2, 1/2] keeps symmetric errors
    let p = if p > 0.5 { p - 1.0 } else { p };
    let ang = -2.0 * PI * p;
    Complex64::new(ang.cos(), ang.sin())
}

/// `Σ_i w_i e^{−2πi m·b_i}`.
pub fn fourier_coefficient(nu: &EmpiricalTorusMeasure, m: &[i64]) -> Result<Complex64> {
    if m.len() != nu.dim() {
        return Err(Error::DimensionMismatch {
            expected: nu.dim(),
            got: m.len(),
        });
    }
    if m.iter().all(|&x| x == 0) {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let (mut re, mut im) = (Kahan::default(), Kahan::default());
    for (p, w) in nu.points().iter().zip(nu.weights()) {
        let c = character(m, p);
        re.add(w * c.re);
        im.add(w * c.im);
    }
    Ok(Complex64::new(re.sum, im.sum))
}

#[derive(Default)]
struct Kahan {
    sum: f64,
    c: f64,
}

impl Kahan {
    fn add(&mut self, x: f64) {
        let y = x - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FourierSpectrum {
    pub dim: usize,
    pub max_freq: i64,
    pub coeffs: BTreeMap<Vec<i64>, Complex64>,
    pub sample_count: usize,
}

impl FourierSpectrum {
    pub fn get(&self, m: &[i64]) -> Option<Complex64> {
        self.coeffs.get(m).copied()
    }

    /// CLT noise floor `5/√N`.
    pub fn noise_floor(&self) -> f64 {
        5.0 / (self.sample_count as f64).sqrt()
    }

    /// `max_{0 < ‖m‖_∞ ≤ r} |ν̂(m)|`.
    pub fn max_nonzero(&self, r: i64) -> f64 {
        self.coeffs
            .iter()
            .filter(|(m, _)| m.iter().any(|&x| x != 0) && m.iter().all(|x| x.abs() <= r))
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max)
    }
}

/// Every frequency of the box `‖m‖_∞ ≤ r` in lexicographic order.
pub fn frequency_box(d: usize, r: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|v| {
                (-r..=r).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

pub fn fourier_spectrum(nu: &EmpiricalTorusMeasure, max_freq: i64) -> Result<FourierSpectrum> {
    if max_freq < 0 {
        return Err(Error::Precondition("max_freq must be nonnegative".into()));
    }
    let d = nu.dim();
    let side = 2 * max_freq as u64 + 1;
    let size = side.checked_pow(d as u32).unwrap_or(u64::MAX);
    if size > MAX_SPECTRUM_SIZE {
        return Err(Error::Precondition(format!(
            "frequency box of {size} entries exceeds {MAX_SPECTRUM_SIZE}"
        )));
    }
    let freqs = frequency_box(d, max_freq);
    let values: Vec<Complex64> = freqs
        .par_iter()
        .map(|m| fourier_coefficient(nu, m))
        .collect::<Result<_>>()?;
    Ok(FourierSpectrum {
        dim: d,
        max_freq,
        coeffs: freqs.into_iter().zip(values).collect(),
        sample_count: nu.len(),
    })
}

/// `{m : 0 < ‖m‖_∞ ≤ r, |ν̂(m)| ≥ η}`.
pub fn large_coefficient_set(spec: &FourierSpectrum, r: i64, eta: f64) -> Result<Vec<Vec<i64>>> {
    if r > spec.max_freq {
        return Err(Error::Precondition(format!(
            "radius {r} exceeds the spectrum box {}",
            spec.max_freq
        )));
    }
    Ok(spec
        .coeffs
        .iter()
        .filter(|(m, c)| m.iter().any(|&x| x != 0) && m.iter().all(|x| x.abs() <= r) && c.norm() >= eta)
        .map(|(m, _)| m.clone())
        .collect())
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho > 0.0 && rho < 0.5) {
        return Err(Error::Precondition(format!("rho = {rho} not in (0, 1/2)")));
    }
    Ok(())
}

/// Slack on the closed-ball test so that centers on a rational grid and
/// points at exactly distance `ρ` count as inside.
const BALL_SLACK: f64 = 1e-12;

fn torus_sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| torus_gap(x - y)).fold(0.0, f64::max)
}

/// Mass of the closed sup-ball `B(p, ρ)` on the torus.
pub fn ball_mass(nu: &EmpiricalTorusMeasure, p: &TorusPoint, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    if p.dim() != nu.dim() {
        return Err(Error::DimensionMismatch {
            expected: nu.dim(),
            got: p.dim(),
        });
    }
    let c = p.to_f64();
    let mut acc = Kahan::default();
    for (q, w) in nu.points().iter().zip(nu.weights()) {
        if torus_sup_distance(&q.to_f64(), &c) <= rho + BALL_SLACK {
            acc.add(*w);
        }
    }
    Ok(acc.sum)
}

/// Spatial hash of the points into cells of width at least `ρ`.
struct CellIndex {
    k: i64,
    d: usize,
    coords: Vec<Vec<f64>>,
    cells: HashMap<Vec<i64>, Vec<usize>>,
}

impl CellIndex {
    fn new(coords: Vec<Vec<f64>>, rho: f64, d: usize) -> Self {
        // at most ~10⁶ cells overall
        let cap = (1e6f64).powf(1.0 / d as f64).floor().max(1.0) as i64;
        let k = ((1.0 / rho).floor() as i64).clamp(1, cap);
        let mut cells: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        for (i, c) in coords.iter().enumerate() {
            cells.entry(Self::cell_of(c, k)).or_default().push(i);
        }
        Self { k, d, coords, cells }
    }

    fn cell_of(c: &[f64], k: i64) -> Vec<i64> {
        c.iter().map(|x| ((x * k as f64).floor() as i64).rem_euclid(k)).collect()
    }

    fn neighbors(&self, c: &[f64]) -> Vec<Vec<i64>> {
        let base = Self::cell_of(c, self.k);
        let mut out = vec![vec![]];
        for axis in 0..self.d {
            let mut offsets: Vec<i64> = (-1..=1).map(|o| (base[axis] + o).rem_euclid(self.k)).collect();
            offsets.sort_unstable();
            offsets.dedup();
            out = out
                .into_iter()
                .flat_map(|v: Vec<i64>| {
                    offsets.iter().map(move |&o| {
                        let mut w = v.clone();
                        w.push(o);
                        w
                    })
                })
                .collect();
        }
        out
    }

    fn mass(&self, c: &[f64], rho: f64, weights: &[f64]) -> f64 {
        let mut acc = Kahan::default();
        for cell in self.neighbors(c) {
            if let Some(ids) = self.cells.get(&cell) {
                for &i in ids {
                    if torus_sup_distance(&self.coords[i], c) <= rho + BALL_SLACK {
                        acc.add(weights[i]);
                    }
                }
            }
        }
        acc.sum
    }
}

/// Maximizes [`ball_mass`] over the centers `(ρ/2)Z^d ∩ [0,1)^d` and all
/// sample points. Ties (within `1e-12`) prefer sample points over grid
/// centers, then the lexicographically smallest center.
pub fn max_concentration(nu: &EmpiricalTorusMeasure, rho: f64) -> Result<(TorusPoint, f64)> {
    check_rho(rho)?;
    let d = nu.dim();
    let step = rho / 2.0;
    let per_axis = (1.0 / step).ceil() as u64;
    let grid_size = per_axis.checked_pow(d as u32).unwrap_or(u64::MAX);
    if grid_size > MAX_CENTER_GRID {
        return Err(Error::Precondition(format!(
            "center grid of {grid_size} points exceeds {MAX_CENTER_GRID}"
        )));
    }
    let coords: Vec<Vec<f64>> = nu.points().iter().map(|p| p.to_f64()).collect();
    let index = CellIndex::new(coords.clone(), rho, d);
    let weights = nu.weights();

    // (mass, is_grid, center coordinates, source point)
    let sample_best = coords
        .par_iter()
        .enumerate()
        .map(|(i, c)| (index.mass(c, rho, weights), i))
        .collect::<Vec<_>>();
    let grid_best: Vec<(f64, Vec<f64>)> = (0..grid_size)
        .into_par_iter()
        .map(|g| {
            let mut rem = g;
            let mut c = vec![0.0; d];
            for x in c.iter_mut().rev() {
                *x = (rem % per_axis) as f64 * step;
                rem /= per_axis;
            }
            (index.mass(&c, rho, weights), c)
        })
        .filter(|(_, c)| c.iter().all(|&x| x < 1.0))
        .collect();

    let top = sample_best
        .iter()
        .map(|s| s.0)
        .chain(grid_best.iter().map(|g| g.0))
        .fold(0.0, f64::max);
    let tied = |m: f64| m >= top - 1e-12;
    let lex = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal);
    if let Some(&(mass, i)) = sample_best
        .iter()
        .filter(|s| tied(s.0))
        .min_by(|a, b| lex(&coords[a.1], &coords[b.1]))
    {
        return Ok((nu.points()[i].clone(), mass));
    }
    let (mass, c) = grid_best
        .into_iter()
        .filter(|g| tied(g.0))
        .min_by(|a, b| lex(&a.1, &b.1))
        .ok_or_else(|| Error::Internal("no concentration center".into()))?;
    Ok((TorusPoint::float(&c)?, mass))
}

/// Data of the flattening lemma: rows `I`, columns `J`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatteningInstance {
    pub a: Vec<Vec<f64>>,
    /// `(re, im)` pairs with modulus at most one.
    pub b: Vec<Vec<(f64, f64)>>,
    pub lambda: f64,
    pub tau: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlattenMethod {
    Random,
    Exhaustive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Flattening {
    pub j_prime: Vec<usize>,
    pub i_double_prime: Vec<usize>,
    pub theta: f64,
    pub j0: Vec<usize>,
    pub attempts: usize,
    pub method: FlattenMethod,
}

const FLATTEN_RETRIES: usize = 10_000;
const EXHAUSTIVE_LIMIT: usize = 20;
const SECTORS: usize = 16;

impl FlatteningInstance {
    pub fn rows(&self) -> usize {
        self.a.len()
    }

    pub fn cols(&self) -> usize {
        self.a.first().map_or(0, |r| r.len())
    }

    fn bij(&self, i: usize, j: usize) -> Complex64 {
        let (re, im) = self.b[i][j];
        Complex64::new(re, im)
    }

    /// Checks shapes and the two hypotheses of the lemma.
    pub fn validate(&self) -> Result<()> {
        let (ni, nj) = (self.rows(), self.cols());
        if ni == 0 || nj == 0 {
            return Err(Error::Precondition("I and J must be nonempty".into()));
        }
        if self.b.len() != ni || self.a.iter().any(|r| r.len() != nj) || self.b.iter().any(|r| r.len() != nj) {
            return Err(Error::Precondition("a and b must both be |I|×|J|".into()));
        }
        if !(self.lambda > 0.0 && self.tau > 0.0) {
            return Err(Error::Precondition("lambda and tau must be positive".into()));
        }
        let cap = self.lambda / (ni * nj) as f64;
        let mut total = Complex64::new(0.0, 0.0);
        for i in 0..ni {
            for j in 0..nj {
                let a = self.a[i][j];
                if !(a >= 0.0 && a <= cap * (1.0 + 1e-12)) {
                    return Err(Error::Precondition(format!("a[{i}][{j}] = {a} outside [0, λ/|I×J|]")));
                }
                let b = self.bij(i, j);
                if b.norm() > 1.0 + 1e-12 {
                    return Err(Error::Precondition(format!("|b[{i}][{j}]| > 1")));
                }
                total += a * b;
            }
        }
        if total.norm() < self.tau * (1.0 - 1e-12) {
            return Err(Error::Precondition(format!(
                "|Σ a b| = {} below tau = {}",
                total.norm(),
                self.tau
            )));
        }
        Ok(())
    }

    /// `{i : |Σ_{j∈J'} b_ij| / |J| ≥ τ/(2⁶λ)}`.
    pub fn rows_for(&self, j_prime: &[usize]) -> Vec<usize> {
        let thr = self.tau / (64.0 * self.lambda);
        let nj = self.cols() as f64;
        (0..self.rows())
            .filter(|&i| {
                let s: Complex64 = j_prime.iter().map(|&j| self.bij(i, j)).sum();
                s.norm() / nj >= thr
            })
            .collect()
    }

    /// `τ³/(2¹⁷λ³)·|I|`.
    pub fn row_target(&self) -> f64 {
        (self.tau / self.lambda).powi(3) / 131_072.0 * self.rows() as f64
    }

    /// Both conclusions of the lemma, evaluated from scratch.
    pub fn is_valid(&self, j_prime: &[usize], i_double_prime: &[usize]) -> bool {
        let nj = self.cols();
        let mut sorted = j_prime.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != j_prime.len() || sorted.iter().any(|&j| j >= nj) {
            return false;
        }
        if 2 * j_prime.len() < nj {
            return false;
        }
        let rows = self.rows_for(j_prime);
        rows == i_double_prime && rows.len() as f64 >= self.row_target()
    }
}

/// Finds `J' ⊆ J` with `|J'| ≥ |J|/2` and the rows `I''` on which
/// `|Σ_{J'} b_ij|/|J| ≥ τ/(2⁶λ)`, with `|I''| ≥ τ³/(2¹⁷λ³)|I|`.
///
/// The search follows the existence argument: keep the pairs with large `a`
/// and `b`, pick the best of 16 phase sectors, keep the rows dense in that
/// sector, take the cyclic half-window `J₀` of columns holding the most of
/// their mass, and draw `J' = (J∖J₀) ∪ (random half of J₀)`. Instances with
/// `|J| ≤ 20` fall back to exhaustive search if the random draws fail.
pub fn flatten_weights(inst: &FlatteningInstance, seed: u64) -> Result<Flattening> {
    inst.validate()?;
    let (ni, nj) = (inst.rows(), inst.cols());
    let size = (ni * nj) as f64;
    let (lambda, tau) = (inst.lambda, inst.tau);

    // E: pairs with a ≥ τ/(2|I×J|) and |b| ≥ τ/(2λ)
    let in_e = |i: usize, j: usize| inst.a[i][j] >= tau / (2.0 * size) && inst.bij(i, j).norm() >= tau / (2.0 * lambda);
    let sector_of = |theta: f64, b: Complex64| {
        let diff = (b.arg() - theta + PI).rem_euclid(2.0 * PI) - PI;
        diff.abs() <= PI / 4.0
    };
    let mut theta = 0.0;
    let mut best_val = f64::NEG_INFINITY;
    for k in 0..SECTORS {
        let th = 2.0 * PI * k as f64 / SECTORS as f64;
        let rot = Complex64::from_polar(1.0, -th);
        let mut val = 0.0;
        for i in 0..ni {
            for j in 0..nj {
                let b = inst.bij(i, j);
                if in_e(i, j) && sector_of(th, b) {
                    val += inst.a[i][j] * (b * rot).re;
                }
            }
        }
        if val > best_val {
            best_val = val;
            theta = th;
        }
    }
    let e_theta: Vec<Vec<bool>> = (0..ni)
        .map(|i| (0..nj).map(|j| in_e(i, j) && sector_of(theta, inst.bij(i, j))).collect())
        .collect();
    let dense = tau / (32.0 * lambda) * nj as f64;
    let i_prime: Vec<usize> = (0..ni)
        .filter(|&i| e_theta[i].iter().filter(|&&x| x).count() as f64 >= dense)
        .collect();
    let col_weight: Vec<usize> = (0..nj)
        .map(|j| i_prime.iter().filter(|&&i| e_theta[i][j]).count())
        .collect();
    let half = nj / 2;
    let mut j0: Vec<usize> = Vec::new();
    let mut best_window = None;
    for start in 0..nj {
        let w: usize = (0..half).map(|o| col_weight[(start + o) % nj]).sum();
        if best_window.map_or(true, |(bw, _)| w > bw) {
            best_window = Some((w, start));
        }
    }
    if let Some((_, start)) = best_window {
        j0 = (0..half).map(|o| (start + o) % nj).collect();
        j0.sort_unstable();
    }
    let fixed: Vec<usize> = (0..nj).filter(|j| !j0.contains(j)).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 1..=FLATTEN_RETRIES {
        let mut jp: Vec<usize> = fixed.clone();
        jp.extend(j0.iter().copied().filter(|_| rng.gen_bool(0.5)));
        jp.sort_unstable();
        let rows = inst.rows_for(&jp);
        if inst.is_valid(&jp, &rows) {
            return Ok(Flattening {
                j_prime: jp,
                i_double_prime: rows,
                theta,
                j0,
                attempts: attempt,
                method: FlattenMethod::Random,
            });
        }
    }
    if nj > EXHAUSTIVE_LIMIT {
        return Err(Error::SearchExhausted(format!(
            "no valid J' after {FLATTEN_RETRIES} random draws (|J| = {nj})"
        )));
    }
    // Exhaustive: supersets of J∖J₀ first, then every subset of size ≥ |J|/2.
    let as_set = |mask: u32| -> Vec<usize> { (0..nj).filter(|j| mask >> j & 1 == 1).collect() };
    let fixed_mask: u32 = fixed.iter().map(|&j| 1u32 << j).sum();
    let mut tried = 0usize;
    let supersets = (0u32..1 << nj).filter(|m| m & fixed_mask == fixed_mask);
    let rest = (0u32..1 << nj).filter(|m| m & fixed_mask != fixed_mask);
    for mask in supersets.chain(rest) {
        let jp = as_set(mask);
        if 2 * jp.len() < nj {
            continue;
        }
        tried += 1;
        let rows = inst.rows_for(&jp);
        if inst.is_valid(&jp, &rows) {
            return Ok(Flattening {
                j_prime: jp,
                i_double_prime: rows,
                theta,
                j0,
                attempts: FLATTEN_RETRIES + tried,
                method: FlattenMethod::Exhaustive,
            });
        }
    }
    Err(Error::SearchExhausted(format!(
        "no J' ⊆ J satisfies the conclusion (|I| = {ni}, |J| = {nj})"
    )))
}

/// Every valid `J'` by brute force over all subsets (for `|J| ≤ 20`).
pub fn exhaustive_flattenings(inst: &FlatteningInstance) -> Result<Vec<Vec<usize>>> {
    inst.validate()?;
    let nj = inst.cols();
    if nj > EXHAUSTIVE_LIMIT {
        return Err(Error::Precondition(format!("|J| = {nj} too large for exhaustive search")));
    }
    Ok((0u32..1 << nj)
        .into_par_iter()
        .filter_map(|mask| {
            let jp: Vec<usize> = (0..nj).filter(|j| mask >> j & 1 == 1).collect();
            let rows = inst.rows_for(&jp);
            inst.is_valid(&jp, &rows).then_some(jp)
        })
        .collect())
}
