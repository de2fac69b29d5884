//! Expanding horospherical translates `a_t u y₀`: seeded sampling of `V`, the
//! exact decomposition `a_s u ι(x) = ξ γ`, the torus coordinate `σ`, and the
//! empirical measures built from them.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::enumerate::Budget;
use crate::error::{Error, Result};
use crate::fundamental::{distance_x_with_budget, reduce};
use crate::geometry::{
    diagonal_flow, horo_embed, matrix_norm, sup_norm, torus_act, AffineLatticePoint, IntegerMatrix,
    SpecialLinearMatrix, SplittingSignature, TorusPoint,
};
use crate::lattice::{height, LatticeDescriptor};

/// Samples per RNG stream.
pub const CHUNK: usize = 1024;
/// Tolerance on the reconstruction `ξγ = a_s u ι(x)`, relative to `max(1, ‖ξ‖)`.
pub const DECOMPOSE_TOL: f64 = 1e-6;

/// `V = φ([−η, η]^{m×n})`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeighborhoodV {
    pub sig: SplittingSignature,
    pub half_width: f64,
}

impl NeighborhoodV {
    pub fn new(sig: SplittingSignature, half_width: f64) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::Precondition(format!("half width {half_width} must be positive")));
        }
        Ok(Self { sig, half_width })
    }

    /// The cube with `η = 1/2`.
    pub fn standard(sig: SplittingSignature) -> Self {
        Self { sig, half_width: 0.5 }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        let (m, n) = (self.sig.m(), self.sig.n());
        let eta = self.half_width;
        DMatrix::from_fn(m, n, |_, _| rng.gen_range(-eta..=eta))
    }
}

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

/// Runs `f` on `count` samples of `V`. Chunk `k` draws from its own stream of
/// `seed`, so the output does not depend on the number of workers.
pub fn map_samples<T, F>(v: &NeighborhoodV, count: usize, seed: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &DMatrix<f64>) -> Result<T> + Sync,
{
    let chunks = count.div_ceil(CHUNK);
    let parts: Vec<Result<Vec<T>>> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = chunk_rng(seed, k);
            let lo = k * CHUNK;
            let hi = (lo + CHUNK).min(count);
            (lo..hi).map(|i| f(i, &v.draw(&mut rng))).collect()
        })
        .collect();
    let mut out = Vec::with_capacity(count);
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

/// I.i.d. uniform points of `[−η, η]^{m×n}`, reproducible from `seed`.
pub fn sample_v(v: &NeighborhoodV, count: usize, seed: u64) -> Result<Vec<DMatrix<f64>>> {
    if count == 0 {
        return Err(Error::Precondition("sample count must be at least 1".into()));
    }
    map_samples(v, count, seed, |_, u| Ok(u.clone()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub xi: SpecialLinearMatrix,
    pub gamma: IntegerMatrix,
}

/// `a_s φ(u) x_rep = ξ γ` with `ξ` reduced.
pub fn decompose(x_rep: &SpecialLinearMatrix, u: &DMatrix<f64>, s: f64, sig: SplittingSignature) -> Result<Decomposition> {
    if x_rep.dim() != sig.dim() {
        return Err(Error::DimensionMismatch {
            expected: sig.dim(),
            got: x_rep.dim(),
        });
    }
    let p = diagonal_flow(s, sig)?.mul(&horo_embed(u, sig)?)?.mul(x_rep)?;
    let r = reduce(&p)?;
    let (xi, gamma) = (r.rep, r.gamma);
    check_reconstruction(&xi, &gamma, &p)?;
    Ok(Decomposition { xi, gamma })
}

/// `ξγ ≈ P` and `ξ⁻¹P ≈ γ`; the latter is what would be rounded to recover
/// `γ` from floating data, so its distance to the integers is the precision
/// margin actually left.
fn check_reconstruction(xi: &SpecialLinearMatrix, gamma: &IntegerMatrix, p: &SpecialLinearMatrix) -> Result<()> {
    let scale = matrix_norm(xi).max(1.0);
    let back = xi.mul_int(gamma)?;
    let r1 = back.max_abs_diff(p) / scale;
    let q = xi.inv().mul(p)?;
    let d = gamma.dim();
    let mut r2: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            r2 = r2.max((q.get(i, j) - gamma.get(i, j) as f64).abs());
        }
    }
    let residual = r1.max(r2);
    if residual > DECOMPOSE_TOL || !residual.is_finite() {
        return Err(Error::PrecisionExhausted { residual });
    }
    Ok(())
}

/// Torus coordinate of `y = g w(b) Γ̂` relative to the fundamental domain:
/// with `g = ι(gΓ)·γ₀`, `σ(y) = γ₀ b`.
pub fn sigma(y: &AffineLatticePoint) -> Result<TorusPoint> {
    let r = reduce(&y.linear)?;
    torus_act(&r.gamma, &y.torus)
}

/// `σ(a_t φ(u) y)` by reducing the translated linear part directly.
pub fn translate_sigma(y: &AffineLatticePoint, u: &DMatrix<f64>, t: f64, sig: SplittingSignature) -> Result<TorusPoint> {
    let p = diagonal_flow(t, sig)?.mul(&horo_embed(u, sig)?)?.mul(&y.linear)?;
    sigma(&AffineLatticePoint::new(p, y.torus.clone())?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitSample {
    /// Row-major `m×n` coordinate of `u ∈ V`.
    pub u: Vec<f64>,
    pub xi: SpecialLinearMatrix,
    pub gamma: IntegerMatrix,
    pub sigma_point: TorusPoint,
    pub height_after: f64,
}

impl OrbitSample {
    pub fn u_matrix(&self, sig: SplittingSignature) -> DMatrix<f64> {
        DMatrix::from_row_slice(sig.m(), sig.n(), &self.u)
    }
}

/// Weighted point cloud on `T^d`, optionally carrying the orbit sample each
/// point came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalTorusMeasure {
    points: Vec<TorusPoint>,
    weights: Vec<f64>,
    meta: Vec<OrbitSample>,
}

impl EmpiricalTorusMeasure {
    pub fn new(points: Vec<TorusPoint>, weights: Vec<f64>, meta: Vec<OrbitSample>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("empty measure".into()));
        }
        if weights.len() != points.len() || !(meta.is_empty() || meta.len() == points.len()) {
            return Err(Error::InvalidInput("points, weights and metadata differ in length".into()));
        }
        let d = points[0].dim();
        if points.iter().any(|p| p.dim() != d) {
            return Err(Error::InvalidInput("points of mixed dimension".into()));
        }
        if weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(Error::InvalidInput("weights must be finite and nonnegative".into()));
        }
        let total = compensated_sum(weights.iter().copied());
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { points, weights, meta })
    }

    /// Equal weights `1/N`.
    pub fn uniform(points: Vec<TorusPoint>) -> Result<Self> {
        let n = points.len();
        let w = 1.0 / n.max(1) as f64;
        Self::new(points, vec![w; n], Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[TorusPoint] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn meta(&self) -> &[OrbitSample] {
        &self.meta
    }
}

pub(crate) fn compensated_sum(xs: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut c) = (0.0f64, 0.0f64);
    for x in xs {
        let y = x - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}

/// `σ_* μ_{y₀,t}` from `count` samples of `V`.
pub fn orbit_pushforward(
    y0: &AffineLatticePoint,
    t: f64,
    v: &NeighborhoodV,
    count: usize,
    seed: u64,
) -> Result<EmpiricalTorusMeasure> {
    if count == 0 {
        return Err(Error::Precondition("sample count must be at least 1".into()));
    }
    if y0.linear.dim() != v.sig.dim() {
        return Err(Error::DimensionMismatch {
            expected: v.sig.dim(),
            got: y0.linear.dim(),
        });
    }
    let start = reduce(&y0.linear)?;
    let sigma0 = torus_act(&start.gamma, &y0.torus)?;
    let x_rep = start.rep;
    let samples = map_samples(v, count, seed, |_, u| {
        let dec = decompose(&x_rep, u, t, v.sig)?;
        let sigma_point = torus_act(&dec.gamma, &sigma0)?;
        let height_after = height(&LatticeDescriptor::new(dec.xi.clone()))?;
        Ok(OrbitSample {
            u: row_major(u),
            xi: dec.xi,
            gamma: dec.gamma,
            sigma_point,
            height_after,
        })
    })?;
    let points = samples.iter().map(|s| s.sigma_point.clone()).collect();
    let w = 1.0 / count as f64;
    EmpiricalTorusMeasure::new(points, vec![w; count], samples)
}

fn row_major(u: &DMatrix<f64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(u.len());
    for i in 0..u.nrows() {
        for j in 0..u.ncols() {
            out.push(u[(i, j)]);
        }
    }
    out
}

/// `C¹` monotone bump: 1 on `[0, 1]`, 0 on `[5, ∞)`, cubic in between.
pub fn bump(x: f64) -> f64 {
    if x <= 1.0 {
        1.0
    } else if x >= 5.0 {
        0.0
    } else {
        let s = (x - 1.0) / 4.0;
        1.0 - s * s * (3.0 - 2.0 * s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocalizedMeasure {
    pub measure: EmpiricalTorusMeasure,
    /// `Σ w_i ω(ξ_iΓ)` before renormalization.
    pub mass: f64,
}

/// Reweights an orbit measure by `ω(ξΓ) = χ(d^X(ξΓ, zΓ)/r)`.
pub fn localized_measure(orbit: &EmpiricalTorusMeasure, z_rep: &SpecialLinearMatrix, r: f64) -> Result<LocalizedMeasure> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Precondition(format!("radius {r} must be positive")));
    }
    if orbit.meta.is_empty() {
        return Err(Error::InvalidInput("localization needs orbit metadata".into()));
    }
    let cutoff = 5.0 * r;
    let omegas: Vec<f64> = orbit
        .meta
        .par_iter()
        .map(|s| {
            let mut budget = Budget::default();
            Ok(distance_x_with_budget(&s.xi, z_rep, cutoff, &mut budget)?.map_or(0.0, |d| bump(d / r)))
        })
        .collect::<Result<_>>()?;
    let raw: Vec<f64> = orbit.weights.iter().zip(&omegas).map(|(w, o)| w * o).collect();
    let mass = compensated_sum(raw.iter().copied());
    let threshold = 10.0 / orbit.len() as f64;
    if mass < threshold {
        return Err(Error::EmptyLocalization { weight: mass, threshold });
    }
    let weights: Vec<f64> = raw.iter().map(|w| w / mass).collect();
    // renormalize against rounding so the sum is 1 to the last bit we can get
    let fix = compensated_sum(weights.iter().copied());
    let weights = weights.into_iter().map(|w| w / fix).collect();
    Ok(LocalizedMeasure {
        measure: EmpiricalTorusMeasure::new(orbit.points.clone(), weights, orbit.meta.clone())?,
        mass,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaOrbit {
    /// `γᵀ m₀` for every kept sample, in sample order.
    pub vectors: Vec<Vec<i64>>,
    pub count: usize,
    pub kept_fraction: f64,
}

impl GammaOrbit {
    /// Largest number of samples sharing one vector, over `count`.
    pub fn max_bin_mass(&self) -> f64 {
        let mut bins: std::collections::HashMap<&[i64], usize> = std::collections::HashMap::new();
        for v in &self.vectors {
            *bins.entry(v.as_slice()).or_default() += 1;
        }
        bins.values().copied().max().unwrap_or(0) as f64 / self.count as f64
    }

    pub fn max_sup_norm(&self) -> i64 {
        self.vectors
            .iter()
            .map(|v| v.iter().map(|x| x.abs()).max().unwrap_or(0))
            .max()
            .unwrap_or(0)
    }
}

/// Multiset `{γ_s(x,u)ᵀ m₀ : u ∈ V_{x,ε}}` over sampled `u`, where `u` is kept
/// iff `‖ξ‖ < ε⁻¹` and the first `m` coordinates of `(ξᵀ)⁻¹ m₀` exceed
/// `ε²‖m₀‖` in sup norm.
#[allow(clippy::too_many_arguments)]
pub fn gamma_orbit(
    x_rep: &SpecialLinearMatrix,
    m0: &[i64],
    s: f64,
    v: &NeighborhoodV,
    count: usize,
    seed: u64,
    epsilon: f64,
) -> Result<GammaOrbit> {
    let d = v.sig.dim();
    if m0.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: m0.len() });
    }
    if m0.iter().all(|&x| x == 0) {
        return Err(Error::Precondition("m0 must be nonzero".into()));
    }
    if !(epsilon > 0.0 && epsilon <= 0.5) {
        return Err(Error::Precondition(format!("epsilon {epsilon} not in (0, 1/2]")));
    }
    if count == 0 {
        return Err(Error::Precondition("sample count must be at least 1".into()));
    }
    let m = v.sig.m();
    let m0f: Vec<f64> = m0.iter().map(|&x| x as f64).collect();
    let m0_norm = sup_norm(&m0f);
    let kept = map_samples(v, count, seed, |_, u| {
        let dec = decompose(x_rep, u, s, v.sig)?;
        if matrix_norm(&dec.xi) >= 1.0 / epsilon {
            return Ok(None);
        }
        let xt = dec.xi.entries().transpose();
        let rhs = nalgebra::DVector::from_vec(m0f.clone());
        let z = xt
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Internal("singular ξ in linear solve".into()))?;
        let head = sup_norm(&z.as_slice()[..m]);
        if head <= epsilon * epsilon * m0_norm {
            return Ok(None);
        }
        let gt = dec.gamma.transpose();
        Ok(Some(gt.mul_vec(m0)?))
    })?;
    let vectors: Vec<Vec<i64>> = kept.into_iter().flatten().collect();
    Ok(GammaOrbit {
        kept_fraction: vectors.len() as f64 / count as f64,
        vectors,
        count,
    })
}

/// One evaluation of the two-step comparison `μ_t(f)` vs `(a_s u₀)_* μ_{t−s}(f)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InductiveEstimate {
    pub t: f64,
    pub s: f64,
    /// Largest entrywise deviation of `a_s φ(u₀) a_{t−s} φ(A)` from
    /// `a_t φ(e^{−(m+n)(t−s)}A₀ + A)` over the samples.
    pub composition_residual: f64,
    /// `m_H(u'V △ V)/m_H(V)` with `u' = a_{−(t−s)} u₀ a_{t−s}`, exact for the cube.
    pub strip_fraction: f64,
    /// Monte Carlo estimate of `|μ_t(f) − (a_s u₀)_* μ_{t−s}(f)|` for the
    /// character `f(y) = e^{−2πi m·σ(y)}`.
    pub difference: f64,
}

/// Estimates the difference in the inductive relation for the character
/// `e^{−2πi m·σ(y)}`. Both measures are integrals of the same function over
/// `V` and over the shifted cube `u'V`, so the difference is an integral over
/// the two thin strips of `u'V △ V`; those strips are sampled directly.
#[allow(clippy::too_many_arguments)]
pub fn inductive_check(
    y0: &AffineLatticePoint,
    t: f64,
    s: f64,
    u0: &DMatrix<f64>,
    freq: &[i64],
    v: &NeighborhoodV,
    count: usize,
    seed: u64,
) -> Result<InductiveEstimate> {
    if !(0.0 <= s && s < t) {
        return Err(Error::Precondition(format!("need 0 ≤ s < t, got s = {s}, t = {t}")));
    }
    let sig = v.sig;
    let (m, n) = (sig.m(), sig.n());
    if u0.shape() != (m, n) || freq.len() != sig.dim() {
        return Err(Error::InvalidInput("u0 or frequency has the wrong shape".into()));
    }
    let shrink = (-((m + n) as f64) * (t - s)).exp();
    let delta: Vec<f64> = row_major(u0).iter().map(|x| x * shrink).collect();
    let eta = v.half_width;
    let overlap: f64 = delta.iter().map(|x| (1.0 - x.abs() / (2.0 * eta)).max(0.0)).product();
    let strip_fraction = 2.0 * (1.0 - overlap);

    let start = reduce(&y0.linear)?;
    let sigma0 = torus_act(&start.gamma, &y0.torus)?;
    let x_rep = start.rep;
    let a_s_u0 = diagonal_flow(s, sig)?.mul(&horo_embed(u0, sig)?)?;
    let a_ts = diagonal_flow(t - s, sig)?;
    let a_t = diagonal_flow(t, sig)?;
    let character = |u: &DMatrix<f64>| -> Result<(f64, f64)> {
        let dec = decompose(&x_rep, u, t, sig)?;
        let p = torus_act(&dec.gamma, &sigma0)?;
        let phase = crate::measure::phase(freq, &p);
        let ang = -2.0 * std::f64::consts::PI * phase;
        Ok((ang.cos(), ang.sin()))
    };

    // Points of u'V∖V, drawn uniformly, and points of V∖u'V (mirror image).
    let outer = |sign: f64, rng: &mut ChaCha8Rng| -> DMatrix<f64> {
        let shift: Vec<f64> = delta.iter().map(|x| sign * x).collect();
        loop {
            let u = sample_strip(&shift, eta, rng);
            if let Some(mut u) = u {
                if sign < 0.0 {
                    // V∖u'V = ((V − δ)∖V) + δ
                    for (x, dx) in u.iter_mut().zip(&delta) {
                        *x += dx;
                    }
                }
                return DMatrix::from_row_slice(m, n, &u);
            }
        }
    };
    if strip_fraction == 0.0 {
        return Ok(InductiveEstimate {
            t,
            s,
            composition_residual: 0.0,
            strip_fraction,
            difference: 0.0,
        });
    }
    let chunks = count.div_ceil(CHUNK);
    let parts: Vec<Result<(f64, f64, f64)>> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = chunk_rng(seed, k);
            let lo = k * CHUNK;
            let hi = (lo + CHUNK).min(count);
            let (mut re, mut im, mut resid) = (0.0, 0.0, 0.0f64);
            for _ in lo..hi {
                let plus = outer(1.0, &mut rng);
                let minus = outer(-1.0, &mut rng);
                let (a, b) = character(&plus)?;
                let (c, d) = character(&minus)?;
                re += a - c;
                im += b - d;
                // exact two-step composition at the sampled point of u'V
                let inner: DMatrix<f64> = DMatrix::from_fn(m, n, |i, j| plus[(i, j)] - delta[i * n + j]);
                let lhs = a_s_u0.mul(&a_ts)?.mul(&horo_embed(&inner, sig)?)?;
                let rhs = a_t.mul(&horo_embed(&plus, sig)?)?;
                let scale = matrix_norm(&rhs).max(1.0);
                resid = resid.max(lhs.max_abs_diff(&rhs) / scale);
            }
            Ok((re, im, resid))
        })
        .collect();
    let (mut re, mut im, mut resid) = (0.0, 0.0, 0.0f64);
    for p in parts {
        let (a, b, c) = p?;
        re += a;
        im += b;
        resid = resid.max(c);
    }
    let half = strip_fraction / 2.0;
    let (re, im) = (re / count as f64 * half, im / count as f64 * half);
    Ok(InductiveEstimate {
        t,
        s,
        composition_residual: resid,
        strip_fraction,
        difference: re.hypot(im),
    })
}

/// One uniform draw from `(V + shift) ∖ V` for the cube `[−η, η]^k`, or
/// `None` if the draw was rejected. A coordinate slab is chosen with
/// probability proportional to its volume and the point is kept with
/// probability `1/(number of slabs containing it)`, which makes the result
/// uniform on the union of slabs. Returned in row-major order.
fn sample_strip(shift: &[f64], eta: f64, rng: &mut ChaCha8Rng) -> Option<Vec<f64>> {
    let k = shift.len();
    let widths: Vec<f64> = shift.iter().map(|x| x.abs().min(2.0 * eta)).collect();
    let slab_vol: Vec<f64> = (0..k)
        .map(|i| {
            widths[i]
                * (0..k)
                    .filter(|&j| j != i)
                    .map(|_| 2.0 * eta)
                    .product::<f64>()
        })
        .collect();
    let total: f64 = slab_vol.iter().sum();
    let mut pick = rng.gen::<f64>() * total;
    let mut slab = 0;
    for (i, v) in slab_vol.iter().enumerate() {
        if pick < *v {
            slab = i;
            break;
        }
        pick -= v;
        slab = i;
    }
    let mut p = vec![0.0; k];
    for i in 0..k {
        let (lo, hi) = (shift[i] - eta, shift[i] + eta);
        if i == slab {
            // the part of [lo, hi] outside [−η, η]
            let (a, b) = if shift[i] > 0.0 { (eta.max(lo), hi) } else { (lo, (-eta).min(hi)) };
            p[i] = a + rng.gen::<f64>() * (b - a);
        } else {
            p[i] = lo + rng.gen::<f64>() * (hi - lo);
        }
    }
    let covering = (0..k).filter(|&i| p[i].abs() > eta).count();
    if covering == 0 {
        return None;
    }
    if rng.gen::<f64>() * covering as f64 <= 1.0 {
        Some(p)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::TorusCoords;

    fn sig11() -> SplittingSignature {
        SplittingSignature::new(1, 1).unwrap()
    }

    #[test]
    fn sampling_is_reproducible_and_centered() {
        let v = NeighborhoodV::standard(sig11());
        let a = sample_v(&v, 5000, 7).unwrap();
        let b = sample_v(&v, 5000, 7).unwrap();
        assert_eq!(a, b);
        let mean: f64 = a.iter().map(|u| u[(0, 0)]).sum::<f64>() / 5000.0;
        assert!(mean.abs() < 3.0 * 0.5 / (5000.0f64 * 12.0).sqrt() * 2.0);
        assert!(a.iter().all(|u| u[(0, 0)].abs() <= 0.5));
        assert_eq!(sample_v(&v, 1, 3).unwrap()[0], sample_v(&v, 1, 3).unwrap()[0]);
    }

    #[test]
    fn trivial_decomposition() {
        let x = SpecialLinearMatrix::identity(2);
        let dec = decompose(&x, &DMatrix::zeros(1, 1), 0.0, sig11()).unwrap();
        assert_eq!(dec.xi, x);
        assert!(dec.gamma.is_identity());
    }

    #[test]
    fn decomposition_reconstructs() {
        let x = SpecialLinearMatrix::identity(2);
        for (u, s) in [(0.3, 1.0), (-0.41, 6.0), (0.123456, 11.5)] {
            let um = DMatrix::from_element(1, 1, u);
            let dec = decompose(&x, &um, s, sig11()).unwrap();
            let p = diagonal_flow(s, sig11()).unwrap().mul(&horo_embed(&um, sig11()).unwrap()).unwrap();
            let back = dec.xi.mul_int(&dec.gamma).unwrap();
            assert!(back.max_abs_diff(&p) <= 1e-6 * matrix_norm(&dec.xi).max(1.0));
            assert_eq!(dec.gamma.det(), 1);
        }
    }

    #[test]
    fn sigma_of_reduced_point_is_unchanged() {
        let b = TorusPoint::from_fractions(&[(1, 3), (2, 3)]).unwrap();
        let y = AffineLatticePoint::new(SpecialLinearMatrix::identity(2), b.clone()).unwrap();
        assert_eq!(sigma(&y).unwrap(), b);
    }

    #[test]
    fn rational_orbit_stays_on_grid() {
        let b = TorusPoint::from_fractions(&[(1, 3), (2, 3)]).unwrap();
        let y = AffineLatticePoint::new(SpecialLinearMatrix::identity(2), b).unwrap();
        let v = NeighborhoodV::standard(sig11());
        let nu = orbit_pushforward(&y, 3.0, &v, 300, 1).unwrap();
        for p in nu.points() {
            let TorusCoords::Rational(c) = p.coords() else { panic!("lost exactness") };
            assert!(c.iter().all(|r| 3 % r.denom() == 0));
        }
    }

    #[test]
    fn tiny_neighborhood_barely_moves() {
        let b = TorusPoint::float(&[0.2, 0.7]).unwrap();
        let y = AffineLatticePoint::new(SpecialLinearMatrix::identity(2), b.clone()).unwrap();
        let v = NeighborhoodV::new(sig11(), 1e-6).unwrap();
        let nu = orbit_pushforward(&y, 0.0, &v, 50, 2).unwrap();
        assert!(nu.points().iter().all(|p| p.distance(&b) < 1e-12));
    }

    #[test]
    fn bump_shape() {
        assert_eq!(bump(0.0), 1.0);
        assert_eq!(bump(1.0), 1.0);
        assert_eq!(bump(5.0), 0.0);
        assert!((bump(3.0) - 0.5).abs() < 1e-12);
        let mut prev = 1.0;
        for k in 0..=100 {
            let x = 1.0 + 4.0 * k as f64 / 100.0;
            assert!(bump(x) <= prev + 1e-15);
            prev = bump(x);
        }
    }

    #[test]
    fn localization_limits() {
        let y = AffineLatticePoint::new(
            SpecialLinearMatrix::identity(2),
            TorusPoint::float(&[0.1, 0.2]).unwrap(),
        )
        .unwrap();
        let v = NeighborhoodV::new(sig11(), 1e-3).unwrap();
        let nu = orbit_pushforward(&y, 0.5, &v, 200, 3).unwrap();
        let z = nu.meta()[0].xi.clone();
        let all = localized_measure(&nu, &z, 1.0).unwrap();
        assert!((all.mass - 1.0).abs() < 1e-12);
        assert!(matches!(
            localized_measure(&nu, &z, 1e-9),
            Err(Error::EmptyLocalization { .. })
        ));
    }

    #[test]
    fn gamma_orbit_at_time_zero() {
        let x = SpecialLinearMatrix::identity(2);
        let v = NeighborhoodV::new(sig11(), 1e-3).unwrap();
        let g = gamma_orbit(&x, &[1, 0], 0.0, &v, 100, 4, 0.1).unwrap();
        assert_eq!(g.kept_fraction, 1.0);
        assert!(g.vectors.iter().all(|w| w == &vec![1, 0]));
        assert_eq!(g.max_bin_mass(), 1.0);
    }

    #[test]
    fn strip_sampler_stays_in_strip() {
        let mut rng = chunk_rng(9, 0);
        let shift = [0.01, -0.02];
        let mut got = 0;
        while got < 500 {
            if let Some(p) = sample_strip(&shift, 0.5, &mut rng) {
                assert!(p.iter().any(|x| x.abs() > 0.5));
                assert!(p.iter().zip(&shift).all(|(x, s)| (x - s).abs() <= 0.5 + 1e-15));
                got += 1;
            }
        }
    }
}
