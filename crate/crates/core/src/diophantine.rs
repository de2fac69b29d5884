//! Diophantine quality `ζ(b, T)`, Diophantine types, common denominators and
//! the counting side of the effective Weyl criterion for circle rotations.

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{lcm_of_denominators, torus_act, torus_gap, IntegerMatrix, TorusCoords, TorusPoint};

/// `‖q b‖_Z`, the sup-distance from `q b` to the nearest integer vector.
/// Exact for rational `b`: the result is returned as `num / den`.
fn qb_gap(b: &TorusPoint, q: u64) -> Gap {
    match b.coords() {
        TorusCoords::Rational(coords) => {
            let mut best = Ratio::new(0i128, 1);
            for r in coords {
                let den = *r.denom() as i128;
                let num = (*r.numer() as i128 * q as i128).rem_euclid(den);
                let gap = Ratio::new(num.min(den - num), den);
                if gap > best {
                    best = gap;
                }
            }
            Gap::Exact(best)
        }
        TorusCoords::Float(coords) => {
            let qf = q as f64;
            Gap::Float(coords.iter().map(|&x| torus_gap(qf * x)).fold(0.0, f64::max))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Gap {
    Exact(Ratio<i128>),
    Float(f64),
}

impl Gap {
    fn value(self) -> f64 {
        match self {
            Gap::Exact(r) => *r.numer() as f64 / *r.denom() as f64,
            Gap::Float(x) => x,
        }
    }

    fn is_zero(self) -> bool {
        match self {
            Gap::Exact(r) => *r.numer() == 0,
            Gap::Float(x) => x == 0.0,
        }
    }

    /// `self ≤ N²/T`, with exact zero detection for rationals.
    fn within(self, n: u64, t: f64) -> bool {
        if self.is_zero() {
            return true;
        }
        let nn = (n as f64) * (n as f64);
        match self {
            Gap::Exact(r) => (*r.numer() as f64) * t <= nn * (*r.denom() as f64),
            Gap::Float(x) => x * t <= nn,
        }
    }

    fn min(self, other: Gap) -> Gap {
        match (self, other) {
            (Gap::Exact(a), Gap::Exact(b)) => Gap::Exact(a.min(b)),
            _ => {
                if other.value() < self.value() {
                    other
                } else {
                    self
                }
            }
        }
    }
}

/// Upper bound `⌈T^{d/(2d+1)}⌉` from Minkowski's theorem applied to
/// `{(q, qb − p) : |q| ≤ N, ‖qb − p‖ ≤ N^{−1/d}}`.
pub fn minkowski_zeta_bound(d: usize, t: f64) -> u64 {
    let e = d as f64 / (2 * d + 1) as f64;
    t.powf(e).ceil().max(1.0) as u64
}

/// `ζ(b, T) = min{N ≥ 1 : min_{1≤q≤N} ‖q b‖_Z ≤ N²/T}`.
pub fn zeta(b: &TorusPoint, t: f64) -> Result<u64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Precondition(format!("T = {t} must be positive")));
    }
    let guard = minkowski_zeta_bound(b.dim(), t) + 1;
    let mut best = qb_gap(b, 1);
    let mut n = 1u64;
    loop {
        if n > 1 {
            best = best.min(qb_gap(b, n));
        }
        if best.within(n, t) {
            return Ok(n);
        }
        n += 1;
        if n > guard {
            return Err(Error::Internal(format!(
                "zeta scan passed the Minkowski bound {guard} at T = {t}"
            )));
        }
    }
}

/// Smallest `q ≥ 1` with `q b ∈ Z^d`.
pub fn common_denominator(b: &TorusPoint) -> Result<i64> {
    let coords = b.rationals().ok_or(Error::NotRational)?;
    Ok(lcm_of_denominators(coords))
}

/// Finite-range witness that `b` has type `M` with constant `c`: checks
/// `min_p |b − p/q|_∞ > c·q^{−M}` for every `q ≤ q_max`.
pub fn diophantine_type_check(b: &TorusPoint, big_m: f64, c: f64, q_max: u64) -> bool {
    (1..=q_max).all(|q| {
        let gap = qb_gap(b, q);
        if gap.is_zero() {
            return false;
        }
        // |b − p/q| = ‖qb‖_Z / q
        gap.value() / q as f64 > c * (q as f64).powf(-big_m)
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZetaPropertyReport {
    pub t: f64,
    pub c: f64,
    pub zeta_t: u64,
    pub zeta_ct: u64,
    /// `⌈√c ζ(b,T)⌉`
    pub rescaling_rhs: u64,
    pub rescaling_ok: bool,
    pub gamma_op: f64,
    pub gamma_inv_op: f64,
    /// `ζ(b, T/‖γ⁻¹‖_op)`
    pub gammab_lower: u64,
    /// `ζ(γb, T)`
    pub gammab_middle: u64,
    /// `ζ(b, ‖γ‖_op T)`
    pub gammab_upper: u64,
    pub gammab_ok: bool,
}

impl ZetaPropertyReport {
    pub fn passed(&self) -> bool {
        self.rescaling_ok && self.gammab_ok
    }
}

/// Evaluates the rescaling inequality `ζ(b,cT) ≤ ⌈√c ζ(b,T)⌉` and the
/// sandwich `ζ(b, T/‖γ⁻¹‖_op) ≤ ζ(γb, T) ≤ ζ(b, ‖γ‖_op T)`.
pub fn zeta_property_suite(b: &TorusPoint, t: f64, c: f64, gamma: &IntegerMatrix) -> Result<ZetaPropertyReport> {
    if !(c > 1.0) {
        return Err(Error::Precondition(format!("c = {c} must exceed 1")));
    }
    if !gamma.is_in_gamma() {
        return Err(Error::NotInGamma { det: gamma.det() });
    }
    let zeta_t = zeta(b, t)?;
    let zeta_ct = zeta(b, c * t)?;
    let rescaling_rhs = (c.sqrt() * zeta_t as f64).ceil() as u64;
    let gamma_op = gamma.operator_norm();
    let gamma_inv_op = gamma.inverse_unimodular()?.operator_norm();
    let gb = torus_act(gamma, b)?;
    let gammab_lower = zeta(b, t / gamma_inv_op)?;
    let gammab_middle = zeta(&gb, t)?;
    let gammab_upper = zeta(b, gamma_op * t)?;
    Ok(ZetaPropertyReport {
        t,
        c,
        zeta_t,
        zeta_ct,
        rescaling_rhs,
        rescaling_ok: zeta_ct <= rescaling_rhs,
        gamma_op,
        gamma_inv_op,
        gammab_lower,
        gammab_middle,
        gammab_upper,
        gammab_ok: gammab_lower <= gammab_middle && gammab_middle <= gammab_upper,
    })
}

/// Rotation by `alpha` counted against the window `[x0 − ρ, x0 + ρ] mod 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeylInstance {
    /// One-dimensional torus point; exact rationals are allowed for counting
    /// but rejected by [`weyl_bound`].
    pub alpha: TorusPoint,
    pub t: u64,
    pub x0: f64,
    pub rho: f64,
}

impl WeylInstance {
    pub fn new(alpha: TorusPoint, t: u64, x0: f64, rho: f64) -> Result<Self> {
        if alpha.dim() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: alpha.dim(),
            });
        }
        if !(rho > 0.0 && rho < 0.5) {
            return Err(Error::Precondition(format!("rho = {rho} not in (0, 1/2)")));
        }
        if t == 0 {
            return Err(Error::Precondition("T must be positive".into()));
        }
        Ok(Self { alpha, t, x0, rho })
    }
}

/// `|{0 ≤ k < T : {kα} ∈ Ξ}|` by direct loop.
pub fn weyl_count(w: &WeylInstance) -> u64 {
    let mut count = 0;
    match w.alpha.coords() {
        TorusCoords::Rational(r) => {
            let (p, q) = (*r[0].numer() as i128, *r[0].denom() as i128);
            for k in 0..w.t as i128 {
                let num = (k * p).mod_floor(&q);
                let x = num as f64 / q as f64;
                if torus_gap(x - w.x0) <= w.rho {
                    count += 1;
                }
            }
        }
        TorusCoords::Float(a) => {
            let a = a[0];
            for k in 0..w.t {
                if torus_gap(k as f64 * a - w.x0) <= w.rho {
                    count += 1;
                }
            }
        }
    }
    count
}

/// `ρ + ρ⁻¹ ζ(α, T)⁻¹`.
pub fn weyl_bound(w: &WeylInstance) -> Result<f64> {
    if w.alpha.is_rational() {
        return Err(Error::RationalRejected);
    }
    let z = zeta(&w.alpha, w.t as f64)?;
    Ok(w.rho + 1.0 / (w.rho * z as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden() -> TorusPoint {
        TorusPoint::float(&[(5f64.sqrt() - 1.0) / 2.0]).unwrap()
    }

    #[test]
    fn zeta_examples() {
        let half = TorusPoint::from_fractions(&[(1, 2)]).unwrap();
        assert_eq!(zeta(&half, 100.0).unwrap(), 2);
        assert_eq!(zeta(&golden(), 100.0).unwrap(), 4);
        assert!(zeta(&half, 0.0).is_err());
        // the origin is hit at q = 1
        let zero = TorusPoint::from_fractions(&[(0, 1), (0, 1)]).unwrap();
        assert_eq!(zeta(&zero, 1e9).unwrap(), 1);
    }

    #[test]
    fn zeta_never_passes_minkowski_bound() {
        let b = TorusPoint::float(&[2f64.sqrt() - 1.0, 3f64.sqrt() - 1.0]).unwrap();
        for k in 1..=12 {
            let t = 10f64.powi(k);
            assert!(zeta(&b, t).unwrap() <= minkowski_zeta_bound(2, t));
        }
    }

    #[test]
    fn common_denominators() {
        let p = |v: &[(i64, i64)]| TorusPoint::from_fractions(v).unwrap();
        assert_eq!(common_denominator(&p(&[(1, 3), (2, 3)])).unwrap(), 3);
        assert_eq!(common_denominator(&p(&[(0, 1), (0, 1)])).unwrap(), 1);
        assert_eq!(common_denominator(&p(&[(1, 4), (1, 6)])).unwrap(), 12);
        assert_eq!(common_denominator(&golden()), Err(Error::NotRational));
    }

    #[test]
    fn type_witnesses() {
        let half = TorusPoint::from_fractions(&[(1, 2)]).unwrap();
        assert!(!diophantine_type_check(&half, 2.0, 0.4, 10));
        assert!(diophantine_type_check(&golden(), 2.0, 0.2, 100_000));
    }

    #[test]
    fn weyl_examples() {
        let zero = TorusPoint::from_fractions(&[(0, 1)]).unwrap();
        assert_eq!(weyl_count(&WeylInstance::new(zero.clone(), 50, 0.5, 0.1).unwrap()), 0);
        assert_eq!(weyl_count(&WeylInstance::new(zero, 50, 0.05, 0.1).unwrap()), 50);
        let half = TorusPoint::from_fractions(&[(1, 2)]).unwrap();
        let w = WeylInstance::new(half, 100, 0.5, 0.1).unwrap();
        assert_eq!(weyl_count(&w), 50);
        assert_eq!(weyl_bound(&w), Err(Error::RationalRejected));
        let w = WeylInstance::new(golden(), 1000, 0.25, 0.05).unwrap();
        assert!((weyl_count(&w) as i64 - 100).abs() <= 5);
        assert!(WeylInstance::new(golden(), 10, 0.0, 0.5).is_err());
    }

    #[test]
    fn weyl_bound_is_monotone_in_t() {
        let mut prev = f64::INFINITY;
        for k in 2..=7 {
            let w = WeylInstance::new(golden(), 10u64.pow(k), 0.3, 0.05).unwrap();
            let b = weyl_bound(&w).unwrap();
            assert!(b <= prev);
            prev = b;
        }
    }

    #[test]
    fn suite_on_golden_pair() {
        let b = TorusPoint::float(&[2f64.sqrt() - 1.0, 3f64.sqrt() - 1.0]).unwrap();
        let g = IntegerMatrix::new(2, &[2, 1, 1, 1]).unwrap();
        let r = zeta_property_suite(&b, 1e6, 3.5, &g).unwrap();
        assert!(r.passed(), "{r:?}");
    }
}
