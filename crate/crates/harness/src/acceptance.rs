//! The thirteen acceptance criteria. Tolerances, grids, sample counts and
//! seeds are pinned here; nothing is read from the environment.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use horotorus::diophantine::{minkowski_zeta_bound, weyl_bound, weyl_count, zeta, zeta_property_suite, WeylInstance};
use horotorus::fundamental::{f_value, iota, reduce, TIE_GRID, TIE_TOL};
use horotorus::geometry::{
    diagonal_flow, horo_embed, matrix_norm, AffineLatticePoint, IntegerMatrix, SpecialLinearMatrix, SplittingSignature,
    TorusPoint,
};
use horotorus::lattice::{height, siegel_transform, LatticeDescriptor, Norm, RadialStep};
use horotorus::measure::{exhaustive_flattenings, flatten_weights, fourier_coefficient, fourier_spectrum, FlatteningInstance};
use horotorus::orbit::{gamma_orbit, localized_measure, orbit_pushforward, translate_sigma, EmpiricalTorusMeasure, NeighborhoodV};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::Suite;
use crate::error::Result;
use crate::fit::{decay_fit, loglog_fit};

/// Criteria that fail as stated; they are run and reported like the others,
/// and the test target expects them to fail.
///
/// 1: ζ grows like a power of T for typical b, so no uniform bound holds.
/// 8: on s ∈ {2..5} the bin of `m0` itself survives the ε² cut until
/// `s > ln ε⁻²`, so the max-bin slope is far from its asymptotic value.
pub const KNOWN_RED: &[u32] = &[1, 8];

pub const ALL: [u32; 13] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13];

const SEED: u64 = 0x5eed_0001;
/// Samples for the expanding-translate runs shared by criteria 9, 10, 11 and 13.
const ORBIT_SAMPLES: usize = 100_000;
const SHARED_TIME: f64 = 8.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub summary: String,
    pub elapsed_s: f64,
    pub runtime_limit_s: Option<f64>,
}

impl CriterionOutcome {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {} {}: {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.summary
        )
    }
}

pub fn suite_criteria(suite: Suite) -> Vec<u32> {
    match suite {
        Suite::Exact => vec![1, 2, 3, 4, 6, 7, 12],
        Suite::Statistical => vec![5, 8, 9, 10, 11, 13],
        Suite::All => ALL.to_vec(),
    }
}

fn name_and_limit(id: u32) -> (&'static str, Option<f64>) {
    match id {
        1 => ("Dirichlet hard bound", Some(30.0)),
        2 => ("zeta inequality suite", Some(60.0)),
        3 => ("effective Weyl", Some(60.0)),
        4 => ("reduction correctness", Some(300.0)),
        5 => ("height bound for iota", None),
        6 => ("cocycle exactness", Some(300.0)),
        7 => ("X_q invariance", None),
        8 => ("key separation", Some(600.0)),
        9 => ("Fourier decay", Some(600.0)),
        10 => ("cusp-mass scaling", None),
        11 => ("ball-mass scaling", None),
        12 => ("flattening finder", Some(120.0)),
        13 => ("Siegel consistency", None),
        _ => ("unknown", None),
    }
}

/// Orbit measures shared between criteria, keyed by start and time. Only
/// the `t = 8` run is kept; the others are large and used once.
#[derive(Default)]
pub struct Context {
    orbits: Mutex<BTreeMap<(String, u64), Arc<EmpiricalTorusMeasure>>>,
}

impl Context {
    fn orbit(&self, label: &str, b0: &TorusPoint, t: f64) -> Result<Arc<EmpiricalTorusMeasure>> {
        let key = (label.to_string(), t.to_bits());
        if let Some(nu) = self.orbits.lock().expect("orbit cache poisoned").get(&key) {
            return Ok(nu.clone());
        }
        let sig = planar();
        let y0 = AffineLatticePoint::new(SpecialLinearMatrix::identity(2), b0.clone())?;
        let nu = Arc::new(orbit_pushforward(&y0, t, &NeighborhoodV::standard(sig), ORBIT_SAMPLES, SEED)?);
        if t == SHARED_TIME {
            self.orbits.lock().expect("orbit cache poisoned").insert(key, nu.clone());
        }
        Ok(nu)
    }

    fn golden_pair(&self, t: f64) -> Result<Arc<EmpiricalTorusMeasure>> {
        self.orbit("golden", &golden_pair(), t)
    }
}

fn planar() -> SplittingSignature {
    SplittingSignature::new(1, 1).expect("1 + 1 is a valid signature")
}

fn golden_pair() -> TorusPoint {
    TorusPoint::float(&[2f64.sqrt() - 1.0, 3f64.sqrt() - 1.0]).expect("two finite coordinates")
}

fn thirds() -> TorusPoint {
    TorusPoint::from_fractions(&[(1, 3), (2, 3)]).expect("valid fractions")
}

pub fn run_criterion(id: u32, ctx: &Context) -> CriterionOutcome {
    let (name, limit) = name_and_limit(id);
    let start = Instant::now();
    let result = match id {
        1 => dirichlet(),
        2 => zeta_suite(),
        3 => weyl(),
        4 => reduction(),
        5 => iota_height(),
        6 => cocycle(),
        7 => rational_invariance(),
        8 => key_separation(),
        9 => fourier_decay(ctx),
        10 => cusp_mass(ctx),
        11 => ball_mass(ctx),
        12 => flattening(),
        13 => siegel(ctx),
        _ => Ok((false, format!("no criterion {id}"))),
    };
    let elapsed_s = start.elapsed().as_secs_f64();
    let (mut passed, mut summary) = result.unwrap_or_else(|e| (false, format!("error: {e}")));
    if let Some(l) = limit {
        if elapsed_s > l {
            passed = false;
            summary.push_str(&format!("; runtime {elapsed_s:.1} s over the {l} s limit"));
        }
    }
    CriterionOutcome {
        id,
        name: name.to_string(),
        passed,
        summary,
        elapsed_s,
        runtime_limit_s: limit,
    }
}

pub fn run_criteria(ids: &[u32]) -> Vec<CriterionOutcome> {
    let ctx = Context::default();
    ids.iter().map(|&id| run_criterion(id, &ctx)).collect()
}

type Verdict = Result<(bool, String)>;

fn rng_for(id: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    rng.set_stream(id as u64);
    rng
}

/// Product of `steps` random elementary matrices `I ± E_ij`.
fn random_gamma(d: usize, steps: usize, rng: &mut ChaCha8Rng) -> Result<IntegerMatrix> {
    let mut g = IntegerMatrix::identity(d);
    for _ in 0..steps {
        let i = rng.gen_range(0..d);
        let mut j = rng.gen_range(0..d - 1);
        if j >= i {
            j += 1;
        }
        let mut e = IntegerMatrix::identity(d).to_rows();
        e[i][j] = if rng.gen_bool(0.5) { 1 } else { -1 };
        g = g.mul(&IntegerMatrix::from_rows(&e)?)?;
    }
    Ok(g)
}

fn dirichlet() -> Verdict {
    let mut rng = rng_for(1);
    let (mut violations, mut minkowski_violations) = (0, 0);
    let mut worst: Option<(f64, u64, u64, usize, f64)> = None;
    for k in 0..10_000 {
        let d = 2 + k % 2;
        let b: Vec<f64> = (0..d).map(|_| rng.gen()).collect();
        let t = 10f64.powf(rng.gen_range(1.0..=9.0));
        let z = zeta(&TorusPoint::float(&b)?, t)?;
        let bound = t.powf(d as f64 / (3 * d + 1) as f64).ceil() as u64;
        if z > bound {
            violations += 1;
            let ratio = z as f64 / bound as f64;
            if worst.is_none_or(|w| ratio > w.0) {
                worst = Some((ratio, z, bound, d, t));
            }
        }
        if z > minkowski_zeta_bound(d, t) {
            minkowski_violations += 1;
        }
    }
    let mut summary = format!("{violations}/10000 instances exceed ceil(T^(d/(3d+1)))");
    if let Some((_, z, bound, d, t)) = worst {
        summary.push_str(&format!(" (worst zeta = {z} against {bound} at d = {d}, T = {t:.3e})"));
    }
    summary.push_str(&format!(
        "; Dirichlet's ceil(T^(d/(2d+1))) has {minkowski_violations} violations"
    ));
    Ok((violations == 0, summary))
}

fn zeta_suite() -> Verdict {
    let mut rng = rng_for(2);
    let (mut rescaling, mut gammab) = (0, 0);
    for k in 0..10_000 {
        let d = 2 + k % 2;
        let b = if k % 4 < 2 {
            let pairs: Vec<(i64, i64)> = (0..d)
                .map(|_| {
                    let q = rng.gen_range(1..=1000);
                    (rng.gen_range(0..q), q)
                })
                .collect();
            TorusPoint::from_fractions(&pairs)?
        } else {
            TorusPoint::float(&(0..d).map(|_| rng.gen()).collect::<Vec<f64>>())?
        };
        let t = 10f64.powf(rng.gen_range(1.0..6.0));
        let c = rng.gen_range(1.01f64.ln()..100f64.ln()).exp();
        let steps = rng.gen_range(0..12);
        let gamma = random_gamma(d, steps, &mut rng)?;
        let r = zeta_property_suite(&b, t, c, &gamma)?;
        rescaling += usize::from(!r.rescaling_ok);
        gammab += usize::from(!r.gammab_ok);
    }
    Ok((
        rescaling == 0 && gammab == 0,
        format!("rescaling violations {rescaling}/10000, gamma-sandwich violations {gammab}/10000"),
    ))
}

fn weyl() -> Verdict {
    const C_W_MAX: f64 = 20.0;
    let alphas = [("golden", (5f64.sqrt() - 1.0) / 2.0), ("sqrt2-1", 2f64.sqrt() - 1.0), ("pi-3", PI - 3.0)];
    let mut c_w: f64 = 0.0;
    let mut arg = String::new();
    for (label, a) in alphas {
        for t in [1_000u64, 10_000, 100_000, 1_000_000] {
            for rho in [0.2, 0.05, 0.01] {
                let w = WeylInstance::new(TorusPoint::float(&[a])?, t, 0.3, rho)?;
                let ratio = weyl_count(&w) as f64 / t as f64 / weyl_bound(&w)?;
                if ratio > c_w {
                    c_w = ratio;
                    arg = format!("{label}, T = {t}, rho = {rho}");
                }
            }
        }
    }
    Ok((c_w <= C_W_MAX, format!("fitted C_W = {c_w:.4} (attained at {arg}), limit {C_W_MAX}")))
}

/// Lagrange–Gauss reduction of a planar basis.
fn gauss_reduce(g: &SpecialLinearMatrix) -> Result<SpecialLinearMatrix> {
    let mut h = g.clone();
    for _ in 0..10_000 {
        let (b1, b2) = (h.column(0), h.column(1));
        let n1 = b1[0] * b1[0] + b1[1] * b1[1];
        let n2 = b2[0] * b2[0] + b2[1] * b2[1];
        if n2 < n1 {
            h = h.mul_int(&IntegerMatrix::new(2, &[0, -1, 1, 0])?)?;
            continue;
        }
        let mu = ((b1[0] * b2[0] + b1[1] * b2[1]) / n1).round() as i64;
        if mu == 0 {
            return Ok(h);
        }
        h = h.mul_int(&IntegerMatrix::new(2, &[1, -mu, 0, 1])?)?;
    }
    Err(horotorus::Error::Internal("Gauss reduction did not terminate".into()).into())
}

/// Minimizer of `F(hγ)` over `γ ∈ SL_2(Z)` with `matrix_norm(γ) ≤ bound`,
/// ties resolved to the lexicographically largest entries on the grid.
fn brute_reduce(h: &SpecialLinearMatrix, bound: i64) -> Result<SpecialLinearMatrix> {
    let mut cands: Vec<(f64, SpecialLinearMatrix)> = Vec::new();
    let mut push = |g: [i64; 4]| -> Result<()> {
        let m = h.mul_int(&IntegerMatrix::new(2, &g)?)?;
        cands.push((f_value(&m), m));
        Ok(())
    };
    for a in -bound..=bound {
        for b in -bound..=bound {
            for c in -bound..=bound {
                if a != 0 {
                    let num = 1 + b * c;
                    if num % a == 0 && (num / a).abs() <= bound {
                        push([a, b, c, num / a])?;
                    }
                } else if b * c == -1 {
                    for d in -bound..=bound {
                        push([0, b, c, d])?;
                    }
                }
            }
        }
    }
    let best = cands.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
    let key = |m: &SpecialLinearMatrix| -> Vec<i64> { m.row_major().iter().map(|x| (x / TIE_GRID).round() as i64).collect() };
    let winner = cands
        .into_iter()
        .filter(|c| c.0 <= best + TIE_TOL * best.max(1.0))
        .max_by(|x, y| key(&x.1).cmp(&key(&y.1)))
        .expect("identity is always a candidate");
    Ok(winner.1)
}

fn reduction() -> Verdict {
    const INSTANCES: usize = 500;
    const TOL: f64 = 1e-9;
    let mut rng = rng_for(4);
    let sig = planar();
    let (mut invariance, mut oracle, mut uncertified) = (0, 0, 0);
    for _ in 0..INSTANCES {
        let t = rng.gen_range(0.0..=6.0);
        let x = DMatrix::from_element(1, 1, rng.gen_range(-3.0..3.0));
        let y = DMatrix::from_element(1, 1, rng.gen_range(-1.0..1.0));
        let g = diagonal_flow(t, sig)?
            .mul(&horo_embed(&x, sig)?)?
            .mul(&horo_embed(&y, sig)?.transpose())?;
        let r = reduce(&g)?;
        uncertified += usize::from(!r.certificate.certified);
        let scale = r.fvalue.max(1.0);
        for _ in 0..5 {
            let steps = rng.gen_range(1..=10);
            let gamma0 = random_gamma(2, steps, &mut rng)?;
            let r2 = reduce(&g.mul_int(&gamma0)?)?;
            if r2.rep.max_abs_diff(&r.rep) > TOL * scale {
                invariance += 1;
            }
        }
        let brute = brute_reduce(&gauss_reduce(&g)?, 50)?;
        if brute.max_abs_diff(&r.rep) > TOL * scale {
            oracle += 1;
        }
    }
    Ok((
        invariance == 0 && oracle == 0 && uncertified == 0,
        format!(
            "{INSTANCES} matrices: {invariance} invariance mismatches over 5 gamma0 each, {oracle} brute-force mismatches, {uncertified} uncertified"
        ),
    ))
}

fn iota_height() -> Verdict {
    let mut rng = rng_for(5);
    let mut by_dim: BTreeMap<usize, Vec<(f64, f64)>> = BTreeMap::new();
    let mut c_fit: f64 = 0.0;
    for k in 0..1000 {
        let d = 2 + k % 2;
        let sig = SplittingSignature::new(1, d - 1)?;
        let mut diag = vec![0.0; d];
        for x in diag.iter_mut().take(d - 1) {
            *x = rng.gen_range(-2.5..2.5);
        }
        diag[d - 1] = -diag.iter().sum::<f64>();
        let mut rows = vec![vec![0.0; d]; d];
        for (i, x) in diag.iter().enumerate() {
            rows[i][i] = x.exp();
        }
        let a = DMatrix::from_fn(1, d - 1, |_, _| rng.gen_range(-2.0..2.0));
        let steps = rng.gen_range(0..8);
        let g = SpecialLinearMatrix::from_rows(&rows)?
            .mul(&horo_embed(&a, sig)?)?
            .mul_int(&random_gamma(d, steps, &mut rng)?)?;
        let ht = height(&LatticeDescriptor::new(g.clone()))?;
        let norm = matrix_norm(&iota(&g)?);
        c_fit = c_fit.max(norm / ht.powi(d as i32 - 1));
        by_dim.entry(d).or_default().push((ht.ln(), norm));
    }
    let mut passed = true;
    let mut parts = Vec::new();
    for (d, series) in &by_dim {
        let fit = loglog_fit(series)?;
        let limit = *d as f64 - 1.0 + 0.1;
        passed &= fit.slope <= limit;
        parts.push(format!("d = {d}: slope {:.3} (limit {limit:.1}, residual {:.3})", fit.slope, fit.residual));
    }
    Ok((passed, format!("C = {c_fit:.3}; {}", parts.join("; "))))
}

fn cocycle() -> Verdict {
    const TIMES: [f64; 6] = [2.0, 4.0, 6.0, 8.0, 10.0, 12.0];
    const PER_TIME: usize = 16_667;
    const RECON_TOL: f64 = 1e-6;
    const SIGMA_TOL: f64 = 1e-9;
    let sig = planar();
    let v = NeighborhoodV::standard(sig);
    let y0 = AffineLatticePoint::new(SpecialLinearMatrix::identity(2), golden_pair())?;
    let x_rep = reduce(&y0.linear)?.rep;
    let (mut recon, mut integral, mut cocycle, mut worst) = (0, 0, 0, 0.0f64);
    for (k, &t) in TIMES.iter().enumerate() {
        let nu = orbit_pushforward(&y0, t, &v, PER_TIME, SEED + k as u64)?;
        let a_t = diagonal_flow(t, sig)?;
        for s in nu.meta() {
            let u = s.u_matrix(sig);
            if !s.gamma.is_in_gamma() {
                integral += 1;
            }
            let lhs = a_t.mul(&horo_embed(&u, sig)?)?.mul(&x_rep)?;
            let rhs = s.xi.mul_int(&s.gamma)?;
            let resid = lhs.max_abs_diff(&rhs) / matrix_norm(&s.xi).max(1.0);
            worst = worst.max(resid);
            if resid > RECON_TOL {
                recon += 1;
            }
            let direct = translate_sigma(&y0, &u, t, sig)?;
            if direct.distance(&s.sigma_point) > SIGMA_TOL {
                cocycle += 1;
            }
        }
    }
    let total = TIMES.len() * PER_TIME;
    Ok((
        recon == 0 && integral == 0 && cocycle == 0,
        format!(
            "{total} samples at t up to 12: {recon} reconstruction failures (worst residual {worst:.2e}), {integral} non-integral gamma, {cocycle} sigma-cocycle failures"
        ),
    ))
}

fn rational_invariance() -> Verdict {
    let sig = planar();
    let y0 = AffineLatticePoint::new(SpecialLinearMatrix::identity(2), thirds())?;
    let nu = orbit_pushforward(&y0, 6.0, &NeighborhoodV::standard(sig), 10_000, SEED)?;
    let off_grid = nu
        .points()
        .iter()
        .filter(|p| p.rationals().is_none_or(|r| r.iter().any(|x| 3 % x.denom() != 0)))
        .count();
    let mut worst: f64 = 0.0;
    for a in -2..=2i64 {
        for b in -2..=2i64 {
            let c = fourier_coefficient(&nu, &[3 * a, 3 * b])?;
            worst = worst.max((c - num_complex::Complex64::new(1.0, 0.0)).norm());
        }
    }
    Ok((
        off_grid == 0 && worst <= 1e-12,
        format!("10000 samples at t = 6: {off_grid} points off (1/3)Z^2; max |c(m) - 1| over m in 3Z^2 = {worst:.1e}"),
    ))
}

fn key_separation() -> Verdict {
    const EPSILON: f64 = 0.1;
    const SAMPLES: usize = 100_000;
    let sig = planar();
    let v = NeighborhoodV::standard(sig);
    let x = SpecialLinearMatrix::identity(2);
    let d = 2.0;
    let sanity = d * d * (1.0 + v.half_width) / EPSILON * matrix_norm(&x);
    let mut bins = Vec::new();
    let mut r_fit: f64 = 0.0;
    let mut kept = Vec::new();
    for s in [2.0, 3.0, 4.0, 5.0] {
        let orbit = gamma_orbit(&x, &[1, 0], s, &v, SAMPLES, SEED, EPSILON)?;
        r_fit = r_fit.max(orbit.max_sup_norm() as f64 / (sig.n() as f64 * s).exp());
        bins.push((s, orbit.max_bin_mass()));
        kept.push(format!("{:.3}", orbit.kept_fraction));
    }
    let fit = decay_fit(&bins)?;
    let (lo, hi) = (-2.3, -1.7);
    let slope_ok = (lo..=hi).contains(&fit.slope);
    Ok((
        r_fit <= sanity && slope_ok,
        format!(
            "R_fit = {r_fit:.3} (sanity bound {sanity:.0}); max-bin slope {:.3} ± {:.3} (window [{lo}, {hi}], residual {:.3}); bins {}; kept fractions {}",
            fit.slope,
            fit.slope_ci,
            fit.residual,
            bins.iter().map(|b| format!("{:.2e}", b.1)).collect::<Vec<_>>().join(" "),
            kept.join(" ")
        ),
    ))
}

fn fourier_decay(ctx: &Context) -> Verdict {
    const MAX_FREQ: i64 = 4;
    let floor = 5.0 / (ORBIT_SAMPLES as f64).sqrt();
    let times: Vec<f64> = (2..=10).map(f64::from).collect();
    let mut series = Vec::new();
    for &t in &times {
        let spec = fourier_spectrum(&*ctx.golden_pair(t)?, MAX_FREQ)?;
        series.push((t, spec.max_nonzero(MAX_FREQ)));
    }
    // decreasing while above the floor; the fit uses the same stretch plus
    // the first point at the floor
    let mut monotone = true;
    let mut fit_pts = vec![series[0]];
    for w in series.windows(2) {
        if w[0].1 <= floor {
            break;
        }
        fit_pts.push(w[1]);
        if w[1].1 >= w[0].1 {
            monotone = false;
        }
    }
    let fit = decay_fit(&fit_pts);

    // control: b0 = (1/3, 2/3)
    let mut on_lattice: f64 = 0.0;
    let mut off_first = 0.0;
    let mut off_last = 0.0;
    for (k, &t) in times.iter().enumerate() {
        let spec = fourier_spectrum(&*ctx.orbit("thirds", &thirds(), t)?, MAX_FREQ)?;
        let mut off: f64 = 0.0;
        for (m, c) in &spec.coeffs {
            if m.iter().all(|x| x % 3 == 0) {
                on_lattice = on_lattice.max((c - num_complex::Complex64::new(1.0, 0.0)).norm());
            } else {
                off = off.max(c.norm());
            }
        }
        if k == 0 {
            off_first = off;
        }
        off_last = off;
    }
    // uniform measure on the eight nonzero points of (1/3)Z²/Z² has |c| = 1/8
    let control_ok = on_lattice <= 1e-12 && off_last < off_first && (off_last - 0.125).abs() <= floor;

    let values = series.iter().map(|p| format!("{:.4}", p.1)).collect::<Vec<_>>().join(" ");
    let (fit_ok, fit_text) = match fit {
        Ok(f) => (
            f.slope < -0.1 && f.residual < 0.5,
            format!("slope {:.3} ± {:.3}, residual {:.3} over {} points", f.slope, f.slope_ci, f.residual, f.points),
        ),
        Err(e) => (false, format!("fit failed: {e}")),
    };
    Ok((
        monotone && fit_ok && control_ok,
        format!(
            "max |c| for t = 2..10: {values} (floor {floor:.4}); monotone above floor: {monotone}; {fit_text}; control: |c - 1| on 3Z^2 = {on_lattice:.1e}, off-lattice max {off_first:.4} -> {off_last:.4} (limit 1/8)"
        ),
    ))
}

fn cusp_mass(ctx: &Context) -> Verdict {
    let nu = ctx.golden_pair(SHARED_TIME)?;
    let mut series = Vec::new();
    for eps in [0.5, 0.33, 0.25, 0.2] {
        let frac = nu.meta().iter().filter(|s| s.height_after > 1.0 / eps).count() as f64 / nu.len() as f64;
        series.push((f64::ln(eps), frac));
    }
    let fit = loglog_fit(&series)?;
    let d = 2.0;
    let ok = (fit.slope - d).abs() <= 0.25 * d;
    Ok((
        ok,
        format!(
            "fractions {}; slope {:.3} ± {:.3} (target {d} ± 25%, residual {:.3})",
            series.iter().map(|p| format!("{:.4}", p.1)).collect::<Vec<_>>().join(" "),
            fit.slope,
            fit.slope_ci,
            fit.residual
        ),
    ))
}

fn ball_mass(ctx: &Context) -> Verdict {
    let nu = ctx.golden_pair(SHARED_TIME)?;
    let z = SpecialLinearMatrix::identity(2);
    let mut series = Vec::new();
    for r in [0.1, 0.07, 0.05] {
        series.push((f64::ln(r), localized_measure(&nu, &z, r)?.mass));
    }
    let fit = loglog_fit(&series)?;
    let ok = (fit.slope - 3.0).abs() <= 1.0;
    Ok((
        ok,
        format!(
            "masses {}; slope {:.3} (target 3 ± 1, residual {:.3})",
            series.iter().map(|p| format!("{:.3e}", p.1)).collect::<Vec<_>>().join(" "),
            fit.slope,
            fit.residual
        ),
    ))
}

/// Random instance satisfying the hypotheses: `a ≤ λ/|I×J|`, `|b| ≤ 1`, and
/// `τ` at most `|Σ ab|`.
pub fn random_flattening_instance(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> FlatteningInstance {
    let lambda = rng.gen_range(1.0..4.0);
    let cap = lambda / (rows * cols) as f64;
    let theta0 = rng.gen_range(0.0..2.0 * PI);
    let spread = rng.gen_range(0.2..3.0);
    let a: Vec<Vec<f64>> = (0..rows).map(|_| (0..cols).map(|_| rng.gen_range(0.0..=cap)).collect()).collect();
    let b: Vec<Vec<(f64, f64)>> = (0..rows)
        .map(|_| {
            (0..cols)
                .map(|_| {
                    let r = rng.gen_range(0.5..=1.0);
                    let th = theta0 + rng.gen_range(-spread..spread);
                    (r * th.cos(), r * th.sin())
                })
                .collect()
        })
        .collect();
    let mut total = num_complex::Complex64::new(0.0, 0.0);
    for i in 0..rows {
        for j in 0..cols {
            total += a[i][j] * num_complex::Complex64::new(b[i][j].0, b[i][j].1);
        }
    }
    let tau = total.norm() * rng.gen_range(0.5..=1.0);
    FlatteningInstance { a, b, lambda, tau }
}

fn flattening() -> Verdict {
    let mut rng = rng_for(12);
    let (mut invalid, mut oracle_disagree, mut oracle_empty) = (0, 0, 0);
    let mut exhaustive_used = 0;
    for k in 0..200u64 {
        let inst = random_flattening_instance(30, 12, &mut rng);
        let all = exhaustive_flattenings(&inst)?;
        if all.is_empty() {
            oracle_empty += 1;
        }
        match flatten_weights(&inst, SEED + k) {
            Ok(f) => {
                if !inst.is_valid(&f.j_prime, &f.i_double_prime) {
                    invalid += 1;
                }
                if !all.contains(&f.j_prime) {
                    oracle_disagree += 1;
                }
                if f.method == horotorus::measure::FlattenMethod::Exhaustive {
                    exhaustive_used += 1;
                }
            }
            Err(_) => invalid += 1,
        }
    }
    Ok((
        invalid == 0 && oracle_disagree == 0 && oracle_empty == 0,
        format!(
            "200 instances (|I| = 30, |J| = 12): {invalid} finder failures, {oracle_disagree} disagreements with the 2^12 oracle, {oracle_empty} empty oracles, {exhaustive_used} exhaustive fallbacks"
        ),
    ))
}

fn siegel(ctx: &Context) -> Verdict {
    const RADIUS: f64 = 0.3;
    let nu = ctx.golden_pair(SHARED_TIME)?;
    let f = RadialStep::indicator(Norm::Euclidean, RADIUS);
    let mut values = Vec::with_capacity(nu.len());
    for s in nu.meta() {
        values.push(siegel_transform(&f, &LatticeDescriptor::new(s.xi.clone()))?);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = (values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let target = PI * RADIUS * RADIUS;
    let rel = (mean - target).abs() / target;
    Ok((
        rel <= 0.1,
        format!(
            "mean {mean:.5} ± {:.5} against pi*0.09 = {target:.5} (relative error {:.2}%, limit 10%)",
            sd / n.sqrt(),
            100.0 * rel
        ),
    ))
}
