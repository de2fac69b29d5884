//! Brute-force oracles for enumeration, reduction and ζ.

use horotorus::diophantine::{minkowski_zeta_bound, zeta};
use horotorus::fundamental::{candidate_bases, f_value, reduce};
use horotorus::geometry::{
    diagonal_flow, horo_embed, IntegerMatrix, SpecialLinearMatrix, SplittingSignature, TorusPoint,
};
use horotorus::lattice::{
    dual_basis, height, shortest_vector, successive_minima, LatticeDescriptor, Norm,
};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_gamma(d: usize, steps: usize, rng: &mut ChaCha8Rng) -> IntegerMatrix {
    let mut g = IntegerMatrix::identity(d);
    for _ in 0..steps {
        let i = rng.gen_range(0..d);
        let mut j = rng.gen_range(0..d - 1);
        if j >= i {
            j += 1;
        }
        let k: i64 = if rng.gen_bool(0.5) { 1 } else { -1 };
        let mut e = IntegerMatrix::identity(d).to_rows();
        e[i][j] = k;
        g = g.mul(&IntegerMatrix::from_rows(&e).unwrap()).unwrap();
    }
    g
}

/// Random element of SL_d(R) with entries of moderate size.
fn random_sl(d: usize, spread: f64, rng: &mut ChaCha8Rng) -> SpecialLinearMatrix {
    let sig = SplittingSignature::new(1, d - 1).unwrap();
    let a = DMatrix::from_fn(1, d - 1, |_, _| rng.gen_range(-spread..spread));
    let b = DMatrix::from_fn(1, d - 1, |_, _| rng.gen_range(-spread..spread));
    let t = rng.gen_range(-0.5..0.5);
    let lower = horo_embed(&b, sig).unwrap().transpose();
    diagonal_flow(t, sig)
        .unwrap()
        .mul(&horo_embed(&a, sig).unwrap())
        .unwrap()
        .mul(&lower)
        .unwrap()
        .mul_int(&random_gamma(d, 4, rng))
        .unwrap()
}

fn brute_shortest(g: &SpecialLinearMatrix, bound: i64, norm: Norm) -> f64 {
    let d = g.dim();
    let mut best = f64::INFINITY;
    let mut c = vec![-bound; d];
    loop {
        if c.iter().any(|&x| x != 0) {
            best = best.min(norm.of(&g.lattice_vector(&c)));
        }
        let mut k = 0;
        loop {
            if k == d {
                return best;
            }
            c[k] += 1;
            if c[k] <= bound {
                break;
            }
            c[k] = -bound;
            k += 1;
        }
    }
}

#[test]
fn shortest_vector_matches_coefficient_box() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..40 {
        let g = random_sl(2, 2.0, &mut rng);
        let l = LatticeDescriptor::new(g.clone());
        for norm in [Norm::Sup, Norm::Euclidean] {
            let sv = shortest_vector(&l, norm).unwrap();
            let brute = brute_shortest(&g, 50, norm);
            assert!((sv.length - brute).abs() <= 1e-12 * brute, "{sv:?} vs {brute}");
        }
    }
    for _ in 0..3 {
        let g = random_sl(3, 2.0, &mut rng);
        let sv = shortest_vector(&LatticeDescriptor::new(g.clone()), Norm::Sup).unwrap();
        let brute = brute_shortest(&g, 60, Norm::Sup);
        assert!((sv.length - brute).abs() <= 1e-12 * brute);
    }
}

#[test]
fn minima_heights_and_duality() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst_mahler: f64 = 0.0;
    for k in 0..1000 {
        let d = 2 + k % 2;
        let g = random_sl(d, 3.0, &mut rng);
        let l = LatticeDescriptor::new(g.clone());
        let mins = successive_minima(&l).unwrap();
        assert!(mins.windows(2).all(|w| w[0] <= w[1]));
        let prod: f64 = mins.iter().product();
        assert!((0.1..=10.0).contains(&prod), "product of minima {prod}");
        assert!(height(&l).unwrap() >= 1.0 - 1e-9);

        let dual = dual_basis(&l);
        let dual_mins = successive_minima(&dual).unwrap();
        let mahler = mins[0] * dual_mins[d - 1];
        worst_mahler = worst_mahler.max(mahler / d as f64);
        for i in 0..d {
            for j in 0..d {
                let pairing: f64 = g
                    .column(i)
                    .iter()
                    .zip(dual.basis().column(j))
                    .map(|(a, b)| a * b)
                    .sum();
                assert!((pairing - pairing.round()).abs() < 1e-9);
            }
        }
    }
    // transference: λ₁(Λ)·λ_d(Λ*) ≤ d
    assert!(worst_mahler <= 1.0, "Mahler ratio {worst_mahler}");
}

/// Lagrange–Gauss reduction of a planar basis, written independently of
/// the library's LLL.
fn gauss_reduce(g: &SpecialLinearMatrix) -> SpecialLinearMatrix {
    let mut u = IntegerMatrix::identity(2);
    for _ in 0..1000 {
        let h = g.mul_int(&u).unwrap();
        let (b1, b2) = (h.column(0), h.column(1));
        let n1 = b1[0] * b1[0] + b1[1] * b1[1];
        let n2 = b2[0] * b2[0] + b2[1] * b2[1];
        if n2 < n1 {
            // swap columns keeping det 1
            u = u.mul(&IntegerMatrix::new(2, &[0, -1, 1, 0]).unwrap()).unwrap();
            continue;
        }
        let mu = ((b1[0] * b2[0] + b1[1] * b2[1]) / n1).round() as i64;
        if mu == 0 {
            return h;
        }
        u = u.mul(&IntegerMatrix::new(2, &[1, -mu, 0, 1]).unwrap()).unwrap();
    }
    panic!("Gauss reduction did not terminate");
}

/// `argmin F(hγ)` over `γ ∈ SL_2(Z)` with entries at most `bound`, ties
/// broken to the lexicographically largest entries.
fn brute_reduce(h: &SpecialLinearMatrix, bound: i64) -> SpecialLinearMatrix {
    let mut best: Option<(f64, IntegerMatrix)> = None;
    let key = |m: &SpecialLinearMatrix| -> Vec<i64> { m.row_major().iter().map(|x| (x / 1e-12).round() as i64).collect() };
    let mut consider = |g: IntegerMatrix| {
        let f = f_value(&h.mul_int(&g).unwrap());
        match &best {
            Some((bf, bg)) if f > bf + 1e-9 * bf.max(1.0) => {}
            Some((bf, bg)) if f >= bf - 1e-9 * bf.max(1.0) => {
                if key(&h.mul_int(&g).unwrap()) > key(&h.mul_int(bg).unwrap()) {
                    best = Some((f.min(*bf), g));
                }
            }
            _ => best = Some((f, g)),
        }
    };
    for a in -bound..=bound {
        for b in -bound..=bound {
            for c in -bound..=bound {
                if a != 0 {
                    let num = 1 + b * c;
                    if num % a == 0 && (num / a).abs() <= bound {
                        consider(IntegerMatrix::new(2, &[a, b, c, num / a]).unwrap());
                    }
                } else if b * c == -1 {
                    for d in -bound..=bound {
                        consider(IntegerMatrix::new(2, &[0, b, c, d]).unwrap());
                    }
                }
            }
        }
    }
    h.mul_int(&best.unwrap().1).unwrap()
}

#[test]
fn planar_reduction_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let sig = SplittingSignature::new(1, 1).unwrap();
    for _ in 0..25 {
        let t = rng.gen_range(0.0..6.0);
        let x = DMatrix::from_element(1, 1, rng.gen_range(-3.0..3.0));
        let g = diagonal_flow(t, sig).unwrap().mul(&horo_embed(&x, sig).unwrap()).unwrap();
        let r = reduce(&g).unwrap();
        let brute = brute_reduce(&gauss_reduce(&g), 12);
        assert!(r.rep.max_abs_diff(&brute) < 1e-9, "{:?} vs {:?}", r.rep, brute);
        // coset preservation and idempotence
        let back = r.rep.mul_int(&r.gamma).unwrap();
        assert!(back.max_abs_diff(&g) <= 1e-9 * g.frobenius_sq().sqrt().max(1.0));
        let again = reduce(&r.rep).unwrap();
        assert!(again.gamma.is_identity());
        assert_eq!(again.rep, r.rep);
    }
}

#[test]
fn reduction_is_gamma_invariant_and_certified_in_dimension_three() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..30 {
        let g = random_sl(3, 1.5, &mut rng);
        let r = reduce(&g).unwrap();
        let gamma0 = random_gamma(3, 8, &mut rng);
        let r2 = reduce(&g.mul_int(&gamma0).unwrap()).unwrap();
        assert!(r.rep.max_abs_diff(&r2.rep) < 1e-9);
        // certificate: no element of the coset inside √2·F on Λ beats rep
        let bound = std::f64::consts::SQRT_2 * r.fvalue + 1e-6;
        for h in candidate_bases(&LatticeDescriptor::new(r.rep.clone()), bound).unwrap() {
            assert!(f_value(&h) >= r.fvalue - 1e-9);
        }
        for h in candidate_bases(&LatticeDescriptor::new(r.rep.inv().transpose()), bound).unwrap() {
            assert!(f_value(&h.inv().transpose()) >= r.fvalue - 1e-9);
        }
    }
}

#[test]
fn candidate_bases_grow_with_the_bound() {
    let l = LatticeDescriptor::new(SpecialLinearMatrix::identity(3));
    assert!(candidate_bases(&l, 1.7).unwrap().is_empty());
    let small = candidate_bases(&l, 1.8).unwrap();
    // signed permutations with det 1
    assert_eq!(small.len(), 24);
    let big = candidate_bases(&l, 2.3).unwrap();
    assert!(small.iter().all(|h| big.contains(h)));
    assert!(big.len() > small.len());
}

#[test]
fn zeta_scan_matches_definition() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..200 {
        let b = TorusPoint::float(&[rng.gen(), rng.gen()]).unwrap();
        let t = 10f64.powf(rng.gen_range(1.0..6.0));
        let z = zeta(&b, t).unwrap();
        let gap = |q: u64| {
            b.to_f64()
                .iter()
                .map(|x| {
                    let y = q as f64 * x;
                    (y - y.round()).abs()
                })
                .fold(0.0, f64::max)
        };
        let best = |n: u64| (1..=n).map(gap).fold(f64::INFINITY, f64::min);
        assert!(best(z) <= (z * z) as f64 / t);
        if z > 1 {
            assert!(best(z - 1) > ((z - 1) * (z - 1)) as f64 / t);
        }
        assert!(z <= minkowski_zeta_bound(2, t));
    }
}

#[test]
fn unimodular_enumeration_matches_exhaustive_box() {
    use horotorus::enumerate::Budget;
    use horotorus::fundamental::enumerate_unimodular_bases;
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for _ in 0..4 {
        let g = random_sl(3, 0.15, &mut rng);
        let g = SpecialLinearMatrix::new(3, &g.row_major()).unwrap();
        // keep g close to orthogonal so every hit has entries in [-2, 2]
        let g = if g.frobenius_sq() > 3.3 { SpecialLinearMatrix::identity(3) } else { g };
        let bound = 5.2;
        let mut found: Vec<Vec<i64>> = enumerate_unimodular_bases(&g, bound, &mut Budget::default())
            .unwrap()
            .iter()
            .map(|c| c.row_major().to_vec())
            .collect();
        found.sort();
        let mut brute = Vec::new();
        let mut e = [-2i64; 9];
        'outer: loop {
            let c = IntegerMatrix::new(3, &e).unwrap();
            if c.det() == 1 && g.mul_int(&c).unwrap().frobenius_sq() <= bound {
                brute.push(e.to_vec());
            }
            for k in 0..9 {
                e[k] += 1;
                if e[k] <= 2 {
                    continue 'outer;
                }
                e[k] = -2;
            }
            break;
        }
        brute.sort();
        assert!(found.iter().all(|c| c.iter().all(|x| x.abs() <= 2)));
        assert_eq!(found, brute);
        assert!(found.len() > 24);
    }
}
