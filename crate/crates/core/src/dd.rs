//! Double-double arithmetic for the few products whose cancellation would
//! otherwise swamp a reduced representative (entries of size `e^{ds}` times
//! integer matrices of comparable size).

use nalgebra::DMatrix;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    #[inline]
    pub fn new(hi: f64, lo: f64) -> Self {
        let (hi, lo) = quick_two_sum(hi, lo);
        Self { hi, lo }
    }

    #[inline]
    pub fn add(self, o: Self) -> Self {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Self { hi, lo }
    }

    #[inline]
    pub fn mul(self, o: Self) -> Self {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }
}

/// Matrix with an optional low-order tail per entry.
pub(crate) fn dd_at(hi: &DMatrix<f64>, lo: Option<&DMatrix<f64>>, i: usize, j: usize) -> Dd {
    Dd {
        hi: hi[(i, j)],
        lo: lo.map_or(0.0, |l| l[(i, j)]),
    }
}

/// Product of two double-double matrices, returned as (hi, lo).
pub(crate) fn dd_matmul(
    a_hi: &DMatrix<f64>,
    a_lo: Option<&DMatrix<f64>>,
    b_hi: &DMatrix<f64>,
    b_lo: Option<&DMatrix<f64>>,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let (r, k, c) = (a_hi.nrows(), a_hi.ncols(), b_hi.ncols());
    let mut hi = DMatrix::zeros(r, c);
    let mut lo = DMatrix::zeros(r, c);
    for i in 0..r {
        for j in 0..c {
            let mut acc = Dd::default();
            for l in 0..k {
                acc = acc.add(dd_at(a_hi, a_lo, i, l).mul(dd_at(b_hi, b_lo, l, j)));
            }
            hi[(i, j)] = acc.hi;
            lo[(i, j)] = acc.lo;
        }
    }
    (hi, lo)
}
