//! Double-double arithmetic for the signed-mixture reductions.
//!
//! A state conditioned on `k` detector clicks is an alternating sum of `2^k`
//! Gaussian terms whose total weight equals the joint click probability. For
//! weak couplings that probability sits ten or more orders of magnitude below
//! the individual weights, so plain `f64` evaluation of the sums loses most
//! significant digits to cancellation. Carrying weights, covariances and the
//! reduction sums as unevaluated `hi + lo` pairs (~31 significant digits)
//! keeps every downstream quantity accurate to full `f64` precision even at
//! joint probabilities near 1e-20.
//!
//! The scalar follows the classic error-free transformations (two-sum, split,
//! two-product); `exp` uses argument reduction by `ln 2`, a short Taylor
//! series and repeated squaring. Matrices are tiny (at most 8×8), so the
//! dense helpers below stay naive.

use nalgebra::DMatrix;

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
// Heads are the f64 roundings of ln 2 and 2π; the tails carry the next 16
// digits of each constant.
#[allow(clippy::approx_constant)]
const LN2: Dd = Dd {
    hi: 0.693_147_180_559_945_3,
    lo: 2.319_046_813_846_299_6e-17,
};
#[allow(clippy::approx_constant)]
pub const TWO_PI: Dd = Dd {
    hi: 6.283_185_307_179_586,
    lo: 2.449_293_598_294_706_4e-16,
};

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn split(a: f64) -> (f64, f64) {
    let t = 134_217_729.0 * a; // 2^27 + 1
    let hi = t - (t - a);
    (hi, a - hi)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    (p, ((ah * bh - p) + ah * bl + al * bh) + al * bl)
}

impl Dd {
    #[inline]
    pub fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn add(self, rhs: Self) -> Self {
        let (s1, s2) = two_sum(self.hi, rhs.hi);
        let (t1, t2) = two_sum(self.lo, rhs.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (hi, lo) = quick_two_sum(s1, s2 + t2);
        Self { hi, lo }
    }

    #[inline]
    pub fn sub(self, rhs: Self) -> Self {
        self.add(rhs.neg())
    }

    #[inline]
    pub fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    #[inline]
    pub fn mul(self, rhs: Self) -> Self {
        let (p, e) = two_prod(self.hi, rhs.hi);
        let e = e + (self.hi * rhs.lo + self.lo * rhs.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }

    #[inline]
    pub fn mul_f64(self, rhs: f64) -> Self {
        let (p, e) = two_prod(self.hi, rhs);
        let e = e + self.lo * rhs;
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }

    #[inline]
    pub fn add_f64(self, rhs: f64) -> Self {
        self.add(Dd::from_f64(rhs))
    }

    pub fn div(self, rhs: Self) -> Self {
        let q1 = self.hi / rhs.hi;
        let r = self.sub(rhs.mul_f64(q1));
        let q2 = r.hi / rhs.hi;
        let r = r.sub(rhs.mul_f64(q2));
        let q3 = r.hi / rhs.hi;
        let (s, e) = quick_two_sum(q1, q2);
        Dd { hi: s, lo: e }.add_f64(q3)
    }

    pub fn recip(self) -> Self {
        ONE.div(self)
    }

    pub fn sqrt(self) -> Self {
        if self.hi == 0.0 {
            return ZERO;
        }
        debug_assert!(self.hi > 0.0, "sqrt of negative double-double");
        let y = self.hi.sqrt();
        let y_dd = Dd::from_f64(y);
        let diff = self.sub(y_dd.mul(y_dd));
        y_dd.add(diff.mul_f64(0.5 / y))
    }

    /// Exponential accurate to roughly 1e-30 relative over the range used by
    /// Gaussian quadratic forms.
    pub fn exp(self) -> Self {
        if self.hi == 0.0 && self.lo == 0.0 {
            return ONE;
        }
        if self.hi < -745.0 {
            return ZERO;
        }
        if self.hi > 709.0 {
            return Dd::from_f64(f64::INFINITY);
        }
        let m = (self.hi / LN2.hi).round();
        let r = self.sub(LN2.mul_f64(m));
        // Scale into a tiny interval, run the Taylor series, square back.
        const SHIFT: i32 = 9;
        let r = r.mul_f64(1.0 / f64::from(1 << SHIFT));
        let mut term = r;
        let mut sum = ONE.add(r);
        for n in 2..=12 {
            term = term.mul(r).div(Dd::from_f64(n as f64));
            sum = sum.add(term);
            if term.hi.abs() < 1e-35 {
                break;
            }
        }
        for _ in 0..SHIFT {
            sum = sum.mul(sum);
        }
        let scale = 2f64.powi(m as i32);
        Dd {
            hi: sum.hi * scale,
            lo: sum.lo * scale,
        }
    }
}

/// Row-major double-double matrix; only the handful of dense operations the
/// conditioning pipeline needs.
#[derive(Debug, Clone, PartialEq)]
pub struct DdMat {
    nrows: usize,
    ncols: usize,
    a: Vec<Dd>,
}

impl DdMat {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            a: vec![ZERO; nrows * ncols],
        }
    }

    pub fn identity_scaled(n: usize, value: f64) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Dd::from_f64(value));
        }
        m
    }

    pub fn from_f64(m: &DMatrix<f64>) -> Self {
        let mut out = Self::zeros(m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                out.set(i, j, Dd::from_f64(m[(i, j)]));
            }
        }
        out
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.nrows, self.ncols, |i, j| self.get(i, j).to_f64())
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Dd {
        self.a[i * self.ncols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Dd) {
        self.a[i * self.ncols + j] = v;
    }

    pub fn block(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> Self {
        let mut out = Self::zeros(nr, nc);
        for i in 0..nr {
            for j in 0..nc {
                out.set(i, j, self.get(r0 + i, c0 + j));
            }
        }
        out
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, m: &Self) {
        for i in 0..m.nrows {
            for j in 0..m.ncols {
                self.set(r0 + i, c0 + j, m.get(i, j));
            }
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        debug_assert_eq!((self.nrows, self.ncols), (rhs.nrows, rhs.ncols));
        let mut out = Self::zeros(self.nrows, self.ncols);
        for (k, v) in out.a.iter_mut().enumerate() {
            *v = self.a[k].sub(rhs.a[k]);
        }
        out
    }

    pub fn scale_f64(&self, s: f64) -> Self {
        let mut out = Self::zeros(self.nrows, self.ncols);
        for (k, v) in out.a.iter_mut().enumerate() {
            *v = self.a[k].mul_f64(s);
        }
        out
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        debug_assert_eq!(self.ncols, rhs.nrows);
        let mut out = Self::zeros(self.nrows, rhs.ncols);
        for i in 0..self.nrows {
            for j in 0..rhs.ncols {
                let mut acc = ZERO;
                for k in 0..self.ncols {
                    acc = acc.add(self.get(i, k).mul(rhs.get(k, j)));
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.ncols, self.nrows);
        for i in 0..self.nrows {
            for j in 0..self.ncols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    /// `S · self · Sᵀ` with an exact-`f64` transformation matrix.
    pub fn sandwich_f64(&self, s: &DMatrix<f64>) -> Self {
        debug_assert_eq!(self.nrows, s.ncols());
        let n = s.nrows();
        // T = S · V
        let mut t = Self::zeros(n, self.ncols);
        for i in 0..n {
            for j in 0..self.ncols {
                let mut acc = ZERO;
                for k in 0..self.nrows {
                    let w = s[(i, k)];
                    if w != 0.0 {
                        acc = acc.add(self.get(k, j).mul_f64(w));
                    }
                }
                t.set(i, j, acc);
            }
        }
        // out = T · Sᵀ
        let mut out = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = ZERO;
                for k in 0..self.ncols {
                    let w = s[(j, k)];
                    if w != 0.0 {
                        acc = acc.add(t.get(i, k).mul_f64(w));
                    }
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    pub fn symmetrize(&self) -> Self {
        let mut out = Self::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            for j in 0..self.ncols {
                out.set(i, j, self.get(i, j).add(self.get(j, i)).mul_f64(0.5));
            }
        }
        out
    }

    /// Determinant and inverse by partial-pivot elimination; `None` when a
    /// pivot vanishes.
    pub fn lu_det_inverse(&self) -> Option<(Dd, Self)> {
        debug_assert_eq!(self.nrows, self.ncols);
        let n = self.nrows;
        let mut m = self.clone();
        let mut inv = Self::identity_scaled(n, 1.0);
        let mut det = ONE;
        for col in 0..n {
            let mut pivot = col;
            let mut best = m.get(col, col).hi.abs();
            for row in col + 1..n {
                let mag = m.get(row, col).hi.abs();
                if mag > best {
                    best = mag;
                    pivot = row;
                }
            }
            if best == 0.0 {
                return None;
            }
            if pivot != col {
                for j in 0..n {
                    let (a, b) = (m.get(col, j), m.get(pivot, j));
                    m.set(col, j, b);
                    m.set(pivot, j, a);
                    let (a, b) = (inv.get(col, j), inv.get(pivot, j));
                    inv.set(col, j, b);
                    inv.set(pivot, j, a);
                }
                det = det.neg();
            }
            let p = m.get(col, col);
            det = det.mul(p);
            let p_inv = p.recip();
            for j in 0..n {
                m.set(col, j, m.get(col, j).mul(p_inv));
                inv.set(col, j, inv.get(col, j).mul(p_inv));
            }
            for row in 0..n {
                if row == col {
                    continue;
                }
                let f = m.get(row, col);
                if f.hi == 0.0 && f.lo == 0.0 {
                    continue;
                }
                for j in 0..n {
                    m.set(row, j, m.get(row, j).sub(f.mul(m.get(col, j))));
                    inv.set(row, j, inv.get(row, j).sub(f.mul(inv.get(col, j))));
                }
            }
        }
        Some((det, inv))
    }
}
