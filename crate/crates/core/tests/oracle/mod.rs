//! Reference implementations used to check the interval layer: exact rational
//! arithmetic for the field operations and matrices, and a double-double
//! Taylor evaluation for sin/cos.

#![allow(dead_code)]

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;

pub fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite value")
}

pub fn add(a: f64, b: f64) -> BigRational {
    exact(a) + exact(b)
}

pub fn sub(a: f64, b: f64) -> BigRational {
    exact(a) - exact(b)
}

pub fn mul(a: f64, b: f64) -> BigRational {
    exact(a) * exact(b)
}

pub fn div(a: f64, b: f64) -> BigRational {
    exact(a) / exact(b)
}

/// `lo <= v <= hi` in exact arithmetic.
pub fn encloses(lo: f64, hi: f64, v: &BigRational) -> bool {
    exact(lo) <= *v && *v <= exact(hi)
}

/// `lo <= sqrt(x) <= hi` decided by squaring.
pub fn encloses_sqrt(lo: f64, hi: f64, x: f64) -> bool {
    let x = exact(x);
    let l = exact(lo.max(0.0));
    let h = exact(hi);
    &l * &l <= x && x <= &h * &h && lo <= hi
}

/// Exact product of row-major rational matrices.
pub fn matmul(a: &[BigRational], b: &[BigRational], r: usize, k: usize, c: usize) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); r * c];
    for i in 0..r {
        for j in 0..c {
            let mut acc = BigRational::zero();
            for t in 0..k {
                acc += &a[i * k + t] * &b[t * c + j];
            }
            out[i * c + j] = acc;
        }
    }
    out
}

/// Exact inverse by Gauss-Jordan over the rationals.
pub fn inverse(a: &[BigRational], n: usize) -> Option<Vec<BigRational>> {
    let w = 2 * n;
    let mut m = vec![BigRational::zero(); n * w];
    for i in 0..n {
        for j in 0..n {
            m[i * w + j] = a[i * n + j].clone();
        }
        m[i * w + n + i] = BigRational::one();
    }
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r * w + col].is_zero())?;
        if pivot != col {
            for k in 0..w {
                m.swap(pivot * w + k, col * w + k);
            }
        }
        let pv = m[col * w + col].clone();
        for k in 0..w {
            m[col * w + k] = &m[col * w + k] / &pv;
        }
        for r in 0..n {
            if r != col && !m[r * w + col].is_zero() {
                let f = m[r * w + col].clone();
                for k in 0..w {
                    let t = &f * &m[col * w + k];
                    m[r * w + k] -= t;
                }
            }
        }
    }
    Some((0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| m[i * w + n + j].clone()).collect())
}

/// A point of `[lo, hi]`: an endpoint or a random interior value.
pub fn sample_point(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    match rng.gen_range(0..4) {
        0 => lo,
        1 => hi,
        _ => {
            let t: f64 = rng.gen();
            (lo + t * (hi - lo)).clamp(lo, hi)
        }
    }
}

/// Random finite doubles with a mix of scales, signs and exactly representable values.
pub fn random_double(rng: &mut impl Rng) -> f64 {
    match rng.gen_range(0..6) {
        0 => rng.gen_range(-8i32..=8) as f64,
        1 => rng.gen_range(-1.0..1.0),
        2 => rng.gen_range(-1.0e3..1.0e3),
        3 => {
            let m: f64 = rng.gen_range(1.0..2.0);
            let e = rng.gen_range(-60..60);
            let s = if rng.gen() { 1.0 } else { -1.0 };
            s * m * 2f64.powi(e)
        }
        4 => rng.gen_range(0..1000) as f64 / 10.0,
        _ => f64::from_bits(rng.gen_range(0x3c00_0000_0000_0000u64..0x4400_0000_0000_0000u64)) * if rng.gen() { 1.0 } else { -1.0 },
    }
}

/// Random interval with ordered endpoints.
pub fn random_interval(rng: &mut impl Rng) -> (f64, f64) {
    let a = random_double(rng);
    let b = if rng.gen_bool(0.3) { a } else if rng.gen_bool(0.5) { a + rng.gen_range(0.0..1.0) * a.abs().max(1e-3) } else { random_double(rng) };
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

// ---------------------------------------------------------------------------
// double-double sin/cos

#[derive(Clone, Copy, Debug)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    Dd { hi: s, lo: (a - (s - bb)) + (b - bb) }
}

fn two_prod(a: f64, b: f64) -> Dd {
    let p = a * b;
    Dd { hi: p, lo: a.mul_add(b, -p) }
}

impl Dd {
    pub fn from(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    fn norm(self) -> Dd {
        two_sum(self.hi, self.lo)
    }

    pub fn add(self, o: Dd) -> Dd {
        let s = two_sum(self.hi, o.hi);
        Dd { hi: s.hi, lo: s.lo + self.lo + o.lo }.norm()
    }

    pub fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    pub fn mul(self, o: Dd) -> Dd {
        let p = two_prod(self.hi, o.hi);
        Dd { hi: p.hi, lo: p.lo + self.hi * o.lo + self.lo * o.hi }.norm()
    }

    pub fn mul_f(self, k: f64) -> Dd {
        self.mul(Dd::from(k))
    }

    pub fn div_f(self, k: f64) -> Dd {
        let q = self.hi / k;
        let r = self.add(two_prod(q, k).neg());
        Dd { hi: q, lo: r.hi / k }.norm()
    }

    pub fn value(self) -> f64 {
        self.hi + self.lo
    }
}

const TWO_PI: Dd = Dd { hi: core::f64::consts::TAU, lo: 2.4492935982947064e-16 };

/// `(sin x, cos x)` to roughly 1e-30 absolute for `|x| < 1e6`.
pub fn sin_cos_dd(x: f64) -> (Dd, Dd) {
    let k = (x / TWO_PI.hi).round();
    let r = Dd::from(x).add(TWO_PI.mul_f(k).neg());
    // Taylor series on |r| <= pi
    let r2 = r.mul(r);
    let mut s = r;
    let mut c = Dd::from(1.0);
    let mut term_s = r;
    let mut term_c = Dd::from(1.0);
    for n in 1..40 {
        let a = (2 * n) as f64;
        term_s = term_s.mul(r2).neg().div_f(a * (a + 1.0));
        term_c = term_c.mul(r2).neg().div_f((a - 1.0) * a);
        s = s.add(term_s);
        c = c.add(term_c);
    }
    (s, c)
}

/// Does `[lo, hi]` contain the double-double value (with a 1e-28 safety margin)?
pub fn encloses_dd(lo: f64, hi: f64, v: Dd) -> bool {
    let margin = 1e-28;
    let lower = Dd::from(lo).add(v.neg());
    let upper = Dd::from(hi).add(v.neg());
    lower.value() <= margin && upper.value() >= -margin
}

pub fn rational_to_f64(v: &BigRational) -> f64 {
    v.to_f64().expect("representable")
}
