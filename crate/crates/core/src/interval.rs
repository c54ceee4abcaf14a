//! Outward-rounded interval arithmetic and small interval linear algebra.
//!
//! Rounding is done in software: every endpoint is computed in round-to-nearest
//! and then moved one representable step outward *only if* the operation was
//! inexact. Inexactness is detected with error-free transformations (TwoSum for
//! addition, FMA residuals for multiplication, division and square root), so
//! exact operations such as `2 * 0.5` stay exact and no hardware rounding mode
//! is ever touched.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

/// Errors raised by interval operations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntervalError {
    /// An endpoint was NaN or `lo > hi`.
    InvalidEndpoints,
    /// Division by an interval containing zero.
    DivisionByZero,
    /// Square root of an interval with a negative lower endpoint.
    NegativeSqrt,
    /// Non-conformable matrix or vector shapes.
    ShapeMismatch,
    /// The inverse could not be certified (`||I - Y A|| >= 1` or singular midpoint).
    NotInvertible,
}

impl fmt::Display for IntervalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IntervalError::InvalidEndpoints => f.write_str("invalid interval endpoints"),
            IntervalError::DivisionByZero => f.write_str("division by an interval containing zero"),
            IntervalError::NegativeSqrt => f.write_str("square root of a negative interval"),
            IntervalError::ShapeMismatch => f.write_str("matrix shape mismatch"),
            IntervalError::NotInvertible => f.write_str("not invertible as enclosed"),
        }
    }
}

// ---------------------------------------------------------------------------
// directed rounding primitives

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// Below this magnitude FMA residuals may themselves round, so results are
/// widened unconditionally.
const TINY: f64 = 1.0e-290;

#[inline]
fn overflowed(r: f64, a: f64, b: f64) -> bool {
    r.is_infinite() && a.is_finite() && b.is_finite()
}

#[inline]
pub(crate) fn add_down(a: f64, b: f64) -> f64 {
    let (s, e) = two_sum(a, b);
    if overflowed(s, a, b) {
        return if s > 0.0 { f64::MAX } else { s };
    }
    if e < 0.0 {
        s.next_down()
    } else {
        s
    }
}

#[inline]
pub(crate) fn add_up(a: f64, b: f64) -> f64 {
    let (s, e) = two_sum(a, b);
    if overflowed(s, a, b) {
        return if s < 0.0 { f64::MIN } else { s };
    }
    if e > 0.0 {
        s.next_up()
    } else {
        s
    }
}

#[inline]
pub(crate) fn sub_down(a: f64, b: f64) -> f64 {
    add_down(a, -b)
}

#[inline]
pub(crate) fn sub_up(a: f64, b: f64) -> f64 {
    add_up(a, -b)
}

/// Sign of the rounding error of `p = fl(a*b)`: +1 if `a*b > p`, -1 if below,
/// 0 if exact, 2 if unknown (tiny or overflowed results).
#[inline]
fn mul_err_sign(a: f64, b: f64, p: f64) -> i8 {
    if a == 0.0 || b == 0.0 || !p.is_finite() {
        return 0;
    }
    if p.abs() < TINY {
        return 2;
    }
    let e = libm::fma(a, b, -p);
    if e > 0.0 {
        1
    } else if e < 0.0 {
        -1
    } else {
        0
    }
}

#[inline]
pub(crate) fn mul_down(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let p = a * b;
    if overflowed(p, a, b) {
        return if p > 0.0 { f64::MAX } else { p };
    }
    match mul_err_sign(a, b, p) {
        0 | 1 => p,
        _ => p.next_down(),
    }
}

#[inline]
pub(crate) fn mul_up(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let p = a * b;
    if overflowed(p, a, b) {
        return if p < 0.0 { f64::MIN } else { p };
    }
    match mul_err_sign(a, b, p) {
        0 | -1 => p,
        _ => p.next_up(),
    }
}

/// Sign of `a/b - q` where `q = fl(a/b)`.
#[inline]
fn div_err_sign(a: f64, b: f64, q: f64) -> i8 {
    if a == 0.0 || !q.is_finite() || !b.is_finite() {
        return 0;
    }
    if q.abs() < TINY || a.abs() < TINY {
        return 2;
    }
    let r = libm::fma(-q, b, a);
    let s = if r > 0.0 {
        1
    } else if r < 0.0 {
        -1
    } else {
        0
    };
    if b < 0.0 {
        -s
    } else {
        s
    }
}

#[inline]
pub(crate) fn div_down(a: f64, b: f64) -> f64 {
    let q = a / b;
    if overflowed(q, a, b) {
        return if q > 0.0 { f64::MAX } else { q };
    }
    match div_err_sign(a, b, q) {
        0 | 1 => q,
        _ => q.next_down(),
    }
}

#[inline]
pub(crate) fn div_up(a: f64, b: f64) -> f64 {
    let q = a / b;
    if overflowed(q, a, b) {
        return if q < 0.0 { f64::MIN } else { q };
    }
    match div_err_sign(a, b, q) {
        0 | -1 => q,
        _ => q.next_up(),
    }
}

#[inline]
fn sqrt_err_sign(x: f64, s: f64) -> i8 {
    if x == 0.0 || !x.is_finite() {
        return 0;
    }
    if x < TINY {
        return 2;
    }
    let r = libm::fma(-s, s, x);
    if r > 0.0 {
        1
    } else if r < 0.0 {
        -1
    } else {
        0
    }
}

#[inline]
pub(crate) fn sqrt_down(x: f64) -> f64 {
    let s = libm::sqrt(x);
    match sqrt_err_sign(x, s) {
        0 | 1 => s,
        _ => s.next_down().max(0.0),
    }
}

#[inline]
pub(crate) fn sqrt_up(x: f64) -> f64 {
    let s = libm::sqrt(x);
    match sqrt_err_sign(x, s) {
        0 | -1 => s,
        _ => s.next_up(),
    }
}

/// Upper bound of `sqrt(sum v_i^2)` for non-negative magnitudes.
pub(crate) fn hypot_up(values: impl Iterator<Item = f64>) -> f64 {
    let mut acc = 0.0;
    for v in values {
        acc = add_up(acc, mul_up(v, v));
    }
    sqrt_up(acc)
}

// ---------------------------------------------------------------------------
// Interval

/// A closed real interval `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

/// Binary arithmetic operation selector for [`Interval::arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Elementary function selector for [`Interval::elementary`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Elementary {
    Sin,
    Cos,
    Sqrt,
    PowInt(u32),
}

impl Interval {
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };
    pub const ONE: Interval = Interval { lo: 1.0, hi: 1.0 };
    pub const UNIT: Interval = Interval { lo: -1.0, hi: 1.0 };

    /// Enclosure of the real number pi.
    pub const PI: Interval = Interval {
        lo: core::f64::consts::PI,
        // f64 PI is below the true value; its successor is above.
        hi: 3.141_592_653_589_793_6,
    };

    pub fn new(lo: f64, hi: f64) -> Result<Interval, IntervalError> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(IntervalError::InvalidEndpoints);
        }
        Ok(Interval { lo, hi })
    }

    /// Degenerate interval `[x, x]`. Panics on NaN.
    pub fn point(x: f64) -> Interval {
        assert!(!x.is_nan(), "NaN interval endpoint");
        Interval { lo: x, hi: x }
    }

    /// Symmetric interval `[-r, r]` for `r >= 0`.
    pub fn symmetric(r: f64) -> Interval {
        let r = r.abs();
        Interval { lo: -r, hi: r }
    }

    /// Interval `[c - r, c + r]` rounded outward.
    pub fn centered(c: f64, r: f64) -> Interval {
        let r = r.abs();
        Interval { lo: sub_down(c, r), hi: add_up(c, r) }
    }

    #[inline]
    pub fn lo(&self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn hi(&self) -> f64 {
        self.hi
    }

    /// Midpoint (not rounded; only used as a numerical center).
    pub fn mid(&self) -> f64 {
        if self.lo == self.hi {
            return self.lo;
        }
        let m = 0.5 * self.lo + 0.5 * self.hi;
        if m.is_finite() {
            m
        } else {
            0.0
        }
    }

    /// Upper bound of the radius around [`Interval::mid`].
    pub fn rad(&self) -> f64 {
        let m = self.mid();
        sub_up(self.hi, m).max(sub_up(m, self.lo))
    }

    pub fn width(&self) -> f64 {
        sub_up(self.hi, self.lo)
    }

    /// Magnitude `max |x|`.
    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// Mignitude `min |x|` (zero if the interval contains zero).
    pub fn mig(&self) -> f64 {
        if self.lo > 0.0 {
            self.lo
        } else if self.hi < 0.0 {
            -self.hi
        } else {
            0.0
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(0.0)
    }

    /// `self ⊆ other`.
    pub fn subset_of(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval { lo: self.lo.min(other.lo), hi: self.hi.max(other.hi) }
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    pub fn abs(&self) -> Interval {
        Interval { lo: self.mig(), hi: self.mag() }
    }

    /// Square, tighter than `self * self` when the interval straddles zero.
    pub fn sqr(&self) -> Interval {
        let lo = self.mig();
        let hi = self.mag();
        Interval { lo: mul_down(lo, lo), hi: mul_up(hi, hi) }
    }

    /// Scale by a point value.
    pub fn scale(&self, k: f64) -> Interval {
        *self * Interval::point(k)
    }

    pub fn arith(a: Interval, b: Interval, op: ArithOp) -> Result<Interval, IntervalError> {
        Ok(match op {
            ArithOp::Add => a + b,
            ArithOp::Sub => a - b,
            ArithOp::Mul => a * b,
            ArithOp::Div => a.checked_div(b)?,
        })
    }

    pub fn checked_div(self, b: Interval) -> Result<Interval, IntervalError> {
        if b.contains_zero() {
            return Err(IntervalError::DivisionByZero);
        }
        let (a0, a1, b0, b1) = (self.lo, self.hi, b.lo, b.hi);
        let lo = div_down(a0, b0).min(div_down(a0, b1)).min(div_down(a1, b0)).min(div_down(a1, b1));
        let hi = div_up(a0, b0).max(div_up(a0, b1)).max(div_up(a1, b0)).max(div_up(a1, b1));
        Ok(Interval { lo, hi })
    }

    pub fn recip(self) -> Result<Interval, IntervalError> {
        Interval::ONE.checked_div(self)
    }

    pub fn elementary(self, f: Elementary) -> Result<Interval, IntervalError> {
        match f {
            Elementary::Sin => Ok(self.sin()),
            Elementary::Cos => Ok(self.cos()),
            Elementary::Sqrt => self.sqrt(),
            Elementary::PowInt(n) => Ok(self.powi(n)),
        }
    }

    pub fn sqrt(self) -> Result<Interval, IntervalError> {
        if self.lo < 0.0 {
            return Err(IntervalError::NegativeSqrt);
        }
        Ok(Interval { lo: sqrt_down(self.lo), hi: sqrt_up(self.hi) })
    }

    pub fn powi(self, n: u32) -> Interval {
        if n == 0 {
            return Interval::ONE;
        }
        if n % 2 == 0 {
            let lo = pow_down(self.mig(), n);
            let hi = pow_up(self.mag(), n);
            return Interval { lo, hi };
        }
        let f_lo = if self.lo >= 0.0 { pow_down(self.lo, n) } else { -pow_up(-self.lo, n) };
        let f_hi = if self.hi >= 0.0 { pow_up(self.hi, n) } else { -pow_down(-self.hi, n) };
        Interval { lo: f_lo, hi: f_hi }
    }

    /// Enclosure of `sin` over the interval.
    pub fn sin(self) -> Interval {
        // maxima at pi/2 + 2k pi, minima at -pi/2 + 2k pi
        self.trig(libm::sin, 0.25, -0.25)
    }

    /// Enclosure of `cos` over the interval.
    pub fn cos(self) -> Interval {
        // maxima at 2k pi, minima at pi + 2k pi
        self.trig(libm::cos, 0.0, 0.5)
    }

    /// `max_phase`, `min_phase` are the critical points as fractions of a full
    /// period `2 pi`.
    fn trig(self, f: fn(f64) -> f64, max_phase: f64, min_phase: f64) -> Interval {
        if !self.lo.is_finite() || !self.hi.is_finite() {
            return Interval::UNIT;
        }
        let two_pi = Interval::PI.scale(2.0);
        if self.width() >= two_pi.lo {
            return Interval::UNIT;
        }
        let ya = trig_point(f, self.lo);
        let yb = trig_point(f, self.hi);
        let mut lo = ya.lo.min(yb.lo);
        let mut hi = ya.hi.max(yb.hi);
        // Period coordinates t = x / (2 pi), enclosed outward.
        let t = self.checked_div(two_pi).unwrap_or(Interval::UNIT);
        if contains_integer_shift(t, max_phase) {
            hi = 1.0;
        }
        if contains_integer_shift(t, min_phase) {
            lo = -1.0;
        }
        Interval { lo: lo.max(-1.0), hi: hi.min(1.0) }
    }
}

/// Does `t` contain `phase + k` for some integer `k`?
fn contains_integer_shift(t: Interval, phase: f64) -> bool {
    let s = t - Interval::point(phase);
    libm::floor(s.hi) >= libm::ceil(s.lo)
}

/// Point enclosure of a libm trig function: two ulps each way.
fn trig_point(f: fn(f64) -> f64, x: f64) -> Interval {
    let y = f(x);
    let lo = y.next_down().next_down().max(-1.0);
    let hi = y.next_up().next_up().min(1.0);
    Interval { lo, hi }
}

fn pow_up(x: f64, n: u32) -> f64 {
    let mut acc = 1.0;
    for _ in 0..n {
        acc = mul_up(acc, x);
    }
    acc
}

fn pow_down(x: f64, n: u32) -> f64 {
    let mut acc = 1.0;
    for _ in 0..n {
        acc = mul_down(acc, x);
    }
    acc
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        Interval { lo: add_down(self.lo, rhs.lo), hi: add_up(self.hi, rhs.hi) }
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Interval) -> Interval {
        Interval { lo: sub_down(self.lo, rhs.hi), hi: sub_up(self.hi, rhs.lo) }
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval { lo: -self.hi, hi: -self.lo }
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        let (a0, a1, b0, b1) = (self.lo, self.hi, rhs.lo, rhs.hi);
        let lo = mul_down(a0, b0).min(mul_down(a0, b1)).min(mul_down(a1, b0)).min(mul_down(a1, b1));
        let hi = mul_up(a0, b0).max(mul_up(a0, b1)).max(mul_up(a1, b0)).max(mul_up(a1, b1));
        Interval { lo, hi }
    }
}

impl Add<f64> for Interval {
    type Output = Interval;
    fn add(self, rhs: f64) -> Interval {
        self + Interval::point(rhs)
    }
}

impl Sub<f64> for Interval {
    type Output = Interval;
    fn sub(self, rhs: f64) -> Interval {
        self - Interval::point(rhs)
    }
}

impl Mul<f64> for Interval {
    type Output = Interval;
    fn mul(self, rhs: f64) -> Interval {
        self * Interval::point(rhs)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}

// ---------------------------------------------------------------------------
// IntervalMatrix

/// Dense row-major matrix of intervals.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Interval>,
}

/// Operation selector for [`IntervalMatrix::apply`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixOp {
    Mul,
    Hull,
}

impl IntervalMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Interval>) -> Result<Self, IntervalError> {
        if data.len() != rows * cols {
            return Err(IntervalError::ShapeMismatch);
        }
        Ok(IntervalMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntervalMatrix { rows, cols, data: vec![Interval::ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Interval::ONE;
        }
        m
    }

    /// Degenerate matrix from row-major point values.
    pub fn from_points(rows: usize, cols: usize, values: &[f64]) -> Result<Self, IntervalError> {
        if values.len() != rows * cols || values.iter().any(|v| v.is_nan()) {
            return Err(IntervalError::ShapeMismatch);
        }
        Ok(IntervalMatrix { rows, cols, data: values.iter().map(|&v| Interval::point(v)).collect() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Interval {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Interval) {
        self.data[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[Interval] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// Midpoint matrix, row-major.
    pub fn mid(&self) -> Vec<f64> {
        self.data.iter().map(Interval::mid).collect()
    }

    pub fn matmul(&self, other: &IntervalMatrix) -> Result<IntervalMatrix, IntervalError> {
        if self.cols != other.rows {
            return Err(IntervalError::ShapeMismatch);
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = Interval::ZERO;
                for k in 0..self.cols {
                    acc = acc + self.get(i, k) * other.get(k, j);
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Interval]) -> Result<Vec<Interval>, IntervalError> {
        if self.cols != v.len() {
            return Err(IntervalError::ShapeMismatch);
        }
        Ok((0..self.rows)
            .map(|i| (0..self.cols).fold(Interval::ZERO, |acc, k| acc + self.get(i, k) * v[k]))
            .collect())
    }

    pub fn hull(&self, other: &IntervalMatrix) -> Result<IntervalMatrix, IntervalError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(IntervalError::ShapeMismatch);
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a.hull(b)).collect();
        Ok(IntervalMatrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn add(&self, other: &IntervalMatrix) -> Result<IntervalMatrix, IntervalError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(IntervalError::ShapeMismatch);
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| *a + *b).collect();
        Ok(IntervalMatrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn apply(&self, other: &IntervalMatrix, op: MatrixOp) -> Result<IntervalMatrix, IntervalError> {
        match op {
            MatrixOp::Mul => self.matmul(other),
            MatrixOp::Hull => self.hull(other),
        }
    }

    /// Extract the rows/columns listed (in order).
    pub fn sub_block(&self, rows: &[usize], cols: &[usize]) -> Result<IntervalMatrix, IntervalError> {
        if rows.iter().any(|&r| r >= self.rows) || cols.iter().any(|&c| c >= self.cols) {
            return Err(IntervalError::ShapeMismatch);
        }
        let mut data = Vec::with_capacity(rows.len() * cols.len());
        for &r in rows {
            for &c in cols {
                data.push(self.get(r, c));
            }
        }
        Ok(IntervalMatrix { rows: rows.len(), cols: cols.len(), data })
    }

    /// Does the enclosure contain the given point matrix (row-major)?
    pub fn contains_points(&self, values: &[f64]) -> bool {
        values.len() == self.data.len() && self.data.iter().zip(values).all(|(a, &v)| a.contains(v))
    }

    /// Interval Gram matrix `A^T A` with squared diagonal terms.
    pub fn gram(&self) -> IntervalMatrix {
        let n = self.cols;
        let mut g = Self::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let mut acc = Interval::ZERO;
                for k in 0..self.rows {
                    let term = if i == j { self.get(k, i).sqr() } else { self.get(k, i) * self.get(k, j) };
                    acc = acc + term;
                }
                g.set(i, j, acc);
                g.set(j, i, acc);
            }
        }
        g
    }

    /// Upper bound of `max_i sum_j |a_ij|`.
    pub fn inf_norm_ub(&self) -> f64 {
        (0..self.rows)
            .map(|i| (0..self.cols).fold(0.0, |acc, j| add_up(acc, self.get(i, j).mag())))
            .fold(0.0, f64::max)
    }

    fn one_norm_ub(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).fold(0.0, |acc, i| add_up(acc, self.get(i, j).mag())))
            .fold(0.0, f64::max)
    }
}

// ---------------------------------------------------------------------------
// norm bounds

/// Upper bound of the largest Gershgorin disc edge of a symmetric interval matrix.
fn gershgorin_upper(g: &IntervalMatrix) -> f64 {
    let n = g.rows();
    (0..n)
        .map(|i| (0..n).filter(|&j| j != i).fold(g.get(i, i).hi(), |acc, j| add_up(acc, g.get(i, j).mag())))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Lower bound of the smallest Gershgorin disc edge of a symmetric interval matrix.
fn gershgorin_lower(g: &IntervalMatrix) -> f64 {
    let n = g.rows();
    (0..n)
        .map(|i| (0..n).filter(|&j| j != i).fold(g.get(i, i).lo(), |acc, j| sub_down(acc, g.get(i, j).mag())))
        .fold(f64::INFINITY, f64::min)
}

/// Upper bound of `sup_{A in A} ||A||_2`.
///
/// Single rows and columns get the exact vector 2-norm of the entry-wise
/// magnitudes. Larger blocks take the smaller of the Gram-Gershgorin bound
/// `sqrt(max_i (G_ii + sum_{j != i} |G_ij|))`, `G = A^T A`, and
/// `sqrt(||A||_1 ||A||_inf)`.
pub fn op_norm_ub(a: &IntervalMatrix) -> f64 {
    if a.rows() == 0 || a.cols() == 0 {
        return 0.0;
    }
    if a.rows() == 1 || a.cols() == 1 {
        return hypot_up(a.entries().iter().map(Interval::mag));
    }
    let gram = sqrt_up(gershgorin_upper(&a.gram()).max(0.0));
    let mixed = sqrt_up(mul_up(a.one_norm_ub(), a.inf_norm_ub()));
    gram.min(mixed)
}

/// Gram-Gershgorin lower bound of `inf_{A in A} m(A)` for square `A`.
///
/// `m(A) = sigma_min(A) >= sqrt(lambda_min(A^T A))` and Gershgorin bounds
/// `lambda_min` from below on the interval Gram matrix. 1x1 blocks use the
/// mignitude directly.
pub fn m_lb_gershgorin(a: &IntervalMatrix) -> f64 {
    assert!(a.is_square(), "m_lb needs a square matrix");
    match a.rows() {
        0 => 0.0,
        1 => a.get(0, 0).mig(),
        _ => {
            let v = gershgorin_lower(&a.gram());
            if v > 0.0 {
                sqrt_down(v)
            } else {
                0.0
            }
        }
    }
}

/// Best certified lower bound of `inf_{A in A} m(A)` for square `A`.
///
/// Maximum of [`m_lb_gershgorin`] and a shift certified by interval Cholesky:
/// if `A^T A - t I` factors with strictly positive pivots for every member,
/// then `m(A) >= sqrt(t)`. Returns 0 when nothing positive can be certified.
pub fn m_lb(a: &IntervalMatrix) -> f64 {
    assert!(a.is_square(), "m_lb needs a square matrix");
    if a.rows() <= 1 {
        return m_lb_gershgorin(a);
    }
    let base = m_lb_gershgorin(a);
    let g = a.gram();
    let n = g.rows();
    let approx = crate::linalg::sym_eigen_min(&g.mid(), n);
    if !(approx > 0.0) {
        return base;
    }
    let mut best = 0.0;
    for factor in [0.999_999, 0.9999, 0.999, 0.99, 0.9, 0.5] {
        let t = approx * factor;
        if t <= 0.0 {
            break;
        }
        if cholesky_positive(&g, t) {
            best = t;
            break;
        }
    }
    base.max(sqrt_down(best))
}

/// Interval Cholesky of `G - t I`; true iff all pivots are certified positive.
fn cholesky_positive(g: &IntervalMatrix, t: f64) -> bool {
    let n = g.rows();
    let mut l = IntervalMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = g.get(j, j) - Interval::point(t);
        for k in 0..j {
            d = d - l.get(j, k).sqr();
        }
        if d.lo() <= 0.0 {
            return false;
        }
        let ljj = match d.sqrt() {
            Ok(v) => v,
            Err(_) => return false,
        };
        l.set(j, j, ljj);
        for i in (j + 1)..n {
            let mut s = g.get(i, j);
            for k in 0..j {
                s = s - l.get(i, k) * l.get(j, k);
            }
            match s.checked_div(ljj) {
                Ok(v) => l.set(i, j, v),
                Err(_) => return false,
            }
        }
    }
    true
}

/// Enclosure of `A^{-1}` for every point matrix in `A`.
///
/// With `Y ~ mid(A)^{-1}` and `E = I - Y A`, if `b = ||E||_inf < 1` then
/// `A^{-1} = Y + E Y + E^2 A^{-1}` and `||E^2 A^{-1}||_inf <= b^2 ||Y||_inf / (1 - b)`.
pub fn inverse_enclosure(a: &IntervalMatrix) -> Result<IntervalMatrix, IntervalError> {
    if !a.is_square() {
        return Err(IntervalError::ShapeMismatch);
    }
    let n = a.rows();
    let y_pts = crate::linalg::invert(&a.mid(), n).ok_or(IntervalError::NotInvertible)?;
    let y = IntervalMatrix::from_points(n, n, &y_pts).map_err(|_| IntervalError::NotInvertible)?;
    let ya = y.matmul(a)?;
    let mut e = IntervalMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let id = if i == j { Interval::ONE } else { Interval::ZERO };
            e.set(i, j, id - ya.get(i, j));
        }
    }
    let beta = e.inf_norm_ub();
    if !(beta < 1.0) {
        return Err(IntervalError::NotInvertible);
    }
    let first = y.add(&e.matmul(&y)?)?;
    let tail = div_up(mul_up(mul_up(beta, beta), y.inf_norm_ub()), sub_down(1.0, beta));
    let slack = Interval::symmetric(tail);
    let data = first.entries().iter().map(|&v| v + slack).collect();
    IntervalMatrix::new(n, n, data)
}
