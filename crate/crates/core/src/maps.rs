//! Map models: the rotating Hénon family in local coordinates, a Möbius-strip
//! counterexample and a decoupled linear map.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use crate::geometry::normalize_lambda;
use crate::interval::{Interval, IntervalError, IntervalMatrix};
use crate::jets::TruncPoly;

#[derive(Clone, Debug, PartialEq)]
pub enum ModelError {
    UnknownModel(String),
    UnknownParameter { model: &'static str, name: String },
    InvalidParameter { name: &'static str, reason: &'static str },
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::UnknownModel(name) => write!(f, "unknown model '{name}'"),
            ModelError::UnknownParameter { model, name } => write!(f, "model '{model}' has no parameter '{name}'"),
            ModelError::InvalidParameter { name, reason } => write!(f, "parameter '{name}': {reason}"),
        }
    }
}

/// A map on `Λ × R^u × R^s` with closed-form derivatives.
///
/// The `λ` component of [`MapModel::eval_lifted`] and of the enclosures is the
/// continuous lift: it is not reduced modulo 1, so a box with `λ ∈ [0, 1]`
/// shows how far the base map winds.
pub trait MapModel: Send + Sync {
    fn name(&self) -> &'static str;

    /// `(u, s)`
    fn dims(&self) -> (usize, usize);

    fn dim(&self) -> usize {
        let (u, s) = self.dims();
        1 + u + s
    }

    /// Parameters for reports, in a fixed order.
    fn params(&self) -> Vec<(&'static str, f64)>;

    fn eval_lifted(&self, p: &[f64]) -> Vec<f64>;

    /// `f(p)` with `λ'` reduced to `[0, 1)`.
    fn eval_point(&self, p: &[f64]) -> Vec<f64> {
        let mut q = self.eval_lifted(p);
        q[0] = normalize_lambda(q[0]);
        q
    }

    /// Enclosure of `{f(z) : z ∈ b}` (lifted `λ`).
    fn eval_enclosure(&self, b: &[Interval]) -> Result<Vec<Interval>, IntervalError>;

    /// Enclosure of `{Df(z) : z ∈ b}`.
    fn deriv_enclosure(&self, b: &[Interval]) -> Result<IntervalMatrix, IntervalError>;

    /// `Df(p)` row-major.
    fn jacobian(&self, p: &[f64]) -> Vec<f64>;

    /// Taylor jets of every component at `p` in displacement variables,
    /// truncated at order `m`. Constant terms carry the lifted `f(p)`.
    fn jet(&self, p: &[f64], m: usize) -> Vec<TruncPoly>;

    /// Whether `f` is a diffeomorphism onto its image.
    fn invertible_hint(&self) -> bool;
}

fn two_pi() -> Interval {
    Interval::PI.scale(2.0)
}

fn unknown(model: &'static str, name: &str) -> ModelError {
    ModelError::UnknownParameter { model, name: name.to_string() }
}

// ---------------------------------------------------------------------------
// rotating Hénon map

/// Rotating Hénon map `F(λ, q1, q2) = (λ + c + ε q1 cos 2πλ, 1 + q2 − a q1² + ε cos 2πλ, b q1)`
/// in the coordinates `(λ, q) = C (λ, x, y) + (0, q*)`.
///
/// The local map is `f = C^{-1} ∘ (F(C · + q*) − q*)`. Writing `u = x − α y`,
/// `v = β x + y` for the components of `C (x, y)`, it reads
///
/// ```text
/// λ'     = λ + c + ε (q1* + u) cos 2πλ
/// δq1'   = v − 2 a q1* u − a u² + ε cos 2πλ
/// δq2'   = b u
/// (x',y') = C^{-1} (δq1', δq2')
/// ```
///
/// where `F(q*) = q*` has been used to drop the constant term.
#[derive(Clone, Debug)]
pub struct RotatingHenonModel {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub eps: Interval,
    /// ε used by point evaluation and jets
    pub eps_point: f64,
    /// `C(x, y) = (x − alpha y, beta x + y)`
    pub alpha: f64,
    pub beta: f64,
    q1_star: f64,
    q1_star_iv: Interval,
}

pub const HENON_A: f64 = 0.68;
pub const HENON_B: f64 = 0.1;
pub const HENON_ALPHA: f64 = 0.3553203857;
pub const HENON_BETA: f64 = 0.03553203857;

/// `q1* = (−(1−b) − sqrt((1−b)² + 4a)) / (2a)`, `q2* = b q1*`.
pub fn henon_fixed_point(a: f64, b: f64) -> Result<(f64, f64), ModelError> {
    let disc = (1.0 - b) * (1.0 - b) + 4.0 * a;
    if !(disc >= 0.0) {
        return Err(ModelError::InvalidParameter { name: "a", reason: "negative discriminant (1-b)^2 + 4a" });
    }
    if a == 0.0 {
        return Err(ModelError::InvalidParameter { name: "a", reason: "must be nonzero" });
    }
    let q1 = (-(1.0 - b) - libm::sqrt(disc)) / (2.0 * a);
    Ok((q1, b * q1))
}

fn henon_fixed_point_enclosure(a: f64, b: f64) -> Result<Interval, IntervalError> {
    let a = Interval::point(a);
    let omb = Interval::ONE - Interval::point(b);
    let disc = omb.sqr() + a * 4.0;
    (-omb - disc.sqrt()?).checked_div(a * 2.0)
}

impl RotatingHenonModel {
    pub fn new(a: f64, b: f64, c: f64, eps: Interval) -> Result<Self, ModelError> {
        let (q1_star, _) = henon_fixed_point(a, b)?;
        let q1_star_iv = henon_fixed_point_enclosure(a, b)
            .map_err(|_| ModelError::InvalidParameter { name: "a", reason: "fixed point enclosure failed" })?;
        Ok(RotatingHenonModel {
            a,
            b,
            c,
            eps,
            eps_point: eps.hi(),
            alpha: HENON_ALPHA,
            beta: HENON_BETA,
            q1_star,
            q1_star_iv,
        })
    }

    /// The standard parameters `a = 0.68`, `b = 0.1`, `c = 0`.
    pub fn standard(eps_lo: f64, eps_hi: f64) -> Result<Self, ModelError> {
        let eps = Interval::new(eps_lo, eps_hi).map_err(|_| ModelError::InvalidParameter { name: "eps", reason: "need eps_lo <= eps_hi" })?;
        Self::new(HENON_A, HENON_B, 0.0, eps)
    }

    pub fn with_eps_point(mut self, eps: f64) -> Self {
        self.eps_point = eps;
        self
    }

    pub fn q_star(&self) -> (f64, f64) {
        (self.q1_star, self.b * self.q1_star)
    }

    fn det(&self) -> Interval {
        Interval::ONE + Interval::point(self.alpha) * Interval::point(self.beta)
    }

    /// `C` restricted to `(x, y)`, row-major.
    pub fn c_matrix(&self) -> [f64; 4] {
        [1.0, -self.alpha, self.beta, 1.0]
    }

    fn c_full(&self) -> IntervalMatrix {
        IntervalMatrix::from_points(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, -self.alpha, 0.0, self.beta, 1.0]).expect("3x3")
    }

    fn c_inv_full(&self) -> Result<IntervalMatrix, IntervalError> {
        let det = self.det();
        let e = |v: f64| Interval::point(v).checked_div(det);
        IntervalMatrix::new(
            3,
            3,
            vec![Interval::ONE, Interval::ZERO, Interval::ZERO, Interval::ZERO, e(1.0)?, e(self.alpha)?, Interval::ZERO, e(-self.beta)?, e(1.0)?],
        )
    }

    /// `F_ε` itself in the original coordinates (for reference checks).
    pub fn raw_henon(&self, l: f64, q1: f64, q2: f64, eps: f64) -> [f64; 3] {
        let cs = libm::cos(2.0 * PI * l);
        [l + self.c + eps * q1 * cs, 1.0 + q2 - self.a * q1 * q1 + eps * cs, self.b * q1]
    }
}

impl MapModel for RotatingHenonModel {
    fn name(&self) -> &'static str {
        "rotating_henon"
    }

    fn dims(&self) -> (usize, usize) {
        (1, 1)
    }

    fn params(&self) -> Vec<(&'static str, f64)> {
        vec![("a", self.a), ("b", self.b), ("c", self.c), ("eps_lo", self.eps.lo()), ("eps_hi", self.eps.hi())]
    }

    fn eval_lifted(&self, p: &[f64]) -> Vec<f64> {
        let (l, x, y) = (p[0], p[1], p[2]);
        let eps = self.eps_point;
        let u = x - self.alpha * y;
        let v = self.beta * x + y;
        let cs = libm::cos(2.0 * PI * l);
        let lam = l + self.c + eps * (self.q1_star + u) * cs;
        let d1 = v - 2.0 * self.a * self.q1_star * u - self.a * u * u + eps * cs;
        let d2 = self.b * u;
        let det = 1.0 + self.alpha * self.beta;
        vec![lam, (d1 + self.alpha * d2) / det, (-self.beta * d1 + d2) / det]
    }

    fn eval_enclosure(&self, b: &[Interval]) -> Result<Vec<Interval>, IntervalError> {
        let (l, x, y) = (b[0], b[1], b[2]);
        let (al, be) = (Interval::point(self.alpha), Interval::point(self.beta));
        let a = Interval::point(self.a);
        let u = x - al * y;
        let v = be * x + y;
        let cs = (l * two_pi()).cos();
        let lam = l + Interval::point(self.c) + self.eps * (self.q1_star_iv + u) * cs;
        let d1 = v - a * self.q1_star_iv * u * 2.0 - a * u.sqr() + self.eps * cs;
        let d2 = Interval::point(self.b) * u;
        let det = self.det();
        Ok(vec![lam, (d1 + al * d2).checked_div(det)?, (d2 - be * d1).checked_div(det)?])
    }

    fn deriv_enclosure(&self, b: &[Interval]) -> Result<IntervalMatrix, IntervalError> {
        let (l, x, y) = (b[0], b[1], b[2]);
        let u = x - Interval::point(self.alpha) * y;
        let q1 = self.q1_star_iv + u;
        let arg = l * two_pi();
        let (sn, cs) = (arg.sin(), arg.cos());
        let eps = self.eps;
        let tp = two_pi();
        let j = IntervalMatrix::new(
            3,
            3,
            vec![
                Interval::ONE - tp * eps * q1 * sn,
                eps * cs,
                Interval::ZERO,
                -(tp * eps * sn),
                -(Interval::point(self.a) * q1 * 2.0),
                Interval::ONE,
                Interval::ZERO,
                Interval::point(self.b),
                Interval::ZERO,
            ],
        )?;
        self.c_inv_full()?.matmul(&j.matmul(&self.c_full())?)
    }

    fn jacobian(&self, p: &[f64]) -> Vec<f64> {
        let (l, x, y) = (p[0], p[1], p[2]);
        let eps = self.eps_point;
        let (al, be) = (self.alpha, self.beta);
        let q1 = self.q1_star + x - al * y;
        let (sn, cs) = (libm::sin(2.0 * PI * l), libm::cos(2.0 * PI * l));
        let j = [1.0 - 2.0 * PI * eps * q1 * sn, eps * cs, 0.0, -2.0 * PI * eps * sn, -2.0 * self.a * q1, 1.0, 0.0, self.b, 0.0];
        let c = [1.0, 0.0, 0.0, 0.0, 1.0, -al, 0.0, be, 1.0];
        let det = 1.0 + al * be;
        let ci = [1.0, 0.0, 0.0, 0.0, 1.0 / det, al / det, 0.0, -be / det, 1.0 / det];
        let jc = crate::linalg::matmul(&j, &c, 3, 3, 3);
        crate::linalg::matmul(&ci, &jc, 3, 3, 3)
    }

    fn jet(&self, p: &[f64], m: usize) -> Vec<TruncPoly> {
        let var = |i: usize| TruncPoly::variable(3, m, i).add_constant(p[i]);
        let (l, x, y) = (var(0), var(1), var(2));
        let eps = self.eps_point;
        let u = x.sub(&y.scale(self.alpha)).expect("shape");
        let v = x.scale(self.beta).add(&y).expect("shape");
        let cs = l.scale(2.0 * PI).cos();
        let q1 = u.add_constant(self.q1_star);
        let lam = l.add(&q1.mul(&cs).expect("shape").scale(eps)).expect("shape").add_constant(self.c);
        let d1 = v
            .sub(&u.scale(2.0 * self.a * self.q1_star))
            .and_then(|t| t.sub(&u.mul(&u)?.scale(self.a)))
            .and_then(|t| t.add(&cs.scale(eps)))
            .expect("shape");
        let d2 = u.scale(self.b);
        let det = 1.0 + self.alpha * self.beta;
        let xp = d1.add(&d2.scale(self.alpha)).expect("shape").scale(1.0 / det);
        let yp = d2.sub(&d1.scale(self.beta)).expect("shape").scale(1.0 / det);
        vec![lam, xp, yp]
    }

    fn invertible_hint(&self) -> bool {
        self.b != 0.0
    }
}

// ---------------------------------------------------------------------------
// Möbius strip

/// Flat-coordinate model of the Möbius strip examples.
///
/// `f(λ, x, y) = (2λ, ξ x, σ(λ) (amp (1 + cos 2πλ) + μ y))` with
/// `σ(λ) = (−1)^{⌊2λ⌋}`: the base doubles, so the strip is wrapped twice, and
/// the sign flip realizes the half-twist of the gluing. `amp` scales the
/// strip's `1/4 + 1/4 cos` profile into the fiber ball.
#[derive(Clone, Debug)]
pub struct MobiusModel {
    pub xi: f64,
    pub mu: f64,
    pub amp: f64,
}

impl MobiusModel {
    pub fn new(xi: f64, mu: f64, amp: f64) -> Result<Self, ModelError> {
        if !(xi > 2.0) {
            return Err(ModelError::InvalidParameter { name: "xi", reason: "must exceed 2" });
        }
        if !(mu.abs() < 0.25) {
            return Err(ModelError::InvalidParameter { name: "mu", reason: "need |mu| < 1/4" });
        }
        Ok(MobiusModel { xi, mu, amp })
    }

    fn sign(l: f64) -> f64 {
        if (libm::floor(2.0 * l) as i64).rem_euclid(2) == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Hull of the sign over a `λ` interval.
    fn sign_enclosure(l: Interval) -> Interval {
        let lo = libm::floor(2.0 * l.lo());
        let hi = libm::floor(2.0 * l.hi());
        if lo == hi {
            Interval::point(Self::sign(l.lo()))
        } else {
            Interval::UNIT
        }
    }
}

impl Default for MobiusModel {
    fn default() -> Self {
        MobiusModel { xi: 5.0, mu: 0.0, amp: 0.0125 }
    }
}

impl MapModel for MobiusModel {
    fn name(&self) -> &'static str {
        "mobius"
    }

    fn dims(&self) -> (usize, usize) {
        (1, 1)
    }

    fn params(&self) -> Vec<(&'static str, f64)> {
        vec![("xi", self.xi), ("mu", self.mu), ("amp", self.amp)]
    }

    fn eval_lifted(&self, p: &[f64]) -> Vec<f64> {
        let (l, x, y) = (p[0], p[1], p[2]);
        let g = self.amp * (1.0 + libm::cos(2.0 * PI * l)) + self.mu * y;
        vec![2.0 * l, self.xi * x, Self::sign(l) * g]
    }

    fn eval_enclosure(&self, b: &[Interval]) -> Result<Vec<Interval>, IntervalError> {
        let (l, x, y) = (b[0], b[1], b[2]);
        let g = Interval::point(self.amp) * (Interval::ONE + (l * two_pi()).cos()) + Interval::point(self.mu) * y;
        Ok(vec![l * 2.0, x * self.xi, Self::sign_enclosure(l) * g])
    }

    fn deriv_enclosure(&self, b: &[Interval]) -> Result<IntervalMatrix, IntervalError> {
        let l = b[0];
        let s = Self::sign_enclosure(l);
        let dg = -(Interval::point(self.amp) * two_pi() * (l * two_pi()).sin());
        IntervalMatrix::new(
            3,
            3,
            vec![
                Interval::point(2.0),
                Interval::ZERO,
                Interval::ZERO,
                Interval::ZERO,
                Interval::point(self.xi),
                Interval::ZERO,
                s * dg,
                Interval::ZERO,
                s * Interval::point(self.mu),
            ],
        )
    }

    fn jacobian(&self, p: &[f64]) -> Vec<f64> {
        let s = Self::sign(p[0]);
        let dg = -self.amp * 2.0 * PI * libm::sin(2.0 * PI * p[0]);
        vec![2.0, 0.0, 0.0, 0.0, self.xi, 0.0, s * dg, 0.0, s * self.mu]
    }

    fn jet(&self, p: &[f64], m: usize) -> Vec<TruncPoly> {
        let var = |i: usize| TruncPoly::variable(3, m, i).add_constant(p[i]);
        let s = Self::sign(p[0]);
        let g = var(0).scale(2.0 * PI).cos().add_constant(1.0).scale(self.amp).add(&var(2).scale(self.mu)).expect("shape");
        vec![var(0).scale(2.0), var(1).scale(self.xi), g.scale(s)]
    }

    fn invertible_hint(&self) -> bool {
        false
    }
}

// ---------------------------------------------------------------------------
// linear test map

/// `f(λ, x, y) = (λ + c, a_x x, a_y y)`.
#[derive(Clone, Debug)]
pub struct LinearTestModel {
    pub c: f64,
    pub ax: f64,
    pub ay: f64,
}

impl Default for LinearTestModel {
    fn default() -> Self {
        LinearTestModel { c: 0.0, ax: 2.0, ay: 0.5 }
    }
}

impl MapModel for LinearTestModel {
    fn name(&self) -> &'static str {
        "linear_test"
    }

    fn dims(&self) -> (usize, usize) {
        (1, 1)
    }

    fn params(&self) -> Vec<(&'static str, f64)> {
        vec![("c", self.c), ("ax", self.ax), ("ay", self.ay)]
    }

    fn eval_lifted(&self, p: &[f64]) -> Vec<f64> {
        vec![p[0] + self.c, self.ax * p[1], self.ay * p[2]]
    }

    fn eval_enclosure(&self, b: &[Interval]) -> Result<Vec<Interval>, IntervalError> {
        Ok(vec![b[0] + self.c, b[1] * self.ax, b[2] * self.ay])
    }

    fn deriv_enclosure(&self, _b: &[Interval]) -> Result<IntervalMatrix, IntervalError> {
        IntervalMatrix::from_points(3, 3, &self.jacobian(&[0.0; 3]))
    }

    fn jacobian(&self, _p: &[f64]) -> Vec<f64> {
        vec![1.0, 0.0, 0.0, 0.0, self.ax, 0.0, 0.0, 0.0, self.ay]
    }

    fn jet(&self, p: &[f64], m: usize) -> Vec<TruncPoly> {
        let f = self.eval_lifted(p);
        let j = self.jacobian(p);
        (0..3).map(|i| TruncPoly::affine(m, f[i], &j[i * 3..(i + 1) * 3])).collect()
    }

    fn invertible_hint(&self) -> bool {
        self.ax != 0.0 && self.ay != 0.0
    }
}

// ---------------------------------------------------------------------------
// registry

pub const MODEL_NAMES: [&str; 3] = ["rotating_henon", "mobius", "linear_test"];

/// Build a model by name. Missing parameters take their defaults.
pub fn build_model(name: &str, params: &BTreeMap<String, f64>) -> Result<Box<dyn MapModel>, ModelError> {
    let get = |k: &str, default: f64| params.get(k).copied().unwrap_or(default);
    match name {
        "rotating_henon" => {
            const KEYS: [&str; 6] = ["a", "b", "c", "eps_lo", "eps_hi", "eps"];
            if let Some(k) = params.keys().find(|k| !KEYS.contains(&k.as_str())) {
                return Err(unknown("rotating_henon", k));
            }
            let (lo, hi) = (get("eps_lo", 0.0), get("eps_hi", 0.0));
            let eps = Interval::new(lo, hi).map_err(|_| ModelError::InvalidParameter { name: "eps", reason: "need eps_lo <= eps_hi" })?;
            let m = RotatingHenonModel::new(get("a", HENON_A), get("b", HENON_B), get("c", 0.0), eps)?;
            let point = get("eps", hi);
            if !eps.contains(point) {
                return Err(ModelError::InvalidParameter { name: "eps", reason: "point value must lie in [eps_lo, eps_hi]" });
            }
            Ok(Box::new(m.with_eps_point(point)))
        }
        "mobius" => {
            const KEYS: [&str; 3] = ["xi", "mu", "amp"];
            if let Some(k) = params.keys().find(|k| !KEYS.contains(&k.as_str())) {
                return Err(unknown("mobius", k));
            }
            let d = MobiusModel::default();
            Ok(Box::new(MobiusModel::new(get("xi", d.xi), get("mu", d.mu), get("amp", d.amp))?))
        }
        "linear_test" => {
            const KEYS: [&str; 3] = ["c", "ax", "ay"];
            if let Some(k) = params.keys().find(|k| !KEYS.contains(&k.as_str())) {
                return Err(unknown("linear_test", k));
            }
            let d = LinearTestModel::default();
            Ok(Box::new(LinearTestModel { c: get("c", d.c), ax: get("ax", d.ax), ay: get("ay", d.ay) }))
        }
        other => Err(ModelError::UnknownModel(other.to_string())),
    }
}
