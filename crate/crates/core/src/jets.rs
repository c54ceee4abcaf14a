//! Truncated multivariate Taylor polynomials and the graph-transport map.
//!
//! A [`TruncPoly`] holds the coefficients `c_j` of `sum_j c_j h^j` over all
//! multi-indices `|j| <= m`, so `c_j = D^j f(p) / j!`. Vector-valued jets are
//! slices of scalar polynomials, one per component. Floating point only.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::linalg;

/// Default maximum jet order.
pub const MAX_ORDER: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub enum JetError {
    /// Operands with different variable counts or truncation orders.
    Mismatch { expected: (usize, usize), found: (usize, usize) },
    /// Composition or inversion with a nonzero constant term.
    NonzeroConstant,
    /// The linear part to invert is singular.
    SingularLinearPart,
    /// Component count does not match the number of variables.
    WrongArity { expected: usize, found: usize },
}

impl fmt::Display for JetError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JetError::Mismatch { expected, found } => {
                write!(f, "jet shape mismatch: expected (vars, order) {expected:?}, found {found:?}")
            }
            JetError::NonzeroConstant => f.write_str("inner jet must vanish at the origin"),
            JetError::SingularLinearPart => f.write_str("singular linear part"),
            JetError::WrongArity { expected, found } => write!(f, "expected {expected} components, found {found}"),
        }
    }
}

/// Multi-index table shared by all polynomials with the same `(n, m)`.
#[derive(Debug, PartialEq)]
struct Basis {
    n: usize,
    m: usize,
    /// exponents, `n` per monomial, graded order
    exps: Vec<u8>,
    degree: Vec<usize>,
    /// mixed-radix code -> position, `usize::MAX` if degree > m
    lookup: Vec<usize>,
}

impl Basis {
    fn new(n: usize, m: usize) -> Basis {
        let radix = m + 1;
        let total = radix.pow(n as u32);
        let mut all: Vec<Vec<u8>> = Vec::new();
        for code in 0..total {
            let mut c = code;
            let mut e = vec![0u8; n];
            for slot in e.iter_mut() {
                *slot = (c % radix) as u8;
                c /= radix;
            }
            if e.iter().map(|&v| v as usize).sum::<usize>() <= m {
                all.push(e);
            }
        }
        // graded, then reverse-lexicographic so x_0 leads within a degree
        all.sort_by(|a, b| {
            let da: usize = a.iter().map(|&v| v as usize).sum();
            let db: usize = b.iter().map(|&v| v as usize).sum();
            da.cmp(&db).then_with(|| b.cmp(a))
        });
        let mut lookup = vec![usize::MAX; total];
        let mut exps = Vec::with_capacity(all.len() * n);
        let mut degree = Vec::with_capacity(all.len());
        for (pos, e) in all.iter().enumerate() {
            lookup[Self::code_of(e, radix)] = pos;
            exps.extend_from_slice(e);
            degree.push(e.iter().map(|&v| v as usize).sum());
        }
        Basis { n, m, exps, degree, lookup }
    }

    fn code_of(e: &[u8], radix: usize) -> usize {
        e.iter().rev().fold(0, |acc, &v| acc * radix + v as usize)
    }

    fn len(&self) -> usize {
        self.degree.len()
    }

    fn exp(&self, i: usize) -> &[u8] {
        &self.exps[i * self.n..(i + 1) * self.n]
    }

    fn index(&self, e: &[u8]) -> Option<usize> {
        if e.len() != self.n || e.iter().any(|&v| v as usize > self.m) {
            return None;
        }
        let pos = self.lookup[Self::code_of(e, self.m + 1)];
        (pos != usize::MAX).then_some(pos)
    }

    /// Position of the product monomial, if within the truncation.
    fn product(&self, i: usize, j: usize) -> Option<usize> {
        if self.degree[i] + self.degree[j] > self.m {
            return None;
        }
        let radix = self.m + 1;
        let code = self.exp(i).iter().zip(self.exp(j)).rev().fold(0, |acc, (&a, &b)| acc * radix + (a + b) as usize);
        Some(self.lookup[code])
    }
}

/// Truncated polynomial in `n` variables up to total degree `m`.
#[derive(Clone, Debug)]
pub struct TruncPoly {
    basis: Arc<Basis>,
    coeffs: Vec<f64>,
}

impl PartialEq for TruncPoly {
    fn eq(&self, other: &Self) -> bool {
        self.shape() == other.shape() && self.coeffs == other.coeffs
    }
}

impl TruncPoly {
    pub fn zero(n: usize, m: usize) -> TruncPoly {
        let basis = Arc::new(Basis::new(n, m));
        let len = basis.len();
        TruncPoly { basis, coeffs: vec![0.0; len] }
    }

    fn zero_like(&self) -> TruncPoly {
        TruncPoly { basis: self.basis.clone(), coeffs: vec![0.0; self.coeffs.len()] }
    }

    pub fn constant(n: usize, m: usize, c: f64) -> TruncPoly {
        let mut p = TruncPoly::zero(n, m);
        p.coeffs[0] = c;
        p
    }

    /// The coordinate polynomial `h_i`.
    pub fn variable(n: usize, m: usize, i: usize) -> TruncPoly {
        assert!(i < n, "variable index out of range");
        let mut p = TruncPoly::zero(n, m);
        if m >= 1 {
            let mut e = vec![0u8; n];
            e[i] = 1;
            let pos = p.basis.index(&e).expect("linear monomial");
            p.coeffs[pos] = 1.0;
        }
        p
    }

    /// Affine polynomial `c + sum_i g_i h_i`.
    pub fn affine(m: usize, c: f64, grad: &[f64]) -> TruncPoly {
        let n = grad.len();
        let mut p = TruncPoly::constant(n, m, c);
        for (i, &g) in grad.iter().enumerate() {
            if g != 0.0 {
                p = p.add(&TruncPoly::variable(n, m, i).scale(g)).expect("same shape");
            }
        }
        p
    }

    /// Identity map as a vector of coordinate polynomials.
    pub fn identity(n: usize, m: usize) -> Vec<TruncPoly> {
        (0..n).map(|i| TruncPoly::variable(n, m, i)).collect()
    }

    pub fn nvars(&self) -> usize {
        self.basis.n
    }

    pub fn order(&self) -> usize {
        self.basis.m
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.basis.n, self.basis.m)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of `h^e`, zero if `|e| > m`.
    pub fn coeff(&self, e: &[u8]) -> f64 {
        self.basis.index(e).map_or(0.0, |i| self.coeffs[i])
    }

    pub fn set_coeff(&mut self, e: &[u8], v: f64) -> bool {
        match self.basis.index(e) {
            Some(i) => {
                self.coeffs[i] = v;
                true
            }
            None => false,
        }
    }

    pub fn constant_term(&self) -> f64 {
        self.coeffs[0]
    }

    /// Iterate over `(exponent, coefficient)` in graded order.
    pub fn terms(&self) -> impl Iterator<Item = (&[u8], f64)> + '_ {
        (0..self.coeffs.len()).map(move |i| (self.basis.exp(i), self.coeffs[i]))
    }

    /// Gradient at the origin (the degree-1 coefficients).
    pub fn linear_part(&self) -> Vec<f64> {
        let n = self.nvars();
        (0..n)
            .map(|i| {
                let mut e = vec![0u8; n];
                e[i] = 1;
                self.coeff(&e)
            })
            .collect()
    }

    /// Largest absolute coefficient among monomials of total degree `d`.
    pub fn degree_norm(&self, d: usize) -> f64 {
        self.coeffs.iter().zip(&self.basis.degree).filter(|(_, &g)| g == d).map(|(c, _)| c.abs()).fold(0.0, f64::max)
    }

    fn check(&self, other: &TruncPoly) -> Result<(), JetError> {
        if self.shape() != other.shape() {
            return Err(JetError::Mismatch { expected: self.shape(), found: other.shape() });
        }
        Ok(())
    }

    pub fn add(&self, other: &TruncPoly) -> Result<TruncPoly, JetError> {
        self.check(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(TruncPoly { basis: self.basis.clone(), coeffs })
    }

    pub fn sub(&self, other: &TruncPoly) -> Result<TruncPoly, JetError> {
        self.check(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Ok(TruncPoly { basis: self.basis.clone(), coeffs })
    }

    pub fn scale(&self, k: f64) -> TruncPoly {
        TruncPoly { basis: self.basis.clone(), coeffs: self.coeffs.iter().map(|c| c * k).collect() }
    }

    pub fn add_constant(&self, c: f64) -> TruncPoly {
        let mut p = self.clone();
        p.coeffs[0] += c;
        p
    }

    pub fn mul(&self, other: &TruncPoly) -> Result<TruncPoly, JetError> {
        self.check(other)?;
        let mut out = self.zero_like();
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                if b == 0.0 {
                    continue;
                }
                if let Some(k) = self.basis.product(i, j) {
                    out.coeffs[k] += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn powi(&self, k: u32) -> TruncPoly {
        let mut acc = TruncPoly { basis: self.basis.clone(), coeffs: vec![0.0; self.coeffs.len()] };
        acc.coeffs[0] = 1.0;
        for _ in 0..k {
            acc = acc.mul(self).expect("same shape");
        }
        acc
    }

    /// Value at `h`.
    pub fn eval(&self, h: &[f64]) -> f64 {
        assert_eq!(h.len(), self.nvars(), "wrong point dimension");
        self.terms()
            .map(|(e, c)| if c == 0.0 { 0.0 } else { c * e.iter().zip(h).map(|(&k, &x)| (0..k).fold(1.0, |acc, _| acc * x)).product::<f64>() })
            .sum()
    }

    /// `self(inner_1, ..., inner_n)` truncated at the order of the inner jets.
    ///
    /// Inner jets must vanish at the origin so that truncation is exact.
    pub fn compose(&self, inner: &[TruncPoly]) -> Result<TruncPoly, JetError> {
        let n = self.nvars();
        if inner.len() != n {
            return Err(JetError::WrongArity { expected: n, found: inner.len() });
        }
        let first = inner.first().ok_or(JetError::WrongArity { expected: n, found: 0 })?;
        for q in inner {
            first.check(q)?;
            if q.constant_term() != 0.0 {
                return Err(JetError::NonzeroConstant);
            }
        }
        let m_out = first.order();
        let top = self.order().min(m_out);
        // powers[k][e] = inner_k^e
        let powers: Vec<Vec<TruncPoly>> = inner
            .iter()
            .map(|q| {
                let mut v = Vec::with_capacity(top + 1);
                let mut acc = q.powi(0);
                v.push(acc.clone());
                for _ in 0..top {
                    acc = acc.mul(q).expect("same shape");
                    v.push(acc.clone());
                }
                v
            })
            .collect();
        let mut out = first.zero_like();
        for (e, c) in self.terms() {
            if c == 0.0 || e.iter().map(|&v| v as usize).sum::<usize>() > top {
                continue;
            }
            let mut term = out.zero_like();
            term.coeffs[0] = c;
            for (k, &ek) in e.iter().enumerate() {
                if ek > 0 {
                    term = term.mul(&powers[k][ek as usize])?;
                }
            }
            out = out.add(&term)?;
        }
        Ok(out)
    }

    /// `cos` of the polynomial, via `cos(c + N) = cos c cos N - sin c sin N`.
    pub fn cos(&self) -> TruncPoly {
        self.sin_cos().1
    }

    pub fn sin(&self) -> TruncPoly {
        self.sin_cos().0
    }

    /// `(sin p, cos p)`.
    pub fn sin_cos(&self) -> (TruncPoly, TruncPoly) {
        let c0 = self.constant_term();
        let nil = self.add_constant(-c0);
        let m = self.order();
        // series of sin N and cos N; N is nilpotent of index m + 1
        let mut sin_n = self.zero_like();
        let mut cos_n = self.zero_like();
        cos_n.coeffs[0] = 1.0;
        let mut power = self.powi(0);
        let mut fact = 1.0;
        for k in 1..=m {
            power = power.mul(&nil).expect("same shape");
            fact *= k as f64;
            let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
            let term = power.scale(sign / fact);
            if k % 2 == 1 {
                sin_n = sin_n.add(&term).expect("same shape");
            } else {
                cos_n = cos_n.add(&term).expect("same shape");
            }
        }
        let (s0, co0) = (libm::sin(c0), libm::cos(c0));
        let sin_p = sin_n.scale(co0).add(&cos_n.scale(s0)).expect("same shape");
        let cos_p = cos_n.scale(co0).sub(&sin_n.scale(s0)).expect("same shape");
        (sin_p, cos_p)
    }
}

/// Shape check for a vector jet; returns `(n, m)`.
fn vector_shape(p: &[TruncPoly]) -> Result<(usize, usize), JetError> {
    let first = p.first().ok_or(JetError::WrongArity { expected: 1, found: 0 })?;
    for q in p {
        first.check(q)?;
    }
    Ok(first.shape())
}

/// Compose each component of `outer` with `inner`.
pub fn compose_vec(outer: &[TruncPoly], inner: &[TruncPoly]) -> Result<Vec<TruncPoly>, JetError> {
    outer.iter().map(|p| p.compose(inner)).collect()
}

/// Jacobian at the origin, row-major `components x vars`.
pub fn linear_matrix(p: &[TruncPoly]) -> Vec<f64> {
    p.iter().flat_map(|q| q.linear_part()).collect()
}

/// Compositional inverse of a square jet with `p(0) = 0`.
///
/// With `p = A h + N(h)`, iterates `q <- A^{-1} (h - N(q))`; each pass fixes
/// one more degree, so `m` passes are exact through order `m`.
pub fn tpoly_inverse(p: &[TruncPoly]) -> Result<Vec<TruncPoly>, JetError> {
    let (n, m) = vector_shape(p)?;
    if p.len() != n {
        return Err(JetError::WrongArity { expected: n, found: p.len() });
    }
    if p.iter().any(|q| q.constant_term() != 0.0) {
        return Err(JetError::NonzeroConstant);
    }
    let a = linear_matrix(p);
    let a_inv = linalg::invert(&a, n).ok_or(JetError::SingularLinearPart)?;
    // N = p - A h
    let nonlinear: Vec<TruncPoly> = p
        .iter()
        .enumerate()
        .map(|(i, q)| {
            let lin = TruncPoly::affine(m, 0.0, &a[i * n..(i + 1) * n]);
            q.sub(&lin).expect("same shape")
        })
        .collect();
    let id = TruncPoly::identity(n, m);
    let apply_inv = |v: &[TruncPoly]| -> Vec<TruncPoly> {
        (0..n)
            .map(|i| {
                v.iter().enumerate().fold(TruncPoly::zero(n, m), |acc, (k, vk)| acc.add(&vk.scale(a_inv[i * n + k])).expect("same shape"))
            })
            .collect()
    };
    let mut q = apply_inv(&id);
    for _ in 1..m {
        let nq = compose_vec(&nonlinear, &q)?;
        let rhs: Vec<TruncPoly> = id.iter().zip(&nq).map(|(h, v)| h.sub(v).expect("same shape")).collect();
        q = apply_inv(&rhs);
    }
    Ok(q)
}

/// Push a graph jet forward under `f`.
///
/// `f_jet` holds the jets of all components of `f` at `z` in displacement
/// coordinates (constant terms are ignored). `graph` gives the fiber
/// coordinates (`fiber`) of a disc through `z` as jets in the base coordinates
/// (`base`), vanishing at the origin. Returns the jet of the image disc at
/// `f(z)`: `R = g_fiber o (g_base)^{-1}` with `g = f o (id, P) - f(z)`.
pub fn graph_transport(f_jet: &[TruncPoly], graph: &[TruncPoly], base: &[usize], fiber: &[usize]) -> Result<Vec<TruncPoly>, JetError> {
    let (nf, _) = vector_shape(f_jet)?;
    let (nb, m) = vector_shape(graph)?;
    if nb != base.len() {
        return Err(JetError::WrongArity { expected: base.len(), found: nb });
    }
    if graph.len() != fiber.len() || base.len() + fiber.len() != nf || f_jet.len() != nf {
        return Err(JetError::WrongArity { expected: nf, found: base.len() + fiber.len() });
    }
    if graph.iter().any(|q| q.constant_term() != 0.0) {
        return Err(JetError::NonzeroConstant);
    }
    // embedding theta -> (theta, P(theta)) in full coordinates
    let mut embed = vec![TruncPoly::zero(nb, m); nf];
    for (k, &i) in base.iter().enumerate() {
        embed[i] = TruncPoly::variable(nb, m, k);
    }
    for (k, &i) in fiber.iter().enumerate() {
        embed[i] = graph[k].clone();
    }
    let g: Vec<TruncPoly> = f_jet
        .iter()
        .map(|c| c.add_constant(-c.constant_term()).compose(&embed))
        .collect::<Result<_, _>>()?;
    let g_base: Vec<TruncPoly> = base.iter().map(|&i| g[i].clone()).collect();
    let g_fiber: Vec<TruncPoly> = fiber.iter().map(|&i| g[i].clone()).collect();
    let inv = tpoly_inverse(&g_base)?;
    compose_vec(&g_fiber, &inv)
}

/// Result of transporting a graph jet along an orbit.
#[derive(Clone, Debug)]
pub struct JetIteration {
    /// `P^0, ..., P^n`
    pub jets: Vec<Vec<TruncPoly>>,
    /// Per step, the largest coefficient magnitude of each degree `0..=m`.
    pub degree_norms: Vec<Vec<f64>>,
    /// Running maximum of `degree_norms` over the steps so far.
    pub running_max: Vec<Vec<f64>>,
}

/// Transport `initial` along `orbit` (`orbit[l+1] = f(orbit[l])`) using jets
/// supplied by `jet_at`.
pub fn jet_iteration(
    jet_at: impl Fn(&[f64]) -> Vec<TruncPoly>,
    orbit: &[Vec<f64>],
    initial: Vec<TruncPoly>,
    base: &[usize],
    fiber: &[usize],
) -> Result<JetIteration, JetError> {
    let (_, m) = vector_shape(&initial)?;
    let norms = |p: &[TruncPoly]| -> Vec<f64> { (0..=m).map(|d| p.iter().map(|q| q.degree_norm(d)).fold(0.0, f64::max)).collect() };
    let mut jets = vec![initial];
    let mut degree_norms = vec![norms(&jets[0])];
    let mut running_max = degree_norms.clone();
    for z in orbit.iter().take(orbit.len().saturating_sub(1)) {
        let next = graph_transport(&jet_at(z), jets.last().expect("nonempty"), base, fiber)?;
        let dn = norms(&next);
        let prev = running_max.last().expect("nonempty");
        running_max.push(prev.iter().zip(&dn).map(|(a, b)| a.max(*b)).collect());
        degree_norms.push(dn);
        jets.push(next);
    }
    Ok(JetIteration { jets, degree_norms, running_max })
}
