//! Rate constants, rate conditions and refined Lipschitz constants.
//!
//! Every `ξ` is a certified lower bound and every `μ` a certified upper
//! bound: norms are bounded from above, minimal expansions from below and
//! all combinations are rounded in the safe direction.

use alloc::vec::Vec;
use core::fmt;

use crate::geometry::{subdivide, DomainBox, GeometryError, SubBox};
use crate::interval::{add_up, div_up, m_lb, m_lb_gershgorin, mul_down, mul_up, op_norm_ub, sub_down, IntervalError, IntervalMatrix};
use crate::maps::MapModel;

#[derive(Clone, Debug, PartialEq)]
pub enum RateError {
    Interval(IntervalError),
    Geometry(GeometryError),
    /// Model and domain disagree on `(u, s)`.
    Dimension,
}

impl From<IntervalError> for RateError {
    fn from(e: IntervalError) -> Self {
        RateError::Interval(e)
    }
}

impl From<GeometryError> for RateError {
    fn from(e: GeometryError) -> Self {
        RateError::Geometry(e)
    }
}

impl fmt::Display for RateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RateError::Interval(e) => write!(f, "interval error: {e}"),
            RateError::Geometry(e) => write!(f, "{e}"),
            RateError::Dimension => f.write_str("model dimensions do not match the domain"),
        }
    }
}

/// Lower bound used for minimal expansions of square blocks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BoundScheme {
    /// Gershgorin on the interval Gram matrix.
    #[default]
    Gershgorin,
    /// Gershgorin or a Cholesky-certified shift, whichever is larger.
    Sharp,
}

impl BoundScheme {
    fn m(&self, a: &IntervalMatrix) -> f64 {
        match self {
            BoundScheme::Gershgorin => m_lb_gershgorin(a),
            BoundScheme::Sharp => m_lb(a),
        }
    }
}

/// Norm bounds of the derivative blocks over one cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlockBounds {
    /// `‖∂f_y/∂y‖`
    pub yy: f64,
    /// `‖∂f_y/∂(λ,x)‖`
    pub y_lx: f64,
    /// `‖∂f_(λ,x)/∂y‖`
    pub lx_y: f64,
    /// `‖∂f_x/∂(λ,y)‖`
    pub x_ly: f64,
    /// `‖∂f_(λ,y)/∂x‖`
    pub ly_x: f64,
    /// `‖∂f_(λ,y)/∂(λ,y)‖`
    pub ly_ly: f64,
    /// `m(∂f_x/∂x)`
    pub m_xx: f64,
    /// `m(∂f_(λ,x)/∂(λ,x))`
    pub m_lx: f64,
}

/// Index sets of the coordinate groups.
struct Groups {
    x: Vec<usize>,
    y: Vec<usize>,
    lx: Vec<usize>,
    ly: Vec<usize>,
}

impl Groups {
    fn new(u: usize, s: usize) -> Groups {
        let x: Vec<usize> = (1..=u).collect();
        let y: Vec<usize> = (1 + u..1 + u + s).collect();
        let lx = core::iter::once(0).chain(x.iter().copied()).collect();
        let ly = core::iter::once(0).chain(y.iter().copied()).collect();
        Groups { x, y, lx, ly }
    }
}

pub fn block_bounds(df: &IntervalMatrix, u: usize, s: usize, scheme: BoundScheme) -> Result<BlockBounds, IntervalError> {
    let g = Groups::new(u, s);
    let norm = |r: &[usize], c: &[usize]| df.sub_block(r, c).map(|b| op_norm_ub(&b));
    Ok(BlockBounds {
        yy: norm(&g.y, &g.y)?,
        y_lx: norm(&g.y, &g.lx)?,
        lx_y: norm(&g.lx, &g.y)?,
        x_ly: norm(&g.x, &g.ly)?,
        ly_x: norm(&g.ly, &g.x)?,
        ly_ly: norm(&g.ly, &g.ly)?,
        m_xx: scheme.m(&df.sub_block(&g.x, &g.x)?),
        m_lx: scheme.m(&df.sub_block(&g.lx, &g.lx)?),
    })
}

/// Per-cell block bounds plus chart-restricted minimal expansions.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundTable {
    pub u: usize,
    pub s: usize,
    pub cells: Vec<BlockBounds>,
    /// `m[∂f_x/∂x(P(z))]` lower bound per `λ` slice
    pub chart_m_xx: Vec<f64>,
    /// `m[∂f_(λ,x)/∂(λ,x)(P(z))]` lower bound per `λ` slice
    pub chart_m_lx: Vec<f64>,
}

/// Does `[a, b]` meet `[p, q]` modulo 1?
fn meets_mod1(a: f64, b: f64, p: f64, q: f64) -> bool {
    (-2..=2).any(|k| {
        let k = k as f64;
        a + k <= q && p <= b + k
    })
}

/// Derivative enclosures over a subdivision of `D`, paired with their cells.
pub fn enclosures(model: &dyn MapModel, domain: &DomainBox, counts: (usize, usize, usize)) -> Result<Vec<(SubBox, IntervalMatrix)>, RateError> {
    if model.dims() != (domain.u(), domain.s()) {
        return Err(RateError::Dimension);
    }
    let cells = subdivide(domain, counts.0, counts.1, counts.2)?;
    cells
        .into_iter()
        .map(|c| {
            let df = model.deriv_enclosure(&c.bounds)?;
            Ok((c, df))
        })
        .collect()
}

/// Build the bound table from cell enclosures.
pub fn bound_table(encl: &[(SubBox, IntervalMatrix)], u: usize, s: usize, scheme: BoundScheme) -> Result<BoundTable, RateError> {
    let g = Groups::new(u, s);
    let cells = encl.iter().map(|(_, df)| block_bounds(df, u, s, scheme)).collect::<Result<Vec<_>, _>>()?;
    let slices = encl.iter().map(|(c, _)| c.lambda_index).max().map_or(0, |m| m + 1);
    let mut chart_m_xx = Vec::with_capacity(slices);
    let mut chart_m_lx = Vec::with_capacity(slices);
    for i in 0..slices {
        let chart = encl.iter().find(|(c, _)| c.lambda_index == i).map(|(c, _)| c.chart).expect("slice present");
        let mut hull: Option<IntervalMatrix> = None;
        for (c, df) in encl {
            if meets_mod1(c.bounds[0].lo(), c.bounds[0].hi(), chart.lo(), chart.hi()) {
                hull = Some(match hull {
                    None => df.clone(),
                    Some(h) => h.hull(df)?,
                });
            }
        }
        let h = hull.expect("a slice meets its own chart");
        chart_m_xx.push(scheme.m(&h.sub_block(&g.x, &g.x)?));
        chart_m_lx.push(scheme.m(&h.sub_block(&g.lx, &g.lx)?));
    }
    Ok(BoundTable { u, s, cells, chart_m_xx, chart_m_lx })
}

/// The ten rate constants for a fixed `L`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateConstants {
    pub mu_s1: f64,
    pub mu_s2: f64,
    pub xi_u1: f64,
    pub xi_u1p: f64,
    pub xi_u2: f64,
    pub mu_cs1: f64,
    pub mu_cs2: f64,
    pub xi_cu1: f64,
    pub xi_cu2: f64,
    pub xi_cu1p: f64,
    pub l: f64,
}

impl RateConstants {
    /// `(name, value)` pairs in a fixed order.
    pub fn named(&self) -> [(&'static str, f64); 10] {
        [
            ("mu_s1", self.mu_s1),
            ("mu_s2", self.mu_s2),
            ("xi_u1", self.xi_u1),
            ("xi_u1P", self.xi_u1p),
            ("xi_u2", self.xi_u2),
            ("mu_cs1", self.mu_cs1),
            ("mu_cs2", self.mu_cs2),
            ("xi_cu1", self.xi_cu1),
            ("xi_cu2", self.xi_cu2),
            ("xi_cu1P", self.xi_cu1p),
        ]
    }
}

fn sup(cells: &[BlockBounds], f: impl Fn(&BlockBounds) -> f64) -> f64 {
    cells.iter().map(f).fold(0.0, f64::max)
}

fn inf(cells: &[BlockBounds], f: impl Fn(&BlockBounds) -> f64) -> f64 {
    cells.iter().map(f).fold(f64::INFINITY, f64::min)
}

/// `a + k b` rounded up, `k = M` or `1/M`.
fn plus_up(a: f64, b: f64, k: Coef) -> f64 {
    add_up(a, k.times_up(b))
}

/// `a − k b` rounded down.
fn minus_down(a: f64, b: f64, k: Coef) -> f64 {
    sub_down(a, k.times_up(b))
}

#[derive(Clone, Copy)]
enum Coef {
    Mul(f64),
    Div(f64),
}

impl Coef {
    fn times_up(self, b: f64) -> f64 {
        match self {
            Coef::Mul(m) => mul_up(m, b),
            Coef::Div(m) => div_up(b, m),
        }
    }
}

pub fn constants_from_table(t: &BoundTable, l: f64) -> RateConstants {
    let c = &t.cells;
    let (by_l, times_l) = (Coef::Div(l), Coef::Mul(l));
    let sup_x_ly = sup(c, |b| b.x_ly);
    let sup_lx_y = sup(c, |b| b.lx_y);
    let xi_u1 = inf(c, |b| minus_down(b.m_xx, b.x_ly, by_l));
    let xi_cu1 = inf(c, |b| minus_down(b.m_lx, b.lx_y, times_l));
    let chart_xx = t.chart_m_xx.iter().copied().fold(f64::INFINITY, f64::min);
    let chart_lx = t.chart_m_lx.iter().copied().fold(f64::INFINITY, f64::min);
    RateConstants {
        mu_s1: sup(c, |b| plus_up(b.yy, b.y_lx, by_l)),
        mu_s2: sup(c, |b| plus_up(b.yy, b.lx_y, times_l)),
        xi_u1,
        xi_u1p: minus_down(chart_xx, sup_x_ly, by_l).min(xi_u1),
        xi_u2: inf(c, |b| minus_down(b.m_xx, b.ly_x, times_l)),
        mu_cs1: sup(c, |b| plus_up(b.ly_ly, b.ly_x, times_l)),
        mu_cs2: sup(c, |b| plus_up(b.ly_ly, b.x_ly, by_l)),
        xi_cu1,
        xi_cu2: inf(c, |b| minus_down(b.m_lx, b.y_lx, by_l)),
        xi_cu1p: minus_down(chart_lx, sup_lx_y, times_l).min(xi_cu1),
        l,
    }
}

/// Rate constants of `model` over `domain` with the given subdivision.
pub fn compute_constants(model: &dyn MapModel, domain: &DomainBox, counts: (usize, usize, usize), scheme: BoundScheme) -> Result<RateConstants, RateError> {
    let encl = enclosures(model, domain, counts)?;
    let table = bound_table(&encl, domain.u(), domain.s(), scheme)?;
    Ok(constants_from_table(&table, domain.l()))
}

/// Constants from a single enclosure of `Df(D)` (the chart bounds coincide
/// with the global ones).
pub fn constants_from_enclosure(df: &IntervalMatrix, u: usize, s: usize, l: f64, scheme: BoundScheme) -> Result<RateConstants, RateError> {
    let b = block_bounds(df, u, s, scheme)?;
    let table = BoundTable { u, s, cells: alloc::vec![b], chart_m_xx: alloc::vec![b.m_xx], chart_m_lx: alloc::vec![b.m_lx] };
    Ok(constants_from_table(&table, l))
}

// ---------------------------------------------------------------------------
// rate conditions

/// One inequality of the rate conditions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RateCondition {
    /// A `ξ` constant is not strictly positive.
    Positive(&'static str),
    /// `μ_s1 < 1`
    MuS1BelowOne,
    /// `1 < ξ_u1P`
    XiU1PAboveOne,
    /// `μ_cs1 < ξ_u1P`
    CenterStableVsUnstable,
    /// `μ_s1 < ξ_cu1P`
    StableVsCenterUnstable,
    /// `μ_cs1^(j+1) < ξ_u2`
    CenterStablePower(u32),
    /// `μ_s2 < ξ_cu1^(j+1)`
    CenterUnstablePower(u32),
    /// `μ_cs2 < ξ_u1`
    MuCs2VsXiU1,
    /// `μ_s1 < ξ_cu2`
    MuS1VsXiCu2,
}

impl fmt::Display for RateCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RateCondition::Positive(name) => write!(f, "{name} > 0"),
            RateCondition::MuS1BelowOne => f.write_str("mu_s1 < 1"),
            RateCondition::XiU1PAboveOne => f.write_str("1 < xi_u1P"),
            RateCondition::CenterStableVsUnstable => f.write_str("mu_cs1 < xi_u1P"),
            RateCondition::StableVsCenterUnstable => f.write_str("mu_s1 < xi_cu1P"),
            RateCondition::CenterStablePower(j) => write!(f, "mu_cs1^{} < xi_u2 (j={j})", j + 1),
            RateCondition::CenterUnstablePower(j) => write!(f, "mu_s2 < xi_cu1^{} (j={j})", j + 1),
            RateCondition::MuCs2VsXiU1 => f.write_str("mu_cs2 < xi_u1"),
            RateCondition::MuS1VsXiCu2 => f.write_str("mu_s1 < xi_cu2"),
        }
    }
}

/// First violated inequality of the order-`k` rate conditions, if any.
pub fn check_rate_conditions(rc: &RateConstants, k: u32) -> Result<(), RateCondition> {
    if !(rc.mu_s1 < 1.0) {
        return Err(RateCondition::MuS1BelowOne);
    }
    if !(1.0 < rc.xi_u1p) {
        return Err(RateCondition::XiU1PAboveOne);
    }
    if !(rc.mu_cs1 < rc.xi_u1p) {
        return Err(RateCondition::CenterStableVsUnstable);
    }
    if !(rc.mu_s1 < rc.xi_cu1p) {
        return Err(RateCondition::StableVsCenterUnstable);
    }
    if k == 0 {
        return Ok(());
    }
    for (name, v) in [("xi_u1", rc.xi_u1), ("xi_u1P", rc.xi_u1p), ("xi_u2", rc.xi_u2), ("xi_cu1", rc.xi_cu1), ("xi_cu1P", rc.xi_cu1p), ("xi_cu2", rc.xi_cu2)] {
        if !(v > 0.0) {
            return Err(RateCondition::Positive(name));
        }
    }
    if !(rc.mu_cs2 < rc.xi_u1) {
        return Err(RateCondition::MuCs2VsXiU1);
    }
    if !(rc.mu_s1 < rc.xi_cu2) {
        return Err(RateCondition::MuS1VsXiCu2);
    }
    let mut up = mul_up(rc.mu_cs1.max(0.0), rc.mu_cs1.max(0.0));
    let mut down = mul_down(rc.xi_cu1, rc.xi_cu1);
    for j in 1..=k {
        if j > 1 {
            up = mul_up(up, rc.mu_cs1.max(0.0));
            down = mul_down(down, rc.xi_cu1);
        }
        if !(up < rc.xi_u2) {
            return Err(RateCondition::CenterStablePower(j));
        }
        if !(rc.mu_s2 < down) {
            return Err(RateCondition::CenterUnstablePower(j));
        }
    }
    Ok(())
}

/// Order of the rate conditions satisfied by a set of constants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateReport {
    pub constants: RateConstants,
    /// `-1` if even order 0 fails
    pub order: i64,
    /// first inequality violated at `order + 1`; `None` if capped
    pub binding: Option<RateCondition>,
    pub k_cap: u32,
}

/// Closed-form guess of the largest `j` with `x^(j+1) < y` (`x > 1`) or
/// `y < x^(j+1)` (`x < 1`).
fn log_guess(base: f64, target: f64) -> u32 {
    let (lb, lt) = (libm::log(base), libm::log(target));
    if lb == 0.0 || !lt.is_finite() {
        return u32::MAX;
    }
    let q = lt / lb;
    if !(q.is_finite()) || q > 4.0e9 {
        return u32::MAX;
    }
    // largest j with j + 1 < q
    let j = libm::ceil(q) - 2.0;
    if j < 0.0 {
        0
    } else {
        j as u32
    }
}

/// Largest `k <= k_cap` for which the rate conditions hold.
pub fn max_order(rc: &RateConstants, k_cap: u32) -> RateReport {
    if let Err(c) = check_rate_conditions(rc, 0) {
        return RateReport { constants: *rc, order: -1, binding: Some(c), k_cap };
    }
    let mut k = k_cap;
    if rc.mu_cs1 > 1.0 {
        k = k.min(log_guess(rc.mu_cs1, rc.xi_u2));
    }
    if rc.xi_cu1 > 0.0 && rc.xi_cu1 < 1.0 {
        k = k.min(log_guess(rc.xi_cu1, rc.mu_s2));
    }
    // verify directly and correct the guess
    while k > 0 && check_rate_conditions(rc, k).is_err() {
        k -= 1;
    }
    while k < k_cap && check_rate_conditions(rc, k + 1).is_ok() {
        k += 1;
    }
    let binding = if k < k_cap { check_rate_conditions(rc, k + 1).err() } else { None };
    RateReport { constants: *rc, order: k as i64, binding, k_cap }
}

// ---------------------------------------------------------------------------
// refined Lipschitz constants

/// Which invariant object a Lipschitz bound is sought for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LipschitzTarget {
    /// stable fibers, `M ∈ (0, 1/L)`
    WsFiber,
    /// unstable fibers, `M ∈ (0, 1/L)`
    WuFiber,
    /// center-unstable manifold, `M ∈ (0, L)`
    Wcu,
    /// center-stable manifold, `M ∈ (0, L)`
    Wcs,
}

impl LipschitzTarget {
    /// Upper end of the admissible slope range.
    pub fn slope_limit(&self, l: f64) -> f64 {
        match self {
            LipschitzTarget::WsFiber | LipschitzTarget::WuFiber => 1.0 / l,
            LipschitzTarget::Wcu | LipschitzTarget::Wcs => l,
        }
    }
}

/// `(ξ(M), μ(M))` for a target.
pub fn lipschitz_rates(t: &BoundTable, target: LipschitzTarget, m: f64) -> (f64, f64) {
    let c = &t.cells;
    let chart_xx = t.chart_m_xx.iter().copied().fold(f64::INFINITY, f64::min);
    let chart_lx = t.chart_m_lx.iter().copied().fold(f64::INFINITY, f64::min);
    let (times, by) = (Coef::Mul(m), Coef::Div(m));
    match target {
        LipschitzTarget::WsFiber => (minus_down(chart_lx, sup(c, |b| b.lx_y), by), sup(c, |b| plus_up(b.yy, b.y_lx, times))),
        LipschitzTarget::WuFiber => (minus_down(chart_xx, sup(c, |b| b.x_ly), times), sup(c, |b| plus_up(b.ly_ly, b.ly_x, by))),
        LipschitzTarget::Wcu => (minus_down(chart_lx, sup(c, |b| b.lx_y), times), sup(c, |b| plus_up(b.yy, b.y_lx, by))),
        LipschitzTarget::Wcs => (minus_down(chart_xx, sup(c, |b| b.x_ly), by), sup(c, |b| plus_up(b.ly_ly, b.ly_x, times))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LipschitzBound {
    pub target: LipschitzTarget,
    pub m: f64,
    pub xi: f64,
    pub mu: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LipschitzError {
    /// A grid value lies outside the admissible range.
    OutOfRange(f64),
    /// No grid value gives `ξ(M) > μ(M)`.
    NotCertified,
}

impl fmt::Display for LipschitzError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LipschitzError::OutOfRange(m) => write!(f, "slope {m} outside the admissible range"),
            LipschitzError::NotCertified => f.write_str("no slope in the grid satisfies xi > mu"),
        }
    }
}

/// Smallest `M` in `grid` with a certified `ξ(M) > μ(M)`.
pub fn lipschitz_bound_search(t: &BoundTable, l: f64, target: LipschitzTarget, grid: &[f64]) -> Result<LipschitzBound, LipschitzError> {
    let limit = target.slope_limit(l);
    if let Some(&bad) = grid.iter().find(|&&m| !(m > 0.0 && m < limit)) {
        return Err(LipschitzError::OutOfRange(bad));
    }
    let mut sorted: Vec<f64> = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    for m in sorted {
        let (xi, mu) = lipschitz_rates(t, target, m);
        if xi > mu && xi > 0.0 {
            return Ok(LipschitzBound { target, m, xi, mu });
        }
    }
    Err(LipschitzError::NotCertified)
}

/// `n` evenly spaced slopes strictly inside the admissible range.
pub fn default_grid(target: LipschitzTarget, l: f64, n: usize) -> Vec<f64> {
    let limit = target.slope_limit(l);
    (1..=n).map(|i| limit * i as f64 / (n + 1) as f64).collect()
}
