//! The domain `D = Λ × B_u(R) × B_s(R)` with `Λ = R/Z`, charts, cones and
//! subdivision.
//!
//! Points are slices laid out as `[λ, x_1..x_u, y_1..y_s]`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::interval::{add_up, div_down, div_up, Interval};
use crate::jets::TruncPoly;

/// Chart radius of the circle `R/Z`.
pub const R_LAMBDA: f64 = 0.5;

#[derive(Clone, Debug, PartialEq)]
pub enum GeometryError {
    /// Two points are farther apart on the torus than one chart allows.
    ChartMismatch { distance: f64, limit: f64 },
    /// A `DomainBox` violated its invariants.
    InvalidDomain(&'static str),
    /// A point or box has the wrong number of coordinates.
    Dimension { expected: usize, found: usize },
    /// A point lies outside the radius of a polynomial cone.
    OutsideRadius { distance: f64, radius: f64 },
}

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeometryError::ChartMismatch { distance, limit } => {
                write!(f, "points not in a common chart: torus distance {distance} exceeds {limit}")
            }
            GeometryError::InvalidDomain(why) => write!(f, "invalid domain: {why}"),
            GeometryError::Dimension { expected, found } => write!(f, "expected {expected} coordinates, found {found}"),
            GeometryError::OutsideRadius { distance, radius } => {
                write!(f, "point at distance {distance} outside cone radius {radius}")
            }
        }
    }
}

/// Representative of `λ` in `[0, 1)`.
pub fn normalize_lambda(lambda: f64) -> f64 {
    let r = lambda - libm::floor(lambda);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Signed displacement `d ∈ (-1/2, 1/2]` with `to ≡ from + d (mod 1)`.
///
/// A tie at exactly one half resolves to the positive lift.
pub fn lambda_lift(from: f64, to: f64) -> f64 {
    let d = normalize_lambda(to - from);
    if d > 0.5 {
        d - 1.0
    } else {
        d
    }
}

pub fn torus_distance(a: f64, b: f64) -> f64 {
    lambda_lift(a, b).abs()
}

/// A point of the base circle, kept in `[0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TorusPoint {
    lambda: f64,
}

impl TorusPoint {
    pub fn new(lambda: f64) -> TorusPoint {
        TorusPoint { lambda: normalize_lambda(lambda) }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn shift(&self, d: f64) -> TorusPoint {
        TorusPoint::new(self.lambda + d)
    }

    pub fn distance(&self, other: &TorusPoint) -> f64 {
        torus_distance(self.lambda, other.lambda)
    }
}

/// The set `D` and its constants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DomainBox {
    r: f64,
    r_lambda: f64,
    l: f64,
    u: usize,
    s: usize,
}

impl DomainBox {
    /// Requires `L ∈ (2R/R_Λ, 1)`. `R = 0` is accepted so that degenerate
    /// parameter intervals such as `ε = [0, 0]` can be swept.
    pub fn new(r: f64, r_lambda: f64, l: f64, u: usize, s: usize) -> Result<DomainBox, GeometryError> {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(GeometryError::InvalidDomain("R must be finite and non-negative"));
        }
        if !(r_lambda > 0.0 && r_lambda <= R_LAMBDA) {
            return Err(GeometryError::InvalidDomain("R_Lambda must lie in (0, 1/2]"));
        }
        if u == 0 || s == 0 {
            return Err(GeometryError::InvalidDomain("u and s must be at least 1"));
        }
        // 2R/R_Λ rounded up so that a passing check is conclusive
        let lower = div_up(add_up(r, r), r_lambda);
        if !(l > lower && l < 1.0) {
            return Err(GeometryError::InvalidDomain("L must lie in (2R/R_Lambda, 1)"));
        }
        Ok(DomainBox { r, r_lambda, l, u, s })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn r_lambda(&self) -> f64 {
        self.r_lambda
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn u(&self) -> usize {
        self.u
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn dim(&self) -> usize {
        1 + self.u + self.s
    }

    pub fn x_indices(&self) -> Vec<usize> {
        (1..=self.u).collect()
    }

    pub fn y_indices(&self) -> Vec<usize> {
        (1 + self.u..self.dim()).collect()
    }

    /// Interval hull of `D` with `λ ∈ [0, 1]` and square fiber boxes.
    pub fn hull(&self) -> Vec<Interval> {
        let mut b = vec![Interval::new(0.0, 1.0).expect("ordered")];
        b.extend(core::iter::repeat_n(Interval::symmetric(self.r), self.u + self.s));
        b
    }

    /// Does `p` lie in `D` (Euclidean fiber balls), allowing `slack`?
    pub fn contains(&self, p: &[f64], slack: f64) -> bool {
        if p.len() != self.dim() {
            return false;
        }
        let nx = norm(&p[1..=self.u]);
        let ny = norm(&p[1 + self.u..]);
        nx <= self.r + slack && ny <= self.r + slack
    }

    fn check_dim(&self, p: &[f64]) -> Result<(), GeometryError> {
        if p.len() != self.dim() {
            return Err(GeometryError::Dimension { expected: self.dim(), found: p.len() });
        }
        Ok(())
    }

    /// Displacement `p - center` with the `λ` part lifted near `center`.
    pub fn displacement(&self, center: &[f64], p: &[f64]) -> Result<Vec<f64>, GeometryError> {
        self.check_dim(center)?;
        self.check_dim(p)?;
        let dl = lambda_lift(center[0], p[0]);
        if dl.abs() > self.r_lambda {
            return Err(GeometryError::ChartMismatch { distance: dl.abs(), limit: self.r_lambda });
        }
        let mut d = vec![dl];
        d.extend(p[1..].iter().zip(&center[1..]).map(|(a, b)| a - b));
        Ok(d)
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|a| a * a).sum())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ConeKind {
    /// `‖(λ, x)‖ ≤ M ‖y‖`
    Stable,
    /// `‖(λ, y)‖ ≤ M ‖x‖`
    Unstable,
    /// `‖x‖ < M ‖(λ, y)‖`, or the vertex itself
    CenterStable,
    /// `‖y‖ < M ‖(λ, x)‖`, or the vertex itself
    CenterUnstable,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConeSpec {
    pub kind: ConeKind,
    pub slope: f64,
}

impl ConeSpec {
    pub fn new(kind: ConeKind, slope: f64) -> ConeSpec {
        ConeSpec { kind, slope }
    }
}

/// Membership of `p` in the cone with vertex `center`.
pub fn in_cone(center: &[f64], spec: ConeSpec, p: &[f64], domain: &DomainBox) -> Result<bool, GeometryError> {
    let d = domain.displacement(center, p)?;
    let u = domain.u();
    let lam = d[0];
    let x = &d[1..=u];
    let y = &d[1 + u..];
    let nx = norm(x);
    let ny = norm(y);
    let with = |a: f64, b: f64| libm::sqrt(a * a + b * b);
    let m = spec.slope;
    Ok(match spec.kind {
        ConeKind::Stable => with(lam, nx) <= m * ny,
        ConeKind::Unstable => with(lam, ny) <= m * nx,
        ConeKind::CenterStable => d.iter().all(|&v| v == 0.0) || nx < m * with(lam, ny),
        ConeKind::CenterUnstable => d.iter().all(|&v| v == 0.0) || ny < m * with(lam, nx),
    })
}

/// Cone of order `m` around a polynomial graph through `center`.
///
/// With `p - center = (h, v)` split into `base` and `fiber` coordinates, `p`
/// belongs to the cone iff `‖v - P(h)‖ ≤ M ‖h‖^{m+1}`. The first coordinate is
/// treated as periodic when `periodic` is set.
#[derive(Clone, Debug)]
pub struct PolyCone {
    pub center: Vec<f64>,
    pub base: Vec<usize>,
    pub fiber: Vec<usize>,
    /// one jet per fiber coordinate, in the base variables, vanishing at 0
    pub poly: Vec<TruncPoly>,
    pub order: usize,
    pub bound: f64,
    pub delta: Option<f64>,
    pub periodic: bool,
}

impl PolyCone {
    /// Unstable cone of order `m` in `R^u × R^{1+s}`-style splits.
    pub fn new(center: Vec<f64>, base: Vec<usize>, fiber: Vec<usize>, poly: Vec<TruncPoly>, order: usize, bound: f64) -> PolyCone {
        PolyCone { center, base, fiber, poly, order, bound, delta: None, periodic: false }
    }

    pub fn with_radius(mut self, delta: f64) -> PolyCone {
        self.delta = Some(delta);
        self
    }

    pub fn periodic(mut self) -> PolyCone {
        self.periodic = true;
        self
    }
}

pub fn in_poly_cone(cone: &PolyCone, p: &[f64]) -> Result<bool, GeometryError> {
    let n = cone.center.len();
    if p.len() != n {
        return Err(GeometryError::Dimension { expected: n, found: p.len() });
    }
    if cone.poly.len() != cone.fiber.len() || cone.poly.iter().any(|q| q.nvars() != cone.base.len()) {
        return Err(GeometryError::Dimension { expected: cone.fiber.len(), found: cone.poly.len() });
    }
    let d: Vec<f64> = (0..n)
        .map(|i| if i == 0 && cone.periodic { lambda_lift(cone.center[0], p[0]) } else { p[i] - cone.center[i] })
        .collect();
    if let Some(delta) = cone.delta {
        let dist = norm(&d);
        if dist > delta {
            return Err(GeometryError::OutsideRadius { distance: dist, radius: delta });
        }
    }
    let h: Vec<f64> = cone.base.iter().map(|&i| d[i]).collect();
    let residual: Vec<f64> = cone.fiber.iter().zip(&cone.poly).map(|(&i, q)| d[i] - q.eval(&h)).collect();
    Ok(norm(&residual) <= cone.bound * libm::pow(norm(&h), (cone.order + 1) as f64))
}

/// One cell of a subdivision of `D`.
#[derive(Clone, Debug, PartialEq)]
pub struct SubBox {
    /// `[λ, x.., y..]` with `λ` inside `[0, 1]`
    pub bounds: Vec<Interval>,
    /// `λ`-range of the union of charts `P(z)` over `z` in this cell
    pub chart: Interval,
    /// position of the `λ` slice
    pub lambda_index: usize,
}

/// Split `D` into `n_lambda` slices along `λ` and `n_x`, `n_y` pieces along
/// every unstable and stable coordinate.
pub fn subdivide(domain: &DomainBox, n_lambda: usize, n_x: usize, n_y: usize) -> Result<Vec<SubBox>, GeometryError> {
    if n_lambda == 0 || n_x == 0 || n_y == 0 {
        return Err(GeometryError::InvalidDomain("subdivision counts must be at least 1"));
    }
    let slice = |i: usize, n: usize, lo: f64, hi: f64| -> Interval {
        if n == 1 {
            return Interval::new(lo, hi).expect("ordered");
        }
        let w = hi - lo;
        let a = if i == 0 { lo } else { lo + div_down(i as f64 * w, n as f64) };
        let b = if i + 1 == n { hi } else { lo + div_up((i + 1) as f64 * w, n as f64) };
        let (a, b) = if i == 0 { (a, b.next_up()) } else { (a.next_down(), b.next_up().min(hi)) };
        Interval::new(a.max(lo), b.min(hi)).expect("ordered")
    };
    let r = domain.r();
    let half_chart = domain.r_lambda() / 2.0;
    let fiber_dims: Vec<usize> = core::iter::repeat_n(n_x, domain.u()).chain(core::iter::repeat_n(n_y, domain.s())).collect();
    let fiber_cells: usize = fiber_dims.iter().product();
    let mut out = Vec::with_capacity(n_lambda * fiber_cells);
    for i in 0..n_lambda {
        let lam = slice(i, n_lambda, 0.0, 1.0);
        let chart = Interval::new(lam.lo() - half_chart, lam.hi() + half_chart).expect("ordered");
        for cell in 0..fiber_cells {
            let mut bounds = vec![lam];
            let mut c = cell;
            for &k in &fiber_dims {
                bounds.push(slice(c % k, k, -r, r));
                c /= k;
            }
            out.push(SubBox { bounds, chart, lambda_index: i });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn henon_domain() -> DomainBox {
        DomainBox::new(0.01, 0.5, 0.99, 1, 1).unwrap()
    }

    #[test]
    fn lift_and_distance() {
        assert_eq!(normalize_lambda(-0.25), 0.75);
        assert_eq!(normalize_lambda(3.0), 0.0);
        assert!((lambda_lift(0.9, 0.1) - 0.2).abs() < 1e-15);
        assert!((lambda_lift(0.1, 0.9) + 0.2).abs() < 1e-15);
        assert_eq!(lambda_lift(0.0, 0.5), 0.5);
        assert_eq!(lambda_lift(0.5, 0.0), 0.5);
        assert_eq!(TorusPoint::new(1.25).lambda(), 0.25);
        assert!((TorusPoint::new(0.95).distance(&TorusPoint::new(0.05)) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn domain_validation() {
        assert!(DomainBox::new(0.01, 0.5, 0.99, 1, 1).is_ok());
        assert!(DomainBox::new(0.3, 0.5, 0.99, 1, 1).is_err());
        assert!(DomainBox::new(0.01, 0.5, 1.0, 1, 1).is_err());
        assert!(DomainBox::new(-0.01, 0.5, 0.9, 1, 1).is_err());
        assert!(DomainBox::new(0.0, 0.5, 0.5, 1, 1).is_ok());
    }

    #[test]
    fn unstable_cone_examples() {
        let d = DomainBox::new(0.1, 0.5, 0.99, 1, 1).unwrap();
        let spec = ConeSpec::new(ConeKind::Unstable, 1.0 / 0.99);
        assert!(in_cone(&[0.0, 0.0, 0.0], spec, &[0.0, 1.0, 0.0], &d).unwrap());
        assert!(!in_cone(&[0.0, 0.0, 0.0], spec, &[0.5, 0.1, 0.0], &d).unwrap());
    }

    #[test]
    fn chart_error() {
        let d = DomainBox::new(0.01, 0.25, 0.99, 1, 1).unwrap();
        let spec = ConeSpec::new(ConeKind::Stable, 1.0);
        let err = in_cone(&[0.0, 0.0, 0.0], spec, &[0.4, 0.0, 0.0], &d).unwrap_err();
        assert!(matches!(err, GeometryError::ChartMismatch { .. }));
        assert!(matches!(in_cone(&[0.0, 0.0], spec, &[0.0, 0.0, 0.0], &d), Err(GeometryError::Dimension { .. })));
    }

    #[test]
    fn center_cones_include_vertex_and_complement_unstable() {
        let d = henon_domain();
        let z = [0.3, 0.0, 0.0];
        assert!(in_cone(&z, ConeSpec::new(ConeKind::CenterStable, 0.99), &z, &d).unwrap());
        assert!(in_cone(&z, ConeSpec::new(ConeKind::CenterUnstable, 0.99), &z, &d).unwrap());
        let p = [0.3, 0.005, 0.001];
        assert!(in_cone(&z, ConeSpec::new(ConeKind::Unstable, 1.0 / 0.99), &p, &d).unwrap());
        assert!(!in_cone(&z, ConeSpec::new(ConeKind::CenterStable, 0.99), &p, &d).unwrap());
    }

    #[test]
    fn poly_cone_examples() {
        // order 0 with P = 0 is the plain unstable cone on the (x | λ, y) split
        let zero = |n| TruncPoly::zero(n, 0);
        let c = PolyCone::new(vec![0.0, 0.0, 0.0], vec![1], vec![0, 2], vec![zero(1), zero(1)], 0, 1.0 / 0.99).periodic();
        let d = DomainBox::new(0.1, 0.5, 0.99, 1, 1).unwrap();
        let spec = ConeSpec::new(ConeKind::Unstable, 1.0 / 0.99);
        for p in [[0.0, 1.0, 0.0], [0.5, 0.1, 0.0], [0.01, 0.02, 0.01], [0.99, 0.001, 0.0]] {
            assert_eq!(in_poly_cone(&c, &p).unwrap(), in_cone(&[0.0; 3], spec, &p, &d).unwrap());
        }
        // P(x) = x^2 with order 1
        let sq = TruncPoly::variable(1, 2, 0).powi(2);
        let c = PolyCone::new(vec![0.0, 0.0], vec![0], vec![1], vec![sq], 1, 1.0);
        assert!(in_poly_cone(&c, &[0.1, 0.01]).unwrap());
        assert!(!in_poly_cone(&c, &[0.1, 0.03]).unwrap());
        let c = c.with_radius(0.05);
        assert!(matches!(in_poly_cone(&c, &[0.1, 0.01]), Err(GeometryError::OutsideRadius { .. })));
    }

    #[test]
    fn subdivision_shapes() {
        let d = henon_domain();
        let one = subdivide(&d, 1, 1, 1).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].bounds, d.hull());
        let four = subdivide(&d, 4, 1, 1).unwrap();
        assert_eq!(four.len(), 4);
        for (i, b) in four.iter().enumerate() {
            assert!(b.bounds[0].contains(i as f64 * 0.25) && b.bounds[0].contains((i + 1) as f64 * 0.25));
            assert!(b.bounds[0].width() < 0.25 + 1e-12);
            assert_eq!(b.bounds[1], Interval::symmetric(0.01));
            assert_eq!(b.lambda_index, i);
        }
        let fine = subdivide(&d, 2, 3, 2).unwrap();
        assert_eq!(fine.len(), 12);
        assert!(subdivide(&d, 0, 1, 1).is_err());
    }
}
