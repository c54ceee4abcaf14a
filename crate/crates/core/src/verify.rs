//! Covering and backward cone checks, and the certificate combining them
//! with the rate conditions.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::geometry::{subdivide, DomainBox, SubBox};
use crate::interval::{inverse_enclosure, m_lb, Interval, IntervalError, IntervalMatrix};
use crate::maps::MapModel;
use crate::rates::{bound_table, constants_from_table, enclosures, max_order, BoundScheme, RateReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    True,
    False,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::True => "true",
            Verdict::False => "false",
            Verdict::Inconclusive => "inconclusive",
        }
    }

    pub fn holds(&self) -> bool {
        *self == Verdict::True
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub verdict: Verdict,
    /// empty on success
    pub detail: String,
}

impl CheckReport {
    fn new(verdict: Verdict, detail: String) -> CheckReport {
        CheckReport { verdict, detail }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BackwardConeReport {
    pub verdict: Verdict,
    /// `sup |π_λ (Df(D))^{-1} U|`, when it could be computed
    pub lambda_bound: Option<f64>,
    pub lift_degree: Option<i64>,
    pub detail: String,
}

fn mid_point(b: &[Interval]) -> Vec<f64> {
    b.iter().map(|i| i.mid()).collect()
}

/// `Inconclusive` unless the float image of the box midpoint already violates `bad`.
fn classify(model: &dyn MapModel, b: &[Interval], bad: impl Fn(&[f64]) -> bool) -> Verdict {
    if bad(&model.eval_lifted(&mid_point(b))) {
        Verdict::False
    } else {
        Verdict::Inconclusive
    }
}

/// Naive image enclosure intersected with the mean-value form
/// `f(c) + Df(b) (b − c)`.
pub fn image_enclosure(model: &dyn MapModel, b: &[Interval]) -> Result<Vec<Interval>, IntervalError> {
    let naive = model.eval_enclosure(b)?;
    let c: Vec<Interval> = b.iter().map(|i| Interval::point(i.mid())).collect();
    let fc = model.eval_enclosure(&c)?;
    let df = model.deriv_enclosure(b)?;
    let h: Vec<Interval> = b.iter().zip(&c).map(|(i, m)| *i - *m).collect();
    let lin = df.mul_vec(&h)?;
    Ok(naive
        .into_iter()
        .zip(fc.iter().zip(&lin))
        .map(|(n, (f, l))| (*f + *l).intersect(&n).unwrap_or(n))
        .collect())
}

fn face(cell: &SubBox, index: usize, value: f64) -> Vec<Interval> {
    let mut b = cell.bounds.clone();
    b[index] = Interval::point(value);
    b
}

/// Sufficient covering check for `u = 1`: the `y`-image stays strictly inside
/// the ball, the exit faces `x = ∓R` map strictly beyond `∓R`, and `∂f_x/∂x`
/// is non-singular on every cell.
pub fn check_covering(model: &dyn MapModel, domain: &DomainBox, counts: (usize, usize, usize)) -> CheckReport {
    if domain.u() != 1 {
        return CheckReport::new(Verdict::Inconclusive, "covering check needs u = 1".to_string());
    }
    if model.dims() != (domain.u(), domain.s()) {
        return CheckReport::new(Verdict::Inconclusive, "model dimensions do not match the domain".to_string());
    }
    let cells = match subdivide(domain, counts.0, counts.1, counts.2) {
        Ok(c) => c,
        Err(e) => return CheckReport::new(Verdict::Inconclusive, e.to_string()),
    };
    let r = domain.r();
    let ys = domain.y_indices();
    let mut worst = Verdict::True;
    let mut detail = String::new();
    let mut fail = |v: Verdict, msg: String| {
        if worst != Verdict::False {
            if v == Verdict::False || worst == Verdict::True {
                detail = msg;
            }
            worst = v;
        }
    };
    for (k, cell) in cells.iter().enumerate() {
        let img = match image_enclosure(model, &cell.bounds) {
            Ok(i) => i,
            Err(e) => {
                fail(Verdict::Inconclusive, format!("cell {k}: {e}"));
                continue;
            }
        };
        // y-image: outward-rounded bounds strictly inside (-R, R)
        let y_mag = libm::sqrt(ys.iter().map(|&i| img[i].sqr().hi()).sum());
        if !(y_mag < r) {
            let v = classify(model, &cell.bounds, |f| libm::sqrt(ys.iter().map(|&i| f[i] * f[i]).sum()) >= r);
            fail(v, format!("cell {k}: |pi_y f| <= {y_mag:e} not below R"));
        }
        for (side, x0) in [("left", -r), ("right", r)] {
            if (cell.bounds[1].lo() > -r && x0 < 0.0) || (cell.bounds[1].hi() < r && x0 > 0.0) {
                continue;
            }
            let fb = face(cell, 1, x0);
            let exits = |x: Interval| if x0 < 0.0 { x.hi() < x0 } else { x.lo() > x0 };
            match image_enclosure(model, &fb) {
                Ok(fi) if exits(fi[1]) => {}
                Ok(fi) => {
                    let v = classify(model, &fb, |f| if x0 < 0.0 { f[1] >= x0 } else { f[1] <= x0 });
                    fail(v, format!("cell {k}: {side} exit face maps to x in {}", fi[1]));
                }
                Err(e) => fail(Verdict::Inconclusive, format!("cell {k}: {e}")),
            }
        }
        match model.deriv_enclosure(&cell.bounds).and_then(|df| df.sub_block(&[1], &[1])) {
            Ok(block) if m_lb(&block) > 0.0 => {}
            Ok(_) => fail(Verdict::Inconclusive, format!("cell {k}: df_x/dx not certified non-singular")),
            Err(e) => fail(Verdict::Inconclusive, format!("cell {k}: {e}")),
        }
    }
    CheckReport::new(worst, detail)
}

/// Lift degree of `λ ↦ π_λ f(λ, x, y)`, if the enclosure pins it down.
pub fn lift_degree(model: &dyn MapModel, domain: &DomainBox) -> Option<i64> {
    let mut b = domain.hull();
    b[0] = Interval::ZERO;
    let at0 = model.eval_enclosure(&b).ok()?[0];
    b[0] = Interval::ONE;
    let at1 = model.eval_enclosure(&b).ok()?[0];
    let diff = at1 - at0;
    let d = libm::round(diff.mid());
    (diff.lo() > d - 0.5 && diff.hi() < d + 0.5).then_some(d as i64)
}

/// Backward cone check: degree-one base map with `∂λ'/∂λ > 0`, and
/// `sup |π_λ (Df(D))^{-1} U| < R_Λ` where `U` bounds differences of points
/// that are stable-cone related.
pub fn check_backward_cones(model: &dyn MapModel, domain: &DomainBox, counts: (usize, usize, usize)) -> BackwardConeReport {
    let report = |verdict, lambda_bound, lift_degree, detail: String| BackwardConeReport { verdict, lambda_bound, lift_degree, detail };
    let encl = match enclosures(model, domain, counts) {
        Ok(e) => e,
        Err(e) => return report(Verdict::Inconclusive, None, None, e.to_string()),
    };
    if let Some((k, _)) = encl.iter().enumerate().find(|(_, (_, df))| !(df.get(0, 0).lo() > 0.0)) {
        return report(Verdict::Inconclusive, None, None, format!("cannot certify: d(pi_lambda f)/d lambda not positive on cell {k}"));
    }
    let degree = match lift_degree(model, domain) {
        Some(1) => 1,
        Some(d) => return report(Verdict::False, None, Some(d), format!("cannot certify: lift degree {d} != 1")),
        None => return report(Verdict::Inconclusive, None, None, "cannot certify: lift degree not determined".to_string()),
    };
    let hull = encl.iter().skip(1).try_fold(encl[0].1.clone(), |h, (_, df)| h.hull(df));
    let inv = match hull.and_then(|h| inverse_enclosure(&h)) {
        Ok(i) => i,
        Err(_) => return report(Verdict::Inconclusive, None, Some(degree), "cannot certify (non-invertible enclosure)".to_string()),
    };
    let bound = lambda_bound(&inv, domain);
    if bound < domain.r_lambda() {
        report(Verdict::True, Some(bound), Some(degree), String::new())
    } else {
        report(Verdict::Inconclusive, Some(bound), Some(degree), format!("lambda bound {bound} not below R_Lambda = {}", domain.r_lambda()))
    }
}

/// `sup |π_λ A U|` with `U = [−2R/L, 2R/L] × B̄(2R) × B̄(2R)` (componentwise).
fn lambda_bound(inv: &IntervalMatrix, domain: &DomainBox) -> f64 {
    let two_r = Interval::point(domain.r()).scale(2.0);
    let lam = two_r.checked_div(Interval::point(domain.l())).expect("L > 0");
    let u: Vec<Interval> = (0..inv.cols()).map(|j| if j == 0 { Interval::symmetric(lam.hi()) } else { Interval::symmetric(two_r.hi()) }).collect();
    let row = (0..inv.cols()).fold(Interval::ZERO, |acc, j| acc + inv.get(0, j) * u[j]);
    row.mag()
}

/// What to run in [`certify`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CertifyOptions {
    /// requested smoothness order
    pub k: u32,
    pub k_cap: u32,
    pub rate_subdivision: (usize, usize, usize),
    pub check_subdivision: (usize, usize, usize),
    pub scheme: BoundScheme,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions { k: 1, k_cap: 1000, rate_subdivision: (1, 1, 1), check_subdivision: (64, 1, 1), scheme: BoundScheme::Gershgorin }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub model: String,
    pub params: Vec<(String, f64)>,
    pub l: f64,
    pub r: f64,
    pub r_lambda: f64,
    pub options: CertifyOptions,
    pub covering: CheckReport,
    pub backward_cone: BackwardConeReport,
    pub rates: Option<RateReport>,
    pub errors: Vec<String>,
    pub certified: bool,
}

/// Run the rate, covering and backward cone checks; nothing short-circuits.
pub fn certify(model: &dyn MapModel, domain: &DomainBox, opts: &CertifyOptions) -> Certificate {
    let mut errors = Vec::new();
    let rates = enclosures(model, domain, opts.rate_subdivision)
        .and_then(|e| bound_table(&e, domain.u(), domain.s(), opts.scheme))
        .map(|t| max_order(&constants_from_table(&t, domain.l()), opts.k_cap));
    let rates = match rates {
        Ok(r) => Some(r),
        Err(e) => {
            errors.push(format!("rates: {e}"));
            None
        }
    };
    let covering = check_covering(model, domain, opts.check_subdivision);
    let backward_cone = check_backward_cones(model, domain, opts.check_subdivision);
    let order_ok = rates.as_ref().is_some_and(|r| r.order >= opts.k as i64);
    let certified = errors.is_empty() && order_ok && covering.verdict.holds() && backward_cone.verdict.holds();
    Certificate {
        model: model.name().to_string(),
        params: model.params().into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        l: domain.l(),
        r: domain.r(),
        r_lambda: domain.r_lambda(),
        options: *opts,
        covering,
        backward_cone,
        rates,
        errors,
        certified,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{LinearTestModel, MobiusModel};

    fn linear_domain() -> DomainBox {
        DomainBox::new(0.1, 0.5, 0.99, 1, 1).unwrap()
    }

    #[test]
    fn linear_map_covers() {
        let r = check_covering(&LinearTestModel::default(), &linear_domain(), (4, 1, 1));
        assert_eq!(r.verdict, Verdict::True, "{}", r.detail);
    }

    #[test]
    fn contracting_x_fails_covering() {
        let m = LinearTestModel { c: 0.0, ax: 0.5, ay: 0.5 };
        let r = check_covering(&m, &linear_domain(), (4, 1, 1));
        assert_eq!(r.verdict, Verdict::False);
        assert!(r.detail.contains("exit face"), "{}", r.detail);
    }

    #[test]
    fn linear_backward_bound_is_two_r_over_l() {
        let d = linear_domain();
        let r = check_backward_cones(&LinearTestModel::default(), &d, (1, 1, 1));
        assert_eq!(r.verdict, Verdict::True);
        let b = r.lambda_bound.unwrap();
        let want = 2.0 * d.r() / d.l();
        assert!(b >= want && b <= want * (1.0 + 1e-14), "{b} vs {want}");
    }

    #[test]
    fn mobius_is_refused_by_degree() {
        let d = DomainBox::new(0.1, 0.5, 0.99, 1, 1).unwrap();
        let r = check_backward_cones(&MobiusModel::default(), &d, (8, 1, 1));
        assert_eq!(r.lift_degree, Some(2));
        assert_ne!(r.verdict, Verdict::True);
        assert!(r.detail.contains("lift degree 2"));
    }

    #[test]
    fn linear_certificate_hits_the_cap() {
        let opts = CertifyOptions { k: 5, k_cap: 50, ..CertifyOptions::default() };
        let c = certify(&LinearTestModel::default(), &linear_domain(), &opts);
        assert!(c.certified, "{c:?}");
        assert_eq!(c.rates.unwrap().order, 50);
    }
}
