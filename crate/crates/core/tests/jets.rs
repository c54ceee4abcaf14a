use nhim_core::geometry::DomainBox;
use nhim_core::jets::{compose_vec, graph_transport, jet_iteration, tpoly_inverse, TruncPoly};
use nhim_core::manifold::backward_point;
use nhim_core::maps::{MapModel, RotatingHenonModel};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TIGHT: f64 = 1e-12;
/// relative agreement between graph jets and finite differences of the manifold
const FD_REL: f64 = 1e-4;
const FD_STEP: f64 = 1e-3;
/// length of the orbit along which jets are transported
const DEPTH: usize = 20;
/// backward depth for pointwise heights; one segment keeps the image on target
const HEIGHT_DEPTH: usize = 8;
const SLOPE_LIMIT: f64 = 0.01;

fn random_poly(rng: &mut ChaCha8Rng, n: usize, m: usize, scale: f64) -> TruncPoly {
    let mut p = TruncPoly::zero(n, m);
    let exps: Vec<Vec<u8>> = p.terms().map(|(e, _)| e.to_vec()).collect();
    for e in exps {
        p.set_coeff(&e, rng.gen_range(-scale..scale));
    }
    p
}

fn max_diff(a: &TruncPoly, b: &TruncPoly) -> f64 {
    a.sub(b).unwrap().terms().map(|(_, c)| c.abs()).fold(0.0, f64::max)
}

fn coeff_strategy(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, len)
}

fn from_coeffs(n: usize, m: usize, c: &[f64]) -> TruncPoly {
    let mut p = TruncPoly::zero(n, m);
    let exps: Vec<Vec<u8>> = p.terms().map(|(e, _)| e.to_vec()).collect();
    for (e, v) in exps.iter().zip(c) {
        p.set_coeff(e, *v);
    }
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ring_axioms(a in coeff_strategy(10), b in coeff_strategy(10), c in coeff_strategy(10)) {
        let (a, b, c) = (from_coeffs(2, 3, &a), from_coeffs(2, 3, &b), from_coeffs(2, 3, &c));
        let ab_c = a.mul(&b).unwrap().mul(&c).unwrap();
        let a_bc = a.mul(&b.mul(&c).unwrap()).unwrap();
        prop_assert!(max_diff(&ab_c, &a_bc) < 1e-11);
        prop_assert!(max_diff(&a.mul(&b).unwrap(), &b.mul(&a).unwrap()) < 1e-14);
        let lhs = a.mul(&b.add(&c).unwrap()).unwrap();
        let rhs = a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap();
        prop_assert!(max_diff(&lhs, &rhs) < 1e-13);
        let one = TruncPoly::constant(2, 3, 1.0);
        prop_assert_eq!(a.mul(&one).unwrap(), a.clone());
    }

    #[test]
    fn composition_with_scaling_scales_by_degree(c in coeff_strategy(10), s in 0.1f64..3.0) {
        let p = from_coeffs(2, 3, &c);
        let scaled = [TruncPoly::variable(2, 3, 0).scale(s), TruncPoly::variable(2, 3, 1).scale(s)];
        let q = p.compose(&scaled).unwrap();
        for (e, v) in q.terms() {
            let d = e.iter().map(|&k| k as i32).sum::<i32>();
            prop_assert!((v - p.coeff(e) * s.powi(d)).abs() <= 1e-13 * (1.0 + v.abs()));
        }
    }
}

#[test]
fn inverse_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let m = 4;
        // invertible linear part plus small nonlinear terms, no constant
        let mut p: Vec<TruncPoly> = (0..2).map(|_| random_poly(&mut rng, 2, m, 0.3)).collect();
        for (i, q) in p.iter_mut().enumerate() {
            q.set_coeff(&[0, 0], 0.0);
            let mut e = [0u8; 2];
            e[i] = 1;
            q.set_coeff(&e, q.coeff(&e) + 2.0);
        }
        let inv = tpoly_inverse(&p).unwrap();
        let id = TruncPoly::identity(2, m);
        for (a, b) in compose_vec(&p, &inv).unwrap().iter().zip(&id) {
            assert!(max_diff(a, b) < TIGHT);
        }
        for (a, b) in compose_vec(&inv, &p).unwrap().iter().zip(&id) {
            assert!(max_diff(a, b) < TIGHT);
        }
    }
}

#[test]
fn first_order_transport_is_the_matrix_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let a: Vec<f64> = (0..9).map(|i| rng.gen_range(-0.5..0.5) + if i % 4 == 0 { 2.0 } else { 0.0 }).collect();
        let f: Vec<TruncPoly> = (0..3).map(|i| TruncPoly::affine(1, 0.0, &a[3 * i..3 * i + 3])).collect();
        let slope = [rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3)];
        let graph = vec![TruncPoly::affine(1, 0.0, &slope)];
        let out = graph_transport(&f, &graph, &[0, 1], &[2]).unwrap();
        // R = (A_fb + A_ff P)(A_bb + A_bf P)^{-1}
        let at = |i: usize, j: usize| a[3 * i + j];
        let num = [at(2, 0) + at(2, 2) * slope[0], at(2, 1) + at(2, 2) * slope[1]];
        let m = [
            [at(0, 0) + at(0, 2) * slope[0], at(0, 1) + at(0, 2) * slope[1]],
            [at(1, 0) + at(1, 2) * slope[0], at(1, 1) + at(1, 2) * slope[1]],
        ];
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let want = [(num[0] * m[1][1] - num[1] * m[1][0]) / det, (-num[0] * m[0][1] + num[1] * m[0][0]) / det];
        let got = out[0].linear_part();
        for k in 0..2 {
            assert!((got[k] - want[k]).abs() <= TIGHT * (1.0 + want[k].abs()), "{got:?} vs {want:?}");
        }
    }
}

fn henon() -> (RotatingHenonModel, DomainBox) {
    (RotatingHenonModel::standard(0.009, 0.01).unwrap(), DomainBox::new(0.01, 0.5, 0.99, 1, 1).unwrap())
}

fn forward_orbit(m: &dyn MapModel, start: [f64; 3], n: usize) -> Vec<Vec<f64>> {
    let mut orbit = vec![start.to_vec()];
    for _ in 0..n {
        let next = m.eval_lifted(orbit.last().unwrap());
        orbit.push(next);
    }
    orbit
}

/// Height of the center-unstable manifold over `(λ, x)`.
fn wcu_height(m: &dyn MapModel, d: &DomainBox, lambda: f64, x: f64) -> f64 {
    let start = backward_point(m, d, [lambda, x, 0.0], HEIGHT_DEPTH).unwrap();
    forward_orbit(m, start, HEIGHT_DEPTH).last().unwrap()[2]
}

/// Graph jet at the end of a `DEPTH`-step orbit on the center-unstable manifold
/// ending near `z`; returns the end point, the degree 1 and 2 coefficients
/// and the per-step degree norms.
fn wcu_jet(m: &dyn MapModel, d: &DomainBox, z: [f64; 3], order: usize) -> ([f64; 2], Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let start = backward_point(m, d, z, DEPTH).unwrap();
    let orbit = forward_orbit(m, start, DEPTH);
    let it = jet_iteration(|p| m.jet(p, order), &orbit, vec![TruncPoly::zero(2, order)], &[0, 1], &[2]).unwrap();
    let last = it.jets.last().unwrap()[0].clone();
    let coeffs = vec![vec![last.coeff(&[1, 0]), last.coeff(&[0, 1])], vec![last.coeff(&[2, 0]), last.coeff(&[1, 1]), last.coeff(&[0, 2])]];
    let end = orbit.last().unwrap();
    ([end[0], end[1]], coeffs, it.degree_norms)
}

#[test]
fn wcu_jets_match_finite_differences() {
    let (m, d) = henon();
    for &(lambda, x) in &[(0.3, 0.002), (0.71, -0.004), (0.05, 0.0)] {
        let ([lambda, x], jet, _) = wcu_jet(&m, &d, [lambda, x, 0.0], 2);
        let w = |dl: f64, dx: f64| wcu_height(&m, &d, lambda + dl, x + dx);
        let h = FD_STEP;
        let w0 = w(0.0, 0.0);
        let fd1 = [(w(h, 0.0) - w(-h, 0.0)) / (2.0 * h), (w(0.0, h) - w(0.0, -h)) / (2.0 * h)];
        let fd2 = [
            (w(h, 0.0) - 2.0 * w0 + w(-h, 0.0)) / (2.0 * h * h),
            (w(h, h) - w(h, -h) - w(-h, h) + w(-h, -h)) / (4.0 * h * h),
            (w(0.0, h) - 2.0 * w0 + w(0.0, -h)) / (2.0 * h * h),
        ];
        for (got, want) in jet[0].iter().zip(&fd1).chain(jet[1].iter().zip(&fd2)) {
            assert!((got - want).abs() <= FD_REL * want.abs(), "at ({lambda}, {x}): jet {got} vs fd {want}");
        }
    }
}

fn log_slope(ys: &[f64]) -> f64 {
    let n = ys.len() as f64;
    let xm = (n - 1.0) / 2.0;
    let ym = ys.iter().sum::<f64>() / n;
    let num: f64 = ys.iter().enumerate().map(|(i, y)| (i as f64 - xm) * (y - ym)).sum();
    let den: f64 = (0..ys.len()).map(|i| (i as f64 - xm).powi(2)).sum();
    num / den
}

#[test]
fn jet_norms_stay_bounded_along_twenty_steps() {
    let (m, d) = henon();
    // The backward orbit settles at the fixed point of the circle near λ = 1/4,
    // so the manifold's own curvature is the same all along it; an orbit that
    // sweeps across λ would mix real changes in curvature into the slope.
    let (_, _, norms) = wcu_jet(&m, &d, [0.26, 0.003, 0.0], 4);
    assert_eq!(norms.len(), DEPTH + 1);
    for deg in 1..=4 {
        let tail: Vec<f64> = norms[DEPTH - 9..].iter().map(|n| n[deg].ln()).collect();
        assert!(tail.iter().all(|v| v.is_finite()), "degree {deg}: {norms:?}");
        assert!(log_slope(&tail) <= SLOPE_LIMIT, "degree {deg}: slope {}", log_slope(&tail));
    }
}
