use nhim_core::geometry::{torus_distance, DomainBox};
use nhim_core::manifold::{find_lambda_star, invariance_residual, iterate_wcu, solve_wcs, stable_fiber, stable_fiber_residual, unstable_fiber, wcs_point, GridGraph, Stop};
use nhim_core::maps::{MapModel, RotatingHenonModel};
use nhim_core::rates::{compute_constants, BoundScheme, RateConstants};

const L: f64 = 0.99;
const R: f64 = 0.01;
/// allowed excess of a convergence diagnostic over its certified bound
const RATE_SLACK: f64 = 1.05;
const LIP_SLACK: f64 = 0.02;
const INVARIANCE_TOL: f64 = 1e-7;

fn setup(lo: f64, hi: f64) -> (RotatingHenonModel, DomainBox, RateConstants) {
    let m = RotatingHenonModel::standard(lo, hi).unwrap();
    let d = DomainBox::new(R, 0.5, L, 1, 1).unwrap();
    let rc = compute_constants(&m, &d, (1, 1, 1), BoundScheme::Gershgorin).unwrap();
    (m, d, rc)
}

fn wcu(m: &RotatingHenonModel, d: &DomainBox, n_lambda: usize, n_x: usize) -> GridGraph {
    iterate_wcu(m, d, n_lambda, n_x, Stop { max_iterations: 40, tolerance: 1e-15 }).unwrap()
}

#[test]
fn wcu_contracts_at_the_certified_rate() {
    let (m, d, rc) = setup(0.009, 0.01);
    let g = wcu(&m, &d, 64, 17);
    assert!(!g.warning);
    for w in g.distances.windows(2) {
        // ratios are only meaningful above rounding noise
        if w[1] > 1e-13 {
            assert!(w[1] / w[0] <= rc.mu_s1 * RATE_SLACK, "{:?}", g.distances);
        }
    }
    assert!(g.lipschitz_estimate() <= L + LIP_SLACK, "{}", g.lipschitz_estimate());
    // image nodes lie on the graph up to interpolation error
    let h = 2.0 * R / 16.0;
    for p in g.points() {
        let f = m.eval_point(&p);
        if f[1].abs() <= R {
            assert!((g.eval(f[0], f[1]) - f[2]).abs() <= 10.0 * h * h);
        }
    }
}

#[test]
fn wcu_at_eps_zero_is_lambda_independent() {
    let (m, d, _) = setup(0.0, 0.0);
    let g = wcu(&m, &d, 8, 33);
    for j in 0..g.n_fiber {
        let v0 = g.value(0, j);
        for i in 1..g.n_lambda {
            assert!((g.value(i, j) - v0).abs() < 1e-15);
        }
    }
    for p in g.points() {
        let f = m.eval_point(&p);
        if f[1].abs() <= R {
            assert!((g.eval(f[0], f[1]) - f[2]).abs() <= 1e-8);
        }
    }
}

#[test]
fn wcs_depth_spacing_within_bound() {
    let (m, d, rc) = setup(0.009, 0.01);
    let w8 = solve_wcs(&m, &d, 16, 9, 8).unwrap();
    let w12 = solve_wcs(&m, &d, 16, 9, 12).unwrap();
    let bound = R / rc.xi_u1p.powi(8);
    let gap = w8.sup_distance(&w12);
    assert!(gap <= bound * RATE_SLACK, "{gap} vs {bound}");
    assert!(w12.lipschitz_estimate() <= L + LIP_SLACK);
    for p in w12.points() {
        let mut q = p.to_vec();
        for _ in 0..12 {
            q = m.eval_lifted(&q);
        }
        assert!(q[1].abs() <= 1e-10, "residual {}", q[1]);
    }
}

#[test]
fn invariant_circle_is_invariant() {
    let (m, d, _) = setup(0.009, 0.01);
    let cu = wcu(&m, &d, 2048, 9);
    let cs = solve_wcs(&m, &d, 2048, 9, 12).unwrap();
    let mut worst: f64 = 0.0;
    for k in 0..97 {
        let l = (k as f64 + 0.37) / 97.0;
        worst = worst.max(invariance_residual(&m, &cu, &cs, l).unwrap());
    }
    println!("invariance residual {worst:e}");
    assert!(worst <= INVARIANCE_TOL, "{worst}");
}

#[test]
fn circle_at_eps_zero_is_the_fixed_point() {
    let (m, d, _) = setup(0.0, 0.0);
    let cu = wcu(&m, &d, 16, 9);
    let cs = solve_wcs(&m, &d, 16, 9, 10).unwrap();
    for k in 0..50 {
        let c = find_lambda_star(&cu, &cs, k as f64 / 50.0).unwrap();
        assert!(c[0].abs() <= 1e-9 && c[1].abs() <= 1e-9, "{c:?}");
    }
}

fn point_on_wcu(m: &RotatingHenonModel, d: &DomainBox, l: f64, x: f64) -> [f64; 3] {
    let g = wcu(m, d, 64, 17);
    [l, x, g.eval(l, x)]
}

#[test]
fn unstable_fiber_depth_spacing_within_bound() {
    let (m, d, rc) = setup(0.009, 0.01);
    let z = point_on_wcu(&m, &d, 0.3, 0.002);
    let f8 = unstable_fiber(&m, &d, z, 8, 9).unwrap();
    let f12 = unstable_fiber(&m, &d, z, 12, 9).unwrap();
    let bound = 4.0 * R / L * (rc.mu_cs1 / rc.xi_u1p).powi(8);
    let gap = f8.sup_distance(&f12);
    println!("unstable fiber gap {gap:e} bound {bound:e}");
    assert!(gap <= bound * RATE_SLACK);
    assert!(f12.lipschitz_estimate() <= 1.0 / L + LIP_SLACK);
    // the fiber passes through z
    assert!(torus_distance(f12.base[0], z[0]) < 1e-9 && (f12.base[1] - z[1]).abs() < 1e-9, "{:?} vs {z:?}", f12.base);
}

#[test]
fn stable_fiber_depth_spacing_within_bound() {
    let (m, d, rc) = setup(0.009, 0.01);
    let (l, y) = (0.6, -0.003);
    let x = wcs_point(&m, &d, l, y, 20, 0.0, 0).unwrap();
    let z = [l, x, y];
    let f8 = stable_fiber(&m, &d, z, 8, 9).unwrap();
    let f12 = stable_fiber(&m, &d, z, 12, 9).unwrap();
    let bound = 4.0 * R / L * (rc.mu_s1 / rc.xi_cu1p).powi(8);
    let gap = f8.sup_distance(&f12);
    println!("stable fiber gap {gap:e} bound {bound:e}");
    assert!(gap <= bound * RATE_SLACK);
    assert!(stable_fiber_residual(&m, &f12) <= 1e-9);
    assert!(f12.lipschitz_estimate() <= 1.0 / L + LIP_SLACK);
}

#[test]
fn unstable_fiber_meets_wcs_once() {
    let (m, d, _) = setup(0.009, 0.01);
    let z = point_on_wcu(&m, &d, 0.8, -0.004);
    let fib = unstable_fiber(&m, &d, z, 10, 41).unwrap();
    let cs = solve_wcs(&m, &d, 256, 9, 12).unwrap();
    let gaps: Vec<f64> = fib.points().iter().map(|p| p[1] - cs.eval(p[0], p[2])).collect();
    let crossings = gaps.windows(2).filter(|w| w[0].signum() != w[1].signum()).count();
    assert_eq!(crossings, 1, "{gaps:?}");
}
