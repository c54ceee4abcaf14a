//! Floating-point construction of the center-unstable and center-stable
//! manifolds, the invariant circle `Λ*` and the stable and unstable fibers,
//! for models with `u = s = 1`.
//!
//! Nothing here is rigorous; the diagnostics are meant to be compared with
//! the certified rate constants.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::geometry::{lambda_lift, normalize_lambda, torus_distance, DomainBox};
use crate::linalg;
use crate::maps::MapModel;

#[derive(Clone, Debug, PartialEq)]
pub enum ManifoldError {
    /// Only `u = s = 1` is supported.
    Dimension,
    /// Fewer than two nodes on an axis, or a bad depth.
    Grid(&'static str),
    /// Newton did not converge at a grid node.
    Newton { node: usize, at: [f64; 2] },
    /// An orbit left `D` while solving at a node.
    LeftDomain { node: usize, step: usize },
    /// The orbit of a fiber's base point left `D`.
    BaseLeftDomain { step: usize },
    /// A fixed-point iteration ran out of budget.
    NoConvergence { iterations: usize, residual: f64 },
}

impl fmt::Display for ManifoldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ManifoldError::Dimension => f.write_str("manifold construction needs u = s = 1"),
            ManifoldError::Grid(why) => write!(f, "invalid grid: {why}"),
            ManifoldError::Newton { node, at } => write!(f, "Newton failed at node {node} ({}, {})", at[0], at[1]),
            ManifoldError::LeftDomain { node, step } => write!(f, "orbit from node {node} left D after {step} steps"),
            ManifoldError::BaseLeftDomain { step } => write!(f, "orbit of the base point left D after {step} steps"),
            ManifoldError::NoConvergence { iterations, residual } => write!(f, "no convergence after {iterations} iterations (residual {residual:e})"),
        }
    }
}

/// Relative slack when testing orbit points against `D`.
const DOMAIN_SLACK: f64 = 1e-9;
const NEWTON_TOL: f64 = 1e-14;
const NEWTON_MAX: usize = 60;
/// Relative Newton step below which the iterate is at rounding level.
const NEWTON_STEP: f64 = 1e-14;
/// Iterations without improvement before the graph iteration gives up.
const STALL_LIMIT: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphKind {
    /// `y = w(λ, x)`
    CenterUnstable,
    /// `x = w(λ, y)`
    CenterStable,
}

/// Values of a graph over a periodic `λ` grid times a fiber grid on `[−R, R]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridGraph {
    pub kind: GraphKind,
    pub n_lambda: usize,
    pub n_fiber: usize,
    pub r: f64,
    /// row-major, `λ` outer
    pub values: Vec<f64>,
    pub iterations: usize,
    /// sup-distance between consecutive iterates
    pub distances: Vec<f64>,
    /// set when the iteration stalled above its tolerance
    pub warning: bool,
}

impl GridGraph {
    pub fn zero(kind: GraphKind, n_lambda: usize, n_fiber: usize, r: f64) -> Result<GridGraph, ManifoldError> {
        if n_lambda < 2 || n_fiber < 2 {
            return Err(ManifoldError::Grid("need at least two nodes per axis"));
        }
        Ok(GridGraph { kind, n_lambda, n_fiber, r, values: vec![0.0; n_lambda * n_fiber], iterations: 0, distances: Vec::new(), warning: false })
    }

    pub fn lambda_node(&self, i: usize) -> f64 {
        i as f64 / self.n_lambda as f64
    }

    pub fn fiber_node(&self, j: usize) -> f64 {
        -self.r + 2.0 * self.r * j as f64 / (self.n_fiber - 1) as f64
    }

    fn step(&self) -> f64 {
        2.0 * self.r / (self.n_fiber - 1) as f64
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_fiber + j]
    }

    /// Bilinear interpolation (periodic in `λ`, linear extrapolation in the
    /// fiber coordinate) and its gradient.
    pub fn eval_with_grad(&self, lambda: f64, s: f64) -> (f64, [f64; 2]) {
        let t = normalize_lambda(lambda) * self.n_lambda as f64;
        let i = (libm::floor(t) as usize).min(self.n_lambda - 1);
        let fl = t - i as f64;
        let i1 = (i + 1) % self.n_lambda;
        let h = self.step();
        let j = (libm::floor((s + self.r) / h).max(0.0) as usize).min(self.n_fiber - 2);
        let fs = (s - self.fiber_node(j)) / h;
        let (a, b, c, d) = (self.value(i, j), self.value(i1, j), self.value(i, j + 1), self.value(i1, j + 1));
        let lo = a + fl * (b - a);
        let hi = c + fl * (d - c);
        let v = lo + fs * (hi - lo);
        let dl = ((1.0 - fs) * (b - a) + fs * (d - c)) * self.n_lambda as f64;
        let ds = (hi - lo) / h;
        (v, [dl, ds])
    }

    pub fn eval(&self, lambda: f64, s: f64) -> f64 {
        self.eval_with_grad(lambda, s).0
    }

    /// Node points as `(λ, x, y)`.
    pub fn points(&self) -> Vec<[f64; 3]> {
        let mut out = Vec::with_capacity(self.values.len());
        for i in 0..self.n_lambda {
            for j in 0..self.n_fiber {
                let (l, s, v) = (self.lambda_node(i), self.fiber_node(j), self.value(i, j));
                out.push(match self.kind {
                    GraphKind::CenterUnstable => [l, s, v],
                    GraphKind::CenterStable => [l, v, s],
                });
            }
        }
        out
    }

    /// Largest difference quotient over adjacent node pairs.
    pub fn lipschitz_estimate(&self) -> f64 {
        let dl = 1.0 / self.n_lambda as f64;
        let mut best: f64 = 0.0;
        for i in 0..self.n_lambda {
            for j in 0..self.n_fiber {
                let v = self.value(i, j);
                best = best.max((self.value((i + 1) % self.n_lambda, j) - v).abs() / dl);
                if j + 1 < self.n_fiber {
                    best = best.max((self.value(i, j + 1) - v).abs() / self.step());
                }
            }
        }
        best
    }

    pub fn sup_distance(&self, other: &GridGraph) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// When to stop a graph-transform iteration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stop {
    pub max_iterations: usize,
    /// stop once the sup-distance between iterates is at most this
    pub tolerance: f64,
}

fn check_dims(model: &dyn MapModel, domain: &DomainBox) -> Result<(), ManifoldError> {
    if model.dims() != (1, 1) || domain.u() != 1 || domain.s() != 1 {
        return Err(ManifoldError::Dimension);
    }
    Ok(())
}

fn inside(domain: &DomainBox, p: &[f64]) -> bool {
    let lim = domain.r() * (1.0 + DOMAIN_SLACK);
    p[1].abs() <= lim && p[2].abs() <= lim
}

/// Damped Newton for `F(v) = 0` with `n` unknowns.
fn newton(n: usize, mut v: Vec<f64>, f: impl Fn(&[f64]) -> Option<(Vec<f64>, Vec<f64>)>) -> Option<Vec<f64>> {
    let norm = |r: &[f64]| r.iter().map(|a| a.abs()).fold(0.0, f64::max);
    let (mut r, mut j) = f(&v)?;
    for _ in 0..NEWTON_MAX {
        if norm(&r) <= NEWTON_TOL {
            return Some(v);
        }
        let dv = linalg::solve(&j, &r, n)?;
        if norm(&dv) <= NEWTON_STEP * (1.0 + norm(&v)) {
            return Some(v.iter().zip(&dv).map(|(a, d)| a - d).collect());
        }
        let mut t = 1.0;
        loop {
            let cand: Vec<f64> = v.iter().zip(&dv).map(|(a, d)| a - t * d).collect();
            if let Some((rc, jc)) = f(&cand) {
                if norm(&rc) < norm(&r) {
                    v = cand;
                    r = rc;
                    j = jc;
                    break;
                }
            }
            t *= 0.5;
            if t < 1e-3 {
                return None;
            }
        }
    }
    None
}

/// `f^n(p)` together with `Df^n(p)` applied to the listed tangent columns.
fn orbit_with_tangents(model: &dyn MapModel, p: &[f64], n: usize, cols: &[usize]) -> Option<(Vec<f64>, Vec<Vec<f64>>)> {
    let mut q = p.to_vec();
    let mut t: Vec<Vec<f64>> = cols
        .iter()
        .map(|&c| {
            let mut e = vec![0.0; 3];
            e[c] = 1.0;
            e
        })
        .collect();
    for _ in 0..n {
        let jac = model.jacobian(&q);
        for v in t.iter_mut() {
            *v = linalg::matmul(&jac, v, 3, 3, 1);
        }
        q = model.eval_lifted(&q);
        if !q.iter().all(|v| v.is_finite()) {
            return None;
        }
    }
    Some((q, t))
}

/// `Err(step)` if `f^step(p)` leaves `D` for some `step <= n`.
fn orbit_stays(model: &dyn MapModel, domain: &DomainBox, p: &[f64], n: usize) -> Result<Vec<f64>, usize> {
    let mut q = p.to_vec();
    for step in 0..n {
        q = model.eval_lifted(&q);
        if !inside(domain, &q) {
            return Err(step + 1);
        }
    }
    Ok(q)
}

/// One graph-transform step of the center-unstable graph.
fn wcu_step(model: &dyn MapModel, graph: &GridGraph, seeds: &mut [[f64; 2]]) -> Result<GridGraph, ManifoldError> {
    let mut next = graph.clone();
    for i in 0..graph.n_lambda {
        for j in 0..graph.n_fiber {
            let node = i * graph.n_fiber + j;
            let target = [graph.lambda_node(i), graph.fiber_node(j)];
            let g = |v: &[f64]| {
                let (y, grad) = graph.eval_with_grad(v[0], v[1]);
                let p = [v[0], v[1], y];
                let f = model.eval_lifted(&p);
                let jac = model.jacobian(&p);
                let res = vec![lambda_lift(target[0], f[0]), f[1] - target[1]];
                // d/dθ of π_θ f(θ, w(θ))
                let mut jm = vec![0.0; 4];
                for r in 0..2 {
                    for c in 0..2 {
                        jm[2 * r + c] = jac[3 * r + c] + jac[3 * r + 2] * grad[c];
                    }
                }
                Some((res, jm))
            };
            let sol = newton(2, seeds[node].to_vec(), g).ok_or(ManifoldError::Newton { node, at: target })?;
            seeds[node] = [sol[0], sol[1]];
            let y = graph.eval(sol[0], sol[1]);
            next.values[node] = model.eval_lifted(&[sol[0], sol[1], y])[2];
        }
    }
    Ok(next)
}

/// Iterate the center-horizontal graph transform from `w = 0`.
pub fn iterate_wcu(model: &dyn MapModel, domain: &DomainBox, n_lambda: usize, n_x: usize, stop: Stop) -> Result<GridGraph, ManifoldError> {
    check_dims(model, domain)?;
    let mut graph = GridGraph::zero(GraphKind::CenterUnstable, n_lambda, n_x, domain.r())?;
    // seed each node with a linear preimage guess
    let mut seeds: Vec<[f64; 2]> = Vec::with_capacity(n_lambda * n_x);
    for i in 0..n_lambda {
        for j in 0..n_x {
            let (l, x) = (graph.lambda_node(i), graph.fiber_node(j));
            let jac = model.jacobian(&[l, 0.0, 0.0]);
            seeds.push([l, if jac[4] != 0.0 { x / jac[4] } else { x }]);
        }
    }
    let mut distances = Vec::new();
    let mut best = (f64::INFINITY, graph.clone(), 0usize);
    let mut warning = false;
    for it in 1..=stop.max_iterations {
        let next = wcu_step(model, &graph, &mut seeds)?;
        let d = next.sup_distance(&graph);
        distances.push(d);
        graph = next;
        if d < best.0 {
            best = (d, graph.clone(), it);
        } else if it - best.2 >= STALL_LIMIT {
            warning = true;
            graph = best.1.clone();
            break;
        }
        if d <= stop.tolerance {
            break;
        }
    }
    graph.iterations = distances.len();
    graph.distances = distances;
    graph.warning = warning;
    Ok(graph)
}

/// `x` with `π_x f^depth(λ, x, y) = 0`, keeping the orbit in `D`.
///
/// Solved by continuation in the depth, each solve seeded by the previous one.
pub fn wcs_point(model: &dyn MapModel, domain: &DomainBox, lambda: f64, y: f64, depth: usize, seed: f64, node: usize) -> Result<f64, ManifoldError> {
    let mut x = seed;
    for d in 1..=depth {
        let g = |v: &[f64]| orbit_with_tangents(model, &[lambda, v[0], y], d, &[1]).map(|(q, t)| (vec![q[1]], vec![t[0][1]]));
        x = newton(1, vec![x], g).ok_or(ManifoldError::Newton { node, at: [lambda, y] })?[0];
    }
    orbit_stays(model, domain, &[lambda, x, y], depth).map_err(|step| ManifoldError::LeftDomain { node, step })?;
    Ok(x)
}

/// Center-stable graph at a fixed depth.
pub fn solve_wcs(model: &dyn MapModel, domain: &DomainBox, n_lambda: usize, n_y: usize, depth: usize) -> Result<GridGraph, ManifoldError> {
    check_dims(model, domain)?;
    if depth == 0 {
        return Err(ManifoldError::Grid("depth must be at least 1"));
    }
    let mut graph = GridGraph::zero(GraphKind::CenterStable, n_lambda, n_y, domain.r())?;
    for i in 0..n_lambda {
        let mut seed = 0.0;
        for j in 0..n_y {
            let node = i * n_y + j;
            let x = wcs_point(model, domain, graph.lambda_node(i), graph.fiber_node(j), depth, seed, node)?;
            graph.values[node] = x;
            seed = x;
        }
    }
    graph.iterations = depth;
    Ok(graph)
}

/// Iteration budget of [`find_lambda_star`].
const LAMBDA_STAR_MAX: usize = 200;
const LAMBDA_STAR_TOL: f64 = 1e-13;

/// `(x, y)` on both graphs at `λ`: the fixed point of `(x, y) ↦ (w_cs(λ, y), w_cu(λ, x))`.
pub fn find_lambda_star(wcu: &GridGraph, wcs: &GridGraph, lambda: f64) -> Result<[f64; 2], ManifoldError> {
    let (mut x, mut y) = (0.0, 0.0);
    let mut res = f64::INFINITY;
    for _ in 0..LAMBDA_STAR_MAX {
        let nx = wcs.eval(lambda, y);
        let ny = wcu.eval(lambda, nx);
        res = (nx - x).abs().max((ny - y).abs());
        x = nx;
        y = ny;
        if res <= LAMBDA_STAR_TOL {
            return Ok([x, y]);
        }
    }
    Err(ManifoldError::NoConvergence { iterations: LAMBDA_STAR_MAX, residual: res })
}

/// `‖π_{x,y} f(λ, χ(λ)) − χ(π_λ f(λ, χ(λ)))‖`.
pub fn invariance_residual(model: &dyn MapModel, wcu: &GridGraph, wcs: &GridGraph, lambda: f64) -> Result<f64, ManifoldError> {
    let c = find_lambda_star(wcu, wcs, lambda)?;
    let f = model.eval_point(&[lambda, c[0], c[1]]);
    let d = find_lambda_star(wcu, wcs, f[0])?;
    Ok(libm::hypot(f[1] - d[0], f[2] - d[1]))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FiberKind {
    /// graph over `x`, values `(λ, y)`
    Unstable,
    /// graph over `y`, values `(λ, x)`
    Stable,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FiberGraph {
    pub kind: FiberKind,
    /// the point the fiber belongs to
    pub base: [f64; 3],
    pub nodes: Vec<f64>,
    /// complementary coordinates per node, `λ` first
    pub values: Vec<[f64; 2]>,
    pub depth: usize,
}

impl FiberGraph {
    pub fn points(&self) -> Vec<[f64; 3]> {
        self.nodes
            .iter()
            .zip(&self.values)
            .map(|(&s, v)| match self.kind {
                FiberKind::Unstable => [normalize_lambda(v[0]), s, v[1]],
                FiberKind::Stable => [normalize_lambda(v[0]), v[1], s],
            })
            .collect()
    }

    /// Largest difference quotient between adjacent nodes.
    pub fn lipschitz_estimate(&self) -> f64 {
        self.nodes
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(s, v)| libm::hypot(torus_distance(v[0][0], v[1][0]), v[1][1] - v[0][1]) / (s[1] - s[0]))
            .fold(0.0, f64::max)
    }

    /// Sup over nodes of the distance between complementary coordinates.
    pub fn sup_distance(&self, other: &FiberGraph) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| libm::hypot(torus_distance(a[0], b[0]), a[1] - b[1])).fold(0.0, f64::max)
    }
}

fn fiber_nodes(domain: &DomainBox, n: usize) -> Result<Vec<f64>, ManifoldError> {
    if n < 2 {
        return Err(ManifoldError::Grid("need at least two fiber nodes"));
    }
    let r = domain.r();
    Ok((0..n).map(|j| -r + 2.0 * r * j as f64 / (n - 1) as f64).collect())
}

/// Extra depth used to pull a point onto the center-unstable manifold
/// before following its backward orbit.
pub const BACKWARD_EXTRA: usize = 8;

/// `z_{-n}`: a point whose `n`-th image has the `(λ, x)` coordinates of `z`
/// and lies on the center-unstable manifold up to `μ_s^K`.
///
/// Finds an orbit `w_0, ..., w_{n+K}` with `w_0` on the flat disc `y = 0` and
/// `π_{λ,x} w_{n+K} = π_{λ,x} z`, and returns `w_K`. The orbit is solved by
/// multiple shooting: a single shot through `f^{n+K}` has nearly parallel
/// `λ` and `x` rows once the expansion reaches about `10^9`.
pub fn backward_point(model: &dyn MapModel, domain: &DomainBox, z: [f64; 3], n: usize) -> Result<[f64; 3], ManifoldError> {
    let fail = || ManifoldError::Newton { node: 0, at: [z[0], z[1]] };
    let d = n + BACKWARD_EXTRA;
    // seed: chain of one-step flat preimages back from z
    let mut chain = vec![vec![z[0], z[1]]];
    for _ in 0..d {
        let prev = flat_preimage(model, chain.last().expect("nonempty")).ok_or_else(fail)?;
        chain.push(prev);
    }
    chain.reverse();
    let mut v = vec![chain[0][0], chain[0][1]];
    for c in &chain[1..d] {
        v.extend_from_slice(&[c[0], c[1], 0.0]);
    }
    let point = |v: &[f64], i: usize| -> [f64; 3] {
        if i == 0 {
            [v[0], v[1], 0.0]
        } else {
            let k = 3 * i - 1;
            [v[k], v[k + 1], v[k + 2]]
        }
    };
    let size = 3 * d - 1;
    let g = |v: &[f64]| {
        let mut r = vec![0.0; size];
        let mut jac = vec![0.0; size * size];
        for i in 0..d {
            let p = point(v, i);
            let f = model.eval_lifted(&p);
            let jf = model.jacobian(&p);
            if !f.iter().chain(&jf).all(|a| a.is_finite()) {
                return None;
            }
            let row = 3 * i;
            let rows = if i + 1 < d { 3 } else { 2 };
            let target = if i + 1 < d { point(v, i + 1) } else { z };
            r[row] = lambda_lift(target[0], f[0]);
            r[row + 1] = f[1] - target[1];
            if rows == 3 {
                r[row + 2] = f[2] - target[2];
            }
            let (col, cols) = if i == 0 { (0, 2) } else { (3 * i - 1, 3) };
            for a in 0..rows {
                for b in 0..cols {
                    jac[(row + a) * size + col + b] = jf[3 * a + b];
                }
                if i + 1 < d {
                    jac[(row + a) * size + 3 * i + 2 + a] = -1.0;
                }
            }
        }
        Some((r, jac))
    };
    let v = newton(size, v, g).ok_or_else(fail)?;
    for step in 1..=BACKWARD_EXTRA {
        if !inside(domain, &point(&v, step)) {
            return Err(ManifoldError::BaseLeftDomain { step });
        }
    }
    Ok(point(&v, BACKWARD_EXTRA))
}

/// `(λ, x)` with `π_{λ,x} f(λ, x, 0) = target`.
fn flat_preimage(model: &dyn MapModel, target: &[f64]) -> Option<Vec<f64>> {
    let jac = model.jacobian(&[target[0], target[1], 0.0]);
    let f = model.eval_lifted(&[target[0], target[1], 0.0]);
    let seed = vec![target[0] - lambda_lift(target[0], f[0]), if jac[4] != 0.0 { target[1] / jac[4] } else { target[1] }];
    newton(2, seed, |v: &[f64]| {
        let p = [v[0], v[1], 0.0];
        let (f, j) = (model.eval_lifted(&p), model.jacobian(&p));
        Some((vec![lambda_lift(target[0], f[0]), f[1] - target[1]], vec![j[0], j[1], j[3], j[4]]))
    })
}

/// Unstable fiber through (the center-unstable projection of) `z`:
/// the image under `f^n` of the horizontal disc through `z_{-n}`.
pub fn unstable_fiber(model: &dyn MapModel, domain: &DomainBox, z: [f64; 3], n: usize, n_x: usize) -> Result<FiberGraph, ManifoldError> {
    check_dims(model, domain)?;
    let nodes = fiber_nodes(domain, n_x)?;
    let zb = backward_point(model, domain, z, n)?;
    let mut values = Vec::with_capacity(n_x);
    let mut seed = zb[1];
    for (node, &xs) in nodes.iter().enumerate() {
        let g = |v: &[f64]| orbit_with_tangents(model, &[zb[0], v[0], zb[2]], n, &[1]).map(|(q, t)| (vec![q[1] - xs], vec![t[0][1]]));
        let sol = newton(1, vec![seed], g).ok_or(ManifoldError::Newton { node, at: [z[0], xs] })?;
        seed = sol[0];
        let q = orbit_stays(model, domain, &[zb[0], sol[0], zb[2]], n).map_err(|step| ManifoldError::LeftDomain { node, step })?;
        values.push([z[0] + lambda_lift(z[0], q[0]), q[2]]);
    }
    let base = model_image(model, zb, n);
    Ok(FiberGraph { kind: FiberKind::Unstable, base, nodes, values, depth: n })
}

fn model_image(model: &dyn MapModel, p: [f64; 3], n: usize) -> [f64; 3] {
    let mut q = p.to_vec();
    for _ in 0..n {
        q = model.eval_lifted(&q);
    }
    [normalize_lambda(q[0]), q[1], q[2]]
}

/// Stable fiber of `z`: points `(θ(y), y)` with `π_θ f^n(θ, y) = π_θ f^n(z)`.
pub fn stable_fiber(model: &dyn MapModel, domain: &DomainBox, z: [f64; 3], n: usize, n_y: usize) -> Result<FiberGraph, ManifoldError> {
    check_dims(model, domain)?;
    if n == 0 {
        return Err(ManifoldError::Grid("depth must be at least 1"));
    }
    let nodes = fiber_nodes(domain, n_y)?;
    let fz = orbit_stays(model, domain, &z, n).map_err(|step| ManifoldError::BaseLeftDomain { step })?;
    let mut values = Vec::with_capacity(n_y);
    let mut seed = vec![z[0], z[1]];
    for (node, &ys) in nodes.iter().enumerate() {
        let g = |v: &[f64]| {
            let (q, t) = orbit_with_tangents(model, &[v[0], v[1], ys], n, &[0, 1])?;
            Some((vec![lambda_lift(fz[0], q[0]), q[1] - fz[1]], vec![t[0][0], t[1][0], t[0][1], t[1][1]]))
        };
        let sol = newton(2, seed.clone(), g).ok_or(ManifoldError::Newton { node, at: [z[0], ys] })?;
        orbit_stays(model, domain, &[sol[0], sol[1], ys], n).map_err(|step| ManifoldError::LeftDomain { node, step })?;
        seed = sol.clone();
        values.push([z[0] + lambda_lift(z[0], sol[0]), sol[1]]);
    }
    Ok(FiberGraph { kind: FiberKind::Stable, base: [normalize_lambda(z[0]), z[1], z[2]], nodes, values, depth: n })
}

/// Residual `‖π_θ(f^n(d(y)) − f^n(z))‖` over the nodes of a stable fiber.
pub fn stable_fiber_residual(model: &dyn MapModel, fiber: &FiberGraph) -> f64 {
    let fz = model_image(model, fiber.base, fiber.depth);
    fiber
        .points()
        .iter()
        .map(|p| {
            let q = model_image(model, *p, fiber.depth);
            torus_distance(q[0], fz[0]).max((q[1] - fz[1]).abs())
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{LinearTestModel, RotatingHenonModel};

    fn lin_domain() -> DomainBox {
        DomainBox::new(0.1, 0.5, 0.99, 1, 1).unwrap()
    }

    #[test]
    fn linear_wcu_is_zero_after_one_step() {
        let g = iterate_wcu(&LinearTestModel::default(), &lin_domain(), 8, 5, Stop { max_iterations: 10, tolerance: 0.0 }).unwrap();
        assert_eq!(g.iterations, 1);
        assert_eq!(g.distances, vec![0.0]);
        assert!(g.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn linear_wcs_and_lambda_star_are_zero() {
        let m = LinearTestModel::default();
        let d = lin_domain();
        let cs = solve_wcs(&m, &d, 8, 5, 6).unwrap();
        assert!(cs.values.iter().all(|&v| v == 0.0));
        let cu = iterate_wcu(&m, &d, 8, 5, Stop { max_iterations: 5, tolerance: 0.0 }).unwrap();
        assert_eq!(find_lambda_star(&cu, &cs, 0.3).unwrap(), [0.0, 0.0]);
    }

    #[test]
    fn linear_fibers_are_flat() {
        let m = LinearTestModel::default();
        let d = lin_domain();
        let u = unstable_fiber(&m, &d, [0.25, 0.0, 0.0], 4, 5).unwrap();
        for p in u.points() {
            assert!((p[0] - 0.25).abs() < 1e-15 && p[2] == 0.0, "{p:?}");
        }
        let s = stable_fiber(&m, &d, [0.25, 0.0, 0.0], 4, 5).unwrap();
        for p in s.points() {
            assert!((p[0] - 0.25).abs() < 1e-15 && p[1] == 0.0, "{p:?}");
        }
    }

    #[test]
    fn interpolation_reproduces_bilinear_functions() {
        let mut g = GridGraph::zero(GraphKind::CenterUnstable, 4, 3, 1.0).unwrap();
        for i in 0..4 {
            for j in 0..3 {
                g.values[i * 3 + j] = 2.0 * g.fiber_node(j) + if i == 1 { 1.0 } else { 0.0 };
            }
        }
        assert_eq!(g.eval(0.25, 0.5), 2.0);
        assert!((g.eval(0.125, -0.5) - -0.5).abs() < 1e-15);
        // periodic wrap and extrapolation past the fiber edge
        assert!((g.eval(1.25, 1.5) - 4.0).abs() < 1e-15);
    }

    #[test]
    fn henon_eps_zero_fixed_point_is_on_both_graphs() {
        let m = RotatingHenonModel::standard(0.0, 0.0).unwrap();
        let d = DomainBox::new(0.01, 0.5, 0.99, 1, 1).unwrap();
        let cu = iterate_wcu(&m, &d, 4, 9, Stop { max_iterations: 30, tolerance: 1e-15 }).unwrap();
        let cs = solve_wcs(&m, &d, 4, 9, 8).unwrap();
        let c = find_lambda_star(&cu, &cs, 0.1).unwrap();
        assert!(c[0].abs() < 1e-12 && c[1].abs() < 1e-12, "{c:?}");
    }
}
