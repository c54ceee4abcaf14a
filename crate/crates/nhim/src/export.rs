//! The `manifold` command: build one object, write its nodes as CSV and a
//! diagnostics JSON comparing convergence with the certified constants.

use std::fmt::Write as _;
use std::str::FromStr;

use nhim_core::manifold::{
    find_lambda_star, invariance_residual, iterate_wcu, solve_wcs, stable_fiber, stable_fiber_residual, unstable_fiber, wcs_point, ManifoldError, Stop,
    BACKWARD_EXTRA,
};
use nhim_core::maps::MapModel;
use nhim_core::rates::{compute_constants, RateConstants};
use serde_json::{json, Map, Value};

use crate::config::RunConfig;

/// How much shallower the comparison solve is for depth-spacing diagnostics.
pub const SPACING_STEP: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    Wcu,
    Wcs,
    LambdaStar,
    FiberU,
    FiberS,
}

impl Target {
    pub fn as_str(&self) -> &'static str {
        match self {
            Target::Wcu => "wcu",
            Target::Wcs => "wcs",
            Target::LambdaStar => "lambda_star",
            Target::FiberU => "fiber_u",
            Target::FiberS => "fiber_s",
        }
    }

    pub fn needs_base_point(&self) -> bool {
        matches!(self, Target::FiberU | Target::FiberS)
    }
}

impl FromStr for Target {
    type Err = String;

    fn from_str(s: &str) -> Result<Target, String> {
        match s {
            "wcu" => Ok(Target::Wcu),
            "wcs" => Ok(Target::Wcs),
            "lambda_star" => Ok(Target::LambdaStar),
            "fiber_u" => Ok(Target::FiberU),
            "fiber_s" => Ok(Target::FiberS),
            other => Err(format!("unknown target {other:?}; expected wcu, wcs, lambda_star, fiber_u or fiber_s")),
        }
    }
}

/// `λ,x,y` as three comma separated numbers.
pub fn parse_point(s: &str) -> Result<[f64; 3], String> {
    let v: Vec<f64> = s.split(',').map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}"))).collect::<Result<_, _>>()?;
    <[f64; 3]>::try_from(v).map_err(|v| format!("expected λ,x,y, got {} numbers", v.len()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ManifoldOutput {
    pub csv: String,
    pub diagnostics: Value,
}

pub fn csv(model: &str, target: Target, l: f64, r: f64, points: &[[f64; 3]]) -> String {
    let mut out = format!("# model={model} target={} L={l} R={r}\nlambda,x,y\n", target.as_str());
    for p in points {
        let _ = writeln!(out, "{:.16e},{:.16e},{:.16e}", p[0], p[1], p[2]);
    }
    out
}

fn constants_json(rc: &Option<RateConstants>) -> Value {
    match rc {
        Some(rc) => Value::Object(rc.named().iter().map(|(k, v)| (k.to_string(), json!(v))).collect::<Map<_, _>>()),
        None => Value::Null,
    }
}

fn node_error(e: ManifoldError) -> String {
    e.to_string()
}

/// Run one target. `z` is the base point of fiber targets: an unstable fiber
/// goes through the center-unstable point over `(λ, x)`, a stable fiber
/// through the center-stable point over `(λ, y)`. `n` overrides the depth of
/// the center-stable and fiber solves.
pub fn run_manifold(cfg: &RunConfig, target: Target, z: Option<[f64; 3]>, n: Option<usize>) -> Result<ManifoldOutput, String> {
    let model = cfg.build_model().map_err(|e| e.to_string())?;
    let domain = cfg.domain_box(model.as_ref()).map_err(|e| e.to_string())?;
    let m = model.as_ref();
    let mc = &cfg.manifold;
    let sub = cfg.certify.rate_subdivision;
    let rc = compute_constants(m, &domain, (sub[0], sub[1], sub[2]), cfg.certify.scheme.into()).ok();
    let (r, l) = (domain.r(), domain.l());
    let stop = Stop { max_iterations: mc.max_iterations, tolerance: mc.tolerance };
    let coarse = |depth: usize| depth.saturating_sub(SPACING_STEP).max(1);
    let (points, mut diag) = match target {
        Target::Wcu => {
            let g = iterate_wcu(m, &domain, mc.n_lambda, mc.n_x, stop).map_err(node_error)?;
            let ratios: Vec<f64> = g.distances.windows(2).map(|w| w[1] / w[0]).collect();
            let d = json!({
                "grid": [g.n_lambda, g.n_fiber],
                "iterations": g.iterations,
                "distances": g.distances,
                "contraction_ratios": ratios,
                "contraction_bound_mu_s1": rc.map(|c| c.mu_s1),
                "lipschitz_estimate": g.lipschitz_estimate(),
                "lipschitz_bound_L": l,
                "stalled": g.warning,
            });
            (g.points(), d)
        }
        Target::Wcs => {
            let depth = n.unwrap_or(mc.wcs_depth);
            let g = solve_wcs(m, &domain, mc.n_lambda, mc.n_y, depth).map_err(node_error)?;
            let g0 = solve_wcs(m, &domain, mc.n_lambda, mc.n_y, coarse(depth)).map_err(node_error)?;
            let residual = g.points().iter().map(|p| forward_x(m, p, depth).abs()).fold(0.0, f64::max);
            let d = json!({
                "grid": [g.n_lambda, g.n_fiber],
                "depth": depth,
                "comparison_depth": coarse(depth),
                "depth_spacing": g.sup_distance(&g0),
                "depth_spacing_bound": rc.map(|c| r / c.xi_u1p.powi(coarse(depth) as i32)),
                "max_abs_x_after_depth": residual,
                "lipschitz_estimate": g.lipschitz_estimate(),
                "lipschitz_bound_L": l,
            });
            (g.points(), d)
        }
        Target::LambdaStar => {
            let cu = iterate_wcu(m, &domain, mc.n_lambda, mc.n_x, stop).map_err(node_error)?;
            let cs = solve_wcs(m, &domain, mc.n_lambda, mc.n_y, mc.wcs_depth).map_err(node_error)?;
            let nodes = mc.lambda_star_nodes;
            let mut pts = Vec::with_capacity(nodes);
            let mut worst: f64 = 0.0;
            for k in 0..nodes {
                let lam = k as f64 / nodes as f64;
                let [x, y] = find_lambda_star(&cu, &cs, lam).map_err(|e| format!("node {k}: {e}"))?;
                worst = worst.max(invariance_residual(m, &cu, &cs, lam).map_err(|e| format!("node {k}: {e}"))?);
                pts.push([lam, x, y]);
            }
            let d = json!({
                "grid": [mc.n_lambda, mc.n_x, mc.n_y],
                "nodes": nodes,
                "wcu_iterations": cu.iterations,
                "wcs_depth": mc.wcs_depth,
                "invariance_residual": worst,
            });
            (pts, d)
        }
        Target::FiberU | Target::FiberS => {
            let mut z = z.ok_or("fiber targets need --z λ,x,y")?;
            let depth = n.unwrap_or(mc.fiber_depth);
            if target == Target::FiberS {
                // stable fibers exist over the center-stable manifold only;
                // the unstable solve projects onto its manifold by itself
                z[1] = wcs_point(m, &domain, z[0], z[2], depth + BACKWARD_EXTRA, z[1], 0).map_err(|e| format!("projecting the base point: {e}"))?;
            }
            let build = |depth| match target {
                Target::FiberU => unstable_fiber(m, &domain, z, depth, mc.fiber_nodes),
                _ => stable_fiber(m, &domain, z, depth, mc.fiber_nodes),
            };
            let f = build(depth).map_err(node_error)?;
            let f0 = build(coarse(depth)).map_err(node_error)?;
            let ratio = rc.map(|c| if target == Target::FiberU { c.mu_cs1 / c.xi_u1p } else { c.mu_s1 / c.xi_cu1p });
            let mut d = json!({
                "base": f.base,
                "depth": depth,
                "comparison_depth": coarse(depth),
                "depth_spacing": f.sup_distance(&f0),
                "depth_spacing_bound": ratio.map(|q| 4.0 * r / l * q.powi(coarse(depth) as i32)),
                "lipschitz_estimate": f.lipschitz_estimate(),
                "lipschitz_bound_1_over_L": 1.0 / l,
            });
            if target == Target::FiberS {
                d["residual"] = json!(stable_fiber_residual(m, &f));
            }
            (f.points(), d)
        }
    };
    diag["model"] = json!(m.name());
    diag["target"] = json!(target.as_str());
    diag["L"] = json!(l);
    diag["R"] = json!(r);
    diag["constants"] = constants_json(&rc);
    Ok(ManifoldOutput { csv: csv(m.name(), target, l, r, &points), diagnostics: diag })
}

fn forward_x(m: &dyn MapModel, p: &[f64; 3], n: usize) -> f64 {
    let mut q = p.to_vec();
    for _ in 0..n {
        q = m.eval_lifted(&q);
    }
    q[1]
}
