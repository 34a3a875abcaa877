//! Invariant checks that need no forward solve, and the cached Poincaré constant.

use std::fs;
use std::path::Path;

use obstacle_lab::fem::{check_admissibility, poincare_constant, Admissibility};
use obstacle_lab::geometry::{build_mesh, Geometry, OuterBoundary};
use obstacle_lab::reconstruction::ObservationMode;
use obstacle_lab::stability::{default_sigma_grid, one_dim_counterexample};
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, Kind, Violation};

/// Mesh size of the eigen-solve behind every admissibility check.
pub const MU1_MESH_SIZE: f64 = 0.05;

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub violations: Vec<Violation>,
    pub notes: Vec<String>,
    pub mu1: Option<f64>,
}

impl Report {
    pub fn render(&self) -> String {
        let mut s = String::new();
        for n in &self.notes {
            s.push_str(&format!("note {n}\n"));
        }
        if self.violations.is_empty() {
            s.push_str("valid: no violations\n");
        }
        for v in &self.violations {
            s.push_str(&format!("violation {v}\n"));
        }
        s
    }
}

/// Stable text key of the outer domain.
pub fn geometry_key(outer: &OuterBoundary) -> String {
    let desc = match outer {
        OuterBoundary::Disk { center, radius } => format!("disk {:?} {:?} {:?}", center[0], center[1], radius),
        OuterBoundary::Polygon { vertices } => {
            let v: Vec<String> = vertices.iter().map(|p| format!("{:?} {:?}", p[0], p[1])).collect();
            format!("polygon {}", v.join(" "))
        }
    };
    let digest = Sha256::digest(format!("{desc} h={MU1_MESH_SIZE:?}").as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// `mu1` of the outer domain, read from or written to `cache_dir` when given.
pub fn mu1(geometry: &Geometry, cache_dir: Option<&Path>) -> obstacle_lab::Result<(f64, bool)> {
    let file = cache_dir.map(|d| d.join(format!("mu1-{}.txt", geometry_key(&geometry.outer))));
    if let Some(f) = &file {
        if let Some(v) = fs::read_to_string(f).ok().and_then(|t| t.trim().parse::<f64>().ok()) {
            return Ok((v, true));
        }
    }
    let bare = Geometry {
        outer: geometry.outer.clone(),
        gamma: geometry.gamma,
        safety: geometry.safety,
    };
    let mesh = build_mesh(&bare, None, MU1_MESH_SIZE)?;
    let v = poincare_constant(&mesh)?;
    if let Some(f) = &file {
        if let Some(d) = f.parent() {
            let _ = fs::create_dir_all(d);
        }
        let _ = fs::write(f, format!("{v:?}\n"));
    }
    Ok((v, false))
}

fn check_sigma(out: &mut Vec<Violation>, path: &str, sigma: &[f64], lipschitz: f64) {
    for (i, s) in sigma.iter().enumerate() {
        if !s.is_finite() || s.abs() * lipschitz >= 1.0 {
            out.push(Violation::new(
                format!("{path}[{i}]"),
                format!("|sigma| * lipschitz bound must stay below 1 (sigma {s}, bound {lipschitz:.4})"),
            ));
        }
    }
}

/// Schema-level and invariant checks. No forward solves; `mu1` may be computed once.
pub fn validate(cfg: &ExperimentConfig, cache_dir: Option<&Path>, with_mu1: bool) -> Report {
    let mut r = Report {
        violations: cfg.missing_blocks(),
        ..Report::default()
    };
    let v = &mut r.violations;
    for (path, x) in cfg.data_values() {
        if !x.is_finite() {
            v.push(Violation::new(path, "value must be finite"));
        }
    }
    if !(cfg.numeric.h > 0.0 && cfg.numeric.h.is_finite()) {
        v.push(Violation::new("numeric.h", "mesh size must be positive"));
    }
    if !(cfg.numeric.noise >= 0.0 && cfg.numeric.noise.is_finite()) {
        v.push(Violation::new("numeric.noise", "noise level must be nonnegative"));
    }

    let geometry = cfg.build_geometry();
    if let Some(g) = &geometry {
        if let Err(e) = g.validate() {
            v.push(Violation::new("geometry", e.to_string()));
        }
        if let Some(shape) = cfg.obstacle() {
            if let Err(e) = shape.validate(&g.safety) {
                v.push(Violation::new("geometry.obstacle", e.to_string()));
            }
        }
        if let Some(t) = &cfg.target {
            if let Err(e) = t.build().validate(&g.safety) {
                v.push(Violation::new("target", e.to_string()));
            }
        }
        if let ObservationMode::Internal { omega, resolution } = cfg.observation_mode(g) {
            if let Err(e) = omega.validate(g) {
                v.push(Violation::new("observation", e.to_string()));
            }
            if resolution < 2 {
                v.push(Violation::new("observation.resolution", "need at least a 2 x 2 lattice"));
            }
        }
        if matches!(cfg.kind, Kind::Reconstruct) {
            if let Err(e) = cfg.reconstruction_config(g).validate() {
                v.push(Violation::new("numeric", e.to_string()));
            }
        }
        match cfg.build_deformation(g) {
            Some(Ok(mu)) => {
                if let Err(e) = mu.check_support() {
                    v.push(Violation::new("deformation", e.to_string()));
                }
                let fallback: &[f64] = match cfg.kind {
                    Kind::Stability => &default_sigma_grid(),
                    Kind::AdjointCheck => &[0.04, 0.02, 0.01, 0.005],
                    _ => &[0.1],
                };
                let grid = cfg.sigma_grid(fallback);
                check_sigma(v, "numeric.sigma", &grid, mu.lipschitz_bound());
                if matches!(cfg.kind, Kind::Stability) && !grid.contains(&0.0) {
                    r.notes.push("sigma grid has no zero sample; it is added implicitly".into());
                }
            }
            Some(Err(e)) => v.push(Violation::new("deformation", e.to_string())),
            None => {}
        }
        if let (Some(c), true) = (cfg.coefficients, with_mu1 && g.validate().is_ok()) {
            match mu1(g, cache_dir) {
                Ok((m, cached)) => {
                    r.mu1 = Some(m);
                    r.notes.push(format!(
                        "mu1 = {m:.6} ({}), 1/mu1 = {:.6}",
                        if cached { "cached" } else { "computed" },
                        1.0 / m
                    ));
                    match check_admissibility(&c.build(), m) {
                        Admissibility::Admissible { lambda, lambda_star } => {
                            r.notes.push(format!("admissible: lambda* = {lambda_star:.6}, certified lambda = {lambda:.6}"))
                        }
                        Admissibility::Inadmissible { lambda_star, limit } => r.violations.push(Violation::new(
                            "coefficients",
                            format!("inadmissible: lambda* = {lambda_star:.6} is not below 1/mu1 = {limit:.6}"),
                        )),
                    }
                }
                Err(e) => r.violations.push(Violation::new("geometry.outer", format!("eigen-solve failed: {e}"))),
            }
        }
    }

    let v = &mut r.violations;
    if let Some(c) = &cfg.carleman {
        match c.weight() {
            Ok(w) if !w.is_convex_regime() => v.push(Violation::new(
                "carleman.delta_factor",
                format!("positivity needs delta > 4/R^2, got factor {}", c.delta_factor),
            )),
            Ok(_) => {}
            Err(e) => v.push(Violation::new("carleman", e.to_string())),
        }
        if let Err(e) = c.compact() {
            v.push(Violation::new("carleman.eps", e.to_string()));
        }
        if let Err(e) = c.bump() {
            v.push(Violation::new("carleman.bump_half_width", e.to_string()));
        }
        for (i, h) in c.h.iter().enumerate() {
            if !(*h > 0.0 && *h < 1.0) {
                v.push(Violation::new(format!("carleman.h[{i}]"), "h must lie in (0, 1)"));
            }
        }
    }
    if let Some(c) = &cfg.counterexample {
        // parameter checks only, on a coarse grid
        if let Err(e) = one_dim_counterexample(c.eta, c.zeta, c.b, c.big_a, c.k, c.l, 5) {
            v.push(Violation::new("counterexample", e.to_string()));
        }
        if c.points < 5 {
            v.push(Violation::new("counterexample.points", "need at least 5 grid points"));
        }
    }
    r
}
