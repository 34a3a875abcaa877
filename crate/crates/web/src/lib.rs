//! wasm-bindgen entry points for the static page in `www/`.
//!
//! Every call returns a plain object with numeric arrays; failures come back as a JS exception
//! carrying the library error text.

use std::f64::consts::PI;

use obstacle_lab::carleman::{annulus_samples, bracket_samples, CarlemanWeight};
use obstacle_lab::fem::{BoundaryData, CoefficientSet, ScalarMap};
use obstacle_lab::geometry::{build_mesh, Geometry, ObstacleShape, TriangleMesh};
use obstacle_lab::observation::{BoundaryTrace, DistanceMode};
use obstacle_lab::reconstruction::{Observation, ObservationMode, Problem};
use obstacle_lab::stability::{discrimination_test, observe, one_dim_counterexample, Verdict};
use wasm_bindgen::prelude::*;

fn js(e: obstacle_lab::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub fn version() -> String {
    obstacle_lab::VERSION.to_owned()
}

/// Nonzero 1D solution with three vanishing Cauchy values.
#[wasm_bindgen(getter_with_clone)]
pub struct Counterexample {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub y_x0: f64,
    pub z_x0: f64,
    pub residual: f64,
    pub sweeps: usize,
}

#[wasm_bindgen]
pub fn counterexample(eta: f64, zeta: f64, b: f64, a: f64, k: f64, l: f64, points: usize) -> Result<Counterexample, JsError> {
    let r = one_dim_counterexample(eta, zeta, b, a, k, l, points).map_err(js)?;
    Ok(Counterexample {
        residual: r.residual_y.max(r.residual_z),
        y_x0: r.y_x0,
        z_x0: r.z_x0,
        sweeps: r.sweeps,
        x: r.x,
        y: r.y,
        z: r.z,
    })
}

/// Bracket samples on characteristic points, flattened row-major over (radius, angle).
#[wasm_bindgen(getter_with_clone)]
pub struct BracketScan {
    pub radius: Vec<f64>,
    pub bracket: Vec<f64>,
    pub lower_bound: f64,
    pub max_relative_error: f64,
    pub min_bracket: f64,
}

#[wasm_bindgen]
pub fn carleman_bracket(delta_factor: f64, r: f64, n_r: usize, n_theta: usize) -> Result<BracketScan, JsError> {
    let w = CarlemanWeight::scaled(delta_factor, r).map_err(js)?;
    let pts = annulus_samples(&w, n_r, n_theta);
    let s = bracket_samples(&w, &pts).map_err(js)?;
    Ok(BracketScan {
        radius: s.iter().map(|b| (b.x[0] - w.center[0]).hypot(b.x[1] - w.center[1])).collect(),
        bracket: s.iter().map(|b| b.bracket).collect(),
        lower_bound: w.bracket_lower_bound(),
        max_relative_error: s.iter().map(|b| b.relative_error()).fold(0.0, f64::max),
        min_bracket: s.iter().map(|b| b.bracket).fold(f64::INFINITY, f64::min),
    })
}

/// Flux traces of two circular obstacles on the full unit circle, and the discrimination verdict.
#[wasm_bindgen(getter_with_clone)]
pub struct Comparison {
    pub angle: Vec<f64>,
    pub flux_0: Vec<f64>,
    pub flux_1: Vec<f64>,
    pub distance: f64,
    pub floor: f64,
    pub distinguishable: bool,
}

fn angular_flux(trace: &BoundaryTrace, mesh: &TriangleMesh) -> Vec<(f64, f64)> {
    let mut v: Vec<(f64, f64)> = trace
        .gamma_nodes
        .iter()
        .zip(&trace.alpha)
        .map(|(&n, &a)| {
            let p = mesh.vertices[n];
            (p[1].atan2(p[0]).rem_euclid(2.0 * PI), a)
        })
        .collect();
    v.sort_by(|p, q| p.0.total_cmp(&q.0));
    v
}

#[wasm_bindgen]
pub fn compare_circles(r0: f64, r1: f64, offset: f64, b: f64, a: f64, h: f64) -> Result<Comparison, JsError> {
    let problem = Problem {
        geometry: Geometry::unit_disk(),
        coeffs: CoefficientSet::new(0.0, b, a, 0.0),
        data: BoundaryData::new(ScalarMap::Constant(1.0), ScalarMap::Zero),
    };
    let d0 = ObstacleShape::circle([0.0, 0.0], r0);
    let d1 = ObstacleShape::circle([offset, 0.0], r1);
    for d in [&d0, &d1] {
        d.validate(&problem.geometry.safety).map_err(js)?;
    }
    let mode = ObservationMode::Boundary;
    let report = discrimination_test(&problem, &d0, &d1, &mode, DistanceMode::L2, h).map_err(js)?;
    let mut traces = Vec::with_capacity(2);
    for d in [&d0, &d1] {
        let mesh = build_mesh(&problem.geometry, Some(d), h).map_err(js)?;
        match observe(&problem, &mesh, &mode).map_err(js)? {
            Observation::Boundary(t) => traces.push(angular_flux(&t, &mesh)),
            Observation::Internal(_) => unreachable!("boundary mode"),
        }
    }
    Ok(Comparison {
        angle: traces[0].iter().map(|p| p.0).collect(),
        flux_0: traces[0].iter().map(|p| p.1).collect(),
        flux_1: traces[1].iter().map(|p| p.1).collect(),
        distance: report.distance,
        floor: report.floor,
        distinguishable: report.verdict == Verdict::Distinguishable,
    })
}
