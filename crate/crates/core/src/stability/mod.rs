//! Domain-variation experiments: observation curves `sigma -> |obs(sigma) - obs(0)|`,
//! vanishing-order fits, discrimination between two obstacles, a divided-difference
//! regularity proxy and the one-dimensional non-uniqueness construction.

pub mod counterexample;

use std::f64::consts::PI;
use std::fmt::Write;

use crate::error::{Error, Result};
use crate::fem::solve_forward;
use crate::geometry::deformation::DeformationField;
use crate::geometry::hausdorff::hausdorff_distance;
use crate::geometry::mesh::TriangleMesh;
use crate::geometry::mesher::build_mesh;
use crate::geometry::shape::ObstacleShape;
use crate::observation::{
    boundary_distance, internal_distance, internal_trace, normal_trace, BoundaryTrace, DistanceMode,
};
use crate::reconstruction::{Observation, ObservationMode, Problem};

pub use counterexample::{one_dim_counterexample, CounterexampleReport, MAX_SWEEPS, SWEEP_TOL};

/// Absolute term added to every noise floor.
pub const FLOOR_EPS: f64 = 1e-12;

/// Samples must exceed this multiple of the floor to enter an order fit.
pub const FLOOR_FACTOR: f64 = 10.0;

/// Minimum number of resolved samples for an order fit.
pub const MIN_FIT_SAMPLES: usize = 4;

/// Default sweep `{±0.04, ±0.02, ±0.01, ±0.005}` plus zero.
pub fn default_sigma_grid() -> Vec<f64> {
    vec![-0.04, -0.02, -0.01, -0.005, 0.0, 0.005, 0.01, 0.02, 0.04]
}

/// Observation of the solution on `mesh` under `mode`.
pub fn observe(problem: &Problem, mesh: &TriangleMesh, mode: &ObservationMode) -> Result<Observation> {
    let fields = solve_forward(mesh, &problem.coeffs, &problem.data, None)?;
    match mode {
        ObservationMode::Boundary => Ok(Observation::Boundary(normal_trace(&fields, mesh, &problem.coeffs, None)?)),
        ObservationMode::Internal { omega, resolution } => Ok(Observation::Internal(internal_trace(
            &fields,
            mesh,
            omega,
            *resolution,
            &problem.geometry.safety,
        )?)),
    }
}

fn polar_angle(mesh: &TriangleMesh, node: usize) -> f64 {
    let p = mesh.vertices[node];
    (p[1] - mesh.outer_center[1]).atan2(p[0] - mesh.outer_center[0])
}

fn unwrap(angles: &mut [f64]) {
    for i in 1..angles.len() {
        while angles[i] - angles[i - 1] > PI {
            angles[i] -= 2.0 * PI;
        }
        while angles[i] - angles[i - 1] < -PI {
            angles[i] += 2.0 * PI;
        }
    }
}

/// Piecewise-linear resampling of `trace` (living on `mesh`) at the γ nodes of
/// `reference` (living on `ref_mesh`), by polar angle about the outer center.
pub fn resample_trace(
    trace: &BoundaryTrace,
    mesh: &TriangleMesh,
    reference: &BoundaryTrace,
    ref_mesh: &TriangleMesh,
) -> BoundaryTrace {
    let mut th: Vec<f64> = trace.gamma_nodes.iter().map(|&n| polar_angle(mesh, n)).collect();
    unwrap(&mut th);
    let sign = if th.len() > 1 && th[th.len() - 1] < th[0] { -1.0 } else { 1.0 };
    th.iter_mut().for_each(|t| *t *= sign);
    let (mut a, mut b) = (trace.alpha.clone(), trace.beta.clone());
    if trace.closed {
        th.push(th[0] + 2.0 * PI);
        a.push(a[0]);
        b.push(b[0]);
    }
    let lo = th[0];
    let last = th.len() - 1;
    let mut out = reference.clone();
    for (k, &n) in reference.gamma_nodes.iter().enumerate() {
        let mut t = sign * polar_angle(ref_mesh, n);
        if trace.closed {
            t = lo + (t - lo).rem_euclid(2.0 * PI);
        } else {
            let gap = 0.5 * (2.0 * PI - (th[last] - lo));
            t = lo - gap + (t - lo + gap).rem_euclid(2.0 * PI);
        }
        let j = th.partition_point(|&x| x <= t);
        let (va, vb) = if j == 0 {
            (a[0], b[0])
        } else if j > last {
            (a[last], b[last])
        } else {
            let s = (t - th[j - 1]) / (th[j] - th[j - 1]);
            (a[j - 1] + s * (a[j] - a[j - 1]), b[j - 1] + s * (b[j] - b[j - 1]))
        };
        out.alpha[k] = va;
        out.beta[k] = vb;
    }
    out
}

/// Distance between observations computed on different meshes.
pub fn cross_mesh_distance(
    o0: &Observation,
    m0: &TriangleMesh,
    o1: &Observation,
    m1: &TriangleMesh,
    mode: DistanceMode,
) -> Result<f64> {
    match (o0, o1) {
        (Observation::Boundary(a), Observation::Boundary(b)) => {
            if a.gamma_nodes.len() == b.gamma_nodes.len()
                && a.gamma_nodes.iter().zip(&b.gamma_nodes).all(|(&i, &j)| m0.vertices[i] == m1.vertices[j])
            {
                return boundary_distance(a, b, mode);
            }
            boundary_distance(a, &resample_trace(b, m1, a, m0), mode)
        }
        (Observation::Internal(a), Observation::Internal(b)) => internal_distance(a, b),
        _ => Err(Error::MismatchedTraces("boundary and internal observations cannot be compared".into())),
    }
}

/// Discretization floor at `shape`: observations on meshes `h` and `h / sqrt 2`.
pub fn noise_floor(
    problem: &Problem,
    shape: &ObstacleShape,
    h: f64,
    mode: &ObservationMode,
    distance: DistanceMode,
) -> Result<f64> {
    let m0 = build_mesh(&problem.geometry, Some(shape), h)?;
    let m1 = build_mesh(&problem.geometry, Some(shape), h / 2f64.sqrt())?;
    let o0 = observe(problem, &m0, mode)?;
    let o1 = observe(problem, &m1, mode)?;
    Ok(cross_mesh_distance(&o0, &m0, &o1, &m1, distance)? + FLOOR_EPS)
}

/// Distance between two independent solves on the same mesh at `shape`.
pub fn resolve_floor(
    problem: &Problem,
    shape: &ObstacleShape,
    h: f64,
    mode: &ObservationMode,
    distance: DistanceMode,
) -> Result<f64> {
    let m = build_mesh(&problem.geometry, Some(shape), h)?;
    let o0 = observe(problem, &m, mode)?;
    let o1 = observe(problem, &m, mode)?;
    cross_mesh_distance(&o0, &m, &o1, &m, distance)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveSample {
    pub sigma: f64,
    pub distance: f64,
    pub valid: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservationCurve {
    pub samples: Vec<CurveSample>,
    pub floor: f64,
    pub distance_mode: DistanceMode,
}

impl ObservationCurve {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("sigma,distance,valid\n");
        for p in &self.samples {
            let _ = writeln!(s, "{:e},{:e},{}", p.sigma, p.distance, p.valid);
        }
        s
    }

    pub fn distance_at(&self, sigma: f64) -> Option<f64> {
        self.samples.iter().find(|p| p.sigma == sigma && p.valid).map(|p| p.distance)
    }
}

/// Sweep `sigma -> dist(obs(m_sigma(D0)), obs(D0))` on the deformed reference mesh.
///
/// Samples whose deformed mesh is invalid are kept with `valid = false`.
pub fn observation_curve(
    problem: &Problem,
    d0: &ObstacleShape,
    mu: &DeformationField,
    sigma_grid: &[f64],
    mode: &ObservationMode,
    distance: DistanceMode,
    h: f64,
) -> Result<ObservationCurve> {
    let mesh = build_mesh(&problem.geometry, Some(d0), h)?;
    let base = observe(problem, &mesh, mode)?;
    let floor = noise_floor(problem, d0, h, mode, distance)?;
    let samples = crate::par::map(sigma_grid, |&sigma| -> Result<CurveSample> {
        if sigma == 0.0 {
            return Ok(CurveSample {
                sigma,
                distance: 0.0,
                valid: true,
            });
        }
        let moved = match mesh.apply_deformation(mu, sigma) {
            Ok(m) => m,
            Err(Error::MeshTangled { .. }) | Err(Error::InvalidDeformation(_)) => {
                return Ok(CurveSample {
                    sigma,
                    distance: f64::NAN,
                    valid: false,
                })
            }
            Err(e) => return Err(e),
        };
        let obs = observe(problem, &moved, mode)?;
        Ok(CurveSample {
            sigma,
            distance: cross_mesh_distance(&base, &mesh, &obs, &moved, distance)?,
            valid: true,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(ObservationCurve {
        samples,
        floor,
        distance_mode: distance,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityFit {
    pub sigma_samples: Vec<f64>,
    pub distances: Vec<f64>,
    pub k_raw: f64,
    pub k_int: u32,
    pub c: f64,
    /// RMS of the log-space residuals.
    pub residual: f64,
    pub floor: f64,
    /// Largest `|sigma|` among fitted samples.
    pub sigma_star: f64,
    /// `distance >= 0.9 C |sigma|^k_raw` on every fitted sample.
    pub lower_bound_holds: bool,
}

impl StabilityFit {
    pub fn to_csv(&self) -> String {
        format!(
            "k_raw,k_int,C,residual,floor\n{:e},{},{:e},{:e},{:e}\n",
            self.k_raw, self.k_int, self.c, self.residual, self.floor
        )
    }
}

/// Least-squares power law through the samples resolved above `10 x floor`.
pub fn fit_order(curve: &ObservationCurve) -> Result<StabilityFit> {
    let used: Vec<&CurveSample> = curve
        .samples
        .iter()
        .filter(|p| p.valid && p.sigma != 0.0 && p.distance > FLOOR_FACTOR * curve.floor)
        .collect();
    if used.len() < MIN_FIT_SAMPLES {
        return Err(Error::RegimeUnresolved {
            valid: used.len(),
            required: MIN_FIT_SAMPLES,
        });
    }
    let pts: Vec<(f64, f64)> = used.iter().map(|p| (p.sigma.abs().ln(), p.distance.ln())).collect();
    let (k, b) = crate::linalg::fit_line(&pts).ok_or(Error::RegimeUnresolved {
        valid: used.len(),
        required: MIN_FIT_SAMPLES,
    })?;
    let residual = (pts.iter().map(|(x, y)| (y - (k * x + b)).powi(2)).sum::<f64>() / pts.len() as f64).sqrt();
    let c = b.exp();
    Ok(StabilityFit {
        sigma_samples: used.iter().map(|p| p.sigma).collect(),
        distances: used.iter().map(|p| p.distance).collect(),
        k_raw: k,
        k_int: k.round().max(1.0) as u32,
        c,
        residual,
        floor: curve.floor,
        sigma_star: used.iter().map(|p| p.sigma.abs()).fold(0.0, f64::max),
        lower_bound_holds: used.iter().all(|p| p.distance >= 0.9 * c * p.sigma.abs().powf(k)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Distinguishable,
    Indistinguishable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscriminationReport {
    pub hausdorff: f64,
    pub distance: f64,
    pub floor: f64,
    pub verdict: Verdict,
}

impl DiscriminationReport {
    pub fn to_csv(&self) -> String {
        let v = match self.verdict {
            Verdict::Distinguishable => "distinguishable",
            Verdict::Indistinguishable => "indistinguishable",
        };
        format!(
            "hausdorff,distance,floor,verdict\n{:e},{:e},{:e},{v}\n",
            self.hausdorff, self.distance, self.floor
        )
    }
}

/// Compares the observations of two obstacles against the discretization floor at `d0`.
pub fn discrimination_test(
    problem: &Problem,
    d0: &ObstacleShape,
    d1: &ObstacleShape,
    mode: &ObservationMode,
    distance: DistanceMode,
    h: f64,
) -> Result<DiscriminationReport> {
    let m0 = build_mesh(&problem.geometry, Some(d0), h)?;
    let m1 = build_mesh(&problem.geometry, Some(d1), h)?;
    let o0 = observe(problem, &m0, mode)?;
    let o1 = observe(problem, &m1, mode)?;
    let dist = cross_mesh_distance(&o0, &m0, &o1, &m1, distance)?;
    let floor = noise_floor(problem, d0, h, mode, distance)?;
    Ok(DiscriminationReport {
        hausdorff: hausdorff_distance(d0, d1),
        distance: dist,
        floor,
        verdict: if dist > FLOOR_FACTOR * floor {
            Verdict::Distinguishable
        } else {
            Verdict::Indistinguishable
        },
    })
}

fn observation_vector(o: &Observation) -> Vec<f64> {
    match o {
        Observation::Boundary(t) => t.alpha.iter().chain(&t.beta).cloned().collect(),
        Observation::Internal(t) => t.values.clone(),
    }
}

fn observation_weights(o: &Observation) -> Vec<f64> {
    match o {
        Observation::Boundary(t) => t.edge_weights.iter().chain(&t.edge_weights).cloned().collect(),
        Observation::Internal(t) => vec![t.weight; t.values.len()],
    }
}

/// Weighted norms of the forward third differences `Δ³ obs(0; s) / s³` for each step `s`.
///
/// Bounded values as `s` shrinks are consistent with a smooth (here: analytic) map.
pub fn third_divided_differences(
    problem: &Problem,
    d0: &ObstacleShape,
    mu: &DeformationField,
    steps: &[f64],
    mode: &ObservationMode,
    h: f64,
) -> Result<Vec<f64>> {
    let mesh = build_mesh(&problem.geometry, Some(d0), h)?;
    let base = observe(problem, &mesh, mode)?;
    let w = observation_weights(&base);
    let v0 = observation_vector(&base);
    let mut out = Vec::with_capacity(steps.len());
    for &s in steps {
        let vs = crate::par::map(&[s, 2.0 * s, 3.0 * s], |&t| -> Result<Vec<f64>> {
            let m = mesh.apply_deformation(mu, t)?;
            Ok(observation_vector(&observe(problem, &m, mode)?))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        let d3: f64 = (0..v0.len())
            .map(|i| {
                let d = vs[2][i] - 3.0 * vs[1][i] + 3.0 * vs[0][i] - v0[i];
                w[i] * d * d
            })
            .sum::<f64>()
            .sqrt();
        out.push(d3 / s.powi(3));
    }
    Ok(out)
}
