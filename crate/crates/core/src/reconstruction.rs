//! Iterative obstacle reconstruction from boundary fluxes or interior values.
//!
//! Each iteration linearizes the observation map with the adjoint sensitivity matrix,
//! solves a regularized least-squares problem for a radial update and takes a damped,
//! backtracked step. `K` is stored with rows = test functions and columns = basis
//! modes, and its columns describe radial growth, so the update solves `K d = -r`.

use std::fmt::Write;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::fem::{solve_forward, BoundaryData, CoefficientSet, FieldPair, ScalarMap};
use crate::geometry::domain::{Geometry, SafetyRegion};
use crate::geometry::hausdorff::hausdorff_distance;
use crate::geometry::mesh::TriangleMesh;
use crate::geometry::mesher::build_mesh;
use crate::geometry::shape::ObstacleShape;
use crate::observation::{
    boundary_distance, internal_distance, internal_trace, normal_trace, BoundaryTrace, DistanceMode, InternalTrace,
    ObservationDisk,
};
use crate::shape_gradient::{
    internal_sensitivity_matrix, sensitivity_matrix, trig_basis, trig_test_pairs, SensitivityMatrix, TestPair,
};

/// Largest number of step halvings before giving up.
pub const MAX_HALVINGS: usize = 20;

/// Relative singular-value threshold below which a direction counts as lost.
pub const DEFAULT_RANK_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum ObservationMode {
    Boundary,
    Internal { omega: ObservationDisk, resolution: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionConfig {
    pub basis_size: usize,
    pub test_count: usize,
    /// Use `(mode, 0)` and `(0, mode)` boundary test pairs instead of `(mode, 0)` only.
    pub both_channels: bool,
    /// Tikhonov weight relative to `|K|_2^2`.
    pub rho_factor: f64,
    /// Relative singular-value threshold for rank detection and truncation.
    pub svd_threshold: f64,
    pub tau: f64,
    pub max_iterations: usize,
    /// Stop when the residual norm drops below this fraction of the target norm.
    pub residual_tol: f64,
    /// Stop when an accepted step moves the boundary by less than this (Hausdorff).
    pub shape_tol: f64,
    pub mesh_size: f64,
    pub mode: ObservationMode,
}

impl Default for ReconstructionConfig {
    fn default() -> Self {
        Self {
            basis_size: 5,
            test_count: 10,
            both_channels: true,
            rho_factor: 1e-8,
            svd_threshold: DEFAULT_RANK_THRESHOLD,
            tau: 0.5,
            max_iterations: 30,
            residual_tol: 1e-6,
            shape_tol: 1e-5,
            mesh_size: 0.05,
            mode: ObservationMode::Boundary,
        }
    }
}

impl ReconstructionConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.into()));
        if self.basis_size == 0 || self.test_count == 0 {
            return bad("basis size and test count must be positive");
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return bad("damping must lie in (0, 1]");
        }
        if !(self.residual_tol > 0.0 && self.shape_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if !(self.rho_factor >= 0.0 && self.svd_threshold > 0.0 && self.mesh_size > 0.0) {
            return bad("regularization, threshold and mesh size must be positive");
        }
        Ok(())
    }
}

/// Forward problem description shared by the target and all iterates.
#[derive(Debug, Clone)]
pub struct Problem {
    pub geometry: Geometry,
    pub coeffs: CoefficientSet,
    pub data: BoundaryData,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Observation {
    Boundary(BoundaryTrace),
    Internal(InternalTrace),
}

impl Observation {
    pub fn norm(&self) -> f64 {
        match self {
            Observation::Boundary(t) => {
                let zero = BoundaryTrace {
                    alpha: vec![0.0; t.alpha.len()],
                    beta: vec![0.0; t.beta.len()],
                    ..t.clone()
                };
                boundary_distance(t, &zero, DistanceMode::L2).unwrap_or(0.0)
            }
            Observation::Internal(t) => (t.weight * t.values.iter().map(|v| v * v).sum::<f64>()).sqrt(),
        }
    }

    pub fn distance(&self, other: &Observation) -> Result<f64> {
        match (self, other) {
            (Observation::Boundary(a), Observation::Boundary(b)) => boundary_distance(a, b, DistanceMode::L2),
            (Observation::Internal(a), Observation::Internal(b)) => internal_distance(a, b),
            _ => Err(Error::MismatchedTraces("boundary and internal observations cannot be compared".into())),
        }
    }

    pub fn to_csv(&self) -> String {
        match self {
            Observation::Boundary(t) => t.to_csv(),
            Observation::Internal(t) => t.to_csv(),
        }
    }
}

/// `-∫_γ (alpha - alpha~) eta_j + (beta - beta~) theta_j` for each test pair.
pub fn residual_projection(
    target: &BoundaryTrace,
    current: &BoundaryTrace,
    tests: &[TestPair],
    mesh: &TriangleMesh,
) -> Result<Vec<f64>> {
    let diff = target.axpy(-1.0, current)?;
    Ok(tests.iter().map(|t| -t.project(&diff, mesh)).collect())
}

/// `-sum_s w chi_j(p_s) (v - v~)(p_s)` for interior observations.
pub fn internal_residual_projection(
    target: &InternalTrace,
    current: &InternalTrace,
    tests: &[(ScalarMap, String)],
) -> Result<Vec<f64>> {
    if target.values.len() != current.values.len() {
        return Err(Error::MismatchedTraces(format!(
            "{} vs {} sample points",
            target.values.len(),
            current.values.len()
        )));
    }
    Ok(tests
        .iter()
        .map(|(chi, _)| {
            -target
                .sample_points
                .iter()
                .zip(target.values.iter().zip(&current.values))
                .map(|(&p, (a, b))| target.weight * chi.eval(p) * (a - b))
                .sum::<f64>()
        })
        .collect())
}

/// Monomials `1, u, v, u^2, uv, v^2, ...` in the scaled coordinates of ω.
pub fn internal_test_functions(omega: &ObservationDisk, count: usize) -> Vec<(ScalarMap, String)> {
    let mut out = Vec::with_capacity(count);
    let mut degree = 0;
    while out.len() < count {
        for py in 0..=degree {
            if out.len() == count {
                break;
            }
            let px = degree - py;
            let (c, r) = (omega.center, omega.radius);
            let f = ScalarMap::function(move |p| {
                let u = (p[0] - c[0]) / r;
                let v = (p[1] - c[1]) / r;
                u.powi(px) * v.powi(py)
            });
            out.push((f, format!("u^{px}v^{py}")));
        }
        degree += 1;
    }
    out
}

/// Radial function `r + tau sum lambda_i f_i`, halving `tau` until the shape is valid.
/// Returns the new shape and the effective step.
pub fn update_shape(
    shape: &ObstacleShape,
    lambda: &[f64],
    tau: f64,
    safety: &SafetyRegion,
) -> Result<(ObstacleShape, f64)> {
    if lambda.iter().any(|l| !l.is_finite()) {
        return Err(Error::InvalidArgument("non-finite update coefficients".into()));
    }
    let mut t = tau;
    for _ in 0..=MAX_HALVINGS {
        let candidate = shape.displaced(lambda, t);
        if candidate.validate(safety).is_ok() {
            return Ok((candidate, t));
        }
        t *= 0.5;
    }
    Err(Error::StepCollapse { halvings: MAX_HALVINGS })
}

/// Adds seeded Gaussian noise with standard deviation `level * rms(values)`.
pub fn add_noise(obs: &Observation, level: f64, seed: u64) -> Observation {
    if level <= 0.0 {
        return obs.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let perturb = |v: &mut Vec<f64>, rng: &mut ChaCha8Rng| {
        let rms = (v.iter().map(|x| x * x).sum::<f64>() / v.len().max(1) as f64).sqrt();
        if rms > 0.0 {
            let normal = Normal::new(0.0, level * rms).expect("finite standard deviation");
            v.iter_mut().for_each(|x| *x += normal.sample(rng));
        }
    };
    let mut out = obs.clone();
    match &mut out {
        Observation::Boundary(t) => {
            perturb(&mut t.alpha, &mut rng);
            perturb(&mut t.beta, &mut rng);
        }
        Observation::Internal(t) => perturb(&mut t.values, &mut rng),
    }
    out
}

/// Mesh, forward solution and observation of one candidate obstacle.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub shape: ObstacleShape,
    pub mesh: TriangleMesh,
    pub fields: FieldPair,
    pub observation: Observation,
    pub residual: f64,
}

/// Regularized solve of `K d = b`: Tikhonov normal equations, with singular values
/// below the threshold truncated. Returns `(d, cond, rank)`.
pub fn regularized_solve(k: &DMatrix<f64>, b: &[f64], rho_factor: f64, threshold: f64) -> (Vec<f64>, f64, usize) {
    let svd = k.clone().svd(true, true);
    let s = &svd.singular_values;
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let cut = threshold * smax;
    let rank = s.iter().filter(|&&v| v > cut && v > 0.0).count();
    let smin = s.iter().cloned().fold(f64::INFINITY, f64::min);
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let rho = rho_factor * smax * smax;
    let u = svd.u.as_ref().expect("U requested");
    let vt = svd.v_t.as_ref().expect("V^T requested");
    let bv = DVector::from_column_slice(b);
    let mut d = DVector::zeros(k.ncols());
    for i in 0..s.len() {
        let si = s[i];
        if si <= cut || si == 0.0 {
            continue;
        }
        let coef = si * u.column(i).dot(&bv) / (si * si + rho);
        d += vt.row(i).transpose() * coef;
    }
    (d.iter().cloned().collect(), cond, rank)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub shape: ObstacleShape,
    pub residual: f64,
    /// Radial update coefficients applied after this iteration (before damping).
    pub lambda: Vec<f64>,
    pub cond_k: f64,
    pub tau_eff: f64,
    pub hausdorff: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    ResidualTolerance,
    ShapeTolerance,
    MaxIterations,
    /// Every damped step increased the residual.
    Stagnated,
    Failed,
}

#[derive(Debug)]
pub struct ReconstructionResult {
    pub history: Vec<IterationRecord>,
    pub stop: StopReason,
    pub error: Option<Error>,
}

impl ReconstructionResult {
    pub fn final_shape(&self) -> Option<&ObstacleShape> {
        self.history.last().map(|r| &r.shape)
    }

    pub fn history_csv(&self) -> String {
        let p = self.history.iter().map(|r| r.lambda.len()).max().unwrap_or(0);
        let mut s = String::from("iter,residual,hausdorff,cond_K,tau_eff");
        for i in 1..=p {
            let _ = write!(s, ",lambda_{i}");
        }
        s.push('\n');
        for r in &self.history {
            let h = r.hausdorff.map_or_else(|| "nan".to_string(), |v| format!("{v:e}"));
            let _ = write!(s, "{},{:e},{},{:e},{:e}", r.iteration, r.residual, h, r.cond_k, r.tau_eff);
            for i in 0..p {
                let _ = write!(s, ",{:e}", r.lambda.get(i).copied().unwrap_or(0.0));
            }
            s.push('\n');
        }
        s
    }
}

/// Driver state: the problem, the target and the configuration.
#[derive(Debug, Clone)]
pub struct Reconstructor {
    pub problem: Problem,
    pub target: Observation,
    pub config: ReconstructionConfig,
    pub truth: Option<ObstacleShape>,
    target_norm: f64,
}

impl Reconstructor {
    pub fn new(problem: Problem, target: Observation, config: ReconstructionConfig) -> Result<Self> {
        config.validate()?;
        match (&config.mode, &target) {
            (ObservationMode::Boundary, Observation::Boundary(_)) => {}
            (ObservationMode::Internal { omega, .. }, Observation::Internal(_)) => omega.validate(&problem.geometry)?,
            _ => return Err(Error::MismatchedTraces("observation kind does not match the configured mode".into())),
        }
        let target_norm = target.norm();
        Ok(Self {
            problem,
            target,
            config,
            truth: None,
            target_norm,
        })
    }

    pub fn with_truth(mut self, truth: ObstacleShape) -> Self {
        self.truth = Some(truth);
        self
    }

    /// Observation of `shape` under the configured mode.
    pub fn observe(&self, mesh: &TriangleMesh, fields: &FieldPair) -> Result<Observation> {
        match &self.config.mode {
            ObservationMode::Boundary => Ok(Observation::Boundary(normal_trace(
                fields,
                mesh,
                &self.problem.coeffs,
                None,
            )?)),
            ObservationMode::Internal { omega, resolution } => Ok(Observation::Internal(internal_trace(
                fields,
                mesh,
                omega,
                *resolution,
                &self.problem.geometry.safety,
            )?)),
        }
    }

    pub fn evaluate(&self, shape: &ObstacleShape) -> Result<Evaluation> {
        let mesh = build_mesh(&self.problem.geometry, Some(shape), self.config.mesh_size)?;
        let fields = solve_forward(&mesh, &self.problem.coeffs, &self.problem.data, None)?;
        let observation = self.observe(&mesh, &fields)?;
        let residual = self.target.distance(&observation)?;
        Ok(Evaluation {
            shape: shape.clone(),
            mesh,
            fields,
            observation,
            residual,
        })
    }

    /// Sensitivity matrix and residual projection at an evaluated shape.
    pub fn linearize(&self, eval: &Evaluation) -> Result<(SensitivityMatrix, Vec<f64>)> {
        let basis = trig_basis(self.config.basis_size, 0.0);
        let coeffs = &self.problem.coeffs;
        match (&self.config.mode, &self.target, &eval.observation) {
            (ObservationMode::Boundary, Observation::Boundary(t), Observation::Boundary(c)) => {
                let tests = trig_test_pairs(
                    self.problem.geometry.outer.center(),
                    self.config.test_count,
                    self.config.both_channels,
                );
                let k = sensitivity_matrix(&eval.mesh, coeffs, &eval.fields, &basis, &tests)?;
                Ok((k, residual_projection(t, c, &tests, &eval.mesh)?))
            }
            (ObservationMode::Internal { omega, .. }, Observation::Internal(t), Observation::Internal(c)) => {
                let tests = internal_test_functions(omega, self.config.test_count);
                let k = internal_sensitivity_matrix(
                    &eval.mesh,
                    coeffs,
                    &eval.fields,
                    &basis,
                    &c.sample_points,
                    c.weight,
                    &tests,
                )?;
                Ok((k, internal_residual_projection(t, c, &tests)?))
            }
            _ => Err(Error::MismatchedTraces("observation kind does not match the configured mode".into())),
        }
    }

    /// Update direction `d` with `K d = -r`; errors when `K` has lost rank.
    pub fn direction(&self, k: &SensitivityMatrix, r: &[f64]) -> Result<(Vec<f64>, f64)> {
        let km = k.to_dmatrix();
        let b: Vec<f64> = r.iter().map(|v| -v).collect();
        let (d, cond, rank) = regularized_solve(&km, &b, self.config.rho_factor, self.config.svd_threshold);
        let needed = k.cols().min(k.rows());
        if rank < needed {
            return Err(Error::RankDeficient(format!(
                "sensitivity matrix has numerical rank {rank} of {needed} (condition number {cond:e})"
            )));
        }
        Ok((d, cond))
    }

    /// Damped step along `d` with backtracking on the residual. Returns the accepted
    /// evaluation and effective step, or `None` when no halving reduces the residual.
    pub fn step(&self, eval: &Evaluation, d: &[f64]) -> Result<Option<(Evaluation, f64)>> {
        let safety = &self.problem.geometry.safety;
        let mut tau = self.config.tau;
        for _ in 0..=MAX_HALVINGS {
            let (shape, t) = update_shape(&eval.shape, d, tau, safety)?;
            let candidate = match self.evaluate(&shape) {
                Ok(c) => c,
                Err(Error::Meshing(_)) | Err(Error::MeshTangled { .. }) => {
                    tau = t * 0.5;
                    continue;
                }
                Err(e) => return Err(e),
            };
            if candidate.residual <= eval.residual {
                return Ok(Some((candidate, t)));
            }
            tau = t * 0.5;
        }
        Ok(None)
    }

    pub fn run(&self, initial: &ObstacleShape) -> ReconstructionResult {
        let mut history = Vec::new();
        let (stop, error) = match self.iterate(initial, &mut history) {
            Ok(stop) => (stop, None),
            Err(e) => (StopReason::Failed, Some(e)),
        };
        ReconstructionResult { history, stop, error }
    }

    fn iterate(&self, initial: &ObstacleShape, history: &mut Vec<IterationRecord>) -> Result<StopReason> {
        initial.validate(&self.problem.geometry.safety)?;
        let mut eval = self.evaluate(initial)?;
        let tol = self.config.residual_tol * self.target_norm.max(f64::MIN_POSITIVE);
        for it in 0..=self.config.max_iterations {
            let mut record = IterationRecord {
                iteration: it,
                shape: eval.shape.clone(),
                residual: eval.residual,
                lambda: vec![0.0; self.config.basis_size],
                cond_k: f64::NAN,
                tau_eff: 0.0,
                hausdorff: self.truth.as_ref().map(|t| hausdorff_distance(t, &eval.shape)),
            };
            // the rank check runs at the start even when the residual already vanishes,
            // so uninformative data is reported instead of declared converged
            let converged = eval.residual <= tol;
            if (converged && it > 0) || it == self.config.max_iterations {
                history.push(record);
                return Ok(if converged { StopReason::ResidualTolerance } else { StopReason::MaxIterations });
            }
            let (k, r) = self.linearize(&eval)?;
            let (d, cond) = match self.direction(&k, &r) {
                Ok(v) => v,
                Err(e) => {
                    record.cond_k = f64::INFINITY;
                    history.push(record);
                    return Err(e);
                }
            };
            if converged {
                record.cond_k = cond;
                history.push(record);
                return Ok(StopReason::ResidualTolerance);
            }
            record.lambda = d.clone();
            record.cond_k = cond;
            let next = self.step(&eval, &d);
            let next = match next {
                Ok(n) => n,
                Err(e) => {
                    history.push(record);
                    return Err(e);
                }
            };
            let Some((candidate, tau_eff)) = next else {
                history.push(record);
                return Ok(StopReason::Stagnated);
            };
            record.tau_eff = tau_eff;
            history.push(record);
            let moved = hausdorff_distance(&eval.shape, &candidate.shape);
            eval = candidate;
            if moved < self.config.shape_tol {
                history.push(IterationRecord {
                    iteration: it + 1,
                    shape: eval.shape.clone(),
                    residual: eval.residual,
                    lambda: vec![0.0; self.config.basis_size],
                    cond_k: f64::NAN,
                    tau_eff: 0.0,
                    hausdorff: self.truth.as_ref().map(|t| hausdorff_distance(t, &eval.shape)),
                });
                return Ok(StopReason::ShapeTolerance);
            }
        }
        Ok(StopReason::MaxIterations)
    }
}

/// Synthetic observation of `truth` under the configured mode (inverse crime allowed).
pub fn synthetic_observation(problem: &Problem, truth: &ObstacleShape, config: &ReconstructionConfig) -> Result<Observation> {
    let mesh = build_mesh(&problem.geometry, Some(truth), config.mesh_size)?;
    let fields = solve_forward(&mesh, &problem.coeffs, &problem.data, None)?;
    match &config.mode {
        ObservationMode::Boundary => Ok(Observation::Boundary(normal_trace(&fields, &mesh, &problem.coeffs, None)?)),
        ObservationMode::Internal { omega, resolution } => Ok(Observation::Internal(internal_trace(
            &fields,
            &mesh,
            omega,
            *resolution,
            &problem.geometry.safety,
        )?)),
    }
}

/// Convenience wrapper: run a reconstruction from `initial`.
pub fn reconstruct(
    target: Observation,
    initial: &ObstacleShape,
    problem: &Problem,
    config: &ReconstructionConfig,
    truth: Option<&ObstacleShape>,
) -> Result<ReconstructionResult> {
    let mut r = Reconstructor::new(problem.clone(), target, config.clone())?;
    if let Some(t) = truth {
        r = r.with_truth(t.clone());
    }
    Ok(r.run(initial))
}
