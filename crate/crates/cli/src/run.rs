//! One pipeline per experiment kind. Each returns its artifacts in write order.

use std::time::Instant;

use obstacle_lab::carleman::{annulus_samples, bracket_csv, bracket_samples, carleman_ratio};
use obstacle_lab::fem::export::{field_csv, report_csv};
use obstacle_lab::fem::{poincare_constant, relative_l2_difference, solve_forward, solve_pullback};
use obstacle_lab::geometry::io::shape_to_text;
use obstacle_lab::geometry::{build_mesh, Geometry, ObstacleShape};
use obstacle_lab::reconstruction::{add_noise, reconstruct, synthetic_observation, Problem};
use obstacle_lab::shape_gradient::{adjoint_identity_check, TestPair};
use obstacle_lab::stability::{
    default_sigma_grid, discrimination_test, fit_order, observation_curve, observe, one_dim_counterexample,
};
use obstacle_lab::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{ExperimentConfig, Kind};

#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub body: String,
}

impl Artifact {
    fn new(name: &str, body: String) -> Self {
        Self {
            name: name.to_owned(),
            body,
        }
    }
}

/// Numerical failure of a pipeline stage.
#[derive(Debug, Clone)]
pub struct RunFailure {
    pub module: &'static str,
    pub error: Error,
    /// Artifacts produced before the failure.
    pub partial: Vec<Artifact>,
}

pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub timings: Vec<(String, f64)>,
    pub summary: String,
}

struct Ctx {
    timings: Vec<(String, f64)>,
    artifacts: Vec<Artifact>,
}

impl Ctx {
    fn stage<T>(&mut self, name: &str, module: &'static str, f: impl FnOnce() -> obstacle_lab::Result<T>) -> Result<T, RunFailure> {
        let t = Instant::now();
        let out = f();
        self.timings.push((name.to_owned(), t.elapsed().as_secs_f64()));
        out.map_err(|error| RunFailure {
            module,
            error,
            partial: std::mem::take(&mut self.artifacts),
        })
    }

    fn emit(&mut self, name: &str, body: String) {
        self.artifacts.push(Artifact::new(name, body));
    }
}

fn parts(cfg: &ExperimentConfig) -> (Problem, Geometry, ObstacleShape) {
    let problem = cfg.build_problem().expect("validated config");
    let geometry = problem.geometry.clone();
    let shape = cfg.obstacle().expect("validated config");
    (problem, geometry, shape)
}

pub fn run(cfg: &ExperimentConfig) -> Result<Outcome, RunFailure> {
    let mut cx = Ctx {
        timings: Vec::new(),
        artifacts: Vec::new(),
    };
    let h = cfg.numeric.h;
    let summary = match cfg.kind {
        Kind::Forward => {
            let (problem, g, shape) = parts(cfg);
            let mesh = cx.stage("mesh", "geometry", || build_mesh(&g, Some(&shape), h))?;
            cx.emit("mesh.txt", mesh.to_ascii());
            let f = cx.stage("solve", "elliptic_fem", || solve_forward(&mesh, &problem.coeffs, &problem.data, None))?;
            cx.emit("solution.csv", field_csv(&mesh, &f));
            format!("{} nodes, max |y| = {:e}, max |z| = {:e}", mesh.num_nodes(), max_abs(&f.y), max_abs(&f.z))
        }
        Kind::Observe => {
            let (problem, g, shape) = parts(cfg);
            let mesh = cx.stage("mesh", "geometry", || build_mesh(&g, Some(&shape), h))?;
            let mode = cfg.observation_mode(&g);
            let obs = cx.stage("observe", "observation", || observe(&problem, &mesh, &mode))?;
            cx.emit("trace.csv", obs.to_csv());
            format!("observation norm {:e}", obs.norm())
        }
        Kind::Poincare => {
            let g = cfg.build_geometry().expect("validated config");
            let mesh = cx.stage("mesh", "geometry", || build_mesh(&g, None, h))?;
            let mu1 = cx.stage("eigen", "elliptic_fem", || poincare_constant(&mesh))?;
            cx.emit(
                "poincare.csv",
                report_csv(&[("h", h), ("nodes", mesh.num_nodes() as f64), ("lambda1", 1.0 / mu1), ("mu1", mu1)]),
            );
            format!("mu1 = {mu1:.6}")
        }
        Kind::PullbackCheck => {
            let (problem, g, shape) = parts(cfg);
            let mu = cfg.build_deformation(&g).expect("validated config").map_err(|error| RunFailure {
                module: "geometry",
                error,
                partial: Vec::new(),
            })?;
            let mesh = cx.stage("mesh", "geometry", || build_mesh(&g, Some(&shape), h))?;
            let mut body = String::from("sigma,gap_y,gap_z\n");
            for s in cfg.sigma_grid(&[0.1]) {
                let (gy, gz) = cx.stage("pullback", "elliptic_fem", || {
                    let pb = solve_pullback(&mesh, &mu, s, &problem.coeffs, &problem.data)?;
                    let moved = mesh.apply_deformation(&mu, s)?;
                    let f = solve_forward(&moved, &problem.coeffs, &problem.data, None)?;
                    Ok((
                        relative_l2_difference(&mesh, &f.y, &pb.lifted.y),
                        relative_l2_difference(&mesh, &f.z, &pb.lifted.z),
                    ))
                })?;
                body.push_str(&format!("{s:e},{gy:e},{gz:e}\n"));
            }
            cx.emit("pullback.csv", body);
            "pullback gaps written".into()
        }
        Kind::AdjointCheck => {
            let (problem, g, shape) = parts(cfg);
            let mu = cfg.build_deformation(&g).expect("validated config").map_err(|error| RunFailure {
                module: "geometry",
                error,
                partial: Vec::new(),
            })?;
            let c = g.outer.center();
            let test = match &cfg.test {
                Some(t) => TestPair::new(t.eta.build(c), t.theta.build(c), "test"),
                None => TestPair::new(obstacle_lab::fem::ScalarMap::Constant(1.0), obstacle_lab::fem::ScalarMap::Zero, "1"),
            };
            let mesh = cx.stage("mesh", "geometry", || build_mesh(&g, Some(&shape), h))?;
            let grid = cfg.sigma_grid(&[0.04, 0.02, 0.01, 0.005]);
            let table = cx.stage("identity", "shape_gradient", || {
                adjoint_identity_check(&mesh, &problem.coeffs, &problem.data, &mu, &test, &grid)
            })?;
            cx.emit("identity.csv", table.to_csv());
            let slope = table.remainder_slope().unwrap_or(f64::NAN);
            cx.emit("identity_fit.csv", report_csv(&[("rhs", table.rhs), ("remainder_slope", slope)]));
            format!("remainder slope {slope:.3}")
        }
        Kind::Reconstruct => {
            let (problem, g, initial) = parts(cfg);
            let truth = cfg.target.as_ref().expect("validated config").build();
            let rc = cfg.reconstruction_config(&g);
            let target = cx.stage("target", "reconstruction", || synthetic_observation(&problem, &truth, &rc))?;
            let target = if cfg.numeric.noise > 0.0 {
                add_noise(&target, cfg.numeric.noise, derived_seed(cfg.seed, 1))
            } else {
                target
            };
            cx.emit("target.csv", target.to_csv());
            let res = cx.stage("iterate", "reconstruction", || reconstruct(target, &initial, &problem, &rc, Some(&truth)))?;
            cx.emit("history.csv", res.history_csv());
            if let Some(s) = res.final_shape() {
                cx.emit("shape.txt", shape_to_text(s));
            }
            if let Some(e) = res.error.clone() {
                return Err(RunFailure {
                    module: "reconstruction",
                    error: e,
                    partial: cx.artifacts,
                });
            }
            let last = res.history.last();
            format!(
                "stop {:?} after {} iterations, hausdorff {:e}",
                res.stop,
                last.map_or(0, |r| r.iteration),
                last.and_then(|r| r.hausdorff).unwrap_or(f64::NAN)
            )
        }
        Kind::Stability => {
            let (problem, g, shape) = parts(cfg);
            let mu = cfg.build_deformation(&g).expect("validated config").map_err(|error| RunFailure {
                module: "geometry",
                error,
                partial: Vec::new(),
            })?;
            let mut grid = cfg.sigma_grid(&default_sigma_grid());
            if !grid.contains(&0.0) {
                grid.push(0.0);
                grid.sort_by(f64::total_cmp);
            }
            let mode = cfg.observation_mode(&g);
            let dist = cfg.numeric.distance.mode();
            let curve = cx.stage("sweep", "stability_lab", || observation_curve(&problem, &shape, &mu, &grid, &mode, dist, h))?;
            cx.emit("sweep.csv", curve.to_csv());
            let fit = cx.stage("fit", "stability_lab", || fit_order(&curve))?;
            cx.emit("fit.csv", fit.to_csv());
            format!("k_raw = {:.4}, residual {:.3e}, floor {:.3e}", fit.k_raw, fit.residual, fit.floor)
        }
        Kind::Discriminate => {
            let (problem, g, d0) = parts(cfg);
            let d1 = cfg.target.as_ref().expect("validated config").build();
            let mode = cfg.observation_mode(&g);
            let dist = cfg.numeric.distance.mode();
            let r = cx.stage("discriminate", "stability_lab", || discrimination_test(&problem, &d0, &d1, &mode, dist, h))?;
            cx.emit("discrimination.csv", r.to_csv());
            format!("{:?}: distance {:e}, floor {:e}", r.verdict, r.distance, r.floor)
        }
        Kind::Carleman => {
            let c = cfg.carleman.as_ref().expect("validated config");
            let w = cx.stage("setup", "carleman_check", || c.weight())?;
            let mut rng = ChaCha8Rng::seed_from_u64(derived_seed(cfg.seed, 2));
            let mut body = String::from("x1,x2,grad_error,hessian_error\n");
            for _ in 0..c.fd_points {
                let rad = w.r * rng.random_range(0.5..2.0);
                let t = rng.random_range(0.0..std::f64::consts::TAU);
                let x = [w.center[0] + rad * t.cos(), w.center[1] + rad * t.sin()];
                let (a, f) = (w.eval(x), w.eval_fd(x, 1e-4));
                let ge = (a.grad[0] - f.grad[0]).abs().max((a.grad[1] - f.grad[1]).abs());
                let he = a.hessian.iter().flatten().zip(f.hessian.iter().flatten()).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
                body.push_str(&format!("{:e},{:e},{ge:e},{he:e}\n", x[0], x[1]));
            }
            cx.emit("derivatives.csv", body);
            let pts = annulus_samples(&w, c.samples[0], c.samples[1]);
            let samples = cx.stage("bracket", "carleman_check", || bracket_samples(&w, &pts))?;
            cx.emit("bracket.csv", bracket_csv(&samples));
            let (k, u) = (
                cx.stage("setup", "carleman_check", || c.compact())?,
                cx.stage("setup", "carleman_check", || c.bump())?,
            );
            let table = cx.stage("ratio", "carleman_check", || carleman_ratio(&w, &k, &u, &c.h))?;
            cx.emit("ratio.csv", table.to_csv());
            let worst = samples.iter().map(|s| s.relative_error()).fold(0.0, f64::max);
            format!("bracket max relative error {worst:e}, ratio bounded: {}", table.is_bounded(2.0))
        }
        Kind::Counterexample1d => {
            let c = cfg.counterexample.as_ref().expect("validated config");
            let r = cx.stage("solve", "stability_lab", || one_dim_counterexample(c.eta, c.zeta, c.b, c.big_a, c.k, c.l, c.points))?;
            cx.emit("solution.csv", r.to_csv());
            cx.emit("summary.csv", r.summary_csv());
            format!("z_x(0) = {:.9}, y_x(0) = {:e}", r.z_x0, r.y_x0)
        }
    };
    Ok(Outcome {
        artifacts: cx.artifacts,
        timings: cx.timings,
        summary,
    })
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Independent stream per consumer from one user seed.
fn derived_seed(seed: u64, stream: u64) -> u64 {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r.random()
}
