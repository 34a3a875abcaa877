use std::f64::consts::PI;

use obstacle_lab::fem::*;
use obstacle_lab::geometry::*;
use obstacle_lab::observation::{normal_trace, BoundaryTrace, ObservationDisk};
use obstacle_lab::reconstruction::*;
use obstacle_lab::shape_gradient::{trig_test_pairs, TestPair};
use obstacle_lab::Error;

fn laplace_problem() -> Problem {
    Problem {
        geometry: Geometry::unit_disk(),
        coeffs: CoefficientSet::laplace(),
        data: BoundaryData::new(ScalarMap::Constant(1.0), ScalarMap::Zero),
    }
}

fn circle(c: [f64; 2], r: f64) -> ObstacleShape {
    ObstacleShape::circle(c, r)
}

fn base_trace(h: f64) -> (TriangleMesh, BoundaryTrace) {
    let m = build_mesh(&Geometry::unit_disk(), Some(&circle([0.0, 0.0], 0.3)), h).unwrap();
    let f = solve_forward(&m, &CoefficientSet::laplace(), &laplace_problem().data, None).unwrap();
    let t = normal_trace(&f, &m, &CoefficientSet::laplace(), None).unwrap();
    (m, t)
}

fn with_alpha(t: &BoundaryTrace, m: &TriangleMesh, f: impl Fn(f64) -> f64) -> BoundaryTrace {
    let mut out = t.clone();
    for (k, &n) in t.gamma_nodes.iter().enumerate() {
        let p = m.vertices[n];
        out.alpha[k] = f(p[1].atan2(p[0]));
        out.beta[k] = 0.0;
    }
    out
}

#[test]
fn projection_of_identical_traces_is_zero() {
    let (m, t) = base_trace(0.1);
    let r = residual_projection(&t, &t, &trig_test_pairs([0.0, 0.0], 6, true), &m).unwrap();
    assert!(r.iter().all(|v| *v == 0.0));
}

#[test]
fn projection_of_constant_residual() {
    let (m, t) = base_trace(0.1);
    let c = 0.37;
    let target = with_alpha(&t, &m, |_| c);
    let current = with_alpha(&t, &m, |_| 0.0);
    let test = vec![TestPair::new(ScalarMap::Constant(1.0), ScalarMap::Zero, "1")];
    let r = residual_projection(&target, &current, &test, &m).unwrap();
    let l = t.total_weight();
    assert!((r[0] + c * l).abs() <= 1e-10, "{} vs {}", r[0], -c * l);
}

#[test]
fn projection_respects_trigonometric_orthogonality() {
    let (m, t) = base_trace(0.05);
    let target = with_alpha(&t, &m, |th| (8.0 * th).cos());
    let current = with_alpha(&t, &m, |_| 0.0);
    let test = vec![TestPair::new(ScalarMap::mode([0.0, 0.0], 3, false), ScalarMap::Zero, "cos3")];
    let r = residual_projection(&target, &current, &test, &m).unwrap();
    assert!(r[0].abs() <= 1e-8, "{}", r[0]);
}

#[test]
fn projection_rejects_mismatched_traces() {
    let (m, t) = base_trace(0.1);
    let (_, t2) = base_trace(0.07);
    let r = residual_projection(&t, &t2, &trig_test_pairs([0.0, 0.0], 2, false), &m);
    assert!(matches!(r, Err(Error::MismatchedTraces(_))));
}

#[test]
fn update_shape_arithmetic() {
    let safety = Geometry::unit_disk().safety;
    let s = circle([0.0, 0.0], 0.3);
    let (same, _) = update_shape(&s, &[0.0; 5], 0.5, &safety).unwrap();
    for k in 0..64 {
        let t = 2.0 * PI * k as f64 / 64.0;
        assert_eq!(same.radius(t), s.radius(t));
    }
    let (grown, tau) = update_shape(&s, &[0.05], 1.0, &safety).unwrap();
    assert_eq!(tau, 1.0);
    for k in 0..64 {
        let t = 2.0 * PI * k as f64 / 64.0;
        assert!((grown.radius(t) - 0.35).abs() <= 1e-15);
    }
}

#[test]
fn update_shape_halves_infeasible_steps() {
    let safety = Geometry::unit_disk().safety;
    let s = circle([0.0, 0.0], 0.3);
    let (out, tau) = update_shape(&s, &[0.0, 0.5], 1.0, &safety).unwrap();
    assert!(tau < 1.0);
    out.validate(&safety).unwrap();
    assert!(matches!(update_shape(&s, &[-1e9], 1.0, &safety), Err(Error::StepCollapse { halvings: 20 })));
}

#[test]
fn true_initial_guess_is_a_fixed_point() {
    let problem = laplace_problem();
    let cfg = ReconstructionConfig::default();
    let truth = circle([0.0, 0.0], 0.3);
    let target = synthetic_observation(&problem, &truth, &cfg).unwrap();
    let res = reconstruct(target, &truth, &problem, &cfg, Some(&truth)).unwrap();
    assert_eq!(res.stop, StopReason::ResidualTolerance);
    assert_eq!(res.history.len(), 1);
    assert_eq!(res.history[0].hausdorff, Some(0.0));
}

#[test]
fn bad_direction_triggers_backtracking() {
    let problem = laplace_problem();
    let cfg = ReconstructionConfig::default();
    let truth = circle([0.0, 0.0], 0.3);
    let target = synthetic_observation(&problem, &truth, &cfg).unwrap();
    let rec = Reconstructor::new(problem, target, cfg.clone()).unwrap();
    let start = rec.evaluate(&circle([0.0, 0.0], 0.33)).unwrap();
    // growing the obstacle moves away from the truth; a small step back overshoots less
    let (next, tau) = rec.step(&start, &[-0.4, 0.0, 0.0]).unwrap().unwrap();
    assert!(tau < cfg.tau, "tau {tau}");
    assert!(next.residual <= start.residual);
}

#[test]
fn concentric_reconstruction_converges() {
    let problem = laplace_problem();
    let cfg = ReconstructionConfig::default();
    let truth = circle([0.0, 0.0], 0.3);
    let target = synthetic_observation(&problem, &truth, &cfg).unwrap();
    let res = reconstruct(target, &circle([0.0, 0.0], 0.4), &problem, &cfg, Some(&truth)).unwrap();
    assert!(res.error.is_none(), "{:?}", res.error);
    let last = res.history.last().unwrap();
    assert!(last.iteration <= 30);
    assert!(last.hausdorff.unwrap() <= 0.01, "{:?}", last.hausdorff);
    for w in res.history.windows(2) {
        assert!(w[1].residual <= w[0].residual);
    }
    for r in &res.history {
        r.shape.validate(&problem.geometry.safety).unwrap();
    }
    let csv = res.history_csv();
    assert!(csv.starts_with("iter,residual,hausdorff,cond_K,tau_eff,lambda_1,lambda_2,lambda_3,lambda_4,lambda_5\n"));
}

#[test]
fn off_center_target_is_located() {
    let problem = laplace_problem();
    let cfg = ReconstructionConfig::default();
    let truth = circle([0.1, 0.0], 0.3);
    let target = synthetic_observation(&problem, &truth, &cfg).unwrap();
    let res = reconstruct(target, &circle([0.0, 0.0], 0.3), &problem, &cfg, Some(&truth)).unwrap();
    let c = res.final_shape().unwrap().centroid();
    assert!((c[0] - 0.1).hypot(c[1]) <= 0.02, "{c:?}");
}

fn internal_problem(b: f64, big_a: f64) -> (Problem, ReconstructionConfig) {
    let geometry = Geometry::unit_disk();
    let omega = ObservationDisk::default_for(&geometry);
    let problem = Problem {
        geometry,
        coeffs: CoefficientSet::new(0.0, b, big_a, 0.0),
        data: BoundaryData::new(ScalarMap::Zero, ScalarMap::Constant(1.0)),
    };
    let cfg = ReconstructionConfig {
        basis_size: 3,
        test_count: 6,
        mode: ObservationMode::Internal { omega, resolution: 21 },
        ..ReconstructionConfig::default()
    };
    (problem, cfg)
}

#[test]
fn internal_reconstruction_with_coupling() {
    let (problem, cfg) = internal_problem(2.0, 0.0);
    let truth = circle([0.0, 0.0], 0.3);
    let target = synthetic_observation(&problem, &truth, &cfg).unwrap();
    let res = reconstruct(target, &circle([0.0, 0.0], 0.4), &problem, &cfg, Some(&truth)).unwrap();
    assert!(res.error.is_none(), "{:?}", res.error);
    assert!(res.history.last().unwrap().hausdorff.unwrap() <= 0.01);
}

#[test]
fn internal_mode_without_coupling_reports_rank_deficiency() {
    let (problem, cfg) = internal_problem(0.0, 2.0);
    let truth = circle([0.0, 0.0], 0.3);
    let target = synthetic_observation(&problem, &truth, &cfg).unwrap();
    let res = reconstruct(target, &circle([0.0, 0.0], 0.4), &problem, &cfg, Some(&truth)).unwrap();
    assert_eq!(res.stop, StopReason::Failed);
    assert!(matches!(res.error, Some(Error::RankDeficient(_))), "{:?}", res.error);
    assert_eq!(res.history.len(), 1);
}

#[test]
fn noise_is_seeded() {
    let problem = laplace_problem();
    let cfg = ReconstructionConfig {
        mesh_size: 0.1,
        ..ReconstructionConfig::default()
    };
    let obs = synthetic_observation(&problem, &circle([0.0, 0.0], 0.3), &cfg).unwrap();
    let a = add_noise(&obs, 0.01, 7);
    let b = add_noise(&obs, 0.01, 7);
    let c = add_noise(&obs, 0.01, 8);
    assert_eq!(a.to_csv(), b.to_csv());
    assert_ne!(a.to_csv(), c.to_csv());
    assert_eq!(add_noise(&obs, 0.0, 7), obs);
}

#[test]
fn invalid_config_is_rejected() {
    let problem = laplace_problem();
    let cfg = ReconstructionConfig::default();
    let obs = synthetic_observation(&problem, &circle([0.0, 0.0], 0.3), &cfg).unwrap();
    for bad in [
        ReconstructionConfig { tau: 0.0, ..cfg.clone() },
        ReconstructionConfig { tau: 1.5, ..cfg.clone() },
        ReconstructionConfig { basis_size: 0, ..cfg.clone() },
        ReconstructionConfig { residual_tol: 0.0, ..cfg.clone() },
    ] {
        assert!(Reconstructor::new(problem.clone(), obs.clone(), bad).is_err());
    }
}

#[test]
fn regularized_solve_recovers_well_conditioned_systems() {
    let k = nalgebra::DMatrix::from_row_slice(3, 2, &[2.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
    let x = [0.3, -0.7];
    let b: Vec<f64> = (0..3).map(|i| k[(i, 0)] * x[0] + k[(i, 1)] * x[1]).collect();
    let (d, cond, rank) = regularized_solve(&k, &b, 1e-12, 1e-10);
    assert_eq!(rank, 2);
    assert!(cond.is_finite());
    assert!((d[0] - x[0]).abs() < 1e-9 && (d[1] - x[1]).abs() < 1e-9);
    let z = nalgebra::DMatrix::zeros(3, 2);
    let (d0, _, r0) = regularized_solve(&z, &b, 1e-8, 1e-10);
    assert_eq!(r0, 0);
    assert!(d0.iter().all(|v| *v == 0.0));
}
