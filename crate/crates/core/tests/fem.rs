use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use obstacle_lab::fem::assembly::{free_node_map, restrict, scalar_matrices};
use obstacle_lab::fem::solve::{forward_system, pullback_system};
use obstacle_lab::fem::*;
use obstacle_lab::geometry::*;
use proptest::prelude::*;

fn annulus(h: f64) -> TriangleMesh {
    build_mesh(&Geometry::unit_disk(), Some(&ObstacleShape::circle([0.0, 0.0], 0.3)), h).unwrap()
}

/// First root of J0 squared: shoot u'' + u'/r + k u = 0 from the origin and bisect on u(1) = 0.
fn bessel_shooting_eigenvalue() -> f64 {
    let endpoint = |k: f64| {
        let n = 4000;
        let r0 = 1e-6;
        let dr = (1.0 - r0) / n as f64;
        let (mut r, mut u, mut v) = (r0, 1.0 - k * r0 * r0 / 4.0, -k * r0 / 2.0);
        let f = |r: f64, u: f64, v: f64| (v, -v / r - k * u);
        for _ in 0..n {
            let (a1, b1) = f(r, u, v);
            let (a2, b2) = f(r + dr / 2.0, u + dr / 2.0 * a1, v + dr / 2.0 * b1);
            let (a3, b3) = f(r + dr / 2.0, u + dr / 2.0 * a2, v + dr / 2.0 * b2);
            let (a4, b4) = f(r + dr, u + dr * a3, v + dr * b3);
            u += dr / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
            v += dr / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
            r += dr;
        }
        u
    };
    let (mut lo, mut hi) = (4.0, 8.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if endpoint(lo) * endpoint(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn bessel_oracle_matches_frozen_value() {
    let k = bessel_shooting_eigenvalue();
    assert!((k - 5.783_185_96).abs() < 1e-6, "{k}");
    assert!((1.0 / k - 0.17291).abs() < 1e-5);
}

#[test]
fn poincare_unit_disk() {
    let m = build_mesh(&Geometry::unit_disk(), None, 0.05).unwrap();
    let mu1 = poincare_constant(&m).unwrap();
    let oracle = 1.0 / bessel_shooting_eigenvalue();
    assert!(((mu1 - oracle) / oracle).abs() < 0.02, "{mu1}");
}

#[test]
fn poincare_unit_square() {
    let g = Geometry {
        outer: OuterBoundary::unit_square(),
        gamma: ObservationArc::full(),
        safety: SafetyRegion::new([0.5, 0.5], 0.3),
    };
    let m = build_mesh(&g, None, 0.05).unwrap();
    let mu1 = poincare_constant(&m).unwrap();
    let oracle = 1.0 / (2.0 * PI * PI);
    assert!(((mu1 - oracle) / oracle).abs() < 0.02, "{mu1}");
}

#[test]
fn poincare_scales_with_square_of_size() {
    let big = Geometry {
        outer: OuterBoundary::Disk { center: [0.0, 0.0], radius: 2.0 },
        gamma: ObservationArc::full(),
        safety: SafetyRegion::new([0.0, 0.0], 1.2),
    };
    let m1 = poincare_constant(&build_mesh(&Geometry::unit_disk(), None, 0.1).unwrap()).unwrap();
    let m2 = poincare_constant(&build_mesh(&big, None, 0.2).unwrap()).unwrap();
    assert!(((m2 - 4.0 * m1) / (4.0 * m1)).abs() < 0.02, "{m1} {m2}");
}

#[test]
fn poincare_rejects_obstacle_mesh() {
    assert!(poincare_constant(&annulus(0.1)).is_err());
}

#[test]
fn zero_data_gives_zero_solution() {
    let m = annulus(0.1);
    let s = solve_forward(&m, &CoefficientSet::new(1.0, 2.0, -3.0, 0.5), &BoundaryData::zero(), None).unwrap();
    assert!(s.max_abs() <= 1e-12);
}

#[test]
fn annulus_harmonic_solution() {
    let m = annulus(0.05);
    let data = BoundaryData::new(ScalarMap::Constant(1.0), ScalarMap::Zero);
    let s = solve_forward(&m, &CoefficientSet::laplace(), &data, None).unwrap();
    let exact = |p: [f64; 2]| (p[0].hypot(p[1]) / 0.3).ln() / (1.0f64 / 0.3).ln();
    let err = l2_error_against(&m, &s.y, exact);
    let norm = l2_error_against(&m, &vec![0.0; m.num_nodes()], exact);
    assert!(err / norm <= 1e-2, "{}", err / norm);
    assert!(s.z.iter().all(|v| v.abs() < 1e-14));
    for &(i, _) in &m.obstacle_nodes {
        assert_eq!(s.y[i], 0.0);
        assert_eq!(s.z[i], 0.0);
    }
}

struct Manufactured;

impl Manufactured {
    const C: f64 = 0.09;
    fn w(p: [f64; 2]) -> f64 {
        let r2 = p[0] * p[0] + p[1] * p[1];
        (1.0 - r2) * (r2 - Self::C)
    }
    fn grad_w(p: [f64; 2]) -> [f64; 2] {
        let r2 = p[0] * p[0] + p[1] * p[1];
        let f = -4.0 * r2 + 2.0 * (1.0 + Self::C);
        [f * p[0], f * p[1]]
    }
    fn lap_w(p: [f64; 2]) -> f64 {
        -16.0 * (p[0] * p[0] + p[1] * p[1]) + 4.0 * (1.0 + Self::C)
    }
    fn y(p: [f64; 2]) -> f64 {
        (PI * p[0]).sin() * (PI * p[1]).sin() * Self::w(p)
    }
    fn z(p: [f64; 2]) -> f64 {
        p[0] * p[1] * Self::w(p)
    }
    fn lap_y(p: [f64; 2]) -> f64 {
        let u = (PI * p[0]).sin() * (PI * p[1]).sin();
        let gu = [PI * (PI * p[0]).cos() * (PI * p[1]).sin(), PI * (PI * p[0]).sin() * (PI * p[1]).cos()];
        let gw = Self::grad_w(p);
        -2.0 * PI * PI * u * Self::w(p) + 2.0 * (gu[0] * gw[0] + gu[1] * gw[1]) + u * Self::lap_w(p)
    }
    fn lap_z(p: [f64; 2]) -> f64 {
        let gw = Self::grad_w(p);
        2.0 * (p[1] * gw[0] + p[0] * gw[1]) + p[0] * p[1] * Self::lap_w(p)
    }
    fn sources(c: CoefficientSet) -> Sources {
        Sources::new(
            ScalarMap::function(move |p| -Self::lap_y(p) + c.a * Self::y(p) + c.b * Self::z(p)),
            ScalarMap::function(move |p| -Self::lap_z(p) + c.big_a * Self::y(p) + c.big_b * Self::z(p)),
        )
    }
}

#[test]
fn manufactured_laplacian_oracle_is_consistent() {
    // centered finite differences of the closed forms
    let p = [0.41, -0.27];
    let e = 1e-4;
    for (f, lap) in [
        (Manufactured::y as fn([f64; 2]) -> f64, Manufactured::lap_y as fn([f64; 2]) -> f64),
        (Manufactured::z, Manufactured::lap_z),
    ] {
        let fd = (f([p[0] + e, p[1]]) + f([p[0] - e, p[1]]) + f([p[0], p[1] + e]) + f([p[0], p[1] - e]) - 4.0 * f(p))
            / (e * e);
        assert!((fd - lap(p)).abs() < 1e-5, "{fd} {}", lap(p));
    }
}

#[test]
fn manufactured_convergence_order() {
    let c = CoefficientSet::new(1.0, 2.0, -1.0, 0.5);
    let src = Manufactured::sources(c);
    let hs = [0.1, 0.05, 0.025];
    let mut ey = Vec::new();
    let mut ez = Vec::new();
    for h in hs {
        let m = annulus(h);
        let s = solve_forward(&m, &c, &BoundaryData::zero(), Some(&src)).unwrap();
        ey.push(l2_error_against(&m, &s.y, Manufactured::y));
        ez.push(l2_error_against(&m, &s.z, Manufactured::z));
    }
    let order = |e: &[f64]| (e[0] / e[2]).ln() / (hs[0] / hs[2]).ln();
    assert!(order(&ey) >= 1.8, "{ey:?}");
    assert!(order(&ez) >= 1.8, "{ez:?}");
}

#[test]
fn pullback_at_zero_sigma_is_the_forward_system() {
    let m = annulus(0.1);
    let g = Geometry::unit_disk();
    let c = CoefficientSet::new(0.5, 1.0, -2.0, 0.0);
    let data = BoundaryData::new(ScalarMap::mode([0.0, 0.0], 2, false), ScalarMap::Constant(0.5));
    let fwd = forward_system(&m, &c, &data);
    let mu = DeformationField::radial([0.0, 0.0], 0.1, Cutoff::new(0.0, 0.2, 0.4, 0.6).unwrap(), g.safety).unwrap();
    let pb0 = pullback_system(&m, &mu, 0.0, &c, &data).unwrap();
    assert_eq!(fwd.matrix, pb0.matrix);
    assert_eq!(fwd.rhs, pb0.rhs);
    let zero = DeformationField::zero(g.safety);
    let pbz = pullback_system(&m, &zero, 0.7, &c, &data).unwrap();
    assert_eq!(fwd.matrix, pbz.matrix);
    let s = solve_forward(&m, &c, &data, None).unwrap();
    let p = solve_pullback(&m, &mu, 0.0, &c, &data).unwrap();
    assert_eq!(s.y, p.lifted.y);
    assert_eq!(s.z, p.lifted.z);
}

#[test]
fn pullback_load_does_not_depend_on_mu() {
    let m = annulus(0.1);
    let g = Geometry::unit_disk();
    let c = CoefficientSet::laplace();
    let data = BoundaryData::new(ScalarMap::Constant(1.0), ScalarMap::mode([0.0, 0.0], 1, true));
    let cut = Cutoff::new(0.0, 0.2, 0.4, 0.6).unwrap();
    let a = solve_pullback(&m, &DeformationField::radial([0.0, 0.0], 0.1, cut, g.safety).unwrap(), 0.5, &c, &data).unwrap();
    let b = solve_pullback(&m, &DeformationField::rotational([0.0, 0.0], 0.2, cut, g.safety).unwrap(), 0.3, &c, &data)
        .unwrap();
    assert_eq!(a.load, b.load);
    assert_eq!(a.lifting, b.lifting);
}

#[test]
fn pullback_matches_deformed_mesh_solve() {
    let g = Geometry::unit_disk();
    let mu = DeformationField::radial([0.0, 0.0], 1.0, Cutoff::new(0.0, 0.2, 0.4, 0.6).unwrap(), g.safety).unwrap();
    let data = BoundaryData::new(ScalarMap::Constant(1.0), ScalarMap::Zero);
    let c = CoefficientSet::laplace();
    let gap = |h: f64| {
        let m = annulus(h);
        let pb = solve_pullback(&m, &mu, 0.1, &c, &data).unwrap();
        let md = m.apply_deformation(&mu, 0.1).unwrap();
        let f = solve_forward(&md, &c, &data, None).unwrap();
        relative_l2_difference(&m, &f.y, &pb.lifted.y)
    };
    let (g1, g2) = (gap(0.05), gap(0.025));
    assert!(g1 <= 5e-2, "{g1}");
    assert!(g1 / g2 >= 3.0, "{g1} {g2}");
}

#[test]
fn adjoint_equals_forward_when_self_adjoint() {
    let g = Geometry::unit_disk().with_gamma(ObservationArc::new(0.0, PI));
    let m = build_mesh(&g, Some(&ObstacleShape::circle([0.0, 0.0], 0.3)), 0.1).unwrap();
    let c = CoefficientSet::new(1.0, 0.7, 0.7, 2.0);
    let eta = ScalarMap::mode([0.0, 0.0], 1, false);
    let theta = ScalarMap::Constant(0.3);
    let adj = solve_adjoint(&m, &c, &eta, &theta).unwrap();
    let dir = obstacle_lab::fem::solve::gamma_dirichlet(&m, &eta, &theta);
    let fwd = solve_dirichlet(&m, c.coupling(), None, &dir, None).unwrap();
    for i in 0..m.num_nodes() {
        assert!((adj.y[i] - fwd.y[i]).abs() <= 1e-12);
        assert!((adj.z[i] - fwd.z[i]).abs() <= 1e-12);
    }
}

#[test]
fn adjoint_transposition_matters() {
    let g = Geometry::unit_disk().with_gamma(ObservationArc::new(0.0, PI / 2.0));
    let m = build_mesh(&g, Some(&ObstacleShape::circle([0.0, 0.0], 0.3)), 0.1).unwrap();
    let c = CoefficientSet::new(0.0, 2.0, 3.0, 0.0);
    let eta = ScalarMap::Constant(1.0);
    let adj = solve_adjoint(&m, &c, &eta, &ScalarMap::Zero).unwrap();
    let dir = obstacle_lab::fem::solve::gamma_dirichlet(&m, &eta, &ScalarMap::Zero);
    let fwd = solve_dirichlet(&m, c.coupling(), None, &dir, None).unwrap();
    let d: Vec<f64> = adj.z.iter().zip(&fwd.z).map(|(a, b)| a - b).collect();
    assert!(l2_norm(&m, &d) >= 1e-3);
    let zero = solve_adjoint(&m, &c, &ScalarMap::Zero, &ScalarMap::Zero).unwrap();
    assert!(zero.max_abs() == 0.0);
}

#[test]
fn coercivity_bound() {
    let m = build_mesh(&Geometry::unit_disk(), Some(&ObstacleShape::circle([0.0, 0.0], 0.3)), 0.2).unwrap();
    let full = build_mesh(&Geometry::unit_disk(), None, 0.1).unwrap();
    let mu1 = poincare_constant(&full).unwrap();
    let (free, map) = free_node_map(&m);
    let (k, _) = scalar_matrices(&m);
    let k = restrict(&k, &map, free.len());
    let kd = DMatrix::from_fn(k.rows, k.cols, |i, j| k.get(i, j));
    let kmin = SymmetricEigen::new(kd).eigenvalues.min();
    for coeffs in [
        CoefficientSet::new(-2.0, 1.0, 0.5, -1.0),
        CoefficientSet::new(0.0, 3.0, -3.0, 0.0),
        CoefficientSet::new(-4.0, 0.0, 0.0, 1.0),
    ] {
        let mut c = coeffs;
        let v = certify(&mut c, mu1);
        assert!(v.is_admissible(), "{v}");
        let lambda = c.lambda_margin.unwrap();
        let sys = forward_system(&m, &c, &BoundaryData::zero());
        let a = &sys.matrix;
        let sym = DMatrix::from_fn(a.rows, a.cols, |i, j| 0.5 * (a.get(i, j) + a.get(j, i)));
        let emin = SymmetricEigen::new(sym).eigenvalues.min();
        assert!(emin >= (1.0 - lambda * mu1) * kmin * 0.95, "{emin} {kmin}");
        assert!(a.pattern_is_symmetric());
        assert_eq!(a.rows, 2 * free.len());
    }
}

#[test]
fn unique_continuation_smoke() {
    let m = annulus(0.1);
    let c = CoefficientSet::new(1.0, 1.0, -1.0, 1.0);
    let omega_center = [-0.7, 0.0];
    let src = Sources::new(
        ScalarMap::function(|p| if (p[0] - 0.7).hypot(p[1]) < 0.15 { 1.0 } else { 0.0 }),
        ScalarMap::Zero,
    );
    let s = solve_forward(&m, &c, &BoundaryData::zero(), Some(&src)).unwrap();
    let inside = (0..m.num_nodes())
        .filter(|&i| {
            let p = m.vertices[i];
            (p[0] - omega_center[0]).hypot(p[1] - omega_center[1]) < 0.15
        })
        .map(|i| s.y[i].abs() + s.z[i].abs())
        .fold(0.0, f64::max);
    assert!(inside > 1e-8);
}

#[test]
fn inadmissible_coefficients_warn() {
    let m = annulus(0.1);
    let c = CoefficientSet::new(-10.0, 0.0, 0.0, -10.0);
    let s = solve_forward(&m, &c, &BoundaryData::new(ScalarMap::Constant(1.0), ScalarMap::Zero), None).unwrap();
    assert!(!s.warnings.is_empty());
    let ok = solve_forward(&m, &CoefficientSet::laplace(), &BoundaryData::zero(), None).unwrap();
    assert!(ok.warnings.is_empty());
}

#[test]
fn csv_headers() {
    let m = annulus(0.2);
    let s = FieldPair::zeros(m.num_nodes());
    let csv = export::field_csv(&m, &s);
    assert!(csv.starts_with("node_id,x,y,value_y,value_z\n"));
    assert_eq!(csv.lines().count(), m.num_nodes() + 1);
    assert_eq!(export::report_csv(&[("mu1", 0.5)]), "quantity,value\nmu1,5e-1\n");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn solution_is_linear_in_data(c0 in -1.0..1.0f64, c1 in -1.0..1.0f64, s in -2.0..2.0f64) {
        let m = annulus(0.2);
        let c = CoefficientSet::new(0.5, 1.0, -1.0, 0.5);
        let d1 = BoundaryData::new(ScalarMap::Constant(c0), ScalarMap::mode([0.0, 0.0], 1, false));
        let d2 = BoundaryData::new(ScalarMap::mode([0.0, 0.0], 2, true), ScalarMap::Constant(c1));
        let sum = BoundaryData::new(
            ScalarMap::function(move |p| c0 + s * ScalarMap::mode([0.0, 0.0], 2, true).eval(p)),
            ScalarMap::function(move |p| ScalarMap::mode([0.0, 0.0], 1, false).eval(p) + s * c1),
        );
        let u1 = solve_forward(&m, &c, &d1, None).unwrap();
        let u2 = solve_forward(&m, &c, &d2, None).unwrap();
        let us = solve_forward(&m, &c, &sum, None).unwrap();
        let comb = u1.axpy(s, &u2);
        for i in 0..m.num_nodes() {
            prop_assert!((comb.y[i] - us.y[i]).abs() < 1e-12);
            prop_assert!((comb.z[i] - us.z[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn admissible_bound_is_stable(a in 0.0..1.0f64, b in -0.5..0.5f64, big_a in -0.5..0.5f64, big_b in 0.0..1.0f64) {
        // well-posedness constant stays within a band across mild admissible draws
        let m = annulus(0.2);
        let data = BoundaryData::new(ScalarMap::Constant(1.0), ScalarMap::Zero);
        let base = solve_forward(&m, &CoefficientSet::laplace(), &data, None).unwrap();
        let s = solve_forward(&m, &CoefficientSet::new(a, b, big_a, big_b), &data, None).unwrap();
        let norm = |f: &FieldPair| (l2_norm(&m, &f.y).powi(2) + h1_seminorm(&m, &f.y).powi(2)
            + l2_norm(&m, &f.z).powi(2) + h1_seminorm(&m, &f.z).powi(2)).sqrt();
        let ratio = norm(&s) / norm(&base);
        prop_assert!((0.9..=1.1).contains(&ratio), "{}", ratio);
    }
}
