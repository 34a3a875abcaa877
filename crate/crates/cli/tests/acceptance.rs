//! Acceptance suite: one line per criterion, `PASS`, `FAIL` or `KNOWN-FAIL`.
//!
//! Runs without the libtest harness so the table is always printed. Exits nonzero when a
//! criterion fails that is not listed in `KNOWN_FAILURES`.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::Instant;

use obstacle_lab::carleman::*;
use obstacle_lab::fem::*;
use obstacle_lab::geometry::*;
use obstacle_lab::observation::{normal_trace, DistanceMode, ObservationDisk};
use obstacle_lab::reconstruction::*;
use obstacle_lab::shape_gradient::*;
use obstacle_lab::stability::*;
use obstacle_lab::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Sub-checks that fail for documented reasons (see notes/decisions.md).
const KNOWN_FAILURES: &[&str] = &["11.ratio"];

struct Check {
    id: &'static str,
    pass: bool,
    detail: String,
}

#[derive(Default)]
struct Criterion {
    checks: Vec<Check>,
}

impl Criterion {
    fn check(&mut self, id: &'static str, pass: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            id,
            pass,
            detail: detail.into(),
        });
    }

    fn fail(&mut self, id: &'static str, e: impl std::fmt::Display) {
        self.check(id, false, format!("error: {e}"));
    }
}

fn unit_problem(coeffs: CoefficientSet, data: BoundaryData) -> Problem {
    Problem {
        geometry: Geometry::unit_disk(),
        coeffs,
        data,
    }
}

fn laplace_problem() -> Problem {
    unit_problem(CoefficientSet::laplace(), BoundaryData::new(ScalarMap::Constant(1.0), ScalarMap::Zero))
}

fn circle(c: [f64; 2], r: f64) -> ObstacleShape {
    ObstacleShape::circle(c, r)
}

fn annulus(h: f64) -> obstacle_lab::Result<TriangleMesh> {
    build_mesh(&Geometry::unit_disk(), Some(&circle([0.0, 0.0], 0.3)), h)
}

fn radial(amplitude: f64) -> DeformationField {
    let safety = Geometry::unit_disk().safety;
    DeformationField::radial([0.0, 0.0], amplitude, Cutoff::new(0.0, 0.2, 0.4, 0.6).unwrap(), safety).unwrap()
}

// ---------------------------------------------------------------- 1

/// y = sin(pi x) sin(pi y) w, z = x y w with w = (1 - r^2)(r^2 - 0.09): zero on both circles.
mod manufactured {
    use super::PI;

    const C: f64 = 0.09;

    fn w(p: [f64; 2]) -> f64 {
        let r2 = p[0] * p[0] + p[1] * p[1];
        (1.0 - r2) * (r2 - C)
    }
    fn grad_w(p: [f64; 2]) -> [f64; 2] {
        let f = -4.0 * (p[0] * p[0] + p[1] * p[1]) + 2.0 * (1.0 + C);
        [f * p[0], f * p[1]]
    }
    fn lap_w(p: [f64; 2]) -> f64 {
        -16.0 * (p[0] * p[0] + p[1] * p[1]) + 4.0 * (1.0 + C)
    }
    pub fn y(p: [f64; 2]) -> f64 {
        (PI * p[0]).sin() * (PI * p[1]).sin() * w(p)
    }
    pub fn z(p: [f64; 2]) -> f64 {
        p[0] * p[1] * w(p)
    }
    pub fn lap_y(p: [f64; 2]) -> f64 {
        let u = (PI * p[0]).sin() * (PI * p[1]).sin();
        let gu = [PI * (PI * p[0]).cos() * (PI * p[1]).sin(), PI * (PI * p[0]).sin() * (PI * p[1]).cos()];
        let gw = grad_w(p);
        -2.0 * PI * PI * u * w(p) + 2.0 * (gu[0] * gw[0] + gu[1] * gw[1]) + u * lap_w(p)
    }
    pub fn lap_z(p: [f64; 2]) -> f64 {
        let gw = grad_w(p);
        2.0 * (p[1] * gw[0] + p[0] * gw[1]) + p[0] * p[1] * lap_w(p)
    }
}

fn criterion_1(c: &mut Criterion) {
    let start = Instant::now();
    let k = CoefficientSet::new(1.0, 2.0, -1.0, 0.5);
    let src = Sources::new(
        ScalarMap::function(move |p| -manufactured::lap_y(p) + k.a * manufactured::y(p) + k.b * manufactured::z(p)),
        ScalarMap::function(move |p| -manufactured::lap_z(p) + k.big_a * manufactured::y(p) + k.big_b * manufactured::z(p)),
    );
    let hs = [0.1, 0.05, 0.025];
    let mut ey = Vec::new();
    let mut ez = Vec::new();
    for h in hs {
        let run = annulus(h).and_then(|m| solve_forward(&m, &k, &BoundaryData::zero(), Some(&src)).map(|s| (m, s)));
        match run {
            Ok((m, s)) => {
                ey.push(l2_error_against(&m, &s.y, manufactured::y));
                ez.push(l2_error_against(&m, &s.z, manufactured::z));
            }
            Err(e) => return c.fail("1.order", e),
        }
    }
    let order = |e: &[f64]| (e[0] / e[2]).ln() / (hs[0] / hs[2]).ln();
    let (oy, oz) = (order(&ey), order(&ez));
    c.check("1.order", oy >= 1.8 && oz >= 1.8, format!("L2 order y {oy:.3}, z {oz:.3} (>= 1.8)"));
    let t = start.elapsed().as_secs_f64();
    c.check("1.runtime", t <= 60.0, format!("{t:.1} s (<= 60)"));
}

// ---------------------------------------------------------------- 2

fn criterion_2(c: &mut Criterion) {
    let p = laplace_problem();
    let run = annulus(0.05).and_then(|m| solve_forward(&m, &p.coeffs, &p.data, None).map(|s| (m, s)));
    let (m, s) = match run {
        Ok(x) => x,
        Err(e) => return c.fail("2.solution", e),
    };
    let exact = |q: [f64; 2]| (q[0].hypot(q[1]) / 0.3).ln() / (1.0f64 / 0.3).ln();
    let rel = l2_error_against(&m, &s.y, exact) / l2_error_against(&m, &vec![0.0; m.num_nodes()], exact);
    c.check("2.solution", rel <= 1e-2, format!("relative L2 error {rel:.2e} (<= 1e-2)"));
    let flux = 1.0 / (1.0f64 / 0.3).ln();
    match normal_trace(&s, &m, &p.coeffs, None) {
        Ok(t) => {
            let worst = t.alpha.iter().map(|a| ((a - flux) / flux).abs()).fold(0.0, f64::max);
            c.check("2.flux", worst <= 0.02, format!("max flux error {:.3}% vs {flux:.5} (<= 2%)", 100.0 * worst));
        }
        Err(e) => c.fail("2.flux", e),
    }
}

// ---------------------------------------------------------------- 3

/// First Dirichlet eigenvalue of the unit disk by RK4 shooting of the radial Bessel equation.
fn bessel_eigenvalue() -> f64 {
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

fn criterion_3(c: &mut Criterion) {
    let start = Instant::now();
    let disk = 1.0 / bessel_eigenvalue();
    let square = Geometry {
        outer: OuterBoundary::unit_square(),
        gamma: ObservationArc::full(),
        safety: SafetyRegion::new([0.5, 0.5], 0.3),
    };
    for (id, g, oracle) in [
        ("3.disk", Geometry::unit_disk(), disk),
        ("3.square", square, 1.0 / (2.0 * PI * PI)),
    ] {
        match build_mesh(&g, None, 0.05).and_then(|m| poincare_constant(&m)) {
            Ok(mu1) => {
                let rel = (mu1 - oracle).abs() / oracle;
                c.check(id, rel <= 0.02, format!("mu1 {mu1:.5} vs {oracle:.5}, {:.2}% (<= 2%)", 100.0 * rel));
            }
            Err(e) => c.fail(id, e),
        }
    }
    let t = start.elapsed().as_secs_f64();
    c.check("3.runtime", t <= 120.0, format!("{t:.1} s (<= 120)"));
}

// ---------------------------------------------------------------- 4

fn criterion_4(c: &mut Criterion) {
    let p = laplace_problem();
    let mu = radial(1.0);
    let gap = |h: f64| -> obstacle_lab::Result<f64> {
        let m = annulus(h)?;
        let pb = solve_pullback(&m, &mu, 0.1, &p.coeffs, &p.data)?;
        let f = solve_forward(&m.apply_deformation(&mu, 0.1)?, &p.coeffs, &p.data, None)?;
        Ok(relative_l2_difference(&m, &f.y, &pb.lifted.y))
    };
    match (gap(0.05), gap(0.025)) {
        (Ok(g1), Ok(g2)) => {
            c.check("4.gap", g1 <= 5e-2, format!("relative L2 gap {g1:.3e} at h = 0.05 (<= 5e-2)"));
            c.check("4.shrink", g1 / g2 >= 3.0, format!("gap ratio {:.2} to h = 0.025 (>= 3)", g1 / g2));
        }
        (Err(e), _) | (_, Err(e)) => c.fail("4.gap", e),
    }
}

// ---------------------------------------------------------------- 5

fn criterion_5(c: &mut Criterion) {
    let p = laplace_problem();
    let test = TestPair::new(ScalarMap::Constant(1.0), ScalarMap::Zero, "1");
    let run = annulus(0.03).and_then(|m| adjoint_identity_check(&m, &p.coeffs, &p.data, &radial(1.5), &test, &[0.04, 0.02, 0.01, 0.005]));
    let tab = match run {
        Ok(t) => t,
        Err(e) => return c.fail("5.slope", e),
    };
    match tab.remainder_slope() {
        Some(s) => c.check("5.slope", (1.7..=2.3).contains(&s), format!("remainder slope {s:.3} (in [1.7, 2.3])")),
        None => c.check("5.slope", false, "no slope"),
    }
    match tab.rows.iter().find(|r| r.sigma == 0.01) {
        Some(r) => {
            let agree = (r.lhs / r.sigma - tab.rhs).abs() / tab.rhs.abs();
            c.check("5.agree", agree <= 0.03, format!("LHS/sigma vs RHS {:.2}% at sigma = 0.01 (<= 3%)", 100.0 * agree));
        }
        None => c.check("5.agree", false, "sigma = 0.01 missing"),
    }
}

// ---------------------------------------------------------------- 6

fn criterion_6(c: &mut Criterion) {
    let shape = ObstacleShape::new([0.05, -0.03], 0.3, vec![0.0, 0.02, 0.0, 0.01, 0.0]);
    let coeffs = CoefficientSet::new(1.0, 0.5, -0.5, 1.0);
    let data = BoundaryData::new(ScalarMap::function(|p| 1.0 + 0.5 * p[0]), ScalarMap::function(|p| 0.5 + p[1]));
    let tests = trig_test_pairs([0.0, 0.0], 5, true);
    let run = || -> obstacle_lab::Result<Vec<f64>> {
        let m = build_mesh(&Geometry::unit_disk(), Some(&shape), 0.03)?;
        let fwd = solve_forward(&m, &coeffs, &data, None)?;
        let k = sensitivity_matrix(&m, &coeffs, &fwd, &trig_basis(5, 0.0), &tests)?;
        let base = normal_trace(&fwd, &m, &coeffs, None)?;
        let sigma = 1e-3;
        let mut errs = Vec::new();
        for i in 0..5 {
            let mut e = vec![0.0; 5];
            e[i] = 1.0;
            let m2 = move_obstacle(&m, &shape.displaced(&e, sigma))?;
            let f2 = solve_forward(&m2, &coeffs, &data, None)?;
            let t2 = normal_trace(&f2, &m2, &coeffs, None)?;
            let col = k.column(i);
            let (mut num, mut den) = (0.0, 0.0);
            for (j, t) in tests.iter().enumerate() {
                let fd = (t.project(&t2, &m2) - t.project(&base, &m)) / sigma;
                num += (fd - col[j]).powi(2);
                den += col[j] * col[j];
            }
            errs.push((num / den).sqrt());
        }
        Ok(errs)
    };
    match run() {
        Ok(errs) => {
            let worst = errs.iter().copied().fold(0.0, f64::max);
            c.check("6.columns", worst <= 0.05, format!("worst column mismatch {:.2}% over p = 5 (<= 5%)", 100.0 * worst));
        }
        Err(e) => c.fail("6.columns", e),
    }
}

// ---------------------------------------------------------------- 7, 8, 9

const H_STAB: f64 = 0.05;

fn criterion_7(c: &mut Criterion) {
    let p = laplace_problem();
    let d0 = circle([0.0, 0.0], 0.3);
    let grid = default_sigma_grid();
    let run = observation_curve(&p, &d0, &radial(1.0), &grid, &ObservationMode::Boundary, DistanceMode::L2, H_STAB).and_then(|c| fit_order(&c));
    match run {
        Ok(f) => c.check(
            "7.radial",
            (0.9..=1.1).contains(&f.k_raw) && f.residual <= 0.05,
            format!("k_raw {:.4} (in [0.9, 1.1]), log residual {:.3e} (<= 0.05)", f.k_raw, f.residual),
        ),
        Err(e) => c.fail("7.radial", e),
    }
    let rot = DeformationField::rotational([0.0, 0.0], 1.0, Cutoff::new(0.0, 0.2, 0.4, 0.6).unwrap(), p.geometry.safety).unwrap();
    match observation_curve(&p, &d0, &rot, &grid, &ObservationMode::Boundary, DistanceMode::L2, H_STAB) {
        Ok(curve) => {
            let worst = curve.samples.iter().map(|s| if s.valid { s.distance } else { f64::INFINITY }).fold(0.0, f64::max);
            c.check(
                "7.tangential",
                worst <= 10.0 * curve.floor,
                format!("max distance {worst:.3e} vs 10 x floor {:.3e} at h = {H_STAB}", 10.0 * curve.floor),
            );
        }
        Err(e) => c.fail("7.tangential", e),
    }
}

fn criterion_8(c: &mut Criterion) {
    let p = laplace_problem();
    let d0 = circle([0.0, 0.0], 0.3);
    match discrimination_test(&p, &d0, &circle([0.0, 0.0], 0.35), &ObservationMode::Boundary, DistanceMode::L2, H_STAB) {
        Ok(r) => c.check(
            "8.concentric",
            r.distance > 10.0 * r.floor && r.verdict == Verdict::Distinguishable,
            format!("distance {:.3e} vs 10 x floor {:.3e}", r.distance, 10.0 * r.floor),
        ),
        Err(e) => c.fail("8.concentric", e),
    }
    let zero = Problem {
        data: BoundaryData::zero(),
        ..laplace_problem()
    };
    match discrimination_test(&zero, &d0, &circle([0.0, 0.0], 0.35), &ObservationMode::Boundary, DistanceMode::L2, H_STAB) {
        Ok(r) => c.check(
            "8.zero-data",
            r.verdict == Verdict::Indistinguishable,
            format!("distance {:.1e}, verdict {:?}", r.distance, r.verdict),
        ),
        Err(e) => c.fail("8.zero-data", e),
    }
}

fn internal_mode() -> ObservationMode {
    ObservationMode::Internal {
        omega: ObservationDisk::default_for(&Geometry::unit_disk()),
        resolution: 21,
    }
}

fn criterion_9(c: &mut Criterion) {
    let data = BoundaryData::new(ScalarMap::Zero, ScalarMap::Constant(1.0));
    let coupled = unit_problem(CoefficientSet::new(0.0, 2.0, 0.0, 0.0), data.clone());
    let d0 = circle([0.0, 0.0], 0.3);
    let mode = internal_mode();
    let fit = observation_curve(&coupled, &d0, &radial(1.0), &default_sigma_grid(), &mode, DistanceMode::L2, H_STAB).and_then(|c| fit_order(&c));
    match fit {
        Ok(f) => c.check(
            "9.fit",
            (0.9..=1.1).contains(&f.k_raw) && f.residual <= 0.05,
            format!("b = 2: k_raw {:.4}, log residual {:.3e}", f.k_raw, f.residual),
        ),
        Err(e) => c.fail("9.fit", e),
    }
    match discrimination_test(&coupled, &d0, &circle([0.0, 0.0], 0.35), &mode, DistanceMode::L2, H_STAB) {
        Ok(r) => c.check(
            "9.discriminate",
            r.distance > 10.0 * r.floor,
            format!("b = 2: distance {:.3e} vs 10 x floor {:.3e}", r.distance, 10.0 * r.floor),
        ),
        Err(e) => c.fail("9.discriminate", e),
    }
    let blind = unit_problem(CoefficientSet::new(0.0, 0.0, 2.0, 0.0), data);
    let cfg = ReconstructionConfig {
        basis_size: 3,
        test_count: 6,
        mode,
        ..ReconstructionConfig::default()
    };
    let truth = circle([0.0, 0.0], 0.3);
    let run = synthetic_observation(&blind, &truth, &cfg).and_then(|t| reconstruct(t, &circle([0.0, 0.0], 0.4), &blind, &cfg, Some(&truth)));
    match run {
        Ok(res) => c.check(
            "9.rank",
            matches!(res.error, Some(Error::RankDeficient(_))),
            format!("b = 0: {}", res.error.map_or("no error reported".into(), |e| e.to_string())),
        ),
        Err(e) => c.check("9.rank", matches!(e, Error::RankDeficient(_)), format!("b = 0: {e}")),
    }
}

// ---------------------------------------------------------------- 10

fn criterion_10(c: &mut Criterion) {
    let p = laplace_problem();
    let cfg = ReconstructionConfig::default();
    let cases: [(&'static str, ObstacleShape, ObstacleShape); 2] = [
        ("10.concentric", circle([0.0, 0.0], 0.3), circle([0.0, 0.0], 0.4)),
        ("10.off-center", circle([0.1, 0.0], 0.3), circle([0.0, 0.0], 0.3)),
    ];
    for (id, truth, init) in cases {
        let start = Instant::now();
        let run = synthetic_observation(&p, &truth, &cfg).and_then(|t| reconstruct(t, &init, &p, &cfg, Some(&truth)));
        let t = start.elapsed().as_secs_f64();
        let res = match run {
            Ok(r) => r,
            Err(e) => {
                c.fail(id, e);
                continue;
            }
        };
        let last = res.history.last();
        let iters = last.map_or(0, |r| r.iteration);
        let in_budget = res.error.is_none() && iters <= 30 && t <= 600.0;
        if id == "10.concentric" {
            let hd = last.and_then(|r| r.hausdorff).unwrap_or(f64::INFINITY);
            c.check(id, in_budget && hd <= 0.01, format!("Hausdorff {hd:.2e} (<= 0.01) after {iters} iterations, {t:.0} s"));
        } else {
            let ctr = res.final_shape().map(|s| s.centroid()).unwrap_or([f64::NAN; 2]);
            let err = (ctr[0] - 0.1).hypot(ctr[1]);
            c.check(id, in_budget && err <= 0.02, format!("center error {err:.2e} (<= 0.02) after {iters} iterations, {t:.0} s"));
        }
    }
}

// ---------------------------------------------------------------- 11

fn criterion_11(c: &mut Criterion) {
    let w = CarlemanWeight::scaled(5.0, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let x = [rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)];
        let (a, f) = (w.eval(x), w.eval_fd(x, 1e-4));
        let gs = a.grad[0].hypot(a.grad[1]).max(a.phi);
        let hs = a.hessian.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        for j in 0..2 {
            worst = worst.max((a.grad[j] - f.grad[j]).abs() / gs);
            for k in 0..2 {
                worst = worst.max((a.hessian[j][k] - f.hessian[j][k]).abs() / hs);
            }
        }
    }
    c.check("11.derivatives", worst <= 1e-6, format!("max scaled FD gap {worst:.2e} at 100 points (<= 1e-6)"));

    match bracket_samples(&w, &annulus_samples(&w, 100, 100)) {
        Ok(s) => {
            let rel = s.iter().map(|b| b.relative_error()).fold(0.0, f64::max);
            c.check("11.bracket", s.len() == 10_000 && rel <= 1e-10, format!("max relative gap {rel:.1e} on {} samples", s.len()));
            let below = s.iter().filter(|b| b.bracket < b.lower_bound).count();
            c.check("11.lower-bound", below == 0, format!("{below} of {} samples below {:.3e}", s.len(), w.bracket_lower_bound()));
        }
        Err(e) => c.fail("11.bracket", e),
    }

    let k = AnnularCompact::standard(1.0, 0.1).unwrap();
    let u = BumpFunction::new([1.3, 0.0], 0.3, 1.0).unwrap();
    match carleman_ratio(&w, &k, &u, &[0.4, 0.2, 0.1, 0.05]) {
        Ok(t) => {
            let r: Vec<String> = t.rows.iter().map(|r| r.ratio.map_or("degenerate".into(), |v| format!("{v:.3}"))).collect();
            c.check("11.ratio", t.is_bounded(2.0), format!("ratios [{}] (last <= 2 x max of first two)", r.join(", ")));
        }
        Err(e) => c.fail("11.ratio", e),
    }
}

// ---------------------------------------------------------------- 12

fn criterion_12(c: &mut Criterion) {
    match one_dim_counterexample(1.0, 1.0, 0.5, 0.5, 1.0, 0.5, 10_000) {
        Ok(r) => {
            let cauchy = r.y0.abs().max(r.z0.abs()).max(r.y_x0.abs());
            let flux = (r.z_x0 - 1.0).abs();
            let res = r.residual_y.max(r.residual_z);
            c.check(
                "12.cauchy",
                cauchy <= 1e-8 && flux <= 1e-6,
                format!("|y(0)|, |z(0)|, |y'(0)| <= {cauchy:.1e}; |z'(0) - K| = {flux:.1e}"),
            );
            c.check("12.residual", res <= 1e-4, format!("ODE residual {res:.1e} (<= 1e-4)"));
        }
        Err(e) => c.fail("12.cauchy", e),
    }
}

// ---------------------------------------------------------------- 13

fn artifact_bodies(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .map(|d| {
            d.filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|e| e == "csv" || e == "txt"))
                .filter(|p| !p.file_name().unwrap().to_string_lossy().starts_with("mu1-"))
                .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap_or_default()))
                .collect()
        })
        .unwrap_or_default();
    v.sort();
    v
}

fn criterion_13(c: &mut Criterion) {
    let configs = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let scratch = std::env::temp_dir().join(format!("obstacle-lab-acceptance-{}", std::process::id()));
    let mut names: Vec<PathBuf> = match fs::read_dir(&configs) {
        Ok(d) => d.filter_map(|e| e.ok().map(|e| e.path())).filter(|p| p.extension().is_some_and(|e| e == "toml")).collect(),
        Err(e) => return c.fail("13.rerun", e),
    };
    names.retain(|p| p.file_stem().is_some_and(|s| s != "plan"));
    names.sort();
    let mut differing = Vec::new();
    let mut kinds = 0;
    for cfg in &names {
        let stem = cfg.file_stem().unwrap().to_string_lossy().into_owned();
        let mut bodies = Vec::new();
        for pass in ["a", "b"] {
            let out = scratch.join(&stem).join(pass);
            let ok = Command::new(env!("CARGO_BIN_EXE_obstacle-lab"))
                .args(["run", "--config"])
                .arg(cfg)
                .arg("--out")
                .arg(&out)
                .output()
                .is_ok_and(|o| o.status.success());
            bodies.push(if ok { artifact_bodies(&out) } else { Vec::new() });
        }
        if bodies[0].is_empty() || bodies[0] != bodies[1] {
            differing.push(stem);
        }
        kinds += 1;
    }
    let _ = fs::remove_dir_all(&scratch);
    c.check(
        "13.rerun",
        differing.is_empty() && kinds == 10,
        if differing.is_empty() {
            format!("{kinds} experiment kinds byte-identical on rerun")
        } else {
            format!("differing or failed: {}", differing.join(", "))
        },
    );
}

fn main() -> ExitCode {
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let criteria: [(u8, &str, fn(&mut Criterion)); 13] = [
        (1, "forward-solver convergence", criterion_1),
        (2, "annulus benchmark", criterion_2),
        (3, "Poincare constant", criterion_3),
        (4, "pullback equivalence", criterion_4),
        (5, "adjoint identity", criterion_5),
        (6, "sensitivity matrix", criterion_6),
        (7, "order fit", criterion_7),
        (8, "uniqueness discrimination", criterion_8),
        (9, "internal observation", criterion_9),
        (10, "reconstruction", criterion_10),
        (11, "Carleman checks", criterion_11),
        (12, "1D non-uniqueness", criterion_12),
        (13, "determinism", criterion_13),
    ];
    let mut unexpected = 0;
    for (n, name, run) in criteria {
        let start = Instant::now();
        let mut c = Criterion::default();
        run(&mut c);
        let failed: Vec<&Check> = c.checks.iter().filter(|k| !k.pass).collect();
        let known = !failed.is_empty() && failed.iter().all(|k| KNOWN_FAILURES.contains(&k.id));
        let status = match (failed.is_empty(), known) {
            (true, _) => "PASS",
            (false, true) => "KNOWN-FAIL",
            (false, false) => "FAIL",
        };
        if status == "FAIL" {
            unexpected += 1;
        }
        println!("[{status:>10}] criterion {n:>2} {name} ({:.1} s)", start.elapsed().as_secs_f64());
        for k in &c.checks {
            println!("               {} {:<16} {}", if k.pass { "ok  " } else { "FAIL" }, k.id, k.detail);
        }
    }
    if unexpected > 0 {
        println!("{unexpected} criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
