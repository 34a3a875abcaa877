//! The Gaussian weight `phi(x) = exp(-delta |x - x0|^2)`, its principal symbols
//! `a0 = |xi|^2 - |grad phi|^2`, `b0 = 2 xi . grad phi`, their Poisson bracket, and
//! quadrature of both sides of the weighted Carleman inequality for bump functions.

use std::f64::consts::PI;
use std::fmt::Write;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarlemanWeight {
    pub delta: f64,
    pub r: f64,
    pub center: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightValue {
    pub phi: f64,
    pub grad: [f64; 2],
    pub hessian: [[f64; 2]; 2],
}

impl CarlemanWeight {
    pub fn new(delta: f64, r: f64, center: [f64; 2]) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) || !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidArgument(format!("need finite delta > 0 and R > 0, got {delta}, {r}")));
        }
        Ok(Self { delta, r, center })
    }

    /// `delta = factor / R^2`, centered at the origin.
    pub fn scaled(factor: f64, r: f64) -> Result<Self> {
        Self::new(factor / (r * r), r, [0.0, 0.0])
    }

    /// Whether `delta > 4 / R^2`, the regime in which the bracket is positive on the annulus.
    pub fn is_convex_regime(&self) -> bool {
        self.delta > 4.0 / (self.r * self.r)
    }

    fn rel(&self, x: [f64; 2]) -> [f64; 2] {
        [x[0] - self.center[0], x[1] - self.center[1]]
    }

    pub fn phi(&self, x: [f64; 2]) -> f64 {
        let d = self.rel(x);
        (-self.delta * (d[0] * d[0] + d[1] * d[1])).exp()
    }

    pub fn eval(&self, x: [f64; 2]) -> WeightValue {
        let d = self.rel(x);
        let phi = self.phi(x);
        let dl = self.delta;
        let mut hessian = [[0.0; 2]; 2];
        for j in 0..2 {
            for k in 0..2 {
                let kron = if j == k { 1.0 } else { 0.0 };
                hessian[j][k] = -2.0 * dl * phi * kron + 4.0 * dl * dl * d[j] * d[k] * phi;
            }
        }
        WeightValue {
            phi,
            grad: [-2.0 * dl * d[0] * phi, -2.0 * dl * d[1] * phi],
            hessian,
        }
    }

    /// Central differences of `phi` with step `h`: gradient and Hessian.
    pub fn eval_fd(&self, x: [f64; 2], h: f64) -> WeightValue {
        let f = |dx: f64, dy: f64| self.phi([x[0] + dx, x[1] + dy]);
        let p = f(0.0, 0.0);
        let grad = [(f(h, 0.0) - f(-h, 0.0)) / (2.0 * h), (f(0.0, h) - f(0.0, -h)) / (2.0 * h)];
        let hxx = (f(h, 0.0) - 2.0 * p + f(-h, 0.0)) / (h * h);
        let hyy = (f(0.0, h) - 2.0 * p + f(0.0, -h)) / (h * h);
        let hxy = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4.0 * h * h);
        WeightValue {
            phi: p,
            grad,
            hessian: [[hxx, hxy], [hxy, hyy]],
        }
    }

    /// `xi = rot90(grad phi(x))`, which solves `a0 = b0 = 0`.
    pub fn characteristic_point(&self, x: [f64; 2]) -> Result<[f64; 2]> {
        let g = self.eval(x).grad;
        if g[0] == 0.0 && g[1] == 0.0 {
            return Err(Error::GradientVanishes);
        }
        Ok([-g[1], g[0]])
    }

    pub fn a0(&self, x: [f64; 2], xi: [f64; 2]) -> f64 {
        let g = self.eval(x).grad;
        dot(xi, xi) - dot(g, g)
    }

    pub fn b0(&self, x: [f64; 2], xi: [f64; 2]) -> f64 {
        2.0 * dot(xi, self.eval(x).grad)
    }

    /// `grad_xi a0 . grad_x b0 - grad_x a0 . grad_xi b0` from the analytic partials.
    pub fn poisson_bracket(&self, x: [f64; 2], xi: [f64; 2]) -> f64 {
        let w = self.eval(x);
        let hv = |v: [f64; 2]| {
            [
                w.hessian[0][0] * v[0] + w.hessian[0][1] * v[1],
                w.hessian[1][0] * v[0] + w.hessian[1][1] * v[1],
            ]
        };
        let da_dxi = [2.0 * xi[0], 2.0 * xi[1]];
        let h_xi = hv(xi);
        let db_dx = [2.0 * h_xi[0], 2.0 * h_xi[1]];
        let h_g = hv(w.grad);
        let da_dx = [-2.0 * h_g[0], -2.0 * h_g[1]];
        let db_dxi = [2.0 * w.grad[0], 2.0 * w.grad[1]];
        dot(da_dxi, db_dx) - dot(da_dx, db_dxi)
    }

    /// `64 delta^3 phi^3 |x|^2 (delta |x|^2 - 1)`, valid on the characteristic set.
    pub fn bracket_closed_form(&self, x: [f64; 2]) -> f64 {
        let d = self.rel(x);
        let r2 = dot(d, d);
        let dl = self.delta;
        64.0 * dl.powi(3) * self.phi(x).powi(3) * r2 * (dl * r2 - 1.0)
    }

    /// `16 delta^3 R^2 exp(-12 R^2 delta) (delta R^2 / 4 - 1)` for `R/2 < |x| < 2R`.
    pub fn bracket_lower_bound(&self) -> f64 {
        let (dl, r2) = (self.delta, self.r * self.r);
        16.0 * dl.powi(3) * r2 * (-12.0 * r2 * dl).exp() * (dl * r2 / 4.0 - 1.0)
    }
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BracketSample {
    pub x: [f64; 2],
    pub bracket: f64,
    pub closed_form: f64,
    pub lower_bound: f64,
}

impl BracketSample {
    pub fn relative_error(&self) -> f64 {
        (self.bracket - self.closed_form).abs() / self.closed_form.abs()
    }
}

/// `n_r x n_theta` points on a polar grid strictly inside `R/2 < |x - x0| < 2R`.
pub fn annulus_samples(w: &CarlemanWeight, n_r: usize, n_theta: usize) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(n_r * n_theta);
    for i in 0..n_r {
        let rho = w.r * (0.5 + 1.5 * (i as f64 + 0.5) / n_r as f64);
        for j in 0..n_theta {
            let t = 2.0 * PI * (j as f64 + 0.5) / n_theta as f64;
            out.push([w.center[0] + rho * t.cos(), w.center[1] + rho * t.sin()]);
        }
    }
    out
}

/// Definitional bracket, closed form and lower bound at the characteristic point over each `x`.
pub fn bracket_samples(w: &CarlemanWeight, points: &[[f64; 2]]) -> Result<Vec<BracketSample>> {
    let lb = w.bracket_lower_bound();
    crate::par::map(points, |&x| {
        let xi = w.characteristic_point(x)?;
        Ok(BracketSample {
            x,
            bracket: w.poisson_bracket(x, xi),
            closed_form: w.bracket_closed_form(x),
            lower_bound: lb,
        })
    })
    .into_iter()
    .collect()
}

pub fn bracket_csv(samples: &[BracketSample]) -> String {
    let mut s = String::from("x1,x2,bracket,closed_form,lower_bound\n");
    for p in samples {
        let _ = writeln!(s, "{:e},{:e},{:e},{:e},{:e}", p.x[0], p.x[1], p.bracket, p.closed_form, p.lower_bound);
    }
    s
}

/// `amplitude * B((x - c1)/s) B((y - c2)/s)` with `B(t) = (1 - t^2)^4` on `|t| < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpFunction {
    pub center: [f64; 2],
    pub half_width: f64,
    pub amplitude: f64,
}

fn bump1(t: f64) -> (f64, f64, f64) {
    if t.abs() >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let q = 1.0 - t * t;
    (q.powi(4), -8.0 * t * q.powi(3), q * q * (56.0 * t * t - 8.0))
}

impl BumpFunction {
    pub fn new(center: [f64; 2], half_width: f64, amplitude: f64) -> Result<Self> {
        if !(half_width > 0.0) {
            return Err(Error::InvalidArgument(format!("half width must be positive, got {half_width}")));
        }
        Ok(Self {
            center,
            half_width,
            amplitude,
        })
    }

    /// `(u, grad u, laplacian u)`.
    pub fn eval(&self, x: [f64; 2]) -> (f64, [f64; 2], f64) {
        let s = self.half_width;
        let (f, fp, fpp) = bump1((x[0] - self.center[0]) / s);
        let (g, gp, gpp) = bump1((x[1] - self.center[1]) / s);
        let a = self.amplitude;
        (a * f * g, [a * fp * g / s, a * f * gp / s], a * (fpp * g + f * gpp) / (s * s))
    }

    /// Closest distance from the weight center to the support square.
    fn min_distance(&self, c: [f64; 2]) -> f64 {
        let s = self.half_width;
        let dx = ((self.center[0] - c[0]).abs() - s).max(0.0);
        let dy = ((self.center[1] - c[1]).abs() - s).max(0.0);
        dx.hypot(dy)
    }

    fn max_distance(&self, c: [f64; 2]) -> f64 {
        let s = self.half_width;
        ((self.center[0] - c[0]).abs() + s).hypot((self.center[1] - c[1]).abs() + s)
    }
}

/// The compact annulus `inner <= |x - x0| <= outer`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnularCompact {
    pub inner: f64,
    pub outer: f64,
}

impl AnnularCompact {
    /// `3R/4 <= |x| <= 2R - eps`.
    pub fn standard(r: f64, eps: f64) -> Result<Self> {
        let k = Self {
            inner: 0.75 * r,
            outer: 2.0 * r - eps,
        };
        if !(eps > 0.0) || k.outer <= k.inner {
            return Err(Error::InvalidArgument(format!("eps must lie in (0, 1.25 R), got {eps}")));
        }
        Ok(k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioRow {
    pub h: f64,
    /// Both sides carry the common factor `exp(-2 phi_max / h)`.
    pub lhs: f64,
    pub rhs: f64,
    /// `None` when both sides vanish.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioTable {
    pub rows: Vec<RatioRow>,
}

impl RatioTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("h,lhs,rhs,ratio\n");
        for r in &self.rows {
            match r.ratio {
                Some(q) => {
                    let _ = writeln!(s, "{:e},{:e},{:e},{:e}", r.h, r.lhs, r.rhs, q);
                }
                None => {
                    let _ = writeln!(s, "{:e},{:e},{:e},degenerate", r.h, r.lhs, r.rhs);
                }
            }
        }
        s
    }

    /// Last ratio at most `factor` times the larger of the first two.
    pub fn is_bounded(&self, factor: f64) -> bool {
        let q: Vec<f64> = self.rows.iter().filter_map(|r| r.ratio).collect();
        q.len() >= 3 && q[q.len() - 1] <= factor * q[0].max(q[1])
    }
}

pub const QUAD_RTOL: f64 = 1e-8;
const GAUSS_POINTS: usize = 8;
const MAX_PANELS: usize = 256;

/// Composite tensor Gauss rule on the bump's support, doubling panels until both
/// integrals settle to `QUAD_RTOL`.
fn weighted_integrals(w: &CarlemanWeight, u: &BumpFunction, h: f64, phi_max: f64) -> (f64, f64) {
    let rule = GaussLegendre::new(NonZeroUsize::new(GAUSS_POINTS).unwrap());
    let nodes: Vec<(f64, f64)> = rule.iter().map(|(x, wt)| (*x, *wt)).collect();
    let s = u.half_width;
    let lo = [u.center[0] - s, u.center[1] - s];
    let eval = |n: usize| {
        let step = 2.0 * s / n as f64;
        let mut pts = Vec::with_capacity(n * GAUSS_POINTS);
        for p in 0..n {
            for &(t, wt) in &nodes {
                pts.push(((p as f64 + 0.5 * (t + 1.0)) * step, 0.5 * step * wt));
            }
        }
        let rows: Vec<(f64, f64)> = crate::par::map(&pts, |&(ox, wx)| {
            let (mut l, mut r) = (0.0, 0.0);
            for &(oy, wy) in &pts {
                let x = [lo[0] + ox, lo[1] + oy];
                let (v, g, lap) = u.eval(x);
                let e = (2.0 * (w.phi(x) - phi_max) / h).exp() * wx * wy;
                l += e * (v * v + h * h * dot(g, g));
                r += e * lap * lap;
            }
            (l, r)
        });
        rows.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1))
    };
    let mut n = 4;
    let mut prev = eval(n);
    while n < MAX_PANELS {
        n *= 2;
        let cur = eval(n);
        let settled = |a: f64, b: f64| (a - b).abs() <= QUAD_RTOL * b.abs().max(f64::MIN_POSITIVE);
        let done = settled(prev.0, cur.0) && settled(prev.1, cur.1);
        prev = cur;
        if done {
            break;
        }
    }
    prev
}

/// `I0(u) / (h^3 ∫_K e^{2 phi/h} |Δu|^2)` for each `h`.
pub fn carleman_ratio(w: &CarlemanWeight, k: &AnnularCompact, u: &BumpFunction, h_grid: &[f64]) -> Result<RatioTable> {
    if u.min_distance(w.center) <= k.inner || u.max_distance(w.center) >= k.outer {
        return Err(Error::InvalidArgument("bump support must lie inside the interior of K".into()));
    }
    if h_grid.iter().any(|&h| !(h > 0.0 && h < 1.0)) {
        return Err(Error::InvalidArgument("every h must lie in (0, 1)".into()));
    }
    // phi decreases with |x|, so its maximum on the support sits at the nearest point
    let phi_max = (-w.delta * u.min_distance(w.center).powi(2)).exp();
    let mut rows = Vec::with_capacity(h_grid.len());
    for &h in h_grid {
        let (lhs, lap) = if u.amplitude == 0.0 {
            (0.0, 0.0)
        } else {
            weighted_integrals(w, u, h, phi_max)
        };
        let rhs = h.powi(3) * lap;
        let ratio = if lhs == 0.0 && rhs == 0.0 {
            None
        } else if rhs == 0.0 {
            return Err(Error::Underflow(format!("right-hand side vanished at h = {h}")));
        } else {
            Some(lhs / rhs)
        };
        rows.push(RatioRow { h, lhs, rhs, ratio });
    }
    Ok(RatioTable { rows })
}
