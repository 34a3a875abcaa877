//! One-dimensional coupled system with vanishing Cauchy data for `y` but not for `z`:
//!
//! ```text
//! -y'' + eta^2 y + b z = 0,   -z'' + A y + zeta^2 z = 0   on (0, L)
//! y(0) = z(0) = y'(0) = 0,    z'(0) = K
//! ```
//!
//! Solved by fixed-point iteration on the Volterra form
//! `z = (K/zeta) sinh(zeta x) + (A/zeta) ∫ y(s) sinh(zeta (x-s)) ds`,
//! `y = (b/eta) ∫ z(s) sinh(eta (x-s)) ds`.

use std::fmt::Write;

use crate::error::{Error, Result};

pub const MAX_SWEEPS: usize = 50;
pub const SWEEP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleReport {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub y0: f64,
    pub z0: f64,
    pub y_x0: f64,
    pub z_x0: f64,
    /// Grid RMS of `-y'' + eta^2 y + b z` over interior points.
    pub residual_y: f64,
    /// Grid RMS of `-z'' + A y + zeta^2 z` over interior points.
    pub residual_z: f64,
    pub sweeps: usize,
    pub last_change: f64,
}

impl CounterexampleReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,y,z\n");
        for i in 0..self.x.len() {
            let _ = writeln!(s, "{:e},{:e},{:e}", self.x[i], self.y[i], self.z[i]);
        }
        s
    }

    pub fn summary_csv(&self) -> String {
        format!(
            "y_x0,z_x0,residual_y,residual_z,sweeps\n{:e},{:e},{:e},{:e},{}\n",
            self.y_x0, self.z_x0, self.residual_y, self.residual_z, self.sweeps
        )
    }
}

/// `(k/c) ∫_0^x f(s) sinh(c (x - s)) ds` on a uniform grid, cumulative trapezoid.
fn sinh_convolution(f: &[f64], x: &[f64], c: f64, k: f64) -> Vec<f64> {
    let n = f.len();
    let h = if n > 1 { x[1] - x[0] } else { 0.0 };
    let (mut ic, mut is) = (0.0, 0.0);
    let mut out = vec![0.0; n];
    for i in 1..n {
        let (s0, c0) = ((c * x[i - 1]).sinh(), (c * x[i - 1]).cosh());
        let (s1, c1) = ((c * x[i]).sinh(), (c * x[i]).cosh());
        ic += 0.5 * h * (f[i - 1] * c0 + f[i] * c1);
        is += 0.5 * h * (f[i - 1] * s0 + f[i] * s1);
        out[i] = k / c * (s1 * ic - c1 * is);
    }
    out
}

pub fn one_dim_counterexample(
    eta: f64,
    zeta: f64,
    b: f64,
    big_a: f64,
    k: f64,
    l: f64,
    n: usize,
) -> Result<CounterexampleReport> {
    for (name, v) in [("eta", eta), ("zeta", zeta), ("b", b), ("A", big_a)] {
        if v == 0.0 || !v.is_finite() {
            return Err(Error::InvalidArgument(format!("{name} must be nonzero and finite, got {v}")));
        }
    }
    if !k.is_finite() {
        return Err(Error::InvalidArgument(format!("K must be finite, got {k}")));
    }
    if !(l > 0.0 && l < 1.0) {
        return Err(Error::InvalidArgument(format!("L must lie in (0, 1), got {l}")));
    }
    if n < 5 {
        return Err(Error::InvalidArgument(format!("need at least 5 grid points, got {n}")));
    }
    if big_a.abs() + b.abs() >= 2.0 * eta.abs() * zeta.abs() {
        return Err(Error::FixedPointDivergence(format!(
            "|A| + |b| = {:.6} is not below 2|eta||zeta| = {:.6}",
            big_a.abs() + b.abs(),
            2.0 * eta.abs() * zeta.abs()
        )));
    }

    let h = l / (n - 1) as f64;
    let x: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
    let z_free: Vec<f64> = x.iter().map(|&t| k / zeta * (zeta * t).sinh()).collect();
    let mut y = vec![0.0; n];
    let mut z = z_free.clone();
    let mut sweeps = 0;
    let mut change = f64::INFINITY;
    while sweeps < MAX_SWEEPS {
        sweeps += 1;
        let y_new = sinh_convolution(&z, &x, eta, b);
        let conv = sinh_convolution(&y_new, &x, zeta, big_a);
        let z_new: Vec<f64> = z_free.iter().zip(&conv).map(|(f, c)| f + c).collect();
        change = y_new
            .iter()
            .zip(&y)
            .chain(z_new.iter().zip(&z))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        y = y_new;
        z = z_new;
        if !change.is_finite() {
            return Err(Error::FixedPointDivergence(format!("iterates overflowed after {sweeps} sweeps")));
        }
        if change <= SWEEP_TOL {
            break;
        }
    }

    let d0 = |v: &[f64]| (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
    let rms = |r: Vec<f64>| (r.iter().map(|v| v * v).sum::<f64>() / r.len() as f64).sqrt();
    let second = |v: &[f64], i: usize| (v[i - 1] - 2.0 * v[i] + v[i + 1]) / (h * h);
    let residual_y = rms((1..n - 1).map(|i| -second(&y, i) + eta * eta * y[i] + b * z[i]).collect());
    let residual_z = rms((1..n - 1).map(|i| -second(&z, i) + big_a * y[i] + zeta * zeta * z[i]).collect());

    Ok(CounterexampleReport {
        y0: y[0],
        z0: z[0],
        y_x0: d0(&y),
        z_x0: d0(&z),
        residual_y,
        residual_z,
        sweeps,
        last_change: change,
        x,
        y,
        z,
    })
}
