//! Star-shaped obstacles described by a truncated trigonometric series.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::domain::SafetyRegion;

/// Number of angular samples used when checking shape invariants.
pub const INVARIANT_SAMPLES: usize = 4096;

/// Evaluates the `k`-th member of the fixed basis `{1, cos t, sin t, cos 2t, sin 2t, ...}`.
pub fn basis_value(k: usize, theta: f64) -> f64 {
    if k == 0 {
        1.0
    } else {
        let freq = k.div_ceil(2) as f64;
        if k % 2 == 1 {
            (freq * theta).cos()
        } else {
            (freq * theta).sin()
        }
    }
}

pub fn basis_derivative(k: usize, theta: f64) -> f64 {
    if k == 0 {
        0.0
    } else {
        let freq = k.div_ceil(2) as f64;
        if k % 2 == 1 {
            -freq * (freq * theta).sin()
        } else {
            freq * (freq * theta).cos()
        }
    }
}

/// Human-readable label of a basis member, e.g. `cos2`.
pub fn basis_label(k: usize) -> String {
    if k == 0 {
        "1".to_string()
    } else {
        let freq = k.div_ceil(2);
        if k % 2 == 1 {
            format!("cos{freq}")
        } else {
            format!("sin{freq}")
        }
    }
}

/// An obstacle whose boundary is `center + r(t) (cos t, sin t)` with
/// `r(t) = mean_radius + sum_k c_k f_k(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObstacleShape {
    pub center: [f64; 2],
    pub mean_radius: f64,
    pub coefficients: Vec<f64>,
}

impl ObstacleShape {
    pub fn circle(center: [f64; 2], radius: f64) -> Self {
        Self {
            center,
            mean_radius: radius,
            coefficients: Vec::new(),
        }
    }

    pub fn new(center: [f64; 2], mean_radius: f64, coefficients: Vec<f64>) -> Self {
        Self {
            center,
            mean_radius,
            coefficients,
        }
    }

    /// Returns a copy with at least `n` coefficients (padding with zeros).
    pub fn with_basis_size(&self, n: usize) -> Self {
        let mut out = self.clone();
        if out.coefficients.len() < n {
            out.coefficients.resize(n, 0.0);
        }
        out
    }

    pub fn radius(&self, theta: f64) -> f64 {
        self.mean_radius
            + self
                .coefficients
                .iter()
                .enumerate()
                .map(|(k, c)| c * basis_value(k, theta))
                .sum::<f64>()
    }

    pub fn radius_derivative(&self, theta: f64) -> f64 {
        self.coefficients
            .iter()
            .enumerate()
            .map(|(k, c)| c * basis_derivative(k, theta))
            .sum()
    }

    pub fn point(&self, theta: f64) -> [f64; 2] {
        let r = self.radius(theta);
        [
            self.center[0] + r * theta.cos(),
            self.center[1] + r * theta.sin(),
        ]
    }

    /// Unit normal pointing out of the obstacle.
    pub fn outward_normal(&self, theta: f64) -> [f64; 2] {
        let r = self.radius(theta);
        let dr = self.radius_derivative(theta);
        let (s, c) = theta.sin_cos();
        let tangent = [dr * c - r * s, dr * s + r * c];
        let len = tangent[0].hypot(tangent[1]);
        [tangent[1] / len, -tangent[0] / len]
    }

    /// `e_r . nu`: normal component of a unit radial displacement.
    pub fn radial_normal_factor(&self, theta: f64) -> f64 {
        let r = self.radius(theta);
        let dr = self.radius_derivative(theta);
        r / r.hypot(dr)
    }

    /// Polar angle of `p` about the obstacle center.
    pub fn angle_of(&self, p: [f64; 2]) -> f64 {
        (p[1] - self.center[1]).atan2(p[0] - self.center[0])
    }

    /// True if `p` lies strictly inside the obstacle.
    pub fn contains(&self, p: [f64; 2]) -> bool {
        let dx = p[0] - self.center[0];
        let dy = p[1] - self.center[1];
        let rho = dx.hypot(dy);
        rho < self.radius(dy.atan2(dx))
    }

    fn sample_angles(n: usize) -> impl Iterator<Item = f64> {
        (0..n).map(move |i| 2.0 * PI * i as f64 / n as f64)
    }

    pub fn min_radius(&self) -> f64 {
        Self::sample_angles(INVARIANT_SAMPLES)
            .map(|t| self.radius(t))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_radius(&self) -> f64 {
        Self::sample_angles(INVARIANT_SAMPLES)
            .map(|t| self.radius(t))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Area by quadrature of `r^2 / 2` (trapezoid, spectrally accurate for trig series).
    pub fn area(&self) -> f64 {
        let n = INVARIANT_SAMPLES;
        Self::sample_angles(n)
            .map(|t| 0.5 * self.radius(t).powi(2))
            .sum::<f64>()
            * 2.0
            * PI
            / n as f64
    }

    pub fn perimeter(&self) -> f64 {
        let n = INVARIANT_SAMPLES;
        Self::sample_angles(n)
            .map(|t| self.radius(t).hypot(self.radius_derivative(t)))
            .sum::<f64>()
            * 2.0
            * PI
            / n as f64
    }

    /// Area centroid of the enclosed region.
    pub fn centroid(&self) -> [f64; 2] {
        let n = INVARIANT_SAMPLES;
        let (mut mx, mut my) = (0.0, 0.0);
        for t in Self::sample_angles(n) {
            let r3 = self.radius(t).powi(3) / 3.0;
            mx += r3 * t.cos();
            my += r3 * t.sin();
        }
        let w = 2.0 * PI / n as f64;
        let area = self.area();
        [
            self.center[0] + mx * w / area,
            self.center[1] + my * w / area,
        ]
    }

    /// Angles `t_0 < ... < t_{n-1}` in `[0, 2 pi)` placing `n` boundary points
    /// at equal arc-length spacing, starting at `t = 0`.
    pub fn equidistributed_angles(&self, n: usize) -> Vec<f64> {
        let fine = INVARIANT_SAMPLES;
        let dt = 2.0 * PI / fine as f64;
        let speed = |t: f64| self.radius(t).hypot(self.radius_derivative(t));
        let mut cumulative = Vec::with_capacity(fine + 1);
        cumulative.push(0.0);
        for i in 0..fine {
            let t0 = i as f64 * dt;
            let seg = 0.5 * (speed(t0) + speed(t0 + dt)) * dt;
            cumulative.push(cumulative[i] + seg);
        }
        let total = cumulative[fine];
        let mut angles = Vec::with_capacity(n);
        let mut j = 0;
        for k in 0..n {
            let s = total * k as f64 / n as f64;
            while j + 1 < fine && cumulative[j + 1] < s {
                j += 1;
            }
            let frac = (s - cumulative[j]) / (cumulative[j + 1] - cumulative[j]);
            angles.push((j as f64 + frac) * dt);
        }
        angles
    }

    /// Checks positivity of `r` and containment in the safety region with its clearance.
    pub fn validate(&self, safety: &SafetyRegion) -> Result<()> {
        if !self.mean_radius.is_finite() || self.coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidShape("non-finite parameters".into()));
        }
        if !self.center[0].is_finite() || !self.center[1].is_finite() {
            return Err(Error::InvalidShape("non-finite center".into()));
        }
        let rmin = self.min_radius();
        if rmin <= 0.0 {
            return Err(Error::InvalidShape(format!(
                "radius function not positive (min r = {rmin:.4e})"
            )));
        }
        let mut worst = f64::NEG_INFINITY;
        for t in Self::sample_angles(INVARIANT_SAMPLES) {
            let p = self.point(t);
            let d = (p[0] - safety.center[0]).hypot(p[1] - safety.center[1]);
            worst = worst.max(d);
        }
        let limit = safety.radius - safety.clearance;
        if worst > limit {
            return Err(Error::Clearance(format!(
                "obstacle reaches distance {worst:.4} from the safety-region center, limit {limit:.4} (radius {:.4} minus clearance {:.4})",
                safety.radius, safety.clearance
            )));
        }
        Ok(())
    }

    /// Adds `step * sum_i lambda_i f_i` to the radial function.
    pub fn displaced(&self, lambda: &[f64], step: f64) -> Self {
        let mut out = self.with_basis_size(lambda.len());
        for (c, l) in out.coefficients.iter_mut().zip(lambda) {
            *c += step * l;
        }
        out
    }

    /// Rotates the obstacle (center and radial function) by `angle` about `pivot`.
    pub fn rotated(&self, angle: f64, pivot: [f64; 2]) -> Self {
        let (s, c) = angle.sin_cos();
        let dx = self.center[0] - pivot[0];
        let dy = self.center[1] - pivot[1];
        let center = [pivot[0] + c * dx - s * dy, pivot[1] + s * dx + c * dy];
        // r'(t) = r(t - angle): rotate each frequency pair.
        let mut coefficients = self.coefficients.clone();
        let mut k = 1;
        while k < coefficients.len() {
            let freq = k.div_ceil(2) as f64;
            let a = coefficients[k];
            let b = if k + 1 < coefficients.len() {
                coefficients[k + 1]
            } else {
                0.0
            };
            let (sf, cf) = (freq * angle).sin_cos();
            coefficients[k] = a * cf - b * sf;
            if k + 1 < coefficients.len() {
                coefficients[k + 1] = a * sf + b * cf;
            } else if (a * sf).abs() > 0.0 {
                coefficients.push(a * sf);
            }
            k += 2;
        }
        Self {
            center,
            mean_radius: self.mean_radius,
            coefficients,
        }
    }

    /// Dense polyline of boundary points.
    pub fn boundary_samples(&self, n: usize) -> Vec<[f64; 2]> {
        Self::sample_angles(n).map(|t| self.point(t)).collect()
    }
}
