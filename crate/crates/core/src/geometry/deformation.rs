//! Compactly supported deformation fields `mu` and the maps `m = I + sigma mu`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::domain::SafetyRegion;

pub type Mat2 = [[f64; 2]; 2];

/// Finite-difference step used for fields without a closed-form gradient.
pub const FD_STEP: f64 = 1e-6;

fn smoothstep(t: f64) -> (f64, f64) {
    if t <= 0.0 {
        (0.0, 0.0)
    } else if t >= 1.0 {
        (1.0, 0.0)
    } else {
        let s = t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
        let ds = 30.0 * t * t * (1.0 - t) * (1.0 - t);
        (s, ds)
    }
}

/// Radial C^2 bump `g(rho)`: rises on `[inner_start, inner_end]` (absent when
/// `inner_end == 0`), equals one up to `plateau_end`, decays to zero at `outer_end`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cutoff {
    pub inner_start: f64,
    pub inner_end: f64,
    pub plateau_end: f64,
    pub outer_end: f64,
}

impl Cutoff {
    pub fn new(inner_start: f64, inner_end: f64, plateau_end: f64, outer_end: f64) -> Result<Self> {
        let c = Self {
            inner_start,
            inner_end,
            plateau_end,
            outer_end,
        };
        let ordered = 0.0 <= inner_start
            && inner_start <= inner_end
            && inner_end <= plateau_end
            && plateau_end < outer_end;
        if !ordered {
            return Err(Error::InvalidDeformation(format!(
                "cutoff radii must satisfy 0 <= {inner_start} <= {inner_end} <= {plateau_end} < {outer_end}"
            )));
        }
        Ok(c)
    }

    /// Bump equal to one on the disk of radius `plateau_end`.
    pub fn disk(plateau_end: f64, outer_end: f64) -> Result<Self> {
        Self::new(0.0, 0.0, plateau_end, outer_end)
    }

    fn has_inner_ramp(&self) -> bool {
        self.inner_end > 0.0
    }

    /// `(g, g')` at radius `rho`.
    pub fn eval(&self, rho: f64) -> (f64, f64) {
        if self.has_inner_ramp() && rho < self.inner_end {
            let w = self.inner_end - self.inner_start;
            if w <= 0.0 {
                return (0.0, 0.0);
            }
            let (s, ds) = smoothstep((rho - self.inner_start) / w);
            return (s, ds / w);
        }
        if rho <= self.plateau_end {
            return (1.0, 0.0);
        }
        let w = self.outer_end - self.plateau_end;
        let (s, ds) = smoothstep((rho - self.plateau_end) / w);
        (1.0 - s, -ds / w)
    }
}

/// User-supplied field evaluator (no closed-form gradient).
#[derive(Clone)]
pub struct CustomField {
    pub func: Arc<dyn Fn([f64; 2]) -> [f64; 2] + Send + Sync>,
}

impl fmt::Debug for CustomField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CustomField(..)")
    }
}

#[derive(Debug, Clone)]
pub enum FieldKind {
    Zero,
    /// `amplitude * (x - c) / |x - c|`
    Radial { amplitude: f64 },
    /// `amplitude * (-(x2 - c2), x1 - c1)`
    Rotational { amplitude: f64 },
    /// `matrix (x - c) + offset`
    Affine { matrix: Mat2, offset: [f64; 2] },
    /// Arbitrary evaluator; used as-is, without the cutoff.
    Custom(CustomField),
}

/// A vector field `mu` vanishing outside the safety region, with a certified bound
/// on `max(|mu|_inf, |grad mu|_inf)`.
#[derive(Debug, Clone)]
pub struct DeformationField {
    kind: FieldKind,
    center: [f64; 2],
    cutoff: Cutoff,
    support: SafetyRegion,
    lipschitz_bound: f64,
}

fn norm2(m: &Mat2) -> f64 {
    // spectral norm of a 2x2 matrix
    let a = m[0][0];
    let b = m[0][1];
    let c = m[1][0];
    let d = m[1][1];
    let s1 = a * a + b * b + c * c + d * d;
    let det = a * d - b * c;
    let disc = (s1 * s1 - 4.0 * det * det).max(0.0).sqrt();
    ((s1 + disc) / 2.0).sqrt()
}

impl DeformationField {
    pub fn zero(support: SafetyRegion) -> Self {
        Self {
            kind: FieldKind::Zero,
            center: support.center,
            cutoff: Cutoff::disk(0.0, support.radius).expect("valid cutoff"),
            support,
            lipschitz_bound: 0.0,
        }
    }

    pub fn radial(center: [f64; 2], amplitude: f64, cutoff: Cutoff, support: SafetyRegion) -> Result<Self> {
        if !cutoff.has_inner_ramp() {
            return Err(Error::InvalidDeformation(
                "radial fields need an inner ramp to stay smooth at their center".into(),
            ));
        }
        Self::build(FieldKind::Radial { amplitude }, center, cutoff, support)
    }

    pub fn rotational(center: [f64; 2], amplitude: f64, cutoff: Cutoff, support: SafetyRegion) -> Result<Self> {
        Self::build(FieldKind::Rotational { amplitude }, center, cutoff, support)
    }

    pub fn affine(
        center: [f64; 2],
        matrix: Mat2,
        offset: [f64; 2],
        cutoff: Cutoff,
        support: SafetyRegion,
    ) -> Result<Self> {
        Self::build(FieldKind::Affine { matrix, offset }, center, cutoff, support)
    }

    /// Wraps an arbitrary evaluator. The support is checked by sampling and the
    /// bound is estimated by finite differences on a dense polar grid.
    pub fn custom(
        func: Arc<dyn Fn([f64; 2]) -> [f64; 2] + Send + Sync>,
        support: SafetyRegion,
    ) -> Result<Self> {
        let mut field = Self {
            kind: FieldKind::Custom(CustomField { func }),
            center: support.center,
            cutoff: Cutoff::disk(0.0, support.radius).expect("valid cutoff"),
            support,
            lipschitz_bound: 0.0,
        };
        field.check_support()?;
        let mut bound: f64 = 0.0;
        let nr = 120;
        let nt = 256;
        for i in 0..=nr {
            let rho = support.radius * 1.02 * i as f64 / nr as f64;
            for j in 0..nt {
                let t = 2.0 * std::f64::consts::PI * j as f64 / nt as f64;
                let x = [support.center[0] + rho * t.cos(), support.center[1] + rho * t.sin()];
                let v = field.value(x);
                bound = bound.max(v[0].hypot(v[1]));
                bound = bound.max(norm2(&field.gradient_fd(x, FD_STEP)));
            }
        }
        field.lipschitz_bound = bound * 1.1;
        Ok(field)
    }

    fn build(kind: FieldKind, center: [f64; 2], cutoff: Cutoff, support: SafetyRegion) -> Result<Self> {
        let offset = (center[0] - support.center[0]).hypot(center[1] - support.center[1]);
        if offset + cutoff.outer_end > support.radius + 1e-12 {
            return Err(Error::InvalidDeformation(format!(
                "cutoff radius {:.4} about ({:.3}, {:.3}) leaves the safety region of radius {:.4}",
                cutoff.outer_end, center[0], center[1], support.radius
            )));
        }
        let mut field = Self {
            kind,
            center,
            cutoff,
            support,
            lipschitz_bound: 0.0,
        };
        field.lipschitz_bound = field.certified_bound();
        Ok(field)
    }

    fn certified_bound(&self) -> f64 {
        let n = 20_000;
        let mut sup_val: f64 = 0.0;
        let mut sup_grad: f64 = 0.0;
        for i in 0..=n {
            let rho = self.cutoff.outer_end * i as f64 / n as f64;
            let (g, dg) = self.cutoff.eval(rho);
            match &self.kind {
                FieldKind::Zero | FieldKind::Custom(_) => {}
                FieldKind::Radial { amplitude } => {
                    let a = amplitude.abs();
                    sup_val = sup_val.max(a * g);
                    let tang = if rho > 0.0 { g / rho } else { 0.0 };
                    sup_grad = sup_grad.max(a * dg.abs().max(tang));
                }
                FieldKind::Rotational { amplitude } => {
                    let a = amplitude.abs();
                    sup_val = sup_val.max(a * rho * g);
                    sup_grad = sup_grad.max(a * g.max((g + rho * dg).abs()));
                }
                FieldKind::Affine { matrix, offset } => {
                    let l = norm2(matrix);
                    let t = offset[0].hypot(offset[1]);
                    sup_val = sup_val.max((l * rho + t) * g);
                    sup_grad = sup_grad.max(l * g + (l * rho + t) * dg.abs());
                }
            }
        }
        // sampling step slack
        sup_val.max(sup_grad) * 1.001
    }

    pub fn kind(&self) -> &FieldKind {
        &self.kind
    }

    pub fn center(&self) -> [f64; 2] {
        self.center
    }

    pub fn cutoff(&self) -> Cutoff {
        self.cutoff
    }

    pub fn support(&self) -> &SafetyRegion {
        &self.support
    }

    /// Certified upper bound on the W^{1,inf} norm.
    pub fn lipschitz_bound(&self) -> f64 {
        self.lipschitz_bound
    }

    pub fn has_closed_form(&self) -> bool {
        !matches!(self.kind, FieldKind::Custom(_))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, FieldKind::Zero)
    }

    fn raw(&self, x: [f64; 2]) -> ([f64; 2], Mat2) {
        let dx = x[0] - self.center[0];
        let dy = x[1] - self.center[1];
        match &self.kind {
            FieldKind::Zero | FieldKind::Custom(_) => ([0.0, 0.0], [[0.0; 2]; 2]),
            FieldKind::Radial { amplitude } => {
                let rho = dx.hypot(dy);
                if rho < 1e-14 {
                    return ([0.0, 0.0], [[0.0; 2]; 2]);
                }
                let (ex, ey) = (dx / rho, dy / rho);
                let a = *amplitude;
                (
                    [a * ex, a * ey],
                    [
                        [a * (1.0 - ex * ex) / rho, -a * ex * ey / rho],
                        [-a * ex * ey / rho, a * (1.0 - ey * ey) / rho],
                    ],
                )
            }
            FieldKind::Rotational { amplitude } => {
                let a = *amplitude;
                ([-a * dy, a * dx], [[0.0, -a], [a, 0.0]])
            }
            FieldKind::Affine { matrix, offset } => (
                [
                    matrix[0][0] * dx + matrix[0][1] * dy + offset[0],
                    matrix[1][0] * dx + matrix[1][1] * dy + offset[1],
                ],
                *matrix,
            ),
        }
    }

    pub fn value(&self, x: [f64; 2]) -> [f64; 2] {
        if let FieldKind::Custom(c) = &self.kind {
            return (c.func)(x);
        }
        if self.is_zero() {
            return [0.0, 0.0];
        }
        let rho = (x[0] - self.center[0]).hypot(x[1] - self.center[1]);
        if rho >= self.cutoff.outer_end {
            return [0.0, 0.0];
        }
        let (g, _) = self.cutoff.eval(rho);
        let (v, _) = self.raw(x);
        [v[0] * g, v[1] * g]
    }

    /// `d mu_i / d x_j`, analytic when available.
    pub fn gradient(&self, x: [f64; 2]) -> Mat2 {
        match &self.kind {
            FieldKind::Zero => [[0.0; 2]; 2],
            FieldKind::Custom(_) => self.gradient_fd(x, FD_STEP),
            _ => {
                let dx = x[0] - self.center[0];
                let dy = x[1] - self.center[1];
                let rho = dx.hypot(dy);
                if rho >= self.cutoff.outer_end {
                    return [[0.0; 2]; 2];
                }
                let (g, dg) = self.cutoff.eval(rho);
                let (v, dv) = self.raw(x);
                let grad_g = if rho > 1e-14 {
                    [dg * dx / rho, dg * dy / rho]
                } else {
                    [0.0, 0.0]
                };
                let mut out = [[0.0; 2]; 2];
                for i in 0..2 {
                    for j in 0..2 {
                        out[i][j] = dv[i][j] * g + v[i] * grad_g[j];
                    }
                }
                out
            }
        }
    }

    /// Central finite-difference gradient with step `h`.
    pub fn gradient_fd(&self, x: [f64; 2], h: f64) -> Mat2 {
        let mut out = [[0.0; 2]; 2];
        for j in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[j] += h;
            xm[j] -= h;
            let vp = self.value(xp);
            let vm = self.value(xm);
            for i in 0..2 {
                out[i][j] = (vp[i] - vm[i]) / (2.0 * h);
            }
        }
        out
    }

    /// `m_sigma(x) = x + sigma mu(x)`.
    pub fn map(&self, x: [f64; 2], sigma: f64) -> [f64; 2] {
        let v = self.value(x);
        [x[0] + sigma * v[0], x[1] + sigma * v[1]]
    }

    /// Solves `x + sigma mu(x) = y` by fixed-point iteration.
    pub fn inverse_map(&self, y: [f64; 2], sigma: f64) -> Result<[f64; 2]> {
        self.check_sigma(sigma)?;
        let mut x = y;
        for _ in 0..200 {
            let v = self.value(x);
            let next = [y[0] - sigma * v[0], y[1] - sigma * v[1]];
            let change = (next[0] - x[0]).hypot(next[1] - x[1]);
            x = next;
            if change <= 1e-15 * (1.0 + y[0].hypot(y[1])) {
                return Ok(x);
            }
        }
        Ok(x)
    }

    pub fn check_sigma(&self, sigma: f64) -> Result<()> {
        if !sigma.is_finite() {
            return Err(Error::InvalidArgument("sigma must be finite".into()));
        }
        if sigma.abs() * self.lipschitz_bound >= 1.0 {
            return Err(Error::InvalidDeformation(format!(
                "|sigma| * bound = {:.4} must be below 1",
                sigma.abs() * self.lipschitz_bound
            )));
        }
        Ok(())
    }

    /// Sampled check that the field vanishes outside the safety region.
    pub fn check_support(&self) -> Result<()> {
        let s = &self.support;
        let n = 512;
        for ring in [1.0 + 1e-9, 1.05, 1.25, 1.6] {
            for j in 0..n {
                let t = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
                let x = [
                    s.center[0] + ring * s.radius * t.cos(),
                    s.center[1] + ring * s.radius * t.sin(),
                ];
                let v = self.value(x);
                if v[0] != 0.0 || v[1] != 0.0 {
                    return Err(Error::InvalidDeformation(format!(
                        "field is nonzero at ({:.4}, {:.4}) outside the safety region",
                        x[0], x[1]
                    )));
                }
            }
        }
        Ok(())
    }
}
