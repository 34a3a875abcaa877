//! Outer domain, observation arc and the safety region containing all admissible obstacles.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Required gap between nested boundaries (obstacle / safety region / outer boundary).
pub const DEFAULT_CLEARANCE: f64 = 0.05;

/// The outer boundary of the domain: a disk or a convex polygon (counter-clockwise vertices).
#[derive(Debug, Clone, PartialEq)]
pub enum OuterBoundary {
    Disk { center: [f64; 2], radius: f64 },
    Polygon { vertices: Vec<[f64; 2]> },
}

impl OuterBoundary {
    pub fn unit_disk() -> Self {
        OuterBoundary::Disk {
            center: [0.0, 0.0],
            radius: 1.0,
        }
    }

    pub fn unit_square() -> Self {
        OuterBoundary::Polygon {
            vertices: vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
        }
    }

    /// Reference point used for angular parametrization of the boundary.
    pub fn center(&self) -> [f64; 2] {
        match self {
            OuterBoundary::Disk { center, .. } => *center,
            OuterBoundary::Polygon { vertices } => {
                let n = vertices.len() as f64;
                let sx: f64 = vertices.iter().map(|v| v[0]).sum();
                let sy: f64 = vertices.iter().map(|v| v[1]).sum();
                [sx / n, sy / n]
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            OuterBoundary::Disk { radius, center } => {
                if !(*radius > 0.0) || !radius.is_finite() || !center.iter().all(|c| c.is_finite()) {
                    return Err(Error::InvalidArgument(format!(
                        "disk radius must be positive and finite, got {radius}"
                    )));
                }
            }
            OuterBoundary::Polygon { vertices } => {
                if vertices.len() < 3 {
                    return Err(Error::InvalidArgument(
                        "polygon needs at least three vertices".into(),
                    ));
                }
                let n = vertices.len();
                for i in 0..n {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    let c = vertices[(i + 2) % n];
                    let cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
                    if cross <= 0.0 {
                        return Err(Error::InvalidArgument(
                            "polygon must be convex with counter-clockwise vertices".into(),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn area(&self) -> f64 {
        match self {
            OuterBoundary::Disk { radius, .. } => PI * radius * radius,
            OuterBoundary::Polygon { vertices } => {
                let n = vertices.len();
                0.5 * (0..n)
                    .map(|i| {
                        let a = vertices[i];
                        let b = vertices[(i + 1) % n];
                        a[0] * b[1] - a[1] * b[0]
                    })
                    .sum::<f64>()
            }
        }
    }

    /// Signed distance to the boundary, positive inside.
    pub fn inside_distance(&self, p: [f64; 2]) -> f64 {
        match self {
            OuterBoundary::Disk { center, radius } => {
                radius - (p[0] - center[0]).hypot(p[1] - center[1])
            }
            OuterBoundary::Polygon { vertices } => {
                let n = vertices.len();
                (0..n)
                    .map(|i| {
                        let a = vertices[i];
                        let b = vertices[(i + 1) % n];
                        let len = (b[0] - a[0]).hypot(b[1] - a[1]);
                        // inward normal of a ccw edge is the left normal
                        ((b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])) / len
                    })
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        self.inside_distance(p) > 0.0
    }

    pub fn perimeter(&self) -> f64 {
        match self {
            OuterBoundary::Disk { radius, .. } => 2.0 * PI * radius,
            OuterBoundary::Polygon { vertices } => {
                let n = vertices.len();
                (0..n)
                    .map(|i| {
                        let a = vertices[i];
                        let b = vertices[(i + 1) % n];
                        (b[0] - a[0]).hypot(b[1] - a[1])
                    })
                    .sum()
            }
        }
    }

    /// Outward unit normal at a boundary point.
    pub fn outward_normal(&self, p: [f64; 2]) -> [f64; 2] {
        match self {
            OuterBoundary::Disk { center, .. } => {
                let dx = p[0] - center[0];
                let dy = p[1] - center[1];
                let r = dx.hypot(dy);
                [dx / r, dy / r]
            }
            OuterBoundary::Polygon { vertices } => {
                let n = vertices.len();
                let mut best = (f64::INFINITY, [0.0, 0.0]);
                for i in 0..n {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    let len = (b[0] - a[0]).hypot(b[1] - a[1]);
                    let d = ((b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])).abs()
                        / len;
                    if d < best.0 {
                        best = (d, [(b[1] - a[1]) / len, -(b[0] - a[0]) / len]);
                    }
                }
                best.1
            }
        }
    }

    /// Largest radius `R` such that the disk of radius `R` about `c` fits inside.
    pub fn inscribed_radius_about(&self, c: [f64; 2]) -> f64 {
        self.inside_distance(c)
    }
}

/// Angular range `[start, end]` (radians, about the outer-boundary center) where
/// normal derivatives are observed. `end - start >= 2 pi` means the whole boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservationArc {
    pub start: f64,
    pub end: f64,
}

impl ObservationArc {
    pub fn full() -> Self {
        Self {
            start: 0.0,
            end: 2.0 * PI,
        }
    }

    pub fn new(start: f64, end: f64) -> Self {
        Self { start, end }
    }

    pub fn is_full(&self) -> bool {
        self.end - self.start >= 2.0 * PI - 1e-12
    }

    pub fn length_angle(&self) -> f64 {
        (self.end - self.start).clamp(0.0, 2.0 * PI)
    }

    /// True if the polar angle `theta` lies on the (closed) arc.
    pub fn contains_angle(&self, theta: f64) -> bool {
        if self.is_full() {
            return true;
        }
        let rel = (theta - self.start).rem_euclid(2.0 * PI);
        rel <= self.length_angle() + 1e-12
    }
}

/// The disk `D*` that must strictly contain every admissible obstacle; deformation
/// fields vanish outside it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SafetyRegion {
    pub center: [f64; 2],
    pub radius: f64,
    pub clearance: f64,
}

impl SafetyRegion {
    pub fn new(center: [f64; 2], radius: f64) -> Self {
        Self {
            center,
            radius,
            clearance: DEFAULT_CLEARANCE,
        }
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        (p[0] - self.center[0]).hypot(p[1] - self.center[1]) < self.radius
    }

    pub fn distance_from_center(&self, p: [f64; 2]) -> f64 {
        (p[0] - self.center[0]).hypot(p[1] - self.center[1])
    }
}

/// Outer domain, observation arc and safety region of one problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pub outer: OuterBoundary,
    pub gamma: ObservationArc,
    pub safety: SafetyRegion,
}

impl Geometry {
    /// Unit disk, full observation arc, safety disk of radius 0.6.
    pub fn unit_disk() -> Self {
        Self {
            outer: OuterBoundary::unit_disk(),
            gamma: ObservationArc::full(),
            safety: SafetyRegion::new([0.0, 0.0], 0.6),
        }
    }

    pub fn with_gamma(mut self, gamma: ObservationArc) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.outer.validate()?;
        if self.gamma.length_angle() <= 0.0 {
            return Err(Error::EmptyGamma);
        }
        if !(self.safety.radius > 0.0) {
            return Err(Error::InvalidArgument("safety radius must be positive".into()));
        }
        let room = self.outer.inscribed_radius_about(self.safety.center);
        if self.safety.radius + self.safety.clearance > room {
            return Err(Error::Clearance(format!(
                "safety region (radius {:.4}) needs clearance {:.4} to the outer boundary, only {:.4} available",
                self.safety.radius,
                self.safety.clearance,
                room - self.safety.radius
            )));
        }
        Ok(())
    }
}
