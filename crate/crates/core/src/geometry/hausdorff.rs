//! Symmetric Hausdorff distance between obstacle boundaries.

use crate::geometry::shape::ObstacleShape;

/// Boundary samples per curve.
pub const HAUSDORFF_SAMPLES: usize = 2048;

fn point_segment_distance2(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = if len2 > 0.0 {
        (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let x = p[0] - a[0] - t * d[0];
    let y = p[1] - a[1] - t * d[1];
    x * x + y * y
}

/// `max_{p in from} dist(p, closed polyline to)`.
pub fn directed_hausdorff(from: &[[f64; 2]], to: &[[f64; 2]]) -> f64 {
    let n = to.len();
    let mut worst: f64 = 0.0;
    for &p in from {
        let mut best = f64::INFINITY;
        for i in 0..n {
            best = best.min(point_segment_distance2(p, to[i], to[(i + 1) % n]));
            if best <= worst * worst {
                // cannot raise the max any more
                break;
            }
        }
        worst = worst.max(best.sqrt());
    }
    worst
}

/// Symmetric Hausdorff distance between two closed polylines.
pub fn hausdorff_polylines(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    directed_hausdorff(a, b).max(directed_hausdorff(b, a))
}

pub fn hausdorff_distance(shape0: &ObstacleShape, shape1: &ObstacleShape) -> f64 {
    if shape0 == shape1 {
        return 0.0;
    }
    let a = shape0.boundary_samples(HAUSDORFF_SAMPLES);
    let b = shape1.boundary_samples(HAUSDORFF_SAMPLES);
    hausdorff_polylines(&a, &b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_shapes() {
        let s = ObstacleShape::new([0.0, 0.1], 0.3, vec![0.0, 0.02, -0.01]);
        assert!(hausdorff_distance(&s, &s.clone()) <= 1e-12);
    }

    #[test]
    fn concentric_circles() {
        let a = ObstacleShape::circle([0.0, 0.0], 0.3);
        let b = ObstacleShape::circle([0.0, 0.0], 0.35);
        assert!((hausdorff_distance(&a, &b) - 0.05).abs() < 1e-6);
    }

    #[test]
    fn translated_circles() {
        let a = ObstacleShape::circle([0.0, 0.0], 0.3);
        let b = ObstacleShape::circle([0.1, 0.0], 0.3);
        assert!((hausdorff_distance(&a, &b) - 0.1).abs() < 1e-6);
    }
}
