use std::fmt;

/// Constant coefficients of the coupled operator
/// `(-Δy + a y + b z, -Δz + A y + B z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientSet {
    pub a: f64,
    pub b: f64,
    pub big_a: f64,
    pub big_b: f64,
    /// Certified margin, once [`check_admissibility`] has accepted the set.
    pub lambda_margin: Option<f64>,
}

impl CoefficientSet {
    pub fn new(a: f64, b: f64, big_a: f64, big_b: f64) -> Self {
        Self {
            a,
            b,
            big_a,
            big_b,
            lambda_margin: None,
        }
    }

    pub fn laplace() -> Self {
        Self::new(0.0, 0.0, 0.0, 0.0)
    }

    /// `[[a, b], [A, B]]`, row = equation.
    pub fn coupling(&self) -> [[f64; 2]; 2] {
        [[self.a, self.b], [self.big_a, self.big_b]]
    }

    /// Coupling of the adjoint system.
    pub fn adjoint_coupling(&self) -> [[f64; 2]; 2] {
        [[self.a, self.big_a], [self.b, self.big_b]]
    }

    /// Smallest eigenvalue of the symmetrized coupling matrix.
    pub fn min_symmetric_eigenvalue(&self) -> f64 {
        let off = 0.5 * (self.b + self.big_a);
        let mean = 0.5 * (self.a + self.big_b);
        let half = 0.5 * (self.a - self.big_b);
        mean - half.hypot(off)
    }

    /// `max(0, -min eig)`.
    pub fn lambda_star(&self) -> f64 {
        (-self.min_symmetric_eigenvalue()).max(0.0)
    }

    pub fn is_finite(&self) -> bool {
        [self.a, self.b, self.big_a, self.big_b].iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Admissibility {
    Admissible { lambda: f64, lambda_star: f64 },
    Inadmissible { lambda_star: f64, limit: f64 },
}

impl Admissibility {
    pub fn is_admissible(&self) -> bool {
        matches!(self, Admissibility::Admissible { .. })
    }
}

impl fmt::Display for Admissibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Admissibility::Admissible { lambda, lambda_star } => {
                write!(f, "admissible (lambda* = {lambda_star}, certified lambda = {lambda})")
            }
            Admissibility::Inadmissible { lambda_star, limit } => {
                write!(f, "inadmissible (lambda* = {lambda_star} >= 1/mu1 = {limit})")
            }
        }
    }
}

/// Compares `lambda*` with `1/mu1`; the certified margin is the midpoint of `(lambda*, 1/mu1)`.
pub fn check_admissibility(coeffs: &CoefficientSet, mu1: f64) -> Admissibility {
    assert!(mu1 > 0.0, "mu1 must be positive");
    let lambda_star = coeffs.lambda_star();
    let limit = 1.0 / mu1;
    if lambda_star < limit {
        Admissibility::Admissible {
            lambda: 0.5 * (lambda_star + limit),
            lambda_star,
        }
    } else {
        Admissibility::Inadmissible { lambda_star, limit }
    }
}

/// Stores the certified margin in `coeffs` when admissible.
pub fn certify(coeffs: &mut CoefficientSet, mu1: f64) -> Admissibility {
    let verdict = check_admissibility(coeffs, mu1);
    if let Admissibility::Admissible { lambda, .. } = verdict {
        coeffs.lambda_margin = Some(lambda);
    }
    verdict
}
