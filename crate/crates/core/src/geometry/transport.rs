//! Per-triangle transport coefficients of `m = I + sigma mu`: `Jac(m)` and `M = ((m')^T)^{-1}`.

use crate::error::{Error, Result};
use crate::geometry::deformation::{DeformationField, Mat2, FD_STEP};
use crate::geometry::mesh::TriangleMesh;

/// How `m'` is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Differentiation {
    /// Analytic gradient when the field has a closed form, else finite differences.
    #[default]
    Auto,
    FiniteDifference,
}

/// Barycenter values of `Jac(m)` and `M` on every triangle of the reference mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportData {
    pub jacobian: Vec<f64>,
    pub m_matrix: Vec<Mat2>,
}

impl TransportData {
    pub fn identity(num_triangles: usize) -> Self {
        Self {
            jacobian: vec![1.0; num_triangles],
            m_matrix: vec![[[1.0, 0.0], [0.0, 1.0]]; num_triangles],
        }
    }

    /// `Jac(m) M^T M` on triangle `t`.
    pub fn diffusion_tensor(&self, t: usize) -> Mat2 {
        let m = &self.m_matrix[t];
        let j = self.jacobian[t];
        let mut out = [[0.0; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                out[a][b] = j * (m[0][a] * m[0][b] + m[1][a] * m[1][b]);
            }
        }
        out
    }

    /// Lower bound on `Jac(m)` and upper bounds on `|M|` and `|M^{-1}|` (Frobenius).
    pub fn bounds(&self) -> (f64, f64, f64) {
        let jmin = self.jacobian.iter().cloned().fold(f64::INFINITY, f64::min);
        let mut mmax: f64 = 0.0;
        let mut minv: f64 = 0.0;
        for m in &self.m_matrix {
            let fro = (m[0][0].powi(2) + m[0][1].powi(2) + m[1][0].powi(2) + m[1][1].powi(2)).sqrt();
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            mmax = mmax.max(fro);
            minv = minv.max(fro / det.abs());
        }
        (jmin, mmax, minv)
    }
}

/// Computes `m' = I + sigma grad mu` at `x`.
pub fn m_prime(mu: &DeformationField, sigma: f64, x: [f64; 2], how: Differentiation) -> Mat2 {
    let g = match how {
        Differentiation::Auto => mu.gradient(x),
        Differentiation::FiniteDifference => mu.gradient_fd(x, FD_STEP),
    };
    [
        [1.0 + sigma * g[0][0], sigma * g[0][1]],
        [sigma * g[1][0], 1.0 + sigma * g[1][1]],
    ]
}

pub fn transport_data(mu: &DeformationField, sigma: f64, mesh: &TriangleMesh) -> Result<TransportData> {
    transport_data_with(mu, sigma, mesh, Differentiation::Auto)
}

pub fn transport_data_with(
    mu: &DeformationField,
    sigma: f64,
    mesh: &TriangleMesh,
    how: Differentiation,
) -> Result<TransportData> {
    mu.check_sigma(sigma)?;
    let nt = mesh.num_triangles();
    if sigma == 0.0 || mu.is_zero() {
        return Ok(TransportData::identity(nt));
    }
    let mut jacobian = Vec::with_capacity(nt);
    let mut m_matrix = Vec::with_capacity(nt);
    for t in 0..nt {
        let x = mesh.barycenter(t);
        let mp = m_prime(mu, sigma, x, how);
        let det = mp[0][0] * mp[1][1] - mp[0][1] * mp[1][0];
        if !(det > 0.0) {
            return Err(Error::OrientationReversal { triangle: t, det });
        }
        // M = (m'^T)^{-1}
        let inv_t = [
            [mp[1][1] / det, -mp[1][0] / det],
            [-mp[0][1] / det, mp[0][0] / det],
        ];
        jacobian.push(det);
        m_matrix.push(inv_t);
    }
    Ok(TransportData { jacobian, m_matrix })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::deformation::Cutoff;
    use crate::geometry::domain::{Geometry, SafetyRegion};
    use crate::geometry::mesher::build_mesh;
    use crate::geometry::shape::ObstacleShape;

    fn mesh() -> TriangleMesh {
        build_mesh(&Geometry::unit_disk(), Some(&ObstacleShape::circle([0.0, 0.0], 0.3)), 0.1).unwrap()
    }

    #[test]
    fn zero_field_gives_identity() {
        let m = mesh();
        let mu = DeformationField::zero(SafetyRegion::new([0.0, 0.0], 0.6));
        let td = transport_data(&mu, 0.7, &m).unwrap();
        assert!(td.jacobian.iter().all(|&j| j == 1.0));
        assert!(td.m_matrix.iter().all(|a| *a == [[1.0, 0.0], [0.0, 1.0]]));
    }

    #[test]
    fn stretch_field() {
        let m = mesh();
        let mu = DeformationField::affine(
            [0.0, 0.0],
            [[0.1, 0.0], [0.0, 0.0]],
            [0.0, 0.0],
            Cutoff::disk(0.45, 0.58).unwrap(),
            SafetyRegion::new([0.0, 0.0], 0.6),
        )
        .unwrap();
        let td = transport_data(&mu, 1.0, &m).unwrap();
        let mut checked = 0;
        for t in 0..m.num_triangles() {
            let b = m.barycenter(t);
            if b[0].hypot(b[1]) < 0.44 {
                assert!((td.jacobian[t] - 1.1).abs() < 1e-14);
                let mm = td.m_matrix[t];
                assert!((mm[0][0] - 1.0 / 1.1).abs() < 1e-14 && (mm[1][1] - 1.0).abs() < 1e-14);
                assert!(mm[0][1] == 0.0 && mm[1][0] == 0.0);
                checked += 1;
            }
        }
        assert!(checked > 10);
    }

    #[test]
    fn translation_gives_identity_on_plateau() {
        let m = mesh();
        let mu = DeformationField::affine(
            [0.0, 0.0],
            [[0.0; 2]; 2],
            [0.05, -0.02],
            Cutoff::disk(0.45, 0.58).unwrap(),
            SafetyRegion::new([0.0, 0.0], 0.6),
        )
        .unwrap();
        let td = transport_data(&mu, 1.0, &m).unwrap();
        for t in 0..m.num_triangles() {
            let b = m.barycenter(t);
            if b[0].hypot(b[1]) < 0.44 {
                assert!((td.jacobian[t] - 1.0).abs() < 1e-15);
            }
        }
    }
}
