//! Shape derivatives, the adjoint boundary identity and the sensitivity matrix.
//!
//! Normal derivatives on the obstacle come from the same consistent flux recovery as
//! on γ. The normal there points into the obstacle (out of the computational domain),
//! so a positive `mu . n` shrinks the obstacle.

use std::fmt::Write;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem::solve::{solve_adjoint, solve_dirichlet, solve_forward, solve_with_load};
use crate::fem::{BoundaryData, CoefficientSet, FieldPair, ScalarMap};
use crate::geometry::deformation::DeformationField;
use crate::geometry::mesh::TriangleMesh;
use crate::geometry::shape::{basis_label, basis_value, ObstacleShape};
use crate::observation::{boundary_flux, normal_trace, BoundaryFlux, BoundaryPart, BoundaryTrace};

/// A boundary test pair `(eta, theta)` on γ.
#[derive(Debug, Clone)]
pub struct TestPair {
    pub eta: ScalarMap,
    pub theta: ScalarMap,
    pub label: String,
}

impl TestPair {
    pub fn new(eta: ScalarMap, theta: ScalarMap, label: impl Into<String>) -> Self {
        Self {
            eta,
            theta,
            label: label.into(),
        }
    }

    /// `∫_γ alpha eta + beta theta` with the lumped trace weights.
    pub fn project(&self, trace: &BoundaryTrace, mesh: &TriangleMesh) -> f64 {
        trace
            .gamma_nodes
            .iter()
            .enumerate()
            .map(|(k, &n)| {
                let p = mesh.vertices[n];
                trace.edge_weights[k] * (trace.alpha[k] * self.eta.eval(p) + trace.beta[k] * self.theta.eval(p))
            })
            .sum()
    }
}

/// Trigonometric test pairs `{1, cos t, sin t, cos 2t, ...}` about `center`.
///
/// With `both_channels` each mode appears as `(mode, 0)` and then `(0, mode)`.
pub fn trig_test_pairs(center: [f64; 2], count: usize, both_channels: bool) -> Vec<TestPair> {
    let mut out = Vec::with_capacity(count);
    let mut k = 0usize;
    while out.len() < count {
        let freq = k.div_ceil(2);
        let m = ScalarMap::mode(center, freq, k % 2 == 0 && k > 0);
        let label = basis_label(k);
        out.push(TestPair::new(m.clone(), ScalarMap::Zero, format!("({label},0)")));
        if both_channels && out.len() < count {
            out.push(TestPair::new(ScalarMap::Zero, m, format!("(0,{label})")));
        }
        k += 1;
    }
    out
}

pub type AngleFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Radial basis function on the obstacle, a function of the polar angle about its center.
#[derive(Clone)]
pub struct BasisFunction {
    pub label: String,
    pub f: AngleFn,
}

impl std::fmt::Debug for BasisFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BasisFunction({})", self.label)
    }
}

/// First `p` members of `{1, cos t, sin t, ...}`, optionally rotated by `angle`.
pub fn trig_basis(p: usize, angle: f64) -> Vec<BasisFunction> {
    (0..p)
        .map(|k| BasisFunction {
            label: basis_label(k),
            f: Arc::new(move |t| basis_value(k, t - angle)),
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct SensitivityMatrix {
    /// `entries[j][i]`: row `j` is a test pair, column `i` a basis function.
    pub entries: Vec<Vec<f64>>,
    pub basis_labels: Vec<String>,
    pub testfn_labels: Vec<String>,
    pub obstacle: Option<ObstacleShape>,
}

impl SensitivityMatrix {
    pub fn rows(&self) -> usize {
        self.entries.len()
    }

    pub fn cols(&self) -> usize {
        self.basis_labels.len()
    }

    pub fn column(&self, i: usize) -> Vec<f64> {
        self.entries.iter().map(|r| r[i]).collect()
    }

    pub fn to_dmatrix(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.rows(), self.cols(), |j, i| self.entries[j][i])
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("i,j,value\n");
        for (j, row) in self.entries.iter().enumerate() {
            for (i, v) in row.iter().enumerate() {
                let _ = writeln!(s, "{i},{j},{v:e}");
            }
        }
        s
    }
}

fn obstacle_of(mesh: &TriangleMesh) -> Result<&ObstacleShape> {
    mesh.obstacle
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("mesh has no obstacle".into()))
}

/// `mu . n` at the obstacle nodes (in `flux.nodes` order), `n` pointing into the obstacle.
fn normal_component(mesh: &TriangleMesh, nodes: &[usize], mu: &DeformationField) -> Result<Vec<f64>> {
    let shape = obstacle_of(mesh)?;
    Ok(nodes
        .iter()
        .map(|&v| {
            let x = mesh.vertices[v];
            let nu = shape.outward_normal(shape.angle_of(x));
            let m = mu.value(x);
            -(m[0] * nu[0] + m[1] * nu[1])
        })
        .collect())
}

/// Forward normal derivatives on the obstacle.
pub fn obstacle_flux(mesh: &TriangleMesh, coeffs: &CoefficientSet, forward: &FieldPair) -> Result<BoundaryFlux> {
    boundary_flux(mesh, coeffs.coupling(), forward, None, BoundaryPart::Obstacle)
}

/// Adjoint normal derivatives on the obstacle for one test pair.
pub fn adjoint_obstacle_flux(mesh: &TriangleMesh, coeffs: &CoefficientSet, test: &TestPair) -> Result<BoundaryFlux> {
    let adj = solve_adjoint(mesh, coeffs, &test.eta, &test.theta)?;
    boundary_flux(mesh, coeffs.adjoint_coupling(), &adj, None, BoundaryPart::Obstacle)
}

/// `sum_k w_k (dy/dn_k R_eta,k + dz/dn_k R_theta,k)` over obstacle nodes.
///
/// `R` are the adjoint weak residuals, so for `w = -mu . n` this is exactly the
/// γ-moment of the discrete shape derivative against the test pair.
pub fn obstacle_pairing(forward: &BoundaryFlux, adjoint: &BoundaryFlux, weight: &[f64]) -> f64 {
    weight
        .iter()
        .enumerate()
        .map(|(k, w)| w * (forward.flux_y[k] * adjoint.moment_y[k] + forward.flux_z[k] * adjoint.moment_z[k]))
        .sum()
}

/// Solves for `(y', z')`: zero on the outer boundary, `-(mu . n) d(y, z)/dn` on the obstacle.
pub fn solve_shape_derivative(
    mesh: &TriangleMesh,
    coeffs: &CoefficientSet,
    forward: &FieldPair,
    mu: &DeformationField,
) -> Result<FieldPair> {
    let flux = obstacle_flux(mesh, coeffs, forward)?;
    let mn = normal_component(mesh, &flux.nodes, mu)?;
    let mut dirichlet = vec![[0.0; 2]; mesh.num_nodes()];
    for (k, &v) in flux.nodes.iter().enumerate() {
        dirichlet[v] = [-mn[k] * flux.flux_y[k], -mn[k] * flux.flux_z[k]];
    }
    solve_dirichlet(mesh, coeffs.coupling(), None, &dirichlet, None)
}

/// `-∫_∂D (mu . n)(dy/dn deta/dn + dz/dn dtheta/dn)`.
pub fn identity_rhs(
    mesh: &TriangleMesh,
    forward: &BoundaryFlux,
    adjoint: &BoundaryFlux,
    mu: &DeformationField,
) -> Result<f64> {
    let w: Vec<f64> = normal_component(mesh, &forward.nodes, mu)?.iter().map(|v| -v).collect();
    Ok(obstacle_pairing(forward, adjoint, &w))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityRow {
    pub sigma: f64,
    pub lhs: f64,
    pub rhs_scaled: f64,
    pub remainder: f64,
}

#[derive(Debug, Clone)]
pub struct IdentityTable {
    pub rhs: f64,
    pub rows: Vec<IdentityRow>,
}

impl IdentityTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("sigma,lhs,rhs_scaled,remainder\n");
        for r in &self.rows {
            let _ = writeln!(s, "{:e},{:e},{:e},{:e}", r.sigma, r.lhs, r.rhs_scaled, r.remainder);
        }
        s
    }

    /// Least-squares slope of `log |remainder|` against `log sigma` (nonzero rows only).
    pub fn remainder_slope(&self) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .filter(|r| r.sigma > 0.0 && r.remainder != 0.0)
            .map(|r| (r.sigma.ln(), r.remainder.abs().ln()))
            .collect();
        crate::linalg::fit_line(&pts).map(|(slope, _)| slope)
    }
}

/// Taylor test of the adjoint identity along `sigma * mu`.
pub fn adjoint_identity_check(
    mesh: &TriangleMesh,
    coeffs: &CoefficientSet,
    data: &BoundaryData,
    mu: &DeformationField,
    test: &TestPair,
    sigma_grid: &[f64],
) -> Result<IdentityTable> {
    let forward = solve_forward(mesh, coeffs, data, None)?;
    let base = normal_trace(&forward, mesh, coeffs, None)?;
    let rhs = identity_rhs(
        mesh,
        &obstacle_flux(mesh, coeffs, &forward)?,
        &adjoint_obstacle_flux(mesh, coeffs, test)?,
        mu,
    )?;
    let p0 = test.project(&base, mesh);
    let rows = crate::par::map(sigma_grid, |&sigma| {
            let lhs = if sigma == 0.0 {
                0.0
            } else {
                let moved = mesh.apply_deformation(mu, sigma)?;
                let sol = solve_forward(&moved, coeffs, data, None)?;
                let trace = normal_trace(&sol, &moved, coeffs, None)?;
                test.project(&trace, &moved) - p0
            };
            Ok(IdentityRow {
                sigma,
                lhs,
                rhs_scaled: sigma * rhs,
                remainder: lhs - sigma * rhs,
            })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(IdentityTable { rhs, rows })
}

/// `K_ji = ∫_∂D f_i (e_r . nu)(dy/dn deta_j/dn + dz/dn dtheta_j/dn)`.
///
/// Column `i` is the first-order change of the projected traces when the radial
/// function grows by `f_i`.
pub fn sensitivity_matrix(
    mesh: &TriangleMesh,
    coeffs: &CoefficientSet,
    forward: &FieldPair,
    basis: &[BasisFunction],
    tests: &[TestPair],
) -> Result<SensitivityMatrix> {
    if basis.is_empty() || tests.is_empty() {
        return Err(Error::InvalidArgument("sensitivity matrix needs p > 0".into()));
    }
    let shape = obstacle_of(mesh)?;
    let fwd = obstacle_flux(mesh, coeffs, forward)?;
    let weights: Vec<Vec<f64>> = basis
        .iter()
        .map(|b| {
            fwd.nodes
                .iter()
                .map(|&v| {
                    let t = shape.angle_of(mesh.vertices[v]);
                    (b.f)(t) * shape.radial_normal_factor(t)
                })
                .collect()
        })
        .collect();
    let entries = crate::par::map(tests, |test| {
        let adj = adjoint_obstacle_flux(mesh, coeffs, test)?;
        Ok(weights.iter().map(|w| obstacle_pairing(&fwd, &adj, w)).collect())
    })
    .into_iter()
    .collect::<Result<Vec<Vec<f64>>>>()?;
    if entries.iter().flatten().any(|v: &f64| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite sensitivity entry".into()));
    }
    Ok(SensitivityMatrix {
        entries,
        basis_labels: basis.iter().map(|b| b.label.clone()).collect(),
        testfn_labels: tests.iter().map(|t| t.label.clone()).collect(),
        obstacle: Some(shape.clone()),
    })
}

/// Nodal load (full layout, y-equation only) whose dot product with `y_h` is
/// `sum_s weight chi(p_s) y_h(p_s)` over the sample points.
pub fn sampled_load(mesh: &TriangleMesh, points: &[[f64; 2]], weight: f64, chi: &ScalarMap) -> Result<Vec<f64>> {
    let loc = mesh.locator();
    let mut load = vec![0.0; 2 * mesh.num_nodes()];
    for &p in points {
        let (t, bary) = loc.locate(p).ok_or(Error::PointOutsideMesh { x: p[0], y: p[1] })?;
        let c = weight * chi.eval(p);
        for (k, &v) in mesh.triangles[t].iter().enumerate() {
            load[2 * v] += c * bary[k];
        }
    }
    Ok(load)
}

/// Sensitivity matrix for interior observations `sum_s weight chi_j(p_s) y(p_s)`.
///
/// The adjoint of each row carries the sampled load of `chi_j` in its first equation
/// and vanishes on the whole boundary. Column `i` is again the first-order change
/// under radial growth by `f_i`.
pub fn internal_sensitivity_matrix(
    mesh: &TriangleMesh,
    coeffs: &CoefficientSet,
    forward: &FieldPair,
    basis: &[BasisFunction],
    points: &[[f64; 2]],
    weight: f64,
    tests: &[(ScalarMap, String)],
) -> Result<SensitivityMatrix> {
    if basis.is_empty() || tests.is_empty() {
        return Err(Error::InvalidArgument("sensitivity matrix needs p > 0".into()));
    }
    let shape = obstacle_of(mesh)?;
    let fwd = obstacle_flux(mesh, coeffs, forward)?;
    let weights: Vec<Vec<f64>> = basis
        .iter()
        .map(|b| {
            fwd.nodes
                .iter()
                .map(|&v| {
                    let t = shape.angle_of(mesh.vertices[v]);
                    -(b.f)(t) * shape.radial_normal_factor(t)
                })
                .collect()
        })
        .collect();
    let zero = vec![[0.0; 2]; mesh.num_nodes()];
    let entries = crate::par::map(tests, |(chi, _)| {
        let load = sampled_load(mesh, points, weight, chi)?;
        let adj = solve_with_load(mesh, coeffs.adjoint_coupling(), &zero, &load)?;
        let flux = boundary_flux(mesh, coeffs.adjoint_coupling(), &adj, None, BoundaryPart::Obstacle)?;
        Ok(weights.iter().map(|w| obstacle_pairing(&fwd, &flux, w)).collect())
    })
    .into_iter()
    .collect::<Result<Vec<Vec<f64>>>>()?;
    if entries.iter().flatten().any(|v: &f64| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite sensitivity entry".into()));
    }
    Ok(SensitivityMatrix {
        entries,
        basis_labels: basis.iter().map(|b| b.label.clone()).collect(),
        testfn_labels: tests.iter().map(|t| t.1.clone()).collect(),
        obstacle: Some(shape.clone()),
    })
}
