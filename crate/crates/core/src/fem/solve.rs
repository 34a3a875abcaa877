use crate::error::{Error, Result};
use crate::fem::assembly::{assemble, scalar_matrices, DiscreteSystem};
use crate::fem::coefficients::CoefficientSet;
use crate::fem::data::{BoundaryData, FieldPair, ScalarMap, Sources};
use crate::geometry::deformation::DeformationField;
use crate::geometry::mesh::{NodeKind, TriangleMesh};
use crate::geometry::transport::{transport_data, TransportData};

/// Square of the first zero of `J_0`.
const J01_SQUARED: f64 = 5.783_185_962_946_784;

/// Nodal Dirichlet values: outer data on OUTER and GAMMA nodes, zero elsewhere.
pub fn outer_dirichlet(mesh: &TriangleMesh, data: &BoundaryData) -> Vec<[f64; 2]> {
    mesh.vertices
        .iter()
        .zip(mesh.node_kinds())
        .map(|(&p, k)| {
            if k.is_outer() {
                [data.phi.eval(p), data.psi.eval(p)]
            } else {
                [0.0, 0.0]
            }
        })
        .collect()
}

/// Nodal values that are `eta`, `theta` on GAMMA nodes and zero elsewhere.
pub fn gamma_dirichlet(mesh: &TriangleMesh, eta: &ScalarMap, theta: &ScalarMap) -> Vec<[f64; 2]> {
    mesh.vertices
        .iter()
        .zip(mesh.node_kinds())
        .map(|(&p, k)| {
            if *k == NodeKind::Gamma {
                [eta.eval(p), theta.eval(p)]
            } else {
                [0.0, 0.0]
            }
        })
        .collect()
}

fn scatter(system: &DiscreteSystem, x: &[f64], dirichlet: &[[f64; 2]], mesh: &TriangleMesh) -> FieldPair {
    let mut out = FieldPair::zeros(mesh.num_nodes());
    for (i, d) in dirichlet.iter().enumerate() {
        if mesh.node_kind(i).is_boundary() {
            out.y[i] = d[0];
            out.z[i] = d[1];
        }
    }
    for (k, &node) in system.free_nodes.iter().enumerate() {
        out.y[node] = x[2 * k];
        out.z[node] = x[2 * k + 1];
    }
    out
}

fn admissibility_warning(mesh: &TriangleMesh, coupling: [[f64; 2]; 2]) -> Option<String> {
    let c = CoefficientSet::new(coupling[0][0], coupling[0][1], coupling[1][0], coupling[1][1]);
    let ls = c.lambda_star();
    if ls == 0.0 {
        return None;
    }
    let r = mesh
        .outer_nodes
        .iter()
        .map(|&(i, _)| {
            let p = mesh.vertices[i];
            (p[0] - mesh.outer_center[0]).hypot(p[1] - mesh.outer_center[1])
        })
        .fold(0.0f64, f64::max);
    (r > 0.0 && ls >= J01_SQUARED / (r * r)).then(|| {
        format!("coefficients may be inadmissible: lambda* = {ls} is not below the guaranteed bound {}", J01_SQUARED / (r * r))
    })
}

/// Solves the system with arbitrary coupling, nodal Dirichlet values and sources.
pub fn solve_dirichlet(
    mesh: &TriangleMesh,
    coupling: [[f64; 2]; 2],
    transport: Option<&TransportData>,
    dirichlet: &[[f64; 2]],
    sources: Option<&Sources>,
) -> Result<FieldPair> {
    if dirichlet.len() != mesh.num_nodes() {
        return Err(Error::InvalidArgument("one Dirichlet pair per node required".into()));
    }
    let system = assemble(mesh, coupling, transport, dirichlet, sources);
    let x = system.matrix.factorize()?.solve(&system.rhs)?;
    let mut out = scatter(&system, &x, dirichlet, mesh);
    out.warnings.extend(admissibility_warning(mesh, coupling));
    Ok(out)
}

/// Like [`solve_dirichlet`] with an extra nodal load in the full layout `2 * node + field`.
pub fn solve_with_load(
    mesh: &TriangleMesh,
    coupling: [[f64; 2]; 2],
    dirichlet: &[[f64; 2]],
    load: &[f64],
) -> Result<FieldPair> {
    if dirichlet.len() != mesh.num_nodes() || load.len() != 2 * mesh.num_nodes() {
        return Err(Error::InvalidArgument("one Dirichlet pair and two load entries per node required".into()));
    }
    let mut system = assemble(mesh, coupling, None, dirichlet, None);
    for (k, &node) in system.free_nodes.iter().enumerate() {
        system.rhs[2 * k] += load[2 * node];
        system.rhs[2 * k + 1] += load[2 * node + 1];
    }
    let x = system.matrix.factorize()?.solve(&system.rhs)?;
    let mut out = scatter(&system, &x, dirichlet, mesh);
    out.warnings.extend(admissibility_warning(mesh, coupling));
    Ok(out)
}

pub fn forward_system(mesh: &TriangleMesh, coeffs: &CoefficientSet, data: &BoundaryData) -> DiscreteSystem {
    assemble(mesh, coeffs.coupling(), None, &outer_dirichlet(mesh, data), None)
}

pub fn solve_forward(
    mesh: &TriangleMesh,
    coeffs: &CoefficientSet,
    data: &BoundaryData,
    sources: Option<&Sources>,
) -> Result<FieldPair> {
    solve_dirichlet(mesh, coeffs.coupling(), None, &outer_dirichlet(mesh, data), sources)
}

/// Adjoint system: transposed coupling, `(eta, theta)` on GAMMA, zero on the rest of the boundary.
pub fn solve_adjoint(
    mesh: &TriangleMesh,
    coeffs: &CoefficientSet,
    eta_bar: &ScalarMap,
    theta_bar: &ScalarMap,
) -> Result<FieldPair> {
    solve_dirichlet(
        mesh,
        coeffs.adjoint_coupling(),
        None,
        &gamma_dirichlet(mesh, eta_bar, theta_bar),
        None,
    )
}

/// Transported solve on the reference mesh.
#[derive(Debug, Clone)]
pub struct PullbackSolution {
    /// Homogeneous part `(u0, v0)`, zero on the whole boundary.
    pub homogeneous: FieldPair,
    /// Discrete lifting: outer data at boundary nodes, zero at every other node.
    pub lifting: FieldPair,
    /// `(y0, z0) = (u0 + phi0, v0 + psi0)`.
    pub lifted: FieldPair,
    /// Right-hand side `(F0, G0)` over free nodes, interleaved.
    pub load: Vec<f64>,
}

pub fn pullback_system(
    reference_mesh: &TriangleMesh,
    mu: &DeformationField,
    sigma: f64,
    coeffs: &CoefficientSet,
    data: &BoundaryData,
) -> Result<DiscreteSystem> {
    let td = transport_data(mu, sigma, reference_mesh)?;
    Ok(assemble(
        reference_mesh,
        coeffs.coupling(),
        Some(&td),
        &outer_dirichlet(reference_mesh, data),
        None,
    ))
}

pub fn solve_pullback(
    reference_mesh: &TriangleMesh,
    mu: &DeformationField,
    sigma: f64,
    coeffs: &CoefficientSet,
    data: &BoundaryData,
) -> Result<PullbackSolution> {
    let dirichlet = outer_dirichlet(reference_mesh, data);
    let system = pullback_system(reference_mesh, mu, sigma, coeffs, data)?;
    let x = system.matrix.factorize()?.solve(&system.rhs)?;
    let n = reference_mesh.num_nodes();
    let mut homogeneous = FieldPair::zeros(n);
    for (k, &node) in system.free_nodes.iter().enumerate() {
        homogeneous.y[node] = x[2 * k];
        homogeneous.z[node] = x[2 * k + 1];
    }
    let mut lifting = FieldPair::zeros(n);
    for (i, d) in dirichlet.iter().enumerate() {
        if reference_mesh.node_kind(i).is_boundary() {
            lifting.y[i] = d[0];
            lifting.z[i] = d[1];
        }
    }
    let mut lifted = homogeneous.axpy(1.0, &lifting);
    lifted.warnings.extend(admissibility_warning(reference_mesh, coeffs.coupling()));
    Ok(PullbackSolution {
        homogeneous,
        lifting,
        lifted,
        load: system.rhs,
    })
}

/// `||v||_{L2}` of a nodal P1 field.
pub fn l2_norm(mesh: &TriangleMesh, v: &[f64]) -> f64 {
    let (_, m) = scalar_matrices(mesh);
    crate::linalg::dot(v, &m.matvec(v)).max(0.0).sqrt()
}

/// `||grad v||_{L2}` of a nodal P1 field.
pub fn h1_seminorm(mesh: &TriangleMesh, v: &[f64]) -> f64 {
    let (k, _) = scalar_matrices(mesh);
    crate::linalg::dot(v, &k.matvec(v)).max(0.0).sqrt()
}

/// `||a - b|| / ||b||` in L2 over `mesh`.
pub fn relative_l2_difference(mesh: &TriangleMesh, a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let nb = l2_norm(mesh, b);
    if nb == 0.0 {
        l2_norm(mesh, &d)
    } else {
        l2_norm(mesh, &d) / nb
    }
}

/// `||u_h - f||_{L2}` with seven-point quadrature on every triangle.
pub fn l2_error_against(mesh: &TriangleMesh, values: &[f64], f: impl Fn([f64; 2]) -> f64) -> f64 {
    use crate::fem::quadrature::{map_point, SEVEN_POINT};
    let mut acc = 0.0;
    for t in 0..mesh.num_triangles() {
        let tri = mesh.triangles[t];
        let p = mesh.triangle_points(t);
        let area = mesh.triangle_area(t);
        for (l, w) in SEVEN_POINT {
            let uh = l[0] * values[tri[0]] + l[1] * values[tri[1]] + l[2] * values[tri[2]];
            let d = uh - f(map_point(&p, l));
            acc += area * w * d * d;
        }
    }
    acc.sqrt()
}
