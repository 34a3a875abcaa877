use crate::error::{Error, Result};
use crate::fem::assembly::{free_node_map, restrict, scalar_matrices};
use crate::geometry::mesh::TriangleMesh;
use crate::linalg::{dot, norm};

pub const EIGEN_MAX_ITERATIONS: usize = 500;
pub const EIGEN_TOLERANCE: f64 = 1e-12;

/// Smallest Dirichlet eigenvalue of `-Δ` by inverse power iteration on `(K, M)`.
pub fn first_dirichlet_eigenvalue(mesh: &TriangleMesh, max_iterations: usize) -> Result<f64> {
    let (free, map) = free_node_map(mesh);
    let n = free.len();
    if n == 0 {
        return Err(Error::InvalidArgument("mesh has no interior nodes".into()));
    }
    let (k, m) = scalar_matrices(mesh);
    let k = restrict(&k, &map, n);
    let m = restrict(&m, &map, n);
    let lu = k.factorize()?;
    let mut x = vec![1.0; n];
    let mut lambda = f64::INFINITY;
    let mut change = f64::INFINITY;
    for _ in 0..max_iterations {
        let mx = m.matvec(&x);
        let mut next = lu.solve(&mx)?;
        let s = norm(&next);
        next.iter_mut().for_each(|v| *v /= s);
        let rq = dot(&next, &k.matvec(&next)) / dot(&next, &m.matvec(&next));
        change = ((rq - lambda) / rq).abs();
        lambda = rq;
        x = next;
        if change < EIGEN_TOLERANCE {
            return Ok(lambda);
        }
    }
    Err(Error::EigenNotConverged {
        iterations: max_iterations,
        last_change: change,
    })
}

/// `mu1 = 1 / lambda1` on a mesh of the full domain (no obstacle).
pub fn poincare_constant(mesh: &TriangleMesh) -> Result<f64> {
    if !mesh.obstacle_nodes.is_empty() {
        return Err(Error::InvalidArgument(
            "the Poincare constant needs a mesh of the full domain without obstacle".into(),
        ));
    }
    Ok(1.0 / first_dirichlet_eigenvalue(mesh, EIGEN_MAX_ITERATIONS)?)
}
