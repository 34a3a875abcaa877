//! P1 Galerkin assembly of the coupled system over the free (interior) nodes.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::fem::data::Sources;
use crate::fem::quadrature::{map_point, p1_mass, SEVEN_POINT};
use crate::geometry::mesh::{NodeKind, TriangleMesh};
use crate::geometry::mesher::p1_gradients;
use crate::geometry::transport::TransportData;
use crate::linalg::{CsrMatrix, TripletBuilder};

/// Quadrature points used for sources.
pub const SOURCE_QUADRATURE_POINTS: usize = SEVEN_POINT.len();

/// Reduced linear system; unknowns are interleaved `(y_i, z_i)` over free nodes.
#[derive(Debug, Clone)]
pub struct DiscreteSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub free_nodes: Vec<usize>,
    pub dof_of_node: Vec<Option<usize>>,
    pub quadrature_points: usize,
}

impl DiscreteSystem {
    pub fn num_unknowns(&self) -> usize {
        self.rhs.len()
    }
}

/// Free-node numbering: every interior node in increasing order.
pub fn free_node_map(mesh: &TriangleMesh) -> (Vec<usize>, Vec<Option<usize>>) {
    let mut free = Vec::new();
    let mut map = vec![None; mesh.num_nodes()];
    for (i, k) in mesh.node_kinds().iter().enumerate() {
        if *k == NodeKind::Interior {
            map[i] = Some(free.len());
            free.push(i);
        }
    }
    (free, map)
}

/// Full 6x6 element matrix, index `2 * local_node + field`.
fn element_matrix(
    mesh: &TriangleMesh,
    t: usize,
    coupling: &[[f64; 2]; 2],
    transport: Option<&TransportData>,
) -> [[f64; 6]; 6] {
    let p = mesh.triangle_points(t);
    let area = mesh.triangle_area(t);
    let g = p1_gradients(p);
    let (tensor, scale) = match transport {
        Some(td) => (td.diffusion_tensor(t), td.jacobian[t]),
        None => ([[1.0, 0.0], [0.0, 1.0]], 1.0),
    };
    let mass = p1_mass(area);
    let mut e = [[0.0; 6]; 6];
    for i in 0..3 {
        for j in 0..3 {
            let kg = [
                tensor[0][0] * g[j][0] + tensor[0][1] * g[j][1],
                tensor[1][0] * g[j][0] + tensor[1][1] * g[j][1],
            ];
            let s = area * (g[i][0] * kg[0] + g[i][1] * kg[1]);
            for f in 0..2 {
                for h in 0..2 {
                    let mut v = scale * coupling[f][h] * mass[i][j];
                    if f == h {
                        v += s;
                    }
                    e[2 * i + f][2 * j + h] = v;
                }
            }
        }
    }
    e
}

type ElementContribution = (Vec<(usize, usize, f64)>, Vec<(usize, f64)>);

fn element_contribution(
    mesh: &TriangleMesh,
    t: usize,
    coupling: &[[f64; 2]; 2],
    transport: Option<&TransportData>,
    dirichlet: &[[f64; 2]],
    dof_of_node: &[Option<usize>],
    sources: Option<&Sources>,
) -> ElementContribution {
    let tri = mesh.triangles[t];
    let e = element_matrix(mesh, t, coupling, transport);
    let mut trips = Vec::with_capacity(36);
    let mut rhs = Vec::with_capacity(6);
    let mut load = [0.0; 6];
    if let Some(src) = sources {
        let p = mesh.triangle_points(t);
        let area = mesh.triangle_area(t);
        let scale = transport.map_or(1.0, |td| td.jacobian[t]);
        for (l, w) in SEVEN_POINT {
            let x = map_point(&p, l);
            let (fv, gv) = (src.f.eval(x), src.g.eval(x));
            for i in 0..3 {
                load[2 * i] += scale * area * w * fv * l[i];
                load[2 * i + 1] += scale * area * w * gv * l[i];
            }
        }
    }
    for i in 0..3 {
        let Some(di) = dof_of_node[tri[i]] else { continue };
        for f in 0..2 {
            let row = 2 * di + f;
            let mut r = load[2 * i + f];
            for j in 0..3 {
                for h in 0..2 {
                    let v = e[2 * i + f][2 * j + h];
                    match dof_of_node[tri[j]] {
                        Some(dj) => trips.push((row, 2 * dj + h, v)),
                        None => r -= v * dirichlet[tri[j]][h],
                    }
                }
            }
            rhs.push((row, r));
        }
    }
    (trips, rhs)
}

/// Assembles the system with nodal Dirichlet values `dirichlet[node] = [y, z]`
/// (read at boundary nodes only).
pub fn assemble(
    mesh: &TriangleMesh,
    coupling: [[f64; 2]; 2],
    transport: Option<&TransportData>,
    dirichlet: &[[f64; 2]],
    sources: Option<&Sources>,
) -> DiscreteSystem {
    let (free_nodes, dof_of_node) = free_node_map(mesh);
    let n = 2 * free_nodes.len();
    let nt = mesh.num_triangles();
    let work = |t: usize| element_contribution(mesh, t, &coupling, transport, dirichlet, &dof_of_node, sources);
    #[cfg(feature = "parallel")]
    let parts: Vec<ElementContribution> = (0..nt).into_par_iter().map(work).collect();
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<ElementContribution> = (0..nt).map(work).collect();

    let mut builder = TripletBuilder::new(n, n);
    let mut rhs = vec![0.0; n];
    for (trips, r) in parts {
        for (i, j, v) in trips {
            builder.push(i, j, v);
        }
        for (i, v) in r {
            rhs[i] += v;
        }
    }
    DiscreteSystem {
        matrix: builder.build(),
        rhs,
        free_nodes,
        dof_of_node,
        quadrature_points: SOURCE_QUADRATURE_POINTS,
    }
}

/// Full (unreduced) bilinear form `a(u, v)` including boundary rows, scalar-per-field
/// layout `2 * node + field`. Used for variational flux recovery.
pub fn full_operator(mesh: &TriangleMesh, coupling: [[f64; 2]; 2]) -> CsrMatrix {
    let n = 2 * mesh.num_nodes();
    let mut b = TripletBuilder::new(n, n);
    for t in 0..mesh.num_triangles() {
        let tri = mesh.triangles[t];
        let e = element_matrix(mesh, t, &coupling, None);
        for i in 0..3 {
            for j in 0..3 {
                for f in 0..2 {
                    for h in 0..2 {
                        b.push(2 * tri[i] + f, 2 * tri[j] + h, e[2 * i + f][2 * j + h]);
                    }
                }
            }
        }
    }
    b.build()
}

/// Volume load vector `(∫F φ_i, ∫G φ_i)` over all nodes, layout `2 * node + field`.
pub fn full_load(mesh: &TriangleMesh, sources: &Sources) -> Vec<f64> {
    let mut load = vec![0.0; 2 * mesh.num_nodes()];
    for t in 0..mesh.num_triangles() {
        let tri = mesh.triangles[t];
        let p = mesh.triangle_points(t);
        let area = mesh.triangle_area(t);
        for (l, w) in SEVEN_POINT {
            let x = map_point(&p, l);
            let (fv, gv) = (sources.f.eval(x), sources.g.eval(x));
            for i in 0..3 {
                load[2 * tri[i]] += area * w * fv * l[i];
                load[2 * tri[i] + 1] += area * w * gv * l[i];
            }
        }
    }
    load
}

/// Scalar P1 stiffness and mass over all nodes.
pub fn scalar_matrices(mesh: &TriangleMesh) -> (CsrMatrix, CsrMatrix) {
    let n = mesh.num_nodes();
    let mut k = TripletBuilder::new(n, n);
    let mut m = TripletBuilder::new(n, n);
    for t in 0..mesh.num_triangles() {
        let tri = mesh.triangles[t];
        let p = mesh.triangle_points(t);
        let area = mesh.triangle_area(t);
        let g = p1_gradients(p);
        let mass = p1_mass(area);
        for i in 0..3 {
            for j in 0..3 {
                k.push(tri[i], tri[j], area * (g[i][0] * g[j][0] + g[i][1] * g[j][1]));
                m.push(tri[i], tri[j], mass[i][j]);
            }
        }
    }
    (k.build(), m.build())
}

/// Restriction of a node-indexed matrix to the given node list.
pub fn restrict(a: &CsrMatrix, map: &[Option<usize>], n: usize) -> CsrMatrix {
    let mut b = TripletBuilder::new(n, n);
    for i in 0..a.rows {
        let Some(ri) = map[i] else { continue };
        for (j, v) in a.row(i) {
            if let Some(cj) = map[j] {
                b.push(ri, cj, v);
            }
        }
    }
    b.build()
}
