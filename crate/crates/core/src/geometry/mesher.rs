//! Boundary-conforming triangulation of `Omega \ D` and mesh motion.
//!
//! Boundary points are placed exactly on the analytic curves at spacing close to the
//! target size, a layer of points one equilateral height inside every boundary
//! segment follows, interior points come from a hexagonal lattice kept away from both, and a constrained Delaunay triangulation (via `spade`) recovers every
//! boundary segment. A few sweeps of guarded Laplacian smoothing finish the mesh.

use std::f64::consts::PI;

use spade::{ConstrainedDelaunayTriangulation, Point2, Triangulation};

use crate::error::{Error, Result};
use crate::geometry::domain::{Geometry, OuterBoundary};
use crate::geometry::hausdorff::hausdorff_distance;
use crate::geometry::mesh::{BoundaryEdge, BoundaryTag, NodeKind, TriangleMesh};
use crate::geometry::shape::ObstacleShape;
use crate::linalg::TripletBuilder;

/// Minimum distance from a lattice point to the innermost band row, relative to the target size.
const BOUNDARY_STANDOFF: f64 = 0.2;
/// Maximum number of structured rows along each curved boundary.
const MAX_BAND_LAYERS: usize = 4;
/// Minimum distance from a lattice point to a boundary-layer point, relative to the target size.
const LAYER_STANDOFF: f64 = 0.5;
const SMOOTHING_SWEEPS: usize = 4;
/// Shape change (Hausdorff, relative to h) above which meshes are rebuilt instead of moved.
pub const REMESH_THRESHOLD: f64 = 0.2;

fn outer_boundary_points(outer: &OuterBoundary, geometry: &Geometry, h: f64) -> (Vec<[f64; 2]>, Vec<BoundaryTag>) {
    let gamma = geometry.gamma;
    match outer {
        OuterBoundary::Disk { center, radius } => {
            let point = |t: f64| [center[0] + radius * t.cos(), center[1] + radius * t.sin()];
            if gamma.is_full() {
                let n = ((2.0 * PI * radius / h).ceil() as usize).max(12);
                let pts = (0..n)
                    .map(|k| point(gamma.start + 2.0 * PI * k as f64 / n as f64))
                    .collect();
                (pts, vec![BoundaryTag::Gamma; n])
            } else {
                let len = gamma.length_angle();
                let ng = ((radius * len / h).ceil() as usize).max(1);
                let no = ((radius * (2.0 * PI - len) / h).ceil() as usize).max(1);
                let mut pts = Vec::with_capacity(ng + no);
                let mut tags = Vec::with_capacity(ng + no);
                for k in 0..ng {
                    pts.push(point(gamma.start + len * k as f64 / ng as f64));
                    tags.push(BoundaryTag::Gamma);
                }
                for k in 0..no {
                    pts.push(point(gamma.start + len + (2.0 * PI - len) * k as f64 / no as f64));
                    tags.push(BoundaryTag::Outer);
                }
                (pts, tags)
            }
        }
        OuterBoundary::Polygon { vertices } => {
            let c = outer.center();
            let nv = vertices.len();
            let mut pts = Vec::new();
            for i in 0..nv {
                let a = vertices[i];
                let b = vertices[(i + 1) % nv];
                let len = (b[0] - a[0]).hypot(b[1] - a[1]);
                let m = ((len / h).ceil() as usize).max(1);
                for k in 0..m {
                    let s = k as f64 / m as f64;
                    pts.push([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]);
                }
            }
            let n = pts.len();
            let tags = (0..n)
                .map(|i| {
                    let a = pts[i];
                    let b = pts[(i + 1) % n];
                    let mid = [(a[0] + b[0]) / 2.0 - c[0], (a[1] + b[1]) / 2.0 - c[1]];
                    if gamma.contains_angle(mid[1].atan2(mid[0])) {
                        BoundaryTag::Gamma
                    } else {
                        BoundaryTag::Outer
                    }
                })
                .collect();
            (pts, tags)
        }
    }
}

fn segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0);
    (p[0] - a[0] - t * d[0]).hypot(p[1] - a[1] - t * d[1])
}

fn polyline_distance(p: [f64; 2], loop_pts: &[[f64; 2]]) -> f64 {
    let n = loop_pts.len();
    (0..n)
        .map(|i| segment_distance(p, loop_pts[i], loop_pts[(i + 1) % n]))
        .fold(f64::INFINITY, f64::min)
}

/// Apexes of equilateral triangles erected on each segment of a closed polyline,
/// on the left (`left = true`) or right side.
fn layer_points(loop_pts: &[[f64; 2]], left: bool) -> Vec<[f64; 2]> {
    let n = loop_pts.len();
    (0..n)
        .map(|i| {
            let a = loop_pts[i];
            let b = loop_pts[(i + 1) % n];
            let t = [b[0] - a[0], b[1] - a[1]];
            let s = if left { 0.5 * 3f64.sqrt() } else { -0.5 * 3f64.sqrt() };
            [0.5 * (a[0] + b[0]) - s * t[1], 0.5 * (a[1] + b[1]) + s * t[0]]
        })
        .collect()
}

fn point_in_polygon(p: [f64; 2], poly: &[[f64; 2]]) -> bool {
    let n = poly.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a[1] > p[1]) != (b[1] > p[1]) && p[0] < (b[0] - a[0]) * (p[1] - a[1]) / (b[1] - a[1]) + a[0] {
            inside = !inside;
        }
        j = i;
    }
    inside
}

/// Meshes `Omega` minus the (optional) obstacle with target edge length `target_h`.
pub fn build_mesh(geometry: &Geometry, obstacle: Option<&ObstacleShape>, target_h: f64) -> Result<TriangleMesh> {
    if !(target_h > 0.0) || !target_h.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "target mesh size must be positive, got {target_h}"
        )));
    }
    geometry.outer.validate()?;
    if let Some(shape) = obstacle {
        geometry.validate()?;
        shape.validate(&geometry.safety)?;
    } else if geometry.gamma.length_angle() <= 0.0 {
        return Err(Error::EmptyGamma);
    }
    let h = target_h;
    let outer_center = geometry.outer.center();

    let (outer_pts, outer_tags) = outer_boundary_points(&geometry.outer, geometry, h);
    let (obs_pts, obs_angles) = match obstacle {
        Some(shape) => {
            let n = ((shape.perimeter() / h).ceil() as usize).max(8);
            let angles = shape.equidistributed_angles(n);
            (angles.iter().map(|&t| shape.point(t)).collect::<Vec<_>>(), angles)
        }
        None => (Vec::new(), Vec::new()),
    };

    let inside_domain = |p: [f64; 2]| {
        point_in_polygon(p, &outer_pts)
            && obstacle.is_none_or(|shape| !shape.contains(p) && !point_in_polygon(p, &obs_pts))
    };
    let boundary_distance = |p: [f64; 2]| {
        let d = polyline_distance(p, &outer_pts);
        if obs_pts.is_empty() {
            d
        } else {
            d.min(polyline_distance(p, &obs_pts))
        }
    };

    // structured boundary bands: rows of points at equilateral heights, alternating
    // between edge midpoints and boundary nodes
    let height = 0.5 * 3f64.sqrt();
    let mut candidates: Vec<[f64; 2]> = Vec::new();
    let mut band_depth: f64 = 0.0;
    match &geometry.outer {
        OuterBoundary::Disk { center, radius } => {
            let layers = ((0.3 * radius / (height * h)).floor() as usize).clamp(1, MAX_BAND_LAYERS);
            let n = outer_pts.len();
            let ang: Vec<f64> = outer_pts
                .iter()
                .map(|p| (p[1] - center[1]).atan2(p[0] - center[0]))
                .collect();
            for k in 1..=layers {
                for i in 0..n {
                    let j = (i + 1) % n;
                    let mut next = ang[j];
                    while next <= ang[i] {
                        next += 2.0 * PI;
                    }
                    let len = |a: usize, b: usize| {
                        (outer_pts[a][0] - outer_pts[b][0]).hypot(outer_pts[a][1] - outer_pts[b][1])
                    };
                    let (t, l) = if k % 2 == 1 {
                        (0.5 * (ang[i] + next), len(i, j))
                    } else {
                        (ang[i], 0.5 * (len(i, j) + len((i + n - 1) % n, i)))
                    };
                    let r = radius - k as f64 * height * l;
                    candidates.push([center[0] + r * t.cos(), center[1] + r * t.sin()]);
                    band_depth = band_depth.max(k as f64 * height * l);
                }
            }
        }
        OuterBoundary::Polygon { .. } => {
            candidates.extend(layer_points(&outer_pts, true));
            band_depth = height * h;
        }
    }
    let mut obs_depth: f64 = 0.0;
    if let Some(shape) = obstacle {
        let layers = ((0.2 * shape.min_radius() / (height * h)).floor() as usize).clamp(1, MAX_BAND_LAYERS);
        let n = obs_pts.len();
        for k in 1..=layers {
            for i in 0..n {
                let j = (i + 1) % n;
                let mut next = obs_angles[j];
                while next <= obs_angles[i] {
                    next += 2.0 * PI;
                }
                let len = |a: usize, b: usize| (obs_pts[a][0] - obs_pts[b][0]).hypot(obs_pts[a][1] - obs_pts[b][1]);
                let (t, l) = if k % 2 == 1 {
                    (0.5 * (obs_angles[i] + next), len(i, j))
                } else {
                    (obs_angles[i], 0.5 * (len(i, j) + len((i + n - 1) % n, i)))
                };
                let base = shape.point(t);
                let nrm = shape.outward_normal(t);
                let d = k as f64 * height * l;
                candidates.push([base[0] + d * nrm[0], base[1] + d * nrm[1]]);
                obs_depth = obs_depth.max(d);
            }
        }
    }
    let mut layer: Vec<[f64; 2]> = Vec::new();
    for p in candidates {
        if !inside_domain(p) || boundary_distance(p) < 0.6 * h {
            continue;
        }
        if layer.iter().any(|q| (p[0] - q[0]).hypot(p[1] - q[1]) < 0.5 * h) {
            continue;
        }
        layer.push(p);
    }

    // hexagonal lattice
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in &outer_pts {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let dy = h * 3f64.sqrt() / 2.0;
    let rows = ((hi[1] - lo[1]) / dy).ceil() as usize + 1;
    let cols = ((hi[0] - lo[0]) / h).ceil() as usize + 2;
    let standoff = BOUNDARY_STANDOFF * h;
    let layer_standoff = LAYER_STANDOFF * h;
    let n_layer = layer.len();
    let mut interior = layer.clone();
    // center the lattice on the domain so symmetric domains get symmetric lattices
    let y0 = outer_center[1] - ((outer_center[1] - lo[1]) / dy).ceil() * dy;
    let x0 = outer_center[0] - ((outer_center[0] - lo[0]) / h).ceil() * h;
    for j in 0..=rows {
        let y = y0 + j as f64 * dy;
        let shift = if j % 2 == 1 { 0.5 * h } else { 0.0 };
        for i in 0..=cols {
            let p = [x0 + shift + i as f64 * h, y];
            if p[0] > hi[0] + h || p[1] > hi[1] + h {
                continue;
            }
            if !inside_domain(p) {
                continue;
            }
            let outer_d = match &geometry.outer {
                OuterBoundary::Disk { .. } => geometry.outer.inside_distance(p),
                OuterBoundary::Polygon { .. } => polyline_distance(p, &outer_pts),
            };
            if outer_d < band_depth + standoff {
                continue;
            }
            if !obs_pts.is_empty() && polyline_distance(p, &obs_pts) < obs_depth + standoff {
                continue;
            }
            if layer.iter().any(|q| (p[0] - q[0]).hypot(p[1] - q[1]) < layer_standoff) {
                continue;
            }
            interior.push(p);
        }
    }

    let mut cdt: ConstrainedDelaunayTriangulation<Point2<f64>> = ConstrainedDelaunayTriangulation::new();
    let mut vertices: Vec<[f64; 2]> = Vec::new();
    let mut handle_to_node: Vec<usize> = Vec::new();
    let mut insert = |cdt: &mut ConstrainedDelaunayTriangulation<Point2<f64>>, p: [f64; 2], vertices: &mut Vec<[f64; 2]>| -> Result<spade::handles::FixedVertexHandle> {
        let handle = cdt
            .insert(Point2::new(p[0], p[1]))
            .map_err(|e| Error::Meshing(format!("point insertion failed: {e:?}")))?;
        let idx = handle.index();
        if idx < handle_to_node.len() {
            return Err(Error::Meshing(format!(
                "duplicate point ({:.6}, {:.6})",
                p[0], p[1]
            )));
        }
        handle_to_node.push(vertices.len());
        vertices.push(p);
        Ok(handle)
    };

    let mut outer_handles = Vec::with_capacity(outer_pts.len());
    for &p in &outer_pts {
        outer_handles.push(insert(&mut cdt, p, &mut vertices)?);
    }
    let mut obs_handles = Vec::with_capacity(obs_pts.len());
    for &p in &obs_pts {
        obs_handles.push(insert(&mut cdt, p, &mut vertices)?);
    }
    let n_outer = outer_pts.len();
    let n_obs = obs_pts.len();
    for i in 0..n_outer {
        cdt.add_constraint(outer_handles[i], outer_handles[(i + 1) % n_outer]);
    }
    for i in 0..n_obs {
        cdt.add_constraint(obs_handles[i], obs_handles[(i + 1) % n_obs]);
    }
    for &p in &interior {
        insert(&mut cdt, p, &mut vertices)?;
    }
    if cdt.num_vertices() != vertices.len() {
        return Err(Error::Meshing("constraint recovery inserted extra vertices".into()));
    }

    let mut triangles = Vec::new();
    for face in cdt.inner_faces() {
        let vh = face.vertices();
        let idx = [vh[0].fix().index(), vh[1].fix().index(), vh[2].fix().index()];
        let tri = [handle_to_node[idx[0]], handle_to_node[idx[1]], handle_to_node[idx[2]]];
        let (a, b, c) = (vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
        let centroid = [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0];
        if n_obs > 0 && point_in_polygon(centroid, &obs_pts) {
            continue;
        }
        if !point_in_polygon(centroid, &outer_pts) {
            continue;
        }
        let area2 = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
        if area2 > 0.0 {
            triangles.push(tri);
        } else {
            triangles.push([tri[0], tri[2], tri[1]]);
        }
    }
    // deterministic ordering independent of the triangulation's internal face order
    triangles.sort_unstable_by_key(|t| {
        let mut s = *t;
        s.sort_unstable();
        s
    });

    let mut boundary_edges = Vec::with_capacity(n_outer + n_obs);
    for i in 0..n_outer {
        boundary_edges.push(BoundaryEdge {
            nodes: [i, (i + 1) % n_outer],
            tag: outer_tags[i],
        });
    }
    for i in 0..n_obs {
        boundary_edges.push(BoundaryEdge {
            nodes: [n_outer + (i + 1) % n_obs, n_outer + i],
            tag: BoundaryTag::Obstacle,
        });
    }
    let mut outer_nodes: Vec<(usize, f64)> = (0..n_outer)
        .map(|i| {
            let p = vertices[i];
            (i, (p[1] - outer_center[1]).atan2(p[0] - outer_center[0]).rem_euclid(2.0 * PI))
        })
        .collect();
    outer_nodes.sort_by(|a, b| a.1.total_cmp(&b.1));
    let obstacle_nodes: Vec<(usize, f64)> = obs_angles
        .iter()
        .enumerate()
        .map(|(i, &t)| (n_outer + i, t))
        .collect();

    let mut mesh = TriangleMesh::from_parts(
        vertices,
        triangles,
        boundary_edges,
        obstacle_nodes,
        outer_nodes,
        obstacle.cloned(),
        outer_center,
    );
    smooth(&mut mesh, n_outer + n_obs + n_layer);
    mesh.validate()?;
    Ok(mesh)
}

fn triangle_quality(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    // 4 sqrt(3) area / sum of squared edges: 1 for equilateral
    let area = 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]));
    let l2 = (b[0] - a[0]).powi(2)
        + (b[1] - a[1]).powi(2)
        + (c[0] - b[0]).powi(2)
        + (c[1] - b[1]).powi(2)
        + (a[0] - c[0]).powi(2)
        + (a[1] - c[1]).powi(2);
    4.0 * 3f64.sqrt() * area / l2
}

/// Smooths lattice nodes only; nodes below `first_movable` stay put.
fn smooth(mesh: &mut TriangleMesh, first_movable: usize) {
    let adj = mesh.node_triangles();
    let n = mesh.num_nodes();
    let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); n];
    for tri in &mesh.triangles {
        for k in 0..3 {
            let a = tri[k];
            let b = tri[(k + 1) % 3];
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
    }
    for nb in &mut neighbors {
        nb.sort_unstable();
        nb.dedup();
    }
    let worst = |mesh: &TriangleMesh, v: usize| {
        adj[v]
            .iter()
            .map(|&t| {
                let p = mesh.triangle_points(t);
                triangle_quality(p[0], p[1], p[2])
            })
            .fold(f64::INFINITY, f64::min)
    };
    // Jacobi sweeps keep the result independent of node numbering
    let movable: Vec<usize> = (0..n)
        .filter(|&v| v >= first_movable && mesh.node_kind(v) == NodeKind::Interior && !neighbors[v].is_empty())
        .collect();
    for _ in 0..SMOOTHING_SWEEPS {
        let old = mesh.vertices.clone();
        let before: Vec<f64> = movable.iter().map(|&v| worst(mesh, v)).collect();
        for &v in &movable {
            let k = neighbors[v].len() as f64;
            mesh.vertices[v] = [
                neighbors[v].iter().map(|&u| old[u][0]).sum::<f64>() / k,
                neighbors[v].iter().map(|&u| old[u][1]).sum::<f64>() / k,
            ];
        }
        for _ in 0..20 {
            let mut reverted = false;
            for (i, &v) in movable.iter().enumerate() {
                if mesh.vertices[v] == old[v] {
                    continue;
                }
                let after = worst(mesh, v);
                if !(after > 0.0) || after < before[i] - 1e-9 {
                    mesh.vertices[v] = old[v];
                    reverted = true;
                }
            }
            if !reverted {
                break;
            }
        }
        if movable.iter().any(|&v| !(worst(mesh, v) > 0.0)) {
            mesh.vertices = old;
            break;
        }
    }
    mesh.mesh_size = mesh.max_edge_length();
}

/// Moves obstacle nodes onto `new_shape` (same angle parameters) and relocates
/// interior nodes by a discrete Laplace extension of the boundary displacement.
pub fn move_obstacle(mesh: &TriangleMesh, new_shape: &ObstacleShape) -> Result<TriangleMesh> {
    if mesh.obstacle_nodes.is_empty() {
        return Err(Error::InvalidArgument("mesh has no obstacle to move".into()));
    }
    let n = mesh.num_nodes();
    let mut disp = vec![[0.0f64; 2]; n];
    for &(v, t) in &mesh.obstacle_nodes {
        let p = new_shape.point(t);
        disp[v] = [p[0] - mesh.vertices[v][0], p[1] - mesh.vertices[v][1]];
    }
    let mut free = vec![usize::MAX; n];
    let mut nfree = 0;
    for v in 0..n {
        if !mesh.node_kind(v).is_boundary() {
            free[v] = nfree;
            nfree += 1;
        }
    }
    let mut a = TripletBuilder::new(nfree, nfree);
    let mut rhs = vec![[0.0f64; 2]; nfree];
    for t in 0..mesh.num_triangles() {
        let tri = mesh.triangles[t];
        let k = p1_stiffness(mesh.triangle_points(t));
        for i in 0..3 {
            let fi = free[tri[i]];
            if fi == usize::MAX {
                continue;
            }
            for j in 0..3 {
                let fj = free[tri[j]];
                if fj == usize::MAX {
                    rhs[fi][0] -= k[i][j] * disp[tri[j]][0];
                    rhs[fi][1] -= k[i][j] * disp[tri[j]][1];
                } else {
                    a.push(fi, fj, k[i][j]);
                }
            }
        }
    }
    let fac = a.build().factorize()?;
    for comp in 0..2 {
        let b: Vec<f64> = rhs.iter().map(|r| r[comp]).collect();
        let x = fac.solve(&b)?;
        for v in 0..n {
            if free[v] != usize::MAX {
                disp[v][comp] = x[free[v]];
            }
        }
    }
    let vertices: Vec<[f64; 2]> = mesh
        .vertices
        .iter()
        .zip(&disp)
        .map(|(p, d)| [p[0] + d[0], p[1] + d[1]])
        .collect();
    let mut out = mesh.with_vertices(vertices)?;
    out.set_obstacle(Some(new_shape.clone()));
    Ok(out)
}

/// Moves the mesh when the obstacle changed by at most `0.2 h` (Hausdorff), otherwise
/// (or if motion tangles the mesh) rebuilds it.
pub fn adapt_mesh(
    mesh: &TriangleMesh,
    geometry: &Geometry,
    new_shape: &ObstacleShape,
    target_h: f64,
) -> Result<TriangleMesh> {
    new_shape.validate(&geometry.safety)?;
    if let Some(old) = &mesh.obstacle {
        if hausdorff_distance(old, new_shape) <= REMESH_THRESHOLD * target_h {
            if let Ok(moved) = move_obstacle(mesh, new_shape) {
                return Ok(moved);
            }
        }
    }
    build_mesh(geometry, Some(new_shape), target_h)
}

/// P1 stiffness matrix of a triangle.
pub fn p1_stiffness(p: [[f64; 2]; 3]) -> [[f64; 3]; 3] {
    let g = p1_gradients(p);
    let area = 0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[1][1] - p[0][1]) * (p[2][0] - p[0][0]));
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = area * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
        }
    }
    k
}

/// Gradients of the three P1 hat functions on a triangle.
pub fn p1_gradients(p: [[f64; 2]; 3]) -> [[f64; 2]; 3] {
    let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[1][1] - p[0][1]) * (p[2][0] - p[0][0]);
    [
        [(p[1][1] - p[2][1]) / det, (p[2][0] - p[1][0]) / det],
        [(p[2][1] - p[0][1]) / det, (p[0][0] - p[2][0]) / det],
        [(p[0][1] - p[1][1]) / det, (p[1][0] - p[0][0]) / det],
    ]
}
