//! Triangle meshes of `Omega \ D` with tagged boundary edges.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::deformation::DeformationField;
use crate::geometry::shape::ObstacleShape;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundaryTag {
    Outer,
    Gamma,
    Obstacle,
}

impl fmt::Display for BoundaryTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundaryTag::Outer => "OUTER",
            BoundaryTag::Gamma => "GAMMA",
            BoundaryTag::Obstacle => "OBSTACLE",
        })
    }
}

impl FromStr for BoundaryTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "OUTER" => Ok(BoundaryTag::Outer),
            "GAMMA" => Ok(BoundaryTag::Gamma),
            "OBSTACLE" => Ok(BoundaryTag::Obstacle),
            other => Err(Error::InvalidArgument(format!("unknown boundary tag {other}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Interior,
    Outer,
    Gamma,
    Obstacle,
}

impl NodeKind {
    pub fn is_boundary(self) -> bool {
        self != NodeKind::Interior
    }

    pub fn is_outer(self) -> bool {
        matches!(self, NodeKind::Outer | NodeKind::Gamma)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEdge {
    pub nodes: [usize; 2],
    pub tag: BoundaryTag,
}

/// A boundary-conforming P1 mesh.
///
/// Outer boundary nodes carry their polar angle about the outer-domain center and
/// obstacle nodes their angle parameter on the obstacle's radial function; both are
/// kept so that moved meshes can be compared node-by-node.
#[derive(Debug, Clone)]
pub struct TriangleMesh {
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<BoundaryEdge>,
    pub mesh_size: f64,
    /// `(node, angle)` for every obstacle node, ordered by increasing angle.
    pub obstacle_nodes: Vec<(usize, f64)>,
    /// `(node, angle)` for every outer-boundary node, ordered by increasing angle.
    pub outer_nodes: Vec<(usize, f64)>,
    /// Obstacle whose boundary the obstacle nodes lie on.
    pub obstacle: Option<ObstacleShape>,
    pub outer_center: [f64; 2],
    node_kinds: Vec<NodeKind>,
}

fn signed_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
}

impl TriangleMesh {
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        vertices: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        boundary_edges: Vec<BoundaryEdge>,
        obstacle_nodes: Vec<(usize, f64)>,
        outer_nodes: Vec<(usize, f64)>,
        obstacle: Option<ObstacleShape>,
        outer_center: [f64; 2],
    ) -> Self {
        let node_kinds = classify_nodes(vertices.len(), &boundary_edges);
        let mut mesh = Self {
            vertices,
            triangles,
            boundary_edges,
            mesh_size: 0.0,
            obstacle_nodes,
            outer_nodes,
            obstacle,
            outer_center,
            node_kinds,
        };
        mesh.mesh_size = mesh.max_edge_length();
        mesh
    }

    pub fn num_nodes(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn node_kind(&self, i: usize) -> NodeKind {
        self.node_kinds[i]
    }

    pub fn node_kinds(&self) -> &[NodeKind] {
        &self.node_kinds
    }

    pub fn triangle_points(&self, t: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        signed_area(a, b, c)
    }

    pub fn barycenter(&self, t: usize) -> [f64; 2] {
        let [a, b, c] = self.triangle_points(t);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    pub fn total_area(&self) -> f64 {
        (0..self.num_triangles()).map(|t| self.triangle_area(t)).sum()
    }

    pub fn max_edge_length(&self) -> f64 {
        let mut h: f64 = 0.0;
        for tri in &self.triangles {
            for k in 0..3 {
                let a = self.vertices[tri[k]];
                let b = self.vertices[tri[(k + 1) % 3]];
                h = h.max((b[0] - a[0]).hypot(b[1] - a[1]));
            }
        }
        h
    }

    /// Smallest interior angle over all triangles, in degrees.
    pub fn min_angle_degrees(&self) -> f64 {
        let mut m = 180.0f64;
        for t in 0..self.num_triangles() {
            let p = self.triangle_points(t);
            for k in 0..3 {
                let a = p[k];
                let b = p[(k + 1) % 3];
                let c = p[(k + 2) % 3];
                let u = [b[0] - a[0], b[1] - a[1]];
                let v = [c[0] - a[0], c[1] - a[1]];
                let cos = (u[0] * v[0] + u[1] * v[1]) / (u[0].hypot(u[1]) * v[0].hypot(v[1]));
                m = m.min(cos.clamp(-1.0, 1.0).acos().to_degrees());
            }
        }
        m
    }

    pub fn boundary_nodes_with(&self, tag: BoundaryTag) -> Vec<usize> {
        let mut nodes: Vec<usize> = self
            .boundary_edges
            .iter()
            .filter(|e| e.tag == tag)
            .flat_map(|e| e.nodes)
            .collect();
        nodes.sort_unstable();
        nodes.dedup();
        nodes
    }

    /// Checks orientation, boundary closure and edge-triangle consistency.
    pub fn validate(&self) -> Result<()> {
        for t in 0..self.num_triangles() {
            let area = self.triangle_area(t);
            if !(area > 0.0) {
                return Err(Error::MeshTangled { triangle: t, area });
            }
        }
        let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let a = tri[k];
                let b = tri[(k + 1) % 3];
                *edge_count.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        let mut boundary: Vec<(usize, usize)> = edge_count
            .iter()
            .filter(|(_, &c)| c == 1)
            .map(|(&e, _)| e)
            .collect();
        if edge_count.values().any(|&c| c > 2) {
            return Err(Error::Meshing("non-manifold edge".into()));
        }
        let mut tagged: Vec<(usize, usize)> = self
            .boundary_edges
            .iter()
            .map(|e| (e.nodes[0].min(e.nodes[1]), e.nodes[0].max(e.nodes[1])))
            .collect();
        boundary.sort_unstable();
        tagged.sort_unstable();
        if boundary != tagged {
            return Err(Error::Meshing(format!(
                "tagged boundary ({} edges) does not match the mesh boundary ({} edges)",
                tagged.len(),
                boundary.len()
            )));
        }
        // every boundary node has exactly two incident boundary edges: closed loops
        let mut degree: HashMap<usize, usize> = HashMap::new();
        for e in &self.boundary_edges {
            *degree.entry(e.nodes[0]).or_default() += 1;
            *degree.entry(e.nodes[1]).or_default() += 1;
        }
        if degree.values().any(|&d| d != 2) {
            return Err(Error::Meshing("boundary edges do not form closed loops".into()));
        }
        if let Some(shape) = &self.obstacle {
            for (i, p) in self.vertices.iter().enumerate() {
                if self.node_kinds[i] != NodeKind::Obstacle && shape.contains(*p) {
                    return Err(Error::Meshing(format!("vertex {i} lies inside the obstacle")));
                }
            }
        }
        Ok(())
    }

    /// Moves every vertex by `sigma mu(x)`; connectivity and tags are unchanged.
    pub fn apply_deformation(&self, mu: &DeformationField, sigma: f64) -> Result<TriangleMesh> {
        mu.check_sigma(sigma)?;
        let vertices: Vec<[f64; 2]> = self
            .vertices
            .iter()
            .map(|&x| {
                let v = mu.value(x);
                if v[0] == 0.0 && v[1] == 0.0 {
                    x
                } else {
                    [x[0] + sigma * v[0], x[1] + sigma * v[1]]
                }
            })
            .collect();
        self.with_vertices(vertices)
    }

    /// Same connectivity with new vertex positions; rejects tangled results.
    pub fn with_vertices(&self, vertices: Vec<[f64; 2]>) -> Result<TriangleMesh> {
        assert_eq!(vertices.len(), self.vertices.len());
        let mut out = self.clone();
        out.vertices = vertices;
        for t in 0..out.num_triangles() {
            let area = out.triangle_area(t);
            if !(area > 0.0) {
                return Err(Error::MeshTangled { triangle: t, area });
            }
        }
        out.mesh_size = out.max_edge_length();
        Ok(out)
    }

    /// Replaces the stored obstacle snapshot (after vertices were moved onto it).
    pub fn set_obstacle(&mut self, shape: Option<ObstacleShape>) {
        self.obstacle = shape;
    }

    /// Node-to-triangle adjacency.
    pub fn node_triangles(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.num_nodes()];
        for (t, tri) in self.triangles.iter().enumerate() {
            for &v in tri {
                adj[v].push(t);
            }
        }
        adj
    }

    /// Writes the ASCII mesh format.
    pub fn to_ascii(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!(
            "vertices {} triangles {}\n",
            self.num_nodes(),
            self.num_triangles()
        ));
        for v in &self.vertices {
            s.push_str(&format!("{:e} {:e}\n", v[0], v[1]));
        }
        for t in &self.triangles {
            s.push_str(&format!("{} {} {}\n", t[0], t[1], t[2]));
        }
        for e in &self.boundary_edges {
            s.push_str(&format!("{} {} {}\n", e.nodes[0], e.nodes[1], e.tag));
        }
        s
    }

    /// Parses the ASCII mesh format. Angle metadata is reconstructed from positions.
    pub fn from_ascii(text: &str) -> Result<TriangleMesh> {
        let bad = |msg: &str| Error::InvalidArgument(format!("mesh file: {msg}"));
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| bad("empty"))?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 4 || parts[0] != "vertices" || parts[2] != "triangles" {
            return Err(bad("bad header"));
        }
        let n: usize = parts[1].parse().map_err(|_| bad("vertex count"))?;
        let m: usize = parts[3].parse().map_err(|_| bad("triangle count"))?;
        let mut vertices = Vec::with_capacity(n);
        for _ in 0..n {
            let l = lines.next().ok_or_else(|| bad("missing vertex"))?;
            let xy: Vec<f64> = l
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad("vertex coordinates"))?;
            if xy.len() != 2 {
                return Err(bad("vertex line"));
            }
            vertices.push([xy[0], xy[1]]);
        }
        let mut triangles = Vec::with_capacity(m);
        for _ in 0..m {
            let l = lines.next().ok_or_else(|| bad("missing triangle"))?;
            let ijk: Vec<usize> = l
                .split_whitespace()
                .map(|t| t.parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad("triangle indices"))?;
            if ijk.len() != 3 || ijk.iter().any(|&i| i >= n) {
                return Err(bad("triangle line"));
            }
            triangles.push([ijk[0], ijk[1], ijk[2]]);
        }
        let mut boundary_edges = Vec::new();
        for l in lines {
            let p: Vec<&str> = l.split_whitespace().collect();
            if p.len() != 3 {
                return Err(bad("boundary line"));
            }
            let i: usize = p[0].parse().map_err(|_| bad("edge index"))?;
            let j: usize = p[1].parse().map_err(|_| bad("edge index"))?;
            if i >= n || j >= n {
                return Err(bad("edge index out of range"));
            }
            boundary_edges.push(BoundaryEdge {
                nodes: [i, j],
                tag: p[2].parse()?,
            });
        }
        let kinds = classify_nodes(n, &boundary_edges);
        let outer_pts: Vec<usize> = (0..n).filter(|&i| kinds[i].is_outer()).collect();
        let center = if outer_pts.is_empty() {
            [0.0, 0.0]
        } else {
            let k = outer_pts.len() as f64;
            [
                outer_pts.iter().map(|&i| vertices[i][0]).sum::<f64>() / k,
                outer_pts.iter().map(|&i| vertices[i][1]).sum::<f64>() / k,
            ]
        };
        let angle = |i: usize, c: [f64; 2]| {
            (vertices[i][1] - c[1])
                .atan2(vertices[i][0] - c[0])
                .rem_euclid(2.0 * std::f64::consts::PI)
        };
        let mut outer_nodes: Vec<(usize, f64)> = outer_pts.iter().map(|&i| (i, angle(i, center))).collect();
        outer_nodes.sort_by(|a, b| a.1.total_cmp(&b.1));
        let obs_pts: Vec<usize> = (0..n).filter(|&i| kinds[i] == NodeKind::Obstacle).collect();
        let mut obstacle_nodes = Vec::new();
        if !obs_pts.is_empty() {
            let k = obs_pts.len() as f64;
            let oc = [
                obs_pts.iter().map(|&i| vertices[i][0]).sum::<f64>() / k,
                obs_pts.iter().map(|&i| vertices[i][1]).sum::<f64>() / k,
            ];
            obstacle_nodes = obs_pts.iter().map(|&i| (i, angle(i, oc))).collect();
            obstacle_nodes.sort_by(|a, b| a.1.total_cmp(&b.1));
        }
        Ok(TriangleMesh::from_parts(
            vertices,
            triangles,
            boundary_edges,
            obstacle_nodes,
            outer_nodes,
            None,
            center,
        ))
    }

    /// Builds a uniform bucket grid for point location.
    pub fn locator(&self) -> PointLocator<'_> {
        PointLocator::new(self)
    }
}

fn classify_nodes(n: usize, edges: &[BoundaryEdge]) -> Vec<NodeKind> {
    let mut kinds = vec![NodeKind::Interior; n];
    // Gamma wins over Outer at arc endpoints.
    for e in edges {
        for &v in &e.nodes {
            let k = match e.tag {
                BoundaryTag::Obstacle => NodeKind::Obstacle,
                BoundaryTag::Gamma => NodeKind::Gamma,
                BoundaryTag::Outer => {
                    if kinds[v] == NodeKind::Gamma {
                        NodeKind::Gamma
                    } else {
                        NodeKind::Outer
                    }
                }
            };
            kinds[v] = k;
        }
    }
    kinds
}

/// Barycentric coordinates of `p` in triangle `(a, b, c)`.
pub fn barycentric(p: [f64; 2], a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> [f64; 3] {
    let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    let l1 = ((b[0] - p[0]) * (c[1] - p[1]) - (c[0] - p[0]) * (b[1] - p[1])) / det;
    let l2 = ((c[0] - p[0]) * (a[1] - p[1]) - (a[0] - p[0]) * (c[1] - p[1])) / det;
    [l1, l2, 1.0 - l1 - l2]
}

/// Bucket-grid point location on a mesh.
pub struct PointLocator<'a> {
    mesh: &'a TriangleMesh,
    origin: [f64; 2],
    cell: f64,
    dims: [usize; 2],
    buckets: Vec<Vec<usize>>,
}

impl<'a> PointLocator<'a> {
    fn new(mesh: &'a TriangleMesh) -> Self {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for v in &mesh.vertices {
            for k in 0..2 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        let cell = mesh.mesh_size.max(1e-9);
        let dims = [
            (((hi[0] - lo[0]) / cell).ceil() as usize).max(1),
            (((hi[1] - lo[1]) / cell).ceil() as usize).max(1),
        ];
        let mut buckets = vec![Vec::new(); dims[0] * dims[1]];
        for t in 0..mesh.num_triangles() {
            let p = mesh.triangle_points(t);
            let (mut a, mut b) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
            for q in &p {
                for k in 0..2 {
                    a[k] = a[k].min(q[k]);
                    b[k] = b[k].max(q[k]);
                }
            }
            let i0 = (((a[0] - lo[0]) / cell).floor() as usize).min(dims[0] - 1);
            let i1 = (((b[0] - lo[0]) / cell).floor() as usize).min(dims[0] - 1);
            let j0 = (((a[1] - lo[1]) / cell).floor() as usize).min(dims[1] - 1);
            let j1 = (((b[1] - lo[1]) / cell).floor() as usize).min(dims[1] - 1);
            for i in i0..=i1 {
                for j in j0..=j1 {
                    buckets[j * dims[0] + i].push(t);
                }
            }
        }
        Self {
            mesh,
            origin: lo,
            cell,
            dims,
            buckets,
        }
    }

    /// Containing triangle and barycentric coordinates of `p`.
    pub fn locate(&self, p: [f64; 2]) -> Option<(usize, [f64; 3])> {
        let fi = (p[0] - self.origin[0]) / self.cell;
        let fj = (p[1] - self.origin[1]) / self.cell;
        if fi < 0.0 || fj < 0.0 {
            return None;
        }
        let i = (fi.floor() as usize).min(self.dims[0] - 1);
        let j = (fj.floor() as usize).min(self.dims[1] - 1);
        if fi > self.dims[0] as f64 + 1e-9 || fj > self.dims[1] as f64 + 1e-9 {
            return None;
        }
        let tol = -1e-12;
        for &t in &self.buckets[j * self.dims[0] + i] {
            let [a, b, c] = self.mesh.triangle_points(t);
            let l = barycentric(p, a, b, c);
            if l.iter().all(|&x| x >= tol) {
                return Some((t, l));
            }
        }
        None
    }

    /// P1 interpolation of nodal `values` at `p`.
    pub fn interpolate(&self, values: &[f64], p: [f64; 2]) -> Option<f64> {
        self.locate(p).map(|(t, l)| {
            let tri = self.mesh.triangles[t];
            l[0] * values[tri[0]] + l[1] * values[tri[1]] + l[2] * values[tri[2]]
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_triangles() -> TriangleMesh {
        let vertices = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let triangles = vec![[0, 1, 2], [0, 2, 3]];
        let boundary_edges = (0..4)
            .map(|i| BoundaryEdge {
                nodes: [i, (i + 1) % 4],
                tag: if i == 0 { BoundaryTag::Gamma } else { BoundaryTag::Outer },
            })
            .collect();
        TriangleMesh::from_parts(vertices, triangles, boundary_edges, vec![], vec![], None, [0.5, 0.5])
    }

    #[test]
    fn square_mesh_is_valid() {
        let m = two_triangles();
        m.validate().unwrap();
        assert!((m.total_area() - 1.0).abs() < 1e-15);
        assert_eq!(m.node_kind(0), NodeKind::Gamma);
        assert_eq!(m.node_kind(2), NodeKind::Outer);
    }

    #[test]
    fn inverted_triangle_detected() {
        let m = two_triangles();
        let mut v = m.vertices.clone();
        v[2] = [-1.0, -1.0];
        assert!(matches!(m.with_vertices(v), Err(Error::MeshTangled { .. })));
    }

    #[test]
    fn ascii_roundtrip() {
        let m = two_triangles();
        let back = TriangleMesh::from_ascii(&m.to_ascii()).unwrap();
        assert_eq!(back.vertices, m.vertices);
        assert_eq!(back.triangles, m.triangles);
        assert_eq!(back.boundary_edges, m.boundary_edges);
    }

    #[test]
    fn locator_interpolates_linear_field() {
        let m = two_triangles();
        let vals: Vec<f64> = m.vertices.iter().map(|v| 2.0 * v[0] - v[1] + 0.5).collect();
        let loc = m.locator();
        let p = [0.3, 0.8];
        assert!((loc.interpolate(&vals, p).unwrap() - (0.6 - 0.8 + 0.5)).abs() < 1e-14);
        assert!(loc.interpolate(&vals, [1.5, 0.5]).is_none());
    }
}
