//! Boundary fluxes on γ, interior values on ω, and distances between observations.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write;

use crate::error::{Error, Result};
use crate::fem::assembly::{full_load, full_operator};
use crate::fem::{CoefficientSet, FieldPair, Sources};
use crate::geometry::domain::{Geometry, SafetyRegion};
use crate::geometry::mesh::{BoundaryTag, NodeKind, TriangleMesh};
use crate::linalg::{CsrMatrix, TripletBuilder};

/// Which closed boundary curve a flux lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryPart {
    Outer,
    Obstacle,
}

/// Variational normal derivatives on one closed boundary curve.
///
/// The normal points out of the computational domain, so on the obstacle it points
/// into the obstacle.
#[derive(Debug, Clone)]
pub struct BoundaryFlux {
    pub nodes: Vec<usize>,
    pub flux_y: Vec<f64>,
    pub flux_z: Vec<f64>,
    /// Weak residuals `a(u_h, phi_i) - (f, phi_i)`, equal to `mass * flux`.
    pub moment_y: Vec<f64>,
    pub moment_z: Vec<f64>,
    /// Consistent boundary mass matrix in the local numbering of `nodes`.
    pub mass: CsrMatrix,
}

impl BoundaryFlux {
    /// `∫ f g` over the curve for nodal values in the local numbering.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        crate::linalg::dot(f, &self.mass.matvec(g))
    }
}

fn curve_nodes(mesh: &TriangleMesh, part: BoundaryPart) -> Vec<usize> {
    match part {
        BoundaryPart::Outer => mesh.outer_nodes.iter().map(|n| n.0).collect(),
        BoundaryPart::Obstacle => mesh.obstacle_nodes.iter().map(|n| n.0).collect(),
    }
}

fn edge_in_part(tag: BoundaryTag, part: BoundaryPart) -> bool {
    match part {
        BoundaryPart::Outer => tag != BoundaryTag::Obstacle,
        BoundaryPart::Obstacle => tag == BoundaryTag::Obstacle,
    }
}

fn edge_length(mesh: &TriangleMesh, e: [usize; 2]) -> f64 {
    let (a, b) = (mesh.vertices[e[0]], mesh.vertices[e[1]]);
    (b[0] - a[0]).hypot(b[1] - a[1])
}

/// Consistent flux recovery: `∫ g w = a(u_h, w) - (f, w)` for every boundary hat `w` on the curve.
pub fn boundary_flux(
    mesh: &TriangleMesh,
    coupling: [[f64; 2]; 2],
    fields: &FieldPair,
    sources: Option<&Sources>,
    part: BoundaryPart,
) -> Result<BoundaryFlux> {
    let nodes = curve_nodes(mesh, part);
    if nodes.is_empty() {
        return Err(match part {
            BoundaryPart::Outer => Error::EmptyGamma,
            BoundaryPart::Obstacle => Error::InvalidArgument("mesh has no obstacle boundary".into()),
        });
    }
    if fields.len() != mesh.num_nodes() {
        return Err(Error::InvalidArgument("field length does not match the mesh".into()));
    }
    let local: HashMap<usize, usize> = nodes.iter().enumerate().map(|(k, &n)| (n, k)).collect();
    let nb = nodes.len();
    let mut mb = TripletBuilder::new(nb, nb);
    for e in mesh.boundary_edges.iter().filter(|e| edge_in_part(e.tag, part)) {
        let l = edge_length(mesh, e.nodes);
        let (i, j) = (local[&e.nodes[0]], local[&e.nodes[1]]);
        mb.push(i, i, l / 3.0);
        mb.push(j, j, l / 3.0);
        mb.push(i, j, l / 6.0);
        mb.push(j, i, l / 6.0);
    }
    let mass = mb.build();

    let op = full_operator(mesh, coupling);
    let mut u = vec![0.0; 2 * mesh.num_nodes()];
    for i in 0..mesh.num_nodes() {
        u[2 * i] = fields.y[i];
        u[2 * i + 1] = fields.z[i];
    }
    let mut r = op.matvec(&u);
    if let Some(src) = sources {
        let load = full_load(mesh, src);
        r.iter_mut().zip(load).for_each(|(a, b)| *a -= b);
    }
    let ry: Vec<f64> = nodes.iter().map(|&n| r[2 * n]).collect();
    let rz: Vec<f64> = nodes.iter().map(|&n| r[2 * n + 1]).collect();
    let lu = mass.factorize()?;
    Ok(BoundaryFlux {
        flux_y: lu.solve(&ry)?,
        flux_z: lu.solve(&rz)?,
        moment_y: ry,
        moment_z: rz,
        nodes,
        mass,
    })
}

/// Observed fluxes `(alpha, beta)` on the γ nodes, ordered along the arc.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTrace {
    pub gamma_nodes: Vec<usize>,
    /// Arc length from the first γ node.
    pub arc_param: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    /// Lumped lengths (half of each adjacent γ edge).
    pub edge_weights: Vec<f64>,
    /// Closed curve: the last node connects back to the first.
    pub closed: bool,
}

impl BoundaryTrace {
    pub fn total_weight(&self) -> f64 {
        self.edge_weights.iter().sum()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("arc_param,alpha,beta,weight\n");
        for i in 0..self.alpha.len() {
            let _ = writeln!(
                s,
                "{:e},{:e},{:e},{:e}",
                self.arc_param[i], self.alpha[i], self.beta[i], self.edge_weights[i]
            );
        }
        s
    }

    /// `self + s * other` on the same support.
    pub fn axpy(&self, s: f64, other: &BoundaryTrace) -> Result<BoundaryTrace> {
        check_same_gamma(self, other)?;
        let mut out = self.clone();
        for i in 0..out.alpha.len() {
            out.alpha[i] += s * other.alpha[i];
            out.beta[i] += s * other.beta[i];
        }
        Ok(out)
    }
}

/// γ nodes ordered along the arc, with arc-length parameter and lumped weights.
pub fn gamma_layout(mesh: &TriangleMesh) -> Result<(Vec<usize>, Vec<f64>, Vec<f64>, bool)> {
    let gamma_edges: Vec<[usize; 2]> = mesh
        .boundary_edges
        .iter()
        .filter(|e| e.tag == BoundaryTag::Gamma)
        .map(|e| e.nodes)
        .collect();
    if gamma_edges.is_empty() {
        return Err(Error::EmptyGamma);
    }
    let mut weight: HashMap<usize, f64> = HashMap::new();
    for e in &gamma_edges {
        let l = edge_length(mesh, *e);
        *weight.entry(e[0]).or_default() += 0.5 * l;
        *weight.entry(e[1]).or_default() += 0.5 * l;
    }
    let closed = mesh.node_kinds().iter().all(|k| *k != NodeKind::Outer);
    // walk the outer node ring, starting after a non-γ node when the arc is partial
    let ring: Vec<usize> = mesh.outer_nodes.iter().map(|n| n.0).collect();
    let n = ring.len();
    let start = if closed {
        0
    } else {
        let mut s = 0;
        for k in 0..n {
            let prev = ring[(k + n - 1) % n];
            let cur = ring[k];
            let e_prev = gamma_edges.iter().any(|e| (e[0] == prev && e[1] == cur) || (e[1] == prev && e[0] == cur));
            if mesh.node_kind(cur) == NodeKind::Gamma && !e_prev {
                s = k;
                break;
            }
        }
        s
    };
    let mut nodes = Vec::new();
    let mut arc = Vec::new();
    let mut weights = Vec::new();
    let mut s = 0.0;
    for k in 0..n {
        let node = ring[(start + k) % n];
        if !weight.contains_key(&node) {
            if !nodes.is_empty() {
                break;
            }
            continue;
        }
        if let Some(&last) = nodes.last() {
            s += edge_length(mesh, [last, node]);
        }
        nodes.push(node);
        arc.push(s);
        weights.push(weight[&node]);
    }
    if nodes.len() < 2 {
        return Err(Error::EmptyGamma);
    }
    Ok((nodes, arc, weights, closed))
}

/// Normal derivatives of `(y, z)` on γ by consistent flux recovery.
pub fn normal_trace(
    solution: &FieldPair,
    mesh: &TriangleMesh,
    coeffs: &CoefficientSet,
    sources: Option<&Sources>,
) -> Result<BoundaryTrace> {
    let (gamma_nodes, arc_param, edge_weights, closed) = gamma_layout(mesh)?;
    let flux = boundary_flux(mesh, coeffs.coupling(), solution, sources, BoundaryPart::Outer)?;
    let local: HashMap<usize, usize> = flux.nodes.iter().enumerate().map(|(k, &n)| (n, k)).collect();
    let alpha = gamma_nodes.iter().map(|n| flux.flux_y[local[n]]).collect();
    let beta = gamma_nodes.iter().map(|n| flux.flux_z[local[n]]).collect();
    Ok(BoundaryTrace {
        gamma_nodes,
        arc_param,
        alpha,
        beta,
        edge_weights,
        closed,
    })
}

/// Interior observation disk ω.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservationDisk {
    pub center: [f64; 2],
    pub radius: f64,
}

impl ObservationDisk {
    pub fn new(center: [f64; 2], radius: f64) -> Self {
        Self { center, radius }
    }

    pub fn default_for(geometry: &Geometry) -> Self {
        let s = geometry.safety;
        let room = geometry.outer.inscribed_radius_about(s.center) - s.radius;
        let r = (0.25 * room).min(0.1);
        Self::new([s.center[0] + s.radius + 0.5 * room, s.center[1]], r)
    }

    /// ω must avoid the closed safety disk and lie strictly inside Ω.
    pub fn validate(&self, geometry: &Geometry) -> Result<()> {
        self.validate_safety(&geometry.safety)?;
        if geometry.outer.inside_distance(self.center) <= self.radius {
            return Err(Error::InvalidArgument("observation disk leaves the domain".into()));
        }
        Ok(())
    }

    fn validate_safety(&self, safety: &SafetyRegion) -> Result<()> {
        if !(self.radius > 0.0) {
            return Err(Error::InvalidArgument("observation disk radius must be positive".into()));
        }
        if safety.distance_from_center(self.center) - self.radius <= safety.radius {
            return Err(Error::InvalidArgument("observation disk meets the safety region".into()));
        }
        Ok(())
    }

    /// Points of the `resolution x resolution` lattice over the bounding box that fall strictly inside.
    pub fn sample_points(&self, resolution: usize) -> Vec<[f64; 2]> {
        let n = resolution.max(1);
        let mut pts = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let u = if n == 1 { 0.0 } else { -1.0 + 2.0 * i as f64 / (n - 1) as f64 };
                let v = if n == 1 { 0.0 } else { -1.0 + 2.0 * j as f64 / (n - 1) as f64 };
                if u * u + v * v < 1.0 - 1e-12 {
                    pts.push([self.center[0] + self.radius * u, self.center[1] + self.radius * v]);
                }
            }
        }
        pts
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        (p[0] - self.center[0]).hypot(p[1] - self.center[1]) < self.radius
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InternalTrace {
    pub sample_points: Vec<[f64; 2]>,
    pub values: Vec<f64>,
    /// Quadrature weight per point (area of ω over point count).
    pub weight: f64,
}

impl InternalTrace {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,y,value\n");
        for (p, v) in self.sample_points.iter().zip(&self.values) {
            let _ = writeln!(s, "{:e},{:e},{:e}", p[0], p[1], v);
        }
        s
    }
}

/// P1 interpolation of `y` on the sample lattice of ω.
pub fn internal_trace(
    solution: &FieldPair,
    mesh: &TriangleMesh,
    omega: &ObservationDisk,
    resolution: usize,
    safety: &SafetyRegion,
) -> Result<InternalTrace> {
    omega.validate_safety(safety)?;
    let pts = omega.sample_points(resolution);
    if pts.is_empty() {
        return Err(Error::InvalidArgument("sample grid has no points inside the observation disk".into()));
    }
    let loc = mesh.locator();
    let mut values = Vec::with_capacity(pts.len());
    for &p in &pts {
        let v = loc
            .interpolate(&solution.y, p)
            .ok_or(Error::PointOutsideMesh { x: p[0], y: p[1] })?;
        values.push(v);
    }
    Ok(InternalTrace {
        weight: PI * omega.radius * omega.radius / pts.len() as f64,
        sample_points: pts,
        values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceMode {
    L2,
    /// L2 norm of the arc-length antiderivative of the difference.
    HminusSurrogate,
}

#[derive(Debug, Clone, Copy)]
pub enum TraceRef<'a> {
    Boundary(&'a BoundaryTrace),
    Internal(&'a InternalTrace),
}

fn check_same_gamma(a: &BoundaryTrace, b: &BoundaryTrace) -> Result<()> {
    if a.alpha.len() != b.alpha.len() || a.edge_weights.len() != b.edge_weights.len() {
        return Err(Error::MismatchedTraces(format!(
            "{} vs {} gamma nodes",
            a.alpha.len(),
            b.alpha.len()
        )));
    }
    Ok(())
}

fn antiderivative(arc: &[f64], d: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(d.len());
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..d.len() {
        acc += 0.5 * (d[i] + d[i - 1]) * (arc[i] - arc[i - 1]);
        out.push(acc);
    }
    out
}

pub fn boundary_distance(t0: &BoundaryTrace, t1: &BoundaryTrace, mode: DistanceMode) -> Result<f64> {
    check_same_gamma(t0, t1)?;
    let da: Vec<f64> = t0.alpha.iter().zip(&t1.alpha).map(|(a, b)| a - b).collect();
    let db: Vec<f64> = t0.beta.iter().zip(&t1.beta).map(|(a, b)| a - b).collect();
    let w = &t0.edge_weights;
    let (fa, fb) = match mode {
        DistanceMode::L2 => (da, db),
        DistanceMode::HminusSurrogate => (antiderivative(&t0.arc_param, &da), antiderivative(&t0.arc_param, &db)),
    };
    Ok((0..w.len()).map(|i| w[i] * (fa[i] * fa[i] + fb[i] * fb[i])).sum::<f64>().sqrt())
}

pub fn internal_distance(t0: &InternalTrace, t1: &InternalTrace) -> Result<f64> {
    if t0.sample_points.len() != t1.sample_points.len() {
        return Err(Error::MismatchedTraces(format!(
            "{} vs {} sample points",
            t0.sample_points.len(),
            t1.sample_points.len()
        )));
    }
    let s: f64 = t0.values.iter().zip(&t1.values).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((t0.weight * s).sqrt())
}

/// Distance between two observations of the same kind. Internal traces only support L2.
pub fn trace_distance(t0: TraceRef<'_>, t1: TraceRef<'_>, mode: DistanceMode) -> Result<f64> {
    match (t0, t1) {
        (TraceRef::Boundary(a), TraceRef::Boundary(b)) => boundary_distance(a, b, mode),
        (TraceRef::Internal(a), TraceRef::Internal(b)) => internal_distance(a, b),
        _ => Err(Error::MismatchedTraces("boundary and internal traces cannot be compared".into())),
    }
}
