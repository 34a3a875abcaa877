//! TOML experiment schema and its translation into library types.

use std::fmt;

use obstacle_lab::carleman::{AnnularCompact, BumpFunction, CarlemanWeight};
use obstacle_lab::fem::{BoundaryData, CoefficientSet, ScalarMap};
use obstacle_lab::geometry::{
    Cutoff, DeformationField, Geometry, ObservationArc, ObstacleShape, OuterBoundary, SafetyRegion,
};
use obstacle_lab::observation::{DistanceMode, ObservationDisk};
use obstacle_lab::reconstruction::{ObservationMode, Problem, ReconstructionConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Forward,
    Observe,
    PullbackCheck,
    AdjointCheck,
    Reconstruct,
    Stability,
    Discriminate,
    Carleman,
    #[serde(rename = "counterexample-1d")]
    Counterexample1d,
    Poincare,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default();
        f.write_str(&s)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Kind,
    #[serde(default)]
    pub seed: u64,
    pub output: Option<String>,
    pub geometry: Option<GeometryConfig>,
    pub coefficients: Option<CoefficientsConfig>,
    pub data: Option<DataConfig>,
    #[serde(default)]
    pub numeric: NumericConfig,
    pub deformation: Option<DeformationConfig>,
    pub observation: Option<ObservationConfig>,
    pub target: Option<ShapeConfig>,
    pub test: Option<TestConfig>,
    pub carleman: Option<CarlemanConfig>,
    pub counterexample: Option<CounterexampleConfig>,
    pub plan: Option<toml::Table>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    #[serde(default)]
    pub outer: OuterConfig,
    /// Angular range `[start, end]` of the observation arc; the full boundary when absent.
    pub gamma: Option<[f64; 2]>,
    #[serde(default)]
    pub safety: SafetyConfig,
    pub obstacle: Option<ShapeConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase", deny_unknown_fields)]
pub enum OuterConfig {
    Disk { center: [f64; 2], radius: f64 },
    Polygon { vertices: Vec<[f64; 2]> },
}

impl Default for OuterConfig {
    fn default() -> Self {
        OuterConfig::Disk {
            center: [0.0, 0.0],
            radius: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SafetyConfig {
    pub center: [f64; 2],
    pub radius: f64,
    #[serde(default = "default_clearance")]
    pub clearance: f64,
}

fn default_clearance() -> f64 {
    obstacle_lab::geometry::domain::DEFAULT_CLEARANCE
}

impl Default for SafetyConfig {
    fn default() -> Self {
        Self {
            center: [0.0, 0.0],
            radius: 0.6,
            clearance: default_clearance(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeConfig {
    #[serde(default)]
    pub center: [f64; 2],
    pub mean_radius: f64,
    #[serde(default)]
    pub coefficients: Vec<f64>,
}

impl ShapeConfig {
    pub fn build(&self) -> ObstacleShape {
        ObstacleShape::new(self.center, self.mean_radius, self.coefficients.clone())
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientsConfig {
    #[serde(default)]
    pub a: f64,
    #[serde(default)]
    pub b: f64,
    #[serde(default, rename = "A")]
    pub big_a: f64,
    #[serde(default, rename = "B")]
    pub big_b: f64,
}

impl CoefficientsConfig {
    pub fn build(&self) -> CoefficientSet {
        CoefficientSet::new(self.a, self.b, self.big_a, self.big_b)
    }
}

/// `mean + sum_k cos[k-1] cos(k t) + sin[k-1] sin(k t)` in the polar angle about the outer center.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrigSeries {
    #[serde(default)]
    pub mean: f64,
    #[serde(default)]
    pub cos: Vec<f64>,
    #[serde(default)]
    pub sin: Vec<f64>,
}

impl TrigSeries {
    pub fn build(&self, center: [f64; 2]) -> ScalarMap {
        if self.cos.is_empty() && self.sin.is_empty() {
            return if self.mean == 0.0 {
                ScalarMap::Zero
            } else {
                ScalarMap::Constant(self.mean)
            };
        }
        ScalarMap::Trig {
            center,
            mean: self.mean,
            cos: self.cos.clone(),
            sin: self.sin.clone(),
        }
    }

    fn values(&self) -> impl Iterator<Item = f64> + '_ {
        std::iter::once(self.mean).chain(self.cos.iter().copied()).chain(self.sin.iter().copied())
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    #[serde(default)]
    pub phi: TrigSeries,
    #[serde(default)]
    pub psi: TrigSeries,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceKind {
    #[default]
    L2,
    Hminus,
}

impl DistanceKind {
    pub fn mode(self) -> DistanceMode {
        match self {
            DistanceKind::L2 => DistanceMode::L2,
            DistanceKind::Hminus => DistanceMode::HminusSurrogate,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericConfig {
    #[serde(default = "default_h")]
    pub h: f64,
    pub sigma: Option<Vec<f64>>,
    #[serde(default = "default_basis")]
    pub basis_size: usize,
    #[serde(default = "default_tests")]
    pub test_count: usize,
    #[serde(default = "default_true")]
    pub both_channels: bool,
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default = "default_svd")]
    pub svd_threshold: f64,
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default = "default_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_residual_tol")]
    pub residual_tol: f64,
    #[serde(default = "default_shape_tol")]
    pub shape_tol: f64,
    /// Relative noise added to synthetic observations.
    #[serde(default)]
    pub noise: f64,
    #[serde(default)]
    pub distance: DistanceKind,
}

fn default_h() -> f64 {
    0.05
}
fn default_basis() -> usize {
    5
}
fn default_tests() -> usize {
    10
}
fn default_true() -> bool {
    true
}
fn default_rho() -> f64 {
    1e-8
}
fn default_svd() -> f64 {
    obstacle_lab::reconstruction::DEFAULT_RANK_THRESHOLD
}
fn default_tau() -> f64 {
    0.5
}
fn default_iterations() -> usize {
    30
}
fn default_residual_tol() -> f64 {
    1e-6
}
fn default_shape_tol() -> f64 {
    1e-5
}

impl Default for NumericConfig {
    fn default() -> Self {
        toml::from_str("").expect("numeric defaults")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKindConfig {
    Zero,
    Radial,
    Rotational,
    Affine,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeformationConfig {
    pub kind: FieldKindConfig,
    pub center: Option<[f64; 2]>,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    /// `[inner_start, inner_end, plateau_end, outer_end]` radii of the cutoff about `center`.
    #[serde(default = "default_cutoff")]
    pub cutoff: [f64; 4],
    #[serde(default)]
    pub matrix: [[f64; 2]; 2],
    #[serde(default)]
    pub offset: [f64; 2],
}

fn default_amplitude() -> f64 {
    1.0
}
fn default_cutoff() -> [f64; 4] {
    [0.0, 0.2, 0.4, 0.6]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObservationKind {
    #[default]
    Boundary,
    Internal,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservationConfig {
    #[serde(default)]
    pub mode: ObservationKind,
    pub center: Option<[f64; 2]>,
    pub radius: Option<f64>,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
}

fn default_resolution() -> usize {
    21
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestConfig {
    #[serde(default)]
    pub eta: TrigSeries,
    #[serde(default)]
    pub theta: TrigSeries,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CarlemanConfig {
    /// `delta = delta_factor / R^2`.
    #[serde(default = "default_delta_factor")]
    pub delta_factor: f64,
    #[serde(default = "default_one")]
    pub radius: f64,
    /// `K = {3R/4 <= |x| <= 2R - eps}`.
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_bump_center")]
    pub bump_center: [f64; 2],
    #[serde(default = "default_bump_width")]
    pub bump_half_width: f64,
    #[serde(default = "default_one")]
    pub bump_amplitude: f64,
    #[serde(default = "default_ratio_h")]
    pub h: Vec<f64>,
    /// Polar sampling `[radii, angles]` of the annulus for the bracket check.
    #[serde(default = "default_samples")]
    pub samples: [usize; 2],
    #[serde(default = "default_fd_points")]
    pub fd_points: usize,
}

fn default_delta_factor() -> f64 {
    5.0
}
fn default_one() -> f64 {
    1.0
}
fn default_eps() -> f64 {
    0.1
}
fn default_bump_center() -> [f64; 2] {
    [1.3, 0.0]
}
fn default_bump_width() -> f64 {
    0.3
}
fn default_ratio_h() -> Vec<f64> {
    vec![0.4, 0.2, 0.1, 0.05]
}
fn default_samples() -> [usize; 2] {
    [100, 100]
}
fn default_fd_points() -> usize {
    100
}

impl CarlemanConfig {
    pub fn weight(&self) -> obstacle_lab::Result<CarlemanWeight> {
        CarlemanWeight::scaled(self.delta_factor, self.radius)
    }

    pub fn compact(&self) -> obstacle_lab::Result<AnnularCompact> {
        AnnularCompact::standard(self.radius, self.eps * self.radius)
    }

    pub fn bump(&self) -> obstacle_lab::Result<BumpFunction> {
        BumpFunction::new(self.bump_center, self.bump_half_width, self.bump_amplitude)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CounterexampleConfig {
    pub eta: f64,
    pub zeta: f64,
    pub b: f64,
    #[serde(rename = "A")]
    pub big_a: f64,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(default = "default_points")]
    pub points: usize,
}

fn default_points() -> usize {
    10_000
}

/// A configuration problem tied to a dotted key path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl Violation {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

/// Parses TOML text. Schema errors carry the offending key path.
pub fn parse(text: &str) -> Result<ExperimentConfig, Violation> {
    let de = toml::Deserializer::new(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { String::new() } else { path };
        Violation::new(path, e.into_inner().message().trim().to_owned())
    })
}

/// Blocks each experiment kind reads.
pub fn required_blocks(kind: Kind) -> &'static [&'static str] {
    match kind {
        Kind::Forward | Kind::Observe => &["geometry", "geometry.obstacle", "coefficients", "data"],
        Kind::PullbackCheck | Kind::AdjointCheck | Kind::Stability => {
            &["geometry", "geometry.obstacle", "coefficients", "data", "deformation"]
        }
        Kind::Reconstruct | Kind::Discriminate => &["geometry", "geometry.obstacle", "coefficients", "data", "target"],
        Kind::Carleman => &["carleman"],
        Kind::Counterexample1d => &["counterexample"],
        Kind::Poincare => &["geometry"],
    }
}

impl ExperimentConfig {
    fn has_block(&self, name: &str) -> bool {
        match name {
            "geometry" => self.geometry.is_some(),
            "geometry.obstacle" => self.geometry.as_ref().is_some_and(|g| g.obstacle.is_some()),
            "coefficients" => self.coefficients.is_some(),
            "data" => self.data.is_some(),
            "deformation" => self.deformation.is_some(),
            "target" => self.target.is_some(),
            "carleman" => self.carleman.is_some(),
            "counterexample" => self.counterexample.is_some(),
            _ => false,
        }
    }

    pub fn missing_blocks(&self) -> Vec<Violation> {
        let mut out: Vec<Violation> = required_blocks(self.kind)
            .iter()
            .filter(|b| !self.has_block(b))
            .map(|b| Violation::new(*b, format!("block required for kind \"{}\"", self.kind)))
            .collect();
        // a missing parent already covers its children
        let parents: Vec<String> = out.iter().map(|v| format!("{}.", v.path)).collect();
        out.retain(|v| !parents.iter().any(|p| v.path.starts_with(p.as_str())));
        out
    }

    pub fn build_geometry(&self) -> Option<Geometry> {
        let g = self.geometry.as_ref()?;
        let outer = match &g.outer {
            OuterConfig::Disk { center, radius } => OuterBoundary::Disk {
                center: *center,
                radius: *radius,
            },
            OuterConfig::Polygon { vertices } => OuterBoundary::Polygon {
                vertices: vertices.clone(),
            },
        };
        let mut safety = SafetyRegion::new(g.safety.center, g.safety.radius);
        safety.clearance = g.safety.clearance;
        let gamma = g.gamma.map(|[s, e]| ObservationArc::new(s, e)).unwrap_or_else(ObservationArc::full);
        Some(Geometry { outer, gamma, safety })
    }

    pub fn obstacle(&self) -> Option<ObstacleShape> {
        self.geometry.as_ref()?.obstacle.as_ref().map(ShapeConfig::build)
    }

    pub fn build_data(&self, geometry: &Geometry) -> BoundaryData {
        let c = geometry.outer.center();
        let d = self.data.clone().unwrap_or_default();
        BoundaryData::new(d.phi.build(c), d.psi.build(c))
    }

    pub fn build_problem(&self) -> Option<Problem> {
        let geometry = self.build_geometry()?;
        Some(Problem {
            data: self.build_data(&geometry),
            coeffs: self.coefficients?.build(),
            geometry,
        })
    }

    pub fn build_deformation(&self, geometry: &Geometry) -> Option<obstacle_lab::Result<DeformationField>> {
        let d = self.deformation.as_ref()?;
        let center = d.center.unwrap_or(geometry.safety.center);
        let [a, b, c, e] = d.cutoff;
        let build = || {
            let cutoff = Cutoff::new(a, b, c, e)?;
            match d.kind {
                FieldKindConfig::Zero => Ok(DeformationField::zero(geometry.safety)),
                FieldKindConfig::Radial => DeformationField::radial(center, d.amplitude, cutoff, geometry.safety),
                FieldKindConfig::Rotational => DeformationField::rotational(center, d.amplitude, cutoff, geometry.safety),
                FieldKindConfig::Affine => DeformationField::affine(center, d.matrix, d.offset, cutoff, geometry.safety),
            }
        };
        Some(build())
    }

    pub fn observation_mode(&self, geometry: &Geometry) -> ObservationMode {
        match &self.observation {
            Some(o) if o.mode == ObservationKind::Internal => {
                let def = ObservationDisk::default_for(geometry);
                ObservationMode::Internal {
                    omega: ObservationDisk::new(o.center.unwrap_or(def.center), o.radius.unwrap_or(def.radius)),
                    resolution: o.resolution,
                }
            }
            _ => ObservationMode::Boundary,
        }
    }

    pub fn reconstruction_config(&self, geometry: &Geometry) -> ReconstructionConfig {
        let n = &self.numeric;
        ReconstructionConfig {
            basis_size: n.basis_size,
            test_count: n.test_count,
            both_channels: n.both_channels,
            rho_factor: n.rho,
            svd_threshold: n.svd_threshold,
            tau: n.tau,
            max_iterations: n.max_iterations,
            residual_tol: n.residual_tol,
            shape_tol: n.shape_tol,
            mesh_size: n.h,
            mode: self.observation_mode(geometry),
        }
    }

    pub fn sigma_grid(&self, fallback: &[f64]) -> Vec<f64> {
        self.numeric.sigma.clone().unwrap_or_else(|| fallback.to_vec())
    }

    /// Every finite-valued input, for the non-finite check.
    pub(crate) fn data_values(&self) -> Vec<(String, f64)> {
        let mut v = Vec::new();
        if let Some(d) = &self.data {
            v.extend(d.phi.values().map(|x| ("data.phi".to_string(), x)));
            v.extend(d.psi.values().map(|x| ("data.psi".to_string(), x)));
        }
        if let Some(c) = &self.coefficients {
            for (k, x) in [("a", c.a), ("b", c.b), ("A", c.big_a), ("B", c.big_b)] {
                v.push((format!("coefficients.{k}"), x));
            }
        }
        v
    }
}
