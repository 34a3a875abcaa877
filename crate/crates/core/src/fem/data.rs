use std::fmt;
use std::sync::Arc;

pub type PointFn = Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>;

/// A scalar function of position, used for Dirichlet data, test functions and sources.
#[derive(Clone)]
pub enum ScalarMap {
    Zero,
    Constant(f64),
    /// `mean + sum_k cos[k-1] cos(k t) + sin[k-1] sin(k t)`, `t` the polar angle about `center`.
    Trig {
        center: [f64; 2],
        mean: f64,
        cos: Vec<f64>,
        sin: Vec<f64>,
    },
    Function(PointFn),
}

impl fmt::Debug for ScalarMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarMap::Zero => write!(f, "Zero"),
            ScalarMap::Constant(c) => write!(f, "Constant({c})"),
            ScalarMap::Trig { center, mean, cos, sin } => f
                .debug_struct("Trig")
                .field("center", center)
                .field("mean", mean)
                .field("cos", cos)
                .field("sin", sin)
                .finish(),
            ScalarMap::Function(_) => write!(f, "Function(..)"),
        }
    }
}

impl ScalarMap {
    pub fn function(f: impl Fn([f64; 2]) -> f64 + Send + Sync + 'static) -> Self {
        ScalarMap::Function(Arc::new(f))
    }

    /// Single Fourier mode `cos(k t)` (or `sin` when `sine`) about `center`.
    pub fn mode(center: [f64; 2], k: usize, sine: bool) -> Self {
        if k == 0 {
            return ScalarMap::Constant(1.0);
        }
        let mut cos = vec![0.0; k];
        let mut sin = vec![0.0; k];
        if sine {
            sin[k - 1] = 1.0;
        } else {
            cos[k - 1] = 1.0;
        }
        ScalarMap::Trig {
            center,
            mean: 0.0,
            cos,
            sin,
        }
    }

    pub fn eval(&self, p: [f64; 2]) -> f64 {
        match self {
            ScalarMap::Zero => 0.0,
            ScalarMap::Constant(c) => *c,
            ScalarMap::Trig { center, mean, cos, sin } => {
                let t = (p[1] - center[1]).atan2(p[0] - center[0]);
                let mut v = *mean;
                for (k, c) in cos.iter().enumerate() {
                    v += c * ((k + 1) as f64 * t).cos();
                }
                for (k, s) in sin.iter().enumerate() {
                    v += s * ((k + 1) as f64 * t).sin();
                }
                v
            }
            ScalarMap::Function(f) => f(p),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            ScalarMap::Zero => true,
            ScalarMap::Constant(c) => *c == 0.0,
            ScalarMap::Trig { mean, cos, sin, .. } => {
                *mean == 0.0 && cos.iter().all(|c| *c == 0.0) && sin.iter().all(|c| *c == 0.0)
            }
            ScalarMap::Function(_) => false,
        }
    }
}

/// Dirichlet data `(phi, psi)` on the outer boundary.
#[derive(Debug, Clone)]
pub struct BoundaryData {
    pub phi: ScalarMap,
    pub psi: ScalarMap,
}

impl BoundaryData {
    pub fn new(phi: ScalarMap, psi: ScalarMap) -> Self {
        Self { phi, psi }
    }

    pub fn zero() -> Self {
        Self::new(ScalarMap::Zero, ScalarMap::Zero)
    }
}

/// Volume sources `(F, G)` of the two equations.
#[derive(Debug, Clone)]
pub struct Sources {
    pub f: ScalarMap,
    pub g: ScalarMap,
}

impl Sources {
    pub fn new(f: ScalarMap, g: ScalarMap) -> Self {
        Self { f, g }
    }
}

/// Nodal values of the two fields on one mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldPair {
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub warnings: Vec<String>,
}

impl FieldPair {
    pub fn zeros(n: usize) -> Self {
        Self {
            y: vec![0.0; n],
            z: vec![0.0; n],
            warnings: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &FieldPair) -> FieldPair {
        FieldPair {
            y: self.y.iter().zip(&other.y).map(|(a, b)| a + s * b).collect(),
            z: self.z.iter().zip(&other.z).map(|(a, b)| a + s * b).collect(),
            warnings: Vec::new(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.y.iter().chain(&self.z).fold(0.0f64, |m, v| m.max(v.abs()))
    }
}
