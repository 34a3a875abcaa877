//! Triangle quadrature rules in barycentric coordinates (weights sum to one).

/// Degree-5 seven-point rule.
pub const SEVEN_POINT: [([f64; 3], f64); 7] = {
    const A1: f64 = 0.059_715_871_789_770;
    const B1: f64 = 0.470_142_064_105_115;
    const W1: f64 = 0.132_394_152_788_506;
    const A2: f64 = 0.797_426_985_353_087;
    const B2: f64 = 0.101_286_507_323_456;
    const W2: f64 = 0.125_939_180_544_827;
    [
        ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 0.225),
        ([A1, B1, B1], W1),
        ([B1, A1, B1], W1),
        ([B1, B1, A1], W1),
        ([A2, B2, B2], W2),
        ([B2, A2, B2], W2),
        ([B2, B2, A2], W2),
    ]
};

/// Edge-midpoint rule, exact for quadratics.
pub const EDGE_MIDPOINT: [([f64; 3], f64); 3] = [
    ([0.5, 0.5, 0.0], 1.0 / 3.0),
    ([0.0, 0.5, 0.5], 1.0 / 3.0),
    ([0.5, 0.0, 0.5], 1.0 / 3.0),
];

pub fn map_point(p: &[[f64; 2]; 3], l: [f64; 3]) -> [f64; 2] {
    [
        l[0] * p[0][0] + l[1] * p[1][0] + l[2] * p[2][0],
        l[0] * p[0][1] + l[1] * p[1][1] + l[2] * p[2][1],
    ]
}

/// P1 mass matrix of a triangle of area `area` via [`EDGE_MIDPOINT`].
pub fn p1_mass(area: f64) -> [[f64; 3]; 3] {
    let mut m = [[0.0; 3]; 3];
    for (l, w) in EDGE_MIDPOINT {
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += area * w * l[i] * l[j];
            }
        }
    }
    m
}
