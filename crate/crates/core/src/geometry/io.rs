//! Text format for obstacle shapes.

use crate::error::{Error, Result};
use crate::geometry::shape::ObstacleShape;

/// One line per coefficient (`k c_k`, 1-based), then `center cx cy` and `mean_radius r`.
pub fn shape_to_text(shape: &ObstacleShape) -> String {
    let mut s = String::new();
    for (k, c) in shape.coefficients.iter().enumerate() {
        s.push_str(&format!("{} {:e}\n", k + 1, c));
    }
    s.push_str(&format!("center {:e} {:e}\n", shape.center[0], shape.center[1]));
    s.push_str(&format!("mean_radius {:e}\n", shape.mean_radius));
    s
}

pub fn shape_from_text(text: &str) -> Result<ObstacleShape> {
    let bad = |m: String| Error::InvalidArgument(format!("shape file: {m}"));
    let mut coeffs: Vec<(usize, f64)> = Vec::new();
    let mut center = None;
    let mut radius = None;
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
        let p: Vec<&str> = line.split_whitespace().collect();
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("bad number '{s}'")));
        match p[0] {
            "center" if p.len() == 3 => center = Some([num(p[1])?, num(p[2])?]),
            "mean_radius" if p.len() == 2 => radius = Some(num(p[1])?),
            k if p.len() == 2 => {
                let k: usize = k.parse().map_err(|_| bad(format!("bad line '{line}'")))?;
                if k == 0 {
                    return Err(bad("coefficient indices start at 1".into()));
                }
                coeffs.push((k, num(p[1])?));
            }
            _ => return Err(bad(format!("bad line '{line}'"))),
        }
    }
    let n = coeffs.iter().map(|c| c.0).max().unwrap_or(0);
    let mut coefficients = vec![0.0; n];
    for (k, c) in coeffs {
        coefficients[k - 1] = c;
    }
    Ok(ObstacleShape {
        center: center.ok_or_else(|| bad("missing center".into()))?,
        mean_radius: radius.ok_or_else(|| bad("missing mean_radius".into()))?,
        coefficients,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_fields_rejected() {
        assert!(shape_from_text("1 0.1\nmean_radius 0.3\n").is_err());
        assert!(shape_from_text("center 0 0\n").is_err());
        assert!(shape_from_text("0 0.1\ncenter 0 0\nmean_radius 0.3").is_err());
    }
}
