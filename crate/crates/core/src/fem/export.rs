use std::fmt::Write;

use crate::fem::data::FieldPair;
use crate::geometry::mesh::TriangleMesh;

pub fn field_csv(mesh: &TriangleMesh, fields: &FieldPair) -> String {
    let mut s = String::from("node_id,x,y,value_y,value_z\n");
    for (i, p) in mesh.vertices.iter().enumerate() {
        let _ = writeln!(s, "{i},{:e},{:e},{:e},{:e}", p[0], p[1], fields.y[i], fields.z[i]);
    }
    s
}

pub fn report_csv(rows: &[(&str, f64)]) -> String {
    let mut s = String::from("quantity,value\n");
    for (q, v) in rows {
        let _ = writeln!(s, "{q},{v:e}");
    }
    s
}
