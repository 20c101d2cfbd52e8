//! Mesh import: ASCII STL and a plain-text vertex/face list.
//!
//! The vertex/face list uses one record per line:
//!
//! ```text
//! # comment
//! v <x> <y> <z>
//! f <i> <j> <k>      (1-based vertex indices)
//! ```

use std::collections::HashMap;
use std::path::Path;

use crate::error::{Result, SimError};
use crate::rcs::mesh::TriangleMesh;
use crate::scene::Vec3;

fn parse_f64(tok: Option<&str>, line: usize) -> Result<f64> {
    tok.ok_or_else(|| SimError::MeshParse { line, message: "missing coordinate".into() })?
        .parse()
        .map_err(|e| SimError::MeshParse { line, message: format!("{e}") })
}

pub fn parse_vertex_list(text: &str) -> Result<TriangleMesh> {
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let mut tok = raw.split_whitespace();
        match tok.next() {
            None => continue,
            Some(t) if t.starts_with('#') => continue,
            Some("v") => {
                let x = parse_f64(tok.next(), line)?;
                let y = parse_f64(tok.next(), line)?;
                let z = parse_f64(tok.next(), line)?;
                vertices.push(Vec3::new(x, y, z));
            }
            Some("f") => {
                let mut idx = [0usize; 3];
                for slot in idx.iter_mut() {
                    let v: usize = tok
                        .next()
                        .and_then(|s| s.split('/').next())
                        .ok_or_else(|| SimError::MeshParse { line, message: "missing index".into() })?
                        .parse()
                        .map_err(|e| SimError::MeshParse { line, message: format!("{e}") })?;
                    if v == 0 {
                        return Err(SimError::MeshParse { line, message: "indices are 1-based".into() });
                    }
                    *slot = v - 1;
                }
                triangles.push(idx);
            }
            Some(other) => {
                return Err(SimError::MeshParse { line, message: format!("unknown record `{other}`") })
            }
        }
    }
    TriangleMesh::new(vertices, triangles)
}

/// ASCII STL; coincident vertices are welded so edge connectivity is preserved.
pub fn parse_ascii_stl(text: &str) -> Result<TriangleMesh> {
    let mut vertices: Vec<Vec3> = Vec::new();
    let mut lookup: HashMap<[u64; 3], usize> = HashMap::new();
    let mut triangles = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let mut tok = raw.split_whitespace();
        match tok.next() {
            Some("vertex") => {
                let p = Vec3::new(
                    parse_f64(tok.next(), line)?,
                    parse_f64(tok.next(), line)?,
                    parse_f64(tok.next(), line)?,
                );
                let key = [p.x.to_bits(), p.y.to_bits(), p.z.to_bits()];
                let idx = *lookup.entry(key).or_insert_with(|| {
                    vertices.push(p);
                    vertices.len() - 1
                });
                current.push(idx);
            }
            Some("endloop") => {
                if current.len() != 3 {
                    return Err(SimError::MeshParse {
                        line,
                        message: format!("facet has {} vertices, expected 3", current.len()),
                    });
                }
                triangles.push([current[0], current[1], current[2]]);
                current.clear();
            }
            _ => {}
        }
    }
    TriangleMesh::new(vertices, triangles)
}

/// Loads `.stl` as ASCII STL and anything else as a vertex/face list.
pub fn load_mesh(path: &Path) -> Result<TriangleMesh> {
    let text = std::fs::read_to_string(path)?;
    let is_stl = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("stl"));
    if is_stl {
        parse_ascii_stl(&text)
    } else {
        parse_vertex_list(&text)
    }
}
