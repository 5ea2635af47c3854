//! ASCII mesh file format.
//!
//! ```text
//! JMSH 1
//! # comment
//! VERTICES n
//! id x y          (n lines)
//! CELLS m
//! id cx cy k v0 v1 ... v(k-1)   (m lines, CCW ring)
//! END
//! ```
//!
//! `#` starts a comment, tokens are whitespace-separated, ids are 0-based
//! and dense.

use super::{CellSpec, MeshError, PolygonalMesh};
use crate::Point;

/// Parse the `.jmsh` text format and build the mesh (edges derived,
/// invariants validated).
pub fn load_mesh(text: &str) -> Result<PolygonalMesh, MeshError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let mut next = |what: &str| -> Result<(usize, &str), MeshError> {
        lines.next().ok_or_else(|| MeshError::Parse {
            line: text.lines().count() + 1,
            msg: format!("unexpected end of file, expected {what}"),
        })
    };

    let (line, header) = next("JMSH header")?;
    if header != "JMSH 1" {
        return Err(MeshError::Parse { line, msg: format!("expected 'JMSH 1', found '{header}'") });
    }

    let (line, vh) = next("VERTICES section")?;
    let n: usize = match vh.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["VERTICES", count] => count
            .parse()
            .map_err(|_| MeshError::Parse { line, msg: format!("bad vertex count '{count}'") })?,
        _ => return Err(MeshError::Parse { line, msg: format!("expected 'VERTICES n', found '{vh}'") }),
    };

    let mut vertices: Vec<Option<Point>> = vec![None; n];
    for _ in 0..n {
        let (line, l) = next("vertex line")?;
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(MeshError::Parse { line, msg: format!("expected 'id x y', found '{l}'") });
        }
        let id: usize = parse_tok(toks[0], line, "vertex id")?;
        if id >= n {
            return Err(MeshError::Parse { line, msg: format!("vertex id {id} out of range 0..{n}") });
        }
        if vertices[id].is_some() {
            return Err(MeshError::Parse { line, msg: format!("duplicate vertex id {id}") });
        }
        let x: f64 = parse_tok(toks[1], line, "x coordinate")?;
        let y: f64 = parse_tok(toks[2], line, "y coordinate")?;
        vertices[id] = Some(Point::new(x, y));
    }

    let (line, ch) = next("CELLS section")?;
    let m: usize = match ch.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["CELLS", count] => count
            .parse()
            .map_err(|_| MeshError::Parse { line, msg: format!("bad cell count '{count}'") })?,
        _ => return Err(MeshError::Parse { line, msg: format!("expected 'CELLS m', found '{ch}'") }),
    };

    let mut specs: Vec<Option<CellSpec>> = vec![None; m];
    for _ in 0..m {
        let (line, l) = next("cell line")?;
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() < 4 {
            return Err(MeshError::Parse {
                line,
                msg: format!("expected 'id cx cy k v0 ...', found '{l}'"),
            });
        }
        let id: usize = parse_tok(toks[0], line, "cell id")?;
        if id >= m {
            return Err(MeshError::Parse { line, msg: format!("cell id {id} out of range 0..{m}") });
        }
        if specs[id].is_some() {
            return Err(MeshError::Parse { line, msg: format!("duplicate cell id {id}") });
        }
        let cx: f64 = parse_tok(toks[1], line, "center x")?;
        let cy: f64 = parse_tok(toks[2], line, "center y")?;
        let k: usize = parse_tok(toks[3], line, "ring length")?;
        if toks.len() != 4 + k {
            return Err(MeshError::Parse {
                line,
                msg: format!("ring length {k} does not match {} vertex ids", toks.len() - 4),
            });
        }
        let mut ring = Vec::with_capacity(k);
        for t in &toks[4..] {
            ring.push(parse_tok(t, line, "ring vertex id")?);
        }
        specs[id] = Some(CellSpec { center: Point::new(cx, cy), ring });
    }

    let (line, end) = next("END")?;
    if end != "END" {
        return Err(MeshError::Parse { line, msg: format!("expected 'END', found '{end}'") });
    }

    let vertices: Vec<Point> = vertices.into_iter().map(|v| v.unwrap()).collect();
    let specs: Vec<CellSpec> = specs.into_iter().map(|c| c.unwrap()).collect();
    PolygonalMesh::build(vertices, specs, None)
}

fn parse_tok<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T, MeshError> {
    tok.parse().map_err(|_| MeshError::Parse { line, msg: format!("bad {what} '{tok}'") })
}

/// Serialize a mesh in the `.jmsh` format.
pub fn write_mesh(mesh: &PolygonalMesh) -> String {
    let mut out = String::from("JMSH 1\n");
    out.push_str(&format!("VERTICES {}\n", mesh.vertices().len()));
    for (i, v) in mesh.vertices().iter().enumerate() {
        out.push_str(&format!("{} {:.17e} {:.17e}\n", i, v.x, v.y));
    }
    out.push_str(&format!("CELLS {}\n", mesh.cells().len()));
    for c in mesh.cells() {
        out.push_str(&format!("{} {:.17e} {:.17e} {}", c.id, c.center.x, c.center.y, c.vertices.len()));
        for v in &c.vertices {
            out.push_str(&format!(" {v}"));
        }
        out.push('\n');
    }
    out.push_str("END\n");
    out
}
