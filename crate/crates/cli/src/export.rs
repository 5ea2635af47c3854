//! Artifact writers: forces.csv, stress.vtk, mechanism.csv.
//!
//! All numeric fields print with 17 significant digits so re-parsing
//! recovers the exact f64 values, and all orderings are fixed (edge id,
//! then cell id, then triangle index), so identical runs produce
//! byte-identical files.

use jamstress_core::forces::{edge_traction, InterfaceForces};
use jamstress_core::geometry::PolygonalMesh;
use jamstress_core::reconstruct::CellStressField;
use jamstress_core::Vec2;
use std::fmt::Write;

fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// One row per internal edge, sorted by edge id:
/// `edge_id,c_minus,c_plus,length,nx,ny,fn,ft,lam_minus_x,lam_minus_y`.
pub fn forces_csv(forces: &InterfaceForces, mesh: &PolygonalMesh) -> String {
    let mut out = String::from("edge_id,c_minus,c_plus,length,nx,ny,fn,ft,lam_minus_x,lam_minus_y\n");
    for (edge_id, f) in forces.iter() {
        let edge = mesh.edge(edge_id);
        let (cm, cp) = edge.internal_cells().expect("internal edge");
        let lam = edge_traction(f, edge, cm).expect("adjacent cell");
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            edge_id,
            cm,
            cp,
            fmt17(edge.length),
            fmt17(edge.normal.x),
            fmt17(edge.normal.y),
            fmt17(f.0),
            fmt17(f.1),
            fmt17(lam.x),
            fmt17(lam.y),
        )
        .unwrap();
    }
    out
}

/// Collapse-mode export: `cell_id,ux,uy` of the normalized ray.
pub fn mechanism_csv(displacements: &[Vec2]) -> String {
    let mut out = String::from("cell_id,ux,uy\n");
    for (cell, u) in displacements.iter().enumerate() {
        writeln!(out, "{},{},{}", cell, fmt17(u.x), fmt17(u.y)).unwrap();
    }
    out
}

/// Legacy ASCII VTK unstructured grid of every fan triangle, with tensor
/// components and owning cell id as CELL_DATA at triangle barycenters.
pub fn stress_vtk(fields: &[CellStressField]) -> String {
    let mut points: Vec<(f64, f64)> = Vec::new();
    let mut triangles: Vec<[usize; 3]> = Vec::new();
    let mut sigma = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
    let mut cell_ids: Vec<usize> = Vec::new();

    for field in fields {
        let offset = points.len();
        for p in &field.tri.points {
            points.push((p.x, p.y));
        }
        for (t, tri) in field.tri.tris.iter().enumerate() {
            triangles.push([
                offset + tri.verts[0],
                offset + tri.verts[1],
                offset + tri.verts[2],
            ]);
            let tensor = field.triangle_tensor(t);
            sigma[0].push(tensor[(0, 0)]);
            sigma[1].push(tensor[(0, 1)]);
            sigma[2].push(tensor[(1, 0)]);
            sigma[3].push(tensor[(1, 1)]);
            cell_ids.push(field.cell);
        }
    }

    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\n");
    out.push_str("jamstress reconstructed stress\n");
    out.push_str("ASCII\n");
    out.push_str("DATASET UNSTRUCTURED_GRID\n");
    writeln!(out, "POINTS {} double", points.len()).unwrap();
    for (x, y) in &points {
        writeln!(out, "{} {} 0", fmt17(*x), fmt17(*y)).unwrap();
    }
    writeln!(out, "CELLS {} {}", triangles.len(), 4 * triangles.len()).unwrap();
    for t in &triangles {
        writeln!(out, "3 {} {} {}", t[0], t[1], t[2]).unwrap();
    }
    writeln!(out, "CELL_TYPES {}", triangles.len()).unwrap();
    for _ in &triangles {
        out.push_str("5\n");
    }
    writeln!(out, "CELL_DATA {}", triangles.len()).unwrap();
    for (name, values) in
        ["sigma_11", "sigma_12", "sigma_21", "sigma_22"].iter().zip(sigma.iter())
    {
        writeln!(out, "SCALARS {name} double 1").unwrap();
        out.push_str("LOOKUP_TABLE default\n");
        for v in values {
            writeln!(out, "{}", fmt17(*v)).unwrap();
        }
    }
    out.push_str("SCALARS cell_id int 1\n");
    out.push_str("LOOKUP_TABLE default\n");
    for id in &cell_ids {
        writeln!(out, "{id}").unwrap();
    }
    out
}
