//! Fan triangulation of convex cells.
//!
//! Each cell is triangulated by connecting its interior center to every ring
//! sub-edge. Triangulation edges carry a fixed global orientation (from the
//! lower to the higher local point id) so that flux degrees of freedom are
//! assembled consistently across the two triangles sharing a spoke.

use super::{cross2, MeshError, PolygonalMesh, GEOM_REL_TOL};
use crate::{Point, Vec2};
use std::collections::HashMap;

/// Oriented edge of a cell triangulation.
#[derive(Debug, Clone)]
pub struct TriEdge {
    /// Local point ids, `ends.0 < ends.1`.
    pub ends: (usize, usize),
    /// Unit normal of the oriented edge (direction rotated by -pi/2).
    pub normal: Vec2,
    pub length: f64,
    pub midpoint: Point,
}

/// Reference from a triangle to one of its edges.
#[derive(Debug, Clone, Copy)]
pub struct TriEdgeRef {
    pub edge: usize,
    /// +1 when the triangle outward normal on this edge equals the edge
    /// normal, -1 otherwise.
    pub sign: f64,
}

#[derive(Debug, Clone)]
pub struct Triangle {
    /// Local point ids, counter-clockwise; `verts[0]` is the apex.
    pub verts: [usize; 3],
    pub area: f64,
    pub barycenter: Point,
    pub edges: [TriEdgeRef; 3],
}

/// Fan triangulation of one cell.
#[derive(Debug, Clone)]
pub struct CellTriangulation {
    pub cell: usize,
    /// Local points: index 0 is the cell center, 1..=n the ring vertices.
    pub points: Vec<Point>,
    pub tris: Vec<Triangle>,
    pub edges: Vec<TriEdge>,
    /// Triangulation edge of ring sub-edge `k`; its owning triangle is `k`.
    pub boundary_edges: Vec<usize>,
    /// Interior spoke edges (center to ring vertex).
    pub spokes: Vec<usize>,
}

impl CellTriangulation {
    pub fn num_ring_vertices(&self) -> usize {
        self.points.len() - 1
    }

    /// Total triangulated area.
    pub fn area(&self) -> f64 {
        self.tris.iter().map(|t| t.area).sum()
    }

    /// Locate the fan triangle containing `p` by binary search on the angle
    /// around the apex. Returns `None` when `p` is outside the cell.
    pub fn locate(&self, p: Point) -> Option<usize> {
        let apex = self.points[0];
        let n = self.num_ring_vertices();
        let base = self.points[1] - apex;
        let angle = |v: Vec2| {
            let a = cross2(base, v).atan2(base.dot(&v));
            if a < 0.0 {
                a + std::f64::consts::TAU
            } else {
                a
            }
        };
        let d = p - apex;
        if d.norm() == 0.0 {
            return Some(0);
        }
        let target = angle(d);
        // Ring vertex angles are strictly increasing for a convex cell with
        // an interior apex; vertex 1 has angle 0.
        let (mut lo, mut hi) = (0usize, n);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if angle(self.points[mid + 1] - apex) <= target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let tri = &self.tris[lo];
        let [a, b, c] = tri.verts;
        let (pa, pb, pc) = (self.points[a], self.points[b], self.points[c]);
        let tol = -1e-12 * tri.area;
        let inside = cross2(pb - pa, p - pa) >= tol
            && cross2(pc - pb, p - pb) >= tol
            && cross2(pa - pc, p - pc) >= tol;
        inside.then_some(lo)
    }
}

/// Triangulate `cell` with its center as the fan apex: one triangle per ring
/// sub-edge, all counter-clockwise.
pub fn fan_triangulate(mesh: &PolygonalMesh, cell: usize) -> Result<CellTriangulation, MeshError> {
    let c = mesh.cell(cell);
    let ring = mesh.cell_polygon(cell);
    let n = ring.len();
    let mut points = Vec::with_capacity(n + 1);
    points.push(c.center);
    points.extend(ring.iter().copied());

    let mut edges: Vec<TriEdge> = Vec::with_capacity(2 * n);
    let mut by_ends: HashMap<(usize, usize), usize> = HashMap::new();

    let mut tris = Vec::with_capacity(n);
    let mut boundary_edges = Vec::with_capacity(n);
    for k in 0..n {
        let i = k + 1;
        let j = (k + 1) % n + 1;
        let (pi, pj) = (points[i], points[j]);
        let area = 0.5 * cross2(pi - c.center, pj - c.center);
        if area <= GEOM_REL_TOL * c.area {
            return Err(MeshError::DegenerateTriangle { cell, tri: k });
        }
        let verts = [0, i, j];
        let barycenter =
            Point::from((points[0].coords + pi.coords + pj.coords) / 3.0);
        let mut refs = [TriEdgeRef { edge: 0, sign: 0.0 }; 3];
        for (slot, (a, b)) in [(0, i), (i, j), (j, 0)].iter().enumerate() {
            let e = intern_edge(&points, &mut edges, &mut by_ends, *a, *b);
            // Outward normal of the CCW triangle on side (a -> b).
            let d = points[*b] - points[*a];
            let outward = Vec2::new(d.y, -d.x).normalize();
            let sign = outward.dot(&edges[e].normal).signum();
            refs[slot] = TriEdgeRef { edge: e, sign };
        }
        boundary_edges.push(refs[1].edge);
        tris.push(Triangle { verts, area, barycenter, edges: refs });
    }

    let spokes: Vec<usize> =
        edges.iter().enumerate().filter(|(_, e)| e.ends.0 == 0).map(|(i, _)| i).collect();

    Ok(CellTriangulation { cell, points, tris, edges, boundary_edges, spokes })
}

fn intern_edge(
    points: &[Point],
    edges: &mut Vec<TriEdge>,
    by_ends: &mut HashMap<(usize, usize), usize>,
    a: usize,
    b: usize,
) -> usize {
    let key = (a.min(b), a.max(b));
    if let Some(&idx) = by_ends.get(&key) {
        return idx;
    }
    let (lo, hi) = key;
    let dir = points[hi] - points[lo];
    let length = dir.norm();
    let unit = dir / length;
    let idx = edges.len();
    edges.push(TriEdge {
        ends: key,
        normal: Vec2::new(unit.y, -unit.x),
        length,
        midpoint: Point::from((points[lo].coords + points[hi].coords) * 0.5),
    });
    by_ends.insert(key, idx);
    idx
}
