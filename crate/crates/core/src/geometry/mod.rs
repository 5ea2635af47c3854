//! Polygonal meshes of convex cells with derived edge topology.
//!
//! A mesh is a collection of convex polygonal cells tiling a domain. Every
//! cell stores a reference center strictly inside its polygon (the seed for
//! Voronoi meshes, the centroid otherwise). Edges are derived from the cell
//! rings: an edge shared by two cells is internal, an edge with a single
//! incident cell is a boundary edge. Edge ids are deterministic — they depend
//! only on the endpoint vertex ids, never on cell enumeration order.

mod generate;
mod jmsh;
mod triangulate;

pub use generate::{generate_brick_wall, generate_grid, generate_voronoi, Rect};
pub use jmsh::{load_mesh, write_mesh};
pub use triangulate::{fan_triangulate, CellTriangulation, TriEdge, TriEdgeRef, Triangle};

use crate::{Point, Vec2};
use std::collections::BTreeMap;
use thiserror::Error;

/// Relative tolerance for vertex coincidence and area positivity.
pub const GEOM_REL_TOL: f64 = 1e-12;
/// Relative tolerance for the cells-tile-the-domain check.
pub const TILE_REL_TOL: f64 = 1e-9;

/// Rotation by +pi/2: the tangent of an edge is `rot90` of its normal.
#[inline]
pub fn rot90(v: Vec2) -> Vec2 {
    Vec2::new(-v.y, v.x)
}

#[inline]
pub(crate) fn cross2(a: Vec2, b: Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Signed area of a polygon ring (positive when counter-clockwise).
pub fn polygon_signed_area(points: &[Point]) -> f64 {
    let n = points.len();
    let mut acc = 0.0;
    for i in 0..n {
        let a = points[i];
        let b = points[(i + 1) % n];
        acc += a.x * b.y - b.x * a.y;
    }
    0.5 * acc
}

/// Area centroid of a simple polygon ring.
pub fn polygon_centroid(points: &[Point]) -> Point {
    let n = points.len();
    let area = polygon_signed_area(points);
    let mut cx = 0.0;
    let mut cy = 0.0;
    for i in 0..n {
        let a = points[i];
        let b = points[(i + 1) % n];
        let w = a.x * b.y - b.x * a.y;
        cx += (a.x + b.x) * w;
        cy += (a.y + b.y) * w;
    }
    Point::new(cx / (6.0 * area), cy / (6.0 * area))
}

/// Signed distance of a point to the boundary of a convex CCW polygon
/// (positive inside).
pub fn convex_interior_distance(points: &[Point], p: Point) -> f64 {
    let n = points.len();
    let mut best = f64::INFINITY;
    for i in 0..n {
        let a = points[i];
        let b = points[(i + 1) % n];
        let d = b - a;
        let len = d.norm();
        if len == 0.0 {
            continue;
        }
        best = best.min(cross2(d, p - a) / len);
    }
    best
}

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("cell {cell}: cell orientation is clockwise (rings must be counter-clockwise)")]
    CellOrientation { cell: usize },
    #[error("cell {cell}: ring is non-convex at vertex {vertex}")]
    NonConvex { cell: usize, vertex: usize },
    #[error("cell {cell}: ring has fewer than 3 vertices")]
    OpenRing { cell: usize },
    #[error("cell {cell}: vertex id {vertex} out of range")]
    VertexOutOfRange { cell: usize, vertex: usize },
    #[error("cell {cell}: vertex {vertex} repeats in the ring")]
    RepeatedVertex { cell: usize, vertex: usize },
    #[error("edge ({a}, {b}) is shared by more than two cells")]
    EdgeSharedByMoreThanTwo { a: usize, b: usize },
    #[error("edge ({a}, {b}): incident cells traverse it in the same direction")]
    InconsistentOrientation { a: usize, b: usize },
    #[error("cell {cell}: center lies on or outside the cell boundary")]
    CenterNotInterior { cell: usize },
    #[error("cell areas sum to {total} but the domain area is {domain}")]
    AreaMismatch { total: f64, domain: f64 },
    #[error("seeds {a} and {b} coincide")]
    DuplicateSeeds { a: usize, b: usize },
    #[error("seed {seed} lies outside the domain")]
    SeedOutsideDomain { seed: usize },
    #[error("generator counts must be at least 1")]
    EmptyGenerator,
    #[error("cell {cell}: fan triangle {tri} is degenerate")]
    DegenerateTriangle { cell: usize, tri: usize },
    #[error("edge {edge} normals disagree with the incident cell rings")]
    NormalMismatch { edge: usize },
}

/// Convex cell of the mesh.
#[derive(Debug, Clone)]
pub struct Cell {
    pub id: usize,
    /// Vertex ids, counter-clockwise.
    pub vertices: Vec<usize>,
    /// Reference center, strictly inside the polygon.
    pub center: Point,
    pub area: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    /// Shared by two cells; the normal points from `c_minus` towards `c_plus`.
    Internal { c_minus: usize, c_plus: usize },
    /// Owned by a single cell; the normal is its outward normal.
    Boundary { cell: usize },
}

/// Mesh edge with orientation data.
#[derive(Debug, Clone)]
pub struct Edge {
    pub id: usize,
    /// Endpoint vertex ids, `vertices.0 < vertices.1`.
    pub vertices: (usize, usize),
    pub length: f64,
    pub midpoint: Point,
    /// Unit normal. Internal: from `c_minus` to `c_plus`; boundary: outward.
    pub normal: Vec2,
    /// Unit tangent, the normal rotated by +pi/2.
    pub tangent: Vec2,
    pub kind: EdgeKind,
}

impl Edge {
    pub fn is_internal(&self) -> bool {
        matches!(self.kind, EdgeKind::Internal { .. })
    }

    /// The two adjacent cells of an internal edge, `(c_minus, c_plus)`.
    pub fn internal_cells(&self) -> Option<(usize, usize)> {
        match self.kind {
            EdgeKind::Internal { c_minus, c_plus } => Some((c_minus, c_plus)),
            EdgeKind::Boundary { .. } => None,
        }
    }

    /// Sign of the outward normal of `cell` relative to the edge normal:
    /// +1 for `c_minus` (or a boundary owner), -1 for `c_plus`.
    pub fn outward_sign(&self, cell: usize) -> Option<f64> {
        match self.kind {
            EdgeKind::Internal { c_minus, .. } if cell == c_minus => Some(1.0),
            EdgeKind::Internal { c_plus, .. } if cell == c_plus => Some(-1.0),
            EdgeKind::Boundary { cell: owner } if cell == owner => Some(1.0),
            _ => None,
        }
    }
}

/// Edge incidence of one cell, in ring order.
#[derive(Debug, Clone, Copy)]
pub struct CellEdge {
    pub edge: usize,
    /// +1 when the cell outward normal equals the edge normal, -1 otherwise.
    pub sign: f64,
}

/// Cell ring description used to build a mesh.
#[derive(Debug, Clone)]
pub struct CellSpec {
    pub center: Point,
    pub ring: Vec<usize>,
}

/// Polygonal mesh with derived edges. Immutable after construction.
#[derive(Debug, Clone)]
pub struct PolygonalMesh {
    vertices: Vec<Point>,
    cells: Vec<Cell>,
    edges: Vec<Edge>,
    cell_edges: Vec<Vec<CellEdge>>,
    internal: Vec<usize>,
    boundary: Vec<usize>,
    domain_area: Option<f64>,
    diameter: f64,
}

impl PolygonalMesh {
    /// Build a mesh from vertices and cell rings: validates the cells,
    /// derives the edge set and checks the orientation invariants.
    pub fn build(
        vertices: Vec<Point>,
        specs: Vec<CellSpec>,
        domain_area: Option<f64>,
    ) -> Result<Self, MeshError> {
        let diameter = bounding_diameter(&vertices);
        let scale2 = (diameter * diameter).max(f64::MIN_POSITIVE);

        let mut cells = Vec::with_capacity(specs.len());
        for (id, spec) in specs.iter().enumerate() {
            let ring = &spec.ring;
            if ring.len() < 3 {
                return Err(MeshError::OpenRing { cell: id });
            }
            for &v in ring {
                if v >= vertices.len() {
                    return Err(MeshError::VertexOutOfRange { cell: id, vertex: v });
                }
            }
            let mut sorted = ring.clone();
            sorted.sort_unstable();
            for w in sorted.windows(2) {
                if w[0] == w[1] {
                    return Err(MeshError::RepeatedVertex { cell: id, vertex: w[0] });
                }
            }
            let pts: Vec<Point> = ring.iter().map(|&v| vertices[v]).collect();
            let area = polygon_signed_area(&pts);
            if area <= 0.0 {
                return Err(MeshError::CellOrientation { cell: id });
            }
            let n = pts.len();
            for i in 0..n {
                let prev = pts[(i + n - 1) % n];
                let cur = pts[i];
                let next = pts[(i + 1) % n];
                if cross2(cur - prev, next - cur) < -GEOM_REL_TOL * scale2 {
                    return Err(MeshError::NonConvex { cell: id, vertex: ring[i] });
                }
            }
            let cell_diam = polygon_diameter(&pts);
            if convex_interior_distance(&pts, spec.center) <= GEOM_REL_TOL * cell_diam {
                return Err(MeshError::CenterNotInterior { cell: id });
            }
            cells.push(Cell {
                id,
                vertices: ring.clone(),
                center: spec.center,
                area,
            });
        }

        if let Some(domain) = domain_area {
            let total: f64 = cells.iter().map(|c| c.area).sum();
            if (total - domain).abs() > TILE_REL_TOL * domain.abs().max(1.0) {
                return Err(MeshError::AreaMismatch { total, domain });
            }
        }

        let (edges, cell_edges) = derive_edges(&vertices, &cells)?;
        let internal: Vec<usize> = edges.iter().filter(|e| e.is_internal()).map(|e| e.id).collect();
        let boundary: Vec<usize> = edges.iter().filter(|e| !e.is_internal()).map(|e| e.id).collect();

        Ok(PolygonalMesh {
            vertices,
            cells,
            edges,
            cell_edges,
            internal,
            boundary,
            domain_area,
            diameter,
        })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell(&self, id: usize) -> &Cell {
        &self.cells[id]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> &Edge {
        &self.edges[id]
    }

    /// Ids of internal edges, ascending.
    pub fn internal_edges(&self) -> &[usize] {
        &self.internal
    }

    /// Ids of boundary edges, ascending.
    pub fn boundary_edges(&self) -> &[usize] {
        &self.boundary
    }

    /// Edge incidences of a cell, in ring order: entry `k` is the edge from
    /// ring vertex `k` to ring vertex `k+1`.
    pub fn cell_edges(&self, cell: usize) -> &[CellEdge] {
        &self.cell_edges[cell]
    }

    /// Ring coordinates of a cell.
    pub fn cell_polygon(&self, cell: usize) -> Vec<Point> {
        self.cells[cell].vertices.iter().map(|&v| self.vertices[v]).collect()
    }

    /// Bounding-box diagonal of the vertex set.
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn domain_area(&self) -> Option<f64> {
        self.domain_area
    }
}

fn bounding_diameter(points: &[Point]) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let mut lo = points[0];
    let mut hi = points[0];
    for p in points {
        lo.x = lo.x.min(p.x);
        lo.y = lo.y.min(p.y);
        hi.x = hi.x.max(p.x);
        hi.y = hi.y.max(p.y);
    }
    (hi - lo).norm()
}

fn polygon_diameter(points: &[Point]) -> f64 {
    bounding_diameter(points)
}

struct Incidence {
    cell: usize,
    ring_pos: usize,
    /// +1 when the ring traverses the edge from the smaller to the larger
    /// vertex id.
    dir: f64,
}

/// Derive the edge set from the cell rings. Edge ids are assigned in
/// ascending `(min vertex id, max vertex id)` order, so they are independent
/// of cell enumeration order.
fn derive_edges(
    vertices: &[Point],
    cells: &[Cell],
) -> Result<(Vec<Edge>, Vec<Vec<CellEdge>>), MeshError> {
    let mut by_key: BTreeMap<(usize, usize), Vec<Incidence>> = BTreeMap::new();
    for cell in cells {
        let n = cell.vertices.len();
        for i in 0..n {
            let a = cell.vertices[i];
            let b = cell.vertices[(i + 1) % n];
            let key = (a.min(b), a.max(b));
            by_key.entry(key).or_default().push(Incidence {
                cell: cell.id,
                ring_pos: i,
                dir: if a < b { 1.0 } else { -1.0 },
            });
        }
    }

    let mut edges = Vec::with_capacity(by_key.len());
    let mut cell_edges: Vec<Vec<CellEdge>> =
        cells.iter().map(|c| vec![CellEdge { edge: 0, sign: 0.0 }; c.vertices.len()]).collect();

    for (id, (&(a, b), incidences)) in by_key.iter().enumerate() {
        if incidences.len() > 2 {
            return Err(MeshError::EdgeSharedByMoreThanTwo { a, b });
        }
        let pa = vertices[a];
        let pb = vertices[b];
        let chord = pb - pa;
        let length = chord.norm();
        let unit = chord / length;
        // Right normal of the (a -> b) direction.
        let base_normal = Vec2::new(unit.y, -unit.x);
        let midpoint = Point::from((pa.coords + pb.coords) * 0.5);

        let (normal, kind) = match incidences.as_slice() {
            [one] => {
                // Boundary: outward normal of the owner, i.e. the right
                // normal of the ring traversal direction.
                (base_normal * one.dir, EdgeKind::Boundary { cell: one.cell })
            }
            [first, second] => {
                if first.dir == second.dir {
                    return Err(MeshError::InconsistentOrientation { a, b });
                }
                let (c_minus, c_plus) = if first.cell < second.cell {
                    (first.cell, second.cell)
                } else {
                    (second.cell, first.cell)
                };
                let across = cells[c_plus].center - cells[c_minus].center;
                let side = base_normal.dot(&across);
                if side == 0.0 {
                    return Err(MeshError::NormalMismatch { edge: id });
                }
                (base_normal * side.signum(), EdgeKind::Internal { c_minus, c_plus })
            }
            _ => unreachable!("empty incidence list"),
        };

        // The ring-derived outward normal of every incident cell must agree
        // with the stored normal up to sign.
        for inc in incidences {
            let outward = base_normal * inc.dir;
            let expected = match kind {
                EdgeKind::Boundary { .. } => normal,
                EdgeKind::Internal { c_minus, .. } => {
                    if inc.cell == c_minus {
                        normal
                    } else {
                        -normal
                    }
                }
            };
            if (outward - expected).norm() > 1e-12 {
                return Err(MeshError::NormalMismatch { edge: id });
            }
            cell_edges[inc.cell][inc.ring_pos] = CellEdge {
                edge: id,
                sign: outward.dot(&normal).signum(),
            };
        }

        edges.push(Edge {
            id,
            vertices: (a, b),
            length,
            midpoint,
            normal,
            tangent: rot90(normal),
            kind,
        });
    }

    Ok((edges, cell_edges))
}
