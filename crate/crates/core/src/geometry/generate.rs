//! Mesh generators: structured grids, running-bond brick walls and clipped
//! Voronoi diagrams.

use super::{
    convex_interior_distance, polygon_signed_area, CellSpec, MeshError, PolygonalMesh,
    GEOM_REL_TOL,
};
use crate::Point;
use std::collections::HashMap;

/// Axis-aligned rectangle domain.
#[derive(Debug, Clone, Copy)]
pub struct Rect {
    pub min: Point,
    pub max: Point,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Rect { min: Point::new(x0, y0), max: Point::new(x1, y1) }
    }

    pub const fn unit() -> Self {
        Rect { min: Point::new(0.0, 0.0), max: Point::new(1.0, 1.0) }
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    /// Corners in counter-clockwise order.
    pub fn corners(&self) -> [Point; 4] {
        [
            self.min,
            Point::new(self.max.x, self.min.y),
            self.max,
            Point::new(self.min.x, self.max.y),
        ]
    }
}

/// Structured `nx` x `ny` mesh of rectangular cells with centroid centers.
pub fn generate_grid(nx: usize, ny: usize, domain: Rect) -> Result<PolygonalMesh, MeshError> {
    if nx == 0 || ny == 0 {
        return Err(MeshError::EmptyGenerator);
    }
    let dx = domain.width() / nx as f64;
    let dy = domain.height() / ny as f64;
    let vid = |i: usize, j: usize| j * (nx + 1) + i;

    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push(Point::new(
                domain.min.x + i as f64 * dx,
                domain.min.y + j as f64 * dy,
            ));
        }
    }
    let mut specs = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let ring = vec![vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)];
            let center = Point::new(
                domain.min.x + (i as f64 + 0.5) * dx,
                domain.min.y + (j as f64 + 0.5) * dy,
            );
            specs.push(CellSpec { center, ring });
        }
    }
    PolygonalMesh::build(vertices, specs, Some(domain.area()))
}

/// Running-bond brick wall: even rows hold `cols` full bricks, odd rows are
/// offset by half a brick with half-bricks at both ends. Long horizontal
/// sides are split at every half-brick abscissa, so cell rings contain
/// collinear vertices and every internal edge has exactly two incident cells.
pub fn generate_brick_wall(
    rows: usize,
    cols: usize,
    domain: Rect,
) -> Result<PolygonalMesh, MeshError> {
    if rows == 0 || cols == 0 {
        return Err(MeshError::EmptyGenerator);
    }
    let half = domain.width() / (2 * cols) as f64;
    let dy = domain.height() / rows as f64;
    // Vertex grid: 2*cols + 1 abscissas, rows + 1 levels.
    let vid = |j: usize, r: usize| r * (2 * cols + 1) + j;
    let mut vertices = Vec::with_capacity((2 * cols + 1) * (rows + 1));
    for r in 0..=rows {
        for j in 0..=2 * cols {
            vertices.push(Point::new(
                domain.min.x + j as f64 * half,
                domain.min.y + r as f64 * dy,
            ));
        }
    }

    let mut specs = Vec::new();
    for r in 0..rows {
        // Half-column spans [start, end] of each brick in this row.
        let spans: Vec<(usize, usize)> = if r % 2 == 0 {
            (0..cols).map(|k| (2 * k, 2 * k + 2)).collect()
        } else {
            let mut s = vec![(0usize, 1usize)];
            s.extend((0..cols.saturating_sub(1)).map(|k| (2 * k + 1, 2 * k + 3)));
            s.push((2 * cols - 1, 2 * cols));
            s
        };
        for (j0, j1) in spans {
            let mut ring = Vec::with_capacity(2 * (j1 - j0 + 1));
            for j in j0..=j1 {
                ring.push(vid(j, r));
            }
            for j in (j0..=j1).rev() {
                ring.push(vid(j, r + 1));
            }
            let center = Point::new(
                domain.min.x + (j0 + j1) as f64 * 0.5 * half,
                domain.min.y + (r as f64 + 0.5) * dy,
            );
            specs.push(CellSpec { center, ring });
        }
    }
    PolygonalMesh::build(vertices, specs, Some(domain.area()))
}

/// Clipped Voronoi diagram of `seeds` inside a convex CCW `domain` polygon.
/// Cell `i` keeps seed `i` as its center. Built by clipping the domain
/// against the perpendicular bisector half-plane of every seed pair.
pub fn generate_voronoi(seeds: &[Point], domain: &[Point]) -> Result<PolygonalMesh, MeshError> {
    if seeds.is_empty() {
        return Err(MeshError::EmptyGenerator);
    }
    let domain_area = polygon_signed_area(domain);
    assert!(domain_area > 0.0, "domain polygon must be counter-clockwise");
    let diameter = super::bounding_diameter(domain);

    for (i, s) in seeds.iter().enumerate() {
        if convex_interior_distance(domain, *s) <= 0.0 {
            return Err(MeshError::SeedOutsideDomain { seed: i });
        }
        for (j, t) in seeds.iter().enumerate().skip(i + 1) {
            if (s - t).norm() <= 1e-9 * diameter {
                return Err(MeshError::DuplicateSeeds { a: i, b: j });
            }
        }
    }

    let mut merger = VertexMerger::new(GEOM_REL_TOL * diameter);
    let mut specs = Vec::with_capacity(seeds.len());
    for (i, seed) in seeds.iter().enumerate() {
        let mut poly: Vec<Point> = domain.to_vec();
        for (j, other) in seeds.iter().enumerate() {
            if i == j {
                continue;
            }
            // Keep the side of the bisector closer to `seed`.
            let dir = other - seed;
            let mid = Point::from((seed.coords + other.coords) * 0.5);
            poly = clip_half_plane(&poly, mid, dir);
            if poly.len() < 3 {
                break;
            }
        }
        assert!(poly.len() >= 3, "seed {i} produced an empty Voronoi cell");
        if polygon_signed_area(&poly) < 0.0 {
            poly.reverse();
        }
        let mut ring: Vec<usize> = poly.iter().map(|&p| merger.insert(p)).collect();
        ring.dedup();
        while ring.len() > 1 && ring.first() == ring.last() {
            ring.pop();
        }
        specs.push(CellSpec { center: *seed, ring });
    }

    PolygonalMesh::build(merger.points, specs, Some(domain_area))
}

/// Sutherland-Hodgman clip of a convex polygon against the half-plane
/// `(x - origin) . dir <= 0`.
fn clip_half_plane(poly: &[Point], origin: Point, dir: crate::Vec2) -> Vec<Point> {
    let value = |p: &Point| (p - origin).dot(&dir);
    let mut out = Vec::with_capacity(poly.len() + 1);
    let n = poly.len();
    for i in 0..n {
        let s = poly[i];
        let e = poly[(i + 1) % n];
        let vs = value(&s);
        let ve = value(&e);
        if vs <= 0.0 {
            out.push(s);
        }
        if (vs < 0.0 && ve > 0.0) || (vs > 0.0 && ve < 0.0) {
            let t = vs / (vs - ve);
            out.push(Point::from(s.coords + (e.coords - s.coords) * t));
        }
    }
    out
}

/// Merges coincident points with a hash grid; cell size equals the merge
/// radius so only the 3x3 neighborhood needs to be searched.
struct VertexMerger {
    radius: f64,
    points: Vec<Point>,
    grid: HashMap<(i64, i64), Vec<usize>>,
}

impl VertexMerger {
    fn new(radius: f64) -> Self {
        VertexMerger { radius: radius.max(f64::MIN_POSITIVE), points: Vec::new(), grid: HashMap::new() }
    }

    fn key(&self, p: Point) -> (i64, i64) {
        ((p.x / self.radius).floor() as i64, (p.y / self.radius).floor() as i64)
    }

    fn insert(&mut self, p: Point) -> usize {
        let (kx, ky) = self.key(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(bucket) = self.grid.get(&(kx + dx, ky + dy)) {
                    for &id in bucket {
                        if (self.points[id] - p).norm() <= self.radius {
                            return id;
                        }
                    }
                }
            }
        }
        let id = self.points.len();
        self.points.push(p);
        self.grid.entry((kx, ky)).or_default().push(id);
        id
    }
}
