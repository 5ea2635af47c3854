//! Lowest-order Raviart-Thomas basis on a single triangle.
//!
//! Degrees of freedom are the (constant) normal components along the three
//! edges, measured against a fixed global edge orientation. With `s_i` the
//! sign relating the global normal of edge `i` to the triangle outward
//! normal, the dual basis is
//!
//! ```text
//! φ_i(x) = s_i |e_i| / (2|T|) (x - p_i),   p_i the opposite vertex,
//! ```
//!
//! so `div φ_i = s_i |e_i| / |T|` and `∫_T φ_i = s_i (|e_i|/2)(x̄ - p_i)`
//! with `x̄` the barycenter. Fields are affine per triangle with continuous
//! normal components across shared edges.

use crate::{Point, Vec2};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Rt0Error {
    #[error("degenerate triangle (area {area:e})")]
    Degenerate { area: f64 },
}

/// Basis descriptors for the three edge dofs of one triangle. Edge slot `i`
/// is the side from vertex `i` to vertex `i+1` (mod 3).
#[derive(Debug, Clone)]
pub struct Rt0Basis {
    pub area: f64,
    /// Divergence of each edge basis function (constant per triangle).
    pub div: [f64; 3],
    /// Integral of each edge basis function over the triangle.
    pub moments: [Vec2; 3],
    /// Evaluation factor `s_i |e_i| / (2|T|)`.
    factors: [f64; 3],
    /// Opposite vertex of each edge.
    opposite: [Point; 3],
}

impl Rt0Basis {
    /// Evaluate the field with the given edge dofs at `x`.
    pub fn eval(&self, dofs: [f64; 3], x: Point) -> Vec2 {
        let mut out = Vec2::zeros();
        for i in 0..3 {
            out += dofs[i] * self.factors[i] * (x - self.opposite[i]);
        }
        out
    }

    /// Divergence of the field with the given edge dofs.
    pub fn divergence(&self, dofs: [f64; 3]) -> f64 {
        dofs[0] * self.div[0] + dofs[1] * self.div[1] + dofs[2] * self.div[2]
    }

    /// Integral over the triangle of the field with the given edge dofs.
    pub fn integral(&self, dofs: [f64; 3]) -> Vec2 {
        dofs[0] * self.moments[0] + dofs[1] * self.moments[1] + dofs[2] * self.moments[2]
    }
}

/// Build the basis for a CCW triangle `p` whose edge slot `i` carries the
/// fixed global unit normal `normals[i]`.
pub fn rt0_local(p: [Point; 3], normals: [Vec2; 3]) -> Result<Rt0Basis, Rt0Error> {
    let area = 0.5
        * ((p[1].x - p[0].x) * (p[2].y - p[0].y) - (p[1].y - p[0].y) * (p[2].x - p[0].x));
    let scale = (p[1] - p[0]).norm().max((p[2] - p[1]).norm()).max((p[0] - p[2]).norm());
    if area <= 1e-14 * scale * scale {
        return Err(Rt0Error::Degenerate { area });
    }
    let barycenter = Point::from((p[0].coords + p[1].coords + p[2].coords) / 3.0);

    let mut div = [0.0; 3];
    let mut moments = [Vec2::zeros(); 3];
    let mut factors = [0.0; 3];
    let mut opposite = [Point::origin(); 3];
    for i in 0..3 {
        let a = p[i];
        let b = p[(i + 1) % 3];
        let opp = p[(i + 2) % 3];
        let edge = b - a;
        let len = edge.norm();
        // Outward normal of the CCW triangle on this side.
        let outward = Vec2::new(edge.y, -edge.x) / len;
        let sign = outward.dot(&normals[i]).signum();
        div[i] = sign * len / area;
        moments[i] = sign * (len / 2.0) * (barycenter - opp);
        factors[i] = sign * len / (2.0 * area);
        opposite[i] = opp;
    }
    Ok(Rt0Basis { area, div, moments, factors, opposite })
}
