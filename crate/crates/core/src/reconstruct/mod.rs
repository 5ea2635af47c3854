//! Per-cell equilibrated stress reconstruction.
//!
//! Each tensor row of the stress lives in the lowest-order Raviart-Thomas
//! space on the fan triangulation of the cell. Boundary normal densities are
//! fixed from the interface tractions (internal edges) and the boundary load
//! (boundary edges); the interior spoke dofs and a piecewise-constant skew
//! multiplier solve the saddle system
//!
//! ```text
//! a(σ, τ) + b(τ, p) = 0   for all τ with zero boundary flux,
//! b(σ, q)           = 0   for all piecewise constants q,
//! ```
//!
//! with `a(σ, τ) = ∫ div σ . div τ` (least squares on `div σ = 0`) and
//! `b(σ, q) = ∫ σ : j(q)`, `j(q) = [[0, q], [-q, 0]]`, which enforces
//! symmetry in the integral sense per triangle. All integrands are constant
//! or affine per triangle, so one-point barycenter quadrature is exact and
//! no quadrature order is exposed.

mod rt0;

pub use rt0::{rt0_local, Rt0Basis, Rt0Error};

use crate::forces::{edge_traction, ForceError, InterfaceForces};
use crate::geometry::{fan_triangulate, CellTriangulation, EdgeKind, MeshError};
use crate::primal::FrictionProblem;
use crate::{Mat2, Point, Vec2};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReconstructError {
    #[error("cell {cell}: {source}")]
    Basis { cell: usize, source: Rt0Error },
    #[error("cell {cell}: ring edge {index} has no traction")]
    MissingTraction { cell: usize, index: usize },
    #[error(
        "cell {cell}: saddle solve failed (residual {residual:e}, condition estimate {condition:e})"
    )]
    NumericalFailure { cell: usize, residual: f64, condition: f64 },
    #[error("point ({x}, {y}) lies outside cell {cell}")]
    PointOutsideCell { cell: usize, x: f64, y: f64 },
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Force(#[from] ForceError),
}

/// Assembled saddle system of one cell: free flux dofs for both tensor rows,
/// then one skew multiplier per triangle. Boundary dofs are eliminated into
/// the right-hand side.
#[derive(Debug, Clone)]
pub struct SaddleSystem {
    pub tri: CellTriangulation,
    /// `[[A, Bᵀ], [B, 0]]` over `2 * #spokes + #triangles` unknowns.
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
    pub n_free: usize,
    pub n_mult: usize,
    /// Fixed dof values, full triangulation-edge indexing (spokes zero).
    pub fixed: [DVector<f64>; 2],
    /// Free column (within one row block) of each spoke edge.
    pub free_edges: Vec<usize>,
    /// Net outward boundary flux per tensor row; nonzero data is
    /// incompatible with a divergence-free field.
    pub incompatibility: Vec2,
    bases: Vec<Rt0Basis>,
}

/// Reconstructed stress field of one cell.
#[derive(Debug, Clone)]
pub struct CellStressField {
    pub cell: usize,
    pub tri: CellTriangulation,
    /// Normal-density dof per tensor row and triangulation edge.
    pub dofs: [DVector<f64>; 2],
    /// Skew multiplier per triangle.
    pub skew: DVector<f64>,
    /// The direct factorization was singular and a minimum-norm
    /// least-squares solve was used instead.
    pub ls_fallback: bool,
    pub solve_residual: f64,
    bases: Vec<Rt0Basis>,
}

fn triangle_bases(tri: &CellTriangulation) -> Result<Vec<Rt0Basis>, Rt0Error> {
    tri.tris
        .iter()
        .map(|t| {
            let p = [tri.points[t.verts[0]], tri.points[t.verts[1]], tri.points[t.verts[2]]];
            let normals = [
                tri.edges[t.edges[0].edge].normal,
                tri.edges[t.edges[1].edge].normal,
                tri.edges[t.edges[2].edge].normal,
            ];
            rt0_local(p, normals)
        })
        .collect()
}

/// Assemble the mixed system of one cell. `tractions[k]` is the imposed
/// traction (`λ` or `g`, force per unit length) on ring sub-edge `k`,
/// oriented along the cell outward normal.
pub fn assemble_cell_system(
    tri: CellTriangulation,
    tractions: &[Vec2],
) -> Result<SaddleSystem, ReconstructError> {
    let cell = tri.cell;
    let nb = tri.boundary_edges.len();
    if tractions.len() != nb {
        return Err(ReconstructError::MissingTraction { cell, index: tractions.len() });
    }
    let bases = triangle_bases(&tri).map_err(|source| ReconstructError::Basis { cell, source })?;

    let ne = tri.edges.len();
    let ns = tri.spokes.len();
    let nt = tri.tris.len();
    let n_free = 2 * ns;
    let n_mult = nt;

    // Fixed boundary dofs: the density along the global edge orientation is
    // the outward-sign times the traction component.
    let mut fixed = [DVector::zeros(ne), DVector::zeros(ne)];
    let mut incompatibility = Vec2::zeros();
    for k in 0..nb {
        let te = tri.boundary_edges[k];
        let sign = tri.tris[k].edges[1].sign;
        for r in 0..2 {
            fixed[r][te] = sign * tractions[k][r];
        }
        incompatibility += tri.edges[te].length * tractions[k];
    }

    // Column of each dof: spokes are free, boundary edges fixed.
    let mut spoke_col = vec![usize::MAX; ne];
    let mut free_edges = Vec::with_capacity(ns);
    for (col, &sp) in tri.spokes.iter().enumerate() {
        spoke_col[sp] = col;
        free_edges.push(sp);
    }

    let dim = n_free + n_mult;
    let mut matrix = DMatrix::zeros(dim, dim);
    let mut rhs = DVector::zeros(dim);

    for (t, basis) in bases.iter().enumerate() {
        let tri_t = &tri.tris[t];
        let area = basis.area;
        for r in 0..2 {
            for i in 0..3 {
                let ei = tri_t.edges[i].edge;
                let row_free = spoke_col[ei] != usize::MAX;
                for j in 0..3 {
                    let ej = tri_t.edges[j].edge;
                    let a_ij = area * basis.div[i] * basis.div[j];
                    if a_ij == 0.0 {
                        continue;
                    }
                    match (row_free, spoke_col[ej] != usize::MAX) {
                        (true, true) => {
                            matrix[(r * ns + spoke_col[ei], r * ns + spoke_col[ej])] += a_ij;
                        }
                        (true, false) => {
                            rhs[r * ns + spoke_col[ei]] -= a_ij * fixed[r][ej];
                        }
                        _ => {}
                    }
                }
            }
        }
        // Weak symmetry row of triangle t: ∫_T (σ12 - σ21) = 0.
        for i in 0..3 {
            let ei = tri_t.edges[i].edge;
            let coeff_row0 = basis.moments[i].y; // σ12 from tensor row 0
            let coeff_row1 = -basis.moments[i].x; // -σ21 from tensor row 1
            if spoke_col[ei] != usize::MAX {
                let col0 = spoke_col[ei];
                matrix[(n_free + t, col0)] += coeff_row0;
                matrix[(col0, n_free + t)] += coeff_row0;
                matrix[(n_free + t, ns + col0)] += coeff_row1;
                matrix[(ns + col0, n_free + t)] += coeff_row1;
            } else {
                rhs[n_free + t] -= coeff_row0 * fixed[0][ei] + coeff_row1 * fixed[1][ei];
            }
        }
    }

    Ok(SaddleSystem {
        tri,
        matrix,
        rhs,
        n_free,
        n_mult,
        fixed,
        free_edges,
        incompatibility,
        bases,
    })
}

/// Solve the saddle system by a direct dense factorization with partial
/// pivoting; fall back to a minimum-norm least-squares solve (and flag the
/// cell) when the factorization is singular.
pub fn solve_cell(sys: &SaddleSystem) -> Result<CellStressField, ReconstructError> {
    let cell = sys.tri.cell;
    let ns = sys.tri.spokes.len();
    let lu = sys.matrix.clone().lu();
    let (solution, ls_fallback) = if lu.is_invertible() {
        (lu.solve(&sys.rhs).expect("invertible LU solves"), false)
    } else {
        let svd = sys.matrix.clone().svd(true, true);
        let smax = sys.svd_scale(&svd);
        let sol = svd
            .solve(&sys.rhs, 1e-12 * smax)
            .map_err(|_| ReconstructError::NumericalFailure {
                cell,
                residual: f64::INFINITY,
                condition: f64::INFINITY,
            })?;
        (sol, true)
    };

    let residual = (&sys.matrix * &solution - &sys.rhs).amax();
    let scale = sys.rhs.amax();
    if residual > 1e-10 * scale.max(1e-300) && residual > 1e-13 {
        let svd = sys.matrix.clone().svd(false, false);
        let smin = sys
            .svd_min(&svd);
        let condition = sys.svd_scale(&svd) / smin.max(f64::MIN_POSITIVE);
        return Err(ReconstructError::NumericalFailure { cell, residual, condition });
    }

    let mut dofs = sys.fixed.clone();
    for (col, &edge) in sys.free_edges.iter().enumerate() {
        dofs[0][edge] = solution[col];
        dofs[1][edge] = solution[ns + col];
    }
    let skew = solution.rows(sys.n_free, sys.n_mult).into_owned();
    Ok(CellStressField {
        cell,
        tri: sys.tri.clone(),
        dofs,
        skew,
        ls_fallback,
        solve_residual: residual,
        bases: sys.bases.clone(),
    })
}

impl SaddleSystem {
    fn svd_scale(&self, svd: &nalgebra::SVD<f64, nalgebra::Dyn, nalgebra::Dyn>) -> f64 {
        svd.singular_values.amax().max(1.0)
    }

    fn svd_min(&self, svd: &nalgebra::SVD<f64, nalgebra::Dyn, nalgebra::Dyn>) -> f64 {
        svd.singular_values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

impl CellStressField {
    fn tri_dofs(&self, r: usize, t: usize) -> [f64; 3] {
        let refs = &self.tri.tris[t].edges;
        [
            self.dofs[r][refs[0].edge],
            self.dofs[r][refs[1].edge],
            self.dofs[r][refs[2].edge],
        ]
    }

    /// Stress tensor of triangle `t` evaluated at `x` (affine per triangle).
    pub fn tensor_at(&self, t: usize, x: Point) -> Mat2 {
        let row0 = self.bases[t].eval(self.tri_dofs(0, t), x);
        let row1 = self.bases[t].eval(self.tri_dofs(1, t), x);
        Mat2::new(row0.x, row0.y, row1.x, row1.y)
    }

    /// Mean tensor of triangle `t` (equals the barycenter value).
    pub fn triangle_tensor(&self, t: usize) -> Mat2 {
        self.tensor_at(t, self.tri.tris[t].barycenter)
    }

    /// Divergence of tensor row `r` on triangle `t`.
    pub fn divergence(&self, r: usize, t: usize) -> f64 {
        self.bases[t].divergence(self.tri_dofs(r, t))
    }

    /// `L²` norm of the divergence over the cell.
    pub fn div_norm(&self) -> f64 {
        let mut acc = 0.0;
        for t in 0..self.tri.tris.len() {
            let d0 = self.divergence(0, t);
            let d1 = self.divergence(1, t);
            acc += self.bases[t].area * (d0 * d0 + d1 * d1);
        }
        acc.sqrt()
    }

    /// `|∫_T (σ12 - σ21)|` of triangle `t`.
    pub fn weak_symmetry_residual(&self, t: usize) -> f64 {
        let i12 = self.bases[t].integral(self.tri_dofs(0, t)).y;
        let i21 = self.bases[t].integral(self.tri_dofs(1, t)).x;
        (i12 - i21).abs()
    }

    /// Re-integrated traction `|e|⁻¹ ∫_e σ n_c` over ring sub-edge `k`,
    /// evaluated from the owning triangle.
    pub fn boundary_traction(&self, k: usize) -> Vec2 {
        let te = self.tri.boundary_edges[k];
        let sign = self.tri.tris[k].edges[1].sign;
        let n_c = self.tri.edges[te].normal * sign;
        let sigma = self.tensor_at(k, self.tri.edges[te].midpoint);
        sigma * n_c
    }
}

/// Evaluate the reconstructed stress at a point inside the cell.
pub fn sample_stress(field: &CellStressField, point: Point) -> Result<Mat2, ReconstructError> {
    let t = field.tri.locate(point).ok_or(ReconstructError::PointOutsideCell {
        cell: field.cell,
        x: point.x,
        y: point.y,
    })?;
    Ok(field.tensor_at(t, point))
}

/// Batch summary of a whole-mesh reconstruction.
#[derive(Debug, Clone, Default)]
pub struct ReconstructionSummary {
    /// Max over cells of the `L²` divergence norm.
    pub max_div_norm: f64,
    /// Max over triangles of `|∫ (σ12 - σ21)| / ((1 + ‖σ‖) |T|)`.
    pub max_weak_symmetry: f64,
    /// Max over ring sub-edges of the re-integrated traction error.
    pub max_flux_error: f64,
    /// Max over cells of the net boundary flux (data incompatibility).
    pub max_incompatibility: f64,
    /// Cells solved with the least-squares fallback.
    pub flagged: Vec<usize>,
    /// Cells whose solve failed, with the error message.
    pub failed: Vec<(usize, String)>,
}

#[derive(Debug, Clone)]
pub struct ReconstructionResult {
    /// Successfully reconstructed fields, ordered by cell id.
    pub fields: Vec<CellStressField>,
    pub summary: ReconstructionSummary,
}

/// Reconstruct the stress field of every cell. Cells are independent; with
/// `threads > 0` the solves run on a bounded worker pool of that size,
/// otherwise on the global pool. Results merge in cell order, so the output
/// is deterministic either way. Per-cell failures are collected, not fatal.
pub fn reconstruct_all(
    problem: &FrictionProblem,
    forces: &InterfaceForces,
    threads: usize,
) -> ReconstructionResult {
    let mesh = problem.mesh();
    let cells: Vec<usize> = mesh.cells().iter().map(|c| c.id).collect();

    let solve_one = |&cell: &usize| -> Result<CellStressField, ReconstructError> {
        let tri = fan_triangulate(mesh, cell)?;
        let mut tractions = Vec::with_capacity(tri.boundary_edges.len());
        for ce in mesh.cell_edges(cell) {
            let edge = mesh.edge(ce.edge);
            let t = match edge.kind {
                EdgeKind::Internal { .. } => {
                    edge_traction(forces.get(ce.edge).unwrap(), edge, cell)?
                }
                EdgeKind::Boundary { .. } => problem.traction(ce.edge).unwrap(),
            };
            tractions.push(t);
        }
        let sys = assemble_cell_system(tri, &tractions)?;
        solve_cell(&sys)
    };

    let outcomes: Vec<(usize, Result<CellStressField, ReconstructError>)> = if threads > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("worker pool");
        pool.install(|| cells.par_iter().map(|c| (*c, solve_one(c))).collect())
    } else {
        cells.par_iter().map(|c| (*c, solve_one(c))).collect()
    };

    let mut summary = ReconstructionSummary::default();
    let mut fields = Vec::with_capacity(cells.len());
    for (cell, outcome) in outcomes {
        match outcome {
            Ok(field) => {
                summary.max_div_norm = summary.max_div_norm.max(field.div_norm());
                for t in 0..field.tri.tris.len() {
                    let area = field.tri.tris[t].area;
                    let norm = field.triangle_tensor(t).norm();
                    let scaled = field.weak_symmetry_residual(t) / ((1.0 + norm) * area);
                    summary.max_weak_symmetry = summary.max_weak_symmetry.max(scaled);
                }
                for (k, ce) in problem.mesh().cell_edges(cell).iter().enumerate() {
                    let edge = problem.mesh().edge(ce.edge);
                    let imposed = match edge.kind {
                        EdgeKind::Internal { .. } => {
                            edge_traction(forces.get(ce.edge).unwrap(), edge, cell).unwrap()
                        }
                        EdgeKind::Boundary { .. } => problem.traction(ce.edge).unwrap(),
                    };
                    let err = (field.boundary_traction(k) - imposed).norm() * edge.length;
                    summary.max_flux_error = summary.max_flux_error.max(err);
                }
                if field.ls_fallback {
                    summary.flagged.push(cell);
                }
                fields.push(field);
            }
            Err(err) => summary.failed.push((cell, err.to_string())),
        }
    }
    summary.max_incompatibility = fields
        .iter()
        .map(|f| {
            // Recompute from the fixed dofs: Σ |e| s dof per row.
            let mut net = Vec2::zeros();
            for k in 0..f.tri.boundary_edges.len() {
                let te = f.tri.boundary_edges[k];
                let sign = f.tri.tris[k].edges[1].sign;
                let len = f.tri.edges[te].length;
                net.x += len * sign * f.dofs[0][te];
                net.y += len * sign * f.dofs[1][te];
            }
            net.norm()
        })
        .fold(0.0, f64::max);
    ReconstructionResult { fields, summary }
}
