//! Friction equilibrium energies and their linear-program form.
//!
//! A [`FrictionProblem`] couples a mesh with a Tresca coefficient and one
//! traction vector per boundary edge. The equilibrium displacement minimizes
//! the friction dissipation minus the work of the boundary tractions,
//! subject to non-interpenetration across internal edges and a zero-mean
//! constraint removing the translation invariance. [`assemble_lp`] rewrites
//! that minimization as a standard-form linear program by bounding each
//! tangential slip magnitude with an auxiliary variable.

use crate::geometry::{Edge, PolygonalMesh};
use crate::lp::{LpStandardForm, RowKind, SparseMatrix, VarKind};
use crate::{Mat2, Vec2};
use nalgebra::DVector;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PrimalError {
    #[error("edge {edge} is a boundary edge; jumps are defined on internal edges")]
    BoundaryEdge { edge: usize },
    #[error("boundary edge {edge} has no traction entry")]
    MissingTraction { edge: usize },
    #[error("traction given for edge {edge}, which is not a boundary edge")]
    NotBoundary { edge: usize },
    #[error("Tresca coefficient must be positive, got {0}")]
    NonPositiveTresca(f64),
    #[error("displacement vector has {got} entries for {cells} cells")]
    WrongDisplacementCount { got: usize, cells: usize },
}

/// Relative threshold under which the boundary load is reported balanced.
pub const BALANCE_REL_TOL: f64 = 1e-9;

/// Mesh + Tresca coefficient + boundary tractions.
#[derive(Debug, Clone)]
pub struct FrictionProblem {
    mesh: PolygonalMesh,
    tresca: f64,
    /// Per edge id; `Some` exactly for boundary edges.
    tractions: Vec<Option<Vec2>>,
    resultant: Vec2,
    balanced: bool,
}

impl FrictionProblem {
    /// Build a problem from explicit per-boundary-edge tractions
    /// (`(edge id, g_e)` pairs, force per unit length).
    pub fn new(
        mesh: PolygonalMesh,
        tresca: f64,
        entries: impl IntoIterator<Item = (usize, Vec2)>,
    ) -> Result<Self, PrimalError> {
        if !(tresca > 0.0) {
            return Err(PrimalError::NonPositiveTresca(tresca));
        }
        let mut tractions: Vec<Option<Vec2>> = vec![None; mesh.edges().len()];
        for (edge, g) in entries {
            if mesh.edge(edge).is_internal() {
                return Err(PrimalError::NotBoundary { edge });
            }
            tractions[edge] = Some(g);
        }
        for &e in mesh.boundary_edges() {
            if tractions[e].is_none() {
                return Err(PrimalError::MissingTraction { edge: e });
            }
        }
        // Resultant of the boundary load; a nonzero value flags an
        // unbalanced problem (it resurfaces as the equality multiplier).
        let mut resultant = Vec2::zeros();
        let mut magnitude = 0.0;
        for &e in mesh.boundary_edges() {
            let edge = mesh.edge(e);
            let g = tractions[e].unwrap();
            resultant += edge.length * g;
            magnitude += edge.length * g.norm();
        }
        let balanced = resultant.norm() <= BALANCE_REL_TOL * magnitude;
        Ok(FrictionProblem { mesh, tresca, tractions, resultant, balanced })
    }

    /// Apply a uniform boundary stress: `g_e = S n_e` on every boundary edge.
    pub fn with_boundary_stress(
        mesh: PolygonalMesh,
        tresca: f64,
        stress: Mat2,
    ) -> Result<Self, PrimalError> {
        let entries: Vec<(usize, Vec2)> = mesh
            .boundary_edges()
            .iter()
            .map(|&e| (e, stress * mesh.edge(e).normal))
            .collect();
        Self::new(mesh, tresca, entries)
    }

    pub fn mesh(&self) -> &PolygonalMesh {
        &self.mesh
    }

    pub fn tresca(&self) -> f64 {
        self.tresca
    }

    /// Traction of a boundary edge.
    pub fn traction(&self, edge: usize) -> Option<Vec2> {
        self.tractions[edge]
    }

    /// `Σ |e| g_e` over the boundary.
    pub fn resultant(&self) -> Vec2 {
        self.resultant
    }

    pub fn is_balanced(&self) -> bool {
        self.balanced
    }

    fn check_u(&self, u: &[Vec2]) -> Result<(), PrimalError> {
        if u.len() != self.mesh.cells().len() {
            return Err(PrimalError::WrongDisplacementCount {
                got: u.len(),
                cells: self.mesh.cells().len(),
            });
        }
        Ok(())
    }
}

/// Jump `u[c_plus] - u[c_minus]` of per-cell values across an internal edge.
pub fn jump(u: &[Vec2], edge: &Edge) -> Result<Vec2, PrimalError> {
    let (c_minus, c_plus) =
        edge.internal_cells().ok_or(PrimalError::BoundaryEdge { edge: edge.id })?;
    Ok(u[c_plus] - u[c_minus])
}

/// Work of the boundary tractions: `Σ |e| g_e . u_c` over boundary edges,
/// where `c` is the owning cell (facet values use the cell displacement).
pub fn external_work(u: &[Vec2], problem: &FrictionProblem) -> Result<f64, PrimalError> {
    problem.check_u(u)?;
    let mesh = problem.mesh();
    let mut acc = 0.0;
    for &e in mesh.boundary_edges() {
        let edge = mesh.edge(e);
        let crate::geometry::EdgeKind::Boundary { cell } = edge.kind else { unreachable!() };
        acc += edge.length * problem.traction(e).unwrap().dot(&u[cell]);
    }
    Ok(acc)
}

/// Total energy: Tresca dissipation over internal edges minus external work.
/// Convex and positively homogeneous of degree one in `u`.
pub fn primal_energy(u: &[Vec2], problem: &FrictionProblem) -> Result<f64, PrimalError> {
    problem.check_u(u)?;
    let mesh = problem.mesh();
    let mut dissipation = 0.0;
    for &e in mesh.internal_edges() {
        let edge = mesh.edge(e);
        let j = jump(u, edge)?;
        dissipation += problem.tresca() * edge.length * j.dot(&edge.tangent).abs();
    }
    Ok(dissipation - external_work(u, problem)?)
}

/// Rewrite the constrained minimization as a standard-form linear program.
///
/// Variables: `u` components per cell, then one slip bound `v_e` per
/// internal edge. Inequality rows per internal edge, in order:
/// `-[u].n <= 0`, `[u].t - v <= 0`, `-[u].t - v <= 0`. Two equality rows
/// impose the zero-mean constraint. All right-hand sides are zero.
pub fn assemble_lp(problem: &FrictionProblem) -> Result<LpStandardForm, PrimalError> {
    let mesh = problem.mesh();
    for &e in mesh.boundary_edges() {
        if problem.traction(e).is_none() {
            return Err(PrimalError::MissingTraction { edge: e });
        }
    }
    let ncells = mesh.cells().len();
    let internal = mesh.internal_edges();
    let n = 2 * ncells + internal.len();

    let mut vars = Vec::with_capacity(n);
    for cell in 0..ncells {
        vars.push(VarKind::CellDisplacement { cell, component: 0 });
        vars.push(VarKind::CellDisplacement { cell, component: 1 });
    }
    vars.extend(internal.iter().map(|&edge| VarKind::SlipBound { edge }));

    let mut c = DVector::zeros(n);
    for (k, &e) in internal.iter().enumerate() {
        c[2 * ncells + k] = problem.tresca() * mesh.edge(e).length;
    }
    for &e in mesh.boundary_edges() {
        let edge = mesh.edge(e);
        let crate::geometry::EdgeKind::Boundary { cell } = edge.kind else { unreachable!() };
        let g = problem.traction(e).unwrap();
        c[2 * cell] -= edge.length * g.x;
        c[2 * cell + 1] -= edge.length * g.y;
    }

    let mut g_mat = SparseMatrix::new(n);
    let mut row_kinds = Vec::with_capacity(3 * internal.len());
    for (k, &e) in internal.iter().enumerate() {
        let edge = mesh.edge(e);
        let (cm, cp) = edge.internal_cells().unwrap();
        let nrm = edge.normal;
        let tng = edge.tangent;
        let v = 2 * ncells + k;
        // -[u].n <= 0
        g_mat.push_row(vec![
            (2 * cm, nrm.x),
            (2 * cm + 1, nrm.y),
            (2 * cp, -nrm.x),
            (2 * cp + 1, -nrm.y),
        ]);
        row_kinds.push(RowKind::NonPenetration { edge: e });
        // [u].t - v <= 0
        g_mat.push_row(vec![
            (2 * cm, -tng.x),
            (2 * cm + 1, -tng.y),
            (2 * cp, tng.x),
            (2 * cp + 1, tng.y),
            (v, -1.0),
        ]);
        row_kinds.push(RowKind::SlipPlus { edge: e });
        // -[u].t - v <= 0
        g_mat.push_row(vec![
            (2 * cm, tng.x),
            (2 * cm + 1, tng.y),
            (2 * cp, -tng.x),
            (2 * cp + 1, -tng.y),
            (v, -1.0),
        ]);
        row_kinds.push(RowKind::SlipMinus { edge: e });
    }

    let mut a_mat = SparseMatrix::new(n);
    for comp in 0..2 {
        a_mat.push_row((0..ncells).map(|cell| (2 * cell + comp, 1.0)).collect());
    }

    Ok(LpStandardForm {
        c,
        h: DVector::zeros(g_mat.nrows()),
        g: g_mat,
        b: DVector::zeros(2),
        a: a_mat,
        vars,
        row_kinds,
    })
}
