//! Linear programs in the form `min c.x  s.t.  G x <= h, A x = b` with free
//! variables, solved to optimality with both primal and dual solutions.
//!
//! The dual problem is `max -h.z - b.y  s.t.  Gᵀz + Aᵀy + c = 0, z >= 0`;
//! the inequality duals `z` are the physical interface forces of the
//! friction program.

mod solver;

pub use solver::{solve_lp, solve_with, SolverOptions};

use crate::Vec2;
use nalgebra::DVector;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LpError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("tolerance {0:e} outside [1e-12, 1e-4]")]
    InvalidTolerance(f64),
    #[error("negative inequality dual z[{index}] = {value:e}")]
    NegativeDual { index: usize, value: f64 },
    #[error("stability classification requires an Optimal or Unbounded solve, got {status:?}")]
    NotSolved { status: LpStatus },
    #[error("optimal homogeneous program with strictly negative objective {objective:e}")]
    InconsistentOptimum { objective: f64 },
}

/// Row-major sparse matrix; friction constraint rows have at most five
/// nonzeros, so all per-iteration products stay linear in the row count.
#[derive(Debug, Clone, Default)]
pub struct SparseMatrix {
    rows: Vec<Vec<(usize, f64)>>,
    ncols: usize,
}

impl SparseMatrix {
    pub fn new(ncols: usize) -> Self {
        SparseMatrix { rows: Vec::new(), ncols }
    }

    pub fn with_rows(ncols: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        SparseMatrix { rows, ncols }
    }

    pub fn push_row(&mut self, entries: Vec<(usize, f64)>) {
        debug_assert!(entries.iter().all(|&(j, _)| j < self.ncols));
        self.rows.push(entries);
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    /// `M x`.
    pub fn mul_vec(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.nrows());
        for (i, row) in self.rows.iter().enumerate() {
            out[i] = row.iter().map(|&(j, v)| v * x[j]).sum();
        }
        out
    }

    /// `Mᵀ y`.
    pub fn tr_mul_vec(&self, y: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.ncols);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                out[j] += v * y[i];
            }
        }
        out
    }

    /// Dense `Mᵀ diag(w) M`.
    pub fn weighted_gram(&self, w: &DVector<f64>) -> nalgebra::DMatrix<f64> {
        let mut out = nalgebra::DMatrix::zeros(self.ncols, self.ncols);
        for (i, row) in self.rows.iter().enumerate() {
            let wi = w[i];
            for &(a, va) in row {
                for &(b, vb) in row {
                    out[(a, b)] += wi * va * vb;
                }
            }
        }
        out
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut out = nalgebra::DMatrix::zeros(self.nrows(), self.ncols);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                out[(i, j)] = v;
            }
        }
        out
    }
}

/// Meaning of one primal variable of a friction program.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    /// Displacement component of a cell (`component` is 0 for x, 1 for y).
    CellDisplacement { cell: usize, component: usize },
    /// Slip-magnitude bound variable of an internal edge.
    SlipBound { edge: usize },
}

/// Meaning of one inequality row of a friction program.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    /// `-[u[e]].n_e <= 0`.
    NonPenetration { edge: usize },
    /// `[u[e]].t_e - v_e <= 0`.
    SlipPlus { edge: usize },
    /// `-[u[e]].t_e - v_e <= 0`.
    SlipMinus { edge: usize },
}

impl RowKind {
    pub fn edge(&self) -> usize {
        match *self {
            RowKind::NonPenetration { edge }
            | RowKind::SlipPlus { edge }
            | RowKind::SlipMinus { edge } => edge,
        }
    }
}

/// `min c.x  s.t.  G x <= h, A x = b`, with layout descriptors mapping
/// variables and inequality rows back to mesh entities. The descriptors are
/// empty for generic programs.
#[derive(Debug, Clone)]
pub struct LpStandardForm {
    pub c: DVector<f64>,
    pub g: SparseMatrix,
    pub h: DVector<f64>,
    pub a: SparseMatrix,
    pub b: DVector<f64>,
    pub vars: Vec<VarKind>,
    pub row_kinds: Vec<RowKind>,
}

impl LpStandardForm {
    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    pub fn num_ineq(&self) -> usize {
        self.g.nrows()
    }

    pub fn num_eq(&self) -> usize {
        self.a.nrows()
    }

    pub fn check_dims(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if self.g.ncols() != n || self.a.ncols() != n {
            return Err(LpError::Dimension(format!(
                "c has {} entries but G has {} and A has {} columns",
                n,
                self.g.ncols(),
                self.a.ncols()
            )));
        }
        if self.h.len() != self.g.nrows() {
            return Err(LpError::Dimension(format!(
                "G has {} rows but h has {} entries",
                self.g.nrows(),
                self.h.len()
            )));
        }
        if self.b.len() != self.a.nrows() {
            return Err(LpError::Dimension(format!(
                "A has {} rows but b has {} entries",
                self.a.nrows(),
                self.b.len()
            )));
        }
        if !self.vars.is_empty() && self.vars.len() != n {
            return Err(LpError::Dimension("variable layout does not match c".into()));
        }
        if !self.row_kinds.is_empty() && self.row_kinds.len() != self.g.nrows() {
            return Err(LpError::Dimension("row layout does not match G".into()));
        }
        Ok(())
    }

    /// Number of cells described by the variable layout.
    pub fn num_cells(&self) -> usize {
        self.vars
            .iter()
            .filter_map(|v| match v {
                VarKind::CellDisplacement { cell, .. } => Some(cell + 1),
                VarKind::SlipBound { .. } => None,
            })
            .max()
            .unwrap_or(0)
    }

    /// Per-cell displacement part of a primal point `x`.
    pub fn displacements(&self, x: &DVector<f64>) -> Vec<Vec2> {
        let mut u = vec![Vec2::zeros(); self.num_cells()];
        for (idx, kind) in self.vars.iter().enumerate() {
            if let VarKind::CellDisplacement { cell, component } = kind {
                u[*cell][*component] = x[idx];
            }
        }
        u
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Unbounded,
    Infeasible,
    NumericalFailure,
}

/// Scaled residuals of a solve.
#[derive(Debug, Clone, Copy, Default)]
pub struct Residuals {
    /// `max(‖(Gx-h)+‖∞, ‖Ax-b‖∞) / (1+‖x‖∞)`.
    pub primal: f64,
    /// `‖c + Gᵀz + Aᵀy‖∞ / (1+‖c‖∞)`.
    pub dual: f64,
    /// `|c.x - (-h.z - b.y)| / (1+|c.x|)`.
    pub gap: f64,
    /// `max_i |z_i (h_i - (Gx)_i)|`.
    pub complementarity: f64,
}

/// Farkas certificate of primal infeasibility:
/// `z >= 0, Gᵀz + Aᵀy = 0, h.z + b.y < 0`.
#[derive(Debug, Clone)]
pub struct FarkasCertificate {
    pub z: DVector<f64>,
    pub y: DVector<f64>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: DVector<f64>,
    /// Inequality duals, one per row of `G`, nonnegative.
    pub z: DVector<f64>,
    /// Equality duals, one per row of `A`.
    pub y: DVector<f64>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub residuals: Residuals,
    pub iterations: usize,
    /// Improving ray for `Unbounded`: `G d <= 0, A d = 0, c.d < 0`.
    pub ray: Option<DVector<f64>>,
    /// Certificate for `Infeasible`.
    pub farkas: Option<FarkasCertificate>,
}

/// Dual objective `-h.z - b.y` of a candidate dual pair. Rejects `z`
/// components below `-1e-10 * max(1, ‖z‖∞)`.
pub fn dual_objective(
    lp: &LpStandardForm,
    z: &DVector<f64>,
    y: &DVector<f64>,
) -> Result<f64, LpError> {
    if z.len() != lp.num_ineq() || y.len() != lp.num_eq() {
        return Err(LpError::Dimension("dual vector sizes do not match the program".into()));
    }
    let scale = z.amax().max(1.0);
    for (i, &zi) in z.iter().enumerate() {
        if zi < -1e-10 * scale {
            return Err(LpError::NegativeDual { index: i, value: zi });
        }
    }
    Ok(-lp.h.dot(z) - lp.b.dot(y))
}

/// Outcome of the stability classification of a friction program.
#[derive(Debug, Clone)]
pub enum Stability {
    /// Optimal with zero objective: the packing does not move.
    Jammed { displacements: Vec<Vec2> },
    /// Unbounded: the normalized ray is a collapse mode.
    Mechanism { displacements: Vec<Vec2>, ray: DVector<f64> },
}

impl Stability {
    pub fn is_jammed(&self) -> bool {
        matches!(self, Stability::Jammed { .. })
    }
}

/// Classify a solved friction program: `Jammed` for an optimal solve with
/// objective above `-tol`, `Mechanism` with the collapse ray (displacement
/// part normalized to unit max norm) for an unbounded one.
pub fn classify_stability(
    sol: &LpSolution,
    lp: &LpStandardForm,
    tol: f64,
) -> Result<Stability, LpError> {
    match sol.status {
        LpStatus::Optimal => {
            if sol.primal_objective < -tol {
                return Err(LpError::InconsistentOptimum { objective: sol.primal_objective });
            }
            Ok(Stability::Jammed { displacements: lp.displacements(&sol.x) })
        }
        LpStatus::Unbounded => {
            let ray = sol.ray.as_ref().expect("unbounded solution carries a ray");
            let u = lp.displacements(ray);
            let u_max = u.iter().map(|v| v.amax()).fold(0.0_f64, f64::max);
            let scale = if u_max > 0.0 { u_max } else { ray.amax() };
            let ray = ray / scale;
            Ok(Stability::Mechanism { displacements: lp.displacements(&ray), ray })
        }
        status => Err(LpError::NotSolved { status }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    fn one_dim_lp() -> LpStandardForm {
        // min x  s.t.  -x <= -1
        LpStandardForm {
            c: dvector![1.0],
            g: SparseMatrix::with_rows(1, vec![vec![(0, -1.0)]]),
            h: dvector![-1.0],
            a: SparseMatrix::new(1),
            b: dvector![],
            vars: vec![],
            row_kinds: vec![],
        }
    }

    #[test]
    fn dual_objective_matches_primal_optimum() {
        let lp = one_dim_lp();
        let obj = dual_objective(&lp, &dvector![1.0], &dvector![]).unwrap();
        assert_eq!(obj, 1.0);
    }

    #[test]
    fn dual_objective_rejects_negative_duals() {
        let lp = one_dim_lp();
        let err = dual_objective(&lp, &dvector![-0.5], &dvector![]).unwrap_err();
        assert!(matches!(err, LpError::NegativeDual { index: 0, .. }));
    }

    #[test]
    fn homogeneous_rhs_gives_zero_dual_objective() {
        // Friction programs have h = 0 and b = 0.
        let lp = LpStandardForm {
            c: dvector![1.0, 2.0],
            g: SparseMatrix::with_rows(2, vec![vec![(0, 1.0)], vec![(1, 1.0)]]),
            h: dvector![0.0, 0.0],
            a: SparseMatrix::with_rows(2, vec![vec![(0, 1.0), (1, 1.0)]]),
            b: dvector![0.0],
            vars: vec![],
            row_kinds: vec![],
        };
        let obj = dual_objective(&lp, &dvector![3.0, 4.0], &dvector![5.0]).unwrap();
        assert_eq!(obj, 0.0);
    }

    #[test]
    fn zero_tractions_classify_as_jammed() {
        let mesh =
            crate::geometry::generate_grid(3, 3, crate::geometry::Rect::unit()).unwrap();
        let zeros: Vec<(usize, crate::Vec2)> =
            mesh.boundary_edges().iter().map(|&e| (e, crate::Vec2::zeros())).collect();
        let problem = crate::primal::FrictionProblem::new(mesh, 10.0, zeros).unwrap();
        let lp = crate::primal::assemble_lp(&problem).unwrap();
        let sol = solve_lp(&lp, 1e-8).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!(sol.primal_objective.abs() <= 1e-9);
        let stability = classify_stability(&sol, &lp, 1e-7).unwrap();
        assert!(stability.is_jammed());
        // With zero confinement the optimal face is unbounded (uniform
        // expansion is free), so no claim is made on the returned u beyond
        // feasibility; loaded problems pin u to zero through the objective.
    }

    #[test]
    fn sparse_products_agree_with_dense() {
        let m = SparseMatrix::with_rows(
            3,
            vec![vec![(0, 2.0), (2, -1.0)], vec![(1, 4.0)], vec![(0, 1.0), (1, 1.0), (2, 1.0)]],
        );
        let x = dvector![1.0, 2.0, 3.0];
        let y = dvector![1.0, -1.0, 0.5];
        let dense = m.to_dense();
        assert_eq!(m.mul_vec(&x), &dense * &x);
        assert_eq!(m.tr_mul_vec(&y), dense.transpose() * &y);
        let w = dvector![1.0, 2.0, 3.0];
        let gram = m.weighted_gram(&w);
        let expected = dense.transpose() * nalgebra::DMatrix::from_diagonal(&w) * &dense;
        assert!((gram - expected).amax() < 1e-14);
    }
}
