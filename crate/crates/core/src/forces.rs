//! Interface forces extracted from LP duals, and the contact, friction and
//! equilibrium audits.
//!
//! Sign map, fixed once from stationarity of the program Lagrangian with the
//! row conventions of [`crate::primal::assemble_lp`]:
//!
//! - normal force `f^n_e = -z_nonpen(e)` (nonpositive: contact is
//!   compressive),
//! - tangential force `f^t_e = z_slip+(e) - z_slip-(e)` (bounded by
//!   `s_T |e|`),
//! - uniform residual body force = minus the equality multiplier, so that
//!   per-cell balance reads `Σ |e| λ + Σ |e| g + body_force = 0`.
//!
//! The per-cell traction of an internal edge is
//! `λ[e,c] = |e|⁻¹ (n_c . n_e)(f^n n_e + f^t t_e)`; the two adjacent cells
//! receive exact negations of the same vector, so action-reaction holds
//! bitwise. Correctness of the sign map is enforced by the audits below
//! rather than re-derivation.

use crate::geometry::{Edge, EdgeKind, PolygonalMesh};
use crate::lp::{LpSolution, LpStandardForm, LpStatus, RowKind};
use crate::primal::{jump, primal_energy, FrictionProblem, PrimalError};
use crate::{Mat2, Vec2};
use nalgebra::DVector;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ForceError {
    #[error("force extraction requires an Optimal solve, got {status:?}")]
    NotOptimal { status: LpStatus },
    #[error("edge {edge} is missing dual rows in the program layout")]
    MissingDualRow { edge: usize },
    #[error("edge {edge} is not an internal edge")]
    NotInternal { edge: usize },
    #[error("cell {cell} is not adjacent to edge {edge}")]
    NotAdjacent { edge: usize, cell: usize },
    #[error("program has {rows} equality rows, expected 2")]
    BadEqualityCount { rows: usize },
    #[error(transparent)]
    Primal(#[from] PrimalError),
    #[error("displacement point is infeasible: {what}")]
    InfeasiblePoint { what: String },
}

/// Normal/tangential force pairs per internal edge, plus the uniform
/// residual body force.
#[derive(Debug, Clone)]
pub struct InterfaceForces {
    edge_ids: Vec<usize>,
    pairs: Vec<(f64, f64)>,
    slot: Vec<Option<usize>>,
    /// Uniform body force balancing an unbalanced boundary load; zero (to
    /// tolerance) for balanced problems.
    pub body_force: Vec2,
}

impl InterfaceForces {
    /// `pairs[k]` is `(f^n, f^t)` of `mesh.internal_edges()[k]`.
    pub fn new(mesh: &PolygonalMesh, pairs: Vec<(f64, f64)>, body_force: Vec2) -> Self {
        let edge_ids = mesh.internal_edges().to_vec();
        assert_eq!(pairs.len(), edge_ids.len());
        let mut slot = vec![None; mesh.edges().len()];
        for (k, &e) in edge_ids.iter().enumerate() {
            slot[e] = Some(k);
        }
        InterfaceForces { edge_ids, pairs, slot, body_force }
    }

    /// Forces read off a uniform stress field: `f^n = |e| n.(S n)`,
    /// `f^t = |e| t.(S n)`, zero body force. The dual candidate used by the
    /// verification tests.
    pub fn from_uniform_stress(mesh: &PolygonalMesh, stress: Mat2) -> Self {
        let pairs = mesh
            .internal_edges()
            .iter()
            .map(|&e| {
                let edge = mesh.edge(e);
                let traction = stress * edge.normal;
                (edge.length * edge.normal.dot(&traction), edge.length * edge.tangent.dot(&traction))
            })
            .collect();
        Self::new(mesh, pairs, Vec2::zeros())
    }

    pub fn get(&self, edge: usize) -> Option<(f64, f64)> {
        self.slot.get(edge).copied().flatten().map(|k| self.pairs[k])
    }

    pub fn set(&mut self, edge: usize, pair: (f64, f64)) {
        let k = self.slot[edge].expect("internal edge");
        self.pairs[k] = pair;
    }

    /// `(edge id, (f^n, f^t))` in ascending edge order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, (f64, f64))> + '_ {
        self.edge_ids.iter().copied().zip(self.pairs.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Scale used by the audits: `max(1, max_e |f_e|)`.
    pub fn scale(&self) -> f64 {
        self.pairs
            .iter()
            .map(|&(n, t)| n.abs().max(t.abs()))
            .fold(1.0_f64, f64::max)
    }
}

/// Map the duals of an optimal solve to interface forces.
pub fn extract_forces(
    sol: &LpSolution,
    lp: &LpStandardForm,
    mesh: &PolygonalMesh,
) -> Result<InterfaceForces, ForceError> {
    if sol.status != LpStatus::Optimal {
        return Err(ForceError::NotOptimal { status: sol.status });
    }
    if sol.y.len() != 2 {
        return Err(ForceError::BadEqualityCount { rows: sol.y.len() });
    }
    let internal = mesh.internal_edges();
    let mut slot = vec![None; mesh.edges().len()];
    for (k, &e) in internal.iter().enumerate() {
        slot[e] = Some(k);
    }
    let mut nonpen = vec![None; internal.len()];
    let mut plus = vec![None; internal.len()];
    let mut minus = vec![None; internal.len()];
    for (row, kind) in lp.row_kinds.iter().enumerate() {
        let k = slot[kind.edge()].ok_or(ForceError::MissingDualRow { edge: kind.edge() })?;
        match kind {
            RowKind::NonPenetration { .. } => nonpen[k] = Some(sol.z[row]),
            RowKind::SlipPlus { .. } => plus[k] = Some(sol.z[row]),
            RowKind::SlipMinus { .. } => minus[k] = Some(sol.z[row]),
        }
    }
    let mut pairs = Vec::with_capacity(internal.len());
    for (k, &e) in internal.iter().enumerate() {
        let (zn, zp, zm) = match (nonpen[k], plus[k], minus[k]) {
            (Some(a), Some(b), Some(c)) => (a, b, c),
            _ => return Err(ForceError::MissingDualRow { edge: e }),
        };
        pairs.push((-zn, zp - zm));
    }
    let body_force = -Vec2::new(sol.y[0], sol.y[1]);
    Ok(InterfaceForces::new(mesh, pairs, body_force))
}

/// Reassemble the LP dual vector of a force set: the inverse of
/// [`extract_forces`], splitting `f^t` over the two slip rows so that their
/// sum is `s_T |e|`.
pub fn dual_vector(
    forces: &InterfaceForces,
    problem: &FrictionProblem,
    lp: &LpStandardForm,
) -> (DVector<f64>, DVector<f64>) {
    let mesh = problem.mesh();
    let mut z = DVector::zeros(lp.num_ineq());
    for (row, kind) in lp.row_kinds.iter().enumerate() {
        let e = kind.edge();
        let (fn_, ft) = forces.get(e).expect("internal edge");
        let cap = problem.tresca() * mesh.edge(e).length;
        z[row] = match kind {
            RowKind::NonPenetration { .. } => -fn_,
            RowKind::SlipPlus { .. } => 0.5 * (cap + ft),
            RowKind::SlipMinus { .. } => 0.5 * (cap - ft),
        };
    }
    let y = DVector::from_column_slice(&[-forces.body_force.x, -forces.body_force.y]);
    (z, y)
}

/// Traction exerted on cell `c` across internal edge `e`:
/// `λ[e,c] = |e|⁻¹ (n_c . n_e)(f^n n_e + f^t t_e)`.
pub fn edge_traction(f: (f64, f64), edge: &Edge, cell: usize) -> Result<Vec2, ForceError> {
    if !edge.is_internal() {
        return Err(ForceError::NotInternal { edge: edge.id });
    }
    let sign =
        edge.outward_sign(cell).ok_or(ForceError::NotAdjacent { edge: edge.id, cell })?;
    Ok((edge.normal * f.0 + edge.tangent * f.1) * (sign / edge.length))
}

/// Per-cell force balance report.
#[derive(Debug, Clone)]
pub struct BalanceReport {
    /// `r_c = Σ |e| λ[e,c] + Σ |e| g_e + body_force` per cell.
    pub residuals: Vec<Vec2>,
    pub max: f64,
}

/// Check force balance of every cell under the extracted tractions, the
/// boundary load and the uniform body force.
pub fn check_cell_balance(forces: &InterfaceForces, problem: &FrictionProblem) -> BalanceReport {
    let mesh = problem.mesh();
    let mut residuals = vec![forces.body_force; mesh.cells().len()];
    for cell in mesh.cells() {
        let mut acc = Vec2::zeros();
        for ce in mesh.cell_edges(cell.id) {
            let edge = mesh.edge(ce.edge);
            match edge.kind {
                EdgeKind::Internal { .. } => {
                    let f = forces.get(ce.edge).unwrap();
                    acc += edge.length * edge_traction(f, edge, cell.id).unwrap();
                }
                EdgeKind::Boundary { .. } => {
                    acc += edge.length * problem.traction(ce.edge).unwrap();
                }
            }
        }
        residuals[cell.id] += acc;
    }
    let max = residuals.iter().map(|r| r.norm()).fold(0.0, f64::max);
    BalanceReport { residuals, max }
}

/// Contact condition audit: non-penetration of the displacement jumps,
/// compressive normal forces, and their complementarity.
#[derive(Debug, Clone, Copy, Default)]
pub struct ContactAudit {
    /// `max_e max(0, -[u].n)`.
    pub penetration: f64,
    /// `max_e max(0, f^n)` — tension is inadmissible.
    pub tension: f64,
    /// `max_e |f^n ([u].n)|`.
    pub complementarity: f64,
}

impl ContactAudit {
    pub fn passes(&self, tol: f64, scale: f64) -> bool {
        self.penetration <= tol && self.tension <= tol * scale && self.complementarity <= tol * scale
    }
}

pub fn check_contact_kkt(
    u: &[Vec2],
    forces: &InterfaceForces,
    mesh: &PolygonalMesh,
) -> Result<ContactAudit, ForceError> {
    let mut audit = ContactAudit::default();
    for &e in mesh.internal_edges() {
        let edge = mesh.edge(e);
        let gap = jump(u, edge)?.dot(&edge.normal);
        let (fn_, _) = forces.get(e).unwrap();
        audit.penetration = audit.penetration.max(-gap);
        audit.tension = audit.tension.max(fn_);
        audit.complementarity = audit.complementarity.max((fn_ * gap).abs());
    }
    audit.penetration = audit.penetration.max(0.0);
    audit.tension = audit.tension.max(0.0);
    Ok(audit)
}

/// Friction law audit: tangential bound and slip alignment.
#[derive(Debug, Clone, Copy, Default)]
pub struct TrescaAudit {
    /// `max_e (|f^t| - s_T |e|)`; negative means slack everywhere.
    pub bound_excess: f64,
    /// `max over sliding edges of f^t.slip + s_T |e| |slip|`; sliding
    /// friction must act at full magnitude opposite to the slip.
    pub misalignment: f64,
}

impl TrescaAudit {
    pub fn passes(&self, tol: f64, scale: f64) -> bool {
        self.bound_excess <= tol * scale && self.misalignment <= tol * scale
    }
}

pub fn check_tresca(
    u: &[Vec2],
    forces: &InterfaceForces,
    problem: &FrictionProblem,
    slip_tol: f64,
) -> Result<TrescaAudit, ForceError> {
    let mesh = problem.mesh();
    let mut audit = TrescaAudit { bound_excess: f64::NEG_INFINITY, misalignment: 0.0 };
    for &e in mesh.internal_edges() {
        let edge = mesh.edge(e);
        let (_, ft) = forces.get(e).unwrap();
        let cap = problem.tresca() * edge.length;
        audit.bound_excess = audit.bound_excess.max(ft.abs() - cap);
        let slip = jump(u, edge)?.dot(&edge.tangent);
        if slip.abs() > slip_tol {
            audit.misalignment = audit.misalignment.max(ft * slip + cap * slip.abs());
        }
    }
    if !audit.bound_excess.is_finite() {
        audit.bound_excess = 0.0;
    }
    Ok(audit)
}

/// Gap `E(u) - E*(f)` between a feasible displacement and a feasible force
/// set. Nonnegative by weak duality; at an optimal pair it vanishes.
pub fn weak_duality_check(
    u: &[Vec2],
    forces: &InterfaceForces,
    problem: &FrictionProblem,
    lp: &LpStandardForm,
) -> Result<f64, ForceError> {
    let mesh = problem.mesh();
    let feas_tol = 1e-10 * mesh.diameter().max(1.0);
    for &e in mesh.internal_edges() {
        let gap = jump(u, mesh.edge(e))?.dot(&mesh.edge(e).normal);
        if gap < -feas_tol {
            return Err(ForceError::InfeasiblePoint {
                what: format!("penetration {gap:e} across edge {e}"),
            });
        }
    }
    let mean = u.iter().sum::<Vec2>() / u.len() as f64;
    if mean.norm() > feas_tol {
        return Err(ForceError::InfeasiblePoint { what: format!("nonzero mean {mean:?}") });
    }
    let (z, y) = dual_vector(forces, problem, lp);
    let dual_obj = crate::lp::dual_objective(lp, &z, &y)
        .map_err(|e| ForceError::InfeasiblePoint { what: e.to_string() })?;
    Ok(primal_energy(u, problem)? - dual_obj)
}

/// Combined audit record for one solved problem.
#[derive(Debug, Clone, Copy)]
pub struct AuditReport {
    pub cell_balance: f64,
    pub penetration: f64,
    pub tension: f64,
    pub contact_complementarity: f64,
    pub tresca_excess: f64,
    pub tresca_misalignment: f64,
    /// `‖c + Gᵀz + Aᵀy‖∞` of the reassembled dual vector.
    pub dual_feasibility: f64,
    pub force_scale: f64,
}

impl AuditReport {
    pub fn passes(&self, tol: f64) -> bool {
        let s = self.force_scale;
        self.cell_balance <= tol * s
            && self.penetration <= tol
            && self.tension <= tol * s
            && self.contact_complementarity <= tol * s
            && self.tresca_excess <= tol * s
            && self.tresca_misalignment <= tol * s
    }

    pub fn max_violation(&self) -> f64 {
        self.cell_balance
            .max(self.penetration)
            .max(self.tension)
            .max(self.contact_complementarity)
            .max(self.tresca_excess)
            .max(self.tresca_misalignment)
    }
}

/// Run the full audit suite on an extracted force set.
pub fn audit_all(
    u: &[Vec2],
    forces: &InterfaceForces,
    problem: &FrictionProblem,
    lp: &LpStandardForm,
) -> Result<AuditReport, ForceError> {
    let mesh = problem.mesh();
    let balance = check_cell_balance(forces, problem);
    let contact = check_contact_kkt(u, forces, mesh)?;
    let tresca = check_tresca(u, forces, problem, 1e-9 * mesh.diameter().max(1.0))?;
    let (z, y) = dual_vector(forces, problem, lp);
    let stat = &lp.c + lp.g.tr_mul_vec(&z) + lp.a.tr_mul_vec(&y);
    Ok(AuditReport {
        cell_balance: balance.max,
        penetration: contact.penetration,
        tension: contact.tension,
        contact_complementarity: contact.complementarity,
        tresca_excess: tresca.bound_excess.max(0.0),
        tresca_misalignment: tresca.misalignment,
        dual_feasibility: stat.amax(),
        force_scale: forces.scale().max(external_scale(problem)),
    })
}

fn external_scale(problem: &FrictionProblem) -> f64 {
    problem
        .mesh()
        .internal_edges()
        .iter()
        .map(|&e| problem.tresca() * problem.mesh().edge(e).length)
        .fold(1.0_f64, f64::max)
}
