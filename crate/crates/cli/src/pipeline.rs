//! Pipeline orchestration: mesh -> program -> solve -> forces -> stress,
//! with artifacts and a machine-readable report.

use crate::config::RunConfig;
use crate::export;
use anyhow::{Context, Result};
use jamstress_core::forces::{audit_all, extract_forces, weak_duality_check, AuditReport};
use jamstress_core::lp::{classify_stability, solve_with, LpStatus, SolverOptions, Stability};
use jamstress_core::primal::assemble_lp;
use jamstress_core::reconstruct::reconstruct_all;
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::time::Instant;

/// Exit code of a pipeline run: 0 jammed with all audits passing,
/// 1 jammed with audit violations, 2 collapse mechanism, 3 solver failure.
pub const EXIT_OK: i32 = 0;
pub const EXIT_AUDIT: i32 = 1;
pub const EXIT_MECHANISM: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub stability: String,
    pub exit_code: i32,
    pub mesh: MeshStats,
    pub solver: SolverStats,
    pub load: LoadStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub audits: Option<AuditStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reconstruction: Option<ReconStats>,
    pub warnings: Vec<String>,
    pub timings_ms: Timings,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeshStats {
    pub cells: usize,
    pub edges: usize,
    pub internal_edges: usize,
    pub boundary_edges: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverStats {
    pub status: String,
    pub iterations: usize,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub duality_gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub complementarity: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LoadStats {
    pub resultant: [f64; 2],
    pub balanced: bool,
    pub body_force: [f64; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuditStats {
    pub cell_balance: f64,
    pub penetration: f64,
    pub tension: f64,
    pub contact_complementarity: f64,
    pub tresca_excess: f64,
    pub tresca_misalignment: f64,
    pub dual_feasibility: f64,
    pub weak_duality_gap: f64,
    /// Jammed packings do not move: max cell displacement of the solution.
    pub max_displacement: f64,
    pub force_scale: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReconStats {
    pub cells: usize,
    pub max_div_norm: f64,
    pub max_weak_symmetry: f64,
    pub max_flux_error: f64,
    pub max_incompatibility: f64,
    pub ls_fallback_cells: Vec<usize>,
    pub failed_cells: Vec<usize>,
    pub pass: bool,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Timings {
    pub mesh: f64,
    pub assemble: f64,
    pub solve: f64,
    pub extract: f64,
    pub reconstruct: f64,
    pub export: f64,
    pub total: f64,
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Execute the full pipeline and write `forces.csv`, `stress.vtk` and
/// `report.json` (or `mechanism.csv` for a collapse) into `out_dir`.
pub fn run_pipeline(config: &RunConfig, out_dir: &Path) -> Result<RunReport> {
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;
    let total_start = Instant::now();
    let mut warnings = Vec::new();
    let mut timings = Timings::default();

    let t = Instant::now();
    let problem = crate::config::build_problem(config)?;
    timings.mesh = ms(t);
    let mesh_stats = MeshStats {
        cells: problem.mesh().cells().len(),
        edges: problem.mesh().edges().len(),
        internal_edges: problem.mesh().internal_edges().len(),
        boundary_edges: problem.mesh().boundary_edges().len(),
    };
    if !problem.is_balanced() {
        warnings.push(format!(
            "boundary load is unbalanced (resultant [{:.3e}, {:.3e}]); equilibrium is relative to a uniform body force",
            problem.resultant().x,
            problem.resultant().y
        ));
    }

    let t = Instant::now();
    let lp = assemble_lp(&problem)?;
    timings.assemble = ms(t);

    let t = Instant::now();
    let opts = SolverOptions {
        tol_feas: config.solver.tol_feas,
        tol_gap: config.solver.tol_gap,
        max_iter: config.solver.max_iter,
    };
    let sol = solve_with(&lp, &opts)?;
    timings.solve = ms(t);

    let solver_stats = SolverStats {
        status: format!("{:?}", sol.status),
        iterations: sol.iterations,
        primal_objective: sol.primal_objective,
        dual_objective: sol.dual_objective,
        duality_gap: sol.residuals.gap,
        primal_residual: sol.residuals.primal,
        dual_residual: sol.residuals.dual,
        complementarity: sol.residuals.complementarity,
    };
    let mut load_stats = LoadStats {
        resultant: [problem.resultant().x, problem.resultant().y],
        balanced: problem.is_balanced(),
        body_force: [0.0, 0.0],
    };

    match sol.status {
        LpStatus::Optimal | LpStatus::Unbounded => {}
        LpStatus::Infeasible | LpStatus::NumericalFailure => {
            let report = RunReport {
                stability: "unsolved".into(),
                exit_code: EXIT_SOLVER,
                mesh: mesh_stats,
                solver: solver_stats,
                load: load_stats,
                audits: None,
                reconstruction: None,
                warnings,
                timings_ms: Timings { total: ms(total_start), ..timings },
            };
            write_report(&report, out_dir)?;
            return Ok(report);
        }
    }

    let stability = classify_stability(&sol, &lp, config.audit.tol)?;
    let displacements = match &stability {
        Stability::Jammed { displacements } => displacements.clone(),
        Stability::Mechanism { displacements, .. } => {
            let t = Instant::now();
            std::fs::write(out_dir.join("mechanism.csv"), export::mechanism_csv(displacements))?;
            timings.export = ms(t);
            let report = RunReport {
                stability: "mechanism".into(),
                exit_code: EXIT_MECHANISM,
                mesh: mesh_stats,
                solver: solver_stats,
                load: load_stats,
                audits: None,
                reconstruction: None,
                warnings,
                timings_ms: Timings { total: ms(total_start), ..timings },
            };
            write_report(&report, out_dir)?;
            return Ok(report);
        }
    };

    let t = Instant::now();
    let forces = extract_forces(&sol, &lp, problem.mesh())?;
    let audit: AuditReport = audit_all(&displacements, &forces, &problem, &lp)?;
    let weak_gap = weak_duality_check(&displacements, &forces, &problem, &lp)?;
    timings.extract = ms(t);
    load_stats.body_force = [forces.body_force.x, forces.body_force.y];
    if forces.body_force.norm() > 1e-6 * mean_traction(&problem).max(1e-12) {
        warnings.push(format!(
            "nonzero uniform body force [{:.3e}, {:.3e}]: the load is globally unbalanced",
            forces.body_force.x, forces.body_force.y
        ));
    }

    let max_displacement =
        displacements.iter().map(|v| v.amax()).fold(0.0_f64, f64::max);
    if max_displacement > config.audit.tol * problem.mesh().diameter() {
        // A confined (coercive) load pins the optimizer at zero displacement.
        // Loads admitting free separation leave the displacement defined only
        // up to that zero-stiffness mode, so it is reported, not gated.
        warnings.push(format!(
            "max displacement {max_displacement:.3e}: the packing admits load-free separation; displacements are defined up to that mode"
        ));
    }
    let audit_stats = AuditStats {
        cell_balance: audit.cell_balance,
        penetration: audit.penetration,
        tension: audit.tension,
        contact_complementarity: audit.contact_complementarity,
        tresca_excess: audit.tresca_excess,
        tresca_misalignment: audit.tresca_misalignment,
        dual_feasibility: audit.dual_feasibility,
        weak_duality_gap: weak_gap,
        max_displacement,
        force_scale: audit.force_scale,
        pass: audit.passes(config.audit.tol),
    };

    let t = Instant::now();
    let recon = reconstruct_all(&problem, &forces, config.effective_threads());
    timings.reconstruct = ms(t);
    for cell in &recon.summary.flagged {
        warnings.push(format!("cell {cell}: singular saddle system, least-squares fallback used"));
    }
    for (cell, err) in &recon.summary.failed {
        warnings.push(format!("cell {cell}: reconstruction failed: {err}"));
    }
    let recon_stats = ReconStats {
        cells: recon.fields.len(),
        max_div_norm: recon.summary.max_div_norm,
        max_weak_symmetry: recon.summary.max_weak_symmetry,
        max_flux_error: recon.summary.max_flux_error,
        max_incompatibility: recon.summary.max_incompatibility,
        ls_fallback_cells: recon.summary.flagged.clone(),
        failed_cells: recon.summary.failed.iter().map(|(c, _)| *c).collect(),
        pass: recon.summary.failed.is_empty()
            && recon.summary.max_weak_symmetry <= config.audit.weak_symmetry_tol
            && recon.summary.max_flux_error <= config.audit.flux_tol,
    };

    let t = Instant::now();
    std::fs::write(out_dir.join("forces.csv"), export::forces_csv(&forces, problem.mesh()))?;
    std::fs::write(out_dir.join("stress.vtk"), export::stress_vtk(&recon.fields))?;
    timings.export = ms(t);

    let pass = audit_stats.pass && recon_stats.pass;
    let report = RunReport {
        stability: "jammed".into(),
        exit_code: if pass { EXIT_OK } else { EXIT_AUDIT },
        mesh: mesh_stats,
        solver: solver_stats,
        load: load_stats,
        audits: Some(audit_stats),
        reconstruction: Some(recon_stats),
        warnings,
        timings_ms: Timings { total: ms(total_start), ..timings },
    };
    write_report(&report, out_dir)?;
    Ok(report)
}

fn mean_traction(problem: &jamstress_core::primal::FrictionProblem) -> f64 {
    let boundary = problem.mesh().boundary_edges();
    if boundary.is_empty() {
        return 0.0;
    }
    boundary.iter().map(|&e| problem.traction(e).unwrap().norm()).sum::<f64>()
        / boundary.len() as f64
}

fn write_report(report: &RunReport, out_dir: &Path) -> Result<()> {
    let json = serde_json::to_string_pretty(report).context("serializing report")?;
    std::fs::write(out_dir.join("report.json"), json)?;
    Ok(())
}
