//! Primal-dual interior-point solver (Mehrotra predictor-corrector).
//!
//! Works on `min c.x  s.t.  G x <= h, A x = b` with free `x`: each Newton
//! step eliminates the slack/dual pair of the inequalities and solves the
//! dense saddle system `[[GᵀWG, Aᵀ], [A, 0]]`. Free variables are handled
//! natively, without splitting. The starting point is fixed (zero primal,
//! unit inequality duals and slacks) so identical inputs produce identical
//! iterates.
//!
//! Unboundedness is detected from divergence of the primal iterate and
//! reported only with an explicitly certified improving ray; primal
//! infeasibility from divergence of the duals, reported with a verified
//! Farkas certificate.

use super::{FarkasCertificate, LpError, LpSolution, LpStandardForm, LpStatus, Residuals};
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Scaled primal/dual feasibility threshold for reporting `Optimal`.
    pub tol_feas: f64,
    /// Scaled duality-gap threshold for reporting `Optimal`.
    pub tol_gap: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol_feas: 1e-8, tol_gap: 1e-7, max_iter: 200 }
    }
}

/// Solve with feasibility tolerance `tol` (gap tolerance `10 tol`).
/// `tol` must lie in `[1e-12, 1e-4]`.
pub fn solve_lp(lp: &LpStandardForm, tol: f64) -> Result<LpSolution, LpError> {
    if !(1e-12..=1e-4).contains(&tol) {
        return Err(LpError::InvalidTolerance(tol));
    }
    solve_with(lp, &SolverOptions { tol_feas: tol, tol_gap: 10.0 * tol, max_iter: 200 })
}

fn inf_norm(v: &DVector<f64>) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.amax()
    }
}

fn max_elem(v: &DVector<f64>) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

struct Metrics {
    res: Residuals,
    primal_objective: f64,
    dual_objective: f64,
    score: f64,
}

fn metrics(lp: &LpStandardForm, x: &DVector<f64>, y: &DVector<f64>, z: &DVector<f64>) -> Metrics {
    let gx = lp.g.mul_vec(x);
    let ax = lp.a.mul_vec(x);
    let viol = (0..lp.num_ineq()).map(|i| (gx[i] - lp.h[i]).max(0.0)).fold(0.0_f64, f64::max);
    let eq_viol = inf_norm(&(&ax - &lp.b));
    let primal = viol.max(eq_viol) / (1.0 + inf_norm(x));
    let r_d = &lp.c + lp.g.tr_mul_vec(z) + lp.a.tr_mul_vec(y);
    let dual = inf_norm(&r_d) / (1.0 + inf_norm(&lp.c));
    let primal_objective = lp.c.dot(x);
    let dual_objective = -lp.h.dot(z) - lp.b.dot(y);
    let gap = (primal_objective - dual_objective).abs() / (1.0 + primal_objective.abs());
    let complementarity =
        (0..lp.num_ineq()).map(|i| (z[i] * (lp.h[i] - gx[i])).abs()).fold(0.0_f64, f64::max);
    Metrics {
        res: Residuals { primal, dual, gap, complementarity },
        primal_objective,
        dual_objective,
        score: primal.max(dual).max(gap),
    }
}

/// Solve a standard-form program, returning primal and dual solutions. The
/// iteration loop is deterministic: no randomized pivoting or restarts.
pub fn solve_with(lp: &LpStandardForm, opts: &SolverOptions) -> Result<LpSolution, LpError> {
    lp.check_dims()?;
    let m = lp.num_ineq();
    if m == 0 {
        return Ok(solve_equality_only(lp, opts));
    }
    let n = lp.num_vars();
    let p = lp.num_eq();

    let mut x = DVector::zeros(n);
    let mut y = DVector::zeros(p);
    let mut z = DVector::from_element(m, 1.0);
    let mut s = DVector::from_element(m, 1.0);

    let diverge = 1e8 * (1.0 + inf_norm(&lp.h).max(inf_norm(&lp.b)).max(inf_norm(&lp.c)));
    let tight_feas = (0.001 * opts.tol_feas).max(1e-12);
    let tight_gap = (0.001 * opts.tol_gap).max(1e-12);

    let mut best: Option<(f64, DVector<f64>, DVector<f64>, DVector<f64>)> = None;
    let mut last_dx: Option<DVector<f64>> = None;
    let mut status = None;
    let mut ray = None;
    let mut farkas = None;
    let mut iterations = 0;
    let mut stalls = 0;
    let mut no_progress = 0;
    let mut prev_mu = f64::INFINITY;

    for iter in 0..opts.max_iter {
        iterations = iter;
        let met = metrics(lp, &x, &y, &z);
        if !met.score.is_finite() {
            break;
        }
        if best.as_ref().map_or(true, |(score, ..)| met.score < *score) {
            best = Some((met.score, x.clone(), y.clone(), z.clone()));
        }
        if met.res.primal <= tight_feas && met.res.dual <= tight_feas && met.res.gap <= tight_gap {
            status = Some(LpStatus::Optimal);
            break;
        }

        // Divergence of the primal iterate with decreasing objective: try to
        // certify an improving ray before claiming unboundedness.
        if inf_norm(&x) > diverge && met.primal_objective < 0.0 {
            let mut candidates: Vec<&DVector<f64>> = Vec::new();
            if let Some(d) = last_dx.as_ref() {
                candidates.push(d);
            }
            candidates.push(&x);
            if let Some(d) = candidates.iter().find_map(|c| certify_ray(lp, c)) {
                ray = Some(d);
                status = Some(LpStatus::Unbounded);
                break;
            }
        }
        // Divergence of the duals: try to certify primal infeasibility.
        if inf_norm(&z).max(inf_norm(&y)) > diverge {
            if let Some(cert) = certify_farkas(lp, &z, &y) {
                farkas = Some(cert);
                status = Some(LpStatus::Infeasible);
                break;
            }
        }

        let gx = lp.g.mul_vec(&x);
        let r_d = &lp.c + lp.g.tr_mul_vec(&z) + lp.a.tr_mul_vec(&y);
        let r_p = lp.a.mul_vec(&x) - &lp.b;
        let r_g = &gx + &s - &lp.h;
        let mu = s.dot(&z) / m as f64;
        if mu > 0.9 * prev_mu {
            no_progress += 1;
            if no_progress >= 8 {
                break;
            }
        } else {
            no_progress = 0;
        }
        prev_mu = mu;

        let w = z.component_div(&s);
        let Some(lu) = factor_kkt(lp, &w) else {
            break;
        };

        // Predictor (affine scaling, sigma = 0).
        let rc_aff = s.component_mul(&z);
        let Some((dx_a, _dy_a)) = kkt_step(lp, &lu, &w, &r_d, &r_p, &r_g, &rc_aff, &s) else {
            break;
        };
        let g_dx_a = lp.g.mul_vec(&dx_a);
        let dz_a = w.component_mul(&(&g_dx_a + &r_g)) - rc_aff.component_div(&s);
        let ds_a = -(&r_g + &g_dx_a);
        let ap_a = max_step(&s, &ds_a);
        let ad_a = max_step(&z, &dz_a);
        let mu_aff = (&s + &ds_a * ap_a).dot(&(&z + &dz_a * ad_a)) / m as f64;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);
        // Ray candidates come from the affine-scaling direction.
        last_dx = Some(dx_a.clone());

        // Corrector.
        let rc = s.component_mul(&z) + ds_a.component_mul(&dz_a)
            - DVector::from_element(m, sigma * mu);
        let Some((dx, dy)) = kkt_step(lp, &lu, &w, &r_d, &r_p, &r_g, &rc, &s) else {
            break;
        };
        let g_dx = lp.g.mul_vec(&dx);
        let dz = w.component_mul(&(&g_dx + &r_g)) - rc.component_div(&s);
        let ds = -(&r_g + &g_dx);

        let ap_max = max_step(&s, &ds);
        let ad_max = max_step(&z, &dz);
        let eta = 0.9995;
        let ap = (eta * ap_max).min(1.0);
        let ad = (eta * ad_max).min(1.0);

        x += &dx * ap;
        s += &ds * ap;
        y += &dy * ad;
        z += &dz * ad;

        if ap_max < 1e-10 && ad_max < 1e-10 {
            stalls += 1;
            if stalls >= 2 {
                break;
            }
        } else {
            stalls = 0;
        }
    }

    // Certified early exits keep their iterate; otherwise classify the best
    // iterate against the reporting tolerances.
    if status.is_none() {
        if let Some((_, bx, by, bz)) = best.take() {
            x = bx;
            y = by;
            z = bz;
        }
        let met = metrics(lp, &x, &y, &z);
        status = Some(
            if met.res.primal <= opts.tol_feas
                && met.res.dual <= opts.tol_feas
                && met.res.gap <= opts.tol_gap
            {
                LpStatus::Optimal
            } else {
                LpStatus::NumericalFailure
            },
        );
    }

    let met = metrics(lp, &x, &y, &z);
    Ok(LpSolution {
        status: status.unwrap(),
        x,
        z,
        y,
        primal_objective: met.primal_objective,
        dual_objective: met.dual_objective,
        residuals: met.res,
        iterations: iterations + 1,
        ray,
        farkas,
    })
}

/// Largest step in `[0, 1]` keeping `v + alpha dv >= 0`.
fn max_step(v: &DVector<f64>, dv: &DVector<f64>) -> f64 {
    let mut alpha = 1.0_f64;
    for i in 0..v.len() {
        if dv[i] < 0.0 {
            alpha = alpha.min(-v[i] / dv[i]);
        }
    }
    alpha
}

fn factor_kkt(lp: &LpStandardForm, w: &DVector<f64>) -> Option<nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>> {
    let n = lp.num_vars();
    let p = lp.num_eq();
    let mut k = DMatrix::zeros(n + p, n + p);
    let gram = lp.g.weighted_gram(w);
    k.view_mut((0, 0), (n, n)).copy_from(&gram);
    for i in 0..p {
        for &(j, v) in lp.a.row(i) {
            k[(n + i, j)] = v;
            k[(j, n + i)] = v;
        }
    }
    let lu = k.clone().lu();
    if lu.is_invertible() {
        return Some(lu);
    }
    // Tiny static regularization for the occasional singular late iterate.
    let scale = 1e-12 * (1.0 + gram.diagonal().amax());
    for i in 0..n {
        k[(i, i)] += scale;
    }
    for i in n..n + p {
        k[(i, i)] -= scale;
    }
    let lu = k.lu();
    lu.is_invertible().then_some(lu)
}

#[allow(clippy::too_many_arguments)]
fn kkt_step(
    lp: &LpStandardForm,
    lu: &nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    w: &DVector<f64>,
    r_d: &DVector<f64>,
    r_p: &DVector<f64>,
    r_g: &DVector<f64>,
    rc: &DVector<f64>,
    s: &DVector<f64>,
) -> Option<(DVector<f64>, DVector<f64>)> {
    let n = lp.num_vars();
    let p = lp.num_eq();
    let packed = w.component_mul(r_g) - rc.component_div(s);
    let rhs_x = -r_d - lp.g.tr_mul_vec(&packed);
    let mut rhs = DVector::zeros(n + p);
    rhs.rows_mut(0, n).copy_from(&rhs_x);
    rhs.rows_mut(n, p).copy_from(&(-r_p));
    let sol = lu.solve(&rhs)?;
    let dx = sol.rows(0, n).into_owned();
    let dy = sol.rows(n, p).into_owned();
    (dx.iter().all(|v| v.is_finite()) && dy.iter().all(|v| v.is_finite()))
        .then_some((dx, dy))
}

/// Polish a candidate direction onto `{d : G_active d = 0, A d = 0}` and
/// certify it as an improving ray: `G d <= 1e-10, ‖A d‖∞ <= 1e-10,
/// c.d <= -1e-10` after normalizing `‖d‖∞ = 1`.
fn certify_ray(lp: &LpStandardForm, candidate: &DVector<f64>) -> Option<DVector<f64>> {
    let n = lp.num_vars();
    let p = lp.num_eq();
    let norm = inf_norm(candidate);
    if !(norm > 0.0) || !norm.is_finite() {
        return None;
    }
    let mut d = candidate / norm;

    for _ in 0..3 {
        let gd = lp.g.mul_vec(&d);
        let ad = lp.a.mul_vec(&d);
        let active: Vec<usize> = (0..lp.num_ineq()).filter(|&i| gd[i] > 0.0).collect();
        if active.is_empty() && inf_norm(&ad) <= 1e-14 {
            break;
        }
        let rows = active.len() + p;
        let mut k = DMatrix::zeros(rows, n);
        for (r, &i) in active.iter().enumerate() {
            for &(j, v) in lp.g.row(i) {
                k[(r, j)] = v;
            }
        }
        for i in 0..p {
            for &(j, v) in lp.a.row(i) {
                k[(active.len() + i, j)] = v;
            }
        }
        let kd = &k * &d;
        let svd = k.svd(true, true);
        let eps = 1e-12 * svd.singular_values.amax().max(1.0);
        let corr = svd.solve(&kd, eps).ok()?;
        d -= corr;
        let norm = inf_norm(&d);
        if !(norm > 1e-8) {
            return None;
        }
        d /= norm;
    }

    let gd = lp.g.mul_vec(&d);
    let ad = lp.a.mul_vec(&d);
    let ok = max_elem(&gd).max(0.0) <= 1e-10
        && inf_norm(&ad) <= 1e-10
        && lp.c.dot(&d) <= -1e-10;
    ok.then_some(d)
}

/// Polish a candidate dual direction onto `{(z, y) : Gᵀz + Aᵀy = 0, z >= 0}`
/// and certify infeasibility: `h.z + b.y <= -1e-10` after normalization.
fn certify_farkas(
    lp: &LpStandardForm,
    z_cand: &DVector<f64>,
    y_cand: &DVector<f64>,
) -> Option<FarkasCertificate> {
    let m = lp.num_ineq();
    let p = lp.num_eq();
    let n = lp.num_vars();
    let norm = inf_norm(z_cand).max(inf_norm(y_cand));
    if !(norm > 0.0) || !norm.is_finite() {
        return None;
    }
    let mut z = z_cand / norm;
    let mut y = y_cand / norm;

    for _ in 0..4 {
        z.iter_mut().for_each(|v| *v = v.max(0.0));
        let r = lp.g.tr_mul_vec(&z) + lp.a.tr_mul_vec(&y);
        if inf_norm(&r) <= 1e-14 {
            break;
        }
        // Project [z; y] onto the null space of H = [Gᵀ Aᵀ].
        let mut hmat = DMatrix::zeros(n, m + p);
        for (i, row) in (0..m).map(|i| (i, lp.g.row(i))) {
            for &(j, v) in row {
                hmat[(j, i)] = v;
            }
        }
        for (i, row) in (0..p).map(|i| (i, lp.a.row(i))) {
            for &(j, v) in row {
                hmat[(j, m + i)] = v;
            }
        }
        let svd = hmat.svd(true, true);
        let eps = 1e-12 * svd.singular_values.amax().max(1.0);
        let corr = svd.solve(&r, eps).ok()?;
        for i in 0..m {
            z[i] -= corr[i];
        }
        for i in 0..p {
            y[i] -= corr[m + i];
        }
        let norm = inf_norm(&z).max(inf_norm(&y));
        if !(norm > 1e-8) {
            return None;
        }
        z /= norm;
        y /= norm;
    }

    z.iter_mut().for_each(|v| *v = v.max(0.0));
    let r = lp.g.tr_mul_vec(&z) + lp.a.tr_mul_vec(&y);
    let ok = inf_norm(&r) <= 1e-10 && lp.h.dot(&z) + lp.b.dot(&y) <= -1e-10;
    ok.then(|| FarkasCertificate { z, y })
}

/// Degenerate case without inequality rows: the program reduces to linear
/// algebra on the equality constraints.
fn solve_equality_only(lp: &LpStandardForm, opts: &SolverOptions) -> LpSolution {
    let n = lp.num_vars();
    let p = lp.num_eq();
    let finish = |status: LpStatus,
                  x: DVector<f64>,
                  y: DVector<f64>,
                  ray: Option<DVector<f64>>,
                  farkas: Option<FarkasCertificate>| {
        let met = metrics(lp, &x, &y, &DVector::zeros(0));
        LpSolution {
            status,
            x,
            z: DVector::zeros(0),
            y,
            primal_objective: met.primal_objective,
            dual_objective: met.dual_objective,
            residuals: met.res,
            iterations: 0,
            ray,
            farkas,
        }
    };

    if p == 0 {
        let x = DVector::zeros(n);
        if inf_norm(&lp.c) == 0.0 {
            return finish(LpStatus::Optimal, x, DVector::zeros(0), None, None);
        }
        let ray = -&lp.c / inf_norm(&lp.c);
        return finish(LpStatus::Unbounded, x, DVector::zeros(0), Some(ray), None);
    }

    let a = lp.a.to_dense();
    let svd_a = a.clone().svd(true, true);
    let eps = 1e-12 * svd_a.singular_values.amax().max(1.0);
    let x = svd_a.solve(&lp.b, eps).expect("SVD solve");
    let r_b = lp.a.mul_vec(&x) - &lp.b;
    if inf_norm(&r_b) > opts.tol_feas * (1.0 + inf_norm(&lp.b)) {
        // Least-squares residual is a Farkas certificate: Aᵀ r = 0 and
        // b.r = -‖r‖² < 0.
        let y = &r_b / inf_norm(&r_b);
        let cert = FarkasCertificate { z: DVector::zeros(0), y: y.clone() };
        return finish(LpStatus::Infeasible, x, y, None, Some(cert));
    }

    // Stationarity: c + Aᵀy = 0 solvable iff c has no null-space component.
    let at = a.transpose();
    let svd_at = at.svd(true, true);
    let eps = 1e-12 * svd_at.singular_values.amax().max(1.0);
    let y = svd_at.solve(&(-&lp.c), eps).expect("SVD solve");
    let r = &lp.c + lp.a.tr_mul_vec(&y);
    if inf_norm(&r) <= 1e-10 * (1.0 + inf_norm(&lp.c)) {
        finish(LpStatus::Optimal, x, y, None, None)
    } else {
        // The residual lies in null(A) and strictly decreases the objective.
        let ray = -&r / inf_norm(&r);
        finish(LpStatus::Unbounded, x, y, Some(ray), None)
    }
}
