//! Brute-force LP oracle: enumerate candidate vertices (all bases formed by
//! the equality rows plus n - p active inequalities), keep the feasible
//! ones and take the best objective. Independent of the interior-point
//! solve path; usable up to a handful of variables.

use jamstress_core::lp::LpStandardForm;
use nalgebra::{DMatrix, DVector};

/// Minimum objective over the feasible vertices, or `None` when no feasible
/// vertex exists.
pub fn best_vertex_objective(lp: &LpStandardForm) -> Option<f64> {
    let n = lp.num_vars();
    let m = lp.num_ineq();
    let p = lp.num_eq();
    assert!(p <= n, "degenerate equality block");
    let k = n - p;
    if k > m {
        return None;
    }

    let mut best: Option<f64> = None;
    let mut combo: Vec<usize> = (0..k).collect();
    loop {
        // Solve for the vertex with the selected active set.
        let mut mat = DMatrix::zeros(n, n);
        let mut rhs = DVector::zeros(n);
        for (r, &i) in combo.iter().enumerate() {
            for &(j, v) in lp.g.row(i) {
                mat[(r, j)] = v;
            }
            rhs[r] = lp.h[i];
        }
        for i in 0..p {
            for &(j, v) in lp.a.row(i) {
                mat[(k + i, j)] = v;
            }
            rhs[k + i] = lp.b[i];
        }
        if let Some(x) = mat.lu().solve(&rhs) {
            let gx = lp.g.mul_vec(&x);
            let feasible = (0..m).all(|i| gx[i] <= lp.h[i] + 1e-9)
                && x.iter().all(|v| v.is_finite());
            if feasible {
                let obj = lp.c.dot(&x);
                best = Some(best.map_or(obj, |b: f64| b.min(obj)));
            }
        }

        // Next k-combination of 0..m in lexicographic order.
        let mut i = k;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if combo[i] != i + m - k {
                combo[i] += 1;
                for j in i + 1..k {
                    combo[j] = combo[j - 1] + 1;
                }
                break;
            }
        }
    }
}
