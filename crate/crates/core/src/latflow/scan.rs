//! Witness scans for the sets `Q_ε(θ)` and occupation fractions.

use super::minima::has_vector_below;
use super::{flowed_basis, LatticeError, MatrixTuple, SystemShape};
use nalgebra::DMatrix;
use serde::Serialize;

/// A certified solution of the Dirichlet-improvement system
/// `‖θ q − p‖^m < ε / Q`, `0 < ‖q‖^n <= Q`.
#[derive(Clone, Debug, Serialize)]
pub struct QWitness {
    /// Factor index when produced by a joint scan; 0 for single scans.
    pub factor: usize,
    pub p: Vec<i64>,
    pub q: Vec<i64>,
    /// Achieved `‖θ q − p‖` (sup norm).
    pub err_sup: f64,
    /// Achieved `‖q‖` (sup norm).
    pub q_sup: f64,
}

/// Largest integer `N` with `N^n <= cap`, robust to `powf` rounding.
fn nth_root_floor(cap: f64, n: usize) -> i64 {
    if cap < 1.0 {
        return 0;
    }
    let mut guess = cap.powf(1.0 / n as f64).floor() as i64;
    while ((guess + 1) as f64).powi(n as i32) <= cap {
        guess += 1;
    }
    while guess > 0 && (guess as f64).powi(n as i32) > cap {
        guess -= 1;
    }
    guess
}

/// Searches for a witness of `Q ∈ Q_ε(θ)`.
///
/// Scans every `q` with `‖q‖^n <= Q`; the nearest-integer vector to `θ q`
/// is the optimal `p` in the sup norm, so the scan is complete. Returns
/// the best witness (smallest error, then smallest and lexicographically
/// largest `q`) when it satisfies the strict inequality, `None` otherwise.
pub fn scan_q(
    theta: &DMatrix<f64>,
    eps: f64,
    cap_q: f64,
    budget: u64,
) -> Result<Option<QWitness>, LatticeError> {
    assert!(eps > 0.0, "epsilon must be positive");
    assert!(cap_q >= 1.0, "Q must be >= 1");
    let (m, n) = (theta.nrows(), theta.ncols());
    let bound = nth_root_floor(cap_q, n);
    if bound == 0 {
        return Ok(None);
    }
    let side = 2 * bound as u64 + 1;
    let cells = side.checked_pow(n as u32).unwrap_or(u64::MAX);
    if cells > budget {
        return Err(LatticeError::BudgetExceeded {
            visited: cells,
            budget,
            at_time: None,
        });
    }

    let mut best: Option<QWitness> = None;
    let mut q = vec![-bound; n];
    loop {
        if q.iter().any(|&c| c != 0) {
            let q_sup = q.iter().map(|c| c.abs()).max().unwrap() as f64;
            let mut p = vec![0i64; m];
            let mut err_sup = 0.0f64;
            for i in 0..m {
                let x: f64 = (0..n).map(|j| theta[(i, j)] * q[j] as f64).sum();
                let r = x.round();
                p[i] = r as i64;
                err_sup = err_sup.max((x - r).abs());
            }
            let better = match &best {
                None => true,
                Some(b) => {
                    (err_sup, q_sup) < (b.err_sup, b.q_sup)
                        || ((err_sup, q_sup) == (b.err_sup, b.q_sup) && q > b.q)
                }
            };
            if better {
                best = Some(QWitness {
                    factor: 0,
                    p,
                    q: q.clone(),
                    err_sup,
                    q_sup,
                });
            }
        }
        // odometer
        let mut carry = true;
        for c in q.iter_mut() {
            if *c < bound {
                *c += 1;
                carry = false;
                break;
            }
            *c = -bound;
        }
        if carry {
            break;
        }
    }
    Ok(best.filter(|w| w.err_sup.powi(m as i32) < eps / cap_q))
}

/// Riemann-sum estimate of the time fraction in `[0, T]` during which some
/// factor (optionally excluding `j`) admits a witness at scale `e^{a_i t}`.
///
/// Midpoint rule on a uniform grid with the given step; the acceptance
/// story is grid-refinement stability, not an analytic error bound.
pub fn occupation_joint(
    tuple: &MatrixTuple,
    shape: &SystemShape,
    eps: f64,
    horizon: f64,
    step: f64,
    exclude: Option<usize>,
    budget: u64,
) -> Result<f64, LatticeError> {
    assert!(step > 0.0 && step <= 0.1, "step must be in (0, 0.1]");
    assert!(horizon > 0.0);
    let cells = (horizon / step).round().max(1.0) as usize;
    let dt = horizon / cells as f64;
    let mut hits = 0usize;
    for k in 0..cells {
        let t = (k as f64 + 0.5) * dt;
        let mut inside = false;
        for i in 0..shape.s() {
            if Some(i) == exclude {
                continue;
            }
            let scale = (shape.weights[i] * t).exp();
            if scale < 1.0 {
                continue;
            }
            if scan_q(&tuple.entries[i], eps, scale, budget)?.is_some() {
                inside = true;
                break;
            }
        }
        if inside {
            hits += 1;
        }
    }
    Ok(hits as f64 / cells as f64)
}

/// Fraction of grid times `t ∈ [0, T]` with `λ_1(g_t u_θ Z^{m+n}) < r`
/// — the cusp-excursion proxy via Mahler's criterion.
pub fn cusp_occupation(
    theta: &DMatrix<f64>,
    m: usize,
    n: usize,
    r: f64,
    horizon: f64,
    step: f64,
    budget: u64,
) -> Result<f64, LatticeError> {
    assert!(r > 0.0 && r < 1.0, "threshold must be in (0, 1)");
    assert!(step > 0.0 && step <= 0.1, "step must be in (0, 0.1]");
    let cells = (horizon / step).round().max(1.0) as usize;
    let dt = horizon / cells as f64;
    let mut hits = 0usize;
    for k in 0..cells {
        let t = (k as f64 + 0.5) * dt;
        let basis = flowed_basis(theta, m, n, t);
        if has_vector_below(&basis, r, budget)? {
            hits += 1;
        }
    }
    Ok(hits as f64 / cells as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn zero_theta_has_trivial_witness() {
        let theta = dmatrix![0.0];
        let w = scan_q(&theta, 0.5, 10.0, 1_000_000).unwrap().unwrap();
        assert_eq!(w.q, vec![1]);
        assert_eq!(w.p, vec![0]);
        assert_eq!(w.err_sup, 0.0);
    }

    #[test]
    fn half_theta_witness_at_q2() {
        let theta = dmatrix![0.5];
        let w = scan_q(&theta, 0.6, 2.0, 1_000_000).unwrap().unwrap();
        assert_eq!(w.q, vec![2]);
        assert_eq!(w.p, vec![1]);
        assert_eq!(w.err_sup, 0.0);
    }

    #[test]
    fn golden_ratio_has_no_small_witness() {
        let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
        let theta = dmatrix![phi];
        assert!(scan_q(&theta, 0.1, 10.0, 1_000_000).unwrap().is_none());
    }

    #[test]
    fn nth_root_floor_is_exact_on_cubes() {
        assert_eq!(nth_root_floor(8.0, 3), 2);
        assert_eq!(nth_root_floor(7.99, 3), 1);
        assert_eq!(nth_root_floor(2.0, 1), 2);
        assert_eq!(nth_root_floor(0.5, 2), 0);
    }
}
