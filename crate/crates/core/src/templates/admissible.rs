//! Slope sets `Z(j)` and admissibility of point pairs.

use crate::exact::{rat, Rat, Slope};
use num_rational::Ratio;
use serde::Serialize;

/// `Z(j) = { k1/m − k2/n : 0 <= k1 <= m, 0 <= k2 <= n, k1 + k2 = j }`,
/// sorted decreasing (the values are pairwise distinct).
pub fn z_set(m: usize, n: usize, j: usize) -> Vec<Slope> {
    assert!(j >= 1 && j <= m + n, "need 1 <= j <= m+n");
    let (m, n, j) = (m as i64, n as i64, j as i64);
    let mut out = Vec::new();
    for k1 in 0..=m.min(j) {
        let k2 = j - k1;
        if k2 >= 0 && k2 <= n {
            out.push(Ratio::new(k1, m) - Ratio::new(k2, n));
        }
    }
    out.sort();
    out.reverse();
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    /// The three point conditions hold.
    Admissible,
    /// The point conditions fail but the sufficient width bound
    /// `t'' − t' >= (m+n)^2 max(ε', ε'')` holds, which subsumes them.
    AdmissibleByWidthBound,
    Inadmissible,
}

/// Outcome of [`check_admissible`], with the individual conditions.
#[derive(Clone, Debug, Serialize)]
pub struct AdmissibilityReport {
    pub cond_slope_range: bool,
    pub cond_balanced: bool,
    pub cond_clearance: bool,
    pub by_width_bound: bool,
    pub verdict: Verdict,
    pub reason: Option<String>,
}

impl AdmissibilityReport {
    pub fn is_admissible(&self) -> bool {
        self.verdict != Verdict::Inadmissible
    }
}

/// Decides admissibility of the pair `((t', ε'), (t'', ε''))` for an
/// `m × n` template, in exact rational arithmetic on the inputs.
///
/// The three conditions: (1) `−Δt/m <= Δε <= Δt/n`; (2) `Δε >= −(n−1)/(2n)
/// Δt` when `m = 1` and `Δε <= (m−1)/(2m) Δt` when `n = 1`; (3) `(n−1)(Δt/n
/// − Δε) >= (m+n) ε'` or `(m−1)(Δt/m + Δε) >= (m+n) ε''`. For `m = n = 1`
/// condition (2) is read as vacuous — its literal form would force `Δε = 0`,
/// which the scheduled constructions contradict, and the width bound governs
/// that case. The width bound `Δt >= (m+n)^2 max(ε', ε'')` is always
/// reported and accepted as sufficient on its own.
pub fn check_admissible(
    p1: (f64, f64),
    p2: (f64, f64),
    m: usize,
    n: usize,
) -> AdmissibilityReport {
    let (t0, e0) = p1;
    let (t1, e1) = p2;
    assert!(t1 > t0, "need t'' > t'");
    assert!(e0 >= 0.0 && e1 >= 0.0, "heights must be nonnegative");
    let (mq, nq) = (crate::exact::rat_int(m as i64), crate::exact::rat_int(n as i64));
    let dt = rat(t1) - rat(t0);
    let de = rat(e1) - rat(e0);
    let (e0, e1) = (rat(p1.1), rat(p2.1));

    let cond_slope_range = -&dt / &mq <= de && de <= &dt / &nq;

    let cond_balanced = if m == 1 && n == 1 {
        true
    } else {
        let lower_ok = m != 1 || {
            let bound = -Rat::new(((n - 1) as i64).into(), (2 * n as i64).into()) * &dt;
            de >= bound
        };
        let upper_ok = n != 1 || {
            let bound = Rat::new(((m - 1) as i64).into(), (2 * m as i64).into()) * &dt;
            de <= bound
        };
        lower_ok && upper_ok
    };

    let one = crate::exact::rat_int(1);
    let dsum = &mq + &nq;
    let left = (&nq - &one) * (&dt / &nq - &de) >= &dsum * &e0;
    let right = (&mq - &one) * (&dt / &mq + &de) >= &dsum * &e1;
    let cond_clearance = left || right;

    let maxe = if e0 > e1 { e0 } else { e1 };
    let by_width_bound = dt >= &dsum * &dsum * maxe;

    let (verdict, reason) = if cond_slope_range && cond_balanced && cond_clearance {
        (Verdict::Admissible, None)
    } else if by_width_bound {
        (Verdict::AdmissibleByWidthBound, None)
    } else {
        let which = if !cond_slope_range {
            "slope-range condition fails (Δε outside [−Δt/m, Δt/n])"
        } else if !cond_balanced {
            "balance condition fails for a thin factor"
        } else {
            "clearance condition fails (interval too short for the heights)"
        };
        (Verdict::Inadmissible, Some(which.to_string()))
    };

    AdmissibilityReport {
        cond_slope_range,
        cond_balanced,
        cond_clearance,
        by_width_bound,
        verdict,
        reason,
    }
}
