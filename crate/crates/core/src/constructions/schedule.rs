//! The driving schedule `T_0 = 1`, `T_{k+1} = T_k + sqrt(T_k)`.
//!
//! Each window `[T_k, T_{k+1}]` splits into `l_k = floor(T_k^{1/3})` cells
//! of width `γ_k = sqrt(T_k) / l_k`, with grid points `t_{k,l} = T_k + l
//! γ_k`. The schedule is usable from the first index `k_0` whose entire
//! tail (within the horizon) satisfies the validity inequalities: `l_k >=
//! 8 s` and `a_i γ_k >= (m_i + n_i)^2 log γ_k` for all factors — plus, in
//! the escape-fraction mode, the cell-count gaps around the per-factor
//! marks `q_k^j`.

use crate::latflow::SystemShape;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScheduleError {
    #[error("no valid k0 <= kmax = {kmax}: {detail}")]
    NoValidK0 { kmax: usize, detail: String },
    #[error("band half-width C = {c} is not below log gamma_k = {log_gamma}")]
    BandTooWide { c: f64, log_gamma: f64 },
    #[error("invalid schedule request: {0}")]
    BadRequest(String),
}

/// Construction selector. Mode II carries the per-factor escape fractions
/// `δ_i ∈ (0, δ)` with `Σ δ_i = δ <= 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Mode {
    I,
    II { deltas: Vec<f64> },
}

#[derive(Clone, Debug, Serialize)]
pub struct Schedule {
    pub shape: SystemShape,
    pub mode: Mode,
    pub kmax: usize,
    /// `T_0..T_{kmax+1}` inclusive.
    pub times: Vec<f64>,
    pub k0: usize,
}

impl Schedule {
    pub fn t(&self, k: usize) -> f64 {
        self.times[k]
    }

    pub fn l(&self, k: usize) -> usize {
        self.times[k].cbrt().floor() as usize
    }

    pub fn gamma(&self, k: usize) -> f64 {
        self.times[k].sqrt() / self.l(k) as f64
    }

    /// Grid point `t_{k,l} = T_k + l γ_k`. `t_{k, l_k}` lands on `T_{k+1}`
    /// up to float rounding; callers who need the window edge exactly use
    /// `t(k + 1)`.
    pub fn grid(&self, k: usize, l: usize) -> f64 {
        debug_assert!(l <= self.l(k));
        if l == 0 {
            self.times[k]
        } else if l == self.l(k) {
            self.times[k + 1]
        } else {
            self.times[k] + l as f64 * self.gamma(k)
        }
    }

    /// Mode II cell marks: `q_k^j` is the largest `l <= l_k` with
    /// `l γ_k <= (δ_1 + ... + δ_j) sqrt(T_k)`, i.e. `floor` of the
    /// cumulative fraction of `l_k` (clamped).
    pub fn q_mark(&self, k: usize, j: usize) -> usize {
        let Mode::II { deltas } = &self.mode else {
            panic!("q marks are a mode II notion")
        };
        if j == 0 {
            return 0;
        }
        let cum: f64 = deltas[..j].iter().sum();
        let lk = self.l(k);
        // l γ_k <= cum √T_k  <=>  l <= cum l_k ; tiny slack guards the
        // boundary case where cum * l_k is integral up to rounding.
        ((cum * lk as f64) + 1e-9).floor().min(lk as f64) as usize
    }

    /// The validity inequalities at index `k`.
    pub fn valid_at(&self, k: usize) -> bool {
        let s = self.shape.s();
        let lk = self.l(k);
        let gamma = self.gamma(k);
        let log_gamma = gamma.ln();
        if lk < 8 * s {
            return false;
        }
        for (i, &(m, n)) in self.shape.pairs.iter().enumerate() {
            let dsq = ((m + n) * (m + n)) as f64;
            if self.shape.weights[i] * gamma < dsq * log_gamma {
                return false;
            }
        }
        if let Mode::II { .. } = self.mode {
            let qs: Vec<usize> = (0..=s).map(|j| self.q_mark(k, j)).collect();
            if lk - qs[s] < 4 {
                return false;
            }
            for j in 0..s {
                if qs[j + 1] < qs[j] + 4 {
                    return false;
                }
            }
        }
        true
    }

    /// First k with `T_k >= target` (the "window at `T_k ≈ X`" rule).
    pub fn k_at(&self, target: f64) -> Option<usize> {
        self.times
            .iter()
            .position(|&t| t >= target)
            .filter(|&k| k <= self.kmax)
    }
}

/// Builds the schedule and scans for `k_0`: the least index from which the
/// validity inequalities hold for every `k' ∈ [k_0, kmax]`. No
/// monotonicity is assumed; the scan runs from the top down.
pub fn build_schedule(
    shape: &SystemShape,
    kmax: usize,
    mode: Mode,
) -> Result<Schedule, ScheduleError> {
    if let Mode::II { deltas } = &mode {
        if deltas.len() != shape.s() {
            return Err(ScheduleError::BadRequest(format!(
                "{} escape fractions for {} factors",
                deltas.len(),
                shape.s()
            )));
        }
        let total: f64 = deltas.iter().sum();
        if deltas.iter().any(|&d| d <= 0.0) {
            return Err(ScheduleError::BadRequest(
                "escape fractions must be positive".into(),
            ));
        }
        if shape.s() > 1 && deltas.iter().any(|&d| d >= total) {
            return Err(ScheduleError::BadRequest(
                "each delta_i must lie strictly below their sum".into(),
            ));
        }
        if total > 1.0 + 1e-12 {
            return Err(ScheduleError::BadRequest(format!(
                "escape fractions sum to {total} > 1"
            )));
        }
    }
    let mut times = Vec::with_capacity(kmax + 2);
    let mut t = 1.0f64;
    for _ in 0..=kmax + 1 {
        times.push(t);
        t += t.sqrt();
    }
    let mut schedule = Schedule {
        shape: shape.clone(),
        mode,
        kmax,
        times,
        k0: 0,
    };
    let mut k0: Option<usize> = None;
    for k in (1..=kmax).rev() {
        if schedule.valid_at(k) {
            k0 = Some(k);
        } else {
            break;
        }
    }
    match k0 {
        Some(k0) => {
            schedule.k0 = k0;
            Ok(schedule)
        }
        None => Err(ScheduleError::NoValidK0 {
            kmax,
            detail: format!(
                "validity fails at k = kmax = {kmax} (T = {:.3e})",
                schedule.t(kmax)
            ),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape11() -> SystemShape {
        SystemShape::unweighted(vec![(1, 1), (1, 1)]).unwrap()
    }

    #[test]
    fn recursion_start() {
        let s = build_schedule(&shape11(), 4000, Mode::I).unwrap();
        assert_eq!(s.t(0), 1.0);
        assert_eq!(s.t(1), 2.0);
        assert!((s.t(2) - (2.0 + 2.0_f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn grid_endpoints_are_window_edges() {
        let s = build_schedule(&shape11(), 4000, Mode::I).unwrap();
        let k = 3000;
        assert_eq!(s.grid(k, 0), s.t(k));
        assert_eq!(s.grid(k, s.l(k)), s.t(k + 1));
        let gamma = s.gamma(k);
        assert!((s.grid(k, 2) - (s.t(k) + 2.0 * gamma)).abs() < 1e-9);
    }

    #[test]
    fn k0_is_least_valid_suffix_start() {
        let s = build_schedule(&shape11(), 4000, Mode::I).unwrap();
        assert!(s.k0 > 1);
        assert!((s.k0..=s.kmax).all(|k| s.valid_at(k)));
        assert!(!s.valid_at(s.k0 - 1));
    }

    #[test]
    fn mode_ii_marks_follow_cumulative_fractions() {
        let mode = Mode::II {
            deltas: vec![0.25, 0.25],
        };
        let s = build_schedule(&shape11(), 4000, mode).unwrap();
        let k = s.kmax;
        let lk = s.l(k);
        let q1 = s.q_mark(k, 1);
        // defining property of the max: q1 γ <= 0.25 √T < (q1 + 1) γ
        let gamma = s.gamma(k);
        let target = 0.25 * s.t(k).sqrt();
        assert!(q1 as f64 * gamma <= target + 1e-6);
        assert!((q1 + 1) as f64 * gamma > target - 1e-6);
        assert_eq!(s.q_mark(k, 0), 0);
        assert!(s.q_mark(k, 2) <= lk);
    }

    #[test]
    fn no_k0_for_tight_horizon() {
        // At tiny kmax the windows have too few cells for 8s.
        let err = build_schedule(&shape11(), 3, Mode::I).unwrap_err();
        assert!(matches!(err, ScheduleError::NoValidK0 { .. }));
    }
}
