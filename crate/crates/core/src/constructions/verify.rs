//! Window-by-window verification of the constructed tuples.
//!
//! All quantities are measured exactly (rational window averages, exact
//! piecewise-linear envelopes and band measures) and reported next to
//! their targets; nothing is extrapolated to the limit.

use super::build::{dip_index, TemplateTuple};
use super::schedule::{Mode, Schedule, ScheduleError};
use crate::exact::{format_rat, rat, to_f64, Rat};
use crate::pwl::PwLinear;
use crate::templates::{min_envelope, window_average, TemplateError};
use num_traits::Signed;
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct FactorWindow {
    pub factor: usize,
    /// Exact measured window average, rendered `p/q`.
    pub delta_exact: String,
    pub delta: f64,
    pub target: f64,
    pub gap: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessCheck {
    pub label: String,
    pub time: f64,
    pub value: f64,
    pub exact_zero: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct BandOccupation {
    /// Excluded factor, if any.
    pub exclude: Option<usize>,
    pub measured: f64,
    pub target: f64,
    pub gap: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct WindowReport {
    pub k: usize,
    pub t_k: f64,
    pub gamma_k: f64,
    pub log_gamma_k: f64,
    pub factors: Vec<FactorWindow>,
    pub envelope_max: f64,
    /// `−log γ_k`.
    pub envelope_bound: f64,
    pub envelope_ok: bool,
    pub witnesses: Vec<WitnessCheck>,
    pub band_occupations: Vec<BandOccupation>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub mode: String,
    pub windows: Vec<WindowReport>,
}

impl VerificationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Rows `k, T_k, gamma_k, factor, delta_window, target, gap,
    /// envelope_max, bound`; band occupations appear as pseudo-factors.
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("k,T_k,gamma_k,factor,delta_window,target,gap,envelope_max,bound\n");
        for w in &self.windows {
            let head = format!("{},{:.11e},{:.11e}", w.k, w.t_k, w.gamma_k);
            let tail = format!("{:.11e},{:.11e}", w.envelope_max, w.envelope_bound);
            for f in &w.factors {
                out.push_str(&format!(
                    "{head},{},{:.11e},{:.11e},{:.11e},{tail}\n",
                    f.factor + 1,
                    f.delta,
                    f.target,
                    f.gap
                ));
            }
            for b in &w.band_occupations {
                let label = match b.exclude {
                    Some(j) => format!("band-excl-{}", j + 1),
                    None => "band-all".to_string(),
                };
                out.push_str(&format!(
                    "{head},{label},{:.11e},{:.11e},{:.11e},{tail}\n",
                    b.measured, b.target, b.gap
                ));
            }
        }
        out
    }
}

fn factor_windows(
    tuple: &TemplateTuple,
    schedule: &Schedule,
    k: usize,
    target_for: impl Fn(usize) -> Rat,
) -> Result<Vec<FactorWindow>, TemplateError> {
    let mut out = Vec::with_capacity(tuple.factors.len());
    for (i, template) in tuple.factors.iter().enumerate() {
        let a = tuple.shape.weights[i];
        let (exact, approx) = window_average(template, a * schedule.t(k), a * schedule.t(k + 1))?;
        let target = target_for(i);
        let gap = (&exact - &target).abs();
        out.push(FactorWindow {
            factor: i,
            delta_exact: format_rat(&exact),
            delta: approx,
            target: to_f64(&target),
            gap: to_f64(&gap),
        });
    }
    Ok(out)
}

fn window_envelope(tuple: &TemplateTuple, schedule: &Schedule, k: usize) -> PwLinear {
    let parts: Vec<(&crate::templates::Template, f64)> = tuple
        .factors
        .iter()
        .zip(&tuple.shape.weights)
        .map(|(t, &a)| (t, a))
        .collect();
    min_envelope(&parts, (schedule.t(k), schedule.t(k + 1)))
}

/// Verifies Construction-I windows: per-factor averages against
/// `m_1 n_1 − b_1` and `m_i n_i`, the envelope bound `−log γ_k`, and the
/// two families of exact witness identities at the dip/clear points.
pub fn verify_construction_i(
    tuple: &TemplateTuple,
    schedule: &Schedule,
    ks: &[usize],
) -> Result<VerificationReport, TemplateError> {
    let s = tuple.shape.s();
    let mut windows = Vec::with_capacity(ks.len());
    for &k in ks {
        let factors = factor_windows(tuple, schedule, k, |i| {
            let (m, n) = tuple.shape.pairs[i];
            let mn = crate::exact::rat_int((m * n) as i64);
            if i == 0 {
                mn - tuple.shape.b(0)
            } else {
                mn
            }
        })?;

        let envelope = window_envelope(tuple, schedule, k);
        let (dom_lo, dom_hi) = {
            let (a, b) = envelope.domain();
            (a.clone(), b.clone())
        };
        let (env_max, _) = envelope.max_on(&dom_lo, &dom_hi);
        let bound = -schedule.gamma(k).ln();
        let envelope_ok = env_max <= rat(bound);

        let mut witnesses = Vec::new();
        // all covering factors are clear of the cusp at t_{k, 4s}
        let t_clear = schedule.grid(k, 4 * s);
        let min_clear = (1..s)
            .map(|i| tuple.factors[i].value_at(tuple.shape.weights[i] * t_clear, 0))
            .fold(f64::INFINITY, f64::min);
        witnesses.push(WitnessCheck {
            label: "min over i != 1 at clear point".into(),
            time: t_clear,
            value: min_clear,
            exact_zero: min_clear == 0.0,
        });
        // for each covering factor j, the others are clear at its dip point
        for j in 1..s {
            let t_dip = schedule.grid(k, dip_index(j));
            let min_others = (0..s)
                .filter(|&i| i != j)
                .map(|i| tuple.factors[i].value_at(tuple.shape.weights[i] * t_dip, 0))
                .fold(f64::INFINITY, f64::min);
            witnesses.push(WitnessCheck {
                label: format!("min over i != {} at dip point", j + 1),
                time: t_dip,
                value: min_others,
                exact_zero: min_others == 0.0,
            });
        }

        windows.push(WindowReport {
            k,
            t_k: schedule.t(k),
            gamma_k: schedule.gamma(k),
            log_gamma_k: schedule.gamma(k).ln(),
            factors,
            envelope_max: to_f64(&env_max),
            envelope_bound: bound,
            envelope_ok,
            witnesses,
            band_occupations: Vec::new(),
        });
    }
    Ok(VerificationReport {
        mode: "I".into(),
        windows,
    })
}

/// Verifies Construction-II windows: per-factor averages against
/// `m_j n_j − δ_j b_j` and the exact band occupations against
/// `1 − Σ_{i≠j} δ_i` (per excluded factor) and `1 − δ` (all factors).
pub fn verify_construction_ii(
    tuple: &TemplateTuple,
    schedule: &Schedule,
    ks: &[usize],
    band_half_width: f64,
) -> Result<VerificationReport, VerifyIiError> {
    let Mode::II { deltas } = &schedule.mode else {
        return Err(VerifyIiError::Schedule(ScheduleError::BadRequest(
            "schedule is not in mode II".into(),
        )));
    };
    assert!(band_half_width > 0.0);
    for &k in ks {
        let log_gamma = schedule.gamma(k).ln();
        if band_half_width >= log_gamma {
            return Err(VerifyIiError::Schedule(ScheduleError::BandTooWide {
                c: band_half_width,
                log_gamma,
            }));
        }
    }
    let s = tuple.shape.s();
    let total_delta: f64 = deltas.iter().sum();
    let mut windows = Vec::with_capacity(ks.len());
    for &k in ks {
        let factors = factor_windows(tuple, schedule, k, |i| {
            let (m, n) = tuple.shape.pairs[i];
            crate::exact::rat_int((m * n) as i64) - rat(deltas[i]) * tuple.shape.b(i)
        })?;

        let band = rat(band_half_width);
        let mut band_occupations = Vec::new();
        let measure_for = |exclude: Option<usize>| -> f64 {
            let parts: Vec<(&crate::templates::Template, f64)> = (0..s)
                .filter(|&i| Some(i) != exclude)
                .map(|i| (&tuple.factors[i], tuple.shape.weights[i]))
                .collect();
            let env = min_envelope(&parts, (schedule.t(k), schedule.t(k + 1)));
            let (ta, tb) = {
                let (a, b) = env.domain();
                (a.clone(), b.clone())
            };
            let len = &tb - &ta;
            let inside = env.measure_in_band(&ta, &tb, &(-band.clone()), &band);
            to_f64(&(inside / len))
        };
        let all = measure_for(None);
        band_occupations.push(BandOccupation {
            exclude: None,
            measured: all,
            target: 1.0 - total_delta,
            gap: (all - (1.0 - total_delta)).abs(),
        });
        for (j, dj) in deltas.iter().enumerate() {
            let measured = measure_for(Some(j));
            let target = 1.0 - (total_delta - dj);
            band_occupations.push(BandOccupation {
                exclude: Some(j),
                measured,
                target,
                gap: (measured - target).abs(),
            });
        }

        let envelope = window_envelope(tuple, schedule, k);
        let (env_max, _) = {
            let (a, b) = envelope.domain();
            let (a, b) = (a.clone(), b.clone());
            envelope.max_on(&a, &b)
        };
        let bound = -schedule.gamma(k).ln();
        windows.push(WindowReport {
            k,
            t_k: schedule.t(k),
            gamma_k: schedule.gamma(k),
            log_gamma_k: schedule.gamma(k).ln(),
            factors,
            envelope_max: to_f64(&env_max),
            envelope_bound: bound,
            envelope_ok: env_max <= rat(bound),
            witnesses: Vec::new(),
            band_occupations,
        });
    }
    Ok(VerificationReport {
        mode: "II".into(),
        windows,
    })
}

#[derive(Debug, thiserror::Error)]
pub enum VerifyIiError {
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Template(#[from] TemplateError),
}
