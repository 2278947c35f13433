//! TemplateTuple generation for the two scheduled constructions.
//!
//! Construction I makes the first factor carry an essential excursion
//! (rate `m_1 n_1 − b_1`) while every other factor stays trivial except
//! for one short covering excursion per window; Construction II gives
//! factor `j` an excursion filling a `δ_j` fraction of each window.
//!
//! Factor structure by shape:
//!
//! * `m + n >= 3`: the scheduled point chains verbatim — junction heights
//!   anchor at `log γ_k`, where the second coordinate meets the first, so
//!   concatenation satisfies the template conditions.
//! * `m + n = 2`: chains through positive heights are *not* templates (the
//!   first coordinate would turn concavely while separated from the
//!   second, which the convexity condition forbids: a turning point of
//!   `L_1` must touch `L_2`, and for a zero-sum pair that means height 0).
//!   Each excursion therefore becomes a single vee between its zero
//!   anchors, and the distinguished factor becomes a chain of vees
//!   between consecutive zero-dip anchor points. Window averages,
//!   envelope bounds and witness identities are unchanged: a vee splits a
//!   window into equal descent and ascent time, giving the same rate
//!   `1/2 = m n − b` per unit length, and its depth along the window
//!   dwarfs `log γ_k`.

use super::schedule::{Mode, Schedule};
use crate::latflow::SystemShape;
use crate::templates::{standard_template_seq, trivial_on, Template, TemplateError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BuildError {
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error("window range [{0}, {1}] must sit inside [k0 = {2}, kmax = {3}]")]
    BadRange(usize, usize, usize, usize),
    #[error("constructions need at least two factors")]
    NeedTwoFactors,
    #[error("schedule mode does not match the requested construction")]
    WrongMode,
}

/// One template per factor, each covering the requested windows.
#[derive(Clone, Debug)]
pub struct TemplateTuple {
    pub shape: SystemShape,
    pub factors: Vec<Template>,
}

/// Time-ordered pieces awaiting assembly.
enum Piece {
    Trivial { from: f64, to: f64 },
    Chain { points: Vec<(f64, f64)> },
}

fn assemble(m: usize, n: usize, pieces: Vec<Piece>) -> Result<Template, TemplateError> {
    let mut parts = Vec::with_capacity(pieces.len());
    for piece in pieces {
        match piece {
            Piece::Trivial { from, to } => parts.push(trivial_on(m, n, from, to)),
            Piece::Chain { points } => parts.push(standard_template_seq(&points, m, n)?),
        }
    }
    Template::concat(parts)
}

/// Builds the Construction-I tuple covering windows `k ∈ [k_lo, k_hi]`.
///
/// With `k_lo = k0` the templates start at time 0 with the trivial head
/// and the bridge block; with `k_lo > k0` they start mid-chain at the
/// window edge (the distinguished `m + n = 2` factor reaches back to its
/// last zero anchor before the range).
pub fn construction_i(
    shape: &SystemShape,
    schedule: &Schedule,
    k_lo: usize,
    k_hi: usize,
) -> Result<TemplateTuple, BuildError> {
    if schedule.mode != Mode::I {
        return Err(BuildError::WrongMode);
    }
    let s = shape.s();
    if s < 2 {
        return Err(BuildError::NeedTwoFactors);
    }
    if k_lo < schedule.k0 || k_hi < k_lo || k_hi > schedule.kmax {
        return Err(BuildError::BadRange(k_lo, k_hi, schedule.k0, schedule.kmax));
    }
    let mut factors = Vec::with_capacity(s);
    for i in 0..s {
        let (m, n) = shape.pairs[i];
        let a = shape.weights[i];
        let template = if i == 0 {
            if m + n == 2 {
                lead_factor_vee_chain(schedule, s, a, k_lo, k_hi)?
            } else {
                lead_factor_literal(schedule, s, a, m, n, k_lo, k_hi)?
            }
        } else {
            covering_factor(schedule, i, a, m, n, k_lo, k_hi)?
        };
        factors.push(template);
    }
    Ok(TemplateTuple {
        shape: shape.clone(),
        factors,
    })
}

/// Dip anchor of the distinguished factor paired with covering factor
/// `i >= 1` in window `k`: grid index `4(i−1) + 2`.
pub(crate) fn dip_index(i: usize) -> usize {
    4 * (i - 1) + 2
}

/// Covering excursion of factor `i >= 1` in window `k`:
/// grid cells `[4(i−1), 4i]`.
pub(crate) fn excursion_range(i: usize) -> (usize, usize) {
    (4 * (i - 1), 4 * i)
}

fn lead_factor_literal(
    schedule: &Schedule,
    s: usize,
    a: f64,
    m: usize,
    n: usize,
    k_lo: usize,
    k_hi: usize,
) -> Result<Template, BuildError> {
    let mut points: Vec<(f64, f64)> = Vec::new();
    let mut pieces: Vec<Piece> = Vec::new();
    let first_chain_window = if k_lo == schedule.k0 {
        let t0 = schedule.t(schedule.k0);
        pieces.push(Piece::Trivial {
            from: 0.0,
            to: a * t0,
        });
        // bridge block: height 0 up to log γ_{k0+1}
        points.push((a * t0, 0.0));
        points.push((a * schedule.t(schedule.k0 + 1), schedule.gamma(schedule.k0 + 1).ln()));
        schedule.k0 + 1
    } else {
        points.push((a * schedule.t(k_lo), schedule.gamma(k_lo).ln()));
        k_lo
    };
    for k in first_chain_window..=k_hi {
        let lk = schedule.l(k);
        let lg = schedule.gamma(k).ln();
        let lg_next = schedule.gamma(k + 1).ln();
        for l in 1..=lk {
            let t = a * schedule.grid(k, l);
            let h = if l == lk {
                lg_next
            } else if l % 4 == 2 && l + 6 <= 4 * s {
                0.0
            } else {
                lg
            };
            points.push((t, h));
        }
    }
    pieces.push(Piece::Chain { points });
    Ok(assemble(m, n, pieces)?)
}

/// Zero-anchor times of the distinguished `m + n = 2` factor in window
/// `k >= k0 + 1`: the dip points `t_{k, 4l+2}`, `0 <= l <= s−2`.
fn window_spikes(schedule: &Schedule, s: usize, k: usize) -> Vec<f64> {
    (0..=s - 2).map(|l| schedule.grid(k, 4 * l + 2)).collect()
}

fn lead_factor_vee_chain(
    schedule: &Schedule,
    s: usize,
    a: f64,
    k_lo: usize,
    k_hi: usize,
) -> Result<Template, BuildError> {
    let mut pieces: Vec<Piece> = Vec::new();
    let mut anchors: Vec<f64> = Vec::new();
    let chain_from;
    if k_lo == schedule.k0 {
        pieces.push(Piece::Trivial {
            from: 0.0,
            to: a * schedule.t(schedule.k0),
        });
        anchors.push(schedule.t(schedule.k0));
        chain_from = schedule.k0 + 1;
    } else if k_lo == schedule.k0 + 1 {
        anchors.push(schedule.t(schedule.k0));
        chain_from = k_lo;
    } else {
        // last zero anchor of the previous window
        anchors.push(*window_spikes(schedule, s, k_lo - 1).last().unwrap());
        chain_from = k_lo;
    }
    for k in chain_from..=k_hi {
        anchors.extend(window_spikes(schedule, s, k));
    }
    // first anchor of the window after the range, so the final vee covers
    // the last window completely
    anchors.push(window_spikes(schedule, s, k_hi + 1)[0]);
    let points: Vec<(f64, f64)> = anchors.into_iter().map(|t| (a * t, 0.0)).collect();
    pieces.push(Piece::Chain { points });
    Ok(assemble(1, 1, pieces)?)
}

fn covering_factor(
    schedule: &Schedule,
    i: usize,
    a: f64,
    m: usize,
    n: usize,
    k_lo: usize,
    k_hi: usize,
) -> Result<Template, BuildError> {
    let (e_lo, e_hi) = excursion_range(i);
    let mut pieces: Vec<Piece> = Vec::new();
    let mut cursor = if k_lo == schedule.k0 {
        0.0
    } else {
        a * schedule.t(k_lo)
    };
    // no excursion in the bridge window k0 itself
    let first_window = k_lo.max(schedule.k0 + 1);
    for k in first_window..=k_hi {
        let start = a * schedule.grid(k, e_lo);
        let end = a * schedule.grid(k, e_hi);
        if start > cursor {
            pieces.push(Piece::Trivial {
                from: cursor,
                to: start,
            });
        }
        let lg = schedule.gamma(k).ln();
        let points: Vec<(f64, f64)> = if m + n == 2 {
            vec![(start, 0.0), (end, 0.0)]
        } else {
            (e_lo..=e_hi)
                .map(|l| {
                    let t = a * schedule.grid(k, l);
                    let h = if l == e_lo || l == e_hi { 0.0 } else { lg };
                    (t, h)
                })
                .collect()
        };
        pieces.push(Piece::Chain { points });
        cursor = end;
    }
    let domain_end = a * schedule.t(k_hi + 1);
    if domain_end > cursor {
        pieces.push(Piece::Trivial {
            from: cursor,
            to: domain_end,
        });
    }
    Ok(assemble(m, n, pieces)?)
}

/// Builds the Construction-II tuple covering windows `k ∈ [k_lo, k_hi]`.
///
/// Factor `i` is trivial outside its per-window excursion over the grid
/// cells `[q_k^{i−1}, q_k^i]`; there is no bridge block.
pub fn construction_ii(
    shape: &SystemShape,
    schedule: &Schedule,
    k_lo: usize,
    k_hi: usize,
) -> Result<TemplateTuple, BuildError> {
    let Mode::II { .. } = schedule.mode else {
        return Err(BuildError::WrongMode);
    };
    let s = shape.s();
    if s < 2 {
        return Err(BuildError::NeedTwoFactors);
    }
    if k_lo < schedule.k0 || k_hi < k_lo || k_hi > schedule.kmax {
        return Err(BuildError::BadRange(k_lo, k_hi, schedule.k0, schedule.kmax));
    }
    let mut factors = Vec::with_capacity(s);
    for i in 0..s {
        let (m, n) = shape.pairs[i];
        let a = shape.weights[i];
        let mut pieces: Vec<Piece> = Vec::new();
        let mut cursor = if k_lo == schedule.k0 {
            0.0
        } else {
            a * schedule.t(k_lo)
        };
        for k in k_lo..=k_hi {
            let q_lo = schedule.q_mark(k, i);
            let q_hi = schedule.q_mark(k, i + 1);
            let start = a * schedule.grid(k, q_lo);
            let end = a * schedule.grid(k, q_hi);
            if start > cursor {
                pieces.push(Piece::Trivial {
                    from: cursor,
                    to: start,
                });
            }
            let lg = schedule.gamma(k).ln();
            let points: Vec<(f64, f64)> = if m + n == 2 {
                vec![(start, 0.0), (end, 0.0)]
            } else {
                (q_lo..=q_hi)
                    .map(|l| {
                        let t = a * schedule.grid(k, l);
                        let h = if l == q_lo || l == q_hi { 0.0 } else { lg };
                        (t, h)
                    })
                    .collect()
            };
            pieces.push(Piece::Chain { points });
            cursor = end;
        }
        let domain_end = a * schedule.t(k_hi + 1);
        if domain_end > cursor {
            pieces.push(Piece::Trivial {
                from: cursor,
                to: domain_end,
            });
        }
        factors.push(assemble(m, n, pieces)?);
    }
    Ok(TemplateTuple {
        shape: shape.clone(),
        factors,
    })
}
