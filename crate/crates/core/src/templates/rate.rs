//! Slope-class decompositions and average contraction rates.
//!
//! On each segment the coordinates split into maximal runs that coincide
//! throughout the segment. A run `I` with slope sum `σ_I` resolves into
//! integers `k1 = (σ_I + |I|/n) · mn/(m+n)` and `k2 = |I| − k1` (the
//! expanding/contracting multiplicities of the corresponding sublattice
//! jump data); per segment they total `m` and `n`. The contraction rate of
//! a segment with classes `I_1 < ... < I_p` ordered by value is
//!
//! ```text
//! δ = Σ_q k2(I_q) · Σ_{q' <= q} k1(I_{q'})
//! ```
//!
//! an integer in `[0, mn]`. This reproduces every anchor the calculus
//! pins: the trivial template has rate `mn`, an eternal descent of `L_1`
//! has rate `mn − m`, and standard blocks average to `mn − mn/(m+n)` up to
//! `O(max(ε)/Δt)`. Window averages are length-weighted and computed in
//! exact rational arithmetic over the (dyadic) breakpoint times.

use super::{Template, TemplateError};
use crate::exact::{rat, rat_int, Rat, Slope};
use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

/// One equivalence class of coordinates on a segment.
#[derive(Clone, Debug, Serialize)]
pub struct SlopeClass {
    /// Coordinate range `[lo, hi]`, inclusive, bottom-to-top by value.
    pub lo: usize,
    pub hi: usize,
    /// Exact slope sum over the class.
    #[serde(skip)]
    pub slope_sum: Slope,
    pub k1: i64,
    pub k2: i64,
}

impl SlopeClass {
    /// Number of coordinates in the class.
    pub fn size(&self) -> usize {
        self.hi - self.lo + 1
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SlopeClassDecomposition {
    pub segment: usize,
    pub classes: Vec<SlopeClass>,
}

/// Splits a segment into classes of coordinates equal throughout it.
///
/// Coordinates are sorted, so classes are consecutive index intervals;
/// two neighbours belong together iff their values agree within the
/// template tolerance at both segment endpoints.
pub fn class_decomposition(
    template: &Template,
    segment: usize,
) -> Result<SlopeClassDecomposition, TemplateError> {
    classes_with_eta(template, segment, template.eta())
}

/// `eta` is hoisted out so whole-template sweeps do not rescan every
/// value row per segment.
fn classes_with_eta(
    template: &Template,
    segment: usize,
    eta: f64,
) -> Result<SlopeClassDecomposition, TemplateError> {
    let d = template.dim();
    let (m, n) = (template.m as i64, template.n as i64);
    let left = &template.values[segment];
    let right = &template.values[segment + 1];
    let tied = |j: usize| -> bool {
        (left[j + 1] - left[j]).abs() <= eta && (right[j + 1] - right[j]).abs() <= eta
    };

    let mut classes = Vec::new();
    let mut lo = 0usize;
    for j in 0..d {
        if j + 1 < d && tied(j) {
            continue;
        }
        let hi = j;
        let slope_sum: Slope = template.slopes[segment][lo..=hi]
            .iter()
            .fold(Ratio::zero(), |a, s| a + s);
        let size = (hi - lo + 1) as i64;
        // k1/m − k2/n = σ, k1 + k2 = |I|  =>  k1 = (σ + |I|/n) mn/(m+n)
        let k1_exact = (slope_sum + Ratio::new(size, n)) * Ratio::new(m * n, m + n);
        if !k1_exact.is_integer() {
            return Err(TemplateError::NonIntegerClassSlope {
                segment,
                detail: format!(
                    "class {lo}..={hi} slope sum {slope_sum} gives k1 = {k1_exact}"
                ),
            });
        }
        let k1 = k1_exact.to_integer();
        let k2 = size - k1;
        if k1 < 0 || k2 < 0 {
            return Err(TemplateError::NonIntegerClassSlope {
                segment,
                detail: format!("class {lo}..={hi} gives negative multiplicities ({k1}, {k2})"),
            });
        }
        classes.push(SlopeClass {
            lo,
            hi,
            slope_sum,
            k1,
            k2,
        });
        lo = j + 1;
    }

    let sum1: i64 = classes.iter().map(|c| c.k1).sum();
    let sum2: i64 = classes.iter().map(|c| c.k2).sum();
    if sum1 != m || sum2 != n {
        return Err(TemplateError::NonIntegerClassSlope {
            segment,
            detail: format!("class totals ({sum1}, {sum2}) != ({m}, {n})"),
        });
    }
    Ok(SlopeClassDecomposition { segment, classes })
}

fn segment_delta(decomp: &SlopeClassDecomposition) -> i64 {
    let mut prefix = 0i64;
    let mut delta = 0i64;
    for class in &decomp.classes {
        prefix += class.k1;
        delta += class.k2 * prefix;
    }
    delta
}

#[derive(Clone, Debug, Serialize)]
pub struct SegmentRate {
    pub t0: f64,
    pub t1: f64,
    pub delta: i64,
}

/// Per-segment contraction rates of a template.
#[derive(Clone, Debug, Serialize)]
pub struct RateProfile {
    pub m: usize,
    pub n: usize,
    pub segments: Vec<SegmentRate>,
}

impl RateProfile {
    /// Exact length-weighted average over `[a, b]` (inside the domain).
    pub fn window_average(&self, a: f64, b: f64) -> Rat {
        assert!(a < b, "empty window");
        let first = &self.segments[0];
        let last = &self.segments[self.segments.len() - 1];
        assert!(
            a >= first.t0 && b <= last.t1,
            "window [{a}, {b}] outside domain [{}, {}]",
            first.t0,
            last.t1
        );
        let (ra, rb) = (rat(a), rat(b));
        let mut integral = Rat::zero();
        for seg in &self.segments {
            if seg.t1 <= a || seg.t0 >= b {
                continue;
            }
            let lo = rat(seg.t0.max(a));
            let hi = rat(seg.t1.min(b));
            integral += crate::exact::rat_int(seg.delta) * (hi - lo);
        }
        integral / (rb - ra)
    }
}

/// Contraction rate of every segment.
pub fn contraction_rate(template: &Template) -> Result<RateProfile, TemplateError> {
    let eta = template.eta();
    let mut segments = Vec::with_capacity(template.segments());
    for seg in 0..template.segments() {
        let delta = segment_delta(&classes_with_eta(template, seg, eta)?);
        let mn = (template.m * template.n) as i64;
        debug_assert!((0..=mn).contains(&delta), "rate {delta} outside [0, {mn}]");
        segments.push(SegmentRate {
            t0: template.breakpoints[seg],
            t1: template.breakpoints[seg + 1],
            delta,
        });
    }
    Ok(RateProfile {
        m: template.m,
        n: template.n,
        segments,
    })
}

/// Exact average contraction rate `Δ(L, [a, b])`.
pub fn average_contraction(template: &Template, a: f64, b: f64) -> Result<Rat, TemplateError> {
    Ok(contraction_rate(template)?.window_average(a, b))
}

/// Convenience: exact window average as `(Rat, f64)`.
pub fn window_average(template: &Template, a: f64, b: f64) -> Result<(Rat, f64), TemplateError> {
    let r = average_contraction(template, a, b)?;
    let f = r.to_f64().unwrap_or(f64::NAN);
    Ok((r, f))
}

/// Finite-horizon stand-in for the lower average contraction rate.
#[derive(Clone, Debug, Serialize)]
pub struct LowerAverage {
    /// Minimum of `Δ(L, [t_0, T'])` over the probe grid.
    #[serde(serialize_with = "ser_rat")]
    pub value: Rat,
    /// Where the minimum was attained.
    pub at: f64,
    /// Breakpoint-aligned probe grid in `[φT, T]`.
    pub grid: Vec<f64>,
}

fn ser_rat<S: serde::Serializer>(r: &Rat, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&crate::exact::format_rat(r))
}

/// Minimum of `Δ(L, [t_0, T'])` over all breakpoints `T'` in `[φT, T]`
/// (plus the window ends). Callers refine by raising the horizon.
pub fn lower_average_estimate(
    template: &Template,
    horizon: f64,
    tail_fraction: f64,
) -> Result<LowerAverage, TemplateError> {
    assert!(tail_fraction > 0.0 && tail_fraction < 1.0);
    let (t0, t_end) = template.domain();
    assert!(horizon > t0 && horizon <= t_end, "horizon outside domain");
    let lo = t0 + tail_fraction * (horizon - t0);
    let profile = contraction_rate(template)?;
    let mut grid: Vec<f64> = template
        .breakpoints
        .iter()
        .copied()
        .filter(|&t| t >= lo && t <= horizon && t > t0)
        .collect();
    if grid.first().map(|&g| g > lo).unwrap_or(true) && lo > t0 {
        grid.insert(0, lo);
    }
    if grid.last().map(|&g| g < horizon).unwrap_or(true) {
        grid.push(horizon);
    }
    // Prefix integrals over segments, so each probe costs a lookup
    // instead of a fresh sweep.
    let mut prefix = Vec::with_capacity(profile.segments.len() + 1);
    prefix.push(Rat::zero());
    for seg in &profile.segments {
        let last = prefix.last().unwrap().clone();
        prefix.push(last + rat_int(seg.delta) * (rat(seg.t1) - rat(seg.t0)));
    }
    let integral_to = |t: f64| -> Rat {
        let seg = template.segment_at(t);
        &prefix[seg] + rat_int(profile.segments[seg].delta) * (rat(t) - rat(profile.segments[seg].t0))
    };
    let base = integral_to(t0);
    let mut best: Option<(Rat, f64)> = None;
    for &t in &grid {
        let avg = (integral_to(t) - &base) / (rat(t) - rat(t0));
        if best.as_ref().map(|(b, _)| &avg < b).unwrap_or(true) {
            best = Some((avg, t));
        }
    }
    let (value, at) = best.expect("probe grid nonempty");
    Ok(LowerAverage { value, at, grid })
}
