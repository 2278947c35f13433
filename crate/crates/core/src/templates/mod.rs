//! Exact piecewise-linear templates.
//!
//! A template is a continuous piecewise-linear map `L = (L_1, ..., L_{m+n})`
//! on a compact interval with ordered coordinates, per-coordinate slopes in
//! `[-1/n, 1/m]`, and partial-sum functions `F_j = L_1 + ... + L_j` that are
//! convex with slopes in the finite set `Z(j)` wherever `L_j < L_{j+1}`.
//!
//! Representation: breakpoint times and per-breakpoint coordinate values in
//! `f64`, per-segment slopes as exact rationals. Values are *anchored*: a
//! constructor records the value vector at every breakpoint instead of
//! propagating from the left end, so quantities the calculus pins exactly
//! (heights `-ε` at anchor points, zeros on trivial stretches) are stored
//! bit-exactly and survive serialization. Consistency of values against
//! slopes is a validated property, not an assumption.

mod admissible;
mod envelope;
mod rate;
mod standard;
mod validate;

pub use admissible::{check_admissible, z_set, AdmissibilityReport, Verdict};
pub use envelope::{component_pl, min_envelope};
pub use rate::{
    average_contraction, class_decomposition, contraction_rate, lower_average_estimate,
    window_average, LowerAverage, RateProfile, SegmentRate, SlopeClass, SlopeClassDecomposition,
};
pub use standard::{standard_template, standard_template_seq};
pub use validate::{validate_template, ValidationReport, Violation};

use crate::exact::Slope;
use num_rational::Ratio;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TemplateError {
    #[error("pair {index} is inadmissible: {reason}")]
    InadmissiblePair { index: usize, reason: String },
    #[error("segment {segment}: class slope sum does not resolve to admissible integers (k1, k2): {detail}")]
    NonIntegerClassSlope { segment: usize, detail: String },
    #[error("malformed template: {0}")]
    BadTemplate(String),
}

/// Piecewise-linear template on a compact interval.
#[derive(Clone, Debug)]
pub struct Template {
    pub m: usize,
    pub n: usize,
    /// Strictly increasing, at least two.
    pub breakpoints: Vec<f64>,
    /// `values[k][j]`: coordinate `j` at breakpoint `k`, nondecreasing in `j`.
    pub values: Vec<Vec<f64>>,
    /// `slopes[seg][j]`: exact slope of coordinate `j` on segment `seg`.
    pub slopes: Vec<Vec<Slope>>,
}

impl Template {
    /// Dimension `m + n`.
    pub fn dim(&self) -> usize {
        self.m + self.n
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.breakpoints[0], *self.breakpoints.last().unwrap())
    }

    pub fn segments(&self) -> usize {
        self.slopes.len()
    }

    /// Comparison tolerance: `1e-9 * max(1, value scale)` plus a
    /// time-quantization term. Breakpoints are stored as absolute `f64`
    /// times, so a crossing computed deep into a schedule (t ~ 1e9 and
    /// beyond) is rounded to `ulp(t)`, and values evaluated at the stored
    /// point can only tie up to `ulp(t) * slope`.
    pub fn eta(&self) -> f64 {
        let value_scale = self
            .values
            .iter()
            .flatten()
            .fold(1.0f64, |a, v| a.max(v.abs()));
        let time_scale = self
            .breakpoints
            .iter()
            .fold(0.0f64, |a, t| a.max(t.abs()));
        1e-9 * value_scale + 32.0 * f64::EPSILON * time_scale
    }

    /// Index of the segment containing `t` (last one starting at or before
    /// `t`; the right endpoint belongs to the final segment).
    pub fn segment_at(&self, t: f64) -> usize {
        let (lo, hi) = self.domain();
        assert!(t >= lo && t <= hi, "time {t} outside template domain");
        match self
            .breakpoints
            .binary_search_by(|x| x.partial_cmp(&t).unwrap())
        {
            Ok(i) => i.min(self.segments() - 1),
            Err(i) => i - 1,
        }
    }

    /// Value of coordinate `j` at time `t`. Exactly the stored anchor when
    /// `t` is bit-equal to a breakpoint, otherwise propagated from the
    /// nearest anchor to the left.
    pub fn value_at(&self, t: f64, j: usize) -> f64 {
        let seg = self.segment_at(t);
        if self.breakpoints[seg] == t {
            return self.values[seg][j];
        }
        if self.breakpoints[seg + 1] == t {
            return self.values[seg + 1][j];
        }
        let s = &self.slopes[seg][j];
        self.values[seg][j] + slope_f64(s) * (t - self.breakpoints[seg])
    }

    pub fn values_at(&self, t: f64) -> Vec<f64> {
        (0..self.dim()).map(|j| self.value_at(t, j)).collect()
    }

    /// Basic structural sanity (shape, monotone breakpoints). The template
    /// *conditions* live in [`validate_template`].
    pub fn check_structure(&self) -> Result<(), TemplateError> {
        let d = self.dim();
        if self.breakpoints.len() < 2 {
            return Err(TemplateError::BadTemplate("fewer than two breakpoints".into()));
        }
        if !self.breakpoints.windows(2).all(|w| w[0] < w[1]) {
            return Err(TemplateError::BadTemplate(
                "breakpoints not strictly increasing".into(),
            ));
        }
        if self.values.len() != self.breakpoints.len()
            || self.values.iter().any(|r| r.len() != d)
            || self.slopes.len() + 1 != self.breakpoints.len()
            || self.slopes.iter().any(|r| r.len() != d)
        {
            return Err(TemplateError::BadTemplate("ragged value/slope arrays".into()));
        }
        Ok(())
    }

    /// Restriction to `[a, b]` inside the domain.
    pub fn restrict(&self, a: f64, b: f64) -> Template {
        assert!(a < b);
        let (lo, hi) = self.domain();
        assert!(a >= lo && b <= hi, "window outside template domain");
        let mut breakpoints = vec![a];
        let mut values = vec![self.values_at(a)];
        let mut slopes = Vec::new();
        let first = self.segment_at(a);
        for seg in first..self.segments() {
            let end = self.breakpoints[seg + 1];
            if end <= a {
                continue;
            }
            slopes.push(self.slopes[seg].clone());
            if end >= b {
                break;
            }
            breakpoints.push(end);
            values.push(self.values[seg + 1].clone());
        }
        breakpoints.push(b);
        values.push(self.values_at(b));
        Template {
            m: self.m,
            n: self.n,
            breakpoints,
            values,
            slopes,
        }
    }

    /// Concatenates abutting pieces. Junction times must agree bit-exactly;
    /// junction values are taken from the right piece (both sides anchor
    /// the same heights) and cross-checked within tolerance.
    pub fn concat(pieces: Vec<Template>) -> Result<Template, TemplateError> {
        assert!(!pieces.is_empty());
        let mut iter = pieces.into_iter();
        let mut acc = iter.next().unwrap();
        for piece in iter {
            if piece.m != acc.m || piece.n != acc.n {
                return Err(TemplateError::BadTemplate("mixed shapes in concat".into()));
            }
            let junction = *acc.breakpoints.last().unwrap();
            if piece.breakpoints[0] != junction {
                return Err(TemplateError::BadTemplate(format!(
                    "pieces do not abut: {} vs {}",
                    junction, piece.breakpoints[0]
                )));
            }
            let eta = acc.eta().max(piece.eta());
            let left = acc.values.last().unwrap();
            for (a, b) in left.iter().zip(&piece.values[0]) {
                if (a - b).abs() > eta {
                    return Err(TemplateError::BadTemplate(format!(
                        "discontinuity at junction t = {junction}: {a} vs {b}"
                    )));
                }
            }
            let last = acc.values.len() - 1;
            acc.values[last] = piece.values[0].clone();
            acc.breakpoints.extend_from_slice(&piece.breakpoints[1..]);
            acc.values.extend_from_slice(&piece.values[1..]);
            acc.slopes.extend_from_slice(&piece.slopes);
        }
        Ok(acc)
    }
}

fn slope_f64(s: &Slope) -> f64 {
    *s.numer() as f64 / *s.denom() as f64
}

/// The constant-zero template on `[a, b]`.
pub fn trivial_on(m: usize, n: usize, a: f64, b: f64) -> Template {
    assert!(a < b);
    let d = m + n;
    Template {
        m,
        n,
        breakpoints: vec![a, b],
        values: vec![vec![0.0; d], vec![0.0; d]],
        slopes: vec![vec![Ratio::zero(); d]],
    }
}

/// The trivial `m × n` template on `[0, T]`.
pub fn trivial_template(m: usize, n: usize, horizon: f64) -> Template {
    trivial_on(m, n, 0.0, horizon)
}

// --- JSON interchange -------------------------------------------------

/// Wire form. `startValues` is the value row at the first breakpoint;
/// `values` carries every anchored row so the round trip is lossless.
/// Readers accept files without `values` by propagating from
/// `startValues` along the exact slopes.
#[derive(Serialize, Deserialize)]
struct TemplateJson {
    m: usize,
    n: usize,
    breakpoints: Vec<f64>,
    #[serde(rename = "startValues")]
    start_values: Vec<f64>,
    slopes: Vec<Vec<(i64, i64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    values: Option<Vec<Vec<f64>>>,
}

impl Template {
    pub fn to_json(&self) -> String {
        let json = TemplateJson {
            m: self.m,
            n: self.n,
            breakpoints: self.breakpoints.clone(),
            start_values: self.values[0].clone(),
            slopes: self
                .slopes
                .iter()
                .map(|row| row.iter().map(|s| (*s.numer(), *s.denom())).collect())
                .collect(),
            values: Some(self.values.clone()),
        };
        serde_json::to_string_pretty(&json).expect("template serializes")
    }

    pub fn from_json(text: &str) -> Result<Template, TemplateError> {
        let json: TemplateJson = serde_json::from_str(text)
            .map_err(|e| TemplateError::BadTemplate(format!("json: {e}")))?;
        let mut slopes = Vec::with_capacity(json.slopes.len());
        for row in &json.slopes {
            let mut out = Vec::with_capacity(row.len());
            for &(p, q) in row {
                if q == 0 {
                    return Err(TemplateError::BadTemplate("slope with zero denominator".into()));
                }
                out.push(Ratio::new(p, q));
            }
            slopes.push(out);
        }
        let values = match json.values {
            Some(v) => v,
            None => {
                // Propagate from the start row.
                let mut rows = vec![json.start_values.clone()];
                for (seg, row) in slopes.iter().enumerate() {
                    let dx = json.breakpoints[seg + 1] - json.breakpoints[seg];
                    let prev = rows.last().unwrap().clone();
                    rows.push(
                        prev.iter()
                            .zip(row)
                            .map(|(v, s)| v + slope_f64(s) * dx)
                            .collect(),
                    );
                }
                rows
            }
        };
        let t = Template {
            m: json.m,
            n: json.n,
            breakpoints: json.breakpoints,
            values,
            slopes,
        };
        t.check_structure()?;
        Ok(t)
    }
}
