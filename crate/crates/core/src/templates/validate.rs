//! The template validator.
//!
//! Checks, per breakpoint and segment: coordinate ordering, slope bounds,
//! the constant-sum constraint, consistency of anchored values with the
//! exact slopes, and the convexity/slope-set condition on each partial sum
//! `F_j` over maximal runs where `L_j < L_{j+1}`. Runs break wherever the
//! two coordinates touch — a concave corner of `F_j` is legal exactly at
//! such a touching point and nowhere else.

use super::admissible::z_set;
use super::Template;
use crate::exact::Slope;
use num_rational::Ratio;
use num_traits::Zero;
use serde::Serialize;
use std::fmt;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Violation {
    UnorderedValues { breakpoint: usize, j: usize },
    SlopeOutOfRange { segment: usize, j: usize },
    FjSlopeNotInZ { segment: usize, j: usize },
    FjNotConvex { segment: usize, j: usize },
    SumNotConstant { segment: usize },
    ValueSlopeMismatch { breakpoint: usize, j: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnorderedValues { breakpoint, j } => {
                write!(f, "values out of order at breakpoint {breakpoint} (L_{} > L_{})", j + 1, j + 2)
            }
            Violation::SlopeOutOfRange { segment, j } => {
                write!(f, "slope of L_{} outside [-1/n, 1/m] on segment {segment}", j + 1)
            }
            Violation::FjSlopeNotInZ { segment, j } => {
                write!(f, "F_{} slope not in Z({}) on segment {segment}", j + 1, j + 1)
            }
            Violation::FjNotConvex { segment, j } => {
                write!(f, "F_{} slope decreases entering segment {segment}", j + 1)
            }
            Violation::SumNotConstant { segment } => {
                write!(f, "coordinate slopes do not sum to zero on segment {segment}")
            }
            Violation::ValueSlopeMismatch { breakpoint, j } => {
                write!(f, "anchored value of L_{} at breakpoint {breakpoint} disagrees with slope propagation", j + 1)
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            write!(f, "valid")
        } else {
            for v in &self.violations {
                writeln!(f, "{v}")?;
            }
            Ok(())
        }
    }
}

pub fn validate_template(template: &Template) -> ValidationReport {
    let mut violations = Vec::new();
    if template.check_structure().is_err() {
        // Structural problems make the rest meaningless.
        violations.push(Violation::SumNotConstant { segment: 0 });
        return ValidationReport { violations };
    }
    let d = template.dim();
    let (m, n) = (template.m as i64, template.n as i64);
    let eta = template.eta();
    let nseg = template.segments();

    // (1) ordering at every breakpoint
    for (k, row) in template.values.iter().enumerate() {
        for j in 0..d - 1 {
            if row[j] > row[j + 1] + eta {
                violations.push(Violation::UnorderedValues { breakpoint: k, j });
            }
        }
    }

    // (2) slope bounds, exact
    let lo: Slope = Ratio::new(-1, n);
    let hi: Slope = Ratio::new(1, m);
    for (s, row) in template.slopes.iter().enumerate() {
        for (j, slope) in row.iter().enumerate() {
            if *slope < lo || *slope > hi {
                violations.push(Violation::SlopeOutOfRange { segment: s, j });
            }
        }
        // constant-sum: the j = m+n instance of the partial-sum condition,
        // since Z(m+n) = {0}
        let sum: Slope = row.iter().fold(Ratio::zero(), |a, b| a + b);
        if !sum.is_zero() {
            violations.push(Violation::SumNotConstant { segment: s });
        }
    }

    // (3) anchored values consistent with slopes
    for s in 0..nseg {
        let dx = template.breakpoints[s + 1] - template.breakpoints[s];
        for j in 0..d {
            let slope = &template.slopes[s][j];
            let predicted =
                template.values[s][j] + (*slope.numer() as f64 / *slope.denom() as f64) * dx;
            if (predicted - template.values[s + 1][j]).abs() > eta {
                violations.push(Violation::ValueSlopeMismatch {
                    breakpoint: s + 1,
                    j,
                });
            }
        }
    }

    // (4) partial sums F_j on separation runs, j < m+n
    for j in 0..d - 1 {
        let zset = z_set(template.m, template.n, j + 1);
        let tied_at = |k: usize| (template.values[k][j + 1] - template.values[k][j]).abs() <= eta;
        let mut prev_in_run: Option<Slope> = None;
        for s in 0..nseg {
            let active = !(tied_at(s) && tied_at(s + 1));
            if !active {
                prev_in_run = None;
                continue;
            }
            // A touching point between two active segments splits the run.
            if tied_at(s) {
                prev_in_run = None;
            }
            let fslope: Slope = template.slopes[s][..=j]
                .iter()
                .fold(Ratio::zero(), |a, b| a + b);
            if !zset.contains(&fslope) {
                violations.push(Violation::FjSlopeNotInZ { segment: s, j });
            }
            if let Some(prev) = prev_in_run {
                if fslope < prev {
                    violations.push(Violation::FjNotConvex { segment: s, j });
                }
            }
            prev_in_run = Some(fslope);
        }
    }

    ValidationReport { violations }
}
