//! Standard templates from admissible point pairs and sequences.
//!
//! The block joining `(t', ε')` to `(t'', ε'')` is assembled from two
//! two-slope functions: `g_1` descends at `−1/n` then ascends at `1/m`,
//! `g_2` does the opposite, and both run from `−ε'` to `−ε''`. The
//! remaining coordinates either fan out as the common balance
//! `g_3 = −(g_1 + g_2)/(m+n−2)` (where `g_2 <= g_3`) or collapse onto
//! `−g_1/(m+n−1)` (elsewhere). For `m + n = 2` there is no `g_3` family
//! and the collapsed branch `L_2 = −L_1` is used throughout.

use super::admissible::check_admissible;
use super::{Template, TemplateError};
use crate::exact::Slope;
use num_rational::Ratio;

pub fn standard_template(
    p1: (f64, f64),
    p2: (f64, f64),
    m: usize,
    n: usize,
) -> Result<Template, TemplateError> {
    build_block(p1, p2, m, n, 0)
}

/// Concatenation of standard blocks over consecutive pairs of an
/// admissible point sequence. Junction heights anchor bit-exactly on both
/// sides, so the concatenation is continuous by construction; whether it
/// satisfies the full template conditions is for `validate_template` to
/// decide, not assumed here.
pub fn standard_template_seq(
    points: &[(f64, f64)],
    m: usize,
    n: usize,
) -> Result<Template, TemplateError> {
    if points.len() < 2 {
        return Err(TemplateError::BadTemplate(
            "point sequence needs at least two entries".into(),
        ));
    }
    if !points.windows(2).all(|w| w[0].0 < w[1].0) {
        return Err(TemplateError::BadTemplate(
            "point sequence times must be strictly increasing".into(),
        ));
    }
    let mut blocks = Vec::with_capacity(points.len() - 1);
    for (index, w) in points.windows(2).enumerate() {
        blocks.push(build_block(w[0], w[1], m, n, index)?);
    }
    Template::concat(blocks)
}

fn build_block(
    p1: (f64, f64),
    p2: (f64, f64),
    m: usize,
    n: usize,
    index: usize,
) -> Result<Template, TemplateError> {
    let report = check_admissible(p1, p2, m, n);
    if !report.is_admissible() {
        return Err(TemplateError::InadmissiblePair {
            index,
            reason: report.reason.unwrap_or_else(|| "inadmissible".into()),
        });
    }
    let d = m + n;
    let (t0, e0) = p1;
    let (t1, e1) = p2;
    let (mf, nf, df) = (m as f64, n as f64, d as f64);
    let dt = t1 - t0;
    let de = e1 - e0;

    // Lengths of the initial phases of g_1 (descending) and g_2
    // (ascending), solved from the endpoint equations.
    let x = (nf * (dt + mf * de) / df).clamp(0.0, dt);
    let y = (mf * (dt - nf * de) / df).clamp(0.0, dt);
    let u1 = t0 + x;
    let u2 = t0 + y;

    let down: Slope = Ratio::new(-1, n as i64);
    let up: Slope = Ratio::new(1, m as i64);

    // Both g's anchor on both endpoints, so heights are exact at t0 and t1.
    let g1_at = |t: f64| if t <= u1 { -e0 - (t - t0) / nf } else { -e1 - (t1 - t) / mf };
    let g2_at = |t: f64| if t <= u2 { -e0 + (t - t0) / mf } else { -e1 + (t1 - t) / nf };
    let g1_slope = |tmid: f64| if tmid < u1 { down } else { up };
    let g2_slope = |tmid: f64| if tmid < u2 { up } else { down };

    let mut grid = vec![t0, t1];
    if u1 > t0 && u1 < t1 {
        grid.push(u1);
    }
    if d >= 3 && u2 > t0 && u2 < t1 {
        grid.push(u2);
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    // Sign of g_2 − g_3 is the sign of phi = g_1 + (d−1) g_2; refine the
    // grid at its zero crossings so each segment is in a single branch.
    if d >= 3 {
        let phi = |t: f64| g1_at(t) + (df - 1.0) * g2_at(t);
        let mut crossings = Vec::new();
        for w in grid.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (pa, pb) = (phi(a), phi(b));
            if (pa > 0.0 && pb < 0.0) || (pa < 0.0 && pb > 0.0) {
                let t = a + pa * (b - a) / (pa - pb);
                if t > a && t < b {
                    crossings.push(t);
                }
            }
        }
        grid.extend(crossings);
        grid.sort_by(f64::total_cmp);
        grid.dedup();
    }

    let collapsed_row = |t: f64| {
        let g1 = g1_at(t);
        let mut row = vec![-g1 / (df - 1.0); d];
        row[0] = g1;
        row
    };
    let spread_row = |t: f64| {
        let (g1, g2) = (g1_at(t), g2_at(t));
        let g3 = -(g1 + g2) / (df - 2.0);
        let mut row = vec![g3; d];
        row[0] = g1;
        row[1] = g2;
        row
    };

    let segs = grid.len() - 1;
    let mut values: Vec<Vec<f64>> = Vec::with_capacity(grid.len());
    let mut slopes: Vec<Vec<Slope>> = Vec::with_capacity(segs);
    // Branch of each segment, decided at its midpoint. On segments where
    // phi vanishes identically the branches produce identical rows and
    // slopes, so the choice is immaterial there.
    let mut spread = vec![false; segs];
    if d >= 3 {
        for (s, w) in grid.windows(2).enumerate() {
            let mid = 0.5 * (w[0] + w[1]);
            spread[s] = g1_at(mid) + (df - 1.0) * g2_at(mid) <= 0.0;
        }
    }
    for (k, &t) in grid.iter().enumerate() {
        let row = if d == 2 {
            let g1 = g1_at(t);
            vec![g1, -g1]
        } else if k < segs && spread[k] {
            spread_row(t)
        } else if k == segs {
            // Right endpoint: phi(t1) <= 0 always, and the rows coincide
            // when it vanishes.
            spread_row(t)
        } else {
            collapsed_row(t)
        };
        values.push(row);
    }
    for (s, w) in grid.windows(2).enumerate() {
        let mid = 0.5 * (w[0] + w[1]);
        let s1 = g1_slope(mid);
        let row = if d == 2 {
            vec![s1, -s1]
        } else if spread[s] {
            let s2 = g2_slope(mid);
            let s3 = -(s1 + s2) / Ratio::new(d as i64 - 2, 1);
            let mut row = vec![s3; d];
            row[0] = s1;
            row[1] = s2;
            row
        } else {
            let rest = -s1 / Ratio::new(d as i64 - 1, 1);
            let mut row = vec![rest; d];
            row[0] = s1;
            row
        };
        slopes.push(row);
    }

    let template = Template {
        m,
        n,
        breakpoints: grid,
        values,
        slopes,
    };
    template.check_structure()?;
    Ok(template)
}
