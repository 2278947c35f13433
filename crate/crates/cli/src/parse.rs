//! Argument parsing helpers: rationals, matrices, grids, shapes.

use anyhow::{bail, Context, Result};
use divflow::exact::parse_rat;
use divflow::latflow::SystemShape;
use nalgebra::DMatrix;

/// `"p/q"` or a decimal, as a double. Rational inputs stay exact where the
/// downstream pipeline is exact (dimension formulas take the rational
/// directly; the lattice pipeline works in doubles).
pub fn parse_real(s: &str) -> Result<f64> {
    if let Some((p, q)) = s.split_once('/') {
        let p: f64 = p.trim().parse().with_context(|| format!("bad number {s:?}"))?;
        let q: f64 = q.trim().parse().with_context(|| format!("bad number {s:?}"))?;
        if q == 0.0 {
            bail!("zero denominator in {s:?}");
        }
        return Ok(p / q);
    }
    s.trim()
        .parse()
        .with_context(|| format!("bad number {s:?}"))
}

/// Matrix entries: rows separated by `;`, entries by `,`.
pub fn parse_matrix(s: &str, m: usize, n: usize) -> Result<DMatrix<f64>> {
    let rows: Vec<&str> = s.split(';').collect();
    if rows.len() != m {
        bail!("theta has {} rows, factor wants {m}", rows.len());
    }
    let mut data = Vec::with_capacity(m * n);
    for row in &rows {
        let entries: Vec<&str> = row.split(',').collect();
        if entries.len() != n {
            bail!("theta row has {} entries, factor wants {n}", entries.len());
        }
        for e in entries {
            data.push(parse_real(e)?);
        }
    }
    Ok(DMatrix::from_row_slice(m, n, &data))
}

/// `--pairs 1,1 2,1` style factor sizes.
pub fn parse_pairs(args: &[String]) -> Result<Vec<(usize, usize)>> {
    let mut pairs = Vec::with_capacity(args.len());
    for a in args {
        let (m, n) = a
            .split_once(',')
            .with_context(|| format!("pair {a:?} must look like m,n"))?;
        pairs.push((
            m.trim().parse().with_context(|| format!("bad pair {a:?}"))?,
            n.trim().parse().with_context(|| format!("bad pair {a:?}"))?,
        ));
    }
    if pairs.is_empty() {
        bail!("need at least one factor pair");
    }
    Ok(pairs)
}

pub fn parse_shape(pairs: &[String], weights: Option<&[String]>) -> Result<SystemShape> {
    let pairs = parse_pairs(pairs)?;
    let weights = match weights {
        Some(ws) => ws.iter().map(|w| parse_real(w)).collect::<Result<Vec<_>>>()?,
        None => vec![1.0; pairs.len()],
    };
    SystemShape::new(pairs, weights).map_err(Into::into)
}

/// Time grid `start:stop:step`, or a single time.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [single] => Ok(vec![parse_real(single)?]),
        [start, stop, step] => {
            let (a, b, h) = (parse_real(start)?, parse_real(stop)?, parse_real(step)?);
            if h <= 0.0 || b < a {
                bail!("grid must satisfy start <= stop, step > 0");
            }
            let n = ((b - a) / h).round() as usize;
            Ok((0..=n).map(|i| a + i as f64 * h).collect())
        }
        _ => bail!("grid must be start:stop:step or a single time"),
    }
}

/// Point sequence `t:eps,t:eps,...`.
pub fn parse_points(s: &str) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let (t, e) = part
            .split_once(':')
            .with_context(|| format!("point {part:?} must look like t:eps"))?;
        out.push((parse_real(t)?, parse_real(e)?));
    }
    if out.len() < 2 {
        bail!("need at least two points");
    }
    Ok(out)
}

/// Exact rational with domain validation for escape fractions.
pub fn parse_delta(s: &str) -> Result<divflow::Rat> {
    let d = parse_rat(s).map_err(anyhow::Error::msg)?;
    if d <= divflow::exact::rat_int(0) || d > divflow::exact::rat_int(1) {
        bail!("delta must lie in (0, 1]");
    }
    Ok(d)
}
