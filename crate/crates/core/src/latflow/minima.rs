//! Exact successive minima in the sup norm by exhaustive enumeration.
//!
//! The k-th successive minimum is the least `r` such that the closed
//! sup-ball of radius `r` contains `k` linearly independent lattice
//! vectors. We enumerate every lattice vector in a ball of radius `R`
//! (growing `R` until `d` independent vectors appear) and read the minima
//! off a greedy independent scan in order of increasing norm. Greedy over
//! a linear matroid attains the minima exactly, and independence is
//! decided in exact integer arithmetic on coefficient vectors, so the only
//! approximation anywhere is f64 evaluation of the vector norms.

use super::{LatticeBasis, LatticeError, MAX_ENUM_DIM};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};

/// Successive minima plus attaining vectors.
#[derive(Clone, Debug)]
pub struct Minima {
    /// `λ_1 <= ... <= λ_d` in the sup norm.
    pub values: Vec<f64>,
    /// Integer coefficients of an attaining vector for each minimum.
    pub coefficients: Vec<Vec<i64>>,
    /// Embedded attaining vectors.
    pub vectors: Vec<Vec<f64>>,
    /// Search nodes visited.
    pub nodes: u64,
}

struct Candidate {
    coeffs: Vec<i64>,
    sup: f64,
}

/// Exact sup-norm successive minima of a unimodular basis, `d <= 6`.
pub fn successive_minima(basis: &LatticeBasis, budget: u64) -> Result<Minima, LatticeError> {
    let d = basis.dim();
    if d > MAX_ENUM_DIM {
        return Err(LatticeError::DimensionTooLarge(d));
    }
    let gso = Gso::new(basis);
    let mut nodes = 0u64;
    // Minkowski's first theorem: λ_1 <= det^{1/d} = 1 in the sup norm, so a
    // unit ball always contains a nonzero vector and doubling terminates.
    let mut radius = 1.0f64;
    loop {
        let mut found = Vec::new();
        enumerate_sup_ball(basis, &gso, radius, budget, &mut nodes, &mut |c| {
            found.push(c)
        })?;
        if let Some(minima) = pick_minima(basis, d, &mut found) {
            return Ok(Minima { nodes, ..minima });
        }
        radius *= 2.0;
    }
}

/// True iff the lattice has a nonzero vector of sup norm strictly below
/// `r`. Early-exits on the first hit (Mahler-criterion cusp test).
pub(crate) fn has_vector_below(
    basis: &LatticeBasis,
    r: f64,
    budget: u64,
) -> Result<bool, LatticeError> {
    let d = basis.dim();
    if d > MAX_ENUM_DIM {
        return Err(LatticeError::DimensionTooLarge(d));
    }
    let gso = Gso::new(basis);
    let mut nodes = 0u64;
    let mut hit = false;
    enumerate_sup_ball(basis, &gso, r, budget, &mut nodes, &mut |c| {
        if c.sup < r {
            hit = true;
        }
    })?;
    Ok(hit)
}

/// Gram–Schmidt data for the basis columns.
struct Gso {
    /// `mu[i][j]`, j < i: projection coefficient of column i on b*_j.
    mu: Vec<Vec<f64>>,
    /// Squared norms of the orthogonalized columns.
    norms2: Vec<f64>,
}

impl Gso {
    fn new(basis: &LatticeBasis) -> Gso {
        let d = basis.dim();
        let b = basis.columns();
        let mut star: Vec<Vec<f64>> = Vec::with_capacity(d);
        let mut mu = vec![vec![0.0; d]; d];
        let mut norms2 = vec![0.0; d];
        for i in 0..d {
            let mut v: Vec<f64> = (0..d).map(|r| b[(r, i)]).collect();
            for j in 0..i {
                let dot: f64 = (0..d).map(|r| b[(r, i)] * star[j][r]).sum();
                mu[i][j] = dot / norms2[j];
                for r in 0..d {
                    v[r] -= mu[i][j] * star[j][r];
                }
            }
            norms2[i] = v.iter().map(|x| x * x).sum();
            star.push(v);
        }
        Gso { mu, norms2 }
    }
}

/// Visits every nonzero lattice vector with sup norm `<= radius`.
///
/// Search runs over the Euclidean ball of radius `sqrt(d) * radius` (which
/// contains the sup ball) with per-level interval bounds from the GSO; the
/// sup-norm filter is applied at the leaves. Exhaustive, no pruning
/// heuristics. `nodes` accumulates visited candidates across calls and is
/// checked against `budget`.
fn enumerate_sup_ball(
    basis: &LatticeBasis,
    gso: &Gso,
    radius: f64,
    budget: u64,
    nodes: &mut u64,
    visit: &mut impl FnMut(Candidate),
) -> Result<(), LatticeError> {
    let d = basis.dim();
    // Tiny relative slack so boundary vectors are not lost to GSO rounding.
    let rho2 = d as f64 * radius * radius * (1.0 + 1e-9);
    let mut coeffs = vec![0i64; d];
    let mut used2 = vec![0.0f64; d + 1]; // squared norm consumed above level i
    descend(
        basis, gso, d, rho2, radius, &mut coeffs, &mut used2, d, budget, nodes, visit,
    )
}

#[allow(clippy::too_many_arguments)]
fn descend(
    basis: &LatticeBasis,
    gso: &Gso,
    d: usize,
    rho2: f64,
    radius: f64,
    coeffs: &mut Vec<i64>,
    used2: &mut Vec<f64>,
    level: usize,
    budget: u64,
    nodes: &mut u64,
    visit: &mut impl FnMut(Candidate),
) -> Result<(), LatticeError> {
    if level == 0 {
        if coeffs.iter().any(|&c| c != 0) {
            let v = basis.vector(coeffs);
            let sup = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
            if sup <= radius {
                visit(Candidate {
                    coeffs: coeffs.clone(),
                    sup,
                });
            }
        }
        return Ok(());
    }
    let i = level - 1;
    // Center of the admissible interval for c_i given the chosen tail.
    let center: f64 = -(i + 1..d).map(|j| gso.mu[j][i] * coeffs[j] as f64).sum::<f64>();
    let room = rho2 - used2[level];
    if room < 0.0 {
        return Ok(());
    }
    let half = (room / gso.norms2[i]).sqrt();
    let lo = (center - half).ceil() as i64;
    let hi = (center + half).floor() as i64;
    for c in lo..=hi {
        *nodes += 1;
        if *nodes > budget {
            return Err(LatticeError::BudgetExceeded {
                visited: *nodes,
                budget,
                at_time: None,
            });
        }
        coeffs[i] = c;
        let y = c as f64 - center;
        used2[level - 1] = used2[level] + y * y * gso.norms2[i];
        descend(
            basis, gso, d, rho2, radius, coeffs, used2, level - 1, budget, nodes, visit,
        )?;
    }
    coeffs[i] = 0;
    Ok(())
}

/// Greedy minima extraction: sort by norm, keep each vector that is
/// linearly independent of those already kept. Returns `None` if fewer
/// than `d` independent vectors were enumerated (radius too small).
fn pick_minima(basis: &LatticeBasis, d: usize, found: &mut [Candidate]) -> Option<Minima> {
    found.sort_by(|a, b| {
        a.sup
            .partial_cmp(&b.sup)
            .unwrap()
            .then_with(|| a.coeffs.cmp(&b.coeffs))
    });
    let mut picked: Vec<&Candidate> = Vec::with_capacity(d);
    'outer: for cand in found.iter() {
        if picked.len() == d {
            break;
        }
        // Cheap reject: integer multiples of an already-picked vector.
        for p in &picked {
            if is_integer_multiple(&cand.coeffs, &p.coeffs) {
                continue 'outer;
            }
        }
        if picked.is_empty() || independent(&picked, &cand.coeffs) {
            picked.push(cand);
        }
    }
    if picked.len() < d {
        return None;
    }
    Some(Minima {
        values: picked.iter().map(|c| c.sup).collect(),
        coefficients: picked.iter().map(|c| c.coeffs.clone()).collect(),
        vectors: picked.iter().map(|c| basis.vector(&c.coeffs)).collect(),
        nodes: 0,
    })
}

fn is_integer_multiple(c: &[i64], base: &[i64]) -> bool {
    // c = k * base for some integer k?
    let mut k: Option<i64> = None;
    for (&a, &b) in c.iter().zip(base) {
        match (a, b) {
            (0, 0) => continue,
            (_, 0) => return false,
            (a, b) => {
                if a % b != 0 {
                    return false;
                }
                let q = a / b;
                match k {
                    None => k = Some(q),
                    Some(prev) if prev != q => return false,
                    _ => {}
                }
            }
        }
    }
    true
}

/// Exact linear independence of `cand` from the picked coefficient
/// vectors, via Gaussian elimination over the rationals (BigInt
/// cross-multiplication; dimensions are at most 6).
fn independent(picked: &[&Candidate], cand: &[i64]) -> bool {
    let d = cand.len();
    let mut rows: Vec<Vec<BigInt>> = picked
        .iter()
        .map(|p| p.coeffs.iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    rows.push(cand.iter().map(|&x| BigInt::from(x)).collect());
    let mut rank = 0usize;
    for col in 0..d {
        let Some(pivot) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot);
        for r in rank + 1..rows.len() {
            if rows[r][col].is_zero() {
                continue;
            }
            let a = rows[rank][col].clone();
            let b = rows[r][col].clone();
            let pivot_row = rows[rank].clone();
            for (x, p) in rows[r][col..].iter_mut().zip(&pivot_row[col..]) {
                *x = &*x * &a - p * &b;
            }
        }
        rank += 1;
    }
    rank == rows.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn basis_from(cols: &[&[f64]]) -> LatticeBasis {
        let d = cols.len();
        let m = DMatrix::from_fn(d, d, |r, c| cols[c][r]);
        LatticeBasis::new(m).unwrap()
    }

    #[test]
    fn identity_minima_are_ones() {
        let b = basis_from(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let m = successive_minima(&b, 1_000_000).unwrap();
        assert_eq!(m.values, vec![1.0, 1.0]);
    }

    #[test]
    fn diagonal_minima() {
        let b = basis_from(&[&[0.5, 0.0], &[0.0, 2.0]]);
        let m = successive_minima(&b, 1_000_000).unwrap();
        assert_eq!(m.values, vec![0.5, 2.0]);
    }

    #[test]
    fn skewed_basis_from_spec() {
        // g_{ln 3} u_{1/3}: columns [[3,1],[0,1/3]]; both minima equal 1.
        let b = basis_from(&[&[3.0, 0.0], &[1.0, 1.0 / 3.0]]);
        let m = successive_minima(&b, 1_000_000).unwrap();
        assert!((m.values[0] - 1.0).abs() < 1e-12);
        assert!((m.values[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn multiple_filter() {
        assert!(is_integer_multiple(&[2, 4], &[1, 2]));
        assert!(!is_integer_multiple(&[2, 5], &[1, 2]));
        assert!(is_integer_multiple(&[0, 0], &[1, 2]));
        assert!(!is_integer_multiple(&[1, 0], &[0, 1]));
    }
}
