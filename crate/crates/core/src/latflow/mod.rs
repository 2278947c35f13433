//! Lattice flows and Diophantine diagnostics.
//!
//! The dictionary: a matrix θ embeds as the unimodular lattice `u_θ Z^{m+n}`,
//! the diagonal flow `g_t = diag(e^{t/m} I_m, e^{-t/n} I_n)` acts on it, and
//! the logarithmic successive minima `h_k(t) = log λ_k(g_t u_θ Z^{m+n})`
//! track Dirichlet-improving approximations. This module computes all of
//! that exactly at small dimension, plus witness scans for the sets
//! `Q_ε(θ)` and occupation fractions along the flow.

mod dimension;
mod minima;
mod scan;

pub use dimension::{dimension_report, DimensionReport};
pub use minima::{successive_minima, Minima};
pub use scan::{cusp_occupation, occupation_joint, scan_q, QWitness};

use crate::exact::Rat;
use nalgebra::DMatrix;
use serde::Serialize;
use thiserror::Error;

/// Hard cap for exact enumeration.
pub const MAX_ENUM_DIM: usize = 6;

/// Default enumeration budget (candidate cells / search nodes).
pub const DEFAULT_BUDGET: u64 = 100_000_000;

const UNIMODULAR_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum LatticeError {
    #[error("enumeration budget exceeded ({visited} nodes, budget {budget}){}",
            at_time.map(|t| format!(" at t = {t}")).unwrap_or_default())]
    BudgetExceeded {
        visited: u64,
        budget: u64,
        at_time: Option<f64>,
    },
    #[error("exact enumeration supports dimension <= {MAX_ENUM_DIM}, got {0}")]
    DimensionTooLarge(usize),
    #[error("basis is not unimodular (|det - 1| = {0:.3e})")]
    NotUnimodular(f64),
    #[error("invalid system shape: {0}")]
    BadShape(String),
}

/// The global configuration of a product system: factor sizes `(m_i, n_i)`
/// and flow weights `a_i`.
#[derive(Clone, Debug, Serialize)]
pub struct SystemShape {
    pub pairs: Vec<(usize, usize)>,
    pub weights: Vec<f64>,
}

impl SystemShape {
    pub fn new(pairs: Vec<(usize, usize)>, weights: Vec<f64>) -> Result<Self, LatticeError> {
        if pairs.is_empty() {
            return Err(LatticeError::BadShape("need at least one factor".into()));
        }
        if pairs.len() != weights.len() {
            return Err(LatticeError::BadShape(format!(
                "{} pairs but {} weights",
                pairs.len(),
                weights.len()
            )));
        }
        if pairs.iter().any(|&(m, n)| m == 0 || n == 0) {
            return Err(LatticeError::BadShape("all m_i, n_i must be >= 1".into()));
        }
        if weights.iter().any(|&a| !a.is_finite() || a <= 0.0) {
            return Err(LatticeError::BadShape("all weights must be > 0".into()));
        }
        Ok(SystemShape { pairs, weights })
    }

    /// Unit weights.
    pub fn unweighted(pairs: Vec<(usize, usize)>) -> Result<Self, LatticeError> {
        let w = vec![1.0; pairs.len()];
        SystemShape::new(pairs, w)
    }

    pub fn s(&self) -> usize {
        self.pairs.len()
    }

    /// The derived exponent `b_i = m_i n_i / (m_i + n_i)`, exact.
    pub fn b(&self, i: usize) -> Rat {
        let (m, n) = self.pairs[i];
        Rat::new(((m * n) as i64).into(), ((m + n) as i64).into())
    }

    pub fn min_b(&self) -> Rat {
        (0..self.s()).map(|i| self.b(i)).min().unwrap()
    }
}

/// A tuple of real matrices matching a [`SystemShape`].
#[derive(Clone, Debug)]
pub struct MatrixTuple {
    pub entries: Vec<DMatrix<f64>>,
}

impl MatrixTuple {
    pub fn new(entries: Vec<DMatrix<f64>>, shape: &SystemShape) -> Result<Self, LatticeError> {
        if entries.len() != shape.s() {
            return Err(LatticeError::BadShape(format!(
                "{} matrices for {} factors",
                entries.len(),
                shape.s()
            )));
        }
        for (theta, &(m, n)) in entries.iter().zip(&shape.pairs) {
            if theta.nrows() != m || theta.ncols() != n {
                return Err(LatticeError::BadShape(format!(
                    "matrix is {}x{}, factor wants {}x{}",
                    theta.nrows(),
                    theta.ncols(),
                    m,
                    n
                )));
            }
        }
        Ok(MatrixTuple { entries })
    }
}

/// A unimodular lattice basis (columns generate the lattice).
#[derive(Clone, Debug)]
pub struct LatticeBasis {
    columns: DMatrix<f64>,
}

impl LatticeBasis {
    pub fn new(columns: DMatrix<f64>) -> Result<Self, LatticeError> {
        assert!(columns.is_square(), "basis must be square");
        let det = columns.clone().lu().determinant();
        if (det.abs() - 1.0).abs() > UNIMODULAR_TOL {
            return Err(LatticeError::NotUnimodular((det.abs() - 1.0).abs()));
        }
        Ok(LatticeBasis { columns })
    }

    pub fn dim(&self) -> usize {
        self.columns.nrows()
    }

    pub fn columns(&self) -> &DMatrix<f64> {
        &self.columns
    }

    /// Embedded vector for an integer coefficient vector.
    pub fn vector(&self, coeffs: &[i64]) -> Vec<f64> {
        let d = self.dim();
        let mut v = vec![0.0; d];
        for (j, &c) in coeffs.iter().enumerate() {
            if c != 0 {
                for (i, x) in v.iter_mut().enumerate() {
                    *x += c as f64 * self.columns[(i, j)];
                }
            }
        }
        v
    }
}

/// `g_t = diag(e^{t/m} I_m, e^{-t/n} I_n)`.
pub fn flow_matrix(m: usize, n: usize, t: f64) -> DMatrix<f64> {
    let d = m + n;
    let mut g = DMatrix::zeros(d, d);
    let up = (t / m as f64).exp();
    let down = (-t / n as f64).exp();
    for i in 0..m {
        g[(i, i)] = up;
    }
    for i in m..d {
        g[(i, i)] = down;
    }
    g
}

/// The block-unipotent embedding `u_θ = [[I_m, θ], [0, I_n]]` of an `m×n`
/// matrix, as a lattice basis for `u_θ Z^{m+n}`.
pub fn embed_theta(theta: &DMatrix<f64>) -> LatticeBasis {
    let (m, n) = (theta.nrows(), theta.ncols());
    let d = m + n;
    let mut u = DMatrix::identity(d, d);
    for i in 0..m {
        for j in 0..n {
            u[(i, m + j)] = theta[(i, j)];
        }
    }
    LatticeBasis::new(u).expect("u_theta is exactly unimodular")
}

/// Basis of `g_t u_θ Z^{m+n}`.
pub fn flowed_basis(theta: &DMatrix<f64>, m: usize, n: usize, t: f64) -> LatticeBasis {
    let g = flow_matrix(m, n, t);
    let u = embed_theta(theta);
    LatticeBasis::new(&g * u.columns()).expect("flow preserves the covolume")
}

/// Sampled logarithmic successive minima along the flow.
#[derive(Clone, Debug, Serialize)]
pub struct MinimaTrajectory {
    pub grid: Vec<f64>,
    /// `rows[j][k] = h_{k+1}(grid[j])`, nondecreasing in `k`.
    pub rows: Vec<Vec<f64>>,
}

impl MinimaTrajectory {
    pub fn dim(&self) -> usize {
        self.rows.first().map(|r| r.len()).unwrap_or(0)
    }

    /// CSV with columns `t,h_1..h_d`.
    pub fn to_csv(&self) -> String {
        let d = self.dim();
        let mut out = String::from("t");
        for k in 1..=d {
            out.push_str(&format!(",h_{k}"));
        }
        out.push('\n');
        for (t, row) in self.grid.iter().zip(&self.rows) {
            out.push_str(&format!("{t:.11e}"));
            for h in row {
                out.push_str(&format!(",{h:.11e}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Logs of successive minima of `g_t u_θ Z^{m+n}` over a time grid.
///
/// The grid must be increasing. Budget overruns abort with the offending
/// time attached.
pub fn h_trajectory(
    theta: &DMatrix<f64>,
    m: usize,
    n: usize,
    grid: &[f64],
    budget: u64,
) -> Result<MinimaTrajectory, LatticeError> {
    assert!(
        grid.windows(2).all(|w| w[0] < w[1]),
        "time grid must be increasing"
    );
    let d = m + n;
    let log_dfact: f64 = (1..=d).map(|k| (k as f64).ln()).sum();
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(grid.len());
    for &t in grid {
        let basis = flowed_basis(theta, m, n, t);
        let minima = successive_minima(&basis, budget).map_err(|e| match e {
            LatticeError::BudgetExceeded { visited, budget, .. } => LatticeError::BudgetExceeded {
                visited,
                budget,
                at_time: Some(t),
            },
            other => other,
        })?;
        let row: Vec<f64> = minima.values.iter().map(|l| l.ln()).collect();
        // Minkowski sanity for a unimodular lattice in the sup norm.
        assert!(row[0] <= 1e-7, "h_1({t}) = {} > 0", row[0]);
        let total: f64 = row.iter().sum();
        assert!(
            total <= 1e-7 && total >= -log_dfact - 1e-7,
            "sum h_k({t}) = {total} outside [-log d!, 0]"
        );
        rows.push(row);
    }
    Ok(MinimaTrajectory {
        grid: grid.to_vec(),
        rows,
    })
}
