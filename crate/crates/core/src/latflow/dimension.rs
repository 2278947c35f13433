//! Closed-form Hausdorff dimension values, in exact rationals.

use super::SystemShape;
use crate::exact::{rat_int, Rat};
use num_traits::Zero;
use serde::Serialize;

fn ser_rat<S: serde::Serializer>(r: &Rat, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&crate::exact::format_rat(r))
}

fn ser_rat_vec<S: serde::Serializer>(v: &[Rat], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(crate::exact::format_rat))
}

/// Every dimension value attached to a shape, all exact.
///
/// For a single factor the `matrix_space` values are the classical
/// singular-set dimensions and the `homogeneous` values are the divergent
/// trajectory dimensions on `Y_{m+n}`; for products they are the joint
/// (essential) versions, which coincide.
#[derive(Clone, Debug, Serialize)]
pub struct DimensionReport {
    pub pairs: Vec<(usize, usize)>,
    #[serde(serialize_with = "ser_rat")]
    pub delta: Rat,
    /// `dim M = Σ m_i n_i`.
    #[serde(serialize_with = "ser_rat")]
    pub dim_matrix_space: Rat,
    /// `dim X = Σ ((m_i + n_i)^2 − 1)`.
    #[serde(serialize_with = "ser_rat")]
    pub dim_homogeneous_space: Rat,
    #[serde(serialize_with = "ser_rat_vec")]
    pub b: Vec<Rat>,
    #[serde(serialize_with = "ser_rat")]
    pub min_b: Rat,
    /// `dim D = dim D^e = Σ m_i n_i − min b_i`.
    #[serde(serialize_with = "ser_rat")]
    pub dim_d_matrix: Rat,
    /// `dim D_δ = dim D^e_δ = Σ m_i n_i − δ · min b_i`.
    #[serde(serialize_with = "ser_rat")]
    pub dim_d_delta_matrix: Rat,
    /// `dim X − min b_i`.
    #[serde(serialize_with = "ser_rat")]
    pub dim_d_homogeneous: Rat,
    /// `dim X − δ · min b_i`.
    #[serde(serialize_with = "ser_rat")]
    pub dim_d_delta_homogeneous: Rat,
    /// Per-factor `dim Sing_{m_i,n_i} = m_i n_i − b_i`.
    #[serde(serialize_with = "ser_rat_vec")]
    pub sing_dims: Vec<Rat>,
}

/// Evaluates the dimension formulas for a shape at escape fraction `δ`.
pub fn dimension_report(shape: &SystemShape, delta: &Rat) -> DimensionReport {
    assert!(
        *delta > Rat::zero() && *delta <= rat_int(1),
        "delta must lie in (0, 1]"
    );
    let s = shape.s();
    let b: Vec<Rat> = (0..s).map(|i| shape.b(i)).collect();
    let min_b = b.iter().min().unwrap().clone();
    let dim_m: Rat = shape
        .pairs
        .iter()
        .map(|&(m, n)| rat_int((m * n) as i64))
        .sum();
    let dim_x: Rat = shape
        .pairs
        .iter()
        .map(|&(m, n)| rat_int(((m + n) * (m + n) - 1) as i64))
        .sum();
    let sing_dims: Vec<Rat> = shape
        .pairs
        .iter()
        .zip(&b)
        .map(|(&(m, n), bi)| rat_int((m * n) as i64) - bi)
        .collect();
    DimensionReport {
        pairs: shape.pairs.clone(),
        delta: delta.clone(),
        dim_d_matrix: &dim_m - &min_b,
        dim_d_delta_matrix: &dim_m - delta * &min_b,
        dim_d_homogeneous: &dim_x - &min_b,
        dim_d_delta_homogeneous: &dim_x - delta * &min_b,
        dim_matrix_space: dim_m,
        dim_homogeneous_space: dim_x,
        b,
        min_b,
        sing_dims,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn r(n: i64, d: i64) -> Rat {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn two_unweighted_lines() {
        let shape = SystemShape::unweighted(vec![(1, 1), (1, 1)]).unwrap();
        let rep = dimension_report(&shape, &rat_int(1));
        assert_eq!(rep.dim_d_matrix, r(3, 2));
        assert_eq!(rep.dim_homogeneous_space, rat_int(6));
        assert_eq!(rep.dim_d_homogeneous, r(11, 2));
    }

    #[test]
    fn single_factor_sing_dimension() {
        let shape = SystemShape::unweighted(vec![(2, 1)]).unwrap();
        let rep = dimension_report(&shape, &rat_int(1));
        assert_eq!(rep.sing_dims[0], r(4, 3));
        assert_eq!(rep.dim_d_matrix, r(4, 3));
    }

    #[test]
    fn delta_scaling_is_linear() {
        let shape = SystemShape::unweighted(vec![(1, 1), (1, 1)]).unwrap();
        let rep = dimension_report(&shape, &r(1, 2));
        assert_eq!(rep.dim_d_delta_matrix, r(7, 4));
        let full = dimension_report(&shape, &rat_int(1));
        let gap = &rep.dim_d_delta_matrix - &full.dim_d_delta_matrix;
        assert_eq!(gap, (rat_int(1) - r(1, 2)) * rep.min_b);
    }
}
