//! Oracle-backed checks for the lattice-flow side.
//!
//! Every derived quantity is cross-checked against an independent path:
//! direct coefficient scans for small rationals, continued-fraction
//! convergents for the golden ratio, and Minkowski's second theorem for
//! random unimodular bases.

use divflow::latflow::{
    cusp_occupation, dimension_report, embed_theta, flow_matrix, flowed_basis, h_trajectory,
    occupation_joint, scan_q, successive_minima, LatticeBasis, MatrixTuple, SystemShape,
};
use nalgebra::{dmatrix, DMatrix};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const BUDGET: u64 = 100_000_000;

fn grid(a: f64, b: f64, step: f64) -> Vec<f64> {
    let n = ((b - a) / step).round() as usize;
    (0..=n).map(|i| a + i as f64 * step).collect()
}

/// Direct sup-norm first minimum of g_t u_θ Z^2 by scanning |q| <= qmax
/// with the nearest integer p (p = 1 when q = 0) — independent of the
/// tree enumeration.
fn lambda1_oracle_1x1(theta: f64, t: f64, qmax: i64) -> f64 {
    let mut best = f64::INFINITY;
    for q in -qmax..=qmax {
        let p = if q == 0 { 1 } else { (theta * q as f64).round() as i64 };
        let x = (t.exp()) * (theta * q as f64 - p as f64);
        let y = (-t).exp() * q as f64;
        best = best.min(x.abs().max(y.abs()));
    }
    best
}

#[test]
fn flow_matrix_matches_direct_evaluation() {
    let g = flow_matrix(1, 1, 0.0);
    assert_eq!(g, DMatrix::identity(2, 2));
    let g = flow_matrix(2, 1, 2.0 * 2.0_f64.ln());
    assert_eq!(g[(0, 0)], 2.0);
    assert_eq!(g[(1, 1)], 2.0);
    assert!((g[(2, 2)] - 0.25).abs() < 1e-15);
    let g = flow_matrix(1, 2, 8.0_f64.ln());
    assert!((g[(0, 0)] - 8.0).abs() < 1e-12);
    assert!((g[(1, 1)] - 8.0_f64.powf(-0.5)).abs() < 1e-12);
}

#[test]
fn embed_theta_block_layout() {
    let u = embed_theta(&dmatrix![0.0]);
    assert_eq!(u.columns(), &DMatrix::identity(2, 2));
    let u = embed_theta(&dmatrix![1.0 / 3.0]);
    assert_eq!(u.columns()[(0, 1)], 1.0 / 3.0);
    let u = embed_theta(&dmatrix![0.3, 0.7]);
    assert_eq!(u.dim(), 3);
    assert_eq!(u.columns()[(0, 1)], 0.3);
    assert_eq!(u.columns()[(0, 2)], 0.7);
    assert_eq!(u.columns()[(1, 1)], 1.0);
}

#[test]
fn flowed_bases_stay_unimodular_on_random_inputs() {
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..50 {
        let (m, n) = ([(1, 1), (1, 2), (2, 1), (2, 2)])[rng.gen_range(0..4)];
        let theta = DMatrix::from_fn(m, n, |_, _| rng.gen_range(-2.0..2.0));
        let t = rng.gen_range(0.0..6.0);
        // constructor enforces |det - 1| <= 1e-9
        let _ = flowed_basis(&theta, m, n, t);
    }
}

#[test]
fn trajectory_of_two_sevenths_is_exact() {
    let theta = dmatrix![2.0 / 7.0];
    let ts = grid(2.0, 8.0, 0.25);
    let traj = h_trajectory(&theta, 1, 1, &ts, BUDGET).unwrap();
    for (t, row) in ts.iter().zip(&traj.rows) {
        let expected = 7.0_f64.ln() - t;
        assert!(
            (row[0] - expected).abs() < 1e-9,
            "t = {t}: h1 = {} vs {expected}",
            row[0]
        );
        let oracle = lambda1_oracle_1x1(2.0 / 7.0, *t, 10).ln();
        assert!((row[0] - oracle).abs() < 1e-9);
    }
}

#[test]
fn trajectory_invariants_hold() {
    let theta = dmatrix![0.37, -1.21; 2.4, 0.02];
    let ts = grid(0.0, 3.0, 0.5);
    let traj = h_trajectory(&theta, 2, 2, &ts, BUDGET).unwrap();
    let d = traj.dim();
    let log_dfact: f64 = (1..=d).map(|k| (k as f64).ln()).sum();
    for row in &traj.rows {
        assert!(row.windows(2).all(|w| w[0] <= w[1] + 1e-12), "sorted");
        assert!(row[0] <= 1e-12, "h1 <= 0");
        let total: f64 = row.iter().sum();
        assert!(total <= 1e-9, "Minkowski upper");
        assert!(total >= -log_dfact - 1e-9, "Minkowski lower");
    }
}

#[test]
fn golden_trajectory_stays_above_valley_bound() {
    let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
    let theta = dmatrix![phi];
    let ts = grid(0.0, 15.0, 0.25);
    let traj = h_trajectory(&theta, 1, 1, &ts, BUDGET).unwrap();
    // convergent oracle: best approximations of phi are the Fibonacci
    // ratios p/q = 1/1, 2/1, 3/2, 5/3, 8/5, ...
    let mut convergents: Vec<(i64, i64)> = vec![(1, 1), (2, 1)];
    loop {
        let [(p0, q0), (p1, q1)] = convergents[convergents.len() - 2..] else {
            unreachable!()
        };
        let (p2, q2) = (p0 + p1, q0 + q1);
        if q2 > 4_000_000 {
            break;
        }
        convergents.push((p2, q2));
    }
    for (t, row) in ts.iter().zip(&traj.rows) {
        assert!(row[0] >= -0.6, "t = {t}: h1 = {}", row[0]);
        let oracle = convergents
            .iter()
            .map(|&(p, q)| {
                let x = t.exp() * (phi * q as f64 - p as f64);
                let y = (-t).exp() * q as f64;
                x.abs().max(y.abs())
            })
            .fold(lambda1_oracle_1x1(phi, *t, 3), f64::min)
            .ln();
        // `φq − p` cancels catastrophically for large q ~ e^t: both paths
        // carry a relative error of order q^2 ε, so the comparison
        // tolerance scales with e^{2t}.
        let tol = 1e-9 + 5e-15 * (2.0 * t).exp();
        assert!(
            (row[0] - oracle).abs() < tol,
            "t = {t}: {} vs oracle {oracle}",
            row[0]
        );
    }
}

#[test]
fn minima_attained_by_reported_vectors() {
    let basis = flowed_basis(&dmatrix![2.0 / 7.0], 1, 1, 3.0);
    let minima = successive_minima(&basis, BUDGET).unwrap();
    for (value, vec) in minima.values.iter().zip(&minima.vectors) {
        let sup = vec.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        assert_eq!(sup, *value);
    }
    assert!((minima.values[0].ln() - (7.0_f64.ln() - 3.0)).abs() < 1e-12);
}

#[test]
fn minkowski_products_on_random_unimodular_bases() {
    let mut rng = StdRng::seed_from_u64(0xd1ce);
    for case in 0..500 {
        let d = rng.gen_range(2..=4);
        let mut lower = DMatrix::<f64>::identity(d, d);
        let mut upper = DMatrix::<f64>::identity(d, d);
        for i in 0..d {
            for j in 0..i {
                lower[(i, j)] = rng.gen_range(-1.5..1.5);
                upper[(j, i)] = rng.gen_range(-1.5..1.5);
            }
        }
        let basis = LatticeBasis::new(&lower * upper).unwrap();
        let minima = successive_minima(&basis, BUDGET).unwrap();
        assert!(minima.values.windows(2).all(|w| w[0] <= w[1]));
        let product: f64 = minima.values.iter().product();
        let dfact: f64 = (1..=d).map(|k| k as f64).product();
        assert!(
            product <= 1.0 + 1e-9 && product >= 1.0 / dfact - 1e-9,
            "case {case}: product {product} outside [1/{d}!, 1]"
        );
    }
}

#[test]
fn budget_exhaustion_is_an_error() {
    let basis = flowed_basis(&dmatrix![2.0 / 7.0], 1, 1, 8.0);
    assert!(successive_minima(&basis, 100).is_err());
}

#[test]
fn scan_witness_is_monotone_in_epsilon() {
    let mut rng = StdRng::seed_from_u64(42);
    for _ in 0..40 {
        let theta = dmatrix![rng.gen_range(0.0..1.0)];
        let cap = rng.gen_range(2.0..40.0);
        let eps = rng.gen_range(0.05..0.5);
        let found = scan_q(&theta, eps, cap, BUDGET).unwrap().is_some();
        if found {
            for factor in [1.5, 3.0, 10.0] {
                assert!(
                    scan_q(&theta, eps * factor, cap, BUDGET).unwrap().is_some(),
                    "witness lost when widening epsilon"
                );
            }
        }
    }
}

#[test]
fn rational_tuple_occupation_tends_to_one() {
    // Both entries rational: witnesses persist once Q passes the
    // denominators, so only a bounded prefix can miss.
    let shape = SystemShape::unweighted(vec![(1, 1), (1, 1)]).unwrap();
    let tuple = MatrixTuple::new(vec![dmatrix![1.0 / 3.0], dmatrix![2.0 / 7.0]], &shape).unwrap();
    let horizon = 12.0;
    let occ = occupation_joint(&tuple, &shape, 0.5, horizon, 0.05, None, BUDGET).unwrap();
    // exact witness for 1/3 exists for all Q >= 3: misses at most ln(3)+slack
    assert!(occ >= 1.0 - (3.0_f64.ln() + 0.5) / horizon, "occ = {occ}");
    // excluding the second factor leaves the rational 1/3 alone: the same
    // persistence bound applies to the restricted union
    let occ = occupation_joint(&tuple, &shape, 0.5, horizon, 0.05, Some(1), BUDGET).unwrap();
    assert!(occ >= 1.0 - (3.0_f64.ln() + 0.5) / horizon, "occ = {occ}");
}

#[test]
fn joint_occupation_grid_refinement_is_stable() {
    let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
    let shape = SystemShape::unweighted(vec![(1, 1), (1, 1)]).unwrap();
    let tuple = MatrixTuple::new(vec![dmatrix![phi], dmatrix![phi]], &shape).unwrap();
    let coarse = occupation_joint(&tuple, &shape, 0.1, 5.0, 0.01, None, BUDGET).unwrap();
    let fine = occupation_joint(&tuple, &shape, 0.1, 5.0, 0.001, None, BUDGET).unwrap();
    assert!((coarse - fine).abs() < 0.02, "{coarse} vs {fine}");
}

#[test]
fn excluding_a_factor_never_raises_occupation() {
    let shape = SystemShape::unweighted(vec![(1, 1), (1, 1)]).unwrap();
    let tuple = MatrixTuple::new(vec![dmatrix![1.0 / 3.0], dmatrix![0.6180339887]], &shape).unwrap();
    for eps in [0.1, 0.4] {
        let full = occupation_joint(&tuple, &shape, eps, 6.0, 0.02, None, BUDGET).unwrap();
        for j in 0..2 {
            let excl = occupation_joint(&tuple, &shape, eps, 6.0, 0.02, Some(j), BUDGET).unwrap();
            assert!(excl <= full + 1e-12);
        }
    }
}

#[test]
fn cusp_occupation_matches_closed_forms() {
    // θ = 0: λ1 = e^{-t}, below 1/2 past ln 2.
    let occ = cusp_occupation(&dmatrix![0.0], 1, 1, 0.5, 10.0, 0.01, BUDGET).unwrap();
    let expected = (10.0 - 2.0_f64.ln()) / 10.0;
    assert!((occ - expected).abs() <= 0.02, "{occ} vs {expected}");

    // θ = 2/7: λ1 = 7 e^{-t} once t >= ln 7, below 0.1 past ln 70.
    let occ = cusp_occupation(&dmatrix![2.0 / 7.0], 1, 1, 0.1, 10.0, 0.01, BUDGET).unwrap();
    let expected = (10.0 - 70.0_f64.ln()) / 10.0;
    assert!((occ - expected).abs() <= 0.02, "{occ} vs {expected}");

    // golden ratio never sinks that deep on [0, 15]
    let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
    let occ = cusp_occupation(&dmatrix![phi], 1, 1, 0.4, 15.0, 0.05, BUDGET).unwrap();
    assert_eq!(occ, 0.0);
}

#[test]
fn dimension_report_is_permutation_invariant_and_linear() {
    let mut rng = StdRng::seed_from_u64(99);
    for _ in 0..100 {
        let s = rng.gen_range(1..=4);
        let pairs: Vec<(usize, usize)> = (0..s)
            .map(|_| (rng.gen_range(1..=3), rng.gen_range(1..=3)))
            .collect();
        let shape = SystemShape::unweighted(pairs.clone()).unwrap();
        let delta = divflow::exact::parse_rat(&format!("{}/{}", rng.gen_range(1..=8), 8)).unwrap();
        let rep = dimension_report(&shape, &delta);

        let mut shuffled = pairs.clone();
        shuffled.reverse();
        let rep2 = dimension_report(&SystemShape::unweighted(shuffled).unwrap(), &delta);
        assert_eq!(rep.min_b, rep2.min_b);

        // D-value minus D_delta-value equals (1 - delta) * min b
        let gap = &rep.dim_d_delta_matrix - &rep.dim_d_matrix;
        let expected = (divflow::exact::rat_int(1) - &delta) * &rep.min_b;
        assert_eq!(gap, expected);
    }
}
