//! Constructive solver for the rescaling inequality
//!
//! ```text
//! Σ_i f_i(t) <= ε + Σ_i f_i(σ_i t),   t >= t_0,
//! ```
//!
//! for bounded nonnegative `f_i` and `1 = σ_1 >= σ_2 >= ... >= σ_s > 0`.
//! The solver follows the inductive proof: bound `f_s <= Q ε`, plug the
//! geometric sums `g_i(t) = Σ_{q=0}^{Q} f_i(σ_s^{-q} t)` into the
//! `(s−1)`-variable instance to get `t_1`, then scan `q ∈ {0..Q}` for the
//! first shift `σ_s^{-q} t_1` that satisfies the inequality; the telescoped
//! average over all shifts is nonnegative, so some `q` works. Everything
//! runs in exact rational arithmetic, so the scan cannot fail unless a
//! declared sup is wrong — which is detected at evaluation time.

use crate::exact::{format_rat, Rat};
use num_traits::{Signed, ToPrimitive, Zero};
use std::rc::Rc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("declared sup violated for function {index}: f({at}) = {value} > {declared}")]
    SupViolated {
        index: usize,
        at: String,
        value: String,
        declared: String,
    },
    #[error("no shift satisfied the averaging inequality (inconsistent inputs)")]
    NoShiftFound,
}

/// A bounded evaluable function with a declared sup.
pub trait KeyFunction {
    fn eval(&self, t: &Rat) -> Rat;
    /// Claimed upper bound; checked against every evaluation.
    fn sup(&self) -> Rat;
}

/// Nonnegative piecewise-constant function: `value` on each `[lo, hi)`,
/// `default` elsewhere on the positive axis.
#[derive(Clone, Debug)]
pub struct PiecewiseConstant {
    default: Rat,
    pieces: Vec<(Rat, Rat, Rat)>,
    declared_sup: Rat,
}

impl PiecewiseConstant {
    pub fn new(default: Rat, pieces: Vec<(Rat, Rat, Rat)>, declared_sup: Rat) -> Self {
        assert!(!default.is_negative(), "values must be nonnegative");
        for (lo, hi, v) in &pieces {
            assert!(lo < hi, "empty piece");
            assert!(!v.is_negative(), "values must be nonnegative");
        }
        PiecewiseConstant {
            default,
            pieces,
            declared_sup,
        }
    }

    /// The true supremum, handy for declaring honest bounds.
    pub fn true_sup(&self) -> Rat {
        self.pieces
            .iter()
            .map(|(_, _, v)| v.clone())
            .fold(self.default.clone(), |a, b| if b > a { b } else { a })
    }

    /// Builds with the declared sup set to the true supremum.
    pub fn with_true_sup(default: Rat, pieces: Vec<(Rat, Rat, Rat)>) -> Self {
        let mut f = PiecewiseConstant::new(default, pieces, Rat::zero());
        f.declared_sup = f.true_sup();
        f
    }
}

impl KeyFunction for PiecewiseConstant {
    fn eval(&self, t: &Rat) -> Rat {
        for (lo, hi, v) in &self.pieces {
            if t >= lo && t < hi {
                return v.clone();
            }
        }
        self.default.clone()
    }

    fn sup(&self) -> Rat {
        self.declared_sup.clone()
    }
}

type EvalFn<'a> = Rc<dyn Fn(&Rat) -> Result<Rat, SolveError> + 'a>;

/// Finds `t >= t_0` satisfying the rescaling inequality. See module docs.
pub fn lemma_key_solve<F: KeyFunction>(
    funcs: &[F],
    sigmas: &[Rat],
    eps: &Rat,
    t0: &Rat,
) -> Result<Rat, SolveError> {
    assert!(!funcs.is_empty(), "need at least one function");
    assert_eq!(funcs.len(), sigmas.len());
    assert!(eps.is_positive(), "epsilon must be positive");
    assert!(t0.is_positive(), "t0 must be positive");
    assert_eq!(sigmas[0], crate::exact::rat_int(1), "sigma_1 must be 1");
    assert!(
        sigmas.windows(2).all(|w| w[0] >= w[1]) && sigmas.last().unwrap().is_positive(),
        "sigmas must be nonincreasing and positive"
    );
    let evals: Vec<EvalFn> = funcs
        .iter()
        .enumerate()
        .map(|(index, f)| {
            let sup = f.sup();
            Rc::new(move |t: &Rat| {
                let v = f.eval(t);
                if v > sup {
                    Err(SolveError::SupViolated {
                        index,
                        at: format_rat(t),
                        value: format_rat(&v),
                        declared: format_rat(&sup),
                    })
                } else {
                    Ok(v)
                }
            }) as EvalFn
        })
        .collect();
    let sups: Vec<Rat> = funcs.iter().map(|f| f.sup()).collect();
    solve_rec(&evals, &sups, sigmas, eps, t0)
}

fn solve_rec(
    funcs: &[EvalFn],
    sups: &[Rat],
    sigmas: &[Rat],
    eps: &Rat,
    t0: &Rat,
) -> Result<Rat, SolveError> {
    let s = funcs.len();
    if s == 1 {
        // σ_1 = 1 makes the inequality trivial at any point.
        return Ok(t0.clone());
    }
    // Q ε bounds f_s from above.
    let q_count = {
        let ratio = (&sups[s - 1] / eps).ceil();
        let q = ratio.to_integer().to_u64().expect("sup/eps ratio fits u64");
        q.max(1)
    };
    assert!(
        q_count <= 1_000_000,
        "sup/eps ratio {q_count} too large for the shift scan"
    );
    let inv = crate::exact::rat_int(1) / &sigmas[s - 1];
    let mut pows = Vec::with_capacity(q_count as usize + 1);
    let mut p = crate::exact::rat_int(1);
    for _ in 0..=q_count {
        pows.push(p.clone());
        p *= &inv;
    }
    let pows = Rc::new(pows);

    let plugged: Vec<EvalFn> = (0..s - 1)
        .map(|i| {
            let f = funcs[i].clone();
            let pows = Rc::clone(&pows);
            Rc::new(move |t: &Rat| {
                let mut acc = Rat::zero();
                for p in pows.iter() {
                    acc += f(&(p * t))?;
                }
                Ok(acc)
            }) as EvalFn
        })
        .collect();
    let scale = crate::exact::rat_int(q_count as i64 + 1);
    let plugged_sups: Vec<Rat> = sups[..s - 1].iter().map(|x| x * &scale).collect();
    let t1 = solve_rec(&plugged, &plugged_sups, &sigmas[..s - 1], eps, t0)?;

    for pow in pows.iter() {
        let tq = pow * &t1;
        let mut slack = eps.clone();
        for i in 0..s {
            slack += (funcs[i])(&(&sigmas[i] * &tq))?;
            slack -= (funcs[i])(&tq)?;
        }
        if !slack.is_negative() {
            return Ok(tq);
        }
    }
    Err(SolveError::NoShiftFound)
}
