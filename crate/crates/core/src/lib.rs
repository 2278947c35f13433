//! Lattice flows and the piecewise-linear template calculus.
//!
//! The crate has three layers:
//!
//! * [`latflow`] — the dynamical/Diophantine side: unimodular lattices
//!   `g_t u_θ Z^d`, exact successive minima in the sup norm at small
//!   dimension, Dirichlet-improvement witness scans, cusp-occupation
//!   fractions, and the closed-form Hausdorff dimension formulas.
//! * [`templates`] — exact piecewise-linear templates: validation against
//!   the ordering/slope/convexity conditions, standard templates built
//!   from admissible point pairs, slope-class decompositions and average
//!   contraction rates (exact rational arithmetic throughout).
//! * [`constructions`] — the two scheduled template-tuple constructions on
//!   finite horizons, their verification reports, and the recursive
//!   rescaling-inequality solver.
//!
//! Everything is deterministic and pure; all reductions run in fixed order.

pub mod constructions;
pub mod exact;
pub mod latflow;
pub mod pwl;
pub mod templates;

pub use exact::Rat;
