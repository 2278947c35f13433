//! Exact lower envelopes of rescaled first coordinates.

use super::Template;
use crate::exact::rat;
use crate::pwl::PwLinear;

/// The function `t ↦ L_j(a t)` as an exact piecewise-linear function in
/// flow time: breakpoints are the template's divided by the weight,
/// values the anchored rows. Division happens in rational arithmetic, so
/// nothing is lost.
pub fn component_pl(template: &Template, j: usize, weight: f64) -> PwLinear {
    assert!(weight > 0.0);
    let w = rat(weight);
    let points = template
        .breakpoints
        .iter()
        .zip(&template.values)
        .map(|(&x, row)| (rat(x) / &w, rat(row[j])))
        .collect();
    PwLinear::from_points(points)
}

/// Exact piecewise-linear `min_i L^i_1(a_i t)` over a flow-time window.
///
/// The window is intersected with the common rescaled domain; rescaling
/// `fl(a·t)/a` can shave an ulp off either end, so requesting the exact
/// window edge stays legal.
pub fn min_envelope(parts: &[(&Template, f64)], window: (f64, f64)) -> PwLinear {
    assert!(!parts.is_empty());
    let mut a = rat(window.0);
    let mut b = rat(window.1);
    let components: Vec<PwLinear> = parts.iter().map(|(t, w)| component_pl(t, 0, *w)).collect();
    for c in &components {
        let (lo, hi) = c.domain();
        if *lo > a {
            a = lo.clone();
        }
        if *hi < b {
            b = hi.clone();
        }
    }
    assert!(a < b, "window misses the common domain");
    let restricted: Vec<PwLinear> = components.iter().map(|c| c.restrict(&a, &b)).collect();
    PwLinear::min_of(&restricted)
}
