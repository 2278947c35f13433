//! Exact continuous piecewise-linear functions over rational coordinates.
//!
//! Used for the lower envelopes `min_i L^i_1(a_i t)` and for measuring how
//! long an envelope spends inside a band `[-C, C]`. All breakpoints, values,
//! crossings and measures are exact rationals; nothing is sampled.

use crate::exact::Rat;
use num_traits::Zero;

/// A continuous piecewise-linear function given by its breakpoints.
///
/// `xs` is strictly increasing with at least two entries; the function is
/// linear between consecutive breakpoints and undefined outside `[xs[0],
/// xs.last()]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PwLinear {
    xs: Vec<Rat>,
    ys: Vec<Rat>,
}

impl PwLinear {
    pub fn new(xs: Vec<Rat>, ys: Vec<Rat>) -> Self {
        assert!(xs.len() >= 2, "need at least two breakpoints");
        assert_eq!(xs.len(), ys.len());
        assert!(
            xs.windows(2).all(|w| w[0] < w[1]),
            "breakpoints must be strictly increasing"
        );
        PwLinear { xs, ys }
    }

    pub fn from_points(points: Vec<(Rat, Rat)>) -> Self {
        let (xs, ys) = points.into_iter().unzip();
        PwLinear::new(xs, ys)
    }

    pub fn domain(&self) -> (&Rat, &Rat) {
        (self.xs.first().unwrap(), self.xs.last().unwrap())
    }

    pub fn points(&self) -> impl Iterator<Item = (&Rat, &Rat)> {
        self.xs.iter().zip(self.ys.iter())
    }

    /// Index of the segment containing `x` (the last one whose left end is
    /// `<= x`, capped so `x == xs.last()` falls in the final segment).
    fn segment_of(&self, x: &Rat) -> usize {
        let (lo, hi) = self.domain();
        assert!(x >= lo && x <= hi, "evaluation outside domain");
        match self.xs.binary_search(x) {
            Ok(i) => i.min(self.xs.len() - 2),
            Err(i) => i - 1,
        }
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        let i = self.segment_of(x);
        if &self.xs[i] == x {
            return self.ys[i].clone();
        }
        let dx = &self.xs[i + 1] - &self.xs[i];
        let dy = &self.ys[i + 1] - &self.ys[i];
        &self.ys[i] + dy * (x - &self.xs[i]) / dx
    }

    /// Restriction to `[a, b]` (must lie inside the domain).
    pub fn restrict(&self, a: &Rat, b: &Rat) -> PwLinear {
        assert!(a < b, "empty window");
        let mut xs = vec![a.clone()];
        let mut ys = vec![self.eval(a)];
        for (x, y) in self.points() {
            if x > a && x < b {
                xs.push(x.clone());
                ys.push(y.clone());
            }
        }
        xs.push(b.clone());
        ys.push(self.eval(b));
        PwLinear::new(xs, ys)
    }

    /// Pointwise minimum of two functions on the intersection of their
    /// domains, with exact crossing points inserted.
    pub fn min_two(f: &PwLinear, g: &PwLinear) -> PwLinear {
        let lo = f.domain().0.max(g.domain().0).clone();
        let hi = f.domain().1.min(g.domain().1).clone();
        assert!(lo < hi, "disjoint domains");
        let mut grid: Vec<Rat> = Vec::new();
        for x in f.xs.iter().chain(g.xs.iter()) {
            if *x >= lo && *x <= hi {
                grid.push(x.clone());
            }
        }
        grid.push(lo.clone());
        grid.push(hi.clone());
        grid.sort();
        grid.dedup();

        let mut out: Vec<(Rat, Rat)> = Vec::new();
        let mut push = |x: Rat, y: Rat| {
            if out.last().map(|(px, _)| px == &x).unwrap_or(false) {
                return;
            }
            out.push((x, y));
        };
        for w in 0..grid.len() - 1 {
            let (u, v) = (&grid[w], &grid[w + 1]);
            let (fu, fv) = (f.eval(u), f.eval(v));
            let (gu, gv) = (g.eval(u), g.eval(v));
            let d0 = &fu - &gu;
            let d1 = &fv - &gv;
            push(u.clone(), fu.clone().min(gu.clone()));
            // Strict sign change inside the cell: one exact crossing.
            if (d0 > Rat::zero() && d1 < Rat::zero()) || (d0 < Rat::zero() && d1 > Rat::zero()) {
                let t = u + &d0 * (v - u) / (&d0 - &d1);
                let y = f.eval(&t);
                push(t, y);
            }
        }
        let end = grid.last().unwrap();
        push(end.clone(), f.eval(end).min(g.eval(end)));
        PwLinear::from_points(out)
    }

    pub fn min_of(fns: &[PwLinear]) -> PwLinear {
        assert!(!fns.is_empty());
        let mut acc = fns[0].clone();
        for f in &fns[1..] {
            acc = PwLinear::min_two(&acc, f);
        }
        acc
    }

    /// Exact maximum and first argmax over `[a, b]`.
    pub fn max_on(&self, a: &Rat, b: &Rat) -> (Rat, Rat) {
        let r = self.restrict(a, b);
        let mut best_x = r.xs[0].clone();
        let mut best_y = r.ys[0].clone();
        for (x, y) in r.points() {
            if *y > best_y {
                best_y = y.clone();
                best_x = x.clone();
            }
        }
        (best_y, best_x)
    }

    /// Exact Lebesgue measure of `{x in [a,b] : lo <= f(x) <= hi}`.
    pub fn measure_in_band(&self, a: &Rat, b: &Rat, lo: &Rat, hi: &Rat) -> Rat {
        assert!(lo <= hi);
        let r = self.restrict(a, b);
        let mut total = Rat::zero();
        for i in 0..r.xs.len() - 1 {
            let (x0, x1) = (&r.xs[i], &r.xs[i + 1]);
            let (y0, y1) = (&r.ys[i], &r.ys[i + 1]);
            let len = x1 - x0;
            if y0 == y1 {
                if y0 >= lo && y0 <= hi {
                    total += len;
                }
                continue;
            }
            // x-interval where y(x) >= lo intersected with y(x) <= hi,
            // expressed as fractions of the segment.
            let slope = (y1 - y0) / &len;
            let t_at = |c: &Rat| (c - y0) / &slope; // offset from x0 where y == c
            let (mut t_lo, mut t_hi) = if slope > Rat::zero() {
                (t_at(lo), t_at(hi))
            } else {
                (t_at(hi), t_at(lo))
            };
            if t_lo < Rat::zero() {
                t_lo = Rat::zero();
            }
            if t_hi > len {
                t_hi = len.clone();
            }
            if t_hi > t_lo {
                total += t_hi - t_lo;
            }
        }
        total
    }
}
