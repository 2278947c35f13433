//! Exact rational arithmetic helpers.
//!
//! Breakpoint times and template values live in `f64`; every `f64` is a
//! dyadic rational, so converting through [`rat`] is lossless and all
//! window integrals computed on top of it are exact.

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{FromPrimitive, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational.
pub type Rat = BigRational;

/// Small exact rational for slopes (numerators/denominators stay tiny).
pub type Slope = Ratio<i64>;

/// Lossless conversion of a finite `f64` into a rational.
///
/// Panics on NaN/infinity; callers only feed finite breakpoint data.
pub fn rat(x: f64) -> Rat {
    BigRational::from_f64(x).expect("finite float")
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn ratio_to_big(r: Slope) -> Rat {
    Rat::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

pub fn to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Renders `p/q` (or just `p` when integral), matching the CLI contract
/// that exact values print exactly.
pub fn format_rat(r: &Rat) -> String {
    if r.denom() == &BigInt::from(1) {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `"p/q"`, a plain integer, or a decimal string into an exact
/// rational. Decimals are read digit-by-digit so `0.25` becomes `1/4`
/// exactly rather than the nearest double.
pub fn parse_rat(s: &str) -> Result<Rat, String> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num
            .trim()
            .parse()
            .map_err(|_| format!("bad numerator in {s:?}"))?;
        let d: BigInt = den
            .trim()
            .parse()
            .map_err(|_| format!("bad denominator in {s:?}"))?;
        if d.is_zero() {
            return Err(format!("zero denominator in {s:?}"));
        }
        return Ok(Rat::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let sign = if int.trim_start().starts_with('-') { -1 } else { 1 };
        let i: BigInt = if int.is_empty() || int == "-" {
            BigInt::zero()
        } else {
            int.parse().map_err(|_| format!("bad number {s:?}"))?
        };
        if !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(format!("bad number {s:?}"));
        }
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let f: BigInt = if frac.is_empty() {
            BigInt::zero()
        } else {
            frac.parse().map_err(|_| format!("bad number {s:?}"))?
        };
        let whole = i.abs() * &scale + f;
        return Ok(Rat::new(whole * BigInt::from(sign), scale));
    }
    let n: BigInt = s.parse().map_err(|_| format!("bad number {s:?}"))?;
    Ok(Rat::from_integer(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f64_round_trips_exactly() {
        for x in [0.1, 1.0 / 3.0, -7.25, 1e15 + 0.5, 2.0_f64.powi(-40)] {
            assert_eq!(to_f64(&rat(x)), x);
        }
    }

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rat("3/4").unwrap(), Rat::new(3.into(), 4.into()));
        assert_eq!(parse_rat("0.25").unwrap(), Rat::new(1.into(), 4.into()));
        assert_eq!(parse_rat("-1.5").unwrap(), Rat::new((-3).into(), 2.into()));
        assert_eq!(parse_rat("7").unwrap(), rat_int(7));
        assert!(parse_rat("1/0").is_err());
        assert_eq!(format_rat(&parse_rat("6/4").unwrap()), "3/2");
    }
}
