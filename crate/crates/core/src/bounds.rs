//! Closed-form anarchy bound curves as functions of the slowdown
//! factor `s`, and the numeric breakpoints between the eight segments
//! of the strong-price-of-anarchy curve.
//!
//! Each segment of the SPoA curve is a ratio of integer-coefficient
//! polynomials in `s`; evaluation is exact for rational `s`. The
//! breakpoints are where adjacent segment formulas cross: two of them
//! are known in closed form (the golden ratio and 2), the other five
//! are found by bisection on the difference of the adjacent pieces.

use std::sync::OnceLock;

use thiserror::Error;

use crate::scalar::Scalar;

/// The golden ratio, where the SPoA curve peaks.
pub const PHI: f64 = 1.618033988749895;

const BISECTION_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum BoundsError {
    #[error("slowdown factor must be ≥ 1, got {0}")]
    SBelowOne(f64),
    #[error("no sign change in [{lo}, {hi}] between pieces {left} and {right}")]
    BracketFailure {
        lo: f64,
        hi: f64,
        left: usize,
        right: usize,
    },
}

/// One segment of the piecewise SPoA curve: a polynomial ratio valid on
/// `[lo, hi]`. Coefficients are listed from the constant term up.
#[derive(Clone, Debug)]
pub struct BoundPiece {
    pub lo: Scalar,
    pub hi: Scalar,
    pub numerator: Vec<i64>,
    pub denominator: Vec<i64>,
}

impl BoundPiece {
    pub fn eval(&self, s: &Scalar) -> Scalar {
        poly_eval(&self.numerator, s) / poly_eval(&self.denominator, s)
    }
}

/// Segment endpoints `s1 < s2 < … < s7` of the SPoA curve.
#[derive(Clone, Debug)]
pub struct Breakpoints {
    pub s1: Scalar,
    pub s2: Scalar,
    pub s3: Scalar,
    pub s4: Scalar,
    pub s5: Scalar,
    pub s6: Scalar,
    pub s7: Scalar,
}

impl Breakpoints {
    pub fn as_array(&self) -> [&Scalar; 7] {
        [
            &self.s1, &self.s2, &self.s3, &self.s4, &self.s5, &self.s6, &self.s7,
        ]
    }
}

/// Numerator/denominator coefficients of the eight segment formulas,
/// constant term first.
const PIECES: [(&[i64], &[i64]); 8] = [
    (&[1, 1, 1, 1], &[2, 0, 0, 1]),   // (s³+s²+s+1)/(s³+2)
    (&[1, 2, 1], &[1, 2]),            // (s²+2s+1)/(2s+1)
    (&[1, 1], &[0, 1]),               // (s+1)/s
    (&[-1, 2, -1, 1], &[-1, 1, -1, 1]), // (s³-s²+2s-1)/(s³-s²+s-1)
    (&[1, 1], &[2]),                  // (s+1)/2
    (&[1, -1, 1], &[0, -1, 1]),       // (s²-s+1)/(s²-s)
    (&[0, 0, 1], &[-1, 2]),           // s²/(2s-1)
    (&[1, 1], &[0, 1]),               // (s+1)/s
];

/// Horner evaluation; exact when `s` is exact.
pub(crate) fn poly_eval(coeffs: &[i64], s: &Scalar) -> Scalar {
    let mut acc = Scalar::zero();
    for &c in coeffs.iter().rev() {
        acc = &(&acc * s) + &Scalar::from_int(c);
    }
    acc
}

fn piece_f64(k: usize, s: f64) -> f64 {
    let eval = |coeffs: &[i64]| {
        coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc * s + c as f64)
    };
    eval(PIECES[k].0) / eval(PIECES[k].1)
}

fn bisect(left: usize, right: usize, mut lo: f64, mut hi: f64) -> Result<f64, BoundsError> {
    let f = |s: f64| piece_f64(left, s) - piece_f64(right, s);
    let (flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(BoundsError::BracketFailure {
            lo,
            hi,
            left: left + 1,
            right: right + 1,
        });
    }
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid);
        if fmid == 0.0 {
            return Ok(mid);
        }
        if fmid.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Recomputes the breakpoints: the golden ratio and 2 are set in closed
/// form, the rest by bisection inside brackets around the known
/// approximate locations.
pub fn compute_breakpoints() -> Result<Breakpoints, BoundsError> {
    Ok(Breakpoints {
        s1: Scalar::Float(bisect(0, 1, 1.2, 1.45)?),
        s2: Scalar::Float(PHI),
        s3: Scalar::Float(bisect(2, 3, 1.65, 1.85)?),
        s4: Scalar::Float(bisect(3, 4, 1.8, 2.0)?),
        s5: Scalar::from_int(2),
        s6: Scalar::Float(bisect(5, 6, 2.05, 2.2)?),
        s7: Scalar::Float(bisect(6, 7, 2.2, 2.35)?),
    })
}

/// The breakpoints, computed once and cached.
pub fn breakpoints() -> &'static Breakpoints {
    static CACHE: OnceLock<Breakpoints> = OnceLock::new();
    CACHE.get_or_init(|| compute_breakpoints().expect("segment formulas bracket their crossings"))
}

/// The eight curve segments with their endpoints filled in from the
/// cached breakpoints (the last piece extends to +∞).
pub fn pieces() -> Vec<BoundPiece> {
    let bp = breakpoints();
    let mut ends: Vec<Scalar> = vec![Scalar::one()];
    ends.extend(bp.as_array().iter().map(|&s| s.clone()));
    ends.push(Scalar::Float(f64::INFINITY));
    (0..8)
        .map(|k| BoundPiece {
            lo: ends[k].clone(),
            hi: ends[k + 1].clone(),
            numerator: PIECES[k].0.to_vec(),
            denominator: PIECES[k].1.to_vec(),
        })
        .collect()
}

fn require_ge_one(s: &Scalar) -> Result<(), BoundsError> {
    if *s < Scalar::one() {
        return Err(BoundsError::SBelowOne(s.to_f64()));
    }
    Ok(())
}

/// 1-based index of the SPoA segment containing `s`; ties at a
/// breakpoint resolve to the lower-index piece.
pub fn segment_of(s: &Scalar) -> Result<u8, BoundsError> {
    require_ge_one(s)?;
    for (i, bp) in breakpoints().as_array().iter().enumerate() {
        if s <= bp {
            return Ok(i as u8 + 1);
        }
    }
    Ok(8)
}

/// The simple strong-price-of-anarchy bound `(s+1)/s ≤ 2`.
pub fn spoa_simple(s: &Scalar) -> Result<Scalar, BoundsError> {
    require_ge_one(s)?;
    Ok(&(s + &Scalar::one()) / s)
}

/// The exact strong price of anarchy at `s` (piecewise closed form).
pub fn spoa_formula(s: &Scalar) -> Result<Scalar, BoundsError> {
    let k = segment_of(s)? as usize - 1;
    let (num, den) = PIECES[k];
    Ok(poly_eval(num, s) / poly_eval(den, s))
}

/// The exact price of anarchy `(s³+s²+s+1)/(s²+s+1)` at `s`.
pub fn poa_formula(s: &Scalar) -> Result<Scalar, BoundsError> {
    require_ge_one(s)?;
    Ok(poly_eval(&[1, 1, 1, 1], s) / poly_eval(&[1, 1, 1], s))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spoa_simple_cases() {
        assert_eq!(spoa_simple(&Scalar::one()).unwrap(), Scalar::from_int(2));
        assert_eq!(
            spoa_simple(&Scalar::from_int(2)).unwrap(),
            Scalar::ratio(3, 2)
        );
        let large = spoa_simple(&Scalar::from_int(1_000_000)).unwrap();
        assert!(large > Scalar::one() && large < Scalar::ratio(101, 100));
        assert!(spoa_simple(&Scalar::ratio(1, 2)).is_err());
    }

    #[test]
    fn breakpoints_match_known_values() {
        let bp = breakpoints();
        let expected = [1.325, PHI, 1.755, 1.907, 2.0, 2.154, 2.247];
        for (got, want) in bp.as_array().iter().zip(expected) {
            assert!(
                (got.to_f64() - want).abs() < 1e-3,
                "breakpoint {got} vs {want}"
            );
        }
        assert_eq!(bp.s5, Scalar::from_int(2));
        assert!(bp.s5.is_exact());
        // s7 is also the root of s³-2s²-s+1 in [2, 2.5].
        let s7 = bp.s7.to_f64();
        assert!((s7.powi(3) - 2.0 * s7.powi(2) - s7 + 1.0).abs() < 1e-9);
        // Strictly increasing.
        let arr = bp.as_array();
        for w in arr.windows(2) {
            assert!(w[0] < w[1]);
        }
    }

    #[test]
    fn segment_selection() {
        assert_eq!(segment_of(&Scalar::one()).unwrap(), 1);
        assert_eq!(segment_of(&Scalar::from_int(2)).unwrap(), 5);
        assert_eq!(segment_of(&Scalar::from_int(3)).unwrap(), 8);
        assert_eq!(segment_of(&Scalar::ratio(3, 2)).unwrap(), 2);
        assert!(segment_of(&Scalar::ratio(9, 10)).is_err());
    }

    #[test]
    fn spoa_formula_cases() {
        assert_eq!(spoa_formula(&Scalar::one()).unwrap(), Scalar::ratio(4, 3));
        assert_eq!(
            spoa_formula(&Scalar::from_int(2)).unwrap(),
            Scalar::ratio(3, 2)
        );
        let at_phi = spoa_formula(&Scalar::Float(PHI)).unwrap();
        assert!((at_phi.to_f64() - PHI).abs() < 1e-12);
    }

    #[test]
    fn poa_formula_cases() {
        assert_eq!(poa_formula(&Scalar::one()).unwrap(), Scalar::ratio(4, 3));
        assert_eq!(
            poa_formula(&Scalar::from_int(2)).unwrap(),
            Scalar::ratio(15, 7)
        );
        assert_eq!(
            poa_formula(&Scalar::one()).unwrap(),
            spoa_formula(&Scalar::one()).unwrap()
        );
    }

    #[test]
    fn exact_evaluation_for_rational_s() {
        // Piece 7 at s = 11/5: s²/(2s-1) = (121/25)/(17/5) = 121/85.
        let s = Scalar::ratio(11, 5);
        assert_eq!(segment_of(&s).unwrap(), 7);
        let v = spoa_formula(&s).unwrap();
        assert!(v.is_exact());
        assert_eq!(v, Scalar::ratio(121, 85));
    }

    #[test]
    fn continuity_at_breakpoints() {
        let pieces = pieces();
        for k in 0..7 {
            let boundary = pieces[k].hi.clone();
            let left = pieces[k].eval(&boundary).to_f64();
            let right = pieces[k + 1].eval(&boundary).to_f64();
            assert!(
                (left - right).abs() <= 1e-9,
                "discontinuity at breakpoint s{}: {left} vs {right}",
                k + 1
            );
        }
    }

    #[test]
    fn curve_order_on_grid() {
        for i in 0..=900 {
            let s = Scalar::Float(1.0 + i as f64 * 0.01);
            let spoa = spoa_formula(&s).unwrap().to_f64();
            let simple = spoa_simple(&s).unwrap().to_f64();
            let poa = poa_formula(&s).unwrap().to_f64();
            assert!(spoa <= simple + 1e-12, "s={s}");
            assert!(simple <= 2.0 + 1e-12, "s={s}");
            assert!(spoa <= poa + 1e-12, "s={s}");
            assert!(poa >= s.to_f64() - 1e-12, "s={s}");
        }
    }

    #[test]
    fn peak_is_golden() {
        // Grid of uniform points plus the segment knots.
        let mut grid: Vec<f64> = (0..10_000).map(|i| 1.0 + 9.0 * i as f64 / 9_999.0).collect();
        grid.extend(breakpoints().as_array().iter().map(|s| s.to_f64()));
        let (mut best_s, mut best_v) = (1.0, 0.0);
        for s in grid {
            let v = spoa_formula(&Scalar::Float(s)).unwrap().to_f64();
            if v > best_v {
                best_v = v;
                best_s = s;
            }
        }
        assert!((best_s - PHI).abs() < 1e-6);
        assert!((best_v - PHI).abs() < 1e-9);
    }

    #[test]
    fn bracket_failure_is_detected() {
        assert!(matches!(
            bisect(0, 1, 1.5, 1.6),
            Err(BoundsError::BracketFailure { .. })
        ));
    }

    #[test]
    fn piece_intervals_are_ordered_with_positive_denominators() {
        for (k, piece) in pieces().iter().enumerate() {
            assert!(piece.lo < piece.hi, "piece {}", k + 1);
            let hi = if piece.hi.to_f64().is_finite() {
                piece.hi.to_f64()
            } else {
                piece.lo.to_f64() + 10.0
            };
            for t in 0..=10 {
                let s = piece.lo.to_f64() + (hi - piece.lo.to_f64()) * t as f64 / 10.0;
                let den = poly_eval(&piece.denominator, &Scalar::Float(s)).to_f64();
                assert!(den > 0.0, "piece {} denominator at s={s}", k + 1);
            }
        }
    }
}
