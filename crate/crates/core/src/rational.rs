//! Exact rational backend.
//!
//! `I - pQ` is scaled to an integer matrix and inverted by fraction-free
//! Gauss-Jordan elimination, so every entry of `M` is an integer over one
//! common denominator. Expected spreads then need only integer sums; the
//! denominators stay large but exact.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{input, parameter, Result};
use crate::noise::{build_q, StateSpace};
use crate::ranking::{PositionPair, SimplifiedState};

/// Parses `"0.8"`, `"-1.25"`, `"4/5"` or `"3"` into an exact rational.
pub fn parse_ratio(text: &str) -> Result<BigRational> {
    let text = text.trim();
    let bad = || input(format!("cannot parse {text:?} as a rational number"));
    if let Some((num, den)) = text.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| bad())?;
        let den: BigInt = den.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(num, den));
    }
    let (negative, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole
        .chars()
        .chain(frac.chars())
        .all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let digits = format!("{whole}{frac}");
    let num: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().map_err(|_| bad())?
    };
    let den = BigInt::from(10u32).pow(frac.len() as u32);
    let value = BigRational::new(num, den);
    Ok(if negative { -value } else { value })
}

/// Exact rational value of an `f64` written in its shortest decimal form, so
/// `0.8` maps to `4/5` rather than the nearest binary fraction.
pub fn ratio_from_decimal_f64(value: f64) -> Result<BigRational> {
    if !value.is_finite() {
        return Err(input(format!("{value} is not finite")));
    }
    let text = format!("{value}");
    if text.contains('e') {
        return BigRational::from_float(value).ok_or_else(|| input("unrepresentable value"));
    }
    parse_ratio(&text)
}

/// Solves `A X = det(A) I` for an integer matrix by fraction-free
/// Gauss-Jordan elimination. Returns `(X, det(A))` with `det > 0`.
///
/// `A` must have nonzero leading principal minors (no pivoting is done).
pub(crate) fn adjugate_solve(mut a: Vec<Vec<BigInt>>) -> (Vec<Vec<BigInt>>, BigInt) {
    let d = a.len();
    for (r, row) in a.iter_mut().enumerate() {
        assert_eq!(row.len(), d);
        row.extend((0..d).map(|c| {
            if c == r {
                BigInt::one()
            } else {
                BigInt::zero()
            }
        }));
    }
    let mut prev = BigInt::one();
    for k in 0..d {
        let pivot_row = a[k].clone();
        let pivot = pivot_row[k].clone();
        assert!(!pivot.is_zero(), "zero leading minor at step {k}");
        a.par_iter_mut().enumerate().for_each(|(i, row)| {
            if i == k {
                return;
            }
            let factor = row[k].clone();
            for j in 0..2 * d {
                if j == k {
                    continue;
                }
                let value = &pivot * &row[j] - &factor * &pivot_row[j];
                row[j] = if prev.is_one() { value } else { value / &prev };
            }
            row[k] = BigInt::zero();
        });
        prev = pivot;
    }
    let mut det = prev;
    let mut x: Vec<Vec<BigInt>> = a.into_iter().map(|row| row[d..].to_vec()).collect();
    if det.is_negative() {
        det = -det;
        for row in x.iter_mut() {
            for v in row.iter_mut() {
                *v = -&*v;
            }
        }
    }
    (x, det)
}

/// Noise kernel with entries `num[r][c] / den`.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalMix {
    space: StateSpace,
    p: BigRational,
    num: Vec<Vec<BigInt>>,
    den: BigInt,
}

impl RationalMix {
    pub fn space(&self) -> StateSpace {
        self.space
    }

    pub fn p(&self) -> &BigRational {
        &self.p
    }

    pub fn get(&self, from: SimplifiedState, to: SimplifiedState) -> BigRational {
        BigRational::new(
            self.num[self.space.index(from)][self.space.index(to)].clone(),
            self.den.clone(),
        )
    }

    pub fn row_sum(&self, from: SimplifiedState) -> BigRational {
        let total: BigInt = self.num[self.space.index(from)].iter().sum();
        BigRational::new(total, self.den.clone())
    }

    pub fn is_symmetric(&self) -> bool {
        let d = self.space.len();
        (0..d).all(|r| (0..r).all(|c| self.num[r][c] == self.num[c][r]))
    }

    pub fn to_f64(&self, from: SimplifiedState, to: SimplifiedState) -> f64 {
        self.get(from, to).to_f64().unwrap_or(f64::NAN)
    }
}

/// `M = (1 - p)(I - pQ)^{-1}` over the rationals.
pub fn build_m_rational(n: usize, p: &BigRational) -> Result<RationalMix> {
    if p.is_negative() || *p >= BigRational::one() {
        return Err(parameter(format!(
            "noise weight must lie in [0, 1), got {p}"
        )));
    }
    let q = build_q(n)?;
    let space = q.space();
    let d = space.len();
    let (a, b) = (p.numer().clone(), p.denom().clone());
    // b(n-1)(I - pQ) = b(n-1) I - a C, where C holds the swap counts.
    let scale = &b * BigInt::from(n - 1);
    let counts = q.counts();
    let system: Vec<Vec<BigInt>> = (0..d)
        .map(|r| {
            (0..d)
                .map(|c| {
                    let off = &a * BigInt::from(counts[r * d + c]);
                    if r == c {
                        &scale - off
                    } else {
                        -off
                    }
                })
                .collect()
        })
        .collect();
    let (x, det) = adjugate_solve(system);
    // M = (1 - p) b (n-1) A^{-1} = (b - a)(n - 1) X / det
    let factor = (&b - &a) * BigInt::from(n - 1);
    let mut num: Vec<Vec<BigInt>> = x
        .into_iter()
        .map(|row| row.into_iter().map(|v| v * &factor).collect())
        .collect();
    let mut g = det.clone();
    for v in num.iter().flatten() {
        if g.is_one() {
            break;
        }
        g = g.gcd(v);
    }
    let den = if g.is_zero() || g.is_one() {
        det
    } else {
        for v in num.iter_mut().flatten() {
            *v = &*v / &g;
        }
        det / &g
    };
    Ok(RationalMix {
        space,
        p: p.clone(),
        num,
        den,
    })
}

/// Expected spreads as exact rationals.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalSpreadTable {
    n: usize,
    p: BigRational,
    values: BTreeMap<PositionPair, BigRational>,
}

impl RationalSpreadTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> &BigRational {
        &self.p
    }

    pub fn get(&self, pair: PositionPair) -> Option<&BigRational> {
        self.values.get(&pair)
    }

    pub fn iter(&self) -> impl Iterator<Item = (PositionPair, &BigRational)> {
        self.values.iter().map(|(k, v)| (*k, v))
    }

    pub fn sum(&self) -> BigRational {
        self.values
            .values()
            .fold(BigRational::zero(), |acc, v| acc + v)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Null-model expected spread for every position pair, exactly.
pub fn rational_spread_table(n: usize, p: &BigRational) -> Result<RationalSpreadTable> {
    let m = build_m_rational(n, p)?;
    Ok(rational_table_from(&m))
}

pub fn rational_table_from(m: &RationalMix) -> RationalSpreadTable {
    let space = m.space;
    let den = &m.den;
    let ahead: Vec<BigInt> = m
        .num
        .iter()
        .map(|row| {
            row.iter()
                .zip(space.states())
                .filter(|(_, s)| s.first_ahead())
                .map(|(v, _)| v)
                .sum()
        })
        .collect();
    let gap: Vec<BigInt> = m
        .num
        .iter()
        .map(|row| {
            row.iter()
                .zip(space.states())
                .map(|(v, s)| v * BigInt::from(s.gap()))
                .sum()
        })
        .collect();
    let choice_weight: Vec<BigInt> = ahead.iter().map(|c| BigInt::from(2) * c - den).collect();
    let den_cubed = den * den * den;
    let n = space.n();
    let values = PositionPair::all(n)
        .map(|pair| {
            let row = &m.num[space.index(pair.into())];
            let delta_den = den * BigInt::from(pair.delta());
            let total: BigInt = row
                .iter()
                .zip(choice_weight.iter().zip(&gap))
                .filter(|(w, _)| !w.is_zero())
                .map(|(w, (c, g))| w * c * (g - &delta_den))
                .sum();
            (pair, BigRational::new(total, den_cubed.clone()))
        })
        .collect();
    RationalSpreadTable {
        n,
        p: m.p.clone(),
        values,
    }
}
