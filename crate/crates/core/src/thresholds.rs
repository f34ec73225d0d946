//! Closed-form existence thresholds, decided in exact integer arithmetic, and the
//! tie-sharing win probability.

use num_bigint::BigInt;
use num_integer::binomial;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{GameError, Result};
use crate::rational::{self, Rational};

/// Whether the grid is fine enough, relative to the bidder count, to rule out a
/// symmetric first-price equilibrium without ties: `2 (x-1)^(n-1) > x^(n-1)`,
/// the integer form of `x > t / (t - 1)` with `t = 2^(1/(n-1))`.
pub fn no_ties_first_price_excludes_symmetric(n: usize, x: usize) -> bool {
    if n < 2 || x == 0 {
        return false;
    }
    let e = n - 1;
    let lhs = BigInt::from(2) * num_traits::pow(BigInt::from(x - 1), e);
    lhs > num_traits::pow(BigInt::from(x), e)
}

/// `t / (t - 1)` with `t = 2^(1/(n-1))`, for display only.
pub fn no_ties_first_price_threshold_approx(n: usize) -> f64 {
    let t = 2f64.powf(1.0 / (n as f64 - 1.0));
    t / (t - 1.0)
}

/// Whether `n - 1 > g(x)` where `g(x) = ln(x/(x-1)) / ln((x+1)/x)`, decided as
/// `(x-1) (x+1)^(n-1) > x^n`.
pub fn all_pay_bidders_exceed_ratio(n: usize, x: usize) -> bool {
    if n < 2 || x < 2 {
        return false;
    }
    let lhs = BigInt::from(x - 1) * num_traits::pow(BigInt::from(x + 1), n - 1);
    lhs > num_traits::pow(BigInt::from(x), n)
}

/// `g(x)` in floating point, for display only.
pub fn all_pay_ratio_approx(x: usize) -> f64 {
    let x = x as f64;
    (x.ln() - (x - 1.0).ln()) / ((x + 1.0).ln() - x.ln())
}

fn check_probability(n: usize, p: &Rational) -> Result<()> {
    if n == 0 {
        return Err(GameError::Invalid("need at least one bidder".into()));
    }
    if !p.is_positive() || *p > Rational::one() {
        return Err(GameError::Invalid(format!(
            "probability must lie in (0, 1], got {}",
            rational::format(p)
        )));
    }
    Ok(())
}

/// Win probability of a bidder at a bid that each of `n - 1` i.i.d. opponents
/// matches with probability `p` and never exceeds, under fair ties:
/// `(1 - (1 - p)^n) / (n p)`.
pub fn tied_top_win_probability(n: usize, p: &Rational) -> Result<Rational> {
    check_probability(n, p)?;
    let q = Rational::one() - p;
    let n_r = Rational::from_integer(BigInt::from(n));
    Ok((Rational::one() - num_traits::pow(q, n)) / (n_r * p))
}

/// The same probability summed over how many opponents tie:
/// `sum_{i=1..n} (1-p)^(n-i) p^(i-1) C(n-1, i-1) / i`.
pub fn tied_top_win_probability_by_ties(n: usize, p: &Rational) -> Result<Rational> {
    check_probability(n, p)?;
    let q = Rational::one() - p;
    let mut total = Rational::zero();
    for i in 1..=n {
        let c = binomial(BigInt::from(n - 1), BigInt::from(i - 1));
        total += num_traits::pow(q.clone(), n - i)
            * num_traits::pow(p.clone(), i - 1)
            * Rational::new(c, BigInt::from(i));
    }
    Ok(total)
}

/// Known classification of symmetric first-price equilibria with fair ties on the
/// uniform grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TiesClass {
    /// Two bidders, odd `x`: `floor(v/2)` is an equilibrium.
    TwoBiddersOdd,
    /// Two bidders, even `x >= 10`: none.
    TwoBiddersEvenNone,
    /// Three bidders, `x >= 10` a multiple of three: none.
    ThreeBiddersMultipleOfThreeNone,
    /// Three bidders, `x >= 10` otherwise: the stepped two-thirds function.
    ThreeBiddersStepped,
    OutsideScope,
}

pub fn ties_class(n: usize, x: usize) -> TiesClass {
    match n {
        2 if x % 2 == 1 => TiesClass::TwoBiddersOdd,
        2 if x >= 10 => TiesClass::TwoBiddersEvenNone,
        3 if x >= 10 && x.is_multiple_of(3) => TiesClass::ThreeBiddersMultipleOfThreeNone,
        3 if x >= 10 => TiesClass::ThreeBiddersStepped,
        _ => TiesClass::OutsideScope,
    }
}

/// Every closed-form prediction for a uniform grid with `n` bidders and top index `x`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThresholdReport {
    pub n: usize,
    pub x: usize,
    /// `t / (t - 1)`, approximate.
    pub first_price_threshold: f64,
    /// First price without ties has no symmetric equilibrium (needs `n >= 3`).
    pub first_price_no_ties_excluded: bool,
    /// All-pay has no symmetric equilibrium under either tie rule (`x >= 10`).
    pub all_pay_excluded: bool,
    /// `g(x)`, approximate.
    pub all_pay_ratio: f64,
    pub all_pay_bidders_exceed_ratio: bool,
    pub ties_class: TiesClass,
}

pub fn threshold_report(n: usize, x: usize) -> ThresholdReport {
    ThresholdReport {
        n,
        x,
        first_price_threshold: no_ties_first_price_threshold_approx(n.max(2)),
        first_price_no_ties_excluded: n >= 3 && no_ties_first_price_excludes_symmetric(n, x),
        all_pay_excluded: x >= 10,
        all_pay_ratio: if x >= 2 {
            all_pay_ratio_approx(x)
        } else {
            f64::NAN
        },
        all_pay_bidders_exceed_ratio: all_pay_bidders_exceed_ratio(n, x),
        ties_class: ties_class(n, x),
    }
}
