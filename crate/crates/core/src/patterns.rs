//! Closed-form symmetric equilibria for recognised uniform games, used as an
//! oracle against the solvers.

use serde::Serialize;

use crate::game::{AuctionSpec, BiddingFunction, Structure, TieRule};
use crate::thresholds::{no_ties_first_price_excludes_symmetric, ties_class, TiesClass};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KnownPatterns {
    pub functions: Vec<BiddingFunction>,
    /// The list is claimed to be every symmetric equilibrium, not just some.
    pub complete: bool,
}

impl KnownPatterns {
    fn some(functions: Vec<BiddingFunction>) -> Self {
        KnownPatterns {
            functions,
            complete: false,
        }
    }

    fn all(mut functions: Vec<BiddingFunction>) -> Self {
        functions.sort();
        functions.dedup();
        KnownPatterns {
            functions,
            complete: true,
        }
    }

    fn none() -> Self {
        KnownPatterns {
            functions: Vec::new(),
            complete: false,
        }
    }
}

/// Three bidders with fair ties: `2k, 2k, 2k+1` on the values `3k, 3k+1, 3k+2`.
pub fn stepped_two_thirds(x: usize) -> BiddingFunction {
    BiddingFunction::from_fn(x + 1, |v| 2 * (v / 3) + usize::from(v % 3 == 2))
}

/// Zero at value zero, one below the value elsewhere.
pub fn one_below_value(x: usize) -> BiddingFunction {
    BiddingFunction::from_fn(x + 1, |v| v.saturating_sub(1))
}

/// Symmetric equilibria known in closed form for `spec`. Empty with
/// `complete = false` when nothing is known.
pub fn known_se_patterns(spec: &AuctionSpec) -> KnownPatterns {
    if !spec.is_uniform_canonical() {
        return KnownPatterns::none();
    }
    let x = spec.x().expect("canonical");
    let s = x + 1;
    let n = spec.n;
    let half_down = || BiddingFunction::from_fn(s, |v| v / 2);
    let half_up = || BiddingFunction::from_fn(s, |v| v.div_ceil(2));
    match (spec.structure, spec.tie_rule) {
        (Structure::SecondPrice, TieRule::FairTies) => {
            KnownPatterns::all(vec![BiddingFunction::from_fn(s, |v| v)])
        }
        (Structure::SecondPrice, TieRule::NoWinnerOnTies) => KnownPatterns::some(vec![
            BiddingFunction::from_fn(s, |v| v),
            BiddingFunction::from_fn(s, |v| (v + 1).min(x)),
        ]),
        (Structure::FirstPrice, TieRule::NoWinnerOnTies) => {
            if n == 2 {
                KnownPatterns::all(vec![half_down(), half_up()])
            } else if no_ties_first_price_excludes_symmetric(n, x) {
                KnownPatterns::all(Vec::new())
            } else {
                KnownPatterns::some(vec![one_below_value(x)])
            }
        }
        (Structure::FirstPrice, TieRule::FairTies) => match ties_class(n, x) {
            TiesClass::TwoBiddersOdd if x >= 10 => KnownPatterns::all(vec![half_down()]),
            TiesClass::TwoBiddersOdd => KnownPatterns::some(vec![half_down()]),
            TiesClass::TwoBiddersEvenNone | TiesClass::ThreeBiddersMultipleOfThreeNone => {
                KnownPatterns::all(Vec::new())
            }
            TiesClass::ThreeBiddersStepped => KnownPatterns::some(vec![stepped_two_thirds(x)]),
            TiesClass::OutsideScope => KnownPatterns::none(),
        },
        (Structure::AllPay, _) => {
            if x >= 10 {
                KnownPatterns::all(Vec::new())
            } else if x == 2 {
                KnownPatterns::some(vec![BiddingFunction::new(vec![0, 0, 1])])
            } else {
                KnownPatterns::none()
            }
        }
    }
}
