//! Fixed inputs shared by the benchmarks.

use discrete_auction::{AuctionSpec, BiddingFunction, StrategyProfile, Structure, TieRule};

pub fn uniform(structure: Structure, tie: TieRule, n: usize, x: usize) -> AuctionSpec {
    AuctionSpec::uniform(structure, tie, n, x).expect("valid benchmark game")
}

/// A monotone profile with distinct functions, so no shortcut for symmetric play applies.
pub fn staggered_profile(n: usize, x: usize) -> StrategyProfile {
    StrategyProfile::new(
        (0..n)
            .map(|i| BiddingFunction::from_fn(x + 1, |v| (v * (i + 1)) / (i + 2)))
            .collect(),
    )
}
