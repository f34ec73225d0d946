//! Exact equilibrium analysis for sealed-bid auctions whose values and bids live on
//! finite grids.
//!
//! The crate covers first-price, second-price and all-pay auctions under two tie
//! rules. It builds symmetric equilibria with structural search restrictions,
//! enumerates every pure-strategy Bayes-Nash equilibrium after dominance reduction,
//! and ships the closed-form thresholds and continuum-matching grids used to check
//! existence results. All decisions use exact arithmetic.

pub mod bridge;
pub mod dominance;
pub mod engine;
pub mod enumerate;
pub mod error;
pub mod game;
pub mod monotone;
pub mod patterns;
pub mod payoff;
pub mod rational;
pub mod symmetric;
pub mod tables;
pub mod thresholds;

pub use bridge::{
    build_discrete_analogue, revenue_convergence, verify_continuum_match, ContinuousAuction,
    ContinuumCheck, ConvergenceRow, DiscreteAnalogue,
};
pub use dominance::{
    iterate_strict_dominance, reduce, round1_weak_dominance, strategy_count, ReducedGame,
};
pub use engine::PayoffEngine;
pub use enumerate::{
    construct_asymmetric_fp3, enumerate_pure_equilibria, export_bid_curve, EnumerationResult,
    Scope, SearchStats, SearchStatus,
};
pub use error::{GameError, Result};
pub use game::{
    AuctionSpec, BiddingFunction, GridSpec, SpecDocument, StrategyProfile, Structure, TieRule,
    ValueDistribution,
};
pub use patterns::{known_se_patterns, KnownPatterns};
pub use payoff::{
    best_response_set, expected_revenue, interim_payoff, is_equilibrium, opponent_bid_pmf,
    win_probability, Deviation, Verdict,
};
pub use rational::Rational;
pub use symmetric::{
    solve_second_price, solve_symmetric, solve_symmetric_no_ties, solve_symmetric_with_ties,
    verify_symmetric, Certificate, SymmetricSolveReport,
};
pub use tables::{reproduce_tables, Table, TableCell};
pub use thresholds::{
    all_pay_bidders_exceed_ratio, no_ties_first_price_excludes_symmetric, threshold_report,
    tied_top_win_probability, tied_top_win_probability_by_ties, ThresholdReport, TiesClass,
};
