mod common;

use discrete_auction::dominance::{round1_weak_dominance, DEFAULT_EXACT_BUDGET};
use discrete_auction::symmetric::structural_violations;
use discrete_auction::{
    enumerate_pure_equilibria, is_equilibrium, reduce, solve_symmetric, AuctionSpec, Scope,
    Structure, TieRule,
};

use common::{brute_force, small_games, STRUCTURES, TIES};

#[test]
fn reduction_and_monotone_search_lose_nothing_on_small_games() {
    for spec in small_games() {
        let undominated = round1_weak_dominance(&spec).unwrap();
        let expected = brute_force(&spec, &undominated);
        let reduced = reduce(&spec, DEFAULT_EXACT_BUDGET).unwrap();
        let budget = 100_000_000;
        let monotone =
            enumerate_pure_equilibria(&spec, &reduced, Scope::MonotoneUndominated, budget).unwrap();
        let full_unreduced =
            enumerate_pure_equilibria(&spec, &undominated, Scope::FullyExhaustive, budget).unwrap();
        let full_reduced =
            enumerate_pure_equilibria(&spec, &reduced, Scope::FullyExhaustive, budget).unwrap();
        for r in [&monotone, &full_unreduced, &full_reduced] {
            assert!(r.is_complete());
        }
        let name = spec.describe();
        assert_eq!(full_unreduced.equilibria, expected, "{name}");
        assert_eq!(full_reduced.equilibria, expected, "{name}");
        assert_eq!(monotone.equilibria, expected, "{name}");
    }
}

#[test]
fn reported_profiles_are_monotone_and_undominated() {
    for s in [Structure::FirstPrice, Structure::AllPay] {
        for t in TIES {
            for (n, x) in [(2, 6), (2, 8), (3, 5), (3, 6)] {
                let spec = AuctionSpec::uniform(s, t, n, x).unwrap();
                let reduced = reduce(&spec, DEFAULT_EXACT_BUDGET).unwrap();
                let r = enumerate_pure_equilibria(
                    &spec,
                    &reduced,
                    Scope::MonotoneUndominated,
                    100_000_000,
                )
                .unwrap();
                assert!(r.is_complete());
                for p in &r.equilibria {
                    assert!(p.players().iter().all(|f| f.is_monotone()), "{p}");
                    assert!(reduced.contains_profile(p), "{p}");
                    assert!(is_equilibrium(&spec, p).unwrap().is_equilibrium(), "{p}");
                }
                let symmetric = r.symmetric();
                assert!(
                    structural_violations(&spec, &symmetric).is_empty(),
                    "{}",
                    spec.describe()
                );
            }
        }
    }
}

#[test]
fn symmetric_solver_matches_enumerator() {
    for s in STRUCTURES {
        for t in TIES {
            for (n, xs) in [(2, 1..=8), (3, 1..=6)] {
                for x in xs {
                    let spec = AuctionSpec::uniform(s, t, n, x).unwrap();
                    let reduced = reduce(&spec, DEFAULT_EXACT_BUDGET).unwrap();
                    let r = enumerate_pure_equilibria(
                        &spec,
                        &reduced,
                        Scope::MonotoneUndominated,
                        100_000_000,
                    )
                    .unwrap();
                    assert!(r.is_complete());
                    let report = solve_symmetric(&spec, 16).unwrap();
                    if (s, t) == (Structure::SecondPrice, TieRule::NoWinnerOnTies) {
                        // The solver lists the two extreme members of a family in which
                        // each value independently bids v or v+1.
                        let found = r.symmetric();
                        assert_eq!(found.len(), 1 << x, "{}", spec.describe());
                        assert!(report.equilibria.iter().all(|f| found.contains(f)));
                    } else {
                        assert_eq!(r.symmetric(), report.equilibria, "{}", spec.describe());
                    }
                }
            }
        }
    }
}
