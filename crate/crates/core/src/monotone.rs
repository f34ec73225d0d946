//! Non-decreasing selections from per-value bid sets.
//!
//! A selection picks one bid per value from `allowed[v]`; it is monotone when the
//! picks never decrease in `v`. Sets are sorted ascending throughout.

use num_bigint::BigInt;
use num_traits::One;

/// Pointwise lowest and highest monotone selections.
///
/// `lo[v] <= s[v] <= hi[v]` for every monotone selection `s`, and a bid `b` in
/// `allowed[v]` lies on some monotone selection exactly when `lo[v] <= b <= hi[v]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Envelope {
    pub lo: Vec<usize>,
    pub hi: Vec<usize>,
}

/// `None` when no monotone selection exists.
pub fn envelope(allowed: &[Vec<usize>]) -> Option<Envelope> {
    let s = allowed.len();
    let mut lo = Vec::with_capacity(s);
    let mut floor = 0usize;
    for set in allowed {
        let c = *set.iter().find(|&&c| c >= floor)?;
        lo.push(c);
        floor = c;
    }
    let mut hi = vec![0usize; s];
    let mut ceil = usize::MAX;
    for v in (0..s).rev() {
        let c = *allowed[v].iter().rev().find(|&&c| c <= ceil)?;
        hi[v] = c;
        ceil = c;
    }
    Some(Envelope { lo, hi })
}

/// Number of monotone selections.
pub fn count_monotone(allowed: &[Vec<usize>]) -> BigInt {
    // ways[i]: selections of values 0..=v ending with bid allowed[v][i].
    let mut prev: Vec<(usize, BigInt)> = Vec::new();
    for (v, set) in allowed.iter().enumerate() {
        let cur: Vec<(usize, BigInt)> = set
            .iter()
            .map(|&c| {
                let ways = if v == 0 {
                    BigInt::one()
                } else {
                    prev.iter().filter(|(p, _)| *p <= c).map(|(_, w)| w).sum()
                };
                (c, ways)
            })
            .collect();
        prev = cur;
    }
    prev.into_iter().map(|(_, w)| w).sum()
}

/// Calls `visit` on every monotone selection in lexicographic order. Stops early
/// when `visit` returns `false`; the return value says whether the walk finished.
pub fn for_each_monotone(allowed: &[Vec<usize>], mut visit: impl FnMut(&[usize]) -> bool) -> bool {
    let mut current = Vec::with_capacity(allowed.len());
    walk(allowed, &mut current, &mut visit)
}

fn walk(
    allowed: &[Vec<usize>],
    current: &mut Vec<usize>,
    visit: &mut impl FnMut(&[usize]) -> bool,
) -> bool {
    let v = current.len();
    if v == allowed.len() {
        return visit(current);
    }
    let floor = current.last().copied().unwrap_or(0);
    for &c in allowed[v].iter().filter(|&&c| c >= floor) {
        current.push(c);
        let go_on = walk(allowed, current, visit);
        current.pop();
        if !go_on {
            return false;
        }
    }
    true
}

/// Calls `visit` on every selection, monotone or not, in lexicographic order.
pub fn for_each_selection(allowed: &[Vec<usize>], mut visit: impl FnMut(&[usize]) -> bool) -> bool {
    if allowed.iter().any(|s| s.is_empty()) {
        return true;
    }
    let mut idx = vec![0usize; allowed.len()];
    let mut current: Vec<usize> = allowed.iter().map(|s| s[0]).collect();
    loop {
        if !visit(&current) {
            return false;
        }
        let mut v = allowed.len();
        loop {
            if v == 0 {
                return true;
            }
            v -= 1;
            idx[v] += 1;
            if idx[v] < allowed[v].len() {
                current[v] = allowed[v][idx[v]];
                break;
            }
            idx[v] = 0;
            current[v] = allowed[v][0];
        }
    }
}

/// Every monotone selection, or `None` if there are more than `limit`.
pub fn monotone_selections(allowed: &[Vec<usize>], limit: usize) -> Option<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    let finished = for_each_monotone(allowed, |s| {
        if out.len() == limit {
            return false;
        }
        out.push(s.to_vec());
        true
    });
    finished.then_some(out)
}
