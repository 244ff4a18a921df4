//! Exhaustive search over anonymous strategies of a finite electorate.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::prefs::{IntProfile, Ranking, RankingTable};
use crate::rules::ScoringRule;

use super::k_first;

/// Default cap on the number of anonymous strategies examined.
pub const DEFAULT_STRATEGY_LIMIT: u128 = 10_000_000;

const MAX_FINITE_ALTERNATIVES: usize = 5;

#[derive(Debug, Clone)]
pub struct FiniteOptions {
    /// At most this many coalition members take part.
    pub cap: Option<u64>,
    /// Let the coalition cast any ranking, not only `A_k`-first ones.
    pub all_ballots: bool,
    pub limit: u128,
}

impl Default for FiniteOptions {
    fn default() -> Self {
        FiniteOptions { cap: None, all_ballots: false, limit: DEFAULT_STRATEGY_LIMIT }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteResult {
    pub manipulable: bool,
    /// Voters preferring `A_k` to the winner.
    pub coalition_count: u64,
    /// Ballot counts cast by the participating members.
    pub strategy: Option<Vec<(Ranking, u64)>>,
    /// Members taking part, by sincere ranking (bounded mode).
    pub selection: Option<Vec<(Ranking, u64)>>,
    /// Number of anonymous strategies in the search space.
    pub search_space: u128,
}

pub fn finite_brute_force(profile: &IntProfile, rule: &ScoringRule, k: usize, cap: Option<u64>) -> Result<FiniteResult> {
    finite_brute_force_with(profile, rule, k, &FiniteOptions { cap, ..FiniteOptions::default() })
}

pub fn finite_brute_force_with(profile: &IntProfile, rule: &ScoringRule, k: usize, opts: &FiniteOptions) -> Result<FiniteResult> {
    let m = rule.m();
    if profile.m() != m {
        return Err(Error::DimensionMismatch { expected: m, actual: profile.m() });
    }
    if m > MAX_FINITE_ALTERNATIVES {
        return Err(Error::SizeLimit(format!("finite search supports m ≤ {MAX_FINITE_ALTERNATIVES}, got {m}")));
    }
    if k >= m {
        return Err(Error::DimensionMismatch { expected: m, actual: k + 1 });
    }
    let table = RankingTable::new(m)?;
    let weights = integer_weights(rule)?;
    let points: Vec<Vec<i128>> =
        (0..table.len()).map(|j| table.positions(j).iter().map(|&p| weights[p as usize] as i128).collect()).collect();

    let mut scores = vec![0i128; m];
    for (j, &c) in profile.counts().iter().enumerate() {
        add(&mut scores, &points[j], c as i128);
    }
    let best = *scores.iter().max().expect("m ≥ 1");
    let top: Vec<usize> = (0..m).filter(|&a| scores[a] == best).collect();
    if top.len() > 1 {
        let pairs = top.iter().enumerate().flat_map(|(i, &a)| top[i + 1..].iter().map(move |&b| (a, b))).collect();
        return Err(Error::TiedArrangement(pairs));
    }
    let winner = top[0];
    if k == winner {
        return Err(Error::NotApplicable(k + 1));
    }

    let members: Vec<(usize, u64)> = profile
        .counts()
        .iter()
        .enumerate()
        .filter(|&(j, &c)| c > 0 && table.prefers(j, k, winner))
        .map(|(j, &c)| (j, c))
        .collect();
    let coalition_count: u64 = members.iter().map(|(_, c)| c).sum();
    let ballots: Vec<usize> = if opts.all_ballots { (0..table.len()).collect() } else { k_first(&table, k) };
    let ballot_points: Vec<Vec<i128>> = ballots.iter().map(|&j| points[j].clone()).collect();
    let r = ballots.len() as u128;

    let to_rankings = |idx: &[usize], counts: &[u64]| -> Vec<(Ranking, u64)> {
        idx.iter().zip(counts).filter(|(_, &c)| c > 0).map(|(&j, &c)| (table.ranking(j), c)).collect()
    };
    let not_found = |space| FiniteResult { manipulable: false, coalition_count, strategy: None, selection: None, search_space: space };

    match opts.cap {
        None => {
            let space = multisets(coalition_count as u128, r);
            check_limit(space, opts.limit)?;
            let mut residual = scores.clone();
            for &(j, c) in &members {
                add(&mut residual, &points[j], -(c as i128));
            }
            Ok(match search(&ballot_points, &residual, coalition_count, k) {
                Some(counts) => FiniteResult {
                    manipulable: true,
                    coalition_count,
                    strategy: Some(to_rankings(&ballots, &counts)),
                    selection: None,
                    search_space: space,
                },
                None => not_found(space),
            })
        }
        Some(cap) => {
            let upper = cap.min(coalition_count);
            let limits: Vec<u64> = members.iter().map(|(_, c)| *c).collect();
            let selections = bounded_compositions(&limits, upper);
            let space = (1..=upper).fold(0u128, |acc, s| {
                acc.saturating_add(selections[s as usize].saturating_mul(multisets(s as u128, r)))
            });
            check_limit(space, opts.limit)?;
            let member_idx: Vec<usize> = members.iter().map(|(j, _)| *j).collect();
            for s in 1..=upper {
                let mut found = None;
                for_each_selection(&limits, s, &mut |sel| {
                    let mut residual = scores.clone();
                    for (&(j, _), &t) in members.iter().zip(sel) {
                        add(&mut residual, &points[j], -(t as i128));
                    }
                    match search(&ballot_points, &residual, s, k) {
                        Some(counts) => {
                            found = Some((sel.to_vec(), counts));
                            true
                        }
                        None => false,
                    }
                });
                if let Some((sel, counts)) = found {
                    return Ok(FiniteResult {
                        manipulable: true,
                        coalition_count,
                        strategy: Some(to_rankings(&ballots, &counts)),
                        selection: Some(to_rankings(&member_idx, &sel)),
                        search_space: space,
                    });
                }
            }
            Ok(not_found(space))
        }
    }
}

fn check_limit(space: u128, limit: u128) -> Result<()> {
    if space > limit {
        return Err(Error::SizeLimit(format!("{space} anonymous strategies exceed the limit of {limit}")));
    }
    Ok(())
}

/// Weights scaled by the common denominator to integers.
fn integer_weights(rule: &ScoringRule) -> Result<Vec<i64>> {
    let lcm = rule.weights().iter().fold(BigInt::one(), |acc, w| acc.lcm(w.denom()));
    rule.weights()
        .iter()
        .map(|w| {
            (w.numer() * (&lcm / w.denom()))
                .to_i64()
                .ok_or_else(|| Error::SizeLimit("integer-scaled weights overflow 64 bits".into()))
        })
        .collect()
}

fn add(scores: &mut [i128], points: &[i128], times: i128) {
    for (s, p) in scores.iter_mut().zip(points) {
        *s += times * p;
    }
}

/// `C(size + kinds − 1, kinds − 1)`, saturating.
fn multisets(size: u128, kinds: u128) -> u128 {
    if kinds == 0 {
        return u128::from(size == 0);
    }
    let mut acc: u128 = 1;
    for i in 1..kinds {
        acc = match acc.checked_mul(size + i) {
            Some(v) => v / i,
            None => return u128::MAX,
        };
    }
    acc
}

/// `out[s]` = number of vectors `t ≤ limits` with `Σ t = s`, for `s ≤ upper`.
fn bounded_compositions(limits: &[u64], upper: u64) -> Vec<u128> {
    let upper = upper as usize;
    let mut out = vec![0u128; upper + 1];
    out[0] = 1;
    for &l in limits {
        let mut next = vec![0u128; upper + 1];
        for (s, &v) in out.iter().enumerate() {
            if v == 0 {
                continue;
            }
            for t in 0..=(l as usize).min(upper - s) {
                next[s + t] = next[s + t].saturating_add(v);
            }
        }
        out = next;
    }
    out
}

/// Calls `f` on every `t ≤ limits` with `Σ t = total` until it returns true.
fn for_each_selection(limits: &[u64], total: u64, f: &mut dyn FnMut(&[u64]) -> bool) {
    fn rec(limits: &[u64], i: usize, left: u64, cur: &mut Vec<u64>, f: &mut dyn FnMut(&[u64]) -> bool) -> bool {
        if i == limits.len() {
            return left == 0 && f(cur);
        }
        let room: u64 = limits[i + 1..].iter().sum();
        let lo = left.saturating_sub(room);
        for t in lo..=limits[i].min(left) {
            cur.push(t);
            let stop = rec(limits, i + 1, left - t, cur, f);
            cur.pop();
            if stop {
                return true;
            }
        }
        false
    }
    rec(limits, 0, total, &mut Vec::with_capacity(limits.len()), f);
}

/// First multiset of `size` ballots (in lexicographic order of the count
/// vector, largest first count first) making `k` the strict unique winner.
fn search(ballots: &[Vec<i128>], residual: &[i128], size: u64, k: usize) -> Option<Vec<u64>> {
    let first_counts = (0..=size).rev();
    let attempt = |c0: u64| {
        let mut scores = residual.to_vec();
        add(&mut scores, &ballots[0], c0 as i128);
        let mut counts = vec![0u64; ballots.len()];
        counts[0] = c0;
        descend(ballots, 1, size - c0, &mut scores, &mut counts, k).then_some(counts)
    };
    #[cfg(feature = "parallel")]
    {
        first_counts.collect::<Vec<_>>().into_par_iter().find_map_first(attempt)
    }
    #[cfg(not(feature = "parallel"))]
    {
        first_counts.into_iter().find_map(attempt)
    }
}

fn descend(ballots: &[Vec<i128>], i: usize, left: u64, scores: &mut [i128], counts: &mut [u64], k: usize) -> bool {
    if i + 1 >= ballots.len() {
        if i < ballots.len() {
            add(scores, &ballots[i], left as i128);
            counts[i] = left;
        } else if left > 0 {
            return false;
        }
        let win = scores.iter().enumerate().all(|(a, &s)| a == k || s < scores[k]);
        if i < ballots.len() {
            add(scores, &ballots[i], -(left as i128));
            if !win {
                counts[i] = 0;
            }
        }
        return win;
    }
    for c in (0..=left).rev() {
        add(scores, &ballots[i], c as i128);
        counts[i] = c;
        let win = descend(ballots, i + 1, left - c, scores, counts, k);
        add(scores, &ballots[i], -(c as i128));
        if win {
            return true;
        }
    }
    counts[i] = 0;
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiset_counts() {
        assert_eq!(multisets(4, 2), 5);
        assert_eq!(multisets(0, 6), 1);
        assert_eq!(multisets(8, 6), 1287);
        assert_eq!(bounded_compositions(&[2, 1], 3), vec![1, 2, 2, 1]);
        let mut seen = 0;
        for_each_selection(&[2, 1, 3], 3, &mut |_| {
            seen += 1;
            false
        });
        assert_eq!(seen as u128, bounded_compositions(&[2, 1, 3], 3)[3]);
    }
}
