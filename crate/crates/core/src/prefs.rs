//! Linear orders, profiles, tallies and the initial arrangement.
//!
//! Rankings of `m` alternatives are indexed by their position in the
//! lexicographic enumeration of permutations of `(A1, …, Am)`: index 0 is
//! `A1>A2>…>Am`, index `m!−1` is `Am>…>A1`. Alternatives are 0-based
//! internally (`A1` is 0); the 1-based `p_j` labels map to index `j − 1`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::num::{parse_rational, sum, Scalar, Q};
use crate::rules::ScoringRule;

/// Largest alternative count for which the `m!` ranking table is built.
pub const MAX_ALTERNATIVES: usize = 8;

pub fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// A complete strict ranking; `order[r]` is the alternative placed `r`-th.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ranking(pub Vec<usize>);

impl Ranking {
    pub fn m(&self) -> usize {
        self.0.len()
    }

    pub fn top(&self) -> usize {
        self.0[0]
    }

    /// Rank (0-based) of each alternative.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.0.len()];
        for (r, &a) in self.0.iter().enumerate() {
            pos[a] = r;
        }
        pos
    }

    pub fn is_permutation(&self) -> bool {
        let mut seen = vec![false; self.0.len()];
        self.0.iter().all(|&a| a < seen.len() && !std::mem::replace(&mut seen[a], true))
    }

    /// Lexicographic index via the Lehmer code.
    pub fn index(&self) -> usize {
        let m = self.0.len();
        let mut idx = 0;
        for i in 0..m {
            let smaller_after = self.0[i + 1..].iter().filter(|&&a| a < self.0[i]).count();
            idx += smaller_after * factorial(m - 1 - i);
        }
        idx
    }

    pub fn from_index(m: usize, mut index: usize) -> Ranking {
        let mut pool: Vec<usize> = (0..m).collect();
        let mut order = Vec::with_capacity(m);
        for i in (0..m).rev() {
            let f = factorial(i);
            order.push(pool.remove(index / f));
            index %= f;
        }
        Ranking(order)
    }

    /// Parses `A2>A1>A3` (1-based names).
    pub fn parse(s: &str) -> Result<Ranking> {
        let order = s
            .split('>')
            .map(|tok| {
                let tok = tok.trim();
                tok.strip_prefix(['A', 'a'])
                    .and_then(|n| n.parse::<usize>().ok())
                    .filter(|&n| n >= 1)
                    .map(|n| n - 1)
                    .ok_or_else(|| Error::Parse(format!("bad alternative `{tok}` in ranking `{s}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        let r = Ranking(order);
        if !r.is_permutation() {
            return Err(Error::Parse(format!("`{s}` is not a permutation")));
        }
        Ok(r)
    }
}

impl fmt::Display for Ranking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(">")?;
            }
            write!(f, "A{}", a + 1)?;
        }
        Ok(())
    }
}

/// All `m!` rankings in canonical order.
pub fn enumerate_rankings(m: usize) -> Result<Vec<Ranking>> {
    if m > MAX_ALTERNATIVES {
        return Err(Error::SizeLimit(format!("m = {m} exceeds {MAX_ALTERNATIVES}")));
    }
    if m < 2 {
        return Err(Error::DimensionMismatch { expected: 2, actual: m });
    }
    let mut out = Vec::with_capacity(factorial(m));
    let mut current: Vec<usize> = (0..m).collect();
    loop {
        out.push(Ranking(current.clone()));
        if !next_permutation(&mut current) {
            break;
        }
    }
    Ok(out)
}

fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = v.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = v.iter().rposition(|&x| x > v[i]).expect("pivot has a successor");
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

/// Rankings and their inverse (rank of each alternative), flattened for
/// the hot loops.
#[derive(Debug, Clone)]
pub struct RankingTable {
    m: usize,
    orders: Vec<u8>,
    positions: Vec<u8>,
}

impl RankingTable {
    pub fn new(m: usize) -> Result<Self> {
        let rankings = enumerate_rankings(m)?;
        let mut orders = Vec::with_capacity(rankings.len() * m);
        let mut positions = Vec::with_capacity(rankings.len() * m);
        for r in &rankings {
            orders.extend(r.0.iter().map(|&a| a as u8));
            positions.extend(r.positions().into_iter().map(|p| p as u8));
        }
        Ok(RankingTable { m, orders, positions })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.orders.len() / self.m
    }

    pub fn is_empty(&self) -> bool {
        self.orders.is_empty()
    }

    /// Alternative at each rank of ranking `j`.
    #[inline]
    pub fn order(&self, j: usize) -> &[u8] {
        &self.orders[j * self.m..(j + 1) * self.m]
    }

    /// Rank of each alternative in ranking `j`.
    #[inline]
    pub fn positions(&self, j: usize) -> &[u8] {
        &self.positions[j * self.m..(j + 1) * self.m]
    }

    pub fn ranking(&self, j: usize) -> Ranking {
        Ranking(self.order(j).iter().map(|&a| a as usize).collect())
    }

    /// True when ranking `j` puts `a` above `b`.
    #[inline]
    pub fn prefers(&self, j: usize, a: usize, b: usize) -> bool {
        let pos = self.positions(j);
        pos[a] < pos[b]
    }
}

/// Points matrix: row `j` holds the points each alternative receives from
/// ranking `j`.
pub fn points_matrix(rule: &ScoringRule) -> Result<Vec<Vec<Q>>> {
    let table = RankingTable::new(rule.m())?;
    Ok((0..table.len())
        .map(|j| table.positions(j).iter().map(|&p| rule.weights()[p as usize].clone()).collect())
        .collect())
}

/// Normalized anonymous profile: one share per ranking, in canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile<T = Q> {
    m: usize,
    shares: Vec<T>,
}

impl<T: Scalar> Profile<T> {
    pub fn new(m: usize, shares: Vec<T>) -> Result<Self> {
        if m > MAX_ALTERNATIVES {
            return Err(Error::SizeLimit(format!("m = {m} exceeds {MAX_ALTERNATIVES}")));
        }
        let expected = factorial(m);
        if shares.len() != expected {
            return Err(Error::DimensionMismatch { expected, actual: shares.len() });
        }
        if let Some(j) = shares.iter().position(|s| s.is_negative()) {
            return Err(Error::InvalidProfile(format!("share of ranking {j} is negative")));
        }
        if !sum(shares.iter().cloned()).unit_sum() {
            return Err(Error::InvalidProfile("shares do not sum to 1".into()));
        }
        Ok(Profile { m, shares })
    }

    /// All mass on one ranking.
    pub fn unanimous(m: usize, ranking: usize) -> Result<Self> {
        let mut shares = vec![T::zero(); factorial(m)];
        *shares.get_mut(ranking).ok_or(Error::DimensionMismatch { expected: factorial(m), actual: ranking })? =
            T::one();
        Self::new(m, shares)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn shares(&self) -> &[T] {
        &self.shares
    }

    pub fn share(&self, ranking: usize) -> &T {
        &self.shares[ranking]
    }
}

impl Profile<Q> {
    /// Shares given as 1-based `(p_j, value)` pairs; the rest are zero.
    pub fn from_sparse(m: usize, entries: &[(usize, Q)]) -> Result<Self> {
        let mut shares = vec![Q::zero(); factorial(m)];
        for (j, v) in entries {
            let slot = j
                .checked_sub(1)
                .and_then(|i| shares.get_mut(i))
                .ok_or_else(|| Error::InvalidProfile(format!("no ranking p_{j} for m = {m}")))?;
            *slot += v;
        }
        Self::new(m, shares)
    }

    pub fn to_f64(&self) -> Profile<f64> {
        Profile { m: self.m, shares: self.shares.iter().map(Scalar::to_f64).collect() }
    }

    /// Reads the JSON profile formats: `{"m", "shares": [..]}`,
    /// `{"m", "sparse": {"A2>A1>A3": "2/9"}}` or `{"m", "counts": [..]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ProfileDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        doc.into_profile()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "m": self.m,
            "shares": self.shares.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
        })
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileDoc {
    m: usize,
    #[serde(default)]
    shares: Option<Vec<NumberOrString>>,
    #[serde(default)]
    sparse: Option<BTreeMap<String, NumberOrString>>,
    #[serde(default)]
    counts: Option<Vec<u64>>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum NumberOrString {
    Text(String),
    Number(serde_json::Number),
}

impl NumberOrString {
    fn to_rational(&self) -> Result<Q> {
        match self {
            NumberOrString::Text(s) => parse_rational(s),
            NumberOrString::Number(n) => parse_rational(&n.to_string()),
        }
    }
}

impl ProfileDoc {
    fn into_profile(self) -> Result<Profile> {
        let m = self.m;
        match (self.shares, self.sparse, self.counts) {
            (Some(shares), None, None) => {
                Profile::new(m, shares.iter().map(NumberOrString::to_rational).collect::<Result<_>>()?)
            }
            (None, Some(sparse), None) => {
                let mut shares = vec![Q::zero(); factorial(m)];
                for (key, value) in sparse {
                    let r = Ranking::parse(&key)?;
                    if r.m() != m {
                        return Err(Error::DimensionMismatch { expected: m, actual: r.m() });
                    }
                    shares[r.index()] += value.to_rational()?;
                }
                Profile::new(m, shares)
            }
            (None, None, Some(counts)) => IntProfile::new(m, counts)?.to_profile(),
            _ => Err(Error::Parse("profile needs exactly one of `shares`, `sparse`, `counts`".into())),
        }
    }
}

/// Parses a sparse `{"A2>A1>A3": "2/9", …}` map into `(index, value)` pairs.
pub fn parse_sparse_map(text: &str, m: usize) -> Result<Vec<(usize, Q)>> {
    let doc: BTreeMap<String, NumberOrString> =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    doc.into_iter()
        .map(|(k, v)| {
            let r = Ranking::parse(&k)?;
            if r.m() != m {
                return Err(Error::DimensionMismatch { expected: m, actual: r.m() });
            }
            Ok((r.index(), v.to_rational()?))
        })
        .collect()
}

/// Finite electorate: voter counts per ranking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntProfile {
    m: usize,
    counts: Vec<u64>,
}

impl IntProfile {
    pub fn new(m: usize, counts: Vec<u64>) -> Result<Self> {
        if m > MAX_ALTERNATIVES {
            return Err(Error::SizeLimit(format!("m = {m} exceeds {MAX_ALTERNATIVES}")));
        }
        if counts.len() != factorial(m) {
            return Err(Error::DimensionMismatch { expected: factorial(m), actual: counts.len() });
        }
        Ok(IntProfile { m, counts })
    }

    /// Infers `m` from the number of counts.
    pub fn from_counts(counts: Vec<u64>) -> Result<Self> {
        let m = (2..=MAX_ALTERNATIVES)
            .find(|&m| factorial(m) == counts.len())
            .ok_or_else(|| Error::Parse(format!("{} counts is not m! for any m ≤ {MAX_ALTERNATIVES}", counts.len())))?;
        Self::new(m, counts)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn n(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn to_profile(&self) -> Result<Profile> {
        let n = self.n();
        if n == 0 {
            return Err(Error::InvalidProfile("empty electorate".into()));
        }
        let n = Q::from_integer(n.into());
        Profile::new(self.m, self.counts.iter().map(|&c| Q::from_integer(c.into()) / &n).collect())
    }
}

/// Scores of every alternative: `profileᵀ × points_matrix`.
pub fn tally<T: Scalar>(profile: &Profile<T>, rule: &ScoringRule) -> Result<Vec<T>> {
    if profile.m() != rule.m() {
        return Err(Error::DimensionMismatch { expected: rule.m(), actual: profile.m() });
    }
    let table = RankingTable::new(rule.m())?;
    Ok(tally_with(&table, profile.shares(), &rule.weights_as::<T>()))
}

pub(crate) fn tally_with<T: Scalar>(table: &RankingTable, shares: &[T], weights: &[T]) -> Vec<T> {
    let mut scores = vec![T::zero(); table.m()];
    for (j, share) in shares.iter().enumerate() {
        if share.is_zero() {
            continue;
        }
        for (a, &p) in table.positions(j).iter().enumerate() {
            scores[a] = scores[a].clone() + share.clone() * weights[p as usize].clone();
        }
    }
    scores
}

/// Strict collective order, or the tied pairs that prevent one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Arrangement {
    Strict(Vec<usize>),
    Tied(TieReport),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TieReport {
    /// Pairs `(a, b)`, `a < b`, of alternatives with equal scores.
    pub pairs: Vec<(usize, usize)>,
}

impl Arrangement {
    pub fn strict(self) -> Result<Vec<usize>> {
        match self {
            Arrangement::Strict(order) => Ok(order),
            Arrangement::Tied(t) => Err(Error::TiedArrangement(t.pairs)),
        }
    }
}

pub fn arrangement<T: Scalar>(scores: &[T]) -> Arrangement {
    let mut pairs = Vec::new();
    for a in 0..scores.len() {
        for b in a + 1..scores.len() {
            if scores[a] == scores[b] {
                pairs.push((a, b));
            }
        }
    }
    if !pairs.is_empty() {
        return Arrangement::Tied(TieReport { pairs });
    }
    Arrangement::Strict(sorted_by_score(scores))
}

/// Alternatives by descending score, ties by index.
pub(crate) fn sorted_by_score<T: Scalar>(scores: &[T]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b)));
    order
}

/// Renames alternatives: alternative `a` becomes `perm[a]`.
pub fn relabel<T: Scalar>(profile: &Profile<T>, perm: &[usize]) -> Result<Profile<T>> {
    let m = profile.m();
    if perm.len() != m || !Ranking(perm.to_vec()).is_permutation() {
        return Err(Error::Parse(format!("{perm:?} is not a permutation of {m} alternatives")));
    }
    let mut shares = vec![T::zero(); profile.shares.len()];
    for (j, share) in profile.shares.iter().enumerate() {
        let moved = Ranking(Ranking::from_index(m, j).0.into_iter().map(|a| perm[a]).collect());
        shares[moved.index()] = share.clone();
    }
    Ok(Profile { m, shares })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{q, qi};
    use crate::fixtures::borda4_worked_example as worked_example;
    use crate::rules::NamedRule;
    use proptest::prelude::*;

    #[test]
    fn enumeration_order() {
        let r3 = enumerate_rankings(3).unwrap();
        assert_eq!(r3.len(), 6);
        assert_eq!(r3[0].to_string(), "A1>A2>A3");
        assert_eq!(r3[2].to_string(), "A2>A1>A3");
        assert_eq!(r3[5].to_string(), "A3>A2>A1");
        let r4 = enumerate_rankings(4).unwrap();
        assert_eq!(r4[6].to_string(), "A2>A1>A3>A4");
        assert_eq!(r4[13].to_string(), "A3>A1>A4>A2");
        assert_eq!(r4[19].to_string(), "A4>A1>A3>A2");
        assert!(matches!(enumerate_rankings(9), Err(Error::SizeLimit(_))));
    }

    #[test]
    fn index_round_trip_all_m() {
        for m in 2..=MAX_ALTERNATIVES {
            for (i, r) in enumerate_rankings(m).unwrap().iter().enumerate() {
                assert_eq!(r.index(), i);
                if i % 97 == 0 {
                    assert_eq!(&Ranking::from_index(m, i), r);
                }
            }
        }
    }

    #[test]
    fn points_matrix_rows() {
        let borda = ScoringRule::named(NamedRule::Borda, 4).unwrap();
        let pm = points_matrix(&borda).unwrap();
        assert_eq!(pm[6], vec![qi(2), qi(3), qi(1), qi(0)]);
        let weighted: Vec<Q> = pm[6].iter().map(|x| x * q(2, 9)).collect();
        assert_eq!(weighted, vec![q(4, 9), q(6, 9), q(2, 9), qi(0)]);

        let plur = points_matrix(&ScoringRule::named(NamedRule::Plurality, 4).unwrap()).unwrap();
        for (j, row) in plur.iter().enumerate() {
            let top = Ranking::from_index(4, j).top();
            for (a, v) in row.iter().enumerate() {
                assert_eq!(*v, if a == top { qi(1) } else { qi(0) });
            }
        }
        let anti = points_matrix(&ScoringRule::named(NamedRule::Antiplurality, 3).unwrap()).unwrap();
        assert_eq!(anti[5], vec![qi(0), qi(1), qi(1)]);
    }

    #[test]
    fn tally_examples() {
        let borda4 = ScoringRule::named(NamedRule::Borda, 4).unwrap();
        assert_eq!(tally(&worked_example(), &borda4).unwrap(), vec![q(16, 9), q(14, 9), q(13, 9), q(11, 9)]);

        let borda3 = ScoringRule::named(NamedRule::Borda, 3).unwrap();
        let ex1 = Profile::from_sparse(3, &[(1, q(5, 9)), (3, q(4, 9))]).unwrap();
        assert_eq!(tally(&ex1, &borda3).unwrap(), vec![q(14, 9), q(13, 9), qi(0)]);

        let uniform = Profile::new(4, vec![q(1, 24); 24]).unwrap();
        let s = tally(&uniform, &borda4).unwrap();
        assert!(s.iter().all(|x| *x == s[0]));

        let p3 = Profile::<Q>::unanimous(3, 0).unwrap();
        assert!(matches!(tally(&p3, &borda4), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn arrangement_examples() {
        assert_eq!(
            arrangement(&[q(16, 9), q(14, 9), q(13, 9), q(11, 9)]),
            Arrangement::Strict(vec![0, 1, 2, 3])
        );
        match arrangement(&[qi(1), qi(1), qi(1)]) {
            Arrangement::Tied(t) => assert_eq!(t.pairs, vec![(0, 1), (0, 2), (1, 2)]),
            other => panic!("{other:?}"),
        }
        let rule = ScoringRule::new(vec![qi(1), q(1, 3), qi(0)]).unwrap();
        let s = tally(&Profile::<Q>::unanimous(3, 0).unwrap(), &rule).unwrap();
        assert_eq!(arrangement(&s), Arrangement::Strict(vec![0, 1, 2]));
        assert_eq!(arrangement(&[1.0, 3.0, 2.0]), Arrangement::Strict(vec![1, 2, 0]));
    }

    #[test]
    fn relabel_examples() {
        let p = worked_example();
        assert_eq!(relabel(&p, &[0, 1, 2, 3]).unwrap(), p);
        let swapped = relabel(&Profile::<Q>::unanimous(3, 0).unwrap(), &[1, 0, 2]).unwrap();
        assert_eq!(swapped.share(2), &qi(1));
        assert!(relabel(&p, &[0, 0, 1, 2]).is_err());
    }

    #[test]
    fn profile_validation() {
        assert!(matches!(Profile::new(3, vec![q(1, 6); 5]), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(Profile::new(3, vec![q(1, 5); 6]), Err(Error::InvalidProfile(_))));
        let mut neg = vec![q(1, 4); 6];
        neg[0] = q(-1, 2);
        neg[1] = q(1, 2);
        assert!(Profile::new(3, neg).is_err());
    }

    #[test]
    fn json_formats() {
        let dense = Profile::from_json(r#"{"m":3,"shares":["5/9",0,"4/9","0","0",0.0]}"#).unwrap();
        let sparse = Profile::from_json(r#"{"m":3,"sparse":{"A1>A2>A3":"5/9","A2>A1>A3":"4/9"}}"#).unwrap();
        let counts = Profile::from_json(r#"{"m":3,"counts":[5,0,4,0,0,0]}"#).unwrap();
        assert_eq!(dense, sparse);
        assert_eq!(dense, counts);
        assert_eq!(Profile::from_json(&dense.to_json().to_string()).unwrap(), dense);
        assert!(Profile::from_json(r#"{"m":3}"#).is_err());
        assert!(Profile::from_json(r#"{"m":3,"sparse":{"A1>A1>A3":"1"}}"#).is_err());
    }

    #[test]
    fn int_profile() {
        let p = IntProfile::from_counts(vec![6, 7, 8, 0, 0, 0]).unwrap();
        assert_eq!((p.m(), p.n()), (3, 21));
        assert_eq!(p.to_profile().unwrap().share(2), &q(8, 21));
        assert!(IntProfile::from_counts(vec![1, 2, 3]).is_err());
    }

    fn random_profile(m: usize) -> impl Strategy<Value = Profile> {
        prop::collection::vec(0u32..20, factorial(m)).prop_filter_map("empty", move |c| {
            IntProfile::new(m, c.into_iter().map(u64::from).collect()).ok()?.to_profile().ok()
        })
    }

    fn perm(m: usize) -> impl Strategy<Value = Vec<usize>> {
        Just((0..m).collect::<Vec<_>>()).prop_shuffle()
    }

    proptest! {
        #[test]
        fn point_conservation(p in random_profile(4), w in prop::collection::vec(0i64..10, 4)) {
            let mut w = w;
            w.sort_unstable_by(|a, b| b.cmp(a));
            prop_assume!(w[0] > w[3]);
            let rule = ScoringRule::from_integers(&w).unwrap();
            let total: Q = tally(&p, &rule).unwrap().into_iter().sum();
            prop_assert_eq!(total, rule.weights().iter().sum::<Q>());
        }

        #[test]
        fn relabel_commutes_with_tally(p in random_profile(4), pi in perm(4)) {
            let rule = ScoringRule::named(NamedRule::Borda, 4).unwrap();
            let before = tally(&p, &rule).unwrap();
            let after = tally(&relabel(&p, &pi).unwrap(), &rule).unwrap();
            for a in 0..4 {
                prop_assert_eq!(&after[pi[a]], &before[a]);
            }
        }

        #[test]
        fn relabel_is_group_action(p in random_profile(3), pi in perm(3), rho in perm(3)) {
            let twice = relabel(&relabel(&p, &pi).unwrap(), &rho).unwrap();
            let composed: Vec<usize> = (0..3).map(|a| rho[pi[a]]).collect();
            prop_assert_eq!(twice, relabel(&p, &composed).unwrap());
        }
    }
}
