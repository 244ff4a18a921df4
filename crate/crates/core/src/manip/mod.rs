//! Manipulability verdicts for coalitions of maximal (or capped) size.
//!
//! Given the sincere winner `W` and an unifying alternative `A_k`, the
//! coalition consists of every voter ranking `A_k` above `W`. Members first
//! commit only their top slot to `A_k`; `d(A_k, A_i)` is the resulting point
//! gap to each rival. With `M_1 ≥ … ≥ M_{m−1}` the sorted gaps and `c` the
//! coalition mass, the coalition can make `A_k` the strict winner iff for
//! every `ℓ = 0, …, m−2`
//!
//! ```text
//! Σ d − (M_1 + … + M_ℓ) > (w_{ℓ+2} + … + w_m) · c
//! ```
//!
//! together with a strict initial arrangement. The last line (`ℓ = m−2`)
//! reads `M_{m−1} > w_m · c`.

mod emit;

pub use emit::{emit_system, EmitFormat, EmittedSystem, Inequality, LinearForm};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::num::{min_of, sum, Scalar, Q};
use crate::prefs::{arrangement, tally_with, Profile, RankingTable};
use crate::rules::{NamedRule, ScoringRule};

/// Voters ranking `unifying` above `winner`.
#[derive(Debug, Clone, PartialEq)]
pub struct Coalition<T = Q> {
    pub winner: usize,
    pub unifying: usize,
    /// Ranking indices whose voters belong to the coalition (`m!/2` of them).
    pub member_types: Vec<usize>,
    pub size: T,
}

pub fn coalition<T: Scalar>(profile: &Profile<T>, winner: usize, k: usize) -> Result<Coalition<T>> {
    let m = profile.m();
    if winner >= m || k >= m {
        return Err(Error::DimensionMismatch { expected: m, actual: winner.max(k) + 1 });
    }
    if winner == k {
        return Err(Error::SameAlternative(k + 1));
    }
    let table = RankingTable::new(m)?;
    let member_types: Vec<usize> = (0..table.len()).filter(|&j| table.prefers(j, k, winner)).collect();
    let size = sum(member_types.iter().map(|&j| profile.share(j).clone()));
    Ok(Coalition { winner, unifying: k, member_types, size })
}

/// Gaps `d(A_k, A_i)` after coalition members commit their top slot to `A_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct DVector<T = Q> {
    pub unifying: usize,
    /// `(rival, gap)` in increasing rival order.
    pub gaps: Vec<(usize, T)>,
    /// Rivals sorted by decreasing gap, ties by lower index.
    pub rivals_by_gap: Vec<usize>,
    /// `M_1 ≥ M_2 ≥ …`.
    pub sorted_maxima: Vec<T>,
}

impl<T: Scalar> DVector<T> {
    pub fn gap(&self, rival: usize) -> Option<&T> {
        self.gaps.iter().find(|(i, _)| *i == rival).map(|(_, g)| g)
    }

    pub fn total(&self) -> T {
        sum(self.gaps.iter().map(|(_, g)| g.clone()))
    }

    pub(crate) fn from_gaps(unifying: usize, gaps: Vec<(usize, T)>) -> Self {
        let mut rivals_by_gap: Vec<usize> = (0..gaps.len()).collect();
        rivals_by_gap.sort_by(|&a, &b| {
            gaps[b].1.partial_cmp(&gaps[a].1).unwrap_or(std::cmp::Ordering::Equal).then(gaps[a].0.cmp(&gaps[b].0))
        });
        let sorted_maxima = rivals_by_gap.iter().map(|&i| gaps[i].1.clone()).collect();
        let rivals_by_gap = rivals_by_gap.into_iter().map(|i| gaps[i].0).collect();
        DVector { unifying, gaps, rivals_by_gap, sorted_maxima }
    }
}

/// Raw gap computation. `selected[j]` is the share of ranking `j` that
/// votes strategically (`A_k` first, rest withheld); the remainder of every
/// ranking votes sincerely.
pub(crate) fn gaps_with<T: Scalar>(
    table: &RankingTable,
    shares: &[T],
    selected: impl Fn(usize) -> T,
    weights: &[T],
    k: usize,
) -> Vec<(usize, T)> {
    let m = table.m();
    let mut scores = tally_with(table, shares, weights);
    for j in 0..table.len() {
        let s = selected(j);
        if s.is_zero() {
            continue;
        }
        for (a, &p) in table.positions(j).iter().enumerate() {
            scores[a] = scores[a].clone() - s.clone() * weights[p as usize].clone();
        }
        scores[k] = scores[k].clone() + s * weights[0].clone();
    }
    (0..m).filter(|&i| i != k).map(|i| (i, scores[k].clone() - scores[i].clone())).collect()
}

pub fn d_vector<T: Scalar>(profile: &Profile<T>, rule: &ScoringRule, winner: usize, k: usize) -> Result<DVector<T>> {
    let ctx = Context::new(profile, rule)?;
    if ctx.order[0] != winner {
        return Err(Error::InvalidProfile(format!("A{} is not the sincere winner", winner + 1)));
    }
    ctx.d_vector(k)
}

/// Strategic-inequality slacks, one per `ℓ = 0 … m−2`.
///
/// `sorted_gaps` is `M_1 ≥ … ≥ M_{m−1}`, `tail` is `(w_2, …, w_m)` and
/// `mass` the coalition size.
pub fn si_slacks<T: Scalar>(sorted_gaps: &[T], tail: &[T], mass: &T) -> Vec<T> {
    debug_assert_eq!(sorted_gaps.len(), tail.len());
    let n = sorted_gaps.len();
    let mut out = Vec::with_capacity(n);
    // lhs_ℓ = sum of the n−ℓ smallest gaps, rhs_ℓ = mass · Σ_{r ≥ ℓ} tail[r]
    let mut lhs = sum(sorted_gaps.iter().cloned());
    let mut tail_sum = sum(tail.iter().cloned());
    for l in 0..n {
        out.push(lhs.clone() - tail_sum.clone() * mass.clone());
        lhs = lhs - sorted_gaps[l].clone();
        tail_sum = tail_sum - tail[l].clone();
    }
    out
}

/// Verdict for one coalition.
#[derive(Debug, Clone, PartialEq)]
pub struct ManipVerdict<T = Q> {
    pub manipulable: bool,
    pub arrangement: Vec<usize>,
    /// `score(a_r) − score(a_{r+1})` along the arrangement.
    pub pi_slacks: Vec<T>,
    /// Left minus right side of each strategic inequality.
    pub si_slacks: Vec<T>,
    pub coalition: Coalition<T>,
    pub d: DVector<T>,
}

impl<T: Scalar> ManipVerdict<T> {
    pub fn unifying(&self) -> usize {
        self.coalition.unifying
    }

    pub fn winner(&self) -> usize {
        self.coalition.winner
    }

    /// Smallest slack in absolute value; zero means a boundary profile.
    pub fn min_abs_slack(&self) -> T {
        let abs = |x: &T| if x.is_negative() { T::zero() - x.clone() } else { x.clone() };
        min_of(self.pi_slacks.iter().chain(&self.si_slacks).map(abs)).unwrap_or_else(T::zero)
    }
}

/// Shared per-profile state: ranking table, weights, scores, arrangement.
pub(crate) struct Context<'a, T> {
    pub(crate) table: RankingTable,
    pub(crate) profile: &'a Profile<T>,
    pub(crate) weights: Vec<T>,
    pub(crate) scores: Vec<T>,
    pub(crate) order: Vec<usize>,
}

impl<'a, T: Scalar> Context<'a, T> {
    pub(crate) fn new(profile: &'a Profile<T>, rule: &ScoringRule) -> Result<Self> {
        if profile.m() != rule.m() {
            return Err(Error::DimensionMismatch { expected: rule.m(), actual: profile.m() });
        }
        if rule.m() < 3 {
            return Err(Error::DimensionMismatch { expected: 3, actual: rule.m() });
        }
        let table = RankingTable::new(rule.m())?;
        let weights = rule.weights_as::<T>();
        let scores = tally_with(&table, profile.shares(), &weights);
        let order = arrangement(&scores).strict()?;
        Ok(Context { table, profile, weights, scores, order })
    }

    pub(crate) fn winner(&self) -> usize {
        self.order[0]
    }

    pub(crate) fn check_unifying(&self, k: usize) -> Result<()> {
        if k >= self.table.m() {
            return Err(Error::DimensionMismatch { expected: self.table.m(), actual: k + 1 });
        }
        if k == self.winner() {
            return Err(Error::NotApplicable(k + 1));
        }
        Ok(())
    }

    pub(crate) fn d_vector(&self, k: usize) -> Result<DVector<T>> {
        self.check_unifying(k)?;
        let w = self.winner();
        let shares = self.profile.shares();
        let table = &self.table;
        let gaps = gaps_with(
            table,
            shares,
            |j| if table.prefers(j, k, w) { shares[j].clone() } else { T::zero() },
            &self.weights,
            k,
        );
        Ok(DVector::from_gaps(k, gaps))
    }

    pub(crate) fn pi_slacks(&self) -> Vec<T> {
        self.order.windows(2).map(|p| self.scores[p[0]].clone() - self.scores[p[1]].clone()).collect()
    }

    pub(crate) fn coalition(&self, k: usize) -> Coalition<T> {
        let w = self.winner();
        let member_types: Vec<usize> = (0..self.table.len()).filter(|&j| self.table.prefers(j, k, w)).collect();
        let size = sum(member_types.iter().map(|&j| self.profile.share(j).clone()));
        Coalition { winner: w, unifying: k, member_types, size }
    }

    pub(crate) fn verdict(&self, k: usize) -> Result<ManipVerdict<T>> {
        let d = self.d_vector(k)?;
        let coalition = self.coalition(k);
        let si = si_slacks(&d.sorted_maxima, &self.weights[1..], &coalition.size);
        let pi = self.pi_slacks();
        let positive = |x: &T| *x > T::zero();
        let manipulable = pi.iter().all(positive) && si.iter().all(positive);
        Ok(ManipVerdict { manipulable, arrangement: self.order.clone(), pi_slacks: pi, si_slacks: si, coalition, d })
    }
}

/// Decides whether the coalition unified by `k` can make `k` the strict
/// winner. Requires `m ≥ 3` and a strict sincere arrangement.
pub fn check_theorem<T: Scalar>(profile: &Profile<T>, rule: &ScoringRule, k: usize) -> Result<ManipVerdict<T>> {
    Context::new(profile, rule)?.verdict(k)
}

/// Verdicts for all `m − 1` coalitions.
#[derive(Debug, Clone, PartialEq)]
pub struct AllVerdicts<T = Q> {
    pub arrangement: Vec<usize>,
    /// One verdict per non-winner, in arrangement order (second place first).
    pub verdicts: Vec<ManipVerdict<T>>,
    pub overall: bool,
}

pub fn check_all<T: Scalar>(profile: &Profile<T>, rule: &ScoringRule) -> Result<AllVerdicts<T>> {
    let ctx = Context::new(profile, rule)?;
    let verdicts = ctx.order[1..].iter().map(|&k| ctx.verdict(k)).collect::<Result<Vec<_>>>()?;
    let overall = verdicts.iter().any(|v| v.manipulable);
    Ok(AllVerdicts { arrangement: ctx.order.clone(), verdicts, overall })
}

/// Plurality specialization: the strategic inequalities collapse to every
/// gap being positive. `si_slacks` holds the gaps in rival order.
pub fn check_plurality<T: Scalar>(profile: &Profile<T>, k: usize) -> Result<ManipVerdict<T>> {
    let rule = ScoringRule::named(NamedRule::Plurality, profile.m())?;
    let ctx = Context::new(profile, &rule)?;
    let d = ctx.d_vector(k)?;
    let pi = ctx.pi_slacks();
    let si: Vec<T> = d.gaps.iter().map(|(_, g)| g.clone()).collect();
    let positive = |x: &T| *x > T::zero();
    let manipulable = pi.iter().all(positive) && si.iter().all(positive);
    Ok(ManipVerdict { manipulable, arrangement: ctx.order.clone(), pi_slacks: pi, si_slacks: si, coalition: ctx.coalition(k), d })
}

/// A capped coalition: at most `cap` of the electorate, optionally with an
/// explicit choice of which members take part.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundedCoalitionSpec {
    pub cap: Q,
    /// `(ranking index, participating share)`.
    pub selection: Option<Vec<(usize, Q)>>,
}

/// Evaluates the capped-coalition system for an explicit selection: the
/// selected mass votes `A_k`-first and withholds the rest, everybody else
/// stays sincere, and `cap` replaces the coalition mass on the right-hand
/// sides.
pub fn check_bounded(profile: &Profile, rule: &ScoringRule, k: usize, spec: &BoundedCoalitionSpec) -> Result<ManipVerdict> {
    let ctx = Context::new(profile, rule)?;
    ctx.check_unifying(k)?;
    let selection = spec
        .selection
        .as_ref()
        .ok_or_else(|| Error::SelectionBounds("an explicit selection is required".into()))?;
    if spec.cap <= Q::zero() || spec.cap > Q::one() {
        return Err(Error::SelectionBounds(format!("cap {} outside (0, 1]", spec.cap)));
    }
    let w = ctx.winner();
    let mut tilde = vec![Q::zero(); ctx.table.len()];
    for (j, share) in selection {
        let j = *j;
        if j >= tilde.len() {
            return Err(Error::SelectionBounds(format!("ranking index {j} out of range")));
        }
        if !ctx.table.prefers(j, k, w) {
            return Err(Error::SelectionBounds(format!(
                "{} does not rank A{} above A{}",
                ctx.table.ranking(j),
                k + 1,
                w + 1
            )));
        }
        tilde[j] += share;
        if tilde[j] < Q::zero() || &tilde[j] > profile.share(j) {
            return Err(Error::SelectionBounds(format!("share on {} outside [0, {}]", ctx.table.ranking(j), profile.share(j))));
        }
    }
    let total: Q = tilde.iter().sum();
    if total != spec.cap {
        return Err(Error::SelectionBounds(format!("selected mass {total} differs from cap {}", spec.cap)));
    }
    let gaps = gaps_with(&ctx.table, profile.shares(), |j| tilde[j].clone(), &ctx.weights, k);
    let d = DVector::from_gaps(k, gaps);
    let si = si_slacks(&d.sorted_maxima, &ctx.weights[1..], &spec.cap);
    let pi = ctx.pi_slacks();
    let positive = |x: &Q| *x > Q::zero();
    let manipulable = pi.iter().all(positive) && si.iter().all(positive);
    let member_types = selection.iter().map(|(j, _)| *j).collect();
    Ok(ManipVerdict {
        manipulable,
        arrangement: ctx.order.clone(),
        pi_slacks: pi,
        si_slacks: si,
        coalition: Coalition { winner: w, unifying: k, member_types, size: total },
        d,
    })
}

/// Allocation-free evaluator for the Monte Carlo hot path.
pub(crate) struct FastEvaluator {
    table: RankingTable,
    weights: Vec<f64>,
    scores: Vec<f64>,
    adjusted: Vec<f64>,
    gaps: Vec<f64>,
}

/// Outcome of one fast coalition check.
#[derive(Debug, Clone, Copy)]
pub(crate) struct FastVerdict {
    pub manipulable: bool,
    pub min_abs_slack: f64,
}

impl FastEvaluator {
    pub(crate) fn new(rule: &ScoringRule) -> Result<Self> {
        let m = rule.m();
        Ok(FastEvaluator {
            table: RankingTable::new(m)?,
            weights: rule.weights_as::<f64>(),
            scores: vec![0.0; m],
            adjusted: vec![0.0; m],
            gaps: Vec::with_capacity(m),
        })
    }

    /// Tallies `shares` and returns the scores.
    pub(crate) fn tally(&mut self, shares: &[f64]) -> &[f64] {
        self.scores.iter_mut().for_each(|s| *s = 0.0);
        for (j, &s) in shares.iter().enumerate() {
            for (a, &p) in self.table.positions(j).iter().enumerate() {
                self.scores[a] += s * self.weights[p as usize];
            }
        }
        &self.scores
    }

    /// Checks coalition `k` against `winner`, using the scores of the last
    /// [`FastEvaluator::tally`] call.
    pub(crate) fn check(&mut self, shares: &[f64], winner: usize, k: usize) -> FastVerdict {
        let m = self.table.m();
        self.adjusted.copy_from_slice(&self.scores);
        let mut mass = 0.0;
        let w1 = self.weights[0];
        for (j, &s) in shares.iter().enumerate() {
            let pos = self.table.positions(j);
            if pos[k] < pos[winner] {
                mass += s;
                for (a, &p) in pos.iter().enumerate() {
                    self.adjusted[a] -= s * self.weights[p as usize];
                }
                self.adjusted[k] += s * w1;
            }
        }
        self.gaps.clear();
        for i in 0..m {
            if i != k {
                self.gaps.push(self.adjusted[k] - self.adjusted[i]);
            }
        }
        self.gaps.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        let mut lhs: f64 = self.gaps.iter().sum();
        let mut tail: f64 = self.weights[1..].iter().sum();
        let mut manipulable = true;
        let mut min_abs = f64::INFINITY;
        for l in 0..m - 1 {
            let slack = lhs - tail * mass;
            manipulable &= slack > 0.0;
            min_abs = min_abs.min(slack.abs());
            lhs -= self.gaps[l];
            tail -= self.weights[l + 1];
        }
        FastVerdict { manipulable, min_abs_slack: min_abs }
    }
}

impl<T: Scalar> Coalition<T> {
    pub fn is_empty(&self) -> bool {
        self.size.is_zero()
    }
}
