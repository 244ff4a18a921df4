//! Constructive strategic ballots.
//!
//! Every coalition member starts from `(A_k, ?, …, ?)`. At each level the
//! rival `A_s` with the largest remaining gap `M_1` is placed. Let `v` be the
//! reduced vector of free-slot weights and `c` the coalition mass:
//!
//! * if `M_1 > v_1 c`, everybody puts `A_s` in the first free slot and the
//!   slot disappears;
//! * otherwise take the first slot `σ` with `v_σ c < M_1`. A mass
//!   `t = (M_1 − v_σ c)/(v_{σ−1} − v_σ) − ε` puts `A_s` in slot `σ−1`, the
//!   other `c − t` in slot `σ`, leaving `A_s` behind `A_k` by `ε (v_{σ−1} − v_σ)`.
//!   The two slots merge into one of averaged weight
//!   `((c − t) v_{σ−1} + t v_σ) / c`.
//!
//! Branch masses are split proportionally at each merge, so the averaged
//! weights are realized exactly by the concrete ballots.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::manip::{si_slacks, Context, DVector};
use crate::num::{min_of, qi, Q};
use crate::prefs::{tally_with, Profile, Ranking};
use crate::rules::ScoringRule;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Branch {
    pub mass: Q,
    pub ranking: Ranking,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepCase {
    /// Rival takes the first free slot for every member.
    A,
    /// Rival is split across two adjacent free slots.
    B,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessStep {
    pub rival: usize,
    pub case: StepCase,
    /// 1-based slot index in the current reduced weight vector
    /// (slot 1 is `A_k`'s).
    pub sigma: usize,
    /// Mass placing the rival in slot `σ − 1` (all of `c` in case A).
    pub t: Q,
    pub epsilon: Option<Q>,
    /// Weight of the merged slot `w_{σ−1,σ}` (case B).
    pub merged_weight: Option<Q>,
    /// Average points per member given to the rival.
    pub rival_weight: Q,
    /// `M_1` before the step.
    pub gap_before: Q,
    /// Gap between `A_k` and the rival once it is placed.
    pub gap_after: Q,
    /// Free-slot weights `(w_2, …)` before the step.
    pub weights_before: Vec<Q>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub unifying: usize,
    pub winner: usize,
    pub coalition_mass: Q,
    pub branches: Vec<Branch>,
    pub trace: Vec<WitnessStep>,
    /// Scores after the coalition casts `branches`.
    pub final_scores: Vec<Q>,
}

#[derive(Debug, Clone, Default)]
pub struct WitnessOptions {
    /// Fixed ε for every split step instead of the automatic choice.
    pub epsilon: Option<Q>,
}

pub fn build_witness(profile: &Profile, rule: &ScoringRule, k: usize) -> Result<Witness> {
    build_witness_with(profile, rule, k, &WitnessOptions::default())
}

pub fn build_witness_with(profile: &Profile, rule: &ScoringRule, k: usize, opts: &WitnessOptions) -> Result<Witness> {
    let ctx = Context::new(profile, rule)?;
    let verdict = ctx.verdict(k)?;
    if !verdict.manipulable {
        return Err(Error::NotManipulable(k + 1));
    }
    let m = rule.m();
    let c = verdict.coalition.size.clone();
    let w = rule.weights();

    // Partial ballots: slot r holds Some(alternative) once filled.
    let mut first = vec![None; m];
    first[0] = Some(k);
    let mut branches: Vec<(Q, Vec<Option<usize>>)> = vec![(c.clone(), first)];
    let mut free: Vec<Q> = w[1..].to_vec();
    let mut gaps: BTreeMap<usize, Q> = verdict.d.gaps.iter().cloned().collect();
    let mut trace = Vec::with_capacity(m - 1);

    while !gaps.is_empty() {
        let current = DVector::from_gaps(k, gaps.iter().map(|(i, g)| (*i, g.clone())).collect());
        let rival = current.rivals_by_gap[0];
        let top = current.sorted_maxima[0].clone();
        let slacks = si_slacks(&current.sorted_maxima, &free, &c);
        let min_slack = min_of(slacks.iter().cloned()).expect("non-empty");
        if min_slack <= Q::zero() {
            return Err(Error::InternalInvariant(format!("reduced system lost strictness at rival A{}", rival + 1)));
        }
        let ord = free
            .iter()
            .position(|v| v * &c < top)
            .ok_or_else(|| Error::InternalInvariant("no slot below the largest gap".into()))?;
        let weights_before = free.clone();

        let step = if ord == 0 {
            for (_, ballot) in branches.iter_mut() {
                place(ballot, 0, rival);
            }
            let points = &free[0] * &c;
            let step = WitnessStep {
                rival,
                case: StepCase::A,
                sigma: 2,
                t: c.clone(),
                epsilon: None,
                merged_weight: None,
                rival_weight: free[0].clone(),
                gap_before: top.clone(),
                gap_after: &top - &points,
                weights_before,
            };
            free.remove(0);
            step
        } else {
            let hi = free[ord - 1].clone();
            let lo = free[ord].clone();
            let spread = &hi - &lo;
            let base = (&top - &lo * &c) / &spread;
            let eps = match &opts.epsilon {
                Some(e) => {
                    if *e <= Q::zero() || *e > base || e * &spread >= min_slack {
                        return Err(Error::Epsilon(e.to_string()));
                    }
                    e.clone()
                }
                None => {
                    let cap = (&min_slack / &spread).min(base.clone());
                    cap / qi(2)
                }
            };
            let t = &base - &eps;
            let up = &t / &c;
            let down = Q::one() - &up;
            let mut next = Vec::with_capacity(branches.len() * 2);
            for (mass, ballot) in branches {
                if !up.is_zero() {
                    let mut b = ballot.clone();
                    place(&mut b, ord - 1, rival);
                    next.push((&mass * &up, b));
                }
                if !down.is_zero() {
                    let mut b = ballot;
                    place(&mut b, ord, rival);
                    next.push((&mass * &down, b));
                }
            }
            branches = next;
            let merged = ((&c - &t) * &hi + &t * &lo) / &c;
            let rival_weight = &hi + &lo - &merged;
            let points = &t * &hi + (&c - &t) * &lo;
            free[ord - 1] = merged.clone();
            free.remove(ord);
            WitnessStep {
                rival,
                case: StepCase::B,
                sigma: ord + 2,
                t,
                epsilon: Some(eps),
                merged_weight: Some(merged),
                rival_weight,
                gap_before: top.clone(),
                gap_after: &top - &points,
                weights_before,
            }
        };
        gaps.remove(&rival);
        trace.push(step);
    }

    let mut merged: BTreeMap<Ranking, Q> = BTreeMap::new();
    for (mass, ballot) in branches {
        let ranking = Ranking(ballot.into_iter().map(|a| a.expect("every slot filled")).collect());
        *merged.entry(ranking).or_insert_with(Q::zero) += mass;
    }
    let branches: Vec<Branch> = merged.into_iter().map(|(ranking, mass)| Branch { mass, ranking }).collect();

    let final_scores = strategic_scores(&ctx, &verdict.coalition.member_types, &branches);
    let mut witness = Witness { unifying: k, winner: ctx.winner(), coalition_mass: c, branches, trace, final_scores };
    if !strict_winner(&witness.final_scores, k) {
        return Err(Error::InternalInvariant("re-tally does not elect the unifying alternative".into()));
    }
    witness.branches.sort_by_key(|b| b.ranking.index());
    Ok(witness)
}

/// Fills the `ordinal`-th free slot of a partial ballot.
fn place(ballot: &mut [Option<usize>], ordinal: usize, alternative: usize) {
    let slot = ballot
        .iter()
        .enumerate()
        .filter(|(_, a)| a.is_none())
        .nth(ordinal)
        .map(|(i, _)| i)
        .expect("free slot exists");
    ballot[slot] = Some(alternative);
}

fn strategic_scores(ctx: &Context<'_, Q>, members: &[usize], branches: &[Branch]) -> Vec<Q> {
    let mut residual = ctx.profile.shares().to_vec();
    for &j in members {
        residual[j] = Q::zero();
    }
    for b in branches {
        residual[b.ranking.index()] += &b.mass;
    }
    tally_with(&ctx.table, &residual, &ctx.weights)
}

fn strict_winner(scores: &[Q], k: usize) -> bool {
    scores.iter().enumerate().all(|(i, s)| i == k || *s < scores[k])
}

/// Re-tallies with the coalition casting `witness` and everyone else
/// sincere. `true` iff `A_k` is the strict unique winner.
pub fn validate_witness(profile: &Profile, witness: &Witness, rule: &ScoringRule, k: usize) -> Result<bool> {
    let ctx = Context::new(profile, rule)?;
    let coalition = ctx.coalition(k);
    let total: Q = witness.branches.iter().map(|b| &b.mass).sum();
    if total != coalition.size {
        return Err(Error::MassMismatch { expected: coalition.size.to_string(), actual: total.to_string() });
    }
    for b in &witness.branches {
        if b.ranking.m() != rule.m() || !b.ranking.is_permutation() {
            return Err(Error::Parse(format!("`{}` is not a ranking of {} alternatives", b.ranking, rule.m())));
        }
        if b.mass < Q::zero() {
            return Err(Error::MassMismatch { expected: "non-negative".into(), actual: b.mass.to_string() });
        }
    }
    let scores = strategic_scores(&ctx, &coalition.member_types, &witness.branches);
    Ok(strict_winner(&scores, k))
}

impl Witness {
    /// Witness from explicit branches (e.g. read from JSON) for validation.
    pub fn from_branches(unifying: usize, winner: usize, branches: Vec<Branch>) -> Witness {
        let coalition_mass = branches.iter().map(|b| &b.mass).sum();
        Witness { unifying, winner, coalition_mass, branches, trace: Vec::new(), final_scores: Vec::new() }
    }
}
