//! Ground-truth deciders independent of the closed-form inequalities.
//!
//! * [`lp_manipulable`] maximizes `A_k`'s minimum winning margin over all
//!   coalition strategies in the limiting (continuum) model by exact
//!   rational simplex. A positive optimum means a manipulation exists.
//! * [`finite_brute_force`] enumerates anonymous strategies of an integer
//!   electorate and asks for a strict unique winner.
//!
//! Both restrict coalition ballots to those ranking `A_k` first: moving `A_k`
//! up never lowers its margin over anyone.

mod finite;
pub mod lp;

pub use finite::{finite_brute_force, finite_brute_force_with, FiniteOptions, FiniteResult, DEFAULT_STRATEGY_LIMIT};

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::manip::Context;
use crate::num::Q;
use crate::prefs::{Profile, Ranking};
use crate::rules::ScoringRule;
use lp::{LinearProgram, LpOutcome, Relation};

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    /// Largest achievable `min_i score(A_k) − score(A_i)`.
    pub delta_star: Q,
    /// Coalition mass per `A_k`-first ranking (non-zero entries only).
    pub strategy: Vec<(Ranking, Q)>,
    /// Participating mass per ranking index (bounded mode only).
    pub selection: Option<Vec<(usize, Q)>>,
}

impl OracleResult {
    pub fn manipulable(&self) -> bool {
        self.delta_star.is_positive()
    }
}

/// Indices of the rankings that put `k` first, in canonical order.
pub(crate) fn k_first(table: &crate::prefs::RankingTable, k: usize) -> Vec<usize> {
    (0..table.len()).filter(|&j| table.order(j)[0] as usize == k).collect()
}

/// Solves the margin-maximization program for coalition `k`. With `cap`,
/// the coalition is any sub-electorate of mass `cap` drawn from the voters
/// preferring `A_k` to the winner.
pub fn lp_manipulable(profile: &Profile, rule: &ScoringRule, k: usize, cap: Option<&Q>) -> Result<OracleResult> {
    let ctx = Context::new(profile, rule)?;
    ctx.check_unifying(k)?;
    let m = rule.m();
    let w = &ctx.weights;
    let table = &ctx.table;
    let strategies = k_first(table, k);
    let coalition = ctx.coalition(k);

    let (mass, eligible, base) = match cap {
        None => {
            let mut residual = profile.shares().to_vec();
            for &j in &coalition.member_types {
                residual[j] = Q::zero();
            }
            (coalition.size.clone(), Vec::new(), crate::prefs::tally_with(table, &residual, w))
        }
        Some(cap) => {
            if !cap.is_positive() || *cap > Q::one() {
                return Err(Error::SelectionBounds(format!("cap {cap} outside (0, 1]")));
            }
            if *cap > coalition.size {
                return Err(Error::Infeasible(format!("cap {cap} exceeds the eligible mass {}", coalition.size)));
            }
            let eligible: Vec<usize> = coalition.member_types.iter().copied().filter(|&j| profile.share(j).is_positive()).collect();
            (cap.clone(), eligible, ctx.scores.clone())
        }
    };

    // Columns: x_r (strategies), tilde_j (eligible), u = δ + B.
    let nx = strategies.len();
    let nt = eligible.len();
    let n = nx + nt + 1;
    let shift = &w[0] - &w[m - 1] + Q::one();
    let points = |j: usize, a: usize| &w[table.positions(j)[a] as usize];
    let mut rows = Vec::with_capacity(m + nt + 1);
    for i in (0..m).filter(|&i| i != k) {
        let mut a = vec![Q::zero(); n];
        for (c, &j) in strategies.iter().enumerate() {
            a[c] = points(j, i) - points(j, k);
        }
        for (c, &j) in eligible.iter().enumerate() {
            a[nx + c] = points(j, k) - points(j, i);
        }
        a[n - 1] = Q::one();
        rows.push((a, Relation::Le, &base[k] - &base[i] + &shift));
    }
    let mut total = vec![Q::zero(); n];
    total[..nx].iter_mut().for_each(|v| *v = Q::one());
    rows.push((total, Relation::Eq, mass.clone()));
    if cap.is_some() {
        let mut total = vec![Q::zero(); n];
        total[nx..nx + nt].iter_mut().for_each(|v| *v = Q::one());
        rows.push((total, Relation::Eq, mass.clone()));
        for (c, &j) in eligible.iter().enumerate() {
            let mut a = vec![Q::zero(); n];
            a[nx + c] = Q::one();
            rows.push((a, Relation::Le, profile.share(j).clone()));
        }
    }
    let mut objective = vec![Q::zero(); n];
    objective[n - 1] = Q::one();

    match (LinearProgram { objective, rows }).maximize() {
        LpOutcome::Optimal { value, x } => {
            let strategy = strategies
                .iter()
                .zip(&x[..nx])
                .filter(|(_, v)| !v.is_zero())
                .map(|(&j, v)| (table.ranking(j), v.clone()))
                .collect();
            let selection = cap.map(|_| {
                eligible.iter().zip(&x[nx..nx + nt]).filter(|(_, v)| !v.is_zero()).map(|(&j, v)| (j, v.clone())).collect()
            });
            Ok(OracleResult { delta_star: value - shift, strategy, selection })
        }
        LpOutcome::Infeasible => Err(Error::Infeasible("margin program has no feasible point".into())),
        LpOutcome::Unbounded => Err(Error::InternalInvariant("margin program is unbounded".into())),
    }
}
