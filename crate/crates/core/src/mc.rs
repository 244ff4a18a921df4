//! Monte Carlo estimation of the share of manipulable profiles under IAC
//! (profiles uniform on the simplex).
//!
//! Seeding: samples are split into chunks of [`CHUNK_SIZE`]; chunk `c` draws
//! from `ChaCha8Rng::seed_from_u64(seed)` switched to stream `c`. A result
//! therefore depends only on `(rule, samples, seed, mode, cap)`, never on the
//! number of worker threads.

use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::manip::{check_theorem, FastEvaluator};
use crate::num::{rationalize, Q};
use crate::oracle::lp_manipulable;
use crate::prefs::{arrangement, factorial, Arrangement, Profile};
use crate::rules::ScoringRule;

pub const CHUNK_SIZE: u64 = 1 << 14;
/// Samples whose smallest |slack| falls below this are re-decided exactly.
pub const EXACT_RECHECK_THRESHOLD: f64 = 1e-12;
pub const MAX_MC_ALTERNATIVES: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Every sample is relabeled so its arrangement reads `A1, A2, …`.
    #[default]
    Relabel,
    /// Only samples already arranged `A1, A2, …` count; scaled by `m!`.
    #[serde(rename = "arrangement-filter")]
    Filter,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Relabel => "relabel",
            Mode::Filter => "arrangement-filter",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "relabel" => Ok(Mode::Relabel),
            "filter" | "arrangement-filter" => Ok(Mode::Filter),
            other => Err(Error::Parse(format!("unknown mode `{other}` (expected relabel or filter)"))),
        }
    }
}

/// How the chunks are scheduled. Results are identical either way.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Rayon workers; `None` uses the global pool.
    #[default]
    Parallel,
    Threads(usize),
}

#[derive(Debug, Clone, Default)]
pub struct EstimateOptions {
    pub mode: Mode,
    /// Bounded coalitions of mass `min(cap, coalition mass)`, decided by the
    /// exact oracle.
    pub cap: Option<Q>,
    pub execution: Execution,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Default)]
pub struct Counts {
    pub total: u64,
    /// Indexed by the unifying alternative's rank minus 2.
    pub per_coalition: Vec<u64>,
    /// Samples sent to the exact checker.
    pub exact_rechecks: u64,
    /// Samples with an exactly tied arrangement (never counted).
    pub ties: u64,
}

impl Counts {
    fn new(m: usize) -> Self {
        Counts { per_coalition: vec![0; m - 1], ..Counts::default() }
    }

    fn merge(mut self, other: Counts) -> Counts {
        self.total += other.total;
        for (a, b) in self.per_coalition.iter_mut().zip(other.per_coalition) {
            *a += b;
        }
        self.exact_rechecks += other.exact_rechecks;
        self.ties += other.ties;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateResult {
    pub rule: String,
    pub m: usize,
    pub mode: Mode,
    pub samples: u64,
    pub seed: u64,
    pub cap: Option<String>,
    pub total_share: f64,
    /// Share manipulable by the coalition unifying the 2nd, 3rd, … placed
    /// alternative.
    pub per_coalition: Vec<f64>,
    pub total_std_error: f64,
    pub per_coalition_std_error: Vec<f64>,
    pub counts: Counts,
}

/// Uniform point of the `(d−1)`-simplex: sorted uniforms, successive spacings.
pub fn sample_simplex<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<f64> {
    let mut out = vec![0.0; d];
    let mut cuts = Vec::with_capacity(d);
    sample_simplex_into(rng, &mut cuts, &mut out);
    out
}

fn sample_simplex_into<R: Rng + ?Sized>(rng: &mut R, cuts: &mut Vec<f64>, out: &mut [f64]) {
    let d = out.len();
    cuts.clear();
    cuts.extend((1..d).map(|_| rng.random::<f64>()));
    cuts.sort_unstable_by(f64::total_cmp);
    cuts.push(1.0);
    let mut prev = 0.0;
    for (o, &c) in out.iter_mut().zip(cuts.iter()) {
        *o = c - prev;
        prev = c;
    }
}

/// Exact-rational IAC sample on the grid `1/resolution`: the same spacings
/// construction with uniform integer cuts in `[0, resolution]`.
pub fn sample_simplex_exact<R: Rng + ?Sized>(rng: &mut R, m: usize, resolution: u64) -> Result<Profile> {
    let d = factorial(m);
    let mut cuts: Vec<u64> = (1..d).map(|_| rng.random_range(0..=resolution)).collect();
    cuts.sort_unstable();
    cuts.push(resolution);
    let denom = Q::from_integer(resolution.into());
    let mut prev = 0u64;
    let shares = cuts
        .into_iter()
        .map(|c| {
            let s = Q::from_integer((c - prev).into()) / &denom;
            prev = c;
            s
        })
        .collect();
    Profile::new(m, shares)
}

/// Exact profile from a float sample: each share is rationalized exactly,
/// then the vector is renormalized to sum to one.
fn exact_profile(m: usize, shares: &[f64]) -> Result<Profile> {
    let exact: Vec<Q> = shares.iter().map(|&x| rationalize(x)).collect();
    let total: Q = exact.iter().sum();
    Profile::new(m, exact.into_iter().map(|x| x / &total).collect())
}

pub fn estimate_share(rule: &ScoringRule, samples: u64, seed: u64, mode: Mode) -> Result<EstimateResult> {
    estimate_share_with(rule, samples, seed, &EstimateOptions { mode, ..EstimateOptions::default() })
}

pub fn estimate_share_with(rule: &ScoringRule, samples: u64, seed: u64, opts: &EstimateOptions) -> Result<EstimateResult> {
    let m = rule.m();
    if m < 3 {
        return Err(Error::DimensionMismatch { expected: 3, actual: m });
    }
    if m > MAX_MC_ALTERNATIVES {
        return Err(Error::SizeLimit(format!("Monte Carlo supports m ≤ {MAX_MC_ALTERNATIVES}, got {m}")));
    }
    if samples == 0 {
        return Err(Error::Parse("samples must be positive".into()));
    }
    if let Some(cap) = &opts.cap {
        if *cap <= Q::zero() || *cap > Q::from_integer(1.into()) {
            return Err(Error::SelectionBounds(format!("cap {cap} outside (0, 1]")));
        }
    }
    let chunks = samples.div_ceil(CHUNK_SIZE);
    let job = |ev: &mut FastEvaluator, c: u64| {
        let len = CHUNK_SIZE.min(samples - c * CHUNK_SIZE);
        run_chunk(ev, rule, seed, c, len, opts)
    };
    let init = || FastEvaluator::new(rule).expect("rule validated");
    let counts = match opts.execution {
        Execution::Sequential => sequential(chunks, m, init, job),
        #[cfg(feature = "parallel")]
        Execution::Parallel => parallel(chunks, m, init, job),
        #[cfg(feature = "parallel")]
        Execution::Threads(1) => sequential(chunks, m, init, job),
        #[cfg(feature = "parallel")]
        Execution::Threads(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::InternalInvariant(format!("thread pool: {e}")))?
            .install(|| parallel(chunks, m, init, job)),
        #[cfg(not(feature = "parallel"))]
        _ => sequential(chunks, m, init, job),
    };

    let n = samples as f64;
    let scale = match opts.mode {
        Mode::Relabel => 1.0,
        Mode::Filter => factorial(m) as f64,
    };
    let share = |count: u64| {
        let p = count as f64 / n;
        (scale * p, scale * (p * (1.0 - p) / n).sqrt())
    };
    let (total_share, total_std_error) = share(counts.total);
    let (per_coalition, per_coalition_std_error) = counts.per_coalition.iter().map(|&c| share(c)).unzip();
    Ok(EstimateResult {
        rule: rule.to_string(),
        m,
        mode: opts.mode,
        samples,
        seed,
        cap: opts.cap.as_ref().map(|c| c.to_string()),
        total_share,
        per_coalition,
        total_std_error,
        per_coalition_std_error,
        counts,
    })
}

fn sequential(
    chunks: u64,
    m: usize,
    init: impl Fn() -> FastEvaluator,
    job: impl Fn(&mut FastEvaluator, u64) -> Counts,
) -> Counts {
    let mut ev = init();
    (0..chunks).map(|c| job(&mut ev, c)).fold(Counts::new(m), Counts::merge)
}

#[cfg(feature = "parallel")]
fn parallel(
    chunks: u64,
    m: usize,
    init: impl Fn() -> FastEvaluator + Sync + Send,
    job: impl Fn(&mut FastEvaluator, u64) -> Counts + Sync + Send,
) -> Counts {
    (0..chunks)
        .into_par_iter()
        .map_init(init, |ev, c| job(ev, c))
        .reduce(|| Counts::new(m), Counts::merge)
}

/// Generator for chunk `chunk` of the stream seeded by `seed`.
pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

fn run_chunk(ev: &mut FastEvaluator, rule: &ScoringRule, seed: u64, chunk: u64, len: u64, opts: &EstimateOptions) -> Counts {
    let m = rule.m();
    let d = factorial(m);
    let mut rng = chunk_rng(seed, chunk);
    let mut counts = Counts::new(m);
    let mut shares = vec![0.0; d];
    let mut cuts = Vec::with_capacity(d);
    let mut order: Vec<usize> = (0..m).collect();
    let mut hits = vec![false; m - 1];
    let identity: Vec<usize> = (0..m).collect();

    for _ in 0..len {
        sample_simplex_into(&mut rng, &mut cuts, &mut shares);
        let scores = ev.tally(&shares);
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
        if opts.mode == Mode::Filter && order != identity {
            continue;
        }
        let mut fragile = order.windows(2).any(|p| scores[p[0]] - scores[p[1]] < EXACT_RECHECK_THRESHOLD);
        let winner = order[0];
        if opts.cap.is_none() && !fragile {
            for (r, hit) in hits.iter_mut().enumerate() {
                let v = ev.check(&shares, winner, order[r + 1]);
                *hit = v.manipulable;
                fragile |= v.min_abs_slack < EXACT_RECHECK_THRESHOLD;
            }
        }
        if opts.cap.is_some() || fragile {
            if fragile {
                counts.exact_rechecks += 1;
            }
            match exact_hits(m, &shares, rule, opts.cap.as_ref(), &mut hits) {
                Ok(true) => {}
                _ => {
                    counts.ties += 1;
                    continue;
                }
            }
        }
        counts.total += u64::from(hits.iter().any(|&h| h));
        for (c, &h) in counts.per_coalition.iter_mut().zip(&hits) {
            *c += u64::from(h);
        }
    }
    counts
}

/// Exact verdicts in arrangement order. `Ok(false)` on an exact tie.
fn exact_hits(m: usize, shares: &[f64], rule: &ScoringRule, cap: Option<&Q>, hits: &mut [bool]) -> Result<bool> {
    let profile = exact_profile(m, shares)?;
    let scores = crate::prefs::tally(&profile, rule)?;
    let order = match arrangement(&scores) {
        Arrangement::Strict(order) => order,
        Arrangement::Tied(_) => return Ok(false),
    };
    for (r, hit) in hits.iter_mut().enumerate() {
        let k = order[r + 1];
        let verdict = check_theorem(&profile, rule, k)?;
        *hit = match cap {
            Some(cap) if *cap < verdict.coalition.size => lp_manipulable(&profile, rule, k, Some(cap))?.manipulable(),
            _ => verdict.manipulable,
        };
    }
    Ok(true)
}
