//! Acceptance suite: one `[PASS]`/`[FAIL]` line per criterion, preceded by
//! indented detail lines. Exits non-zero when any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use manip_core::fixtures::{borda4_worked_example, finite_counterexample};
use manip_core::manip::{emit_system, LinearForm};
use manip_core::mc::{chunk_rng, sample_simplex_exact, Counts};
use manip_core::num::{q, qi};
use manip_core::prefs::{factorial, RankingTable};
use manip_core::witness::StepCase;
use manip_core::{
    build_witness, check_all, check_theorem, estimate_share_with, finite_brute_force, lp_manipulable,
    validate_witness, EstimateOptions, EstimateResult, Execution, Mode, NamedRule, Profile, ScoringRule, Q,
};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde_json::Value;

const SEED: u64 = 1;
const PUBLISHED: &str = include_str!("../../cli/fixtures/expected_tables.json");

struct Report {
    failures: usize,
}

impl Report {
    fn detail(&self, line: impl AsRef<str>) {
        println!("    {}", line.as_ref());
    }

    fn verdict(&mut self, id: u32, title: &str, pass: bool, started: Instant) {
        if !pass {
            self.failures += 1;
        }
        println!(
            "[{}] criterion {id}: {title} ({:.1}s)",
            if pass { "PASS" } else { "FAIL" },
            started.elapsed().as_secs_f64()
        );
    }
}

fn named(rule: NamedRule, m: usize) -> ScoringRule {
    ScoringRule::named(rule, m).unwrap()
}

fn estimate(rule: &ScoringRule, samples: u64, execution: Execution) -> EstimateResult {
    let opts = EstimateOptions { mode: Mode::Relabel, cap: None, execution };
    estimate_share_with(rule, samples, SEED, &opts).unwrap()
}

/// Standard error of a published filter-mode share: `m!·√(p(1−p)/N)` with
/// `p = share/m!`.
fn filter_std_error(share: f64, m: usize, samples: u64) -> f64 {
    let f = factorial(m) as f64;
    let p = share / f;
    f * (p * (1.0 - p) / samples as f64).sqrt()
}

/// Compares one published table block against fresh estimates.
fn table(report: &Report, block: &Value) -> (bool, Vec<(NamedRule, EstimateResult)>) {
    let m = block["m"].as_u64().unwrap() as usize;
    let samples = block["samples"].as_u64().unwrap();
    let tolerance = block["tolerance_pp"].as_f64().unwrap();
    let mut pass = true;
    let mut results = Vec::new();
    for rule in [NamedRule::Plurality, NamedRule::Antiplurality, NamedRule::Borda] {
        let expected: Vec<f64> =
            block["rows"][rule.as_str()].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
        let r = estimate(&named(rule, m), samples, Execution::Threads(8));
        let ours = std::iter::once(r.total_share).chain(r.per_coalition.iter().copied());
        let ses = std::iter::once(r.total_std_error).chain(r.per_coalition_std_error.iter().copied());
        for (col, ((o, se), e)) in ours.zip(ses).zip(&expected).enumerate() {
            let (o, se) = (100.0 * o, 100.0 * se);
            let diff = o - e;
            let ok = diff.abs() <= tolerance;
            pass &= ok;
            let label = if col == 0 { "total".to_string() } else { format!("Coal(A{})", col + 1) };
            report.detail(format!(
                "{:<13} {:<9} ours {:>6.2}% (se {:.3})  published {:>6.2}% (filter-mode se {:.2})  diff {:+.2} pp  {}",
                rule.as_str(),
                label,
                o,
                se,
                e,
                100.0 * filter_std_error(e / 100.0, m, samples),
                diff,
                if ok { "ok" } else { "OUTSIDE TOLERANCE" }
            ));
        }
        if rule == NamedRule::Antiplurality {
            let last = *r.counts.per_coalition.last().unwrap();
            report.detail(format!("antiplurality Coal(A{m}) count = {last}"));
            pass &= last == 0;
        }
        results.push((rule, r));
    }
    (pass, results)
}

fn criterion_tables(report: &mut Report) -> Vec<(NamedRule, EstimateResult)> {
    let published: Value = serde_json::from_str(PUBLISHED).unwrap();
    let blocks = published["tables"].as_array().unwrap();
    let titles = [
        "m=3 shares within ±0.2 pp of the published table (10^7 samples)",
        "m=4 shares within ±0.4 pp of the published table (8·10^6 samples), antiplurality last column exactly 0",
        "m=5 shares within ±0.6 pp of the published table (8·10^5 samples), antiplurality last column exactly 0",
    ];
    let mut m3 = Vec::new();
    for (i, (block, title)) in blocks.iter().zip(titles).enumerate() {
        let t = Instant::now();
        let (pass, results) = table(report, block);
        report.verdict(i as u32 + 1, title, pass, t);
        if i == 0 {
            m3 = results;
        }
    }
    m3
}

/// Non-increasing integer weights with `w_1 > w_m`.
fn random_rule(rng: &mut impl Rng, m: usize) -> ScoringRule {
    loop {
        let mut w: Vec<i64> = (0..m).map(|_| rng.random_range(0..=12)).collect();
        w.sort_unstable_by(|a, b| b.cmp(a));
        if w[0] > w[m - 1] {
            return ScoringRule::from_integers(&w).unwrap();
        }
    }
}

struct Case {
    profile: Profile,
    rule: ScoringRule,
    k: usize,
}

fn criterion_equivalence(report: &mut Report) -> Vec<Case> {
    let t = Instant::now();
    let mut rule_rng = chunk_rng(2024, 0);
    let mut manipulable_cases = Vec::new();
    let mut pass = true;
    for m in [3, 4] {
        let mut rules: Vec<(String, ScoringRule)> =
            NamedRule::ALL.iter().map(|r| (r.as_str().to_string(), named(*r, m))).collect();
        for i in 0..3 {
            let r = random_rule(&mut rule_rng, m);
            rules.push((format!("random#{} {r}", i + 1), r));
        }
        for (ri, (label, rule)) in rules.iter().enumerate() {
            let mut rng = chunk_rng(SEED, (m * 100 + ri) as u64);
            let (mut checks, mut disagreements, mut ties, mut hits) = (0u64, 0u64, 0u64, 0u64);
            for _ in 0..10_000 {
                let p = sample_simplex_exact(&mut rng, m, 1_000_000).unwrap();
                let Ok(all) = check_all(&p, rule) else {
                    ties += 1;
                    continue;
                };
                for v in &all.verdicts {
                    let k = v.unifying();
                    let oracle = lp_manipulable(&p, rule, k, None).unwrap().manipulable();
                    checks += 1;
                    if v.manipulable != oracle {
                        disagreements += 1;
                    }
                    if v.manipulable {
                        hits += 1;
                        manipulable_cases.push(Case { profile: p.clone(), rule: rule.clone(), k });
                    }
                }
            }
            pass &= disagreements == 0;
            report.detail(format!(
                "m={m} {label:<24} coalition checks {checks:>6}  manipulable {hits:>6}  tied profiles skipped {ties}  disagreements {disagreements}"
            ));
        }
    }
    report.verdict(
        4,
        "closed-form test agrees with the exact LP oracle on 10^4 exact profiles per (m, rule)",
        pass,
        t,
    );
    manipulable_cases
}

fn criterion_witnesses(report: &mut Report, mut cases: Vec<Case>) {
    let t = Instant::now();
    let from_corpus = cases.len();
    let mut rng = chunk_rng(SEED, 5000);
    let mut rule_rng = chunk_rng(2025, 0);
    let m5_rules: Vec<ScoringRule> = NamedRule::ALL
        .iter()
        .map(|r| named(*r, 5))
        .chain((0..3).map(|_| random_rule(&mut rule_rng, 5)))
        .collect();
    for i in 0..1000 {
        let rule = &m5_rules[i % m5_rules.len()];
        let p = sample_simplex_exact(&mut rng, 5, 1_000_000).unwrap();
        if let Ok(all) = check_all(&p, rule) {
            for v in all.verdicts.iter().filter(|v| v.manipulable) {
                cases.push(Case { profile: p.clone(), rule: rule.clone(), k: v.unifying() });
            }
        }
    }
    let (mut built, mut valid) = (0usize, 0usize);
    let mut first_failure = None;
    for case in &cases {
        match build_witness(&case.profile, &case.rule, case.k) {
            Ok(w) => {
                built += 1;
                match validate_witness(&case.profile, &w, &case.rule, case.k) {
                    Ok(true) => valid += 1,
                    other => {
                        first_failure
                            .get_or_insert(format!("validation {other:?} for rule {} k=A{}", case.rule, case.k + 1));
                    }
                }
            }
            Err(e) => {
                first_failure.get_or_insert(format!("build error {e} for rule {} k=A{}", case.rule, case.k + 1));
            }
        }
    }
    report.detail(format!(
        "manipulable cases: {from_corpus} from criterion 4 + {} at m=5; built {built}, validated {valid}",
        cases.len() - from_corpus
    ));
    if let Some(f) = first_failure {
        report.detail(format!("first failure: {f}"));
    }
    let pass = built == cases.len() && valid == cases.len();
    report.verdict(5, "a validated witness is built for every manipulable case", pass, t);
}

fn criterion_worked_example(report: &mut Report) {
    let t = Instant::now();
    let p = borda4_worked_example();
    let rule = named(NamedRule::Borda, 4);
    let v = check_theorem(&p, &rule, 1).unwrap();
    let d: Vec<Q> = v.d.gaps.iter().map(|(_, g)| g.clone()).collect();
    let mut pass = v.manipulable && v.coalition.size == q(5, 9) && d == vec![q(8, 9), q(7, 9), q(6, 9)];
    report.detail(format!(
        "coalition mass {}  d = ({})",
        v.coalition.size,
        d.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
    ));
    let w = build_witness(&p, &rule, 1).unwrap();
    let step = &w.trace[0];
    let eps = step.epsilon.clone().unwrap_or_else(Q::zero);
    pass &= step.case == StepCase::B
        && step.rival == 0
        && eps.is_positive()
        && step.t == q(3, 9) - &eps
        && step.rival_weight == q(8, 5) - q(9, 5) * &eps
        && &w.final_scores[1] - &w.final_scores[0] == eps
        && (0..4).all(|a| a == 1 || w.final_scores[a] < w.final_scores[1])
        && validate_witness(&p, &w, &rule, 1).unwrap();
    report.detail(format!(
        "first step: case {:?}, rival A{}, ε = {eps}, t = {} (3/9 − ε), rival weight {} (8/5 − 9ε/5), merged slot weight {}",
        step.case,
        step.rival + 1,
        step.t,
        step.rival_weight,
        step.merged_weight.clone().unwrap_or_else(Q::zero)
    ));
    report.detail(format!(
        "final tally: {}",
        w.final_scores.iter().enumerate().map(|(a, s)| format!("A{}={s}", a + 1)).collect::<Vec<_>>().join("  ")
    ));
    report.verdict(6, "worked example (m=4 Borda): mass, gaps, split step and a final lead of exactly ε", pass, t);
}

fn criterion_finite_electorate(report: &mut Report) {
    let t = Instant::now();
    let ip = finite_counterexample();
    let rule = ScoringRule::new(vec![qi(1), q(9, 10), qi(0)]).unwrap();
    let limit = check_theorem(&ip.to_profile().unwrap(), &rule, 1).unwrap();
    let expected = [q(3, 210), q(4, 210)];
    let slacks_ok = expected.iter().all(|e| limit.si_slacks.contains(e));
    let finite = finite_brute_force(&ip, &rule, 1, None).unwrap();
    report.detail(format!(
        "limiting SI slacks [{}] (expected 0.3/21 = 1/70 and 0.4/21 = 2/105); manipulable in the limit: {}",
        limit.si_slacks.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(", "),
        limit.manipulable
    ));
    report.detail(format!(
        "finite search over {} strategies of {} coalition voters: manipulable = {}",
        finite.search_space, finite.coalition_count, finite.manipulable
    ));
    let pass = slacks_ok && limit.manipulable && !finite.manipulable;
    report.verdict(7, "21-voter profile (6,7,8,0,0,0), w=(1,9/10,0): limit manipulable, finite electorate not", pass, t);
}

fn cleared(coeffs: Vec<Q>) -> Vec<BigInt> {
    LinearForm { coeffs }.cleared()
}

fn sorted(mut lines: Vec<Vec<BigInt>>) -> Vec<Vec<BigInt>> {
    lines.sort();
    lines
}

/// The hand-derived three-alternative system for `w = (1, λ, 0)`, over
/// `p1..p6` in lexicographic ranking order.
fn three_alternative_system(l: &Q, k: usize) -> Vec<Vec<Q>> {
    let one = Q::one();
    let two = qi(2);
    let a1_beats_a2 = vec![&one - l, one.clone(), l - &one, -one.clone(), l.clone(), -l.clone()];
    let a2_beats_a3 = vec![l.clone(), -l.clone(), one.clone(), &one - l, -one.clone(), l - &one];
    let mut lines = vec![a1_beats_a2, a2_beats_a3];
    if k == 1 {
        lines.push(vec![l - &one, -one.clone(), one.clone(), one.clone(), -l.clone(), one.clone()]);
        lines.push(vec![&two * l - &one, -(&one + l), &two - l, &two - l, -(&one + l), &two - l]);
    } else {
        lines.push(vec![-one.clone(), l - &one, -l.clone(), one.clone(), one.clone(), one.clone()]);
        lines.push(vec![-l.clone(), l.clone(), -one.clone(), one.clone(), one.clone(), one.clone()]);
        lines.push(vec![-(&one + l), &two * l - &one, -(&one + l), &two - l, &two - l, &two - l]);
    }
    lines
}

fn criterion_emission(report: &mut Report) {
    let t = Instant::now();
    let mut rng = chunk_rng(SEED, 8000);
    let mut pass = true;
    let mut lambdas = Vec::new();
    for _ in 0..20 {
        // λ = 0 is plurality, where the sum line is implied and pruned; it is
        // covered by the plurality comparison below.
        let den: i64 = rng.random_range(2..=50);
        let l = q(rng.random_range(1..den), den);
        let rule = ScoringRule::new(vec![qi(1), l.clone(), qi(0)]).unwrap();
        for k in [1, 2] {
            let sys = emit_system(&rule, k, false).unwrap();
            let emitted: Vec<Vec<BigInt>> = sys.pi.iter().chain(&sys.si_reduced).map(|i| i.form.cleared()).collect();
            let expected: Vec<Vec<BigInt>> = three_alternative_system(&l, k).into_iter().map(cleared).collect();
            if sorted(emitted) != sorted(expected) {
                report.detail(format!("λ = {l}: coalition A{} differs from the hand-derived system", k + 1));
                pass = false;
            }
        }
        lambdas.push(l.to_string());
    }
    report.detail(format!("λ ∈ {{{}}}: A2 and A3 systems compared", lambdas.join(", ")));

    for m in 3..=5 {
        let rule = named(NamedRule::Plurality, m);
        let table = RankingTable::new(m).unwrap();
        for k in 1..m {
            let sys = emit_system(&rule, k, false).unwrap();
            // d(A_k, A_i): members give A_k their point, everyone else votes sincerely.
            let expected: Vec<Vec<BigInt>> = (0..m)
                .filter(|&i| i != k)
                .map(|i| {
                    cleared(
                        (0..table.len())
                            .map(|j| {
                                let top = table.order(j)[0] as usize;
                                if table.prefers(j, k, 0) {
                                    Q::one()
                                } else {
                                    qi(i64::from(top == k) - i64::from(top == i))
                                }
                            })
                            .collect(),
                    )
                })
                .collect();
            let emitted: Vec<Vec<BigInt>> = sys.si_linear.iter().map(|i| i.form.cleared()).collect();
            if sorted(emitted) != sorted(expected) {
                report.detail(format!("plurality m={m} coalition A{} differs from d(A_k, A_i) > 0", k + 1));
                pass = false;
            }
        }
    }
    report.detail("plurality m=3..5: strategic lines compared with d(A_k, A_i) > 0 for every rival");
    report.verdict(8, "symbolic emission matches the three-alternative system and the plurality per-rival form", pass, t);
}

fn criterion_determinism(report: &mut Report, baseline: &[(NamedRule, EstimateResult)]) {
    let t = Instant::now();
    let mut pass = true;
    for (rule, r8) in baseline {
        let rule_m3 = named(*rule, 3);
        let runs: Vec<Counts> =
            [1, 4].iter().map(|&w| estimate(&rule_m3, r8.samples, Execution::Threads(w)).counts).collect();
        let same = runs.iter().all(|c| *c == r8.counts);
        report.detail(format!(
            "{:<13} workers 1/4/8 total counts {}/{}/{}  {}",
            rule.as_str(),
            runs[0].total,
            runs[1].total,
            r8.counts.total,
            if same { "identical" } else { "DIFFERENT" }
        ));
        pass &= same;
    }
    report.verdict(9, "m=3 runs with 1, 4 and 8 workers give identical counts", pass, t);
}

fn main() -> ExitCode {
    let mut report = Report { failures: 0 };
    let m3 = criterion_tables(&mut report);
    let cases = criterion_equivalence(&mut report);
    criterion_witnesses(&mut report, cases);
    criterion_worked_example(&mut report);
    criterion_finite_electorate(&mut report);
    criterion_emission(&mut report);
    criterion_determinism(&mut report, &m3);
    println!("acceptance: {} of 9 criteria passed", 9 - report.failures);
    if report.failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
