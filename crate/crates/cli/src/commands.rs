use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use manip_core::manip::{emit_system, EmitFormat};
use manip_core::mc::{sample_simplex_exact, chunk_rng};
use manip_core::num::{parse_rational, parse_rational_list};
use manip_core::oracle::{finite_brute_force_with, FiniteOptions, FiniteResult};
use manip_core::prefs::{parse_sparse_map, tally};
use manip_core::witness::{build_witness_with, Branch, StepCase, WitnessOptions};
use manip_core::{
    check_all, check_bounded, check_theorem, estimate_share_with, lp_manipulable, validate_witness, BoundedCoalitionSpec,
    EstimateOptions, EstimateResult, Execution, IntProfile, ManipVerdict, Mode, NamedRule, Profile, Ranking, ScoringRule,
    Witness, Q,
};

use crate::args::*;
use crate::CliError;

type Result<T> = std::result::Result<T, CliError>;

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Check(a) => check(a),
        Command::Witness(a) => witness(a),
        Command::Estimate(a) => estimate(a),
        Command::EmitSystem(a) => emit(a),
        Command::Compare(a) => compare(a),
        Command::Finite(a) => finite(a),
        Command::Tables(a) => tables(a),
    }
}

fn name(a: usize) -> String {
    format!("A{}", a + 1)
}

fn strings(values: &[Q]) -> Vec<String> {
    values.iter().map(|v| v.to_string()).collect()
}

fn per_alternative(values: &[Q]) -> Value {
    Value::Object(values.iter().enumerate().map(|(a, v)| (name(a), json!(v.to_string()))).collect())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn emit_text(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

fn emit_json(out: Option<&PathBuf>, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    emit_text(out, &text)
}

fn rule_of(args: &RuleArgs) -> Result<ScoringRule> {
    Ok(ScoringRule::parse(&args.rule, args.alts)?)
}

/// Named rules take `m` from the profile when `--alts` is omitted.
fn rule_for_profile(args: &RuleArgs, m: usize) -> Result<ScoringRule> {
    let rule = ScoringRule::parse(&args.rule, Some(args.alts.unwrap_or(m)))?;
    if rule.m() != m {
        return Err(manip_core::Error::DimensionMismatch { expected: m, actual: rule.m() }.into());
    }
    Ok(rule)
}

fn rule_json(rule: &ScoringRule) -> Value {
    json!({
        "weights": strings(rule.weights()),
        "name": rule.recognize().map(|r| r.as_str()),
    })
}

/// 1-based alternative from the command line to a 0-based index.
fn alternative(k: usize, m: usize) -> Result<usize> {
    if k == 0 || k > m {
        return Err(CliError::Core(manip_core::Error::DimensionMismatch { expected: m, actual: k }));
    }
    Ok(k - 1)
}

fn verdict_json(v: &ManipVerdict) -> Value {
    json!({
        "unifying": name(v.unifying()),
        "winner": name(v.winner()),
        "manipulable": v.manipulable,
        "coalition_mass": v.coalition.size.to_string(),
        "members": v.coalition.member_types.iter().map(|&j| Ranking::from_index(v.arrangement.len(), j).to_string()).collect::<Vec<_>>(),
        "d": Value::Object(v.d.gaps.iter().map(|(i, g)| (name(*i), json!(g.to_string()))).collect()),
        "sorted_gaps": strings(&v.d.sorted_maxima),
        "pi_slacks": strings(&v.pi_slacks),
        "si_slacks": strings(&v.si_slacks),
        "min_abs_slack": v.min_abs_slack().to_string(),
    })
}

fn verdict_text(v: &ManipVerdict) -> String {
    let d: Vec<String> = v.d.gaps.iter().map(|(i, g)| format!("d({},{})={g}", name(v.unifying()), name(*i))).collect();
    format!(
        "Coal({}): {}  mass {}  {}  SI slacks [{}]\n",
        name(v.unifying()),
        if v.manipulable { "manipulable" } else { "not manipulable" },
        v.coalition.size,
        d.join(" "),
        strings(&v.si_slacks).join(", ")
    )
}

fn check(a: CheckArgs) -> Result<()> {
    let profile = Profile::from_json(&read(&a.profile)?)?;
    let rule = rule_for_profile(&a.rule, profile.m())?;
    let m = rule.m();
    let scores = tally(&profile, &rule)?;
    let all = check_all(&profile, &rule)?;
    let targets: Vec<usize> = match a.coalition {
        Some(k) => vec![alternative(k, m)?],
        None => all.arrangement[1..].to_vec(),
    };
    let mut doc = Map::new();
    doc.insert("rule".into(), rule_json(&rule));
    doc.insert("m".into(), json!(m));
    doc.insert("scores".into(), per_alternative(&scores));
    doc.insert("arrangement".into(), json!(all.arrangement.iter().map(|&a| name(a)).collect::<Vec<_>>()));
    let mut text = format!(
        "rule {rule}, m = {m}\narrangement {}\nscores {}\n",
        all.arrangement.iter().map(|&a| name(a)).collect::<Vec<_>>().join(" > "),
        strings(&scores).join(", ")
    );

    match (&a.cap, &a.selection) {
        (None, _) => {
            let verdicts = targets.iter().map(|&k| check_theorem(&profile, &rule, k)).collect::<manip_core::Result<Vec<_>>>()?;
            let overall = verdicts.iter().any(|v| v.manipulable);
            for v in &verdicts {
                text += &verdict_text(v);
            }
            text += &format!("manipulable: {overall}\n");
            doc.insert("manipulable".into(), json!(overall));
            doc.insert("coalitions".into(), Value::Array(verdicts.iter().map(verdict_json).collect()));
        }
        (Some(cap), Some(selection)) => {
            let cap = parse_rational(cap)?;
            let k = match targets.as_slice() {
                [k] if a.coalition.is_some() => *k,
                _ => return Err(CliError::Usage("--selection needs --coalition".into())),
            };
            let selection = parse_sparse_map(&read(selection)?, m)?;
            let v = check_bounded(&profile, &rule, k, &BoundedCoalitionSpec { cap: cap.clone(), selection: Some(selection) })?;
            text += &format!("cap {cap} with explicit selection\n");
            text += &verdict_text(&v);
            doc.insert("cap".into(), json!(cap.to_string()));
            doc.insert("manipulable".into(), json!(v.manipulable));
            doc.insert("coalitions".into(), json!([verdict_json(&v)]));
        }
        (Some(cap), None) => {
            let cap = parse_rational(cap)?;
            let mut rows = Vec::new();
            let mut overall = false;
            for &k in &targets {
                let r = lp_manipulable(&profile, &rule, k, Some(&cap))?;
                overall |= r.manipulable();
                text += &format!(
                    "Coal({}) capped at {cap}: {}  best margin {}\n",
                    name(k),
                    if r.manipulable() { "manipulable" } else { "not manipulable" },
                    r.delta_star
                );
                rows.push(json!({
                    "unifying": name(k),
                    "manipulable": r.manipulable(),
                    "delta_star": r.delta_star.to_string(),
                    "selection": r.selection.as_ref().map(|s| Value::Object(s.iter()
                        .map(|(j, v)| (Ranking::from_index(m, *j).to_string(), json!(v.to_string()))).collect())),
                    "strategy": Value::Object(r.strategy.iter().map(|(rk, v)| (rk.to_string(), json!(v.to_string()))).collect()),
                }));
            }
            text += &format!("manipulable: {overall}\n");
            doc.insert("cap".into(), json!(cap.to_string()));
            doc.insert("manipulable".into(), json!(overall));
            doc.insert("coalitions".into(), Value::Array(rows));
        }
    }
    if a.json {
        emit_json(a.out.as_ref(), &Value::Object(doc))
    } else {
        emit_text(a.out.as_ref(), &text)
    }
}

fn witness_json(w: &Witness, valid: bool) -> Value {
    let trace: Vec<Value> = w
        .trace
        .iter()
        .map(|s| {
            json!({
                "rival": name(s.rival),
                "case": match s.case { StepCase::A => "a", StepCase::B => "b" },
                "sigma": s.sigma,
                "t": s.t.to_string(),
                "epsilon": s.epsilon.as_ref().map(|e| e.to_string()),
                "merged_weight": s.merged_weight.as_ref().map(|e| e.to_string()),
                "rival_weight": s.rival_weight.to_string(),
                "gap_before": s.gap_before.to_string(),
                "gap_after": s.gap_after.to_string(),
                "weights_before": strings(&s.weights_before),
            })
        })
        .collect();
    json!({
        "unifying": name(w.unifying),
        "winner": name(w.winner),
        "coalition_mass": w.coalition_mass.to_string(),
        "branches": w.branches.iter().map(|b| json!({"ranking": b.ranking.to_string(), "mass": b.mass.to_string()})).collect::<Vec<_>>(),
        "trace": trace,
        "final_tally": per_alternative(&w.final_scores),
        "valid": valid,
    })
}

fn witness(a: WitnessArgs) -> Result<()> {
    let profile = Profile::from_json(&read(&a.profile)?)?;
    let rule = rule_for_profile(&a.rule, profile.m())?;
    let k = alternative(a.coalition, rule.m())?;
    if let Some(path) = &a.validate {
        let doc: Value = serde_json::from_str(&read(path)?).map_err(|e| CliError::Core(manip_core::Error::Parse(e.to_string())))?;
        let branches = doc
            .get("branches")
            .and_then(Value::as_array)
            .ok_or_else(|| CliError::Usage("witness file needs a `branches` array".into()))?
            .iter()
            .map(|b| {
                let field = |f: &str| b.get(f).and_then(Value::as_str).ok_or_else(|| CliError::Usage(format!("branch without `{f}`")));
                Ok(Branch { ranking: Ranking::parse(field("ranking")?)?, mass: parse_rational(field("mass")?)? })
            })
            .collect::<Result<Vec<_>>>()?;
        let winner = check_all(&profile, &rule)?.arrangement[0];
        let w = Witness::from_branches(k, winner, branches);
        let valid = validate_witness(&profile, &w, &rule, k)?;
        return emit_json(a.out.as_ref(), &json!({"unifying": name(k), "valid": valid}));
    }
    let epsilon = a.epsilon.as_deref().map(parse_rational).transpose()?;
    let w = build_witness_with(&profile, &rule, k, &WitnessOptions { epsilon })?;
    let valid = validate_witness(&profile, &w, &rule, k)?;
    emit_json(a.out.as_ref(), &witness_json(&w, valid))
}

fn execution(threads: usize) -> Execution {
    match threads {
        0 => Execution::Parallel,
        1 => Execution::Sequential,
        t => Execution::Threads(t),
    }
}

fn estimate_json(r: &EstimateResult, rule: &ScoringRule) -> Value {
    let mut v = serde_json::to_value(r).expect("serializable");
    v["rule_name"] = json!(rule.recognize().map(|n| n.as_str()));
    v
}

fn csv_header(m: usize) -> Vec<String> {
    let mut h: Vec<String> = ["rule", "m", "mode", "samples", "seed", "total_share"].iter().map(|s| s.to_string()).collect();
    h.extend((2..=m).map(|k| format!("share_coal_{k}")));
    h.push("stderr_total".into());
    h.extend((2..=m).map(|k| format!("stderr_coal_{k}")));
    h
}

fn csv_row(r: &EstimateResult, rule: &ScoringRule) -> Vec<String> {
    let label = rule.recognize().map(|n| n.to_string()).unwrap_or_else(|| r.rule.clone());
    let mut row = vec![label, r.m.to_string(), r.mode.to_string(), r.samples.to_string(), r.seed.to_string(), r.total_share.to_string()];
    row.extend(r.per_coalition.iter().map(|x| x.to_string()));
    row.push(r.total_std_error.to_string());
    row.extend(r.per_coalition_std_error.iter().map(|x| x.to_string()));
    row
}

fn write_csv(header: &[String], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(row).map_err(io)?;
    }
    String::from_utf8(w.into_inner().map_err(|e| CliError::Io(e.to_string()))?).map_err(|e| CliError::Io(e.to_string()))
}

fn estimate(a: EstimateArgs) -> Result<()> {
    let rule = rule_of(&a.rule)?;
    let mode: Mode = a.mode.parse()?;
    let cap = a.cap.as_deref().map(parse_rational).transpose()?;
    let opts = EstimateOptions { mode, cap, execution: execution(a.threads) };
    let r = estimate_share_with(&rule, a.samples, a.seed, &opts)?;
    let csv = match a.format.as_deref() {
        Some("csv") => true,
        Some("json") => false,
        Some(other) => return Err(CliError::Usage(format!("unknown format `{other}`"))),
        None => a.out.as_ref().is_some_and(|p| p.extension().is_some_and(|e| e == "csv")),
    };
    if csv {
        emit_text(a.out.as_ref(), &write_csv(&csv_header(r.m), &[csv_row(&r, &rule)])?)
    } else {
        emit_json(a.out.as_ref(), &estimate_json(&r, &rule))
    }
}

fn emit(a: EmitArgs) -> Result<()> {
    let rule = rule_of(&a.rule)?;
    let format: EmitFormat = a.format.parse()?;
    let m = rule.m();
    let targets: Vec<usize> = match a.coalition {
        Some(k) => vec![alternative(k, m)?],
        None => (1..m).collect(),
    };
    let systems = targets.iter().map(|&k| emit_system(&rule, k, a.expand)).collect::<manip_core::Result<Vec<_>>>()?;
    match format {
        EmitFormat::Json => emit_json(a.out.as_ref(), &Value::Array(systems.iter().map(|s| s.to_json()).collect())),
        _ => {
            let text: Vec<String> = systems.iter().map(|s| s.render(format)).collect();
            emit_text(a.out.as_ref(), &(text.join("\n") + "\n"))
        }
    }
}

fn compare(a: CompareArgs) -> Result<()> {
    let rule = rule_of(&a.rule)?;
    let m = rule.m();
    let mut rng = chunk_rng(a.seed, 0);
    let (mut checked, mut agree, mut ties, mut manipulable) = (0u64, 0u64, 0u64, 0u64);
    let mut disagreements = Vec::new();
    for sample in 0..a.samples {
        let p = sample_simplex_exact(&mut rng, m, a.resolution)?;
        let order = match check_all(&p, &rule) {
            Ok(all) => all.arrangement,
            Err(manip_core::Error::TiedArrangement(_)) => {
                ties += 1;
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        for &k in &order[1..] {
            let theorem = check_theorem(&p, &rule, k)?.manipulable;
            let oracle = lp_manipulable(&p, &rule, k, None)?;
            checked += 1;
            manipulable += u64::from(theorem);
            if theorem == oracle.manipulable() {
                agree += 1;
            } else {
                disagreements.push(json!({"sample": sample, "coalition": name(k), "theorem": theorem,
                                          "delta_star": oracle.delta_star.to_string(), "profile": p.to_json()}));
            }
        }
    }
    emit_json(
        a.out.as_ref(),
        &json!({
            "rule": rule_json(&rule), "m": m, "samples": a.samples, "seed": a.seed, "resolution": a.resolution,
            "coalition_checks": checked, "agreements": agree, "disagreements": disagreements,
            "manipulable_coalitions": manipulable, "tied_profiles_skipped": ties,
        }),
    )
}

fn finite_json(r: &FiniteResult, k: usize) -> Value {
    let pairs = |v: &Option<Vec<(Ranking, u64)>>| {
        v.as_ref().map(|v| Value::Object(v.iter().map(|(rk, c)| (rk.to_string(), json!(c))).collect()))
    };
    json!({
        "unifying": name(k),
        "manipulable": r.manipulable,
        "coalition_count": r.coalition_count,
        "strategy": pairs(&r.strategy),
        "selection": pairs(&r.selection),
        "search_space": r.search_space.to_string(),
    })
}

fn finite(a: FiniteArgs) -> Result<()> {
    let counts = a
        .counts
        .split(',')
        .map(|c| c.trim().parse::<u64>().map_err(|_| CliError::Core(manip_core::Error::Parse(format!("bad count `{c}`")))))
        .collect::<Result<Vec<_>>>()?;
    let profile = IntProfile::from_counts(counts)?;
    let rule = match (&a.weights, &a.rule) {
        (Some(w), None) => ScoringRule::new(parse_rational_list(w)?)?,
        (None, Some(r)) => ScoringRule::parse(r, Some(profile.m()))?,
        _ => return Err(CliError::Usage("give exactly one of --weights or --rule".into())),
    };
    let k = alternative(a.coalition, rule.m())?;
    let mut opts = FiniteOptions { cap: a.cap, all_ballots: a.all_ballots, ..FiniteOptions::default() };
    if let Some(limit) = a.limit {
        opts.limit = limit;
    }
    let r = finite_brute_force_with(&profile, &rule, k, &opts)?;
    let mut doc = finite_json(&r, k);
    doc["rule"] = rule_json(&rule);
    doc["n"] = json!(profile.n());
    emit_json(a.out.as_ref(), &doc)
}

fn tables(a: TablesArgs) -> Result<()> {
    let mode: Mode = a.mode.parse()?;
    let opts = EstimateOptions { mode, cap: None, execution: execution(a.threads) };
    let mut output = String::new();
    for (m, samples) in [(3, a.samples_m3), (4, a.samples_m4), (5, a.samples_m5)] {
        let mut rows = Vec::new();
        for rule in [NamedRule::Plurality, NamedRule::Antiplurality, NamedRule::Borda] {
            let scoring = ScoringRule::named(rule, m)?;
            let r = estimate_share_with(&scoring, samples, a.seed, &opts)?;
            rows.push(csv_row(&r, &scoring));
        }
        let table = write_csv(&csv_header(m), &rows)?;
        match &a.out_dir {
            Some(dir) => {
                fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
                let path = dir.join(format!("table_m{m}.csv"));
                fs::write(&path, table).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            }
            None => {
                output += &format!("# m = {m}\n{table}");
            }
        }
    }
    if a.out_dir.is_none() {
        emit_text(None, &output)?;
    }
    Ok(())
}
