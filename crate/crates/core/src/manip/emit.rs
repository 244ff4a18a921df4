//! Symbolic emission of the manipulability system in the share variables
//! `p_1 … p_{m!}`, for the canonical arrangement `(A1, …, Am)`.

use std::fmt::Write as _;

use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::num::Q;
use crate::prefs::{factorial, RankingTable};
use crate::rules::ScoringRule;

/// Largest `m` for which the per-ordering expansion is produced.
pub const MAX_EXPAND_ALTERNATIVES: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmitFormat {
    Text,
    Latex,
    Json,
}

impl std::str::FromStr for EmitFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(EmitFormat::Text),
            "latex" => Ok(EmitFormat::Latex),
            "json" => Ok(EmitFormat::Json),
            _ => Err(Error::Parse(format!("unknown format `{s}`"))),
        }
    }
}

/// `Σ_j coeffs[j] · p_{j+1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearForm {
    pub coeffs: Vec<Q>,
}

impl LinearForm {
    fn zero(n: usize) -> Self {
        LinearForm { coeffs: vec![Q::zero(); n] }
    }

    fn add_scaled(&mut self, other: &LinearForm, factor: &Q) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b * factor;
        }
    }

    fn combine(terms: &[(&LinearForm, Q)]) -> LinearForm {
        let mut out = LinearForm::zero(terms[0].0.coeffs.len());
        for (f, s) in terms {
            out.add_scaled(f, s);
        }
        out
    }

    /// Integer coefficients with the same sign pattern: multiplied by the
    /// lcm of the denominators and divided by the gcd of the numerators.
    pub fn cleared(&self) -> Vec<num_bigint::BigInt> {
        use num_integer::Integer;
        let lcm = self.coeffs.iter().fold(num_bigint::BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<num_bigint::BigInt> = self.coeffs.iter().map(|c| (c * Q::from_integer(lcm.clone())).to_integer()).collect();
        let gcd = ints.iter().fold(num_bigint::BigInt::zero(), |acc, c| acc.gcd(c));
        if gcd.is_zero() {
            return ints;
        }
        ints.into_iter().map(|c| c / &gcd).collect()
    }

    pub fn evaluate(&self, shares: &[Q]) -> Q {
        self.coeffs.iter().zip(shares).map(|(c, p)| c * p).sum()
    }

    fn render(&self, latex: bool) -> String {
        let mut out = String::new();
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            if !mag.is_one() {
                if latex && !mag.is_integer() {
                    let _ = write!(out, "\\frac{{{}}}{{{}}}", mag.numer(), mag.denom());
                } else if latex {
                    let _ = write!(out, "{mag}");
                } else {
                    let _ = write!(out, "{mag}*");
                }
            }
            if latex {
                let _ = write!(out, "p_{{{}}}", j + 1);
            } else {
                let _ = write!(out, "p{}", j + 1);
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }
}

/// `form > 0` (strict) or `form ≥ 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Inequality {
    pub label: String,
    pub form: LinearForm,
    pub strict: bool,
}

/// `Σd − (M_1 + … + M_drop) > tail · C`, kept symbolic in the sorted gaps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SortedGapLine {
    pub drop: usize,
    pub tail: Q,
}

/// One branch of the expansion: a fixed order of the gaps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderedSystem {
    /// Rivals by decreasing gap.
    pub ordering: Vec<usize>,
    pub order_constraints: Vec<Inequality>,
    pub si: Vec<Inequality>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmittedSystem {
    pub m: usize,
    pub unifying: usize,
    pub weights: Vec<Q>,
    /// `A_i` beats `A_{i+1}` for the canonical arrangement.
    pub pi: Vec<Inequality>,
    /// `(rival, d(A_k, A_rival))`.
    pub gaps: Vec<(usize, LinearForm)>,
    pub coalition: LinearForm,
    /// Strategic lines in sorted-gap notation, with lines implied by the
    /// last one removed.
    pub si: Vec<SortedGapLine>,
    /// Strategic lines that are linear without fixing a gap order: the
    /// first line and the per-rival form of `M_{m−1} > w_m C`.
    pub si_linear: Vec<Inequality>,
    /// `si_linear` without the per-rival lines for rivals ranked below `A_k`:
    /// `d(A_k, A_i) − w_m C ≥ score(A_k) − score(A_i)`, so the arrangement
    /// already implies them.
    pub si_reduced: Vec<Inequality>,
    /// Whether `si_linear` is equivalent to `si` (no middle lines remain).
    pub si_linear_complete: bool,
    pub expanded: Option<Vec<OrderedSystem>>,
}

/// Builds the system for coalition `k` (0-based, not the winner `A1`).
pub fn emit_system(rule: &ScoringRule, k: usize, expand: bool) -> Result<EmittedSystem> {
    let m = rule.m();
    if m < 3 {
        return Err(Error::DimensionMismatch { expected: 3, actual: m });
    }
    if k == 0 {
        return Err(Error::NotApplicable(1));
    }
    if k >= m {
        return Err(Error::DimensionMismatch { expected: m, actual: k + 1 });
    }
    if expand && m > MAX_EXPAND_ALTERNATIVES {
        return Err(Error::SizeLimit(format!("expansion needs m ≤ {MAX_EXPAND_ALTERNATIVES}, got {m}")));
    }
    let table = RankingTable::new(m)?;
    let n = factorial(m);
    let w = rule.weights();
    let winner = 0;

    let mut scores = vec![LinearForm::zero(n); m];
    let mut withheld = vec![LinearForm::zero(n); m];
    let mut coalition = LinearForm::zero(n);
    for j in 0..n {
        let pos = table.positions(j);
        let member = pos[k] < pos[winner];
        if member {
            coalition.coeffs[j] = Q::one();
        }
        for a in 0..m {
            let pts = &w[pos[a] as usize];
            scores[a].coeffs[j] = pts.clone();
            withheld[a].coeffs[j] = if member { pts.clone() } else { Q::zero() };
        }
    }
    let adjusted: Vec<LinearForm> = (0..m)
        .map(|a| {
            let mut f = LinearForm::combine(&[(&scores[a], Q::one()), (&withheld[a], -Q::one())]);
            if a == k {
                f.add_scaled(&coalition, &w[0]);
            }
            f
        })
        .collect();
    let gaps: Vec<(usize, LinearForm)> = (0..m)
        .filter(|&i| i != k)
        .map(|i| (i, LinearForm::combine(&[(&adjusted[k], Q::one()), (&adjusted[i], -Q::one())])))
        .collect();

    let pi = (0..m - 1)
        .map(|a| Inequality {
            label: format!("A{} beats A{}", a + 1, a + 2),
            form: LinearForm::combine(&[(&scores[a], Q::one()), (&scores[a + 1], -Q::one())]),
            strict: true,
        })
        .collect();

    let tails: Vec<Q> = (0..m - 1).map(|l| w[l + 1..].iter().sum()).collect();
    let last = &w[m - 1];
    // Line ℓ < m−2 is implied by the last one when w_{ℓ+2} = … = w_m.
    let si: Vec<SortedGapLine> = (0..m - 1)
        .filter(|&l| l == m - 2 || w[l + 1..].iter().any(|x| x != last))
        .map(|l| SortedGapLine { drop: l, tail: tails[l].clone() })
        .collect();

    let gap_sum = LinearForm::combine(&gaps.iter().map(|(_, f)| (f, Q::one())).collect::<Vec<_>>());
    let k_name = format!("A{}", k + 1);
    let mut si_linear = Vec::new();
    if si.iter().any(|l| l.drop == 0) {
        si_linear.push(Inequality {
            label: format!("sum of d({k_name},.) > {}*C({k_name})", tails[0]),
            form: LinearForm::combine(&[(&gap_sum, Q::one()), (&coalition, -tails[0].clone())]),
            strict: true,
        });
    }
    let mut si_reduced = si_linear.clone();
    for (i, f) in &gaps {
        let label = if last.is_zero() {
            format!("d({k_name},A{}) > 0", i + 1)
        } else {
            format!("d({k_name},A{}) > {}*C({k_name})", i + 1, last)
        };
        let line = Inequality { label, form: LinearForm::combine(&[(f, Q::one()), (&coalition, -last.clone())]), strict: true };
        if *i < k {
            si_reduced.push(line.clone());
        }
        si_linear.push(line);
    }
    let si_linear_complete = si.iter().all(|l| l.drop == 0 || l.drop == m - 2);

    let expanded = expand.then(|| {
        let rivals: Vec<usize> = gaps.iter().map(|(i, _)| *i).collect();
        permutations(&rivals)
            .into_iter()
            .map(|ordering| {
                let form_of = |r: usize| &gaps.iter().find(|(i, _)| *i == r).expect("rival").1;
                let order_constraints = ordering
                    .windows(2)
                    .map(|p| Inequality {
                        label: format!("d({k_name},A{}) >= d({k_name},A{})", p[0] + 1, p[1] + 1),
                        form: LinearForm::combine(&[(form_of(p[0]), Q::one()), (form_of(p[1]), -Q::one())]),
                        strict: false,
                    })
                    .collect();
                let si = (0..m - 1)
                    .map(|l| {
                        let mut f = LinearForm::combine(&[(&gap_sum, Q::one()), (&coalition, -tails[l].clone())]);
                        for &r in &ordering[..l] {
                            f.add_scaled(form_of(r), &-Q::one());
                        }
                        Inequality { label: format!("SI line {}", l + 1), form: f, strict: true }
                    })
                    .collect();
                OrderedSystem { ordering, order_constraints, si }
            })
            .collect()
    });

    Ok(EmittedSystem {
        m,
        unifying: k,
        weights: w.to_vec(),
        pi,
        gaps,
        coalition,
        si,
        si_linear,
        si_reduced,
        si_linear_complete,
        expanded,
    })
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

impl EmittedSystem {
    pub fn render(&self, format: EmitFormat) -> String {
        match format {
            EmitFormat::Text => self.render_text(),
            EmitFormat::Latex => self.render_latex(),
            EmitFormat::Json => serde_json::to_string_pretty(&self.to_json()).expect("serializable"),
        }
    }

    fn k_name(&self) -> String {
        format!("A{}", self.unifying + 1)
    }

    fn sorted_line_text(&self, line: &SortedGapLine, latex: bool) -> String {
        let k = if latex { format!("A_{{{}}}", self.unifying + 1) } else { self.k_name() };
        let n = self.m - 1;
        if line.drop == n - 1 {
            return if latex {
                format!("M_{{{n}}} > {}\\,\\mathfrak{{C}}_{{{k}}}", line.tail)
            } else {
                format!("M{n} > {}*C({k})", line.tail)
            };
        }
        let mut lhs = if latex { format!("\\sum_{{i\\neq k}} d({k},A_i)") } else { format!("sum d({k},.)") };
        for j in 1..=line.drop {
            let _ = if latex { write!(lhs, " - M_{{{j}}}") } else { write!(lhs, " - M{j}") };
        }
        if latex {
            format!("{lhs} > {}\\,\\mathfrak{{C}}_{{{k}}}", line.tail)
        } else {
            format!("{lhs} > {}*C({k})", line.tail)
        }
    }

    fn render_text(&self) -> String {
        let k = self.k_name();
        let mut s = String::new();
        let weights: Vec<String> = self.weights.iter().map(|w| w.to_string()).collect();
        let _ = writeln!(s, "# coalition of {k} against winner A1, m = {}, w = ({})", self.m, weights.join(","));
        let _ = writeln!(s, "[arrangement]");
        for ineq in &self.pi {
            let _ = writeln!(s, "  {} > 0    ({})", ineq.form.render(false), ineq.label);
        }
        let _ = writeln!(s, "[gaps]");
        for (i, f) in &self.gaps {
            let _ = writeln!(s, "  d({k},A{}) = {}", i + 1, f.render(false));
        }
        let _ = writeln!(s, "  C({k}) = {}", self.coalition.render(false));
        let _ = writeln!(s, "[strategic]");
        for line in &self.si {
            let _ = writeln!(s, "  {}", self.sorted_line_text(line, false));
        }
        let _ = writeln!(s, "[strategic, linear{}]", if self.si_linear_complete { "" } else { " part" });
        for ineq in &self.si_linear {
            let _ = writeln!(s, "  {} > 0    ({})", ineq.form.render(false), ineq.label);
        }
        if let Some(systems) = &self.expanded {
            for (n, sys) in systems.iter().enumerate() {
                let order: Vec<String> = sys.ordering.iter().map(|r| format!("A{}", r + 1)).collect();
                let _ = writeln!(s, "[expanded {}: gaps ordered {}]", n + 1, order.join(" >= "));
                for ineq in &sys.order_constraints {
                    let _ = writeln!(s, "  {} >= 0    ({})", ineq.form.render(false), ineq.label);
                }
                for ineq in &sys.si {
                    let _ = writeln!(s, "  {} > 0", ineq.form.render(false));
                }
            }
        }
        s
    }

    fn render_latex(&self) -> String {
        let k = format!("A_{{{}}}", self.unifying + 1);
        let mut s = String::from("\\begin{cases}\n");
        for ineq in &self.pi {
            let _ = writeln!(s, "{} > 0, & \\text{{{}}} \\\\", ineq.form.render(true), ineq.label);
        }
        for (i, f) in &self.gaps {
            let _ = writeln!(s, "d({k},A_{{{}}}) = {}, \\\\", i + 1, f.render(true));
        }
        let _ = writeln!(s, "\\mathfrak{{C}}_{{{k}}} = {}, \\\\", self.coalition.render(true));
        for line in &self.si {
            let _ = writeln!(s, "{} \\\\", self.sorted_line_text(line, true));
        }
        for ineq in &self.si_linear {
            let _ = writeln!(s, "{} > 0 \\\\", ineq.form.render(true));
        }
        s.push_str("\\end{cases}\n");
        s
    }

    pub fn to_json(&self) -> Value {
        let form = |f: &LinearForm| f.coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>();
        let ineq = |i: &Inequality| json!({"label": i.label, "coeffs": form(&i.form), "strict": i.strict});
        json!({
            "m": self.m,
            "unifying": self.unifying + 1,
            "winner": 1,
            "weights": self.weights.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
            "pi": self.pi.iter().map(ineq).collect::<Vec<_>>(),
            "gaps": self.gaps.iter().map(|(i, f)| json!({"rival": i + 1, "coeffs": form(f)})).collect::<Vec<_>>(),
            "coalition": form(&self.coalition),
            "si": self.si.iter().map(|l| json!({"drop_top": l.drop, "tail_weight": l.tail.to_string(),
                                                "text": self.sorted_line_text(l, false)})).collect::<Vec<_>>(),
            "si_linear": self.si_linear.iter().map(ineq).collect::<Vec<_>>(),
            "si_reduced": self.si_reduced.iter().map(ineq).collect::<Vec<_>>(),
            "si_linear_complete": self.si_linear_complete,
            "expanded": self.expanded.as_ref().map(|systems| systems.iter().map(|sys| json!({
                "ordering": sys.ordering.iter().map(|r| r + 1).collect::<Vec<_>>(),
                "order_constraints": sys.order_constraints.iter().map(ineq).collect::<Vec<_>>(),
                "si": sys.si.iter().map(ineq).collect::<Vec<_>>(),
            })).collect::<Vec<_>>()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{q, qi};
    use crate::rules::NamedRule;

    fn lambda_rule(l: Q) -> ScoringRule {
        ScoringRule::new(vec![qi(1), l, qi(0)]).unwrap()
    }

    #[test]
    fn m3_last_line_matches_closed_form() {
        let l = q(1, 3);
        let sys = emit_system(&lambda_rule(l.clone()), 1, false).unwrap();
        assert!(sys.si_linear_complete);
        // (2−λ)(p3+p4+p6) + (2λ−1)p1 − (1+λ)p2 − (1+λ)p5
        let two = qi(2);
        let one = qi(1);
        let expected = vec![&two * &l - &one, -(&one + &l), &two - &l, &two - &l, -(&one + &l), &two - &l];
        assert_eq!(sys.si_linear[0].form.coeffs, expected);
    }

    #[test]
    fn reduced_lines_drop_rivals_below() {
        let rule = lambda_rule(q(1, 2));
        let a2 = emit_system(&rule, 1, false).unwrap();
        assert_eq!(a2.si_reduced.iter().map(|i| i.label.as_str()).collect::<Vec<_>>(), ["sum of d(A2,.) > 1/2*C(A2)", "d(A2,A1) > 0"]);
        let a3 = emit_system(&rule, 2, false).unwrap();
        assert_eq!(a3.si_reduced.len(), 3);
    }

    #[test]
    fn plurality_collapses_to_positive_gaps() {
        for m in 3..=5 {
            let rule = ScoringRule::named(NamedRule::Plurality, m).unwrap();
            for k in 1..m {
                let sys = emit_system(&rule, k, false).unwrap();
                assert_eq!(sys.si, vec![SortedGapLine { drop: m - 2, tail: qi(0) }]);
                assert_eq!(sys.si_linear.len(), m - 1);
                for (ineq, (_, gap)) in sys.si_linear.iter().zip(&sys.gaps) {
                    assert_eq!(&ineq.form, gap);
                }
            }
        }
    }

    #[test]
    fn expansion_sizes() {
        let borda3 = ScoringRule::named(NamedRule::Borda, 3).unwrap();
        assert_eq!(emit_system(&borda3, 1, true).unwrap().expanded.unwrap().len(), 2);
        let borda5 = ScoringRule::named(NamedRule::Borda, 5).unwrap();
        assert_eq!(emit_system(&borda5, 2, true).unwrap().expanded.unwrap().len(), 24);
        let borda7 = ScoringRule::named(NamedRule::Borda, 7).unwrap();
        assert!(matches!(emit_system(&borda7, 1, true), Err(Error::SizeLimit(_))));
        assert!(emit_system(&borda7, 1, false).is_ok());
        assert!(matches!(emit_system(&borda3, 0, false), Err(Error::NotApplicable(1))));
    }

    #[test]
    fn renders_all_formats() {
        let rule = ScoringRule::named(NamedRule::Borda, 4).unwrap();
        let sys = emit_system(&rule, 1, true).unwrap();
        let text = sys.render(EmitFormat::Text);
        assert!(text.contains("d(A2,A1) ="));
        assert!(text.contains("M3 > 0*C(A2)"));
        assert!(sys.render(EmitFormat::Latex).contains("\\begin{cases}"));
        let json: Value = serde_json::from_str(&sys.render(EmitFormat::Json)).unwrap();
        assert_eq!(json["expanded"].as_array().unwrap().len(), 6);
    }

    #[test]
    fn cleared_coefficients() {
        let f = LinearForm { coeffs: vec![q(1, 2), q(-3, 4), qi(0)] };
        let ints: Vec<i64> = f.cleared().into_iter().map(|b| i64::try_from(b).unwrap()).collect();
        assert_eq!(ints, vec![2, -3, 0]);
    }
}
