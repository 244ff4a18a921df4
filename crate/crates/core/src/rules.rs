//! Scoring (positional) rules.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::num::{parse_rational_list, qi, Scalar, Q};

/// A positional rule: an alternative ranked `r`-th on a ballot receives
/// `weights[r - 1]` points.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ScoringRule {
    weights: Vec<Q>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NamedRule {
    Plurality,
    Borda,
    Antiplurality,
}

impl NamedRule {
    pub const ALL: [NamedRule; 3] = [NamedRule::Plurality, NamedRule::Antiplurality, NamedRule::Borda];

    pub fn as_str(self) -> &'static str {
        match self {
            NamedRule::Plurality => "plurality",
            NamedRule::Borda => "borda",
            NamedRule::Antiplurality => "antiplurality",
        }
    }
}

impl fmt::Display for NamedRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NamedRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "plurality" => Ok(NamedRule::Plurality),
            "borda" => Ok(NamedRule::Borda),
            "antiplurality" | "anti-plurality" | "veto" => Ok(NamedRule::Antiplurality),
            _ => Err(Error::UnknownRule(s.to_string())),
        }
    }
}

impl ScoringRule {
    /// Validates a weight vector: at least two entries, non-increasing, and
    /// `w_1 > w_m`.
    pub fn new(weights: Vec<Q>) -> Result<Self> {
        if weights.len() < 2 {
            return Err(Error::DimensionMismatch { expected: 2, actual: weights.len() });
        }
        if let Some(at) = weights.windows(2).position(|w| w[0] < w[1]) {
            return Err(Error::WeightOrder { at: at + 1 });
        }
        if weights[0] == weights[weights.len() - 1] {
            return Err(Error::DegenerateRule);
        }
        Ok(ScoringRule { weights })
    }

    pub fn from_integers(weights: &[i64]) -> Result<Self> {
        Self::new(weights.iter().map(|&w| qi(w)).collect())
    }

    /// Plurality `(1,0,…,0)`, Borda `(m−1,…,1,0)` or Antiplurality `(1,…,1,0)`.
    pub fn named(rule: NamedRule, m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::DimensionMismatch { expected: 2, actual: m });
        }
        let weights = match rule {
            NamedRule::Plurality => (0..m).map(|r| if r == 0 { Q::one() } else { Q::zero() }).collect(),
            NamedRule::Borda => (0..m).map(|r| qi((m - 1 - r) as i64)).collect(),
            NamedRule::Antiplurality => (0..m).map(|r| if r + 1 < m { Q::one() } else { Q::zero() }).collect(),
        };
        Self::new(weights)
    }

    /// Either a rule name or a comma-separated weight list such as `1,0.9,0`.
    pub fn parse(spec: &str, m: Option<usize>) -> Result<Self> {
        if spec.contains(',') {
            let rule = Self::new(parse_rational_list(spec)?)?;
            if let Some(m) = m {
                if rule.m() != m {
                    return Err(Error::DimensionMismatch { expected: m, actual: rule.m() });
                }
            }
            return Ok(rule);
        }
        let named: NamedRule = spec.parse()?;
        let m = m.ok_or_else(|| Error::Parse(format!("rule `{spec}` needs an alternative count")))?;
        Self::named(named, m)
    }

    pub fn m(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[Q] {
        &self.weights
    }

    pub fn weights_as<T: Scalar>(&self) -> Vec<T> {
        self.weights.iter().map(T::from_q).collect()
    }

    /// Affine image with `w_1 = 1` and `w_m = 0`. For three alternatives
    /// the middle weight is the usual λ.
    pub fn normalize(&self) -> ScoringRule {
        let lo = &self.weights[self.m() - 1];
        let span = &self.weights[0] - lo;
        ScoringRule { weights: self.weights.iter().map(|w| (w - lo) / &span).collect() }
    }

    pub fn is_normalized(&self) -> bool {
        self.weights[0].is_one() && self.weights[self.m() - 1].is_zero()
    }

    /// True when every weight below the first one is zero.
    pub fn is_plurality(&self) -> bool {
        let n = self.normalize();
        n.weights[1..].iter().all(Zero::is_zero)
    }

    /// Name of the rule when it is an affine image of a named one.
    pub fn recognize(&self) -> Option<NamedRule> {
        let n = self.normalize();
        NamedRule::ALL
            .into_iter()
            .find(|&r| ScoringRule::named(r, self.m()).map(|x| x.normalize() == n).unwrap_or(false))
    }
}

impl fmt::Display for ScoringRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, w) in self.weights.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{w}")?;
        }
        f.write_str(")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::q;
    use proptest::prelude::*;

    fn ints(v: &[i64]) -> Vec<Q> {
        v.iter().map(|&x| qi(x)).collect()
    }

    #[test]
    fn make_rule_examples() {
        assert_eq!(ScoringRule::from_integers(&[3, 2, 1, 0]).unwrap(), ScoringRule::named(NamedRule::Borda, 4).unwrap());
        assert_eq!(
            ScoringRule::from_integers(&[1, 1, 1, 0]).unwrap(),
            ScoringRule::named(NamedRule::Antiplurality, 4).unwrap()
        );
        assert_eq!(ScoringRule::from_integers(&[1, 0, 0, 2]), Err(Error::WeightOrder { at: 3 }));
        assert_eq!(ScoringRule::from_integers(&[2, 2, 2]), Err(Error::DegenerateRule));
        assert!(ScoringRule::from_integers(&[1]).is_err());
    }

    #[test]
    fn normalize_examples() {
        let borda3 = ScoringRule::from_integers(&[2, 1, 0]).unwrap().normalize();
        assert_eq!(borda3.weights(), &[qi(1), q(1, 2), qi(0)]);
        let plur = ScoringRule::named(NamedRule::Plurality, 5).unwrap();
        assert_eq!(plur.normalize(), plur);
        let borda4 = ScoringRule::from_integers(&[3, 2, 1, 0]).unwrap().normalize();
        assert_eq!(borda4.weights(), &[qi(1), q(2, 3), q(1, 3), qi(0)]);
    }

    #[test]
    fn named_examples() {
        assert_eq!(ScoringRule::named(NamedRule::Borda, 3).unwrap().weights(), ints(&[2, 1, 0]).as_slice());
        assert_eq!(ScoringRule::named(NamedRule::Plurality, 4).unwrap().weights(), ints(&[1, 0, 0, 0]).as_slice());
        assert_eq!(ScoringRule::named(NamedRule::Antiplurality, 3).unwrap().weights(), ints(&[1, 1, 0]).as_slice());
        assert!(matches!("copeland".parse::<NamedRule>(), Err(Error::UnknownRule(_))));
        assert!(ScoringRule::named(NamedRule::Antiplurality, 2).is_ok());
    }

    #[test]
    fn parse_weights_and_names() {
        let r = ScoringRule::parse("1,0.9,0", None).unwrap();
        assert_eq!(r.weights(), &[qi(1), q(9, 10), qi(0)]);
        assert_eq!(ScoringRule::parse("borda", Some(4)).unwrap().m(), 4);
        assert!(ScoringRule::parse("borda", None).is_err());
        assert!(ScoringRule::parse("1,0,0", Some(4)).is_err());
        assert_eq!(ScoringRule::parse("6,4,2,0", None).unwrap().recognize(), Some(NamedRule::Borda));
    }

    fn weights_strategy() -> impl Strategy<Value = Vec<i64>> {
        (2usize..7).prop_flat_map(|m| prop::collection::vec(0i64..20, m)).prop_filter_map("degenerate", |mut v| {
            v.sort_unstable_by(|a, b| b.cmp(a));
            (v[0] > v[v.len() - 1]).then_some(v)
        })
    }

    proptest! {
        #[test]
        fn normalize_idempotent(w in weights_strategy()) {
            let r = ScoringRule::from_integers(&w).unwrap();
            let n = r.normalize();
            prop_assert!(n.is_normalized());
            prop_assert_eq!(n.normalize(), n);
        }

        #[test]
        fn normalize_affine_invariant(w in weights_strategy(), a in 1i64..9, b in -9i64..9) {
            let r = ScoringRule::from_integers(&w).unwrap();
            let moved = ScoringRule::new(r.weights().iter().map(|x| x * qi(a) + qi(b)).collect()).unwrap();
            prop_assert_eq!(moved.normalize(), r.normalize());
        }

        #[test]
        fn named_rules_valid(m in 2usize..9) {
            for rule in NamedRule::ALL {
                prop_assert!(ScoringRule::named(rule, m).is_ok());
            }
        }
    }
}
