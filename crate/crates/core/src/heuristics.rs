//! Node scoring functions.
//!
//! * `MinLen`: length of the shortest remainder.
//! * Probability product `h(ν) = Π_i p(k, |r_i^ν|)`, kept as a sum of logs,
//!   with `k` chosen once per level by one of the [`KRule`]s.
//! * `GCoV`: `μ(R)² / var(R)^γ · sqrt(ub(R))` with `γ = 0.0036·N − 0.0161`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::instance::{Instance, NodeState};
use crate::prob::ProbTable;

/// Published regression constants for the `k` rules and for `γ(N)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeuristicConstants {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub gamma_slope: f64,
    pub gamma_intercept: f64,
}

impl Default for HeuristicConstants {
    fn default() -> Self {
        Self { a: 1.8233, b: 0.1588, c: 31.0, gamma_slope: 0.0036, gamma_intercept: -0.0161 }
    }
}

impl HeuristicConstants {
    /// `γ(N)`; negative for `N < 5`, applied as-is.
    pub fn gamma(&self, n_strings: usize) -> f64 {
        self.gamma_slope * n_strings as f64 + self.gamma_intercept
    }
}

/// How `k` is estimated for the probability-product score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KRule {
    /// `⌊min / |Σ|⌋`
    Guess,
    /// `round(max·(a − b·ln N) / |Σ|)`, for uncorrelated strings.
    AnalyticUncorr,
    /// `⌊(min − c) / |Σ|⌋`, for correlated strings.
    AnalyticCorr,
    /// A constant `k`, used by k-sweeps.
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HeuristicKind {
    MinLen,
    ProbKGuess,
    ProbKAnalyticUncorr,
    ProbKAnalyticCorr,
    ProbFixedK(usize),
    GCoV,
}

impl HeuristicKind {
    pub fn k_rule(&self) -> Option<KRule> {
        match *self {
            HeuristicKind::ProbKGuess => Some(KRule::Guess),
            HeuristicKind::ProbKAnalyticUncorr => Some(KRule::AnalyticUncorr),
            HeuristicKind::ProbKAnalyticCorr => Some(KRule::AnalyticCorr),
            HeuristicKind::ProbFixedK(k) => Some(KRule::Fixed(k)),
            HeuristicKind::MinLen | HeuristicKind::GCoV => None,
        }
    }
}

impl fmt::Display for HeuristicKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HeuristicKind::MinLen => f.write_str("minlen"),
            HeuristicKind::ProbKGuess => f.write_str("kguess"),
            HeuristicKind::ProbKAnalyticUncorr => f.write_str("kanalytic-uncorr"),
            HeuristicKind::ProbKAnalyticCorr => f.write_str("kanalytic-corr"),
            HeuristicKind::ProbFixedK(k) => write!(f, "k={k}"),
            HeuristicKind::GCoV => f.write_str("gcov"),
        }
    }
}

impl FromStr for HeuristicKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "minlen" => HeuristicKind::MinLen,
            "kguess" => HeuristicKind::ProbKGuess,
            "kanalytic-uncorr" => HeuristicKind::ProbKAnalyticUncorr,
            "kanalytic-corr" => HeuristicKind::ProbKAnalyticCorr,
            "gcov" => HeuristicKind::GCoV,
            other => match other.strip_prefix("k=").map(str::parse) {
                Some(Ok(k)) => HeuristicKind::ProbFixedK(k),
                _ => return Err(format!("unknown heuristic {other:?}")),
            },
        })
    }
}

/// Scoring function plus its constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeuristicSpec {
    pub kind: HeuristicKind,
    #[serde(default)]
    pub constants: HeuristicConstants,
}

impl HeuristicSpec {
    pub fn new(kind: HeuristicKind) -> Self {
        Self { kind, constants: HeuristicConstants::default() }
    }

    pub fn uses_probabilities(&self) -> bool {
        self.kind.k_rule().is_some()
    }
}

impl From<HeuristicKind> for HeuristicSpec {
    fn from(kind: HeuristicKind) -> Self {
        Self::new(kind)
    }
}

/// Node score; larger is better. Probability scores are log-products, so
/// an impossible node scores negative infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Score(pub f64);

impl Eq for Score {}

impl PartialOrd for Score {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Score {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Shortest and longest remainder over every child of a level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChildLengthStats {
    pub min: usize,
    pub max: usize,
}

impl ChildLengthStats {
    pub fn from_children(instance: &Instance, children: &[NodeState]) -> Option<Self> {
        children
            .iter()
            .flat_map(|c| instance.remaining_iter(c))
            .fold(None, |acc, l| match acc {
                None => Some(Self { min: l, max: l }),
                Some(s) => Some(Self { min: s.min.min(l), max: s.max.max(l) }),
            })
    }
}

/// Picks `k` for a level. Always at least 1 and, when possible, at most
/// the longest remainder.
pub fn select_k(
    rule: KRule,
    stats: ChildLengthStats,
    sigma_size: usize,
    n_strings: usize,
    constants: &HeuristicConstants,
) -> usize {
    let sigma = sigma_size as f64;
    let raw = match rule {
        KRule::Guess => (stats.min as f64 / sigma).floor(),
        KRule::AnalyticUncorr => {
            (stats.max as f64 * (constants.a - constants.b * (n_strings as f64).ln()) / sigma).round()
        }
        KRule::AnalyticCorr => ((stats.min as f64 - constants.c) / sigma).floor(),
        KRule::Fixed(k) => k as f64,
    };
    let k = if raw.is_nan() || raw < 1.0 { 1 } else { raw as usize };
    k.min(stats.max.max(1))
}

/// `Σ_i ln p(k, |r_i|)`.
pub fn score_prob(lengths: impl IntoIterator<Item = usize>, k: usize, table: &ProbTable) -> Score {
    if k == 0 {
        return Score(0.0);
    }
    Score(lengths.into_iter().map(|n| table.ln_p(k, n)).sum())
}

/// `μ² / var^γ · sqrt(ub)`. A zero variance contributes a factor of 1.
pub fn gcov_value(mean: f64, variance: f64, upper_bound: usize, gamma: f64) -> f64 {
    let dispersion = if variance > 0.0 { variance.powf(gamma) } else { 1.0 };
    mean * mean / dispersion * (upper_bound as f64).sqrt()
}

pub fn score_gcov(instance: &Instance, state: &NodeState, constants: &HeuristicConstants) -> Score {
    let (mean, variance) = instance.stats(state);
    let gamma = constants.gamma(instance.num_strings());
    Score(gcov_value(mean, variance, instance.upper_bound(state), gamma))
}

pub fn score_minlen(instance: &Instance, state: &NodeState) -> Score {
    Score(instance.remaining_iter(state).min().unwrap_or(0) as f64)
}

/// Scores the children of one level. For probability scores `k` is fixed
/// from the level-wide remainder statistics before any child is scored.
#[derive(Debug, Clone)]
pub struct LevelScorer<'a> {
    spec: &'a HeuristicSpec,
    instance: &'a Instance,
    table: Option<&'a ProbTable>,
    k: Option<usize>,
}

impl<'a> LevelScorer<'a> {
    /// `table` must be present (and cover the longest string) for
    /// probability-based kinds.
    pub fn new(
        spec: &'a HeuristicSpec,
        instance: &'a Instance,
        table: Option<&'a ProbTable>,
        children: &[NodeState],
    ) -> Self {
        let k = spec.kind.k_rule().map(|rule| {
            let stats = ChildLengthStats::from_children(instance, children)
                .unwrap_or(ChildLengthStats { min: 0, max: 0 });
            select_k(rule, stats, instance.sigma_size(), instance.num_strings(), &spec.constants)
        });
        if k.is_some() {
            assert!(table.is_some(), "probability heuristic needs a probability table");
        }
        Self { spec, instance, table, k }
    }

    /// The level's `k`, for probability kinds.
    pub fn k(&self) -> Option<usize> {
        self.k
    }

    pub fn score(&self, node: &NodeState) -> Score {
        match self.spec.kind {
            HeuristicKind::MinLen => score_minlen(self.instance, node),
            HeuristicKind::GCoV => score_gcov(self.instance, node, &self.spec.constants),
            _ => score_prob(
                self.instance.remaining_iter(node),
                self.k.unwrap_or(1),
                self.table.expect("checked in LevelScorer::new"),
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::build_table;

    fn stats(min: usize, max: usize) -> ChildLengthStats {
        ChildLengthStats { min, max }
    }

    #[test]
    fn k_rule_examples() {
        let c = HeuristicConstants::default();
        assert_eq!(select_k(KRule::AnalyticUncorr, stats(0, 600), 4, 10, &c), 219);
        assert_eq!(select_k(KRule::AnalyticCorr, stats(1000, 1000), 2, 10, &c), 484);
        assert_eq!(select_k(KRule::AnalyticCorr, stats(20, 20), 4, 10, &c), 1);
        assert_eq!(select_k(KRule::Guess, stats(599, 600), 4, 10, &c), 149);
    }

    #[test]
    fn k_is_clamped() {
        let c = HeuristicConstants::default();
        assert_eq!(select_k(KRule::Guess, stats(0, 0), 4, 2, &c), 1);
        assert_eq!(select_k(KRule::Fixed(0), stats(3, 9), 4, 2, &c), 1);
        assert_eq!(select_k(KRule::Fixed(50), stats(3, 9), 4, 2, &c), 9);
        // a − b·ln N turns negative for huge N
        assert_eq!(select_k(KRule::AnalyticUncorr, stats(5, 600), 4, 1_000_000, &c), 1);
    }

    #[test]
    fn prob_score_examples() {
        let t = build_table(4, 10).unwrap();
        let s = score_prob([3, 3], 2, &t);
        assert!((s.0 - 2.0 * 0.15625f64.ln()).abs() < 1e-12);
        assert!((s.0 + 3.712596).abs() < 1e-6);
        assert_eq!(score_prob([7, 9], 0, &t), Score(0.0));
        assert_eq!(score_prob([1, 5], 2, &t), Score(f64::NEG_INFINITY));
        assert!(Score(f64::NEG_INFINITY) < Score(-1e300));
    }

    #[test]
    fn gcov_examples() {
        let c = HeuristicConstants::default();
        assert!((c.gamma(2) + 0.0089).abs() < 1e-15);
        let v = gcov_value(5.0, 2.0, 3, c.gamma(2));
        assert!((v - 43.57).abs() < 0.005, "{v}");
        assert_eq!(gcov_value(5.0, 0.0, 0, c.gamma(3)), 0.0);
        assert_eq!(gcov_value(5.0, 0.0, 4, c.gamma(2)), 50.0);
    }

    #[test]
    fn gcov_on_instance() {
        let inst = Instance::new(b"ABC", &["BCABAABC", "CAACBBAA"]).unwrap();
        let child = inst.successor(&inst.root(), 1).unwrap();
        let c = HeuristicConstants::default();
        let expected = gcov_value(5.0, 8.0, inst.upper_bound(&child), c.gamma(2));
        assert_eq!(score_gcov(&inst, &child, &c), Score(expected));
    }

    #[test]
    fn minlen_examples() {
        let inst = Instance::new(b"ABC", &["BCABAABC", "CAACBBAA"]).unwrap();
        let child = inst.successor(&inst.root(), 1).unwrap();
        assert_eq!(score_minlen(&inst, &child), Score(3.0));
        let five = Instance::new(b"A", &["AAAAA", "AAAAA"]).unwrap();
        assert_eq!(score_minlen(&five, &five.root()), Score(5.0));
        let ab = Instance::new(b"AB", &["AB", "AB"]).unwrap();
        let end = ab.successor(&ab.successor(&ab.root(), 0).unwrap(), 1).unwrap();
        assert_eq!(score_minlen(&ab, &end), Score(0.0));
    }

    #[test]
    fn heuristic_names_round_trip() {
        for kind in [
            HeuristicKind::MinLen,
            HeuristicKind::ProbKGuess,
            HeuristicKind::ProbKAnalyticUncorr,
            HeuristicKind::ProbKAnalyticCorr,
            HeuristicKind::ProbFixedK(17),
            HeuristicKind::GCoV,
        ] {
            assert_eq!(kind.to_string().parse::<HeuristicKind>().unwrap(), kind);
        }
        assert!("bogus".parse::<HeuristicKind>().is_err());
    }

    #[test]
    fn level_k_is_shared_across_children() {
        let inst = Instance::new(b"ACGT", &["ACGTACGTAC", "GTACGTTTAC"]).unwrap();
        let children: Vec<_> = (0..4).filter_map(|c| inst.successor(&inst.root(), c)).collect();
        let spec = HeuristicSpec::new(HeuristicKind::ProbKGuess);
        let table = build_table(4, 10).unwrap();
        let scorer = LevelScorer::new(&spec, &inst, Some(&table), &children);
        let s = ChildLengthStats::from_children(&inst, &children).unwrap();
        assert_eq!(scorer.k(), Some((s.min / 4).max(1)));
    }
}
