//! Beam search over LCS construction and the two-heuristic hyper-heuristic.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::heuristics::{HeuristicKind, HeuristicSpec, LevelScorer, Score};
use crate::instance::{Instance, NodeArena, NodeState};
use crate::oracle::is_subsequence;
use crate::prob::{cached_table, KernelError, ProbTable};

/// Below this many children a level is scored on the calling thread.
const PARALLEL_SCORING_MIN: usize = 512;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SearchError {
    #[error("invalid beam configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Secondary ordering among equally scored children.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TieBreak {
    /// Lexicographically smaller cursor vector first.
    #[default]
    CursorLex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamConfig {
    pub beta: usize,
    /// Width of the hyper-heuristic's probe runs.
    pub beta_h: usize,
    pub heuristic: HeuristicSpec,
    /// Merge children that reach identical cursor vectors.
    pub dominance_filter: bool,
    pub tie_break: TieBreak,
}

impl Default for BeamConfig {
    fn default() -> Self {
        Self {
            beta: 200,
            beta_h: 60,
            heuristic: HeuristicSpec::new(HeuristicKind::ProbKAnalyticUncorr),
            dominance_filter: false,
            tie_break: TieBreak::CursorLex,
        }
    }
}

impl BeamConfig {
    pub fn with_heuristic(heuristic: impl Into<HeuristicSpec>) -> Self {
        Self { heuristic: heuristic.into(), ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        if self.beta == 0 {
            return Err(SearchError::InvalidConfig("beam width must be positive".into()));
        }
        if self.beta_h == 0 || self.beta_h > self.beta {
            return Err(SearchError::InvalidConfig(format!(
                "probe width must be in 1..={}, got {}",
                self.beta, self.beta_h
            )));
        }
        Ok(())
    }
}

/// Outcome of one solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub solution: String,
    pub length: usize,
    /// Expansion rounds that produced at least one child.
    pub levels: usize,
    pub nodes_expanded: usize,
    /// Search time in milliseconds, excluding table builds.
    pub wall_ms: f64,
    pub config: BeamConfig,
    /// Heuristic picked by the hyper-heuristic, if one ran.
    pub chosen_heuristic: Option<HeuristicKind>,
    /// Lengths of the two probe runs, if the hyper-heuristic ran.
    pub probe_lengths: Option<(usize, usize)>,
    /// Result of [`verify_solution`] on `solution`.
    pub verified: bool,
}

struct Outcome {
    codes: Vec<u8>,
    levels: usize,
    nodes_expanded: usize,
    elapsed: Duration,
}

fn probability_table(instance: &Instance, spec: &HeuristicSpec) -> Result<Option<std::sync::Arc<ProbTable>>, SearchError> {
    if spec.uses_probabilities() {
        Ok(Some(cached_table(instance.sigma_size(), instance.max_len())?))
    } else {
        Ok(None)
    }
}

fn search(
    instance: &Instance,
    beta: usize,
    spec: &HeuristicSpec,
    dominance_filter: bool,
    table: Option<&ProbTable>,
) -> Outcome {
    let start = Instant::now();
    let sigma = instance.sigma_size() as u8;
    let mut arena = NodeArena::new();
    let mut beam = vec![instance.root()];
    let mut best = instance.root();
    let mut levels = 0;
    let mut nodes_expanded = 0;

    loop {
        let mut children: Vec<NodeState> = beam
            .iter()
            .flat_map(|node| (0..sigma).filter_map(move |c| instance.successor(node, c)))
            .collect();
        if children.is_empty() {
            break;
        }
        nodes_expanded += beam.len();
        levels += 1;

        if dominance_filter {
            // Scores depend only on cursors, so the first copy is as good as any.
            let mut seen = HashSet::with_capacity(children.len());
            children.retain(|c| seen.insert(c.cursors.clone()));
        }

        let scorer = LevelScorer::new(spec, instance, table, &children);
        let scores: Vec<Score> = if children.len() >= PARALLEL_SCORING_MIN {
            children.par_iter().map(|c| scorer.score(c)).collect()
        } else {
            children.iter().map(|c| scorer.score(c)).collect()
        };

        let mut order: Vec<usize> = (0..children.len()).collect();
        order.sort_unstable_by(|&a, &b| {
            scores[b]
                .cmp(&scores[a])
                .then_with(|| children[a].cursors.cmp(&children[b].cursors))
                .then(a.cmp(&b))
        });
        order.truncate(beta);

        let mut slots: Vec<Option<NodeState>> = children.into_iter().map(Some).collect();
        beam = order.iter().filter_map(|&i| slots[i].take()).collect();
        for node in &mut beam {
            arena.register(node);
        }
        if beam[0].depth > best.depth {
            best = beam[0].clone();
        }
    }
    Outcome { codes: arena.codes_for(&best), levels, nodes_expanded, elapsed: start.elapsed() }
}

fn report(instance: &Instance, config: &BeamConfig, outcome: Outcome) -> RunReport {
    let raw = instance.decode(&outcome.codes);
    RunReport {
        verified: verify_solution(instance, &raw),
        length: raw.len(),
        solution: String::from_utf8_lossy(&raw).into_owned(),
        levels: outcome.levels,
        nodes_expanded: outcome.nodes_expanded,
        wall_ms: outcome.elapsed.as_secs_f64() * 1e3,
        config: config.clone(),
        chosen_heuristic: None,
        probe_lengths: None,
    }
}

/// Runs beam search with `config.beta` and `config.heuristic`, returning the
/// longest solution seen at any level.
pub fn beam_search(instance: &Instance, config: &BeamConfig) -> Result<RunReport, SearchError> {
    config.validate()?;
    let table = probability_table(instance, &config.heuristic)?;
    let outcome = search(instance, config.beta, &config.heuristic, config.dominance_filter, table.as_deref());
    Ok(report(instance, config, outcome))
}

/// Which heuristic the hyper-heuristic commits to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HhChoice {
    First,
    Second,
}

/// The first heuristic wins ties.
pub fn choose_heuristic(probe_first: usize, probe_second: usize) -> HhChoice {
    if probe_first >= probe_second {
        HhChoice::First
    } else {
        HhChoice::Second
    }
}

/// Probes `hf1` and `hf2` at width `config.beta_h`, then reruns the winner at
/// `config.beta`. `wall_ms` covers all three searches.
pub fn hyper_heuristic(
    instance: &Instance,
    config: &BeamConfig,
    hf1: HeuristicSpec,
    hf2: HeuristicSpec,
) -> Result<RunReport, SearchError> {
    config.validate()?;
    let t1 = probability_table(instance, &hf1)?;
    let t2 = probability_table(instance, &hf2)?;
    let probe1 = search(instance, config.beta_h, &hf1, config.dominance_filter, t1.as_deref());
    let probe2 = search(instance, config.beta_h, &hf2, config.dominance_filter, t2.as_deref());
    let lengths = (probe1.codes.len(), probe2.codes.len());
    let (winner, table) = match choose_heuristic(lengths.0, lengths.1) {
        HhChoice::First => (hf1, t1),
        HhChoice::Second => (hf2, t2),
    };
    let mut full = search(instance, config.beta, &winner, config.dominance_filter, table.as_deref());
    full.elapsed += probe1.elapsed + probe2.elapsed;
    let final_config = BeamConfig { heuristic: winner, ..config.clone() };
    let mut out = report(instance, &final_config, full);
    out.chosen_heuristic = Some(winner.kind);
    out.probe_lengths = Some(lengths);
    Ok(out)
}

/// True iff `solution` (raw symbols) is a subsequence of every input string.
/// Uses a plain scan, not the lookup tables.
pub fn verify_solution(instance: &Instance, solution: &[u8]) -> bool {
    (0..instance.num_strings()).all(|i| is_subsequence(solution, &instance.raw_string(i)))
}
