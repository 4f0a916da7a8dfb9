//! Repeated shuffled trials, solution-space bookkeeping, Beta-Binomial
//! probability estimates, dominant-solution selection and consensus.

mod consensus;
mod panels;

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::beta::inv_beta_reg;
use thiserror::Error;

use crate::community::{detect, modularity, validate, Algorithm, CommunityError, DetectParams, Partition, ValidityReport};
use crate::graph::{shuffle, Graph};
use crate::scalar::Weight;

pub use consensus::{consensus, repair_partition, ConsensusWeighting};
pub use panels::{confidence_bands, similarity_matrix, size_distribution, BandRow, FrequencyRow, SimilarityRow, SizeRow};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolutionSpaceError {
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("invalid exploration config: {0}")]
    InvalidConfig(String),
    #[error("{failed} of {executed} trials failed; more than half is treated as fatal (last error: {last_error})")]
    TooManyFailures { failed: usize, executed: usize, last_error: String },
    #[error("solution space is empty")]
    EmptySpace,
    #[error("no pair of organisations is co-assigned with weight >= {threshold}; lower the consensus threshold")]
    EmptyConsensus { threshold: f64 },
    #[error(transparent)]
    Community(#[from] CommunityError),
}

pub type Result<T, E = SolutionSpaceError> = std::result::Result<T, E>;

/// Trial budget, stopping rule, prior and selection thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExplorationConfig {
    pub t_max: usize,
    /// Stop once this many consecutive successful trials found nothing new...
    pub stop_patience: usize,
    /// ...and every credible interval is at most this wide.
    pub interval_width_target: f64,
    pub credible_level: f64,
    pub prior_alpha: f64,
    pub prior_beta: f64,
    /// A solution dominates when its lower credible bound exceeds this.
    pub dominance_threshold: f64,
    /// Co-assignment level at which two organisations are kept together.
    pub consensus_threshold: f64,
    pub consensus_weighting: ConsensusWeighting,
}

impl Default for ExplorationConfig {
    fn default() -> Self {
        ExplorationConfig {
            t_max: 1000,
            stop_patience: 25,
            interval_width_target: 0.1,
            credible_level: 0.95,
            prior_alpha: 1.0,
            prior_beta: 1.0,
            dominance_threshold: 0.5,
            consensus_threshold: 0.5,
            consensus_weighting: ConsensusWeighting::Frequency,
        }
    }
}

impl ExplorationConfig {
    /// Same settings with the Jeffreys prior Beta(1/2, 1/2).
    pub fn jeffreys(self) -> Self {
        ExplorationConfig {
            prior_alpha: 0.5,
            prior_beta: 0.5,
            ..self
        }
    }

    pub fn check(&self) -> Result<()> {
        let bad = |m: &str| Err(SolutionSpaceError::InvalidConfig(m.to_string()));
        if self.t_max < 1 {
            return bad("t_max must be at least 1");
        }
        if !(self.credible_level > 0.0 && self.credible_level < 1.0) {
            return bad("credible_level must lie strictly between 0 and 1");
        }
        if !(self.prior_alpha > 0.0 && self.prior_beta > 0.0) {
            return bad("prior parameters must be positive");
        }
        if !(0.0..=1.0).contains(&self.consensus_threshold) {
            return bad("consensus_threshold must lie in [0, 1]");
        }
        Ok(())
    }
}

/// Posterior summary for one solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Estimate {
    pub p_mean: f64,
    pub p_lower: f64,
    pub p_upper: f64,
}

impl Estimate {
    pub fn width(&self) -> f64 {
        self.p_upper - self.p_lower
    }
}

/// Beta(α + c, β + t − c) posterior mean and equal-tailed credible interval.
pub fn beta_estimate(count: usize, trials: usize, alpha: f64, beta: f64, level: f64) -> Estimate {
    let a = alpha + count as f64;
    let b = beta + (trials - count.min(trials)) as f64;
    let tail = (1.0 - level) / 2.0;
    Estimate {
        p_mean: a / (a + b),
        p_lower: inv_beta_reg(a, b, tail),
        p_upper: inv_beta_reg(a, b, 1.0 - tail),
    }
}

/// One distinct partition found during exploration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SolutionEntry {
    pub canonical_key: String,
    /// The partition as first observed.
    pub partition: Partition,
    pub count: usize,
    pub first_seen_trial: usize,
    pub valid: bool,
    pub modularity: f64,
    #[serde(flatten)]
    pub estimate: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TrialRecord {
    /// 1-based index among executed trials.
    pub trial: usize,
    pub seed: u64,
    /// `None` when the detector failed.
    pub canonical_key: Option<String>,
    pub valid: Option<bool>,
    pub modularity: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SolutionSpace {
    pub year: i32,
    pub algorithm: Algorithm,
    pub base_seed: u64,
    /// Successful trials; equals the sum of entry counts.
    pub trials: usize,
    pub failed: usize,
    /// Entries in order of first appearance.
    pub entries: Vec<SolutionEntry>,
    pub log: Vec<TrialRecord>,
}

impl SolutionSpace {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn executed(&self) -> usize {
        self.trials + self.failed
    }

    pub fn entry(&self, key: &str) -> Option<&SolutionEntry> {
        self.entries.iter().find(|e| e.canonical_key == key)
    }

    /// Frequency table, most frequent first (ties by first appearance).
    pub fn frequency_table(&self) -> Vec<FrequencyRow> {
        let mut rows: Vec<FrequencyRow> = self.entries.iter().map(FrequencyRow::from).collect();
        rows.sort_by(|a, b| b.count.cmp(&a.count).then(a.first_seen_trial.cmp(&b.first_seen_trial)));
        rows
    }
}

/// Seed of trial `t`: a SplitMix64 finaliser over the base seed and index.
pub fn trial_seed(base_seed: u64, t: usize) -> u64 {
    let mut z = base_seed ^ (t as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct Outcome {
    partition: Partition,
    valid: bool,
    modularity: f64,
}

fn run_trial<W: Weight>(g: &Graph<W>, algorithm: Algorithm, params: &DetectParams, seed: u64) -> Result<Outcome, CommunityError> {
    let shuffled = shuffle(g, seed);
    let partition = detect(&shuffled, algorithm, params, seed)?;
    let valid = validate(g, &partition)?.valid;
    let q = modularity(g, &partition)?.as_f64();
    Ok(Outcome {
        partition,
        valid,
        modularity: q,
    })
}

/// Fills in posterior estimates for every entry from its count and `trials`.
pub fn estimate_probabilities(space: &mut SolutionSpace, config: &ExplorationConfig) {
    let t = space.trials;
    for e in &mut space.entries {
        e.estimate = beta_estimate(e.count, t, config.prior_alpha, config.prior_beta, config.credible_level);
    }
}

fn converged(space: &SolutionSpace, since_new: usize, config: &ExplorationConfig) -> bool {
    since_new >= config.stop_patience
        && space.entries.iter().all(|e| {
            beta_estimate(e.count, space.trials, config.prior_alpha, config.prior_beta, config.credible_level).width()
                <= config.interval_width_target
        })
}

/// Runs shuffled trials until the stopping rule or `t_max` is reached.
///
/// Trials execute in parallel batches on the current rayon pool but are
/// tallied strictly in trial order, so the result is identical to a
/// sequential run regardless of the worker count.
pub fn explore<W: Weight>(
    g: &Graph<W>,
    algorithm: Algorithm,
    params: &DetectParams,
    config: &ExplorationConfig,
    base_seed: u64,
) -> Result<SolutionSpace> {
    config.check()?;
    if g.is_empty() {
        return Err(SolutionSpaceError::EmptyGraph);
    }
    let mut space = SolutionSpace {
        year: g.year(),
        algorithm,
        base_seed,
        trials: 0,
        failed: 0,
        entries: Vec::new(),
        log: Vec::new(),
    };
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut since_new = 0;
    let mut last_error = String::new();
    let batch = rayon::current_num_threads().max(1) * 4;
    let mut next = 1;
    'run: while next <= config.t_max {
        let hi = (next + batch - 1).min(config.t_max);
        let outcomes: Vec<(usize, u64, Result<Outcome, CommunityError>)> = (next..=hi)
            .into_par_iter()
            .map(|t| {
                let seed = trial_seed(base_seed, t);
                (t, seed, run_trial(g, algorithm, params, seed))
            })
            .collect();
        next = hi + 1;
        for (t, seed, outcome) in outcomes {
            let record = match outcome {
                Err(e) => {
                    space.failed += 1;
                    last_error = e.to_string();
                    TrialRecord {
                        trial: t,
                        seed,
                        canonical_key: None,
                        valid: None,
                        modularity: None,
                        error: Some(last_error.clone()),
                    }
                }
                Ok(o) => {
                    space.trials += 1;
                    let key = o.partition.canonical_key.clone();
                    match index.get(&key) {
                        Some(&i) => {
                            space.entries[i].count += 1;
                            since_new += 1;
                        }
                        None => {
                            index.insert(key.clone(), space.entries.len());
                            space.entries.push(SolutionEntry {
                                canonical_key: key.clone(),
                                partition: o.partition,
                                count: 1,
                                first_seen_trial: t,
                                valid: o.valid,
                                modularity: o.modularity,
                                estimate: Estimate {
                                    p_mean: 0.0,
                                    p_lower: 0.0,
                                    p_upper: 0.0,
                                },
                            });
                            since_new = 0;
                        }
                    }
                    TrialRecord {
                        trial: t,
                        seed,
                        canonical_key: Some(key),
                        valid: Some(o.valid),
                        modularity: Some(o.modularity),
                        error: None,
                    }
                }
            };
            space.log.push(record);
            if converged(&space, since_new, config) {
                break 'run;
            }
        }
    }
    if space.failed * 2 > space.executed() || space.trials == 0 {
        return Err(SolutionSpaceError::TooManyFailures {
            failed: space.failed,
            executed: space.executed(),
            last_error,
        });
    }
    estimate_probabilities(&mut space, config);
    Ok(space)
}

/// The single solution, or the unique one whose lower bound exceeds `threshold`.
pub fn select_dominant(space: &SolutionSpace, threshold: f64) -> Option<&SolutionEntry> {
    if space.entries.len() == 1 {
        return space.entries.first();
    }
    let mut above = space.entries.iter().filter(|e| e.estimate.p_lower > threshold);
    match (above.next(), above.next()) {
        (Some(e), None) => Some(e),
        _ => None,
    }
}

/// How the final partition of a year was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Selection {
    Single,
    Dominant,
    /// The single or dominant solution was invalid and had to be repaired.
    Repaired,
    Consensus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Resolved {
    pub partition: Partition,
    pub selection: Selection,
    pub validity: ValidityReport,
}

/// Picks the year's partition from an explored solution space: the single or
/// dominant solution if there is one, consensus otherwise. An invalid single
/// or dominant solution is repaired, so the result is always valid.
pub fn resolve<W: Weight>(g: &Graph<W>, space: &SolutionSpace, params: &DetectParams, config: &ExplorationConfig) -> Result<Resolved> {
    let (partition, selection) = match select_dominant(space, config.dominance_threshold) {
        Some(e) if !e.valid => (repair_partition(g, &e.partition)?, Selection::Repaired),
        Some(e) if space.len() == 1 => (e.partition.clone(), Selection::Single),
        Some(e) => (e.partition.clone(), Selection::Dominant),
        None => (consensus(space, g, params, config)?, Selection::Consensus),
    };
    let validity = validate(g, &partition)?;
    Ok(Resolved {
        partition,
        selection,
        validity,
    })
}

/// Explores the solution space of `g` and resolves it to one partition.
pub fn solve<W: Weight>(
    g: &Graph<W>,
    algorithm: Algorithm,
    params: &DetectParams,
    config: &ExplorationConfig,
    base_seed: u64,
) -> Result<(SolutionSpace, Resolved)> {
    let space = explore(g, algorithm, params, config, base_seed)?;
    let resolved = resolve(g, &space, params, config)?;
    Ok((space, resolved))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;

    fn two_cliques() -> Graph<f64> {
        let mut b = GraphBuilder::new(2021);
        for p in ["a", "b"] {
            for i in 0..5 {
                for j in i + 1..5 {
                    b.add_edge(&format!("{p}{i}"), &format!("{p}{j}"), 1.0).unwrap();
                }
            }
        }
        b.add_edge("a0", "b0", 0.1).unwrap();
        b.build()
    }

    #[test]
    fn posterior_mean_formula() {
        let e = beta_estimate(10, 10, 1.0, 1.0, 0.95);
        assert!((e.p_mean - 11.0 / 12.0).abs() < 1e-15);
        let e = beta_estimate(0, 10, 1.0, 1.0, 0.95);
        assert!((e.p_mean - 1.0 / 12.0).abs() < 1e-15);
        assert!(e.p_lower <= e.p_mean && e.p_mean <= e.p_upper);
    }

    #[test]
    fn widths_shrink_with_more_trials() {
        let w: Vec<f64> = [10, 100, 1000].iter().map(|&t| beta_estimate(t * 3 / 10, t, 1.0, 1.0, 0.95).width()).collect();
        assert!(w[0] > w[1] && w[1] > w[2]);
    }

    #[test]
    fn dominance_examples() {
        let mut space = SolutionSpace {
            year: 2020,
            algorithm: Algorithm::Louvain,
            base_seed: 0,
            trials: 100,
            failed: 0,
            entries: Vec::new(),
            log: Vec::new(),
        };
        let make = |i: usize, count: usize| {
            let p = Partition::from_labels(2020, ["a", "b", "c"], [0, i.min(1), i.min(2)], Algorithm::Louvain, 0);
            SolutionEntry {
                canonical_key: p.canonical_key.clone(),
                partition: p,
                count,
                first_seen_trial: i + 1,
                valid: true,
                modularity: 0.0,
                estimate: Estimate {
                    p_mean: 0.0,
                    p_lower: 0.0,
                    p_upper: 0.0,
                },
            }
        };
        let cfg = ExplorationConfig::default();
        space.entries = vec![make(0, 90), make(1, 5), make(2, 5)];
        estimate_probabilities(&mut space, &cfg);
        assert_eq!(select_dominant(&space, 0.5).map(|e| e.count), Some(90));
        space.entries = vec![make(0, 40), make(1, 35), make(2, 25)];
        estimate_probabilities(&mut space, &cfg);
        assert!(select_dominant(&space, 0.5).is_none());
        space.entries = vec![make(0, 100)];
        estimate_probabilities(&mut space, &cfg);
        assert!(select_dominant(&space, 0.99).is_some());
    }

    #[test]
    fn unambiguous_graph_has_one_solution() {
        let g = two_cliques();
        let cfg = ExplorationConfig {
            t_max: 50,
            ..Default::default()
        };
        for a in Algorithm::ALL {
            let s = explore(&g, a, &DetectParams::default(), &cfg, 7).unwrap();
            assert_eq!(s.len(), 1, "{a}");
            assert_eq!(s.entries[0].count, s.trials);
            assert!(s.entries[0].estimate.p_mean > 0.9);
            assert!(s.entries[0].valid);
        }
    }

    #[test]
    fn exploration_is_deterministic_and_pool_independent() {
        let g = two_cliques();
        let cfg = ExplorationConfig {
            t_max: 40,
            stop_patience: 1000,
            ..Default::default()
        };
        let a = explore(&g, Algorithm::LabelPropagation, &DetectParams::default(), &cfg, 3).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| explore(&g, Algorithm::LabelPropagation, &DetectParams::default(), &cfg, 3).unwrap());
        assert_eq!(a, b);
        assert_eq!(a.executed(), 40);
        assert_eq!(a.entries.iter().map(|e| e.count).sum::<usize>() + a.failed, a.executed());
    }

    #[test]
    fn stops_early_when_converged() {
        let g = two_cliques();
        let s = explore(&g, Algorithm::Walktrap, &DetectParams::default(), &ExplorationConfig::default(), 1).unwrap();
        assert!(s.trials < 1000);
        assert!(s.entries[0].estimate.width() <= 0.1);
    }

    #[test]
    fn failing_detector_is_fatal_past_half() {
        let g = two_cliques();
        let params = DetectParams {
            max_iterations: 0,
            ..Default::default()
        };
        let cfg = ExplorationConfig {
            t_max: 10,
            ..Default::default()
        };
        let err = explore(&g, Algorithm::LabelPropagation, &params, &cfg, 0).unwrap_err();
        assert!(matches!(err, SolutionSpaceError::TooManyFailures { failed: 10, executed: 10, .. }));
    }

    #[test]
    fn invalid_single_solution_is_repaired() {
        let g = two_cliques();
        let ids: Vec<&str> = g.node_ids().collect();
        let lonely = Partition::from_labels(2021, ids.iter().copied(), ids.iter().map(|id| usize::from(*id != "a0")), Algorithm::Louvain, 4);
        let mut space = SolutionSpace {
            year: 2021,
            algorithm: Algorithm::Louvain,
            base_seed: 4,
            trials: 10,
            failed: 0,
            entries: vec![SolutionEntry {
                canonical_key: lonely.canonical_key.clone(),
                partition: lonely,
                count: 10,
                first_seen_trial: 1,
                valid: false,
                modularity: 0.0,
                estimate: Estimate {
                    p_mean: 0.0,
                    p_lower: 0.0,
                    p_upper: 0.0,
                },
            }],
            log: Vec::new(),
        };
        let cfg = ExplorationConfig::default();
        estimate_probabilities(&mut space, &cfg);
        let r = resolve(&g, &space, &DetectParams::default(), &cfg).unwrap();
        assert_eq!(r.selection, Selection::Repaired);
        assert!(r.validity.valid);
        let cliques = Partition::from_labels(2021, ids.iter().copied(), ids.iter().map(|id| usize::from(id.starts_with('b'))), Algorithm::Louvain, 4);
        assert!(r.partition.same_grouping(&cliques));
        // A valid partition passes through untouched.
        assert_eq!(repair_partition(&g, &cliques).unwrap(), cliques);
    }

    #[test]
    fn config_validation() {
        let cfg = ExplorationConfig {
            credible_level: 1.0,
            ..Default::default()
        };
        assert!(cfg.check().is_err());
        assert!(ExplorationConfig { t_max: 0, ..Default::default() }.check().is_err());
        assert_eq!(ExplorationConfig::default().jeffreys().prior_alpha, 0.5);
    }
}
