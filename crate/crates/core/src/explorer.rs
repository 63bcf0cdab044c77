//! The shuffle, detect, dedupe, update loop with its stopping rule.
//!
//! Trial `i` (1-based) uses the seed `master_seed.split(i)` both to shuffle
//! the graph and to seed the detector, so any trial can be recomputed in
//! isolation. Trials may run concurrently, but their outcomes are folded
//! into the solution space and model strictly in trial order; the stopping
//! trial therefore does not depend on `parallelism`.

use std::collections::HashMap;
use std::thread;

use serde::{Deserialize, Serialize};

use crate::bayes::{BetaBinomialModel, PStableVariant};
use crate::detection::{detect, DetectorSpec};
use crate::error::{Error, Result};
use crate::graph::{Graph, Seed};
use crate::partition::{
    canonicalize, fnv1a_bytes, validate, CanonicalPartition, ValidityOptions, ValidityReport,
};
use crate::taxonomy::TaxonomyThresholds;

pub const CHECKPOINT_FORMAT: &str = "solspace-checkpoint/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplorationConfig {
    pub t_max: u64,
    pub tau: f64,
    pub t_min: u64,
    pub master_seed: Seed,
    pub detector: DetectorSpec,
    pub p_stable_variant: PStableVariant,
    pub thresholds: TaxonomyThresholds,
    #[serde(default)]
    pub validity: ValidityOptions,
    pub parallelism: usize,
}

impl Default for ExplorationConfig {
    fn default() -> Self {
        Self {
            t_max: 1000,
            tau: 0.95,
            t_min: 10,
            master_seed: Seed(0),
            detector: DetectorSpec::louvain(1.0),
            p_stable_variant: PStableVariant::Corrected,
            thresholds: TaxonomyThresholds::default(),
            validity: ValidityOptions::default(),
            parallelism: 1,
        }
    }
}

impl ExplorationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.t_max == 0 {
            return Err(Error::InvalidParameter("t_max must be positive".into()));
        }
        if self.t_min > self.t_max {
            return Err(Error::InvalidParameter(format!(
                "t_min ({}) exceeds t_max ({})",
                self.t_min, self.t_max
            )));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "tau must lie in (0, 1), got {}",
                self.tau
            )));
        }
        if self.parallelism == 0 {
            return Err(Error::InvalidParameter(
                "parallelism must be positive".into(),
            ));
        }
        self.thresholds.validate()?;
        self.detector.validate()
    }

    /// Hash of every setting that influences trial outcomes or the stop
    /// decision, except `t_max` (which `resume` may raise) and
    /// `parallelism` (which never changes results).
    pub fn fingerprint(&self) -> u64 {
        let mut pinned = self.clone();
        pinned.t_max = 0;
        pinned.parallelism = 0;
        let bytes = serde_json::to_vec(&pinned).expect("config serializes");
        fnv1a_bytes(&bytes)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub partition: CanonicalPartition,
    pub count: u64,
    /// 1-based index of the trial that first produced this partition.
    pub first_trial: u64,
    pub validity: ValidityReport,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolutionSpace {
    /// Unique partitions in discovery order.
    pub records: Vec<SolutionRecord>,
    /// Record index produced by each trial, in trial order.
    pub trial_log: Vec<usize>,
}

impl SolutionSpace {
    /// Builds a space from a trial log over pre-made records; counts and
    /// first-trial indices are derived from the log.
    pub fn from_trial_log(
        partitions: Vec<(CanonicalPartition, ValidityReport)>,
        trial_log: Vec<usize>,
    ) -> Result<Self> {
        let mut records: Vec<SolutionRecord> = partitions
            .into_iter()
            .map(|(partition, validity)| SolutionRecord {
                partition,
                count: 0,
                first_trial: 0,
                validity,
            })
            .collect();
        for (i, &r) in trial_log.iter().enumerate() {
            let rec = records.get_mut(r).ok_or_else(|| {
                Error::Inconsistent(format!("trial {} refers to record {r}", i + 1))
            })?;
            if rec.count == 0 {
                rec.first_trial = i as u64 + 1;
            }
            rec.count += 1;
        }
        let space = Self { records, trial_log };
        space.check()?;
        Ok(space)
    }

    pub fn t(&self) -> u64 {
        self.trial_log.len() as u64
    }

    pub fn ns(&self) -> usize {
        self.records.len()
    }

    pub fn ns_valid(&self) -> usize {
        self.records.iter().filter(|r| r.validity.valid).count()
    }

    /// Verifies counts, first-trial indices and discovery order against
    /// the trial log.
    pub fn check(&self) -> Result<()> {
        let mut counts = vec![0u64; self.records.len()];
        let mut discovered = 0;
        for (i, &r) in self.trial_log.iter().enumerate() {
            if r >= self.records.len() {
                return Err(Error::Inconsistent(format!(
                    "trial {} refers to record {r}",
                    i + 1
                )));
            }
            if counts[r] == 0 {
                if r != discovered || self.records[r].first_trial != i as u64 + 1 {
                    return Err(Error::Inconsistent(format!(
                        "record {r} is out of discovery order"
                    )));
                }
                discovered += 1;
            }
            counts[r] += 1;
        }
        for (r, rec) in self.records.iter().enumerate() {
            if rec.count != counts[r] || rec.count == 0 {
                return Err(Error::Inconsistent(format!(
                    "record {r} has count {} but appears {} times in the trial log",
                    rec.count, counts[r]
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Tau,
    TMax,
    Error,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::Tau => "tau",
            StopReason::TMax => "t_max",
            StopReason::Error => "error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exploration {
    pub config: ExplorationConfig,
    pub space: SolutionSpace,
    pub model: BetaBinomialModel,
    /// `p_stable` after each trial.
    pub trace: Vec<f64>,
    pub stop_reason: StopReason,
    /// Detector failure that aborted the run, if any.
    pub error: Option<String>,
}

impl Exploration {
    pub fn check(&self) -> Result<()> {
        self.space.check()?;
        if self.model.t != self.space.t() || self.model.ns != self.space.ns() as u64 {
            return Err(Error::Inconsistent(format!(
                "model (t={}, ns={}) disagrees with solution space (t={}, ns={})",
                self.model.t,
                self.model.ns,
                self.space.t(),
                self.space.ns()
            )));
        }
        if self.trace.len() as u64 != self.space.t() {
            return Err(Error::Inconsistent("trace length differs from t".into()));
        }
        Ok(())
    }

    /// Versioned JSON checkpoint accepted by [`Exploration::from_checkpoint`].
    pub fn to_checkpoint(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Checkpoint<'a> {
            format: &'static str,
            config_hash: String,
            exploration: &'a Exploration,
        }
        Ok(serde_json::to_string_pretty(&Checkpoint {
            format: CHECKPOINT_FORMAT,
            config_hash: format!("{:016x}", self.config.fingerprint()),
            exploration: self,
        })?)
    }

    pub fn from_checkpoint(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Checkpoint {
            format: String,
            config_hash: String,
            exploration: Exploration,
        }
        let c: Checkpoint = serde_json::from_str(text)?;
        if c.format != CHECKPOINT_FORMAT {
            return Err(Error::Inconsistent(format!(
                "unsupported checkpoint format {:?}",
                c.format
            )));
        }
        if c.config_hash != format!("{:016x}", c.exploration.config.fingerprint()) {
            return Err(Error::Inconsistent(
                "checkpoint config hash mismatch".into(),
            ));
        }
        c.exploration.check()?;
        Ok(c.exploration)
    }
}

struct TrialOutcome {
    partition: CanonicalPartition,
}

fn run_trial(g: &Graph, config: &ExplorationConfig, trial: u64) -> Result<TrialOutcome> {
    let seed = config.master_seed.split(trial);
    let shuffled = g.shuffle(seed);
    let membership = detect(&shuffled, &config.detector.clone().with_seed(seed))?;
    if membership.len() != g.node_count() {
        return Err(Error::Detector(format!(
            "detector returned {} assignments for {} nodes",
            membership.len(),
            g.node_count()
        )));
    }
    Ok(TrialOutcome {
        partition: canonicalize(&membership),
    })
}

fn run_batch(
    g: &Graph,
    config: &ExplorationConfig,
    trials: std::ops::RangeInclusive<u64>,
) -> Vec<Result<TrialOutcome>> {
    if config.parallelism == 1 || trials.start() == trials.end() {
        return trials.map(|i| run_trial(g, config, i)).collect();
    }
    thread::scope(|scope| {
        let handles: Vec<_> = trials
            .map(|i| scope.spawn(move || run_trial(g, config, i)))
            .collect();
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .unwrap_or_else(|_| Err(Error::Detector("trial panicked".into())))
            })
            .collect()
    })
}

/// Continues `state` until the stopping rule fires, `t_max` is reached, or
/// a detector fails.
fn advance(g: &Graph, mut state: Exploration) -> Result<Exploration> {
    let config = state.config.clone();
    let mut seen: HashMap<CanonicalPartition, usize> = state
        .space
        .records
        .iter()
        .enumerate()
        .map(|(i, r)| (r.partition.clone(), i))
        .collect();

    'outer: while state.model.t < config.t_max {
        let first = state.model.t + 1;
        let last = (first + config.parallelism as u64 - 1).min(config.t_max);
        for (trial, outcome) in (first..=last).zip(run_batch(g, &config, first..=last)) {
            let outcome = match outcome {
                Ok(o) => o,
                Err(e) => {
                    state.stop_reason = StopReason::Error;
                    state.error = Some(e.to_string());
                    break 'outer;
                }
            };
            let is_new = !seen.contains_key(&outcome.partition);
            let index = if is_new {
                let validity = validate(g, &outcome.partition, config.validity)?;
                let index = state.space.records.len();
                seen.insert(outcome.partition.clone(), index);
                state.space.records.push(SolutionRecord {
                    partition: outcome.partition,
                    count: 0,
                    first_trial: trial,
                    validity,
                });
                index
            } else {
                seen[&outcome.partition]
            };
            state.space.records[index].count += 1;
            state.space.trial_log.push(index);
            state.model = state.model.update(is_new);
            debug_assert_eq!(
                state.space.records.iter().map(|r| r.count).sum::<u64>(),
                state.model.t
            );
            debug_assert_eq!(state.model.ns, state.space.ns() as u64);

            let p = state.model.p_stable(config.p_stable_variant);
            state.trace.push(p);
            if state.model.t >= config.t_min && p > config.tau {
                state.stop_reason = StopReason::Tau;
                break 'outer;
            }
            if state.model.t == config.t_max {
                state.stop_reason = StopReason::TMax;
                break 'outer;
            }
        }
    }
    Ok(state)
}

/// Explores the solution space of `config.detector` on `g`.
///
/// Configuration errors are returned as `Err`. A failing detector stops the
/// run with [`StopReason::Error`] and keeps every completed trial.
pub fn explore(g: &Graph, config: &ExplorationConfig) -> Result<Exploration> {
    config.validate()?;
    let state = Exploration {
        config: config.clone(),
        space: SolutionSpace::default(),
        model: BetaBinomialModel::default(),
        trace: Vec::new(),
        stop_reason: StopReason::TMax,
        error: None,
    };
    advance(g, state)
}

/// Extends a previous exploration up to `config.t_max`, numbering trials
/// from `t + 1`. The result equals a single run with the new config.
pub fn resume(previous: Exploration, g: &Graph, config: &ExplorationConfig) -> Result<Exploration> {
    config.validate()?;
    previous.check()?;
    if config.master_seed != previous.config.master_seed {
        return Err(Error::Inconsistent(format!(
            "master seed {} differs from the original {}",
            config.master_seed.0, previous.config.master_seed.0
        )));
    }
    if config.fingerprint() != previous.config.fingerprint() {
        return Err(Error::Inconsistent(
            "configuration differs from the original run".into(),
        ));
    }
    if let Some(r) = previous.space.records.first() {
        if r.partition.node_count() != g.node_count() {
            return Err(Error::Inconsistent(
                "graph differs from the original run".into(),
            ));
        }
    }
    if previous.stop_reason == StopReason::Tau {
        return Ok(previous);
    }
    if config.t_max < previous.model.t {
        return Err(Error::InvalidParameter(format!(
            "t_max {} is below the {} trials already run",
            config.t_max, previous.model.t
        )));
    }
    let mut state = previous;
    state.config = config.clone();
    state.error = None;
    state.stop_reason = StopReason::TMax;
    if state.model.t == config.t_max {
        return Ok(state);
    }
    advance(g, state)
}
