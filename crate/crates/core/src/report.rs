//! Solution-space reports and their CSV companions.

use serde::{Deserialize, Serialize};

use crate::bayes::{solution_estimates, BetaBinomialModel, SolutionEstimate};
use crate::error::{Error, Result};
use crate::explorer::{Exploration, ExplorationConfig, StopReason};
use crate::graph::Graph;
use crate::partition::{community_sizes, ValidityReport};
use crate::taxonomy::{classify, Category};

pub const REPORT_SCHEMA: &str = "solspace/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub n_v: usize,
    pub n_e: usize,
    pub total_weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRow {
    /// 1-based, by count descending then first trial ascending.
    pub rank: usize,
    /// Index in discovery order, as used by `trial_log`.
    pub solution_id: usize,
    pub count: u64,
    pub first_trial: u64,
    pub p_point: f64,
    pub p_lower: f64,
    pub p_upper: f64,
    pub valid: bool,
    pub k: usize,
    pub sizes: Vec<usize>,
    pub digest: String,
    pub validity: ValidityReport,
}

impl SolutionRow {
    fn estimate(&self) -> SolutionEstimate {
        SolutionEstimate {
            count: self.count,
            p_point: self.p_point,
            p_lower: self.p_lower,
            p_upper: self.p_upper,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionSpaceReport {
    pub schema: String,
    pub category: Category,
    pub t: u64,
    pub ns: usize,
    pub ns_valid: usize,
    /// Diagnostic only; does not gate the category.
    pub ns_over_t: f64,
    pub stop_reason: StopReason,
    pub error: Option<String>,
    pub p_stable: Option<f64>,
    pub graph: GraphSummary,
    pub solutions: Vec<SolutionRow>,
    pub trial_log: Vec<usize>,
    pub p_stable_trace: Vec<f64>,
    pub config: ExplorationConfig,
}

/// Rows of `x`, ranked, with estimates over all `t` trials. Empty when no
/// trial completed.
fn rows(x: &Exploration) -> Result<Vec<SolutionRow>> {
    let t = x.space.t();
    if t == 0 {
        return Ok(Vec::new());
    }
    let counts: Vec<u64> = x.space.records.iter().map(|r| r.count).collect();
    let estimates = solution_estimates(&counts, t, x.config.thresholds.level)?;
    let mut rows: Vec<SolutionRow> = x
        .space
        .records
        .iter()
        .zip(estimates)
        .enumerate()
        .map(|(id, (r, e))| SolutionRow {
            rank: 0,
            solution_id: id,
            count: r.count,
            first_trial: r.first_trial,
            p_point: e.p_point,
            p_lower: e.p_lower,
            p_upper: e.p_upper,
            valid: r.validity.valid,
            k: r.partition.community_count(),
            sizes: community_sizes(&r.partition),
            digest: format!("{:016x}", r.partition.digest()),
            validity: r.validity.clone(),
        })
        .collect();
    rows.sort_by(|a, b| {
        b.count
            .cmp(&a.count)
            .then(a.first_trial.cmp(&b.first_trial))
    });
    for (i, r) in rows.iter_mut().enumerate() {
        r.rank = i + 1;
    }
    Ok(rows)
}

fn classify_rows(rows: &[SolutionRow], x: &ExplorationConfig) -> Result<Category> {
    let valid: Vec<SolutionEstimate> = rows
        .iter()
        .filter(|r| r.valid)
        .map(SolutionRow::estimate)
        .collect();
    classify(valid.len(), &valid, &x.thresholds)
}

impl SolutionSpaceReport {
    pub fn new(g: &Graph, x: &Exploration) -> Result<Self> {
        let solutions = rows(x)?;
        let category = classify_rows(&solutions, &x.config)?;
        let t = x.space.t();
        Ok(Self {
            schema: REPORT_SCHEMA.to_string(),
            category,
            t,
            ns: x.space.ns(),
            ns_valid: x.space.ns_valid(),
            ns_over_t: if t == 0 {
                0.0
            } else {
                x.space.ns() as f64 / t as f64
            },
            stop_reason: x.stop_reason,
            error: x.error.clone(),
            p_stable: x.trace.last().copied(),
            graph: GraphSummary {
                n_v: g.node_count(),
                n_e: g.edge_count(),
                total_weight: g.total_weight(),
            },
            solutions,
            trial_log: x.space.trial_log.clone(),
            p_stable_trace: x.trace.clone(),
            config: x.config.clone(),
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: Self = serde_json::from_str(text)?;
        if r.schema != REPORT_SCHEMA {
            return Err(Error::Inconsistent(format!(
                "unsupported report schema {:?}",
                r.schema
            )));
        }
        r.check()?;
        Ok(r)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// Verifies row order, counts against the trial log, the trace length
    /// and that the category follows from the rows.
    pub fn check(&self) -> Result<()> {
        if self.trial_log.len() as u64 != self.t || self.p_stable_trace.len() as u64 != self.t {
            return Err(Error::Inconsistent(
                "trial log or trace length differs from t".into(),
            ));
        }
        if self.solutions.len() != self.ns && self.t > 0 {
            return Err(Error::Inconsistent("row count differs from ns".into()));
        }
        let mut counts = vec![0u64; self.ns];
        for &s in &self.trial_log {
            *counts.get_mut(s).ok_or_else(|| {
                Error::Inconsistent(format!("trial log refers to solution {s}"))
            })? += 1;
        }
        for w in self.solutions.windows(2) {
            let ordered = w[0].count > w[1].count
                || (w[0].count == w[1].count && w[0].first_trial < w[1].first_trial);
            if !ordered {
                return Err(Error::Inconsistent("solution rows are not ranked".into()));
            }
        }
        for r in &self.solutions {
            if counts.get(r.solution_id) != Some(&r.count) {
                return Err(Error::Inconsistent(format!(
                    "solution {} count disagrees with the trial log",
                    r.solution_id
                )));
            }
        }
        if classify_rows(&self.solutions, &self.config)? != self.category {
            return Err(Error::Inconsistent(
                "category does not follow from the rows".into(),
            ));
        }
        Ok(())
    }

    /// Replays the model over the trial log; the `p_stable` trace of the
    /// report must equal this.
    pub fn replay_trace(&self) -> Vec<f64> {
        let mut model = BetaBinomialModel::default();
        let mut discovered = 0;
        self.trial_log
            .iter()
            .map(|&s| {
                let new = s == discovered;
                if new {
                    discovered += 1;
                }
                model = model.update(new);
                model.p_stable(self.config.p_stable_variant)
            })
            .collect()
    }
}

/// One membership column per solution (by rank), rows in label order.
pub fn solutions_csv(g: &Graph, x: &Exploration, report: &SolutionSpaceReport) -> String {
    let mut out = String::from("node_label");
    for r in &report.solutions {
        out.push_str(&format!(",solution_{}", r.rank));
    }
    out.push('\n');
    let mut nodes: Vec<usize> = (0..g.node_count()).collect();
    nodes.sort_by(|&a, &b| g.label(a).cmp(g.label(b)));
    for v in nodes {
        out.push_str(g.label(v));
        for r in &report.solutions {
            let p = &x.space.records[r.solution_id].partition;
            out.push_str(&format!(",{}", p.assignment()[v]));
        }
        out.push('\n');
    }
    out
}

/// `t,ns,p_stable` after every trial.
pub fn trace_csv(report: &SolutionSpaceReport) -> String {
    let mut out = String::from("t,ns,p_stable\n");
    let mut ns = 0;
    for (i, (&s, p)) in report
        .trial_log
        .iter()
        .zip(&report.p_stable_trace)
        .enumerate()
    {
        if s == ns {
            ns += 1;
        }
        out.push_str(&format!("{},{},{}\n", i + 1, ns, p));
    }
    out
}
