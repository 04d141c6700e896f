//! Throughput sweeps over LAA UE or Wi-Fi AP counts.
//!
//! Each `(sweep value, agent, seed)` cell trains the agent on random
//! scenarios (learning agents only) and then scores it on
//! `num_eval_scenarios` fresh scenarios shared by every agent of that cell.

mod config;
mod output;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agents::{train_agent, Agent, AgentKind, Hyperparams};
use crate::env::ScenarioSampler;
use crate::error::{CoexError, Result};
use crate::radio::{total_throughput, RadioParams};
use crate::topology::{generate_scenario, ScenarioConfig};

pub use config::{ConfigFile, ExperimentSection, SweepSection, QUICK_SEEDS, QUICK_TRAIN_ITERATIONS};
pub use output::{emit_csv, emit_plot_script, parse_csv, plot_script, to_csv, CSV_HEADER};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    LaaUe,
    WifiAp,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::LaaUe => "laa_ue",
            SweepVariable::WifiAp => "wifi_ap",
        }
    }

    pub fn apply(self, base: &ScenarioConfig, value: usize) -> ScenarioConfig {
        let mut cfg = base.clone();
        match self {
            SweepVariable::LaaUe => cfg.num_laa_ue = value,
            SweepVariable::WifiAp => cfg.num_wifi_ap = value,
        }
        cfg
    }
}

impl std::str::FromStr for SweepVariable {
    type Err = CoexError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "laa_ue" => Ok(SweepVariable::LaaUe),
            "wifi_ap" => Ok(SweepVariable::WifiAp),
            _ => Err(CoexError::Parse(format!("unknown sweep variable '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub sweep_variable: SweepVariable,
    pub sweep_values: Vec<usize>,
    /// Everything but the swept count; its seed field is ignored.
    pub scenario: ScenarioConfig,
    pub radio: RadioParams,
    pub agents: Vec<AgentKind>,
    pub hyperparams: Hyperparams,
    pub num_eval_scenarios: usize,
    pub seeds: Vec<u64>,
    /// Measure wall time per cell; when off the column is written as 0 so the
    /// CSV is a pure function of the spec.
    pub record_wall_time: bool,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.sweep_values.is_empty() {
            return Err(CoexError::Config("sweep_values must not be empty".into()));
        }
        if self.sweep_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CoexError::Config("sweep_values must be strictly ascending".into()));
        }
        if self.agents.is_empty() {
            return Err(CoexError::Config("at least one agent kind is required".into()));
        }
        if self.seeds.is_empty() {
            return Err(CoexError::Config("at least one seed is required".into()));
        }
        if self.num_eval_scenarios == 0 {
            return Err(CoexError::Config("num_eval_scenarios must be at least 1".into()));
        }
        for &v in &self.sweep_values {
            let cfg = self.sweep_variable.apply(&self.scenario, v);
            cfg.validate()?;
            if cfg.num_laa_ue == 0 {
                return Err(CoexError::Config("experiments need at least one LAA UE".into()));
            }
        }
        self.radio.validate()?;
        if self.agents.iter().any(|k| k.is_learning()) {
            self.hyperparams.validate()?;
        }
        Ok(())
    }

    /// Scenario config of the `index`-th evaluation scenario of a cell.
    pub fn eval_config(&self, value: usize, seed: u64, index: usize) -> ScenarioConfig {
        let base = self.sweep_variable.apply(&self.scenario, value);
        base.with_seed(mix(&[EVAL_TAG, seed, value as u64, index as u64]))
    }

    pub fn train_seed(&self, value: usize, kind: AgentKind, seed: u64) -> u64 {
        mix(&[TRAIN_TAG, seed, value as u64, kind as u64])
    }
}

const EVAL_TAG: u64 = 0x6576_616c;
const TRAIN_TAG: u64 = 0x7472_6169;

/// Order-sensitive 64-bit mix of several words.
pub fn mix(words: &[u64]) -> u64 {
    let mut h = 0x243f_6a88_85a3_08d3u64;
    for &w in words {
        h ^= w;
        h = h.wrapping_add(0x9e37_79b9_7f4a_7c15);
        h = (h ^ (h >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        h = (h ^ (h >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        h ^= h >> 31;
    }
    h
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub sweep_value: usize,
    pub agent: AgentKind,
    pub seed: u64,
    pub mean_throughput: f64,
    pub std_throughput: f64,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub sweep_variable: SweepVariable,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// Mean over seeds of `mean_throughput` for one agent at one sweep value.
    pub fn seed_mean(&self, value: usize, agent: AgentKind) -> Option<f64> {
        let xs: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.sweep_value == value && r.agent == agent)
            .map(|r| r.mean_throughput)
            .collect();
        (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
    }

    pub fn row(&self, value: usize, agent: AgentKind, seed: u64) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.sweep_value == value && r.agent == agent && r.seed == seed)
    }
}

/// Sample mean and standard deviation (n - 1 denominator, 0 for one sample).
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn run_cell(spec: &ExperimentSpec, value: usize, kind: AgentKind, seed: u64) -> Result<SweepRow> {
    let start = Instant::now();
    let agent = if kind.is_learning() {
        let sampler = ScenarioSampler::Random(spec.sweep_variable.apply(&spec.scenario, value));
        let (agent, _) =
            train_agent(kind, &sampler, &spec.radio, &spec.hyperparams, spec.train_seed(value, kind, seed))?;
        agent
    } else {
        Agent::Mid
    };
    let mut totals = Vec::with_capacity(spec.num_eval_scenarios);
    let mut assign_time = 0.0;
    for i in 0..spec.num_eval_scenarios {
        let scenario = generate_scenario(&spec.eval_config(value, seed, i))?;
        let t0 = Instant::now();
        let assignment = agent.assign(&scenario, &spec.radio)?;
        assign_time += t0.elapsed().as_secs_f64();
        totals.push(total_throughput(&scenario, &assignment, &spec.radio)?.total);
    }
    let (mean, std) = mean_std(&totals);
    let wall_time_s = match (spec.record_wall_time, kind) {
        (false, _) => 0.0,
        // MID's column times the assignment alone so it tracks its complexity
        (true, AgentKind::Mid) => assign_time,
        (true, _) => start.elapsed().as_secs_f64(),
    };
    Ok(SweepRow { sweep_value: value, agent: kind, seed, mean_throughput: mean, std_throughput: std, wall_time_s })
}

/// Run every cell (in parallel) and return rows ordered by sweep value, then
/// agent, then seed, each in the order the experiment lists them.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<SweepResult> {
    spec.validate()?;
    let cells: Vec<(usize, AgentKind, u64)> = spec
        .sweep_values
        .iter()
        .flat_map(|&v| spec.agents.iter().flat_map(move |&k| spec.seeds.iter().map(move |&s| (v, k, s))))
        .collect();
    let rows = cells.par_iter().map(|&(v, k, s)| run_cell(spec, v, k, s)).collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { sweep_variable: spec.sweep_variable, rows })
}
