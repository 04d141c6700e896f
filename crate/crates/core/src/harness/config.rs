//! TOML experiment file.
//!
//! ```toml
//! [scenario]            # ScenarioConfig fields
//! [radio]               # RadioParams fields
//! [hyperparams]         # alpha, gamma, train_iterations
//! [hyperparams.train]   # network / replay / exploration settings
//! [hyperparams.encoding]
//! [experiment]
//! agents = ["mid", "tabular", "dqn", "double_dqn", "dueling_dqn"]
//! num_eval_scenarios = 20
//! seeds = [1, 2, 3, 4, 5]
//! record_wall_time = true
//! [[experiment.sweeps]]
//! variable = "laa_ue"
//! values = [5, 10, 15, 20, 25, 30]
//! ```
//!
//! Every section and field is optional; missing ones take the defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ExperimentSpec, SweepVariable};
use crate::agents::{AgentKind, Hyperparams};
use crate::error::{CoexError, Result};
use crate::radio::RadioParams;
use crate::topology::ScenarioConfig;

pub const QUICK_TRAIN_ITERATIONS: usize = 2_000;
pub const QUICK_SEEDS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub variable: SweepVariable,
    pub values: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub agents: Vec<AgentKind>,
    pub num_eval_scenarios: usize,
    pub seeds: Vec<u64>,
    pub record_wall_time: bool,
    pub sweeps: Vec<SweepSection>,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            agents: AgentKind::ALL.to_vec(),
            num_eval_scenarios: 20,
            seeds: vec![1, 2, 3, 4, 5],
            record_wall_time: true,
            sweeps: vec![
                SweepSection { variable: SweepVariable::LaaUe, values: vec![5, 10, 15, 20, 25, 30] },
                SweepSection { variable: SweepVariable::WifiAp, values: vec![2, 4, 6, 8, 10, 12] },
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    /// Fixed counts: 6 Wi-Fi APs during the UE sweep and 15 LAA UEs during the
    /// AP sweep with the defaults.
    pub scenario: ScenarioConfig,
    pub radio: RadioParams,
    pub hyperparams: Hyperparams,
    pub experiment: ExperimentSection,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CoexError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| CoexError::Config(e.to_string()))
    }

    /// Reduced training budget and seed count for desk-scale runs.
    pub fn quick(mut self) -> Self {
        self.hyperparams.train_iterations = QUICK_TRAIN_ITERATIONS;
        self.experiment.seeds.truncate(QUICK_SEEDS);
        self
    }

    /// Replace the seed list with a comma-separated override such as the
    /// contents of `COEX_SEED`.
    pub fn override_seeds(&mut self, list: &str) -> Result<()> {
        let seeds = list
            .split(',')
            .map(|s| s.trim().parse::<u64>().map_err(|_| CoexError::Config(format!("bad seed '{s}'"))))
            .collect::<Result<Vec<_>>>()?;
        if seeds.is_empty() {
            return Err(CoexError::Config("seed override is empty".into()));
        }
        self.experiment.seeds = seeds;
        Ok(())
    }

    pub fn specs(&self) -> Vec<ExperimentSpec> {
        self.experiment
            .sweeps
            .iter()
            .map(|sweep| ExperimentSpec {
                sweep_variable: sweep.variable,
                sweep_values: sweep.values.clone(),
                scenario: self.scenario.clone(),
                radio: self.radio.clone(),
                agents: self.experiment.agents.clone(),
                hyperparams: self.hyperparams.clone(),
                num_eval_scenarios: self.experiment.num_eval_scenarios,
                seeds: self.experiment.seeds.clone(),
                record_wall_time: self.experiment.record_wall_time,
            })
            .collect()
    }
}
