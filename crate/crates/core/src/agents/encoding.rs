//! State features for the learning agents and their tabular discretization.
//!
//! Features are `[x / mbs_radius, y / mbs_radius]` followed, per channel, by
//! `log10(1 + I / noise)` where `I` is the interference the UE would see on
//! that channel under the current partial assignment.

use serde::{Deserialize, Serialize};

use crate::error::{CoexError, Result};
use crate::radio::{interference_by_channel, RadioParams};
use crate::topology::{ChannelAssignment, Scenario};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EncodingConfig {
    /// Coordinate cells per axis for the Q-table.
    pub grid_cells: usize,
    /// Ascending upper edges on the log-interference feature; `n` edges make
    /// `n + 1` buckets.
    pub interference_bucket_edges: Vec<f64>,
}

impl Default for EncodingConfig {
    fn default() -> Self {
        Self { grid_cells: 8, interference_bucket_edges: vec![0.5, 2.0, 3.5] }
    }
}

impl EncodingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_cells == 0 {
            return Err(CoexError::Config("grid_cells must be at least 1".into()));
        }
        if self.interference_bucket_edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CoexError::Config("interference_bucket_edges must be strictly ascending".into()));
        }
        Ok(())
    }

    pub fn feature_width(num_channels: usize) -> usize {
        2 + num_channels
    }
}

pub fn encode_state(
    scenario: &Scenario,
    partial: &ChannelAssignment,
    ue_id: usize,
    params: &RadioParams,
    _encoding: &EncodingConfig,
) -> Result<Vec<f64>> {
    let ue = scenario.ue(ue_id)?;
    let r = scenario.config.mbs_radius;
    let mut features = Vec::with_capacity(2 + scenario.num_channels());
    features.push(ue.position.x / r);
    features.push(ue.position.y / r);
    for b in interference_by_channel(scenario, partial, ue_id, params)? {
        features.push((1.0 + b.total() / params.noise).log10());
    }
    Ok(features)
}

/// Discrete Q-table key.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateKey(pub Vec<u16>);

/// Quantize encoded features: two grid cells, then one bucket per channel.
pub fn discretize(features: &[f64], encoding: &EncodingConfig) -> StateKey {
    let cells = encoding.grid_cells;
    let cell = |v: f64| {
        let t = ((v + 1.0) / 2.0 * cells as f64).floor();
        t.clamp(0.0, (cells - 1) as f64) as u16
    };
    let bucket = |v: f64| encoding.interference_bucket_edges.iter().take_while(|&&e| v >= e).count() as u16;
    let mut key = Vec::with_capacity(features.len());
    if let [x, y, rest @ ..] = features {
        key.push(cell(*x));
        key.push(cell(*y));
        key.extend(rest.iter().map(|&v| bucket(v)));
    }
    StateKey(key)
}
