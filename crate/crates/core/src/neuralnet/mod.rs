//! From-scratch fully connected Q-network: forward pass with an optional
//! dueling head, squared-error backpropagation, plain SGD, replay buffer and
//! text checkpoints.

pub mod checkpoint;
mod mlp;
mod replay;

use serde::{Deserialize, Serialize};

pub use mlp::{
    argmax, combine_dueling, Activation, Dense, DenseGrad, DuelingHead, Gradients, LayerSpec, Mlp, TrainingSample,
};
pub use replay::{ReplayBuffer, Transition};

use crate::error::{CoexError, Result};

/// Network training knobs shared by the deep agents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    /// SGD step size. Independent of the tabular `alpha`; at 0.05 the ReLU
    /// network tends to die and collapse onto a single channel.
    pub learning_rate: f64,
    pub batch_size: usize,
    pub target_update_period: usize,
    pub buffer_capacity: usize,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Linear decay length; `None` means half of the training run.
    pub epsilon_decay_steps: Option<usize>,
    /// Strictly decreasing hidden widths.
    pub hidden_widths: Vec<usize>,
    /// The dueling streams branch after this many hidden layers.
    pub dueling_split: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.001,
            batch_size: 32,
            target_update_period: 200,
            buffer_capacity: 10_000,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            epsilon_decay_steps: None,
            hidden_widths: vec![128, 64, 32, 16],
            dueling_split: 3,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(CoexError::Config("learning_rate must be positive".into()));
        }
        if self.batch_size == 0 || self.buffer_capacity < self.batch_size {
            return Err(CoexError::Config("need 1 <= batch_size <= buffer_capacity".into()));
        }
        if self.target_update_period == 0 {
            return Err(CoexError::Config("target_update_period must be at least 1".into()));
        }
        if !(0.0 <= self.epsilon_end && self.epsilon_end <= self.epsilon_start && self.epsilon_start <= 1.0) {
            return Err(CoexError::Config("need 0 <= epsilon_end <= epsilon_start <= 1".into()));
        }
        if self.hidden_widths.is_empty() || self.hidden_widths.contains(&0) {
            return Err(CoexError::Config("hidden_widths must be nonempty and positive".into()));
        }
        if self.dueling_split == 0 || self.dueling_split >= self.hidden_widths.len() {
            return Err(CoexError::Config(format!("dueling_split must be in 1..{}", self.hidden_widths.len())));
        }
        Ok(())
    }

    /// Exploration rate after `step` of `total_steps`.
    pub fn epsilon_at(&self, step: usize, total_steps: usize) -> f64 {
        let decay = self.epsilon_decay_steps.unwrap_or(total_steps / 2);
        if decay == 0 || step >= decay {
            return self.epsilon_end;
        }
        let frac = step as f64 / decay as f64;
        self.epsilon_start + (self.epsilon_end - self.epsilon_start) * frac
    }

    /// Build a fresh Q-network for `input` features and `actions` outputs.
    pub fn build_network<R: rand::Rng>(&self, input: usize, actions: usize, dueling: bool, rng: &mut R) -> Result<Mlp> {
        let mut trunk = vec![input];
        if dueling {
            trunk.extend_from_slice(&self.hidden_widths[..self.dueling_split]);
            let rest = &self.hidden_widths[self.dueling_split..];
            let value: Vec<usize> = rest.iter().copied().chain([1]).collect();
            let advantage: Vec<usize> = rest.iter().copied().chain([actions]).collect();
            Mlp::dueling(&trunk, &value, &advantage, rng)
        } else {
            trunk.extend_from_slice(&self.hidden_widths);
            trunk.push(actions);
            Mlp::plain(&trunk, rng)
        }
    }
}
