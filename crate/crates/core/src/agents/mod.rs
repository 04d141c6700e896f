//! Channel-selection agents behind one interface: the MID heuristic, tabular
//! Q-learning and the DQN / Double DQN / Dueling DQN networks.

pub mod encoding;
mod tabular;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::{CoexEnv, Observation, ScenarioSampler};
use crate::error::{CoexError, Result};
use crate::mid::assign_all_mid;
use crate::neuralnet::{argmax, checkpoint, Mlp, ReplayBuffer, TrainConfig, TrainingSample, Transition};
use crate::radio::RadioParams;
use crate::topology::{stream_rng, ChannelAssignment, ChannelId, Scenario};

pub use encoding::{discretize, encode_state, EncodingConfig, StateKey};
pub use tabular::{q_update_tabular, train_tabular_discrete, DiscreteEnv, TabularQ};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    Mid,
    Tabular,
    Dqn,
    DoubleDqn,
    DuelingDqn,
}

impl AgentKind {
    pub const ALL: [AgentKind; 5] =
        [AgentKind::Mid, AgentKind::Tabular, AgentKind::Dqn, AgentKind::DoubleDqn, AgentKind::DuelingDqn];
    pub const DEEP: [AgentKind; 3] = [AgentKind::Dqn, AgentKind::DoubleDqn, AgentKind::DuelingDqn];

    pub fn name(self) -> &'static str {
        match self {
            AgentKind::Mid => "mid",
            AgentKind::Tabular => "tabular",
            AgentKind::Dqn => "dqn",
            AgentKind::DoubleDqn => "double_dqn",
            AgentKind::DuelingDqn => "dueling_dqn",
        }
    }

    pub fn is_learning(self) -> bool {
        self != AgentKind::Mid
    }

    pub fn is_deep(self) -> bool {
        AgentKind::DEEP.contains(&self)
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AgentKind {
    type Err = CoexError;

    fn from_str(s: &str) -> Result<Self> {
        AgentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| CoexError::Parse(format!("unknown agent kind '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparams {
    /// Tabular learning rate.
    pub alpha: f64,
    pub gamma: f64,
    pub train_iterations: usize,
    pub train: TrainConfig,
    pub encoding: EncodingConfig,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            gamma: 0.9,
            train_iterations: 20_000,
            train: TrainConfig::default(),
            encoding: EncodingConfig::default(),
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(CoexError::Config(format!("alpha must be in (0, 1], got {}", self.alpha)));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(CoexError::Config(format!("gamma must be in [0, 1], got {}", self.gamma)));
        }
        self.train.validate()?;
        self.encoding.validate()
    }
}

/// Bootstrap target `r + gamma * max_a Q_target(s', a)`.
pub fn dqn_target(r: f64, s_next: &[f64], _online: &Mlp, target_net: &Mlp, gamma: f64, terminal: bool) -> Result<f64> {
    if terminal || gamma == 0.0 {
        return Ok(r);
    }
    let q = target_net.forward(s_next)?;
    Ok(r + gamma * q.iter().copied().fold(f64::NEG_INFINITY, f64::max))
}

/// Double-DQN target: the online net picks `a*`, the target net scores it.
pub fn double_dqn_target(
    r: f64,
    s_next: &[f64],
    online: &Mlp,
    target_net: &Mlp,
    gamma: f64,
    terminal: bool,
) -> Result<f64> {
    if terminal || gamma == 0.0 {
        return Ok(r);
    }
    let best = argmax(&online.forward(s_next)?);
    Ok(r + gamma * target_net.forward(s_next)?[best])
}

/// Epsilon-greedy over a Q vector; greedy ties go to the lowest index.
/// Always draws the explore coin, then the uniform action if exploring.
pub fn select_from_q<R: Rng>(q: &[f64], epsilon: f64, rng: &mut R) -> usize {
    if rng.gen::<f64>() < epsilon {
        rng.gen_range(0..q.len())
    } else {
        argmax(q)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeepAgent {
    pub kind: AgentKind,
    pub online: Mlp,
    pub target: Mlp,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TabularAgent {
    pub q: TabularQ,
    pub encoding: EncodingConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Agent {
    Mid,
    Tabular(TabularAgent),
    Deep(DeepAgent),
}

impl Agent {
    pub fn kind(&self) -> AgentKind {
        match self {
            Agent::Mid => AgentKind::Mid,
            Agent::Tabular(_) => AgentKind::Tabular,
            Agent::Deep(d) => d.kind,
        }
    }

    /// Untrained agent for scenarios with `num_channels` channels.
    pub fn init(kind: AgentKind, num_channels: usize, hp: &Hyperparams, seed: u64) -> Result<Agent> {
        Ok(match kind {
            AgentKind::Mid => Agent::Mid,
            AgentKind::Tabular => {
                Agent::Tabular(TabularAgent { q: TabularQ::new(num_channels), encoding: hp.encoding.clone() })
            }
            deep => {
                let mut rng = stream_rng(seed, STREAM_INIT);
                let online = hp.train.build_network(
                    EncodingConfig::feature_width(num_channels),
                    num_channels,
                    deep == AgentKind::DuelingDqn,
                    &mut rng,
                )?;
                let target = online.clone_to_target();
                Agent::Deep(DeepAgent { kind: deep, online, target })
            }
        })
    }

    /// Q estimate for encoded `features`.
    pub fn q_values(&self, features: &[f64]) -> Result<Vec<f64>> {
        match self {
            Agent::Mid => Err(CoexError::Precondition("MID has no Q-function".into())),
            Agent::Tabular(t) => Ok(t.q.row(&discretize(features, &t.encoding))),
            Agent::Deep(d) => d.online.forward(features),
        }
    }

    pub fn select_action<R: Rng>(&self, features: &[f64], epsilon: f64, rng: &mut R) -> Result<ChannelId> {
        Ok(ChannelId(select_from_q(&self.q_values(features)?, epsilon, rng)))
    }

    /// Complete assignment for `scenario`; learning agents decide greedily in
    /// UE-id order.
    pub fn assign(&self, scenario: &Scenario, params: &RadioParams) -> Result<ChannelAssignment> {
        match self {
            Agent::Mid => Ok(assign_all_mid(scenario)),
            _ => assign_all_learned(self, scenario, params),
        }
    }
}

pub fn assign_all_learned(agent: &Agent, scenario: &Scenario, params: &RadioParams) -> Result<ChannelAssignment> {
    let encoding = match agent {
        Agent::Tabular(t) => t.encoding.clone(),
        _ => EncodingConfig::default(),
    };
    let mut env = CoexEnv::in_id_order(scenario.clone(), params.clone(), encoding);
    while let Observation::State(features) = env.observation()? {
        let q = agent.q_values(&features)?;
        env.step(ChannelId(argmax(&q)))?;
    }
    Ok(env.assignment().clone())
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainingLog {
    /// Summed reward of each finished episode (its final total throughput).
    pub episode_throughput: Vec<f64>,
    pub steps: usize,
    /// Mean minibatch loss per target-refresh window (deep agents only).
    pub window_loss: Vec<f64>,
}

const STREAM_INIT: u64 = 101;
const STREAM_TRAIN: u64 = 102;

/// Train a learning agent for `hp.train_iterations` environment steps.
pub fn train_agent(
    kind: AgentKind,
    sampler: &ScenarioSampler,
    params: &RadioParams,
    hp: &Hyperparams,
    seed: u64,
) -> Result<(Agent, TrainingLog)> {
    if !kind.is_learning() {
        return Err(CoexError::Precondition("MID is not trained".into()));
    }
    hp.validate()?;
    params.validate()?;
    let mut agent = Agent::init(kind, sampler.num_channels(), hp, seed)?;
    let mut log = TrainingLog::default();
    if hp.train_iterations == 0 {
        return Ok((agent, log));
    }
    let mut rng = stream_rng(seed, STREAM_TRAIN);
    let mut buffer = ReplayBuffer::new(hp.train.buffer_capacity)?;
    let (mut env, mut obs) = CoexEnv::reset(sampler, params.clone(), hp.encoding.clone(), &mut rng)?;
    let mut episode_return = 0.0;
    let mut loss_sum = 0.0;
    let mut loss_count = 0usize;

    for step in 0..hp.train_iterations {
        let Observation::State(state) = obs else {
            // empty scenario: the iteration is spent on the reset
            log.episode_throughput.push(0.0);
            (env, obs) = CoexEnv::reset(sampler, params.clone(), hp.encoding.clone(), &mut rng)?;
            continue;
        };
        let epsilon = hp.train.epsilon_at(step, hp.train_iterations);
        let action = agent.select_action(&state, epsilon, &mut rng)?;
        let outcome = env.step(action)?;
        episode_return += outcome.reward;
        log.steps += 1;

        match &mut agent {
            Agent::Tabular(t) => {
                let s = discretize(&state, &t.encoding);
                let next = outcome.next_state.state().map(|n| discretize(n, &t.encoding));
                q_update_tabular(&mut t.q, &s, action.0, outcome.reward, next.as_ref(), hp);
            }
            Agent::Deep(d) => {
                let next_state = match &outcome.next_state {
                    Observation::State(n) => n.clone(),
                    Observation::Terminal => vec![0.0; state.len()],
                };
                buffer.push(Transition {
                    state,
                    action: action.0,
                    reward: outcome.reward,
                    next_state,
                    terminal: outcome.done,
                });
                if buffer.len() >= hp.train.batch_size {
                    let batch = buffer.sample(hp.train.batch_size, &mut rng)?;
                    let mut targets = Vec::with_capacity(batch.len());
                    for t in &batch {
                        let y = match d.kind {
                            AgentKind::DoubleDqn => {
                                double_dqn_target(t.reward, &t.next_state, &d.online, &d.target, hp.gamma, t.terminal)?
                            }
                            _ => dqn_target(t.reward, &t.next_state, &d.online, &d.target, hp.gamma, t.terminal)?,
                        };
                        targets.push(y);
                    }
                    let samples: Vec<TrainingSample> = batch
                        .iter()
                        .zip(&targets)
                        .map(|(t, &y)| TrainingSample { state: &t.state, action: t.action, target: y })
                        .collect();
                    let grads = d.online.backward(&samples)?;
                    loss_sum += d.online.loss(&samples)?;
                    loss_count += 1;
                    d.online.sgd_step(&grads, hp.train.learning_rate)?;
                }
                if (step + 1) % hp.train.target_update_period == 0 {
                    d.target = d.online.clone_to_target();
                    if loss_count > 0 {
                        log.window_loss.push(loss_sum / loss_count as f64);
                    }
                    loss_sum = 0.0;
                    loss_count = 0;
                }
            }
            Agent::Mid => unreachable!(),
        }

        if outcome.done {
            log.episode_throughput.push(episode_return);
            episode_return = 0.0;
            (env, obs) = CoexEnv::reset(sampler, params.clone(), hp.encoding.clone(), &mut rng)?;
        } else {
            obs = outcome.next_state;
        }
    }
    Ok((agent, log))
}

#[derive(Debug, Serialize, Deserialize)]
struct AgentHeader {
    kind: AgentKind,
    num_channels: usize,
    hyperparams: Hyperparams,
}

const AGENT_MAGIC: &str = "coex-agent 1";
const HEADER_END: &str = "---";

/// Text form: magic line, TOML header, `---`, then the body (network
/// checkpoint, or one `key | values` line per Q-table row).
pub fn agent_to_text(agent: &Agent, num_channels: usize, hp: &Hyperparams) -> Result<String> {
    let header = AgentHeader { kind: agent.kind(), num_channels, hyperparams: hp.clone() };
    let header = toml::to_string(&header).map_err(|e| CoexError::Parse(e.to_string()))?;
    let mut out = format!("{AGENT_MAGIC}\n{header}{HEADER_END}\n");
    match agent {
        Agent::Mid => {}
        Agent::Tabular(t) => {
            for (key, row) in t.q.sorted_rows() {
                let k: Vec<String> = key.0.iter().map(u16::to_string).collect();
                let v: Vec<String> = row.iter().map(|x| format!("{x:?}")).collect();
                out.push_str(&format!("{} | {}\n", k.join(" "), v.join(" ")));
            }
        }
        Agent::Deep(d) => out.push_str(&checkpoint::to_text(&d.online)),
    }
    Ok(out)
}

pub fn agent_from_text(text: &str) -> Result<(Agent, usize, Hyperparams)> {
    let rest = text
        .strip_prefix(AGENT_MAGIC)
        .and_then(|r| r.strip_prefix('\n'))
        .ok_or_else(|| CoexError::Parse("not a coex-agent file".into()))?;
    let (header, body) = rest
        .split_once(&format!("{HEADER_END}\n"))
        .ok_or_else(|| CoexError::Parse("missing header terminator".into()))?;
    let header: AgentHeader = toml::from_str(header).map_err(|e| CoexError::Parse(e.to_string()))?;
    let agent = match header.kind {
        AgentKind::Mid => Agent::Mid,
        AgentKind::Tabular => {
            let mut q = TabularQ::new(header.num_channels);
            for line in body.lines() {
                let (k, v) = line.split_once(" | ").ok_or_else(|| CoexError::Parse(format!("bad row '{line}'")))?;
                let key = StateKey(
                    k.split_whitespace()
                        .map(|t| t.parse().map_err(|_| CoexError::Parse(format!("bad key '{k}'"))))
                        .collect::<Result<_>>()?,
                );
                let values: Vec<f64> = v
                    .split_whitespace()
                    .map(|t| t.parse().map_err(|_| CoexError::Parse(format!("bad value '{t}'"))))
                    .collect::<Result<_>>()?;
                if values.len() != header.num_channels {
                    return Err(CoexError::Parse(format!("row has {} values", values.len())));
                }
                for (a, x) in values.into_iter().enumerate() {
                    q.set(&key, a, x);
                }
            }
            Agent::Tabular(TabularAgent { q, encoding: header.hyperparams.encoding.clone() })
        }
        kind => {
            let online = checkpoint::from_text(body)?;
            let target = online.clone_to_target();
            Agent::Deep(DeepAgent { kind, online, target })
        }
    };
    Ok((agent, header.num_channels, header.hyperparams))
}
