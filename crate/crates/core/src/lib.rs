//! Desk-scale simulator of LTE-LAA / Wi-Fi coexistence on unlicensed channels.
//!
//! A macro cell hosts small cells whose coverage contains LAA user equipment,
//! Wi-Fi access points and Wi-Fi clients. Each LAA UE must be given one of the
//! unlicensed channels; the quality of a complete assignment is the summed
//! normalized throughput of the LAA UEs. Strategies compared:
//!
//! * [`mid`]: minimum-interference-distance heuristic (idle channel first,
//!   otherwise maximise the distance to the nearest co-channel interferer).
//! * [`agents`]: tabular Q-learning, DQN, Double DQN and Dueling DQN, built on
//!   the from-scratch network in [`neuralnet`] and the MDP wrapper in [`env`].
//!
//! [`harness`] drives the throughput sweeps and writes CSV and plot scripts.

pub mod agents;
pub mod env;
pub mod error;
pub mod harness;
pub mod mid;
pub mod neuralnet;
pub mod oracle;
pub mod radio;
pub mod selfcheck;
pub mod topology;

pub use error::{CoexError, Result};
pub use topology::{ChannelAssignment, ChannelId, Position, Scenario, ScenarioConfig};
