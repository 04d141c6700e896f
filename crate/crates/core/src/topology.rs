//! Random deployment of the macro cell, small cells and the nodes they cover.
//!
//! Placement is uniform in discs: small cells inside the macro disc, LAA UEs
//! and Wi-Fi APs inside the disc of a uniformly drawn serving small cell, and
//! Wi-Fi clients inside the disc of their AP. Every node category draws from
//! its own ChaCha stream of the scenario seed, so growing one population does
//! not move the nodes of another.

use std::fmt::{self, Write as _};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CoexError, Result};

/// A point in the plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const ORIGIN: Position = Position { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// Euclidean distance in meters.
pub fn distance(a: Position, b: Position) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

/// Index of an unlicensed channel, `0..num_channels`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ChannelId(pub usize);

impl ChannelId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for ChannelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Deployment parameters. Geometry defaults are declared choices, not
/// measurements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub num_channels: usize,
    pub num_sbs: usize,
    pub num_laa_ue: usize,
    pub num_wifi_ap: usize,
    pub num_wifi_ue_per_ap: usize,
    pub mbs_radius: f64,
    pub sbs_radius: f64,
    pub ap_radius: f64,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            num_channels: 15,
            num_sbs: 4,
            num_laa_ue: 15,
            num_wifi_ap: 6,
            num_wifi_ue_per_ap: 2,
            mbs_radius: 500.0,
            sbs_radius: 100.0,
            ap_radius: 30.0,
            seed: 0,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_channels == 0 {
            return Err(CoexError::Config("num_channels must be at least 1".into()));
        }
        for (name, r) in
            [("mbs_radius", self.mbs_radius), ("sbs_radius", self.sbs_radius), ("ap_radius", self.ap_radius)]
        {
            if !(r.is_finite() && r > 0.0) {
                return Err(CoexError::Config(format!("{name} must be positive, got {r}")));
            }
        }
        if self.num_sbs == 0 && (self.num_laa_ue > 0 || self.num_wifi_ap > 0) {
            return Err(CoexError::Config("LAA UEs and Wi-Fi APs need at least one small cell to attach to".into()));
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LaaUe {
    pub id: usize,
    pub position: Position,
    pub serving_sbs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WifiAp {
    pub id: usize,
    pub position: Position,
    pub serving_sbs: usize,
    pub occupied: ChannelId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WifiUe {
    pub id: usize,
    pub position: Position,
    pub serving_ap: usize,
}

/// One generated deployment. Immutable once built; node ids equal their
/// index in the owning list.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub mbs: Position,
    pub sbs_list: Vec<Position>,
    pub laa_ues: Vec<LaaUe>,
    pub wifi_aps: Vec<WifiAp>,
    pub wifi_ues: Vec<WifiUe>,
}

impl Scenario {
    pub fn num_channels(&self) -> usize {
        self.config.num_channels
    }

    pub fn num_laa_ues(&self) -> usize {
        self.laa_ues.len()
    }

    pub fn ue(&self, id: usize) -> Result<&LaaUe> {
        self.laa_ues.get(id).ok_or(CoexError::Lookup { kind: "LAA UE", id })
    }

    pub fn check_channel(&self, channel: ChannelId) -> Result<()> {
        if channel.0 < self.config.num_channels {
            Ok(())
        } else {
            Err(CoexError::Range { channel: channel.0, num_channels: self.config.num_channels })
        }
    }

    /// Line-oriented dump `node_type id x y serving_id channel`, `-` for
    /// fields that do not apply.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "mbs 0 {} {} - -", self.mbs.x, self.mbs.y);
        for (i, p) in self.sbs_list.iter().enumerate() {
            let _ = writeln!(out, "sbs {i} {} {} 0 -", p.x, p.y);
        }
        for ue in &self.laa_ues {
            let p = ue.position;
            let _ = writeln!(out, "laa_ue {} {} {} {} -", ue.id, p.x, p.y, ue.serving_sbs);
        }
        for ap in &self.wifi_aps {
            let p = ap.position;
            let _ = writeln!(out, "wifi_ap {} {} {} {} {}", ap.id, p.x, p.y, ap.serving_sbs, ap.occupied);
        }
        for ue in &self.wifi_ues {
            let p = ue.position;
            let _ = writeln!(out, "wifi_ue {} {} {} {} -", ue.id, p.x, p.y, ue.serving_ap);
        }
        out
    }
}

/// Per-UE channel choice; `None` while a sequential assignment is in progress.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct ChannelAssignment {
    channels: Vec<Option<ChannelId>>,
}

impl ChannelAssignment {
    pub fn empty(num_ues: usize) -> Self {
        Self { channels: vec![None; num_ues] }
    }

    pub fn from_channels(channels: impl IntoIterator<Item = ChannelId>) -> Self {
        Self { channels: channels.into_iter().map(Some).collect() }
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    pub fn get(&self, ue: usize) -> Option<ChannelId> {
        self.channels.get(ue).copied().flatten()
    }

    pub fn set(&mut self, ue: usize, channel: ChannelId) {
        self.channels[ue] = Some(channel);
    }

    pub fn clear(&mut self, ue: usize) {
        self.channels[ue] = None;
    }

    pub fn is_complete(&self) -> bool {
        self.channels.iter().all(Option::is_some)
    }

    pub fn as_slice(&self) -> &[Option<ChannelId>] {
        &self.channels
    }

    /// `(ue, channel)` for every assigned UE, in UE-id order.
    pub fn assigned(&self) -> impl Iterator<Item = (usize, ChannelId)> + '_ {
        self.channels.iter().enumerate().filter_map(|(i, c)| c.map(|c| (i, c)))
    }
}

// Stream ids for the per-category generators.
const STREAM_SBS: u64 = 1;
const STREAM_LAA_UE: u64 = 2;
const STREAM_WIFI_AP: u64 = 3;
const STREAM_WIFI_UE: u64 = 4;

/// ChaCha generator for `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn uniform_in_disc<R: Rng>(rng: &mut R, center: Position, radius: f64) -> Position {
    let r = radius * rng.gen::<f64>().sqrt();
    let theta = std::f64::consts::TAU * rng.gen::<f64>();
    Position::new(center.x + r * theta.cos(), center.y + r * theta.sin())
}

pub fn generate_scenario(config: &ScenarioConfig) -> Result<Scenario> {
    config.validate()?;
    let mbs = Position::ORIGIN;

    let mut rng = stream_rng(config.seed, STREAM_SBS);
    let sbs_list: Vec<Position> =
        (0..config.num_sbs).map(|_| uniform_in_disc(&mut rng, mbs, config.mbs_radius)).collect();

    let mut rng = stream_rng(config.seed, STREAM_LAA_UE);
    let laa_ues = (0..config.num_laa_ue)
        .map(|id| {
            let serving_sbs = rng.gen_range(0..config.num_sbs);
            let position = uniform_in_disc(&mut rng, sbs_list[serving_sbs], config.sbs_radius);
            LaaUe { id, position, serving_sbs }
        })
        .collect();

    let mut rng = stream_rng(config.seed, STREAM_WIFI_AP);
    let wifi_aps: Vec<WifiAp> = (0..config.num_wifi_ap)
        .map(|id| {
            let serving_sbs = rng.gen_range(0..config.num_sbs);
            let position = uniform_in_disc(&mut rng, sbs_list[serving_sbs], config.sbs_radius);
            let occupied = ChannelId(rng.gen_range(0..config.num_channels));
            WifiAp { id, position, serving_sbs, occupied }
        })
        .collect();

    let mut rng = stream_rng(config.seed, STREAM_WIFI_UE);
    let mut wifi_ues = Vec::with_capacity(config.num_wifi_ap * config.num_wifi_ue_per_ap);
    for ap in &wifi_aps {
        for _ in 0..config.num_wifi_ue_per_ap {
            let position = uniform_in_disc(&mut rng, ap.position, config.ap_radius);
            wifi_ues.push(WifiUe { id: wifi_ues.len(), position, serving_ap: ap.id });
        }
    }

    Ok(Scenario { config: config.clone(), mbs, sbs_list, laa_ues, wifi_aps, wifi_ues })
}
