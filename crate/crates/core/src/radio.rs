//! Link gains, co-channel interference and the normalized LAA throughput.
//!
//! Per LAA UE on its channel:
//!
//! ```text
//! Num        = p_laa * gain(serving transmitter -> UE)
//! Deno       = I_ap_to_ue + I_ue_to_ue + noise
//! throughput = t_max * log10(1 + Num / Deno) / (i_cca + t_max)
//! ```
//!
//! Gains follow a log-distance path-loss law clamped below the reference
//! distance. Only transmitters on the same channel index interfere.

use serde::{Deserialize, Serialize};

use crate::error::{CoexError, Result};
use crate::topology::{distance, ChannelAssignment, ChannelId, Position, Scenario};

/// Maximum LAA transmit power, 24 dBm in watts.
pub const P_LAA_WATTS: f64 = 1e-3 * 251.188_643_150_958_f64;
/// Maximum channel occupancy time, ms.
pub const T_MAX_MS: f64 = 10.0;
/// Clear-channel-assessment overhead, ms.
pub const I_CCA_MS: f64 = 0.0034;
/// Noise power, watts.
pub const NOISE_WATTS: f64 = 2e-13;

/// Which node feeds the LAA downlink in the numerator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ServingTransmitter {
    Sbs,
    Mbs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LogBase {
    #[serde(rename = "10")]
    Ten,
    #[serde(rename = "2")]
    Two,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioParams {
    /// LAA transmit power, W.
    pub p_laa: f64,
    /// Wi-Fi AP transmit power, W.
    pub p_wifi_ap: f64,
    /// ms
    pub t_max: f64,
    /// ms
    pub i_cca: f64,
    /// W
    pub noise: f64,
    /// Path loss at `d0`, dB.
    pub pl0_db: f64,
    /// Reference distance, m. Shorter links are clamped to it.
    pub d0: f64,
    pub path_loss_exponent: f64,
    pub serving: ServingTransmitter,
    pub log_base: LogBase,
    /// Multiply every gain by a unit-mean exponential (Rayleigh power) draw
    /// keyed on the link endpoints and `fading_seed`.
    pub rayleigh: bool,
    pub fading_seed: u64,
}

impl Default for RadioParams {
    fn default() -> Self {
        Self {
            p_laa: 1e-3 * 10f64.powf(24.0 / 10.0),
            p_wifi_ap: 1e-3 * 10f64.powf(23.0 / 10.0),
            t_max: T_MAX_MS,
            i_cca: I_CCA_MS,
            noise: NOISE_WATTS,
            pl0_db: 30.0,
            d0: 1.0,
            path_loss_exponent: 3.5,
            serving: ServingTransmitter::Sbs,
            log_base: LogBase::Ten,
            rayleigh: false,
            fading_seed: 0,
        }
    }
}

impl RadioParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("p_laa", self.p_laa),
            ("p_wifi_ap", self.p_wifi_ap),
            ("t_max", self.t_max),
            ("noise", self.noise),
            ("d0", self.d0),
            ("path_loss_exponent", self.path_loss_exponent),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(CoexError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.i_cca.is_finite() && self.i_cca >= 0.0) {
            return Err(CoexError::Config(format!("i_cca must be nonnegative, got {}", self.i_cca)));
        }
        if !self.pl0_db.is_finite() {
            return Err(CoexError::Config("pl0_db must be finite".into()));
        }
        Ok(())
    }
}

/// Interference seen by one UE on one channel, W.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InterferenceBreakdown {
    pub i_ap_to_ue: f64,
    pub i_ue_to_ue: f64,
}

impl InterferenceBreakdown {
    pub fn total(&self) -> f64 {
        self.i_ap_to_ue + self.i_ue_to_ue
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThroughputReport {
    pub per_ue: Vec<f64>,
    pub total: f64,
    pub breakdown: Vec<InterferenceBreakdown>,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn rayleigh_power(tx: Position, rx: Position, seed: u64) -> f64 {
    let mut h = splitmix64(seed);
    for bits in [tx.x.to_bits(), tx.y.to_bits(), rx.x.to_bits(), rx.y.to_bits()] {
        h = splitmix64(h ^ bits);
    }
    // 53-bit uniform in (0, 1]
    let u = ((h >> 11) as f64 + 1.0) / (1u64 << 53) as f64;
    -u.ln()
}

/// Path-loss dB at distance `d` (clamped to `d0`).
pub fn path_loss_db(d: f64, params: &RadioParams) -> f64 {
    params.pl0_db + 10.0 * params.path_loss_exponent * (d.max(params.d0) / params.d0).log10()
}

/// Linear power gain of the link `tx -> rx`.
pub fn fading_gain(tx: Position, rx: Position, params: &RadioParams) -> f64 {
    let gain = 10f64.powf(-path_loss_db(distance(tx, rx), params) / 10.0);
    if params.rayleigh {
        gain * rayleigh_power(tx, rx, params.fading_seed)
    } else {
        gain
    }
}

pub fn serving_transmitter(scenario: &Scenario, ue_id: usize, params: &RadioParams) -> Result<Position> {
    let ue = scenario.ue(ue_id)?;
    Ok(match params.serving {
        ServingTransmitter::Sbs => scenario.sbs_list[ue.serving_sbs],
        ServingTransmitter::Mbs => scenario.mbs,
    })
}

/// Interference on `ue_id` if it used `channel`, given the UEs already
/// assigned in `assignment` (the UE's own entry is ignored).
pub fn interference_at_ue(
    scenario: &Scenario,
    assignment: &ChannelAssignment,
    ue_id: usize,
    channel: ChannelId,
    params: &RadioParams,
) -> Result<InterferenceBreakdown> {
    let rx = scenario.ue(ue_id)?.position;
    scenario.check_channel(channel)?;
    let i_ap_to_ue = scenario
        .wifi_aps
        .iter()
        .filter(|ap| ap.occupied == channel)
        .map(|ap| params.p_wifi_ap * fading_gain(ap.position, rx, params))
        .sum();
    let i_ue_to_ue = assignment
        .assigned()
        .filter(|&(other, c)| other != ue_id && c == channel)
        .map(|(other, _)| params.p_laa * fading_gain(scenario.laa_ues[other].position, rx, params))
        .sum();
    Ok(InterferenceBreakdown { i_ap_to_ue, i_ue_to_ue })
}

/// [`interference_at_ue`] for every channel in one pass over the interferers.
pub fn interference_by_channel(
    scenario: &Scenario,
    assignment: &ChannelAssignment,
    ue_id: usize,
    params: &RadioParams,
) -> Result<Vec<InterferenceBreakdown>> {
    let rx = scenario.ue(ue_id)?.position;
    let mut out = vec![InterferenceBreakdown::default(); scenario.num_channels()];
    for ap in &scenario.wifi_aps {
        out[ap.occupied.0].i_ap_to_ue += params.p_wifi_ap * fading_gain(ap.position, rx, params);
    }
    for (other, c) in assignment.assigned() {
        if other != ue_id {
            out[c.0].i_ue_to_ue += params.p_laa * fading_gain(scenario.laa_ues[other].position, rx, params);
        }
    }
    Ok(out)
}

/// Normalized throughput for a given signal and interference-plus-noise.
pub fn throughput_from_powers(num: f64, deno: f64, params: &RadioParams) -> f64 {
    let ratio = 1.0 + num / deno;
    let log = match params.log_base {
        LogBase::Ten => ratio.log10(),
        LogBase::Two => ratio.log2(),
    };
    params.t_max * log / (params.i_cca + params.t_max)
}

fn throughput_with_breakdown(
    scenario: &Scenario,
    assignment: &ChannelAssignment,
    ue_id: usize,
    params: &RadioParams,
) -> Result<(f64, InterferenceBreakdown)> {
    let ue = scenario.ue(ue_id)?;
    let channel =
        assignment.get(ue_id).ok_or_else(|| CoexError::Precondition(format!("LAA UE {ue_id} has no channel")))?;
    let tx = serving_transmitter(scenario, ue_id, params)?;
    let num = params.p_laa * fading_gain(tx, ue.position, params);
    let breakdown = interference_at_ue(scenario, assignment, ue_id, channel, params)?;
    let deno = breakdown.total() + params.noise;
    Ok((throughput_from_powers(num, deno, params), breakdown))
}

pub fn throughput_ue(
    scenario: &Scenario,
    assignment: &ChannelAssignment,
    ue_id: usize,
    params: &RadioParams,
) -> Result<f64> {
    throughput_with_breakdown(scenario, assignment, ue_id, params).map(|(t, _)| t)
}

/// Summed throughput of the UEs that currently hold a channel.
pub fn assigned_throughput(scenario: &Scenario, assignment: &ChannelAssignment, params: &RadioParams) -> Result<f64> {
    assignment.assigned().map(|(ue, _)| throughput_ue(scenario, assignment, ue, params)).sum()
}

pub fn total_throughput(
    scenario: &Scenario,
    assignment: &ChannelAssignment,
    params: &RadioParams,
) -> Result<ThroughputReport> {
    if assignment.len() != scenario.num_laa_ues() || !assignment.is_complete() {
        return Err(CoexError::Precondition("total throughput needs a complete assignment".into()));
    }
    let mut per_ue = Vec::with_capacity(assignment.len());
    let mut breakdown = Vec::with_capacity(assignment.len());
    for ue in 0..assignment.len() {
        let (t, b) = throughput_with_breakdown(scenario, assignment, ue, params)?;
        per_ue.push(t);
        breakdown.push(b);
    }
    let total = per_ue.iter().sum();
    Ok(ThroughputReport { per_ue, total, breakdown })
}
