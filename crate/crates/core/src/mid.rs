//! Minimum-interference-distance channel selection.
//!
//! A channel is idle when no Wi-Fi AP occupies it and no already-assigned LAA
//! UE uses it. The lowest idle channel wins; failing that, the channel whose
//! nearest co-channel interferer is farthest away. Ties go to the lowest
//! channel index.

use crate::error::{CoexError, Result};
use crate::topology::{distance, ChannelAssignment, ChannelId, Scenario};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MidDecision {
    pub chosen: ChannelId,
    pub idle: bool,
    /// `f64::INFINITY` when the chosen channel is idle.
    pub min_interferer_distance: f64,
}

/// Distance from `ue_id` to its nearest interferer on each channel
/// (`INFINITY` for idle channels).
pub fn nearest_interferer_by_channel(
    scenario: &Scenario,
    partial: &ChannelAssignment,
    ue_id: usize,
) -> Result<Vec<f64>> {
    let me = scenario.ue(ue_id)?.position;
    let mut nearest = vec![f64::INFINITY; scenario.num_channels()];
    for ap in &scenario.wifi_aps {
        let d = distance(ap.position, me);
        let slot = &mut nearest[ap.occupied.0];
        *slot = slot.min(d);
    }
    for (other, c) in partial.assigned() {
        if other != ue_id {
            let d = distance(scenario.laa_ues[other].position, me);
            let slot = &mut nearest[c.0];
            *slot = slot.min(d);
        }
    }
    Ok(nearest)
}

pub fn select_channel_mid(scenario: &Scenario, partial: &ChannelAssignment, ue_id: usize) -> Result<MidDecision> {
    if partial.get(ue_id).is_some() {
        return Err(CoexError::Precondition(format!("LAA UE {ue_id} is already assigned")));
    }
    let nearest = nearest_interferer_by_channel(scenario, partial, ue_id)?;
    if let Some(c) = nearest.iter().position(|d| d.is_infinite()) {
        return Ok(MidDecision { chosen: ChannelId(c), idle: true, min_interferer_distance: f64::INFINITY });
    }
    // strict > keeps the lowest index on ties
    let mut best = 0;
    for (c, &d) in nearest.iter().enumerate().skip(1) {
        if d > nearest[best] {
            best = c;
        }
    }
    Ok(MidDecision { chosen: ChannelId(best), idle: false, min_interferer_distance: nearest[best] })
}

/// Assign every LAA UE in id order, each decision seeing the earlier ones.
pub fn assign_all_mid(scenario: &Scenario) -> ChannelAssignment {
    let mut assignment = ChannelAssignment::empty(scenario.num_laa_ues());
    for ue in 0..scenario.num_laa_ues() {
        let decision =
            select_channel_mid(scenario, &assignment, ue).expect("UE ids come from the scenario and are visited once");
        assignment.set(ue, decision.chosen);
    }
    assignment
}
