//! Exhaustive search over all channel assignments of small scenarios.

use rand::Rng;

use crate::error::{CoexError, Result};
use crate::radio::{total_throughput, RadioParams};
use crate::topology::{ChannelAssignment, ChannelId, Scenario};

/// Largest search space [`exhaustive_optimum`] will enumerate.
pub const MAX_ASSIGNMENTS: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq)]
pub struct OptimumReport {
    pub best: ChannelAssignment,
    pub best_total: f64,
    pub evaluated: u64,
}

/// Best complete assignment by total throughput. Assignments are visited in
/// lexicographic order; the first maximum wins.
pub fn exhaustive_optimum(scenario: &Scenario, params: &RadioParams) -> Result<OptimumReport> {
    let n = scenario.num_laa_ues();
    let c = scenario.num_channels() as u64;
    let space = c
        .checked_pow(n as u32)
        .filter(|&s| s <= MAX_ASSIGNMENTS)
        .ok_or_else(|| CoexError::Precondition(format!("{c}^{n} assignments is too many to enumerate")))?;
    let mut digits = vec![0usize; n];
    let mut best: Option<(ChannelAssignment, f64)> = None;
    for _ in 0..space {
        let a = ChannelAssignment::from_channels(digits.iter().map(|&d| ChannelId(d)));
        let total = total_throughput(scenario, &a, params)?.total;
        if best.as_ref().is_none_or(|(_, b)| total > *b) {
            best = Some((a, total));
        }
        // odometer increment, last UE fastest
        for d in digits.iter_mut().rev() {
            *d += 1;
            if (*d as u64) < c {
                break;
            }
            *d = 0;
        }
    }
    let (best, best_total) = best.expect("space is at least 1");
    Ok(OptimumReport { best, best_total, evaluated: space })
}

/// Uniformly random complete assignment.
pub fn random_assignment<R: Rng>(scenario: &Scenario, rng: &mut R) -> ChannelAssignment {
    ChannelAssignment::from_channels(
        (0..scenario.num_laa_ues()).map(|_| ChannelId(rng.gen_range(0..scenario.num_channels()))),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{generate_scenario, ScenarioConfig};

    #[test]
    fn enumerates_the_whole_space() {
        let cfg = ScenarioConfig { num_channels: 3, num_laa_ue: 4, num_wifi_ap: 2, seed: 5, ..Default::default() };
        let s = generate_scenario(&cfg).unwrap();
        let p = RadioParams::default();
        let r = exhaustive_optimum(&s, &p).unwrap();
        assert_eq!(r.evaluated, 81);
        // nothing beats the reported optimum
        let mut rng = crate::topology::stream_rng(0, 0);
        for _ in 0..200 {
            let a = random_assignment(&s, &mut rng);
            assert!(total_throughput(&s, &a, &p).unwrap().total <= r.best_total);
        }
    }

    #[test]
    fn refuses_huge_spaces() {
        let s = generate_scenario(&ScenarioConfig { num_laa_ue: 12, ..Default::default() }).unwrap();
        assert!(exhaustive_optimum(&s, &RadioParams::default()).is_err());
    }

    #[test]
    fn single_channel_has_one_assignment() {
        let cfg = ScenarioConfig { num_channels: 1, num_laa_ue: 3, ..Default::default() };
        let s = generate_scenario(&cfg).unwrap();
        assert_eq!(exhaustive_optimum(&s, &RadioParams::default()).unwrap().evaluated, 1);
    }
}
