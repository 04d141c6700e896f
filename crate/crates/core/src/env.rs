//! Sequential channel-assignment MDP.
//!
//! An episode walks the LAA UEs of one scenario in a decision order. The
//! state is the encoding of the current UE under the partial assignment, the
//! action is its channel, and the reward is the change in summed throughput
//! of all assigned UEs, so an episode's return equals the final total
//! throughput.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::agents::encoding::{encode_state, EncodingConfig};
use crate::error::{CoexError, Result};
use crate::radio::{assigned_throughput, RadioParams};
use crate::topology::{generate_scenario, ChannelAssignment, ChannelId, Scenario, ScenarioConfig};

/// Where episodes get their scenarios from.
#[derive(Debug, Clone)]
pub enum ScenarioSampler {
    /// The same deployment every episode.
    Fixed(Scenario),
    /// A fresh deployment per episode, seeded from the episode RNG.
    Random(ScenarioConfig),
}

impl ScenarioSampler {
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Result<Scenario> {
        match self {
            ScenarioSampler::Fixed(s) => Ok(s.clone()),
            ScenarioSampler::Random(cfg) => generate_scenario(&cfg.with_seed(rng.gen())),
        }
    }

    pub fn num_channels(&self) -> usize {
        match self {
            ScenarioSampler::Fixed(s) => s.num_channels(),
            ScenarioSampler::Random(cfg) => cfg.num_channels,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Observation {
    State(Vec<f64>),
    Terminal,
}

impl Observation {
    pub fn state(&self) -> Option<&[f64]> {
        match self {
            Observation::State(s) => Some(s),
            Observation::Terminal => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub next_state: Observation,
    pub reward: f64,
    pub done: bool,
}

#[derive(Debug, Clone)]
pub struct CoexEnv {
    scenario: Scenario,
    partial: ChannelAssignment,
    decision_order: Vec<usize>,
    cursor: usize,
    params: RadioParams,
    encoding: EncodingConfig,
    assigned_total: f64,
}

impl CoexEnv {
    /// Episode over `scenario` in the given decision order.
    pub fn with_order(
        scenario: Scenario,
        decision_order: Vec<usize>,
        params: RadioParams,
        encoding: EncodingConfig,
    ) -> Result<Self> {
        let n = scenario.num_laa_ues();
        let mut seen = vec![false; n];
        for &ue in &decision_order {
            if ue >= n || std::mem::replace(&mut seen[ue], true) {
                return Err(CoexError::Config(format!("decision order is not a permutation of 0..{n}")));
            }
        }
        if decision_order.len() != n {
            return Err(CoexError::Config(format!("decision order is not a permutation of 0..{n}")));
        }
        Ok(Self {
            partial: ChannelAssignment::empty(n),
            scenario,
            decision_order,
            cursor: 0,
            params,
            encoding,
            assigned_total: 0.0,
        })
    }

    /// Episode over `scenario` in UE-id order.
    pub fn in_id_order(scenario: Scenario, params: RadioParams, encoding: EncodingConfig) -> Self {
        let order = (0..scenario.num_laa_ues()).collect();
        Self::with_order(scenario, order, params, encoding).expect("identity order is a permutation")
    }

    /// Start a new episode: fresh scenario, empty assignment, shuffled order.
    pub fn reset<R: Rng>(
        sampler: &ScenarioSampler,
        params: RadioParams,
        encoding: EncodingConfig,
        rng: &mut R,
    ) -> Result<(Self, Observation)> {
        let scenario = sampler.sample(rng)?;
        let mut order: Vec<usize> = (0..scenario.num_laa_ues()).collect();
        order.shuffle(rng);
        let env = Self::with_order(scenario, order, params, encoding)?;
        let obs = env.observation()?;
        Ok((env, obs))
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn assignment(&self) -> &ChannelAssignment {
        &self.partial
    }

    pub fn params(&self) -> &RadioParams {
        &self.params
    }

    pub fn done(&self) -> bool {
        self.cursor >= self.decision_order.len()
    }

    pub fn current_ue(&self) -> Option<usize> {
        self.decision_order.get(self.cursor).copied()
    }

    pub fn observation(&self) -> Result<Observation> {
        match self.current_ue() {
            None => Ok(Observation::Terminal),
            Some(ue) => {
                Ok(Observation::State(encode_state(&self.scenario, &self.partial, ue, &self.params, &self.encoding)?))
            }
        }
    }

    pub fn step(&mut self, action: ChannelId) -> Result<StepOutcome> {
        let ue = self.current_ue().ok_or_else(|| CoexError::State("step called on a finished episode".into()))?;
        self.scenario.check_channel(action)?;
        self.partial.set(ue, action);
        let total = assigned_throughput(&self.scenario, &self.partial, &self.params)?;
        let reward = total - self.assigned_total;
        self.assigned_total = total;
        self.cursor += 1;
        Ok(StepOutcome { next_state: self.observation()?, reward, done: self.done() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radio::{interference_at_ue, total_throughput};
    use crate::topology::stream_rng;

    fn sampler(seed: u64, ues: usize) -> ScenarioSampler {
        ScenarioSampler::Fixed(
            generate_scenario(&ScenarioConfig { num_laa_ue: ues, seed, ..Default::default() }).unwrap(),
        )
    }

    #[test]
    fn reset_is_seeded() {
        let s = ScenarioSampler::Random(ScenarioConfig::default());
        let p = RadioParams::default();
        let e = EncodingConfig::default();
        let (a, oa) = CoexEnv::reset(&s, p.clone(), e.clone(), &mut stream_rng(5, 0)).unwrap();
        let (b, ob) = CoexEnv::reset(&s, p, e, &mut stream_rng(5, 0)).unwrap();
        assert_eq!(oa, ob);
        assert_eq!(a.decision_order, b.decision_order);
        assert_eq!(a.scenario, b.scenario);
    }

    #[test]
    fn zero_ue_scenario_is_terminal_immediately() {
        let (env, obs) =
            CoexEnv::reset(&sampler(1, 0), RadioParams::default(), EncodingConfig::default(), &mut stream_rng(0, 0))
                .unwrap();
        assert!(env.done());
        assert_eq!(obs, Observation::Terminal);
    }

    #[test]
    fn initial_state_matches_radio_oracle() {
        let p = RadioParams::default();
        let (env, obs) =
            CoexEnv::reset(&sampler(3, 10), p.clone(), EncodingConfig::default(), &mut stream_rng(1, 0)).unwrap();
        let state = obs.state().unwrap();
        let ue = env.current_ue().unwrap();
        let s = env.scenario();
        assert_eq!(state.len(), 2 + s.num_channels());
        assert_eq!(state[0], s.laa_ues[ue].position.x / s.config.mbs_radius);
        assert_eq!(state[1], s.laa_ues[ue].position.y / s.config.mbs_radius);
        for c in 0..s.num_channels() {
            let b = interference_at_ue(s, env.assignment(), ue, ChannelId(c), &p).unwrap();
            let expected = (1.0 + b.total() / p.noise).log10();
            assert!((state[2 + c] - expected).abs() <= 1e-12 * expected.max(1.0));
        }
    }

    #[test]
    fn rewards_telescope_to_final_throughput() {
        let p = RadioParams::default();
        let mut rng = stream_rng(2, 0);
        for seed in 0..10 {
            let (mut env, _) =
                CoexEnv::reset(&sampler(seed, 12), p.clone(), EncodingConfig::default(), &mut rng).unwrap();
            let mut ret = 0.0;
            let mut last = None;
            while !env.done() {
                let out = env.step(ChannelId(rng.gen_range(0..15))).unwrap();
                ret += out.reward;
                last = Some(out);
            }
            let last = last.unwrap();
            assert!(last.done && last.next_state == Observation::Terminal);
            let total = total_throughput(env.scenario(), env.assignment(), &p).unwrap().total;
            assert!((ret - total).abs() <= 1e-9 * total.abs());
        }
    }

    #[test]
    fn step_errors() {
        let p = RadioParams::default();
        let (mut env, _) = CoexEnv::reset(&sampler(4, 1), p, EncodingConfig::default(), &mut stream_rng(0, 0)).unwrap();
        assert!(matches!(env.step(ChannelId(15)), Err(CoexError::Range { .. })));
        assert!(env.step(ChannelId(0)).unwrap().done);
        assert!(matches!(env.step(ChannelId(0)), Err(CoexError::State(_))));
    }

    #[test]
    fn idle_channel_beats_the_crowded_one() {
        let p = RadioParams::default();
        for seed in 0..20 {
            let s = generate_scenario(&ScenarioConfig { num_laa_ue: 8, num_wifi_ap: 6, seed, ..Default::default() })
                .unwrap();
            let mut env = CoexEnv::in_id_order(s.clone(), p.clone(), EncodingConfig::default());
            // pile the first seven UEs onto channel 0, which also keeps the APs' channels busy
            for _ in 0..7 {
                env.step(ChannelId(0)).unwrap();
            }
            let busy: Vec<bool> = (0..15).map(|c| s.wifi_aps.iter().any(|a| a.occupied.0 == c) || c == 0).collect();
            let Some(idle) = busy.iter().position(|b| !b) else { continue };
            let mut crowded_env = env.clone();
            let r_idle = env.step(ChannelId(idle)).unwrap().reward;
            let r_crowded = crowded_env.step(ChannelId(0)).unwrap().reward;
            assert!(r_idle >= r_crowded, "seed {seed}: {r_idle} < {r_crowded}");
        }
    }

    #[test]
    fn state_depends_only_on_earlier_decisions() {
        let p = RadioParams::default();
        let s = generate_scenario(&ScenarioConfig { num_laa_ue: 6, seed: 8, ..Default::default() }).unwrap();
        let mut a = CoexEnv::in_id_order(s.clone(), p.clone(), EncodingConfig::default());
        let mut b = CoexEnv::in_id_order(s, p, EncodingConfig::default());
        for (ca, cb) in [(1, 1), (4, 4), (2, 2)] {
            a.step(ChannelId(ca)).unwrap();
            b.step(ChannelId(cb)).unwrap();
        }
        assert_eq!(a.observation().unwrap(), b.observation().unwrap());
    }

    #[test]
    fn bad_orders_are_rejected() {
        let s = generate_scenario(&ScenarioConfig { num_laa_ue: 3, ..Default::default() }).unwrap();
        let p = RadioParams::default();
        let e = EncodingConfig::default();
        assert!(CoexEnv::with_order(s.clone(), vec![0, 0, 1], p.clone(), e.clone()).is_err());
        assert!(CoexEnv::with_order(s.clone(), vec![0, 1], p.clone(), e.clone()).is_err());
        assert!(CoexEnv::with_order(s, vec![2, 0, 1], p, e).is_ok());
    }
}
