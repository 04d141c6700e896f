//! Runtime invariant checks behind `coex-sim selfcheck`.

use rand::Rng;

use crate::agents::{double_dqn_target, dqn_target, Agent, AgentKind, Hyperparams};
use crate::env::{CoexEnv, ScenarioSampler};
use crate::error::Result;
use crate::mid::{nearest_interferer_by_channel, select_channel_mid};
use crate::neuralnet::{combine_dueling, Mlp, TrainingSample};
use crate::radio::{fading_gain, throughput_ue, total_throughput, RadioParams};
use crate::topology::{generate_scenario, stream_rng, ChannelAssignment, ChannelId, Position, ScenarioConfig};

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &'static str, worst: f64, tol: f64) -> CheckOutcome {
    CheckOutcome { name, passed: worst <= tol, detail: format!("worst {worst:.3e} (tol {tol:.0e})") }
}

fn check_throughput_formula() -> Result<CheckOutcome> {
    let p = RadioParams::default();
    let mut rng = stream_rng(1, 77);
    let mut worst: f64 = 0.0;
    for seed in 0..50u64 {
        let s = generate_scenario(&ScenarioConfig { seed, ..Default::default() })?;
        let a = ChannelAssignment::from_channels((0..s.num_laa_ues()).map(|_| ChannelId(rng.gen_range(0..15))));
        for ue in 0..s.num_laa_ues() {
            let me = s.laa_ues[ue].position;
            let pl = |tx: Position| {
                let d = ((tx.x - me.x).powi(2) + (tx.y - me.y).powi(2)).sqrt().max(1.0);
                1e-3 * d.powf(-3.5)
            };
            let c = a.get(ue).unwrap();
            let num = 1e-3 * 10f64.powf(2.4) * pl(s.sbs_list[s.laa_ues[ue].serving_sbs]);
            let mut deno = 2e-13;
            for ap in s.wifi_aps.iter().filter(|ap| ap.occupied == c) {
                deno += 1e-3 * 10f64.powf(2.3) * pl(ap.position);
            }
            for (j, other) in s.laa_ues.iter().enumerate() {
                if j != ue && a.get(j) == Some(c) {
                    deno += 1e-3 * 10f64.powf(2.4) * pl(other.position);
                }
            }
            let expected = 10.0 * (1.0 + num / deno).log10() / (0.0034 + 10.0);
            let got = throughput_ue(&s, &a, ue, &p)?;
            worst = worst.max((got - expected).abs() / expected.abs().max(1e-300));
        }
    }
    Ok(outcome("throughput formula", worst, 1e-12))
}

fn check_gradients() -> Result<CheckOutcome> {
    let mut rng = stream_rng(2, 77);
    let mut worst: f64 = 0.0;
    for case in 0..6 {
        let mut net = if case % 2 == 0 {
            Mlp::plain(&[3, 6, 4, 3], &mut rng)?
        } else {
            Mlp::dueling(&[3, 6, 5], &[4, 1], &[4, 3], &mut rng)?
        };
        // zero biases behind a dead layer put pre-activations exactly on the ReLU kink
        for layer in net.layers_mut() {
            layer.biases.iter_mut().for_each(|b| *b = rng.gen_range(-0.5..0.5));
        }
        let states: Vec<Vec<f64>> = (0..3).map(|_| (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let batch: Vec<TrainingSample> = states
            .iter()
            .map(|s| TrainingSample { state: s, action: rng.gen_range(0..3), target: rng.gen_range(-1.0..1.0) })
            .collect();
        let analytic = net.backward(&batch)?.flat();
        let base = net.flat_params();
        let mut probe = net.clone();
        for (i, a) in analytic.iter().enumerate() {
            let h = 1e-5;
            let mut p = base.clone();
            p[i] += h;
            probe.set_flat_params(&p)?;
            let up = probe.loss(&batch)?;
            p[i] -= 2.0 * h;
            probe.set_flat_params(&p)?;
            let down = probe.loss(&batch)?;
            let n = (up - down) / (2.0 * h);
            worst = worst.max((a - n).abs() / a.abs().max(n.abs()).max(1e-6));
        }
    }
    Ok(outcome("backprop vs finite differences", worst, 1e-4))
}

fn check_dueling() -> CheckOutcome {
    let mut rng = stream_rng(3, 77);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let v: f64 = rng.gen_range(-3.0..3.0);
        let a: Vec<f64> = (0..5).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let c: f64 = rng.gen_range(-3.0..3.0);
        let q = combine_dueling(v, &a);
        let shifted: Vec<f64> = a.iter().map(|x| x + c).collect();
        for (x, y) in q.iter().zip(combine_dueling(v, &shifted)) {
            worst = worst.max((x - y).abs());
        }
    }
    outcome("dueling advantage-shift invariance", worst, 1e-12)
}

fn check_double_dqn() -> Result<CheckOutcome> {
    let mut rng = stream_rng(4, 77);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let online = Mlp::plain(&[4, 5, 3], &mut rng)?;
        let target = Mlp::plain(&[4, 5, 3], &mut rng)?;
        let s: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let d = double_dqn_target(0.3, &s, &online, &target, 0.9, false)?;
        let m = dqn_target(0.3, &s, &online, &target, 0.9, false)?;
        worst = worst.max(d - m);
    }
    Ok(outcome("double DQN target <= DQN target", worst, 0.0))
}

fn check_telescoping() -> Result<CheckOutcome> {
    let p = RadioParams::default();
    let sampler = ScenarioSampler::Random(ScenarioConfig::default());
    let mut rng = stream_rng(5, 77);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let (mut env, _) = CoexEnv::reset(&sampler, p.clone(), Default::default(), &mut rng)?;
        let mut ret = 0.0;
        while !env.done() {
            ret += env.step(ChannelId(rng.gen_range(0..15)))?.reward;
        }
        let total = total_throughput(env.scenario(), env.assignment(), &p)?.total;
        worst = worst.max((ret - total).abs() / total.abs().max(1e-300));
    }
    Ok(outcome("episode return equals final throughput", worst, 1e-9))
}

fn check_mid_idle_priority() -> Result<CheckOutcome> {
    let mut violations = 0.0;
    for seed in 0..50 {
        let s = generate_scenario(&ScenarioConfig { seed, ..Default::default() })?;
        let mut partial = ChannelAssignment::empty(s.num_laa_ues());
        for ue in 0..s.num_laa_ues() {
            let any_idle = nearest_interferer_by_channel(&s, &partial, ue)?.iter().any(|d| d.is_infinite());
            let d = select_channel_mid(&s, &partial, ue)?;
            if d.idle != any_idle {
                violations += 1.0;
            }
            partial.set(ue, d.chosen);
        }
    }
    Ok(outcome("MID idle priority", violations, 0.0))
}

fn check_gain_monotone() -> CheckOutcome {
    let p = RadioParams::default();
    let mut violations = 0.0;
    let mut prev = f64::INFINITY;
    for i in 0..1000 {
        let g = fading_gain(Position::ORIGIN, Position::new(i as f64 * 0.5, 0.0), &p);
        if g > prev || g <= 0.0 {
            violations += 1.0;
        }
        prev = g;
    }
    outcome("path gain nonincreasing in distance", violations, 0.0)
}

fn check_determinism() -> Result<CheckOutcome> {
    let cfg = ScenarioConfig { seed: 1234, ..Default::default() };
    let same_scenario = generate_scenario(&cfg)?.dump() == generate_scenario(&cfg)?.dump();
    let hp = Hyperparams { train_iterations: 100, ..Default::default() };
    let sampler = ScenarioSampler::Random(cfg);
    let p = RadioParams::default();
    let (a, la) = crate::agents::train_agent(AgentKind::Dqn, &sampler, &p, &hp, 3)?;
    let (b, lb) = crate::agents::train_agent(AgentKind::Dqn, &sampler, &p, &hp, 3)?;
    let same_training = la == lb
        && match (a, b) {
            (Agent::Deep(x), Agent::Deep(y)) => x.online == y.online,
            _ => false,
        };
    let bad = if same_scenario && same_training { 0.0 } else { 1.0 };
    Ok(outcome("seeded determinism", bad, 0.0))
}

pub fn run_all() -> Result<Vec<CheckOutcome>> {
    Ok(vec![
        check_throughput_formula()?,
        check_gain_monotone(),
        check_mid_idle_priority()?,
        check_telescoping()?,
        check_gradients()?,
        check_dueling(),
        check_double_dqn()?,
        check_determinism()?,
    ])
}
