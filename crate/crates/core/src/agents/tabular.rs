use std::collections::HashMap;

use rand::Rng;

use super::encoding::StateKey;
use super::{select_from_q, Hyperparams};

/// Q-table with zero default for unseen `(state, action)` pairs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TabularQ {
    num_actions: usize,
    table: HashMap<StateKey, Vec<f64>>,
}

impl TabularQ {
    pub fn new(num_actions: usize) -> Self {
        Self { num_actions, table: HashMap::new() }
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn num_states(&self) -> usize {
        self.table.len()
    }

    pub fn get(&self, s: &StateKey, a: usize) -> f64 {
        self.table.get(s).map_or(0.0, |row| row[a])
    }

    pub fn row(&self, s: &StateKey) -> Vec<f64> {
        self.table.get(s).cloned().unwrap_or_else(|| vec![0.0; self.num_actions])
    }

    pub fn set(&mut self, s: &StateKey, a: usize, value: f64) {
        let n = self.num_actions;
        self.table.entry(s.clone()).or_insert_with(|| vec![0.0; n])[a] = value;
    }

    pub fn max_value(&self, s: &StateKey) -> f64 {
        match self.table.get(s) {
            Some(row) => row.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            None => 0.0,
        }
    }

    /// Rows sorted by key.
    pub fn sorted_rows(&self) -> Vec<(&StateKey, &Vec<f64>)> {
        let mut rows: Vec<_> = self.table.iter().collect();
        rows.sort_by(|a, b| a.0.cmp(b.0));
        rows
    }
}

/// `Q(s,a) <- (1 - alpha) Q(s,a) + alpha (r + gamma max_a' Q(s',a'))`;
/// `s_next = None` marks a terminal transition (no bootstrap term).
pub fn q_update_tabular(q: &mut TabularQ, s: &StateKey, a: usize, r: f64, s_next: Option<&StateKey>, hp: &Hyperparams) {
    let future = s_next.map_or(0.0, |n| q.max_value(n));
    let old = q.get(s, a);
    let new = (1.0 - hp.alpha) * old + hp.alpha * (r + hp.gamma * future);
    q.set(s, a, new);
}

/// A finite MDP with hashable states, for exercising the tabular update
/// outside the channel environment.
pub trait DiscreteEnv {
    fn num_actions(&self) -> usize;
    fn reset<R: Rng>(&mut self, rng: &mut R) -> StateKey;
    /// Returns `(next_state, reward)`, next state `None` when terminal.
    fn step(&mut self, action: usize) -> (Option<StateKey>, f64);
}

/// Epsilon-greedy tabular Q-learning for `steps` transitions.
pub fn train_tabular_discrete<E: DiscreteEnv, R: Rng>(
    env: &mut E,
    hp: &Hyperparams,
    epsilon: f64,
    steps: usize,
    rng: &mut R,
) -> TabularQ {
    let mut q = TabularQ::new(env.num_actions());
    let mut state = env.reset(rng);
    for _ in 0..steps {
        let a = select_from_q(&q.row(&state), epsilon, rng);
        let (next, r) = env.step(a);
        q_update_tabular(&mut q, &state, a, r, next.as_ref(), hp);
        state = match next {
            Some(n) => n,
            None => env.reset(rng),
        };
    }
    q
}
