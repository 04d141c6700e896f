use rand::Rng;

use crate::error::{CoexError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Identity => z,
        }
    }

    fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Identity => "identity",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerSpec {
    pub input_width: usize,
    pub output_width: usize,
    pub activation: Activation,
}

/// Fully connected layer; `weights` is row-major `output_width x input_width`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub spec: LayerSpec,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Dense {
    pub fn zeros(spec: LayerSpec) -> Self {
        Self { spec, weights: vec![0.0; spec.input_width * spec.output_width], biases: vec![0.0; spec.output_width] }
    }

    /// Uniform `±sqrt(6 / (fan_in + fan_out))` weights, zero biases.
    pub fn glorot<R: Rng>(spec: LayerSpec, rng: &mut R) -> Self {
        let limit = (6.0 / (spec.input_width + spec.output_width) as f64).sqrt();
        let weights = (0..spec.input_width * spec.output_width).map(|_| rng.gen_range(-limit..=limit)).collect();
        Self { spec, weights, biases: vec![0.0; spec.output_width] }
    }

    pub fn from_parts(spec: LayerSpec, weights: Vec<f64>, biases: Vec<f64>) -> Result<Self> {
        if spec.input_width == 0 || spec.output_width == 0 {
            return Err(CoexError::Shape("layer widths must be at least 1".into()));
        }
        if weights.len() != spec.input_width * spec.output_width || biases.len() != spec.output_width {
            return Err(CoexError::Shape(format!(
                "layer {}x{} got {} weights and {} biases",
                spec.output_width,
                spec.input_width,
                weights.len(),
                biases.len()
            )));
        }
        Ok(Self { spec, weights, biases })
    }

    fn pre_activation(&self, input: &[f64]) -> Vec<f64> {
        let n_in = self.spec.input_width;
        self.weights
            .chunks_exact(n_in)
            .zip(&self.biases)
            .map(|(row, b)| row.iter().zip(input).map(|(w, x)| w * x).sum::<f64>() + b)
            .collect()
    }

    fn num_params(&self) -> usize {
        self.weights.len() + self.biases.len()
    }
}

/// Separate value and advantage streams fed by the trunk output.
#[derive(Debug, Clone, PartialEq)]
pub struct DuelingHead {
    pub value: Vec<Dense>,
    pub advantage: Vec<Dense>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub trunk: Vec<Dense>,
    pub dueling_head: Option<DuelingHead>,
}

/// Gradient for one [`Dense`], same layout.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseGrad {
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

/// Gradients of every layer in [`Mlp::layers`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<DenseGrad>,
}

impl Gradients {
    pub fn zeros_like(net: &Mlp) -> Self {
        Self {
            layers: net
                .layers()
                .map(|l| DenseGrad { weights: vec![0.0; l.weights.len()], biases: vec![0.0; l.biases.len()] })
                .collect(),
        }
    }

    pub fn flat(&self) -> Vec<f64> {
        self.layers.iter().flat_map(|g| g.weights.iter().chain(&g.biases).copied()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.layers.iter().flat_map(|g| g.weights.iter().chain(&g.biases)).fold(0.0, |m, g| m.max(g.abs()))
    }
}

/// One `(state, action, target)` regression sample.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSample<'a> {
    pub state: &'a [f64],
    pub action: usize,
    pub target: f64,
}

struct StackTrace {
    /// Input to each layer.
    inputs: Vec<Vec<f64>>,
    pre: Vec<Vec<f64>>,
    output: Vec<f64>,
}

fn run_stack(layers: &[Dense], input: &[f64]) -> StackTrace {
    let mut inputs = Vec::with_capacity(layers.len());
    let mut pre = Vec::with_capacity(layers.len());
    let mut x = input.to_vec();
    for layer in layers {
        let z = layer.pre_activation(&x);
        let a = z.iter().map(|&v| layer.spec.activation.apply(v)).collect();
        inputs.push(x);
        pre.push(z);
        x = a;
    }
    StackTrace { inputs, pre, output: x }
}

/// Accumulate parameter gradients of `layers` into `grads` given the
/// gradient at the stack output; returns the gradient at the stack input.
fn backprop_stack(layers: &[Dense], trace: &StackTrace, grads: &mut [DenseGrad], out_grad: Vec<f64>) -> Vec<f64> {
    let mut upstream = out_grad;
    for (l, layer) in layers.iter().enumerate().rev() {
        let n_in = layer.spec.input_width;
        let delta: Vec<f64> =
            upstream.iter().zip(&trace.pre[l]).map(|(g, &z)| g * layer.spec.activation.derivative(z)).collect();
        let input = &trace.inputs[l];
        let g = &mut grads[l];
        let mut down = vec![0.0; n_in];
        for (o, &d) in delta.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            g.biases[o] += d;
            let row = &layer.weights[o * n_in..(o + 1) * n_in];
            let grow = &mut g.weights[o * n_in..(o + 1) * n_in];
            for i in 0..n_in {
                grow[i] += d * input[i];
                down[i] += d * row[i];
            }
        }
        upstream = down;
    }
    upstream
}

fn check_chain(layers: &[Dense], what: &str) -> Result<()> {
    if layers.is_empty() {
        return Err(CoexError::Shape(format!("{what} has no layers")));
    }
    for pair in layers.windows(2) {
        if pair[0].spec.output_width != pair[1].spec.input_width {
            return Err(CoexError::Shape(format!(
                "{what}: width {} feeds a layer expecting {}",
                pair[0].spec.output_width, pair[1].spec.input_width
            )));
        }
    }
    Ok(())
}

fn build_stack<R: Rng>(widths: &[usize], rng: &mut R) -> Vec<Dense> {
    let n = widths.len() - 1;
    widths
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            let activation = if i + 1 == n { Activation::Identity } else { Activation::Relu };
            Dense::glorot(LayerSpec { input_width: w[0], output_width: w[1], activation }, rng)
        })
        .collect()
}

fn relu_stack<R: Rng>(widths: &[usize], rng: &mut R) -> Vec<Dense> {
    widths
        .windows(2)
        .map(|w| Dense::glorot(LayerSpec { input_width: w[0], output_width: w[1], activation: Activation::Relu }, rng))
        .collect()
}

impl Mlp {
    pub fn new(trunk: Vec<Dense>, dueling_head: Option<DuelingHead>) -> Result<Self> {
        check_chain(&trunk, "trunk")?;
        if let Some(head) = &dueling_head {
            check_chain(&head.value, "value stream")?;
            check_chain(&head.advantage, "advantage stream")?;
            let h = trunk.last().unwrap().spec.output_width;
            if head.value[0].spec.input_width != h || head.advantage[0].spec.input_width != h {
                return Err(CoexError::Shape("dueling streams must read the trunk output".into()));
            }
            if head.value.last().unwrap().spec.output_width != 1 {
                return Err(CoexError::Shape("value stream must end in one unit".into()));
            }
        }
        Ok(Self { trunk, dueling_head })
    }

    /// Plain network through `widths = [input, hidden.., output]`: ReLU on
    /// hidden layers, identity on the output.
    pub fn plain<R: Rng>(widths: &[usize], rng: &mut R) -> Result<Self> {
        if widths.len() < 2 || widths.contains(&0) {
            return Err(CoexError::Shape(format!("bad widths {widths:?}")));
        }
        Self::new(build_stack(widths, rng), None)
    }

    /// Dueling network. The ReLU trunk runs `trunk_widths`; both streams start
    /// from its output and run `value_widths` (ending in 1) and
    /// `advantage_widths` (ending in the action count), identity on the last
    /// layer of each.
    pub fn dueling<R: Rng>(
        trunk_widths: &[usize],
        value_widths: &[usize],
        advantage_widths: &[usize],
        rng: &mut R,
    ) -> Result<Self> {
        if trunk_widths.len() < 2
            || value_widths.is_empty()
            || advantage_widths.is_empty()
            || trunk_widths.iter().chain(value_widths).chain(advantage_widths).any(|&w| w == 0)
        {
            return Err(CoexError::Shape("bad dueling widths".into()));
        }
        let h = *trunk_widths.last().unwrap();
        let trunk = relu_stack(trunk_widths, rng);
        let with_input = |ws: &[usize]| std::iter::once(h).chain(ws.iter().copied()).collect::<Vec<_>>();
        let value = build_stack(&with_input(value_widths), rng);
        let advantage = build_stack(&with_input(advantage_widths), rng);
        Self::new(trunk, Some(DuelingHead { value, advantage }))
    }

    pub fn input_width(&self) -> usize {
        self.trunk[0].spec.input_width
    }

    pub fn num_actions(&self) -> usize {
        match &self.dueling_head {
            Some(h) => h.advantage.last().unwrap().spec.output_width,
            None => self.trunk.last().unwrap().spec.output_width,
        }
    }

    /// Trunk, then value stream, then advantage stream.
    pub fn layers(&self) -> impl Iterator<Item = &Dense> {
        let head = self.dueling_head.iter().flat_map(|h| h.value.iter().chain(&h.advantage));
        self.trunk.iter().chain(head)
    }

    pub fn layers_mut(&mut self) -> impl Iterator<Item = &mut Dense> {
        let head = self.dueling_head.iter_mut().flat_map(|h| h.value.iter_mut().chain(h.advantage.iter_mut()));
        self.trunk.iter_mut().chain(head)
    }

    pub fn num_params(&self) -> usize {
        self.layers().map(Dense::num_params).sum()
    }

    /// Every parameter, weights before biases, in [`Mlp::layers`] order.
    pub fn flat_params(&self) -> Vec<f64> {
        self.layers().flat_map(|l| l.weights.iter().chain(&l.biases).copied()).collect()
    }

    pub fn set_flat_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.num_params() {
            return Err(CoexError::Shape(format!("expected {} params, got {}", self.num_params(), params.len())));
        }
        let mut it = params.iter().copied();
        for layer in self.layers_mut() {
            for p in layer.weights.iter_mut().chain(layer.biases.iter_mut()) {
                *p = it.next().unwrap();
            }
        }
        Ok(())
    }

    fn check_input(&self, state: &[f64]) -> Result<()> {
        if state.len() != self.input_width() {
            return Err(CoexError::Shape(format!(
                "state has width {}, network expects {}",
                state.len(),
                self.input_width()
            )));
        }
        Ok(())
    }

    pub fn forward(&self, state: &[f64]) -> Result<Vec<f64>> {
        self.check_input(state)?;
        let trunk = run_stack(&self.trunk, state);
        Ok(match &self.dueling_head {
            None => trunk.output,
            Some(head) => {
                let v = run_stack(&head.value, &trunk.output).output[0];
                let a = run_stack(&head.advantage, &trunk.output).output;
                combine_dueling(v, &a)
            }
        })
    }

    /// Gradients of `mean_batch (Q(s, a) - target)^2`.
    pub fn backward(&self, batch: &[TrainingSample<'_>]) -> Result<Gradients> {
        if batch.is_empty() {
            return Err(CoexError::Precondition("backward needs a nonempty batch".into()));
        }
        let n_actions = self.num_actions();
        let mut grads = Gradients::zeros_like(self);
        let n_trunk = self.trunk.len();
        let scale = 2.0 / batch.len() as f64;
        for sample in batch {
            self.check_input(sample.state)?;
            if sample.action >= n_actions {
                return Err(CoexError::Range { channel: sample.action, num_channels: n_actions });
            }
            let trunk = run_stack(&self.trunk, sample.state);
            let (trunk_grads, head_grads) = grads.layers.split_at_mut(n_trunk);
            let hidden_grad = match &self.dueling_head {
                None => {
                    let mut g = vec![0.0; n_actions];
                    g[sample.action] = scale * (trunk.output[sample.action] - sample.target);
                    g
                }
                Some(head) => {
                    let vt = run_stack(&head.value, &trunk.output);
                    let at = run_stack(&head.advantage, &trunk.output);
                    let q = combine_dueling(vt.output[0], &at.output);
                    let mut gq = vec![0.0; n_actions];
                    gq[sample.action] = scale * (q[sample.action] - sample.target);
                    // dQ_i/dV = 1, dQ_i/dA_j = [i == j] - 1/n
                    let sum: f64 = gq.iter().sum();
                    let gv = vec![sum];
                    let ga: Vec<f64> = gq.iter().map(|g| g - sum / n_actions as f64).collect();
                    let (value_grads, adv_grads) = head_grads.split_at_mut(head.value.len());
                    let from_v = backprop_stack(&head.value, &vt, value_grads, gv);
                    let from_a = backprop_stack(&head.advantage, &at, adv_grads, ga);
                    from_v.iter().zip(&from_a).map(|(a, b)| a + b).collect()
                }
            };
            backprop_stack(&self.trunk, &trunk, trunk_grads, hidden_grad);
        }
        Ok(grads)
    }

    /// Mean squared error on the selected actions.
    pub fn loss(&self, batch: &[TrainingSample<'_>]) -> Result<f64> {
        let mut total = 0.0;
        for s in batch {
            let q = self.forward(s.state)?;
            total += (q[s.action] - s.target).powi(2);
        }
        Ok(total / batch.len() as f64)
    }

    /// `p <- p - learning_rate * g` for every parameter.
    pub fn sgd_step(&mut self, grads: &Gradients, learning_rate: f64) -> Result<()> {
        let shapes_match = grads.layers.len() == self.layers().count()
            && self
                .layers()
                .zip(&grads.layers)
                .all(|(l, g)| l.weights.len() == g.weights.len() && l.biases.len() == g.biases.len());
        if !shapes_match {
            return Err(CoexError::Shape("gradients do not match the network".into()));
        }
        for (layer, g) in self.layers_mut().zip(&grads.layers) {
            for (p, d) in layer.weights.iter_mut().zip(&g.weights) {
                *p -= learning_rate * d;
            }
            for (p, d) in layer.biases.iter_mut().zip(&g.biases) {
                *p -= learning_rate * d;
            }
        }
        Ok(())
    }

    /// Independent deep copy for use as a target network.
    pub fn clone_to_target(&self) -> Mlp {
        self.clone()
    }
}

/// `Q_a = V + A_a - mean(A)`.
pub fn combine_dueling(value: f64, advantage: &[f64]) -> Vec<f64> {
    let mean = advantage.iter().sum::<f64>() / advantage.len() as f64;
    advantage.iter().map(|a| value + a - mean).collect()
}

/// Lowest index of the maximum.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}
