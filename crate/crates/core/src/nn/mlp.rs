use rand::Rng;

use super::NnError;

/// A fully connected ReLU network with a linear output layer.
///
/// All parameters live in one flat vector. Layer `l` occupies a weight
/// block of `sizes[l + 1] × sizes[l]` entries stored row-major (one row per
/// output unit) followed by `sizes[l + 1]` biases. The gradient accumulator
/// has exactly the same layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    sizes: Vec<usize>,
    params: Vec<f64>,
    grads: Vec<f64>,
    /// Start of each layer's weight block.
    offsets: Vec<usize>,
}

/// Intermediate values of one forward pass, kept for the backward pass.
#[derive(Debug, Clone)]
pub struct Trace {
    /// `activations[0]` is the input, `activations[l + 1]` the output of
    /// layer `l` (after ReLU for hidden layers).
    activations: Vec<Vec<f64>>,
}

impl Trace {
    pub fn output(&self) -> &[f64] {
        self.activations.last().expect("trace has an input")
    }

    pub fn hidden(&self, layer: usize) -> &[f64] {
        &self.activations[layer + 1]
    }
}

fn layout(sizes: &[usize]) -> (Vec<usize>, usize) {
    assert!(sizes.len() >= 2, "a network needs at least input and output sizes");
    assert!(sizes.iter().all(|&s| s > 0), "layer sizes must be positive");
    let mut offsets = Vec::with_capacity(sizes.len() - 1);
    let mut total = 0;
    for w in sizes.windows(2) {
        offsets.push(total);
        total += w[0] * w[1] + w[1];
    }
    (offsets, total)
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

impl Mlp {
    pub fn zeros(sizes: &[usize]) -> Self {
        let (offsets, total) = layout(sizes);
        Self {
            sizes: sizes.to_vec(),
            params: vec![0.0; total],
            grads: vec![0.0; total],
            offsets,
        }
    }

    /// Weights uniform in `±sqrt(6 / (fan_in + fan_out))`, biases zero.
    pub fn glorot<R: Rng + ?Sized>(sizes: &[usize], rng: &mut R) -> Self {
        let mut net = Self::zeros(sizes);
        for l in 0..net.num_layers() {
            let limit = (6.0 / (sizes[l] + sizes[l + 1]) as f64).sqrt();
            for w in net.weights_mut(l) {
                *w = rng.random_range(-limit..limit);
            }
        }
        net
    }

    /// Rebuilds a network from a flat parameter vector.
    pub fn from_params(sizes: &[usize], params: Vec<f64>) -> Option<Self> {
        let (offsets, total) = layout(sizes);
        (params.len() == total).then(|| Self {
            sizes: sizes.to_vec(),
            grads: vec![0.0; total],
            params,
            offsets,
        })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn num_layers(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn grads(&self) -> &[f64] {
        &self.grads
    }

    pub fn grads_mut(&mut self) -> &mut [f64] {
        &mut self.grads
    }

    /// Simultaneous access for optimizer steps.
    pub fn params_and_grads_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        (&mut self.params, &mut self.grads)
    }

    pub fn zero_grads(&mut self) {
        self.grads.fill(0.0);
    }

    fn weight_range(&self, l: usize) -> std::ops::Range<usize> {
        let start = self.offsets[l];
        start..start + self.sizes[l] * self.sizes[l + 1]
    }

    fn bias_range(&self, l: usize) -> std::ops::Range<usize> {
        let start = self.offsets[l] + self.sizes[l] * self.sizes[l + 1];
        start..start + self.sizes[l + 1]
    }

    pub fn weights(&self, l: usize) -> &[f64] {
        &self.params[self.weight_range(l)]
    }

    pub fn weights_mut(&mut self, l: usize) -> &mut [f64] {
        let r = self.weight_range(l);
        &mut self.params[r]
    }

    pub fn biases(&self, l: usize) -> &[f64] {
        &self.params[self.bias_range(l)]
    }

    pub fn biases_mut(&mut self, l: usize) -> &mut [f64] {
        let r = self.bias_range(l);
        &mut self.params[r]
    }

    fn check_input(&self, x: &[f64]) -> Result<(), NnError> {
        if x.len() != self.sizes[0] {
            return Err(NnError::InputLength {
                expected: self.sizes[0],
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(NnError::NonFiniteInput);
        }
        Ok(())
    }

    fn layer_forward(&self, l: usize, input: &[f64], out: &mut Vec<f64>) {
        let n_in = self.sizes[l];
        let w = self.weights(l);
        let b = self.biases(l);
        let hidden = l + 1 < self.num_layers();
        out.clear();
        out.extend(w.chunks_exact(n_in).zip(b).map(|(row, &bias)| {
            let z = dot(row, input) + bias;
            if hidden {
                z.max(0.0)
            } else {
                z
            }
        }));
    }

    /// Raw network output (logits for an actor, the value for a critic).
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>, NnError> {
        self.check_input(x)?;
        let mut cur = x.to_vec();
        let mut next = Vec::new();
        for l in 0..self.num_layers() {
            self.layer_forward(l, &cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(cur)
    }

    pub fn forward_trace(&self, x: &[f64]) -> Result<Trace, NnError> {
        self.check_input(x)?;
        let mut activations = Vec::with_capacity(self.sizes.len());
        activations.push(x.to_vec());
        for l in 0..self.num_layers() {
            let mut out = Vec::with_capacity(self.sizes[l + 1]);
            self.layer_forward(l, &activations[l], &mut out);
            activations.push(out);
        }
        Ok(Trace { activations })
    }

    /// Adds `∂L/∂θ` to the accumulators given `∂L/∂output` for the pass
    /// recorded in `trace`.
    ///
    /// ReLU is treated as having zero derivative at a pre-activation of
    /// exactly zero.
    pub fn backward(&mut self, trace: &Trace, d_output: &[f64]) {
        let n_layers = self.num_layers();
        assert_eq!(d_output.len(), self.sizes[n_layers]);
        let mut delta = d_output.to_vec();
        for l in (0..n_layers).rev() {
            let n_in = self.sizes[l];
            let input = &trace.activations[l];
            let wr = self.weight_range(l);
            let br = self.bias_range(l);
            for (g, d) in self.grads[br].iter_mut().zip(&delta) {
                *g += d;
            }
            for (g_row, &d) in self.grads[wr.clone()].chunks_exact_mut(n_in).zip(&delta) {
                if d != 0.0 {
                    for (g, &a) in g_row.iter_mut().zip(input) {
                        *g += d * a;
                    }
                }
            }
            if l == 0 {
                break;
            }
            let mut d_in = vec![0.0; n_in];
            for (row, &d) in self.params[wr].chunks_exact(n_in).zip(&delta) {
                if d != 0.0 {
                    for (acc, &w) in d_in.iter_mut().zip(row) {
                        *acc += d * w;
                    }
                }
            }
            // input[i] is the ReLU output of the previous layer; zero means inactive
            for (acc, &a) in d_in.iter_mut().zip(input) {
                if a <= 0.0 {
                    *acc = 0.0;
                }
            }
            delta = d_in;
        }
    }
}
