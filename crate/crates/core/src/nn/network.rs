use alloc::format;
use alloc::vec::Vec;

use crate::error::{dim, Error, Result};
use crate::math;
use crate::rng::Rng;
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Activation {
    Linear,
    Relu,
    Tanh,
    Sigmoid,
    /// Row-wise softmax; only allowed on the last layer.
    Softmax,
}

impl Activation {
    pub fn code(self) -> u8 {
        match self {
            Activation::Linear => 0,
            Activation::Relu => 1,
            Activation::Tanh => 2,
            Activation::Sigmoid => 3,
            Activation::Softmax => 4,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Some(match code {
            0 => Activation::Linear,
            1 => Activation::Relu,
            2 => Activation::Tanh,
            3 => Activation::Sigmoid,
            4 => Activation::Softmax,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Linear => "linear",
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
            Activation::Sigmoid => "sigmoid",
            Activation::Softmax => "softmax",
        }
    }

    fn apply(self, z: &mut Tensor) {
        match self {
            Activation::Linear => {}
            Activation::Relu => z.data_mut().iter_mut().for_each(|x| *x = x.max(0.0)),
            Activation::Tanh => z.data_mut().iter_mut().for_each(|x| *x = math::tanh(*x)),
            Activation::Sigmoid => z
                .data_mut()
                .iter_mut()
                .for_each(|x| *x = 1.0 / (1.0 + math::exp(-*x))),
            Activation::Softmax => {
                for i in 0..z.rows() {
                    softmax_in_place(z.row_mut(i));
                }
            }
        }
    }

    /// Elementwise derivative expressed through the output `y`.
    fn slope(self, y: f64) -> f64 {
        match self {
            Activation::Linear => 1.0,
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - y * y,
            Activation::Sigmoid => y * (1.0 - y),
            Activation::Softmax => unreachable!("softmax has no elementwise slope"),
        }
    }

    /// Elementwise second derivative expressed through the output `y`.
    fn curvature(self, y: f64) -> f64 {
        match self {
            Activation::Linear | Activation::Relu => 0.0,
            Activation::Tanh => -2.0 * y * (1.0 - y * y),
            Activation::Sigmoid => y * (1.0 - y) * (1.0 - 2.0 * y),
            Activation::Softmax => unreachable!("softmax has no elementwise curvature"),
        }
    }
}

/// Numerically stable softmax (row max subtracted before exponentiation).
pub(crate) fn softmax_in_place(row: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for x in row.iter_mut() {
        *x = math::exp(*x - max);
        total += *x;
    }
    for x in row.iter_mut() {
        *x /= total;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    /// `[out x in]`
    pub weight: Tensor,
    /// `[out]`
    pub bias: Tensor,
    pub activation: Activation,
}

impl Layer {
    /// Glorot-uniform weights, zero bias.
    pub fn xavier(input: usize, output: usize, activation: Activation, rng: &mut Rng) -> Self {
        let limit = math::sqrt(6.0 / (input + output) as f64);
        let w = (0..input * output)
            .map(|_| rng.uniform_range(-limit, limit))
            .collect();
        Self {
            weight: Tensor::new(alloc::vec![output, input], w).expect("sized"),
            bias: Tensor::zeros(&[output]),
            activation,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.weight.shape()[1]
    }

    pub fn output_dim(&self) -> usize {
        self.weight.shape()[0]
    }

    fn affine(&self, x: &Tensor) -> Tensor {
        let (n, d_in, d_out) = (x.rows(), self.input_dim(), self.output_dim());
        let w = self.weight.data();
        let b = self.bias.data();
        let mut out = Vec::with_capacity(n * d_out);
        for i in 0..n {
            let xi = x.row(i);
            for o in 0..d_out {
                let wo = &w[o * d_in..(o + 1) * d_in];
                out.push(b[o] + math::dot(wo, xi));
            }
        }
        Tensor::matrix(n, d_out, out).expect("sized")
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Network {
    pub layers: Vec<Layer>,
}

impl Network {
    /// Validate the chaining and activation rules.
    pub fn from_layers(layers: Vec<Layer>) -> Result<Self> {
        for (i, l) in layers.iter().enumerate() {
            if l.bias.len() != l.output_dim() || l.weight.shape().len() != 2 {
                return Err(Error::Consistency(format!("layer {i}: bias/weight shapes")));
            }
            if l.activation == Activation::Softmax && i + 1 != layers.len() {
                return Err(Error::InvalidArgument(format!(
                    "softmax on layer {i} is not the final layer"
                )));
            }
            if i > 0 && layers[i - 1].output_dim() != l.input_dim() {
                return Err(dim(
                    format!("layer {i} input"),
                    layers[i - 1].output_dim(),
                    l.input_dim(),
                ));
            }
        }
        Ok(Self { layers })
    }

    /// Fully connected net with `hidden` activation between layers and
    /// `output` on the last layer. `sizes` lists every width, input first.
    pub fn mlp(sizes: &[usize], hidden: Activation, output: Activation, rng: &mut Rng) -> Self {
        let n = sizes.len().saturating_sub(1);
        let layers = (0..n)
            .map(|i| {
                let act = if i + 1 == n { output } else { hidden };
                Layer::xavier(sizes[i], sizes[i + 1], act, rng)
            })
            .collect();
        Self::from_layers(layers).expect("mlp construction is well formed")
    }

    pub fn input_dim(&self) -> Option<usize> {
        self.layers.first().map(Layer::input_dim)
    }

    pub fn output_dim(&self) -> Option<usize> {
        self.layers.last().map(Layer::output_dim)
    }

    pub fn output_activation(&self) -> Option<Activation> {
        self.layers.last().map(|l| l.activation)
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.weight.len() + l.bias.len()).sum()
    }

    /// Mutable view over every parameter, layer by layer, weights before bias.
    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.weight.data_mut().iter_mut().chain(l.bias.data_mut().iter_mut()))
    }

    pub fn params(&self) -> impl Iterator<Item = &f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weight.data().iter().chain(l.bias.data().iter()))
    }

    /// Clamp every weight and bias into `[-c, c]`.
    pub fn clip(&mut self, c: f64) {
        self.params_mut().for_each(|p| *p = p.clamp(-c, c));
    }

    /// Forward pass returning only the final output.
    pub fn predict(&self, batch: &Tensor) -> Result<Tensor> {
        Ok(forward(self, batch)?.into_output())
    }
}

/// Every layer's post-activation output for one batch.
#[derive(Debug, Clone)]
pub struct Trace {
    pub input: Tensor,
    pub outputs: Vec<Tensor>,
}

impl Trace {
    pub fn output(&self) -> &Tensor {
        self.outputs.last().unwrap_or(&self.input)
    }

    pub fn into_output(mut self) -> Tensor {
        self.outputs.pop().unwrap_or(self.input)
    }

    fn layer_input(&self, l: usize) -> &Tensor {
        if l == 0 {
            &self.input
        } else {
            &self.outputs[l - 1]
        }
    }
}

pub fn forward(net: &Network, batch: &Tensor) -> Result<Trace> {
    if let Some(d) = net.input_dim() {
        if batch.shape().len() != 2 || batch.cols() != d {
            return Err(dim("layer 0 input", d, batch.cols()));
        }
    }
    let mut outputs = Vec::with_capacity(net.layers.len());
    for layer in &net.layers {
        let x = outputs.last().unwrap_or(batch);
        let mut z = layer.affine(x);
        layer.activation.apply(&mut z);
        outputs.push(z);
    }
    Ok(Trace {
        input: batch.clone(),
        outputs,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrad {
    pub weight: Tensor,
    pub bias: Tensor,
}

/// Parameter gradients mirroring a [`Network`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGrad>,
}

impl Gradients {
    pub fn zeros_like(net: &Network) -> Self {
        Self {
            layers: net
                .layers
                .iter()
                .map(|l| LayerGrad {
                    weight: Tensor::zeros(l.weight.shape()),
                    bias: Tensor::zeros(l.bias.shape()),
                })
                .collect(),
        }
    }

    pub fn add(&mut self, other: &Gradients) -> Result<()> {
        if self.layers.len() != other.layers.len() {
            return Err(Error::Consistency("gradient layer counts differ".into()));
        }
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.weight.add_assign(&b.weight)?;
            a.bias.add_assign(&b.bias)?;
        }
        Ok(())
    }

    pub fn scale(&mut self, s: f64) {
        for l in &mut self.layers {
            l.weight.scale(s);
            l.bias.scale(s);
        }
    }

    pub fn values(&self) -> impl Iterator<Item = &f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weight.data().iter().chain(l.bias.data().iter()))
    }

    /// Check that shapes mirror `net`.
    pub fn check_against(&self, net: &Network) -> Result<()> {
        if self.layers.len() != net.layers.len() {
            return Err(Error::Consistency(format!(
                "{} gradient layers for {} network layers",
                self.layers.len(),
                net.layers.len()
            )));
        }
        for (i, (g, l)) in self.layers.iter().zip(&net.layers).enumerate() {
            if g.weight.shape() != l.weight.shape() || g.bias.shape() != l.bias.shape() {
                return Err(Error::Consistency(format!("layer {i} gradient shape")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Backward {
    pub params: Gradients,
    pub input: Tensor,
}

fn check_trace(net: &Network, trace: &Trace) -> Result<()> {
    if trace.outputs.len() != net.layers.len() {
        return Err(Error::Consistency(format!(
            "trace has {} outputs for {} layers",
            trace.outputs.len(),
            net.layers.len()
        )));
    }
    for (i, (out, l)) in trace.outputs.iter().zip(&net.layers).enumerate() {
        if out.cols() != l.output_dim() || out.rows() != trace.input.rows() {
            return Err(Error::Consistency(format!("trace output {i} does not match layer")));
        }
    }
    Ok(())
}

/// Gradient w.r.t. the pre-activation given the gradient w.r.t. the output.
fn activation_backward(act: Activation, y: &Tensor, upstream: &Tensor) -> Tensor {
    let mut g = upstream.clone();
    match act {
        Activation::Softmax => {
            for i in 0..y.rows() {
                let yr = y.row(i);
                let s = math::dot(yr, upstream.row(i));
                for (gj, yj) in g.row_mut(i).iter_mut().zip(yr) {
                    *gj = yj * (*gj - s);
                }
            }
        }
        _ => {
            for (gj, &yj) in g.data_mut().iter_mut().zip(y.data()) {
                *gj *= act.slope(yj);
            }
        }
    }
    g
}

/// `delta [n x out]`, `x [n x in]` -> (`dW [out x in]`, `db [out]`).
fn accumulate_param_grads(delta: &Tensor, x: &Tensor, into: &mut LayerGrad) {
    let (n, d_out, d_in) = (delta.rows(), delta.cols(), x.cols());
    let gw = into.weight.data_mut();
    for i in 0..n {
        let di = delta.row(i);
        let xi = x.row(i);
        for o in 0..d_out {
            let d = di[o];
            if d == 0.0 {
                continue;
            }
            let row = &mut gw[o * d_in..(o + 1) * d_in];
            for (g, xv) in row.iter_mut().zip(xi) {
                *g += d * xv;
            }
        }
    }
    let gb = into.bias.data_mut();
    for i in 0..n {
        for (g, d) in gb.iter_mut().zip(delta.row(i)) {
            *g += d;
        }
    }
}

/// `delta [n x out]` times `W [out x in]`.
fn times_weight(delta: &Tensor, layer: &Layer) -> Tensor {
    let (n, d_out, d_in) = (delta.rows(), layer.output_dim(), layer.input_dim());
    let w = layer.weight.data();
    let mut out = alloc::vec![0.0; n * d_in];
    for i in 0..n {
        let di = delta.row(i);
        let oi = &mut out[i * d_in..(i + 1) * d_in];
        for o in 0..d_out {
            let d = di[o];
            if d == 0.0 {
                continue;
            }
            for (acc, wv) in oi.iter_mut().zip(&w[o * d_in..(o + 1) * d_in]) {
                *acc += d * wv;
            }
        }
    }
    Tensor::matrix(n, d_in, out).expect("sized")
}

/// `x [n x in]` times `W^T` without bias.
fn times_weight_t(x: &Tensor, layer: &Layer) -> Tensor {
    let (n, d_out, d_in) = (x.rows(), layer.output_dim(), layer.input_dim());
    let w = layer.weight.data();
    let mut out = Vec::with_capacity(n * d_out);
    for i in 0..n {
        let xi = x.row(i);
        for o in 0..d_out {
            out.push(math::dot(&w[o * d_in..(o + 1) * d_in], xi));
        }
    }
    Tensor::matrix(n, d_out, out).expect("sized")
}

/// Reverse-mode gradients of the scalar `sum(output * output_grad)`.
pub fn backward(net: &Network, trace: &Trace, output_grad: &Tensor) -> Result<Backward> {
    check_trace(net, trace)?;
    let out = trace.output();
    if output_grad.shape() != out.shape() {
        return Err(Error::Consistency(format!(
            "output gradient shape {:?} vs output {:?}",
            output_grad.shape(),
            out.shape()
        )));
    }
    let mut grads = Gradients::zeros_like(net);
    let mut upstream = output_grad.clone();
    for l in (0..net.layers.len()).rev() {
        let layer = &net.layers[l];
        let delta = activation_backward(layer.activation, &trace.outputs[l], &upstream);
        accumulate_param_grads(&delta, trace.layer_input(l), &mut grads.layers[l]);
        upstream = times_weight(&delta, layer);
    }
    Ok(Backward {
        params: grads,
        input: upstream,
    })
}

/// Intermediate state of an input-gradient computation.
pub struct InputGradient {
    pub trace: Trace,
    /// Gradient of `sum(output * seed)` w.r.t. every layer output, index `l`
    /// holding the gradient at output `l`; entry 0 of `at_input` is the input.
    upstream: Vec<Tensor>,
    /// `d(sum(output*seed)) / d(input)`.
    pub gradient: Tensor,
}

fn no_softmax(net: &Network) -> Result<()> {
    if net.layers.iter().any(|l| l.activation == Activation::Softmax) {
        return Err(Error::InvalidArgument(
            "input-gradient derivatives are not defined for softmax layers".into(),
        ));
    }
    Ok(())
}

/// Gradient of `sum(output * seed)` with respect to the input batch.
pub fn input_gradient(net: &Network, batch: &Tensor, seed: &Tensor) -> Result<InputGradient> {
    no_softmax(net)?;
    let trace = forward(net, batch)?;
    if seed.shape() != trace.output().shape() {
        return Err(Error::Consistency("seed shape differs from output".into()));
    }
    let n_layers = net.layers.len();
    let mut upstream = alloc::vec![Tensor::zeros(&[0]); n_layers];
    let mut g = seed.clone();
    for l in (0..n_layers).rev() {
        upstream[l] = g.clone();
        let delta = activation_backward(net.layers[l].activation, &trace.outputs[l], &g);
        g = times_weight(&delta, &net.layers[l]);
    }
    Ok(InputGradient {
        trace,
        upstream,
        gradient: g,
    })
}

/// Parameter gradient of `sum(cotangent * input_gradient)`, where the input
/// gradient is that of `sum(output * seed)` and the cotangent is held fixed.
///
/// This is the second-order term needed by gradient penalties.
pub fn input_gradient_vjp(net: &Network, ig: &InputGradient, cotangent: &Tensor) -> Result<Gradients> {
    no_softmax(net)?;
    if cotangent.shape() != ig.gradient.shape() {
        return Err(Error::Consistency("cotangent shape differs from input gradient".into()));
    }
    let n_layers = net.layers.len();
    let mut grads = Gradients::zeros_like(net);
    // Adjoint of the backward sweep, walking layers input to output.
    let mut injected: Vec<Tensor> = Vec::with_capacity(n_layers);
    let mut bar_gamma = cotangent.clone();
    for l in 0..n_layers {
        let layer = &net.layers[l];
        let y = &ig.trace.outputs[l];
        let gamma = &ig.upstream[l];
        let mut delta = gamma.clone();
        for (d, &yv) in delta.data_mut().iter_mut().zip(y.data()) {
            *d *= layer.activation.slope(yv);
        }
        // gamma_{l-1} = delta_l W_l  =>  dW += delta^T bar_gamma_{l-1}
        accumulate_outer(&delta, &bar_gamma, &mut grads.layers[l].weight);
        let bar_delta = times_weight_t(&bar_gamma, layer);
        let mut next_bar_gamma = bar_delta.clone();
        let mut a_bar = bar_delta;
        for (((ng, ab), &yv), &gv) in next_bar_gamma
            .data_mut()
            .iter_mut()
            .zip(a_bar.data_mut().iter_mut())
            .zip(y.data())
            .zip(gamma.data())
        {
            let s = layer.activation.slope(yv);
            let c = layer.activation.curvature(yv);
            *ab *= gv * c;
            *ng *= s;
        }
        injected.push(a_bar);
        bar_gamma = next_bar_gamma;
    }
    // Adjoint of the forward sweep with the injected pre-activation terms.
    let mut bar_h: Option<Tensor> = None;
    for l in (0..n_layers).rev() {
        let layer = &net.layers[l];
        let y = &ig.trace.outputs[l];
        let mut t = injected[l].clone();
        if let Some(bh) = &bar_h {
            for ((tv, &bv), &yv) in t.data_mut().iter_mut().zip(bh.data()).zip(y.data()) {
                *tv += bv * layer.activation.slope(yv);
            }
        }
        accumulate_param_grads(&t, ig.trace.layer_input(l), &mut grads.layers[l]);
        bar_h = Some(times_weight(&t, layer));
    }
    Ok(grads)
}

/// `into[o, j] += sum_n a[n, o] * b[n, j]`.
fn accumulate_outer(a: &Tensor, b: &Tensor, into: &mut Tensor) {
    let (n, d_out, d_in) = (a.rows(), a.cols(), b.cols());
    let g = into.data_mut();
    for i in 0..n {
        let ai = a.row(i);
        let bi = b.row(i);
        for o in 0..d_out {
            let av = ai[o];
            if av == 0.0 {
                continue;
            }
            for (gv, bv) in g[o * d_in..(o + 1) * d_in].iter_mut().zip(bi) {
                *gv += av * bv;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn single(weight: Vec<f64>, out: usize, inp: usize, act: Activation) -> Network {
        Network::from_layers(vec![Layer {
            weight: Tensor::new(vec![out, inp], weight).unwrap(),
            bias: Tensor::zeros(&[out]),
            activation: act,
        }])
        .unwrap()
    }

    #[test]
    fn identity_layer() {
        let net = single(vec![1.0], 1, 1, Activation::Linear);
        let y = net.predict(&Tensor::matrix(1, 1, vec![3.0]).unwrap()).unwrap();
        assert_eq!(y.data(), &[3.0]);
    }

    #[test]
    fn relu_sign_split() {
        let net = single(vec![1.0, -1.0], 2, 1, Activation::Relu);
        let y = net.predict(&Tensor::matrix(1, 1, vec![2.0]).unwrap()).unwrap();
        assert_eq!(y.data(), &[2.0, 0.0]);
    }

    #[test]
    fn softmax_equal_logits_uniform() {
        let net = single(vec![0.0; 4], 4, 1, Activation::Softmax);
        let y = net.predict(&Tensor::matrix(1, 1, vec![5.0]).unwrap()).unwrap();
        for p in y.data() {
            assert!((p - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn softmax_only_last() {
        let mut rng = Rng::new(0);
        let layers = vec![
            Layer::xavier(2, 3, Activation::Softmax, &mut rng),
            Layer::xavier(3, 1, Activation::Linear, &mut rng),
        ];
        assert!(Network::from_layers(layers).is_err());
    }

    #[test]
    fn dimension_error_names_layer() {
        let net = single(vec![1.0, 1.0], 1, 2, Activation::Linear);
        let err = forward(&net, &Tensor::matrix(1, 3, vec![0.0; 3]).unwrap()).unwrap_err();
        assert!(matches!(err, Error::Dimension { .. }));
        assert!(alloc::format!("{err}").contains("layer 0"));
    }

    #[test]
    fn linear_product_rule() {
        let w = 1.7;
        let net = single(vec![w], 1, 1, Activation::Linear);
        let x = Tensor::matrix(1, 1, vec![2.0]).unwrap();
        let tr = forward(&net, &x).unwrap();
        let b = backward(&net, &tr, &Tensor::filled(&[1, 1], 1.0)).unwrap();
        assert_eq!(b.params.layers[0].weight.data(), &[2.0]);
        assert_eq!(b.input.data(), &[w]);
    }

    #[test]
    fn dead_relu_blocks_gradient() {
        let net = single(vec![1.0], 1, 1, Activation::Relu);
        let x = Tensor::matrix(1, 1, vec![-2.0]).unwrap();
        let tr = forward(&net, &x).unwrap();
        let b = backward(&net, &tr, &Tensor::filled(&[1, 1], 1.0)).unwrap();
        assert_eq!(b.input.data(), &[0.0]);
        assert_eq!(b.params.layers[0].weight.data(), &[0.0]);
    }

    #[test]
    fn mismatched_trace_is_rejected() {
        let mut rng = Rng::new(1);
        let a = Network::mlp(&[2, 3, 1], Activation::Relu, Activation::Linear, &mut rng);
        let b = Network::mlp(&[2, 1], Activation::Relu, Activation::Linear, &mut rng);
        let tr = forward(&b, &Tensor::zeros(&[1, 2])).unwrap();
        assert!(matches!(
            backward(&a, &tr, &Tensor::zeros(&[1, 1])),
            Err(Error::Consistency(_))
        ));
    }

    #[test]
    fn softmax_rows_sum_to_one() {
        let mut rng = Rng::new(5);
        let net = Network::mlp(&[3, 8, 5], Activation::Tanh, Activation::Softmax, &mut rng);
        let x = Tensor::matrix(10, 3, rng.normal_vec(30).into_iter().map(|v| v * 20.0).collect())
            .unwrap();
        let y = net.predict(&x).unwrap();
        for i in 0..10 {
            let s: f64 = y.row(i).iter().sum();
            assert!((s - 1.0).abs() < 1e-9);
            assert!(y.row(i).iter().all(|&p| p > 0.0));
        }
    }

    /// Finite-difference oracle for the second-order term.
    #[test]
    fn input_gradient_vjp_matches_finite_differences() {
        for (seed, act) in [(0u64, Activation::Tanh), (1, Activation::Sigmoid), (2, Activation::Relu)] {
            let mut rng = Rng::new(seed);
            let net = Network::mlp(&[3, 5, 4, 1], act, Activation::Linear, &mut rng);
            let x = Tensor::matrix(4, 3, rng.normal_vec(12)).unwrap();
            let cot = Tensor::matrix(4, 3, rng.normal_vec(12)).unwrap();
            let ones = Tensor::filled(&[4, 1], 1.0);
            let objective = |n: &Network| {
                let ig = input_gradient(n, &x, &ones).unwrap();
                math::dot(ig.gradient.data(), cot.data())
            };
            let ig = input_gradient(&net, &x, &ones).unwrap();
            let analytic = input_gradient_vjp(&net, &ig, &cot).unwrap();
            let flat: Vec<f64> = analytic.values().copied().collect();
            let mut probe = net.clone();
            let count = probe.param_count();
            for p in 0..count {
                let orig = *probe.params_mut().nth(p).unwrap();
                *probe.params_mut().nth(p).unwrap() = orig + 1e-5;
                let up = objective(&probe);
                *probe.params_mut().nth(p).unwrap() = orig - 1e-5;
                let dn = objective(&probe);
                *probe.params_mut().nth(p).unwrap() = orig;
                let fd = (up - dn) / 2e-5;
                let err = (fd - flat[p]).abs() / fd.abs().max(flat[p].abs()).max(1e-6);
                assert!(err < 1e-4, "{act:?} param {p}: fd {fd} analytic {}", flat[p]);
            }
        }
    }
}
