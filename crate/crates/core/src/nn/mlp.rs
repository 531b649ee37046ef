use std::sync::atomic::{AtomicU64, Ordering};

use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};

use super::activation::{softmax_in_place, Activation, OutputActivation};
use crate::rng::GaussianSampler;
use crate::{Error, Result};

/// Every parameter state gets a process-unique id so a [`ForwardCache`] can
/// tell whether it still matches the network it is handed back to.
static NEXT_VERSION: AtomicU64 = AtomicU64::new(1);

fn fresh_version() -> u64 {
    NEXT_VERSION.fetch_add(1, Ordering::Relaxed)
}

/// Gaussian initialisation of every weight and bias.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitSpec {
    pub mean: f64,
    pub std: f64,
    pub seed: u64,
}

impl InitSpec {
    pub fn new(std: f64, seed: u64) -> Self {
        Self {
            mean: 0.0,
            std,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    /// Shape `(out_dim, in_dim)`.
    pub weights: Array2<f64>,
    pub biases: Array1<f64>,
}

impl Layer {
    pub fn in_dim(&self) -> usize {
        self.weights.ncols()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.nrows()
    }

    fn param_count(&self) -> usize {
        self.weights.len() + self.biases.len()
    }
}

/// Dense feed-forward network `x -> Υ(x)`.
///
/// Hidden layers share one activation; the last layer is either affine
/// (`Identity`) or followed by a softmax.
#[derive(Debug, Clone)]
pub struct Mlp {
    widths: Vec<usize>,
    layers: Vec<Layer>,
    hidden: Activation,
    output: OutputActivation,
    version: u64,
}

/// Intermediate values of a forward pass, consumed by [`Mlp::backprop`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    version: u64,
    inputs: Array2<f64>,
    pre: Vec<Array2<f64>>,
    post: Vec<Array2<f64>>,
}

impl ForwardCache {
    /// Network outputs, shape `(batch, out_dim)`.
    pub fn outputs(&self) -> &Array2<f64> {
        self.post.last().expect("network has at least one layer")
    }

    pub fn into_outputs(mut self) -> Array2<f64> {
        self.post.pop().expect("network has at least one layer")
    }

    pub fn batch_size(&self) -> usize {
        self.inputs.nrows()
    }
}

/// Gradient of a scalar loss with respect to every network parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGrad {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

fn validate_widths(widths: &[usize]) -> Result<()> {
    if widths.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least input and output widths, got {widths:?}"
        )));
    }
    if widths.contains(&0) {
        return Err(Error::InvalidArgument(format!(
            "layer widths must be positive, got {widths:?}"
        )));
    }
    Ok(())
}

impl Mlp {
    /// Builds a network whose parameters are i.i.d. `Normal(mean, std)`,
    /// drawn layer by layer (weights row-major, then biases).
    pub fn new(
        widths: &[usize],
        hidden: Activation,
        output: OutputActivation,
        init: &InitSpec,
    ) -> Result<Self> {
        validate_widths(widths)?;
        if !(init.std > 0.0 && init.std.is_finite()) || !init.mean.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "init std must be positive and finite, got {}",
                init.std
            )));
        }
        let mut sampler = GaussianSampler::new(init.seed);
        let layers = widths
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let weights = Array2::from_shape_simple_fn((fan_out, fan_in), || {
                    sampler.normal(init.mean, init.std)
                });
                let biases = Array1::from_shape_simple_fn(fan_out, || {
                    sampler.normal(init.mean, init.std)
                });
                Layer { weights, biases }
            })
            .collect();
        Ok(Self {
            widths: widths.to_vec(),
            layers,
            hidden,
            output,
            version: fresh_version(),
        })
    }

    /// All weights and biases zero.
    pub fn zeros(widths: &[usize], hidden: Activation, output: OutputActivation) -> Result<Self> {
        validate_widths(widths)?;
        let layers = widths
            .windows(2)
            .map(|w| Layer {
                weights: Array2::zeros((w[1], w[0])),
                biases: Array1::zeros(w[1]),
            })
            .collect();
        Ok(Self {
            widths: widths.to_vec(),
            layers,
            hidden,
            output,
            version: fresh_version(),
        })
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn input_dim(&self) -> usize {
        self.widths[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.widths.last().unwrap()
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn hidden_activation(&self) -> Activation {
        self.hidden
    }

    pub fn output_activation(&self) -> OutputActivation {
        self.output
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Layer::param_count).sum()
    }

    fn locate(&self, mut index: usize) -> Option<(usize, usize)> {
        for (l, layer) in self.layers.iter().enumerate() {
            if index < layer.param_count() {
                return Some((l, index));
            }
            index -= layer.param_count();
        }
        None
    }

    /// Parameter at flat index `index`.
    pub fn param(&self, index: usize) -> Option<f64> {
        let (l, i) = self.locate(index)?;
        let layer = &self.layers[l];
        let nw = layer.weights.len();
        Some(if i < nw {
            layer.weights.as_slice().unwrap()[i]
        } else {
            layer.biases[i - nw]
        })
    }

    pub fn set_param(&mut self, index: usize, value: f64) -> Result<()> {
        let (l, i) = self.locate(index).ok_or_else(|| {
            Error::InvalidArgument(format!("parameter index {index} out of range"))
        })?;
        let layer = &mut self.layers[l];
        let nw = layer.weights.len();
        if i < nw {
            layer.weights.as_slice_mut().unwrap()[i] = value;
        } else {
            layer.biases[i - nw] = value;
        }
        self.version = fresh_version();
        Ok(())
    }

    pub fn params_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for layer in &self.layers {
            out.extend(layer.weights.iter());
            out.extend(layer.biases.iter());
        }
        out
    }

    /// Mutable access to one layer. Invalidates outstanding forward caches.
    pub fn layer_mut(&mut self, index: usize) -> &mut Layer {
        self.version = fresh_version();
        &mut self.layers[index]
    }

    pub fn all_finite(&self) -> bool {
        self.layers.iter().all(|l| {
            l.weights.iter().all(|v| v.is_finite()) && l.biases.iter().all(|v| v.is_finite())
        })
    }

    /// Evaluates the network on a batch of inputs with shape `(batch, input_dim)`.
    pub fn forward(&self, xs: ArrayView2<'_, f64>) -> Result<ForwardCache> {
        if xs.ncols() != self.input_dim() {
            return Err(Error::Shape(format!(
                "input has {} columns, network expects {}",
                xs.ncols(),
                self.input_dim()
            )));
        }
        let last = self.layers.len() - 1;
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut post: Vec<Array2<f64>> = Vec::with_capacity(self.layers.len());
        for (l, layer) in self.layers.iter().enumerate() {
            let input = if l == 0 { xs } else { post[l - 1].view() };
            let mut z = input.dot(&layer.weights.t());
            z += &layer.biases;
            let a = if l < last {
                let act = self.hidden;
                z.mapv(|v| act.apply(v))
            } else {
                match self.output {
                    OutputActivation::Identity => z.clone(),
                    OutputActivation::Softmax => {
                        let mut p = z.clone();
                        for row in p.rows_mut() {
                            softmax_in_place(row);
                        }
                        p
                    }
                }
            };
            pre.push(z);
            post.push(a);
        }
        Ok(ForwardCache {
            version: self.version,
            inputs: xs.to_owned(),
            pre,
            post,
        })
    }

    /// Outputs only.
    pub fn predict(&self, xs: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        Ok(self.forward(xs)?.into_outputs())
    }

    /// Reverse-mode gradient of a scalar loss, given `∂loss/∂outputs` with
    /// shape `(batch, output_dim)`. When the output is a softmax, the seed is
    /// taken with respect to the probabilities and chained through the softmax
    /// Jacobian here.
    pub fn backprop(
        &self,
        cache: &ForwardCache,
        loss_grad: ArrayView2<'_, f64>,
    ) -> Result<ParamGrad> {
        if cache.version != self.version || cache.pre.len() != self.layers.len() {
            return Err(Error::StaleCache);
        }
        let expected = (cache.batch_size(), self.output_dim());
        if loss_grad.dim() != expected {
            return Err(Error::Shape(format!(
                "loss gradient has shape {:?}, expected {:?}",
                loss_grad.dim(),
                expected
            )));
        }

        let mut delta = match self.output {
            OutputActivation::Identity => loss_grad.to_owned(),
            OutputActivation::Softmax => {
                let probs = cache.outputs();
                let mut d = loss_grad.to_owned();
                for (mut row, p) in d.rows_mut().into_iter().zip(probs.rows()) {
                    let s = row.dot(&p);
                    Zip::from(&mut row).and(&p).for_each(|g, &pi| *g = pi * (*g - s));
                }
                d
            }
        };

        let n_layers = self.layers.len();
        let mut weights = vec![Array2::zeros((0, 0)); n_layers];
        let mut biases = vec![Array1::zeros(0); n_layers];
        for l in (0..n_layers).rev() {
            let input = if l == 0 {
                cache.inputs.view()
            } else {
                cache.post[l - 1].view()
            };
            weights[l] = delta.t().dot(&input);
            biases[l] = delta.sum_axis(Axis(0));
            if l > 0 {
                let mut upstream = delta.dot(&self.layers[l].weights);
                let act = self.hidden;
                Zip::from(&mut upstream)
                    .and(&cache.pre[l - 1])
                    .and(&cache.post[l - 1])
                    .for_each(|g, &z, &a| *g *= act.derivative(z, a));
                delta = upstream;
            }
        }
        Ok(ParamGrad { weights, biases })
    }

    /// Plain gradient descent, `θ ← θ − lr·∂L/∂θ`.
    ///
    /// Returns [`Error::NonFinite`] if any parameter is NaN or infinite after
    /// the update; the network is left in that state for inspection.
    pub fn sgd_step(&mut self, grad: &ParamGrad, lr: f64) -> Result<()> {
        if !(lr > 0.0 && lr.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "learning rate must be positive, got {lr}"
            )));
        }
        if !grad.is_congruent(self) {
            return Err(Error::Shape(
                "gradient shapes do not match the network".into(),
            ));
        }
        for (layer, (gw, gb)) in self
            .layers
            .iter_mut()
            .zip(grad.weights.iter().zip(&grad.biases))
        {
            layer.weights.scaled_add(-lr, gw);
            layer.biases.scaled_add(-lr, gb);
        }
        self.version = fresh_version();
        if !self.all_finite() {
            return Err(Error::NonFinite("network parameter after update".into()));
        }
        Ok(())
    }
}

impl ParamGrad {
    pub fn zeros_like(mlp: &Mlp) -> Self {
        Self {
            weights: mlp
                .layers
                .iter()
                .map(|l| Array2::zeros(l.weights.raw_dim()))
                .collect(),
            biases: mlp
                .layers
                .iter()
                .map(|l| Array1::zeros(l.biases.raw_dim()))
                .collect(),
        }
    }

    pub fn is_congruent(&self, mlp: &Mlp) -> bool {
        self.weights.len() == mlp.layers.len()
            && self.biases.len() == mlp.layers.len()
            && mlp.layers.iter().enumerate().all(|(l, layer)| {
                self.weights[l].dim() == layer.weights.dim()
                    && self.biases[l].len() == layer.biases.len()
            })
    }

    pub fn len(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum::<usize>()
            + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Same ordering as [`Mlp::params_flat`].
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend(w.iter());
            out.extend(b.iter());
        }
        out
    }

    pub fn get(&self, mut index: usize) -> Option<f64> {
        for (w, b) in self.weights.iter().zip(&self.biases) {
            if index < w.len() {
                return w.iter().nth(index).copied();
            }
            index -= w.len();
            if index < b.len() {
                return Some(b[index]);
            }
            index -= b.len();
        }
        None
    }

    pub fn norm(&self) -> f64 {
        self.weights
            .iter()
            .flat_map(|w| w.iter())
            .chain(self.biases.iter().flat_map(|b| b.iter()))
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }

    pub fn add_assign(&mut self, other: &ParamGrad) {
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            *a += b;
        }
        for (a, b) in self.biases.iter_mut().zip(&other.biases) {
            *a += b;
        }
    }
}
