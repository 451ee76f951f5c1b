//! Fixed-architecture dense networks: Tanh MLPs with hand-written reverse
//! mode, Adam, a finite-difference gradient checker and a plain-text tensor
//! checkpoint format.
//!
//! Gradients are summed over the batch; losses own any `1/b` factor.
//! Dense products are explicit loops with a fixed summation order so that a
//! row's output never depends on which other rows share its batch.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use ndarray::{Array1, Array2, ArrayView2};
use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Tanh,
    Identity,
}

impl Activation {
    fn apply(self, v: f64) -> f64 {
        match self {
            Activation::Tanh => v.tanh(),
            Activation::Identity => v,
        }
    }

    /// Derivative expressed through the activation's output.
    fn derivative_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - a * a,
            Activation::Identity => 1.0,
        }
    }
}

/// `out = x Wᵀ + b` with `weight` shaped out×in.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

impl DenseLayer {
    pub fn zeros(input: usize, output: usize) -> Self {
        Self {
            weight: Array2::zeros((output, input)),
            bias: Array1::zeros(output),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.weight.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.weight.nrows()
    }

    fn param_count(&self) -> usize {
        self.weight.len() + self.bias.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub layers: Vec<DenseLayer>,
    /// Applied after every layer but the last.
    pub hidden_activation: Activation,
    pub output_activation: Activation,
}

/// Per-layer gradients, shaped like the network.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientBundle {
    pub layers: Vec<DenseLayer>,
}

impl GradientBundle {
    pub fn zeros_like(mlp: &Mlp) -> Self {
        Self {
            layers: mlp
                .layers
                .iter()
                .map(|l| DenseLayer::zeros(l.input_dim(), l.output_dim()))
                .collect(),
        }
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for l in &self.layers {
            out.extend(l.weight.iter());
            out.extend(l.bias.iter());
        }
        out
    }

    pub fn squared_norm(&self) -> f64 {
        self.layers
            .iter()
            .flat_map(|l| l.weight.iter().chain(l.bias.iter()))
            .map(|g| g * g)
            .sum()
    }

    pub fn scale(&mut self, c: f64) {
        for l in &mut self.layers {
            l.weight *= c;
            l.bias *= c;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weight.iter().chain(l.bias.iter()).all(|g| g.is_finite()))
    }

    pub fn add_assign(&mut self, other: &GradientBundle) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.weight += &b.weight;
            a.bias += &b.bias;
        }
    }
}

/// Rescale a set of gradient bundles so their joint L2 norm is at most `max_norm`.
pub fn clip_global_norm(bundles: &mut [&mut GradientBundle], max_norm: f64) -> f64 {
    let norm = bundles.iter().map(|b| b.squared_norm()).sum::<f64>().sqrt();
    if norm > max_norm && norm > 0.0 {
        let c = max_norm / norm;
        for b in bundles.iter_mut() {
            b.scale(c);
        }
    }
    norm
}

/// Activations kept from a forward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// `inputs[k]` is the input to layer k; the last entry is the network output.
    activations: Vec<Array2<f64>>,
}

/// Xavier-uniform weights in `±√(6/(in+out))`, zero biases.
pub fn init_mlp<R: Rng + ?Sized>(dims: &[usize], output_activation: Activation, rng: &mut R) -> Result<Mlp> {
    if dims.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "an MLP needs at least input and output sizes, got {dims:?}"
        )));
    }
    if dims.iter().any(|&d| d == 0) {
        return Err(Error::InvalidArgument(format!("layer sizes must be >= 1, got {dims:?}")));
    }
    let layers = dims
        .windows(2)
        .map(|w| {
            let (fan_in, fan_out) = (w[0], w[1]);
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            DenseLayer {
                weight: Array2::from_shape_simple_fn((fan_out, fan_in), || rng.random_range(-bound..=bound)),
                bias: Array1::zeros(fan_out),
            }
        })
        .collect();
    Ok(Mlp {
        layers,
        hidden_activation: Activation::Tanh,
        output_activation,
    })
}

fn dense_forward(layer: &DenseLayer, x: ArrayView2<'_, f64>, act: Activation) -> Array2<f64> {
    let (b, _) = x.dim();
    let out_dim = layer.output_dim();
    let mut out = Array2::<f64>::zeros((b, out_dim));
    let w = layer.weight.as_standard_layout();
    for r in 0..b {
        let xr = x.row(r);
        for o in 0..out_dim {
            let wo = w.row(o);
            let mut s = layer.bias[o];
            for (xi, wi) in xr.iter().zip(wo.iter()) {
                s += xi * wi;
            }
            out[[r, o]] = act.apply(s);
        }
    }
    out
}

impl Mlp {
    pub fn input_dim(&self) -> usize {
        self.layers[0].input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("non-empty").output_dim()
    }

    fn activation_of(&self, k: usize) -> Activation {
        if k + 1 == self.layers.len() {
            self.output_activation
        } else {
            self.hidden_activation
        }
    }

    pub fn forward(&self, x: ArrayView2<'_, f64>) -> Result<(Array2<f64>, ForwardCache)> {
        if x.ncols() != self.input_dim() {
            return Err(Error::Shape(format!(
                "input has {} columns, network expects {}",
                x.ncols(),
                self.input_dim()
            )));
        }
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(x.to_owned());
        for (k, layer) in self.layers.iter().enumerate() {
            let next = dense_forward(layer, activations[k].view(), self.activation_of(k));
            activations.push(next);
        }
        let out = activations.last().expect("non-empty").clone();
        Ok((out, ForwardCache { activations }))
    }

    /// Forward pass without keeping a cache.
    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.input_dim() {
            return Err(Error::Shape(format!(
                "input has {} columns, network expects {}",
                x.ncols(),
                self.input_dim()
            )));
        }
        let mut h = x.to_owned();
        for (k, layer) in self.layers.iter().enumerate() {
            h = dense_forward(layer, h.view(), self.activation_of(k));
        }
        Ok(h)
    }

    /// Reverse-mode pass. Returns parameter gradients (summed over the batch)
    /// and the gradient with respect to the input.
    pub fn backward(&self, cache: &ForwardCache, output_grad: ArrayView2<'_, f64>) -> Result<(GradientBundle, Array2<f64>)> {
        if cache.activations.len() != self.layers.len() + 1 {
            return Err(Error::Shape("forward cache does not belong to this network".into()));
        }
        let out = cache.activations.last().expect("non-empty");
        if out.dim() != output_grad.dim() {
            return Err(Error::Shape(format!(
                "output gradient {:?} does not match output {:?}",
                output_grad.dim(),
                out.dim()
            )));
        }
        let b = output_grad.nrows();
        let mut grads = GradientBundle::zeros_like(self);
        let mut upstream = output_grad.to_owned();
        for k in (0..self.layers.len()).rev() {
            let layer = &self.layers[k];
            let input = &cache.activations[k];
            let output = &cache.activations[k + 1];
            if input.ncols() != layer.input_dim() || output.ncols() != layer.output_dim() || input.nrows() != b {
                return Err(Error::Shape("forward cache does not belong to this network".into()));
            }
            let act = self.activation_of(k);
            let mut delta = upstream;
            delta.zip_mut_with(output, |d, &a| *d *= act.derivative_from_output(a));
            let g = &mut grads.layers[k];
            for r in 0..b {
                let dr = delta.row(r);
                let xr = input.row(r);
                for (o, &d) in dr.iter().enumerate() {
                    if d == 0.0 {
                        continue;
                    }
                    g.bias[o] += d;
                    let mut gw = g.weight.row_mut(o);
                    for (gwi, xi) in gw.iter_mut().zip(xr.iter()) {
                        *gwi += d * xi;
                    }
                }
            }
            let mut dx = Array2::<f64>::zeros((b, layer.input_dim()));
            for r in 0..b {
                for (o, &d) in delta.row(r).iter().enumerate() {
                    if d == 0.0 {
                        continue;
                    }
                    let wo = layer.weight.row(o);
                    let mut dxr = dx.row_mut(r);
                    for (dxi, wi) in dxr.iter_mut().zip(wo.iter()) {
                        *dxi += d * wi;
                    }
                }
            }
            upstream = dx;
        }
        Ok((grads, upstream))
    }

    /// Named tensors for checkpointing; biases are stored as 1×out.
    pub fn named_tensors(&self, prefix: &str) -> Vec<(String, Array2<f64>)> {
        let mut out = Vec::new();
        for (k, l) in self.layers.iter().enumerate() {
            out.push((format!("{prefix}.{k}.weight"), l.weight.clone()));
            out.push((
                format!("{prefix}.{k}.bias"),
                l.bias.clone().insert_axis(ndarray::Axis(0)),
            ));
        }
        out
    }

    /// Overwrite parameters from tensors written by [`Mlp::named_tensors`].
    pub fn load_tensors(&mut self, prefix: &str, tensors: &BTreeMap<String, Array2<f64>>) -> Result<()> {
        for (k, l) in self.layers.iter_mut().enumerate() {
            let wname = format!("{prefix}.{k}.weight");
            let bname = format!("{prefix}.{k}.bias");
            let w = tensors.get(&wname).ok_or_else(|| Error::Format(format!("missing tensor {wname}")))?;
            let b = tensors.get(&bname).ok_or_else(|| Error::Format(format!("missing tensor {bname}")))?;
            if w.dim() != l.weight.dim() || b.dim() != (1, l.bias.len()) {
                return Err(Error::Format(format!(
                    "tensor {prefix}.{k} has shape {:?}/{:?}, expected {:?}/(1, {})",
                    w.dim(),
                    b.dim(),
                    l.weight.dim(),
                    l.bias.len()
                )));
            }
            l.weight.assign(w);
            l.bias.assign(&b.row(0));
        }
        Ok(())
    }
}

/// Flat, indexable access to every trainable scalar of a model.
pub trait Parameters {
    fn param_count(&self) -> usize;
    fn param(&self, i: usize) -> f64;
    fn set_param(&mut self, i: usize, v: f64);
}

fn locate(layers: &[DenseLayer], mut i: usize) -> (usize, bool, usize) {
    for (k, l) in layers.iter().enumerate() {
        if i < l.weight.len() {
            return (k, true, i);
        }
        i -= l.weight.len();
        if i < l.bias.len() {
            return (k, false, i);
        }
        i -= l.bias.len();
    }
    panic!("parameter index out of range");
}

impl Parameters for Mlp {
    fn param_count(&self) -> usize {
        self.layers.iter().map(DenseLayer::param_count).sum()
    }

    fn param(&self, i: usize) -> f64 {
        let (k, is_weight, j) = locate(&self.layers, i);
        let l = &self.layers[k];
        if is_weight {
            l.weight[[j / l.input_dim(), j % l.input_dim()]]
        } else {
            l.bias[j]
        }
    }

    fn set_param(&mut self, i: usize, v: f64) {
        let (k, is_weight, j) = locate(&self.layers, i);
        let l = &mut self.layers[k];
        if is_weight {
            let cols = l.input_dim();
            l.weight[[j / cols, j % cols]] = v;
        } else {
            l.bias[j] = v;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AdamState {
    pub first: GradientBundle,
    pub second: GradientBundle,
    pub step: u64,
    pub config: AdamConfig,
}

impl AdamState {
    pub fn new(mlp: &Mlp, config: AdamConfig) -> Self {
        Self {
            first: GradientBundle::zeros_like(mlp),
            second: GradientBundle::zeros_like(mlp),
            step: 0,
            config,
        }
    }
}

/// One bias-corrected Adam update.
pub fn adam_step(mlp: &mut Mlp, grads: &GradientBundle, state: &mut AdamState) -> Result<()> {
    if grads.layers.len() != mlp.layers.len()
        || grads
            .layers
            .iter()
            .zip(&mlp.layers)
            .any(|(g, l)| g.weight.dim() != l.weight.dim() || g.bias.len() != l.bias.len())
    {
        return Err(Error::Shape("gradient bundle does not match the network".into()));
    }
    if !grads.is_finite() {
        return Err(Error::Numeric("non-finite gradient entries".into()));
    }
    let AdamConfig { lr, beta1, beta2, eps } = state.config;
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - beta1.powi(t);
    let c2 = 1.0 - beta2.powi(t);
    for k in 0..mlp.layers.len() {
        let g = &grads.layers[k];
        let m = &mut state.first.layers[k];
        let v = &mut state.second.layers[k];
        let p = &mut mlp.layers[k];
        let update = |p: &mut f64, m: &mut f64, v: &mut f64, g: f64| {
            *m = beta1 * *m + (1.0 - beta1) * g;
            *v = beta2 * *v + (1.0 - beta2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= lr * m_hat / (v_hat.sqrt() + eps);
        };
        ndarray::Zip::from(&mut p.weight)
            .and(&mut m.weight)
            .and(&mut v.weight)
            .and(&g.weight)
            .for_each(|p, m, v, &g| update(p, m, v, g));
        ndarray::Zip::from(&mut p.bias)
            .and(&mut m.bias)
            .and(&mut v.bias)
            .and(&g.bias)
            .for_each(|p, m, v, &g| update(p, m, v, g));
    }
    Ok(())
}

/// Compare analytic gradients with central differences on `probe_count`
/// randomly chosen parameters. Returns the largest relative error
/// `|g_an − g_fd| / max(1e-8, |g_an| + |g_fd|)`.
///
/// `loss_fn` must be deterministic; the model is restored after probing.
pub fn finite_difference_check<P, F, R>(
    loss_fn: F,
    model: &mut P,
    analytic: &[f64],
    probe_count: usize,
    epsilon: f64,
    rng: &mut R,
) -> f64
where
    P: Parameters,
    F: Fn(&P) -> f64,
    R: Rng + ?Sized,
{
    let n = model.param_count();
    assert_eq!(analytic.len(), n, "analytic gradient length");
    let probes = index::sample(rng, n, probe_count.min(n));
    let mut worst = 0.0f64;
    for i in probes.iter() {
        let orig = model.param(i);
        model.set_param(i, orig + epsilon);
        let up = loss_fn(model);
        model.set_param(i, orig - epsilon);
        let down = loss_fn(model);
        model.set_param(i, orig);
        let fd = (up - down) / (2.0 * epsilon);
        let an = analytic[i];
        let rel = (an - fd).abs() / (an.abs() + fd.abs()).max(1e-8);
        worst = worst.max(rel);
    }
    worst
}

pub const TENSOR_MAGIC: &str = "DAVID-TENSORS";
pub const TENSOR_VERSION: u32 = 1;

/// Write named tensors in the text checkpoint format:
///
/// ```text
/// DAVID-TENSORS 1
/// tensor <name> <rows> <cols>
/// <row 0 values, space separated>
/// ...
/// end
/// ```
///
/// Values use Rust's shortest round-trip float formatting, so a reload is exact.
pub fn write_tensors<W: Write>(mut w: W, tensors: &[(String, Array2<f64>)]) -> std::io::Result<()> {
    writeln!(w, "{TENSOR_MAGIC} {TENSOR_VERSION}")?;
    for (name, t) in tensors {
        writeln!(w, "tensor {name} {} {}", t.nrows(), t.ncols())?;
        for row in t.outer_iter() {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
    }
    writeln!(w, "end")?;
    w.flush()
}

pub fn read_tensors<R: BufRead>(r: R) -> Result<BTreeMap<String, Array2<f64>>> {
    let mut lines = r.lines();
    let mut next = || -> Result<Option<String>> {
        lines
            .next()
            .transpose()
            .map_err(|e| Error::io("<tensor stream>", e))
    };
    let header = next()?.ok_or_else(|| Error::Format("empty checkpoint".into()))?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some(TENSOR_MAGIC) {
        return Err(Error::Format(format!("bad magic header '{header}'")));
    }
    let version: u32 = parts
        .next()
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::Format(format!("bad header '{header}'")))?;
    if version != TENSOR_VERSION {
        return Err(Error::Format(format!("unsupported checkpoint version {version}")));
    }
    let mut out = BTreeMap::new();
    loop {
        let line = next()?.ok_or_else(|| Error::Format("missing 'end' marker".into()))?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields.as_slice() {
            ["end"] => break,
            ["tensor", name, rows, cols] => {
                let rows: usize = rows.parse().map_err(|_| Error::Format(format!("bad row count in '{line}'")))?;
                let cols: usize = cols.parse().map_err(|_| Error::Format(format!("bad column count in '{line}'")))?;
                let mut data = Vec::with_capacity(rows * cols);
                for _ in 0..rows {
                    let row = next()?.ok_or_else(|| Error::Format(format!("truncated tensor {name}")))?;
                    let before = data.len();
                    for v in row.split_whitespace() {
                        data.push(v.parse::<f64>().map_err(|_| Error::Format(format!("bad value '{v}' in {name}")))?);
                    }
                    if data.len() - before != cols {
                        return Err(Error::Format(format!("tensor {name}: row has wrong length")));
                    }
                }
                let t = Array2::from_shape_vec((rows, cols), data).map_err(|e| Error::Format(e.to_string()))?;
                out.insert(name.to_string(), t);
            }
            _ => return Err(Error::Format(format!("unexpected line '{line}'"))),
        }
    }
    Ok(out)
}
