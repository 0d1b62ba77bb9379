//! Network architectures, parameter layout, and differentiation.
//!
//! Two families are supported: deep linear networks (`dlnn`, identity
//! activation) and fully connected networks (`fcdnn`) with a real analytic
//! activation. The parameter layout is canonical and shared by every
//! sampler, embedding, and serializer in the crate:
//!
//! ```text
//! [w(1) row-major, b(1), w(2), b(2), ..., w(L), b(L)]
//! ```
//!
//! where `w(l)` has shape `widths[l] x widths[l-1]`.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{spectral_norm, Matrix, Vector};
use crate::parallel;
use crate::rng::SeededRng;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

/// Real analytic activation functions. ReLU is rejected at parse time:
/// the theory requires activations analytic everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Identity,
    Tanh,
    Sigmoid,
    Softplus,
}

impl Activation {
    pub fn parse(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "identity" => Ok(Self::Identity),
            "tanh" => Ok(Self::Tanh),
            "sigmoid" => Ok(Self::Sigmoid),
            "softplus" => Ok(Self::Softplus),
            "relu" => Err(Error::UnsupportedActivation {
                name: name.to_string(),
                reason: "ReLU is not real analytic; use tanh, sigmoid, or softplus",
            }),
            _ => Err(Error::UnsupportedActivation {
                name: name.to_string(),
                reason: "expected one of identity, tanh, sigmoid, softplus",
            }),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Identity => "identity",
            Self::Tanh => "tanh",
            Self::Sigmoid => "sigmoid",
            Self::Softplus => "softplus",
        }
    }

    #[inline]
    pub fn eval(self, z: f64) -> f64 {
        match self {
            Self::Identity => z,
            Self::Tanh => z.tanh(),
            Self::Sigmoid => sigmoid(z),
            Self::Softplus => {
                // ln(1 + e^z), overflow-safe
                z.max(0.0) + (-z.abs()).exp().ln_1p()
            }
        }
    }

    #[inline]
    pub fn deriv(self, z: f64) -> f64 {
        match self {
            Self::Identity => 1.0,
            Self::Tanh => {
                let t = z.tanh();
                1.0 - t * t
            }
            Self::Sigmoid => {
                let s = sigmoid(z);
                s * (1.0 - s)
            }
            Self::Softplus => sigmoid(z),
        }
    }
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Model family: deep linear (identity activation only) or fully connected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Dlnn,
    Fcdnn,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Self::Dlnn => "dlnn",
            Self::Fcdnn => "fcdnn",
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    widths: Vec<usize>,
    activation: String,
    family: Family,
}

/// Architecture description: layer widths `[m0, ..., mL]`, activation, family.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct NetworkSpec {
    widths: Vec<usize>,
    activation: Activation,
    family: Family,
}

impl TryFrom<RawSpec> for NetworkSpec {
    type Error = Error;
    fn try_from(raw: RawSpec) -> Result<Self> {
        NetworkSpec::new(raw.family, raw.widths, Activation::parse(&raw.activation)?)
    }
}

impl From<NetworkSpec> for RawSpec {
    fn from(spec: NetworkSpec) -> Self {
        RawSpec {
            widths: spec.widths.clone(),
            activation: spec.activation.name().to_string(),
            family: spec.family,
        }
    }
}

impl NetworkSpec {
    pub fn new(family: Family, widths: Vec<usize>, activation: Activation) -> Result<Self> {
        if widths.len() < 2 {
            return Err(Error::InvalidSpec(format!(
                "need at least input and output widths, got {widths:?}"
            )));
        }
        if widths.contains(&0) {
            return Err(Error::InvalidSpec(format!(
                "all widths must be positive, got {widths:?}"
            )));
        }
        if family == Family::Dlnn && activation != Activation::Identity {
            return Err(Error::InvalidSpec(format!(
                "dlnn requires the identity activation, got {}",
                activation.name()
            )));
        }
        Ok(Self {
            widths,
            activation,
            family,
        })
    }

    /// Deep linear network; activation forced to identity.
    pub fn dlnn(widths: Vec<usize>) -> Result<Self> {
        Self::new(Family::Dlnn, widths, Activation::Identity)
    }

    pub fn fcdnn(widths: Vec<usize>, activation: Activation) -> Result<Self> {
        Self::new(Family::Fcdnn, widths, activation)
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// Number of layers L.
    pub fn depth(&self) -> usize {
        self.widths.len() - 1
    }

    pub fn input_dim(&self) -> usize {
        self.widths[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.widths.last().expect("widths non-empty")
    }

    /// Total parameter count `sum_l widths[l] * (widths[l-1] + 1)`.
    pub fn param_count(&self) -> usize {
        (1..self.widths.len())
            .map(|l| self.widths[l] * (self.widths[l - 1] + 1))
            .sum()
    }

    /// Flat index of `w(l)` for 1-based layer `l`; the weight block spans
    /// `widths[l] * widths[l-1]` entries and the bias block follows it.
    pub fn weight_offset(&self, layer: usize) -> usize {
        debug_assert!(layer >= 1 && layer <= self.depth());
        (1..layer)
            .map(|l| self.widths[l] * (self.widths[l - 1] + 1))
            .sum()
    }

    pub fn bias_offset(&self, layer: usize) -> usize {
        self.weight_offset(layer) + self.widths[layer] * self.widths[layer - 1]
    }
}

/// Total parameter count for a spec.
pub fn param_count(spec: &NetworkSpec) -> usize {
    spec.param_count()
}

/// Flat parameter vector with the canonical per-layer layout.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector {
    spec: NetworkSpec,
    data: Vec<f64>,
}

impl ParamVector {
    pub fn new(spec: NetworkSpec, data: Vec<f64>) -> Result<Self> {
        if data.len() != spec.param_count() {
            return Err(Error::DimensionMismatch {
                context: "parameter vector length",
                expected: spec.param_count(),
                got: data.len(),
            });
        }
        if !data.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite { context: "parameter entries" });
        }
        Ok(Self { spec, data })
    }

    pub fn zeros(spec: NetworkSpec) -> Self {
        let n = spec.param_count();
        Self {
            spec,
            data: vec![0.0; n],
        }
    }

    /// Xavier uniform initialization: layer-`l` weights drawn from
    /// `U[-sqrt(6/(m_{l-1}+m_l)), +sqrt(6/(m_{l-1}+m_l))]`, biases zero.
    pub fn xavier(spec: &NetworkSpec, rng: &mut SeededRng) -> Self {
        let mut data = vec![0.0; spec.param_count()];
        fill_xavier(spec, &mut data, rng);
        Self {
            spec: spec.clone(),
            data,
        }
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Weight block of 1-based layer `l` (row-major `widths[l] x widths[l-1]`).
    pub fn weight(&self, layer: usize) -> &[f64] {
        let off = self.spec.weight_offset(layer);
        let len = self.spec.widths[layer] * self.spec.widths[layer - 1];
        &self.data[off..off + len]
    }

    pub fn bias(&self, layer: usize) -> &[f64] {
        let off = self.spec.bias_offset(layer);
        &self.data[off..off + self.spec.widths[layer]]
    }

    /// True when every entry lies inside `[-B, B]`.
    pub fn within_box(&self, domain: &DomainBox) -> bool {
        self.first_box_violation(domain).is_none()
    }

    pub fn first_box_violation(&self, domain: &DomainBox) -> Option<(usize, f64)> {
        let b = domain.half_width();
        self.data
            .iter()
            .enumerate()
            .find(|(_, &v)| v.abs() > b)
            .map(|(i, &v)| (i, v))
    }

    /// Binary serialization: one JSON header line, then the raw little-endian
    /// f64 block.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        let header = serde_json::to_string(&self.spec)?;
        w.write_all(header.as_bytes())?;
        w.write_all(b"\n")?;
        for &v in &self.data {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: BufRead>(mut r: R) -> Result<Self> {
        let mut header = String::new();
        r.read_line(&mut header)?;
        let spec: NetworkSpec = serde_json::from_str(header.trim_end())?;
        let mut data = vec![0.0f64; spec.param_count()];
        let mut buf = [0u8; 8];
        for slot in &mut data {
            r.read_exact(&mut buf)?;
            *slot = f64::from_le_bytes(buf);
        }
        Self::new(spec, data)
    }

    /// Plain CSV export: one value per line, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for &v in &self.data {
            writeln!(w, "{v:.16e}")?;
        }
        Ok(())
    }
}

fn fill_xavier(spec: &NetworkSpec, data: &mut [f64], rng: &mut SeededRng) {
    for l in 1..=spec.depth() {
        let fan_in = spec.widths[l - 1];
        let fan_out = spec.widths[l];
        let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let off = spec.weight_offset(l);
        for slot in &mut data[off..off + fan_out * fan_in] {
            *slot = rng.uniform(-bound, bound);
        }
        let boff = spec.bias_offset(l);
        for slot in &mut data[boff..boff + fan_out] {
            *slot = 0.0;
        }
    }
}

/// The compact parameter domain `Theta = [-B, B]^d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainBox {
    half_width: f64,
}

impl DomainBox {
    pub const DEFAULT_HALF_WIDTH: f64 = 10.0;

    pub fn new(half_width: f64) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "domain box half width must be positive and finite, got {half_width}"
            )));
        }
        Ok(Self { half_width })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }
}

impl Default for DomainBox {
    fn default() -> Self {
        Self {
            half_width: Self::DEFAULT_HALF_WIDTH,
        }
    }
}

/// Closed interval used as a per-coordinate input range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidConfig(format!(
                "interval bounds must be finite with lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Self { lo, hi })
    }

    /// The `[-1, 1]` default used throughout the experiments.
    pub fn unit() -> Self {
        Self { lo: -1.0, hi: 1.0 }
    }
}

impl Default for Interval {
    fn default() -> Self {
        Self::unit()
    }
}

// ---------------------------------------------------------------------------
// Evaluation engine
// ---------------------------------------------------------------------------

/// Reusable per-layer buffers for forward/backward passes. Hot loops
/// (samplers, probes) share one workspace to avoid per-call allocation.
pub struct Workspace {
    /// acts[0] is the input; acts[l] the post-activation of layer l
    /// (acts[L] holds the raw network output: no activation on the last layer).
    acts: Vec<Vec<f64>>,
    /// zs[l-1] is the pre-activation of layer l.
    zs: Vec<Vec<f64>>,
    delta: Vec<f64>,
    delta_prev: Vec<f64>,
}

impl Workspace {
    pub fn new(spec: &NetworkSpec) -> Self {
        let widths = spec.widths();
        let acts = widths.iter().map(|&w| vec![0.0; w]).collect();
        let zs = widths[1..].iter().map(|&w| vec![0.0; w]).collect();
        let max_width = *widths.iter().max().expect("widths non-empty");
        Self {
            acts,
            zs,
            delta: vec![0.0; max_width],
            delta_prev: vec![0.0; max_width],
        }
    }

    pub fn output(&self) -> &[f64] {
        self.acts.last().expect("at least one layer")
    }
}

/// Forward pass on raw slices. `params` must follow the canonical layout for
/// `spec`; `x` must have length `spec.input_dim()`.
pub fn forward_raw(spec: &NetworkSpec, params: &[f64], x: &[f64], ws: &mut Workspace) {
    debug_assert_eq!(params.len(), spec.param_count());
    debug_assert_eq!(x.len(), spec.input_dim());
    let depth = spec.depth();
    let act = spec.activation();
    ws.acts[0].copy_from_slice(x);

    let widths = spec.widths();
    let mut offset = 0usize;
    for l in 1..=depth {
        let rows = widths[l];
        let cols = widths[l - 1];
        let (w, rest) = params[offset..].split_at(rows * cols);
        let b = &rest[..rows];
        offset += rows * cols + rows;

        let (done, todo) = ws.acts.split_at_mut(l);
        let input = &done[l - 1];
        let z = &mut ws.zs[l - 1];
        for i in 0..rows {
            let wrow = &w[i * cols..(i + 1) * cols];
            let mut acc = b[i];
            for (wv, xv) in wrow.iter().zip(input.iter()) {
                acc += wv * xv;
            }
            z[i] = acc;
        }
        let out = &mut todo[0];
        if l < depth {
            for i in 0..rows {
                out[i] = act.eval(z[i]);
            }
        } else {
            out.copy_from_slice(z);
        }
    }
}

/// Forward evaluation of the network output `f(x; theta)`.
pub fn forward(params: &ParamVector, x: &Vector) -> Result<Vector> {
    let spec = params.spec();
    if x.len() != spec.input_dim() {
        return Err(Error::DimensionMismatch {
            context: "forward input dimension",
            expected: spec.input_dim(),
            got: x.len(),
        });
    }
    let mut ws = Workspace::new(spec);
    forward_raw(spec, params.data(), x.data(), &mut ws);
    Vector::new(ws.output().to_vec())
}

/// Mean squared-error training loss `(1/n) sum_i 0.5 ||y_i - f(x_i)||^2`
/// on raw buffers. Returns a non-finite value if the forward pass overflows;
/// callers decide whether that is an error.
pub fn train_loss_raw(
    spec: &NetworkSpec,
    params: &[f64],
    inputs: &Matrix,
    targets: &Matrix,
    ws: &mut Workspace,
) -> f64 {
    let n = inputs.rows();
    let mut total = 0.0;
    for s in 0..n {
        forward_raw(spec, params, inputs.row(s), ws);
        let out = ws.output();
        let target = targets.row(s);
        let mut err = 0.0;
        for (o, t) in out.iter().zip(target) {
            let d = o - t;
            err += d * d;
        }
        total += 0.5 * err;
    }
    total / n as f64
}

/// Full-batch gradient of the squared loss, reverse mode, accumulated into
/// `grad` (which is zeroed first).
pub fn gradient_raw(
    spec: &NetworkSpec,
    params: &[f64],
    inputs: &Matrix,
    targets: &Matrix,
    grad: &mut [f64],
    ws: &mut Workspace,
) -> Result<()> {
    debug_assert_eq!(grad.len(), spec.param_count());
    let n = inputs.rows();
    let depth = spec.depth();
    let act = spec.activation();
    let widths = spec.widths();
    let inv_n = 1.0 / n as f64;

    grad.fill(0.0);
    for s in 0..n {
        forward_raw(spec, params, inputs.row(s), ws);
        if !ws.acts[depth].iter().all(|v| v.is_finite()) {
            return Err(Error::NonFiniteLoss);
        }
        let target = targets.row(s);
        let out_dim = widths[depth];
        for i in 0..out_dim {
            ws.delta[i] = (ws.acts[depth][i] - target[i]) * inv_n;
        }

        for l in (1..=depth).rev() {
            let rows = widths[l];
            let cols = widths[l - 1];
            let woff = spec.weight_offset(l);
            let boff = spec.bias_offset(l);
            let input = &ws.acts[l - 1];

            for i in 0..rows {
                let d = ws.delta[i];
                let grow = &mut grad[woff + i * cols..woff + (i + 1) * cols];
                for (g, a) in grow.iter_mut().zip(input.iter()) {
                    *g += d * a;
                }
                grad[boff + i] += d;
            }

            if l > 1 {
                let w = &params[woff..woff + rows * cols];
                let zprev = &ws.zs[l - 2];
                for j in 0..cols {
                    let mut acc = 0.0;
                    for i in 0..rows {
                        acc += w[i * cols + j] * ws.delta[i];
                    }
                    ws.delta_prev[j] = acc * act.deriv(zprev[j]);
                }
                std::mem::swap(&mut ws.delta, &mut ws.delta_prev);
            }
        }
    }
    Ok(())
}

/// Gradient of the training loss with respect to the parameters.
pub fn gradient(params: &ParamVector, dataset: &Dataset) -> Result<Vec<f64>> {
    let spec = params.spec();
    dataset.check_dims(spec)?;
    let mut grad = vec![0.0; spec.param_count()];
    let mut ws = Workspace::new(spec);
    gradient_raw(
        spec,
        params.data(),
        dataset.inputs(),
        dataset.outputs(),
        &mut grad,
        &mut ws,
    )?;
    Ok(grad)
}

/// Jacobian of the network output with respect to the parameters,
/// shape `output_dim x param_count`, one reverse-mode pass per output row.
pub fn param_jacobian(params: &ParamVector, x: &Vector) -> Result<Matrix> {
    let spec = params.spec();
    if x.len() != spec.input_dim() {
        return Err(Error::DimensionMismatch {
            context: "jacobian input dimension",
            expected: spec.input_dim(),
            got: x.len(),
        });
    }
    let depth = spec.depth();
    let widths = spec.widths();
    let act = spec.activation();
    let out_dim = spec.output_dim();
    let d = spec.param_count();

    let mut ws = Workspace::new(spec);
    forward_raw(spec, params.data(), x.data(), &mut ws);
    if !ws.output().iter().all(|v| v.is_finite()) {
        return Err(Error::NonFiniteLoss);
    }

    let mut jac = Matrix::zeros(out_dim, d);
    for r in 0..out_dim {
        for (i, slot) in ws.delta.iter_mut().enumerate() {
            *slot = if i == r { 1.0 } else { 0.0 };
        }
        for l in (1..=depth).rev() {
            let rows = widths[l];
            let cols = widths[l - 1];
            let woff = spec.weight_offset(l);
            let boff = spec.bias_offset(l);
            let input = &ws.acts[l - 1];
            for i in 0..rows {
                let dlt = ws.delta[i];
                if dlt != 0.0 {
                    for (j, a) in input.iter().enumerate() {
                        jac.set(r, woff + i * cols + j, dlt * a);
                    }
                }
                jac.set(r, boff + i, dlt);
            }
            if l > 1 {
                let w = &params.data()[woff..woff + rows * cols];
                let zprev = &ws.zs[l - 2];
                for j in 0..cols {
                    let mut acc = 0.0;
                    for i in 0..rows {
                        acc += w[i * cols + j] * ws.delta[i];
                    }
                    ws.delta_prev[j] = acc * act.deriv(zprev[j]);
                }
                std::mem::swap(&mut ws.delta, &mut ws.delta_prev);
            }
        }
    }
    Ok(jac)
}

/// Spectral norm of the parameter Jacobian at `(theta, x)`, the local
/// Lipschitz constant of `theta -> f(x; theta)`.
pub fn param_jacobian_norm(params: &ParamVector, x: &Vector) -> Result<f64> {
    let jac = param_jacobian(params, x)?;
    Ok(spectral_norm(&jac, 1e-8))
}

/// Empirical Lipschitz constant: the maximum Jacobian spectral norm over
/// `n_probe` draws of `(theta, x)`, theta uniform in the parameter box and
/// `x` uniform in the input box. A lower estimate of the true constant.
pub fn estimate_lipschitz(
    spec: &NetworkSpec,
    domain: &DomainBox,
    input_box: &Interval,
    n_probe: usize,
    rng: SeededRng,
) -> f64 {
    assert!(n_probe >= 1, "need at least one probe");
    let b = domain.half_width();
    let norms = parallel::map_indexed(n_probe, |i| {
        let mut probe_rng = rng.substream(i as u64);
        let mut theta = vec![0.0; spec.param_count()];
        probe_rng.fill_uniform(&mut theta, -b, b);
        let mut x = vec![0.0; spec.input_dim()];
        probe_rng.fill_uniform(&mut x, input_box.lo, input_box.hi);
        let params = ParamVector::new(spec.clone(), theta).expect("finite uniform draw");
        let xv = Vector::new(x).expect("finite uniform draw");
        param_jacobian_norm(&params, &xv).expect("bounded inputs give finite jacobians")
    });
    norms.into_iter().fold(0.0f64, f64::max)
}
