//! The noiseless data-generating process: a fixed teacher network, i.i.d.
//! uniform inputs, and exact teacher labels. Train loss is the empirical
//! mean squared error; test loss is its Monte-Carlo estimate on a fresh
//! seeded sample.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::models::{
    forward_raw, train_loss_raw, Interval, NetworkSpec, ParamVector, Workspace,
};
use crate::rng::SeededRng;
use std::io::{BufRead, Write};

/// Default Monte-Carlo test-set size.
pub const DEFAULT_N_TEST: usize = 2000;

/// The fixed data-generating network.
#[derive(Debug, Clone, PartialEq)]
pub struct Teacher {
    spec: NetworkSpec,
    params: ParamVector,
}

impl Teacher {
    pub fn new(params: ParamVector) -> Self {
        Self {
            spec: params.spec().clone(),
            params,
        }
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn params(&self) -> &ParamVector {
        &self.params
    }
}

/// Draw a teacher with Xavier-uniform weights and zero biases.
pub fn make_teacher(spec: &NetworkSpec, mut rng: SeededRng) -> Teacher {
    Teacher::new(ParamVector::xavier(spec, &mut rng))
}

/// Paired input/output samples drawn from a teacher.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    inputs: Matrix,
    outputs: Matrix,
    gen_seed: u64,
}

impl Dataset {
    /// Assemble from pre-built matrices; checks only the shapes.
    pub fn from_parts(inputs: Matrix, outputs: Matrix, gen_seed: u64) -> Result<Self> {
        if inputs.rows() != outputs.rows() {
            return Err(Error::DimensionMismatch {
                context: "dataset input/output row counts",
                expected: inputs.rows(),
                got: outputs.rows(),
            });
        }
        Ok(Self {
            inputs,
            outputs,
            gen_seed,
        })
    }

    pub fn len(&self) -> usize {
        self.inputs.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn inputs(&self) -> &Matrix {
        &self.inputs
    }

    pub fn outputs(&self) -> &Matrix {
        &self.outputs
    }

    pub fn gen_seed(&self) -> u64 {
        self.gen_seed
    }

    pub fn check_dims(&self, spec: &NetworkSpec) -> Result<()> {
        if self.inputs.cols() != spec.input_dim() {
            return Err(Error::DimensionMismatch {
                context: "dataset input dimension",
                expected: spec.input_dim(),
                got: self.inputs.cols(),
            });
        }
        if self.outputs.cols() != spec.output_dim() {
            return Err(Error::DimensionMismatch {
                context: "dataset output dimension",
                expected: spec.output_dim(),
                got: self.outputs.cols(),
            });
        }
        Ok(())
    }

    /// CSV export: header `x_0,...,x_{m-1},y_0,...,y_{k-1}`, one sample per
    /// row, 17 significant digits so values round-trip exactly.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let m = self.inputs.cols();
        let k = self.outputs.cols();
        let mut header = Vec::with_capacity(m + k);
        header.extend((0..m).map(|j| format!("x_{j}")));
        header.extend((0..k).map(|j| format!("y_{j}")));
        writeln!(w, "{}", header.join(","))?;
        for s in 0..self.len() {
            let mut fields = Vec::with_capacity(m + k);
            fields.extend(self.inputs.row(s).iter().map(|v| format!("{v:.16e}")));
            fields.extend(self.outputs.row(s).iter().map(|v| format!("{v:.16e}")));
            writeln!(w, "{}", fields.join(","))?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::InvalidData("empty dataset CSV".into()))??;
        let names: Vec<&str> = header.trim().split(',').collect();
        let m = names.iter().take_while(|n| n.starts_with("x_")).count();
        let k = names.len() - m;
        if m == 0 || k == 0 || !names[m..].iter().all(|n| n.starts_with("y_")) {
            return Err(Error::InvalidData(format!(
                "dataset CSV header must be x_0..x_m,y_0..y_k, got `{header}`"
            )));
        }
        let mut input_data = Vec::new();
        let mut output_data = Vec::new();
        let mut rows = 0usize;
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.trim().split(',').collect();
            if fields.len() != m + k {
                return Err(Error::InvalidData(format!(
                    "row {rows}: expected {} fields, got {}",
                    m + k,
                    fields.len()
                )));
            }
            for f in &fields[..m] {
                input_data.push(parse_f64(f)?);
            }
            for f in &fields[m..] {
                output_data.push(parse_f64(f)?);
            }
            rows += 1;
        }
        if rows == 0 {
            return Err(Error::InvalidData("dataset CSV has no samples".into()));
        }
        Self::from_parts(
            Matrix::new(rows, m, input_data)?,
            Matrix::new(rows, k, output_data)?,
            0,
        )
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| Error::InvalidData(format!("bad float `{s}`: {e}")))
}

/// Draw `n` inputs i.i.d. uniform on the box and label them with the teacher.
/// Outputs equal the teacher forward pass bit-exactly.
pub fn sample_dataset(
    teacher: &Teacher,
    n: usize,
    input_box: &Interval,
    mut rng: SeededRng,
) -> Dataset {
    assert!(n >= 1, "dataset size must be at least 1");
    let spec = teacher.spec();
    let m = spec.input_dim();
    let k = spec.output_dim();
    let gen_seed = rng.stream_id();

    let mut input_data = vec![0.0; n * m];
    rng.fill_uniform(&mut input_data, input_box.lo, input_box.hi);
    let inputs = Matrix::new(n, m, input_data).expect("finite uniform draws");

    let mut ws = Workspace::new(spec);
    let mut output_data = Vec::with_capacity(n * k);
    for s in 0..n {
        forward_raw(spec, teacher.params().data(), inputs.row(s), &mut ws);
        output_data.extend_from_slice(ws.output());
    }
    let outputs = Matrix::new(n, k, output_data).expect("teacher outputs finite");

    Dataset::from_parts(inputs, outputs, gen_seed).expect("rows agree by construction")
}

/// Empirical loss `(1/n) sum_i 0.5 ||y_i - f(x_i; theta)||^2`.
pub fn train_loss(params: &ParamVector, dataset: &Dataset) -> Result<f64> {
    let spec = params.spec();
    dataset.check_dims(spec)?;
    let mut ws = Workspace::new(spec);
    let loss = train_loss_raw(
        spec,
        params.data(),
        dataset.inputs(),
        dataset.outputs(),
        &mut ws,
    );
    if !loss.is_finite() {
        return Err(Error::NonFiniteLoss);
    }
    Ok(loss)
}

/// Monte-Carlo generalization error on a fresh seeded test set.
pub fn test_loss(
    params: &ParamVector,
    teacher: &Teacher,
    n_test: usize,
    input_box: &Interval,
    rng: SeededRng,
) -> Result<f64> {
    assert!(n_test >= 1, "test set size must be at least 1");
    if params.spec().input_dim() != teacher.spec().input_dim()
        || params.spec().output_dim() != teacher.spec().output_dim()
    {
        return Err(Error::DimensionMismatch {
            context: "student/teacher input-output dimensions",
            expected: teacher.spec().input_dim(),
            got: params.spec().input_dim(),
        });
    }
    let test_set = sample_dataset(teacher, n_test, input_box, rng);
    train_loss(params, &test_set)
}
