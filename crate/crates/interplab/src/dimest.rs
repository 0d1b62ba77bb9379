//! Intrinsic-dimension estimation of parameter point clouds via local PCA.
//!
//! For each point, take its k nearest neighbors, center them, and count the
//! local covariance eigenvalues above `fo_alpha` times the largest
//! (Fukunaga-Olsen rule). The global estimate is the mean of the local
//! counts. Neighborhoods whose spread is indistinguishable from float
//! rounding at the points' magnitude are flagged degenerate and count as
//! dimension 0: eigenvalue ratios of pure rounding noise carry no signal.

use crate::data::{sample_dataset, Teacher};
use crate::error::{Error, Result};
use crate::linalg::{matmul, sym_eigenvalues_desc, Matrix};
use crate::models::{Interval, NetworkSpec, ParamVector};
use crate::parallel;
use crate::rng::SeededRng;
use crate::samplers::{run_sampler, SamplerConfig, SamplerName};
use std::collections::BTreeMap;
use std::io::{BufRead, Write};

/// Fukunaga-Olsen eigenvalue threshold default.
pub const DEFAULT_FO_ALPHA: f64 = 0.05;

/// Default neighbor count: `min(100, N - 1)`.
pub fn default_k_neighbors(n_points: usize) -> usize {
    100.min(n_points.saturating_sub(1))
}

/// Neighborhoods whose largest eigenvalue falls below
/// `(DEGENERACY_ULPS * eps * scale)^2` are treated as a single repeated
/// point: their spread is within ~1e3 ulps of the coordinate magnitude.
const DEGENERACY_ULPS: f64 = 1e3;

/// N x D cloud of flattened parameter vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Matrix,
    source: String,
}

impl PointCloud {
    pub fn new(points: Matrix, source: impl Into<String>) -> Result<Self> {
        if points.rows() < 2 {
            return Err(Error::TooFewPoints {
                needed: 2,
                have: points.rows(),
            });
        }
        Ok(Self {
            points,
            source: source.into(),
        })
    }

    pub fn from_param_vectors(params: &[ParamVector], source: impl Into<String>) -> Result<Self> {
        if params.len() < 2 {
            return Err(Error::TooFewPoints {
                needed: 2,
                have: params.len(),
            });
        }
        let dim = params[0].len();
        let mut data = Vec::with_capacity(params.len() * dim);
        for p in params {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    context: "point cloud row length",
                    expected: dim,
                    got: p.len(),
                });
            }
            data.extend_from_slice(p.data());
        }
        Self::new(Matrix::new(params.len(), dim, data)?, source)
    }

    pub fn points(&self) -> &Matrix {
        &self.points
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn len(&self) -> usize {
        self.points.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.points.cols()
    }

    /// CSV: one flattened vector per row, no header.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for i in 0..self.len() {
            let fields: Vec<String> = self
                .points
                .row(i)
                .iter()
                .map(|v| format!("{v:.16e}"))
                .collect();
            writeln!(w, "{}", fields.join(","))?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R, source: impl Into<String>) -> Result<Self> {
        let mut data = Vec::new();
        let mut rows = 0usize;
        let mut cols = 0usize;
        for line in r.lines() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            let fields: Vec<&str> = trimmed.split(',').collect();
            if rows == 0 {
                cols = fields.len();
            } else if fields.len() != cols {
                return Err(Error::InvalidData(format!(
                    "row {rows} has {} fields, expected {cols}",
                    fields.len()
                )));
            }
            for f in fields {
                data.push(f.trim().parse::<f64>().map_err(|e| {
                    Error::InvalidData(format!("bad float `{f}`: {e}"))
                })?);
            }
            rows += 1;
        }
        if rows < 2 {
            return Err(Error::TooFewPoints {
                needed: 2,
                have: rows,
            });
        }
        Self::new(Matrix::new(rows, cols, data)?, source)
    }
}

/// Result of a local-PCA pass over a cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct DimEstimate {
    /// Mean of the local estimates.
    pub global_estimate: f64,
    pub local_estimates: Vec<usize>,
    pub k_neighbors: usize,
    pub fo_alpha: f64,
    /// Neighborhoods collapsed to rounding noise (local estimate forced to 0).
    pub degenerate_count: usize,
}

impl DimEstimate {
    pub fn histogram(&self) -> BTreeMap<usize, usize> {
        let mut hist = BTreeMap::new();
        for &d in &self.local_estimates {
            *hist.entry(d).or_insert(0) += 1;
        }
        hist
    }

    /// JSON report with a numerically sorted histogram.
    pub fn to_json(&self) -> String {
        let hist: Vec<String> = self
            .histogram()
            .iter()
            .map(|(dim, count)| format!("\"{dim}\":{count}"))
            .collect();
        format!(
            "{{\"global_estimate\":{},\"k\":{},\"alpha\":{},\"degenerate_neighborhoods\":{},\"histogram\":{{{}}}}}",
            self.global_estimate,
            self.k_neighbors,
            self.fo_alpha,
            self.degenerate_count,
            hist.join(",")
        )
    }
}

/// Local-PCA (Fukunaga-Olsen) intrinsic dimension estimate.
///
/// Exhaustive O(N^2) neighbor search; fine for desk-scale clouds. The
/// eigenvalues come from whichever Gram side is smaller (k x k or D x D).
pub fn lpca_estimate(cloud: &PointCloud, k_neighbors: usize, fo_alpha: f64) -> Result<DimEstimate> {
    if k_neighbors < 2 {
        return Err(Error::InvalidConfig(format!(
            "k_neighbors must be at least 2, got {k_neighbors}"
        )));
    }
    if !(fo_alpha > 0.0 && fo_alpha < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "fo_alpha must lie in (0, 1), got {fo_alpha}"
        )));
    }
    let n = cloud.len();
    if n <= k_neighbors {
        return Err(Error::TooFewPoints {
            needed: k_neighbors + 1,
            have: n,
        });
    }

    let points = cloud.points();
    let locals = parallel::map_indexed(n, |i| local_dimension(points, i, k_neighbors, fo_alpha));

    let degenerate_count = locals.iter().filter(|(_, deg)| *deg).count();
    let local_estimates: Vec<usize> = locals.into_iter().map(|(d, _)| d).collect();
    let global_estimate =
        local_estimates.iter().sum::<usize>() as f64 / local_estimates.len() as f64;
    Ok(DimEstimate {
        global_estimate,
        local_estimates,
        k_neighbors,
        fo_alpha,
        degenerate_count,
    })
}

fn local_dimension(points: &Matrix, query: usize, k: usize, alpha: f64) -> (usize, bool) {
    let n = points.rows();
    let d = points.cols();

    // k nearest neighbors of the query, excluding itself; ties broken by
    // index so results do not depend on sort internals.
    let mut dists: Vec<(f64, usize)> = Vec::with_capacity(n - 1);
    let qrow = points.row(query);
    for j in 0..n {
        if j == query {
            continue;
        }
        let row = points.row(j);
        let mut dist2 = 0.0;
        for (a, b) in qrow.iter().zip(row) {
            let diff = a - b;
            dist2 += diff * diff;
        }
        dists.push((dist2, j));
    }
    dists.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
    let neighbors = &dists[..k];

    // Neighborhood scale before centering, for the degeneracy floor.
    let mut scale = 0.0f64;
    for &(_, j) in neighbors {
        for &v in points.row(j) {
            scale = scale.max(v.abs());
        }
    }

    let mut mean = vec![0.0; d];
    for &(_, j) in neighbors {
        for (m, &v) in mean.iter_mut().zip(points.row(j)) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= k as f64;
    }

    let mut centered = Matrix::zeros(k, d);
    for (row_idx, &(_, j)) in neighbors.iter().enumerate() {
        for (col_idx, (&v, &m)) in points.row(j).iter().zip(&mean).enumerate() {
            centered.set(row_idx, col_idx, v - m);
        }
    }

    // Nonzero covariance eigenvalues = eigenvalues of the smaller Gram side.
    let gram = if k <= d {
        matmul(&centered, &centered.transpose()).expect("shapes agree")
    } else {
        matmul(&centered.transpose(), &centered).expect("shapes agree")
    };
    let mut eig = sym_eigenvalues_desc(&gram).expect("gram is square");
    for e in &mut eig {
        *e = e.max(0.0) / k as f64;
    }

    let lambda1 = eig.first().copied().unwrap_or(0.0);
    let floor = (DEGENERACY_ULPS * f64::EPSILON * scale).powi(2);
    if lambda1 <= floor {
        return (0, true);
    }
    let count = eig.iter().take_while(|&&l| l > alpha * lambda1).count();
    (count, false)
}

/// Configuration of the TES-dimension pipeline: sample many
/// near-interpolators of one large dataset and estimate the dimension of
/// the manifold they lie on.
#[derive(Debug, Clone)]
pub struct TesDimensionPipeline {
    pub sampler: SamplerName,
    pub sampler_cfg: SamplerConfig,
    pub n_train_large: usize,
    pub n_repeats: usize,
    pub input_box: Interval,
    /// Neighbor count; defaults to `min(100, n_repeats - 1)` when `None`.
    pub k_neighbors: Option<usize>,
    pub fo_alpha: f64,
}

/// Run the configured sampler `n_repeats` times against one fixed dataset
/// of size `n_train_large`, collect the parameters into a cloud, and
/// estimate its intrinsic dimension.
pub fn estimate_tes_dimension(
    teacher: &Teacher,
    student_spec: &NetworkSpec,
    pipeline: &TesDimensionPipeline,
    rng: SeededRng,
) -> Result<DimEstimate> {
    let k = pipeline
        .k_neighbors
        .unwrap_or_else(|| default_k_neighbors(pipeline.n_repeats));
    if pipeline.n_repeats < k + 1 {
        return Err(Error::TooFewPoints {
            needed: k + 1,
            have: pipeline.n_repeats,
        });
    }
    let dataset = sample_dataset(
        teacher,
        pipeline.n_train_large,
        &pipeline.input_box,
        rng.substream(0),
    );
    let outcomes = parallel::map_indexed(pipeline.n_repeats, |r| {
        run_sampler(
            pipeline.sampler,
            student_spec,
            &dataset,
            &pipeline.sampler_cfg,
            rng.substream(1 + r as u64),
        )
    });
    let mut params = Vec::with_capacity(pipeline.n_repeats);
    for outcome in outcomes {
        params.push(outcome?.params);
    }
    let cloud = PointCloud::from_param_vectors(&params, "tes-pipeline")?;
    lpca_estimate(&cloud, k, pipeline.fo_alpha)
}
