//! Experiment orchestration: sweep training-set sizes, run many sampler
//! trials per size, and emit test-loss-vs-n curves as CSV plus a JSON
//! manifest.
//!
//! Determinism contract: every (n, trial) work item derives its own RNG
//! streams from `(master_seed, n, trial, purpose)`, work items are
//! independent, and records are emitted in (n, trial) order. Output files
//! are therefore byte-identical across reruns and worker-pool sizes. Wall
//! times are measured but written as 0 unless `timing = "wall"` is set,
//! since real timings would break that contract.

use crate::data::{make_teacher, sample_dataset, test_loss, Teacher, DEFAULT_N_TEST};
use crate::error::{Error, Result};
use crate::models::{Family, Interval, NetworkSpec};
use crate::parallel;
use crate::rng::{derive_stream, SeededRng};
use crate::samplers::{run_sampler, SamplerConfig, SamplerName};
use crate::theory::{bound_dlnn, bound_fcdnn, BoundReport};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

/// Stream-derivation purposes; part of the on-disk reproducibility contract.
const PURPOSE_TEACHER: u64 = 0;
const PURPOSE_DATASET: u64 = 1;
const PURPOSE_SAMPLER: u64 = 2;
const PURPOSE_TEST: u64 = 3;

/// Whether emitted files carry measured wall times or stable zeros.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum TimingMode {
    /// Write 0 for every wall-time field: reruns stay byte-identical.
    #[default]
    #[serde(rename = "none")]
    Suppress,
    /// Write measured wall-clock milliseconds.
    #[serde(rename = "wall")]
    Wall,
}

fn default_trials() -> usize {
    100
}

fn default_n_test() -> usize {
    DEFAULT_N_TEST
}

fn default_sampler_name() -> SamplerName {
    SamplerName::PatternSearch
}

/// Full experiment description; the JSON config file mirrors these fields
/// one-to-one and unknown keys are rejected.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub teacher_spec: NetworkSpec,
    pub student_spec: NetworkSpec,
    #[serde(default = "default_sampler_name")]
    pub sampler_name: SamplerName,
    #[serde(default)]
    pub sampler: SamplerConfig,
    pub n_grid: Vec<usize>,
    #[serde(default = "default_trials")]
    pub trials_per_n: usize,
    #[serde(default = "default_n_test")]
    pub n_test: usize,
    #[serde(default)]
    pub input_box: Interval,
    pub master_seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub timing: TimingMode,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() {
            return Err(Error::InvalidConfig("n_grid must be non-empty".into()));
        }
        if self.n_grid.contains(&0) {
            return Err(Error::InvalidConfig("n_grid entries must be positive".into()));
        }
        if !self.n_grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidConfig(
                "n_grid must be strictly ascending".into(),
            ));
        }
        if self.trials_per_n == 0 {
            return Err(Error::InvalidConfig("trials_per_n must be positive".into()));
        }
        if self.n_test == 0 {
            return Err(Error::InvalidConfig("n_test must be positive".into()));
        }
        self.sampler.validate()?;
        if self.teacher_spec.input_dim() != self.student_spec.input_dim()
            || self.teacher_spec.output_dim() != self.student_spec.output_dim()
        {
            return Err(Error::InvalidConfig(
                "teacher and student must share input/output dimensions".into(),
            ));
        }
        Ok(())
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(json)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// The teacher is drawn once per experiment from a dedicated stream.
    pub fn teacher(&self) -> Teacher {
        make_teacher(
            &self.teacher_spec,
            SeededRng::with_stream(self.master_seed, derive_stream(&[PURPOSE_TEACHER])),
        )
    }

    /// Theory-module annotation, when the width conditions hold.
    pub fn bound(&self) -> Result<BoundReport> {
        match self.student_spec.family() {
            Family::Dlnn => bound_dlnn(&self.teacher_spec, &self.student_spec),
            Family::Fcdnn => bound_fcdnn(&self.teacher_spec, &self.student_spec),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrialStatus {
    Ok,
    Exhausted,
    Error,
}

impl TrialStatus {
    fn as_str(self) -> &'static str {
        match self {
            Self::Ok => "ok",
            Self::Exhausted => "exhausted",
            Self::Error => "error",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s {
            "ok" => Ok(Self::Ok),
            "exhausted" => Ok(Self::Exhausted),
            "error" => Ok(Self::Error),
            other => Err(Error::InvalidData(format!("unknown status `{other}`"))),
        }
    }
}

/// One (n, trial) cell of the curve. Failed trials keep NaN losses and are
/// excluded from summaries.
#[derive(Debug, Clone)]
pub struct ExperimentRecord {
    pub n: usize,
    pub trial: usize,
    /// Sampler stream id; together with the master seed this replays the run.
    pub seed: u64,
    pub status: TrialStatus,
    pub iterations: usize,
    pub train_loss: f64,
    pub test_loss: f64,
    pub wall_time_ms: f64,
}

/// Per-n aggregate over successful trials.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub n: usize,
    pub count: usize,
    pub mean_test_loss: f64,
    pub std_test_loss: f64,
    pub median_test_loss: f64,
}

/// The data behind one test-loss-vs-n curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSummary {
    pub rows: Vec<SummaryRow>,
    /// Strong-sample-complexity annotation, when the bound applies.
    pub k_upper: Option<usize>,
    pub epsilon: f64,
    pub q_hat: Option<f64>,
    /// Failed-trial counts per n (missing n means none failed).
    pub failures: BTreeMap<usize, usize>,
}

/// Run the full sweep. Pure: identical configs produce identical records
/// regardless of thread count.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<(Vec<ExperimentRecord>, CurveSummary)> {
    cfg.validate()?;
    let teacher = cfg.teacher();
    let items: Vec<(usize, usize)> = cfg
        .n_grid
        .iter()
        .flat_map(|&n| (0..cfg.trials_per_n).map(move |t| (n, t)))
        .collect();

    let records: Vec<ExperimentRecord> = parallel::map_indexed(items.len(), |idx| {
        let (n, trial) = items[idx];
        run_trial(cfg, &teacher, n, trial)
    });

    let summary = summarize(cfg, &records)?;
    Ok((records, summary))
}

fn run_trial(cfg: &ExperimentConfig, teacher: &Teacher, n: usize, trial: usize) -> ExperimentRecord {
    let labels = |purpose: u64| derive_stream(&[n as u64, trial as u64, purpose]);
    let dataset_rng = SeededRng::with_stream(cfg.master_seed, labels(PURPOSE_DATASET));
    let sampler_rng = SeededRng::with_stream(cfg.master_seed, labels(PURPOSE_SAMPLER));
    let seed = sampler_rng.stream_id();

    let dataset = sample_dataset(teacher, n, &cfg.input_box, dataset_rng);
    match run_sampler(
        cfg.sampler_name,
        &cfg.student_spec,
        &dataset,
        &cfg.sampler,
        sampler_rng,
    ) {
        Ok(outcome) => {
            let test_rng = SeededRng::with_stream(cfg.master_seed, labels(PURPOSE_TEST));
            match test_loss(&outcome.params, teacher, cfg.n_test, &cfg.input_box, test_rng) {
                Ok(test) => ExperimentRecord {
                    n,
                    trial,
                    seed,
                    status: TrialStatus::Ok,
                    iterations: outcome.iterations,
                    train_loss: outcome.final_loss,
                    test_loss: test,
                    wall_time_ms: outcome.wall_time_ms,
                },
                Err(_) => failed_record(n, trial, seed, TrialStatus::Error, outcome.iterations),
            }
        }
        Err(Error::Exhausted(iters)) => {
            failed_record(n, trial, seed, TrialStatus::Exhausted, iters)
        }
        Err(_) => failed_record(n, trial, seed, TrialStatus::Error, 0),
    }
}

fn failed_record(
    n: usize,
    trial: usize,
    seed: u64,
    status: TrialStatus,
    iterations: usize,
) -> ExperimentRecord {
    ExperimentRecord {
        n,
        trial,
        seed,
        status,
        iterations,
        train_loss: f64::NAN,
        test_loss: f64::NAN,
        wall_time_ms: 0.0,
    }
}

fn summarize(cfg: &ExperimentConfig, records: &[ExperimentRecord]) -> Result<CurveSummary> {
    let mut rows = Vec::new();
    let mut failures = BTreeMap::new();
    for &n in &cfg.n_grid {
        let losses: Vec<f64> = records
            .iter()
            .filter(|r| r.n == n && r.status == TrialStatus::Ok)
            .map(|r| r.test_loss)
            .collect();
        let failed = records
            .iter()
            .filter(|r| r.n == n && r.status != TrialStatus::Ok)
            .count();
        if failed > 0 {
            failures.insert(n, failed);
        }
        if losses.is_empty() {
            continue;
        }
        let count = losses.len();
        let mean = losses.iter().sum::<f64>() / count as f64;
        let var = losses.iter().map(|l| (l - mean) * (l - mean)).sum::<f64>() / count as f64;
        rows.push(SummaryRow {
            n,
            count,
            mean_test_loss: mean,
            std_test_loss: var.sqrt(),
            median_test_loss: median(losses),
        });
    }
    Ok(CurveSummary {
        rows,
        k_upper: cfg.bound().ok().map(|b| b.k_upper),
        epsilon: cfg.sampler.epsilon,
        q_hat: None,
        failures,
    })
}

fn median(mut values: Vec<f64>) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite losses"));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// records.csv with the fixed column set. Losses carry 17 significant
/// digits; NaN marks failed trials.
pub fn write_records_csv<W: Write>(
    records: &[ExperimentRecord],
    timing: TimingMode,
    mut w: W,
) -> Result<()> {
    writeln!(w, "n,trial,seed,status,iterations,train_loss,test_loss,wall_time_ms")?;
    for r in records {
        let wall = match timing {
            TimingMode::Wall => r.wall_time_ms,
            TimingMode::Suppress => 0.0,
        };
        writeln!(
            w,
            "{},{},{},{},{},{:.16e},{:.16e},{:.16e}",
            r.n,
            r.trial,
            r.seed,
            r.status.as_str(),
            r.iterations,
            r.train_loss,
            r.test_loss,
            wall
        )?;
    }
    Ok(())
}

pub fn read_records_csv<R: BufRead>(r: R) -> Result<Vec<ExperimentRecord>> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::InvalidData("empty records CSV".into()))??;
    if header.trim() != "n,trial,seed,status,iterations,train_loss,test_loss,wall_time_ms" {
        return Err(Error::InvalidData(format!("unexpected header `{header}`")));
    }
    let mut records = Vec::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.trim().split(',').collect();
        if f.len() != 8 {
            return Err(Error::InvalidData(format!("bad record row `{line}`")));
        }
        records.push(ExperimentRecord {
            n: parse(f[0])?,
            trial: parse(f[1])?,
            seed: parse(f[2])?,
            status: TrialStatus::parse(f[3])?,
            iterations: parse(f[4])?,
            train_loss: parse(f[5])?,
            test_loss: parse(f[6])?,
            wall_time_ms: parse(f[7])?,
        });
    }
    Ok(records)
}

fn parse<T: std::str::FromStr>(s: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.trim()
        .parse::<T>()
        .map_err(|e| Error::InvalidData(format!("bad field `{s}`: {e}")))
}

/// Plot-ready summary CSV: commented annotations (so plotting tools can draw
/// the bound as a vertical line), then fixed columns n,count,mean,std,median.
/// Writing the same summary twice produces identical bytes.
pub fn emit_plot_data<W: Write>(summary: &CurveSummary, mut w: W) -> Result<()> {
    if let Some(k) = summary.k_upper {
        writeln!(w, "# k_upper = {k}")?;
    }
    writeln!(w, "# epsilon = {:.16e}", summary.epsilon)?;
    if let Some(q) = summary.q_hat {
        writeln!(w, "# q_hat = {q:.16e}")?;
    }
    for (n, failed) in &summary.failures {
        writeln!(w, "# failed n={n}: {failed}")?;
    }
    writeln!(w, "n,count,mean,std,median")?;
    for row in &summary.rows {
        writeln!(
            w,
            "{},{},{:.16e},{:.16e},{:.16e}",
            row.n, row.count, row.mean_test_loss, row.std_test_loss, row.median_test_loss
        )?;
    }
    Ok(())
}

/// Inverse of [`emit_plot_data`].
pub fn parse_plot_data<R: BufRead>(r: R) -> Result<CurveSummary> {
    let mut k_upper = None;
    let mut epsilon = f64::NAN;
    let mut q_hat = None;
    let mut failures = BTreeMap::new();
    let mut rows = Vec::new();
    let mut saw_header = false;
    for line in r.lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            if let Some(v) = comment.strip_prefix("k_upper = ") {
                k_upper = Some(parse(v)?);
            } else if let Some(v) = comment.strip_prefix("epsilon = ") {
                epsilon = parse(v)?;
            } else if let Some(v) = comment.strip_prefix("q_hat = ") {
                q_hat = Some(parse(v)?);
            } else if let Some(rest) = comment.strip_prefix("failed n=") {
                let (n, count) = rest
                    .split_once(": ")
                    .ok_or_else(|| Error::InvalidData(format!("bad comment `{line}`")))?;
                failures.insert(parse(n)?, parse(count)?);
            }
            continue;
        }
        if !saw_header {
            if line != "n,count,mean,std,median" {
                return Err(Error::InvalidData(format!("unexpected header `{line}`")));
            }
            saw_header = true;
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 5 {
            return Err(Error::InvalidData(format!("bad summary row `{line}`")));
        }
        rows.push(SummaryRow {
            n: parse(f[0])?,
            count: parse(f[1])?,
            mean_test_loss: parse(f[2])?,
            std_test_loss: parse(f[3])?,
            median_test_loss: parse(f[4])?,
        });
    }
    if !saw_header {
        return Err(Error::InvalidData("missing summary header".into()));
    }
    Ok(CurveSummary {
        rows,
        k_upper,
        epsilon,
        q_hat,
        failures,
    })
}

/// Run the sweep and write records.csv, summary.csv, manifest.json, and a
/// companion gnuplot script into `out_dir`.
pub fn run_and_emit(
    cfg: &ExperimentConfig,
    out_dir: &Path,
) -> Result<(Vec<ExperimentRecord>, CurveSummary)> {
    std::fs::create_dir_all(out_dir)?;
    let (records, summary) = run_experiment(cfg)?;

    let mut records_file = std::fs::File::create(out_dir.join("records.csv"))?;
    write_records_csv(&records, cfg.timing, &mut records_file)?;

    let mut summary_file = std::fs::File::create(out_dir.join("summary.csv"))?;
    emit_plot_data(&summary, &mut summary_file)?;

    let manifest = manifest_json(cfg, &summary)?;
    std::fs::write(out_dir.join("manifest.json"), manifest)?;

    std::fs::write(out_dir.join("plot.gnuplot"), gnuplot_script(&summary))?;
    Ok((records, summary))
}

/// A ready-to-run gnuplot script for the summary curve, with the
/// sample-complexity bound drawn as a vertical line when available.
pub fn gnuplot_script(summary: &CurveSummary) -> String {
    let mut script = String::from(
        "# mean test loss vs training-set size, error bars = one std\n\
         set datafile separator \",\"\n\
         set logscale y\n\
         set xlabel \"training samples n\"\n\
         set ylabel \"test loss\"\n\
         set key off\n",
    );
    if let Some(k) = summary.k_upper {
        script.push_str(&format!(
            "set arrow from {k}, graph 0 to {k}, graph 1 nohead lc rgb \"red\"\n"
        ));
    }
    script.push_str("plot \"summary.csv\" using 1:3:4 with yerrorlines pt 7\n");
    script
}

/// Manifest: the full config, the theory bound (or null), and failure counts.
pub fn manifest_json(cfg: &ExperimentConfig, summary: &CurveSummary) -> Result<String> {
    let bound = match cfg.bound() {
        Ok(b) => serde_json::json!({
            "family": b.family.name(),
            "d_theta": b.d_theta,
            "d_tes_lower": b.d_tes_lower,
            "k_upper": b.k_upper,
        }),
        Err(e) => serde_json::json!({ "unavailable": e.to_string() }),
    };
    let failures: BTreeMap<String, usize> = summary
        .failures
        .iter()
        .map(|(n, c)| (n.to_string(), *c))
        .collect();
    let doc = serde_json::json!({
        "config": cfg,
        "bound": bound,
        "failures": failures,
        "records_file": "records.csv",
        "summary_file": "summary.csv",
    });
    Ok(serde_json::to_string_pretty(&doc)?)
}

/// Near-interpolator generalization diagnostic.
///
/// The theory bounds the test loss of a parameter within metric distance
/// epsilon of the interpolator set by `(q epsilon)^2`. Samplers control the
/// training-loss sublevel set instead, so the loss threshold is converted
/// to a parameter scale heuristically: `epsilon_eff = safety * sqrt(2 eps)`.
#[derive(Debug, Clone)]
pub struct Prop2Report {
    pub q_hat: f64,
    pub epsilon: f64,
    pub epsilon_effective: f64,
    pub safety_factor: f64,
    pub threshold: f64,
    pub n_trials: usize,
    pub fraction_within_bound: f64,
}

pub const PROP2_CAVEAT: &str = "heuristic: trials sample a training-loss sublevel set, \
not the metric epsilon-neighborhood the bound is stated for; the threshold uses \
epsilon_eff = safety * sqrt(2 * epsilon)";

pub const DEFAULT_PROP2_SAFETY: f64 = 2.0;

pub fn check_proposition2(
    records: &[ExperimentRecord],
    epsilon: f64,
    q_hat: f64,
    safety_factor: f64,
    min_n: Option<usize>,
) -> Result<Prop2Report> {
    let eligible: Vec<&ExperimentRecord> = records
        .iter()
        .filter(|r| r.status == TrialStatus::Ok && min_n.is_none_or(|m| r.n >= m))
        .collect();
    if eligible.is_empty() {
        return Err(Error::NoSuccessfulTrials);
    }
    let epsilon_effective = safety_factor * (2.0 * epsilon).sqrt();
    let threshold = (q_hat * epsilon_effective).powi(2);
    let within = eligible.iter().filter(|r| r.test_loss <= threshold).count();
    Ok(Prop2Report {
        q_hat,
        epsilon,
        epsilon_effective,
        safety_factor,
        threshold,
        n_trials: eligible.len(),
        fraction_within_bound: within as f64 / eligible.len() as f64,
    })
}

impl Prop2Report {
    pub fn to_json(&self) -> String {
        format!(
            "{{\"q_hat\":{:.16e},\"epsilon\":{:.16e},\"epsilon_effective\":{:.16e},\"safety_factor\":{},\"threshold\":{:.16e},\"n_trials\":{},\"fraction_within_bound\":{},\"caveat\":{}}}",
            self.q_hat,
            self.epsilon,
            self.epsilon_effective,
            self.safety_factor,
            self.threshold,
            self.n_trials,
            self.fraction_within_bound,
            serde_json::Value::String(PROP2_CAVEAT.to_string())
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Activation;

    fn small_config() -> ExperimentConfig {
        ExperimentConfig {
            teacher_spec: NetworkSpec::dlnn(vec![2, 2, 1]).unwrap(),
            student_spec: NetworkSpec::dlnn(vec![2, 4, 1]).unwrap(),
            sampler_name: SamplerName::PatternSearch,
            sampler: SamplerConfig::default(),
            n_grid: vec![2, 8],
            trials_per_n: 4,
            n_test: 200,
            input_box: Interval::unit(),
            master_seed: 42,
            output_dir: None,
            timing: TimingMode::Suppress,
        }
    }

    #[test]
    fn experiment_is_deterministic() {
        let cfg = small_config();
        let (r1, s1) = run_experiment(&cfg).unwrap();
        let (r2, s2) = run_experiment(&cfg).unwrap();
        assert_eq!(r1.len(), r2.len());
        for (a, b) in r1.iter().zip(&r2) {
            assert_eq!(a.test_loss.to_bits(), b.test_loss.to_bits());
            assert_eq!(a.train_loss.to_bits(), b.train_loss.to_bits());
            assert_eq!(a.iterations, b.iterations);
            assert_eq!(a.seed, b.seed);
        }
        assert_eq!(s1, s2);
    }

    #[test]
    fn records_are_ordered_and_complete() {
        let cfg = small_config();
        let (records, _) = run_experiment(&cfg).unwrap();
        assert_eq!(records.len(), 8);
        let keys: Vec<(usize, usize)> = records.iter().map(|r| (r.n, r.trial)).collect();
        let expected: Vec<(usize, usize)> = [2usize, 8]
            .iter()
            .flat_map(|&n| (0..4).map(move |t| (n, t)))
            .collect();
        assert_eq!(keys, expected);
    }

    #[test]
    fn successful_trials_satisfy_epsilon() {
        let cfg = small_config();
        let (records, _) = run_experiment(&cfg).unwrap();
        for r in &records {
            if r.status == TrialStatus::Ok {
                assert!(r.train_loss <= cfg.sampler.epsilon);
                assert!(r.test_loss >= 0.0);
            }
        }
    }

    #[test]
    fn summary_annotates_bound() {
        let cfg = small_config();
        let (_, summary) = run_experiment(&cfg).unwrap();
        // teacher [2,2,1]: d* = 2*3 + 1*3 = 9, bound 10
        assert_eq!(summary.k_upper, Some(10));
        assert_eq!(summary.epsilon, 0.01);
    }

    #[test]
    fn records_csv_round_trip() {
        let cfg = small_config();
        let (records, _) = run_experiment(&cfg).unwrap();
        let mut buf = Vec::new();
        write_records_csv(&records, TimingMode::Suppress, &mut buf).unwrap();
        let back = read_records_csv(std::io::Cursor::new(&buf)).unwrap();
        assert_eq!(records.len(), back.len());
        for (a, b) in records.iter().zip(&back) {
            assert_eq!(a.n, b.n);
            assert_eq!(a.trial, b.trial);
            assert_eq!(a.status, b.status);
            assert_eq!(a.train_loss.to_bits(), b.train_loss.to_bits());
            assert_eq!(a.test_loss.to_bits(), b.test_loss.to_bits());
        }
    }

    #[test]
    fn plot_data_round_trip() {
        let summary = CurveSummary {
            rows: vec![
                SummaryRow {
                    n: 2,
                    count: 10,
                    mean_test_loss: 0.5,
                    std_test_loss: 0.125,
                    median_test_loss: 0.4375,
                },
                SummaryRow {
                    n: 30,
                    count: 9,
                    mean_test_loss: 1e-3,
                    std_test_loss: 5e-4,
                    median_test_loss: 9e-4,
                },
            ],
            k_upper: Some(22),
            epsilon: 0.01,
            q_hat: Some(1.875),
            failures: BTreeMap::from([(30usize, 1usize)]),
        };
        let mut buf = Vec::new();
        emit_plot_data(&summary, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# k_upper = 22\n"), "{text}");
        assert!(text.contains("n,count,mean,std,median"));
        let back = parse_plot_data(std::io::Cursor::new(&buf)).unwrap();
        assert_eq!(summary, back);
    }

    #[test]
    fn empty_summary_emits_header_only_table() {
        let summary = CurveSummary {
            rows: vec![],
            k_upper: None,
            epsilon: 0.01,
            q_hat: None,
            failures: BTreeMap::new(),
        };
        let mut buf = Vec::new();
        emit_plot_data(&summary, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let data_lines: Vec<&str> = text
            .lines()
            .filter(|l| !l.starts_with('#'))
            .collect();
        assert_eq!(data_lines, vec!["n,count,mean,std,median"]);
    }

    #[test]
    fn config_json_rejects_unknown_keys() {
        let json = r#"{
            "teacher_spec": {"widths": [2,2,1], "activation": "identity", "family": "dlnn"},
            "student_spec": {"widths": [2,4,1], "activation": "identity", "family": "dlnn"},
            "sampler_name": "pattern_search",
            "n_grid": [2],
            "master_seed": 1,
            "bogus_key": true
        }"#;
        let err = ExperimentConfig::from_json(json).unwrap_err();
        assert!(err.to_string().contains("bogus_key"), "{err}");
    }

    #[test]
    fn config_json_minimal_applies_defaults() {
        let json = r#"{
            "teacher_spec": {"widths": [2,2,1], "activation": "identity", "family": "dlnn"},
            "student_spec": {"widths": [2,4,1], "activation": "identity", "family": "dlnn"},
            "sampler_name": "pattern_search",
            "n_grid": [2, 10],
            "master_seed": 7
        }"#;
        let cfg = ExperimentConfig::from_json(json).unwrap();
        assert_eq!(cfg.trials_per_n, 100);
        assert_eq!(cfg.n_test, 2000);
        assert_eq!(cfg.sampler.epsilon, 0.01);
        assert_eq!(cfg.timing, TimingMode::Suppress);
    }

    #[test]
    fn config_rejects_unsorted_grid() {
        let mut cfg = small_config();
        cfg.n_grid = vec![10, 2];
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn prop2_counts_fractions() {
        let records = vec![
            ExperimentRecord {
                n: 10,
                trial: 0,
                seed: 1,
                status: TrialStatus::Ok,
                iterations: 5,
                train_loss: 1e-9,
                test_loss: 1e-9,
                wall_time_ms: 0.0,
            },
            ExperimentRecord {
                n: 10,
                trial: 1,
                seed: 2,
                status: TrialStatus::Ok,
                iterations: 5,
                train_loss: 1e-9,
                test_loss: 1.0,
                wall_time_ms: 0.0,
            },
        ];
        let report = check_proposition2(&records, 1e-8, 2.0, 2.0, None).unwrap();
        assert_eq!(report.n_trials, 2);
        assert!((report.fraction_within_bound - 0.5).abs() < 1e-15);
        assert_eq!(report.q_hat, 2.0);
        assert_eq!(report.epsilon, 1e-8);
        let v: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(v["n_trials"], 2);
        assert!(v["caveat"].as_str().unwrap().contains("sublevel"));
    }

    #[test]
    fn prop2_requires_successful_trials() {
        let records = vec![ExperimentRecord {
            n: 10,
            trial: 0,
            seed: 1,
            status: TrialStatus::Exhausted,
            iterations: 100,
            train_loss: f64::NAN,
            test_loss: f64::NAN,
            wall_time_ms: 0.0,
        }];
        assert!(matches!(
            check_proposition2(&records, 1e-8, 2.0, 2.0, None),
            Err(Error::NoSuccessfulTrials)
        ));
    }

    #[test]
    fn fcdnn_experiment_also_runs() {
        let cfg = ExperimentConfig {
            teacher_spec: NetworkSpec::fcdnn(vec![2, 2, 1], Activation::Tanh).unwrap(),
            student_spec: NetworkSpec::fcdnn(vec![2, 4, 1], Activation::Tanh).unwrap(),
            sampler_name: SamplerName::Adam,
            sampler: SamplerConfig {
                max_iterations: 20_000,
                ..Default::default()
            },
            n_grid: vec![5],
            trials_per_n: 2,
            n_test: 100,
            input_box: Interval::unit(),
            master_seed: 3,
            output_dir: None,
            timing: TimingMode::Suppress,
        };
        let (records, summary) = run_experiment(&cfg).unwrap();
        assert_eq!(records.len(), 2);
        assert!(summary.k_upper.is_some());
    }
}
