//! Command-line front end: bounds, sampling, experiment sweeps, intrinsic
//! dimension estimation, embedding verification, and Lipschitz probing.
//!
//! Every subcommand is deterministic for a fixed config and seed: reruns
//! produce byte-identical primary output files regardless of `--threads`.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use interplab::data::{make_teacher, sample_dataset};
use interplab::dimest::{default_k_neighbors, lpca_estimate, PointCloud, DEFAULT_FO_ALPHA};
use interplab::harness::{run_and_emit, ExperimentConfig, TimingMode};
use interplab::models::{estimate_lipschitz, Activation, DomainBox, Family, NetworkSpec};
use interplab::rng::{derive_stream, SeededRng};
use interplab::samplers::{run_sampler, SamplerName};
use interplab::theory::{
    bound_dlnn, bound_fcdnn, bound_report_json, dlnn_preconditions, embed_dlnn, embed_fcdnn,
    equivalence_residual, fcdnn_preconditions, PreconditionCheck,
};
use std::fs;
use std::io::Write;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "interplab", version, about = "Teacher-student interpolator laboratory")]
struct Cli {
    /// Worker-pool size (0 = one worker per core). Output files do not
    /// depend on this value.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the strong-sample-complexity bound as JSON.
    Bound(BoundArgs),
    /// Draw near-interpolators for one dataset; write JSONL + params files.
    Sample(SampleArgs),
    /// Run a full test-loss-vs-n sweep; write records/summary/manifest.
    Experiment(ExperimentArgs),
    /// Estimate the intrinsic dimension of a point cloud CSV.
    DimEstimate(DimEstimateArgs),
    /// Construct teacher-equivalent embeddings and verify their residuals.
    VerifyEmbedding(VerifyArgs),
    /// Estimate the empirical Lipschitz constant of the student model.
    Lipschitz(LipschitzArgs),
}

#[derive(Args)]
struct BoundArgs {
    /// dlnn or fcdnn
    #[arg(long)]
    family: String,
    /// Teacher widths, e.g. 2,5,1
    #[arg(long)]
    teacher: String,
    /// Student widths; defaults to the teacher widths.
    #[arg(long)]
    student: Option<String>,
    /// Activation for fcdnn (identity, tanh, sigmoid, softplus).
    #[arg(long, default_value = "tanh")]
    activation: String,
}

#[derive(Args)]
struct SampleArgs {
    /// gc, ps, or adam; overrides the config's sampler_name.
    #[arg(long)]
    sampler: String,
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config's output_dir.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DimEstimateArgs {
    /// Point cloud CSV, one flattened parameter vector per row.
    #[arg(long)]
    points: PathBuf,
    /// Neighbor count; defaults to min(100, N-1).
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_FO_ALPHA)]
    alpha: f64,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    family: String,
    #[arg(long)]
    teacher: String,
    #[arg(long)]
    student: String,
    #[arg(long, default_value_t = 20)]
    seeds: u64,
    #[arg(long, default_value = "tanh")]
    activation: String,
    /// Seed for the teacher draw.
    #[arg(long, default_value_t = 0)]
    teacher_seed: u64,
    /// Domain-box half width. Depth extension multiplies teacher weights by
    /// inverse regular blocks, so the box must be ample; the construction
    /// errors rather than clipping when an entry lands outside.
    #[arg(long, default_value_t = 1e9)]
    r#box: f64,
    /// Random inputs per equivalence check.
    #[arg(long, default_value_t = 100)]
    inputs: usize,
}

#[derive(Args)]
struct LipschitzArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    probes: usize,
}

fn parse_widths(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|w| {
            w.trim()
                .parse::<usize>()
                .with_context(|| format!("bad width `{w}` in `{s}`"))
        })
        .collect()
}

fn parse_spec(family: &str, widths: &str, activation: &str) -> Result<NetworkSpec> {
    let widths = parse_widths(widths)?;
    let spec = match family {
        "dlnn" => NetworkSpec::dlnn(widths)?,
        "fcdnn" => NetworkSpec::fcdnn(widths, Activation::parse(activation)?)?,
        other => bail!("unknown family `{other}` (expected dlnn or fcdnn)"),
    };
    Ok(spec)
}

fn load_config(path: &PathBuf) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    Ok(ExperimentConfig::from_json(&text)?)
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    if cli.threads > 0 {
        interplab::parallel::init_thread_pool(cli.threads);
    }
    match cli.command {
        Command::Bound(args) => cmd_bound(args),
        Command::Sample(args) => cmd_sample(args),
        Command::Experiment(args) => cmd_experiment(args),
        Command::DimEstimate(args) => cmd_dim_estimate(args),
        Command::VerifyEmbedding(args) => cmd_verify_embedding(args),
        Command::Lipschitz(args) => cmd_lipschitz(args),
    }
}

fn cmd_bound(args: BoundArgs) -> Result<()> {
    let teacher = parse_spec(&args.family, &args.teacher, &args.activation)?;
    let student_widths = args.student.as_deref().unwrap_or(&args.teacher);
    let student = parse_spec(&args.family, student_widths, &args.activation)?;

    let (report, checks): (Result<_, interplab::Error>, Vec<PreconditionCheck>) =
        match teacher.family() {
            Family::Dlnn => (
                bound_dlnn(&teacher, &student),
                dlnn_preconditions(&teacher, &student),
            ),
            Family::Fcdnn => (
                bound_fcdnn(&teacher, &student),
                fcdnn_preconditions(&teacher, &student),
            ),
        };
    match report {
        Ok(report) => {
            println!("{}", bound_report_json(&report, &checks));
            Ok(())
        }
        Err(e) => {
            let checks_json: Vec<serde_json::Value> = checks
                .iter()
                .map(|c| serde_json::json!({"name": c.name, "ok": c.ok}))
                .collect();
            println!(
                "{}",
                serde_json::json!({
                    "family": args.family,
                    "error": e.to_string(),
                    "preconditions": checks_json,
                })
            );
            bail!("bound preconditions violated: {e}");
        }
    }
}

fn cmd_sample(args: SampleArgs) -> Result<()> {
    let mut cfg = load_config(&args.config)?;
    cfg.sampler_name = SamplerName::parse(&args.sampler)?;
    fs::create_dir_all(&args.out)?;

    let teacher = cfg.teacher();
    let n = cfg.n_grid[0];
    let include_timing = cfg.timing == TimingMode::Wall;

    let outcomes = interplab::parallel::map_indexed(cfg.trials_per_n, |trial| {
        let dataset_rng = SeededRng::with_stream(
            cfg.master_seed,
            derive_stream(&[n as u64, trial as u64, 1]),
        );
        let sampler_rng = SeededRng::with_stream(
            cfg.master_seed,
            derive_stream(&[n as u64, trial as u64, 2]),
        );
        let dataset = sample_dataset(&teacher, n, &cfg.input_box, dataset_rng);
        run_sampler(cfg.sampler_name, &cfg.student_spec, &dataset, &cfg.sampler, sampler_rng)
    });

    let mut jsonl = fs::File::create(args.out.join("outcomes.jsonl"))?;
    let mut failures = 0usize;
    for (trial, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(o) => {
                let fname = format!("params_{trial:04}.bin");
                let mut f = fs::File::create(args.out.join(&fname))?;
                o.params.write_binary(&mut f)?;
                writeln!(jsonl, "{}", o.jsonl_line(&fname, include_timing))?;
            }
            Err(e) => {
                failures += 1;
                writeln!(
                    jsonl,
                    "{}",
                    serde_json::json!({
                        "sampler": cfg.sampler_name.name(),
                        "trial": trial,
                        "error": e.to_string(),
                    })
                )?;
            }
        }
    }
    eprintln!(
        "wrote {} outcomes ({failures} failed) to {}",
        cfg.trials_per_n,
        args.out.display()
    );
    Ok(())
}

fn cmd_experiment(args: ExperimentArgs) -> Result<()> {
    let cfg = load_config(&args.config)?;
    let out = args
        .out
        .or_else(|| cfg.output_dir.clone())
        .context("no output directory: pass --out or set output_dir in the config")?;
    if cfg.bound().is_err() {
        eprintln!("warning: bound preconditions do not hold; summary omits k_upper");
    }
    let (records, summary) = run_and_emit(&cfg, &out)?;
    let ok = records
        .iter()
        .filter(|r| r.status == interplab::harness::TrialStatus::Ok)
        .count();
    eprintln!(
        "{} trials ({} ok), {} summary rows -> {}",
        records.len(),
        ok,
        summary.rows.len(),
        out.display()
    );
    Ok(())
}

fn cmd_dim_estimate(args: DimEstimateArgs) -> Result<()> {
    let file = fs::File::open(&args.points)
        .with_context(|| format!("opening {}", args.points.display()))?;
    let cloud = PointCloud::read_csv(
        std::io::BufReader::new(file),
        args.points.display().to_string(),
    )?;
    let k = args.k.unwrap_or_else(|| default_k_neighbors(cloud.len()));
    let estimate = lpca_estimate(&cloud, k, args.alpha)?;
    println!("{}", estimate.to_json());
    Ok(())
}

fn cmd_verify_embedding(args: VerifyArgs) -> Result<()> {
    let teacher_spec = parse_spec(&args.family, &args.teacher, &args.activation)?;
    let student_spec = parse_spec(&args.family, &args.student, &args.activation)?;
    let domain = DomainBox::new(args.r#box)?;
    let teacher = make_teacher(&teacher_spec, SeededRng::new(args.teacher_seed));
    let tolerance = match teacher_spec.family() {
        Family::Dlnn => 1e-8,
        Family::Fcdnn => 1e-12,
    };

    println!("seed  free_dim  max_residual   verdict");
    let mut worst = 0.0f64;
    let mut failed = 0usize;
    for seed in 0..args.seeds {
        let rng = SeededRng::with_stream(args.teacher_seed, derive_stream(&[seed, 10]));
        let witness = match teacher_spec.family() {
            Family::Dlnn => embed_dlnn(&teacher, &student_spec, rng, &domain)?,
            Family::Fcdnn => embed_fcdnn(&teacher, &student_spec, rng, &domain)?,
        };
        let residual = equivalence_residual(
            &teacher,
            &witness.student_params,
            args.inputs,
            &interplab::models::Interval::unit(),
            SeededRng::with_stream(args.teacher_seed, derive_stream(&[seed, 11])),
        )?;
        worst = worst.max(residual);
        let pass = residual <= tolerance;
        if !pass {
            failed += 1;
        }
        println!(
            "{seed:>4}  {:>8}  {residual:>12.3e}   {}",
            witness.free_dimension,
            if pass { "pass" } else { "FAIL" }
        );
    }
    println!(
        "worst residual {worst:.3e} over {} seeds (tolerance {tolerance:.0e})",
        args.seeds
    );
    if failed > 0 {
        bail!("{failed} embedding(s) exceeded the residual tolerance");
    }
    Ok(())
}

fn cmd_lipschitz(args: LipschitzArgs) -> Result<()> {
    let cfg = load_config(&args.config)?;
    let q_hat = estimate_lipschitz(
        &cfg.student_spec,
        &cfg.sampler.domain_box,
        &cfg.input_box,
        args.probes,
        SeededRng::with_stream(cfg.master_seed, derive_stream(&[4])),
    );
    println!(
        "{}",
        serde_json::json!({
            "q_hat": q_hat,
            "n_probe": args.probes,
            "domain_half_width": cfg.sampler.domain_box.half_width(),
            "input_box": {"lo": cfg.input_box.lo, "hi": cfg.input_box.hi},
            "note": "lower estimate: max Jacobian spectral norm over sampled (theta, x)",
        })
    );
    Ok(())
}
