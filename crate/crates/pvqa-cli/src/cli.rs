//! Command-line front end: instance generation, single runs, ensemble
//! sweeps, penalty tuning, and the exact-optima oracle.

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use pvqa_core::problems::{brute_force_optima, derive_qkp, gen_gpp, gen_qkp_base, ProblemInstance};

use crate::config::{parse_optimizer, parse_schedule, Penalty, RunConfig};
use crate::formats;
use crate::harness::{
    ensemble_run, run_variant, tune_penalty, Mode, PenaltyGrid, RunSetup, Variant, VariantSpec,
};

#[derive(Parser)]
#[command(
    name = "pvqa",
    version,
    about = "Variational quantum annealing simulator with greedy feasibility repair"
)]
pub struct Cli {
    /// RNG seed for generation and shot sampling.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads for sweeps and batched objective evaluations.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// Output file or directory (command dependent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Integrator step override (default: min(1e-3, T/1000)).
    #[arg(long, global = true)]
    pub dt: Option<f64>,

    /// Also write optimizer traces and probability dumps.
    #[arg(long, global = true)]
    pub trace: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Generate a problem instance file.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Run one variant on one instance and write its report.
    Run(RunArgs),
    /// Run variant/horizon sweeps over an instance set and write summary CSV.
    Sweep(SweepArgs),
    /// Grid-tune the penalty coefficient for a variant on an instance.
    Tune(TuneArgs),
    /// Dump the exact optimum set of an instance.
    Oracle {
        #[arg(long)]
        instance: PathBuf,
    },
}

#[derive(Subcommand)]
pub enum GenKind {
    /// Random graph partitioning instance (Bernoulli edges).
    Gpp {
        /// Even node count.
        #[arg(long)]
        nodes: usize,
        #[arg(long, default_value_t = 0.5)]
        density: f64,
    },
    /// Quadratic knapsack instance derived from a 100-item base.
    Qkp {
        #[arg(long)]
        items: usize,
        /// Benchmark-layout base file; a seeded synthetic base when absent.
        #[arg(long)]
        base: Option<PathBuf>,
    },
}

#[derive(Args)]
pub struct RunArgs {
    /// JSON config mirroring these flags; flags override file values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub instance: Option<PathBuf>,
    /// pvqa | vqa | pqa | qa
    #[arg(long)]
    pub variant: Option<String>,
    /// linear | annealer | continuous[:M] | qaoa[:P]
    #[arg(long)]
    pub schedule: Option<String>,
    /// Annealing time T.
    #[arg(long)]
    pub horizon: Option<f64>,
    /// none | powell[:N] | grid[:RES] | gd[:N]
    #[arg(long)]
    pub optimizer: Option<String>,
    /// Penalty coefficient A, or `auto`.
    #[arg(long)]
    pub penalty: Option<String>,
    /// Emulate projective measurements with this many shots.
    #[arg(long)]
    pub shots: Option<u64>,
    /// Keep only the k best repaired shots (shot mode only).
    #[arg(long)]
    pub top_k: Option<u64>,
}

#[derive(Args)]
pub struct SweepArgs {
    /// Instance files, or directories containing them.
    #[arg(long, required = true, num_args = 1.., value_delimiter = ',')]
    pub instances: Vec<PathBuf>,
    /// Comma-separated variant list; row order follows this list.
    #[arg(long, default_value = "pvqa,vqa,pqa,qa", value_delimiter = ',')]
    pub variants: Vec<String>,
    /// Comma-separated annealing times.
    #[arg(long = "horizons", default_value = "1.0", value_delimiter = ',')]
    pub horizons: Vec<f64>,
    /// Schedule family for the variational variants.
    #[arg(long, default_value = "linear")]
    pub schedule: String,
    /// QAOA layer counts to sweep (qaoa schedule only).
    #[arg(long = "p-list", value_delimiter = ',')]
    pub p_list: Option<Vec<usize>>,
    /// Optimizer for the variational variants.
    #[arg(long)]
    pub optimizer: Option<String>,
    /// Penalty coefficient A, or `auto`.
    #[arg(long, default_value = "auto")]
    pub penalty: String,
}

#[derive(Args)]
pub struct TuneArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, default_value = "pqa")]
    pub variant: String,
    #[arg(long, default_value = "linear")]
    pub schedule: String,
    #[arg(long, default_value_t = 1.0)]
    pub horizon: f64,
    #[arg(long)]
    pub optimizer: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    pub a_min: f64,
    #[arg(long, default_value_t = 1.0)]
    pub a_step: f64,
    #[arg(long, default_value_t = 10.0)]
    pub a_max: f64,
}

pub fn dispatch(cli: Cli) -> Result<()> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("configuring worker threads")?;
    }
    match cli.command {
        Command::Gen { kind } => cmd_gen(kind, cli.seed.unwrap_or(0), cli.out),
        Command::Run(args) => cmd_run(args, cli.seed, cli.dt, cli.out, cli.trace),
        Command::Sweep(args) => cmd_sweep(args, cli.dt, cli.out, cli.trace),
        Command::Tune(args) => cmd_tune(args, cli.dt, cli.out),
        Command::Oracle { instance } => cmd_oracle(instance, cli.out),
    }
}

fn cmd_gen(kind: GenKind, seed: u64, out: Option<PathBuf>) -> Result<()> {
    let instance = match kind {
        GenKind::Gpp { nodes, density } => {
            let g = gen_gpp(nodes, density, seed).map_err(|e| anyhow::anyhow!("{e}"))?;
            println!(
                "gpp instance: {} nodes, {} edges, seed {}",
                g.n_nodes(),
                g.edges().len(),
                seed
            );
            ProblemInstance::Gpp(g)
        }
        GenKind::Qkp { items, base } => {
            let base_instance = match base {
                Some(path) => formats::read_qkp_benchmark(&path)?,
                None => gen_qkp_base(seed),
            };
            let q = derive_qkp(&base_instance, items).map_err(|e| anyhow::anyhow!("{e}"))?;
            println!(
                "qkp instance: {} items, capacity {}, seed {}",
                q.n_items(),
                q.capacity(),
                seed
            );
            ProblemInstance::Qkp(q)
        }
    };
    let path = out.unwrap_or_else(|| PathBuf::from(format!("{}.json", instance.label())));
    formats::write_instance(&path, &instance)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_run(
    args: RunArgs,
    seed: Option<u64>,
    dt: Option<f64>,
    out: Option<PathBuf>,
    trace: bool,
) -> Result<()> {
    let file_config = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let mode = args.shots.map(|count| Mode::Shots {
        count,
        top_k: args.top_k,
        seed: seed.unwrap_or(0),
    });
    let flag_config = RunConfig {
        instance: args.instance,
        variant: args.variant.as_deref().map(str::parse).transpose()?,
        schedule: args.schedule.as_deref().map(parse_schedule).transpose()?,
        horizon: args.horizon,
        optimizer: args.optimizer.as_deref().map(parse_optimizer).transpose()?,
        mode,
        penalty: args.penalty.as_deref().map(str::parse).transpose()?,
        dt,
        out,
        trace: trace.then_some(true),
    };
    let resolved = file_config.merged_with(flag_config).resolve()?;
    resolved
        .spec
        .validate()
        .map_err(|e| anyhow::anyhow!("{e}"))?;

    let instance = formats::read_instance(&resolved.instance)?;
    let setup = match resolved.penalty {
        Penalty::Fixed(a) => RunSetup::prepare(&instance, a),
        Penalty::Auto(_) => RunSetup::with_auto_penalty(&instance),
    }
    .map_err(|e| anyhow::anyhow!("{e}"))?;
    let outcome =
        run_variant(&resolved.spec, &setup, resolved.dt).map_err(|e| anyhow::anyhow!("{e}"))?;

    let dir = resolved.out.unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let stem = format!(
        "{}_{}",
        outcome.report.instance,
        outcome.report.variant.as_str()
    );
    formats::write_report(&dir.join(format!("{stem}.json")), &outcome.report)?;
    if resolved.trace {
        fs::write(
            dir.join(format!("{stem}_raw.csv")),
            formats::distribution_csv(&outcome.raw),
        )?;
        if let Some(post) = &outcome.post {
            fs::write(
                dir.join(format!("{stem}_post.csv")),
                formats::distribution_csv(post),
            )?;
            fs::write(
                dir.join(format!("{stem}_repair.json")),
                formats::repair_traces_json(&setup.repair, &outcome.raw)?,
            )?;
        }
        if let Some(tr) = &outcome.optimizer_trace {
            fs::write(
                dir.join(format!("{stem}_trace.csv")),
                formats::trace_csv(tr),
            )?;
        }
    }

    let r = &outcome.report;
    let fmt_opt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.6}"));
    println!(
        "{} p_suc={:.6} c_ave={} residual={}",
        r.variant.as_str(),
        r.p_suc,
        fmt_opt(r.c_ave),
        fmt_opt(r.residual),
    );
    Ok(())
}

fn collect_instances(paths: &[PathBuf]) -> Result<Vec<ProblemInstance>> {
    let mut files: Vec<PathBuf> = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut entries: Vec<PathBuf> = fs::read_dir(p)
                .with_context(|| format!("reading instance directory {}", p.display()))?
                .filter_map(|e| e.ok())
                .map(|e| e.path())
                .filter(|p| p.extension().is_some_and(|x| x == "json"))
                .collect();
            entries.sort();
            files.extend(entries);
        } else {
            files.push(p.clone());
        }
    }
    if files.is_empty() {
        bail!("no instance files found");
    }
    files.iter().map(|f| formats::read_instance(f)).collect()
}

fn cmd_sweep(args: SweepArgs, dt: Option<f64>, out: Option<PathBuf>, trace: bool) -> Result<()> {
    let instances = collect_instances(&args.instances)?;
    let penalty: Penalty = args.penalty.parse()?;
    let schedule_families = match (&args.p_list, parse_schedule(&args.schedule)?) {
        (Some(ps), crate::harness::ScheduleFamily::Qaoa { .. }) => ps
            .iter()
            .map(|&p| crate::harness::ScheduleFamily::Qaoa { p })
            .collect(),
        (Some(_), _) => bail!("--p-list requires the qaoa schedule"),
        (None, family) => vec![family],
    };

    let mut specs = Vec::new();
    for variant_name in &args.variants {
        let variant: Variant = variant_name.parse()?;
        for family in &schedule_families {
            for &horizon in &args.horizons {
                let spec = if variant.variational() {
                    let optimizer = match &args.optimizer {
                        Some(s) => parse_optimizer(s)?,
                        None => crate::config::default_optimizer(variant, family),
                    };
                    VariantSpec {
                        variant,
                        schedule: family.clone(),
                        horizon,
                        optimizer,
                        mode: Mode::Exact,
                    }
                } else {
                    VariantSpec::baseline(variant, horizon)
                };
                spec.validate().map_err(|e| anyhow::anyhow!("{e}"))?;
                specs.push(spec);
            }
        }
    }

    let setups: Result<Vec<RunSetup>> = instances
        .iter()
        .map(|inst| {
            match penalty {
                Penalty::Fixed(a) => RunSetup::prepare(inst, a),
                Penalty::Auto(_) => RunSetup::with_auto_penalty(inst),
            }
            .map_err(|e| anyhow::anyhow!("{e}"))
        })
        .collect();
    let setups = setups?;

    let results = ensemble_run(&specs, &setups, dt).map_err(|e| anyhow::anyhow!("{e}"))?;
    let rows: Vec<_> = results.iter().map(|r| r.row.clone()).collect();
    let csv = formats::summary_csv(&rows);
    match out {
        Some(path) => {
            fs::write(&path, &csv).with_context(|| format!("writing {}", path.display()))?;
            if trace {
                let reports: Vec<_> = results
                    .iter()
                    .flat_map(|r| r.outcomes.iter().map(|o| o.report.clone()))
                    .collect();
                let jsonl = path.with_extension("jsonl");
                fs::write(&jsonl, formats::reports_json_lines(&reports)?)?;
                let mut report_csv = String::from(formats::REPORT_CSV_HEADER);
                report_csv.push('\n');
                for r in &reports {
                    report_csv.push_str(&formats::report_csv_row(r));
                    report_csv.push('\n');
                }
                fs::write(path.with_extension("reports.csv"), report_csv)?;
            }
            println!("wrote {} rows to {}", rows.len(), path.display());
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn cmd_tune(args: TuneArgs, dt: Option<f64>, out: Option<PathBuf>) -> Result<()> {
    let instance = formats::read_instance(&args.instance)?;
    let variant: Variant = args.variant.parse()?;
    let schedule = parse_schedule(&args.schedule)?;
    let spec = if variant.variational() {
        let optimizer = match &args.optimizer {
            Some(s) => parse_optimizer(s)?,
            None => crate::harness::OptimizerSpec::Powell { max_iter: 10 },
        };
        VariantSpec {
            variant,
            schedule,
            horizon: args.horizon,
            optimizer,
            mode: Mode::Exact,
        }
    } else {
        VariantSpec::baseline(variant, args.horizon)
    };
    spec.validate().map_err(|e| anyhow::anyhow!("{e}"))?;
    let grid = PenaltyGrid {
        a_min: args.a_min,
        step: args.a_step,
        a_max: args.a_max,
    };
    let (a_star, points) =
        tune_penalty(&spec, &instance, &grid, dt).map_err(|e| anyhow::anyhow!("{e}"))?;
    let csv = formats::tune_csv(&points);
    match out {
        Some(path) => {
            fs::write(&path, &csv).with_context(|| format!("writing {}", path.display()))?;
        }
        None => print!("{csv}"),
    }
    println!("A* = {a_star}");
    Ok(())
}

fn cmd_oracle(instance_path: PathBuf, out: Option<PathBuf>) -> Result<()> {
    let instance = formats::read_instance(&instance_path)?;
    // the optimum set does not depend on the penalty weight
    let pair = instance.qubo_pair(1.0);
    let constraint = instance.constraint().map_err(|e| anyhow::anyhow!("{e}"))?;
    let optima = brute_force_optima(&pair, &constraint).map_err(|e| anyhow::anyhow!("{e}"))?;
    let configs: Vec<String> = optima.configs.iter().map(|x| x.to_string()).collect();
    let json = serde_json::json!({
        "instance": instance.label(),
        "c_opt": optima.c_opt,
        "count": configs.len(),
        "optima": configs,
    });
    let text = serde_json::to_string_pretty(&json)? + "\n";
    match out {
        Some(path) => {
            fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        }
        None => print!("{text}"),
    }
    Ok(())
}
