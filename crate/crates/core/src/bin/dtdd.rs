use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cfdtdd::harness::{cell_free_scenario, emit_results, run_campaign, ExperimentConfig, OutputFormat};
use cfdtdd::rng::{stream, Stream};
use cfdtdd::scheduler::{
    exhaustive_schedule, greedy_schedule, lower_bound_cost, objective_terms, submodularity_audit, AuditReport,
    SearchMetric,
};
use cfdtdd::validation::{standard_fixtures, validate_cell_free, ValidationReport};
use cfdtdd::{closed_form, Error, Result, Schedule};

const DEFAULT_CONFIG: &str = r#"
scheme = "cf_dtdd_greedy"
processing = "mrc_mfp"
demand = 0.5
drops = 20
seed = 1

[network]
area_side_m = 300.0
num_aps = 8
antennas_per_ap = 4
num_ues = 8
cli_residual_db = -20.0

[pilot]
tau = 200
tau_p = 4

[powers]
ul_snr_db = 10.0
dl_snr_db = 10.0
"#;

#[derive(Parser)]
#[command(name = "dtdd", version, about = "Dynamic-TDD cell-free massive MIMO simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML experiment config
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    drops: Option<usize>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: String,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the campaign described by the config
    Run(Common),
    /// Compare closed-form MRC/MFP SINRs with signal-level Monte-Carlo
    Validate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100_000)]
        realizations: usize,
        #[arg(long, default_value_t = 0.02)]
        tolerance: f64,
    },
    /// Submodularity and monotonicity audit of the scheduling objective
    Audit {
        #[command(flatten)]
        common: Common,
        /// Trials per drop
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
    },
    /// Greedy versus exhaustive scheduling on small networks
    Oracle(Common),
}

fn load(common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::from_file(p)?,
        None => ExperimentConfig::from_toml_str(DEFAULT_CONFIG)?,
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(d) = common.drops {
        cfg.drops = d;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn create(dir: &Path, name: &str) -> Result<(PathBuf, File)> {
    let io = |source| Error::Io {
        path: dir.to_path_buf(),
        source,
    };
    std::fs::create_dir_all(dir).map_err(io)?;
    let path = dir.join(name);
    let f = File::create(&path).map_err(|source| Error::Io {
        path: path.clone(),
        source,
    })?;
    Ok((path, f))
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    let (path, mut f) = create(dir, name)?;
    f.write_all(text.as_bytes()).map_err(|source| Error::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

fn run(common: &Common) -> Result<bool> {
    let cfg = load(common)?;
    let format: OutputFormat = common.format.parse()?;
    let result = run_campaign(&cfg)?;
    let label = result.sweep_parameter.map_or("point", |p| p.label());
    println!("{label:>12} {:>10} {:>10} {:>10}", "median", "90%-likely", "mean");
    for p in &result.points {
        let v = p.value.map_or("-".to_string(), |v| v.to_string());
        println!(
            "{v:>12} {:>10.4} {:>10.4} {:>10.4}",
            p.sum_se.median, p.sum_se.likely_90, p.sum_se.mean
        );
    }
    let dir = common.out.clone().unwrap_or_else(|| PathBuf::from("results"));
    let path = emit_results(&result, format, &dir)?;
    println!("wrote {}", path.display());
    Ok(true)
}

fn validate(common: &Common, realizations: usize, tolerance: f64) -> Result<bool> {
    let reports: Vec<ValidationReport> = match &common.config {
        Some(_) => {
            let cfg = load(common)?;
            (0..cfg.drops)
                .map(|d| {
                    let scn = cell_free_scenario(&cfg, d)?;
                    let modes = Schedule::ue_demand(scn.num_ues(), cfg.demand);
                    let schedule = greedy_schedule(&objective_terms(&scn, &modes))?.schedule;
                    validate_cell_free(&scn, &schedule, realizations, cfg.seed.wrapping_add(d as u64))
                })
                .collect::<Result<_>>()?
        }
        None => {
            let seed = common.seed.unwrap_or(1);
            standard_fixtures(common.drops.unwrap_or(5), seed)?
                .iter()
                .enumerate()
                .map(|(i, (scn, s))| validate_cell_free(scn, s, realizations, seed.wrapping_add(i as u64)))
                .collect::<Result<_>>()?
        }
    };
    let mut ok = true;
    let mut csv = String::from("fixture,direction,ue,closed_form,monte_carlo,relative_error\n");
    for (i, r) in reports.iter().enumerate() {
        let pass = r.passes(tolerance);
        ok &= pass;
        println!(
            "fixture {i}: {} SINRs, max relative error {:.4} {}",
            r.checks.len(),
            r.max_relative_error(),
            if pass { "PASS" } else { "FAIL" }
        );
        for c in &r.checks {
            csv.push_str(&format!(
                "{i},{:?},{},{},{},{}\n",
                c.direction,
                c.ue,
                c.closed_form,
                c.monte_carlo,
                c.relative_error()
            ));
        }
    }
    if let Some(dir) = &common.out {
        let path = match common.format.parse::<OutputFormat>()? {
            OutputFormat::Csv => write_text(dir, "validation.csv", &csv)?,
            OutputFormat::Json => write_text(dir, "validation.json", &serde_json::to_string_pretty(&reports)?)?,
        };
        println!("wrote {}", path.display());
    }
    Ok(ok)
}

fn audit(common: &Common, trials: usize) -> Result<bool> {
    let cfg = load(common)?;
    let mut total = AuditReport::default();
    for d in 0..cfg.drops {
        let scn = cell_free_scenario(&cfg, d)?;
        let terms = objective_terms(&scn, &Schedule::ue_demand(scn.num_ues(), cfg.demand));
        let mut rng = stream(cfg.seed, d as u64, Stream::Channels);
        total.merge(submodularity_audit(&terms, trials, &mut rng));
    }
    println!(
        "trials {} checked {} skipped (clamp) {} submodularity violations {} monotonicity violations {}",
        total.trials,
        total.checked,
        total.skipped_clamped,
        total.submodularity_violations,
        total.monotonicity_violations
    );
    if let Some(dir) = &common.out {
        let path = match common.format.parse::<OutputFormat>()? {
            OutputFormat::Json => write_text(dir, "audit.json", &serde_json::to_string_pretty(&total)?)?,
            OutputFormat::Csv => write_text(
                dir,
                "audit.csv",
                &format!(
                    "trials,checked,skipped_clamped,submodularity_violations,monotonicity_violations\n{},{},{},{},{}\n",
                    total.trials,
                    total.checked,
                    total.skipped_clamped,
                    total.submodularity_violations,
                    total.monotonicity_violations
                ),
            )?,
        };
        println!("wrote {}", path.display());
    }
    Ok(total.submodularity_violations == 0)
}

fn oracle(common: &Common) -> Result<bool> {
    let cfg = load(common)?;
    let mut csv =
        String::from("drop,greedy_sum_se,exhaustive_sum_se,ratio,greedy_lower_bound,exhaustive_lower_bound\n");
    println!(
        "{:>5} {:>10} {:>10} {:>7} {:>12} {:>12}",
        "drop", "greedy", "exhaustive", "ratio", "greedy LB", "best LB"
    );
    for d in 0..cfg.drops {
        let scn = cell_free_scenario(&cfg, d)?;
        let terms = objective_terms(&scn, &Schedule::ue_demand(scn.num_ues(), cfg.demand));
        let g = greedy_schedule(&terms)?;
        let g_se = closed_form::sum_se(&scn, &g.schedule)?.sum_se;
        let cap = cfg.scheduler.exhaustive_cap;
        let best = exhaustive_schedule(&scn, &terms, SearchMetric::TrueSumSe, cap)?;
        let best_lb = exhaustive_schedule(&scn, &terms, SearchMetric::LowerBound, cap)?;
        let ratio = if best.objective_value > 0.0 {
            g_se / best.objective_value
        } else {
            1.0
        };
        let g_lb = lower_bound_cost(&g.schedule, &terms);
        println!(
            "{d:>5} {g_se:>10.4} {:>10.4} {ratio:>7.4} {g_lb:>12.3} {:>12.3}",
            best.objective_value, best_lb.objective_value
        );
        csv.push_str(&format!(
            "{d},{g_se},{},{ratio},{g_lb},{}\n",
            best.objective_value, best_lb.objective_value
        ));
    }
    if let Some(dir) = &common.out {
        let path = write_text(dir, "oracle.csv", &csv)?;
        println!("wrote {}", path.display());
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = match &cli.command {
        Command::Run(c) | Command::Oracle(c) => c,
        Command::Validate { common, .. } | Command::Audit { common, .. } => common,
    };
    if let Some(t) = common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: threads: {e}");
            return ExitCode::FAILURE;
        }
    }
    let outcome = match &cli.command {
        Command::Run(c) => run(c),
        Command::Validate {
            common,
            realizations,
            tolerance,
        } => validate(common, *realizations, *tolerance),
        Command::Audit { common, trials } => audit(common, *trials),
        Command::Oracle(c) => oracle(c),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                eprintln!("  caused by: {s}");
                src = s.source();
            }
            ExitCode::FAILURE
        }
    }
}
