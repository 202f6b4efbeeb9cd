//! Command-line interface: per-subject concentration analysis of binary
//! lottery choice files.

use clap::{Parser, Subcommand, ValueEnum};
use mrci::admissibility::{admissibility_matrix, strict_set};
use mrci::error::{Error, Result};
use mrci::inference::{permutation_test, simulate_rrm, RrmSpec};
use mrci::io::{parse_cpc18, parse_generic_csv, write_generic_csv};
use mrci::report::{
    analyze_subject, write_coverage_long, write_gains_long, write_pvalues_long,
    write_reports_csv, write_reports_json, write_stability_long, RunConfig, SubjectReport,
};
use mrci::rules::RuleId;
use mrci::solver::{mrci_exact, mrci_heuristic, solve, SolveMethod};
use mrci::Dataset;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SolverArg {
    Exact,
    Heuristic,
    Auto,
}

impl From<SolverArg> for SolveMethod {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::Exact => SolveMethod::Exact,
            SolverArg::Heuristic => SolveMethod::Heuristic,
            SolverArg::Auto => SolveMethod::Auto,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Parser)]
#[command(name = "mrci", version, about = "Maximum rule concentration analysis for binary lottery choice data")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Master seed; all randomness derives from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Heuristic restarts for headline values.
    #[arg(long, global = true, default_value_t = 100)]
    restarts: usize,

    /// Permutations B of the concentration test.
    #[arg(long, global = true, default_value_t = 500)]
    permutations: usize,

    /// Heuristic restarts per permutation.
    #[arg(long, global = true, default_value_t = 100)]
    inner_restarts: usize,

    /// Random deletion orders for stability scores.
    #[arg(long, global = true, default_value_t = 100)]
    orders: usize,

    /// Comma-separated rule subset (attention rules are always included).
    #[arg(long, global = true, value_delimiter = ',')]
    library: Vec<RuleIdArg>,

    /// Solver for headline values.
    #[arg(long, global = true, value_enum, default_value_t = SolverArg::Auto)]
    solver: SolverArg,

    /// Output format for stdout results.
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,

    /// Output file (or directory for `report`); stdout if omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Exact-solver time budget in seconds.
    #[arg(long, global = true, default_value_t = 10.0)]
    time_budget: f64,

    /// Read inputs as CPC18-format tables instead of the generic schema.
    #[arg(long, global = true)]
    cpc18: bool,
}

/// clap-friendly rule id wrapper.
#[derive(Debug, Clone, Copy)]
struct RuleIdArg(RuleId);

impl std::str::FromStr for RuleIdArg {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        s.parse().map(RuleIdArg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print per-observation strict rule sets and per-rule coverage.
    Admissibility { input: PathBuf },
    /// Compute the maximum rule concentration index per subject.
    Mrci { input: PathBuf },
    /// Concentration gains and deletion-stability scores per subject.
    Diagnostics { input: PathBuf },
    /// Permutation test of excess concentration per subject.
    Permtest { input: PathBuf },
    /// Simulate random-rule-model subjects on the menus of an input file.
    Simulate {
        /// File whose menus are reused for simulation.
        input: PathBuf,
        /// Latent rule weights, e.g. "MAP:0.8,A1:0.1,A2:0.1".
        #[arg(long)]
        weights: String,
        /// Fallback probability of attending to the first-listed alternative.
        #[arg(long, default_value_t = 0.5)]
        fallback_first: f64,
        /// Number of simulated subjects.
        #[arg(long, default_value_t = 1)]
        subjects: usize,
    },
    /// Benchmark the heuristic against the exact solver on random instances.
    BenchExact {
        #[arg(long, default_value_t = 200)]
        instances: usize,
        #[arg(long, default_value_t = 60)]
        max_t: usize,
    },
    /// Full pipeline: solve, diagnostics, permutation test, plot tables.
    Report { input: PathBuf },
}

fn load(path: &Path, cpc18: bool) -> Result<Vec<Dataset>> {
    if cpc18 {
        parse_cpc18(path)
    } else {
        parse_generic_csv(path)
    }
}

fn emit<W: Write>(value: &serde_json::Value, format: FormatArg, mut out: W) -> Result<()> {
    match format {
        FormatArg::Json => {
            serde_json::to_writer_pretty(&mut out, value)?;
            out.write_all(b"\n")?;
        }
        FormatArg::Csv => {
            // Flatten an array of flat objects into a CSV table.
            let rows = value.as_array().cloned().unwrap_or_else(|| vec![value.clone()]);
            let mut w = csv::Writer::from_writer(out);
            if let Some(first) = rows.first().and_then(|r| r.as_object()) {
                let header: Vec<&String> = first.keys().collect();
                w.write_record(&header)?;
                for row in &rows {
                    let obj = row.as_object().expect("homogeneous rows");
                    let record: Vec<String> = header
                        .iter()
                        .map(|k| match &obj[k.as_str()] {
                            serde_json::Value::String(s) => s.clone(),
                            other => other.to_string(),
                        })
                        .collect();
                    w.write_record(&record)?;
                }
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn write_out(cli: &Cli, value: &serde_json::Value) -> Result<()> {
    match &cli.out {
        Some(path) => emit(value, cli.format, File::create(path)?),
        None => emit(value, cli.format, std::io::stdout().lock()),
    }
}

fn run_config(cli: &Cli) -> RunConfig {
    let subset: Vec<RuleId> = cli.library.iter().map(|r| r.0).collect();
    let mut cfg = RunConfig::new(&subset);
    cfg.restarts = cli.restarts;
    cfg.permutations = cli.permutations;
    cfg.inner_restarts = cli.inner_restarts;
    cfg.orders = cli.orders;
    cfg.seed = cli.seed;
    cfg.method = cli.solver.into();
    cfg.time_budget_secs = cli.time_budget;
    cfg
}

fn parse_weights(s: &str) -> Result<Vec<(RuleId, f64)>> {
    s.split(',')
        .map(|part| {
            let (rule, w) = part.split_once(':').ok_or_else(|| {
                Error::InvalidRule(format!("weight entry '{part}' is not RULE:WEIGHT"))
            })?;
            let rule: RuleId = rule.trim().parse()?;
            let w: f64 = w
                .trim()
                .parse()
                .map_err(|_| Error::InvalidRule(format!("weight '{w}' is not a number")))?;
            Ok((rule, w))
        })
        .collect()
}

fn cmd_admissibility(cli: &Cli, input: &Path) -> Result<()> {
    let cfg = run_config(cli);
    let datasets = load(input, cli.cpc18)?;
    let rows: Vec<serde_json::Value> = datasets
        .par_iter()
        .flat_map(|d| {
            d.observations
                .par_iter()
                .map(|obs| {
                    let set = strict_set(obs, &cfg.library, d.attention);
                    let names: Vec<&str> = set.iter().map(|r| r.name()).collect();
                    serde_json::json!({
                        "subject": d.subject_id,
                        "trial": obs.trial,
                        "choice": obs.choice,
                        "strict_set": names.join(";"),
                    })
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let coverage: Vec<serde_json::Value> = datasets
        .iter()
        .flat_map(|d| {
            let mat = admissibility_matrix(d, &cfg.library);
            mat.coverage()
                .into_iter()
                .map(|(f, c)| {
                    serde_json::json!({
                        "subject": d.subject_id,
                        "rule": f.name(),
                        "coverage": c,
                    })
                })
                .collect::<Vec<_>>()
        })
        .collect();
    match cli.format {
        FormatArg::Json => write_out(
            cli,
            &serde_json::json!({ "observations": rows, "coverage": coverage }),
        ),
        // CSV keeps the per-observation table; coverage is available via `report`.
        FormatArg::Csv => write_out(cli, &serde_json::Value::Array(rows)),
    }
}

fn cmd_mrci(cli: &Cli, input: &Path) -> Result<()> {
    let cfg = run_config(cli);
    let settings = cfg.solver_settings();
    let datasets = load(input, cli.cpc18)?;
    let rows: Vec<serde_json::Value> = datasets
        .par_iter()
        .map(|d| {
            let mat = admissibility_matrix(d, &cfg.library);
            let r = solve(&mat, &settings);
            serde_json::json!({
                "subject": d.subject_id,
                "t": d.len(),
                "alpha": d.alpha(),
                "mrci": r.value,
                "n_eff": 1.0 / r.value,
                "method": r.method.name(),
                "certified": r.certified,
                "seed": cfg.seed,
            })
        })
        .collect();
    write_out(cli, &serde_json::Value::Array(rows))
}

fn cmd_diagnostics(cli: &Cli, input: &Path) -> Result<()> {
    let cfg = run_config(cli);
    let settings = cfg.solver_settings();
    let datasets = load(input, cli.cpc18)?;
    let rows: Vec<serde_json::Value> = datasets
        .par_iter()
        .flat_map(|d| {
            let mat = admissibility_matrix(d, &cfg.library);
            let diag = mrci::diagnostics::diagnostics(&mat, cfg.orders, cfg.seed, &settings);
            diag.gains
                .iter()
                .map(|&(f, g)| {
                    let kappa = diag
                        .stability
                        .iter()
                        .find(|(r, _)| *r == f)
                        .map(|&(_, k)| k)
                        .unwrap_or(0.0);
                    serde_json::json!({
                        "subject": d.subject_id,
                        "rule": f.name(),
                        "gain": g,
                        "kappa": kappa,
                        "mrci": diag.mrci,
                        "n_eff": diag.n_eff,
                    })
                })
                .collect::<Vec<_>>()
        })
        .collect();
    write_out(cli, &serde_json::Value::Array(rows))
}

fn cmd_permtest(cli: &Cli, input: &Path) -> Result<()> {
    let cfg = run_config(cli);
    let datasets = load(input, cli.cpc18)?;
    let rows: Vec<serde_json::Value> = datasets
        .par_iter()
        .map(|d| {
            let r = permutation_test(
                d,
                &cfg.library,
                cfg.permutations,
                cfg.inner_restarts,
                cfg.seed,
            );
            serde_json::json!({
                "subject": d.subject_id,
                "t": d.len(),
                "observed_mrci": r.observed_mrci,
                "permutations": r.b,
                "p_value": r.p_value,
                "p_raw": r.p_raw,
                "z_count": r.z_count,
                "seed": r.seed,
            })
        })
        .collect();
    write_out(cli, &serde_json::Value::Array(rows))
}

fn cmd_simulate(
    cli: &Cli,
    input: &Path,
    weights: &str,
    fallback_first: f64,
    subjects: usize,
) -> Result<()> {
    let menus: Vec<mrci::Menu> = load(input, cli.cpc18)?
        .into_iter()
        .flat_map(|d| d.observations.into_iter().map(|o| o.menu))
        .collect();
    let weights = parse_weights(weights)?;
    let simulated: Vec<Dataset> = (0..subjects)
        .map(|k| {
            let spec = RrmSpec::new(
                weights.clone(),
                fallback_first,
                cli.seed.wrapping_add(k as u64),
            )?;
            Ok(simulate_rrm(&menus, &spec, &format!("sim{:04}", k + 1)))
        })
        .collect::<Result<_>>()?;
    match &cli.out {
        Some(path) => write_generic_csv(&simulated, File::create(path)?),
        None => write_generic_csv(&simulated, std::io::stdout().lock()),
    }
}

fn cmd_bench_exact(cli: &Cli, instances: usize, max_t: usize) -> Result<()> {
    let started = Instant::now();
    let budget = Duration::from_secs_f64(cli.time_budget);
    let results: Vec<(u64, u64, usize, bool)> = (0..instances)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
            rng.set_stream(k as u64);
            let t = rng.gen_range(1..=max_t.max(1));
            let density = rng.gen_range(0.2..0.6);
            let rows: Vec<Vec<bool>> = (0..t)
                .map(|_| {
                    let choice_first = rng.gen_bool(0.5);
                    let mut row: Vec<bool> =
                        (0..8).map(|_| rng.gen_bool(density)).collect();
                    // Attention parity: exactly one attention rule admissible.
                    row.push(choice_first);
                    row.push(!choice_first);
                    row
                })
                .collect();
            let choices = rows.iter().map(|r| u8::from(r[8])).collect();
            let mat = mrci::AdmissibilityMatrix {
                rules: mrci::ALL_RULES.to_vec(),
                rows,
                choices,
            };
            let h = mrci_heuristic(&mat, cli.restarts, cli.seed.wrapping_add(k as u64));
            let e = mrci_exact(&mat, budget);
            (h.numerator, e.numerator, t, e.certified)
        })
        .collect();
    let n = results.len() as f64;
    let agree = results.iter().filter(|(h, e, _, _)| h == e).count();
    let mean_gap: f64 = results
        .iter()
        .map(|&(h, e, t, _)| (e - h) as f64 / (t * t) as f64)
        .sum::<f64>()
        / n;
    let max_gap: f64 = results
        .iter()
        .map(|&(h, e, t, _)| (e - h) as f64 / (t * t) as f64)
        .fold(0.0, f64::max);
    let certified = results.iter().filter(|(_, _, _, c)| *c).count();
    write_out(
        cli,
        &serde_json::json!({
            "instances": instances,
            "max_t": max_t,
            "restarts": cli.restarts,
            "agreement_rate": agree as f64 / n,
            "mean_abs_gap": mean_gap,
            "max_abs_gap": max_gap,
            "certified": certified,
            "elapsed_secs": started.elapsed().as_secs_f64(),
        }),
    )
}

fn cmd_report(cli: &Cli, input: &Path) -> Result<()> {
    let cfg = run_config(cli);
    let datasets = load(input, cli.cpc18)?;
    let mut reports: Vec<SubjectReport> = datasets
        .par_iter()
        .map(|d| analyze_subject(d, &cfg))
        .collect();
    reports.sort_by(|a, b| a.subject.cmp(&b.subject));
    match &cli.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            write_reports_json(&reports, &cfg, File::create(dir.join("report.json"))?)?;
            write_reports_csv(&reports, &cfg.library, File::create(dir.join("report.csv"))?)?;
            write_coverage_long(&reports, File::create(dir.join("coverage.csv"))?)?;
            write_gains_long(&reports, File::create(dir.join("gains.csv"))?)?;
            write_stability_long(&reports, File::create(dir.join("stability.csv"))?)?;
            write_pvalues_long(&reports, File::create(dir.join("pvalues.csv"))?)?;
            Ok(())
        }
        None => match cli.format {
            FormatArg::Json => {
                write_reports_json(&reports, &cfg, std::io::stdout().lock())
            }
            FormatArg::Csv => {
                write_reports_csv(&reports, &cfg.library, std::io::stdout().lock())
            }
        },
    }
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Admissibility { input } => cmd_admissibility(cli, input),
        Command::Mrci { input } => cmd_mrci(cli, input),
        Command::Diagnostics { input } => cmd_diagnostics(cli, input),
        Command::Permtest { input } => cmd_permtest(cli, input),
        Command::Simulate { input, weights, fallback_first, subjects } => {
            cmd_simulate(cli, input, weights, *fallback_first, *subjects)
        }
        Command::BenchExact { instances, max_t } => {
            cmd_bench_exact(cli, *instances, *max_t)
        }
        Command::Report { input } => cmd_report(cli, input),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
