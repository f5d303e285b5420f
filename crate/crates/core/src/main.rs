use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use polewarp::benchmark::indicator_along_trajectory;
use polewarp::classifier::{assess, assess_detailed, bisect_grid, oracle_run, Assessment, CctReport, ScenarioConfig, StageError};
use polewarp::manifest::{write_atomic, CctRecord, RunManifest, VerdictRecord};
use polewarp::precision::{HPReal, Precision};
use polewarp::{scenarios, Error};

const EXIT_STABLE: u8 = 0;
const EXIT_UNSTABLE: u8 = 10;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

/// Integration-free transient stability assessment.
#[derive(Parser, Debug)]
#[command(name = "polewarp", version, about)]
struct Cli {
    /// Scenario file, or the name of a built-in scenario. Repeat for a batch.
    #[arg(long = "config", global = true, value_name = "PATH")]
    configs: Vec<String>,
    /// Print machine-readable JSON instead of a summary line.
    #[arg(long, global = true)]
    json: bool,
    /// Working precision in decimal digits (overrides the scenario).
    #[arg(long, global = true, value_name = "N")]
    digits: Option<u32>,
    /// Padé numerator and denominator degrees.
    #[arg(long, global = true, num_args = 2, value_names = ["L", "M"])]
    order: Option<Vec<usize>>,
    /// Pole tolerance around the horizon.
    #[arg(long, global = true, value_name = "E")]
    epsilon: Option<f64>,
    #[arg(long, global = true, default_value = "polewarp-out", value_name = "PATH")]
    out_dir: PathBuf,
    /// Worker threads for batch runs.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone)]
enum Command {
    /// Classify the scenario and write its verdict.
    Assess,
    /// Integrate the reference trajectory: t, tau, states, h.
    Simulate,
    /// Join the reference indicator with the approximant on the contracted axis.
    Compare,
    /// Dump the state and indicator Taylor coefficients.
    Coeffs,
    /// List every denominator root with its filter outcome.
    PadeRoots,
    /// Bracket the critical clearing time with the method and the oracle.
    CctBisect {
        /// Clearing time expected to be stable (s).
        #[arg(long)]
        lo: f64,
        /// Clearing time expected to be unstable (s).
        #[arg(long)]
        hi: f64,
        /// Bracket width (s).
        #[arg(long, default_value_t = 0.01)]
        step: f64,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Assess => "assess",
            Command::Simulate => "simulate",
            Command::Compare => "compare",
            Command::Coeffs => "coeffs",
            Command::PadeRoots => "pade-roots",
            Command::CctBisect { .. } => "cct-bisect",
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn at(stage: &str, error: Error) -> Self {
        match &error {
            Error::Config { .. } | Error::InvalidParameter { .. } | Error::Io(_) | Error::Json(_) => Failure {
                code: EXIT_CONFIG,
                message: error.to_string(),
            },
            Error::Precondition(_) => Failure {
                code: EXIT_CONFIG,
                message: format!("{stage}: {error}"),
            },
            _ => Failure {
                code: EXIT_NUMERICAL,
                message: format!("numerical failure in stage `{stage}`: {error}"),
            },
        }
    }
}

impl From<StageError> for Failure {
    fn from(e: StageError) -> Self {
        Failure::at(e.stage, e.error)
    }
}

struct Outcome {
    summary: String,
    json: Json,
    code: u8,
}

/// A record kept in both layouts so field order survives printing.
struct Json {
    compact: String,
    pretty: String,
}

impl Json {
    fn of<T: serde::Serialize>(value: &T) -> Self {
        Json {
            compact: serde_json::to_string(value).expect("record serializes"),
            pretty: serde_json::to_string_pretty(value).expect("record serializes"),
        }
    }
}

fn verdict_code(stable: bool) -> u8 {
    if stable {
        EXIT_STABLE
    } else {
        EXIT_UNSTABLE
    }
}

fn resolve_config(arg: &str, cli: &Cli) -> Result<ScenarioConfig, Failure> {
    let path = Path::new(arg);
    let mut cfg = if path.exists() {
        ScenarioConfig::load(path)
    } else if let Some(builtin) = scenarios::builtin(arg) {
        builtin
    } else {
        Err(Error::config("--config", format!("{arg}: no such file or built-in scenario")))
    }
    .map_err(|e| Failure::at("configuration", e))?;

    if let Some(d) = cli.digits {
        cfg.digits = Some(d);
    } else if cfg.digits.is_none() {
        if let Ok(text) = std::env::var("POLEWARP_DIGITS") {
            let d = text
                .trim()
                .parse()
                .map_err(|_| Failure::at("configuration", Error::config("POLEWARP_DIGITS", format!("not a digit count: {text:?}"))))?;
            cfg.digits = Some(d);
        }
    }
    if let Some(o) = &cli.order {
        cfg.order.num = o[0];
        cfg.order.den = o[1];
    }
    if let Some(e) = cli.epsilon {
        cfg.epsilon = Some(e);
    }
    cfg.validate().map_err(|e| Failure::at("configuration", e))?;
    Ok(cfg)
}

/// Collects output files and finishes with the manifest.
struct Outputs<'a> {
    dir: &'a Path,
    name: String,
    manifest: RunManifest,
}

impl Outputs<'_> {
    fn write(&mut self, suffix: &str, bytes: &[u8]) -> Result<(), Failure> {
        let path = self.dir.join(format!("{}.{suffix}", self.name));
        write_atomic(&path, bytes).map_err(|e| Failure::at("output", e))?;
        self.manifest.outputs.push(path);
        Ok(())
    }

    fn write_json<T: serde::Serialize>(&mut self, suffix: &str, value: &T) -> Result<(), Failure> {
        let text = serde_json::to_vec_pretty(value).map_err(|e| Failure::at("output", e.into()))?;
        self.write(suffix, &text)
    }

    fn write_csv(&mut self, suffix: &str, header: &[String], rows: &[Vec<String>]) -> Result<(), Failure> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Failure::at("output", Error::Io(e.into()));
        w.write_record(header).map_err(io)?;
        for r in rows {
            w.write_record(r).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Failure::at("output", Error::Io(e.into_error())))?;
        self.write(suffix, &bytes)
    }

    fn finish(mut self, total_seconds: f64) -> Result<(), Failure> {
        self.manifest.total_seconds = total_seconds;
        let path = self.dir.join(format!("{}.manifest.json", self.name));
        self.manifest.outputs.push(path.clone());
        let text = serde_json::to_vec_pretty(&self.manifest).map_err(|e| Failure::at("output", e.into()))?;
        write_atomic(&path, &text).map_err(|e| Failure::at("output", e))
    }
}

fn verdict_outcome(a: &Assessment, cfg: &ScenarioConfig) -> Outcome {
    let v = &a.verdict;
    let pole = v.tau_pole.as_deref().map_or("none".to_string(), |s| {
        HPReal::parse(s, Precision::digits(30)).ok().map_or(s.to_string(), |p| p.to_sci_string(8))
    });
    Outcome {
        summary: format!("{}: {:?} (tau_pole = {pole}, eps = {})", cfg.name, v.status, v.epsilon),
        json: Json::of(&VerdictRecord {
            config: cfg.clone(),
            verdict: v.clone(),
        }),
        code: verdict_code(v.status.is_stable()),
    }
}

fn run_assessment(out: &mut Outputs) -> Result<(Assessment, f64), Failure> {
    let start = Instant::now();
    let a = assess_detailed(&out.manifest.config)?;
    let wall = start.elapsed().as_secs_f64();
    out.manifest.record_pipeline(&a.timings);
    let record = VerdictRecord {
        config: out.manifest.config.clone(),
        verdict: a.verdict.clone(),
    };
    out.write_json("verdict.json", &record)?;
    Ok((a, wall))
}

/// Shortest decimal that parses back to the same `f64`.
fn num(x: f64) -> String {
    if x != 0.0 && !(1e-4..1e15).contains(&x.abs()) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn run_one(cfg: ScenarioConfig, command: &Command, dir: &Path) -> Result<Outcome, Failure> {
    let mut out = Outputs {
        dir,
        name: cfg.name.clone(),
        manifest: RunManifest::new(command.name(), &cfg),
    };
    match command {
        Command::Assess => {
            let (a, wall) = run_assessment(&mut out)?;
            let outcome = verdict_outcome(&a, &cfg);
            out.finish(wall)?;
            Ok(outcome)
        }
        Command::Simulate => {
            let start = Instant::now();
            let (traj, verdict, x_star) = oracle_run(&cfg).map_err(|e| Failure::at("oracle", e))?;
            let t_oracle = start.elapsed().as_secs_f64();
            let samples = indicator_along_trajectory(&traj, &x_star, &cfg.mapping).map_err(|e| Failure::at("indicator", e))?;
            let wall = start.elapsed().as_secs_f64();
            out.manifest.record("oracle", t_oracle);
            out.manifest.record("indicator", wall - t_oracle);

            let names = polewarp::classifier::prepare(&cfg).map_err(|e| Failure::at("prepare", e))?.model.state_names();
            let mut header = vec!["t".to_string(), "tau".to_string()];
            header.extend(names);
            header.push("h".into());
            let rows: Vec<Vec<String>> = samples
                .iter()
                .zip(&traj.states)
                .map(|(s, x)| {
                    let mut r = vec![num(s.t), num(s.tau)];
                    r.extend(x.iter().copied().map(num));
                    r.push(fmt_opt(s.h));
                    r
                })
                .collect();
            out.write_csv("simulate.csv", &header, &rows)?;
            out.finish(wall)?;
            Ok(Outcome {
                summary: format!("{}: oracle {verdict:?}, {} samples", cfg.name, rows.len()),
                json: Json::of(&serde_json::json!({ "name": cfg.name, "oracle": verdict, "samples": rows.len() })),
                code: EXIT_STABLE,
            })
        }
        Command::Compare => {
            let start = Instant::now();
            let a = assess_detailed(&cfg)?;
            let t_assess = start.elapsed().as_secs_f64();
            out.manifest.record_pipeline(&a.timings);
            let (traj, _, x_star) = oracle_run(&cfg).map_err(|e| Failure::at("oracle", e))?;
            let t_oracle = start.elapsed().as_secs_f64();
            let samples = indicator_along_trajectory(&traj, &x_star, &cfg.mapping).map_err(|e| Failure::at("indicator", e))?;
            let prec = a.approximant.precision();
            let stride = samples.len().div_ceil(2000).max(1);
            let rows: Vec<Vec<String>> = samples
                .iter()
                .step_by(stride)
                .filter(|s| s.tau < cfg.mapping.horizon)
                .map(|s| {
                    let pade = a.approximant.evaluate(&HPReal::from_f64(s.tau, prec)).ok();
                    let diff = match (&pade, s.h) {
                        (Some(p), Some(h)) => (p - &HPReal::from_f64(h, prec)).abs().to_sci_string(17),
                        _ => String::new(),
                    };
                    vec![
                        num(s.tau),
                        fmt_opt(s.h),
                        pade.map(|p| p.to_decimal_string()).unwrap_or_default(),
                        diff,
                    ]
                })
                .collect();
            let wall = start.elapsed().as_secs_f64();
            out.manifest.record("oracle", t_oracle - t_assess);
            out.manifest.record("evaluation", wall - t_oracle);
            let header = ["tau", "h_oracle", "h_pade", "abs_diff"].map(String::from);
            out.write_csv("compare.csv", &header, &rows)?;
            out.write_json(
                "verdict.json",
                &VerdictRecord {
                    config: cfg.clone(),
                    verdict: a.verdict.clone(),
                },
            )?;
            let outcome = verdict_outcome(&a, &cfg);
            out.finish(wall)?;
            Ok(outcome)
        }
        Command::Coeffs => {
            let (a, wall) = run_assessment(&mut out)?;
            let mut header = vec!["k".to_string()];
            header.extend(a.model.state_names());
            header.extend(a.model.algebraic_names());
            header.push("h".into());
            let (n, m) = (a.model.state_dim(), a.model.algebraic_dim());
            let rows: Vec<Vec<String>> = (0..=a.table.order())
                .map(|k| {
                    let mut r = vec![k.to_string()];
                    r.extend((0..n).map(|i| a.table.xs(i)[k].to_decimal_string()));
                    r.extend((0..m).map(|j| a.table.vs(j)[k].to_decimal_string()));
                    r.push(a.indicator.h.coeff(k).to_decimal_string());
                    r
                })
                .collect();
            out.write_csv("coeffs.csv", &header, &rows)?;
            let mut outcome = verdict_outcome(&a, &cfg);
            outcome.code = EXIT_STABLE;
            outcome.summary = format!("{}: {} coefficient orders", cfg.name, rows.len());
            out.finish(wall)?;
            Ok(outcome)
        }
        Command::PadeRoots => {
            let (a, wall) = run_assessment(&mut out)?;
            let header = ["re", "im", "residual", "residue", "nearest_zero", "status"].map(String::from);
            let rows: Vec<Vec<String>> = a
                .roots
                .iter()
                .map(|r| {
                    vec![
                        r.re.clone(),
                        r.im.clone(),
                        num(r.residual),
                        fmt_opt(r.residue),
                        fmt_opt(r.nearest_zero),
                        serde_json::to_value(r.status)
                            .ok()
                            .and_then(|v| v.as_str().map(String::from))
                            .unwrap_or_default(),
                    ]
                })
                .collect();
            out.write_csv("roots.csv", &header, &rows)?;
            let outcome = verdict_outcome(&a, &cfg);
            out.finish(wall)?;
            Ok(outcome)
        }
        Command::CctBisect { lo, hi, step } => {
            let start = Instant::now();
            let method = bisect_grid(*lo, *hi, *step, |fct| Ok(assess(&cfg.with_clearing_time(fct)?)?.status.is_stable()))
                .map_err(|e| Failure::at("method bisection", e))?;
            let t_method = start.elapsed().as_secs_f64();
            let oracle = bisect_grid(*lo, *hi, *step, |fct| {
                let (_, v, _) = oracle_run(&cfg.with_clearing_time(fct)?)?;
                match v {
                    polewarp::benchmark::OracleVerdict::Inconclusive => {
                        Err(Error::Precondition(format!("oracle is inconclusive at clearing time {fct} s")))
                    }
                    v => Ok(v.is_stable()),
                }
            })
            .map_err(|e| Failure::at("oracle bisection", e))?;
            let wall = start.elapsed().as_secs_f64();
            out.manifest.record("method bisection", t_method);
            out.manifest.record("oracle bisection", wall - t_method);
            let report = CctReport { method, oracle, step: *step };
            let record = CctRecord {
                config: cfg.clone(),
                report,
            };
            out.write_json("cct.json", &record)?;
            out.finish(wall)?;
            let agree = method == oracle;
            Ok(Outcome {
                summary: format!(
                    "{}: method [{}, {}] s, oracle [{}, {}] s, {}",
                    cfg.name,
                    method.stable,
                    method.unstable,
                    oracle.stable,
                    oracle.unstable,
                    if agree { "brackets agree" } else { "brackets differ" }
                ),
                json: Json::of(&record),
                code: EXIT_STABLE,
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.configs.is_empty() {
        eprintln!("polewarp: configuration error in `--config`: at least one scenario is required");
        return ExitCode::from(EXIT_CONFIG);
    }
    let run = |arg: &String| resolve_config(arg, &cli).and_then(|cfg| run_one(cfg, &cli.command, &cli.out_dir));
    let results: Vec<Result<Outcome, Failure>> = match cli.jobs {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            Ok(pool) => pool.install(|| cli.configs.par_iter().map(run).collect()),
            Err(e) => {
                eprintln!("polewarp: cannot start {n} worker threads: {e}");
                return ExitCode::from(EXIT_CONFIG);
            }
        },
        None => cli.configs.iter().map(run).collect(),
    };

    let batch = results.len() > 1;
    let mut stdout = std::io::stdout().lock();
    let mut failure = None;
    let mut code = EXIT_STABLE;
    for (arg, r) in cli.configs.iter().zip(&results) {
        // a closed stdout must not turn a finished run into a panic
        let _ = match r {
            Ok(o) if cli.json && batch => writeln!(stdout, "{}", o.json.compact),
            Ok(o) if cli.json => writeln!(stdout, "{}", o.json.pretty),
            Ok(o) => writeln!(stdout, "{}", o.summary),
            Err(f) => writeln!(std::io::stderr(), "polewarp: {arg}: {}", f.message),
        };
        match r {
            Ok(o) => code = code.max(o.code),
            Err(f) => {
                failure.get_or_insert(f.code);
            }
        }
    }
    ExitCode::from(failure.unwrap_or(code))
}
