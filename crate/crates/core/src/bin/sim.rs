//! `sim`: sweeps, analytic validation, plots and single-pair diagnostics.
//!
//! Exit codes: 0 success, 1 usage or runtime error, 2 validation failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nomasec::channel::{draw_channels, LinkGeometry};
use nomasec::experiments::sweep::{linspace_step, write_sweep_file};
use nomasec::experiments::{parse_schemes, plot, run_sweep, validate_analytics, FigureKind, Scheme, Solver, SweepSpec, SweepVar, ValidationGrid};
use nomasec::optimizer::ga::{ga_pats_traced, write_trace_csv};
use nomasec::optimizer::{exhaustive_search, GaConfig};
use nomasec::par::Execution;
use nomasec::rng;
use nomasec::scenario::{assign_groups, generate_scenario, pair_gpm, pair_rpm, write_scenario_csv};
use nomasec::SystemParams;

#[derive(Parser)]
#[command(name = "sim", version, about = "Secure NOMA offloading simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML config file; defaults to $NOMASEC_CONFIG, then built-in values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one parameter, e.g. `--set n_vehicles=20`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Run on one thread.
    #[arg(long)]
    serial: bool,
}

impl ConfigArgs {
    fn params(&self) -> nomasec::Result<SystemParams> {
        SystemParams::from_sources(self.config.as_deref(), &self.overrides)
    }

    fn exec(&self) -> Execution {
        if self.serial {
            Execution::Serial
        } else {
            Execution::Parallel
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Replicated sweep over one parameter, written as CSV.
    Sweep {
        /// p_beta, d_alpha_beta, rs or zeta.
        #[arg(long)]
        var: String,
        #[arg(long, default_value_t = 0.0)]
        from: f64,
        #[arg(long, default_value_t = 30.0)]
        to: f64,
        #[arg(long, default_value_t = 2.0)]
        step: f64,
        /// Explicit comma-separated values; overrides the range.
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
        /// Comma-separated `<gpm|rpm>-<noma|oma>[-an|-nan][-eg|-ga]`.
        #[arg(long, default_value = "gpm-noma")]
        schemes: String,
        #[arg(long, default_value_t = 100)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        rep_start: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 0.005)]
        lambda_step: f64,
        #[arg(long, default_value_t = 50)]
        population: usize,
        #[arg(long, default_value_t = 200)]
        iterations: usize,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Analytic outage probabilities against Monte Carlo.
    Validate {
        /// `default` or `quick`.
        #[arg(long, default_value = "default")]
        grid: String,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Also write the report here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// SVG figure from a sweep CSV.
    Plot {
        #[arg(long)]
        kind: String,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generates one scenario and prints its grouping and pairing as CSV.
    PairDemo {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        rpm: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Optimises a single pair for one channel realisation.
    OptimizeOne {
        #[arg(long, default_value_t = 150.0)]
        l_alpha: f64,
        #[arg(long, default_value_t = 400.0)]
        l_beta: f64,
        #[arg(long, default_value_t = 170.0)]
        l_eve: f64,
        #[arg(long, default_value = "gpm-noma-an-ga")]
        scheme: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 0.005)]
        lambda_step: f64,
        /// Snap the GA's `λ` to the grid.
        #[arg(long)]
        snap: bool,
        /// Write the GA generation trace as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
}

enum Outcome {
    Ok,
    ValidationFailed,
}

fn run(cli: Cli) -> nomasec::Result<Outcome> {
    match cli.cmd {
        Cmd::Sweep {
            var,
            from,
            to,
            step,
            values,
            schemes,
            reps,
            rep_start,
            seed,
            lambda_step,
            population,
            iterations,
            out,
            cfg,
        } => {
            let params = cfg.params()?;
            let variable = SweepVar::parse(&var)?;
            let values = if values.is_empty() { linspace_step(from, to, step)? } else { values };
            let mut spec = SweepSpec::new(variable, values, parse_schemes(&schemes)?, reps, seed);
            spec.rep_start = rep_start;
            spec.lambda_step = lambda_step;
            spec.exec = cfg.exec();
            spec.ga = GaConfig { population, iterations, exec: Execution::Serial, ..GaConfig::default() };
            let rows = run_sweep(&spec, &params)?;
            write_sweep_file(&out, &spec, &params, &rows)?;
            eprintln!("wrote {} rows to {}", rows.len(), out.display());
        }
        Cmd::Validate { grid, trials, seed, out, cfg } => {
            let params = cfg.params()?;
            let mut g = match grid.as_str() {
                "default" => ValidationGrid::default(),
                "quick" => ValidationGrid::quick(),
                other => return Err(nomasec::Error::InvalidArgument(format!("unknown grid `{other}`"))),
            };
            if let Some(t) = trials {
                g.trials = t;
            }
            if let Some(s) = seed {
                g.seed = s;
            }
            let report = validate_analytics(&params, &g)?;
            let text = report.render();
            print!("{text}");
            if let Some(path) = out {
                std::fs::write(path, &text)?;
            }
            if !report.passed() {
                return Ok(Outcome::ValidationFailed);
            }
        }
        Cmd::Plot { kind, input, out } => {
            let kind: FigureKind = kind.parse()?;
            plot(&input, kind, &out)?;
        }
        Cmd::PairDemo { seed, rpm, out, cfg } => {
            let params = cfg.params()?;
            let scenario = generate_scenario(&params, seed);
            let groups = assign_groups(&scenario.vehicles, &params);
            let pairing = if rpm {
                pair_rpm(&groups, &scenario.vehicles, rng::split(seed, 1))
            } else {
                pair_gpm(&groups, &scenario.vehicles)
            };
            match out {
                Some(p) => write_scenario_csv(std::fs::File::create(p)?, &scenario, &groups, &pairing)?,
                None => write_scenario_csv(std::io::stdout().lock(), &scenario, &groups, &pairing)?,
            }
            eprintln!("{} pairs, {} unpaired", pairing.pairs.len(), pairing.unpaired.len());
        }
        Cmd::OptimizeOne { l_alpha, l_beta, l_eve, scheme, seed, lambda_step, snap, trace, cfg } => {
            let params = cfg.params()?;
            let scheme: Scheme = scheme.parse()?;
            let geo = LinkGeometry::from_positions(l_alpha, l_beta, l_eve, &params);
            let draw = draw_channels(&params, seed);
            let ctx = scheme.context(&params, geo, &draw);
            let res = match scheme.solver {
                Solver::Eg => exhaustive_search(&ctx, lambda_step, &Default::default())?,
                Solver::Ga => {
                    let ga = GaConfig {
                        seed,
                        lambda_step: snap.then_some(lambda_step),
                        exec: cfg.exec(),
                        ..GaConfig::default()
                    };
                    let (res, tr) = ga_pats_traced(&ctx, &ga)?;
                    if let Some(p) = trace {
                        write_trace_csv(&p, &tr)?;
                    }
                    res
                }
            };
            println!("scheme       {scheme}");
            println!("lambda       {:.6}", res.best.lambda);
            println!("m_alpha      {}", res.best.m_alpha);
            println!("m_beta       {}", res.best.m_beta);
            println!("d_beta_s     {:.6}", res.d_beta());
            println!("d_alpha_s    {:.6}", res.d_alpha());
            println!("sop_alpha    {:.6}", res.eval.sop_alpha);
            println!("sop_beta     {:.6}", res.eval.sop_beta);
            println!("feasible     {}", res.feasible);
            println!("evaluations  {}", res.evaluations);
        }
    }
    Ok(Outcome::Ok)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::ValidationFailed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
