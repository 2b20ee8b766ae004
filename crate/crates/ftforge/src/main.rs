use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ftforge::config::{resolve_code_name, RunConfig};
use ftforge::{config, eval, ppo, CliError};
use ftforge_core::codes::{builtin_code, make_target, LogicalTarget, BUILTIN_CODE_NAMES};
use ftforge_core::faults::verify_fault_tolerance;
use ftforge_core::{Circuit, StabilizerCode, StabilizerTableau, StateLabel};

/// Discover and verify fault-tolerant logical-state-preparation circuits.
#[derive(Parser)]
#[command(name = "ftforge", version, disable_help_subcommand = true)]
struct Cli {
    /// Seed override (highest precedence, above FTFORGE_SEED and configs).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for training (agents are independent; results do not
    /// depend on this).
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Output directory (defaults to the config's out_dir, then ".").
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// List the compiled-in stabilizer codes.
    Codes,
    /// Canonicalize a stabilizer tableau text file and print the result.
    Canon { tableau: PathBuf },
    /// Verify a preparation circuit for fault tolerance.
    Verify {
        circuit: PathBuf,
        /// Builtin code name (or ghz<N>).
        #[arg(long, conflicts_with = "code_path")]
        code: Option<String>,
        /// Custom code definition file.
        #[arg(long)]
        code_path: Option<PathBuf>,
        /// Logical state label (zero, one, plus, minus, plus_i, minus_i).
        #[arg(long, default_value = "zero")]
        state: String,
    },
    /// Train agents per a JSON run config; writes circuits, agents, and the
    /// training log.
    Train {
        #[arg(long)]
        config: PathBuf,
    },
    /// Monte-Carlo evaluation of a circuit under depolarizing noise.
    Evaluate {
        circuit: PathBuf,
        #[arg(long, conflicts_with = "code_path")]
        code: Option<String>,
        #[arg(long)]
        code_path: Option<PathBuf>,
        #[arg(long, default_value = "zero")]
        state: String,
        /// Comma-separated noise levels (default: 8 log-spaced in [3e-4, 1e-2]).
        #[arg(long)]
        p_list: Option<String>,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
    },
    /// Restrict a saved agent to a (sub)connectivity and optionally fine-tune.
    Transfer {
        agent: PathBuf,
        /// Run config describing the new task/connectivity.
        #[arg(long)]
        config: PathBuf,
        /// Fine-tune the restricted agent on the new task.
        #[arg(long)]
        fine_tune: bool,
    },
    /// Train over a grid of reward weights; writes one summary CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated mu_f grid (defaults to the config value).
        #[arg(long)]
        mu_f: Option<String>,
        /// Comma-separated mu_p grid (defaults to the config value).
        #[arg(long)]
        mu_p: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn load_target(
    code: &Option<String>,
    code_path: &Option<PathBuf>,
    state: &str,
) -> Result<LogicalTarget, CliError> {
    let code: StabilizerCode = match (code, code_path) {
        (Some(name), None) => resolve_code_name(name)?,
        (None, Some(path)) => {
            let text = fs::read_to_string(path)?;
            let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("custom");
            StabilizerCode::parse(name, &text)?
        }
        _ => return Err(CliError::Config(String::from("exactly one of --code / --code-path"))),
    };
    let label = StateLabel::parse(state)?;
    Ok(make_target(&code, label, None)?)
}

fn out_dir(cli_out: &Option<PathBuf>, cfg_out: Option<&PathBuf>) -> PathBuf {
    cli_out.clone().or_else(|| cfg_out.cloned()).unwrap_or_else(|| PathBuf::from("."))
}

fn effective_seed(cli: &Cli, cfg: Option<&RunConfig>) -> u64 {
    cli.seed
        .or_else(config::seed_override)
        .or(cfg.map(|c| c.seed))
        .unwrap_or(0)
}

fn parse_p_list(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Config(format!("bad noise level {v}")))
        })
        .collect()
}

fn parse_f64_list(s: &str) -> Result<Vec<f64>, CliError> {
    parse_p_list(s)
}

fn write_artifact(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}

fn run(cli: &Cli) -> Result<ExitCode, CliError> {
    match &cli.cmd {
        Cmd::Codes => {
            for name in BUILTIN_CODE_NAMES {
                let c = builtin_code(name)?;
                println!("{name}  [[{},{},{}]]", c.n, c.k, c.d);
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Canon { tableau } => {
            let text = fs::read_to_string(tableau)?;
            let t = StabilizerTableau::parse(&text)?;
            print!("{}", t.canonicalize()?);
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Verify { circuit, code, code_path, state } => {
            let target = load_target(code, code_path, state)?;
            let c = Circuit::parse(&fs::read_to_string(circuit)?)?;
            let report = verify_fault_tolerance(&c, &target)?;
            print!("{}", report.render());
            Ok(if report.is_ft() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Cmd::Train { config: cfg_path } => {
            let mut cfg = RunConfig::load(cfg_path)?;
            cfg.seed = effective_seed(cli, Some(&cfg));
            let dir = out_dir(&cli.out, cfg.out_dir.as_ref());
            let (n_flag, result) = ppo::train_escalating(&cfg, cli.threads)?;
            write_artifact(&dir, "training_log.csv", &ppo::render_log(&result.log))?;
            let spec = cfg.task_spec(n_flag)?;
            for (i, best) in result.best.iter().enumerate() {
                if let Some((circuit, size)) = best {
                    // Belt and braces: re-verify before anything is written.
                    if !ppo::oracle_check(&spec, circuit) {
                        return Err(CliError::Train(format!(
                            "agent {i} emitted a circuit that fails independent verification"
                        )));
                    }
                    let path =
                        write_artifact(&dir, &format!("best_agent{i}.circ"), &circuit.serialize())?;
                    println!("agent {i}: best circuit {size} gates -> {}", path.display());
                }
                ppo::save_agent(
                    &dir.join(format!("agent{i}.ftag")),
                    &result.agents[i],
                    &cfg.ppo,
                    &spec.action_table,
                )?;
            }
            println!(
                "flags={n_flag} converged={} steps_per_agent={}",
                result.converged, result.steps_per_agent
            );
            Ok(if result.converged { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Cmd::Evaluate { circuit, code, code_path, state, p_list, trials } => {
            let target = load_target(code, code_path, state)?;
            let c = Circuit::parse(&fs::read_to_string(circuit)?)?;
            let p = match p_list {
                Some(s) => parse_p_list(s)?,
                None => eval::default_p_grid(),
            };
            let seed = cli.seed.or_else(config::seed_override).unwrap_or(0);
            let report = eval::evaluate(&c, &target, &p, *trials, seed)?;
            let csv = report.render_csv();
            let dir = out_dir(&cli.out, None);
            let path = write_artifact(&dir, "eval_report.csv", &csv)?;
            for row in &report.rows {
                println!(
                    "p={:<10} acceptance={:.4} ler={}",
                    row.p,
                    row.acceptance_rate,
                    row.logical_error_rate.map(|l| l.to_string()).unwrap_or_else(|| "-".into())
                );
            }
            if let Some((slope, _, r2)) = report.fit {
                println!("ler slope={slope:.3} r2={r2:.4}");
            }
            if let Some(decay) = report.acceptance_decay {
                println!("acceptance ~ exp(-{decay:.1} p)");
            }
            println!("report -> {}", path.display());
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Transfer { agent, config: cfg_path, fine_tune } => {
            let mut cfg = RunConfig::load(cfg_path)?;
            cfg.seed = effective_seed(cli, Some(&cfg));
            let (old_agent, _, old_table) = ppo::load_agent(agent)?;
            let spec = cfg.task_spec(cfg.n_flag)?;
            let restricted = ppo::transfer_restrict(&old_agent, &old_table, &spec.action_table)?;
            let dir = out_dir(&cli.out, cfg.out_dir.as_ref());
            fs::create_dir_all(&dir)?;
            let path = dir.join("transferred.ftag");
            ppo::save_agent(&path, &restricted, &cfg.ppo, &spec.action_table)?;
            println!("restricted agent -> {}", path.display());
            if *fine_tune {
                let result =
                    ppo::train_from(&spec, &cfg.ppo, cfg.seed, cli.threads, Some(&restricted))?;
                write_artifact(&dir, "training_log.csv", &ppo::render_log(&result.log))?;
                if let Some((circuit, size)) = result.overall_best() {
                    let path = write_artifact(&dir, "best_transferred.circ", &circuit.serialize())?;
                    println!("fine-tune best circuit {size} gates -> {}", path.display());
                }
                return Ok(if result.converged { ExitCode::SUCCESS } else { ExitCode::from(1) });
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Sweep { config: cfg_path, mu_f, mu_p } => {
            let mut cfg = RunConfig::load(cfg_path)?;
            cfg.seed = effective_seed(cli, Some(&cfg));
            let dir = out_dir(&cli.out, cfg.out_dir.as_ref());
            let f_grid = match mu_f {
                Some(s) => parse_f64_list(s)?.into_iter().map(Some).collect(),
                None => vec![cfg.mu_f],
            };
            let p_grid = match mu_p {
                Some(s) => parse_f64_list(s)?.into_iter().map(Some).collect(),
                None => vec![cfg.mu_p],
            };
            let mut csv = String::from("mu_f,mu_d,mu_p,converged,best_size,steps_per_agent\n");
            for &f in &f_grid {
                for &p in &p_grid {
                    let mut point = cfg.clone();
                    point.mu_f = f;
                    point.mu_p = p;
                    let (n_flag, result) = ppo::train_escalating(&point, cli.threads)?;
                    let spec = point.task_spec(n_flag)?;
                    let best = result.overall_best();
                    csv.push_str(&format!(
                        "{},{},{},{},{},{}\n",
                        spec.weights.mu_f,
                        spec.weights.mu_d,
                        spec.weights.mu_p,
                        result.converged,
                        best.map(|(_, s)| s.to_string()).unwrap_or_default(),
                        result.steps_per_agent
                    ));
                }
            }
            let path = write_artifact(&dir, "sweep.csv", &csv)?;
            println!("sweep -> {}", path.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}
