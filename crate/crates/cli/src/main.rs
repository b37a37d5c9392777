use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use symplanner::agents::{build_agents, DiscSpec, PolicySpec, RemoteConfig};
use symplanner::blocksworld::render_action;
use symplanner::harness::{
    self, ablation_matrix, generate, read_jsonl, render_comparison, report, run_suite, Bootstrap,
    GenerationConfig, InstanceSpec, RunRecord, SuiteConfig,
};
use symplanner::oracle;
use symplanner::search::{self, SearchConfig};
use symplanner::simulator::{self, Verdict};
use symplanner::{Problem, ProblemFile};

#[derive(Parser)]
#[command(name = "symplanner", version, about = "Simulator-grounded blocksworld planning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a plan against a problem; exit 0 only for ValidAndGoal.
    Validate {
        #[arg(long)]
        problem: PathBuf,
        /// One action per line (signature or text), or a JSON array.
        #[arg(long)]
        plan: PathBuf,
    },
    /// Run one search.
    Plan {
        #[arg(long)]
        problem: PathBuf,
        #[command(flatten)]
        agents: AgentArgs,
        #[command(flatten)]
        search: SearchArgs,
        /// Write the event trace as JSON lines.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Optimal plan by breadth-first search.
    Oracle {
        #[arg(long)]
        problem: PathBuf,
    },
    /// Generate instances bucketed by optimal plan length.
    Gen {
        /// Block counts, e.g. 4 or 4,5,6.
        #[arg(long, value_delimiter = ',', default_value = "4")]
        blocks: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "2,4,6,8,10,12")]
        buckets: Vec<usize>,
        #[arg(long, default_value_t = 20)]
        per_bucket: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200_000)]
        sample_cap: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a suite (or the ablation matrix) over an instance file.
    Bench {
        #[arg(long)]
        instances: PathBuf,
        #[command(flatten)]
        agents: AgentArgs,
        #[command(flatten)]
        search: SearchArgs,
        /// Run JSONL; with --ablations, a directory for one file per row.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run full, w/o symbolic, w/o IC and w/o CR.
        #[arg(long)]
        ablations: bool,
        /// Discriminator for the rating-based (w/o CR) row.
        #[arg(long, default_value = "random")]
        cr_disc: String,
        #[arg(long, default_value_t = 0)]
        threads: usize,
        #[arg(long)]
        trace_dir: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Summarize run records.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Add 95% bootstrap intervals.
        #[arg(long)]
        ci: bool,
        #[arg(long, default_value_t = 0)]
        ci_seed: u64,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct AgentArgs {
    /// random | greedy | oracle | oracle-noisy:EPS | replay:FILE | remote
    #[arg(long, default_value = "oracle")]
    policy: String,
    /// oracle | goalcount | random | remote
    #[arg(long, default_value = "oracle")]
    disc: String,
    /// Remote endpoint base URL (defaults from SYMPLANNER_BASE_URL).
    #[arg(long)]
    base_url: Option<String>,
    #[arg(long)]
    model: Option<String>,
}

impl AgentArgs {
    fn specs(&self) -> Result<(PolicySpec, DiscSpec)> {
        Ok((self.policy.parse()?, self.disc.parse()?))
    }

    fn remote(&self) -> RemoteConfig {
        let mut cfg = RemoteConfig::from_env();
        if let Some(u) = &self.base_url {
            cfg.base_url = u.clone();
        }
        if let Some(m) = &self.model {
            cfg.model = m.clone();
        }
        cfg
    }
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long, default_value_t = 16)]
    steps: usize,
    #[arg(long, default_value_t = 3)]
    beam: usize,
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    ic_retries: usize,
    #[arg(long, default_value_t = 1)]
    cr_k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    no_ic: bool,
    #[arg(long)]
    no_cr: bool,
    #[arg(long)]
    no_symbolic: bool,
    #[arg(long)]
    budget: Option<usize>,
}

impl SearchArgs {
    fn config(&self) -> SearchConfig {
        SearchConfig {
            step_limit: self.steps,
            proposals: self.n,
            beam_width: self.beam,
            ic_retries: self.ic_retries,
            cr_opponents: self.cr_k,
            seed: self.seed,
            ic_enabled: !self.no_ic,
            cr_enabled: !self.no_cr,
            symbolic_state: !self.no_symbolic,
            policy_budget: self.budget,
        }
    }
}

/// Accepts a bare problem file or an instance record embedding one.
fn load_problem(path: &Path) -> Result<Problem> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if let Some(inner) = value.get_mut("problem") {
        value = inner.take();
    }
    let file: ProblemFile =
        serde_json::from_value(value).with_context(|| format!("reading problem {}", path.display()))?;
    Ok(file.into_problem()?)
}

fn load_plan_lines(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if text.trim_start().starts_with('[') {
        return serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()));
    }
    Ok(text.lines().map(String::from).collect())
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}

fn print_json(v: &serde_json::Value) {
    emit(&format!("{}\n", serde_json::to_string_pretty(v).expect("json value")));
}

fn cmd_validate(problem: &Path, plan: &Path) -> Result<ExitCode> {
    let p = load_problem(problem)?;
    let lines = load_plan_lines(plan)?;
    let verdict = match simulator::plan_from_lines(&p, lines.iter().map(String::as_str)) {
        Ok(plan) => simulator::validate(&p, &plan),
        Err((index, error)) => Verdict::Invalid { index, error },
    };
    print_json(&serde_json::to_value(&verdict)?);
    Ok(if verdict.is_success() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_plan(problem: &Path, agents: &AgentArgs, search: &SearchArgs, trace: Option<&Path>) -> Result<ExitCode> {
    let p = load_problem(problem)?;
    let (policy_spec, disc_spec) = agents.specs()?;
    let remote = agents.remote();
    let (mut policy, mut disc) = build_agents(&p, &policy_spec, disc_spec, Some(&remote))?;
    let cfg = search.config();
    let out = search::run(&p, policy.as_mut(), disc.as_mut(), &cfg)?;
    if let Some(path) = trace {
        let f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        out.trace.write_jsonl(BufWriter::new(f))?;
    }
    let verdict = out.best.as_ref().map(|plan| simulator::validate(&p, plan));
    let success = verdict.as_ref().is_some_and(Verdict::is_success);
    print_json(&json!({
        "success": success,
        "plan": out.best.as_ref().map(|b| b.signatures()),
        "text": out.best.as_ref().map(|b| b.actions().iter().map(render_action).collect::<Vec<_>>()),
        "verdict": verdict,
        "done_count": out.done_count(),
        "steps_used": out.steps_used,
        "policy_calls": out.policy_calls,
        "discriminator_calls": out.discriminator_calls,
        "repairs": out.repairs,
        "pruned": out.pruned,
        "stop": out.stop,
    }));
    Ok(if success { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_oracle(problem: &Path) -> Result<ExitCode> {
    let p = load_problem(problem)?;
    match oracle::solve_optimal(&p)? {
        Some(plan) => {
            print_json(&json!({
                "length": plan.len(),
                "plan": plan.signatures(),
                "text": plan.actions().iter().map(render_action).collect::<Vec<_>>(),
            }));
            Ok(ExitCode::SUCCESS)
        }
        None => {
            print_json(&json!({ "length": null, "plan": null }));
            Ok(ExitCode::from(1))
        }
    }
}

fn emit_tables(tables: &[harness::ReportTable], format: Format) -> Result<()> {
    match format {
        Format::Text => emit(&render_comparison(tables)),
        Format::Json if tables.len() == 1 => print_json(&serde_json::to_value(&tables[0])?),
        Format::Json => print_json(&serde_json::to_value(tables)?),
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_bench(
    instances: &Path,
    agents: &AgentArgs,
    search: &SearchArgs,
    out: Option<&Path>,
    ablations: bool,
    cr_disc: &str,
    threads: usize,
    trace_dir: Option<PathBuf>,
    format: Format,
) -> Result<ExitCode> {
    let inst: Vec<InstanceSpec> = read_jsonl(instances)?;
    if inst.is_empty() {
        bail!("{} holds no instances", instances.display());
    }
    let (policy, disc) = agents.specs()?;
    let mut suite = SuiteConfig::new(policy, disc, search.config());
    suite.remote = Some(agents.remote());
    suite.threads = threads;
    suite.trace_dir = trace_dir;
    if ablations {
        let rows = ablation_matrix(&inst, &suite, cr_disc.parse()?, out, None)?;
        let tables: Vec<_> = rows.into_iter().map(|r| r.table).collect();
        emit_tables(&tables, format)?;
    } else {
        let records = run_suite(&inst, &suite, out)?;
        emit_tables(&[report(&records, None)?], format)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_report(input: &Path, format: Format, ci: bool, ci_seed: u64) -> Result<ExitCode> {
    let records: Vec<RunRecord> = read_jsonl(input)?;
    let boot = ci.then_some(Bootstrap {
        resamples: 2000,
        seed: ci_seed,
    });
    emit_tables(&[report(&records, boot)?], format)?;
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Validate { problem, plan } => cmd_validate(&problem, &plan),
        Command::Plan {
            problem,
            agents,
            search,
            trace,
        } => cmd_plan(&problem, &agents, &search, trace.as_deref()),
        Command::Oracle { problem } => cmd_oracle(&problem),
        Command::Gen {
            blocks,
            buckets,
            per_bucket,
            seed,
            sample_cap,
            out,
        } => {
            let cfg = GenerationConfig {
                blocks,
                buckets,
                per_bucket,
                seed,
                sample_cap,
                ..Default::default()
            };
            let inst = generate(&cfg)?;
            harness::write_jsonl(&out, &inst)?;
            eprintln!("wrote {} instances to {}", inst.len(), out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Bench {
            instances,
            agents,
            search,
            out,
            ablations,
            cr_disc,
            threads,
            trace_dir,
            format,
        } => cmd_bench(
            &instances,
            &agents,
            &search,
            out.as_deref(),
            ablations,
            &cr_disc,
            threads,
            trace_dir,
            format,
        ),
        Command::Report {
            input,
            format,
            ci,
            ci_seed,
        } => cmd_report(&input, format, ci, ci_seed),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
