//! Command-line entry points.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use transdoc_agents::{Clock, FixedClock, Gateway, GatewayConfig, SessionState, SynthesisOutcome, SystemClock};
use transdoc_core::counterfactual::{run_suite, Suite, SuiteReport, Verdict};
use transdoc_core::doc::{FragmentId, TextSpan};
use transdoc_core::expr::pretty;

use crate::app::{self, Decision, InterpretOptions, Selection, ServiceError};
use crate::project::Project;
use crate::server::{self, AppState};
use crate::wire::{page, session_view, wire_document};

/// Set to use a fixed timestamp for every revision.
pub const TIMESTAMP_ENV: &str = "TRANSDOC_TIMESTAMP";

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_MISMATCH: u8 = 2;
pub const EXIT_NO_EXPRESSION: u8 = 3;
pub const EXIT_TRANSPORT: u8 = 4;
/// `ctest` only: the suite failed validation.
pub const EXIT_INVALID_SUITE: u8 = 2;

/// Exit status for a synthesis outcome.
pub fn outcome_exit_code(outcome: &SynthesisOutcome) -> u8 {
    match outcome {
        SynthesisOutcome::Success { .. } => EXIT_OK,
        SynthesisOutcome::Mismatch { .. } => EXIT_MISMATCH,
        SynthesisOutcome::FailNoExpression { .. } => EXIT_NO_EXPRESSION,
    }
}

fn error_exit_code(e: &ServiceError) -> u8 {
    match e {
        ServiceError::Gateway(_) => EXIT_TRANSPORT,
        _ => EXIT_ERROR,
    }
}

#[derive(Debug, Parser)]
#[command(name = "transdoc", version, about = "Author paragraphs whose numbers and phrases are computed from data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ask the model which fragments of the paragraph come from the data.
    Suggest { project: PathBuf },
    /// Synthesize an expression for one fragment.
    Interpret(InterpretArgs),
    /// Accept the proposed document.
    Approve { project: PathBuf },
    /// Discard the proposal, or abort after a mismatch.
    Reject { project: PathBuf },
    /// After a mismatch, rewrite the paragraph to what the expression says.
    ReviseGoal { project: PathBuf },
    /// Abandon an interrupted synthesis.
    Cancel { project: PathBuf },
    /// Print the session state and revision history.
    Status { project: PathBuf },
    /// Render the current document.
    Render {
        project: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Wire)]
        format: Format,
    },
    /// Run a counterfactual suite.
    Ctest {
        suite: PathBuf,
        /// Supplies the tables when the suite has none, and the expressions
        /// of cases that name a hole.
        project: Option<PathBuf>,
        /// Where to write the report; defaults beside the suite.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve the project over HTTP.
    Serve {
        project: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: String,
        /// Append each mutation request to this file.
        #[arg(long)]
        log: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct InterpretArgs {
    pub project: PathBuf,
    /// A fragment id from the suggestion registry.
    #[arg(long, conflicts_with = "span", required_unless_present = "span")]
    pub fragment: Option<u64>,
    /// A character range START:END of the current paragraph.
    #[arg(long, value_parser = parse_span)]
    pub span: Option<TextSpan>,
    /// Do not tell the model the text it should reproduce.
    #[arg(long)]
    pub no_target: bool,
    /// Do not send the paragraph value.
    #[arg(long)]
    pub no_paragraph_value: bool,
    #[arg(long)]
    pub max_retries: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Wire,
    Page,
}

fn parse_span(s: &str) -> Result<TextSpan, String> {
    let (a, b) = s.split_once(':').ok_or("expected START:END")?;
    let n = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("{x:?}: {e}"));
    Ok(TextSpan::new(n(a)?, n(b)?))
}

pub fn clock_from_env() -> Arc<dyn Clock> {
    match std::env::var(TIMESTAMP_ENV) {
        Ok(t) if !t.is_empty() => Arc::new(FixedClock(t)),
        _ => Arc::new(SystemClock),
    }
}

fn gateway() -> anyhow::Result<Gateway> {
    Ok(GatewayConfig::from_env()?.build()?)
}

fn load(path: &Path, clock: &dyn Clock) -> anyhow::Result<Project> {
    Ok(Project::load(path, clock)?)
}

pub fn main() -> ExitCode {
    ExitCode::from(run(Cli::parse()))
}

/// Runs a command and returns its exit status, reporting errors on stderr.
pub fn run(cli: Cli) -> u8 {
    let clock = clock_from_env();
    let result = match cli.command {
        Command::Interpret(args) => return interpret(args, clock.as_ref()),
        Command::Ctest { suite, project, out } => return ctest(&suite, project.as_deref(), out, clock.as_ref()),
        Command::Suggest { project } => suggest(&project, clock.as_ref()),
        Command::Approve { project } => decide(&project, clock.as_ref(), Decision::Approve),
        Command::Reject { project } => decide(&project, clock.as_ref(), Decision::Reject),
        Command::ReviseGoal { project } => decide(&project, clock.as_ref(), Decision::ReviseGoal),
        Command::Cancel { project } => decide(&project, clock.as_ref(), Decision::Cancel),
        Command::Status { project } => status(&project, clock.as_ref()),
        Command::Render { project, format } => render(&project, format, clock.as_ref()),
        Command::Serve { project, bind, log } => serve(&project, &bind, log.as_deref(), clock),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_ERROR
        }
    }
}

fn suggest(path: &Path, clock: &dyn Clock) -> anyhow::Result<()> {
    let mut project = load(path, clock)?;
    let out = app::run_suggest(&mut project, &gateway()?)?;
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }
    println!("{}", out.annotated_paragraph);
    for f in &out.fragments {
        println!("  {}: {:?} at {}", f.id, f.text, f.span);
    }
    Ok(())
}

fn interpret(args: InterpretArgs, clock: &dyn Clock) -> u8 {
    let attempt = || -> Result<(Project, SynthesisOutcome), (ServiceError, u8)> {
        let mut project = Project::load(&args.project, clock).map_err(|e| (e.into(), EXIT_ERROR))?;
        // A misconfigured gateway is not a transport failure.
        let gw = GatewayConfig::from_env().and_then(|c| c.build()).map_err(|e| (e.into(), EXIT_ERROR))?;
        let selection = match (args.fragment, args.span) {
            (Some(id), _) => Selection::Fragment(id),
            (None, Some(span)) => Selection::Span(span),
            (None, None) => unreachable!("clap requires one of --fragment and --span"),
        };
        let options = InterpretOptions {
            share_target: !args.no_target,
            share_paragraph_value: !args.no_paragraph_value,
            max_retries: args.max_retries,
        };
        let outcome =
            app::interpret(&mut project, &gw, clock, selection, options, |_| {}).map_err(|e| {
                let code = error_exit_code(&e);
                (e, code)
            })?;
        Ok((project, outcome))
    };
    let (project, outcome) = match attempt() {
        Ok(v) => v,
        Err((e, code)) => {
            eprintln!("error: {e}");
            return code;
        }
    };
    match (&outcome, &project.session.state) {
        (SynthesisOutcome::Success { expr, attempts }, _) => {
            eprintln!("success after {attempts} attempt(s); run `approve` or `reject`");
            println!("{}", pretty(expr));
        }
        (SynthesisOutcome::Mismatch { expr, s_prime, attempts }, SessionState::MismatchDecision { fragment, .. }) => {
            eprintln!("mismatch after {attempts} attempt(s); run `revise-goal` or `reject`");
            println!("target:   {:?}", fragment.text);
            println!("produced: {s_prime:?}");
            println!("{}", pretty(expr));
        }
        (SynthesisOutcome::Mismatch { expr, s_prime, .. }, _) => {
            println!("produced: {s_prime:?}");
            println!("{}", pretty(expr));
        }
        (SynthesisOutcome::FailNoExpression { last_error, attempts }, _) => {
            eprintln!("no expression after {attempts} attempt(s)");
            println!("{last_error}");
        }
    }
    outcome_exit_code(&outcome)
}

fn decide(path: &Path, clock: &dyn Clock, d: Decision) -> anyhow::Result<()> {
    let mut project = load(path, clock)?;
    app::decide(&mut project, clock, d)?;
    println!("{}", project.session.state.name());
    Ok(())
}

/// Writes command output, treating a closed pipe as a normal end.
fn emit(text: &str) -> anyhow::Result<()> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn status(path: &Path, clock: &dyn Clock) -> anyhow::Result<()> {
    let project = load(path, clock)?;
    emit(&(serde_json::to_string_pretty(&session_view(&project))? + "\n"))
}

fn render(path: &Path, format: Format, clock: &dyn Clock) -> anyhow::Result<()> {
    let project = load(path, clock)?;
    let wire = wire_document(&project)?;
    match format {
        Format::Wire => emit(&(serde_json::to_string_pretty(&wire)? + "\n")),
        Format::Page => emit(&page(&wire)),
    }
}

fn serve(path: &Path, bind: &str, log: Option<&Path>, clock: Arc<dyn Clock>) -> anyhow::Result<()> {
    let project = load(path, clock.as_ref())?;
    let mut state = AppState::new(project, Arc::new(gateway()?), clock);
    if let Some(log) = log {
        state = state.logging_to(log).with_context(|| format!("opening {}", log.display()))?;
    }
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(server::serve(Arc::new(state), bind))?;
    Ok(())
}

/// Fills in the suite's context and hole-backed candidates from a project.
pub fn prepare_suite(mut suite: Suite, project: Option<&Project>) -> anyhow::Result<Suite> {
    if let Some(p) = project {
        if suite.context.datasets.is_empty() {
            suite.context = (*p.sources).clone();
        }
    }
    for case in &mut suite.cases {
        let Some(hole) = case.hole else { continue };
        if case.candidate.is_some() {
            bail!("case `{}` gives both a candidate and a hole", case.id);
        }
        let p = project.ok_or_else(|| anyhow!("case `{}` names hole {hole} but no project was given", case.id))?;
        let expr = p.head().hole(FragmentId(hole)).ok_or_else(|| {
            anyhow!("case `{}` names hole {hole}, which the project does not have", case.id)
        })?;
        case.candidate = Some(pretty(expr));
    }
    Ok(suite)
}

/// Human-readable report: one line per case, then totals.
pub fn summarize(report: &SuiteReport) -> String {
    let mut out = format!("suite {}\n", report.name);
    for v in &report.verdicts {
        let verdict = match v.verdict {
            Verdict::Pass => "pass",
            Verdict::CounterfactualError => "COUNTERFACTUAL-ERROR",
            Verdict::BothError => "both-error",
        };
        out.push_str(&format!(
            "  {:<24} {:<20} task={} gold={} candidate={}\n",
            v.id, verdict, v.task, v.gold_output, v.candidate_output
        ));
    }
    let t = &report.totals;
    out.push_str(&format!(
        "executions={} cases={} passed={} counterfactualErrors={} bothErrors={} casesWithError={} \
         errorsPerCaseMean={:.2} succeededDespiteError={}\n",
        t.executions,
        t.cases,
        t.passed,
        t.counterfactual_errors,
        t.both_errors,
        t.cases_with_error,
        t.errors_per_case_mean,
        t.succeeded_despite_error
    ));
    out
}

fn ctest(suite_path: &Path, project: Option<&Path>, out: Option<PathBuf>, clock: &dyn Clock) -> u8 {
    let prepared = (|| -> anyhow::Result<Suite> {
        let text = std::fs::read_to_string(suite_path).with_context(|| suite_path.display().to_string())?;
        let suite: Suite = serde_json::from_str(&text).with_context(|| suite_path.display().to_string())?;
        let project = project.map(|p| load(p, clock)).transpose()?;
        prepare_suite(suite, project.as_ref())
    })();
    let report = match prepared.and_then(|s| Ok(run_suite(&s)?)) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("invalid suite: {e:#}");
            return EXIT_INVALID_SUITE;
        }
    };
    print!("{}", summarize(&report));
    let out = out.unwrap_or_else(|| suite_path.with_extension("report.json"));
    let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    if let Err(e) = std::fs::write(&out, json) {
        eprintln!("error: {}: {e}", out.display());
        return EXIT_ERROR;
    }
    eprintln!("report written to {}", out.display());
    if report.totals.counterfactual_errors > 0 {
        EXIT_ERROR
    } else {
        EXIT_OK
    }
}
