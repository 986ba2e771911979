mod listing;

use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use xca_core::canonical::to_canonical_pretty;
use xca_core::loader::{parse_document, KbDocument, LoadError, ValidationIssue};
use xca_core::{
    analyze_with, apply_overrides, default_kb, diff_reports, load_kb, load_profile, parse_override, render,
    render_diff, validate_kb, validate_profile, AnalysisOptions, AnalysisReport, DeviceProfile, KnowledgeBase,
    RenderFormat, DEFAULT_COVER_CAP,
};

const EXIT_INVALID: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "xca", version, about = "Map a medical AI device to EU explanation duties and XAI methods")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Doc,
    Structured,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Text,
    Structured,
}

#[derive(Clone, Copy, ValueEnum)]
enum Listing {
    Goals,
    Methods,
    Regulations,
}

#[derive(clap::Args)]
struct KbArg {
    /// Knowledge base file; defaults to the embedded one.
    #[arg(long, env = "XCA_KB_PATH")]
    kb: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a device profile and render the compliance report.
    Analyze {
        #[arg(long)]
        profile: PathBuf,
        #[command(flatten)]
        kb: KbArg,
        #[arg(long, value_enum, default_value = "doc")]
        format: ReportFormat,
        /// Maximum number of minimum covers to list.
        #[arg(long, default_value_t = DEFAULT_COVER_CAP, value_parser = clap::builder::RangedU64ValueParser::<usize>::new().range(1..))]
        cap: usize,
        /// Omit the timestamp so repeated runs are byte-identical.
        #[arg(long)]
        deterministic: bool,
        /// Also list irredundant covers with at most this many entries.
        #[arg(long, value_name = "N")]
        alternatives: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a knowledge base against the consistency rules.
    ValidateKb {
        #[command(flatten)]
        kb: KbArg,
        #[arg(long, value_enum, default_value = "text")]
        format: OutputFormat,
    },
    /// Print goals, methods or regulations of the knowledge base.
    List {
        #[arg(value_enum)]
        what: Listing,
        #[command(flatten)]
        kb: KbArg,
    },
    /// Compare the report for a profile with one for a modified copy.
    WhatIf {
        #[arg(long)]
        profile: PathBuf,
        /// Field override, e.g. `loop_type=closed` or `model_types=dnn,svm`.
        #[arg(long = "set", value_name = "KEY=VALUE", required = true)]
        sets: Vec<String>,
        #[command(flatten)]
        kb: KbArg,
        #[arg(long, value_enum, default_value = "text")]
        format: OutputFormat,
    },
    /// Run the HTTP service.
    Serve {
        #[command(flatten)]
        kb: KbArg,
        #[arg(long, default_value = "127.0.0.1")]
        bind: IpAddr,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Allow cross-origin requests from this origin.
        #[arg(long)]
        cors_origin: Option<String>,
        /// Expose POST /api/v1/admin/reload.
        #[arg(long)]
        enable_admin_reload: bool,
    },
}

struct Failure {
    code: u8,
    lines: Vec<String>,
}

impl Failure {
    fn invalid(lines: Vec<String>) -> Self {
        Self { code: EXIT_INVALID, lines }
    }

    fn io(path: &Path, err: std::io::Error) -> Self {
        Self::invalid(vec![format!("error: {}: {err}", path.display())])
    }

    fn load(path: &Path, err: &LoadError) -> Self {
        let mut lines = vec![format!("error: {}: {err}", path.display())];
        lines.extend(err.issues().iter().map(ValidationIssue::to_string));
        Self::invalid(lines)
    }
}

type CmdResult = Result<(), Failure>;

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| Failure::io(path, e))
}

fn resolve_kb(arg: &KbArg) -> Result<KnowledgeBase, Failure> {
    match &arg.kb {
        None => Ok(default_kb().clone()),
        Some(path) => load_kb(&read(path)?).map_err(|e| Failure::load(path, &e)),
    }
}

fn read_profile(path: &Path) -> Result<DeviceProfile, Failure> {
    load_profile(&read(path)?).map_err(|e| Failure::load(path, &e))
}

fn emit(bytes: &[u8], out: Option<&Path>) -> CmdResult {
    match out {
        Some(path) => std::fs::write(path, bytes).map_err(|e| Failure::io(path, e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(bytes)
                .and_then(|_| stdout.flush())
                .map_err(|e| Failure::invalid(vec![format!("error: stdout: {e}")]))
        }
    }
}

fn timestamp(report: &mut AnalysisReport) {
    report.generated_at = Some(chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true));
}

fn cmd_analyze(
    profile: &Path,
    kb: &KbArg,
    format: ReportFormat,
    options: AnalysisOptions,
    deterministic: bool,
    out: Option<&Path>,
) -> CmdResult {
    let kb = resolve_kb(kb)?;
    let profile = read_profile(profile)?;
    let mut report = analyze_with(&profile, &kb, options);
    if !deterministic {
        timestamp(&mut report);
    }
    let format = match format {
        ReportFormat::Doc => RenderFormat::Document,
        ReportFormat::Structured => RenderFormat::Structured,
    };
    emit(&render(&report, format), out)
}

fn cmd_validate_kb(kb: &KbArg, format: OutputFormat) -> CmdResult {
    let (source, bytes) = match &kb.kb {
        Some(path) => (path.display().to_string(), read(path)?),
        None => ("<embedded>".to_owned(), xca_core::loader::DEFAULT_KB_JSON.as_bytes().to_vec()),
    };
    let issues = match parse_document::<KbDocument>(&bytes, "") {
        Ok(doc) => validate_kb(&doc),
        Err(e) => e.issues(),
    };
    let errors = issues.iter().filter(|i| i.is_error()).count();
    let warnings = issues.len() - errors;
    let text = match format {
        OutputFormat::Text => {
            let mut s: String = issues.iter().map(|i| format!("{i}\n")).collect();
            s.push_str(&format!("{errors} errors, {warnings} warnings\n"));
            s
        }
        OutputFormat::Structured => to_canonical_pretty(&serde_json::json!({
            "source": source,
            "errors": errors,
            "warnings": warnings,
            "issues": issues,
        })),
    };
    emit(text.as_bytes(), None)?;
    if errors > 0 {
        return Err(Failure::invalid(Vec::new()));
    }
    Ok(())
}

fn cmd_list(what: Listing, kb: &KbArg) -> CmdResult {
    let kb = resolve_kb(kb)?;
    let text = match what {
        Listing::Goals => listing::goals(&kb),
        Listing::Methods => listing::methods(&kb),
        Listing::Regulations => listing::regulations(&kb),
    };
    emit(text.as_bytes(), None)
}

fn cmd_what_if(profile_path: &Path, sets: &[String], kb: &KbArg, format: OutputFormat) -> CmdResult {
    let usage = |msg: String| Failure { code: EXIT_USAGE, lines: vec![format!("error: {msg}")] };
    let overrides = sets
        .iter()
        .map(|s| parse_override(s))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| usage(e.to_string()))?;
    let kb = resolve_kb(kb)?;
    let base = read_profile(profile_path)?;
    let modified = apply_overrides(&base, &overrides).map_err(|e| usage(e.to_string()))?;
    let issues = validate_profile(&modified, "device");
    if !issues.is_empty() {
        let mut lines = vec!["error: the modified profile is invalid".to_owned()];
        lines.extend(issues.iter().map(ValidationIssue::to_string));
        return Err(Failure::invalid(lines));
    }
    let options = AnalysisOptions::default();
    let diff = diff_reports(&analyze_with(&base, &kb, options), &analyze_with(&modified, &kb, options));
    let text = match format {
        OutputFormat::Text => {
            let changes: Vec<String> = overrides.iter().map(|(k, v)| format!("{k}={v}")).collect();
            format!("what-if: {}\n\n{}", changes.join(" "), render_diff(&diff))
        }
        OutputFormat::Structured => to_canonical_pretty(&serde_json::to_value(&diff).expect("diff serializes")),
    };
    emit(text.as_bytes(), None)
}

fn cmd_serve(kb: &KbArg, addr: SocketAddr, config: xca_service::ServiceConfig) -> CmdResult {
    let kb = resolve_kb(kb)?;
    let state = Arc::new(xca_service::AppState::new(kb, config.admin_reload));
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::invalid(vec![format!("error: runtime: {e}")]))?;
    runtime
        .block_on(xca_service::serve(addr, state, config))
        .map_err(|e| Failure::invalid(vec![format!("error: {addr}: {e}")]))
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Analyze { profile, kb, format, cap, deterministic, alternatives, out } => cmd_analyze(
            &profile,
            &kb,
            format,
            AnalysisOptions { cap, alternatives_up_to: alternatives },
            deterministic,
            out.as_deref(),
        ),
        Command::ValidateKb { kb, format } => cmd_validate_kb(&kb, format),
        Command::List { what, kb } => cmd_list(what, &kb),
        Command::WhatIf { profile, sets, kb, format } => cmd_what_if(&profile, &sets, &kb, format),
        Command::Serve { kb, bind, port, cors_origin, enable_admin_reload } => cmd_serve(
            &kb,
            SocketAddr::new(bind, port),
            xca_service::ServiceConfig { cors_origin, admin_reload: enable_admin_reload },
        ),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            for line in f.lines {
                eprintln!("{line}");
            }
            ExitCode::from(f.code)
        }
    }
}
