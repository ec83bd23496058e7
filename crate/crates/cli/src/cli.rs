//! Command-line front end. `run` returns the process exit code:
//! 0 on success, 1 when diagnostics or findings of error severity were
//! reported, 2 for usage and I/O errors.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use ottrkit::docgen::{HierarchyFormat, load_docs, render_hierarchy, render_library_doc};
use ottrkit::ingest::{MappingConfig, RowDiagnosticKind, ingest_csv, published_only};
use ottrkit::lint::{LintConfig, lint_all};
use ottrkit::syntax::{parse_instances, parse_library, serialize_instances};
use ottrkit::typecheck::{check_instance, check_library, has_errors, sort_diagnostics};
use ottrkit::workflow::{SampleInputs, Workflow, sample_inputs_from_toml, simulate_connectivity, suggest_order, validate_workflow};
use ottrkit::{Expander, Instance, Library, TripleGraph};

pub const DEFAULT_BASE: &str = "http://example.org/ottrkit";

#[derive(Parser, Debug)]
#[command(name = "ottrkit", version, about = "Template library toolchain")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse and type-check a template library.
    Check {
        #[arg(short, long)]
        library: PathBuf,
    },
    /// Expand instances into RDF.
    Expand {
        #[arg(short, long)]
        library: PathBuf,
        #[arg(short, long)]
        instances: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = RdfFormat::Ntriples)]
        format: RdfFormat,
        /// Drop instances whose publicationStatus is not "published".
        #[arg(long)]
        published_only: bool,
    },
    /// Run the design-rule linter.
    Lint {
        #[arg(short, long)]
        library: PathBuf,
        #[arg(short, long)]
        instances: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Generate library documentation.
    Doc {
        #[arg(short, long)]
        library: PathBuf,
        #[arg(long)]
        docs: Option<PathBuf>,
        #[arg(short, long = "workflow")]
        workflows: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = DocFormat::Md)]
        format: DocFormat,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Workflow tools.
    Workflow {
        #[command(subcommand)]
        command: WorkflowCommand,
    },
    /// Map CSV rows to template instances.
    Ingest {
        #[arg(short, long)]
        library: PathBuf,
        #[arg(long)]
        mapping: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Emit expanded N-Triples instead of instances.
        #[arg(long)]
        triples: bool,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(short, long)]
        library: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, env = "OTTRKIT_BASE_IRI", default_value = DEFAULT_BASE)]
        base: String,
        /// Directory for session logs; sessions are in-memory without it.
        #[arg(long)]
        state_dir: Option<PathBuf>,
        #[arg(short, long = "workflow")]
        workflows: Vec<PathBuf>,
        #[arg(long)]
        docs: Option<PathBuf>,
        #[arg(long)]
        lint_config: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum WorkflowCommand {
    /// Validate a workflow and simulate its connectivity.
    Validate {
        #[arg(short, long)]
        library: PathBuf,
        #[arg(short, long)]
        workflow: PathBuf,
        #[arg(long)]
        inputs: Option<PathBuf>,
        #[arg(long, env = "OTTRKIT_BASE_IRI", default_value = DEFAULT_BASE)]
        base: String,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum RdfFormat {
    Ntriples,
    Turtle,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum DocFormat {
    Md,
    Dot,
    Text,
}

/// A failure that ends the command with the given exit code.
struct Fail(i32, String);

fn io_fail(path: &Path, e: impl std::fmt::Display) -> Fail {
    Fail(2, format!("{}: {e}", path.display()))
}

fn read(path: &Path) -> Result<String, Fail> {
    std::fs::read_to_string(path).map_err(|e| io_fail(path, e))
}

fn emit(output: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<(), Fail> {
    match output {
        Some(p) => std::fs::write(p, text).map_err(|e| io_fail(p, e)),
        None => out.write_all(text.as_bytes()).map_err(|e| Fail(2, e.to_string())),
    }
}

/// Parses a library, failing with exit 1 on syntax errors.
pub fn load_library(path: &Path) -> Result<Library, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_library(&text).map_err(|errs| {
        errs.iter().map(|e| format!("{}:{e}", path.display())).collect::<Vec<_>>().join("\n")
    })
}

fn library(path: &Path) -> Result<Library, Fail> {
    if !path.exists() {
        return Err(io_fail(path, "no such file"));
    }
    load_library(path).map_err(|m| Fail(1, m))
}

/// A library that also type-checks; diagnostics go to `err`.
fn checked_library(path: &Path, err: &mut dyn Write) -> Result<Library, Fail> {
    let lib = library(path)?;
    let diags = check_library(&lib);
    let prefixes = lib.effective_prefixes();
    for d in &diags {
        let _ = writeln!(err, "{}", d.render(&prefixes));
    }
    if has_errors(&diags) {
        return Err(Fail(1, format!("{}: library has errors", path.display())));
    }
    Ok(lib)
}

fn instances(path: &Path, lib: &Library, err: &mut dyn Write) -> Result<Vec<Instance>, Fail> {
    let text = read(path)?;
    let insts = parse_instances(&text, lib).map_err(|errs| {
        Fail(1, errs.iter().map(|e| format!("{}:{e}", path.display())).collect::<Vec<_>>().join("\n"))
    })?;
    let prefixes = lib.effective_prefixes();
    let mut diags: Vec<_> = insts.iter().flat_map(|i| check_instance(i, None, lib)).collect();
    sort_diagnostics(&mut diags);
    for d in &diags {
        let _ = writeln!(err, "{}", d.render(&prefixes));
    }
    if has_errors(&diags) {
        return Err(Fail(1, format!("{}: instances have errors", path.display())));
    }
    Ok(insts)
}

fn workflow(path: &Path, lib: &Library) -> Result<Workflow, Fail> {
    Workflow::from_toml(&read(path)?, &lib.effective_prefixes()).map_err(|e| Fail(1, format!("{}: {e}", path.display())))
}

/// Runs the CLI on `args` (including the program name).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(Fail(code, msg)) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Fail> {
    match command {
        Command::Check { library: path } => {
            let lib = library(&path)?;
            let diags = check_library(&lib);
            let prefixes = lib.effective_prefixes();
            for d in &diags {
                let _ = writeln!(out, "{}", d.render(&prefixes));
            }
            let errors = diags.iter().filter(|d| d.is_error()).count();
            let _ = writeln!(
                out,
                "{} template(s), {errors} error(s), {} warning(s)",
                lib.templates.len(),
                diags.len() - errors
            );
            Ok(if errors > 0 { 1 } else { 0 })
        }
        Command::Expand { library: lp, instances: ip, output, format, published_only: published } => {
            let lib = checked_library(&lp, err)?;
            let mut insts = instances(&ip, &lib, err)?;
            if published {
                insts = published_only(&insts, &lib);
            }
            let graph = Expander::new(&lib).expand_all(&insts).map_err(|e| Fail(1, e.to_string()))?;
            emit(output.as_deref(), &render_graph(&graph, format, &lib), out)?;
            Ok(0)
        }
        Command::Lint { library: lp, instances: ip, config, json } => {
            let lib = checked_library(&lp, err)?;
            let prefixes = lib.effective_prefixes();
            let config = match config {
                Some(p) => LintConfig::from_toml(&read(&p)?, &prefixes).map_err(|e| Fail(1, format!("{}: {e}", p.display())))?,
                None => LintConfig::default(),
            };
            let insts = ip.map(|p| instances(&p, &lib, err)).transpose()?;
            let report = lint_all(&lib, insts.as_deref(), &config).map_err(|e| Fail(1, e.to_string()))?;
            if json {
                let text = serde_json::to_string_pretty(&report.to_json(&prefixes)).expect("json value");
                let _ = writeln!(out, "{text}");
            } else {
                let _ = out.write_all(report.render_text(&prefixes).as_bytes());
                let _ = writeln!(out, "{} finding(s)", report.findings.len());
            }
            Ok(if report.has_errors() { 1 } else { 0 })
        }
        Command::Doc { library: lp, docs, workflows, format, output } => {
            let lib = checked_library(&lp, err)?;
            let text = match format {
                DocFormat::Dot => render_hierarchy(&lib, HierarchyFormat::Dot),
                DocFormat::Text => render_hierarchy(&lib, HierarchyFormat::Text),
                DocFormat::Md => {
                    let docs = match docs {
                        Some(p) => load_docs(&read(&p)?, &lib).map_err(|e| Fail(1, format!("{}: {e}", p.display())))?,
                        None => BTreeMap::new(),
                    };
                    let wfs = workflows.iter().map(|p| workflow(p, &lib)).collect::<Result<Vec<_>, _>>()?;
                    render_library_doc(&lib, &docs, &wfs)
                }
            };
            emit(output.as_deref(), &text, out)?;
            Ok(0)
        }
        Command::Workflow { command: WorkflowCommand::Validate { library: lp, workflow: wp, inputs, base } } => {
            let lib = checked_library(&lp, err)?;
            let prefixes = lib.effective_prefixes();
            let wf = workflow(&wp, &lib)?;
            let diags = validate_workflow(&wf, &lib);
            for d in &diags {
                let _ = writeln!(out, "{}", d.render(&prefixes));
            }
            if has_errors(&diags) {
                return Ok(1);
            }
            let order = suggest_order(&wf).map_err(|d| Fail(1, d.render(&prefixes)))?;
            let _ = writeln!(out, "order: {}", order.join(" -> "));
            let sample: SampleInputs = match inputs {
                Some(p) => sample_inputs_from_toml(&read(&p)?, &prefixes).map_err(|e| Fail(1, format!("{}: {e}", p.display())))?,
                None => SampleInputs::new(),
            };
            let sim = simulate_connectivity(&wf, &lib, &sample, &base).map_err(|e| Fail(1, e.to_string()))?;
            for r in &sim.reports {
                let _ = writeln!(out, "{r}");
            }
            let flagged = sim.reports.iter().filter(|r| r.flagged).count();
            if flagged > 0 {
                let _ = writeln!(out, "{flagged} step(s) leave the graph disconnected");
                return Ok(1);
            }
            Ok(0)
        }
        Command::Ingest { library: lp, mapping, data, output, triples } => {
            let lib = checked_library(&lp, err)?;
            let config = MappingConfig::from_toml(&read(&mapping)?, &lib).map_err(|e| Fail(1, format!("{}: {e}", mapping.display())))?;
            let ing = ingest_csv(&read(&data)?, &config, &lib).map_err(|e| Fail(1, format!("{}: {e}", data.display())))?;
            for d in &ing.diagnostics {
                let _ = writeln!(err, "{}: {d}", data.display());
            }
            let text = if triples {
                Expander::new(&lib).expand_all(&ing.instances).map_err(|e| Fail(1, e.to_string()))?.to_ntriples()
            } else {
                serialize_instances(&ing.instances, &lib.effective_prefixes())
            };
            emit(output.as_deref(), &text, out)?;
            let _ = writeln!(err, "{} of {} row(s) ingested", ing.instances.len(), ing.data_rows);
            let failed = ing.diagnostics.iter().any(|d| d.kind == RowDiagnosticKind::Error);
            Ok(if failed { 1 } else { 0 })
        }
        Command::Serve { library: lp, port, host, base, state_dir, workflows, docs, lint_config } => {
            let lib = checked_library(&lp, err)?;
            let prefixes = lib.effective_prefixes();
            let wfs = workflows.iter().map(|p| workflow(p, &lib)).collect::<Result<Vec<_>, _>>()?;
            let docs = match docs {
                Some(p) => load_docs(&read(&p)?, &lib).map_err(|e| Fail(1, format!("{}: {e}", p.display())))?,
                None => BTreeMap::new(),
            };
            let lint = match lint_config {
                Some(p) => LintConfig::from_toml(&read(&p)?, &prefixes).map_err(|e| Fail(1, format!("{}: {e}", p.display())))?,
                None => LintConfig::default(),
            };
            let config = crate::service::ServiceConfig { library: lib, base, state_dir, workflows: wfs, docs, lint };
            let state = crate::service::AppState::open(config).map_err(|e| Fail(2, e))?;
            let rt = tokio::runtime::Runtime::new().map_err(|e| Fail(2, e.to_string()))?;
            rt.block_on(async {
                let listener = tokio::net::TcpListener::bind((host.as_str(), port)).await.map_err(|e| Fail(2, e.to_string()))?;
                let _ = writeln!(err, "listening on {}", listener.local_addr().map_err(|e| Fail(2, e.to_string()))?);
                axum::serve(listener, crate::service::router(state)).await.map_err(|e| Fail(2, e.to_string()))
            })?;
            Ok(0)
        }
    }
}

fn render_graph(graph: &TripleGraph, format: RdfFormat, lib: &Library) -> String {
    match format {
        RdfFormat::Ntriples => graph.to_ntriples(),
        RdfFormat::Turtle => graph.to_turtle(&lib.effective_prefixes()),
    }
}
