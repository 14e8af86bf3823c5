use std::fs;
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use agentconform::checker::{check, check_reduced, validate_trace, Bounds, CheckResult, Counterexample, Verdict};
use agentconform::composer::{builtin_compositions, composition, cs_properties};
use agentconform::ir::{self, NormativeClause, Principle, ProtocolModel};
use agentconform::replay::{self, Mode, Outcome, Profile, TestCase};
use agentconform::report::{self, build_matrix, collect_results_for, ConformanceMatrix, Format};
use agentconform::{aasm, models, tla};
use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use serde_json::Value as Json;

#[derive(Parser)]
#[command(name = "agentconform", version, about = "Conformance checking for AI agent protocols")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Model-check one protocol model against its properties.
    Check {
        /// Bundled model name or path to a model file.
        model: String,
        /// Property id, or a principle such as P8.
        #[arg(long)]
        property: Option<String>,
        /// Overrides such as `agents=2,caps=2,depth=10`.
        #[arg(long)]
        bounds: Option<String>,
        /// Print results and counterexamples as JSON.
        #[arg(long)]
        json: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the protocol-by-principle conformance matrix.
    Matrix {
        /// Directory of `<name>.ir` models with optional `<name>.clauses`.
        #[arg(long)]
        models_dir: Option<PathBuf>,
        #[arg(long)]
        bounds: Option<String>,
        /// Directory for the rendered matrix and its linked documents.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the CS invariants of a bundled composition pattern.
    Compose {
        /// Pattern id; `list` prints the available patterns.
        pattern: String,
        #[arg(long)]
        bounds: Option<String>,
        /// Print the composed model instead of checking it.
        #[arg(long)]
        emit_model: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit a TLA+ module and one TLC configuration per property.
    EmitTla {
        model: String,
        #[arg(long)]
        bounds: Option<String>,
        /// Directory to write the files to; prints the module otherwise.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse a TLC output log.
    ParseTlc {
        log: PathBuf,
        /// Rebuild and validate the trace against this model.
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        bounds: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay a counterexample or generated test against an endpoint.
    Replay {
        /// Counterexample or test case JSON file.
        counterexample: PathBuf,
        #[arg(long, default_value = "vulnerable")]
        profile: String,
        /// Address of a live endpoint; the in-process mock is used otherwise.
        #[arg(long)]
        live: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render the conformance report.
    Report {
        /// `table` or `structured`.
        #[arg(long, default_value = "table")]
        format: String,
        #[arg(long)]
        models_dir: Option<PathBuf>,
        #[arg(long)]
        bounds: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the principle catalog reference.
    Catalog {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve a mock endpoint until killed.
    #[command(hide = true)]
    ServeMock {
        protocol: String,
        #[arg(long, default_value = "vulnerable")]
        profile: String,
        #[arg(long, default_value = "127.0.0.1:0")]
        addr: String,
        #[arg(long)]
        max_connections: Option<usize>,
    },
}

/// What a command produced: its text and whether it found violations.
struct Output {
    text: String,
    violations: bool,
}

fn emit(out: Option<&Path>, o: Output) -> Result<ExitCode> {
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(path, &o.text).with_context(|| format!("writing {}", path.display()))?;
        }
        None => print!("{}", o.text),
    }
    Ok(if o.violations { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn bounds(spec: Option<&str>) -> Result<Bounds> {
    Bounds::default()
        .with_overrides(spec.unwrap_or(""))
        .map_err(|e| anyhow!("--bounds: {e}"))
}

fn load_model(arg: &str) -> Result<ProtocolModel> {
    if Path::new(arg).is_file() {
        let m = ir::load_model(arg).map_err(|e| anyhow!("{arg}: {e}"))?;
        let report = ir::validate(&m);
        if !report.is_empty() {
            bail!("{arg}: invalid model\n{report}");
        }
        return Ok(m);
    }
    models::builtin(arg).map_err(|_| {
        anyhow!("`{arg}` is neither a file nor a bundled model ({})", models::names().join(", "))
    })
}

fn describe(r: &CheckResult) -> String {
    match r {
        CheckResult::Fail { cx, .. } => format!("FAIL  depth {}  states {}", cx.depth, r.states_explored()),
        _ => format!("{}  states {}", r.verdict().as_str(), r.states_explored()),
    }
}

fn trace_text(cx: &Counterexample) -> String {
    let mut out = String::from("    0  <init>\n");
    for (i, s) in cx.steps.iter().enumerate() {
        let params: Vec<String> = s.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        out.push_str(&format!("    {}  {}({})\n", i + 1, s.action, params.join(", ")));
    }
    out
}

fn cmd_check(model: &str, property: Option<&str>, b: &Bounds, json: bool) -> Result<Output> {
    let m = load_model(model)?;
    let props: Vec<_> = match property {
        None => m.properties.iter().collect(),
        Some(p) => {
            let principle = Principle::ALL.into_iter().find(|q| q.as_str() == p);
            let found: Vec<_> = m
                .properties
                .iter()
                .filter(|q| q.id == p || Some(q.principle) == principle)
                .collect();
            if found.is_empty() {
                bail!("model `{}` has no property `{p}`", m.name);
            }
            found
        }
    };
    let mut violations = false;
    let mut text = String::new();
    let mut docs = Vec::new();
    for p in props {
        let r = check(&m, p, b).with_context(|| format!("checking {}", p.id))?;
        violations |= r.verdict() != Verdict::Pass;
        text.push_str(&format!("{}/{}  {}\n", m.name, p.id, describe(&r)));
        if let Some(cx) = r.counterexample() {
            text.push_str(&trace_text(cx));
        }
        docs.push(serde_json::json!({
            "property": p.id,
            "verdict": r.verdict().as_str(),
            "states_explored": r.states_explored(),
            "counterexample": r.counterexample().map(Counterexample::to_json),
        }));
    }
    if json {
        text = serde_json::to_string_pretty(&Json::Array(docs))? + "\n";
    }
    Ok(Output { text, violations })
}

fn read_models_dir(dir: &Path) -> Result<Vec<(ProtocolModel, Vec<NormativeClause>)>> {
    let mut out = Vec::new();
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()?;
    paths.sort();
    for path in paths.iter().filter(|p| p.extension().is_some_and(|x| x == "ir")) {
        let m = load_model(&path.to_string_lossy())?;
        let clause_path = path.with_extension("clauses");
        let clauses = if clause_path.is_file() {
            ir::load_clauses(&clause_path).map_err(|e| anyhow!("{}: {e}", clause_path.display()))?
        } else {
            Vec::new()
        };
        out.push((m, clauses));
    }
    let order = |m: &ProtocolModel| aasm::PROTOCOLS.iter().position(|p| *p == m.name).unwrap_or(usize::MAX);
    out.sort_by_key(|(m, _)| order(m));
    Ok(out)
}

fn matrix(models_dir: Option<&Path>, b: &Bounds) -> Result<ConformanceMatrix> {
    let protocols = match models_dir {
        Some(dir) => read_models_dir(dir)?,
        None => aasm::PROTOCOLS
            .iter()
            .map(|n| Ok((models::builtin(n)?, models::builtin_clauses(n)?)))
            .collect::<Result<_>>()?,
    };
    Ok(build_matrix(&collect_results_for(&protocols, b))?)
}

fn cmd_matrix(models_dir: Option<&Path>, b: &Bounds, out: Option<&Path>) -> Result<ExitCode> {
    let m = matrix(models_dir, b)?;
    let table = report::render(&m, Format::Table);
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("matrix.txt"), &table)?;
        fs::write(dir.join("matrix.json"), report::render(&m, Format::Structured))?;
        for (rel, content) in &m.documents {
            let path = dir.join(rel);
            fs::create_dir_all(path.parent().expect("documents live in subdirectories"))?;
            fs::write(path, content)?;
        }
        eprintln!("wrote matrix and {} documents to {}", m.documents.len(), dir.display());
        return emit(None, Output { text: String::new(), violations: m.has_violations() });
    }
    emit(None, Output { text: table, violations: m.has_violations() })
}

fn cmd_compose(pattern: &str, b: &Bounds, emit_model: bool) -> Result<Output> {
    if pattern == "list" {
        let text = builtin_compositions()
            .iter()
            .map(|c| format!("{:<24}{}+{}  {}\n", c.id, c.a, c.b, c.title))
            .collect();
        return Ok(Output { text, violations: false });
    }
    let c = composition(pattern)?;
    let composed = c.build()?;
    if emit_model {
        return Ok(Output { text: ir::serialize_model(&composed.model), violations: false });
    }
    let mut text = format!("{} ({} + {})\n", c.title, c.a, c.b);
    let mut violations = false;
    for p in cs_properties(&c) {
        let r = check_reduced(&composed.model, &p, b)?;
        violations |= r.verdict() != Verdict::Pass;
        text.push_str(&format!("{}  {}\n", p.id, describe(&r)));
        if let Some(cx) = r.counterexample() {
            text.push_str(&trace_text(cx));
        }
    }
    Ok(Output { text, violations })
}

fn cmd_emit_tla(model: &str, b: &Bounds, out: Option<&Path>) -> Result<ExitCode> {
    let m = load_model(model)?;
    let artifact = tla::emit(&m, b)?;
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            for (name, text) in artifact.files() {
                fs::write(dir.join(&name), text).with_context(|| format!("writing {name}"))?;
            }
            eprintln!("wrote {} files to {}", artifact.files().len(), dir.display());
            Ok(ExitCode::SUCCESS)
        }
        None => emit(None, Output { text: artifact.module_text, violations: false }),
    }
}

fn cmd_parse_tlc(log: &Path, model: Option<&str>, b: &Bounds) -> Result<Output> {
    let text = fs::read_to_string(log).with_context(|| format!("reading {}", log.display()))?;
    let parsed = tla::parse_tlc_output(&text)?;
    let mut out = match &parsed.violated {
        Some(p) => format!(
            "FAIL  {p}  depth {}  distinct states {}\n",
            parsed.depth().unwrap_or(0),
            parsed.distinct_states
        ),
        None => format!("PASS  distinct states {}\n", parsed.distinct_states),
    };
    if let (Some(model), Some(_)) = (model, &parsed.violated) {
        let m = load_model(model)?;
        let cx = tla::to_counterexample(&m, &parsed, b)?;
        let valid = validate_trace(&m, &cx, b)?;
        if !valid {
            bail!("recovered trace does not violate {} in {}", cx.property, m.name);
        }
        out.push_str(&serde_json::to_string_pretty(&cx.to_json())?);
        out.push('\n');
    }
    Ok(Output { text: out, violations: parsed.violated.is_some() })
}

fn cmd_replay(file: &Path, profile: &str, live: Option<String>) -> Result<Output> {
    let text = fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    let j: Json = serde_json::from_str(&text).with_context(|| format!("{} is not JSON", file.display()))?;
    let test = if j.get("counterexample").is_some() {
        TestCase::from_json(&j)?
    } else {
        let cx = Counterexample::from_json(&j)?;
        replay::generate_test(&cx).map_err(|e| anyhow!(e))?
    };
    let profile: Profile = profile.parse()?;
    let mode = live.map_or(Mode::Mock, Mode::Live);
    let report = replay::run(&test, profile, &mode)?;
    Ok(Output { violations: report.outcome == Outcome::Violated, text: report.render() })
}

fn cmd_serve(protocol: &str, profile: &str, addr: &str, max: Option<usize>) -> Result<ExitCode> {
    let profile: Profile = profile.parse()?;
    let listener = TcpListener::bind(addr)?;
    println!("{}", listener.local_addr()?);
    replay::serve(protocol, profile, listener, max)?;
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Check { model, property, bounds: bs, json, out } => {
            let o = cmd_check(&model, property.as_deref(), &bounds(bs.as_deref())?, json)?;
            emit(out.as_deref(), o)
        }
        Command::Matrix { models_dir, bounds: bs, out } => {
            cmd_matrix(models_dir.as_deref(), &bounds(bs.as_deref())?, out.as_deref())
        }
        Command::Compose { pattern, bounds: bs, emit_model, out } => {
            let o = cmd_compose(&pattern, &bounds(bs.as_deref())?, emit_model)?;
            emit(out.as_deref(), o)
        }
        Command::EmitTla { model, bounds: bs, out } => cmd_emit_tla(&model, &bounds(bs.as_deref())?, out.as_deref()),
        Command::ParseTlc { log, model, bounds: bs, out } => {
            let o = cmd_parse_tlc(&log, model.as_deref(), &bounds(bs.as_deref())?)?;
            emit(out.as_deref(), o)
        }
        Command::Replay { counterexample, profile, live, out } => {
            emit(out.as_deref(), cmd_replay(&counterexample, &profile, live)?)
        }
        Command::Report { format, models_dir, bounds: bs, out } => {
            let format: Format = format.parse().map_err(|e: String| anyhow!(e))?;
            let m = matrix(models_dir.as_deref(), &bounds(bs.as_deref())?)?;
            let violations = m.has_violations();
            emit(out.as_deref(), Output { text: report::render(&m, format), violations })
        }
        Command::Catalog { out } => emit(out.as_deref(), Output { text: aasm::reference_doc(), violations: false }),
        Command::ServeMock { protocol, profile, addr, max_connections } => {
            cmd_serve(&protocol, &profile, &addr, max_connections)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
