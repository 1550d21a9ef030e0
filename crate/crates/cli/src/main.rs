//! `pmdt`: validation, reasoning, local and federated querying, and export
//! over the patient digital twin ontology.
//!
//! Exit codes: 0 success, 1 violations or advisories found, 2 usage or parse
//! error, 3 execution error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use pmdt_core::query::{explain_plan, parse_query_with, rewrite_with_subsumption, EvalError};
use pmdt_core::reasoner::{
    advise_followups, classify, materialize, validate, MaterializeConfig, ReasonerError,
};
use pmdt_core::{
    bootstrap_pmdt_schema, evaluate_local, parse_turtle, serialize_dataset, serialize_turtle,
    BindingSet, Dataset, LoadError, QueryAst, SchemaGraph, Strictness,
};
use pmdt_federation::{ExecOptions, Federation, SiteDescriptor, WireMessage};

#[derive(Parser)]
#[command(name = "pmdt", version, about = "Patient medical digital twin toolkit")]
struct Cli {
    /// Schema file (Turtle subset); defaults to the built-in PMDT schema.
    #[arg(long, global = true)]
    schema: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check data files against the schema's closed-world constraints.
    Validate {
        data: Vec<PathBuf>,
        /// Reject assertions whose predicate the schema does not declare.
        #[arg(long)]
        strict: bool,
    },
    /// Evaluate a query over local data files.
    Query {
        data: Vec<PathBuf>,
        /// Query file or query text.
        #[arg(long, short)]
        query: String,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        /// Evaluate over the materialized dataset.
        #[arg(long)]
        reason: bool,
        #[arg(long)]
        strict: bool,
    },
    /// Evaluate a query across federated sites.
    Fedquery {
        /// Site descriptor files or directories of them.
        #[arg(required = true)]
        config: Vec<PathBuf>,
        #[arg(long, short)]
        query: String,
        #[arg(long, default_value = "clinician")]
        role: String,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        #[arg(long)]
        show_plan: bool,
        #[arg(long)]
        show_audit: bool,
        #[arg(long)]
        show_wire: bool,
        /// Treat a site as unreachable.
        #[arg(long)]
        unavailable: Vec<String>,
        /// Process site responses in a seeded random order.
        #[arg(long)]
        shuffle_seed: Option<u64>,
    },
    /// Show the local join order chosen for a query.
    Explain {
        data: Vec<PathBuf>,
        #[arg(long, short)]
        query: String,
    },
    /// Write the schema, instance data, or both as canonical Turtle.
    Export {
        #[arg(long, value_enum)]
        what: What,
        #[arg(long)]
        out: PathBuf,
        data: Vec<PathBuf>,
        /// Also include the lifted data of these federated sites.
        #[arg(long)]
        federation: Vec<PathBuf>,
    },
    /// Regenerate the persona fixture corpus.
    Fixtures {
        #[arg(long)]
        out: PathBuf,
        /// Also write a scaled dataset with at least this many assertions.
        #[arg(long)]
        scaled: Option<usize>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum What {
    Schema,
    Instances,
    Merged,
}

/// An error paired with the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn usage(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 2,
        error: error.into(),
    }
}

fn execution(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 3,
        error: error.into(),
    }
}

fn load_error(e: LoadError) -> Failure {
    match e {
        LoadError::Io { .. } => execution(e),
        _ => usage(e),
    }
}

type Outcome = Result<u8, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(usage)
}

fn load_schema(path: Option<&Path>) -> Result<SchemaGraph, Failure> {
    let mut schema = match path {
        None => bootstrap_pmdt_schema(),
        Some(p) => {
            let doc = parse_turtle(&read(p)?)
                .with_context(|| p.display().to_string())
                .map_err(usage)?;
            doc.schema_graph()
                .with_context(|| p.display().to_string())
                .map_err(usage)?
        }
    };
    if let Some(extra) = std::env::var_os("PMDT_PREFIXES") {
        let p = PathBuf::from(extra);
        let doc = parse_turtle(&read(&p)?)
            .with_context(|| format!("PMDT_PREFIXES {}", p.display()))
            .map_err(usage)?;
        schema.prefixes_mut().merge(&doc.prefixes);
    }
    Ok(schema)
}

fn load_data(schema: &SchemaGraph, files: &[PathBuf], strict: bool) -> Result<Dataset, Failure> {
    let strictness = if strict {
        Strictness::Strict
    } else {
        Strictness::Lenient
    };
    let mut ds = Dataset::new();
    for f in files {
        ds.extend(&Dataset::load(f, schema, strictness).map_err(load_error)?);
    }
    Ok(ds)
}

fn load_query(arg: &str, schema: &SchemaGraph) -> Result<QueryAst, Failure> {
    let path = Path::new(arg);
    let text = if path.is_file() {
        read(path)?
    } else {
        arg.to_string()
    };
    parse_query_with(&text, schema.prefixes()).map_err(usage)
}

fn print_bindings(b: &BindingSet, format: Format, ast: &QueryAst) {
    match format {
        Format::Table => print!("{}", b.to_table(&ast.prefixes)),
        Format::Csv => print!("{}", b.to_csv(&ast.prefixes)),
    }
}

fn materialized(schema: &SchemaGraph, ds: &Dataset) -> Result<Dataset, ReasonerError> {
    materialize(schema, &classify(schema), ds, &MaterializeConfig::default())
}

fn cmd_validate(schema: &SchemaGraph, data: &[PathBuf], strict: bool) -> Outcome {
    let ds = load_data(schema, data, strict)?;
    let prefixes = schema.prefixes();
    let m = match materialized(schema, &ds) {
        Ok(m) => m,
        Err(ReasonerError::TemporalCycle { state }) => {
            println!(
                "violation\ttemporal-cycle\t{}\tprecedes is irreflexive\t",
                prefixes.render(&state)
            );
            return Ok(1);
        }
    };
    let closure = classify(schema);
    let violations = validate(schema, &closure, &m);
    let advisories = advise_followups(schema, &closure, &m);
    for v in &violations {
        println!("{}", v.render(prefixes));
    }
    for a in &advisories {
        println!("{}", a.render(prefixes));
    }
    Ok(u8::from(!violations.is_empty() || !advisories.is_empty()))
}

fn cmd_query(
    schema: &SchemaGraph,
    data: &[PathBuf],
    query: &str,
    format: Format,
    reason: bool,
    strict: bool,
) -> Outcome {
    let ast = load_query(query, schema)?;
    let mut ds = load_data(schema, data, strict)?;
    if reason {
        ds = materialized(schema, &ds).map_err(execution)?;
    }
    let rewritten = rewrite_with_subsumption(&ast, &classify(schema)).map_err(execution)?;
    let out = evaluate_local(&rewritten, &ds)
        .map_err(|e: EvalError| execution(anyhow!("evaluation-error: {e}")))?;
    print_bindings(&out, format, &ast);
    Ok(0)
}

fn federation(schema: &SchemaGraph, config: &[PathBuf]) -> Result<Federation, Failure> {
    let mut fed = Federation::new(schema.clone());
    for c in config {
        let registered = if c.is_dir() {
            fed.register_dir(c).map(|_| ())
        } else {
            SiteDescriptor::from_file(c).and_then(|d| fed.register_site(&d))
        };
        registered.map_err(|e| usage(anyhow!("{}: {e}", e.kind())))?;
    }
    Ok(fed)
}

fn wire_text(m: &WireMessage) -> String {
    let bytes = m.encode();
    format!(
        "[{} bytes] {}",
        bytes.len() - 4,
        String::from_utf8_lossy(&bytes[4..])
    )
}

#[allow(clippy::too_many_arguments)]
fn cmd_fedquery(
    schema: &SchemaGraph,
    config: &[PathBuf],
    query: &str,
    role: &str,
    format: Format,
    (show_plan, show_audit, show_wire): (bool, bool, bool),
    unavailable: &[String],
    shuffle_seed: Option<u64>,
) -> Outcome {
    let ast = load_query(query, schema)?;
    let fed = federation(schema, config)?;
    let options = ExecOptions {
        unavailable: unavailable.iter().cloned().collect(),
        shuffle_seed,
        ..Default::default()
    };
    let out = fed
        .execute(&ast, role, &options)
        .map_err(|e| execution(anyhow!("{}: {e}", e.kind())))?;
    print_bindings(&out.bindings, format, &ast);
    if show_plan {
        println!("\n# plan");
        print!("{}", out.plan.render(&ast));
    }
    if show_audit {
        println!("\n# audit");
        for e in &out.audit {
            println!("{}", e.render());
        }
    }
    if show_wire {
        println!("\n# wire");
        for m in &out.messages {
            println!("{}", wire_text(m));
        }
    }
    Ok(0)
}

fn cmd_explain(schema: &SchemaGraph, data: &[PathBuf], query: &str) -> Outcome {
    let ast = load_query(query, schema)?;
    let ds = load_data(schema, data, false)?;
    let rewritten = rewrite_with_subsumption(&ast, &classify(schema)).map_err(execution)?;
    print!("{}", explain_plan(&rewritten, &ds));
    Ok(0)
}

fn cmd_export(
    schema: &SchemaGraph,
    what: What,
    out: &Path,
    data: &[PathBuf],
    sites: &[PathBuf],
) -> Outcome {
    let mut ds = load_data(schema, data, false)?;
    if !sites.is_empty() {
        ds.extend(&federation(schema, sites)?.lifted_union());
    }
    let text = match what {
        What::Schema => serialize_turtle(schema, None),
        What::Instances => serialize_dataset(&ds, schema.prefixes()),
        What::Merged => serialize_turtle(schema, Some(&ds)),
    };
    std::fs::write(out, text)
        .with_context(|| format!("cannot write {}", out.display()))
        .map_err(execution)?;
    Ok(0)
}

fn cmd_fixtures(schema: &SchemaGraph, out: &Path, scaled: Option<usize>, seed: u64) -> Outcome {
    let bundle = pmdt_fixtures::generate_bundle().map_err(execution)?;
    let written = bundle.write(out).map_err(execution)?;
    if let Some(n) = scaled {
        let ds = pmdt_fixtures::generate_scaled(n, seed);
        let path = out.join("scaled.ttl");
        ds.export(&path, schema.prefixes()).map_err(execution)?;
        println!("{}", path.display());
    }
    for p in written {
        println!("{}", p.display());
    }
    Ok(0)
}

fn run(cli: Cli) -> Outcome {
    let schema = load_schema(cli.schema.as_deref())?;
    match cli.command {
        Command::Validate { data, strict } => cmd_validate(&schema, &data, strict),
        Command::Query {
            data,
            query,
            format,
            reason,
            strict,
        } => cmd_query(&schema, &data, &query, format, reason, strict),
        Command::Fedquery {
            config,
            query,
            role,
            format,
            show_plan,
            show_audit,
            show_wire,
            unavailable,
            shuffle_seed,
        } => cmd_fedquery(
            &schema,
            &config,
            &query,
            &role,
            format,
            (show_plan, show_audit, show_wire),
            &unavailable,
            shuffle_seed,
        ),
        Command::Explain { data, query } => cmd_explain(&schema, &data, &query),
        Command::Export {
            what,
            out,
            data,
            federation,
        } => cmd_export(&schema, what, &out, &data, &federation),
        Command::Fixtures { out, scaled, seed } => cmd_fixtures(&schema, &out, scaled, seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure { code, error }) => {
            eprintln!("pmdt: {error:#}");
            ExitCode::from(code)
        }
    }
}
