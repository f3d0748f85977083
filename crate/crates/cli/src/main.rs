use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gks_core::export::{
    document_from_json, document_to_json, gks_to_dot, gks_to_json, DotOptions, ExtensionDisplay,
    RankDirection,
};
use gks_core::table::IdColumn;
use gks_core::*;

const GRAMMAR: &str = "Formula to evaluate.

  formula := or
  or      := and ('|' and)*
  and     := not ('&' not)*
  not     := '!' not | '(' formula ')' | atom
  atom    := '(' name rel name ')'
  rel     := '=' | '!='
  name    := bare-word+ | double-quoted string

Example: \"(Theory = LR) & !(Application Domain = BI)\"";

#[derive(Debug, Parser)]
#[command(
    name = "gks",
    version,
    about = "Build, combine and export granular knowledge structures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct TableArgs {
    /// CSV file with a header row ("-" for stdin), or a table JSON from `gks ingest`
    #[arg(long)]
    table: String,
    /// Table name (defaults to the file stem)
    #[arg(long)]
    name: Option<String>,
    /// Object id column, by header name or 0-based index
    #[arg(long)]
    id_column: Option<String>,
    /// Token marking a missing value
    #[arg(long, default_value = "–")]
    missing: String,
    /// Separator inside multi-valued cells
    #[arg(long, default_value = ";")]
    sep: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    /// Structure plus its table, readable by the other subcommands
    Doc,
    /// Bare structure JSON
    Json,
    Dot,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Rank {
    Bt,
    Tb,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Extensions {
    Hidden,
    Ids,
    Count,
}

#[derive(Debug, Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value = "doc")]
    format: Format,
    /// DOT rank direction: coarse granules at the bottom (bt) or top (tb)
    #[arg(long, value_enum, default_value = "bt")]
    rank: Rank,
    /// What DOT node labels show besides the granule label
    #[arg(long, value_enum, default_value = "hidden")]
    extensions: Extensions,
    /// Write here instead of stdout
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Op {
    Union,
    Intersect,
    Diff,
    Product,
    Generalize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse a CSV table and print it as JSON
    Ingest {
        #[command(flatten)]
        table: TableArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print the objects satisfying a formula, one per line
    Eval {
        #[command(flatten)]
        table: TableArgs,
        #[arg(long, long_help = GRAMMAR)]
        formula: String,
    },
    /// Build the attribute-value structure of one attribute
    Build {
        #[command(flatten)]
        table: TableArgs,
        #[arg(long)]
        attr: String,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Combine structure documents
    Op {
        #[arg(value_enum)]
        op: Op,
        /// Structure documents ("-" for stdin)
        #[arg(required = true)]
        inputs: Vec<String>,
        /// Atomic formula of the shared super-granule, e.g. "(Discipline = Rough Sets)"
        #[arg(long)]
        shared: Option<String>,
        /// Label of the shared super-granule (defaults to its value)
        #[arg(long)]
        label: Option<String>,
        /// Product: children of the first input to use, comma separated labels
        #[arg(long, value_delimiter = ',')]
        left: Option<Vec<String>>,
        /// Product: children of the second input to use
        #[arg(long, value_delimiter = ',')]
        right: Option<Vec<String>>,
        /// Product: keep conjunctions with an empty extension
        #[arg(long)]
        keep_empty: bool,
        /// Write the merged/kept/dropped delta of union, intersect or diff here
        #[arg(long)]
        delta: Option<PathBuf>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Print the nodes one level finer (in) or coarser (out) than a selection
    Zoom {
        /// Structure document
        #[arg(long)]
        gks: String,
        #[arg(long, value_parser = ["in", "out"])]
        direction: String,
        /// Node ids (n3) or labels, comma separated
        #[arg(long, value_delimiter = ',', required = true)]
        nodes: Vec<String>,
    },
    /// Reverse the edges between two families of nodes
    SwitchView {
        #[arg(long)]
        gks: String,
        #[arg(long, value_delimiter = ',', required = true)]
        upper: Vec<String>,
        #[arg(long, value_delimiter = ',', required = true)]
        lower: Vec<String>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Render a structure document as DOT or bare JSON
    Export {
        #[arg(long)]
        gks: String,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Run the HTTP service
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: SocketAddr,
        /// Directory of static UI assets
        #[arg(long)]
        assets: Option<PathBuf>,
        /// Registry snapshot, loaded at start and written on shutdown
        #[arg(long)]
        snapshot: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum Failure {
    Domain(Error),
    Io(String, std::io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

impl From<SyntaxError> for Failure {
    fn from(e: SyntaxError) -> Self {
        Failure::Domain(e.into())
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn read_input(path: &str) -> CliResult<String> {
    let mut text = String::new();
    let res = if path == "-" {
        std::io::stdin().read_to_string(&mut text).map(|_| ())
    } else {
        std::fs::read_to_string(path).map(|t| text = t)
    };
    res.map_err(|e| Failure::Io(path.to_string(), e))?;
    Ok(text)
}

fn write_output(path: Option<&Path>, text: &str) -> CliResult {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Io(p.display().to_string(), e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Io("stdout".into(), e)),
    }
}

fn load_table(args: &TableArgs) -> CliResult<Arc<InformationTable>> {
    let text = read_input(&args.table)?;
    if args.table.ends_with(".json") {
        let t: InformationTable =
            serde_json::from_str(&text).map_err(|e| Error::Schema(e.to_string()))?;
        return Ok(Arc::new(t));
    }
    let name = args
        .name
        .clone()
        .unwrap_or_else(|| match args.table.as_str() {
            "-" => "stdin".to_string(),
            p => Path::new(p)
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "table".into()),
        });
    let mut config = IngestConfig::named(name);
    config.missing = args.missing.clone();
    config.separator = args.sep.clone();
    if let Some(c) = &args.id_column {
        config.id_column = match c.parse::<usize>() {
            Ok(i) => IdColumn::Index(i),
            Err(_) => IdColumn::Name(c.clone()),
        };
    }
    Ok(Arc::new(ingest_csv(text.as_bytes(), &config)?))
}

fn load_gks(path: &str) -> CliResult<Gks> {
    Ok(document_from_json(&read_input(path)?)?)
}

fn emit(g: &Gks, out: &OutputArgs) -> CliResult {
    let mut text = match out.format {
        Format::Doc => document_to_json(g),
        Format::Json => gks_to_json(g),
        Format::Dot => {
            let opts = DotOptions {
                rank: match out.rank {
                    Rank::Bt => RankDirection::CoarseAtBottom,
                    Rank::Tb => RankDirection::CoarseAtTop,
                },
                extensions: match out.extensions {
                    Extensions::Hidden => ExtensionDisplay::Hidden,
                    Extensions::Ids => ExtensionDisplay::Ids,
                    Extensions::Count => ExtensionDisplay::Count,
                },
                ..Default::default()
            };
            gks_to_dot(g, &opts)
        }
    };
    if !text.ends_with('\n') {
        text.push('\n');
    }
    write_output(out.output.as_deref(), &text)
}

fn atomic(text: &str) -> CliResult<AtomicFormula> {
    match parse_formula(text)? {
        Formula::Atom(a) => Ok(a),
        other => Err(Error::Schema(format!("{other} is not an atomic formula")).into()),
    }
}

fn resolve(g: &Gks, keys: &[String]) -> CliResult<BTreeSet<NodeId>> {
    Ok(keys.iter().map(|k| g.resolve(k)).collect::<Result<_>>()?)
}

#[allow(clippy::too_many_arguments)]
fn run_op(
    op: Op,
    inputs: &[String],
    shared: Option<&str>,
    label: Option<String>,
    left: Option<&[String]>,
    right: Option<&[String]>,
    keep_empty: bool,
    delta_path: Option<&Path>,
    out: &OutputArgs,
) -> CliResult {
    let structures = inputs
        .iter()
        .map(|p| load_gks(p))
        .collect::<CliResult<Vec<_>>>()?;
    let shared = shared.map(atomic).transpose()?;
    let pair = || -> CliResult<(&Gks, &Gks)> {
        match structures.as_slice() {
            [a, b] => Ok((a, b)),
            _ => Err(Error::Schema(format!(
                "{op:?} takes exactly two structures, got {}",
                structures.len()
            ))
            .into()),
        }
    };
    let (g, delta) = match op {
        Op::Union => {
            let (a, b) = pair()?;
            union_gks(a, b).map(|(g, d)| (g, Some(d)))?
        }
        Op::Intersect => {
            let (a, b) = pair()?;
            intersect_gks(a, b).map(|(g, d)| (g, Some(d)))?
        }
        Op::Diff => {
            let (a, b) = pair()?;
            difference_gks(a, b).map(|(g, d)| (g, Some(d)))?
        }
        Op::Product => {
            let (a, b) = pair()?;
            let opts = ProductOptions {
                shared: shared.map(|s| {
                    let label = label.unwrap_or_else(|| s.value.clone());
                    (s, label)
                }),
                keep_empty,
            };
            let l = ProductFactor::from_two_level(a, left)?;
            let r = ProductFactor::from_two_level(b, right)?;
            (product(&l, &r, &opts)?, None)
        }
        Op::Generalize => {
            let shared = shared.ok_or_else(|| {
                Error::Schema("generalize needs --shared \"(attribute = value)\"".into())
            })?;
            let label = label.unwrap_or_else(|| shared.value.clone());
            (generalize(&structures, &shared, &label)?, None)
        }
    };
    if let (Some(path), Some(d)) = (delta_path, &delta) {
        let text = serde_json::to_string_pretty(d).expect("deltas serialize") + "\n";
        write_output(Some(path), &text)?;
    }
    emit(&g, out)
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Ingest { table, output } => {
            let t = load_table(&table)?;
            let text = serde_json::to_string_pretty(&*t).expect("tables serialize") + "\n";
            write_output(output.as_deref(), &text)
        }
        Command::Eval { table, formula } => {
            let t = load_table(&table)?;
            let ids = evaluate(&parse_formula(&formula)?, &t)?;
            let text: String = ids.iter().map(|id| format!("{id}\n")).collect();
            write_output(None, &text)
        }
        Command::Build { table, attr, out } => {
            let t = load_table(&table)?;
            emit(&build_attribute_value_structure(&t, &attr)?, &out)
        }
        Command::Op {
            op,
            inputs,
            shared,
            label,
            left,
            right,
            keep_empty,
            delta,
            out,
        } => run_op(
            op,
            &inputs,
            shared.as_deref(),
            label,
            left.as_deref(),
            right.as_deref(),
            keep_empty,
            delta.as_deref(),
            &out,
        ),
        Command::Zoom {
            gks,
            direction,
            nodes,
        } => {
            let g = load_gks(&gks)?;
            let direction: Direction = direction.parse().map_err(Error::Schema)?;
            let selected = zoom(&g, direction, &resolve(&g, &nodes)?)?;
            let mut text = String::new();
            for n in selected {
                text.push_str(&format!("{n}\t{}\n", g.node(n)?.label()));
            }
            write_output(None, &text)
        }
        Command::SwitchView {
            gks,
            upper,
            lower,
            out,
        } => {
            let g = load_gks(&gks)?;
            let switched = switch_view(&g, &resolve(&g, &upper)?, &resolve(&g, &lower)?)?;
            emit(&switched, &out)
        }
        Command::Export { gks, out } => emit(&load_gks(&gks)?, &out),
        Command::Serve {
            bind,
            assets,
            snapshot,
        } => {
            tracing_subscriber::fmt()
                .with_env_filter(
                    tracing_subscriber::EnvFilter::try_from_default_env()
                        .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info")),
                )
                .init();
            let runtime =
                tokio::runtime::Runtime::new().map_err(|e| Failure::Io("runtime".into(), e))?;
            let config = gks_service::ServeConfig {
                bind,
                assets,
                snapshot,
            };
            runtime
                .block_on(gks_service::serve(config))
                .map_err(|e| Failure::Io(bind.to_string(), e))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Domain(e)) => {
            eprintln!("error[{}]: {e}", e.code());
            if matches!(e, Error::Syntax(_)) {
                eprintln!("\n{GRAMMAR}");
            }
            ExitCode::from(1)
        }
        Err(Failure::Io(what, e)) => {
            eprintln!("error[Io]: {what}: {e}");
            ExitCode::from(1)
        }
    }
}
