//! `rtime`: check, close, query, adapt and export recipe temporal networks.
//!
//! Files are chosen by extension: `.rcp` for the recipe DSL (or a knowledge
//! file as the second argument of `adapt`), `.tml` for TimeML markup.
//!
//! Exit codes: 0 consistent / success, 1 inconsistent, 2 parse or usage
//! error, 3 scale bound exceeded.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use recipe_temporal::adaptation::{
    adapt_text_edits, edits_to_text, inject, remove_entities, revise, AdaptError, DomainKnowledge,
};
use recipe_temporal::annotation::{doc_to_hybrid, parse_knowledge, parse_recipe_dsl, parse_timeml, RelTypeMap};
use recipe_temporal::metric::{end_id, start_id, HybridNetwork};
use recipe_temporal::recipe::{encode_recipe, Recipe};
use recipe_temporal::workflow::{emit_dot, recipe_workflow};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INCONSISTENT: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_SCALE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "rtime", version, about = "Temporal reasoning over recipe texts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse, encode and decide consistency.
    Check { file: PathBuf },
    /// Print the closed network of every scenario.
    Close { file: PathBuf },
    /// Print the closed relation between two intervals and the window from
    /// the end of the first to the start of the second.
    Query { file: PathBuf, a: String, b: String },
    /// Revise a recipe with domain knowledge and print the text edits.
    Adapt { recipe: PathBuf, knowledge: PathBuf },
    /// Print the workflow graph in Graphviz form.
    Workflow { file: PathBuf },
    /// Parse TimeML markup, print its network and consistency.
    Timeml { file: PathBuf },
}

/// A failure with its exit code; the message goes to the error stream.
struct Failure(i32, String);

impl Failure {
    fn parse(e: impl std::fmt::Display) -> Self {
        Failure(EXIT_PARSE, e.to_string())
    }
}

type Outcome = Result<i32, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure(EXIT_PARSE, format!("{}: {e}", path.display())))
}

enum Kind {
    Recipe,
    TimeMl,
}

fn kind(path: &Path) -> Result<Kind, Failure> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("rcp") => Ok(Kind::Recipe),
        Some("tml") => Ok(Kind::TimeMl),
        _ => Err(Failure(
            EXIT_PARSE,
            format!("{}: expected a .rcp or .tml file", path.display()),
        )),
    }
}

fn load_recipe(path: &Path) -> Result<Recipe, Failure> {
    parse_recipe_dsl(&read(path)?).map_err(|e| Failure::parse(format!("{}: {e}", path.display())))
}

/// Labelled networks for a file: one per scenario for recipes, one for
/// TimeML.
fn scenarios(path: &Path) -> Result<Vec<(String, HybridNetwork)>, Failure> {
    match kind(path)? {
        Kind::Recipe => Ok(encode_recipe(&load_recipe(path)?)
            .map_err(Failure::parse)?
            .into_iter()
            .map(|s| (s.label, s.network))
            .collect()),
        Kind::TimeMl => {
            let doc = parse_timeml(&read(path)?).map_err(|e| Failure::parse(format!("{}: {e}", path.display())))?;
            let (net, _) = doc_to_hybrid(&doc, &RelTypeMap::default()).map_err(Failure::parse)?;
            Ok(vec![("base".to_string(), net)])
        }
    }
}

fn check(path: &Path, out: &mut dyn Write) -> Outcome {
    let mut code = EXIT_OK;
    for (label, net) in scenarios(path)? {
        let ok = net.is_consistent();
        let _ = writeln!(out, "{label}: {}", if ok { "consistent" } else { "inconsistent" });
        if !ok {
            code = EXIT_INCONSISTENT;
        }
    }
    Ok(code)
}

fn close(path: &Path, out: &mut dyn Write) -> Outcome {
    let mut code = EXIT_OK;
    for (label, net) in scenarios(path)? {
        let _ = writeln!(out, "# scenario {label}");
        match net.close().closed() {
            Some(c) => {
                let _ = write!(out, "{}", c.to_text());
            }
            None => {
                let _ = writeln!(out, "inconsistent");
                code = EXIT_INCONSISTENT;
            }
        }
    }
    Ok(code)
}

fn query(path: &Path, a: &str, b: &str, out: &mut dyn Write) -> Outcome {
    let all = scenarios(path)?;
    let labelled = all.len() > 1;
    let mut code = EXIT_OK;
    for (label, net) in all {
        if labelled {
            let _ = writeln!(out, "[{label}]");
        }
        let missing: Vec<&str> = [a, b].into_iter().filter(|id| net.qcn().index_of(id).is_none()).collect();
        if !missing.is_empty() {
            // an id absent from one scenario may belong to another branch
            if !labelled {
                return Err(Failure::parse(format!("unknown interval `{}`", missing[0])));
            }
            for id in missing {
                let _ = writeln!(out, "absent: {id}");
            }
            continue;
        }
        match net.close().closed() {
            Some(c) => {
                let rel = c.relation(a, b).map_err(Failure::parse)?;
                let (from, to) = (end_id(a), start_id(b));
                let w = c.window(&from, &to).map_err(Failure::parse)?;
                let _ = writeln!(out, "{rel}");
                let _ = writeln!(out, "{to} - {from} in {w}");
            }
            None => {
                let _ = writeln!(out, "inconsistent");
                code = EXIT_INCONSISTENT;
            }
        }
    }
    Ok(code)
}

fn adapt(recipe_path: &Path, knowledge_path: &Path, out: &mut dyn Write) -> Outcome {
    let recipe = load_recipe(recipe_path)?;
    let doc = parse_knowledge(&read(knowledge_path)?)
        .map_err(|e| Failure::parse(format!("{}: {e}", knowledge_path.display())))?;
    let base = encode_recipe(&recipe)
        .map_err(Failure::parse)?
        .into_iter()
        .next()
        .expect("at least the base scenario")
        .network;
    let adapt_err = |e: AdaptError| match e {
        AdaptError::HardInconsistent => Failure(EXIT_INCONSISTENT, e.to_string()),
        AdaptError::ScaleBound(_) => Failure(EXIT_SCALE, e.to_string()),
        other => Failure::parse(other),
    };
    let knowledge = DomainKnowledge::from_doc(&doc).map_err(adapt_err)?;
    let removes: Vec<&str> = knowledge.removes.iter().map(String::as_str).collect();
    let pruned = remove_entities(&base, &removes).map_err(adapt_err)?;
    let result = revise(&inject(&pruned, &knowledge).map_err(adapt_err)?).map_err(adapt_err)?;
    let edits = adapt_text_edits(&result, &recipe);
    let _ = write!(out, "{}", result.to_text());
    let _ = writeln!(out, "edits {}", edits.len());
    let _ = write!(out, "{}", edits_to_text(&edits));
    Ok(EXIT_OK)
}

fn workflow(path: &Path, out: &mut dyn Write) -> Outcome {
    let recipe = load_recipe(path)?;
    match recipe_workflow(&recipe) {
        Ok(w) => {
            let _ = write!(out, "{}", emit_dot(&w));
            Ok(EXIT_OK)
        }
        Err(recipe_temporal::workflow::WorkflowError::Inconsistent(l)) => {
            Err(Failure(EXIT_INCONSISTENT, format!("scenario `{l}` is inconsistent")))
        }
        Err(e) => Err(Failure::parse(e)),
    }
}

fn timeml(path: &Path, out: &mut dyn Write) -> Outcome {
    let doc = parse_timeml(&read(path)?).map_err(|e| Failure::parse(format!("{}: {e}", path.display())))?;
    let (net, recurrences) = doc_to_hybrid(&doc, &RelTypeMap::default()).map_err(Failure::parse)?;
    let _ = write!(out, "{}", net.to_text());
    for r in &recurrences {
        let _ = writeln!(out, "# {} recurs with {} ({})", r.interval, r.set, r.rel_type);
    }
    if net.is_consistent() {
        let _ = writeln!(out, "consistent");
        Ok(EXIT_OK)
    } else {
        let _ = writeln!(out, "inconsistent");
        Ok(EXIT_INCONSISTENT)
    }
}

/// Runs one command line (including the program name) and returns the exit
/// code.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return code;
        }
    };
    let result = match &cli.command {
        Command::Check { file } => check(file, out),
        Command::Close { file } => close(file, out),
        Command::Query { file, a, b } => query(file, a, b, out),
        Command::Adapt { recipe, knowledge } => adapt(recipe, knowledge, out),
        Command::Workflow { file } => workflow(file, out),
        Command::Timeml { file } => timeml(file, out),
    };
    match result {
        Ok(code) => code,
        Err(Failure(code, message)) => {
            let _ = writeln!(err, "rtime: {message}");
            code
        }
    }
}
