//! `spr`: command-line front end for regular series-parallel graph grammars.
//!
//! Exit status: 0 when the property holds or the query is true, 1 when it
//! fails (a witness is printed when one exists), 2 on input errors.

use std::io::Read;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde_json::{json, Map, Value};
use sprec::decision::{
    bound_cardinality, filter_grammar, inclusion, intersection_empty, is_empty, smallest_member, Decision, FilterMode,
    Stats,
};
use sprec::grammar::{normalize, parse_grammar, to_alternative, validate_regular, Grammar};
use sprec::oracle::{gen_worstcase, language_upto, WORSTCASE_START};
use sprec::recognizer::{accepts, build_ctx, eval_graph, reachable_profiles, Profile, RecognizerCtx};
use sprec::spgraph::{canonicalize, edge_count, parse_term_in, SPGraph};

#[derive(Parser)]
#[command(name = "spr", version, about = "Decide properties of regular series-parallel graph grammars")]
struct Cli {
    /// Print results as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for randomized commands; no current command draws random numbers.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Maximum number of profiles or profile tuples a closure may explore.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    cap: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that a grammar is regular.
    Check { grammar: String },
    /// Print the normal form of a regular grammar.
    Normalize {
        grammar: String,
        /// Also replace `p -> a` rules by the alternative form.
        #[arg(long)]
        alternative: bool,
    },
    /// Decide whether a graph belongs to the language of a regular grammar.
    Member {
        #[arg(short, long)]
        grammar: String,
        /// The graph as a term, e.g. "(a || b) . c".
        #[arg(short, long)]
        term: String,
    },
    /// Decide whether the language of a grammar is empty.
    Empty { grammar: String },
    /// Decide whether the intersection of regular languages is empty.
    Intersect {
        #[arg(required = true, num_args = 1..)]
        grammars: Vec<String>,
    },
    /// Decide whether the language of `-l` is included in that of the regular `-r`.
    Include {
        #[arg(short, long)]
        left: String,
        #[arg(short, long)]
        right: String,
    },
    /// Print a grammar for L(left) ∩ L(right), or L(left) \ L(right) with --reject.
    Filter {
        #[arg(short, long)]
        left: String,
        #[arg(short, long)]
        right: String,
        #[arg(long)]
        reject: bool,
    },
    /// List the graphs of a language with at most `n` edges.
    Enumerate {
        #[arg(short, long)]
        grammar: String,
        #[arg(short, long)]
        n: usize,
    },
    /// Report the reachable profiles of the recognizer next to its cardinality bound.
    Stats { grammar: String },
    /// Print the worst-case grammar of parameter `k`.
    GenWorstcase {
        #[arg(short, long)]
        k: usize,
        /// Name of the start nonterminal.
        #[arg(long, default_value = WORSTCASE_START)]
        start: String,
    },
}

/// Text and JSON forms of a result, and whether it holds.
struct Report {
    holds: bool,
    text: String,
    json: Value,
}

fn read_source(path: &str) -> Result<String> {
    if path == "-" {
        let mut text = String::new();
        std::io::stdin().read_to_string(&mut text).context("reading standard input")?;
        Ok(text)
    } else {
        std::fs::read_to_string(path).with_context(|| format!("reading {path}"))
    }
}

fn load(path: &str) -> Result<Grammar> {
    let text = read_source(path)?;
    parse_grammar(&text).with_context(|| format!("parsing {path}"))
}

fn stats_json(s: &Stats) -> Value {
    json!({ "profiles_explored": s.profiles_explored, "iterations": s.iterations, "wall_ms": s.wall_ms as u64 })
}

fn decision_report(d: &Decision) -> Report {
    let text = match &d.witness {
        _ if d.holds => "holds".to_string(),
        Some(w) => format!("fails: witness {w}"),
        None => "fails".to_string(),
    };
    let witness = d.witness.as_ref().map(|w| Value::String(w.to_string())).unwrap_or(Value::Null);
    Report { holds: d.holds, text, json: json!({ "holds": d.holds, "witness": witness, "stats": stats_json(&d.stats) }) }
}

fn profile_json(x: &Profile, ctx: &RecognizerCtx) -> Value {
    match x {
        Profile::S(y) => Value::Array(
            ctx.pairs(y).iter().map(|(s, q)| json!([s.to_string(), q.to_string()])).collect(),
        ),
        Profile::P(y) => {
            let fields: Map<String, Value> = ctx
                .p_names()
                .iter()
                .zip(y.terms())
                .map(|(p, t)| (p.to_string(), Value::String(ctx.render_term(t))))
                .collect();
            Value::Object(fields)
        }
    }
}

fn grammar_report(g: &Grammar) -> Report {
    let text = g.to_string();
    Report { holds: true, json: json!({ "grammar": text }), text: text.trim_end().to_string() }
}

fn run(cli: &Cli) -> Result<Report> {
    Ok(match &cli.command {
        Command::Check { grammar } => {
            let report = validate_regular(&load(grammar)?);
            let holds = report.is_regular();
            let text = if holds { "regular".to_string() } else { format!("not regular\n{report}") };
            Report { holds, json: json!({ "holds": holds, "report": report.to_string() }), text }
        }
        Command::Normalize { grammar, alternative } => {
            let mut g = normalize(&load(grammar)?)?;
            if *alternative {
                g = to_alternative(&g)?;
            }
            grammar_report(&g)
        }
        Command::Member { grammar, term } => {
            let g = load(grammar)?;
            let graph = canonicalize(&parse_term_in(term, g.alphabet()).context("parsing the term")?);
            let ctx = build_ctx(&g)?;
            let x = eval_graph(&graph, &ctx)?;
            let holds = accepts(&x, &ctx);
            Report {
                holds,
                text: holds.to_string(),
                json: json!({ "holds": holds, "profile": profile_json(&x, &ctx) }),
            }
        }
        Command::Empty { grammar } => {
            let start = std::time::Instant::now();
            let g = load(grammar)?;
            let holds = is_empty(&g);
            let witness = if holds { None } else { smallest_member(&g) };
            let stats = Stats { wall_ms: start.elapsed().as_millis(), ..Stats::default() };
            decision_report(&Decision { holds, witness, stats })
        }
        Command::Intersect { grammars } => {
            let gs = grammars.iter().map(|p| load(p)).collect::<Result<Vec<_>>>()?;
            decision_report(&intersection_empty(&gs, cli.cap)?)
        }
        Command::Include { left, right } => decision_report(&inclusion(&load(left)?, &load(right)?)?),
        Command::Filter { left, right, reject } => {
            let mode = if *reject { FilterMode::Reject } else { FilterMode::Accept };
            grammar_report(&filter_grammar(&load(left)?, &load(right)?, mode)?)
        }
        Command::Enumerate { grammar, n } => {
            let mut graphs: Vec<SPGraph> = language_upto(&load(grammar)?, *n).into_iter().collect();
            graphs.sort_by(|a, b| (edge_count(a), a).cmp(&(edge_count(b), b)));
            let shown: Vec<String> = graphs.iter().map(SPGraph::to_string).collect();
            Report { holds: true, text: shown.join("\n"), json: json!({ "graphs": shown }) }
        }
        Command::Stats { grammar } => {
            let g = load(grammar)?;
            let closure = reachable_profiles(&build_ctx(&g)?, cli.cap);
            let bound = bound_cardinality(&g)?;
            let text = format!(
                "profiles: {}\np_profiles: {}\ns_profiles: {}\nsaturated: {}\nbound: {}",
                closure.profiles.len(),
                closure.p_count(),
                closure.s_count(),
                closure.saturated,
                bound
            );
            Report {
                holds: true,
                text,
                json: json!({
                    "profiles": closure.profiles.len(),
                    "p_profiles": closure.p_count(),
                    "s_profiles": closure.s_count(),
                    "saturated": closure.saturated,
                    "bound": bound.to_string(),
                }),
            }
        }
        Command::GenWorstcase { k, start } => {
            if *k < 2 {
                bail!("k must be at least 2");
            }
            grammar_report(&gen_worstcase(*k, start)?)
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            if cli.json {
                println!("{}", report.json);
            } else {
                println!("{}", report.text);
            }
            ExitCode::from(if report.holds { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
