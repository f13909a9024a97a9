//! Command-line front end: read a summary causal graph, evaluate
//! identifiability-by-common-backdoor queries, cross-check against the
//! bounded oracle, generate random corpora and dump explanation profiles.
//!
//! Exit codes: 0 identifiable/success, 3 not identifiable, 1 usage or parse
//! errors (including oracle budget exhaustion), 2 internal invariant
//! violations or oracle disagreement.

use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use scg_ibc::corpus::{self, CorpusParams};
use scg_ibc::oracle::oracle_check;
use scg_ibc::{
    compute_accessibility, compute_accessibility_combined, compute_t_nc, decide, parse_scg,
    serialize_scg, CausalQuery, Error, Format, Scg, SeriesId, TemporalVertex,
};

#[derive(Parser)]
#[command(name = "scg-ibc", version, about = "Backdoor identifiability in summary causal graphs of time series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputMode {
    Json,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Edgelist,
    Json,
    Dot,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Edgelist => Format::EdgeList,
            FormatArg::Json => Format::Json,
            FormatArg::Dot => Format::Dot,
        }
    }
}

#[derive(Args)]
struct GraphArgs {
    /// Graph file; `-` reads stdin.
    #[arg(long, short = 'i', default_value = "-")]
    input: String,
    /// Graph text format.
    #[arg(long, short = 'f', value_enum, default_value = "edgelist")]
    format: FormatArg,
}

#[derive(Args)]
struct QueryArgs {
    /// Intervention `SERIES@TIME` (TIME <= 0); repeatable.
    #[arg(long = "do", value_name = "SERIES@TIME")]
    do_: Vec<String>,
    /// Effect `SERIES@TIME`; repeatable, at least one.
    #[arg(long, value_name = "SERIES@TIME", required = true)]
    effect: Vec<String>,
    /// Assume causal relations keep their direction through time.
    #[arg(long)]
    consistency: bool,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, short = 'o', value_enum, default_value = "json")]
    output: OutputMode,
}

#[derive(Subcommand)]
enum Command {
    /// Decide identifiability by common backdoor.
    Decide {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        query: QueryArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Print the do-free adjustment formula (identifiable queries only).
    Adjust {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        query: QueryArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Compare the decision against exhaustive bounded witness search.
    OracleCheck {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        query: QueryArgs,
        #[command(flatten)]
        out: OutputArgs,
        /// Window override `LO:HI` in effect-relative coordinates.
        #[arg(long)]
        window: Option<String>,
        /// Maximum arrow lag inside the window.
        #[arg(long)]
        max_lag: Option<i64>,
        /// Oracle work budget (default from SCG_IBC_BUDGET or 2^22).
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Generate a seeded random corpus of graphs and queries.
    Random {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        series: usize,
        #[arg(long, default_value_t = 0.3)]
        edge_prob: f64,
        #[arg(long, default_value_t = 0.3)]
        self_loop_prob: f64,
        #[arg(long, default_value_t = 3)]
        max_interventions: usize,
        #[arg(long, default_value_t = 2)]
        gamma_max: i64,
        #[arg(long, default_value_t = 10)]
        count: u64,
        /// Output directory for `scg_NNN.json` / `query_NNN.json` pairs.
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Dump the threshold and accessibility profiles behind a decision.
    Explain {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        query: QueryArgs,
        /// Dump `t_NC` thresholds per series.
        #[arg(long)]
        show_nc: bool,
        /// Dump accessibility ceilings for `SERIES@TIME` or `combined`.
        #[arg(long, value_name = "ANCHOR")]
        show_access: Vec<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Internal(_) => 2,
                _ => 1,
            };
            ExitCode::from(code)
        }
    }
}

fn read_graph(args: &GraphArgs) -> Result<Scg, Error> {
    let text = if args.input == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| Error::Parse {
                line: 0,
                reason: format!("reading stdin: {e}"),
            })?;
        buf
    } else {
        std::fs::read_to_string(&args.input).map_err(|e| Error::Parse {
            line: 0,
            reason: format!("reading {}: {e}", args.input),
        })?
    };
    parse_scg(&text, args.format.into())
}

fn parse_vertex(s: &str) -> Result<TemporalVertex, Error> {
    let (name, time) = s.rsplit_once('@').ok_or_else(|| Error::InvalidQuery(
        format!("expected SERIES@TIME, got {s:?}"),
    ))?;
    let time: i64 = time
        .parse()
        .map_err(|_| Error::InvalidQuery(format!("invalid time in {s:?}")))?;
    Ok(TemporalVertex::new(SeriesId::new(name)?, time))
}

fn build_query(args: &QueryArgs) -> Result<CausalQuery, Error> {
    let interventions = args
        .do_
        .iter()
        .map(|s| parse_vertex(s))
        .collect::<Result<Vec<_>, _>>()?;
    let effects = args
        .effect
        .iter()
        .map(|s| parse_vertex(s))
        .collect::<Result<Vec<_>, _>>()?;
    CausalQuery::new(interventions, effects)
}

fn default_budget() -> Option<u64> {
    std::env::var("SCG_IBC_BUDGET").ok().and_then(|s| s.parse().ok())
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Decide { graph, query, out } => {
            let g = read_graph(&graph)?;
            let q = build_query(&query)?;
            let verdict = decide(&g, &q, query.consistency)?;
            verdict.check_invariants().map_err(|_| {
                Error::Internal("verdict violates its structural invariant".into())
            })?;
            match out.output {
                OutputMode::Json => println!("{}", serde_json::to_string(&verdict).unwrap()),
                OutputMode::Text => {
                    if verdict.identifiable {
                        println!("identifiable");
                        if let Some(f) = &verdict.formula {
                            println!("formula: {f}");
                        }
                    } else {
                        let w = verdict.witness.as_ref().unwrap();
                        println!("not identifiable");
                        println!(
                            "witness: {} path {}",
                            match w.kind {
                                scg_ibc::WitnessKind::DirectedNoFork => "directed-no-fork",
                                scg_ibc::WitnessKind::Fork => "fork",
                            },
                            serde_json::to_string(&w.path).unwrap()
                        );
                    }
                }
            }
            Ok(ExitCode::from(if verdict.identifiable { 0 } else { 3 }))
        }
        Command::Adjust { graph, query, out } => {
            let g = read_graph(&graph)?;
            let q = build_query(&query)?;
            let verdict = decide(&g, &q, query.consistency)?;
            if !verdict.identifiable {
                match out.output {
                    OutputMode::Json => {
                        println!("{}", serde_json::to_string(&verdict).unwrap())
                    }
                    OutputMode::Text => println!("not identifiable"),
                }
                return Ok(ExitCode::from(3));
            }
            match out.output {
                OutputMode::Json => {
                    let doc = serde_json::json!({
                        "formula": verdict.formula,
                        "adjustment": verdict.adjustment,
                        "pruned": verdict.pruned,
                    });
                    println!("{doc}");
                }
                OutputMode::Text => println!("{}", verdict.formula.as_deref().unwrap_or("")),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::OracleCheck {
            graph,
            query,
            out,
            window,
            max_lag,
            budget,
        } => {
            let g = read_graph(&graph)?;
            let q = build_query(&query)?;
            let window = match window {
                Some(w) => {
                    let (lo, hi) = w.split_once(':').ok_or_else(|| {
                        Error::InvalidQuery(format!("expected LO:HI window, got {w:?}"))
                    })?;
                    Some((
                        lo.parse().map_err(|_| {
                            Error::InvalidQuery(format!("invalid window bound {lo:?}"))
                        })?,
                        hi.parse().map_err(|_| {
                            Error::InvalidQuery(format!("invalid window bound {hi:?}"))
                        })?,
                    ))
                }
                None => None,
            };
            let report = oracle_check(
                &g,
                &q,
                query.consistency,
                window,
                max_lag,
                budget.or_else(default_budget),
            )?;
            match out.output {
                OutputMode::Json => println!("{}", serde_json::to_string(&report).unwrap()),
                OutputMode::Text => println!(
                    "{} (decide={}, oracle witness={}, arrows={}, expansions={})",
                    if report.agree { "AGREE" } else { "DISAGREE" },
                    report.decide_identifiable,
                    report.oracle_witness_found,
                    report.arrow_universe,
                    report.expansions,
                ),
            }
            Ok(ExitCode::from(if report.agree { 0 } else { 2 }))
        }
        Command::Random {
            seed,
            series,
            edge_prob,
            self_loop_prob,
            max_interventions,
            gamma_max,
            count,
            out_dir,
            out,
        } => {
            let params = CorpusParams {
                series,
                edge_prob,
                self_loop_prob,
                max_interventions,
                gamma_max,
            };
            std::fs::create_dir_all(&out_dir).map_err(|e| Error::Parse {
                line: 0,
                reason: format!("creating {}: {e}", out_dir.display()),
            })?;
            let mut manifest = Vec::new();
            for i in 0..count {
                let (g, q) = corpus::instance(seed, i, &params);
                let g_path = out_dir.join(format!("scg_{i:03}.json"));
                let q_path = out_dir.join(format!("query_{i:03}.json"));
                std::fs::write(&g_path, serialize_scg(&g, Format::Json)).map_err(|e| {
                    Error::Parse {
                        line: 0,
                        reason: format!("writing {}: {e}", g_path.display()),
                    }
                })?;
                std::fs::write(&q_path, serde_json::to_string(&q).unwrap()).map_err(|e| {
                    Error::Parse {
                        line: 0,
                        reason: format!("writing {}: {e}", q_path.display()),
                    }
                })?;
                manifest.push(serde_json::json!({
                    "scg": g_path.file_name().unwrap().to_str(),
                    "query": q_path.file_name().unwrap().to_str(),
                }));
            }
            match out.output {
                OutputMode::Json => {
                    println!("{}", serde_json::json!({"seed": seed, "instances": manifest}))
                }
                OutputMode::Text => println!("wrote {count} instances to {}", out_dir.display()),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Explain {
            graph,
            query,
            show_nc,
            show_access,
        } => {
            let g = read_graph(&graph)?;
            let q = build_query(&query)?;
            if q.effects.len() != 1 || q.effects[0].time != 0 {
                return Err(Error::InvalidQuery(
                    "explain works on single-effect queries at time 0".into(),
                ));
            }
            let (clean, _) = scg_ibc::preprocess(&g, &q)?;
            let profile = compute_t_nc(&g, &clean.interventions)?;
            let mut doc = serde_json::Map::new();
            if show_nc {
                let thresholds: serde_json::Map<String, serde_json::Value> = profile
                    .thresholds()
                    .map(|(s, t)| (s.to_string(), serde_json::to_value(t).unwrap()))
                    .collect();
                doc.insert("t_nc".into(), thresholds.into());
            }
            for anchor in &show_access {
                let (label, prof) = if anchor == "combined" {
                    (
                        "combined".to_string(),
                        compute_accessibility_combined(&g, &profile)?,
                    )
                } else {
                    let a = parse_vertex(anchor)?;
                    (
                        a.to_string(),
                        compute_accessibility(&g, &profile, &a, None)?,
                    )
                };
                let ceilings: serde_json::Map<String, serde_json::Value> = prof
                    .ceilings()
                    .map(|(s, t)| (s.to_string(), serde_json::to_value(t).unwrap()))
                    .collect();
                doc.insert(format!("access {label}"), ceilings.into());
            }
            println!("{}", serde_json::Value::Object(doc));
            Ok(ExitCode::SUCCESS)
        }
    }
}
