use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sore::config::PipelineConfig;
use sore::error::{Error, Result};
use sore::eval::{evaluate, external_predict, load_gold_dir, rbs_predict, report_scores, RBS_REFERENCE};
use sore::formats::{load_lexicon, load_rules, write_text};
use sore::pipeline::{Pipeline, NO_TRADEOFFS, REPORT};
use sore::records::{load_external_predictions, to_jsonl};
use sore::report::report_stats;
use sore_core::tradeoff::RuleExtractor;
use sore_core::MAX_SPAN_WIDTH;

#[derive(Parser)]
#[command(
    name = "sore",
    version,
    about = "Semi-open relation extraction over parsed scientific text"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Pipeline configuration file.
    #[arg(long, short)]
    config: PathBuf,
    /// Override a configuration key, e.g. `--set k=20`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Read the corpus and keep the configured sections.
    Ingest {
        #[command(flatten)]
        common: Common,
        /// Comma-separated sections to keep.
        #[arg(long)]
        sections: Option<String>,
    },
    /// Extract trade-off structures.
    Tradeoffs {
        #[command(flatten)]
        common: Common,
        /// rbs, external or both.
        #[arg(long)]
        source: Option<String>,
    },
    /// Build the vocabulary and IDF table and embed trade-off arguments.
    Embed {
        #[command(flatten)]
        common: Common,
    },
    /// Cluster trade-off arguments and flag noisy clusters.
    Cluster {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Produce Open IE tuples for documents with trade-off relations.
    Oie {
        #[command(flatten)]
        common: Common,
        /// builtin, external or both.
        #[arg(long)]
        source: Option<String>,
    },
    /// Keep tuples sharing a cluster with a trade-off argument.
    Filter {
        #[command(flatten)]
        common: Common,
        /// Also require this cosine similarity.
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Score trade-off extraction against gold annotations.
    Eval {
        /// Configuration file; optional, supplies lexicon, rules and gold_dir.
        #[arg(long, short)]
        config: Option<PathBuf>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Directory of gold `.ann` files with `.conllu` parses.
        #[arg(long)]
        gold: Option<PathBuf>,
        /// Score these predictions instead of the rule-based extractor.
        #[arg(long)]
        predictions: Option<PathBuf>,
        /// Write per-task scores as JSON lines.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Retention counts before and after filtering.
    Stats {
        #[command(flatten)]
        common: Common,
    },
    /// Per-document reports.
    Report {
        #[command(flatten)]
        common: Common,
    },
    /// Every stage in order.
    Run {
        #[command(flatten)]
        common: Common,
    },
}

fn load_config(path: &Path, sets: &[String]) -> Result<PipelineConfig> {
    let mut config = PipelineConfig::load(path)?;
    let cwd = std::env::current_dir().unwrap_or_default();
    for s in sets {
        config.set(s, &cwd)?;
    }
    Ok(config)
}

fn pipeline(common: &Common, extra: &[(&str, Option<String>)]) -> Result<Pipeline> {
    let mut sets = common.set.clone();
    sets.extend(extra.iter().filter_map(|(k, v)| v.as_ref().map(|v| format!("{k}={v}"))));
    let config = load_config(&common.config, &sets)?;
    config.validate()?;
    Ok(Pipeline::new(config))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest { common, sections } => {
            let p = pipeline(&common, &[("sections", sections)])?;
            let docs = p.ingest().map_err(|e| e.in_stage("ingest"))?;
            let sentences: usize = docs.iter().map(|d| d.sentences().len()).sum();
            println!("ingested {} documents, {} sentences", docs.len(), sentences);
        }
        Command::Tradeoffs { common, source } => {
            let p = pipeline(&common, &[("tradeoff_source", source)])?;
            let (found, tally) = p.tradeoffs().map_err(|e| e.in_stage("tradeoffs"))?;
            let n: usize = found.values().map(Vec::len).sum();
            println!("{} structures in {} documents", n, found.len());
            if let Some(t) = tally {
                println!("external predictions: {} loaded, {} skipped", t.loaded, t.skipped);
                for r in &t.reasons {
                    eprintln!("  skipped {r}");
                }
            }
        }
        Command::Embed { common } => {
            let p = pipeline(&common, &[])?;
            let args = p.embed().map_err(|e| e.in_stage("embed"))?;
            let embeddable = args.iter().filter(|a| a.embeddable).count();
            println!("{} trade-off arguments, {} embeddable", args.len(), embeddable);
        }
        Command::Cluster { common, k, seed } => {
            let p = pipeline(
                &common,
                &[("k", k.map(|v| v.to_string())), ("seed", seed.map(|v| v.to_string()))],
            )?;
            if p.cluster().map_err(|e| e.in_stage("cluster"))? {
                println!("clusters written to {}", p.out(sore::pipeline::MODEL).display());
            } else {
                println!("{NO_TRADEOFFS}");
            }
        }
        Command::Oie { common, source } => {
            let p = pipeline(&common, &[("oie_source", source)])?;
            let (tuples, tally) = p.oie().map_err(|e| e.in_stage("oie"))?;
            println!("{} tuples", tuples.len());
            if let Some(t) = tally {
                println!("external tuples: {} loaded, {} skipped", t.loaded, t.skipped);
                for r in &t.reasons {
                    eprintln!("  skipped {r}");
                }
            }
        }
        Command::Filter { common, threshold } => {
            let p = pipeline(&common, &[("cosine_threshold", threshold.map(|v| v.to_string()))])?;
            let ds = p.filter().map_err(|e| e.in_stage("filter"))?;
            let kept = ds.iter().filter(|d| d.retained()).count();
            println!("retained {kept} of {} tuples", ds.len());
        }
        Command::Stats { common } => {
            let p = pipeline(&common, &[])?;
            let stats = p.stats().map_err(|e| e.in_stage("stats"))?;
            print!("{}", report_stats(&stats));
        }
        Command::Report { common } => {
            let p = pipeline(&common, &[])?;
            let docs = p.report().map_err(|e| e.in_stage("report"))?;
            println!("reports written for {} documents", docs.len());
        }
        Command::Run { common } => {
            let p = pipeline(&common, &[])?;
            let s = p.run()?;
            println!(
                "{} documents, {} sentences, {} structures ({} documents with trade-offs)",
                s.documents, s.sentences, s.structures, s.tradeoff_documents
            );
            println!("{} trade-off arguments, {} tuples", s.arguments, s.tuples);
            for n in &s.notices {
                println!("{n}");
            }
            print!("{}", report_stats(&s.stats));
            println!("summary in {}", p.out(REPORT).display());
        }
        Command::Eval {
            config,
            set,
            gold,
            predictions,
            output,
        } => {
            let config = config.map(|c| load_config(&c, &set)).transpose()?;
            let gold = gold
                .or_else(|| config.as_ref().and_then(|c| c.gold_dir.clone()))
                .ok_or_else(|| Error::Config("no gold directory; pass --gold or set gold_dir".into()))?;
            let (gold, tally) = load_gold_dir(&gold).map_err(|e| e.in_stage("eval"))?;
            if tally.skipped > 0 {
                eprintln!("skipped {} gold sentences", tally.skipped);
                for r in &tally.reasons {
                    eprintln!("  {r}");
                }
            }
            let width = config.as_ref().map_or(MAX_SPAN_WIDTH, |c| c.max_span_width);
            let (scores, reference) = match predictions {
                Some(path) => {
                    let (preds, _) = load_external_predictions(&path, width)?;
                    (evaluate(&gold, |g| external_predict(&preds, g)), None)
                }
                None => {
                    let ex = RuleExtractor::new(
                        load_lexicon(config.as_ref().and_then(|c| c.lexicon.as_deref()))?,
                        load_rules(config.as_ref().and_then(|c| c.rules.as_deref()))?,
                        width,
                    );
                    (evaluate(&gold, |g| rbs_predict(&ex, g)), Some(&RBS_REFERENCE[..]))
                }
            };
            print!("{}", report_scores(&scores, reference));
            if let Some(out) = &output {
                write_text(out, &to_jsonl(&scores.records()))?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
