use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use pubkg::pipeline::{Pipeline, PipelineConfig, Stage, StageReport};
use pubkg::synth::{write_fixture, SynthParams};

#[derive(Parser)]
#[command(name = "pubkg", version, about = "Build a PubMed knowledge graph from citation XML and linked sources")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Pipeline configuration (TOML).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory; overrides `out_dir`.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads, 0 for one per core; overrides `jobs`.
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,
    /// Affiliation succession cutoff; overrides `cutoff_year`.
    #[arg(long, value_name = "Y")]
    cutoff_year: Option<i32>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse citation XML into the citation intermediate.
    Ingest(Common),
    /// Tag abstracts with the dictionary baseline or load external tagger output.
    Tag {
        #[command(flatten)]
        common: Common,
        /// Tagger output (JSON lines) to use instead of the baseline.
        #[arg(long, value_name = "PATH")]
        tagger_output: Option<PathBuf>,
    },
    /// Normalize mentions against the dictionaries.
    Normalize(Common),
    /// Merge the two author clusterings into unified AND_IDs.
    AndMerge(Common),
    /// Link authors to NIH PIs and ORCID records.
    Link(Common),
    /// Parse, geocode and inherit affiliations.
    Affil(Common),
    /// Write the seven output tables.
    Emit(Common),
    /// Build the author-entity graph and its projections.
    Graph(Common),
    /// Score disambiguation against the PI crosswalk.
    Eval(Common),
    /// Run every stage in order.
    All(Common),
    /// Write a synthetic fixture with its own pipeline.toml.
    Synth {
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
        #[arg(long, default_value_t = 100)]
        papers: usize,
        #[arg(long, default_value_t = 40)]
        researchers: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

fn load(common: &Common) -> Result<PipelineConfig> {
    let mut cfg = PipelineConfig::load(&common.config)?;
    if let Some(out) = &common.out {
        cfg.out_dir = out.clone();
    }
    if let Some(jobs) = common.jobs {
        cfg.jobs = jobs;
    }
    if let Some(y) = common.cutoff_year {
        cfg.cutoff_year = y;
    }
    Ok(cfg)
}

fn summarize(report: &StageReport) {
    let counts: Vec<String> = report.counts.iter().take(6).map(|(k, v)| format!("{k}={v}")).collect();
    eprintln!("{:<10} {:>6} ms  {}", report.stage.as_str(), report.duration_ms, counts.join(" "));
    for w in &report.warnings {
        eprintln!("  warning: {w}");
    }
}

fn run_stage(common: &Common, stage: Stage, tweak: impl FnOnce(&mut PipelineConfig)) -> Result<()> {
    let mut cfg = load(common)?;
    tweak(&mut cfg);
    let pipeline = Pipeline::new(cfg)?;
    summarize(&pipeline.run(stage)?);
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest(c) => run_stage(&c, Stage::Ingest, |_| ()),
        Command::Tag { common, tagger_output } => run_stage(&common, Stage::Tag, |cfg| {
            if tagger_output.is_some() {
                cfg.inputs.tagger_output = tagger_output;
            }
        }),
        Command::Normalize(c) => run_stage(&c, Stage::Normalize, |_| ()),
        Command::AndMerge(c) => run_stage(&c, Stage::AndMerge, |_| ()),
        Command::Link(c) => run_stage(&c, Stage::Link, |_| ()),
        Command::Affil(c) => run_stage(&c, Stage::Affil, |_| ()),
        Command::Emit(c) => run_stage(&c, Stage::Emit, |_| ()),
        Command::Graph(c) => run_stage(&c, Stage::Graph, |_| ()),
        Command::Eval(c) => run_stage(&c, Stage::Eval, |_| ()),
        Command::All(c) => {
            let pipeline = Pipeline::new(load(&c)?)?;
            for report in pipeline.run_all()? {
                summarize(&report);
            }
            Ok(())
        }
        Command::Synth {
            out,
            papers,
            researchers,
            seed,
        } => {
            let params = SynthParams {
                papers,
                researchers,
                seed,
                ..Default::default()
            };
            let s = write_fixture(&out, &params).with_context(|| format!("synth: writing {}", out.display()))?;
            eprintln!(
                "wrote {} papers, {} author instances to {}",
                s.papers,
                s.author_instances,
                out.display()
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
