use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use mrweb_core::iqa::MetricScores;
use mrweb_gen::PromptStrategy;

use crate::config::{Config, CONFIG_FILE};
use crate::ops;
use crate::server::{self, ServeOptions};
use crate::workspace::{atomic_write, Workspace};

#[derive(Debug, Parser)]
#[command(name = "mrweb", version, about = "Build, generate and score resource-aware webpage datasets")]
pub struct Cli {
    /// Workspace root
    #[arg(short, long, global = true, default_value = ".")]
    pub workspace: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Strip scripts, comments, hidden elements and non-essential head tags
    Simplify {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Point every link at a URL drawn from a pool file
    SynthLinks {
        input: PathBuf,
        /// One URL per line
        #[arg(long)]
        pool: PathBuf,
        /// Defaults to the workspace seed
        #[arg(long)]
        seed: Option<u64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Give every image a distinct URL from an image list file
    SynthImages {
        input: PathBuf,
        /// One image URL per line
        #[arg(long)]
        images: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Build a resource list from a renderer geometry dump
    Extract {
        geometry: PathBuf,
        /// Path prefixes classified as backend routes (defaults to the workspace setting)
        #[arg(long = "route-prefix")]
        route_prefixes: Vec<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Generate pages with the configured chat endpoint
    Generate {
        /// All pages when omitted
        #[arg(long)]
        page: Option<String>,
        #[arg(long)]
        strategy: String,
    },
    /// Score generated pages against their references
    Evaluate {
        #[arg(long)]
        page: String,
        /// Every generated strategy when omitted
        #[arg(long)]
        strategy: Option<String>,
    },
    /// One CSV row per stored report
    Summarize {
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Correlate metric scores with human ratings
    Iqa {
        #[arg(long)]
        ratings: PathBuf,
        /// Score file for one metric: a JSON object from pair id to value
        #[arg(long = "scores", value_name = "NAME=FILE", value_parser = parse_score_arg)]
        scores: Vec<(String, PathBuf)>,
        /// Also use the visual scores from the workspace reports
        #[arg(long)]
        from_reports: bool,
        /// Write the full report as JSON
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Serve the HTTP API
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
    },
}

fn parse_score_arg(arg: &str) -> Result<(String, PathBuf), String> {
    match arg.split_once('=') {
        Some((name, path)) if !name.is_empty() && !path.is_empty() => Ok((name.to_string(), PathBuf::from(path))),
        _ => Err(format!("expected NAME=FILE, got {arg:?}")),
    }
}

fn emit(output: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match output {
        Some(path) => atomic_write(path, text.as_bytes()).with_context(|| format!("writing {}", path.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// The workspace config if the workspace has one, for commands that work
/// on loose files.
fn loose_config(root: &Path) -> anyhow::Result<Config> {
    let path = root.join(CONFIG_FILE);
    Ok(if path.is_file() { Config::load(&path)? } else { Config::default() })
}

fn strategy(s: &str) -> anyhow::Result<PromptStrategy> {
    Ok(s.parse()?)
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Simplify { input, output } => emit(output.as_deref(), &ops::simplify(&read(&input)?)),
        Command::SynthLinks { input, pool, seed, output } => {
            let seed = seed.unwrap_or(loose_config(&cli.workspace)?.seed);
            let html = ops::synth_links(&read(&input)?, &ops::read_list(&pool)?, seed)?;
            emit(output.as_deref(), &html)
        }
        Command::SynthImages { input, images, seed, output } => {
            let seed = seed.unwrap_or(loose_config(&cli.workspace)?.seed);
            let (html, warnings) = ops::synth_images(&read(&input)?, &ops::read_list(&images)?, seed)?;
            for w in warnings {
                eprintln!("warning: {w}");
            }
            emit(output.as_deref(), &html)
        }
        Command::Extract {
            geometry,
            route_prefixes,
            output,
        } => {
            let prefixes = if route_prefixes.is_empty() {
                loose_config(&cli.workspace)?.route_prefixes
            } else {
                route_prefixes
            };
            emit(output.as_deref(), &ops::extract(&read(&geometry)?, &prefixes)?.to_json())
        }
        Command::Generate { page, strategy: s } => {
            let ws = Workspace::open(&cli.workspace)?;
            let s = strategy(&s)?;
            let pages = match page {
                Some(p) => {
                    ws.page_dir(&p)?;
                    vec![p]
                }
                None => ws.page_ids()?,
            };
            let chat = ops::chat_client(&ws, None)?;
            let results = ops::run_bounded(&pages, ws.config.max_in_flight, |p| ops::generate(&ws, p, s, &chat));
            let mut failed = 0;
            for (p, r) in pages.iter().zip(results) {
                match r {
                    Ok(()) => eprintln!("generated {p}/{s}"),
                    Err(e) => {
                        failed += 1;
                        eprintln!("error: {p}/{s}: {e}");
                    }
                }
            }
            if failed > 0 {
                bail!("{failed} of {} page(s) failed", pages.len());
            }
            Ok(())
        }
        Command::Evaluate { page, strategy: s } => {
            let ws = Workspace::open(&cli.workspace)?;
            let s = s.as_deref().map(strategy).transpose()?;
            for r in ops::evaluate_page(&ws, &page, s)? {
                let rer = r.rer.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"));
                println!(
                    "{} {} mae={:.4} psnr={:.2} ssim={:.4} nemd={:.4} rer={rer}",
                    r.page,
                    r.strategy.as_deref().unwrap_or(""),
                    r.visual.mae,
                    r.visual.psnr,
                    r.visual.ssim,
                    r.visual.nemd
                );
            }
            Ok(())
        }
        Command::Summarize { output } => {
            let ws = Workspace::open(&cli.workspace)?;
            emit(output.as_deref(), &ops::summarize(&ws)?)
        }
        Command::Iqa {
            ratings,
            scores,
            from_reports,
            json,
        } => {
            let ratings = mrweb_core::iqa::load_ratings(&read(&ratings)?).with_context(|| format!("reading {}", ratings.display()))?;
            let mut table = if from_reports {
                ops::scores_from_reports(&Workspace::open(&cli.workspace)?)?
            } else {
                MetricScores::new()
            };
            for (name, path) in scores {
                table.insert(name, ops::read_scores(&path)?);
            }
            if table.is_empty() {
                bail!("no metric scores given; pass --scores NAME=FILE or --from-reports");
            }
            let report = ops::iqa(&table, &ratings)?;
            if let Some(path) = json {
                let mut text = serde_json::to_string_pretty(&report)?;
                text.push('\n');
                emit(Some(&path), &text)?;
            }
            print!("{}", report.to_table());
            Ok(())
        }
        Command::Serve { port, host } => {
            let ws = Workspace::open(&cli.workspace)?;
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::bind((host.as_str(), port)).await?;
                eprintln!("serving {} on http://{}", ws.root().display(), listener.local_addr()?);
                server::serve(listener, ws, ServeOptions::default()).await?;
                anyhow::Ok(())
            })
        }
    }
}
