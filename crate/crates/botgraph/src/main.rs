use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use botgraph::config::{load_profiles, ConfigError, PipelineConfig};
use botgraph::crawl::{crawl, CrawlError, CrawlOptions, HttpFetcher};
use botgraph::dataset::{emit_dataset, read_manifest, DatasetError};
use botgraph::eval::{read_predictions, summary, truth_from_manifest, write_report, EvalIoError};
use botgraph::logs::{parse_log, write_csv, write_jsonl, LogError, LogFormat};
use botgraph::pipeline::{render_requests, subgraph_json, PipelineError};
use botgraph::sitemap_file::{load_from_file, save_to_file, to_writer, SitemapFileError};
use botgraph_core::{evaluate, generate, run_layout, sessionize, Request, Sitemap};
use clap::{Parser, Subcommand, ValueEnum};

/// Trace-image pipeline for behavior-based bot detection.
#[derive(Parser)]
#[command(name = "botgraph", version)]
struct Cli {
    /// TOML config file; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Seed for every random choice (layout start, synthetic traffic).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Site map construction.
    Sitemap {
        #[command(subcommand)]
        action: SitemapAction,
    },
    /// Lay out a site map in the unit square.
    Layout {
        /// Site map JSON.
        #[arg(long)]
        sitemap: PathBuf,
        /// Output site map with coordinates (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Iteration cap for the force simulation.
        #[arg(long)]
        max_iterations: Option<u32>,
    },
    /// Render one trace image per session and write a labeled dataset.
    Render {
        /// Site map JSON with coordinates.
        #[arg(long)]
        sitemap: PathBuf,
        /// Access log.
        #[arg(long)]
        logs: PathBuf,
        /// Output directory for manifest.csv and images/.
        #[arg(long)]
        out: PathBuf,
        /// Sessions with at most this many distinct nodes are skipped.
        #[arg(long)]
        min_spots: Option<usize>,
        /// Worker threads.
        #[arg(long)]
        jobs: Option<usize>,
        /// Log format (default: from the file extension).
        #[arg(long, value_enum)]
        format: Option<LogFormat>,
        /// Image side length in pixels.
        #[arg(long)]
        image_size: Option<u32>,
        /// Edge stroke width in pixels; 0 draws no edges.
        #[arg(long)]
        line_width: Option<u32>,
        /// Also write each rendered session's subgraph as JSON lines.
        #[arg(long, value_name = "FILE")]
        subgraphs: Option<PathBuf>,
    },
    /// Generate labeled synthetic traffic over a site map.
    Synth {
        /// Site map JSON.
        #[arg(long)]
        sitemap: PathBuf,
        /// TOML file of [[profile]] entries.
        #[arg(long)]
        profiles: PathBuf,
        /// Output log file.
        #[arg(long)]
        out: PathBuf,
        /// Output format (default: from the file extension).
        #[arg(long, value_enum)]
        format: Option<LogFormat>,
    },
    /// Score predictions against a labeled manifest.
    Evaluate {
        /// Manifest with ground-truth labels.
        #[arg(long)]
        truth: PathBuf,
        /// Predictions CSV with session_id,label,score.
        #[arg(long)]
        pred: PathBuf,
        /// Report destination.
        #[arg(long, default_value = "report.json")]
        out: PathBuf,
        /// Access log of the truth sessions, used for the bot share of requests.
        #[arg(long)]
        logs: Option<PathBuf>,
        /// Format of --logs (default: from the file extension).
        #[arg(long, value_enum)]
        format: Option<LogFormat>,
    },
}

#[derive(Subcommand)]
enum SitemapAction {
    /// Build a site map and write it as JSON without coordinates.
    Build {
        #[arg(long, value_enum)]
        mode: Mode,
        /// Access log, for --mode sniff.
        #[arg(long, required_if_eq("mode", "sniff"))]
        logs: Option<PathBuf>,
        /// Log format (default: from the file extension).
        #[arg(long, value_enum)]
        format: Option<LogFormat>,
        /// Site map JSON listing nodes and edges, for --mode file.
        #[arg(long, required_if_eq("mode", "file"))]
        input: Option<PathBuf>,
        /// Home page URL, for --mode crawl.
        #[arg(long, required_if_eq("mode", "crawl"))]
        start: Option<String>,
        /// Crawl budget in distinct URL patterns.
        #[arg(long)]
        max_patterns: Option<usize>,
        /// Per-request timeout in seconds.
        #[arg(long)]
        timeout: Option<f64>,
        /// User-Agent header sent by the crawler.
        #[arg(long)]
        user_agent: Option<String>,
        /// Crawl paths that robots.txt disallows.
        #[arg(long)]
        ignore_robots: bool,
        /// Output file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Sniff,
    File,
    Crawl,
}

/// Failure classes, one per nonzero exit code.
enum Failure {
    Usage(String),
    Data(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Io(m) => m,
        }
    }
}

fn data(e: impl std::fmt::Display) -> Failure {
    Failure::Data(e.to_string())
}

fn io_at(path: &Path) -> impl Fn(io::Error) -> Failure + '_ {
    move |e| Failure::Io(format!("{}: {e}", path.display()))
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Io { .. } => Failure::Io(e.to_string()),
            ConfigError::Invalid { .. } => Failure::Usage(e.to_string()),
        }
    }
}

impl From<SitemapFileError> for Failure {
    fn from(e: SitemapFileError) -> Self {
        match e {
            SitemapFileError::Io(_) => Failure::Io(e.to_string()),
            _ => data(e),
        }
    }
}

impl From<DatasetError> for Failure {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::Io { .. } => Failure::Io(e.to_string()),
            _ => data(e),
        }
    }
}

impl From<EvalIoError> for Failure {
    fn from(e: EvalIoError) -> Self {
        match e {
            EvalIoError::Io { .. } => Failure::Io(e.to_string()),
            EvalIoError::Format { .. } => data(e),
        }
    }
}

impl From<CrawlError> for Failure {
    fn from(e: CrawlError) -> Self {
        match e {
            CrawlError::Start { .. } => Failure::Io(e.to_string()),
            CrawlError::StartUrl(_) | CrawlError::Budget => Failure::Usage(e.to_string()),
        }
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        data(e)
    }
}

fn with_path(path: &Path, e: impl std::fmt::Display) -> String {
    format!("{}: {e}", path.display())
}

fn sitemap_at(path: &Path) -> Result<Sitemap, Failure> {
    load_from_file(path).map_err(|e| match Failure::from(e) {
        Failure::Io(m) => Failure::Io(with_path(path, m)),
        Failure::Data(m) => Failure::Data(with_path(path, m)),
        other => other,
    })
}

fn read_logs(path: &Path, format: Option<LogFormat>) -> Result<Vec<Request>, Failure> {
    let file = File::open(path).map_err(io_at(path))?;
    let format = format.unwrap_or_else(|| LogFormat::from_path(path));
    let parsed = parse_log(BufReader::new(file), format).map_err(|e| match e {
        LogError::Input(_) => Failure::Io(with_path(path, e)),
        _ => Failure::Data(with_path(path, e)),
    })?;
    if parsed.malformed > 0 {
        eprintln!(
            "botgraph: warning: {}: skipped {} malformed line(s), first at line {}",
            path.display(),
            parsed.malformed,
            parsed.first_malformed_line.unwrap_or(0)
        );
    }
    Ok(parsed.requests)
}

fn write_sitemap(out: Option<&Path>, sitemap: &Sitemap) -> Result<(), Failure> {
    match out {
        Some(path) => save_to_file(path, sitemap).map_err(|e| Failure::Io(with_path(path, e))),
        None => to_writer(io::stdout().lock(), sitemap).map_err(|e| Failure::Io(e.to_string())),
    }
}

fn pct(v: f64) -> String {
    format!("{:.1}%", v * 100.0)
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut cfg = match &cli.config {
        Some(path) => PipelineConfig::from_file(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.layout.seed = cfg.seed;

    match cli.command {
        Command::Sitemap { action: SitemapAction::Build { mode, logs, format, input, start, max_patterns, timeout, user_agent, ignore_robots, out } } => {
            let sitemap = match mode {
                Mode::Sniff => {
                    let path = logs.expect("clap enforces --logs");
                    let sessions = sessionize(read_logs(&path, format)?).map_err(data)?;
                    Sitemap::build_from_sessions(&sessions)
                }
                Mode::File => sitemap_at(&input.expect("clap enforces --input"))?.without_coordinates(),
                Mode::Crawl => {
                    let mut c = cfg.crawl.clone();
                    if let Some(t) = timeout {
                        c.timeout = Duration::try_from_secs_f64(t).map_err(|e| Failure::Usage(format!("--timeout: {e}")))?;
                    }
                    if let Some(ua) = user_agent {
                        c.user_agent = ua;
                    }
                    if let Some(m) = max_patterns {
                        c.max_patterns = m;
                    }
                    if ignore_robots {
                        c.respect_robots = false;
                    }
                    let mut fetcher = HttpFetcher::new(c.timeout, &c.user_agent);
                    let options = CrawlOptions { max_patterns: c.max_patterns, respect_robots: c.respect_robots };
                    let report = crawl(&mut fetcher, &start.expect("clap enforces --start"), &options)?;
                    for (url, reason) in &report.failures {
                        eprintln!("botgraph: warning: {url}: {reason}");
                    }
                    report.sitemap
                }
            };
            eprintln!("site map: {} nodes, {} edges", sitemap.len(), sitemap.edge_count());
            write_sitemap(out.as_deref(), &sitemap)
        }

        Command::Layout { sitemap, out, max_iterations } => {
            if let Some(n) = max_iterations {
                cfg.layout.max_iterations = n;
            }
            let map = sitemap_at(&sitemap)?.without_coordinates();
            let laid = run_layout(map, &cfg.layout).map_err(data)?;
            write_sitemap(out.as_deref(), &laid)
        }

        Command::Render { sitemap, logs, out, min_spots, jobs, format, image_size, line_width, subgraphs } => {
            if let Some(n) = min_spots {
                cfg.min_spots = n;
            }
            if let Some(n) = jobs {
                cfg.jobs = n;
            }
            if let Some(s) = image_size {
                cfg.render.image_size = s;
            }
            if let Some(w) = line_width {
                cfg.render.line_width = w;
            }
            cfg.render.validate().map_err(|e| Failure::Usage(e.to_string()))?;
            let map = sitemap_at(&sitemap)?;
            let requests = read_logs(&logs, format)?;
            let result = render_requests(&map, requests, &cfg.render, cfg.min_spots, cfg.jobs)?;
            emit_dataset(&result.images, &out)?;
            if let Some(path) = subgraphs {
                let mut w = BufWriter::new(File::create(&path).map_err(io_at(&path))?);
                for g in &result.subgraphs {
                    writeln!(w, "{}", subgraph_json(&map, g)).map_err(io_at(&path))?;
                }
                w.flush().map_err(io_at(&path))?;
            }
            let s = &result.stats;
            let mut line = format!("sessions in {}, rendered {}, excluded {}", s.sessions, s.rendered, s.excluded);
            if let Some((bor, bos)) = s.shares {
                line.push_str(&format!(", BoR {}, BoS {}", pct(bor), pct(bos)));
            }
            println!("{line}");
            Ok(())
        }

        Command::Synth { sitemap, profiles, out, format } => {
            let map = sitemap_at(&sitemap)?;
            let profiles = load_profiles(&profiles, cfg.seed)?;
            let sessions = generate(&map, &profiles).map_err(data)?;
            let requests: Vec<Request> = sessions.into_iter().flat_map(|s| s.requests).collect();
            let file = File::create(&out).map_err(io_at(&out))?;
            let w = BufWriter::new(file);
            match format.unwrap_or_else(|| LogFormat::from_path(&out)) {
                LogFormat::Jsonl => write_jsonl(w, &requests),
                LogFormat::Csv => write_csv(w, &requests),
            }
            .map_err(io_at(&out))?;
            eprintln!("wrote {} requests", requests.len());
            Ok(())
        }

        Command::Evaluate { truth, pred, out, logs, format } => {
            let rows = read_manifest(&truth)?;
            let truth_labels = truth_from_manifest(&rows, &truth)?;
            let predicted: BTreeMap<String, _> =
                read_predictions(&pred)?.into_iter().map(|(id, p)| (id, p.label)).collect();
            let mut report = evaluate(&truth_labels, &predicted).map_err(data)?;
            if let Some(path) = logs {
                let mut lengths = BTreeMap::new();
                for r in read_logs(&path, format)? {
                    *lengths.entry(r.session_id).or_insert(0u64) += 1;
                }
                report = report.with_request_counts(&truth_labels, &lengths);
            }
            write_report(&out, &report)?;
            println!("{}", summary(&report));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("botgraph: error: {}", f.message().replace('\n', " "));
            ExitCode::from(f.code())
        }
    }
}
