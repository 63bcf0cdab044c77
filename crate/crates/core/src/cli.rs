//! The `solspace` command-line driver.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::bayes::PStableVariant;
use crate::detection::{DetectorSpec, DEFAULT_TIMEOUT};
use crate::error::{Error, Result};
use crate::explorer::{explore, resume, Exploration, ExplorationConfig, StopReason};
use crate::graph::{load_edge_list, EdgeListOptions, Graph, Seed};
use crate::partition::{canonicalize, read_partition_csv, validate, ValidityOptions};
use crate::plot::{confidence_svg, sizes_svg};
use crate::report::{solutions_csv, trace_csv, SolutionSpaceReport};
use crate::taxonomy::TaxonomyThresholds;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_DETECTOR: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "solspace",
    version,
    about = "Explore the solution space of community detection"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DetectorArg {
    Louvain,
    Lp,
    External,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum VariantArg {
    Corrected,
    Verbatim,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PlotKind {
    Confidence,
    Sizes,
}

#[derive(Debug, clap::Args)]
pub struct InputArgs {
    /// Edge list: source,target[,weight] per row
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
    /// First row is a header (default: detected from a `source,target` row)
    #[arg(long)]
    pub header: bool,
}

#[derive(Debug, clap::Args)]
pub struct OutputArgs {
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Also write confidence.svg and sizes.svg
    #[arg(long)]
    pub plots: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the exploration loop and write report.json, solutions.csv, trace.csv
    Explore {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value = "louvain")]
        detector: DetectorArg,
        /// External detector command line (shell-split)
        #[arg(long)]
        cmd: Option<String>,
        /// External detector timeout in seconds
        #[arg(long, default_value_t = DEFAULT_TIMEOUT.as_secs())]
        timeout: u64,
        #[arg(long, default_value_t = 1.0)]
        resolution: f64,
        #[arg(long, default_value_t = 0.95)]
        tau: f64,
        #[arg(long = "t-max", default_value_t = 1000)]
        t_max: u64,
        #[arg(long = "t-min", default_value_t = 10)]
        t_min: u64,
        /// Master seed; drawn at random and printed when absent
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 0.95)]
        level: f64,
        #[arg(long = "p-stable-variant", value_enum, default_value = "corrected")]
        p_stable_variant: VariantArg,
        #[arg(long, default_value_t = 1)]
        parallelism: usize,
        /// Check the community condition node by node
        #[arg(long = "per-node-validity")]
        per_node_validity: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Continue an exploration from its checkpoint.json up to a larger t_max
    Resume {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long = "t-max")]
        t_max: u64,
        #[arg(long)]
        parallelism: Option<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Render a chart from report.json
    Plot {
        #[arg(long)]
        report: PathBuf,
        #[arg(long, value_enum)]
        kind: PlotKind,
        /// Output file (default: <kind>.svg next to the report)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a partition for triviality, connectivity and the community condition
    Validate {
        #[command(flatten)]
        input: InputArgs,
        /// CSV with node labels in the first column
        #[arg(long)]
        partition: PathBuf,
        /// Membership column to read (1 = first after the label)
        #[arg(long, default_value_t = 1)]
        column: usize,
        #[arg(long = "per-node")]
        per_node: bool,
    },
    /// Write the parsed graph back as an edge list
    Export {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

fn looks_like_header(text: &str, delimiter: char) -> bool {
    text.lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            let lower = l.to_ascii_lowercase();
            let mut fields = lower.split(delimiter).map(str::trim);
            matches!(
                (fields.next(), fields.next()),
                (Some("source"), Some("target")) | (Some("from"), Some("to"))
            )
        })
        .unwrap_or(false)
}

pub fn load_graph(args: &InputArgs) -> Result<Graph> {
    let text = read(&args.input)?;
    let options = EdgeListOptions {
        delimiter: args.delimiter,
        header: args.header || looks_like_header(&text, args.delimiter),
    };
    load_edge_list(&text, &options)
}

fn write_outputs(
    g: &Graph,
    x: &Exploration,
    output: &OutputArgs,
    stdout: &mut dyn Write,
) -> Result<SolutionSpaceReport> {
    fs::create_dir_all(&output.out)?;
    let report = SolutionSpaceReport::new(g, x)?;
    write(&output.out.join("report.json"), &report.to_json()?)?;
    write(
        &output.out.join("solutions.csv"),
        &solutions_csv(g, x, &report),
    )?;
    write(&output.out.join("trace.csv"), &trace_csv(&report))?;
    write(&output.out.join("checkpoint.json"), &x.to_checkpoint()?)?;
    if output.plots {
        write(
            &output.out.join("confidence.svg"),
            &confidence_svg(&report)?,
        )?;
        write(&output.out.join("sizes.svg"), &sizes_svg(&report))?;
    }
    let _ = writeln!(stdout, "category: {}", report.category);
    let _ = writeln!(
        stdout,
        "t: {}  ns: {}  ns_valid: {}  stop: {}",
        report.t,
        report.ns,
        report.ns_valid,
        report.stop_reason.as_str()
    );
    if let Some(p) = report.p_stable {
        let _ = writeln!(stdout, "p_stable: {p:.6}");
    }
    if let Some(top) = report.solutions.first() {
        let _ = writeln!(
            stdout,
            "top solution: count {} p {:.4} [{:.4}, {:.4}] k {} valid {}",
            top.count, top.p_point, top.p_lower, top.p_upper, top.k, top.valid
        );
    }
    Ok(report)
}

fn finish(x: &Exploration, stderr: &mut dyn Write) -> i32 {
    if x.stop_reason == StopReason::Error {
        let _ = writeln!(
            stderr,
            "error: {}",
            x.error.as_deref().unwrap_or("detector failed")
        );
        EXIT_DETECTOR
    } else {
        EXIT_OK
    }
}

fn execute(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    match cli.command {
        Command::Explore {
            input,
            detector,
            cmd,
            timeout,
            resolution,
            tau,
            t_max,
            t_min,
            seed,
            level,
            p_stable_variant,
            parallelism,
            per_node_validity,
            output,
        } => {
            let mut spec = match detector {
                DetectorArg::Louvain => DetectorSpec::louvain(resolution),
                DetectorArg::Lp => DetectorSpec::label_propagation(),
                DetectorArg::External => {
                    let line = cmd.ok_or_else(|| {
                        Error::InvalidParameter("--detector external requires --cmd".into())
                    })?;
                    let argv = shell_words::split(&line)
                        .map_err(|e| Error::InvalidParameter(format!("--cmd: {e}")))?;
                    DetectorSpec::external(argv)
                }
            };
            spec.resolution = resolution;
            spec.timeout_secs = timeout;
            let seed = seed.unwrap_or_else(|| {
                let s = rand::random::<u64>();
                let _ = writeln!(stdout, "seed: {s}");
                s
            });
            let config = ExplorationConfig {
                t_max,
                tau,
                t_min,
                master_seed: Seed(seed),
                detector: spec,
                p_stable_variant: match p_stable_variant {
                    VariantArg::Corrected => PStableVariant::Corrected,
                    VariantArg::Verbatim => PStableVariant::Verbatim,
                },
                thresholds: TaxonomyThresholds {
                    level,
                    ..Default::default()
                },
                validity: ValidityOptions {
                    per_node: per_node_validity,
                },
                parallelism,
            };
            config.validate()?;
            let g = load_graph(&input)?;
            let x = explore(&g, &config)?;
            write_outputs(&g, &x, &output, stdout)?;
            Ok(finish(&x, stderr))
        }
        Command::Resume {
            input,
            checkpoint,
            t_max,
            parallelism,
            output,
        } => {
            let g = load_graph(&input)?;
            let previous = Exploration::from_checkpoint(&read(&checkpoint)?)?;
            let mut config = previous.config.clone();
            config.t_max = t_max;
            if let Some(p) = parallelism {
                config.parallelism = p;
            }
            let x = resume(previous, &g, &config)?;
            write_outputs(&g, &x, &output, stdout)?;
            Ok(finish(&x, stderr))
        }
        Command::Plot { report, kind, out } => {
            let r = SolutionSpaceReport::from_json(&read(&report)?)?;
            let (svg, name) = match kind {
                PlotKind::Confidence => (confidence_svg(&r)?, "confidence.svg"),
                PlotKind::Sizes => (sizes_svg(&r), "sizes.svg"),
            };
            let path = out.unwrap_or_else(|| {
                report
                    .parent()
                    .map(|p| p.join(name))
                    .unwrap_or_else(|| PathBuf::from(name))
            });
            write(&path, &svg)?;
            let _ = writeln!(stdout, "wrote {}", path.display());
            Ok(EXIT_OK)
        }
        Command::Validate {
            input,
            partition,
            column,
            per_node,
        } => {
            let g = load_graph(&input)?;
            let m = read_partition_csv(&g, &read(&partition)?, column)?;
            let p = canonicalize(&m);
            let r = validate(&g, &p, ValidityOptions { per_node })?;
            let verdict = if r.valid {
                "valid".to_string()
            } else {
                let mut reasons = Vec::new();
                if r.is_trivial {
                    reasons.push("trivial".to_string());
                }
                if !r.disconnected_communities.is_empty() {
                    reasons.push(format!(
                        "disconnected communities {:?}",
                        r.disconnected_communities
                    ));
                }
                for v in &r.definition_violations {
                    reasons.push(format!(
                        "community {} more connected to {} ({} > 2 x {})",
                        v.community, v.other, v.boundary_weight, v.internal_weight
                    ));
                }
                format!("invalid: {}", reasons.join("; "))
            };
            let _ = writeln!(stdout, "k = {}: {verdict}", p.community_count());
            let _ = writeln!(stdout, "{}", serde_json::to_string(&r)?);
            Ok(if r.valid { EXIT_OK } else { EXIT_FAILURE })
        }
        Command::Export { input, out } => {
            let g = load_graph(&input)?;
            let text = g.to_edge_list(input.delimiter);
            match out {
                Some(path) => write(&path, &text)?,
                None => {
                    let _ = stdout.write_all(text.as_bytes());
                }
            }
            Ok(EXIT_OK)
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{e}");
                return EXIT_FAILURE;
            }
            let _ = write!(stdout, "{e}");
            return EXIT_OK;
        }
    };
    match execute(cli, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_FAILURE
        }
    }
}
