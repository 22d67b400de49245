use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use fjl_core::dynamics::ModelMap;
use fjl_core::render::{self, Scene, DEFAULT_PRECISION};
use fjl_core::tree::CantorTree;
use fjl_core::verify::{measure_complement, Ledger, LedgerReport, VerifyConfig};
use fjl_core::{QBox, QPoint, Rat};

const PRECISION_VAR: &str = "FJL_REPORT_PRECISION";

#[derive(Parser, Debug)]
#[command(
    name = "fjl",
    version,
    about = "Exact verification and figures for a Julia set of positive finite measure"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run every ledger check and report margins.
    Verify(VerifyArgs),
    /// Measure bounds.
    #[command(subcommand)]
    Measure(MeasureCommand),
    /// Per-level summary of the Cantor tree, one JSON object per line.
    Tree(TreeArgs),
    /// Iterate the model map from a rational seed, one JSON object per step.
    Orbit(OrbitArgs),
    /// Draw a figure as SVG (or PPM with --ppm).
    #[command(subcommand)]
    Render(RenderCommand),
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Largest level index swept.
    #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(u32).range(1..))]
    jmax: u32,
    /// Lattice radius for the P squares.
    #[arg(long, default_value_t = 16)]
    lattice: u32,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum MeasureCommand {
    /// Partial sum, tail bound and closed form of meas(C minus P).
    Complement {
        #[arg(long, default_value_t = 64)]
        n: u32,
    },
    /// Certified lower bound on the measure of the Cantor set T.
    LowerBound {
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        depth: u32,
    },
}

#[derive(Args, Debug)]
struct TreeArgs {
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    depth: u32,
    /// Also enumerate every node and cross-check the closed forms.
    #[arg(long)]
    enumerate: bool,
    /// Largest level enumerated.
    #[arg(long, default_value_t = 1 << 16)]
    cap: u128,
}

#[derive(Args, Debug)]
struct OrbitArgs {
    /// Real part, as an integer, fraction or decimal.
    #[arg(long, allow_hyphen_values = true)]
    x: Rat,
    #[arg(long, allow_hyphen_values = true)]
    y: Rat,
    #[arg(long, default_value_t = 8)]
    steps: usize,
}

#[derive(Args, Debug)]
struct Output {
    #[arg(long)]
    out: PathBuf,
    /// Write a binary PPM raster instead of SVG.
    #[arg(long)]
    ppm: bool,
}

#[derive(Subcommand, Debug)]
enum RenderCommand {
    /// P outlines and filled Q3 squares.
    Overview {
        /// x_lo,x_hi,y_lo,y_hi
        #[arg(long, default_value = "-3,9,-3,5", allow_hyphen_values = true)]
        viewport: String,
        #[command(flatten)]
        output: Output,
    },
    /// Nested Q squares and the sixteen R cells of level j.
    Zoom {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        j: u32,
        /// Inset magnification; clamped so the nesting stays visible.
        #[arg(long, default_value = "1")]
        exaggerate: Rat,
        #[command(flatten)]
        output: Output,
    },
    /// Nodes of the Cantor tree at one depth.
    Tree {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        depth: u32,
        #[arg(long, default_value_t = 1 << 16)]
        cap: u128,
        #[command(flatten)]
        output: Output,
    },
}

/// A check ran and failed; maps to exit code 1.
#[derive(Debug)]
struct ChecksFailed(usize);

impl std::fmt::Display for ChecksFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} check(s) failed", self.0)
    }
}

impl std::error::Error for ChecksFailed {}

fn precision() -> anyhow::Result<usize> {
    match std::env::var(PRECISION_VAR) {
        Ok(v) => {
            let p: usize = v.trim().parse().with_context(|| {
                format!("{PRECISION_VAR} must be a positive integer, got {v:?}")
            })?;
            if p == 0 {
                bail!("{PRECISION_VAR} must be positive");
            }
            Ok(p)
        }
        Err(_) => Ok(DEFAULT_PRECISION),
    }
}

fn exact_and_decimal(r: &Rat, prec: usize) -> serde_json::Value {
    json!({ "exact": r.to_string(), "decimal": r.to_decimal(prec) })
}

fn write_file(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn run_verify(args: &VerifyArgs) -> anyhow::Result<()> {
    let cfg = VerifyConfig {
        j_max: args.jmax,
        lattice: args.lattice,
        ..VerifyConfig::default()
    };
    let report = LedgerReport::new(Ledger::default().run_all(&cfg)?);
    let text = report.to_json();
    match &args.report {
        Some(path) => {
            write_file(path, text.as_bytes())?;
            for c in report.checks.iter().filter(|c| !c.verdict.is_pass()) {
                println!("FAIL {} {:?} margin {}", c.id, c.params, c.margin);
            }
            println!(
                "{} checks: {} pass, {} fail",
                report.checks.len(),
                report.summary.pass,
                report.summary.fail
            );
        }
        None => println!("{text}"),
    }
    if report.all_pass() {
        Ok(())
    } else {
        Err(ChecksFailed(report.summary.fail).into())
    }
}

fn run_measure(cmd: &MeasureCommand, prec: usize) -> anyhow::Result<()> {
    let value = match cmd {
        MeasureCommand::Complement { n } => {
            let s = measure_complement(*n);
            json!({
                "n": n,
                "partial_sum": exact_and_decimal(&s.partial_sum, prec),
                "tail_bound": exact_and_decimal(&s.tail_bound, prec),
                "closed_form": exact_and_decimal(&s.closed_form, prec),
                "remainder": exact_and_decimal(&(&s.closed_form - &s.partial_sum), prec),
            })
        }
        MeasureCommand::LowerBound { depth } => {
            let tree = CantorTree::default();
            json!({
                "depth": depth,
                "level_measure": exact_and_decimal(&tree.level_measure(*depth)?, prec),
                "lower_bound": exact_and_decimal(&tree.measure_lower_bound(*depth)?, prec),
            })
        }
    };
    println!("{value}");
    Ok(())
}

fn run_tree(args: &TreeArgs) -> anyhow::Result<()> {
    let tree = CantorTree::default();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    for d in 1..=args.depth {
        let s = tree.level_summary(d)?;
        let mut line = json!({
            "depth": d,
            "count": s.node_count.to_string(),
            "half_side": s.node_half_side.to_string(),
            "measure": s.level_measure.to_string(),
            "loss": s.loss_to_next.to_string(),
            "bound": s.level_loss_bound().to_string(),
            "lower_bound_so_far": tree.measure_lower_bound(d)?.to_string(),
        });
        if args.enumerate {
            let nodes = tree.enumerate_level(d, args.cap)?;
            let measure: Rat = nodes.iter().map(|n| n.rect.area()).sum();
            if measure != s.level_measure || nodes.len().to_string() != s.node_count.to_string() {
                bail!("enumeration disagrees with the closed form at depth {d}");
            }
            line["enumerated"] = json!(true);
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

fn run_orbit(args: &OrbitArgs) -> anyhow::Result<()> {
    let seed = QPoint::new(args.x.clone(), args.y.clone());
    let record = ModelMap::default().orbit(&seed, args.steps);
    let stdout = io::stdout();
    let mut out = stdout.lock();
    for line in record.json_lines() {
        writeln!(out, "{line}")?;
    }
    writeln!(out, "{}", serde_json::to_string(&record.status)?)?;
    Ok(())
}

fn parse_viewport(s: &str) -> anyhow::Result<QBox> {
    let parts: Vec<Rat> = s
        .split(',')
        .map(|p| p.trim().parse::<Rat>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("bad viewport {s:?}"))?;
    let [x0, x1, y0, y1]: [Rat; 4] = parts
        .try_into()
        .map_err(|_| anyhow::anyhow!("viewport needs four comma-separated numbers"))?;
    Ok(QBox::new(x0, x1, y0, y1)?)
}

fn emit(scene: &Scene, output: &Output, prec: usize) -> anyhow::Result<()> {
    if output.ppm {
        write_file(&output.out, &scene.to_ppm())
    } else {
        write_file(&output.out, scene.to_svg(prec).as_bytes())
    }
}

fn run_render(cmd: &RenderCommand, prec: usize) -> anyhow::Result<()> {
    let (scene, output) = match cmd {
        RenderCommand::Overview { viewport, output } => {
            (render::render_overview(&parse_viewport(viewport)?)?, output)
        }
        RenderCommand::Zoom {
            j,
            exaggerate,
            output,
        } => (render::render_q_zoom(*j, exaggerate)?, output),
        RenderCommand::Tree { depth, cap, output } => (render::render_tree(*depth, *cap)?, output),
    };
    emit(&scene, output, prec)
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    let prec = precision()?;
    match &cli.command {
        Command::Verify(a) => run_verify(a),
        Command::Measure(m) => run_measure(m, prec),
        Command::Tree(t) => run_tree(t),
        Command::Orbit(o) => run_orbit(o),
        Command::Render(r) => run_render(r, prec),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            // Failed checks and I/O problems are 1; refused or invalid input is 2.
            if e.is::<ChecksFailed>()
                || e.is::<io::Error>()
                || e.chain().any(|c| c.is::<io::Error>())
            {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
