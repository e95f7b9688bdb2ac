use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use symcurve::decomp::{analyze, cowen_thomson, RunConfig};
use symcurve::fibers::fiber_on_circle;
use symcurve::fixtures::{suite_fixtures, Fixture};
use symcurve::group::symmetry_group;
use symcurve::suite::run_suite;
use symcurve::{curve_samples, symbol_compile, RationalMap, SymbolSpec, Tolerances, C64};

#[derive(Parser)]
#[command(name = "symcurve", version, about = "Invariants of analytic symbol curves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute n, N, o, b and the totally-Abelian verdict.
    Analyze {
        /// Spec file, or `builtin:NAME`.
        spec: String,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Factor the symbol as h ∘ B.
    Decompose {
        spec: String,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Sample the image of the unit circle.
    Curve {
        spec: String,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// List the fiber of φ(e^{2πi·xi}) on the circle.
    Fiber {
        spec: String,
        /// Base point in turns.
        #[arg(long)]
        xi: f64,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Compute the symmetry group and sample its generator.
    Group {
        spec: String,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Run the fixture corpus and print a pass/fail table.
    Suite {
        /// JSON array of fixtures replacing the built-in corpus.
        #[arg(long)]
        fixtures: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Sample budget for both pipelines (interior points and circle points).
    #[arg(long)]
    samples: Option<usize>,
    /// Circle sample budget; overrides --samples for the circle pipelines.
    #[arg(long)]
    circle_samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// JSON object with tolerance overrides.
    #[arg(long)]
    tol_file: Option<PathBuf>,
    #[arg(long)]
    degree_cap: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct OutArgs {
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

impl RunArgs {
    fn config(&self) -> anyhow::Result<RunConfig> {
        let mut tolerances = match &self.tol_file {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                serde_json::from_str::<Tolerances>(&text)
                    .with_context(|| format!("parsing tolerances in {}", path.display()))?
            }
            None => Tolerances::default(),
        };
        if let Some(cap) = self.degree_cap {
            tolerances.degree_cap = cap;
        }
        let defaults = RunConfig::default();
        let interior = self.samples.unwrap_or(defaults.interior_samples);
        let circle = self
            .circle_samples
            .or(self.samples)
            .unwrap_or(defaults.circle_samples);
        if interior < 16 || circle < 16 {
            bail!("sample budgets must be at least 16");
        }
        Ok(RunConfig {
            interior_samples: interior,
            circle_samples: circle,
            seed: self.seed,
            tolerances,
        })
    }
}

impl OutArgs {
    fn json_only(&self) -> anyhow::Result<()> {
        if self.format == Some(Format::Csv) {
            bail!("csv output is only available for the curve command");
        }
        Ok(())
    }

    fn emit(&self, text: &str) -> anyhow::Result<()> {
        match &self.out {
            Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
            None => {
                std::io::stdout().write_all(text.as_bytes())?;
                Ok(())
            }
        }
    }

    fn emit_json<T: Serialize>(&self, value: &T) -> anyhow::Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.emit(&text)
    }
}

fn load_spec(arg: &str) -> anyhow::Result<SymbolSpec> {
    if let Some(name) = arg.strip_prefix("builtin:") {
        return Ok(SymbolSpec::builtin(name));
    }
    let path = Path::new(arg);
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    SymbolSpec::from_json(&text).with_context(|| format!("parsing symbol spec {}", path.display()))
}

fn compile(arg: &str, config: &RunConfig) -> anyhow::Result<RationalMap> {
    let spec = load_spec(arg)?;
    symbol_compile(&spec, &config.tolerances).with_context(|| format!("invalid symbol {arg}"))
}

fn turns(theta: f64) -> f64 {
    theta.rem_euclid(std::f64::consts::TAU) / std::f64::consts::TAU
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Analyze { spec, run, out } => {
            out.json_only()?;
            let config = run.config()?;
            let map = compile(&spec, &config)?;
            let report = analyze(&map, &config);
            out.emit_json(&report)?;
            Ok(if report.partial { 2 } else { 0 })
        }
        Command::Decompose { spec, run, out } => {
            out.json_only()?;
            let config = run.config()?;
            let map = compile(&spec, &config)?;
            match cowen_thomson(&map, config.seed, &config.tolerances) {
                Ok(d) => {
                    out.emit_json(&json!({
                        "seed": config.seed,
                        "b": d.b_order,
                        "blaschke": d.blaschke,
                        "cofactor": SymbolSpec::from_rational(&d.cofactor),
                        "residual": d.residual,
                        "canonicalization": d.canonicalization,
                    }))?;
                    Ok(0)
                }
                Err(e) => {
                    out.emit_json(&json!({ "seed": config.seed, "error": e.to_string() }))?;
                    Ok(2)
                }
            }
        }
        Command::Curve { spec, run, out } => {
            let config = run.config()?;
            let map = compile(&spec, &config)?;
            let centre = map.eval(C64::new(0.0, 0.0));
            let samples = curve_samples(&map, centre, &config.tolerances)
                .with_context(|| "curve passes through φ(0)")?;
            if out.format == Some(Format::Json) {
                out.emit_json(&samples)?;
            } else {
                let mut text = String::from("turns,re,im,refined\n");
                for (k, (t, v)) in samples.t.iter().zip(&samples.values).enumerate() {
                    let refined = k > 0 && samples.refined[k - 1];
                    text.push_str(&format!("{:.17e},{:.17e},{:.17e},{}\n", t / std::f64::consts::TAU, v.re, v.im, refined as u8));
                }
                out.emit(&text)?;
            }
            Ok(0)
        }
        Command::Fiber { spec, xi, run, out } => {
            out.json_only()?;
            let config = run.config()?;
            let map = compile(&spec, &config)?;
            let base = C64::from_polar(1.0, std::f64::consts::TAU * xi);
            let fiber = fiber_on_circle(&map, base, &config.tolerances)?;
            let points: Vec<_> = fiber
                .points
                .iter()
                .map(|p| {
                    json!({
                        "turns": turns(p.angle),
                        "point": [p.point.re, p.point.im],
                        "multiplicity": p.multiplicity,
                        "residual": p.residual,
                    })
                })
                .collect();
            out.emit_json(&json!({
                "xi": xi,
                "value": map.eval(base),
                "cardinality": fiber.cardinality(),
                "reliable": fiber.reliable,
                "points": points,
            }))?;
            Ok(if fiber.reliable { 0 } else { 2 })
        }
        Command::Group { spec, run, out } => {
            out.json_only()?;
            let config = run.config()?;
            let map = compile(&spec, &config)?;
            match symmetry_group(&map, config.seed, &config.tolerances) {
                Ok(g) => {
                    out.emit_json(&json!({
                        "seed": config.seed,
                        "order": g.order,
                        "shift": g.shift,
                        "base_fiber_size": g.base_fiber_size,
                        "base_turns": g.base_turns,
                        "cycle_error": g.cycle_error,
                        "attempts": g.attempts,
                        "generator": g.generator.sample_turns(&map, 32),
                    }))?;
                    Ok(0)
                }
                Err(e) => {
                    out.emit_json(&json!({ "seed": config.seed, "error": e.to_string() }))?;
                    Ok(2)
                }
            }
        }
        Command::Suite { fixtures, run, out } => {
            out.json_only()?;
            let config = run.config()?;
            let corpus: Vec<Fixture> = match &fixtures {
                Some(path) => {
                    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                    serde_json::from_str(&text).with_context(|| format!("parsing fixtures in {}", path.display()))?
                }
                None => suite_fixtures(config.seed),
            };
            let summary = run_suite(&corpus, &config);
            print!("{}", summary.table());
            if out.out.is_some() {
                out.emit_json(&summary)?;
            }
            Ok(if summary.all_pass() { 0 } else { 2 })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
