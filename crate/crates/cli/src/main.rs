//! `sbs`: single points, parameter sweeps and the per-figure presets.
//!
//! Exit status is 0 on success, 1 for bad arguments and 2 when more grid
//! points fail than `--max-failures` allows (or the single point of `point`
//! fails numerically).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use sbs_core::evolution::pipeline_with;
use sbs_core::metrics::{OptimizerSettings, ReportOptions};
use sbs_core::sweep::{
    preset, Axis, OutputFormat, Param, Quantity, SliceAt, Summary, SweepSpec, SweepWriter, DEFAULT_STEPS,
    PRESET_NAMES,
};
use sbs_core::{HamiltonianVariant, ModelConfig};

#[derive(Parser)]
#[command(name = "sbs", version, about = "Distance to spectrum broadcast structure under imperfect broadcasting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one configuration and print its report as JSON.
    Point(PointArgs),
    /// Sweep a quantity over a two-parameter grid (or a slice of one).
    Sweep(SweepArgs),
    /// Regenerate the data grids behind one figure.
    Preset(PresetArgs),
}

/// Model parameters; anything left out keeps its default.
#[derive(Args, Default)]
struct ModelArgs {
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    alpha1: Option<f64>,
    #[arg(long)]
    alpha2: Option<f64>,
    #[arg(long)]
    alpha3: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    nenv: Option<usize>,
    #[arg(long)]
    observed: Option<usize>,
    /// eq6_full, ring_eq30 or central_only; defaults by environment size.
    #[arg(long, value_parser = parse_with::<HamiltonianVariant>)]
    variant: Option<HamiltonianVariant>,
}

impl ModelArgs {
    fn config(&self) -> ModelConfig {
        let mut cfg = ModelConfig::default();
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut cfg.theta, self.theta);
        set(&mut cfg.alpha1, self.alpha1);
        set(&mut cfg.alpha2, self.alpha2);
        set(&mut cfg.alpha3, self.alpha3);
        set(&mut cfg.p, self.p);
        set(&mut cfg.t, self.t);
        if let Some(n) = self.nenv {
            cfg.n_env = n;
        }
        if let Some(k) = self.observed {
            cfg.observed = k;
        }
        cfg.variant = self.variant;
        cfg
    }
}

#[derive(Args)]
struct PointArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Also report the Hadamard-minus-computational basis difference.
    #[arg(long)]
    delta: bool,
    /// Skip the exact SBS-distance optimization.
    #[arg(long)]
    no_optimize: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Where and how tables are written.
#[derive(Args)]
struct OutputArgs {
    #[arg(long, default_value = "csv", value_parser = parse_with::<OutputFormat>)]
    format: OutputFormat,
    /// Worker threads; 0 uses all available cores.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Failed grid points tolerated before exiting with status 2.
    #[arg(long, default_value_t = 0)]
    max_failures: usize,
    /// Keep rows already written for the same sweep and compute only the rest.
    #[arg(long)]
    resume: bool,
}

const SPEC_FLAGS: [&str; 14] = [
    "theta", "alpha1", "alpha2", "alpha3", "p", "t", "nenv", "observed", "variant", "quantity", "grid", "range1",
    "range2", "seed",
];

#[derive(Args)]
struct SweepArgs {
    /// TOML file holding a complete sweep specification; excludes the model and grid flags.
    #[arg(long, conflicts_with_all = SPEC_FLAGS)]
    config: Option<PathBuf>,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_parser = parse_with::<Quantity>)]
    quantity: Option<Quantity>,
    /// Axis parameters and steps per axis, e.g. alpha2xpx41.
    #[arg(long, value_parser = parse_grid)]
    grid: Option<(Param, Param, usize)>,
    /// Range of the first axis as min:max (defaults per parameter).
    #[arg(long, value_parser = parse_range)]
    range1: Option<(f64, f64)>,
    #[arg(long, value_parser = parse_range)]
    range2: Option<(f64, f64)>,
    #[arg(long)]
    seed: Option<u64>,
    /// Hold one axis at a value, e.g. p=0, and sweep only the other.
    #[arg(long, value_parser = parse_slice)]
    slice: Option<SliceAt>,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    output: OutputArgs,
}

impl SweepArgs {
    fn spec(&self) -> anyhow::Result<SweepSpec> {
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            return toml::from_str(&text).with_context(|| format!("parsing {}", path.display()));
        }
        let base = self.model.config();
        let (p1, p2, steps) = self.grid.unwrap_or((Param::Alpha2, Param::P, DEFAULT_STEPS));
        let axis = |param: Param, range: Option<(f64, f64)>| {
            let (min, max) = range.unwrap_or(param.default_range());
            Axis::new(param, min, max, steps)
        };
        Ok(SweepSpec {
            axis1: axis(p1, self.range1),
            axis2: axis(p2, self.range2),
            quantity: self.quantity.unwrap_or(Quantity::SbsDistance),
            seed: self.seed.unwrap_or(0),
            hamiltonian_variant: base.resolved_variant(),
            base,
        })
    }
}

#[derive(Args)]
struct PresetArgs {
    #[arg(value_parser = clap::builder::PossibleValuesParser::new(PRESET_NAMES))]
    name: String,
    /// Grid points per axis.
    #[arg(long, default_value_t = DEFAULT_STEPS)]
    steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory receiving one table and sidecar per panel.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[command(flatten)]
    output: OutputArgs,
}

fn parse_with<T: std::str::FromStr<Err = sbs_core::Error>>(s: &str) -> Result<T, String> {
    s.parse().map_err(|e: sbs_core::Error| e.to_string())
}

fn parse_grid(s: &str) -> Result<(Param, Param, usize), String> {
    let parts: Vec<&str> = s.split('x').collect();
    let [a, b, n] = parts[..] else {
        return Err(format!("expected AxBxN such as alpha2xpx41, got {s:?}"));
    };
    let steps = n.parse().map_err(|_| format!("bad step count {n:?}"))?;
    Ok((parse_with(a)?, parse_with(b)?, steps))
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected min:max, got {s:?}"))?;
    let num = |v: &str| v.trim().parse::<f64>().map_err(|_| format!("bad number {v:?}"));
    Ok((num(a)?, num(b)?))
}

fn parse_slice(s: &str) -> Result<SliceAt, String> {
    let (param, value) = s.split_once('=').ok_or_else(|| format!("expected PARAM=VALUE, got {s:?}"))?;
    let value = value.trim().parse().map_err(|_| format!("bad number {value:?}"))?;
    Ok(SliceAt { param: parse_with(param.trim())?, value })
}

fn point(args: &PointArgs) -> anyhow::Result<ExitCode> {
    let cfg = args.model.config();
    let options = ReportOptions {
        optimize: !args.no_optimize && cfg.observed == 1,
        delta: args.delta,
        optimizer: OptimizerSettings { seed: args.seed, ..OptimizerSettings::default() },
    };
    let report = pipeline_with(&cfg, &options)?;
    let json = serde_json::to_string_pretty(&report)? + "\n";
    match &args.out {
        Some(path) => fs::write(path, json).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{json}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn check_failures(failures: usize, limit: usize) -> ExitCode {
    if failures > limit {
        eprintln!("{failures} grid points failed (limit {limit})");
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}

fn write(writer: &SweepWriter, out: &Path, resume: bool) -> anyhow::Result<Summary> {
    let (_, summary) = writer.run(out, resume)?;
    eprintln!("{}: {} points, {} failed", out.display(), summary.rows, summary.failures);
    Ok(summary)
}

fn sweep(args: &SweepArgs) -> anyhow::Result<ExitCode> {
    let spec = args.spec()?;
    let writer = SweepWriter {
        spec: &spec,
        slice: args.slice,
        format: args.output.format,
        workers: args.output.workers,
        preset: None,
        notes: vec![],
    };
    let summary = write(&writer, &args.out, args.output.resume)?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(check_failures(summary.failures, args.output.max_failures))
}

fn run_preset(args: &PresetArgs) -> anyhow::Result<ExitCode> {
    let preset = preset(&args.name, args.steps, args.seed)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let mut failures = 0;
    for panel in &preset.panels {
        let out = args.out.join(format!("{}.{}", panel.label, args.output.format.extension()));
        let writer = SweepWriter {
            spec: &panel.spec,
            slice: panel.slice,
            format: args.output.format,
            workers: args.output.workers,
            preset: Some(preset.name.to_string()),
            notes: preset.notes.clone(),
        };
        failures += write(&writer, &out, args.output.resume)?.failures;
    }
    Ok(check_failures(failures, args.output.max_failures))
}

/// Caller mistakes map to 1, numerical trouble to 2.
fn exit_code(err: &anyhow::Error) -> ExitCode {
    match err.downcast_ref::<sbs_core::Error>() {
        Some(e) if !e.is_argument() => ExitCode::from(2),
        _ => ExitCode::from(1),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Point(a) => point(a),
        Command::Sweep(a) => sweep(a),
        Command::Preset(a) => run_preset(a),
    };
    result.unwrap_or_else(|err| {
        eprintln!("error: {err:#}");
        exit_code(&err)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use anyhow::anyhow;

    #[test]
    fn grid_flag() {
        assert_eq!(parse_grid("alpha3xpx21").unwrap(), (Param::Alpha3, Param::P, 21));
        assert!(parse_grid("alpha3xp").is_err());
        assert!(parse_grid("alpha3xqx5").is_err());
    }

    #[test]
    fn range_and_slice_flags() {
        assert_eq!(parse_range("0:1.5").unwrap(), (0.0, 1.5));
        assert!(parse_range("0-1").is_err());
        assert_eq!(parse_slice("p=0.25").unwrap(), SliceAt { param: Param::P, value: 0.25 });
    }

    #[test]
    fn numeric_errors_exit_with_two() {
        let err = anyhow!(sbs_core::Error::Numeric("x".into()));
        assert_eq!(exit_code(&err), ExitCode::from(2));
        let err = anyhow!(sbs_core::Error::Argument("x".into()));
        assert_eq!(exit_code(&err), ExitCode::from(1));
        assert_eq!(exit_code(&anyhow!("io")), ExitCode::from(1));
    }

    #[test]
    fn flags_build_a_spec() {
        let cli = Cli::try_parse_from(["sbs", "sweep", "--theta", "0.3", "--nenv", "8", "--observed", "7",
            "--quantity", "upper_bound", "--grid", "alpha2xpx5", "--range1", "0:1", "--out", "x.csv"])
        .unwrap();
        let Command::Sweep(args) = cli.command else { panic!("expected sweep") };
        let spec = args.spec().unwrap();
        assert_eq!(spec.hamiltonian_variant, HamiltonianVariant::CentralOnly);
        assert_eq!((spec.axis1.max, spec.axis2.max, spec.axis2.steps), (1.0, 0.5, 5));
        spec.validate().unwrap();
    }

    #[test]
    fn config_excludes_spec_flags() {
        let parsed = Cli::try_parse_from(["sbs", "sweep", "--config", "s.toml", "--theta", "0.1", "--out", "x.csv"]);
        assert!(parsed.is_err());
    }

}
