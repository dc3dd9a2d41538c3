//! `per3`: renders, classification reports, special parameters and doubling
//! combinatorics from the command line.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use per3_core::classify::{
    analyze_region, analyze_type, sierpinski_verdict_with, BasinConfig, ClassifyConfig, ContactConfig, ContactEvidence,
    HyperbolicType, Region,
};
use per3_core::doubling::{is_mixed, mixed_check, orbit, quadrant, Angle, DoublingOrbit};
use per3_core::orbit::OrbitFate;
use per3_core::params::special_parameters;
use per3_core::periodic::{periodic_points, PeriodicError, PeriodicPoint};
use per3_core::render::{
    render_dynamical, render_parameter, Chart, Palette, RenderConfig, Window, DEFAULT_BUDGET, SLICE_WINDOW,
};
use per3_core::{format_complex, per3_map, preset, Complex, Per3Parameter};

mod complex_arg;

use complex_arg::{parse_complex, parse_size};

#[derive(Parser)]
#[command(
    name = "per3",
    version,
    about = "Dynamics of the slice f_a(z) = (z - 1)(z - a/(2 - a)) / z^2"
)]
struct Cli {
    /// Print one machine-readable record instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render the dynamical plane of a named map to a PPM file.
    RenderJulia(RenderJulia),
    /// Render the parameter plane of the slice to a PPM file.
    RenderParam(RenderParam),
    /// Hyperbolic type and region of the slice containing a parameter.
    Classify(ClassifyArgs),
    /// Whether the Julia set of f_a is a Sierpiński curve, with the reason.
    Verdict(ClassifyArgs),
    /// Centers, cut points and bifurcation parameters of the slice.
    SpecialParams,
    /// Periodic points of f_a of an exact period.
    FixedPoints(FixedPointsArgs),
    /// Angle-doubling combinatorics.
    Doubling {
        #[command(subcommand)]
        command: DoublingCommand,
    },
}

#[derive(Args)]
struct WindowArgs {
    /// Window center, "RE,IM" or "RE+IMi".
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    center: Option<Complex>,
    /// Window width in chart units.
    #[arg(long)]
    width: Option<f64>,
    /// Window height in chart units.
    #[arg(long)]
    height: Option<f64>,
    /// Image size in pixels, "WIDTHxHEIGHT" or a single number for a square.
    #[arg(long, value_parser = parse_size, default_value = "800x800")]
    size: (usize, usize),
    /// Orbit iteration budget per pixel.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: usize,
    #[arg(long, value_enum, default_value_t = PaletteArg::Standard)]
    palette: PaletteArg,
    /// Worker threads; the output does not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    /// Output file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RenderJulia {
    /// One of milnor-tan, devaney-quartic, steinmetz, per3.
    #[arg(long, default_value = "per3")]
    preset: String,
    /// Parameter of the per3 preset.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    a: Option<Complex>,
    /// Render in the coordinate w = 1/z.
    #[arg(long, value_enum, default_value_t = ChartArg::Plane)]
    chart: ChartArg,
    #[command(flatten)]
    window: WindowArgs,
}

#[derive(Args)]
struct RenderParam {
    #[command(flatten)]
    window: WindowArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum PaletteArg {
    Standard,
    Mono,
}

#[derive(Clone, Copy, ValueEnum)]
enum ChartArg {
    Plane,
    Inverse,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Parameter, "RE,IM" or "RE+IMi".
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    a: Complex,
    /// Orbit budget for the critical orbits.
    #[arg(long, default_value_t = ClassifyConfig::default().budget)]
    budget: usize,
    /// Chordal radii of the contact circles, largest first.
    #[arg(long, value_delimiter = ',', default_value = "0.01,0.001,0.0001,0.00001")]
    contact_radii: Vec<f64>,
    /// Samples per contact circle.
    #[arg(long, default_value_t = ContactConfig::default().samples)]
    contact_samples: usize,
    /// Orbit budget per contact sample.
    #[arg(long, default_value_t = ContactConfig::default().budget)]
    contact_budget: usize,
    /// Pixels per side of the first basin raster.
    #[arg(long, default_value_t = BasinConfig::default().start_resolution)]
    basin_resolution: usize,
    /// Resolution doublings allowed for basin rasters.
    #[arg(long, default_value_t = BasinConfig::default().refinements)]
    basin_refinements: usize,
    /// Attractor points closer than this (chordal) are the same.
    #[arg(long, default_value_t = ClassifyConfig::default().match_tol)]
    match_tol: f64,
    /// Parameters this close to a cut point are reported near the boundary.
    #[arg(long, default_value_t = ClassifyConfig::default().boundary_tol)]
    boundary_tol: f64,
    /// Triple-contact parameters with |Im a| below this are near the boundary.
    #[arg(long, default_value_t = ClassifyConfig::default().real_axis_tol)]
    real_axis_tol: f64,
}

impl ClassifyArgs {
    fn config(&self) -> ClassifyConfig {
        let mut cfg = ClassifyConfig {
            budget: self.budget,
            ..Default::default()
        };
        cfg.contact.radii = self.contact_radii.clone();
        cfg.contact.samples = self.contact_samples;
        cfg.contact.budget = self.contact_budget;
        cfg.basin.start_resolution = self.basin_resolution;
        cfg.basin.refinements = self.basin_refinements;
        cfg.basin.match_tol = self.match_tol;
        cfg.match_tol = self.match_tol;
        cfg.boundary_tol = self.boundary_tol;
        cfg.real_axis_tol = self.real_axis_tol;
        cfg
    }
}

#[derive(Args)]
struct FixedPointsArgs {
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    a: Complex,
    /// Exact period.
    #[arg(long, default_value_t = 1)]
    period: usize,
}

#[derive(Subcommand)]
enum DoublingCommand {
    /// Orbit of an angle p/q under doubling.
    Angle {
        angle: String,
        /// Also test whether the orbit is mixed with this one.
        #[arg(long)]
        against: Option<String>,
    },
    /// Check that all pairs of cycles with periods 3..=N are mixed.
    MixedCheck {
        #[arg(long, default_value_t = 8)]
        max_period: usize,
    },
}

enum Failure {
    Usage(String),
    Numerical(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }
}

type Outcome = Result<(), Failure>;

fn usage(e: impl ToString) -> Failure {
    Failure::Usage(e.to_string())
}

fn numerical(e: impl ToString) -> Failure {
    Failure::Numerical(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Usage(m) => eprintln!("error: {m}"),
                Failure::Numerical(m) => eprintln!("numerical failure: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: Cli) -> Outcome {
    let json = cli.json;
    match cli.command {
        Command::RenderJulia(args) => render_julia(&args, json),
        Command::RenderParam(args) => render_param(&args, json),
        Command::Classify(args) => classify(&args, json),
        Command::Verdict(args) => verdict(&args, json),
        Command::SpecialParams => special(json),
        Command::FixedPoints(args) => fixed(&args, json),
        Command::Doubling { command } => doubling(command, json),
    }
}

fn emit<T: Serialize>(record: &T) -> Outcome {
    let line = serde_json::to_string(record).map_err(numerical)?;
    println!("{line}");
    Ok(())
}

fn parameter(a: Complex) -> Result<Per3Parameter, Failure> {
    Per3Parameter::new(a).map_err(usage)
}

#[derive(Serialize, Deserialize)]
struct RenderRecord {
    out: PathBuf,
    width: usize,
    height: usize,
}

fn render_config(w: &WindowArgs, default: Window) -> Result<RenderConfig, Failure> {
    let window = Window::new(
        w.center.unwrap_or(default.center),
        w.width.unwrap_or(default.width),
        w.height.unwrap_or(default.height),
    )
    .map_err(usage)?;
    let mut cfg = RenderConfig::new(window, w.size.0, w.size.1);
    cfg.budget = w.budget;
    cfg.threads = w.threads;
    cfg.palette = match w.palette {
        PaletteArg::Standard => Palette::Standard,
        PaletteArg::Mono => Palette::Mono,
    };
    Ok(cfg)
}

fn finish_render(
    img: Result<per3_core::render::ImageBuffer, per3_core::render::RenderError>,
    w: &WindowArgs,
    json: bool,
) -> Outcome {
    let img = img.map_err(usage)?;
    img.write_ppm(&w.out)
        .map_err(|e| numerical(format!("cannot write {}: {e}", w.out.display())))?;
    let record = RenderRecord {
        out: w.out.clone(),
        width: img.width,
        height: img.height,
    };
    if json {
        return emit(&record);
    }
    println!("wrote {} ({}x{})", record.out.display(), record.width, record.height);
    Ok(())
}

fn render_julia(args: &RenderJulia, json: bool) -> Outcome {
    let a = args.a.map(parameter).transpose()?;
    let f = preset(&args.preset, a).map_err(usage)?.map;
    let default = Window {
        center: Complex::new(0.0, 0.0),
        width: 4.0,
        height: 4.0,
    };
    let mut cfg = render_config(&args.window, default)?;
    cfg.chart = match args.chart {
        ChartArg::Plane => Chart::Plane,
        ChartArg::Inverse => Chart::InversePlane,
    };
    finish_render(render_dynamical(&f, &cfg), &args.window, json)
}

fn render_param(args: &RenderParam, json: bool) -> Outcome {
    let cfg = render_config(&args.window, SLICE_WINDOW)?;
    finish_render(render_parameter(&cfg), &args.window, json)
}

#[derive(Serialize, Deserialize)]
struct ClassifyRecord {
    #[serde(with = "per3_core::serde_complex")]
    a: Complex,
    #[serde(rename = "type")]
    hyperbolic_type: HyperbolicType,
    region: Region,
    critical_fates: Vec<OrbitFate>,
    evidence: Vec<ContactEvidence>,
    diagnostics: Vec<String>,
}

fn fate_text(fate: &OrbitFate) -> String {
    match fate {
        OrbitFate::Converged {
            cycle,
            period,
            phase,
            steps,
        } => {
            let pts: Vec<String> = cycle.iter().map(|p| p.to_string()).collect();
            format!("period {period} phase {phase} after {steps} steps [{}]", pts.join(", "))
        }
        OrbitFate::Unresolved { steps } => format!("unresolved after {steps} steps"),
    }
}

fn evidence_text(e: &ContactEvidence) -> String {
    let list = |s: &std::collections::BTreeSet<usize>| s.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(",");
    format!(
        "evidence: point {} phases {{{}}} sampled {{{}}} by {:?}{}",
        e.point,
        list(&e.phases_seen),
        list(&e.sampled),
        e.confirmation,
        if e.low_confidence { " low-confidence" } else { "" }
    )
}

fn classify(args: &ClassifyArgs, json: bool) -> Outcome {
    let p = parameter(args.a)?;
    let cfg = args.config();
    let t = analyze_type(&per3_map(p), &cfg);
    let r = analyze_region(p, &cfg);
    let mut diagnostics = t.diagnostics;
    diagnostics.extend(r.diagnostics);
    let record = ClassifyRecord {
        a: args.a,
        hyperbolic_type: t.kind,
        region: r.region,
        critical_fates: t.fates,
        evidence: r.evidence,
        diagnostics,
    };
    if json {
        return emit(&record);
    }
    println!("a: {}", format_complex(record.a));
    println!("type: {}", record.hyperbolic_type);
    println!("region: {}", record.region);
    for (name, fate) in ["0", "a"].iter().zip(&record.critical_fates) {
        println!("critical {name}: {}", fate_text(fate));
    }
    for e in &record.evidence {
        println!("{}", evidence_text(e));
    }
    for d in &record.diagnostics {
        println!("diagnostic: {d}");
    }
    Ok(())
}

fn verdict(args: &ClassifyArgs, json: bool) -> Outcome {
    let p = parameter(args.a)?;
    let report = sierpinski_verdict_with(p, &args.config());
    if json {
        return emit(&report);
    }
    print!("{}", report.to_text());
    Ok(())
}

fn special(json: bool) -> Outcome {
    let sp = special_parameters().map_err(numerical)?;
    if json {
        return emit(&sp);
    }
    let rows = [
        ("airplane_a", sp.airplane_a),
        ("rabbit_a", sp.rabbit_a),
        ("corabbit_a", sp.corabbit_a),
        ("cut_x", sp.cut_x),
        ("cut_xbar", sp.cut_xbar),
        ("bif_delta2", sp.bif_delta2),
        ("bif_delta3", sp.bif_delta3),
        ("zero", sp.zero),
    ];
    for (k, v) in rows {
        println!("{k}: {}", format_complex(v));
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct FixedPointsRecord {
    #[serde(with = "per3_core::serde_complex")]
    a: Complex,
    period: usize,
    points: Vec<PeriodicPoint>,
}

fn fixed(args: &FixedPointsArgs, json: bool) -> Outcome {
    let p = parameter(args.a)?;
    if args.period == 0 {
        return Err(usage("period must be at least 1"));
    }
    let points = periodic_points(&per3_map(p), args.period).map_err(|e| match e {
        PeriodicError::PeriodOutOfRange(_) | PeriodicError::DegreeCap { .. } => usage(e),
        e => numerical(e),
    })?;
    let record = FixedPointsRecord {
        a: args.a,
        period: args.period,
        points,
    };
    if json {
        return emit(&record);
    }
    for q in &record.points {
        println!(
            "{} multiplier {} {:?} multiplicity {} residual {:.1e}{}",
            q.location,
            format_complex(q.multiplier),
            q.stability,
            q.multiplicity,
            q.residual,
            if q.coalesced { " coalesced" } else { "" }
        );
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct AngleRecord {
    orbit: DoublingOrbit,
    /// Quadrant of each angle, 0 for the endpoints 0, 1/4, 1/2, 3/4.
    quadrants: Vec<u8>,
    mixed_with: Option<bool>,
}

fn doubling(command: DoublingCommand, json: bool) -> Outcome {
    match command {
        DoublingCommand::Angle { angle, against } => {
            let theta: Angle = angle.parse().map_err(usage)?;
            let o = orbit(theta);
            let mixed_with = match against {
                Some(s) => {
                    let other: Angle = s.parse().map_err(usage)?;
                    Some(is_mixed(&o, &orbit(other)).map_err(usage)?)
                }
                None => None,
            };
            let record = AngleRecord {
                quadrants: o.angles.iter().map(|&t| quadrant(t).unwrap_or(0)).collect(),
                orbit: o,
                mixed_with,
            };
            if json {
                return emit(&record);
            }
            let o = &record.orbit;
            let angles: Vec<String> = o.angles.iter().map(|t| t.to_string()).collect();
            println!("orbit: {}", angles.join(" "));
            println!("preperiod: {}", o.preperiod);
            println!("cycle length: {}", o.cycle().len());
            let q: Vec<String> = record.quadrants.iter().map(|q| q.to_string()).collect();
            println!("quadrants: {}", q.join(" "));
            if let Some(m) = record.mixed_with {
                println!("mixed: {m}");
            }
            Ok(())
        }
        DoublingCommand::MixedCheck { max_period } => {
            if !(3..=16).contains(&max_period) {
                return Err(usage("max-period must lie in 3..=16"));
            }
            let report = mixed_check(max_period);
            if json {
                return emit(&report);
            }
            println!(
                "all pairs mixed: {}, pairs tested: {}",
                report.all_mixed, report.pairs_tested
            );
            println!("cycles: {}", report.cycles);
            for (x, y) in &report.exceptions {
                println!("exception: {x} {y}");
            }
            Ok(())
        }
    }
}
