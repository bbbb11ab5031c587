use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use magbill::analysis::{
    check_b_gt_1, first_corner_turn, iterate, lemma_gate, phase_portrait, verify_lemma,
    STRONG_FIELD_MAX_PERIOD,
};
use magbill::export::{orbit_svg, portrait_svg, write_orbit_csv, write_portrait_csv};
use magbill::{BirkhoffState, SimConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EXIT_CONFIG: u8 = 2;
const EXIT_EARLY_TERMINATION: u8 = 3;
const EXIT_VERIFICATION: u8 = 4;

/// Inverse magnetic billiard in the unit square.
///
/// Boundary states are Birkhoff coordinates (s, theta): s in [0, 4) is arc
/// length counterclockwise from (0,0); theta in (0, pi) is the angle from the
/// side's counterclockwise tangent to the inward velocity. Angles are in
/// radians. A step is one application of the bounce map F (interior chord
/// plus exterior arc).
#[derive(Parser, Debug)]
#[command(name = "magbill", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Iterate one orbit and write the bounce table as CSV.
    Simulate(SimulateArgs),
    /// Iterate several orbits and write their (s, u = cos theta) points.
    Portrait(PortraitArgs),
    /// Check the rational-slope periodicity criterion for a Bottom launch.
    LemmaCheck(LemmaArgs),
    /// Report the first bounce whose arc turns a corner.
    CornerHunt(CornerHuntArgs),
    /// Check that the perpendicular launch (r, pi/2) is periodic.
    Bgt1Check(Bgt1Args),
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct FieldArgs {
    /// Magnetic field strength B (Larmor radius 1/B).
    #[arg(long = "b", value_name = "B")]
    field: Option<f64>,
    /// Larmor radius r = 1/B.
    #[arg(long)]
    radius: Option<f64>,
}

impl FieldArgs {
    fn config(&self) -> anyhow::Result<SimConfig> {
        let cfg = match (self.field, self.radius) {
            (Some(b), None) => SimConfig::from_field(b)?,
            (None, Some(r)) => SimConfig::from_radius(r)?,
            _ => bail!("give exactly one of --b and --radius"),
        };
        Ok(cfg)
    }
}

#[derive(Args, Debug)]
struct LaunchArgs {
    /// Initial arc-length coordinate in [0, 4).
    #[arg(long)]
    s0: f64,
    /// Initial angle in radians, in (0, pi).
    #[arg(long, conflicts_with = "u0", required_unless_present = "u0")]
    theta0: Option<f64>,
    /// Initial u = cos(theta) in (-1, 1).
    #[arg(long, allow_hyphen_values = true)]
    u0: Option<f64>,
}

impl LaunchArgs {
    fn state(&self) -> anyhow::Result<BirkhoffState> {
        launch(self.s0, self.theta0, self.u0)
    }
}

fn launch(s: f64, theta: Option<f64>, u: Option<f64>) -> anyhow::Result<BirkhoffState> {
    let theta = match (theta, u) {
        (Some(t), None) => t,
        (None, Some(u)) => {
            if !(u > -1.0 && u < 1.0) {
                bail!("u0 = {u} must lie in (-1, 1)");
            }
            u.acos()
        }
        _ => bail!("give exactly one of --theta0 and --u0"),
    };
    Ok(BirkhoffState::new(s, theta)?)
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// CSV output path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write an SVG drawing to this path.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Seed recorded in the outputs (and used by --random).
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    field: FieldArgs,
    #[command(flatten)]
    launch: LaunchArgs,
    /// Number of applications of F.
    #[arg(long)]
    steps: usize,
    /// Upper bound accepted for --steps.
    #[arg(long, default_value_t = 100_000)]
    max_steps: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct PortraitArgs {
    #[command(flatten)]
    field: FieldArgs,
    /// Initial s; repeat for several orbits, paired in order with --theta0 or --u0.
    #[arg(long)]
    s0: Vec<f64>,
    /// Initial angles in radians, one per --s0.
    #[arg(long, conflicts_with = "u0")]
    theta0: Vec<f64>,
    /// Initial u = cos(theta), one per --s0.
    #[arg(long, allow_hyphen_values = true)]
    u0: Vec<f64>,
    /// CSV file of initial conditions with columns s and theta, or s and u.
    #[arg(long, conflicts_with_all = ["s0", "random"])]
    init_file: Option<PathBuf>,
    /// Number of seeded random initial conditions.
    #[arg(long, conflicts_with = "s0")]
    random: Option<usize>,
    /// Number of applications of F per orbit.
    #[arg(long)]
    steps: usize,
    /// Upper bound accepted for --steps.
    #[arg(long, default_value_t = 100_000)]
    max_steps: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct LemmaArgs {
    /// Slope numerator (rise).
    #[arg(long)]
    p: u64,
    /// Slope denominator (run).
    #[arg(long)]
    q: u64,
    /// Launch point on the Bottom side, in (0, 1).
    #[arg(long)]
    s0: f64,
    /// Magnetic field strength.
    #[arg(long = "b", value_name = "B")]
    field: f64,
}

#[derive(Args, Debug)]
struct CornerHuntArgs {
    #[command(flatten)]
    field: FieldArgs,
    #[command(flatten)]
    launch: LaunchArgs,
    /// Applications of F to try before giving up.
    #[arg(long, default_value_t = 100_000)]
    max_steps: usize,
}

#[derive(Args, Debug)]
struct Bgt1Args {
    /// Larmor radius in (0, 1).
    #[arg(long)]
    radius: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Portrait(a) => portrait(a),
        Command::LemmaCheck(a) => lemma_check(a),
        Command::CornerHunt(a) => corner_hunt(a),
        Command::Bgt1Check(a) => bgt1_check(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}

fn check_steps(steps: usize, max_steps: usize) -> anyhow::Result<()> {
    if steps == 0 {
        bail!("--steps must be at least 1");
    }
    if steps > max_steps {
        bail!("--steps {steps} exceeds --max-steps {max_steps}");
    }
    Ok(())
}

/// Writes everything at once, to a file or standard output.
fn emit(path: Option<&Path>, bytes: &[u8]) -> anyhow::Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = BufWriter::new(io::stdout().lock());
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

fn write_svg(path: &Path, svg: &str) -> anyhow::Result<()> {
    std::fs::write(path, svg).with_context(|| format!("writing {}", path.display()))
}

fn simulate(a: SimulateArgs) -> anyhow::Result<u8> {
    check_steps(a.steps, a.max_steps)?;
    let cfg = a.field.config()?.with_max_steps(a.max_steps);
    let trace = iterate(a.launch.state()?, a.steps, &cfg);
    let mut csv = Vec::new();
    write_orbit_csv(&mut csv, &trace, a.output.seed)?;
    emit(a.output.out.as_deref(), &csv)?;
    if let Some(svg) = &a.output.svg {
        write_svg(svg, &orbit_svg(&trace, a.output.seed))?;
    }
    if trace.termination.is_completed() {
        Ok(0)
    } else {
        eprintln!("orbit stopped early: {}", trace.termination);
        Ok(EXIT_EARLY_TERMINATION)
    }
}

fn read_init_file(path: &Path) -> anyhow::Result<Vec<BirkhoffState>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let headers = reader.headers()?.clone();
    let column = |name: &str| headers.iter().position(|h| h == name);
    let s_col = column("s").context("initial-condition file needs an `s` column")?;
    let (theta_col, u_col) = (column("theta"), column("u"));
    if theta_col.is_some() == u_col.is_some() {
        bail!("initial-condition file needs exactly one of the columns `theta` and `u`");
    }
    let mut states = Vec::new();
    for (line, row) in reader.records().enumerate() {
        let row = row?;
        let field = |i: usize| -> anyhow::Result<f64> {
            row.get(i)
                .context("missing value")?
                .parse::<f64>()
                .with_context(|| format!("row {}: bad number", line + 1))
        };
        let s = field(s_col)?;
        let theta = theta_col.map(field).transpose()?;
        let u = u_col.map(field).transpose()?;
        states.push(launch(s, theta, u).with_context(|| format!("row {}", line + 1))?);
    }
    Ok(states)
}

fn random_states(count: usize, seed: u64) -> Vec<BirkhoffState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let s = rng.gen_range(0.0..4.0);
            let theta = rng.gen_range(0.0..std::f64::consts::PI);
            BirkhoffState::new(s, theta).expect("sampled inside the valid range")
        })
        .collect()
}

fn portrait_initials(a: &PortraitArgs) -> anyhow::Result<Vec<BirkhoffState>> {
    if let Some(path) = &a.init_file {
        return read_init_file(path);
    }
    if let Some(count) = a.random {
        return Ok(random_states(count, a.output.seed));
    }
    let angles = if a.u0.is_empty() {
        a.theta0.len()
    } else {
        a.u0.len()
    };
    if a.s0.len() != angles {
        bail!(
            "got {} values of --s0 but {angles} of --theta0/--u0",
            a.s0.len()
        );
    }
    a.s0.iter()
        .enumerate()
        .map(|(i, &s)| {
            if a.u0.is_empty() {
                launch(s, Some(a.theta0[i]), None)
            } else {
                launch(s, None, Some(a.u0[i]))
            }
        })
        .collect()
}

fn portrait(a: PortraitArgs) -> anyhow::Result<u8> {
    check_steps(a.steps, a.max_steps)?;
    let cfg = a.field.config()?.with_max_steps(a.max_steps);
    let initials = portrait_initials(&a)?;
    if initials.is_empty() {
        bail!("no initial conditions given");
    }
    let portrait = phase_portrait(&initials, a.steps, &cfg);
    let mut csv = Vec::new();
    write_portrait_csv(&mut csv, &portrait, a.output.seed)?;
    emit(a.output.out.as_deref(), &csv)?;
    if let Some(svg) = &a.output.svg {
        write_svg(svg, &portrait_svg(&portrait, a.output.seed))?;
    }
    let truncated: Vec<String> = portrait
        .terminations
        .iter()
        .enumerate()
        .filter(|(_, t)| !t.is_completed())
        .map(|(id, t)| format!("orbit {id}: {t}"))
        .collect();
    if truncated.is_empty() {
        Ok(0)
    } else {
        eprintln!("orbits stopped early: {}", truncated.join("; "));
        Ok(EXIT_EARLY_TERMINATION)
    }
}

fn lemma_check(a: LemmaArgs) -> anyhow::Result<u8> {
    let verdict = lemma_gate(a.s0, a.p, a.q, a.field)?;
    println!("slope p/q = {}/{}", verdict.p, verdict.q);
    println!("s0 = {}", verdict.s0);
    println!("field = {}", verdict.field);
    println!("lattice distance = {:e}", verdict.lattice_distance);
    println!("margin = {:e}", verdict.margin);
    println!("crossing margin = {:e}", verdict.crossing_margin);
    println!("predicted period = {}", verdict.predicted_period);
    println!("shifts cancel = {}", verdict.shifts_cancel);
    if !verdict.passes {
        println!("gate: fails");
        return Ok(1);
    }
    println!("gate: passes");
    let check = verify_lemma(&verdict)?;
    match check.minimal_period {
        Some(p) => println!("simulated minimal period = {p}"),
        None => println!("simulated minimal period = none"),
    }
    println!("max deviation = {:e}", check.deviation);
    println!("corner turns = {}", check.corner_turns);
    println!("termination = {}", check.termination);
    if check.periodic && check.corner_turns == 0 {
        println!("verified: yes");
        Ok(0)
    } else {
        println!("verified: no");
        Ok(EXIT_VERIFICATION)
    }
}

fn corner_hunt(a: CornerHuntArgs) -> anyhow::Result<u8> {
    let cfg = a.field.config()?;
    let hunt = first_corner_turn(a.launch.state()?, &cfg, a.max_steps);
    match hunt.first_turn {
        Some(n) => println!("first corner turn at step {n}"),
        None => println!("none within {}", hunt.steps_run),
    }
    if hunt.termination.is_completed() {
        Ok(0)
    } else {
        println!("termination = {}", hunt.termination);
        Ok(EXIT_EARLY_TERMINATION)
    }
}

fn bgt1_check(a: Bgt1Args) -> anyhow::Result<u8> {
    let check = check_b_gt_1(a.radius)?;
    match check.period {
        Some(p) => {
            println!("periodic: yes");
            println!("period = {}", p.period);
            println!("deviation = {:e}", p.deviation);
        }
        None => {
            println!("periodic: no (searched up to {STRONG_FIELD_MAX_PERIOD} steps)");
        }
    }
    if !check.termination.is_completed() {
        println!("termination = {}", check.termination);
        return Ok(EXIT_EARLY_TERMINATION);
    }
    Ok(if check.periodic { 0 } else { EXIT_VERIFICATION })
}
