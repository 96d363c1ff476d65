//! `robinplate`: batch front end for ball spectra, α-sweeps, Ritz solves,
//! isoperimetric and Steklov checks, trial-profile dumps and the grid
//! verifier. Data goes to stdout (or `--output`); timings go to stderr.
//!
//! Exit codes: 0 success (for `verify`: every check passes), 1 computational
//! failure or failed check, 2 usage error.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use robinplate::ball::{self, BallParams};
use robinplate::ritz::{self, Domain2D, RitzOptions, SweepRow};
use robinplate::verify::{self, GridSpec};
use robinplate::{io as rio, Error, TrialProfile};

#[derive(Parser)]
#[command(name = "robinplate", version, about = "Spectra of the Robin plate operator Δ² − τΔ")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lowest radial modes of the unit ball, as CSV.
    Ball(BallArgs),
    /// Λ₁ and Λ₂ of the unit ball along a range of Robin parameters.
    Sweep(SweepArgs),
    /// Run the inequality checks over parameter grids (JSON lines).
    Verify(VerifyArgs),
    /// Rayleigh–Ritz eigenvalues of a planar domain.
    Ritz(RitzArgs),
    /// Compare Λ₂ of a planar domain with the equal-area disk.
    Iso(IsoArgs),
    /// Second Steklov eigenvalue of a planar domain versus the equal-area disk.
    Steklov(SteklovArgs),
    /// Dump the ball's trial profile ρ and the integrand N[ρ].
    Profile(ProfileArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct Output {
    /// Write to this file instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BallParamArgs {
    #[arg(long, default_value_t = 2)]
    dim: u32,
    #[arg(long, allow_negative_numbers = true)]
    tau: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    alpha: f64,
}

#[derive(Args)]
struct BallArgs {
    #[command(flatten)]
    params: BallParamArgs,
    /// Largest angular degree searched.
    #[arg(long, default_value_t = 4)]
    lmax: u32,
    /// Number of radial modes listed.
    #[arg(long, default_value_t = 2)]
    count: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value_t = 2)]
    dim: u32,
    #[arg(long)]
    tau: f64,
    #[arg(long, allow_negative_numbers = true)]
    alpha_from: f64,
    #[arg(long, allow_negative_numbers = true)]
    alpha_to: f64,
    #[arg(long, default_value_t = 50)]
    points: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct VerifyArgs {
    /// `all` or one check id.
    #[arg(long, default_value = "all")]
    suite: String,
    /// TOML (or `.json`) grid overrides.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct RitzOpts {
    /// Total polynomial degree of the trial space.
    #[arg(long, default_value_t = 12)]
    degree: usize,
}

impl RitzOpts {
    fn options(&self) -> RitzOptions {
        RitzOptions::with_degree(self.degree)
    }
}

#[derive(Args)]
struct RitzArgs {
    /// Domain spec file (TOML, or JSON with a `.json` extension).
    #[arg(long)]
    domain: PathBuf,
    #[arg(long)]
    tau: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    alpha: f64,
    #[arg(long, default_value_t = 6)]
    count: usize,
    #[command(flatten)]
    ritz: RitzOpts,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct IsoArgs {
    #[arg(long)]
    domain: PathBuf,
    #[arg(long)]
    tau: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    alpha: f64,
    #[command(flatten)]
    ritz: RitzOpts,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct SteklovArgs {
    #[arg(long)]
    domain: PathBuf,
    #[arg(long)]
    tau: f64,
    #[command(flatten)]
    ritz: RitzOpts,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct ProfileArgs {
    #[command(flatten)]
    params: BallParamArgs,
    /// Radii are sampled uniformly on (0, r_max].
    #[arg(long, default_value_t = 10.0)]
    r_max: f64,
    #[arg(long, default_value_t = 201)]
    points: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(flatten)]
    out: Output,
}

/// Failure classes mapped to exit codes.
enum Failure {
    Usage(String),
    Compute(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Compute(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Compute(e.to_string())
    }
}

type CmdResult = Result<ExitCode, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn check_tau(tau: f64) -> Result<(), Failure> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(usage(format!("--tau must be positive and finite, got {tau}")))
    }
}

fn check_ball(a: &BallParamArgs) -> Result<BallParams, Failure> {
    check_tau(a.tau)?;
    if a.dim < 2 {
        return Err(usage(format!("--dim must be at least 2, got {}", a.dim)));
    }
    if !a.alpha.is_finite() {
        return Err(usage("--alpha must be finite"));
    }
    BallParams::new(a.dim, a.tau, a.alpha).map_err(|e| usage(e.to_string()))
}

fn load_domain(path: &Path) -> Result<Domain2D, Failure> {
    Domain2D::load(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn open_output(out: &Output) -> Result<Box<dyn Write>, Failure> {
    Ok(match &out.output {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit_json<T: Serialize>(out: &Output, value: &T) -> CmdResult {
    let mut w = open_output(out)?;
    rio::write_json_line(&mut w, value)?;
    w.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_ball(a: &BallArgs) -> CmdResult {
    let p = check_ball(&a.params)?;
    if a.lmax < 1 || a.count < 1 {
        return Err(usage("--lmax and --count must be at least 1"));
    }
    let modes = ball::spectrum(&p, a.lmax, a.count)?;
    let mut w = open_output(&a.out)?;
    match a.format {
        Format::Csv => rio::write_modes(&mut w, &p, &modes)?,
        Format::Json => rio::write_json_line(&mut w, &modes)?,
    }
    w.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(a: &SweepArgs) -> CmdResult {
    check_tau(a.tau)?;
    if a.dim < 2 || a.points < 2 || !a.alpha_from.is_finite() || !a.alpha_to.is_finite() {
        return Err(usage("sweep needs --dim ≥ 2, --points ≥ 2 and finite α bounds"));
    }
    let (lo, hi) = if a.alpha_from <= a.alpha_to { (a.alpha_from, a.alpha_to) } else { (a.alpha_to, a.alpha_from) };
    let n = a.points - 1;
    let alphas: Vec<f64> = (0..=n).map(|i| if i == n { hi } else { lo + (hi - lo) * i as f64 / n as f64 }).collect();
    let rows: Vec<robinplate::Result<SweepRow>> = alphas
        .par_iter()
        .map(|&alpha| {
            let p = BallParams::new(a.dim, a.tau, alpha)?;
            let modes = ball::spectrum(&p, 4, 2)?;
            Ok(SweepRow { alpha, lambda1: modes[0].lambda, lambda2: modes[1].lambda })
        })
        .collect();
    let rows = rows.into_iter().collect::<robinplate::Result<Vec<_>>>()?;
    let mut w = open_output(&a.out)?;
    match a.format {
        Format::Csv => rio::write_sweep(&mut w, &rows)?,
        Format::Json => rio::write_json_line(&mut w, &rows)?,
    }
    w.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(a: &VerifyArgs) -> CmdResult {
    let grid = match &a.config {
        Some(p) => GridSpec::load(p).map_err(|e| usage(format!("{}: {e}", p.display())))?,
        None => GridSpec::default(),
    };
    let ids: Vec<&str> = if a.suite == "all" {
        verify::LEMMA_IDS.to_vec()
    } else if verify::LEMMA_IDS.contains(&a.suite.as_str()) {
        vec![a.suite.as_str()]
    } else {
        return Err(usage(format!("unknown check {:?}; known: all, {}", a.suite, verify::LEMMA_IDS.join(", "))));
    };
    let mut w = open_output(&a.out)?;
    let mut all_pass = true;
    for id in ids {
        let r = verify::run_suite(id, &grid)?;
        all_pass &= r.pass;
        eprintln!("{id}: {} in {:.3} s", if r.pass { "pass" } else { "FAIL" }, r.elapsed.as_secs_f64());
        rio::write_json_line(&mut w, &r)?;
    }
    w.flush()?;
    Ok(if all_pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_ritz(a: &RitzArgs) -> CmdResult {
    check_tau(a.tau)?;
    if a.count < 1 {
        return Err(usage("--count must be at least 1"));
    }
    let dom = load_domain(&a.domain)?;
    let start = Instant::now();
    let sys = ritz::assemble(&dom, a.tau, a.alpha, &a.ritz.options())?;
    let sol = sys.solve(a.count)?;
    eprintln!("ritz: {} basis functions, rank {}, {:.3} s", sys.size(), sol.rank, start.elapsed().as_secs_f64());
    let mut w = open_output(&a.out)?;
    match a.format {
        Format::Csv => rio::write_ritz(&mut w, &sol)?,
        Format::Json => {
            #[derive(Serialize)]
            struct Summary<'a> {
                eigenvalues: &'a [f64],
                residuals: &'a [f64],
                orthonormality_error: f64,
                rank: usize,
            }
            let s = Summary { eigenvalues: &sol.eigenvalues, residuals: &sol.residuals, orthonormality_error: sol.orthonormality_error, rank: sol.rank };
            rio::write_json_line(&mut w, &s)?
        }
    }
    w.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_iso(a: &IsoArgs) -> CmdResult {
    check_tau(a.tau)?;
    let dom = load_domain(&a.domain)?;
    let rec = ritz::isoperimetric_check(&dom, a.tau, a.alpha, &a.ritz.options())?;
    emit_json(&a.out, &rec)
}

fn cmd_steklov(a: &SteklovArgs) -> CmdResult {
    check_tau(a.tau)?;
    let dom = load_domain(&a.domain)?;
    let sigma2 = ritz::steklov_sigma2(&dom, a.tau, &a.ritz.options())?;
    let r = dom.equal_area_radius();
    #[derive(Serialize)]
    struct Summary {
        tau: f64,
        radius: f64,
        sigma2_domain: f64,
        sigma2_ball: f64,
        margin: f64,
    }
    let ball = a.tau / r;
    emit_json(&a.out, &Summary { tau: a.tau, radius: r, sigma2_domain: sigma2, sigma2_ball: ball, margin: ball - sigma2 })
}

fn cmd_profile(a: &ProfileArgs) -> CmdResult {
    let p = check_ball(&a.params)?;
    if !(a.r_max > 0.0) || a.points < 2 {
        return Err(usage("--r-max must be positive and --points at least 2"));
    }
    let t = TrialProfile::new(&p)?;
    let rows = t.table(a.r_max, a.points)?;
    let mut w = open_output(&a.out)?;
    match a.format {
        Format::Csv => rio::write_profile(&mut w, &rows)?,
        Format::Json => rio::write_json_line(&mut w, &rows)?,
    }
    w.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn configure_threads() -> Result<(), Failure> {
    if let Ok(v) = std::env::var("ROBINPLATE_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| usage(format!("ROBINPLATE_THREADS must be a positive integer, got {v:?}")))?;
        if n == 0 {
            return Err(usage("ROBINPLATE_THREADS must be positive"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure::Compute(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: &Cli) -> CmdResult {
    configure_threads()?;
    match &cli.command {
        Command::Ball(a) => cmd_ball(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Ritz(a) => cmd_ritz(a),
        Command::Iso(a) => cmd_iso(a),
        Command::Steklov(a) => cmd_steklov(a),
        Command::Profile(a) => cmd_profile(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
