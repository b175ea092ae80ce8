//! Command-line front end for the stability library.
//!
//! Five subcommands cover the workflow end to end: `check` runs the
//! closed-form criteria on one source, `spectrum` solves the Bloch bands,
//! `scan` maps verdicts over an `(α, β)` grid, `boundaries` traces the
//! stability boundaries of the cosine family, and `simulate` time-steps
//! the reaction-diffusion equation against the spectral prediction.
//!
//! Every CSV artifact starts with `# key = value` lines recording the
//! effective configuration, so a run can be reproduced from its output
//! alone. Exit codes: 0 success, 1 usage or runtime error, 2 inconclusive
//! verdict, 3 measured instability.

mod config;
mod input;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use hillstab::criteria::{self, KatoScaling, Verdict};
use hillstab::mathieu::{
    beta_numeric_at, fluctuation_boundary, fluctuation_curve, kato_boundary, kato_curve,
    numeric_curve, region_scan, series_boundary, BoundaryKind, QConvention, StabilityBoundary,
};
use hillstab::plot::stability_svg;
use hillstab::sim::{
    allen_cahn_problem, fit_decay_rate, gaussian_bump, seeded_noise, SimConfig, SimMode,
    Simulation, DEFAULT_N_PERIODS, SAMPLES_PER_PERIOD,
};
use hillstab::spectrum::{band_structure, lambda00};
use hillstab::{Error, NormConvention};

use config::{Effective, Settings};

#[derive(Parser)]
#[command(
    name = "hillstab",
    version,
    about = "A priori linear stability of periodic steady states of reaction-diffusion equations"
)]
struct Cli {
    /// Worker threads for scans and boundary solves (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,

    /// Flat `key = value` file supplying defaults; flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form stability criteria for one source term.
    Check(CheckArgs),
    /// Lowest Bloch bands over the first Brillouin zone.
    Spectrum(SpectrumArgs),
    /// Verdict map over an (alpha, beta) parameter grid.
    Scan(ScanArgs),
    /// Stability boundaries of the cosine family, closed-form and numeric.
    Boundaries(BoundariesArgs),
    /// Time-step the reaction-diffusion equation against the prediction.
    Simulate(SimulateArgs),
}

/// Source selection shared by `check` and `spectrum`.
#[derive(Args)]
struct SourceArgs {
    /// Cosine source -A + B cos(2Kx), given as three values A B K.
    #[arg(long, num_args = 3, value_names = ["A", "B", "K"], conflicts_with = "csv")]
    mathieu: Option<Vec<f64>>,

    /// File of x,value samples on a uniform grid; the period is n*dx.
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    source: SourceArgs,

    /// Norm convention for the fluctuation inequality: mean or integral.
    #[arg(long)]
    convention: Option<NormConvention>,

    /// Also write the report as pretty JSON.
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    source: SourceArgs,

    /// Number of lowest bands to report.
    #[arg(long)]
    bands: Option<usize>,

    /// Bloch wavenumbers sampled across the zone (odd, so p = 0 is hit).
    #[arg(long)]
    n_p: Option<usize>,

    /// Band CSV destination.
    #[arg(long, value_name = "FILE", default_value = "spectrum.csv")]
    output: PathBuf,
}

#[derive(Args)]
struct ScanArgs {
    /// Source wavenumber kappa.
    #[arg(long)]
    kappa: Option<f64>,

    /// Largest alpha on the grid (default 2 kappa^2).
    #[arg(long)]
    alpha_max: Option<f64>,

    /// Largest beta on the grid (default 4 kappa^2).
    #[arg(long)]
    beta_max: Option<f64>,

    /// Grid points per axis.
    #[arg(long)]
    grid: Option<usize>,

    /// Norm convention for the fluctuation inequality.
    #[arg(long)]
    convention: Option<NormConvention>,

    /// Scan CSV destination.
    #[arg(long, value_name = "FILE", default_value = "scan.csv")]
    output: PathBuf,
}

#[derive(Args)]
struct BoundariesArgs {
    /// Source wavenumber kappa.
    #[arg(long)]
    kappa: Option<f64>,

    /// Largest alpha sampled (default 2 kappa^2).
    #[arg(long)]
    alpha_max: Option<f64>,

    /// Largest beta sampled (default 4 kappa^2).
    #[arg(long)]
    beta_max: Option<f64>,

    /// Samples per curve.
    #[arg(long)]
    points: Option<usize>,

    /// q convention for the series boundary: direct or standard.
    #[arg(long)]
    q_convention: Option<QConvention>,

    /// Combined kind,alpha,beta CSV destination.
    #[arg(long, value_name = "FILE", default_value = "boundaries.csv")]
    output: PathBuf,

    /// SVG chart destination.
    #[arg(long, value_name = "FILE", default_value = "boundaries.svg")]
    output_svg: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    /// Linearization parameters alpha beta kappa (same model as
    /// --allen-cahn; the mode flag picks the equation).
    #[arg(long, num_args = 3, value_names = ["A", "B", "K"], conflicts_with = "allen_cahn")]
    mathieu: Option<Vec<f64>>,

    /// Allen-Cahn steady-state parameters alpha beta kappa.
    #[arg(long, num_args = 3, value_names = ["A", "B", "K"])]
    allen_cahn: Option<Vec<f64>>,

    /// nonlinear or linearized. Defaults to nonlinear with
    /// --from-steady-state and linearized otherwise.
    #[arg(long)]
    mode: Option<SimMode>,

    /// Start exactly on the steady state and measure residual drift
    /// instead of a decay rate.
    #[arg(long)]
    from_steady_state: bool,

    /// Domain length in source periods (power of two).
    #[arg(long)]
    n_periods: Option<usize>,

    /// Time step.
    #[arg(long)]
    dt: Option<f64>,

    /// Horizon; defaults to 10 for drift runs and to a span long enough
    /// for two decades of decay otherwise. Config key: T.
    #[arg(long)]
    t_final: Option<f64>,

    /// Seed for a rough noise perturbation instead of the Gaussian bump.
    #[arg(long)]
    seed: Option<u64>,

    /// Perturbation amplitude.
    #[arg(long)]
    amplitude: Option<f64>,

    /// Norm-history CSV destination.
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,

    /// Final-field snapshot CSV destination.
    #[arg(long, value_name = "FILE")]
    snapshot: Option<PathBuf>,
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

fn run(cli: Cli) -> Result<u8> {
    let settings = Settings::load(cli.config.as_deref())?;
    if let Some(jobs) = cli.jobs.or(settings.usize("jobs")?) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("configuring worker threads")?;
    }
    match cli.command {
        Command::Check(args) => cmd_check(args, &settings),
        Command::Spectrum(args) => cmd_spectrum(args, &settings),
        Command::Scan(args) => cmd_scan(args, &settings),
        Command::Boundaries(args) => cmd_boundaries(args, &settings),
        Command::Simulate(args) => cmd_simulate(args, &settings),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn flag(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "fail"
    }
}

fn cmd_check(args: CheckArgs, settings: &Settings) -> Result<u8> {
    let mut eff = Effective::new();
    let source = input::resolve_source(
        args.source.mathieu.as_deref(),
        args.source.csv.as_deref(),
        settings,
        &mut eff,
    )?;
    let convention = match args.convention {
        Some(c) => c,
        None => match settings.str("convention") {
            Some(raw) => raw.parse()?,
            None => NormConvention::Mean,
        },
    };
    eff.set("convention", convention);

    let report = criteria::evaluate(&source, convention);
    let scaling = match report.kato_scaling {
        KatoScaling::Length => "length",
        KatoScaling::InverseLength => "inverse-length",
    };

    print!("{}", eff.header());
    println!("mean(s)      = {:+.12e}", report.mean_s);
    println!("max(s)       = {:+.12e}", report.s0);
    println!(
        "|ds|^2       = {:+.12e}  ({} convention)",
        report.fluct_norm_sq, report.convention
    );
    println!("kappa^2      = {:+.12e}", report.kappa_sq);
    println!();
    println!(
        "negativity    {}  margin {:+.6e}",
        flag(report.negativity_pass),
        report.margins.negativity
    );
    println!(
        "peak          {}  margin {:+.6e}",
        flag(report.peak_pass),
        report.margins.peak
    );
    println!(
        "fluctuation   {}  margin {:+.6e}",
        flag(report.fluct_pass),
        report.margins.fluct
    );
    println!(
        "kato          {}  bound  {:+.6e}  ({scaling} scaling)",
        flag(report.kato_pass),
        report.kato_bound
    );
    println!();
    println!("verdict: {}", report.verdict);

    let json = serde_json::to_string_pretty(&report).context("serializing report")?;
    println!("{json}");
    if let Some(path) = &args.output {
        write_file(path, &format!("{json}\n"))?;
    }

    Ok(if report.verdict.is_conclusive() { 0 } else { 2 })
}

fn cmd_spectrum(args: SpectrumArgs, settings: &Settings) -> Result<u8> {
    let mut eff = Effective::new();
    let source = input::resolve_source(
        args.source.mathieu.as_deref(),
        args.source.csv.as_deref(),
        settings,
        &mut eff,
    )?;
    let bands = args.bands.or(settings.usize("bands")?).unwrap_or(5);
    let n_p = args.n_p.or(settings.usize("n_p")?).unwrap_or(33);
    eff.set("bands", bands);
    eff.set("n_p", n_p);

    let structure = band_structure(&source, bands, n_p)?;
    let ground = lambda00(&source)?;
    let (p_min, minimum) = structure.minimum();

    let mut csv = eff.header();
    let mut body = Vec::new();
    structure.write_csv(&mut body)?;
    csv.push_str(std::str::from_utf8(&body).expect("CSV output is ASCII"));
    write_file(&args.output, &csv)?;

    print!("{}", eff.header());
    println!(
        "{} bands at {} zone samples, half-width {}",
        bands, n_p, structure.half_width
    );
    println!(
        "lambda00 = {:+.12e}  (certified to {:.1e} at half-width {})",
        ground.value, ground.certificate.tol, ground.certificate.half_width
    );
    println!("band minimum = {:+.12e} at p = {:+.6e}", minimum, p_min);
    println!("wrote {}", args.output.display());
    Ok(0)
}

fn cmd_scan(args: ScanArgs, settings: &Settings) -> Result<u8> {
    let kappa = args.kappa.or(settings.f64("kappa")?).unwrap_or(1.0);
    let kappa_sq = kappa * kappa;
    let alpha_max = args
        .alpha_max
        .or(settings.f64("alpha_max")?)
        .unwrap_or(2.0 * kappa_sq);
    let beta_max = args
        .beta_max
        .or(settings.f64("beta_max")?)
        .unwrap_or(4.0 * kappa_sq);
    let grid = args.grid.or(settings.usize("grid")?).unwrap_or(81);
    if grid < 2 {
        bail!("scan grid needs at least 2 points per axis, got {grid}");
    }
    let convention = match args.convention {
        Some(c) => c,
        None => match settings.str("convention") {
            Some(raw) => raw.parse()?,
            None => NormConvention::Mean,
        },
    };

    let mut eff = Effective::new();
    eff.set("alpha_max", alpha_max);
    eff.set("beta_max", beta_max);
    eff.set("convention", convention);
    eff.set("grid", grid);
    eff.set("kappa", kappa);

    // Alphas start strictly above zero so every cell has a defined decay
    // scale; betas include both endpoints.
    let alphas: Vec<f64> = (0..grid)
        .map(|i| (i + 1) as f64 / grid as f64 * alpha_max)
        .collect();
    let betas: Vec<f64> = (0..grid)
        .map(|j| j as f64 / (grid - 1) as f64 * beta_max)
        .collect();

    let started = Instant::now();
    let table = region_scan(&alphas, &betas, kappa, convention)?;
    let elapsed = started.elapsed().as_secs_f64();

    let mut csv = eff.header();
    let mut body = Vec::new();
    table.write_csv(&mut body)?;
    csv.push_str(std::str::from_utf8(&body).expect("CSV output is ASCII"));
    write_file(&args.output, &csv)?;

    let mut counts = [0usize; 4];
    let mut failed = 0usize;
    let mut min_conclusive: Option<(f64, f64, f64)> = None;
    for cell in &table.cells {
        counts[match cell.verdict {
            Verdict::StableByNegativity => 0,
            Verdict::StableByFluctuation => 1,
            Verdict::StableByKato => 2,
            Verdict::Inconclusive => 3,
        }] += 1;
        if cell.error.is_some() {
            failed += 1;
        }
        if cell.verdict.is_conclusive() {
            if let Some(lam) = cell.lambda00 {
                if min_conclusive.map_or(true, |(m, _, _)| lam < m) {
                    min_conclusive = Some((lam, cell.alpha, cell.beta));
                }
            }
        }
    }

    print!("{}", eff.header());
    println!(
        "{} cells in {:.1}s: negativity {}, fluctuation {}, kato {}, inconclusive {}",
        table.cells.len(),
        elapsed,
        counts[0],
        counts[1],
        counts[2],
        counts[3]
    );
    if failed > 0 {
        println!("{failed} cells failed to certify; see the error column");
    }
    if let Some((lam, a, b)) = min_conclusive {
        println!(
            "min lambda00 over conclusive cells = {:+.6e} at alpha = {:.6}, beta = {:.6}",
            lam, a, b
        );
    }
    println!("wrote {}", args.output.display());
    Ok(0)
}

fn cmd_boundaries(args: BoundariesArgs, settings: &Settings) -> Result<u8> {
    let kappa = args.kappa.or(settings.f64("kappa")?).unwrap_or(1.0);
    let kappa_sq = kappa * kappa;
    let alpha_max = args
        .alpha_max
        .or(settings.f64("alpha_max")?)
        .unwrap_or(2.0 * kappa_sq);
    let beta_max = args
        .beta_max
        .or(settings.f64("beta_max")?)
        .unwrap_or(4.0 * kappa_sq);
    let points = args.points.or(settings.usize("points")?).unwrap_or(41);
    if points < 2 {
        bail!("boundary curves need at least 2 points, got {points}");
    }
    let q_convention = match args.q_convention {
        Some(c) => c,
        None => match settings.str("q_convention") {
            Some(raw) => raw.parse()?,
            None => QConvention::Standard,
        },
    };

    let mut eff = Effective::new();
    eff.set("alpha_max", alpha_max);
    eff.set("beta_max", beta_max);
    eff.set("kappa", kappa);
    eff.set("points", points);
    eff.set("q_convention", q_convention);

    let alphas: Vec<f64> = (0..points)
        .map(|i| i as f64 / (points - 1) as f64 * alpha_max)
        .collect();
    let betas: Vec<f64> = (0..points)
        .map(|j| j as f64 / (points - 1) as f64 * beta_max)
        .collect();

    let fluct = fluctuation_curve(&alphas, kappa);
    let kato = kato_curve(&alphas, kappa);

    // The series boundary is only quoted while its own truncation gate
    // holds; the curve stops at the first beta past that point.
    let mut series_points = Vec::new();
    for &b in &betas {
        match series_boundary(b, kappa, q_convention) {
            Ok(a) => series_points.push((a, b)),
            Err(Error::SeriesTruncation { .. }) => break,
            Err(e) => return Err(e.into()),
        }
    }
    let series_len = series_points.len();
    let series = StabilityBoundary {
        kind: BoundaryKind::Series,
        points: series_points,
    };

    let numeric = numeric_curve(&betas, kappa)?;

    let mut csv = eff.header();
    csv.push_str("kind,alpha,beta\n");
    let mut body = Vec::new();
    fluct.write_csv(&mut body)?;
    kato.write_csv(&mut body)?;
    series.write_csv(&mut body)?;
    numeric.write_csv(&mut body)?;
    csv.push_str(std::str::from_utf8(&body).expect("CSV output is ASCII"));
    write_file(&args.output, &csv)?;

    let svg = stability_svg(&[&fluct, &kato, &series], &numeric, kappa, alpha_max, beta_max)?;
    write_file(&args.output_svg, &svg)?;

    print!("{}", eff.header());
    if series_len < points {
        println!(
            "series curve kept {series_len} of {points} points (truncation gate hit at beta = {:.6})",
            betas[series_len]
        );
    }
    println!(
        "at alpha = kappa^2: beta_kato = {:.6}, beta_fluct = {:.6}, beta_numeric = {:.6}",
        kato_boundary(kappa_sq, kappa),
        fluctuation_boundary(kappa_sq, kappa),
        beta_numeric_at(kappa_sq, kappa)?
    );
    println!("wrote {}, {}", args.output.display(), args.output_svg.display());
    Ok(0)
}

fn cmd_simulate(args: SimulateArgs, settings: &Settings) -> Result<u8> {
    let params = args.mathieu.as_deref().or(args.allen_cahn.as_deref());
    let (alpha, beta, kappa) = match params {
        Some(p) => (p[0], p[1], p[2]),
        None => match (
            settings.f64("alpha")?,
            settings.f64("beta")?,
            settings.f64("kappa")?,
        ) {
            (Some(a), Some(b), Some(k)) => (a, b, k),
            _ => bail!("no model given: use --mathieu A B K, --allen-cahn A B K, or config keys"),
        },
    };
    let n_periods = args
        .n_periods
        .or(settings.usize("n_periods")?)
        .unwrap_or(DEFAULT_N_PERIODS);

    let mode = match args.mode {
        Some(m) => Some(m),
        None => settings.str("mode").map(str::parse).transpose()?,
    };
    let mode = match (args.from_steady_state, mode) {
        (true, Some(SimMode::Linearized)) => {
            bail!("--from-steady-state starts on the steady state itself; the linearized equation evolves the deviation and has no such start. Drop one of the two.")
        }
        (true, _) => SimMode::Nonlinear,
        (false, Some(m)) => m,
        (false, None) => SimMode::Linearized,
    };
    let drift_run = args.from_steady_state;

    let problem = allen_cahn_problem(alpha, beta, kappa, n_periods)?;
    let ground = lambda00(problem.linearized_source())?;
    let lam = ground.value;

    let dt = args
        .dt
        .or(settings.f64("dt")?)
        .unwrap_or(if drift_run { 0.005 } else { 0.01 });
    // Two decades of e-folding at the predicted rate, clamped to a window
    // that is generous for fast decay and affordable for slow.
    let auto_horizon = (2.0 * 100f64.ln() / lam.abs().max(0.05)).clamp(14.0, 30.0);
    let t_final = args
        .t_final
        .or(settings.f64("T")?)
        .unwrap_or(if drift_run { 10.0 } else { auto_horizon });
    let amplitude = args
        .amplitude
        .or(settings.f64("amplitude")?)
        .unwrap_or(1e-4);
    let seed = match args.seed {
        Some(s) => Some(s),
        None => settings.u64("seed")?,
    };

    let mut eff = Effective::new();
    eff.set("T", t_final);
    eff.set("alpha", alpha);
    eff.set("amplitude", amplitude);
    eff.set("beta", beta);
    eff.set("dt", dt);
    eff.set("kappa", kappa);
    eff.set("mode", mode);
    eff.set("n_periods", n_periods);
    if let Some(s) = seed {
        eff.set("seed", s);
    }

    let n = n_periods * SAMPLES_PER_PERIOD;
    let perturbation = if drift_run {
        vec![0.0; n]
    } else if let Some(s) = seed {
        seeded_noise(n, amplitude, s)
    } else {
        gaussian_bump(&problem, SAMPLES_PER_PERIOD, amplitude)
    };

    let mut sim_config = SimConfig::new(mode, t_final);
    sim_config.dt = Some(dt);
    let mut sim = Simulation::new(&problem, &perturbation, &sim_config)?;

    print!("{}", eff.header());
    println!("lambda00 = {:+.12e}", lam);

    let write_outputs = |sim: &Simulation<f64>, eff: &Effective| -> Result<()> {
        if let Some(path) = &args.output {
            let mut csv = eff.header();
            let mut body = Vec::new();
            sim.write_history_csv(&mut body)?;
            csv.push_str(std::str::from_utf8(&body).expect("CSV output is ASCII"));
            write_file(path, &csv)?;
            println!("wrote {}", path.display());
        }
        if let Some(path) = &args.snapshot {
            let mut csv = eff.header();
            let mut body = Vec::new();
            sim.write_snapshot_csv(&mut body)?;
            csv.push_str(std::str::from_utf8(&body).expect("CSV output is ASCII"));
            write_file(path, &csv)?;
            println!("wrote {}", path.display());
        }
        Ok(())
    };

    if drift_run {
        match sim.run() {
            Ok(()) => {}
            Err(Error::BlowUp { t, x }) => {
                write_outputs(&sim, &eff)?;
                println!("field blew up at t = {t:.6}, x = {x:.6}: the steady state is unstable");
                return Ok(3);
            }
            Err(e) => return Err(e.into()),
        }
        let drift = sim
            .history()
            .iter()
            .map(|p| p.sup_norm)
            .fold(0.0f64, f64::max);
        write_outputs(&sim, &eff)?;
        println!(
            "sup drift from the steady state = {:.6e} over t in [0, {t_final}]",
            drift
        );
        if sim.max_validity() > 0.0 {
            println!("max linearization validity indicator = {:.3e}", sim.max_validity());
        }
        return Ok(0);
    }

    let capped = sim.run_capped(1e14)?;
    write_outputs(&sim, &eff)?;
    if capped {
        println!("run stopped early: the perturbation norm grew past its cap");
    }
    let fit = fit_decay_rate(sim.history(), capped)?;
    let rel = (fit.rate - lam).abs() / lam.abs().max(f64::MIN_POSITIVE);
    let mut line = String::new();
    write!(
        line,
        "measured rate {:+.6} vs lambda00 {:+.6}: {:.2}% apart",
        fit.rate,
        lam,
        100.0 * rel
    )
    .expect("writing to a String cannot fail");
    if fit.growth {
        line.push_str(" (growth)");
    }
    println!("{line}");
    Ok(if fit.growth || capped { 3 } else { 0 })
}
