//! `gls` command line: moment profiles, GLS norms and anti-norms, theta
//! tables, sum lower bounds, tail envelopes, and the verification suite.
//!
//! Every run merges defaults, an optional `--config` file, and flags (flags
//! win), validates the result up front, and echoes the effective
//! configuration into the output header. Identical configuration and seed
//! produce byte-identical outputs for any worker count.

// Guards of the form `!(x > 0.0)` are NaN-rejecting on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;

use clap::{Args, Parser, Subcommand};
use config::RunConfig;
use gls::error::{Error, Result};
use gls::rng::stream_seed;
use gls::textio::fmt_g17;
use gls::{
    empirical_tail, fit_envelope, geometric_grid, natural_function, sum_anti_norm_lower,
    sum_empirical_profile, sum_exact_profile, theta_closed, theta_numeric, write_envelope_csv,
    EnvelopeFamily, EnvelopeFitConfig, GeneratingFunction, ModelKind, MomentProfile,
    Normalization, RandomVariableModel, SumModel,
};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "gls",
    about = "Grand Lebesgue Space norms, anti-norms, tail envelopes and inequality verification",
    version
)]
struct Cli {
    /// Config file: flat key = value lines with [common] and per-command sections.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker cap for parallel sections (0 = automatic; GLS_WORKERS sets the default).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output file (directory for `verify`); stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Monte Carlo sample count.
    #[arg(long, global = true)]
    count: Option<usize>,
    /// Master seed for all random streams.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct ModelArgs {
    /// exampleA | gaussian | rademacher | weibullSym | finiteDiscrete | empirical
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    sigma: Option<f64>,
    /// Weibull shape.
    #[arg(long)]
    m: Option<f64>,
    /// Weibull scale.
    #[arg(long)]
    scale: Option<f64>,
    /// Finite law as value:prob pairs, e.g. -1:0.5;1:0.5
    #[arg(long)]
    atoms: Option<String>,
    /// Plain-text sample file for empirical models.
    #[arg(long)]
    samples_file: Option<PathBuf>,
}

#[derive(Args, Default)]
struct PsiArgs {
    /// power | blowup | degenerate | natural | tabulated
    #[arg(long)]
    psi: Option<String>,
    #[arg(long)]
    psi_m: Option<f64>,
    #[arg(long)]
    psi_b: Option<f64>,
    #[arg(long)]
    psi_beta: Option<f64>,
    #[arg(long)]
    psi_r: Option<f64>,
    /// Moment-profile CSV backing a tabulated psi.
    #[arg(long)]
    psi_file: Option<PathBuf>,
}

#[derive(Args, Default)]
struct PGridArgs {
    #[arg(long)]
    p_min: Option<f64>,
    #[arg(long)]
    p_max: Option<f64>,
    #[arg(long)]
    p_points: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// theta(p,q): closed form next to the grid-minimized oracle.
    Theta {
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        q: Option<f64>,
        /// Tabulate the whole p,q grid {1.0, 1.5, ..., 10.0}.
        #[arg(long)]
        grid: bool,
    },
    /// Moment profile CSV for a model or an iid sum.
    Moments {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        pgrid: PGridArgs,
        /// Number of iid summands (1 = the bare model).
        #[arg(long)]
        n: Option<u32>,
        /// none | inv-sqrt-n
        #[arg(long)]
        normalize: Option<String>,
    },
    /// GLS norm sup_p |X|_p / psi(p).
    Glsnorm {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        psi: PsiArgs,
        #[command(flatten)]
        pgrid: PGridArgs,
    },
    /// Anti-norm inf_p |X|_p / psi(p) over a closed p-range.
    Antinorm {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        psi: PsiArgs,
        #[command(flatten)]
        pgrid: PGridArgs,
        #[arg(long)]
        range_lo: Option<f64>,
        #[arg(long)]
        range_hi: Option<f64>,
        /// Widen the range to [1, b) (Definition-literal form).
        #[arg(long)]
        full_range: bool,
    },
    /// Lower bound for V(sum X_i) from the summand anti-norms.
    Bound {
        /// Comma-separated anti-norms V(X_i).
        #[arg(long)]
        v: Option<String>,
        /// Upper endpoint b (number or `inf`).
        #[arg(long)]
        b: Option<String>,
        /// Exponent p (number or `inf`).
        #[arg(long)]
        p: Option<String>,
    },
    /// Tail envelope CSV for an iid sum.
    Tails {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        normalize: Option<String>,
        /// auto | subgaussian | weibull
        #[arg(long)]
        family: Option<String>,
        /// Weibull exponent when family = weibull.
        #[arg(long)]
        family_m: Option<f64>,
        #[arg(long)]
        u_min: Option<f64>,
        #[arg(long)]
        u_max: Option<f64>,
        #[arg(long)]
        u_points: Option<usize>,
        /// Draws for the moment-based lower curve (defaults to count).
        #[arg(long)]
        fit_count: Option<usize>,
    },
    /// Run the full inequality verification suite.
    Verify {},
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn push_opt<T: ToString>(over: &mut Vec<(String, String)>, key: &str, v: &Option<T>) {
    if let Some(v) = v {
        over.push((key.to_string(), v.to_string()));
    }
}

fn model_overrides(over: &mut Vec<(String, String)>, a: &ModelArgs) {
    push_opt(over, "model", &a.model);
    push_opt(over, "sigma", &a.sigma);
    push_opt(over, "m", &a.m);
    push_opt(over, "scale", &a.scale);
    push_opt(over, "atoms", &a.atoms);
    if let Some(p) = &a.samples_file {
        over.push(("samples-file".into(), p.display().to_string()));
    }
}

fn psi_overrides(over: &mut Vec<(String, String)>, a: &PsiArgs) {
    push_opt(over, "psi", &a.psi);
    push_opt(over, "psi-m", &a.psi_m);
    push_opt(over, "psi-b", &a.psi_b);
    push_opt(over, "psi-beta", &a.psi_beta);
    push_opt(over, "psi-r", &a.psi_r);
    if let Some(p) = &a.psi_file {
        over.push(("psi-file".into(), p.display().to_string()));
    }
}

fn pgrid_overrides(over: &mut Vec<(String, String)>, a: &PGridArgs) {
    push_opt(over, "p-min", &a.p_min);
    push_opt(over, "p-max", &a.p_max);
    push_opt(over, "p-points", &a.p_points);
}

fn run(cli: Cli) -> Result<ExitCode> {
    let file_text = match &cli.config {
        Some(path) => Some(std::fs::read_to_string(path)?),
        None => None,
    };
    let mut over: Vec<(String, String)> = Vec::new();
    push_opt(&mut over, "workers", &cli.workers);
    push_opt(&mut over, "count", &cli.count);
    push_opt(&mut over, "seed", &cli.seed);
    if let Some(p) = &cli.out {
        over.push(("out".into(), p.display().to_string()));
    }

    let name = match &cli.command {
        Command::Theta { p, q, grid } => {
            push_opt(&mut over, "p", p);
            push_opt(&mut over, "q", q);
            if *grid {
                over.push(("grid".into(), "true".into()));
            }
            "theta"
        }
        Command::Moments {
            model,
            pgrid,
            n,
            normalize,
        } => {
            model_overrides(&mut over, model);
            pgrid_overrides(&mut over, pgrid);
            push_opt(&mut over, "n", n);
            push_opt(&mut over, "normalize", normalize);
            "moments"
        }
        Command::Glsnorm { model, psi, pgrid } => {
            model_overrides(&mut over, model);
            psi_overrides(&mut over, psi);
            pgrid_overrides(&mut over, pgrid);
            "glsnorm"
        }
        Command::Antinorm {
            model,
            psi,
            pgrid,
            range_lo,
            range_hi,
            full_range,
        } => {
            model_overrides(&mut over, model);
            psi_overrides(&mut over, psi);
            pgrid_overrides(&mut over, pgrid);
            push_opt(&mut over, "range-lo", range_lo);
            push_opt(&mut over, "range-hi", range_hi);
            if *full_range {
                over.push(("range-lo".into(), "1".into()));
            }
            "antinorm"
        }
        Command::Bound { v, b, p } => {
            push_opt(&mut over, "v", v);
            push_opt(&mut over, "b", b);
            push_opt(&mut over, "p", p);
            "bound"
        }
        Command::Tails {
            model,
            n,
            normalize,
            family,
            family_m,
            u_min,
            u_max,
            u_points,
            fit_count,
        } => {
            model_overrides(&mut over, model);
            push_opt(&mut over, "n", n);
            push_opt(&mut over, "normalize", normalize);
            push_opt(&mut over, "family", family);
            push_opt(&mut over, "family-m", family_m);
            push_opt(&mut over, "u-min", u_min);
            push_opt(&mut over, "u-max", u_max);
            push_opt(&mut over, "u-points", u_points);
            push_opt(&mut over, "fit-count", fit_count);
            "tails"
        }
        Command::Verify {} => "verify",
    };

    // Outputs are self-describing: a previous output file works as a config.
    let cfg = match &file_text {
        Some(text) if RunConfig::is_header(text) => {
            let base = RunConfig::from_header(text)?;
            if base.command != name {
                return Err(Error::Parse(format!(
                    "config header is for command {:?}, invoked {:?}",
                    base.command, name
                )));
            }
            base.with_overrides(&over)?
        }
        _ => RunConfig::build(name, file_text.as_deref(), &over)?,
    };

    // Worker cap: 0 means automatic, where GLS_WORKERS supplies the default.
    // Header-derived configs carry no execution keys, hence the fallback.
    let mut workers = match cfg.get("workers") {
        Some(_) => cfg.usize("workers")?,
        None => 0,
    };
    if workers == 0 {
        if let Ok(w) = std::env::var("GLS_WORKERS") {
            workers = w
                .parse()
                .map_err(|e| Error::Parse(format!("GLS_WORKERS: {e}")))?;
        }
    }
    if workers > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
        pool.install(|| dispatch(&cfg))
    } else {
        dispatch(&cfg)
    }
}

fn dispatch(cfg: &RunConfig) -> Result<ExitCode> {
    match cfg.command.as_str() {
        "theta" => cmd_theta(cfg),
        "moments" => cmd_moments(cfg),
        "glsnorm" => cmd_glsnorm(cfg),
        "antinorm" => cmd_antinorm(cfg),
        "bound" => cmd_bound(cfg),
        "tails" => cmd_tails(cfg),
        "verify" => cmd_verify(cfg),
        other => Err(Error::Parse(format!("unknown command {other:?}"))),
    }
}

fn out_path(cfg: &RunConfig) -> Option<&Path> {
    cfg.get("out").map(Path::new)
}

fn emit(cfg: &RunConfig, content: &str) -> Result<()> {
    match out_path(cfg) {
        Some(path) => {
            std::fs::write(path, content)?;
            Ok(())
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn build_model(cfg: &RunConfig) -> Result<RandomVariableModel> {
    let name = cfg.require("model")?;
    match name {
        "exampleA" | "examplea" | "example-a" => Ok(RandomVariableModel::example_a()),
        "gaussian" => {
            let sigma = if cfg.get("sigma").is_some() {
                cfg.f64("sigma")?
            } else {
                1.0
            };
            RandomVariableModel::gaussian(sigma)
        }
        "rademacher" => Ok(RandomVariableModel::rademacher()),
        "weibullSym" | "weibullsym" | "weibull-sym" => {
            let m = cfg.f64("m")?;
            let scale = if cfg.get("scale").is_some() {
                cfg.f64("scale")?
            } else {
                1.0
            };
            RandomVariableModel::weibull_sym(m, scale)
        }
        "finiteDiscrete" | "finitediscrete" | "finite-discrete" => {
            let spec = cfg.require("atoms")?;
            let atoms = spec
                .split(';')
                .map(|a| {
                    let (v, p) = a
                        .split_once(':')
                        .ok_or_else(|| Error::Parse(format!("bad atom {a:?}")))?;
                    Ok((
                        v.trim()
                            .parse::<f64>()
                            .map_err(|e| Error::Parse(format!("atom value: {e}")))?,
                        p.trim()
                            .parse::<f64>()
                            .map_err(|e| Error::Parse(format!("atom prob: {e}")))?,
                    ))
                })
                .collect::<Result<Vec<(f64, f64)>>>()?;
            RandomVariableModel::finite_discrete(atoms)
        }
        "empirical" => {
            RandomVariableModel::empirical_from_file(Path::new(cfg.require("samples-file")?))
        }
        other => Err(Error::Parse(format!("unknown model {other:?}"))),
    }
}

fn build_pgrid(cfg: &RunConfig) -> Result<Vec<f64>> {
    let lo = cfg.f64("p-min")?;
    let hi = cfg.f64("p-max")?;
    let n = cfg.usize("p-points")?;
    if !(lo >= 1.0) || !(hi > lo) || n < 2 {
        return Err(Error::InvalidInput(format!(
            "bad p-grid: [{lo}, {hi}] with {n} points"
        )));
    }
    Ok(geometric_grid(lo, hi, n))
}

fn build_psi(
    cfg: &RunConfig,
    model: &RandomVariableModel,
    grid: &[f64],
) -> Result<GeneratingFunction> {
    match cfg.require("psi")? {
        "power" => GeneratingFunction::power(cfg.f64("psi-m")?),
        "blowup" => GeneratingFunction::blowup(cfg.f64("psi-b")?, cfg.f64("psi-beta")?),
        "degenerate" => GeneratingFunction::degenerate(cfg.f64("psi-r")?),
        "natural" => GeneratingFunction::natural(natural_function(model, grid)?),
        "tabulated" => {
            let text = std::fs::read_to_string(cfg.require("psi-file")?)?;
            let prof = MomentProfile::from_csv(&text)?;
            GeneratingFunction::tabulated(prof.grid().to_vec(), prof.values().to_vec())
        }
        other => Err(Error::Parse(format!("unknown psi family {other:?}"))),
    }
}

fn build_normalization(cfg: &RunConfig) -> Result<Normalization> {
    match cfg.require("normalize")? {
        "none" => Ok(Normalization::None),
        "inv-sqrt-n" | "inv_sqrt_n" => Ok(Normalization::InvSqrtN),
        other => Err(Error::Parse(format!("unknown normalization {other:?}"))),
    }
}

fn cmd_theta(cfg: &RunConfig) -> Result<ExitCode> {
    let mut out = cfg.header_lines();
    out.push_str("p,q,theta_closed,theta_numeric\n");
    let z_grid = gls::gls_calculus::default_z_grid();
    let mut row = |p: f64, q: f64| {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_g17(p),
            fmt_g17(q),
            fmt_g17(theta_closed(p, q)),
            fmt_g17(theta_numeric(p, q, &z_grid))
        );
    };
    if cfg.bool("grid")? {
        for i in 0..19 {
            for j in 0..19 {
                row(1.0 + 0.5 * i as f64, 1.0 + 0.5 * j as f64);
            }
        }
    } else {
        row(cfg.f64("p")?, cfg.f64("q")?);
    }
    emit(cfg, &out)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_moments(cfg: &RunConfig) -> Result<ExitCode> {
    let model = build_model(cfg)?;
    let grid = build_pgrid(cfg)?;
    let n = cfg.u32("n")?;
    let profile = if n <= 1 {
        natural_function(&model, &grid)?
    } else {
        let sum = SumModel::new(model, n, build_normalization(cfg)?)?;
        match sum_exact_profile(&sum, &grid)? {
            Some(p) => p,
            None => sum_empirical_profile(&sum, &grid, cfg.usize("count")?, cfg.u64("seed")?)?,
        }
    };
    let mut out = cfg.header_lines();
    out.push_str(&profile.to_csv());
    emit(cfg, &out)?;
    Ok(ExitCode::SUCCESS)
}

fn ratio_csv(profile: &MomentProfile, psi: &GeneratingFunction) -> String {
    let mut out = String::from("p,value,psi,ratio\n");
    for (&p, &v) in profile.grid().iter().zip(profile.values()) {
        let psi_v = psi.psi_eval(p).unwrap_or(f64::INFINITY);
        let ratio = if psi_v.is_finite() { v / psi_v } else { 0.0 };
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_g17(p),
            fmt_g17(v),
            fmt_g17(psi_v),
            fmt_g17(ratio)
        );
    }
    out
}

fn cmd_glsnorm(cfg: &RunConfig) -> Result<ExitCode> {
    let model = build_model(cfg)?;
    let grid = build_pgrid(cfg)?;
    let psi = build_psi(cfg, &model, &grid)?;
    let profile = natural_function(&model, &grid)?;
    let norm = gls::gls_norm(&profile, &psi)?;
    println!("gls_norm={}", fmt_g17(norm));
    if out_path(cfg).is_some() {
        let mut out = cfg.header_lines();
        let _ = writeln!(out, "# gls_norm = {}", fmt_g17(norm));
        out.push_str(&ratio_csv(&profile, &psi));
        emit(cfg, &out)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_antinorm(cfg: &RunConfig) -> Result<ExitCode> {
    let model = build_model(cfg)?;
    let grid = build_pgrid(cfg)?;
    let psi = build_psi(cfg, &model, &grid)?;
    let profile = natural_function(&model, &grid)?;
    let lo = cfg.f64("range-lo")?;
    let hi = if cfg.get("range-hi").is_some() {
        cfg.f64("range-hi")?
    } else {
        profile.max_p()
    };
    let result = gls::anti_norm(&profile, &psi, (lo, hi))?;
    println!("V={:.6}", result.value);
    println!("argmin_p={}", fmt_g17(result.argmin_p));
    if out_path(cfg).is_some() {
        let mut out = cfg.header_lines();
        let _ = writeln!(out, "# V = {}", fmt_g17(result.value));
        let _ = writeln!(out, "# argmin_p = {}", fmt_g17(result.argmin_p));
        out.push_str(&ratio_csv(&profile, &psi));
        emit(cfg, &out)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_bound(cfg: &RunConfig) -> Result<ExitCode> {
    let v = cfg.f64_list("v")?;
    let b = cfg.f64("b")?;
    let p = cfg.f64("p")?;
    if v.iter().any(|x| *x < 0.0) {
        return Err(Error::InvalidInput("anti-norms must be nonnegative".into()));
    }
    if !(b > 1.0) {
        return Err(Error::InvalidInput(format!("need b > 1, got {b}")));
    }
    if !(p >= 1.0) {
        return Err(Error::InvalidInput(format!("need p >= 1, got {p}")));
    }
    println!("{:?}", sum_anti_norm_lower(&v, b, p));
    Ok(ExitCode::SUCCESS)
}

fn cmd_tails(cfg: &RunConfig) -> Result<ExitCode> {
    let model = build_model(cfg)?;
    let family = match cfg.require("family")? {
        "auto" => match model.kind() {
            ModelKind::WeibullSym { m, .. } => EnvelopeFamily::Weibull { m: *m },
            _ => EnvelopeFamily::Subgaussian,
        },
        "subgaussian" => EnvelopeFamily::Subgaussian,
        "weibull" => {
            let m = if cfg.get("family-m").is_some() {
                cfg.f64("family-m")?
            } else if let ModelKind::WeibullSym { m, .. } = model.kind() {
                *m
            } else {
                return Err(Error::InvalidInput(
                    "family=weibull needs family-m (or a weibullSym model)".into(),
                ));
            };
            EnvelopeFamily::Weibull { m }
        }
        other => return Err(Error::Parse(format!("unknown family {other:?}"))),
    };
    let sum = SumModel::new(model, cfg.u32("n")?, build_normalization(cfg)?)?;
    let (u_min, u_max, u_points) = (cfg.f64("u-min")?, cfg.f64("u-max")?, cfg.usize("u-points")?);
    if !(u_max > u_min) || u_points < 2 {
        return Err(Error::InvalidInput("bad u-grid".into()));
    }
    let u_grid: Vec<f64> = (0..u_points)
        .map(|i| u_min + (u_max - u_min) * i as f64 / (u_points - 1) as f64)
        .collect();
    let count = cfg.usize("count")?;
    let seed = cfg.u64("seed")?;
    let fit_count = if cfg.get("fit-count").is_some() {
        cfg.usize("fit-count")?
    } else {
        count
    };
    let fit_cfg = EnvelopeFitConfig {
        count: fit_count,
        seed: stream_seed(seed, 1),
        ..Default::default()
    };
    let envelope = fit_envelope(&sum, family, &u_grid, &fit_cfg)?;
    let emp = empirical_tail(&sum, &u_grid, count, stream_seed(seed, 2))?;
    let mut out = cfg.header_lines();
    out.push_str(&write_envelope_csv(&envelope, Some(&emp)));
    emit(cfg, &out)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(cfg: &RunConfig) -> Result<ExitCode> {
    let suite_cfg = gls::SuiteConfig {
        count: cfg.usize("count")?,
        seed: cfg.u64("seed")?,
    };
    let reports = gls::run_suite(&suite_cfg)?;
    let text = gls::suite_text(&reports);
    let mut csv = cfg.header_lines();
    csv.push_str(&gls::suite_csv(&reports));
    print!("{text}");
    if let Some(dir) = out_path(cfg) {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.csv"), &csv)?;
        std::fs::write(dir.join("report.txt"), &text)?;
    }
    if gls::mc_verify::count_nonexempt_violations(&reports) > 0 {
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}
