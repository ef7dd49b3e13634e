//! `geosep` command-line pipeline.

use std::fs;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use geosep::diagnostics::{
    coherence_bound_check, scale_report, scale_sparsity, shearlet_upper_bound, write_coherence_csv,
    write_sparsity_csv, write_study_csv, ClusterOptions, CoherenceOptions, CoherenceReport,
};
use geosep::generators::ConeTag;
use geosep::grid::{forward_ft, FreqGrid, GridImage};
use geosep::io::{self, csv_number, write_csv};
use geosep::models::{decompose, render, scene_spectrum, Scene};
use geosep::separation::separate_multiscale;
use geosep::shearlet::{check_alpha, AlphaParams, SubbandKey, Variant};
use geosep::{Error, SolverConfig};

const AFTER_HELP: &str = "\
Defaults: --grid 256, --alpha 1.0, --eps 0.1, --out out, --max-iters 5000,
--tol 1e-5 (KKT residual; the change tolerance is tol/100), --scales 1..j_max,
--window 32, --shear-cap 1.

A config file holds `key = value` lines (`#` starts a comment) with keys
grid, alpha, eps, model, out, max_iters, tol, scales, sweep_alpha, window,
shear_cap, oversample, balance. Command-line flags override it.

Exit codes: 0 success, 2 configuration or input error, 3 numerical
non-convergence (results are still written).";

#[derive(Parser, Debug)]
#[command(name = "geosep", version, about = "Point/line singularity separation", after_help = AFTER_HELP)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct Common {
    /// key = value configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Grid size N (power of two, at least 16)
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Shearlet anisotropy in [1, 2)
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Cluster exponent in (0, (2 - alpha)/4)
    #[arg(long, global = true)]
    eps: Option<f64>,
    /// Scene file (keys `points` and `line`)
    #[arg(long, global = true)]
    model: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    max_iters: Option<usize>,
    /// KKT tolerance
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Scale range `a..b`, `a-b` or a single scale
    #[arg(long, global = true)]
    scales: Option<String>,
    /// Comma-separated alpha values for `diagnose`
    #[arg(long, global = true)]
    sweep_alpha: Option<String>,
    /// Coherence target window half-width
    #[arg(long, global = true)]
    window: Option<i64>,
    /// Bound on |l| in the line cluster; `all` keeps every shear
    #[arg(long, global = true)]
    shear_cap: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the ground-truth components, their sum and the scene manifest
    Gen,
    /// Split an image into its low band and scale subbands
    Decompose {
        /// GSEP1 image; defaults to the scene
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Separate every scale and recombine
    Separate {
        /// GSEP1 image; defaults to the scene (then errors are scored)
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Coherence and sparsity tables
    Diagnose {
        /// Dump the primal symbol of subband `j,l,cone` (repeatable)
        #[arg(long = "dump-symbol")]
        dump_symbol: Vec<String>,
    },
    /// Summarize the CSV tables of an output directory
    Report,
}

#[derive(Debug, Clone)]
struct RunConfig {
    grid: FreqGrid,
    alpha: f64,
    eps: f64,
    scene: Scene,
    out: PathBuf,
    solver: SolverConfig<f64>,
    scales: RangeInclusive<u32>,
    sweep: Vec<f64>,
    cluster: ClusterOptions,
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Numeric(String),
    Other(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_)
            | Error::Config(_)
            | Error::Model(_)
            | Error::Format(_)
            | Error::BadAlpha(_)
            | Error::BadEps { .. }
            | Error::BadGridSize(_)
            | Error::ScaleOutOfRange { .. }
            | Error::ShearOutOfRange { .. } => Failure::Config(e.to_string()),
            other => Failure::Other(other.to_string()),
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn config_err(msg: impl Into<String>) -> Failure {
    Failure::Config(msg.into())
}

fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Outcome<T>
where
    T::Err: std::fmt::Display,
{
    v.trim().parse().map_err(|e| config_err(format!("{key} '{v}': {e}")))
}

fn parse_scales(s: &str) -> Outcome<RangeInclusive<u32>> {
    let s = s.trim();
    let (a, b) = s
        .split_once("..")
        .or_else(|| s.split_once('-'))
        .unwrap_or((s, s));
    let (a, b): (u32, u32) = (parse("scales", a)?, parse("scales", b)?);
    if a > b {
        return Err(config_err(format!("empty scale range '{s}'")));
    }
    Ok(a..=b)
}

fn parse_list(s: &str) -> Outcome<Vec<f64>> {
    s.split(',').filter(|t| !t.trim().is_empty()).map(|t| parse("sweep_alpha", t)).collect()
}

fn parse_cap(s: &str) -> Outcome<Option<i64>> {
    if s.trim() == "all" {
        Ok(None)
    } else {
        parse("shear_cap", s).map(Some)
    }
}

/// Defaults, then the config file, then explicit flags.
fn resolve(c: &Common) -> Outcome<RunConfig> {
    let mut kv = match &c.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| config_err(format!("{}: {e}", p.display())))?;
            io::parse_key_values(&text)?
        }
        None => Default::default(),
    };
    let known = [
        "grid", "alpha", "eps", "model", "out", "max_iters", "tol", "scales", "sweep_alpha", "window",
        "shear_cap", "oversample", "balance",
    ];
    if let Some(k) = kv.keys().find(|k| !known.contains(&k.as_str())) {
        return Err(config_err(format!("unknown config key '{k}'")));
    }
    let mut set = |k: &str, v: Option<String>| {
        if let Some(v) = v {
            kv.insert(k.to_string(), v);
        }
    };
    set("grid", c.grid.map(|v| v.to_string()));
    set("alpha", c.alpha.map(|v| v.to_string()));
    set("eps", c.eps.map(|v| v.to_string()));
    set("model", c.model.as_ref().map(|p| p.display().to_string()));
    set("out", c.out.as_ref().map(|p| p.display().to_string()));
    set("max_iters", c.max_iters.map(|v| v.to_string()));
    set("tol", c.tol.map(|v| v.to_string()));
    set("scales", c.scales.clone());
    set("sweep_alpha", c.sweep_alpha.clone());
    set("window", c.window.map(|v| v.to_string()));
    set("shear_cap", c.shear_cap.clone());

    let get = |k: &str| kv.get(k).map(String::as_str);
    let grid = FreqGrid::new(get("grid").map_or(Ok(256), |v| parse("grid", v))?)?;
    let alpha = get("alpha").map_or(Ok(1.0), |v| parse("alpha", v))?;
    let eps = get("eps").map_or(Ok(0.1), |v| parse("eps", v))?;
    AlphaParams::new(alpha, eps)?;
    let scene = match get("model") {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| config_err(format!("{p}: {e}")))?;
            io::parse_scene(&text)?
        }
        None => Scene::default(),
    };
    let mut solver = SolverConfig::<f64>::default();
    if let Some(v) = get("max_iters") {
        solver.max_iters = parse("max_iters", v)?;
    }
    if let Some(v) = get("tol") {
        let tol: f64 = parse("tol", v)?;
        solver.tol_kkt = tol;
        solver.tol_change = tol / 100.0;
    }
    if let Some(v) = get("oversample") {
        solver.oversample = parse("oversample", v)?;
    }
    if let Some(v) = get("balance") {
        solver.balance = parse("balance", v)?;
    }
    solver.validate()?;
    let scales = match get("scales") {
        Some(s) => parse_scales(s)?,
        None => 1..=grid.j_max(),
    };
    grid.check_scale(*scales.end())?;
    let sweep = match get("sweep_alpha") {
        Some(s) => parse_list(s)?,
        None => vec![alpha],
    };
    for &a in &sweep {
        AlphaParams::new(a, eps)?;
    }
    let mut cluster = ClusterOptions::default();
    if let Some(v) = get("window") {
        cluster.coherence = CoherenceOptions { window: parse("window", v)?, ..cluster.coherence };
        if cluster.coherence.window < 0 {
            return Err(config_err("window must be nonnegative"));
        }
    }
    if let Some(v) = get("shear_cap") {
        cluster.shear_cap = parse_cap(v)?;
    }
    Ok(RunConfig {
        grid,
        alpha,
        eps,
        scene,
        out: PathBuf::from(get("out").unwrap_or("out")),
        solver,
        scales,
        sweep,
        cluster,
    })
}

fn out_dir(cfg: &RunConfig) -> Outcome<&Path> {
    fs::create_dir_all(&cfg.out).map_err(|e| config_err(format!("{}: {e}", cfg.out.display())))?;
    Ok(&cfg.out)
}

fn scene_image(cfg: &RunConfig) -> (GridImage<f64>, GridImage<f64>, GridImage<f64>) {
    let (p, c) = scene_spectrum(&cfg.scene, &cfg.grid);
    let (p, c) = (render(&p), render(&c));
    let f = p.add(&c);
    (p, c, f)
}

fn load_input(cfg: &RunConfig, input: &Option<PathBuf>) -> Outcome<GridImage<f64>> {
    match input {
        Some(p) => {
            let img = io::read_real(p)?;
            if img.size() != cfg.grid.size() {
                return Err(config_err(format!(
                    "{} is {}x{}, the grid is {}",
                    p.display(),
                    img.size(),
                    img.size(),
                    cfg.grid.size()
                )));
            }
            Ok(img)
        }
        None => Ok(scene_image(cfg).2),
    }
}

fn cmd_gen(cfg: &RunConfig) -> Outcome<()> {
    let dir = out_dir(cfg)?;
    let (p, c, f) = scene_image(cfg);
    io::write_real(dir.join("points.gsep"), &p)?;
    io::write_real(dir.join("lines.gsep"), &c)?;
    io::write_real(dir.join("image.gsep"), &f)?;
    fs::write(dir.join("model.txt"), io::format_scene(&cfg.scene)).map_err(Error::from)?;
    println!("wrote points.gsep, lines.gsep, image.gsep, model.txt to {}", dir.display());
    Ok(())
}

fn cmd_decompose(cfg: &RunConfig, input: &Option<PathBuf>) -> Outcome<()> {
    let img = load_input(cfg, input)?;
    let dir = out_dir(cfg)?;
    let stack = decompose(&forward_ft(&img));
    io::write_real(dir.join("band_low.gsep"), &render(&stack.low))?;
    let mut rows = vec![vec!["low".to_string(), csv_number(stack.low.norm())]];
    for (j, band) in &stack.bands {
        io::write_real(dir.join(format!("band_{j}.gsep")), &render(band))?;
        rows.push(vec![j.to_string(), csv_number(band.norm())]);
    }
    write_csv(dir.join("bands.csv"), &["band", "norm"], &rows)?;
    println!("wrote {} subbands to {}", stack.bands.len() + 1, dir.display());
    Ok(())
}

fn write_trace(path: PathBuf, res: &geosep::SeparationResult<f64>) -> Outcome<()> {
    let rows: Vec<Vec<String>> = res
        .trace
        .iter()
        .map(|t| vec![t.iter.to_string(), csv_number(t.objective), csv_number(t.kkt), csv_number(t.change)])
        .collect();
    write_csv(path, &["iter", "objective", "kkt", "change"], &rows)?;
    Ok(())
}

fn cmd_separate(cfg: &RunConfig, input: &Option<PathBuf>) -> Outcome<()> {
    let img = load_input(cfg, input)?;
    let dir = out_dir(cfg)?;
    let res = separate_multiscale(&img, cfg.alpha, &cfg.solver, Some(cfg.scales.clone()))?;
    io::write_real(dir.join("points_est.gsep"), &res.points)?;
    io::write_real(dir.join("lines_est.gsep"), &res.lines)?;
    let mut rows = Vec::new();
    for r in &res.scales {
        write_trace(dir.join(format!("trace_{}.csv", r.scale)), r)?;
        rows.push(vec![
            r.scale.to_string(),
            r.iterations.to_string(),
            csv_number(r.objective),
            csv_number(r.kkt),
            r.converged.to_string(),
        ]);
    }
    write_csv(dir.join("scales.csv"), &["j", "iters", "objective", "kkt", "converged"], &rows)?;
    if input.is_none() {
        let params = AlphaParams::new(cfg.alpha, cfg.eps)?;
        let b2 = shearlet_upper_bound(&cfg.grid, cfg.alpha)?;
        let reports = res
            .scales
            .iter()
            .map(|r| scale_report(&cfg.grid, &params, &cfg.scene, r, b2, &cfg.cluster))
            .collect::<geosep::Result<Vec<_>>>()?;
        write_study_csv(dir.join("study.csv"), &reports)?;
        for r in &reports {
            println!(
                "j={} errP={:.4} errC={:.4} bound={} iters={} kkt={:.2e}",
                r.j,
                r.err_points,
                r.err_lines,
                csv_number(r.bound),
                r.iterations,
                r.kkt
            );
        }
    }
    if !res.converged() {
        let bad: Vec<String> = res.scales.iter().filter(|r| !r.converged).map(|r| r.scale.to_string()).collect();
        return Err(Failure::Numeric(format!("solver did not converge at scale(s) {}", bad.join(", "))));
    }
    Ok(())
}

fn parse_key(s: &str, alpha: f64) -> Outcome<SubbandKey> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(config_err(format!("dump-symbol '{s}': expected j,l,cone")));
    }
    let cone = match parts[2] {
        "h" => ConeTag::H,
        "v" => ConeTag::V,
        other => return Err(config_err(format!("unknown cone '{other}'"))),
    };
    Ok(SubbandKey::new(parse("j", parts[0])?, parse("l", parts[1])?, cone, alpha)?)
}

/// Primal symbol sampled on the lattice, written in FFT bin order.
fn dump_symbol(cfg: &RunConfig, key: SubbandKey, dir: &Path) -> Outcome<()> {
    cfg.grid.check_scale(key.j)?;
    let n = cfg.grid.size();
    let mut vals = vec![0.0; n * n];
    for (f, a, b) in cfg.grid.points() {
        vals[f] = key.symbol(a as f64, b as f64, cfg.alpha, Variant::Primal);
    }
    let img = GridImage::from_vec(&cfg.grid, vals)?;
    let name = format!("symbol_j{}_l{}_{}.gsep", key.j, key.l, key.cone.label());
    io::write_real(dir.join(name), &img)?;
    Ok(())
}

fn cmd_diagnose(cfg: &RunConfig, dumps: &[String]) -> Outcome<()> {
    let keys = dumps.iter().map(|s| parse_key(s, cfg.alpha)).collect::<Outcome<Vec<_>>>()?;
    let dir = out_dir(cfg)?;
    for key in keys {
        dump_symbol(cfg, key, dir)?;
    }
    let mut coh: Vec<CoherenceReport> = Vec::new();
    let mut spars = Vec::new();
    for &alpha in &cfg.sweep {
        check_alpha(alpha)?;
        let params = AlphaParams::new(alpha, cfg.eps)?;
        for j in cfg.scales.clone() {
            let r = coherence_bound_check(&cfg.grid, j, &params, &cfg.scene, &cfg.cluster)?;
            let (d1, d2) = scale_sparsity(&cfg.grid, j, &params, &cfg.scene, cfg.cluster.shear_cap)?;
            println!(
                "j={j} alpha={alpha} mu1={:.4e} mu2={:.4e} 2mu<1={} delta1={d1:.4e} delta2={d2:.4e}",
                r.mu1,
                r.mu2,
                r.flag()
            );
            coh.push(r);
            spars.push((j, d1, d2));
        }
    }
    write_coherence_csv(dir.join("coherence.csv"), &coh)?;
    write_sparsity_csv(dir.join("sparsity.csv"), &spars)?;
    if coh.iter().any(|r| !r.window_ok) {
        return Err(Failure::Numeric("coherence window did not converge; raise --window".into()));
    }
    Ok(())
}

fn read_table(path: &Path) -> Outcome<Option<(Vec<String>, Vec<Vec<String>>)>> {
    if !path.exists() {
        return Ok(None);
    }
    let text = fs::read_to_string(path).map_err(Error::from)?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or("").split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    Ok(Some((header, rows)))
}

fn cmd_report(cfg: &RunConfig) -> Outcome<()> {
    let mut md = String::from("# geosep report\n");
    let mut found = false;
    for name in ["study.csv", "coherence.csv", "sparsity.csv", "scales.csv"] {
        if let Some((header, rows)) = read_table(&cfg.out.join(name))? {
            found = true;
            md.push_str(&format!("\n## {name}\n\n| {} |\n", header.join(" | ")));
            md.push_str(&format!("|{}\n", "---|".repeat(header.len())));
            for r in rows {
                md.push_str(&format!("| {} |\n", r.join(" | ")));
            }
        }
    }
    if !found {
        return Err(config_err(format!("no CSV tables in {}", cfg.out.display())));
    }
    fs::write(cfg.out.join("report.md"), &md).map_err(Error::from)?;
    print!("{md}");
    Ok(())
}

fn run(cli: &Cli) -> Outcome<()> {
    let cfg = resolve(&cli.common)?;
    match &cli.command {
        Command::Gen => cmd_gen(&cfg),
        Command::Decompose { input } => cmd_decompose(&cfg, input),
        Command::Separate { input } => cmd_separate(&cfg, input),
        Command::Diagnose { dump_symbol } => cmd_diagnose(&cfg, dump_symbol),
        Command::Report => cmd_report(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Numeric(m)) => {
            eprintln!("warning: {m}");
            ExitCode::from(3)
        }
        Err(Failure::Other(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
