//! Command-line front end: argument definitions and subcommand runners.
//!
//! Runners take parsed arguments and return the text they would print, so
//! tests can drive them in-process.

pub mod record;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use vipsim_core::physics::exact_escape_fraction;
use vipsim_core::quon::{exclusion_defect, gram_matrix, GramMatrix};
use vipsim_core::sensitivity::invert_bound;
use vipsim_core::spectrum_io::{load_spectrum, save_spectrum, write_residual};
use vipsim_core::transport::{simulate_escape, simulate_scatter_count};
use vipsim_core::{Error, LimitSettings, McConfig, Result, Scenario, SensitivityReport};

use record::RunRecord;

#[derive(Debug, Parser)]
#[command(
    name = "vipsim",
    version,
    about = "Current-on/current-off PEP violation test toolkit"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Expected counts per unit β²/2 and the bound for a count limit.
    Sensitivity(SensitivityArgs),
    /// Synthesize current-on/current-off spectra (and optional Monte Carlo checks).
    Simulate(SimulateArgs),
    /// Subtract spectra, sum the ROI and set a limit.
    Analyze(AnalyzeArgs),
    /// Limit on β²/2 from a current-on/current-off pair.
    Limit(AnalyzeArgs),
    /// Gram matrix and eigenvalues of the quon algebra on a small Fock space.
    QuonCheck(QuonArgs),
}

#[derive(Debug, Args)]
pub struct SensitivityArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Upper limit on anomalous counts; defaults to the projected background-only limit.
    #[arg(long)]
    pub nx_limit: Option<f64>,
    #[arg(long)]
    pub cl: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Injected violation probability.
    #[arg(long, default_value_t = 0.0)]
    pub beta2_half: f64,
    /// Monte Carlo samples for the escape and scatter-count checks (skipped when absent).
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long, default_value_t = McConfig::DEFAULT_CHUNK)]
    pub chunk: u64,
    #[arg(long, default_value = "vipsim-out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub cl: Option<f64>,
    /// Directory holding on.csv and off.csv; outputs are written there too.
    #[arg(long, default_value = "vipsim-out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct QuonArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub q: f64,
    #[arg(long)]
    pub particles: usize,
    #[arg(long)]
    pub modes: usize,
    /// Also write quon_gram.csv and quon_eigenvalues.csv here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub const ON_FILE: &str = "on.csv";
pub const OFF_FILE: &str = "off.csv";
/// Largest D/μ for which `simulate` walks the scatter-count check.
pub const MAX_SCATTER_CHECK_RATIO: f64 = 1e4;

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn settings_with(scenario: &Scenario, cl: Option<f64>) -> LimitSettings {
    let mut s = scenario.limit_settings();
    if let Some(cl) = cl {
        s.cl = cl;
    }
    s
}

pub fn run(cli: &Cli) -> Result<String> {
    let started = Instant::now();
    match &cli.command {
        Command::Sensitivity(a) => sensitivity(a, started),
        Command::Simulate(a) => simulate(a, started),
        Command::Analyze(a) => analyze(a, started, "analyze"),
        Command::Limit(a) => analyze(a, started, "limit"),
        Command::QuonCheck(a) => quon_check(a, started),
    }
}

fn sensitivity(a: &SensitivityArgs, started: Instant) -> Result<String> {
    let scenario = Scenario::load(&a.config)?;
    let settings = settings_with(&scenario, a.cl);
    let report: SensitivityReport = scenario.sensitivity;
    let cfg = &scenario.config;
    let mut out = format!("scenario={}\n", scenario.name());
    out += &format!("lambda_cm={:e}\n", scenario.lambda_cm);
    out += &format!("visible_fraction={:e}\n", scenario.visible_fraction);
    out += &format!(
        "exact_escape_fraction={:e}\n",
        exact_escape_fraction(&cfg.strip, scenario.lambda_cm)?
    );
    out += &report.to_key_values();
    let mut record = RunRecord::new("sensitivity");
    record.scenario_hash = Some(cfg.hash.clone());
    record.sensitivity = Some(report);
    match a.nx_limit {
        Some(nx) => {
            if nx.is_nan() || nx < 0.0 {
                return Err(Error::InvalidParameter {
                    name: "nx_limit",
                    reason: format!("must be >= 0, got {nx}"),
                });
            }
            let bound = invert_bound(nx, report.n_new, report.n_int, cfg.plan.capture_fraction())?;
            out += &format!("nx_limit={nx}\nnx_limit_source=flag\nbeta2_half_bound={bound:e}\n");
        }
        None => {
            let result = scenario.projected_bound(&settings)?;
            out += &format!("nx_limit={}\nnx_limit_source=projected\n", result.nx_upper);
            out += &format!(
                "method={}\nconfidence_level={}\n",
                result.method, result.confidence_level
            );
            out += &format!("beta2_half_bound={:e}\n", result.beta2_half_bound);
            record.limit = Some(result);
        }
    }
    if let Some(dir) = &a.out {
        ensure_dir(dir)?;
        let txt = dir.join("sensitivity.txt");
        let csv = dir.join("sensitivity.csv");
        write_file(&txt, &out)?;
        write_file(
            &csv,
            &format!("{}\n{}\n", SensitivityReport::CSV_HEADER, report.to_csv_row()),
        )?;
        record.files = vec![txt, csv];
        record.wall_clock = started.elapsed();
        record.write(dir)?;
    }
    Ok(out)
}

fn simulate(a: &SimulateArgs, started: Instant) -> Result<String> {
    let scenario = Scenario::load(&a.config)?;
    let seed = a.seed.unwrap_or(scenario.config.seed);
    ensure_dir(&a.out)?;
    let (on, off) = scenario.synthesize(a.beta2_half, seed)?;
    let on_path = a.out.join(ON_FILE);
    let off_path = a.out.join(OFF_FILE);
    save_spectrum(&on_path, &on)?;
    save_spectrum(&off_path, &off)?;
    let mut out = format!(
        "scenario={}\nseed={seed}\nbeta2_half={:e}\n",
        scenario.name(),
        a.beta2_half
    );
    out += &format!(
        "on_total_counts={}\noff_total_counts={}\n",
        on.total_counts(),
        off.total_counts()
    );
    let mut record = RunRecord::new("simulate");
    record.files = vec![on_path, off_path];
    if let Some(samples) = a.samples {
        let mc = McConfig::new(samples, seed, a.chunk)?;
        let strip = &scenario.config.strip;
        let escape = simulate_escape(strip, scenario.lambda_cm, &mc)?;
        let mut mc_text = format!("samples={samples}\nchunk={}\nseed={seed}\n", a.chunk);
        mc_text += &format!("escape_mean={}\nescape_std_error={}\n", escape.mean, escape.std_error);
        mc_text += &format!("escape_exact={}\n", exact_escape_fraction(strip, scenario.lambda_cm)?);
        let scatter_exact = strip.window_d() / strip.mean_free_path_mu();
        if scatter_exact <= MAX_SCATTER_CHECK_RATIO {
            let scatter = simulate_scatter_count(strip, &mc);
            mc_text += &format!(
                "scatter_mean={}\nscatter_std_error={}\n",
                scatter.mean, scatter.std_error
            );
        } else {
            // each walker takes about D/mu steps
            mc_text += "scatter_check=skipped (D/mu too large to walk)\n";
        }
        mc_text += &format!("scatter_exact={scatter_exact}\n");
        let mc_path = a.out.join("mc.txt");
        write_file(&mc_path, &mc_text)?;
        record.files.push(mc_path);
        out += &mc_text;
    }
    record.scenario_hash = Some(scenario.config.hash.clone());
    record.seed = Some(seed);
    record.sensitivity = Some(scenario.sensitivity);
    record.wall_clock = started.elapsed();
    record.write(&a.out)?;
    Ok(out)
}

fn analyze(a: &AnalyzeArgs, started: Instant, name: &str) -> Result<String> {
    let scenario = Scenario::load(&a.config)?;
    let settings = settings_with(&scenario, a.cl);
    let on = load_spectrum(&a.out.join(ON_FILE))?;
    let off = load_spectrum(&a.out.join(OFF_FILE))?;
    let (analysis, result) = scenario.analyze(&on, &off, &settings)?;
    let mut record = RunRecord::new(name);
    let mut out = format!("scenario={}\n", scenario.name());
    if name == "analyze" {
        let res_path = a.out.join("residual.csv");
        write_file(
            &res_path,
            &write_residual(&analysis.residual, &format!("{}:residual", scenario.name())),
        )?;
        let roi_path = a.out.join("roi.txt");
        write_file(&roi_path, &analysis.to_key_values())?;
        record.files = vec![res_path, roi_path];
        out += &analysis.to_key_values();
    }
    let txt = a.out.join("limit.txt");
    let csv = a.out.join("limit.csv");
    write_file(&txt, &result.to_key_values())?;
    write_file(
        &csv,
        &format!("{}\n{}\n", vipsim_core::LimitResult::CSV_HEADER, result.to_csv_row()),
    )?;
    record.files.extend([txt, csv]);
    out += &result.to_key_values();
    record.scenario_hash = Some(scenario.config.hash.clone());
    record.sensitivity = Some(scenario.sensitivity);
    record.limit = Some(result);
    record.wall_clock = started.elapsed();
    record.write(&a.out)?;
    Ok(out)
}

/// Aligned text rendering of a Gram matrix with row labels.
pub fn format_gram(g: &GramMatrix) -> String {
    let labels: Vec<String> = g.basis.iter().map(|b| b.label()).collect();
    let width = labels.iter().map(String::len).max().unwrap_or(0);
    let mut out = String::new();
    for (i, label) in labels.iter().enumerate() {
        out += &format!("{label:>width$} |");
        for j in 0..g.dim() {
            out += &format!(" {:>9.5}", g.entries[(i, j)]);
        }
        out.push('\n');
    }
    out
}

fn quon_check(a: &QuonArgs, started: Instant) -> Result<String> {
    let g = gram_matrix(a.particles, a.modes, a.q)?;
    let eigen = g.eigenvalues();
    let defect = exclusion_defect(a.q)?;
    let mut out = format!(
        "q={}\nparticles={}\nmodes={}\ndimension={}\n",
        a.q,
        a.particles,
        a.modes,
        g.dim()
    );
    out += &format!("symmetric={}\n", g.is_symmetric());
    out += "gram:\n";
    out += &format_gram(&g);
    out += "eigenvalues:";
    for ev in &eigen {
        out += &format!(" {ev:.6e}");
    }
    out += &format!("\nmin_eigenvalue={:e}\nexclusion_defect={}\n", eigen[0], defect);
    if let Some(dir) = &a.out {
        ensure_dir(dir)?;
        let labels: Vec<String> = g.basis.iter().map(|b| b.label()).collect();
        let mut csv = format!("state,{}\n", labels.join(","));
        for (i, label) in labels.iter().enumerate() {
            let row: Vec<String> = (0..g.dim()).map(|j| format!("{}", g.entries[(i, j)])).collect();
            csv += &format!("{label},{}\n", row.join(","));
        }
        let gram_path = dir.join("quon_gram.csv");
        write_file(&gram_path, &csv)?;
        let ev_path = dir.join("quon_eigenvalues.csv");
        let ev_csv = std::iter::once("index,eigenvalue".to_string())
            .chain(eigen.iter().enumerate().map(|(i, v)| format!("{i},{v}")))
            .collect::<Vec<_>>()
            .join("\n");
        write_file(&ev_path, &(ev_csv + "\n"))?;
        let mut record = RunRecord::new("quon-check");
        record.files = vec![gram_path, ev_path];
        record.wall_clock = started.elapsed();
        record.write(dir)?;
    }
    Ok(out)
}
