//! Experiment drivers behind the `nullcontrol` binary.
//!
//! Subcommands: `smallness-verify`, `spectral-ineq`, `control-run`,
//! `sweep`, `validate`. Every run is deterministic for a fixed seed; CSV
//! floats are printed with 17 significant digits so identical runs emit
//! identical bytes. Output files are written atomically (temp file +
//! rename). Exit codes: 0 success, 1 usage, 2 validation failure,
//! 3 numerical failure.

use crate::config::{ExperimentConfig, InitialData, ValidatedControlRun};
use crate::control::{cost_audit, synthesize};
use crate::error::{Error, Result};
use crate::harness::{run_falsification, HarnessConfig};
use crate::observability::{fit_rate_log, spatial_gram, spectral_constant};
use crate::simulate::cross_validate;
use crate::spectral::{sine_basis, sturm_liouville_basis, Basis, DensitySpec};
use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(
    name = "nullcontrol",
    about = "Smallness certificates, observability constants and null-control synthesis",
    long_about = None,
    disable_help_subcommand = true
)]
struct Cli {
    /// TOML experiment configuration.
    #[arg(long, global = true)]
    config: Option<String>,
    /// Seed for all randomness.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output directory for CSV files.
    #[arg(long, global = true, default_value = "out")]
    out: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Randomized soundness trials of the smallness certificates.
    /// CSV columns: trial,family,measE,epsE,bound,true_sup,margin.
    SmallnessVerify {
        /// Override the number of polynomial trials.
        #[arg(long)]
        poly_trials: Option<usize>,
        /// Override the number of trig-exponential trials.
        #[arg(long)]
        trig_trials: Option<usize>,
    },
    /// Observability constants over a μ list.
    /// CSV columns: mu,n_modes,lambda_min,C,logC.
    SpectralIneq {
        /// Observation set as lo,hi pairs: "0.3,0.5;0.7,0.8".
        #[arg(long)]
        omega: Option<String>,
        /// μ values as multiples of π, comma separated.
        #[arg(long)]
        mu_list: Option<String>,
        /// Basis size.
        #[arg(long)]
        modes: Option<usize>,
    },
    /// One null-control synthesis run.
    /// CSV trace columns: t,norm,stage,cumulative_cost.
    ControlRun {
        #[arg(long)]
        omega: Option<String>,
        #[arg(long = "T", visible_alias = "t-total")]
        t_total: Option<f64>,
        /// μ₀ as a multiple of π.
        #[arg(long)]
        mu0: Option<f64>,
        #[arg(long)]
        stages: Option<usize>,
        #[arg(long)]
        modes: Option<usize>,
        /// Initial datum: random | mode:j | file:PATH.
        #[arg(long)]
        u0: Option<String>,
    },
    /// Parallel fan-out over the config's [[sweep]] runs.
    Sweep,
    /// Spectral-vs-Crank-Nicolson cross-validation of a control run.
    Validate {
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        dt: Option<f64>,
        /// Comma-separated times at which to write (x, u) snapshot CSVs.
        #[arg(long)]
        snapshots: Option<String>,
    },
}

/// Entry point used by the binary; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            // help/version are successful exits
            if e.use_stderr() {
                eprintln!("{e}");
                return 1;
            }
            print!("{e}");
            return 0;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(Error::InvalidInput(m)) => {
            eprintln!("validation error: {m}");
            2
        }
        Err(Error::Infeasible(m)) => {
            eprintln!("validation error: {m}");
            2
        }
        Err(Error::Numerical(m)) => {
            eprintln!("numerical error: {m}");
            3
        }
        Err(Error::Io(m)) => {
            eprintln!("io error: {m}");
            3
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(p) => ExperimentConfig::from_path(p)?,
        None => ExperimentConfig::default(),
    };
    std::fs::create_dir_all(&cli.out)?;
    let out = PathBuf::from(&cli.out);
    match &cli.command {
        Command::SmallnessVerify { poly_trials, trig_trials } => {
            let base = cfg.smallness.as_ref();
            let hcfg = HarnessConfig {
                poly_trials: poly_trials
                    .or(base.map(|b| b.poly_trials))
                    .unwrap_or(600),
                trig_trials: trig_trials
                    .or(base.map(|b| b.trig_trials))
                    .unwrap_or(400),
                seed: cli.seed,
                ..HarnessConfig::default()
            };
            smallness_verify(&hcfg, &out)
        }
        Command::SpectralIneq { omega, mu_list, modes } => {
            let (set, mus, n_modes, density) = spectral_params(&cfg, omega, mu_list, modes)?;
            spectral_ineq(&set, &mus, n_modes, &density, &out)
        }
        Command::ControlRun { omega, t_total, mu0, stages, modes, u0 } => {
            let run = control_params(&cfg, omega, t_total, mu0, stages, modes, u0)?;
            let (_, summary) = control_run(&run, cli.seed, &out, &run.name)?;
            println!("{summary}");
            Ok(())
        }
        Command::Sweep => {
            if cfg.sweep.is_empty() {
                return Err(Error::InvalidInput(
                    "sweep needs at least one [[sweep]] entry in the config".into(),
                ));
            }
            sweep(&cfg, cli.seed, &out)
        }
        Command::Validate { grid, dt, snapshots } => {
            let vcfg = cfg
                .validate
                .as_ref()
                .ok_or_else(|| Error::InvalidInput("config lacks a [validate] table".into()))?;
            let run = vcfg.run.validate()?;
            let snap_times = match snapshots {
                Some(s) => parse_floats(s)?,
                None => Vec::new(),
            };
            validate(
                &run,
                grid.unwrap_or(vcfg.grid),
                dt.unwrap_or(vcfg.dt),
                &snap_times,
                cli.seed,
                &out,
            )
        }
    }
}

fn spectral_params(
    cfg: &ExperimentConfig,
    omega: &Option<String>,
    mu_list: &Option<String>,
    modes: &Option<usize>,
) -> Result<(crate::sets::MeasurableSet1D, Vec<f64>, usize, DensitySpec)> {
    let table = cfg.spectral_ineq.as_ref();
    let set = match (omega, table) {
        (Some(s), _) => crate::sets::MeasurableSet1D::unit(&parse_pairs(s)?)?,
        (None, Some(t)) => t.omega.build()?,
        (None, None) => {
            return Err(Error::InvalidInput(
                "spectral-ineq needs --omega or a [spectral_ineq] config table".into(),
            ))
        }
    };
    if set.measure() <= 0.0 {
        return Err(Error::InvalidInput("observation set must have positive measure".into()));
    }
    let mus_pi: Vec<f64> = match (mu_list, table) {
        (Some(s), _) => parse_floats(s)?,
        (None, Some(t)) => t.mu_pi_list.clone(),
        (None, None) => return Err(Error::InvalidInput("spectral-ineq needs --mu-list".into())),
    };
    if mus_pi.is_empty() {
        return Err(Error::InvalidInput("μ list is empty".into()));
    }
    let n_modes = modes
        .or(table.map(|t| t.modes))
        .unwrap_or_else(|| mus_pi.iter().cloned().fold(0.0f64, f64::max).ceil() as usize);
    let density = match table.and_then(|t| t.density.as_ref()) {
        Some(t) => DensitySpec::from_triples(t)?,
        None => DensitySpec::constant(1.0)?,
    };
    let pi = std::f64::consts::PI;
    Ok((set, mus_pi.iter().map(|m| m * pi).collect(), n_modes, density))
}

#[allow(clippy::too_many_arguments)]
fn control_params(
    cfg: &ExperimentConfig,
    omega: &Option<String>,
    t_total: &Option<f64>,
    mu0: &Option<f64>,
    stages: &Option<usize>,
    modes: &Option<usize>,
    u0: &Option<String>,
) -> Result<ValidatedControlRun> {
    let mut run = match &cfg.control_run {
        Some(t) => t.validate()?,
        None => {
            // all parameters must come from flags
            let omega_str = omega.as_ref().ok_or_else(|| {
                Error::InvalidInput("control-run needs --omega or a [control_run] table".into())
            })?;
            ValidatedControlRun {
                omega: crate::sets::MeasurableSet1D::unit(&parse_pairs(omega_str)?)?,
                t_total: 1.0,
                mu0: 4.0 * std::f64::consts::PI,
                stages: 6,
                modes: 64,
                u0: InitialData::Random,
                density: DensitySpec::constant(1.0)?,
                name: "run".into(),
            }
        }
    };
    if let Some(s) = omega {
        run.omega = crate::sets::MeasurableSet1D::unit(&parse_pairs(s)?)?;
    }
    if run.omega.measure() <= 0.0 {
        return Err(Error::InvalidInput("control set must have positive measure".into()));
    }
    if let Some(t) = t_total {
        run.t_total = *t;
    }
    if let Some(m) = mu0 {
        run.mu0 = m * std::f64::consts::PI;
    }
    if let Some(k) = stages {
        run.stages = *k;
    }
    if let Some(j) = modes {
        run.modes = *j;
    }
    if let Some(s) = u0 {
        run.u0 = InitialData::parse(s)?;
    }
    if !(run.t_total > 0.0) || run.stages == 0 || run.modes == 0 {
        return Err(Error::InvalidInput("T, stages and modes must be positive".into()));
    }
    Ok(run)
}

fn parse_pairs(s: &str) -> Result<Vec<[f64; 2]>> {
    s.split(';')
        .map(|chunk| {
            let nums: Vec<f64> = chunk
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::InvalidInput(format!("bad number '{t}' in set")))
                })
                .collect::<Result<_>>()?;
            if nums.len() != 2 {
                return Err(Error::InvalidInput(format!(
                    "set chunk '{chunk}' must be lo,hi"
                )));
            }
            Ok([nums[0], nums[1]])
        })
        .collect()
}

fn parse_floats(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("bad number '{t}'")))
        })
        .collect()
}

/// 17-significant-digit float formatting shared by all CSV output.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Atomic write: temp file in the same directory, then rename.
fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn smallness_verify(hcfg: &HarnessConfig, out: &Path) -> Result<()> {
    let records = run_falsification(hcfg)?;
    let mut csv = String::from("trial,family,measE,epsE,bound,true_sup,margin\n");
    let mut violations = 0usize;
    let mut min_margin = f64::INFINITY;
    for r in &records {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            r.trial,
            r.family,
            fmt_f64(r.meas_e),
            fmt_f64(r.eps_e),
            fmt_f64(r.bound),
            fmt_f64(r.true_sup),
            fmt_f64(r.margin)
        );
        if r.margin < 0.0 {
            violations += 1;
        }
        min_margin = min_margin.min(r.margin);
    }
    let path = out.join("smallness.csv");
    write_atomic(&path, &csv)?;
    println!(
        "smallness-verify: {} trials, {} violations, min margin {:.3e} -> {}",
        records.len(),
        violations,
        min_margin,
        path.display()
    );
    if violations > 0 {
        return Err(Error::Numerical(format!(
            "{violations} soundness violations detected"
        )));
    }
    Ok(())
}

fn build_basis(density: &DensitySpec, modes: usize) -> Result<Basis> {
    if density.is_constant_one() {
        Ok(sine_basis(modes))
    } else {
        sturm_liouville_basis(density, modes)
    }
}

fn spectral_ineq(
    set: &crate::sets::MeasurableSet1D,
    mus: &[f64],
    n_modes: usize,
    density: &DensitySpec,
    out: &Path,
) -> Result<()> {
    let basis = build_basis(density, n_modes)?;
    let mut csv = String::from("mu,n_modes,lambda_min,C,logC\n");
    let mut fitpoints = Vec::new();
    for &mu in mus {
        let g = spatial_gram(&basis, set, mu)?;
        let sc = spectral_constant(&g)?;
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            fmt_f64(mu),
            g.dim(),
            fmt_f64(sc.lambda_min),
            fmt_f64(sc.c),
            fmt_f64(sc.log_c)
        );
        fitpoints.push((mu, sc.log_c));
    }
    let path = out.join("spectral_ineq.csv");
    write_atomic(&path, &csv)?;
    let mut summary = format!("spectral-ineq: {} μ values -> {}", mus.len(), path.display());
    if fitpoints.len() >= 3 {
        let fit = fit_rate_log(&fitpoints)?;
        let _ = write!(
            summary,
            "; fitted N = {:.6} (R² = {:.6}, max residual {:.3e})",
            fit.n, fit.r_squared, fit.residual
        );
    }
    println!("{summary}");
    Ok(())
}

fn initial_data(u0: &InitialData, modes: usize, seed: u64) -> Result<Vec<f64>> {
    match u0 {
        InitialData::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut v: Vec<f64> = (0..modes).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let n = crate::linalg::norm2(&v);
            if n == 0.0 {
                v[0] = 1.0;
            } else {
                for x in &mut v {
                    *x /= n;
                }
            }
            Ok(v)
        }
        InitialData::Mode(j) => {
            if *j > modes {
                return Err(Error::InvalidInput(format!(
                    "u0 = mode:{j} outside the {modes}-mode truncation"
                )));
            }
            let mut v = vec![0.0; modes];
            v[j - 1] = 1.0;
            Ok(v)
        }
        InitialData::File(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Io(format!("cannot read u0 file {path}: {e}")))?;
            let v: Vec<f64> = text
                .split_whitespace()
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| Error::InvalidInput(format!("bad coefficient '{t}'")))
                })
                .collect::<Result<_>>()?;
            if v.len() != modes {
                return Err(Error::InvalidInput(format!(
                    "u0 file has {} coefficients, expected {modes}",
                    v.len()
                )));
            }
            Ok(v)
        }
    }
}

fn control_run(
    run: &ValidatedControlRun,
    seed: u64,
    out: &Path,
    label: &str,
) -> Result<(crate::control::SynthesisResult, String)> {
    let basis = build_basis(&run.density, run.modes)?;
    let mu_last = run.mu0 * 2f64.powi(run.stages as i32 - 1);
    if basis.omega(run.modes - 1) < 2.0 * mu_last {
        eprintln!(
            "note: ω_J = {:.3} < 2 μ_(K-1) = {:.3}; late-stage cutoffs saturate the truncation",
            basis.omega(run.modes - 1),
            2.0 * mu_last
        );
    }
    let u0 = initial_data(&run.u0, run.modes, seed)?;
    let result = synthesize(&basis, &run.omega, &u0, run.t_total, run.mu0, run.stages)?;
    let mut csv = String::from("t,norm,stage,cumulative_cost\n");
    for p in &result.trace {
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            fmt_f64(p.t),
            fmt_f64(p.norm),
            p.stage,
            fmt_f64(p.cumulative_cost)
        );
    }
    let path = out.join(format!("{label}_trace.csv"));
    write_atomic(&path, &csv)?;
    let audit = cost_audit(&result);
    let summary = format!(
        "control-run {label}: N_eff = {}, ‖u(T)‖ = {:.3e}, low-mode ‖u(T)‖ = {:.3e}, \
         peak stage {}, geometric decay after peak: {}, trace -> {}",
        fmt_f64(result.n_eff),
        result.final_norm,
        result.final_low_mode_norm,
        audit.peak_stage,
        audit.geometric_after_peak,
        path.display()
    );
    Ok((result, summary))
}

fn sweep(cfg: &ExperimentConfig, seed: u64, out: &Path) -> Result<()> {
    let runs: Vec<ValidatedControlRun> = cfg
        .sweep
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut v = r.validate()?;
            if r.name.is_none() {
                v.name = format!("sweep{i:03}");
            }
            Ok(v)
        })
        .collect::<Result<_>>()?;
    let results: Vec<(String, Result<(crate::control::SynthesisResult, String)>)> = runs
        .par_iter()
        .map(|run| (run.name.clone(), control_run(run, seed, out, &run.name)))
        .collect();
    let mut csv = String::from("name,n_eff,total_cost,final_norm,final_low_mode_norm\n");
    for (name, res) in &results {
        match res {
            Ok((r, summary)) => {
                println!("{summary}");
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{}",
                    name,
                    fmt_f64(r.n_eff),
                    fmt_f64(r.total_cost),
                    fmt_f64(r.final_norm),
                    fmt_f64(r.final_low_mode_norm)
                );
            }
            Err(e) => {
                return Err(Error::Numerical(format!("sweep run {name} failed: {e}")));
            }
        }
    }
    let path = out.join("sweep_summary.csv");
    write_atomic(&path, &csv)?;
    println!("sweep: {} runs -> {}", results.len(), path.display());
    Ok(())
}

fn validate(
    run: &ValidatedControlRun,
    grid: usize,
    dt: f64,
    snapshots: &[f64],
    seed: u64,
    out: &Path,
) -> Result<()> {
    let basis = build_basis(&run.density, run.modes)?;
    let u0 = initial_data(&run.u0, run.modes, seed)?;
    let result = synthesize(&basis, &run.omega, &u0, run.t_total, run.mu0, run.stages)?;
    let cv = cross_validate(&basis, &result, &u0, grid, dt)?;
    for &t in snapshots {
        if !(t >= 0.0 && t <= run.t_total) {
            return Err(Error::InvalidInput(format!(
                "snapshot time {t} outside [0, {}]",
                run.t_total
            )));
        }
        let steps = (t / dt).round() as usize;
        let g0 = crate::simulate::GridState::from_modes(&basis, &u0, grid, 0.0);
        let density = run.density.clone();
        let h = g0.dx;
        let snap = crate::simulate::crank_nicolson(
            &g0,
            &move |x| density.cell_average(x, h),
            Some((&result.control, &run.omega)),
            dt,
            steps,
        );
        let path = out.join(format!("snapshot_t{t}.csv"));
        write_atomic(&path, &snap.to_csv())?;
        println!("snapshot at t = {t} -> {}", path.display());
    }
    let mut csv = String::from("distance,model_error,within_model,mask_measure_error\n");
    let _ = writeln!(
        csv,
        "{},{},{},{}",
        fmt_f64(cv.distance),
        fmt_f64(cv.model_error),
        cv.within_model,
        fmt_f64(cv.mask_measure_error)
    );
    let path = out.join("validate.csv");
    write_atomic(&path, &csv)?;
    println!(
        "validate: |spectral - CN| = {:.6e}, model error {:.6e}, within 5x: {}, \
         mask measure error {:.3e} -> {}",
        cv.distance,
        cv.model_error,
        cv.within_model,
        cv.mask_measure_error,
        path.display()
    );
    if !cv.within_model {
        return Err(Error::Numerical(
            "cross-validation distance exceeds 5x the convergence-model error".into(),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_parsing() {
        assert_eq!(parse_pairs("0.1,0.15;0.4,0.5").unwrap(), vec![[0.1, 0.15], [0.4, 0.5]]);
        assert!(parse_pairs("0.1;0.4,0.5").is_err());
        assert!(parse_pairs("a,b").is_err());
    }

    #[test]
    fn fixed_digit_format() {
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
        // 17 significant digits: mantissa "d.<16 digits>"
        let s = fmt_f64(std::f64::consts::PI);
        let mantissa = s.split('e').next().unwrap();
        assert_eq!(mantissa.len(), 18, "{s}");
    }

    #[test]
    fn unknown_subcommand_exits_one() {
        assert_eq!(run(["nullcontrol", "frobnicate"]), 1);
    }

    #[test]
    fn mode_initial_data() {
        let v = initial_data(&InitialData::Mode(2), 4, 0).unwrap();
        assert_eq!(v, vec![0.0, 1.0, 0.0, 0.0]);
        assert!(initial_data(&InitialData::Mode(9), 4, 0).is_err());
        let r1 = initial_data(&InitialData::Random, 8, 5).unwrap();
        let r2 = initial_data(&InitialData::Random, 8, 5).unwrap();
        assert_eq!(r1, r2);
        assert!((crate::linalg::norm2(&r1) - 1.0).abs() < 1e-12);
    }
}
