//! Subcommand orchestration for the `zeno-lab` binary: experiment runs,
//! figure presets, analytic comparisons, and convergence reports, all emitted
//! as flat files.

use std::path::{Path, PathBuf};

use crate::analysis::{rates_from_series, sweep_tau, transition_times};
use crate::analytic::{
    bath_reset_survival_finite_tau, bath_reset_w_continuous, ContinuousLimitRate,
    MonitoringSchedule, RateEquationModel, RwAnalytic,
};
use crate::config::{presets, ExperimentConfig, FigureId, OutputFormat};
use crate::dynamics::{run_sampled, run_zeno, MeasurementKind, RunConfig, ZenoProtocol};
use crate::error::{Error, Result};
use crate::model::{ModelParams, QubitState, Variant};
use crate::numeric::linspace;
use crate::output::{write_survival, write_sweep, write_transitions, Manifest, Table};

/// CLI subcommands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    SweepTau,
    Figure(FigureId),
    CompareRw,
    CompareRate,
    CheckConvergence,
}

impl Command {
    pub fn name(&self) -> String {
        match self {
            Command::Simulate => "simulate".into(),
            Command::SweepTau => "sweep-tau".into(),
            Command::Figure(id) => format!("figure {id}"),
            Command::CompareRw => "compare-rw".into(),
            Command::CompareRate => "compare-rate".into(),
            Command::CheckConvergence => "check-convergence".into(),
        }
    }
}

/// Flags that override config values.
#[derive(Debug, Clone, Default)]
pub struct CliOptions {
    pub out_dir: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub format: Option<OutputFormat>,
}

/// Run one subcommand; returns the paths written.
pub fn run_command(
    command: Command,
    config: &ExperimentConfig,
    opts: &CliOptions,
) -> Result<Vec<PathBuf>> {
    config.validate()?;
    let out_dir = opts
        .out_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from(&config.out_dir));
    let format = opts.format.unwrap_or(config.format);

    let work = || -> Result<Vec<PathBuf>> {
        match command {
            Command::Simulate => simulate(config, &out_dir, format),
            Command::SweepTau => sweep(config, &out_dir, format),
            Command::Figure(id) => figure(id, config, &out_dir, format),
            Command::CompareRw => compare_rw(config, &out_dir, format),
            Command::CompareRate => compare_rate(config, &out_dir, format),
            Command::CheckConvergence => check_convergence(config, &out_dir),
        }
    };

    match opts.jobs {
        Some(jobs) if jobs > 0 => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?
            .install(work),
        _ => work(),
    }
}

fn simulate(config: &ExperimentConfig, dir: &Path, format: OutputFormat) -> Result<Vec<PathBuf>> {
    let params = config.model_params()?;
    let psi = config.qubit_state()?;
    let protocol = config.protocol()?;
    let run_cfg = config.run_config()?;

    let series = run_zeno(&params, &psi, &protocol, &run_cfg)?;
    let rates = rates_from_series(&series);

    let mut manifest = Manifest::new("simulate", config);
    let path = write_survival(dir, "survival", &series, &rates, format)?;
    manifest.record_output(&path);
    manifest.record_n_max("survival", series.n_max);
    manifest.converged = series.converged;
    let mpath = manifest.write(dir)?;
    Ok(vec![path, mpath])
}

fn sweep(config: &ExperimentConfig, dir: &Path, format: OutputFormat) -> Result<Vec<PathBuf>> {
    let params = config.model_params()?;
    let psi = config.qubit_state()?;
    let run_cfg = config.run_config()?;
    let grid = config.tau_grid();

    let sweep = sweep_tau(&params, &psi, &config.n_list, &grid, &run_cfg)?;
    let transitions = transition_times(&sweep);

    let mut manifest = Manifest::new("sweep-tau", config);
    let spath = write_sweep(dir, "sweep", &sweep, format)?;
    let tpath = write_transitions(dir, "transitions", &transitions)?;
    manifest.record_output(&spath);
    manifest.record_output(&tpath);
    for issue in &sweep.issues {
        manifest
            .issues
            .push(format!("tau={}: {}", issue.tau, issue.message));
    }
    manifest.converged = sweep.issues.is_empty();
    if let Some(&n_max) = sweep.n_max_used.iter().max() {
        manifest.record_n_max("sweep", n_max);
    }
    let mpath = manifest.write(dir)?;
    Ok(vec![spath, tpath, mpath])
}

/// Short file-name tag for a (g, gamma) pair.
fn pair_tag(g: f64, gamma: f64) -> String {
    format!("g{g}_gamma{gamma}")
}

fn figure(
    id: FigureId,
    config: &ExperimentConfig,
    dir: &Path,
    format: OutputFormat,
) -> Result<Vec<PathBuf>> {
    let mut manifest = Manifest::new("figure", config);
    let mut paths = Vec::new();
    let run_cfg = RunConfig::default();

    match id {
        FigureId::Fig1 => {
            // Continuous rotating-wave survival of |e⟩ vs the closed form.
            for (g, gamma) in presets::fig1_pairs() {
                let params = presets::base_params(Variant::Jc, g, gamma);
                let psi = QubitState::excited();
                let n = (presets::FIG1_T_MAX / presets::FIG1_SAMPLE_TAU).round() as usize;
                let protocol =
                    ZenoProtocol::new(presets::FIG1_SAMPLE_TAU, n, MeasurementKind::None)?;
                let series = run_zeno(&params, &psi, &protocol, &run_cfg)?;
                let rw = RwAnalytic::new(params);
                let mut table = Table::new(vec!["t", "P_numeric", "P_analytic", "residual"]);
                for (&t, &p) in series.times.iter().zip(&series.probs) {
                    let exact = rw.alpha(t).norm_sqr();
                    table.push(vec![t, p, exact, p - exact]);
                }
                let stem = format!("fig1_{}", pair_tag(g, gamma));
                let path = table.write(dir, &stem, format)?;
                manifest.record_output(&path);
                manifest.record_n_max(&stem, series.n_max);
                paths.push(path);
            }
        }
        FigureId::Fig2 => {
            // Repeated projections onto a superposition vs the product law.
            for (g, gamma) in presets::fig2_pairs() {
                let params = presets::base_params(Variant::Jc, g, gamma);
                let psi = presets::fig2_state();
                let protocol = ZenoProtocol::new(
                    presets::FIG2_TAU,
                    presets::FIG2_N,
                    MeasurementKind::Selective(psi),
                )?;
                let series = run_zeno(&params, &psi, &protocol, &run_cfg)?;
                let p1 = RwAnalytic::new(params).first_interval_general(&psi, presets::FIG2_TAU);
                let mut table = Table::new(vec!["n", "t", "P_exact", "P_product", "deviation"]);
                for (n, (&t, &p)) in series.times.iter().zip(&series.probs).enumerate() {
                    let product = p1.powi(n as i32);
                    table.push(vec![n as f64, t, p, product, p - product]);
                }
                let stem = format!("fig2_{}", pair_tag(g, gamma));
                let path = table.write(dir, &stem, format)?;
                manifest.record_output(&path);
                manifest.record_n_max(&stem, series.n_max);
                paths.push(path);
            }
        }
        FigureId::Fig3 => {
            // Ground-state heating under non-selective monitoring: exact
            // master equation vs the perturbative rate equation.
            for (label, g) in [
                ("weak", presets::FIG3_G_WEAK),
                ("moderate", presets::FIG3_G_MODERATE),
            ] {
                let params = presets::base_params(Variant::Rabi, g, presets::FIG3_GAMMA);
                let schedule = presets::fig3_schedule();
                let stem = format!("fig3_{label}_g{g}");
                let path = rate_comparison_table(
                    &params,
                    &schedule,
                    config.rate_clock,
                    &run_cfg,
                    dir,
                    &stem,
                    format,
                )?;
                manifest.record_output(&path);
                paths.push(path);
            }
        }
        FigureId::Fig4 => {
            // Scaled per-interval decay rates vs the continuous limit.
            for (g, gamma) in presets::fig4_pairs() {
                let params = presets::base_params(Variant::Rabi, g, gamma);
                let psi = presets::fig4_state();
                for tau in presets::fig4_taus() {
                    let n = (presets::FIG4_T_MAX / tau).round() as usize;
                    let protocol = ZenoProtocol::new(tau, n, MeasurementKind::Selective(psi))?;
                    let series = run_zeno(&params, &psi, &protocol, &run_cfg)?;
                    let rates = rates_from_series(&series);
                    let mut table = Table::new(vec!["n", "t", "w_n"]);
                    for (n, &w) in rates.scaled.iter().enumerate() {
                        table.push(vec![n as f64, n as f64 * tau, w]);
                    }
                    let stem = format!("fig4_{}_tau{tau}", pair_tag(g, gamma));
                    let path = table.write(dir, &stem, format)?;
                    manifest.record_output(&path);
                    manifest.record_n_max(&stem, series.n_max);
                    paths.push(path);
                }
                // Continuous-limit curve on a dense grid.
                let rate = ContinuousLimitRate::new(params, psi);
                let mut table = Table::new(vec!["t", "w"]);
                for t in linspace(0.0, presets::FIG4_T_MAX, 801) {
                    table.push(vec![t, rate.w(t)]);
                }
                let stem = format!("fig4_{}_analytic", pair_tag(g, gamma));
                let path = table.write(dir, &stem, format)?;
                manifest.record_output(&path);
                paths.push(path);
            }
        }
        FigureId::Fig5 => {
            // w(t) for four initial states vs the bath-reset constants.
            let mut reset_rows = Vec::new();
            for (name, psi) in presets::fig5_states() {
                let params =
                    presets::base_params(Variant::Rabi, presets::FIG5_G, presets::FIG5_GAMMA);
                let tau = presets::FIG5_TAU_COARSE;
                let n = (presets::FIG5_T_MAX / tau).round() as usize;
                let protocol = ZenoProtocol::new(tau, n, MeasurementKind::Selective(psi))?;
                let series = run_zeno(&params, &psi, &protocol, &run_cfg)?;
                let rates = rates_from_series(&series);
                let mut table = Table::new(vec!["n", "t", "w_n"]);
                for (k, &w) in rates.scaled.iter().enumerate() {
                    table.push(vec![k as f64, k as f64 * tau, w]);
                }
                let stem = format!("fig5_{name}_wn");
                let path = table.write(dir, &stem, format)?;
                manifest.record_output(&path);
                paths.push(path);

                let rate = ContinuousLimitRate::new(params, psi);
                let mut table = Table::new(vec!["t", "w"]);
                for t in linspace(0.0, presets::FIG5_T_MAX, 801) {
                    table.push(vec![t, rate.w(t)]);
                }
                let path = table.write(dir, &format!("fig5_{name}_analytic"), format)?;
                manifest.record_output(&path);
                paths.push(path);

                let coarse = bath_reset_survival_finite_tau(
                    &psi,
                    presets::FIG5_TAU_COARSE,
                    &params,
                    &run_cfg,
                )?;
                let fine = bath_reset_survival_finite_tau(
                    &psi,
                    presets::FIG5_TAU_FINE,
                    &params,
                    &run_cfg,
                )?;
                reset_rows.push(serde_json::json!({
                    "state": name,
                    "w_reset_tau_coarse": coarse.w,
                    "w_reset_tau_fine": fine.w,
                    "w_reset_continuous": bath_reset_w_continuous(&psi, &params),
                }));
            }
            let reset_path = dir.join("fig5_reset_rates.json");
            std::fs::create_dir_all(dir)?;
            std::fs::write(
                &reset_path,
                serde_json::to_string_pretty(&reset_rows).expect("serializable") + "\n",
            )?;
            manifest.record_output(&reset_path);
            paths.push(reset_path);
        }
        FigureId::Fig6 => {
            // Λ_N(τ) sweeps over six (g, Γ) panels with transition detection.
            for (g, gamma) in presets::fig6_panels() {
                let params = presets::base_params(Variant::Rabi, g, gamma);
                let psi = QubitState::excited();
                let grid = crate::analysis::default_tau_grid(params.delta);
                let sweep = sweep_tau(&params, &psi, &presets::fig6_n_list(), &grid, &run_cfg)?;
                let transitions = transition_times(&sweep);
                let tag = pair_tag(g, gamma);
                let spath = write_sweep(dir, &format!("fig6_{tag}_sweep"), &sweep, format)?;
                let tpath =
                    write_transitions(dir, &format!("fig6_{tag}_transitions"), &transitions)?;
                for issue in &sweep.issues {
                    manifest
                        .issues
                        .push(format!("fig6 {tag} tau={}: {}", issue.tau, issue.message));
                }
                if let Some(&n_max) = sweep.n_max_used.iter().max() {
                    manifest.record_n_max(&format!("fig6_{tag}"), n_max);
                }
                manifest.record_output(&spath);
                manifest.record_output(&tpath);
                paths.push(spath);
                paths.push(tpath);
            }
            manifest.converged = manifest.issues.is_empty();
        }
    }

    let mpath = manifest.write(dir)?;
    paths.push(mpath);
    Ok(paths)
}

fn compare_rw(config: &ExperimentConfig, dir: &Path, format: OutputFormat) -> Result<Vec<PathBuf>> {
    let params = config.model_params()?;
    let psi = config.qubit_state()?;
    let run_cfg = config.run_config()?;
    let protocol = ZenoProtocol::new(config.tau, config.n, MeasurementKind::Selective(psi))?;
    let series = run_zeno(&params, &psi, &protocol, &run_cfg)?;

    let rw = RwAnalytic::new(params);
    let p1 = rw.first_interval_general(&psi, config.tau);
    let mut table = Table::new(vec!["n", "t", "P_master", "P_rw", "residual"]);
    for (n, (&t, &p)) in series.times.iter().zip(&series.probs).enumerate() {
        let analytic = p1.powi(n as i32);
        table.push(vec![n as f64, t, p, analytic, p - analytic]);
    }
    let path = table.write(dir, "compare_rw", format)?;
    let mut manifest = Manifest::new("compare-rw", config);
    manifest.record_output(&path);
    manifest.record_n_max("compare_rw", series.n_max);
    manifest.converged = series.converged;
    let mpath = manifest.write(dir)?;
    Ok(vec![path, mpath])
}

/// Shared by fig3 and compare-rate: master-equation ρ_ee(t) under the
/// non-selective schedule against the rate-equation populations, on the
/// integration time grid.
fn rate_comparison_table(
    params: &ModelParams,
    schedule: &MonitoringSchedule,
    clock: crate::analytic::RateClock,
    run_cfg: &RunConfig,
    dir: &Path,
    stem: &str,
    format: OutputFormat,
) -> Result<PathBuf> {
    let psi = QubitState::ground();
    let protocol = ZenoProtocol::new(schedule.tau, schedule.n_meas, MeasurementKind::Nonselective)?
        .with_pre_evolution(schedule.relax_time)?;
    let sampled = run_sampled(params, &psi, &protocol, run_cfg)?;

    let model = RateEquationModel::new(*params);
    let rate_pops = model.run(schedule, &sampled.times, clock, 0.0)?;

    let mut table = Table::new(vec!["t", "rho_ee_master", "rho_ee_rate", "diff"]);
    for ((&t, &pe), &pr) in sampled.times.iter().zip(&sampled.excited).zip(&rate_pops) {
        table.push(vec![t, pe, pr, pe - pr]);
    }
    table.write(dir, stem, format)
}

fn compare_rate(
    config: &ExperimentConfig,
    dir: &Path,
    format: OutputFormat,
) -> Result<Vec<PathBuf>> {
    let params = config.model_params()?;
    let run_cfg = config.run_config()?;
    let schedule = MonitoringSchedule {
        relax_time: config.pre_evolution_time,
        tau: config.tau,
        n_meas: config.n,
    };
    let path = rate_comparison_table(
        &params,
        &schedule,
        config.rate_clock,
        &run_cfg,
        dir,
        "compare_rate",
        format,
    )?;
    let mut manifest = Manifest::new("compare-rate", config);
    manifest.record_output(&path);
    let mpath = manifest.write(dir)?;
    Ok(vec![path, mpath])
}

fn check_convergence(config: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    let params = config.model_params()?;
    let psi = config.qubit_state()?;
    let protocol = config.protocol()?;
    let base_cfg = config.run_config()?;

    let base = run_zeno(&params, &psi, &protocol, &base_cfg)?;

    let mut halved = base_cfg;
    halved.integrator.steps_per_interval *= 2;
    if halved.integrator.step_hint.is_finite() {
        halved.integrator.step_hint *= 0.5;
    } else {
        halved.integrator.step_hint = 0.5 * 0.05 / params.frequency_scale();
    }
    let fine = run_zeno(&params, &psi, &protocol, &halved)?;

    let mut doubled = base_cfg;
    doubled.truncation.n_max = 2 * base.n_max;
    doubled.truncation.adaptive = false;
    let big = run_zeno(&params, &psi, &protocol, &doubled)?;

    let max_abs = |a: &[f64], b: &[f64]| {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    };
    let step_delta = max_abs(&base.probs, &fine.probs);
    let trunc_delta = max_abs(&base.probs, &big.probs);
    let tol = base_cfg.integrator.convergence_tol;

    let report = serde_json::json!({
        "step_halving_max_delta": step_delta,
        "truncation_doubling_max_delta": trunc_delta,
        "tolerance": tol,
        "n_max_base": base.n_max,
        "n_max_doubled": big.n_max,
        "max_trace_drift_per_interval": base.max_trace_drift,
        "max_hermiticity_drift": base.max_hermiticity_drift,
        "converged": step_delta <= tol && trunc_delta <= tol,
    });
    std::fs::create_dir_all(dir)?;
    let path = dir.join("convergence.json");
    std::fs::write(&path, serde_json::to_string_pretty(&report).unwrap() + "\n")?;

    let mut manifest = Manifest::new("check-convergence", config);
    manifest.record_output(&path);
    manifest.record_n_max("base", base.n_max);
    manifest.record_n_max("doubled", big.n_max);
    let mpath = manifest.write(dir)?;

    if step_delta > tol || trunc_delta > tol {
        return Err(Error::ConvergenceCheck(format!(
            "step-halving delta {step_delta:.3e}, truncation-doubling delta {trunc_delta:.3e} \
             exceed tolerance {tol:.1e}"
        )));
    }
    Ok(vec![path, mpath])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn test_config() -> ExperimentConfig {
        ExperimentConfig::parse(
            r#"
delta = 1.0
omega0 = 1.0
g = 0.3
gamma = 0.1
variant = "jc"
state = "e"
tau = 0.5
n = 8
"#,
        )
        .unwrap()
    }

    #[test]
    fn simulate_writes_survival_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let opts = CliOptions {
            out_dir: Some(dir.path().to_path_buf()),
            ..Default::default()
        };
        let paths = run_command(Command::Simulate, &test_config(), &opts).unwrap();
        assert_eq!(paths.len(), 2);
        let text = std::fs::read_to_string(&paths[0]).unwrap();
        // Header + N + 1 rows.
        assert_eq!(text.lines().count(), 1 + 8 + 1);
        assert!(text.starts_with("n,t,P,lambda_n,w_n\n"));
        let manifest = std::fs::read_to_string(&paths[1]).unwrap();
        assert!(manifest.contains("\"command\": \"simulate\""));
    }

    #[test]
    fn identical_configs_produce_byte_identical_data() {
        let cfg = test_config();
        let d1 = tempfile::tempdir().unwrap();
        let d2 = tempfile::tempdir().unwrap();
        for d in [&d1, &d2] {
            let opts = CliOptions {
                out_dir: Some(d.path().to_path_buf()),
                ..Default::default()
            };
            run_command(Command::Simulate, &cfg, &opts).unwrap();
        }
        let a = std::fs::read(d1.path().join("survival.csv")).unwrap();
        let b = std::fs::read(d2.path().join("survival.csv")).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sweep_writes_complete_grid() {
        let mut cfg = test_config();
        cfg.tau_points = 6;
        cfg.tau_min = Some(0.2);
        cfg.tau_max = Some(1.0);
        cfg.n_list = vec![1, 2];
        let dir = tempfile::tempdir().unwrap();
        let opts = CliOptions {
            out_dir: Some(dir.path().to_path_buf()),
            jobs: Some(2),
            ..Default::default()
        };
        let paths = run_command(Command::SweepTau, &cfg, &opts).unwrap();
        let text = std::fs::read_to_string(&paths[0]).unwrap();
        assert_eq!(text.lines().count(), 1 + 6 * 2);
        let transitions = std::fs::read_to_string(&paths[1]).unwrap();
        assert!(transitions.contains("\"n_meas\": 1"));
    }

    #[test]
    fn compare_rw_residuals_are_small_for_jc_excited() {
        let dir = tempfile::tempdir().unwrap();
        let opts = CliOptions {
            out_dir: Some(dir.path().to_path_buf()),
            ..Default::default()
        };
        let paths = run_command(Command::CompareRw, &test_config(), &opts).unwrap();
        let text = std::fs::read_to_string(&paths[0]).unwrap();
        for line in text.lines().skip(1) {
            let residual: f64 = line.split(',').next_back().unwrap().parse().unwrap();
            assert!(residual.abs() < 1e-4, "residual {residual} too large");
        }
    }

    #[test]
    fn check_convergence_reports_and_passes() {
        let dir = tempfile::tempdir().unwrap();
        let opts = CliOptions {
            out_dir: Some(dir.path().to_path_buf()),
            ..Default::default()
        };
        let paths = run_command(Command::CheckConvergence, &test_config(), &opts).unwrap();
        let report: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&paths[0]).unwrap()).unwrap();
        assert_eq!(report["converged"], serde_json::Value::Bool(true));
        assert!(report["step_halving_max_delta"].as_f64().unwrap() < 1e-6);
    }

    #[test]
    fn json_format_emits_json_series() {
        let mut cfg = test_config();
        cfg.format = OutputFormat::Json;
        let dir = tempfile::tempdir().unwrap();
        let opts = CliOptions {
            out_dir: Some(dir.path().to_path_buf()),
            ..Default::default()
        };
        let paths = run_command(Command::Simulate, &cfg, &opts).unwrap();
        assert!(paths[0].to_string_lossy().ends_with("survival.json"));
        let rows: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&paths[0]).unwrap()).unwrap();
        assert_eq!(rows.as_array().unwrap().len(), 9);
    }
}
