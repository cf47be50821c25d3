//! Decay-rate diagnostics: per-interval rates λ_n and w_n, total average
//! rates Λ_N(τ), τ-sweeps, and detection of the measurement-interval values
//! where dΛ_N/dτ changes sign (suppression ↔ enhancement transitions).

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{run_zeno, MeasurementKind, RunConfig, SurvivalSeries, ZenoProtocol};
use crate::error::{Error, Result};
use crate::model::{ModelParams, QubitState};

/// Per-interval decay rates derived from a survival series:
/// λ_n = (1/τ) ln[P(nτ)/P(nτ+τ)] and the scaled rate w_n = λ_n/τ.
#[derive(Debug, Clone)]
pub struct RateSeries {
    pub tau: f64,
    pub lambdas: Vec<f64>,
    pub scaled: Vec<f64>,
    /// Index at which the survival hit zero (infinite rate); the series is
    /// truncated just before it.
    pub truncated_at: Option<usize>,
}

/// Decay rates per Zeno interval from a survival series.
pub fn rates_from_series(series: &SurvivalSeries) -> RateSeries {
    let tau = series.tau;
    let mut lambdas = Vec::with_capacity(series.probs.len().saturating_sub(1));
    let mut truncated_at = None;
    for (n, pair) in series.probs.windows(2).enumerate() {
        if pair[1] <= 0.0 {
            truncated_at = Some(n);
            break;
        }
        lambdas.push((pair[0] / pair[1]).ln() / tau);
    }
    let scaled = lambdas.iter().map(|l| l / tau).collect();
    RateSeries {
        tau,
        lambdas,
        scaled,
        truncated_at,
    }
}

/// Total average decay rate Λ_N(τ) = −ln P(Nτ)/(Nτ), checked against the
/// equivalent per-interval sum (1/N)Σλ_n to 1e−10.
pub fn total_average_rate(series: &SurvivalSeries) -> Result<f64> {
    total_average_rate_prefix(series, series.probs.len() - 1)
}

/// Λ_N for a prefix of the series (N ≤ number of recorded measurements).
pub fn total_average_rate_prefix(series: &SurvivalSeries, n_meas: usize) -> Result<f64> {
    const IDENTITY_TOL: f64 = 1e-10;
    assert!(n_meas >= 1 && n_meas < series.probs.len());
    let p_final = series.probs[n_meas];
    if p_final <= 0.0 {
        return Err(Error::ZeroSurvival { n: n_meas });
    }
    let t_total = n_meas as f64 * series.tau;
    let direct = -p_final.ln() / t_total;
    let summed: f64 = series.probs[..=n_meas]
        .windows(2)
        .map(|pair| (pair[0] / pair[1]).ln() / series.tau)
        .sum::<f64>()
        / n_meas as f64;
    if (direct - summed).abs() > IDENTITY_TOL {
        return Err(Error::RateIdentityViolated {
            direct,
            summed,
            tol: IDENTITY_TOL,
        });
    }
    Ok(direct)
}

/// Sign of dΛ/dτ on a segment: positive slope is measurement-induced
/// suppression (QZE), negative slope is enhancement (QAZE).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ZenoClass {
    Qze,
    Qaze,
}

/// Direction of a dΛ_N/dτ sign change.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TransitionDirection {
    /// Slope turns from positive to negative (suppression → enhancement).
    QzeToQaze,
    /// Slope turns from negative to positive.
    QazeToQze,
}

impl TransitionDirection {
    pub fn from_class(&self) -> ZenoClass {
        match self {
            TransitionDirection::QzeToQaze => ZenoClass::Qze,
            TransitionDirection::QazeToQze => ZenoClass::Qaze,
        }
    }

    pub fn to_class(&self) -> ZenoClass {
        match self {
            TransitionDirection::QzeToQaze => ZenoClass::Qaze,
            TransitionDirection::QazeToQze => ZenoClass::Qze,
        }
    }
}

/// A sign change of dΛ_N/dτ.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TransitionPoint {
    pub tau_c: f64,
    pub direction: TransitionDirection,
}

/// Transition diagnostics for one N row of a sweep.
#[derive(Debug, Clone, Serialize)]
pub struct TransitionAnalysis {
    pub n_meas: usize,
    pub points: Vec<TransitionPoint>,
    /// Grid segments between transitions, labeled by slope sign.
    pub segments: Vec<(f64, f64, ZenoClass)>,
    /// True when |dΛ/dτ| stayed below the flatness tolerance everywhere.
    pub flat: bool,
}

/// A sweep cell that failed (e.g. truncation did not converge); recorded, not
/// fatal.
#[derive(Debug, Clone, Serialize)]
pub struct CellIssue {
    pub tau_index: usize,
    pub tau: f64,
    pub message: String,
}

/// Λ_N(τ) over a τ grid for a set of measurement counts.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub params: ModelParams,
    pub taus: Vec<f64>,
    pub n_list: Vec<usize>,
    /// `lambda[i][j]` = Λ over `n_list[i]` measurements at `taus[j]`; NaN in
    /// failed cells.
    pub lambda: Vec<Vec<f64>>,
    /// Truncation each τ column finished with (0 in failed cells).
    pub n_max_used: Vec<usize>,
    pub issues: Vec<CellIssue>,
}

/// Default τ grid for transition sweeps: 60 log-spaced points over
/// [0.05, 6]/Δ.
pub fn default_tau_grid(delta: f64) -> Vec<f64> {
    crate::numeric::logspace(0.05 / delta, 6.0 / delta, 60)
}

/// Sweep Λ_N(τ) over the τ grid. Each τ column is one protocol run with
/// N = max(n_list) measurements; smaller N values read the intermediate
/// survival checkpoints of that run (the N values nest). Columns run in
/// parallel on the current rayon pool; cell failures are recorded per column.
pub fn sweep_tau(
    params: &ModelParams,
    psi: &QubitState,
    n_list: &[usize],
    tau_grid: &[f64],
    cfg: &RunConfig,
) -> Result<SweepResult> {
    if n_list.is_empty() || n_list.contains(&0) {
        return Err(Error::InvalidParameter(
            "n_list must be non-empty with all entries >= 1".into(),
        ));
    }
    if tau_grid.is_empty() || tau_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "tau_grid must be strictly ascending".into(),
        ));
    }
    let n_top = *n_list.iter().max().unwrap();

    // One column per τ: (Λ values for every N, truncation used) or an error
    // message for the recorded issue list.
    type Column = std::result::Result<(Vec<f64>, usize), String>;
    let columns: Vec<(usize, Column)> = tau_grid
        .par_iter()
        .enumerate()
        .map(|(j, &tau)| {
            let run = ZenoProtocol::new(tau, n_top, MeasurementKind::Selective(*psi))
                .and_then(|protocol| run_zeno(params, psi, &protocol, cfg))
                .and_then(|series| {
                    let col = n_list
                        .iter()
                        .map(|&n| total_average_rate_prefix(&series, n))
                        .collect::<Result<Vec<f64>>>()?;
                    Ok((col, series.n_max))
                });
            (j, run.map_err(|e| e.to_string()))
        })
        .collect();

    let mut lambda = vec![vec![f64::NAN; tau_grid.len()]; n_list.len()];
    let mut n_max_used = vec![0usize; tau_grid.len()];
    let mut issues = Vec::new();
    for (j, outcome) in columns {
        match outcome {
            Ok((col, n_max)) => {
                for (i, value) in col.into_iter().enumerate() {
                    lambda[i][j] = value;
                }
                n_max_used[j] = n_max;
            }
            Err(message) => issues.push(CellIssue {
                tau_index: j,
                tau: tau_grid[j],
                message,
            }),
        }
    }
    Ok(SweepResult {
        params: *params,
        taus: tau_grid.to_vec(),
        n_list: n_list.to_vec(),
        lambda,
        n_max_used,
        issues,
    })
}

/// Derivative of row values on a (possibly non-uniform) ascending grid:
/// three-point central differences inside, one-sided at the ends.
pub fn grid_derivative(taus: &[f64], values: &[f64]) -> Vec<f64> {
    let n = taus.len();
    assert!(n >= 2 && values.len() == n);
    let mut d = vec![f64::NAN; n];
    d[0] = (values[1] - values[0]) / (taus[1] - taus[0]);
    d[n - 1] = (values[n - 1] - values[n - 2]) / (taus[n - 1] - taus[n - 2]);
    for i in 1..n - 1 {
        let hm = taus[i] - taus[i - 1];
        let hp = taus[i + 1] - taus[i];
        d[i] = (hm * hm * values[i + 1] + (hp * hp - hm * hm) * values[i]
            - hp * hp * values[i - 1])
            / (hm * hp * (hm + hp));
    }
    d
}

/// Local cubic (4-point Lagrange) interpolant of Λ(τ) around grid cell `i`,
/// returned as a closure over its analytic derivative.
fn cubic_derivative_at<'a>(
    taus: &'a [f64],
    values: &'a [f64],
    i: usize,
) -> impl Fn(f64) -> f64 + 'a {
    let n = taus.len();
    let lo = i.saturating_sub(1).min(n - 4);
    move |x: f64| {
        let xs = &taus[lo..lo + 4];
        let ys = &values[lo..lo + 4];
        // Derivative of the Lagrange basis polynomials.
        let mut acc = 0.0;
        for k in 0..4 {
            let mut term = 0.0;
            for m in 0..4 {
                if m == k {
                    continue;
                }
                let mut prod = 1.0;
                for l in 0..4 {
                    if l == k || l == m {
                        continue;
                    }
                    prod *= (x - xs[l]) / (xs[k] - xs[l]);
                }
                term += prod / (xs[k] - xs[m]);
            }
            acc += ys[k] * term;
        }
        acc
    }
}

/// Locate every sign change of dΛ_N/dτ for each N row of the sweep.
///
/// Derivatives come from central differences on the grid; each crossing is
/// refined by bisection on the derivative of a local cubic interpolant to a
/// τ tolerance of 1e−3/Δ. Rows whose derivative never leaves the flatness
/// band |dΛ/dτ| < 1e−6·Δ² are reported flat with no transitions.
pub fn transition_times(sweep: &SweepResult) -> Vec<TransitionAnalysis> {
    let delta = sweep.params.delta;
    let refine_tol = 1e-3 / delta;
    let flat_tol = 1e-6 * delta * delta;

    sweep
        .n_list
        .iter()
        .zip(&sweep.lambda)
        .map(|(&n_meas, row)| analyze_row(&sweep.taus, row, n_meas, refine_tol, flat_tol))
        .collect()
}

fn analyze_row(
    taus: &[f64],
    row: &[f64],
    n_meas: usize,
    refine_tol: f64,
    flat_tol: f64,
) -> TransitionAnalysis {
    // Ignore failed cells by working on the largest finite prefix/suffix.
    let finite: Vec<usize> = row
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .map(|(i, _)| i)
        .collect();
    if finite.len() < 4 {
        return TransitionAnalysis {
            n_meas,
            points: Vec::new(),
            segments: Vec::new(),
            flat: false,
        };
    }
    let lo = finite[0];
    let hi = *finite.last().unwrap();
    let taus = &taus[lo..=hi];
    let row = &row[lo..=hi];

    let deriv = grid_derivative(taus, row);
    if deriv.iter().all(|d| d.abs() < flat_tol) {
        return TransitionAnalysis {
            n_meas,
            points: Vec::new(),
            segments: vec![(taus[0], *taus.last().unwrap(), ZenoClass::Qze)],
            flat: true,
        };
    }

    let class_of = |d: f64| {
        if d > 0.0 {
            ZenoClass::Qze
        } else {
            ZenoClass::Qaze
        }
    };
    let mut points: Vec<TransitionPoint> = Vec::new();
    for i in 0..deriv.len() - 1 {
        if deriv[i] == 0.0 || deriv[i] * deriv[i + 1] >= 0.0 {
            continue;
        }
        // Bisection on the cubic-interpolant derivative inside [τ_i, τ_{i+1}].
        let df = cubic_derivative_at(taus, row, i);
        let (mut a, mut b) = (taus[i], taus[i + 1]);
        let (mut fa, fb) = (df(a), df(b));
        // Central-difference and cubic derivatives can disagree at the cell
        // edge; fall back to the linear crossing of the central differences.
        let tau_c = if fa * fb > 0.0 {
            a + (b - a) * deriv[i].abs() / (deriv[i].abs() + deriv[i + 1].abs())
        } else {
            while b - a > refine_tol {
                let m = 0.5 * (a + b);
                let fm = df(m);
                if fa * fm <= 0.0 {
                    b = m;
                } else {
                    a = m;
                    fa = fm;
                }
            }
            0.5 * (a + b)
        };
        let direction = if deriv[i] > 0.0 {
            TransitionDirection::QzeToQaze
        } else {
            TransitionDirection::QazeToQze
        };
        points.push(TransitionPoint { tau_c, direction });
    }

    // Segments between consecutive transitions, labeled by the derivative
    // sign in their interior.
    let mut segments = Vec::new();
    let mut start = taus[0];
    let mut current = class_of(deriv[0]);
    for p in &points {
        segments.push((start, p.tau_c, current));
        start = p.tau_c;
        current = p.direction.to_class();
    }
    segments.push((start, *taus.last().unwrap(), current));

    TransitionAnalysis {
        n_meas,
        points,
        segments,
        flat: false,
    }
}

/// Build a survival series from an externally supplied per-interval survival
/// law P(nτ) = p(τ)ⁿ (used to cross-check N-independence of bath-reset
/// models through the same analysis pipeline).
pub fn series_from_product_law(
    tau: f64,
    n_meas: usize,
    p_tau: f64,
    params: &ModelParams,
) -> SurvivalSeries {
    SurvivalSeries {
        tau,
        times: (0..=n_meas).map(|n| n as f64 * tau).collect(),
        probs: (0..=n_meas).map(|n| p_tau.powi(n as i32)).collect(),
        params: *params,
        n_max: 0,
        converged: true,
        max_trace_drift: 0.0,
        max_hermiticity_drift: 0.0,
    }
}
