//! Master-equation propagation and projective-measurement protocols.
//!
//! The generator is dρ/dt = −i[H, ρ] − Γ(a†a ρ + ρ a†a − 2 a ρ a†), i.e. a
//! Lindblad dissipator with jump operator √(2Γ) a. Between measurements the
//! state is propagated by fixed-step RK4; measurements land exactly on grid
//! points because the step divides the Zeno interval.

use ndarray::{linalg::general_mat_mul, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{
    build_operators, initial_state, DensityMatrix, HilbertConfig, ModelParams, OperatorSet,
    QubitState,
};

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Integration scheme. Only fixed-step RK4 is provided; the fixed step keeps
/// collapse instants on grid points with no event-location error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    FixedRk4,
}

/// Step-size policy for the fixed-step integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub scheme: Scheme,
    /// Absolute cap on the step size; infinite by default so that the
    /// frequency-scale rule below decides.
    pub step_hint: f64,
    /// Minimum number of steps per Zeno interval (h = τ/steps divides τ
    /// exactly). At least 10.
    pub steps_per_interval: usize,
    /// Relative tolerance used by step-halving verification.
    pub convergence_tol: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::FixedRk4,
            step_hint: f64::INFINITY,
            steps_per_interval: 10,
            convergence_tol: 1e-6,
        }
    }
}

impl IntegratorConfig {
    /// Number of RK4 steps used to cover `duration`: at least
    /// `steps_per_interval`, and enough that
    /// h·max(Δ, ω₀, g, Γ) ≤ 0.05 and h ≤ step_hint.
    pub fn steps_for(&self, duration: f64, params: &ModelParams) -> usize {
        let h_cap = self.step_hint.min(0.05 / params.frequency_scale());
        let needed = (duration / h_cap).ceil() as usize;
        needed.max(self.steps_per_interval).max(1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps_per_interval < 10 {
            return Err(Error::InvalidParameter(format!(
                "steps_per_interval must be >= 10, got {}",
                self.steps_per_interval
            )));
        }
        if self.step_hint.is_nan() || self.step_hint <= 0.0 {
            return Err(Error::InvalidParameter("step_hint must be > 0".into()));
        }
        if self.convergence_tol.is_nan() || self.convergence_tol <= 0.0 {
            return Err(Error::InvalidParameter(
                "convergence_tol must be > 0".into(),
            ));
        }
        Ok(())
    }
}

/// Fock-truncation policy for protocol runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationConfig {
    /// Initial number of boson levels minus one.
    pub n_max: usize,
    /// Grow n_max by 50% and rerun whenever the top two Fock levels hold more
    /// than `threshold` population at a checkpoint. When disabled the run
    /// completes at the fixed n_max and reports `converged = false` instead.
    pub adaptive: bool,
    pub threshold: f64,
    /// Hard cap on n_max; exceeding it is a convergence failure.
    pub limit: usize,
}

impl Default for TruncationConfig {
    fn default() -> Self {
        Self {
            n_max: 12,
            adaptive: true,
            threshold: 1e-8,
            limit: 128,
        }
    }
}

/// Integrator plus truncation policy; everything a protocol run needs besides
/// the physics.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunConfig {
    pub integrator: IntegratorConfig,
    pub truncation: TruncationConfig,
}

/// What happens at each scheduled measurement instant.
#[derive(Debug, Clone, PartialEq)]
pub enum MeasurementKind {
    /// Project onto |ψ_S⟩⟨ψ_S| ⊗ I without renormalizing; the trace after the
    /// n-th projection is the joint survival probability P(nτ).
    Selective(QubitState),
    /// Erase qubit coherences (P_e ρ P_e + P_g ρ P_g), keeping qubit–boson
    /// block correlations. Trace preserving.
    Nonselective,
    /// Like `Nonselective`, but additionally factorize the post-measurement
    /// state into (diagonal qubit) ⊗ (reduced boson state).
    NonselectiveFactorized,
    /// No collapse: record the would-be survival probability and leave the
    /// state untouched.
    None,
}

/// Measurement schedule: optional measurement-free lead-in, then `n_meas`
/// equally spaced measurements with Zeno interval `tau`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZenoProtocol {
    pub tau: f64,
    pub n_meas: usize,
    pub measurement: MeasurementKind,
    pub pre_evolution_time: f64,
}

impl ZenoProtocol {
    pub fn new(tau: f64, n_meas: usize, measurement: MeasurementKind) -> Result<Self> {
        let p = Self {
            tau,
            n_meas,
            measurement,
            pre_evolution_time: 0.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_pre_evolution(mut self, t: f64) -> Result<Self> {
        self.pre_evolution_time = t;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.tau.is_nan() || self.tau <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "tau must be > 0, got {}",
                self.tau
            )));
        }
        if self.pre_evolution_time < 0.0 {
            return Err(Error::InvalidParameter(
                "pre_evolution_time must be >= 0".into(),
            ));
        }
        Ok(())
    }

    pub fn total_time(&self) -> f64 {
        self.pre_evolution_time + self.n_meas as f64 * self.tau
    }
}

/// Survival probabilities P(nτ) for one protocol run, plus run diagnostics.
#[derive(Debug, Clone)]
pub struct SurvivalSeries {
    pub tau: f64,
    /// t_n = pre_evolution_time + n·τ for n = 0..=N.
    pub times: Vec<f64>,
    /// `probs[n]` = trace right after the n-th measurement; `probs[0]` = 1.
    pub probs: Vec<f64>,
    pub params: ModelParams,
    /// Truncation the run finished with.
    pub n_max: usize,
    pub converged: bool,
    /// Largest |Tr ρ(before measurement) − Tr ρ(after previous measurement)|
    /// seen over any single Zeno interval.
    pub max_trace_drift: f64,
    /// Largest pre-symmetrization Hermiticity defect seen in any RK4 step.
    pub max_hermiticity_drift: f64,
}

/// Exact master-equation right-hand side
/// −i[H, ρ] − Γ(a†a ρ + ρ a†a − 2 a ρ a†).
pub fn lindblad_rhs(rho: &DensityMatrix, ops: &OperatorSet, gamma: f64) -> Result<DensityMatrix> {
    if rho.dim() != ops.hilbert.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state dim {} vs operator dim {}",
            rho.dim(),
            ops.hilbert.dim()
        )));
    }
    let mut prop = Propagator::new(ops, gamma);
    let mut out = Array2::<Complex64>::zeros((rho.dim(), rho.dim()));
    prop.rhs_into(rho.data(), &mut out);
    DensityMatrix::from_array(out, rho.n_max())
}

/// Propagate `rho` for `duration` under the master equation (fixed-step RK4,
/// re-symmetrized each step).
pub fn evolve(
    rho: &DensityMatrix,
    duration: f64,
    ops: &OperatorSet,
    cfg: &IntegratorConfig,
) -> Result<DensityMatrix> {
    if duration < 0.0 {
        return Err(Error::InvalidParameter("duration must be >= 0".into()));
    }
    let mut out = rho.clone();
    if duration == 0.0 {
        return Ok(out);
    }
    let mut prop = Propagator::new(ops, ops.params.gamma);
    let steps = cfg.steps_for(duration, &ops.params);
    let h = duration / steps as f64;
    for _ in 0..steps {
        prop.step(out.data_mut(), h);
    }
    if !out.is_finite() {
        return Err(Error::NonFinite { t: duration });
    }
    Ok(out)
}

/// P_S ρ P_S with P_S = |ψ_S⟩⟨ψ_S| ⊗ I. The result is |ψ_S⟩⟨ψ_S| ⊗ B with
/// B = ⟨ψ_S|ρ|ψ_S⟩ the conditional boson block; not renormalized, so the
/// output trace is the survival probability of this measurement.
pub fn selective_measure(rho: &DensityMatrix, psi: &QubitState) -> DensityMatrix {
    let nb = rho.n_max() + 1;
    let amps = [psi.alpha(), psi.beta()];
    let data = rho.data();
    let mut block = Array2::<Complex64>::zeros((nb, nb));
    for q in 0..2 {
        for qp in 0..2 {
            let weight = amps[q].conj() * amps[qp];
            if weight == ZERO {
                continue;
            }
            for i in 0..nb {
                for j in 0..nb {
                    block[[i, j]] += weight * data[[q * nb + i, qp * nb + j]];
                }
            }
        }
    }
    let mut out = Array2::<Complex64>::zeros((rho.dim(), rho.dim()));
    for q in 0..2 {
        for qp in 0..2 {
            let weight = amps[q] * amps[qp].conj();
            if weight == ZERO {
                continue;
            }
            for i in 0..nb {
                for j in 0..nb {
                    out[[q * nb + i, qp * nb + j]] = weight * block[[i, j]];
                }
            }
        }
    }
    DensityMatrix::from_array(out, rho.n_max()).expect("selective_measure preserves shape")
}

/// Survival probability Tr(P_S ρ P_S) without collapsing the state.
pub fn survival_probability(rho: &DensityMatrix, psi: &QubitState) -> f64 {
    let nb = rho.n_max() + 1;
    let amps = [psi.alpha(), psi.beta()];
    let data = rho.data();
    let mut p = ZERO;
    for q in 0..2 {
        for qp in 0..2 {
            let weight = amps[q].conj() * amps[qp];
            if weight == ZERO {
                continue;
            }
            for m in 0..nb {
                p += weight * data[[q * nb + m, qp * nb + m]];
            }
        }
    }
    p.re
}

/// Non-selective qubit measurement: (P_e⊗I) ρ (P_e⊗I) + (P_g⊗I) ρ (P_g⊗I).
/// Qubit coherence blocks are zeroed exactly; trace is preserved exactly.
pub fn nonselective_measure(rho: &DensityMatrix) -> DensityMatrix {
    let nb = rho.n_max() + 1;
    let mut out = rho.clone();
    {
        let data = out.data_mut();
        for i in 0..nb {
            for j in 0..nb {
                data[[i, nb + j]] = ZERO;
                data[[nb + i, j]] = ZERO;
            }
        }
    }
    out
}

/// Non-selective measurement in the full-factorization reading: the qubit is
/// dephased and the joint state is replaced by
/// (p_e|e⟩⟨e| + p_g|g⟩⟨g|) ⊗ ρ_A / Tr ρ, with ρ_A = Tr_S ρ.
pub fn nonselective_measure_factorized(rho: &DensityMatrix) -> DensityMatrix {
    let nb = rho.n_max() + 1;
    let data = rho.data();
    let trace: f64 = rho.trace();
    let mut reduced = Array2::<Complex64>::zeros((nb, nb));
    for q in 0..2 {
        for i in 0..nb {
            for j in 0..nb {
                reduced[[i, j]] += data[[q * nb + i, q * nb + j]];
            }
        }
    }
    let p_e: f64 = (0..nb).map(|m| data[[m, m]].re).sum();
    let p_g: f64 = trace - p_e;
    let mut out = Array2::<Complex64>::zeros((rho.dim(), rho.dim()));
    if trace.abs() > 0.0 {
        for (q, p_q) in [(0usize, p_e), (1usize, p_g)] {
            let w = Complex64::new(p_q / trace, 0.0);
            for i in 0..nb {
                for j in 0..nb {
                    out[[q * nb + i, q * nb + j]] = w * reduced[[i, j]];
                }
            }
        }
    }
    DensityMatrix::from_array(out, rho.n_max()).expect("factorized measure preserves shape")
}

/// Run a full Zeno protocol, recording the survival probability after each
/// measurement.
///
/// The state is never renormalized, so the recorded trace is the joint
/// survival probability in the trace-at-the-end sense. If the top two Fock
/// levels accumulate population above the truncation threshold at any
/// checkpoint, n_max grows by 50% and the run restarts, up to the configured
/// limit.
pub fn run_zeno(
    params: &ModelParams,
    psi: &QubitState,
    protocol: &ZenoProtocol,
    cfg: &RunConfig,
) -> Result<SurvivalSeries> {
    protocol.validate()?;
    cfg.integrator.validate()?;
    run_adaptive(params, psi, cfg, |ops, prop| {
        run_protocol_once(ops, prop, psi, protocol, cfg, None)
    })
}

/// Time-resolved observables sampled at every integrator step of a protocol
/// run (populations for rate-equation comparisons, survival for
/// continuous-monitoring figures).
#[derive(Debug, Clone)]
pub struct SampledRun {
    pub times: Vec<f64>,
    /// Reduced excited-qubit population Σ_m ⟨e,m|ρ|e,m⟩ at each sample time.
    pub excited: Vec<f64>,
    /// Would-be survival probability Tr(P_S ρ P_S) at each sample time.
    pub survival: Vec<f64>,
    pub n_max: usize,
    pub converged: bool,
}

/// Run a protocol while sampling ρ_ee(t) and the survival probability at
/// every integration step.
pub fn run_sampled(
    params: &ModelParams,
    psi: &QubitState,
    protocol: &ZenoProtocol,
    cfg: &RunConfig,
) -> Result<SampledRun> {
    protocol.validate()?;
    cfg.integrator.validate()?;
    let mut samples = SampledRun {
        times: Vec::new(),
        excited: Vec::new(),
        survival: Vec::new(),
        n_max: 0,
        converged: false,
    };
    let series = run_adaptive(params, psi, cfg, |ops, prop| {
        samples.times.clear();
        samples.excited.clear();
        samples.survival.clear();
        run_protocol_once(ops, prop, psi, protocol, cfg, Some(&mut samples))
    })?;
    samples.n_max = series.n_max;
    samples.converged = series.converged;
    Ok(samples)
}

/// Outcome of one fixed-truncation attempt.
enum Attempt {
    Done(SurvivalSeries),
    /// Truncation threshold exceeded at a checkpoint (population recorded).
    GrowTruncation(f64),
}

fn run_adaptive<F>(
    params: &ModelParams,
    psi: &QubitState,
    cfg: &RunConfig,
    mut attempt: F,
) -> Result<SurvivalSeries>
where
    F: FnMut(&OperatorSet, &mut Propagator) -> Result<Attempt>,
{
    let trunc = &cfg.truncation;
    let mut n_max = trunc.n_max.max(1);
    let _ = psi;
    loop {
        let hilbert = HilbertConfig::new(n_max)?;
        let ops = build_operators(params, hilbert)?;
        let mut prop = Propagator::new(&ops, params.gamma);
        match attempt(&ops, &mut prop)? {
            Attempt::Done(series) => return Ok(series),
            Attempt::GrowTruncation(pop) => {
                if n_max >= trunc.limit {
                    return Err(Error::TruncationNotConverged {
                        limit: trunc.limit,
                        max_population: pop,
                        threshold: trunc.threshold,
                    });
                }
                n_max = (3 * n_max).div_ceil(2).min(trunc.limit);
            }
        }
    }
}

fn run_protocol_once(
    ops: &OperatorSet,
    prop: &mut Propagator,
    psi: &QubitState,
    protocol: &ZenoProtocol,
    cfg: &RunConfig,
    mut samples: Option<&mut SampledRun>,
) -> Result<Attempt> {
    let params = &ops.params;
    let trunc = &cfg.truncation;
    let mut rho = initial_state(psi, ops.hilbert);
    let mut times = vec![protocol.pre_evolution_time];
    let mut probs = vec![1.0];
    let mut max_trace_drift = 0.0f64;

    if let Some(s) = samples.as_deref_mut() {
        s.times.push(0.0);
        s.excited.push(rho.excited_population());
        s.survival.push(survival_probability(&rho, psi));
    }

    // Evolve one segment, returning the truncation-trigger population seen at
    // its end checkpoint.
    let segment = |rho: &mut DensityMatrix,
                   t0: f64,
                   duration: f64,
                   prop: &mut Propagator,
                   samples: &mut Option<&mut SampledRun>|
     -> Result<f64> {
        if duration == 0.0 {
            return Ok(0.0);
        }
        let steps = cfg.integrator.steps_for(duration, params);
        let h = duration / steps as f64;
        for k in 0..steps {
            prop.step(rho.data_mut(), h);
            if let Some(s) = samples.as_deref_mut() {
                s.times.push(t0 + (k + 1) as f64 * h);
                s.excited.push(rho.excited_population());
                s.survival.push(survival_probability(rho, psi));
            }
        }
        if !rho.is_finite() {
            return Err(Error::NonFinite { t: t0 + duration });
        }
        Ok(rho.top_level_population())
    };

    let mut max_pop = segment(
        &mut rho,
        0.0,
        protocol.pre_evolution_time,
        prop,
        &mut samples,
    )?;
    if trunc.adaptive && max_pop > trunc.threshold {
        return Ok(Attempt::GrowTruncation(max_pop));
    }

    let mut trace_after_meas = rho.trace();
    for n in 1..=protocol.n_meas {
        let t0 = protocol.pre_evolution_time + (n - 1) as f64 * protocol.tau;
        let pop = segment(&mut rho, t0, protocol.tau, prop, &mut samples)?;
        max_pop = max_pop.max(pop);
        if trunc.adaptive && pop > trunc.threshold {
            return Ok(Attempt::GrowTruncation(pop));
        }
        max_trace_drift = max_trace_drift.max((rho.trace() - trace_after_meas).abs());

        let p = match &protocol.measurement {
            MeasurementKind::Selective(target) => {
                rho = selective_measure(&rho, target);
                rho.trace()
            }
            MeasurementKind::Nonselective => {
                rho = nonselective_measure(&rho);
                rho.trace()
            }
            MeasurementKind::NonselectiveFactorized => {
                rho = nonselective_measure_factorized(&rho);
                rho.trace()
            }
            MeasurementKind::None => survival_probability(&rho, psi),
        };
        if let Some(s) = samples.as_deref_mut() {
            // Record the post-measurement observables at the same instant.
            s.times.push(t0 + protocol.tau);
            s.excited.push(rho.excited_population());
            s.survival.push(survival_probability(&rho, psi));
        }
        trace_after_meas = rho.trace();
        times.push(protocol.pre_evolution_time + n as f64 * protocol.tau);
        probs.push(p);
    }

    Ok(Attempt::Done(SurvivalSeries {
        tau: protocol.tau,
        times,
        probs,
        params: *params,
        n_max: ops.hilbert.n_max(),
        converged: max_pop <= trunc.threshold,
        max_trace_drift,
        max_hermiticity_drift: prop.max_asymmetry(),
    }))
}

/// RK4 stepper with preallocated stage buffers and an O(dim²) dissipator.
pub(crate) struct Propagator<'a> {
    ops: &'a OperatorSet,
    gamma: f64,
    nb: usize,
    k1: Array2<Complex64>,
    k2: Array2<Complex64>,
    k3: Array2<Complex64>,
    k4: Array2<Complex64>,
    stage: Array2<Complex64>,
    scratch: Array2<Complex64>,
    max_asymmetry: f64,
}

impl<'a> Propagator<'a> {
    pub(crate) fn new(ops: &'a OperatorSet, gamma: f64) -> Self {
        let dim = ops.hilbert.dim();
        let z = || Array2::<Complex64>::zeros((dim, dim));
        Self {
            ops,
            gamma,
            nb: ops.hilbert.fock_dim(),
            k1: z(),
            k2: z(),
            k3: z(),
            k4: z(),
            stage: z(),
            scratch: z(),
            max_asymmetry: 0.0,
        }
    }

    pub(crate) fn max_asymmetry(&self) -> f64 {
        self.max_asymmetry
    }

    /// out = −i[H, ρ] − Γ((m_i + m_j) ρ_ij − 2 √((m_i+1)(m_j+1)) ρ_{i+1,j+1}),
    /// where m_i is the Fock level of basis index i. The dissipator uses the
    /// ladder structure of a directly instead of matrix products.
    pub(crate) fn rhs_into(&mut self, rho: &Array2<Complex64>, out: &mut Array2<Complex64>) {
        let h = &self.ops.h;
        general_mat_mul(ONE, h, rho, ZERO, &mut self.scratch);
        let minus_i = Complex64::new(0.0, -1.0);
        ndarray::Zip::from(&mut *out)
            .and(&self.scratch)
            .for_each(|o, &s| *o = minus_i * s);
        general_mat_mul(ONE, rho, h, ZERO, &mut self.scratch);
        let plus_i = Complex64::new(0.0, 1.0);
        ndarray::Zip::from(&mut *out)
            .and(&self.scratch)
            .for_each(|o, &s| *o += plus_i * s);

        if self.gamma != 0.0 {
            let nb = self.nb;
            let n_max = nb - 1;
            let dim = rho.nrows();
            for i in 0..dim {
                let (qi, mi) = (i / nb, i % nb);
                for j in 0..dim {
                    let mj = j % nb;
                    let mut d = -((mi + mj) as f64) * rho[[i, j]];
                    if mi < n_max && mj < n_max {
                        let amp = (((mi + 1) * (mj + 1)) as f64).sqrt();
                        d += 2.0 * amp * rho[[i + 1, j + 1]];
                    }
                    out[[i, j]] += self.gamma * d;
                    let _ = qi;
                }
            }
        }
    }

    /// One RK4 step of size `h`, followed by re-symmetrization ρ ← (ρ+ρ†)/2.
    pub(crate) fn step(&mut self, rho: &mut Array2<Complex64>, h: f64) {
        let half = 0.5 * h;
        let mut k1 = std::mem::take(&mut self.k1);
        let mut k2 = std::mem::take(&mut self.k2);
        let mut k3 = std::mem::take(&mut self.k3);
        let mut k4 = std::mem::take(&mut self.k4);
        let mut stage = std::mem::take(&mut self.stage);

        self.rhs_into(rho, &mut k1);
        ndarray::Zip::from(&mut stage)
            .and(&*rho)
            .and(&k1)
            .for_each(|s, &r, &k| *s = r + half * k);
        self.rhs_into(&stage, &mut k2);
        ndarray::Zip::from(&mut stage)
            .and(&*rho)
            .and(&k2)
            .for_each(|s, &r, &k| *s = r + half * k);
        self.rhs_into(&stage, &mut k3);
        ndarray::Zip::from(&mut stage)
            .and(&*rho)
            .and(&k3)
            .for_each(|s, &r, &k| *s = r + h * k);
        self.rhs_into(&stage, &mut k4);

        let w = h / 6.0;
        ndarray::Zip::from(&mut *rho)
            .and(&k1)
            .and(&k2)
            .and(&k3)
            .and(&k4)
            .for_each(|r, &a, &b, &c, &d| *r += w * (a + 2.0 * b + 2.0 * c + d));

        // Re-symmetrize; RK4 asymmetry is rounding-scale noise, tracked as a
        // diagnostic.
        let n = rho.nrows();
        let mut worst = 0.0f64;
        for i in 0..n {
            let di = rho[[i, i]];
            worst = worst.max(di.im.abs());
            rho[[i, i]] = Complex64::new(di.re, 0.0);
            for j in (i + 1)..n {
                let upper = rho[[i, j]];
                let lower = rho[[j, i]];
                worst = worst.max((upper - lower.conj()).norm());
                let m = 0.5 * (upper + lower.conj());
                rho[[i, j]] = m;
                rho[[j, i]] = m.conj();
            }
        }
        self.max_asymmetry = self.max_asymmetry.max(worst);

        self.k1 = k1;
        self.k2 = k2;
        self.k3 = k3;
        self.k4 = k4;
        self.stage = stage;
    }
}

/// Non-unitary Schrödinger propagation of a pure state under H_eff
/// (dv/dt = −i H_eff v) with the same fixed-step RK4 scheme.
pub fn evolve_vector_heff(
    v0: &[Complex64],
    duration: f64,
    ops: &OperatorSet,
    cfg: &IntegratorConfig,
) -> Result<Vec<Complex64>> {
    let dim = ops.hilbert.dim();
    if v0.len() != dim {
        return Err(Error::DimensionMismatch(format!(
            "vector length {} vs operator dim {}",
            v0.len(),
            dim
        )));
    }
    let h_eff = &ops.h_eff;
    let minus_i = Complex64::new(0.0, -1.0);
    let rhs = |v: &ndarray::Array1<Complex64>| -> ndarray::Array1<Complex64> {
        h_eff.dot(v).mapv(|z| minus_i * z)
    };
    let mut v = ndarray::Array1::from_vec(v0.to_vec());
    if duration == 0.0 {
        return Ok(v.to_vec());
    }
    let steps = cfg.steps_for(duration, &ops.params);
    let h = duration / steps as f64;
    for _ in 0..steps {
        let k1 = rhs(&v);
        let k2 = rhs(&(&v + &(&k1 * Complex64::from(0.5 * h))));
        let k3 = rhs(&(&v + &(&k2 * Complex64::from(0.5 * h))));
        let k4 = rhs(&(&v + &(&k3 * Complex64::from(h))));
        v = &v + &((k1 + k2 * 2.0 + k3 * 2.0 + k4) * Complex64::from(h / 6.0));
    }
    if !v.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::NonFinite { t: duration });
    }
    Ok(v.to_vec())
}
