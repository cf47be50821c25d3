//! Physical parameters, states, and operator construction on the truncated
//! qubit ⊗ Fock Hilbert space.
//!
//! Basis ordering is fixed throughout the crate:
//! `index = qubit_index * (n_max + 1) + fock_index`, with qubit index 0 for
//! |e⟩ and 1 for |g⟩. A density matrix is therefore a 2×2 grid of
//! (n_max+1)×(n_max+1) boson blocks, which makes the qubit projector
//! |ψ_S⟩⟨ψ_S| ⊗ I act blockwise.

use ndarray::{linalg::kron, Array2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Form of the qubit–mode coupling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// g σ_x (a + a†) — counter-rotating terms kept.
    Rabi,
    /// g (σ₊ a + σ₋ a†) — rotating-wave form (Jaynes-Cummings).
    Jc,
}

/// Physical constants of the qubit + damped-mode model (ħ = 1, all rates and
/// frequencies angular).
///
/// `gamma` is both the Lorentzian half-width of the original bath spectral
/// density and the decay rate of the single mode that represents it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Qubit frequency Δ.
    pub delta: f64,
    /// Mode (bath central) frequency ω₀.
    pub omega0: f64,
    /// Qubit–mode coupling strength g.
    pub g: f64,
    /// Mode decay rate Γ (Lorentzian half-width).
    pub gamma: f64,
    /// Coupling form.
    pub variant: Variant,
}

impl ModelParams {
    pub fn new(delta: f64, omega0: f64, g: f64, gamma: f64, variant: Variant) -> Result<Self> {
        let p = Self {
            delta,
            omega0,
            g,
            gamma,
            variant,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.delta.is_finite()
            && self.omega0.is_finite()
            && self.g.is_finite()
            && self.gamma.is_finite();
        if !finite {
            return Err(Error::InvalidParameter(
                "model parameters must be finite".into(),
            ));
        }
        if self.delta <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "delta must be > 0, got {}",
                self.delta
            )));
        }
        if self.omega0 <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "omega0 must be > 0, got {}",
                self.omega0
            )));
        }
        if self.g < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "g must be >= 0, got {}",
                self.g
            )));
        }
        if self.gamma < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "gamma must be >= 0, got {}",
                self.gamma
            )));
        }
        Ok(())
    }

    /// Largest angular frequency / rate in the model, used to bound the
    /// integrator step.
    pub fn frequency_scale(&self) -> f64 {
        self.delta.max(self.omega0).max(self.g).max(self.gamma)
    }
}

/// Normalized qubit state |ψ_S⟩ = α|e⟩ + β|g⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState {
    alpha: Complex64,
    beta: Complex64,
}

impl QubitState {
    /// Normalization tolerance: |α|² + |β|² must equal 1 within this.
    pub const NORM_TOL: f64 = 1e-12;

    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self> {
        let norm = alpha.norm_sqr() + beta.norm_sqr();
        if !norm.is_finite() || (norm - 1.0).abs() > Self::NORM_TOL {
            return Err(Error::InvalidParameter(format!(
                "qubit state not normalized: |alpha|^2 + |beta|^2 = {norm:.17}"
            )));
        }
        Ok(Self { alpha, beta })
    }

    /// Real-amplitude convenience constructor.
    pub fn from_re(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(Complex64::new(alpha, 0.0), Complex64::new(beta, 0.0))
    }

    pub fn excited() -> Self {
        Self {
            alpha: Complex64::new(1.0, 0.0),
            beta: Complex64::new(0.0, 0.0),
        }
    }

    pub fn ground() -> Self {
        Self {
            alpha: Complex64::new(0.0, 0.0),
            beta: Complex64::new(1.0, 0.0),
        }
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn beta(&self) -> Complex64 {
        self.beta
    }

    /// Pauli expectations (⟨σ_x⟩, ⟨σ_z⟩) in this state:
    /// ⟨σ_x⟩ = 2 Re(α β*), ⟨σ_z⟩ = |α|² − |β|².
    pub fn pauli_expectations(&self) -> (f64, f64) {
        let sx = 2.0 * (self.alpha * self.beta.conj()).re;
        let sz = self.alpha.norm_sqr() - self.beta.norm_sqr();
        (sx, sz)
    }
}

/// Fock-space truncation of the single mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HilbertConfig {
    n_max: usize,
}

impl HilbertConfig {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::InvalidParameter(format!(
                "n_max must be >= 1, got {n_max}"
            )));
        }
        Ok(Self { n_max })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Number of boson levels, n_max + 1.
    pub fn fock_dim(&self) -> usize {
        self.n_max + 1
    }

    /// Total Hilbert-space dimension, 2 (n_max + 1).
    pub fn dim(&self) -> usize {
        2 * self.fock_dim()
    }

    /// Flat index of |qubit, fock⟩ in the fixed basis ordering
    /// (qubit 0 = |e⟩, 1 = |g⟩).
    pub fn index(&self, qubit: usize, fock: usize) -> usize {
        debug_assert!(qubit < 2 && fock <= self.n_max);
        qubit * self.fock_dim() + fock
    }
}

/// All lifted operators and Hamiltonians for one (params, truncation) pair.
///
/// Immutable after construction; safe to share across workers.
#[derive(Debug, Clone)]
pub struct OperatorSet {
    pub params: ModelParams,
    pub hilbert: HilbertConfig,
    pub sigma_x: Array2<Complex64>,
    pub sigma_z: Array2<Complex64>,
    pub sigma_plus: Array2<Complex64>,
    pub sigma_minus: Array2<Complex64>,
    pub a: Array2<Complex64>,
    pub a_dag: Array2<Complex64>,
    /// Full Hamiltonian for the selected variant.
    pub h: Array2<Complex64>,
    /// Non-Hermitian effective Hamiltonian H − iΓ a†a.
    pub h_eff: Array2<Complex64>,
}

/// Build all lifted operators plus `h` and `h_eff` for the given truncation.
///
/// Rabi: H = (Δ/2)σ_z + ω₀ a†a + g σ_x (a + a†);
/// JC:   H = (Δ/2)σ_z + ω₀ a†a + g (σ₊ a + σ₋ a†).
pub fn build_operators(params: &ModelParams, hilbert: HilbertConfig) -> Result<OperatorSet> {
    params.validate()?;
    let nb = hilbert.fock_dim();

    let mut a_f = Array2::<Complex64>::zeros((nb, nb));
    for n in 1..nb {
        a_f[[n - 1, n]] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    let eye_f = Array2::<Complex64>::eye(nb);

    // Qubit basis order (|e⟩, |g⟩).
    let mut sx_q = Array2::<Complex64>::zeros((2, 2));
    sx_q[[0, 1]] = Complex64::new(1.0, 0.0);
    sx_q[[1, 0]] = Complex64::new(1.0, 0.0);
    let mut sz_q = Array2::<Complex64>::zeros((2, 2));
    sz_q[[0, 0]] = Complex64::new(1.0, 0.0);
    sz_q[[1, 1]] = Complex64::new(-1.0, 0.0);
    let mut sp_q = Array2::<Complex64>::zeros((2, 2));
    sp_q[[0, 1]] = Complex64::new(1.0, 0.0); // |e⟩⟨g|
    let sm_q = sp_q.t().to_owned();
    let eye_q = Array2::<Complex64>::eye(2);

    let sigma_x = kron(&sx_q, &eye_f);
    let sigma_z = kron(&sz_q, &eye_f);
    let sigma_plus = kron(&sp_q, &eye_f);
    let sigma_minus = kron(&sm_q, &eye_f);
    let a = kron(&eye_q, &a_f);
    let a_dag = a.t().mapv(|z| z.conj());

    let number = a_dag.dot(&a);
    let coupling = match params.variant {
        Variant::Rabi => {
            let x = &a + &a_dag;
            sigma_x.dot(&x).mapv(|z| z * params.g)
        }
        Variant::Jc => {
            let up = sigma_plus.dot(&a);
            let down = sigma_minus.dot(&a_dag);
            (up + down).mapv(|z| z * params.g)
        }
    };
    let h =
        sigma_z.mapv(|z| z * (0.5 * params.delta)) + number.mapv(|z| z * params.omega0) + coupling;
    let h_eff = &h + &number.mapv(|z| z * Complex64::new(0.0, -params.gamma));

    Ok(OperatorSet {
        params: *params,
        hilbert,
        sigma_x,
        sigma_z,
        sigma_plus,
        sigma_minus,
        a,
        a_dag,
        h,
        h_eff,
    })
}

/// Dense density matrix on the qubit ⊗ Fock space.
///
/// May carry a sub-unit trace: selective measurements leave the state
/// unnormalized so that the running trace is the joint survival probability.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    data: Array2<Complex64>,
    n_max: usize,
}

impl DensityMatrix {
    pub fn from_array(data: Array2<Complex64>, n_max: usize) -> Result<Self> {
        let dim = 2 * (n_max + 1);
        if data.nrows() != dim || data.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "density matrix is {}x{}, expected {}x{} for n_max = {}",
                data.nrows(),
                data.ncols(),
                dim,
                dim,
                n_max
            )));
        }
        Ok(Self { data, n_max })
    }

    pub fn data(&self) -> &Array2<Complex64> {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut Array2<Complex64> {
        &mut self.data
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn hilbert(&self) -> HilbertConfig {
        HilbertConfig { n_max: self.n_max }
    }

    /// Real part of the trace (the imaginary part of a physical state's trace
    /// is rounding noise).
    pub fn trace(&self) -> f64 {
        self.data.diag().iter().map(|z| z.re).sum()
    }

    /// Purity Tr(ρ²).
    pub fn purity(&self) -> f64 {
        self.data
            .iter()
            .zip(self.data.t().iter())
            .map(|(x, y)| (x * y).re)
            .sum()
    }

    /// Largest elementwise deviation from Hermiticity, max |ρ_ij − ρ_ji*|.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let d = (self.data[[i, j]] - self.data[[j, i]].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Replace ρ by (ρ + ρ†)/2.
    pub fn hermitize(&mut self) {
        let n = self.dim();
        for i in 0..n {
            self.data[[i, i]] = Complex64::new(self.data[[i, i]].re, 0.0);
            for j in (i + 1)..n {
                let m = 0.5 * (self.data[[i, j]] + self.data[[j, i]].conj());
                self.data[[i, j]] = m;
                self.data[[j, i]] = m.conj();
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Reduced excited-qubit population Σ_m ⟨e,m|ρ|e,m⟩.
    pub fn excited_population(&self) -> f64 {
        let nb = self.n_max + 1;
        (0..nb).map(|m| self.data[[m, m]].re).sum()
    }

    /// Combined population of the top two Fock levels across both qubit
    /// blocks — the adaptive-truncation trigger quantity.
    pub fn top_level_population(&self) -> f64 {
        let nb = self.n_max + 1;
        let mut pop = 0.0;
        for q in 0..2 {
            for m in [self.n_max.saturating_sub(1), self.n_max] {
                pop += self.data[[q * nb + m, q * nb + m]].re;
            }
        }
        pop
    }

    /// Smallest eigenvalue (positivity diagnostic; O(dim³) Jacobi, use in
    /// tests and reports, not per step).
    pub fn min_eigenvalue(&self) -> f64 {
        crate::numeric::hermitian_eigenvalues(&self.data)[0]
    }
}

/// ρ(0) = |ψ_S⟩⟨ψ_S| ⊗ |0⟩⟨0| in the fixed basis ordering.
pub fn initial_state(psi: &QubitState, hilbert: HilbertConfig) -> DensityMatrix {
    let nb = hilbert.fock_dim();
    let dim = hilbert.dim();
    let amps = [psi.alpha(), psi.beta()];
    let mut data = Array2::<Complex64>::zeros((dim, dim));
    for q in 0..2 {
        for qp in 0..2 {
            data[[q * nb, qp * nb]] = amps[q] * amps[qp].conj();
        }
    }
    DensityMatrix {
        data,
        n_max: hilbert.n_max,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn params(variant: Variant) -> ModelParams {
        ModelParams::new(1.0, 1.0, 0.5, 0.1, variant).unwrap()
    }

    #[test]
    fn annihilation_matrix_elements_n_max_1() {
        let ops = build_operators(&params(Variant::Rabi), HilbertConfig::new(1).unwrap()).unwrap();
        // <0|a|1> = 1 in each qubit block, all other entries zero.
        let nb = 2;
        for i in 0..4 {
            for j in 0..4 {
                let expect = if (i, j) == (0, 1) || (i, j) == (nb, nb + 1) {
                    1.0
                } else {
                    0.0
                };
                assert_abs_diff_eq!(ops.a[[i, j]].re, expect, epsilon = 0.0);
                assert_abs_diff_eq!(ops.a[[i, j]].im, 0.0, epsilon = 0.0);
            }
        }
    }

    #[test]
    fn hamiltonian_is_hermitian_for_both_variants() {
        for variant in [Variant::Rabi, Variant::Jc] {
            let ops = build_operators(&params(variant), HilbertConfig::new(7).unwrap()).unwrap();
            let herm_err: f64 = ops
                .h
                .indexed_iter()
                .map(|((i, j), z)| (z - ops.h[[j, i]].conj()).norm())
                .fold(0.0, f64::max);
            assert!(
                herm_err <= 1e-12,
                "hermiticity error {herm_err} for {variant:?}"
            );
        }
    }

    proptest::proptest! {
        #[test]
        fn hamiltonian_hermitian_over_parameter_space(
            delta in 0.01f64..10.0,
            omega0 in 0.01f64..10.0,
            g in 0.0f64..5.0,
            gamma in 0.0f64..5.0,
            n_max in 1usize..12,
            rabi in proptest::bool::ANY,
        ) {
            let variant = if rabi { Variant::Rabi } else { Variant::Jc };
            let p = ModelParams::new(delta, omega0, g, gamma, variant).unwrap();
            let ops = build_operators(&p, HilbertConfig::new(n_max).unwrap()).unwrap();
            let herm_err: f64 = ops
                .h
                .indexed_iter()
                .map(|((i, j), z)| (z - ops.h[[j, i]].conj()).norm())
                .fold(0.0, f64::max);
            proptest::prop_assert!(herm_err <= 1e-12);
        }
    }

    #[test]
    fn decoupled_hamiltonian_is_diagonal() {
        let p = ModelParams::new(1.0, 0.7, 0.0, 0.1, Variant::Rabi).unwrap();
        let hilbert = HilbertConfig::new(3).unwrap();
        let ops = build_operators(&p, hilbert).unwrap();
        let nb = hilbert.fock_dim();
        for i in 0..hilbert.dim() {
            for j in 0..hilbert.dim() {
                let (q, m) = (i / nb, i % nb);
                let expect = if i == j {
                    (if q == 0 { 0.5 } else { -0.5 }) * p.delta + p.omega0 * m as f64
                } else {
                    0.0
                };
                assert_abs_diff_eq!(ops.h[[i, j]].re, expect, epsilon = 1e-15);
                assert_abs_diff_eq!(ops.h[[i, j]].im, 0.0, epsilon = 0.0);
            }
        }
    }

    #[test]
    fn h_eff_differs_from_h_by_mode_decay_exactly() {
        let ops = build_operators(&params(Variant::Rabi), HilbertConfig::new(5).unwrap()).unwrap();
        let number = ops.a_dag.dot(&ops.a);
        let diff = &ops.h_eff - &ops.h;
        for ((i, j), z) in diff.indexed_iter() {
            let expect = Complex64::new(0.0, -ops.params.gamma) * number[[i, j]];
            assert_abs_diff_eq!((z - expect).norm(), 0.0, epsilon = 0.0);
        }
    }

    #[test]
    fn truncated_commutator_pattern() {
        // [a, a†] = I on the lower Fock levels; the top level of each qubit
        // block carries −n_max instead (truncation artifact).
        let hilbert = HilbertConfig::new(6).unwrap();
        let ops = build_operators(&params(Variant::Jc), hilbert).unwrap();
        let comm = ops.a.dot(&ops.a_dag) - ops.a_dag.dot(&ops.a);
        let nb = hilbert.fock_dim();
        for ((i, j), z) in comm.indexed_iter() {
            let m = i % nb;
            let expect = if i != j {
                0.0
            } else if m == hilbert.n_max() {
                -(hilbert.n_max() as f64)
            } else {
                1.0
            };
            assert_abs_diff_eq!(z.re, expect, epsilon = 1e-12);
            assert_abs_diff_eq!(z.im, 0.0, epsilon = 0.0);
        }
    }

    #[test]
    fn rejects_invalid_inputs() {
        assert!(HilbertConfig::new(0).is_err());
        assert!(ModelParams::new(-1.0, 1.0, 0.1, 0.1, Variant::Rabi).is_err());
        assert!(ModelParams::new(1.0, 0.0, 0.1, 0.1, Variant::Rabi).is_err());
        assert!(ModelParams::new(1.0, 1.0, -0.1, 0.1, Variant::Rabi).is_err());
        assert!(ModelParams::new(1.0, 1.0, 0.1, -0.1, Variant::Rabi).is_err());
        assert!(QubitState::from_re(0.6, 0.9).is_err());
    }

    #[test]
    fn initial_state_excited_is_single_entry() {
        let hilbert = HilbertConfig::new(4).unwrap();
        let rho = initial_state(&QubitState::excited(), hilbert);
        for ((i, j), z) in rho.data().indexed_iter() {
            let expect = if (i, j) == (0, 0) { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(z.re, expect, epsilon = 0.0);
            assert_abs_diff_eq!(z.im, 0.0, epsilon = 0.0);
        }
        assert_abs_diff_eq!(rho.trace(), 1.0, epsilon = 0.0);
    }

    #[test]
    fn initial_state_is_pure_with_unit_trace() {
        let psi = QubitState::new(
            Complex64::from_polar(0.6, 0.3),
            Complex64::from_polar(0.8, -1.2),
        )
        .unwrap();
        let rho = initial_state(&psi, HilbertConfig::new(5).unwrap());
        assert_abs_diff_eq!(rho.trace(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rho.purity(), 1.0, epsilon = 1e-12);
        assert!(rho.hermiticity_error() <= 1e-15);
    }

    #[test]
    fn qubit_reduced_expectations_for_three_four_state() {
        let psi = QubitState::from_re(0.6, 0.8).unwrap();
        let (sx, sz) = psi.pauli_expectations();
        assert_abs_diff_eq!(sx, 24.0 / 25.0, epsilon = 1e-15);
        assert_abs_diff_eq!(sz, -7.0 / 25.0, epsilon = 1e-15);

        // The same expectations from the qubit-reduced initial state.
        let hilbert = HilbertConfig::new(3).unwrap();
        let rho = initial_state(&psi, hilbert);
        let ops = build_operators(&params(Variant::Rabi), hilbert).unwrap();
        let expval = |op: &Array2<Complex64>| -> f64 {
            op.dot(rho.data()).diag().iter().map(|z| z.re).sum()
        };
        assert_abs_diff_eq!(expval(&ops.sigma_x), 24.0 / 25.0, epsilon = 1e-14);
        assert_abs_diff_eq!(expval(&ops.sigma_z), -7.0 / 25.0, epsilon = 1e-14);
    }

    #[test]
    fn phase_rotated_state_expectations() {
        use std::f64::consts::PI;
        let psi = QubitState::new(
            Complex64::new(0.6, 0.0),
            Complex64::from_polar(0.8, PI / 8.0),
        )
        .unwrap();
        let (sx, sz) = psi.pauli_expectations();
        assert_abs_diff_eq!(sx, (24.0 / 25.0) * (PI / 8.0).cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(sz, -7.0 / 25.0, epsilon = 1e-15);
    }

    #[test]
    fn excited_and_ground_expectations() {
        assert_eq!(QubitState::excited().pauli_expectations(), (0.0, 1.0));
        assert_eq!(QubitState::ground().pauli_expectations(), (0.0, -1.0));
    }
}
