//! Qualitative sweep patterns: how strongly the Λ_N(τ) curves for different N
//! separate depends on the mode linewidth Γ (bath memory) and the coupling g.
//! Long memory + strong coupling separates the curves; short memory + weak
//! coupling collapses them onto the single-measurement (bath-reset) curve.

use zeno_lab::analysis::sweep_tau;
use zeno_lab::numeric::logspace;
use zeno_lab::{ModelParams, QubitState, RunConfig, Variant};

/// Relative spread between the N = 1 and N = 16 rows over the grid.
fn spread(g: f64, gamma: f64) -> f64 {
    let params = ModelParams::new(1.0, 1.0, g, gamma, Variant::Rabi).unwrap();
    let psi = QubitState::excited();
    let grid = logspace(0.3, 6.0, 24);
    let sweep = sweep_tau(&params, &psi, &[1, 16], &grid, &RunConfig::default()).unwrap();
    assert!(sweep.issues.is_empty(), "{:?}", sweep.issues);
    let scale = sweep.lambda[0].iter().map(|x| x.abs()).fold(0.0, f64::max);
    sweep.lambda[0]
        .iter()
        .zip(&sweep.lambda[1])
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
        / scale
}

#[test]
fn long_memory_strong_coupling_separates_n_curves() {
    // Narrow line, g = 0.5: the N = 1 and N = 16 curves differ visibly.
    let s = spread(0.5, 0.1);
    assert!(s > 0.15, "expected visible N-separation, got spread {s:.3}");
}

#[test]
fn short_memory_weak_coupling_overlaps_n_curves() {
    // Broad line, g = 0.2: the curves nearly coincide.
    let s = spread(0.2, 0.3);
    assert!(s < 0.05, "expected near-overlap, got spread {s:.3}");
}
