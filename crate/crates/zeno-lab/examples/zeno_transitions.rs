//! Sweep the total average decay rate Λ_N(τ) = −ln P(Nτ)/(Nτ) over the
//! measurement interval and locate where its slope changes sign: increasing
//! Λ_N means more frequent measurements slow the decay (suppression),
//! decreasing means they accelerate it (enhancement). With long bath memory
//! the crossing points depend on how many measurements N are taken.

use zeno_lab::analysis::{sweep_tau, transition_times};
use zeno_lab::numeric::logspace;
use zeno_lab::{ModelParams, QubitState, RunConfig, Variant};

fn main() -> zeno_lab::Result<()> {
    let params = ModelParams::new(1.0, 1.0, 0.5, 0.1, Variant::Rabi)?;
    let psi = QubitState::excited();
    let n_list = [1usize, 4, 16];
    let grid = logspace(0.05, 6.0, 48);

    eprintln!("sweeping {} tau points x N = {n_list:?} ...", grid.len());
    let sweep = sweep_tau(&params, &psi, &n_list, &grid, &RunConfig::default())?;
    for issue in &sweep.issues {
        eprintln!("warning: tau = {}: {}", issue.tau, issue.message);
    }

    for analysis in transition_times(&sweep) {
        println!("N = {:>2}:", analysis.n_meas);
        if analysis.points.is_empty() {
            println!(
                "  no slope sign change on the grid (flat: {})",
                analysis.flat
            );
            continue;
        }
        for point in &analysis.points {
            println!(
                "  transition at tau = {:.3} ({:?})",
                point.tau_c, point.direction
            );
        }
        for (lo, hi, class) in &analysis.segments {
            println!("  [{lo:.3}, {hi:.3}] -> {class:?}");
        }
    }
    println!(
        "\n(g = {}, gamma = {}, initial state |e>)",
        params.g, params.gamma
    );
    Ok(())
}
