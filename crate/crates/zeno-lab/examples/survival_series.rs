//! Run a basic measurement protocol: project a superposition state every
//! τ = 0.5/Δ and print the survival probabilities with their per-interval
//! decay rates.

use zeno_lab::analysis::rates_from_series;
use zeno_lab::{
    run_zeno, MeasurementKind, ModelParams, QubitState, RunConfig, Variant, ZenoProtocol,
};

fn main() -> zeno_lab::Result<()> {
    let params = ModelParams::new(1.0, 1.0, 0.5, 0.1, Variant::Rabi)?;
    let psi = QubitState::from_re(0.6, 0.8)?;
    let protocol = ZenoProtocol::new(0.5, 12, MeasurementKind::Selective(psi))?;

    let series = run_zeno(&params, &psi, &protocol, &RunConfig::default())?;
    let rates = rates_from_series(&series);

    println!(
        "qubit delta = {}, mode omega0 = {}, g = {}, linewidth gamma = {}",
        params.delta, params.omega0, params.g, params.gamma
    );
    println!(
        "initial state (3/5)|e> + (4/5)|g>, tau = {}, N = {}",
        series.tau, protocol.n_meas
    );
    println!(
        "Fock truncation n_max = {} (converged: {})\n",
        series.n_max, series.converged
    );

    println!(
        "{:>3} {:>8} {:>12} {:>12} {:>12}",
        "n", "t", "P(n tau)", "lambda_n", "w_n"
    );
    for (n, (&t, &p)) in series.times.iter().zip(&series.probs).enumerate() {
        match rates.lambdas.get(n) {
            Some(&l) => println!(
                "{n:>3} {t:>8.3} {p:>12.8} {l:>12.6} {:>12.6}",
                rates.scaled[n]
            ),
            None => println!("{n:>3} {t:>8.3} {p:>12.8}"),
        }
    }
    Ok(())
}
