//! Projecting onto a superposition state leaves the mode excited, so the
//! bath-reset product law P(nτ) ≈ [P(τ)]ⁿ degrades as coupling grows: the
//! carried-over excitation feeds back into later intervals.

use zeno_lab::analytic::RwAnalytic;
use zeno_lab::{
    run_zeno, MeasurementKind, ModelParams, QubitState, RunConfig, Variant, ZenoProtocol,
};

fn main() -> zeno_lab::Result<()> {
    let psi = QubitState::from_re(0.8, 0.6)?;
    let tau = 0.1;
    let n_meas = 250;

    for (label, g) in [("weak  g = 0.06", 0.06), ("strong g = 0.60", 0.6)] {
        let params = ModelParams::new(1.0, 1.0, g, 0.03, Variant::Jc)?;
        let protocol = ZenoProtocol::new(tau, n_meas, MeasurementKind::Selective(psi))?;
        let series = run_zeno(&params, &psi, &protocol, &RunConfig::default())?;
        let p1 = RwAnalytic::new(params).first_interval_general(&psi, tau);

        let mut worst = (0usize, 0.0f64);
        for (n, &p) in series.probs.iter().enumerate() {
            let dev = (p - p1.powi(n as i32)).abs();
            if dev > worst.1 {
                worst = (n, dev);
            }
        }
        println!("{label}: P(tau) = {p1:.6}");
        for n in [10usize, 50, 100, 200, 250] {
            println!(
                "  n = {n:>3}: exact {:.5}  product {:.5}  deviation {:+.2e}",
                series.probs[n],
                p1.powi(n as i32),
                series.probs[n] - p1.powi(n as i32)
            );
        }
        println!("  worst deviation {:.4} at n = {}\n", worst.1, worst.0);
    }
    Ok(())
}
