//! The scaled per-interval decay rate w_n = λ_n/τ is time-dependent when the
//! projection target is a superposition: the mode keeps memory across
//! intervals, so w_n oscillates at the mode frequency and damps at rate Γ.
//! For small τ the series lands on the continuous-limit curve w(t).

use zeno_lab::analysis::rates_from_series;
use zeno_lab::analytic::ContinuousLimitRate;
use zeno_lab::{
    run_zeno, MeasurementKind, ModelParams, QubitState, RunConfig, Variant, ZenoProtocol,
};

fn main() -> zeno_lab::Result<()> {
    let params = ModelParams::new(1.0, 1.0, 0.1, 0.1, Variant::Rabi)?;
    let psi = QubitState::from_re(0.6, 0.8)?;
    let tau = 0.1;
    let t_max = 20.0;

    let protocol = ZenoProtocol::new(
        tau,
        (t_max / tau).round() as usize,
        MeasurementKind::Selective(psi),
    )?;
    let series = run_zeno(&params, &psi, &protocol, &RunConfig::default())?;
    let rates = rates_from_series(&series);
    let analytic = ContinuousLimitRate::new(params, psi);

    println!("{:>8} {:>12} {:>12} {:>10}", "t", "w_n", "w(t)", "rel dev");
    let mut worst = 0.0f64;
    for (n, &w_n) in rates.scaled.iter().enumerate() {
        let t = n as f64 * tau;
        // The discrete rate is the average of w over the interval.
        let w_mean = analytic.w_interval_mean(t, t + tau)?;
        let rel = (w_n - w_mean).abs() / w_mean;
        worst = worst.max(rel);
        if n % 20 == 0 {
            println!("{t:>8.2} {w_n:>12.6} {w_mean:>12.6} {rel:>9.2e}");
        }
    }
    println!("\nmax relative deviation over t <= {t_max}: {worst:.2e}");
    println!("(tau = {tau}, g = {}, gamma = {})", params.g, params.gamma);
    Ok(())
}
