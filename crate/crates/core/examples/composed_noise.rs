//! A Pauli channel composed with a non-Pauli one. Only the non-Pauli PTM is
//! inverted numerically; the Pauli part is a rescaling.
//!
//! cargo run --example composed_noise

use pauli_deconv::channels::{correlated_amplitude_damping, correlated_pauli_diagonal, PauliProbabilities};
use pauli_deconv::deconvolution::{plan_composed, plan_general, CompositionOrder, DEFAULT_COND_WARN, DEFAULT_INV_TOL};
use pauli_deconv::observable::Observable;
use pauli_deconv::Result;

fn main() -> Result<()> {
    let pauli = correlated_pauli_diagonal(2, &PauliProbabilities::dephasing(0.1)?, 0.5)?;
    let damping = correlated_amplitude_damping(0.8, 0.2)?;
    let obs = Observable::parse("XX 1.0\nZZ 0.5\n")?;

    // Damping first, then dephasing.
    let composed = plan_composed(
        &obs,
        &pauli,
        damping.ptm()?,
        CompositionOrder::PauliAfter,
        DEFAULT_INV_TOL,
        DEFAULT_COND_WARN,
    )?;
    let full = pauli.to_ptm()?.compose(damping.ptm()?)?;
    let direct = plan_general(&obs, &full, DEFAULT_COND_WARN)?;
    let gap = composed
        .weights()
        .iter()
        .map(|(j, w)| (w - direct.weight(*j)).abs())
        .fold(0.0, f64::max);
    for (j, w) in composed.weights() {
        println!("w_{} = {w:+.6}", j.label());
    }
    println!("max gap to inverting the full product: {gap:.2e}");
    Ok(())
}
