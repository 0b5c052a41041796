//! Characterize an unknown unital channel from probe states (1 + P_k)/d,
//! then deconvolve with the estimated PTM.
//!
//! cargo run --example characterize_channel

use std::collections::BTreeMap;

use pauli_deconv::channels::depolarizing_channel;
use pauli_deconv::characterization::{estimate_diagonal, estimate_full_ptm};
use pauli_deconv::deconvolution::{plan_pauli, DEFAULT_INV_TOL};
use pauli_deconv::observable::Observable;
use pauli_deconv::pauli::PauliIndex;
use pauli_deconv::sampling::Estimate;
use pauli_deconv::Result;

fn main() -> Result<()> {
    // Treated as a black box from here on.
    let unknown = depolarizing_channel(2, 0.2, 0.5)?;

    let full = estimate_full_ptm(&unknown, 65536, 1)?;
    let exact = unknown.ptm()?;
    let worst = full
        .entries()
        .iter()
        .map(|((j, k), e)| (e.value - exact.entry(*j, *k)).abs())
        .fold(0.0, f64::max);
    println!("full characterization: {} probes, max deviation {worst:.4}", full.probe_count());

    // Only the entries the observable needs.
    let obs = Observable::parse("ZZ 1.0\nXX 1.0\n")?;
    let needed: Vec<PauliIndex> = obs.terms().keys().copied().collect();
    let diag = estimate_diagonal(&unknown, &needed, 65536, 2)?;
    print!("{}", diag.to_report());

    let plan = plan_pauli(&obs, &diag, DEFAULT_INV_TOL)?;
    let noisy = BTreeMap::from([
        (PauliIndex::from_label("ZZ")?, Estimate { value: 0.52, std_error: 0.003 }),
        (PauliIndex::from_label("XX")?, Estimate { value: 0.51, std_error: 0.003 }),
    ]);
    let est = plan.deconvolve_estimates(&noisy)?;
    println!("<ZZ + XX> = {:.4} ± {:.4}", est.value, est.std_error);
    Ok(())
}
