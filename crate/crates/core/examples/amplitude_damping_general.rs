//! General-path deconvolution for the non-Pauli two-qubit correlated
//! amplitude damping channel: the reconstruction of <XX> mixes <XX> and <YY>,
//! and <ZZ> picks up the single-qubit Z terms and a constant.
//!
//! cargo run --example amplitude_damping_general

use pauli_deconv::channels::correlated_amplitude_damping;
use pauli_deconv::deconvolution::{plan_general, DEFAULT_COND_WARN};
use pauli_deconv::observable::Observable;
use pauli_deconv::pauli::Operator;
use pauli_deconv::simulator::{evolve, expectation_exact};
use pauli_deconv::Result;

fn main() -> Result<()> {
    let (eta, mu) = (0.6, 0.3);
    let ch = correlated_amplitude_damping(eta, mu)?;
    let ptm = ch.ptm()?;
    for label in ["XX", "YY", "ZZ"] {
        let obs = Observable::parse(&format!("{label} 1.0"))?;
        let plan = plan_general(&obs, ptm, DEFAULT_COND_WARN)?;
        let terms: Vec<String> = plan
            .weights()
            .iter()
            .map(|(j, w)| format!("{w:+.6}*<{}>", j.label()))
            .collect();
        println!("<{label}>_ideal = {}", terms.join(" "));
        println!("    condition number {:.3}", plan.condition_number().unwrap());
    }

    let rho = Operator::basis_projector(2, 3)?;
    let noisy = evolve(&rho, &ch, 1)?;
    let obs = Observable::parse("ZZ 1.0")?;
    let plan = plan_general(&obs, ptm, DEFAULT_COND_WARN)?;
    let measured = plan
        .required_measurements()
        .into_iter()
        .map(|j| Ok((j, expectation_exact(&noisy, j)?)))
        .collect::<Result<_>>()?;
    println!(
        "\n|11>: noisy <ZZ> = {:.6}, deconvolved = {:.6}",
        expectation_exact(&noisy, "ZZ".parse()?)?,
        plan.deconvolve(&measured)?
    );
    Ok(())
}
