//! Characteristic-polynomial coefficients S_m of the probe states
//! (1 + P_k)/d. All are positive up to m = d/2 and vanish after.
//!
//! cargo run --example probe_positivity

use pauli_deconv::characterization::{is_positive_semidefinite, positivity_coefficients, probe_state};
use pauli_deconv::pauli::{Operator, PauliIndex};
use pauli_deconv::Result;

fn main() -> Result<()> {
    for n in 1..=3 {
        let k = PauliIndex::from_digits(&vec![1; n])?;
        let s = positivity_coefficients(probe_state(k)?.operator());
        let shown: Vec<String> = s.iter().map(|v| format!("{v:.4}")).collect();
        println!("n = {n}, k = {}: S = [{}]", k.label(), shown.join(", "));
    }

    let bad = Operator::from_real_rows(&[vec![1.5, 0.0], vec![0.0, -0.5]])?;
    let s = positivity_coefficients(&bad);
    println!("diag(1.5, -0.5): S = {s:?}, positive semidefinite: {}", is_positive_semidefinite(&s));
    Ok(())
}
