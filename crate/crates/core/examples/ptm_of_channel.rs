//! Pauli transfer matrices of the built-in channel families.
//!
//! cargo run --example ptm_of_channel

use pauli_deconv::channels::{
    amplitude_damping, bit_flip_channel, correlated_amplitude_damping, correlated_pauli_diagonal,
    PauliProbabilities,
};
use pauli_deconv::pauli::PauliIndex;
use pauli_deconv::Result;

fn print_matrix(labels: &[String], m: &nalgebra::DMatrix<f64>) {
    print!("{:>5}", "");
    for l in labels {
        print!("{l:>9}");
    }
    println!();
    for (j, l) in labels.iter().enumerate() {
        print!("{l:>5}");
        for q in 0..labels.len() {
            print!("{:>9.4}", m[(j, q)]);
        }
        println!();
    }
}

fn main() -> Result<()> {
    let one: Vec<String> = PauliIndex::all(1)?.map(|k| k.label()).collect();

    println!("bit flip, p = 0.1");
    print_matrix(&one, bit_flip_channel(1, 0.1, 0.0)?.ptm()?.matrix());

    // Amplitude damping is not unital: the first column picks up Γ_Z,I = 1 - η.
    println!("\namplitude damping, eta = 0.7");
    print_matrix(&one, amplitude_damping(0.7)?.ptm()?.matrix());

    // Correlated Pauli channels stay diagonal, so only λ is needed.
    let p = PauliProbabilities::depolarizing(0.00052)?;
    for mu in [0.0, 0.25, 1.0] {
        let ch = correlated_pauli_diagonal(3, &p, mu)?;
        let zzz = PauliIndex::from_label("ZZZ")?;
        println!("\n3-qubit depolarizing, mu = {mu}: lambda_ZZZ = {}", ch.lambda(zzz));
    }

    let two = correlated_amplitude_damping(0.5, 0.5)?;
    let ptm = two.ptm()?;
    println!(
        "\n2-qubit correlated amplitude damping (eta = 0.5, mu = 0.5): max off-diagonal {:.4}, unitality residual {:.4}",
        ptm.max_off_diagonal(),
        ptm.unitality_residual()
    );
    Ok(())
}
