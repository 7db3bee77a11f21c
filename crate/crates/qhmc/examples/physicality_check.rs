//! Physicality check for candidate BB84 probabilities: a table of 16
//! values that satisfies the linear crosshair constraints is physical
//! exactly if some value of the unobservable coherence q makes the
//! reconstructed density matrix positive. Prints the permissible q
//! interval when one exists.

use qhmc::bb84::{
    bb84_probs_from_physical, named_state, physicality_check_flat, q_bounds, Bb84Probabilities,
    NamedState,
};

fn report(label: &str, flat: [f64; 16]) {
    match physicality_check_flat(&flat) {
        Err(e) => println!("{label}: constraint violation ({e})"),
        Ok(false) => println!("{label}: NOT physical (no q gives a positive state)"),
        Ok(true) => {
            let p = Bb84Probabilities::new(flat).unwrap();
            let b = q_bounds(&p).unwrap();
            println!(
                "{label}: physical, q in [{:+.4}, {:+.4}] (width {:.2e})",
                b.q_min,
                b.q_max,
                b.width()
            );
        }
    }
}

fn main() {
    report("uniform table   ", Bb84Probabilities::uniform().flat());

    let singlet = bb84_probs_from_physical(&named_state(NamedState::Singlet, 0.0)).unwrap();
    report("exact singlet   ", singlet.flat());

    let noisy = bb84_probs_from_physical(&named_state(NamedState::Singlet, 0.3)).unwrap();
    report("noisy singlet   ", noisy.flat());

    // Satisfies every linear constraint but corresponds to no quantum
    // state: all four in-plane correlations equal 1, so the correlation
    // matrix has a singular value of 2, which no density matrix allows.
    let s = [1.0f64, -1.0, -1.0, 1.0];
    let mut too_strong = [0.0f64; 16];
    for j in 0..4usize {
        for k in 0..4usize {
            too_strong[4 * j + k] = (1.0 + s[j] * s[k]) / 16.0;
        }
    }
    report("overcorrelated  ", too_strong);
}
