//! Posterior sampling for the trine measurement, which is not
//! informationally complete: only the equatorial coordinates (x, y) of the
//! Bloch vector are identified. With counts (8, 5, 11) the HMC posterior
//! means of x and y are compared against direct quadrature over the unit
//! disk.

use qhmc::engine::{run_chain, HmcConfig};
use qhmc::targets::{trine_posterior_target, trine_probs, CountData};

/// Posterior mean of (x, y) by midpoint quadrature of the (flat-prior)
/// trine posterior over the unit disk.
fn disk_quadrature(counts: &[f64; 3], grid: usize) -> (f64, f64) {
    let (mut wx, mut wy, mut wtot) = (0.0, 0.0, 0.0);
    for i in 0..grid {
        let x = -1.0 + (2.0 * i as f64 + 1.0) / grid as f64;
        for j in 0..grid {
            let y = -1.0 + (2.0 * j as f64 + 1.0) / grid as f64;
            if x * x + y * y >= 1.0 {
                continue;
            }
            let p = trine_probs(x, y);
            let mut w = 1.0;
            for (k, &n) in counts.iter().enumerate() {
                w *= p[k].powf(n);
            }
            wx += w * x;
            wy += w * y;
            wtot += w;
        }
    }
    (wx / wtot, wy / wtot)
}

fn main() {
    let counts = [8.0, 5.0, 11.0];
    let target = trine_posterior_target(&CountData::new(counts.to_vec()).unwrap()).unwrap();
    let cfg = HmcConfig::default_for(target.dim());
    let set = run_chain(&target, &cfg).expect("chain runs");
    println!(
        "counts {counts:?}: {} kept points, acceptance {:.3}",
        set.len(),
        set.metadata.acceptance_rate
    );

    // Coordinates are (t2, t3) on the equatorial plane:
    // x = cos t2 cos t3, y = cos t2 sin t3.
    let (mut mx, mut my) = (0.0, 0.0);
    for t in &set.points {
        mx += t[0].cos() * t[1].cos();
        my += t[0].cos() * t[1].sin();
    }
    let n = set.len() as f64;
    let (mx, my) = (mx / n, my / n);

    let (qx, qy) = disk_quadrature(&counts, 800);
    println!("posterior mean (x, y):  HMC ({mx:+.4}, {my:+.4})");
    println!("                 quadrature ({qx:+.4}, {qy:+.4})");
    println!(
        "difference: ({:+.1e}, {:+.1e})",
        mx - qx,
        my - qy
    );
}
