//! Samples qubit states uniformly over the Bloch ball with HMC and checks
//! the sample against the known moments of the uniform distribution:
//! E[x] = E[y] = E[z] = 0 and E[x^2 + y^2 + z^2] = 3/5.

use qhmc::engine::{run_chain, HmcConfig};
use qhmc::param::{bloch_from_angles, AngleVector};
use qhmc::targets::{primitive_qubit_target, PomId};

fn main() {
    let target = primitive_qubit_target(PomId::Tetrahedron);
    let cfg = HmcConfig::default_for(target.dim());
    println!(
        "sampling {} points from '{}' (tau={}, steps={}, seed={})",
        cfg.chain_length - cfg.burn_in,
        target.label(),
        cfg.trajectory.tau,
        cfg.trajectory.steps,
        cfg.seed
    );

    let set = run_chain(&target, &cfg).expect("chain runs");
    println!("acceptance rate: {:.3}", set.metadata.acceptance_rate);

    let mut mean = [0.0; 3];
    let mut r2 = 0.0;
    for point in &set.points {
        let theta = AngleVector::new(2, point.clone()).expect("qubit angles");
        let b = bloch_from_angles(&theta).expect("interior point");
        mean[0] += b.x;
        mean[1] += b.y;
        mean[2] += b.z;
        r2 += b.norm_squared();
    }
    let n = set.len() as f64;
    for m in &mut mean {
        *m /= n;
    }
    r2 /= n;

    println!(
        "E[x] = {:+.4}   E[y] = {:+.4}   E[z] = {:+.4}   (exact: 0)",
        mean[0], mean[1], mean[2]
    );
    println!("E[x^2+y^2+z^2] = {r2:.4}   (exact: 0.6)");
}
