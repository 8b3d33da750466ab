//! Gillespie simulation of N independent three-level atoms.

use laserlab::stochastic::{gillespie_populations, JumpConfig};
use laserlab::{analytic, LaserParams};

fn main() -> laserlab::Result<()> {
    // γ_c = 1, r_a = 0.25: η = 4
    let p = LaserParams::new(2.0, 16.0, 0.25, 1000)?;
    let cfg = JumpConfig::new(1000, 2000.0, 50.0, 1);
    let res = gillespie_populations(&p, &cfg)?;
    let closed = analytic::steady_populations(&p).fractions();
    println!("{} events after burn-in", res.events);
    for ((name, est), want) in ["a", "b", "c"].iter().zip(res.fractions(1000)).zip(closed) {
        println!(
            "level {name}: {:.5} ± {:.5}  (closed form {want:.5}, z = {:+.2})",
            est.mean,
            est.std_error,
            est.z_score(want)
        );
    }
    Ok(())
}
