//! Relaxation of the moment equations from the all-bottom state.

use laserlab::dynamics::{self, MomentState, TimeGrid};
use laserlab::{analytic, LaserParams};

fn main() -> laserlab::Result<()> {
    // γ_c = 1, r_a = 0.25, κ = 1
    let p = LaserParams::new(0.5, 1.0, 0.25, 100)?;
    let grid = TimeGrid::with_max_records(40.0, TimeGrid::default_dt(&p), 9)?;
    let traj = dynamics::evolve_moments(&p, &MomentState::ground(&p), &grid)?;
    println!(
        "{:>6} {:>10} {:>10} {:>10} {:>12}",
        "t", "na", "nb", "nc", "<m†m>"
    );
    for (t, s) in traj.times.iter().zip(&traj.states) {
        println!(
            "{t:>6.1} {:>10.5} {:>10.5} {:>10.5} {:>12.3}",
            s.na, s.nb, s.nc, s.mdm
        );
    }

    let settled = dynamics::evolve_to_steady_state(&p, &MomentState::ground(&p), grid.dt, 2000.0)?;
    let direct = dynamics::steady_state_solve(&p)?;
    let closed = analytic::steady_populations(&p);
    println!(
        "\nsteady by integration (t = {:.1}): {:?}",
        settled.time,
        settled.state.populations()
    );
    println!(
        "steady by linear solve:            {:?}",
        direct.populations
    );
    println!("closed form:                       {closed:?}");
    println!(
        "<m†m> integrated {:.6}, solved {:.6}",
        settled.state.mdm, direct.mdm
    );
    Ok(())
}
