// A map with one contracting branch whose orbits all converge to the fixed
// point 1/2, and what the Ulam chain does with it.
use ulam::experiments::{counterexample_orbits, run_counterexample, DEFAULT_WINDOW};
use ulam::{counterexample_map, SolverOptions};

fn main() -> ulam::Result<()> {
    let map = counterexample_map();
    println!("T(1/2) = {}", map.eval(0.5)?);

    let orbits = counterexample_orbits(10_000, 1_000, 1, 1e-9)?;
    println!("{}/{} orbits end within 1e-9 of 1/2", orbits.within, orbits.starts);

    let opts = SolverOptions::default();
    println!("\ncells aligned with 5/12 and 1/2:");
    for r in run_counterexample(&[12, 24, 60, 120, 240, 480], DEFAULT_WINDOW, false, &opts)? {
        println!("  n = {:>3}: mass near 1/2 = {:.6}, heaviest cell {}", r.n_cells, r.mass_near_half, r.pi_argmax_cell);
    }

    // With an odd count 1/2 sits inside a cell, which leaks to the first cell.
    println!("\nodd cell counts:");
    for r in run_counterexample(&[13, 25, 49, 97, 193, 385], DEFAULT_WINDOW, true, &opts)? {
        println!("  n = {:>3}: mass near 1/2 = {:.6}, heaviest cell {}", r.n_cells, r.mass_near_half, r.pi_argmax_cell);
    }
    Ok(())
}
