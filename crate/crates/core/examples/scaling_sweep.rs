// Sweep the resolution and watch the mass of the first cell.
//
// alpha < 1: pi1 / delta grows without bound while pi1 / delta^(1-alpha) stays
// bounded. alpha > 1: the measure collapses onto the origin.
use ulam::experiments::{fit_scaling_exponent, run_sweep, SweepConfig};

fn main() -> ulam::Result<()> {
    let cells: Vec<usize> = (8..=15).map(|k| 1 << k).collect();
    let recs = run_sweep(&SweepConfig::uniform(0.5, cells, 0.1))?;
    println!("{:>6} {:>12} {:>12} {:>14}", "n", "pi1", "pi1/delta", "pi1/delta^0.5");
    for r in &recs {
        println!("{:>6} {:>12.6e} {:>12.4} {:>14.6}", r.n_cells, r.pi1, r.pi1_over_delta, r.pi1_over_delta_pow);
    }
    let fit = fit_scaling_exponent(&recs)?;
    println!("log-log slope {:.4}, r^2 {:.5}", fit.slope, fit.r_squared);

    let cells: Vec<usize> = (8..=14).map(|k| 1 << k).collect();
    let recs = run_sweep(&SweepConfig::uniform(1.5, cells, 0.1))?;
    println!("\n{:>6} {:>10} {:>14}", "n", "pi1", "mass of [0.1,1]");
    for r in &recs {
        println!("{:>6} {:>10.6} {:>14.6e}", r.n_cells, r.pi1, r.tail_mass);
    }
    Ok(())
}
