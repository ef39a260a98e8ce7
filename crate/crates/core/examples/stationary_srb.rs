// Stationary vector of the Ulam chain and the discrete SRB density pi_i/|D_i|.
use ulam::stationary::{check_unique_ergodicity, srb_from_pi, Method};
use ulam::{mp_map, stationary_distribution, Partition, SolverOptions, UlamMatrix};

fn main() -> ulam::Result<()> {
    let partition = Partition::uniform(4096)?;
    let p = UlamMatrix::build(&mp_map(0.5)?, &partition)?;

    let r = stationary_distribution(&p, &SolverOptions::default())?;
    println!("Gauss-Seidel: {} sweeps, residual {:e}", r.iterations, r.residual);

    let power = SolverOptions { method: Method::Power, ..Default::default() };
    let q = stationary_distribution(&p, &power)?;
    let diff: f64 = r.pi.iter().zip(&q.pi).map(|(a, b)| (a - b).abs()).sum();
    println!("power iteration: {} steps, L1 distance to Gauss-Seidel {diff:e}", q.iterations);

    let erg = check_unique_ergodicity(&p, 64);
    println!(
        "unique: {}, closed classes: {}, positive power: {:?}",
        erg.unique, erg.closed_classes, erg.n_positive_power
    );

    let srb = srb_from_pi(&r.pi, &partition)?;
    for i in [0, 1, 2, 10, 100, 1000, 4095] {
        println!("  density on cell {:>4}: {:.6}", i + 1, srb.densities[i]);
    }
    println!("non-increasing: {}", srb.as_step_measure().is_monotonic(1e-10).holds);
    println!("mass of [0.1, 1]: {:.6}", srb.tail_mass(0.1)?);
    Ok(())
}
