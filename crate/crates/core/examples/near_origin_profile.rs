// For alpha > 1 the stationary masses of the cells next to the origin settle
// onto k^-alpha, so the first cell keeps about 1/zeta(alpha) of the total.
use ulam::{mp_map, stationary_distribution, Partition, SolverOptions, UlamMatrix};

fn main() -> ulam::Result<()> {
    let alpha = 1.5;
    for k in (8..=16).step_by(2) {
        let n = 1usize << k;
        let p = UlamMatrix::build(&mp_map(alpha)?, &Partition::uniform(n)?)?;
        let pi = stationary_distribution(&p, &SolverOptions::default())?.pi;
        let ratios: Vec<String> = (2..=5).map(|j| format!("{:.4}", pi[j - 1] / pi[0])).collect();
        println!("n = 2^{k:<2} pi1 = {:.6}  pi_k/pi_1 (k=2..5) = {}", pi[0], ratios.join(" "));
    }
    let expected: Vec<String> = (2..=5).map(|j| format!("{:.4}", (j as f64).powf(-alpha))).collect();
    let zeta: f64 = (1..2_000_000).map(|k| (k as f64).powf(-alpha)).sum::<f64>() + 2.0 / 2_000_000f64.sqrt();
    println!("k^-alpha = {}, 1/zeta(alpha) = {:.6}", expected.join(" "), 1.0 / zeta);
    Ok(())
}
