// Monotonic measures: an atom at 0 plus a non-increasing density. Push-forward
// by a map of the convex family and averaging onto a partition keep them so.
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ulam::measures::{check_key_inequality, project, pushforward, random_monotonic_on, IntervalPair};
use ulam::{counterexample_map, mp_map, Interval, Partition, StepMeasure};

fn main() -> ulam::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mu = random_monotonic_on(&mut rng, Partition::quasi_uniform(40, 2.0, 1)?, 0.5);
    println!("atom at 0: {:.4}, total mass {:.15}", mu.atom0, mu.total_mass());

    let pair = IntervalPair::new(Interval::new(0.1, 0.3)?, Interval::new(0.2, 0.7)?)?;
    println!("average density on {} >= on {}: {}", pair.a(), pair.b(), check_key_inequality(&mu, &pair)?);

    let fine = Partition::uniform(256)?;
    let pushed = pushforward(&mp_map(1.5)?, &mu, &fine);
    println!("mp(1.5) push-forward monotonic: {}, atom kept: {:.4}", pushed.is_monotonic(1e-10).holds, pushed.atom0);

    let coarse = Partition::uniform(5)?;
    println!("projection densities: {:?}", project(&mu, &coarse).densities);

    // the counterexample is not in the family; Lebesgue measure loses monotonicity
    let bad = pushforward(&counterexample_map(), &StepMeasure::lebesgue(fine.clone()), &fine);
    let m = bad.is_monotonic(1e-10);
    println!(
        "counterexample push-forward of Lebesgue monotonic: {} (first rise after cell {:?})",
        m.holds,
        m.witness.map(|i| i + 1)
    );
    Ok(())
}
