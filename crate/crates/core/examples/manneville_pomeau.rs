// Evaluate the Manneville–Pomeau map T(x) = x + x^(1+alpha) mod 1 and invert
// its branches.
use ulam::interval_maps::mp_critical_point;
use ulam::{mp_map, Interval};

fn main() -> ulam::Result<()> {
    for alpha in [0.0, 0.5, 1.0, 1.5] {
        let map = mp_map(alpha)?;
        let c = mp_critical_point(alpha)?;
        println!("alpha = {alpha}: branch point c = {c:.10}");
        for x in [0.0, 0.1, 0.25, c, 0.9] {
            println!("  T({x:.4}) = {:.6}", map.eval(x)?);
        }
    }

    // x + x^2 = 1/2 on the first branch for alpha = 1
    let map = mp_map(1.0)?;
    let z = map.branch_preimage(0, 0.5)?.unwrap();
    println!("first-branch preimage of 1/2 (alpha = 1): {z:.12}");

    let target = Interval::new(0.0, 0.25)?;
    for (i, b) in map.branches().iter().enumerate() {
        println!("branch {i} on {}: preimage of {target} = {:?}", b.domain(), map.preimage_of_interval(i, &target)?);
    }
    Ok(())
}
