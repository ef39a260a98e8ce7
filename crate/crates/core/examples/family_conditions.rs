// Check the structural hypotheses: convex increasing branches with 0 in every
// image, non-contracting branches, and T(x) = x + C x^(1+alpha) near 0.
use ulam::interval_maps::{verify_family_t, verify_local_conditions, DEFAULT_SAMPLES};
use ulam::{counterexample_map, mp_map};

fn main() -> ulam::Result<()> {
    let mp = verify_local_conditions(&mp_map(0.5)?, 0.5, 1.0, DEFAULT_SAMPLES);
    let fit = mp.local_exponent_fit.as_ref().unwrap();
    println!("mp(0.5): in family {}, all conditions {}", mp.in_family(), mp.local_conditions_hold());
    println!("  fitted C = {:.8}, alpha = {:.6}, preimages per branch <= {}", fit.c, fit.alpha, mp.branch_count_bound);

    let ce = counterexample_map();
    let fam = verify_family_t(&ce, DEFAULT_SAMPLES);
    println!("counterexample: in family {}", fam.in_family());
    for w in &fam.violations {
        println!("  {} fails on branch {} at x = {:.4} (value {:.4})", w.condition, w.branch, w.x, w.value);
    }
    let full = verify_local_conditions(&ce, 0.5, 1.0, DEFAULT_SAMPLES);
    if let Some(w) = full.witnesses("noncontracting").next() {
        println!("  contracting slope {:.4} on branch {}", w.value, w.branch);
    }
    Ok(())
}
