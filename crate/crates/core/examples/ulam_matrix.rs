// Assemble the Ulam transition matrix p_ij = m(D_i ∩ T^-1 D_j) / m(D_i) and
// look at its first row and sparsity.
use ulam::ulam_operator::{first_row_diagnostics, Direction};
use ulam::{mp_map, Partition, UlamMatrix};

fn main() -> ulam::Result<()> {
    let alpha = 0.5;
    let partition = Partition::uniform(1024)?;
    let p = UlamMatrix::build(&mp_map(alpha)?, &partition)?;
    println!("n = {}, nonzeros = {}, widest row = {}", p.n(), p.nnz(), p.max_row_support());
    println!("largest row-sum correction before renormalizing: {:e}", p.max_row_correction());

    let d = first_row_diagnostics(alpha, &partition)?;
    println!("p11 = {:.12} (closed form {:.12})", d.matrix_p11, d.p11);
    println!("p12 = {:.12} (closed form {:.12})", d.matrix_p12, d.p12);
    println!("bracket [{:.6}, {:.6}] holds: {}", d.lower, d.upper, d.p12_in_bounds());

    let w = vec![1.0 / 1024.0; 1024];
    let next = p.apply(&w, Direction::Left)?;
    println!("mass after one step from uniform: {:.15}", next.iter().sum::<f64>());

    // the text format, first few entries
    let mut buf = Vec::new();
    p.write_triplets(&mut buf)?;
    for line in String::from_utf8_lossy(&buf).lines().take(4) {
        println!("  {line}");
    }
    Ok(())
}
