//! Construct each sketch family and inspect sparsity, norms, and the
//! per-column sparsity budget s <= 1/(9 eps).
//!
//! Run: `cargo run --example sketch_gallery`

use sparse_ose::matrix::sparse_dot;
use sparse_ose::sketches::{
    check_sparsity_budget, column_sparsity, count_sketch, dense_rademacher, hadamard_block, osnap,
    SketchSpec,
};

fn main() -> sparse_ose::Result<()> {
    let (m, n, eps) = (64, 512, 1.0 / 32.0);

    let sketches = vec![
        ("count_sketch", count_sketch(m, n, 1)?),
        ("osnap s=3", osnap(m, n, 3, 2)?),
        ("dense_rademacher", dense_rademacher(m, n, 3)?),
        ("hadamard_block", hadamard_block(eps, n, 2)?),
    ];
    for (name, p) in &sketches {
        let (max_s, _) = column_sparsity(p);
        let norm0 = p.column_norm_sq(0);
        println!(
            "{name:18} {}x{}  nnz {:7}  max column sparsity {max_s:3}  |col 0|^2 = {norm0:.4}  budget(eps={eps}): {}",
            p.rows(),
            p.cols(),
            p.nnz(),
            check_sparsity_budget(p, eps),
        );
    }

    // The Hadamard block diagonal repeats every m columns: distinct columns of
    // one block are orthogonal, copies across tiles are identical.
    let had = &sketches[3].1;
    println!(
        "hadamard: <col 0, col 1> = {}, <col 1, col {}> = {}",
        sparse_dot(had.column(0), had.column(1)),
        had.rows() + 1,
        sparse_dot(had.column(1), had.column(had.rows() + 1)),
    );

    // Specs serialize as key=value lines; matrices as header + triples.
    let spec = SketchSpec::osnap(8, 16, 2, 5)?;
    println!("--- spec text ---\n{}", spec.to_text());
    let matrix = spec.build();
    let text = matrix.to_text();
    println!("--- matrix text (first 4 lines) ---");
    for line in text.lines().take(4) {
        println!("{line}");
    }
    Ok(())
}
