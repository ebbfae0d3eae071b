//! Build a Count-Sketch, test whether it embeds a random subspace, and
//! estimate its failure probability.
//!
//! Run: `cargo run --example embedding_basics`

use sparse_ose::embedding::{distortion, estimate_failure, orthonormal_basis, ORTHO_TOL};
use sparse_ose::matrix::DenseMatrix;
use sparse_ose::rng::SeedRng;
use sparse_ose::sketches::count_sketch;

fn main() -> sparse_ose::Result<()> {
    let (n, d, eps) = (1 << 10, 6, 0.25);

    // A d-dimensional test subspace of R^n, as an orthonormal basis.
    let mut rng = SeedRng::new(42);
    let q = orthonormal_basis(&DenseMatrix::gaussian(n, d, &mut rng), ORTHO_TOL)?;

    for m in [64, 256, 1024, 4096] {
        let p = count_sketch(m, n, 7)?;
        let rep = distortion(&p, &q)?;
        println!(
            "m = {m:5}: sigma in [{:.4}, {:.4}], distortion {:.4} -> {}",
            rep.sigma_min,
            rep.sigma_max,
            rep.eps_hat,
            if rep.eps_hat <= eps { "embeds" } else { "fails" }
        );
    }

    // Monte-Carlo failure probability over fresh sketch and subspace draws.
    let est = estimate_failure(
        |rng| count_sketch(256, n, rng.next_u64()).unwrap(),
        |rng| orthonormal_basis(&DenseMatrix::gaussian(n, d, rng), ORTHO_TOL).unwrap(),
        eps,
        400,
        99,
    )?;
    println!(
        "m = 256, eps = {eps}: delta_hat = {:.3} (95% CI [{:.3}, {:.3}], {} trials)",
        est.delta_hat, est.ci.0, est.ci.1, est.trials
    );
    Ok(())
}
