//! The inner-product collision toolkit: good levels, the collision-level
//! search, and verification against the removal adversary.
//!
//! Run: `cargo run --example collision_levels`

use sparse_ose::collision::{
    find_collision_level, good_level, pair_probability, verify_collision_level, AdversaryMode,
    VectorFamily,
};
use sparse_ose::rng::SeedRng;

fn random_family(seed: u64, size: usize, dim: usize) -> VectorFamily {
    let mut rng = SeedRng::new(seed);
    let vectors = (0..size)
        .map(|_| {
            let mut v: Vec<f64> = (0..dim).map(|_| rng.gaussian()).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= norm);
            v
        })
        .collect();
    VectorFamily::new(dim, vectors).unwrap()
}

fn main() -> sparse_ose::Result<()> {
    let kappa = 0.25;

    // Pair statistics are over ordered pairs, diagonal included.
    let fam = random_family(5, 10, 3);
    for p in [-0.5, 0.0, 0.5] {
        println!(
            "Pr[<u,v> >= {p:4}] = {:.3} over {} ordered pairs",
            pair_probability(&fam, p),
            fam.len() * fam.len()
        );
    }

    // A good level always exists: Pr[<u,v> >= 2^i k - 2k] >= 2^(-i-2)/K.
    let i = good_level(&fam, kappa)?;
    println!("good level at kappa = {kappa}: i = {i}");

    // The collision level survives every small removal subset.
    for (seed, size, dim) in [(1u64, 8, 2), (2, 12, 4), (3, 10, 6)] {
        let fam = random_family(seed, size, dim);
        let cert = find_collision_level(&fam, kappa, 12)?;
        let verified = verify_collision_level(&fam, kappa, cert.ell, AdversaryMode::Exhaustive)?;
        println!(
            "|S| = {size:2}, dim = {dim}: ell = {} (threshold {:+.3}, heavy fraction {:.2}) exhaustively verified: {verified}",
            cert.ell, cert.threshold, cert.heavy_fraction,
        );
    }

    // Large families switch to the greedy surrogate adversary.
    let fam = random_family(9, 96, 4);
    let cert = find_collision_level(&fam, kappa, 12)?;
    let verified = verify_collision_level(
        &fam,
        kappa,
        cert.ell,
        AdversaryMode::GreedyPlusRandom { subsets: 30, seed: 4 },
    )?;
    println!(
        "|S| = 96: ell = {} via greedy surrogate, spot-verified: {verified}",
        cert.ell
    );
    Ok(())
}
