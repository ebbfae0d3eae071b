//! Sample factored hard instances U = VW, check isometry, and test a sketch
//! against them in factored form.
//!
//! Run: `cargo run --example hard_instances`

use sparse_ose::hard_instance::{
    factored_distortion, is_isometry, sample_isometric, sample_mixture, HardInstanceParams,
};
use sparse_ose::sketches::count_sketch;

fn main() -> sparse_ose::Result<()> {
    let (n, d, eps) = (1 << 12, 4, 1.0 / 16.0);

    // Fixed block level: d * 2^ell canonical columns recombined in sign
    // blocks of weight beta = 2^-ell.
    for ell in 0..3u32 {
        let params = HardInstanceParams::new(n, d, ell, 7)?;
        let inst = sample_isometric(&params, 100)?;
        println!(
            "ell = {ell}: V has {} columns, isometric: {}",
            inst.params.v_cols(),
            is_isometry(&inst, 1e-9),
        );
    }

    // The mixture: level 0 half the time, otherwise uniform on {1..L}.
    let mut level_counts = std::collections::BTreeMap::new();
    for seed in 0..2000 {
        let inst = sample_mixture(n, d, eps, seed)?;
        *level_counts.entry(inst.params.ell).or_insert(0usize) += 1;
    }
    println!("mixture levels over 2000 draws at eps = {eps}: {level_counts:?}");

    // Factored embedding check: Gram(PI U) = W' Gram(PI V) W needs only the
    // gathered sketch columns.
    let params = HardInstanceParams::new(n, d, 1, 3)?;
    let inst = sample_isometric(&params, 100)?;
    for m in [8, 32, 128, 512] {
        let p = count_sketch(m, n, 11)?;
        let rep = factored_distortion(&p, &inst)?;
        println!(
            "m = {m:4}: sigma in [{:.4}, {:.4}] -> {}",
            rep.sigma_min,
            rep.sigma_max,
            if rep.eps_hat <= eps { "embeds" } else { "fails" }
        );
    }
    Ok(())
}
