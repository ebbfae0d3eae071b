//! The row-count phase transition at low column sparsity: bisect for the
//! smallest m meeting a failure budget, at two subspace dimensions. The s=1
//! Count-Sketch needs roughly 4x more rows when d doubles; OSNAP at
//! s ~ log(d/delta)/eps grows near-linearly.
//!
//! Run: `cargo run --release --example phase_transition`

use sparse_ose::harness::{
    config::{FamilySpec, InstanceKind},
    emit_report, min_m_search, run_sweep, SweepConfig,
};

fn main() -> sparse_ose::Result<()> {
    let (n, eps, delta, trials, seed) = (1 << 13, 0.125, 0.1, 200, 5);

    println!("minimal m meeting delta = {delta} on hard-mixture instances (eps = {eps}):");
    for family in ["count_sketch", "osnap"] {
        let mut stars = Vec::new();
        for d in [4usize, 8] {
            let spec = match family {
                "count_sketch" => FamilySpec::CountSketch,
                _ => {
                    let s = ((d as f64 / delta).log2() / eps).ceil() as usize;
                    FamilySpec::Osnap { s }
                }
            };
            let m = min_m_search(spec, n, d, eps, delta, InstanceKind::HardMixture, trials, seed)?;
            stars.push(m);
            println!("  {family:12} d = {d}: m* = {m}");
        }
        println!(
            "  {family:12} log2(m*(8)/m*(4)) = {:.2}",
            (stars[1] as f64 / stars[0] as f64).log2()
        );
    }

    // A sweep over a row grid, written as CSV + SVG.
    let cfg = SweepConfig {
        family: FamilySpec::CountSketch,
        n,
        d: 8,
        eps,
        delta,
        m_grid: vec![256, 512, 1024, 2048, 4096],
        instance: InstanceKind::HardMixture,
        trials,
        seed,
        gamma: 0.0,
    };
    let records = run_sweep(&cfg)?;
    for r in &records {
        println!(
            "count_sketch m = {:4}: delta_hat = {:.3} CI [{:.3}, {:.3}]",
            r.m, r.delta_hat, r.ci_low, r.ci_high
        );
    }
    let out = std::path::Path::new("target/phase_transition");
    let (csv, svg) = emit_report(&records, out)?;
    println!("wrote {} and {}", csv.display(), svg.display());
    Ok(())
}
