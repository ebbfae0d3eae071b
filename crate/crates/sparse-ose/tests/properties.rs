//! Property tests for the structural invariants.

use proptest::prelude::*;

use sparse_ose::collision::{pair_probability, VectorFamily};
use sparse_ose::hard_instance::{build_w, FactoredInstance, HardInstanceParams};
use sparse_ose::matrix::{DenseMatrix, SparseColMatrix};
use sparse_ose::sketches::{column_sparsity, osnap, SketchSpec};

fn ball_vectors(size: usize, dim: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    proptest::collection::vec(
        proptest::collection::vec(-1.0f64..1.0, dim),
        size..=size,
    )
    .prop_map(|mut vs| {
        for v in &mut vs {
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1.0 {
                v.iter_mut().for_each(|x| *x /= norm);
            }
        }
        vs
    })
}

proptest! {
    /// Qualifying-pair mass can only shrink as the threshold rises.
    #[test]
    fn pair_probability_monotone(
        vectors in (2usize..10, 1usize..5).prop_flat_map(|(size, dim)| ball_vectors(size, dim)),
        p1 in -1.0f64..1.0,
        p2 in -1.0f64..1.0,
    ) {
        let dim = vectors[0].len();
        let fam = VectorFamily::new(dim, vectors).unwrap();
        let (lo, hi) = if p1 <= p2 { (p1, p2) } else { (p2, p1) };
        prop_assert!(pair_probability(&fam, lo) >= pair_probability(&fam, hi));
    }

    /// OSNAP columns always hold exactly s strictly-increasing rows of
    /// magnitude 1/sqrt(s), hence unit norm.
    #[test]
    fn osnap_column_structure(m in 1usize..64, n in 1usize..40, seed in 0u64..1000, s_frac in 0.0f64..1.0) {
        let s = 1 + ((m - 1) as f64 * s_frac) as usize;
        let p = osnap(m, n, s, seed).unwrap();
        let (max_s, per) = column_sparsity(&p);
        prop_assert_eq!(max_s, s);
        prop_assert!(per.iter().all(|&c| c == s));
        for c in 0..n {
            let col = p.column(c);
            prop_assert!(col.windows(2).all(|w| w[0].0 < w[1].0));
            prop_assert!((p.column_norm_sq(c) - 1.0).abs() <= 1e-12);
        }
    }

    /// The block recombination factor is always orthonormal.
    #[test]
    fn w_factor_orthonormal(d in 1usize..6, ell in 0u32..4, seed in 0u64..500) {
        let rows = d << ell;
        let mut rng = sparse_ose::SeedRng::new(seed);
        let sigma: Vec<i8> = (0..rows).map(|_| if rng.sign() > 0.0 { 1 } else { -1 }).collect();
        let w = build_w(d, ell, &sigma).unwrap();
        prop_assert!(w.gram().max_abs_diff(&DenseMatrix::identity(d)) <= 1e-12);
    }

    /// Text serialization round-trips exactly for sketches and instances.
    #[test]
    fn text_formats_roundtrip(m in 1usize..32, n in 1usize..32, seed in 0u64..500) {
        let spec = SketchSpec::count_sketch(m, n, seed).unwrap();
        let matrix = spec.build();
        prop_assert_eq!(
            SparseColMatrix::from_text(&matrix.to_text()).unwrap(),
            matrix.clone()
        );
        let dense = matrix.densify();
        prop_assert_eq!(DenseMatrix::from_text(&dense.to_text()).unwrap(), dense);

        let d = 1 + seed as usize % 3;
        if n >= d * 4 {
            let params = HardInstanceParams::new(n, d, 2, seed).unwrap();
            let inst = sparse_ose::hard_instance::sample_instance(&params);
            prop_assert_eq!(FactoredInstance::from_text(&inst.to_text()).unwrap(), inst);
        }
    }
}
