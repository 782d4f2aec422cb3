use mather_core::torus::{
    avoid_interval_sequence, cantor_gaps, hausdorff_distance, heights, lemma_b_check, plane_line, qc_build,
    qc_components, random_sequence, IntegerBox, IntervalSet, IrrationalPair,
};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn avoiding_walks_avoid(a in 0.001f64..0.099, t in 0.01f64..0.99, n in 1usize..20_000) {
        let b = a + t * (0.0999 - a);
        prop_assume!(a < b);
        let pair = IrrationalPair::unchecked(a, b).unwrap();
        let seq = avoid_interval_sequence(&pair, n).unwrap();
        let lim = a.min(b - a);
        prop_assert!(heights(&seq, &pair).values.iter().all(|&h| !(h > 0.0 && h < lim)));
    }

    #[test]
    fn quasicrystal_heights_and_refinement(a in 0.05f64..0.95, b in 0.05f64..0.95, n in 2i64..14) {
        let pair = match IrrationalPair::new(a, b) {
            Ok(p) => p,
            Err(_) => return Ok(()),
        };
        let qc = qc_build(&pair, IntegerBox::columns(&pair, n).unwrap()).unwrap();
        prop_assert!(qc.points.iter().all(|p| p.height > 0.0 && p.height < 1.0));
        prop_assert!(qc.column_counts().iter().all(|&c| c <= 1));
        let mut prev = qc_components(&qc, &IntervalSet::empty());
        for m in [1, 3, 7] {
            let rep = qc_components(&qc, &cantor_gaps(m));
            prop_assert!(rep.refines(&prev));
            prop_assert!(rep.kept <= prev.kept);
            prev = rep;
        }
    }

    #[test]
    fn hausdorff_distance_is_symmetric(
        xs in prop::collection::vec(-2.0f64..2.0, 1..40),
        ys in prop::collection::vec(-2.0f64..2.0, 1..40),
    ) {
        prop_assert_eq!(hausdorff_distance(&xs, &ys), hausdorff_distance(&ys, &xs));
    }

    #[test]
    fn sampled_heights_lie_in_crossed_domains(a in -1.0f64..1.0, b in -1.0f64..1.0) {
        prop_assume!(a.abs() + b.abs() > 0.2);
        let pair = IrrationalPair::new(2f64.sqrt().fract(), 3f64.sqrt().fract()).unwrap();
        let rep = lemma_b_check(&pair, &plane_line(&pair, a, b, 2000.0), 500, 0.01).unwrap();
        prop_assert_eq!(rep.sampled_to_traversal, 0.0);
        prop_assert_eq!(rep.hausdorff, rep.traversal_to_sampled.max(rep.sampled_to_traversal));
    }

    #[test]
    fn seeded_sequences_repeat(p in 0.0f64..=1.0, seed in any::<u64>()) {
        prop_assert_eq!(random_sequence(p, 500, seed).unwrap(), random_sequence(p, 500, seed).unwrap());
    }
}
