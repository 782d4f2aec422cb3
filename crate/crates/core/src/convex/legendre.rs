use super::{ConvexError, SampledConvexProfile, Tolerances};

/// Discrete Legendre-Fenchel transform `alpha(c) = max_i (c * h_i - beta(h_i))`
/// evaluated on the sorted, deduplicated `dual_grid`.
///
/// The input must pass the convexity certificate at `tol.convex`.
pub fn legendre_transform(
    profile: &SampledConvexProfile,
    dual_grid: &[f64],
    tol: &Tolerances,
) -> Result<SampledConvexProfile, ConvexError> {
    profile.certify(tol.convex).map_err(ConvexError::NotConvex)?;
    if dual_grid.is_empty() {
        return Err(ConvexError::EmptyGrid);
    }
    if dual_grid.iter().any(|c| !c.is_finite()) {
        return Err(ConvexError::NonFiniteGrid);
    }
    let mut grid = dual_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let samples = profile.samples();
    let values = grid
        .iter()
        .map(|&c| {
            let best = samples.iter().map(|s| c * s.abscissa - s.value).fold(f64::NEG_INFINITY, f64::max);
            (c, best)
        })
        .collect();
    SampledConvexProfile::new(values, format!("legendre({})", profile.provenance()))
}

/// Left and right difference quotients at the sample `at`, taken against its
/// nearest neighbours.
pub fn one_sided_derivatives(profile: &SampledConvexProfile, at: f64) -> Result<(f64, f64), ConvexError> {
    if profile.len() < 3 {
        return Err(ConvexError::TooFewSamples(profile.len()));
    }
    let i = profile.index_of(at).ok_or(ConvexError::NotInterior(at))?;
    if i == 0 || i + 1 == profile.len() {
        return Err(ConvexError::NotInterior(at));
    }
    let s = profile.samples();
    let slope = |a: usize, b: usize| (s[b].value - s[a].value) / (s[b].abscissa - s[a].abscissa);
    Ok((slope(i - 1, i), slope(i, i + 1)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn quadratic_is_self_dual() {
        let beta = SampledConvexProfile::from_fn(&grid(-2.0, 2.0, 41), |h| h * h / 2.0, "q").unwrap();
        let alpha = legendre_transform(&beta, &[-1.0, 0.0, 1.0], &Tolerances::default()).unwrap();
        // Sampling at step 0.1 loses at most step^2/8 against the exact dual.
        for s in alpha.samples() {
            assert!((s.value - s.abscissa * s.abscissa / 2.0).abs() <= 0.1 * 0.1 / 8.0 + 1e-12);
        }
    }

    #[test]
    fn absolute_value_dualizes_to_zero_on_slopes() {
        let beta = SampledConvexProfile::from_fn(&grid(-2.0, 2.0, 5), f64::abs, "abs").unwrap();
        let alpha = legendre_transform(&beta, &[-1.0, -0.5, 0.0, 0.5, 1.0], &Tolerances::default()).unwrap();
        assert!(alpha.samples().iter().all(|s| s.value.abs() < 1e-15));
    }

    #[test]
    fn rejects_nonconvex_and_empty_grid() {
        let bad = SampledConvexProfile::new(vec![(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)], "b").unwrap();
        assert!(matches!(
            legendre_transform(&bad, &[0.0], &Tolerances::default()),
            Err(ConvexError::NotConvex(_))
        ));
        let good = SampledConvexProfile::new(vec![(0.0, 0.0), (1.0, 0.0)], "g").unwrap();
        assert!(matches!(
            legendre_transform(&good, &[], &Tolerances::default()),
            Err(ConvexError::EmptyGrid)
        ));
    }

    #[test]
    fn derivatives_at_kink_and_smooth_point() {
        let abs = SampledConvexProfile::from_fn(&grid(-2.0, 2.0, 9), f64::abs, "abs").unwrap();
        assert_eq!(one_sided_derivatives(&abs, 0.0).unwrap(), (-1.0, 1.0));
        let q = SampledConvexProfile::from_fn(&grid(-1.0, 1.0, 21), |h| h * h / 2.0, "q").unwrap();
        let (l, r) = one_sided_derivatives(&q, 0.0).unwrap();
        assert!((l + 0.05).abs() < 1e-12 && (r - 0.05).abs() < 1e-12);
        assert!(one_sided_derivatives(&q, 1.0).is_err());
        assert!(one_sided_derivatives(&q, 0.05).is_err());
    }

    /// Random convex profiles: a few affine pieces plus a quadratic term.
    fn convex_profile() -> impl Strategy<Value = SampledConvexProfile> {
        (
            prop::collection::vec(0.01f64..1.0, 4..40),
            prop::collection::vec((-3.0f64..3.0, -2.0f64..2.0), 1..5),
            0.0f64..2.0,
            -1.0f64..1.0,
        )
            .prop_map(|(steps, pieces, curv, origin)| {
                let total: f64 = steps.iter().sum();
                let mut x = origin - total / 2.0;
                let mut xs = vec![x];
                for s in steps {
                    x += s;
                    xs.push(x);
                }
                // Force 0 to be sampled.
                xs.push(0.0);
                xs.sort_by(f64::total_cmp);
                xs.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
                let f = |h: f64| {
                    curv * h * h / 2.0
                        + pieces.iter().map(|&(a, b)| a * h + b).fold(f64::NEG_INFINITY, f64::max)
                };
                SampledConvexProfile::from_fn(&xs, f, "random").unwrap()
            })
    }

    proptest! {
        #[test]
        fn min_alpha_is_minus_beta_at_zero(beta in convex_profile()) {
            // Dual grid containing every chord slope, so the minimum is attained exactly.
            let s = beta.samples();
            let mut slopes: Vec<f64> = s.windows(2)
                .map(|w| (w[1].value - w[0].value) / (w[1].abscissa - w[0].abscissa))
                .collect();
            slopes.push(0.0);
            let i0 = beta.index_of(0.0).unwrap();
            let lo = if i0 > 0 { slopes[i0 - 1] } else { f64::NEG_INFINITY };
            let hi = if i0 + 1 < s.len() { slopes[i0] } else { f64::INFINITY };
            // The minimizing slope must lie within the sampled range.
            prop_assume!(lo.is_finite() && hi.is_finite());
            let alpha = legendre_transform(&beta, &slopes, &Tolerances::default()).unwrap();
            let b0 = beta.value_at(0.0).unwrap();
            prop_assert!((alpha.min().value + b0).abs() <= 1e-6);
        }

        #[test]
        fn biconjugate_is_below_and_close(beta in convex_profile()) {
            let s = beta.samples();
            let slopes: Vec<f64> = s.windows(2)
                .map(|w| (w[1].value - w[0].value) / (w[1].abscissa - w[0].abscissa))
                .collect();
            let tol = Tolerances::default();
            let alpha = legendre_transform(&beta, &slopes, &tol).unwrap();
            let xs: Vec<f64> = beta.abscissae().collect();
            let back = legendre_transform(&alpha, &xs, &tol).unwrap();
            for (b, bb) in s.iter().zip(back.samples()) {
                let scale = 1e-9 * (1.0 + b.value.abs());
                prop_assert!(bb.value <= b.value + scale);
                // With every chord slope in the dual grid the biconjugate is exact.
                prop_assert!((bb.value - b.value).abs() <= 1e-7 * (1.0 + b.value.abs()));
            }
        }

        #[test]
        fn derivatives_are_ordered(beta in convex_profile()) {
            let xs: Vec<f64> = beta.abscissae().collect();
            for &x in &xs[1..xs.len() - 1] {
                let (l, r) = one_sided_derivatives(&beta, x).unwrap();
                prop_assert!(l <= r + 1e-9);
            }
        }

        #[test]
        fn transform_is_convex(beta in convex_profile(), grid in prop::collection::vec(-5.0f64..5.0, 3..30)) {
            let alpha = legendre_transform(&beta, &grid, &Tolerances::default()).unwrap();
            prop_assert!(alpha.certify(1e-9).is_ok());
        }
    }
}
