use dstar_core::adversary::{attack_empire, attack_little, honest_stats, little_z_max, HonestStats};
use dstar_core::aggregation::{
    aggregate_aksel, aggregate_average, aggregate_cge, aggregate_krum, aggregate_median,
    aggregate_trmean, compute_thresholds, dstar_aggregate, filter_gradient, filter_statistics,
    krum_scores, FilterThresholds,
};
use dstar_core::models::{ModelShape, ModelState};
use dstar_core::numerics::{coordinate_median, normal_quantile, sample_exponential, GradVector};
use proptest::prelude::*;

fn vectors(n: std::ops::RangeInclusive<usize>, d: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<GradVector>> {
    (n, d).prop_flat_map(|(n, d)| {
        prop::collection::vec(prop::collection::vec(-100.0..100.0f64, d).prop_map(GradVector::new), n)
    })
}

fn nonzero(d: usize) -> impl Strategy<Value = GradVector> {
    prop::collection::vec(-10.0..10.0f64, d)
        .prop_map(GradVector::new)
        .prop_filter("nonzero", |g| g.norm() > 1e-3)
}

fn close(a: &GradVector, b: &GradVector) -> bool {
    a.iter().zip(b.iter()).all(|(x, y)| (x - y).abs() <= 1e-9 * x.abs().max(y.abs()).max(1.0))
}

fn permuted(grads: &[GradVector], seed: u64) -> Vec<GradVector> {
    let mut out = grads.to_vec();
    let mut rng = dstar_core::numerics::RngStream::new(seed, 0);
    rng.shuffle(&mut out);
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn median_stays_within_honest_range(
        honest in vectors(1..=13, 1..=6),
        extra in 0usize..=12,
        signs in prop::collection::vec(any::<bool>(), 6 * 12),
    ) {
        let d = honest[0].dim();
        // f ≤ ⌈n/2⌉ − 1 with n = h + f  ⇔  f < h
        let f = extra.min(honest.len() - 1);
        let mut all = honest.clone();
        for i in 0..f {
            all.push(GradVector::new((0..d).map(|j| if signs[i * 6 + j] { 1e12 } else { -1e12 }).collect()));
        }
        let m = coordinate_median(&all).unwrap();
        for j in 0..d {
            let lo = honest.iter().map(|g| g[j]).fold(f64::INFINITY, f64::min);
            let hi = honest.iter().map(|g| g[j]).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(lo <= m[j] && m[j] <= hi, "coord {j}: {} not in [{lo}, {hi}]", m[j]);
        }
    }

    #[test]
    fn median_is_permutation_invariant(grads in vectors(1..=15, 1..=5), seed in any::<u64>()) {
        prop_assert_eq!(coordinate_median(&grads).unwrap(), coordinate_median(&permuted(&grads, seed)).unwrap());
    }

    #[test]
    fn aggregators_preserve_dim_and_ignore_order(grads in vectors(7..=15, 1..=5), seed in any::<u64>()) {
        let d = grads[0].dim();
        let other = permuted(&grads, seed);
        let pairs = [
            (aggregate_average(&grads).unwrap(), aggregate_average(&other).unwrap()),
            (aggregate_median(&grads).unwrap(), aggregate_median(&other).unwrap()),
            (aggregate_trmean(&grads, 2).unwrap(), aggregate_trmean(&other, 2).unwrap()),
            (aggregate_cge(&grads, 2).unwrap(), aggregate_cge(&other, 2).unwrap()),
            (aggregate_aksel(&grads).unwrap(), aggregate_aksel(&other).unwrap()),
        ];
        for (a, b) in &pairs {
            prop_assert_eq!(a.dim(), d);
            prop_assert!(close(a, b), "{:?} vs {:?}", a, b);
        }
    }

    #[test]
    fn krum_picks_a_minimum_score_member(grads in vectors(5..=15, 1..=5), seed in any::<u64>()) {
        let f = (grads.len() - 3).min(3);
        let scores = krum_scores(&grads, f).unwrap();
        let best = scores.iter().cloned().fold(f64::INFINITY, f64::min);
        let other = permuted(&grads, seed);
        for input in [&grads, &other] {
            let out = aggregate_krum(input, f).unwrap();
            let idx = grads.iter().position(|g| *g == out);
            prop_assert!(idx.is_some(), "krum output is not an input");
            prop_assert!(scores[idx.unwrap()] <= best * (1.0 + 1e-9) + 1e-9);
        }
    }

    #[test]
    fn trmean_within_surviving_range(grads in vectors(3..=15, 1..=5), b_frac in 0.0..0.5f64) {
        let n = grads.len();
        let b = ((n as f64 * b_frac) as usize).min((n - 1) / 2);
        let out = aggregate_trmean(&grads, b).unwrap();
        for j in 0..out.dim() {
            let mut col: Vec<f64> = grads.iter().map(|g| g[j]).collect();
            col.sort_by(f64::total_cmp);
            prop_assert!(col[b] <= out[j] && out[j] <= col[n - b - 1]);
        }
    }

    #[test]
    fn dot_statistic_is_scale_free(g in nonzero(6), g_v in nonzero(6), k in -20i32..20, c in 1e-3..1e3f64) {
        let (_, d) = filter_statistics(&g, &g_v).unwrap();
        let pow2 = 2f64.powi(k);
        let (_, d2) = filter_statistics(&g.scaled(pow2), &g_v.scaled(pow2)).unwrap();
        prop_assert_eq!(d, d2);
        let (_, dc) = filter_statistics(&g.scaled(c), &g_v.scaled(c)).unwrap();
        prop_assert!((d - dc).abs() <= 1e-12 * d.abs().max(1.0));
    }

    #[test]
    fn accepted_gradients_respect_the_dot_threshold(
        grads in vectors(1..=20, 3..=3),
        g_v in nonzero(3),
        s in 0.0..500.0f64,
        d in -2.0..1.0f64,
    ) {
        let th = FilterThresholds { s, d, median: g_v.clone(), validation: g_v.clone() };
        let accepted: Vec<GradVector> = grads
            .iter()
            .filter(|g| filter_gradient(g, &g_v, &th).unwrap().accepted)
            .cloned()
            .collect();
        let bound = d * g_v.norm_sq();
        let slack = 1e-9 * (1.0 + bound.abs());
        for g in &accepted {
            prop_assert!(g.dot(&g_v) >= bound - slack);
        }
        if !accepted.is_empty() {
            prop_assert!(dstar_aggregate(&accepted).unwrap().dot(&g_v) >= bound - slack);
        }
    }

    #[test]
    fn validation_gradient_accepts_itself(g1 in nonzero(5), later in nonzero(5)) {
        let th = compute_thresholds(g1.clone(), g1).unwrap();
        prop_assert_eq!((th.s, th.d), (0.0, 1.0));
        prop_assert!(filter_gradient(&later, &later, &th).unwrap().accepted);
    }

    #[test]
    fn little_shifts_by_z_sigma(honest in vectors(2..=10, 1..=5), zero_mask in prop::collection::vec(any::<bool>(), 5)) {
        let mut stats = honest_stats(&honest).unwrap();
        for (j, s) in stats.sigma.iter_mut().enumerate() {
            if zero_mask[j] { *s = 0.0; }
        }
        let z = little_z_max(25, 8).unwrap();
        let out = attack_little(&stats, 25, 8).unwrap();
        for j in 0..out.dim() {
            if stats.sigma[j] == 0.0 {
                prop_assert_eq!(out[j], stats.mu[j]);
            }
            prop_assert_eq!(out[j], stats.mu[j] + z * stats.sigma[j]);
            prop_assert!((out[j] - stats.mu[j] - z * stats.sigma[j]).abs() <= 1e-12 * (1.0 + stats.mu[j].abs()));
        }
        prop_assert_eq!(attack_little(&stats, 25, 8).unwrap(), out);
    }

    #[test]
    fn empire_reverses_the_mean(mu in prop::collection::vec(-10.0..10.0f64, 1..6), k in -4i32..4, scale in 0.01..10.0f64) {
        let stats = HonestStats { sigma: GradVector::zeros(mu.len()), mu: GradVector::new(mu), count: 3 };
        let pow2 = 2f64.powi(k);
        let out = attack_empire(&stats, pow2).unwrap();
        prop_assert_eq!(out.dot(&stats.mu), -pow2 * stats.mu.norm_sq());
        let out = attack_empire(&stats, scale).unwrap();
        let want = -scale * stats.mu.norm_sq();
        prop_assert!((out.dot(&stats.mu) - want).abs() <= 1e-12 * want.abs().max(1.0));
        prop_assert_eq!(attack_empire(&stats, scale).unwrap(), out);
    }

    #[test]
    fn empire_flips_average_when_it_outweighs_the_honest(
        mu in nonzero(4),
        n_honest in 1usize..10,
        f in 1usize..10,
        scale in 0.1..10.0f64,
    ) {
        prop_assume!((f as f64) * scale > n_honest as f64 * 1.001);
        let honest = vec![mu.clone(); n_honest];
        let stats = honest_stats(&honest).unwrap();
        let fake = attack_empire(&stats, scale).unwrap();
        let mut all = honest;
        all.extend(std::iter::repeat_n(fake, f));
        prop_assert!(aggregate_average(&all).unwrap().dot(&mu) < 0.0);
    }

    #[test]
    fn quantile_is_odd_and_increasing(p in 1e-6..0.5f64, q in 1e-6..0.5f64) {
        let a = normal_quantile(p).unwrap();
        prop_assert!((normal_quantile(1.0 - p).unwrap() + a).abs() <= 1e-9);
        if p < q {
            prop_assert!(a < normal_quantile(q).unwrap());
        }
    }

    #[test]
    fn exponential_is_monotone_in_u(u in 0.0..0.999f64, du in 1e-6..1e-3f64, scale in 1e-3..10.0f64) {
        prop_assert!(sample_exponential(scale, u).unwrap() < sample_exponential(scale, u + du).unwrap());
    }

    #[test]
    fn flatten_unflatten_is_exact(inputs in 1usize..6, hidden in 1usize..6, classes in 2usize..5, mlp in any::<bool>(), seed in any::<u64>()) {
        let shape = if mlp { ModelShape::mlp1(inputs, hidden, classes) } else { ModelShape::logistic(inputs, classes) };
        let mut rng = dstar_core::numerics::RngStream::new(seed, 1);
        let model = ModelState::init(shape, &mut rng).unwrap();
        let back = ModelState::flatten(shape, &model.unflatten()).unwrap();
        prop_assert_eq!(back, model);
    }
}
