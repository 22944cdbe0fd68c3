use frogbound::certify::{certify_params, eval_interval, CertifyConfig, Verdict};
use frogbound::genfun::{build_g, f_enclosure, f_value, FactoredG};
use frogbound::search::{m_value, m_value_real, rational_candidates};
use frogbound::sim::{sample_u, simulate_fm, simulate_sfm, InitMeasure, SimConfig, Walk};
use frogbound::u_dist::{u_cdf_dominates, u_pmf, u_pmf_interval};
use frogbound::{derive_params, exp_enclosure, Dyadic, DriftParams, Interval, Rational, Round};
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// An arity and a drift strictly inside `(1/(d+1), 1/2)` with a modest
/// denominator.
fn drift(max_d: u32) -> impl Strategy<Value = DriftParams> {
    (2..=max_d, 20i64..400, 1i64..1000).prop_filter_map("drift out of range", |(d, den, t)| {
        let lo = den / (d as i64 + 1) + 1;
        let hi = (den - 1) / 2;
        (lo <= hi).then(|| derive_params(d, &rat(lo + t % (hi - lo + 1), den)).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn dyadic_rounding_brackets(n in -1_000_000i64..1_000_000, m in 1i64..1_000_000, prec in 8u32..80) {
        let r = rat(n, m);
        let lo = Dyadic::from_rational(&r, prec, Round::Down).to_rational();
        let hi = Dyadic::from_rational(&r, prec, Round::Up).to_rational();
        prop_assert!(lo <= r && r <= hi);
    }

    #[test]
    fn exp_enclosure_contains_and_tightens(n in -400i64..400, m in 1i64..60) {
        let q = rat(n, m);
        let coarse = exp_enclosure(&q, 64);
        let fine = exp_enclosure(&q, 256);
        let x = n as f64 / m as f64;
        // the float reference inherits the rounding of x, amplified by |x|
        prop_assert!((coarse.mid_f64() - x.exp()).abs() <= (4.0 + x.abs()) * f64::EPSILON * x.exp());
        prop_assert!(coarse.intersect(&fine).is_some());
        prop_assert!(fine.width_f64() <= coarse.width_f64());
    }

    #[test]
    fn u_pmf_is_a_distribution(params in drift(9), lambda in 0.0f64..8.0) {
        let pmf = u_pmf(&params, lambda).unwrap();
        prop_assert_eq!(pmf.probs.len(), params.d as usize);
        prop_assert!(pmf.probs.iter().all(|&q| q >= -1e-15));
        prop_assert!((pmf.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn u_pmf_enclosures_contain_the_sum_one(params in drift(6), lambda in 0.0f64..5.0) {
        let probs = u_pmf_interval(&params, lambda, 128).unwrap();
        let total = probs.iter().skip(1).fold(probs[0].clone(), |acc, q| &acc + q);
        prop_assert!(total.contains_f64(1.0));
    }

    #[test]
    fn dominance_in_arity(params in drift(7), lambda in 0.0f64..6.0) {
        let next = params.with_arity(params.d + 1).unwrap();
        prop_assert!(u_cdf_dominates(&params, &next, lambda).unwrap());
    }

    #[test]
    fn g_enclosure_contains_float_value(params in drift(6), y in 0.0f64..=1.0) {
        let g = build_g(&params).unwrap();
        let iv = eval_interval(&g, &Interval::from_f64(y, 128).unwrap(), 128);
        let v = g.eval_f64(y);
        prop_assert!(iv.lo().to_f64() <= v * (1.0 + 1e-12) && v <= iv.hi().to_f64() * (1.0 + 1e-12));
    }

    #[test]
    fn g_box_enclosure_covers_samples(params in drift(5), a in 0.0f64..1.0, w in 0.0f64..0.2) {
        let b = (a + w).min(1.0);
        let g = build_g(&params).unwrap();
        let box_ = Interval::new(Dyadic::from_f64(a).unwrap(), Dyadic::from_f64(b).unwrap(), 96);
        let iv = eval_interval(&g, &box_, 96);
        for k in 0..=8 {
            let y = a + (b - a) * k as f64 / 8.0;
            let point = eval_interval(&g, &Interval::from_f64(y, 96).unwrap(), 96);
            prop_assert!(point.is_subset(&iv));
        }
    }

    #[test]
    fn factored_matches_expanded(params in drift(7), y in 0.0f64..=1.0) {
        let fg = FactoredG::new(&params).unwrap();
        let (x, pref) = fg.constants(160);
        let yi = Interval::from_f64(y, 160).unwrap();
        let factored = fg.eval(&x, &pref, &yi);
        let expanded = eval_interval(&build_g(&params).unwrap(), &yi, 160);
        prop_assert!(factored.intersect(&expanded).is_some());
    }

    #[test]
    fn change_of_variables(params in drift(6), lambda in 0.0f64..6.0) {
        let c = params.c.to_f64().unwrap();
        let y = (-lambda / c).exp();
        let g = build_g(&params).unwrap();
        let f = f_value(&params, lambda);
        prop_assert!((g.eval_f64(y) - f).abs() < 1e-10 * f.max(1.0));
    }

    #[test]
    fn f_enclosure_contains_float(params in drift(6), num in 0i64..400) {
        let lambda = rat(num, 100);
        let iv = f_enclosure(&params, &lambda, 128);
        let v = f_value(&params, num as f64 / 100.0);
        prop_assert!((iv.mid_f64() - v).abs() < 1e-12 * v.max(1.0));
    }

    #[test]
    fn m_value_decreases_in_arity(params in drift(8)) {
        let next = params.with_arity(params.d + 1).unwrap();
        prop_assert!(m_value(&next) < m_value(&params));
    }

    #[test]
    fn m_value_f32_tracks_f64(d in 2u32..8, t in 0.05f64..0.95) {
        let lo = 1.0 / (d as f64 + 1.0);
        let p = lo + t * (0.5 - lo);
        let m = m_value_real(d, p).unwrap();
        let np = frogbound::numeric::NumParams::<f32>::new(d, p as f32).unwrap();
        let m32 = frogbound::numeric::maximize_g(&np).value as f64;
        prop_assert!((m - m32).abs() < 1e-4 * m.max(1.0));
    }

    #[test]
    fn candidates_lie_in_unit_interval(target in 0.01f64..0.99, den in 2u64..500) {
        let cs = rational_candidates(target, den);
        prop_assert!(!cs.is_empty());
        let zero = rat(0, 1);
        let one = rat(1, 1);
        for c in &cs {
            prop_assert!(*c > zero && *c < one);
            prop_assert!(c.denom().to_u64().unwrap() <= den);
        }
    }

    #[test]
    fn sample_u_in_range(d in 2u32..10, p in 0.01f64..0.49, lambda in 0.0f64..10.0, seed in any::<u64>()) {
        let walk = Walk::new(d, p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..50 {
            prop_assert!(sample_u(&walk, lambda, &mut rng) < d);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// The certified range always brackets the numeric maximum.
    #[test]
    fn certificate_brackets_numeric_maximum(params in drift(4)) {
        let cert = certify_params(&params, &CertifyConfig::default()).unwrap();
        let m = m_value(&params);
        prop_assert!(cert.is_consistent());
        prop_assert!(cert.sup_upper_f64() >= m - 1e-9, "{} < {m}", cert.sup_upper_f64());
        prop_assert!(cert.sup_lower_f64() <= m + 1e-9);
        if m < 1.0 - 1e-6 {
            prop_assert_eq!(cert.verdict, Verdict::CertifiedBelowOne);
        } else if m > 1.0 + 1e-6 {
            prop_assert_eq!(cert.verdict, Verdict::FailedExceedsOne);
        }
    }

    #[test]
    fn simulations_are_seeded(d in 2u32..4, p in 0.2f64..0.45, seed in any::<u64>()) {
        let walk = Walk::new(d, p).unwrap();
        let cfg = SimConfig { depth: 6, max_steps: 1_000_000, seed, replications: 6 };
        let a = simulate_sfm(&walk, InitMeasure::Poisson { mean: 1.0 }, &cfg).unwrap();
        prop_assert_eq!(&a, &simulate_sfm(&walk, InitMeasure::Poisson { mean: 1.0 }, &cfg).unwrap());
        let f = simulate_fm(&walk, InitMeasure::OnePerSite, &cfg).unwrap();
        prop_assert!(f.capped_replications.is_empty());
        prop_assert_eq!(f.root_visits.len(), 6);
    }
}

#[test]
fn boundary_drifts_rejected() {
    for d in 2..10u32 {
        assert!(derive_params(d, &rat(1, d as i64 + 1)).is_err());
        assert!(derive_params(d, &rat(1, 2)).is_err());
    }
}
