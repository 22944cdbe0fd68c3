//! Reference values checked against independent computations.

use frogbound::certify::{certify_params, verify_unique_max, CertifyConfig, Verdict};
use frogbound::genfun::{build_g, f_value};
use frogbound::numeric::{pmf, NumParams};
use frogbound::search::{
    m_value, published_bound, q_crit, rational_candidates, rigorous_bound, DEFAULT_WINDOW, PUBLISHED_BOUNDS,
};
use frogbound::u_dist::{u_cdf_dominates, u_pmf};
use frogbound::{derive_params, Rational};
use num_bigint::BigInt;

fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Distribution of `U` by enumerating every configuration of the star
/// process's activation edges: the hub reaches each of `v_2..v_d`
/// independently with probability `h`, each active leaf reaches each other
/// leaf with probability `e`, and `U` counts leaves `v_2..v_d` reachable from
/// `v_1` together with the hub's hits.
fn star_enumeration(d: usize, p: f64, lambda: f64) -> Vec<f64> {
    let df = d as f64;
    let p_star = p * (df - 1.0) / (df - (df + 1.0) * p);
    let p_hat = p / (1.0 - p);
    let h = 1.0 - (-(1.0 - p_star) / df).exp();
    let e = 1.0 - (-(1.0 - p_hat) * lambda / (df - 1.0)).exp();
    let hub_bits = d - 1;
    let leaf_edges: Vec<(usize, usize)> =
        (0..d).flat_map(|i| (1..d).filter(move |&j| j != i).map(move |j| (i, j))).collect();
    let bits = hub_bits + leaf_edges.len();
    let mut out = vec![0.0; d];
    for mask in 0u64..(1 << bits) {
        let on = |k: usize| mask >> k & 1 == 1;
        let mut prob = 1.0;
        for k in 0..bits {
            let q = if k < hub_bits { h } else { e };
            prob *= if on(k) { q } else { 1.0 - q };
        }
        let mut reached = vec![false; d];
        reached[0] = true;
        for j in 1..d {
            reached[j] = on(j - 1);
        }
        loop {
            let mut grew = false;
            for (k, &(i, j)) in leaf_edges.iter().enumerate() {
                if reached[i] && !reached[j] && on(hub_bits + k) {
                    reached[j] = true;
                    grew = true;
                }
            }
            if !grew {
                break;
            }
        }
        out[reached[1..].iter().filter(|&&r| r).count()] += prob;
    }
    out
}

#[test]
fn u_pmf_matches_star_enumeration() {
    for (d, n, m, lambda) in [(2, 2, 5, 1.0), (3, 3, 10, 1.0), (3, 2, 5, 0.0), (4, 1, 4, 1.5), (4, 3, 10, 4.0)] {
        let exact = u_pmf(&derive_params(d, &rat(n, m)).unwrap(), lambda).unwrap();
        let brute = star_enumeration(d as usize, n as f64 / m as f64, lambda);
        for (a, b) in exact.probs.iter().zip(&brute) {
            assert!((a - b).abs() < 1e-12, "d={d} p={n}/{m} lambda={lambda}: {:?} vs {brute:?}", exact.probs);
        }
    }
}

#[test]
fn numeric_pmf_matches_star_enumeration_in_f32() {
    let np = NumParams::<f32>::new(3, 0.3).unwrap();
    let brute = star_enumeration(3, 0.3, 2.0);
    for (a, b) in pmf(&np, 2.0f32).iter().zip(&brute) {
        assert!((*a as f64 - b).abs() < 1e-5);
    }
}

/// `E[exp(λ - p* - p̂(1+U)λ)]` over the enumerated pmf.
fn f_from_enumeration(d: usize, p: f64, lambda: f64) -> f64 {
    let df = d as f64;
    let p_star = p * (df - 1.0) / (df - (df + 1.0) * p);
    let p_hat = p / (1.0 - p);
    let probs = star_enumeration(d, p, lambda);
    (-p_star).exp() * probs.iter().enumerate().map(|(u, q)| q * ((1.0 - p_hat * (1.0 + u as f64)) * lambda).exp()).sum::<f64>()
}

#[test]
fn recurrence_functional_matches_enumeration() {
    for (d, n, m) in [(2, 2, 5), (3, 3, 10), (4, 1, 4)] {
        let params = derive_params(d, &rat(n, m)).unwrap();
        for lambda in [0.0, 0.3, 1.0, 2.5] {
            let ours = f_value(&params, lambda);
            let brute = f_from_enumeration(d as usize, n as f64 / m as f64, lambda);
            assert!((ours - brute).abs() < 1e-11 * brute.max(1.0), "d={d} lambda={lambda}: {ours} vs {brute}");
        }
    }
}

#[test]
fn quadratic_case_closed_form() {
    // d = 2, p = 2/5: g is a quadratic with its vertex at y = e^{1/4}/2
    let sup = (-0.5f64).exp() * ((-0.25f64).exp() + 0.25f64.exp() / 4.0);
    let g = build_g(&derive_params(2, &rat(2, 5)).unwrap()).unwrap();
    let y = 0.25f64.exp() / 2.0;
    assert!((g.eval_f64(y) - sup).abs() < 1e-15);
    assert!((m_value(&derive_params(2, &rat(2, 5)).unwrap()) - 0.6670675).abs() < 1e-6);
}

#[test]
fn published_table_is_in_the_window() {
    for &(d, a, b) in PUBLISHED_BOUNDS.iter() {
        let m = m_value(&derive_params(d, &rat(a, b)).unwrap());
        assert!(m > DEFAULT_WINDOW && m < 1.0, "d={d}: {m}");
    }
}

#[test]
fn published_bounds_decrease() {
    let ps: Vec<Rational> = (2..=13).map(|d| published_bound(d).unwrap()).collect();
    assert!(ps.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn candidates_reach_table_entries() {
    assert!(rational_candidates(0.3459, 200).contains(&rat(55, 159)));
    assert!(rational_candidates(0.2037, 100).contains(&rat(11, 54)));
    assert_eq!(rational_candidates(0.5, 10)[0], rat(1, 2));
}

#[test]
fn bound_search_d4_and_recheck() {
    let res = rigorous_bound(4, &CertifyConfig::default(), DEFAULT_WINDOW).unwrap();
    assert_eq!(res.p, rat(40, 153));
    assert!(res.recheck().unwrap());
    assert_eq!(res.search_trace.last().unwrap().action, "accept");
}

#[test]
fn window_from_table_certifies_with_unique_max() {
    let cfg = CertifyConfig { check_unique_max: true, ..CertifyConfig::default() };
    let cert = certify_params(&derive_params(3, &rat(42, 145)).unwrap(), &cfg).unwrap();
    assert_eq!(cert.verdict, Verdict::CertifiedBelowOne);
    assert!(cert.unique_max_verified);
    assert!(cert.sup_lower_f64() > DEFAULT_WINDOW);
    let g = build_g(&derive_params(2, &rat(55, 159)).unwrap()).unwrap();
    assert!(verify_unique_max(&g, &CertifyConfig::default()).unwrap());
}

#[test]
fn q_crit_examples() {
    let q2 = q_crit(2, 1e-4).unwrap();
    assert!(q2.lower > 1.0 / 3.0 && q2.upper <= 0.3460 && q2.lower < 55.0 / 159.0);
    // a 1e-4 bracket may straddle 55/159; a tight one sits below it
    let fine = q_crit(2, 1e-6).unwrap();
    assert!(fine.upper <= 55.0 / 159.0);
    let q3 = q_crit(3, 1e-4).unwrap();
    assert!(q3.upper < q2.lower);
    let coarse = q_crit(2, 0.1).unwrap();
    assert!(coarse.lower > 1.0 / 3.0 && coarse.upper < 0.5 && coarse.upper - coarse.lower <= 0.1);
}

#[test]
fn dominance_examples() {
    for (d, n, m, lambda) in [(2, 2, 5, 1.0), (3, 3, 10, 2.0), (5, 1, 4, 5.0)] {
        let pd = derive_params(d, &rat(n, m)).unwrap();
        let pd1 = derive_params(d + 1, &rat(n, m)).unwrap();
        assert!(u_cdf_dominates(&pd, &pd1, lambda).unwrap());
    }
}
