//! End-to-end acceptance checks. Each test prints one `PASS`/`FAIL` line.
//!
//! Run with `cargo test --release -p frogbound --test acceptance -- --nocapture`.

use std::time::Instant;

use frogbound::certify::{certify_params, eval_interval, CertifyConfig, Verdict};
use frogbound::genfun::build_g;
use frogbound::search::{
    approx_bound, figure_rows, m_value, published_bound, q_crit, rigorous_bound, FigureConfig, DEFAULT_WINDOW,
};
use frogbound::sim::{empirical_u_pmf, simulate_fm, simulate_sfm, tv_distance, InitMeasure, SimConfig, SimSummary, Walk};
use frogbound::u_dist::{u_cdf_dominates, u_pmf};
use frogbound::{derive_params, Interval, Rational};
use num_bigint::BigInt;
use num_traits::ToPrimitive;

fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

fn report(n: u32, name: &str, ok: bool, detail: &str, start: Instant) {
    let tag = if ok { "PASS" } else { "FAIL" };
    println!("criterion {n} [{name}]: {tag} ({detail}; {:.1}s)", start.elapsed().as_secs_f64());
}

fn float_in_range(d: u32, p: f64) -> bool {
    p > 1.0 / (d as f64 + 1.0) && p < 0.5
}

fn exact_f64(p: f64) -> Rational {
    Rational::from_float(p).unwrap()
}

#[test]
fn criterion_1_table_reproduction() {
    let start = Instant::now();
    let cfg = CertifyConfig::default();
    let mut failures = Vec::new();
    for (d, a, b) in [(2, 55, 159), (3, 42, 145), (4, 40, 153), (5, 23, 94)] {
        let t = Instant::now();
        match rigorous_bound(d, &cfg, DEFAULT_WINDOW) {
            Ok(res) => {
                let c = &res.certificate;
                let ok = res.p == rat(a, b)
                    && c.verdict == Verdict::CertifiedBelowOne
                    && c.sup_lower_f64() > DEFAULT_WINDOW
                    && c.sup_upper_f64() < 1.0;
                println!(
                    "  bound d={d}: {} sup in [{:.7}, {:.7}] ({:.1}s)",
                    res.p,
                    c.sup_lower_f64(),
                    c.sup_upper_f64(),
                    t.elapsed().as_secs_f64()
                );
                if !ok {
                    failures.push(format!("d={d} got {}", res.p));
                }
            }
            Err(e) => failures.push(format!("d={d}: {e}")),
        }
    }
    for d in 6..=13 {
        let t = Instant::now();
        let p = published_bound(d).unwrap();
        let cert = certify_params(&derive_params(d, &p).unwrap(), &cfg).unwrap();
        println!(
            "  certify d={d} p={p}: {} sup <= {:.7} ({:.1}s)",
            cert.verdict,
            cert.sup_upper_f64(),
            t.elapsed().as_secs_f64()
        );
        if cert.verdict != Verdict::CertifiedBelowOne {
            failures.push(format!("d={d} {}", cert.verdict));
        }
    }
    let ok = failures.is_empty();
    let detail = if ok { "all certified".to_string() } else { failures.join(", ") };
    report(1, "table reproduction", ok, &detail, start);
    assert!(ok, "{failures:?}");
}

#[test]
fn criterion_2_hand_closed_form() {
    let start = Instant::now();
    let cert = certify_params(&derive_params(2, &rat(2, 5)).unwrap(), &CertifyConfig::default()).unwrap();
    // g is a quadratic in y here; its vertex gives the closed form
    let sup = (-0.5f64).exp() * ((-0.25f64).exp() + 0.25f64.exp() / 4.0);
    let argmax = 0.25f64.exp() / 2.0;
    let ok = cert.verdict == Verdict::CertifiedBelowOne
        && (cert.sup_upper_f64() - 0.667067).abs() <= 1e-5
        && (cert.sup_lower_f64() - 0.667067).abs() <= 1e-5
        && (cert.argmax_f64() - argmax).abs() <= 1e-4
        && cert.sup_upper_f64() >= sup;
    let detail = format!("sup in [{:.9}, {:.9}], argmax {:.7}", cert.sup_lower_f64(), cert.sup_upper_f64(), cert.argmax_f64());
    report(2, "hand closed form", ok, &detail, start);
    assert!(ok);
}

#[test]
fn criterion_3_oracle_equivalence() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for (seed, (d, n, m, lambda)) in [(2u32, 2i64, 5i64, 1.0), (3, 3, 10, 1.0), (4, 1, 4, 1.5)].into_iter().enumerate() {
        let params = derive_params(d, &rat(n, m)).unwrap();
        let exact = u_pmf(&params, lambda).unwrap();
        let empirical = empirical_u_pmf(&Walk::from_params(&params), lambda, 100_000, 1000 + seed as u64);
        let tv = tv_distance(&exact.probs, &empirical);
        println!("  d={d} p={n}/{m} lambda={lambda}: TV = {tv:.5}");
        worst = worst.max(tv);
    }
    let ok = worst < 0.01;
    report(3, "oracle equivalence", ok, &format!("max TV {worst:.5}"), start);
    assert!(ok);
}

#[test]
fn criterion_4_exact_dominance() {
    let start = Instant::now();
    let mut checked = 0;
    let mut failures = Vec::new();
    for d in 2..=8u32 {
        for p in [0.21, 0.25, 0.3, 0.35, 0.4] {
            if !float_in_range(d, p) {
                continue;
            }
            let r = exact_f64(p);
            let pd = derive_params(d, &r).unwrap();
            let pd1 = derive_params(d + 1, &r).unwrap();
            for lambda in [0.5, 1.0, 2.0, 5.0] {
                checked += 1;
                if !u_cdf_dominates(&pd, &pd1, lambda).unwrap() {
                    failures.push(format!("d={d} p={p} lambda={lambda}"));
                }
            }
        }
    }
    let ok = failures.is_empty();
    report(4, "exact dominance", ok, &format!("{checked} grid points, failures {failures:?}"), start);
    assert!(ok);
}

#[test]
fn criterion_5_pointwise_monotonicity() {
    let start = Instant::now();
    let p = rat(1, 4);
    // p = 1/4 is the excluded boundary 1/(d+1) at d = 3, so the chain starts at d = 4
    let ds: Vec<u32> = (3..=9).filter(|&d| float_in_range(d, 0.25)).collect();
    let ms: Vec<f64> = ds.iter().map(|&d| m_value(&derive_params(d, &p).unwrap())).collect();
    let mut ok = ms.windows(2).all(|w| w[1] < w[0]);
    let prec = 128;
    let mut pointwise_failures = Vec::new();
    for w in ds.windows(2) {
        let g0 = build_g(&derive_params(w[0], &p).unwrap()).unwrap();
        let g1 = build_g(&derive_params(w[1], &p).unwrap()).unwrap();
        for k in 1..=10 {
            let y = Interval::from_rational(&rat(k, 10), prec);
            let (a, b) = (eval_interval(&g0, &y, prec), eval_interval(&g1, &y, prec));
            if !(b.hi() < a.lo()) {
                pointwise_failures.push(format!("d={} y=0.{k}", w[1]));
            }
        }
    }
    ok &= pointwise_failures.is_empty();
    let detail = format!("d={ds:?}, M={:?}, pointwise failures {pointwise_failures:?}", ms.iter().map(|m| format!("{m:.6}")).collect::<Vec<_>>());
    report(5, "pointwise monotonicity", ok, &detail, start);
    assert!(ok);
}

#[test]
fn criterion_6_q_chain() {
    let start = Instant::now();
    let qs: Vec<_> = (2..=9).map(|d| q_crit(d, 1e-4).unwrap()).collect();
    for q in &qs {
        println!("  q_{} in [{:.6}, {:.6}]", q.d, q.lower, q.upper);
    }
    let chain = qs.windows(2).all(|w| w[1].upper < w[0].lower);
    let q2 = &qs[0];
    let ends = q2.upper <= 55.0 / 159.0 + 1e-4 && q2.lower > 1.0 / 3.0;
    let ok = chain && ends;
    report(6, "q chain", ok, &format!("chain {chain}, q_2 bracket ok {ends}"), start);
    assert!(ok);
}

#[test]
fn criterion_7_approximate_mode() {
    let start = Instant::now();
    let mut ok = true;
    for d in [2u32, 5, 9, 11, 13] {
        let t = Instant::now();
        let approx = approx_bound(d).unwrap();
        let table = published_bound(d).unwrap().to_f64().unwrap();
        let close = (approx - table).abs() <= 0.002;
        println!("  approx d={d}: {approx:.4} vs {table:.4} ({:.1}s)", t.elapsed().as_secs_f64());
        ok &= close;
    }
    let rows = figure_rows(2, 40, &FigureConfig::default()).unwrap();
    let decreasing = rows.windows(2).all(|w| w[1].bound < w[0].bound);
    let above = rows.iter().all(|r| r.bound > 1.0 / 6.0);
    let rigorous = rows.iter().filter(|r| r.mode == "rigorous").count();
    println!("  figure: {} rows, last {:.4}, {rigorous} rigorous", rows.len(), rows.last().unwrap().bound);
    ok &= decreasing && above && rigorous == 12;
    report(7, "approximate mode", ok, &format!("figure decreasing {decreasing}, above 1/6 {above}"), start);
    assert!(ok);
}

/// One-sided check that `a.mean <= b.mean` up to twice the combined 95%
/// half-width.
fn not_above(a: &SimSummary, b: &SimSummary) -> bool {
    let tol = 2.0 * (a.ci_half_width().powi(2) + b.ci_half_width().powi(2)).sqrt();
    a.mean <= b.mean + tol
}

/// One-sided check that `a.mean > b.mean` at 95% confidence.
fn significantly_above(a: &SimSummary, b: &SimSummary) -> bool {
    let se = (a.variance / a.root_visits.len() as f64 + b.variance / b.root_visits.len() as f64).sqrt();
    a.mean - b.mean > 1.645 * se
}

#[test]
fn criterion_8_simulation() {
    let start = Instant::now();
    let reps = 200;
    let cfg = |depth, seed| SimConfig { depth, max_steps: 50_000_000, seed, replications: reps };
    let one = InitMeasure::OnePerSite;
    let mut checks = Vec::new();

    // self-similar model is stochastically increasing in d
    for (d, p) in [(2u32, 0.4), (3, 0.3), (4, 0.25)] {
        let c = cfg(10, 41);
        let a = simulate_sfm(&Walk::new(d, p).unwrap(), one, &c).unwrap();
        let b = simulate_sfm(&Walk::new(d + 1, p).unwrap(), one, &c).unwrap();
        println!("  sfm d={d} vs d={} at p={p}: {:.3} vs {:.3}", d + 1, a.mean, b.mean);
        checks.push((format!("sfm d={d} <= d={}", d + 1), not_above(&a, &b)));
    }

    // self-similar model is dominated by the frog model
    for (d, p) in [(2u32, 0.4), (3, 0.3)] {
        let c = cfg(10, 43);
        let s = simulate_sfm(&Walk::new(d, p).unwrap(), one, &c).unwrap();
        let f = simulate_fm(&Walk::new(d, p).unwrap(), one, &c).unwrap();
        println!("  d={d} p={p}: sfm {:.3} vs fm {:.3}", s.mean, f.mean);
        checks.push((format!("sfm <= fm d={d}"), not_above(&s, &f)));
    }

    // p = 0.4 is above the binary-tree threshold 1/3, p = 0.2 is below
    let sfm_hi = simulate_sfm(&Walk::new(2, 0.4).unwrap(), one, &cfg(16, 47)).unwrap();
    let sfm_lo = simulate_sfm(&Walk::new(2, 0.2).unwrap(), one, &cfg(16, 47)).unwrap();
    println!("  sfm depth 16: p=0.4 {:.3}, p=0.2 {:.3}", sfm_hi.mean, sfm_lo.mean);
    checks.push(("sfm p=0.4 > p=0.2".into(), significantly_above(&sfm_hi, &sfm_lo)));

    let fm = |p, depth| simulate_fm(&Walk::new(2, p).unwrap(), one, &cfg(depth, 53)).unwrap();
    let (hi_12, hi_20) = (fm(0.4, 12), fm(0.4, 20));
    let (lo_12, lo_20) = (fm(0.2, 12), fm(0.2, 20));
    println!(
        "  fm depth 12/20: p=0.4 {:.2}/{:.2}, p=0.2 {:.3}/{:.3}",
        hi_12.mean, hi_20.mean, lo_12.mean, lo_20.mean
    );
    checks.push(("fm p=0.4 grows with depth".into(), significantly_above(&hi_20, &hi_12)));
    checks.push(("fm p=0.2 plateaus".into(), not_above(&lo_20, &lo_12) && not_above(&lo_12, &lo_20)));
    checks.push((
        "fm growth larger at p=0.4".into(),
        hi_20.mean - hi_12.mean > lo_20.mean - lo_12.mean,
    ));

    // reproducible from the seed
    let again = simulate_sfm(&Walk::new(2, 0.4).unwrap(), one, &cfg(16, 47)).unwrap();
    checks.push(("seeded reproducibility".into(), again == sfm_hi));

    let failed: Vec<_> = checks.iter().filter(|c| !c.1).map(|c| c.0.clone()).collect();
    let ok = failed.is_empty();
    report(8, "simulation", ok, &format!("{} checks, failed {failed:?}", checks.len()), start);
    assert!(ok);
}
