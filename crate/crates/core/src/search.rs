//! Drift-bound searches.
//!
//! * [`rigorous_bound`]: walks the Stern–Brocot tree, filtering candidates by
//!   the numeric maximum [`m_value`] and certifying the first rational whose
//!   certified supremum lands in `(window, 1)`; this is the simplest rational
//!   in that band.
//! * [`approx_bound`]: the fast grid procedure (check `f < 1` on a `λ` grid,
//!   lower `p` in fixed steps until the check fails).
//! * [`q_crit`]: bisection for the threshold `inf {p : M < 1}`.

use log::{debug, info, warn};
use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::certify::{certify_params, Certificate, CertifyConfig, Verdict};
use crate::error::{Error, Result};
use crate::genfun::f_enclosure;
use crate::interval::Dyadic;
use crate::numeric::{maximize_g, NumParams};
use crate::params::{derive_params, in_drift_range, DriftParams};
use crate::scalar::Real;
use crate::serde_util::{rational_str, rational_to_string};
use crate::Rational;

/// Default acceptance window on the certified supremum.
pub const DEFAULT_WINDOW: f64 = 0.9994;

/// Published bounds `(d, a, b)` for `2 <= d <= 13`.
pub const PUBLISHED_BOUNDS: [(u32, i64, i64); 12] = [
    (2, 55, 159),
    (3, 42, 145),
    (4, 40, 153),
    (5, 23, 94),
    (6, 46, 197),
    (7, 23, 102),
    (8, 38, 173),
    (9, 20, 93),
    (10, 15, 71),
    (11, 5, 24),
    (12, 7, 34),
    (13, 11, 54),
];

fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Published bound for arity `d`, if tabulated.
pub fn published_bound(d: u32) -> Option<Rational> {
    PUBLISHED_BOUNDS.iter().find(|&&(m, _, _)| m == d).map(|&(_, a, b)| rat(a, b))
}

/// Numeric `M^{d,p} = max_{(0,1]} g` (not certified; accuracy about `1e-8`).
pub fn m_value(params: &DriftParams) -> f64 {
    m_value_as::<f64>(params)
}

/// [`m_value`] computed in the scalar type `T`.
pub fn m_value_as<T: Real>(params: &DriftParams) -> T {
    maximize_g(&NumParams::<T>::from_exact(params)).value
}

/// [`m_value`] for a real drift; `None` outside `(1/(d+1), 1/2)`.
pub fn m_value_real(d: u32, p: f64) -> Option<f64> {
    NumParams::new(d, p).map(|np| maximize_g(&np).value)
}

fn exact(v: f64) -> Rational {
    Dyadic::from_f64(v).expect("finite").to_rational()
}

/// Stern–Brocot path toward `target` with denominators up to
/// `max_denominator`: nodes at or above `target` from the largest down,
/// then nodes below it from the smallest up.
pub fn rational_candidates(target: f64, max_denominator: u64) -> Vec<Rational> {
    let t = exact(target);
    let max_den = BigInt::from(max_denominator);
    let (mut ln, mut ld) = (BigInt::zero(), BigInt::one());
    let (mut rn, mut rd) = (BigInt::one(), BigInt::one());
    let mut above = Vec::new();
    let mut below = Vec::new();
    loop {
        let (mn, md) = (&ln + &rn, &ld + &rd);
        if md > max_den {
            break;
        }
        let m = Rational::new(mn.clone(), md.clone());
        if m >= t {
            above.push(m.clone());
        } else {
            below.push(m.clone());
        }
        if m == t {
            break;
        }
        if m < t {
            (ln, ld) = (mn, md);
        } else {
            (rn, rd) = (mn, md);
        }
    }
    above.sort_by(|a, b| b.cmp(a));
    below.sort();
    above.extend(below);
    above
}

/// One step of the bound search.
#[derive(Clone, Debug, Serialize)]
pub struct TraceEntry {
    #[serde(with = "rational_str")]
    pub p: Rational,
    pub m_value: Option<f64>,
    pub verdict: Option<Verdict>,
    pub sup_upper_bound: Option<f64>,
    pub sup_lower_bound: Option<f64>,
    /// `"left"` (try smaller p), `"right"` (try larger p) or `"accept"`.
    pub action: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundResult {
    pub d: u32,
    #[serde(with = "rational_str")]
    pub p: Rational,
    pub certificate: Certificate,
    pub search_trace: Vec<TraceEntry>,
}

impl BoundResult {
    /// Re-derives `g` and re-runs the certification.
    pub fn recheck(&self) -> Result<bool> {
        Ok(self.certificate.verdict == Verdict::CertifiedBelowOne
            && self.certificate.p == rational_to_string(&self.p)
            && self.certificate.recheck()?)
    }
}

const MAX_SEARCH_DEPTH: usize = 400;

/// Simplest rational `p` (in the Stern–Brocot order) for which
/// `window < sup g^{d,p} < 1` is certified.
pub fn rigorous_bound(d: u32, cfg: &CertifyConfig, window: f64) -> Result<BoundResult> {
    if d < 2 {
        return Err(Error::InvalidArity(d, 2));
    }
    if !(window > 0.0 && window < 1.0) {
        return Err(Error::InvalidConfig(format!("window must lie in (0, 1), got {window}")));
    }
    cfg.validate()?;
    let half = rat(1, 2);
    let floor = rat(1, d as i64 + 1);
    let (mut ln, mut ld) = (BigInt::zero(), BigInt::one());
    let (mut rn, mut rd) = (BigInt::one(), BigInt::one());
    let mut trace = Vec::new();
    for _ in 0..MAX_SEARCH_DEPTH {
        let (mn, md) = (&ln + &rn, &ld + &rd);
        let p = Rational::new(mn.clone(), md.clone());
        let mut entry = TraceEntry {
            p: p.clone(),
            m_value: None,
            verdict: None,
            sup_upper_bound: None,
            sup_lower_bound: None,
            action: "left",
        };
        let go_left = if p >= half {
            true
        } else if p <= floor {
            false
        } else {
            let params = derive_params(d, &p)?;
            let m = m_value(&params);
            entry.m_value = Some(m);
            if m >= 1.0 {
                false
            } else if m <= window {
                true
            } else {
                let cert = certify_params(&params, cfg)?;
                entry.verdict = Some(cert.verdict);
                entry.sup_upper_bound = Some(cert.sup_upper_f64());
                entry.sup_lower_bound = Some(cert.sup_lower_f64());
                debug!("d={d} p={} verdict {} sup <= {}", rational_to_string(&p), cert.verdict, cert.sup_upper_f64());
                match cert.verdict {
                    Verdict::Inconclusive => {
                        warn!("certification inconclusive at p = {}", rational_to_string(&p));
                        trace.push(entry);
                        return Err(Error::SearchExhausted(d));
                    }
                    Verdict::FailedExceedsOne => false,
                    Verdict::CertifiedBelowOne => {
                        if cert.sup_lower_f64() > window {
                            entry.action = "accept";
                            trace.push(entry);
                            info!("d={d}: certified p = {}", rational_to_string(&p));
                            return Ok(BoundResult { d, p, certificate: cert, search_trace: trace });
                        }
                        // at or below the window (possibly straddling it): p is too large
                        true
                    }
                }
            }
        };
        entry.action = if go_left { "left" } else { "right" };
        trace.push(entry);
        if go_left {
            (rn, rd) = (mn, md);
        } else {
            (ln, ld) = (mn, md);
        }
    }
    Err(Error::SearchExhausted(d))
}

/// Settings of the approximate grid procedure.
#[derive(Clone, Debug, Serialize)]
pub struct ApproxConfig {
    /// Spacing of the `λ` grid.
    #[serde(with = "rational_str")]
    pub lambda_step: Rational,
    /// The grid is `{0, step, ..., span - step}` (one chunk).
    #[serde(with = "rational_str")]
    pub lambda_span: Rational,
    /// Amount `p` is lowered per step.
    #[serde(with = "rational_str")]
    pub p_step: Rational,
    /// Append further chunks while the grid maximum sits on the last point.
    pub extend_grid: bool,
    /// No chunk starts beyond this `λ`.
    pub max_lambda: f64,
}

impl Default for ApproxConfig {
    fn default() -> Self {
        ApproxConfig {
            lambda_step: rat(1, 100),
            lambda_span: rat(1, 1),
            p_step: rat(1, 10_000),
            extend_grid: true,
            max_lambda: 20.0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ApproxResult {
    pub d: u32,
    /// Last drift passing the grid check.
    #[serde(with = "rational_str")]
    pub p: Rational,
    pub p_f64: f64,
    #[serde(with = "rational_str")]
    pub start: Rational,
    pub steps: u64,
}

const APPROX_MAX_PRECISION: u32 = 2048;

/// `f(λ) < 1` on one point, deciding with intervals and raising precision
/// while the enclosure straddles one. Returns the decision and a midpoint.
fn below_one_at(params: &DriftParams, lambda: &Rational, base_prec: u32) -> (bool, f64) {
    let mut prec = base_prec;
    loop {
        let iv = f_enclosure(params, lambda, prec);
        let one = Dyadic::one();
        if *iv.hi() < one {
            return (true, iv.mid_f64());
        }
        if *iv.lo() >= one || prec >= APPROX_MAX_PRECISION {
            return (false, iv.mid_f64());
        }
        prec *= 2;
    }
}

/// The grid check: `f < 1` at every grid point.
pub fn grid_passes(params: &DriftParams, cfg: &ApproxConfig) -> bool {
    let prec = 64 + 4 * params.d;
    let per_chunk = (&cfg.lambda_span / &cfg.lambda_step).to_integer().to_u64().unwrap_or(100).max(1);
    let mut chunk = 0u64;
    loop {
        let mut best = (f64::NEG_INFINITY, 0u64);
        for i in chunk * per_chunk..(chunk + 1) * per_chunk {
            let lambda = &cfg.lambda_step * Rational::from_integer(BigInt::from(i));
            let (ok, v) = below_one_at(params, &lambda, prec);
            if !ok {
                return false;
            }
            if v > best.0 {
                best = (v, i);
            }
        }
        let last = (chunk + 1) * per_chunk - 1;
        let next_start = (&cfg.lambda_step * Rational::from_integer(BigInt::from(last + 1))).to_f64().unwrap_or(f64::MAX);
        if !(cfg.extend_grid && best.1 == last && next_start <= cfg.max_lambda) {
            return true;
        }
        chunk += 1;
    }
}

/// Starting drift: the published bound for the nearest smaller arity,
/// else `0.45`.
pub fn approx_start(d: u32) -> Rational {
    let nearest = (2..d).rev().find_map(published_bound);
    nearest.unwrap_or_else(|| rat(45, 100))
}

/// Approximate bound for arity `d` with default settings.
pub fn approx_bound(d: u32) -> Result<f64> {
    Ok(approx_bound_from(d, &approx_start(d), &ApproxConfig::default())?.p_f64)
}

/// Lowers `p` from `start` in steps of `cfg.p_step` while the grid check
/// passes; returns the last passing drift.
pub fn approx_bound_from(d: u32, start: &Rational, cfg: &ApproxConfig) -> Result<ApproxResult> {
    if d < 2 {
        return Err(Error::InvalidArity(d, 2));
    }
    let mut start = start.clone();
    let passes = |p: &Rational| in_drift_range(d, p) && grid_passes(&derive_params(d, p).expect("in range"), cfg);
    if !passes(&start) {
        warn!("start p = {} fails for d = {d}; restarting from 0.45", rational_to_string(&start));
        start = rat(45, 100);
        if !passes(&start) {
            return Err(Error::SearchExhausted(d));
        }
    }
    let mut p = start.clone();
    let mut steps = 0u64;
    loop {
        let next = &p - &cfg.p_step;
        if !passes(&next) {
            break;
        }
        p = next;
        steps += 1;
    }
    Ok(ApproxResult { d, p_f64: p.to_f64().unwrap_or(f64::NAN), p, start, steps })
}

/// One point of the bound-versus-arity figure.
#[derive(Clone, Debug, Serialize)]
pub struct FigureRow {
    pub m: u32,
    pub bound: f64,
    /// `"rigorous"` or `"approx"`.
    pub mode: &'static str,
}

/// Options for [`figure_rows`].
#[derive(Clone, Debug)]
pub struct FigureConfig {
    /// Arities up to this use the published bound (when certified).
    pub rigorous_max: u32,
    /// Certify the published bounds before using them.
    pub certify: bool,
    pub certify_config: CertifyConfig,
    pub approx: ApproxConfig,
}

impl Default for FigureConfig {
    fn default() -> Self {
        FigureConfig {
            rigorous_max: 13,
            certify: true,
            certify_config: CertifyConfig::default(),
            approx: ApproxConfig::default(),
        }
    }
}

/// Bounds for `dmin..=dmax`: certified published values where available,
/// approximate values beyond, each approximate descent starting from the
/// previous row's drift.
pub fn figure_rows(dmin: u32, dmax: u32, cfg: &FigureConfig) -> Result<Vec<FigureRow>> {
    if dmin < 2 || dmax < dmin {
        return Err(Error::InvalidConfig(format!("need 2 <= dmin <= dmax, got {dmin}..{dmax}")));
    }
    let mut rows = Vec::new();
    let mut previous: Option<Rational> = None;
    for d in dmin..=dmax {
        let published = published_bound(d).filter(|_| d <= cfg.rigorous_max);
        let certified = match &published {
            Some(p) if cfg.certify => {
                let cert = certify_params(&derive_params(d, p)?, &cfg.certify_config)?;
                cert.verdict == Verdict::CertifiedBelowOne
            }
            Some(_) => true,
            None => false,
        };
        let (p, mode) = match published {
            Some(p) if certified => (p, "rigorous"),
            _ => {
                let start = previous.clone().unwrap_or_else(|| approx_start(d));
                (approx_bound_from(d, &start, &cfg.approx)?.p, "approx")
            }
        };
        info!("figure: m = {d}, bound = {}, {mode}", rational_to_string(&p));
        rows.push(FigureRow { m: d, bound: p.to_f64().unwrap_or(f64::NAN), mode });
        previous = Some(p);
    }
    Ok(rows)
}

/// Bracket for the threshold `q_d`, found by numeric bisection.
#[derive(Clone, Debug, Serialize)]
pub struct QCritResult {
    pub d: u32,
    pub lower: f64,
    pub upper: f64,
    pub iterations: u32,
    /// Always `"NUMERIC"`: the predicate is the non-certified `m_value`.
    pub label: &'static str,
}

/// Bisection on `p` with predicate `M^{d,p} < 1`.
pub fn q_crit(d: u32, tol: f64) -> Result<QCritResult> {
    if d < 2 {
        return Err(Error::InvalidArity(d, 2));
    }
    if !(tol >= 1e-6) {
        return Err(Error::InvalidConfig(format!("tolerance must be >= 1e-6, got {tol}")));
    }
    let floor = 1.0 / (d as f64 + 1.0);
    let below = |p: f64| m_value_real(d, p).is_some_and(|m| m < 1.0);
    let mut lo = floor + 1e-5;
    let mut hi = 0.5 - 1e-9;
    if below(lo) {
        return Err(Error::InvalidConfig(format!("M < 1 already at p = {lo}; no bracket for d = {d}")));
    }
    if !below(hi) {
        return Err(Error::InvalidConfig(format!("M >= 1 at p = {hi}; no bracket for d = {d}")));
    }
    let mut iterations = 0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if below(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
    }
    Ok(QCritResult { d, lower: lo, upper: hi, iterations, label: "NUMERIC" })
}
