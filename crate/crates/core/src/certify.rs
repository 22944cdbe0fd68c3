//! Rigorous verification of `sup_{y ∈ [0,1]} g(y) < 1`.
//!
//! Best-first interval branch-and-bound over `[0, 1]`. Each box is enclosed
//! by second-order jets (value, first and second derivative over the box);
//! the box bound is the tightest of the naive enclosure, a second-order
//! Taylor form about the midpoint, and the endpoint value when `g'` has a
//! fixed sign. Boxes are processed sequentially in a total order, so a
//! certificate is a deterministic function of `(g, config)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genfun::{build_g, g_derivative, horner, ExpCache, ExpPoly, FactoredG};
use crate::interval::{Dyadic, Interval, Round};
use crate::jet::Jet;
use crate::params::DriftParams;
use crate::serde_util::rational_to_string;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CertifyConfig {
    pub initial_precision_bits: u32,
    pub max_precision_bits: u32,
    /// Boxes narrower than this are not split; precision is raised instead.
    pub min_box_width: f64,
    /// Margin `1 - sup` below which a certificate is logged as near-critical.
    pub target_gap: f64,
    /// Stop once the certified upper bound is within this of the best
    /// sampled value.
    pub sup_tolerance: f64,
    pub max_boxes: u64,
    /// Also run [`verify_unique_max`] and record the outcome.
    pub check_unique_max: bool,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        CertifyConfig {
            initial_precision_bits: 128,
            max_precision_bits: 4096,
            min_box_width: 2f64.powi(-60),
            target_gap: 1e-6,
            sup_tolerance: 1e-9,
            max_boxes: 2_000_000,
            check_unique_max: false,
        }
    }
}

impl CertifyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.initial_precision_bits < 16 || self.initial_precision_bits > self.max_precision_bits {
            return Err(Error::InvalidConfig("need 16 <= initial_precision_bits <= max_precision_bits".into()));
        }
        if !(self.min_box_width > 0.0) || !(self.sup_tolerance > 0.0) || self.max_boxes == 0 {
            return Err(Error::InvalidConfig("min_box_width, sup_tolerance and max_boxes must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    CertifiedBelowOne,
    FailedExceedsOne,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::CertifiedBelowOne => "CERTIFIED_BELOW_ONE",
            Verdict::FailedExceedsOne => "FAILED_EXCEEDS_ONE",
            Verdict::Inconclusive => "INCONCLUSIVE",
        })
    }
}

/// Audit record of a branch-and-bound run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub d: u32,
    pub a: String,
    pub b: String,
    pub p: String,
    pub verdict: Verdict,
    /// Rigorous upper bound on `sup g` over `[0, 1]`.
    pub sup_upper_bound: Dyadic,
    /// Rounded-down value of `g` at `argmax_estimate`.
    pub sup_lower_bound: Dyadic,
    pub argmax_estimate: Dyadic,
    pub precision_bits: u32,
    pub boxes_processed: u64,
    /// True only when the unique-maximum check ran and succeeded.
    pub unique_max_verified: bool,
    pub config: CertifyConfig,
}

impl Certificate {
    pub fn sup_upper_f64(&self) -> f64 {
        self.sup_upper_bound.to_f64_dir(Round::Up)
    }

    pub fn sup_lower_f64(&self) -> f64 {
        self.sup_lower_bound.to_f64_dir(Round::Down)
    }

    pub fn argmax_f64(&self) -> f64 {
        self.argmax_estimate.to_f64()
    }

    /// Internal consistency of the recorded fields.
    pub fn is_consistent(&self) -> bool {
        let one = Dyadic::one();
        self.sup_lower_bound <= self.sup_upper_bound
            && (self.verdict != Verdict::CertifiedBelowOne || self.sup_upper_bound < one)
            && (self.verdict != Verdict::FailedExceedsOne || self.sup_lower_bound >= one)
            && !self.argmax_estimate.is_negative()
            && self.argmax_estimate <= one
    }

    /// Rebuilds `g` from the recorded inputs and reruns the certification;
    /// true when the rerun reproduces this certificate exactly.
    pub fn recheck(&self) -> Result<bool> {
        let p = crate::serde_util::parse_rational(&self.p)?;
        let params = crate::derive_params(self.d, &p)?;
        let again = certify_sup_below_one(&build_g(&params)?, &self.config)?;
        Ok(self.is_consistent() && again == *self)
    }
}

/// Where values of `g` come from.
#[derive(Clone, Debug)]
enum Source {
    Factored(FactoredG),
    Expanded(ExpPoly),
}

/// Interval evaluator for `g` and its first two derivatives at a fixed
/// working precision.
#[derive(Clone, Debug)]
struct Evaluator {
    source: Source,
    prec: u32,
    x: Jet<Interval>,
    pref: Jet<Interval>,
    coeffs: Vec<(u64, Jet<Interval>)>,
}

impl Evaluator {
    fn new(g: &ExpPoly, prec: u32) -> Result<Self> {
        let source = match g.provenance() {
            Some(prov) if prov.derivative_order == 0 => Source::Factored(FactoredG::new(&prov.params()?)?),
            _ => Source::Expanded(g.clone()),
        };
        let mut ev = Evaluator {
            source,
            prec,
            x: Jet::constant(Interval::zero(prec)),
            pref: Jet::constant(Interval::zero(prec)),
            coeffs: Vec::new(),
        };
        ev.set_precision(prec);
        Ok(ev)
    }

    fn set_precision(&mut self, prec: u32) {
        self.prec = prec;
        match &self.source {
            Source::Factored(fg) => {
                let (x, pref) = fg.constants(prec);
                self.x = Jet::constant(x);
                self.pref = Jet::constant(pref);
            }
            Source::Expanded(g) => {
                let mut cache = ExpCache::new(prec);
                self.coeffs =
                    g.enclose_coefficients(&mut cache).into_iter().map(|(k, c)| (k, Jet::constant(c))).collect();
            }
        }
    }

    fn jet(&self, y: &Interval) -> Jet<Interval> {
        let y = Jet::variable(y.with_precision(self.prec));
        match &self.source {
            Source::Factored(fg) => fg.eval(&self.x, &self.pref, &y),
            Source::Expanded(_) => horner(&self.coeffs, &y),
        }
    }

    fn point(&self, y: &Dyadic) -> Jet<Interval> {
        self.jet(&Interval::exact(y.clone(), y.clone(), self.prec))
    }
}

/// A pending box with its certified upper bound.
#[derive(Clone, Debug)]
struct BoxItem {
    lo: Dyadic,
    hi: Dyadic,
    upper: Dyadic,
    prec: u32,
}

impl BoxItem {
    fn width(&self) -> Dyadic {
        self.hi.sub_exact(&self.lo)
    }
}

impl PartialEq for BoxItem {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for BoxItem {}

impl PartialOrd for BoxItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for BoxItem {
    /// Max-heap order: larger upper bound, then wider, then smaller `lo`.
    fn cmp(&self, other: &Self) -> Ordering {
        self.upper
            .cmp(&other.upper)
            .then_with(|| self.width().cmp(&other.width()))
            .then_with(|| other.lo.cmp(&self.lo))
    }
}

/// Best rounded-down point value seen so far.
struct Incumbent {
    value: Dyadic,
    at: Dyadic,
}

impl Incumbent {
    fn offer(&mut self, value: &Dyadic, at: &Dyadic) {
        if *value > self.value {
            self.value = value.clone();
            self.at = at.clone();
        }
    }
}

/// Upper bound of `g` on `[lo, hi]`, offering sampled values to `best`.
fn bound_box(ev: &Evaluator, lo: &Dyadic, hi: &Dyadic, best: &mut Incumbent) -> Dyadic {
    let prec = ev.prec;
    let y = Interval::exact(lo.clone(), hi.clone(), prec);
    let whole = ev.jet(&y);
    let mut upper = whole.v.hi().clone();

    let mid = Dyadic::midpoint(lo, hi);
    let at_mid = ev.point(&mid);
    best.offer(at_mid.v.lo(), &mid);

    if whole.d1.lo().is_positive() || whole.d1.hi().is_negative() {
        let end = if whole.d1.lo().is_positive() { hi } else { lo };
        let at_end = ev.point(end);
        best.offer(at_end.v.lo(), end);
        upper = Dyadic::min(&upper, at_end.v.hi());
    } else {
        // g(m) + g'(m) t + g''(Y) t^2 / 2 with t = y - m
        let t = Interval::exact(lo.sub_exact(&mid), hi.sub_exact(&mid), prec);
        let taylor = &at_mid.v + &(&at_mid.d1 * &t) + (&whole.d2 * &t.sqr()).div_u64(2);
        upper = Dyadic::min(&upper, taylor.hi());
    }
    upper
}

/// Certified enclosure of `{g(y) : y ∈ y_box}` for `y_box ⊆ [0, 1]`.
///
/// Horner evaluation of the exact coefficients, intersected with the
/// factored form when `g` carries its provenance.
pub fn eval_interval(g: &ExpPoly, y_box: &Interval, precision_bits: u32) -> Interval {
    let mut cache = ExpCache::new(precision_bits);
    let coeffs = g.enclose_coefficients(&mut cache);
    let y = y_box.with_precision(precision_bits);
    let naive = horner(&coeffs, &y);
    let factored = g
        .provenance()
        .filter(|p| p.derivative_order == 0)
        .and_then(|p| p.params().ok())
        .and_then(|params| FactoredG::new(&params).ok())
        .map(|fg| {
            let (x, pref) = fg.constants(precision_bits);
            fg.eval(&x, &pref, &y)
        });
    match factored {
        Some(f) => naive.intersect(&f).unwrap_or(naive),
        None => naive,
    }
}

fn certificate_inputs(g: &ExpPoly) -> Result<(u32, String, String, String)> {
    let prov = g
        .provenance()
        .ok_or_else(|| Error::InvalidConfig("certification needs g built from drift parameters".into()))?;
    let p = crate::Rational::new(prov.a.clone(), prov.b.clone());
    Ok((prov.d, prov.a.to_string(), prov.b.to_string(), rational_to_string(&p)))
}

/// Branch-and-bound certification of `sup_{[0,1]} g < 1`.
///
/// Verdicts are never wrong: resource caps yield `INCONCLUSIVE` unless every
/// remaining box is already below one.
pub fn certify_sup_below_one(g: &ExpPoly, cfg: &CertifyConfig) -> Result<Certificate> {
    cfg.validate()?;
    let (d, a, b, p) = certificate_inputs(g)?;
    let mut prec = cfg.initial_precision_bits;
    let mut ev = Evaluator::new(g, prec)?;
    let one = Dyadic::one();
    let tolerance = Dyadic::from_f64(cfg.sup_tolerance).expect("finite");
    let min_width = Dyadic::from_f64(cfg.min_box_width).expect("finite");

    let mut best = Incumbent { value: Dyadic::from_i64(-1), at: Dyadic::zero() };
    let mut heap = BinaryHeap::new();
    let (lo, hi) = (Dyadic::zero(), Dyadic::one());
    let upper = bound_box(&ev, &lo, &hi, &mut best);
    heap.push(BoxItem { lo, hi, upper, prec });
    let mut processed: u64 = 1;

    let verdict = loop {
        if best.value >= one {
            break Verdict::FailedExceedsOne;
        }
        let top = heap.peek().expect("worklist never empties");
        if top.upper < one && top.upper.sub_exact(&best.value) <= tolerance {
            break Verdict::CertifiedBelowOne;
        }
        if processed >= cfg.max_boxes {
            warn!("box budget exhausted after {processed} boxes");
            break if top.upper < one { Verdict::CertifiedBelowOne } else { Verdict::Inconclusive };
        }
        let item = heap.pop().expect("peeked");
        if item.width() < min_width {
            if item.prec < prec {
                let upper = bound_box(&ev, &item.lo, &item.hi, &mut best);
                heap.push(BoxItem { upper: Dyadic::min(&upper, &item.upper), prec, ..item });
                processed += 1;
                continue;
            }
            if prec >= cfg.max_precision_bits {
                let stuck_below = item.upper < one;
                heap.push(item);
                warn!("precision cap {prec} reached with an unresolved box");
                break if stuck_below { Verdict::CertifiedBelowOne } else { Verdict::Inconclusive };
            }
            prec = (prec * 2).min(cfg.max_precision_bits);
            debug!("raising working precision to {prec} bits");
            ev.set_precision(prec);
            heap.push(item);
            continue;
        }
        let mid = Dyadic::midpoint(&item.lo, &item.hi);
        for (lo, hi) in [(item.lo.clone(), mid.clone()), (mid.clone(), item.hi.clone())] {
            let upper = bound_box(&ev, &lo, &hi, &mut best);
            // a child's bound can never exceed its parent's
            let upper = Dyadic::min(&upper, &item.upper);
            heap.push(BoxItem { lo, hi, upper, prec });
            processed += 1;
        }
    };

    let sup_upper = heap.peek().map(|t| t.upper.clone()).unwrap_or_else(|| best.value.clone());
    let sup_upper = Dyadic::max(&sup_upper, &best.value);
    if verdict == Verdict::CertifiedBelowOne {
        let gap = one.sub_exact(&sup_upper).to_f64();
        if gap < cfg.target_gap {
            warn!("certified with margin {gap:e} below target gap {:e}", cfg.target_gap);
        }
    }

    let mut unique_max_verified = false;
    if cfg.check_unique_max && verdict == Verdict::CertifiedBelowOne {
        unique_max_verified = match verify_unique_max(g, cfg) {
            Ok(v) => v,
            Err(e) => {
                warn!("unique-maximum check did not finish: {e}");
                false
            }
        };
    }

    Ok(Certificate {
        d,
        a,
        b,
        p,
        verdict,
        sup_upper_bound: sup_upper,
        sup_lower_bound: best.value,
        argmax_estimate: best.at,
        precision_bits: prec,
        boxes_processed: processed,
        unique_max_verified,
        config: cfg.clone(),
    })
}

/// Certified sign of `g'` on a box, if determined.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Piece {
    Sign(i8),
    /// Exactly one simple root, with the signs on either side.
    Root(i8, i8),
}

fn sign_of(iv: &Interval) -> Option<i8> {
    if iv.lo().is_positive() {
        Some(1)
    } else if iv.hi().is_negative() {
        Some(-1)
    } else {
        None
    }
}

/// Certified check that `g'` changes sign exactly once on `(0, 1]`, from
/// positive to negative, i.e. that `g` has a unique interior maximum.
///
/// `(0, 1]` is covered adaptively by boxes on which either `g'` has a
/// certified sign, or `g''` excludes zero and the endpoint signs of `g'`
/// differ (exactly one root). Near `y = 0` the sign is read from
/// `g'/y^k`, `k` the lowest exponent of `g'`. Returns
/// [`Error::ResourceExhausted`] (distinct from `false`) when some box cannot
/// be resolved at the precision cap.
pub fn verify_unique_max(g: &ExpPoly, cfg: &CertifyConfig) -> Result<bool> {
    cfg.validate()?;
    let dg = g_derivative(g);
    let Some(kmin) = dg.min_exponent() else {
        return Ok(false);
    };
    let deflated = dg.deflate(kmin);
    let mut prec = cfg.initial_precision_bits;
    let mut ev = Evaluator::new(g, prec)?;
    let mut h_coeffs = deflated.enclose_coefficients(&mut ExpCache::new(prec));
    let min_width = Dyadic::from_f64(cfg.min_box_width).expect("finite");

    let mut pieces: Vec<Piece> = Vec::new();
    // right half pushed first so boxes pop left to right
    let mut stack = vec![(Dyadic::zero(), Dyadic::one())];
    let mut processed: u64 = 0;
    while let Some((lo, hi)) = stack.pop() {
        processed += 1;
        if processed > cfg.max_boxes {
            return Err(Error::ResourceExhausted(format!("unique-maximum check exceeded {} boxes", cfg.max_boxes)));
        }
        let y = Interval::exact(lo.clone(), hi.clone(), prec);
        let piece = if lo.is_zero() {
            sign_of(&horner(&h_coeffs, &y)).map(Piece::Sign)
        } else {
            let whole = ev.jet(&y);
            match sign_of(&whole.d1) {
                Some(s) => Some(Piece::Sign(s)),
                None if sign_of(&whole.d2).is_some() => {
                    let left = sign_of(&ev.point(&lo).d1);
                    let right = sign_of(&ev.point(&hi).d1);
                    match (left, right) {
                        (Some(l), Some(r)) if l == r => Some(Piece::Sign(l)),
                        (Some(l), Some(r)) => Some(Piece::Root(l, r)),
                        _ => None,
                    }
                }
                None => None,
            }
        };
        match piece {
            Some(pc) => pieces.push(pc),
            None if hi.sub_exact(&lo) >= min_width => {
                let mid = Dyadic::midpoint(&lo, &hi);
                stack.push((mid.clone(), hi));
                stack.push((lo, mid));
            }
            None => {
                if prec >= cfg.max_precision_bits {
                    return Err(Error::ResourceExhausted(format!(
                        "sign of g' undetermined near y = {} at {prec} bits",
                        lo.to_f64()
                    )));
                }
                prec = (prec * 2).min(cfg.max_precision_bits);
                ev.set_precision(prec);
                h_coeffs = deflated.enclose_coefficients(&mut ExpCache::new(prec));
                stack.push((lo, hi));
            }
        }
    }

    let signs: Vec<i8> = pieces
        .iter()
        .flat_map(|pc| match *pc {
            Piece::Sign(s) => vec![s],
            Piece::Root(l, r) => vec![l, r],
        })
        .collect();
    let changes = signs.windows(2).filter(|w| w[0] != w[1]).count();
    debug!("unique-maximum check: {} pieces, {changes} sign changes", pieces.len());
    Ok(changes == 1 && signs.first() == Some(&1) && signs.last() == Some(&-1))
}

/// Convenience: build `g` for `params` and certify it.
pub fn certify_params(params: &DriftParams, cfg: &CertifyConfig) -> Result<Certificate> {
    certify_sup_below_one(&build_g(params)?, cfg)
}

/// `g` evaluated at a point with an enclosure at `precision_bits`.
pub fn point_value(g: &ExpPoly, y: f64, precision_bits: u32) -> Result<Interval> {
    let yd = Dyadic::from_f64(y).ok_or_else(|| Error::InvalidConfig(format!("non-finite y = {y}")))?;
    let ev = Evaluator::new(g, precision_bits)?;
    Ok(ev.point(&yd).v)
}
