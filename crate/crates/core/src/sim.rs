//! Monte Carlo simulation of the frog model, its self-similar variant and
//! the star process behind the activation count `U`.
//!
//! Trees are materialized lazily: a vertex of the `d`-ary tree is its
//! heap index (root `0`, children of `v` are `v·d + 1 ..= v·d + d`), and
//! only visited vertices are stored. Replication `r` draws from a ChaCha8
//! stream keyed by `(seed, r)`, so summaries do not depend on the number of
//! threads.

use std::collections::{HashSet, VecDeque};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::DriftParams;

/// Initial configuration of sleeping frogs at non-root vertices.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum InitMeasure {
    OnePerSite,
    Poisson { mean: f64 },
}

impl InitMeasure {
    pub fn validate(&self) -> Result<()> {
        match *self {
            InitMeasure::Poisson { mean } if !(mean >= 0.0 && mean.is_finite()) => {
                Err(Error::InvalidConfig(format!("Poisson mean must be finite and >= 0, got {mean}")))
            }
            _ => Ok(()),
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> u64 {
        match *self {
            InitMeasure::OnePerSite => 1,
            InitMeasure::Poisson { mean: 0.0 } => 0,
            InitMeasure::Poisson { mean } => Poisson::new(mean).expect("validated").sample(rng) as u64,
        }
    }
}

impl FromStr for InitMeasure {
    type Err = Error;

    /// `one` or `poi:MEAN`.
    fn from_str(s: &str) -> Result<Self> {
        let nu = match s.trim() {
            "one" => InitMeasure::OnePerSite,
            other => {
                let mean = other
                    .strip_prefix("poi:")
                    .and_then(|m| m.parse::<f64>().ok())
                    .ok_or_else(|| Error::Parse(format!("initial measure `{s}` (expected `one` or `poi:MEAN`)")))?;
                InitMeasure::Poisson { mean }
            }
        };
        nu.validate()?;
        Ok(nu)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Sleeping frogs sit at depths `1..=depth`; frogs stepping below are removed.
    pub depth: u32,
    /// Step cap: per replication for the self-similar model, per frog for
    /// the frog model.
    pub max_steps: u64,
    pub seed: u64,
    pub replications: u32,
}

impl SimConfig {
    pub fn validate(&self, d: u32) -> Result<()> {
        if self.depth == 0 || self.max_steps == 0 || self.replications == 0 {
            return Err(Error::InvalidConfig("depth, max_steps and replications must be positive".into()));
        }
        // heap indices must fit in u128
        if (self.depth as f64 + 1.0) * (d as f64).log2() > 126.0 {
            return Err(Error::InvalidConfig(format!("depth {} too large for d = {d}", self.depth)));
        }
        Ok(())
    }
}

/// Walk probabilities for a drift `p ∈ (0, 1)` on the `d`-ary tree.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Walk {
    pub d: u32,
    pub p: f64,
    /// First-step rootward probability of a just-woken self-similar frog.
    pub p_star: f64,
    /// Continuing rootward probability.
    pub p_hat: f64,
}

impl Walk {
    pub fn new(d: u32, p: f64) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidArity(d, 2));
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidConfig(format!("drift must lie in (0, 1), got {p}")));
        }
        let dd = d as f64;
        Ok(Walk { d, p, p_star: p * (dd - 1.0) / (dd - (dd + 1.0) * p), p_hat: p / (1.0 - p) })
    }

    pub fn from_params(params: &DriftParams) -> Self {
        Walk::new(params.d, params.p_f64()).expect("drift params are in range")
    }

    fn require_self_similar(&self) -> Result<()> {
        if self.p < 0.5 {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("self-similar model needs p < 1/2, got {}", self.p)))
        }
    }
}

/// Root-visit statistics over replications.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimSummary {
    pub model: String,
    pub d: u32,
    pub p: f64,
    pub nu: InitMeasure,
    pub config: SimConfig,
    pub root_visits: Vec<u64>,
    pub mean: f64,
    /// Sample variance.
    pub variance: f64,
    /// Normal-approximation 95% confidence interval for the mean.
    pub ci95: [f64; 2],
    /// Replications that hit the step cap (their counts are lower bounds).
    pub capped_replications: Vec<u32>,
}

impl SimSummary {
    fn new(model: &str, walk: &Walk, nu: InitMeasure, cfg: SimConfig, runs: Vec<(u64, bool)>) -> Self {
        let root_visits: Vec<u64> = runs.iter().map(|r| r.0).collect();
        let capped_replications =
            runs.iter().enumerate().filter(|(_, r)| r.1).map(|(i, _)| i as u32).collect();
        let n = root_visits.len() as f64;
        let mean = root_visits.iter().sum::<u64>() as f64 / n;
        let variance = if root_visits.len() > 1 {
            root_visits.iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        let half = 1.96 * (variance / n).sqrt();
        SimSummary {
            model: model.to_string(),
            d: walk.d,
            p: walk.p,
            nu,
            config: cfg,
            root_visits,
            mean,
            variance,
            ci95: [mean - half, mean + half],
            capped_replications,
        }
    }

    /// Half-width of the 95% interval.
    pub fn ci_half_width(&self) -> f64 {
        0.5 * (self.ci95[1] - self.ci95[0])
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One draw of `U(d, p, λ)`: the number of leaves `v_2..v_d` of the star
/// graph visited when `Poi(1)` particles leave the hub and every visited
/// leaf releases `Poi(λ)` particles that route back through the hub.
///
/// By Poisson thinning, the hub hits each leaf independently with
/// probability `1 - e^{-(1-p*)/d}` and each activated leaf hits each other
/// leaf independently with probability `1 - e^{-(1-p̂)λ/(d-1)}`.
pub fn sample_u<R: Rng>(walk: &Walk, lambda: f64, rng: &mut R) -> u32 {
    let d = walk.d as usize;
    let from_hub = 1.0 - (-(1.0 - walk.p_star) / d as f64).exp();
    let from_leaf = 1.0 - (-(1.0 - walk.p_hat) * lambda / (d as f64 - 1.0)).exp();
    // leaf 0 is v_1, already active
    let mut visited = vec![false; d];
    visited[0] = true;
    let mut active = vec![0usize];
    for (j, v) in visited.iter_mut().enumerate().skip(1) {
        if rng.random::<f64>() < from_hub {
            *v = true;
            active.push(j);
        }
    }
    while let Some(i) = active.pop() {
        for j in 1..d {
            if j != i && !visited[j] && rng.random::<f64>() < from_leaf {
                visited[j] = true;
                active.push(j);
            }
        }
    }
    visited.iter().skip(1).filter(|&&v| v).count() as u32
}

const SAMPLE_BLOCK: u64 = 4096;

/// Empirical pmf of `U` from `n` draws, in parallel blocks with
/// independent streams.
pub fn empirical_u_pmf(walk: &Walk, lambda: f64, n: u64, seed: u64) -> Vec<f64> {
    let blocks = n.div_ceil(SAMPLE_BLOCK);
    let counts = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(seed, b);
            let mut counts = vec![0u64; walk.d as usize];
            let len = SAMPLE_BLOCK.min(n - b * SAMPLE_BLOCK);
            for _ in 0..len {
                counts[sample_u(walk, lambda, &mut rng) as usize] += 1;
            }
            counts
        })
        .reduce(
            || vec![0u64; walk.d as usize],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    counts.iter().map(|&c| c as f64 / n as f64).collect()
}

/// Total-variation distance between two pmfs on the same support.
pub fn tv_distance(a: &[f64], b: &[f64]) -> f64 {
    let len = a.len().max(b.len());
    0.5 * (0..len).map(|i| (a.get(i).unwrap_or(&0.0) - b.get(i).unwrap_or(&0.0)).abs()).sum::<f64>()
}

#[derive(Clone, Copy, Debug)]
struct Tree {
    d: u128,
    depth: u32,
}

impl Tree {
    fn parent(&self, v: u128) -> u128 {
        (v - 1) / self.d
    }

    fn child(&self, v: u128, i: u32) -> u128 {
        v * self.d + 1 + i as u128
    }
}

#[derive(Clone, Copy, Debug)]
enum Phase {
    JustWoken,
    /// Last step was rootward, arriving from the given child.
    Rootward(u128),
}

#[derive(Clone, Copy, Debug)]
struct SelfSimilarFrog {
    at: u128,
    depth: u32,
    phase: Phase,
}

/// Self-similar frog model on the depth-truncated tree.
///
/// The first frog steps from the root to a uniform child. A just-woken frog
/// steps rootward with probability `p*`; after a rootward step it continues
/// rootward with probability `p̂` and otherwise turns to a uniform child
/// other than the one it came from. A frog that has turned away keeps
/// stepping to uniform children until it reaches an already visited vertex
/// or leaves the truncation, and is removed there. Frogs reaching the root
/// are counted and removed. Frogs run one at a time in wake-up order, so
/// the first to reach a vertex claims it.
pub fn simulate_sfm(walk: &Walk, nu: InitMeasure, cfg: &SimConfig) -> Result<SimSummary> {
    walk.require_self_similar()?;
    nu.validate()?;
    cfg.validate(walk.d)?;
    let runs = (0..cfg.replications)
        .into_par_iter()
        .map(|r| sfm_run(walk, nu, cfg, &mut stream_rng(cfg.seed, r as u64)))
        .collect();
    Ok(SimSummary::new("sfm", walk, nu, *cfg, runs))
}

fn sfm_run<R: Rng>(walk: &Walk, nu: InitMeasure, cfg: &SimConfig, rng: &mut R) -> (u64, bool) {
    let tree = Tree { d: walk.d as u128, depth: cfg.depth };
    let d = walk.d;
    let mut visited: HashSet<u128> = HashSet::new();
    visited.insert(0);
    let mut queue: VecDeque<SelfSimilarFrog> = VecDeque::new();
    let mut root_visits = 0u64;
    let mut steps = 0u64;

    // Walks away from `at`, claiming fresh vertices, until removed.
    let run_away = |mut at: u128,
                        mut depth: u32,
                        mut first: Option<u128>,
                        visited: &mut HashSet<u128>,
                        queue: &mut VecDeque<SelfSimilarFrog>,
                        steps: &mut u64,
                        rng: &mut R| {
        loop {
            *steps += 1;
            let next = match first.take() {
                Some(excluded) => {
                    let mut i = rng.random_range(0..d - 1);
                    if tree.child(at, i) >= excluded {
                        i += 1;
                    }
                    tree.child(at, i)
                }
                None => tree.child(at, rng.random_range(0..d)),
            };
            if depth + 1 > tree.depth || !visited.insert(next) {
                return;
            }
            at = next;
            depth += 1;
            for _ in 0..nu.sample(rng) {
                queue.push_back(SelfSimilarFrog { at, depth, phase: Phase::JustWoken });
            }
            if *steps > cfg.max_steps {
                return;
            }
        }
    };

    run_away(0, 0, None, &mut visited, &mut queue, &mut steps, rng);
    while let Some(mut frog) = queue.pop_front() {
        if steps > cfg.max_steps {
            return (root_visits, true);
        }
        loop {
            let up = match frog.phase {
                Phase::JustWoken => rng.random::<f64>() < walk.p_star,
                Phase::Rootward(_) => rng.random::<f64>() < walk.p_hat,
            };
            if up {
                steps += 1;
                let parent = tree.parent(frog.at);
                if parent == 0 {
                    root_visits += 1;
                    break;
                }
                frog = SelfSimilarFrog { at: parent, depth: frog.depth - 1, phase: Phase::Rootward(frog.at) };
            } else {
                let excluded = match frog.phase {
                    Phase::Rootward(from) => Some(from),
                    Phase::JustWoken => None,
                };
                run_away(frog.at, frog.depth, excluded, &mut visited, &mut queue, &mut steps, rng);
                break;
            }
            if steps > cfg.max_steps {
                return (root_visits, true);
            }
        }
    }
    (root_visits, steps > cfg.max_steps)
}

/// Frog model on the depth-truncated tree.
///
/// Active frogs step to the parent with probability `p` and otherwise to a
/// uniform child; at the root they step to a uniform child. A frog
/// stepping below depth `depth` leaves the system. Every arrival at the
/// root is counted (the initial frog's starting position is not). Each frog
/// is capped at `max_steps` steps.
pub fn simulate_fm(walk: &Walk, nu: InitMeasure, cfg: &SimConfig) -> Result<SimSummary> {
    nu.validate()?;
    cfg.validate(walk.d)?;
    let runs = (0..cfg.replications)
        .into_par_iter()
        .map(|r| fm_run(walk, nu, cfg, &mut stream_rng(cfg.seed, r as u64)))
        .collect();
    Ok(SimSummary::new("fm", walk, nu, *cfg, runs))
}

fn fm_run<R: Rng>(walk: &Walk, nu: InitMeasure, cfg: &SimConfig, rng: &mut R) -> (u64, bool) {
    let tree = Tree { d: walk.d as u128, depth: cfg.depth };
    let mut visited: HashSet<u128> = HashSet::new();
    visited.insert(0);
    let mut frogs: Vec<(u128, u32)> = vec![(0, 0)];
    let mut root_visits = 0u64;
    let mut capped = false;
    while let Some((mut at, mut depth)) = frogs.pop() {
        let mut steps = 0u64;
        loop {
            if steps >= cfg.max_steps {
                capped = true;
                break;
            }
            steps += 1;
            if depth > 0 && rng.random::<f64>() < walk.p {
                at = tree.parent(at);
                depth -= 1;
                if depth == 0 {
                    root_visits += 1;
                }
                continue;
            }
            if depth + 1 > tree.depth {
                break;
            }
            at = tree.child(at, rng.random_range(0..walk.d));
            depth += 1;
            if visited.insert(at) {
                for _ in 0..nu.sample(rng) {
                    frogs.push((at, depth));
                }
            }
        }
    }
    (root_visits, capped)
}
