//! Exact evolution of distributions, total variation, and the entropy lower
//! bound and spectral upper bound on the distance to uniformity.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::ffield::Modulus;
use crate::kernels::{shannon, Dist, Kernel, StepDist};

/// Starts used for the worst case above this many states.
pub const EXACT_WORST_CASE_MAX: usize = 2003;
pub const SAMPLED_STARTS: usize = 32;
const DOUBLY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MixingError {
    #[error("distributions live on different spaces")]
    SpaceMismatch,
    #[error("upper bound needs k ≥ 2, got {0}")]
    TooFewSteps(usize),
    #[error("lambda2 = {0} is outside [0, 1]")]
    BadLambda(f64),
    #[error("eps = {0} is outside (0, 1)")]
    BadEps(f64),
    #[error("kernel is not doubly stochastic, so the uniform law is not stationary")]
    NotDoublyStochastic,
    #[error("start state {state} out of range for {n} states")]
    BadState { state: usize, n: usize },
}

/// d·Kⁿ.
pub fn evolve(k: &Kernel, d: &Dist, n: usize) -> Result<Dist, MixingError> {
    if k.space() != d.space() {
        return Err(MixingError::SpaceMismatch);
    }
    let mut v = d.probs().to_vec();
    for _ in 0..n {
        v = k.apply_left(&v);
    }
    Ok(Dist::from_raw(d.space().clone(), v))
}

pub fn tv_distance(d1: &Dist, d2: &Dist) -> Result<f64, MixingError> {
    if d1.space() != d2.space() {
        return Err(MixingError::SpaceMismatch);
    }
    Ok(tv_to(d1.probs(), d2.probs()))
}

fn tv_to(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

fn tv_uniform(a: &[f64]) -> f64 {
    let u = 1.0 / a.len() as f64;
    0.5 * a.iter().map(|x| (x - u).abs()).sum::<f64>()
}

/// Natural-log entropy of the step law.
pub fn entropy(mu: &StepDist) -> f64 {
    shannon(mu.probs())
}

/// 1 − (n·H(μ) + log 2)/log p, unclamped.
pub fn lower_bound_tv_raw(n: usize, p: Modulus, mu: &StepDist) -> f64 {
    1.0 - (n as f64 * entropy(mu) + 2f64.ln()) / (p.get() as f64).ln()
}

/// The entropy lower bound clamped to [0, 1].
pub fn lower_bound_tv(n: usize, p: Modulus, mu: &StepDist) -> f64 {
    lower_bound_tv_raw(n, p, mu).clamp(0.0, 1.0)
}

/// (√p/2)·λ₂^{(k−2)/4}.
pub fn upper_bound_tv(k: usize, p: Modulus, lambda2: f64) -> Result<f64, MixingError> {
    if k < 2 {
        return Err(MixingError::TooFewSteps(k));
    }
    if !(-1e-9..=1.0 + 1e-9).contains(&lambda2) {
        return Err(MixingError::BadLambda(lambda2));
    }
    let lambda = lambda2.clamp(0.0, 1.0);
    Ok((p.get() as f64).sqrt() / 2.0 * lambda.powf((k as f64 - 2.0) / 4.0))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyGrowth {
    pub n: usize,
    pub entropy: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Compares H(Kⁿ(x,·)) with n·H(μ).
pub fn entropy_growth_check(
    k: &Kernel,
    mu: &StepDist,
    x: usize,
    n: usize,
) -> Result<EntropyGrowth, MixingError> {
    check_state(k, x)?;
    let d = evolve(k, &Dist::point(k.space().clone(), x), n)?;
    let h = d.entropy();
    let bound = n as f64 * entropy(mu);
    Ok(EntropyGrowth {
        n,
        entropy: h,
        bound,
        holds: h <= bound + 1e-9,
    })
}

fn check_state(k: &Kernel, x: usize) -> Result<(), MixingError> {
    if x >= k.len() {
        return Err(MixingError::BadState {
            state: x,
            n: k.len(),
        });
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Start {
    WorstCase,
    From(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "steps", rename_all = "lowercase")]
pub enum MixingTime {
    Exact(usize),
    /// No start mixed within the cap; the cap is a lower bound on t_mix.
    Exceeds(usize),
}

impl MixingTime {
    pub fn steps(self) -> usize {
        match self {
            MixingTime::Exact(n) | MixingTime::Exceeds(n) => n,
        }
    }
}

/// ⌈64·log₂ N⌉ steps.
pub fn mixing_cap(n: usize) -> usize {
    (64.0 * (n.max(2) as f64).log2()).ceil() as usize
}

/// Start states for the worst case: all of them up to
/// [`EXACT_WORST_CASE_MAX`], otherwise 0, 1 and a fixed stride.
pub fn worst_case_starts(n: usize) -> Vec<usize> {
    if n <= EXACT_WORST_CASE_MAX {
        return (0..n).collect();
    }
    let rest = SAMPLED_STARTS - 2;
    let stride = (n - 2) / rest;
    let mut starts = vec![0, 1];
    starts.extend((0..rest).map(|j| 2 + j * stride));
    starts
}

fn first_hit(k: &Kernel, x: usize, eps: f64, cap: usize) -> Option<usize> {
    let mut v = vec![0.0; k.len()];
    v[x] = 1.0;
    for n in 0..=cap {
        if tv_uniform(&v) <= eps {
            return Some(n);
        }
        if n < cap {
            v = k.apply_left(&v);
        }
    }
    None
}

/// Smallest n with ‖Kⁿ(x,·) − π‖_TV ≤ eps, over the chosen starts, with π
/// uniform.
pub fn mixing_time(k: &Kernel, eps: f64, start: Start) -> Result<MixingTime, MixingError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(MixingError::BadEps(eps));
    }
    if k.column_sums().iter().any(|s| (s - 1.0).abs() > DOUBLY_TOL) {
        return Err(MixingError::NotDoublyStochastic);
    }
    let cap = mixing_cap(k.len());
    let starts = match start {
        Start::WorstCase => worst_case_starts(k.len()),
        Start::From(x) => {
            check_state(k, x)?;
            vec![x]
        }
    };
    let hits: Vec<Option<usize>> = starts
        .par_iter()
        .map(|&x| first_hit(k, x, eps, cap))
        .collect();
    if hits.iter().any(Option::is_none) {
        return Ok(MixingTime::Exceeds(cap));
    }
    Ok(MixingTime::Exact(hits.into_iter().flatten().max().unwrap_or(0)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub n: usize,
    pub tv: f64,
    pub lower_bound: f64,
    pub lower_bound_raw: f64,
    pub upper_bound: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MixingCurve {
    pub p: u64,
    pub start_state: usize,
    pub points: Vec<CurvePoint>,
}

/// TV to uniform of Kⁿ(x,·) for n = 0..=n_max, alongside both bounds. The
/// upper bound is filled for n ≥ 2 when λ₂(Q) is supplied.
pub fn mixing_curve(
    k: &Kernel,
    mu: &StepDist,
    p: Modulus,
    start_state: usize,
    n_max: usize,
    lambda2_q: Option<f64>,
) -> Result<MixingCurve, MixingError> {
    check_state(k, start_state)?;
    let mut v = vec![0.0; k.len()];
    v[start_state] = 1.0;
    let mut points = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        if n > 0 {
            v = k.apply_left(&v);
        }
        let upper_bound = match lambda2_q {
            Some(l) if n >= 2 => Some(upper_bound_tv(n, p, l)?),
            _ => None,
        };
        points.push(CurvePoint {
            n,
            tv: tv_uniform(&v),
            lower_bound: lower_bound_tv(n, p, mu),
            lower_bound_raw: lower_bound_tv_raw(n, p, mu),
            upper_bound,
        });
    }
    Ok(MixingCurve {
        p: p.get(),
        start_state,
        points,
    })
}

impl MixingCurve {
    pub const CSV_HEADER: &'static str = "n,tv,lower_bound,upper_bound";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for pt in &self.points {
            let ub = pt.upper_bound.map(|u| u.to_string()).unwrap_or_default();
            out.push_str(&format!("{},{},{},{}\n", pt.n, pt.tv, pt.lower_bound, ub));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("curve serializes")
    }
}
