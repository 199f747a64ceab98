//! Comparison of Dirichlet forms for chains on nested state spaces
//! X₀ ⊆ X, and its instance comparing L₀ on F_p with L on P¹(F_p).

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::ffield::{iota_bar, Modulus, ProjPoint};
use crate::kernels::{
    build_l, build_l0, build_q, decompose_ul0, Dist, Kernel, KernelError, StepDist, WalkParams,
};
use crate::spectral::{spectral_gap, SpectralError};

const MARGINAL_TOL: f64 = 1e-12;
const FORM_TOL: f64 = 1e-9;
const LINK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ComparisonError {
    #[error("expected {expected} values, found {found}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("need p > |b|, got b = {b}, p = {p}")]
    ShiftTooLarge { b: i64, p: u64 },
    #[error("embedding of X0 into X is not injective or out of range at {0}")]
    BadEmbedding(usize),
    #[error("extension measure at state {0} is invalid")]
    BadExtension(usize),
    #[error("no coupling for edge ({0}, {1})")]
    MissingCoupling(usize, usize),
    #[error("coupling for edge ({0}, {1}) has wrong marginals")]
    BadMarginal(usize, usize),
    #[error("flow has no path for pair ({0}, {1})")]
    MissingFlow(usize, usize),
    #[error("invalid flow for pair ({0}, {1})")]
    BadFlow(usize, usize),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// ℰ(f, f) = ½ Σ |f(x) − f(y)|² K(x, y) π(x).
pub fn dirichlet_form(k: &Kernel, pi: &Dist, f: &[f64]) -> Result<f64, ComparisonError> {
    check_len(k.len(), pi.len())?;
    check_len(k.len(), f.len())?;
    let total: f64 = (0..k.len())
        .map(|x| {
            k.row(x)
                .iter()
                .map(|&(y, w)| (f[x] - f[y]).powi(2) * w)
                .sum::<f64>()
                * pi.probs()[x]
        })
        .sum();
    Ok(0.5 * total)
}

/// V(f) = ½ Σ |f(x) − f(y)|² π(x) π(y).
pub fn variance_form(pi: &Dist, f: &[f64]) -> Result<f64, ComparisonError> {
    check_len(pi.len(), f.len())?;
    let q = pi.probs();
    let total: f64 = (0..f.len())
        .map(|x| {
            (0..f.len())
                .map(|y| (f[x] - f[y]).powi(2) * q[y])
                .sum::<f64>()
                * q[x]
        })
        .sum();
    Ok(0.5 * total)
}

fn check_len(expected: usize, found: usize) -> Result<(), ComparisonError> {
    if expected != found {
        return Err(ComparisonError::SizeMismatch { expected, found });
    }
    Ok(())
}

/// A sparse measure: `(state, mass)` pairs.
pub type Measure = Vec<(usize, f64)>;

/// For each state of X, a probability measure Q_x on X₀ (indexed by X₀).
#[derive(Clone, Debug, PartialEq)]
pub struct ExtensionMeasures(pub Vec<Measure>);

/// Joint measures Q_{x,y} on X₀ × X₀ for ordered edges of P.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Coupling(pub BTreeMap<(usize, usize), Vec<((usize, usize), f64)>>);

impl Coupling {
    /// Q_x ⊗ Q_y on every edge of `p`.
    pub fn independent(p: &Kernel, ext: &ExtensionMeasures) -> Coupling {
        let mut map = BTreeMap::new();
        for x in 0..p.len() {
            for &(y, _) in p.row(x) {
                let joint = ext.0[x]
                    .iter()
                    .flat_map(|&(a, qa)| ext.0[y].iter().map(move |&(b, qb)| ((a, b), qa * qb)))
                    .collect();
                map.insert((x, y), joint);
            }
        }
        Coupling(map)
    }
}

/// A weighted path in X₀.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightedPath {
    pub states: Vec<usize>,
    pub weight: f64,
}

impl WeightedPath {
    pub fn single(states: Vec<usize>) -> Self {
        WeightedPath {
            states,
            weight: 1.0,
        }
    }

    pub fn len(&self) -> usize {
        self.states.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Paths in X₀ for each ordered pair (a, b).
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Flow(pub BTreeMap<(usize, usize), Vec<WeightedPath>>);

#[derive(Clone, Debug)]
pub struct ComparisonData {
    pub p0: Kernel,
    pub p: Kernel,
    pub pi0: Dist,
    pub pi: Dist,
    /// X₀ index ↦ X index.
    pub embed: Vec<usize>,
    pub ext: ExtensionMeasures,
    pub coupling: Coupling,
    pub flow: Flow,
}

impl ComparisonData {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        p0: Kernel,
        p: Kernel,
        pi0: Dist,
        pi: Dist,
        embed: Vec<usize>,
        ext: ExtensionMeasures,
        coupling: Coupling,
        flow: Flow,
    ) -> Result<Self, ComparisonError> {
        let (n0, n) = (p0.len(), p.len());
        check_len(n0, pi0.len())?;
        check_len(n, pi.len())?;
        check_len(n0, embed.len())?;
        check_len(n, ext.0.len())?;
        let mut seen = vec![false; n];
        for (a, &x) in embed.iter().enumerate() {
            if x >= n || seen[x] {
                return Err(ComparisonError::BadEmbedding(a));
            }
            seen[x] = true;
        }
        for (x, q) in ext.0.iter().enumerate() {
            let total: f64 = q.iter().map(|(_, w)| w).sum();
            let valid = q.iter().all(|&(a, w)| a < n0 && w >= 0.0) && (total - 1.0).abs() <= MARGINAL_TOL;
            if !valid {
                return Err(ComparisonError::BadExtension(x));
            }
        }
        for (a, &x) in embed.iter().enumerate() {
            if ext.0[x].iter().any(|&(b, w)| w > 0.0 && b != a) {
                return Err(ComparisonError::BadExtension(x));
            }
        }
        for x in 0..n {
            for &(y, _) in p.row(x) {
                let joint = coupling
                    .0
                    .get(&(x, y))
                    .ok_or(ComparisonError::MissingCoupling(x, y))?;
                let (mut left, mut right) = (vec![0.0; n0], vec![0.0; n0]);
                for &((a, b), w) in joint {
                    if a >= n0 || b >= n0 || w < 0.0 {
                        return Err(ComparisonError::BadMarginal(x, y));
                    }
                    left[a] += w;
                    right[b] += w;
                }
                let marginal_ok = |m: &[f64], q: &Measure| {
                    let mut want = vec![0.0; n0];
                    q.iter().for_each(|&(a, w)| want[a] += w);
                    m.iter().zip(&want).all(|(u, v)| (u - v).abs() <= MARGINAL_TOL)
                };
                if !marginal_ok(&left, &ext.0[x]) || !marginal_ok(&right, &ext.0[y]) {
                    return Err(ComparisonError::BadMarginal(x, y));
                }
            }
        }
        for (&(a, b), paths) in &flow.0 {
            let total: f64 = paths.iter().map(|g| g.weight).sum();
            let paths_ok = paths.iter().all(|g| {
                g.states.len() >= 2
                    && g.states[0] == a
                    && *g.states.last().unwrap() == b
                    && g.weight >= 0.0
                    && g.states.windows(2).all(|e| e[0] < n0 && e[1] < n0 && p0.get(e[0], e[1]) > 0.0)
            });
            if !paths_ok || (total - 1.0).abs() > MARGINAL_TOL {
                return Err(ComparisonError::BadFlow(a, b));
            }
        }
        Ok(ComparisonData {
            p0,
            p,
            pi0,
            pi,
            embed,
            ext,
            coupling,
            flow,
        })
    }

    /// States of X outside the image of X₀.
    fn outside(&self) -> Vec<usize> {
        let mut inside = vec![false; self.p.len()];
        self.embed.iter().for_each(|&x| inside[x] = true);
        (0..self.p.len()).filter(|&x| !inside[x]).collect()
    }

    /// Pairs (a, b) in X₀² with Q_{x,y}(a, b) > 0 for some edge (x, y) of P.
    pub fn required_pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs: Vec<(usize, usize)> = self
            .coupling
            .0
            .values()
            .flatten()
            .filter(|(_, w)| *w > 0.0)
            .map(|&(ab, _)| ab)
            .collect();
        pairs.sort_unstable();
        pairs.dedup();
        pairs
    }
}

/// sup over X₀ of π₀(x)/π(x).
pub fn compute_c(data: &ComparisonData) -> f64 {
    data.embed
        .iter()
        .enumerate()
        .map(|(a, &x)| data.pi0.probs()[a] / data.pi.probs()[x])
        .fold(0.0, f64::max)
}

/// Load carried by the pair (a, b): the three terms of the comparison
/// constant before routing.
fn pair_loads(data: &ComparisonData) -> BTreeMap<(usize, usize), f64> {
    let pi = data.pi.probs();
    let outside = data.outside();
    let mut is_outside = vec![false; data.p.len()];
    outside.iter().for_each(|&x| is_outside[x] = true);
    let mut load: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (a, &xa) in data.embed.iter().enumerate() {
        for &(y, w) in data.p.row(xa) {
            if is_outside[y] {
                for &(b, q) in &data.ext.0[y] {
                    *load.entry((a, b)).or_default() += 2.0 * q * w * pi[xa];
                }
            }
        }
    }
    let mut back = vec![usize::MAX; data.p.len()];
    data.embed.iter().enumerate().for_each(|(a, &x)| back[x] = a);
    for (a, &xa) in data.embed.iter().enumerate() {
        for &(y, w) in data.p.row(xa) {
            if back[y] != usize::MAX {
                *load.entry((a, back[y])).or_default() += w * pi[xa];
            }
        }
    }
    for &alpha in &outside {
        for &(beta, w) in data.p.row(alpha) {
            if !is_outside[beta] {
                continue;
            }
            if let Some(joint) = data.coupling.0.get(&(alpha, beta)) {
                for &(ab, q) in joint {
                    *load.entry(ab).or_default() += q * w * pi[alpha];
                }
            }
        }
    }
    load
}

/// The comparison constant 𝒜: the largest routed load over P₀-edges,
/// relative to P₀(x, y)π₀(x). Edges are scanned x-major.
pub fn compute_a(data: &ComparisonData) -> Result<f64, ComparisonError> {
    for (a, b) in data.required_pairs() {
        if !data.flow.0.contains_key(&(a, b)) {
            return Err(ComparisonError::MissingFlow(a, b));
        }
    }
    let loads = pair_loads(data);
    let n0 = data.p0.len();
    let mut acc: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n0];
    for (&(a, b), &w) in &loads {
        if w == 0.0 {
            continue;
        }
        let paths = data
            .flow
            .0
            .get(&(a, b))
            .ok_or(ComparisonError::MissingFlow(a, b))?;
        for g in paths {
            let c = g.len() as f64 * g.weight * w;
            for e in g.states.windows(2) {
                *acc[e[0]].entry(e[1]).or_default() += c;
            }
        }
    }
    let pi0 = data.pi0.probs();
    let mut best = 0.0f64;
    for x in 0..n0 {
        for &(y, w) in data.p0.row(x) {
            let routed = acc[x].get(&y).copied().unwrap_or(0.0);
            best = best.max(routed / (w * pi0[x]));
        }
    }
    Ok(best)
}

/// f(x) = Σ Q_x(y) f₀(y).
pub fn extend_function(f0: &[f64], data: &ComparisonData) -> Result<Vec<f64>, ComparisonError> {
    check_len(data.p0.len(), f0.len())?;
    Ok(data
        .ext
        .0
        .iter()
        .map(|q| q.iter().map(|&(a, w)| w * f0[a]).sum())
        .collect())
}

/// The two finite points b⁻¹ − a₁ and −b⁻¹ − a₁ adjacent to ∞ under L.
pub fn exceptional_points(params: WalkParams, p: Modulus) -> [usize; 2] {
    let a1 = p.elem(params.a1);
    let b = p.elem(params.b());
    let pts = [b, -b].map(|t| match iota_bar(ProjPoint::Finite(t), p).shift(-a1) {
        ProjPoint::Finite(x) => x.value() as usize,
        ProjPoint::Infinity => unreachable!("b is invertible"),
    });
    pts
}

/// X₀ = F_p with L₀, X = P¹(F_p) with L, independent couplings and the
/// length-1/length-2 flow.
pub fn build_comparison_data(params: WalkParams, p: Modulus) -> Result<ComparisonData, ComparisonError> {
    build_instance(params, p, false)
}

fn build_instance(params: WalkParams, p: Modulus, swap: bool) -> Result<ComparisonData, ComparisonError> {
    let b = params.b();
    if p.get() as u128 <= b.unsigned_abs() as u128 {
        return Err(ComparisonError::ShiftTooLarge { b, p: p.get() });
    }
    let l0 = build_l0(params, p)?;
    let l = build_l(params, p)?;
    let n0 = p.size();
    let inf = n0;
    let hub = p.elem(-params.a1).value() as usize;
    let mut ex = exceptional_points(params, p);
    if swap {
        ex.swap(0, 1);
    }
    assert!(ex[0] != ex[1] && !ex.contains(&hub), "exceptional points collide");
    debug_assert_eq!(
        {
            let mut s: Vec<usize> = l.row(inf).iter().filter(|&&(y, _)| y != inf).map(|&(y, _)| y).collect();
            s.sort_unstable();
            s
        },
        {
            let mut s = ex.to_vec();
            s.sort_unstable();
            s
        }
    );
    let mut ext: Vec<Measure> = (0..n0).map(|x| vec![(x, 1.0)]).collect();
    ext.push(ex.iter().map(|&z| (z, 0.5)).collect());
    let ext = ExtensionMeasures(ext);
    let coupling = Coupling::independent(&l, &ext);

    let mut flow = Flow::default();
    for x in 0..n0 {
        for &(y, _) in l.row(x) {
            if y == inf {
                continue;
            }
            let path = if x == hub && y == hub {
                vec![hub, ex[0], hub]
            } else {
                vec![x, y]
            };
            flow.0.insert((x, y), vec![WeightedPath::single(path)]);
        }
    }
    for &x0 in &ex {
        for &y0 in &ex {
            flow.0
                .entry((x0, y0))
                .or_insert_with(|| vec![WeightedPath::single(vec![x0, hub, y0])]);
        }
    }
    let data = ComparisonData::new(
        l0,
        l,
        Dist::uniform(crate::kernels::Space::Fp(p)),
        Dist::uniform(crate::kernels::Space::P1(p)),
        (0..n0).collect(),
        ext,
        coupling,
        flow,
    )?;
    Ok(data)
}

#[derive(Clone, Debug, Serialize)]
pub struct ComparisonReport {
    pub p: u64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "A")]
    pub a: f64,
    pub u: f64,
    #[serde(rename = "gap_L")]
    pub gap_l: f64,
    #[serde(rename = "gap_L0")]
    pub gap_l0: f64,
    #[serde(rename = "gap_Q")]
    pub gap_q: f64,
    pub links_ok: bool,
    pub trials: usize,
    pub forms_ok: bool,
    /// 1 − λ₂(L₀) ≥ (1 − λ₂(L))/(C·𝒜).
    pub gap_transfer_ok: bool,
    /// First random f₀ violating a form inequality.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<f64>>,
}

impl ComparisonReport {
    pub fn ok(&self) -> bool {
        self.links_ok && self.forms_ok && self.gap_transfer_ok
    }
}

fn trial_holds(data: &ComparisonData, c: f64, a: f64, f0: &[f64]) -> Result<bool, ComparisonError> {
    let f = extend_function(f0, data)?;
    let e = dirichlet_form(&data.p, &data.pi, &f)?;
    let e0 = dirichlet_form(&data.p0, &data.pi0, f0)?;
    let v0 = variance_form(&data.pi0, f0)?;
    let v = variance_form(&data.pi, &f)?;
    Ok(e <= a * e0 + FORM_TOL && v0 <= c * v + FORM_TOL)
}

/// Checks the form inequalities on random f₀ (trial t seeded with
/// `seed + t`) and the chain of gap inequalities linking Q, L₀ and L.
pub fn verify_comparison(
    mu: &StepDist,
    params: WalkParams,
    p: Modulus,
    trials: usize,
    seed: u64,
) -> Result<ComparisonReport, ComparisonError> {
    let data = build_comparison_data(params, p)?;
    let c = compute_c(&data);
    let a = compute_a(&data)?;
    let n0 = data.p0.len();
    let outcomes: Vec<Result<Option<Vec<f64>>, ComparisonError>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(t as u64));
            let f0: Vec<f64> = (0..n0).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            Ok((!trial_holds(&data, c, a, &f0)?).then_some(f0))
        })
        .collect();
    let mut witness = None;
    for o in outcomes {
        if let Some(f0) = o? {
            witness.get_or_insert(f0);
        }
    }
    let q = build_q(mu, p)?;
    let u = decompose_ul0(&q, &data.p0)?.u;
    let gap_l = spectral_gap(&data.p)?;
    let gap_l0 = spectral_gap(&data.p0)?;
    let gap_q = spectral_gap(&q)?;
    let gap_transfer_ok = gap_l0 >= gap_l / (c * a) - LINK_TOL;
    let links_ok = gap_q >= u * gap_l0 - LINK_TOL
        && u * gap_l0 >= u / (c * a) * gap_l - LINK_TOL;
    Ok(ComparisonReport {
        p: p.get(),
        c,
        a,
        u,
        gap_l,
        gap_l0,
        gap_q,
        links_ok,
        trials,
        forms_ok: witness.is_none(),
        gap_transfer_ok,
        witness,
    })
}
