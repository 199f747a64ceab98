use std::fmt;
use std::str::FromStr;

use super::{KernelError, Space};
use crate::ffield::Modulus;

const MASS_TOL: f64 = 1e-12;

/// A finitely supported probability measure on the integers: the law of
/// the additive noise.
#[derive(Clone, Debug, PartialEq)]
pub struct StepDist {
    support: Vec<i64>,
    probs: Vec<f64>,
}

impl StepDist {
    /// Builds a step law from `(value, probability)` pairs. Values must be
    /// distinct, probabilities positive and summing to one.
    pub fn new(pairs: impl IntoIterator<Item = (i64, f64)>) -> Result<Self, KernelError> {
        let mut pairs: Vec<(i64, f64)> = pairs.into_iter().collect();
        if pairs.is_empty() {
            return Err(KernelError::EmptySupport);
        }
        pairs.sort_by_key(|&(v, _)| v);
        for w in pairs.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(KernelError::DuplicateSupport(w[0].0));
            }
        }
        if let Some(&(v, q)) = pairs.iter().find(|(_, q)| !(*q > 0.0) || !q.is_finite()) {
            return Err(KernelError::BadProbability { value: v, prob: q });
        }
        let total: f64 = pairs.iter().map(|(_, q)| q).sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(KernelError::MassNotOne(total));
        }
        let (support, probs) = pairs.into_iter().unzip();
        Ok(StepDist { support, probs })
    }

    pub fn uniform(values: &[i64]) -> Result<Self, KernelError> {
        let q = 1.0 / values.len() as f64;
        StepDist::new(values.iter().map(|&v| (v, q)))
    }

    pub fn point(value: i64) -> Self {
        StepDist {
            support: vec![value],
            probs: vec![1.0],
        }
    }

    /// Uniform on {0, 1}.
    pub fn u01() -> Self {
        StepDist::uniform(&[0, 1]).expect("valid preset")
    }

    /// Uniform on {−1, 0, 1}.
    pub fn u_101() -> Self {
        StepDist::uniform(&[-1, 0, 1]).expect("valid preset")
    }

    pub fn support(&self) -> &[i64] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.support.iter().copied().zip(self.probs.iter().copied())
    }

    pub fn mass(&self, value: i64) -> f64 {
        self.support
            .binary_search(&value)
            .map(|i| self.probs[i])
            .unwrap_or(0.0)
    }
}

/// Parses `u01`, `u-101`, or a comma-separated list of `value:prob` pairs.
impl FromStr for StepDist {
    type Err = KernelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "u01" => return Ok(StepDist::u01()),
            "u-101" => return Ok(StepDist::u_101()),
            _ => {}
        }
        let mut pairs = Vec::new();
        for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let bad = || KernelError::Parse(item.to_string());
            let (v, q) = item.split_once(':').ok_or_else(bad)?;
            let v: i64 = v.trim().parse().map_err(|_| bad())?;
            let q: f64 = q.trim().parse().map_err(|_| bad())?;
            pairs.push((v, q));
        }
        StepDist::new(pairs)
    }
}

impl fmt::Display for StepDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.iter().map(|(v, q)| format!("{v}:{q}")).collect();
        f.write_str(&parts.join(","))
    }
}

/// A dense probability vector over a state space.
#[derive(Clone, Debug, PartialEq)]
pub struct Dist {
    space: Space,
    probs: Vec<f64>,
}

impl Dist {
    pub fn new(space: Space, probs: Vec<f64>) -> Result<Self, KernelError> {
        if probs.len() != space.len() {
            return Err(KernelError::SizeMismatch {
                expected: space.len(),
                found: probs.len(),
            });
        }
        if let Some(i) = probs.iter().position(|&q| !(q >= 0.0)) {
            return Err(KernelError::NegativeEntry { row: i, col: i });
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(KernelError::MassNotOne(total));
        }
        Ok(Dist { space, probs })
    }

    /// Wraps a vector produced by mass-preserving operations.
    pub(crate) fn from_raw(space: Space, probs: Vec<f64>) -> Self {
        debug_assert_eq!(space.len(), probs.len());
        Dist { space, probs }
    }

    pub fn point(space: Space, state: usize) -> Self {
        let mut probs = vec![0.0; space.len()];
        probs[state] = 1.0;
        Dist { space, probs }
    }

    pub fn uniform(space: Space) -> Self {
        let n = space.len();
        Dist {
            probs: vec![1.0 / n as f64; n],
            space,
        }
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Natural-log Shannon entropy with 0 log 0 = 0.
    pub fn entropy(&self) -> f64 {
        shannon(&self.probs)
    }
}

pub(crate) fn shannon(probs: &[f64]) -> f64 {
    probs
        .iter()
        .filter(|&&q| q > 0.0)
        .map(|&q| -q * q.ln())
        .sum()
}

/// Folds the step law onto F_p: mass at r is the total mass of all k ≡ r.
pub fn reduce_mod_p(mu: &StepDist, p: Modulus) -> Dist {
    let mut probs = vec![0.0; p.size()];
    for (v, q) in mu.iter() {
        probs[p.elem(v).value() as usize] += q;
    }
    Dist::from_raw(Space::Fp(p), probs)
}
