//! The concrete kernels of the fractional walk and its comparison chains.

use super::{compose, reduce_mod_p, transpose, Kernel, KernelError, Space, StepDist};
use crate::ffield::{iota, iota_bar, Modulus, ProjPoint};

/// Largest weight the decomposition Q = u·L₀ + (1 − u)·L′ may put on L₀.
pub const U_MAX: f64 = 0.999_999;

/// Tolerance for the rescaled remainder L′.
pub const REMAINDER_TOL: f64 = 1e-10;

/// X ↦ X + ε on F_p.
pub fn build_p(mu: &StepDist, p: Modulus) -> Kernel {
    let mu_p = reduce_mod_p(mu, p);
    let steps: Vec<(usize, f64)> = mu_p
        .probs()
        .iter()
        .enumerate()
        .filter(|(_, &q)| q > 0.0)
        .map(|(e, &q)| (e, q))
        .collect();
    let n = p.size();
    let rows = (0..n)
        .map(|x| steps.iter().map(|&(e, q)| ((x + e) % n, q)).collect())
        .collect();
    Kernel::from_rows(Space::Fp(p), rows).expect("translation kernel is stochastic")
}

/// The permutation kernel of ι.
pub fn build_pi(p: Modulus) -> Kernel {
    let rows = p
        .elements()
        .map(|x| vec![(iota(x).value() as usize, 1.0)])
        .collect();
    Kernel::from_rows(Space::Fp(p), rows)
        .expect("permutation kernel is stochastic")
        .check_symmetric(0.0)
        .expect("ι is an involution")
}

/// The fractional walk X ↦ ι(X) + ε: K(x, y) = μ_p(y − ι(x)).
pub fn build_k(mu: &StepDist, p: Modulus) -> Kernel {
    compose(&build_pi(p), &build_p(mu, p)).expect("same space")
}

/// The symmetrization of the fractional walk: apply P, Π, P, then Pᵀ, Π, Pᵀ.
///
/// With A = P·Π·P (row-stochastic products, left factor acts first) this is
/// A·Aᵀ. It is symmetric, doubly stochastic and positive semidefinite, and
/// contains every move of [`build_l0`] with positive probability.
pub fn build_q(mu: &StepDist, p: Modulus) -> Result<Kernel, KernelError> {
    let support = reduce_mod_p(mu, p).probs().iter().filter(|&&q| q > 0.0).count();
    if support < 2 {
        return Err(KernelError::DegenerateStep(support));
    }
    let a = symmetrization_factor(mu, p);
    compose(&a, &transpose(&a)?)?.check_symmetric(ROW_SYM_TOL)
}

const ROW_SYM_TOL: f64 = 1e-12;

/// A = P·Π·P, the factor of Q.
pub fn symmetrization_factor(mu: &StepDist, p: Modulus) -> Kernel {
    let pk = build_p(mu, p);
    let pi = build_pi(p);
    compose(&compose(&pk, &pi).expect("same space"), &pk).expect("same space")
}

/// The two support points of μ driving the comparison chains, with
/// b = a₁ − a₂.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WalkParams {
    pub a1: i64,
    pub a2: i64,
}

impl WalkParams {
    pub fn new(a1: i64, a2: i64) -> Result<Self, KernelError> {
        if a1 == a2 {
            return Err(KernelError::DegenerateParams);
        }
        Ok(WalkParams { a1, a2 })
    }

    /// Parameters from a₁ and the shift b directly (a₂ = a₁ − b).
    pub fn from_shift(a1: i64, b: i64) -> Result<Self, KernelError> {
        WalkParams::new(a1, a1 - b)
    }

    /// Picks the two support points of largest mass (ties to the smaller
    /// value). The larger of the two becomes a₁, so b > 0.
    pub fn choose(mu: &StepDist) -> Result<Self, KernelError> {
        if mu.len() < 2 {
            return Err(KernelError::DegenerateStep(mu.len()));
        }
        let mut ranked: Vec<(i64, f64)> = mu.iter().collect();
        ranked.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
        let (x, y) = (ranked[0].0, ranked[1].0);
        WalkParams::new(x.max(y), x.min(y))
    }

    pub fn b(&self) -> i64 {
        self.a1 - self.a2
    }

    fn check(&self, p: Modulus) -> Result<(), KernelError> {
        if p.elem(self.b()).is_zero() {
            return Err(KernelError::ShiftVanishes {
                b: self.b(),
                p: p.get(),
            });
        }
        Ok(())
    }
}

/// The four moves x + b, x − b, ι(ι(x + a₁) + b) − a₁, ι(ι(x + a₁) − b) − a₁
/// on F_p, each with probability 1/4. Coinciding moves accumulate.
pub fn build_l0(params: WalkParams, p: Modulus) -> Result<Kernel, KernelError> {
    params.check(p)?;
    let a1 = p.elem(params.a1);
    let b = p.elem(params.b());
    let rows = p
        .elements()
        .map(|x| {
            let y = x + a1;
            [
                x + b,
                x - b,
                iota(iota(y) + b) - a1,
                iota(iota(y) - b) - a1,
            ]
            .into_iter()
            .map(|z| (z.value() as usize, 0.25))
            .collect()
        })
        .collect();
    Kernel::from_rows(Space::Fp(p), rows)?.check_symmetric(0.0)
}

/// The same four moves on P¹(F_p) with ῑ in place of ι; ∞ ± b = ∞.
pub fn build_l(params: WalkParams, p: Modulus) -> Result<Kernel, KernelError> {
    params.check(p)?;
    let a1 = p.elem(params.a1);
    let b = p.elem(params.b());
    let rows = p
        .proj_points()
        .map(|x| {
            let y = iota_bar(x.shift(a1), p);
            [
                x.shift(b),
                x.shift(-b),
                iota_bar(y.shift(b), p).shift(-a1),
                iota_bar(y.shift(-b), p).shift(-a1),
            ]
            .into_iter()
            .map(|z: ProjPoint| (z.index(p), 0.25))
            .collect()
        })
        .collect();
    Kernel::from_rows(Space::P1(p), rows)?.check_symmetric(0.0)
}

/// Q = u·L₀ + (1 − u)·L′ with L′ symmetric stochastic.
#[derive(Clone, Debug)]
pub struct Decomposition {
    /// Largest t with Q − t·L₀ ≥ 0 entrywise, capped at [`U_MAX`].
    pub u: f64,
    pub remainder: Kernel,
    pub capped: bool,
}

/// Splits off the largest multiple of `l0` that fits under `q` entrywise.
pub fn decompose_ul0(q: &Kernel, l0: &Kernel) -> Result<Decomposition, KernelError> {
    if q.space() != l0.space() {
        return Err(KernelError::SpaceMismatch(
            format!("{:?}", q.space()),
            format!("{:?}", l0.space()),
        ));
    }
    if !q.is_symmetric() || !l0.is_symmetric() {
        return Err(KernelError::NotSymmetric(q.asymmetry().max(l0.asymmetry())));
    }
    let mut u = f64::INFINITY;
    for (x, row) in l0.rows().iter().enumerate() {
        for &(y, w) in row {
            u = u.min(q.get(x, y) / w);
        }
    }
    if !(u > 0.0) {
        return Err(KernelError::NoDecomposition);
    }
    let capped = u > U_MAX;
    let u = u.min(U_MAX);
    let scale = 1.0 / (1.0 - u);
    let rows = (0..q.len())
        .map(|x| {
            let mut row: Vec<(usize, f64)> = q.row(x).to_vec();
            for &(y, w) in l0.row(x) {
                let slot = row
                    .iter_mut()
                    .find(|(c, _)| *c == y)
                    .expect("every L0 edge is a Q edge when u > 0");
                slot.1 -= u * w;
            }
            row.into_iter()
                .map(|(y, v)| (y, (v * scale).max(0.0)))
                .collect()
        })
        .collect();
    let remainder = Kernel::from_rows_tol(q.space().clone(), rows, REMAINDER_TOL)?
        .check_symmetric(REMAINDER_TOL)?;
    Ok(Decomposition {
        u,
        remainder,
        capped,
    })
}
