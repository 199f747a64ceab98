//! Spectra of symmetric kernels, bottleneck ratios and the quotient check
//! between L and the Cayley walk.

mod cut;
mod dense;
mod iterative;

use serde::Serialize;
use thiserror::Error;

use crate::kernels::Kernel;

pub use cut::{bottleneck_ratio, cheeger_holds, CutMode, CutReport, EXHAUSTIVE_MAX};

/// Largest state count handled by the dense solver.
pub const DENSE_MAX: usize = 4000;
/// Bound on ‖Kv − λv‖₂ for every reported pair.
pub const RESIDUAL_TOL: f64 = 1e-8;
/// Eigenvalues above 1 − this count as 1.
pub const UNIT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("kernel is not flagged symmetric (max deviation {0:e})")]
    NotSymmetric(f64),
    #[error("dense mode handles at most {max} states, got {n}")]
    TooLarge { n: usize, max: usize },
    #[error("exhaustive cut search handles at most {max} states, got {n}")]
    CutTooLarge { n: usize, max: usize },
    #[error("QL iteration did not converge")]
    QlFailure,
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("eigen-residual {0:e} exceeds {RESIDUAL_TOL:e}")]
    Residual(f64),
    #[error("leading eigenvalue {0} is not 1")]
    Perron(f64),
    #[error("eigenvalue {eigenvalue} of L has no partner within {tol:e} (nearest at distance {distance:e})")]
    Containment {
        eigenvalue: f64,
        distance: f64,
        tol: f64,
    },
    #[error("kernel has fewer than two states")]
    TooSmall,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Dense,
    Iterative,
}

impl Method {
    /// Dense up to [`DENSE_MAX`] states, iterative above.
    pub fn auto(n: usize) -> Method {
        if n <= DENSE_MAX {
            Method::Dense
        } else {
            Method::Iterative
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Dense => "dense",
            Method::Iterative => "iterative",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralReport {
    pub p: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel: Option<String>,
    pub states: usize,
    pub lambda2: f64,
    pub gap: f64,
    pub method: Method,
    pub residual: f64,
    /// Number of computed eigenvalues within [`UNIT_TOL`] of 1.
    pub multiplicity_one: usize,
    pub disconnected: bool,
    /// 1 − (largest computed eigenvalue below 1 − [`UNIT_TOL`]).
    pub restricted_gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    /// Descending; all of them in dense mode, the top k otherwise.
    #[serde(skip)]
    pub eigenvalues: Vec<f64>,
    /// Unit eigenvectors for the leading pairs.
    #[serde(skip)]
    pub vectors: Vec<Vec<f64>>,
}

impl SpectralReport {
    pub fn labeled(mut self, kernel: &str) -> Self {
        self.kernel = Some(kernel.to_string());
        self
    }

    pub fn smallest(&self) -> f64 {
        *self.eigenvalues.last().expect("nonempty spectrum")
    }
}

fn residual_of(k: &Kernel, lambda: f64, v: &[f64]) -> f64 {
    k.apply(v)
        .iter()
        .zip(v)
        .map(|(a, b)| (a - lambda * b).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Eigen-decomposition of a symmetric kernel. `pairs` is the number of
/// leading eigenvectors to compute and check (at least two are always
/// computed when the space allows).
pub fn eigen_sym(k: &Kernel, method: Method, pairs: usize) -> Result<SpectralReport, SpectralError> {
    if !k.is_symmetric() {
        return Err(SpectralError::NotSymmetric(k.asymmetry()));
    }
    let n = k.len();
    if n == 0 {
        return Err(SpectralError::TooSmall);
    }
    let pairs = pairs.max(2).min(n);
    let (eigenvalues, vectors, iterations) = match method {
        Method::Dense => {
            if n > DENSE_MAX {
                return Err(SpectralError::TooLarge { n, max: DENSE_MAX });
            }
            let (values, vectors) =
                dense::eigh(k.to_dense(), n, pairs).ok_or(SpectralError::QlFailure)?;
            (values, vectors, None)
        }
        Method::Iterative => {
            let out = iterative::top_eigenpairs(k, pairs);
            if !out.converged {
                return Err(SpectralError::NonConvergence {
                    iterations: out.iterations,
                    residual: out.residual,
                });
            }
            (out.values, out.vectors, Some(out.iterations))
        }
    };
    let residual = vectors
        .iter()
        .zip(&eigenvalues)
        .map(|(v, &l)| residual_of(k, l, v))
        .fold(0.0, f64::max);
    if !(residual <= RESIDUAL_TOL) {
        return Err(SpectralError::Residual(residual));
    }
    if (eigenvalues[0] - 1.0).abs() > UNIT_TOL {
        return Err(SpectralError::Perron(eigenvalues[0]));
    }
    let lambda2 = eigenvalues.get(1).copied().unwrap_or(0.0);
    let multiplicity_one = eigenvalues.iter().filter(|&&l| l >= 1.0 - UNIT_TOL).count();
    let restricted_gap = eigenvalues
        .iter()
        .find(|&&l| l < 1.0 - UNIT_TOL)
        .map(|l| 1.0 - l);
    Ok(SpectralReport {
        p: k.space().modulus().map(|m| m.get()),
        kernel: None,
        states: n,
        lambda2,
        gap: 1.0 - lambda2,
        method,
        residual,
        multiplicity_one,
        disconnected: multiplicity_one >= 2,
        restricted_gap,
        iterations,
        eigenvalues,
        vectors,
    })
}

/// 1 − λ₂, solved densely when small enough.
pub fn spectral_gap(k: &Kernel) -> Result<f64, SpectralError> {
    eigen_sym(k, Method::auto(k.len()), 2).map(|r| r.gap)
}

#[derive(Clone, Debug, Serialize)]
pub struct QuotientReport {
    pub quotient_states: usize,
    pub cover_states: usize,
    /// Largest distance from an eigenvalue of L to the cover spectrum.
    pub worst_mismatch: f64,
    pub lambda2_quotient: f64,
    pub lambda2_cover: f64,
}

/// Checks that every eigenvalue of `l` lies within `tol` of an eigenvalue
/// of `cover`.
pub fn quotient_spectrum_check(
    l: &Kernel,
    cover: &Kernel,
    tol: f64,
) -> Result<QuotientReport, SpectralError> {
    let ls = eigen_sym(l, Method::Dense, 2)?;
    let cs = eigen_sym(cover, Method::Dense, 2)?;
    // cover spectrum ascending for binary search
    let mut sorted = cs.eigenvalues.clone();
    sorted.reverse();
    let mut worst = (0.0f64, f64::NAN);
    for &lambda in &ls.eigenvalues {
        let i = sorted.partition_point(|&x| x < lambda);
        let mut d = f64::INFINITY;
        if i < sorted.len() {
            d = d.min(sorted[i] - lambda);
        }
        if i > 0 {
            d = d.min(lambda - sorted[i - 1]);
        }
        if d > worst.0 || worst.1.is_nan() {
            worst = (d, lambda);
        }
    }
    if worst.0 > tol {
        return Err(SpectralError::Containment {
            eigenvalue: worst.1,
            distance: worst.0,
            tol,
        });
    }
    Ok(QuotientReport {
        quotient_states: l.len(),
        cover_states: cover.len(),
        worst_mismatch: worst.0,
        lambda2_quotient: ls.lambda2,
        lambda2_cover: cs.lambda2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffield::{generator_set, Modulus};
    use crate::kernels::{build_cayley, build_l, build_q, Space, StepDist, WalkParams};

    #[test]
    fn identity_and_complete() {
        let id = Kernel::identity(Space::Generic(9));
        let r = eigen_sym(&id, Method::Dense, 2).unwrap();
        assert!(r.eigenvalues.iter().all(|&l| (l - 1.0).abs() < 1e-15));
        assert_eq!(r.lambda2, 1.0);
        assert_eq!(r.gap, 0.0);
        assert!(r.disconnected);
        assert_eq!(r.multiplicity_one, 9);
        assert_eq!(r.restricted_gap, None);

        let c = Kernel::complete_uniform(Space::Generic(9));
        let r = eigen_sym(&c, Method::Dense, 2).unwrap();
        assert!(r.lambda2.abs() < 1e-12);
        assert!((spectral_gap(&c).unwrap() - 1.0).abs() < 1e-12);
        assert!(!r.disconnected);
    }

    #[test]
    fn dense_and_iterative_agree() {
        let p = Modulus::new(5).unwrap();
        let q = build_q(&StepDist::u01(), p).unwrap();
        let d = eigen_sym(&q, Method::Dense, 2).unwrap();
        let i = eigen_sym(&q, Method::Iterative, 2).unwrap();
        assert!((d.lambda2 - i.lambda2).abs() < 1e-8);
        assert!(i.residual < 1e-10);
        assert_eq!(i.method, Method::Iterative);
    }

    #[test]
    fn iterative_on_larger_q() {
        let p = Modulus::new(211).unwrap();
        let q = build_q(&StepDist::u_101(), p).unwrap();
        let d = eigen_sym(&q, Method::Dense, 3).unwrap();
        let i = eigen_sym(&q, Method::Iterative, 3).unwrap();
        for j in 0..3 {
            assert!((d.eigenvalues[j] - i.eigenvalues[j]).abs() < 1e-8);
        }
    }

    #[test]
    fn rejects_unflagged() {
        let p = Modulus::new(5).unwrap();
        let k = crate::kernels::build_k(&StepDist::u01(), p);
        assert!(matches!(
            eigen_sym(&k, Method::Dense, 2),
            Err(SpectralError::NotSymmetric(_))
        ));
    }

    #[test]
    fn quotient_containment_p5_p7() {
        for (pv, a1) in [(5u64, 0i64), (7, 1)] {
            let p = Modulus::new(pv).unwrap();
            let params = WalkParams::from_shift(a1, 1).unwrap();
            let l = build_l(params, p).unwrap();
            let cay = build_cayley(&generator_set(a1, 1, p).unwrap(), p);
            assert_eq!(cay.order(), p.sl2_order());
            let r = quotient_spectrum_check(&l, &cay.kernel, 1e-7).unwrap();
            assert_eq!(r.quotient_states, pv as usize + 1);
            assert!(r.worst_mismatch <= 1e-7);
            assert!(r.lambda2_quotient <= r.lambda2_cover + 1e-7);
        }
    }
}
