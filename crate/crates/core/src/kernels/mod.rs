//! Markov kernels on F_p, P¹(F_p) and subgroups of SL₂(F_p).

mod cayley;
mod kernel;
mod step;
mod walks;

use thiserror::Error;

pub use cayley::{build_cayley, CayleyWalk};
pub use kernel::{compose, transpose, Kernel, KernelDoc, Space, ROW_TOL};
pub use step::{reduce_mod_p, Dist, StepDist};
pub(crate) use step::shannon;
pub use walks::{
    build_k, build_l, build_l0, build_p, build_pi, build_q, decompose_ul0,
    symmetrization_factor, Decomposition, WalkParams, REMAINDER_TOL, U_MAX,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("step distribution has empty support")]
    EmptySupport,
    #[error("support point {0} listed twice")]
    DuplicateSupport(i64),
    #[error("probability {prob} at {value} is not positive and finite")]
    BadProbability { value: i64, prob: f64 },
    #[error("total mass {0} is not 1")]
    MassNotOne(f64),
    #[error("cannot parse step distribution item {0:?}")]
    Parse(String),
    #[error("expected {expected} entries, found {found}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("negative or NaN entry at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize },
    #[error("column {col} out of range in row {row}")]
    ColumnOutOfRange { row: usize, col: usize },
    #[error("row {row} sums to {sum}")]
    RowSum { row: usize, sum: f64 },
    #[error("kernel is not symmetric (max deviation {0:e})")]
    NotSymmetric(f64),
    #[error("state spaces differ: {0} vs {1}")]
    SpaceMismatch(String, String),
    #[error("step law reduced mod p has {0} support point(s), need at least 2")]
    DegenerateStep(usize),
    #[error("a1 and a2 must differ")]
    DegenerateParams,
    #[error("shift b = {b} vanishes mod {p}")]
    ShiftVanishes { b: i64, p: u64 },
    #[error("some L0 edge is absent from Q, so u = 0")]
    NoDecomposition,
}
