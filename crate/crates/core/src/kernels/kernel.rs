use serde::{Deserialize, Serialize};

use super::KernelError;
use crate::ffield::Modulus;

/// Row sums must be within this of 1 for constructed kernels.
pub const ROW_TOL: f64 = 1e-12;

/// The labeled index set a kernel lives on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Space {
    /// F_p, indices are residues.
    Fp(Modulus),
    /// P¹(F_p), index p is ∞.
    P1(Modulus),
    /// The subgroup of SL₂(F_p) enumerated by a Cayley closure.
    Sl2 { p: Modulus, order: usize },
    /// An unlabeled set of `n` states.
    Generic(usize),
}

impl Space {
    pub fn len(&self) -> usize {
        match self {
            Space::Fp(p) => p.size(),
            Space::P1(p) => p.size() + 1,
            Space::Sl2 { order, .. } => *order,
            Space::Generic(n) => *n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Space::Fp(_) => "Fp",
            Space::P1(_) => "P1",
            Space::Sl2 { .. } => "SL2",
            Space::Generic(_) => "Generic",
        }
    }

    pub fn modulus(&self) -> Option<Modulus> {
        match self {
            Space::Fp(p) | Space::P1(p) | Space::Sl2 { p, .. } => Some(*p),
            Space::Generic(_) => None,
        }
    }
}

/// A row-stochastic sparse matrix. Rows are sorted by column with no
/// duplicate or zero entries.
#[derive(Clone, Debug)]
pub struct Kernel {
    space: Space,
    rows: Vec<Vec<(usize, f64)>>,
    symmetric: bool,
}

impl Kernel {
    /// Builds a kernel from raw rows; duplicate columns within a row are
    /// summed and exact zeros dropped.
    pub fn from_rows(space: Space, rows: Vec<Vec<(usize, f64)>>) -> Result<Self, KernelError> {
        Kernel::from_rows_tol(space, rows, ROW_TOL)
    }

    pub(crate) fn from_rows_tol(
        space: Space,
        rows: Vec<Vec<(usize, f64)>>,
        tol: f64,
    ) -> Result<Self, KernelError> {
        let n = space.len();
        if rows.len() != n {
            return Err(KernelError::SizeMismatch {
                expected: n,
                found: rows.len(),
            });
        }
        let mut out = Vec::with_capacity(n);
        for (i, mut row) in rows.into_iter().enumerate() {
            row.sort_by_key(|&(j, _)| j);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for (j, q) in row {
                if j >= n {
                    return Err(KernelError::ColumnOutOfRange { row: i, col: j });
                }
                if !(q >= 0.0) {
                    return Err(KernelError::NegativeEntry { row: i, col: j });
                }
                match merged.last_mut() {
                    Some((lj, lq)) if *lj == j => *lq += q,
                    _ => merged.push((j, q)),
                }
            }
            merged.retain(|&(_, q)| q != 0.0);
            let sum: f64 = merged.iter().map(|&(_, q)| q).sum();
            if (sum - 1.0).abs() > tol {
                return Err(KernelError::RowSum { row: i, sum });
            }
            out.push(merged);
        }
        Ok(Kernel {
            space,
            rows: out,
            symmetric: false,
        })
    }

    pub fn identity(space: Space) -> Self {
        let rows = (0..space.len()).map(|i| vec![(i, 1.0)]).collect();
        Kernel {
            space,
            rows,
            symmetric: true,
        }
    }

    /// Every entry 1/N.
    pub fn complete_uniform(space: Space) -> Self {
        let n = space.len();
        let q = 1.0 / n as f64;
        let rows = (0..n).map(|_| (0..n).map(|j| (j, q)).collect()).collect();
        Kernel {
            space,
            rows,
            symmetric: true,
        }
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<(usize, f64)>] {
        &self.rows
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let row = &self.rows[i];
        row.binary_search_by_key(&j, |&(c, _)| c)
            .map(|k| row[k].1)
            .unwrap_or(0.0)
    }

    /// True once the symmetry flag has been checked and set.
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// max |K(x,y) − K(y,x)| over all pairs.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, q) in row {
                worst = worst.max((q - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Verifies K = Kᵀ within `tol` and sets the symmetry flag.
    pub fn check_symmetric(mut self, tol: f64) -> Result<Self, KernelError> {
        let asym = self.asymmetry();
        if asym > tol {
            return Err(KernelError::NotSymmetric(asym));
        }
        self.symmetric = true;
        Ok(self)
    }

    pub fn max_row_error(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| (r.iter().map(|&(_, q)| q).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.len()];
        for row in &self.rows {
            for &(j, q) in row {
                sums[j] += q;
            }
        }
        sums
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.len();
        let mut a = vec![0.0; n * n];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, q) in row {
                a[i * n + j] = q;
            }
        }
        a
    }

    /// Row vector times kernel: (vK)(y) = Σ_x v(x) K(x, y).
    pub fn apply_left(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.len());
        let mut out = vec![0.0; v.len()];
        for (x, row) in self.rows.iter().enumerate() {
            let vx = v[x];
            if vx == 0.0 {
                continue;
            }
            for &(y, q) in row {
                out[y] += vx * q;
            }
        }
        out
    }

    /// Kernel times column vector: (Kf)(x) = Σ_y K(x, y) f(y).
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        assert_eq!(f.len(), self.len());
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(y, q)| q * f[y]).sum())
            .collect()
    }

    /// Serializable form `{"space", "p", "rows": [[[col, prob], ...], ...]}`.
    pub fn to_doc(&self) -> KernelDoc {
        KernelDoc {
            space: self.space.tag().to_string(),
            p: self.space.modulus().map(Modulus::get),
            rows: self.rows.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_doc()).expect("kernel serializes")
    }
}

/// JSON document for kernel dumps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelDoc {
    pub space: String,
    pub p: Option<u64>,
    pub rows: Vec<Vec<(usize, f64)>>,
}

fn check_same_space(k1: &Kernel, k2: &Kernel) -> Result<(), KernelError> {
    if k1.space != k2.space {
        return Err(KernelError::SpaceMismatch(
            format!("{:?}", k1.space),
            format!("{:?}", k2.space),
        ));
    }
    Ok(())
}

/// Entrywise equality; the cached symmetry flag is ignored.
impl PartialEq for Kernel {
    fn eq(&self, other: &Self) -> bool {
        self.space == other.space && self.rows == other.rows
    }
}

/// Sequential composition: first a step of `k1`, then a step of `k2`,
/// i.e. the matrix product k1·k2.
pub fn compose(k1: &Kernel, k2: &Kernel) -> Result<Kernel, KernelError> {
    check_same_space(k1, k2)?;
    let n = k1.len();
    let mut acc = vec![0.0f64; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut rows = Vec::with_capacity(n);
    for row in &k1.rows {
        for &(y, q) in row {
            for &(z, r) in &k2.rows[y] {
                if acc[z] == 0.0 {
                    touched.push(z);
                }
                acc[z] += q * r;
            }
        }
        touched.sort_unstable();
        let out: Vec<(usize, f64)> = touched.iter().map(|&z| (z, acc[z])).collect();
        for &z in &touched {
            acc[z] = 0.0;
        }
        touched.clear();
        rows.push(out);
    }
    Kernel::from_rows(k1.space.clone(), rows)
}

/// Matrix transpose. Only doubly stochastic kernels have a stochastic
/// transpose; anything else is rejected by the row-sum check.
pub fn transpose(k: &Kernel) -> Result<Kernel, KernelError> {
    let n = k.len();
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (i, row) in k.rows.iter().enumerate() {
        for &(j, q) in row {
            rows[j].push((i, q));
        }
    }
    let mut t = Kernel::from_rows(k.space.clone(), rows)?;
    t.symmetric = k.symmetric;
    Ok(t)
}
