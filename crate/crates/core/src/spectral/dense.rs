//! Dense symmetric eigensolver: Householder tridiagonalization, implicit QL
//! for the eigenvalues, inverse iteration for selected eigenvectors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const QL_MAX_ITER: usize = 60;
const INVERSE_ITERATIONS: usize = 5;
const START_SEED: u64 = 0x7269_6e76;

struct Reflector {
    start: usize,
    v: Vec<f64>,
    beta: f64,
}

pub(crate) struct Tridiagonal {
    pub diag: Vec<f64>,
    /// `off[i]` couples `i` and `i + 1`.
    pub off: Vec<f64>,
    reflectors: Vec<Reflector>,
}

/// Reduces the row-major symmetric `n × n` matrix to tridiagonal form
/// T = Hᵀ A H, keeping the reflectors of H.
pub(crate) fn tridiagonalize(mut a: Vec<f64>, n: usize) -> Tridiagonal {
    assert_eq!(a.len(), n * n);
    let mut off = vec![0.0; n.saturating_sub(1)];
    let mut reflectors = Vec::new();
    for k in 0..n.saturating_sub(2) {
        let start = k + 1;
        let m = n - start;
        let x: Vec<f64> = (start..n).map(|i| a[i * n + k]).collect();
        let tail: f64 = x[1..].iter().map(|t| t * t).sum();
        if tail == 0.0 {
            off[k] = x[0];
            continue;
        }
        let sigma = (x[0] * x[0] + tail).sqrt();
        let alpha = if x[0] >= 0.0 { -sigma } else { sigma };
        let mut v = x;
        v[0] -= alpha;
        // vᵀv = 2σ(σ + |x₀|) = 2σ|v₀|
        let beta = 1.0 / (sigma * v[0].abs());
        off[k] = alpha;

        let block = &mut a[start * n..];
        let p: Vec<f64> = block
            .par_chunks(n)
            .with_min_len(32)
            .map(|row| beta * dot(&row[start..], &v))
            .collect();
        let kappa = 0.5 * beta * dot(&p, &v);
        let w: Vec<f64> = p.iter().zip(&v).map(|(pi, vi)| pi - kappa * vi).collect();
        block
            .par_chunks_mut(n)
            .with_min_len(32)
            .enumerate()
            .for_each(|(i, row)| {
                let (vi, wi) = (v[i], w[i]);
                for (j, slot) in row[start..].iter_mut().enumerate() {
                    *slot -= vi * w[j] + wi * v[j];
                }
            });
        debug_assert_eq!(m, v.len());
        reflectors.push(Reflector { start, v, beta });
    }
    if n >= 2 {
        off[n - 2] = a[(n - 1) * n + n - 2];
    }
    let diag = (0..n).map(|i| a[i * n + i]).collect();
    Tridiagonal {
        diag,
        off,
        reflectors,
    }
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

impl Tridiagonal {
    /// Maps an eigenvector of T back to one of A.
    pub fn back_transform(&self, y: &mut [f64]) {
        for r in self.reflectors.iter().rev() {
            let seg = &mut y[r.start..];
            let s = r.beta * dot(seg, &r.v);
            for (t, vi) in seg.iter_mut().zip(&r.v) {
                *t -= s * vi;
            }
        }
    }

    fn one_norm(&self) -> f64 {
        let n = self.diag.len();
        (0..n)
            .map(|i| {
                let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
                let right = if i + 1 < n { self.off[i].abs() } else { 0.0 };
                self.diag[i].abs() + left + right
            })
            .fold(0.0, f64::max)
    }

    /// All eigenvalues, descending. `None` if QL fails to converge.
    pub fn eigenvalues(&self) -> Option<Vec<f64>> {
        let mut d = self.diag.clone();
        let n = d.len();
        let mut e = self.off.clone();
        e.push(0.0);
        for l in 0..n {
            let mut iter = 0;
            loop {
                let mut m = l;
                while m + 1 < n {
                    let dd = d[m].abs() + d[m + 1].abs();
                    if e[m].abs() <= f64::EPSILON * dd {
                        break;
                    }
                    m += 1;
                }
                if m == l {
                    break;
                }
                iter += 1;
                if iter > QL_MAX_ITER {
                    return None;
                }
                let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                let mut r = g.hypot(1.0);
                g = d[m] - d[l] + e[l] / (g + r.copysign(g));
                let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
                let mut deflated = false;
                for i in (l..m).rev() {
                    let f = s * e[i];
                    let b = c * e[i];
                    r = f.hypot(g);
                    e[i + 1] = r;
                    if r == 0.0 {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        deflated = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                }
                if deflated {
                    continue;
                }
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        }
        d.sort_by(|a, b| b.total_cmp(a));
        Some(d)
    }

    /// Unit eigenvectors of T for the given eigenvalues (descending order).
    /// Close eigenvalues are treated as a cluster and orthogonalized.
    pub fn inverse_iteration(&self, values: &[f64]) -> Vec<Vec<f64>> {
        let n = self.diag.len();
        let tnorm = self.one_norm().max(f64::MIN_POSITIVE);
        let pertol = 10.0 * f64::EPSILON * tnorm;
        let ortol = 1e-3 * tnorm;
        let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
        let mut out: Vec<Vec<f64>> = Vec::with_capacity(values.len());
        let mut cluster_start = 0;
        let mut prev_shift = f64::INFINITY;
        for (j, &lambda) in values.iter().enumerate() {
            if j > 0 && (values[j - 1] - lambda).abs() > ortol {
                cluster_start = j;
            }
            let mut shift = lambda;
            if j > 0 && prev_shift - shift < pertol {
                shift = prev_shift - pertol;
            }
            prev_shift = shift;
            let lu = TridiagLu::factor(&self.diag, &self.off, shift, f64::EPSILON * tnorm);
            let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            for _ in 0..INVERSE_ITERATIONS {
                lu.solve(&mut x);
                for _ in 0..2 {
                    for q in &out[cluster_start..j] {
                        let c = dot(&x, q);
                        for (t, qi) in x.iter_mut().zip(q) {
                            *t -= c * qi;
                        }
                    }
                }
                let nx = norm(&x);
                if nx > 0.0 && nx.is_finite() {
                    x.iter_mut().for_each(|t| *t /= nx);
                } else {
                    x = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                }
            }
            out.push(x);
        }
        out
    }
}

/// LU factorization of T − σI with partial pivoting.
struct TridiagLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagLu {
    fn factor(diag: &[f64], off: &[f64], shift: f64, tiny: f64) -> Self {
        let n = diag.len();
        let mut d: Vec<f64> = diag.iter().map(|x| x - shift).collect();
        let mut dl = off.to_vec();
        let mut du = off.to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] != 0.0 {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] -= fact * du[i];
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        let tiny = tiny.max(f64::MIN_POSITIVE);
        for x in d.iter_mut() {
            if x.abs() < tiny {
                *x = if *x < 0.0 { -tiny } else { tiny };
            }
        }
        TridiagLu {
            dl,
            d,
            du,
            du2,
            swapped,
        }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        if n == 0 {
            return;
        }
        b[n - 1] /= self.d[n - 1];
        if n >= 2 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

/// Eigenvalues (descending) of a dense symmetric matrix and unit
/// eigenvectors for the leading `count` of them.
pub(crate) fn eigh(a: Vec<f64>, n: usize, count: usize) -> Option<(Vec<f64>, Vec<Vec<f64>>)> {
    let t = tridiagonalize(a, n);
    let values = t.eigenvalues()?;
    let mut vectors = t.inverse_iteration(&values[..count.min(n)]);
    vectors
        .par_iter_mut()
        .for_each(|v| t.back_transform(v));
    Some((values, vectors))
}
