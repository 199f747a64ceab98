//! Subspace iteration with Rayleigh–Ritz for the top of the spectrum.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::dense;
use crate::kernels::Kernel;

pub(crate) const CONVERGED: f64 = 1e-10;
const EXTRA_BLOCK: usize = 4;
const START_SEED: u64 = 0x6974_6572;

pub(crate) struct Outcome {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub(crate) fn iteration_cap(n: usize) -> usize {
    let n = n.max(2) as f64;
    (10.0 * n * n.ln()).ceil() as usize
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Orthonormalizes the columns in place by modified Gram–Schmidt, refilling
/// collapsed columns from `rng`.
fn orthonormalize(cols: &mut [Vec<f64>], rng: &mut ChaCha8Rng) {
    for j in 0..cols.len() {
        for _attempt in 0..3 {
            for _pass in 0..2 {
                for i in 0..j {
                    let c = dot(&cols[i], &cols[j]);
                    let (head, tail) = cols.split_at_mut(j);
                    for (t, q) in tail[0].iter_mut().zip(&head[i]) {
                        *t -= c * q;
                    }
                }
            }
            let nrm = dot(&cols[j], &cols[j]).sqrt();
            if nrm > 1e-12 {
                cols[j].iter_mut().for_each(|t| *t /= nrm);
                break;
            }
            cols[j].iter_mut().for_each(|t| *t = rng.gen_range(-1.0..1.0));
        }
    }
}

/// Leading `count` eigenpairs of a symmetric stochastic kernel. Iterates
/// with (I + K)/2 so that the wanted end of the spectrum dominates.
pub(crate) fn top_eigenpairs(k: &Kernel, count: usize) -> Outcome {
    let n = k.len();
    let block = (count + EXTRA_BLOCK).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let mut x: Vec<Vec<f64>> = (0..block)
        .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    orthonormalize(&mut x, &mut rng);
    let cap = iteration_cap(n);
    let mut best = Outcome {
        values: Vec::new(),
        vectors: Vec::new(),
        residual: f64::INFINITY,
        iterations: 0,
        converged: false,
    };
    for iter in 1..=cap {
        let mut y: Vec<Vec<f64>> = x
            .par_iter()
            .map(|col| {
                let kc = k.apply(col);
                col.iter().zip(&kc).map(|(a, b)| 0.5 * (a + b)).collect()
            })
            .collect();
        orthonormalize(&mut y, &mut rng);
        let z: Vec<Vec<f64>> = y.par_iter().map(|col| k.apply(col)).collect();
        let mut h = vec![0.0; block * block];
        for i in 0..block {
            for j in i..block {
                let v = 0.5 * (dot(&y[i], &z[j]) + dot(&y[j], &z[i]));
                h[i * block + j] = v;
                h[j * block + i] = v;
            }
        }
        let Some((theta, coeffs)) = dense::eigh(h, block, block) else {
            continue;
        };
        let combine = |basis: &[Vec<f64>], c: &[f64]| -> Vec<f64> {
            let mut out = vec![0.0; n];
            for (b, &w) in basis.iter().zip(c) {
                for (o, t) in out.iter_mut().zip(b) {
                    *o += w * t;
                }
            }
            out
        };
        let ritz: Vec<Vec<f64>> = coeffs.par_iter().map(|c| combine(&y, c)).collect();
        let kritz: Vec<Vec<f64>> = coeffs.par_iter().map(|c| combine(&z, c)).collect();
        let residual = (0..count.min(block))
            .map(|j| {
                kritz[j]
                    .iter()
                    .zip(&ritz[j])
                    .map(|(a, b)| (a - theta[j] * b).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max);
        let done = residual < CONVERGED;
        if done || residual < best.residual || iter == cap {
            best = Outcome {
                values: theta[..count.min(block)].to_vec(),
                vectors: ritz[..count.min(block)].to_vec(),
                residual,
                iterations: iter,
                converged: done,
            };
        }
        if done {
            break;
        }
        x = ritz;
    }
    best
}
