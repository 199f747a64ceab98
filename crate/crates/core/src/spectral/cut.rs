use serde::Serialize;

use super::{eigen_sym, Method, SpectralError};
use crate::kernels::Kernel;

/// Largest state count for the exhaustive subset search.
pub const EXHAUSTIVE_MAX: usize = 22;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CutMode {
    Exhaustive,
    /// Prefix cuts along the second eigenvector; an upper bound.
    Sweep,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CutReport {
    pub set: Vec<usize>,
    pub ratio: f64,
    pub exhaustive: bool,
}

/// Σ_{x∈S, y∉S} K(x, y) for a membership mask.
fn boundary(k: &Kernel, member: &[bool]) -> f64 {
    (0..k.len())
        .filter(|&x| member[x])
        .flat_map(|x| k.row(x).iter())
        .filter(|&&(y, _)| !member[y])
        .map(|&(_, w)| w)
        .sum()
}

/// Change in the boundary when `v` joins (or leaves) the set, given the
/// membership before the move. Uses K(x, v) = K(v, x).
fn boundary_delta(k: &Kernel, member: &[bool], v: usize) -> f64 {
    let (mut outside, mut inside) = (0.0, 0.0);
    for &(y, w) in k.row(v) {
        if y == v {
            continue;
        }
        if member[y] {
            inside += w;
        } else {
            outside += w;
        }
    }
    if member[v] {
        inside - outside
    } else {
        outside - inside
    }
}

/// The bottleneck ratio min Q(S, Sᶜ)/π(S) over |S| ≤ N/2, with the
/// uniform stationary law of a symmetric kernel.
pub fn bottleneck_ratio(k: &Kernel, mode: CutMode) -> Result<CutReport, SpectralError> {
    if !k.is_symmetric() {
        return Err(SpectralError::NotSymmetric(k.asymmetry()));
    }
    let n = k.len();
    if n < 2 {
        return Err(SpectralError::TooSmall);
    }
    match mode {
        CutMode::Exhaustive => exhaustive(k),
        CutMode::Sweep => sweep(k),
    }
}

fn exhaustive(k: &Kernel) -> Result<CutReport, SpectralError> {
    let n = k.len();
    if n > EXHAUSTIVE_MAX {
        return Err(SpectralError::CutTooLarge {
            n,
            max: EXHAUSTIVE_MAX,
        });
    }
    let mut member = vec![false; n];
    let (mut size, mut b) = (0usize, 0.0f64);
    let mut mask: u32 = 0;
    let mut best = (f64::INFINITY, 0u32);
    for i in 1u32..(1u32 << n) {
        let v = i.trailing_zeros() as usize;
        b += boundary_delta(k, &member, v);
        member[v] = !member[v];
        mask ^= 1 << v;
        if member[v] {
            size += 1;
        } else {
            size -= 1;
        }
        if size >= 1 && 2 * size <= n {
            let r = b / size as f64;
            if r < best.0 {
                best = (r, mask);
            }
        }
    }
    let set: Vec<usize> = (0..n).filter(|&x| best.1 >> x & 1 == 1).collect();
    let member: Vec<bool> = (0..n).map(|x| best.1 >> x & 1 == 1).collect();
    let ratio = boundary(k, &member) / set.len() as f64;
    Ok(CutReport {
        set,
        ratio,
        exhaustive: true,
    })
}

fn sweep(k: &Kernel) -> Result<CutReport, SpectralError> {
    let n = k.len();
    let report = eigen_sym(k, Method::auto(n), 2)?;
    let v = &report.vectors[1];
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]).then(a.cmp(&b)));
    let mut best: Option<(f64, Vec<usize>)> = None;
    for reversed in [false, true] {
        let seq: Vec<usize> = if reversed {
            order.iter().rev().copied().collect()
        } else {
            order.clone()
        };
        let mut member = vec![false; n];
        let mut b = 0.0;
        for (size, &x) in seq.iter().take(n / 2).enumerate() {
            b += boundary_delta(k, &member, x);
            member[x] = true;
            let r = b / (size + 1) as f64;
            if best.as_ref().map_or(true, |(r0, _)| r < *r0) {
                best = Some((r, seq[..=size].to_vec()));
            }
        }
    }
    let (_, mut set) = best.expect("n ≥ 2 gives a prefix");
    set.sort_unstable();
    let mut member = vec![false; n];
    set.iter().for_each(|&x| member[x] = true);
    let ratio = boundary(k, &member) / set.len() as f64;
    Ok(CutReport {
        set,
        ratio,
        exhaustive: false,
    })
}

/// Φ²/2 ≤ gap ≤ 2Φ, each side within `tol`.
pub fn cheeger_holds(phi: f64, gap: f64, tol: f64) -> bool {
    phi * phi / 2.0 <= gap + tol && gap <= 2.0 * phi + tol
}
