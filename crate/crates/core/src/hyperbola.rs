//! Solutions of xy ≡ 1 (mod p) in boxes I × J of cyclic intervals.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::ffield::{iota, Modulus};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HyperbolaError {
    #[error("interval length {len} must lie in 1..={max}")]
    BadLength { len: usize, max: usize },
    #[error("stride must be positive")]
    ZeroStride,
}

/// {start, start + 1, …, start + len − 1} mod p.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Interval {
    pub start: u64,
    pub len: usize,
}

impl Interval {
    pub fn new(start: i64, len: usize, p: Modulus) -> Result<Self, HyperbolaError> {
        if len == 0 || len > p.size() {
            return Err(HyperbolaError::BadLength {
                len,
                max: p.size(),
            });
        }
        Ok(Interval {
            start: p.elem(start).value(),
            len,
        })
    }

    pub fn contains(&self, x: u64, p: Modulus) -> bool {
        ((x + p.get() - self.start) % p.get()) < self.len as u64
    }

    pub fn iter(&self, p: Modulus) -> impl Iterator<Item = u64> + '_ {
        let q = p.get();
        (0..self.len as u64).map(move |i| (self.start + i) % q)
    }
}

/// |{(x, y) ∈ I × J : xy ≡ 1}|. Zero has no partner.
pub fn count_solutions(i: Interval, j: Interval, p: Modulus) -> usize {
    i.iter(p)
        .filter(|&x| x != 0 && j.contains(iota(p.residue(x)).value(), p))
        .count()
}

/// A = {x ∈ I : ι(x) ∈ J}, which contains 0 when 0 ∈ I ∩ J.
pub fn set_a(i: Interval, j: Interval, p: Modulus) -> Vec<u64> {
    i.iter(p)
        .filter(|&x| j.contains(iota(p.residue(x)).value(), p))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanReport {
    pub p: u64,
    pub m: usize,
    pub stride: usize,
    pub i_start: u64,
    pub j_start: u64,
    pub count: usize,
    pub ratio: f64,
}

impl ScanReport {
    pub const CSV_HEADER: &'static str = "p,m,i_start,j_start,count,ratio";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.p, self.m, self.i_start, self.j_start, self.count, self.ratio
        )
    }
}

/// The largest count_solutions(I, J)/m over interval starts stepped by
/// `stride`. Ties go to the smallest I start, then the smallest J start.
pub fn scan_max_ratio(p: Modulus, m: usize, stride: usize) -> Result<ScanReport, HyperbolaError> {
    let n = p.size();
    if m == 0 || 2 * m > n {
        return Err(HyperbolaError::BadLength { len: m, max: n / 2 });
    }
    if stride == 0 {
        return Err(HyperbolaError::ZeroStride);
    }
    let inverse: Vec<usize> = p.elements().map(|x| iota(x).value() as usize).collect();
    let starts: Vec<usize> = (0..n).step_by(stride).collect();
    let best = starts
        .par_iter()
        .map(|&s| {
            let mut marks = vec![0u32; n];
            for x in (s..s + m).map(|x| x % n).filter(|&x| x != 0) {
                marks[inverse[x]] += 1;
            }
            // prefix sums over two periods for cyclic windows
            let mut prefix = vec![0u32; 2 * n + 1];
            for k in 0..2 * n {
                prefix[k + 1] = prefix[k] + marks[k % n];
            }
            starts
                .iter()
                .map(|&t| ((prefix[t + m] - prefix[t]) as usize, s, t))
                .fold((0usize, usize::MAX, usize::MAX), better)
        })
        .reduce(|| (0usize, usize::MAX, usize::MAX), better);
    let (count, s, t) = best;
    Ok(ScanReport {
        p: p.get(),
        m,
        stride,
        i_start: s as u64,
        j_start: t as u64,
        count,
        ratio: count as f64 / m as f64,
    })
}

fn better(a: (usize, usize, usize), b: (usize, usize, usize)) -> (usize, usize, usize) {
    if (b.0, std::cmp::Reverse(b.1), std::cmp::Reverse(b.2)) > (a.0, std::cmp::Reverse(a.1), std::cmp::Reverse(a.2)) {
        b
    } else {
        a
    }
}

/// Largest δ with 20δ/(1 − δ) < γ′, i.e. γ′/(20 + γ′).
pub fn implied_delta(gamma_prime: f64) -> f64 {
    gamma_prime / (20.0 + gamma_prime)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn md(p: u64) -> Modulus {
        Modulus::new(p).unwrap()
    }

    fn brute(i: Interval, j: Interval, p: Modulus) -> usize {
        let mut c = 0;
        for x in i.iter(p) {
            for y in j.iter(p) {
                if (x * y) % p.get() == 1 {
                    c += 1;
                }
            }
        }
        c
    }

    #[test]
    fn count_examples() {
        let p = md(13);
        let i = Interval::new(1, 6, p).unwrap();
        assert_eq!(count_solutions(i, i, p), 1);
        let p = md(7);
        let i = Interval::new(1, 3, p).unwrap();
        assert_eq!(count_solutions(i, i, p), 1);
        let one = Interval::new(1, 1, p).unwrap();
        assert_eq!(count_solutions(one, one, p), 1);
        assert!(Interval::new(0, 0, p).is_err());
    }

    #[test]
    fn wrapping_and_zero() {
        let p = md(11);
        let i = Interval::new(9, 5, p).unwrap();
        assert_eq!(i.iter(p).collect::<Vec<_>>(), vec![9, 10, 0, 1, 2]);
        assert!(i.contains(0, p) && !i.contains(3, p));
        assert_eq!(count_solutions(i, i, p), brute(i, i, p));
        assert!(set_a(i, i, p).contains(&0));
        assert!(!set_a(i, i, p).is_empty());
        assert_eq!(set_a(i, i, p).len(), count_solutions(i, i, p) + 1);
    }

    #[test]
    fn scan_matches_brute_force() {
        let p = md(31);
        for m in [1, 4, 9, 15] {
            let r = scan_max_ratio(p, m, 1).unwrap();
            let mut best = (0, 0, 0);
            for s in 0..31i64 {
                for t in 0..31i64 {
                    let c = brute(Interval::new(s, m, p).unwrap(), Interval::new(t, m, p).unwrap(), p);
                    if c > best.0 {
                        best = (c, s as u64, t as u64);
                    }
                }
            }
            assert_eq!((r.count, r.i_start, r.j_start), best);
        }
    }

    #[test]
    fn scan_p101() {
        let p = md(101);
        let r = scan_max_ratio(p, 50, 1).unwrap();
        assert!(r.ratio < 1.0);
        assert_eq!(scan_max_ratio(p, 1, 1).unwrap().ratio, 1.0);
        assert!(scan_max_ratio(p, 51, 1).is_err());
        assert_eq!(scan_max_ratio(p, 5, 0), Err(HyperbolaError::ZeroStride));
    }

    #[test]
    fn delta_from_gap() {
        let d = implied_delta(0.3);
        assert!((20.0 * d / (1.0 - d) - 0.3).abs() < 1e-12);
    }
}
