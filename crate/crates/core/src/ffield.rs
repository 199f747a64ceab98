//! Arithmetic over the prime field F_p, the projective line P¹(F_p), and
//! 2×2 matrices acting on it by linear fractional transformations.
//!
//! Residues are stored canonically in `[0, p)`. For matrix and vector code
//! the projective line is indexed contiguously: finite points `0..p` keep
//! their residue as index and `∞` sits at index `p`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0} is below 5")]
    TooSmall(u64),
    #[error("modulus {0} does not fit in 32 bits")]
    TooLarge(u64),
    #[error("matrix is singular mod {0}")]
    Singular(u64),
    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u64, u64),
    #[error("shift b = {b} vanishes mod {p}")]
    DegenerateShift { b: i64, p: u64 },
}

/// Deterministic primality by trial division. Adequate for the 32-bit
/// moduli this crate accepts.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// An odd prime `p ≥ 5` below 2³².
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Modulus(u64);

impl Modulus {
    pub const MAX: u64 = u32::MAX as u64;

    pub fn new(p: u64) -> Result<Self, FieldError> {
        if p > Self::MAX {
            return Err(FieldError::TooLarge(p));
        }
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if p < 5 {
            return Err(FieldError::TooSmall(p));
        }
        Ok(Modulus(p))
    }

    #[inline]
    pub fn get(self) -> u64 {
        self.0
    }

    /// Number of points of F_p, usable as a state count.
    #[inline]
    pub fn size(self) -> usize {
        self.0 as usize
    }

    /// Reduce an arbitrary integer to its canonical residue.
    #[inline]
    pub fn elem(self, v: i64) -> FpElem {
        FpElem {
            value: (v as i128).rem_euclid(self.0 as i128) as u64,
            modulus: self,
        }
    }

    /// Element from a residue already known to lie in `[0, p)`.
    #[inline]
    pub fn residue(self, v: u64) -> FpElem {
        debug_assert!(v < self.0);
        FpElem {
            value: v,
            modulus: self,
        }
    }

    pub fn zero(self) -> FpElem {
        self.residue(0)
    }

    pub fn one(self) -> FpElem {
        self.residue(1)
    }

    pub fn elements(self) -> impl Iterator<Item = FpElem> {
        (0..self.0).map(move |v| self.residue(v))
    }

    /// All points of P¹(F_p) in index order (∞ last).
    pub fn proj_points(self) -> impl Iterator<Item = ProjPoint> {
        self.elements()
            .map(ProjPoint::Finite)
            .chain(std::iter::once(ProjPoint::Infinity))
    }

    /// |SL₂(F_p)| = p(p² − 1).
    pub fn sl2_order(self) -> usize {
        let p = self.0 as usize;
        p * (p * p - 1)
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A residue class mod p.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FpElem {
    value: u64,
    modulus: Modulus,
}

impl FpElem {
    #[inline]
    pub fn value(self) -> u64 {
        self.value
    }

    #[inline]
    pub fn modulus(self) -> Modulus {
        self.modulus
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    /// Multiplicative inverse by the extended Euclidean algorithm.
    pub fn inv(self) -> Option<FpElem> {
        if self.value == 0 {
            return None;
        }
        let p = self.modulus.0 as i64;
        let (mut r0, mut r1) = (p, self.value as i64);
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        debug_assert_eq!(r0, 1);
        Some(self.modulus.elem(t0))
    }

    #[inline]
    fn check(self, other: FpElem) {
        assert_eq!(
            self.modulus, other.modulus,
            "arithmetic between different moduli"
        );
    }
}

impl fmt::Display for FpElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl Add for FpElem {
    type Output = FpElem;
    fn add(self, rhs: FpElem) -> FpElem {
        self.check(rhs);
        let s = self.value + rhs.value;
        let p = self.modulus.0;
        self.modulus.residue(if s >= p { s - p } else { s })
    }
}

impl Sub for FpElem {
    type Output = FpElem;
    fn sub(self, rhs: FpElem) -> FpElem {
        self.check(rhs);
        let p = self.modulus.0;
        self.modulus
            .residue(if self.value >= rhs.value { self.value - rhs.value } else { self.value + p - rhs.value })
    }
}

impl Mul for FpElem {
    type Output = FpElem;
    fn mul(self, rhs: FpElem) -> FpElem {
        self.check(rhs);
        // p < 2^32 so the product fits in u64
        self.modulus.residue(self.value * rhs.value % self.modulus.0)
    }
}

impl Neg for FpElem {
    type Output = FpElem;
    fn neg(self) -> FpElem {
        if self.value == 0 {
            self
        } else {
            self.modulus.residue(self.modulus.0 - self.value)
        }
    }
}

/// ι(x) = 1/x for x ≠ 0 and ι(0) = 0.
pub fn iota(x: FpElem) -> FpElem {
    x.inv().unwrap_or(x)
}

/// A point of the projective line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProjPoint {
    Finite(FpElem),
    Infinity,
}

impl ProjPoint {
    /// Contiguous index: residue for finite points, `p` for ∞.
    pub fn index(self, p: Modulus) -> usize {
        match self {
            ProjPoint::Finite(x) => x.value as usize,
            ProjPoint::Infinity => p.size(),
        }
    }

    pub fn from_index(i: usize, p: Modulus) -> ProjPoint {
        assert!(i <= p.size(), "index {i} outside P1(F_{p})");
        if i == p.size() {
            ProjPoint::Infinity
        } else {
            ProjPoint::Finite(p.residue(i as u64))
        }
    }

    /// Translation x ↦ x + t, fixing ∞.
    pub fn shift(self, t: FpElem) -> ProjPoint {
        match self {
            ProjPoint::Finite(x) => ProjPoint::Finite(x + t),
            ProjPoint::Infinity => ProjPoint::Infinity,
        }
    }

    pub fn is_infinity(self) -> bool {
        matches!(self, ProjPoint::Infinity)
    }
}

impl fmt::Display for ProjPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProjPoint::Finite(x) => write!(f, "{x}"),
            ProjPoint::Infinity => f.write_str("inf"),
        }
    }
}

/// ῑ on P¹: 1/x away from {0, ∞}, swapping 0 and ∞. The modulus is
/// explicit because ∞ carries none.
pub fn iota_bar(x: ProjPoint, p: Modulus) -> ProjPoint {
    match x {
        ProjPoint::Infinity => ProjPoint::Finite(p.zero()),
        ProjPoint::Finite(v) => match v.inv() {
            Some(w) => ProjPoint::Finite(w),
            None => ProjPoint::Infinity,
        },
    }
}

/// An invertible 2×2 matrix over F_p, row-major `[[a, b], [c, d]]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Mat2 {
    a: FpElem,
    b: FpElem,
    c: FpElem,
    d: FpElem,
}

impl Mat2 {
    pub fn new(a: FpElem, b: FpElem, c: FpElem, d: FpElem) -> Result<Mat2, FieldError> {
        let p = a.modulus;
        for e in [b, c, d] {
            if e.modulus != p {
                return Err(FieldError::ModulusMismatch(p.get(), e.modulus.get()));
            }
        }
        let m = Mat2 { a, b, c, d };
        if m.det().is_zero() {
            return Err(FieldError::Singular(p.get()));
        }
        Ok(m)
    }

    pub fn from_ints(entries: [[i64; 2]; 2], p: Modulus) -> Result<Mat2, FieldError> {
        let [[a, b], [c, d]] = entries;
        Mat2::new(p.elem(a), p.elem(b), p.elem(c), p.elem(d))
    }

    pub fn identity(p: Modulus) -> Mat2 {
        Mat2 {
            a: p.one(),
            b: p.zero(),
            c: p.zero(),
            d: p.one(),
        }
    }

    pub fn modulus(&self) -> Modulus {
        self.a.modulus
    }

    pub fn entries(&self) -> [[u64; 2]; 2] {
        [[self.a.value, self.b.value], [self.c.value, self.d.value]]
    }

    pub fn det(&self) -> FpElem {
        self.a * self.d - self.b * self.c
    }

    /// Whether the matrix lies in SL₂.
    pub fn is_special(&self) -> bool {
        self.det().value == 1
    }

    pub fn mul(&self, rhs: &Mat2) -> Result<Mat2, FieldError> {
        if self.modulus() != rhs.modulus() {
            return Err(FieldError::ModulusMismatch(
                self.modulus().get(),
                rhs.modulus().get(),
            ));
        }
        Ok(Mat2 {
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
        })
    }

    pub fn inverse(&self) -> Mat2 {
        let k = self.det().inv().expect("Mat2 is invertible by construction");
        Mat2 {
            a: self.d * k,
            b: -self.b * k,
            c: -self.c * k,
            d: self.a * k,
        }
    }

    /// Linear fractional action x ↦ (ax + b)/(cx + d) on P¹.
    pub fn act(&self, x: ProjPoint) -> ProjPoint {
        match x {
            ProjPoint::Finite(x) => {
                let den = self.c * x + self.d;
                match den.inv() {
                    Some(k) => ProjPoint::Finite((self.a * x + self.b) * k),
                    None => ProjPoint::Infinity,
                }
            }
            ProjPoint::Infinity => match self.c.inv() {
                Some(k) => ProjPoint::Finite(self.a * k),
                None => ProjPoint::Infinity,
            },
        }
    }

    /// Compact key for hashing group elements during closure.
    pub(crate) fn key(&self) -> [u32; 4] {
        [
            self.a.value as u32,
            self.b.value as u32,
            self.c.value as u32,
            self.d.value as u32,
        ]
    }
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{},{}],[{},{}]]", self.a, self.b, self.c, self.d)
    }
}

pub fn moebius_act(m: &Mat2, x: ProjPoint) -> ProjPoint {
    m.act(x)
}

pub fn mat_mul(m1: &Mat2, m2: &Mat2) -> Result<Mat2, FieldError> {
    m1.mul(m2)
}

/// The four SL₂ generators whose Möbius action realises the four moves
/// x ± b and ῑ(ῑ(x + a₁) ± b) − a₁. Ordered so that entries 0/2 and 1/3 are
/// inverse pairs.
pub fn generator_set(a1: i64, b: i64, p: Modulus) -> Result<[Mat2; 4], FieldError> {
    if p.elem(b).is_zero() {
        return Err(FieldError::DegenerateShift { b, p: p.get() });
    }
    let r = |v: i128| p.elem(v.rem_euclid(p.get() as i128) as i64);
    let (a1, b) = (a1 as i128, b as i128);
    let m = |a: i128, bb: i128, c: i128, d: i128| Mat2::new(r(a), r(bb), r(c), r(d));
    Ok([
        m(1, b, 0, 1)?,
        m(1 - a1 * b, -a1 * a1 * b, b, a1 * b + 1)?,
        m(1, -b, 0, 1)?,
        m(1 + a1 * b, a1 * a1 * b, -b, 1 - a1 * b)?,
    ])
}
