//! Exact rational reconstructions of the walk kernels for small p, built
//! from the definitions without going through the crate's constructors.

use fracwalk_core::ffield::Modulus;
use fracwalk_core::kernels::{
    build_k, build_l0, build_q, decompose_ul0, Kernel, StepDist, WalkParams,
};
use num_rational::Ratio;

type Q64 = Ratio<i64>;
type Mat = Vec<Vec<Q64>>;

const PRIMES: [u64; 4] = [5, 7, 11, 13];

fn fixtures() -> Vec<Vec<(i64, Q64)>> {
    vec![
        vec![(0, Q64::new(1, 2)), (1, Q64::new(1, 2))],
        vec![(-1, Q64::new(1, 3)), (0, Q64::new(1, 3)), (1, Q64::new(1, 3))],
        vec![(0, Q64::new(1, 4)), (1, Q64::new(3, 4))],
    ]
}

fn to_float_law(law: &[(i64, Q64)]) -> StepDist {
    StepDist::new(law.iter().map(|&(v, q)| (v, *q.numer() as f64 / *q.denom() as f64))).unwrap()
}

fn pow_mod(mut b: i64, mut e: i64, p: i64) -> i64 {
    let mut r = 1;
    b = b.rem_euclid(p);
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

/// Fermat inverse with 0 ↦ 0.
fn inv(x: i64, p: i64) -> i64 {
    pow_mod(x, p - 2, p)
}

fn zeros(n: usize) -> Mat {
    vec![vec![Q64::from_integer(0); n]; n]
}

fn matmul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let mut c = zeros(n);
    for i in 0..n {
        for k in 0..n {
            if a[i][k] == Q64::from_integer(0) {
                continue;
            }
            for j in 0..n {
                c[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    c
}

fn transpose(a: &Mat) -> Mat {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| a[j][i]).collect()).collect()
}

fn translation(law: &[(i64, Q64)], p: i64) -> Mat {
    let mut m = zeros(p as usize);
    for x in 0..p {
        for &(v, q) in law {
            m[x as usize][(x + v).rem_euclid(p) as usize] += q;
        }
    }
    m
}

fn inversion(p: i64) -> Mat {
    let mut m = zeros(p as usize);
    for x in 0..p {
        m[x as usize][inv(x, p) as usize] = Q64::from_integer(1);
    }
    m
}

fn l0_exact(a1: i64, b: i64, p: i64) -> Mat {
    let mut m = zeros(p as usize);
    let quarter = Q64::new(1, 4);
    let r = |x: i64| x.rem_euclid(p);
    for x in 0..p {
        let y = inv(r(x + a1), p);
        for z in [
            r(x + b),
            r(x - b),
            r(inv(r(y + b), p) - a1),
            r(inv(r(y - b), p) - a1),
        ] {
            m[x as usize][z as usize] += quarter;
        }
    }
    m
}

fn as_f64(q: Q64) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

fn assert_matches(k: &Kernel, exact: &Mat, tol: f64) {
    let d = k.to_dense();
    let n = exact.len();
    for i in 0..n {
        for j in 0..n {
            let diff = (d[i * n + j] - as_f64(exact[i][j])).abs();
            assert!(diff <= tol, "entry ({i},{j}) off by {diff}");
        }
    }
}

#[test]
fn walk_kernel_exact() {
    for p in PRIMES {
        let md = Modulus::new(p).unwrap();
        for law in fixtures() {
            let exact = matmul(&inversion(p as i64), &translation(&law, p as i64));
            assert_matches(&build_k(&to_float_law(&law), md), &exact, 1e-15);
            // doubly stochastic exactly
            for j in 0..p as usize {
                let col: Q64 = exact.iter().map(|row| row[j]).sum();
                assert_eq!(col, Q64::from_integer(1));
            }
        }
    }
}

#[test]
fn symmetrized_kernel_exact() {
    for p in PRIMES {
        let md = Modulus::new(p).unwrap();
        for law in fixtures() {
            let pm = translation(&law, p as i64);
            let a = matmul(&matmul(&pm, &inversion(p as i64)), &pm);
            let q = matmul(&a, &transpose(&a));
            assert_eq!(q, transpose(&q));
            assert_matches(&build_q(&to_float_law(&law), md).unwrap(), &q, 1e-15);
        }
    }
}

#[test]
fn decomposition_weight_exact() {
    for p in PRIMES {
        let md = Modulus::new(p).unwrap();
        for law in fixtures() {
            let mu = to_float_law(&law);
            let params = WalkParams::choose(&mu).unwrap();
            let l0 = l0_exact(params.a1, params.b(), p as i64);
            assert_eq!(l0, transpose(&l0));
            let l0k = build_l0(params, md).unwrap();
            assert_matches(&l0k, &l0, 0.0);

            let pm = translation(&law, p as i64);
            let a = matmul(&matmul(&pm, &inversion(p as i64)), &pm);
            let q = matmul(&a, &transpose(&a));
            let n = p as usize;
            let u_exact = (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .filter(|&(i, j)| l0[i][j] > Q64::from_integer(0))
                .map(|(i, j)| q[i][j] / l0[i][j])
                .min()
                .unwrap();
            assert!(u_exact > Q64::from_integer(0), "p={p}");
            let d = decompose_ul0(&build_q(&mu, md).unwrap(), &l0k).unwrap();
            assert!((d.u - as_f64(u_exact).min(0.999_999)).abs() < 1e-14);
        }
    }
}
