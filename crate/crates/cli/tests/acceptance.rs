//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use fracwalk_core::comparison::verify_comparison;
use fracwalk_core::ffield::{generator_set, is_prime, Modulus};
use fracwalk_core::hyperbola::{count_solutions, scan_max_ratio, Interval};
use fracwalk_core::kernels::{
    build_cayley, build_k, build_l, build_l0, build_pi, build_q, compose, decompose_ul0,
    symmetrization_factor, transpose, Kernel, Space, StepDist, WalkParams,
};
use fracwalk_core::mixing::{
    entropy, lower_bound_tv_raw, mixing_time, upper_bound_tv, MixingTime, Start,
};
use fracwalk_core::spectral::{
    bottleneck_ratio, cheeger_holds, eigen_sym, quotient_spectrum_check, CutMode, Method,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const TOL: f64 = 1e-9;

type Check = Result<String, String>;

fn md(p: u64) -> Modulus {
    Modulus::new(p).unwrap()
}

fn primes(lo: u64, hi: u64) -> Vec<Modulus> {
    (lo..=hi).filter(|&n| is_prime(n)).map(md).collect()
}

fn laws() -> Vec<(&'static str, StepDist)> {
    vec![
        ("u01", StepDist::u01()),
        ("u-101", StepDist::u_101()),
        ("0:1/4,1:3/4", StepDist::new([(0, 0.25), (1, 0.75)]).unwrap()),
    ]
}

fn presets() -> Vec<(&'static str, StepDist)> {
    laws().into_iter().take(2).collect()
}

fn grid() -> Vec<(Modulus, &'static str, StepDist)> {
    primes(5, 199)
        .into_iter()
        .flat_map(|p| laws().into_iter().map(move |(n, mu)| (p, n, mu)))
        .collect()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn first_error(results: Vec<Result<(), String>>) -> Result<(), String> {
    results.into_iter().collect::<Result<Vec<_>, _>>().map(|_| ())
}

/// TV to uniform of Kⁿ(x,·) for every start x and n = 0..=steps.
fn tv_table(k: &Kernel, steps: usize) -> Vec<Vec<f64>> {
    let n = k.len();
    let u = 1.0 / n as f64;
    (0..n)
        .into_par_iter()
        .map(|x| {
            let mut v = vec![0.0; n];
            v[x] = 1.0;
            let mut row = Vec::with_capacity(steps + 1);
            for s in 0..=steps {
                row.push(0.5 * v.iter().map(|a| (a - u).abs()).sum::<f64>());
                if s < steps {
                    v = k.apply_left(&v);
                }
            }
            row
        })
        .collect()
}

fn lambda2(k: &Kernel) -> Result<f64, String> {
    eigen_sym(k, Method::auto(k.len()), 2)
        .map(|r| r.lambda2)
        .map_err(|e| e.to_string())
}

fn lower_sandwich() -> Check {
    first_error(
        grid()
            .into_par_iter()
            .map(|(p, name, mu)| {
                let table = tv_table(&build_k(&mu, p), 64);
                for (x, row) in table.iter().enumerate() {
                    for (n, &tv) in row.iter().enumerate() {
                        let lb = lower_bound_tv_raw(n, p, &mu);
                        ensure(tv >= lb - TOL, || {
                            format!("p={p} mu={name} x={x} n={n}: tv {tv} < {lb}")
                        })?;
                    }
                }
                Ok(())
            })
            .collect(),
    )?;
    Ok(format!("{} (p, mu) pairs, all starts, n <= 64", grid().len()))
}

fn upper_sandwich() -> Check {
    first_error(
        grid()
            .into_par_iter()
            .map(|(p, name, mu)| {
                let l2 = lambda2(&build_q(&mu, p).map_err(|e| e.to_string())?)?;
                let table = tv_table(&build_k(&mu, p), 64);
                for n in 2..=64 {
                    let ub = upper_bound_tv(n, p, l2).map_err(|e| e.to_string())?;
                    for (x, row) in table.iter().enumerate() {
                        ensure(row[n] <= ub + TOL, || {
                            format!("p={p} mu={name} x={x} n={n}: tv {} > {ub}", row[n])
                        })?;
                    }
                }
                Ok(())
            })
            .collect(),
    )?;
    Ok(format!("{} (p, mu) pairs, all starts, 2 <= n <= 64", grid().len()))
}

fn operator_norm() -> Check {
    let cases: Vec<_> = primes(5, 101)
        .into_iter()
        .flat_map(|p| laws().into_iter().map(move |(n, mu)| (p, n, mu)))
        .collect();
    first_error(
        cases
            .par_iter()
            .map(|(p, name, mu)| {
                let p = *p;
                let l2 = lambda2(&build_q(mu, p).map_err(|e| e.to_string())?)?;
                let k = build_k(mu, p);
                let mut rng = ChaCha8Rng::seed_from_u64(p.get());
                for trial in 0..100 {
                    let mut x: Vec<f64> = (0..p.size()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    let mean = x.iter().sum::<f64>() / x.len() as f64;
                    x.iter_mut().for_each(|v| *v -= mean);
                    let norm0 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                    for step in 1..=40 {
                        // (Kᵀ)^k x, i.e. x as a row vector times K^k
                        x = k.apply_left(&x);
                        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                        let bound = l2.powf((step as f64 - 2.0) / 4.0) * norm0;
                        ensure(norm <= bound + TOL, || {
                            format!("p={p} mu={name} trial={trial} k={step}: {norm} > {bound}")
                        })?;
                    }
                }
                Ok(())
            })
            .collect(),
    )?;
    Ok(format!("{} (p, mu) pairs, 100 vectors each, k <= 40", cases.len()))
}

fn structural() -> Check {
    first_error(
        grid()
            .into_par_iter()
            .map(|(p, name, mu)| {
                let ctx = || format!("p={p} mu={name}");
                let a = symmetrization_factor(&mu, p);
                let gram = compose(&a, &transpose(&a).unwrap()).unwrap().to_dense();
                let q = build_q(&mu, p).map_err(|e| format!("{}: {e}", ctx()))?;
                let dev = q
                    .to_dense()
                    .iter()
                    .zip(&gram)
                    .map(|(x, y)| (x - y).abs())
                    .fold(0.0, f64::max);
                ensure(dev <= 1e-12, || format!("{}: Q off by {dev}", ctx()))?;
                let spec = eigen_sym(&q, Method::Dense, 2).map_err(|e| e.to_string())?;
                ensure(spec.smallest() >= -1e-9, || {
                    format!("{}: min eigenvalue {}", ctx(), spec.smallest())
                })?;
                let params = WalkParams::choose(&mu).map_err(|e| e.to_string())?;
                let l0 = build_l0(params, p).map_err(|e| e.to_string())?;
                let l = build_l(params, p).map_err(|e| e.to_string())?;
                ensure(transpose(&l0).unwrap() == l0, || format!("{}: L0 asymmetric", ctx()))?;
                ensure(transpose(&l).unwrap() == l, || format!("{}: L asymmetric", ctx()))?;
                let pi = build_pi(p);
                ensure(compose(&pi, &pi).unwrap() == Kernel::identity(Space::Fp(p)), || {
                    format!("{}: Pi^2 != I", ctx())
                })?;
                Ok(())
            })
            .collect(),
    )?;
    Ok(format!("{} (p, mu) pairs", grid().len()))
}

fn graph_inclusion() -> Check {
    let mut checked = 0usize;
    for p in primes(5, 199) {
        for (name, mu) in presets() {
            let params = WalkParams::choose(&mu).map_err(|e| e.to_string())?;
            let l = build_l(params, p).map_err(|e| e.to_string())?;
            let l0 = build_l0(params, p).map_err(|e| e.to_string())?;
            let hub = p.elem(-params.a1).value() as usize;
            for x in 0..p.size() {
                for &(y, w) in l.row(x) {
                    if w <= 0.0 || y == p.size() || (x, y) == (hub, hub) {
                        continue;
                    }
                    checked += 1;
                    ensure(l0.get(x, y) > 0.0, || {
                        format!("p={p} mu={name}: L({x},{y}) > 0 but L0({x},{y}) = 0")
                    })?;
                }
            }
        }
    }
    Ok(format!("{checked} edges, 0 exceptions"))
}

fn decomposition_chain() -> Check {
    first_error(
        grid()
            .into_par_iter()
            .map(|(p, name, mu)| {
                let ctx = || format!("p={p} mu={name}");
                let params = WalkParams::choose(&mu).map_err(|e| e.to_string())?;
                let q = build_q(&mu, p).map_err(|e| e.to_string())?;
                let l0 = build_l0(params, p).map_err(|e| e.to_string())?;
                let d = decompose_ul0(&q, &l0).map_err(|e| format!("{}: {e}", ctx()))?;
                ensure(d.u > 0.0, || format!("{}: u = {}", ctx(), d.u))?;
                let rem = &d.remainder;
                ensure(rem.is_symmetric() && rem.max_row_error() <= 1e-10, || {
                    format!("{}: remainder not symmetric stochastic", ctx())
                })?;
                let (qd, ld, rd) = (q.to_dense(), l0.to_dense(), rem.to_dense());
                let dev = (0..qd.len())
                    .map(|i| (d.u * ld[i] + (1.0 - d.u) * rd[i] - qd[i]).abs())
                    .fold(0.0, f64::max);
                ensure(dev <= 1e-10, || format!("{}: reconstruction off by {dev}", ctx()))?;
                let r = verify_comparison(&mu, params, p, 50, 0).map_err(|e| e.to_string())?;
                ensure(r.c <= 2.0, || format!("{}: C = {}", ctx(), r.c))?;
                ensure(r.gap_q >= d.u * r.gap_l0 - 1e-8, || {
                    format!("{}: gap_Q {} < u gap_L0 {}", ctx(), r.gap_q, d.u * r.gap_l0)
                })?;
                ensure(r.gap_l0 >= r.gap_l / (r.c * r.a) - 1e-8, || {
                    format!("{}: gap_L0 {} < gap_L/(CA) {}", ctx(), r.gap_l0, r.gap_l / (r.c * r.a))
                })?;
                ensure(r.forms_ok, || format!("{}: form inequality fails", ctx()))?;
                Ok(())
            })
            .collect(),
    )?;
    Ok(format!("{} (p, mu) pairs", grid().len()))
}

fn quotient_spectrum() -> Check {
    let mut worst = 0.0f64;
    for p in [5, 7, 11, 13].map(md) {
        for (a1, b) in [(1, 1), (0, 1)] {
            let l = build_l(WalkParams::from_shift(a1, b).unwrap(), p).map_err(|e| e.to_string())?;
            let cover = build_cayley(&generator_set(a1, b, p).map_err(|e| e.to_string())?, p);
            let r = quotient_spectrum_check(&l, &cover.kernel, 1e-7)
                .map_err(|e| format!("p={p} a1={a1} b={b}: {e}"))?;
            worst = worst.max(r.worst_mismatch);
        }
    }
    Ok(format!("worst mismatch {worst:.2e}"))
}

fn generation() -> Check {
    let mut runs = 0;
    for p in [5, 7, 11, 13, 17].map(md) {
        for a1 in [0, 1] {
            for b in [1, 2] {
                let gens = generator_set(a1, b, p).map_err(|e| e.to_string())?;
                let order = build_cayley(&gens, p).order();
                let expected = (p.get() * (p.get() * p.get() - 1)) as usize;
                ensure(order == expected, || {
                    format!("p={p} a1={a1} b={b}: order {order} != {expected}")
                })?;
                runs += 1;
            }
        }
    }
    Ok(format!("{runs} generator sets"))
}

fn cheeger() -> Check {
    let mut runs = 0;
    for p in [5, 7, 11, 13, 17, 19].map(md) {
        for (name, mu) in laws() {
            let q = build_q(&mu, p).map_err(|e| e.to_string())?;
            let cut = bottleneck_ratio(&q, CutMode::Exhaustive).map_err(|e| e.to_string())?;
            let gap = 1.0 - lambda2(&q)?;
            ensure(cut.exhaustive && cheeger_holds(cut.ratio, gap, TOL), || {
                format!("p={p} mu={name}: phi {} gap {gap}", cut.ratio)
            })?;
            runs += 1;
        }
    }
    Ok(format!("{runs} kernels"))
}

fn mixing_scaling() -> Check {
    let mu = StepDist::u01();
    let rows = [101u64, 211, 401, 809, 1601]
        .par_iter()
        .map(|&p| {
            let m = md(p);
            let t = match mixing_time(&build_k(&mu, m), 0.25, Start::WorstCase) {
                Ok(MixingTime::Exact(t)) => t,
                other => return Err(format!("p={p}: {other:?}")),
            };
            let l2 = lambda2(&build_q(&mu, m).map_err(|e| e.to_string())?)?;
            let logp = (p as f64).ln();
            let lo = (0.75 - 2f64.ln() / logp) * logp / entropy(&mu);
            let hi = 2.0 + 4.0 * (2.0 * (p as f64).sqrt() * 4.0).ln() / -l2.ln();
            ensure(lo <= t as f64 && t as f64 <= hi, || {
                format!("p={p}: t_mix {t} outside [{lo:.2}, {hi:.2}]")
            })?;
            Ok(format!("{p}:{t}"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(format!("t_mix {}", rows.join(" ")))
}

fn brute_count(i: Interval, j: Interval, p: Modulus) -> usize {
    let q = p.get();
    let mut c = 0;
    for x in i.iter(p) {
        for y in j.iter(p) {
            if x * y % q == 1 {
                c += 1;
            }
        }
    }
    c
}

fn hyperbola() -> Check {
    let ps = primes(5, 499);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..1000 {
        let p = ps[rng.gen_range(0..ps.len())];
        let n = p.size();
        let i = Interval::new(rng.gen_range(0..n as i64), rng.gen_range(1..=n), p).unwrap();
        let j = Interval::new(rng.gen_range(0..n as i64), rng.gen_range(1..=n), p).unwrap();
        let (got, want) = (count_solutions(i, j, p), brute_count(i, j, p));
        ensure(got == want, || format!("trial {trial} p={p}: {got} != {want}"))?;
    }
    let mut worst = 0.0f64;
    for p in [101, 211, 499].map(md) {
        for m in 16..=p.size() / 2 {
            let r = scan_max_ratio(p, m, 1).map_err(|e| e.to_string())?;
            ensure(r.ratio < 1.0, || format!("p={p} m={m}: ratio {}", r.ratio))?;
            worst = worst.max(r.ratio);
        }
    }
    Ok(format!("1000 random boxes exact, max scan ratio {worst:.4}"))
}

fn run_cli(args: &[&str], threads_env: Option<&str>) -> Result<Vec<u8>, String> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fracwalk"));
    cmd.args(args).env_remove("FRACWALK_THREADS");
    if let Some(t) = threads_env {
        cmd.env("FRACWALK_THREADS", t);
    }
    let out = cmd.output().map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!("{args:?} exited {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr))
    })?;
    Ok(out.stdout)
}

fn determinism() -> Check {
    let runs: [&[&str]; 8] = [
        &["mix", "--p", "101"],
        &["mix", "--p", "211", "--mu", "u-101", "--format", "json"],
        &["spectrum", "--p", "5..31", "--kernels", "Q,L0,L"],
        &["spectrum", "--p", "5..7", "--kernels", "L,cayley", "--format", "json"],
        &["compare", "--p", "5..43", "--trials", "40", "--seed", "7"],
        &["hyperbola", "--p", "101", "--m", "16..50"],
        &["hyperbola", "--p", "211", "--m", "30", "--stride", "3", "--format", "json"],
        &["generate", "--p", "5..17", "--a1", "1", "--b", "2"],
    ];
    for args in runs {
        let base = run_cli(args, None)?;
        let mut variants = vec![run_cli(args, None)?, run_cli(args, Some("3"))?];
        for t in ["1", "4"] {
            let mut a: Vec<&str> = args.to_vec();
            a.extend(["--threads", t]);
            variants.push(run_cli(&a, None)?);
        }
        ensure(variants.iter().all(|v| *v == base), || format!("{args:?} output differs"))?;
    }
    Ok(format!("{} commands x 5 runs byte-identical", runs.len()))
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Check); 12] = [
        ("lower-bound sandwich", Duration::from_secs(60), lower_sandwich),
        ("upper-bound sandwich", Duration::from_secs(120), upper_sandwich),
        ("operator-norm lemma", Duration::MAX, operator_norm),
        ("structural identities", Duration::MAX, structural),
        ("graph inclusion", Duration::MAX, graph_inclusion),
        ("decomposition and gap chain", Duration::MAX, decomposition_chain),
        ("quotient spectrum", Duration::from_secs(60), quotient_spectrum),
        ("generation", Duration::MAX, generation),
        ("cheeger sandwich", Duration::MAX, cheeger),
        ("mixing-time scaling", Duration::from_secs(300), mixing_scaling),
        ("hyperbola", Duration::from_secs(180), hyperbola),
        ("determinism", Duration::MAX, determinism),
    ];
    let mut failed = 0;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|_| Err("panicked".to_string()));
        let elapsed = start.elapsed();
        let result = result.and_then(|detail| {
            if elapsed > *budget {
                Err(format!("{detail}; over budget of {}s", budget.as_secs()))
            } else {
                Ok(detail)
            }
        });
        let (tag, detail) = match result {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!(
            "criterion {:>2} {tag} {name}: {detail} [{:.1}s]",
            i + 1,
            elapsed.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
