use fracwalk_core::ffield::{is_prime, Modulus};
use serde_json::{json, Value};

use crate::{usage, Cli, CliError};

/// Primes selected by `--p`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimeSet {
    pub primes: Vec<Modulus>,
    pub skipped_composites: usize,
    pub is_range: bool,
}

/// Accepts a single prime ("101") or an inclusive range ("5..199"), in
/// which composites are skipped and counted.
pub fn parse_primes(spec: &str) -> Result<PrimeSet, CliError> {
    let parse = |s: &str| {
        s.trim()
            .parse::<u64>()
            .map_err(|_| usage(format!("invalid prime specification {spec:?}")))
    };
    match spec.split_once("..") {
        None => {
            let p = Modulus::new(parse(spec)?).map_err(usage)?;
            Ok(PrimeSet {
                primes: vec![p],
                skipped_composites: 0,
                is_range: false,
            })
        }
        Some((lo, hi)) => {
            let (lo, hi) = (parse(lo)?, parse(hi)?);
            if lo < 5 || lo > hi {
                return Err(usage(format!("prime range {spec:?} must satisfy 5 <= a <= b")));
            }
            let mut primes = Vec::new();
            let mut skipped = 0;
            for n in lo..=hi {
                if is_prime(n) {
                    primes.push(Modulus::new(n).map_err(usage)?);
                } else {
                    skipped += 1;
                }
            }
            if primes.is_empty() {
                return Err(usage(format!("no primes in {spec:?}")));
            }
            Ok(PrimeSet {
                primes,
                skipped_composites: skipped,
                is_range: true,
            })
        }
    }
}

/// Inclusive integer range "a..b" or a single value.
pub fn parse_lengths(spec: &str) -> Result<Vec<usize>, CliError> {
    let parse = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| usage(format!("invalid length specification {spec:?}")))
    };
    match spec.split_once("..") {
        None => Ok(vec![parse(spec)?]),
        Some((lo, hi)) => {
            let (lo, hi) = (parse(lo)?, parse(hi)?);
            if lo > hi {
                return Err(usage(format!("empty range {spec:?}")));
            }
            Ok((lo..=hi).collect())
        }
    }
}

pub fn config_json(cli: &Cli) -> String {
    serde_json::to_string(cli).expect("config serializes")
}

/// Comment lines opening every CSV output.
pub fn header(cli: &Cli) -> String {
    format!(
        "# fracwalk {}\n# config: {}\n# seed: {}\n",
        env!("CARGO_PKG_VERSION"),
        config_json(cli),
        cli.seed
    )
}

pub fn provenance(cli: &Cli) -> Value {
    json!({
        "version": env!("CARGO_PKG_VERSION"),
        "config": serde_json::to_value(cli).expect("config serializes"),
        "seed": cli.seed,
    })
}

pub fn to_json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("value serializes");
    s.push('\n');
    s
}

/// Finished output text plus an invariant violation, if any.
pub struct Outcome {
    pub text: String,
    pub failure: Option<String>,
}
