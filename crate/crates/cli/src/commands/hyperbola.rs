use fracwalk_core::hyperbola::{count_solutions, implied_delta, scan_max_ratio, Interval, ScanReport};
use fracwalk_core::kernels::{build_q, StepDist};
use fracwalk_core::spectral::spectral_gap;
use serde_json::json;

use super::spectral_failure;
use crate::output::{header, parse_lengths, parse_primes, provenance, to_json_text, Outcome};
use crate::{usage, Cli, CliError, Format, HyperbolaArgs};

/// Lengths below this are reported but left out of the measured δ.
const DELTA_MIN_M: usize = 16;

pub(super) fn run(cli: &Cli, args: &HyperbolaArgs) -> Result<Outcome, CliError> {
    let set = parse_primes(&args.p)?;
    if set.is_range {
        return Err(usage("hyperbola takes a single prime"));
    }
    let p = set.primes[0];
    let lengths = parse_lengths(&args.m)?;
    if let Some(&m) = lengths.iter().find(|&&m| m == 0 || 2 * m > p.size()) {
        return Err(usage(format!("interval length {m} must lie in 1..={}", p.size() / 2)));
    }
    let scan = args.i.is_none();
    let rows: Vec<ScanReport> = match (args.i, args.j) {
        (Some(i0), Some(j0)) => lengths
            .iter()
            .map(|&m| {
                let i = Interval::new(i0, m, p).map_err(usage)?;
                let j = Interval::new(j0, m, p).map_err(usage)?;
                let count = count_solutions(i, j, p);
                Ok(ScanReport {
                    p: p.get(),
                    m,
                    stride: 0,
                    i_start: i.start,
                    j_start: j.start,
                    count,
                    ratio: count as f64 / m as f64,
                })
            })
            .collect::<Result<_, CliError>>()?,
        _ => lengths
            .iter()
            .map(|&m| scan_max_ratio(p, m, args.stride).map_err(usage))
            .collect::<Result<_, _>>()?,
    };
    let best = rows
        .iter()
        .fold(None::<&ScanReport>, |b, r| match b {
            Some(b) if b.ratio >= r.ratio => Some(b),
            _ => Some(r),
        })
        .expect("at least one length");
    let measured_delta = rows
        .iter()
        .filter(|r| r.m >= DELTA_MIN_M)
        .map(|r| r.ratio)
        .reduce(f64::max)
        .map(|r| 1.0 - r);
    let implied = if scan {
        let q = build_q(&StepDist::u_101(), p).map_err(usage)?;
        let gamma = spectral_gap(&q).map_err(spectral_failure)? / 2.0;
        Some((gamma, implied_delta(gamma)))
    } else {
        None
    };

    let text = match cli.format {
        Format::Csv => {
            let mut s = header(cli);
            s.push_str(ScanReport::CSV_HEADER);
            s.push('\n');
            for r in &rows {
                s.push_str(&r.csv_row());
                s.push('\n');
            }
            s.push_str(&format!(
                "# max_ratio: {} at m={} i_start={} j_start={}\n",
                best.ratio, best.m, best.i_start, best.j_start
            ));
            if let Some(d) = measured_delta {
                s.push_str(&format!("# measured_delta (m >= {DELTA_MIN_M}): {d}\n"));
            }
            if let Some((g, d)) = implied {
                s.push_str(&format!("# gamma_prime: {g}, implied_delta: {d}\n"));
            }
            s
        }
        Format::Json => to_json_text(&json!({
            "provenance": provenance(cli),
            "rows": rows,
            "max": best,
            "measured_delta": measured_delta,
            "gamma_prime": implied.map(|x| x.0),
            "implied_delta": implied.map(|x| x.1),
        })),
    };
    Ok(Outcome {
        text,
        failure: None,
    })
}
