use fracwalk_core::kernels::{build_k, build_q};
use fracwalk_core::mixing::{mixing_curve, mixing_time, MixingTime, Start};
use fracwalk_core::spectral::{eigen_sym, Method};
use serde_json::json;

use super::{spectral_failure, step_law};
use crate::output::{header, parse_primes, provenance, to_json_text, Outcome};
use crate::{usage, Cli, CliError, Format, MixArgs};

const SANDWICH_TOL: f64 = 1e-9;

pub(super) fn run(cli: &Cli, args: &MixArgs) -> Result<Outcome, CliError> {
    let set = parse_primes(&args.p)?;
    if set.is_range {
        return Err(usage("mix takes a single prime"));
    }
    let p = set.primes[0];
    let mu = step_law(&args.mu)?;
    if args.start >= p.size() {
        return Err(usage(format!("start state {} is not below p = {p}", args.start)));
    }
    let k = build_k(&mu, p);
    let q = build_q(&mu, p).map_err(usage)?;
    let lambda2 = eigen_sym(&q, Method::auto(q.len()), 2)
        .map_err(spectral_failure)?
        .lambda2;
    let curve = mixing_curve(&k, &mu, p, args.start, args.steps, Some(lambda2)).map_err(usage)?;
    let start = if args.single_start {
        Start::From(args.start)
    } else {
        Start::WorstCase
    };
    let t_mix = mixing_time(&k, args.eps, start).map_err(usage)?;

    let violation = curve.points.iter().find(|pt| {
        pt.lower_bound_raw > pt.tv + SANDWICH_TOL
            || pt.upper_bound.is_some_and(|u| pt.tv > u + SANDWICH_TOL)
    });
    let failure = violation.map(|pt| {
        format!(
            "sandwich fails at step {}: lower {} tv {} upper {}",
            pt.n,
            pt.lower_bound_raw,
            pt.tv,
            super::fmt_opt(pt.upper_bound)
        )
    });
    let (t_kind, t_steps) = match t_mix {
        MixingTime::Exact(n) => ("exact", n),
        MixingTime::Exceeds(n) => ("exceeds", n),
    };
    let scope = if args.single_start { "single start" } else { "worst case" };

    let text = match cli.format {
        Format::Csv => {
            let mut s = header(cli);
            s.push_str(&format!("# p: {p}, mu: {mu}, start: {}, lambda2_Q: {lambda2}\n", args.start));
            s.push_str(&curve.to_csv());
            let t = match t_mix {
                MixingTime::Exact(n) => n.to_string(),
                MixingTime::Exceeds(n) => format!("> {n}"),
            };
            s.push_str(&format!("# t_mix({}): {t} ({scope})\n", args.eps));
            s.push_str(&format!(
                "# sandwich: {}\n",
                violation.map_or("ok".to_string(), |pt| format!("violated at step {}", pt.n))
            ));
            s
        }
        Format::Json => to_json_text(&json!({
            "provenance": provenance(cli),
            "mu": mu.to_string(),
            "lambda2_Q": lambda2,
            "curve": curve,
            "eps": args.eps,
            "t_mix": { "kind": t_kind, "steps": t_steps, "scope": scope },
            "sandwich_ok": violation.is_none(),
            "violation_step": violation.map(|pt| pt.n),
        })),
    };
    Ok(Outcome { text, failure })
}
