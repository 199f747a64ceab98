use fracwalk_core::comparison::{verify_comparison, ComparisonError, ComparisonReport};
use rayon::prelude::*;
use serde_json::json;

use super::{spectral_failure, step_law, walk_params};
use crate::output::{header, parse_primes, provenance, to_json_text, Outcome};
use crate::{usage, Cli, CliError, CompareArgs, Format};

const CSV_HEADER: &str = "p,C,A,u,gap_L,gap_L0,gap_Q,links_ok,forms_ok,gap_transfer_ok";

fn failure_of(e: ComparisonError) -> CliError {
    match e {
        ComparisonError::Spectral(s) => spectral_failure(s),
        other => usage(other),
    }
}

pub(super) fn run(cli: &Cli, args: &CompareArgs) -> Result<Outcome, CliError> {
    let set = parse_primes(&args.p)?;
    let mu = step_law(&args.walk.mu)?;
    let params = walk_params(&args.walk, &mu)?;
    let reports: Vec<ComparisonReport> = set
        .primes
        .par_iter()
        .map(|&p| verify_comparison(&mu, params, p, args.trials, cli.seed).map_err(failure_of))
        .collect::<Result<_, _>>()?;
    let failure = reports.iter().find(|r| !r.ok()).map(|r| {
        let mut msg = format!(
            "p={}: links_ok={} forms_ok={} gap_transfer_ok={}",
            r.p, r.links_ok, r.forms_ok, r.gap_transfer_ok
        );
        if let Some(w) = &r.witness {
            msg.push_str(&format!("; witness f0 = {w:?}"));
        }
        msg
    });
    let text = match cli.format {
        Format::Csv => {
            let mut s = header(cli);
            s.push_str(&format!(
                "# mu: {mu}, a1: {}, a2: {}, trials: {}, primes: {}, skipped_composites: {}\n",
                params.a1,
                params.a2,
                args.trials,
                set.primes.len(),
                set.skipped_composites
            ));
            s.push_str(CSV_HEADER);
            s.push('\n');
            for r in &reports {
                s.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{}\n",
                    r.p, r.c, r.a, r.u, r.gap_l, r.gap_l0, r.gap_q, r.links_ok, r.forms_ok, r.gap_transfer_ok
                ));
            }
            s
        }
        Format::Json => to_json_text(&json!({
            "provenance": provenance(cli),
            "mu": mu.to_string(),
            "a1": params.a1,
            "a2": params.a2,
            "skipped_composites": set.skipped_composites,
            "reports": reports,
        })),
    };
    Ok(Outcome { text, failure })
}
