use fracwalk_core::ffield::generator_set;
use fracwalk_core::kernels::build_cayley;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::output::{header, parse_primes, provenance, to_json_text, Outcome};
use crate::{usage, Cli, CliError, Format, GenerateArgs};

#[derive(Debug, Serialize)]
struct Row {
    p: u64,
    a1: i64,
    b: i64,
    order: usize,
    expected: usize,
    generates: bool,
}

pub(super) fn run(cli: &Cli, args: &GenerateArgs) -> Result<Outcome, CliError> {
    let set = parse_primes(&args.p)?;
    let rows: Vec<Row> = set
        .primes
        .par_iter()
        .map(|&p| {
            let gens = generator_set(args.a1, args.b, p).map_err(usage)?;
            let order = build_cayley(&gens, p).order();
            Ok(Row {
                p: p.get(),
                a1: args.a1,
                b: args.b,
                order,
                expected: p.sl2_order(),
                generates: order == p.sl2_order(),
            })
        })
        .collect::<Result<_, CliError>>()?;
    let failure = rows
        .iter()
        .find(|r| r.p > r.b.unsigned_abs() && !r.generates)
        .map(|r| format!("p={}: closure has order {} instead of {}", r.p, r.order, r.expected));
    let text = match cli.format {
        Format::Csv => {
            let mut s = header(cli);
            s.push_str(&format!(
                "# primes: {}, skipped_composites: {}\n",
                set.primes.len(),
                set.skipped_composites
            ));
            s.push_str("p,a1,b,order,expected,generates\n");
            for r in &rows {
                s.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    r.p, r.a1, r.b, r.order, r.expected, r.generates
                ));
            }
            s
        }
        Format::Json => to_json_text(&json!({
            "provenance": provenance(cli),
            "skipped_composites": set.skipped_composites,
            "rows": rows,
        })),
    };
    Ok(Outcome { text, failure })
}
