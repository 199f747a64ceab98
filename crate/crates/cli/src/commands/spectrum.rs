use std::path::Path;

use fracwalk_core::ffield::{generator_set, Modulus};
use fracwalk_core::kernels::{build_cayley, build_l, build_l0, build_q, Kernel, StepDist, WalkParams};
use fracwalk_core::spectral::{eigen_sym, Method, SpectralError};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::{fmt_opt, step_law, walk_params};
use crate::output::{header, parse_primes, provenance, to_json_text, Outcome};
use crate::{usage, Cli, CliError, Format, KernelName, SpectrumArgs};

const CSV_HEADER: &str = "p,kernel,states,lambda2,gap,method,residual,status";

#[derive(Debug, Serialize)]
struct Row {
    p: u64,
    kernel: &'static str,
    states: Option<usize>,
    lambda2: Option<f64>,
    gap: Option<f64>,
    method: Option<&'static str>,
    residual: Option<f64>,
    status: String,
    #[serde(skip)]
    violation: bool,
}

impl Row {
    fn failed(p: Modulus, kernel: KernelName, states: Option<usize>, status: String) -> Row {
        Row {
            p: p.get(),
            kernel: kernel.as_str(),
            states,
            lambda2: None,
            gap: None,
            method: None,
            residual: None,
            status,
            violation: false,
        }
    }

    fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.p,
            self.kernel,
            self.states.map(|n| n.to_string()).unwrap_or_default(),
            fmt_opt(self.lambda2),
            fmt_opt(self.gap),
            self.method.unwrap_or(""),
            self.residual.map(|r| format!("{r:e}")).unwrap_or_default(),
            self.status.replace(',', ";")
        )
    }
}

fn build(
    name: KernelName,
    mu: &StepDist,
    params: WalkParams,
    p: Modulus,
) -> Result<(Kernel, Option<String>), String> {
    match name {
        KernelName::Q => build_q(mu, p).map(|k| (k, None)).map_err(|e| e.to_string()),
        KernelName::L0 => build_l0(params, p).map(|k| (k, None)).map_err(|e| e.to_string()),
        KernelName::L => build_l(params, p).map(|k| (k, None)).map_err(|e| e.to_string()),
        KernelName::Cayley => {
            let gens = generator_set(params.a1, params.b(), p).map_err(|e| e.to_string())?;
            let walk = build_cayley(&gens, p);
            let note = (!walk.is_full(p)).then(|| {
                format!("proper subgroup of order {} in {}", walk.order(), p.sl2_order())
            });
            Ok((walk.kernel, note))
        }
    }
}

fn row_for(
    name: KernelName,
    mu: &StepDist,
    params: WalkParams,
    p: Modulus,
    dump: Option<&Path>,
) -> Result<Row, CliError> {
    let (kernel, note) = match build(name, mu, params, p) {
        Ok(k) => k,
        Err(e) => return Ok(Row::failed(p, name, None, format!("error: {e}"))),
    };
    if let Some(dir) = dump {
        let path = dir.join(format!("{}_p{}.json", name.as_str(), p));
        std::fs::write(&path, kernel.to_json())
            .map_err(|e| usage(format!("{}: {e}", path.display())))?;
    }
    let method = Method::auto(kernel.len());
    Ok(match eigen_sym(&kernel, method, 2) {
        Ok(r) => {
            let mut status = "ok".to_string();
            if r.disconnected {
                status = format!("disconnected (eigenvalue 1 has multiplicity {})", r.multiplicity_one);
            }
            if let Some(n) = note {
                status = format!("{status}; {n}");
            }
            Row {
                p: p.get(),
                kernel: name.as_str(),
                states: Some(kernel.len()),
                lambda2: Some(r.lambda2),
                gap: Some(r.gap),
                method: Some(method.as_str()),
                residual: Some(r.residual),
                status,
                violation: false,
            }
        }
        Err(e) => {
            let violation = !matches!(
                e,
                SpectralError::TooLarge { .. } | SpectralError::NonConvergence { .. }
            );
            let mut row = Row::failed(p, name, Some(kernel.len()), format!("error: {e}"));
            row.method = Some(method.as_str());
            row.violation = violation;
            row
        }
    })
}

pub(super) fn run(cli: &Cli, args: &SpectrumArgs) -> Result<Outcome, CliError> {
    let set = parse_primes(&args.p)?;
    let mu = step_law(&args.walk.mu)?;
    let params = walk_params(&args.walk, &mu)?;
    if let Some(dir) = &args.dump_kernel {
        std::fs::create_dir_all(dir).map_err(|e| usage(format!("{}: {e}", dir.display())))?;
    }
    let mut kernels = args.kernels.clone();
    kernels.dedup();
    let jobs: Vec<(Modulus, KernelName)> = set
        .primes
        .iter()
        .flat_map(|&p| kernels.iter().map(move |&k| (p, k)))
        .collect();
    let rows: Vec<Row> = jobs
        .par_iter()
        .map(|&(p, k)| row_for(k, &mu, params, p, args.dump_kernel.as_deref()))
        .collect::<Result<_, _>>()?;
    let failure = rows
        .iter()
        .find(|r| r.violation)
        .map(|r| format!("p={} kernel={}: {}", r.p, r.kernel, r.status));
    let text = match cli.format {
        Format::Csv => {
            let mut s = header(cli);
            s.push_str(&format!(
                "# mu: {mu}, a1: {}, a2: {}, primes: {}, skipped_composites: {}\n",
                params.a1,
                params.a2,
                set.primes.len(),
                set.skipped_composites
            ));
            s.push_str(CSV_HEADER);
            s.push('\n');
            for r in &rows {
                s.push_str(&r.csv());
                s.push('\n');
            }
            s
        }
        Format::Json => to_json_text(&json!({
            "provenance": provenance(cli),
            "mu": mu.to_string(),
            "a1": params.a1,
            "a2": params.a2,
            "skipped_composites": set.skipped_composites,
            "rows": rows,
        })),
    };
    Ok(Outcome { text, failure })
}
