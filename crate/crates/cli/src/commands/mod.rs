use fracwalk_core::kernels::{StepDist, WalkParams};
use fracwalk_core::spectral::SpectralError;

use crate::output::Outcome;
use crate::{usage, Cli, CliError, Command, WalkArgs};

mod compare;
mod generate;
mod hyperbola;
mod mix;
mod spectrum;

pub(crate) fn dispatch(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Mix(a) => mix::run(cli, a),
        Command::Spectrum(a) => spectrum::run(cli, a),
        Command::Compare(a) => compare::run(cli, a),
        Command::Hyperbola(a) => hyperbola::run(cli, a),
        Command::Generate(a) => generate::run(cli, a),
    }
}

/// Parses the step law and insists on at least two support points.
fn step_law(spec: &str) -> Result<StepDist, CliError> {
    let mu: StepDist = spec.parse().map_err(usage)?;
    if mu.len() < 2 {
        return Err(usage(format!(
            "step law {spec:?} has a single support point; the walk needs at least two values"
        )));
    }
    Ok(mu)
}

fn walk_params(walk: &WalkArgs, mu: &StepDist) -> Result<WalkParams, CliError> {
    match (walk.a1, walk.a2) {
        (Some(a1), Some(a2)) => WalkParams::new(a1, a2).map_err(usage),
        _ => WalkParams::choose(mu).map_err(usage),
    }
}

/// Size limits are configuration problems; everything else means the
/// numerics broke an invariant.
fn spectral_failure(e: SpectralError) -> CliError {
    match e {
        SpectralError::TooLarge { .. } | SpectralError::CutTooLarge { .. } | SpectralError::TooSmall => {
            usage(e)
        }
        other => CliError::Invariant(other.to_string()),
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}
