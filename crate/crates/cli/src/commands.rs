//! Small report commands: entropy profiles and analytic bounds.

use std::fmt::Write as _;

use qramsim::bounds::{bounds, BoundReport};
use qramsim::entropy::{entropy_profile, EntropyPoint};

use crate::config::{ExperimentConfig, VariantName};
use crate::error::CliError;
use crate::sweep::fmt_float;

/// Router entropies for `variant` at address width `n`.
pub fn entropy_points(variant: VariantName, n: usize) -> Result<Vec<EntropyPoint>, CliError> {
    if variant.is_hybrid() || variant == VariantName::Qrom {
        return Err(CliError::Config(format!("{} has no router tree to profile", variant.as_str())));
    }
    let circuit = variant.build(n, 1, None)?;
    Ok(entropy_profile(&circuit)?)
}

/// CSV with columns `level,router_wire,entropy,closed_form`; the last is empty when
/// the family has no closed form.
pub fn entropy_csv(points: &[EntropyPoint]) -> String {
    let mut out = String::from("level,router_wire,entropy,closed_form\n");
    for p in points {
        let closed = p.closed_form.map(fmt_float).unwrap_or_default();
        writeln!(out, "{},{},{},{}", p.level, p.router_wire, fmt_float(p.entropy), closed).expect("string write");
    }
    out
}

/// Bound report for every width of a config, using the circuit's own T.
pub fn config_bounds(config: &ExperimentConfig) -> Result<Vec<BoundReport>, CliError> {
    let channel = config.channel()?;
    config
        .widths()
        .map(|n| {
            let c = config.circuit(n)?;
            Ok(bounds(config.channel.epsilon, channel.epsilon_w, c.t(), n, c.summary().big_m))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bb3_entropy_csv() {
        let pts = entropy_points(VariantName::Bb3, 4).unwrap();
        let csv = entropy_csv(&pts);
        assert_eq!(csv.lines().count(), 5);
        assert!(csv.lines().nth(1).unwrap().starts_with("0,"));
        assert!(entropy_points(VariantName::Qrom, 3).is_err());
    }
}
