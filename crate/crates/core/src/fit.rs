//! Polylogarithmic scaling fits of infidelity versus memory size.
//!
//! A fit regresses `log10(1 - F)` on `log10(log2 N)`, so the slope is the exponent
//! `alpha` in `1 - F ~ (log N)^alpha`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    /// `(log2 N, log10 infidelity)` of the points used in the fit.
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in `log10` units.
    pub residual_rms: f64,
    pub min_log_n: usize,
}

impl ScalingFit {
    /// Infidelity predicted at `log2 N = log_n`.
    pub fn predict(&self, log_n: f64) -> f64 {
        10f64.powf(self.intercept + self.slope * log_n.log10())
    }
}

/// Least-squares fit over points `(log2 N, infidelity)` with `log2 N >= min_log_n`.
///
/// Points with non-positive infidelity cannot be placed on a log axis and are skipped.
pub fn loglog_fit(points: &[(usize, f64)], min_log_n: usize) -> Result<ScalingFit> {
    let used: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(n, infid)| n >= min_log_n && n >= 1 && infid > 0.0 && infid.is_finite())
        .map(|&(n, infid)| (n as f64, infid.log10()))
        .collect();
    if used.len() < 2 {
        return Err(SimError::InsufficientPoints { got: used.len() });
    }
    let xs: Vec<f64> = used.iter().map(|p| p.0.log10()).collect();
    let k = used.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = used.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&used).map(|(x, p)| (x - mx) * (p.1 - my)).sum();
    if sxx <= 0.0 {
        return Err(SimError::InsufficientPoints { got: 1 });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sq: f64 = xs.iter().zip(&used).map(|(x, p)| (p.1 - intercept - slope * x).powi(2)).sum();
    Ok(ScalingFit { points: used, slope, intercept, residual_rms: (sq / k).sqrt(), min_log_n })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_quadratic_law() {
        let pts: Vec<(usize, f64)> = (1..=9).map(|n| (n, 3e-5 * (n * n) as f64)).collect();
        let f = loglog_fit(&pts, 3).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-9);
        assert!(f.residual_rms < 1e-12);
        assert_eq!(f.points.len(), 7);
        assert!((f.predict(4.0) - 3e-5 * 16.0).abs() < 1e-15);
    }

    #[test]
    fn filter_and_insufficient_points() {
        let pts = vec![(2usize, 0.1), (3, 0.2), (4, 0.0)];
        assert_eq!(loglog_fit(&pts, 3).unwrap_err(), SimError::InsufficientPoints { got: 1 });
    }
}
