//! Analytic infidelity bounds and leading-order scalings.
//!
//! All bounds take the per-location error probability `epsilon`, the number of noise
//! rounds `T` and the address width `n = log2 N`.

use serde::{Deserialize, Serialize};

/// Leading-order infidelity scalings with unit prefactor, `N = 2^n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableScalings {
    /// `eps N log N`.
    pub fanout: f64,
    /// `eps log^2 N`.
    pub bb_three_level: f64,
    /// `eps log^3 N`.
    pub bb_two_level: f64,
    /// `eps N log^2 N`.
    pub qrom: f64,
    /// `eps (N log N + M log^2 N)`.
    pub hybrid_fanout: f64,
    /// `eps M log N (log N + log(N/M))`.
    pub hybrid_bb: f64,
}

impl TableScalings {
    pub fn new(epsilon: f64, n: usize, big_m: usize) -> Self {
        let log_n = n as f64;
        let big_n = (n as f64).exp2();
        let m = big_m.max(1) as f64;
        let log_sub = (log_n - m.log2()).max(0.0);
        TableScalings {
            fanout: epsilon * big_n * log_n,
            bb_three_level: epsilon * log_n * log_n,
            bb_two_level: epsilon * log_n.powi(3),
            qrom: epsilon * big_n * log_n * log_n,
            hybrid_fanout: epsilon * (big_n * log_n + m * log_n * log_n),
            hybrid_bb: epsilon * m * log_n * (log_n + log_sub),
        }
    }
}

/// Bound values for one `(epsilon, epsilon_w, T, n, M)` point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub epsilon: f64,
    pub epsilon_w: f64,
    #[serde(rename = "T")]
    pub t: u32,
    pub n: usize,
    #[serde(rename = "M")]
    pub big_m: usize,
    /// `4 eps T n`, mixed-unitary channels on three-level routers.
    pub eq28: f64,
    /// `4 eps T (n + n^2)`, two-level routers.
    pub two_level: f64,
    /// Leading-order coefficient `A' = 6 - 2 eps_w / eps`.
    pub a_prime: f64,
    /// `max(A', 0) eps T n`.
    pub general: f64,
    /// `4 eps_L T_L n` when logical parameters are supplied.
    pub logical: Option<f64>,
    pub scalings: TableScalings,
    /// `0 < eps < 1`.
    pub epsilon_in_range: bool,
    /// `eps T n <= 1/4`, the regime in which the bounds are stated.
    pub in_regime: bool,
    /// `eps_w <= 3 eps`, so that `A' >= 0`.
    pub general_valid: bool,
}

impl BoundReport {
    /// Adds the logical-error bound for an error-corrected circuit of depth `t_logical`.
    pub fn with_logical(mut self, epsilon_logical: f64, t_logical: u32) -> Self {
        self.logical = Some(logical_bound(epsilon_logical, t_logical, self.n));
        self
    }
}

/// `A' = 6 - 2 eps_w / eps`; for `eps = 0` the mixed-unitary value 4 is returned.
pub fn a_prime(epsilon: f64, epsilon_w: f64) -> f64 {
    if epsilon > 0.0 {
        6.0 - 2.0 * epsilon_w / epsilon
    } else {
        4.0
    }
}

/// `4 eps_L T_L n`.
pub fn logical_bound(epsilon_logical: f64, t_logical: u32, n: usize) -> f64 {
    4.0 * epsilon_logical * t_logical as f64 * n as f64
}

/// Computes every bound; out-of-regime inputs are flagged rather than rejected.
pub fn bounds(epsilon: f64, epsilon_w: f64, t: u32, n: usize, big_m: usize) -> BoundReport {
    let e = epsilon.max(0.0);
    let tt = t as f64;
    let nn = n as f64;
    let ap = a_prime(e, epsilon_w);
    BoundReport {
        epsilon,
        epsilon_w,
        t,
        n,
        big_m,
        eq28: 4.0 * e * tt * nn,
        two_level: 4.0 * e * tt * (nn + nn * nn),
        a_prime: ap,
        general: ap.max(0.0) * e * tt * nn,
        logical: None,
        scalings: TableScalings::new(e, n, big_m),
        epsilon_in_range: epsilon > 0.0 && epsilon < 1.0,
        in_regime: e * tt * nn <= 0.25,
        general_valid: epsilon_w <= 3.0 * e,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixed_unitary_bound_arithmetic() {
        let r = bounds(1e-4, 1e-4, 11, 3, 1);
        assert!((r.eq28 - 1.32e-2).abs() < 1e-15);
        assert!((r.two_level - 4.0 * 1e-4 * 11.0 * 12.0).abs() < 1e-15);
        assert!((r.a_prime - 4.0).abs() < 1e-12);
        assert!(r.in_regime && r.general_valid && r.epsilon_in_range);
    }

    #[test]
    fn damping_coefficient() {
        let r = bounds(1e-3, 0.0, 10, 4, 1);
        assert_eq!(r.a_prime, 6.0);
        assert!((r.general - 6.0 * 1e-3 * 40.0).abs() < 1e-15);
    }

    #[test]
    fn flags_outside_regime() {
        let r = bounds(0.1, 0.5, 20, 5, 1);
        assert!(!r.in_regime);
        assert!(!r.general_valid);
        assert_eq!(r.general, 0.0);
        assert!(!bounds(0.0, 0.0, 5, 2, 1).epsilon_in_range);
    }

    #[test]
    fn logical_bound_matches_physical_form() {
        let r = bounds(1e-4, 1e-4, 11, 3, 1).with_logical(1e-4, 11);
        assert_eq!(r.logical, Some(r.eq28));
    }

    #[test]
    fn hybrid_scaling_endpoints() {
        // M = 1 gives 2 eps log^2 N, M = N reproduces the QROM scaling.
        let s = TableScalings::new(1.0, 4, 1);
        assert_eq!(s.hybrid_bb, 32.0);
        let s = TableScalings::new(1.0, 4, 16);
        assert_eq!(s.hybrid_bb, s.qrom);
    }
}
