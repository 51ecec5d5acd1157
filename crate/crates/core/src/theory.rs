//! Closed-form drift bounds, thresholds, tail constants and phase times for
//! the biased voter and biased 2-choices dynamics.
//!
//! All logarithms are natural logarithms and every step count is an
//! explicit ceiling.

use serde::{Deserialize, Serialize};

use crate::dynamics::BiasParams;
use crate::error::{Error, Result};

fn check_phi(phi: f64) -> Result<()> {
    if phi > 0.0 && phi <= 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("conductance must lie in (0, 1], got {phi}")))
    }
}

fn ceil_steps(x: f64) -> u64 {
    x.max(0.0).ceil() as u64
}

/// High-probability lower bound on the voter drift:
/// `((q0 - q1) / 2) * phi * min(A, B)`.
pub fn voter_drift_lb(min_ab: usize, phi: f64, bias: &BiasParams) -> Result<f64> {
    bias.require_strict()?;
    check_phi(phi)?;
    Ok((bias.q0 - bias.q1) / 2.0 * phi * min_ab as f64)
}

/// `(eps1, eps2, eps3)` of the voter concentration argument.
pub fn voter_epsilons(bias: &BiasParams) -> Result<(f64, f64, f64)> {
    bias.require_strict()?;
    if bias.q1 <= 0.0 {
        return Err(Error::Bias("eps2 = (q0 - q1) / (4 q1) needs q1 > 0".into()));
    }
    let eps1 = (bias.q0 - bias.q1) / (4.0 * bias.q0);
    let eps2 = (bias.q0 - bias.q1) / (4.0 * bias.q1);
    let eps3 = (1.0 + eps2) * eps2.ln_1p() - eps2;
    Ok((eps1, eps2, eps3))
}

/// Concentration constant `gamma = phi * min(eps1^2 q0 / 3, eps3 q1)`.
pub fn gamma_constant(bias: &BiasParams, phi: f64) -> Result<f64> {
    check_phi(phi)?;
    let (eps1, _, eps3) = voter_epsilons(bias)?;
    let gamma = phi * (eps1 * eps1 * bias.q0 / 3.0).min(eps3 * bias.q1);
    Ok(gamma.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON))
}

/// `gamma` with `q1 = 0` allowed: the `eps3 q1` branch diverges as
/// `q1 -> 0`, leaving `phi * eps1^2 q0 / 3`.
fn gamma_with_limit(bias: &BiasParams, phi: f64) -> Result<f64> {
    if bias.q1 == 0.0 {
        let eps1 = bias.q0 / (4.0 * bias.q0);
        Ok((phi * eps1 * eps1 * bias.q0 / 3.0).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON))
    } else {
        gamma_constant(bias, phi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VoterPrediction {
    pub phi: f64,
    pub gamma: f64,
    /// steps until opinion 1 first becomes the majority
    pub t1: u64,
    /// steps from majority to consensus
    pub t2: u64,
    /// `(q0 - q1) phi >= 1`: the phase-II rate is undefined and `t2` falls
    /// back to `ceil(2 ln n)`.
    pub t2_degenerate: bool,
    /// `2 T1 exp(-gamma A0)`, clamped to `[0, 1]`
    pub fail_prob_phase1: f64,
    /// `2 exp(-((q0 - q1)^2 phi^2 / 2) n)`, clamped to `[0, 1]`
    pub overshoot_bound: f64,
}

impl VoterPrediction {
    pub fn total_steps(&self) -> u64 {
        self.t1 + self.t2
    }
}

/// Phase-I and phase-II step bounds of the biased voter dynamics.
pub fn voter_phase_times(n: usize, a0: usize, phi: f64, bias: &BiasParams) -> Result<VoterPrediction> {
    bias.require_strict()?;
    check_phi(phi)?;
    if n < 2 {
        return Err(Error::Parameter(format!("need n >= 2, got {n}")));
    }
    if a0 == 0 {
        return Err(Error::Parameter("phase times need A0 >= 1".into()));
    }
    let gap = bias.q0 - bias.q1;
    let nf = n as f64;
    let gamma = gamma_with_limit(bias, phi)?;
    let t1 = if 2 * a0 >= n {
        0
    } else {
        ceil_steps((nf / (2.0 * a0 as f64)).ln() / (gap / 2.0 * phi).ln_1p())
    };
    let contraction = gap * phi;
    let (t2, t2_degenerate) = if contraction >= 1.0 {
        (ceil_steps(2.0 * nf.ln()), true)
    } else {
        (ceil_steps(2.0 * nf.ln() / -(-contraction).ln_1p()), false)
    };
    let fail = if t1 == 0 { 0.0 } else { 2.0 * t1 as f64 * (-gamma * a0 as f64).exp() };
    let overshoot = 2.0 * (-(gap * gap * phi * phi / 2.0) * nf).exp();
    Ok(VoterPrediction {
        phi,
        gamma,
        t1,
        t2,
        t2_degenerate,
        fail_prob_phase1: fail.clamp(0.0, 1.0),
        overshoot_bound: overshoot.clamp(0.0, 1.0),
    })
}

/// Lower bound on the 2-choices expected drift that needs only `lambda`:
/// `B (q1 (1 - lambda^2) A / n - q1^2 / (q0 + q1))`. May be negative.
pub fn two_choices_drift_lb(a: usize, b: usize, lambda: f64, bias: &BiasParams) -> f64 {
    let n = (a + b) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let q1 = bias.q1;
    b as f64 * (q1 * (1.0 - lambda * lambda) * a as f64 / n - q1 * q1 / (bias.q0 + bias.q1))
}

/// Shifted imbalance `eps' = (A - B)/n + (q0 - q1)/(q0 + q1)`.
pub fn epsilon_prime(a: usize, b: usize, bias: &BiasParams) -> f64 {
    let n = (a + b) as f64;
    (a as f64 - b as f64) / n + (bias.q0 - bias.q1) / (bias.q0 + bias.q1)
}

/// Refined drift bound `(B q1 / 2) c eps'`, valid when `eps' >= 2 lambda^2`
/// and `lambda^2 <= q0/(q0+q1) - c`; the caller checks both.
pub fn refined_drift_lb(b: usize, q1: f64, c: f64, eps_prime: f64) -> f64 {
    b as f64 * q1 / 2.0 * c * eps_prime
}

/// Right-hand side of the quadratic-imbalance inequality
/// `sum_B (d_i^A/d)^2 - sum_A (d_i^B/d)^2 >= B ((1 - lambda^2) A/n - 2 theta (1 - theta))`
/// with `theta = E(A,B) / (d B)`.
pub fn quadratic_imbalance_lb(a: usize, b: usize, cut: usize, d: usize, lambda: f64) -> f64 {
    if b == 0 {
        return 0.0;
    }
    let n = (a + b) as f64;
    let theta = cut as f64 / (d * b) as f64;
    b as f64 * ((1.0 - lambda * lambda) * a as f64 / n - 2.0 * theta * (1.0 - theta))
}

/// Minimum initial fraction of opinion 1:
/// `q1/(q0+q1) + max(lambda^2, sqrt(ln n / (4 n)))`.
pub fn two_choices_threshold(n: usize, lambda: f64, bias: &BiasParams) -> f64 {
    let nf = n as f64;
    bias.inferior_share() + (lambda * lambda).max((nf.ln() / (4.0 * nf)).sqrt())
}

/// Admissible shifted-imbalance interval used by the 2-choices concentration
/// step: `[max(2 lambda^2, sqrt(ln n / n)), 2 q0/(q0+q1) - 2 gamma]`.
/// Note the `sqrt(ln n / n)` here, against `sqrt(ln n / (4n))` in
/// [`two_choices_threshold`].
pub fn concentration_interval(n: usize, lambda: f64, gamma: f64, bias: &BiasParams) -> (f64, f64) {
    let nf = n as f64;
    let lo = (2.0 * lambda * lambda).max((nf.ln() / nf).sqrt());
    let hi = 2.0 * bias.superior_share() - 2.0 * gamma;
    (lo, hi)
}

/// Default spectral margin `c = q0/(q0+q1) - lambda^2 - 0.01`; `None` when
/// the graph's gap is too small for any admissible `c`.
pub fn default_margin(lambda: f64, bias: &BiasParams) -> Option<f64> {
    let c = bias.superior_share() - lambda * lambda - 0.01;
    (c > 0.0).then_some(c)
}

pub fn default_gamma(c: f64) -> f64 {
    c.min(0.1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoChoicesPrediction {
    pub lambda: f64,
    pub c: f64,
    pub gamma: f64,
    pub eps_prime0: f64,
    pub threshold: f64,
    /// `eps'(0) >= 2 lambda^2`
    pub admissible: bool,
    /// `eps'(0)` lies in the concentration interval
    pub in_concentration_interval: bool,
    /// steps until `B <= n gamma`; `None` when `eps'(0) <= 0`
    pub t1: Option<u64>,
    /// phase-II contraction factor `1 - q1 c (q0/(q0+q1) - gamma)`
    pub r: f64,
    pub t2: u64,
    pub alpha: f64,
    pub beta: f64,
}

impl TwoChoicesPrediction {
    pub fn total_steps(&self) -> Option<u64> {
        self.t1.map(|t1| t1 + self.t2)
    }
}

/// Phase times and tail exponents of the biased 2-choices dynamics started
/// from `b0` agents with opinion 0.
pub fn two_choices_phase_times(
    n: usize,
    b0: usize,
    lambda: f64,
    gamma: f64,
    c: f64,
    bias: &BiasParams,
) -> Result<TwoChoicesPrediction> {
    bias.require_strict()?;
    if n < 2 || b0 > n {
        return Err(Error::Parameter(format!("need n >= 2 and B0 <= n, got n = {n}, B0 = {b0}")));
    }
    let share = bias.superior_share();
    if !(gamma > 0.0 && gamma <= c && c < share) {
        return Err(Error::Parameter(format!(
            "need 0 < gamma <= c < q0/(q0+q1) = {share}, got gamma = {gamma}, c = {c}"
        )));
    }
    let q1 = bias.q1;
    let nf = n as f64;
    let eps0 = epsilon_prime(n - b0, b0, bias);
    let t1 = if b0 as f64 <= nf * gamma {
        Some(0)
    } else if eps0 > 0.0 {
        let shrink = q1 * c * eps0 / 4.0;
        Some(ceil_steps((b0 as f64 / (nf * gamma)).ln() / -(-shrink).ln_1p()))
    } else {
        None
    };
    let r = 1.0 - q1 * c * (share - gamma);
    if !(r < 1.0 && r > 0.0) {
        return Err(Error::Internal(format!("phase-II contraction r = {r} outside (0, 1)")));
    }
    let t2 = ceil_steps(2.0 * nf.ln() / (1.0 / r).ln());
    let alpha = gamma * gamma * q1 * q1 * c * c / 8.0;
    let beta = 2.0 * (share - gamma).powi(2) * gamma * gamma * q1 * q1 * c * c;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Internal(format!("tail exponent alpha = {alpha} outside (0, 1)")));
    }
    let (lo, hi) = concentration_interval(n, lambda, gamma, bias);
    Ok(TwoChoicesPrediction {
        lambda,
        c,
        gamma,
        eps_prime0: eps0,
        threshold: two_choices_threshold(n, lambda, bias),
        admissible: eps0 >= 2.0 * lambda * lambda,
        in_concentration_interval: eps0 >= lo && eps0 <= hi,
        t1,
        r,
        t2,
        alpha,
        beta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bias(q0: f64, q1: f64) -> BiasParams {
        BiasParams::new(q0, q1).unwrap()
    }

    #[test]
    fn voter_lb_examples() {
        assert_eq!(voter_drift_lb(0, 0.5, &bias(0.8, 0.2)).unwrap(), 0.0);
        assert!((voter_drift_lb(100, 0.5, &bias(0.8, 0.2)).unwrap() - 15.0).abs() < 1e-12);
        assert!(matches!(voter_drift_lb(10, 0.5, &bias(0.5, 0.5)), Err(Error::Bias(_))));
        assert!(matches!(voter_drift_lb(10, 0.0, &bias(0.8, 0.2)), Err(Error::Parameter(_))));
    }

    #[test]
    fn gamma_regression() {
        // eps1 = 0.1875, eps1^2 q0 / 3 = 0.009375; eps3 q1 = 0.0458655...
        let g = gamma_constant(&bias(0.8, 0.2), 0.3).unwrap();
        assert!((g - 0.0028125).abs() < 1e-15, "{g}");
        assert!(matches!(gamma_constant(&bias(0.8, 0.0), 0.3), Err(Error::Bias(_))));
    }

    #[test]
    fn gamma_is_linear_in_phi() {
        let b = bias(0.9, 0.3);
        let g1 = gamma_constant(&b, 0.2).unwrap();
        let g2 = gamma_constant(&b, 0.4).unwrap();
        assert!((g2 - 2.0 * g1).abs() < 1e-15);
    }

    #[test]
    fn eps3_positive() {
        for q1 in [0.01, 0.1, 0.3, 0.49] {
            let (_, eps2, eps3) = voter_epsilons(&bias(0.5, q1)).unwrap();
            assert!(eps2 > 0.0 && eps3 > 0.0);
        }
    }

    #[test]
    fn voter_phase_examples() {
        let p = voter_phase_times(1024, 32, 0.5, &bias(1.0, 0.0)).unwrap();
        assert_eq!(p.t1, 13);
        assert_eq!(p.t2, 20);
        assert!(!p.t2_degenerate);
        assert_eq!(voter_phase_times(1024, 512, 0.5, &bias(1.0, 0.0)).unwrap().t1, 0);
        assert_eq!(voter_phase_times(1024, 600, 0.5, &bias(1.0, 0.0)).unwrap().fail_prob_phase1, 0.0);
    }

    #[test]
    fn voter_degenerate_phase_two() {
        let p = voter_phase_times(1000, 10, 1.0, &bias(1.0, 0.0)).unwrap();
        assert!(p.t2_degenerate);
        assert_eq!(p.t2, (2.0 * 1000f64.ln()).ceil() as u64);
    }

    #[test]
    fn voter_times_monotone() {
        let b = bias(0.9, 0.1);
        let mut prev = u64::MAX;
        for a0 in [1, 5, 20, 100, 400] {
            let t1 = voter_phase_times(1000, a0, 0.3, &b).unwrap().t1;
            assert!(t1 <= prev);
            prev = t1;
        }
        let mut prev = 0;
        for n in [100, 1000, 10_000, 100_000] {
            let t1 = voter_phase_times(n, 10, 0.3, &b).unwrap().t1;
            assert!(t1 >= prev);
            prev = t1;
        }
    }

    #[test]
    fn voter_times_grow_additively_under_doubling() {
        let b = bias(0.9, 0.1);
        let phi = 0.2;
        let rate1 = ((b.q0 - b.q1) / 2.0 * phi).ln_1p();
        let rate2 = -(-(b.q0 - b.q1) * phi).ln_1p();
        let increment = 2f64.ln() / rate1 + 2.0 * 2f64.ln() / rate2;
        let totals: Vec<i64> = [1024, 2048, 4096, 8192]
            .iter()
            .map(|&n| voter_phase_times(n, 8, phi, &b).unwrap().total_steps() as i64)
            .collect();
        let diffs: Vec<i64> = totals.windows(2).map(|w| w[1] - w[0]).collect();
        for &d in &diffs {
            // two ceilings, each off by less than one step
            assert!((d as f64 - increment).abs() < 2.0, "{diffs:?} vs {increment}");
        }
        assert!(diffs.iter().max().unwrap() - diffs.iter().min().unwrap() <= 2);
    }

    #[test]
    fn two_choices_lb_examples() {
        let b = bias(0.8, 0.2);
        assert_eq!(two_choices_drift_lb(100, 0, 0.3, &b), 0.0);
        // lambda = 0 and a/n = q1/(q0+q1) cancels exactly
        assert!(two_choices_drift_lb(200, 800, 0.0, &b).abs() < 1e-12);
    }

    #[test]
    fn epsilon_prime_examples() {
        assert_eq!(epsilon_prime(50, 50, &bias(0.5, 0.5)), 0.0);
        let b = bias(0.8, 0.2);
        assert!((epsilon_prime(100, 0, &b) - 1.6).abs() < 1e-15);
        // b/n = q0/(q0+q1) = 0.8
        assert!(epsilon_prime(200, 800, &b).abs() < 1e-15);
    }

    #[test]
    fn refined_lb_is_product() {
        assert_eq!(refined_drift_lb(0, 0.2, 0.3, 0.5), 0.0);
        let base = refined_drift_lb(10, 0.2, 0.3, 0.5);
        assert!((refined_drift_lb(20, 0.2, 0.3, 0.5) - 2.0 * base).abs() < 1e-15);
        assert!((refined_drift_lb(10, 0.4, 0.3, 0.5) - 2.0 * base).abs() < 1e-15);
        assert!((refined_drift_lb(10, 0.2, 0.6, 0.5) - 2.0 * base).abs() < 1e-15);
        assert!((refined_drift_lb(10, 0.2, 0.3, 1.0) - 2.0 * base).abs() < 1e-15);
    }

    #[test]
    fn threshold_examples() {
        let t = two_choices_threshold(2000, 0.0, &bias(0.8, 0.2));
        assert!((t - 0.230_823_899_938_890_94).abs() < 1e-12, "{t}");
        let t = two_choices_threshold(1_000_000, 0.9, &bias(0.8, 0.2));
        assert!((t - (0.2 + 0.81)).abs() < 1e-12);
        let t = two_choices_threshold(2000, 0.0, &bias(0.5, 0.5));
        assert!(t > 0.5);
    }

    #[test]
    fn two_choices_phase_regression() {
        let p = two_choices_phase_times(2000, 100, 0.0, 0.1, 0.3, &bias(0.8, 0.2)).unwrap();
        assert!((p.r - 0.958).abs() < 1e-12);
        assert_eq!(p.t2, 355);
        assert_eq!(p.t1, Some(0));
        assert!(p.alpha > 0.0 && p.alpha < 1.0);
    }

    #[test]
    fn two_choices_phase_one_count() {
        let b = bias(0.8, 0.2);
        // B0 = 1400 of 2000: eps' = -0.4 + 0.6 = 0.2
        let p = two_choices_phase_times(2000, 1400, 0.0, 0.1, 0.3, &b).unwrap();
        let expect = (1400.0f64 / 200.0).ln() / -(1.0f64 - 0.2 * 0.3 * 0.2 / 4.0).ln();
        assert_eq!(p.t1, Some(expect.ceil() as u64));
        // below the zero of eps'
        let p = two_choices_phase_times(2000, 1700, 0.0, 0.1, 0.3, &b).unwrap();
        assert_eq!(p.t1, None);
    }

    #[test]
    fn two_choices_parameter_checks() {
        let b = bias(0.8, 0.2);
        assert!(matches!(two_choices_phase_times(2000, 10, 0.0, 0.4, 0.3, &b), Err(Error::Parameter(_))));
        assert!(matches!(two_choices_phase_times(2000, 10, 0.0, 0.1, 0.9, &b), Err(Error::Parameter(_))));
        assert!(matches!(
            two_choices_phase_times(2000, 10, 0.0, 0.1, 0.3, &bias(0.8, 0.0)),
            Err(Error::Internal(_))
        ));
    }

    #[test]
    fn default_constants() {
        let b = bias(0.8, 0.2);
        let c = default_margin(0.1, &b).unwrap();
        assert!((c - (0.8 - 0.01 - 0.01)).abs() < 1e-12);
        assert_eq!(default_gamma(c), 0.1);
        assert_eq!(default_margin(0.95, &b), None);
    }

    proptest! {
        #[test]
        fn threshold_monotone_in_lambda_and_share(
            n in 2usize..100_000,
            l1 in 0.0f64..1.0, l2 in 0.0f64..1.0,
            q0 in 0.05f64..1.0, f1 in 0.0f64..1.0, f2 in 0.0f64..1.0,
        ) {
            let (lo, hi) = if l1 <= l2 { (l1, l2) } else { (l2, l1) };
            let b = bias(q0, q0 * f1);
            prop_assert!(two_choices_threshold(n, lo, &b) <= two_choices_threshold(n, hi, &b));
            let (s1, s2) = if f1 <= f2 { (f1, f2) } else { (f2, f1) };
            prop_assert!(
                two_choices_threshold(n, lo, &bias(q0, q0 * s1))
                    <= two_choices_threshold(n, lo, &bias(q0, q0 * s2)) + 1e-15
            );
        }

        #[test]
        fn tail_exponents_in_range(
            q0 in 0.1f64..=1.0, f in 0.01f64..0.99, lambda in 0.0f64..0.5, gf in 0.01f64..=1.0,
        ) {
            let b = bias(q0, q0 * f);
            if let Some(c) = default_margin(lambda, &b) {
                let gamma = c * gf;
                let p = two_choices_phase_times(1000, 400, lambda, gamma, c, &b).unwrap();
                prop_assert!(p.alpha > 0.0 && p.alpha < 1.0);
                prop_assert!(p.beta > 0.0);
                prop_assert!(p.r > 0.0 && p.r < 1.0);
            }
        }

        #[test]
        fn gamma_in_unit_interval(q0 in 0.01f64..=1.0, f in 0.001f64..0.999, phi in 0.001f64..=1.0) {
            let g = gamma_constant(&bias(q0, q0 * f), phi).unwrap();
            prop_assert!(g > 0.0 && g < 1.0);
        }

        #[test]
        fn voter_lb_monotone(m in 0usize..1000, p1 in 0.01f64..=1.0, p2 in 0.01f64..=1.0, q0 in 0.1f64..=1.0, f1 in 0.0f64..0.99, f2 in 0.0f64..0.99) {
            let (lo, hi) = if p1 <= p2 { (p1, p2) } else { (p2, p1) };
            let b = bias(q0, q0 * f1);
            prop_assert!(voter_drift_lb(m, lo, &b).unwrap() <= voter_drift_lb(m, hi, &b).unwrap());
            // larger gap q0 - q1 means smaller q1 for fixed q0
            let (small, large) = if f1 <= f2 { (f1, f2) } else { (f2, f1) };
            prop_assert!(
                voter_drift_lb(m, lo, &bias(q0, q0 * large)).unwrap()
                    <= voter_drift_lb(m, lo, &bias(q0, q0 * small)).unwrap() + 1e-12
            );
        }
    }
}
