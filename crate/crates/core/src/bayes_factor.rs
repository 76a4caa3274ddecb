//! Priors on the variance ratio, the closed-form and quadrature Bayes
//! factors, posterior model probability, and the decision rule.
//!
//! The Bayes factor for `M1: sigma_a^2 != 0` against `M0: sigma_a^2 = 0`
//! depends on the data only through `W_E / W_T` and the design. With the
//! Pearson type VI prior at `kappa = r` and `beta = (n-p)/2 - alpha - 2` it
//! collapses to a ratio of gamma functions times `(W_E/W_T)^(-(n-p-2)/2 +
//! alpha)`; for arbitrary hyperparameters it is a one-dimensional integral.

use crate::core_math::{
    integrate_unit_interval, log_beta, log_gamma, log_gamma_unchecked, QuadratureSpec,
};
use crate::data_model::{BalancedDesign, SufficientStats};
use crate::{Error, Result};

/// Pearson type VI prior on `tau = sigma_a^2 / sigma^2`:
///
/// `pi(tau) = kappa (kappa tau)^beta (1 + kappa tau)^(-alpha-beta-2) /
/// B(alpha+1, beta+1)` on `(0, inf)`.
///
/// `kappa = 1, alpha = beta = 0` is the hyper-g (WG) prior `(1+tau)^-2`;
/// `kappa = 1/n, alpha = -1/2, beta = 0` is the hyper-g/n prior; `kappa = r,
/// alpha = beta = 0` puts a uniform prior on `r tau / (1 + r tau)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PearsonTypeVI {
    alpha: f64,
    beta: f64,
    kappa: f64,
}

impl PearsonTypeVI {
    pub fn new(alpha: f64, beta: f64, kappa: f64) -> Result<Self> {
        if !(alpha > -1.0) || !alpha.is_finite() {
            return Err(Error::HyperparameterOutOfRange(format!(
                "alpha must be > -1, got {alpha}"
            )));
        }
        if !(beta > -1.0) || !beta.is_finite() {
            return Err(Error::HyperparameterOutOfRange(format!(
                "beta must be > -1, got {beta}"
            )));
        }
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(Error::HyperparameterOutOfRange(format!(
                "kappa must be > 0, got {kappa}"
            )));
        }
        Ok(Self { alpha, beta, kappa })
    }

    /// The prior of the closed-form theorem: `kappa = r` and
    /// `beta = (n-p)/2 - alpha - 2`.
    ///
    /// Fails when that `beta` is not > -1, which happens for small designs:
    /// at `(p, r) = (2, 2)` the recommended `alpha = 0` already gives
    /// `beta = -1`.
    pub fn closed_form_prior(design: BalancedDesign, alpha: f64) -> Result<Self> {
        let beta = theorem_beta(design, alpha);
        if !(beta > -1.0) {
            return Err(Error::HyperparameterOutOfRange(format!(
                "beta = (n-p)/2 - alpha - 2 = {beta} requires alpha < (n-p)/2 - 1 = {}; \
                 got alpha = {alpha} at (p, r) = ({}, {})",
                (design.n() - design.p()) as f64 / 2.0 - 1.0,
                design.p(),
                design.r(),
            )));
        }
        Self::new(alpha, beta, design.r() as f64)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }
}

fn theorem_beta(design: BalancedDesign, alpha: f64) -> f64 {
    (design.n() - design.p()) as f64 / 2.0 - alpha - 2.0
}

/// Model parameters of the data-generating process. `sigma_a2 = 0` encodes
/// `M0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub mu: f64,
    pub sigma2: f64,
    pub sigma_a2: f64,
}

impl ModelParams {
    pub fn new(mu: f64, sigma2: f64, sigma_a2: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::Domain(format!("mu must be finite, got {mu}")));
        }
        if !(sigma2 > 0.0) || !sigma2.is_finite() {
            return Err(Error::Domain(format!("sigma2 must be > 0, got {sigma2}")));
        }
        if !(sigma_a2 >= 0.0) || !sigma_a2.is_finite() {
            return Err(Error::Domain(format!(
                "sigma_a2 must be >= 0, got {sigma_a2}"
            )));
        }
        Ok(Self {
            mu,
            sigma2,
            sigma_a2,
        })
    }

    /// The variance ratio `tau = sigma_a^2 / sigma^2`.
    pub fn variance_ratio(&self) -> f64 {
        self.sigma_a2 / self.sigma2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Method {
    ClosedForm,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Decision {
    M0,
    M1,
}

/// The outcome of a Bayes factor computation.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct BayesFactorResult {
    /// Canonical value; `+inf` for degenerate data with `W_E = 0`.
    pub log_bf10: f64,
    /// `exp(log_bf10)`, saturating to `+inf` on overflow.
    pub bf10: f64,
    /// Posterior probability of `M1` at equal prior odds.
    pub posterior_prob_m1: f64,
    pub method: Method,
    /// `M1` iff `BF_10 > 1` (strict; ties go to `M0`).
    pub decision: Decision,
    /// Set when `W_E = 0` made the Bayes factor infinite.
    pub degenerate: bool,
}

impl BayesFactorResult {
    fn from_log_bf(log_bf10: f64, method: Method, degenerate: bool) -> Self {
        Self {
            log_bf10,
            bf10: log_bf10.exp(),
            posterior_prob_m1: sigmoid(log_bf10),
            method,
            decision: if log_bf10 > 0.0 {
                Decision::M1
            } else {
                Decision::M0
            },
            degenerate,
        }
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// The closed-form log Bayes factor at the prior of
/// [`PearsonTypeVI::closed_form_prior`]:
///
/// `ln BF_10 = ln G(p/2 + alpha + 1/2) + ln G((n-p)/2) - ln G((n-1)/2)
///  - ln G(alpha + 1) + (-(n-p-2)/2 + alpha) ln(W_E/W_T)`.
pub fn closed_form_log_bf(stats: &SufficientStats, alpha: f64) -> Result<BayesFactorResult> {
    // Validates alpha > -1 and the induced beta > -1.
    PearsonTypeVI::closed_form_prior(stats.design, alpha)?;

    if stats.w_t <= 0.0 {
        return Err(Error::DegenerateData(
            "all observations identical (W_T = 0): the ratio W_E/W_T is undefined".to_string(),
        ));
    }
    if stats.w_e == 0.0 {
        // Limit of the closed form as W_E -> 0: the data maximally favor M1.
        return Ok(BayesFactorResult::from_log_bf(
            f64::INFINITY,
            Method::ClosedForm,
            true,
        ));
    }
    let log_bf = closed_form_log_bf_for_ratio(stats.design, stats.w_e / stats.w_t, alpha)?;
    Ok(BayesFactorResult::from_log_bf(
        log_bf,
        Method::ClosedForm,
        false,
    ))
}

/// The closed form as a function of the ratio `W_E / W_T` alone.
pub fn closed_form_log_bf_for_ratio(
    design: BalancedDesign,
    we_over_wt: f64,
    alpha: f64,
) -> Result<f64> {
    PearsonTypeVI::closed_form_prior(design, alpha)?;
    if !(we_over_wt > 0.0 && we_over_wt <= 1.0) {
        return Err(Error::Domain(format!(
            "W_E/W_T must lie in (0, 1], got {we_over_wt}"
        )));
    }
    let (p, n) = (design.p() as f64, design.n() as f64);
    Ok(log_gamma_unchecked(0.5 * p + alpha + 0.5) + log_gamma_unchecked(0.5 * (n - p))
        - log_gamma_unchecked(0.5 * (n - 1.0))
        - log_gamma_unchecked(alpha + 1.0)
        + (-0.5 * (n - p - 2.0) + alpha) * we_over_wt.ln())
}

/// Log density of the Pearson type VI prior at `tau > 0`.
pub fn pearson_vi_log_pdf(tau: f64, prior: &PearsonTypeVI) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(Error::Domain(format!(
            "pearson_vi_log_pdf requires tau > 0, got {tau}"
        )));
    }
    let kt = prior.kappa * tau;
    Ok(prior.kappa.ln() + prior.beta * kt.ln()
        - (prior.alpha + prior.beta + 2.0) * kt.ln_1p()
        - log_beta(prior.alpha + 1.0, prior.beta + 1.0)?)
}

/// The Bayes factor as a one-dimensional integral over the prior:
///
/// `BF_10 = int_0^inf (1 + tau r)^(-(p-1)/2)
///          (1 - (tau r / (1 + tau r)) W_H/W_T)^(-(n-1)/2) pi(tau) dtau`.
///
/// Evaluated in the log domain after the compactifying substitution
/// `u = kappa tau / (1 + kappa tau)`, under which the prior mass becomes the
/// `Beta(beta+1, alpha+1)` density in `u` exactly, and the likelihood factor
/// stays smooth:
///
/// `ln f(u) = beta ln u + alpha ln(1-u) - ln B(alpha+1, beta+1)
///  + (n-p)/2 ln(1 + t) - (n-1)/2 ln(1 + t W_E/W_T)`,  `t = (r/kappa)
///  u/(1-u)`.
pub fn quadrature_log_bf(
    stats: &SufficientStats,
    prior: &PearsonTypeVI,
    spec: &QuadratureSpec,
) -> Result<BayesFactorResult> {
    if stats.w_t <= 0.0 {
        return Err(Error::DegenerateData(
            "all observations identical (W_T = 0): the ratio W_E/W_T is undefined".to_string(),
        ));
    }
    if stats.w_e == 0.0 {
        // The integrand grows like (1 + t)^((n-p)/2); the integral diverges.
        return Ok(BayesFactorResult::from_log_bf(
            f64::INFINITY,
            Method::Quadrature,
            true,
        ));
    }

    let design = stats.design;
    let (p, n, r) = (design.p() as f64, design.n() as f64, design.r() as f64);
    let ratio_e = stats.w_e / stats.w_t;
    let ln_b = log_beta(prior.alpha + 1.0, prior.beta + 1.0)?;
    let (alpha, beta) = (prior.alpha, prior.beta);
    let r_over_kappa = r / prior.kappa;

    let integrand = move |u: f64| {
        let t = r_over_kappa * u / (1.0 - u);
        beta * u.ln() + alpha * (1.0 - u).ln() - ln_b + 0.5 * (n - p) * t.ln_1p()
            - 0.5 * (n - 1.0) * (t * ratio_e).ln_1p()
    };

    let value = integrate_unit_interval(integrand, spec)?;
    let degenerate = value.is_divergent();
    Ok(BayesFactorResult::from_log_bf(
        value.ln(),
        Method::Quadrature,
        degenerate,
    ))
}

/// Posterior probability of `M1` from the log Bayes factor and the prior
/// probability of `M1`:
///
/// `p(M1 | Y) = pi1 BF / (pi0 + pi1 BF)`, computed through the log posterior
/// odds so no magnitude of `log_bf10` overflows.
pub fn posterior_prob_m1(log_bf10: f64, prior_prob_m1: f64) -> Result<f64> {
    if !(prior_prob_m1 > 0.0 && prior_prob_m1 < 1.0) {
        return Err(Error::Domain(format!(
            "prior probability must lie in (0, 1), got {prior_prob_m1}"
        )));
    }
    if log_bf10.is_nan() {
        return Err(Error::Domain("log Bayes factor is NaN".to_string()));
    }
    let log_prior_odds = prior_prob_m1.ln() - (-prior_prob_m1).ln_1p();
    Ok(sigmoid(log_bf10 + log_prior_odds))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data_model::{sufficient_stats, DataMatrix};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn design(p: usize, r: usize) -> BalancedDesign {
        BalancedDesign::new(p, r).unwrap()
    }

    #[test]
    fn prior_validation() {
        assert!(PearsonTypeVI::new(-0.5, 0.0, 1.0).is_ok());
        assert!(PearsonTypeVI::new(-1.0, 0.0, 1.0).is_err());
        assert!(PearsonTypeVI::new(0.0, -1.0, 1.0).is_err());
        assert!(PearsonTypeVI::new(0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn closed_form_prior_rejects_small_designs() {
        // (2, 2) with alpha = 0 gives beta = -1.
        let err = PearsonTypeVI::closed_form_prior(design(2, 2), 0.0).unwrap_err();
        match err {
            Error::HyperparameterOutOfRange(msg) => assert!(msg.contains("beta = -1")),
            other => panic!("unexpected error {other:?}"),
        }
        assert!(PearsonTypeVI::closed_form_prior(design(2, 2), -0.5).is_ok());
    }

    #[test]
    fn closed_form_at_unit_ratio() {
        // p = r = 2, alpha = -1/2, W_H = 0: BF = Gamma(1)^2 / (Gamma(3/2)
        // Gamma(1/2)) = 2/pi.
        let stats = SufficientStats::from_ratio(design(2, 2), 1.0).unwrap();
        let res = closed_form_log_bf(&stats, -0.5).unwrap();
        assert_relative_eq!(res.bf10, 2.0 / std::f64::consts::PI, max_relative = 1e-12);
        assert_eq!(res.decision, Decision::M0);
        assert!(!res.degenerate);
    }

    #[test]
    fn closed_form_on_hand_computed_data() {
        // W_E/W_T = 1/2 multiplies the unit-ratio value by 2^(1/2);
        // confirmed against the quadrature oracle in quadrature_matches_
        // closed_form below.
        let data = DataMatrix::from_rows(&[vec![0.0, 2.0], vec![2.0, 4.0]]).unwrap();
        let stats = sufficient_stats(&data);
        let res = closed_form_log_bf(&stats, -0.5).unwrap();
        let expected = 2.0 * std::f64::consts::SQRT_2 / std::f64::consts::PI;
        assert_relative_eq!(res.bf10, expected, max_relative = 1e-12);
        assert_eq!(res.decision, Decision::M0); // 0.9003 < 1
    }

    #[test]
    fn closed_form_degenerate_cases() {
        let zero_we = SufficientStats {
            w_h: 5.0,
            w_e: 0.0,
            w_t: 5.0,
            grand_mean: 0.0,
            group_means: vec![0.0, 0.0],
            design: design(2, 3),
        };
        let res = closed_form_log_bf(&zero_we, -0.5).unwrap();
        assert_eq!(res.log_bf10, f64::INFINITY);
        assert_eq!(res.bf10, f64::INFINITY);
        assert_eq!(res.decision, Decision::M1);
        assert!(res.degenerate);
        assert_eq!(res.posterior_prob_m1, 1.0);

        let constant = SufficientStats {
            w_h: 0.0,
            w_e: 0.0,
            w_t: 0.0,
            grand_mean: 1.0,
            group_means: vec![1.0, 1.0],
            design: design(2, 3),
        };
        assert!(matches!(
            closed_form_log_bf(&constant, -0.5),
            Err(Error::DegenerateData(_))
        ));
    }

    #[test]
    fn pearson_pdf_known_values() {
        // (tau=1, alpha=0, beta=0, kappa=1): (1+1)^-2 = 1/4.
        let wg = PearsonTypeVI::new(0.0, 0.0, 1.0).unwrap();
        assert_relative_eq!(
            pearson_vi_log_pdf(1.0, &wg).unwrap(),
            0.25f64.ln(),
            max_relative = 1e-14
        );
        // (tau=2, alpha=-1/2, beta=0, kappa=1): (1+2)^(-3/2) / B(1/2, 1),
        // B(1/2, 1) = 2.
        let prior = PearsonTypeVI::new(-0.5, 0.0, 1.0).unwrap();
        assert_relative_eq!(
            pearson_vi_log_pdf(2.0, &prior).unwrap(),
            (3f64.powf(-1.5) / 2.0).ln(),
            max_relative = 1e-13
        );
        assert!(pearson_vi_log_pdf(0.0, &wg).is_err());
        assert!(pearson_vi_log_pdf(-1.0, &wg).is_err());
    }

    #[test]
    fn pearson_pdf_reduces_to_wg_prior() {
        // kappa = 1, alpha = beta = 0 is exactly (1 + tau)^-2.
        let wg = PearsonTypeVI::new(0.0, 0.0, 1.0).unwrap();
        for tau in [0.01, 0.1, 1.0, 10.0, 100.0] {
            let expected = -2.0 * tau.ln_1p();
            assert_abs_diff_eq!(
                pearson_vi_log_pdf(tau, &wg).unwrap(),
                expected,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn pearson_pdf_normalizes() {
        // int_0^inf pi(tau) dtau = 1 via the same u-substitution the Bayes
        // factor uses: tau = u / (kappa (1 - u)).
        let cases = [
            (0.0, 0.0, 1.0),
            (-0.5, 0.0, 1.0),
            (-0.5, 0.0, 0.1),
            (0.0, -0.5, 1.0),
            (1.5, 2.0, 7.0),
            (-0.9, -0.9, 3.0),
            (2.0, 5.0, 0.01),
        ];
        let spec = QuadratureSpec::default();
        for (alpha, beta, kappa) in cases {
            let prior = PearsonTypeVI::new(alpha, beta, kappa).unwrap();
            let mass = integrate_unit_interval(
                |u| {
                    let tau = u / (kappa * (1.0 - u));
                    // d tau / d u = 1 / (kappa (1-u)^2)
                    pearson_vi_log_pdf(tau, &prior).unwrap()
                        - kappa.ln()
                        - 2.0 * (1.0 - u).ln()
                },
                &spec,
            )
            .unwrap();
            assert_abs_diff_eq!(mass.ln(), 0.0, epsilon = 1e-7);
        }
    }

    #[test]
    fn quadrature_matches_closed_form() {
        // At kappa = r, beta = (n-p)/2 - alpha - 2 the integral has the
        // closed form; the two routes must agree. This is also the oracle
        // for the hand-computed example above.
        let spec = QuadratureSpec::default();
        let cases = [
            (2usize, 2usize, -0.5, 0.5),
            (2, 2, -0.5, 1.0),
            (3, 4, -0.25, 0.7),
            (5, 2, -0.1, 0.9),
            (10, 7, -0.5, 0.25),
            (4, 25, -0.2, 0.999),
        ];
        for (p, r, alpha, ratio) in cases {
            let d = design(p, r);
            let stats = SufficientStats::from_ratio(d, ratio).unwrap();
            let prior = PearsonTypeVI::closed_form_prior(d, alpha).unwrap();
            let via_quad = quadrature_log_bf(&stats, &prior, &spec).unwrap();
            let via_formula = closed_form_log_bf(&stats, alpha).unwrap();
            assert_abs_diff_eq!(
                via_quad.log_bf10,
                via_formula.log_bf10,
                epsilon = 1e-6
            );
            assert_eq!(via_quad.method, Method::Quadrature);
        }
    }

    #[test]
    fn quadrature_below_one_when_group_means_equal() {
        // W_H = 0 (ratio 1): BF = int (1 + tau r)^(-(p-1)/2) pi(tau) dtau < 1
        // for any proper prior.
        let spec = QuadratureSpec::default();
        for (alpha, beta, kappa) in [(0.0, 0.0, 1.0), (-0.5, 0.0, 1.0), (0.0, -0.5, 1.0)] {
            let prior = PearsonTypeVI::new(alpha, beta, kappa).unwrap();
            let stats = SufficientStats::from_ratio(design(4, 3), 1.0).unwrap();
            let res = quadrature_log_bf(&stats, &prior, &spec).unwrap();
            assert!(res.log_bf10 < 0.0, "BF must be < 1, got {}", res.bf10);
        }
    }

    #[test]
    fn quadrature_degenerate_cases() {
        let spec = QuadratureSpec::default();
        let prior = PearsonTypeVI::new(-0.5, 0.0, 1.0).unwrap();

        let zero_we = SufficientStats {
            w_h: 5.0,
            w_e: 0.0,
            w_t: 5.0,
            grand_mean: 0.0,
            group_means: vec![0.0, 0.0],
            design: design(2, 3),
        };
        let res = quadrature_log_bf(&zero_we, &prior, &spec).unwrap();
        assert_eq!(res.log_bf10, f64::INFINITY);
        assert!(res.degenerate);

        let constant = SufficientStats {
            w_h: 0.0,
            w_e: 0.0,
            w_t: 0.0,
            grand_mean: 0.0,
            group_means: vec![0.0, 0.0],
            design: design(2, 3),
        };
        assert!(matches!(
            quadrature_log_bf(&constant, &prior, &spec),
            Err(Error::DegenerateData(_))
        ));
    }

    #[test]
    fn posterior_probability_values() {
        assert_abs_diff_eq!(posterior_prob_m1(0.0, 0.5).unwrap(), 0.5, epsilon = 1e-15);
        assert_eq!(posterior_prob_m1(f64::INFINITY, 0.5).unwrap(), 1.0);
        assert_eq!(posterior_prob_m1(f64::NEG_INFINITY, 0.5).unwrap(), 0.0);
        assert_abs_diff_eq!(
            posterior_prob_m1(3f64.ln(), 0.5).unwrap(),
            0.75,
            epsilon = 1e-14
        );
        // Stable for extreme log Bayes factors.
        assert_eq!(posterior_prob_m1(1e6, 0.5).unwrap(), 1.0);
        assert_eq!(posterior_prob_m1(-1e6, 0.5).unwrap(), 0.0);
        // Prior odds shift the answer.
        assert_abs_diff_eq!(
            posterior_prob_m1(0.0, 0.25).unwrap(),
            1.0 / 3.0,
            epsilon = 1e-14
        );
        assert!(posterior_prob_m1(0.0, 0.0).is_err());
        assert!(posterior_prob_m1(0.0, 1.0).is_err());
    }

    #[test]
    fn decision_boundary_is_strict() {
        // log BF = 0 means BF = 1, which selects M0.
        let res = BayesFactorResult::from_log_bf(0.0, Method::ClosedForm, false);
        assert_eq!(res.decision, Decision::M0);
        let res = BayesFactorResult::from_log_bf(1e-12, Method::ClosedForm, false);
        assert_eq!(res.decision, Decision::M1);
    }

    #[test]
    fn monotone_in_ratio() {
        // With n - p - 2 > 2 alpha the closed form strictly decreases in
        // W_E/W_T: more within-group variance favors M0.
        let d = design(5, 4);
        let mut prev = f64::INFINITY;
        for k in 1..=20 {
            let ratio = k as f64 / 20.0;
            let lb = closed_form_log_bf_for_ratio(d, ratio, -0.5).unwrap();
            assert!(lb < prev, "not strictly decreasing at ratio {ratio}");
            prev = lb;
        }
    }
}
