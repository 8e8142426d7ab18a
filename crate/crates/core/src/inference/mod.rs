//! Statistical inference on the nonlinear least-squares estimates: error
//! variance, coefficient covariance, t-tests, confidence intervals, F-tests
//! and model-fit indicators.

pub mod dist;

use crate::error::{Error, Result};
use dist::{f_cdf, student_t_quantile, student_t_two_sided_p};
use nalgebra::DMatrix;
use serde::Serialize;

/// Residual variance estimate `RSS / (n - k)`.
pub fn estimate_sigma2(residuals: &[f64], k: usize) -> Result<f64> {
    let n = residuals.len();
    if n <= k {
        return Err(Error::DegreesOfFreedom { n, k });
    }
    let rss: f64 = residuals.iter().map(|r| r * r).sum();
    Ok(rss / (n - k) as f64)
}

/// Asymptotic covariance of the estimator, `sigma2 * (J^T J)^{-1}`.
///
/// A singular or numerically near-singular system (condition number above
/// 1e12) is reported as a non-identifiability error naming the coefficients
/// spanning the null space, rather than silently regularized.
pub fn coefficient_covariance(
    jacobian: &DMatrix<f64>,
    sigma2: f64,
    names: &[String],
) -> Result<DMatrix<f64>> {
    if sigma2 < 0.0 {
        return Err(Error::Domain("sigma2 must be nonnegative".into()));
    }
    let d = jacobian.ncols();
    let jtj = jacobian.transpose() * jacobian;
    let svd = jtj.clone().svd(true, true);
    let max_sv = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let min_sv = svd
        .singular_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if min_sv <= 0.0 || max_sv / min_sv > 1e12 {
        // Coefficients loading on the smallest singular directions.
        let v = svd.v_t.as_ref().expect("svd computed with vectors");
        let mut flagged = Vec::new();
        for (i, sv) in svd.singular_values.iter().enumerate() {
            if *sv <= max_sv * 1e-12 {
                for dcol in 0..d {
                    if v[(i, dcol)].abs() > 1e-6 {
                        let name = names
                            .get(dcol)
                            .cloned()
                            .unwrap_or_else(|| format!("coefficient {dcol}"));
                        if !flagged.contains(&name) {
                            flagged.push(name);
                        }
                    }
                }
            }
        }
        return Err(Error::NonIdentifiable(flagged));
    }
    let inv = jtj
        .try_inverse()
        .ok_or_else(|| Error::NonIdentifiable(names.to_vec()))?;
    Ok(inv * sigma2)
}

/// Two-sided t-test of `H0: theta_d = theta_h0`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TTest {
    pub statistic: f64,
    pub p_value: f64,
    pub reject: bool,
}

pub fn t_test(theta_hat: f64, theta_h0: f64, var_dd: f64, dof: usize, alpha: f64) -> Result<TTest> {
    if var_dd <= 0.0 {
        return Err(Error::UndefinedTest(
            "zero variance: t statistic undefined".into(),
        ));
    }
    if dof == 0 {
        return Err(Error::DegreesOfFreedom { n: 0, k: 0 });
    }
    let statistic = (theta_hat - theta_h0) / var_dd.sqrt();
    let p_value = student_t_two_sided_p(statistic, dof as f64);
    Ok(TTest {
        statistic,
        p_value,
        reject: p_value < alpha,
    })
}

/// `theta_hat +/- t_{dof, 1 - alpha/2} * se` confidence interval.
pub fn confidence_interval(
    theta_hat: f64,
    var_dd: f64,
    alpha: f64,
    dof: usize,
) -> Result<(f64, f64)> {
    if var_dd <= 0.0 {
        return Err(Error::UndefinedTest(
            "zero variance: confidence interval undefined".into(),
        ));
    }
    if !(0.0 < alpha && alpha <= 1.0) {
        return Err(Error::Domain("alpha must lie in (0, 1]".into()));
    }
    let quantile = student_t_quantile(1.0 - alpha / 2.0, dof as f64);
    let half = quantile * var_dd.sqrt();
    Ok((theta_hat - half, theta_hat + half))
}

/// F-test of a restricted model (rss1, k1 coefficients) against an
/// unrestricted one (rss2, k2 coefficients) with n observations.
pub fn f_test(rss1: f64, rss2: f64, k1: usize, k2: usize, n: usize) -> Result<(f64, f64)> {
    if k2 <= k1 {
        return Err(Error::Domain(
            "unrestricted model must have more coefficients".into(),
        ));
    }
    if n <= k2 {
        return Err(Error::DegreesOfFreedom { n, k: k2 });
    }
    if !(rss2 > 0.0) {
        return Err(Error::Domain("unrestricted RSS must be positive".into()));
    }
    let d1 = (k2 - k1) as f64;
    let d2 = (n - k2) as f64;
    let f = (((rss1 - rss2) / d1) / (rss2 / d2)).max(0.0);
    let p = 1.0 - f_cdf(f, d1, d2);
    Ok((f, p))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FitIndicators {
    pub rmse: f64,
    pub nrmse: f64,
    pub adjusted_pseudo_r2: f64,
}

/// Root mean squared error, its normalization by the mean observed count,
/// and the adjusted pseudo-R2 `1 - (RSS - k) / RSS_null`.
pub fn fit_indicators(
    residuals: &[f64],
    counts: &[f64],
    k: usize,
    rss_null: f64,
) -> Result<FitIndicators> {
    if !(rss_null > 0.0) {
        return Err(Error::Domain("null-model RSS must be positive".into()));
    }
    let n = residuals.len();
    if n == 0 {
        return Err(Error::Structure("no residuals".into()));
    }
    let rss: f64 = residuals.iter().map(|r| r * r).sum();
    let rmse = (rss / n as f64).sqrt();
    let mean = counts.iter().sum::<f64>() / counts.len() as f64;
    if mean == 0.0 {
        return Err(Error::Domain(
            "mean observed count is zero: NRMSE undefined".into(),
        ));
    }
    Ok(FitIndicators {
        rmse,
        nrmse: rmse / mean,
        adjusted_pseudo_r2: 1.0 - (rss - k as f64) / rss_null,
    })
}

/// Per-coefficient inference row.
#[derive(Debug, Clone, Serialize)]
pub struct CoefficientReport {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub t_statistic: f64,
    pub p_value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// `***` p < 0.01, `**` p < 0.05, `*` p < 0.1, empty otherwise.
    pub significance: String,
}

/// Complete inference summary for an estimation run.
#[derive(Debug, Clone, Serialize)]
pub struct InferenceReport {
    pub n: usize,
    pub k: usize,
    pub alpha: f64,
    pub sigma2_hat: f64,
    pub coefficients: Vec<CoefficientReport>,
    pub covariance: Vec<Vec<f64>>,
    pub f_statistic: f64,
    pub f_p_value: f64,
    pub rss: f64,
    pub rss_null: f64,
    pub rmse: f64,
    pub nrmse: f64,
    pub adjusted_pseudo_r2: f64,
    pub notes: Vec<String>,
}

pub fn significance_stars(p: f64) -> &'static str {
    if p < 0.01 {
        "***"
    } else if p < 0.05 {
        "**"
    } else if p < 0.1 {
        "*"
    } else {
        ""
    }
}

/// Builds the full report from estimation outputs. `rss_null` is the squared
/// count gap of the all-zero-coefficient (equilikely choice) model.
pub fn build_report(
    theta_hat: &[f64],
    names: &[String],
    jacobian: &DMatrix<f64>,
    residuals: &[f64],
    counts: &[f64],
    rss_null: f64,
    alpha: f64,
) -> Result<InferenceReport> {
    let n = residuals.len();
    let k = theta_hat.len();
    let sigma2 = estimate_sigma2(residuals, k)?;
    let dof = n - k;
    let rss: f64 = residuals.iter().map(|r| r * r).sum();
    let mut notes = Vec::new();

    let mut coefficients = Vec::with_capacity(k);
    let covariance = if sigma2 > 0.0 {
        coefficient_covariance(jacobian, sigma2, names)?
    } else {
        notes.push(
            "residual variance is exactly zero; t statistics are degenerate".to_string(),
        );
        DMatrix::zeros(k, k)
    };
    for d in 0..k {
        let var = covariance[(d, d)];
        let (t_stat, p, ci) = if var > 0.0 {
            let test = t_test(theta_hat[d], 0.0, var, dof, alpha)?;
            let ci = confidence_interval(theta_hat[d], var, alpha, dof)?;
            (test.statistic, test.p_value, ci)
        } else {
            let t = if theta_hat[d] == 0.0 {
                0.0
            } else {
                theta_hat[d].signum() * f64::INFINITY
            };
            (t, 0.0, (theta_hat[d], theta_hat[d]))
        };
        coefficients.push(CoefficientReport {
            name: names[d].clone(),
            estimate: theta_hat[d],
            std_error: var.max(0.0).sqrt(),
            t_statistic: t_stat,
            p_value: p,
            ci_low: ci.0,
            ci_high: ci.1,
            significance: significance_stars(p).to_string(),
        });
    }

    // Null-model comparison: the restricted model has no nonzero entries,
    // the fitted one as many as remain nonzero.
    let k2 = theta_hat.iter().filter(|t| **t != 0.0).count();
    let (f_statistic, f_p_value) = if k2 > 0 && n > k2 && rss > 0.0 {
        f_test(rss_null, rss, 0, k2, n)?
    } else {
        notes.push("F-test degenerate (no nonzero coefficients or zero RSS)".to_string());
        (f64::INFINITY, 0.0)
    };

    let fit = fit_indicators(residuals, counts, k, rss_null)?;
    Ok(InferenceReport {
        n,
        k,
        alpha,
        sigma2_hat: sigma2,
        coefficients,
        covariance: (0..k)
            .map(|i| (0..k).map(|j| covariance[(i, j)]).collect())
            .collect(),
        f_statistic,
        f_p_value,
        rss,
        rss_null,
        rmse: fit.rmse,
        nrmse: fit.nrmse,
        adjusted_pseudo_r2: fit.adjusted_pseudo_r2,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma2_examples() {
        assert_eq!(estimate_sigma2(&[0.0, 0.0, 0.0], 1).unwrap(), 0.0);
        assert_eq!(estimate_sigma2(&[1.0, -1.0, 2.0, 0.0], 2).unwrap(), 3.0);
        assert_eq!(estimate_sigma2(&[3.0, 0.0], 1).unwrap(), 9.0);
        assert!(matches!(
            estimate_sigma2(&[1.0, 2.0], 2),
            Err(Error::DegreesOfFreedom { .. })
        ));
    }

    #[test]
    fn covariance_identity_and_scaling() {
        let jac = DMatrix::<f64>::identity(3, 3);
        let names = vec!["a".into(), "b".into(), "c".into()];
        let cov = coefficient_covariance(&jac, 2.0, &names).unwrap();
        assert_eq!(cov, DMatrix::identity(3, 3) * 2.0);
        let cov2 = coefficient_covariance(&jac, 4.0, &names).unwrap();
        for i in 0..3 {
            assert!((cov2[(i, i)] - 2.0 * cov[(i, i)]).abs() < 1e-14);
        }
    }

    #[test]
    fn covariance_matches_ols_on_linear_response() {
        // Linear response x = X theta: J = X, so the covariance must equal
        // the OLS formula sigma2 (X^T X)^{-1}.
        let x = DMatrix::from_row_slice(4, 2, &[1.0, 0.5, 1.0, -1.0, 1.0, 2.0, 1.0, 0.0]);
        let names = vec!["b0".into(), "b1".into()];
        let cov = coefficient_covariance(&x, 1.7, &names).unwrap();
        let ols = (x.transpose() * &x).try_inverse().unwrap() * 1.7;
        assert!((cov.clone() - ols).norm() < 1e-12);
        // Symmetric PSD.
        assert!((cov.clone() - cov.transpose()).norm() < 1e-12);
    }

    #[test]
    fn covariance_flags_singular_system() {
        let jac = DMatrix::from_row_slice(3, 2, &[1.0, 1.0, 2.0, 2.0, -1.0, -1.0]);
        let names = vec!["a".into(), "b".into()];
        match coefficient_covariance(&jac, 1.0, &names) {
            Err(Error::NonIdentifiable(who)) => {
                assert!(who.contains(&"a".to_string()) && who.contains(&"b".to_string()));
            }
            other => panic!("expected non-identifiability error, got {other:?}"),
        }
    }

    #[test]
    fn t_test_examples() {
        let t = t_test(-1.0, -1.0, 0.04, 100, 0.1).unwrap();
        assert_eq!(t.statistic, 0.0);
        assert!((t.p_value - 1.0).abs() < 1e-12);
        assert!(!t.reject);
        let t = t_test(-1.0, 0.0, 0.01, 100, 0.1).unwrap();
        assert!((t.statistic + 10.0).abs() < 1e-12);
        assert!(t.p_value < 0.001);
        assert!(t.reject);
        assert!(t_test(1.0, 0.0, 0.0, 10, 0.1).is_err());
    }

    #[test]
    fn confidence_interval_examples() {
        // Near-degenerate interval as alpha -> 1.
        let (lo, hi) = confidence_interval(2.0, 1.0, 1.0 - 1e-12, 50).unwrap();
        assert!((lo - 2.0).abs() < 1e-6 && (hi - 2.0).abs() < 1e-6);
        // Large dof: half-width approaches 1.96 se.
        let (lo, hi) = confidence_interval(0.0, 1.0, 0.05, 10_000_000).unwrap();
        assert!((hi - 1.96).abs() < 1e-2, "hi {hi}");
        assert!((lo + hi).abs() < 1e-12);
        // Interval always contains the estimate.
        let (lo, hi) = confidence_interval(-3.4, 0.25, 0.1, 20).unwrap();
        assert!(lo <= -3.4 && -3.4 <= hi);
    }

    #[test]
    fn f_test_examples() {
        let (f, p) = f_test(100.0, 100.0, 1, 3, 20).unwrap();
        assert_eq!(f, 0.0);
        assert!((p - 1.0).abs() < 1e-12);
        let (f, _) = f_test(200.0, 100.0, 1, 3, 20).unwrap();
        assert!((f - 8.5).abs() < 1e-12);
        assert!(f_test(1.0, 1.0, 3, 3, 20).is_err());
        assert!(f_test(1.0, 0.0, 1, 2, 20).is_err());
        assert!(f_test(1.0, 1.0, 1, 2, 2).is_err());
    }

    #[test]
    fn fit_indicator_examples() {
        let fit = fit_indicators(&[0.0, 0.0], &[10.0, 20.0], 0, 50.0).unwrap();
        assert_eq!(fit.rmse, 0.0);
        assert_eq!(fit.adjusted_pseudo_r2, 1.0);
        // RSS equal to the null RSS with k = 0 gives zero.
        let fit = fit_indicators(&[5.0, 5.0], &[10.0, 20.0], 0, 50.0).unwrap();
        assert!((fit.adjusted_pseudo_r2 - 0.0).abs() < 1e-12);
        assert!((fit.nrmse - 5.0 / 15.0).abs() < 1e-12);
        assert!(fit_indicators(&[1.0], &[0.0], 0, 1.0).is_err());
    }
}
