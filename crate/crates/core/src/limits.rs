//! Upper limits on the anomalous count and their conversion to a bound on
//! β²/2.

use std::fmt;
use std::fmt::Write as _;

use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::gamma::gamma_ur;

use crate::error::{Error, Result};
use crate::sensitivity::SensitivityReport;
use crate::spectrum::{normalize_subtract, roi_bins, DetectorModel, ResidualSpectrum, Spectrum};

pub const DEFAULT_CL: f64 = 0.9;
pub const DEFAULT_ROI_HALF_WIDTH_SIGMA: f64 = 3.0;
/// Gaussian mass within ±3σ, rounded.
pub const DEFAULT_ROI_ACCEPTANCE: f64 = 0.9973;
/// Expected ROI counts below which the exact Poisson recipe is used.
pub const POISSON_REGIME_MAX_COUNTS: f64 = 25.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitMethod {
    PoissonExact,
    GaussianRoi,
}

impl LimitMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            LimitMethod::PoissonExact => "poisson-exact",
            LimitMethod::GaussianRoi => "gaussian-roi",
        }
    }

    /// Method used for a region holding `expected_counts` counts.
    pub fn select(expected_counts: f64) -> Self {
        if expected_counts < POISSON_REGIME_MAX_COUNTS {
            LimitMethod::PoissonExact
        } else {
            LimitMethod::GaussianRoi
        }
    }
}

impl fmt::Display for LimitMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn check_cl(cl: f64) -> Result<()> {
    if !(cl > 0.0 && cl < 1.0) {
        return Err(Error::invalid("cl", format!("must lie in (0, 1), got {cl}")));
    }
    Ok(())
}

/// Classical one-sided upper limit on a Poisson mean μ given `n_obs` events:
/// the μ with P(N ≤ n_obs; μ) = 1 − cl.
pub fn poisson_mean_upper_limit(n_obs: u64, cl: f64) -> Result<f64> {
    check_cl(cl)?;
    let target = 1.0 - cl;
    let a = n_obs as f64 + 1.0;
    // P(N <= n; mu) = Q(n + 1, mu), decreasing in mu
    let cdf = |mu: f64| gamma_ur(a, mu);
    let mut lo = 0.0;
    let mut hi = a.max(1.0);
    while cdf(hi) > target {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if cdf(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Upper limit on the signal mean above a known background `b_expected`,
/// floored at zero.
pub fn poisson_upper_limit(n_obs: u64, b_expected: f64, cl: f64) -> Result<f64> {
    if !(b_expected >= 0.0 && b_expected.is_finite()) {
        return Err(Error::invalid("b_expected", format!("must be >= 0, got {b_expected}")));
    }
    Ok((poisson_mean_upper_limit(n_obs, cl)? - b_expected).max(0.0))
}

/// One-sided standard-normal quantile.
pub fn normal_quantile(cl: f64) -> Result<f64> {
    check_cl(cl)?;
    Ok(Normal::standard().inverse_cdf(cl))
}

/// `max(roi_value, 0) + z_cl · sqrt(roi_variance)`.
pub fn gaussian_roi_limit(roi_value: f64, roi_variance: f64, cl: f64) -> Result<f64> {
    let z = normal_quantile(cl)?;
    if !(roi_variance > 0.0 && roi_variance.is_finite()) {
        return Err(Error::invalid(
            "roi_variance",
            format!("must be > 0, got {roi_variance}"),
        ));
    }
    Ok(roi_value.max(0.0) + z * roi_variance.sqrt())
}

/// An upper limit on the anomalous count before conversion to β²/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountLimit {
    pub nx_upper: f64,
    pub confidence_level: f64,
    pub method: LimitMethod,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitResult {
    pub nx_upper: f64,
    pub confidence_level: f64,
    pub beta2_half_bound: f64,
    pub method: LimitMethod,
}

impl LimitResult {
    pub const CSV_HEADER: &'static str = "nx_upper,confidence_level,beta2_half_bound,method";

    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        writeln!(out, "nx_upper={}", self.nx_upper).unwrap();
        writeln!(out, "confidence_level={}", self.confidence_level).unwrap();
        writeln!(out, "beta2_half_bound={:e}", self.beta2_half_bound).unwrap();
        writeln!(out, "method={}", self.method).unwrap();
        out
    }

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{:e},{}",
            self.nx_upper, self.confidence_level, self.beta2_half_bound, self.method
        )
    }
}

/// β²/2 bound = limit / (n_new · n_int · capture_fraction · efficiency · roi_acceptance).
pub fn beta_bound(
    limit: &CountLimit,
    sens: &SensitivityReport,
    det: &DetectorModel,
    roi_acceptance: f64,
) -> Result<LimitResult> {
    if !(limit.nx_upper >= 0.0) {
        return Err(Error::invalid(
            "nx_upper",
            format!("must be >= 0, got {}", limit.nx_upper),
        ));
    }
    let denom = sens.expected_nx_per_unit_beta * det.efficiency() * roi_acceptance;
    if !(denom > 0.0) || !denom.is_finite() {
        return Err(Error::DegenerateRun(format!("sensitivity denominator is {denom}")));
    }
    Ok(LimitResult {
        nx_upper: limit.nx_upper,
        confidence_level: limit.confidence_level,
        beta2_half_bound: limit.nx_upper / denom,
        method: limit.method,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitSettings {
    pub cl: f64,
    pub roi_half_width_sigma: f64,
    pub roi_acceptance: f64,
}

impl Default for LimitSettings {
    fn default() -> Self {
        Self {
            cl: DEFAULT_CL,
            roi_half_width_sigma: DEFAULT_ROI_HALF_WIDTH_SIGMA,
            roi_acceptance: DEFAULT_ROI_ACCEPTANCE,
        }
    }
}

impl LimitSettings {
    pub fn roi(&self, det: &DetectorModel) -> (f64, f64) {
        let half = self.roi_half_width_sigma * det.resolution_sigma();
        (det.line_energy() - half, det.line_energy() + half)
    }
}

/// Everything derived from one current-on/current-off pair.
#[derive(Debug, Clone, PartialEq)]
pub struct RoiAnalysis {
    pub residual: ResidualSpectrum,
    pub roi_lo_kev: f64,
    pub roi_hi_kev: f64,
    pub roi_value: f64,
    pub roi_variance: f64,
    pub on_roi_counts: u64,
    pub off_roi_counts: u64,
    pub live_time_ratio: f64,
    pub limit: CountLimit,
}

impl RoiAnalysis {
    pub fn significance(&self) -> f64 {
        if self.roi_variance > 0.0 {
            self.roi_value / self.roi_variance.sqrt()
        } else {
            0.0
        }
    }

    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        writeln!(out, "roi_lo_kev={}", self.roi_lo_kev).unwrap();
        writeln!(out, "roi_hi_kev={}", self.roi_hi_kev).unwrap();
        writeln!(out, "roi_value={}", self.roi_value).unwrap();
        writeln!(out, "roi_variance={}", self.roi_variance).unwrap();
        writeln!(out, "roi_significance={}", self.significance()).unwrap();
        writeln!(out, "on_roi_counts={}", self.on_roi_counts).unwrap();
        writeln!(out, "off_roi_counts={}", self.off_roi_counts).unwrap();
        writeln!(out, "live_time_ratio={}", self.live_time_ratio).unwrap();
        out
    }
}

/// Subtract, sum the ROI around the anomalous line and set a count limit.
///
/// Below [`POISSON_REGIME_MAX_COUNTS`] current-on ROI counts the exact Poisson
/// recipe is used with the live-time scaled current-off count as background;
/// otherwise the Gaussian recipe on the subtracted ROI sum.
pub fn roi_limit(on: &Spectrum, off: &Spectrum, det: &DetectorModel, settings: &LimitSettings) -> Result<RoiAnalysis> {
    check_cl(settings.cl)?;
    let residual = normalize_subtract(on, off)?;
    let (lo, hi) = settings.roi(det);
    let bins = roi_bins(residual.bin_edges(), lo, hi)?;
    let roi_value: f64 = residual.values()[bins.clone()].iter().sum();
    let roi_variance: f64 = residual.variances()[bins.clone()].iter().sum();
    let on_roi_counts: u64 = on.counts()[bins.clone()].iter().sum();
    let off_roi_counts: u64 = off.counts()[bins].iter().sum();
    let ratio = on.live_time() / off.live_time();
    let method = LimitMethod::select(on_roi_counts as f64);
    let nx_upper = match method {
        LimitMethod::PoissonExact => poisson_upper_limit(on_roi_counts, ratio * off_roi_counts as f64, settings.cl)?,
        LimitMethod::GaussianRoi => gaussian_roi_limit(roi_value, roi_variance, settings.cl)?,
    };
    Ok(RoiAnalysis {
        residual,
        roi_lo_kev: lo,
        roi_hi_kev: hi,
        roi_value,
        roi_variance,
        on_roi_counts,
        off_roi_counts,
        live_time_ratio: ratio,
        limit: CountLimit {
            nx_upper,
            confidence_level: settings.cl,
            method,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_events_zero_background() {
        let s = poisson_upper_limit(0, 0.0, 0.9).unwrap();
        assert!((s - std::f64::consts::LN_10).abs() < 1e-12);
        let s = poisson_upper_limit(0, 0.0, 0.95).unwrap();
        assert!((s - 2.995_732_273_553_991).abs() < 1e-12);
    }

    #[test]
    fn background_is_subtracted_and_floored() {
        let mu = poisson_mean_upper_limit(3, 0.9).unwrap();
        let s = poisson_upper_limit(3, 1.5, 0.9).unwrap();
        assert!((s - (mu - 1.5)).abs() < 1e-12);
        assert_eq!(poisson_upper_limit(0, 10.0, 0.9).unwrap(), 0.0);
    }

    #[test]
    fn cl_outside_unit_interval_is_rejected() {
        for cl in [0.0, 1.0, -0.1, 1.2, f64::NAN] {
            assert!(poisson_upper_limit(1, 0.0, cl).is_err());
            assert!(gaussian_roi_limit(0.0, 1.0, cl).is_err());
        }
    }

    #[test]
    fn gaussian_quantile_and_floor() {
        let z90 = 1.281_551_565_544_600_4;
        assert!((gaussian_roi_limit(0.0, 1.0, 0.9).unwrap() - z90).abs() < 1e-12);
        assert!((gaussian_roi_limit(-5.0, 1.0, 0.9).unwrap() - z90).abs() < 1e-12);
        let one = gaussian_roi_limit(0.0, 9.0, 0.9).unwrap();
        let four = gaussian_roi_limit(0.0, 36.0, 0.9).unwrap();
        assert!((four - 2.0 * one).abs() < 1e-12);
        assert!(gaussian_roi_limit(1.0, 0.0, 0.9).is_err());
    }

    #[test]
    fn method_selection_threshold() {
        assert_eq!(LimitMethod::select(24.9), LimitMethod::PoissonExact);
        assert_eq!(LimitMethod::select(25.0), LimitMethod::GaussianRoi);
    }

    #[test]
    fn beta_bound_reduces_to_plain_inversion() {
        let sens = SensitivityReport::new(3.3e26, 7.1e5, 0.1);
        let det = DetectorModel::new(1.0, 0.1, 7.5).unwrap();
        let limit = CountLimit {
            nx_upper: 17.0,
            confidence_level: 0.9,
            method: LimitMethod::GaussianRoi,
        };
        let r = beta_bound(&limit, &sens, &det, 1.0).unwrap();
        let plain = crate::sensitivity::invert_bound(17.0, 3.3e26, 7.1e5, 0.1).unwrap();
        assert_eq!(r.beta2_half_bound, plain);
        assert_eq!(r.method, LimitMethod::GaussianRoi);
    }

    #[test]
    fn beta_bound_degenerate() {
        let sens = SensitivityReport::new(0.0, 7.1e5, 0.1);
        let det = DetectorModel::new(1.0, 0.1, 7.5).unwrap();
        let limit = CountLimit {
            nx_upper: 1.0,
            confidence_level: 0.9,
            method: LimitMethod::PoissonExact,
        };
        assert!(matches!(
            beta_bound(&limit, &sens, &det, 1.0),
            Err(Error::DegenerateRun(_))
        ));
    }

    #[test]
    fn limit_result_serialization() {
        let r = LimitResult {
            nx_upper: 2.5,
            confidence_level: 0.9,
            beta2_half_bound: 1.5e-30,
            method: LimitMethod::PoissonExact,
        };
        assert_eq!(r.to_csv_row(), "2.5,0.9,1.5e-30,poisson-exact");
        assert!(r.to_key_values().contains("method=poisson-exact\n"));
    }
}
