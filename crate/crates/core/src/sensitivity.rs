//! Counting arithmetic linking injected current to expected anomalous X-rays,
//! and its inversion from a count limit to a bound on β²/2.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::physics::{PhysicalConstants, StripGeometry};

/// Default ratio of radiative capture to scattering probability.
pub const DEFAULT_CAPTURE_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunPlan {
    current_i: f64,
    duration_t: f64,
    capture_fraction: f64,
    duty_on_fraction: f64,
}

impl RunPlan {
    pub fn new(current_i: f64, duration_t: f64, capture_fraction: f64, duty_on_fraction: f64) -> Result<Self> {
        if !(current_i.is_finite() && current_i >= 0.0) {
            return Err(Error::invalid("current_i", format!("must be >= 0, got {current_i}")));
        }
        if !(duration_t.is_finite() && duration_t > 0.0) {
            return Err(Error::invalid("duration_t", format!("must be > 0, got {duration_t}")));
        }
        if !(capture_fraction > 0.0 && capture_fraction <= 1.0) {
            return Err(Error::invalid(
                "capture_fraction",
                format!("must lie in (0, 1], got {capture_fraction}"),
            ));
        }
        if !(duty_on_fraction > 0.0 && duty_on_fraction <= 1.0) {
            return Err(Error::invalid(
                "duty_on_fraction",
                format!("must lie in (0, 1], got {duty_on_fraction}"),
            ));
        }
        Ok(Self {
            current_i,
            duration_t,
            capture_fraction,
            duty_on_fraction,
        })
    }

    /// Amperes.
    pub fn current_i(&self) -> f64 {
        self.current_i
    }

    /// Wall-clock seconds covering both phases.
    pub fn duration_t(&self) -> f64 {
        self.duration_t
    }

    pub fn capture_fraction(&self) -> f64 {
        self.capture_fraction
    }

    pub fn duty_on_fraction(&self) -> f64 {
        self.duty_on_fraction
    }

    pub fn on_live_time(&self) -> f64 {
        self.duration_t * self.duty_on_fraction
    }

    pub fn off_live_time(&self) -> f64 {
        self.duration_t * (1.0 - self.duty_on_fraction)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitivityReport {
    pub n_new: f64,
    pub n_int: f64,
    /// Expected anomalous count for β²/2 = 1, i.e. `n_new * n_int * capture_fraction`.
    pub expected_nx_per_unit_beta: f64,
}

impl SensitivityReport {
    pub fn new(n_new: f64, n_int: f64, capture_fraction: f64) -> Self {
        Self {
            n_new,
            n_int,
            expected_nx_per_unit_beta: n_new * n_int * capture_fraction,
        }
    }

    pub fn from_plan(
        plan: &RunPlan,
        strip: &StripGeometry,
        visible_fraction: f64,
        constants: &PhysicalConstants,
    ) -> Result<Self> {
        let injected = n_new(plan, visible_fraction, constants)?;
        Ok(Self::new(injected, n_int(strip), plan.capture_fraction()))
    }

    /// Flat `key=value` block, one field per line.
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        writeln!(out, "n_new={:e}", self.n_new).unwrap();
        writeln!(out, "n_int={:e}", self.n_int).unwrap();
        writeln!(out, "expected_nx_per_unit_beta={:e}", self.expected_nx_per_unit_beta).unwrap();
        out
    }

    pub const CSV_HEADER: &'static str = "n_new,n_int,expected_nx_per_unit_beta";

    pub fn to_csv_row(&self) -> String {
        format!("{:e},{:e},{:e}", self.n_new, self.n_int, self.expected_nx_per_unit_beta)
    }
}

/// Number of injected electrons whose capture X-rays are visible, for a
/// steady current over the on-phase: I · f_vis · T · duty / e.
pub fn n_new(plan: &RunPlan, visible_fraction: f64, constants: &PhysicalConstants) -> Result<f64> {
    if !(0.0..=1.0).contains(&visible_fraction) {
        return Err(Error::invalid(
            "visible_fraction",
            format!("must lie in [0, 1], got {visible_fraction}"),
        ));
    }
    Ok(plan.current_i() * visible_fraction * plan.duration_t() * plan.duty_on_fraction() / constants.electron_charge())
}

/// Electron–atom scatterings in front of the detector window: D/μ.
pub fn n_int(strip: &StripGeometry) -> f64 {
    strip.window_d() / strip.mean_free_path_mu()
}

/// Expected anomalous X-ray count for a violation probability `beta2_half`.
pub fn expected_anomalous(beta2_half: f64, n_new: f64, n_int: f64, capture_fraction: f64) -> f64 {
    beta2_half * n_new * n_int * capture_fraction
}

/// Bound on β²/2 implied by an upper limit on the anomalous count.
pub fn invert_bound(nx_upper_limit: f64, n_new: f64, n_int: f64, capture_fraction: f64) -> Result<f64> {
    let denom = n_new * n_int * capture_fraction;
    if !(denom > 0.0) || !denom.is_finite() {
        return Err(Error::DegenerateRun(format!(
            "n_new * n_int * capture_fraction = {denom} (need a positive finite value)"
        )));
    }
    Ok(nx_upper_limit / denom)
}

/// A sensitivity report paired with the count limit that produced its bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioBound {
    pub report: SensitivityReport,
    pub nx_limit: f64,
    /// Product of detector efficiency and ROI acceptance; 1 for a bare count bound.
    pub acceptance: f64,
}

impl ScenarioBound {
    pub fn bound(&self) -> Result<f64> {
        let denom = self.report.expected_nx_per_unit_beta * self.acceptance;
        if !(denom > 0.0) || !denom.is_finite() {
            return Err(Error::DegenerateRun(format!("zero sensitivity denominator {denom}")));
        }
        Ok(self.nx_limit / denom)
    }
}

/// Improvement factor `bound(a) / bound(b)`.
pub fn compare_scenarios(a: &ScenarioBound, b: &ScenarioBound) -> Result<f64> {
    let (ba, bb) = (a.bound()?, b.bound()?);
    if !(ba > 0.0 && bb > 0.0) {
        return Err(Error::DegenerateRun(format!(
            "both bounds must be positive to compare, got {ba} and {bb}"
        )));
    }
    Ok(ba / bb)
}
