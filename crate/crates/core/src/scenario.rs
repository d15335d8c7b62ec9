//! A parsed scenario with its material loaded, and the derived pipeline:
//! sensitivity, expected and synthetic spectra, limits.

use std::path::Path;

use crate::config::{load_config, ScenarioConfig};
use crate::error::Result;
use crate::limits::{
    beta_bound, gaussian_roi_limit, poisson_upper_limit, roi_limit, CountLimit, LimitMethod, LimitResult,
    LimitSettings, RoiAnalysis,
};
use crate::physics::{absorption_length, visible_fraction, Material, PhysicalConstants};
use crate::rng::StreamRng;
use crate::sensitivity::{ScenarioBound, SensitivityReport};
use crate::spectrum::{roi_bins, uniform_edges, ExpectedPair, Spectrum};

#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub material: Material,
    pub constants: PhysicalConstants,
    /// Absorption length at the anomalous line energy, cm.
    pub lambda_cm: f64,
    pub visible_fraction: f64,
    pub sensitivity: SensitivityReport,
    pub bin_edges: Vec<f64>,
}

impl Scenario {
    pub fn new(config: ScenarioConfig, material: Material) -> Result<Self> {
        let constants = PhysicalConstants::default();
        let lambda_cm = absorption_length(&material, config.detector.line_energy())?;
        let visible_fraction = visible_fraction(&config.strip, lambda_cm)?;
        let sensitivity = SensitivityReport::from_plan(&config.plan, &config.strip, visible_fraction, &constants)?;
        let b = config.binning;
        let bin_edges = uniform_edges(b.lo_kev, b.hi_kev, b.width_kev)?;
        Ok(Self {
            config,
            material,
            constants,
            lambda_cm,
            visible_fraction,
            sensitivity,
            bin_edges,
        })
    }

    /// Load a config file; a relative material table path is resolved against
    /// the config file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let config = load_config(path)?;
        let dir = path.parent().unwrap_or(Path::new("."));
        let material = Material::load(
            config.material_name.clone(),
            config.density_g_cm3,
            &config.material_path(dir),
        )?;
        Self::new(config, material)
    }

    pub fn name(&self) -> &str {
        &self.config.name
    }

    pub fn limit_settings(&self) -> LimitSettings {
        self.config.limit
    }

    pub fn expected_pair(&self, beta2_half: f64) -> Result<ExpectedPair> {
        let c = &self.config;
        ExpectedPair::new(
            &c.background,
            &c.detector,
            &c.plan,
            &self.sensitivity,
            beta2_half,
            &self.bin_edges,
        )
    }

    /// Expected anomalous counts recorded by the detector for `beta2_half`.
    pub fn expected_signal(&self, beta2_half: f64) -> f64 {
        beta2_half * self.sensitivity.expected_nx_per_unit_beta * self.config.detector.efficiency()
    }

    pub fn synthesize_with(&self, beta2_half: f64, rng: &mut StreamRng) -> Result<(Spectrum, Spectrum)> {
        self.expected_pair(beta2_half)?.sample(rng, &self.config.name)
    }

    pub fn synthesize(&self, beta2_half: f64, seed: u64) -> Result<(Spectrum, Spectrum)> {
        self.synthesize_with(beta2_half, &mut crate::rng::stream_rng(seed, 0))
    }

    pub fn analyze(
        &self,
        on: &Spectrum,
        off: &Spectrum,
        settings: &LimitSettings,
    ) -> Result<(RoiAnalysis, LimitResult)> {
        let analysis = roi_limit(on, off, &self.config.detector, settings)?;
        let result = beta_bound(
            &analysis.limit,
            &self.sensitivity,
            &self.config.detector,
            settings.roi_acceptance,
        )?;
        Ok((analysis, result))
    }

    /// Count limit a background-only run would give if every ROI count sat at
    /// its expectation.
    pub fn projected_limit(&self, settings: &LimitSettings) -> Result<CountLimit> {
        let expected = self.expected_pair(0.0)?;
        let (lo, hi) = settings.roi(&self.config.detector);
        let bins = roi_bins(&expected.bin_edges, lo, hi)?;
        let b_on: f64 = expected.on[bins.clone()].iter().sum();
        let b_off: f64 = expected.off[bins].iter().sum();
        let r = expected.on_live_time / expected.off_live_time;
        let method = LimitMethod::select(b_on);
        let nx_upper = match method {
            LimitMethod::PoissonExact => poisson_upper_limit(b_on.round() as u64, b_on, settings.cl)?,
            LimitMethod::GaussianRoi => gaussian_roi_limit(0.0, b_on + r * r * b_off, settings.cl)?,
        };
        Ok(CountLimit {
            nx_upper,
            confidence_level: settings.cl,
            method,
        })
    }

    pub fn projected_bound(&self, settings: &LimitSettings) -> Result<LimitResult> {
        let limit = self.projected_limit(settings)?;
        beta_bound(
            &limit,
            &self.sensitivity,
            &self.config.detector,
            settings.roi_acceptance,
        )
    }

    /// Report plus projected count limit, for scenario comparisons.
    pub fn scenario_bound(&self, settings: &LimitSettings) -> Result<ScenarioBound> {
        Ok(ScenarioBound {
            report: self.sensitivity,
            nx_limit: self.projected_limit(settings)?.nx_upper,
            acceptance: self.config.detector.efficiency() * settings.roi_acceptance,
        })
    }
}
