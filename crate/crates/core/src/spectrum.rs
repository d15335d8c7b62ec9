//! Binned X-ray spectra: synthesis of current-on/current-off pairs,
//! live-time normalized subtraction and region-of-interest sums.

use libm::erf;
use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::rng::{stream_rng, StreamRng};
use crate::sensitivity::{expected_anomalous, RunPlan, SensitivityReport};

/// Default anomalous line energy in keV. Which transition the captured
/// electron makes is not settled, so this is only a default.
pub const DEFAULT_LINE_ENERGY_KEV: f64 = 7.5;

fn check_edges(edges: &[f64]) -> Result<()> {
    if edges.len() < 2 {
        return Err(Error::invalid("bin_edges", "need at least one bin (two edges)"));
    }
    if edges.iter().any(|e| !e.is_finite()) {
        return Err(Error::invalid("bin_edges", "edges must be finite"));
    }
    if edges.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("bin_edges", "edges must be strictly increasing"));
    }
    Ok(())
}

/// `n` equal-width bins covering `[lo, hi]`, the last bin ending at or just
/// past `hi`.
pub fn uniform_edges(lo_kev: f64, hi_kev: f64, width_kev: f64) -> Result<Vec<f64>> {
    if !(width_kev > 0.0 && width_kev.is_finite()) {
        return Err(Error::invalid("bin_width", format!("must be > 0, got {width_kev}")));
    }
    if !(hi_kev > lo_kev) || !lo_kev.is_finite() || !hi_kev.is_finite() {
        return Err(Error::invalid(
            "binning",
            format!("need lo < hi, got [{lo_kev}, {hi_kev}]"),
        ));
    }
    let n = ((hi_kev - lo_kev) / width_kev - 1e-9).ceil().max(1.0) as usize;
    Ok((0..=n).map(|i| lo_kev + i as f64 * width_kev).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    bin_edges: Vec<f64>,
    counts: Vec<u64>,
    live_time: f64,
    label: String,
}

impl Spectrum {
    pub fn new(bin_edges: Vec<f64>, counts: Vec<u64>, live_time: f64, label: impl Into<String>) -> Result<Self> {
        check_edges(&bin_edges)?;
        if counts.len() + 1 != bin_edges.len() {
            return Err(Error::invalid(
                "counts",
                format!("{} counts for {} edges", counts.len(), bin_edges.len()),
            ));
        }
        if !(live_time > 0.0 && live_time.is_finite()) {
            return Err(Error::invalid("live_time", format!("must be > 0, got {live_time}")));
        }
        let label = label.into();
        if label.contains(['\n', '\r']) {
            return Err(Error::invalid("label", "must be a single line"));
        }
        Ok(Self {
            bin_edges,
            counts,
            live_time,
            label,
        })
    }

    pub fn bin_edges(&self) -> &[f64] {
        &self.bin_edges
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn live_time(&self) -> f64 {
        self.live_time
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn n_bins(&self) -> usize {
        self.counts.len()
    }

    pub fn total_counts(&self) -> u64 {
        self.counts.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualSpectrum {
    bin_edges: Vec<f64>,
    values: Vec<f64>,
    variances: Vec<f64>,
}

impl ResidualSpectrum {
    pub fn new(bin_edges: Vec<f64>, values: Vec<f64>, variances: Vec<f64>) -> Result<Self> {
        check_edges(&bin_edges)?;
        if values.len() + 1 != bin_edges.len() || variances.len() != values.len() {
            return Err(Error::invalid(
                "residual",
                "values/variances must have one entry per bin",
            ));
        }
        if variances.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::invalid("variances", "must be >= 0"));
        }
        Ok(Self {
            bin_edges,
            values,
            variances,
        })
    }

    pub fn bin_edges(&self) -> &[f64] {
        &self.bin_edges
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn variances(&self) -> &[f64] {
        &self.variances
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorModel {
    efficiency: f64,
    resolution_sigma: f64,
    line_energy: f64,
}

impl DetectorModel {
    pub fn new(efficiency: f64, resolution_sigma_kev: f64, line_energy_kev: f64) -> Result<Self> {
        if !(efficiency > 0.0 && efficiency <= 1.0) {
            return Err(Error::invalid(
                "efficiency",
                format!("must lie in (0, 1], got {efficiency}"),
            ));
        }
        if !(resolution_sigma_kev > 0.0 && resolution_sigma_kev.is_finite()) {
            return Err(Error::invalid(
                "resolution_sigma",
                format!("must be > 0, got {resolution_sigma_kev}"),
            ));
        }
        if !(line_energy_kev > 0.0 && line_energy_kev.is_finite()) {
            return Err(Error::invalid(
                "line_energy",
                format!("must be > 0, got {line_energy_kev}"),
            ));
        }
        Ok(Self {
            efficiency,
            resolution_sigma: resolution_sigma_kev,
            line_energy: line_energy_kev,
        })
    }

    pub fn efficiency(&self) -> f64 {
        self.efficiency
    }

    pub fn resolution_sigma(&self) -> f64 {
        self.resolution_sigma
    }

    pub fn line_energy(&self) -> f64 {
        self.line_energy
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackgroundLine {
    pub energy_kev: f64,
    /// counts/s in the full line
    pub rate: f64,
    pub sigma_kev: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BackgroundModel {
    flat_rate: f64,
    lines: Vec<BackgroundLine>,
}

impl BackgroundModel {
    /// `flat_rate` in counts/(keV·s).
    pub fn new(flat_rate: f64, lines: Vec<BackgroundLine>) -> Result<Self> {
        if !(flat_rate >= 0.0 && flat_rate.is_finite()) {
            return Err(Error::invalid("flat_rate", format!("must be >= 0, got {flat_rate}")));
        }
        for l in &lines {
            if !(l.rate >= 0.0 && l.rate.is_finite()) {
                return Err(Error::invalid(
                    "lines",
                    format!("line rate must be >= 0, got {}", l.rate),
                ));
            }
            if !(l.sigma_kev > 0.0 && l.energy_kev > 0.0) {
                return Err(Error::invalid("lines", "line energy and sigma must be > 0"));
            }
        }
        Ok(Self { flat_rate, lines })
    }

    pub fn flat_rate(&self) -> f64 {
        self.flat_rate
    }

    pub fn lines(&self) -> &[BackgroundLine] {
        &self.lines
    }

    /// Expected counts per second in each bin.
    pub fn rate_per_bin(&self, edges: &[f64]) -> Vec<f64> {
        edges
            .windows(2)
            .map(|w| {
                let flat = self.flat_rate * (w[1] - w[0]);
                let lines: f64 = self
                    .lines
                    .iter()
                    .map(|l| l.rate * gaussian_mass(l.energy_kev, l.sigma_kev, w[0], w[1]))
                    .sum();
                flat + lines
            })
            .collect()
    }
}

/// Probability mass of N(mean, sigma²) on [lo, hi].
pub fn gaussian_mass(mean: f64, sigma: f64, lo: f64, hi: f64) -> f64 {
    let s = sigma * std::f64::consts::SQRT_2;
    0.5 * (erf((hi - mean) / s) - erf((lo - mean) / s))
}

/// Per-bin expectations of a current-on/current-off pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedPair {
    pub bin_edges: Vec<f64>,
    pub on: Vec<f64>,
    pub off: Vec<f64>,
    /// Signal part of `on`.
    pub signal: Vec<f64>,
    pub on_live_time: f64,
    pub off_live_time: f64,
}

impl ExpectedPair {
    pub fn new(
        bg: &BackgroundModel,
        det: &DetectorModel,
        plan: &RunPlan,
        sens: &SensitivityReport,
        beta2_half: f64,
        bin_edges: &[f64],
    ) -> Result<Self> {
        if bin_edges.is_empty() {
            return Err(Error::invalid("bin_edges", "binning is empty"));
        }
        check_edges(bin_edges)?;
        if !(beta2_half >= 0.0 && beta2_half.is_finite()) {
            return Err(Error::invalid("beta2_half", format!("must be >= 0, got {beta2_half}")));
        }
        let on_live = plan.on_live_time();
        let off_live = plan.off_live_time();
        if !(off_live > 0.0) {
            return Err(Error::DegenerateRun(
                "duty_on_fraction = 1 leaves no current-off live time".into(),
            ));
        }
        let total_signal =
            expected_anomalous(beta2_half, sens.n_new, sens.n_int, plan.capture_fraction()) * det.efficiency();
        let bg_rate = bg.rate_per_bin(bin_edges);
        let signal: Vec<f64> = bin_edges
            .windows(2)
            .map(|w| total_signal * gaussian_mass(det.line_energy(), det.resolution_sigma(), w[0], w[1]))
            .collect();
        let on = bg_rate.iter().zip(&signal).map(|(b, s)| b * on_live + s).collect();
        let off = bg_rate.iter().map(|b| b * off_live).collect();
        Ok(Self {
            bin_edges: bin_edges.to_vec(),
            on,
            off,
            signal,
            on_live_time: on_live,
            off_live_time: off_live,
        })
    }

    /// Poisson-fluctuate both spectra; `off` is drawn first, then `on`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, label: &str) -> Result<(Spectrum, Spectrum)> {
        let off_counts = poisson_counts(&self.off, rng)?;
        let on_counts = poisson_counts(&self.on, rng)?;
        let on = Spectrum::new(
            self.bin_edges.clone(),
            on_counts,
            self.on_live_time,
            format!("{label}:on"),
        )?;
        let off = Spectrum::new(
            self.bin_edges.clone(),
            off_counts,
            self.off_live_time,
            format!("{label}:off"),
        )?;
        Ok((on, off))
    }
}

fn poisson_counts<R: Rng + ?Sized>(means: &[f64], rng: &mut R) -> Result<Vec<u64>> {
    means
        .iter()
        .map(|&m| {
            if m == 0.0 {
                return Ok(0);
            }
            let dist = Poisson::new(m).map_err(|e| Error::invalid("expected_counts", format!("{m}: {e}")))?;
            Ok(dist.sample(rng) as u64)
        })
        .collect()
}

/// Synthetic current-on/current-off spectra; deterministic in `seed`.
#[allow(clippy::too_many_arguments)]
pub fn synthesize_pair(
    bg: &BackgroundModel,
    det: &DetectorModel,
    plan: &RunPlan,
    sens: &SensitivityReport,
    beta2_half: f64,
    bin_edges: &[f64],
    seed: u64,
) -> Result<(Spectrum, Spectrum)> {
    let expected = ExpectedPair::new(bg, det, plan, sens, beta2_half, bin_edges)?;
    let mut rng: StreamRng = stream_rng(seed, 0);
    expected.sample(&mut rng, "synthetic")
}

/// `on − r·off` with `r = on.live_time / off.live_time`, variances propagated
/// as `on + r²·off`.
pub fn normalize_subtract(on: &Spectrum, off: &Spectrum) -> Result<ResidualSpectrum> {
    if on.bin_edges() != off.bin_edges() {
        return Err(Error::BinningMismatch(format!(
            "on has {} bins, off has {} bins or different edges",
            on.n_bins(),
            off.n_bins()
        )));
    }
    let r = on.live_time() / off.live_time();
    let (values, variances) = on
        .counts()
        .iter()
        .zip(off.counts())
        .map(|(&a, &b)| {
            let (a, b) = (a as f64, b as f64);
            (a - r * b, a + r * r * b)
        })
        .unzip();
    ResidualSpectrum::new(on.bin_edges().to_vec(), values, variances)
}

/// Index range of bins covering `[lo, hi]` after snapping outward to edges.
pub fn roi_bins(edges: &[f64], lo_kev: f64, hi_kev: f64) -> Result<std::ops::Range<usize>> {
    let bad = |reason: &str| Error::BadRoi {
        lo_kev,
        hi_kev,
        reason: reason.to_string(),
    };
    if !(lo_kev < hi_kev) {
        return Err(bad("lower edge must be below upper edge"));
    }
    let first = edges[0];
    let last = *edges.last().unwrap();
    let tol = 1e-9 * (last - first) / (edges.len() - 1) as f64;
    if lo_kev < first - tol || hi_kev > last + tol {
        return Err(bad(&format!("outside spectrum range [{first}, {last}]")));
    }
    // last edge <= lo (outward), first edge >= hi (outward)
    let start = edges.partition_point(|&e| e <= lo_kev + tol).saturating_sub(1);
    let end = edges.partition_point(|&e| e < hi_kev - tol).min(edges.len() - 1);
    if end <= start {
        return Err(bad("covers no complete bin"));
    }
    Ok(start..end)
}

/// Sum of residual values and variances over the ROI bins.
pub fn roi_sum(res: &ResidualSpectrum, lo_kev: f64, hi_kev: f64) -> Result<(f64, f64)> {
    let bins = roi_bins(res.bin_edges(), lo_kev, hi_kev)?;
    let value = res.values()[bins.clone()].iter().sum();
    let variance = res.variances()[bins].iter().sum();
    Ok((value, variance))
}
