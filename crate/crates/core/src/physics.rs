//! Constants, absorber materials and strip geometry.
//!
//! Units are fixed across the crate: cm, g, keV, A, s, C.

use std::path::Path;

use crate::error::{Error, Result};

/// Elementary charge in coulombs (exact since the 2019 SI redefinition).
pub const ELEMENTARY_CHARGE_C: f64 = 1.602_176_634e-19;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    electron_charge: f64,
}

impl PhysicalConstants {
    pub fn new(electron_charge: f64) -> Result<Self> {
        if !(electron_charge.is_finite() && electron_charge > 0.0) {
            return Err(Error::invalid("electron_charge", "must be finite and > 0"));
        }
        Ok(Self { electron_charge })
    }

    /// Charge in coulombs.
    pub fn electron_charge(&self) -> f64 {
        self.electron_charge
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            electron_charge: ELEMENTARY_CHARGE_C,
        }
    }
}

/// An absorber with a tabulated mass attenuation coefficient.
///
/// The table is interpolated linearly in log(energy)–log(σ) and never
/// extrapolated.
#[derive(Debug, Clone, PartialEq)]
pub struct Material {
    name: String,
    density: f64,
    energies_kev: Vec<f64>,
    sigmas_cm2_g: Vec<f64>,
}

impl Material {
    pub fn new(
        name: impl Into<String>,
        density_g_cm3: f64,
        energies_kev: Vec<f64>,
        sigmas_cm2_g: Vec<f64>,
    ) -> Result<Self> {
        if !(density_g_cm3.is_finite() && density_g_cm3 > 0.0) {
            return Err(Error::invalid("density", "must be finite and > 0"));
        }
        if energies_kev.len() != sigmas_cm2_g.len() {
            return Err(Error::invalid(
                "cross_section",
                "energy and sigma columns differ in length",
            ));
        }
        if energies_kev.is_empty() {
            return Err(Error::invalid("cross_section", "table is empty"));
        }
        if energies_kev.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return Err(Error::invalid("cross_section", "energies must be finite and > 0"));
        }
        if energies_kev.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("cross_section", "energies must be strictly increasing"));
        }
        if sigmas_cm2_g.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::invalid(
                "cross_section",
                "all sigma entries must be finite and > 0",
            ));
        }
        Ok(Self {
            name: name.into(),
            density: density_g_cm3,
            energies_kev,
            sigmas_cm2_g,
        })
    }

    /// Parse a table in the `energy_kev sigma_cm2_per_g` text format.
    ///
    /// Lines starting with `#` and blank lines are skipped.
    pub fn from_table_str(name: impl Into<String>, density_g_cm3: f64, text: &str, source_name: &str) -> Result<Self> {
        let mut energies = Vec::new();
        let mut sigmas = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |reason: String| Error::Parse {
                source_name: source_name.to_string(),
                line: idx + 1,
                reason,
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(parse_err(format!("expected 2 columns, found {}", fields.len())));
            }
            let e: f64 = fields[0]
                .parse()
                .map_err(|_| parse_err(format!("bad energy `{}`", fields[0])))?;
            let s: f64 = fields[1]
                .parse()
                .map_err(|_| parse_err(format!("bad sigma `{}`", fields[1])))?;
            if let Some(&prev) = energies.last() {
                if e <= prev {
                    return Err(parse_err(format!("energy {e} not above previous {prev}")));
                }
            }
            if !(s.is_finite() && s > 0.0) {
                return Err(parse_err(format!("sigma {s} must be > 0")));
            }
            energies.push(e);
            sigmas.push(s);
        }
        Self::new(name, density_g_cm3, energies, sigmas)
    }

    pub fn load(name: impl Into<String>, density_g_cm3: f64, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_table_str(name, density_g_cm3, &text, &path.display().to_string())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Mass density in g/cm³.
    pub fn density(&self) -> f64 {
        self.density
    }

    pub fn energy_range(&self) -> (f64, f64) {
        (self.energies_kev[0], *self.energies_kev.last().unwrap())
    }

    /// Mass attenuation coefficient σ in cm²/g at `energy_kev`.
    pub fn cross_section_at(&self, energy_kev: f64) -> Result<f64> {
        let (lo, hi) = self.energy_range();
        if !(energy_kev >= lo && energy_kev <= hi) {
            return Err(Error::OutOfRange {
                energy_kev,
                lo_kev: lo,
                hi_kev: hi,
            });
        }
        // index of first table energy >= energy_kev
        let j = self.energies_kev.partition_point(|&e| e < energy_kev);
        if self.energies_kev[j] == energy_kev {
            return Ok(self.sigmas_cm2_g[j]);
        }
        let (e0, e1) = (self.energies_kev[j - 1], self.energies_kev[j]);
        let (s0, s1) = (self.sigmas_cm2_g[j - 1], self.sigmas_cm2_g[j]);
        let t = (energy_kev.ln() - e0.ln()) / (e1.ln() - e0.ln());
        Ok((s0.ln() + t * (s1.ln() - s0.ln())).exp())
    }
}

/// Conductor and detector geometry, all lengths in cm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StripGeometry {
    thickness_z: f64,
    window_d: f64,
    mean_free_path_mu: f64,
}

impl StripGeometry {
    pub fn new(thickness_z: f64, window_d: f64, mean_free_path_mu: f64) -> Result<Self> {
        for (name, v) in [
            ("thickness_z", thickness_z),
            ("window_d", window_d),
            ("mean_free_path_mu", mean_free_path_mu),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, format!("must be finite and > 0, got {v}")));
            }
        }
        Ok(Self {
            thickness_z,
            window_d,
            mean_free_path_mu,
        })
    }

    pub fn thickness_z(&self) -> f64 {
        self.thickness_z
    }

    pub fn window_d(&self) -> f64 {
        self.window_d
    }

    pub fn mean_free_path_mu(&self) -> f64 {
        self.mean_free_path_mu
    }
}

/// Photon absorption length λ = 1/(σρ) in cm.
pub fn absorption_length(material: &Material, energy_kev: f64) -> Result<f64> {
    let sigma = material.cross_section_at(energy_kev)?;
    Ok(1.0 / (sigma * material.density()))
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0) || lambda.is_nan() {
        return Err(Error::invalid("lambda", format!("must be > 0, got {lambda}")));
    }
    Ok(())
}

/// Fraction of the current whose capture X-rays escape the strip, in the
/// thin-sampling form λ/z. Clamped to 1 when λ ≥ z.
pub fn visible_fraction(strip: &StripGeometry, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok((lambda / strip.thickness_z()).min(1.0))
}

/// Escape probability averaged over a uniform emission depth in [0, z]:
/// (λ/z)(1 − exp(−z/λ)).
pub fn exact_escape_fraction(strip: &StripGeometry, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    let x = strip.thickness_z() / lambda;
    if x == 0.0 {
        return Ok(1.0);
    }
    Ok((-(-x).exp_m1() / x).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strip(z: f64) -> StripGeometry {
        StripGeometry::new(z, 1.0, 1.0).unwrap()
    }

    fn unit_material() -> Material {
        Material::new("unit", 1.0, vec![1.0, 10.0], vec![1.0, 1.0]).unwrap()
    }

    #[test]
    fn reciprocal_identity() {
        assert_eq!(absorption_length(&unit_material(), 5.0).unwrap(), 1.0);
    }

    #[test]
    fn doubling_sigma_halves_lambda() {
        let a = Material::new("a", 2.0, vec![1.0, 10.0], vec![3.0, 3.0]).unwrap();
        let b = Material::new("b", 2.0, vec![1.0, 10.0], vec![6.0, 6.0]).unwrap();
        let la = absorption_length(&a, 4.0).unwrap();
        let lb = absorption_length(&b, 4.0).unwrap();
        assert!((la / lb - 2.0).abs() < 1e-15);
    }

    #[test]
    fn out_of_range_energy_is_rejected() {
        let m = unit_material();
        assert!(matches!(absorption_length(&m, 0.5), Err(Error::OutOfRange { .. })));
        assert!(matches!(absorption_length(&m, 10.5), Err(Error::OutOfRange { .. })));
        assert!(absorption_length(&m, 10.0).is_ok());
    }

    #[test]
    fn log_log_interpolation_follows_power_law() {
        // sigma = 1000 * E^-3 sampled at 2 and 8 keV; interpolation is exact for power laws
        let m = Material::new("pl", 1.0, vec![2.0, 8.0], vec![125.0, 1000.0 / 512.0]).unwrap();
        let s = m.cross_section_at(4.0).unwrap();
        assert!((s - 1000.0 / 64.0).abs() < 1e-12);
    }

    #[test]
    fn table_parsing_rejects_bad_rows() {
        let err = Material::from_table_str("x", 1.0, "# h\n1 2\n1 3\n", "t").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
        let err = Material::from_table_str("x", 1.0, "# h\n1 -2\n", "t").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = Material::from_table_str("x", 1.0, "# h\n1 2 3\n", "t").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn invalid_geometry_and_density() {
        assert!(StripGeometry::new(-1.0, 1.0, 1.0).is_err());
        assert!(StripGeometry::new(1.0, 0.0, 1.0).is_err());
        assert!(Material::new("x", 0.0, vec![1.0], vec![1.0]).is_err());
        assert!(PhysicalConstants::new(0.0).is_err());
    }

    #[test]
    fn visible_fraction_ratio_and_clamp() {
        assert!((visible_fraction(&strip(10.0), 1.0).unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(visible_fraction(&strip(1.0), 1.0).unwrap(), 1.0);
        assert_eq!(visible_fraction(&strip(1.0), 5.0).unwrap(), 1.0);
        assert!(visible_fraction(&strip(1.0), 0.0).is_err());
    }

    #[test]
    fn exact_escape_closed_form() {
        let v = exact_escape_fraction(&strip(10.0), 1.0).unwrap();
        let expected = 0.1 * (1.0 - (-10.0f64).exp());
        assert!((v - expected).abs() < 1e-16);
        assert!((v - 0.099_995_460_007_023_75).abs() < 1e-15);
    }

    #[test]
    fn exact_escape_tends_to_one_for_thin_strips() {
        let v = exact_escape_fraction(&strip(1e-12), 1.0).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn thin_approximation_within_one_percent_for_thick_strips() {
        for ratio in [5.0, 7.5, 10.0, 50.0, 1e3] {
            let s = strip(ratio);
            let approx = visible_fraction(&s, 1.0).unwrap();
            let exact = exact_escape_fraction(&s, 1.0).unwrap();
            assert!(((approx - exact) / exact).abs() < 0.01, "z/λ = {ratio}");
        }
    }
}
