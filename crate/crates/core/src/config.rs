//! Scenario configuration files.
//!
//! Line-oriented `key = value` text. `#` starts a comment, either on its own
//! line or after whitespace following a value. Keys carry dotted section
//! prefixes (`strip.thickness_z_cm`). Unknown or repeated keys are errors.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::limits::{LimitSettings, DEFAULT_CL, DEFAULT_ROI_ACCEPTANCE, DEFAULT_ROI_HALF_WIDTH_SIGMA};
use crate::physics::StripGeometry;
use crate::sensitivity::{RunPlan, DEFAULT_CAPTURE_FRACTION};
use crate::spectrum::{BackgroundLine, BackgroundModel, DetectorModel, DEFAULT_LINE_ENERGY_KEV};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Text,
    Float,
    Seed,
}

/// (key, kind, required)
const SCHEMA: &[(&str, Kind, bool)] = &[
    ("name", Kind::Text, false),
    ("material.name", Kind::Text, false),
    ("material.table", Kind::Text, true),
    ("material.density_g_cm3", Kind::Float, true),
    ("strip.thickness_z_cm", Kind::Float, true),
    ("strip.window_d_cm", Kind::Float, true),
    ("strip.mean_free_path_cm", Kind::Float, true),
    ("run.current_a", Kind::Float, true),
    ("run.duration_s", Kind::Float, true),
    ("run.capture_fraction", Kind::Float, false),
    ("run.duty_on_fraction", Kind::Float, false),
    ("detector.efficiency", Kind::Float, true),
    ("detector.resolution_sigma_kev", Kind::Float, true),
    ("detector.line_energy_kev", Kind::Float, false),
    ("background.flat_rate", Kind::Float, false),
    ("background.reference_rate", Kind::Float, false),
    ("background.reduction_factor", Kind::Float, false),
    ("background.lines", Kind::Text, false),
    ("binning.lo_kev", Kind::Float, true),
    ("binning.hi_kev", Kind::Float, true),
    ("binning.width_kev", Kind::Float, true),
    ("limit.cl", Kind::Float, false),
    ("limit.roi_half_width_sigma", Kind::Float, false),
    ("limit.roi_acceptance", Kind::Float, false),
    ("seed", Kind::Seed, false),
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Binning {
    pub lo_kev: f64,
    pub hi_kev: f64,
    pub width_kev: f64,
}

/// How the flat background rate was specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BackgroundLevel {
    /// counts/(keV·s)
    Absolute(f64),
    /// `reference_rate / reduction_factor`
    Reduced { reference_rate: f64, reduction_factor: f64 },
}

impl BackgroundLevel {
    pub fn flat_rate(&self) -> f64 {
        match *self {
            BackgroundLevel::Absolute(r) => r,
            BackgroundLevel::Reduced {
                reference_rate,
                reduction_factor,
            } => reference_rate / reduction_factor,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub material_name: String,
    pub material_table: PathBuf,
    pub density_g_cm3: f64,
    pub strip: StripGeometry,
    pub plan: RunPlan,
    pub detector: DetectorModel,
    pub background_level: BackgroundLevel,
    pub background: BackgroundModel,
    pub binning: Binning,
    pub limit: LimitSettings,
    pub seed: u64,
    /// sha256 over the canonical (sorted, trimmed) key/value pairs.
    pub hash: String,
}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
}

struct Entries {
    map: BTreeMap<String, Entry>,
}

impl Entries {
    fn config_err(&self, key: &str, reason: impl Into<String>) -> Error {
        let line = self.map.get(key).map(|e| e.line).unwrap_or(0);
        Error::Config {
            line,
            key: key.to_string(),
            reason: reason.into(),
        }
    }

    fn text(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(|e| e.value.as_str())
    }

    fn float(&self, key: &str) -> Result<Option<f64>> {
        match self.map.get(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(Some)
                .ok_or_else(|| self.config_err(key, format!("`{}` is not a finite number", e.value))),
        }
    }

    fn required(&self, key: &str) -> Result<f64> {
        // presence is checked against the schema before values are read
        Ok(self.float(key)?.expect("required key checked"))
    }

    /// Float with a predicate describing the allowed range.
    fn checked(&self, key: &str, default: Option<f64>, ok: fn(f64) -> bool, range: &str) -> Result<f64> {
        let v = match (self.float(key)?, default) {
            (Some(v), _) => v,
            (None, Some(d)) => return Ok(d),
            (None, None) => self.required(key)?,
        };
        if !ok(v) {
            return Err(self.config_err(key, format!("value {v} violates {range}")));
        }
        Ok(v)
    }
}

fn positive(v: f64) -> bool {
    v > 0.0
}
fn non_negative(v: f64) -> bool {
    v >= 0.0
}
fn unit_closed(v: f64) -> bool {
    v > 0.0 && v <= 1.0
}
fn unit_open(v: f64) -> bool {
    v > 0.0 && v < 1.0
}

fn tokenize(text: &str) -> Result<Entries> {
    let mut map: BTreeMap<String, Entry> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let Some((key, value)) = trimmed.split_once('=') else {
            return Err(Error::Config {
                line,
                key: trimmed.to_string(),
                reason: "expected `key = value`".into(),
            });
        };
        let key = key.trim();
        let mut value = value.trim();
        if let Some(pos) = value.find(" #").or_else(|| value.find("\t#")) {
            value = value[..pos].trim_end();
        }
        let Some(&(_, kind, _)) = SCHEMA.iter().find(|(k, _, _)| *k == key) else {
            return Err(Error::Config {
                line,
                key: key.to_string(),
                reason: "unknown key".into(),
            });
        };
        if value.is_empty() && kind != Kind::Text {
            return Err(Error::Config {
                line,
                key: key.to_string(),
                reason: "empty value".into(),
            });
        }
        if let Some(prev) = map.get(key) {
            return Err(Error::Config {
                line,
                key: key.to_string(),
                reason: format!("duplicate key (first set on line {})", prev.line),
            });
        }
        map.insert(
            key.to_string(),
            Entry {
                value: value.to_string(),
                line,
            },
        );
    }
    for (key, _, required) in SCHEMA {
        if *required && !map.contains_key(*key) {
            return Err(Error::MissingKey { key: key.to_string() });
        }
    }
    Ok(Entries { map })
}

fn canonical_hash(entries: &Entries) -> String {
    let mut hasher = Sha256::new();
    for (k, e) in &entries.map {
        hasher.update(k.as_bytes());
        hasher.update(b"=");
        hasher.update(e.value.as_bytes());
        hasher.update(b"\n");
    }
    hex::encode(hasher.finalize())
}

fn parse_lines(entries: &Entries) -> Result<Vec<BackgroundLine>> {
    let key = "background.lines";
    let Some(text) = entries.text(key) else {
        return Ok(Vec::new());
    };
    let mut lines = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let parts: Vec<f64> = item
            .split(':')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| entries.config_err(key, format!("`{item}` is not energy:rate:sigma")))?;
        let [energy_kev, rate, sigma_kev] = parts[..] else {
            return Err(entries.config_err(key, format!("`{item}` is not energy:rate:sigma")));
        };
        if !(energy_kev > 0.0 && rate >= 0.0 && sigma_kev > 0.0) {
            return Err(entries.config_err(key, format!("`{item}` needs energy > 0, rate >= 0, sigma > 0")));
        }
        lines.push(BackgroundLine {
            energy_kev,
            rate,
            sigma_kev,
        });
    }
    Ok(lines)
}

/// Parse and validate a scenario. The material table path is kept as written;
/// see [`ScenarioConfig::material_path`] for resolution.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let e = tokenize(text)?;
    let hash = canonical_hash(&e);

    let density = e.checked("material.density_g_cm3", None, positive, "> 0")?;
    let z = e.checked("strip.thickness_z_cm", None, positive, "> 0")?;
    let d = e.checked("strip.window_d_cm", None, positive, "> 0")?;
    let mu = e.checked("strip.mean_free_path_cm", None, positive, "> 0")?;
    let strip = StripGeometry::new(z, d, mu).map_err(|err| e.config_err("strip.thickness_z_cm", err.to_string()))?;

    let current = e.checked("run.current_a", None, non_negative, ">= 0")?;
    let duration = e.checked("run.duration_s", None, positive, "> 0")?;
    let capture = e.checked(
        "run.capture_fraction",
        Some(DEFAULT_CAPTURE_FRACTION),
        unit_closed,
        "(0, 1]",
    )?;
    let duty = e.checked("run.duty_on_fraction", Some(0.5), unit_closed, "(0, 1]")?;
    let plan =
        RunPlan::new(current, duration, capture, duty).map_err(|err| e.config_err("run.current_a", err.to_string()))?;

    let eff = e.checked("detector.efficiency", None, unit_closed, "(0, 1]")?;
    let sigma = e.checked("detector.resolution_sigma_kev", None, positive, "> 0")?;
    let line = e.checked(
        "detector.line_energy_kev",
        Some(DEFAULT_LINE_ENERGY_KEV),
        positive,
        "> 0",
    )?;
    let detector =
        DetectorModel::new(eff, sigma, line).map_err(|err| e.config_err("detector.efficiency", err.to_string()))?;

    let background_level = match (
        e.float("background.flat_rate")?,
        e.float("background.reference_rate")?,
        e.float("background.reduction_factor")?,
    ) {
        (Some(_), None, None) => {
            BackgroundLevel::Absolute(e.checked("background.flat_rate", None, non_negative, ">= 0")?)
        }
        (None, Some(_), Some(_)) => BackgroundLevel::Reduced {
            reference_rate: e.checked("background.reference_rate", None, non_negative, ">= 0")?,
            reduction_factor: e.checked("background.reduction_factor", None, positive, "> 0")?,
        },
        (Some(_), _, _) => {
            return Err(e.config_err(
                "background.flat_rate",
                "give either flat_rate or reference_rate with reduction_factor, not both",
            ))
        }
        (None, Some(_), None) => {
            return Err(Error::MissingKey {
                key: "background.reduction_factor".into(),
            })
        }
        (None, None, Some(_)) => {
            return Err(Error::MissingKey {
                key: "background.reference_rate".into(),
            })
        }
        (None, None, None) => {
            return Err(Error::MissingKey {
                key: "background.flat_rate".into(),
            })
        }
    };
    let background = BackgroundModel::new(background_level.flat_rate(), parse_lines(&e)?)
        .map_err(|err| e.config_err("background.lines", err.to_string()))?;

    let binning = Binning {
        lo_kev: e.checked("binning.lo_kev", None, non_negative, ">= 0")?,
        hi_kev: e.checked("binning.hi_kev", None, positive, "> 0")?,
        width_kev: e.checked("binning.width_kev", None, positive, "> 0")?,
    };
    if binning.hi_kev <= binning.lo_kev {
        return Err(e.config_err("binning.hi_kev", "must exceed binning.lo_kev"));
    }

    let limit = LimitSettings {
        cl: e.checked("limit.cl", Some(DEFAULT_CL), unit_open, "(0, 1)")?,
        roi_half_width_sigma: e.checked(
            "limit.roi_half_width_sigma",
            Some(DEFAULT_ROI_HALF_WIDTH_SIGMA),
            positive,
            "> 0",
        )?,
        roi_acceptance: e.checked(
            "limit.roi_acceptance",
            Some(DEFAULT_ROI_ACCEPTANCE),
            unit_closed,
            "(0, 1]",
        )?,
    };
    let (roi_lo, roi_hi) = limit.roi(&detector);
    if roi_lo < binning.lo_kev || roi_hi > binning.hi_kev {
        return Err(e.config_err(
            "detector.line_energy_kev",
            format!("ROI [{roi_lo}, {roi_hi}] keV falls outside the binning range"),
        ));
    }

    let seed = match e.text("seed") {
        None => 0,
        Some(s) => s
            .parse::<u64>()
            .map_err(|_| e.config_err("seed", format!("`{s}` is not an unsigned 64-bit integer")))?,
    };

    Ok(ScenarioConfig {
        name: e.text("name").unwrap_or("scenario").to_string(),
        material_name: e.text("material.name").unwrap_or("Cu").to_string(),
        material_table: PathBuf::from(e.text("material.table").unwrap()),
        density_g_cm3: density,
        strip,
        plan,
        detector,
        background_level,
        background,
        binning,
        limit,
        seed,
        hash,
    })
}

impl ScenarioConfig {
    /// Material table path, resolved against `config_dir` when relative.
    pub fn material_path(&self, config_dir: &Path) -> PathBuf {
        if self.material_table.is_absolute() {
            self.material_table.clone()
        } else {
            config_dir.join(&self.material_table)
        }
    }
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const MINIMAL: &str = "\
name = unit
material.table = cu.txt
material.density_g_cm3 = 8.96
strip.thickness_z_cm = 0.01
strip.window_d_cm = 2.0
strip.mean_free_path_cm = 3.9e-6
run.current_a = 40
run.duration_s = 1e6
detector.efficiency = 0.5
detector.resolution_sigma_kev = 0.15
background.flat_rate = 1e-4   # counts/(keV s)
binning.lo_kev = 2
binning.hi_kev = 12
binning.width_kev = 0.05
";

    fn err_of(text: &str) -> Error {
        parse_config(text).unwrap_err()
    }

    #[test]
    fn minimal_config_parses_with_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.name, "unit");
        assert_eq!(c.plan.capture_fraction(), 0.1);
        assert_eq!(c.plan.duty_on_fraction(), 0.5);
        assert_eq!(c.detector.line_energy(), 7.5);
        assert_eq!(c.limit.cl, 0.9);
        assert_eq!(c.background.flat_rate(), 1e-4);
        assert_eq!(c.seed, 0);
    }

    #[test]
    fn negative_thickness_cites_key_and_line() {
        let text = MINIMAL.replace("strip.thickness_z_cm = 0.01", "strip.thickness_z_cm = -1");
        match err_of(&text) {
            Error::Config { line, key, .. } => {
                assert_eq!(key, "strip.thickness_z_cm");
                assert_eq!(line, 4);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_duplicate_and_missing_keys() {
        let unknown = format!("{MINIMAL}strip.width_cm = 3\n");
        assert!(matches!(err_of(&unknown), Error::Config { line: 15, ref reason, .. } if reason == "unknown key"));
        let dup = format!("{MINIMAL}run.current_a = 3\n");
        assert!(matches!(err_of(&dup), Error::Config { line: 15, ref reason, .. } if reason.contains("duplicate")));
        let missing = MINIMAL.replace("run.duration_s = 1e6\n", "");
        assert!(matches!(err_of(&missing), Error::MissingKey { ref key } if key == "run.duration_s"));
        let no_eq = format!("{MINIMAL}garbage\n");
        assert!(matches!(err_of(&no_eq), Error::Config { line: 15, .. }));
    }

    #[test]
    fn reduced_background_form() {
        let text = MINIMAL.replace(
            "background.flat_rate = 1e-4   # counts/(keV s)",
            "background.reference_rate = 3e-3\nbackground.reduction_factor = 100",
        );
        let c = parse_config(&text).unwrap();
        assert_eq!(c.background.flat_rate(), 3e-3 / 100.0);
        let both = format!("{text}\nbackground.flat_rate = 1\n");
        assert!(parse_config(&both).is_err());
    }

    #[test]
    fn background_lines_parse() {
        let text = format!("{MINIMAL}background.lines = 8.05:1e-3:0.15, 8.9:2e-4:0.15\n");
        let c = parse_config(&text).unwrap();
        assert_eq!(c.background.lines().len(), 2);
        let bad = format!("{MINIMAL}background.lines = 8.05:1e-3\n");
        assert!(parse_config(&bad).is_err());
    }

    #[test]
    fn hash_ignores_order_whitespace_and_comments() {
        let a = parse_config(MINIMAL).unwrap();
        let mut lines: Vec<&str> = MINIMAL.lines().collect();
        lines.reverse();
        let shuffled = lines
            .iter()
            .map(|l| l.replace(" = ", "=").replace("   # counts/(keV s)", ""))
            .collect::<Vec<_>>()
            .join("\n\n# comment\n");
        let b = parse_config(&shuffled).unwrap();
        assert_eq!(a.hash, b.hash);
        let c = parse_config(&MINIMAL.replace("run.current_a = 40", "run.current_a = 41")).unwrap();
        assert_ne!(a.hash, c.hash);
    }

    #[test]
    fn range_violations() {
        let bad_cl = format!("{MINIMAL}limit.cl = 1.0\n");
        assert!(matches!(err_of(&bad_cl), Error::Config { ref key, .. } if key == "limit.cl"));
        let bad_eff = MINIMAL.replace("detector.efficiency = 0.5", "detector.efficiency = 1.5");
        assert!(matches!(err_of(&bad_eff), Error::Config { ref key, .. } if key == "detector.efficiency"));
        let bad_seed = format!("{MINIMAL}seed = -3\n");
        assert!(matches!(err_of(&bad_seed), Error::Config { ref key, .. } if key == "seed"));
        let roi_out = format!("{MINIMAL}detector.line_energy_kev = 11.9\n");
        assert!(parse_config(&roi_out).is_err());
    }
}
