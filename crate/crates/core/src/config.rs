//! JSON run configuration.
//!
//! ```json
//! {
//!   "interaction": { "g_tau": 3.14159, "alpha": 2.5, "chi0": 0.0, "ramsey_on": true },
//!   "wavepacket": { "kind": "flat_top", "units": "wavelength", "half_width": 1.0 },
//!   "grid": { "log2_points": 14, "padding": 4.0 },
//!   "regime": null
//! }
//! ```
//!
//! Every section is optional and falls back to its default. Unknown keys are
//! rejected at every level.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::{Grid, DEFAULT_LOG2_POINTS, DEFAULT_PADDING};
use crate::model::{
    build_wavepacket, validate_regime, AmplitudeField, Convention, InteractionConfig,
    PhysicalRegime, TabulatedPoint, ValidityReport, WavepacketSpec,
};

/// Length unit of wavepacket positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    /// Standing-wave phase φ.
    #[default]
    Phase,
    /// Multiples of the wavelength, converted through the active [`Convention`].
    Wavelength,
}

impl Units {
    fn scale(self, convention: Convention) -> f64 {
        match self {
            Units::Phase => 1.0,
            Units::Wavelength => convention.phase_per_wavelength(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WavepacketInput {
    FlatTop {
        #[serde(default)]
        units: Units,
        #[serde(default)]
        center: f64,
        half_width: f64,
    },
    Gaussian {
        #[serde(default)]
        units: Units,
        center: f64,
        sigma: f64,
    },
    Tabulated {
        #[serde(default)]
        units: Units,
        points: Vec<TabulatedPoint>,
    },
}

impl Default for WavepacketInput {
    /// Flat over |x/λ| ≤ 1.
    fn default() -> Self {
        WavepacketInput::FlatTop {
            units: Units::Wavelength,
            center: 0.0,
            half_width: 1.0,
        }
    }
}

impl WavepacketInput {
    /// The wavepacket in phase units.
    pub fn to_spec(&self, convention: Convention) -> WavepacketSpec {
        match self {
            WavepacketInput::FlatTop {
                units,
                center,
                half_width,
            } => {
                let k = units.scale(convention);
                WavepacketSpec::FlatTop {
                    center: center * k,
                    half_width: half_width * k,
                }
            }
            WavepacketInput::Gaussian {
                units,
                center,
                sigma,
            } => {
                let k = units.scale(convention);
                WavepacketSpec::Gaussian {
                    center: center * k,
                    sigma: sigma * k,
                }
            }
            WavepacketInput::Tabulated { units, points } => {
                let k = units.scale(convention);
                WavepacketSpec::Tabulated {
                    points: points
                        .iter()
                        .map(|p| TabulatedPoint {
                            phi: p.phi * k,
                            amplitude: p.amplitude,
                        })
                        .collect(),
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub log2_points: u32,
    /// Empty support-widths added on each side of the wavepacket.
    pub padding: f64,
    /// Explicit `[lo, hi)` window in phase units; overrides `padding`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 2]>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            log2_points: DEFAULT_LOG2_POINTS,
            padding: DEFAULT_PADDING,
            window: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub interaction: InteractionConfig,
    #[serde(default)]
    pub wavepacket: WavepacketInput,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub regime: Option<PhysicalRegime>,
}

/// A configuration resolved into phase units under one convention.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub interaction: InteractionConfig,
    pub spec: WavepacketSpec,
    pub grid: Grid,
}

impl Resolved {
    pub fn wavepacket(&self) -> Result<AmplitudeField> {
        build_wavepacket(&self.spec, &self.grid)
    }
}

impl Config {
    /// Parses and validates JSON text. Errors name the offending key path and
    /// the line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Config = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            if path.is_empty() || path == "." {
                Error::Config(inner.to_string())
            } else {
                Error::Config(format!("at `{path}`: {inner}"))
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.interaction.validate()?;
        self.wavepacket.to_spec(Convention::default()).validate()?;
        let g = &self.grid;
        if !(1..=24).contains(&g.log2_points) {
            return Err(Error::InvalidParameter {
                name: "grid.log2_points",
                reason: format!("{} is outside 1..=24", g.log2_points),
            });
        }
        if !g.padding.is_finite() || g.padding < 0.0 {
            return Err(Error::InvalidParameter {
                name: "grid.padding",
                reason: format!("{} must be finite and non-negative", g.padding),
            });
        }
        if let Some([lo, hi]) = g.window {
            if !(lo.is_finite() && hi.is_finite()) {
                return Err(Error::NonFinite("grid.window"));
            }
            if hi <= lo {
                return Err(Error::InvalidParameter {
                    name: "grid.window",
                    reason: format!("[{lo}, {hi}] is empty"),
                });
            }
        }
        Ok(())
    }

    pub fn resolve(&self, convention: Convention) -> Result<Resolved> {
        self.validate()?;
        let spec = self.wavepacket.to_spec(convention);
        let grid = match self.grid.window {
            Some([lo, hi]) => Grid::new(self.grid.log2_points, lo, hi)?,
            None => spec.default_grid(self.grid.log2_points, self.grid.padding)?,
        };
        Ok(Resolved {
            interaction: self.interaction,
            spec,
            grid,
        })
    }

    /// Physical-regime report, when a regime section is present.
    pub fn regime_report(&self) -> Result<Option<ValidityReport>> {
        self.regime
            .as_ref()
            .map(|r| validate_regime(r, &self.interaction))
            .transpose()
    }

    /// Canonical JSON, the form hashed and stored in run manifests.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// SHA-256 of [`Config::canonical_json`], hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn empty_object_is_default() {
        let cfg = Config::from_json("{}").unwrap();
        assert_eq!(cfg, Config::default());
        let r = cfg.resolve(Convention::PaperFigure).unwrap();
        assert_eq!(r.spec, WavepacketSpec::flat_top(PI));
        let r = cfg.resolve(Convention::StrictK0).unwrap();
        assert_eq!(r.spec, WavepacketSpec::flat_top(2.0 * PI));
    }

    #[test]
    fn unknown_keys_rejected_with_path() {
        for (text, key) in [
            (r#"{"interactoin": {}}"#, "interactoin"),
            (r#"{"interaction": {"alpah": 2.0}}"#, "interaction"),
            (r#"{"grid": {"points": 10}}"#, "grid"),
            (
                r#"{"wavepacket": {"kind": "gaussian", "center": 0, "sigma": 1, "width": 2}}"#,
                "width",
            ),
        ] {
            let err = Config::from_json(text).unwrap_err();
            assert!(matches!(err, Error::Config(_)));
            assert!(err.to_string().contains(key), "{err}");
            assert_eq!(err.exit_code(), 2);
        }
    }

    #[test]
    fn syntax_error_reports_line() {
        let err = Config::from_json("{\n  \"grid\": {\n    \"padding\": ,\n  }\n}").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn type_error_reports_key() {
        let err = Config::from_json(r#"{"interaction": {"alpha": "big"}}"#).unwrap_err();
        assert!(err.to_string().contains("interaction.alpha"), "{err}");
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(Config::from_json(r#"{"interaction": {"alpha": -1}}"#).is_err());
        assert!(Config::from_json(r#"{"grid": {"log2_points": 40}}"#).is_err());
        assert!(Config::from_json(r#"{"grid": {"window": [1, 0]}}"#).is_err());
        assert!(Config::from_json(
            r#"{"wavepacket": {"kind": "gaussian", "center": 0, "sigma": 0}}"#
        )
        .is_err());
    }

    #[test]
    fn canonical_round_trip() {
        let text = r#"{"interaction": {"chi0": 0.1, "ramsey_on": false},
                       "wavepacket": {"kind": "gaussian", "center": 0.7853981633974483, "sigma": 0.3141592653589793},
                       "grid": {"log2_points": 12}}"#;
        let cfg = Config::from_json(text).unwrap();
        let again = Config::from_json(&cfg.canonical_json()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.hash(), again.hash());
        assert_ne!(cfg.hash(), Config::default().hash());
    }

    #[test]
    fn window_outside_support_is_clean_error() {
        let cfg =
            Config::from_json(r#"{"grid": {"log2_points": 10, "window": [20, 30]}}"#).unwrap();
        let r = cfg.resolve(Convention::PaperFigure).unwrap();
        assert!(r.wavepacket().is_err());
    }
}
