//! Experiment configuration: a flat TOML table layered over a named profile.

use std::f64::consts::{PI, TAU};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Channel, Direction, PlanarLayout, RadarGeometry};
use crate::signal::SnapshotWindow;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Proposed,
    Random,
    Mimo,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Proposed => "proposed",
            Scheme::Random => "random",
            Scheme::Mimo => "mimo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Transmit power `P_M` (W).
    Power,
    /// Antenna count `N`, laid out near-square.
    Antennas,
    /// Element count `M`, laid out near-square.
    Elements,
    /// Phase levels `N_s`.
    PhaseLevels,
    /// Array height above the surface, in wavelengths.
    Height,
    /// Array lateral offset along both x and y, in wavelengths.
    Lateral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Desk,
    Paper,
}

/// All experiment knobs. Angles are in radians, lengths in wavelengths unless
/// noted, grid indices 0-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub ris_rows: usize,
    pub ris_cols: usize,
    pub antenna_rows: usize,
    pub antenna_cols: usize,
    /// Meters.
    pub wavelength: f64,
    pub element_spacing: f64,
    pub antenna_spacing: f64,
    pub array_offset: [f64; 3],
    pub eta: f64,
    pub phase_levels: usize,
    pub antenna_gain: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub element_gain: Option<f64>,

    pub waveform_len: usize,
    pub received_len: usize,
    pub min_delay: usize,
    /// `P_M` in watts.
    pub power: f64,
    /// `σ²` in dBW.
    pub noise_dbw: f64,

    pub grid_count: usize,
    pub grid_theta: f64,
    pub max_targets: usize,

    pub target_grids: Vec<usize>,
    /// Delay offsets from `min_delay`, one per target.
    pub target_offsets: Vec<usize>,
    /// `|γ|` in dB.
    pub response_db: f64,

    pub cycles: usize,
    pub runs: usize,
    /// Runs per alternative truth for the mis-detection estimate; 0 disables it.
    pub misdetect_runs: usize,
    pub seed: u64,
    pub schemes: Vec<Scheme>,
    /// Detection threshold `ω`; defaults to `σ/60`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    /// WPSO stopping threshold; defaults to a fraction of the single-pair scale.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    pub max_iterations: usize,
    pub randomizations: usize,
    pub sdp_accuracy: f64,
    /// `v^l / 2`, range per snapshot of delay.
    pub range_per_snapshot: f64,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_axis: Option<SweepAxis>,
    pub sweep_values: Vec<f64>,
    /// Fill the wall-clock column (breaks byte-for-byte reproducibility).
    pub record_wallclock: bool,
}

impl ExperimentConfig {
    /// Scaled-down scene that keeps all three schemes tractable on one core.
    pub fn desk() -> Self {
        Self {
            ris_rows: 4,
            ris_cols: 4,
            antenna_rows: 1,
            antenna_cols: 2,
            wavelength: 0.1,
            element_spacing: 0.5,
            antenna_spacing: 0.5,
            array_offset: [0.0, 0.0, 3.0],
            eta: 1.0,
            phase_levels: 8,
            antenna_gain: 1.0,
            element_gain: None,
            waveform_len: 6,
            received_len: 9,
            min_delay: 10,
            power: 12.0,
            noise_dbw: -34.0,
            grid_count: 4,
            grid_theta: PI / 6.0,
            max_targets: 2,
            target_grids: vec![0, 1],
            target_offsets: vec![0, 3],
            response_db: -40.0,
            cycles: 6,
            runs: 200,
            misdetect_runs: 200,
            seed: 1,
            schemes: vec![Scheme::Proposed, Scheme::Random, Scheme::Mimo],
            threshold: None,
            epsilon: None,
            max_iterations: 50,
            randomizations: 100,
            sdp_accuracy: 1e-7,
            range_per_snapshot: 1.0,
            sweep_axis: None,
            sweep_values: Vec::new(),
            record_wallclock: false,
        }
    }

    /// Full-size scene: 8×8 surface, 2×2 array, L=10, L_R=15.
    pub fn paper() -> Self {
        Self {
            ris_rows: 8,
            ris_cols: 8,
            antenna_rows: 2,
            antenna_cols: 2,
            waveform_len: 10,
            received_len: 15,
            noise_dbw: -50.0,
            target_offsets: vec![0, 5],
            cycles: 20,
            ..Self::desk()
        }
    }

    pub fn profile(p: Profile) -> Self {
        match p {
            Profile::Desk => Self::desk(),
            Profile::Paper => Self::paper(),
        }
    }

    /// Parses TOML text, layering its keys over `base`.
    pub fn from_toml_over(text: &str, base: &Self) -> Result<Self> {
        let overrides: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut table = toml::Table::try_from(base).map_err(|e| Error::Config(e.to_string()))?;
        for (k, v) in overrides {
            table.insert(k, v);
        }
        let cfg: Self = table.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, profile: Profile) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_over(&text, &Self::profile(profile))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.runs == 0 {
            return fail("runs must be ≥ 1".into());
        }
        if self.cycles == 0 {
            return fail("cycles must be ≥ 1".into());
        }
        if self.antenna_rows * self.antenna_cols == 0 {
            return fail("at least one antenna is required".into());
        }
        for (name, v) in [
            ("wavelength", self.wavelength),
            ("element_spacing", self.element_spacing),
            ("antenna_spacing", self.antenna_spacing),
            ("power", self.power),
            ("antenna_gain", self.antenna_gain),
            ("range_per_snapshot", self.range_per_snapshot),
            ("sdp_accuracy", self.sdp_accuracy),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return fail(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return fail(format!("eta must lie in (0, 1], got {}", self.eta));
        }
        if self.phase_levels < 2 {
            return fail(format!("phase_levels must be ≥ 2, got {}", self.phase_levels));
        }
        if self.waveform_len == 0 || self.received_len < self.waveform_len {
            return fail("need 1 ≤ waveform_len ≤ received_len".into());
        }
        if self.grid_count == 0 {
            return fail("grid_count must be ≥ 1".into());
        }
        if !(0.0..=PI / 2.0).contains(&self.grid_theta) {
            return fail(format!("grid_theta {} must face the surface", self.grid_theta));
        }
        if self.target_grids.len() != self.target_offsets.len() {
            return fail("target_grids and target_offsets differ in length".into());
        }
        if self.target_grids.len() > self.max_targets {
            return fail("more targets than max_targets".into());
        }
        if self.target_grids.iter().any(|&g| g >= self.grid_count) {
            return fail("target grid index out of range".into());
        }
        let max_off = self.received_len - self.waveform_len;
        if self.target_offsets.iter().any(|&o| o > max_off) {
            return fail(format!("target offsets must be ≤ {max_off}"));
        }
        if self.schemes.is_empty() {
            return fail("no schemes selected".into());
        }
        if self.sweep_axis.is_some() && self.sweep_values.is_empty() {
            return fail("sweep_axis set without sweep_values".into());
        }
        self.geometry()?;
        Ok(())
    }

    pub fn noise_var(&self) -> f64 {
        10f64.powf(self.noise_dbw / 10.0)
    }

    pub fn response_abs(&self) -> f64 {
        10f64.powf(self.response_db / 20.0)
    }

    pub fn threshold(&self) -> f64 {
        self.threshold.unwrap_or(self.noise_var().sqrt() / 60.0)
    }

    pub fn window(&self) -> Result<SnapshotWindow> {
        SnapshotWindow::new(self.waveform_len, self.received_len, self.min_delay)
    }

    pub fn layout(&self) -> PlanarLayout {
        PlanarLayout {
            ris_rows: self.ris_rows,
            ris_cols: self.ris_cols,
            antenna_rows: self.antenna_rows,
            antenna_cols: self.antenna_cols,
            wavelength: self.wavelength,
            element_spacing: self.element_spacing,
            antenna_spacing: self.antenna_spacing,
            array_offset: self.array_offset,
            eta: self.eta,
            phase_levels: self.phase_levels,
            antenna_gain: self.antenna_gain,
            element_gain: self.element_gain,
        }
    }

    pub fn geometry(&self) -> Result<RadarGeometry> {
        RadarGeometry::planar(&self.layout())
    }

    /// Grid directions `(θ, (i + ½) 2π/I)`.
    pub fn grid_directions(&self) -> Vec<Direction> {
        (0..self.grid_count)
            .map(|i| Direction { theta: self.grid_theta, phi: (i as f64 + 0.5) * TAU / self.grid_count as f64 })
            .collect()
    }

    pub fn channel(&self) -> Result<Channel> {
        Channel::new(self.geometry()?, self.grid_directions())
    }

    /// Copy with one sweep parameter replaced.
    pub fn with_axis(&self, axis: SweepAxis, value: f64) -> Result<Self> {
        let mut c = self.clone();
        let count = || -> Result<usize> {
            if value >= 0.0 && value.fract() == 0.0 {
                Ok(value as usize)
            } else {
                Err(Error::Config(format!("{axis:?} sweep value {value} is not a count")))
            }
        };
        match axis {
            SweepAxis::Power => c.power = value,
            SweepAxis::Antennas => (c.antenna_rows, c.antenna_cols) = near_square(count()?),
            SweepAxis::Elements => (c.ris_rows, c.ris_cols) = near_square(count()?),
            SweepAxis::PhaseLevels => c.phase_levels = count()?,
            SweepAxis::Height => c.array_offset[2] = value,
            SweepAxis::Lateral => {
                c.array_offset[0] = value;
                c.array_offset[1] = value;
            }
        }
        c.sweep_axis = None;
        c.sweep_values.clear();
        c.validate()?;
        Ok(c)
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::desk()
    }
}

/// `(rows, cols)` with `rows ≤ cols`, `rows` the largest divisor ≤ √n.
pub fn near_square(n: usize) -> (usize, usize) {
    if n == 0 {
        return (0, 0);
    }
    let mut rows = (n as f64).sqrt().floor() as usize;
    while n % rows != 0 {
        rows -= 1;
    }
    (rows, n / rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profiles_validate() {
        ExperimentConfig::desk().validate().unwrap();
        ExperimentConfig::paper().validate().unwrap();
        let p = ExperimentConfig::paper();
        assert_eq!(p.ris_rows * p.ris_cols, 64);
        assert_eq!(p.antenna_rows * p.antenna_cols, 4);
        assert!((p.noise_var() - 1e-5).abs() < 1e-20);
        assert!((p.response_abs() - 0.01).abs() < 1e-15);
    }

    #[test]
    fn toml_layering() {
        let c = ExperimentConfig::from_toml_over("runs = 7\nschemes = [\"mimo\"]\n", &ExperimentConfig::desk()).unwrap();
        assert_eq!(c.runs, 7);
        assert_eq!(c.schemes, vec![Scheme::Mimo]);
        assert_eq!(c.ris_rows, 4);
        let back = ExperimentConfig::from_toml_over(&c.to_toml(), &ExperimentConfig::paper()).unwrap();
        assert_eq!(back, c);
        assert!(matches!(
            ExperimentConfig::from_toml_over("bogus = 1", &ExperimentConfig::desk()),
            Err(Error::Config(_))
        ));
        assert!(matches!(ExperimentConfig::from_toml_over("runs = 0", &ExperimentConfig::desk()), Err(Error::Config(_))));
    }

    #[test]
    fn grid_centers() {
        let d = ExperimentConfig::desk().grid_directions();
        assert!((d[0].phi - PI / 4.0).abs() < 1e-15);
        assert!((d[1].phi - 3.0 * PI / 4.0).abs() < 1e-15);
    }

    #[test]
    fn sweep_layouts() {
        assert_eq!(near_square(16), (4, 4));
        assert_eq!(near_square(8), (2, 4));
        assert_eq!(near_square(32), (4, 8));
        assert_eq!(near_square(2), (1, 2));
        let c = ExperimentConfig::desk().with_axis(SweepAxis::Elements, 8.0).unwrap();
        assert_eq!((c.ris_rows, c.ris_cols), (2, 4));
        assert!(ExperimentConfig::desk().with_axis(SweepAxis::PhaseLevels, 2.5).is_err());
    }
}
