//! Closed-form single-target analysis: pair distances with and without the
//! surface, phase alignment for maximum power gain, and the top-view antenna
//! placement profile.

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{radiation_pattern, Channel, Direction, PatternKind, PhaseShiftVector, RadarGeometry};
use crate::linalg::CVec;

/// `(N |γ| G^A G^A_P)² P_M / σ²`, the surface-free single-target distance.
pub fn mimo_pair_distance(antennas: usize, gamma_abs: f64, antenna_gain: f64, pattern: f64, power: f64, noise_var: f64) -> f64 {
    let a = antennas as f64 * gamma_abs * antenna_gain * pattern;
    a * a * power / noise_var
}

/// `|γ|² P_M/σ² · ‖b(s^r)+ξ‖² ‖b(s^t)+ξ‖²`. Exact when `N = 1` or when the
/// waveform rows are matched to the transmit gain.
pub fn metaradar_pair_distance(gamma_abs: f64, power: f64, noise_var: f64, rx_gain: &CVec, tx_gain: &CVec) -> f64 {
    gamma_abs * gamma_abs * power / noise_var * rx_gain.norm_squared() * tx_gain.norm_squared()
}

/// Two-way power gain `‖b_k(s^r)+ξ_k‖² ‖b_k(s^t)+ξ_k‖²`.
pub fn power_gain(channel: &Channel, k: usize, tx: &PhaseShiftVector, rx: &PhaseShiftVector) -> Result<f64> {
    Ok(channel.effective_gain(k, rx)?.norm_squared() * channel.effective_gain(k, tx)?.norm_squared())
}

/// `ρ = η √(G^R S^e G^R_P(θ)) / √(4π)`.
pub fn composite_amplitude(geom: &RadarGeometry, target: Direction) -> f64 {
    geom.eta * (geom.element_gain * geom.element_area * radiation_pattern(PatternKind::Ris, target)).sqrt() / (4.0 * PI).sqrt()
}

/// Phases aligning every reflected path with the direct path toward
/// `target`, and the resulting power gain, for a single antenna.
pub fn optimal_phases_and_max_gain(geom: &RadarGeometry, target: Direction) -> Result<(PhaseShiftVector, f64)> {
    if geom.antenna_count() != 1 {
        return Err(Error::Domain(format!("closed-form optimum needs N = 1, got {}", geom.antenna_count())));
    }
    let e = target.wave_vector(geom.wavelength);
    let rho = composite_amplitude(geom, target);
    let direct_phase = e.dot(&geom.antennas[0]);
    let mut shifts = Vec::with_capacity(geom.element_count());
    let mut sum = 0.0;
    for m in 0..geom.element_count() {
        let (dir, dist) = geom.element_to_antenna(m, 0);
        if dist <= 0.0 {
            return Err(Error::Geometry(format!("element {m} coincides with the antenna")));
        }
        let s = e.dot(&geom.ris_elements[m]) - direct_phase - TAU * dist / geom.wavelength;
        shifts.push(s.rem_euclid(TAU));
        let pa = radiation_pattern(PatternKind::Antenna, dir);
        let pr = radiation_pattern(PatternKind::Ris, dir);
        sum += rho * (pa * pr).sqrt() / dist;
    }
    let pa_target = radiation_pattern(PatternKind::Antenna, target);
    let b = geom.antenna_gain.powi(2) * (sum + pa_target.sqrt()).powi(4);
    Ok((PhaseShiftVector::continuous(shifts), b))
}

/// Top-view line of `M` elements at spacing `l^e` with an isotropic antenna
/// at `(l^x_a, l^z_a)` relative to the line center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlacementScenario {
    pub elements: usize,
    pub element_spacing: f64,
    pub rho: f64,
}

impl PlacementScenario {
    /// `G^R = 4π S^e/λ²` with `S^e = (λ/2)²`, target at polar angle `theta`.
    pub fn physical(elements: usize, wavelength: f64, eta: f64, theta: f64) -> Self {
        let le = wavelength / 2.0;
        let area = le * le;
        let gr = 4.0 * PI * area / (wavelength * wavelength);
        let pattern = radiation_pattern(PatternKind::Ris, Direction { theta, phi: 0.0 });
        Self { elements, element_spacing: le, rho: eta * (gr * area * pattern).sqrt() / (4.0 * PI).sqrt() }
    }

    /// `B(l^x_a, l^z_a) = (Σ_m ρ z^{1.5} / (z² + x_m²)^{1.25} + 1)⁴` with
    /// `x_m = l^x_a + (M+1) l^e/2 − m l^e`. Terms are summed in ascending
    /// order so mirror-image placements evaluate bit-identically.
    pub fn power_gain(&self, lx: f64, lz: f64) -> Result<f64> {
        if !(lz > 0.0) {
            return Err(Error::Domain(format!("antenna height {lz} must be positive")));
        }
        let le = self.element_spacing;
        let mut terms: Vec<f64> = (1..=self.elements)
            .map(|m| {
                let x = lx + (self.elements as f64 + 1.0) * le / 2.0 - m as f64 * le;
                self.rho * lz.powf(1.5) / (lz * lz + x * x).powf(1.25)
            })
            .collect();
        terms.sort_by(f64::total_cmp);
        Ok((terms.iter().sum::<f64>() + 1.0).powi(4))
    }

    /// Numeric argmax of `B(·, l^z_a)` over `[−l^e/2, l^e/2]` on `samples` points.
    pub fn best_lateral_offset(&self, lz: f64, samples: usize) -> Result<(f64, f64)> {
        let half = self.element_spacing / 2.0;
        let mut best = (0.0, f64::NEG_INFINITY);
        for i in 0..samples.max(2) {
            let lx = -half + 2.0 * half * i as f64 / (samples.max(2) - 1) as f64;
            let b = self.power_gain(lx, lz)?;
            if b > best.1 {
                best = (lx, b);
            }
        }
        Ok(best)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfilePoint {
    pub parameter: f64,
    pub gain: f64,
    /// Gain at the numerically best lateral offset in `[−l^e/2, l^e/2]`.
    pub achieved: f64,
}

/// `B(0, l^z_a)`, the large-height form of the optimized-offset gain, over
/// antenna heights, with the numerically optimized offset alongside.
pub fn height_profile(s: &PlacementScenario, heights: &[f64]) -> Result<Vec<ProfilePoint>> {
    heights
        .iter()
        .map(|&lz| {
            let (_, b) = s.best_lateral_offset(lz, 101)?;
            Ok(ProfilePoint { parameter: lz, gain: s.power_gain(0.0, lz)?, achieved: b })
        })
        .collect()
}

/// Power gain after quantizing the optimal phases to `levels` grid values.
pub fn quantized_gain(geom: &RadarGeometry, target: Direction, levels: usize) -> Result<f64> {
    let (s, _) = optimal_phases_and_max_gain(geom, target)?;
    let mut g = geom.clone();
    g.phase_levels = levels;
    let ch = Channel::new(g, vec![target])?;
    let q = PhaseShiftVector::quantize(&s.coefficients(1.0), levels);
    power_gain(&ch, 0, &q, &q)
}
