//! Deterministic channel quantities: reflection coefficients, radiation
//! patterns, the antenna-to-surface gains `H`, steering vectors `A` and `Ξ`,
//! and the cascaded reflection gain `B(s) = A diag(r(s)) H`.
//!
//! Frame conventions: the reflecting surface lies in the `z = 0` plane with its
//! boresight normal along `+z`. Steering phases are referenced to the global
//! origin (the surface center) for both arrays, so the direct and reflected
//! paths share one phase reference.

use std::f64::consts::{PI, TAU};

use nalgebra::Vector3;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec, C64};

/// Tolerance for matching a discrete phase value to its grid point.
pub const PHASE_GRID_TOL: f64 = 1e-12;

/// A far-field direction in the surface frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    /// Polar angle from the boresight normal, in `[0, π]`.
    pub theta: f64,
    /// Azimuth, in `[0, 2π)`.
    pub phi: f64,
}

impl Direction {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) || !(0.0..TAU).contains(&phi) {
            return Err(Error::Domain(format!(
                "direction (θ={theta}, φ={phi}) outside [0,π]×[0,2π)"
            )));
        }
        Ok(Self { theta, phi })
    }

    /// Direction of a nonzero vector.
    pub fn of_vector(v: &Vector3<f64>) -> Self {
        let r = v.norm();
        let theta = (v.z / r).clamp(-1.0, 1.0).acos();
        let mut phi = v.y.atan2(v.x);
        if phi < 0.0 {
            phi += TAU;
        }
        if phi >= TAU {
            phi = 0.0;
        }
        Self { theta, phi }
    }

    pub fn unit(&self) -> Vector3<f64> {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        Vector3::new(st * cp, st * sp, ct)
    }

    /// Wave vector of magnitude `2π/λ` pointing along this direction.
    pub fn wave_vector(&self, wavelength: f64) -> Vector3<f64> {
        self.unit() * (TAU / wavelength)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatternKind {
    /// `cos³θ` on the front half-space, zero behind the surface.
    Ris,
    /// Isotropic.
    Antenna,
}

/// Normalized power radiation pattern.
pub fn radiation_pattern(kind: PatternKind, direction: Direction) -> f64 {
    match kind {
        PatternKind::Ris => {
            if direction.theta <= PI / 2.0 {
                direction.theta.cos().max(0.0).powi(3)
            } else {
                0.0
            }
        }
        PatternKind::Antenna => 1.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhaseMode {
    /// Values restricted to `{iΔs | i = 1..=levels}`, `Δs = 2π/levels`.
    Discrete(usize),
    Continuous,
}

/// Phase shifts applied by the surface elements.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseShiftVector {
    shifts: Vec<f64>,
    mode: PhaseMode,
}

impl PhaseShiftVector {
    /// Builds a discrete vector from 1-based level indices `i ∈ 1..=levels`.
    pub fn from_levels(levels: &[usize], n_levels: usize) -> Result<Self> {
        if n_levels < 2 {
            return Err(Error::Domain(format!("phase level count {n_levels} < 2")));
        }
        let step = TAU / n_levels as f64;
        let shifts = levels
            .iter()
            .map(|&i| {
                if (1..=n_levels).contains(&i) {
                    Ok(i as f64 * step)
                } else {
                    Err(Error::Domain(format!("phase level {i} outside 1..={n_levels}")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { shifts, mode: PhaseMode::Discrete(n_levels) })
    }

    /// Builds a discrete vector from raw phase values, rejecting off-grid entries.
    pub fn discrete(shifts: Vec<f64>, n_levels: usize) -> Result<Self> {
        for &s in &shifts {
            grid_level(s, n_levels)?;
        }
        Ok(Self { shifts, mode: PhaseMode::Discrete(n_levels) })
    }

    pub fn continuous(shifts: Vec<f64>) -> Self {
        Self { shifts, mode: PhaseMode::Continuous }
    }

    /// Uniformly random grid phases.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, len: usize, n_levels: usize) -> Self {
        let levels: Vec<usize> = (0..len).map(|_| rng.random_range(1..=n_levels)).collect();
        Self::from_levels(&levels, n_levels).expect("levels drawn in range")
    }

    /// Quantizes each reflection coefficient to the nearest grid phase.
    /// Since `r = η e^{-js}`, the phase shift is `-arg(r)`.
    pub fn quantize(coefficients: &CVec, n_levels: usize) -> Self {
        let step = TAU / n_levels as f64;
        let levels: Vec<usize> = coefficients
            .iter()
            .map(|r| {
                let s = (-r.arg()).rem_euclid(TAU);
                let i = (s / step).round() as usize % n_levels;
                if i == 0 {
                    n_levels
                } else {
                    i
                }
            })
            .collect();
        Self::from_levels(&levels, n_levels).expect("quantized levels in range")
    }

    pub fn shifts(&self) -> &[f64] {
        &self.shifts
    }

    pub fn mode(&self) -> PhaseMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.shifts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shifts.is_empty()
    }

    /// 1-based grid levels for a discrete vector.
    pub fn levels(&self) -> Option<Vec<usize>> {
        match self.mode {
            PhaseMode::Discrete(n) => Some(
                self.shifts
                    .iter()
                    .map(|&s| grid_level(s, n).expect("validated on construction"))
                    .collect(),
            ),
            PhaseMode::Continuous => None,
        }
    }

    /// Reflection coefficient vector `r(s)`.
    pub fn coefficients(&self, eta: f64) -> CVec {
        CVec::from_iterator(self.shifts.len(), self.shifts.iter().map(|&s| C64::from_polar(eta, -s)))
    }

    /// Adds `delta` to every phase, switching to continuous mode.
    pub fn rotated(&self, delta: f64) -> Self {
        Self::continuous(self.shifts.iter().map(|s| s + delta).collect())
    }
}

fn grid_level(s: f64, n_levels: usize) -> Result<usize> {
    let step = TAU / n_levels as f64;
    let x = s / step;
    let i = x.round();
    if (x - i).abs() * step > PHASE_GRID_TOL || i < 1.0 || i > n_levels as f64 {
        return Err(Error::Domain(format!(
            "phase {s} is not on the {n_levels}-level grid {{iΔs | i=1..{n_levels}}}"
        )));
    }
    Ok(i as usize)
}

/// `η e^{-js}`. In discrete mode `s` must lie on the grid.
pub fn reflection_coefficient(s: f64, eta: f64, mode: PhaseMode) -> Result<C64> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::Domain(format!("amplitude gain η={eta} outside (0,1]")));
    }
    if let PhaseMode::Discrete(n) = mode {
        grid_level(s, n)?;
    }
    Ok(C64::from_polar(eta, -s))
}

/// Physical layout and gains of the surface and the antenna array.
#[derive(Debug, Clone, PartialEq)]
pub struct RadarGeometry {
    /// Element positions in the global frame (meters).
    pub ris_elements: Vec<Vector3<f64>>,
    /// Antenna positions in the global frame (meters).
    pub antennas: Vec<Vector3<f64>>,
    pub ris_center: Vector3<f64>,
    pub array_center: Vector3<f64>,
    pub wavelength: f64,
    pub element_area: f64,
    pub element_gain: f64,
    pub antenna_gain: f64,
    /// Reflection amplitude `η`.
    pub eta: f64,
    /// Number of discrete phase levels `N_s`.
    pub phase_levels: usize,
    pub element_spacing: f64,
}

/// Parameters for a rectangular surface and a rectangular array parallel to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanarLayout {
    pub ris_rows: usize,
    pub ris_cols: usize,
    pub antenna_rows: usize,
    pub antenna_cols: usize,
    pub wavelength: f64,
    /// In wavelengths.
    pub element_spacing: f64,
    /// In wavelengths.
    pub antenna_spacing: f64,
    /// Array center relative to the surface center, in wavelengths.
    pub array_offset: [f64; 3],
    pub eta: f64,
    pub phase_levels: usize,
    pub antenna_gain: f64,
    /// Defaults to the single-element aperture gain `4π S^e / λ²`.
    pub element_gain: Option<f64>,
}

impl Default for PlanarLayout {
    fn default() -> Self {
        Self {
            ris_rows: 8,
            ris_cols: 8,
            antenna_rows: 2,
            antenna_cols: 2,
            wavelength: 0.1,
            element_spacing: 0.5,
            antenna_spacing: 0.5,
            array_offset: [0.0, 0.0, 3.0],
            eta: 1.0,
            phase_levels: 8,
            antenna_gain: 1.0,
            element_gain: None,
        }
    }
}

fn centered_grid(rows: usize, cols: usize, spacing: f64, center: Vector3<f64>) -> Vec<Vector3<f64>> {
    let mut out = Vec::with_capacity(rows * cols);
    let x0 = (cols as f64 - 1.0) / 2.0;
    let y0 = (rows as f64 - 1.0) / 2.0;
    for r in 0..rows {
        for c in 0..cols {
            out.push(center + Vector3::new((c as f64 - x0) * spacing, (r as f64 - y0) * spacing, 0.0));
        }
    }
    out
}

impl RadarGeometry {
    pub fn planar(layout: &PlanarLayout) -> Result<Self> {
        let lambda = layout.wavelength;
        let le = layout.element_spacing * lambda;
        let ris_center = Vector3::zeros();
        let array_center = Vector3::from(layout.array_offset) * lambda;
        let element_area = le * le;
        let geom = Self {
            ris_elements: centered_grid(layout.ris_rows, layout.ris_cols, le, ris_center),
            antennas: centered_grid(
                layout.antenna_rows,
                layout.antenna_cols,
                layout.antenna_spacing * lambda,
                array_center,
            ),
            ris_center,
            array_center,
            wavelength: lambda,
            element_area,
            element_gain: layout
                .element_gain
                .unwrap_or(4.0 * PI * element_area / (lambda * lambda)),
            antenna_gain: layout.antenna_gain,
            eta: layout.eta,
            phase_levels: layout.phase_levels,
            element_spacing: le,
        };
        geom.validate()?;
        Ok(geom)
    }

    pub fn validate(&self) -> Result<()> {
        if self.phase_levels < 2 {
            return Err(Error::Geometry(format!("N_s={} < 2", self.phase_levels)));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::Geometry(format!("η={} outside (0,1]", self.eta)));
        }
        if !(self.wavelength > 0.0) {
            return Err(Error::Geometry(format!("λ={} must be positive", self.wavelength)));
        }
        if self.antennas.is_empty() {
            return Err(Error::Geometry("at least one antenna is required".into()));
        }
        Ok(())
    }

    /// Same geometry with the surface removed (`M = 0`).
    pub fn without_ris(&self) -> Self {
        Self { ris_elements: Vec::new(), ..self.clone() }
    }

    pub fn element_count(&self) -> usize {
        self.ris_elements.len()
    }

    pub fn antenna_count(&self) -> usize {
        self.antennas.len()
    }

    /// `p^e_m` relative to the first element.
    pub fn relative_element_position(&self, m: usize) -> Vector3<f64> {
        self.ris_elements[m] - self.ris_elements[0]
    }

    /// `p^a_n` relative to the first antenna.
    pub fn relative_antenna_position(&self, n: usize) -> Vector3<f64> {
        self.antennas[n] - self.antennas[0]
    }

    /// Direction from element `m` to antenna `n` and their distance.
    pub fn element_to_antenna(&self, m: usize, n: usize) -> (Direction, f64) {
        let v = self.antennas[n] - self.ris_elements[m];
        (Direction::of_vector(&v), v.norm())
    }
}

/// Antenna-to-surface path gains `H` (M×N).
pub fn antenna_ris_channel(geom: &RadarGeometry) -> Result<CMat> {
    let (m_count, n_count) = (geom.element_count(), geom.antenna_count());
    let norm = 1.0 / (4.0 * PI).sqrt();
    let mut h = CMat::zeros(m_count, n_count);
    for m in 0..m_count {
        for n in 0..n_count {
            let (dir, dist) = geom.element_to_antenna(m, n);
            if dist <= 0.0 {
                return Err(Error::Geometry(format!("element {m} coincides with antenna {n}")));
            }
            let amp = norm
                * (geom.antenna_gain
                    * radiation_pattern(PatternKind::Antenna, dir)
                    * radiation_pattern(PatternKind::Ris, dir)
                    * geom.element_area)
                    .sqrt()
                / dist;
            h[(m, n)] = C64::from_polar(amp, -TAU * dist / geom.wavelength);
        }
    }
    Ok(h)
}

/// Surface steering matrix `A` (K×M) and direct-path matrix `Ξ` (K×N).
pub fn steering_vectors(geom: &RadarGeometry, directions: &[Direction]) -> (CMat, CMat) {
    let k = directions.len();
    let mut a = CMat::zeros(k, geom.element_count());
    let mut xi = CMat::zeros(k, geom.antenna_count());
    for (row, dir) in directions.iter().enumerate() {
        let e = dir.wave_vector(geom.wavelength);
        let amp_r = (geom.element_gain * radiation_pattern(PatternKind::Ris, *dir)).sqrt();
        let amp_a = (geom.antenna_gain * radiation_pattern(PatternKind::Antenna, *dir)).sqrt();
        for (m, p) in geom.ris_elements.iter().enumerate() {
            a[(row, m)] = C64::from_polar(amp_r, e.dot(p));
        }
        for (n, p) in geom.antennas.iter().enumerate() {
            xi[(row, n)] = C64::from_polar(amp_a, e.dot(p));
        }
    }
    (a, xi)
}

/// `B(s) = A diag(r) H`.
pub fn reflection_path_gain(a: &CMat, r: &CVec, h: &CMat) -> Result<CMat> {
    if a.ncols() != r.len() || h.nrows() != r.len() {
        return Err(Error::Shape(format!(
            "A is {}×{}, r has {} entries, H is {}×{}",
            a.nrows(),
            a.ncols(),
            r.len(),
            h.nrows(),
            h.ncols()
        )));
    }
    let mut scaled = a.clone();
    for (m, mut col) in scaled.column_iter_mut().enumerate() {
        col *= r[m];
    }
    Ok(scaled * h)
}

/// Channel quantities for a fixed list of directions (normally the angular grid).
#[derive(Debug, Clone)]
pub struct Channel {
    pub geometry: RadarGeometry,
    pub directions: Vec<Direction>,
    /// M×N.
    pub h: CMat,
    /// K×M.
    pub a: CMat,
    /// K×N.
    pub xi: CMat,
}

impl Channel {
    pub fn new(geometry: RadarGeometry, directions: Vec<Direction>) -> Result<Self> {
        geometry.validate()?;
        let h = antenna_ris_channel(&geometry)?;
        let (a, xi) = steering_vectors(&geometry, &directions);
        Ok(Self { geometry, directions, h, a, xi })
    }

    pub fn element_count(&self) -> usize {
        self.h.nrows()
    }

    pub fn antenna_count(&self) -> usize {
        self.h.ncols()
    }

    pub fn eta(&self) -> f64 {
        self.geometry.eta
    }

    pub fn phase_levels(&self) -> usize {
        self.geometry.phase_levels
    }

    /// `B(s)` for all directions.
    pub fn reflection_gain(&self, phases: &PhaseShiftVector) -> Result<CMat> {
        reflection_path_gain(&self.a, &phases.coefficients(self.geometry.eta), &self.h)
    }

    /// `b_k(s) + ξ_k` as a length-N vector.
    pub fn effective_gain(&self, k: usize, phases: &PhaseShiftVector) -> Result<CVec> {
        let m = self.element_count();
        if phases.len() != m {
            return Err(Error::Shape(format!("{} phases for {m} elements", phases.len())));
        }
        let r = phases.coefficients(self.geometry.eta);
        let mut g: CVec = self.xi.row(k).transpose();
        for (mi, rm) in r.iter().enumerate() {
            let c = self.a[(k, mi)] * rm;
            for n in 0..self.antenna_count() {
                g[n] += c * self.h[(mi, n)];
            }
        }
        Ok(g)
    }
}
