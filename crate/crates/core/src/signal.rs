//! Transmitted and received signal synthesis.
//!
//! A target at grid direction `g` with delay `l` and response `γ` contributes
//! `γ c_g t_g W J` to the `N×L_R` measurement, where `t_g` (row) is the
//! effective transmit gain under `s^t`, `c_g` (column) the effective receive
//! gain under `s^r`, and `J` the delay shift. In vectorized form this is
//! `γ Q w` with `Q = J^T ⊗ (c_g t_g)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Channel, PhaseShiftVector};
use crate::linalg::{complex_gaussian, vectorize, CMat, CVec, C64};

/// Snapshot bookkeeping shared by the waveform, the receive window and the
/// delay search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotWindow {
    /// `L`.
    pub waveform_len: usize,
    /// `L_R`.
    pub received_len: usize,
    /// `L^m`, the smallest representable delay.
    pub min_delay: usize,
}

impl SnapshotWindow {
    pub fn new(waveform_len: usize, received_len: usize, min_delay: usize) -> Result<Self> {
        if waveform_len == 0 || received_len < waveform_len {
            return Err(Error::Domain(format!(
                "need 1 ≤ L ≤ L_R, got L={waveform_len}, L_R={received_len}"
            )));
        }
        Ok(Self { waveform_len, received_len, min_delay })
    }

    /// Number of distinct delay offsets, `L_R - L + 1`.
    pub fn offset_count(&self) -> usize {
        self.received_len - self.waveform_len + 1
    }

    pub fn max_delay(&self) -> usize {
        self.min_delay + self.received_len - self.waveform_len
    }

    pub fn delay_of_offset(&self, offset: usize) -> usize {
        self.min_delay + offset
    }
}

/// Delay shift `J` (L×L_R) stored as its column offset.
///
/// `J[l, l'] = 1` iff `l' = l + offset`; right-multiplying an `N×L` block
/// places it at columns `offset..offset+L` of an `N×L_R` block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShiftMatrix {
    offset: usize,
    waveform_len: usize,
    received_len: usize,
}

impl ShiftMatrix {
    pub fn new(delay: usize, window: &SnapshotWindow) -> Result<Self> {
        if delay < window.min_delay || delay > window.max_delay() {
            return Err(Error::Domain(format!(
                "delay {delay} outside [{}, {}]",
                window.min_delay,
                window.max_delay()
            )));
        }
        Ok(Self::from_offset(delay - window.min_delay, window))
    }

    pub(crate) fn from_offset(offset: usize, window: &SnapshotWindow) -> Self {
        debug_assert!(offset < window.offset_count());
        Self { offset, waveform_len: window.waveform_len, received_len: window.received_len }
    }

    pub fn offset(&self) -> usize {
        self.offset
    }

    /// `X J` for an `rows×L` matrix `X`.
    pub fn apply(&self, x: &CMat) -> CMat {
        assert_eq!(x.ncols(), self.waveform_len, "shift input has wrong width");
        let mut out = CMat::zeros(x.nrows(), self.received_len);
        out.columns_mut(self.offset, self.waveform_len).copy_from(x);
        out
    }

    /// Dense 0/1 form, for oracles.
    pub fn dense(&self) -> CMat {
        CMat::from_fn(self.waveform_len, self.received_len, |l, lp| {
            if lp == l + self.offset {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }
}

/// Waveform matrix plus transmit/receive phase shifts.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    /// `W`, N×L.
    pub waveform: CMat,
    pub tx_phases: PhaseShiftVector,
    pub rx_phases: PhaseShiftVector,
}

impl Design {
    pub fn power(&self) -> f64 {
        self.waveform.norm_squared()
    }

    pub fn waveform_vec(&self) -> CVec {
        vectorize(&self.waveform)
    }
}

/// Effective per-direction gains under a design: row `k` of `tx` is
/// `b_k(s^t) + ξ_k` and row `k` of `rx` is `b_k(s^r) + ξ_k`.
#[derive(Debug, Clone)]
pub struct DesignGains {
    pub tx: CMat,
    pub rx: CMat,
}

impl DesignGains {
    pub fn new(channel: &Channel, tx: &PhaseShiftVector, rx: &PhaseShiftVector) -> Result<Self> {
        let m = channel.element_count();
        if tx.len() != m || rx.len() != m {
            return Err(Error::Shape(format!(
                "phase vectors of length {} and {} for {m} elements",
                tx.len(),
                rx.len()
            )));
        }
        Ok(Self {
            tx: channel.reflection_gain(tx)? + &channel.xi,
            rx: channel.reflection_gain(rx)? + &channel.xi,
        })
    }

    pub fn for_design(channel: &Channel, design: &Design) -> Result<Self> {
        Self::new(channel, &design.tx_phases, &design.rx_phases)
    }

    /// `c_k t_k` (N×N).
    pub fn spatial(&self, k: usize) -> CMat {
        self.rx.row(k).transpose() * self.tx.row(k)
    }

    /// `vec(c_k t_k W J)` without forming `Q`.
    pub fn target_column(&self, k: usize, shift: &ShiftMatrix, waveform: &CMat) -> CVec {
        let tw = self.tx.row(k) * waveform;
        let block = self.rx.row(k).transpose() * tw;
        vectorize(&shift.apply(&block))
    }
}

/// `Q_k = J^T ⊗ (c_k t_k)`, NL_R × NL.
pub fn q_matrix(gains: &DesignGains, k: usize, shift: &ShiftMatrix) -> CMat {
    shift.dense().transpose().kronecker(&gains.spatial(k))
}

/// A hypothesized or true target: grid direction index and delay shift.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlacedTarget {
    pub direction: usize,
    pub shift: ShiftMatrix,
}

/// `F = (Q_1 w, …, Q_K w)`, NL_R × K.
pub fn response_matrix(
    gains: &DesignGains,
    targets: &[PlacedTarget],
    waveform: &CMat,
    window: &SnapshotWindow,
) -> CMat {
    let rows = gains.tx.ncols() * window.received_len;
    let mut f = CMat::zeros(rows, targets.len());
    for (col, t) in targets.iter().enumerate() {
        f.set_column(col, &gains.target_column(t.direction, &t.shift, waveform));
    }
    f
}

/// Noise-free `vec(Y)` for targets with given responses.
pub fn mean_signal(
    gains: &DesignGains,
    targets: &[PlacedTarget],
    responses: &CVec,
    waveform: &CMat,
    window: &SnapshotWindow,
) -> CVec {
    let mut y = CVec::zeros(gains.tx.ncols() * window.received_len);
    for (t, g) in targets.iter().zip(responses.iter()) {
        y += gains.target_column(t.direction, &t.shift, waveform) * *g;
    }
    y
}

/// One target of the simulated scene.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target {
    /// Index into the channel's direction list.
    pub direction: usize,
    /// Delay in snapshots.
    pub delay: usize,
    pub response: C64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SceneTruth {
    pub targets: Vec<Target>,
}

impl SceneTruth {
    pub fn placed(&self, window: &SnapshotWindow) -> Result<Vec<PlacedTarget>> {
        self.targets
            .iter()
            .map(|t| Ok(PlacedTarget { direction: t.direction, shift: ShiftMatrix::new(t.delay, window)? }))
            .collect()
    }

    pub fn responses(&self) -> CVec {
        CVec::from_iterator(self.targets.len(), self.targets.iter().map(|t| t.response))
    }
}

/// One cycle's measurement `Y` (N×L_R).
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedSignal {
    pub y: CMat,
    pub cycle: usize,
}

impl ReceivedSignal {
    pub fn vec(&self) -> CVec {
        vectorize(&self.y)
    }
}

/// `Y = Σ γ_k c_k t_k W J_k + V` with `V` i.i.d. `CN(0, σ²)`.
pub fn synthesize_received<R: Rng + ?Sized>(
    channel: &Channel,
    truth: &SceneTruth,
    design: &Design,
    window: &SnapshotWindow,
    noise_var: f64,
    cycle: usize,
    rng: &mut R,
) -> Result<ReceivedSignal> {
    if !(noise_var >= 0.0) {
        return Err(Error::Domain(format!("noise variance {noise_var} < 0")));
    }
    let n = channel.antenna_count();
    if design.waveform.shape() != (n, window.waveform_len) {
        return Err(Error::Shape(format!(
            "waveform is {:?}, expected {n}×{}",
            design.waveform.shape(),
            window.waveform_len
        )));
    }
    let gains = DesignGains::for_design(channel, design)?;
    let placed = truth.placed(window)?;
    let mean = mean_signal(&gains, &placed, &truth.responses(), &design.waveform, window);
    let mut y = CMat::from_column_slice(n, window.received_len, mean.as_slice());
    if noise_var > 0.0 {
        for z in y.iter_mut() {
            *z += complex_gaussian(rng, noise_var);
        }
    }
    Ok(ReceivedSignal { y, cycle })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Direction, PlanarLayout, RadarGeometry};
    use crate::linalg::complex_gaussian_vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn window() -> SnapshotWindow {
        SnapshotWindow::new(10, 15, 10).unwrap()
    }

    fn small_channel(m_side: usize, n: usize) -> Channel {
        let layout = PlanarLayout {
            ris_rows: m_side,
            ris_cols: m_side,
            antenna_rows: 1,
            antenna_cols: n,
            ..Default::default()
        };
        let dirs = vec![Direction::new(PI / 6.0, PI / 4.0).unwrap(), Direction::new(PI / 6.0, 3.0 * PI / 4.0).unwrap()];
        Channel::new(RadarGeometry::planar(&layout).unwrap(), dirs).unwrap()
    }

    fn random_design(ch: &Channel, l: usize, rng: &mut ChaCha8Rng) -> Design {
        let n = ch.antenna_count();
        let m = ch.element_count();
        Design {
            waveform: CMat::from_column_slice(n, l, complex_gaussian_vec(rng, n * l).as_slice()),
            tx_phases: PhaseShiftVector::random(rng, m, 8),
            rx_phases: PhaseShiftVector::random(rng, m, 8),
        }
    }

    #[test]
    fn shift_examples() {
        let w = window();
        let j0 = ShiftMatrix::new(10, &w).unwrap().dense();
        for l in 0..10 {
            assert_eq!(j0[(l, l)], C64::new(1.0, 0.0));
        }
        let j5 = ShiftMatrix::new(15, &w).unwrap().dense();
        for l in 0..10 {
            assert_eq!(j5[(l, l + 5)], C64::new(1.0, 0.0));
            assert_eq!(j5.row(l).iter().filter(|z| z.re == 1.0).count(), 1);
        }
        assert!(matches!(ShiftMatrix::new(16, &w), Err(Error::Domain(_))));
        assert!(matches!(ShiftMatrix::new(9, &w), Err(Error::Domain(_))));
    }

    #[test]
    fn shift_apply_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let w = window();
        let x = CMat::from_column_slice(3, 10, complex_gaussian_vec(&mut rng, 30).as_slice());
        for d in 10..=15 {
            let s = ShiftMatrix::new(d, &w).unwrap();
            let a = s.apply(&x);
            assert!((&a - &x * s.dense()).norm() < 1e-14);
            assert!((a.norm() - x.norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn q_matrix_vec_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ch = small_channel(2, 2);
        let win = SnapshotWindow::new(4, 6, 3).unwrap();
        let d = random_design(&ch, 4, &mut rng);
        let gains = DesignGains::for_design(&ch, &d).unwrap();
        for k in 0..2 {
            let s = ShiftMatrix::new(4, &win).unwrap();
            let q = q_matrix(&gains, k, &s);
            let lhs = &q * d.waveform_vec();
            let direct = vectorize(&(gains.spatial(k) * &d.waveform * s.dense()));
            assert!((&lhs - &direct).norm() <= 1e-12 * direct.norm());
            assert!((&lhs - gains.target_column(k, &s, &d.waveform)).norm() <= 1e-12 * direct.norm());
        }
        let zero = CMat::zeros(2, 4);
        let s = ShiftMatrix::new(3, &win).unwrap();
        assert_eq!(gains.target_column(0, &s, &zero).norm(), 0.0);
    }

    #[test]
    fn no_ris_q_uses_direct_path_only() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ch = small_channel(0, 2);
        let d = random_design(&ch, 4, &mut rng);
        let gains = DesignGains::for_design(&ch, &d).unwrap();
        let xi = ch.xi.row(0).transpose();
        let expected = &xi * xi.transpose();
        assert!((gains.spatial(0) - expected).norm() < 1e-14);
    }

    #[test]
    fn received_matches_f_gamma() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let ch = small_channel(2, 2);
        let win = SnapshotWindow::new(4, 7, 2).unwrap();
        let d = random_design(&ch, 4, &mut rng);
        let truth = SceneTruth {
            targets: vec![
                Target { direction: 0, delay: 2, response: C64::new(0.3, -0.1) },
                Target { direction: 1, delay: 5, response: C64::new(-0.2, 0.4) },
            ],
        };
        let rx = synthesize_received(&ch, &truth, &d, &win, 0.0, 1, &mut rng).unwrap();
        let gains = DesignGains::for_design(&ch, &d).unwrap();
        let f = response_matrix(&gains, &truth.placed(&win).unwrap(), &d.waveform, &win);
        let fy = &f * truth.responses();
        let mut direct = CMat::zeros(2, 7);
        for t in &truth.targets {
            let s = ShiftMatrix::new(t.delay, &win).unwrap();
            direct += (gains.spatial(t.direction) * &d.waveform * s.dense()) * t.response;
        }
        assert!((rx.vec() - &fy).norm() <= 1e-12 * fy.norm());
        assert!((rx.y - direct).norm() <= 1e-12 * fy.norm());
        let f2 = response_matrix(&gains, &truth.placed(&win).unwrap(), &(d.waveform.clone() * C64::from(2.5)), &win);
        assert!((f2 - f * C64::from(2.5)).norm() < 1e-12);
    }

    #[test]
    fn empty_scene_is_silent() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ch = small_channel(2, 2);
        let win = SnapshotWindow::new(4, 6, 0).unwrap();
        let d = random_design(&ch, 4, &mut rng);
        let rx = synthesize_received(&ch, &SceneTruth::default(), &d, &win, 0.0, 1, &mut rng).unwrap();
        assert_eq!(rx.y.norm(), 0.0);
        assert!(synthesize_received(&ch, &SceneTruth::default(), &d, &win, -1.0, 1, &mut rng).is_err());
    }

    #[test]
    fn noise_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let ch = small_channel(0, 2);
        let win = SnapshotWindow::new(1, 5, 0).unwrap();
        let d = Design {
            waveform: CMat::zeros(2, 1),
            tx_phases: PhaseShiftVector::continuous(vec![]),
            rx_phases: PhaseShiftVector::continuous(vec![]),
        };
        let sigma2 = 0.37;
        let mut sum = C64::new(0.0, 0.0);
        let mut sq = 0.0;
        let mut count = 0usize;
        while count < 100_000 {
            let rx = synthesize_received(&ch, &SceneTruth::default(), &d, &win, sigma2, 1, &mut rng).unwrap();
            for z in rx.y.iter() {
                sum += z;
                sq += z.norm_sqr();
                count += 1;
            }
        }
        let var = sq / count as f64;
        assert!((var - sigma2).abs() < 0.03 * sigma2);
        let se = (sigma2 / count as f64).sqrt();
        assert!((sum / count as f64).norm() < 4.0 * se);
    }
}
