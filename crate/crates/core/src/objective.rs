//! Predicted relative-entropy distance between hypotheses and the weighted
//! design objective, in direct form and as quadratic forms in the waveform
//! and in either set of reflection coefficients.
//!
//! All three forms evaluate the same quantity
//! `Σ_{j<j'} β_{jj'} ‖ȳ_j − ȳ_j'‖² / σ²`, `β_{jj'} = p_j p_j'`.

use crate::error::{Error, Result};
use crate::geometry::{Channel, PhaseShiftVector};
use crate::hypothesis::PosteriorState;
use crate::linalg::{hermitian_part, vectorize, CMat, CVec, C64};
use crate::signal::{mean_signal, q_matrix, Design, DesignGains, PlacedTarget, SnapshotWindow};

/// Pairs with `β` below this are dropped.
pub const PAIR_WEIGHT_FLOOR: f64 = 1e-12;

/// Targets and estimated responses of one hypothesis.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HypothesisModel {
    pub targets: Vec<PlacedTarget>,
    pub responses: CVec,
}

impl HypothesisModel {
    pub fn new(targets: Vec<PlacedTarget>, responses: CVec) -> Result<Self> {
        if targets.len() != responses.len() {
            return Err(Error::Shape(format!("{} targets, {} responses", targets.len(), responses.len())));
        }
        Ok(Self { targets, responses })
    }

    pub fn mean(&self, gains: &DesignGains, waveform: &CMat, window: &SnapshotWindow) -> CVec {
        mean_signal(gains, &self.targets, &self.responses, waveform, window)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedPair {
    pub first: usize,
    pub second: usize,
    pub weight: f64,
}

/// Everything held fixed while the design is optimized within a cycle.
#[derive(Debug, Clone)]
pub struct ObjectiveContext<'a> {
    pub channel: &'a Channel,
    pub window: SnapshotWindow,
    pub noise_var: f64,
    pub models: Vec<HypothesisModel>,
    pub pairs: Vec<WeightedPair>,
}

impl<'a> ObjectiveContext<'a> {
    pub fn new(
        channel: &'a Channel,
        window: SnapshotWindow,
        noise_var: f64,
        models: Vec<HypothesisModel>,
        probabilities: &[f64],
    ) -> Result<Self> {
        if !(noise_var > 0.0) {
            return Err(Error::Domain(format!("noise variance {noise_var} must be positive")));
        }
        if models.len() != probabilities.len() {
            return Err(Error::Shape(format!("{} models, {} probabilities", models.len(), probabilities.len())));
        }
        let mut pairs = Vec::new();
        for j in 0..models.len() {
            for jp in j + 1..models.len() {
                let weight = probabilities[j] * probabilities[jp];
                if weight >= PAIR_WEIGHT_FLOOR {
                    pairs.push(WeightedPair { first: j, second: jp, weight });
                }
            }
        }
        Ok(Self { channel, window, noise_var, models, pairs })
    }

    /// Uses the current posterior as weights and the ML estimates as models;
    /// infeasible hypotheses carry zero probability and an empty model.
    pub fn from_posterior(
        channel: &'a Channel,
        window: SnapshotWindow,
        noise_var: f64,
        state: &PosteriorState,
    ) -> Result<Self> {
        let models = state
            .hypotheses
            .iter()
            .zip(&state.estimates)
            .map(|(h, e)| match e {
                Some(e) => HypothesisModel::new(e.placed(h, &window), e.responses.clone()),
                None => Ok(HypothesisModel::default()),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(channel, window, noise_var, models, &state.probabilities)
    }

    pub fn weight_sum(&self) -> f64 {
        self.pairs.iter().map(|p| p.weight).sum()
    }

    fn means(&self, design: &Design) -> Result<Vec<CVec>> {
        let gains = DesignGains::for_design(self.channel, design)?;
        Ok(self.models.iter().map(|m| m.mean(&gains, &design.waveform, &self.window)).collect())
    }

    /// `d_{jj'} = ‖ȳ_j − ȳ_j'‖² / σ²`.
    pub fn predicted_distance(&self, j: usize, jp: usize, design: &Design) -> Result<f64> {
        let gains = DesignGains::for_design(self.channel, design)?;
        predicted_distance(&gains, &self.models[j], &self.models[jp], &design.waveform, &self.window, self.noise_var)
    }
}

/// `‖ȳ(a) − ȳ(b)‖² / σ²` under fixed gains.
pub fn predicted_distance(
    gains: &DesignGains,
    a: &HypothesisModel,
    b: &HypothesisModel,
    waveform: &CMat,
    window: &SnapshotWindow,
    noise_var: f64,
) -> Result<f64> {
    if !(noise_var > 0.0) {
        return Err(Error::Domain(format!("noise variance {noise_var} must be positive")));
    }
    let diff = a.mean(gains, waveform, window) - b.mean(gains, waveform, window);
    Ok(diff.norm_squared() / noise_var)
}

/// Weighted objective `Σ β d` in direct form.
pub fn total_objective(ctx: &ObjectiveContext, design: &Design) -> Result<f64> {
    let means = ctx.means(design)?;
    Ok(ctx
        .pairs
        .iter()
        .map(|p| p.weight * (&means[p.first] - &means[p.second]).norm_squared())
        .sum::<f64>()
        / ctx.noise_var)
}

/// `P_j = Σ_k γ̂_k Q_k`, so that `ȳ_j = P_j w`.
fn response_operator(model: &HypothesisModel, gains: &DesignGains, n: usize, window: &SnapshotWindow) -> CMat {
    let mut p = CMat::zeros(n * window.received_len, n * window.waveform_len);
    for (t, g) in model.targets.iter().zip(model.responses.iter()) {
        p += q_matrix(gains, t.direction, &t.shift) * *g;
    }
    p
}

/// `Z` with `w^H Z w` equal to the weighted objective for every waveform.
/// The result is Hermitian positive semidefinite.
pub fn waveform_quadratic_form(
    ctx: &ObjectiveContext,
    tx: &PhaseShiftVector,
    rx: &PhaseShiftVector,
) -> Result<CMat> {
    let gains = DesignGains::new(ctx.channel, tx, rx)?;
    let n = ctx.channel.antenna_count();
    let ops: Vec<CMat> = ctx.models.iter().map(|m| response_operator(m, &gains, n, &ctx.window)).collect();
    let dim = n * ctx.window.waveform_len;
    let mut z = CMat::zeros(dim, dim);
    for p in &ctx.pairs {
        let d = &ops[p.first] - &ops[p.second];
        z += d.adjoint() * d * C64::from(p.weight / ctx.noise_var);
    }
    Ok(hermitian_part(&z))
}

/// Which reflection vector the phase form is written in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseSide {
    Transmit,
    Receive,
}

/// `Re(r^H Z r + r^H z1 + z2 r + z3)`, with `z2` a row vector stored as a column.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseForms {
    pub z: CMat,
    pub z1: CVec,
    pub z2: CVec,
    pub z3: C64,
}

impl PhaseForms {
    pub fn dim(&self) -> usize {
        self.z.nrows()
    }

    pub fn value(&self, r: &CVec) -> f64 {
        let quad = r.dotc(&(&self.z * r));
        let lin1 = r.dotc(&self.z1);
        let lin2: C64 = self.z2.iter().zip(r.iter()).map(|(a, b)| a * b).sum();
        (quad + lin1 + lin2 + self.z3).re
    }

    /// Hermitian cost `Z_H` and linear term `u` with
    /// `value(r) = r^H Z_H r + 2 Re(r^H u) + Re z3`.
    pub fn hermitian(&self) -> (CMat, CVec) {
        let u = (&self.z1 + self.z2.conjugate()).scale(0.5);
        (hermitian_part(&self.z), u)
    }
}

/// Linear map from reflection coefficients to one hypothesis mean:
/// `ȳ_j = T_j r + ζ_j`.
fn phase_operator(
    ctx: &ObjectiveContext,
    model: &HypothesisModel,
    side: PhaseSide,
    waveform: &CMat,
    fixed_gain: &CMat,
) -> (CMat, CVec) {
    let ch = ctx.channel;
    let (m_count, n) = (ch.element_count(), ch.antenna_count());
    let rows = n * ctx.window.received_len;
    let mut t = CMat::zeros(rows, m_count);
    let mut zeta = CVec::zeros(rows);
    for (tg, g) in model.targets.iter().zip(model.responses.iter()) {
        let k = tg.direction;
        let fixed = fixed_gain.row(k);
        match side {
            PhaseSide::Transmit => {
                let c = fixed.transpose();
                for m in 0..m_count {
                    let block = &c * (ch.h.row(m) * waveform);
                    let col = vectorize(&tg.shift.apply(&block)) * (g * ch.a[(k, m)]);
                    let mut dst = t.column_mut(m);
                    dst += &col;
                }
                let block = &c * (ch.xi.row(k) * waveform);
                zeta += vectorize(&tg.shift.apply(&block)) * *g;
            }
            PhaseSide::Receive => {
                let tw = fixed * waveform;
                for m in 0..m_count {
                    let block = ch.h.row(m).transpose() * &tw;
                    let col = vectorize(&tg.shift.apply(&block)) * (g * ch.a[(k, m)]);
                    let mut dst = t.column_mut(m);
                    dst += &col;
                }
                let block = ch.xi.row(k).transpose() * &tw;
                zeta += vectorize(&tg.shift.apply(&block)) * *g;
            }
        }
    }
    (t, zeta)
}

/// Phase forms for the transmit (`other` = receive phases) or receive
/// (`other` = transmit phases) reflection vector.
pub fn phase_quadratic_form(
    ctx: &ObjectiveContext,
    side: PhaseSide,
    waveform: &CMat,
    other: &PhaseShiftVector,
) -> Result<PhaseForms> {
    let ch = ctx.channel;
    if other.len() != ch.element_count() {
        return Err(Error::Shape(format!("{} phases for {} elements", other.len(), ch.element_count())));
    }
    if waveform.shape() != (ch.antenna_count(), ctx.window.waveform_len) {
        return Err(Error::Shape(format!("waveform shape {:?}", waveform.shape())));
    }
    let fixed_gain = ch.reflection_gain(other)? + &ch.xi;
    let ops: Vec<(CMat, CVec)> = ctx
        .models
        .iter()
        .map(|m| phase_operator(ctx, m, side, waveform, &fixed_gain))
        .collect();
    let m = ch.element_count();
    let mut z = CMat::zeros(m, m);
    let mut z1 = CVec::zeros(m);
    let mut z3 = 0.0;
    for p in &ctx.pairs {
        let scale = p.weight / ctx.noise_var;
        let dt = &ops[p.first].0 - &ops[p.second].0;
        let dz = &ops[p.first].1 - &ops[p.second].1;
        let dth = dt.adjoint();
        z += &dth * &dt * C64::from(scale);
        z1 += &dth * &dz * C64::from(scale);
        z3 += scale * dz.norm_squared();
    }
    let z2 = z1.conjugate();
    Ok(PhaseForms { z, z1, z2, z3: C64::from(z3) })
}

/// Upper bounds on the weighted objective: the σ²-retaining bound
/// `J(J−1)P_M/σ²` and the σ²-free expression `J(J−1)P_M/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveBound {
    pub with_noise: f64,
    pub printed: f64,
}

pub fn objective_upper_bound(hypotheses: usize, power: f64, noise_var: f64) -> Result<ObjectiveBound> {
    if hypotheses == 0 || !(noise_var > 0.0) {
        return Err(Error::Domain("need J ≥ 1 and σ² > 0".into()));
    }
    let pairs2 = (hypotheses * (hypotheses - 1)) as f64;
    Ok(ObjectiveBound { with_noise: pairs2 * power / noise_var, printed: pairs2 * power / 2.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Direction, PlanarLayout, RadarGeometry};
    use crate::linalg::complex_gaussian_vec;
    use crate::signal::ShiftMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn channel(m_side: usize, n: usize, grids: usize) -> Channel {
        let layout = PlanarLayout {
            ris_rows: m_side,
            ris_cols: m_side,
            antenna_rows: 1,
            antenna_cols: n,
            ..Default::default()
        };
        let dirs = (0..grids)
            .map(|i| Direction::new(PI / 6.0, (i as f64 + 0.5) * 2.0 * PI / grids as f64).unwrap())
            .collect();
        Channel::new(RadarGeometry::planar(&layout).unwrap(), dirs).unwrap()
    }

    fn design(ch: &Channel, l: usize, rng: &mut ChaCha8Rng) -> Design {
        let n = ch.antenna_count();
        Design {
            waveform: CMat::from_column_slice(n, l, complex_gaussian_vec(rng, n * l).as_slice()),
            tx_phases: PhaseShiftVector::random(rng, ch.element_count(), 4),
            rx_phases: PhaseShiftVector::random(rng, ch.element_count(), 4),
        }
    }

    fn single_target_ctx<'a>(ch: &'a Channel, win: SnapshotWindow, gamma: C64, sigma2: f64) -> ObjectiveContext<'a> {
        let t = PlacedTarget { direction: 0, shift: ShiftMatrix::new(win.min_delay + 1, &win).unwrap() };
        let models = vec![
            HypothesisModel::default(),
            HypothesisModel::new(vec![t], CVec::from_element(1, gamma)).unwrap(),
        ];
        ObjectiveContext::new(ch, win, sigma2, models, &[0.5, 0.5]).unwrap()
    }

    #[test]
    fn distance_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ch = channel(2, 2, 2);
        let win = SnapshotWindow::new(4, 6, 3).unwrap();
        let gamma = C64::new(0.01, -0.02);
        let ctx = single_target_ctx(&ch, win, gamma, 1e-3);
        let d = design(&ch, 4, &mut rng);
        assert_eq!(ctx.predicted_distance(1, 1, &d).unwrap(), 0.0);
        let gains = DesignGains::for_design(&ch, &d).unwrap();
        let direct = gamma.norm_sqr() / 1e-3 * (gains.spatial(0) * &d.waveform).norm_squared();
        let got = ctx.predicted_distance(1, 0, &d).unwrap();
        assert!((got - direct).abs() <= 1e-12 * direct);
        assert!((ctx.predicted_distance(0, 1, &d).unwrap() - got).abs() <= 1e-15 * got);
        let ctx2 = single_target_ctx(&ch, win, gamma, 2e-3);
        assert!((ctx2.predicted_distance(1, 0, &d).unwrap() - got / 2.0).abs() <= 1e-12 * got);
        assert!(predicted_distance(&gains, &ctx.models[0], &ctx.models[1], &d.waveform, &win, 0.0).is_err());
    }

    #[test]
    fn single_pair_waveform_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ch = channel(2, 2, 2);
        let win = SnapshotWindow::new(3, 5, 0).unwrap();
        let gamma = C64::new(-0.3, 0.2);
        let ctx = single_target_ctx(&ch, win, gamma, 0.1);
        let d = design(&ch, 3, &mut rng);
        let z = waveform_quadratic_form(&ctx, &d.tx_phases, &d.rx_phases).unwrap();
        let w = d.waveform_vec();
        let gains = DesignGains::for_design(&ch, &d).unwrap();
        let q = q_matrix(&gains, 0, &ctx.models[1].targets[0].shift);
        let expected = gamma.norm_sqr() * (&q * &w).norm_squared() * 0.25 / 0.1;
        let got = w.dotc(&(&z * &w)).re;
        assert!((got - expected).abs() <= 1e-10 * expected);
    }

    #[test]
    fn zero_responses_give_zero_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ch = channel(2, 2, 2);
        let win = SnapshotWindow::new(3, 5, 0).unwrap();
        let ctx = single_target_ctx(&ch, win, C64::new(0.0, 0.0), 0.1);
        let d = design(&ch, 3, &mut rng);
        assert_eq!(waveform_quadratic_form(&ctx, &d.tx_phases, &d.rx_phases).unwrap().norm(), 0.0);
        let f = phase_quadratic_form(&ctx, PhaseSide::Transmit, &d.waveform, &d.rx_phases).unwrap();
        assert_eq!(f.z.norm() + f.z1.norm() + f.z3.norm(), 0.0);
    }

    #[test]
    fn phase_forms_match_direct() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let ch = channel(2, 2, 2);
        let win = SnapshotWindow::new(4, 6, 0).unwrap();
        let t0 = PlacedTarget { direction: 0, shift: ShiftMatrix::new(1, &win).unwrap() };
        let t1 = PlacedTarget { direction: 1, shift: ShiftMatrix::new(2, &win).unwrap() };
        let models = vec![
            HypothesisModel::default(),
            HypothesisModel::new(vec![t0], CVec::from_element(1, C64::new(0.2, 0.1))).unwrap(),
            HypothesisModel::new(vec![t1], CVec::from_element(1, C64::new(-0.1, 0.3))).unwrap(),
        ];
        let ctx = ObjectiveContext::new(&ch, win, 0.01, models, &[0.5, 0.3, 0.2]).unwrap();
        let d = design(&ch, 4, &mut rng);
        let direct = total_objective(&ctx, &d).unwrap();
        let ft = phase_quadratic_form(&ctx, PhaseSide::Transmit, &d.waveform, &d.rx_phases).unwrap();
        let fr = phase_quadratic_form(&ctx, PhaseSide::Receive, &d.waveform, &d.tx_phases).unwrap();
        let vt = ft.value(&d.tx_phases.coefficients(ch.eta()));
        let vr = fr.value(&d.rx_phases.coefficients(ch.eta()));
        assert!((vt - direct).abs() <= 1e-9 * direct);
        assert!((vr - direct).abs() <= 1e-9 * direct);
        let (zh, u) = ft.hermitian();
        let r = d.tx_phases.coefficients(ch.eta());
        let alt = r.dotc(&(&zh * &r)).re + 2.0 * r.dotc(&u).re + ft.z3.re;
        assert!((alt - direct).abs() <= 1e-9 * direct);

        // r = 0 removes the transmit reflection path.
        let no_ris = Channel::new(ch.geometry.without_ris(), ch.directions.clone()).unwrap();
        let gains = DesignGains::new(&ch, &d.tx_phases, &d.rx_phases).unwrap();
        let mut cut = gains.clone();
        cut.tx = no_ris.xi.clone();
        let means: Vec<CVec> = ctx.models.iter().map(|m| m.mean(&cut, &d.waveform, &win)).collect();
        let expected: f64 = ctx
            .pairs
            .iter()
            .map(|p| p.weight * (&means[p.first] - &means[p.second]).norm_squared())
            .sum::<f64>()
            / 0.01;
        assert!((ft.value(&CVec::zeros(4)) - expected).abs() <= 1e-9 * expected);
    }

    #[test]
    fn objective_weight_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ch = channel(2, 2, 2);
        let win = SnapshotWindow::new(3, 5, 0).unwrap();
        let mut ctx = single_target_ctx(&ch, win, C64::new(0.1, 0.0), 0.1);
        let d = design(&ch, 3, &mut rng);
        let dist = ctx.predicted_distance(0, 1, &d).unwrap();
        assert!((total_objective(&ctx, &d).unwrap() - dist * ctx.weight_sum()).abs() <= 1e-12 * dist);
        ctx = ObjectiveContext::new(&ch, win, 0.1, ctx.models.clone(), &[0.0, 1.0]).unwrap();
        assert_eq!(total_objective(&ctx, &d).unwrap(), 0.0);
    }

    #[test]
    fn bound_examples() {
        let b = objective_upper_bound(15, 12.0, 1e-5).unwrap();
        assert!((b.printed - 1260.0).abs() < 1e-12);
        assert!((b.with_noise - 2.52e8).abs() < 1e-4);
        assert_eq!(objective_upper_bound(1, 12.0, 1e-5).unwrap().with_noise, 0.0);
    }
}
