//! Hypotheses over the angular grid, ML delay/response estimation, the
//! log-domain posterior and the thresholded final decision.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::Channel;
use crate::linalg::{hermitian_eigenvalues, CMat, CVec};
use crate::signal::{
    response_matrix, Design, DesignGains, PlacedTarget, ReceivedSignal, ShiftMatrix, SnapshotWindow,
};

/// Condition number above which the normal equations get a ridge term.
pub const RIDGE_CONDITION: f64 = 1e10;
/// Ridge weight relative to `tr(F^H F) / K`.
pub const RIDGE_WEIGHT: f64 = 1e-12;

/// A multiset of grid indices (0-based, non-decreasing).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Hypothesis {
    grid_indices: Vec<usize>,
}

impl Hypothesis {
    pub fn new(mut grid_indices: Vec<usize>) -> Self {
        grid_indices.sort_unstable();
        Self { grid_indices }
    }

    pub fn empty() -> Self {
        Self { grid_indices: Vec::new() }
    }

    pub fn grid_indices(&self) -> &[usize] {
        &self.grid_indices
    }

    pub fn target_count(&self) -> usize {
        self.grid_indices.len()
    }
}

/// All multisets of sizes `0..=max_targets` over `grid_count` indices,
/// ordered by size and then lexicographically. The first entry is empty.
pub fn enumerate_hypotheses(grid_count: usize, max_targets: usize) -> Vec<Hypothesis> {
    let mut out = vec![Hypothesis::empty()];
    if grid_count == 0 {
        return out;
    }
    for size in 1..=max_targets {
        let mut cur = vec![0usize; size];
        loop {
            out.push(Hypothesis { grid_indices: cur.clone() });
            // Advance to the next non-decreasing tuple.
            let Some(pos) = (0..size).rev().find(|&p| cur[p] + 1 < grid_count) else {
                break;
            };
            let v = cur[pos] + 1;
            for c in cur.iter_mut().skip(pos) {
                *c = v;
            }
        }
    }
    out
}

/// `C(n, k)` in floating point (exact for the sizes used here).
pub fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n.saturating_sub(k));
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `p¹(U) = 1/(K_M + 1) · 1/J(N(U))`, with `J(K)` the number of size-K entries.
pub fn initial_prior(hypotheses: &[Hypothesis]) -> Vec<f64> {
    let max_size = hypotheses.iter().map(Hypothesis::target_count).max().unwrap_or(0);
    let mut counts = vec![0usize; max_size + 1];
    for h in hypotheses {
        counts[h.target_count()] += 1;
    }
    let sizes = counts.iter().filter(|&&c| c > 0).count() as f64;
    hypotheses
        .iter()
        .map(|h| 1.0 / sizes / counts[h.target_count()] as f64)
        .collect()
}

/// Least-squares responses `(F^H F)^{-1} F^H y`, with a small ridge when the
/// Gram matrix is badly conditioned.
pub fn estimate_responses(f: &CMat, y: &CVec) -> Result<CVec> {
    if f.nrows() != y.len() {
        return Err(Error::Shape(format!("F has {} rows, y has {}", f.nrows(), y.len())));
    }
    let k = f.ncols();
    if k == 0 {
        return Ok(CVec::zeros(0));
    }
    let mut gram = f.adjoint() * f;
    let rhs = f.adjoint() * y;
    let eig = hermitian_eigenvalues(&gram);
    let (lo, hi) = (eig.min(), eig.max());
    if !(hi > 0.0) {
        return Err(Error::SingularEstimation("F has no energy".into()));
    }
    if lo <= 0.0 || hi / lo > RIDGE_CONDITION {
        let trace: f64 = (0..k).map(|i| gram[(i, i)].re).sum();
        let ridge = RIDGE_WEIGHT * trace / k as f64;
        for i in 0..k {
            gram[(i, i)] += ridge;
        }
    }
    let chol = gram
        .cholesky()
        .ok_or_else(|| Error::SingularEstimation("normal equations not positive definite".into()))?;
    Ok(chol.solve(&rhs))
}

/// One cycle of recorded design and measurement.
#[derive(Debug, Clone)]
pub struct CycleRecord {
    pub design: Design,
    pub gains: DesignGains,
    pub received: ReceivedSignal,
}

impl CycleRecord {
    pub fn new(channel: &Channel, design: Design, received: ReceivedSignal) -> Result<Self> {
        let gains = DesignGains::for_design(channel, &design)?;
        Ok(Self { design, gains, received })
    }
}

/// ML estimates for one hypothesis over the full history.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisEstimate {
    /// Absolute delays in snapshots, one per target.
    pub delays: Vec<usize>,
    pub responses: CVec,
    /// `Σ_i ‖y^i − ȳ^i‖²` over the history.
    pub residual: f64,
    /// Set when the normal equations were singular and responses fell back to 0.
    pub singular: bool,
}

impl HypothesisEstimate {
    pub fn placed(&self, hypothesis: &Hypothesis, window: &SnapshotWindow) -> Vec<PlacedTarget> {
        hypothesis
            .grid_indices()
            .iter()
            .zip(&self.delays)
            .map(|(&g, &d)| PlacedTarget {
                direction: g,
                shift: ShiftMatrix::new(d, window).expect("estimated delays lie in the window"),
            })
            .collect()
    }
}

/// Feasible offset tuples for a hypothesis; same-grid targets get strictly
/// increasing offsets, which keeps their delays distinct.
pub fn delay_tuples(hypothesis: &Hypothesis, offsets: usize) -> Vec<Vec<usize>> {
    let g = hypothesis.grid_indices();
    let k = g.len();
    let mut out = Vec::new();
    if k == 0 {
        out.push(Vec::new());
        return out;
    }
    if offsets == 0 {
        return out;
    }
    let mut cur = vec![0usize; k];
    loop {
        if (1..k).all(|i| g[i] != g[i - 1] || cur[i] > cur[i - 1]) {
            out.push(cur.clone());
        }
        let Some(pos) = (0..k).rev().find(|&p| cur[p] + 1 < offsets) else {
            break;
        };
        cur[pos] += 1;
        for c in cur.iter_mut().skip(pos + 1) {
            *c = 0;
        }
    }
    out
}

fn stack<'a>(parts: impl Iterator<Item = &'a CVec>, total: usize) -> CVec {
    let mut out = CVec::zeros(total);
    let mut at = 0;
    for p in parts {
        out.rows_mut(at, p.len()).copy_from(p);
        at += p.len();
    }
    out
}

/// Exhaustive ML search over delay tuples with least-squares responses.
pub fn estimate_delays(
    hypothesis: &Hypothesis,
    history: &[CycleRecord],
    window: &SnapshotWindow,
) -> Result<HypothesisEstimate> {
    let y_parts: Vec<CVec> = history.iter().map(|r| r.received.vec()).collect();
    let total: usize = y_parts.iter().map(|v| v.len()).sum();
    let y = stack(y_parts.iter(), total);
    let tuples = delay_tuples(hypothesis, window.offset_count());
    if tuples.is_empty() {
        return Err(Error::InfeasibleHypothesis(format!(
            "{} same-direction targets do not fit in {} delay slots",
            hypothesis.target_count(),
            window.offset_count()
        )));
    }
    let k = hypothesis.target_count();
    let mut best: Option<HypothesisEstimate> = None;
    for tuple in &tuples {
        let placed: Vec<PlacedTarget> = hypothesis
            .grid_indices()
            .iter()
            .zip(tuple)
            .map(|(&g, &o)| PlacedTarget { direction: g, shift: ShiftMatrix::from_offset(o, window) })
            .collect();
        let mut f = CMat::zeros(total, k);
        let mut row = 0;
        for rec in history {
            let block = response_matrix(&rec.gains, &placed, &rec.design.waveform, window);
            f.rows_mut(row, block.nrows()).copy_from(&block);
            row += block.nrows();
        }
        let (responses, singular) = match estimate_responses(&f, &y) {
            Ok(g) => (g, false),
            Err(Error::SingularEstimation(_)) => (CVec::zeros(k), true),
            Err(e) => return Err(e),
        };
        let residual = (&y - &f * &responses).norm_squared();
        if best.as_ref().is_none_or(|b| residual < b.residual) {
            best = Some(HypothesisEstimate {
                delays: tuple.iter().map(|&o| window.delay_of_offset(o)).collect(),
                responses,
                residual,
                singular,
            });
        }
    }
    Ok(best.expect("at least one tuple"))
}

/// Normalized posterior from prior and log-likelihoods (max-subtracted).
pub fn posterior_from_loglik(prior: &[f64], loglik: &[f64]) -> Result<Vec<f64>> {
    let logs: Vec<f64> = prior
        .iter()
        .zip(loglik)
        .map(|(&p, &l)| if p > 0.0 { p.ln() + l } else { f64::NEG_INFINITY })
        .collect();
    let peak = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !peak.is_finite() {
        return Err(Error::Underflow);
    }
    let w: Vec<f64> = logs.iter().map(|&l| (l - peak).exp()).collect();
    let s: f64 = w.iter().sum();
    Ok(w.into_iter().map(|x| x / s).collect())
}

/// Probabilities and estimates for every hypothesis after some cycles.
#[derive(Debug, Clone)]
pub struct PosteriorState {
    pub hypotheses: Vec<Hypothesis>,
    pub prior: Vec<f64>,
    pub probabilities: Vec<f64>,
    pub log_likelihoods: Vec<f64>,
    /// `None` for infeasible hypotheses.
    pub estimates: Vec<Option<HypothesisEstimate>>,
    /// Number of cycles folded in so far.
    pub cycle: usize,
}

impl PosteriorState {
    pub fn new(grid_count: usize, max_targets: usize) -> Self {
        let hypotheses = enumerate_hypotheses(grid_count, max_targets);
        let prior = initial_prior(&hypotheses);
        let j = hypotheses.len();
        Self {
            probabilities: prior.clone(),
            prior,
            log_likelihoods: vec![0.0; j],
            estimates: vec![None; j],
            hypotheses,
            cycle: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hypotheses.is_empty()
    }

    pub fn index_of(&self, h: &Hypothesis) -> Option<usize> {
        self.hypotheses.iter().position(|x| x == h)
    }

    /// Re-estimates every hypothesis over `history` and recomputes
    /// `p(U_j) ∝ p¹(U_j) exp(−Σ_i ‖y^i − ȳ^i‖² / σ²)`.
    pub fn update(&mut self, history: &[CycleRecord], window: &SnapshotWindow, noise_var: f64) -> Result<()> {
        if !(noise_var > 0.0) {
            return Err(Error::Domain(format!("noise variance {noise_var} must be positive")));
        }
        let results: Vec<Result<HypothesisEstimate>> = self
            .hypotheses
            .par_iter()
            .map(|h| estimate_delays(h, history, window))
            .collect();
        let mut loglik = Vec::with_capacity(results.len());
        let mut estimates = Vec::with_capacity(results.len());
        for r in results {
            match r {
                Ok(est) => {
                    loglik.push(-est.residual / noise_var);
                    estimates.push(Some(est));
                }
                Err(Error::InfeasibleHypothesis(_)) => {
                    loglik.push(f64::NEG_INFINITY);
                    estimates.push(None);
                }
                Err(e) => return Err(e),
            }
        }
        self.probabilities = posterior_from_loglik(&self.prior, &loglik)?;
        self.log_likelihoods = loglik;
        self.estimates = estimates;
        self.cycle = history.len();
        Ok(())
    }

    /// Largest response modulus over all estimates (0 when none).
    pub fn max_response_energy(&self) -> f64 {
        self.estimates
            .iter()
            .flatten()
            .map(|e| e.responses.norm_squared())
            .fold(0.0, f64::max)
    }
}

/// Outcome of the threshold test and MAP choice.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionDecision {
    pub hypothesis: usize,
    pub grid_indices: Vec<usize>,
    pub delays: Vec<usize>,
    /// `v^l l̂_k / 2`.
    pub ranges: Vec<f64>,
    pub rejected: Vec<bool>,
    /// Posterior renormalized over surviving hypotheses.
    pub survivors_posterior: Vec<f64>,
    /// Set when no hypothesis survived with positive mass and `U_0` was forced.
    pub fallback: bool,
}

/// Rejects hypotheses with any `|γ̂_k| ≤ ω`, then picks the most probable
/// survivor. Exact ties go to the earliest hypothesis, i.e. fewer targets
/// first, then lowest canonical order.
pub fn threshold_and_decide(state: &PosteriorState, omega: f64, range_per_snapshot: f64) -> DetectionDecision {
    let rejected: Vec<bool> = state
        .hypotheses
        .iter()
        .zip(&state.estimates)
        .map(|(h, est)| match est {
            Some(e) => e.responses.iter().any(|g| g.norm() <= omega),
            None => h.target_count() > 0,
        })
        .collect();
    let mass: f64 = state
        .probabilities
        .iter()
        .zip(&rejected)
        .filter(|(_, &r)| !r)
        .map(|(p, _)| p)
        .sum();
    let survivors_posterior: Vec<f64> = state
        .probabilities
        .iter()
        .zip(&rejected)
        .map(|(&p, &r)| if r || mass <= 0.0 { 0.0 } else { p / mass })
        .collect();
    let mut best: Option<usize> = None;
    for (j, &p) in survivors_posterior.iter().enumerate() {
        if !rejected[j] && p > 0.0 && best.is_none_or(|b| p > survivors_posterior[b]) {
            best = Some(j);
        }
    }
    let fallback = best.is_none();
    let j = best.unwrap_or(0);
    let h = &state.hypotheses[j];
    let delays = state.estimates[j].as_ref().map(|e| e.delays.clone()).unwrap_or_default();
    DetectionDecision {
        hypothesis: j,
        grid_indices: h.grid_indices().to_vec(),
        ranges: delays.iter().map(|&d| d as f64 * range_per_snapshot).collect(),
        delays,
        rejected,
        survivors_posterior,
        fallback,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Direction, PhaseShiftVector, PlanarLayout, RadarGeometry};
    use crate::linalg::{complex_gaussian_vec, C64};
    use crate::signal::{synthesize_received, SceneTruth, Target};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;
    use std::f64::consts::PI;

    #[test]
    fn hypothesis_counts() {
        assert_eq!(enumerate_hypotheses(1, 1).len(), 2);
        assert_eq!(enumerate_hypotheses(4, 2).len(), 15);
        let h0 = enumerate_hypotheses(4, 0);
        assert_eq!(h0, vec![Hypothesis::empty()]);
    }

    fn brute_multisets(i: usize, k_max: usize) -> BTreeSet<Vec<usize>> {
        let mut out = BTreeSet::new();
        for k in 0..=k_max {
            let total = i.pow(k as u32);
            for code in 0..total {
                let mut v: Vec<usize> = (0..k).map(|p| code / i.pow(p as u32) % i).collect();
                v.sort_unstable();
                out.insert(v);
            }
        }
        out
    }

    #[test]
    fn counts_match_direct_enumeration() {
        for i in 1..=6 {
            for k in 0..=3 {
                let h = enumerate_hypotheses(i, k);
                let expected: f64 = (0..=k).map(|s| binomial(i + s - 1, s)).sum();
                assert_eq!(h.len() as f64, expected, "I={i} K={k}");
                let set: BTreeSet<Vec<usize>> = h.iter().map(|x| x.grid_indices().to_vec()).collect();
                assert_eq!(set, brute_multisets(i, k));
                assert!(h[0].grid_indices().is_empty());
            }
        }
    }

    #[test]
    fn prior_values() {
        let p = initial_prior(&enumerate_hypotheses(1, 1));
        assert_eq!(p, vec![0.5, 0.5]);
        let h = enumerate_hypotheses(4, 2);
        let p = initial_prior(&h);
        for (hyp, pr) in h.iter().zip(&p) {
            if hyp.target_count() == 2 {
                assert!((pr - 1.0 / 30.0).abs() < 1e-15);
            }
        }
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    fn random_mat(rng: &mut ChaCha8Rng, r: usize, c: usize) -> CMat {
        CMat::from_column_slice(r, c, complex_gaussian_vec(rng, r * c).as_slice())
    }

    #[test]
    fn ls_recovery_and_orthogonality() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = random_mat(&mut rng, 8, 2);
        let g = complex_gaussian_vec(&mut rng, 2);
        let est = estimate_responses(&f, &(&f * &g)).unwrap();
        assert!((est - &g).norm() < 1e-10);
        assert_eq!(estimate_responses(&f, &CVec::zeros(8)).unwrap().norm(), 0.0);

        let y = complex_gaussian_vec(&mut rng, 8);
        let est = estimate_responses(&f, &y).unwrap();
        // Normal-equations oracle by explicit 2×2 inverse.
        let a = f.adjoint() * &f;
        let b = f.adjoint() * &y;
        let det = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
        let x0 = (a[(1, 1)] * b[0] - a[(0, 1)] * b[1]) / det;
        let x1 = (a[(0, 0)] * b[1] - a[(1, 0)] * b[0]) / det;
        assert!((est[0] - x0).norm() < 1e-10 && (est[1] - x1).norm() < 1e-10);
    }

    proptest! {
        #[test]
        fn ls_residual_is_orthogonal(seed in any::<u64>(), rows in 3usize..12, cols in 1usize..3) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_mat(&mut rng, rows, cols);
            let y = complex_gaussian_vec(&mut rng, rows);
            let g = estimate_responses(&f, &y).unwrap();
            let ortho = (f.adjoint() * (&y - &f * g)).norm();
            prop_assert!(ortho <= 1e-8 * (f.adjoint() * &y).norm().max(1e-300));
        }

        #[test]
        fn posterior_is_simplex_and_scale_invariant(
            ll in proptest::collection::vec(-50.0f64..50.0, 15),
            shift in -1e3f64..1e3,
        ) {
            let prior = initial_prior(&enumerate_hypotheses(4, 2));
            let p = posterior_from_loglik(&prior, &ll).unwrap();
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-10);
            prop_assert!(p.iter().all(|&x| x >= 0.0));
            let shifted: Vec<f64> = ll.iter().map(|l| l + shift).collect();
            let q = posterior_from_loglik(&prior, &shifted).unwrap();
            for (a, b) in p.iter().zip(&q) {
                prop_assert!((a - b).abs() < 1e-10);
            }
            let am = |v: &[f64]| v.iter().enumerate().fold(0, |b, (i, x)| if *x > v[b] { i } else { b });
            prop_assert_eq!(am(&p), am(&q));
        }
    }

    #[test]
    fn flat_evidence_keeps_prior() {
        let prior = initial_prior(&enumerate_hypotheses(4, 2));
        let p = posterior_from_loglik(&prior, &[-3.0; 15]).unwrap();
        for (a, b) in p.iter().zip(&prior) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(matches!(posterior_from_loglik(&prior, &[f64::NEG_INFINITY; 15]), Err(Error::Underflow)));
    }

    #[test]
    fn same_grid_tuples_are_distinct() {
        let h = Hypothesis::new(vec![2, 2]);
        let t = delay_tuples(&h, 4);
        assert_eq!(t.len(), 6);
        assert!(t.iter().all(|x| x[0] < x[1]));
        assert!(delay_tuples(&Hypothesis::new(vec![1, 1]), 1).is_empty());
        assert_eq!(delay_tuples(&Hypothesis::new(vec![0, 1]), 3).len(), 9);
    }

    struct Scene {
        channel: Channel,
        window: SnapshotWindow,
    }

    fn scene(l: usize, l_r: usize) -> Scene {
        let layout = PlanarLayout { ris_rows: 2, ris_cols: 2, antenna_rows: 1, antenna_cols: 2, ..Default::default() };
        let dirs = (0..4).map(|i| Direction::new(PI / 6.0, (i as f64 + 0.5) * PI / 2.0).unwrap()).collect();
        Scene {
            channel: Channel::new(RadarGeometry::planar(&layout).unwrap(), dirs).unwrap(),
            window: SnapshotWindow::new(l, l_r, 10).unwrap(),
        }
    }

    fn record(s: &Scene, truth: &SceneTruth, sigma2: f64, rng: &mut ChaCha8Rng, cycle: usize) -> CycleRecord {
        let n = s.channel.antenna_count();
        let l = s.window.waveform_len;
        let mut w = random_mat(rng, n, l);
        let p = w.norm_squared();
        w *= C64::from((12.0 / p).sqrt());
        let design = Design {
            waveform: w,
            tx_phases: PhaseShiftVector::random(rng, 4, 8),
            rx_phases: PhaseShiftVector::random(rng, 4, 8),
        };
        let rx = synthesize_received(&s.channel, truth, &design, &s.window, sigma2, cycle, rng).unwrap();
        CycleRecord::new(&s.channel, design, rx).unwrap()
    }

    #[test]
    fn noise_free_single_target_delay() {
        let s = scene(10, 15);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let truth = SceneTruth { targets: vec![Target { direction: 1, delay: 13, response: C64::new(0.006, 0.008) }] };
        let hist = vec![record(&s, &truth, 0.0, &mut rng, 1)];
        let est = estimate_delays(&Hypothesis::new(vec![1]), &hist, &s.window).unwrap();
        assert_eq!(est.delays, vec![13]);
        assert!((est.responses[0] - truth.targets[0].response).norm() < 1e-10);
        let e0 = estimate_delays(&Hypothesis::empty(), &hist, &s.window).unwrap();
        assert!(e0.delays.is_empty() && e0.responses.is_empty());
        assert!((e0.residual - hist[0].received.y.norm_squared()).abs() < 1e-15);
        let two = estimate_delays(&Hypothesis::new(vec![3, 3]), &hist, &s.window).unwrap();
        assert_ne!(two.delays[0], two.delays[1]);
    }

    #[test]
    fn infeasible_same_grid_hypothesis() {
        let s = scene(10, 10);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let hist = vec![record(&s, &SceneTruth::default(), 1e-6, &mut rng, 1)];
        assert!(matches!(
            estimate_delays(&Hypothesis::new(vec![0, 0]), &hist, &s.window),
            Err(Error::InfeasibleHypothesis(_))
        ));
        let mut st = PosteriorState::new(4, 2);
        st.update(&hist, &s.window, 1e-6).unwrap();
        let j = st.index_of(&Hypothesis::new(vec![0, 0])).unwrap();
        assert_eq!(st.probabilities[j], 0.0);
        assert!(st.estimates[j].is_none());
    }

    #[test]
    fn noise_free_identification_within_two_cycles() {
        let s = scene(6, 9);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let truth = SceneTruth {
            targets: vec![
                Target { direction: 0, delay: 10, response: C64::from_polar(0.01, 0.7) },
                Target { direction: 1, delay: 13, response: C64::from_polar(0.01, 2.1) },
            ],
        };
        let sigma2 = 1e-10;
        let mut st = PosteriorState::new(4, 2);
        let mut hist = Vec::new();
        for c in 1..=2 {
            hist.push(record(&s, &truth, sigma2, &mut rng, c));
            st.update(&hist, &s.window, sigma2).unwrap();
        }
        let j = st.index_of(&Hypothesis::new(vec![0, 1])).unwrap();
        let best = (0..st.len()).fold(0, |b, i| if st.probabilities[i] > st.probabilities[b] { i } else { b });
        assert_eq!(best, j);
        assert!((st.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        let d = threshold_and_decide(&st, sigma2.sqrt() / 60.0, 1.0);
        assert_eq!(d.hypothesis, j);
        assert_eq!(d.delays, vec![10, 13]);
        assert_eq!(d.ranges, vec![10.0, 13.0]);
        assert!(!d.fallback);
    }

    fn manual_state(responses: &[f64], probs: Vec<f64>) -> PosteriorState {
        let mut st = PosteriorState::new(1, 1);
        st.probabilities = probs;
        st.estimates = vec![
            Some(HypothesisEstimate { delays: vec![], responses: CVec::zeros(0), residual: 0.0, singular: false }),
            Some(HypothesisEstimate {
                delays: vec![10],
                responses: CVec::from_iterator(1, responses.iter().map(|&r| C64::from(r))),
                residual: 0.0,
                singular: false,
            }),
        ];
        st
    }

    #[test]
    fn threshold_rejects_weak_targets() {
        let st = manual_state(&[0.5e-3], vec![0.1, 0.9]);
        let d = threshold_and_decide(&st, 1e-3, 1.0);
        assert_eq!(d.hypothesis, 0);
        assert_eq!(d.rejected, vec![false, true]);

        let st = manual_state(&[1e-2], vec![0.1, 0.9]);
        let d = threshold_and_decide(&st, 1e-3, 1.0);
        assert_eq!(d.hypothesis, 1);
        assert_eq!(d.ranges, vec![10.0]);

        let st = manual_state(&[1e-2], vec![0.5, 0.5]);
        assert_eq!(threshold_and_decide(&st, 1e-3, 1.0).hypothesis, 0);

        let st = manual_state(&[1e-4], vec![0.0, 1.0]);
        let d = threshold_and_decide(&st, 1e-3, 1.0);
        assert!(d.fallback);
        assert_eq!(d.hypothesis, 0);
    }
}
