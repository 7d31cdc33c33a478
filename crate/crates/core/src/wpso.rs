//! Alternating waveform / phase-shift optimization.
//!
//! Each iteration solves the waveform subproblem exactly (top eigenvector),
//! then the transmit and receive phase subproblems by semidefinite relaxation,
//! Gaussian randomization and nearest-grid quantization. A sub-result replaces
//! the current design only if the exact objective does not decrease, so the
//! objective trace is monotone by construction.

use std::time::{Duration, Instant};

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{PhaseMode, PhaseShiftVector};
use crate::linalg::{complex_gaussian_vec, top_eigenpair, unvectorize, CMat, CVec, C64};
use crate::objective::{phase_quadratic_form, total_objective, waveform_quadratic_form, ObjectiveContext, PhaseForms, PhaseSide};
use crate::sdp::{solve_diag_sdp, solve_trace_sdp_rank1, DiagSdpProblem, SdpOptions};
use crate::signal::Design;

/// Largest search space the exhaustive oracle accepts.
pub const EXHAUSTIVE_LIMIT: u128 = 1_000_000;

/// `W = √P_M · v_max(Z_H)` reshaped to `rows×cols`.
pub fn optimize_waveform(z: &CMat, power: f64, rows: usize, cols: usize) -> Result<CMat> {
    if z.nrows() != rows * cols {
        return Err(Error::Shape(format!("Z is {}×{}, waveform is {rows}×{cols}", z.nrows(), z.ncols())));
    }
    let (w, _) = solve_trace_sdp_rank1(z, power)?;
    Ok(unvectorize(&w, rows, cols))
}

/// Complex-Gaussian waveform scaled to power `P_M` plus uniform grid phases.
pub fn random_design<R: Rng + ?Sized>(
    rng: &mut R,
    antennas: usize,
    waveform_len: usize,
    elements: usize,
    levels: usize,
    power: f64,
) -> Design {
    let w = complex_gaussian_vec(rng, antennas * waveform_len);
    let w = w.unscale(w.norm()) * C64::from(power.sqrt());
    Design {
        waveform: unvectorize(&w, antennas, waveform_len),
        tx_phases: PhaseShiftVector::random(rng, elements, levels),
        rx_phases: PhaseShiftVector::random(rng, elements, levels),
    }
}

fn grid_coefficient(level: usize, levels: usize, eta: f64) -> C64 {
    C64::from_polar(eta, -(level as f64) * std::f64::consts::TAU / levels as f64)
}

fn levels_to_coefficients(levels: &[usize], n_levels: usize, eta: f64) -> CVec {
    CVec::from_iterator(levels.len(), levels.iter().map(|&i| grid_coefficient(i, n_levels, eta)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseOutcome {
    pub phases: PhaseShiftVector,
    /// Subproblem value of `phases`.
    pub value: f64,
    /// Set when the SDP failed and coordinate descent produced the result.
    pub used_fallback: bool,
}

/// Cyclic exact single-element updates over the grid until a full sweep
/// changes nothing. Non-decreasing in the subproblem value.
pub fn coordinate_descent_phase(forms: &PhaseForms, eta: f64, levels: usize, start: &PhaseShiftVector) -> PhaseShiftVector {
    let m = forms.dim();
    let (zh, u) = forms.hermitian();
    let mut lv = match start.levels() {
        Some(l) if start.mode() == PhaseMode::Discrete(levels) => l,
        _ => PhaseShiftVector::quantize(&start.coefficients(eta), levels).levels().expect("discrete"),
    };
    let mut r = levels_to_coefficients(&lv, levels, eta);
    let table: Vec<C64> = (1..=levels).map(|i| grid_coefficient(i, levels, eta)).collect();
    for _ in 0..10_000 {
        let mut changed = false;
        for k in 0..m {
            let mut g = u[k];
            for j in 0..m {
                if j != k {
                    g += zh[(k, j)] * r[j];
                }
            }
            let score = |c: C64| (c.conj() * g).re;
            let current = score(r[k]);
            let tol = 1e-14 * (g.norm() * eta).max(f64::MIN_POSITIVE);
            let (best_i, best_v) = table
                .iter()
                .enumerate()
                .map(|(i, &c)| (i + 1, score(c)))
                .fold((lv[k], current), |b, cur| if cur.1 > b.1 + tol { cur } else { b });
            if best_i != lv[k] && best_v > current + tol {
                lv[k] = best_i;
                r[k] = table[best_i - 1];
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    PhaseShiftVector::from_levels(&lv, levels).expect("levels in range")
}

/// Global optimum of the phase subproblem by enumeration.
pub fn exhaustive_phase_oracle(forms: &PhaseForms, eta: f64, levels: usize) -> Result<(PhaseShiftVector, f64)> {
    let m = forms.dim();
    let count = (levels as u128).checked_pow(m as u32).unwrap_or(u128::MAX);
    if count > EXHAUSTIVE_LIMIT {
        return Err(Error::SearchTooLarge(count));
    }
    let mut lv = vec![1usize; m];
    let mut best = (lv.clone(), f64::NEG_INFINITY);
    loop {
        let v = forms.value(&levels_to_coefficients(&lv, levels, eta));
        if v > best.1 {
            best = (lv.clone(), v);
        }
        let Some(pos) = (0..m).rev().find(|&p| lv[p] < levels) else {
            break;
        };
        lv[pos] += 1;
        for x in lv.iter_mut().skip(pos + 1) {
            *x = 1;
        }
    }
    Ok((PhaseShiftVector::from_levels(&best.0, levels)?, best.1))
}

/// Homogenized Hermitian cost `[[Z_H, u], [u^H, 0]]`.
pub fn homogenized_cost(forms: &PhaseForms) -> CMat {
    let m = forms.dim();
    let (zh, u) = forms.hermitian();
    let mut c = CMat::zeros(m + 1, m + 1);
    c.view_mut((0, 0), (m, m)).copy_from(&zh);
    for i in 0..m {
        c[(i, m)] = u[i];
        c[(m, i)] = u[i].conj();
    }
    c
}

/// Drops the homogenizing coordinate after rotating it to the positive real axis.
fn dehomogenize(x: &CVec) -> CVec {
    let m = x.len() - 1;
    let last = x[m];
    let rot = if last.norm() > 0.0 { last.conj() / last.norm() } else { C64::new(1.0, 0.0) };
    x.rows(0, m).map(|z| z * rot)
}

/// Relaxes the phase subproblem to an SDP over the homogenized variable,
/// draws `randomizations` Gaussian candidates from the optimal `X`, quantizes
/// each to the grid and returns the best, also trying the quantized dominant
/// eigenvector.
pub fn optimize_phase<R: Rng + ?Sized>(
    forms: &PhaseForms,
    eta: f64,
    levels: usize,
    randomizations: usize,
    sdp: &SdpOptions,
    rng: &mut R,
) -> Result<PhaseOutcome> {
    let m = forms.dim();
    if m == 0 {
        return Ok(PhaseOutcome {
            phases: PhaseShiftVector::from_levels(&[], levels)?,
            value: forms.value(&CVec::zeros(0)),
            used_fallback: false,
        });
    }
    let mut targets = vec![eta * eta; m];
    targets.push(1.0);
    let problem = DiagSdpProblem::diagonal(&homogenized_cost(forms), targets)?;
    let (x, converged) = match solve_diag_sdp(&problem, sdp) {
        Ok(sol) => (sol.x, true),
        Err(Error::SdpConvergence { best, .. }) => (best.x, false),
        Err(e) => return Err(e),
    };

    let eig = crate::linalg::hermitian_part(&x).symmetric_eigen();
    let (_, dominant) = top_eigenpair(&x);
    let mut candidates = vec![PhaseShiftVector::quantize(&dehomogenize(&dominant), levels)];
    if !converged {
        let start = candidates.pop().expect("one candidate");
        let phases = coordinate_descent_phase(forms, eta, levels, &start);
        let value = forms.value(&phases.coefficients(eta));
        return Ok(PhaseOutcome { phases, value, used_fallback: true });
    }
    let sqrt_l: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect();
    let factor = CMat::from_fn(m + 1, m + 1, |i, j| eig.eigenvectors[(i, j)] * sqrt_l[j]);
    for _ in 0..randomizations {
        let g = complex_gaussian_vec(rng, m + 1);
        candidates.push(PhaseShiftVector::quantize(&dehomogenize(&(&factor * g)), levels));
    }
    let mut best: Option<(PhaseShiftVector, f64)> = None;
    for c in candidates {
        let v = forms.value(&c.coefficients(eta));
        if best.as_ref().is_none_or(|b| v > b.1) {
            best = Some((c, v));
        }
    }
    let (phases, value) = best.expect("at least one candidate");
    Ok(PhaseOutcome { phases, value, used_fallback: false })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WpsoOptions {
    /// Transmit power `P_M`.
    pub power: f64,
    /// Stop when one iteration improves the objective by less than this.
    pub epsilon: f64,
    pub max_iterations: usize,
    pub randomizations: usize,
    pub sdp: SdpOptions,
}

impl WpsoOptions {
    pub fn new(power: f64, epsilon: f64) -> Self {
        Self { power, epsilon, max_iterations: 50, randomizations: 100, sdp: SdpOptions::default() }
    }
}

/// `ε = 10⁻³ · (P_M/σ²) · max_j ‖γ̂_j‖²`, the objective scale of a single
/// hypothesis pair.
pub fn default_epsilon(power: f64, noise_var: f64, max_response_energy: f64) -> f64 {
    (1e-3 * power / noise_var * max_response_energy).max(f64::MIN_POSITIVE)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    IterationCap,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IterationTiming {
    pub waveform: Duration,
    pub transmit: Duration,
    pub receive: Duration,
}

impl IterationTiming {
    pub fn total(&self) -> Duration {
        self.waveform + self.transmit + self.receive
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WpsoTrace {
    /// Objective before the first iteration followed by one value per iteration.
    pub objectives: Vec<f64>,
    pub iterations: usize,
    pub termination: Termination,
    pub timings: Vec<IterationTiming>,
    pub sdp_fallbacks: usize,
}

/// Runs the alternating optimization from `initial`.
pub fn run_wpso<R: Rng + ?Sized>(
    initial: Design,
    ctx: &ObjectiveContext,
    options: &WpsoOptions,
    rng: &mut R,
) -> Result<(Design, WpsoTrace)> {
    let ch = ctx.channel;
    let (n, l) = (ch.antenna_count(), ctx.window.waveform_len);
    let (eta, levels) = (ch.eta(), ch.phase_levels());
    let has_ris = ch.element_count() > 0;
    let mut design = initial;
    let mut current = total_objective(ctx, &design)?;
    let mut trace = WpsoTrace {
        objectives: vec![current],
        iterations: 0,
        termination: Termination::IterationCap,
        timings: Vec::new(),
        sdp_fallbacks: 0,
    };

    for _ in 0..options.max_iterations {
        let before = current;
        let mut timing = IterationTiming::default();

        let t0 = Instant::now();
        let z = waveform_quadratic_form(ctx, &design.tx_phases, &design.rx_phases)?;
        let cand = Design { waveform: optimize_waveform(&z, options.power, n, l)?, ..design.clone() };
        let v = total_objective(ctx, &cand)?;
        if v >= current {
            design = cand;
            current = v;
        }
        timing.waveform = t0.elapsed();

        if has_ris {
            for side in [PhaseSide::Transmit, PhaseSide::Receive] {
                let t0 = Instant::now();
                let other = match side {
                    PhaseSide::Transmit => &design.rx_phases,
                    PhaseSide::Receive => &design.tx_phases,
                };
                let forms = phase_quadratic_form(ctx, side, &design.waveform, other)?;
                let out = optimize_phase(&forms, eta, levels, options.randomizations, &options.sdp, rng)?;
                trace.sdp_fallbacks += out.used_fallback as usize;
                let mut cand = design.clone();
                match side {
                    PhaseSide::Transmit => cand.tx_phases = out.phases,
                    PhaseSide::Receive => cand.rx_phases = out.phases,
                }
                let v = total_objective(ctx, &cand)?;
                if v >= current {
                    design = cand;
                    current = v;
                }
                match side {
                    PhaseSide::Transmit => timing.transmit = t0.elapsed(),
                    PhaseSide::Receive => timing.receive = t0.elapsed(),
                }
            }
        }

        trace.iterations += 1;
        trace.objectives.push(current);
        trace.timings.push(timing);
        if current - before < options.epsilon {
            trace.termination = Termination::Converged;
            break;
        }
    }
    Ok((design, trace))
}
