//! Oracle suites. Each suite builds random instances, evaluates the production
//! path and an independent reference, and reports the worst discrepancy.
//! Pass/fail thresholds are left to the caller.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{optimal_phases_and_max_gain, power_gain, PlacementScenario};
use crate::error::Result;
use crate::geometry::{Channel, Direction, PhaseShiftVector, PlanarLayout, RadarGeometry};
use crate::hypothesis::{enumerate_hypotheses, CycleRecord, PosteriorState};
use crate::linalg::{
    complex_gaussian_vec, hermitian_eigenvalues, hermitian_part, re_quadratic, re_trace_product, vectorize, CMat, CVec,
    C64,
};
use crate::objective::{
    objective_upper_bound, phase_quadratic_form, total_objective, waveform_quadratic_form, HypothesisModel,
    ObjectiveContext, PhaseForms, PhaseSide,
};
use crate::sdp::{solve_diag_sdp, DiagSdpProblem, SdpOptions};
use crate::signal::{synthesize_received, Design, PlacedTarget, ShiftMatrix, SnapshotWindow};
use crate::sim::{ExperimentConfig, RunStreams, Scenario};
use crate::wpso::{exhaustive_phase_oracle, homogenized_cost, optimize_phase, random_design, run_wpso, Termination};

/// `|a − b| / max(|a|, |b|)`, zero when both vanish.
pub fn relative_error(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

/// Size caps for random instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InstanceLimits {
    pub antennas: usize,
    pub waveform_len: usize,
    /// Elements are drawn from `min_elements..=max_elements`.
    pub min_elements: usize,
    pub max_elements: usize,
    pub grids: usize,
    pub max_targets: usize,
}

impl InstanceLimits {
    pub fn small() -> Self {
        Self { antennas: 2, waveform_len: 4, min_elements: 0, max_elements: 6, grids: 2, max_targets: 1 }
    }
}

/// A random scene: geometry, hypothesis models with weights, and a design.
#[derive(Debug, Clone)]
pub struct RandomInstance {
    pub channel: Channel,
    pub window: SnapshotWindow,
    pub noise_var: f64,
    pub models: Vec<HypothesisModel>,
    pub probabilities: Vec<f64>,
    pub design: Design,
}

impl RandomInstance {
    pub fn generate<R: Rng + ?Sized>(rng: &mut R, lim: &InstanceLimits) -> Result<Self> {
        let m = rng.random_range(lim.min_elements..=lim.max_elements);
        let n = rng.random_range(1..=lim.antennas);
        let layout = PlanarLayout {
            ris_rows: usize::from(m > 0),
            ris_cols: m,
            antenna_rows: 1,
            antenna_cols: n,
            array_offset: [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(1.5..4.0)],
            eta: rng.random_range(0.5..=1.0),
            phase_levels: rng.random_range(2..=8),
            ..PlanarLayout::default()
        };
        let grids = rng.random_range(1..=lim.grids);
        let dirs = (0..grids)
            .map(|_| Direction::new(rng.random_range(0.1..1.3), rng.random_range(0.0..TAU)))
            .collect::<Result<Vec<_>>>()?;
        let channel = Channel::new(RadarGeometry::planar(&layout)?, dirs)?;
        let l = rng.random_range(1..=lim.waveform_len);
        let window = SnapshotWindow::new(l, l + rng.random_range(0..=2), 5)?;
        let mut models = Vec::new();
        for h in enumerate_hypotheses(grids, lim.max_targets) {
            let targets = h
                .grid_indices()
                .iter()
                .map(|&k| PlacedTarget {
                    direction: k,
                    shift: ShiftMatrix::new(window.delay_of_offset(rng.random_range(0..window.offset_count())), &window)
                        .expect("offset in window"),
                })
                .collect::<Vec<_>>();
            let responses = complex_gaussian_vec(rng, targets.len()).scale(0.1);
            models.push(HypothesisModel::new(targets, responses)?);
        }
        let w: Vec<f64> = (0..models.len()).map(|_| rng.random_range(0.05..1.0)).collect();
        let s: f64 = w.iter().sum();
        let power = rng.random_range(1.0..12.0);
        let design = random_design(rng, n, l, m, layout.phase_levels, power);
        Ok(Self {
            channel,
            window,
            noise_var: 10f64.powf(rng.random_range(-3.0..0.0)),
            models,
            probabilities: w.into_iter().map(|x| x / s).collect(),
            design,
        })
    }

    pub fn context(&self) -> Result<ObjectiveContext<'_>> {
        ObjectiveContext::new(&self.channel, self.window, self.noise_var, self.models.clone(), &self.probabilities)
    }
}

/// Builds each hypothesis mean as `T_j r + ζ_j` by extracting the diagonal
/// columns `m(M+1)` of the Kronecker expansion of `vec(X diag(r) Y)`, and
/// evaluates the weighted objective from it.
pub fn kronecker_phase_objective(inst: &RandomInstance, side: PhaseSide) -> Result<f64> {
    let ch = &inst.channel;
    let (m, n) = (ch.element_count(), ch.antenna_count());
    let d = &inst.design;
    let (free, fixed) = match side {
        PhaseSide::Transmit => (&d.tx_phases, &d.rx_phases),
        PhaseSide::Receive => (&d.rx_phases, &d.tx_phases),
    };
    let r = free.coefficients(ch.eta());
    let rows = n * inst.window.received_len;
    let means: Vec<CVec> = inst
        .models
        .iter()
        .map(|model| {
            let mut t = CMat::zeros(rows, m);
            let mut zeta = CVec::zeros(rows);
            for (tg, g) in model.targets.iter().zip(model.responses.iter()) {
                let k = tg.direction;
                let jd = tg.shift.dense();
                let a_k = CMat::from_fn(1, m, |_, j| ch.a[(k, j)]);
                let xi_k = CMat::from_fn(1, n, |_, j| ch.xi[(k, j)]);
                let g_other = ch.effective_gain(k, fixed)?;
                let other = CMat::from_fn(1, n, |_, j| g_other[j]);
                let full = match side {
                    PhaseSide::Transmit => {
                        // c (a∘r)^T H W J = (c a^T) diag(r) (H W J)
                        let c = other.transpose();
                        let right = &ch.h * &d.waveform * &jd;
                        zeta += vectorize(&(&c * &xi_k * &d.waveform * &jd)) * *g;
                        right.transpose().kronecker(&(&c * &a_k))
                    }
                    PhaseSide::Receive => {
                        // H^T diag(r) a (t W J)
                        let row = &other * &d.waveform * &jd;
                        zeta += vectorize(&(xi_k.transpose() * &row)) * *g;
                        (a_k.transpose() * &row).transpose().kronecker(&ch.h.transpose())
                    }
                };
                for mi in 0..m {
                    let mut dst = t.column_mut(mi);
                    dst += full.column(mi * (m + 1)) * *g;
                }
            }
            Ok(t * &r + zeta)
        })
        .collect::<Result<_>>()?;
    let mut acc = 0.0;
    for j in 0..means.len() {
        for jp in j + 1..means.len() {
            acc += inst.probabilities[j] * inst.probabilities[jp] * (&means[j] - &means[jp]).norm_squared();
        }
    }
    Ok(acc / inst.noise_var)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TriFormReport {
    pub instances: usize,
    pub waveform_form: f64,
    pub phase_form: f64,
    pub kronecker: f64,
}

impl TriFormReport {
    pub fn worst(&self) -> f64 {
        self.waveform_form.max(self.phase_form).max(self.kronecker)
    }
}

/// Direct distance vs waveform form vs both phase forms vs the Kronecker
/// construction.
pub fn tri_form_suite(instances: usize, seed: u64) -> Result<TriFormReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = TriFormReport { instances, ..Default::default() };
    for _ in 0..instances {
        let inst = RandomInstance::generate(&mut rng, &InstanceLimits::small())?;
        let ctx = inst.context()?;
        let d = &inst.design;
        let direct = total_objective(&ctx, d)?;
        let z = waveform_quadratic_form(&ctx, &d.tx_phases, &d.rx_phases)?;
        rep.waveform_form = rep.waveform_form.max(relative_error(re_quadratic(&z, &d.waveform_vec()), direct));
        for side in [PhaseSide::Transmit, PhaseSide::Receive] {
            let (free, fixed) = match side {
                PhaseSide::Transmit => (&d.tx_phases, &d.rx_phases),
                PhaseSide::Receive => (&d.rx_phases, &d.tx_phases),
            };
            let forms = phase_quadratic_form(&ctx, side, &d.waveform, fixed)?;
            let r = free.coefficients(inst.channel.eta());
            rep.phase_form = rep.phase_form.max(relative_error(forms.value(&r), direct));
            let (zh, u) = forms.hermitian();
            let herm = re_quadratic(&zh, &r) + 2.0 * r.dotc(&u).re + forms.z3.re;
            rep.phase_form = rep.phase_form.max(relative_error(herm, direct));
            rep.kronecker = rep.kronecker.max(relative_error(kronecker_phase_objective(&inst, side)?, direct));
        }
    }
    Ok(rep)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WaveformReport {
    pub instances: usize,
    pub samples: usize,
    /// Worst relative error against `P_M λ_max`.
    pub optimum_error: f64,
    /// Random waveforms exceeding the optimum by more than rounding.
    pub violations: usize,
}

/// `optimize_waveform` vs `P_M λ_max` from a full eigendecomposition, then
/// random feasible waveforms against the optimum.
pub fn waveform_suite(instances: usize, samples_per_instance: usize, seed: u64) -> Result<WaveformReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = WaveformReport { instances, samples: instances * samples_per_instance, ..Default::default() };
    for _ in 0..instances {
        let inst = RandomInstance::generate(&mut rng, &InstanceLimits { max_targets: 2, ..InstanceLimits::small() })?;
        let ctx = inst.context()?;
        let d = &inst.design;
        let z = waveform_quadratic_form(&ctx, &d.tx_phases, &d.rx_phases)?;
        let power = d.power();
        let (n, l) = d.waveform.shape();
        let w = crate::wpso::optimize_waveform(&z, power, n, l)?;
        let attained = re_quadratic(&z, &vectorize(&w));
        let lam = hermitian_eigenvalues(&hermitian_part(&z)).max();
        rep.optimum_error = rep.optimum_error.max(relative_error(attained, power * lam));
        for _ in 0..samples_per_instance {
            let v = complex_gaussian_vec(&mut rng, n * l);
            let v = v.unscale(v.norm()) * C64::from(power.sqrt());
            if re_quadratic(&z, &v) > attained * (1.0 + 1e-12) + 1e-300 {
                rep.violations += 1;
            }
        }
    }
    Ok(rep)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhaseReport {
    pub instances: usize,
    /// Instances where SDR beat or tied the best of the random grid vectors.
    pub beat_random: usize,
    /// Instances where SDR exceeded the exhaustive optimum (must be 0).
    pub dominance_violations: usize,
    /// Instances where SDR matched the exhaustive optimum.
    pub exhaustive_hits: usize,
    pub fallbacks: usize,
}

/// Phase-form instances with exactly `elements` elements from random scenes.
pub fn random_phase_forms<R: Rng + ?Sized>(rng: &mut R, elements: usize, levels: usize) -> Result<(PhaseForms, f64)> {
    let lim = InstanceLimits { min_elements: elements, max_elements: elements, ..InstanceLimits::small() };
    let mut inst = RandomInstance::generate(rng, &lim)?;
    inst.channel.geometry.phase_levels = levels;
    let ctx = inst.context()?;
    let side = if rng.random_bool(0.5) { PhaseSide::Transmit } else { PhaseSide::Receive };
    let fixed = PhaseShiftVector::random(rng, elements, levels);
    Ok((phase_quadratic_form(&ctx, side, &inst.design.waveform, &fixed)?, inst.channel.eta()))
}

pub fn phase_suite(instances: usize, elements: usize, levels: usize, random_baseline: usize, seed: u64) -> Result<PhaseReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = PhaseReport { instances, ..Default::default() };
    for _ in 0..instances {
        let (forms, eta) = random_phase_forms(&mut rng, elements, levels)?;
        let out = optimize_phase(&forms, eta, levels, 100, &SdpOptions::default(), &mut rng)?;
        rep.fallbacks += out.used_fallback as usize;
        let best_random = (0..random_baseline)
            .map(|_| forms.value(&PhaseShiftVector::random(&mut rng, elements, levels).coefficients(eta)))
            .fold(f64::NEG_INFINITY, f64::max);
        let tol = 1e-12 * out.value.abs().max(best_random.abs());
        if out.value >= best_random - tol {
            rep.beat_random += 1;
        }
        let (_, ex) = exhaustive_phase_oracle(&forms, eta, levels)?;
        let tol = 1e-12 * ex.abs();
        if out.value > ex + tol {
            rep.dominance_violations += 1;
        }
        if out.value >= ex - tol {
            rep.exhaustive_hits += 1;
        }
    }
    Ok(rep)
}

/// Block-coordinate ascent for `max Re tr(C V V^H)` with row norms
/// `‖v_i‖² = t_i`; each row update is the exact maximizer given the others.
/// Uses full rank so the factorization carries no rank restriction.
pub fn mixing_oracle<R: Rng + ?Sized>(c: &CMat, t: &[f64], starts: usize, rng: &mut R) -> f64 {
    let d = c.nrows();
    let mut best = f64::NEG_INFINITY;
    for _ in 0..starts {
        let mut v: Vec<CVec> = (0..d)
            .map(|i| {
                let g = complex_gaussian_vec(rng, d);
                g.unscale(g.norm()) * C64::from(t[i].sqrt())
            })
            .collect();
        let value = |v: &[CVec]| -> f64 {
            let mut acc = 0.0;
            for i in 0..d {
                for j in 0..d {
                    acc += (c[(i, j)] * v[i].dotc(&v[j])).re;
                }
            }
            acc
        };
        let mut prev = value(&v);
        for _ in 0..50_000 {
            for i in 0..d {
                let mut g = CVec::zeros(d);
                for j in 0..d {
                    if j != i {
                        g += &v[j] * c[(i, j)];
                    }
                }
                let n = g.norm();
                if n > 0.0 {
                    v[i] = g.unscale(n) * C64::from(t[i].sqrt());
                }
            }
            let cur = value(&v);
            if (cur - prev).abs() <= 1e-15 * cur.abs().max(1.0) {
                break;
            }
            prev = cur;
        }
        best = best.max(value(&v));
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SdpReport {
    pub instances: usize,
    pub max_primal_residual: f64,
    pub max_dual_residual: f64,
    /// Worst `gap / (1 + |primal|)`.
    pub max_relative_gap: f64,
    pub max_oracle_error: f64,
    /// Worst `−λ_min(X) / ‖X‖` and `−λ_min(Z) / ‖Z‖`.
    pub max_cone_violation: f64,
    pub failures: usize,
}

/// Random Hermitian costs, alternating with homogenized phase costs.
pub fn sdp_suite(instances: usize, max_dim: usize, seed: u64) -> Result<SdpReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = SdpReport { instances, ..Default::default() };
    for i in 0..instances {
        let (c, t) = if i % 2 == 0 {
            let d = rng.random_range(1..=max_dim);
            let g = CMat::from_column_slice(d, d, complex_gaussian_vec(&mut rng, d * d).as_slice());
            let t: Vec<f64> = (0..d).map(|_| rng.random_range(0.5..2.0)).collect();
            (hermitian_part(&g), t)
        } else {
            let m = rng.random_range(1..max_dim.min(7));
            let (forms, eta) = random_phase_forms(&mut rng, m, 4)?;
            let mut t = vec![eta * eta; m];
            t.push(1.0);
            (homogenized_cost(&forms), t)
        };
        let d = c.nrows();
        let sol = match solve_diag_sdp(&DiagSdpProblem::diagonal(&c, t.clone())?, &SdpOptions::default()) {
            Ok(s) => s,
            Err(crate::Error::SdpConvergence { .. }) => {
                rep.failures += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let t_norm = t.iter().map(|x| x * x).sum::<f64>().sqrt();
        let rp = (0..d).map(|i| (sol.x[(i, i)].re - t[i]).powi(2)).sum::<f64>().sqrt() / (1.0 + t_norm);
        let ydiag = CMat::from_diagonal(&sol.y.map(C64::from));
        let rd = (ydiag - &c - &sol.z).norm() / (1.0 + c.norm());
        let primal = re_trace_product(&c, &sol.x);
        let dual: f64 = t.iter().zip(sol.y.iter()).map(|(a, b)| a * b).sum();
        rep.max_primal_residual = rep.max_primal_residual.max(rp);
        rep.max_dual_residual = rep.max_dual_residual.max(rd);
        rep.max_relative_gap = rep.max_relative_gap.max((dual - primal) / (1.0 + primal.abs()));
        let cone = |m: &CMat| (-hermitian_eigenvalues(m).min() / m.norm().max(1e-300)).max(0.0);
        rep.max_cone_violation = rep.max_cone_violation.max(cone(&sol.x)).max(cone(&sol.z));
        let oracle = mixing_oracle(&c, &t, 10, &mut rng);
        rep.max_oracle_error = rep.max_oracle_error.max(relative_error(primal, oracle));
    }
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct WpsoReport {
    pub instances: usize,
    pub non_monotone: usize,
    pub bound_violations: usize,
    /// Instances that exceeded `min(cap, ⌈bound/ε⌉)` iterations.
    pub iteration_violations: usize,
    pub infeasible_designs: usize,
    pub max_iterations: usize,
    pub converged: usize,
}

/// One random-design cycle on the configured scene, then a full WPSO run on
/// the resulting posterior.
pub fn wpso_suite(config: &ExperimentConfig, instances: usize) -> Result<WpsoReport> {
    let scn = Scenario::new(config)?;
    let ch = &scn.ris_channel;
    let mut rep = WpsoReport { instances, ..Default::default() };
    let bound = objective_upper_bound(scn.hypotheses.len(), config.power, scn.noise_var)?.with_noise;
    for run in 0..instances {
        let mut s = RunStreams::new(config.seed, scn.truth_index, run);
        let truth = scn.scene(scn.truth_index, &mut s.scene);
        let d1 = random_design(&mut s.design, ch.antenna_count(), config.waveform_len, ch.element_count(), ch.phase_levels(), config.power);
        let rx = synthesize_received(ch, &truth, &d1, &scn.window, scn.noise_var, 1, &mut s.noise)?;
        let history = vec![CycleRecord::new(ch, d1, rx)?];
        let mut state = PosteriorState::new(config.grid_count, config.max_targets);
        state.update(&history, &scn.window, scn.noise_var)?;
        let ctx = ObjectiveContext::from_posterior(ch, scn.window, scn.noise_var, &state)?;
        let opts = scn.wpso_options(&state);
        let init = random_design(&mut s.design, ch.antenna_count(), config.waveform_len, ch.element_count(), ch.phase_levels(), config.power);
        let (d, trace) = run_wpso(init, &ctx, &opts, &mut s.design)?;
        if trace.objectives.windows(2).any(|w| w[1] < w[0]) {
            rep.non_monotone += 1;
        }
        if trace.objectives.iter().any(|&v| v > bound) {
            rep.bound_violations += 1;
        }
        let limit = opts.max_iterations.min((bound / opts.epsilon).ceil().min(usize::MAX as f64) as usize);
        if trace.iterations > limit {
            rep.iteration_violations += 1;
        }
        let on_grid = |p: &PhaseShiftVector| p.levels().is_some_and(|l| l.iter().all(|&v| (1..=ch.phase_levels()).contains(&v)));
        if (d.power() - config.power).abs() > 1e-9 * config.power || !on_grid(&d.tx_phases) || !on_grid(&d.rx_phases) {
            rep.infeasible_designs += 1;
        }
        rep.max_iterations = rep.max_iterations.max(trace.iterations);
        rep.converged += (trace.termination == Termination::Converged) as usize;
    }
    Ok(rep)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AlignmentReport {
    pub cases: usize,
    /// Worst `max_sweep / B`; must not exceed 1.
    pub max_sweep_ratio: f64,
    /// Worst `gain(s*) / B`.
    pub min_closed_form_ratio: f64,
    /// Worst `max_sweep / (B cos⁴(½°))`; at least 1 when the sweep reaches
    /// the optimum within its resolution.
    pub min_resolution_ratio: f64,
    /// Cases whose sweep argmax lies more than one step from `s*`.
    pub argmax_off: usize,
}

fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Exhaustive continuous-phase sweeps at `steps` per turn for one antenna
/// and one or two elements.
pub fn alignment_suite(steps: usize, seed: u64) -> Result<AlignmentReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = AlignmentReport { max_sweep_ratio: 0.0, min_closed_form_ratio: f64::INFINITY, min_resolution_ratio: f64::INFINITY, ..Default::default() };
    let step = TAU / steps as f64;
    let shapes = [(1, 1), (1, 2), (2, 1)];
    for (case, &(rows, cols)) in shapes.iter().cycle().take(6).enumerate() {
        let layout = PlanarLayout {
            ris_rows: rows,
            ris_cols: cols,
            antenna_rows: 1,
            antenna_cols: 1,
            array_offset: [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(1.0..4.0)],
            ..PlanarLayout::default()
        };
        let geom = RadarGeometry::planar(&layout)?;
        let dir = Direction::new(rng.random_range(0.1..1.3), rng.random_range(0.0..TAU))?;
        let (s_star, b) = optimal_phases_and_max_gain(&geom, dir)?;
        let ch = Channel::new(geom, vec![dir])?;
        let m = ch.element_count();
        let gain = |s: Vec<f64>| -> Result<f64> {
            let p = PhaseShiftVector::continuous(s);
            power_gain(&ch, 0, &p, &p)
        };
        rep.min_closed_form_ratio = rep.min_closed_form_ratio.min(gain(s_star.shifts().to_vec())? / b);
        let total = steps.pow(m as u32);
        let mut best = (f64::NEG_INFINITY, vec![0.0; m]);
        for idx in 0..total {
            let mut rest = idx;
            let s: Vec<f64> = (0..m)
                .map(|_| {
                    let v = (rest % steps) as f64 * step;
                    rest /= steps;
                    v
                })
                .collect();
            let g = gain(s.clone())?;
            if g > best.0 {
                best = (g, s);
            }
        }
        rep.cases = case + 1;
        rep.max_sweep_ratio = rep.max_sweep_ratio.max(best.0 / b);
        rep.min_resolution_ratio = rep.min_resolution_ratio.min(best.0 / (b * (step / 2.0).cos().powi(4)));
        if best.1.iter().zip(s_star.shifts()).any(|(a, s)| circular_distance(*a, *s) > step * (1.0 + 1e-9)) {
            rep.argmax_off += 1;
        }
    }
    Ok(rep)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlacementReport {
    pub comparisons: usize,
    pub violations: usize,
}

/// `B(l', h) ≥ B(n l^e + l', h)` for `l' ∈ [−l^e/2, l^e/2]` on 11 points,
/// `n ∈ {±1, ±2, ±3}`, element counts 1..=8 and several heights, compared
/// without tolerance.
pub fn placement_suite() -> Result<PlacementReport> {
    let mut rep = PlacementReport::default();
    for m in 1..=8 {
        let s = PlacementScenario::physical(m, 1.0, 1.0, PI / 6.0);
        let le = s.element_spacing;
        for &h in &[0.5, 1.0, 2.0, 3.0, 5.0] {
            for i in 0..=10 {
                let lp = le * (i as f64 - 5.0) / 10.0;
                let base = s.power_gain(lp, h)?;
                for n in [-3i32, -2, -1, 1, 2, 3] {
                    rep.comparisons += 1;
                    if base < s.power_gain(n as f64 * le + lp, h)? {
                        rep.violations += 1;
                    }
                }
            }
        }
    }
    Ok(rep)
}
