//! One detection run: design, measure, update the posterior, decide, repeat.

use std::f64::consts::TAU;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::geometry::{Channel, PhaseShiftVector};
use crate::hypothesis::{threshold_and_decide, CycleRecord, Hypothesis, PosteriorState};
use crate::linalg::{CMat, C64};
use crate::objective::ObjectiveContext;
use crate::sdp::SdpOptions;
use crate::signal::{synthesize_received, Design, SceneTruth, SnapshotWindow, Target};
use crate::wpso::{default_epsilon, random_design, run_wpso, WpsoOptions};

use super::config::{ExperimentConfig, Scheme};

/// Fixed, per-configuration state shared by every run.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ExperimentConfig,
    pub ris_channel: Channel,
    /// Same array and grid with the surface removed.
    pub mimo_channel: Channel,
    pub window: SnapshotWindow,
    pub noise_var: f64,
    pub hypotheses: Vec<Hypothesis>,
    /// Index of the configured scene among `hypotheses`.
    pub truth_index: usize,
}

impl Scenario {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let ris_channel = config.channel()?;
        let mimo_channel = Channel::new(ris_channel.geometry.without_ris(), ris_channel.directions.clone())?;
        let hypotheses = PosteriorState::new(config.grid_count, config.max_targets).hypotheses;
        let truth = Hypothesis::new(config.target_grids.clone());
        let truth_index = hypotheses.iter().position(|h| *h == truth).expect("validated scene is enumerated");
        Ok(Self {
            config: config.clone(),
            ris_channel,
            mimo_channel,
            window: config.window()?,
            noise_var: config.noise_var(),
            hypotheses,
            truth_index,
        })
    }

    pub fn channel(&self, scheme: Scheme) -> &Channel {
        match scheme {
            Scheme::Proposed | Scheme::Random => &self.ris_channel,
            Scheme::Mimo => &self.mimo_channel,
        }
    }

    /// Delay offsets of the scene for hypothesis `j`: the configured offsets
    /// for the configured scene, otherwise evenly spread over the window.
    pub fn scene_offsets(&self, j: usize) -> Vec<usize> {
        if j == self.truth_index {
            let mut pairs: Vec<(usize, usize)> =
                self.config.target_grids.iter().copied().zip(self.config.target_offsets.iter().copied()).collect();
            pairs.sort();
            return pairs.into_iter().map(|(_, o)| o).collect();
        }
        let k = self.hypotheses[j].target_count();
        let span = self.window.offset_count() - 1;
        (0..k).map(|i| if k == 1 { 0 } else { i * span / (k - 1) }).collect()
    }

    /// Scene realizing hypothesis `j` with unit-modulus responses scaled to
    /// `|γ|` and phases drawn from `rng`.
    pub fn scene<R: Rng + ?Sized>(&self, j: usize, rng: &mut R) -> SceneTruth {
        let gamma = self.config.response_abs();
        let targets = self.hypotheses[j]
            .grid_indices()
            .iter()
            .zip(self.scene_offsets(j))
            .map(|(&g, o)| Target {
                direction: g,
                delay: self.window.delay_of_offset(o),
                response: C64::from_polar(gamma, rng.random_range(0.0..TAU)),
            })
            .collect();
        SceneTruth { targets }
    }

    pub fn wpso_options(&self, state: &PosteriorState) -> WpsoOptions {
        let c = &self.config;
        let epsilon = c
            .epsilon
            .unwrap_or_else(|| default_epsilon(c.power, self.noise_var, state.max_response_energy()));
        WpsoOptions {
            power: c.power,
            epsilon,
            max_iterations: c.max_iterations,
            randomizations: c.randomizations,
            sdp: SdpOptions { accuracy: c.sdp_accuracy, ..SdpOptions::default() },
        }
    }
}

/// Independent random streams of one run. Streams are keyed by scene and run
/// only, so every scheme sees the same scene, noise and initial draws.
#[derive(Debug, Clone)]
pub struct RunStreams {
    pub scene: ChaCha8Rng,
    pub noise: ChaCha8Rng,
    pub design: ChaCha8Rng,
}

impl RunStreams {
    pub fn new(seed: u64, scene_index: usize, run: usize) -> Self {
        let make = |purpose: u64| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            r.set_stream(((scene_index as u64) << 40) | ((run as u64) << 4) | purpose);
            r
        };
        Self { scene: make(0), noise: make(1), design: make(2) }
    }
}

/// Constant-modulus waveform `√(P_M/NL) e^{jφ}` with uniform phases and
/// uniform grid phases on both sides.
pub fn random_scheme_design<R: Rng + ?Sized>(rng: &mut R, channel: &Channel, waveform_len: usize, power: f64) -> Design {
    let n = channel.antenna_count();
    let amp = (power / (n * waveform_len) as f64).sqrt();
    let waveform = CMat::from_fn(n, waveform_len, |_, _| C64::from_polar(amp, rng.random_range(0.0..TAU)));
    let m = channel.element_count();
    let levels = channel.phase_levels();
    Design {
        waveform,
        tx_phases: PhaseShiftVector::random(rng, m, levels),
        rx_phases: PhaseShiftVector::random(rng, m, levels),
    }
}

/// Design for the next cycle under `scheme` given the current posterior.
/// Returns the design and the WPSO iteration count (0 when not optimized).
pub fn scheme_design<R: Rng + ?Sized>(
    scn: &Scenario,
    scheme: Scheme,
    state: &PosteriorState,
    rng: &mut R,
) -> Result<(Design, usize)> {
    let ch = scn.channel(scheme);
    let c = &scn.config;
    match scheme {
        Scheme::Random => Ok((random_scheme_design(rng, ch, c.waveform_len, c.power), 0)),
        Scheme::Proposed | Scheme::Mimo => {
            let init = random_design(rng, ch.antenna_count(), c.waveform_len, ch.element_count(), ch.phase_levels(), c.power);
            let ctx = ObjectiveContext::from_posterior(ch, scn.window, scn.noise_var, state)?;
            let (d, trace) = run_wpso(init, &ctx, &scn.wpso_options(state), rng)?;
            Ok((d, trace.iterations))
        }
    }
}

/// Per-cycle outcome of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleOutcome {
    /// Decided hypothesis index.
    pub decision: usize,
    pub fallback: bool,
    /// Time spent producing this cycle's design.
    pub design_time: Duration,
    pub wpso_iterations: usize,
}

/// Runs `config.cycles` cycles against the scene of hypothesis `scene_index`.
pub fn run_protocol(scn: &Scenario, scheme: Scheme, scene_index: usize, run: usize) -> Result<Vec<CycleOutcome>> {
    let c = &scn.config;
    let mut streams = RunStreams::new(c.seed, scene_index, run);
    let truth = scn.scene(scene_index, &mut streams.scene);
    let ch = scn.channel(scheme);
    let mut state = PosteriorState::new(c.grid_count, c.max_targets);
    let mut history = Vec::with_capacity(c.cycles);
    let mut out = Vec::with_capacity(c.cycles);
    for cycle in 1..=c.cycles {
        let t0 = Instant::now();
        let (design, iters) = if cycle == 1 {
            let d = match scheme {
                Scheme::Random => random_scheme_design(&mut streams.design, ch, c.waveform_len, c.power),
                _ => random_design(&mut streams.design, ch.antenna_count(), c.waveform_len, ch.element_count(), ch.phase_levels(), c.power),
            };
            (d, 0)
        } else {
            scheme_design(scn, scheme, &state, &mut streams.design)?
        };
        let design_time = t0.elapsed();
        let rx = synthesize_received(ch, &truth, &design, &scn.window, scn.noise_var, cycle, &mut streams.noise)?;
        history.push(CycleRecord::new(ch, design, rx)?);
        state.update(&history, &scn.window, scn.noise_var)?;
        let d = threshold_and_decide(&state, c.threshold(), c.range_per_snapshot);
        out.push(CycleOutcome { decision: d.hypothesis, fallback: d.fallback, design_time, wpso_iterations: iters });
    }
    Ok(out)
}
