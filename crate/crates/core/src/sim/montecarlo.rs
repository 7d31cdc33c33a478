//! Monte Carlo estimation of detection and mis-detection probabilities.

use rayon::prelude::*;

use crate::error::Result;
use crate::hypothesis::initial_prior;

use super::config::{ExperimentConfig, Scheme};
use super::protocol::{run_protocol, CycleOutcome, Scenario};

/// One output row: a scheme's metrics after `cycle` cycles.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub axis_value: Option<f64>,
    pub scheme: Scheme,
    pub cycle: usize,
    pub p_detect: f64,
    /// `None` when mis-detection runs are disabled.
    pub p_misdetect: Option<f64>,
    /// Standard error of `p_detect`.
    pub stderr: f64,
    pub stderr_misdetect: Option<f64>,
    /// Mean design time per run at this cycle, when recorded.
    pub wallclock_ms: Option<f64>,
}

fn run_many(scn: &Scenario, scheme: Scheme, scene: usize, runs: usize) -> Result<Vec<Vec<CycleOutcome>>> {
    (0..runs).into_par_iter().map(|r| run_protocol(scn, scheme, scene, r)).collect()
}

/// Fraction of runs deciding `target` after each cycle.
fn hit_rates(runs: &[Vec<CycleOutcome>], cycles: usize, target: usize) -> Vec<f64> {
    (0..cycles)
        .map(|c| runs.iter().filter(|r| r[c].decision == target).count() as f64 / runs.len() as f64)
        .collect()
}

/// Metrics for every scheme of one configuration.
pub fn evaluate(config: &ExperimentConfig, axis_value: Option<f64>) -> Result<Vec<MetricsRow>> {
    let scn = Scenario::new(config)?;
    let cycles = config.cycles;
    let j_star = scn.truth_index;
    let prior = initial_prior(&scn.hypotheses);
    let mut rows = Vec::new();
    for &scheme in &config.schemes {
        let runs = run_many(&scn, scheme, j_star, config.runs)?;
        let p_detect = hit_rates(&runs, cycles, j_star);

        let mis = if config.misdetect_runs > 0 {
            let mut p = vec![0.0; cycles];
            let mut var = vec![0.0; cycles];
            for j in (0..scn.hypotheses.len()).filter(|&j| j != j_star) {
                let alt = run_many(&scn, scheme, j, config.misdetect_runs)?;
                for (c, q) in hit_rates(&alt, cycles, j_star).into_iter().enumerate() {
                    p[c] += prior[j] * q;
                    var[c] += prior[j] * prior[j] * q * (1.0 - q) / config.misdetect_runs as f64;
                }
            }
            Some((p, var))
        } else {
            None
        };

        for c in 0..cycles {
            let pd = p_detect[c];
            let wallclock_ms = config.record_wallclock.then(|| {
                runs.iter().map(|r| r[c].design_time.as_secs_f64() * 1e3).sum::<f64>() / runs.len() as f64
            });
            rows.push(MetricsRow {
                axis_value,
                scheme,
                cycle: c + 1,
                p_detect: pd,
                p_misdetect: mis.as_ref().map(|(p, _)| p[c]),
                stderr: (pd * (1.0 - pd) / config.runs as f64).sqrt(),
                stderr_misdetect: mis.as_ref().map(|(_, v)| v[c].sqrt()),
                wallclock_ms,
            });
        }
    }
    Ok(rows)
}

/// Evaluates the configuration at every sweep value, sharing random streams
/// across values.
pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<MetricsRow>> {
    let Some(axis) = config.sweep_axis else {
        return evaluate(config, None);
    };
    let mut rows = Vec::new();
    for &v in &config.sweep_values {
        rows.extend(evaluate(&config.with_axis(axis, v)?, Some(v))?);
    }
    Ok(rows)
}
