use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use risradar::analysis::{height_profile, optimal_phases_and_max_gain, quantized_gain, PlacementScenario};
use risradar::geometry::RadarGeometry;
use risradar::hypothesis::{CycleRecord, PosteriorState};
use risradar::objective::ObjectiveContext;
use risradar::signal::synthesize_received;
use risradar::sim::config::near_square;
use risradar::sim::output::{write_manifest, write_metrics, write_table};
use risradar::sim::{run_sweep, ExperimentConfig, Profile, RunStreams, Scenario, SweepAxis};
use risradar::verify;
use risradar::wpso::{random_design, run_wpso};
use risradar::Result;

#[derive(Parser)]
#[command(name = "risradar", version, about = "Surface-aided MIMO radar detection simulator")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML file whose keys override the profile.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base parameter set.
    #[arg(long, global = true, value_enum, default_value = "desk")]
    profile: Profile,
    /// Master seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Detection and mis-detection probability versus cycle for each scheme.
    Simulate {
        /// Fill the wall-clock column (output is then not reproducible).
        #[arg(long)]
        timing: bool,
    },
    /// Metrics versus one parameter.
    Sweep {
        #[arg(long, value_enum)]
        axis: Option<AxisArg>,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
        /// Fill the wall-clock column.
        #[arg(long)]
        timing: bool,
    },
    /// Objective trace of one WPSO run after a random first cycle.
    Optimize {
        /// Run index selecting the random streams.
        #[arg(long, default_value_t = 0)]
        run: usize,
        /// Fill the per-step time columns.
        #[arg(long)]
        timing: bool,
    },
    /// Closed-form gain and placement profiles.
    Analyze,
    /// Oracle suites; exits non-zero on any failure.
    Verify {
        /// Smaller instance counts.
        #[arg(long)]
        quick: bool,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum AxisArg {
    Power,
    Antennas,
    Elements,
    PhaseLevels,
    Height,
    Lateral,
}

impl From<AxisArg> for SweepAxis {
    fn from(a: AxisArg) -> Self {
        match a {
            AxisArg::Power => SweepAxis::Power,
            AxisArg::Antennas => SweepAxis::Antennas,
            AxisArg::Elements => SweepAxis::Elements,
            AxisArg::PhaseLevels => SweepAxis::PhaseLevels,
            AxisArg::Height => SweepAxis::Height,
            AxisArg::Lateral => SweepAxis::Lateral,
        }
    }
}

fn load(common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::load(p, common.profile)?,
        None => ExperimentConfig::profile(common.profile),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn fmt(v: f64) -> String {
    v.to_string()
}

fn simulate(cfg: &ExperimentConfig, out: &Path, command: &str, file: &str) -> Result<()> {
    let rows = run_sweep(cfg)?;
    write_metrics(create(out, file)?, &rows)?;
    write_manifest(out, command, cfg, &[file])?;
    println!("wrote {} rows to {}", rows.len(), out.join(file).display());
    Ok(())
}

fn optimize(cfg: &ExperimentConfig, out: &Path, run: usize, timing: bool) -> Result<()> {
    let scn = Scenario::new(cfg)?;
    let ch = &scn.ris_channel;
    let mut s = RunStreams::new(cfg.seed, scn.truth_index, run);
    let truth = scn.scene(scn.truth_index, &mut s.scene);
    let (n, m, levels) = (ch.antenna_count(), ch.element_count(), ch.phase_levels());
    let d1 = random_design(&mut s.design, n, cfg.waveform_len, m, levels, cfg.power);
    let rx = synthesize_received(ch, &truth, &d1, &scn.window, scn.noise_var, 1, &mut s.noise)?;
    let mut state = PosteriorState::new(cfg.grid_count, cfg.max_targets);
    state.update(&[CycleRecord::new(ch, d1, rx)?], &scn.window, scn.noise_var)?;
    let ctx = ObjectiveContext::from_posterior(ch, scn.window, scn.noise_var, &state)?;
    let init = random_design(&mut s.design, n, cfg.waveform_len, m, levels, cfg.power);
    let (_, trace) = run_wpso(init, &ctx, &scn.wpso_options(&state), &mut s.design)?;
    let ms = |d: std::time::Duration| if timing { fmt(d.as_secs_f64() * 1e3) } else { String::new() };
    let rows: Vec<Vec<String>> = trace
        .objectives
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let t = i.checked_sub(1).map(|k| trace.timings[k]);
            vec![
                i.to_string(),
                fmt(v),
                t.map(|t| ms(t.waveform)).unwrap_or_default(),
                t.map(|t| ms(t.transmit)).unwrap_or_default(),
                t.map(|t| ms(t.receive)).unwrap_or_default(),
            ]
        })
        .collect();
    let file = "wpso_trace.csv";
    write_table(create(out, file)?, &["iteration", "objective", "waveform_ms", "transmit_ms", "receive_ms"], &rows)?;
    write_manifest(out, "optimize", cfg, &[file])?;
    println!(
        "{} iterations ({:?}), objective {} -> {}, {} SDP fallbacks",
        trace.iterations,
        trace.termination,
        trace.objectives[0],
        trace.objectives.last().expect("non-empty trace"),
        trace.sdp_fallbacks
    );
    Ok(())
}

fn analyze(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let target = cfg.grid_directions()[0];
    let mut rows = Vec::new();
    for m in [0usize, 1, 2, 4, 8, 16, 32, 64] {
        let (r, c) = near_square(m);
        let geom = RadarGeometry::planar(&risradar::geometry::PlanarLayout {
            ris_rows: r,
            ris_cols: c,
            antenna_rows: 1,
            antenna_cols: 1,
            ..cfg.layout()
        })?;
        let (_, b) = optimal_phases_and_max_gain(&geom, target)?;
        let mut row = vec![m.to_string(), fmt(b)];
        for levels in [2, 4, 8] {
            row.push(fmt(quantized_gain(&geom, target, levels)?));
        }
        rows.push(row);
    }
    write_table(create(out, "gain_vs_elements.csv")?, &["elements", "max_gain", "quantized_2", "quantized_4", "quantized_8"], &rows)?;

    let s = PlacementScenario::physical(cfg.ris_cols.max(1), cfg.wavelength, cfg.eta, cfg.grid_theta);
    let heights: Vec<f64> = (1..=100).map(|i| i as f64 * 0.1 * cfg.wavelength).collect();
    let rows: Vec<Vec<String>> = height_profile(&s, &heights)?
        .iter()
        .map(|p| vec![fmt(p.parameter / cfg.wavelength), fmt(p.gain), fmt(p.achieved)])
        .collect();
    write_table(create(out, "placement_height.csv")?, &["height_wavelengths", "gain", "achieved"], &rows)?;

    let h = cfg.array_offset[2] * cfg.wavelength;
    let rows = (-60..=60)
        .map(|i| {
            let lx = i as f64 * s.element_spacing / 20.0;
            Ok(vec![fmt(lx / s.element_spacing), fmt(s.power_gain(lx, h)?)])
        })
        .collect::<Result<Vec<_>>>()?;
    write_table(create(out, "placement_lateral.csv")?, &["offset_spacings", "gain"], &rows)?;
    write_manifest(out, "analyze", cfg, &["gain_vs_elements.csv", "placement_height.csv", "placement_lateral.csv"])?;
    println!("wrote analysis profiles to {}", out.display());
    Ok(())
}

fn verify_all(quick: bool) -> Result<bool> {
    let k = if quick { 10 } else { 1 };
    let mut ok = true;
    let mut line = |name: &str, pass: bool, detail: String| {
        ok &= pass;
        println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    };
    let t = verify::tri_form_suite(100 / k, 11)?;
    line("tri-form equivalence", t.worst() <= 1e-9, format!("{t:?}"));
    let w = verify::waveform_suite(10 / k.min(10), 10_000 / k, 12)?;
    line("waveform relaxation", w.optimum_error <= 1e-8 && w.violations == 0, format!("{w:?}"));
    let p = verify::phase_suite(200 / k, 6, 4, 100, 13)?;
    line(
        "phase SDR",
        p.beat_random * 100 >= 95 * p.instances && p.dominance_violations == 0,
        format!("{p:?}"),
    );
    let s = verify::sdp_suite(50 / k, 16, 14)?;
    line(
        "SDP soundness",
        s.failures == 0 && s.max_primal_residual <= 1e-8 && s.max_dual_residual <= 1e-8 && s.max_relative_gap <= 1e-7 && s.max_oracle_error <= 1e-5,
        format!("{s:?}"),
    );
    let a = verify::alignment_suite(if quick { 120 } else { 360 }, 15)?;
    line(
        "phase alignment optimum",
        a.max_sweep_ratio <= 1.0 + 1e-12 && a.min_closed_form_ratio >= 1.0 - 1e-12 && a.min_resolution_ratio >= 1.0 - 1e-12 && a.argmax_off == 0,
        format!("{a:?}"),
    );
    let pl = verify::placement_suite()?;
    line("placement periodicity", pl.violations == 0, format!("{pl:?}"));
    let cfg = ExperimentConfig::desk();
    let wp = verify::wpso_suite(&cfg, 20 / k)?;
    line(
        "WPSO convergence",
        wp.non_monotone == 0 && wp.bound_violations == 0 && wp.iteration_violations == 0 && wp.infeasible_designs == 0,
        format!("{wp:?}"),
    );
    Ok(ok)
}

fn run(cli: Cli) -> Result<bool> {
    let c = &cli.common;
    match cli.command {
        Command::Verify { quick } => return verify_all(quick),
        Command::Analyze => {
            let cfg = load(c)?;
            std::fs::create_dir_all(&c.out)?;
            analyze(&cfg, &c.out)?;
        }
        Command::Simulate { timing } => {
            let mut cfg = load(c)?;
            cfg.record_wallclock |= timing;
            cfg.sweep_axis = None;
            cfg.sweep_values.clear();
            std::fs::create_dir_all(&c.out)?;
            simulate(&cfg, &c.out, "simulate", "results.csv")?;
        }
        Command::Sweep { axis, values, timing } => {
            let mut cfg = load(c)?;
            cfg.record_wallclock |= timing;
            if let Some(a) = axis {
                cfg.sweep_axis = Some(a.into());
            }
            if !values.is_empty() {
                cfg.sweep_values = values;
            }
            if cfg.sweep_axis.is_none() || cfg.sweep_values.is_empty() {
                return Err(risradar::Error::Config("sweep needs an axis and values (flags or config)".into()));
            }
            cfg.validate()?;
            std::fs::create_dir_all(&c.out)?;
            simulate(&cfg, &c.out, "sweep", "sweep.csv")?;
        }
        Command::Optimize { run, timing } => {
            let cfg = load(c)?;
            std::fs::create_dir_all(&c.out)?;
            optimize(&cfg, &c.out, run, timing)?;
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
