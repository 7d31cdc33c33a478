//! CSV and manifest writers. Values use the shortest round-trip float form so
//! identical results give identical bytes.

use std::io::Write;
use std::path::Path;

use crate::error::Result;

use super::config::ExperimentConfig;
use super::montecarlo::MetricsRow;

pub const METRICS_HEADER: [&str; 8] =
    ["axis_value", "scheme", "cycle", "p_detect", "p_misdetect", "stderr", "stderr_misdetect", "wallclock_ms"];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_metrics<W: Write>(w: W, rows: &[MetricsRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(METRICS_HEADER)?;
    for r in rows {
        out.write_record([
            opt(r.axis_value),
            r.scheme.name().to_string(),
            r.cycle.to_string(),
            r.p_detect.to_string(),
            opt(r.p_misdetect),
            r.stderr.to_string(),
            opt(r.stderr_misdetect),
            opt(r.wallclock_ms),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Writes any header plus rows of already-formatted fields.
pub fn write_table<W: Write>(w: W, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header)?;
    for r in rows {
        out.write_record(r)?;
    }
    out.flush()?;
    Ok(())
}

/// Tool version, command and the fully resolved configuration.
pub fn manifest(command: &str, config: &ExperimentConfig, outputs: &[&str]) -> String {
    let mut s = format!("risradar {}\ncommand = {command:?}\noutputs = {outputs:?}\n\n", env!("CARGO_PKG_VERSION"));
    s.push_str(&config.to_toml());
    s
}

pub fn write_manifest(dir: &Path, command: &str, config: &ExperimentConfig, outputs: &[&str]) -> Result<()> {
    std::fs::write(dir.join("manifest.txt"), manifest(command, config, outputs))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::config::Scheme;

    #[test]
    fn metrics_csv_layout() {
        let rows = vec![MetricsRow {
            axis_value: None,
            scheme: Scheme::Mimo,
            cycle: 3,
            p_detect: 0.25,
            p_misdetect: Some(0.1),
            stderr: 0.5,
            stderr_misdetect: None,
            wallclock_ms: None,
        }];
        let mut buf = Vec::new();
        write_metrics(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "axis_value,scheme,cycle,p_detect,p_misdetect,stderr,stderr_misdetect,wallclock_ms\n,mimo,3,0.25,0.1,0.5,,\n"
        );
    }

    #[test]
    fn manifest_embeds_config() {
        let c = ExperimentConfig::desk();
        let m = manifest("simulate", &c, &["results.csv"]);
        let body = m.split_once("\n\n").unwrap().1;
        assert_eq!(ExperimentConfig::from_toml_over(body, &ExperimentConfig::paper()).unwrap(), c);
    }
}
