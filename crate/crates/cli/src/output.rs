//! Deterministic output files: CSV with 17 significant digits, pretty JSON, manifests.

use anyhow::{bail, Context, Result};
use num_complex::Complex64;
use screensig_core::farfield::write_atomic;
use screensig_core::IndicatorCurve;
use serde::Serialize;
use std::fmt::Write as _;
use std::path::Path;

use crate::config::RunConfig;

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes()).with_context(|| format!("writing {}", path.display()))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    write_atomic(path, text.as_bytes()).with_context(|| format!("writing {}", path.display()))
}

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn indicator_csv(curve: &IndicatorCurve) -> String {
    let mut s = String::from("lambda_re,lambda_im,indicator,residual_mean,valid\n");
    for i in 0..curve.len() {
        let l = curve.lambdas[i];
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            num(l.re),
            num(l.im),
            num(curve.indicator[i]),
            num(curve.residual_mean[i]),
            curve.valid[i]
        );
    }
    s
}

pub fn read_indicator_csv(path: &Path) -> Result<IndicatorCurve> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines();
    match lines.next() {
        Some("lambda_re,lambda_im,indicator,residual_mean,valid") => {}
        _ => bail!("{}: unexpected header", path.display()),
    }
    let mut curve = IndicatorCurve { lambdas: vec![], indicator: vec![], residual_mean: vec![], alpha: vec![], valid: vec![] };
    for (k, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 5 {
            bail!("{}: line {} has {} fields", path.display(), k + 2, f.len());
        }
        let p = |s: &str| s.trim().parse::<f64>().with_context(|| format!("line {}: bad number {s:?}", k + 2));
        curve.lambdas.push(Complex64::new(p(f[0])?, p(f[1])?));
        curve.indicator.push(p(f[2])?);
        curve.residual_mean.push(p(f[3])?);
        curve.alpha.push(f64::NAN);
        curve.valid.push(f[4].trim().parse().with_context(|| format!("line {}: bad flag", k + 2))?);
    }
    Ok(curve)
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    timestamp_unix: u64,
    workers: usize,
    noise_seed: u64,
    probe_seed: u64,
    outputs: &'a [String],
    config: &'a RunConfig,
}

pub fn write_manifest(dir: &Path, command: &str, cfg: &RunConfig, outputs: &[String]) -> Result<()> {
    let timestamp_unix = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let m = Manifest {
        command,
        version: env!("CARGO_PKG_VERSION"),
        timestamp_unix,
        workers: rayon::current_num_threads(),
        noise_seed: cfg.noise.seed,
        probe_seed: cfg.probes.seed,
        outputs,
        config: cfg,
    };
    write_json(&dir.join(format!("manifest-{command}.json")), &m)
}

pub fn gnuplot_script(csv: &str, peaks: &[f64]) -> String {
    let mut s = String::from("set datafile separator ','\nset xlabel 'lambda'\nset ylabel 'indicator'\nset key off\n");
    for p in peaks {
        let _ = writeln!(s, "set arrow from {p:.16e}, graph 0 to {p:.16e}, graph 1 nohead dt 2");
    }
    let _ = writeln!(s, "plot '{csv}' every ::1 using 1:3 with lines");
    s
}
