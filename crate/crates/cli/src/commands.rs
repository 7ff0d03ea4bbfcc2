use anyhow::{bail, Context, Result};
use num_complex::Complex64;
use screensig_core::eigs::{self, Window};
use screensig_core::farfield::{self, LambdaAssembler, LambdaCache};
use screensig_core::inversion::{detect_peaks, lambda_grid, scan_indicator, ProbeSet};
use screensig_core::mie::{self, Incident, PlaneWave};
use screensig_core::tensor::admissibility;
use screensig_core::{FarFieldMatrix, SurfaceTensor};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::output::{self, num};

pub struct RunContext {
    pub cfg: RunConfig,
    pub cache: Option<PathBuf>,
}

impl RunContext {
    fn out_dir(&self) -> Result<&Path> {
        let dir = self.cfg.output_dir.as_path();
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(dir)
    }

    fn cache(&self) -> Option<LambdaCache> {
        self.cache.clone().or_else(|| self.cfg.cache_dir.clone()).map(LambdaCache::new)
    }

    fn finish(&self, command: &str, outputs: &[PathBuf]) -> Result<()> {
        let names: Vec<String> = outputs.iter().map(|p| p.display().to_string()).collect();
        output::write_manifest(self.out_dir()?, command, &self.cfg, &names)?;
        for n in &names {
            println!("wrote {n}");
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct TensorReport {
    sigma: SurfaceTensor,
    admissible: bool,
    #[serde(flatten)]
    report: screensig_core::AdmissibilityReport,
}

pub fn check_tensor(ctx: &RunContext) -> Result<()> {
    let sigma = ctx.cfg.sigma();
    let report = admissibility(&sigma.to_general());
    let admissible = report.uniqueness_ok && report.existence_ok;
    println!(
        "uniqueness: {}, existence: {}, theta*: {}",
        report.uniqueness_ok,
        report.existence_ok,
        report.theta_star.map_or("none".into(), |t| format!("{t:.6}"))
    );
    for f in &report.uniqueness_failures {
        println!("violated: {f}");
    }
    let path = ctx.out_dir()?.join("tensor.json");
    output::write_json(&path, &TensorReport { sigma, admissible, report })?;
    ctx.finish("check-tensor", &[path])
}

fn window(cfg: &RunConfig) -> Result<Window> {
    Ok(Window::real(cfg.lambda_grid.min, cfg.lambda_grid.max)?)
}

pub fn eigs(ctx: &RunContext, nmax: usize) -> Result<()> {
    let cfg = &ctx.cfg;
    let w = window(cfg)?;
    let set = eigs::eigenvalues_in_window(cfg.kappa, &cfg.sigma(), &w, nmax)?;
    if !eigs::tail_stable(cfg.kappa, &cfg.sigma(), &w, nmax, 10)? {
        log::warn!("eigenvalue count in window changes when the truncation is raised by 10");
    }
    println!("{} eigenvalues in [{}, {}]", set.eigenvalues.len(), w.re_min, w.re_max);
    for e in &set.eigenvalues {
        println!("n={:<3} lambda={} {}i  multiplicity {}", e.n, num(e.lambda.re), num(e.lambda.im), e.multiplicity);
    }
    let path = ctx.out_dir()?.join("eigs.json");
    output::write_json(&path, &set)?;
    ctx.finish("eigs", &[path])
}

pub fn trace(ctx: &RunContext, nmax: usize) -> Result<()> {
    let cfg = &ctx.cfg;
    let t = cfg.trace;
    let params: Vec<f64> = if t.steps == 1 {
        vec![t.s_min]
    } else {
        (0..t.steps).map(|k| t.s_min + (t.s_max - t.s_min) * k as f64 / (t.steps - 1) as f64).collect()
    };
    let sigma = cfg.sigma();
    let rows = eigs::eigenvalue_trace(cfg.kappa, |s| SurfaceTensor::new(sigma.a, sigma.b * s), &params, &window(cfg)?, nmax)?;
    let mut csv = String::from("s,n,lambda_re,lambda_im\n");
    for (s, set) in &rows {
        for e in &set.eigenvalues {
            let _ = writeln!(csv, "{},{},{},{}", num(*s), e.n, num(e.lambda.re), num(e.lambda.im));
        }
    }
    let path = ctx.out_dir()?.join("trace.csv");
    output::write_text(&path, &csv)?;
    ctx.finish("trace", &[path])
}

pub fn forward(ctx: &RunContext) -> Result<()> {
    let cfg = &ctx.cfg;
    let (d, p) = cfg.incident();
    let dn = d.norm();
    if !(dn > 0.0) {
        bail!("incident direction must be nonzero");
    }
    let d = d / dn;
    let p = p - d * d.dot(&p);
    if !(p.norm() > 0.0) {
        bail!("polarization must not be parallel to the direction");
    }
    let wave = PlaneWave::new(d, p.map(Complex64::from), cfg.kappa)?;
    let field = mie::solve_forward(&Incident::PlaneWave(wave), &cfg.sigma(), cfg.nmax())?;
    let grid = cfg.grid()?;
    let mut csv = String::from("node,x,y,z,weight,e_theta_re,e_theta_im,e_phi_re,e_phi_im\n");
    for i in grid.receivers() {
        let x = grid.nodes[i];
        let c = grid.components(i, &mie::far_field(&field, &x)?);
        let _ = writeln!(
            csv,
            "{i},{},{},{},{},{},{},{},{}",
            num(x.x),
            num(x.y),
            num(x.z),
            num(grid.weights[i]),
            num(c[0].re),
            num(c[0].im),
            num(c[1].re),
            num(c[1].im)
        );
    }
    let dir = ctx.out_dir()?;
    let csv_path = dir.join("forward.csv");
    output::write_text(&csv_path, &csv)?;
    let json_path = dir.join("field.json");
    output::write_text(&json_path, &field.to_json()?)?;
    println!("absorbed power {}", num(mie::surface_power(&field)?.re));
    ctx.finish("forward", &[csv_path, json_path])
}

fn data_operator(cfg: &RunConfig) -> Result<FarFieldMatrix> {
    let grid = cfg.grid()?;
    let f = farfield::assemble_f(&cfg.sigma(), cfg.kappa, &grid, cfg.nmax())?;
    Ok(farfield::add_noise(&f, &cfg.noise_spec()?)?)
}

pub fn faroperator(ctx: &RunContext, lambda: Option<f64>) -> Result<()> {
    let cfg = &ctx.cfg;
    let (m, name) = match lambda {
        None => (data_operator(cfg)?, "F.ffo".to_string()),
        Some(l) => {
            let asm = LambdaAssembler::new(cfg.kappa, &cfg.grid()?, cfg.nmax())?;
            let z = Complex64::new(l, cfg.lambda_grid.im);
            let m = match ctx.cache() {
                Some(c) => c.get_or_assemble(&asm, z)?,
                None => asm.assemble(z)?,
            };
            (m, "F_lambda.ffo".to_string())
        }
    };
    println!("{}x{} operator, spectral norm {}", m.entries.nrows(), m.entries.ncols(), num(farfield::spectral_norm(&m.entries)));
    let path = ctx.out_dir()?.join(name);
    m.save(&path)?;
    ctx.finish("faroperator", &[path.clone(), farfield::sidecar_path(&path)])
}

pub fn scan(ctx: &RunContext, data: Option<&Path>, gnuplot: bool) -> Result<()> {
    let cfg = &ctx.cfg;
    let f = match data {
        Some(p) => FarFieldMatrix::load(p).with_context(|| format!("loading {}", p.display()))?,
        None => data_operator(cfg)?,
    };
    let nmax = cfg.truncation.unwrap_or(f.nmax);
    let asm = LambdaAssembler::new(f.kappa, &f.grid, nmax)?;
    let probes = ProbeSet::random(cfg.probes.count, cfg.probes.r_max, cfg.probes.seed)?;
    let lg = cfg.lambda_grid;
    let lambdas = lambda_grid(lg.min, lg.max, lg.count, lg.im)?;
    let cache = ctx.cache();
    let curve = scan_indicator(&f, &lambdas, &probes, &asm, cache.as_ref(), &cfg.policy())?;
    let invalid = curve.valid.iter().filter(|&&v| !v).count();
    if invalid > 0 {
        log::warn!("{invalid} lambda samples failed and are interpolated for peak detection");
    }
    let peaks = detect_peaks(&curve, cfg.peaks.prominence_factor);
    println!("median indicator {}, {} peaks", num(curve.median()), peaks.locations.len());
    for (l, p) in peaks.locations.iter().zip(&peaks.prominences) {
        println!("peak at {} prominence {}", num(l.re), num(*p));
    }
    let dir = ctx.out_dir()?;
    let csv_path = dir.join("indicator.csv");
    output::write_text(&csv_path, &output::indicator_csv(&curve))?;
    let peaks_path = dir.join("peaks.json");
    output::write_json(&peaks_path, &peaks)?;
    let mut outputs = vec![csv_path, peaks_path];
    if gnuplot {
        let gp = dir.join("indicator.gp");
        let locs: Vec<f64> = peaks.locations.iter().map(|l| l.re).collect();
        output::write_text(&gp, &output::gnuplot_script("indicator.csv", &locs))?;
        outputs.push(gp);
    }
    ctx.finish("scan", &outputs)
}

pub fn peaks(ctx: &RunContext, input: Option<&Path>) -> Result<()> {
    let dir = ctx.out_dir()?;
    let input = input.map(Path::to_path_buf).unwrap_or_else(|| dir.join("indicator.csv"));
    let curve = output::read_indicator_csv(&input)?;
    let peaks = detect_peaks(&curve, ctx.cfg.peaks.prominence_factor);
    println!("{} peaks", peaks.locations.len());
    for (l, w) in peaks.locations.iter().zip(&peaks.widths) {
        println!("peak at {} width {}", num(l.re), num(*w));
    }
    let path = dir.join("peaks.json");
    output::write_json(&path, &peaks)?;
    ctx.finish("peaks", &[path])
}
