//! Executes a resolved [`ExperimentConfig`] and writes its artifacts.
//!
//! Every run writes `manifest.json` (config, versions, wall time),
//! `summary.json`, and per-experiment CSV and `.dat` files. CSV and summary
//! contents depend only on the config, never on the worker count.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::bergman::{bergman_mass, bergman_profile, scaled_l1_error};
use crate::config::{Experiment, ExperimentConfig};
use crate::ensemble::{concentration_experiment, haar_rotate_trial, mass_sweep, onb_mass_profile};
use crate::error::{Error, Result};
use crate::fmt17;
use crate::orthobasis::{build_onb, gram_residual, Basis};
use crate::quadrature::{build_rule_with, QuadratureRule};
use crate::randvar::{complex_block_check, hw_experiment, Field};
use crate::toeplitz::build_toeplitz;
use crate::weights::{reference_equilibrium, EquilibriumRef};
use crate::zeros::{log_potential_experiment, zero_experiment, AnnulusGrid};

pub const THREADS_ENV: &str = "EQDIST_THREADS";

/// Worker count from `EQDIST_THREADS`; `None` means machine parallelism.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(s) if s.trim().is_empty() => Ok(None),
        Ok(s) => s
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&t| t >= 1)
            .map(Some)
            .ok_or_else(|| Error::Config(format!("{THREADS_ENV} must be a positive integer, got '{s}'"))),
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub output: PathBuf,
    pub files: Vec<String>,
    pub summary: Value,
}

struct Sink {
    dir: PathBuf,
    files: Vec<String>,
}

impl Sink {
    fn write(&mut self, name: &str, f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        let mut buf = Vec::new();
        f(&mut buf)?;
        fs::write(self.dir.join(name), buf)?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn text(&mut self, name: &str, body: String) -> Result<()> {
        self.write(name, |b| {
            b.extend_from_slice(body.as_bytes());
            Ok(())
        })
    }
}

/// Runs with the worker count taken from `EQDIST_THREADS`.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    run_in(cfg, &cfg.output, threads_from_env()?)
}

pub fn run_in(cfg: &ExperimentConfig, out: &Path, threads: Option<usize>) -> Result<RunOutcome> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let start = Instant::now();
    fs::create_dir_all(out)?;
    let mut sink = Sink { dir: out.to_path_buf(), files: Vec::new() };
    let summary = pool
        .install(|| dispatch(cfg, &mut sink))
        .map_err(|e| e.context(format!("experiment {}", cfg.experiment)))?;
    sink.write("summary.json", |b| {
        serde_json::to_writer_pretty(&mut *b, &summary)?;
        b.push(b'\n');
        Ok(())
    })?;
    let config: serde_json::Map<String, Value> = cfg.raw.pairs().map(|(k, v)| (k.to_string(), Value::from(v))).collect();
    let manifest = json!({
        "experiment": cfg.experiment.name(),
        "config": config,
        "resolved": {
            "weight": cfg.weight.name(),
            "m": cfg.weight.dim(),
            "n": cfg.n,
            "seed": cfg.seed,
            "trials": cfg.trials,
            "symbol": cfg.symbol.id(),
            "coefficients": cfg.coeffs.iter().map(|c| c.label()).collect::<Vec<_>>(),
            "quad_tol": cfg.quad.tol,
        },
        "versions": {
            "eqdist": env!("CARGO_PKG_VERSION"),
        },
        "threads": pool.current_num_threads(),
        "wall_time_seconds": start.elapsed().as_secs_f64(),
        "files": sink.files,
    });
    fs::write(out.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    let mut files = sink.files;
    files.push("manifest.json".into());
    Ok(RunOutcome { output: out.to_path_buf(), files, summary })
}

fn dispatch(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<Value> {
    match cfg.experiment {
        Experiment::Basis => run_basis(cfg, sink),
        Experiment::Bergman => run_bergman(cfg, sink),
        Experiment::Toeplitz => run_toeplitz(cfg, sink),
        Experiment::Mass => run_mass(cfg, sink),
        Experiment::Zeros => run_zeros(cfg, sink),
        Experiment::Hw => run_hw(cfg, sink),
        Experiment::Onb => run_onb(cfg, sink),
        Experiment::Sweep => run_sweep(cfg, sink),
    }
}

/// Rule and basis for degree `n`, with two spare degrees for symbols.
fn setup(cfg: &ExperimentConfig, n: u32) -> Result<(QuadratureRule, Basis)> {
    let ctx = |e: Error| e.context(format!("n = {n}"));
    let rule = build_rule_with(&cfg.weight, n, n as usize + 2, &cfg.quad).map_err(ctx)?;
    let b = build_onb(&cfg.weight, n, &rule).map_err(ctx)?;
    Ok((rule, b))
}

fn equilibrium(cfg: &ExperimentConfig) -> Result<EquilibriumRef> {
    reference_equilibrium(&cfg.weight)
}

fn run_basis(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<Value> {
    let mut rows = Vec::new();
    for &n in &cfg.n {
        let (rule, b) = setup(cfg, n)?;
        let residual = gram_residual(&b, &rule.refined())?;
        sink.write(&format!("basis_n{n}.csv"), |w| b.write_csv(w))?;
        rows.push(json!({ "n": n, "d_n": b.len(), "gram_residual": residual, "nodes": rule.node_count() }));
    }
    Ok(json!({ "basis": rows }))
}

fn run_bergman(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<Value> {
    let eq = equilibrium(cfg)?;
    let m = cfg.weight.dim();
    let mut rows = Vec::new();
    for &n in &cfg.n {
        let (rule, b) = setup(cfg, n)?;
        let top = 2.0 * eq.support_radius();
        let radii: Vec<f64> = (0..cfg.grid).map(|i| top * i as f64 / (cfg.grid - 1) as f64).collect();
        let grid: Vec<Vec<Complex64>> = radii
            .iter()
            .map(|&r| {
                let mut z = vec![Complex64::new(0.0, 0.0); m];
                z[0] = Complex64::new(r, 0.0);
                z
            })
            .collect();
        let profile = bergman_profile(&b, &grid, &rule, Some(&eq))?;
        sink.write(&format!("bergman_n{n}.csv"), |w| profile.write_csv(w))?;
        let mut dat = String::from("# r scaled_bergman reference_density\n");
        for (r, s) in radii.iter().zip(&profile.scaled_values) {
            dat += &format!("{} {} {}\n", fmt17(*r), fmt17(*s), fmt17(eq.hessian_density(*r)));
        }
        sink.text(&format!("bergman_n{n}.dat"), dat)?;
        rows.push(json!({
            "n": n,
            "d_n": b.len(),
            "mass": bergman_mass(&b, &rule)?,
            "scaled_l1_error": scaled_l1_error(&b, &eq)?,
            "scaled_value_at_origin": profile.scaled_values[0],
        }));
    }
    Ok(json!({ "bergman": rows }))
}

fn run_toeplitz(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<Value> {
    let eq = equilibrium(cfg).ok();
    let mut rows = Vec::new();
    for &n in &cfg.n {
        let (rule, b) = setup(cfg, n)?;
        let t = build_toeplitz(&b, &cfg.symbol, &rule)?;
        let spectrum = t.spectrum()?;
        sink.write(&format!("spectrum_n{n}.csv"), |w| t.write_spectrum_csv(w))?;
        let mut dat = String::from("# index eigenvalue\n");
        for (k, l) in spectrum.iter().enumerate() {
            dat += &format!("{k} {}\n", fmt17(*l));
        }
        sink.text(&format!("spectrum_n{n}.dat"), dat)?;
        let d = t.dim_n() as f64;
        let mut moments = Vec::new();
        for k in 1..=3 {
            let trace = t.trace_power(k)? / d;
            let reference = eq.as_ref().and_then(|eq| cfg.symbol.equilibrium_moment(eq, k).ok());
            moments.push(json!({ "k": k, "normalized_trace": trace, "equilibrium_moment": reference }));
        }
        rows.push(json!({
            "n": n,
            "d_n": t.dim_n(),
            "symbol": cfg.symbol.id(),
            "trace": t.trace(),
            "hermitian_defect": t.hermitian_defect(),
            "min_eigenvalue": spectrum.first().copied(),
            "max_eigenvalue": spectrum.last().copied(),
            "moments": moments,
        }));
    }
    Ok(json!({ "toeplitz": rows }))
}

fn run_mass(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<Value> {
    let eq = equilibrium(cfg)?;
    let reference = cfg.symbol.equilibrium_moment(&eq, 1)?;
    let mut rows = Vec::new();
    let mut csv = String::from("n,law,mean,std,exceedance,deviation_q95\n");
    for &n in &cfg.n {
        let (rule, b) = setup(cfg, n)?;
        let t = build_toeplitz(&b, &cfg.symbol, &rule)?;
        for spec in &cfg.coeffs {
            let rep = concentration_experiment(&b, &t, spec, cfg.trials, cfg.eps, cfg.seed, reference)?;
            sink.write(&format!("mass_n{n}_{}.csv", spec.label()), |w| rep.write_csv(w))?;
            csv += &format!("{n},{},{},{},{},{}\n", rep.law, fmt17(rep.mean), fmt17(rep.std_dev), fmt17(rep.exceedance), fmt17(rep.deviation_q95));
            rows.push(json!({
                "n": n,
                "law": rep.law,
                "mean": rep.mean,
                "std": rep.std_dev,
                "exceedance": rep.exceedance,
                "normalized_trace": t.trace() / t.dim_n() as f64,
            }));
        }
    }
    sink.text("mass_summary.csv", csv)?;
    Ok(json!({ "reference": reference, "eps": cfg.eps, "mass": rows }))
}

fn run_zeros(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<Value> {
    let eq = equilibrium(cfg)?;
    let mut rows = Vec::new();
    let mut csv = String::from("n,law,mean_distance,std,mean_angular,std_angular\n");
    for &n in &cfg.n {
        let (_, b) = setup(cfg, n)?;
        for spec in &cfg.coeffs {
            let rep = zero_experiment(&b, spec, cfg.trials, cfg.seed)?;
            let label = spec.label();
            sink.write(&format!("roots_n{n}_{label}.csv"), |w| rep.write_roots_csv(w))?;
            csv += &format!(
                "{n},{label},{},{},{},{}\n",
                fmt17(rep.mean_radial),
                fmt17(rep.std_radial),
                fmt17(rep.mean_angular),
                fmt17(rep.std_angular)
            );
            let mut moduli: Vec<f64> = rep.roots.iter().flatten().map(|z| z.norm()).collect();
            moduli.sort_by(f64::total_cmp);
            let mut dat = String::from("# r empirical_cdf reference_cdf\n");
            let top = 2.0 * eq.support_radius();
            for i in 0..200 {
                let r = top * i as f64 / 199.0;
                let f = moduli.partition_point(|&m| m <= r) as f64 / moduli.len() as f64;
                dat += &format!("{} {} {}\n", fmt17(r), fmt17(f), fmt17(eq.radial_cdf(r)));
            }
            sink.text(&format!("zeros_radial_n{n}_{label}.dat"), dat)?;
            let mut row = json!({
                "n": n,
                "law": label,
                "mean_distance": rep.mean_radial,
                "std": rep.std_radial,
                "mean_angular": rep.mean_angular,
                "std_angular": rep.std_angular,
            });
            if cfg.log_potential {
                let lp = log_potential_experiment(&b, spec, cfg.trials, cfg.seed, &AnnulusGrid::standard(&eq))?;
                let mean = lp.iter().map(|r| r.l1).sum::<f64>() / lp.len() as f64;
                row["mean_log_potential_l1"] = json!(mean);
            }
            rows.push(row);
        }
    }
    sink.text("zeros_summary.csv", csv)?;
    Ok(json!({ "zeros": rows }))
}

fn hw_matrix(cfg: &ExperimentConfig) -> Result<DMatrix<Complex64>> {
    let one = Complex64::new(1.0, 0.0);
    Ok(match cfg.hw_matrix.as_str() {
        "identity" => DMatrix::identity(cfg.hw_size, cfg.hw_size),
        "tridiagonal" => DMatrix::from_fn(cfg.hw_size, cfg.hw_size, |j, k| match j.abs_diff(k) {
            0 => 2.0 * one,
            1 => -one,
            _ => Complex64::new(0.0, 0.0),
        }),
        _ => {
            let (rule, b) = setup(cfg, cfg.n[0])?;
            build_toeplitz(&b, &cfg.symbol, &rule)?.entries().clone()
        }
    })
}

fn run_hw(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<Value> {
    let a = hw_matrix(cfg)?;
    let mut rows = Vec::new();
    for spec in &cfg.coeffs {
        let rep = hw_experiment(&a, &cfg.hw_matrix, spec, cfg.trials, &cfg.hw_t, cfg.seed)?;
        sink.write(&format!("hw_{}.csv", spec.label()), |w| rep.write_csv(w))?;
        let mut row = serde_json::to_value(&rep)?;
        if spec.field == Field::Complex {
            row["block_reduction"] = serde_json::to_value(complex_block_check(&a, spec, cfg.trials, cfg.seed)?)?;
        }
        rows.push(row);
    }
    Ok(json!({ "matrix": cfg.hw_matrix, "size": a.nrows(), "hw": rows }))
}

fn run_onb(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<Value> {
    let eq = equilibrium(cfg)?;
    let mut rows = Vec::new();
    for &n in &cfg.n {
        let (rule, b) = setup(cfg, n)?;
        let trace = build_toeplitz(&b, &cfg.symbol, &rule)?.trace();
        let count = if cfg.rotate { cfg.rotations } else { 1 };
        let mut csv = String::from("rotation,fraction,total_mass,trace\n");
        let mut fractions = Vec::with_capacity(count);
        let mut max_gap: f64 = 0.0;
        for k in 0..count {
            let basis = if cfg.rotate { haar_rotate_trial(&b, cfg.seed, k as u64) } else { b.clone() };
            let p = onb_mass_profile(&basis, &cfg.symbol, &rule, &eq, cfg.tol_mass)?;
            csv += &format!("{k},{},{},{}\n", fmt17(p.fraction), fmt17(p.total), fmt17(trace));
            max_gap = max_gap.max((p.total - trace).abs());
            if k == 0 {
                let mut dat = String::from("# j mass reference\n");
                for (j, m) in p.masses.iter().enumerate() {
                    dat += &format!("{j} {} {}\n", fmt17(*m), fmt17(p.reference));
                }
                sink.text(&format!("onb_masses_n{n}.dat"), dat)?;
            }
            fractions.push(p.fraction);
        }
        sink.text(&format!("onb_n{n}.csv"), csv)?;
        rows.push(json!({
            "n": n,
            "rotated": cfg.rotate,
            "rotations": count,
            "mean_fraction": fractions.iter().sum::<f64>() / count as f64,
            "max_trace_gap": max_gap,
        }));
    }
    Ok(json!({ "tol_mass": cfg.tol_mass, "onb": rows }))
}

fn run_sweep(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<Value> {
    let mut rows = Vec::new();
    for spec in &cfg.coeffs {
        let pts = mass_sweep(&cfg.weight, &cfg.symbol, spec, &cfg.n, cfg.trials, cfg.seed, &cfg.quad)?;
        let label = spec.label();
        let mut csv = String::from("n,d_n,mean_deviation,running_average\n");
        let mut dat = String::from("# n mean_deviation running_average\n");
        for p in &pts {
            csv += &format!("{},{},{},{}\n", p.n, p.d_n, fmt17(p.mean_deviation), fmt17(p.running_average));
            dat += &format!("{} {} {}\n", p.n, fmt17(p.mean_deviation), fmt17(p.running_average));
        }
        sink.text(&format!("sweep_{label}.csv"), csv)?;
        sink.text(&format!("sweep_{label}.dat"), dat)?;
        rows.push(json!({ "law": label, "points": pts }));
    }
    Ok(json!({ "sweep": rows }))
}
