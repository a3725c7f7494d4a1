//! Bergman kernel and Bergman function `B_n(z) = K_n(z, z) e^{-2n phi(z)}`.

use std::io::Write;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fmt17;
use crate::orthobasis::{moment_matrix, Basis};
use crate::quadrature::{weighted_sum, QuadratureRule};
use crate::randvar::trial_rng;
use crate::special::gauss_legendre;
use crate::toeplitz::Symbol;
use crate::weights::{shell_area, EquilibriumRef};

/// `sum_j |P_j(z)|^2 e^{-2n phi(z)}`, formed from the weighted values.
pub fn bergman_function(b: &Basis, z: &[Complex64]) -> Result<f64> {
    Ok(b.eval_weighted(z)?.iter().map(|v| v.norm_sqr()).sum())
}

/// `B_n` at the point `(r_1, ..., r_m)` with real nonnegative coordinates.
fn bergman_at_moduli(b: &Basis, radii: &[f64]) -> Result<f64> {
    let z: Vec<Complex64> = radii.iter().map(|&r| Complex64::new(r, 0.0)).collect();
    bergman_function(b, &z)
}

/// `int g(z) B_n(z) dV` by pointwise evaluation of `B_n` at the nodes.
/// With `g = None` this is the total mass of `B_n`.
pub fn kernel_integral(b: &Basis, g: Option<&Symbol>, rule: &QuadratureRule) -> Result<f64> {
    if rule.target_n() != b.n() || rule.dim() != b.dim() {
        return Err(Error::Contract("rule built for a different n or dimension".into()));
    }
    let split;
    let rule = match g.and_then(|g| g.jump_radius()) {
        Some(r) if b.dim() == 1 => {
            split = rule.split_at(&[r]);
            &split
        }
        _ => rule,
    };
    let radial = b.weight().is_radial() && g.is_none_or(|g| g.is_radial());
    if radial {
        // B_n is invariant under rotating each coordinate when the weight is
        rule.sum_weighted_radial(|radii| {
            let gv = g.map_or(1.0, |g| g.eval_moduli(radii));
            if gv == 0.0 {
                return Ok(0.0);
            }
            Ok(gv * bergman_at_moduli(b, radii)?)
        })
    } else {
        weighted_sum(rule, |z| {
            let gv = g.map_or(1.0, |g| g.eval(z));
            let bz = bergman_function(b, z).unwrap_or(f64::NAN);
            Complex64::new(gv * bz, 0.0)
        })
        .map(|c| c.re)
    }
}

/// `int B_n dV`, which equals the dimension of the polynomial space.
pub fn bergman_mass(b: &Basis, rule: &QuadratureRule) -> Result<f64> {
    kernel_integral(b, None, rule)
}

/// `int |n^{-m} B_n - (2/pi)^m det(dd^c phi) 1_S| dV` for a built-in radial
/// weight.
///
/// The integral runs over `||z|| <= 2R` with a composite rule split at `R`;
/// the mass of `n^{-m} B_n` beyond `2R` is added exactly as
/// `d_n / n^m - int_{||z|| <= 2R} n^{-m} B_n`.
pub fn scaled_l1_error(b: &Basis, eq: &EquilibriumRef) -> Result<f64> {
    if !b.weight().is_builtin() || eq.dim() != b.dim() {
        return Err(Error::UnsupportedWeight(format!("{} has no reference density", b.weight().name())));
    }
    let m = b.dim();
    let scale = (b.n() as f64).powi(m as i32);
    let big_r = eq.support_radius();
    let panels = 96 + 4 * (b.n() as f64).sqrt().ceil() as usize;
    let gl = gauss_legendre(16);
    let mut interior = 0.0;
    let mut err = 0.0;
    for (lo, hi) in [(0.0, big_r), (big_r, 2.0 * big_r)] {
        let h = (hi - lo) / panels as f64;
        for p in 0..panels {
            let a = lo + p as f64 * h;
            for &(x, w) in &gl {
                let r = a + 0.5 * h * (x + 1.0);
                let mut radii = [0.0; 2];
                radii[0] = r;
                let scaled = bergman_at_moduli(b, &radii[..m])? / scale;
                let dv = 0.5 * h * w * shell_area(m, r);
                interior += scaled * dv;
                err += (scaled - eq.hessian_density(r)).abs() * dv;
            }
        }
    }
    let exterior = (b.len() as f64 / scale - interior).max(0.0);
    Ok(err + exterior)
}

#[derive(Clone, Debug, Serialize)]
pub struct BergmanProfile {
    pub n: u32,
    pub d_n: usize,
    pub grid: Vec<Vec<Complex64>>,
    pub values: Vec<f64>,
    pub scaled_values: Vec<f64>,
    pub mass: f64,
    pub l1_error: f64,
}

/// Evaluates `B_n` on a grid and collects the mass and L1 summaries.
pub fn bergman_profile(b: &Basis, grid: &[Vec<Complex64>], rule: &QuadratureRule, eq: Option<&EquilibriumRef>) -> Result<BergmanProfile> {
    let scale = (b.n() as f64).powi(b.dim() as i32);
    let values = grid.iter().map(|z| bergman_function(b, z)).collect::<Result<Vec<_>>>()?;
    let scaled_values = values.iter().map(|v| v / scale).collect();
    let l1_error = match eq {
        Some(eq) => scaled_l1_error(b, eq)?,
        None => f64::NAN,
    };
    Ok(BergmanProfile {
        n: b.n(),
        d_n: b.len(),
        grid: grid.to_vec(),
        values,
        scaled_values,
        mass: bergman_mass(b, rule)?,
        l1_error,
    })
}

impl BergmanProfile {
    /// CSV `(re_z, im_z, B_n, scaled)` using the first coordinate of each point.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "re_z,im_z,B_n,scaled")?;
        for ((z, v), s) in self.grid.iter().zip(&self.values).zip(&self.scaled_values) {
            writeln!(out, "{},{},{},{}", fmt17(z[0].re), fmt17(z[0].im), fmt17(*v), fmt17(*s))?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ExtremalCheck {
    /// `max (|f(z)|^2 e^{-2n phi(z)} / ||f||^2 - B_n(z))` over trials.
    pub max_violation: f64,
    /// `max |ratio - B_n(z)|` for the kernel section at the trial points.
    pub attainment_gap: f64,
}

/// Samples random `f` and points `z` and compares the normalized weighted
/// value `|f(z)|^2 e^{-2n phi} / ||f||^2` with `B_n(z)`. The norms come from
/// the Gram matrix of the basis under `rule`, not from Parseval.
pub fn extremal_property_check(b: &Basis, trial_count: usize, seed: u64, rule: &QuadratureRule) -> Result<ExtremalCheck> {
    if trial_count < 1 {
        return Err(Error::InputDomain("trial_count must be >= 1".into()));
    }
    let gram = b.project(&moment_matrix(rule, b.indices(), b.log_norms_sq(), None)?);
    let d = b.len();
    let radius = 0.75 * rule.cutoff_radius();
    let norm_sq = |c: &[Complex64]| -> f64 {
        let mut s = Complex64::new(0.0, 0.0);
        for j in 0..d {
            for k in 0..d {
                s += c[j].conj() * gram[(j, k)] * c[k];
            }
        }
        s.re
    };
    let mut out = ExtremalCheck { max_violation: f64::NEG_INFINITY, attainment_gap: 0.0 };
    for t in 0..trial_count {
        let mut rng = trial_rng(seed, t as u64);
        let z: Vec<Complex64> = (0..b.dim())
            .map(|_| {
                let r = radius * rng.random::<f64>().sqrt() / (b.dim() as f64).sqrt();
                Complex64::from_polar(r, 2.0 * std::f64::consts::PI * rng.random::<f64>())
            })
            .collect();
        let c: Vec<Complex64> = (0..d)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let vals = b.eval_weighted(&z)?;
        let bz: f64 = vals.iter().map(|v| v.norm_sqr()).sum();
        let fz: Complex64 = c.iter().zip(&vals).map(|(a, v)| a * v).sum();
        let ratio = fz.norm_sqr() / norm_sq(&c);
        out.max_violation = out.max_violation.max(ratio - bz);

        let section: Vec<Complex64> = vals.iter().map(|v| v.conj()).collect();
        let sz: Complex64 = section.iter().zip(&vals).map(|(a, v)| a * v).sum();
        let sratio = sz.norm_sqr() / norm_sq(&section);
        out.attainment_gap = out.attainment_gap.max((sratio - bz).abs());
    }
    Ok(out)
}
