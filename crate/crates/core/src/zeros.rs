//! Zeros of one-variable random polynomials and their comparison with the
//! equilibrium measure.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::ensemble::{sample_polynomial_trial, RandomPolynomial};
use crate::error::{Error, Result};
use crate::fmt17;
use crate::orthobasis::Basis;
use crate::randvar::CoeffSpec;
use crate::weights::{reference_equilibrium, EquilibriumRef};

pub const MAX_DEGREE: usize = 500;
/// Relative size below which a monomial coefficient counts as zero.
const COEFF_FLOOR: f64 = 1e-300;
const RESIDUAL_TOL: f64 = 1e-6;

/// `f(z) = e^{log_scale} sum_k coeffs[k] z^k` with `max |coeffs[k]| = 1`.
#[derive(Clone, Debug)]
pub struct MonomialForm {
    pub log_scale: f64,
    pub coeffs: Vec<Complex64>,
}

impl MonomialForm {
    pub fn from_coeffs(coeffs: &[Complex64]) -> Self {
        let logs: Vec<(f64, Complex64)> = coeffs.iter().map(|c| (c.norm().ln(), *c)).collect();
        Self::from_log_parts(&logs)
    }

    /// Builds from `(ln|a_k|, a_k)` pairs where only the phase of `a_k` is used.
    fn from_log_parts(parts: &[(f64, Complex64)]) -> Self {
        let top = parts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        let shift = if top.is_finite() { top } else { 0.0 };
        let coeffs = parts
            .iter()
            .map(|&(l, c)| if l.is_finite() { Complex64::from_polar((l - shift).exp(), c.arg()) } else { Complex64::new(0.0, 0.0) })
            .collect();
        Self { log_scale: shift, coeffs }
    }

    /// `ln |f(z)|`.
    pub fn log_abs(&self, z: Complex64) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        self.log_scale + acc.norm().ln()
    }
}

/// Monomial coefficients of `f`, kept in log scale so that no conversion
/// overflows.
pub fn monomial_form(f: &RandomPolynomial, b: &Basis) -> Result<MonomialForm> {
    if b.dim() != 1 {
        return Err(Error::InputDomain("zeros are only computed for one variable".into()));
    }
    if f.basis_fingerprint != b.fingerprint() {
        return Err(Error::Contract("polynomial was sampled against a different basis".into()));
    }
    let c = b.normalized_coeffs();
    let l = b.log_norms_sq();
    let parts: Vec<(f64, Complex64)> = (0..b.len())
        .map(|k| {
            let s: Complex64 = (0..b.len()).map(|j| f.coeffs[j] * c[(j, k)]).sum();
            (s.norm().ln() - 0.5 * l[k], s)
        })
        .collect();
    Ok(MonomialForm::from_log_parts(&parts))
}

#[derive(Clone, Debug, Serialize)]
pub struct RootSet {
    pub roots: Vec<Complex64>,
    /// Degree after dropping vanishing leading coefficients.
    pub degree: usize,
    /// Number of leading coefficients dropped.
    pub deflated: usize,
    pub residual_failures: usize,
    pub max_residual: f64,
}

pub fn roots(f: &RandomPolynomial, b: &Basis) -> Result<RootSet> {
    roots_of(&monomial_form(f, b)?)
}

/// Roots of `sum_k a_k z^k` with multiplicity.
pub fn roots_of(form: &MonomialForm) -> Result<RootSet> {
    let a = &form.coeffs;
    let nominal = a.len().saturating_sub(1);
    if nominal > MAX_DEGREE {
        return Err(Error::InputDomain(format!("degree {nominal} exceeds {MAX_DEGREE}")));
    }
    let live = |c: &Complex64| c.norm() > COEFF_FLOOR;
    let Some(top) = a.iter().rposition(live) else {
        return Err(Error::InputDomain("zero polynomial has no finite root set".into()));
    };
    let deflated = nominal - top;
    let low = a.iter().position(live).unwrap();
    let mut roots = vec![Complex64::new(0.0, 0.0); low];
    let deg = top - low;
    if deg == 0 {
        return Ok(RootSet { roots, degree: top, deflated, residual_failures: 0, max_residual: 0.0 });
    }

    // z = sigma w equalizes the constant and leading terms of the monic form.
    let lead = a[top];
    let log_sigma = (a[low].norm().ln() - lead.norm().ln()) / deg as f64;
    let sigma = log_sigma.exp();
    let e: Vec<Complex64> = (0..=deg)
        .map(|k| {
            let c = a[low + k];
            if !live(&c) {
                return Complex64::new(0.0, 0.0);
            }
            let m = (c.norm().ln() - lead.norm().ln() + (k as f64 - deg as f64) * log_sigma).exp();
            Complex64::from_polar(m, c.arg() - lead.arg())
        })
        .collect();

    let mut comp = DMatrix::<Complex64>::zeros(deg, deg);
    for k in 0..deg {
        comp[(0, k)] = -e[deg - 1 - k];
    }
    for k in 1..deg {
        comp[(k, k - 1)] = Complex64::new(1.0, 0.0);
    }
    balance(&mut comp);
    let eig = Schur::try_new(comp, f64::EPSILON, 100_000)
        .and_then(|s| s.eigenvalues())
        .ok_or_else(|| Error::Eigen("companion matrix".into()))?;

    let mut failures = 0;
    let mut max_residual: f64 = 0.0;
    for w0 in eig.iter() {
        let w = polish(&e, *w0);
        let res = relative_residual(&e, w);
        max_residual = max_residual.max(res);
        if res > RESIDUAL_TOL {
            failures += 1;
        }
        roots.push(w * sigma);
    }
    if failures as f64 > 0.01 * deg as f64 {
        return Err(Error::Accuracy { failed: failures, total: deg });
    }
    Ok(RootSet { roots, degree: top, deflated, residual_failures: failures, max_residual })
}

/// Parlett-Reinsch balancing by powers of two.
fn balance(m: &mut DMatrix<Complex64>) {
    let n = m.nrows();
    let radix = 2.0f64;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].norm();
                    r += m[(i, j)].norm();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut cc = c;
            let mut rr = r;
            while cc < rr / radix {
                f *= radix;
                cc *= radix;
                rr /= radix;
            }
            while cc >= rr * radix {
                f /= radix;
                cc /= radix;
                rr *= radix;
            }
            if (cc + rr) < 0.95 * s {
                done = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                    m[(j, i)] *= f;
                }
            }
        }
    }
}

/// `(q(w), q'(w))` by Horner.
fn horner(e: &[Complex64], w: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for c in e.iter().rev() {
        dp = dp * w + p;
        p = p * w + c;
    }
    (p, dp)
}

/// `|q(w)| / sum |e_k| |w|^k`, evaluated on the reversed polynomial when
/// `|w| > 1`.
fn relative_residual(e: &[Complex64], w: Complex64) -> f64 {
    let (num, den) = if w.norm() <= 1.0 {
        let mut p = Complex64::new(0.0, 0.0);
        let mut s = 0.0;
        for c in e.iter().rev() {
            p = p * w + c;
            s = s * w.norm() + c.norm();
        }
        (p.norm(), s)
    } else {
        let v = w.inv();
        let mut p = Complex64::new(0.0, 0.0);
        let mut s = 0.0;
        for c in e.iter() {
            p = p * v + c;
            s = s * v.norm() + c.norm();
        }
        (p.norm(), s)
    };
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

fn polish(e: &[Complex64], mut w: Complex64) -> Complex64 {
    let mut res = relative_residual(e, w);
    for _ in 0..4 {
        let (p, dp) = horner(e, w);
        if dp.norm() == 0.0 || !p.is_finite() {
            break;
        }
        let next = w - p / dp;
        let r = relative_residual(e, next);
        if !(r < res) {
            break;
        }
        w = next;
        res = r;
    }
    w
}

#[derive(Clone, Debug, Serialize)]
pub struct EmpiricalMeasure {
    pub atoms: Vec<Complex64>,
}

impl EmpiricalMeasure {
    pub fn new(atoms: Vec<Complex64>) -> Self {
        Self { atoms }
    }

    pub fn from_roots(r: &RootSet) -> Self {
        Self::new(r.roots.clone())
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn weight_per_atom(&self) -> f64 {
        1.0 / self.atoms.len() as f64
    }
}

/// `sup_r |F_emp(r) - F_ref(r)|` over 1000 equispaced radii in `[0, 2R]`.
pub fn radial_cdf_distance(e: &EmpiricalMeasure, eq: &EquilibriumRef) -> Result<f64> {
    if e.is_empty() {
        return Err(Error::InputDomain("empty measure".into()));
    }
    let mut moduli: Vec<f64> = e.atoms.iter().map(|a| a.norm()).collect();
    moduli.sort_by(f64::total_cmp);
    let top = 2.0 * eq.support_radius();
    let count = moduli.len() as f64;
    Ok((0..1000)
        .map(|i| {
            let r = top * i as f64 / 999.0;
            let below = moduli.partition_point(|&m| m <= r) as f64;
            (below / count - eq.radial_cdf(r)).abs()
        })
        .fold(0.0, f64::max))
}

/// Kolmogorov distance of the atom arguments to the uniform law on `[0, 2 pi)`.
pub fn angular_uniformity(e: &EmpiricalMeasure) -> Result<f64> {
    if e.len() < 20 {
        return Err(Error::InputDomain(format!("need at least 20 atoms, got {}", e.len())));
    }
    let mut u: Vec<f64> = e
        .atoms
        .iter()
        .map(|a| {
            let t = a.arg();
            (if t < 0.0 { t + 2.0 * PI } else { t }) / (2.0 * PI)
        })
        .collect();
    u.sort_by(f64::total_cmp);
    let n = u.len() as f64;
    Ok(u.iter()
        .enumerate()
        .map(|(i, &x)| ((i as f64 + 1.0) / n - x).max(x - i as f64 / n))
        .fold(0.0, f64::max))
}

/// Midpoint polar grid on the annulus `r_in <= |z| <= r_out`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct AnnulusGrid {
    pub r_in: f64,
    pub r_out: f64,
    pub radial: usize,
    pub angular: usize,
}

impl AnnulusGrid {
    pub fn new(r_in: f64, r_out: f64) -> Result<Self> {
        if !(r_in >= 0.0 && r_out > r_in) {
            return Err(Error::InputDomain(format!("bad annulus ({r_in}, {r_out})")));
        }
        Ok(Self { r_in, r_out, radial: 200, angular: 512 })
    }

    /// `0.1 <= |z| <= 2R`.
    pub fn standard(eq: &EquilibriumRef) -> Self {
        Self { r_in: 0.1, r_out: 2.0 * eq.support_radius(), radial: 200, angular: 512 }
    }

    pub fn area(&self) -> f64 {
        PI * (self.r_out * self.r_out - self.r_in * self.r_in)
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct LogPotentialReport {
    /// Area-averaged `|(1/n) log|f| - phi_e|` over the non-excluded grid.
    pub l1: f64,
    /// Fraction of the annulus area dropped around roots.
    pub excluded_fraction: f64,
    pub area: f64,
}

pub const ROOT_EXCLUSION_RADIUS: f64 = 1e-3;

/// Mean absolute difference of `(1/n) log|f|` and the extremal function over
/// the annulus, skipping cells within `1e-3` of a root.
pub fn log_potential_error(f: &RandomPolynomial, b: &Basis, roots: &[Complex64], grid: &AnnulusGrid) -> Result<LogPotentialReport> {
    let eq = reference_equilibrium(b.weight())?;
    let form = monomial_form(f, b)?;
    let n = b.n() as f64;
    let dr = (grid.r_out - grid.r_in) / grid.radial as f64;
    let dt = 2.0 * PI / grid.angular as f64;
    let rows: Vec<(f64, f64, f64)> = (0..grid.radial)
        .into_par_iter()
        .map(|i| {
            let r = grid.r_in + (i as f64 + 0.5) * dr;
            let cell = r * dr * dt;
            let ext = eq.extremal_radius(r);
            let mut err = 0.0;
            let mut kept = 0.0;
            let mut dropped = 0.0;
            for k in 0..grid.angular {
                let z = Complex64::from_polar(r, (k as f64 + 0.5) * dt);
                if roots.iter().any(|a| (a - z).norm() < ROOT_EXCLUSION_RADIUS) {
                    dropped += cell;
                    continue;
                }
                let v = form.log_abs(z) / n;
                err += cell * (v - ext).abs();
                kept += cell;
            }
            (err, kept, dropped)
        })
        .collect();
    let (err, kept, dropped) = rows.iter().fold((0.0, 0.0, 0.0), |a, r| (a.0 + r.0, a.1 + r.1, a.2 + r.2));
    let total = kept + dropped;
    let excluded_fraction = dropped / total;
    if excluded_fraction > 0.05 {
        return Err(Error::Geometry { fraction: excluded_fraction });
    }
    if !err.is_finite() {
        return Err(Error::Numeric { location: "log potential grid".into(), value: format!("{err}") });
    }
    Ok(LogPotentialReport { l1: err / kept, excluded_fraction, area: grid.area() })
}

#[derive(Clone, Debug, Serialize)]
pub struct ZeroReport {
    pub n: u32,
    pub law: String,
    pub seed: u64,
    pub trials: usize,
    #[serde(skip)]
    pub roots: Vec<Vec<Complex64>>,
    pub radial: Vec<f64>,
    pub angular: Vec<f64>,
    pub mean_radial: f64,
    pub std_radial: f64,
    pub mean_angular: f64,
    pub std_angular: f64,
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let s = if v.len() > 1 { (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() } else { 0.0 };
    (m, s)
}

impl ZeroReport {
    /// Columns `trial, re, im`.
    pub fn write_roots_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "trial,re,im")?;
        for (t, rs) in self.roots.iter().enumerate() {
            for z in rs {
                writeln!(out, "{t},{},{}", fmt17(z.re), fmt17(z.im))?;
            }
        }
        Ok(())
    }

    /// Columns `n, law, mean_distance, std, mean_angular, std_angular`.
    pub fn write_summary_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "n,law,mean_distance,std,mean_angular,std_angular")?;
        writeln!(
            out,
            "{},{},{},{},{},{}",
            self.n,
            self.law,
            fmt17(self.mean_radial),
            fmt17(self.std_radial),
            fmt17(self.mean_angular),
            fmt17(self.std_angular)
        )?;
        Ok(())
    }
}

/// Roots of `trials` random polynomials with radial and angular distances.
pub fn zero_experiment(b: &Basis, spec: &CoeffSpec, trials: usize, seed: u64) -> Result<ZeroReport> {
    let eq = reference_equilibrium(b.weight())?;
    let per: Vec<Result<(Vec<Complex64>, f64, f64)>> = (0..trials as u64)
        .into_par_iter()
        .map(|k| {
            let f = sample_polynomial_trial(b, spec, seed, k);
            let rs = roots(&f, b)?;
            let e = EmpiricalMeasure::from_roots(&rs);
            let rd = radial_cdf_distance(&e, &eq)?;
            let ad = angular_uniformity(&e)?;
            Ok((rs.roots, rd, ad))
        })
        .collect();
    let mut roots_all = Vec::with_capacity(trials);
    let mut radial = Vec::with_capacity(trials);
    let mut angular = Vec::with_capacity(trials);
    for p in per {
        let (r, rd, ad) = p?;
        roots_all.push(r);
        radial.push(rd);
        angular.push(ad);
    }
    let (mean_radial, std_radial) = mean_std(&radial);
    let (mean_angular, std_angular) = mean_std(&angular);
    Ok(ZeroReport {
        n: b.n(),
        law: spec.label(),
        seed,
        trials,
        roots: roots_all,
        radial,
        angular,
        mean_radial,
        std_radial,
        mean_angular,
        std_angular,
    })
}

/// Log-potential errors of `trials` random polynomials on `grid`.
pub fn log_potential_experiment(b: &Basis, spec: &CoeffSpec, trials: usize, seed: u64, grid: &AnnulusGrid) -> Result<Vec<LogPotentialReport>> {
    (0..trials as u64)
        .into_par_iter()
        .map(|k| {
            let f = sample_polynomial_trial(b, spec, seed, k);
            let rs = roots(&f, b)?;
            log_potential_error(&f, b, &rs.roots, grid)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::sample_polynomial;
    use crate::orthobasis::build_onb;
    use crate::quadrature::build_rule;
    use crate::randvar::{trial_rng, Law};
    use crate::weights::WeightSpec;
    use rand::Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    fn gaussian_basis(n: u32) -> Basis {
        let w = WeightSpec::gaussian_half(1).unwrap();
        let rule = build_rule(&w, n, n as usize + 2, 1e-12).unwrap();
        build_onb(&w, n, &rule).unwrap()
    }

    #[test]
    fn z_squared_minus_one() {
        let r = roots_of(&MonomialForm::from_coeffs(&[c(-1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)])).unwrap();
        let r = sorted(r.roots);
        assert!((r[0] - c(-1.0, 0.0)).norm() < 1e-14);
        assert!((r[1] - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn z_cubed_has_triple_root_at_origin() {
        let r = roots_of(&MonomialForm::from_coeffs(&[c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)])).unwrap();
        assert_eq!(r.roots, vec![c(0.0, 0.0); 3]);
    }

    #[test]
    fn vanishing_leading_coefficient_deflates() {
        let r = roots_of(&MonomialForm::from_coeffs(&[c(-2.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)])).unwrap();
        assert_eq!(r.deflated, 2);
        assert_eq!(r.roots.len(), 1);
        assert!((r.roots[0] - c(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn top_basis_element_has_only_the_origin() {
        let b = gaussian_basis(60);
        let mut coeffs = vec![c(0.0, 0.0); b.len()];
        coeffs[b.len() - 1] = c(1.0, 0.0);
        let f = RandomPolynomial::from_coeffs(&b, coeffs).unwrap();
        let r = roots(&f, &b).unwrap();
        assert_eq!(r.roots.len(), 60);
        assert!(r.roots.iter().all(|z| *z == c(0.0, 0.0)));
    }

    #[test]
    fn root_count_matches_degree_and_roots_reconstruct() {
        let b = gaussian_basis(80);
        let f = sample_polynomial(&b, &CoeffSpec::complex(Law::StdGaussian), 2);
        let r = roots(&f, &b).unwrap();
        assert_eq!(r.roots.len(), 80);
        assert_eq!(r.residual_failures, 0);
        // the product over roots reproduces the normalized form at a test point
        let form = monomial_form(&f, &b).unwrap();
        let z = c(0.3, -0.2);
        let lead = form.coeffs[80];
        let log_prod: f64 = r.roots.iter().map(|a| (z - a).norm().ln()).sum::<f64>() + lead.norm().ln() + form.log_scale;
        assert!((log_prod - form.log_abs(z)).abs() < 1e-8);
    }

    #[test]
    fn inverse_sampled_atoms_are_close() {
        let eq = reference_equilibrium(&WeightSpec::gaussian_half(1).unwrap()).unwrap();
        let mut rng = trial_rng(8, 0);
        let atoms = (0..10_000)
            .map(|_| Complex64::from_polar(rng.random::<f64>().sqrt(), 2.0 * PI * rng.random::<f64>()))
            .collect();
        let d = radial_cdf_distance(&EmpiricalMeasure::new(atoms), &eq).unwrap();
        assert!(d <= 0.02, "{d}");
    }

    #[test]
    fn degenerate_measures() {
        let eq = reference_equilibrium(&WeightSpec::gaussian_half(1).unwrap()).unwrap();
        let origin = EmpiricalMeasure::new(vec![c(0.0, 0.0); 50]);
        assert!(radial_cdf_distance(&origin, &eq).unwrap() > 0.999);
        let axis = EmpiricalMeasure::new((1..=50).map(|k| c(k as f64 / 50.0, 0.0)).collect());
        assert!(angular_uniformity(&axis).unwrap() > 0.5);
        let unity = EmpiricalMeasure::new((0..100).map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / 100.0)).collect());
        assert!(angular_uniformity(&unity).unwrap() <= 0.01 + 1e-12);
        assert!(angular_uniformity(&EmpiricalMeasure::new(vec![c(1.0, 0.0); 10])).is_err());
    }

    #[test]
    fn scaling_f_keeps_the_distance() {
        let b = gaussian_basis(50);
        let eq = reference_equilibrium(b.weight()).unwrap();
        let f = sample_polynomial(&b, &CoeffSpec::real(Law::StdGaussian), 3);
        let mut g = f.clone();
        for x in g.coeffs.iter_mut() {
            *x *= c(3.7, -1.1);
        }
        let d1 = radial_cdf_distance(&EmpiricalMeasure::from_roots(&roots(&f, &b).unwrap()), &eq).unwrap();
        let d2 = radial_cdf_distance(&EmpiricalMeasure::from_roots(&roots(&g, &b).unwrap()), &eq).unwrap();
        assert_eq!(d1.to_bits(), d2.to_bits());
    }

    #[test]
    fn monomial_log_potential_outside_the_disk() {
        let n = 200;
        let b = gaussian_basis(n);
        let mut coeffs = vec![c(0.0, 0.0); b.len()];
        coeffs[b.len() - 1] = c(1.0, 0.0);
        let f = RandomPolynomial::from_coeffs(&b, coeffs).unwrap();
        let r = roots(&f, &b).unwrap();
        let outside = log_potential_error(&f, &b, &r.roots, &AnnulusGrid::new(1.0, 2.0).unwrap()).unwrap();
        // (1/n) log|P_n(z)| - log|z| - 1/2 is constant; Stirling gives it
        let k = 0.5 / n as f64 * ((n as f64 + 1.0) * (n as f64).ln() - PI.ln() - crate::special::ln_factorial(n)) - 0.5;
        assert!((outside.l1 - k.abs()).abs() < 1e-10);
        assert!(outside.l1 <= 0.02);
        let inside = log_potential_error(&f, &b, &r.roots, &AnnulusGrid::new(0.1, 0.9).unwrap()).unwrap();
        assert!(inside.l1 >= 0.1);
    }

    #[test]
    fn equal_coefficients_log_potential() {
        let b = gaussian_basis(200);
        let f = RandomPolynomial::from_coeffs(&b, vec![c(1.0, 0.0); b.len()]).unwrap();
        let r = roots(&f, &b).unwrap();
        let eq = reference_equilibrium(b.weight()).unwrap();
        let rep = log_potential_error(&f, &b, &r.roots, &AnnulusGrid::standard(&eq)).unwrap();
        assert!(rep.l1 <= 0.1, "{}", rep.l1);
    }
}
