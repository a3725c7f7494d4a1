//! Subgaussian coefficient laws, Orlicz norms and Hanson-Wright tail
//! experiments.
//!
//! All draws come from ChaCha8 streams: trial `t` under seed `s` uses the
//! generator seeded with `s` on stream `t`, so trials are independent of
//! scheduling order and thread count.

use std::f64::consts::{LN_2, SQRT_2};
use std::fmt;
use std::io::Write;
use std::sync::Arc;

use nalgebra::linalg::SymmetricEigen;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fmt17;
use crate::special::gauss_legendre;

/// Generator for trial `trial` under `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

pub type SamplerFn = Arc<dyn Fn(&mut dyn RngCore) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum Law {
    StdGaussian,
    Rademacher,
    /// Uniform on `[-sqrt 3, sqrt 3]`.
    UniformSym,
    /// A centered unit-variance law given by its sampler, with an optional
    /// almost-sure bound `|X| <= bound`.
    Custom { name: String, bound: Option<f64>, sampler: SamplerFn },
}

impl fmt::Debug for Law {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl Law {
    pub fn parse(name: &str) -> Result<Self> {
        match name.trim() {
            "gaussian" | "std_gaussian" => Ok(Law::StdGaussian),
            "rademacher" => Ok(Law::Rademacher),
            "uniform" | "uniform_sym" => Ok(Law::UniformSym),
            other => Err(Error::Config(format!("unknown coefficient law '{other}'"))),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Law::StdGaussian => "gaussian".into(),
            Law::Rademacher => "rademacher".into(),
            Law::UniformSym => "uniform".into(),
            Law::Custom { name, .. } => name.clone(),
        }
    }

    fn draw(&self, rng: &mut dyn RngCore) -> f64 {
        match self {
            Law::StdGaussian => rng.sample(StandardNormal),
            Law::Rademacher => {
                if rng.next_u32() & 1 == 0 {
                    -1.0
                } else {
                    1.0
                }
            }
            Law::UniformSym => 3f64.sqrt() * (2.0 * rng.random::<f64>() - 1.0),
            Law::Custom { sampler, .. } => sampler(rng),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    /// Independent real and imaginary parts, each with variance 1/2.
    Complex,
}

impl Field {
    pub fn parse(name: &str) -> Result<Self> {
        match name.trim() {
            "real" => Ok(Field::Real),
            "complex" => Ok(Field::Complex),
            other => Err(Error::Config(format!("unknown coefficient field '{other}'"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CoeffSpec {
    pub law: Law,
    pub field: Field,
    /// Multiplier applied to every draw (1 for unit variance).
    pub scale: f64,
}

impl CoeffSpec {
    pub fn new(law: Law, field: Field) -> Self {
        Self { law, field, scale: 1.0 }
    }

    pub fn real(law: Law) -> Self {
        Self::new(law, Field::Real)
    }

    pub fn complex(law: Law) -> Self {
        Self::new(law, Field::Complex)
    }

    pub fn scaled(mut self, s: f64) -> Self {
        self.scale *= s;
        self
    }

    pub fn label(&self) -> String {
        let field = match self.field {
            Field::Real => "real",
            Field::Complex => "complex",
        };
        format!("{}_{}", self.law.name(), field)
    }

    /// Scale of each real component.
    fn component_scale(&self) -> f64 {
        match self.field {
            Field::Real => self.scale,
            Field::Complex => self.scale / SQRT_2,
        }
    }

    pub fn draw(&self, rng: &mut dyn RngCore) -> Complex64 {
        let s = self.component_scale();
        match self.field {
            Field::Real => Complex64::new(s * self.law.draw(rng), 0.0),
            Field::Complex => {
                let re = self.law.draw(rng);
                let im = self.law.draw(rng);
                Complex64::new(s * re, s * im)
            }
        }
    }

    /// `psi_2` norm of one real component (of `X` itself for real fields).
    pub fn psi2(&self) -> Result<f64> {
        psi2_norm(self)
    }
}

/// `count` deterministic draws for `seed`.
pub fn sample(spec: &CoeffSpec, seed: u64, count: usize) -> Vec<Complex64> {
    let mut rng = trial_rng(seed, 0);
    (0..count).map(|_| spec.draw(&mut rng)).collect()
}

/// `inf { k > 0 : E exp(X^2 / k^2) <= 2 }` for a real component.
pub fn psi2_norm(spec: &CoeffSpec) -> Result<f64> {
    let base = match &spec.law {
        Law::Rademacher => 1.0 / LN_2.sqrt(),
        // (1 - 2/k^2)^{-1/2} = 2
        Law::StdGaussian => (8.0f64 / 3.0).sqrt(),
        Law::UniformSym => uniform_psi2(),
        Law::Custom { bound: Some(b), .. } => b / LN_2.sqrt(),
        Law::Custom { name, bound: None, .. } => {
            return Err(Error::UnsupportedLaw(format!("{name}: psi2 needs an almost-sure bound")))
        }
    };
    Ok(base * spec.component_scale().abs())
}

/// Bisection on `(1/a) int_0^a exp(x^2/k^2) dx = 2` with `a = sqrt 3`.
fn uniform_psi2() -> f64 {
    let a = 3f64.sqrt();
    let gl = gauss_legendre(64);
    let expectation = |k: f64| -> f64 {
        gl.iter()
            .map(|&(x, w)| {
                let t = 0.5 * a * (x + 1.0);
                0.5 * w * (t * t / (k * k)).exp()
            })
            .sum()
    };
    let (mut lo, mut hi) = (0.5, 5.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if expectation(mid) > 2.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

#[derive(Clone, Debug, Serialize)]
pub struct MgfPoint {
    pub t: f64,
    pub empirical: f64,
    pub bound: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MgfCheck {
    pub b: f64,
    pub points: Vec<MgfPoint>,
    /// `max_t (empirical MGF - e^{b^2 t^2 / 2})`.
    pub max_excess: f64,
    /// Excess measured in standard errors at the worst point.
    pub max_excess_in_stderr: f64,
}

/// Compares the empirical MGF of the real component law against
/// `e^{b^2 t^2 / 2}` with `b = scale` (the smallest constant valid for all
/// three built-in laws).
pub fn mgf_domination_check(spec: &CoeffSpec, t_grid: &[f64], trials: usize, seed: u64) -> Result<MgfCheck> {
    if t_grid.iter().any(|t| !t.is_finite() || t.abs() > 5.0) {
        return Err(Error::InputDomain("t grid must be finite and within [-5, 5]".into()));
    }
    if trials < 2 {
        return Err(Error::InputDomain("need at least two trials".into()));
    }
    let real = CoeffSpec { field: Field::Real, ..spec.clone() };
    let xs: Vec<f64> = sample(&real, seed, trials).into_iter().map(|c| c.re).collect();
    let b = real.scale.abs();
    let mut points = Vec::with_capacity(t_grid.len());
    let mut max_excess = f64::NEG_INFINITY;
    let mut max_excess_in_stderr = f64::NEG_INFINITY;
    for &t in t_grid {
        let vals: Vec<f64> = xs.iter().map(|x| (t * x).exp()).collect();
        let mean = vals.iter().sum::<f64>() / trials as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (trials as f64 - 1.0);
        let stderr = (var / trials as f64).sqrt();
        let bound = (0.5 * b * b * t * t).exp();
        let excess = mean - bound;
        max_excess = max_excess.max(excess);
        let z = if stderr > 0.0 { excess / stderr } else if excess > 0.0 { f64::INFINITY } else { 0.0 };
        max_excess_in_stderr = max_excess_in_stderr.max(z);
        points.push(MgfPoint { t, empirical: mean, bound, stderr });
    }
    Ok(MgfCheck { b, points, max_excess, max_excess_in_stderr })
}

/// Spectral and Frobenius norms of a Hermitian matrix.
pub fn hermitian_norms(a: &DMatrix<Complex64>) -> Result<(f64, f64)> {
    let hs = a.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if a.nrows() == 0 {
        return Ok((0.0, 0.0));
    }
    let eig = SymmetricEigen::try_new(a.clone(), 1e-15, 10_000).ok_or_else(|| Error::Eigen("hermitian norm".into()))?;
    let op = eig.eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max);
    Ok((op, hs))
}

fn check_hermitian(a: &DMatrix<Complex64>) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::InputDomain("matrix must be square".into()));
    }
    let scale = a.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1.0);
    for j in 0..a.nrows() {
        for k in 0..a.ncols() {
            if (a[(j, k)] - a[(k, j)].conj()).norm() > 1e-10 * scale {
                return Err(Error::InputDomain("matrix must be Hermitian".into()));
            }
        }
    }
    Ok(())
}

/// `X^* A X` for one coefficient vector.
pub fn quadratic_form(a: &DMatrix<Complex64>, x: &[Complex64]) -> f64 {
    let d = x.len();
    let mut s = Complex64::new(0.0, 0.0);
    for j in 0..d {
        let mut row = Complex64::new(0.0, 0.0);
        for k in 0..d {
            row += a[(j, k)] * x[k];
        }
        s += x[j].conj() * row;
    }
    s.re
}

#[derive(Clone, Debug, Serialize)]
pub struct HWReport {
    pub matrix_id: String,
    pub law: String,
    pub trials: usize,
    pub thresholds: Vec<f64>,
    pub empirical_tails: Vec<f64>,
    pub bound_values: Vec<f64>,
    /// `None` when no threshold had a positive empirical tail.
    pub fitted_c: Option<f64>,
    pub psi2: f64,
    pub op_norm: f64,
    pub hs_norm: f64,
    pub mean: f64,
    pub variance: f64,
}

impl HWReport {
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,empirical_tail,bound_at_fitted_c")?;
        for ((t, e), b) in self.thresholds.iter().zip(&self.empirical_tails).zip(&self.bound_values) {
            writeln!(out, "{},{},{}", fmt17(*t), fmt17(*e), fmt17(*b))?;
        }
        Ok(())
    }
}

/// Exponent `min(t^2 / (K^4 ||A||_HS^2), t / (K^2 ||A||))` of the
/// Hanson-Wright bound.
pub fn hw_exponent(t: f64, psi2: f64, op: f64, hs: f64) -> f64 {
    let k2 = psi2 * psi2;
    let a = if hs > 0.0 { t * t / (k2 * k2 * hs * hs) } else { f64::INFINITY };
    let b = if op > 0.0 { t / (k2 * op) } else { f64::INFINITY };
    a.min(b)
}

/// Draws of the centered statistic `X^* A X - Tr(A)`.
pub fn hw_statistics(a: &DMatrix<Complex64>, spec: &CoeffSpec, trials: usize, seed: u64) -> Result<Vec<f64>> {
    check_hermitian(a)?;
    let n = a.nrows();
    let trace: f64 = (0..n).map(|j| a[(j, j)].re).sum();
    let scale2 = spec.scale * spec.scale;
    Ok((0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let x: Vec<Complex64> = (0..n).map(|_| spec.draw(&mut rng)).collect();
            quadratic_form(a, &x) - scale2 * trace
        })
        .collect())
}

pub fn hw_experiment(
    a: &DMatrix<Complex64>,
    matrix_id: &str,
    spec: &CoeffSpec,
    trials: usize,
    t_list: &[f64],
    seed: u64,
) -> Result<HWReport> {
    if trials < 1000 {
        return Err(Error::InputDomain("Hanson-Wright experiments need at least 1000 trials".into()));
    }
    let stats = hw_statistics(a, spec, trials, seed)?;
    let psi2 = psi2_norm(spec)?;
    let (op, hs) = hermitian_norms(a)?;
    let empirical_tails: Vec<f64> = t_list
        .iter()
        .map(|&t| stats.iter().filter(|s| s.abs() > t).count() as f64 / trials as f64)
        .collect();
    let fitted_c = t_list
        .iter()
        .zip(&empirical_tails)
        .filter(|(_, &p)| p > 0.0)
        .map(|(&t, &p)| -(p / 2.0).ln() / hw_exponent(t, psi2, op, hs))
        .fold(None, |acc: Option<f64>, c| Some(acc.map_or(c, |a| a.min(c))));
    let bound_values = t_list
        .iter()
        .map(|&t| match fitted_c {
            Some(c) => 2.0 * (-c * hw_exponent(t, psi2, op, hs)).exp(),
            None => f64::NAN,
        })
        .collect();
    let mean = stats.iter().sum::<f64>() / trials as f64;
    let variance = stats.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (trials as f64 - 1.0);
    Ok(HWReport {
        matrix_id: matrix_id.to_string(),
        law: spec.label(),
        trials,
        thresholds: t_list.to_vec(),
        empirical_tails,
        bound_values,
        fitted_c,
        psi2,
        op_norm: op,
        hs_norm: hs,
        mean,
        variance,
    })
}

/// Real `2N x 2N` form `[[Re A, -Im A], [Im A, Re A]]` of a Hermitian matrix.
pub fn realify(a: &DMatrix<Complex64>) -> DMatrix<f64> {
    let n = a.nrows();
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    for j in 0..n {
        for k in 0..n {
            let c = a[(j, k)];
            out[(j, k)] = c.re;
            out[(j, k + n)] = -c.im;
            out[(j + n, k)] = c.im;
            out[(j + n, k + n)] = c.re;
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockReduction {
    pub direct_mean: f64,
    pub direct_var: f64,
    pub block_mean: f64,
    pub block_var: f64,
    pub mean_stderr: f64,
    pub var_stderr: f64,
    pub op_ratio: f64,
    pub hs_ratio: f64,
}

impl BlockReduction {
    pub fn moments_match(&self, k: f64) -> bool {
        (self.direct_mean - self.block_mean).abs() <= k * self.mean_stderr
            && (self.direct_var - self.block_var).abs() <= k * self.var_stderr
    }
}

fn mean_var_m4(v: &[f64]) -> (f64, f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let m4 = v.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    (mean, var, m4)
}

/// Compares `X^* A X` for complex `X` with `x^T A_re x` for the stacked real
/// vector of independent components, drawn from an unrelated stream.
pub fn complex_block_check(a: &DMatrix<Complex64>, spec: &CoeffSpec, trials: usize, seed: u64) -> Result<BlockReduction> {
    if spec.field != Field::Complex {
        return Err(Error::InputDomain("block reduction needs a complex coefficient spec".into()));
    }
    check_hermitian(a)?;
    let n = a.nrows();
    let direct: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let x: Vec<Complex64> = (0..n).map(|_| spec.draw(&mut rng)).collect();
            quadratic_form(a, &x)
        })
        .collect();
    let real = realify(a);
    let part = CoeffSpec { field: Field::Real, scale: spec.scale / SQRT_2, ..spec.clone() };
    let block_seed = seed ^ 0x9e37_79b9_7f4a_7c15;
    let block: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(block_seed, t);
            let x: Vec<f64> = (0..2 * n).map(|_| part.draw(&mut rng).re).collect();
            let mut s = 0.0;
            for j in 0..2 * n {
                let mut row = 0.0;
                for k in 0..2 * n {
                    row += real[(j, k)] * x[k];
                }
                s += x[j] * row;
            }
            s
        })
        .collect();
    let (dm, dv, d4) = mean_var_m4(&direct);
    let (bm, bv, b4) = mean_var_m4(&block);
    let t = trials as f64;
    let (op, hs) = hermitian_norms(a)?;
    let real_c = real.map(|x| Complex64::new(x, 0.0));
    let (rop, rhs) = hermitian_norms(&real_c)?;
    Ok(BlockReduction {
        direct_mean: dm,
        direct_var: dv,
        block_mean: bm,
        block_var: bv,
        mean_stderr: (dv / t + bv / t).sqrt(),
        var_stderr: (((d4 - dv * dv) + (b4 - bv * bv)) / t).sqrt(),
        op_ratio: if op > 0.0 { rop / op } else { 1.0 },
        hs_ratio: if hs > 0.0 { rhs / hs } else { std::f64::consts::SQRT_2 },
    })
}

/// Monte Carlo estimate of `(E|X|^p)^{1/p}` for a real component.
pub fn moment_norm(spec: &CoeffSpec, p: u32, trials: usize, seed: u64) -> f64 {
    let real = CoeffSpec { field: Field::Real, ..spec.clone() };
    let s: f64 = sample(&real, seed, trials).iter().map(|c| c.re.abs().powi(p as i32)).sum();
    (s / trials as f64).powf(1.0 / p as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::normal_cdf;

    fn stats(v: &[f64]) -> (f64, f64) {
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        (m, v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0))
    }

    #[test]
    fn rademacher_values_and_mean() {
        let xs: Vec<f64> = sample(&CoeffSpec::real(Law::Rademacher), 11, 100_000).iter().map(|c| c.re).collect();
        assert!(xs.iter().all(|&x| x == 1.0 || x == -1.0));
        assert!(stats(&xs).0.abs() < 0.02);
    }

    #[test]
    fn uniform_support_and_variance() {
        let xs: Vec<f64> = sample(&CoeffSpec::real(Law::UniformSym), 12, 100_000).iter().map(|c| c.re).collect();
        let a = 3f64.sqrt();
        assert!(xs.iter().all(|&x| (-a..=a).contains(&x)));
        assert!((stats(&xs).1 - 1.0).abs() < 0.02);
    }

    #[test]
    fn gaussian_two_sigma_fraction() {
        let xs = sample(&CoeffSpec::real(Law::StdGaussian), 13, 1_000_000);
        let frac = xs.iter().filter(|c| c.re.abs() > 2.0).count() as f64 / xs.len() as f64;
        let oracle = 2.0 * (1.0 - normal_cdf(2.0));
        assert!((oracle - 0.0455).abs() < 1e-4);
        assert!((frac - oracle).abs() < 0.001);
    }

    #[test]
    fn unit_variance_and_zero_mean_for_all_laws() {
        let n = 1_000_000;
        for law in [Law::StdGaussian, Law::Rademacher, Law::UniformSym] {
            for field in [Field::Real, Field::Complex] {
                let spec = CoeffSpec::new(law.clone(), field);
                let xs = sample(&spec, 21, n);
                let mean = xs.iter().sum::<Complex64>() / n as f64;
                let second: Vec<f64> = xs.iter().map(|c| c.norm_sqr()).collect();
                let (m2, v2) = stats(&second);
                // 5 sigma bands
                assert!(mean.norm() < 5.0 / (n as f64).sqrt(), "{}", spec.label());
                assert!((m2 - 1.0).abs() < 5.0 * (v2 / n as f64).sqrt() + 1e-12, "{}", spec.label());
                if field == Field::Complex {
                    let re: Vec<f64> = xs.iter().map(|c| c.re).collect();
                    let im: Vec<f64> = xs.iter().map(|c| c.im).collect();
                    let cov = re.iter().zip(&im).map(|(a, b)| a * b).sum::<f64>() / n as f64;
                    assert!(cov.abs() < 5.0 * 0.5 / (n as f64).sqrt());
                }
            }
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let spec = CoeffSpec::complex(Law::StdGaussian);
        assert_eq!(sample(&spec, 5, 100), sample(&spec, 5, 100));
        assert_ne!(sample(&spec, 5, 100), sample(&spec, 6, 100));
    }

    #[test]
    fn psi2_values() {
        let r = psi2_norm(&CoeffSpec::real(Law::Rademacher)).unwrap();
        assert!((r - 1.2011224087864498).abs() < 1e-12);
        let g = psi2_norm(&CoeffSpec::real(Law::StdGaussian)).unwrap();
        assert!((g - 1.632_993_161_855_452).abs() < 1e-12);
        let r2 = psi2_norm(&CoeffSpec::real(Law::Rademacher).scaled(2.0)).unwrap();
        assert!((r2 - 2.0 * r).abs() < 1e-12);
        // uniform: E exp(X^2/k^2) = 2 at the returned k, checked by midpoint sums
        let k = psi2_norm(&CoeffSpec::real(Law::UniformSym)).unwrap();
        let a = 3f64.sqrt();
        let m = 200_000;
        let e: f64 = (0..m).map(|i| (((i as f64 + 0.5) / m as f64 * a).powi(2) / (k * k)).exp()).sum::<f64>() / m as f64;
        assert!((e - 2.0).abs() < 1e-8);
        let custom = Law::Custom { name: "c".into(), bound: None, sampler: Arc::new(|_| 0.0) };
        assert!(matches!(psi2_norm(&CoeffSpec::real(custom)), Err(Error::UnsupportedLaw(_))));
    }

    #[test]
    fn mgf_domination() {
        let grid = [-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0];
        for law in [Law::StdGaussian, Law::Rademacher, Law::UniformSym] {
            let check = mgf_domination_check(&CoeffSpec::real(law), &grid, 200_000, 3).unwrap();
            assert!(check.max_excess_in_stderr <= 3.0, "{check:?}");
            let zero = check.points.iter().find(|p| p.t == 0.0).unwrap();
            assert_eq!(zero.empirical, 1.0);
            assert_eq!(zero.bound, 1.0);
        }
        for t in [0.3f64, 1.0, 2.5, 4.0] {
            assert!(t.cosh() <= (t * t / 2.0).exp());
        }
        assert!(mgf_domination_check(&CoeffSpec::real(Law::Rademacher), &[6.0], 10, 0).is_err());
    }

    #[test]
    fn hw_zero_matrix_and_rademacher_identity() {
        let z = DMatrix::<Complex64>::zeros(10, 10);
        let r = hw_experiment(&z, "zero", &CoeffSpec::real(Law::StdGaussian), 1000, &[0.5, 1.0], 1).unwrap();
        assert!(r.empirical_tails.iter().all(|&p| p == 0.0));
        assert!(r.fitted_c.is_none());

        let id = DMatrix::<Complex64>::identity(50, 50);
        let r = hw_experiment(&id, "identity", &CoeffSpec::real(Law::Rademacher), 2000, &[0.5, 5.0, 20.0], 2).unwrap();
        assert!(r.empirical_tails.iter().all(|&p| p == 0.0));
        assert!(hw_experiment(&id, "identity", &CoeffSpec::real(Law::Rademacher), 10, &[1.0], 2).is_err());
    }

    #[test]
    fn realified_norms() {
        let a = DMatrix::from_fn(4, 4, |j, k| {
            if j == k {
                Complex64::new(j as f64, 0.0)
            } else if j < k {
                Complex64::new(0.3, 0.2 * (j + k) as f64)
            } else {
                Complex64::new(0.3, -0.2 * (j + k) as f64)
            }
        });
        let (op, hs) = hermitian_norms(&a).unwrap();
        let r = realify(&a).map(|x| Complex64::new(x, 0.0));
        let (rop, rhs) = hermitian_norms(&r).unwrap();
        assert!((rop - op).abs() < 1e-12);
        assert!((rhs - SQRT_2 * hs).abs() < 1e-12);
    }
}
