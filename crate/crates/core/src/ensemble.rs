//! Random polynomials `f = sum_j X_j P_j` over an orthonormal basis and the
//! mass statistic `int g |f|^2 e^{-2n phi}`.

use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fmt17;
use crate::orthobasis::{build_onb, Basis};
use crate::quadrature::{build_rule_with, QuadratureRule, RuleOptions};
use crate::randvar::{quadratic_form, trial_rng, CoeffSpec};
use crate::toeplitz::{build_toeplitz, Symbol, ToeplitzMatrix};
use crate::weights::{reference_equilibrium, EquilibriumRef, WeightSpec};

#[derive(Clone, Debug, Serialize)]
pub struct RandomPolynomial {
    pub coeffs: Vec<Complex64>,
    pub seed: u64,
    pub trial: u64,
    pub n: u32,
    pub basis_fingerprint: u64,
}

impl RandomPolynomial {
    /// `||f||^2 = sum |X_j|^2`.
    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn from_coeffs(b: &Basis, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != b.len() {
            return Err(Error::Contract(format!("{} coefficients for a basis of size {}", coeffs.len(), b.len())));
        }
        Ok(Self { coeffs, seed: 0, trial: 0, n: b.n(), basis_fingerprint: b.fingerprint() })
    }

    /// `f(z)`, or an overflow error where plain values exceed `f64`.
    pub fn eval(&self, b: &Basis, z: &[Complex64]) -> Result<Complex64> {
        self.check(b)?;
        let v = b.eval(z)?;
        Ok(v.iter().zip(&self.coeffs).map(|(p, c)| p * c).sum())
    }

    /// `f(z) e^{-n phi(z)}`.
    pub fn eval_weighted(&self, b: &Basis, z: &[Complex64]) -> Result<Complex64> {
        self.check(b)?;
        let v = b.eval_weighted(z)?;
        Ok(v.iter().zip(&self.coeffs).map(|(p, c)| p * c).sum())
    }

    fn check(&self, b: &Basis) -> Result<()> {
        if self.basis_fingerprint != b.fingerprint() {
            return Err(Error::Contract("polynomial was sampled against a different basis".into()));
        }
        Ok(())
    }
}

pub fn sample_polynomial(b: &Basis, spec: &CoeffSpec, seed: u64) -> RandomPolynomial {
    sample_polynomial_trial(b, spec, seed, 0)
}

pub fn sample_polynomial_trial(b: &Basis, spec: &CoeffSpec, seed: u64, trial: u64) -> RandomPolynomial {
    let mut rng = trial_rng(seed, trial);
    let coeffs = (0..b.len()).map(|_| spec.draw(&mut rng)).collect();
    RandomPolynomial { coeffs, seed, trial, n: b.n(), basis_fingerprint: b.fingerprint() }
}

/// Basis values at every quadrature node, cached for repeated direct
/// integration of `g |f|^2 e^{-2n phi}`.
pub struct MassEvaluator {
    d: usize,
    fingerprint: u64,
    /// `w_i g(z_i)` per node.
    weights: Vec<f64>,
    /// Row-major `nodes x d` weighted basis values.
    values: Vec<Complex64>,
}

impl MassEvaluator {
    pub fn new(b: &Basis, g: &Symbol, rule: &QuadratureRule) -> Result<Self> {
        if rule.target_n() != b.n() || rule.dim() != b.dim() {
            return Err(Error::Contract("rule built for a different n or dimension".into()));
        }
        if rule.max_degree() < b.degree() {
            return Err(Error::Capacity { degree: b.degree(), capacity: rule.max_degree() });
        }
        let split;
        let rule = match g.jump_radius() {
            Some(r) if b.dim() == 1 => {
                split = rule.split_at(&[r]);
                &split
            }
            _ => rule,
        };
        let phases = rule.phases();
        let aw = rule.angular_weight();
        let groups = rule.groups();
        let per_group: Vec<Result<(Vec<f64>, Vec<Complex64>)>> = groups
            .par_iter()
            .map(|grp| {
                let mut ws = Vec::new();
                let mut vs = Vec::new();
                let mut err = None;
                rule.for_each_angle(grp, &phases, |z, _| {
                    if err.is_some() {
                        return;
                    }
                    let gv = g.eval(z);
                    if gv == 0.0 {
                        return;
                    }
                    match b.eval_weighted(z) {
                        Ok(v) => {
                            ws.push(grp.weight * aw * gv);
                            vs.extend(v);
                        }
                        Err(e) => err = Some(e),
                    }
                });
                match err {
                    Some(e) => Err(e),
                    None => Ok((ws, vs)),
                }
            })
            .collect();
        let mut weights = Vec::new();
        let mut values = Vec::new();
        for r in per_group {
            let (w, v) = r?;
            weights.extend(w);
            values.extend(v);
        }
        Ok(Self { d: b.len(), fingerprint: b.fingerprint(), weights, values })
    }

    pub fn node_count(&self) -> usize {
        self.weights.len()
    }

    pub fn integrate(&self, f: &RandomPolynomial) -> Result<f64> {
        if f.basis_fingerprint != self.fingerprint {
            return Err(Error::Contract("polynomial was sampled against a different basis".into()));
        }
        Ok(self
            .weights
            .iter()
            .zip(self.values.chunks_exact(self.d.max(1)))
            .map(|(w, row)| {
                let v: Complex64 = row.iter().zip(&f.coeffs).map(|(p, c)| p * c).sum();
                w * v.norm_sqr()
            })
            .sum())
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct MassEvaluation {
    /// `X^* A X`.
    pub quadratic: f64,
    /// Direct quadrature of `g |f|^2 e^{-2n phi}`.
    pub quadrature: f64,
}

/// `int g |f|^2 e^{-2n phi}` computed both ways; the two must agree to
/// `1e-8 d_n`.
pub fn mass_statistic(f: &RandomPolynomial, b: &Basis, g: &Symbol, t: &ToeplitzMatrix, rule: &QuadratureRule) -> Result<MassEvaluation> {
    let eval = MassEvaluator::new(b, g, rule)?;
    mass_statistic_cached(f, t, &eval)
}

pub fn mass_statistic_cached(f: &RandomPolynomial, t: &ToeplitzMatrix, eval: &MassEvaluator) -> Result<MassEvaluation> {
    if t.basis_fingerprint() != f.basis_fingerprint {
        return Err(Error::Contract("Toeplitz matrix and polynomial use different bases".into()));
    }
    let quadratic = quadratic_form(t.entries(), &f.coeffs);
    let quadrature = eval.integrate(f)?;
    let tol = 1e-8 * t.dim_n() as f64;
    if (quadratic - quadrature).abs() > tol {
        return Err(Error::Numeric {
            location: "quadratic form against direct quadrature".into(),
            value: format!("{quadratic} vs {quadrature}"),
        });
    }
    Ok(MassEvaluation { quadratic, quadrature })
}

#[derive(Clone, Debug, Serialize)]
pub struct MassReport {
    pub n: u32,
    pub d_n: usize,
    pub symbol: String,
    pub law: String,
    pub seed: u64,
    pub trials: usize,
    pub eps: f64,
    pub reference: f64,
    /// `X^* A X / d_n` per trial.
    pub values: Vec<f64>,
    pub mean: f64,
    pub std_dev: f64,
    /// Fraction of trials with `|value - reference| > eps`.
    pub exceedance: f64,
    pub deviation_q50: f64,
    pub deviation_q95: f64,
}

impl MassReport {
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "trial,value,deviation")?;
        for (k, v) in self.values.iter().enumerate() {
            writeln!(out, "{k},{},{}", fmt17(*v), fmt17(v - self.reference))?;
        }
        Ok(())
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// `trials` independent draws of `X^* A X / d_n`, trial `k` on stream `k`.
pub fn concentration_experiment(
    b: &Basis,
    t: &ToeplitzMatrix,
    spec: &CoeffSpec,
    trials: usize,
    eps: f64,
    seed: u64,
    reference: f64,
) -> Result<MassReport> {
    if t.basis_fingerprint() != b.fingerprint() {
        return Err(Error::Contract("Toeplitz matrix was built from a different basis".into()));
    }
    if trials == 0 || !(eps > 0.0) {
        return Err(Error::InputDomain("trials must be positive and eps > 0".into()));
    }
    let d = b.len() as f64;
    let values: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|k| {
            let f = sample_polynomial_trial(b, spec, seed, k);
            quadratic_form(t.entries(), &f.coeffs) / d
        })
        .collect();
    let mean = values.iter().sum::<f64>() / trials as f64;
    let std_dev = if trials > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (trials as f64 - 1.0)).sqrt()
    } else {
        0.0
    };
    let mut dev: Vec<f64> = values.iter().map(|v| (v - reference).abs()).collect();
    let exceedance = dev.iter().filter(|&&x| x > eps).count() as f64 / trials as f64;
    dev.sort_by(f64::total_cmp);
    Ok(MassReport {
        n: b.n(),
        d_n: b.len(),
        symbol: t.symbol_id().to_string(),
        law: spec.label(),
        seed,
        trials,
        eps,
        reference,
        values,
        mean,
        std_dev,
        exceedance,
        deviation_q50: quantile(&dev, 0.5),
        deviation_q95: quantile(&dev, 0.95),
    })
}

/// Haar-distributed `d x d` unitary: QR of a complex Ginibre matrix with the
/// phases of `diag(R)` moved into `Q`.
pub fn haar_unitary(d: usize, rng: &mut dyn RngCore) -> DMatrix<Complex64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut g = DMatrix::<Complex64>::zeros(d, d);
    for j in 0..d {
        for k in 0..d {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            g[(j, k)] = Complex64::new(s * re, s * im);
        }
    }
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..d {
        let rkk = r[(k, k)];
        let ph = if rkk.norm() > 0.0 { rkk / rkk.norm() } else { Complex64::new(1.0, 0.0) };
        for j in 0..d {
            q[(j, k)] *= ph;
        }
    }
    q
}

/// The basis `F_j = sum_k U_jk P_k` for a Haar unitary `U` drawn from `seed`.
pub fn haar_rotate(b: &Basis, seed: u64) -> Basis {
    haar_rotate_trial(b, seed, 0)
}

pub fn haar_rotate_trial(b: &Basis, seed: u64, trial: u64) -> Basis {
    let mut rng = trial_rng(seed, trial);
    let u = haar_unitary(b.len(), &mut rng);
    rotate_basis(b, &u)
}

pub fn rotate_basis(b: &Basis, u: &DMatrix<Complex64>) -> Basis {
    b.with_coeffs(u * b.normalized_coeffs())
}

#[derive(Clone, Debug, Serialize)]
pub struct OnbMassProfile {
    pub masses: Vec<f64>,
    pub reference: f64,
    pub tol_mass: f64,
    /// Fraction of `j` with `|m_j - reference| < tol_mass`.
    pub fraction: f64,
    pub total: f64,
}

/// Masses `m_j = int g |F_j|^2 e^{-2n phi}` of every basis element.
pub fn onb_mass_profile(b: &Basis, g: &Symbol, rule: &QuadratureRule, eq: &EquilibriumRef, tol_mass: f64) -> Result<OnbMassProfile> {
    let t = build_toeplitz(b, g, rule)?;
    let masses = t.diagonal();
    let reference = g.equilibrium_moment(eq, 1)?;
    let hits = masses.iter().filter(|m| (*m - reference).abs() < tol_mass).count();
    Ok(OnbMassProfile {
        fraction: hits as f64 / masses.len().max(1) as f64,
        total: masses.iter().sum(),
        masses,
        reference,
        tol_mass,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepPoint {
    pub n: u32,
    pub d_n: usize,
    /// Mean over trials of `|X^* A X / d_n - reference|`.
    pub mean_deviation: f64,
    /// Average of `mean_deviation` over this and all smaller `n`.
    pub running_average: f64,
}

/// Deviation of the normalized mass statistic along a sequence of `n`.
/// Trial `k` at level `n` draws from stream `(n << 32) | k`.
pub fn mass_sweep(
    w: &WeightSpec,
    g: &Symbol,
    spec: &CoeffSpec,
    n_list: &[u32],
    trials: usize,
    seed: u64,
    opts: &RuleOptions,
) -> Result<Vec<SweepPoint>> {
    let eq = reference_equilibrium(w)?;
    let reference = g.equilibrium_moment(&eq, 1)?;
    let mut out: Vec<SweepPoint> = Vec::with_capacity(n_list.len());
    let mut acc = 0.0;
    for (i, &n) in n_list.iter().enumerate() {
        let rule = build_rule_with(w, n, n as usize + 2, opts)?;
        let b = build_onb(w, n, &rule)?;
        let t = build_toeplitz(&b, g, &rule)?;
        let d = b.len() as f64;
        let devs: Vec<f64> = (0..trials as u64)
            .into_par_iter()
            .map(|k| {
                let f = sample_polynomial_trial(&b, spec, seed, ((n as u64) << 32) | k);
                (quadratic_form(t.entries(), &f.coeffs) / d - reference).abs()
            })
            .collect();
        let mean_deviation = devs.iter().sum::<f64>() / trials.max(1) as f64;
        acc += mean_deviation;
        out.push(SweepPoint { n, d_n: b.len(), mean_deviation, running_average: acc / (i + 1) as f64 });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::build_rule;
    use crate::randvar::Law;

    fn setup(n: u32) -> (WeightSpec, QuadratureRule, Basis) {
        let w = WeightSpec::gaussian_half(1).unwrap();
        let rule = build_rule(&w, n, n as usize + 2, 1e-12).unwrap();
        let b = build_onb(&w, n, &rule).unwrap();
        (w, rule, b)
    }

    #[test]
    fn central_identity_for_several_symbols() {
        let (_, rule, b) = setup(12);
        let spec = CoeffSpec::complex(Law::StdGaussian);
        for g in [Symbol::one(), Symbol::abs2(), Symbol::gauss_bump(), Symbol::disk_indicator(0.7).unwrap()] {
            let t = build_toeplitz(&b, &g, &rule).unwrap();
            let eval = MassEvaluator::new(&b, &g, &rule).unwrap();
            for k in 0..5 {
                let f = sample_polynomial_trial(&b, &spec, 9, k);
                let m = mass_statistic_cached(&f, &t, &eval).unwrap();
                assert!((m.quadratic - m.quadrature).abs() <= 1e-8 * b.len() as f64, "{}", g.id());
            }
        }
    }

    #[test]
    fn unit_symbol_gives_norm_squared() {
        let (_, rule, b) = setup(8);
        let t = build_toeplitz(&b, &Symbol::one(), &rule).unwrap();
        let f = sample_polynomial(&b, &CoeffSpec::real(Law::Rademacher), 4);
        let m = mass_statistic(&f, &b, &Symbol::one(), &t, &rule).unwrap();
        assert!((m.quadratic - f.norm_sq()).abs() < 1e-10);
        assert!((f.norm_sq() - b.len() as f64).abs() < 1e-12);
    }

    #[test]
    fn mismatched_basis_is_rejected() {
        let (_, rule, b) = setup(6);
        let (_, _, other) = setup(7);
        let t = build_toeplitz(&b, &Symbol::one(), &rule).unwrap();
        let f = sample_polynomial(&other, &CoeffSpec::real(Law::Rademacher), 1);
        assert!(matches!(mass_statistic(&f, &b, &Symbol::one(), &t, &rule), Err(Error::Contract(_))));
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = trial_rng(3, 0);
        let u = haar_unitary(15, &mut rng);
        let e = u.adjoint() * &u - DMatrix::<Complex64>::identity(15, 15);
        assert!(e.iter().map(|c| c.norm()).fold(0.0, f64::max) < 1e-12);
    }

    #[test]
    fn rotated_basis_keeps_trace_and_orthonormality() {
        let (_, rule, b) = setup(10);
        let rot = haar_rotate(&b, 17);
        let t0 = build_toeplitz(&b, &Symbol::abs2(), &rule).unwrap();
        let t1 = build_toeplitz(&rot, &Symbol::abs2(), &rule).unwrap();
        assert!((t0.trace() - t1.trace()).abs() < 1e-10);
        let g = build_toeplitz(&rot, &Symbol::one(), &rule).unwrap();
        let e = g.entries() - DMatrix::<Complex64>::identity(b.len(), b.len());
        assert!(e.iter().map(|c| c.norm()).fold(0.0, f64::max) < 1e-10);
    }

    #[test]
    fn concentration_report_is_deterministic() {
        let (w, rule, b) = setup(20);
        let eq = reference_equilibrium(&w).unwrap();
        let g = Symbol::abs2();
        let t = build_toeplitz(&b, &g, &rule).unwrap();
        let reference = g.equilibrium_moment(&eq, 1).unwrap();
        assert!((reference - 0.5).abs() < 1e-12);
        let spec = CoeffSpec::complex(Law::Rademacher);
        let a = concentration_experiment(&b, &t, &spec, 50, 0.1, 5, reference).unwrap();
        let c = concentration_experiment(&b, &t, &spec, 50, 0.1, 5, reference).unwrap();
        assert_eq!(a.values, c.values);
        // E[X^*AX] = Tr A = (d+1)/(2n) for |z|^2
        let expected = (b.len() as f64 + 1.0) / (2.0 * 20.0);
        assert!((t.trace() / b.len() as f64 - expected).abs() < 1e-10);
        // |X_j|^2 = 1 for complex Rademacher and A is diagonal
        assert!((a.mean - expected).abs() < 1e-12);
        assert!(a.std_dev < 1e-12);
    }

    #[test]
    fn sweep_deviation_shrinks() {
        let w = WeightSpec::gaussian_half(1).unwrap();
        let pts = mass_sweep(&w, &Symbol::abs2(), &CoeffSpec::complex(Law::StdGaussian), &[5, 40], 200, 1, &RuleOptions::default()).unwrap();
        assert!(pts[1].mean_deviation < pts[0].mean_deviation);
        assert!((pts[1].running_average - 0.5 * (pts[0].mean_deviation + pts[1].mean_deviation)).abs() < 1e-15);
    }
}
