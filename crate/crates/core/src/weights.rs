//! Weight functions on `C^m` and the closed-form equilibrium data of the
//! built-in radial weights.
//!
//! The built-in weights are `phi(z) = |z|^{2p} / 2` for an integer `p >= 1`
//! (`p = 1` is the Gaussian weight). For these the weighted extremal
//! function and the equilibrium measure are explicit: the support is the
//! ball of radius `R = p^{-1/(2p)}`, and the equilibrium measure, normalized
//! to total mass one, has radial CDF `(p r^{2p})^m` on that ball.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::special::ln_factorial;

pub type WeightFn = Arc<dyn Fn(&[Complex64]) -> f64 + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightKind {
    /// `|z|^2 / 2`
    GaussianHalf,
    /// `|z|^{2p} / 2`
    RadialPower(u32),
    Custom,
}

#[derive(Clone)]
pub struct WeightSpec {
    dim: usize,
    kind: WeightKind,
    evaluator: Option<WeightFn>,
    radial: bool,
    growth_epsilon: f64,
    name: String,
}

impl fmt::Debug for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightSpec")
            .field("dim", &self.dim)
            .field("kind", &self.kind)
            .field("radial", &self.radial)
            .field("growth_epsilon", &self.growth_epsilon)
            .field("name", &self.name)
            .finish()
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 1 || dim == 2 {
        Ok(())
    } else {
        Err(Error::InputDomain(format!("dimension must be 1 or 2, got {dim}")))
    }
}

impl WeightSpec {
    pub fn gaussian_half(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            dim,
            kind: WeightKind::GaussianHalf,
            evaluator: None,
            radial: true,
            growth_epsilon: 1.0,
            name: "gaussian_half".into(),
        })
    }

    pub fn radial_power(p: u32, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        if p == 0 {
            return Err(Error::InputDomain("radial power p must be >= 1".into()));
        }
        if p == 1 {
            return Self::gaussian_half(dim);
        }
        Ok(Self {
            dim,
            kind: WeightKind::RadialPower(p),
            evaluator: None,
            radial: true,
            growth_epsilon: 1.0,
            name: format!("radial_power_{p}"),
        })
    }

    /// A user-supplied weight. `radial` asserts that `phi` depends only on the
    /// moduli `|z_1|, ..., |z_m|`; quadrature then collapses the angular sums.
    pub fn custom<F>(name: &str, dim: usize, growth_epsilon: f64, radial: bool, phi: F) -> Result<Self>
    where
        F: Fn(&[Complex64]) -> f64 + Send + Sync + 'static,
    {
        check_dim(dim)?;
        if !(growth_epsilon > 0.0) {
            return Err(Error::InputDomain("growth epsilon must be positive".into()));
        }
        let w = Self {
            dim,
            kind: WeightKind::Custom,
            evaluator: Some(Arc::new(phi)),
            radial,
            growth_epsilon,
            name: name.to_string(),
        };
        w.check_growth()?;
        Ok(w)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_radial(&self) -> bool {
        self.radial
    }

    pub fn is_builtin(&self) -> bool {
        !matches!(self.kind, WeightKind::Custom)
    }

    pub fn growth_epsilon(&self) -> f64 {
        self.growth_epsilon
    }

    /// Exponent `p` of a built-in weight.
    pub fn power(&self) -> Option<u32> {
        match self.kind {
            WeightKind::GaussianHalf => Some(1),
            WeightKind::RadialPower(p) => Some(p),
            WeightKind::Custom => None,
        }
    }

    /// `phi(z)`.
    pub fn eval(&self, z: &[Complex64]) -> Result<f64> {
        if z.len() != self.dim {
            return Err(Error::InputDomain(format!(
                "point has {} coordinates, weight expects {}",
                z.len(),
                self.dim
            )));
        }
        if z.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InputDomain("non-finite point".into()));
        }
        Ok(self.eval_unchecked(z))
    }

    pub(crate) fn eval_unchecked(&self, z: &[Complex64]) -> f64 {
        match (self.kind, &self.evaluator) {
            (WeightKind::Custom, Some(f)) => f(z),
            _ => {
                let s: f64 = z.iter().map(|c| c.norm_sqr()).sum();
                self.builtin_from_norm_sqr(s)
            }
        }
    }

    fn builtin_from_norm_sqr(&self, s: f64) -> f64 {
        let p = self.power().unwrap_or(1) as i32;
        0.5 * s.powi(p)
    }

    /// `phi` at the point whose coordinates are the given moduli. Only
    /// meaningful for radial weights.
    pub(crate) fn eval_moduli(&self, radii: &[f64]) -> f64 {
        match (self.kind, &self.evaluator) {
            (WeightKind::Custom, Some(f)) => {
                let z: Vec<Complex64> = radii.iter().map(|&r| Complex64::new(r, 0.0)).collect();
                f(&z)
            }
            _ => self.builtin_from_norm_sqr(radii.iter().map(|r| r * r).sum()),
        }
    }

    /// Sampled check of `phi(z) >= (1 + eps) log|z|` at `|z|` in `{10, 100, 1000}`.
    pub fn check_growth(&self) -> Result<()> {
        for &r in &[10.0f64, 100.0, 1000.0] {
            for k in 0..16 {
                let theta = 2.0 * PI * k as f64 / 16.0;
                let z: Vec<Complex64> = match self.dim {
                    1 => vec![Complex64::from_polar(r, theta)],
                    _ => {
                        let a = (k as f64 + 0.5) / 16.0 * PI / 2.0;
                        vec![
                            Complex64::from_polar(r * a.cos(), theta),
                            Complex64::from_polar(r * a.sin(), -2.0 * theta),
                        ]
                    }
                };
                let v = self.eval_unchecked(&z);
                if !(v >= (1.0 + self.growth_epsilon) * r.ln()) {
                    return Err(Error::InputDomain(format!(
                        "weight {} violates growth condition at |z| = {r}",
                        self.name
                    )));
                }
            }
        }
        Ok(())
    }

    /// `ln ||z^alpha||_n^2` in closed form for built-in weights.
    ///
    /// For `phi = |z|^{2p}/2` on `C^m`,
    /// `||z^a||^2 = pi^m a! Gamma((|a|+m)/p) / (p (|a|+m-1)! n^{(|a|+m)/p})`.
    pub fn log_monomial_norm_sq(&self, alpha: &[u32], n: u32) -> Option<f64> {
        let p = self.power()? as f64;
        let m = self.dim as f64;
        let total: u32 = alpha.iter().sum();
        let s = (total as f64 + m) / p;
        let a_fact: f64 = alpha.iter().map(|&a| ln_factorial(a)).sum();
        Some(
            m * PI.ln() + a_fact + crate::special::ln_gamma(s) - p.ln() - ln_factorial(total + self.dim as u32 - 1)
                - s * (n as f64).ln(),
        )
    }
}

/// Closed-form equilibrium data for a built-in weight.
#[derive(Clone, Debug, PartialEq)]
pub struct EquilibriumRef {
    dim: usize,
    power: u32,
    support_radius: f64,
}

impl EquilibriumRef {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    /// Density of the probability-normalized equilibrium measure with respect
    /// to Lebesgue measure, at a point of norm `r`.
    pub fn radial_density(&self, r: f64) -> f64 {
        if r > self.support_radius {
            return 0.0;
        }
        let p = self.power as f64;
        match self.dim {
            1 => p * p / PI * r.powf(2.0 * p - 2.0),
            _ => 2.0 * p.powi(3) / (PI * PI) * r.powf(4.0 * p - 4.0),
        }
    }

    /// `(2/pi)^m det[d^2 phi / dz_j dz_k-bar]` on the support, with no
    /// mass normalization. Its total mass is `1/m!`.
    pub fn hessian_density(&self, r: f64) -> f64 {
        match self.dim {
            1 => self.radial_density(r),
            _ => 0.5 * self.radial_density(r),
        }
    }

    /// Equilibrium mass of the ball of radius `r`.
    pub fn radial_cdf(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        if r >= self.support_radius {
            return 1.0;
        }
        let p = self.power as f64;
        (p * r.powf(2.0 * p)).powi(self.dim as i32)
    }

    /// Constant `C` in `phi_e = log|z| + C` outside the support.
    pub fn exterior_constant(&self) -> f64 {
        let p = self.power as f64;
        1.0 / (2.0 * p) + p.ln() / (2.0 * p)
    }

    pub fn extremal_radius(&self, r: f64) -> f64 {
        if r <= self.support_radius {
            0.5 * r.powi(2 * self.power as i32)
        } else {
            r.ln() + self.exterior_constant()
        }
    }

    pub fn extremal(&self, z: &[Complex64]) -> f64 {
        let r = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        self.extremal_radius(r)
    }

    /// Volume element factor: Lebesgue measure of the sphere shell, so that
    /// `dV = shell_area(r) dr` for radial integrands.
    pub fn shell_area(&self, r: f64) -> f64 {
        shell_area(self.dim, r)
    }
}

pub(crate) fn shell_area(dim: usize, r: f64) -> f64 {
    match dim {
        1 => 2.0 * PI * r,
        _ => 2.0 * PI * PI * r.powi(3),
    }
}

pub fn reference_equilibrium(w: &WeightSpec) -> Result<EquilibriumRef> {
    let power = w
        .power()
        .ok_or_else(|| Error::UnsupportedWeight(format!("{} has no closed-form equilibrium", w.name())))?;
    let p = power as f64;
    Ok(EquilibriumRef {
        dim: w.dim(),
        power,
        support_radius: p.powf(-1.0 / (2.0 * p)),
    })
}

pub fn extremal_reference(w: &WeightSpec, z: &[Complex64]) -> Result<f64> {
    w.eval(z)?;
    Ok(reference_equilibrium(w)?.extremal(z))
}
