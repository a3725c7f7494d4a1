//! Toeplitz matrices `A[j, k] = <g P_k, P_j>_n` of bounded real symbols and
//! their spectral quantities.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use nalgebra::linalg::SymmetricEigen;
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fmt17;
use crate::orthobasis::{moment_matrix, Basis};
use crate::quadrature::QuadratureRule;
use crate::special::gauss_legendre;
use crate::weights::EquilibriumRef;

pub type SymbolFn = Arc<dyn Fn(&[Complex64]) -> f64 + Send + Sync>;

#[derive(Clone, Debug, PartialEq)]
pub enum SymbolKind {
    One,
    /// `||z||^2`
    Abs2,
    /// `exp(-||z||^2)`
    GaussBump,
    /// Indicator of the open ball `||z|| < r`.
    DiskIndicator(f64),
    Custom,
}

/// A real symbol `g` together with its range.
#[derive(Clone)]
pub struct Symbol {
    kind: SymbolKind,
    id: String,
    custom: Option<SymbolFn>,
    radial: bool,
    range: (f64, f64),
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Symbol").field("id", &self.id).field("kind", &self.kind).finish()
    }
}

impl Symbol {
    pub fn one() -> Self {
        Self::builtin(SymbolKind::One, "one_".into(), (1.0, 1.0))
    }

    pub fn abs2() -> Self {
        Self::builtin(SymbolKind::Abs2, "abs2".into(), (0.0, f64::INFINITY))
    }

    pub fn gauss_bump() -> Self {
        Self::builtin(SymbolKind::GaussBump, "gauss_bump".into(), (0.0, 1.0))
    }

    pub fn disk_indicator(r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InputDomain(format!("disk radius must be positive, got {r}")));
        }
        Ok(Self::builtin(SymbolKind::DiskIndicator(r), format!("disk_indicator({r})"), (0.0, 1.0)))
    }

    fn builtin(kind: SymbolKind, id: String, range: (f64, f64)) -> Self {
        Self { kind, id, custom: None, radial: true, range }
    }

    /// A custom bounded symbol with range `[lo, hi]`. `radial` asserts that
    /// `g` depends only on the moduli of the coordinates.
    pub fn custom<F>(id: &str, lo: f64, hi: f64, radial: bool, g: F) -> Self
    where
        F: Fn(&[Complex64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            kind: SymbolKind::Custom,
            id: id.to_string(),
            custom: Some(Arc::new(g)),
            radial,
            range: (lo, hi),
        }
    }

    /// Registry lookup: `one_`, `abs2`, `gauss_bump`, `disk_indicator(r)`.
    pub fn parse(name: &str) -> Result<Self> {
        let name = name.trim();
        match name {
            "one_" => Ok(Self::one()),
            "abs2" => Ok(Self::abs2()),
            "gauss_bump" => Ok(Self::gauss_bump()),
            _ => {
                let inner = name
                    .strip_prefix("disk_indicator(")
                    .and_then(|s| s.strip_suffix(')'))
                    .ok_or_else(|| Error::Config(format!("unknown symbol '{name}'")))?;
                let r: f64 = inner
                    .trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("bad disk radius in '{name}'")))?;
                Self::disk_indicator(r)
            }
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn kind(&self) -> &SymbolKind {
        &self.kind
    }

    pub fn is_radial(&self) -> bool {
        self.radial
    }

    /// `(inf g, sup g)`.
    pub fn range(&self) -> (f64, f64) {
        self.range
    }

    /// `sup |g|`.
    pub fn sup_abs(&self) -> f64 {
        self.range.0.abs().max(self.range.1.abs())
    }

    /// Radius at which a radial symbol jumps.
    pub fn jump_radius(&self) -> Option<f64> {
        match self.kind {
            SymbolKind::DiskIndicator(r) => Some(r),
            _ => None,
        }
    }

    fn of_norm_sqr(&self, s: f64) -> f64 {
        match self.kind {
            SymbolKind::One => 1.0,
            SymbolKind::Abs2 => s,
            SymbolKind::GaussBump => (-s).exp(),
            SymbolKind::DiskIndicator(r) => {
                if s < r * r {
                    1.0
                } else {
                    0.0
                }
            }
            SymbolKind::Custom => unreachable!(),
        }
    }

    pub fn eval(&self, z: &[Complex64]) -> f64 {
        match &self.custom {
            Some(f) => f(z),
            None => self.of_norm_sqr(z.iter().map(|c| c.norm_sqr()).sum()),
        }
    }

    pub fn eval_moduli(&self, radii: &[f64]) -> f64 {
        match &self.custom {
            Some(f) => {
                let z: Vec<Complex64> = radii.iter().map(|&r| Complex64::new(r, 0.0)).collect();
                f(&z)
            }
            None => self.of_norm_sqr(radii.iter().map(|r| r * r).sum()),
        }
    }

    /// `g` as a function of the norm `||z||`; only for built-in symbols.
    pub fn eval_norm(&self, r: f64) -> Option<f64> {
        match self.kind {
            SymbolKind::Custom => None,
            _ => Some(self.of_norm_sqr(r * r)),
        }
    }

    /// `int g^k d mu_e` by radial quadrature of the equilibrium density.
    pub fn equilibrium_moment(&self, eq: &EquilibriumRef, k: u32) -> Result<f64> {
        if self.kind == SymbolKind::Custom {
            return Err(Error::Contract(format!("symbol {} has no radial profile", self.id)));
        }
        let big_r = eq.support_radius();
        let mut edges = vec![0.0, big_r];
        if let Some(j) = self.jump_radius() {
            if j < big_r {
                edges.insert(1, j);
            }
        }
        let gl = gauss_legendre(48);
        let mut total = 0.0;
        for pair in edges.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let half = 0.5 * (b - a);
            for &(x, w) in &gl {
                let r = a + half * (x + 1.0);
                let g = self.eval_norm(r).unwrap();
                total += half * w * g.powi(k as i32) * eq.radial_density(r) * eq.shell_area(r);
            }
        }
        Ok(total)
    }
}

#[derive(Clone, Debug)]
pub struct ToeplitzMatrix {
    n: u32,
    entries: DMatrix<Complex64>,
    symbol_id: String,
    symbol_sup: f64,
    symbol_range: (f64, f64),
    basis_fingerprint: u64,
}

pub fn build_toeplitz(b: &Basis, g: &Symbol, rule: &QuadratureRule) -> Result<ToeplitzMatrix> {
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
    let m = moment_matrix(rule, b.indices(), b.log_norms_sq(), Some(g))?;
    let a = b.project(&m);
    let entries = (&a + a.adjoint()) * Complex64::new(0.5, 0.0);
    Ok(ToeplitzMatrix {
        n: b.n(),
        entries,
        symbol_id: g.id().to_string(),
        symbol_sup: g.sup_abs(),
        symbol_range: g.range(),
        basis_fingerprint: b.fingerprint(),
    })
}

impl ToeplitzMatrix {
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn dim_n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn symbol_id(&self) -> &str {
        &self.symbol_id
    }

    pub fn symbol_sup(&self) -> f64 {
        self.symbol_sup
    }

    pub fn symbol_range(&self) -> (f64, f64) {
        self.symbol_range
    }

    pub fn basis_fingerprint(&self) -> u64 {
        self.basis_fingerprint
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim_n()).map(|j| self.entries[(j, j)].re).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    /// `max |A - A^*|`.
    pub fn hermitian_defect(&self) -> f64 {
        let d = self.dim_n();
        let mut worst = 0.0f64;
        for j in 0..d {
            for k in 0..d {
                worst = worst.max((self.entries[(j, k)] - self.entries[(k, j)].conj()).norm());
            }
        }
        worst
    }

    /// `Tr(A^k)`: repeated products for `k <= 8`, eigenvalues beyond.
    pub fn trace_power(&self, k: u32) -> Result<f64> {
        if k < 1 {
            return Err(Error::InputDomain("trace power needs k >= 1".into()));
        }
        if k > 8 {
            return self.trace_power_spectral(k);
        }
        let mut p = self.entries.clone();
        for _ in 1..k {
            p = &p * &self.entries;
        }
        Ok((0..p.nrows()).map(|j| p[(j, j)].re).sum())
    }

    /// `sum_j mu_j^k` over the spectrum.
    pub fn trace_power_spectral(&self, k: u32) -> Result<f64> {
        if k < 1 {
            return Err(Error::InputDomain("trace power needs k >= 1".into()));
        }
        Ok(self.spectrum()?.iter().map(|l| l.powi(k as i32)).sum())
    }

    /// Eigenvalues in ascending order.
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        let eig = SymmetricEigen::try_new(self.entries.clone(), 1e-15, 10_000)
            .ok_or_else(|| Error::Eigen(format!("{} x {} Toeplitz matrix", self.dim_n(), self.dim_n())))?;
        let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(v)
    }

    pub fn hs_norm(&self) -> f64 {
        self.entries.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn op_norm(&self) -> Result<f64> {
        let s = self.spectrum()?;
        Ok(s.first().unwrap().abs().max(s.last().unwrap().abs()))
    }

    pub fn write_spectrum_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "index,eigenvalue")?;
        for (k, l) in self.spectrum()?.iter().enumerate() {
            writeln!(out, "{k},{}", fmt17(*l))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orthobasis::build_onb;
    use crate::quadrature::build_rule;
    use crate::special::gamma_lr;
    use crate::weights::{reference_equilibrium, WeightSpec};

    fn gaussian(n: u32) -> (Basis, QuadratureRule) {
        let w = WeightSpec::gaussian_half(1).unwrap();
        let rule = build_rule(&w, n, n as usize + 2, 1e-12).unwrap();
        (build_onb(&w, n, &rule).unwrap(), rule)
    }

    #[test]
    fn registry() {
        assert_eq!(Symbol::parse("one_").unwrap().kind(), &SymbolKind::One);
        assert_eq!(Symbol::parse("abs2").unwrap().kind(), &SymbolKind::Abs2);
        assert_eq!(Symbol::parse(" gauss_bump ").unwrap().kind(), &SymbolKind::GaussBump);
        assert_eq!(Symbol::parse("disk_indicator(0.9)").unwrap().kind(), &SymbolKind::DiskIndicator(0.9));
        assert!(Symbol::parse("disk_indicator(-1)").is_err());
        assert!(Symbol::parse("nope").is_err());
    }

    #[test]
    fn constant_symbol_gives_identity() {
        let (b, rule) = gaussian(12);
        let t = build_toeplitz(&b, &Symbol::one(), &rule).unwrap();
        let d = t.dim_n();
        let id = DMatrix::<Complex64>::identity(d, d);
        assert!((t.entries() - id).iter().all(|c| c.norm() < 1e-10));
        assert!((t.trace() - d as f64).abs() < 1e-9);
        for k in [1, 2, 5, 9] {
            assert!((t.trace_power(k).unwrap() - d as f64).abs() < 1e-8);
        }
        assert!(t.spectrum().unwrap().iter().all(|l| (l - 1.0).abs() < 1e-10));
        assert!((t.hs_norm() - (d as f64).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn abs2_symbol_is_diagonal_with_gamma_ratios() {
        for n in [5u32, 10, 40] {
            let (b, rule) = gaussian(n);
            let t = build_toeplitz(&b, &Symbol::abs2(), &rule).unwrap();
            let nf = n as f64;
            for j in 0..t.dim_n() {
                for k in 0..t.dim_n() {
                    let want = if j == k { (j as f64 + 1.0) / nf } else { 0.0 };
                    assert!((t.entries()[(j, k)].re - want).abs() < 1e-10, "n={n} ({j},{k})");
                }
            }
            let d = t.dim_n() as f64;
            assert!((t.trace() - (nf + 1.0) * (nf + 2.0) / (2.0 * nf)).abs() < 1e-9);
            assert!((t.trace_power(1).unwrap() / d - (nf + 2.0) / (2.0 * nf)).abs() < 1e-10);
            let want2 = (nf + 2.0) * (2.0 * nf + 3.0) / (6.0 * nf * nf);
            assert!((t.trace_power(2).unwrap() / d - want2).abs() < 1e-10);
            let hs2: f64 = (0..t.dim_n()).map(|j| ((j as f64 + 1.0) / nf).powi(2)).sum();
            assert!((t.hs_norm().powi(2) - hs2).abs() < 1e-9);
        }
        let (b, rule) = gaussian(10);
        let t = build_toeplitz(&b, &Symbol::abs2(), &rule).unwrap();
        let s = t.spectrum().unwrap();
        for (j, l) in s.iter().enumerate() {
            assert!((l - (j as f64 + 1.0) / 10.0).abs() < 1e-10);
        }
    }

    #[test]
    fn disk_indicator_diagonal_is_incomplete_gamma() {
        let (b, rule) = gaussian(40);
        let t = build_toeplitz(&b, &Symbol::disk_indicator(1.0).unwrap(), &rule).unwrap();
        for (j, v) in t.diagonal().iter().enumerate() {
            assert!((v - gamma_lr(j as f64 + 1.0, 40.0)).abs() < 1e-10, "j={j}");
        }
    }

    #[test]
    fn trace_power_paths_agree_and_k_zero_rejected() {
        let (b, rule) = gaussian(15);
        let t = build_toeplitz(&b, &Symbol::gauss_bump(), &rule).unwrap();
        for k in 1..=8 {
            let a = t.trace_power(k).unwrap();
            let s = t.trace_power_spectral(k).unwrap();
            assert!((a - s).abs() <= 1e-6 * s.abs());
        }
        assert!(matches!(t.trace_power(0), Err(Error::InputDomain(_))));
        let spec = t.spectrum().unwrap();
        assert!((spec.iter().sum::<f64>() - t.trace()).abs() < 1e-8);
        let (lo, hi) = Symbol::gauss_bump().range();
        assert!(spec.iter().all(|&l| l >= lo - 1e-8 && l <= hi + 1e-8));
        assert!(t.op_norm().unwrap() <= t.symbol_sup() + 1e-8);
        assert!((t.hs_norm() - t.trace_power(2).unwrap().sqrt()).abs() < 1e-10);
        assert!(t.hermitian_defect() <= 1e-12);
    }

    #[test]
    fn equilibrium_moments_of_builtin_symbols() {
        let eq = reference_equilibrium(&WeightSpec::gaussian_half(1).unwrap()).unwrap();
        assert!((Symbol::abs2().equilibrium_moment(&eq, 1).unwrap() - 0.5).abs() < 1e-14);
        assert!((Symbol::abs2().equilibrium_moment(&eq, 2).unwrap() - 1.0 / 3.0).abs() < 1e-14);
        for k in 1..=3u32 {
            let want = (1.0 - (-(k as f64)).exp()) / k as f64;
            assert!((Symbol::gauss_bump().equilibrium_moment(&eq, k).unwrap() - want).abs() < 1e-14);
        }
        let disk = Symbol::disk_indicator(0.9).unwrap();
        assert!((disk.equilibrium_moment(&eq, 1).unwrap() - 0.81).abs() < 1e-14);
        let eq2 = reference_equilibrium(&WeightSpec::gaussian_half(2).unwrap()).unwrap();
        // int ||z||^2 d mu on the unit ball in C^2 with cdf r^4: int_0^1 r^2 4 r^3 dr
        assert!((Symbol::abs2().equilibrium_moment(&eq2, 1).unwrap() - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn non_radial_symbol_is_hermitian() {
        let (b, rule) = gaussian(6);
        let g = Symbol::custom("re", -3.0, 3.0, false, |z| (z[0].re).clamp(-3.0, 3.0));
        let t = build_toeplitz(&b, &g, &rule).unwrap();
        assert!(t.hermitian_defect() == 0.0);
        // Re z couples neighbouring degrees only
        assert!(t.entries()[(0, 2)].norm() < 1e-12);
        assert!(t.entries()[(0, 1)].norm() > 1e-3);
    }
}
