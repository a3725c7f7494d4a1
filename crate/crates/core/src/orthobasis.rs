//! Orthonormal bases of the polynomial space of degree `<= n` under the
//! weighted inner product `<p, q>_n = int p conj(q) e^{-2n phi} dV`.
//!
//! A basis is stored relative to the *normalized* monomials
//! `u_a = z^a / ||z^a||_n`: row `j` of `coeffs` holds the coefficients of
//! `P_j` in the `u_a`. For radial weights the `u_a` are already orthonormal
//! and the coefficient matrix is the identity. Working in this frame keeps
//! all matrix entries of order one even when the raw monomial norms span
//! hundreds of orders of magnitude.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fmt17;
use crate::quadrature::{dot_log, QuadratureRule};
use crate::toeplitz::Symbol;
use crate::weights::WeightSpec;

/// Multi-indices of total degree `<= degree` in graded lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiIndexSet {
    dim: usize,
    degree: usize,
    indices: Vec<[u32; 2]>,
}

impl MultiIndexSet {
    pub fn new(dim: usize, degree: usize) -> Self {
        let mut indices = Vec::with_capacity(Self::dimension_of(dim, degree));
        for k in 0..=degree as u32 {
            match dim {
                1 => indices.push([k, 0]),
                _ => {
                    for a in 0..=k {
                        indices.push([a, k - a]);
                    }
                }
            }
        }
        Self { dim, degree, indices }
    }

    /// `C(degree + dim, dim)`.
    pub fn dimension_of(dim: usize, degree: usize) -> usize {
        match dim {
            1 => degree + 1,
            2 => (degree + 1) * (degree + 2) / 2,
            _ => {
                let mut c = 1usize;
                for i in 1..=dim {
                    c = c * (degree + i) / i;
                }
                c
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn get(&self, k: usize) -> &[u32] {
        &self.indices[k][..self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u32]> + '_ {
        self.indices.iter().map(move |a| &a[..self.dim])
    }

    pub fn position(&self, alpha: &[u32]) -> Option<usize> {
        self.iter().position(|a| a == alpha)
    }
}

#[derive(Clone, Debug)]
pub struct Basis {
    indices: MultiIndexSet,
    coeffs: DMatrix<Complex64>,
    log_norms_sq: Vec<f64>,
    n: u32,
    weight: WeightSpec,
    identity: bool,
    triangular: bool,
    fingerprint: u64,
}

/// Builds the orthonormal basis of polynomials of degree `<= n`.
pub fn build_onb(w: &WeightSpec, n: u32, rule: &QuadratureRule) -> Result<Basis> {
    build_onb_degree(w, n, n as usize, rule)
}

/// Orthonormal basis of the polynomials of degree `<= degree` under the
/// inner product with parameter `n`.
pub fn build_onb_degree(w: &WeightSpec, n: u32, degree: usize, rule: &QuadratureRule) -> Result<Basis> {
    if rule.target_n() != n || rule.dim() != w.dim() {
        return Err(Error::Contract(format!(
            "rule built for n = {} in dimension {}, basis needs n = {n} in dimension {}",
            rule.target_n(),
            rule.dim(),
            w.dim()
        )));
    }
    if rule.max_degree() < degree {
        return Err(Error::Capacity { degree, capacity: rule.max_degree() });
    }
    let idx = MultiIndexSet::new(w.dim(), degree);
    let d = idx.len();
    if w.is_builtin() {
        let log_norms_sq = idx.iter().map(|a| w.log_monomial_norm_sq(a, n).unwrap()).collect();
        return Ok(Basis::assemble(idx, DMatrix::identity(d, d), log_norms_sq, n, w.clone(), true, true));
    }
    let log_norms_sq = rule.log_monomial_moments(&idx);
    if w.is_radial() {
        return Ok(Basis::assemble(idx, DMatrix::identity(d, d), log_norms_sq, n, w.clone(), true, true));
    }
    let gram = moment_matrix(rule, &idx, &log_norms_sq, None)?;
    let l = cholesky_lower(&gram)?;
    let inv = l
        .solve_lower_triangular(&DMatrix::identity(d, d))
        .ok_or(Error::Conditioning { pivot: 0, value: 0.0 })?;
    Ok(Basis::assemble(idx, inv.map(|c| c.conj()), log_norms_sq, n, w.clone(), false, true))
}

/// Cholesky factor of a Hermitian positive definite matrix, reporting the
/// first failing pivot.
fn cholesky_lower(a: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let d = a.nrows();
    let mut l = DMatrix::<Complex64>::zeros(d, d);
    for j in 0..d {
        let mut s = a[(j, j)].re;
        for k in 0..j {
            s -= l[(j, k)].norm_sqr();
        }
        if !(s > 1e-14) {
            return Err(Error::Conditioning { pivot: j, value: s });
        }
        let ljj = s.sqrt();
        l[(j, j)] = Complex64::new(ljj, 0.0);
        for i in (j + 1)..d {
            let mut v = a[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = v / ljj;
        }
    }
    Ok(l)
}

/// `M[b, a] = int g u_a conj(u_b) e^{-2n phi} dV` over the normalized monomials.
pub(crate) fn moment_matrix(
    rule: &QuadratureRule,
    idx: &MultiIndexSet,
    log_norms_sq: &[f64],
    symbol: Option<&Symbol>,
) -> Result<DMatrix<Complex64>> {
    let w = rule.weight();
    let d = idx.len();
    let radial = w.is_radial() && symbol.is_none_or(|s| s.is_radial());
    if radial {
        let f = symbol.map(|s| move |r: &[f64]| s.eval_moduli(r));
        let diag = match &f {
            Some(f) => rule.radial_diagonal(idx, log_norms_sq, Some(f)),
            None => rule.radial_diagonal(idx, log_norms_sq, None),
        };
        if let Some(bad) = diag.iter().find(|v| !v.is_finite()) {
            return Err(Error::Numeric { location: "radial moment".into(), value: format!("{bad}") });
        }
        let mut m = DMatrix::zeros(d, d);
        for (k, v) in diag.into_iter().enumerate() {
            m[(k, k)] = Complex64::new(v, 0.0);
        }
        return Ok(m);
    }
    let n = rule.target_n() as f64;
    let phases = rule.phases();
    let aw = rule.angular_weight();
    let m = w.dim();
    let half_norms: Vec<f64> = log_norms_sq.iter().map(|l| 0.5 * l).collect();
    let out = rule.chunked_reduce(
        |acc: &mut Result<DMatrix<Complex64>>, g| {
            let Ok(mat) = acc else { return };
            let logs: Vec<f64> = g.radii[..m].iter().map(|r| r.ln()).collect();
            let mut v = vec![Complex64::new(0.0, 0.0); d];
            let mut bad = None;
            rule.for_each_angle(g, &phases, |z, _| {
                let gv = symbol.map_or(1.0, |s| s.eval(z));
                if !gv.is_finite() {
                    bad.get_or_insert_with(|| format!("{z:?}"));
                    return;
                }
                if gv == 0.0 {
                    return;
                }
                let base = -n * w.eval_unchecked(z);
                for (k, a) in idx.iter().enumerate() {
                    let mag = (base + dot_log(a, &logs) - half_norms[k]).exp();
                    v[k] = unit_power(z, a) * mag;
                }
                let s = g.weight * aw * gv;
                for ai in 0..d {
                    let va = v[ai] * s;
                    for bi in 0..d {
                        mat[(bi, ai)] += va * v[bi].conj();
                    }
                }
            });
            if let Some(location) = bad {
                *acc = Err(Error::Numeric { location, value: "non-finite symbol".into() });
            }
        },
        |a, b| match (a, b) {
            (Ok(x), Ok(y)) => Ok(x + y),
            (Err(e), _) | (_, Err(e)) => Err(e),
        },
        || Ok(DMatrix::zeros(d, d)),
    )?;
    Ok(out)
}

/// `prod_i (z_i / |z_i|)^{a_i}` by iterated multiplication.
fn unit_power(z: &[Complex64], a: &[u32]) -> Complex64 {
    let mut out = Complex64::new(1.0, 0.0);
    for (zi, &k) in z.iter().zip(a) {
        if k == 0 {
            continue;
        }
        let r = zi.norm();
        if r == 0.0 {
            continue;
        }
        let u = zi / r;
        let mut p = Complex64::new(1.0, 0.0);
        for _ in 0..k {
            p *= u;
        }
        out *= p;
    }
    out
}

impl Basis {
    fn assemble(
        indices: MultiIndexSet,
        coeffs: DMatrix<Complex64>,
        log_norms_sq: Vec<f64>,
        n: u32,
        weight: WeightSpec,
        identity: bool,
        triangular: bool,
    ) -> Self {
        let mut h = DefaultHasher::new();
        n.hash(&mut h);
        weight.name().hash(&mut h);
        indices.degree().hash(&mut h);
        for c in coeffs.iter() {
            c.re.to_bits().hash(&mut h);
            c.im.to_bits().hash(&mut h);
        }
        for l in &log_norms_sq {
            l.to_bits().hash(&mut h);
        }
        Self {
            indices,
            coeffs,
            log_norms_sq,
            n,
            weight,
            identity,
            triangular,
            fingerprint: h.finish(),
        }
    }

    /// Same space and norms with a new coefficient matrix (e.g. a unitary
    /// change of orthonormal basis).
    pub(crate) fn with_coeffs(&self, coeffs: DMatrix<Complex64>) -> Self {
        Self::assemble(
            self.indices.clone(),
            coeffs,
            self.log_norms_sq.clone(),
            self.n,
            self.weight.clone(),
            false,
            false,
        )
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.indices.degree()
    }

    /// Dimension `d_n` of the polynomial space.
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.weight.dim()
    }

    pub fn weight(&self) -> &WeightSpec {
        &self.weight
    }

    pub fn indices(&self) -> &MultiIndexSet {
        &self.indices
    }

    /// Coefficients against the normalized monomials.
    pub fn normalized_coeffs(&self) -> &DMatrix<Complex64> {
        &self.coeffs
    }

    pub fn log_norms_sq(&self) -> &[f64] {
        &self.log_norms_sq
    }

    pub fn is_triangular(&self) -> bool {
        self.triangular
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    /// Raw monomial coefficients: row `j`, column `a` is the coefficient of `z^a` in `P_j`.
    pub fn monomial_coeffs(&self) -> DMatrix<Complex64> {
        let mut out = self.coeffs.clone();
        for (k, l) in self.log_norms_sq.iter().enumerate() {
            let s = (-0.5 * l).exp();
            out.column_mut(k).iter_mut().for_each(|c| *c *= s);
        }
        out
    }

    /// Log-magnitudes and phases of `u_a(z)`, optionally times `e^{-n phi}`.
    fn monomial_terms(&self, z: &[Complex64], weighted: bool) -> Result<(Vec<f64>, Vec<Complex64>)> {
        let phi = self.weight.eval(z)?;
        let base = if weighted { -(self.n as f64) * phi } else { 0.0 };
        let logs: Vec<f64> = z.iter().map(|c| c.norm().ln()).collect();
        let mut exps = Vec::with_capacity(self.len());
        let mut phases = Vec::with_capacity(self.len());
        for (k, a) in self.indices.iter().enumerate() {
            exps.push(base + dot_log(a, &logs) - 0.5 * self.log_norms_sq[k]);
            phases.push(unit_power(z, a));
        }
        Ok((exps, phases))
    }

    fn combine(&self, exps: &[f64], phases: &[Complex64], shift: f64) -> Vec<Complex64> {
        let v: Vec<Complex64> = exps.iter().zip(phases).map(|(e, p)| p * (e - shift).exp()).collect();
        if self.identity {
            v
        } else {
            let out = &self.coeffs * nalgebra::DVector::from_vec(v);
            out.iter().copied().collect()
        }
    }

    /// `(e^{-n phi(z)} P_1(z), ..., e^{-n phi(z)} P_d(z))`.
    pub fn eval_weighted(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        let (exps, phases) = self.monomial_terms(z, true)?;
        let top = exps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if top > 700.0 {
            return Err(Error::Overflow(format!("{z:?}")));
        }
        Ok(self.combine(&exps, &phases, 0.0))
    }

    /// `(s, v)` with `P_j(z) = e^s v_j`; never overflows.
    pub fn eval_log_scaled(&self, z: &[Complex64]) -> Result<(f64, Vec<Complex64>)> {
        let (exps, phases) = self.monomial_terms(z, false)?;
        let top = exps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let shift = if top.is_finite() { top } else { 0.0 };
        Ok((shift, self.combine(&exps, &phases, shift)))
    }

    /// `(P_1(z), ..., P_d(z))`. Values too large for `f64` are reported as an
    /// overflow; `eval_weighted` and `eval_log_scaled` cover that range.
    pub fn eval(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        let (shift, v) = self.eval_log_scaled(z)?;
        if shift <= 700.0 {
            let s = shift.exp();
            return Ok(v.into_iter().map(|c| c * s).collect());
        }
        let phi = self.weight.eval_unchecked(z);
        if shift - self.n as f64 * phi > 700.0 {
            Err(Error::Overflow(format!("weighted basis values overflow at {z:?}")))
        } else {
            Err(Error::Overflow(format!("unweighted basis values overflow at {z:?}; use eval_weighted")))
        }
    }

    /// `conj(C) M C^T`: a normalized-monomial moment matrix expressed in this basis.
    pub(crate) fn project(&self, m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        if self.identity {
            m.clone()
        } else {
            self.coeffs.map(|c| c.conj()) * m * self.coeffs.transpose()
        }
    }

    /// CSV with columns `j, multi_index, monomial_index, re_coeff, im_coeff`,
    /// one row per nonzero raw monomial coefficient.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "j,multi_index,monomial_index,re_coeff,im_coeff")?;
        let raw = self.monomial_coeffs();
        for j in 0..self.len() {
            for (k, a) in self.indices.iter().enumerate() {
                let c = raw[(j, k)];
                if c.re == 0.0 && c.im == 0.0 {
                    continue;
                }
                let label: Vec<String> = a.iter().map(|v| v.to_string()).collect();
                writeln!(out, "{j},{},{k},{},{}", label.join(":"), fmt17(c.re), fmt17(c.im))?;
            }
        }
        Ok(())
    }
}

/// `max_{j,k} |<P_j, P_k>_n - delta_jk|` under the given rule.
pub fn gram_residual(b: &Basis, fine_rule: &QuadratureRule) -> Result<f64> {
    if fine_rule.target_n() != b.n() || fine_rule.dim() != b.dim() {
        return Err(Error::Contract("verification rule built for a different n or dimension".into()));
    }
    if fine_rule.max_degree() < b.degree() {
        return Err(Error::Capacity { degree: b.degree(), capacity: fine_rule.max_degree() });
    }
    let m = moment_matrix(fine_rule, b.indices(), b.log_norms_sq(), None)?;
    let g = b.project(&m);
    let mut worst = 0.0f64;
    for j in 0..g.nrows() {
        for k in 0..g.ncols() {
            let target = if j == k { 1.0 } else { 0.0 };
            worst = worst.max((g[(j, k)] - Complex64::new(target, 0.0)).norm());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::build_rule;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// `sqrt(n^{j+1} / (pi j!))` by running products.
    fn gaussian_onb_coeffs(n: u32, count: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(count);
        let mut v = (n as f64 / PI).sqrt();
        for j in 0..count {
            if j > 0 {
                v *= (n as f64 / j as f64).sqrt();
            }
            out.push(v);
        }
        out
    }

    #[test]
    fn multi_index_layout() {
        let s = MultiIndexSet::new(2, 2);
        let got: Vec<Vec<u32>> = s.iter().map(|a| a.to_vec()).collect();
        assert_eq!(got, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![0, 2], vec![1, 1], vec![2, 0]]);
        for m in [1, 2] {
            for n in 0..30 {
                let s = MultiIndexSet::new(m, n);
                let expect = if m == 1 { n + 1 } else { (n + 1) * (n + 2) / 2 };
                assert_eq!(s.len(), expect);
                assert_eq!(MultiIndexSet::dimension_of(m, n), expect);
                let degs: Vec<u32> = s.iter().map(|a| a.iter().sum()).collect();
                assert!(degs.windows(2).all(|p| p[0] <= p[1]));
                let mut all: Vec<Vec<u32>> = s.iter().map(|a| a.to_vec()).collect();
                all.dedup();
                assert_eq!(all.len(), expect);
            }
        }
    }

    #[test]
    fn gaussian_closed_form_basis() {
        let w = WeightSpec::gaussian_half(1).unwrap();
        for n in [1u32, 2, 7, 30] {
            let rule = build_rule(&w, n, n as usize, 1e-12).unwrap();
            let b = build_onb(&w, n, &rule).unwrap();
            let raw = b.monomial_coeffs();
            for (j, want) in gaussian_onb_coeffs(n, b.len()).into_iter().enumerate() {
                assert!((raw[(j, j)].re / want - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn degree_zero_basis_is_normalized_constant() {
        let w = WeightSpec::gaussian_half(1).unwrap();
        let rule = build_rule(&w, 3, 3, 1e-12).unwrap();
        let b = build_onb_degree(&w, 3, 0, &rule).unwrap();
        assert_eq!(b.len(), 1);
        assert!((b.monomial_coeffs()[(0, 0)].re - (3.0 / PI).sqrt()).abs() < 1e-14);
        assert!(gram_residual(&b, &rule.refined()).unwrap() <= 1e-12);
    }

    #[test]
    fn two_dimensional_gaussian_basis() {
        let w = WeightSpec::gaussian_half(2).unwrap();
        let n = 1;
        let rule = build_rule(&w, n, 1, 1e-12).unwrap();
        let b = build_onb(&w, n, &rule).unwrap();
        assert_eq!(b.len(), 3);
        let raw = b.monomial_coeffs();
        for (k, a) in b.indices().iter().enumerate() {
            let deg: u32 = a.iter().sum();
            let want = ((n as f64).powi(deg as i32 + 2) / (PI * PI)).sqrt();
            assert!((raw[(k, k)].re / want - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn evaluation_examples() {
        let w = WeightSpec::gaussian_half(1).unwrap();
        let rule = build_rule(&w, 1, 1, 1e-12).unwrap();
        let b = build_onb(&w, 1, &rule).unwrap();
        let v = b.eval(&[c(0.0, 0.0)]).unwrap();
        assert!((v[0].re - (1.0 / PI).sqrt()).abs() < 1e-15);
        assert_eq!(v[1], c(0.0, 0.0));

        let rule = build_rule(&w, 2, 2, 1e-12).unwrap();
        let b = build_onb(&w, 2, &rule).unwrap();
        let v = b.eval(&[c(1.0, 0.0)]).unwrap();
        let want = [(2.0 / PI).sqrt(), (4.0 / PI).sqrt(), (4.0 / PI).sqrt()];
        for (got, want) in v.iter().zip(want) {
            assert!((got.re - want).abs() < 1e-14 && got.im.abs() < 1e-15);
        }
        let v = b.eval(&[c(0.0, 0.0)]).unwrap();
        assert!(v[1..].iter().all(|x| x.norm() == 0.0));

        let w2 = WeightSpec::gaussian_half(2).unwrap();
        let rule = build_rule(&w2, 4, 4, 1e-10).unwrap();
        let b = build_onb(&w2, 4, &rule).unwrap();
        assert_eq!(b.eval(&[c(0.3, 0.1), c(-0.2, 0.5)]).unwrap().len(), 15);
        assert!(b.eval(&[c(0.0, 0.0), c(0.0, 0.0)]).unwrap()[1..].iter().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn weighted_evaluation_avoids_overflow() {
        let w = WeightSpec::gaussian_half(1).unwrap();
        let n = 300;
        let rule = build_rule(&w, n, n as usize, 1e-8).unwrap();
        let b = build_onb(&w, n, &rule).unwrap();
        let z = [c(30.0, 0.0)];
        let v = b.eval_weighted(&z).unwrap();
        assert!(v.iter().all(|x| x.re.is_finite()));
        assert!(matches!(b.eval(&z), Err(Error::Overflow(_))));
        let (s, v) = b.eval_log_scaled(&z).unwrap();
        assert!(s > 700.0 && v.iter().all(|x| x.norm().is_finite()));
    }

    #[test]
    fn gram_residual_examples() {
        let w = WeightSpec::gaussian_half(1).unwrap();
        let rule = build_rule(&w, 20, 20, 1e-13).unwrap();
        let b = build_onb(&w, 20, &rule).unwrap();
        assert!(gram_residual(&b, &rule.refined()).unwrap() <= 1e-12);

        let mut coeffs = b.normalized_coeffs().clone();
        coeffs.row_mut(1).iter_mut().for_each(|x| *x *= 2.0);
        let bad = b.with_coeffs(coeffs);
        let r = gram_residual(&bad, &rule.refined()).unwrap();
        assert!((r - 3.0).abs() < 1e-10);
    }

    #[test]
    fn custom_non_radial_weight_goes_through_cholesky() {
        let w = WeightSpec::custom("tilted", 1, 1.0, false, |z| {
            0.5 * z[0].norm_sqr() + 0.15 * (z[0] * z[0]).re
        })
        .unwrap();
        let n = 6;
        let rule = build_rule(&w, n, n as usize, 1e-12).unwrap();
        let b = build_onb(&w, n, &rule).unwrap();
        assert!(b.is_triangular());
        let coeffs = b.normalized_coeffs();
        for j in 0..b.len() {
            assert!(coeffs[(j, j)].re > 0.0 && coeffs[(j, j)].im == 0.0);
            for k in (j + 1)..b.len() {
                assert_eq!(coeffs[(j, k)], c(0.0, 0.0));
            }
        }
        assert!(gram_residual(&b, &rule.refined()).unwrap() <= 1e-10);

        // independent check of a few entries through the raw inner product
        let raw = b.monomial_coeffs();
        for (j, k) in [(0, 0), (2, 2), (1, 3), (6, 4)] {
            let p: Vec<Complex64> = raw.row(j).iter().copied().collect();
            let q: Vec<Complex64> = raw.row(k).iter().copied().collect();
            let v = crate::quadrature::inner_product(&p, &q, &rule, &w, n).unwrap();
            let target = if j == k { 1.0 } else { 0.0 };
            assert!((v - c(target, 0.0)).norm() < 1e-9, "({j},{k}) {v}");
        }
    }

    #[test]
    fn rebuilding_with_other_node_counts_keeps_coefficients() {
        let w = WeightSpec::custom("tilted", 1, 1.0, false, |z| 0.5 * z[0].norm_sqr() + 0.1 * (z[0] * z[0]).re).unwrap();
        let n = 5;
        let r1 = build_rule(&w, n, 5, 1e-12).unwrap();
        let b1 = build_onb(&w, n, &r1).unwrap();
        let b2 = build_onb(&w, n, &r1.refined()).unwrap();
        let a = b1.monomial_coeffs();
        let b = b2.monomial_coeffs();
        for j in 0..a.nrows() {
            let scale = (0..a.ncols()).map(|k| b[(j, k)].norm()).fold(0.0, f64::max);
            for k in 0..a.ncols() {
                assert!((a[(j, k)] - b[(j, k)]).norm() <= 1e-8 * scale);
            }
        }
    }

    #[test]
    fn rule_mismatch_is_rejected() {
        let w = WeightSpec::gaussian_half(1).unwrap();
        let rule = build_rule(&w, 4, 3, 1e-10).unwrap();
        assert!(matches!(build_onb(&w, 4, &rule), Err(Error::Capacity { .. })));
        assert!(matches!(build_onb(&w, 5, &rule), Err(Error::Contract(_))));
    }

    #[test]
    fn csv_export_uses_17_digits() {
        let w = WeightSpec::gaussian_half(1).unwrap();
        let rule = build_rule(&w, 2, 2, 1e-12).unwrap();
        let b = build_onb(&w, 2, &rule).unwrap();
        let mut buf = Vec::new();
        b.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "j,multi_index,monomial_index,re_coeff,im_coeff");
        assert_eq!(lines.len(), 4);
        let fields: Vec<&str> = lines[2].split(',').collect();
        assert_eq!(fields[0], "1");
        let v: f64 = fields[3].parse().unwrap();
        assert!((v - (4.0 / PI).sqrt()).abs() < 1e-15);
        assert_eq!(fields[3].split('e').next().unwrap().replace(['.', '-'], "").len(), 17);
    }
}
