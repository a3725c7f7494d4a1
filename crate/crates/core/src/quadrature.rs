//! Radial x angular product rules for integrals of the form
//! `int F(z) e^{-2n phi(z)} dV_m`.
//!
//! Each complex coordinate gets a composite Gauss-Legendre rule in the
//! modulus on `[0, cutoff]` and an equispaced rule in the argument. For a
//! weight that depends only on the moduli, the equispaced angular sum is
//! exact for trigonometric polynomials of degree below `angular_count`, so
//! distinct monomials are orthogonal to rounding error.
//!
//! Nodes are always visited in ascending radius (first coordinate outermost),
//! then ascending angle. Parallel sums split the radial groups into a fixed
//! number of contiguous chunks independent of the thread count and add the
//! chunk totals in order, so results are bit-identical across runs.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::orthobasis::MultiIndexSet;
use crate::special::{gamma_ur, gauss_legendre, upper_gamma_quantile};
use crate::weights::WeightSpec;

/// Gauss-Legendre points per radial panel.
pub const PANEL_ORDER: usize = 16;

/// Number of contiguous chunks for parallel reductions.
const REDUCTION_CHUNKS: usize = 64;

#[derive(Clone, Debug)]
pub struct RuleOptions {
    pub tol: f64,
    /// Fixed radial node count (rounded up to whole panels); disables refinement.
    pub radial_nodes: Option<usize>,
    pub angular_nodes: Option<usize>,
    pub max_radial_nodes: usize,
}

impl Default for RuleOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            radial_nodes: None,
            angular_nodes: None,
            max_radial_nodes: 1 << 14,
        }
    }
}

impl RuleOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

/// One point of the radial grid, i.e. all nodes sharing the same moduli.
#[derive(Clone, Copy, Debug)]
pub struct RadialGroup {
    pub radii: [f64; 2],
    /// Product of radial weights including the `r dr` Jacobian.
    pub weight: f64,
}

#[derive(Clone, Debug)]
pub struct QuadratureRule {
    weight: WeightSpec,
    target_n: u32,
    max_degree: usize,
    edges: Vec<f64>,
    radial_nodes: Vec<(f64, f64)>,
    angular_count: usize,
    cutoff: f64,
    tail_bound: f64,
    achieved: f64,
}

pub fn build_rule(w: &WeightSpec, n: u32, max_degree: usize, tol: f64) -> Result<QuadratureRule> {
    build_rule_with(w, n, max_degree, &RuleOptions::with_tol(tol))
}

pub fn build_rule_with(w: &WeightSpec, n: u32, max_degree: usize, opts: &RuleOptions) -> Result<QuadratureRule> {
    if n < 1 {
        return Err(Error::InputDomain("n must be >= 1".into()));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InputDomain("quadrature tolerance must be positive".into()));
    }
    let (cutoff, tail_bound) = cutoff_radius(w, n, max_degree, opts.tol)?;
    let angular_count = opts.angular_nodes.unwrap_or(4 * max_degree + 4).max(1);

    let make = |panels: usize, angular: usize| {
        let edges: Vec<f64> = (0..=panels).map(|i| cutoff * i as f64 / panels as f64).collect();
        QuadratureRule::from_parts(w.clone(), n, max_degree, edges, angular, cutoff, tail_bound)
    };

    if let Some(k) = opts.radial_nodes {
        let panels = k.div_ceil(PANEL_ORDER).max(1);
        let mut rule = make(panels, angular_count);
        rule.achieved = f64::NAN;
        return Ok(rule);
    }

    let scale = (n as f64 * (max_degree as f64 + 1.0)).sqrt() * w.power().unwrap_or(2) as f64;
    let mut panels = ((cutoff * scale / 2.0).ceil() as usize).max(2);
    let mut angular = angular_count;
    loop {
        let rule = make(panels, angular);
        let err = if w.is_builtin() {
            rule.builtin_moment_error()
        } else {
            let finer = if w.is_radial() { make(2 * panels, angular) } else { make(2 * panels, 2 * angular) };
            rule.relative_moment_change(&finer)
        };
        if err <= opts.tol {
            let mut rule = rule;
            rule.achieved = err;
            return Ok(rule);
        }
        if 2 * panels * PANEL_ORDER > opts.max_radial_nodes {
            return Err(Error::Resolution { requested: opts.tol, achieved: err });
        }
        panels *= 2;
        if !w.is_radial() {
            angular *= 2;
        }
    }
}

/// Cutoff radius and the neglected relative mass beyond it.
fn cutoff_radius(w: &WeightSpec, n: u32, max_degree: usize, tol: f64) -> Result<(f64, f64)> {
    let m = w.dim() as f64;
    match w.power() {
        Some(p) => {
            // ||z||^{2p} n is Gamma((|a|+m)/p)-distributed under the normalized
            // monomial density; the largest shape has the heaviest tail.
            let p = p as f64;
            let shape = (max_degree as f64 + m) / p;
            let target = (tol * 1e-3).max(1e-300);
            let u = upper_gamma_quantile(shape, target);
            let r = (u / n as f64).powf(1.0 / (2.0 * p));
            Ok((r, gamma_ur(shape, u)))
        }
        None => custom_cutoff(w, n, max_degree, tol),
    }
}

fn custom_cutoff(w: &WeightSpec, n: u32, max_degree: usize, tol: f64) -> Result<(f64, f64)> {
    let m = w.dim();
    let power = (2 * max_degree + 2 * m - 1) as f64;
    let dirs: Vec<Vec<Complex64>> = (0..24)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / 24.0;
            match m {
                1 => vec![Complex64::from_polar(1.0, t)],
                _ => {
                    let a = (k as f64 + 0.5) / 24.0 * PI / 2.0;
                    vec![Complex64::from_polar(a.cos(), t), Complex64::from_polar(a.sin(), 3.0 * t)]
                }
            }
        })
        .collect();
    let envelope = |r: f64| -> f64 {
        dirs.iter()
            .map(|d| {
                let z: Vec<Complex64> = d.iter().map(|c| c * r).collect();
                power * r.ln() - 2.0 * n as f64 * w.eval_unchecked(&z)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let step = 0.01;
    let mut peak = f64::NEG_INFINITY;
    let drop = (tol * 1e-3).ln();
    let mut r = step;
    while r < 1e4 {
        let h = envelope(r);
        if !h.is_finite() && h != f64::NEG_INFINITY {
            return Err(Error::Numeric { location: format!("|z| = {r}"), value: format!("{h}") });
        }
        peak = peak.max(h);
        if h - peak < drop && r > step * 10.0 {
            return Ok((r, (h - peak).exp()));
        }
        r += step * r.max(1.0);
    }
    Err(Error::UnsupportedWeight(format!("{}: no cutoff found below |z| = 1e4", w.name())))
}

impl QuadratureRule {
    fn from_parts(
        weight: WeightSpec,
        target_n: u32,
        max_degree: usize,
        edges: Vec<f64>,
        angular_count: usize,
        cutoff: f64,
        tail_bound: f64,
    ) -> Self {
        let gl = gauss_legendre(PANEL_ORDER);
        let mut radial_nodes = Vec::with_capacity((edges.len() - 1) * PANEL_ORDER);
        for pair in edges.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let half = 0.5 * (b - a);
            for &(x, wt) in &gl {
                let r = a + half * (x + 1.0);
                radial_nodes.push((r, half * wt * r));
            }
        }
        Self {
            weight,
            target_n,
            max_degree,
            edges,
            radial_nodes,
            angular_count,
            cutoff,
            tail_bound,
            achieved: f64::NAN,
        }
    }

    pub fn dim(&self) -> usize {
        self.weight.dim()
    }

    pub fn weight(&self) -> &WeightSpec {
        &self.weight
    }

    pub fn target_n(&self) -> u32 {
        self.target_n
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn radial_nodes(&self) -> &[(f64, f64)] {
        &self.radial_nodes
    }

    pub fn angular_count(&self) -> usize {
        self.angular_count
    }

    pub fn cutoff_radius(&self) -> f64 {
        self.cutoff
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// Moment error reached during construction (NaN for fixed node counts).
    pub fn achieved_error(&self) -> f64 {
        self.achieved
    }

    pub fn node_count(&self) -> usize {
        self.radial_nodes.len().pow(self.dim() as u32) * self.angular_count.pow(self.dim() as u32)
    }

    /// Same cutoff with every panel halved and twice the angular nodes.
    pub fn refined(&self) -> Self {
        let mut edges = Vec::with_capacity(2 * self.edges.len());
        for pair in self.edges.windows(2) {
            edges.push(pair[0]);
            edges.push(0.5 * (pair[0] + pair[1]));
        }
        edges.push(*self.edges.last().unwrap());
        Self::from_parts(
            self.weight.clone(),
            self.target_n,
            self.max_degree,
            edges,
            2 * self.angular_count,
            self.cutoff,
            self.tail_bound,
        )
    }

    /// Same rule with panel edges inserted at the given radii, so integrands
    /// with jumps there are integrated panel-wise smooth.
    pub fn split_at(&self, radii: &[f64]) -> Self {
        let mut edges = self.edges.clone();
        for &r in radii {
            if r > 0.0 && r < self.cutoff && !edges.iter().any(|&e| (e - r).abs() <= 1e-15 * self.cutoff) {
                edges.push(r);
            }
        }
        edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut rule = Self::from_parts(
            self.weight.clone(),
            self.target_n,
            self.max_degree,
            edges,
            self.angular_count,
            self.cutoff,
            self.tail_bound,
        );
        rule.achieved = self.achieved;
        rule
    }

    pub(crate) fn groups(&self) -> Vec<RadialGroup> {
        match self.dim() {
            1 => self
                .radial_nodes
                .iter()
                .map(|&(r, w)| RadialGroup { radii: [r, 0.0], weight: w })
                .collect(),
            _ => {
                let mut out = Vec::with_capacity(self.radial_nodes.len().pow(2));
                for &(r1, w1) in &self.radial_nodes {
                    for &(r2, w2) in &self.radial_nodes {
                        out.push(RadialGroup { radii: [r1, r2], weight: w1 * w2 });
                    }
                }
                out
            }
        }
    }

    /// Unit phases of the angular nodes.
    pub(crate) fn phases(&self) -> Vec<Complex64> {
        let l = self.angular_count;
        (0..l).map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / l as f64)).collect()
    }

    /// Angular measure carried by one angular node tuple.
    pub(crate) fn angular_weight(&self) -> f64 {
        (2.0 * PI / self.angular_count as f64).powi(self.dim() as i32)
    }

    /// Full angular measure `(2 pi)^m`.
    pub(crate) fn torus_measure(&self) -> f64 {
        (2.0 * PI).powi(self.dim() as i32)
    }

    /// Visits every node of a radial group as `(z, angle indices)`.
    pub(crate) fn for_each_angle(&self, group: &RadialGroup, phases: &[Complex64], mut f: impl FnMut(&[Complex64], [usize; 2])) {
        match self.dim() {
            1 => {
                for (k, ph) in phases.iter().enumerate() {
                    f(&[ph * group.radii[0]], [k, 0]);
                }
            }
            _ => {
                let mut z = [Complex64::new(0.0, 0.0); 2];
                for (k1, p1) in phases.iter().enumerate() {
                    z[0] = p1 * group.radii[0];
                    for (k2, p2) in phases.iter().enumerate() {
                        z[1] = p2 * group.radii[1];
                        f(&z, [k1, k2]);
                    }
                }
            }
        }
    }

    /// Maps `f` over the radial groups in parallel, reducing chunk results in
    /// a fixed order.
    pub(crate) fn chunked_reduce<T, M, R, Z>(&self, map: M, reduce: R, zero: Z) -> T
    where
        T: Send,
        M: Fn(&mut T, &RadialGroup) + Sync,
        R: Fn(T, T) -> T,
        Z: Fn() -> T + Sync,
    {
        let groups = self.groups();
        let chunk = groups.len().div_ceil(REDUCTION_CHUNKS).max(1);
        let partials: Vec<T> = groups
            .par_chunks(chunk)
            .map(|gs| {
                let mut acc = zero();
                for g in gs {
                    map(&mut acc, g);
                }
                acc
            })
            .collect();
        partials.into_iter().fold(zero(), reduce)
    }

    /// `sum_nodes w_i e^{-2n phi(z_i)} F(z_i)`.
    pub fn integrate<F>(&self, f: F) -> Result<Complex64>
    where
        F: Fn(&[Complex64]) -> Complex64 + Sync,
    {
        let n = self.target_n as f64;
        let phases = self.phases();
        let aw = self.angular_weight();
        let out = self.chunked_reduce(
            |acc: &mut std::result::Result<Complex64, Error>, g| {
                if acc.is_err() {
                    return;
                }
                let mut local = Complex64::new(0.0, 0.0);
                let mut bad = None;
                self.for_each_angle(g, &phases, |z, _| {
                    if bad.is_some() {
                        return;
                    }
                    let v = f(z);
                    if !(v.re.is_finite() && v.im.is_finite()) {
                        bad = Some((format!("{z:?}"), format!("{v}")));
                        return;
                    }
                    let ew = (-2.0 * n * self.weight.eval_unchecked(z)).exp();
                    if ew > 0.0 {
                        local += v * (g.weight * aw * ew);
                    }
                });
                match bad {
                    Some((location, value)) => *acc = Err(Error::Numeric { location, value }),
                    None => {
                        if let Ok(a) = acc {
                            *a += local;
                        }
                    }
                }
            },
            |a, b| match (a, b) {
                (Ok(x), Ok(y)) => Ok(x + y),
                (Err(e), _) | (_, Err(e)) => Err(e),
            },
            || Ok(Complex64::new(0.0, 0.0)),
        );
        out
    }

    /// Integrates a function of the moduli `(|z_1|, ..., |z_m|)` only, with the
    /// angular integration done exactly when the weight is radial.
    pub fn integrate_radial<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        if !self.weight.is_radial() {
            let m = self.dim();
            return self
                .integrate(|z| {
                    let r: Vec<f64> = z.iter().map(|c| c.norm()).collect();
                    Complex64::new(f(&r[..m]), 0.0)
                })
                .map(|c| c.re);
        }
        let n = self.target_n as f64;
        let m = self.dim();
        let tm = self.torus_measure();
        self.chunked_reduce(
            |acc: &mut Result<f64>, g| {
                let Ok(a) = acc else { return };
                let radii = &g.radii[..m];
                let v = f(radii);
                if !v.is_finite() {
                    *acc = Err(Error::Numeric { location: format!("radii {radii:?}"), value: format!("{v}") });
                    return;
                }
                let ew = (-2.0 * n * self.weight.eval_moduli(radii)).exp();
                if ew > 0.0 {
                    *a += g.weight * tm * ew * v;
                }
            },
            |a, b| match (a, b) {
                (Ok(x), Ok(y)) => Ok(x + y),
                (Err(e), _) | (_, Err(e)) => Err(e),
            },
            || Ok(0.0),
        )
    }

    /// `sum_groups w (2 pi)^m f(radii)` for an integrand that already carries
    /// the weight factor and depends only on the moduli. Requires a radial weight.
    pub(crate) fn sum_weighted_radial<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(&[f64]) -> Result<f64> + Sync,
    {
        let m = self.dim();
        let tm = self.torus_measure();
        self.chunked_reduce(
            |acc: &mut Result<f64>, g| {
                let Ok(a) = acc else { return };
                match f(&g.radii[..m]) {
                    Ok(v) if v.is_finite() => *a += g.weight * tm * v,
                    Ok(v) => {
                        *acc = Err(Error::Numeric { location: format!("radii {:?}", &g.radii[..m]), value: format!("{v}") })
                    }
                    Err(e) => *acc = Err(e),
                }
            },
            |a, b| match (a, b) {
                (Ok(x), Ok(y)) => Ok(x + y),
                (Err(e), _) | (_, Err(e)) => Err(e),
            },
            || Ok(0.0),
        )
    }

    /// `max_a |<u_a, u_a> - 1|` over normalized monomials of degree
    /// `<= max_degree`, using closed-form norms.
    fn builtin_moment_error(&self) -> f64 {
        let idx = MultiIndexSet::new(self.dim(), self.max_degree);
        let n = self.target_n;
        let log_norms: Vec<f64> = idx
            .iter()
            .map(|a| self.weight.log_monomial_norm_sq(a, n).unwrap())
            .collect();
        let diag = self.radial_diagonal(&idx, &log_norms, None);
        diag.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max)
    }

    /// Relative change of the log-moments `ln int |z^a|^2 e^{-2n phi}` against
    /// a finer rule.
    fn relative_moment_change(&self, finer: &QuadratureRule) -> f64 {
        let idx = MultiIndexSet::new(self.dim(), self.max_degree);
        let a = self.log_monomial_moments(&idx);
        let b = finer.log_monomial_moments(&idx);
        a.iter()
            .zip(&b)
            .map(|(x, y)| (x - y).exp_m1().abs())
            .fold(0.0, f64::max)
    }

    /// `ln int |z^a|^2 e^{-2n phi} dV` for each multi-index, accumulated in
    /// log-sum-exp form.
    pub(crate) fn log_monomial_moments(&self, idx: &MultiIndexSet) -> Vec<f64> {
        let n = self.target_n as f64;
        let m = self.dim();
        let phases = self.phases();
        let aw = self.angular_weight();
        let tm = self.torus_measure();
        let radial = self.weight.is_radial();
        let d = idx.len();
        let zero = (vec![f64::NEG_INFINITY; d], vec![0.0f64; d]);
        let (mx, sum) = self.chunked_reduce(
            |acc: &mut (Vec<f64>, Vec<f64>), g| {
                let logs: Vec<f64> = g.radii[..m].iter().map(|r| r.ln()).collect();
                let mut add = |base: f64| {
                    for (k, a) in idx.iter().enumerate() {
                        let t = base + 2.0 * dot_log(a, &logs);
                        logsumexp_push(&mut acc.0[k], &mut acc.1[k], t);
                    }
                };
                if radial {
                    add((g.weight * tm).ln() - 2.0 * n * self.weight.eval_moduli(&g.radii[..m]));
                } else {
                    self.for_each_angle(g, &phases, |z, _| {
                        add((g.weight * aw).ln() - 2.0 * n * self.weight.eval_unchecked(z));
                    });
                }
            },
            |mut a, b| {
                for k in 0..d {
                    if b.0[k] > f64::NEG_INFINITY {
                        logsumexp_push(&mut a.0[k], &mut a.1[k], b.0[k] + b.1[k].ln());
                    }
                }
                a
            },
            || zero.clone(),
        );
        mx.iter().zip(&sum).map(|(m, s)| m + s.ln()).collect()
    }

    /// Diagonal of the normalized-monomial moment matrix for a radial weight,
    /// optionally against a radial symbol.
    pub(crate) fn radial_diagonal(
        &self,
        idx: &MultiIndexSet,
        log_norms: &[f64],
        symbol: Option<&(dyn Fn(&[f64]) -> f64 + Sync)>,
    ) -> Vec<f64> {
        let n = self.target_n as f64;
        let m = self.dim();
        let tm = self.torus_measure();
        let d = idx.len();
        self.chunked_reduce(
            |acc: &mut Vec<f64>, g| {
                let radii = &g.radii[..m];
                let gv = symbol.map_or(1.0, |s| s(radii));
                if gv == 0.0 {
                    return;
                }
                let logs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
                let base = -2.0 * n * self.weight.eval_moduli(radii);
                let scale = g.weight * tm * gv;
                for (k, a) in idx.iter().enumerate() {
                    let e = base + 2.0 * dot_log(a, &logs) - log_norms[k];
                    acc[k] += scale * e.exp();
                }
            },
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
            || vec![0.0; d],
        )
    }
}

/// `sum_i a_i ln r_i`, treating `0 * ln 0` as zero.
pub(crate) fn dot_log(a: &[u32], logs: &[f64]) -> f64 {
    a.iter()
        .zip(logs)
        .filter(|(&k, _)| k != 0)
        .map(|(&k, &l)| k as f64 * l)
        .sum()
}

fn logsumexp_push(mx: &mut f64, sum: &mut f64, t: f64) {
    if t == f64::NEG_INFINITY {
        return;
    }
    if t <= *mx {
        *sum += (t - *mx).exp();
    } else {
        *sum = *sum * (*mx - t).exp() + 1.0;
        *mx = t;
    }
}

/// Degree of a coefficient vector laid out over the graded multi-indices.
fn degree_for_len(dim: usize, len: usize) -> Option<usize> {
    (0..=10_000).find(|&k| MultiIndexSet::dimension_of(dim, k) >= len)
        .filter(|&k| MultiIndexSet::dimension_of(dim, k) == len)
}

/// `<p, q>_n = int p conj(q) e^{-2n phi} dV` for monomial coefficient vectors
/// in graded order.
pub fn inner_product(p: &[Complex64], q: &[Complex64], rule: &QuadratureRule, w: &WeightSpec, n: u32) -> Result<Complex64> {
    if w.dim() != rule.dim() || n != rule.target_n() {
        return Err(Error::Contract("rule was built for a different weight or n".into()));
    }
    let m = rule.dim();
    let dp = degree_for_len(m, p.len()).ok_or_else(|| Error::InputDomain(format!("length {} is not a polynomial space dimension", p.len())))?;
    let dq = degree_for_len(m, q.len()).ok_or_else(|| Error::InputDomain(format!("length {} is not a polynomial space dimension", q.len())))?;
    let deg = dp.max(dq);
    if deg > rule.max_degree() {
        return Err(Error::Capacity { degree: deg, capacity: rule.max_degree() });
    }
    let idx = MultiIndexSet::new(m, deg);
    let nf = n as f64;
    // e^{-n phi(z)} sum_a c_a z^a, with each term formed in log-polar form
    let weighted = |c: &[Complex64], z: &[Complex64]| -> Complex64 {
        let logs: Vec<f64> = z.iter().map(|v| v.norm().ln()).collect();
        let args: Vec<f64> = z.iter().map(|v| v.arg()).collect();
        let half = -nf * w.eval_unchecked(z);
        c.iter()
            .zip(idx.iter())
            .filter(|(c, _)| c.norm_sqr() > 0.0)
            .map(|(c, a)| {
                let mag = (half + dot_log(a, &logs)).exp();
                let ang: f64 = a.iter().zip(&args).map(|(&k, t)| k as f64 * t).sum();
                c * Complex64::from_polar(mag, ang)
            })
            .sum()
    };
    let pq = weighted_sum(rule, |z| weighted(p, z) * weighted(q, z).conj())?;
    let qp = weighted_sum(rule, |z| weighted(q, z) * weighted(p, z).conj())?;
    Ok(0.5 * (pq + qp.conj()))
}

/// Node sum of an integrand that already carries the weight factor.
pub(crate) fn weighted_sum<F>(rule: &QuadratureRule, f: F) -> Result<Complex64>
where
    F: Fn(&[Complex64]) -> Complex64 + Sync,
{
    let phases = rule.phases();
    let aw = rule.angular_weight();
    rule.chunked_reduce(
        |acc: &mut Result<Complex64>, g| {
            let Ok(a) = acc else { return };
            let mut local = Complex64::new(0.0, 0.0);
            let mut bad = None;
            rule.for_each_angle(g, &phases, |z, _| {
                let v = f(z);
                if !(v.re.is_finite() && v.im.is_finite()) {
                    bad.get_or_insert_with(|| (format!("{z:?}"), format!("{v}")));
                }
                local += v * (g.weight * aw);
            });
            match bad {
                Some((location, value)) => *acc = Err(Error::Numeric { location, value }),
                None => *a += local,
            }
        },
        |a, b| match (a, b) {
            (Ok(x), Ok(y)) => Ok(x + y),
            (Err(e), _) | (_, Err(e)) => Err(e),
        },
        || Ok(Complex64::new(0.0, 0.0)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn gaussian_mass_examples() {
        let w = WeightSpec::gaussian_half(1).unwrap();
        let rule = build_rule(&w, 1, 0, 1e-12).unwrap();
        let one = rule.integrate(|_| c(1.0, 0.0)).unwrap();
        assert!((one.re - PI).abs() < 1e-12 && one.im.abs() < 1e-15);
        assert_eq!(rule.integrate(|_| c(0.0, 0.0)).unwrap(), c(0.0, 0.0));

        let rule = build_rule(&w, 1, 2, 1e-12).unwrap();
        let r2 = rule.integrate(|z| c(z[0].norm_sqr(), 0.0)).unwrap();
        assert!((r2.re - PI).abs() < 1e-12);
        let r4 = rule.integrate(|z| c(z[0].norm_sqr().powi(2), 0.0)).unwrap();
        assert!((r4.re - 2.0 * PI).abs() < 1e-11);
        let lin = rule.integrate(|z| z[0]).unwrap();
        assert!(lin.norm() < 1e-12);
    }

    #[test]
    fn rule_invariants() {
        for (w, n, deg) in [
            (WeightSpec::gaussian_half(1).unwrap(), 10, 10),
            (WeightSpec::radial_power(2, 1).unwrap(), 20, 22),
            (WeightSpec::gaussian_half(2).unwrap(), 5, 6),
        ] {
            let rule = build_rule(&w, n, deg, 1e-12).unwrap();
            let nodes = rule.radial_nodes();
            assert!(nodes.iter().all(|&(_, wt)| wt > 0.0));
            assert!(nodes.windows(2).all(|p| p[0].0 < p[1].0));
            assert!(nodes[0].0 > 0.0 && nodes.last().unwrap().0 <= rule.cutoff_radius());
            assert!(rule.tail_bound() <= 1e-12);
            assert!(rule.angular_count() > 4 * deg);
            assert!(rule.achieved_error() <= 1e-12);
        }
    }

    #[test]
    fn inner_product_examples() {
        let w = WeightSpec::gaussian_half(1).unwrap();
        let rule = build_rule(&w, 1, 3, 1e-12).unwrap();
        let one = [c(1.0, 0.0)];
        let v = inner_product(&one, &one, &rule, &w, 1).unwrap();
        assert!((v.re - PI).abs() < 1e-12);
        let z = [c(0.0, 0.0), c(1.0, 0.0)];
        assert!(inner_product(&one, &z, &rule, &w, 1).unwrap().norm() < 1e-13);

        for n in [1u32, 3, 7] {
            let rule = build_rule(&w, n, 5, 1e-12).unwrap();
            for j in 0..=5usize {
                let mut e = vec![c(0.0, 0.0); j + 1];
                e[j] = c(1.0, 0.0);
                let fact: f64 = (1..=j).map(|k| k as f64).product();
                let exact = PI * fact / (n as f64).powi(j as i32 + 1);
                let got = inner_product(&e, &e, &rule, &w, n).unwrap();
                assert!((got.re / exact - 1.0).abs() < 1e-12, "n={n} j={j}");
            }
        }
    }

    #[test]
    fn inner_product_errors() {
        let w = WeightSpec::gaussian_half(1).unwrap();
        let rule = build_rule(&w, 2, 2, 1e-10).unwrap();
        let p = vec![c(1.0, 0.0); 4];
        assert!(matches!(inner_product(&p, &p, &rule, &w, 2), Err(Error::Capacity { .. })));
        assert!(matches!(inner_product(&p[..1], &p[..1], &rule, &w, 3), Err(Error::Contract(_))));
        let w2 = WeightSpec::gaussian_half(2).unwrap();
        let rule2 = build_rule(&w2, 2, 2, 1e-10).unwrap();
        assert!(matches!(inner_product(&p[..2], &p[..2], &rule2, &w2, 2), Err(Error::InputDomain(_))));
    }

    #[test]
    fn distinct_monomials_orthogonal_under_radial_weight() {
        for w in [WeightSpec::gaussian_half(1).unwrap(), WeightSpec::radial_power(3, 1).unwrap()] {
            let rule = build_rule(&w, 4, 6, 1e-12).unwrap();
            for a in 0..=6usize {
                for b in 0..=6usize {
                    if a == b {
                        continue;
                    }
                    let mut p = vec![c(0.0, 0.0); 7];
                    let mut q = vec![c(0.0, 0.0); 7];
                    p[a] = c(1.0, 0.0);
                    q[b] = c(1.0, 0.0);
                    assert!(inner_product(&p, &q, &rule, &w, 4).unwrap().norm() <= 1e-13);
                }
            }
        }
        let w2 = WeightSpec::radial_power(2, 2).unwrap();
        let rule = build_rule(&w2, 3, 2, 1e-12).unwrap();
        let d = MultiIndexSet::dimension_of(2, 2);
        for a in 0..d {
            for b in 0..d {
                if a != b {
                    let mut p = vec![c(0.0, 0.0); d];
                    let mut q = vec![c(0.0, 0.0); d];
                    p[a] = c(1.0, 0.0);
                    q[b] = c(1.0, 0.0);
                    assert!(inner_product(&p, &q, &rule, &w2, 3).unwrap().norm() <= 1e-13);
                }
            }
        }
    }

    #[test]
    fn closed_form_norms_match_quadrature_in_two_dimensions() {
        // non-separable weight: checks the sphere/radial factorization
        let w = WeightSpec::radial_power(2, 2).unwrap();
        let rule = build_rule_with(&w, 3, 4, &RuleOptions { radial_nodes: Some(640), ..Default::default() }).unwrap();
        let idx = MultiIndexSet::new(2, 4);
        let moments = rule.log_monomial_moments(&idx);
        for (k, a) in idx.iter().enumerate() {
            let exact = w.log_monomial_norm_sq(a, 3).unwrap();
            assert!((moments[k] - exact).abs() < 1e-11, "{a:?}");
        }
    }

    #[test]
    fn doubling_nodes_is_self_consistent() {
        let w = WeightSpec::gaussian_half(1).unwrap();
        let rule = build_rule(&w, 12, 12, 1e-12).unwrap();
        let finer = rule.refined();
        let p: Vec<Complex64> = (0..13).map(|k| c((k as f64).sin(), (k as f64 * 0.7).cos())).collect();
        let q: Vec<Complex64> = (0..13).map(|k| c(1.0 / (k as f64 + 1.0), 0.3)).collect();
        let a = inner_product(&p, &q, &rule, &w, 12).unwrap();
        let b = inner_product(&p, &q, &finer, &w, 12).unwrap();
        assert!((a - b).norm() <= 1e-12 * b.norm().max(1e-300) + 1e-14);
    }

    #[test]
    fn custom_weights_build_and_integrate() {
        let w = WeightSpec::custom("shifted", 1, 1.0, false, |z| {
            0.5 * z[0].norm_sqr() + 0.1 * (z[0] * z[0]).re
        })
        .unwrap();
        let rule = build_rule(&w, 2, 3, 1e-10).unwrap();
        // exponent 2.4 x^2 + 1.6 y^2
        let exact = PI / (2.4f64 * 1.6).sqrt();
        let got = rule.integrate(|_| c(1.0, 0.0)).unwrap();
        assert!((got.re - exact).abs() < 1e-9, "{got} vs {exact}");
    }

    #[test]
    fn resolution_error_reports_achieved_bound() {
        let w = WeightSpec::gaussian_half(1).unwrap();
        let opts = RuleOptions { tol: 1e-14, max_radial_nodes: 32, ..Default::default() };
        match build_rule_with(&w, 50, 50, &opts) {
            Err(Error::Resolution { achieved, .. }) => assert!(achieved > 1e-14),
            other => panic!("expected resolution error, got {other:?}"),
        }
    }

    #[test]
    fn non_finite_integrand_reports_node() {
        let w = WeightSpec::gaussian_half(1).unwrap();
        let rule = build_rule(&w, 1, 1, 1e-8).unwrap();
        assert!(matches!(rule.integrate(|_| c(f64::NAN, 0.0)), Err(Error::Numeric { .. })));
    }
}
