//! Flat `key = value` experiment configuration.
//!
//! One pair per line; `#` starts a comment. Lists are comma separated.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::quadrature::RuleOptions;
use crate::randvar::{CoeffSpec, Field, Law};
use crate::toeplitz::Symbol;
use crate::weights::WeightSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    Basis,
    Bergman,
    Toeplitz,
    Mass,
    Zeros,
    Hw,
    Onb,
    Sweep,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::Basis,
        Experiment::Bergman,
        Experiment::Toeplitz,
        Experiment::Mass,
        Experiment::Zeros,
        Experiment::Hw,
        Experiment::Onb,
        Experiment::Sweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Basis => "basis",
            Experiment::Bergman => "bergman",
            Experiment::Toeplitz => "toeplitz",
            Experiment::Mass => "mass",
            Experiment::Zeros => "zeros",
            Experiment::Hw => "hw",
            Experiment::Onb => "onb",
            Experiment::Sweep => "sweep",
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            Experiment::Basis => "orthonormal basis coefficients and Gram residual",
            Experiment::Bergman => "Bergman function profile, total mass and scaled L1 error",
            Experiment::Toeplitz => "Toeplitz spectrum and normalized trace moments",
            Experiment::Mass => "mass statistic concentration over random polynomials",
            Experiment::Zeros => "roots of random polynomials against the equilibrium measure",
            Experiment::Hw => "Hanson-Wright tails of centered quadratic forms",
            Experiment::Onb => "masses of Haar-rotated orthonormal bases",
            Experiment::Sweep => "mass statistic deviation along a sequence of degrees",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == s)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, &self.key) {
            (Some(l), Some(k)) => write!(f, "line {l}: {k}: {}", self.message),
            (Some(l), None) => write!(f, "line {l}: {}", self.message),
            (None, Some(k)) => write!(f, "{k}: {}", self.message),
            (None, None) => f.write_str(&self.message),
        }
    }
}

/// Keys in file order with their line numbers.
#[derive(Clone, Debug, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, (String, usize)>,
    syntax: Vec<Diagnostic>,
}

const KNOWN_KEYS: &[&str] = &[
    "experiment",
    "seed",
    "output",
    "weight.kind",
    "weight.p",
    "weight.m",
    "n",
    "coeff.law",
    "coeff.field",
    "symbol",
    "trials",
    "eps",
    "tol_mass",
    "rotations",
    "rotate",
    "grid",
    "log_potential",
    "quad.tol",
    "quad.radial_nodes",
    "quad.angular_nodes",
    "hw.matrix",
    "hw.size",
    "hw.t",
];

impl RawConfig {
    pub fn parse(text: &str) -> Self {
        let mut cfg = RawConfig::default();
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let Some((k, v)) = body.split_once('=') else {
                cfg.syntax.push(Diagnostic { line: Some(lineno), key: None, message: format!("expected key = value, got '{body}'") });
                continue;
            };
            let (k, v) = (k.trim().to_string(), v.trim().to_string());
            if k.is_empty() {
                cfg.syntax.push(Diagnostic { line: Some(lineno), key: None, message: "empty key".into() });
                continue;
            }
            if let Some((_, first)) = cfg.entries.get(&k) {
                cfg.syntax.push(Diagnostic { line: Some(lineno), key: Some(k.clone()), message: format!("duplicate key (first set on line {first})") });
                continue;
            }
            cfg.entries.insert(k, (v, lineno));
        }
        cfg
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    fn line(&self, key: &str) -> Option<usize> {
        self.entries.get(key).map(|(_, l)| *l)
    }

    pub fn set(&mut self, key: &str, value: &str) {
        let line = self.line(key).unwrap_or(0);
        self.entries.insert(key.to_string(), (value.to_string(), line));
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, (v, _))| (k.as_str(), v.as_str()))
    }
}

/// Fully resolved configuration.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub output: PathBuf,
    pub weight: WeightSpec,
    pub n: Vec<u32>,
    pub coeffs: Vec<CoeffSpec>,
    pub symbol: Symbol,
    pub trials: usize,
    pub eps: f64,
    pub tol_mass: f64,
    pub rotations: usize,
    pub rotate: bool,
    pub grid: usize,
    pub log_potential: bool,
    pub quad: RuleOptions,
    pub hw_matrix: String,
    pub hw_size: usize,
    pub hw_t: Vec<f64>,
    pub raw: RawConfig,
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Option<Vec<T>> {
    let v: Option<Vec<T>> = s.split(',').map(|x| x.trim().parse().ok()).collect();
    v.filter(|v| !v.is_empty())
}

fn parse_bool(s: &str) -> Option<bool> {
    match s {
        "true" | "yes" | "1" => Some(true),
        "false" | "no" | "0" => Some(false),
        _ => None,
    }
}

struct Resolver<'a> {
    raw: &'a RawConfig,
    diags: Vec<Diagnostic>,
}

impl Resolver<'_> {
    fn fail(&mut self, key: &str, message: impl Into<String>) {
        self.diags.push(Diagnostic { line: self.raw.line(key), key: Some(key.to_string()), message: message.into() });
    }

    fn value<T>(&mut self, key: &str, default: T, parse: impl Fn(&str) -> Option<T>, what: &str) -> T {
        match self.raw.get(key) {
            None => default,
            Some(s) => match parse(s) {
                Some(v) => v,
                None => {
                    self.fail(key, format!("expected {what}, got '{s}'"));
                    default
                }
            },
        }
    }
}

impl ExperimentConfig {
    pub fn from_text(text: &str) -> std::result::Result<Self, Vec<Diagnostic>> {
        Self::resolve(&RawConfig::parse(text))
    }

    pub fn load(path: &std::path::Path) -> Result<std::result::Result<Self, Vec<Diagnostic>>> {
        let text = std::fs::read_to_string(path)?;
        Ok(Self::from_text(&text))
    }

    pub fn resolve(raw: &RawConfig) -> std::result::Result<Self, Vec<Diagnostic>> {
        let mut r = Resolver { raw, diags: raw.syntax.clone() };
        for (k, _) in raw.pairs() {
            if !KNOWN_KEYS.contains(&k) {
                r.fail(k, "unknown key");
            }
        }

        let experiment = match raw.get("experiment") {
            None => {
                r.diags.push(Diagnostic { line: None, key: Some("experiment".into()), message: "experiment required".into() });
                Experiment::Basis
            }
            Some(s) => Experiment::parse(s).unwrap_or_else(|| {
                let names: Vec<&str> = Experiment::ALL.iter().map(|e| e.name()).collect();
                r.fail("experiment", format!("unknown experiment '{s}' (expected one of {})", names.join(", ")));
                Experiment::Basis
            }),
        };

        let seed = match raw.get("seed") {
            None => {
                r.diags.push(Diagnostic { line: None, key: Some("seed".into()), message: "seed required".into() });
                0
            }
            Some(_) => r.value("seed", 0u64, |s| s.parse().ok(), "an unsigned integer"),
        };
        let output = PathBuf::from(raw.get("output").unwrap_or("output"));

        let m = r.value("weight.m", 1usize, |s| s.parse().ok().filter(|m| *m == 1 || *m == 2), "1 or 2");
        let weight = match raw.get("weight.kind").unwrap_or("gaussian_half") {
            "gaussian_half" => WeightSpec::gaussian_half(m).ok(),
            "radial_power" => match raw.get("weight.p") {
                None => {
                    r.fail("weight.kind", "radial_power requires weight.p");
                    None
                }
                Some(_) => {
                    let p = r.value("weight.p", 0u32, |s| s.parse().ok().filter(|p| *p >= 1), "a positive integer");
                    if p >= 1 {
                        WeightSpec::radial_power(p, m).ok()
                    } else {
                        None
                    }
                }
            },
            other => {
                r.fail("weight.kind", format!("unknown weight kind '{other}' (expected gaussian_half or radial_power)"));
                None
            }
        };

        let n: Vec<u32> = match raw.get("n") {
            None if experiment != Experiment::Hw => {
                r.diags.push(Diagnostic { line: None, key: Some("n".into()), message: "n required".into() });
                vec![]
            }
            None => vec![],
            Some(_) => r.value("n", vec![], |s| parse_list::<u32>(s).filter(|v| v.iter().all(|&x| x >= 1)), "positive integers"),
        };

        let laws = r.value("coeff.law", vec![Law::StdGaussian], |s| s.split(',').map(|x| Law::parse(x).ok()).collect(), "gaussian, rademacher or uniform");
        let fields = r.value("coeff.field", vec![Field::Complex], |s| s.split(',').map(|x| Field::parse(x).ok()).collect(), "real or complex");
        let coeffs: Vec<CoeffSpec> = fields
            .iter()
            .flat_map(|f| laws.iter().map(move |l| CoeffSpec::new(l.clone(), *f)))
            .collect();

        let symbol = match raw.get("symbol") {
            None => Symbol::abs2(),
            Some(s) => Symbol::parse(s).unwrap_or_else(|e| {
                r.fail("symbol", e.to_string());
                Symbol::abs2()
            }),
        };

        let trials = r.value("trials", 100usize, |s| s.parse().ok().filter(|t| *t >= 1), "an integer >= 1");
        let eps = r.value("eps", 0.1, |s| s.parse().ok().filter(|e: &f64| *e > 0.0), "a positive number");
        let tol_mass = r.value("tol_mass", 0.1, |s| s.parse().ok().filter(|e: &f64| *e > 0.0), "a positive number");
        let rotations = r.value("rotations", 20usize, |s| s.parse().ok().filter(|t| *t >= 1), "an integer >= 1");
        let rotate = r.value("rotate", true, parse_bool, "true or false");
        let grid = r.value("grid", 101usize, |s| s.parse().ok().filter(|t| *t >= 2), "an integer >= 2");
        let log_potential = r.value("log_potential", false, parse_bool, "true or false");

        let mut quad = RuleOptions::default();
        quad.tol = r.value("quad.tol", quad.tol, |s| s.parse().ok().filter(|t: &f64| *t > 0.0 && *t < 1.0), "a number in (0, 1)");
        quad.radial_nodes = r.value("quad.radial_nodes", None, |s| s.parse().ok().filter(|t| *t >= 1).map(Some), "a positive integer");
        quad.angular_nodes = r.value("quad.angular_nodes", None, |s| s.parse().ok().filter(|t| *t >= 1).map(Some), "a positive integer");

        let hw_matrix = raw.get("hw.matrix").unwrap_or("identity").to_string();
        if experiment == Experiment::Hw && !matches!(hw_matrix.as_str(), "identity" | "toeplitz" | "tridiagonal") {
            r.fail("hw.matrix", format!("unknown matrix '{hw_matrix}' (expected identity, tridiagonal or toeplitz)"));
        }
        if experiment == Experiment::Hw && hw_matrix == "toeplitz" && n.len() != 1 {
            r.fail("n", "hw.matrix = toeplitz needs exactly one n");
        }
        let hw_size = r.value("hw.size", 50usize, |s| s.parse().ok().filter(|t| *t >= 1), "a positive integer");
        let hw_t = r.value("hw.t", vec![10.0, 20.0, 30.0], parse_list::<f64>, "a list of numbers");
        if experiment == Experiment::Hw && trials < 1000 {
            r.fail("trials", "hw experiments need at least 1000 trials");
        }
        if experiment == Experiment::Zeros && weight.as_ref().is_some_and(|w| w.dim() != 1) {
            r.fail("weight.m", "zeros are only computed for m = 1");
        }
        if matches!(experiment, Experiment::Onb | Experiment::Mass | Experiment::Sweep) && matches!(symbol.kind(), crate::toeplitz::SymbolKind::Custom) {
            r.fail("symbol", "symbol has no equilibrium moment");
        }

        if !r.diags.is_empty() {
            return Err(r.diags);
        }
        Ok(Self {
            experiment,
            seed,
            output,
            weight: weight.expect("weight resolved without diagnostics"),
            n,
            coeffs,
            symbol,
            trials,
            eps,
            tol_mass,
            rotations,
            rotate,
            grid,
            log_potential,
            quad,
            hw_matrix,
            hw_size,
            hw_t,
            raw: raw.clone(),
        })
    }
}

/// Diagnostics for a config text; empty iff a run would start.
pub fn validate(text: &str) -> Vec<Diagnostic> {
    match ExperimentConfig::from_text(text) {
        Ok(_) => vec![],
        Err(d) => d,
    }
}

impl From<Vec<Diagnostic>> for Error {
    fn from(d: Vec<Diagnostic>) -> Self {
        Error::Config(d.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; "))
    }
}
