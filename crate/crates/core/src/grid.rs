//! Quadrature rules on `[0, 1]` and the sampled representations built on them.
//!
//! A [`QuadratureRule`] fixes the ambient finite-dimensional space: every
//! function is a [`GridFunction`] holding one sample per node, and every
//! bivariate kernel is a [`Kernel`] holding one sample per node pair.
//! Integrals are weighted sums over the nodes; nothing is interpolated.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Family of a quadrature rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    Midpoint,
    Trapezoid,
    /// Composite Gauss-Legendre; the panel count is `n / nodes_per_panel`.
    GaussComposite {
        nodes_per_panel: usize,
    },
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleKind::Midpoint => write!(f, "midpoint"),
            RuleKind::Trapezoid => write!(f, "trapezoid"),
            RuleKind::GaussComposite { nodes_per_panel } => write!(f, "gauss:{nodes_per_panel}"),
        }
    }
}

impl FromStr for RuleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "midpoint" => Ok(RuleKind::Midpoint),
            "trapezoid" => Ok(RuleKind::Trapezoid),
            "gauss" => Ok(RuleKind::GaussComposite { nodes_per_panel: 4 }),
            _ => {
                let npp = s
                    .strip_prefix("gauss:")
                    .ok_or_else(|| Error::parse(s, "expected midpoint, trapezoid, gauss or gauss:<k>"))?;
                let nodes_per_panel: usize = npp
                    .parse()
                    .map_err(|_| Error::parse(s, "nodes per panel must be a positive integer"))?;
                if nodes_per_panel == 0 {
                    return Err(Error::parse(s, "nodes per panel must be positive"));
                }
                Ok(RuleKind::GaussComposite { nodes_per_panel })
            }
        }
    }
}

/// Stable identifier of a rule: its kind and node count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RuleId {
    pub kind: RuleKind,
    pub n: usize,
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.kind, self.n)
    }
}

/// Nodes and positive weights discretizing `∫₀¹ · du`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    id: RuleId,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn new(kind: RuleKind, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidSize(n));
        }
        let (nodes, weights) = match kind {
            RuleKind::Midpoint => {
                let h = 1.0 / n as f64;
                ((0..n).map(|i| (i as f64 + 0.5) * h).collect(), vec![h; n])
            }
            RuleKind::Trapezoid => {
                let h = 1.0 / (n - 1) as f64;
                let nodes = (0..n).map(|i| if i == n - 1 { 1.0 } else { i as f64 * h }).collect();
                let mut weights = vec![h; n];
                weights[0] = 0.5 * h;
                weights[n - 1] = 0.5 * h;
                (nodes, weights)
            }
            RuleKind::GaussComposite { nodes_per_panel } => {
                if nodes_per_panel == 0 || !n.is_multiple_of(nodes_per_panel) {
                    return Err(Error::InvalidSize(n));
                }
                composite_gauss(n / nodes_per_panel, nodes_per_panel)
            }
        };
        Ok(QuadratureRule {
            id: RuleId { kind, n },
            nodes,
            weights,
        })
    }

    /// The rule every command uses unless told otherwise.
    pub fn default_midpoint() -> Self {
        Self::new(RuleKind::Midpoint, 256).expect("256 nodes is a valid size")
    }

    pub fn id(&self) -> RuleId {
        self.id
    }

    pub fn kind(&self) -> RuleKind {
        self.id.kind
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Samples `f` at every node.
    pub fn sample(self: &Arc<Self>, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction {
            rule: Arc::clone(self),
            samples: self.nodes.iter().map(|&t| f(t)).collect(),
        }
    }

    /// Samples a bivariate `θ(u, v)` with row `i` fixed at `u = uᵢ`.
    pub fn sample_kernel(self: &Arc<Self>, theta: impl Fn(f64, f64) -> f64) -> Kernel {
        let n = self.len();
        let mut data = Vec::with_capacity(n * n);
        for &u in &self.nodes {
            for &v in &self.nodes {
                data.push(theta(u, v));
            }
        }
        Kernel {
            rule: Arc::clone(self),
            data,
        }
    }
}

/// `make_rule` under its operational name.
pub fn make_rule(kind: RuleKind, n: usize) -> Result<Arc<QuadratureRule>> {
    QuadratureRule::new(kind, n).map(Arc::new)
}

fn composite_gauss(panels: usize, k: usize) -> (Vec<f64>, Vec<f64>) {
    let (ref_nodes, ref_weights) = gauss_legendre(k);
    let h = 1.0 / panels as f64;
    let mut nodes = Vec::with_capacity(panels * k);
    let mut weights = Vec::with_capacity(panels * k);
    for p in 0..panels {
        let a = p as f64 * h;
        for (x, w) in ref_nodes.iter().zip(&ref_weights) {
            nodes.push(a + 0.5 * h * (x + 1.0));
            weights.push(0.5 * h * w);
        }
    }
    (nodes, weights)
}

/// Gauss-Legendre nodes (ascending) and weights on `[-1, 1]`.
fn gauss_legendre(k: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; k];
    let mut weights = vec![0.0; k];
    let kf = k as f64;
    for i in 0..k.div_ceil(2) {
        // Chebyshev-like initial guess for the i-th largest root, then Newton.
        let mut x = (PI * (i as f64 + 0.75) / (kf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(k, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(k, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[k - 1 - i] = x;
        nodes[i] = -x;
        weights[k - 1 - i] = w;
        weights[i] = w;
    }
    if k % 2 == 1 {
        nodes[k / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(k: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if k == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=k {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let d = k as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

pub(crate) fn ensure_same(a: &QuadratureRule, b: &QuadratureRule) -> Result<()> {
    if a.id == b.id {
        Ok(())
    } else {
        Err(Error::IncompatibleGrid(a.id.to_string(), b.id.to_string()))
    }
}

/// A member of the discretized `L^p[0,1]`: one finite sample per node.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    rule: Arc<QuadratureRule>,
    samples: Vec<f64>,
}

impl GridFunction {
    pub fn new(rule: Arc<QuadratureRule>, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != rule.len() {
            return Err(Error::IncompatibleGrid(
                rule.id().to_string(),
                format!("{} samples", samples.len()),
            ));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::Domain(format!("sample {i} is not finite")));
        }
        Ok(GridFunction { rule, samples })
    }

    pub fn zeros(rule: &Arc<QuadratureRule>) -> Self {
        GridFunction {
            rule: Arc::clone(rule),
            samples: vec![0.0; rule.len()],
        }
    }

    /// The nodal indicator `eᵢ`.
    pub fn indicator(rule: &Arc<QuadratureRule>, i: usize) -> Self {
        let mut f = Self::zeros(rule);
        f.samples[i] = 1.0;
        f
    }

    pub fn rule(&self) -> &Arc<QuadratureRule> {
        &self.rule
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.samples.iter().all(|&s| s == 0.0)
    }

    pub(crate) fn from_parts(rule: Arc<QuadratureRule>, samples: Vec<f64>) -> Self {
        debug_assert_eq!(rule.len(), samples.len());
        GridFunction { rule, samples }
    }

    pub fn ensure_compatible(&self, other: &GridFunction) -> Result<()> {
        ensure_same(&self.rule, &other.rule)
    }

    pub fn scale(&self, a: f64) -> GridFunction {
        GridFunction {
            rule: Arc::clone(&self.rule),
            samples: self.samples.iter().map(|s| a * s).collect(),
        }
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &GridFunction, b: f64) -> Result<GridFunction> {
        self.ensure_compatible(other)?;
        Ok(GridFunction {
            rule: Arc::clone(&self.rule),
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        })
    }

    pub fn add(&self, other: &GridFunction) -> Result<GridFunction> {
        self.combine(1.0, other, 1.0)
    }

    /// Hex prefix of the SHA-256 of the sample bytes.
    pub fn digest(&self) -> String {
        sample_digest(&self.samples)
    }
}

pub(crate) fn sample_digest(samples: &[f64]) -> String {
    let mut hasher = Sha256::new();
    for s in samples {
        hasher.update(s.to_le_bytes());
    }
    hasher.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// `∫₀¹ f(u) du` as `Σᵢ wᵢ f(uᵢ)`.
pub fn integrate(rule: &QuadratureRule, f: &GridFunction) -> Result<f64> {
    ensure_same(rule, f.rule())?;
    Ok(compensated_sum(
        rule.weights().iter().zip(f.samples()).map(|(w, s)| w * s),
    ))
}

/// Neumaier summation.
pub(crate) fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut carry = 0.0;
    for v in values {
        let t = sum + v;
        carry += if sum.abs() >= v.abs() {
            (sum - t) + v
        } else {
            (v - t) + sum
        };
        sum = t;
    }
    sum + carry
}

/// Bivariate samples `θ(uᵢ, uⱼ)`, stored row-major with row `i` at `u = uᵢ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    rule: Arc<QuadratureRule>,
    data: Vec<f64>,
}

impl Kernel {
    pub fn new(rule: Arc<QuadratureRule>, data: Vec<f64>) -> Result<Self> {
        let n = rule.len();
        if data.len() != n * n {
            return Err(Error::IncompatibleGrid(
                rule.id().to_string(),
                format!("{} kernel entries", data.len()),
            ));
        }
        if let Some(i) = data.iter().position(|s| !s.is_finite()) {
            return Err(Error::Domain(format!(
                "kernel entry ({}, {}) is not finite",
                i / n,
                i % n
            )));
        }
        Ok(Kernel { rule, data })
    }

    pub fn zeros(rule: &Arc<QuadratureRule>) -> Self {
        let n = rule.len();
        Kernel {
            rule: Arc::clone(rule),
            data: vec![0.0; n * n],
        }
    }

    pub(crate) fn from_parts(rule: Arc<QuadratureRule>, data: Vec<f64>) -> Self {
        debug_assert_eq!(rule.len() * rule.len(), data.len());
        Kernel { rule, data }
    }

    pub fn rule(&self) -> &Arc<QuadratureRule> {
        &self.rule
    }

    pub fn size(&self) -> usize {
        self.rule.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.size() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.size();
        &self.data[i * n..(i + 1) * n]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn add(&self, other: &Kernel) -> Result<Kernel> {
        ensure_same(&self.rule, &other.rule)?;
        Ok(Kernel {
            rule: Arc::clone(&self.rule),
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn digest(&self) -> String {
        sample_digest(&self.data)
    }
}

/// Generator description for a grid function.
#[derive(Debug, Clone, PartialEq)]
pub enum FunctionSpec {
    Const(f64),
    /// Coefficients `c₀, c₁, …` of `Σ cₖ tᵏ`.
    Poly(Vec<f64>),
    /// Random trigonometric sum up to frequency `modes`, coefficients ~ N(0,1)/k².
    Fourier {
        seed: u64,
        modes: usize,
    },
    /// Independent standard normal samples at every node.
    Nodal {
        seed: u64,
    },
    Csv(PathBuf),
}

/// Generator description for a kernel.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    /// `θ(u,v) = a(u)b(v) − a(v)b(u)`.
    Wedge(Box<FunctionSpec>, Box<FunctionSpec>),
    /// Random smooth tensor-trigonometric kernel.
    RandSmooth {
        seed: u64,
        modes: usize,
    },
    Antisym(Box<KernelSpec>),
    /// Entrywise sum of kernels, written `sum:<kernel>;<kernel>;…`.
    Sum(Vec<KernelSpec>),
    Csv(PathBuf),
}

fn parse_num<T: FromStr>(whole: &str, s: &str, what: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::parse(whole, format!("invalid {what} `{s}`")))
}

fn parse_seed_modes(whole: &str, rest: &str) -> Result<(u64, usize)> {
    let (seed, modes) = rest
        .split_once(',')
        .ok_or_else(|| Error::parse(whole, "expected <seed>,<modes>"))?;
    Ok((parse_num(whole, seed, "seed")?, parse_num(whole, modes, "mode count")?))
}

impl FromStr for FunctionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (tag, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::parse(s, "expected <kind>:<arguments>"))?;
        match tag {
            "const" => Ok(FunctionSpec::Const(parse_num(s, rest, "constant")?)),
            "poly" => {
                let coeffs = rest
                    .split(',')
                    .map(|c| parse_num(s, c, "coefficient"))
                    .collect::<Result<Vec<f64>>>()?;
                Ok(FunctionSpec::Poly(coeffs))
            }
            "fourier" => {
                let (seed, modes) = parse_seed_modes(s, rest)?;
                Ok(FunctionSpec::Fourier { seed, modes })
            }
            "nodal" => Ok(FunctionSpec::Nodal {
                seed: parse_num(s, rest, "seed")?,
            }),
            "csv" if !rest.is_empty() => Ok(FunctionSpec::Csv(PathBuf::from(rest))),
            _ => Err(Error::parse(s, format!("unknown function kind `{tag}`"))),
        }
    }
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionSpec::Const(c) => write!(f, "const:{c}"),
            FunctionSpec::Poly(cs) => {
                let cs: Vec<String> = cs.iter().map(|c| c.to_string()).collect();
                write!(f, "poly:{}", cs.join(","))
            }
            FunctionSpec::Fourier { seed, modes } => write!(f, "fourier:{seed},{modes}"),
            FunctionSpec::Nodal { seed } => write!(f, "nodal:{seed}"),
            FunctionSpec::Csv(p) => write!(f, "csv:{}", p.display()),
        }
    }
}

impl FromStr for KernelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (tag, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::parse(s, "expected <kind>:<arguments>"))?;
        match tag {
            "wedge" => {
                let (a, b) = rest
                    .split_once('|')
                    .ok_or_else(|| Error::parse(s, "expected wedge:<function>|<function>"))?;
                Ok(KernelSpec::Wedge(Box::new(a.parse()?), Box::new(b.parse()?)))
            }
            "randsmooth" => {
                let (seed, modes) = parse_seed_modes(s, rest)?;
                Ok(KernelSpec::RandSmooth { seed, modes })
            }
            "antisym" => Ok(KernelSpec::Antisym(Box::new(rest.parse()?))),
            "sum" => {
                let terms = rest.split(';').map(str::parse).collect::<Result<Vec<KernelSpec>>>()?;
                Ok(KernelSpec::Sum(terms))
            }
            "csv" if !rest.is_empty() => Ok(KernelSpec::Csv(PathBuf::from(rest))),
            _ => Err(Error::parse(s, format!("unknown kernel kind `{tag}`"))),
        }
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSpec::Wedge(a, b) => write!(f, "wedge:{a}|{b}"),
            KernelSpec::RandSmooth { seed, modes } => write!(f, "randsmooth:{seed},{modes}"),
            KernelSpec::Antisym(k) => write!(f, "antisym:{k}"),
            KernelSpec::Sum(terms) => {
                let terms: Vec<String> = terms.iter().map(|t| t.to_string()).collect();
                write!(f, "sum:{}", terms.join(";"))
            }
            KernelSpec::Csv(p) => write!(f, "csv:{}", p.display()),
        }
    }
}

/// The `m`-th real trigonometric mode on `[0,1]`: `1, cos πt, sin πt, cos 2πt, sin 2πt, …`.
pub fn trig_mode(m: usize, t: f64) -> f64 {
    if m == 0 {
        return 1.0;
    }
    let k = m.div_ceil(2) as f64;
    if m % 2 == 1 {
        (PI * k * t).cos()
    } else {
        (PI * k * t).sin()
    }
}

fn trig_frequency(m: usize) -> usize {
    m.div_ceil(2)
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn fourier_coefficients(seed: u64, modes: usize) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..=modes)
        .map(|k| {
            let decay = 1.0 / (k.max(1) as f64).powi(2);
            (normal(&mut rng) * decay, normal(&mut rng) * decay)
        })
        .collect()
}

pub fn sample_function(rule: &Arc<QuadratureRule>, spec: &FunctionSpec) -> Result<GridFunction> {
    match spec {
        FunctionSpec::Const(c) => Ok(rule.sample(|_| *c)),
        FunctionSpec::Poly(cs) => Ok(rule.sample(|t| cs.iter().rev().fold(0.0, |acc, c| acc * t + c))),
        FunctionSpec::Fourier { seed, modes } => {
            let coeffs = fourier_coefficients(*seed, *modes);
            Ok(rule.sample(|t| {
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, (a, b))| {
                        let arg = PI * k as f64 * t;
                        a * arg.cos() + b * arg.sin()
                    })
                    .sum()
            }))
        }
        FunctionSpec::Nodal { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let samples = (0..rule.len()).map(|_| normal(&mut rng)).collect();
            Ok(GridFunction::from_parts(Arc::clone(rule), samples))
        }
        FunctionSpec::Csv(path) => GridFunction::new(Arc::clone(rule), read_function_csv(path)?),
    }
}

pub fn sample_kernel(rule: &Arc<QuadratureRule>, spec: &KernelSpec) -> Result<Kernel> {
    match spec {
        KernelSpec::Wedge(a, b) => {
            let a = sample_function(rule, a)?;
            let b = sample_function(rule, b)?;
            Ok(wedge(&a, &b))
        }
        KernelSpec::RandSmooth { seed, modes } => {
            let dim = 2 * modes + 1;
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut coeffs = vec![0.0; dim * dim];
            for a in 0..dim {
                for b in 0..dim {
                    let decay = ((1 + trig_frequency(a)) * (1 + trig_frequency(b))) as f64;
                    coeffs[a * dim + b] = normal(&mut rng) / (decay * decay);
                }
            }
            let n = rule.len();
            let modes_at: Vec<Vec<f64>> = rule
                .nodes()
                .iter()
                .map(|&t| (0..dim).map(|m| trig_mode(m, t)).collect())
                .collect();
            let mut data = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    let mut s = 0.0;
                    for a in 0..dim {
                        let row = &coeffs[a * dim..(a + 1) * dim];
                        let inner: f64 = row.iter().zip(&modes_at[j]).map(|(c, m)| c * m).sum();
                        s += modes_at[i][a] * inner;
                    }
                    data[i * n + j] = s;
                }
            }
            Ok(Kernel::from_parts(Arc::clone(rule), data))
        }
        KernelSpec::Antisym(inner) => Ok(crate::functional::antisym_part(&sample_kernel(rule, inner)?)),
        KernelSpec::Sum(terms) => {
            let mut total = Kernel::zeros(rule);
            for t in terms {
                total = total.add(&sample_kernel(rule, t)?)?;
            }
            Ok(total)
        }
        KernelSpec::Csv(path) => Kernel::new(Arc::clone(rule), read_kernel_csv(path, rule.len())?),
    }
}

/// `θ(u,v) = a(u)b(v) − a(v)b(u)`, antisymmetric by construction.
pub fn wedge(a: &GridFunction, b: &GridFunction) -> Kernel {
    let n = a.len();
    let (a, bs) = (a.samples(), b.samples());
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            data[i * n + j] = a[i] * bs[j] - a[j] * bs[i];
        }
    }
    Kernel::from_parts(Arc::clone(b.rule()), data)
}

fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn read_function_csv(path: &Path) -> Result<Vec<f64>> {
    let text = read_to_string(path)?;
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| parse_num(&path.display().to_string(), l, "sample"))
        .collect()
}

fn read_kernel_csv(path: &Path, n: usize) -> Result<Vec<f64>> {
    let text = read_to_string(path)?;
    let whole = path.display().to_string();
    let mut data = Vec::with_capacity(n * n);
    let mut rows = 0;
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
        let before = data.len();
        for cell in line.split(',') {
            data.push(parse_num(&whole, cell, "kernel entry")?);
        }
        if data.len() - before != n {
            return Err(Error::IncompatibleGrid(
                format!("{n} columns"),
                format!("row {rows} of {whole} has {} columns", data.len() - before),
            ));
        }
        rows += 1;
    }
    if rows != n {
        return Err(Error::IncompatibleGrid(
            format!("{n} rows"),
            format!("{whole} has {rows} rows"),
        ));
    }
    Ok(data)
}

/// One sample per line, `{:?}` formatting so integers keep a trailing `.0`.
pub fn function_csv(f: &GridFunction) -> String {
    f.samples().iter().map(|s| format!("{s:?}\n")).collect()
}

pub fn kernel_csv(k: &Kernel) -> String {
    let n = k.size();
    let mut out = String::new();
    for i in 0..n {
        let row: Vec<String> = k.row(i).iter().map(|s| format!("{s:?}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
