//! Seeded property suites with margin accounting.
//!
//! Every trial draws its inputs from a sub-seed derived from
//! `(master_seed, suite, p, trial_id)`, so trials are independent and a
//! [`Report`] does not depend on execution order or thread count.

mod oracle;
mod suites;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::{
    make_rule, sample_function, sample_kernel, FunctionSpec, GridFunction, Kernel, KernelSpec, QuadratureRule, RuleKind,
};

pub use oracle::{least_squares_projection, top_singular_value};

/// Identifier of a verification suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteId {
    Axioms,
    #[serde(rename = "sandwich_2_2")]
    Sandwich,
    #[serde(rename = "isometry_2_1")]
    Isometry,
    GProperties,
    GeometryVolume,
    #[serde(rename = "functional_bounds_2_3_2_6")]
    FunctionalBounds,
    Roundtrip,
    QuadratureConvergence,
}

impl SuiteId {
    pub const ALL: [SuiteId; 8] = [
        SuiteId::Axioms,
        SuiteId::Sandwich,
        SuiteId::Isometry,
        SuiteId::GProperties,
        SuiteId::GeometryVolume,
        SuiteId::FunctionalBounds,
        SuiteId::Roundtrip,
        SuiteId::QuadratureConvergence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SuiteId::Axioms => "axioms",
            SuiteId::Sandwich => "sandwich_2_2",
            SuiteId::Isometry => "isometry_2_1",
            SuiteId::GProperties => "g_properties",
            SuiteId::GeometryVolume => "geometry_volume",
            SuiteId::FunctionalBounds => "functional_bounds_2_3_2_6",
            SuiteId::Roundtrip => "roundtrip",
            SuiteId::QuadratureConvergence => "quadrature_convergence",
        }
    }

    /// Grid used when the configuration does not set one.
    pub fn default_grid(self) -> usize {
        match self {
            SuiteId::FunctionalBounds => 64,
            _ => 256,
        }
    }

    /// The checks of this suite with their class and default tolerance.
    pub fn checks(self) -> &'static [(&'static str, CheckClass, f64)] {
        suites::checks(self)
    }
}

impl fmt::Display for SuiteId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SuiteId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SuiteId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite `{s}`")))
    }
}

/// How a failed check is interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckClass {
    /// Optimizer error can only enlarge the slack; a negative slack is a real violation.
    Pass,
    /// Optimizer underestimation could shrink the slack; checked against a wider budget.
    Monitor,
}

/// Class and tolerance of one named check, echoed in every report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckSpec {
    pub class: CheckClass,
    pub tolerance: f64,
}

/// Full description of a suite run.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub suite: SuiteId,
    pub p_list: Vec<f64>,
    pub grid_n: usize,
    pub rule_kind: RuleKind,
    pub trials: usize,
    pub master_seed: u64,
    /// Per-check tolerance overrides, keyed by check name.
    pub tolerances: BTreeMap<String, f64>,
    /// Fixed input pair instead of generated ones.
    pub pair: Option<(FunctionSpec, FunctionSpec)>,
    /// Fixed kernel instead of generated ones.
    pub kernel: Option<KernelSpec>,
}

impl SuiteConfig {
    /// Defaults: 100 trials, `p ∈ {1, 1.5, 2, 3}`, midpoint rule, suite grid.
    pub fn new(suite: SuiteId) -> Self {
        SuiteConfig {
            suite,
            p_list: vec![1.0, 1.5, 2.0, 3.0],
            grid_n: suite.default_grid(),
            rule_kind: RuleKind::Midpoint,
            trials: 100,
            master_seed: 0,
            tolerances: BTreeMap::new(),
            pair: None,
            kernel: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.p_list.is_empty() {
            return Err(Error::Config("p list is empty".into()));
        }
        if let Some(p) = self.p_list.iter().find(|p| !(**p >= 1.0 && p.is_finite())) {
            return Err(Error::Config(format!("p = {p} is outside [1, ∞)")));
        }
        let known = self.suite.checks();
        if let Some(name) = self
            .tolerances
            .keys()
            .find(|k| !known.iter().any(|c| c.0 == k.as_str()))
        {
            return Err(Error::Config(format!("suite {} has no check `{name}`", self.suite)));
        }
        if let Some((name, tol)) = self.tolerances.iter().find(|(_, t)| !(**t >= 0.0 && t.is_finite())) {
            return Err(Error::Config(format!(
                "tolerance {tol} for `{name}` must be finite and non-negative"
            )));
        }
        QuadratureRule::new(self.rule_kind, self.grid_n)?;
        Ok(())
    }

    fn check_table(&self) -> BTreeMap<String, CheckSpec> {
        self.suite
            .checks()
            .iter()
            .map(|&(name, class, tolerance)| {
                let tolerance = self.tolerances.get(name).copied().unwrap_or(tolerance);
                (name.to_string(), CheckSpec { class, tolerance })
            })
            .collect()
    }
}

/// Outcome of one trial. Margins are slacks: positive means satisfied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub id: usize,
    pub sub_seed: u64,
    /// Generator specs and sample digests of the inputs.
    pub inputs: BTreeMap<String, String>,
    pub values: BTreeMap<String, f64>,
    pub margins: BTreeMap<String, f64>,
    /// Convergence flags; every one of them is required.
    pub flags: BTreeMap<String, bool>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    /// Smallest slack of each check over all trials.
    pub min_margins: BTreeMap<String, f64>,
    pub wall_ms: u64,
}

/// Result of one suite at one `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub suite: SuiteId,
    pub p: f64,
    pub grid: usize,
    pub rule: String,
    pub seed: u64,
    pub version: String,
    pub checks: BTreeMap<String, CheckSpec>,
    pub trials: Vec<TrialRecord>,
    pub summary: Summary,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.summary.fail == 0
    }

    /// Smallest margin over all checks, `None` if no check ran.
    pub fn min_margin(&self) -> Option<f64> {
        self.summary.min_margins.values().copied().reduce(f64::min)
    }

    /// Smallest margin over the checks of one class.
    pub fn min_margin_of(&self, class: CheckClass) -> Option<f64> {
        self.summary
            .min_margins
            .iter()
            .filter(|(name, _)| self.checks.get(*name).is_some_and(|c| c.class == class))
            .map(|(_, m)| *m)
            .reduce(f64::min)
    }
}

/// Sub-seed of a trial: the first eight bytes of a SHA-256 over its coordinates.
pub fn sub_seed(master_seed: u64, suite: SuiteId, p: f64, trial_id: usize) -> u64 {
    let mut h = Sha256::new();
    h.update(master_seed.to_le_bytes());
    h.update(suite.name().as_bytes());
    h.update(p.to_bits().to_le_bytes());
    h.update((trial_id as u64).to_le_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

/// Spec of one generated function: smooth Fourier with probability ¾, nodal noise otherwise.
pub fn generate_function_spec(rng: &mut impl Rng) -> FunctionSpec {
    let seed = rng.random();
    if rng.random_bool(0.75) {
        FunctionSpec::Fourier {
            seed,
            modes: rng.random_range(2..=6),
        }
    } else {
        FunctionSpec::Nodal { seed }
    }
}

pub fn generate_pair_specs(sub_seed: u64) -> (FunctionSpec, FunctionSpec) {
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed);
    (generate_function_spec(&mut rng), generate_function_spec(&mut rng))
}

pub fn generate_pair(sub_seed: u64, rule: &Arc<QuadratureRule>) -> (GridFunction, GridFunction) {
    let (a, b) = generate_pair_specs(sub_seed);
    let sample = |s: &FunctionSpec| sample_function(rule, s).expect("generated specs are valid");
    (sample(&a), sample(&b))
}

/// Antisymmetric kernels are sums of one to three wedge terms of Fourier
/// functions; the others are smooth random kernels.
pub fn generate_kernel_spec(sub_seed: u64, antisymmetric: bool) -> KernelSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed);
    if !antisymmetric {
        return KernelSpec::RandSmooth {
            seed: rng.random(),
            modes: 4,
        };
    }
    let terms: usize = rng.random_range(1..=3);
    let mut fourier = || FunctionSpec::Fourier {
        seed: rng.random(),
        modes: 4,
    };
    let mut wedges: Vec<KernelSpec> = (0..terms)
        .map(|_| KernelSpec::Wedge(Box::new(fourier()), Box::new(fourier())))
        .collect();
    if wedges.len() == 1 {
        wedges.pop().expect("one term")
    } else {
        KernelSpec::Sum(wedges)
    }
}

pub fn generate_kernel(sub_seed: u64, rule: &Arc<QuadratureRule>, antisymmetric: bool) -> Kernel {
    sample_kernel(rule, &generate_kernel_spec(sub_seed, antisymmetric)).expect("generated specs are valid")
}

/// Collects the values, margins and flags of one trial.
pub(crate) struct Trial<'a> {
    checks: &'a BTreeMap<String, CheckSpec>,
    record: TrialRecord,
}

impl<'a> Trial<'a> {
    fn new(checks: &'a BTreeMap<String, CheckSpec>, id: usize, sub_seed: u64) -> Self {
        Trial {
            checks,
            record: TrialRecord {
                id,
                sub_seed,
                inputs: BTreeMap::new(),
                values: BTreeMap::new(),
                margins: BTreeMap::new(),
                flags: BTreeMap::new(),
                pass: false,
            },
        }
    }

    pub(crate) fn input(&mut self, name: &str, spec: impl fmt::Display, digest: String) {
        let text = if digest.is_empty() {
            spec.to_string()
        } else {
            format!("{spec} #{digest}")
        };
        self.record.inputs.insert(name.to_string(), text);
    }

    pub(crate) fn value(&mut self, name: &str, v: f64) {
        self.record.values.insert(name.to_string(), finite_or_flag(v));
    }

    pub(crate) fn flag(&mut self, name: &str, ok: bool) {
        self.record.flags.insert(name.to_string(), ok);
    }

    /// Records the slack of a registered check. A non-finite slack fails.
    pub(crate) fn check(&mut self, name: &str, slack: f64) {
        debug_assert!(self.checks.contains_key(name), "unregistered check {name}");
        let slack = if slack.is_nan() {
            f64::MIN
        } else {
            slack.clamp(f64::MIN, f64::MAX)
        };
        self.record.margins.insert(name.to_string(), slack);
    }

    fn finish(mut self) -> TrialRecord {
        let margins_ok = self
            .record
            .margins
            .iter()
            .all(|(name, m)| *m >= -self.checks[name].tolerance);
        let flags_ok = self.record.flags.values().all(|f| *f);
        self.record.pass = margins_ok && flags_ok;
        self.record
    }
}

// JSON has no NaN or infinity; the extreme finite values stand in for them.
fn finite_or_flag(v: f64) -> f64 {
    if v.is_nan() {
        f64::MIN
    } else {
        v.clamp(f64::MIN, f64::MAX)
    }
}

/// Slack of `lhs ≤ rhs`, relative to `scale`.
pub(crate) fn le(lhs: f64, rhs: f64, scale: f64) -> f64 {
    (rhs - lhs) / scale
}

/// Slack of `a = b` (never positive), relative to `scale`.
pub(crate) fn eq(a: f64, b: f64, scale: f64) -> f64 {
    -(a - b).abs() / scale
}

/// Everything a trial needs besides its id.
pub(crate) struct TrialContext<'a> {
    pub config: &'a SuiteConfig,
    pub rule: &'a Arc<QuadratureRule>,
    pub p: f64,
    pub sub_seed: u64,
}

impl TrialContext<'_> {
    /// The input pair: the configured one or a generated one.
    pub(crate) fn pair(&self, trial: &mut Trial) -> Result<(GridFunction, GridFunction)> {
        let (a, b) = match &self.config.pair {
            Some(pair) => pair.clone(),
            None => generate_pair_specs(self.sub_seed),
        };
        let x1 = sample_function(self.rule, &a)?;
        let x2 = sample_function(self.rule, &b)?;
        trial.input("x1", &a, x1.digest());
        trial.input("x2", &b, x2.digest());
        Ok((x1, x2))
    }

    /// An additional generated function independent of the pair.
    pub(crate) fn extra_function(&self, trial: &mut Trial, name: &str, salt: u64) -> Result<GridFunction> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.sub_seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let spec = generate_function_spec(&mut rng);
        let f = sample_function(self.rule, &spec)?;
        trial.input(name, &spec, f.digest());
        Ok(f)
    }

    pub(crate) fn kernel(&self, trial: &mut Trial, antisymmetric: bool) -> Result<Kernel> {
        let spec = match &self.config.kernel {
            Some(k) => k.clone(),
            None => generate_kernel_spec(self.sub_seed, antisymmetric),
        };
        let k = sample_kernel(self.rule, &spec)?;
        trial.input("theta", &spec, k.digest());
        Ok(k)
    }

    pub(crate) fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.sub_seed)
    }
}

/// Runs a suite for every `p` of the configuration, one [`Report`] per `p`.
///
/// Trials run on the current rayon pool; the output is independent of its size.
pub fn run_suite(config: &SuiteConfig) -> Result<Vec<Report>> {
    config.validate()?;
    let rule = make_rule(config.rule_kind, config.grid_n)?;
    let checks = config.check_table();
    config
        .p_list
        .iter()
        .map(|&p| {
            let start = Instant::now();
            let trials = (0..config.trials)
                .into_par_iter()
                .map(|id| {
                    let seed = sub_seed(config.master_seed, config.suite, p, id);
                    let ctx = TrialContext {
                        config,
                        rule: &rule,
                        p,
                        sub_seed: seed,
                    };
                    let mut trial = Trial::new(&checks, id, seed);
                    suites::run_trial(&ctx, &mut trial)?;
                    Ok(trial.finish())
                })
                .collect::<Result<Vec<TrialRecord>>>()?;
            let mut min_margins = BTreeMap::new();
            for t in &trials {
                for (name, m) in &t.margins {
                    min_margins
                        .entry(name.clone())
                        .and_modify(|v: &mut f64| *v = v.min(*m))
                        .or_insert(*m);
                }
            }
            let pass = trials.iter().filter(|t| t.pass).count();
            Ok(Report {
                suite: config.suite,
                p,
                grid: config.grid_n,
                rule: config.rule_kind.to_string(),
                seed: config.master_seed,
                version: env!("CARGO_PKG_VERSION").to_string(),
                checks: checks.clone(),
                summary: Summary {
                    pass,
                    fail: trials.len() - pass,
                    min_margins,
                    wall_ms: start.elapsed().as_millis() as u64,
                },
                trials,
            })
        })
        .collect()
}

/// [`run_suite`] on a dedicated pool of `threads` workers.
pub fn run_suite_with_threads(config: &SuiteConfig, threads: usize) -> Result<Vec<Report>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| run_suite(config))
}
