//! The Gunawan and Gähler 2-norms on the discretized `L^p[0,1]`.
//!
//! The Gunawan norm is a closed-form double sum. The Gähler norm is the
//! supremum of the 2×2 pairing determinant over the dual unit ball; with
//! one dual vector fixed the determinant is linear in the other, so each
//! half-step is a Hölder extremal and the ascent is monotone.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::Result;
use crate::geometry::g_slice;
use crate::grid::GridFunction;
use crate::lp::{check_p, conjugate_exponent, dot_slice, extremal_into, norm_slice, pow_abs};

/// Settings shared by every multi-start ascent in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AscentOptions {
    /// Stop once the relative improvement of a sweep drops below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Number of seeded random starts, on top of the deterministic ones.
    pub starts: usize,
    pub seed: u64,
}

impl Default for AscentOptions {
    fn default() -> Self {
        AscentOptions {
            tol: 1e-10,
            max_iter: 200,
            starts: 8,
            seed: 0,
        }
    }
}

/// Value of an optimizer-defined norm together with its certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
    pub starts: usize,
    /// Arguments at which `value` is attained; their meaning depends on the norm.
    pub maximizers: Vec<GridFunction>,
    pub is_lower_bound: bool,
}

impl NormEstimate {
    pub(crate) fn exact(value: f64, maximizers: Vec<GridFunction>) -> Self {
        NormEstimate {
            value,
            converged: true,
            iterations: 0,
            starts: 0,
            maximizers,
            is_lower_bound: false,
        }
    }
}

/// `( ½ ∫∫ |x₁(u)x₂(v) − x₁(v)x₂(u)|^p du dv )^{1/p}`.
pub fn gunawan_norm(x1: &GridFunction, x2: &GridFunction, p: f64) -> Result<f64> {
    check_p(p)?;
    x1.ensure_compatible(x2)?;
    Ok(gunawan_slice(x1.rule().weights(), x1.samples(), x2.samples(), p))
}

pub(crate) fn gunawan_slice(w: &[f64], x1: &[f64], x2: &[f64], p: f64) -> f64 {
    let n = w.len();
    let mut total = 0.0;
    // The determinant is antisymmetric in (u, v), so ½ΣΣ is the sum over i < j.
    for i in 0..n {
        let mut row = 0.0;
        for j in i + 1..n {
            row += w[j] * pow_abs(x1[i] * x2[j] - x1[j] * x2[i], p);
        }
        total += w[i] * row;
    }
    if p == 1.0 {
        total
    } else if p == 2.0 {
        total.sqrt()
    } else {
        total.powf(1.0 / p)
    }
}

/// The pairing determinant `⟨x₁,y₁⟩⟨x₂,y₂⟩ − ⟨x₂,y₁⟩⟨x₁,y₂⟩`.
pub fn gahler_determinant(x1: &GridFunction, x2: &GridFunction, y1: &GridFunction, y2: &GridFunction) -> Result<f64> {
    x1.ensure_compatible(x2)?;
    x1.ensure_compatible(y1)?;
    x1.ensure_compatible(y2)?;
    Ok(determinant_slice(
        x1.rule().weights(),
        x1.samples(),
        x2.samples(),
        y1.samples(),
        y2.samples(),
    ))
}

pub(crate) fn determinant_slice(w: &[f64], x1: &[f64], x2: &[f64], y1: &[f64], y2: &[f64]) -> f64 {
    dot_slice(w, x1, y1) * dot_slice(w, x2, y2) - dot_slice(w, x2, y1) * dot_slice(w, x1, y2)
}

/// Which dual vector the first half-step of a sweep updates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum FirstUpdate {
    Y1,
    Y2,
}

#[derive(Debug, Clone)]
pub(crate) struct GahlerRun {
    pub value: f64,
    pub y1: Vec<f64>,
    pub y2: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Alternating ascent of the pairing determinant from one dual vector.
///
/// `init` is the fixed vector for the first half-step: `y₂` when
/// `first = Y1`, `y₁` otherwise.
pub(crate) struct GahlerProblem<'a> {
    pub w: &'a [f64],
    pub x1: &'a [f64],
    pub x2: &'a [f64],
    pub p: f64,
}

impl GahlerProblem<'_> {
    fn update_y1(&self, y2: &[f64], a: &mut [f64], y1: &mut [f64]) {
        let c2 = dot_slice(self.w, self.x2, y2);
        let c1 = dot_slice(self.w, self.x1, y2);
        for ((ai, x1), x2) in a.iter_mut().zip(self.x1).zip(self.x2) {
            *ai = c2 * x1 - c1 * x2;
        }
        extremal_into(self.w, a, self.p, y1);
    }

    fn update_y2(&self, y1: &[f64], b: &mut [f64], y2: &mut [f64]) {
        let c1 = dot_slice(self.w, self.x1, y1);
        let c2 = dot_slice(self.w, self.x2, y1);
        for ((bi, x1), x2) in b.iter_mut().zip(self.x1).zip(self.x2) {
            *bi = c1 * x2 - c2 * x1;
        }
        extremal_into(self.w, b, self.p, y2);
    }

    pub fn determinant(&self, y1: &[f64], y2: &[f64]) -> f64 {
        determinant_slice(self.w, self.x1, self.x2, y1, y2)
    }

    pub fn ascend(&self, init: &[f64], first: FirstUpdate, tol: f64, max_iter: usize) -> GahlerRun {
        let n = self.w.len();
        let mut y1 = init.to_vec();
        let mut y2 = init.to_vec();
        let mut scratch = vec![0.0; n];
        let mut value = f64::NEG_INFINITY;
        let mut iterations = 0;
        let mut converged = false;
        while iterations < max_iter {
            iterations += 1;
            match first {
                FirstUpdate::Y1 => {
                    self.update_y1(&y2, &mut scratch, &mut y1);
                    self.update_y2(&y1, &mut scratch, &mut y2);
                }
                FirstUpdate::Y2 => {
                    self.update_y2(&y1, &mut scratch, &mut y2);
                    self.update_y1(&y2, &mut scratch, &mut y1);
                }
            }
            let next = self.determinant(&y1, &y2);
            if next - value <= tol * next.abs() {
                value = value.max(next);
                converged = true;
                break;
            }
            value = next;
        }
        GahlerRun {
            value,
            y1,
            y2,
            iterations,
            converged,
        }
    }
}

/// Seeded random points on the unit sphere of the `q`-norm.
pub(crate) fn random_sphere_points(w: &[f64], q: f64, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut v: Vec<f64> = (0..w.len()).map(|_| StandardNormal.sample(&mut rng)).collect();
            let norm = norm_slice(w, &v, q);
            v.iter_mut().for_each(|x| *x /= norm);
            v
        })
        .collect()
}

/// Deterministic dual starts: norming functionals of `x₁`, `x₂` and of each
/// one g-orthogonalized against the other. The last pair attains the volume
/// of the 2-rectangle, so the ascent never reports less than it.
fn deterministic_starts(w: &[f64], x1: &[f64], x2: &[f64], p: f64) -> Vec<Vec<f64>> {
    let mut starts = Vec::new();
    let mut push_norming = |z: &[f64]| {
        let mut y = vec![0.0; z.len()];
        if extremal_into(w, z, p, &mut y) > 0.0 {
            starts.push(y);
        }
    };
    push_norming(x1);
    push_norming(x2);
    for (a, b) in [(x1, x2), (x2, x1)] {
        let gaa = g_slice(w, a, a, p);
        if gaa > 0.0 {
            let c = g_slice(w, a, b, p) / gaa;
            let orth: Vec<f64> = b.iter().zip(a).map(|(b, a)| b - c * a).collect();
            push_norming(&orth);
        }
    }
    starts
}

/// Gähler 2-norm: `sup` of the pairing determinant over `‖y₁‖_q, ‖y₂‖_q ≤ 1`.
///
/// Maximizers are `[y₁, y₂]`. The value is attained by them, so it is a
/// lower bound of the supremum.
pub fn gahler_norm(x1: &GridFunction, x2: &GridFunction, p: f64, opts: &AscentOptions) -> Result<NormEstimate> {
    gahler_norm_warm(x1, x2, p, opts, &[])
}

/// [`gahler_norm`] with extra dual-pair starts, e.g. maximizers of a nearby pair.
pub fn gahler_norm_warm(
    x1: &GridFunction,
    x2: &GridFunction,
    p: f64,
    opts: &AscentOptions,
    warm: &[(GridFunction, GridFunction)],
) -> Result<NormEstimate> {
    check_p(p)?;
    x1.ensure_compatible(x2)?;
    for (y1, y2) in warm {
        x1.ensure_compatible(y1)?;
        x1.ensure_compatible(y2)?;
    }
    let w = x1.rule().weights();
    let problem = GahlerProblem {
        w,
        x1: x1.samples(),
        x2: x2.samples(),
        p,
    };
    let q = conjugate_exponent(p)?.q();

    let mut runs: Vec<(Vec<f64>, FirstUpdate)> = Vec::new();
    for (y1, y2) in warm {
        runs.push((y2.samples().to_vec(), FirstUpdate::Y1));
        runs.push((y1.samples().to_vec(), FirstUpdate::Y2));
    }
    let inits = deterministic_starts(w, x1.samples(), x2.samples(), p)
        .into_iter()
        .chain(random_sphere_points(w, q, opts.starts, opts.seed));
    for init in inits {
        runs.push((init.clone(), FirstUpdate::Y1));
        runs.push((init, FirstUpdate::Y2));
    }

    let mut best: Option<GahlerRun> = None;
    let mut iterations = 0;
    for (init, first) in &runs {
        let run = problem.ascend(init, *first, opts.tol, opts.max_iter);
        iterations += run.iterations;
        if best.as_ref().is_none_or(|b| run.value > b.value) {
            best = Some(run);
        }
    }
    let rule = x1.rule();
    let (value, converged, maximizers) = match best {
        Some(run) => (
            run.value.max(0.0),
            run.converged,
            vec![
                GridFunction::from_parts(rule.clone(), run.y1),
                GridFunction::from_parts(rule.clone(), run.y2),
            ],
        ),
        // Both inputs vanish.
        None => (0.0, true, vec![GridFunction::zeros(rule), GridFunction::zeros(rule)]),
    };
    Ok(NormEstimate {
        value,
        converged,
        iterations,
        starts: runs.len(),
        maximizers,
        is_lower_bound: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_rule, sample_function, QuadratureRule, RuleKind};
    use approx::assert_relative_eq;
    use std::sync::Arc;

    fn rule(n: usize) -> Arc<QuadratureRule> {
        make_rule(RuleKind::Midpoint, n).unwrap()
    }

    fn gram_oracle(x1: &GridFunction, x2: &GridFunction) -> f64 {
        // Independent p = 2 route: direct weighted sums, no shared helpers.
        let w = x1.rule().weights();
        let (a, b) = (x1.samples(), x2.samples());
        let mut aa = 0.0;
        let mut bb = 0.0;
        let mut ab = 0.0;
        for i in 0..w.len() {
            aa += w[i] * a[i] * a[i];
            bb += w[i] * b[i] * b[i];
            ab += w[i] * a[i] * b[i];
        }
        (aa * bb - ab * ab).sqrt()
    }

    #[test]
    fn gunawan_examples() {
        let n = 2048;
        let r = rule(n);
        let one = r.sample(|_| 1.0);
        let t = r.sample(|t| t);
        // Midpoint double sums of (u−v)² and |u−v| are exactly (1/6)(1 − 1/n²) and (1/3)(1 − 1/n²).
        let shrink = 1.0 - 1.0 / (n * n) as f64;
        assert_relative_eq!(
            gunawan_norm(&one, &t, 2.0).unwrap(),
            (shrink / 12.0).sqrt(),
            max_relative = 1e-12
        );
        assert_relative_eq!(gunawan_norm(&one, &t, 1.0).unwrap(), shrink / 6.0, max_relative = 1e-12);
        assert_relative_eq!(
            gunawan_norm(&one, &t, 2.0).unwrap(),
            1.0 / 12f64.sqrt(),
            max_relative = 1e-6
        );
        assert_eq!(gunawan_norm(&t, &t.scale(3.0), 1.5).unwrap(), 0.0);
        assert!(gunawan_norm(&t, &rule(16).sample(|t| t), 2.0).is_err());
        assert!(gunawan_norm(&t, &one, 0.9).is_err());
    }

    #[test]
    fn gahler_dependent_pair_is_zero() {
        let r = rule(128);
        let x = sample_function(&r, &"fourier:3,4".parse().unwrap()).unwrap();
        for p in [1.0, 1.5, 2.0, 3.0] {
            let est = gahler_norm(&x, &x.scale(-2.5), p, &AscentOptions::default()).unwrap();
            assert!(est.value < 1e-12, "p={p} value={}", est.value);
            assert!(est.is_lower_bound);
        }
        let zero = GridFunction::zeros(&r);
        let est = gahler_norm(&zero, &zero, 2.0, &AscentOptions::default()).unwrap();
        assert_eq!(est.value, 0.0);
    }

    #[test]
    fn gahler_matches_gram_at_p2() {
        let r = rule(256);
        let one = r.sample(|_| 1.0);
        let t = r.sample(|t| t);
        let est = gahler_norm(&one, &t, 2.0, &AscentOptions::default()).unwrap();
        assert_relative_eq!(est.value, gram_oracle(&one, &t), max_relative = 1e-6);
        assert_relative_eq!(est.value, 1.0 / 12f64.sqrt(), max_relative = 1e-5);
        for seed in 0..5 {
            let x1 = sample_function(&r, &format!("fourier:{seed},5").parse().unwrap()).unwrap();
            let x2 = sample_function(&r, &format!("fourier:{},5", seed + 100).parse().unwrap()).unwrap();
            let est = gahler_norm(&x1, &x2, 2.0, &AscentOptions::default()).unwrap();
            assert!(est.converged);
            assert_relative_eq!(est.value, gram_oracle(&x1, &x2), max_relative = 1e-6);
        }
    }

    #[test]
    fn gahler_certificate_reproduces_value() {
        let r = rule(200);
        let x1 = sample_function(&r, &"fourier:11,4".parse().unwrap()).unwrap();
        let x2 = sample_function(&r, &"nodal:12".parse().unwrap()).unwrap();
        for p in [1.0, 1.5, 3.0] {
            let q = conjugate_exponent(p).unwrap().q();
            let est = gahler_norm(&x1, &x2, p, &AscentOptions::default()).unwrap();
            let [y1, y2] = &est.maximizers[..] else { panic!() };
            assert!(crate::lp::lp_norm(y1, q).unwrap() <= 1.0 + 1e-12);
            assert!(crate::lp::lp_norm(y2, q).unwrap() <= 1.0 + 1e-12);
            let d = gahler_determinant(&x1, &x2, y1, y2).unwrap();
            assert_relative_eq!(d, est.value, max_relative = 1e-10);
        }
    }

    #[test]
    fn gahler_is_symmetric_in_its_arguments() {
        let r = rule(128);
        let x1 = sample_function(&r, &"fourier:5,3".parse().unwrap()).unwrap();
        let x2 = sample_function(&r, &"nodal:6".parse().unwrap()).unwrap();
        for p in [1.0, 1.5, 2.0, 3.0] {
            let opts = AscentOptions::default();
            let a = gahler_norm(&x1, &x2, p, &opts).unwrap().value;
            let b = gahler_norm(&x2, &x1, p, &opts).unwrap().value;
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn warm_start_is_used() {
        let r = rule(64);
        let x1 = sample_function(&r, &"fourier:1,4".parse().unwrap()).unwrap();
        let x2 = sample_function(&r, &"fourier:2,4".parse().unwrap()).unwrap();
        let opts = AscentOptions::default();
        let cold = gahler_norm(&x1, &x2, 3.0, &opts).unwrap();
        let pair = (cold.maximizers[0].clone(), cold.maximizers[1].clone());
        let warm = gahler_norm_warm(&x1, &x2, 3.0, &opts, &[pair]).unwrap();
        assert!(warm.value >= cold.value);
        assert_eq!(warm.starts, cold.starts + 2);
    }
}
