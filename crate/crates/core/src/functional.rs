//! Kernel-represented bilinear 2-functionals and their norms.
//!
//! Every bounded bilinear functional on the grid space is represented by a
//! [`Kernel`] through `f(x, y) = ∫∫ x(u) y(v) θ(u, v) du dv`, and
//! [`kernel_from_bilinear`] recovers the kernel from any bilinear evaluator.
//! Norms computed here:
//!
//! * [`yq_norm`]: operator norm of `T: L^p → L^q`, `(Tx)(v) = ∫ x(u) θ(u,v) du`;
//! * [`fnorm_21`]: `sup |f(x,y)| / (‖x‖_p ‖y‖_p)`;
//! * [`fnorm_22_g`], [`fnorm_22_h`]: `sup |f(x,y)| / ‖x,y‖` against the Gähler
//!   and Gunawan 2-norms, defined for antisymmetric kernels only.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::grid::{trig_mode, GridFunction, Kernel, QuadratureRule};
use crate::lp::{check_p, conjugate_exponent, dot_slice, extremal_into, norm_slice, signed_pow};
use crate::two_norm::{
    gahler_norm_warm, gunawan_slice, random_sphere_points, AscentOptions, FirstUpdate, GahlerProblem, NormEstimate,
};

/// Absolute antisymmetry tolerance (scaled by `max(1, max|θ|)`) required by the 2-norm duals.
pub const ANTISYMMETRY_TOL: f64 = 1e-10;

/// `(Tx)ⱼ = Σᵢ wᵢ xᵢ θᵢⱼ`.
pub(crate) fn apply_slice(w: &[f64], theta: &[f64], x: &[f64], out: &mut [f64]) {
    let n = w.len();
    out.iter_mut().for_each(|v| *v = 0.0);
    for i in 0..n {
        let c = w[i] * x[i];
        if c == 0.0 {
            continue;
        }
        let row = &theta[i * n..(i + 1) * n];
        for (o, t) in out.iter_mut().zip(row) {
            *o += c * t;
        }
    }
}

/// `(T*y)ᵢ = Σⱼ wⱼ θᵢⱼ yⱼ`.
pub(crate) fn apply_transpose_slice(w: &[f64], theta: &[f64], y: &[f64], out: &mut [f64]) {
    let n = w.len();
    for (i, o) in out.iter_mut().enumerate() {
        let row = &theta[i * n..(i + 1) * n];
        *o = row.iter().zip(w).zip(y).map(|((t, w), y)| t * w * y).sum();
    }
}

fn eval_slice(w: &[f64], theta: &[f64], x: &[f64], y: &[f64]) -> f64 {
    let n = w.len();
    let mut total = 0.0;
    for i in 0..n {
        let c = w[i] * x[i];
        if c == 0.0 {
            continue;
        }
        let row = &theta[i * n..(i + 1) * n];
        let inner: f64 = row.iter().zip(w).zip(y).map(|((t, w), y)| t * w * y).sum();
        total += c * inner;
    }
    total
}

fn ensure_kernel_grid(theta: &Kernel, x: &GridFunction) -> Result<()> {
    crate::grid::ensure_same(theta.rule(), x.rule())
}

pub fn apply_kernel(theta: &Kernel, x: &GridFunction) -> Result<GridFunction> {
    ensure_kernel_grid(theta, x)?;
    let mut out = vec![0.0; x.len()];
    apply_slice(theta.rule().weights(), theta.data(), x.samples(), &mut out);
    Ok(GridFunction::from_parts(theta.rule().clone(), out))
}

/// The adjoint operator, built from the transposed kernel.
pub fn apply_transpose(theta: &Kernel, y: &GridFunction) -> Result<GridFunction> {
    ensure_kernel_grid(theta, y)?;
    let mut out = vec![0.0; y.len()];
    apply_transpose_slice(theta.rule().weights(), theta.data(), y.samples(), &mut out);
    Ok(GridFunction::from_parts(theta.rule().clone(), out))
}

/// `f(x, y) = ∫∫ x(u) y(v) θ(u, v) du dv`.
pub fn eval_f(theta: &Kernel, x: &GridFunction, y: &GridFunction) -> Result<f64> {
    ensure_kernel_grid(theta, x)?;
    ensure_kernel_grid(theta, y)?;
    Ok(eval_slice(
        theta.rule().weights(),
        theta.data(),
        x.samples(),
        y.samples(),
    ))
}

/// `(θᵢⱼ − θⱼᵢ) / 2`.
pub fn antisym_part(theta: &Kernel) -> Kernel {
    let n = theta.size();
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            data[i * n + j] = 0.5 * (theta.get(i, j) - theta.get(j, i));
        }
    }
    Kernel::from_parts(theta.rule().clone(), data)
}

/// `maxᵢⱼ |θᵢⱼ + θⱼᵢ|`.
pub fn antisymmetry_defect(theta: &Kernel) -> f64 {
    let n = theta.size();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((theta.get(i, j) + theta.get(j, i)).abs());
        }
    }
    worst
}

pub fn is_antisymmetric(theta: &Kernel, tol: f64) -> bool {
    antisymmetry_defect(theta) <= tol
}

fn require_antisymmetric(theta: &Kernel) -> Result<()> {
    let defect = antisymmetry_defect(theta);
    if defect <= ANTISYMMETRY_TOL * theta.max_abs().max(1.0) {
        Ok(())
    } else {
        Err(Error::NotAntisymmetric(defect))
    }
}

/// Closed form for `p = 1`: the unit ball of `L¹` has extreme points
/// `±eᵢ/wᵢ`, which map to the kernel rows.
fn max_entry(theta: &Kernel) -> (f64, usize, usize) {
    let n = theta.size();
    let mut best = (0.0, 0, 0);
    for i in 0..n {
        for j in 0..n {
            let v = theta.get(i, j).abs();
            if v > best.0 {
                best = (v, i, j);
            }
        }
    }
    best
}

fn scaled_indicator(rule: &Arc<QuadratureRule>, i: usize, sign: f64) -> GridFunction {
    let mut f = GridFunction::indicator(rule, i).scale(sign / rule.weights()[i]);
    if sign == 0.0 {
        f = GridFunction::zeros(rule);
    }
    f
}

fn starting_points(w: &[f64], p: f64, opts: &AscentOptions) -> Vec<Vec<f64>> {
    let n = w.len();
    let one = vec![1.0; n];
    let mut starts = vec![one];
    starts.extend(random_sphere_points(w, p, opts.starts, opts.seed));
    starts
}

/// Operator norm of `T: L^p → L^q`, `sup_{‖x‖_p = 1} ‖Tx‖_q`.
///
/// For `p > 1` this is a nonlinear power iteration: `w ← J_q(Tx)`,
/// `x ← J_q(T*w)`, where `J_q(z)` is the Hölder extremal of `z` in the
/// `q`-norm. Each step cannot decrease `‖Tx‖_q`. The maximizer is `[x]`.
/// For `p = 1` the value is the exact `maxᵢⱼ|θᵢⱼ|`.
pub fn yq_norm(theta: &Kernel, p: f64, opts: &AscentOptions) -> Result<NormEstimate> {
    let exp = conjugate_exponent(p)?;
    let rule = theta.rule();
    if p == 1.0 {
        let (value, i, j) = max_entry(theta);
        let x = scaled_indicator(rule, i, theta.get(i, j).signum());
        return Ok(NormEstimate::exact(value, vec![x]));
    }
    let q = exp.q();
    let w = rule.weights();
    let n = w.len();
    let data = theta.data();
    let mut tx = vec![0.0; n];
    let mut dual = vec![0.0; n];
    let mut back = vec![0.0; n];

    let starts = starting_points(w, p, opts);
    let mut best: Option<(f64, Vec<f64>, bool)> = None;
    let mut iterations = 0;
    for start in &starts {
        let mut x = start.clone();
        let norm = norm_slice(w, &x, p);
        x.iter_mut().for_each(|v| *v /= norm);
        let mut value = f64::NEG_INFINITY;
        let mut converged = false;
        for _ in 0..opts.max_iter {
            iterations += 1;
            apply_slice(w, data, &x, &mut tx);
            let next = norm_slice(w, &tx, q) / norm_slice(w, &x, p);
            if next - value <= opts.tol * next {
                value = value.max(next);
                converged = true;
                break;
            }
            value = next;
            if extremal_into(w, &tx, q, &mut dual) == 0.0 {
                converged = true;
                break;
            }
            apply_transpose_slice(w, data, &dual, &mut back);
            if extremal_into(w, &back, q, &mut x) == 0.0 {
                converged = true;
                break;
            }
        }
        if best.as_ref().is_none_or(|b| value > b.0) {
            best = Some((value, x, converged));
        }
    }
    let (value, x, converged) = best.expect("at least one start");
    Ok(NormEstimate {
        value: value.max(0.0),
        converged,
        iterations,
        starts: starts.len(),
        maximizers: vec![GridFunction::from_parts(rule.clone(), x)],
        is_lower_bound: true,
    })
}

/// `sup |f(x, y)| / (‖x‖_p ‖y‖_p)` by alternating maximization.
///
/// With `x` fixed, `f(x, ·)` is the linear functional with representer `Tx`,
/// maximized by its Hölder extremal; symmetrically for `y` through `T*`.
/// The value is evaluated from the bilinear form itself. At `p = 1` every
/// extreme point `eᵢ/wᵢ` of the `L¹` ball is used as a start, which makes
/// the result exact. Maximizers are `[x, y]`.
pub fn fnorm_21(theta: &Kernel, p: f64, opts: &AscentOptions) -> Result<NormEstimate> {
    let exp = conjugate_exponent(p)?;
    let q = exp.q();
    let rule = theta.rule();
    let w = rule.weights();
    let n = w.len();
    let data = theta.data();

    let starts: Vec<Vec<f64>> = if p == 1.0 {
        (0..n)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0 / w[i];
                e
            })
            .collect()
    } else {
        let mut s = starting_points(w, p, opts);
        // Keep the x-starts distinct from the power iteration's.
        s.rotate_left(1);
        s
    };

    let mut tx = vec![0.0; n];
    let mut ty = vec![0.0; n];
    let mut best: Option<(f64, Vec<f64>, Vec<f64>, bool)> = None;
    let mut iterations = 0;
    for start in &starts {
        let mut x = start.clone();
        let mut y = vec![0.0; n];
        let mut value = f64::NEG_INFINITY;
        let mut converged = false;
        for _ in 0..opts.max_iter {
            iterations += 1;
            apply_slice(w, data, &x, &mut tx);
            extremal_into(w, &tx, q, &mut y);
            apply_transpose_slice(w, data, &y, &mut ty);
            extremal_into(w, &ty, q, &mut x);
            let nx = norm_slice(w, &x, p);
            let ny = norm_slice(w, &y, p);
            let next = if nx == 0.0 || ny == 0.0 {
                0.0
            } else {
                eval_slice(w, data, &x, &y).abs() / (nx * ny)
            };
            if next - value <= opts.tol * next {
                value = value.max(next);
                converged = true;
                break;
            }
            value = next;
        }
        if best.as_ref().is_none_or(|b| value > b.0) {
            best = Some((value, x, y, converged));
        }
    }
    let (value, x, y, converged) = best.expect("at least one start");
    Ok(NormEstimate {
        value: value.max(0.0),
        converged,
        iterations,
        starts: starts.len(),
        maximizers: vec![
            GridFunction::from_parts(rule.clone(), x),
            GridFunction::from_parts(rule.clone(), y),
        ],
        // p = 1 visits every extreme point of the unit ball.
        is_lower_bound: p != 1.0,
    })
}

/// Settings for [`fnorm_22_g`] and [`fnorm_22_h`].
#[derive(Debug, Clone, PartialEq)]
pub struct Fnorm22Options {
    /// Ratio ascent: tolerance, iteration cap, random start count and seed.
    pub ascent: AscentOptions,
    /// Settings of every Gähler evaluation inside the G variant.
    pub gahler: AscentOptions,
    /// Settings of the `‖f‖₂,₁` solve whose maximizer seeds the search.
    pub fnorm21: AscentOptions,
    /// Number of trigonometric modes spanning each search direction.
    pub modes: usize,
    /// Extra `(x, y)` starting pairs, e.g. maximizers of the other variant.
    pub anchors: Vec<(GridFunction, GridFunction)>,
    /// Start from the `‖f‖₂,₁` maximizer as well.
    pub fnorm21_anchor: bool,
}

impl Default for Fnorm22Options {
    fn default() -> Self {
        Fnorm22Options {
            ascent: AscentOptions {
                starts: 16,
                ..AscentOptions::default()
            },
            gahler: AscentOptions::default(),
            fnorm21: AscentOptions {
                tol: 1e-12,
                max_iter: 2000,
                ..AscentOptions::default()
            },
            modes: 12,
            anchors: Vec::new(),
            fnorm21_anchor: true,
        }
    }
}

/// Which 2-norm sits in the denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Denominator {
    Gahler,
    Gunawan,
}

/// Norm and gradient of a 2-norm at a pair of grid functions.
struct PairNorm<'a> {
    kind: Denominator,
    w: &'a [f64],
    p: f64,
    gahler: AscentOptions,
}

/// Dual vectors tracked between Gähler evaluations along one ascent path.
#[derive(Clone)]
struct DualState {
    y1: Vec<f64>,
    y2: Vec<f64>,
}

struct Evaluated {
    norm: f64,
    grad_x: Vec<f64>,
    grad_y: Vec<f64>,
    dual: Option<DualState>,
}

impl PairNorm<'_> {
    fn evaluate(&self, x: &[f64], y: &[f64], dual: Option<&DualState>) -> Evaluated {
        match self.kind {
            Denominator::Gunawan => self.gunawan(x, y),
            Denominator::Gahler => self.gahler(x, y, dual.expect("Gähler evaluation needs a dual state")),
        }
    }

    fn gunawan(&self, x: &[f64], y: &[f64]) -> Evaluated {
        let (w, p) = (self.w, self.p);
        let n = w.len();
        let mut total = 0.0;
        let mut gx = vec![0.0; n];
        let mut gy = vec![0.0; n];
        for i in 0..n {
            for j in i + 1..n {
                let d = x[i] * y[j] - x[j] * y[i];
                let wij = w[i] * w[j];
                total += wij * crate::lp::pow_abs(d, p);
                let s = signed_pow(d, p - 1.0);
                // ∂/∂x_k of Σ_{i<j} wᵢwⱼ|Dᵢⱼ|^p is p·w_k Σⱼ wⱼ s_kj yⱼ over all j.
                gx[i] += w[j] * s * y[j];
                gx[j] -= w[i] * s * y[i];
                gy[i] -= w[j] * s * x[j];
                gy[j] += w[i] * s * x[i];
            }
        }
        let norm = if p == 1.0 { total } else { total.powf(1.0 / p) };
        // ∂N = ∂(N^p) / (p N^{p−1}); the factor p cancels.
        let scale = if norm > 0.0 {
            1.0 / crate::lp::pow_abs(norm, p - 1.0)
        } else {
            0.0
        };
        for k in 0..n {
            gx[k] *= w[k] * scale;
            gy[k] *= w[k] * scale;
        }
        Evaluated {
            norm,
            grad_x: gx,
            grad_y: gy,
            dual: None,
        }
    }

    fn gahler(&self, x: &[f64], y: &[f64], dual: &DualState) -> Evaluated {
        let w = self.w;
        let problem = GahlerProblem {
            w,
            x1: x,
            x2: y,
            p: self.p,
        };
        let a = problem.ascend(&dual.y2, FirstUpdate::Y1, self.gahler.tol, self.gahler.max_iter);
        let b = problem.ascend(&dual.y1, FirstUpdate::Y2, self.gahler.tol, self.gahler.max_iter);
        let run = if b.value > a.value { b } else { a };
        // Envelope theorem: the gradient of the supremum is the gradient of
        // the determinant at the maximizing dual pair.
        let c_y2 = dot_slice(w, y, &run.y2);
        let c_y1 = dot_slice(w, y, &run.y1);
        let c_x1 = dot_slice(w, x, &run.y1);
        let c_x2 = dot_slice(w, x, &run.y2);
        let n = w.len();
        let mut gx = vec![0.0; n];
        let mut gy = vec![0.0; n];
        for k in 0..n {
            gx[k] = w[k] * (c_y2 * run.y1[k] - c_y1 * run.y2[k]);
            gy[k] = w[k] * (c_x1 * run.y2[k] - c_x2 * run.y1[k]);
        }
        Evaluated {
            norm: run.value.max(0.0),
            grad_x: gx,
            grad_y: gy,
            dual: Some(DualState { y1: run.y1, y2: run.y2 }),
        }
    }
}

/// Search space of one ascent path: `x = Σ cₐ Bₐ`, `y = Σ dᵦ Bᵦ`, where
/// each basis starts with the path's anchor followed by trigonometric modes.
struct RatioSearch<'a> {
    w: &'a [f64],
    p: f64,
    basis_x: Vec<Vec<f64>>,
    basis_y: Vec<Vec<f64>>,
    /// `Fₐᵦ = f(Bₐ, Bᵦ)`.
    form: Vec<f64>,
    norm: &'a PairNorm<'a>,
}

struct Point {
    cx: Vec<f64>,
    cy: Vec<f64>,
    ratio: f64,
    grad: Vec<f64>,
    dual: Option<DualState>,
}

impl RatioSearch<'_> {
    fn synth(basis: &[Vec<f64>], c: &[f64]) -> Vec<f64> {
        let n = basis[0].len();
        let mut out = vec![0.0; n];
        for (b, ci) in basis.iter().zip(c) {
            if *ci == 0.0 {
                continue;
            }
            for (o, v) in out.iter_mut().zip(b) {
                *o += ci * v;
            }
        }
        out
    }

    fn normalize(&self, basis: &[Vec<f64>], c: &mut [f64]) -> bool {
        let norm = norm_slice(self.w, &Self::synth(basis, c), self.p);
        if norm == 0.0 || !norm.is_finite() {
            return false;
        }
        c.iter_mut().for_each(|v| *v /= norm);
        true
    }

    fn evaluate(&self, mut cx: Vec<f64>, mut cy: Vec<f64>, dual: Option<&DualState>) -> Option<Point> {
        if !self.normalize(&self.basis_x, &mut cx) || !self.normalize(&self.basis_y, &mut cy) {
            return None;
        }
        let x = Self::synth(&self.basis_x, &cx);
        let y = Self::synth(&self.basis_y, &cy);
        let m = cx.len();
        let mut f_cy = vec![0.0; m];
        let mut ft_cx = vec![0.0; m];
        let mut f = 0.0;
        for a in 0..m {
            for b in 0..m {
                let v = self.form[a * m + b];
                f_cy[a] += v * cy[b];
                ft_cx[b] += v * cx[a];
            }
        }
        for a in 0..m {
            f += cx[a] * f_cy[a];
        }
        let ev = self.norm.evaluate(&x, &y, dual);
        // ‖x‖_p = ‖y‖_p = 1 here, so this rejects near-dependent pairs.
        if ev.norm.is_nan() || ev.norm <= 1e-10 {
            return None;
        }
        let ratio = f.abs() / ev.norm;
        let sign = if f < 0.0 { -1.0 } else { 1.0 };
        let project = |basis: &[Vec<f64>], g: &[f64]| -> Vec<f64> {
            basis
                .iter()
                .map(|b| b.iter().zip(g).map(|(b, g)| b * g).sum())
                .collect()
        };
        let nx = project(&self.basis_x, &ev.grad_x);
        let ny = project(&self.basis_y, &ev.grad_y);
        let inv = 1.0 / ev.norm;
        let grad = (0..m)
            .map(|a| inv * (sign * f_cy[a] - ratio * nx[a]))
            .chain((0..m).map(|b| inv * (sign * ft_cx[b] - ratio * ny[b])))
            .collect();
        Some(Point {
            cx,
            cy,
            ratio,
            grad,
            dual: ev.dual,
        })
    }

    /// Normalized-gradient ascent with step doubling and halving.
    fn ascend(&self, start: Point, opts: &AscentOptions) -> (Point, usize, bool) {
        let m = start.cx.len();
        let mut current = start;
        let mut step = 0.1;
        let mut iterations = 0;
        let mut converged = false;
        while iterations < opts.max_iter {
            iterations += 1;
            let gnorm = current.grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            let cnorm = current.cx.iter().chain(&current.cy).map(|c| c * c).sum::<f64>().sqrt();
            if gnorm == 0.0 || !gnorm.is_finite() {
                converged = true;
                break;
            }
            let mut accepted = None;
            for _ in 0..40 {
                let scale = step * cnorm / gnorm;
                let cx: Vec<f64> = (0..m).map(|a| current.cx[a] + scale * current.grad[a]).collect();
                let cy: Vec<f64> = (0..m).map(|b| current.cy[b] + scale * current.grad[m + b]).collect();
                match self.evaluate(cx, cy, current.dual.as_ref()) {
                    Some(trial) if trial.ratio > current.ratio => {
                        accepted = Some(trial);
                        break;
                    }
                    _ => step *= 0.5,
                }
            }
            let Some(next) = accepted else {
                converged = true;
                break;
            };
            let improvement = next.ratio - current.ratio;
            current = next;
            step = (step * 2.0).min(1.0);
            if improvement <= opts.tol * current.ratio {
                converged = true;
                break;
            }
        }
        (current, iterations, converged)
    }
}

fn fnorm_22(theta: &Kernel, p: f64, opts: &Fnorm22Options, kind: Denominator) -> Result<NormEstimate> {
    check_p(p)?;
    require_antisymmetric(theta)?;
    let rule = theta.rule().clone();
    for (x, y) in &opts.anchors {
        ensure_kernel_grid(theta, x)?;
        ensure_kernel_grid(theta, y)?;
    }
    if theta.max_abs() == 0.0 {
        let zero = GridFunction::zeros(&rule);
        return Ok(NormEstimate::exact(0.0, vec![zero.clone(), zero]));
    }
    let w = rule.weights();
    let n = w.len();
    let data = theta.data();

    let modes: Vec<Vec<f64>> = (0..opts.modes)
        .map(|m| rule.nodes().iter().map(|&t| trig_mode(m, t)).collect())
        .collect();

    let mut anchors: Vec<(Vec<f64>, Vec<f64>)> = opts
        .anchors
        .iter()
        .map(|(x, y)| (x.samples().to_vec(), y.samples().to_vec()))
        .collect();
    if opts.fnorm21_anchor {
        let est = fnorm_21(theta, p, &opts.fnorm21)?;
        anchors.push((
            est.maximizers[0].samples().to_vec(),
            est.maximizers[1].samples().to_vec(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.ascent.seed);
    for _ in 0..opts.ascent.starts {
        let mut draw = || -> Vec<f64> {
            let c: Vec<f64> = (0..opts.modes)
                .map(|m| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    z / (1.0 + m.div_ceil(2) as f64)
                })
                .collect();
            RatioSearch::synth(&modes, &c)
        };
        let x = draw();
        let y = draw();
        anchors.push((x, y));
    }

    let pair_norm = PairNorm {
        kind,
        w,
        p,
        gahler: opts.gahler,
    };

    let mut best: Option<(f64, Vec<f64>, Vec<f64>, bool)> = None;
    let mut iterations = 0;
    let mut tx = vec![0.0; n];
    for (ax, ay) in &anchors {
        let basis_x: Vec<Vec<f64>> = std::iter::once(ax.clone()).chain(modes.iter().cloned()).collect();
        let basis_y: Vec<Vec<f64>> = std::iter::once(ay.clone()).chain(modes.iter().cloned()).collect();
        let m = basis_x.len();
        let ty: Vec<Vec<f64>> = basis_y
            .iter()
            .map(|b| {
                let mut out = vec![0.0; n];
                apply_transpose_slice(w, data, b, &mut out);
                out
            })
            .collect();
        let mut form = vec![0.0; m * m];
        for a in 0..m {
            for b in 0..m {
                form[a * m + b] = dot_slice(w, &basis_x[a], &ty[b]);
            }
        }
        let search = RatioSearch {
            w,
            p,
            basis_x,
            basis_y,
            form,
            norm: &pair_norm,
        };
        let mut e0 = vec![0.0; m];
        e0[0] = 1.0;
        let dual = match kind {
            Denominator::Gunawan => None,
            Denominator::Gahler => {
                let x = GridFunction::from_parts(rule.clone(), ax.clone());
                let y = GridFunction::from_parts(rule.clone(), ay.clone());
                let est = gahler_norm_warm(&x, &y, p, &opts.gahler, &[])?;
                Some(DualState {
                    y1: est.maximizers[0].samples().to_vec(),
                    y2: est.maximizers[1].samples().to_vec(),
                })
            }
        };
        let Some(start) = search.evaluate(e0.clone(), e0, dual.as_ref()) else {
            continue;
        };
        let (end, its, converged) = search.ascend(start, &opts.ascent);
        iterations += its;

        // Certify: evaluate the bilinear form directly and, for the Gähler
        // denominator, re-solve it with all starts plus the tracked duals.
        let x = RatioSearch::synth(&search.basis_x, &end.cx);
        let y = RatioSearch::synth(&search.basis_y, &end.cy);
        apply_slice(w, data, &x, &mut tx);
        let f = dot_slice(w, &y, &tx).abs();
        let denominator = match kind {
            Denominator::Gunawan => gunawan_slice(w, &x, &y, p),
            Denominator::Gahler => {
                let xg = GridFunction::from_parts(rule.clone(), x.clone());
                let yg = GridFunction::from_parts(rule.clone(), y.clone());
                let warm: Vec<(GridFunction, GridFunction)> = end
                    .dual
                    .iter()
                    .map(|d| {
                        (
                            GridFunction::from_parts(rule.clone(), d.y1.clone()),
                            GridFunction::from_parts(rule.clone(), d.y2.clone()),
                        )
                    })
                    .collect();
                gahler_norm_warm(&xg, &yg, p, &opts.gahler, &warm)?.value
            }
        };
        let scale = norm_slice(w, &x, p) * norm_slice(w, &y, p);
        if denominator.is_nan() || denominator <= 1e-10 * scale {
            continue;
        }
        let value = f / denominator;
        if best.as_ref().is_none_or(|b| value > b.0) {
            best = Some((value, x, y, converged));
        }
    }
    let Some((value, x, y, converged)) = best else {
        return Err(Error::Degenerate(
            "every search path collapsed to a dependent pair".into(),
        ));
    };
    Ok(NormEstimate {
        value,
        converged,
        iterations,
        starts: anchors.len(),
        maximizers: vec![
            GridFunction::from_parts(rule.clone(), x),
            GridFunction::from_parts(rule, y),
        ],
        is_lower_bound: true,
    })
}

/// `sup |f(x,y)| / ‖x,y‖ᴳ` over independent pairs; requires an antisymmetric kernel.
pub fn fnorm_22_g(theta: &Kernel, p: f64, opts: &Fnorm22Options) -> Result<NormEstimate> {
    fnorm_22(theta, p, opts, Denominator::Gahler)
}

/// `sup |f(x,y)| / ‖x,y‖ᴴ` over independent pairs; requires an antisymmetric kernel.
pub fn fnorm_22_h(theta: &Kernel, p: f64, opts: &Fnorm22Options) -> Result<NormEstimate> {
    fnorm_22(theta, p, opts, Denominator::Gunawan)
}

/// Recovers the kernel of a bilinear evaluator: `θᵢⱼ = f(eᵢ, eⱼ) / (wᵢ wⱼ)`.
pub fn kernel_from_bilinear(
    f: impl Fn(&GridFunction, &GridFunction) -> f64,
    rule: &Arc<QuadratureRule>,
) -> Result<Kernel> {
    let n = rule.len();
    if n == 0 {
        return Err(Error::InvalidSize(0));
    }
    let w = rule.weights();
    let indicators: Vec<GridFunction> = (0..n).map(|i| GridFunction::indicator(rule, i)).collect();
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            data[i * n + j] = f(&indicators[i], &indicators[j]) / (w[i] * w[j]);
        }
    }
    Kernel::new(rule.clone(), data)
}
