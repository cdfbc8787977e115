//! Semi-inner-product geometry of the discretized `L^p[0,1]`.
//!
//! `g(x, y) = ‖x‖_p^{2−p} ∫ |x|^{p−1} sgn(x) y` is linear in `y` but in
//! general not in `x`, and not symmetric for `p ≠ 2`. Argument order is
//! therefore kept exactly as written in every formula below.

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::lp::{check_p, norm_slice, signed_pow};

/// Relative threshold below which a Gram determinant counts as singular.
pub const SINGULAR_GRAM: f64 = 1e-12;

/// Volume snaps to zero when the orthogonalized second vector is this small
/// relative to the input.
const DEPENDENT_RELATIVE: f64 = 1e-12;

pub(crate) fn g_slice(w: &[f64], x: &[f64], y: &[f64], p: f64) -> f64 {
    let nx = norm_slice(w, x, p);
    if nx == 0.0 {
        return 0.0;
    }
    let s: f64 = w
        .iter()
        .zip(x)
        .zip(y)
        .map(|((w, x), y)| w * signed_pow(*x, p - 1.0) * y)
        .sum();
    if p == 2.0 {
        s
    } else {
        nx.powf(2.0 - p) * s
    }
}

/// The semi-inner product; `g(0, y) = 0`.
pub fn g(x: &GridFunction, y: &GridFunction, p: f64) -> Result<f64> {
    check_p(p)?;
    x.ensure_compatible(y)?;
    Ok(g_slice(x.rule().weights(), x.samples(), y.samples(), p))
}

/// `Γ(y₁,y₂) = g(y₁,y₁)g(y₂,y₂) − g(y₁,y₂)g(y₂,y₁)`.
pub fn gram_det(y1: &GridFunction, y2: &GridFunction, p: f64) -> Result<f64> {
    Ok(g(y1, y1, p)? * g(y2, y2, p)? - g(y1, y2, p)? * g(y2, y1, p)?)
}

/// Projection of `x` onto `span{y₁, y₂}` from the bordered Gram determinant.
///
/// The result `x_Y` satisfies `g(yₖ, x − x_Y) = 0` for both `k`, and fixes
/// every element of the span.
pub fn g_projection(x: &GridFunction, y1: &GridFunction, y2: &GridFunction, p: f64) -> Result<GridFunction> {
    x.ensure_compatible(y1)?;
    x.ensure_compatible(y2)?;
    let g11 = g(y1, y1, p)?;
    let g12 = g(y1, y2, p)?;
    let g21 = g(y2, y1, p)?;
    let g22 = g(y2, y2, p)?;
    let gamma = g11 * g22 - g12 * g21;
    // g(y, y) = ‖y‖², so this is the relative threshold against ‖y₁‖²‖y₂‖².
    let threshold = SINGULAR_GRAM * g11 * g22;
    if gamma.is_nan() || gamma.abs() <= threshold {
        return Err(Error::SingularGram { gamma, threshold });
    }
    let g1x = g(y1, x, p)?;
    let g2x = g(y2, x, p)?;
    let m01 = g1x * g22 - g12 * g2x;
    let m02 = g1x * g21 - g11 * g2x;
    y1.combine(m01 / gamma, y2, -m02 / gamma)
}

/// Left g-orthogonal pair: `x₁° = x₁`, `x₂° = x₂ − (g(x₁,x₂)/g(x₁,x₁))·x₁`.
pub fn g_orthogonalize(x1: &GridFunction, x2: &GridFunction, p: f64) -> Result<(GridFunction, GridFunction)> {
    x1.ensure_compatible(x2)?;
    let g11 = g(x1, x1, p)?;
    if g11 == 0.0 {
        return Err(Error::Degenerate(
            "cannot orthogonalize against the zero function".into(),
        ));
    }
    let c = g(x1, x2, p)? / g11;
    let x2o = x2.combine(1.0, x1, -c)?;
    Ok((x1.clone(), x2o))
}

/// Volume of the 2-rectangle, `‖x₁°‖_p·‖x₂°‖_p`; zero for dependent inputs.
pub fn volume(x1: &GridFunction, x2: &GridFunction, p: f64) -> Result<f64> {
    check_p(p)?;
    x1.ensure_compatible(x2)?;
    let w = x1.rule().weights();
    if x1.is_zero() {
        return Ok(0.0);
    }
    let (x1o, x2o) = g_orthogonalize(x1, x2, p)?;
    let n1 = norm_slice(w, x1o.samples(), p);
    let n2 = norm_slice(w, x2o.samples(), p);
    if n2 <= DEPENDENT_RELATIVE * norm_slice(w, x2.samples(), p) {
        return Ok(0.0);
    }
    Ok(n1 * n2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_rule, sample_function, QuadratureRule, RuleKind};
    use crate::lp::{lp_norm, pairing};
    use approx::assert_relative_eq;
    use std::sync::Arc;

    fn gauss(n: usize) -> Arc<QuadratureRule> {
        make_rule(RuleKind::GaussComposite { nodes_per_panel: 4 }, n).unwrap()
    }

    fn fourier(r: &Arc<QuadratureRule>, seed: u64) -> GridFunction {
        sample_function(r, &format!("fourier:{seed},4").parse().unwrap()).unwrap()
    }

    #[test]
    fn g_examples() {
        let r = gauss(256);
        let t = r.sample(|t| t);
        let one = r.sample(|_| 1.0);
        // ‖t‖₃² = (1/4)^{2/3}
        assert_relative_eq!(g(&t, &t, 3.0).unwrap(), 0.25f64.powf(2.0 / 3.0), max_relative = 1e-12);
        assert_relative_eq!(g(&one, &t, 2.0).unwrap(), 0.5, max_relative = 1e-13);
        assert_eq!(g(&GridFunction::zeros(&r), &t, 1.5).unwrap(), 0.0);
    }

    #[test]
    fn gram_examples() {
        let r = gauss(256);
        let one = r.sample(|_| 1.0);
        let t = r.sample(|t| t);
        assert_relative_eq!(gram_det(&one, &t, 2.0).unwrap(), 1.0 / 12.0, max_relative = 1e-12);
        assert!(gram_det(&t, &t, 3.0).unwrap().abs() < 1e-15);

        // p = 3: independent re-evaluation of the four entries at 4× resolution.
        let direct = |n: usize| {
            let r = make_rule(RuleKind::Midpoint, n).unwrap();
            let (u, w) = (r.nodes(), r.weights());
            let norm3 = |f: &dyn Fn(f64) -> f64| {
                u.iter()
                    .zip(w)
                    .map(|(u, w)| w * f(*u).abs().powi(3))
                    .sum::<f64>()
                    .cbrt()
            };
            let gg = |a: &dyn Fn(f64) -> f64, b: &dyn Fn(f64) -> f64| {
                let s: f64 = u.iter().zip(w).map(|(u, w)| w * a(*u).abs() * a(*u) * b(*u)).sum();
                s / norm3(a)
            };
            let f1 = |_: f64| 1.0;
            let ft = |t: f64| t;
            gg(&f1, &f1) * gg(&ft, &ft) - gg(&f1, &ft) * gg(&ft, &f1)
        };
        let r = make_rule(RuleKind::Midpoint, 256).unwrap();
        let value = gram_det(&r.sample(|_| 1.0), &r.sample(|t| t), 3.0).unwrap();
        assert_relative_eq!(value, direct(1024), max_relative = 1e-4);
    }

    #[test]
    fn projection_fixes_the_span() {
        let r = gauss(128);
        let y1 = fourier(&r, 1);
        let y2 = fourier(&r, 2);
        let x = y1.combine(0.7, &y2, -1.3).unwrap();
        for p in [1.0, 1.5, 2.0, 3.0] {
            let xy = g_projection(&x, &y1, &y2, p).unwrap();
            for (a, b) in xy.samples().iter().zip(x.samples()) {
                assert!((a - b).abs() < 1e-10, "p={p}");
            }
        }
    }

    #[test]
    fn projection_of_t_squared_onto_affine_functions() {
        let r = gauss(256);
        let x = r.sample(|t| t * t);
        let xy = g_projection(&x, &r.sample(|_| 1.0), &r.sample(|t| t), 2.0).unwrap();
        for (v, u) in xy.samples().iter().zip(r.nodes()) {
            assert!((v - (u - 1.0 / 6.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn projection_onto_orthonormal_pair() {
        let r = gauss(256);
        let y1 = r.sample(|_| 1.0);
        let y2 = r.sample(|t| 12f64.sqrt() * (t - 0.5));
        let x = fourier(&r, 9);
        let xy = g_projection(&x, &y1, &y2, 2.0).unwrap();
        let expected = y1
            .combine(pairing(&y1, &x).unwrap(), &y2, pairing(&y2, &x).unwrap())
            .unwrap();
        for (a, b) in xy.samples().iter().zip(expected.samples()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn projection_rejects_singular_gram() {
        let r = gauss(64);
        let y = fourier(&r, 4);
        let err = g_projection(&fourier(&r, 5), &y, &y.scale(2.0), 1.5).unwrap_err();
        assert!(matches!(err, Error::SingularGram { .. }));
    }

    #[test]
    fn orthogonalize_examples() {
        let r = gauss(256);
        let (a, b) = g_orthogonalize(&r.sample(|_| 1.0), &r.sample(|t| t), 2.0).unwrap();
        assert!(a.samples().iter().all(|&v| v == 1.0));
        for (v, u) in b.samples().iter().zip(r.nodes()) {
            assert!((v - (u - 0.5)).abs() < 1e-13);
        }
        let x = fourier(&r, 3);
        let (_, b) = g_orthogonalize(&x, &x.scale(-4.0), 1.5).unwrap();
        assert!(lp_norm(&b, 1.5).unwrap() < 1e-13);
        for p in [1.0, 1.5, 3.0] {
            let (a, b) = g_orthogonalize(&fourier(&r, 7), &fourier(&r, 8), p).unwrap();
            let scale = lp_norm(&a, p).unwrap() * lp_norm(&b, p).unwrap();
            assert!(g(&a, &b, p).unwrap().abs() <= 1e-10 * scale);
        }
        assert!(matches!(
            g_orthogonalize(&GridFunction::zeros(&r), &x, 2.0),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn volume_examples() {
        let r = gauss(256);
        let one = r.sample(|_| 1.0);
        let t = r.sample(|t| t);
        assert_relative_eq!(volume(&one, &t, 2.0).unwrap(), 1.0 / 12f64.sqrt(), max_relative = 1e-12);
        assert_eq!(volume(&one, &one.scale(2.0), 3.0).unwrap(), 0.0);
        assert_eq!(volume(&GridFunction::zeros(&r), &t, 3.0).unwrap(), 0.0);
        let x1 = fourier(&r, 21);
        let x2 = fourier(&r, 22);
        let v = volume(&x1, &x2, 2.0).unwrap();
        assert_relative_eq!(v, gram_det(&x1, &x2, 2.0).unwrap().sqrt(), max_relative = 1e-8);
    }
}
