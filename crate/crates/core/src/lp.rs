//! Weighted p-norms, the dual pairing and Hölder extremals.
//!
//! The slice-level helpers here are the inner loops of every optimizer in
//! the crate; the `GridFunction` wrappers add grid and domain checks.

use crate::error::{Error, Result};
use crate::grid::GridFunction;

/// A conjugate pair `1/p + 1/q = 1`; `q = ∞` exactly when `p = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponent {
    p: f64,
    q: f64,
}

impl Exponent {
    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }
}

pub fn conjugate_exponent(p: f64) -> Result<Exponent> {
    check_p(p)?;
    let q = if p == 1.0 { f64::INFINITY } else { p / (p - 1.0) };
    Ok(Exponent { p, q })
}

/// Accepts `1 ≤ p < ∞`.
pub(crate) fn check_p(p: f64) -> Result<()> {
    if p.is_finite() && p >= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("p = {p} must satisfy 1 ≤ p < ∞")))
    }
}

/// Accepts `1 ≤ p ≤ ∞`.
fn check_p_or_inf(p: f64) -> Result<()> {
    if p >= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("p = {p} must satisfy 1 ≤ p ≤ ∞")))
    }
}

/// `|a|^p`, with the common exponents kept off `powf`.
#[inline]
pub(crate) fn pow_abs(a: f64, p: f64) -> f64 {
    let a = a.abs();
    if p == 2.0 {
        a * a
    } else if p == 1.0 {
        a
    } else if p == 3.0 {
        a * a * a
    } else if p == 1.5 {
        a * a.sqrt()
    } else {
        a.powf(p)
    }
}

/// `sgn(a)|a|^e` with `sgn(0) = 0`.
#[inline]
pub(crate) fn signed_pow(a: f64, e: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else if e == 1.0 {
        a
    } else if e == 0.0 {
        a.signum()
    } else {
        a.signum() * pow_abs(a, e)
    }
}

pub(crate) fn norm_slice(w: &[f64], x: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return x.iter().fold(0.0, |m, v| m.max(v.abs()));
    }
    let s: f64 = w.iter().zip(x).map(|(w, x)| w * pow_abs(*x, p)).sum();
    if p == 1.0 {
        s
    } else if p == 2.0 {
        s.sqrt()
    } else {
        s.powf(1.0 / p)
    }
}

pub(crate) fn dot_slice(w: &[f64], x: &[f64], y: &[f64]) -> f64 {
    w.iter().zip(x).zip(y).map(|((w, x), y)| w * x * y).sum()
}

/// Writes into `y` the unit vector of the dual norm that attains
/// `⟨z, y⟩ = ‖z‖_p` and returns `‖z‖_p`. `p` may be infinite.
pub(crate) fn extremal_into(w: &[f64], z: &[f64], p: f64, y: &mut [f64]) -> f64 {
    if p.is_infinite() {
        let (k, m) = z.iter().enumerate().fold(
            (0, 0.0),
            |(bk, bm), (i, v)| if v.abs() > bm { (i, v.abs()) } else { (bk, bm) },
        );
        y.iter_mut().for_each(|v| *v = 0.0);
        if m > 0.0 {
            y[k] = z[k].signum() / w[k];
        }
        return m;
    }
    let value = norm_slice(w, z, p);
    if value == 0.0 {
        y.iter_mut().for_each(|v| *v = 0.0);
        return 0.0;
    }
    if p == 1.0 {
        for (yi, zi) in y.iter_mut().zip(z) {
            *yi = if *zi == 0.0 { 0.0 } else { zi.signum() };
        }
    } else {
        let scale = 1.0 / pow_abs(value, p - 1.0);
        for (yi, zi) in y.iter_mut().zip(z) {
            *yi = signed_pow(*zi, p - 1.0) * scale;
        }
    }
    value
}

/// `(Σ wᵢ|xᵢ|^p)^{1/p}`; `p = f64::INFINITY` gives `maxᵢ|xᵢ|`.
pub fn lp_norm(x: &GridFunction, p: f64) -> Result<f64> {
    check_p_or_inf(p)?;
    Ok(norm_slice(x.rule().weights(), x.samples(), p))
}

/// `∫₀¹ x(u) y(u) du`.
pub fn pairing(x: &GridFunction, y: &GridFunction) -> Result<f64> {
    x.ensure_compatible(y)?;
    Ok(dot_slice(x.rule().weights(), x.samples(), y.samples()))
}

/// Output of [`holder_extremal`].
#[derive(Debug, Clone, PartialEq)]
pub struct Extremal {
    /// Attains `⟨z, y⟩ = ‖z‖_p` with `‖y‖_q = 1` (or `‖y‖_∞ ≤ 1` at `p = 1`).
    pub y: GridFunction,
    pub value: f64,
    /// Set when `z = 0`; `y` is then the zero function.
    pub degenerate: bool,
}

/// The function attaining equality in Hölder's inequality for `z`.
///
/// For `1 < p < ∞` this is `sgn(z)|z|^{p−1} / ‖z‖_p^{p−1}`; for `p = 1` it is
/// `sgn(z)`, with `0` on the zero set. `p = ∞` is also accepted and returns
/// the scaled indicator of the first node where `|z|` peaks.
pub fn holder_extremal(z: &GridFunction, p: f64) -> Result<Extremal> {
    check_p_or_inf(p)?;
    let mut y = vec![0.0; z.len()];
    let value = extremal_into(z.rule().weights(), z.samples(), p, &mut y);
    Ok(Extremal {
        y: GridFunction::from_parts(z.rule().clone(), y),
        value,
        degenerate: value == 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_rule, RuleKind};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::sync::Arc;

    fn midpoint(n: usize) -> Arc<crate::grid::QuadratureRule> {
        make_rule(RuleKind::Midpoint, n).unwrap()
    }

    #[test]
    fn conjugates() {
        assert_eq!(conjugate_exponent(2.0).unwrap().q(), 2.0);
        assert_relative_eq!(conjugate_exponent(3.0).unwrap().q(), 1.5);
        assert_eq!(conjugate_exponent(1.0).unwrap().q(), f64::INFINITY);
        for p in [1.1, 1.5, 2.5, 7.0] {
            let e = conjugate_exponent(p).unwrap();
            assert!((1.0 / e.p() + 1.0 / e.q() - 1.0).abs() < 1e-12);
        }
        for bad in [0.5, -1.0, f64::NAN, f64::INFINITY] {
            assert!(matches!(conjugate_exponent(bad), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn norm_examples() {
        let r = make_rule(RuleKind::GaussComposite { nodes_per_panel: 4 }, 64).unwrap();
        let one = r.sample(|_| 1.0);
        for p in [1.0, 1.5, 2.0, 3.0, f64::INFINITY] {
            assert_relative_eq!(lp_norm(&one, p).unwrap(), 1.0, epsilon = 1e-14);
        }
        let t = r.sample(|t| t);
        assert_relative_eq!(lp_norm(&t, 2.0).unwrap(), 1.0 / 3f64.sqrt(), epsilon = 1e-14);
        assert_relative_eq!(lp_norm(&t, 1.0).unwrap(), 0.5, epsilon = 1e-14);
        assert_eq!(lp_norm(&r.sample(|_| 0.0), 3.0).unwrap(), 0.0);
        assert!(lp_norm(&t, 0.5).is_err());
    }

    #[test]
    fn pairing_examples() {
        let r = make_rule(RuleKind::GaussComposite { nodes_per_panel: 3 }, 30).unwrap();
        let one = r.sample(|_| 1.0);
        let t = r.sample(|t| t);
        assert_relative_eq!(pairing(&one, &t).unwrap(), 0.5, epsilon = 1e-14);
        assert_relative_eq!(pairing(&t, &t).unwrap(), 1.0 / 3.0, epsilon = 1e-14);
        assert_eq!(pairing(&t, &r.sample(|_| 0.0)).unwrap(), 0.0);
        assert!(pairing(&t, &midpoint(30).sample(|t| t)).is_err());
    }

    #[test]
    fn extremal_examples() {
        let r = make_rule(RuleKind::GaussComposite { nodes_per_panel: 4 }, 64).unwrap();
        let e = holder_extremal(&r.sample(|_| 1.0), 3.0).unwrap();
        assert_relative_eq!(e.value, 1.0, epsilon = 1e-14);
        assert!(e.y.samples().iter().all(|v| (v - 1.0).abs() < 1e-14));

        let e = holder_extremal(&r.sample(|t| t), 2.0).unwrap();
        assert_relative_eq!(e.value, 1.0 / 3f64.sqrt(), epsilon = 1e-14);
        for (y, u) in e.y.samples().iter().zip(r.nodes()) {
            assert_relative_eq!(*y, 3f64.sqrt() * u, epsilon = 1e-13);
        }

        let e = holder_extremal(&r.sample(|_| 0.0), 2.0).unwrap();
        assert!(e.degenerate);
        assert_eq!(e.value, 0.0);
        assert!(e.y.is_zero());
    }

    #[test]
    fn p_one_extremal_is_sign_with_zero_on_zero_set() {
        let r = midpoint(4);
        let z = GridFunction::new(r, vec![-2.0, 0.0, 3.0, 0.5]).unwrap();
        let e = holder_extremal(&z, 1.0).unwrap();
        assert_eq!(e.y.samples(), &[-1.0, 0.0, 1.0, 1.0]);
        assert_relative_eq!(e.value, 5.5 / 4.0);
    }

    #[test]
    fn infinity_extremal_concentrates() {
        let r = midpoint(4);
        let z = GridFunction::new(r, vec![1.0, -3.0, 3.0, 2.0]).unwrap();
        let e = holder_extremal(&z, f64::INFINITY).unwrap();
        assert_eq!(e.value, 3.0);
        assert_eq!(e.y.samples(), &[0.0, -4.0, 0.0, 0.0]);
        assert_relative_eq!(lp_norm(&e.y, 1.0).unwrap(), 1.0);
        assert_relative_eq!(pairing(&z, &e.y).unwrap(), 3.0);
    }

    fn samples(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-10.0f64..10.0, n)
    }

    proptest! {
        #[test]
        fn holder_inequality(x in samples(24), y in samples(24), pi in 0usize..4) {
            let p = [1.0, 1.5, 2.0, 3.0][pi];
            let q = conjugate_exponent(p).unwrap().q();
            let r = midpoint(24);
            let x = GridFunction::new(r.clone(), x).unwrap();
            let y = GridFunction::new(r, y).unwrap();
            let lhs = pairing(&x, &y).unwrap().abs();
            let rhs = lp_norm(&x, p).unwrap() * lp_norm(&y, q).unwrap();
            prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-12);
        }

        #[test]
        fn extremal_tight_and_feasible(z in samples(24), pi in 0usize..4) {
            let p = [1.0, 1.5, 2.0, 3.0][pi];
            let q = conjugate_exponent(p).unwrap().q();
            let z = GridFunction::new(midpoint(24), z).unwrap();
            prop_assume!(!z.is_zero());
            let e = holder_extremal(&z, p).unwrap();
            let norm = lp_norm(&z, p).unwrap();
            prop_assert!((e.value - norm).abs() <= 1e-14 * norm);
            prop_assert!((pairing(&z, &e.y).unwrap() - norm).abs() <= 1e-10 * norm);
            let dual = lp_norm(&e.y, q).unwrap();
            if p > 1.0 {
                prop_assert!((dual - 1.0).abs() <= 1e-10);
            } else {
                prop_assert!(dual <= 1.0 + 1e-12);
            }
        }

        #[test]
        fn homogeneity(x in samples(24), a in -50.0f64..50.0, pi in 0usize..4) {
            let p = [1.0, 1.5, 2.0, 3.0][pi];
            let x = GridFunction::new(midpoint(24), x).unwrap();
            let lhs = lp_norm(&x.scale(a), p).unwrap();
            let rhs = a.abs() * lp_norm(&x, p).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(f64::MIN_POSITIVE));
        }
    }
}
