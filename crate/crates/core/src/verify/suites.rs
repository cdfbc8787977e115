//! Trial bodies of the individual suites.

use rand::Rng;

use super::{eq, le, oracle, CheckClass, SuiteId, Trial, TrialContext};
use crate::error::{Error, Result};
use crate::functional::{
    apply_kernel, eval_f, fnorm_21, fnorm_22_g, fnorm_22_h, kernel_from_bilinear, yq_norm, Fnorm22Options,
};
use crate::geometry::{g, g_orthogonalize, g_projection, gram_det, volume};
use crate::grid::{make_rule, sample_function, FunctionSpec, GridFunction};
use crate::lp::{conjugate_exponent, lp_norm};
use crate::two_norm::{gahler_norm, gahler_norm_warm, gunawan_norm, AscentOptions};

use CheckClass::{Monitor, Pass};

const AXIOMS: &[(&str, CheckClass, f64)] = &[
    ("gunawan_dependent", Pass, 1e-8),
    ("gunawan_symmetric", Pass, 1e-9),
    ("gunawan_homogeneous", Pass, 1e-10),
    ("gunawan_triangle", Pass, 1e-10),
    ("gahler_dependent", Pass, 1e-8),
    ("gahler_symmetric", Monitor, 1e-9),
    ("gahler_homogeneous", Monitor, 1e-9),
    ("gahler_triangle", Pass, 1e-9),
];

const SANDWICH: &[(&str, CheckClass, f64)] = &[
    ("upper", Pass, 1e-9),
    ("lower", Monitor, 1e-4),
    ("p2_gahler_gunawan", Monitor, 1e-6),
    ("p2_gunawan_gram", Pass, 1e-9),
];

const ISOMETRY: &[(&str, CheckClass, f64)] = &[
    ("iso_agree", Pass, 1e-6),
    ("svd_yq", Monitor, 1e-6),
    ("svd_fnorm21", Monitor, 1e-6),
    ("p1_brute_force", Pass, 1e-14),
    ("bounded", Monitor, 1e-6),
    ("yq_certificate", Pass, 1e-10),
];

const G_PROPERTIES: &[(&str, CheckClass, f64)] = &[
    ("g_self", Pass, 1e-10),
    ("g_homogeneous", Pass, 1e-10),
    ("g_shift", Pass, 1e-10),
    ("g_cauchy_schwarz", Pass, 1e-10),
    ("g_linear", Pass, 1e-10),
    ("g_orthogonal", Pass, 1e-10),
    ("projection_residual", Pass, 1e-8),
    ("p2_projection_least_squares", Pass, 1e-8),
];

const GEOMETRY_VOLUME: &[(&str, CheckClass, f64)] = &[
    ("volume_le_gahler", Monitor, 1e-4),
    ("p2_volume_gram", Pass, 1e-8),
    ("p2_volume_gunawan", Pass, 1e-8),
];

const FUNCTIONAL_BOUNDS: &[(&str, CheckClass, f64)] = &[
    ("g22_le_fnorm21", Pass, 1e-4),
    ("half_fnorm21_le_g22", Monitor, 1e-4),
    ("h22_le_upper", Pass, 1e-4),
    ("lower_le_h22", Monitor, 1e-4),
    ("antisymmetric_swap", Pass, 1e-12),
    ("antisymmetric_diagonal", Pass, 1e-12),
];

const ROUNDTRIP: &[(&str, CheckClass, f64)] = &[("kernel_entries", Pass, 1e-12), ("eval_agree", Pass, 1e-12)];

const QUADRATURE: &[(&str, CheckClass, f64)] = &[("ratio_64_128", Pass, 0.0), ("ratio_128_256", Pass, 0.0)];

pub(super) fn checks(suite: SuiteId) -> &'static [(&'static str, CheckClass, f64)] {
    match suite {
        SuiteId::Axioms => AXIOMS,
        SuiteId::Sandwich => SANDWICH,
        SuiteId::Isometry => ISOMETRY,
        SuiteId::GProperties => G_PROPERTIES,
        SuiteId::GeometryVolume => GEOMETRY_VOLUME,
        SuiteId::FunctionalBounds => FUNCTIONAL_BOUNDS,
        SuiteId::Roundtrip => ROUNDTRIP,
        SuiteId::QuadratureConvergence => QUADRATURE,
    }
}

pub(super) fn run_trial(ctx: &TrialContext, t: &mut Trial) -> Result<()> {
    match ctx.config.suite {
        SuiteId::Axioms => axioms(ctx, t),
        SuiteId::Sandwich => sandwich(ctx, t),
        SuiteId::Isometry => isometry(ctx, t),
        SuiteId::GProperties => g_properties(ctx, t),
        SuiteId::GeometryVolume => geometry_volume(ctx, t),
        SuiteId::FunctionalBounds => functional_bounds(ctx, t),
        SuiteId::Roundtrip => roundtrip(ctx, t),
        SuiteId::QuadratureConvergence => quadrature(ctx, t),
    }
}

fn gahler_opts(ctx: &TrialContext) -> AscentOptions {
    AscentOptions {
        max_iter: 2000,
        seed: ctx.sub_seed,
        ..AscentOptions::default()
    }
}

/// A nonzero scalar in `±[0.1, 5]`.
fn scalar(rng: &mut impl Rng) -> f64 {
    let a: f64 = rng.random_range(0.1..5.0);
    if rng.random_bool(0.5) {
        -a
    } else {
        a
    }
}

fn axioms(ctx: &TrialContext, t: &mut Trial) -> Result<()> {
    let p = ctx.p;
    let (x1, x2) = ctx.pair(t)?;
    let x3 = ctx.extra_function(t, "x3", 1)?;
    let alpha = scalar(&mut ctx.rng());
    t.value("alpha", alpha);
    let n1 = lp_norm(&x1, p)?;
    let n2 = lp_norm(&x2, p)?;
    let n3 = lp_norm(&x3, p)?;
    let ax1 = x1.scale(alpha);
    let sum = x1.add(&x3)?;
    let opts = gahler_opts(ctx);

    let h = gunawan_norm(&x1, &x2, p)?;
    t.value("gunawan", h);
    t.check(
        "gunawan_dependent",
        -gunawan_norm(&x1, &ax1, p)? / (alpha.abs() * n1 * n1),
    );
    t.check("gunawan_symmetric", eq(gunawan_norm(&x2, &x1, p)?, h, n1 * n2));
    t.check(
        "gunawan_homogeneous",
        eq(gunawan_norm(&ax1, &x2, p)?, alpha.abs() * h, alpha.abs() * n1 * n2),
    );
    let h13 = gunawan_norm(&x3, &x2, p)?;
    let hsum = gunawan_norm(&sum, &x2, p)?;
    t.check("gunawan_triangle", le(hsum, h + h13, (n1 + n3) * n2));

    let gest = gahler_norm(&x1, &x2, p, &opts)?;
    t.value("gahler", gest.value);
    t.flag("gahler_converged", gest.converged);
    t.check(
        "gahler_dependent",
        -gahler_norm(&x1, &ax1, p, &opts)?.value / (alpha.abs() * n1 * n1),
    );
    t.check(
        "gahler_symmetric",
        eq(gahler_norm(&x2, &x1, p, &opts)?.value, gest.value, n1 * n2),
    );
    t.check(
        "gahler_homogeneous",
        eq(
            gahler_norm(&ax1, &x2, p, &opts)?.value,
            alpha.abs() * gest.value,
            alpha.abs() * n1 * n2,
        ),
    );
    // The summands start from the maximizers of the sum, where the determinant is additive.
    let gsum = gahler_norm(&sum, &x2, p, &opts)?;
    let warm = [(gsum.maximizers[0].clone(), gsum.maximizers[1].clone())];
    let g1 = gahler_norm_warm(&x1, &x2, p, &opts, &warm)?.value.max(gest.value);
    let g3 = gahler_norm_warm(&x3, &x2, p, &opts, &warm)?.value;
    t.value("gahler_sum", gsum.value);
    t.check("gahler_triangle", le(gsum.value, g1 + g3, (n1 + n3) * n2));
    Ok(())
}

fn sandwich(ctx: &TrialContext, t: &mut Trial) -> Result<()> {
    let p = ctx.p;
    let (x1, x2) = ctx.pair(t)?;
    let h = gunawan_norm(&x1, &x2, p)?;
    let gest = gahler_norm(&x1, &x2, p, &gahler_opts(ctx))?;
    let scale = lp_norm(&x1, p)? * lp_norm(&x2, p)?;
    t.value("gunawan", h);
    t.value("gahler", gest.value);
    t.flag("gahler_converged", gest.converged);
    let upper = p.recip().exp2() * h;
    let lower = 0.5 * upper;
    t.value("upper", upper);
    t.value("lower", lower);
    t.check("upper", le(gest.value, upper, scale));
    t.check("lower", le(lower, gest.value, scale));
    if p == 2.0 {
        t.check("p2_gahler_gunawan", eq(gest.value, h, scale));
        let gram = gram_det(&x1, &x2, 2.0)?.max(0.0).sqrt();
        t.check("p2_gunawan_gram", eq(h, gram, scale));
    }
    Ok(())
}

fn isometry(ctx: &TrialContext, t: &mut Trial) -> Result<()> {
    let p = ctx.p;
    let theta = ctx.kernel(t, ctx.sub_seed & 1 == 1)?;
    let rule = ctx.rule;
    let opts = AscentOptions {
        tol: 1e-12,
        max_iter: 5000,
        starts: 8,
        seed: ctx.sub_seed,
    };
    let y = yq_norm(&theta, p, &opts)?;
    let f21 = fnorm_21(&theta, p, &opts)?;
    t.value("yq", y.value);
    t.value("fnorm21", f21.value);
    t.flag("yq_converged", y.converged);
    t.flag("fnorm21_converged", f21.converged);
    let scale = y.value.max(f21.value).max(f64::MIN_POSITIVE);
    t.check("iso_agree", eq(y.value, f21.value, scale));

    let q = conjugate_exponent(p)?.q();
    let x = &y.maximizers[0];
    let reproduced = lp_norm(&apply_kernel(&theta, x)?, q)? / lp_norm(x, p)?;
    t.check("yq_certificate", eq(reproduced, y.value, scale));

    if p == 1.0 {
        let w = rule.weights();
        let unit = |i: usize| GridFunction::indicator(rule, i).scale(1.0 / w[i]);
        let units: Vec<GridFunction> = (0..rule.len()).map(unit).collect();
        let mut brute = 0.0f64;
        for a in &units {
            for b in &units {
                brute = brute.max(eval_f(&theta, a, b)?.abs());
            }
        }
        t.value("brute_force", brute);
        t.check("p1_brute_force", eq(y.value, brute, scale));
    }
    if p == 2.0 {
        let sigma = oracle::top_singular_value(&theta);
        t.value("svd", sigma);
        t.check("svd_yq", eq(y.value, sigma, sigma));
        t.check("svd_fnorm21", eq(f21.value, sigma, sigma));
    }
    let mut worst = f64::INFINITY;
    for k in 0..4 {
        let a = ctx.extra_function(t, &format!("probe_x{k}"), 10 + 2 * k)?;
        let b = ctx.extra_function(t, &format!("probe_y{k}"), 11 + 2 * k)?;
        let bound = f21.value * lp_norm(&a, p)? * lp_norm(&b, p)?;
        worst = worst.min(le(eval_f(&theta, &a, &b)?.abs(), bound, bound.max(f64::MIN_POSITIVE)));
    }
    t.check("bounded", worst);
    Ok(())
}

fn g_properties(ctx: &TrialContext, t: &mut Trial) -> Result<()> {
    let p = ctx.p;
    let (x, y) = ctx.pair(t)?;
    let z = ctx.extra_function(t, "z", 1)?;
    let mut rng = ctx.rng();
    let (alpha, beta) = (scalar(&mut rng), scalar(&mut rng));
    t.value("alpha", alpha);
    t.value("beta", beta);
    let nx = lp_norm(&x, p)?;
    let ny = lp_norm(&y, p)?;
    let nz = lp_norm(&z, p)?;
    let gxy = g(&x, &y, p)?;
    t.value("g_xy", gxy);
    t.check("g_self", eq(g(&x, &x, p)?, nx * nx, nx * nx));
    t.check(
        "g_homogeneous",
        eq(
            g(&x.scale(alpha), &y.scale(beta), p)?,
            alpha * beta * gxy,
            (alpha * beta).abs() * nx * ny,
        ),
    );
    t.check("g_shift", eq(g(&x, &x.add(&y)?, p)?, nx * nx + gxy, nx * (nx + ny)));
    t.check("g_cauchy_schwarz", le(gxy.abs(), nx * ny, nx * ny));
    t.check(
        "g_linear",
        eq(g(&x, &y.add(&z)?, p)?, gxy + g(&x, &z, p)?, nx * (ny + nz)),
    );

    let (xo1, xo2) = g_orthogonalize(&x, &y, p)?;
    let no2 = lp_norm(&xo2, p)?;
    t.check(
        "g_orthogonal",
        -g(&xo1, &xo2, p)?.abs() / (nx * no2.max(f64::MIN_POSITIVE)),
    );

    let gamma = gram_det(&y, &z, p)?;
    t.value("gram_det", gamma);
    match g_projection(&x, &y, &z, p) {
        Ok(xy) => {
            let residual = x.combine(1.0, &xy, -1.0)?;
            let worst = (g(&y, &residual, p)? / ny).abs().max((g(&z, &residual, p)? / nz).abs());
            t.check("projection_residual", -worst / nx);
            if p == 2.0 {
                let ls = oracle::least_squares_projection(&x, &y, &z)?;
                let diff = xy.combine(1.0, &ls, -1.0)?;
                t.check("p2_projection_least_squares", -lp_norm(&diff, 2.0)? / nx);
            }
        }
        Err(Error::SingularGram { .. }) => t.value("projection_singular", 1.0),
        Err(e) => return Err(e),
    }
    Ok(())
}

fn geometry_volume(ctx: &TrialContext, t: &mut Trial) -> Result<()> {
    let p = ctx.p;
    let (x1, x2) = ctx.pair(t)?;
    let v = volume(&x1, &x2, p)?;
    let gest = gahler_norm(&x1, &x2, p, &gahler_opts(ctx))?;
    t.value("volume", v);
    t.value("gahler", gest.value);
    t.flag("gahler_converged", gest.converged);
    let scale = v.max(f64::MIN_POSITIVE);
    t.check("volume_le_gahler", le(v, gest.value, scale));
    if p == 2.0 {
        t.check("p2_volume_gram", eq(v, gram_det(&x1, &x2, 2.0)?.max(0.0).sqrt(), scale));
        t.check("p2_volume_gunawan", eq(v, gunawan_norm(&x1, &x2, 2.0)?, scale));
    }
    Ok(())
}

fn functional_bounds(ctx: &TrialContext, t: &mut Trial) -> Result<()> {
    let p = ctx.p;
    let theta = ctx.kernel(t, true)?;
    let opts = Fnorm22Options {
        ascent: AscentOptions {
            seed: ctx.sub_seed,
            ..Fnorm22Options::default().ascent
        },
        gahler: gahler_opts(ctx),
        ..Fnorm22Options::default()
    };
    let f21 = fnorm_21(&theta, p, &opts.fnorm21)?;
    t.value("fnorm21", f21.value);
    t.flag("fnorm21_converged", f21.converged);

    let g22 = fnorm_22_g(&theta, p, &opts)?;
    let (xg, yg) = (&g22.maximizers[0], &g22.maximizers[1]);
    let h_opts = Fnorm22Options {
        anchors: vec![(xg.clone(), yg.clone())],
        ..opts.clone()
    };
    let h22 = fnorm_22_h(&theta, p, &h_opts)?;
    let (xh, yh) = (&h22.maximizers[0], &h22.maximizers[1]);
    // Each variant is also evaluated at the other's maximizer.
    let g_at_h = eval_f(&theta, xh, yh)?.abs() / gahler_norm(xh, yh, p, &opts.gahler)?.value;
    let h_at_g = eval_f(&theta, xg, yg)?.abs() / gunawan_norm(xg, yg, p)?;
    let g = g22.value.max(g_at_h);
    let h = h22.value.max(h_at_g);
    t.value("g22", g);
    t.value("h22", h);

    let f = f21.value.max(f64::MIN_POSITIVE);
    t.check("g22_le_fnorm21", le(g, f21.value, f));
    t.check("half_fnorm21_le_g22", le(0.5 * f21.value, g, f));
    let upper = p.recip().exp2() * g;
    t.check("h22_le_upper", le(h, upper, g));
    t.check("lower_le_h22", le(0.5 * upper, h, g));

    let (x, y) = ctx.pair(t)?;
    let scale = f * lp_norm(&x, p)? * lp_norm(&y, p)?;
    t.check(
        "antisymmetric_swap",
        eq(eval_f(&theta, &x, &y)?, -eval_f(&theta, &y, &x)?, scale),
    );
    t.check(
        "antisymmetric_diagonal",
        -eval_f(&theta, &x, &x)?.abs() / (f * lp_norm(&x, p)?.powi(2)),
    );
    Ok(())
}

fn roundtrip(ctx: &TrialContext, t: &mut Trial) -> Result<()> {
    let theta = ctx.kernel(t, ctx.sub_seed & 1 == 1)?;
    let back = kernel_from_bilinear(|x, y| eval_f(&theta, x, y).expect("same grid"), ctx.rule)?;
    let worst = theta
        .data()
        .iter()
        .zip(back.data())
        .map(|(a, b)| (a - b).abs() / a.abs().max(1.0))
        .fold(0.0, f64::max);
    t.check("kernel_entries", -worst);
    let (x, y) = ctx.pair(t)?;
    let scale = theta.max_abs().max(1.0) * lp_norm(&x, 1.0)? * lp_norm(&y, 1.0)?;
    t.check("eval_agree", eq(eval_f(&back, &x, &y)?, eval_f(&theta, &x, &y)?, scale));
    Ok(())
}

/// Errors below this fraction of the reference are roundoff, not discretization.
const ROUNDOFF: f64 = 1e-12;

fn quadrature(ctx: &TrialContext, t: &mut Trial) -> Result<()> {
    let p = ctx.p;
    let (a, b) = match &ctx.config.pair {
        Some(pair) => pair.clone(),
        None => {
            let mut rng = ctx.rng();
            let mut smooth = || FunctionSpec::Fourier {
                seed: rng.random(),
                modes: rng.random_range(2..=6),
            };
            (smooth(), smooth())
        }
    };
    let at = |n: usize| -> Result<f64> {
        let rule = make_rule(ctx.config.rule_kind, n)?;
        gunawan_norm(&sample_function(&rule, &a)?, &sample_function(&rule, &b)?, p)
    };
    let reference = at(1024)?;
    t.input("x1", &a, String::new());
    t.input("x2", &b, String::new());
    t.value("reference", reference);
    let errors: Vec<f64> = [64, 128, 256]
        .into_iter()
        .map(|n| Ok((at(n)? - reference).abs()))
        .collect::<Result<_>>()?;
    for (n, e) in [64, 128, 256].iter().zip(&errors) {
        t.value(&format!("error_{n}"), *e);
    }
    let ratio_slack = |coarse: f64, fine: f64| {
        if coarse <= ROUNDOFF * reference {
            0.0
        } else {
            coarse / fine - 2.0
        }
    };
    t.check("ratio_64_128", ratio_slack(errors[0], errors[1]));
    t.check("ratio_128_256", ratio_slack(errors[1], errors[2]));
    Ok(())
}
