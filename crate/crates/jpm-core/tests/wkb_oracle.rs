//! Independent closed-form oracle for the barrier action.
//!
//! For the cubic approximation of the well, the action integral reduces to
//! ∫ √((x−a)(x−b)(c−x)) dx between the inner and outer turning points,
//! which has an exact expression in complete elliptic integrals. The
//! production quadrature runs on the exact tilted-cosine potential, so the
//! two agree up to the cubic-truncation error, which shrinks as the bias
//! approaches the critical current.

use jpm_core::circuit::{
    cubic_potential, derive_levels, effective_mass, josephson_energy, DeviceConfig,
};
use jpm_core::constants::HBAR;
use jpm_core::semiclassics::barrier_action;

/// Complete elliptic integrals K(k), E(k) by the arithmetic-geometric mean.
fn elliptic_ke(k: f64) -> (f64, f64) {
    assert!((0.0..1.0).contains(&k));
    let mut a = 1.0f64;
    let mut b = (1.0 - k * k).sqrt();
    let mut c = k;
    let mut sum = 0.5 * c * c; // 2^{n-1} c_n² starting at n = 0
    let mut pow = 0.5;
    for _ in 0..60 {
        let an = 0.5 * (a + b);
        let bn = (a * b).sqrt();
        c = 0.5 * (a - b);
        a = an;
        b = bn;
        pow *= 2.0;
        sum += pow * c * c;
        if c.abs() < 1e-17 {
            break;
        }
    }
    let big_k = std::f64::consts::PI / (2.0 * a);
    let big_e = big_k * (1.0 - sum);
    (big_k, big_e)
}

/// Real roots of x³ + px + q = 0 in the three-root (casus irreducibilis)
/// regime, via the trigonometric form.
fn depressed_cubic_roots(p: f64, q: f64) -> [f64; 3] {
    let m = (-p / 3.0).sqrt();
    let arg = (3.0 * q / (2.0 * p * m)).clamp(-1.0, 1.0);
    let theta = arg.acos() / 3.0;
    let mut roots = [
        2.0 * m * theta.cos(),
        2.0 * m * (theta - 2.0 * std::f64::consts::PI / 3.0).cos(),
        2.0 * m * (theta - 4.0 * std::f64::consts::PI / 3.0).cos(),
    ];
    roots.sort_by(|x, y| x.partial_cmp(y).unwrap());
    roots
}

/// ∫_b^c √((x−a)(x−b)(c−x)) dx
///   = (2/15)√(c−a) · [2(u−v)E(k) − (v+2w)K(k)],
/// u = (c−a)², v = (c−b)(b−a), w = (b−a)², k² = (c−b)/(c−a).
fn cubic_root_integral(a: f64, b: f64, c: f64) -> f64 {
    let u = (c - a) * (c - a);
    let v = (c - b) * (b - a);
    let w = (b - a) * (b - a);
    let k = ((c - b) / (c - a)).sqrt();
    let (big_k, big_e) = elliptic_ke(k);
    2.0 / 15.0 * (c - a).sqrt() * (2.0 * (u - v) * big_e - (v + 2.0 * w) * big_k)
}

/// Closed-form barrier action 2σ of the cubic well at energy `e` above the
/// minimum (both in joules).
fn cubic_action_closed_form(e: f64, cfg: &DeviceConfig) -> f64 {
    let wj = josephson_energy(cfg.i0).unwrap();
    let s = (1.0 - cfg.beta * cfg.beta).sqrt();
    // W_cubic(δ) − e = (W_J β/6)(δ−r₁)(δ−r₂)(r₃−δ) with
    // δ³ − (3s/β)δ² + (6e)/(W_J β) = 0 defining the roots.
    // Depress with δ = y + s/β.
    let b2 = -3.0 * s / cfg.beta;
    let c0 = 6.0 * e / (wj * cfg.beta);
    let shift = -b2 / 3.0;
    let p = -b2 * b2 / 3.0;
    let q = 2.0 * b2 * b2 * b2 / 27.0 + c0;
    let roots = depressed_cubic_roots(p, q);
    let [r1, r2, r3] = [roots[0] + shift, roots[1] + shift, roots[2] + shift];
    let k3 = wj * cfg.beta / 6.0;
    let m = effective_mass(cfg);
    2.0 * (2.0 * m * k3).sqrt() * cubic_root_integral(r1, r2, r3) / HBAR
}

/// Brute-force quadrature of the cubic action, to validate the elliptic
/// closed form itself.
fn cubic_action_quadrature(e: f64, cfg: &DeviceConfig) -> f64 {
    let m = effective_mass(cfg);
    // Outer turning points by scanning + bisection on the cubic.
    let f = |d: f64| cubic_potential(d, cfg) - e;
    let s = (1.0 - cfg.beta * cfg.beta).sqrt();
    let top = 2.0 * s / cfg.beta;
    let bisect = |mut lo: f64, mut hi: f64| {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (f(mid) > 0.0) == (f(lo) > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let inner = bisect(0.0, top);
    let outer = bisect(3.0 * top, top);
    // Substituted endpoints remove the √ singularities.
    let mid = 0.5 * (inner + outer);
    let n = 200_000;
    let mut acc = 0.0;
    for (aa, bb, flip) in [(inner, mid, false), (outer, mid, true)] {
        let span = if flip { aa - bb } else { bb - aa };
        let l = span.abs().sqrt();
        let h = l / n as f64;
        for i in 0..n {
            let u = (i as f64 + 0.5) * h;
            let d = if flip { aa - u * u } else { aa + u * u };
            let v = 2.0 * m * f(d).max(0.0);
            acc += 2.0 * u * v.sqrt() * h;
        }
    }
    2.0 * acc / HBAR
}

#[test]
fn elliptic_closed_form_matches_quadrature() {
    let cfg = DeviceConfig::table1();
    let wj = josephson_energy(cfg.i0).unwrap();
    let s = (1.0 - cfg.beta * cfg.beta).sqrt();
    let barrier = 2.0 / 3.0 * wj * s * s * s / (cfg.beta * cfg.beta);
    for frac in [0.05, 0.3, 0.7] {
        let e = frac * barrier;
        let exact = cubic_action_closed_form(e, &cfg);
        let quad = cubic_action_quadrature(e, &cfg);
        assert!(
            (exact / quad - 1.0).abs() < 1e-6,
            "fraction {frac}: closed form {exact} vs quadrature {quad}"
        );
    }
}

#[test]
fn production_action_approaches_cubic_oracle_near_critical_bias() {
    // The exact-potential action must converge to the cubic closed form as
    // β → 1, with the residual shrinking with the well asymmetry scale.
    let mut residuals = Vec::new();
    for beta in [0.99, 0.999] {
        let cfg = DeviceConfig::table1().with_beta(beta);
        let wj = josephson_energy(cfg.i0).unwrap();
        let s = (1.0 - beta * beta).sqrt();
        let barrier = 2.0 / 3.0 * wj * s * s * s / (beta * beta);
        let e = 0.4 * barrier;
        let (production, _) = barrier_action(e, &cfg).unwrap();
        let oracle = cubic_action_closed_form(e, &cfg);
        residuals.push((production / oracle - 1.0).abs());
    }
    assert!(residuals[0] < 0.05, "beta=0.99 residual {}", residuals[0]);
    assert!(residuals[1] < 0.02, "beta=0.999 residual {}", residuals[1]);
    assert!(residuals[1] < residuals[0]);
}

#[test]
fn ground_action_matches_barrier_height_relation() {
    // At zero energy the cubic action is exactly (36/5)·n₀.
    let cfg = DeviceConfig::table1().with_beta(0.999);
    let levels = derive_levels(&cfg).unwrap();
    let wj = josephson_energy(cfg.i0).unwrap();
    let s = (1.0f64 - cfg.beta * cfg.beta).sqrt();
    let barrier = 2.0 / 3.0 * wj * s * s * s / (cfg.beta * cfg.beta);
    let action = cubic_action_closed_form(1e-8 * barrier, &cfg);
    assert!(
        (action / (7.2 * levels.n0) - 1.0).abs() < 1e-3,
        "action {action} vs 7.2 n0 {}",
        7.2 * levels.n0
    );
}
