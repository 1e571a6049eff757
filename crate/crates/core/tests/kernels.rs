//! Spectral kernels against independent routes: time quadrature, sphere
//! quadrature, longer sums and closed forms.

use std::f64::consts::PI;

use logenergy::quad;
use logenergy::spectral::{
    diagonal_green_heat, green_series, heat_kernel, integrated_heat_kernel, legendre_sequence,
    sobolev_pair_kernel, truncation_order, KernelKind, KernelParams,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FOUR_PI: f64 = 4.0 * PI;

fn slow_sum(c: f64, t: f64, degree: usize, sobolev: bool) -> f64 {
    let p = legendre_sequence(c, degree).unwrap();
    let mut terms: Vec<f64> = p
        .values()
        .iter()
        .enumerate()
        .filter(|&(m, _)| !(sobolev && m == 0))
        .map(|(m, pm)| {
            let mf = m as f64;
            let lambda = mf * (mf + 1.0);
            let w = (2.0 * mf + 1.0) / FOUR_PI * (-lambda * t).exp();
            if sobolev {
                w / lambda * pm
            } else {
                w * pm
            }
        })
        .collect();
    // Smallest first.
    terms.reverse();
    terms.iter().sum()
}

#[test]
fn kernels_agree_with_double_length_sums() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let tol = 1e-13;
    for _ in 0..10 {
        let c: f64 = rng.random_range(-1.0..1.0);
        let t: f64 = 10f64.powf(rng.random_range(-3.0..0.5));
        let params = KernelParams::new(t, tol).unwrap();
        let mh = params.degree(KernelKind::Heat);
        let ms = params.degree(KernelKind::Sobolev);
        let heat = heat_kernel(c, &params).unwrap();
        let slow = slow_sum(c, t, 2 * mh, false);
        assert!((heat - slow).abs() < 1e-12, "heat c={c} t={t}: {heat} vs {slow}");
        let sob = sobolev_pair_kernel(c, &params).unwrap();
        let slow = slow_sum(c, t, 2 * ms, true);
        assert!((sob - slow).abs() < 1e-12, "sobolev c={c} t={t}: {sob} vs {slow}");
        let diag = diagonal_green_heat(t, tol).unwrap();
        let slow = slow_sum(1.0, t, 2 * ms, true);
        assert!((diag - slow).abs() < 1e-12, "diagonal t={t}: {diag} vs {slow}");
    }
}

/// `∫₀ᵗ p_s(c) ds` by adaptive quadrature in `s`; the heat kernel below `s₀`
/// is under `e^{−d²/(4s₀)}/(4πs₀)` and is dropped.
fn integrated_by_time_quadrature(c: f64, t: f64) -> f64 {
    let d2 = 2.0 - 2.0 * c;
    let s0 = (d2 / 200.0).max(1e-5);
    quad::integrate(
        |s| {
            let params = KernelParams::new(s, 1e-15).unwrap();
            heat_kernel(c, &params).unwrap()
        },
        s0,
        t,
        1e-13,
    )
    .unwrap()
}

#[test]
fn integrated_kernel_matches_time_quadrature() {
    for &(c, t) in &[(-0.8, 0.3), (0.0, 0.05), (0.5, 0.2), (0.9, 0.1), (0.95, 0.02), (0.3, 1.5)] {
        let params = KernelParams::new(t, 1e-14).unwrap();
        let direct = integrated_heat_kernel(c, &params).unwrap();
        let oracle = integrated_by_time_quadrature(c, t);
        assert!((direct - oracle).abs() < 1e-10, "c={c} t={t}: {direct} vs {oracle}");
    }
}

#[test]
fn green_series_long_time_limit() {
    // S_t(c) → 0 and ∫₀ᵗ p_s ds − t/(4π) → G(c) as t → ∞.
    let params = KernelParams::new(40.0, 1e-15).unwrap();
    for &c in &[-0.5, 0.2, 0.7] {
        let rest = integrated_heat_kernel(c, &params).unwrap() - 40.0 / FOUR_PI;
        assert!((rest - green_series(c).unwrap()).abs() < 1e-15);
    }
}

/// `∫_{S²} f(a·y) g(y·b) dy` with `a·b = cos β`, in polar coordinates
/// about `a`: Gauss–Legendre in θ split at β, trapezoid in φ.
fn sphere_convolution<F, G>(f: F, g: G, beta: f64) -> f64
where
    F: Fn(f64) -> f64 + Copy,
    G: Fn(f64) -> f64 + Copy,
{
    let (cb, sb) = (beta.cos(), beta.sin());
    let nphi = 256;
    let inner = move |theta: f64| {
        let (ct, st) = (theta.cos(), theta.sin());
        let mut acc = 0.0;
        for k in 0..nphi {
            let phi = 2.0 * PI * k as f64 / nphi as f64;
            acc += g(ct * cb + st * sb * phi.cos());
        }
        st * f(ct) * acc * 2.0 * PI / nphi as f64
    };
    quad::integrate_breaks(inner, &[0.0, beta, PI], 1e-12).unwrap()
}

#[test]
fn semigroup_by_sphere_quadrature() {
    let (t1, t2) = (0.06, 0.04);
    let p1 = KernelParams::new(t1, 1e-15).unwrap();
    let p2 = KernelParams::new(t2, 1e-15).unwrap();
    let p12 = KernelParams::new(t1 + t2, 1e-15).unwrap();
    for &c in &[0.9, 0.3, -0.6] {
        let beta = f64::acos(c);
        let composed = sphere_convolution(
            |x| heat_kernel(x, &p1).unwrap(),
            |x| heat_kernel(x, &p2).unwrap(),
            beta,
        );
        let direct = heat_kernel(c, &p12).unwrap();
        assert!((composed - direct).abs() < 1e-8, "c={c}: {composed} vs {direct}");
    }
}

#[test]
fn green_convolved_with_heat_is_sobolev_kernel() {
    let t = 0.1;
    let params = KernelParams::new(t, 1e-15).unwrap();
    let c = 0.9;
    let green = |x: f64| {
        if x >= 1.0 {
            0.0
        } else {
            green_series(x).unwrap()
        }
    };
    let composed = sphere_convolution(green, |x| heat_kernel(x, &params).unwrap(), f64::acos(c));
    let direct = sobolev_pair_kernel(c, &params).unwrap();
    assert!((composed - direct).abs() < 1e-6, "{composed} vs {direct}");
}

#[test]
fn mass_conservation() {
    for &t in &[1e-3, 0.01, 0.1, 1.0] {
        let tol = 1e-13;
        let params = KernelParams::new(t, tol).unwrap();
        let nodes = params.degree(KernelKind::Heat) / 2 + 2;
        let mass = 2.0 * PI * quad::gauss_legendre_integrate(|c| heat_kernel(c, &params).unwrap(), -1.0, 1.0, nodes);
        assert!((mass - 1.0).abs() <= 10.0 * tol, "t={t}: {mass}");
    }
}

#[test]
fn heat_kernel_positivity() {
    for &t in &[1e-4, 1e-3, 0.05, 1.0] {
        let tol = 1e-10;
        let params = KernelParams::new(t, tol).unwrap();
        for i in 0..1000 {
            let c = -1.0 + 2.0 * i as f64 / 999.0;
            let p = heat_kernel(c, &params).unwrap();
            assert!(p >= -tol, "t={t} c={c}: {p}");
        }
    }
}

#[test]
fn sobolev_kernel_is_heat_integrated_from_t() {
    // S_t(c) = ∫_t^∞ (p_s(c) − 1/(4π)) ds; truncate at s = 30.
    let (c, t) = (0.4, 0.2);
    let params = KernelParams::new(t, 1e-15).unwrap();
    let oracle = quad::integrate(
        |s| heat_kernel(c, &KernelParams::new(s, 1e-15).unwrap()).unwrap() - 1.0 / FOUR_PI,
        t,
        30.0,
        1e-14,
    )
    .unwrap();
    let direct = sobolev_pair_kernel(c, &params).unwrap();
    assert!((direct - oracle).abs() < 1e-11, "{direct} vs {oracle}");
}

#[test]
fn truncation_examples() {
    let m = truncation_order(1.0, 1e-12, KernelKind::Sobolev).unwrap();
    assert!((5..=6).contains(&m));
    assert_eq!(truncation_order(0.01, 1e-10, KernelKind::Heat).unwrap(), 50);
}
