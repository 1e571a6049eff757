//! Spectral evaluation of heat-type kernels on S².
//!
//! The Laplacian on S² has eigenvalues `λ_m = m(m+1)` with multiplicity
//! `2m + 1`, and the addition theorem collapses each eigenspace to
//! `(2m+1)/(4π) · P_m(x·y)`. Every kernel here is therefore a Legendre
//! series in the cosine `c = x·y`:
//!
//! | kernel | coefficient of `P_m(c)` |
//! |---|---|
//! | heat `p_t` | `(2m+1)/(4π) · e^{−λ_m t}` |
//! | Sobolev `S_t` | `(2m+1)/(4π) · e^{−λ_m t}/λ_m`, `m ≥ 1` |
//! | Green `G` | `(2m+1)/(4π) / λ_m`, `m ≥ 1` |
//! | integrated `∫₀ᵗ p_s ds` | `t/(4π)` for `m = 0`, `(2m+1)/(4π) · (1 − e^{−λ_m t})/λ_m` |
//!
//! Heat and Sobolev series converge like `e^{−M² t}` and are truncated with
//! a rigorous tail bound (using `|P_m| ≤ 1`). The Green series only
//! converges conditionally, so the integrated kernel is assembled mode-wise
//! as `t/(4π) + G(c) − S_t(c)`, with `G(c)` computed by Abel summation: the
//! Legendre generating function integrated over the radius.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad;
use crate::sum::KahanSum;

/// Smallest supported diffusion time.
pub const MIN_TIME: f64 = 1e-6;

/// Absolute target of the adaptive quadrature behind the Green series.
pub const GREEN_QUADRATURE_TOL: f64 = 1e-15;

const FOUR_PI: f64 = 4.0 * PI;

/// `P_0(x), …, P_M(x)` from the three-term recurrence.
#[derive(Debug, Clone, PartialEq)]
pub struct LegendreSequence {
    x: f64,
    values: Vec<f64>,
}

impl LegendreSequence {
    pub fn new(x: f64, degree: usize) -> Result<Self> {
        if !(x.abs() <= 1.0 + 1e-12) {
            return Err(Error::invalid("x", format!("|x| must be ≤ 1, got {x}")));
        }
        let x = x.clamp(-1.0, 1.0);
        let mut values = Vec::with_capacity(degree + 1);
        values.push(1.0);
        if degree >= 1 {
            values.push(x);
        }
        for m in 1..degree {
            let mf = m as f64;
            let next = ((2.0 * mf + 1.0) * x * values[m] - mf * values[m - 1]) / (mf + 1.0);
            values.push(next);
        }
        Ok(Self { x, values })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn degree(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

pub fn legendre_sequence(x: f64, degree: usize) -> Result<LegendreSequence> {
    LegendreSequence::new(x, degree)
}

/// Which series a truncation degree is chosen for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Heat,
    /// The truncated part of the integrated kernel is its `−e^{−λt}/λ`
    /// component, so this shares the Sobolev tail.
    Integrated,
    Sobolev,
}

/// Rigorous bound on `Σ_{m>M} (2m+1) e^{−m(m+1)t} / (4π)`, further divided by
/// `(M+1)(M+2)` for the kinds whose terms carry `1/λ_m`.
pub fn tail_bound(kind: KernelKind, degree: usize, t: f64) -> f64 {
    let heat = heat_tail(degree, t);
    match kind {
        KernelKind::Heat => heat,
        KernelKind::Integrated | KernelKind::Sobolev => {
            let m = degree as f64;
            heat / ((m + 1.0) * (m + 2.0))
        }
    }
}

fn heat_tail(degree: usize, t: f64) -> f64 {
    // (2u+1)e^{−u(u+1)t} decreases once (2u+1)²t ≥ 2; before that the terms
    // are summed explicitly, after it the integral ∫_K^∞ = e^{−K(K+1)t}/t
    // bounds the rest.
    let turning = (((2.0 / t).sqrt() - 1.0) / 2.0).ceil().max(0.0) as usize;
    let start = degree.max(turning);
    let mut acc = KahanSum::new();
    for m in (degree + 1)..=start {
        let mf = m as f64;
        acc.add((2.0 * mf + 1.0) * (-mf * (mf + 1.0) * t).exp());
    }
    let s = start as f64;
    acc.add((-s * (s + 1.0) * t).exp() / t);
    acc.value() / FOUR_PI
}

/// Minimal degree `M` with `tail_bound(kind, M, t) ≤ tol`.
pub fn truncation_order(t: f64, tol: f64, kind: KernelKind) -> Result<usize> {
    check_time(t)?;
    check_tol(tol)?;
    let mut degree = 0;
    while tail_bound(kind, degree, t) > tol {
        degree += 1;
    }
    Ok(degree)
}

fn check_time(t: f64) -> Result<()> {
    if !(t.is_finite() && t >= MIN_TIME) {
        return Err(Error::invalid("t", format!("must be ≥ {MIN_TIME:e}, got {t}")));
    }
    Ok(())
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::invalid("tol", format!("must be > 0, got {tol}")));
    }
    Ok(())
}

/// Diffusion time, truncation tolerance and the Legendre coefficients of
/// the heat and Sobolev series truncated to meet that tolerance.
#[derive(Debug, Clone)]
pub struct KernelParams {
    t: f64,
    tol: f64,
    heat_weights: Vec<f64>,
    sobolev_weights: Vec<f64>,
}

impl KernelParams {
    pub fn new(t: f64, tol: f64) -> Result<Self> {
        let heat_degree = truncation_order(t, tol, KernelKind::Heat)?;
        let sobolev_degree = truncation_order(t, tol, KernelKind::Sobolev)?;
        Ok(Self::with_degrees(t, tol, heat_degree, sobolev_degree))
    }

    /// Fixed degrees, bypassing the tail-bound selection. Used to compare
    /// against slower, longer sums.
    pub fn with_degrees(t: f64, tol: f64, heat_degree: usize, sobolev_degree: usize) -> Self {
        let heat_weights = (0..=heat_degree)
            .map(|m| {
                let mf = m as f64;
                (2.0 * mf + 1.0) / FOUR_PI * (-eigenvalue(m) * t).exp()
            })
            .collect();
        let sobolev_weights = (0..=sobolev_degree)
            .map(|m| {
                if m == 0 {
                    return 0.0;
                }
                let mf = m as f64;
                let lambda = eigenvalue(m);
                (2.0 * mf + 1.0) / FOUR_PI * (-lambda * t).exp() / lambda
            })
            .collect();
        Self {
            t,
            tol,
            heat_weights,
            sobolev_weights,
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn degree(&self, kind: KernelKind) -> usize {
        match kind {
            KernelKind::Heat => self.heat_weights.len() - 1,
            KernelKind::Integrated | KernelKind::Sobolev => self.sobolev_weights.len() - 1,
        }
    }
}

/// `λ_m = m(m+1)`.
pub fn eigenvalue(m: usize) -> f64 {
    let mf = m as f64;
    mf * (mf + 1.0)
}

/// `Σ_m w_m P_m(c)` with the recurrence run inline.
fn legendre_series(weights: &[f64], c: f64) -> f64 {
    let c = c.clamp(-1.0, 1.0);
    let mut acc = KahanSum::new();
    let mut p_prev = 1.0;
    let mut p = c;
    acc.add(weights[0]);
    if weights.len() > 1 {
        acc.add(weights[1] * c);
    }
    for (m, w) in weights.iter().enumerate().skip(2) {
        let mf = (m - 1) as f64;
        let next = ((2.0 * mf + 1.0) * c * p - mf * p_prev) / (mf + 1.0);
        p_prev = p;
        p = next;
        acc.add(w * p);
    }
    acc.value()
}

fn check_cosine(c: f64) -> Result<f64> {
    if !(c.abs() <= 1.0 + 1e-12) {
        return Err(Error::invalid("c", format!("cosine must lie in [−1, 1], got {c}")));
    }
    Ok(c.clamp(-1.0, 1.0))
}

/// Density of `e^{tΔ}δ_x` at a point `y` with `x·y = c`.
pub fn heat_kernel(c: f64, params: &KernelParams) -> Result<f64> {
    Ok(legendre_series(&params.heat_weights, check_cosine(c)?))
}

/// `Σ_{m≥1} (2m+1)/(4π) · e^{−λ_m t}/λ_m · P_m(c)`: the Ḣ⁻¹ inner product of
/// two heat-evolved Dirac masses whose times add up to `t`.
pub fn sobolev_pair_kernel(c: f64, params: &KernelParams) -> Result<f64> {
    Ok(legendre_series(&params.sobolev_weights, check_cosine(c)?))
}

/// `D(t) = ∫ G(z, y) e^{tΔ}δ_z(y) dy`, the same for every `z`.
pub fn diagonal_green_heat(t: f64, tol: f64) -> Result<f64> {
    let params = KernelParams::new(t, tol)?;
    Ok(params.diagonal())
}

impl KernelParams {
    /// [`diagonal_green_heat`] at this time and tolerance.
    pub fn diagonal(&self) -> f64 {
        self.sobolev_weights.iter().rev().copied().sum::<KahanSum>().value()
    }
}

/// Small-time expansion `−1/(4π) + log 2/(2π) + γ/(4π) − log(4t)/(4π)` of
/// [`diagonal_green_heat`]. Logs a warning outside `0 < t < 1`.
pub fn diagonal_green_heat_asymptotic(t: f64) -> Result<f64> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::invalid("t", format!("must be > 0, got {t}")));
    }
    if t >= 1.0 {
        log::warn!("diagonal asymptotic evaluated at t = {t}, outside its small-time regime");
    }
    Ok(-1.0 / FOUR_PI + 2f64.ln() / (2.0 * PI) + crate::special::EULER_GAMMA / FOUR_PI
        - (4.0 * t).ln() / FOUR_PI)
}

/// Green function of the Laplacian on S² as the Legendre series
/// `Σ_{m≥1} (2m+1)/(4π m(m+1)) · P_m(c)`, for `c < 1`.
///
/// The series is Abel-summed: with `g(r) = (1 − 2rc + r²)^{−1/2}`,
/// `Σ P_m/m = ∫₀¹ (g − 1)/r dr` and `Σ P_m/(m+1) = ∫₀¹ (g − 1) dr`.
pub fn green_series(c: f64) -> Result<f64> {
    let c = check_cosine(c)?;
    green_series_gap(c, 1.0 - c)
}

/// As [`green_series`], given `gap = 1 − c` separately. For close pairs pass
/// `gap = ‖x − y‖²/2` from the coordinates; `1 − c` from a rounded cosine
/// loses relative accuracy.
pub fn green_series_gap(c: f64, gap: f64) -> Result<f64> {
    if !(gap > 0.0) {
        return Err(Error::invalid("c", "the Green function is singular at c = 1"));
    }
    let c = c.clamp(-1.0, 1.0);
    // h(r) = (r − c)² + (1 − c)(1 + c), written to avoid cancellation.
    let floor = gap * (2.0 - gap);
    let integrand = |r: f64| {
        let h = (r - c) * (r - c) + floor;
        let root = h.sqrt();
        // (g − 1)(1 + 1/r) with g − 1 = r(2c − r) / (√h (1 + √h)).
        (2.0 * c - r) * (1.0 + r) / (root * (1.0 + root))
    };
    let width = floor.sqrt();
    let mut breaks = vec![0.0];
    for b in [c - width, c, c + width] {
        if b > 0.0 && b < 1.0 {
            breaks.push(b);
        }
    }
    breaks.push(1.0);
    let integral = quad::integrate_breaks(integrand, &breaks, GREEN_QUADRATURE_TOL)?;
    Ok(integral / FOUR_PI)
}

/// `∫₀ᵗ p_s(c) ds` for `c < 1`, assembled as `t/(4π) + G(c) − S_t(c)`.
pub fn integrated_heat_kernel(c: f64, params: &KernelParams) -> Result<f64> {
    let c = check_cosine(c)?;
    integrated_heat_kernel_gap(c, 1.0 - c, params)
}

/// As [`integrated_heat_kernel`] with the `1 − c` gap supplied separately.
pub fn integrated_heat_kernel_gap(c: f64, gap: f64, params: &KernelParams) -> Result<f64> {
    let green = green_series_gap(c, gap)?;
    let sobolev = legendre_series(&params.sobolev_weights, c);
    Ok(params.t / FOUR_PI + green - sobolev)
}

/// Short-time Gaussian `(1/(4πt)) e^{−‖x−y‖²/(4t)}` with `‖x−y‖² = 2 − 2c`.
/// A cross-check only; its relative error is `O(t)`.
pub fn varadhan_gaussian(c: f64, t: f64) -> f64 {
    (-(2.0 - 2.0 * c) / (4.0 * t)).exp() / (FOUR_PI * t)
}
