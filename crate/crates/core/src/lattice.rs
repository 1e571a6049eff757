//! Sums over the hexagonal lattice generated by `v₁ = (1, 0)` and
//! `v₂ = (1/2, √3/2)`, where `‖k₁v₁ + k₂v₂‖² = k₁² + k₁k₂ + k₂²`, and the two
//! routes to the constant `c_BHS`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad;
use crate::special::{self, EULER_GAMMA};
use crate::sum::KahanSum;

/// `k₁² + k₁k₂ + k₂²`.
pub fn qform(k1: i64, k2: i64) -> i64 {
    k1 * k1 + k1 * k2 + k2 * k2
}

/// Largest cutoff norm the shell enumeration will attempt.
pub const MAX_CUTOFF_NORM: u64 = 10_000_000;

/// `counts[j]` = number of `(k₁, k₂)` with `Q(k₁, k₂) = j`, for `j ≤ radius`.
///
/// Enumerates the box `|k₁|, |k₂| ≤ ⌈√(4R/3)⌉ + 1`, which contains the whole
/// ellipse `Q ≤ R`.
pub fn shell_counts(radius: u64) -> Vec<u32> {
    let bound = ((4.0 * radius as f64 / 3.0).sqrt().ceil() as i64) + 1;
    let mut counts = vec![0u32; radius as usize + 1];
    for k1 in -bound..=bound {
        for k2 in -bound..=bound {
            let q = qform(k1, k2);
            if q as u64 <= radius {
                counts[q as usize] += 1;
            }
        }
    }
    counts
}

/// Nearest-neighbour distance `λ = √(8π) / (3^{1/4} √n)` of a hexagonal
/// packing with `n` points on the area of S².
pub fn hex_spacing(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    Ok((8.0 * PI).sqrt() / (3f64.powf(0.25) * (n as f64).sqrt()))
}

/// A truncated lattice sum with its rigorous truncation bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatticeSumResult {
    pub value: f64,
    /// Largest `Q(k₁, k₂)` included.
    pub cutoff_norm: u64,
    /// Bound on the discarded terms.
    pub tail_bound: f64,
}

/// `Σ_{j > R} 6j · e^{−εj}/(εj) = (6/ε) e^{−ε(R+1)} / (1 − e^{−ε})`, using
/// `Γ(0, x) ≤ e^{−x}/x` and at most `6j` lattice points with `Q = j`.
pub fn gamma_tail_bound(eps: f64, radius: u64) -> f64 {
    6.0 / eps * (-eps * (radius as f64 + 1.0)).exp() / -(-eps).exp_m1()
}

/// `Σ_{(k₁,k₂) ≠ 0} Γ(0, ε Q(k₁, k₂))`, truncated at the smallest `R` whose
/// tail bound is ≤ `tol`.
pub fn gamma_lattice_sum(eps: f64, tol: f64) -> Result<LatticeSumResult> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::invalid("eps", format!("must be > 0, got {eps}")));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tol", format!("must be > 0, got {tol}")));
    }
    // The bound is decreasing in R; jump close to the root, then step.
    let guess = ((6.0 / (eps * tol * -(-eps).exp_m1())).ln() / eps).max(1.0);
    if guess > MAX_CUTOFF_NORM as f64 {
        return Err(Error::invalid(
            "eps",
            format!("eps = {eps} needs a cutoff norm near {guess:.3e}, above the {MAX_CUTOFF_NORM} budget"),
        ));
    }
    let mut radius = (guess as u64).saturating_sub(2).max(1);
    while radius > 1 && gamma_tail_bound(eps, radius - 1) <= tol {
        radius -= 1;
    }
    while gamma_tail_bound(eps, radius) > tol {
        radius += 1;
    }
    let value = gamma_shell_sum(eps, &shell_counts(radius));
    Ok(LatticeSumResult {
        value,
        cutoff_norm: radius,
        tail_bound: gamma_tail_bound(eps, radius),
    })
}

fn gamma_shell_sum(eps: f64, counts: &[u32]) -> f64 {
    let mut acc = KahanSum::new();
    for (norm, &count) in counts.iter().enumerate().skip(1).rev() {
        if count > 0 {
            acc.add(count as f64 * special::e1(eps * norm as f64));
        }
    }
    acc.value()
}

/// Three explicit terms of the small-ε expansion of [`gamma_lattice_sum`]:
/// `2π/(√3 ε) − log(1/ε) + γ + log(4π² / (√3 Γ(1/3)⁶))`.
pub fn three_term_expansion(eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::invalid("eps", format!("must be > 0, got {eps}")));
    }
    let g = special::gamma_function(1.0 / 3.0)?;
    let sqrt3 = 3f64.sqrt();
    Ok(2.0 * PI / (sqrt3 * eps) + eps.ln() + EULER_GAMMA
        + (4.0 * PI * PI / (sqrt3 * g.powi(6))).ln())
}

/// Remainder of the three-term expansion, for `0 < ε ≤ 0.1`.
pub fn corollary3_residual(eps: f64, tol: f64) -> Result<f64> {
    if !(eps > 0.0 && eps <= 0.1) {
        return Err(Error::invalid("eps", format!("must lie in (0, 0.1], got {eps}")));
    }
    Ok(gamma_lattice_sum(eps, tol)?.value - three_term_expansion(eps)?)
}

/// `2 log 2 + ½ log(2/3) + 3 log(√π / Γ(1/3))`.
pub fn cbhs_closed_form() -> f64 {
    let g = special::gamma_function(1.0 / 3.0).expect("Γ(1/3) is finite");
    2.0 * 2f64.ln() + 0.5 * (2.0f64 / 3.0).ln() + 3.0 * (PI.sqrt() / g).ln()
}

/// `2π/√3`, the exponent scale of `L(e^{−2π/(√3 s)})`.
pub fn hex_exponent() -> f64 {
    2.0 * PI / 3f64.sqrt()
}

/// `∫₀^c (1/(2s)) (L(e^{−2π/(√3 s)}) − 1) ds − c/2 + log(4c)/2 − γ/2`.
///
/// Each lattice term integrates to an incomplete gamma function,
/// `∫₀^c e^{−αQ/s}/(2s) ds = ½ Γ(0, αQ/c)`, so the integral is half of
/// [`gamma_lattice_sum`] at `ε = 2π/(√3 c)`.
pub fn cbhs_from_integral(c: f64, tol: f64) -> Result<f64> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::invalid("c", format!("must be > 0, got {c}")));
    }
    let sum = gamma_lattice_sum(hex_exponent() / c, tol)?;
    Ok(0.5 * sum.value - 0.5 * c + 0.5 * (4.0 * c).ln() - 0.5 * EULER_GAMMA)
}

/// Integrand `(1/(2s)) (L(e^{−2π/(√3 s)}) − 1)`.
pub fn cbhs_integrand(s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::invalid("s", format!("must be > 0, got {s}")));
    }
    let q = (-hex_exponent() / s).exp();
    Ok(special::cubic_theta_l_minus_one(q)? / (2.0 * s))
}

/// Adaptive quadrature of [`cbhs_integrand`] over `[a, b]`.
pub fn cbhs_integral_quadrature(a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(a > 0.0 && b > a) {
        return Err(Error::invalid("a", format!("need 0 < a < b, got [{a}, {b}]")));
    }
    let failure = std::cell::RefCell::new(None);
    let value = quad::integrate(
        |s| match cbhs_integrand(s) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        },
        a,
        b,
        tol,
    );
    match failure.into_inner() {
        Some(e) => Err(e),
        None => value,
    }
}

/// Same integral as [`cbhs_integral_quadrature`] through incomplete-gamma
/// lattice sums: `½ (Σ Γ(0, αQ/b) − Σ Γ(0, αQ/a))`.
pub fn cbhs_integral_gamma(a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(a > 0.0 && b > a) {
        return Err(Error::invalid("a", format!("need 0 < a < b, got [{a}, {b}]")));
    }
    let upper = gamma_lattice_sum(hex_exponent() / b, tol)?;
    let lower = gamma_lattice_sum(hex_exponent() / a, tol)?;
    Ok(0.5 * (upper.value - lower.value))
}
