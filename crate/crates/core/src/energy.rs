//! Energies on S² and the heat-kernel renormalization of the logarithmic
//! energy.
//!
//! For distinct points `x₁, …, xₙ` and any `t > 0`,
//!
//! ```text
//! X = (1/2π) Σ_{k≠ℓ} log(1/‖x_k − x_ℓ‖) − I(t) − S(t)
//! I(t) = Σ_{k≠ℓ} ∫₀ᵗ (e^{sΔ}δ_{x_ℓ})(x_k) ds
//! S(t) = ‖e^{(t/2)Δ} Σ_k δ_{x_k}‖²_{Ḣ⁻¹}
//! ```
//!
//! does not depend on the points:
//! `X = (1/2π)(1/2 − log 2) n(n−1) − n(n−1)t/(4π) − n D(t)`.
//! All pair sums use the ordered-pair convention.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice;
use crate::quad;
use crate::special::{self, EULER_GAMMA};
use crate::spectral::{self, KernelParams};
use crate::sphere::{squared_distance, Configuration, SpherePoint};
use crate::sum::{pairwise_sum, KahanSum};


/// How pair sums are reduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Reduction {
    /// Row-major traversal with one compensated accumulator; bit-reproducible.
    #[default]
    Sequential,
    /// Rows evaluated in parallel, row sums combined by a pairwise tree.
    Parallel,
}

/// Sum of `f` over ordered pairs `k ≠ ℓ`, for symmetric `f`.
fn pair_sum<F>(cfg: &Configuration, reduction: Reduction, f: F) -> Result<f64>
where
    F: Fn(&SpherePoint, &SpherePoint) -> Result<f64> + Sync,
{
    let pts = cfg.points();
    let half = match reduction {
        Reduction::Sequential => {
            let mut acc = KahanSum::new();
            for (i, p) in pts.iter().enumerate() {
                for q in &pts[i + 1..] {
                    acc.add(f(p, q)?);
                }
            }
            acc.value()
        }
        Reduction::Parallel => {
            let rows = (0..pts.len())
                .into_par_iter()
                .map(|i| {
                    let mut acc = KahanSum::new();
                    for q in &pts[i + 1..] {
                        acc.add(f(&pts[i], q)?);
                    }
                    Ok(acc.value())
                })
                .collect::<Result<Vec<f64>>>()?;
            pairwise_sum(&rows)
        }
    };
    Ok(2.0 * half)
}

/// Closed-form constants used across the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MathConstants {
    pub euler_gamma: f64,
    pub log2: f64,
    pub pi: f64,
    pub gamma_one_third: f64,
    /// `−1/(4π) + log 2/(2π)`, the constant making the Green function mean-zero.
    pub c2: f64,
    /// `1/2 − log 2`, the leading coefficient of the minimal log energy.
    pub leading: f64,
    pub cbhs: f64,
    /// `(log 4 − 1 − γ)/2`.
    pub corollary1_bound: f64,
}

impl MathConstants {
    pub fn new() -> Self {
        let log2 = 2f64.ln();
        Self {
            euler_gamma: EULER_GAMMA,
            log2,
            pi: PI,
            gamma_one_third: special::gamma_function(1.0 / 3.0).expect("Γ(1/3) is finite"),
            c2: -1.0 / (4.0 * PI) + log2 / (2.0 * PI),
            leading: 0.5 - log2,
            cbhs: lattice::cbhs_closed_form(),
            corollary1_bound: (4f64.ln() - 1.0 - EULER_GAMMA) / 2.0,
        }
    }
}

impl Default for MathConstants {
    fn default() -> Self {
        Self::new()
    }
}

/// Green function `(1/2π) log(1/‖x − y‖) + c₂` from the chord length.
pub fn green_function(chord: f64) -> f64 {
    (1.0 / chord).ln() / (2.0 * PI) + MathConstants::new().c2
}

/// `Σ_{k≠ℓ} log(1/‖x_k − x_ℓ‖)`.
pub fn log_energy(cfg: &Configuration) -> Result<f64> {
    cfg.ensure_distinct()?;
    pair_sum(cfg, Reduction::Sequential, |p, q| Ok(-0.5 * squared_distance(p, q).ln()))
}

fn check_scale(c: f64) -> Result<()> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::invalid("c", format!("must be > 0, got {c}")));
    }
    Ok(())
}

/// `Σ_{k≠ℓ} exp(−c·n·‖x_k − x_ℓ‖²)`. The diagonal (a constant `n`) is left
/// out; it does not move minimizers.
pub fn gaussian_energy(cfg: &Configuration, c: f64) -> Result<f64> {
    check_scale(c)?;
    if cfg.n() < 2 {
        return Err(Error::invalid("n", "Gaussian energy needs at least two points"));
    }
    cfg.ensure_distinct()?;
    let scale = c * cfg.n() as f64;
    pair_sum(cfg, Reduction::Sequential, |p, q| Ok((-scale * squared_distance(p, q)).exp()))
}

/// Cosine and `1 − cosine` of a pair, the latter from the chord so that it
/// keeps full relative accuracy for close points.
fn pair_geometry(p: &SpherePoint, q: &SpherePoint) -> (f64, f64) {
    let gap = 0.5 * squared_distance(p, q);
    (1.0 - gap, gap)
}

/// `I(t) = Σ_{k≠ℓ} ∫₀ᵗ (e^{sΔ}δ_{x_ℓ})(x_k) ds`.
pub fn interaction_energy(cfg: &Configuration, params: &KernelParams) -> Result<f64> {
    cfg.ensure_distinct()?;
    pair_sum(cfg, Reduction::Sequential, |p, q| {
        let (c, gap) = pair_geometry(p, q);
        spectral::integrated_heat_kernel_gap(c, gap, params)
    })
}

/// `S(t) = Σ_{k,ℓ} S_t(x_k·x_ℓ)`, diagonal included (each diagonal term is
/// `D(t)`).
pub fn sobolev_energy(cfg: &Configuration, params: &KernelParams) -> Result<f64> {
    let off = pair_sum(cfg, Reduction::Sequential, |p, q| {
        spectral::sobolev_pair_kernel(p.cosine(q), params)
    })?;
    Ok(off + cfg.n() as f64 * params.diagonal())
}

/// The closed-form value of the point-independent constant,
/// `(1/2π)(1/2 − log 2) n(n−1) − n(n−1)t/(4π) − n D(t)`.
pub fn closed_form_x(n: usize, params: &KernelParams) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    let n = n as f64;
    let pairs = n * (n - 1.0);
    Ok((0.5 - 2f64.ln()) * pairs / (2.0 * PI) - pairs * params.t() / (4.0 * PI) - n * params.diagonal())
}

/// The terms of the renormalized identity for one configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyBreakdown {
    pub n: usize,
    pub t: f64,
    pub log_energy: f64,
    pub interaction: f64,
    pub sobolev: f64,
    pub x_empirical: f64,
    pub x_closed: f64,
    pub residual: f64,
    /// Truncation budget `n²(tol_integrated + tol_sobolev) + n·tol_D` plus
    /// the Green-series quadrature error.
    pub error_budget: f64,
}

pub fn renormalized_functional(cfg: &Configuration, params: &KernelParams) -> Result<EnergyBreakdown> {
    renormalized_functional_with(cfg, params, Reduction::Sequential)
}

pub fn renormalized_functional_with(
    cfg: &Configuration,
    params: &KernelParams,
    reduction: Reduction,
) -> Result<EnergyBreakdown> {
    cfg.ensure_distinct()?;
    let n = cfg.n();
    let log_energy = pair_sum(cfg, reduction, |p, q| Ok(-0.5 * squared_distance(p, q).ln()))?;
    let interaction = pair_sum(cfg, reduction, |p, q| {
        let (c, gap) = pair_geometry(p, q);
        spectral::integrated_heat_kernel_gap(c, gap, params)
    })?;
    let sobolev_off = pair_sum(cfg, reduction, |p, q| {
        spectral::sobolev_pair_kernel(p.cosine(q), params)
    })?;
    let sobolev = sobolev_off + n as f64 * params.diagonal();
    let x_empirical = log_energy / (2.0 * PI) - interaction - sobolev;
    let x_closed = closed_form_x(n, params)?;
    let nf = n as f64;
    let error_budget = nf * nf * (2.0 * params.tol() + spectral::GREEN_QUADRATURE_TOL) + nf * params.tol();
    Ok(EnergyBreakdown {
        n,
        t: params.t(),
        log_energy,
        interaction,
        sobolev,
        x_empirical,
        x_closed,
        residual: x_empirical - x_closed,
        error_budget,
    })
}

/// Terms of the lower-bound pipeline at `t = a/n`, per point (the `−½ n log n`
/// term is carried separately by the asymptotic expansion).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport {
    /// Time scale: `t = a/n`.
    pub a: f64,
    /// Linear coefficient of the bound.
    pub value: f64,
    /// `−(1/2 − log 2)` from the identity's `−(1/2 − log 2)n` term.
    pub identity_term: f64,
    /// `−a/2` from `−n(n−1)t/2`.
    pub time_term: f64,
    /// `(1/2 − log 2) − γ/2 + log(4a)/2` from `−2πn D(t)` with the small-time
    /// expansion of `D`.
    pub diagonal_term: f64,
    /// `2π I(t) ≥ 0`, dropped.
    pub dropped_interaction: f64,
    /// `2πn² S(t) ≥ 0`, dropped.
    pub dropped_sobolev: f64,
}

/// Pipeline at `t = a/n`: yields `(−γ + log(4a) − a)/2`.
pub fn lower_bound_pipeline(a: f64) -> Result<BoundReport> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::invalid("a", format!("must be > 0, got {a}")));
    }
    let leading = 0.5 - 2f64.ln();
    let identity_term = -leading;
    let time_term = -a / 2.0;
    let diagonal_term = leading - EULER_GAMMA / 2.0 + (4.0 * a).ln() / 2.0;
    Ok(BoundReport {
        a,
        value: identity_term + time_term + diagonal_term,
        identity_term,
        time_term,
        diagonal_term,
        dropped_interaction: 0.0,
        dropped_sobolev: 0.0,
    })
}

/// The pipeline at `t = 1/n`: `(log 4 − 1 − γ)/2 ≈ −0.0954607`.
pub fn corollary1_lower_bound() -> BoundReport {
    lower_bound_pipeline(1.0).expect("a = 1 is valid")
}

/// The finite-`n` lower bound on the log energy at `t = a/n`, assembled two
/// ways.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiniteBound {
    pub n: usize,
    pub t: f64,
    /// `(1/2 − log 2)(n² − n) − n(n−1)t/2 − 2πn·D_asym(t)`.
    pub assembled: f64,
    /// `(1/2 − log 2)n² − n(n−1)t/2 − γn/2 + n log(4t)/2`.
    pub display: f64,
    /// The assembly with the spectral `D(t)` in place of its expansion.
    pub spectral: f64,
}

pub fn finite_n_lower_bound(n: usize, a: f64, tol: f64) -> Result<FiniteBound> {
    if n < 2 {
        return Err(Error::invalid("n", "must be at least 2"));
    }
    if !(a > 0.0) {
        return Err(Error::invalid("a", format!("must be > 0, got {a}")));
    }
    let nf = n as f64;
    let t = a / nf;
    let leading = 0.5 - 2f64.ln();
    let base = leading * nf * nf - leading * nf - nf * (nf - 1.0) * t / 2.0;
    let assembled = base - 2.0 * PI * nf * spectral::diagonal_green_heat_asymptotic(t)?;
    let spectral_d = spectral::diagonal_green_heat(t, tol)?;
    let display = leading * nf * nf - nf * (nf - 1.0) * t / 2.0 - EULER_GAMMA * nf / 2.0
        + nf * (4.0 * t).ln() / 2.0;
    Ok(FiniteBound {
        n,
        t,
        assembled,
        display,
        spectral: base - 2.0 * PI * nf * spectral_d,
    })
}

/// Six hexagonal neighbours at distance `λ`, interaction integrated up to
/// `t = 1/n`, per point: `12π ∫₀^{1/n} (1/(4πt)) e^{−2π/(√3 n t)} dt · n⁰ =
/// 3 Γ(0, 2π/√3) ≈ 0.017863`.
pub fn hex_improvement_estimate() -> f64 {
    3.0 * special::e1(lattice::hex_exponent())
}

/// [`hex_improvement_estimate`] by quadrature of the defining time integral
/// (rescaled to `τ = n t`): `3 ∫₀¹ e^{−2π/(√3 τ)} / τ dτ`.
pub fn hex_improvement_quadrature() -> Result<f64> {
    let alpha = lattice::hex_exponent();
    let v = quad::integrate(|tau: f64| if tau <= 0.0 { 0.0 } else { (-alpha / tau).exp() / tau }, 0.0, 1.0, 1e-16)?;
    Ok(3.0 * v)
}

/// Basic lower bound plus the six-neighbour term: `≈ −0.0775977`.
pub fn improved_lower_bound() -> f64 {
    corollary1_lower_bound().value + hex_improvement_estimate()
}

/// `√(8π/√3)`: below this `s`, the fraction in [`proposition_fraction`] is 0.
pub fn proposition_threshold() -> f64 {
    (8.0 * PI / 3f64.sqrt()).sqrt()
}

/// `max(0, 1 − (4/s²)(2π/√3))`: asymptotic fraction of points with another
/// point within `s/√n`.
pub fn proposition_fraction(s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::invalid("s", format!("must be > 0, got {s}")));
    }
    Ok((1.0 - 4.0 / (s * s) * lattice::hex_exponent()).max(0.0))
}

/// `½ · fraction(s) · Γ(0, s²/4)`: per-point interaction gained from the
/// density argument alone, at `t = 1/n`.
pub fn uninformed_improvement(s: f64) -> Result<f64> {
    let frac = proposition_fraction(s)?;
    if frac == 0.0 {
        return Ok(0.0);
    }
    Ok(0.5 * frac * special::e1(s * s / 4.0))
}

/// Grid maximum of [`uninformed_improvement`] over `[lo, hi]`.
pub fn uninformed_scan(lo: f64, hi: f64, steps: usize) -> Result<(f64, f64)> {
    if !(lo > 0.0 && hi > lo && steps >= 2) {
        return Err(Error::invalid("s", format!("bad scan range [{lo}, {hi}] with {steps} steps")));
    }
    let mut best = (lo, f64::NEG_INFINITY);
    for i in 0..steps {
        let s = lo + (hi - lo) * i as f64 / (steps - 1) as f64;
        let v = uninformed_improvement(s)?;
        if v > best.1 {
            best = (s, v);
        }
    }
    Ok(best)
}

/// `S(t)/I(t)` at `t = c/n`.
pub fn meta_ratio_diagnostic(cfg: &Configuration, c: f64, tol: f64) -> Result<f64> {
    check_scale(c)?;
    if cfg.n() < 2 {
        return Err(Error::invalid("n", "the ratio needs at least two points"));
    }
    let params = KernelParams::new(c / cfg.n() as f64, tol)?;
    let b = renormalized_functional(cfg, &params)?;
    if b.interaction < 1e-14 {
        return Err(Error::Numerical(format!(
            "interaction {:e} too small for a meaningful ratio",
            b.interaction
        )));
    }
    Ok(b.sobolev / b.interaction)
}
