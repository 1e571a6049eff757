//! Special functions: Γ, the incomplete gamma function Γ(0, z), Jacobi theta
//! functions θ₂/θ₃ at real nome, the q-Pochhammer symbol (q²; q²)_∞ and the
//! cubic theta function `L(q) = Σ q^{m² + mn + n²}`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::lattice;
use crate::sum::KahanSum;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Nome `q ∈ (0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct QValue(f64);

impl QValue {
    pub fn new(q: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::invalid("q", format!("nome must lie in (0, 1), got {q}")));
        }
        Ok(Self(q))
    }

    pub fn get(self) -> f64 {
        self.0
    }

    /// `log(1/q) > 0`.
    pub fn log_inv(self) -> f64 {
        -self.0.ln()
    }

    /// Dual nome `q̂ = exp(−2π² / log(1/q))`.
    pub fn dual(self) -> f64 {
        (-2.0 * PI * PI / self.log_inv()).exp()
    }

    /// `q^k` for real `k`, computed as `exp(k log q)`.
    fn pow(self, k: f64) -> f64 {
        (-k * self.log_inv()).exp()
    }

    fn cube(self) -> Result<Self> {
        QValue::new(self.0.powi(3))
    }
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Euler's Γ for `x > 0` (Lanczos, g = 7; reflection below 1/2).
pub fn gamma_function(x: f64) -> Result<f64> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::invalid("x", format!("Γ is implemented for x > 0, got {x}")));
    }
    Ok(gamma_positive(x))
}

fn gamma_positive(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma_positive(1.0 - x));
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, coeff) in LANCZOS.iter().enumerate().skip(1) {
        a += coeff / (x + i as f64);
    }
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

/// `Γ(0, z) = ∫_z^∞ e^{−t}/t dt = E₁(z)` for `z > 0`.
///
/// Power series `−γ − log z + Σ (−1)^{k+1} z^k/(k·k!)` for `z ≤ 1`, modified
/// Lentz continued fraction above.
pub fn exp_integral_gamma0(z: f64) -> Result<f64> {
    if !(z > 0.0) || z.is_nan() {
        return Err(Error::invalid("z", format!("Γ(0, z) needs z > 0, got {z}")));
    }
    Ok(e1(z))
}

/// `Ei(−z) = −Γ(0, z)`.
pub fn ei_neg(z: f64) -> Result<f64> {
    exp_integral_gamma0(z).map(|v| -v)
}

pub(crate) fn e1(z: f64) -> f64 {
    if z.is_infinite() {
        return 0.0;
    }
    if z <= 1.0 {
        let mut acc = KahanSum::new();
        acc.add(-EULER_GAMMA);
        acc.add(-z.ln());
        let mut power = 1.0; // (−1)^{k+1} z^k / k!
        for k in 1..60 {
            let kf = k as f64;
            power *= if k == 1 { z } else { -z / kf };
            let term = power / kf;
            acc.add(term);
            if term.abs() < 1e-18 {
                break;
            }
        }
        acc.value()
    } else {
        const TINY: f64 = 1e-300;
        let mut b = z + 1.0;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..1000 {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let delta = c * d;
            h *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * (-z).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThetaKind {
    /// `θ₂(q) = Σ_k q^{(k+1/2)²}`
    Theta2,
    /// `θ₃(q) = Σ_k q^{k²}`
    Theta3,
}

/// θ₂ or θ₃ at real nome by direct summation, stopping once the next term
/// drops below 1e−16 of the partial sum.
pub fn jacobi_theta(kind: ThetaKind, q: QValue) -> f64 {
    let offset = match kind {
        ThetaKind::Theta2 => 0.5,
        ThetaKind::Theta3 => 0.0,
    };
    let mut terms = Vec::new();
    let mut partial = 0.0;
    let mut k = 0u64;
    loop {
        let e = k as f64 + offset;
        let mut term = q.pow(e * e);
        if !(kind == ThetaKind::Theta3 && k == 0) {
            term *= 2.0;
        }
        if k > 0 && term < 1e-16 * partial {
            break;
        }
        partial += term;
        terms.push(term);
        k += 1;
    }
    terms.iter().rev().copied().sum::<KahanSum>().value()
}

/// `(q²; q²)_∞ = Π_{k≥1} (1 − q^{2k})`, summed in log space.
pub fn q_pochhammer_sq(q: QValue) -> f64 {
    let mut log_terms = Vec::new();
    let mut k = 1u64;
    loop {
        let qk = q.pow(2.0 * k as f64);
        if qk < 1e-16 {
            break;
        }
        log_terms.push((-qk).ln_1p());
        k += 1;
    }
    log_terms.iter().rev().copied().sum::<KahanSum>().value().exp()
}

/// `log (q²; q²)_∞` from its q → 1 expansion
/// `−π²/(12L) − ½ log(L/π) + L/12 − Σ_k q̂^k / (k(1 − q̂^k))`, `L = log(1/q)`.
fn log_q_pochhammer_sq_asymptotic(q: QValue) -> f64 {
    let l = q.log_inv();
    let qhat = q.dual();
    let mut acc = KahanSum::new();
    acc.add(-PI * PI / (12.0 * l));
    acc.add(-0.5 * (l / PI).ln());
    acc.add(l / 12.0);
    let mut power = 1.0;
    for k in 1..10_000 {
        power *= qhat;
        let term = power / (k as f64 * (1.0 - power));
        if term < 1e-18 {
            break;
        }
        acc.add(-term);
    }
    acc.value()
}

/// `(q²; q²)_∞` from the q → 1 asymptotic expansion.
pub fn q_pochhammer_sq_asymptotic(q: QValue) -> f64 {
    log_q_pochhammer_sq_asymptotic(q).exp()
}

/// θ₂/θ₃ from the representation
/// `θ(q) = (q²;q²)_∞ · exp(−π²/(12 log q) + (log q)/12 + Σ_k (±1)^k / (k sinh(π² k / log q)))`
/// with `+` for θ₂ and `(−1)^k` for θ₃, and (q²;q²)_∞ from its own
/// asymptotic expansion. Meant for q close to 1; warns for `q ≤ 0.5`.
pub fn theta_asymptotic(kind: ThetaKind, q: QValue) -> Result<f64> {
    if q.get() <= 0.5 {
        log::warn!("theta asymptotic formula at q = {} converges slowly", q.get());
    }
    let log_q = q.get().ln();
    let x = PI * PI / log_q.abs();
    let mut acc = KahanSum::new();
    acc.add(log_q_pochhammer_sq_asymptotic(q));
    acc.add(-PI * PI / (12.0 * log_q));
    acc.add(log_q / 12.0);
    let mut last = f64::INFINITY;
    for k in 1..10_000u32 {
        let kx = k as f64 * x;
        // 1/sinh(−kx) = −2e^{−kx}/(1 − e^{−2kx})
        let inv_sinh = -2.0 * (-kx).exp() / -(-2.0 * kx).exp_m1();
        let sign = match kind {
            ThetaKind::Theta2 => 1.0,
            ThetaKind::Theta3 if k % 2 == 0 => 1.0,
            ThetaKind::Theta3 => -1.0,
        };
        let term = sign * inv_sinh / k as f64;
        if term.abs() > last {
            return Err(Error::Numerical(format!(
                "sinh series terms stopped decreasing at k = {k}"
            )));
        }
        last = term.abs();
        if term == 0.0 {
            break;
        }
        acc.add(term);
        if term.abs() < 1e-18 {
            break;
        }
    }
    Ok(acc.value().exp())
}

/// Evaluation route for [`cubic_theta_l`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LRoute {
    /// Shell-by-shell double sum over the hexagonal quadratic form.
    Direct,
    /// `θ₃(q)θ₃(q³) + θ₂(q)θ₂(q³)`.
    Borwein,
}

/// Discarded-mass target for the direct double sum.
pub const L_DIRECT_TOL: f64 = 1e-15;

/// Largest quadratic-form value the direct sum is allowed to enumerate.
const L_MAX_RADIUS: u64 = 20_000_000;

/// Cubic theta function `L(q) = Σ_{m,n} q^{m² + mn + n²}`.
pub fn cubic_theta_l(q: QValue, route: LRoute) -> Result<f64> {
    match route {
        LRoute::Direct => Ok(1.0 + cubic_theta_l_minus_one(q.get())?),
        LRoute::Borwein => {
            let q3 = q.cube()?;
            Ok(jacobi_theta(ThetaKind::Theta3, q) * jacobi_theta(ThetaKind::Theta3, q3)
                + jacobi_theta(ThetaKind::Theta2, q) * jacobi_theta(ThetaKind::Theta2, q3))
        }
    }
}

/// `Σ_{j ≥ N} 6j q^j` in closed form, bounding the lattice mass beyond
/// `Q = N − 1` (at most 6j lattice points have `Q = j`).
pub fn shell_tail_bound(q: f64, radius: u64) -> f64 {
    let n = radius as f64 + 1.0;
    6.0 * q.powf(n) * (n - (n - 1.0) * q) / ((1.0 - q) * (1.0 - q))
}

/// `L(q) − 1`, summed over nonzero shells from the outside in. Accepts
/// `q = 0` (returns 0) so the tiny-nome limit needs no special casing.
pub fn cubic_theta_l_minus_one(q: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&q) {
        return Err(Error::invalid("q", format!("nome must lie in [0, 1), got {q}")));
    }
    if q == 0.0 {
        return Ok(0.0);
    }
    let mut radius = 1u64;
    while shell_tail_bound(q, radius) >= L_DIRECT_TOL {
        radius *= 2;
        if radius > L_MAX_RADIUS {
            return Err(Error::Numerical(format!(
                "q = {q} is too close to 1 for the direct double sum"
            )));
        }
    }
    // Bisect down to the smallest admissible radius.
    let (mut lo, mut hi) = (radius / 2, radius);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if shell_tail_bound(q, mid) < L_DIRECT_TOL {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let counts = lattice::shell_counts(hi);
    let log_q = q.ln();
    let mut acc = KahanSum::new();
    for (norm, &count) in counts.iter().enumerate().skip(1).rev() {
        if count > 0 {
            acc.add(count as f64 * (norm as f64 * log_q).exp());
        }
    }
    Ok(acc.value())
}

/// Inequality margin `L(e^{−2π/(√3 c)}) − c`.
///
/// For `c ≤ 1` this is the direct difference. For larger `c` the margin
/// falls below f64 resolution of `L` (it decays like `6c·e^{−2πc/√3}`), so it
/// is evaluated through the self-duality of the hexagonal lattice,
/// `L(e^{−2π/(√3 c)}) = c · L(e^{−2πc/√3})`, as `c · (L(e^{−2πc/√3}) − 1)`.
pub fn theta_inequality_margin(c: f64) -> Result<f64> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::invalid("c", format!("must be > 0, got {c}")));
    }
    if c <= 1.0 {
        theta_inequality_margin_direct(c)
    } else {
        theta_inequality_margin_dual(c)
    }
}

/// `L(e^{−2π/(√3 c)}) − c` by direct subtraction.
pub fn theta_inequality_margin_direct(c: f64) -> Result<f64> {
    let q = (-2.0 * PI / (3f64.sqrt() * c)).exp();
    Ok((1.0 - c) + cubic_theta_l_minus_one(q)?)
}

/// `c · (L(e^{−2πc/√3}) − 1)`.
pub fn theta_inequality_margin_dual(c: f64) -> Result<f64> {
    let q = (-2.0 * PI * c / 3f64.sqrt()).exp();
    Ok(c * cubic_theta_l_minus_one(q)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: f64) -> QValue {
        QValue::new(v).unwrap()
    }

    #[test]
    fn gamma_classical_values() {
        assert!((gamma_function(1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((gamma_function(2.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((gamma_function(0.5).unwrap() - PI.sqrt()).abs() < 1e-14);
        assert!((gamma_function(1.0 / 3.0).unwrap() - 2.678_938_534_707_747_6).abs() < 1e-13);
        assert!(gamma_function(0.0).is_err());
        assert!(gamma_function(-1.5).is_err());
    }

    #[test]
    fn gamma_recurrence() {
        for i in 1..200 {
            let x = 0.05 * i as f64;
            let lhs = gamma_function(x + 1.0).unwrap();
            let rhs = x * gamma_function(x).unwrap();
            assert!(((lhs - rhs) / lhs).abs() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn e1_values() {
        assert!((exp_integral_gamma0(1.0).unwrap() - 0.219_383_934_395_520_27).abs() < 1e-15);
        let z = 2.0 * PI / 3f64.sqrt();
        assert!((exp_integral_gamma0(z).unwrap() - 5.954_590_605_780_558e-3).abs() < 1e-16);
        assert!((ei_neg(1.0).unwrap() + 0.219_383_934_395_520_27).abs() < 1e-15);
        assert!(exp_integral_gamma0(0.0).is_err());
        assert!(exp_integral_gamma0(-1.0).is_err());
    }

    #[test]
    fn e1_small_argument_log_behaviour() {
        let z: f64 = 1e-6;
        let v = exp_integral_gamma0(z).unwrap() + z.ln() + EULER_GAMMA;
        assert!(v.abs() < 2e-6);
    }

    #[test]
    fn e1_continuous_at_switch_point() {
        let below = exp_integral_gamma0(1.0).unwrap();
        let above = exp_integral_gamma0(1.0 + 1e-12).unwrap();
        assert!((below - above).abs() < 1e-12);
    }

    #[test]
    fn theta_values() {
        assert!((jacobi_theta(ThetaKind::Theta2, q(0.1)) - 1.135_930_601_568_280_2).abs() < 1e-15);
        assert!((jacobi_theta(ThetaKind::Theta3, q(0.1)) - 1.200_200_002_000_000_3).abs() < 1e-15);
        assert!((jacobi_theta(ThetaKind::Theta3, q(1e-12)) - 1.0).abs() < 1e-11);
        assert!(jacobi_theta(ThetaKind::Theta2, q(1e-12)) < 1e-2);
    }

    #[test]
    fn qvalue_domain() {
        assert!(QValue::new(0.0).is_err());
        assert!(QValue::new(1.0).is_err());
        assert!(QValue::new(-0.2).is_err());
        assert!(QValue::new(f64::NAN).is_err());
    }

    #[test]
    fn pochhammer_values() {
        assert!((q_pochhammer_sq(q(0.1)) - 0.989_900_000_100_01).abs() < 1e-15);
        assert!((q_pochhammer_sq(q(1e-9)) - 1.0).abs() < 1e-17);
        let direct = q_pochhammer_sq(q(0.95));
        let asym = q_pochhammer_sq_asymptotic(q(0.95));
        assert!(((direct - asym) / direct).abs() < 1e-10);
    }

    #[test]
    fn theta_asymptotic_matches_direct() {
        for (kind, v) in [(ThetaKind::Theta3, 0.9), (ThetaKind::Theta2, 0.95), (ThetaKind::Theta2, 0.9), (ThetaKind::Theta3, 0.95)] {
            let direct = jacobi_theta(kind, q(v));
            let asym = theta_asymptotic(kind, q(v)).unwrap();
            assert!((direct - asym).abs() < 1e-10, "{kind:?} {v}: {direct} vs {asym}");
        }
        // Still valid, if slow, at moderate q.
        let direct = jacobi_theta(ThetaKind::Theta3, q(0.6));
        assert!((theta_asymptotic(ThetaKind::Theta3, q(0.6)).unwrap() - direct).abs() < 1e-10);
    }

    #[test]
    fn cubic_theta_values() {
        let d = cubic_theta_l(q(0.1), LRoute::Direct).unwrap();
        let b = cubic_theta_l(q(0.1), LRoute::Borwein).unwrap();
        assert!((d - 1.606_601_206_007_200_6).abs() < 1e-14);
        assert!((d - b).abs() < 1e-12);
        let q1 = (-2.0 * PI / 3f64.sqrt()).exp();
        assert!((q1 - 0.026_579_933_476_419_49).abs() < 1e-16);
        assert!((cubic_theta_l(q(q1), LRoute::Direct).unwrap() - 1.159_595_266_963_928_4).abs() < 1e-14);
        assert!((cubic_theta_l(q(1e-10), LRoute::Direct).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn margin_examples() {
        assert!((theta_inequality_margin(1.0).unwrap() - 0.159_595_266_963_928_37).abs() < 1e-14);
        assert!((theta_inequality_margin(1e-3).unwrap() - (1.0 - 1e-3)).abs() < 1e-15);
        assert!(theta_inequality_margin(0.0).is_err());
    }

    #[test]
    fn margin_routes_agree_where_both_resolve() {
        for i in 1..=60 {
            let c = 0.1 * i as f64;
            let direct = theta_inequality_margin_direct(c).unwrap();
            let dual = theta_inequality_margin_dual(c).unwrap();
            assert!((direct - dual).abs() <= 4e-15 * c + 1e-12 * dual.abs(), "c = {c}: {direct} vs {dual}");
        }
    }
}
