//! Projected gradient descent on (S²)ⁿ for the logarithmic and Gaussian
//! energies, plus nearest-neighbour statistics.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::hex_spacing;
use crate::sphere::{generate_configuration, squared_distance, ConfigKind, Configuration};
use crate::sum::KahanSum;

/// Rows are evaluated in parallel from this size on.
const PARALLEL_MIN_N: usize = 64;

/// Backtracking gives up once the step falls below this.
const MIN_STEP: f64 = 1e-18;

/// Which pair energy to minimize.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnergyKind {
    /// `Σ_{k≠ℓ} log(1/‖x_k − x_ℓ‖)`.
    Log,
    /// `Σ_{k≠ℓ} exp(−c·n·‖x_k − x_ℓ‖²)`.
    Gaussian { c: f64 },
}

impl EnergyKind {
    fn validate(self) -> Result<()> {
        if let EnergyKind::Gaussian { c } = self {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::invalid("c", format!("must be > 0, got {c}")));
            }
        }
        Ok(())
    }

    fn pair_energy(self, d2: f64, n: usize) -> f64 {
        match self {
            EnergyKind::Log => -0.5 * d2.ln(),
            EnergyKind::Gaussian { c } => (-c * n as f64 * d2).exp(),
        }
    }

    /// Coefficient `w` with ambient gradient `w · (x_i − x_j)` for one
    /// ordered-pair contribution to point `i`.
    fn pair_weight(self, d2: f64, n: usize) -> f64 {
        match self {
            EnergyKind::Log => -2.0 / d2,
            EnergyKind::Gaussian { c } => {
                let cn = c * n as f64;
                -4.0 * cn * (-cn * d2).exp()
            }
        }
    }
}

fn d2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

/// Row sums `Σ_{j>i}` combined in index order, so the result does not depend
/// on the thread count.
fn raw_energy(x: &[[f64; 3]], kind: EnergyKind) -> f64 {
    let n = x.len();
    let row = |i: usize| {
        let mut acc = KahanSum::new();
        for b in &x[i + 1..] {
            acc.add(kind.pair_energy(d2(&x[i], b), n));
        }
        acc.value()
    };
    let rows: Vec<f64> = if n >= PARALLEL_MIN_N {
        (0..n).into_par_iter().map(row).collect()
    } else {
        (0..n).map(row).collect()
    };
    2.0 * rows.into_iter().sum::<KahanSum>().value()
}

fn raw_tangent_gradient(x: &[[f64; 3]], kind: EnergyKind) -> Vec<[f64; 3]> {
    let n = x.len();
    let row = |i: usize| {
        let xi = x[i];
        let mut g = [0.0; 3];
        for (j, xj) in x.iter().enumerate() {
            if j == i {
                continue;
            }
            let w = kind.pair_weight(d2(&xi, xj), n);
            for k in 0..3 {
                g[k] += w * (xi[k] - xj[k]);
            }
        }
        let radial = g[0] * xi[0] + g[1] * xi[1] + g[2] * xi[2];
        [g[0] - radial * xi[0], g[1] - radial * xi[1], g[2] - radial * xi[2]]
    };
    if n >= PARALLEL_MIN_N {
        (0..n).into_par_iter().map(row).collect()
    } else {
        (0..n).map(row).collect()
    }
}

fn max_norm(g: &[[f64; 3]]) -> f64 {
    g.iter()
        .map(|v| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt())
        .fold(0.0, f64::max)
}

/// Energy of `cfg` under `kind`. Coincident points are an error.
pub fn energy(cfg: &Configuration, kind: EnergyKind) -> Result<f64> {
    kind.validate()?;
    cfg.ensure_distinct()?;
    Ok(raw_energy(&cfg.coords(), kind))
}

/// Ambient gradient at each point, projected to the tangent plane.
pub fn tangent_gradient(cfg: &Configuration, kind: EnergyKind) -> Result<Vec<[f64; 3]>> {
    kind.validate()?;
    cfg.ensure_distinct()?;
    Ok(raw_tangent_gradient(&cfg.coords(), kind))
}

/// Stopping rule and initial step of [`minimize`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Schedule {
    pub max_iter: usize,
    /// Stop once the largest tangent-gradient norm is at most this.
    pub grad_tol: f64,
    pub initial_step: f64,
}

impl Default for Schedule {
    fn default() -> Self {
        Self {
            max_iter: 5000,
            grad_tol: 1e-9,
            initial_step: 1e-3,
        }
    }
}

impl Schedule {
    fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter", "must be at least 1"));
        }
        if !(self.grad_tol >= 0.0 && self.grad_tol.is_finite()) {
            return Err(Error::invalid("grad_tol", format!("must be ≥ 0, got {}", self.grad_tol)));
        }
        if !(self.initial_step > 0.0 && self.initial_step.is_finite()) {
            return Err(Error::invalid(
                "initial_step",
                format!("must be > 0, got {}", self.initial_step),
            ));
        }
        Ok(())
    }
}

/// Result of a descent run.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub configuration: Configuration,
    /// Accepted steps taken.
    pub iteration: usize,
    pub step: f64,
    /// Largest tangent-gradient norm at the final configuration.
    pub grad_norm: f64,
    pub energy: f64,
    /// Energy after each accepted step, starting with the initial energy.
    pub history: Vec<f64>,
    /// True if the gradient tolerance was reached.
    pub converged: bool,
}

fn retract(x: &[[f64; 3]], g: &[[f64; 3]], step: f64) -> Vec<[f64; 3]> {
    x.iter()
        .zip(g)
        .map(|(p, v)| {
            let y = [p[0] - step * v[0], p[1] - step * v[1], p[2] - step * v[2]];
            let norm = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
            [y[0] / norm, y[1] / norm, y[2] / norm]
        })
        .collect()
}

/// Projected gradient descent with backtracking: halve the step until the
/// energy decreases, accept, then grow the step by 1.2.
pub fn minimize(cfg0: &Configuration, kind: EnergyKind, schedule: &Schedule) -> Result<OptimizerState> {
    schedule.validate()?;
    kind.validate()?;
    if cfg0.n() < 2 {
        return Err(Error::invalid("n", "minimization needs at least two points"));
    }
    let mut x = cfg0.coords();
    let mut e = raw_energy(&x, kind);
    if !e.is_finite() {
        return Err(Error::Numerical(format!("initial energy is {e}")));
    }
    let mut g = raw_tangent_gradient(&x, kind);
    let mut grad_norm = max_norm(&g);
    let mut step = schedule.initial_step;
    let mut history = vec![e];
    let mut iteration = 0;
    let mut converged = grad_norm <= schedule.grad_tol;
    while !converged && iteration < schedule.max_iter {
        let mut accepted = None;
        while step >= MIN_STEP {
            let trial = retract(&x, &g, step);
            let et = raw_energy(&trial, kind);
            if et.is_finite() && et < e {
                accepted = Some((trial, et));
                break;
            }
            step *= 0.5;
        }
        let Some((trial, et)) = accepted else {
            log::debug!("line search stalled at iteration {iteration}, energy {e}");
            break;
        };
        x = trial;
        e = et;
        history.push(e);
        iteration += 1;
        step *= 1.2;
        g = raw_tangent_gradient(&x, kind);
        grad_norm = max_norm(&g);
        if !grad_norm.is_finite() {
            return Err(Error::Numerical(format!(
                "non-finite gradient at iteration {iteration}; last energy {e}"
            )));
        }
        converged = grad_norm <= schedule.grad_tol;
    }
    Ok(OptimizerState {
        configuration: Configuration::from_coords(&x)?,
        iteration,
        step,
        grad_norm,
        energy: e,
        history,
        converged,
    })
}

/// Seed of the `k`-th random start.
pub fn start_seed(seed: u64, k: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(k as u64)
}

/// Runs [`minimize`] from `starts` initial configurations (a Fibonacci
/// spiral, then random ones) and keeps the lowest energy. Ties go to the
/// earlier start.
pub fn multi_start_minimize(
    n: usize,
    kind: EnergyKind,
    schedule: &Schedule,
    starts: usize,
    seed: u64,
    include_fibonacci: bool,
) -> Result<OptimizerState> {
    if starts == 0 {
        return Err(Error::invalid("starts", "must be at least 1"));
    }
    let runs = (0..starts)
        .into_par_iter()
        .map(|k| {
            let cfg = if include_fibonacci && k == 0 {
                generate_configuration(ConfigKind::Fibonacci, n, 0)?
            } else {
                generate_configuration(ConfigKind::RandomUniform, n, start_seed(seed, k))?
            };
            minimize(&cfg, kind, schedule)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best: Option<OptimizerState> = None;
    for run in runs {
        if best.as_ref().is_none_or(|b| run.energy < b.energy) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one start"))
}

/// Nearest-neighbour chord statistics against the hexagonal spacing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HexStats {
    pub mean_nn: f64,
    /// Standard deviation over mean.
    pub cv_nn: f64,
    pub lambda_ref: f64,
}

pub fn nearest_neighbor_stats(cfg: &Configuration) -> Result<HexStats> {
    let n = cfg.n();
    if n < 2 {
        return Err(Error::invalid("n", "nearest neighbours need at least two points"));
    }
    let pts = cfg.points();
    let nn: Vec<f64> = pts
        .iter()
        .enumerate()
        .map(|(i, p)| {
            pts.iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, q)| squared_distance(p, q))
                .fold(f64::INFINITY, f64::min)
                .sqrt()
        })
        .collect();
    let mean = nn.iter().sum::<f64>() / n as f64;
    let var = nn.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / n as f64;
    Ok(HexStats {
        mean_nn: mean,
        cv_nn: var.sqrt() / mean,
        lambda_ref: hex_spacing(n)?,
    })
}

/// One row of [`empirical_clog`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClogEstimate {
    pub n: usize,
    pub energy: f64,
    /// `(E − (1/2 − log 2)n² + n log n / 2)/n`.
    pub estimate: f64,
    pub grad_norm: f64,
    pub iterations: usize,
}

/// `(E − (1/2 − log 2)n² + n log n / 2)/n`.
pub fn clog_estimate(n: usize, energy: f64) -> f64 {
    let nf = n as f64;
    (energy - (0.5 - 2f64.ln()) * nf * nf + nf * nf.ln() / 2.0) / nf
}

/// Multi-start log-energy minimization for each `n` and the resulting
/// estimate of the linear coefficient.
pub fn empirical_clog(
    n_list: &[usize],
    schedule: &Schedule,
    starts: usize,
    seed: u64,
) -> Result<Vec<ClogEstimate>> {
    n_list
        .iter()
        .map(|&n| {
            if n < 12 {
                return Err(Error::invalid("n", format!("each n must be ≥ 12, got {n}")));
            }
            let best = multi_start_minimize(n, EnergyKind::Log, schedule, starts, seed, true)?;
            Ok(ClogEstimate {
                n,
                energy: best.energy,
                estimate: clog_estimate(n, best.energy),
                grad_norm: best.grad_norm,
                iterations: best.iteration,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stationary_configurations() {
        let pair = generate_configuration(ConfigKind::Antipodal, 2, 0).unwrap();
        let tet = generate_configuration(ConfigKind::Tetrahedron, 4, 0).unwrap();
        for kind in [EnergyKind::Log, EnergyKind::Gaussian { c: 0.7 }] {
            assert!(max_norm(&tangent_gradient(&pair, kind).unwrap()) < 1e-14);
            assert!(max_norm(&tangent_gradient(&tet, kind).unwrap()) <= 1e-12);
        }
    }

    #[test]
    fn energy_matches_energy_module() {
        let cfg = generate_configuration(ConfigKind::RandomUniform, 20, 3).unwrap();
        let a = energy(&cfg, EnergyKind::Log).unwrap();
        let b = crate::energy::log_energy(&cfg).unwrap();
        assert!((a - b).abs() < 1e-12);
        let a = energy(&cfg, EnergyKind::Gaussian { c: 2.0 }).unwrap();
        let b = crate::energy::gaussian_energy(&cfg, 2.0).unwrap();
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn two_points_go_antipodal() {
        let cfg = generate_configuration(ConfigKind::RandomUniform, 2, 9).unwrap();
        let s = minimize(&cfg, EnergyKind::Log, &Schedule::default()).unwrap();
        assert!((s.energy + 2.0 * 2f64.ln()).abs() < 1e-8, "{}", s.energy);
    }

    #[test]
    fn history_is_non_increasing() {
        let cfg = generate_configuration(ConfigKind::RandomUniform, 30, 1).unwrap();
        let schedule = Schedule { max_iter: 300, ..Schedule::default() };
        let s = minimize(&cfg, EnergyKind::Gaussian { c: 1.0 }, &schedule).unwrap();
        assert!(s.history.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(s.history.len(), s.iteration + 1);
    }

    #[test]
    fn rejects_bad_inputs() {
        let cfg = generate_configuration(ConfigKind::RandomUniform, 5, 1).unwrap();
        let bad = Schedule { initial_step: 0.0, ..Schedule::default() };
        assert!(minimize(&cfg, EnergyKind::Log, &bad).is_err());
        assert!(minimize(&cfg, EnergyKind::Gaussian { c: -1.0 }, &Schedule::default()).is_err());
        let dup = Configuration::from_coords(&[[0.0, 0.0, 1.0], [0.0, 0.0, 1.0]]).unwrap();
        assert!(matches!(
            minimize(&dup, EnergyKind::Log, &Schedule::default()),
            Err(Error::Numerical(_))
        ));
        assert!(empirical_clog(&[11], &Schedule::default(), 1, 0).is_err());
    }

    #[test]
    fn antipodal_stats() {
        let pair = generate_configuration(ConfigKind::Antipodal, 2, 0).unwrap();
        let s = nearest_neighbor_stats(&pair).unwrap();
        assert_eq!(s.mean_nn, 2.0);
        assert_eq!(s.cv_nn, 0.0);
    }

    #[test]
    fn clog_formula() {
        let n = 2usize;
        let e = -2.0 * 2f64.ln();
        let expected = (e - (0.5 - 2f64.ln()) * 4.0 + 2f64.ln()) / 2.0;
        assert!((clog_estimate(n, e) - expected).abs() < 1e-15);
    }
}
