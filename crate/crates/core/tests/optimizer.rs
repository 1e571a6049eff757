use logenergy::optimizer::{
    energy, minimize, multi_start_minimize, nearest_neighbor_stats, tangent_gradient, EnergyKind,
    Schedule,
};
use logenergy::sphere::{generate_configuration, ConfigKind, Configuration};

/// Directional derivative along the tangent vector `v` at point `i`, by
/// central differences through the retraction `x ↦ (x + hv)/‖x + hv‖`.
fn directional_fd(cfg: &Configuration, kind: EnergyKind, i: usize, v: [f64; 3]) -> f64 {
    let h = 1e-6;
    let shifted = |s: f64| {
        let mut coords = cfg.coords();
        let p = coords[i];
        let q = [p[0] + s * v[0], p[1] + s * v[1], p[2] + s * v[2]];
        let norm = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2]).sqrt();
        coords[i] = [q[0] / norm, q[1] / norm, q[2] / norm];
        energy(&Configuration::from_coords(&coords).unwrap(), kind).unwrap()
    };
    (shifted(h) - shifted(-h)) / (2.0 * h)
}

fn tangent_basis(p: [f64; 3]) -> [[f64; 3]; 2] {
    let helper = if p[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let dot = helper[0] * p[0] + helper[1] * p[1] + helper[2] * p[2];
    let mut e1 = [helper[0] - dot * p[0], helper[1] - dot * p[1], helper[2] - dot * p[2]];
    let n1 = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
    e1.iter_mut().for_each(|x| *x /= n1);
    let e2 = [
        p[1] * e1[2] - p[2] * e1[1],
        p[2] * e1[0] - p[0] * e1[2],
        p[0] * e1[1] - p[1] * e1[0],
    ];
    [e1, e2]
}

#[test]
fn gradient_matches_finite_differences() {
    for n in [5usize, 10] {
        for kind in [EnergyKind::Log, EnergyKind::Gaussian { c: 0.8 }] {
            let cfg = generate_configuration(ConfigKind::RandomUniform, n, 31 + n as u64).unwrap();
            let g = tangent_gradient(&cfg, kind).unwrap();
            let gmax = g.iter().map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt()).fold(0.0, f64::max);
            for (i, p) in cfg.points().iter().enumerate() {
                let gi = g[i];
                // Tangent: no radial component.
                let radial = gi[0] * p.x() + gi[1] * p.y() + gi[2] * p.z();
                assert!(radial.abs() < 1e-12 * gmax.max(1.0));
                for e in tangent_basis(p.coords()) {
                    let analytic = gi[0] * e[0] + gi[1] * e[1] + gi[2] * e[2];
                    let fd = directional_fd(&cfg, kind, i, e);
                    let scale = analytic.abs().max(1e-3 * gmax);
                    assert!(
                        (analytic - fd).abs() <= 1e-6 * scale,
                        "n={n} {kind:?} i={i}: {analytic} vs {fd}"
                    );
                }
            }
        }
    }
}

#[test]
fn tetrahedron_from_multi_start() {
    let best = multi_start_minimize(4, EnergyKind::Log, &Schedule::default(), 20, 5, false).unwrap();
    assert!((best.energy + 5.884_975_518_070_357).abs() < 1e-6, "{}", best.energy);
}

#[test]
fn beats_fibonacci_at_one_hundred() {
    let fib = generate_configuration(ConfigKind::Fibonacci, 100, 0).unwrap();
    let e0 = energy(&fib, EnergyKind::Log).unwrap();
    let s = minimize(&fib, EnergyKind::Log, &Schedule { max_iter: 3000, ..Schedule::default() }).unwrap();
    assert!(s.energy < e0);
    assert!(s.history.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn reprojection_keeps_unit_norms() {
    let cfg = generate_configuration(ConfigKind::RandomUniform, 25, 2).unwrap();
    for kind in [EnergyKind::Log, EnergyKind::Gaussian { c: 2.0 }] {
        for max_iter in 1..=25 {
            let s = minimize(&cfg, kind, &Schedule { max_iter, ..Schedule::default() }).unwrap();
            for p in s.configuration.points() {
                assert!((p.norm() - 1.0).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn minimized_configuration_is_near_hexagonal() {
    let n = 400;
    let random = generate_configuration(ConfigKind::RandomUniform, n, 17).unwrap();
    let start = generate_configuration(ConfigKind::Fibonacci, n, 0).unwrap();
    let s = minimize(&start, EnergyKind::Log, &Schedule { max_iter: 2000, ..Schedule::default() }).unwrap();
    let stats = nearest_neighbor_stats(&s.configuration).unwrap();
    assert!(stats.mean_nn > 0.0 && stats.cv_nn >= 0.0);
    assert!(((stats.mean_nn - stats.lambda_ref) / stats.lambda_ref).abs() < 0.15, "{stats:?}");
    assert!(stats.cv_nn < nearest_neighbor_stats(&random).unwrap().cv_nn);
}

#[test]
fn gaussian_minimization_spreads_points() {
    let cfg = generate_configuration(ConfigKind::RandomUniform, 50, 12).unwrap();
    let kind = EnergyKind::Gaussian { c: 1.0 };
    let e0 = energy(&cfg, kind).unwrap();
    let s = minimize(&cfg, kind, &Schedule { max_iter: 1000, ..Schedule::default() }).unwrap();
    assert!(s.energy < e0);
    let before = nearest_neighbor_stats(&cfg).unwrap();
    let after = nearest_neighbor_stats(&s.configuration).unwrap();
    assert!(after.mean_nn > before.mean_nn);
}

#[test]
fn multi_start_is_reproducible() {
    let schedule = Schedule { max_iter: 200, ..Schedule::default() };
    let a = multi_start_minimize(20, EnergyKind::Log, &schedule, 4, 9, true).unwrap();
    let b = multi_start_minimize(20, EnergyKind::Log, &schedule, 4, 9, true).unwrap();
    assert_eq!(a.energy.to_bits(), b.energy.to_bits());
    assert_eq!(a.configuration, b.configuration);
}
