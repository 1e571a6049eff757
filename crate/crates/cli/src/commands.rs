use logenergy::energy::{
    self, corollary1_lower_bound, finite_n_lower_bound, hex_improvement_estimate,
    hex_improvement_quadrature, improved_lower_bound, lower_bound_pipeline, proposition_fraction,
    proposition_threshold, renormalized_functional_with, uninformed_improvement, uninformed_scan,
    MathConstants, Reduction,
};
use logenergy::lattice::{
    cbhs_closed_form, cbhs_from_integral, gamma_lattice_sum, three_term_expansion,
};
use logenergy::optimizer::{
    self, clog_estimate, minimize, multi_start_minimize, nearest_neighbor_stats, EnergyKind,
    OptimizerState, Schedule,
};
use logenergy::special::{
    cubic_theta_l, jacobi_theta, q_pochhammer_sq, q_pochhammer_sq_asymptotic, theta_asymptotic,
    theta_inequality_margin, LRoute, QValue, ThetaKind, L_DIRECT_TOL,
};
use logenergy::spectral::{self, KernelKind, KernelParams, GREEN_QUADRATURE_TOL};
use logenergy::sphere::{generate_configuration, read_configuration, write_configuration, ConfigKind};
use logenergy::{Configuration, Error, Result};
use serde_json::{json, Value};

use crate::output::{Output, Table};
use crate::{Command, EnergyArg, KindArg, PointsSource};

/// Bisection depth used by the c_BHS integral route.
const CBHS_TOL: f64 = 1e-15;

pub fn run(command: &Command, deterministic: bool) -> Result<Output> {
    let reduction = if deterministic { Reduction::Sequential } else { Reduction::Parallel };
    match command {
        Command::Energy { points, t, tol, gaussian_c } => energy_cmd(points, *t, *tol, *gaussian_c, reduction),
        Command::VerifyIdentity { n, t, trials, seed, tol, threshold } => {
            verify_identity(*n, *t, *trials, *seed, *tol, *threshold, reduction)
        }
        Command::Constants => constants(),
        Command::Bound { a, n, s, s_min, s_max, steps, tol } => bound(*a, *n, *s, *s_min, *s_max, *steps, *tol),
        Command::Minimize {
            n,
            energy,
            c,
            seed,
            starts,
            max_iter,
            grad_tol,
            initial_step,
            input,
            points_out,
            clog,
        } => {
            let schedule = Schedule {
                max_iter: *max_iter,
                grad_tol: *grad_tol,
                initial_step: *initial_step,
            };
            let kind = match energy {
                EnergyArg::Log => EnergyKind::Log,
                EnergyArg::Gaussian => EnergyKind::Gaussian { c: *c },
            };
            minimize_cmd(n, kind, *seed, *starts, &schedule, input.as_deref(), points_out.as_deref(), *clog)
        }
        Command::Lattice { eps, tol, cbhs_c } => lattice(eps, *tol, cbhs_c),
        Command::Theta { q, c_min, c_max, c_step } => theta(q, *c_min, *c_max, *c_step),
        Command::MetaRatio { points, c, tol, minimize_iter } => meta_ratio(points, c, *tol, *minimize_iter),
    }
}

fn invalid(name: &'static str, reason: String) -> Error {
    Error::InvalidParameter { name, reason }
}

fn load_points(src: &PointsSource) -> Result<(Configuration, Value)> {
    if let Some(path) = &src.input {
        let cfg = read_configuration(path)?;
        let meta = json!({ "input": path.display().to_string(), "n": cfg.n() });
        return Ok((cfg, meta));
    }
    let kind = match src.kind {
        KindArg::Random => ConfigKind::RandomUniform,
        KindArg::Fibonacci => ConfigKind::Fibonacci,
        KindArg::Tetrahedron => ConfigKind::Tetrahedron,
        KindArg::Antipodal => ConfigKind::Antipodal,
    };
    let n = match kind {
        ConfigKind::Tetrahedron => 4,
        ConfigKind::Antipodal => 2,
        _ => src.n,
    };
    let cfg = generate_configuration(kind, n, src.seed)?;
    let meta = json!({ "generator": format!("{kind:?}"), "n": n, "seed": src.seed });
    Ok((cfg, meta))
}

fn kernel_meta(params: &KernelParams, reduction: Reduction) -> Value {
    let t = params.t();
    let heat = params.degree(KernelKind::Heat);
    let sob = params.degree(KernelKind::Sobolev);
    json!({
        "t": t,
        "tol": params.tol(),
        "heat_degree": heat,
        "sobolev_degree": sob,
        "integrated_degree": params.degree(KernelKind::Integrated),
        "heat_tail_bound": spectral::tail_bound(KernelKind::Heat, heat, t),
        "sobolev_tail_bound": spectral::tail_bound(KernelKind::Sobolev, sob, t),
        "green_quadrature_tol": GREEN_QUADRATURE_TOL,
        "reduction": format!("{reduction:?}").to_lowercase(),
    })
}

fn energy_cmd(src: &PointsSource, t: Option<f64>, tol: f64, gaussian_c: Option<f64>, reduction: Reduction) -> Result<Output> {
    let (cfg, source) = load_points(src)?;
    let t = t.unwrap_or(1.0 / cfg.n() as f64);
    let params = KernelParams::new(t, tol)?;
    let b = renormalized_functional_with(&cfg, &params, reduction)?;
    let mut out = Output::new("energy");
    out.insert("source", source);
    out.insert("n", cfg.n());
    out.insert("log_energy", b.log_energy);
    out.insert("interaction", b.interaction);
    out.insert("sobolev", b.sobolev);
    out.insert("x_empirical", b.x_empirical);
    out.insert("x_closed", b.x_closed);
    out.insert("residual", b.residual);
    out.insert("error_budget", b.error_budget);
    if let Some(c) = gaussian_c {
        out.insert("gaussian_c", c);
        out.insert("gaussian_energy", energy::gaussian_energy(&cfg, c)?);
    }
    out.insert("metadata", kernel_meta(&params, reduction));
    Ok(out)
}

fn verify_identity(n: usize, t: f64, trials: usize, seed: u64, tol: f64, threshold: f64, reduction: Reduction) -> Result<Output> {
    if trials == 0 {
        return Err(invalid("trials", "must be at least 1".into()));
    }
    let params = KernelParams::new(t, tol)?;
    let mut table = Table::new(&["trial", "seed", "log_energy", "interaction", "sobolev", "x_empirical", "residual"]);
    let mut rows = Vec::new();
    let mut xs = Vec::new();
    let mut max_residual: f64 = 0.0;
    let mut x_closed = 0.0;
    for k in 0..trials {
        let s = optimizer::start_seed(seed, k);
        let cfg = generate_configuration(ConfigKind::RandomUniform, n, s)?;
        let b = renormalized_functional_with(&cfg, &params, reduction)?;
        x_closed = b.x_closed;
        xs.push(b.x_empirical);
        max_residual = max_residual.max(b.residual.abs());
        table.push(vec![
            k.into(),
            s.into(),
            b.log_energy.into(),
            b.interaction.into(),
            b.sobolev.into(),
            b.x_empirical.into(),
            b.residual.into(),
        ]);
        rows.push(json!({
            "seed": s,
            "log_energy": b.log_energy,
            "interaction": b.interaction,
            "sobolev": b.sobolev,
            "x_empirical": b.x_empirical,
            "residual": b.residual,
        }));
    }
    let spread = xs.iter().cloned().fold(f64::MIN, f64::max) - xs.iter().cloned().fold(f64::MAX, f64::min);
    let mut out = Output::new("verify-identity");
    out.insert("n", n);
    out.insert("trials", Value::Array(rows));
    out.insert("x_closed", x_closed);
    out.insert("max_spread", spread);
    out.insert("max_residual", max_residual);
    out.insert("threshold", threshold);
    out.insert("pass", spread <= threshold && max_residual <= threshold);
    out.insert("metadata", kernel_meta(&params, reduction));
    out.table = Some(table);
    Ok(out)
}

fn constants() -> Result<Output> {
    let k = MathConstants::new();
    let mut out = Output::new("constants");
    out.insert("euler_gamma", k.euler_gamma);
    out.insert("log2", k.log2);
    out.insert("pi", k.pi);
    out.insert("gamma_one_third", k.gamma_one_third);
    out.insert("leading", k.leading);
    out.insert("c2", k.c2);
    out.insert("corollary1_bound", k.corollary1_bound);
    out.insert("cbhs", k.cbhs);
    out.insert("hex_improvement", hex_improvement_estimate());
    out.insert("improved_bound", improved_lower_bound());
    out.insert(
        "metadata",
        json!({
            "method": "closed forms in f64",
            "gamma_function": "Lanczos g = 7, 9 terms",
            "incomplete_gamma": "series for z <= 1, continued fraction above",
        }),
    );
    Ok(out)
}

fn bound(a: f64, n: Option<usize>, s: f64, s_min: f64, s_max: f64, steps: usize, tol: f64) -> Result<Output> {
    let pipeline = lower_bound_pipeline(a)?;
    let (s_best, v_best) = uninformed_scan(s_min, s_max, steps)?;
    let mut out = Output::new("bound");
    out.insert("pipeline", serde_json::to_value(pipeline)?);
    out.insert("corollary1", corollary1_lower_bound().value);
    out.insert("hex_improvement", hex_improvement_estimate());
    out.insert("hex_improvement_quadrature", hex_improvement_quadrature()?);
    out.insert("improved_bound", improved_lower_bound());
    out.insert(
        "density_bound",
        json!({
            "s": s,
            "threshold": proposition_threshold(),
            "fraction": proposition_fraction(s)?,
            "improvement": uninformed_improvement(s)?,
            "scan_argmax": s_best,
            "scan_max": v_best,
        }),
    );
    if let Some(n) = n {
        out.insert("finite_n", serde_json::to_value(finite_n_lower_bound(n, a, tol)?)?);
    }
    out.insert(
        "metadata",
        json!({ "scan": { "s_min": s_min, "s_max": s_max, "steps": steps }, "diagonal_tol": tol, "quadrature_tol": 1e-16 }),
    );
    let mut table = Table::new(&["s", "fraction", "improvement"]);
    for i in 0..steps {
        let si = s_min + (s_max - s_min) * i as f64 / (steps.max(2) - 1) as f64;
        table.push(vec![si.into(), proposition_fraction(si)?.into(), uninformed_improvement(si)?.into()]);
    }
    out.table = Some(table);
    Ok(out)
}

fn state_json(s: &OptimizerState) -> Value {
    json!({
        "energy": s.energy,
        "iterations": s.iteration,
        "grad_norm": s.grad_norm,
        "final_step": s.step,
        "converged": s.converged,
    })
}

#[allow(clippy::too_many_arguments)]
fn minimize_cmd(
    ns: &[usize],
    kind: EnergyKind,
    seed: u64,
    starts: usize,
    schedule: &Schedule,
    input: Option<&std::path::Path>,
    points_out: Option<&std::path::Path>,
    clog: bool,
) -> Result<Output> {
    let mut out = Output::new("minimize");
    let meta = json!({
        "schedule": serde_json::to_value(schedule)?,
        "energy": serde_json::to_value(kind)?,
        "starts": starts,
        "seed": seed,
    });
    if clog {
        if !matches!(kind, EnergyKind::Log) {
            return Err(invalid("energy", "--clog needs the log energy".into()));
        }
        let rows = optimizer::empirical_clog(ns, schedule, starts, seed)?;
        let mut table = Table::new(&["n", "energy", "estimate", "grad_norm", "iterations"]);
        for r in &rows {
            table.push(vec![r.n.into(), r.energy.into(), r.estimate.into(), r.grad_norm.into(), r.iterations.into()]);
        }
        out.insert("clog", serde_json::to_value(&rows)?);
        out.insert("corollary1_bound", corollary1_lower_bound().value);
        out.insert("cbhs", cbhs_closed_form());
        out.insert("metadata", meta);
        out.table = Some(table);
        return Ok(out);
    }
    let best = match input {
        Some(path) => minimize(&read_configuration(path)?, kind, schedule)?,
        None => {
            if ns.len() != 1 {
                return Err(invalid("n", "give one n, or use --clog".into()));
            }
            multi_start_minimize(ns[0], kind, schedule, starts, seed, true)?
        }
    };
    let n = best.configuration.n();
    out.insert("n", n);
    out.insert("result", state_json(&best));
    out.insert("hex_stats", serde_json::to_value(nearest_neighbor_stats(&best.configuration)?)?);
    if matches!(kind, EnergyKind::Log) {
        out.insert("clog_estimate", clog_estimate(n, best.energy));
    }
    if let Some(path) = points_out {
        write_configuration(&best.configuration, path)?;
        out.insert("points_out", path.display().to_string());
    }
    out.insert("metadata", meta);
    let mut table = Table::new(&["iteration", "energy"]);
    for (i, e) in best.history.iter().enumerate() {
        table.push(vec![i.into(), (*e).into()]);
    }
    out.table = Some(table);
    Ok(out)
}

fn lattice(eps: &[f64], tol: f64, cbhs_c: &[f64]) -> Result<Output> {
    let mut rows = Vec::new();
    let mut table = Table::new(&["eps", "value", "three_term", "residual", "cutoff_norm", "tail_bound"]);
    for &e in eps {
        let r = gamma_lattice_sum(e, tol)?;
        let pred = three_term_expansion(e)?;
        table.push(vec![e.into(), r.value.into(), pred.into(), (r.value - pred).into(), r.cutoff_norm.into(), r.tail_bound.into()]);
        rows.push(json!({
            "eps": e,
            "value": r.value,
            "three_term": pred,
            "residual": r.value - pred,
            "cutoff_norm": r.cutoff_norm,
            "tail_bound": r.tail_bound,
        }));
    }
    let mut out = Output::new("lattice");
    out.insert("sums", Value::Array(rows));
    if !cbhs_c.is_empty() {
        let k = cbhs_closed_form();
        let routes = cbhs_c
            .iter()
            .map(|&c| {
                let v = cbhs_from_integral(c, CBHS_TOL)?;
                Ok(json!({ "c": c, "value": v, "minus_closed_form": v - k }))
            })
            .collect::<Result<Vec<_>>>()?;
        out.insert("cbhs_closed_form", k);
        out.insert("cbhs_integral", Value::Array(routes));
    }
    out.insert("metadata", json!({ "tol": tol, "cbhs_tol": CBHS_TOL }));
    out.table = Some(table);
    Ok(out)
}

fn theta(qs: &[f64], c_min: f64, c_max: f64, c_step: f64) -> Result<Output> {
    if !(c_min > 0.0 && c_max >= c_min && c_step > 0.0) {
        return Err(invalid("c_min", format!("bad grid [{c_min}, {c_max}] step {c_step}")));
    }
    let mut rows = Vec::new();
    let mut table = Table::new(&["q", "theta2", "theta3", "l_direct", "l_borwein", "borwein_rel", "theta2_asym", "theta3_asym"]);
    for &q in qs {
        let qv = QValue::new(q)?;
        let t2 = jacobi_theta(ThetaKind::Theta2, qv);
        let t3 = jacobi_theta(ThetaKind::Theta3, qv);
        let ld = cubic_theta_l(qv, LRoute::Direct)?;
        let lb = cubic_theta_l(qv, LRoute::Borwein)?;
        // The asymptotic series are only meant for q near 1.
        let asym = |k| if q >= 0.5 { theta_asymptotic(k, qv).ok() } else { None };
        let (a2, a3) = (asym(ThetaKind::Theta2), asym(ThetaKind::Theta3));
        let rel = (ld - lb).abs() / ld;
        table.push(vec![q.into(), t2.into(), t3.into(), ld.into(), lb.into(), rel.into(), a2.into(), a3.into()]);
        rows.push(json!({
            "q": q,
            "theta2": t2,
            "theta3": t3,
            "qpochhammer_sq": q_pochhammer_sq(qv),
            "qpochhammer_sq_asym": if q >= 0.5 { Some(q_pochhammer_sq_asymptotic(qv)) } else { None },
            "theta2_asym": a2,
            "theta3_asym": a3,
            "l_direct": ld,
            "l_borwein": lb,
            "borwein_rel": rel,
        }));
    }
    let steps = ((c_max - c_min) / c_step + 1e-9).floor() as usize;
    let mut min_margin = f64::INFINITY;
    let mut argmin = c_min;
    for k in 0..=steps {
        let c = c_min + c_step * k as f64;
        let m = theta_inequality_margin(c)?;
        if m < min_margin {
            min_margin = m;
            argmin = c;
        }
    }
    let mut out = Output::new("theta");
    out.insert("values", Value::Array(rows));
    out.insert(
        "margin",
        json!({ "grid_points": steps + 1, "min": min_margin, "argmin": argmin, "positive": min_margin > 0.0 }),
    );
    out.insert(
        "metadata",
        json!({ "l_direct_tol": L_DIRECT_TOL, "c_grid": { "min": c_min, "max": c_max, "step": c_step } }),
    );
    out.table = Some(table);
    Ok(out)
}

fn meta_ratio(src: &PointsSource, cs: &[f64], tol: f64, minimize_iter: usize) -> Result<Output> {
    let (mut cfg, source) = load_points(src)?;
    if minimize_iter > 0 {
        let schedule = Schedule { max_iter: minimize_iter, ..Schedule::default() };
        cfg = minimize(&cfg, EnergyKind::Log, &schedule)?.configuration;
    }
    let n = cfg.n();
    let mut rows = Vec::new();
    let mut table = Table::new(&["c", "t", "ratio"]);
    for &c in cs {
        let r = energy::meta_ratio_diagnostic(&cfg, c, tol)?;
        table.push(vec![c.into(), (c / n as f64).into(), r.into()]);
        rows.push(json!({ "c": c, "t": c / n as f64, "ratio": r }));
    }
    let mut out = Output::new("meta-ratio");
    out.insert("source", source);
    out.insert("n", n);
    out.insert("ratios", Value::Array(rows));
    out.insert("metadata", json!({ "tol": tol, "minimize_iter": minimize_iter, "green_quadrature_tol": GREEN_QUADRATURE_TOL }));
    out.table = Some(table);
    Ok(out)
}
