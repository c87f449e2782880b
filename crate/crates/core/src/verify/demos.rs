//! Moment-flow and continuum-kernel demonstrations.

use super::common::{start_report, Model, SAMPLES, VALUES};
use super::{ExperimentConfig, ExperimentReport};
use crate::error::{Error, Result};
use crate::matrix::eigenvalues;
use crate::momentflow::{
    apply_k, build_generator, enumerate, evolve, kernel_cauchy_approx, kernel_pt, reversible_measure,
    transition_kernel, Boundary, ConfigSpace, EvolveOptions, FlowGenerator, Range, SemicircleQuadrature, Window,
};
use crate::rng::SeedStream;
use rand::Rng as _;
use std::sync::Arc;

fn centred_window(n: usize, width: usize) -> Result<Window> {
    if width == 0 || width > n {
        return Err(Error::InvalidArgument(format!("window of {width} sites does not fit N = {n}")));
    }
    let a = (n - width) / 2;
    Window::new(a, a + width - 1)
}

/// Largest relative violation of `π(η)·r(η→ξ) = π(ξ)·r(ξ→η)`.
pub fn detailed_balance_error(gen: &FlowGenerator) -> f64 {
    let space = gen.space();
    let mut worst: f64 = 0.0;
    for r in 0..gen.len() {
        let pr = reversible_measure(space.get(r));
        for (c, rate) in gen.row(r) {
            let back = gen.rate(c, r);
            let (a, b) = (pr * rate, reversible_measure(space.get(c)) * back);
            worst = worst.max((a - b).abs() / a.abs().max(b.abs()));
        }
    }
    worst
}

/// Largest `|S + L − B|` over all entries and outside rates, relative to the
/// largest full rate.
pub fn decomposition_error(space: &Arc<ConfigSpace>, lambda: &[f64], ell: usize, boundary: Boundary) -> Result<f64> {
    let full = build_generator(space, lambda, Range::Full, boundary)?;
    let short = build_generator(space, lambda, Range::Short(ell), boundary)?;
    let long = build_generator(space, lambda, Range::Long(ell), boundary)?;
    let scale = full.max_exit_rate().max(f64::MIN_POSITIVE);
    let mut worst: f64 = 0.0;
    for r in 0..full.len() {
        for c in 0..full.len() {
            worst = worst.max((short.rate(r, c) + long.rate(r, c) - full.rate(r, c)).abs());
        }
        worst = worst.max((short.outside_rate(r) + long.outside_rate(r) - full.outside_rate(r)).abs());
    }
    Ok(worst / scale)
}

pub fn moment_flow_demo(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let n = cfg.n()?;
    let model = Model::new(cfg, n)?;
    let tau = cfg.get_f64("dynamics.tau")?;
    let mut rep = start_report(cfg, &[(n, model.t)], Some(tau))?;
    let master = SeedStream::new(cfg.seed());
    let lambda = eigenvalues(&model.matrix(&master.child(SAMPLES), 0)?)?;
    let boundary = match cfg.get_text("momentflow.boundary")? {
        "absorb" => Boundary::Absorb,
        "reflect" => Boundary::Reflect,
        other => return Err(Error::Unknown { kind: "boundary", name: other.to_string() }),
    };
    let ell = ((4.0 * n as f64 * tau).round() as usize).max(1);
    let particles = cfg.get_usize("momentflow.particles")?;
    let window = centred_window(n, cfg.get_usize("momentflow.window")?)?;
    let space = Arc::new(enumerate(window, particles)?);
    let gen = build_generator(&space, &lambda, Range::Short(ell), boundary)?;
    rep.scalar("range_cutoff", ell as f64, None);
    rep.scalar("configurations", space.len() as f64, None);
    rep.scalar("max_exit_rate", gen.max_exit_rate(), None);

    let balance_tol = cfg.get_f64("tolerance.balance")?;
    let scale = gen.max_exit_rate().max(f64::MIN_POSITIVE);
    let rowsum = (0..gen.len()).map(|r| gen.row_sum(r).abs()).fold(0.0, f64::max) / scale;
    rep.check_at_most("row_sum_relative", rowsum, None, balance_tol);

    let small = Arc::new(enumerate(
        centred_window(n, cfg.get_usize("momentflow.balance_window")?)?,
        cfg.get_usize("momentflow.balance_particles")?,
    )?);
    let full = build_generator(&small, &lambda, Range::Full, boundary)?;
    rep.scalar("balance_configurations", small.len() as f64, None);
    rep.check_at_most("detailed_balance_relative", detailed_balance_error(&full), None, balance_tol);
    let dec = decomposition_error(&small, &lambda, 2, boundary)?;
    rep.check_at_most("short_plus_long_minus_full", dec, None, balance_tol);

    let centre = n / 2;
    let start = space
        .index_of(&vec![centre; particles])
        .ok_or_else(|| Error::InvalidArgument("centre configuration is not in the window".into()))?;
    let opts = EvolveOptions::default();
    let row = transition_kernel(&gen, start, tau, opts)?;
    rep.check_near("kernel_total_mass", row.total(), None, 1.0, cfg.get_f64("tolerance.mass")?);
    rep.scalar("kernel_min_probability", row.probs.iter().copied().fold(f64::INFINITY, f64::min), None);
    let origin = space.get(start);
    let mut by_distance: Vec<f64> = Vec::new();
    for (c, &p) in space.configs().iter().zip(&row.probs) {
        let d = c.distance(origin);
        if by_distance.len() <= d {
            by_distance.resize(d + 1, 0.0);
        }
        by_distance[d] += p;
    }
    let tail = by_distance.iter().skip(8 * ell + 1).sum::<f64>() + row.outside.max(0.0);
    rep.check_at_most("tail_beyond_8_ell", tail, None, cfg.get_f64("tolerance.tail")?);
    rep.series(
        "kernel_by_distance",
        &["distance", "mass"],
        by_distance.iter().enumerate().map(|(d, &m)| vec![d as f64, m]).collect(),
    );

    let mut rng = master.child(VALUES).rng(0);
    let f0: Vec<f64> = (0..space.len()).map(|_| rng.gen::<f64>()).collect();
    let ev = evolve(&gen, &f0, tau, 0.5, opts)?;
    rep.scalar("integrator_steps", ev.steps as f64, None);
    rep.check_at_most("max_principle_violation", ev.max_principle_violation, None, balance_tol);
    let c = evolve(&gen, &vec![0.7; space.len()], tau, 0.7, opts)?;
    let drift = c.values.iter().map(|v| (v - 0.7).abs()).fold(0.0, f64::max);
    rep.check_at_most("constant_drift", drift, None, balance_tol);
    Ok(rep)
}

/// `U_n(u)` by the three-term recurrence.
fn cheb_u(n: usize, u: f64) -> f64 {
    let (mut a, mut b) = (1.0, 2.0 * u);
    if n == 0 {
        return a;
    }
    for _ in 1..n {
        let c = 2.0 * u * b - a;
        a = b;
        b = c;
    }
    b
}

pub const KERNEL_PAIRS: [(f64, f64); 10] = [
    (-1.8, 0.5),
    (-1.5, 0.2),
    (-1.0, 1.0),
    (-0.5, 0.1),
    (0.0, 0.3),
    (0.3, 0.5),
    (0.5, 2.0),
    (1.0, 0.25),
    (1.5, 0.7),
    (1.8, 1.5),
];

pub fn kernel_demo(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let mut rep = start_report(cfg, &[], None)?;
    rep.provenance.n.clear();
    let quad = SemicircleQuadrature::new(cfg.get_usize("kernel.nodes")?);
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for &(x, t) in &KERNEL_PAIRS {
        let mass = quad.integrate(|y| kernel_pt(x, y, t).unwrap_or(0.0));
        worst = worst.max((mass - 1.0).abs());
        rows.push(vec![x, t, mass]);
    }
    rep.check_at_most("max_mass_error", worst, None, cfg.get_f64("tolerance.mass")?);
    rep.series("kernel_mass", &["x", "t", "mass"], rows);

    let t = cfg.get_f64("kernel.small_t")?;
    let mut rows = Vec::new();
    let mut rel: f64 = 0.0;
    for i in 0..=100 {
        let y = -0.5 + 0.01 * i as f64;
        let (p, c) = (kernel_pt(0.0, y, t)?, kernel_cauchy_approx(0.0, y, t));
        rel = rel.max((p - c).abs() / c);
        rows.push(vec![y, p, c]);
    }
    rep.check_at_most("cauchy_shape_relative", rel, None, cfg.get_f64("tolerance.cauchy_rel")?);
    rep.series("kernel_profile", &["y", "p_t", "cauchy"], rows);

    rep.check_at_most("large_time_limit", (kernel_pt(0.3, -1.1, 60.0)? - 1.0).abs(), None, 1e-12);

    let fine = SemicircleQuadrature::new(400);
    let mut eig: f64 = 0.0;
    for k in 1..5 {
        let h = 1e-5;
        let f = |x: f64| cheb_u(k, x / 2.0);
        let df = |x: f64| (f(x + h) - f(x - h)) / (2.0 * h);
        let d2f = |x: f64| (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
        for &x in &[-1.3, 0.2, 0.9] {
            eig = eig.max((apply_k(f, df, d2f, x, &fine)? - 0.5 * k as f64 * f(x)).abs());
        }
    }
    rep.check_at_most("chebyshev_eigen_error", eig, None, 1e-6);
    Ok(rep)
}
