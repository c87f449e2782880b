//! Resolvent-level experiments: local laws, OU continuity and advection.

use super::common::{
    bulk_indices, direction, lin_grid, log_grid, par_map, start_report, Model, NOISE, SAMPLES,
};
use super::{ExperimentConfig, ExperimentReport};
use crate::dynamics::{characteristic, ou_flow, ou_semicircle, resolvent_flow_trace};
use crate::ensembles::{build_potential, PotentialKind};
use crate::error::{Error, Result};
use crate::freeconv::ComplexPoint;
use crate::matrix::{diagonalize, eigenvalues, SpectralSample, SymmetricMatrix};
use crate::rng::SeedStream;
use crate::stats::{linear_fit, quantile, Estimate};
use num_complex::Complex64;

/// `⟨q, (H − z)^{−1} q⟩` from a spectral decomposition.
fn quadratic_form(sample: &SpectralSample, q: &[f64], z: Complex64) -> Complex64 {
    (0..sample.n()).map(|k| sample.overlap(q, k).norm_sqr() / (sample.eigenvalues[k] - z)).sum()
}

const RESIDUALS: [&str; 4] = ["averaged", "entrywise", "offdiagonal", "isotropic"];

pub fn local_laws(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let n = cfg.n()?;
    let model = Model::new(cfg, n)?;
    let (t, fc) = (model.t, &model.fc);
    let nf = n as f64;
    let mut rep = start_report(cfg, &[(n, t)], None)?;
    let q = direction(cfg, n)?;
    let sites = bulk_indices(cfg, n)?;
    if sites.last().is_some_and(|&i| i + 1 >= n) {
        return Err(Error::InvalidArgument("entrywise block needs a right neighbour".into()));
    }
    let eta_lo = cfg.get_auto_f64("eta.min")?.unwrap_or(3.0 / nf);
    let eta_hi = cfg.get_auto_f64("eta.max")?.unwrap_or(t / 3.0);
    let etas = log_grid(eta_lo, eta_hi, cfg.get_usize("eta.points")?.max(1));
    let hw = cfg.get_f64("energy.half_width")?;
    let centre = fc.gamma(n / 2)?;
    let energies = lin_grid(centre - hw, centre + hw, cfg.get_usize("energy.points")?.max(1));

    // Deterministic targets per grid point: (z, m_t, g on the block, Σ q²g).
    let mut targets = Vec::new();
    for &eta in &etas {
        let mut row = Vec::new();
        for &e in &energies {
            let p = ComplexPoint::new(e, eta)?;
            let m = fc.solve_m(p)?;
            let g = fc.g_values(p)?;
            let qg: Complex64 = q.iter().zip(&g).map(|(a, b)| a * a * b).sum();
            let gb: Vec<(Complex64, Complex64)> = sites.iter().map(|&i| (g[i], g[i + 1])).collect();
            row.push((p.z(), m, gb, qg));
        }
        targets.push(row);
    }

    let kappa = cfg.get_f64("bulk.kappa")?;
    let bulk = ((nf * (1.0 - kappa) / 2.0).ceil() as usize)..((nf * (1.0 + kappa) / 2.0).floor() as usize);
    let seeds = SeedStream::new(cfg.seed()).child(SAMPLES);
    let per = par_map(cfg.workers, cfg.get_usize("sampling.samples")?, |s| {
        let sample = diagonalize(&model.matrix(&seeds, s)?)?;
        let c: Vec<f64> = (0..n).map(|k| sample.overlap(&q, k).norm_sqr()).collect();
        let rows: Vec<(Vec<Complex64>, Vec<Complex64>)> = sites
            .iter()
            .map(|&i| ((0..n).map(|k| sample.entry(k, i)).collect(), (0..n).map(|k| sample.entry(k, i + 1)).collect()))
            .collect();
        let mut out = vec![vec![0.0; etas.len()]; 4];
        let mut r = vec![Complex64::new(0.0, 0.0); n];
        for (j, row) in targets.iter().enumerate() {
            let scale = 1.0 / row.len() as f64;
            for (z, m, gb, qg) in row {
                r.iter_mut().zip(&sample.eigenvalues).for_each(|(x, &l)| *x = (l - z).inv());
                let s_n = r.iter().sum::<Complex64>() / nf;
                out[0][j] += (s_n - m).norm_sqr() * scale;
                let iso: Complex64 = c.iter().zip(&r).map(|(a, b)| a * b).sum();
                out[3][j] += ((iso - qg).norm() / qg.im).powi(2) * scale;
                let (mut ent, mut off) = (0.0, 0.0);
                for ((ui, uj), (gi, gj)) in rows.iter().zip(gb) {
                    let (mut gii, mut gij) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
                    for k in 0..n {
                        gii += ui[k].norm_sqr() * r[k];
                        gij += ui[k] * uj[k].conj() * r[k];
                    }
                    ent += ((gii - gi).norm() / (t * gi.norm_sqr())).powi(2);
                    off += (gij.norm() / gi.norm().min(gj.norm())).powi(2);
                }
                out[1][j] += ent / rows.len() as f64 * scale;
                out[2][j] += off / rows.len() as f64 * scale;
            }
        }
        let moment = bulk.clone().map(|k| nf * c[k]).fold(0.0, f64::max);
        Ok((out, moment))
    })?;

    rep.scalar("t", t, None);
    let x: Vec<f64> = etas.iter().map(|e| (1.0 / (nf * e)).ln()).collect();
    let mut slopes = [0.0; 4];
    for (i, name) in RESIDUALS.iter().enumerate() {
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for (j, &eta) in etas.iter().enumerate() {
            let e = Estimate::batch_means(&per.iter().map(|p| p.0[i][j]).collect::<Vec<_>>())?;
            let rms = e.mean.sqrt();
            rows.push(vec![eta, nf * eta, rms, e.se / (2.0 * rms)]);
            y.push(rms.ln());
        }
        rep.series(*name, &["eta", "n_eta", "rms_residual", "se"], rows);
        if etas.len() >= 2 {
            let (_, b, se) = linear_fit(&x, &y);
            slopes[i] = b;
            rep.scalar(format!("{name}_slope_se"), se, None);
        }
    }
    if etas.len() >= 2 {
        let (lo, hi) = cfg.get_band("tolerance.averaged_slope")?;
        rep.check("averaged_slope", slopes[0], None, Some(lo), Some(hi), format!("slope vs 1/(N eta) in [{lo}, {hi}]"));
        rep.scalar("entrywise_slope", slopes[1], None);
        rep.scalar("offdiagonal_slope", slopes[2], None);
        let (lo, hi) = cfg.get_band("tolerance.isotropic_slope")?;
        rep.check("isotropic_slope", slopes[3], None, Some(lo), Some(hi), format!("slope vs 1/(N eta) in [{lo}, {hi}]"));
    } else {
        rep.note("slopes need at least two eta values");
    }
    let worst = per.iter().map(|p| p.1).fold(0.0, f64::max);
    let bound = nf.powf(cfg.get_f64("tolerance.moment_slack")?) / t;
    rep.check_at_most("max_bulk_overlap", worst, None, bound);
    Ok(rep)
}

pub fn dbm_continuity(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let n = cfg.n()?;
    let model = Model::new(cfg, n)?;
    let t = model.t;
    let nf = n as f64;
    let a = cfg.get_f64("dynamics.a")?;
    let (lo, hi) = (nf.powf(a) / nf, nf.powf(-a) * (t / nf).sqrt());
    let tau_max = cfg.get_auto_f64("dynamics.tau")?.unwrap_or(hi);
    let points = cfg.get_usize("dynamics.tau_points")?.max(1);
    let taus: Vec<f64> = (0..points).map(|j| tau_max / 4f64.powi(j as i32)).collect();
    let mut rep = start_report(cfg, &[(n, t)], Some(tau_max))?;
    for &tau in &taus {
        if tau < lo || tau > hi {
            rep.note(format!("tau = {tau} lies outside [{lo}, {hi}]"));
        }
    }
    let q = direction(cfg, n)?;
    let eta = cfg.get_auto_f64("eta.value")?.unwrap_or(nf.powf(-0.5));
    let z = ComplexPoint::new(model.fc.gamma(n / 2)?, eta)?;
    let master = SeedStream::new(cfg.seed());
    let (seeds, noise) = (master.child(SAMPLES), master.child(NOISE));
    let per = par_map(cfg.workers, cfg.get_usize("sampling.samples")?, |s| {
        let h0 = model.matrix(&seeds, s)?;
        let f0 = quadratic_form(&diagonalize(&h0)?, &q, z.z());
        let seed = noise.derive(s as u64);
        let zero = ou_flow(&h0, &model.d, t, 0.0, seed)?;
        let d0 = (quadratic_form(&diagonalize(&zero)?, &q, z.z()) - f0).norm();
        let deltas = taus
            .iter()
            .map(|&tau| Ok(quadratic_form(&diagonalize(&ou_flow(&h0, &model.d, t, tau, seed)?)?, &q, z.z()) - f0))
            .collect::<Result<Vec<_>>>()?;
        Ok((d0, f0, deltas))
    })?;

    let m = model.fc.solve_m(z)?;
    rep.scalar("t", t, None);
    rep.scalar("eta", eta, None);
    rep.scalar("m_t_re", m.re, None);
    rep.scalar("m_t_im", m.im, None);
    let f0 = Estimate::batch_means(&per.iter().map(|p| p.1.im).collect::<Vec<_>>())?;
    rep.scalar("quadratic_form_im_at_0", f0.mean, Some(f0.se));
    let d0 = per.iter().map(|p| p.0).fold(0.0, f64::max);
    rep.check_at_most("zero_time_difference", d0, None, 0.0);

    let mut rows = Vec::new();
    let mut stats = Vec::new();
    for (j, &tau) in taus.iter().enumerate() {
        let col = |f: fn(Complex64) -> f64| per.iter().map(|p| f(p.2[j])).collect::<Vec<_>>();
        let re = Estimate::batch_means(&col(|c| c.re))?;
        let im = Estimate::batch_means(&col(|c| c.im))?;
        let ab = Estimate::batch_means(&col(|c| c.norm()))?;
        rows.push(vec![tau, re.mean, re.se, im.mean, im.se, ab.mean, ab.se]);
        stats.push((re, im, ab));
    }
    rep.series("differences", &["tau", "mean_re", "se_re", "mean_im", "se_im", "mean_abs", "se_abs"], rows);
    if taus.len() >= 2 {
        let factor = cfg.get_f64("tolerance.trend_factor")?;
        let se_rule = cfg.get_f64("tolerance.se_rule")?;
        let (big, small) = (&stats[0], &stats[1]);
        for (name, b, s) in [("re", big.0, small.0), ("im", big.1, small.1)] {
            let budget = 4.0 * factor * (s.mean.abs() + se_rule * s.se);
            rep.check_at_most(format!("trend_{name}"), b.mean.abs(), Some(b.se), budget);
        }
        let shrinking = stats.windows(2).all(|w| w[1].2.mean < w[0].2.mean);
        rep.check_flag("mean_abs_change_shrinks", shrinking, "E|delta| decreases with tau");
    }
    Ok(rep)
}

pub fn advection_check(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let ns = cfg.get_usize_list("sampling.ladder")?;
    let ms = cfg.get_usize_list("sampling.ladder_samples")?;
    if ns.len() != ms.len() {
        return Err(Error::DimensionMismatch { expected: ns.len(), found: ms.len() });
    }
    let tau = cfg.get_f64("dynamics.tau")?;
    let mut rep = start_report(cfg, &[], Some(tau))?;
    rep.provenance.n = ns.clone();
    let kind = cfg.potential()?;
    if kind != PotentialKind::SemicircleQuantiles {
        rep.note(format!("potential {kind} is not the semicircle-quantile potential"));
    }
    let etas = cfg.get_f64_list("eta.grid")?;
    let macro_eta = cfg.get_f64("eta.macroscopic")?;
    let hw = cfg.get_f64("energy.half_width")?;
    let energies = lin_grid(-hw, hw, cfg.get_usize("energy.points")?.max(1));
    let all: Vec<f64> = etas.iter().copied().chain([macro_eta]).collect();
    let beta = cfg.beta()?;
    let noise = SeedStream::new(cfg.seed()).child(NOISE);
    let mut rows = Vec::new();
    let mut p99 = Vec::new();
    for (&n, &m) in ns.iter().zip(&ms) {
        let d = build_potential(&kind, n)?;
        let h0 = SymmetricMatrix::from_diagonal(d.entries(), beta);
        let stream = noise.child(n as u64);
        let per = par_map(cfg.workers, m, |s| {
            let lambda = eigenvalues(&ou_semicircle(&h0, tau, stream.derive(s as u64))?)?;
            all.iter()
                .map(|&eta| {
                    energies
                        .iter()
                        .map(|&e| {
                            let z = Complex64::new(e, eta);
                            let gt = resolvent_flow_trace(&lambda, tau, z)?;
                            Ok((gt - d.stieltjes(characteristic(z, tau)?)).norm())
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()
        })?;
        let nf = n as f64;
        let mut level = Vec::new();
        for (j, &eta) in all.iter().enumerate() {
            let vals: Vec<f64> = per.iter().flat_map(|p| p[j].iter().copied()).collect();
            let q = quantile(&vals, 0.99);
            rows.push(vec![nf, eta, nf * eta * q, q, nf * eta * quantile(&vals, 0.5)]);
            level.push(q);
        }
        let scaled: Vec<f64> = etas.iter().zip(&level).map(|(e, q)| nf * e * q).collect();
        let hi = scaled.iter().copied().fold(0.0, f64::max);
        let lo = scaled.iter().copied().fold(f64::INFINITY, f64::min);
        rep.check_at_most(format!("p99_scaled_max_n{n}"), hi, None, cfg.get_f64("tolerance.constant")?);
        rep.check_at_most(format!("eta_stability_n{n}"), hi / lo, None, cfg.get_f64("tolerance.eta_stability")?);
        rep.check_at_most(format!("macroscopic_p99_n{n}"), level[etas.len()], None, cfg.get_f64("tolerance.macroscopic")?);
        p99.push((n, level));
    }
    let (lo, hi) = cfg.get_band("tolerance.doubling")?;
    for w in p99.windows(2) {
        let ((n1, a), (n2, b)) = (&w[0], &w[1]);
        if *n2 != 2 * n1 {
            continue;
        }
        for (j, &eta) in etas.iter().enumerate() {
            let ratio = b[j] / a[j];
            rep.check(
                format!("doubling_ratio_n{n2}_eta{j}"),
                ratio,
                None,
                Some(lo),
                Some(hi),
                format!("p99 ratio at eta = {eta} in [{lo}, {hi}]"),
            );
        }
    }
    rep.series("advection", &["n", "eta", "p99_scaled", "p99", "median_scaled"], rows);
    Ok(rep)
}
