//! Eigenvector statistics: Gaussianity, the variance profile and QUE.

use super::common::{
    block, bulk_indices, direction, par_map, start_report, Model, BOOTSTRAP, NOISE, PHASES, SAMPLES,
};
use super::{ExperimentConfig, ExperimentReport};
use crate::dynamics::add_brownian;
use crate::error::{Error, Result};
use crate::freeconv::{eta_window, FreeConvolution};
use crate::matrix::{diagonalize, Beta};
use crate::rng::SeedStream;
use crate::stats::{bootstrap_quantile_slope, correlation, linear_fit, quantile, Estimate};
use num_complex::Complex64;
use rand::Rng as _;
use std::f64::consts::PI;

fn ladder(cfg: &ExperimentConfig) -> Result<Vec<(usize, usize)>> {
    let ns = cfg.get_usize_list("sampling.ladder")?;
    let ms = cfg.get_usize_list("sampling.ladder_samples")?;
    if ns.len() != ms.len() {
        return Err(Error::DimensionMismatch { expected: ns.len(), found: ms.len() });
    }
    Ok(ns.into_iter().zip(ms).collect())
}

fn l2(v: impl Iterator<Item = f64>) -> f64 {
    v.map(|x| x * x).sum::<f64>().sqrt()
}

pub fn gaussianity(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let n = cfg.n()?;
    let model = Model::new(cfg, n)?;
    let t = model.t;
    let mut rep = start_report(cfg, &[(n, t)], None)?;
    let se_rule = cfg.get_f64("tolerance.se_rule")?;
    let rel = cfg.get_f64("tolerance.moment_rel")?;
    let omega = cfg.get_f64("model.omega")?;
    let (lo, hi) = eta_window(n, t, omega);
    let eta = match cfg.get_auto_f64("eta.value")? {
        Some(e) => e,
        None if lo < hi => (lo * hi).sqrt(),
        None => hi,
    };
    let ks = bulk_indices(cfg, n)?;
    let q = direction(cfg, n)?;
    let prof = model.fc.variance_profiles(&q, &ks, eta, omega)?;
    if !prof.in_window {
        rep.note(format!("eta = {eta} lies outside the admissible window [{lo}, {hi}]"));
    }
    let peaks = ks
        .iter()
        .map(|&k| {
            let a = model.nearest_site(model.fc.gamma(k)?);
            Ok((a, model.fc.coordinate_profile(k, eta)?[a]))
        })
        .collect::<Result<Vec<_>>>()?;

    let samples = cfg.get_usize("sampling.samples")?;
    let seeds = SeedStream::new(cfg.seed()).child(SAMPLES);
    let nf = n as f64;
    let per = par_map(cfg.workers, samples, |s| {
        let sample = diagonalize(&model.matrix(&seeds, s)?)?;
        let x2: Vec<f64> = ks
            .iter()
            .zip(&prof.values)
            .map(|(&k, &s2)| nf * sample.overlap(&q, k).norm_sqr() / s2)
            .collect();
        let peak = ks.iter().zip(&peaks).map(|(&k, &(a, s2))| nf * sample.weight(k, a) / s2).sum::<f64>()
            / ks.len() as f64;
        Ok((x2, peak))
    })?;

    let beta = cfg.beta()?;
    let targets = match beta {
        Beta::Real => [1.0, 3.0, 15.0],
        Beta::Complex => [1.0, 2.0, 6.0],
    };
    rep.scalar("t", t, None);
    rep.scalar("eta", eta, None);
    rep.scalar("sigma2_mean", prof.values.iter().sum::<f64>() / ks.len() as f64, None);
    let kf = ks.len() as f64;
    let mut rows = Vec::new();
    for (p, &target) in (1..=3).zip(&targets) {
        let vals: Vec<f64> = per.iter().map(|(x2, _)| x2.iter().map(|x| x.powi(p)).sum::<f64>() / kf).collect();
        let e = Estimate::batch_means(&vals)?;
        let tol = (se_rule * e.se).max(rel * target);
        rep.check_near(format!("moment_{}", 2 * p), e.mean, Some(e.se), target, tol);
        rows.push(vec![2.0 * p as f64, e.mean, e.se, target, tol]);
    }
    rep.series("moments", &["order", "estimate", "se", "target", "tolerance"], rows);

    if ks.len() >= 2 && samples >= 3 {
        let mut rows = Vec::new();
        let mut worst: f64 = 0.0;
        for a in 0..ks.len() {
            for b in a + 1..ks.len() {
                let xa: Vec<f64> = per.iter().map(|p| p.0[a]).collect();
                let xb: Vec<f64> = per.iter().map(|p| p.0[b]).collect();
                let c = correlation(&xa, &xb);
                worst = worst.max(c.abs());
                rows.push(vec![ks[a] as f64, ks[b] as f64, c]);
            }
        }
        rep.check_at_most("max_abs_correlation", worst, None, se_rule / (samples as f64).sqrt());
        rep.series("correlations", &["k_a", "k_b", "correlation"], rows);
    } else {
        rep.note("independence check skipped: needs two bulk indices and three samples");
    }

    let peak: Vec<f64> = per.iter().map(|p| p.1).collect();
    let e = Estimate::batch_means(&peak)?;
    rep.check_near("peak_variance_ratio", e.mean, Some(e.se), 1.0, cfg.get_f64("tolerance.peak_ratio")?);

    let rows = ks
        .iter()
        .zip(&prof.values)
        .zip(&peaks)
        .map(|((&k, &s2), &(a, sp))| Ok(vec![k as f64, model.fc.gamma(k)?, s2, a as f64, sp]))
        .collect::<Result<Vec<_>>>()?;
    rep.series("sigma2", &["k", "gamma", "sigma2_q", "peak_site", "sigma2_peak"], rows);
    Ok(rep)
}

/// Moving average over `2r + 1` points, shrinking at the ends.
fn smooth(v: &[f64], r: usize) -> Vec<f64> {
    (0..v.len())
        .map(|i| {
            let (a, b) = (i.saturating_sub(r), (i + r + 1).min(v.len()));
            v[a..b].iter().sum::<f64>() / (b - a) as f64
        })
        .collect()
}

pub fn variance_profile_fit(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let n = cfg.n()?;
    let model = Model::new(cfg, n)?;
    let (t, fc) = (model.t, &model.fc);
    let mut rep = start_report(cfg, &[(n, t)], None)?;
    let factor = cfg.get_f64("eta.factor")?;
    let eta = factor * t;
    let ks = bulk_indices(cfg, n)?;
    let nt = n as f64 * t;
    let w = (cfg.get_f64("profile.span")? * nt).ceil() as usize;
    let centres = ks.iter().map(|&k| Ok(model.nearest_site(fc.gamma(k)?))).collect::<Result<Vec<_>>>()?;
    for &c in &centres {
        block(c, 2 * w + 1, n)?;
    }
    let len = 2 * w + 1;
    let kf = ks.len() as f64;
    let mut theory = vec![0.0; len];
    let mut subordinated = vec![0.0; len];
    for (&k, &c) in ks.iter().zip(&centres) {
        let p = fc.coordinate_profile(k, eta)?;
        let s = fc.subordinated_profile(k, eta)?;
        for d in 0..len {
            theory[d] += p[c - w + d] / kf;
            subordinated[d] += s[c - w + d] / kf;
        }
    }

    let samples = cfg.get_usize("sampling.samples")?;
    let seeds = SeedStream::new(cfg.seed()).child(SAMPLES);
    let nf = n as f64;
    let per = par_map(cfg.workers, samples, |s| {
        let sample = diagonalize(&model.matrix(&seeds, s)?)?;
        let mut v = vec![0.0; len];
        for (&k, &c) in ks.iter().zip(&centres) {
            for (d, x) in v.iter_mut().enumerate() {
                *x += nf * sample.weight(k, c - w + d) / kf;
            }
        }
        Ok(v)
    })?;
    let est = (0..len)
        .map(|d| Estimate::batch_means(&per.iter().map(|v| v[d]).collect::<Vec<_>>()))
        .collect::<Result<Vec<_>>>()?;
    let emp: Vec<f64> = est.iter().map(|e| e.mean).collect();

    let fit = |th: &[f64]| {
        let c = emp.iter().zip(th).map(|(a, b)| a * b).sum::<f64>() / th.iter().map(|b| b * b).sum::<f64>();
        (c, l2(emp.iter().zip(th).map(|(a, b)| a - c * b)) / l2(emp.iter().copied()))
    };
    let (c, rel) = fit(&theory);
    let rel_unit = l2(emp.iter().zip(&theory).map(|(a, b)| a - b)) / l2(emp.iter().copied());
    let (c_sub, rel_sub) = fit(&subordinated);
    rep.scalar("t", t, None);
    rep.scalar("eta", eta, None);
    rep.scalar("fit_coefficient", c, None);
    rep.scalar("relative_l2_error_unit_coefficient", rel_unit, None);
    rep.scalar("subordinated_fit_coefficient", c_sub, None);
    rep.scalar("subordinated_relative_l2_error", rel_sub, None);
    rep.check_at_most("relative_l2_error", rel, None, cfg.get_f64("tolerance.l2")?);

    let sm = smooth(&emp, 2);
    let peak = (0..len).max_by(|&a, &b| sm[a].total_cmp(&sm[b])).unwrap_or(w);
    let half = sm[peak] / 2.0;
    let mut left = peak;
    while left > 0 && sm[left - 1] >= half {
        left -= 1;
    }
    let mut right = peak;
    while right + 1 < len && sm[right + 1] >= half {
        right += 1;
    }
    let span = (right - left + 1) as f64;
    let f = cfg.get_f64("tolerance.span_factor")?;
    rep.scalar("half_max_span_sites", span, None);
    rep.check("half_max_span_over_nt", span / nt, None, Some(1.0 / f), Some(f), format!("within a factor {f} of 1"));

    let mid = ks.len() / 2;
    let (kmid, cmid) = (ks[mid], centres[mid]);
    let e = model.d.entries();
    let width_fit = (e[cmid - w + right] - e[cmid - w + left]) / 2.0;
    let w1 = fc.profile_width(fc.gamma(kmid)?, eta)?;
    rep.scalar("half_width_fitted", width_fit, None);
    rep.scalar("half_width_theory", w1, None);
    rep.scalar("half_width_ratio", width_fit / w1, None);

    let nf = n as f64;
    let t_top = nf.powf(-cfg.get_f64("model.omega")?) * cfg.get_f64("model.r")?;
    if t_top > t {
        let fc2 = FreeConvolution::new(model.d.clone(), t_top)?;
        let w2 = fc2.profile_width(fc2.gamma(kmid)?, factor * t_top)?;
        let ratio = (w2 / w1) / (t_top / t);
        rep.scalar("t_top", t_top, None);
        rep.check_near("width_growth_over_t_growth", ratio, None, 1.0, cfg.get_f64("tolerance.linear_rel")?);
    } else {
        rep.note("t is at or above the top of the window; width scaling check skipped");
    }

    let rows = (0..len)
        .map(|d| vec![d as f64 - w as f64, emp[d], est[d].se, theory[d], c * theory[d], subordinated[d]])
        .collect();
    rep.series("profile", &["offset", "empirical", "se", "theory", "fitted", "subordinated"], rows);
    Ok(rep)
}

pub fn weak_que(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let rungs = ladder(cfg)?;
    let sizes_t = rungs.iter().map(|&(n, _)| Ok((n, cfg.t_for(n)?))).collect::<Result<Vec<_>>>()?;
    let mut rep = start_report(cfg, &sizes_t, None)?;
    let se_rule = cfg.get_f64("tolerance.se_rule")?;
    let full_tol = cfg.get_f64("tolerance.full_mass")?;
    let offset = cfg.get_f64("index.outside_offset")?;
    let mut cs = cfg.get_f64_list("que.c")?;
    if !cs.contains(&1.0) {
        cs.push(1.0);
    }
    let factor = cfg.get_f64("eta.factor")?;
    let root = SeedStream::new(cfg.seed()).child(SAMPLES);
    let mut at_one = Vec::new();
    let mut rows = Vec::new();
    let mut masses = Vec::new();
    for &(n, m) in &rungs {
        let model = Model::new(cfg, n)?;
        let (t, fc) = (model.t, &model.fc);
        let nt = n as f64 * t;
        let eta = factor * t;
        let base = cfg.get_auto_usize("index.size")?.unwrap_or(((nt / 8.0).round() as usize).max(1));
        let sizes = [base, 4 * base];
        let ks = bulk_indices(cfg, n)?;
        let shift = (offset * nt).round() as usize;
        let mut sets = Vec::new();
        let mut worst_full: f64 = 0.0;
        for &k in &ks {
            let c = model.nearest_site(fc.gamma(k)?);
            let p = fc.coordinate_profile(k, eta)?;
            worst_full = worst_full.max((1.0 - p.iter().sum::<f64>() / n as f64).abs());
            let inside = sizes
                .iter()
                .map(|&s| {
                    let r = block(c, s, n)?;
                    let th = p[r.clone()].iter().sum::<f64>() / n as f64;
                    Ok((r, th))
                })
                .collect::<Result<Vec<_>>>()?;
            let oc = if c + shift + base < n { c + shift } else { c.saturating_sub(shift) };
            let r = block(oc, base, n)?;
            let th = p[r.clone()].iter().sum::<f64>() / n as f64;
            sets.push((k, inside, (r, th)));
        }
        rep.check_at_most(format!("full_mass_deviation_n{n}"), worst_full, None, full_tol);

        let seeds = root.child(n as u64);
        let per = par_map(cfg.workers, m, |s| {
            let sample = diagonalize(&model.matrix(&seeds, s)?)?;
            let mut xs = vec![Vec::with_capacity(sets.len()); sizes.len()];
            let mut outside = 0.0;
            for (k, inside, (ro, _)) in &sets {
                for (i, (r, th)) in inside.iter().enumerate() {
                    let mass: f64 = r.clone().map(|a| sample.weight(*k, a)).sum();
                    xs[i].push(nt / sizes[i] as f64 * (mass - th).abs());
                }
                outside += ro.clone().map(|a| sample.weight(*k, a)).sum::<f64>() / sets.len() as f64;
            }
            Ok((xs, outside))
        })?;
        for (i, &size) in sizes.iter().enumerate() {
            for &c in &cs {
                let frac: Vec<f64> = per
                    .iter()
                    .map(|(xs, _)| xs[i].iter().filter(|&&x| x > c).count() as f64 / xs[i].len() as f64)
                    .collect();
                let e = Estimate::batch_means(&frac)?;
                rows.push(vec![n as f64, size as f64, c, e.mean, e.se]);
                if i == 0 && c == 1.0 {
                    rep.scalar(format!("exceedance_c1_n{n}"), e.mean, Some(e.se));
                    at_one.push(e.mean);
                }
            }
        }
        let out: Vec<f64> = per.iter().map(|p| p.1).collect();
        let e = Estimate::batch_means(&out)?;
        let th_out = sets.iter().map(|s| s.2 .1).sum::<f64>() / sets.len() as f64;
        masses.push(vec![n as f64, e.mean, e.se, th_out]);
        rep.check_at_most(format!("outside_mass_n{n}"), e.mean, Some(e.se), 2.0 * th_out + se_rule * e.se);
    }
    if at_one.len() >= 2 {
        let decreasing = at_one.windows(2).all(|p| p[1] < p[0]);
        rep.check_flag("exceedance_c1_strictly_decreasing", decreasing, "P(N_1) > P(N_2) > ... at c = 1");
    } else {
        rep.note("monotone trend needs at least two ladder sizes");
    }
    rep.series("exceedance", &["n", "index_size", "c", "probability", "se"], rows);
    rep.series("outside_mass", &["n", "mass", "se", "theory"], masses);
    Ok(rep)
}

pub fn strong_que(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let rungs = ladder(cfg)?;
    let sizes_t = rungs.iter().map(|&(n, _)| Ok((n, cfg.t_for(n)?))).collect::<Result<Vec<_>>>()?;
    let mut rep = start_report(cfg, &sizes_t, cfg.get_auto_f64("dynamics.tau")?)?;
    let se_rule = cfg.get_f64("tolerance.se_rule")?;
    let p = cfg.get_f64("que.quantile")?;
    let master = SeedStream::new(cfg.seed());
    let beta = cfg.beta()?;
    let mut groups = Vec::new();
    let mut ns = Vec::new();
    let mut rows = Vec::new();
    let (mut singles, mut singles_t) = (Vec::new(), Vec::new());
    for &(n, m) in &rungs {
        let model = Model::new(cfg, n)?;
        let (t, fc) = (model.t, &model.fc);
        let nf = n as f64;
        let nt = nf * t;
        let tau = cfg.get_auto_f64("dynamics.tau")?.unwrap_or((t * t / nf).cbrt());
        let eta0 = nt.powf(2.0 / 3.0) / nf;
        let size = cfg.get_auto_usize("index.size")?.unwrap_or(nt.ceil() as usize).max(1);
        let ihat = (size as f64 / nt).min(1.0);
        let xi = ihat / nt.cbrt();
        let ks = bulk_indices(cfg, n)?;
        // H_τ has the law of D + √(t+τ)·W for Gaussian W; single entries are
        // compared with that profile, index-set masses with the one at t.
        let fc_tau = FreeConvolution::new(model.d.clone(), t + tau)?;
        let sets = ks
            .iter()
            .map(|&k| {
                let c = model.nearest_site(fc.gamma(k)?);
                let prof = fc.coordinate_profile(k, eta0)?;
                let r = block(c, size, n)?;
                let th = prof[r.clone()].iter().sum::<f64>() / nf;
                Ok((k, c, r, th, fc_tau.coordinate_profile(k, eta0)?[c], prof[c]))
            })
            .collect::<Result<Vec<_>>>()?;
        let seeds = master.child(SAMPLES).child(n as u64);
        let noise = master.child(NOISE).child(n as u64);
        let phases = master.child(PHASES).child(n as u64);
        let per = par_map(cfg.workers, m, |s| {
            let h = add_brownian(&model.matrix(&seeds, s)?, tau, noise.derive(s as u64))?;
            let sample = diagonalize(&h)?;
            let mut rng = phases.rng(s as u64);
            let (mut ys, mut zs) = (Vec::new(), Vec::new());
            let (mut signed, mut single, mut single_t) = (0.0, 0.0, 0.0);
            let kf = sets.len() as f64;
            for (k, c, r, th, pc, pc_t) in &sets {
                let mass: f64 = r.clone().map(|a| sample.weight(*k, a)).sum();
                ys.push((mass - th).abs() / xi);
                let cross: Complex64 = r.clone().map(|a| sample.entry(*k, a).conj() * sample.entry(k + 1, a)).sum();
                zs.push(cross.norm() / xi);
                // Eigenvectors carry an arbitrary sign (phase); draw it uniformly.
                let phase = match beta {
                    Beta::Real => Complex64::new(if rng.gen::<bool>() { 1.0 } else { -1.0 }, 0.0),
                    Beta::Complex => Complex64::from_polar(1.0, 2.0 * PI * rng.gen::<f64>()),
                };
                signed += (phase * cross).re / kf;
                single += nf * sample.weight(*k, *c) / pc / kf;
                single_t += nf * sample.weight(*k, *c) / pc_t / kf;
            }
            Ok((ys, zs, signed, single, single_t))
        })?;
        let ys: Vec<f64> = per.iter().flat_map(|x| x.0.iter().copied()).collect();
        let zs: Vec<f64> = per.iter().flat_map(|x| x.1.iter().copied()).collect();
        let (qy, qz) = (quantile(&ys, p), quantile(&zs, p));
        rep.scalar(format!("diagonal_quantile_n{n}"), qy, None);
        rep.scalar(format!("offdiagonal_quantile_n{n}"), qz, None);
        let signed: Vec<f64> = per.iter().map(|x| x.2).collect();
        let e = Estimate::batch_means(&signed)?;
        let band = se_rule * e.se;
        rep.check(format!("offdiagonal_mean_n{n}"), e.mean, Some(e.se), Some(-band), Some(band), "|mean| <= 5 SE");
        singles.extend(per.iter().map(|x| x.3));
        singles_t.extend(per.iter().map(|x| x.4));
        rows.push(vec![nf, t, tau, xi, size as f64, qy, qz]);
        groups.push(ys);
        ns.push(nf);
    }
    let e = Estimate::batch_means(&singles_t)?;
    rep.scalar("single_entry_ratio_profile_t", e.mean, Some(e.se));
    let e = Estimate::batch_means(&singles)?;
    rep.check_near("single_entry_ratio", e.mean, Some(e.se), 1.0, cfg.get_f64("tolerance.single_ratio")?);
    if ns.len() >= 2 {
        let lx: Vec<f64> = ns.iter().map(|x| x.ln()).collect();
        let ly: Vec<f64> = rows.iter().map(|r| r[5].ln()).collect();
        rep.scalar("quantile_slope", linear_fit(&lx, &ly).1, None);
        let reps = cfg.get_usize("que.bootstrap")?.max(20);
        let mut rng = master.child(BOOTSTRAP).rng(0);
        let slopes = bootstrap_quantile_slope(&ns, &groups, p, reps, &mut rng);
        let lower = slopes[(0.05 * reps as f64).floor() as usize];
        rep.check(
            "quantile_slope_lower_95",
            lower,
            None,
            None,
            Some(0.0),
            "5% bootstrap quantile of the log-log slope <= 0 (no increasing trend)",
        );
    } else {
        rep.note("trend test needs at least two ladder sizes");
    }
    rep.series("quantiles", &["n", "t", "tau", "xi", "index_size", "diagonal", "offdiagonal"], rows);
    Ok(rep)
}
