//! Control cases with exactly known answers.

use wignerlab_core::ensembles::{sample_wigner, EnsembleSpec};
use wignerlab_core::matrix::{diagonalize, Beta};
use wignerlab_core::stats::Estimate;
use wignerlab_core::verify::{Experiment, ExperimentConfig};

/// GOE eigenvectors are Haar distributed, so `E[(√N u_k(α))⁴] = 3N/(N+2)`.
#[test]
fn goe_fourth_moment_is_exact() {
    let n = 40;
    let per: Vec<f64> = (0..300)
        .map(|s| {
            let h = sample_wigner(&EnsembleSpec::gaussian_invariant(n, Beta::Real, 1000 + s)).unwrap();
            let sample = diagonalize(&h).unwrap();
            let mut acc = 0.0;
            for k in 0..n {
                for a in 0..n {
                    acc += (n as f64 * sample.weight(k, a)).powi(2);
                }
            }
            acc / (n * n) as f64
        })
        .collect();
    let e = Estimate::batch_means(&per).unwrap();
    let exact = 3.0 * n as f64 / (n as f64 + 2.0);
    assert!((e.mean - exact).abs() <= 4.0 * e.se, "{} vs {exact} (se {})", e.mean, e.se);
}

/// With `D = 0`, `t = 1` and invariant diagonals the moment targets shift to
/// the sphere values `1, 3N/(N+2), 15N²/((N+2)(N+4))`. The profile centred at
/// `γ` is `1/(γ² + (Im m_sc(γ))²) = 4/(3γ² + 4)`.
#[test]
fn gaussianity_on_pure_goe() {
    let n = 150;
    let mut cfg = ExperimentConfig::new(Experiment::Gaussianity);
    for kv in [
        "model.n=150",
        "model.potential=zero",
        "model.t=1",
        "model.diagonal=invariant",
        "sampling.samples=120",
        "bulk.spacing=8",
        "eta.value=1e-5",
    ] {
        cfg.set_pair(kv).unwrap();
    }
    let r = Experiment::Gaussianity.run(&cfg).unwrap();
    let nf = n as f64;
    let targets = [1.0, 3.0 * nf / (nf + 2.0), 15.0 * nf * nf / ((nf + 2.0) * (nf + 4.0))];
    for (name, target) in ["moment_2", "moment_4", "moment_6"].iter().zip(targets) {
        let q = r.get(name).unwrap();
        let se = q.se.unwrap();
        assert!((q.value - target).abs() <= 5.0 * se + 0.05 * target, "{name}: {} vs {target} (se {se})", q.value);
    }
    let table = r.series.iter().find(|s| s.name == "sigma2").unwrap();
    for row in &table.rows {
        let (gamma, s2) = (row[1], row[2]);
        let exact = 4.0 / (3.0 * gamma * gamma + 4.0);
        assert!((s2 - exact).abs() <= 1e-2 * exact, "gamma {gamma}: {s2} vs {exact}");
    }
}

#[test]
fn experiment_reports_are_seed_deterministic() {
    let mut cfg = ExperimentConfig::new(Experiment::LocalLaws);
    for kv in ["model.n=100", "sampling.samples=3", "bulk.indices=6", "seed=9"] {
        cfg.set_pair(kv).unwrap();
    }
    let a = Experiment::LocalLaws.run(&cfg).unwrap();
    cfg.workers = 1;
    let b = Experiment::LocalLaws.run(&cfg).unwrap();
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    cfg.set("seed", "10").unwrap();
    let c = Experiment::LocalLaws.run(&cfg).unwrap();
    assert_ne!(a.to_json().unwrap(), c.to_json().unwrap());
}
