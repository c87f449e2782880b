use super::config::{ConfigSpace, ParticleConfiguration};
use super::generator::{build_generator, Boundary, FlowGenerator, Range};
use crate::error::{Error, Result};
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolveOptions {
    /// Step cap as a fraction of `1/max exit rate`. At most 1 keeps each RK4
    /// step a stochastic matrix.
    pub max_step_fraction: f64,
    /// Local error tolerance for step doubling, relative to `max(1, ‖f‖∞)`.
    /// `None` takes fixed steps at the cap.
    pub tolerance: Option<f64>,
    pub max_steps: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { max_step_fraction: 0.5, tolerance: Some(1e-11), max_steps: 10_000_000 }
    }
}

/// Result of [`evolve`].
#[derive(Clone, Debug)]
pub struct Evolution {
    pub values: Vec<f64>,
    pub steps: usize,
    /// Largest per-step increase of `max f` or decrease of `min f` (the
    /// reference value counts as a configuration when jumps are absorbed).
    pub max_principle_violation: f64,
}

/// One classical RK4 step of `f' = Gen f`.
fn rk4(gen: &FlowGenerator, f: &[f64], reference: f64, h: f64, scratch: &mut [Vec<f64>; 5]) -> Vec<f64> {
    let [k1, k2, k3, k4, tmp] = scratch;
    gen.apply(f, reference, k1);
    tmp.iter_mut().zip(f).zip(k1.iter()).for_each(|((t, x), k)| *t = x + 0.5 * h * k);
    gen.apply(tmp, reference, k2);
    tmp.iter_mut().zip(f).zip(k2.iter()).for_each(|((t, x), k)| *t = x + 0.5 * h * k);
    gen.apply(tmp, reference, k3);
    tmp.iter_mut().zip(f).zip(k3.iter()).for_each(|((t, x), k)| *t = x + h * k);
    gen.apply(tmp, reference, k4);
    (0..f.len()).map(|i| f[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect()
}

fn extremes(f: &[f64], reference: Option<f64>) -> (f64, f64) {
    let init = reference.map_or((f64::INFINITY, f64::NEG_INFINITY), |r| (r, r));
    f.iter().fold(init, |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

/// Integrates `∂_s f = Gen f` over `[0, tau]` for a static environment.
pub fn evolve(gen: &FlowGenerator, f0: &[f64], tau: f64, reference: f64, opts: EvolveOptions) -> Result<Evolution> {
    let mut out = Evolution { values: f0.to_vec(), steps: 0, max_principle_violation: 0.0 };
    advance(gen, &mut out, 0.0, tau, reference, opts)?;
    Ok(out)
}

fn advance(
    gen: &FlowGenerator,
    state: &mut Evolution,
    start: f64,
    end: f64,
    reference: f64,
    opts: EvolveOptions,
) -> Result<()> {
    if state.values.len() != gen.len() {
        return Err(Error::DimensionMismatch { expected: gen.len(), found: state.values.len() });
    }
    if !(end >= start) {
        return Err(Error::InvalidArgument(format!("negative time span {start}..{end}")));
    }
    let cap = if gen.max_exit_rate() > 0.0 { opts.max_step_fraction / gen.max_exit_rate() } else { f64::INFINITY };
    let absorbing = (gen.boundary() == Boundary::Absorb).then_some(reference);
    let n = gen.len();
    let mut scratch = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut s = start;
    let mut h = cap.min(end - start);
    while s < end {
        if state.steps >= opts.max_steps {
            return Err(Error::StepUnderflow { time: s, step: h });
        }
        h = h.min(end - s).min(cap);
        let next = match opts.tolerance {
            None => rk4(gen, &state.values, reference, h, &mut scratch),
            Some(tol) => {
                let full = rk4(gen, &state.values, reference, h, &mut scratch);
                let half = rk4(gen, &state.values, reference, 0.5 * h, &mut scratch);
                let two = rk4(gen, &half, reference, 0.5 * h, &mut scratch);
                let scale = state.values.iter().fold(1.0f64, |a, x| a.max(x.abs()));
                let err = full.iter().zip(&two).fold(0.0f64, |a, (x, y)| a.max((x - y).abs())) / 15.0;
                if err > tol * scale {
                    h *= (0.9 * (tol * scale / err).powf(0.2)).max(0.1);
                    if s + h == s {
                        return Err(Error::StepUnderflow { time: s, step: h });
                    }
                    continue;
                }
                // No Richardson extrapolation: it would break the positivity of the step.
                let accepted = two;
                let grow = if err > 0.0 { (0.9 * (tol * scale / err).powf(0.2)).min(4.0) } else { 4.0 };
                let used = h;
                h = (h * grow).min(cap);
                s += used;
                state.steps += 1;
                let (lo0, hi0) = extremes(&state.values, absorbing);
                let (lo1, hi1) = extremes(&accepted, absorbing);
                state.max_principle_violation = state.max_principle_violation.max(hi1 - hi0).max(lo0 - lo1);
                state.values = accepted;
                continue;
            }
        };
        s += h;
        state.steps += 1;
        let (lo0, hi0) = extremes(&state.values, absorbing);
        let (lo1, hi1) = extremes(&next, absorbing);
        state.max_principle_violation = state.max_principle_violation.max(hi1 - hi0).max(lo0 - lo1);
        state.values = next;
    }
    Ok(())
}

/// Integrates the flow in a time-dependent environment: `path[k] = (s_k, λ(s_k))`
/// with `s_0 = 0` and increasing times; the environment is held constant
/// between path times.
pub fn evolve_path(
    space: &Arc<ConfigSpace>,
    path: &[(f64, Vec<f64>)],
    range: Range,
    boundary: Boundary,
    f0: &[f64],
    tau: f64,
    reference: f64,
    opts: EvolveOptions,
) -> Result<Evolution> {
    if path.is_empty() || path[0].0 != 0.0 {
        return Err(Error::InvalidArgument("environment path must start at time 0".into()));
    }
    let mut out = Evolution { values: f0.to_vec(), steps: 0, max_principle_violation: 0.0 };
    for (k, (s0, lambda)) in path.iter().enumerate() {
        if *s0 >= tau {
            break;
        }
        let s1 = path.get(k + 1).map_or(tau, |p| p.0.min(tau));
        let gen = build_generator(space, lambda, range, boundary)?;
        advance(&gen, &mut out, *s0, s1, reference, opts)?;
    }
    Ok(out)
}

/// Row `p_τ(η, ·)` of the semigroup, with the mass absorbed outside the window.
#[derive(Clone, Debug)]
pub struct KernelRow {
    pub probs: Vec<f64>,
    pub outside: f64,
}

impl KernelRow {
    pub fn total(&self) -> f64 {
        self.probs.iter().sum::<f64>() + self.outside
    }
}

/// Distribution at time `tau` of the jump process started at configuration `start`.
pub fn transition_kernel(gen: &FlowGenerator, start: usize, tau: f64, opts: EvolveOptions) -> Result<KernelRow> {
    let n = gen.len();
    if start >= n {
        return Err(Error::DimensionMismatch { expected: n, found: start + 1 });
    }
    let mut p = vec![0.0; n];
    p[start] = 1.0;
    let mut outside = 0.0;
    let cap = if gen.max_exit_rate() > 0.0 { opts.max_step_fraction / gen.max_exit_rate() } else { f64::INFINITY };
    let mut k = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut tmp = vec![0.0; n];
    let mut s = 0.0;
    let mut steps = 0;
    while s < tau {
        if steps >= opts.max_steps {
            return Err(Error::StepUnderflow { time: s, step: cap });
        }
        let h = cap.min(tau - s);
        let a1 = gen.apply_transpose(&p, &mut k[0]);
        tmp.iter_mut().zip(&p).zip(&k[0]).for_each(|((t, x), d)| *t = x + 0.5 * h * d);
        let a2 = gen.apply_transpose(&tmp, &mut k[1]);
        tmp.iter_mut().zip(&p).zip(&k[1]).for_each(|((t, x), d)| *t = x + 0.5 * h * d);
        let a3 = gen.apply_transpose(&tmp, &mut k[2]);
        tmp.iter_mut().zip(&p).zip(&k[2]).for_each(|((t, x), d)| *t = x + h * d);
        let a4 = gen.apply_transpose(&tmp, &mut k[3]);
        for i in 0..n {
            p[i] += h / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
        }
        outside += h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        s += h;
        steps += 1;
    }
    Ok(KernelRow { probs: p, outside })
}

/// `Flat_a f(η) = f(η)` if `d(η, ξ_w) ≤ a`, else `reference`.
pub fn flat(space: &ConfigSpace, f: &[f64], xi_w: &ParticleConfiguration, a: f64, reference: f64) -> Vec<f64> {
    space
        .configs()
        .iter()
        .zip(f)
        .map(|(c, &v)| if c.distance(xi_w) as f64 <= a { v } else { reference })
        .collect()
}

/// Average of `Flat_a` over `a` uniform in `[u/2, u]`:
/// `Av f(η) = a_η·f(η) + (1 − a_η)·reference` with
/// `a_η = clamp(2 − 2d(η, ξ_w)/u, 0, 1)`. Returns `(Av f, a)`.
pub fn flat_av(
    space: &ConfigSpace,
    f: &[f64],
    xi_w: &ParticleConfiguration,
    u: f64,
    reference: f64,
) -> (Vec<f64>, Vec<f64>) {
    let weights: Vec<f64> = space
        .configs()
        .iter()
        .map(|c| (2.0 - 2.0 * c.distance(xi_w) as f64 / u).clamp(0.0, 1.0))
        .collect();
    let values = weights.iter().zip(f).map(|(a, v)| a * v + (1.0 - a) * reference).collect();
    (values, weights)
}

#[cfg(test)]
mod tests {
    use super::super::config::{enumerate, Window};
    use super::*;

    #[test]
    fn two_state_relaxation() {
        let space = Arc::new(enumerate(Window::new(0, 1).unwrap(), 1).unwrap());
        let (n, g) = (2.0, 0.4);
        let gen = build_generator(&space, &[0.0, g], Range::Full, Boundary::Reflect).unwrap();
        let tau = 0.3;
        let out = evolve(&gen, &[1.0, 0.0], tau, 0.0, EvolveOptions::default()).unwrap();
        let decay = (-4.0 / (n * g * g) * tau).exp();
        assert!((out.values[0] - (0.5 + 0.5 * decay)).abs() < 1e-8);
        assert!((out.values[1] - (0.5 - 0.5 * decay)).abs() < 1e-8);
        let row = transition_kernel(&gen, 0, tau, EvolveOptions::default()).unwrap();
        assert!((row.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_time_and_flat_av_limits() {
        let space = Arc::new(enumerate(Window::new(0, 5).unwrap(), 1).unwrap());
        let gen = build_generator(&space, &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0], Range::Full, Boundary::Absorb).unwrap();
        let f: Vec<f64> = (0..6).map(f64::from).collect();
        assert_eq!(evolve(&gen, &f, 0.0, 0.0, EvolveOptions::default()).unwrap().values, f);
        let row = transition_kernel(&gen, 2, 0.0, EvolveOptions::default()).unwrap();
        assert_eq!(row.probs[2], 1.0);
        let xi = space.get(0).clone();
        let (av, a) = flat_av(&space, &f, &xi, 4.0, -1.0);
        assert_eq!(a[0], 1.0);
        assert_eq!(av[0], f[0]);
        assert_eq!(a[5], 0.0);
        assert_eq!(av[5], -1.0);
        assert_eq!(flat(&space, &f, &xi, 2.0, -1.0), vec![0.0, 1.0, 2.0, -1.0, -1.0, -1.0]);
    }
}
