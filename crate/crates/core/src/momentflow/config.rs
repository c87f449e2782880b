use crate::error::{Error, Result};
use std::collections::HashMap;

/// Inclusive range `[a, b]` of 0-based eigenvalue indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Window {
    pub a: usize,
    pub b: usize,
}

impl Window {
    pub fn new(a: usize, b: usize) -> Result<Self> {
        if b < a {
            return Err(Error::InvalidArgument(format!("empty window [{a}, {b}]")));
        }
        Ok(Self { a, b })
    }

    pub fn len(&self) -> usize {
        self.b - self.a + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, i: usize) -> bool {
        i >= self.a && i <= self.b
    }
}

/// `n` particles on a window, stored as sorted particle positions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ParticleConfiguration {
    window: Window,
    positions: Vec<usize>,
}

impl ParticleConfiguration {
    pub fn from_positions(window: Window, mut positions: Vec<usize>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidArgument("configuration needs at least one particle".into()));
        }
        if let Some(&p) = positions.iter().find(|&&p| !window.contains(p)) {
            return Err(Error::InvalidArgument(format!("site {p} outside window [{}, {}]", window.a, window.b)));
        }
        positions.sort_unstable();
        Ok(Self { window, positions })
    }

    /// From `(site, count)` pairs.
    pub fn from_counts(window: Window, counts: &[(usize, usize)]) -> Result<Self> {
        let positions = counts.iter().flat_map(|&(s, c)| std::iter::repeat(s).take(c)).collect();
        Self::from_positions(window, positions)
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn n(&self) -> usize {
        self.positions.len()
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    /// Nonzero `(site, η_site)` pairs in increasing site order.
    pub fn counts(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = Vec::new();
        for &p in &self.positions {
            match out.last_mut() {
                Some((s, c)) if *s == p => *c += 1,
                _ => out.push((p, 1)),
            }
        }
        out
    }

    pub fn count(&self, site: usize) -> usize {
        self.positions.iter().filter(|&&p| p == site).count()
    }

    /// `L¹` distance between sorted particle positions.
    pub fn distance(&self, other: &ParticleConfiguration) -> usize {
        self.positions.iter().zip(&other.positions).map(|(a, b)| a.abs_diff(*b)).sum()
    }
}

pub const DEFAULT_SPACE_CAP: usize = 200_000;

/// All configurations of `n` particles on a window, in lexicographic order of
/// their sorted positions.
#[derive(Clone, Debug)]
pub struct ConfigSpace {
    window: Window,
    n: usize,
    configs: Vec<ParticleConfiguration>,
    index: HashMap<Vec<usize>, usize>,
}

impl ConfigSpace {
    pub fn window(&self) -> Window {
        self.window
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    pub fn configs(&self) -> &[ParticleConfiguration] {
        &self.configs
    }

    pub fn get(&self, i: usize) -> &ParticleConfiguration {
        &self.configs[i]
    }

    pub fn index_of(&self, positions: &[usize]) -> Option<usize> {
        self.index.get(positions).copied()
    }
}

/// Multiset count `C(w + n − 1, n)`, saturating.
pub fn multiset_count(w: usize, n: usize) -> u128 {
    let mut c: u128 = 1;
    for k in 0..n as u128 {
        c = c.saturating_mul(w as u128 + k) / (k + 1);
    }
    c
}

pub fn enumerate(window: Window, n: usize) -> Result<ConfigSpace> {
    enumerate_with_cap(window, n, DEFAULT_SPACE_CAP)
}

pub fn enumerate_with_cap(window: Window, n: usize, cap: usize) -> Result<ConfigSpace> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one particle".into()));
    }
    let size = multiset_count(window.len(), n);
    if size > cap as u128 {
        return Err(Error::SpaceTooLarge { size, cap });
    }
    let mut configs = Vec::with_capacity(size as usize);
    let mut pos = vec![window.a; n];
    loop {
        configs.push(ParticleConfiguration { window, positions: pos.clone() });
        // Next nondecreasing sequence in lexicographic order.
        let mut k = n;
        while k > 0 && pos[k - 1] == window.b {
            k -= 1;
        }
        if k == 0 {
            break;
        }
        pos[k - 1] += 1;
        let v = pos[k - 1];
        pos[k..].iter_mut().for_each(|p| *p = v);
    }
    let index = configs.iter().enumerate().map(|(i, c)| (c.positions.clone(), i)).collect();
    Ok(ConfigSpace { window, n, configs, index })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        let w3 = Window::new(0, 2).unwrap();
        assert_eq!(enumerate(w3, 2).unwrap().len(), 6);
        assert_eq!(enumerate(Window::new(4, 9).unwrap(), 1).unwrap().len(), 6);
        assert_eq!(enumerate(Window::new(0, 4).unwrap(), 3).unwrap().len(), 35);
        assert_eq!(enumerate(Window::new(0, 7).unwrap(), 3).unwrap().len(), 120);
        assert!(matches!(enumerate_with_cap(Window::new(0, 99).unwrap(), 3, 1000), Err(Error::SpaceTooLarge { .. })));
    }

    #[test]
    fn counts_and_distance() {
        let w = Window::new(0, 9).unwrap();
        let a = ParticleConfiguration::from_counts(w, &[(2, 2), (5, 1)]).unwrap();
        assert_eq!(a.positions(), &[2, 2, 5]);
        assert_eq!(a.counts(), vec![(2, 2), (5, 1)]);
        let b = ParticleConfiguration::from_positions(w, vec![7, 3, 3]).unwrap();
        assert_eq!(a.distance(&b), 1 + 1 + 2);
        assert!(ParticleConfiguration::from_positions(w, vec![10]).is_err());
    }
}
