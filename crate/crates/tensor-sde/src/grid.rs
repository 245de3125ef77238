//! Momentum lattice `{1/N, ..., 1}^3`.
//!
//! Momenta are stored as integer indices `1..=N` per color so that exact
//! arithmetic stays in the integers; the physical component is `i / N`.

use num::{BigInt, BigRational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const RANK: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Momentum(pub [u32; RANK]);

impl Momentum {
    pub fn new(i1: u32, i2: u32, i3: u32) -> Self {
        Momentum([i1, i2, i3])
    }

    /// Component of color `c` (1-based).
    pub fn get(&self, c: usize) -> u32 {
        self.0[c - 1]
    }

    /// Copy with the color-`c` component replaced.
    pub fn with(&self, c: usize, v: u32) -> Self {
        let mut m = *self;
        m.0[c - 1] = v;
        m
    }

    /// `sum_c i_c^2`; the physical `|x|^2` is this over `N^2`.
    pub fn norm2_int(&self) -> u64 {
        self.0.iter().map(|&i| (i as u64) * (i as u64)).sum()
    }
}

/// Builds a triple from one scalar per color, in ascending color order.
pub fn assemble(parts: [(usize, u32); RANK]) -> Result<Momentum> {
    let mut out = [0u32; RANK];
    let mut seen = [false; RANK];
    for (c, v) in parts {
        if c == 0 || c > RANK || seen[c - 1] {
            return Err(Error::Argument(format!("color {c} missing or repeated in momentum assembly")));
        }
        seen[c - 1] = true;
        out[c - 1] = v;
    }
    Ok(Momentum(out))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    pub n: u32,
}

impl Grid {
    pub fn new(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::Argument("grid size N must be >= 1".into()));
        }
        Ok(Grid { n })
    }

    pub fn len(&self) -> usize {
        (self.n as usize).pow(RANK as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn axis(&self) -> impl Iterator<Item = u32> + Clone {
        1..=self.n
    }

    pub fn weight(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn contains(&self, m: &Momentum) -> bool {
        m.0.iter().all(|&i| i >= 1 && i <= self.n)
    }

    pub fn check(&self, m: &Momentum) -> Result<()> {
        if self.contains(m) {
            Ok(())
        } else {
            Err(Error::Argument(format!("momentum {:?} outside grid N={}", m.0, self.n)))
        }
    }

    /// Row-major index with color 1 slowest.
    pub fn index(&self, m: &Momentum) -> usize {
        let n = self.n as usize;
        ((m.0[0] as usize - 1) * n + (m.0[1] as usize - 1)) * n + (m.0[2] as usize - 1)
    }

    pub fn point(&self, idx: usize) -> Momentum {
        let n = self.n as usize;
        Momentum([
            (idx / (n * n)) as u32 + 1,
            ((idx / n) % n) as u32 + 1,
            (idx % n) as u32 + 1,
        ])
    }

    pub fn points(&self) -> impl Iterator<Item = Momentum> + '_ {
        (0..self.len()).map(move |i| self.point(i))
    }

    pub fn component(&self, i: u32) -> f64 {
        i as f64 / self.n as f64
    }

    pub fn norm2(&self, m: &Momentum) -> f64 {
        m.norm2_int() as f64 / (self.n as f64 * self.n as f64)
    }

    /// Exact `|x|^2`.
    pub fn norm2_exact(&self, m: &Momentum) -> BigRational {
        BigRational::new(BigInt::from(m.norm2_int()), BigInt::from(self.n as u64 * self.n as u64))
    }

    /// Exact `u^2 - v^2` for two axis indices.
    pub fn sq_diff_exact(&self, u: u32, v: u32) -> BigRational {
        let d = (u as i64) * (u as i64) - (v as i64) * (v as i64);
        BigRational::new(BigInt::from(d), BigInt::from(self.n as u64 * self.n as u64))
    }

    /// Parses physical components (e.g. `0.5`, `1/2`) into grid indices.
    pub fn parse_momentum(&self, s: &str) -> Result<Momentum> {
        let parts: Vec<&str> = s.split(',').map(|p| p.trim()).collect();
        if parts.len() != RANK {
            return Err(Error::Argument(format!("momentum '{s}' needs {RANK} comma-separated components")));
        }
        let mut out = [0u32; RANK];
        for (k, p) in parts.iter().enumerate() {
            let value = if let Some((a, b)) = p.split_once('/') {
                let a: f64 = a.trim().parse().map_err(|_| Error::Argument(format!("bad component '{p}'")))?;
                let b: f64 = b.trim().parse().map_err(|_| Error::Argument(format!("bad component '{p}'")))?;
                a / b
            } else {
                p.parse::<f64>().map_err(|_| Error::Argument(format!("bad component '{p}'")))?
            };
            let idx = value * self.n as f64;
            let r = idx.round();
            if (idx - r).abs() > 1e-9 || r < 1.0 || r > self.n as f64 {
                return Err(Error::Argument(format!("component {p} is not a point of the N={} grid", self.n)));
            }
            out[k] = r as u32;
        }
        Ok(Momentum(out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_roundtrip() {
        let g = Grid::new(3).unwrap();
        for (i, p) in g.points().enumerate() {
            assert_eq!(g.index(&p), i);
        }
        assert_eq!(g.len(), 27);
    }

    #[test]
    fn weights_sum_to_one() {
        let g = Grid::new(7).unwrap();
        let s: f64 = g.axis().map(|_| g.weight()).sum();
        assert!((s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn parse_accepts_fractions() {
        let g = Grid::new(4).unwrap();
        assert_eq!(g.parse_momentum("1/4, 0.5, 1").unwrap(), Momentum::new(1, 2, 4));
        assert!(g.parse_momentum("0.3,1,1").is_err());
    }

    #[test]
    fn assembly_orders_by_color() {
        let m = assemble([(3, 7), (1, 2), (2, 5)]).unwrap();
        assert_eq!(m, Momentum::new(2, 5, 7));
        assert!(assemble([(1, 1), (1, 2), (3, 3)]).is_err());
    }
}
