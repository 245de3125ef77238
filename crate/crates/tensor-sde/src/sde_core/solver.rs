//! The closed large-N 2-point equation
//! `G(x) = 1 / (|x|^2 + sum_a sigma_a(x_a))`, with
//! `sigma_a(t) = 2 lambda * avg_{q_b, q_c} G(t_a q_b q_c)`, solved on a grid.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{assemble, Grid, Momentum, RANK};
use crate::series::{Coeff, Ring, TruncatedSeries};

/// Read access to a 2-point table, shared by the numeric and series paths.
pub trait TwoPoint<R: Ring>: Sync {
    fn grid(&self) -> Grid;
    fn g2(&self, m: &Momentum) -> R;
    /// `2 lambda` times the average of `G` over the two colors other than `a`,
    /// with color `a` pinned at axis index `t`.
    fn sigma(&self, a: usize, t: u32) -> R;
    fn coupling(&self) -> R;
}

/// The two colors other than `a`, ascending.
pub fn others(a: usize) -> (usize, usize) {
    match a {
        1 => (2, 3),
        2 => (1, 3),
        _ => (1, 2),
    }
}

/// Momentum with color `a` at `t` and the other two colors at `(u, v)`.
pub fn with_pinned(a: usize, t: u32, u: u32, v: u32) -> Momentum {
    let (b, c) = others(a);
    assemble([(a, t), (b, u), (c, v)]).expect("distinct colors")
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub relaxation: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol: 1e-12, max_iter: 10_000, relaxation: 1.0 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub iterations: usize,
    pub residual: f64,
    pub relaxation: f64,
    pub warning: Option<String>,
}

#[derive(Clone, Debug)]
pub struct G2Table {
    pub grid: Grid,
    pub lambda: f64,
    values: Vec<f64>,
    // sigma[a - 1][t - 1]
    sigma: [Vec<f64>; RANK],
    pub report: ConvergenceReport,
}

impl G2Table {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, m: &Momentum) -> f64 {
        self.values[self.grid.index(m)]
    }

    /// `(1/N^2) sum_{q_b,q_c} G(t_a q_b q_c)^2`, the derivative weight used in
    /// the confluent 4-point limit.
    pub fn square_average(&self, a: usize, t: u32) -> f64 {
        let g = self.grid;
        let mut s = 0.0;
        for u in g.axis() {
            for v in g.axis() {
                let x = self.value(&with_pinned(a, t, u, v));
                s += x * x;
            }
        }
        s * g.weight() * g.weight()
    }

    /// CSV with columns `x1,x2,x3,value`; floats in shortest round-trip form.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x1,x2,x3,value\n");
        for (i, p) in self.grid.points().enumerate() {
            let c = |k: usize| self.grid.component(p.0[k]);
            out.push_str(&format!("{:?},{:?},{:?},{:?}\n", c(0), c(1), c(2), self.values[i]));
        }
        out
    }
}

impl TwoPoint<f64> for G2Table {
    fn grid(&self) -> Grid {
        self.grid
    }
    fn g2(&self, m: &Momentum) -> f64 {
        self.value(m)
    }
    fn sigma(&self, a: usize, t: u32) -> f64 {
        self.sigma[a - 1][t as usize - 1]
    }
    fn coupling(&self) -> f64 {
        self.lambda
    }
}

fn sigma_of<R, F>(grid: Grid, zero: &R, lambda2: &R, g: F) -> [Vec<R>; RANK]
where
    R: Ring + Send + Sync,
    F: Fn(&Momentum) -> R + Sync,
{
    let n = grid.n as i64;
    let mut out: [Vec<R>; RANK] = Default::default();
    for (a, slot) in out.iter_mut().enumerate() {
        let a = a + 1;
        *slot = grid
            .axis()
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|t| {
                let mut s = zero.clone();
                for u in grid.axis() {
                    for v in grid.axis() {
                        s = s + g(&with_pinned(a, t, u, v));
                    }
                }
                lambda2.clone() * s.scale(1, n * n)
            })
            .collect();
    }
    out
}

fn picard_map(grid: Grid, sigma: &[Vec<f64>; RANK]) -> Vec<f64> {
    (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let p = grid.point(i);
            let mut d = grid.norm2(&p);
            for a in 1..=RANK {
                d += sigma[a - 1][p.get(a) as usize - 1];
            }
            1.0 / d
        })
        .collect()
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.par_iter().zip(b.par_iter()).map(|(x, y)| (x - y).abs()).reduce(|| 0.0, f64::max)
}

/// Sup-norm of `F(G) - G` for the discrete large-N map `F`.
pub fn residual(table: &G2Table) -> f64 {
    let sigma = sigma_of(table.grid, &0.0, &(2.0 * table.lambda), |m| table.value(m));
    sup_diff(&picard_map(table.grid, &sigma), &table.values)
}

/// Damped Picard iteration from the free propagator. With `relaxation = 1`
/// a diverging or oscillating run restarts once at `1/2`.
pub fn solve_g2(grid: Grid, lambda: f64, opts: SolveOptions) -> Result<G2Table> {
    if !(opts.tol > 0.0) {
        return Err(Error::Argument("tolerance must be > 0".into()));
    }
    if !(opts.relaxation > 0.0 && opts.relaxation <= 1.0) {
        return Err(Error::Argument("relaxation must lie in (0, 1]".into()));
    }
    if !lambda.is_finite() {
        return Err(Error::Argument("coupling must be finite".into()));
    }
    let warning = (lambda < 0.0).then(|| "negative coupling: convergence is not guaranteed".to_string());
    let free: Vec<f64> = grid.points().map(|p| 1.0 / grid.norm2(&p)).collect();
    let schedule: Vec<f64> = if opts.relaxation == 1.0 { vec![1.0, 0.5] } else { vec![opts.relaxation] };
    let mut total = 0;
    let mut last = f64::INFINITY;
    for &omega in &schedule {
        let mut g = free.clone();
        let mut best = f64::INFINITY;
        let mut stalled = 0;
        for _ in 0..opts.max_iter {
            total += 1;
            let sigma = sigma_of(grid, &0.0, &(2.0 * lambda), |m| g[grid.index(m)]);
            let f = picard_map(grid, &sigma);
            let res = sup_diff(&f, &g);
            last = res;
            if !res.is_finite() {
                break;
            }
            if res < opts.tol {
                return Ok(G2Table {
                    grid,
                    lambda,
                    values: g,
                    sigma,
                    report: ConvergenceReport { iterations: total, residual: res, relaxation: omega, warning },
                });
            }
            // no progress for a long stretch means oscillation
            if res < best {
                best = res;
                stalled = 0;
            } else {
                stalled += 1;
                if stalled > 50 {
                    break;
                }
            }
            g.par_iter_mut().zip(f.par_iter()).for_each(|(x, y)| *x = (1.0 - omega) * *x + omega * y);
        }
    }
    Err(Error::NoConvergence { iterations: total, residual: last })
}

/// Exact (or floating) perturbative solution of the large-N 2-point equation
/// at every grid point.
#[derive(Clone, Debug)]
pub struct SeriesTable<T: Coeff> {
    pub grid: Grid,
    pub order: usize,
    values: Vec<TruncatedSeries<T>>,
    sigma: [Vec<TruncatedSeries<T>>; RANK],
}

impl<T: Coeff> SeriesTable<T> {
    pub fn value(&self, m: &Momentum) -> &TruncatedSeries<T> {
        &self.values[self.grid.index(m)]
    }

    pub fn values(&self) -> &[TruncatedSeries<T>] {
        &self.values
    }
}

impl<T: Coeff + Send + Sync> TwoPoint<TruncatedSeries<T>> for SeriesTable<T> {
    fn grid(&self) -> Grid {
        self.grid
    }
    fn g2(&self, m: &Momentum) -> TruncatedSeries<T> {
        self.value(m).clone()
    }
    fn sigma(&self, a: usize, t: u32) -> TruncatedSeries<T> {
        self.sigma[a - 1][t as usize - 1].clone()
    }
    fn coupling(&self) -> TruncatedSeries<T> {
        TruncatedSeries::monomial(T::one(), 1, self.order)
    }
}

/// Expands the large-N 2-point equation to order `order` in the coupling by
/// repeated substitution; each pass fixes one more coefficient.
pub fn series_solve_g2<T: Coeff + Send + Sync>(grid: Grid, order: usize) -> Result<SeriesTable<T>> {
    if order > 4 {
        return Err(Error::Budget(format!("series order {order} exceeds 4")));
    }
    let n2 = (grid.n as i64) * (grid.n as i64);
    let norm = |p: &Momentum| TruncatedSeries::constant_value(T::from_ratio(p.norm2_int() as i64, n2), order);
    let zero = TruncatedSeries::<T>::zero(order);
    let lambda2 = TruncatedSeries::monomial(T::from_ratio(2, 1), 1, order);
    let mut values: Vec<TruncatedSeries<T>> =
        grid.points().map(|p| norm(&p).reciprocal()).collect::<Result<_>>()?;
    for _ in 0..order {
        let sigma = sigma_of(grid, &zero, &lambda2, |m| values[grid.index(m)].clone());
        values = (0..grid.len())
            .into_par_iter()
            .map(|i| {
                let p = grid.point(i);
                let mut d = norm(&p);
                for a in 1..=RANK {
                    d = d + sigma[a - 1][p.get(a) as usize - 1].clone();
                }
                d.reciprocal()
            })
            .collect::<Result<_>>()?;
    }
    let sigma = sigma_of(grid, &zero, &lambda2, |m| values[grid.index(m)].clone());
    Ok(SeriesTable { grid, order, values, sigma })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::BigRational;

    #[test]
    fn free_theory_is_exact() {
        let g = Grid::new(4).unwrap();
        let t = solve_g2(g, 0.0, SolveOptions::default()).unwrap();
        for p in g.points() {
            assert_eq!(t.value(&p), 1.0 / g.norm2(&p));
        }
    }

    #[test]
    fn single_point_quadratic_root() {
        let t = solve_g2(Grid::new(1).unwrap(), 1.0, SolveOptions::default()).unwrap();
        let want = (-3.0 + 33f64.sqrt()) / 12.0;
        assert!((t.value(&Momentum::new(1, 1, 1)) - want).abs() < 1e-12);
        assert!(residual(&t) < 1e-12);
    }

    #[test]
    fn bad_options_rejected() {
        let g = Grid::new(2).unwrap();
        let o = SolveOptions { tol: 0.0, ..Default::default() };
        assert!(matches!(solve_g2(g, 0.1, o), Err(Error::Argument(_))));
        let o = SolveOptions { relaxation: 1.5, ..Default::default() };
        assert!(solve_g2(g, 0.1, o).is_err());
    }

    #[test]
    fn iteration_cap_reports_residual() {
        let o = SolveOptions { max_iter: 2, relaxation: 0.5, ..Default::default() };
        match solve_g2(Grid::new(3).unwrap(), 0.5, o) {
            Err(Error::NoConvergence { iterations, residual }) => {
                assert_eq!(iterations, 2);
                assert!(residual > 0.0);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn series_leading_coefficient_is_free() {
        let g = Grid::new(2).unwrap();
        let s = series_solve_g2::<BigRational>(g, 2).unwrap();
        for p in g.points() {
            assert_eq!(s.value(&p).coeff(0), g.norm2_exact(&p).recip());
        }
    }

    #[test]
    fn series_order_budget() {
        assert!(matches!(series_solve_g2::<f64>(Grid::new(2).unwrap(), 5), Err(Error::Budget(_))));
    }
}
