//! Perturbative ground truth: the truncated series engine, the exact Wick
//! oracle, and residual checks of the finite-N equations and the Ward
//! identity against it.

pub mod wick;

use num::{BigRational, Signed, Zero};
use serde::Serialize;

pub use crate::series::{Coeff, ExactSeries, Ring, TruncatedSeries};
pub use wick::WickOracle;

use crate::colored_graph::BoundaryClass;
use crate::error::Result;
use crate::grid::{Grid, Momentum};
use crate::scaling::{ExponentAssignment, Var};
use crate::sde_core::finite_n::Ctx;
use crate::sde_core::{
    assemble_f, exact_sde_rhs, literal_sde_rhs, series_solve_g2, solve_g2, FClass, Sector, SectorProvider,
    SolveOptions,
};

/// Exact rationals print as integers when integral.
pub fn rational_string(q: &BigRational) -> String {
    if q.is_integer() {
        q.to_integer().to_string()
    } else {
        q.to_string()
    }
}

/// Worst residual at one perturbative order.
#[derive(Clone, Debug, Serialize)]
pub struct OrderResidual {
    pub sector: String,
    pub order: usize,
    #[serde(rename = "N")]
    pub n: u32,
    pub residual: String,
    pub pass: bool,
    /// Arguments of the worst residual when it is nonzero.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst: Option<Vec<[u32; 3]>>,
}

fn tuples(grid: Grid, k: usize) -> Vec<Vec<Momentum>> {
    let pts: Vec<Momentum> = grid.points().collect();
    let mut out: Vec<Vec<Momentum>> = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|t| {
                pts.iter().map(move |p| {
                    let mut u = t.clone();
                    u.push(*p);
                    u
                })
            })
            .collect();
    }
    out
}

struct Tracker {
    worst: Vec<(BigRational, Option<Vec<Momentum>>)>,
}

impl Tracker {
    fn new(order: usize) -> Self {
        Tracker { worst: vec![(BigRational::zero(), None); order + 1] }
    }

    fn record(&mut self, diff: &ExactSeries, args: &[Momentum]) {
        for (k, slot) in self.worst.iter_mut().enumerate() {
            let v = diff.coeff(k).abs();
            if v > slot.0 {
                *slot = (v, Some(args.to_vec()));
            }
        }
    }

    fn finish(self, sector: &str, n: u32) -> Vec<OrderResidual> {
        self.worst
            .into_iter()
            .enumerate()
            .map(|(order, (r, args))| OrderResidual {
                sector: sector.to_string(),
                order,
                n,
                pass: r.is_zero(),
                residual: rational_string(&r),
                worst: args.map(|a| a.iter().map(|m| m.0).collect()),
            })
            .collect()
    }
}

/// Outcome of feeding Wick-oracle correlators into the finite-N equations.
#[derive(Clone, Debug, Serialize)]
pub struct ExpansionReport {
    pub sector: String,
    #[serde(rename = "N")]
    pub n: u32,
    /// Residuals of the exact finite-N equation; zero at every order.
    pub residuals: Vec<OrderResidual>,
    /// Lowest order at which the sector itself is nonzero somewhere.
    pub first_nonzero_order: Option<usize>,
    /// Whether the terms the large-N counting places at order three or
    /// later indeed vanish through the checked order.
    pub order_counting: bool,
    /// Residuals of the term-by-term large-N form, kept for diagnosis.
    /// `None` when no argument tuple has the distinct components it needs.
    pub literal: Option<Vec<OrderResidual>>,
    pub pass: bool,
}

/// Lowest order at which the sector is nonzero at some argument.
fn first_nonzero(oracle: &WickOracle, class: BoundaryClass) -> Result<Option<usize>> {
    let mut first: Option<usize> = None;
    for args in tuples(oracle.grid(), class.k()) {
        let s = oracle.sector(class, &args)?;
        if let Some(k) = (0..=oracle.order()).find(|&k| !s.coeff(k).is_zero()) {
            first = Some(first.map_or(k, |f: usize| f.min(k)));
        }
    }
    Ok(first)
}

/// True when `lambda * term` has no coefficient through `order`.
fn vanishes_below(term: &ExactSeries, order: usize) -> bool {
    (0..order).all(|k| term.coeff(k).is_zero())
}

fn order_counting(oracle: &WickOracle, sector: Sector) -> Result<bool> {
    let order = oracle.order();
    let asg = oracle.assignment();
    let grid = oracle.grid();
    match sector {
        // lambda * G_m enters the 2-point equation
        Sector::TwoPoint => {
            for args in tuples(grid, 2) {
                if !vanishes_below(&oracle.sector(BoundaryClass::MM, &args)?, order) {
                    return Ok(false);
                }
            }
        }
        // lambda * f with 6-point content enters the 4-point equations
        Sector::FourV1 | Sector::FourMM => {
            let classes: &[FClass] = if sector == Sector::FourV1 { &[FClass::Va, FClass::Vb, FClass::Vc] } else { &[FClass::MM] };
            for args in tuples(grid, 2) {
                for a in 1..=3 {
                    for s in grid.axis() {
                        for &c in classes {
                            if !vanishes_below(&assemble_f(c, a, s, &args, oracle, asg)?, order) {
                                return Ok(false);
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(true)
}

/// Exact residuals of the finite-N equation for `sector` at every argument
/// tuple of an `N`-point grid, orders `0..=order`.
pub fn check_finite_n_expansion(sector: Sector, n_small: u32, order: usize) -> Result<ExpansionReport> {
    let oracle = WickOracle::large_n(n_small, order)?;
    let asg = oracle.assignment().clone();
    let class = sector.class();
    let mut exact = Tracker::new(order);
    let mut literal = Tracker::new(order);
    let mut literal_seen = false;
    for args in tuples(oracle.grid(), class.k()) {
        let lhs = oracle.sector(class, &args)?;
        let rhs = exact_sde_rhs(sector, &asg, &oracle, &args)?;
        exact.record(&(rhs - lhs.clone()), &args);
        match literal_sde_rhs(sector, &asg, &oracle, &args) {
            Ok(l) => {
                literal_seen = true;
                literal.record(&(l - lhs), &args);
            }
            Err(crate::Error::Coincident(_)) => {}
            Err(e) => return Err(e),
        }
    }
    let residuals = exact.finish(sector.name(), n_small);
    let first_nonzero_order = first_nonzero(&oracle, class)?;
    let order_counting = order_counting(&oracle, sector)?;
    let mut pass = residuals.iter().all(|r| r.pass) && order_counting;
    if sector == Sector::FourMM && order >= 2 {
        pass &= first_nonzero_order == Some(2);
    }
    Ok(ExpansionReport {
        sector: sector.name().to_string(),
        n: n_small,
        residuals,
        first_nonzero_order,
        order_counting,
        literal: literal_seen.then(|| literal.finish(sector.name(), n_small)),
        pass,
    })
}

/// Ward identity check for the 2-point function at every `x` and `a1 != x1`.
#[derive(Clone, Debug, Serialize)]
pub struct WtiReport {
    #[serde(rename = "N")]
    pub n: u32,
    pub beta: String,
    pub pairs: usize,
    pub residuals: Vec<OrderResidual>,
    pub pass: bool,
}

/// Checks, with `a = (a1, x2, x3)`,
/// `[M(x) - M(a)] / (N^g (a1^2 - x1^2)) = M(x) M(a) + sum_r k4((x1;r), a | (a1;r), x)`
/// where `M = N^{alpha - 2 beta} G` is the full 2-point moment and `k4` the
/// connected 4-point moment assembled from `provider` with the powers of
/// `N` in `assignment`. An assignment other than the provider's own breaks
/// the identity.
pub fn check_wti_identity<P: SectorProvider + ?Sized>(provider: &P, assignment: &ExponentAssignment) -> Result<WtiReport> {
    let cx = Ctx::new(provider, assignment);
    let grid = cx.grid;
    let ng = cx.npow(&assignment.get(Var::Gamma))?;
    let mut tracker = Tracker::new(cx.order);
    let mut pairs = 0;
    for x in grid.points() {
        for a1 in grid.axis().filter(|&a1| a1 != x.get(1)) {
            let a = x.with(1, a1);
            let mx = cx.raw(BoundaryClass::M, &[x])?;
            let ma = cx.raw(BoundaryClass::M, &[a])?;
            let lhs = (mx.clone() - ma.clone()).scale_by(&(cx.inv_sq_diff(a1, x.get(1))? / ng.clone()));
            let mut rhs = mx * ma;
            for u in grid.axis() {
                for v in grid.axis() {
                    let b1 = Momentum::new(x.get(1), u, v);
                    let w1 = Momentum::new(a1, u, v);
                    rhs = rhs + cx.cumulant(&[b1, a], &[w1, x])?;
                }
            }
            tracker.record(&(lhs - rhs), &[x, a]);
            pairs += 1;
        }
    }
    let residuals = tracker.finish("wti", grid.n);
    let pass = residuals.iter().all(|r| r.pass);
    Ok(WtiReport { n: grid.n, beta: rational_string(&assignment.get(Var::Beta)), pairs, residuals, pass })
}

/// Order-`lambda` coefficient of the exact finite-N 2-point function:
/// `-(2/|x|^4) sum_c [(1/N^2) sum_q 1/|(x_c; q)|^2 + (1/N^2) sum_m 1/|(m; x_c^)|^2]`
/// where `(x_c; q)` keeps color `c` of `x` and `(m; x_c^)` keeps the others.
pub fn finite_n_first_order(grid: Grid, x: &Momentum) -> f64 {
    let n2 = (grid.n as f64).powi(2);
    let mut total = 0.0;
    for c in 1..=3 {
        let (b, d) = crate::sde_core::solver::others(c);
        for u in grid.axis() {
            for v in grid.axis() {
                total += 1.0 / grid.norm2(&x.with(b, u).with(d, v)) / n2;
            }
        }
        for m in grid.axis() {
            total += 1.0 / grid.norm2(&x.with(c, m)) / n2;
        }
    }
    -2.0 * total / grid.norm2(x).powi(2)
}

/// One probed momentum of the finite-N versus large-N comparison.
#[derive(Clone, Debug, Serialize)]
pub struct TrendPoint {
    pub x: [f64; 3],
    /// `|c1_N - c1_large_N|` per grid size.
    pub differences: Vec<f64>,
    pub decreasing: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrendReport {
    pub sizes: Vec<u32>,
    pub points: Vec<TrendPoint>,
    pub pass: bool,
}

/// Compares the order-`lambda` coefficient of the exact finite-N 2-point
/// function with the large-N series coefficient at physical momenta given
/// as fractions `num/den` of the unit interval.
pub fn large_n_trend(sizes: &[u32], probes: &[[(u32, u32); 3]]) -> Result<TrendReport> {
    let mut points = Vec::new();
    for probe in probes {
        let mut differences = Vec::new();
        for &n in sizes {
            let grid = Grid::new(n)?;
            let mut idx = [0u32; 3];
            for (i, &(p, q)) in probe.iter().enumerate() {
                if (p * n) % q != 0 {
                    return Err(crate::Error::Argument(format!("{p}/{q} is not on the N = {n} grid")));
                }
                idx[i] = p * n / q;
            }
            let x = Momentum(idx);
            grid.check(&x)?;
            let large = series_solve_g2::<f64>(grid, 1)?;
            differences.push((finite_n_first_order(grid, &x) - large.value(&x).coeff(1)).abs());
        }
        let decreasing = differences.windows(2).all(|w| w[1] < w[0]);
        points.push(TrendPoint {
            x: probe.map(|(p, q)| p as f64 / q as f64),
            differences,
            decreasing,
        });
    }
    let pass = points.iter().all(|p| p.decreasing);
    Ok(TrendReport { sizes: sizes.to_vec(), points, pass })
}

/// Series coefficients against Richardson-extrapolated central differences
/// of the numerical solution in `lambda` around zero.
#[derive(Clone, Debug, Serialize)]
pub struct DerivativeReport {
    #[serde(rename = "N")]
    pub n: u32,
    pub step: f64,
    pub c1_rel_error: f64,
    pub c2_rel_error: f64,
}

pub fn series_derivative_check(grid: Grid, step: f64) -> Result<DerivativeReport> {
    let opts = SolveOptions { tol: 1e-15, ..SolveOptions::default() };
    let solve = |l: f64| solve_g2(grid, l, opts).map(|t| t.values().to_vec());
    let g0 = solve(0.0)?;
    let at = |h: f64| -> Result<(Vec<f64>, Vec<f64>)> {
        let (p, m) = (solve(h)?, solve(-h)?);
        let d1 = p.iter().zip(&m).map(|(a, b)| (a - b) / (2.0 * h)).collect();
        // second derivative / 2 is c2
        let d2 = p.iter().zip(&m).zip(&g0).map(|((a, b), c)| (a - 2.0 * c + b) / (2.0 * h * h)).collect();
        Ok((d1, d2))
    };
    let (d1h, d2h) = at(step)?;
    let (d1w, d2w) = at(2.0 * step)?;
    let rich = |h: &[f64], w: &[f64]| -> Vec<f64> { h.iter().zip(w).map(|(a, b)| (4.0 * a - b) / 3.0).collect() };
    let (c1, c2) = (rich(&d1h, &d1w), rich(&d2h, &d2w));
    let series = series_solve_g2::<f64>(grid, 2)?;
    let mut e1: f64 = 0.0;
    let mut e2: f64 = 0.0;
    for (i, s) in series.values().iter().enumerate() {
        e1 = e1.max((c1[i] - s.coeff(1)).abs() / s.coeff(1).abs());
        e2 = e2.max((c2[i] - s.coeff(2)).abs() / s.coeff(2).abs());
    }
    Ok(DerivativeReport { n: grid.n, step, c1_rel_error: e1, c2_rel_error: e2 })
}
