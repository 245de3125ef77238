//! Closed large-N equations for the 4- and 6-point sectors.
//!
//! Every evaluator is generic over [`Ring`], so the same code runs on an
//! `f64` table from [`solve_g2`](super::solve_g2) and on an exact series
//! table from [`series_solve_g2`](super::series_solve_g2).

use std::sync::OnceLock;

use num::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use super::solver::{others, with_pinned, ConvergenceReport, G2Table, SeriesTable, SolveOptions, TwoPoint};
use crate::colored_graph::{classify, BoundaryClass, Classification, ColoredGraph};
use crate::error::{Error, Result};
use crate::grid::{assemble, Grid, Momentum, RANK};
use crate::scaling::{ExponentAssignment, Var};
use crate::series::{Coeff, Ring, TruncatedSeries};

fn check_color(a: usize) -> Result<()> {
    if (1..=RANK).contains(&a) {
        Ok(())
    } else {
        Err(Error::Argument(format!("color {a} outside 1..={RANK}")))
    }
}

fn check_points<R: Ring, P: TwoPoint<R>>(tp: &P, pts: &[&Momentum]) -> Result<()> {
    let g = tp.grid();
    pts.iter().try_for_each(|m| g.check(m))
}

/// `u^2 - v^2` in index units; the physical value is this over `N^2`.
fn sq_diff(u: u32, v: u32) -> i64 {
    (u as i64) * (u as i64) - (v as i64) * (v as i64)
}

fn n2(g: Grid) -> i64 {
    (g.n as i64) * (g.n as i64)
}

/// `(f(u) - f(v)) / (u^2 - v^2)` with physical squares.
fn quotient<R: Ring>(g: Grid, num: R, u: u32, v: u32, what: &str) -> Result<R> {
    let d = sq_diff(u, v);
    if d == 0 {
        return Err(Error::Coincident(format!("{what}: components {u}/{} coincide", g.n)));
    }
    Ok(num.scale(n2(g), d))
}

/// `2 lambda (1/N^2) sum_{q} G(t_a q)^2`.
pub fn square_average<R: Ring, P: TwoPoint<R>>(tp: &P, a: usize, t: u32) -> R {
    let g = tp.grid();
    let mut acc: Option<R> = None;
    for u in g.axis() {
        for v in g.axis() {
            let x = tp.g2(&with_pinned(a, t, u, v));
            let sq = x.clone() * x;
            acc = Some(match acc {
                Some(s) => s + sq,
                None => sq,
            });
        }
    }
    let s = acc.expect("grid axis is non-empty");
    let nn = n2(g);
    (tp.coupling() * s).scale(2, nn)
}

/// Connected 4-point function of the pillow sector `V_a`:
/// `-2 lambda G(p1) G(y) [G(x) - G(p2)] / (y_a^2 - x_a^2)` with
/// `p1 = y|_{a -> x_a}` and `p2 = x|_{a -> y_a}`. Requires `x_a != y_a`.
pub fn eval_g4_connected<R: Ring, P: TwoPoint<R>>(tp: &P, a: usize, x: &Momentum, y: &Momentum) -> Result<R> {
    check_color(a)?;
    check_points(tp, &[x, y])?;
    let g = tp.grid();
    let p1 = y.with(a, x.get(a));
    let p2 = x.with(a, y.get(a));
    let q = quotient(g, tp.g2(x) - tp.g2(&p2), y.get(a), x.get(a), "G4 difference quotient")?;
    Ok((tp.coupling() * tp.g2(&p1) * tp.g2(y) * q).scale(-2, 1))
}

/// The same function rewritten through the 2-point equation,
/// `-2 lambda G(p1) G(y) G(x) G(p2) (1 + D)` with `D` the difference
/// quotient of `sigma_a`. At `x_a = y_a` the quotient is replaced by its
/// continuum limit `1 + D = 1 / (1 + 2 lambda avg_q G(t_a q)^2)`.
pub fn eval_g4_limit<R: Ring, P: TwoPoint<R>>(tp: &P, a: usize, x: &Momentum, y: &Momentum) -> Result<R> {
    check_color(a)?;
    check_points(tp, &[x, y])?;
    let g = tp.grid();
    let p1 = y.with(a, x.get(a));
    let p2 = x.with(a, y.get(a));
    let gx = tp.g2(x);
    let one = gx.constant(1, 1);
    let factor = if x.get(a) != y.get(a) {
        let d = quotient(g, tp.sigma(a, y.get(a)) - tp.sigma(a, x.get(a)), y.get(a), x.get(a), "sigma quotient")?;
        one + d
    } else {
        (one + square_average(tp, a, x.get(a)))
            .try_recip()
            .ok_or_else(|| Error::Coincident("confluent limit is singular".into()))?
    };
    Ok((tp.coupling() * tp.g2(&p1) * tp.g2(y) * gx * tp.g2(&p2) * factor).scale(-2, 1))
}

/// Disconnected 4-point function `G_m(x, y)` at fixed `y`, over all `x`.
#[derive(Clone, Debug)]
pub struct G4mSlice<R> {
    pub grid: Grid,
    pub y: Momentum,
    values: Vec<R>,
    pub report: Option<ConvergenceReport>,
}

impl<R: Clone> G4mSlice<R> {
    pub fn value(&self, x: &Momentum) -> R {
        self.values[self.grid.index(x)].clone()
    }

    pub fn values(&self) -> &[R] {
        &self.values
    }
}

/// Per-point prefactor `-2 lambda G(x)^2` and source `sum_a s_a(x_a)` with
/// `s_a(t) = sum_{c != a} (1/N) sum_{q_b} G4_c((t_a, q_b, y_c), y)`.
fn g4m_source<R: Ring + Send + Sync, P: TwoPoint<R>>(tp: &P, y: &Momentum) -> Result<(Vec<R>, Vec<R>)> {
    let g = tp.grid();
    let n = g.n as i64;
    let mut s: [Vec<R>; RANK] = Default::default();
    for (ai, slot) in s.iter_mut().enumerate() {
        let a = ai + 1;
        *slot = g
            .axis()
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|t| -> Result<R> {
                let mut acc: Option<R> = None;
                for c in (1..=RANK).filter(|&c| c != a) {
                    let b = 6 - a - c;
                    for q in g.axis() {
                        let w = assemble([(a, t), (b, q), (c, y.get(c))])?;
                        let v = eval_g4_limit(tp, c, &w, y)?.scale(1, n);
                        acc = Some(match acc {
                            Some(x) => x + v,
                            None => v,
                        });
                    }
                }
                Ok(acc.expect("two colors contribute"))
            })
            .collect::<Result<Vec<R>>>()?;
    }
    let pref: Vec<R> = (0..g.len())
        .into_par_iter()
        .map(|i| {
            let x = tp.g2(&g.point(i));
            (tp.coupling() * x.clone() * x).scale(-2, 1)
        })
        .collect();
    let src: Vec<R> = (0..g.len())
        .into_par_iter()
        .map(|i| {
            let p = g.point(i);
            let mut acc = s[0][p.get(1) as usize - 1].clone();
            for a in 2..=RANK {
                acc = acc + s[a - 1][p.get(a) as usize - 1].clone();
            }
            acc
        })
        .collect();
    Ok((pref, src))
}

/// One substitution `G_m <- -2 lambda G(x)^2 [S(x) + sum_a avg_q G_m((x_a q), y)]`.
fn g4m_step<R: Ring + Send + Sync>(g: Grid, pref: &[R], src: &[R], cur: &[R]) -> Vec<R> {
    let nn = n2(g);
    let mut t: [Vec<R>; RANK] = Default::default();
    for (ai, slot) in t.iter_mut().enumerate() {
        let a = ai + 1;
        *slot = g
            .axis()
            .map(|tv| {
                let mut acc: Option<R> = None;
                for u in g.axis() {
                    for v in g.axis() {
                        let x = cur[g.index(&with_pinned(a, tv, u, v))].clone();
                        acc = Some(match acc {
                            Some(s) => s + x,
                            None => x,
                        });
                    }
                }
                acc.expect("non-empty axis").scale(1, nn)
            })
            .collect();
    }
    (0..g.len())
        .into_par_iter()
        .map(|i| {
            let p = g.point(i);
            let mut acc = src[i].clone();
            for a in 1..=RANK {
                acc = acc + t[a - 1][p.get(a) as usize - 1].clone();
            }
            pref[i].clone() * acc
        })
        .collect()
}

/// Solves the linear equation for `G_m(., y)` by Picard iteration from zero.
pub fn solve_g4_disconnected(table: &G2Table, y: &Momentum, opts: SolveOptions) -> Result<G4mSlice<f64>> {
    if !(opts.tol > 0.0) {
        return Err(Error::Argument("tolerance must be > 0".into()));
    }
    table.grid.check(y)?;
    let g = table.grid;
    let (pref, src) = g4m_source(table, y)?;
    let mut cur = vec![0.0; g.len()];
    let mut res = f64::INFINITY;
    for it in 1..=opts.max_iter {
        let next = g4m_step(g, &pref, &src, &cur);
        res = next.iter().zip(&cur).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        cur = next;
        if !res.is_finite() {
            break;
        }
        if res < opts.tol {
            let report = ConvergenceReport { iterations: it, residual: res, relaxation: 1.0, warning: None };
            return Ok(G4mSlice { grid: g, y: *y, values: cur, report: Some(report) });
        }
    }
    Err(Error::NoConvergence { iterations: opts.max_iter, residual: res })
}

/// Perturbative `G_m(., y)`; the prefactor is `O(lambda)`, so `order + 1`
/// substitutions fix every coefficient.
pub fn series_g4_disconnected<T: Coeff + Send + Sync>(
    table: &SeriesTable<T>,
    y: &Momentum,
) -> Result<G4mSlice<TruncatedSeries<T>>> {
    table.grid.check(y)?;
    let g = table.grid;
    let (pref, src) = g4m_source(table, y)?;
    let mut cur = vec![TruncatedSeries::zero(table.order); g.len()];
    for _ in 0..=table.order {
        cur = g4m_step(g, &pref, &src, &cur);
    }
    Ok(G4mSlice { grid: g, y: *y, values: cur, report: None })
}

/// Connected 6-point sectors with an algebraic large-N equation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum G6Class {
    G(usize),
    F(usize),
    K,
}

impl G6Class {
    pub fn boundary_class(&self) -> BoundaryClass {
        match *self {
            G6Class::G(a) => BoundaryClass::G(a),
            G6Class::F(a) => BoundaryClass::F(a),
            G6Class::K => BoundaryClass::K,
        }
    }

    pub fn from_boundary(c: BoundaryClass) -> Option<G6Class> {
        match c {
            BoundaryClass::G(a) => Some(G6Class::G(a)),
            BoundaryClass::F(a) => Some(G6Class::F(a)),
            BoundaryClass::K => Some(G6Class::K),
            _ => None,
        }
    }
}

/// One swap term of the K equation: exchanging the color-`a` edges of the
/// first black and black `rho` turns K into `class`; `iso` orders its
/// arguments, and white `gamma` is the one whose color-`a` component moves
/// to that of white `kappa`.
#[derive(Clone, Debug, Serialize)]
pub struct KSwapTerm {
    pub color: usize,
    pub rho: usize,
    pub class: BoundaryClass,
    pub whites: [usize; 3],
    pub gamma: usize,
    pub kappa: usize,
}

/// The six swap terms of the K equation, derived from the graphs.
pub fn k_swap_terms() -> &'static [KSwapTerm] {
    static TERMS: OnceLock<Vec<KSwapTerm>> = OnceLock::new();
    TERMS.get_or_init(|| {
        let rows = BoundaryClass::K.black_spec();
        let k = ColoredGraph::from_black_spec(&rows).expect("K builds");
        let mut out = Vec::new();
        for a in 1..=RANK {
            for rho in 1..3 {
                let swapped = k.swap(a, 3, 3 + rho).expect("valid swap");
                match classify(&swapped).expect("boundary graph") {
                    Classification::Known { class, iso } => out.push(KSwapTerm {
                        color: a,
                        rho,
                        class,
                        whites: [iso[0], iso[1], iso[2]],
                        gamma: rows[0][a - 1],
                        kappa: rows[rho][a - 1],
                    }),
                    other => panic!("swap of K left the catalog: {other:?}"),
                }
            }
        }
        out
    })
}

fn g6_g<R: Ring, P: TwoPoint<R>>(tp: &P, a: usize, x: &Momentum, y: &Momentum, z: &Momentum) -> Result<R> {
    let g = tp.grid();
    let p1 = y.with(a, x.get(a));
    let first = tp.g2(y)
        * quotient(
            g,
            eval_g4_connected(tp, a, x, z)? - eval_g4_connected(tp, a, &x.with(a, y.get(a)), z)?,
            y.get(a),
            x.get(a),
            "G6_a first quotient",
        )?;
    let second = eval_g4_connected(tp, a, y, z)?
        * quotient(g, tp.g2(x) - tp.g2(&x.with(a, z.get(a))), z.get(a), x.get(a), "G6_a second quotient")?;
    Ok((tp.coupling() * tp.g2(&p1) * (first + second)).scale(-2, 1))
}

fn g6_f<R: Ring, P: TwoPoint<R>>(tp: &P, a: usize, x: &Momentum, y: &Momentum, z: &Momentum) -> Result<R> {
    let g = tp.grid();
    let (b, c) = others(a);
    let p1 = x.with(b, y.get(b));
    let q = quotient(
        g,
        eval_g4_connected(tp, c, y, z)? - eval_g4_connected(tp, c, &y.with(b, x.get(b)), z)?,
        x.get(b),
        y.get(b),
        "F quotient",
    )?;
    Ok((tp.coupling() * tp.g2(&p1) * tp.g2(x) * q).scale(-2, 1))
}

fn g6_k<R: Ring, P: TwoPoint<R>>(tp: &P, x: &Momentum, y: &Momentum, z: &Momentum) -> Result<R> {
    let g = tp.grid();
    let xs = [*x, *y, *z];
    let s = assemble([(1, x.get(1)), (2, y.get(2)), (3, z.get(3))])?;
    let mut acc: Option<R> = None;
    for t in k_swap_terms() {
        let a = t.color;
        let pa = xs[t.kappa].get(a);
        let sa = xs[t.gamma].get(a);
        let mut moved = xs;
        moved[t.gamma] = moved[t.gamma].with(a, pa);
        let f = |w: &[Momentum; 3]| {
            let g6 = G6Class::from_boundary(t.class).expect("K swaps give F classes");
            eval_g6(tp, g6, &w[t.whites[0]], &w[t.whites[1]], &w[t.whites[2]])
        };
        let term = quotient(g, f(&xs)? - f(&moved)?, pa, sa, "K swap quotient")?;
        acc = Some(match acc {
            Some(v) => v + term,
            None => term,
        });
    }
    Ok((tp.coupling() * tp.g2(&s) * acc.expect("six terms")).scale(-2, 1))
}

/// Right-hand side of the large-N equation of a connected 6-point sector.
pub fn eval_g6<R: Ring, P: TwoPoint<R>>(
    tp: &P,
    class: G6Class,
    x: &Momentum,
    y: &Momentum,
    z: &Momentum,
) -> Result<R> {
    check_points(tp, &[x, y, z])?;
    match class {
        G6Class::G(a) => {
            check_color(a)?;
            g6_g(tp, a, x, y, z)
        }
        G6Class::F(a) => {
            check_color(a)?;
            g6_f(tp, a, x, y, z)
        }
        G6Class::K => g6_k(tp, x, y, z),
    }
}

/// Size of the 4-point terms in the finite-N 2-point equation relative to
/// the free term, with the powers of `N` taken from `assignment`:
/// `(2 lambda/|x|^2) |sum_a [N^{e1} G4_a(x,x) + N^{e2} avg_q G_m((x_a q), x)
///  + N^{e3} sum_{c != a} avg_{q_b} G4_c(x, x|_{b -> q_b})]|`.
pub fn decoupling_magnitude(
    table: &G2Table,
    assignment: &ExponentAssignment,
    x: &Momentum,
    opts: SolveOptions,
) -> Result<f64> {
    let g = table.grid;
    g.check(x)?;
    let f = |v: Var| assignment.get(v).to_f64().expect("finite exponent");
    let base = 8.0 * f(Var::Beta) - 5.0 * f(Var::Gamma) - f(Var::Delta);
    let n = g.n as f64;
    let e1 = n.powf(f(Var::AlphaV) - base);
    let e2 = n.powf(f(Var::AlphaMM) + 2.0 - base);
    let e3 = n.powf(f(Var::AlphaV) + 1.0 - base);
    let gm = solve_g4_disconnected(table, x, opts)?;
    let mut total = 0.0;
    for a in 1..=RANK {
        total += e1 * eval_g4_limit(table, a, x, x)?;
        let mut avg = 0.0;
        for u in g.axis() {
            for v in g.axis() {
                avg += gm.value(&with_pinned(a, x.get(a), u, v));
            }
        }
        total += e2 * avg / (n * n);
        for c in (1..=RANK).filter(|&c| c != a) {
            let b = 6 - a - c;
            let mut s = 0.0;
            for q in g.axis() {
                s += eval_g4_limit(table, c, x, &x.with(b, q))?;
            }
            total += e3 * s / n;
        }
    }
    Ok(2.0 * table.lambda / g.norm2(x) * total.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sde_core::solver::{series_solve_g2, solve_g2};
    use num::BigRational;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::from_ratio(n, d)
    }

    #[test]
    fn order_one_pillow_closed_form() {
        let g = Grid::new(3).unwrap();
        let t = series_solve_g2::<BigRational>(g, 2).unwrap();
        for (x, y) in [(Momentum::new(1, 2, 3), Momentum::new(2, 3, 1)), (Momentum::new(3, 1, 1), Momentum::new(1, 1, 2))] {
            let v = eval_g4_connected(&t, 1, &x, &y).unwrap();
            assert!(v.coeff(0) == q(0, 1));
            let n2 = |m: &Momentum| g.norm2_exact(m);
            let want = q(-2, 1)
                / (n2(&x) * n2(&y) * n2(&Momentum::new(x.get(1), y.get(2), y.get(3))) * n2(&Momentum::new(y.get(1), x.get(2), x.get(3))));
            assert_eq!(v.coeff(1), want);
        }
    }

    #[test]
    fn limit_form_agrees_off_the_diagonal() {
        let g = Grid::new(4).unwrap();
        let t = series_solve_g2::<BigRational>(g, 3).unwrap();
        let (x, y) = (Momentum::new(1, 2, 4), Momentum::new(3, 4, 2));
        for a in 1..=3 {
            assert_eq!(eval_g4_connected(&t, a, &x, &y).unwrap(), eval_g4_limit(&t, a, &x, &y).unwrap());
        }
    }

    #[test]
    fn coincident_components_rejected() {
        let t = solve_g2(Grid::new(2).unwrap(), 0.1, SolveOptions::default()).unwrap();
        let x = Momentum::new(1, 1, 2);
        let err = eval_g4_connected(&t, 1, &x, &Momentum::new(1, 2, 1));
        assert!(matches!(err, Err(Error::Coincident(_))));
        assert!(eval_g4_limit(&t, 1, &x, &Momentum::new(1, 2, 1)).is_ok());
    }

    #[test]
    fn disconnected_starts_at_second_order() {
        let g = Grid::new(2).unwrap();
        let t = series_solve_g2::<BigRational>(g, 3).unwrap();
        let s = series_g4_disconnected(&t, &Momentum::new(1, 2, 2)).unwrap();
        assert!(s.values().iter().all(|v| v.coeff(0) == q(0, 1) && v.coeff(1) == q(0, 1)));
        assert!(s.values().iter().any(|v| v.coeff(2) != q(0, 1)));
    }

    #[test]
    fn numeric_disconnected_matches_series() {
        let g = Grid::new(3).unwrap();
        let y = Momentum::new(2, 1, 3);
        let lam = 1e-5;
        let t = solve_g2(g, lam, SolveOptions::default()).unwrap();
        let gm = solve_g4_disconnected(&t, &y, SolveOptions::default()).unwrap();
        let s = series_solve_g2::<f64>(g, 4).unwrap();
        let sm = series_g4_disconnected(&s, &y).unwrap();
        for p in g.points() {
            let want = sm.value(&p).eval(&lam);
            assert!((gm.value(&p) - want).abs() < 1e-9 * want.abs().max(1e-12) + 1e-15, "{p:?} {} {want}", gm.value(&p));
        }
    }

    #[test]
    fn k_swaps_land_in_f_classes() {
        let terms = k_swap_terms();
        assert_eq!(terms.len(), 6);
        for t in terms {
            assert!(matches!(t.class, BoundaryClass::F(_)), "{t:?}");
            assert_ne!(t.gamma, t.kappa);
        }
    }

    #[test]
    fn six_point_orders() {
        let g = Grid::new(4).unwrap();
        let t = series_solve_g2::<BigRational>(g, 3).unwrap();
        let (x, y, z) = (Momentum::new(1, 2, 3), Momentum::new(2, 3, 4), Momentum::new(4, 1, 2));
        let zero = q(0, 1);
        for c in [G6Class::G(1), G6Class::G(2), G6Class::F(1), G6Class::F(3)] {
            let v = eval_g6(&t, c, &x, &y, &z).unwrap();
            assert_eq!(v.coeff(0), zero);
            assert_eq!(v.coeff(1), zero);
            assert_ne!(v.coeff(2), zero, "{c:?}");
        }
        let k = eval_g6(&t, G6Class::K, &x, &y, &z).unwrap();
        assert_eq!(k.coeff(2), zero);
    }
}
