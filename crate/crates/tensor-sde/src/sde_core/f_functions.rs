//! Six-point source terms of the 2- and 4-point equations.
//!
//! `f^{(a)}_{B, s_a}` collects the 6-point (or, for `B = m`, 4-point)
//! correlators generated by the color-`a` interaction acting on a boundary
//! graph `B`. Every correlator carries its own factor `N^{alpha(B')}`; sums
//! over free indices are plain (unnormalized) sums. Colors `b < c` are the
//! two colors other than `a`.

use num::BigRational;
use serde::Serialize;

use super::finite_n::{Ctx, SectorProvider};
use super::solver::others;
use crate::colored_graph::BoundaryClass;
use crate::error::{Error, Result};
use crate::grid::{assemble, Momentum, RANK};
use crate::scaling::ExponentAssignment;
use crate::series::ExactSeries;

/// Graph on which the interaction acts, relative to the color `a`:
/// `Va` is the pillow of color `a`, `Vb`/`Vc` the pillows of the smaller and
/// larger remaining colors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum FClass {
    M,
    Va,
    Vb,
    Vc,
    MM,
}

impl FClass {
    pub fn arity(&self) -> usize {
        match self {
            FClass::M => 1,
            _ => 2,
        }
    }

    /// Number of automorphisms of the underlying boundary graph.
    pub fn automorphisms(&self) -> usize {
        match self {
            FClass::M => 1,
            _ => 2,
        }
    }
}

fn third(r: i64) -> BigRational {
    BigRational::new(1.into(), r.into())
}

struct Env<'c, 'a, P: SectorProvider + ?Sized> {
    cx: &'c Ctx<'a, P>,
    a: usize,
    b: usize,
    c: usize,
    s: u32,
}

impl<P: SectorProvider + ?Sized> Env<'_, '_, P> {
    /// Triple with `s_a` in color `a` and the given values in `b` and `c`.
    fn w(&self, vb: u32, vc: u32) -> Momentum {
        assemble([(self.a, self.s), (self.b, vb), (self.c, vc)]).expect("distinct colors")
    }

    fn g(&self, class: BoundaryClass, whites: &[Momentum]) -> Result<ExactSeries> {
        self.cx.weighted(class, whites)
    }

    /// `G(w, x, y) + G(y, w, x) + G(x, y, w)`.
    fn cyclic(&self, class: BoundaryClass, w: Momentum, x: Momentum, y: Momentum) -> Result<ExactSeries> {
        Ok(self.g(class, &[w, x, y])? + self.g(class, &[y, w, x])? + self.g(class, &[x, y, w])?)
    }

    fn sum1(&self, f: impl Fn(u32) -> Result<ExactSeries>) -> Result<ExactSeries> {
        self.cx.grid.axis().try_fold(self.cx.zero(), |acc, q| Ok(acc + f(q)?))
    }

    fn sum2(&self, f: impl Fn(u32, u32) -> Result<ExactSeries>) -> Result<ExactSeries> {
        self.sum1(|u| self.sum1(|v| f(u, v)))
    }

    fn f_m(&self, x: Momentum) -> Result<ExactSeries> {
        let (a, s) = (self.a, self.s);
        let mut out = self.g(BoundaryClass::V(a), &[x, x.with(a, s)])?;
        for cc in (1..=RANK).filter(|&cc| cc != a) {
            let bb = 6 - a - cc;
            out = out
                + self.sum1(|q| {
                    let w = assemble([(a, s), (bb, q), (cc, x.get(cc))])?;
                    self.g(BoundaryClass::V(cc), &[x, w])
                })?;
        }
        out = out + self.sum2(|u, v| self.g(BoundaryClass::MM, &[x, self.w(u, v)]))?;
        Ok(out)
    }

    fn f_va(&self, x: Momentum, y: Momentum) -> Result<ExactSeries> {
        let (a, b, c) = (self.a, self.b, self.c);
        let w = self.w(x.get(b), x.get(c));
        let wk = self.w(x.get(b), y.get(c));
        let mut out = self.cyclic(BoundaryClass::G(a), w, x, y)?.scale_by(&third(3));
        out = out + self.cyclic(BoundaryClass::K, wk, x, y)?.scale_by(&third(3));
        out = out + self.sum1(|q| self.g(BoundaryClass::F(b), &[x, y, self.w(q, y.get(c))]))?;
        out = out + self.sum1(|q| self.g(BoundaryClass::F(c), &[x, y, self.w(y.get(b), q)]))?;
        out = out + self.sum2(|u, v| self.g(BoundaryClass::MV(a), &[self.w(u, v), x, y]))?.scale_by(&third(2));
        Ok(out)
    }

    fn f_vb(&self, x: Momentum, y: Momentum) -> Result<ExactSeries> {
        let (a, b, c) = (self.a, self.b, self.c);
        let mut out = self
            .sum1(|q| self.cyclic(BoundaryClass::G(b), self.w(q, y.get(c)), x, y))?
            .scale_by(&third(3));
        out = out + self.g(BoundaryClass::F(c), &[self.w(y.get(b), x.get(c)), x, y])?;
        out = out + self.g(BoundaryClass::F(c), &[x, self.w(x.get(b), x.get(c)), y])?;
        out = out + self.sum1(|q| self.g(BoundaryClass::F(a), &[x, y, self.w(q, y.get(c))]))?;
        out = out + self.sum2(|u, v| self.g(BoundaryClass::MV(b), &[self.w(u, v), x, y]))?.scale_by(&third(2));
        Ok(out)
    }

    fn f_vc(&self, x: Momentum, y: Momentum) -> Result<ExactSeries> {
        let (a, b, c) = (self.a, self.b, self.c);
        let mut out = self
            .sum1(|q| self.cyclic(BoundaryClass::G(c), self.w(y.get(b), q), x, y))?
            .scale_by(&third(3));
        out = out + self.g(BoundaryClass::F(c), &[self.w(y.get(b), x.get(c)), x, y])?;
        out = out + self.g(BoundaryClass::F(c), &[x, self.w(x.get(b), x.get(c)), y])?;
        out = out + self.sum1(|q| self.g(BoundaryClass::F(a), &[x, self.w(x.get(b), q), y]))?;
        out = out + self.sum2(|u, v| self.g(BoundaryClass::MV(c), &[self.w(u, v), x, y]))?.scale_by(&third(2));
        Ok(out)
    }

    fn f_mm(&self, x: Momentum, y: Momentum) -> Result<ExactSeries> {
        let (a, b, c) = (self.a, self.b, self.c);
        let mut out = self.sum2(|u, v| self.cyclic(BoundaryClass::MMM, self.w(u, v), x, y))?;
        out = out + self.g(BoundaryClass::F(a), &[x, self.w(x.get(b), y.get(c)), y])?;
        out = out + self.g(BoundaryClass::MV(a), &[x, self.w(y.get(b), y.get(c)), y])?;
        out = out + self.sum1(|q| self.g(BoundaryClass::MV(b), &[x, self.w(y.get(b), q), y]))?;
        out = out + self.sum1(|q| self.g(BoundaryClass::MV(c), &[x, self.w(q, y.get(c)), y]))?;
        out = out + self.sum1(|q| self.g(BoundaryClass::MV(b), &[x, y, self.w(y.get(b), q)]))?;
        out = out + self.sum1(|q| self.g(BoundaryClass::MV(c), &[x, y, self.w(q, y.get(c))]))?;
        out = out + self.g(BoundaryClass::MV(a), &[x, y, self.w(y.get(b), y.get(c))])?;
        Ok(out)
    }

    fn eval(&self, class: FClass, args: &[Momentum]) -> Result<ExactSeries> {
        match class {
            FClass::M => self.f_m(args[0]),
            FClass::Va => self.f_va(args[0], args[1]),
            FClass::Vb => self.f_vb(args[0], args[1]),
            FClass::Vc => self.f_vc(args[0], args[1]),
            FClass::MM => self.f_mm(args[0], args[1]),
        }
    }
}

/// `f^{(a)}_{B, s_a}` at the white arguments `args`, without symmetrization.
pub fn f_function<P: SectorProvider + ?Sized>(
    class: FClass,
    a: usize,
    s_a: u32,
    args: &[Momentum],
    provider: &P,
    assignment: &ExponentAssignment,
) -> Result<ExactSeries> {
    if !(1..=RANK).contains(&a) {
        return Err(Error::Argument(format!("color {a} out of range")));
    }
    if args.len() != class.arity() {
        return Err(Error::Argument(format!("{class:?} takes {} momenta, got {}", class.arity(), args.len())));
    }
    let cx = Ctx::new(provider, assignment);
    if !cx.grid.axis().any(|i| i == s_a) {
        return Err(Error::Argument(format!("index {s_a} is off the grid")));
    }
    args.iter().try_for_each(|m| cx.grid.check(m))?;
    let (b, c) = others(a);
    Env { cx: &cx, a, b, c, s: s_a }.eval(class, args)
}

/// Sum of `f^{(a)}_{B, s_a}` over the automorphisms of `B` acting on the
/// white arguments: `f(x)` for `m`, `f(x, y) + f(y, x)` for the 4-point
/// classes.
pub fn assemble_f<P: SectorProvider + ?Sized>(
    class: FClass,
    a: usize,
    s_a: u32,
    args: &[Momentum],
    provider: &P,
    assignment: &ExponentAssignment,
) -> Result<ExactSeries> {
    let direct = f_function(class, a, s_a, args, provider, assignment)?;
    if class.automorphisms() == 1 {
        return Ok(direct);
    }
    let swapped = [args[1], args[0]];
    Ok(direct + f_function(class, a, s_a, &swapped, provider, assignment)?)
}
