//! Finite-N Schwinger-Dyson equations.
//!
//! Two forms are provided. [`exact_sde_rhs`] derives the equation for a
//! sector directly from integration by parts on the first black field,
//! followed by the color-`c` Ward identity for the off-diagonal part of the
//! interaction; it is an identity at every `N` and order, with no
//! coincident-momentum exclusions. [`literal_sde_rhs`] assembles the
//! equations term by term in their textbook form (difference quotients with
//! the diagonal skipped, f-function source terms), which is only a large-N
//! statement and is kept as a diagnostic.
//!
//! Correlators enter through a [`SectorProvider`]; the powers of `N` that
//! convert them to raw moments come from an [`ExponentAssignment`].

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::f_functions::{assemble_f, FClass};
use crate::colored_graph::{classify, BoundaryClass, Classification, ColoredGraph};
use crate::error::{Error, Result};
use crate::grid::{assemble, Grid, Momentum, RANK};
use crate::scaling::{ExponentAssignment, Var};
use crate::series::{ExactSeries, TruncatedSeries};

/// Source of exact perturbative sector values `G_B(X)` at canonical white
/// arguments, truncated at [`order`](SectorProvider::order).
pub trait SectorProvider: Sync {
    fn grid(&self) -> Grid;
    fn order(&self) -> usize;
    fn sector(&self, class: BoundaryClass, whites: &[Momentum]) -> Result<ExactSeries>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Sector {
    TwoPoint,
    FourV1,
    FourMM,
}

impl Sector {
    pub const ALL: [Sector; 3] = [Sector::TwoPoint, Sector::FourV1, Sector::FourMM];

    pub fn class(&self) -> BoundaryClass {
        match self {
            Sector::TwoPoint => BoundaryClass::M,
            Sector::FourV1 => BoundaryClass::V(1),
            Sector::FourMM => BoundaryClass::MM,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Sector::TwoPoint => "2pt",
            Sector::FourV1 => "4pt_V1",
            Sector::FourMM => "4pt_m",
        }
    }

    pub fn arity(&self) -> usize {
        self.class().k()
    }
}

/// A field insertion: `Phi` is a black (`phi`), `Bar` a white (`phibar`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Field {
    Phi(Momentum),
    Bar(Momentum),
}

/// Black momenta implied by white arguments and a row table.
pub fn black_momenta(rows: &[[usize; 3]], whites: &[Momentum]) -> Vec<Momentum> {
    rows.iter()
        .map(|r| Momentum([whites[r[0]].0[0], whites[r[1]].0[1], whites[r[2]].0[2]]))
        .collect()
}

fn classify_rows(rows: &[[usize; 3]]) -> Result<(BoundaryClass, Vec<usize>)> {
    static CACHE: OnceLock<Mutex<HashMap<Vec<[usize; 3]>, (BoundaryClass, Vec<usize>)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().expect("cache lock").get(rows) {
        return Ok(hit.clone());
    }
    let g = ColoredGraph::from_black_spec(rows)?;
    let out = match classify(&g)? {
        Classification::Known { class, iso } => (class, iso),
        Classification::Unclassified { vertices, .. } => {
            return Err(Error::MissingSector(format!("no catalog class for a {vertices}-vertex boundary")))
        }
    };
    cache.lock().expect("cache lock").insert(rows.to_vec(), out.clone());
    Ok(out)
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, k - 1);
            out.push(q);
        }
    }
    out
}

fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, r, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, r, &mut Vec::new(), &mut out);
    out
}

/// Shared evaluation context: provider, exponent assignment and helpers
/// for exact powers of `N`.
pub(crate) struct Ctx<'a, P: SectorProvider + ?Sized> {
    pub provider: &'a P,
    pub assignment: &'a ExponentAssignment,
    pub grid: Grid,
    pub order: usize,
}

impl<'a, P: SectorProvider + ?Sized> Ctx<'a, P> {
    pub fn new(provider: &'a P, assignment: &'a ExponentAssignment) -> Self {
        Ctx { provider, assignment, grid: provider.grid(), order: provider.order() }
    }

    pub fn var(&self, v: Var) -> BigRational {
        self.assignment.get(v)
    }

    /// `N^e`; fails unless `e` is an integer.
    pub fn npow(&self, e: &BigRational) -> Result<BigRational> {
        if !e.is_integer() {
            return Err(Error::Argument(format!("non-integral power N^({e}) has no exact value")));
        }
        let k = e.to_integer().to_i32().ok_or_else(|| Error::Argument("power of N out of range".into()))?;
        let n = BigRational::from_integer(BigInt::from(self.grid.n));
        Ok(if k >= 0 { num::pow(n, k as usize) } else { num::pow(n.recip(), (-k) as usize) })
    }

    pub fn zero(&self) -> ExactSeries {
        TruncatedSeries::zero(self.order)
    }

    pub fn constant(&self, c: BigRational) -> ExactSeries {
        TruncatedSeries::constant_value(c, self.order)
    }

    /// `N^2 / D` for an integer norm `D`: the physical `1/|x|^2`.
    pub fn inv_norm(&self, m: &Momentum) -> BigRational {
        self.grid.norm2_exact(m).recip()
    }

    /// `N^2 / (u^2 - v^2)`.
    pub fn inv_sq_diff(&self, u: u32, v: u32) -> Result<BigRational> {
        let d = self.grid.sq_diff_exact(u, v);
        if d.is_zero() {
            return Err(Error::Coincident(format!("components {u} and {v} coincide")));
        }
        Ok(d.recip())
    }

    pub fn sector(&self, class: BoundaryClass, whites: &[Momentum]) -> Result<ExactSeries> {
        Ok(self.provider.sector(class, whites)?.with_order(self.order))
    }

    /// `N^{alpha(B)} G_B(X)`, the form in which correlators enter the
    /// f-functions.
    pub fn weighted(&self, class: BoundaryClass, whites: &[Momentum]) -> Result<ExactSeries> {
        let p = self.npow(&self.assignment.alpha_of(class))?;
        Ok(self.sector(class, whites)?.scale_by(&p))
    }

    /// Raw cumulant contribution `N^{alpha(B) - 2k beta} G_B(X)`.
    pub fn raw(&self, class: BoundaryClass, whites: &[Momentum]) -> Result<ExactSeries> {
        let k = BigRational::from_integer(BigInt::from(class.k() as i64));
        let e = self.assignment.alpha_of(class) - BigRational::from_integer(2.into()) * k * self.var(Var::Beta);
        Ok(self.sector(class, whites)?.scale_by(&self.npow(&e)?))
    }

    /// Connected correlator of `phi^{blacks} phibar^{whites}`: the sum over
    /// every labeled boundary graph whose implied black momenta match.
    pub fn cumulant(&self, blacks: &[Momentum], whites: &[Momentum]) -> Result<ExactSeries> {
        let k = blacks.len();
        debug_assert_eq!(k, whites.len());
        let perms = permutations(k);
        let per_color: Vec<Vec<&Vec<usize>>> = (0..RANK)
            .map(|c| {
                perms
                    .iter()
                    .filter(|s| (0..k).all(|j| blacks[j].0[c] == whites[s[j]].0[c]))
                    .collect()
            })
            .collect();
        let mut acc = self.zero();
        for s1 in &per_color[0] {
            for s2 in &per_color[1] {
                for s3 in &per_color[2] {
                    let rows: Vec<[usize; 3]> = (0..k).map(|j| [s1[j], s2[j], s3[j]]).collect();
                    let (class, iso) = classify_rows(&rows)?;
                    let args: Vec<Momentum> = (0..k).map(|i| whites[iso[i]]).collect();
                    acc = acc + self.raw(class, &args)?;
                }
            }
        }
        Ok(acc)
    }

    /// Full moment `<prod fields>`, a sum over partitions into balanced
    /// connected blocks.
    pub fn moment(&self, fields: &[Field]) -> Result<ExactSeries> {
        let mut blacks = Vec::new();
        let mut whites = Vec::new();
        for f in fields {
            match f {
                Field::Phi(m) => blacks.push(*m),
                Field::Bar(m) => whites.push(*m),
            }
        }
        if blacks.len() != whites.len() {
            return Ok(self.zero());
        }
        self.moment_split(&blacks, &whites)
    }

    fn moment_split(&self, blacks: &[Momentum], whites: &[Momentum]) -> Result<ExactSeries> {
        if blacks.is_empty() {
            return Ok(self.constant(BigRational::one()));
        }
        let k = blacks.len();
        let mut acc = self.zero();
        for t in 1..=k {
            for bsub in combinations(k - 1, t - 1) {
                let bset: Vec<usize> = std::iter::once(0).chain(bsub.iter().map(|i| i + 1)).collect();
                for wset in combinations(k, t) {
                    let bb: Vec<Momentum> = bset.iter().map(|&i| blacks[i]).collect();
                    let ww: Vec<Momentum> = wset.iter().map(|&i| whites[i]).collect();
                    let c = self.cumulant(&bb, &ww)?;
                    if c.is_zero() {
                        continue;
                    }
                    let rb: Vec<Momentum> = (0..k).filter(|i| !bset.contains(i)).map(|i| blacks[i]).collect();
                    let rw: Vec<Momentum> = (0..k).filter(|i| !wset.contains(i)).map(|i| whites[i]).collect();
                    acc = acc + c * self.moment_split(&rb, &rw)?;
                }
            }
        }
        Ok(acc)
    }
}

fn check_args(grid: Grid, sector: Sector, args: &[Momentum]) -> Result<()> {
    if args.len() != sector.arity() {
        return Err(Error::Argument(format!(
            "sector {} takes {} momenta, got {}",
            sector.name(),
            sector.arity(),
            args.len()
        )));
    }
    args.iter().try_for_each(|m| grid.check(m))
}

/// The derivation `D` of the color-`c` Ward identity moving index `m` to
/// `t`: `phi^{(m;.)} -> phi^{(t;.)}`, `phibar^{(t;.)} -> -phibar^{(m;.)}`.
/// Returns the signed terms of `D(prod fields)`.
fn ward_derivation(fields: &[Field], c: usize, m: u32, t: u32) -> Vec<(bool, Vec<Field>)> {
    let mut out = Vec::new();
    for (i, f) in fields.iter().enumerate() {
        let replaced = match *f {
            Field::Phi(p) if p.get(c) == m => Some((false, Field::Phi(p.with(c, t)))),
            Field::Bar(w) if w.get(c) == t => Some((true, Field::Bar(w.with(c, m)))),
            _ => None,
        };
        if let Some((neg, nf)) = replaced {
            let mut v = fields.to_vec();
            v[i] = nf;
            out.push((neg, v));
        }
    }
    out
}

/// Right-hand side of the exact finite-N equation for `sector` at `args`.
///
/// With `s` the first black and `O` the remaining fields, integration by
/// parts on `phibar^s` and the Ward identity give
/// `N^g |s|^2 <phi^s O> = <dO/dphibar^s> - 2 N^g lambda sum_c [sum_{m != s_c}
/// (<phi^s O> + <phi^{(m;s)} D O>) / (N^g (m^2 - s_c^2)) + sum_q <phi^s
/// phibar^{(s_c;q)} phi^{(s_c;q)} O>]`. The returned value is the sector
/// part of `<phi^s O>` solved from this identity, in the normalization of
/// `G_B`.
pub fn exact_sde_rhs<P: SectorProvider + ?Sized>(
    sector: Sector,
    assignment: &ExponentAssignment,
    provider: &P,
    args: &[Momentum],
) -> Result<ExactSeries> {
    let cx = Ctx::new(provider, assignment);
    check_args(cx.grid, sector, args)?;
    let class = sector.class();
    let blacks = black_momenta(&class.black_spec(), args);
    let s = blacks[0];
    let mut rest_fields: Vec<Field> = blacks[1..].iter().map(|&b| Field::Phi(b)).collect();
    rest_fields.extend(args.iter().map(|&w| Field::Bar(w)));
    let with_s = |extra: &[Field]| -> Vec<Field> {
        let mut v = vec![Field::Phi(s)];
        v.extend_from_slice(extra);
        v.extend_from_slice(&rest_fields);
        v
    };
    let full = cx.moment(&with_s(&[]))?;

    // <dO/dphibar^s>
    let mut contact = cx.zero();
    for (i, f) in rest_fields.iter().enumerate() {
        if *f == Field::Bar(s) {
            let mut v = rest_fields.clone();
            v.remove(i);
            contact = contact + cx.moment(&v)?;
        }
    }

    let ng = cx.npow(&cx.var(Var::Gamma))?;
    let mut interaction = cx.zero();
    for c in 1..=RANK {
        let sc = s.get(c);
        for m in cx.grid.axis().filter(|&m| m != sc) {
            let mut term = full.clone();
            let moved = s.with(c, m);
            for (neg, fields) in ward_derivation(&rest_fields, c, m, sc) {
                let mut v = vec![Field::Phi(moved)];
                v.extend(fields);
                let val = cx.moment(&v)?;
                term = if neg { term - val } else { term + val };
            }
            let w = cx.inv_sq_diff(m, sc)? / ng.clone();
            interaction = interaction + term.scale_by(&w);
        }
        for u in cx.grid.axis() {
            for v in cx.grid.axis() {
                let (b, d) = super::solver::others(c);
                let r = assemble([(c, sc), (b, u), (d, v)])?;
                interaction = interaction + cx.moment(&with_s(&[Field::Bar(r), Field::Phi(r)]))?;
            }
        }
    }
    let coupling = BigRational::from_integer((-2).into()) * ng.clone() * cx.npow(&cx.var(Var::Delta))?;
    let rhs_moment = (contact + interaction.scale_by(&coupling).shift(1)).scale_by(&(cx.inv_norm(&s) / ng));

    let norm = {
        let k = BigRational::from_integer(BigInt::from(class.k() as i64));
        assignment.alpha_of(class) - BigRational::from_integer(2.into()) * k * cx.var(Var::Beta)
    };
    let to_raw = cx.npow(&norm)?;
    let own = cx.sector(class, args)?;
    let rest = full - own.scale_by(&to_raw);
    Ok((rhs_moment - rest).scale_by(&to_raw.recip()))
}

fn sum_series(it: impl IntoIterator<Item = Result<ExactSeries>>, zero: ExactSeries) -> Result<ExactSeries> {
    it.into_iter().try_fold(zero, |acc, x| Ok(acc + x?))
}

/// Right-hand side of the equations in their term-by-term form, with every
/// power of `N` taken from `assignment`. Difference-quotient sums skip the
/// diagonal; the 4-point forms need all components of `x` and `y` distinct.
pub fn literal_sde_rhs<P: SectorProvider + ?Sized>(
    sector: Sector,
    assignment: &ExponentAssignment,
    provider: &P,
    args: &[Momentum],
) -> Result<ExactSeries> {
    let cx = Ctx::new(provider, assignment);
    check_args(cx.grid, sector, args)?;
    match sector {
        Sector::TwoPoint => literal_two_point(&cx, &args[0]),
        Sector::FourV1 => literal_four_v1(&cx, &args[0], &args[1]),
        Sector::FourMM => literal_four_mm(&cx, &args[0], &args[1]),
    }
}

fn r(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

struct Exps {
    beta: BigRational,
    gamma: BigRational,
    delta: BigRational,
    av: BigRational,
    amm: BigRational,
    alpha: BigRational,
}

impl Exps {
    fn of<P: SectorProvider + ?Sized>(cx: &Ctx<'_, P>) -> Self {
        Exps {
            beta: cx.var(Var::Beta),
            gamma: cx.var(Var::Gamma),
            delta: cx.var(Var::Delta),
            av: cx.var(Var::AlphaV),
            amm: cx.var(Var::AlphaMM),
            alpha: cx.var(Var::Alpha),
        }
    }
    /// `8 beta - 5 gamma - delta`
    fn decouple(&self) -> BigRational {
        r(8) * &self.beta - r(5) * &self.gamma - &self.delta
    }
    /// `3 gamma + 2 + delta - 4 beta`
    fn melonic(&self) -> BigRational {
        r(3) * &self.gamma + r(2) + &self.delta - r(4) * &self.beta
    }
    /// `2 gamma + delta + 1 - 3 beta`
    fn quotient(&self) -> BigRational {
        r(2) * &self.gamma + &self.delta + r(1) - r(3) * &self.beta
    }
    /// `2 gamma + delta - 3 beta`
    fn swap(&self) -> BigRational {
        r(2) * &self.gamma + &self.delta - r(3) * &self.beta
    }
    /// `4 gamma + delta - 6 beta`
    fn source(&self) -> BigRational {
        r(4) * &self.gamma + &self.delta - r(6) * &self.beta
    }
}

/// `(1/N^2) sum_{q_b, q_c} G(q, s_a)`, unweighted by powers of `N`.
fn melonic_loop<P: SectorProvider + ?Sized>(cx: &Ctx<'_, P>, a: usize, t: u32) -> Result<ExactSeries> {
    let (b, c) = super::solver::others(a);
    let mut acc = cx.zero();
    for u in cx.grid.axis() {
        for v in cx.grid.axis() {
            acc = acc + cx.sector(BoundaryClass::M, &[assemble([(a, t), (b, u), (c, v)])?])?;
        }
    }
    let n2 = r(cx.grid.n as i64 * cx.grid.n as i64);
    Ok(acc.scale_by(&n2.recip()))
}

/// `(1/N) sum_{q != x_a} N^{e} (F(x|_{a->q}) - F(x)) / (x_a^2 - q^2)`.
fn quotient_sum<P: SectorProvider + ?Sized>(
    cx: &Ctx<'_, P>,
    a: usize,
    x: &Momentum,
    f: impl Fn(&Momentum) -> Result<ExactSeries>,
) -> Result<ExactSeries> {
    let fx = f(x)?;
    let mut acc = cx.zero();
    for q in cx.grid.axis().filter(|&q| q != x.get(a)) {
        let w = x.with(a, q);
        acc = acc + (f(&w)? - fx.clone()).scale_by(&cx.inv_sq_diff(x.get(a), q)?);
    }
    Ok(acc.scale_by(&r(cx.grid.n as i64).recip()))
}

fn literal_two_point<P: SectorProvider + ?Sized>(cx: &Ctx<'_, P>, x: &Momentum) -> Result<ExactSeries> {
    let e = Exps::of(cx);
    let n = r(cx.grid.n as i64);
    let g2 = |m: &Momentum| cx.sector(BoundaryClass::M, &[*m]);
    let gx = g2(x)?;
    let mut body = cx.zero();
    for a in 1..=RANK {
        let (b, c) = super::solver::others(a);
        // N^{3g+2+d-4b} (1/N^2) sum_q G(q x_a) G(x)
        body = body + (melonic_loop(cx, a, x.get(a))? * gx.clone()).scale_by(&cx.npow(&e.melonic())?);
        // N^{alpha(V) - (8b-5g-d)} G4_a(x, x)
        body = body + cx.sector(BoundaryClass::V(a), &[*x, *x])?.scale_by(&cx.npow(&(e.av.clone() - e.decouple()))?);
        // N^{alpha(mm)+2 - (8b-5g-d)} (1/N^2) sum_q G_m(q x_a, x)
        let mut mm = cx.zero();
        for u in cx.grid.axis() {
            for v in cx.grid.axis() {
                mm = mm + cx.sector(BoundaryClass::MM, &[assemble([(a, x.get(a)), (b, u), (c, v)])?, *x])?;
            }
        }
        let w = cx.npow(&(e.amm.clone() + r(2) - e.decouple()))? / (n.clone() * n.clone());
        body = body + mm.scale_by(&w);
        // (1/N) sum_{q_a} N^{2g+d+1-3b} (G(x|q_a) - G(x)) / (x_a^2 - q_a^2)
        body = body + quotient_sum(cx, a, x, |m| g2(m))?.scale_by(&cx.npow(&e.quotient())?);
        // N^{alpha(V)+1-(8b-5g-d)} (1/N) sum_{c' != a} sum_{q_b} G4_{c'}(x, x|_{b -> q_b})
        let mut side = cx.zero();
        for cc in (1..=RANK).filter(|&cc| cc != a) {
            let bb = 6 - a - cc;
            for q in cx.grid.axis() {
                side = side + cx.sector(BoundaryClass::V(cc), &[*x, x.with(bb, q)])?;
            }
        }
        body = body + side.scale_by(&(cx.npow(&(e.av.clone() + r(1) - e.decouple()))? / n.clone()));
    }
    let inv = cx.inv_norm(x);
    Ok(cx.constant(inv.clone()) + body.scale_by(&(r(-2) * inv)).shift(1))
}

fn require_distinct(x: &Momentum, y: &Momentum) -> Result<()> {
    if (1..=RANK).any(|c| x.get(c) == y.get(c)) {
        return Err(Error::Coincident("4-point equations need x_c != y_c in every color".into()));
    }
    Ok(())
}

fn literal_four_v1<P: SectorProvider + ?Sized>(cx: &Ctx<'_, P>, x: &Momentum, y: &Momentum) -> Result<ExactSeries> {
    require_distinct(x, y)?;
    let e = Exps::of(cx);
    let v = |a: usize, p: &Momentum, q: &Momentum| cx.sector(BoundaryClass::V(a), &[*p, *q]);
    let g2 = |m: &Momentum| cx.sector(BoundaryClass::M, &[*m]);
    let s = Momentum::new(x.get(1), y.get(2), y.get(3));
    let g4 = v(1, x, y)?;
    let mut body = cx.zero();
    // source: N^{4g+d-6b-alpha(V)} sum_a f_a(x, y; s_a; V_1)
    let src = sum_series(
        (1..=RANK).map(|a| {
            let class = if a == 1 { FClass::Va } else { FClass::Vb };
            assemble_f(class, a, s.get(a), &[*x, *y], cx.provider, cx.assignment)
        }),
        cx.zero(),
    )?;
    body = body + src.scale_by(&cx.npow(&(e.source() - e.av.clone()))?);
    for a in 1..=RANK {
        body = body + (melonic_loop(cx, a, s.get(a))? * g4.clone()).scale_by(&cx.npow(&e.melonic())?);
    }
    let wq = cx.npow(&e.quotient())?;
    let ws = cx.npow(&e.swap())?;
    // (1/N) sum_{b1} (G4(x,y) - G4(b1 x2 x3, y)) / (b1^2 - x1^2)
    body = body + quotient_sum(cx, 1, x, |m| v(1, m, y))?.scale_by(&wq);
    // (1/N) sum_{b2}, sum_{b3} on y
    for c in [2, 3] {
        body = body + quotient_sum(cx, c, y, |m| v(1, x, m))?.scale_by(&wq);
    }
    // (G4_3(x, y1 x2 y3) - G4_3(x, y)) / (y2^2 - x2^2)
    let t4 = v(3, x, &y.with(2, x.get(2)))? - v(3, x, y)?;
    body = body + t4.scale_by(&(cx.inv_sq_diff(y.get(2), x.get(2))? * ws.clone()));
    // (G4_2(x, y1 y2 x3) - G4_2(x, y)) / (y3^2 - x3^2)
    let t6 = v(2, x, &y.with(3, x.get(3)))? - v(2, x, y)?;
    body = body + t6.scale_by(&(cx.inv_sq_diff(y.get(3), x.get(3))? * ws.clone()));
    // N^{2 alpha - alpha(V)} G(y) (G(x) - G(y1 x2 x3)) / (y1^2 - x1^2)
    let t8 = g2(y)? * (g2(x)? - g2(&x.with(1, y.get(1)))?);
    let w8 = ws.clone() * cx.npow(&(r(2) * e.alpha.clone() - e.av.clone()))? * cx.inv_sq_diff(y.get(1), x.get(1))?;
    body = body + t8.scale_by(&w8);
    // N^{alpha(mm) - alpha(V)} (G_m(x, y) - G_m(x1 x2 x3, y)) / (y1^2 - x1^2), as printed
    let t9 = cx.sector(BoundaryClass::MM, &[*x, *y])? - cx.sector(BoundaryClass::MM, &[*x, *y])?;
    let w9 = ws * cx.npow(&(e.amm.clone() - e.av.clone()))? * cx.inv_sq_diff(y.get(1), x.get(1))?;
    body = body + t9.scale_by(&w9);
    Ok(body.scale_by(&(r(-2) * cx.inv_norm(&s))).shift(1))
}

fn literal_four_mm<P: SectorProvider + ?Sized>(cx: &Ctx<'_, P>, x: &Momentum, y: &Momentum) -> Result<ExactSeries> {
    require_distinct(x, y)?;
    let e = Exps::of(cx);
    let mm = |p: &Momentum, q: &Momentum| cx.sector(BoundaryClass::MM, &[*p, *q]);
    let gmm = mm(x, y)?;
    let gx = cx.sector(BoundaryClass::M, &[*x])?;
    let mut body = cx.zero();
    for a in 1..=RANK {
        let melonic = r(4) * &e.beta - r(3) * &e.gamma - &e.delta - r(2);
        body = body + (melonic_loop(cx, a, x.get(a))? * gmm.clone()).scale_by(&cx.npow(&-melonic)?);
        let f = assemble_f(FClass::MM, a, x.get(a), &[*x, *y], cx.provider, cx.assignment)?;
        body = body + f.scale_by(&cx.npow(&(e.source() - e.amm.clone()))?);
        let q = quotient_sum(cx, a, x, |m| mm(m, y))?;
        body = body + q.scale_by(&cx.npow(&e.quotient())?);
        let d = cx.sector(BoundaryClass::V(a), &[*x, *y])? - cx.sector(BoundaryClass::V(a), &[x.with(a, y.get(a)), *y])?;
        let w = cx.npow(&(e.av.clone() + e.swap() - e.amm.clone()))? * cx.inv_sq_diff(y.get(a), x.get(a))?;
        body = body + d.scale_by(&w);
        let fm = assemble_f(FClass::M, a, x.get(a), &[*y], cx.provider, cx.assignment)?;
        let w = cx.npow(&(r(3) * &e.gamma + &e.delta - r(4) * &e.beta - e.amm.clone()))?;
        body = body + (gx.clone() * fm).scale_by(&w);
    }
    Ok(body.scale_by(&(r(-2) * cx.inv_norm(x))).shift(1))
}

/// Maximum of `|numerator|` over the coefficients of a residual series.
pub fn residual_size(s: &ExactSeries) -> BigRational {
    s.coeffs().iter().map(|c| c.abs()).fold(BigRational::zero(), |a, b| if b > a { b } else { a })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutations_and_combinations() {
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(combinations(4, 2).len(), 6);
        assert_eq!(combinations(3, 0), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn ward_derivation_signs() {
        let f = [Field::Phi(Momentum::new(2, 1, 1)), Field::Bar(Momentum::new(1, 2, 2))];
        let d = ward_derivation(&f, 1, 2, 1);
        assert_eq!(d.len(), 2);
        assert!(!d[0].0 && d[0].1[0] == Field::Phi(Momentum::new(1, 1, 1)));
        assert!(d[1].0 && d[1].1[1] == Field::Bar(Momentum::new(2, 2, 2)));
    }

    #[test]
    fn pillow_blacks() {
        let x = Momentum::new(1, 2, 3);
        let y = Momentum::new(4, 5, 6);
        let b = black_momenta(&BoundaryClass::V(1).black_spec(), &[x, y]);
        assert_eq!(b, vec![Momentum::new(1, 5, 6), Momentum::new(4, 2, 3)]);
    }
}
