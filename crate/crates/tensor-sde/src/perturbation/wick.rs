//! Exact small-N perturbation theory by Wick contraction.
//!
//! A correlator at order `n` is a sum over `3^n` vertex colorings and all
//! bijections from black field slots (external and vertex) to white slots.
//! In each color the Kronecker deltas of the propagators and vertices join
//! index slots into strands: open strands run from an external white to an
//! external black and fix the boundary graph, closed strands are free
//! indices summed over the grid axis. Everything that does not depend on
//! `N` or the external momenta is compiled once per `(n, k)` into
//! templates keyed by boundary rows.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num::{BigInt, BigRational, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::colored_graph::BoundaryClass;
use crate::error::{Error, Result};
use crate::grid::{Grid, Momentum, RANK};
use crate::scaling::{ExponentAssignment, Var};
use crate::sde_core::SectorProvider;
use crate::series::{ExactSeries, TruncatedSeries};

/// Largest perturbative order the enumeration is allowed to reach.
pub const MAX_ORDER: usize = 2;
/// Largest grid size; `N = 3` is only allowed up to order 1.
pub const MAX_N: u32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Ref {
    /// Index of the external white the strand starts from.
    Path(u8),
    Cycle(u8),
}

#[derive(Clone, Debug)]
struct Template {
    count: i64,
    /// Per propagator, the strand carrying each color.
    props: Vec<[Ref; RANK]>,
    cycles: usize,
}

type TemplateSet = HashMap<Vec<[usize; RANK]>, Vec<Template>>;

struct Dsu(Vec<usize>);

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu((0..n).collect())
    }
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra] = rb;
        }
    }
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for m in 0..k {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..=p.len()).map(move |i| {
                    let mut q = p.clone();
                    q.insert(i, m);
                    q
                })
            })
            .collect();
    }
    out
}

fn renumber(props: &mut [[Ref; RANK]]) -> usize {
    let mut map = HashMap::new();
    for p in props.iter_mut() {
        for r in p.iter_mut() {
            if let Ref::Cycle(id) = *r {
                let next = map.len() as u8;
                *r = Ref::Cycle(*map.entry(id).or_insert(next));
            }
        }
    }
    map.len()
}

/// Diagram analysis for one coloring and matching, or `None` when the
/// diagram is disconnected.
fn analyse(k: usize, colors: &[usize], matching: &[usize]) -> Option<(Vec<[usize; RANK]>, Vec<[Ref; RANK]>)> {
    let n = colors.len();
    let slots = k + 2 * n;

    // Feynman connectivity over externals (whites 0..k, blacks k..2k) and vertices.
    let object = |is_black: bool, i: usize| -> usize {
        if i < k {
            if is_black {
                k + i
            } else {
                i
            }
        } else {
            2 * k + (i - k) / 2
        }
    };
    let mut conn = Dsu::new(2 * k + n);
    for (b, &w) in matching.iter().enumerate() {
        conn.union(object(true, b), object(false, w));
    }
    let root = conn.find(0);
    if (1..2 * k + n).any(|o| conn.find(o) != root) {
        return None;
    }

    let mut rows = vec![[usize::MAX; RANK]; k];
    let mut props = vec![[Ref::Cycle(0); RANK]; slots];
    let mut next_cycle = 0u8;
    for c in 0..RANK {
        // whites 0..slots, blacks slots..2*slots
        let mut d = Dsu::new(2 * slots);
        for (b, &w) in matching.iter().enumerate() {
            d.union(slots + b, w);
        }
        for (v, &cv) in colors.iter().enumerate() {
            let (w1, w2) = (k + 2 * v, k + 2 * v + 1);
            let (b1, b2) = (slots + w1, slots + w2);
            if cv == c {
                d.union(b1, w2);
                d.union(b2, w1);
            } else {
                d.union(b1, w1);
                d.union(b2, w2);
            }
        }
        let mut label: HashMap<usize, Ref> = HashMap::new();
        for i in 0..k {
            label.insert(d.find(i), Ref::Path(i as u8));
        }
        for j in 0..k {
            match label.get(&d.find(slots + j)) {
                Some(Ref::Path(i)) => rows[j][c] = *i as usize,
                _ => unreachable!("external black strands end at external whites"),
            }
        }
        for (b, &w) in matching.iter().enumerate() {
            let r = d.find(w);
            let entry = *label.entry(r).or_insert_with(|| {
                next_cycle += 1;
                Ref::Cycle(next_cycle - 1)
            });
            props[b][c] = entry;
        }
    }
    Some((rows, props))
}

fn build_templates(n: usize, k: usize) -> TemplateSet {
    let canonical: Vec<Vec<[usize; RANK]>> =
        BoundaryClass::all().into_iter().filter(|c| c.k() == k).map(|c| c.black_spec()).collect();
    let colorings: Vec<Vec<usize>> = (0..3usize.pow(n as u32))
        .map(|mut code| {
            (0..n)
                .map(|_| {
                    let c = code % 3;
                    code /= 3;
                    c
                })
                .collect()
        })
        .collect();
    let matchings = permutations(k + 2 * n);
    let partial: Vec<HashMap<(Vec<[usize; RANK]>, Vec<[Ref; RANK]>), i64>> = matchings
        .par_iter()
        .map(|m| {
            let mut local = HashMap::new();
            for colors in &colorings {
                if let Some((rows, mut props)) = analyse(k, colors, m) {
                    if !canonical.contains(&rows) {
                        continue;
                    }
                    renumber(&mut props);
                    props.sort();
                    renumber(&mut props);
                    *local.entry((rows, props)).or_insert(0) += 1;
                }
            }
            local
        })
        .collect();
    let mut merged: HashMap<(Vec<[usize; RANK]>, Vec<[Ref; RANK]>), i64> = HashMap::new();
    for part in partial {
        for (key, c) in part {
            *merged.entry(key).or_insert(0) += c;
        }
    }
    let mut out: TemplateSet = HashMap::new();
    let mut entries: Vec<_> = merged.into_iter().collect();
    entries.sort();
    for ((rows, props), count) in entries {
        let cycles = props
            .iter()
            .flat_map(|p| p.iter())
            .filter_map(|r| match r {
                Ref::Cycle(id) => Some(*id as usize + 1),
                Ref::Path(_) => None,
            })
            .max()
            .unwrap_or(0);
        out.entry(rows).or_default().push(Template { count, props, cycles });
    }
    out
}

fn templates(n: usize, k: usize) -> Arc<TemplateSet> {
    static STORE: OnceLock<Mutex<HashMap<(usize, usize), Arc<TemplateSet>>>> = OnceLock::new();
    let store = STORE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = store.lock().expect("template lock").get(&(n, k)) {
        return t.clone();
    }
    let built = Arc::new(build_templates(n, k));
    store.lock().expect("template lock").entry((n, k)).or_insert(built).clone()
}

/// `sum over cycle indices of prod_e 1/|p_e|^2` with integer norms.
fn template_sum(t: &Template, grid: Grid, whites: &[Momentum]) -> BigRational {
    let n = grid.n as usize;
    let total = n.pow(t.cycles as u32);
    // products of integer norms stay below 27^7
    let mut by_denominator: HashMap<u64, i64> = HashMap::new();
    let mut vals = vec![0u64; t.cycles];
    for code in 0..total {
        let mut c = code;
        for v in vals.iter_mut() {
            *v = (c % n) as u64 + 1;
            c /= n;
        }
        let mut prod = 1u64;
        for p in &t.props {
            let mut d = 0u64;
            for (col, r) in p.iter().enumerate() {
                let i = match *r {
                    Ref::Path(w) => whites[w as usize].0[col] as u64,
                    Ref::Cycle(id) => vals[id as usize],
                };
                d += i * i;
            }
            prod *= d;
        }
        *by_denominator.entry(prod).or_insert(0) += 1;
    }
    by_denominator
        .into_iter()
        .map(|(d, c)| BigRational::new(BigInt::from(c), BigInt::from(d)))
        .fold(BigRational::zero(), |a, b| a + b)
}

fn check_budget(n: u32, order: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Argument("grid size must be at least 1".into()));
    }
    if order > MAX_ORDER || n > MAX_N || (n == MAX_N && order > 1) {
        return Err(Error::Budget(format!(
            "Wick enumeration allows order <= {MAX_ORDER} with N <= 2, or order <= 1 with N = 3 (got order {order}, N = {n})"
        )));
    }
    Ok(())
}

/// Exact correlator sectors from Wick contraction, memoized per argument
/// tuple.
pub struct WickOracle {
    grid: Grid,
    order: usize,
    assignment: ExponentAssignment,
    cache: Mutex<HashMap<(BoundaryClass, Vec<Momentum>), ExactSeries>>,
}

impl WickOracle {
    pub fn new(n: u32, order: usize, assignment: ExponentAssignment) -> Result<Self> {
        check_budget(n, order)?;
        for v in [Var::Beta, Var::Gamma, Var::Delta] {
            assignment.integral(v)?;
        }
        Ok(WickOracle { grid: Grid::new(n)?, order, assignment, cache: Mutex::new(HashMap::new()) })
    }

    /// Oracle with the large-N exponent assignment.
    pub fn large_n(n: u32, order: usize) -> Result<Self> {
        Self::new(n, order, ExponentAssignment::large_n())
    }

    pub fn assignment(&self) -> &ExponentAssignment {
        &self.assignment
    }

    fn power_of_n(&self, class: BoundaryClass, n: usize) -> Result<BigRational> {
        let a = &self.assignment;
        let k = class.k() as i64;
        let props = (2 * n) as i64 + k;
        let r = |x: i64| BigRational::from_integer(x.into());
        let e = r(n as i64) * (a.get(Var::Gamma) + a.get(Var::Delta))
            + r(props) * (r(2) - a.get(Var::Gamma))
            + r(2 * k) * a.get(Var::Beta)
            - a.alpha_of(class);
        if !e.is_integer() {
            return Err(Error::Argument(format!("sector {} needs the non-integral power N^({e})", class.name())));
        }
        let e = e.to_integer().to_i64().ok_or_else(|| Error::Argument("power of N out of range".into()))?;
        let base = BigRational::from_integer(self.grid.n.into());
        Ok(if e >= 0 { num::pow(base, e as usize) } else { num::pow(base.recip(), (-e) as usize) })
    }

    /// Coefficient of `lambda^n` in `G_B(whites)`.
    pub fn coefficient(&self, class: BoundaryClass, whites: &[Momentum], n: usize) -> Result<BigRational> {
        check_budget(self.grid.n, n)?;
        self.check_whites(class, whites)?;
        let set = templates(n, class.k());
        let Some(list) = set.get(&class.black_spec()) else {
            return Ok(BigRational::zero());
        };
        let sum = list
            .par_iter()
            .map(|t| template_sum(t, self.grid, whites) * BigRational::from_integer(t.count.into()))
            .reduce(BigRational::zero, |a, b| a + b);
        let fact: i64 = (1..=n as i64).product();
        let sign = if n % 2 == 0 { 1 } else { -1 };
        Ok(sum * self.power_of_n(class, n)? * BigRational::new(sign.into(), fact.into()))
    }

    fn check_whites(&self, class: BoundaryClass, whites: &[Momentum]) -> Result<()> {
        if whites.len() != class.k() {
            return Err(Error::Argument(format!(
                "sector {} takes {} white momenta, got {}",
                class.name(),
                class.k(),
                whites.len()
            )));
        }
        whites.iter().try_for_each(|m| self.grid.check(m))
    }
}

impl SectorProvider for WickOracle {
    fn grid(&self) -> Grid {
        self.grid
    }

    fn order(&self) -> usize {
        self.order
    }

    fn sector(&self, class: BoundaryClass, whites: &[Momentum]) -> Result<ExactSeries> {
        let key = (class, whites.to_vec());
        if let Some(v) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(v.clone());
        }
        let coeffs = (0..=self.order).map(|n| self.coefficient(class, whites, n)).collect::<Result<Vec<_>>>()?;
        let s = TruncatedSeries::from_coeffs(coeffs);
        self.cache.lock().expect("cache lock").insert(key, s.clone());
        Ok(s)
    }
}

/// Canonical boundary rows reached by at least one diagram at order `n`.
pub fn template_rows(n: usize, k: usize) -> Vec<Vec<[usize; RANK]>> {
    let mut rows: Vec<_> = templates(n, k).keys().cloned().collect();
    rows.sort();
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn free_two_point() {
        let o = WickOracle::large_n(2, 0).unwrap();
        let v = o.coefficient(BoundaryClass::M, &[Momentum::new(1, 1, 1)], 0).unwrap();
        assert_eq!(v, q(4, 3));
    }

    #[test]
    fn budget_enforced() {
        assert!(matches!(WickOracle::large_n(3, 2), Err(Error::Budget(_))));
        assert!(matches!(WickOracle::large_n(4, 0), Err(Error::Budget(_))));
        assert!(matches!(WickOracle::large_n(2, 3), Err(Error::Budget(_))));
        assert!(WickOracle::large_n(3, 1).is_ok());
    }

    #[test]
    fn free_four_point_vanishes() {
        let o = WickOracle::large_n(2, 0).unwrap();
        let x = Momentum::new(1, 2, 1);
        let y = Momentum::new(2, 1, 2);
        for c in [BoundaryClass::V(1), BoundaryClass::MM] {
            assert!(o.coefficient(c, &[x, y], 0).unwrap().is_zero());
        }
    }

    #[test]
    fn order_one_rows_are_pillows_or_melons() {
        assert_eq!(template_rows(1, 1), vec![vec![[0, 0, 0]]]);
        let rows = template_rows(1, 2);
        for a in 1..=3 {
            assert!(rows.contains(&BoundaryClass::V(a).black_spec()));
        }
        assert!(!rows.contains(&BoundaryClass::MM.black_spec()));
    }
}
