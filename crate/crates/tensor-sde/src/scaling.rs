//! Exact-rational scaling constraints on the powers of `N` and the large-N
//! assignment they admit.

use std::collections::BTreeMap;
use std::fmt;

use num::{BigInt, BigRational, One, Signed, Zero};
use serde::Serialize;

use crate::colored_graph::{BoundaryClass, CatalogEntry};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    Alpha,
    Beta,
    Gamma,
    Delta,
    AlphaM,
    AlphaV,
    AlphaMM,
    AlphaG6,
    AlphaK,
    AlphaF,
    AlphaMV,
    AlphaMMM,
}

impl Var {
    pub const ALL: [Var; 12] = [
        Var::Alpha,
        Var::Beta,
        Var::Gamma,
        Var::Delta,
        Var::AlphaM,
        Var::AlphaV,
        Var::AlphaMM,
        Var::AlphaG6,
        Var::AlphaK,
        Var::AlphaF,
        Var::AlphaMV,
        Var::AlphaMMM,
    ];

    pub fn key(&self) -> &'static str {
        match self {
            Var::Alpha => "alpha",
            Var::Beta => "beta",
            Var::Gamma => "gamma",
            Var::Delta => "delta",
            Var::AlphaM => "alpha_m",
            Var::AlphaV => "alpha_V",
            Var::AlphaMM => "alpha_mm",
            Var::AlphaG6 => "alpha_G6",
            Var::AlphaK => "alpha_K",
            Var::AlphaF => "alpha_F",
            Var::AlphaMV => "alpha_mV",
            Var::AlphaMMM => "alpha_mmm",
        }
    }

    /// Exponent variable of a boundary class; colorings share one exponent.
    pub fn of_class(class: BoundaryClass) -> Var {
        match class {
            BoundaryClass::M => Var::AlphaM,
            BoundaryClass::V(_) => Var::AlphaV,
            BoundaryClass::MM => Var::AlphaMM,
            BoundaryClass::G(_) => Var::AlphaG6,
            BoundaryClass::K => Var::AlphaK,
            BoundaryClass::F(_) => Var::AlphaF,
            BoundaryClass::MV(_) => Var::AlphaMV,
            BoundaryClass::MMM => Var::AlphaMMM,
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "<")]
    Lt,
}

impl Relation {
    pub fn symbol(&self) -> &'static str {
        match self {
            Relation::Eq => "=",
            Relation::Ge => ">=",
            Relation::Gt => ">",
            Relation::Le => "<=",
            Relation::Lt => "<",
        }
    }
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `form rel constant`, with `form` a rational combination of variables.
#[derive(Clone, Debug)]
pub struct Constraint {
    pub tag: &'static str,
    pub form: Vec<(Var, BigRational)>,
    pub relation: Relation,
    pub constant: BigRational,
}

impl Constraint {
    fn new(tag: &'static str, form: &[(Var, i64)], relation: Relation, constant: i64) -> Self {
        Constraint {
            tag,
            form: form.iter().map(|&(v, c)| (v, rat(c, 1))).collect(),
            relation,
            constant: rat(constant, 1),
        }
    }

    pub fn lhs(&self, values: &BTreeMap<Var, BigRational>) -> Result<BigRational> {
        let mut acc = BigRational::zero();
        for (v, c) in &self.form {
            let x = values.get(v).ok_or_else(|| Error::Argument(format!("variable {v} has no value")))?;
            acc += c * x;
        }
        Ok(acc)
    }

    /// Non-negative (positive for strict relations, zero for equalities)
    /// exactly when the constraint holds.
    pub fn slack(&self, values: &BTreeMap<Var, BigRational>) -> Result<BigRational> {
        let lhs = self.lhs(values)?;
        Ok(match self.relation {
            Relation::Eq | Relation::Ge | Relation::Gt => lhs - &self.constant,
            Relation::Le | Relation::Lt => &self.constant - lhs,
        })
    }

    pub fn holds(&self, values: &BTreeMap<Var, BigRational>) -> Result<bool> {
        let s = self.slack(values)?;
        Ok(match self.relation {
            Relation::Eq => s.is_zero(),
            Relation::Ge | Relation::Le => !s.is_negative(),
            Relation::Gt | Relation::Lt => s.is_positive(),
        })
    }

    pub fn describe(&self) -> String {
        let terms: Vec<String> = self
            .form
            .iter()
            .map(|(v, c)| {
                if c.is_one() {
                    format!("+{v}")
                } else if *c == -BigRational::one() {
                    format!("-{v}")
                } else if c.is_negative() {
                    format!("{c}*{v}")
                } else {
                    format!("+{c}*{v}")
                }
            })
            .collect();
        let lhs = terms.join(" ");
        let lhs = lhs.strip_prefix('+').unwrap_or(&lhs).to_string();
        format!("{lhs} {} {}", self.relation.symbol(), self.constant)
    }
}

#[derive(Clone, Debug)]
pub struct ExponentSystem {
    pub constraints: Vec<Constraint>,
}

/// The exponent relations of the model, one tagged entry per relation.
pub fn build_exponent_system() -> ExponentSystem {
    use Relation::*;
    use Var::*;
    let c = vec![
        Constraint::new("rel1", &[(Alpha, 1), (Beta, -2), (Gamma, 1)], Eq, 0),
        Constraint::new("rel2", &[(Beta, 3), (Gamma, -2), (Delta, -1)], Ge, 1),
        Constraint::new("rel3", &[(Beta, 4), (Gamma, -3), (Delta, -1)], Ge, 2),
        Constraint::new("reldecoupling1", &[(AlphaV, 1), (Beta, -8), (Gamma, 5), (Delta, 1)], Lt, 0),
        Constraint::new("reldecoupling2", &[(AlphaMM, 1), (Beta, -8), (Gamma, 5), (Delta, 1)], Lt, -2),
        Constraint::new("reldecoupling3", &[(AlphaV, 1), (Beta, -8), (Gamma, 5), (Delta, 1)], Lt, -1),
        Constraint::new("b>=g", &[(Beta, 1), (Gamma, -1)], Ge, 0),
        Constraint::new("a1<=", &[(AlphaV, 1), (Beta, -5), (Gamma, 3)], Le, -2),
        Constraint::new("a1>=", &[(AlphaV, 1), (Beta, -1), (Delta, -1)], Ge, 0),
        Constraint::new(
            "mm-equality",
            &[(AlphaMM, 1), (AlphaV, -1), (Gamma, -2), (Delta, -1), (Beta, 3)],
            Eq,
            1,
        ),
        Constraint::new("ineg", &[(Beta, 2), (Gamma, -1)], Eq, 0),
        Constraint::new("large-N-2pt", &[(Beta, 4), (Gamma, -3), (Delta, -1)], Eq, 2),
    ];
    ExponentSystem { constraints: c }
}

/// Sector-level relations checked alongside [`build_exponent_system`]: the
/// ordering assumption between the two 4-point sectors, the genus shift
/// between `K` and `F`, and the generic 2k vs 2k+2 relation instantiated on
/// the catalog.
pub fn build_sector_system() -> ExponentSystem {
    use Relation::*;
    use Var::*;
    let mut c = vec![
        Constraint::new("V-dominates-mm", &[(AlphaV, 1), (AlphaMM, -1)], Gt, 0),
        Constraint::new("K-vs-F", &[(AlphaK, 1), (AlphaF, -1)], Eq, -2),
        Constraint::new("melon-is-2pt", &[(AlphaM, 1), (Alpha, -1)], Eq, 0),
    ];
    // alpha(B) >= alpha(B') + 2 + 4 gamma + delta - 6 beta for connected B
    // and every B' two vertices larger in the catalog
    let genrel: [(&'static str, Var, Var); 7] = [
        ("genrel(m;V)", AlphaM, AlphaV),
        ("genrel(m;m|m)", AlphaM, AlphaMM),
        ("genrel(V;G)", AlphaV, AlphaG6),
        ("genrel(V;K)", AlphaV, AlphaK),
        ("genrel(V;F)", AlphaV, AlphaF),
        ("genrel(V;m|V)", AlphaV, AlphaMV),
        ("genrel(V;m|m|m)", AlphaV, AlphaMMM),
    ];
    for (tag, b, bp) in genrel {
        c.push(Constraint::new(tag, &[(b, 1), (bp, -1), (Gamma, -4), (Delta, -1), (Beta, 6)], Ge, 2));
    }
    ExponentSystem { constraints: c }
}

/// `3 - B - 2g - 2k`.
pub fn conjecture_alpha(k: u32, b: u32, g: u32) -> BigRational {
    rat(3 - b as i64 - 2 * g as i64 - 2 * k as i64, 1)
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstraintCheck {
    pub tag: &'static str,
    pub constraint: String,
    pub slack: String,
    pub satisfied: bool,
}

#[derive(Clone, Debug)]
pub struct ExponentAssignment {
    pub values: BTreeMap<Var, BigRational>,
}

impl ExponentAssignment {
    pub fn get(&self, v: Var) -> BigRational {
        self.values.get(&v).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn set(&mut self, v: Var, x: BigRational) {
        self.values.insert(v, x);
    }

    pub fn alpha_of(&self, class: BoundaryClass) -> BigRational {
        self.get(Var::of_class(class))
    }

    /// Integer value of a variable, for the exact oracle which only handles
    /// integral powers of `N`.
    pub fn integral(&self, v: Var) -> Result<i64> {
        let x = self.get(v);
        if !x.is_integer() {
            return Err(Error::Argument(format!("exponent {v} = {x} is not an integer")));
        }
        x.to_integer().try_into().map_err(|_| Error::Argument(format!("exponent {v} out of range")))
    }

    pub fn check(&self, system: &ExponentSystem) -> Result<Vec<ConstraintCheck>> {
        system
            .constraints
            .iter()
            .map(|c| {
                Ok(ConstraintCheck {
                    tag: c.tag,
                    constraint: c.describe(),
                    slack: c.slack(&self.values)?.to_string(),
                    satisfied: c.holds(&self.values)?,
                })
            })
            .collect()
    }

    pub fn is_feasible(&self, system: &ExponentSystem) -> Result<bool> {
        Ok(self.check(system)?.iter().all(|c| c.satisfied))
    }

    /// The `beta = 0` assignment used throughout the large-N analysis.
    pub fn large_n() -> Self {
        solve(&build_exponent_system(), &BigRational::zero()).expect("beta = 0 is feasible")
    }
}

/// Derives every exponent from `beta`. Six-point exponents follow the
/// conjectured formula.
pub fn solve(system: &ExponentSystem, beta: &BigRational) -> Result<ExponentAssignment> {
    if *beta <= -BigRational::one() {
        return Err(Error::Infeasible(format!("beta = {beta} violates beta > -1")));
    }
    if beta.is_positive() {
        return Err(Error::Infeasible(format!(
            "beta = {beta} violates '0 > beta > gamma, or beta = gamma = 0'"
        )));
    }
    let two = rat(2, 1);
    let gamma = &two * beta;
    let alpha = &two * beta - &gamma;
    let delta = rat(-2, 1) - &two * beta;
    let alpha_v = rat(-2, 1) - beta;
    let alpha_mm = &alpha_v + &two * &gamma + &delta - rat(3, 1) * beta + BigRational::one();
    let mut values = BTreeMap::new();
    values.insert(Var::Alpha, alpha.clone());
    values.insert(Var::Beta, beta.clone());
    values.insert(Var::Gamma, gamma);
    values.insert(Var::Delta, delta);
    values.insert(Var::AlphaM, alpha);
    values.insert(Var::AlphaV, alpha_v);
    values.insert(Var::AlphaMM, alpha_mm);
    values.insert(Var::AlphaG6, conjecture_alpha(3, 1, 0));
    values.insert(Var::AlphaF, conjecture_alpha(3, 1, 0));
    values.insert(Var::AlphaK, conjecture_alpha(3, 1, 1));
    values.insert(Var::AlphaMV, conjecture_alpha(3, 2, 0));
    values.insert(Var::AlphaMMM, conjecture_alpha(3, 3, 0));
    let a = ExponentAssignment { values };
    let mut checks = a.check(system)?;
    checks.extend(a.check(&build_sector_system())?);
    if let Some(bad) = checks.into_iter().find(|c| !c.satisfied) {
        return Err(Error::Infeasible(format!("constraint {} fails: {}", bad.tag, bad.constraint)));
    }
    Ok(a)
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassCheck {
    pub class: BoundaryClass,
    pub k: u32,
    pub components: u32,
    pub genus: u32,
    pub conjecture: String,
    pub assigned: String,
    pub matches: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct FeasibilityReport {
    pub constraints: Vec<ConstraintCheck>,
    pub classes: Vec<ClassCheck>,
    pub feasible: bool,
    pub conjecture_consistent: bool,
}

impl FeasibilityReport {
    pub fn violations(&self) -> Vec<&'static str> {
        self.constraints.iter().filter(|c| !c.satisfied).map(|c| c.tag).collect()
    }
}

/// Checks every constraint and compares each class's exponent with the
/// conjectured formula evaluated on the class's own graph data.
pub fn verify_assignment(a: &ExponentAssignment, catalog: &[CatalogEntry]) -> Result<FeasibilityReport> {
    let mut constraints = a.check(&build_exponent_system())?;
    constraints.extend(a.check(&build_sector_system())?);
    let classes: Vec<ClassCheck> = catalog
        .iter()
        .map(|e| {
            let k = (e.vertex_count / 2) as u32;
            let conj = conjecture_alpha(k, e.components as u32, e.genus);
            let assigned = a.alpha_of(e.class);
            ClassCheck {
                class: e.class,
                k,
                components: e.components as u32,
                genus: e.genus,
                matches: conj == assigned,
                conjecture: conj.to_string(),
                assigned: assigned.to_string(),
            }
        })
        .collect();
    Ok(FeasibilityReport {
        feasible: constraints.iter().all(|c| c.satisfied),
        conjecture_consistent: classes.iter().all(|c| c.matches),
        constraints,
        classes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_zero_values() {
        let a = solve(&build_exponent_system(), &rat(0, 1)).unwrap();
        assert_eq!(a.get(Var::Alpha), rat(0, 1));
        assert_eq!(a.get(Var::Gamma), rat(0, 1));
        assert_eq!(a.get(Var::Delta), rat(-2, 1));
        assert_eq!(a.get(Var::AlphaV), rat(-2, 1));
        assert_eq!(a.get(Var::AlphaMM), rat(-3, 1));
    }

    #[test]
    fn beta_minus_half_values() {
        let a = solve(&build_exponent_system(), &rat(-1, 2)).unwrap();
        assert_eq!(a.get(Var::Gamma), rat(-1, 1));
        assert_eq!(a.get(Var::Alpha), rat(0, 1));
        assert_eq!(a.get(Var::Delta), rat(-1, 1));
        assert_eq!(a.get(Var::AlphaV), rat(-3, 2));
    }

    #[test]
    fn out_of_range_beta_is_infeasible() {
        let s = build_exponent_system();
        assert!(matches!(solve(&s, &rat(-1, 1)), Err(Error::Infeasible(m)) if m.contains("beta > -1")));
        assert!(matches!(solve(&s, &rat(1, 3)), Err(Error::Infeasible(m)) if m.contains("beta = gamma = 0")));
    }

    #[test]
    fn conjecture_examples() {
        assert_eq!(conjecture_alpha(1, 1, 0), rat(0, 1));
        assert_eq!(conjecture_alpha(2, 2, 0), rat(-3, 1));
        assert_eq!(conjecture_alpha(3, 1, 1), rat(-6, 1));
        assert_eq!(conjecture_alpha(3, 1, 0), rat(-4, 1));
    }

    #[test]
    fn system_contains_named_relations() {
        let s = build_exponent_system();
        let tags: Vec<&str> = s.constraints.iter().map(|c| c.tag).collect();
        assert_eq!(
            tags,
            [
                "rel1",
                "rel2",
                "rel3",
                "reldecoupling1",
                "reldecoupling2",
                "reldecoupling3",
                "b>=g",
                "a1<=",
                "a1>=",
                "mm-equality",
                "ineg",
                "large-N-2pt"
            ]
        );
        let rel2 = s.constraints.iter().find(|c| c.tag == "rel2").unwrap();
        assert_eq!(rel2.describe(), "3*beta -2*gamma -delta >= 1");
    }
}
