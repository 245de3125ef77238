use num::{BigInt, BigRational, One, Zero};
use proptest::prelude::*;
use tensor_sde::colored_graph::BoundaryClass;
use tensor_sde::grid::{Grid, Momentum};
use tensor_sde::perturbation::*;
use tensor_sde::scaling::{rat, ExponentAssignment, Var};
use tensor_sde::sde_core::{eval_g6, series_solve_g2, G6Class, Sector, SectorProvider};

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn series(c: &[(i64, i64)]) -> ExactSeries {
    TruncatedSeries::from_coeffs(c.iter().map(|&(n, d)| q(n, d)).collect())
}

fn coeffs() -> impl Strategy<Value = Vec<(i64, i64)>> {
    prop::collection::vec((-50i64..50, 1i64..20), 4)
}

proptest! {
    #[test]
    fn ring_laws(a in coeffs(), b in coeffs(), c in coeffs()) {
        let (a, b, c) = (series(&a), series(&b), series(&c));
        prop_assert_eq!((a.clone() * b.clone()) * c.clone(), a.clone() * (b.clone() * c.clone()));
        prop_assert_eq!(a.clone() * (b.clone() + c.clone()), a.clone() * b.clone() + a.clone() * c.clone());
        prop_assert_eq!(a.clone() * b.clone(), b * a);
    }

    #[test]
    fn reciprocal_inverts(mut a in coeffs()) {
        if a[0].0 == 0 {
            a[0].0 = 1;
        }
        let s = series(&a);
        let one = TruncatedSeries::constant_value(BigRational::one(), 3);
        prop_assert_eq!(s.reciprocal().unwrap() * s, one);
    }
}

#[test]
fn free_melon() {
    let o = WickOracle::large_n(2, 0).unwrap();
    assert_eq!(o.coefficient(BoundaryClass::M, &[Momentum::new(1, 1, 1)], 0).unwrap(), q(4, 3));
}

/// Tadpoles: a closed strand in the two colors other than `c`, or in color
/// `c` alone, attached to the external line.
fn first_order_melon(grid: Grid, x: &Momentum) -> BigRational {
    let n2 = BigRational::from_integer(BigInt::from(grid.n * grid.n));
    let inv = |m: &Momentum| grid.norm2_exact(m).recip();
    let mut total = BigRational::zero();
    for c in 1..=3 {
        let others: Vec<usize> = (1..=3).filter(|&d| d != c).collect();
        for u in grid.axis() {
            for v in grid.axis() {
                total += inv(&x.with(others[0], u).with(others[1], v)) / &n2;
            }
        }
        for m in grid.axis() {
            total += inv(&x.with(c, m)) / &n2;
        }
    }
    -q(2, 1) * total * inv(x) * inv(x)
}

#[test]
fn first_order_melon_matches_tadpoles() {
    for n in [2, 3] {
        let grid = Grid::new(n).unwrap();
        let o = WickOracle::large_n(n, 1).unwrap();
        for x in grid.points() {
            assert_eq!(o.coefficient(BoundaryClass::M, &[x], 1).unwrap(), first_order_melon(grid, &x), "{x:?}");
        }
    }
}

#[test]
fn disconnected_sector_starts_at_second_order() {
    let o = WickOracle::large_n(2, 2).unwrap();
    let grid = o.grid();
    let mut second = false;
    for x in grid.points() {
        for y in grid.points() {
            let s = o.sector(BoundaryClass::MM, &[x, y]).unwrap();
            assert!(s.coeff(0).is_zero() && s.coeff(1).is_zero());
            second |= !s.coeff(2).is_zero();
        }
    }
    assert!(second);
}

fn swap12(m: &Momentum) -> Momentum {
    Momentum::new(m.get(2), m.get(1), m.get(3))
}

#[test]
fn oracle_color_symmetry() {
    let o = WickOracle::large_n(2, 2).unwrap();
    let grid = o.grid();
    let image = |c: BoundaryClass| match c {
        BoundaryClass::V(1) => BoundaryClass::V(2),
        BoundaryClass::V(2) => BoundaryClass::V(1),
        other => other,
    };
    for x in grid.points() {
        assert_eq!(o.sector(BoundaryClass::M, &[x]).unwrap(), o.sector(BoundaryClass::M, &[swap12(&x)]).unwrap());
        for y in grid.points() {
            for c in [BoundaryClass::V(1), BoundaryClass::V(2), BoundaryClass::V(3), BoundaryClass::MM] {
                let lhs = o.sector(c, &[x, y]).unwrap();
                let rhs = o.sector(image(c), &[swap12(&x), swap12(&y)]).unwrap();
                assert_eq!(lhs, rhs, "{c:?} {x:?} {y:?}");
            }
        }
    }
}

#[test]
fn pillow_is_symmetric_at_first_order() {
    let o = WickOracle::large_n(2, 1).unwrap();
    let grid = o.grid();
    for x in grid.points() {
        for y in grid.points() {
            let a = o.sector(BoundaryClass::V(1), &[x, y]).unwrap();
            let b = o.sector(BoundaryClass::V(1), &[y, x]).unwrap();
            assert_eq!(a.coeff(1), b.coeff(1));
        }
    }
}

#[test]
fn six_point_f_class_matches_closed_form() {
    // at second order the large-N F-class formula is already exact at N = 2
    let o = WickOracle::large_n(2, 2).unwrap();
    let grid = o.grid();
    let t = series_solve_g2::<BigRational>(grid, 2).unwrap();
    let pts: Vec<Momentum> = grid.points().collect();
    let mut checked = 0;
    for a in 1..=3 {
        for x in &pts {
            for y in &pts {
                for z in &pts {
                    let Ok(v) = eval_g6(&t, G6Class::F(a), x, y, z) else { continue };
                    let w = o.sector(BoundaryClass::F(a), &[*x, *y, *z]).unwrap();
                    assert_eq!(v.coeff(2), w.coeff(2), "F({a}) {x:?} {y:?} {z:?}");
                    checked += 1;
                }
            }
        }
    }
    assert_eq!(checked, 3 * 128);
}

#[test]
fn six_point_sectors_vanish_below_second_order() {
    let o = WickOracle::large_n(2, 1).unwrap();
    let x = Momentum::new(1, 2, 1);
    let y = Momentum::new(2, 1, 2);
    let z = Momentum::new(2, 2, 1);
    for c in BoundaryClass::all().into_iter().filter(|c| c.k() == 3) {
        assert!(o.sector(c, &[x, y, z]).unwrap().is_zero(), "{c:?}");
    }
}

#[test]
fn budget_errors() {
    assert!(matches!(WickOracle::large_n(3, 2), Err(tensor_sde::Error::Budget(_))));
    assert!(matches!(WickOracle::large_n(2, 3), Err(tensor_sde::Error::Budget(_))));
    assert!(matches!(check_finite_n_expansion(Sector::TwoPoint, 4, 0), Err(tensor_sde::Error::Budget(_))));
}

#[test]
fn finite_n_residuals_vanish() {
    for sector in Sector::ALL {
        for n in [1, 2] {
            let r = check_finite_n_expansion(sector, n, 2).unwrap();
            assert!(r.pass, "{}", serde_json::to_string(&r).unwrap());
            assert!(r.residuals.iter().all(|o| o.residual == "0"));
        }
    }
}

#[test]
fn disconnected_report_first_order() {
    let r = check_finite_n_expansion(Sector::FourMM, 2, 2).unwrap();
    assert_eq!(r.first_nonzero_order, Some(2));
    assert!(r.order_counting);
}

#[test]
fn term_by_term_two_point_misses_the_diagonal() {
    // the skipped b_a = x_a quotient term contributes 2 G0(x) * 3 * G0(x)^2 / N^2
    // at first order, largest at x = (1,1,1) where G0 = 4/3
    let r = check_finite_n_expansion(Sector::TwoPoint, 2, 1).unwrap();
    let lit = r.literal.unwrap();
    assert_eq!(lit[0].residual, "0");
    let g0 = q(4, 3);
    let want = q(6, 4) * g0.clone() * g0.clone() * g0;
    assert_eq!(lit[1].residual, rational_string(&want));
    assert_eq!(lit[1].worst, Some(vec![[1, 1, 1]]));
}

#[test]
fn wti_holds_and_control_fails() {
    let o = WickOracle::large_n(2, 1).unwrap();
    let r = check_wti_identity(&o, o.assignment()).unwrap();
    assert!(r.pass);
    assert_eq!(r.pairs, 8);
    let mut bad: ExponentAssignment = o.assignment().clone();
    bad.set(Var::Beta, rat(1, 1));
    let r = check_wti_identity(&o, &bad).unwrap();
    assert!(!r.pass);
    assert_ne!(r.residuals[0].residual, "0");
}

#[test]
fn finite_grid_first_order_approaches_large_n() {
    let r = large_n_trend(&[8, 16, 32], &[[(1, 2), (1, 2), (1, 2)], [(1, 4), (1, 2), (3, 4)], [(1, 1), (1, 4), (1, 2)]]).unwrap();
    assert!(r.pass, "{r:?}");
    for p in &r.points {
        // the gap is a single Riemann sum over one axis divided by N
        let ratio = p.differences[1] / p.differences[2];
        assert!((ratio - 2.0).abs() < 0.3, "{ratio}");
    }
}
