//! Reference quintuples used by tests, the CLI examples and the acceptance
//! suite.

use crate::courant::Quintuple;
use crate::fiber::QuadLieAlgebra;
use crate::geometry::{FForm, GConnection, GValuedForm, Patch};
use crate::linalg::{self, PolyVec};
use crate::scalar::poly;

/// Assembles a quintuple from 1-based component lists; panics on bad input.
pub fn build(
    n: usize,
    p: usize,
    fiber: QuadLieAlgebra,
    gamma: Vec<linalg::PolyMatrix>,
    curv: &[((usize, usize), PolyVec)],
    h: &[((usize, usize, usize), &str)],
) -> Quintuple {
    let m = fiber.dim();
    let mut r = GValuedForm::zero(n, p, m, 2);
    for ((a, b), v) in curv {
        r.set(&[a - 1, b - 1], v.clone()).expect("valid curvature component");
    }
    let mut hf = FForm::zero(n, p, 3);
    for ((a, b, c), src) in h {
        hf.set(&[a - 1, b - 1, c - 1], poly(src, n)).expect("valid H component");
    }
    let gamma = if gamma.is_empty() { GConnection::flat(n, p, m).gamma } else { gamma };
    Quintuple::new(Patch::new(n, p).expect("valid patch"), fiber, GConnection { gamma }, r, hf).expect("valid shapes")
}

fn e(n: usize, m: usize, i: usize) -> PolyVec {
    linalg::unit_vec(n, m, i - 1)
}

/// Exact case on the plane: no fiber, `H = 0`.
pub fn fixture_a() -> Quintuple {
    build(2, 2, QuadLieAlgebra::abelian(0), vec![], &[], &[])
}

/// Exact case in three dimensions with `H = x1 dx1^dx2^dx3`.
pub fn fixture_a3() -> Quintuple {
    build(3, 3, QuadLieAlgebra::abelian(0), vec![], &[], &[((1, 2, 3), "x1")])
}

/// Point base with fiber `su(2)`.
pub fn fixture_b() -> Quintuple {
    build(0, 0, QuadLieAlgebra::su2(), vec![], &[], &[])
}

/// `p = n = 4`, abelian line fiber, `R = (dx12 + dx34) e`, `H = 2 x1 dx234`.
pub fn fixture_c() -> Quintuple {
    fixture_c_with_h("2*x1")
}

/// Fixture C with `H` deleted; violates `d^F H = <R ^ R>`.
pub fn fixture_c_without_h() -> Quintuple {
    fixture_c_with_h("0")
}

fn fixture_c_with_h(h: &str) -> Quintuple {
    let n = 4;
    build(n, 4, QuadLieAlgebra::abelian(1), vec![], &[((1, 2), e(n, 1, 1)), ((3, 4), e(n, 1, 1))], &[((2, 3, 4), h)])
}

/// `p = n = 2`, `su(2)`, `Gamma_a = ad(e_a)`, `R_12 = e3`, `H = 0`.
pub fn fixture_d() -> Quintuple {
    let n = 2;
    let su2 = QuadLieAlgebra::su2();
    let gamma = (1..=2).map(|a| su2.ad_matrix(&e(n, 3, a))).collect();
    build(n, 2, su2, gamma, &[((1, 2), e(n, 3, 3))], &[])
}

/// Four-dimensional analogue of Fixture D: `Gamma_a = ad(v_a)` with
/// `v = (e1, e2, e3, e1)`, `R_ab = [v_a, v_b]`, `H = 0`.
pub fn fixture_d4() -> Quintuple {
    let n = 4;
    let su2 = QuadLieAlgebra::su2();
    let v: Vec<PolyVec> = [1, 2, 3, 1].iter().map(|&i| e(n, 3, i)).collect();
    let gamma = v.iter().map(|va| su2.ad_matrix(va)).collect();
    let mut curv = Vec::new();
    for a in 0..4 {
        for b in a + 1..4 {
            curv.push(((a + 1, b + 1), su2.bracket(&v[a], &v[b])));
        }
    }
    build(n, 4, su2, gamma, &curv, &[])
}

/// A single leaf direction, no fiber, `H = 0`.
pub fn line_field() -> Quintuple {
    build(1, 1, QuadLieAlgebra::abelian(0), vec![], &[], &[])
}

/// `su(2) + R` over the plane, flat, `R = 0`, `H = 0`.
pub fn su2_plus_line() -> Quintuple {
    let fiber = QuadLieAlgebra::su2().direct_sum(&QuadLieAlgebra::abelian(1));
    build(2, 2, fiber, vec![], &[], &[])
}

/// Every named fixture, in a fixed order.
pub fn all() -> Vec<(&'static str, Quintuple)> {
    vec![
        ("A", fixture_a()),
        ("A3", fixture_a3()),
        ("B", fixture_b()),
        ("C", fixture_c()),
        ("D", fixture_d()),
        ("D4", fixture_d4()),
        ("line", line_field()),
        ("su2+R", su2_plus_line()),
    ]
}
