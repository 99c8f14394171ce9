//! Characteristic 3-forms, hoists, coherence and the correspondence between
//! quintuples and characteristic pairs.

use crate::algebroid::{self, form_witness, AForm, ASection};
use crate::courant::{self, Quintuple, Section};
use crate::geometry::{increasing_tuples, FConnection, GConnection, GValuedForm};
use crate::linalg::{self, PolyVec, Solution};
use crate::report::{Check, Report, Witness};
use crate::scalar::{Monomial, Poly, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CharError {
    #[error("the F-connection has torsion at ({a}, {b}; {c})")]
    Torsion { a: usize, b: usize, c: usize },
    #[error("the 3-form is nonzero on an F* slot at E-frame indices {0:?}")]
    NotNaive(Vec<usize>),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("the pair is not coherent for this hoist: {0}")]
    NotCoherent(String),
}

/// A section `kappa(x) = J(x) + x` of the anchor; `j[a]` is `J(d_a)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hoist {
    pub j: Vec<PolyVec>,
}

impl Hoist {
    /// The standard hoist `J = 0`.
    pub fn standard(q: &Quintuple) -> Self {
        Hoist { j: vec![linalg::zero_vec(q.n(), q.m()); q.p()] }
    }

    pub fn negate(&self) -> Self {
        Hoist { j: self.j.iter().map(|v| linalg::vec_neg(v)).collect() }
    }

    /// `kappa(d_a)` as a section of `A`.
    pub fn kappa(&self, q: &Quintuple, a: usize) -> ASection {
        let mut s = ASection::frame(q.n(), q.m(), q.p(), q.m() + a);
        s.r = self.j[a].clone();
        s
    }

    fn check(&self, q: &Quintuple) -> Result<(), CharError> {
        if self.j.len() != q.p() || self.j.iter().any(|v| v.len() != q.m()) {
            return Err(CharError::Shape(format!("hoist must have {} vectors of length {}", q.p(), q.m())));
        }
        Ok(())
    }
}

/// An ample algebroid (carried by a quintuple whose `H` is ignored) and a
/// 3-form on it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharPair {
    pub base: Quintuple,
    pub c: AForm,
}

/// `C(r+x, s+y, t+z) = H(x,y,z) - <[r,s],t> + <R(x,y),t> + <R(y,z),r> + <R(z,x),s>`.
pub fn standard_three_form(q: &Quintuple) -> AForm {
    let (m, p) = (q.m(), q.p());
    let mut c = AForm::zero_for(q, 3);
    let cartan = q.fiber().cartan_three_form();
    for idx in increasing_tuples(m, 3) {
        let v = &cartan[idx[0]][idx[1]][idx[2]];
        c.set(&idx, Poly::constant(q.n(), v.clone())).expect("in range");
    }
    for i in 0..m {
        for ab in increasing_tuples(p, 2) {
            let e = linalg::unit_vec(q.n(), m, i);
            c.set_bigraded(&[i], &ab, q.pair_r(&e, ab[0], ab[1])).expect("in range");
        }
    }
    for (idx, h) in q.hform().components() {
        c.set_bigraded(&[], idx, h.clone()).expect("in range");
    }
    c
}

/// `nabla^E_{xi+r+x}(eta+s+y) = (nabla^F_x eta - 1/3 H(x,y,-)) + (nabla_x s + 2/3 [r,s]) + nabla^F_x y`.
pub fn e_connection(q: &Quintuple, fc: &FConnection, e1: &Section, e2: &Section) -> Section {
    let p = q.p();
    let mut out = Section::zero(q);
    let third = Rational::new(1, 3);
    for (a, xa) in e1.x.iter().enumerate() {
        if xa.is_zero() {
            continue;
        }
        for c in 0..p {
            // (nabla^F_{d_a} eta)_c = d_a eta_c - gamma[a][c][b] eta_b.
            let mut v = e2.xi[c].diff(a);
            for b in 0..p {
                if !e2.xi[b].is_zero() && !fc.gamma[a][c][b].is_zero() {
                    v -= &(&e2.xi[b] * &fc.gamma[a][c][b]);
                }
            }
            // (nabla^F_{d_a} y)^c = d_a y^c + gamma[a][b][c] y^b.
            let mut w = e2.x[c].diff(a);
            for b in 0..p {
                if !e2.x[b].is_zero() && !fc.gamma[a][b][c].is_zero() {
                    w += &(&e2.x[b] * &fc.gamma[a][b][c]);
                }
            }
            // -1/3 H(x, y, d_c).
            for b in 0..p {
                if !e2.x[b].is_zero() && !q.h(a, b, c).is_zero() {
                    v -= &(&e2.x[b] * q.h(a, b, c)).scale(&third);
                }
            }
            out.xi[c] += &(&v * xa);
            out.x[c] += &(&w * xa);
        }
        let nr = q.conn().apply(a, &e2.r);
        linalg::vec_add_assign(&mut out.r, &linalg::vec_scale(&nr, xa));
    }
    let br = q.fiber().bracket(&e1.r, &e2.r);
    linalg::vec_add_assign(&mut out.r, &linalg::vec_scale_rat(&br, &Rational::new(2, 3)));
    out
}

/// `C(e1,e2,e3) = 1/3 <[e1,e2], e3> - 1/2 <nabla_e1 e2 - nabla_e2 e1, e3> + c.p.`
/// with the Courant bracket, on sections of `E`.
pub fn e_connection_three_form_at(q: &Quintuple, fc: &FConnection, e: [&Section; 3]) -> Poly {
    let third = Rational::new(1, 3);
    let half = Rational::new(1, 2);
    let mut acc = Poly::zero(q.n());
    for (a, b, c) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
        let cb = courant::courant_bracket(q, e[a], e[b]).expect("shapes agree");
        acc += &courant::pair(q, &cb, e[c]).scale(&third);
        let tors = e_connection(q, fc, e[a], e[b]).sub(&e_connection(q, fc, e[b], e[a]));
        acc -= &courant::pair(q, &tors, e[c]).scale(&half);
    }
    acc
}

/// `C_{nabla^E}` tabulated on E-frame triples and transferred to `A`.
pub fn e_connection_form(q: &Quintuple, fc: &FConnection) -> Result<AForm, CharError> {
    let p = q.p();
    if fc.gamma.len() != p || fc.gamma.iter().any(|r| r.len() != p || r.iter().any(|v| v.len() != p)) {
        return Err(CharError::Shape(format!("Christoffel symbols must be {p}x{p}x{p}")));
    }
    if let Some((a, b, c, _)) = fc.torsion_witness() {
        return Err(CharError::Torsion { a: a + 1, b: b + 1, c: c + 1 });
    }
    let frame: Vec<Section> = (0..q.frame_len()).map(|u| Section::frame(q, u)).collect();
    let mut out = AForm::zero_for(q, 3);
    for idx in increasing_tuples(q.frame_len(), 3) {
        let v = e_connection_three_form_at(q, fc, [&frame[idx[0]], &frame[idx[1]], &frame[idx[2]]]);
        if v.is_zero() {
            continue;
        }
        if idx[0] < p {
            return Err(CharError::NotNaive(idx.iter().map(|u| u + 1).collect()));
        }
        let a_idx: Vec<usize> = idx.iter().map(|u| u - p).collect();
        out.set(&a_idx, v).expect("in range");
    }
    Ok(out)
}

/// `(nabla^kappa, R^kappa)` from the brackets `[kappa d_a, r]` and
/// `[kappa d_a, kappa d_b]` in `A`.
pub fn hoist_data(q: &Quintuple, h: &Hoist) -> Result<(GConnection, GValuedForm), CharError> {
    h.check(q)?;
    let (n, m, p) = (q.n(), q.m(), q.p());
    let kappa: Vec<ASection> = (0..p).map(|a| h.kappa(q, a)).collect();
    let mut gamma = Vec::with_capacity(p);
    for k in &kappa {
        let mut mat = linalg::zero_matrix(n, m, m);
        for i in 0..m {
            let col = algebroid::bracket(q, k, &ASection::frame(n, m, p, i));
            for (row, v) in col.r.into_iter().enumerate() {
                mat[row][i] = v;
            }
        }
        gamma.push(mat);
    }
    let mut curv = GValuedForm::zero(n, p, m, 2);
    for ab in increasing_tuples(p, 2) {
        let br = algebroid::bracket(q, &kappa[ab[0]], &kappa[ab[1]]);
        curv.set(&ab, br.r).expect("in range");
    }
    Ok((GConnection { gamma }, curv))
}

pub const COHERENCE_CHECKS: [&str; 4] = ["coherent_cartan", "coherent_mixed", "coherent_curvature", "closed"];

/// The three coherence conditions for `kappa` and closedness.
pub fn check_coherent(q: &Quintuple, c: &AForm, h: &Hoist) -> Result<Report, CharError> {
    h.check(q)?;
    if (c.nvars(), c.fiber_dim(), c.leaf_rank(), c.degree()) != (q.n(), q.m(), q.p(), 3) {
        return Err(CharError::Shape("expected a 3-form on this algebroid".into()));
    }
    let (n, m, p) = (q.n(), q.m(), q.p());
    let (_, rk) = hoist_data(q, h)?;
    let e = |i: usize| ASection::frame(n, m, p, i);
    let kappa: Vec<ASection> = (0..p).map(|a| h.kappa(q, a)).collect();
    let mut report = Report::new();

    let mut w = None;
    'a: for ijk in increasing_tuples(m, 3) {
        let (i, j, k) = (ijk[0], ijk[1], ijk[2]);
        let res = &c.evaluate(&[e(i), e(j), e(k)]) + &Poly::constant(n, q.fiber().b(i, j, k));
        if !res.is_zero() {
            w = Some(Witness::new(COHERENCE_CHECKS[0], &[i + 1, j + 1, k + 1], &res));
            break 'a;
        }
    }
    report.push(Check::from_witness(COHERENCE_CHECKS[0], w));

    let mut w = None;
    'b: for ij in increasing_tuples(m, 2) {
        for (a, ka) in kappa.iter().enumerate() {
            let res = c.evaluate(&[e(ij[0]), e(ij[1]), ka.clone()]);
            if !res.is_zero() {
                w = Some(Witness::new(COHERENCE_CHECKS[1], &[ij[0] + 1, ij[1] + 1, a + 1], &res));
                break 'b;
            }
        }
    }
    report.push(Check::from_witness(COHERENCE_CHECKS[1], w));

    let mut w = None;
    'c: for i in 0..m {
        for ab in increasing_tuples(p, 2) {
            let lhs = c.evaluate(&[e(i), kappa[ab[0]].clone(), kappa[ab[1]].clone()]);
            let rhs = q.fiber().inner(n, &linalg::unit_vec(n, m, i), &rk.get(&ab));
            let res = &lhs - &rhs;
            if !res.is_zero() {
                w = Some(Witness::new(COHERENCE_CHECKS[2], &[i + 1, ab[0] + 1, ab[1] + 1], &res));
                break 'c;
            }
        }
    }
    report.push(Check::from_witness(COHERENCE_CHECKS[2], w));

    let closed = match algebroid::ce_differential(q, c) {
        Ok(dc) => form_witness(COHERENCE_CHECKS[3], &dc),
        // A 4-form on a rank-3 algebroid is zero.
        Err(algebroid::AlgebroidError::DegreeOverflow { .. }) => None,
        Err(e) => return Err(CharError::Shape(e.to_string())),
    };
    report.push(Check::from_witness(COHERENCE_CHECKS[3], closed));
    Ok(report)
}

/// Either a hoist for which `C` is coherent or a witness that none exists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HoistVerdict {
    Found(Hoist),
    NotCoherent(Witness),
}

/// Solves `B_{ij k} J^k_a = C(e_i, e_j, d_a)` monomial by monomial. Free
/// directions (the center of `G`) are set to zero.
pub fn find_hoist(q: &Quintuple, c: &AForm) -> Result<HoistVerdict, CharError> {
    let (n, m, p) = (q.n(), q.m(), q.p());
    let pre = check_coherent(q, c, &Hoist::standard(q))?;
    for name in [COHERENCE_CHECKS[0], COHERENCE_CHECKS[3]] {
        if let Some(Check { witness: Some(w), .. }) = pre.get(name).filter(|c| !c.passed()) {
            return Ok(HoistVerdict::NotCoherent(w.clone()));
        }
    }
    let pairs = increasing_tuples(m, 2);
    let rows: Vec<Vec<Rational>> =
        pairs.iter().map(|ij| (0..m).map(|k| q.fiber().b(ij[0], ij[1], k)).collect()).collect();
    // Right-hand sides: one per (a, monomial).
    let mut keys: Vec<(usize, Monomial)> = Vec::new();
    let mut rhs: Vec<Vec<Rational>> = Vec::new();
    for a in 0..p {
        let vals: Vec<Poly> = pairs.iter().map(|ij| c.bigraded(ij, &[a])).collect();
        let mut monos: Vec<Monomial> = vals.iter().flat_map(|v| v.terms().iter().map(|(mo, _)| *mo)).collect();
        monos.sort();
        monos.dedup();
        for mo in monos {
            keys.push((a, mo));
            rhs.push(vals.iter().map(|v| v.coefficient(mo)).collect());
        }
    }
    let mut j = vec![linalg::zero_vec(n, m); p];
    for ((a, mo), sol) in keys.iter().zip(linalg::solve_many(&rows, m, &rhs)) {
        match sol {
            Solution::Unique(x) => {
                for (k, v) in x.into_iter().enumerate() {
                    if !v.is_zero() {
                        j[*a][k] += &Poly::monomial(n, *mo, v);
                    }
                }
            }
            Solution::Inconsistent { residual } => {
                let res = Poly::monomial(n, *mo, residual);
                return Ok(HoistVerdict::NotCoherent(Witness::new("hoist_solvable", &[a + 1], &res)));
            }
        }
    }
    let h = Hoist { j };
    let rep = check_coherent(q, c, &h)?;
    if let Some(bad) = rep.failures().next() {
        return Ok(HoistVerdict::NotCoherent(bad.witness.clone().expect("failures carry witnesses")));
    }
    Ok(HoistVerdict::Found(h))
}

/// `(F, G; nabla^kappa, R^kappa, H)` with `H(x, y, z) = C(kappa x, kappa y, kappa z)`.
pub fn build_from_pair(pair: &CharPair, h: &Hoist) -> Result<Quintuple, CharError> {
    let q = &pair.base;
    let rep = check_coherent(q, &pair.c, h)?;
    if let Some(bad) = rep.failures().next() {
        return Err(CharError::NotCoherent(bad.name.clone()));
    }
    let (conn, curv) = hoist_data(q, h)?;
    let p = q.p();
    let kappa: Vec<ASection> = (0..p).map(|a| h.kappa(q, a)).collect();
    let mut hform = crate::geometry::FForm::zero(q.n(), p, 3);
    for abc in increasing_tuples(p, 3) {
        let v = pair.c.evaluate(&[kappa[abc[0]].clone(), kappa[abc[1]].clone(), kappa[abc[2]].clone()]);
        hform.set(&abc, v).expect("in range");
    }
    Quintuple::new(q.patch(), q.fiber().clone(), conn, curv, hform).map_err(|e| CharError::Shape(e.to_string()))
}

/// The base algebroid of `q` (with `H` cleared) and `C = C^s`.
pub fn characteristic_pair_of(q: &Quintuple) -> CharPair {
    let base = Quintuple::new(
        q.patch(),
        q.fiber().clone(),
        q.conn().clone(),
        q.curv().clone(),
        crate::geometry::FForm::zero(q.n(), q.p(), 3),
    )
    .expect("shapes of a valid quintuple");
    CharPair { base, c: standard_three_form(q) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::scalar::poly;

    #[test]
    fn standard_form_components_on_d() {
        let q = fixtures::fixture_d();
        let c = standard_three_form(&q);
        assert_eq!(c.bigraded(&[2], &[0, 1]), poly("1", 2));
        assert_eq!(c.bigraded(&[0, 1, 2], &[]), poly("-1", 2));
        assert!(c.bigraded(&[0, 1], &[0]).is_zero());
    }

    #[test]
    fn point_base_gives_cartan_form() {
        let q = fixtures::fixture_b();
        let c = standard_three_form(&q);
        assert_eq!(c.get(&[0, 1, 2]), Poly::from_int(0, -1));
        assert_eq!(c.components().count(), 1);
    }

    #[test]
    fn e_connection_form_matches_standard() {
        let q = fixtures::fixture_d();
        let cs = standard_three_form(&q);
        assert_eq!(e_connection_form(&q, &FConnection::zero(2, 2)).unwrap(), cs);
        let mut fc = FConnection::zero(2, 2);
        fc.gamma[0][1][0] = poly("x1 + 2", 2);
        fc.gamma[1][0][0] = poly("x1 + 2", 2);
        fc.gamma[1][1][1] = poly("-3*x2", 2);
        assert_eq!(e_connection_form(&q, &fc).unwrap(), cs);
        fc.gamma[1][0][0] = poly("x1", 2);
        assert!(matches!(e_connection_form(&q, &fc), Err(CharError::Torsion { .. })));
    }

    #[test]
    fn hoist_curvature_on_d() {
        let q = fixtures::fixture_d();
        let (conn, curv) = hoist_data(&q, &Hoist::standard(&q)).unwrap();
        assert_eq!(&conn, q.conn());
        assert_eq!(&curv, q.curv());
        // J_1 = e3, J_2 = 0: R^k_12 = R_12 - nabla_2 J_1 + [J_1, J_2] = e3 - [e2, e3] = e3 - e1.
        let h = Hoist { j: vec![linalg::unit_vec(2, 3, 2), linalg::zero_vec(2, 3)] };
        let (_, rk) = hoist_data(&q, &h).unwrap();
        assert_eq!(rk.get(&[0, 1]), vec![poly("-1", 2), poly("0", 2), poly("1", 2)]);
    }

    #[test]
    fn coherence_and_round_trip() {
        for (name, q) in fixtures::all() {
            let pair = characteristic_pair_of(&q);
            let rep = check_coherent(&pair.base, &pair.c, &Hoist::standard(&q)).unwrap();
            assert!(rep.passed(), "{name}: {rep}");
            assert_eq!(find_hoist(&pair.base, &pair.c).unwrap(), HoistVerdict::Found(Hoist::standard(&q)), "{name}");
            assert_eq!(build_from_pair(&pair, &Hoist::standard(&q)).unwrap(), q, "{name}");
        }
    }

    #[test]
    fn zeroed_cartan_part_fails() {
        let q = fixtures::fixture_d();
        let mut c = standard_three_form(&q);
        c.set(&[0, 1, 2], Poly::zero(2)).unwrap();
        let rep = check_coherent(&q, &c, &Hoist::standard(&q)).unwrap();
        let w = rep.get("coherent_cartan").unwrap().witness.clone().unwrap();
        assert_eq!(w.indices, vec![1, 2, 3]);
    }

    #[test]
    fn abelian_mixed_part_is_not_coherent() {
        let q = fixtures::fixture_c();
        let mut c = standard_three_form(&q);
        // A (2,1) component needs two fiber directions; use an abelian plane.
        let q2 = fixtures::build(2, 2, crate::fiber::QuadLieAlgebra::abelian(2), vec![], &[], &[]);
        let mut c2 = standard_three_form(&q2);
        c2.set_bigraded(&[0, 1], &[0], poly("1", 2)).unwrap();
        // d of a constant (2,1) part still vanishes on a flat abelian algebroid.
        assert!(matches!(find_hoist(&q2, &c2).unwrap(), HoistVerdict::NotCoherent(_)));
        c.set_bigraded(&[], &[1, 2, 3], poly("0", 4)).unwrap();
        assert!(matches!(find_hoist(&q, &c).unwrap(), HoistVerdict::NotCoherent(_)));
    }
}
