//! Isomorphisms `Theta = (tau, phi, beta)` between standard Courant
//! algebroids, transport of quintuples, the 2-forms `Phi_J` and `Psi_K`,
//! the equivalence isomorphisms and intrinsic forms.
//!
//! Adjoints follow `<phi^* s|x> = <s, phi x>_G`; `beta` is stored with
//! `<beta(d_a)|d_b> = beta[b][a]`.

use crate::algebroid::{self, form_witness, AForm, ASection};
use crate::charclass::{self, CharPair, Hoist};
use crate::courant::{self, Quintuple, Section, TestFamily};
use crate::fiber::QuadLieAlgebra;
use crate::geometry::{increasing_tuples, leafwise_d, FForm, GConnection, GValuedForm};
use crate::linalg::{self, PolyMatrix, PolyVec, Solution};
use crate::report::{Check, Report, Witness};
use crate::scalar::{Monomial, Poly, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MorphismError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("det(tau) = {0} is not a nonzero constant")]
    NonConstantDet(String),
    #[error("hypothesis {} fails at {:?}: {}", .0.identity, .0.indices, .0.residual)]
    Hypothesis(Witness),
    #[error("not an automorphism: {} fails at {:?}: {}", .0.identity, .0.indices, .0.residual)]
    NotAutomorphism(Witness),
}

fn shape(msg: impl Into<String>) -> MorphismError {
    MorphismError::Shape(msg.into())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsoData {
    pub tau: PolyMatrix,
    pub phi: GValuedForm,
    pub beta: PolyMatrix,
}

impl IsoData {
    pub fn identity(n: usize, p: usize, m: usize) -> Self {
        IsoData {
            tau: linalg::identity_matrix(n, m),
            phi: GValuedForm::zero(n, p, m, 1),
            beta: linalg::zero_matrix(n, p, p),
        }
    }

    /// `phi(d_a)`.
    pub fn phi_at(&self, a: usize) -> PolyVec {
        self.phi.get(&[a])
    }

    fn shape_error(&self, n: usize, p: usize, m: usize) -> Option<String> {
        let square = |a: &PolyMatrix, k: usize| a.len() == k && a.iter().all(|r| r.len() == k);
        if !square(&self.tau, m) {
            return Some(format!("tau must be {m}x{m}"));
        }
        if !square(&self.beta, p) {
            return Some(format!("beta must be {p}x{p}"));
        }
        let ph = &self.phi;
        if (ph.nvars(), ph.leaf_rank(), ph.fiber_dim(), ph.degree()) != (n, p, m, 1) {
            return Some(format!("phi must be a G-valued 1-form with p = {p}, m = {m}"));
        }
        let polys = self.tau.iter().chain(&self.beta).flatten();
        if polys.clone().any(|f| f.nvars() != n) {
            return Some(format!("entries must use {n} coordinates"));
        }
        None
    }

    fn check_shape(&self, q: &Quintuple) -> Result<(), MorphismError> {
        match self.shape_error(q.n(), q.p(), q.m()) {
            Some(msg) => Err(shape(msg)),
            None => Ok(()),
        }
    }
}

/// An automorphism `r + x -> tau r + phi x + x` of the ample algebroid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Automorphism {
    pub tau: PolyMatrix,
    pub phi: GValuedForm,
}

impl Automorphism {
    pub fn identity(n: usize, p: usize, m: usize) -> Self {
        Automorphism { tau: linalg::identity_matrix(n, m), phi: GValuedForm::zero(n, p, m, 1) }
    }

    fn as_iso(&self) -> IsoData {
        let (n, p) = (self.phi.nvars(), self.phi.leaf_rank());
        IsoData { tau: self.tau.clone(), phi: self.phi.clone(), beta: linalg::zero_matrix(n, p, p) }
    }
}

fn first_nonzero_vec(v: &[Poly]) -> Option<(usize, &Poly)> {
    v.iter().enumerate().find(|(_, f)| !f.is_zero())
}

fn tau_checks(tau: &PolyMatrix, fiber: &QuadLieAlgebra, n: usize) -> Vec<Check> {
    let m = fiber.dim();
    let e = |i: usize| linalg::unit_vec(n, m, i);
    let col = |i: usize| linalg::mat_vec(tau, &e(i));
    let mut w = None;
    'br: for i in 0..m {
        for j in i + 1..m {
            let lhs = linalg::mat_vec(tau, &fiber.bracket(&e(i), &e(j)));
            let res = linalg::vec_sub(&lhs, &fiber.bracket(&col(i), &col(j)));
            if let Some((k, r)) = first_nonzero_vec(&res) {
                w = Some(Witness::new("tau_bracket", &[i + 1, j + 1, k + 1], r));
                break 'br;
            }
        }
    }
    let mut out = vec![Check::from_witness("tau_bracket", w)];
    let mut w = None;
    'me: for i in 0..m {
        for j in i..m {
            let res = &fiber.inner(n, &col(i), &col(j)) - &Poly::constant(n, fiber.g(i, j).clone());
            if !res.is_zero() {
                w = Some(Witness::new("tau_metric", &[i + 1, j + 1], &res));
                break 'me;
            }
        }
    }
    out.push(Check::from_witness("tau_metric", w));
    let det = linalg::det(tau, n);
    let ok = det.as_constant().is_some_and(|c| !c.is_zero());
    out.push(Check::from_witness("tau_det_constant", (!ok).then(|| Witness::new("tau_det_constant", &[], &det))));
    out
}

/// Checks `iso1`, bracket and metric preservation by `tau`, and that
/// `det(tau)` is a nonzero constant.
pub fn validate_iso(i: &IsoData, fiber: &QuadLieAlgebra) -> Report {
    let mut report = Report::new();
    let (n, p, m) = (i.phi.nvars(), i.phi.leaf_rank(), fiber.dim());
    if let Some(msg) = i.shape_error(n, p, m) {
        report.push(Check::fail("iso_shape", Witness::with_text("iso_shape", &[], msg)));
        return report;
    }
    let half = Rational::new(1, 2);
    let mut w = None;
    'iso1: for a in 0..p {
        for b in a..p {
            let sym = (&i.beta[b][a] + &i.beta[a][b]).scale(&half);
            let res = &sym + &fiber.inner(n, &i.phi_at(a), &i.phi_at(b));
            if !res.is_zero() {
                w = Some(Witness::new("iso1", &[a + 1, b + 1], &res));
                break 'iso1;
            }
        }
    }
    report.push(Check::from_witness("iso1", w));
    for c in tau_checks(&i.tau, fiber, n) {
        report.push(c);
    }
    report
}

/// `Theta(xi + r + x) = (xi + beta x - 2 phi^* tau r) + (tau r + phi x) + x`.
pub fn apply_iso(q: &Quintuple, i: &IsoData, e: &Section) -> Result<Section, MorphismError> {
    i.check_shape(q)?;
    if e.xi.len() != q.p() || e.x.len() != q.p() || e.r.len() != q.m() {
        return Err(shape("section does not match the quintuple"));
    }
    Ok(apply(q, i, e))
}

fn apply(q: &Quintuple, i: &IsoData, e: &Section) -> Section {
    let (n, p) = (q.n(), q.p());
    let tr = linalg::mat_vec(&i.tau, &e.r);
    let mut out = Section { xi: e.xi.clone(), r: tr.clone(), x: e.x.clone() };
    for a in 0..p {
        let phi_a = i.phi_at(a);
        for b in 0..p {
            if !e.x[a].is_zero() && !i.beta[b][a].is_zero() {
                out.xi[b] += &(&i.beta[b][a] * &e.x[a]);
            }
        }
        out.xi[a] -= &q.fiber().inner(n, &tr, &phi_a).scale_int(2);
        if !e.x[a].is_zero() {
            linalg::vec_add_assign(&mut out.r, &linalg::vec_scale(&phi_a, &e.x[a]));
        }
    }
    out
}

fn tau_inverse(tau: &PolyMatrix, n: usize) -> Result<PolyMatrix, MorphismError> {
    linalg::inverse_const_det(tau, n).ok_or_else(|| MorphismError::NonConstantDet(linalg::det(tau, n).to_string()))
}

/// `tau nabla_a (tau^-1 s) + [s, phi_a]`.
fn moved_connection(q: &Quintuple, tau: &PolyMatrix, tinv: &PolyMatrix, phis: &[PolyVec]) -> GConnection {
    let gamma = (0..q.p())
        .map(|a| {
            let t1 = linalg::mat_mul(tau, &linalg::mat_diff(tinv, a));
            let t2 = linalg::mat_mul(&linalg::mat_mul(tau, &q.conn().gamma[a]), tinv);
            linalg::mat_sub(&linalg::mat_add(&t1, &t2), &q.fiber().ad_matrix(&phis[a]))
        })
        .collect();
    GConnection { gamma }
}

/// `tau R_ab + tau (nabla_b psi_a - nabla_a psi_b) + [phi_a, phi_b]` with
/// `psi = tau^-1 phi`.
fn moved_curvature(q: &Quintuple, tau: &PolyMatrix, psi: &[PolyVec], phis: &[PolyVec]) -> GValuedForm {
    let mut out = GValuedForm::zero(q.n(), q.p(), q.m(), 2);
    for ab in increasing_tuples(q.p(), 2) {
        let (a, b) = (ab[0], ab[1]);
        let inner =
            linalg::vec_add(q.r(a, b), &linalg::vec_sub(&q.conn().apply(b, &psi[a]), &q.conn().apply(a, &psi[b])));
        let v = linalg::vec_add(&linalg::mat_vec(tau, &inner), &q.fiber().bracket(&phis[a], &phis[b]));
        out.set(&ab, v).expect("in range");
    }
    out
}

/// The quintuple `q2` for which `Theta: E(q1) -> E(q2)` is an isomorphism.
pub fn transport(q1: &Quintuple, i: &IsoData) -> Result<Quintuple, MorphismError> {
    i.check_shape(q1)?;
    let (n, p) = (q1.n(), q1.p());
    let tinv = tau_inverse(&i.tau, n)?;
    let phis: Vec<PolyVec> = (0..p).map(|a| i.phi_at(a)).collect();
    let psi: Vec<PolyVec> = phis.iter().map(|v| linalg::mat_vec(&tinv, v)).collect();
    let conn = moved_connection(q1, &i.tau, &tinv, &phis);
    let curv = moved_curvature(q1, &i.tau, &psi, &phis);
    let g = q1.fiber();
    let mut hform = FForm::zero(n, p, 3);
    for abc in increasing_tuples(p, 3) {
        let (a, b, c) = (abc[0], abc[1], abc[2]);
        let mut v = q1.h(a, b, c) - &g.inner(n, &phis[a], &g.bracket(&phis[b], &phis[c])).scale_int(2);
        for (x, y, z) in [(a, b, c), (b, c, a), (c, a, b)] {
            let nab = linalg::vec_sub(&q1.conn().apply(y, &psi[z]), q1.r(y, z));
            v += &g.inner(n, &phis[x], &linalg::mat_vec(&i.tau, &nab)).scale_int(2);
            v += &i.beta[y][z].diff(x);
        }
        hform.set(&abc, v).expect("in range");
    }
    Quintuple::new(q1.patch(), g.clone(), conn, curv, hform).map_err(|e| shape(e.to_string()))
}

/// `second . first`.
pub fn compose(fiber: &QuadLieAlgebra, first: &IsoData, second: &IsoData) -> IsoData {
    let (n, p, m) = (first.phi.nvars(), first.phi.leaf_rank(), fiber.dim());
    let moved: Vec<PolyVec> = (0..p).map(|a| linalg::mat_vec(&second.tau, &first.phi_at(a))).collect();
    let mut phi = GValuedForm::zero(n, p, m, 1);
    for (a, v) in moved.iter().enumerate() {
        phi.set(&[a], linalg::vec_add(v, &second.phi_at(a))).expect("in range");
    }
    let mut beta = linalg::mat_add(&first.beta, &second.beta);
    for (b, row) in beta.iter_mut().enumerate() {
        for (a, entry) in row.iter_mut().enumerate() {
            *entry -= &fiber.inner(n, &moved[a], &second.phi_at(b)).scale_int(2);
        }
    }
    IsoData { tau: linalg::mat_mul(&second.tau, &first.tau), phi, beta }
}

pub const INTERTWINING_CHECKS: [&str; 3] = ["pairing_preserved", "anchor_preserved", "intertwines_dorfman"];

/// `Theta` against both Courant structures on the test family of `q1`.
/// Witness indices are 1-based family indices and, for vector identities,
/// the E-frame slot.
pub fn intertwining_check(
    q1: &Quintuple,
    q2: &Quintuple,
    i: &IsoData,
    degree_cap: u32,
) -> Result<Report, MorphismError> {
    i.check_shape(q1)?;
    i.check_shape(q2)?;
    let fam = TestFamily::new(q1, degree_cap);
    let images: Vec<Section> = fam.sections.iter().map(|e| apply(q1, i, e)).collect();
    let (mut wp, mut wa, mut wd) = (None, None, None);
    for (k, (e, te)) in fam.sections.iter().zip(&images).enumerate() {
        if wa.is_none() {
            if let Some((a, r)) = first_nonzero_vec(&linalg::vec_sub(&te.x, &e.x)) {
                wa = Some(Witness::new(INTERTWINING_CHECKS[1], &[k + 1, a + 1], r));
            }
        }
        for (l, (f, tf)) in fam.sections.iter().zip(&images).enumerate() {
            if wp.is_none() && l >= k {
                let res = &courant::pair(q2, te, tf) - &courant::pair(q1, e, f);
                if !res.is_zero() {
                    wp = Some(Witness::new(INTERTWINING_CHECKS[0], &[k + 1, l + 1], &res));
                }
            }
            if wd.is_none() {
                let lhs = apply(q1, i, &courant::bracket(q1, e, f));
                let res = lhs.sub(&courant::bracket(q2, te, tf));
                if let Some((u, r)) = res.first_nonzero() {
                    wd = Some(Witness::new(INTERTWINING_CHECKS[2], &[k + 1, l + 1, u + 1], r));
                }
            }
        }
        if wp.is_some() && wa.is_some() && wd.is_some() {
            break;
        }
    }
    let mut report = Report::new();
    for (name, w) in INTERTWINING_CHECKS.iter().zip([wp, wa, wd]) {
        report.push(Check::from_witness(*name, w));
    }
    Ok(report)
}

fn check_j(q: &Quintuple, j: &GValuedForm) -> Result<(), MorphismError> {
    if (j.nvars(), j.leaf_rank(), j.fiber_dim(), j.degree()) != (q.n(), q.p(), q.m(), 1) {
        return Err(shape("J must be a G-valued 1-form on this quintuple"));
    }
    Ok(())
}

fn check_k(q: &Quintuple, k: &PolyMatrix) -> Result<(), MorphismError> {
    if k.len() != q.p() || k.iter().any(|r| r.len() != q.p()) {
        return Err(shape(format!("K must be {0}x{0}", q.p())));
    }
    Ok(())
}

/// `Phi_J(r + x, s + y) = <r, J y> - <s, J x>`.
pub fn phi_form(q: &Quintuple, j: &GValuedForm) -> Result<AForm, MorphismError> {
    check_j(q, j)?;
    let mut out = AForm::zero_for(q, 2);
    for a in 0..q.p() {
        for (i, v) in q.fiber().lower(&j.get(&[a])).into_iter().enumerate() {
            out.set_bigraded(&[i], &[a], v).expect("in range");
        }
    }
    Ok(out)
}

/// `Psi_K(r + x, s + y) = <x|K y> - <y|K x>` with `<K(d_a)|d_b> = K[b][a]`.
pub fn psi_form(q: &Quintuple, k: &PolyMatrix) -> Result<AForm, MorphismError> {
    check_k(q, k)?;
    let mut out = AForm::zero_for(q, 2);
    for ab in increasing_tuples(q.p(), 2) {
        let (a, b) = (ab[0], ab[1]);
        out.set_bigraded(&[], &ab, &k[a][b] - &k[b][a]).expect("in range");
    }
    Ok(out)
}

fn apply_j(j: &GValuedForm, x: &[Poly]) -> PolyVec {
    let mut out = linalg::zero_vec(j.nvars(), j.fiber_dim());
    for (a, xa) in x.iter().enumerate() {
        if !xa.is_zero() {
            linalg::vec_add_assign(&mut out, &linalg::vec_scale(&j.get(&[a]), xa));
        }
    }
    out
}

/// `nabla_x v` for a constant vector field `x`.
fn nabla_along(q: &Quintuple, x: &[Poly], v: &[Poly]) -> PolyVec {
    let mut out = linalg::zero_vec(q.n(), q.m());
    for (a, xa) in x.iter().enumerate() {
        if !xa.is_zero() {
            linalg::vec_add_assign(&mut out, &linalg::vec_scale(&q.conn().apply(a, v), xa));
        }
    }
    out
}

fn curvature_at(q: &Quintuple, x: &[Poly], y: &[Poly]) -> PolyVec {
    let mut out = linalg::zero_vec(q.n(), q.m());
    for (a, xa) in x.iter().enumerate() {
        for (b, yb) in y.iter().enumerate() {
            if a != b && !xa.is_zero() && !yb.is_zero() {
                linalg::vec_add_assign(&mut out, &linalg::vec_scale(q.r(a, b), &(xa * yb)));
            }
        }
    }
    out
}

/// `d Phi_J(v1, v2, v3) = <r1, nabla_x3 J(x2) - nabla_x2 J(x3) + J[x2, x3]>
/// - <J(x1), R(x2, x3) + [r2, r3]> + c.p.`, tabulated on the frame, where
/// `[x2, x3] = 0`.
pub fn d_phi_closed(q: &Quintuple, j: &GValuedForm) -> Result<AForm, MorphismError> {
    check_j(q, j)?;
    let (n, m, p) = (q.n(), q.m(), q.p());
    let g = q.fiber();
    let mut out = AForm::zero_for(q, 3);
    if m + p < 3 {
        return Ok(out);
    }
    let frame: Vec<ASection> = (0..m + p).map(|u| ASection::frame(n, m, p, u)).collect();
    for idx in increasing_tuples(m + p, 3) {
        let v = [&frame[idx[0]], &frame[idx[1]], &frame[idx[2]]];
        let mut acc = Poly::zero(n);
        for (s, t, u) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            let curl = linalg::vec_sub(
                &nabla_along(q, &v[u].x, &apply_j(j, &v[t].x)),
                &nabla_along(q, &v[t].x, &apply_j(j, &v[u].x)),
            );
            acc += &g.inner(n, &v[s].r, &curl);
            let rr = linalg::vec_add(&curvature_at(q, &v[t].x, &v[u].x), &g.bracket(&v[t].r, &v[u].r));
            acc -= &g.inner(n, &apply_j(j, &v[s].x), &rr);
        }
        out.set(&idx, acc).expect("in range");
    }
    Ok(out)
}

/// `d Psi_K(x, y, z) = <x|L_z K(y) - L_y K(z) + K[y, z]> + <[x, y]|K(z)> + c.p.`
/// on coordinate fields, where brackets vanish.
pub fn d_psi_closed(q: &Quintuple, k: &PolyMatrix) -> Result<AForm, MorphismError> {
    check_k(q, k)?;
    let mut out = AForm::zero_for(q, 3);
    // <d_a | L_{d_c} K(d_b)> = d_c K[a][b].
    let t = |a: usize, b: usize, c: usize| &k[a][b].diff(c) - &k[a][c].diff(b);
    for abc in increasing_tuples(q.p(), 3) {
        let (a, b, c) = (abc[0], abc[1], abc[2]);
        let v = &(&t(a, b, c) + &t(b, c, a)) + &t(c, a, b);
        out.set_bigraded(&[], &abc, v).expect("in range");
    }
    Ok(out)
}

/// `f^* w` where `images[u]` is the image of frame element `u`.
pub fn pullback_form(w: &AForm, images: &[ASection]) -> AForm {
    let mut out = AForm::zero(w.nvars(), w.fiber_dim(), w.leaf_rank(), w.degree());
    for idx in increasing_tuples(images.len(), w.degree()) {
        let args: Vec<ASection> = idx.iter().map(|&u| images[u].clone()).collect();
        out.set(&idx, w.evaluate(&args)).expect("in range");
    }
    out
}

/// Frame images of `r + x -> tau r + phi x + x`.
fn frame_images(n: usize, p: usize, tau: &PolyMatrix, phi: &GValuedForm) -> Vec<ASection> {
    let m = tau.len();
    let mut out = Vec::with_capacity(m + p);
    for i in 0..m {
        let mut s = ASection::zero(n, m, p);
        s.r = tau.iter().map(|row| row[i].clone()).collect();
        out.push(s);
    }
    for a in 0..p {
        let mut s = ASection::frame(n, m, p, m + a);
        s.r = phi.get(&[a]);
        out.push(s);
    }
    out
}

fn d_or_zero(q: &Quintuple, w: &AForm) -> Result<AForm, MorphismError> {
    match algebroid::ce_differential(q, w) {
        Ok(d) => Ok(d),
        Err(algebroid::AlgebroidError::DegreeOverflow { .. }) => Ok(AForm::zero_for(q, w.degree() + 1)),
        Err(e) => Err(shape(e.to_string())),
    }
}

/// `iota^* C^s_2 - C^s_1 = d(1/2 Psi_beta + Phi_{tau^-1 phi})` with
/// `iota(r + x) = tau r + phi x + x`.
pub fn coboundary_identity_check(q1: &Quintuple, i: &IsoData) -> Result<Report, MorphismError> {
    let q2 = transport(q1, i)?;
    let (n, p, m) = (q1.n(), q1.p(), q1.m());
    let tinv = tau_inverse(&i.tau, n)?;
    let images = frame_images(n, p, &i.tau, &i.phi);
    let lhs = pullback_form(&charclass::standard_three_form(&q2), &images).sub(&charclass::standard_three_form(q1));
    let mut psi = GValuedForm::zero(n, p, m, 1);
    for a in 0..p {
        psi.set(&[a], linalg::mat_vec(&tinv, &i.phi_at(a))).expect("in range");
    }
    let prim = psi_form(q1, &i.beta)?.scale(&Rational::new(1, 2)).add(&phi_form(q1, &psi)?);
    let rhs = d_or_zero(q1, &prim)?;
    let mut report = Report::new();
    report.push(Check::from_witness("coboundary_identity", form_witness("coboundary_identity", &lhs.sub(&rhs))));
    Ok(report)
}

/// Which equivalence isomorphism to construct.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftKind {
    Hoist,
    Omega,
    Central,
}

/// An isomorphism together with the target predicted by the corresponding
/// characteristic pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Canned {
    pub iso: IsoData,
    pub target: Quintuple,
}

fn jstar_j(q: &Quintuple, j: &GValuedForm, c: Rational) -> PolyMatrix {
    let (n, p) = (q.n(), q.p());
    let mut beta = linalg::zero_matrix(n, p, p);
    for (b, row) in beta.iter_mut().enumerate() {
        for (a, entry) in row.iter_mut().enumerate() {
            *entry = q.fiber().inner(n, &j.get(&[a]), &j.get(&[b])).scale(&c);
        }
    }
    beta
}

fn pair_target(q: &Quintuple, extra: &AForm, hoist: &Hoist) -> Result<Quintuple, MorphismError> {
    let mut pair: CharPair = charclass::characteristic_pair_of(q);
    pair.c = pair.c.add(extra);
    charclass::build_from_pair(&pair, hoist).map_err(|e| match e {
        charclass::CharError::NotCoherent(name) => {
            MorphismError::Hypothesis(Witness::with_text(name, &[], "target pair is not coherent"))
        }
        other => shape(other.to_string()),
    })
}

/// `I(xi + r + x) = (xi + beta x - 2 J^* r) + (r + J x) + x`, `beta = -J^* J`,
/// onto the structure of `(C^s + d Phi_J, kappa_0 - J)`.
pub fn hoist_shift(q: &Quintuple, j: &GValuedForm) -> Result<Canned, MorphismError> {
    check_j(q, j)?;
    let (n, p, m) = (q.n(), q.p(), q.m());
    let iso =
        IsoData { tau: linalg::identity_matrix(n, m), phi: j.clone(), beta: jstar_j(q, j, Rational::from_int(-1)) };
    let hoist = Hoist { j: (0..p).map(|a| linalg::vec_neg(&j.get(&[a]))).collect() };
    let target = pair_target(q, &d_or_zero(q, &phi_form(q, j)?)?, &hoist)?;
    Ok(Canned { iso, target })
}

/// Checks that every `J(d_a)` lies in the span of `fiber.center()`,
/// monomial by monomial.
fn central_witness(q: &Quintuple, j: &GValuedForm) -> Option<Witness> {
    let m = q.m();
    let basis = q.fiber().center();
    let rows: Vec<Vec<Rational>> = (0..m).map(|i| basis.iter().map(|z| z[i].clone()).collect()).collect();
    for a in 0..q.p() {
        let ja = j.get(&[a]);
        let mut monos: Vec<Monomial> = ja.iter().flat_map(|f| f.terms().iter().map(|(mo, _)| *mo)).collect();
        monos.sort();
        monos.dedup();
        for mo in monos {
            let rhs: Vec<Rational> = ja.iter().map(|f| f.coefficient(mo)).collect();
            let consistent = if basis.is_empty() {
                rhs.iter().all(Rational::is_zero)
            } else {
                matches!(linalg::solve_many(&rows, basis.len(), std::slice::from_ref(&rhs))[0], Solution::Unique(_))
            };
            if !consistent {
                let (i, c) = rhs.iter().enumerate().find(|(_, c)| !c.is_zero()).expect("nonzero coefficient");
                return Some(Witness::new("J_central", &[a + 1, i + 1], &Poly::monomial(q.n(), mo, c.clone())));
            }
        }
    }
    None
}

/// `phi = 1/2 J`, `beta = -1/4 J^* J`, onto the structure of
/// `(C^s + d Phi_J, kappa_0)`. Requires `J(F)` central and
/// `nabla_a J_b = nabla_b J_a`.
pub fn central_shift(q: &Quintuple, j: &GValuedForm) -> Result<Canned, MorphismError> {
    check_j(q, j)?;
    let (n, p, m) = (q.n(), q.p(), q.m());
    if let Some(w) = central_witness(q, j) {
        return Err(MorphismError::Hypothesis(w));
    }
    for ab in increasing_tuples(p, 2) {
        let (a, b) = (ab[0], ab[1]);
        let curl = linalg::vec_sub(&q.conn().apply(a, &j.get(&[b])), &q.conn().apply(b, &j.get(&[a])));
        if let Some((i, r)) = first_nonzero_vec(&curl) {
            return Err(MorphismError::Hypothesis(Witness::new("J_curl_free", &[a + 1, b + 1, i + 1], r)));
        }
    }
    let mut phi = GValuedForm::zero(n, p, m, 1);
    for a in 0..p {
        phi.set(&[a], linalg::vec_scale_rat(&j.get(&[a]), &Rational::new(1, 2))).expect("in range");
    }
    let iso = IsoData { tau: linalg::identity_matrix(n, m), phi, beta: jstar_j(q, j, Rational::new(-1, 4)) };
    let target = pair_target(q, &d_or_zero(q, &phi_form(q, j)?)?, &Hoist::standard(q))?;
    Ok(Canned { iso, target })
}

/// `rho^* w` for a leafwise form `w`.
pub fn anchor_pullback(q: &Quintuple, w: &FForm) -> AForm {
    let mut out = AForm::zero_for(q, w.degree());
    for (idx, v) in w.components() {
        out.set_bigraded(&[], idx, v.clone()).expect("in range");
    }
    out
}

/// `I(xi + r + x) = (xi - omega^# x) + r + x` onto the structure of
/// `(C^s + rho^* d^F omega, kappa_0)`.
pub fn omega_shift(q: &Quintuple, omega: &FForm) -> Result<Canned, MorphismError> {
    let (n, p, m) = (q.n(), q.p(), q.m());
    if (omega.nvars(), omega.leaf_rank(), omega.degree()) != (n, p, 2) {
        return Err(shape("omega must be a leafwise 2-form on this quintuple"));
    }
    let mut beta = linalg::zero_matrix(n, p, p);
    for (b, row) in beta.iter_mut().enumerate() {
        for (a, entry) in row.iter_mut().enumerate() {
            *entry = -omega.get(&[a, b]);
        }
    }
    let iso = IsoData { tau: linalg::identity_matrix(n, m), phi: GValuedForm::zero(n, p, m, 1), beta };
    let target = pair_target(q, &anchor_pullback(q, &leafwise_d(omega)), &Hoist::standard(q))?;
    Ok(Canned { iso, target })
}

/// Validates the iso, transports and compares with the predicted target.
pub fn canned_check(q: &Quintuple, canned: &Canned) -> Result<Report, MorphismError> {
    let mut report = validate_iso(&canned.iso, q.fiber());
    let q2 = transport(q, &canned.iso)?;
    let w = (q2 != canned.target).then(|| first_difference(&q2, &canned.target));
    report.push(Check::from_witness("transport_matches_target", w));
    Ok(report)
}

/// First differing datum of two quintuples with the same shape.
pub fn first_difference(a: &Quintuple, b: &Quintuple) -> Witness {
    let p = a.p();
    for t in 0..p {
        let d = linalg::mat_sub(&a.conn().gamma[t], &b.conn().gamma[t]);
        for (i, row) in d.iter().enumerate() {
            if let Some((j, r)) = first_nonzero_vec(row) {
                return Witness::new("gamma", &[t + 1, i + 1, j + 1], r);
            }
        }
    }
    for ab in increasing_tuples(p, 2) {
        if let Some((k, r)) = first_nonzero_vec(&linalg::vec_sub(a.r(ab[0], ab[1]), b.r(ab[0], ab[1]))) {
            return Witness::new("curvature", &[ab[0] + 1, ab[1] + 1, k + 1], r);
        }
    }
    for abc in increasing_tuples(p, 3) {
        let r = a.h(abc[0], abc[1], abc[2]) - b.h(abc[0], abc[1], abc[2]);
        if !r.is_zero() {
            return Witness::new("hform", &[abc[0] + 1, abc[1] + 1, abc[2] + 1], &r);
        }
    }
    Witness::with_text("fiber", &[], "fiber or patch differs")
}

/// Bracket and metric preservation by `tau` plus the transport equations
/// for `nabla` and `R` with source equal to target.
pub fn check_automorphism(q: &Quintuple, s: &Automorphism) -> Result<Report, MorphismError> {
    s.as_iso().check_shape(q)?;
    let n = q.n();
    let mut report = Report::new();
    for c in tau_checks(&s.tau, q.fiber(), n) {
        report.push(c);
    }
    let Some(tinv) = linalg::inverse_const_det(&s.tau, n) else {
        return Ok(report);
    };
    let phis: Vec<PolyVec> = (0..q.p()).map(|a| s.phi.get(&[a])).collect();
    let psi: Vec<PolyVec> = phis.iter().map(|v| linalg::mat_vec(&tinv, v)).collect();
    let conn = moved_connection(q, &s.tau, &tinv, &phis);
    let mut w = None;
    'g: for (a, (new, old)) in conn.gamma.iter().zip(&q.conn().gamma).enumerate() {
        for (i, row) in linalg::mat_sub(new, old).iter().enumerate() {
            if let Some((j, r)) = first_nonzero_vec(row) {
                w = Some(Witness::new("preserves_connection", &[a + 1, i + 1, j + 1], r));
                break 'g;
            }
        }
    }
    report.push(Check::from_witness("preserves_connection", w));
    let curv = moved_curvature(q, &s.tau, &psi, &phis);
    let mut w = None;
    for ab in increasing_tuples(q.p(), 2) {
        if let Some((k, r)) = first_nonzero_vec(&linalg::vec_sub(&curv.get(&ab), q.r(ab[0], ab[1]))) {
            w = Some(Witness::new("preserves_curvature", &[ab[0] + 1, ab[1] + 1, k + 1], r));
            break;
        }
    }
    report.push(Check::from_witness("preserves_curvature", w));
    Ok(report)
}

/// `sigma^* C - C` for an automorphism `sigma` of the ample algebroid.
pub fn intrinsic_form(q: &Quintuple, s: &Automorphism, c: &AForm) -> Result<AForm, MorphismError> {
    let rep = check_automorphism(q, s)?;
    if let Some(bad) = rep.failures().next() {
        return Err(MorphismError::NotAutomorphism(bad.witness.clone().expect("failures carry witnesses")));
    }
    if (c.nvars(), c.fiber_dim(), c.leaf_rank()) != (q.n(), q.m(), q.p()) {
        return Err(shape("form does not live on this algebroid"));
    }
    let images = frame_images(q.n(), q.p(), &s.tau, &s.phi);
    Ok(pullback_form(c, &images).sub(c))
}

/// `d psi = theta` for a supplied primitive.
pub fn verify_primitive(q: &Quintuple, theta: &AForm, psi: &AForm) -> Result<Check, MorphismError> {
    let d = d_or_zero(q, psi)?;
    if d.degree() != theta.degree() {
        return Err(shape("primitive has the wrong degree"));
    }
    Ok(Check::from_witness("primitive", form_witness("primitive", &d.sub(theta))))
}
