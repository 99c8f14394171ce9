//! The ample Lie algebroid `A = G + F` of a quintuple and its forms.
//!
//! A-forms use a combined frame: fiber directions `e_1..e_m` come first
//! (indices `0..m`), leaf directions `d_1..d_p` follow (indices `m..m+p`).

use std::collections::BTreeMap;

use crate::courant::{self, Quintuple, Section};
use crate::geometry::{increasing_tuples, sort_with_sign};
use crate::linalg::{self, PolyVec};
use crate::report::{Check, Report, Witness};
use crate::scalar::{Poly, Rational};

/// Largest supported form degree.
pub const MAX_FORM_DEGREE: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AlgebroidError {
    #[error("form degree {degree} exceeds the rank {rank} of the algebroid or the supported maximum")]
    DegreeOverflow { degree: usize, rank: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
}

/// A `k`-form on `A`, stored on strictly increasing tuples of the combined
/// frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AForm {
    nvars: usize,
    m: usize,
    p: usize,
    degree: usize,
    comps: BTreeMap<Vec<usize>, Poly>,
}

impl AForm {
    pub fn zero(nvars: usize, m: usize, p: usize, degree: usize) -> Self {
        AForm { nvars, m, p, degree, comps: BTreeMap::new() }
    }

    pub fn zero_for(q: &Quintuple, degree: usize) -> Self {
        AForm::zero(q.n(), q.m(), q.p(), degree)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn fiber_dim(&self) -> usize {
        self.m
    }

    pub fn leaf_rank(&self) -> usize {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn rank(&self) -> usize {
        self.m + self.p
    }

    pub fn get(&self, idx: &[usize]) -> Poly {
        match sort_with_sign(idx) {
            None => Poly::zero(self.nvars),
            Some((sorted, neg)) => match self.comps.get(&sorted) {
                None => Poly::zero(self.nvars),
                Some(v) if neg => -v,
                Some(v) => v.clone(),
            },
        }
    }

    /// Component on fiber indices `fib` followed by leaf indices `leaf`,
    /// both 0-based.
    pub fn bigraded(&self, fib: &[usize], leaf: &[usize]) -> Poly {
        let idx: Vec<usize> = fib.iter().copied().chain(leaf.iter().map(|a| self.m + a)).collect();
        self.get(&idx)
    }

    pub fn set(&mut self, idx: &[usize], value: Poly) -> Result<(), AlgebroidError> {
        if idx.len() != self.degree || idx.iter().any(|&i| i >= self.rank()) {
            return Err(AlgebroidError::Shape(format!(
                "index tuple {idx:?} for a {}-form of rank {}",
                self.degree,
                self.rank()
            )));
        }
        let Some((sorted, neg)) = sort_with_sign(idx) else {
            return if value.is_zero() {
                Ok(())
            } else {
                Err(AlgebroidError::Shape("nonzero component on a repeated index".into()))
            };
        };
        let value = if neg { -value } else { value };
        if value.is_zero() {
            self.comps.remove(&sorted);
        } else {
            self.comps.insert(sorted, value);
        }
        Ok(())
    }

    pub fn set_bigraded(&mut self, fib: &[usize], leaf: &[usize], value: Poly) -> Result<(), AlgebroidError> {
        let idx: Vec<usize> = fib.iter().copied().chain(leaf.iter().map(|a| self.m + a)).collect();
        self.set(&idx, value)
    }

    pub fn components(&self) -> impl Iterator<Item = (&Vec<usize>, &Poly)> {
        self.comps.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn first_nonzero(&self) -> Option<(&Vec<usize>, &Poly)> {
        self.comps.iter().next()
    }

    /// Number of fiber indices in an increasing tuple.
    pub fn fiber_count(&self, idx: &[usize]) -> usize {
        idx.iter().filter(|&&i| i < self.m).count()
    }

    fn same_shape(&self, other: &AForm) {
        assert_eq!(
            (self.nvars, self.m, self.p, self.degree),
            (other.nvars, other.m, other.p, other.degree),
            "A-form shape mismatch"
        );
    }

    fn combine(&self, other: &AForm, negate: bool) -> AForm {
        self.same_shape(other);
        let mut out = self.clone();
        for (k, v) in &other.comps {
            let cur = out.comps.remove(k).unwrap_or_else(|| Poly::zero(self.nvars));
            let next = if negate { &cur - v } else { &cur + v };
            if !next.is_zero() {
                out.comps.insert(k.clone(), next);
            }
        }
        out
    }

    pub fn add(&self, other: &AForm) -> AForm {
        self.combine(other, false)
    }

    pub fn sub(&self, other: &AForm) -> AForm {
        self.combine(other, true)
    }

    pub fn scale(&self, c: &Rational) -> AForm {
        let mut out = AForm::zero(self.nvars, self.m, self.p, self.degree);
        for (k, v) in &self.comps {
            let s = v.scale(c);
            if !s.is_zero() {
                out.comps.insert(k.clone(), s);
            }
        }
        out
    }

    /// The part of bigrade `(fibers, degree - fibers)`.
    pub fn bigrade_part(&self, fibers: usize) -> AForm {
        let mut out = AForm::zero(self.nvars, self.m, self.p, self.degree);
        for (k, v) in &self.comps {
            if self.fiber_count(k) == fibers {
                out.comps.insert(k.clone(), v.clone());
            }
        }
        out
    }

    /// `w(v_1, .., v_k) = sum_I w_I det(v_b^{I_a})`.
    pub fn evaluate(&self, args: &[ASection]) -> Poly {
        assert_eq!(args.len(), self.degree, "wrong number of arguments");
        let mut acc = Poly::zero(self.nvars);
        for (idx, coeff) in &self.comps {
            let mat: Vec<PolyVec> = idx.iter().map(|&i| args.iter().map(|v| v.coord(i).clone()).collect()).collect();
            let d = linalg::det(&mat, self.nvars);
            if !d.is_zero() {
                acc += &(coeff * &d);
            }
        }
        acc
    }

    /// `w(v, frame[rest])` for a general first argument and frame indices
    /// for the rest.
    fn eval_first(&self, v: &ASection, rest: &[usize]) -> Poly {
        let mut acc = Poly::zero(self.nvars);
        for u in 0..self.rank() {
            let c = v.coord(u);
            if c.is_zero() {
                continue;
            }
            let mut idx = Vec::with_capacity(rest.len() + 1);
            idx.push(u);
            idx.extend_from_slice(rest);
            let w = self.get(&idx);
            if !w.is_zero() {
                acc += &(c * &w);
            }
        }
        acc
    }
}

/// A section `r + x` of `A`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ASection {
    pub r: PolyVec,
    pub x: PolyVec,
}

impl ASection {
    pub fn zero(nvars: usize, m: usize, p: usize) -> Self {
        ASection { r: linalg::zero_vec(nvars, m), x: linalg::zero_vec(nvars, p) }
    }

    /// Frame element `u` of the combined frame.
    pub fn frame(nvars: usize, m: usize, p: usize, u: usize) -> Self {
        let mut s = ASection::zero(nvars, m, p);
        if u < m {
            s.r[u] = Poly::one(nvars);
        } else {
            s.x[u - m] = Poly::one(nvars);
        }
        s
    }

    pub fn coord(&self, u: usize) -> &Poly {
        if u < self.r.len() {
            &self.r[u]
        } else {
            &self.x[u - self.r.len()]
        }
    }

    fn coord_mut(&mut self, u: usize) -> &mut Poly {
        let m = self.r.len();
        if u < m {
            &mut self.r[u]
        } else {
            &mut self.x[u - m]
        }
    }

    fn rank(&self) -> usize {
        self.r.len() + self.x.len()
    }

    pub fn is_zero(&self) -> bool {
        linalg::vec_is_zero(&self.r) && linalg::vec_is_zero(&self.x)
    }

    pub fn add(&self, other: &ASection) -> ASection {
        ASection { r: linalg::vec_add(&self.r, &other.r), x: linalg::vec_add(&self.x, &other.x) }
    }

    pub fn sub(&self, other: &ASection) -> ASection {
        ASection { r: linalg::vec_sub(&self.r, &other.r), x: linalg::vec_sub(&self.x, &other.x) }
    }

    /// The quotient map `E -> A` dropping the `F*` part.
    pub fn from_section(e: &Section) -> Self {
        ASection { r: e.r.clone(), x: e.x.clone() }
    }

    fn derive_along(&self, x: &[Poly]) -> ASection {
        let mut out = ASection {
            r: self.r.iter().map(|p| Poly::zero(p.nvars())).collect(),
            x: self.x.iter().map(|p| Poly::zero(p.nvars())).collect(),
        };
        for (a, xa) in x.iter().enumerate() {
            if xa.is_zero() {
                continue;
            }
            for u in 0..self.rank() {
                let d = self.coord(u).diff(a);
                if !d.is_zero() {
                    *out.coord_mut(u) += &(&d * xa);
                }
            }
        }
        out
    }
}

fn check_asection(q: &Quintuple, v: &ASection) -> Result<(), AlgebroidError> {
    if v.r.len() != q.m() || v.x.len() != q.p() {
        return Err(AlgebroidError::Shape(format!("A-section of shape ({}, {})", v.r.len(), v.x.len())));
    }
    Ok(())
}

/// `[r, s] = [r, s]_G`, `[x, y] = R(x, y) + [x, y]`, `[x, r] = nabla_x r`,
/// extended by the Leibniz rule with anchor `r + x -> x`.
pub fn a_bracket(q: &Quintuple, u: &ASection, v: &ASection) -> Result<ASection, AlgebroidError> {
    check_asection(q, u)?;
    check_asection(q, v)?;
    Ok(bracket(q, u, v))
}

pub(crate) fn bracket(q: &Quintuple, u: &ASection, v: &ASection) -> ASection {
    let p = q.p();
    let mut out = v.derive_along(&u.x).sub(&u.derive_along(&v.x));
    linalg::vec_add_assign(&mut out.r, &q.fiber().bracket(&u.r, &v.r));
    for a in 0..p {
        if !u.x[a].is_zero() {
            for b in 0..p {
                if a != b && !v.x[b].is_zero() {
                    let f = &u.x[a] * &v.x[b];
                    linalg::vec_add_assign(&mut out.r, &linalg::vec_scale(q.r(a, b), &f));
                }
            }
            if !linalg::vec_is_zero(&v.r) {
                let g = linalg::mat_vec(&q.conn().gamma[a], &v.r);
                linalg::vec_add_assign(&mut out.r, &linalg::vec_scale(&g, &u.x[a]));
            }
        }
        if !v.x[a].is_zero() && !linalg::vec_is_zero(&u.r) {
            let g = linalg::mat_vec(&q.conn().gamma[a], &u.r);
            linalg::vec_sub_assign(&mut out.r, &linalg::vec_scale(&g, &v.x[a]));
        }
    }
    out
}

fn check_form(q: &Quintuple, w: &AForm) -> Result<(), AlgebroidError> {
    if (w.nvars, w.m, w.p) != (q.n(), q.m(), q.p()) {
        return Err(AlgebroidError::Shape("form does not live on this algebroid".into()));
    }
    Ok(())
}

/// Chevalley-Eilenberg differential evaluated on the constant frame.
pub fn ce_differential(q: &Quintuple, w: &AForm) -> Result<AForm, AlgebroidError> {
    check_form(q, w)?;
    let k = w.degree;
    let rank = w.rank();
    if k + 1 > rank || k + 1 > MAX_FORM_DEGREE {
        return Err(AlgebroidError::DegreeOverflow { degree: k + 1, rank });
    }
    let (n, m, p) = (q.n(), q.m(), q.p());
    let frame: Vec<ASection> = (0..rank).map(|u| ASection::frame(n, m, p, u)).collect();
    let mut brackets = vec![vec![None; rank]; rank];
    for i in 0..rank {
        for j in i + 1..rank {
            brackets[i][j] = Some(bracket(q, &frame[i], &frame[j]));
        }
    }
    let mut out = AForm::zero(n, m, p, k + 1);
    for idx in increasing_tuples(rank, k + 1) {
        let mut acc = Poly::zero(n);
        for (i, &vi) in idx.iter().enumerate() {
            if vi < m {
                continue;
            }
            let rest: Vec<usize> = idx.iter().enumerate().filter(|(t, _)| *t != i).map(|(_, &u)| u).collect();
            let d = w.get(&rest).diff(vi - m);
            if i % 2 == 0 {
                acc += &d;
            } else {
                acc -= &d;
            }
        }
        for i in 0..idx.len() {
            for j in i + 1..idx.len() {
                let br = brackets[idx[i]][idx[j]].as_ref().expect("increasing pair");
                if br.is_zero() {
                    continue;
                }
                let rest: Vec<usize> =
                    idx.iter().enumerate().filter(|(t, _)| *t != i && *t != j).map(|(_, &u)| u).collect();
                let val = w.eval_first(br, &rest);
                if (i + j) % 2 == 0 {
                    acc += &val;
                } else {
                    acc -= &val;
                }
            }
        }
        out.set(&idx, acc).expect("increasing tuple");
    }
    Ok(out)
}

/// True iff the pure-fiber component vanishes.
pub fn horizontal_check(w: &AForm) -> bool {
    w.comps.keys().all(|k| w.fiber_count(k) < w.degree)
}

/// `Xi^{-1} q^*` of the dual frame of `A`: `e^i -> sum_j ginv_ij e_j`,
/// `dx_a -> 2 delta^a`.
fn naive_dual_frame(q: &Quintuple) -> Vec<Section> {
    let (n, m, p) = (q.n(), q.m(), q.p());
    let ginv = q.fiber().metric_inverse().expect("nondegenerate metric");
    let mut out = Vec::with_capacity(m + p);
    for row in ginv.iter().take(m) {
        let mut s = Section::zero(q);
        s.r = linalg::lift_vec(n, row);
        out.push(s);
    }
    for a in 0..p {
        let mut s = Section::zero(q);
        s.xi[a] = Poly::from_int(n, 2);
        out.push(s);
    }
    out
}

/// `<s, e_1 ^ .. ^ e_k>` for the naive cochain `s = Xi^{-1} q^* w`, computed
/// as `sum_I w_I det(<s_{I_a}, e_b>)`.
fn naive_pairing(q: &Quintuple, w: &AForm, dual: &[Section], args: &[Section]) -> Poly {
    let n = q.n();
    let mut acc = Poly::zero(n);
    for (idx, coeff) in &w.comps {
        let mat: Vec<PolyVec> =
            idx.iter().map(|&i| args.iter().map(|e| courant::pair(q, &dual[i], e)).collect()).collect();
        let d = linalg::det(&mat, n);
        if !d.is_zero() {
            acc += &(coeff * &d);
        }
    }
    acc
}

/// One row of an evaluation table: E-frame indices (0-based, increasing)
/// and the value there.
pub type TableRow = (Vec<usize>, Poly);

/// The naive differential of `s = Xi^{-1} q^* w`, evaluated literally on
/// every increasing `(k+1)`-tuple of the E-frame with the Courant bracket.
pub fn naive_differential(q: &Quintuple, w: &AForm) -> Result<Vec<TableRow>, AlgebroidError> {
    check_form(q, w)?;
    let k = w.degree;
    let nframe = q.frame_len();
    let frame: Vec<Section> = (0..nframe).map(|u| Section::frame(q, u)).collect();
    let dual = naive_dual_frame(q);
    let n = q.n();
    let mut cb = vec![vec![None; nframe]; nframe];
    for i in 0..nframe {
        for j in i + 1..nframe {
            cb[i][j] = Some(courant::courant_bracket(q, &frame[i], &frame[j]).expect("frame shapes"));
        }
    }
    let mut table = Vec::new();
    for idx in increasing_tuples(nframe, k + 1) {
        let mut acc = Poly::zero(n);
        for i in 0..idx.len() {
            let rest: Vec<Section> =
                idx.iter().enumerate().filter(|(t, _)| *t != i).map(|(_, &u)| frame[u].clone()).collect();
            let val = naive_pairing(q, w, &dual, &rest);
            let d = anchor_derive(&frame[idx[i]], &val);
            if i % 2 == 0 {
                acc += &d;
            } else {
                acc -= &d;
            }
        }
        for i in 0..idx.len() {
            for j in i + 1..idx.len() {
                let br = cb[idx[i]][idx[j]].as_ref().expect("increasing pair");
                if br.is_zero() {
                    continue;
                }
                let mut args = vec![br.clone()];
                args.extend(idx.iter().enumerate().filter(|(t, _)| *t != i && *t != j).map(|(_, &u)| frame[u].clone()));
                let val = naive_pairing(q, w, &dual, &args);
                if (i + j) % 2 == 0 {
                    acc += &val;
                } else {
                    acc -= &val;
                }
            }
        }
        table.push((idx, acc));
    }
    Ok(table)
}

fn anchor_derive(e: &Section, f: &Poly) -> Poly {
    let mut acc = Poly::zero(f.nvars());
    for (a, xa) in e.x.iter().enumerate() {
        if !xa.is_zero() {
            acc += &(xa * &f.diff(a));
        }
    }
    acc
}

/// `w(q e_1, .., q e_k)` tabulated on every increasing `k`-tuple of the
/// E-frame.
pub fn pullback_table(q: &Quintuple, w: &AForm) -> Vec<TableRow> {
    let nframe = q.frame_len();
    let quot: Vec<ASection> = (0..nframe).map(|u| ASection::from_section(&Section::frame(q, u))).collect();
    increasing_tuples(nframe, w.degree)
        .into_iter()
        .map(|idx| {
            let args: Vec<ASection> = idx.iter().map(|&u| quot[u].clone()).collect();
            let v = w.evaluate(&args);
            (idx, v)
        })
        .collect()
}

/// Compares the naive differential of `Xi^{-1} q^* w` with the pullback of
/// `d w`, row by row.
pub fn naive_matches_ce(q: &Quintuple, w: &AForm, name: &str) -> Result<Check, AlgebroidError> {
    let naive = naive_differential(q, w)?;
    let dw = match ce_differential(q, w) {
        // Forms of degree above the rank vanish.
        Err(AlgebroidError::DegreeOverflow { degree, rank }) if degree > rank => AForm::zero(w.nvars, w.m, w.p, degree),
        other => other?,
    };
    let ce = pullback_table(q, &dw);
    for ((idx, a), (_, b)) in naive.iter().zip(&ce) {
        let res = a - b;
        if !res.is_zero() {
            let ind: Vec<usize> = idx.iter().map(|u| u + 1).collect();
            return Ok(Check::fail(name, Witness::new("naive_equals_ce", &ind, &res)));
        }
    }
    Ok(Check::pass(name))
}

/// First nonzero component of a form as a witness, indices 1-based in the
/// combined frame.
pub fn form_witness(identity: &str, w: &AForm) -> Option<Witness> {
    w.first_nonzero().map(|(idx, v)| {
        let ind: Vec<usize> = idx.iter().map(|u| u + 1).collect();
        Witness::new(identity, &ind, v)
    })
}

/// Report with a single check that `w` vanishes.
pub fn zero_check(name: &str, w: &AForm) -> Report {
    let mut r = Report::new();
    r.push(Check::from_witness(name, form_witness(name, w)));
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::scalar::poly;

    #[test]
    fn bracket_on_fixture_d() {
        let q = fixtures::fixture_d();
        let f = |u| ASection::frame(2, 3, 2, u);
        assert_eq!(a_bracket(&q, &f(3), &f(4)).unwrap(), f(2));
        assert_eq!(a_bracket(&q, &f(0), &f(1)).unwrap(), f(2));
    }

    #[test]
    fn jacobi_on_frame() {
        let q = fixtures::fixture_d();
        let f: Vec<ASection> = (0..5).map(|u| ASection::frame(2, 3, 2, u)).collect();
        for a in &f {
            for b in &f {
                for c in &f {
                    let j = bracket(&q, a, &bracket(&q, b, c)).sub(&bracket(&q, &bracket(&q, a, b), c)).sub(&bracket(
                        &q,
                        b,
                        &bracket(&q, a, c),
                    ));
                    assert!(j.is_zero());
                }
            }
        }
    }

    #[test]
    fn d_of_function_and_d_squared() {
        let q = fixtures::fixture_d();
        let mut f = AForm::zero_for(&q, 0);
        f.set(&[], poly("x1^2*x2", 2)).unwrap();
        let df = ce_differential(&q, &f).unwrap();
        assert_eq!(df.bigraded(&[], &[0]), poly("2*x1*x2", 2));
        assert_eq!(df.bigraded(&[], &[1]), poly("x1^2", 2));
        assert!(df.bigraded(&[0], &[]).is_zero());
        assert!(ce_differential(&q, &df).unwrap().is_zero());

        let mut w = AForm::zero_for(&q, 2);
        w.set(&[0, 3], poly("x1*x2", 2)).unwrap();
        w.set(&[1, 2], poly("x2^2 + 1", 2)).unwrap();
        w.set(&[3, 4], poly("x1", 2)).unwrap();
        let dw = ce_differential(&q, &w).unwrap();
        assert!(ce_differential(&q, &dw).unwrap().is_zero());
    }

    #[test]
    fn degree_overflow() {
        let q = fixtures::fixture_a();
        let w = AForm::zero_for(&q, 2);
        assert!(matches!(ce_differential(&q, &w), Err(AlgebroidError::DegreeOverflow { .. })));
    }

    #[test]
    fn horizontal_components() {
        let mut w = AForm::zero(1, 3, 1, 3);
        assert!(horizontal_check(&w));
        w.set(&[0, 1, 3], poly("1", 1)).unwrap();
        assert!(horizontal_check(&w));
        w.set(&[0, 1, 2], poly("1", 1)).unwrap();
        assert!(!horizontal_check(&w));
    }

    #[test]
    fn naive_function_table() {
        let q = fixtures::fixture_d();
        let mut f = AForm::zero_for(&q, 0);
        f.set(&[], poly("x1*x2", 2)).unwrap();
        let table = naive_differential(&q, &f).unwrap();
        // <d f, d_1> = rho(d_1) f = x2.
        let row = table.iter().find(|(idx, _)| idx == &vec![5]).unwrap();
        assert_eq!(row.1, poly("x2", 2));
        assert!(naive_matches_ce(&q, &f, "f").unwrap().passed());
    }

    #[test]
    fn evaluate_is_multilinear() {
        let mut w = AForm::zero(1, 1, 1, 2);
        w.set(&[0, 1], poly("1", 1)).unwrap();
        let u = ASection { r: vec![poly("x1", 1)], x: vec![poly("2", 1)] };
        let v = ASection { r: vec![poly("1", 1)], x: vec![poly("3", 1)] };
        assert_eq!(w.evaluate(&[u, v]), poly("3*x1 - 2", 1));
    }
}

#[cfg(test)]
mod props {
    use proptest::prelude::*;

    use super::*;
    use crate::fixtures;
    use crate::scalar::strategies::poly;

    fn aform(degree: usize) -> impl Strategy<Value = AForm> {
        // Fixture D: m = 3, p = 2, two coordinates.
        let slots = increasing_tuples(5, degree);
        prop::collection::vec(poly(2, 2), slots.len()).prop_map(move |vals| {
            let mut w = AForm::zero(2, 3, 2, degree);
            for (idx, v) in slots.iter().zip(vals) {
                w.set(idx, v).unwrap();
            }
            w
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn ce_d_squared_vanishes(w1 in aform(1), w2 in aform(2)) {
            let q = fixtures::fixture_d();
            for w in [w1, w2] {
                let dd = ce_differential(&q, &ce_differential(&q, &w).unwrap()).unwrap();
                prop_assert!(dd.is_zero());
            }
        }
    }
}
