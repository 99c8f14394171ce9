//! Foliated coordinate patch, leafwise forms, `G`-valued forms and
//! connections. Leaf directions are the first `p` coordinates.

use std::collections::BTreeMap;

use crate::fiber::QuadLieAlgebra;
use crate::linalg::{self, PolyMatrix, PolyVec};
use crate::report::{Check, Report, Witness};
use crate::scalar::{Poly, MAX_VARS};

/// Largest leaf rank supported.
pub const MAX_LEAF_RANK: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GeometryError {
    #[error("leaf rank p = {p} must satisfy 0 <= p <= n = {n} and p <= {max}", max = MAX_LEAF_RANK)]
    BadPatch { n: usize, p: usize },
    #[error("too many coordinates: {0}")]
    TooManyCoordinates(usize),
    #[error("leaf index {index} out of range 1..={p}")]
    LeafIndex { index: usize, p: usize },
    #[error("index tuple has length {got}, expected {expected}")]
    Arity { got: usize, expected: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Patch {
    pub n: usize,
    pub p: usize,
}

impl Patch {
    pub fn new(n: usize, p: usize) -> Result<Self, GeometryError> {
        if n > MAX_VARS {
            return Err(GeometryError::TooManyCoordinates(n));
        }
        if p > n || p > MAX_LEAF_RANK {
            return Err(GeometryError::BadPatch { n, p });
        }
        Ok(Patch { n, p })
    }
}

/// Sorts `idx` and returns the permutation sign, or `None` on a repeat.
pub fn sort_with_sign(idx: &[usize]) -> Option<(Vec<usize>, bool)> {
    let mut v = idx.to_vec();
    let mut negative = false;
    // Insertion sort: count transpositions.
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            negative = !negative;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((v, negative))
}

/// All strictly increasing `k`-tuples drawn from `0..n`, lexicographic.
pub fn increasing_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        rec(0, n, k, &mut Vec::new(), &mut out);
    }
    out
}

/// Leafwise `k`-form. Indices are 0-based internally.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FForm {
    nvars: usize,
    p: usize,
    degree: usize,
    comps: BTreeMap<Vec<usize>, Poly>,
}

impl FForm {
    pub fn zero(nvars: usize, p: usize, degree: usize) -> Self {
        FForm { nvars, p, degree, comps: BTreeMap::new() }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn leaf_rank(&self) -> usize {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    fn check_idx(&self, idx: &[usize]) -> Result<(), GeometryError> {
        if idx.len() != self.degree {
            return Err(GeometryError::Arity { got: idx.len(), expected: self.degree });
        }
        if let Some(&bad) = idx.iter().find(|&&a| a >= self.p) {
            return Err(GeometryError::LeafIndex { index: bad + 1, p: self.p });
        }
        Ok(())
    }

    /// Component on an arbitrary (0-based) index tuple, with antisymmetry.
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

    /// Sets the component on `idx` (and implicitly its permutations).
    pub fn set(&mut self, idx: &[usize], value: Poly) -> Result<(), GeometryError> {
        self.check_idx(idx)?;
        let Some((sorted, neg)) = sort_with_sign(idx) else {
            return if value.is_zero() {
                Ok(())
            } else {
                Err(GeometryError::Shape("nonzero component on a repeated index".into()))
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

    pub fn add_to(&mut self, idx: &[usize], value: &Poly) -> Result<(), GeometryError> {
        let cur = self.get(idx);
        self.set(idx, &cur + value)
    }

    /// Nonzero components on increasing tuples.
    pub fn components(&self) -> impl Iterator<Item = (&Vec<usize>, &Poly)> {
        self.comps.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn first_nonzero(&self) -> Option<(&Vec<usize>, &Poly)> {
        self.comps.iter().next()
    }

    fn combine(&self, other: &FForm, sign: i64) -> FForm {
        assert_eq!((self.nvars, self.p, self.degree), (other.nvars, other.p, other.degree), "form shape mismatch");
        let mut out = self.clone();
        for (k, v) in &other.comps {
            let cur = out.comps.remove(k).unwrap_or_else(|| Poly::zero(self.nvars));
            let next = if sign > 0 { &cur + v } else { &cur - v };
            if !next.is_zero() {
                out.comps.insert(k.clone(), next);
            }
        }
        out
    }

    pub fn add(&self, other: &FForm) -> FForm {
        self.combine(other, 1)
    }

    pub fn sub(&self, other: &FForm) -> FForm {
        self.combine(other, -1)
    }

    pub fn scale(&self, c: &crate::scalar::Rational) -> FForm {
        let mut out = FForm::zero(self.nvars, self.p, self.degree);
        for (k, v) in &self.comps {
            let s = v.scale(c);
            if !s.is_zero() {
                out.comps.insert(k.clone(), s);
            }
        }
        out
    }
}

/// `G`-valued leafwise form; components are `m`-vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GValuedForm {
    nvars: usize,
    p: usize,
    m: usize,
    degree: usize,
    comps: BTreeMap<Vec<usize>, PolyVec>,
}

impl GValuedForm {
    pub fn zero(nvars: usize, p: usize, m: usize, degree: usize) -> Self {
        GValuedForm { nvars, p, m, degree, comps: BTreeMap::new() }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn leaf_rank(&self) -> usize {
        self.p
    }

    pub fn fiber_dim(&self) -> usize {
        self.m
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn get(&self, idx: &[usize]) -> PolyVec {
        match sort_with_sign(idx) {
            None => linalg::zero_vec(self.nvars, self.m),
            Some((sorted, neg)) => match self.comps.get(&sorted) {
                None => linalg::zero_vec(self.nvars, self.m),
                Some(v) if neg => linalg::vec_neg(v),
                Some(v) => v.clone(),
            },
        }
    }

    pub fn set(&mut self, idx: &[usize], value: PolyVec) -> Result<(), GeometryError> {
        if idx.len() != self.degree {
            return Err(GeometryError::Arity { got: idx.len(), expected: self.degree });
        }
        if let Some(&bad) = idx.iter().find(|&&a| a >= self.p) {
            return Err(GeometryError::LeafIndex { index: bad + 1, p: self.p });
        }
        if value.len() != self.m {
            return Err(GeometryError::Shape(format!("G-vector of length {} for m = {}", value.len(), self.m)));
        }
        let Some((sorted, neg)) = sort_with_sign(idx) else {
            return if linalg::vec_is_zero(&value) {
                Ok(())
            } else {
                Err(GeometryError::Shape("nonzero component on a repeated index".into()))
            };
        };
        let value = if neg { linalg::vec_neg(&value) } else { value };
        if linalg::vec_is_zero(&value) {
            self.comps.remove(&sorted);
        } else {
            self.comps.insert(sorted, value);
        }
        Ok(())
    }

    pub fn components(&self) -> impl Iterator<Item = (&Vec<usize>, &PolyVec)> {
        self.comps.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }
}

/// `nabla_a r = d_a r + gamma[a] r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GConnection {
    pub gamma: Vec<PolyMatrix>,
}

impl GConnection {
    pub fn flat(nvars: usize, p: usize, m: usize) -> Self {
        GConnection { gamma: vec![linalg::zero_matrix(nvars, m, m); p] }
    }

    /// `nabla_a r` with a 0-based leaf index; panics if out of range.
    pub fn apply(&self, a: usize, r: &[Poly]) -> PolyVec {
        let mut out = linalg::vec_diff(r, a);
        linalg::vec_add_assign(&mut out, &linalg::mat_vec(&self.gamma[a], r));
        out
    }
}

/// Christoffel symbols `nabla_{d_a} d_b = sum_c gamma[a][b][c] d_c`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FConnection {
    pub gamma: Vec<Vec<PolyVec>>,
}

impl FConnection {
    pub fn zero(nvars: usize, p: usize) -> Self {
        FConnection { gamma: vec![vec![linalg::zero_vec(nvars, p); p]; p] }
    }

    /// First `(a, b, c)` (0-based) with `gamma[a][b][c] != gamma[b][a][c]`.
    pub fn torsion_witness(&self) -> Option<(usize, usize, usize, Poly)> {
        let p = self.gamma.len();
        for a in 0..p {
            for b in a + 1..p {
                for c in 0..p {
                    let r = &self.gamma[a][b][c] - &self.gamma[b][a][c];
                    if !r.is_zero() {
                        return Some((a, b, c, r));
                    }
                }
            }
        }
        None
    }
}

/// Leafwise exterior derivative. For `k >= p` the result is the zero form
/// of degree `k + 1`.
pub fn leafwise_d(w: &FForm) -> FForm {
    let mut out = FForm::zero(w.nvars, w.p, w.degree + 1);
    if w.degree >= w.p {
        return out;
    }
    for (idx, coeff) in &w.comps {
        for a in 0..w.p {
            if idx.contains(&a) {
                continue;
            }
            let d = coeff.diff(a);
            if d.is_zero() {
                continue;
            }
            let pos = idx.iter().filter(|&&b| b < a).count();
            let mut full = idx.clone();
            full.insert(pos, a);
            let term = if pos % 2 == 1 { -d } else { d };
            let cur = out.comps.remove(&full).unwrap_or_else(|| Poly::zero(w.nvars));
            let next = &cur + &term;
            if !next.is_zero() {
                out.comps.insert(full, next);
            }
        }
    }
    out
}

/// `nabla_a r` for a 1-based leaf index.
pub fn connection_apply(c: &GConnection, a: usize, r: &[Poly]) -> Result<PolyVec, GeometryError> {
    let p = c.gamma.len();
    if a == 0 || a > p {
        return Err(GeometryError::LeafIndex { index: a, p });
    }
    let m = c.gamma[a - 1].len();
    if r.len() != m {
        return Err(GeometryError::Shape(format!("G-vector of length {} for m = {m}", r.len())));
    }
    Ok(c.apply(a - 1, r))
}

/// `<R ^ R>(a,b,c,d) = 2(<R_ab,R_cd> - <R_ac,R_bd> + <R_ad,R_bc>)`.
pub fn pontryagin_form(r: &GValuedForm, fiber: &QuadLieAlgebra) -> FForm {
    let n = r.nvars;
    let mut out = FForm::zero(n, r.p, 4);
    for idx in increasing_tuples(r.p, 4) {
        let (a, b, c, d) = (idx[0], idx[1], idx[2], idx[3]);
        let ip = |x: &[usize], y: &[usize]| fiber.inner(n, &r.get(x), &r.get(y));
        let v = &(&ip(&[a, b], &[c, d]) - &ip(&[a, c], &[b, d])) + &ip(&[a, d], &[b, c]);
        let v = v.scale_int(2);
        out.set(&idx, v).expect("index in range");
    }
    out
}

/// Metric skewness and derivation property of every `gamma[a]`.
pub fn validate_connection(c: &GConnection, fiber: &QuadLieAlgebra) -> Report {
    let m = fiber.dim();
    let mut report = Report::new();
    let nvars = c.gamma.first().and_then(|g| g.first()).and_then(|r| r.first()).map_or(0, Poly::nvars);
    let g = linalg::lift_matrix(nvars, fiber.metric());

    let mut skew = None;
    'skew: for (a, gam) in c.gamma.iter().enumerate() {
        let gg = linalg::mat_mul(&g, gam);
        let res = linalg::mat_add(&gg, &linalg::transpose(&gg));
        for i in 0..m {
            for j in 0..m {
                if !res[i][j].is_zero() {
                    skew = Some(Witness::new("connection_metric_skew", &[a + 1, i + 1, j + 1], &res[i][j]));
                    break 'skew;
                }
            }
        }
    }
    report.push(Check::from_witness("connection_metric", skew));

    let mut deriv = None;
    'der: for (a, gam) in c.gamma.iter().enumerate() {
        let col = |i: usize| -> PolyVec { gam.iter().map(|row| row[i].clone()).collect() };
        for i in 0..m {
            for j in i + 1..m {
                let ei = linalg::unit_vec(nvars, m, i);
                let ej = linalg::unit_vec(nvars, m, j);
                let lhs = linalg::mat_vec(gam, &fiber.bracket(&ei, &ej));
                let rhs = linalg::vec_add(&fiber.bracket(&col(i), &ej), &fiber.bracket(&ei, &col(j)));
                let res = linalg::vec_sub(&lhs, &rhs);
                if let Some(k) = res.iter().position(|p| !p.is_zero()) {
                    deriv = Some(Witness::new("connection_derivation", &[a + 1, i + 1, j + 1, k + 1], &res[k]));
                    break 'der;
                }
            }
        }
    }
    report.push(Check::from_witness("connection_derivation", deriv));
    report
}
