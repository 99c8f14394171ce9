use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use super::{Rational, ScalarError};

/// Largest number of base coordinates a [`Poly`] can carry.
pub const MAX_VARS: usize = 15;
/// Largest total degree of a single monomial.
pub const MAX_DEGREE: u32 = 255;

const DEGREE_SHIFT: u32 = 120;

/// Exponent multi-index packed into a `u128`.
///
/// The top byte holds the total degree and byte `i` below it holds the exponent
/// of `x_{i+1}`, so integer comparison is graded-lexicographic order with
/// `x1 > x2 > ...`. Every single exponent is bounded by the total degree, which
/// is capped at [`MAX_DEGREE`], so packed addition never carries across bytes.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Monomial(u128);

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Monomial{:?}", self.exponents(MAX_VARS))
    }
}

impl Monomial {
    pub const ONE: Monomial = Monomial(0);

    fn shift(i: usize) -> u32 {
        DEGREE_SHIFT - 8 * (i as u32 + 1)
    }

    /// The monomial `x_{i+1}` (0-based index).
    pub fn var(i: usize) -> Self {
        assert!(i < MAX_VARS, "variable index out of range");
        Monomial((1u128 << DEGREE_SHIFT) | (1u128 << Self::shift(i)))
    }

    pub fn from_exponents(exps: &[u32]) -> Result<Self, ScalarError> {
        if exps.len() > MAX_VARS {
            return Err(ScalarError::TooManyVariables(exps.len()));
        }
        let total: u32 = exps.iter().sum();
        if total > MAX_DEGREE {
            return Err(ScalarError::DegreeOverflow);
        }
        let mut bits = (total as u128) << DEGREE_SHIFT;
        for (i, &e) in exps.iter().enumerate() {
            bits |= (e as u128) << Self::shift(i);
        }
        Ok(Monomial(bits))
    }

    pub fn degree(self) -> u32 {
        (self.0 >> DEGREE_SHIFT) as u32
    }

    pub fn exponent(self, i: usize) -> u32 {
        ((self.0 >> Self::shift(i)) & 0xff) as u32
    }

    pub fn exponents(self, nvars: usize) -> Vec<u32> {
        (0..nvars).map(|i| self.exponent(i)).collect()
    }

    pub fn checked_mul(self, other: Monomial) -> Option<Monomial> {
        if self.degree() + other.degree() > MAX_DEGREE {
            None
        } else {
            Some(Monomial(self.0 + other.0))
        }
    }

    fn mul(self, other: Monomial) -> Monomial {
        self.checked_mul(other).unwrap_or_else(|| panic!("monomial degree exceeds {MAX_DEGREE}"))
    }

    /// Divides out one factor of `x_{i+1}`; the caller guarantees the exponent is positive.
    fn lower(self, i: usize) -> Monomial {
        Monomial(self.0 - (1u128 << DEGREE_SHIFT) - (1u128 << Self::shift(i)))
    }

    /// Every monomial in `nvars` variables with total degree at most `max_degree`,
    /// in ascending graded-lex order.
    pub fn all_up_to(nvars: usize, max_degree: u32) -> Vec<Monomial> {
        let mut out = Vec::new();
        let mut exps = vec![0u32; nvars];
        fn rec(i: usize, left: u32, exps: &mut Vec<u32>, out: &mut Vec<Monomial>) {
            if i == exps.len() {
                out.push(Monomial::from_exponents(exps).expect("bounded degree"));
                return;
            }
            for e in 0..=left {
                exps[i] = e;
                rec(i + 1, left - e, exps, out);
            }
            exps[i] = 0;
        }
        rec(0, max_degree, &mut exps, &mut out);
        out.sort();
        out
    }
}

/// Multivariate polynomial in `x1..xn` with exact rational coefficients.
///
/// Terms are stored sorted by descending graded-lex monomial with no zero
/// coefficients, so structural equality is polynomial equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    nvars: usize,
    terms: Vec<(Monomial, Rational)>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        assert!(nvars <= MAX_VARS, "too many variables");
        Poly { nvars, terms: Vec::new() }
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.push((Monomial::ONE, c));
        }
        p
    }

    pub fn from_int(nvars: usize, c: i64) -> Self {
        Self::constant(nvars, Rational::from_int(c))
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Rational::one())
    }

    /// The coordinate function `x_i` with 1-based `i`.
    pub fn var(nvars: usize, i: usize) -> Result<Self, ScalarError> {
        if i == 0 || i > nvars {
            return Err(ScalarError::IndexOutOfRange { index: i, nvars });
        }
        Ok(Self::monomial(nvars, Monomial::var(i - 1), Rational::one()))
    }

    pub fn monomial(nvars: usize, m: Monomial, c: Rational) -> Self {
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.push((m, c));
        }
        p
    }

    /// Builds a polynomial from arbitrary (exponent-vector, coefficient) pairs.
    pub fn from_terms<I>(nvars: usize, terms: I) -> Result<Self, ScalarError>
    where
        I: IntoIterator<Item = (Vec<u32>, Rational)>,
    {
        let mut raw = Vec::new();
        for (exps, c) in terms {
            if exps.len() != nvars {
                return Err(ScalarError::NvarsMismatch { left: nvars, right: exps.len() });
            }
            raw.push((Monomial::from_exponents(&exps)?, c));
        }
        Ok(Self::from_unsorted(nvars, raw))
    }

    fn from_unsorted(nvars: usize, mut raw: Vec<(Monomial, Rational)>) -> Self {
        raw.sort_unstable_by_key(|t| std::cmp::Reverse(t.0));
        let mut terms: Vec<(Monomial, Rational)> = Vec::with_capacity(raw.len());
        for (m, c) in raw {
            match terms.last_mut() {
                Some((lm, lc)) if *lm == m => *lc += &c,
                _ => terms.push((m, c)),
            }
        }
        terms.retain(|(_, c)| !c.is_zero());
        Poly { nvars, terms }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[(Monomial, Rational)] {
        &self.terms
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.first().map(|(m, _)| m.degree())
    }

    /// The value if this polynomial is a constant.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.as_slice() {
            [] => Some(Rational::zero()),
            [(m, c)] if *m == Monomial::ONE => Some(c.clone()),
            _ => None,
        }
    }

    pub fn coefficient(&self, m: Monomial) -> Rational {
        self.terms.iter().find(|(tm, _)| *tm == m).map(|(_, c)| c.clone()).unwrap_or_default()
    }

    fn check(&self, other: &Poly) -> Result<(), ScalarError> {
        if self.nvars == other.nvars {
            Ok(())
        } else {
            Err(ScalarError::NvarsMismatch { left: self.nvars, right: other.nvars })
        }
    }

    pub fn checked_add(&self, other: &Poly) -> Result<Poly, ScalarError> {
        self.check(other)?;
        Ok(self.merge(other, false))
    }

    pub fn checked_sub(&self, other: &Poly) -> Result<Poly, ScalarError> {
        self.check(other)?;
        Ok(self.merge(other, true))
    }

    pub fn checked_mul(&self, other: &Poly) -> Result<Poly, ScalarError> {
        self.check(other)?;
        for (a, _) in self.terms.iter().take(1) {
            for (b, _) in other.terms.iter().take(1) {
                if a.checked_mul(*b).is_none() {
                    return Err(ScalarError::DegreeOverflow);
                }
            }
        }
        Ok(self.product(other))
    }

    fn merge(&self, other: &Poly, negate: bool) -> Poly {
        let mut terms = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.terms, &other.terms);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Greater => {
                    terms.push(a[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    let c = if negate { -&b[j].1 } else { b[j].1.clone() };
                    terms.push((b[j].0, c));
                    j += 1;
                }
                Ordering::Equal => {
                    let c = if negate { &a[i].1 - &b[j].1 } else { &a[i].1 + &b[j].1 };
                    if !c.is_zero() {
                        terms.push((a[i].0, c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        terms.extend(a[i..].iter().cloned());
        for t in &b[j..] {
            let c = if negate { -&t.1 } else { t.1.clone() };
            terms.push((t.0, c));
        }
        Poly { nvars: self.nvars, terms }
    }

    fn product(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero(self.nvars);
        }
        if other.terms.len() == 1 {
            let (m, c) = &other.terms[0];
            let terms = self.terms.iter().map(|(a, x)| (a.mul(*m), x * c)).collect();
            return Poly { nvars: self.nvars, terms };
        }
        if self.terms.len() == 1 {
            return other.product(self);
        }
        let mut raw = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                raw.push((a.mul(*b), x * y));
            }
        }
        Poly::from_unsorted(self.nvars, raw)
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.nvars);
        }
        if c.is_one() {
            return self.clone();
        }
        let terms = self.terms.iter().map(|(m, x)| (*m, x * c)).collect();
        Poly { nvars: self.nvars, terms }
    }

    /// Multiplies by a single monomial. Adding the same packed value to every
    /// term keeps them sorted.
    pub fn mul_monomial(&self, m: Monomial) -> Poly {
        if m == Monomial::ONE {
            return self.clone();
        }
        let terms = self.terms.iter().map(|(t, c)| (t.mul(m), c.clone())).collect();
        Poly { nvars: self.nvars, terms }
    }

    pub fn scale_int(&self, c: i64) -> Poly {
        self.scale(&Rational::from_int(c))
    }

    pub fn pow(&self, exp: u32) -> Poly {
        let mut acc = Poly::one(self.nvars);
        for _ in 0..exp {
            acc = &acc * self;
        }
        acc
    }

    /// Formal partial derivative with respect to `x_i` (1-based).
    pub fn partial(&self, i: usize) -> Result<Poly, ScalarError> {
        if i == 0 || i > self.nvars {
            return Err(ScalarError::IndexOutOfRange { index: i, nvars: self.nvars });
        }
        Ok(self.diff(i - 1))
    }

    /// Partial derivative with respect to the 0-based coordinate `i`.
    pub fn diff(&self, i: usize) -> Poly {
        debug_assert!(i < self.nvars);
        // Subtracting the same packed value from every surviving monomial keeps them sorted.
        let terms = self
            .terms
            .iter()
            .filter_map(|(m, c)| {
                let e = m.exponent(i);
                (e > 0).then(|| (m.lower(i), c * &Rational::from_int(e as i64)))
            })
            .collect();
        Poly { nvars: self.nvars, terms }
    }

    pub fn eval(&self, point: &[Rational]) -> Result<Rational, ScalarError> {
        if point.len() != self.nvars {
            return Err(ScalarError::NvarsMismatch { left: self.nvars, right: point.len() });
        }
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, x) in point.iter().enumerate() {
                let e = m.exponent(i);
                if e > 0 {
                    t = &t * &x.pow(e);
                }
            }
            acc += &t;
        }
        Ok(acc)
    }

    /// Splits the polynomial into its monomials with coefficients.
    pub fn coefficients(&self) -> impl Iterator<Item = (Monomial, &Rational)> {
        self.terms.iter().map(|(m, c)| (*m, c))
    }
}

impl fmt::Display for Poly {
    /// Canonical text: descending graded-lex, conforming to the input grammar.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let negative = c.is_negative();
            let mag = c.abs();
            if k == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if negative { '-' } else { '+' })?;
            }
            let mut factors = Vec::new();
            // A leading sign must attach to a rational literal.
            if !mag.is_one() || *m == Monomial::ONE || (k == 0 && negative) {
                factors.push(mag.to_string());
            }
            for i in 0..self.nvars {
                match m.exponent(i) {
                    0 => {}
                    1 => factors.push(format!("x{}", i + 1)),
                    e => factors.push(format!("x{}^{}", i + 1, e)),
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly[{}]({})", self.nvars, self)
    }
}

impl<'a> Add<&'a Poly> for &'a Poly {
    type Output = Poly;
    /// Panics if the variable counts differ; see [`Poly::checked_add`].
    fn add(self, rhs: &Poly) -> Poly {
        self.checked_add(rhs).expect("polynomial variable-count mismatch")
    }
}

impl<'a> Sub<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self.checked_sub(rhs).expect("polynomial variable-count mismatch")
    }
}

impl<'a> Mul<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        assert_eq!(self.nvars, rhs.nvars, "polynomial variable-count mismatch");
        self.product(rhs)
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(self, rhs: Poly) -> Poly {
        &self + &rhs
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, rhs: Poly) -> Poly {
        &self - &rhs
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        &self * &rhs
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        let terms = self.terms.iter().map(|(m, c)| (*m, -c)).collect();
        Poly { nvars: self.nvars, terms }
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

impl AddAssign<&Poly> for Poly {
    fn add_assign(&mut self, rhs: &Poly) {
        if rhs.is_zero() {
            return;
        }
        if self.is_zero() {
            assert_eq!(self.nvars, rhs.nvars, "polynomial variable-count mismatch");
            *self = rhs.clone();
            return;
        }
        *self = &*self + rhs;
    }
}

impl SubAssign<&Poly> for Poly {
    fn sub_assign(&mut self, rhs: &Poly) {
        if rhs.is_zero() {
            return;
        }
        *self = &*self - rhs;
    }
}

impl AddAssign<Poly> for Poly {
    fn add_assign(&mut self, rhs: Poly) {
        if self.is_zero() {
            assert_eq!(self.nvars, rhs.nvars, "polynomial variable-count mismatch");
            *self = rhs;
        } else {
            *self += &rhs;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(src: &str, n: usize) -> Poly {
        crate::scalar::parse_poly(src, n).unwrap()
    }

    #[test]
    fn graded_lex_ordering() {
        let x1 = Monomial::var(0);
        let x2 = Monomial::var(1);
        let x2sq = x2.mul(x2);
        assert!(x1 > x2);
        assert!(x2sq > x1);
        assert!(x1.mul(x2) < x1.mul(x1));
        assert_eq!(Monomial::all_up_to(4, 2).len(), 15);
        assert_eq!(Monomial::all_up_to(0, 2), vec![Monomial::ONE]);
    }

    #[test]
    fn ring_examples() {
        assert_eq!(&p("x1 + 1", 1) * &p("x1 - 1", 1), p("x1^2 - 1", 1));
        let q = p("3*x1*x2 - 7/3", 2);
        assert!((&q - &q).is_zero());
        assert_eq!(&p("1/2*x1", 2) * &p("2/3*x2", 2), p("1/3*x1*x2", 2));
    }

    #[test]
    fn mismatch_is_an_error() {
        let a = Poly::one(2);
        let b = Poly::one(3);
        assert!(matches!(a.checked_add(&b), Err(ScalarError::NvarsMismatch { .. })));
        assert!(a.checked_mul(&b).is_err());
    }

    #[test]
    fn derivatives() {
        assert_eq!(p("x1^2*x2", 2).partial(1).unwrap(), p("2*x1*x2", 2));
        assert!(p("x1^3", 2).partial(2).unwrap().is_zero());
        assert!(matches!(p("x1", 2).partial(3), Err(ScalarError::IndexOutOfRange { .. })));
        assert!(p("x1", 2).partial(0).is_err());
    }

    #[test]
    fn display_is_canonical() {
        assert_eq!(p("x2 + 3/2*x1^2*x3", 3).to_string(), "3/2*x1^2*x3 + x2");
        assert_eq!(p("0 - x2", 2).to_string(), "-1*x2");
        assert_eq!(p("2 - 2", 2).to_string(), "0");
        assert_eq!(p("-3/4*x1 + x1^2 + 5", 1).to_string(), "x1^2 - 3/4*x1 + 5");
    }

    #[test]
    fn degree_overflow_detected() {
        let big = Poly::var(1, 1).unwrap().pow(200);
        assert!(matches!(big.checked_mul(&big), Err(ScalarError::DegreeOverflow)));
    }
}

#[cfg(test)]
mod props {
    use proptest::prelude::*;

    use crate::scalar::strategies::poly;

    proptest! {
        #[test]
        fn ring_laws(f in poly(3, 3), g in poly(3, 3), h in poly(3, 3)) {
            prop_assert_eq!(&f + &g, &g + &f);
            prop_assert_eq!(&f * &g, &g * &f);
            prop_assert_eq!(&(&f + &g) + &h, &f + &(&g + &h));
            prop_assert_eq!(&(&f * &g) * &h, &f * &(&g * &h));
            prop_assert_eq!(&f * &(&g + &h), &(&f * &g) + &(&f * &h));
            prop_assert!((&f - &f).is_zero());
        }

        #[test]
        fn leibniz(f in poly(3, 3), g in poly(3, 3), i in 0usize..3) {
            let lhs = (&f * &g).diff(i);
            let rhs = &(&f.diff(i) * &g) + &(&f * &g.diff(i));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn partials_commute(f in poly(3, 4)) {
            prop_assert_eq!(f.diff(0).diff(2), f.diff(2).diff(0));
        }
    }
}
