//! Exact scalars: rationals, multivariate polynomials over them, and the
//! polynomial text grammar.

mod parse;
mod poly;
mod rational;

pub use parse::parse_poly;
pub use poly::{Monomial, Poly, MAX_DEGREE, MAX_VARS};
pub use rational::{ParseRationalError, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScalarError {
    #[error("variable-count mismatch: {left} vs {right}")]
    NvarsMismatch { left: usize, right: usize },
    #[error("coordinate index {index} out of range 1..={nvars}")]
    IndexOutOfRange { index: usize, nvars: usize },
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("variable x{index} at byte {offset} exceeds the {nvars} declared coordinates")]
    VariableOutOfRange { offset: usize, index: usize, nvars: usize },
    #[error("at most {max} coordinates are supported, got {0}", max = MAX_VARS)]
    TooManyVariables(usize),
    #[error("monomial degree exceeds {max}", max = MAX_DEGREE)]
    DegreeOverflow,
}

/// Shorthand used by fixtures and tests: parse or panic.
pub fn poly(src: &str, nvars: usize) -> Poly {
    parse_poly(src, nvars).unwrap_or_else(|e| panic!("bad polynomial `{src}`: {e}"))
}

#[cfg(test)]
pub(crate) mod strategies {
    use proptest::prelude::*;

    use super::{Monomial, Poly, Rational};

    pub fn rational() -> impl Strategy<Value = Rational> {
        (-20i64..=20, 1i64..=6).prop_map(|(n, d)| Rational::new(n, d))
    }

    /// Up to six terms of degree at most `max_degree` in `nvars` variables.
    pub fn poly(nvars: usize, max_degree: u32) -> impl Strategy<Value = Poly> {
        let monos = Monomial::all_up_to(nvars, max_degree);
        prop::collection::vec((0..monos.len(), rational()), 0..6).prop_map(move |terms| {
            let mut out = Poly::zero(nvars);
            for (i, c) in terms {
                out += &Poly::monomial(nvars, monos[i], c);
            }
            out
        })
    }
}
