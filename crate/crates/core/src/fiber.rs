//! Quadratic Lie algebras: the fixed fiber of the bundle `G`.

use crate::linalg::{self, PolyMatrix, PolyVec};
use crate::report::{Check, Report, Witness};
use crate::scalar::{Poly, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FiberError {
    #[error("structure constants must be a {dim}x{dim}x{dim} array")]
    BracketShape { dim: usize },
    #[error("metric must be a {dim}x{dim} matrix")]
    MetricShape { dim: usize },
    #[error("vector of length {got} where the fiber has dimension {dim}")]
    LengthMismatch { got: usize, dim: usize },
}

/// Structure constants `c[i][j][k]` (the `e_k` coefficient of `[e_i, e_j]`)
/// together with a symmetric bilinear form `g`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadLieAlgebra {
    dim: usize,
    c: Vec<Vec<Vec<Rational>>>,
    g: Vec<Vec<Rational>>,
    // Nonzero entries of `c`, for sparse contraction.
    c_sparse: Vec<(usize, usize, usize, Rational)>,
}

impl QuadLieAlgebra {
    pub fn new(dim: usize, c: Vec<Vec<Vec<Rational>>>, g: Vec<Vec<Rational>>) -> Result<Self, FiberError> {
        if c.len() != dim || c.iter().any(|m| m.len() != dim || m.iter().any(|r| r.len() != dim)) {
            return Err(FiberError::BracketShape { dim });
        }
        if g.len() != dim || g.iter().any(|r| r.len() != dim) {
            return Err(FiberError::MetricShape { dim });
        }
        let mut c_sparse = Vec::new();
        for (i, ci) in c.iter().enumerate() {
            for (j, cij) in ci.iter().enumerate() {
                for (k, v) in cij.iter().enumerate() {
                    if !v.is_zero() {
                        c_sparse.push((i, j, k, v.clone()));
                    }
                }
            }
        }
        Ok(QuadLieAlgebra { dim, c, g, c_sparse })
    }

    /// The abelian algebra `R^m` with the identity metric.
    pub fn abelian(dim: usize) -> Self {
        let c = vec![vec![vec![Rational::zero(); dim]; dim]; dim];
        Self::new(dim, c, identity(dim)).expect("shapes agree")
    }

    /// `su(2)` in an orthonormal basis: `[e_i, e_j] = eps_ijk e_k`, `g = I`.
    pub fn su2() -> Self {
        let mut c = vec![vec![vec![Rational::zero(); 3]; 3]; 3];
        for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            c[i][j][k] = Rational::one();
            c[j][i][k] = Rational::from_int(-1);
        }
        Self::new(3, c, identity(3)).expect("shapes agree")
    }

    /// Orthogonal direct sum, `self` first.
    pub fn direct_sum(&self, other: &QuadLieAlgebra) -> Self {
        let m = self.dim + other.dim;
        let mut c = vec![vec![vec![Rational::zero(); m]; m]; m];
        let mut g = vec![vec![Rational::zero(); m]; m];
        for (off, part) in [(0, self), (self.dim, other)] {
            for &(i, j, k, ref v) in &part.c_sparse {
                c[off + i][off + j][off + k] = v.clone();
            }
            for i in 0..part.dim {
                for j in 0..part.dim {
                    g[off + i][off + j] = part.g[i][j].clone();
                }
            }
        }
        Self::new(m, c, g).expect("shapes agree")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn c(&self, i: usize, j: usize, k: usize) -> &Rational {
        &self.c[i][j][k]
    }

    pub fn g(&self, i: usize, j: usize) -> &Rational {
        &self.g[i][j]
    }

    pub fn structure_constants(&self) -> &[Vec<Vec<Rational>>] {
        &self.c
    }

    pub fn metric(&self) -> &[Vec<Rational>] {
        &self.g
    }

    pub fn nonzero_constants(&self) -> &[(usize, usize, usize, Rational)] {
        &self.c_sparse
    }

    pub fn is_abelian(&self) -> bool {
        self.c_sparse.is_empty()
    }

    /// `B[i][j][k] = <[e_i, e_j], e_k>`.
    pub fn b(&self, i: usize, j: usize, k: usize) -> Rational {
        let mut acc = Rational::zero();
        for l in 0..self.dim {
            if !self.c[i][j][l].is_zero() && !self.g[l][k].is_zero() {
                acc += &(&self.c[i][j][l] * &self.g[l][k]);
            }
        }
        acc
    }

    /// Inverse metric, if `g` is nondegenerate.
    pub fn metric_inverse(&self) -> Option<Vec<Vec<Rational>>> {
        let m = self.dim;
        let rows: Vec<Vec<Rational>> = (0..m)
            .map(|i| {
                let mut r = self.g[i].clone();
                r.extend((0..m).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
                r
            })
            .collect();
        let (r, pivots) = linalg::rref(&rows, 2 * m);
        if pivots.len() < m || pivots.iter().enumerate().any(|(i, &p)| i != p) {
            return None;
        }
        Some(r.iter().map(|row| row[m..].to_vec()).collect())
    }

    fn check_len(&self, v: &[Poly]) -> Result<(), FiberError> {
        if v.len() != self.dim {
            return Err(FiberError::LengthMismatch { got: v.len(), dim: self.dim });
        }
        Ok(())
    }

    /// `[r, s]^k = sum r^i s^j c[i][j][k]`.
    pub fn fiber_bracket(&self, r: &[Poly], s: &[Poly]) -> Result<PolyVec, FiberError> {
        self.check_len(r)?;
        self.check_len(s)?;
        Ok(self.bracket(r, s))
    }

    /// Unchecked variant of [`fiber_bracket`](Self::fiber_bracket); panics on
    /// shape mismatch.
    pub fn bracket(&self, r: &[Poly], s: &[Poly]) -> PolyVec {
        let nvars = r.first().or(s.first()).map_or(0, Poly::nvars);
        let mut out = linalg::zero_vec(nvars, self.dim);
        for (i, j, k, v) in &self.c_sparse {
            if r[*i].is_zero() || s[*j].is_zero() {
                continue;
            }
            out[*k] += &(&r[*i] * &s[*j]).scale(v);
        }
        out
    }

    /// `<r, s>_G` as a polynomial in `nvars` coordinates.
    pub fn inner(&self, nvars: usize, r: &[Poly], s: &[Poly]) -> Poly {
        let mut acc = Poly::zero(nvars);
        for (i, ri) in r.iter().enumerate() {
            if ri.is_zero() {
                continue;
            }
            for (j, sj) in s.iter().enumerate() {
                if sj.is_zero() || self.g[i][j].is_zero() {
                    continue;
                }
                acc += &(ri * sj).scale(&self.g[i][j]);
            }
        }
        acc
    }

    /// `g r`, the covector paired with `r`.
    pub fn lower(&self, r: &[Poly]) -> PolyVec {
        let nvars = r.first().map_or(0, Poly::nvars);
        (0..self.dim)
            .map(|k| {
                let mut acc = Poly::zero(nvars);
                for (i, ri) in r.iter().enumerate() {
                    if !ri.is_zero() && !self.g[i][k].is_zero() {
                        acc += &ri.scale(&self.g[i][k]);
                    }
                }
                acc
            })
            .collect()
    }

    /// Matrix of `ad(v)`: `ad(v)[k][i] = sum_j v^j c[j][i][k]`.
    pub fn ad_matrix(&self, v: &[Poly]) -> PolyMatrix {
        let nvars = v.first().map_or(0, Poly::nvars);
        let mut out = linalg::zero_matrix(nvars, self.dim, self.dim);
        for (j, i, k, c) in &self.c_sparse {
            if !v[*j].is_zero() {
                out[*k][*i] += &v[*j].scale(c);
            }
        }
        out
    }

    /// `C[i][j][k] = -<[e_i, e_j], e_k>`.
    pub fn cartan_three_form(&self) -> Vec<Vec<Vec<Rational>>> {
        let m = self.dim;
        (0..m).map(|i| (0..m).map(|j| (0..m).map(|k| -self.b(i, j, k)).collect()).collect()).collect()
    }

    /// Basis of `{r : [r, s] = 0 for all s}`.
    pub fn center(&self) -> Vec<Vec<Rational>> {
        let m = self.dim;
        // Row (j, k) of the stacked adjoint map: r |-> sum_i r^i c[i][j][k].
        let rows: Vec<Vec<Rational>> = (0..m)
            .flat_map(|j| (0..m).map(move |k| (j, k)))
            .map(|(j, k)| (0..m).map(|i| self.c[i][j][k].clone()).collect())
            .collect();
        linalg::nullspace(&rows, m)
    }

    pub fn validate_fiber(&self) -> Report {
        let m = self.dim;
        let mut report = Report::new();

        let mut skew = None;
        'skew: for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    let r = &self.c[i][j][k] + &self.c[j][i][k];
                    if !r.is_zero() {
                        // Report the entry lacking its partner.
                        let (a, b) = if self.c[j][i][k].is_zero() { (j, i) } else { (i, j) };
                        skew = Some(Witness::with_text("bracket_skew", &[a + 1, b + 1, k + 1], r.to_string()));
                        break 'skew;
                    }
                }
            }
        }
        report.push(Check::from_witness("fiber_skew", skew));

        let mut jacobi = None;
        'jac: for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    for s in 0..m {
                        let mut acc = Rational::zero();
                        for l in 0..m {
                            acc += &(&self.c[i][j][l] * &self.c[l][k][s]);
                            acc += &(&self.c[j][k][l] * &self.c[l][i][s]);
                            acc += &(&self.c[k][i][l] * &self.c[l][j][s]);
                        }
                        if !acc.is_zero() {
                            jacobi = Some(Witness::with_text(
                                "bracket_jacobi",
                                &[i + 1, j + 1, k + 1, s + 1],
                                acc.to_string(),
                            ));
                            break 'jac;
                        }
                    }
                }
            }
        }
        report.push(Check::from_witness("fiber_jacobi", jacobi));

        let mut sym = None;
        'sym: for i in 0..m {
            for j in i + 1..m {
                let r = &self.g[i][j] - &self.g[j][i];
                if !r.is_zero() {
                    sym = Some(Witness::with_text("metric_symmetric", &[i + 1, j + 1], r.to_string()));
                    break 'sym;
                }
            }
        }
        report.push(Check::from_witness("fiber_metric_symmetric", sym));

        let nondeg = if self.metric_inverse().is_some() {
            None
        } else {
            Some(Witness::with_text("metric_nondegenerate", &[], "0"))
        };
        report.push(Check::from_witness("fiber_metric_nondegenerate", nondeg));

        // <[e_i, e_j], e_k> + <e_j, [e_i, e_k]> = 0.
        let mut inv = None;
        'inv: for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    let r = &self.b(i, j, k) + &self.b(i, k, j);
                    if !r.is_zero() {
                        inv = Some(Witness::with_text("metric_ad_invariance", &[i + 1, j + 1, k + 1], r.to_string()));
                        break 'inv;
                    }
                }
            }
        }
        report.push(Check::from_witness("fiber_ad_invariance", inv));
        report
    }
}

fn identity(m: usize) -> Vec<Vec<Rational>> {
    (0..m).map(|i| (0..m).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(nvars: usize, m: usize, i: usize) -> PolyVec {
        linalg::unit_vec(nvars, m, i)
    }

    #[test]
    fn su2_is_valid() {
        let su2 = QuadLieAlgebra::su2();
        assert!(su2.validate_fiber().passed());
        assert_eq!(su2.fiber_bracket(&e(0, 3, 0), &e(0, 3, 1)).unwrap(), e(0, 3, 2));
        assert_eq!(su2.cartan_three_form()[0][1][2], Rational::from_int(-1));
        assert!(su2.center().is_empty());
    }

    #[test]
    fn abelian_is_valid_and_central() {
        let a = QuadLieAlgebra::abelian(3);
        assert!(a.validate_fiber().passed());
        let z = a.center();
        assert_eq!(z.len(), 3);
        for (i, v) in z.iter().enumerate() {
            for (j, x) in v.iter().enumerate() {
                assert_eq!(x.is_one(), i == j);
            }
        }
    }

    #[test]
    fn missing_skew_partner() {
        let mut c = vec![vec![vec![Rational::zero(); 3]; 3]; 3];
        c[0][1][2] = Rational::one();
        let bad = QuadLieAlgebra::new(3, c, identity(3)).unwrap();
        let rep = bad.validate_fiber();
        let w = rep.get("fiber_skew").unwrap().witness.clone().unwrap();
        assert_eq!(w.indices, vec![2, 1, 3]);
        assert_eq!(w.residual, "1");
    }

    #[test]
    fn center_of_block_sum() {
        let f = QuadLieAlgebra::su2().direct_sum(&QuadLieAlgebra::abelian(1));
        assert!(f.validate_fiber().passed());
        let z = f.center();
        assert_eq!(z.len(), 1);
        assert_eq!(z[0], vec![Rational::zero(), Rational::zero(), Rational::zero(), Rational::one()]);
    }

    #[test]
    fn degenerate_metric_rejected() {
        let mut g = identity(2);
        g[1][1] = Rational::zero();
        let f = QuadLieAlgebra::new(2, vec![vec![vec![Rational::zero(); 2]; 2]; 2], g).unwrap();
        assert!(!f.validate_fiber().get("fiber_metric_nondegenerate").unwrap().passed());
    }

    #[test]
    fn ad_matrix_matches_bracket() {
        let su2 = QuadLieAlgebra::su2();
        let v = vec![Poly::from_int(1, 2), Poly::var(1, 1).unwrap(), Poly::from_int(1, -1)];
        let ad = su2.ad_matrix(&v);
        for i in 0..3 {
            assert_eq!(linalg::mat_vec(&ad, &e(1, 3, i)), su2.bracket(&v, &e(1, 3, i)));
        }
    }
}
