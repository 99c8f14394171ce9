//! Exact linear algebra over `Rational` and small dense matrices over `Poly`.

use crate::scalar::{Poly, Rational};

pub type PolyVec = Vec<Poly>;
pub type PolyMatrix = Vec<Vec<Poly>>;

pub fn zero_vec(nvars: usize, len: usize) -> PolyVec {
    vec![Poly::zero(nvars); len]
}

pub fn vec_add(a: &[Poly], b: &[Poly]) -> PolyVec {
    assert_eq!(a.len(), b.len(), "vector length mismatch");
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn vec_sub(a: &[Poly], b: &[Poly]) -> PolyVec {
    assert_eq!(a.len(), b.len(), "vector length mismatch");
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn vec_scale(a: &[Poly], f: &Poly) -> PolyVec {
    a.iter().map(|x| x * f).collect()
}

pub fn vec_scale_rat(a: &[Poly], c: &Rational) -> PolyVec {
    a.iter().map(|x| x.scale(c)).collect()
}

pub fn vec_neg(a: &[Poly]) -> PolyVec {
    a.iter().map(|x| -x).collect()
}

pub fn vec_is_zero(a: &[Poly]) -> bool {
    a.iter().all(Poly::is_zero)
}

pub fn vec_add_assign(a: &mut [Poly], b: &[Poly]) {
    assert_eq!(a.len(), b.len(), "vector length mismatch");
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
}

pub fn vec_sub_assign(a: &mut [Poly], b: &[Poly]) {
    assert_eq!(a.len(), b.len(), "vector length mismatch");
    for (x, y) in a.iter_mut().zip(b) {
        *x -= y;
    }
}

/// Constant vector lifted to polynomials.
pub fn lift_vec(nvars: usize, v: &[Rational]) -> PolyVec {
    v.iter().map(|c| Poly::constant(nvars, c.clone())).collect()
}

pub fn unit_vec(nvars: usize, len: usize, i: usize) -> PolyVec {
    let mut v = zero_vec(nvars, len);
    v[i] = Poly::one(nvars);
    v
}

pub fn zero_matrix(nvars: usize, rows: usize, cols: usize) -> PolyMatrix {
    vec![zero_vec(nvars, cols); rows]
}

pub fn identity_matrix(nvars: usize, m: usize) -> PolyMatrix {
    (0..m).map(|i| unit_vec(nvars, m, i)).collect()
}

pub fn lift_matrix(nvars: usize, a: &[Vec<Rational>]) -> PolyMatrix {
    a.iter().map(|row| lift_vec(nvars, row)).collect()
}

pub fn mat_vec(a: &[Vec<Poly>], v: &[Poly]) -> PolyVec {
    a.iter()
        .map(|row| {
            assert_eq!(row.len(), v.len(), "matrix/vector shape mismatch");
            let mut acc = Poly::zero(v.first().map_or(0, Poly::nvars));
            for (x, y) in row.iter().zip(v) {
                if !x.is_zero() && !y.is_zero() {
                    acc += &(x * y);
                }
            }
            acc
        })
        .collect()
}

pub fn mat_mul(a: &[Vec<Poly>], b: &[Vec<Poly>]) -> PolyMatrix {
    let cols = b.first().map_or(0, Vec::len);
    let nvars = a.first().and_then(|r| r.first()).map_or(0, Poly::nvars);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    let mut acc = Poly::zero(nvars);
                    for (k, x) in row.iter().enumerate() {
                        if !x.is_zero() && !b[k][j].is_zero() {
                            acc += &(x * &b[k][j]);
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

pub fn mat_add(a: &[Vec<Poly>], b: &[Vec<Poly>]) -> PolyMatrix {
    a.iter().zip(b).map(|(x, y)| vec_add(x, y)).collect()
}

pub fn mat_sub(a: &[Vec<Poly>], b: &[Vec<Poly>]) -> PolyMatrix {
    a.iter().zip(b).map(|(x, y)| vec_sub(x, y)).collect()
}

pub fn mat_scale_rat(a: &[Vec<Poly>], c: &Rational) -> PolyMatrix {
    a.iter().map(|r| vec_scale_rat(r, c)).collect()
}

pub fn transpose(a: &[Vec<Poly>]) -> PolyMatrix {
    let cols = a.first().map_or(0, Vec::len);
    (0..cols).map(|j| a.iter().map(|row| row[j].clone()).collect()).collect()
}

pub fn mat_is_zero(a: &[Vec<Poly>]) -> bool {
    a.iter().all(|r| vec_is_zero(r))
}

/// Entrywise partial derivative along `x_{i+1}`.
pub fn mat_diff(a: &[Vec<Poly>], i: usize) -> PolyMatrix {
    a.iter().map(|r| r.iter().map(|p| p.diff(i)).collect()).collect()
}

pub fn vec_diff(a: &[Poly], i: usize) -> PolyVec {
    a.iter().map(|p| p.diff(i)).collect()
}

fn minor(a: &[Vec<Poly>], row: usize, col: usize) -> PolyMatrix {
    a.iter()
        .enumerate()
        .filter(|(i, _)| *i != row)
        .map(|(_, r)| r.iter().enumerate().filter(|(j, _)| *j != col).map(|(_, p)| p.clone()).collect())
        .collect()
}

/// Determinant by cofactor expansion along the first row. Matrices here are
/// tiny (fiber dimension), so this is faster than anything division-based.
pub fn det(a: &[Vec<Poly>], nvars: usize) -> Poly {
    match a.len() {
        0 => Poly::one(nvars),
        1 => a[0][0].clone(),
        2 => &(&a[0][0] * &a[1][1]) - &(&a[0][1] * &a[1][0]),
        n => {
            let mut acc = Poly::zero(nvars);
            for j in 0..n {
                if a[0][j].is_zero() {
                    continue;
                }
                let term = &a[0][j] * &det(&minor(a, 0, j), nvars);
                if j % 2 == 0 {
                    acc += &term;
                } else {
                    acc -= &term;
                }
            }
            acc
        }
    }
}

/// Classical adjoint: `a * adjugate(a) = det(a) * I`.
pub fn adjugate(a: &[Vec<Poly>], nvars: usize) -> PolyMatrix {
    let n = a.len();
    if n == 1 {
        return vec![vec![Poly::one(nvars)]];
    }
    let mut out = zero_matrix(nvars, n, n);
    for i in 0..n {
        for j in 0..n {
            let c = det(&minor(a, i, j), nvars);
            out[j][i] = if (i + j) % 2 == 0 { c } else { -c };
        }
    }
    out
}

/// Inverse of a polynomial matrix whose determinant is a nonzero constant.
pub fn inverse_const_det(a: &[Vec<Poly>], nvars: usize) -> Option<PolyMatrix> {
    let d = det(a, nvars).as_constant()?;
    let inv = d.inv()?;
    Some(mat_scale_rat(&adjugate(a, nvars), &inv))
}

/// Reduced row echelon form computed without fractions: rows are kept
/// integral and divided by their content after every step. Returns the
/// normalized rows (pivot entries scaled to 1) and the pivot columns.
pub fn rref(rows: &[Vec<Rational>], ncols: usize) -> (Vec<Vec<Rational>>, Vec<usize>) {
    let (mut a, pivots) = rref_partial(rows, ncols, ncols);
    a.truncate(pivots.len());
    (a, pivots)
}

/// Clears denominators and divides by the content, keeping the sign.
fn integral_row(r: &[Rational]) -> Vec<Rational> {
    use num_integer::Integer;
    let lcm = Rational::denominator_lcm(r.iter());
    let scale = Rational::from(lcm);
    let scaled: Vec<Rational> = r.iter().map(|x| x * &scale).collect();
    let mut g = num_bigint::BigInt::from(0);
    for x in &scaled {
        g = g.gcd(&x.numer());
    }
    if g == num_bigint::BigInt::from(0) || g == num_bigint::BigInt::from(1) {
        return scaled;
    }
    let inv = Rational::from_bigints(num_bigint::BigInt::from(1), g);
    scaled.iter().map(|x| x * &inv).collect()
}

/// Rational basis of `{v : rows · v = 0}`, one vector per free column, each
/// scaled so its first nonzero entry is 1.
pub fn nullspace(rows: &[Vec<Rational>], ncols: usize) -> Vec<Vec<Rational>> {
    let (r, pivots) = rref(rows, ncols);
    let mut basis = Vec::new();
    for free in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Rational::zero(); ncols];
        v[free] = Rational::one();
        for (row, &pc) in r.iter().zip(&pivots) {
            v[pc] = -&row[free];
        }
        let lead = v.iter().find(|x| !x.is_zero()).cloned().expect("basis vector is nonzero");
        let inv = lead.inv().expect("nonzero");
        for x in v.iter_mut() {
            *x *= &inv;
        }
        basis.push(v);
    }
    basis
}

/// Outcome of solving `A x = b` exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Solution {
    /// The particular solution with every free variable set to zero.
    Unique(Vec<Rational>),
    /// Some eliminated equation reads `0 = residual`.
    Inconsistent { residual: Rational },
}

/// Solves `A x = b` for several right-hand sides that share `A`.
pub fn solve_many(a: &[Vec<Rational>], ncols: usize, rhs: &[Vec<Rational>]) -> Vec<Solution> {
    let nrows = a.len();
    let k = rhs.len();
    let aug: Vec<Vec<Rational>> = (0..nrows)
        .map(|i| {
            let mut row = a[i].clone();
            row.extend(rhs.iter().map(|b| b[i].clone()));
            row
        })
        .collect();
    // Only eliminate on the coefficient columns, so run rref on the
    // coefficient block and replay the row operations through augmentation.
    let (r, pivots) = rref_partial(&aug, ncols, ncols + k);
    (0..k)
        .map(|j| {
            let col = ncols + j;
            for row in r.iter().skip(pivots.len()) {
                if !row[col].is_zero() {
                    return Solution::Inconsistent { residual: row[col].clone() };
                }
            }
            let mut x = vec![Rational::zero(); ncols];
            for (row, &pc) in r.iter().zip(&pivots) {
                x[pc] = row[col].clone();
            }
            Solution::Unique(x)
        })
        .collect()
}

/// Like [`rref`] but only pivots on the first `pivot_cols` columns and keeps
/// zero rows (they carry inconsistency information on the right).
fn rref_partial(rows: &[Vec<Rational>], pivot_cols: usize, width: usize) -> (Vec<Vec<Rational>>, Vec<usize>) {
    let mut a: Vec<Vec<Rational>> = rows
        .iter()
        .map(|r| {
            assert_eq!(r.len(), width, "row length mismatch");
            integral_row(r)
        })
        .collect();
    let mut pivots = Vec::new();
    let mut top = 0;
    for col in 0..pivot_cols {
        if top == a.len() {
            break;
        }
        let Some(found) = (top..a.len()).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(top, found);
        for i in 0..a.len() {
            if i == top || a[i][col].is_zero() {
                continue;
            }
            let piv = a[top][col].clone();
            let factor = a[i][col].clone();
            let reduced: Vec<Rational> = a[i].iter().zip(&a[top]).map(|(x, y)| &(x * &piv) - &(y * &factor)).collect();
            a[i] = integral_row(&reduced);
        }
        pivots.push(col);
        top += 1;
    }
    for (row, &col) in a.iter_mut().zip(&pivots) {
        let inv = row[col].inv().expect("pivot is nonzero");
        for x in row.iter_mut() {
            *x *= &inv;
        }
    }
    (a, pivots)
}
