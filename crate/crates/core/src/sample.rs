//! Seeded generators for randomized checks. Every generator draws from a
//! `ChaCha8Rng`, so results are reproducible from the seed alone.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::courant::Quintuple;
use crate::geometry::{FConnection, GValuedForm};
use crate::linalg::{self, PolyMatrix, PolyVec};
use crate::morphism::{Automorphism, IsoData};
use crate::scalar::{Monomial, Poly, Rational};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Integer coefficient in `-3..=3`, or occasionally a half.
fn coefficient(rng: &mut ChaCha8Rng) -> Rational {
    let num = rng.gen_range(-3..=3);
    if rng.gen_bool(0.25) {
        Rational::new(num, 2)
    } else {
        Rational::from_int(num)
    }
}

/// Polynomial of degree at most `degree`; each monomial is present with
/// probability one half.
pub fn poly(rng: &mut ChaCha8Rng, nvars: usize, degree: u32) -> Poly {
    let mut out = Poly::zero(nvars);
    for mono in Monomial::all_up_to(nvars, degree) {
        if rng.gen_bool(0.5) {
            out += &Poly::monomial(nvars, mono, coefficient(rng));
        }
    }
    out
}

pub fn poly_vec(rng: &mut ChaCha8Rng, nvars: usize, len: usize, degree: u32) -> PolyVec {
    (0..len).map(|_| poly(rng, nvars, degree)).collect()
}

/// A `G`-valued 1-form on the leaves of `q`.
pub fn j_form(rng: &mut ChaCha8Rng, q: &Quintuple, degree: u32) -> GValuedForm {
    let mut j = GValuedForm::zero(q.n(), q.p(), q.m(), 1);
    for a in 0..q.p() {
        j.set(&[a], poly_vec(rng, q.n(), q.m(), degree)).expect("in range");
    }
    j
}

/// A `p x p` polynomial matrix.
pub fn k_matrix(rng: &mut ChaCha8Rng, q: &Quintuple, degree: u32) -> PolyMatrix {
    (0..q.p()).map(|_| poly_vec(rng, q.n(), q.p(), degree)).collect()
}

/// A torsion-free connection on `F`: `gamma[a][b] = gamma[b][a]`.
pub fn torsion_free(rng: &mut ChaCha8Rng, q: &Quintuple, degree: u32) -> FConnection {
    let p = q.p();
    let mut fc = FConnection::zero(q.n(), p);
    for a in 0..p {
        for b in a..p {
            let v = poly_vec(rng, q.n(), p, degree);
            fc.gamma[a][b] = v.clone();
            fc.gamma[b][a] = v;
        }
    }
    fc
}

/// `(I + S)(I - S)^-1` for a random skew `S` with small integer entries: a
/// rational rotation, orthogonal for the identity metric.
pub fn cayley_rotation(rng: &mut ChaCha8Rng, dim: usize, nvars: usize) -> PolyMatrix {
    let mut s = linalg::zero_matrix(0, dim, dim);
    for i in 0..dim {
        for j in i + 1..dim {
            let v = rng.gen_range(-2..=2);
            s[i][j] = Poly::from_int(0, v);
            s[j][i] = Poly::from_int(0, -v);
        }
    }
    let id = linalg::identity_matrix(0, dim);
    let inv = linalg::inverse_const_det(&linalg::mat_sub(&id, &s), 0).expect("I - S is invertible for skew S");
    let tau = linalg::mat_mul(&linalg::mat_add(&id, &s), &inv);
    tau.iter()
        .map(|row| row.iter().map(|f| Poly::constant(nvars, f.as_constant().expect("constant entry"))).collect())
        .collect()
}

/// `(tau, phi, beta)` with the given `tau`, random `phi` of degree at most
/// `degree`, and `beta = -Gram(phi)` plus a random skew part, so that
/// `iso1` holds.
pub fn iso_data(rng: &mut ChaCha8Rng, q: &Quintuple, tau: PolyMatrix, degree: u32) -> IsoData {
    let (n, p) = (q.n(), q.p());
    let phi = j_form(rng, q, degree);
    let mut beta = linalg::zero_matrix(n, p, p);
    for a in 0..p {
        for b in 0..p {
            beta[b][a] = -q.fiber().inner(n, &phi.get(&[a]), &phi.get(&[b]));
        }
    }
    for a in 0..p {
        for b in a + 1..p {
            let w = poly(rng, n, degree + 1);
            beta[b][a] += &w;
            beta[a][b] -= &w;
        }
    }
    IsoData { tau, phi, beta }
}

/// For connections `Gamma_a = ad(v_a)` with constant `v_a` and
/// `R_ab = [v_a, v_b]`, the pair `(tau, phi_a = tau v_a - v_a)` is an
/// automorphism of the ample algebroid whenever `tau` is a Lie algebra
/// automorphism.
pub fn adjoint_automorphism(q: &Quintuple, tau: PolyMatrix, v: &[PolyVec]) -> Automorphism {
    let mut phi = GValuedForm::zero(q.n(), q.p(), q.m(), 1);
    for (a, va) in v.iter().enumerate() {
        phi.set(&[a], linalg::vec_sub(&linalg::mat_vec(&tau, va), va)).expect("in range");
    }
    Automorphism { tau, phi }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fiber::QuadLieAlgebra;
    use crate::fixtures;
    use crate::morphism::validate_iso;

    #[test]
    fn same_seed_same_draws() {
        let q = fixtures::fixture_d();
        let a = j_form(&mut rng(7), &q, 2);
        let b = j_form(&mut rng(7), &q, 2);
        assert_eq!(a, b);
        assert_ne!(a, j_form(&mut rng(8), &q, 2));
    }

    #[test]
    fn cayley_is_an_su2_automorphism() {
        let su2 = QuadLieAlgebra::su2();
        let mut r = rng(3);
        for _ in 0..5 {
            let tau = cayley_rotation(&mut r, 3, 2);
            let i = IsoData { tau, phi: GValuedForm::zero(2, 2, 3, 1), beta: linalg::zero_matrix(2, 2, 2) };
            assert!(validate_iso(&i, &su2).passed());
        }
    }

    #[test]
    fn sampled_isos_satisfy_iso1() {
        let q = fixtures::fixture_d();
        let mut r = rng(11);
        for _ in 0..5 {
            let tau = cayley_rotation(&mut r, 3, 2);
            let i = iso_data(&mut r, &q, tau, 1);
            assert!(validate_iso(&i, q.fiber()).passed());
        }
    }

    #[test]
    fn torsion_free_is_symmetric() {
        let q = fixtures::fixture_c();
        assert!(torsion_free(&mut rng(1), &q, 1).torsion_witness().is_none());
    }
}
