//! Complex floating-point helpers on top of nalgebra.

use nalgebra::DMatrix;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::exact::poly_from_roots;
use crate::scalar::{Scalar, C64, CQ};

pub type CMat = DMatrix<C64>;

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn scalar(n: usize, c: C64) -> CMat {
    CMat::identity(n, n) * c
}

/// Largest absolute entry.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Characteristic polynomial `det(x - A)`, constant term first, via the
/// Hessenberg recurrence.
pub fn charpoly(a: &CMat) -> Vec<C64> {
    let n = a.nrows();
    if n == 0 {
        return vec![C64::new(1.0, 0.0)];
    }
    let h = a.clone().hessenberg().h();
    // p[k] = charpoly of the leading k x k block
    let mut p: Vec<Vec<C64>> = vec![vec![C64::new(1.0, 0.0)]];
    for k in 0..n {
        let mut next = vec![C64::zero(); k + 2];
        for (d, c) in p[k].iter().enumerate() {
            next[d + 1] += c;
            next[d] -= h[(k, k)] * c;
        }
        let mut prod = C64::new(1.0, 0.0);
        for i in (0..k).rev() {
            prod *= h[(i + 1, i)];
            let coef = h[(i, k)] * prod;
            for (d, c) in p[i].iter().enumerate() {
                next[d] -= coef * c;
            }
        }
        p.push(next);
    }
    p.pop().expect("nonempty")
}

/// `max |c - p| / max(1, max |p|)` over coefficients.
pub fn poly_rel_error(c: &[C64], p: &[C64]) -> f64 {
    if c.len() != p.len() {
        return f64::INFINITY;
    }
    let scale = p.iter().fold(1.0f64, |acc, z| acc.max(z.norm()));
    c.iter().zip(p).fold(0.0f64, |acc, (x, y)| acc.max((x - y).norm())) / scale
}

/// Relative distance between `charpoly(a)` and `prod (x - e)`.
pub fn spectrum_error(a: &CMat, eigenvalues: &[CQ]) -> f64 {
    let roots: Vec<C64> = eigenvalues.iter().map(Scalar::to_c64).collect();
    poly_rel_error(&charpoly(a), &poly_from_roots(&roots))
}

/// Eigenvalues from the complex Schur form.
pub fn eigenvalues(a: &CMat) -> Vec<C64> {
    a.clone()
        .schur()
        .eigenvalues()
        .expect("complex Schur form is triangular")
        .iter()
        .copied()
        .collect()
}

/// Singular values in descending order.
/// Thin SVD `a = u diag(s) v_t` with `s` in decreasing order.
pub struct Svd {
    pub u: CMat,
    pub s: Vec<f64>,
    pub v_t: CMat,
}

/// nalgebra's complex SVD occasionally returns factors that do not
/// reproduce the input. Those results are detected and the factorization
/// is redone on `a W` for a fixed random unitary `W`.
pub fn svd(a: &CMat) -> Svd {
    let scale = a.norm().max(f64::MIN_POSITIVE);
    let n = a.ncols();
    let mut best: Option<(f64, Svd)> = None;
    for attempt in 0..8u64 {
        let w = if attempt == 0 {
            identity(n)
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(attempt);
            ginibre(n, &mut rng).qr().q()
        };
        let raw = (a * &w).svd(true, true);
        let (u, vt) = (raw.u.expect("requested"), raw.v_t.expect("requested"));
        let mut order: Vec<usize> = (0..raw.singular_values.len()).collect();
        order.sort_by(|&i, &j| raw.singular_values[j].total_cmp(&raw.singular_values[i]));
        let out = Svd {
            u: CMat::from_fn(u.nrows(), order.len(), |i, j| u[(i, order[j])]),
            s: order.iter().map(|&k| raw.singular_values[k]).collect(),
            v_t: CMat::from_fn(order.len(), n, |i, j| vt[(order[i], j)]) * w.adjoint(),
        };
        let err = (out.reconstruct() - a).norm() / scale;
        if err < 1e-12 {
            return out;
        }
        if best.as_ref().is_none_or(|(e, _)| err < *e) {
            best = Some((err, out));
        }
    }
    best.expect("at least one attempt").1
}

impl Svd {
    pub fn reconstruct(&self) -> CMat {
        let s = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
            self.s.len(),
            self.s.iter().map(|&x| C64::new(x, 0.0)),
        ));
        &self.u * s * &self.v_t
    }
}

pub fn singular_values(a: &CMat) -> Vec<f64> {
    svd(a).s
}

/// Numerical rank with threshold `tol * max(1, sigma_max)`.
pub fn rank(a: &CMat, tol: f64) -> usize {
    let s = singular_values(a);
    let cut = tol * s.first().copied().unwrap_or(0.0).max(1.0);
    s.iter().filter(|&&v| v > cut).count()
}

/// `A = X Y` with `X` of size `n x r` and `Y` of size `r x n`, splitting the
/// singular values evenly between the factors. Fails unless the numerical
/// rank is exactly `r`.
pub fn rank_factorization(a: &CMat, r: usize, tol: f64) -> Result<(CMat, CMat)> {
    let svd = svd(a);
    let s = &svd.s;
    let top = s.iter().copied().fold(0.0f64, f64::max).max(1.0);
    let observed = s.iter().filter(|&&v| v > tol * top).count();
    if observed != r {
        return Err(Error::Degenerate(format!(
            "residue has numerical rank {observed}, orbit requires {r}"
        )));
    }
    let (u, vt) = (&svd.u, &svd.v_t);
    let n = a.nrows();
    let x = CMat::from_fn(n, r, |i, j| u[(i, j)] * s[j].sqrt());
    let y = CMat::from_fn(r, a.ncols(), |i, j| vt[(i, j)] * s[i].sqrt());
    Ok((x, y))
}

/// Unit vector spanning (approximately) the kernel of `a`: the right
/// singular vector for the smallest singular value, with that value.
pub fn right_null_vector(a: &CMat) -> (Vec<C64>, f64) {
    let svd = svd(a);
    let k = a.nrows().min(a.ncols()) - 1;
    let v = (0..a.ncols()).map(|j| svd.v_t[(k, j)].conj()).collect();
    (v, svd.s[k])
}

/// Row vector `w*` with `w* a ~ 0`, returned as the column `w`.
pub fn left_null_vector(a: &CMat) -> (Vec<C64>, f64) {
    right_null_vector(&a.adjoint())
}

/// Orthonormal columns spanning the `dim` smallest right singular
/// directions of `a`, with the largest singular value among them.
pub fn null_space(a: &CMat, dim: usize) -> (CMat, f64) {
    let svd = svd(a);
    let k = a.nrows().min(a.ncols());
    let basis = svd.v_t.rows(k - dim, dim).adjoint();
    (basis, svd.s[k - dim])
}

/// Unit vectors `w` in the span of `left` and `v` in the span of `right`
/// maximizing `|w* v|`, together with `w* v`.
pub fn best_pairing(left: &CMat, right: &CMat) -> (Vec<C64>, Vec<C64>, C64) {
    let m = left.adjoint() * right;
    let svd = svd(&m);
    let w = left * svd.u.column(0);
    let v = right * svd.v_t.row(0).adjoint();
    let w: Vec<C64> = w.iter().copied().collect();
    let v: Vec<C64> = v.iter().copied().collect();
    let wv = inner(&w, &v);
    (w, v, wv)
}

pub fn column(v: &[C64]) -> CMat {
    CMat::from_column_slice(v.len(), 1, v)
}

/// `sum_i conj(w_i) v_i`.
pub fn inner(w: &[C64], v: &[C64]) -> C64 {
    w.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// Complex Ginibre matrix with unit-variance entries.
pub fn ginibre<R: Rng>(n: usize, rng: &mut R) -> CMat {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re * scale, im * scale)
    })
}

/// 2-norm condition number.
pub fn condition(a: &CMat) -> f64 {
    let s = singular_values(a);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn svd_survives_a_bad_nalgebra_case() {
        // rank one; nalgebra reports singular values (5.32, 0) and factors
        // that miss the matrix by 0.8
        let a = CMat::from_row_slice(
            2,
            2,
            &[
                C64::new(0.10292581207207338, 1.2622077285010707),
                C64::new(-1.1041182906885345, 1.6543538671874376),
                C64::new(1.6437811197636796, -1.9210538170757552),
                C64::new(3.8970741879279616, -0.7622077285010752),
            ],
        );
        let f = svd(&a);
        assert!((f.reconstruct() - &a).norm() < 1e-12 * a.norm());
        assert!((f.s[0] - a.norm()).abs() < 1e-12);
        let (x, y) = rank_factorization(&a, 1, 1e-8).unwrap();
        assert!((x * y - &a).norm() < 1e-12 * a.norm());
    }

    #[test]
    fn charpoly_of_conjugated_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let roots = [c(1.0), C64::new(-2.0, 0.5), c(3.0), c(0.0), C64::new(0.25, -1.0)];
        let d = CMat::from_diagonal(&nalgebra::DVector::from_column_slice(&roots));
        let g = ginibre(5, &mut rng);
        let a = &g * d * g.clone().try_inverse().unwrap();
        let err = poly_rel_error(&charpoly(&a), &poly_from_roots(&roots));
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn rank_factorization_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = CMat::from_fn(4, 2, |_, _| C64::new(rng.random(), rng.random()));
        let y = CMat::from_fn(2, 4, |_, _| C64::new(rng.random(), rng.random()));
        let a = &x * &y;
        let (fx, fy) = rank_factorization(&a, 2, 1e-10).unwrap();
        assert!(max_abs(&(&fx * &fy - &a)) < 1e-12);
        assert!(rank_factorization(&a, 3, 1e-10).is_err());
        assert_eq!(rank(&a, 1e-10), 2);
    }

    #[test]
    fn null_vectors() {
        let a = CMat::from_row_slice(2, 2, &[c(1.0), c(2.0), c(2.0), c(4.0)]);
        let (v, s) = right_null_vector(&a);
        assert!(s < 1e-12);
        assert!(max_abs(&(&a * column(&v))) < 1e-12);
        let (w, _) = left_null_vector(&a);
        assert!(max_abs(&(column(&w).adjoint() * &a)) < 1e-12);
    }

    #[test]
    fn pairing_inside_eigenspaces() {
        let e = |i: usize| CMat::from_fn(3, 1, |r, _| c(if r == i { 1.0 } else { 0.0 }));
        let mut left = CMat::zeros(3, 2);
        left.set_column(0, &e(0).column(0));
        left.set_column(1, &e(1).column(0));
        let right = (e(1) + e(2)) * c(std::f64::consts::FRAC_1_SQRT_2);
        let (w, _, wv) = best_pairing(&left, &right);
        assert!((wv.norm() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!(w[0].norm() < 1e-12);
        let a = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.0), c(0.0), c(1.0)]));
        let (basis, s) = null_space(&a, 2);
        assert!(s < 1e-12);
        assert!(max_abs(&(&a * basis)) < 1e-12);
    }
}
