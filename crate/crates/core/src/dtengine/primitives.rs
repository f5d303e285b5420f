//! Building blocks for DT recurrences.

use crate::precision::HPReal;

/// Order-`k` coefficient of the product of two series.
pub fn convolve(a: &[HPReal], b: &[HPReal], k: usize) -> HPReal {
    crate::precision::cauchy_coeff(a, b, k)
}

/// `sum_{j=1..=k} j a_j b_{k-j}`, the shared kernel of the sine/cosine and
/// exponential recurrences.
fn weighted(a: &[HPReal], b: &[HPReal], k: usize) -> HPReal {
    let prec = a[0].precision();
    let mut acc = HPReal::zero(prec);
    for j in 1..=k {
        acc += &(&(&a[j] * &b[k - j]) * &HPReal::from_i64(j as i64, prec));
    }
    acc
}

/// Order-`k` coefficients (`k >= 1`) of `sin(a)` and `cos(a)` given the
/// lower orders `s[..k]`, `c[..k]`:
/// `S(k) = (1/k) sum j A(j) C(k-j)`, `C(k) = -(1/k) sum j A(j) S(k-j)`.
pub fn sin_cos_step(a: &[HPReal], s: &[HPReal], c: &[HPReal], k: usize) -> (HPReal, HPReal) {
    debug_assert!(k >= 1);
    let inv = HPReal::from_i64(k as i64, a[0].precision()).recip();
    let sk = weighted(a, c, k) * &inv;
    let ck = -(weighted(a, s, k) * &inv);
    (sk, ck)
}
