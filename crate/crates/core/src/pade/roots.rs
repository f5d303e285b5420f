//! Simultaneous polynomial root finding (Aberth-Ehrlich) at arbitrary precision.

use num_complex::Complex64;

use crate::precision::{HPComplex, HPReal, Precision};

/// Roots of a polynomial together with their backward-error residuals.
#[derive(Clone, Debug)]
pub struct RootSet {
    pub roots: Vec<HPComplex>,
    /// `|p(z)| / sum_j |c_j| |z|^j` for each root.
    pub residuals: Vec<HPReal>,
    /// Largest entry of `residuals`.
    pub condition_hint: HPReal,
    pub sweeps: usize,
    pub converged: bool,
}

/// Value and derivative of `sum c_j z^j` by Horner.
fn eval_with_derivative(coeffs: &[HPComplex], z: &HPComplex) -> (HPComplex, HPComplex) {
    let n = coeffs.len() - 1;
    let mut p = coeffs[n].clone();
    let mut dp = HPComplex::zero(z.re.precision());
    for c in coeffs[..n].iter().rev() {
        dp = &(&dp * z) + &p;
        p = &(&p * z) + c;
    }
    (p, dp)
}

fn eval(coeffs: &[HPComplex], z: &HPComplex) -> HPComplex {
    let n = coeffs.len() - 1;
    let mut p = coeffs[n].clone();
    for c in coeffs[..n].iter().rev() {
        p = &(&p * z) + c;
    }
    p
}

/// Backward error of `z` as a root of `sum c_j z^j`.
pub fn backward_error(coeffs: &[HPReal], z: &HPComplex) -> HPReal {
    let prec = z.re.precision();
    let cz: Vec<HPComplex> = coeffs
        .iter()
        .map(|c| HPComplex::from_real(c.with_precision(prec)))
        .collect();
    let val = eval(&cz, z).abs();
    let r = z.abs();
    let mut scale = coeffs[coeffs.len() - 1].abs();
    for c in coeffs[..coeffs.len() - 1].iter().rev() {
        scale = &scale * &r + c.abs();
    }
    if scale.is_zero() {
        return val;
    }
    val / scale
}

/// Starting points spread over circles whose radii come from the upper convex
/// hull of `(j, log|c_j|)`, one circle per hull edge.
fn initial_guesses(logs: &[f64]) -> Vec<(f64, f64)> {
    let n = logs.len() - 1;
    let mut hull: Vec<usize> = Vec::new();
    for i in 0..=n {
        if logs[i] == f64::NEG_INFINITY {
            continue;
        }
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            let cross = (b as f64 - a as f64) * (logs[i] - logs[a])
                - (i as f64 - a as f64) * (logs[b] - logs[a]);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    let mut out = Vec::with_capacity(n);
    let sigma = 0.7;
    for w in hull.windows(2) {
        let (a, b) = (w[0], w[1]);
        let k = b - a;
        let radius = ((logs[a] - logs[b]) / k as f64).exp();
        for j in 0..k {
            let angle = 2.0 * std::f64::consts::PI * (j as f64) / (k as f64)
                + 2.0 * std::f64::consts::PI * (a as f64) / (n as f64)
                + sigma;
            out.push((radius * angle.cos(), radius * angle.sin()));
        }
    }
    while out.len() < n {
        let angle = 2.0 * std::f64::consts::PI * out.len() as f64 / n as f64 + sigma;
        out.push((angle.cos(), angle.sin()));
    }
    out
}

/// Aberth-Ehrlich sweeps at one precision, updating `z` in place.
fn aberth_sweeps(
    coeffs: &[HPComplex],
    z: &mut [HPComplex],
    prec: Precision,
    tol_digits: i32,
    max_sweeps: usize,
) -> (usize, bool) {
    let n = z.len();
    let tol = prec.tolerance(tol_digits);
    let tol_sq = &tol * &tol;
    let magnitudes: Vec<HPReal> = coeffs.iter().map(HPComplex::abs).collect();
    let mut done = vec![false; n];
    let one = HPComplex::from_real(HPReal::one(prec));
    let mut zf: Vec<Complex64> = z
        .iter()
        .map(|r| {
            let (re, im) = r.to_f64_pair();
            Complex64::new(re, im)
        })
        .collect();
    for sweep in 1..=max_sweeps {
        for i in 0..n {
            if done[i] {
                continue;
            }
            let (p, dp) = eval_with_derivative(coeffs, &z[i]);
            // stop once the backward error is at rounding level
            let r = z[i].abs();
            let mut bound = magnitudes[n].clone();
            for m in magnitudes[..n].iter().rev() {
                bound = &bound * &r + m;
            }
            if p.norm_sqr() <= &tol_sq * &(&bound * &bound) {
                done[i] = true;
                continue;
            }
            let ratio = &p / &dp;
            // the repulsion sum only enters the step at second order, so
            // double precision suffices unless two roots nearly coincide
            let sum = match repulsion_f64(&zf, i) {
                Some(s) => HPComplex::from_f64(s.re, s.im, prec),
                None => {
                    let mut sum = HPComplex::zero(prec);
                    for j in 0..n {
                        if j != i {
                            sum = &sum + &(&z[i] - &z[j]).recip();
                        }
                    }
                    sum
                }
            };
            let denom = &one - &(&ratio * &sum);
            let step = &ratio / &denom;
            if !step.re.is_finite() || !step.im.is_finite() {
                continue;
            }
            z[i] = &z[i] - &step;
            let (re, im) = z[i].to_f64_pair();
            zf[i] = Complex64::new(re, im);
            let scale = z[i].abs().max(&HPReal::one(prec));
            if step.abs() <= &tol * &scale {
                done[i] = true;
            }
        }
        if done.iter().all(|d| *d) {
            return (sweep, true);
        }
    }
    (max_sweeps, false)
}

/// `sum_{j != i} 1 / (z_i - z_j)` in `f64`, or `None` when some pair is too
/// close for double precision to resolve.
fn repulsion_f64(z: &[Complex64], i: usize) -> Option<Complex64> {
    let mut sum = Complex64::from(0.0);
    let scale = z[i].norm().max(1e-300);
    for (j, w) in z.iter().enumerate() {
        if j != i {
            let d = z[i] - w;
            if d.norm() <= 1e-6 * scale {
                return None;
            }
            sum += d.inv();
        }
    }
    (sum.re.is_finite() && sum.im.is_finite()).then_some(sum)
}

/// Sweep cap of the double-precision seeding pass.
const F64_SWEEPS: usize = 100;

/// `p(z) / p'(z)` in `f64`, through the reversed polynomial outside the
/// unit disc so large `|z|^n` never forms.
fn newton_ratio_f64(a: &[f64], z: Complex64) -> Complex64 {
    let n = a.len() - 1;
    if z.norm() <= 1.0 {
        let mut p = Complex64::from(a[n]);
        let mut dp = Complex64::from(0.0);
        for c in a[..n].iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        p / dp
    } else {
        let w = z.inv();
        let mut r = Complex64::from(a[0]);
        let mut dr = Complex64::from(0.0);
        for c in a[1..].iter() {
            dr = dr * w + r;
            r = r * w + c;
        }
        (w * (n as f64 - w * dr / r)).inv()
    }
}

/// Aberth sweeps in double precision, to seed the high-precision pass.
fn aberth_f64(a: &[f64], z: &mut [Complex64], max_sweeps: usize) -> usize {
    let n = z.len();
    let mut done = vec![false; n];
    for sweep in 1..=max_sweeps {
        for i in 0..n {
            if done[i] {
                continue;
            }
            let ratio = newton_ratio_f64(a, z[i]);
            let mut sum = Complex64::from(0.0);
            for j in 0..n {
                if j != i {
                    sum += (z[i] - z[j]).inv();
                }
            }
            let step = ratio / (1.0 - ratio * sum);
            if !(step.re.is_finite() && step.im.is_finite()) {
                done[i] = true;
                continue;
            }
            z[i] -= step;
            if step.norm() <= 1e-14 * z[i].norm().max(1.0) {
                done[i] = true;
            }
        }
        if done.iter().all(|d| *d) {
            return sweep;
        }
    }
    max_sweeps
}

/// All complex roots of `sum coeffs[j] z^j`. Leading zero coefficients must
/// be trimmed by the caller.
pub fn polynomial_roots(coeffs: &[HPReal], max_sweeps: usize) -> RootSet {
    let prec = coeffs[0].precision();
    let n = coeffs.len() - 1;
    if n == 0 {
        return RootSet {
            roots: vec![],
            residuals: vec![],
            condition_hint: HPReal::zero(prec),
            sweeps: 0,
            converged: true,
        };
    }
    let mut biggest = HPReal::zero(prec);
    for c in coeffs {
        biggest = biggest.max(&c.abs());
    }
    let scaled: Vec<f64> = coeffs.iter().map(|c| (c / &biggest).to_f64()).collect();
    let logs: Vec<f64> = coeffs.iter().map(HPReal::ln_abs).collect();
    let mut seeds: Vec<Complex64> = initial_guesses(&logs)
        .into_iter()
        .map(|(re, im)| Complex64::new(re, im))
        .collect();
    let s1 = aberth_f64(&scaled, &mut seeds, F64_SWEEPS);

    // refine through a ladder of precisions; most sweeps happen at the
    // cheap low-precision rungs
    let mut ladder = Vec::new();
    let mut d = 30;
    while d < prec.decimal_digits() {
        ladder.push(Precision::digits(d));
        d *= 2;
    }
    ladder.push(prec);
    let mut z: Vec<HPComplex> = seeds
        .iter()
        .map(|c| HPComplex::from_f64(c.re, c.im, ladder[0]))
        .collect();
    let mut s2 = 0;
    let mut converged = false;
    for rung in ladder {
        let cs: Vec<HPComplex> = coeffs
            .iter()
            .map(|c| HPComplex::from_real(c.with_precision(rung)))
            .collect();
        for r in z.iter_mut() {
            *r = HPComplex::new(r.re.with_precision(rung), r.im.with_precision(rung));
        }
        let (s, ok) = aberth_sweeps(&cs, &mut z, rung, 3, max_sweeps);
        s2 += s;
        converged = ok;
    }

    let residuals: Vec<HPReal> = z.iter().map(|r| backward_error(coeffs, r)).collect();
    let mut hint = HPReal::zero(prec);
    for r in &residuals {
        hint = hint.max(r);
    }
    RootSet {
        roots: z,
        residuals,
        condition_hint: hint,
        sweeps: s1 + s2,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly_from_roots(roots: &[f64], prec: Precision) -> Vec<HPReal> {
        let mut c = vec![HPReal::one(prec)];
        for r in roots {
            let r = HPReal::from_f64(*r, prec);
            let mut next = vec![HPReal::zero(prec); c.len() + 1];
            for (j, cj) in c.iter().enumerate() {
                next[j + 1] = &next[j + 1] + cj;
                next[j] = &next[j] - &(cj * &r);
            }
            c = next;
        }
        c
    }

    #[test]
    fn finds_real_and_complex_roots() {
        let prec = Precision::digits(50);
        // (z^2 + 1)(z - 2)(z + 0.5)
        let mut c = poly_from_roots(&[2.0, -0.5], prec);
        let sq = vec![HPReal::one(prec), HPReal::zero(prec), HPReal::one(prec)];
        let mut prod = vec![HPReal::zero(prec); c.len() + 2];
        for (i, a) in c.iter().enumerate() {
            for (j, b) in sq.iter().enumerate() {
                prod[i + j] = &prod[i + j] + &(a * b);
            }
        }
        c = prod;
        let rs = polynomial_roots(&c, 500);
        assert!(rs.converged);
        let found: Vec<(f64, f64)> = rs.roots.iter().map(HPComplex::to_f64_pair).collect();
        let expect = [(-0.5, 0.0), (0.0, -1.0), (0.0, 1.0), (2.0, 0.0)];
        for e in expect {
            assert!(
                found
                    .iter()
                    .any(|f| (f.0 - e.0).abs() < 1e-30 && (f.1 - e.1).abs() < 1e-30),
                "{e:?} not in {found:?}"
            );
        }
        assert!(rs.condition_hint.to_f64() < 1e-40);
    }

    #[test]
    fn wide_root_moduli() {
        let prec = Precision::digits(80);
        let roots: Vec<f64> = (0..30).map(|k| 1.5f64.powi(k - 15)).collect();
        let c = poly_from_roots(&roots, prec);
        let rs = polynomial_roots(&c, 500);
        assert!(rs.converged);
        let mut found: Vec<f64> = rs.roots.iter().map(|z| z.re.to_f64()).collect();
        found.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (f, e) in found.iter().zip(&roots) {
            assert!(((f - e) / e).abs() < 1e-20);
        }
    }
}

