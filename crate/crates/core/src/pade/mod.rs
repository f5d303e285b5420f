//! `[L/M]` Pade approximants of a Taylor series and detection of their
//! real poles.

mod roots;

pub use roots::{backward_error, polynomial_roots, RootSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Lu, Matrix};
use crate::precision::{HPComplex, HPReal, Precision, TaylorSeries};

/// Default cap on Aberth sweeps.
pub const MAX_ROOT_SWEEPS: usize = 500;

/// `P(tau) / Q(tau)` with `q_0 = 1`.
#[derive(Clone, Debug)]
pub struct PadeApproximant {
    pub numerator: Vec<HPReal>,
    pub denominator: Vec<HPReal>,
    pub num_deg: usize,
    pub den_deg: usize,
    /// How many times the denominator degree was lowered because the
    /// linear system was singular.
    pub degree_reductions: usize,
}

/// Builds the `[L/M]` approximant of `h`.
///
/// The denominator solves `sum_{j=0..M} q_j h_{L+m-j} = 0` for `m = 1..M`
/// (with `q_0 = 1` and `h_i = 0` for `i < 0`) by pivoted LU at the series'
/// precision; the numerator follows as `p_i = sum_{j<=min(i,M)} q_j h_{i-j}`.
/// A singular system lowers `M` by one and retries.
pub fn build_pade(h: &TaylorSeries, num_deg: usize, den_deg: usize) -> Result<PadeApproximant> {
    let needed = num_deg + den_deg;
    if h.order() < needed {
        return Err(Error::InsufficientOrder {
            needed,
            got: h.order(),
        });
    }
    let prec = h.precision();
    let coef = |i: isize| -> HPReal {
        if i < 0 {
            HPReal::zero(prec)
        } else {
            h.coeff(i as usize).clone()
        }
    };
    let tol = prec.tolerance(10);
    let l = num_deg as isize;
    let mut m_deg = den_deg;
    let mut reductions = 0;
    let q = loop {
        if m_deg == 0 {
            break vec![HPReal::one(prec)];
        }
        let m = m_deg as isize;
        let rows: Vec<Vec<HPReal>> = (1..=m)
            .map(|row| (1..=m).map(|j| coef(l + row - j)).collect())
            .collect();
        let rhs: Vec<HPReal> = (1..=m).map(|row| -coef(l + row)).collect();
        let a = Matrix::from_rows(rows);
        let all_zero = rhs.iter().all(HPReal::is_zero) && a.max_abs().is_zero();
        if all_zero {
            // h is a polynomial of degree <= L; any q works, take the trivial one
            let mut q = vec![HPReal::one(prec)];
            q.extend((0..m_deg).map(|_| HPReal::zero(prec)));
            break q;
        }
        match Lu::factor(&a, &tol, "Pade denominator system") {
            Ok(lu) => {
                let mut q = vec![HPReal::one(prec)];
                q.extend(lu.solve(&rhs));
                break q;
            }
            Err(Error::SingularMatrix(_)) => {
                m_deg -= 1;
                reductions += 1;
            }
            Err(e) => return Err(e),
        }
    };
    let p: Vec<HPReal> = (0..=num_deg)
        .map(|i| {
            let mut acc = HPReal::zero(prec);
            for (j, qj) in q.iter().enumerate().take(i.min(m_deg) + 1) {
                acc += &(qj * h.coeff(i - j));
            }
            acc
        })
        .collect();
    Ok(PadeApproximant {
        numerator: p,
        denominator: q,
        num_deg,
        den_deg: m_deg,
        degree_reductions: reductions,
    })
}

fn horner(c: &[HPReal], x: &HPReal) -> HPReal {
    let mut acc = c[c.len() - 1].clone();
    for v in c[..c.len() - 1].iter().rev() {
        acc = &acc * x + v;
    }
    acc
}

fn horner_abs(c: &[HPReal], x: &HPReal) -> HPReal {
    let ax = x.abs();
    let mut acc = c[c.len() - 1].abs();
    for v in c[..c.len() - 1].iter().rev() {
        acc = &acc * &ax + v.abs();
    }
    acc
}

fn horner_complex(c: &[HPReal], z: &HPComplex) -> HPComplex {
    let mut acc = HPComplex::from_real(c[c.len() - 1].clone());
    for v in c[..c.len() - 1].iter().rev() {
        acc = &(&acc * z) + &HPComplex::from_real(v.clone());
    }
    acc
}

fn derivative(c: &[HPReal]) -> Vec<HPReal> {
    if c.len() <= 1 {
        return vec![HPReal::zero(c[0].precision())];
    }
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(j, v)| v * &HPReal::from_i64(j as i64, v.precision()))
        .collect()
}

/// Drops trailing coefficients that are negligible against the largest one.
fn trimmed(c: &[HPReal]) -> &[HPReal] {
    let prec = c[0].precision();
    let mut big = HPReal::zero(prec);
    for v in c {
        big = big.max(&v.abs());
    }
    let cut = &big * &prec.tolerance(0);
    let mut n = c.len();
    while n > 1 && c[n - 1].abs() <= cut {
        n -= 1;
    }
    &c[..n]
}

impl PadeApproximant {
    pub fn precision(&self) -> Precision {
        self.denominator[0].precision()
    }

    /// `P(tau) / Q(tau)`; fails when `tau` sits on a zero of `Q`.
    pub fn evaluate(&self, tau: &HPReal) -> Result<HPReal> {
        let q = horner(&self.denominator, tau);
        let scale = horner_abs(&self.denominator, tau);
        if q.abs() <= &scale * &self.precision().tolerance(0) {
            return Err(Error::PoleHit(tau.to_f64()));
        }
        Ok(horner(&self.numerator, tau) / q)
    }

    pub fn denominator_roots(&self) -> RootSet {
        polynomial_roots(trimmed(&self.denominator), MAX_ROOT_SWEEPS)
    }

    pub fn numerator_roots(&self) -> RootSet {
        polynomial_roots(trimmed(&self.numerator), MAX_ROOT_SWEEPS)
    }

    /// Distance from `z` to the numerator zero that Newton's method reaches
    /// from `z`, or `None` when no zero lies within `reach` of it.
    pub fn nearby_zero_distance(&self, z: &HPComplex, reach: f64) -> Option<f64> {
        let num = trimmed(&self.numerator);
        if num.len() < 2 {
            return None;
        }
        let dp = derivative(num);
        let prec = self.precision();
        let tol = prec.tolerance(3);
        let mut w = z.clone();
        for _ in 0..40 {
            let step = &horner_complex(num, &w) / &horner_complex(&dp, &w);
            if !step.re.is_finite() || !step.im.is_finite() {
                return None;
            }
            w = &w - &step;
            if (&w - z).abs().to_f64() > reach {
                return None;
            }
            if step.abs() <= &tol * &w.abs().max(&HPReal::one(prec)) {
                return Some((&w - z).abs().to_f64());
            }
        }
        None
    }

    /// Residue `P(z) / Q'(z)` at a simple pole `z`.
    pub fn residue(&self, z: &HPComplex) -> HPComplex {
        let dq = derivative(&self.denominator);
        &horner_complex(&self.numerator, z) / &horner_complex(&dq, z)
    }

    /// Maclaurin coefficients of `P/Q` up to `order`, by series division.
    pub fn maclaurin(&self, order: usize) -> TaylorSeries {
        let prec = self.precision();
        let pad = |c: &[HPReal]| -> TaylorSeries {
            let mut v: Vec<HPReal> = c.iter().take(order + 1).cloned().collect();
            v.resize(order + 1, HPReal::zero(prec));
            TaylorSeries::new(v, prec)
        };
        let q_inv = pad(&self.denominator)
            .reciprocal(order)
            .expect("q_0 = 1 is never zero");
        pad(&self.numerator)
            .mul(&q_inv, order)
            .expect("orders match by construction")
    }
}

/// How a denominator root was treated by the pole search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootStatus {
    /// Real, positive and kept; the smallest of these is `tau_pole`.
    Kept,
    /// Imaginary part above the tolerance.
    Complex,
    /// Real part at or below the positivity tolerance.
    NonPositive,
    /// Cancelled by a nearby numerator zero (Froissart doublet).
    Doublet,
    /// Residue sign says the approximant tends to `+inf` from the left,
    /// which a negative indicator cannot do.
    WrongSign,
}

/// Thresholds of the pole search, all in units of `tau`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PoleFilter {
    pub imag_tol: f64,
    pub pos_tol: f64,
    /// A pole with a numerator zero closer than this is a doublet.
    pub doublet_distance: f64,
    /// A pole whose residue magnitude is at most this fraction of `|h_0|` is
    /// a doublet as well.
    pub doublet_residue: f64,
    /// Keep only poles approached from the left with `P/Q -> -inf`.
    pub require_negative_branch: bool,
}

impl PoleFilter {
    pub fn defaults(horizon: f64, prec: Precision) -> Self {
        PoleFilter {
            imag_tol: 1e-6 * horizon,
            pos_tol: 1e-8,
            doublet_distance: 10f64.powf(-(prec.decimal_digits() as f64) / 4.0),
            doublet_residue: 0.0,
            require_negative_branch: false,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RootReport {
    pub re: String,
    pub im: String,
    pub residual: f64,
    pub residue: Option<f64>,
    pub nearest_zero: Option<f64>,
    pub status: RootStatus,
}

/// Outcome of the smallest-positive-real-root search.
#[derive(Clone, Debug)]
pub struct PoleSearch {
    pub tau_pole: Option<HPReal>,
    pub roots: Vec<RootReport>,
    pub filtered: usize,
    pub converged: bool,
}

/// Classifies every denominator root and returns the smallest kept one.
pub fn smallest_positive_real_root(approx: &PadeApproximant, filter: &PoleFilter) -> PoleSearch {
    let den = approx.denominator_roots();
    let check_zeros = filter.doublet_distance > 0.0 && approx.num_deg > 0;
    let h0 = approx.numerator[0].abs().to_f64();
    let mut reports = Vec::with_capacity(den.roots.len());
    let mut best: Option<HPReal> = None;
    let mut filtered = 0;
    for (z, res) in den.roots.iter().zip(&den.residuals) {
        let (re, im) = z.to_f64_pair();
        let mut report = RootReport {
            re: z.re.to_sci_string(25),
            im: z.im.to_sci_string(25),
            residual: res.to_f64(),
            residue: None,
            nearest_zero: None,
            status: RootStatus::Kept,
        };
        if im.abs() > filter.imag_tol {
            report.status = RootStatus::Complex;
        } else if re <= filter.pos_tol {
            report.status = RootStatus::NonPositive;
        } else {
            let residue = approx.residue(z).re.to_f64();
            report.residue = Some(residue);
            let nearest = if check_zeros { approx.nearby_zero_distance(z, 1e-3 * re.max(1.0)) } else { None };
            report.nearest_zero = nearest;
            let close_zero = nearest.is_some_and(|d| d <= filter.doublet_distance * re.max(1.0));
            let tiny_residue = residue.abs() <= filter.doublet_residue * h0;
            if close_zero || tiny_residue {
                report.status = RootStatus::Doublet;
                filtered += 1;
            } else if filter.require_negative_branch && !(residue > 0.0) {
                report.status = RootStatus::WrongSign;
                filtered += 1;
            } else if best.as_ref().map_or(true, |b| z.re < *b) {
                best = Some(z.re.clone());
            }
        }
        reports.push(report);
    }
    PoleSearch {
        tau_pole: best,
        roots: reports,
        filtered,
        converged: den.converged,
    }
}

#[cfg(test)]
mod tests;
