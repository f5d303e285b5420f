use super::*;

fn p() -> Precision {
    Precision::digits(60)
}

fn series(v: &[f64]) -> TaylorSeries {
    TaylorSeries::from_f64s(v, p())
}

fn close(a: &HPReal, b: f64, tol: f64) -> bool {
    (a.to_f64() - b).abs() <= tol
}

fn approx_from(num: &[f64], den: &[f64]) -> PadeApproximant {
    PadeApproximant {
        numerator: num.iter().map(|v| HPReal::from_f64(*v, p())).collect(),
        denominator: den.iter().map(|v| HPReal::from_f64(*v, p())).collect(),
        num_deg: num.len() - 1,
        den_deg: den.len() - 1,
        degree_reductions: 0,
    }
}

#[test]
fn geometric_zero_one() {
    let a = build_pade(&series(&[1.0; 6]), 0, 1).unwrap();
    assert_eq!(a.numerator.len(), 1);
    assert!(close(&a.numerator[0], 1.0, 1e-50));
    assert!(close(&a.denominator[0], 1.0, 0.0));
    assert!(close(&a.denominator[1], -1.0, 1e-50));
    let v = a.evaluate(&HPReal::from_f64(0.5, p())).unwrap();
    assert!(close(&v, 2.0, 1e-50));
}

#[test]
fn exp_one_one() {
    let e: Vec<f64> = vec![1.0, 1.0, 0.5, 1.0 / 6.0];
    let a = build_pade(&series(&e), 1, 1).unwrap();
    assert!(close(&a.numerator[1], 0.5, 1e-15));
    assert!(close(&a.denominator[1], -0.5, 1e-15));
    // matches the series through order L + M = 2
    let m = a.maclaurin(2);
    for k in 0..=2 {
        assert!(close(m.coeff(k), e[k], 1e-15));
    }
}

#[test]
fn double_pole_at_one() {
    let h: Vec<f64> = (0..6).map(|k| -((k + 1) as f64)).collect();
    let a = build_pade(&series(&h), 0, 2).unwrap();
    let q: Vec<f64> = a.denominator.iter().map(HPReal::to_f64).collect();
    assert!((q[0] - 1.0).abs() < 1e-50 && (q[1] + 2.0).abs() < 1e-40 && (q[2] - 1.0).abs() < 1e-40);
    let roots = a.denominator_roots();
    for z in &roots.roots {
        let (re, im) = z.to_f64_pair();
        // a double root is only determined to about half the working digits
        assert!((re - 1.0).abs() < 1e-25 && im.abs() < 1e-25, "{re} {im}");
    }
}

#[test]
fn evaluate_at_origin_and_pole() {
    let a = build_pade(&series(&[-2.0, 1.0, 3.0, 0.5, -1.0]), 2, 2).unwrap();
    let v = a.evaluate(&HPReal::zero(p())).unwrap();
    assert!(close(&v, -2.0, 1e-50));
    let geo = approx_from(&[1.0], &[1.0, -1.0]);
    assert!(matches!(
        geo.evaluate(&HPReal::one(p())),
        Err(Error::PoleHit(_))
    ));
}

#[test]
fn insufficient_order() {
    assert!(matches!(
        build_pade(&series(&[1.0, 2.0]), 1, 1),
        Err(Error::InsufficientOrder { needed: 2, got: 1 })
    ));
}

#[test]
fn singular_system_lowers_degree() {
    // h = 1 + tau^2: the [1/1] system has matrix [h_1] = [0]
    let a = build_pade(&series(&[1.0, 0.0, 1.0, 0.0, 0.0]), 1, 1).unwrap();
    assert_eq!(a.den_deg, 0);
    assert_eq!(a.degree_reductions, 1);
}

#[test]
fn denominator_root_examples() {
    let a = approx_from(&[1.0], &[1.0, -1.0]);
    let r = a.denominator_roots();
    assert_eq!(r.roots.len(), 1);
    assert!(close(&r.roots[0].re, 1.0, 1e-50));
    // (1 - t)(1 - t/2) = 1 - 1.5 t + 0.5 t^2
    let b = approx_from(&[1.0], &[1.0, -1.5, 0.5]);
    let mut re: Vec<f64> = b.denominator_roots().roots.iter().map(|z| z.re.to_f64()).collect();
    re.sort_by(f64::total_cmp);
    assert!((re[0] - 1.0).abs() < 1e-40 && (re[1] - 2.0).abs() < 1e-40);
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

#[test]
fn smallest_positive_examples() {
    let filter = PoleFilter::defaults(1.0, p());
    let a = approx_from(&[1.0], &[1.0, -1.5, 0.5]);
    let s = smallest_positive_real_root(&a, &filter);
    assert!(close(s.tau_pole.as_ref().unwrap(), 1.0, 1e-40));

    // roots 0.5 +- 0.3i and 1.2: (t^2 - t + 0.34)(t - 1.2), scaled to q_0 = 1
    let raw = poly_mul(&[0.34, -1.0, 1.0], &[-1.2, 1.0]);
    let q: Vec<f64> = raw.iter().map(|c| c / raw[0]).collect();
    let b = approx_from(&[1.0], &q);
    let s = smallest_positive_real_root(&b, &filter);
    assert!(close(s.tau_pole.as_ref().unwrap(), 1.2, 1e-14));
    assert_eq!(
        s.roots.iter().filter(|r| r.status == RootStatus::Complex).count(),
        2
    );

    // no positive real roots at all
    let c = approx_from(&[1.0], &[1.0, 1.0]);
    assert!(smallest_positive_real_root(&c, &filter).tau_pole.is_none());
}

#[test]
fn froissart_doublet_is_filtered() {
    let prec = p();
    let hp = |s: &str| HPReal::parse(s, prec).unwrap();
    // base approximant 1 / ((1 - t)(1 - t/2)) times (t - 0.4 - 1e-15) / (t - 0.4)
    let zero = hp("0.400000000000001");
    let pole = hp("0.4");
    let num = vec![-zero.clone(), HPReal::one(prec)];
    let base_den = vec![hp("1"), hp("-1.5"), hp("0.5")];
    let mut den = vec![HPReal::zero(prec); 4];
    for (i, a) in base_den.iter().enumerate() {
        den[i] = &den[i] - &(a * &pole);
        den[i + 1] = &den[i + 1] + a;
    }
    // normalise q_0 = 1
    let q0 = den[0].clone();
    let den: Vec<HPReal> = den.iter().map(|c| c / &q0).collect();
    let num: Vec<HPReal> = num.iter().map(|c| c / &q0).collect();
    let a = PadeApproximant {
        numerator: num,
        denominator: den,
        num_deg: 1,
        den_deg: 3,
        degree_reductions: 0,
    };
    let mut filter = PoleFilter::defaults(1.0, prec);
    filter.doublet_distance = 1e-12;
    let s = smallest_positive_real_root(&a, &filter);
    assert_eq!(s.filtered, 1);
    assert!(close(s.tau_pole.as_ref().unwrap(), 1.0, 1e-30));
    assert!(s.roots.iter().any(|r| r.status == RootStatus::Doublet));
}

#[test]
fn wrong_sign_pole_is_skipped_when_requested() {
    // h = +1/(1 - t/0.9) near 0.9 goes to +inf from the left, while
    // -1/(1 - t) goes to -inf: P/Q = (-1 + 0.9 ... ) built from partial fractions
    let prec = p();
    // 1/(1 - t/0.9) - 1/(1 - t) = ((1 - t) - (1 - t/0.9)) / ((1 - t/0.9)(1 - t))
    let num = vec![0.0, -1.0 + 1.0 / 0.9];
    let den = poly_mul(&[1.0, -1.0 / 0.9], &[1.0, -1.0]);
    let a = approx_from(&num, &den);
    let mut filter = PoleFilter::defaults(1.0, prec);
    filter.doublet_distance = 0.0;
    let plain = smallest_positive_real_root(&a, &filter);
    assert!(close(plain.tau_pole.as_ref().unwrap(), 0.9, 1e-14));
    filter.require_negative_branch = true;
    let signed = smallest_positive_real_root(&a, &filter);
    assert!(close(signed.tau_pole.as_ref().unwrap(), 1.0, 1e-14));
}
