use covtest_core::models::{
    build, class_report, cholesky, model_report, whiten, CovarianceModel, SignMatrix,
};
use covtest_core::sampler::{sample_gaussian, SeedSpec};
use covtest_core::Error;

#[test]
fn boundary_prior_sits_on_the_class_edge() {
    // at phi = 0.02 the band is 111; with p = 100 T the prior's energy and
    // smoothness functionals approach their defining constraints
    let (alpha, ell, phi) = (1.0, 1.0, 0.02);
    let p = 11_100;
    let model = CovarianceModel::ExtremalPrior { alpha, ell, phi, signs: None };
    let rep = model_report(&model, p, alpha, ell, phi).unwrap();
    let energy_ratio = rep.energy / (phi * phi);
    let sobolev_ratio = rep.sobolev / ell;
    assert!((energy_ratio - 1.0).abs() < 0.05, "energy ratio {energy_ratio}");
    assert!((sobolev_ratio - 1.0).abs() < 0.05, "sobolev ratio {sobolev_ratio}");
    assert!(rep.min_eig_lb > 0.0);
}

#[test]
fn indefinite_tridiagonal_reports_its_pivot() {
    let bad = build(&CovarianceModel::Tridiagonal { rho: 0.6 }, 50).unwrap();
    match cholesky(&bad) {
        // leading minors flip sign first at the fifth pivot
        Err(Error::NotPositiveDefinite { pivot }) => assert_eq!(pivot, 4),
        other => panic!("expected pivot failure, got {other:?}"),
    }
}

#[test]
fn cholesky_reconstructs_the_prior() {
    // phi = 0.15 keeps the worst Gershgorin row sum below 1, so the
    // factorization is safe for every sign pattern
    let model = CovarianceModel::ExtremalPrior {
        alpha: 1.0,
        ell: 1.0,
        phi: 0.15,
        signs: Some(SignMatrix::random(40, 20, &SeedSpec::new(21, 0, 0))),
    };
    let sigma = build(&model, 40).unwrap();
    let l = cholesky(&sigma).unwrap();
    let mut worst = 0.0f64;
    for i in 0..40 {
        for j in 0..40 {
            let mut back = 0.0;
            for k in 0..=i.min(j) {
                back += l.get(i, k) * l.get(j, k);
            }
            worst = worst.max((back - sigma.get(i, j)).abs());
        }
    }
    assert!(worst < 1e-10, "reconstruction error {worst}");
}

#[test]
fn whitening_restores_identity_covariance() {
    let p = 10;
    let n = 100_000;
    let sigma = build(&CovarianceModel::Tridiagonal { rho: 0.3 }, p).unwrap();
    let chol = cholesky(&sigma).unwrap();
    let x = sample_gaussian(&chol, n, &SeedSpec::new(303, 4, 0)).unwrap();
    let z = whiten(&x, &sigma).unwrap();
    for i in 0..p {
        for j in i..p {
            let mut acc = 0.0;
            for k in 0..n {
                acc += z.row(k)[i] * z.row(k)[j];
            }
            let emp = acc / n as f64;
            let target = if i == j { 1.0 } else { 0.0 };
            assert!(
                (emp - target).abs() < 0.05,
                "whitened covariance ({i},{j}) = {emp}"
            );
        }
    }
}

#[test]
fn report_rejects_off_unit_diagonals() {
    let mut sigma = build(&CovarianceModel::Identity, 6).unwrap();
    sigma.set(3, 3, 1.0 + 1e-9);
    match class_report(&sigma, 1.0, 1.0, 0.1) {
        Err(Error::NotCorrelation { index }) => assert_eq!(index, 3),
        other => panic!("expected a correlation failure, got {other:?}"),
    }
}

#[test]
fn sign_matrix_must_cover_the_band()
{
    // band 22 at phi = 0.1 needs signs on 21 offsets
    let model = CovarianceModel::ExtremalPrior {
        alpha: 1.0,
        ell: 1.0,
        phi: 0.1,
        signs: Some(SignMatrix::random(100, 5, &SeedSpec::new(77, 0, 0))),
    };
    assert!(matches!(build(&model, 100), Err(Error::Domain(_))));
    let wide = CovarianceModel::ExtremalPrior {
        alpha: 1.0,
        ell: 1.0,
        phi: 0.1,
        signs: Some(SignMatrix::random(100, 21, &SeedSpec::new(77, 0, 0))),
    };
    assert!(build(&wide, 100).is_ok());
}

#[test]
fn random_signs_are_symmetric_and_unit() {
    let sm = SignMatrix::random(30, 12, &SeedSpec::new(5, 5, 5));
    let mut saw_minus = false;
    for i in 0..30 {
        assert_eq!(sm.get(i, i), 0.0);
        for j in 0..30 {
            if i == j {
                continue;
            }
            let u = sm.get(i, j);
            assert_eq!(u, sm.get(j, i));
            assert_eq!(u.abs(), 1.0);
            if u < 0.0 && i.abs_diff(j) <= 12 {
                saw_minus = true;
            }
        }
    }
    assert!(saw_minus);
}

#[test]
fn gershgorin_certificate_scales_with_radius() {
    // 1 - min_eig_lb shrinks roughly like sqrt(phi) at alpha = 1
    let p = 500;
    let hi = model_report(
        &CovarianceModel::ExtremalPrior { alpha: 1.0, ell: 1.0, phi: 0.1, signs: None },
        p,
        1.0,
        1.0,
        0.1,
    )
    .unwrap();
    let lo = model_report(
        &CovarianceModel::ExtremalPrior { alpha: 1.0, ell: 1.0, phi: 0.05, signs: None },
        p,
        1.0,
        1.0,
        0.05,
    )
    .unwrap();
    let slope = ((1.0 - hi.min_eig_lb) / (1.0 - lo.min_eig_lb)).ln() / (0.1f64 / 0.05).ln();
    assert!((slope - 0.5).abs() < 0.15, "all-plus slope {slope}");
}

#[test]
fn explicit_models_are_validated() {
    let sigma = build(&CovarianceModel::Tridiagonal { rho: 0.2 }, 8).unwrap();
    let ok = build(&CovarianceModel::Explicit { matrix: sigma.clone() }, 8).unwrap();
    assert_eq!(ok, sigma);
    let mut bad = sigma.clone();
    bad.set(0, 1, 0.9);
    assert!(matches!(
        build(&CovarianceModel::Explicit { matrix: bad }, 8),
        Err(Error::Domain(_))
    ));
    let mut off = sigma;
    off.set(2, 2, 0.5);
    assert!(matches!(
        build(&CovarianceModel::Explicit { matrix: off }, 8),
        Err(Error::Domain(_))
    ));
}
