use noma_meta::metadist::*;
use noma_meta::model::{InterfererModel, MomentOrder};
use noma_meta::specfun::Quadrature;
use noma_meta::{db_to_linear, Betas, Params};

fn two_user() -> (Params, LinkSpec<f64>) {
    (
        Params::new(1.0, 4.0, 2).unwrap(),
        LinkSpec::Downlink(Betas::new(vec![0.35, 0.65]).unwrap()),
    )
}

#[test]
fn exact_meta_integrates_to_the_mean() {
    let (p, link) = two_user();
    let theta = db_to_linear(-5.0);
    let m1 = link
        .moment(MomentOrder::Real(1.0), 2, &p, theta)
        .unwrap()
        .re();
    let opts = GilPelaez::default();
    let q = Quadrature::new(1e-6, 1e-6);
    let area = q
        .integrate(
            |x: f64| {
                exact_meta(link.imaginary_moments(2, &p, theta), x, &opts)
                    .unwrap()
                    .value
            },
            0.0,
            1.0,
        )
        .unwrap()
        .value;
    assert!((area - m1).abs() < 1e-4, "{area} vs {m1}");
}

#[test]
fn exact_lies_within_moment_bounds() {
    let (p, link) = two_user();
    let theta = db_to_linear(-5.0);
    let moments: Vec<(f64, f64)> = (1..=4)
        .map(|k| {
            let b = k as f64;
            (
                b,
                link.moment(MomentOrder::Real(b), 1, &p, theta)
                    .unwrap()
                    .re(),
            )
        })
        .collect();
    for i in 1..10 {
        let x = i as f64 / 10.0;
        let e = exact_meta(
            link.imaginary_moments(1, &p, theta),
            x,
            &GilPelaez::default(),
        )
        .unwrap()
        .value;
        let b = meta_bounds(&moments, x).unwrap();
        assert!(
            b.lower - 1e-4 <= e && e <= b.upper + 1e-4,
            "x={x}: {} ≤ {e} ≤ {}",
            b.lower,
            b.upper
        );
    }
}

#[test]
fn beta_fit_reproduces_its_moments() {
    let s = BetaShape::fit(0.6f64, 0.42).unwrap();
    let (a, b) = s.moments();
    assert!((a - 0.6).abs() < 1e-14 && (b - 0.42).abs() < 1e-14);
    assert!(BetaShape::fit(0.6, 0.7).is_err());
}

#[test]
fn delay_reliability_arguments() {
    assert!((delay_reliability_argument(2, 0.95f64).unwrap() - 0.7764).abs() < 1e-4);
    assert!((delay_reliability_argument(3, 0.95f64).unwrap() - 0.6316).abs() < 1e-4);
    assert!(delay_reliability_argument(0, 0.5f64).is_err());
}

#[test]
fn uplink_gain_is_about_two_and_a_third() {
    let p = Params::new(5e-4, 4.0, 3).unwrap();
    let g = gain(
        db_to_linear(-10.0),
        &p,
        &LinkSpec::Uplink(InterfererModel::Model2),
    )
    .unwrap();
    assert!((g - 2.3).abs() < 0.1, "{g}");
}
