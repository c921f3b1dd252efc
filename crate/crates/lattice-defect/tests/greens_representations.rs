use lattice_defect::greens::{
    greens_auto, greens_bessel_integral, greens_double_integral, greens_hypergeometric, greens_origin_closed_form,
    greens_single_integral,
};
use lattice_defect::oracle::greens_quadrature_reference;
use lattice_defect::{FrequencyPoint, GreensIndex, SeriesControl};

const OMEGA2: [f64; 4] = [8.5, 10.0, 16.0, 32.0];

#[test]
fn four_representations_agree() {
    let ctl = SeriesControl::new(1e-15, 100_000).unwrap();
    for &w2 in &OMEGA2 {
        let f = FrequencyPoint::from_omega2(w2).unwrap();
        for m in 0..=5 {
            for n2 in 0..=m {
                let idx = GreensIndex::new(m, n2);
                let vals = [
                    greens_double_integral(idx, f, 1e-12).unwrap(),
                    greens_single_integral(idx, f, 1e-13).unwrap(),
                    greens_bessel_integral(idx, f, 1e-13).unwrap(),
                    greens_hypergeometric(idx, f, &ctl).unwrap(),
                ];
                for a in &vals {
                    for b in &vals {
                        assert!((a - b).abs() < 1e-9, "({m},{n2}) at {w2}: {vals:?}");
                    }
                }
            }
        }
    }
}

#[test]
fn index_symmetries() {
    let f = FrequencyPoint::from_omega2(10.0).unwrap();
    let g = |m, n| greens_auto(GreensIndex::new(m, n), f).unwrap();
    for (m, n) in [(1, 0), (3, 2), (4, 1)] {
        let v = g(m, n);
        for w in [g(-m, n), g(m, -n), g(n, m), g(-n, -m)] {
            assert_eq!(v, w);
        }
    }
}

#[test]
fn origin_closed_form_matches() {
    for &w2 in &OMEGA2 {
        let f = FrequencyPoint::from_omega2(w2).unwrap();
        let c = greens_origin_closed_form(f).unwrap();
        assert!((greens_auto(GreensIndex::new(0, 0), f).unwrap() - c).abs() < 1e-10);
        assert!((greens_quadrature_reference(GreensIndex::new(0, 0), f).unwrap() - c).abs() < 1e-10);
    }
}

#[test]
fn lattice_equation_reproduces_delta() {
    for w2 in [8.5, 10.0, 20.0] {
        let f = FrequencyPoint::from_omega2(w2).unwrap();
        let two_alpha = 2.0 * f.alpha();
        let g = |m: i64, n: i64| greens_auto(GreensIndex::new(m, n), f).unwrap();
        for m in -4..=4 {
            for n in -4..=4 {
                let lhs = g(m + 1, n) + g(m - 1, n) + g(m, n + 1) + g(m, n - 1) + two_alpha * g(m, n);
                let delta = if m == 0 && n == 0 { 1.0 } else { 0.0 };
                assert!((lhs - delta).abs() < 1e-8, "({m},{n}) at {w2}: {lhs}");
            }
        }
    }
}

#[test]
fn outside_stop_band_is_refused() {
    let f = FrequencyPoint::from_omega2(7.9).unwrap();
    assert!(!f.in_stop_band());
    assert!(greens_auto(GreensIndex::new(0, 0), f).is_err());
    assert!(greens_quadrature_reference(GreensIndex::new(0, 0), f).is_err());
}
