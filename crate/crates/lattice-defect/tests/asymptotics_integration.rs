use lattice_defect::asymptotics::{
    band_edge_ray_forms, field_band_edge, field_far_parallel, field_far_perpendicular, greens_band_edge_continuation,
    Ray, DEFAULT_J_MAX, DEFAULT_K_MAX,
};
use lattice_defect::greens::greens_hypergeometric;
use lattice_defect::modes::{find_modes, reconstruct_field};
use lattice_defect::{DefectConfig, FrequencyPoint, GreensIndex, SeriesControl, Symmetry};

fn at_alpha(alpha: f64) -> FrequencyPoint {
    FrequencyPoint::from_omega2(2.0 * alpha + 4.0).unwrap()
}

#[test]
fn continuation_overlap_grid() {
    let ctl = SeriesControl::new(1e-15, 200_000).unwrap();
    for alpha in [2.05, 2.1, 2.15, 2.2, 2.25, 2.3] {
        let f = at_alpha(alpha);
        for m in 0..=3 {
            for n in 0..=m {
                let idx = GreensIndex::new(m, n);
                let c = greens_band_edge_continuation(idx, f, DEFAULT_J_MAX, DEFAULT_K_MAX).unwrap();
                let h = greens_hypergeometric(idx, f, &ctl).unwrap();
                assert!(
                    (c.value - h).abs() < 1e-6,
                    "({m},{n}) alpha={alpha}: {} vs {h}",
                    c.value
                );
            }
        }
    }
}

#[test]
fn bond_and_diagonal_sign_split() {
    let f = at_alpha(2.006);
    let bond: Vec<f64> = (0..8)
        .map(|k| band_edge_ray_forms(Ray::Bond, k, f).unwrap().value)
        .collect();
    let diag: Vec<f64> = (0..8)
        .map(|k| band_edge_ray_forms(Ray::Diag, k, f).unwrap().value)
        .collect();
    assert!(bond.windows(2).all(|p| p[0] * p[1] < 0.0), "{bond:?}");
    assert!(diag.iter().all(|&v| v > 0.0), "{diag:?}");
    // closer to the edge of validity the fixed-sign stretch shortens
    let f = at_alpha(2.01);
    assert!((0..=5).all(|k| band_edge_ray_forms(Ray::Diag, k, f).unwrap().value > 0.0));
}

#[test]
fn single_defect_far_field_along_line() {
    let cfg = DefectConfig::new(1, 0.8).unwrap();
    let mode = &find_modes(&cfg).unwrap()[0];
    let grid = reconstruct_field(&cfg, mode, (41, 0)).unwrap();
    let mut prev = f64::INFINITY;
    for n1 in [10, 15, 20, 30, 40] {
        let exact = grid.get(n1, 0).unwrap();
        let approx = field_far_parallel(&cfg, mode, n1).unwrap();
        let err = (approx.value - exact).abs();
        assert!(err <= approx.error, "n1={n1}: {err} > {}", approx.error);
        assert!(err / exact.abs() < prev);
        prev = err / exact.abs();
        // this close to the edge the leading form needs n1 √(c²−1) ≫ 1
        if n1 >= 20 {
            assert!(err / exact.abs() <= 0.05, "n1={n1}");
        }
        let next = field_far_parallel(&cfg, mode, n1 + 1).unwrap().value;
        assert!(next * approx.value < 0.0);
    }
}

#[test]
fn pair_far_field_perpendicular() {
    let cfg = DefectConfig::new(2, 0.49).unwrap();
    let modes = find_modes(&cfg).unwrap();
    let sym = modes.iter().find(|m| m.symmetry == Symmetry::Symmetric).unwrap();
    let grid = reconstruct_field(&cfg, sym, (0, 40)).unwrap();
    for (n2, tol) in [(15, 0.15), (40, 0.05)] {
        let exact = grid.get(0, n2).unwrap();
        let approx = field_far_perpendicular(&cfg, sym, 0, n2).unwrap();
        assert!(
            ((approx.value - exact) / exact).abs() <= tol,
            "n2={n2}: {} vs {exact}",
            approx.value
        );
        assert!((approx.value - exact).abs() <= approx.error);
    }

    // the skew mode radiates like a dipole: its far field nearly cancels
    let skew = modes.iter().find(|m| m.symmetry == Symmetry::SkewSymmetric).unwrap();
    let s_sym = field_far_parallel(&cfg, sym, 12).unwrap().value.abs();
    let s_skew = field_far_parallel(&cfg, skew, 12).unwrap().value.abs();
    let d_sym = sym.omega - 8f64.sqrt();
    let d_skew = skew.omega - 8f64.sqrt();
    assert!(d_skew > d_sym && s_skew < s_sym);
}

#[test]
fn single_defect_perpendicular_equals_parallel() {
    let cfg = DefectConfig::new(1, 0.8).unwrap();
    let mode = &find_modes(&cfg).unwrap()[0];
    for k in 5..12 {
        let a = field_far_parallel(&cfg, mode, k).unwrap().value;
        let b = field_far_perpendicular(&cfg, mode, 0, k).unwrap().value;
        assert_eq!(a, b);
    }
}

#[test]
fn band_edge_fields_track_exact() {
    let cfg = DefectConfig::new(1, 0.8).unwrap();
    let mode = &find_modes(&cfg).unwrap()[0];
    let grid = reconstruct_field(&cfg, mode, (3, 3)).unwrap();
    for k in 0..=2 {
        let exact = grid.get(k, k).unwrap();
        let approx = field_band_edge(&cfg, mode, Ray::Diag, k).unwrap().value;
        assert!(
            ((approx - exact) / exact).abs() <= 0.10,
            "diag k={k}: {approx} vs {exact}"
        );
        assert!(approx > 0.0);
    }

    let pair = DefectConfig::new(2, 0.49).unwrap();
    let sym = find_modes(&pair)
        .unwrap()
        .into_iter()
        .find(|m| m.symmetry == Symmetry::Symmetric)
        .unwrap();
    let grid = reconstruct_field(&pair, &sym, (4, 0)).unwrap();
    for k in 0..=2 {
        let exact = grid.get(k, 0).unwrap();
        let approx = field_band_edge(&pair, &sym, Ray::Bond, k).unwrap().value;
        assert!(
            ((approx - exact) / exact).abs() <= 0.10,
            "bond k={k}: {approx} vs {exact}"
        );
    }

    let trip = DefectConfig::new(3, 0.4).unwrap();
    let first = &find_modes(&trip).unwrap()[0];
    let grid = reconstruct_field(&trip, first, (2, 0)).unwrap();
    for k in -1..=3 {
        let exact = grid.get(k, 0).unwrap();
        let approx = field_band_edge(&trip, first, Ray::Bond, k).unwrap().value;
        assert!(
            ((approx - exact) / exact).abs() <= 0.10,
            "triplet k={k}: {approx} vs {exact}"
        );
    }
}
