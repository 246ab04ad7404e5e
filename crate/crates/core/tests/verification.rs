use hsk::blocks::{self, VolumeConvention};
use hsk::grid::{sample_expression, AnnulusMode, Exponent, ExponentVector, GridSpec};
use hsk::herz::HerzSliceParams;
use hsk::slice::SliceParams;
use hsk::verify::{maximal_boundedness_study, run_suite, thm_window, FamilyKind, FieldFamily, Status, SuiteConfig, Support};

fn config_2d(samples: usize, u: &[f64], beta: f64, s: Exponent) -> SuiteConfig {
    let grid = GridSpec::spanning(2, -4.0, 4.0, samples).unwrap();
    let slice = SliceParams::new(0.25, ExponentVector::finite(u).unwrap(), ExponentVector::isotropic(2.0, 2).unwrap()).unwrap();
    SuiteConfig::new(grid, HerzSliceParams::new(beta, s, slice, AnnulusMode::Homogeneous).unwrap()).unwrap()
}

fn with_threads<T: Send>(n: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap().install(f)
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let cfg = config_2d(33, &[2.0, 3.0], 0.25, Exponent::Finite(2.0));
    let fam = cfg.default_family(5, 12);
    for suite in ["holder", "lattice_fatou", "blocks_sufficiency", "maximal_decay"] {
        let one = with_threads(1, || run_suite(suite, &cfg, &fam).unwrap().to_json());
        let four = with_threads(4, || run_suite(suite, &cfg, &fam).unwrap().to_json());
        assert_eq!(one, four, "{suite}");
    }
}

#[test]
fn every_suite_runs_in_one_dimension() {
    let cfg = SuiteConfig::default_for(1).unwrap();
    let fam = cfg.default_family(3, 6);
    for suite in hsk::verify::SUITES {
        let report = run_suite(suite, &cfg, &fam).unwrap();
        assert!(!report.checks.is_empty());
        for c in &report.checks {
            assert!(!c.anchor.is_empty());
            assert_ne!(c.status, Status::Fail, "{suite}: {c:?}");
        }
    }
}

#[test]
fn every_family_kind_passes_the_identities() {
    let cfg = config_2d(33, &[2.0, 4.0], 0.5, Exponent::Finite(1.0));
    for kind in [FamilyKind::SmoothBumps, FamilyKind::AnnulusSupported, FamilyKind::IndicatorStacks, FamilyKind::SignAlternating] {
        let support = if kind == FamilyKind::AnnulusSupported { Support::Shells(-1, 1) } else { Support::Radius(cfg.interior_radius()) };
        let fam = FieldFamily::new(kind, 9, 8, support);
        for suite in ["power_identity", "blocks_roundtrip", "blocks_equality", "holder", "duality_pairing"] {
            let r = run_suite(suite, &cfg, &fam).unwrap();
            assert!(r.passed(), "{kind:?} {suite}: {:?}", r.failures().collect::<Vec<_>>());
        }
    }
}

#[test]
fn duality_with_small_outer_exponent_uses_sup_norm() {
    let cfg = config_2d(33, &[2.0, 2.0], 0.0, Exponent::Finite(0.5));
    let r = run_suite("duality_pairing", &cfg, &cfg.default_family(1, 10)).unwrap();
    assert!(r.passed());
    assert!(r.checks[0].note.as_deref().unwrap().contains("inf"));
}

#[test]
fn anisotropic_inner_exponents_skip_exact_slice_checks() {
    let grid = GridSpec::spanning(2, -4.0, 4.0, 33).unwrap();
    let slice = SliceParams::new(0.25, ExponentVector::finite(&[2.0, 3.0]).unwrap(), ExponentVector::finite(&[2.0, 4.0]).unwrap()).unwrap();
    let cfg = SuiteConfig::new(grid, HerzSliceParams::new(0.0, Exponent::Finite(2.0), slice, AnnulusMode::Homogeneous).unwrap()).unwrap();
    let r = run_suite("holder", &cfg, &cfg.default_family(1, 4)).unwrap();
    assert_eq!(r.check("mixed-norm Hölder").unwrap().status, Status::Pass);
    assert_eq!(r.check("slice Hölder").unwrap().status, Status::Skipped);
}

#[test]
fn maximal_bounded_outside_window_is_skipped_with_note() {
    // one dimension, u = 2: the two window readings do not overlap
    let cfg = SuiteConfig::default_for(1).unwrap();
    let r = run_suite("maximal_bounded", &cfg, &cfg.default_family(1, 3)).unwrap();
    assert!(r.checks.iter().all(|c| c.status == Status::Skipped && c.note.is_some()));
    assert!(r.passed());
}

#[test]
fn window_edge_is_flagged_but_runs() {
    let u = ExponentVector::finite(&[2.0, 2.0]).unwrap();
    let (lo, hi1, hi2) = thm_window(2, &u);
    assert_eq!((lo, hi1, hi2), (-1.0, 1.0, 1.0));
    let cfg = config_2d(33, &[2.0, 2.0], 0.95, Exponent::Finite(2.0));
    let r = run_suite("maximal_bounded", &cfg, &cfg.default_family(2, 4)).unwrap();
    assert!(r.checks.iter().all(|c| c.status != Status::Skipped));
    assert!(r.checks[0].note.as_deref().unwrap().contains("window edge"));
}

#[test]
fn boundedness_study_table() {
    let configs = vec![
        config_2d(65, &[2.0, 2.0], 0.0, Exponent::Finite(2.0)),
        config_2d(65, &[3.0, 3.0], -0.25, Exponent::Finite(4.0)),
        config_2d(65, &[2.0, 2.0], 1.5, Exponent::Finite(2.0)),
    ];
    let mut fam = configs[0].default_family(4, 8);
    fam.support = Support::Radius(configs[0].interior_radius() / 3.0);
    let rows = maximal_boundedness_study(&configs, &fam).unwrap();
    assert_eq!(rows.len(), 3);
    for row in &rows[..2] {
        assert!(row.ran);
        assert!(row.amplitude_deviation.0 <= 1e-12);
        assert!(row.dilation_deviation.0 <= 0.1, "{row:?}");
        assert!(row.spread.0 <= 3.0);
        assert_eq!(row.shell_ratios.iter().map(|r| r.0).collect::<Vec<_>>(), vec![0, 1, 2, 3]);
        assert!(row.passed());
    }
    assert!(!rows[2].ran);
    assert!(rows[2].note.as_deref().unwrap().starts_with("skipped"));
}

#[test]
fn exported_manifest_reloads_exactly() {
    let spec = GridSpec::spanning(2, -4.0, 4.0, 41).unwrap();
    let f = sample_expression("(x - 0.3 * y) * gaussian(1.1) * ball_indicator(0, 3.4)", &spec).unwrap();
    let slice = SliceParams::new(0.25, ExponentVector::finite(&[2.0, 3.0]).unwrap(), ExponentVector::isotropic(1.5, 2).unwrap()).unwrap();
    let p = HerzSliceParams::new(-0.3, Exponent::Finite(3.0), slice, AnnulusMode::NonHomogeneous).unwrap();
    let d = blocks::decompose(&f, &p, VolumeConvention::Euclidean).unwrap();
    let dir = tempfile::tempdir().unwrap();
    blocks::export(&d, dir.path()).unwrap();
    let back = blocks::load(dir.path()).unwrap();
    assert_eq!(back.params, d.params);
    assert_eq!(back.etas(), d.etas());
    assert_eq!(back.levels(), d.levels());
    assert!(d.levels().iter().all(|&l| l >= 0));
    assert_eq!(blocks::reconstruct(&back).unwrap(), blocks::reconstruct(&d).unwrap());
}
