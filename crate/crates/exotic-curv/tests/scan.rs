//! Integration tests for the curvature scanner.

use exotic_curv::curvature::{curvature_tensor, sigma7_sectional, Plane};
use exotic_curv::metric::{Stage, StageConfig};
use exotic_curv::psi::zero_gauge;
use exotic_curv::quat::Quaternion;
use exotic_curv::scan::{cell_minima, min_scan, neighborhood_scan, sample_planes, ScanSpec, HORIZONTAL_DIM};
use exotic_curv::sp2::{self, Action, TangentVector};

fn small_spec(cfg: StageConfig) -> ScanSpec {
    let mut spec = ScanSpec::new(cfg, 7);
    spec.grid_t = 4;
    spec.grid_theta = 4;
    spec.planes_per_point = 8;
    spec
}

#[test]
fn biinvariant_scan_is_nonnegative() {
    let spec = small_spec(StageConfig::formula_check().at_stage(Stage::Biinvariant));
    let result = min_scan(&spec).unwrap();
    assert!(result.failures.is_empty(), "{:?}", result.failures);
    let min = result.global_min.unwrap().sec;
    assert!(min >= -1e-6, "biinvariant minimum {min}");
}

#[test]
fn nu_l_scan_is_nonnegative_and_positive_away_from_the_zero_locus() {
    let spec = small_spec(StageConfig::formula_check().at_stage(Stage::CheegerL));
    let result = min_scan(&spec).unwrap();
    assert!(result.global_min.as_ref().unwrap().sec >= -1e-6);
    let mins = cell_minima(&spec, &result);
    for (cell, &m) in mins.iter().enumerate() {
        let (t, theta) = spec.cell_center(cell);
        let cos2 = (2.0 * theta).cos().abs();
        if zero_gauge(t, theta) > 1.1 && cos2 > 0.1 {
            assert!(m > 0.0, "cell {cell} at ({t}, {theta}) has minimum {m}");
        }
    }
}

#[test]
fn refinement_never_increases_the_cell_minimum() {
    let spec = small_spec(StageConfig::formula_check().at_stage(Stage::FiberScaled));
    let result = min_scan(&spec).unwrap();
    for cell in 0..spec.cells() {
        let sampled = result
            .records
            .iter()
            .filter(|r| r.cell == cell && !r.refined)
            .map(|r| r.sec)
            .fold(f64::INFINITY, f64::min);
        let refined: Vec<f64> = result
            .records
            .iter()
            .filter(|r| r.cell == cell && r.refined)
            .map(|r| r.sec)
            .collect();
        assert_eq!(refined.len(), 1);
        assert!(
            refined[0] <= sampled,
            "cell {cell}: refined {} above sampled {sampled}",
            refined[0]
        );
    }
}

#[test]
fn record_stream_is_independent_of_worker_count() {
    let spec = small_spec(StageConfig::formula_check().at_stage(Stage::FiberScaled));
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| min_scan(&spec).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(8));
    assert_eq!(one, run(1));
}

#[test]
fn sampled_planes_are_orthonormal_and_horizontal() {
    let cfg = StageConfig::formula_check().at_stage(Stage::CheegerL);
    let q = sp2::representative_point(0.3, 0.7, Quaternion::I, Quaternion::ONE).unwrap();
    let tensor = curvature_tensor(&cfg, &q).unwrap();
    let planes = sample_planes(&q, &cfg, 20, 5, 0).unwrap();
    assert_eq!(planes, sample_planes(&q, &cfg, 20, 5, 0).unwrap());
    for p in planes {
        assert!((tensor.inner(&p.x, &p.x) - 1.0).abs() < 1e-12);
        assert!((tensor.inner(&p.y, &p.y) - 1.0).abs() < 1e-12);
        assert!(tensor.inner(&p.x, &p.y).abs() < 1e-12);
        for k in Action::GromollMeyer.killing_fields(&q.m) {
            assert!(tensor.inner(&p.x, &k).abs() < 1e-10);
        }
    }
    assert_eq!(HORIZONTAL_DIM, 7);
}

#[test]
fn records_agree_across_h2_translates() {
    let cfg = StageConfig::formula_check().at_stage(Stage::Final);
    let q = sp2::representative_point(0.35, 0.9, Quaternion::I, Quaternion::ONE).unwrap();
    let tensor = curvature_tensor(&cfg, &q).unwrap();
    let g = Quaternion::new(0.3, -0.5, 0.7, 0.1).normalize();
    let q2 = sp2::act(Action::H2, g, &q);
    let tensor2 = curvature_tensor(&cfg, &q2).unwrap();
    for plane in sample_planes(&q, &cfg, 6, 3, 0).unwrap() {
        let push = |v| act_left(&q, &q2, g, v);
        let moved = Plane {
            x: push(&plane.x),
            y: push(&plane.y),
        };
        let (a, _) = sigma7_sectional(&tensor, &q.m, &plane).unwrap();
        let (b, _) = sigma7_sectional(&tensor2, &q2.m, &moved).unwrap();
        assert!((a - b).abs() <= 1e-6 * a.abs().max(1.0), "{a} vs {b}");
    }
}

fn act_left(
    q: &sp2::Sp2Point,
    q2: &sp2::Sp2Point,
    g: Quaternion,
    v: &exotic_curv::lie::Vec10,
) -> exotic_curv::lie::Vec10 {
    sp2::act_vector(Action::H2, g, &TangentVector::from_left(q, v)).left_coords(q2)
}

#[test]
fn neighborhood_scan_origin_matches_the_zero_plane_and_is_nonnegative_before_fiber_scaling() {
    let spec = small_spec(StageConfig::formula_check().at_stage(Stage::CheegerL));
    let report = neighborhood_scan(&spec).unwrap();
    assert!(!report.cells.is_empty());
    for cell in &report.cells {
        assert!((cell.p00 - cell.curv_zero_plane).abs() <= 1e-12 * cell.curv_zero_plane.abs().max(1.0));
    }
    assert!(report.min_p >= -1e-7, "minimum {}", report.min_p);
}
