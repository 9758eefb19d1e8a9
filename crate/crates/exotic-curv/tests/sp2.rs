use exotic_curv::lie::{self, LeftInvariant};
use exotic_curv::quat::Quaternion;
use exotic_curv::sp2::*;
use std::f64::consts::FRAC_PI_4;

fn sample_alpha(i: usize) -> Quaternion {
    Quaternion::imaginary((i as f64 * 0.7).sin(), (i as f64 * 1.3).cos(), 0.4).normalize()
}

fn sample_p(i: usize) -> Quaternion {
    Quaternion::new(0.3, (i as f64).sin(), 0.5, (i as f64 * 2.1).cos()).normalize()
}

#[test]
fn frame_gram_under_biinvariant_metric() {
    let q = representative_point(0.3, 0.4, sample_alpha(1), sample_p(1)).unwrap();
    let f = frame_at(&q).unwrap();
    let g = lie::biinvariant_gram();
    for i in 0..10 {
        let vi = f.vectors[i].left_coords(&q);
        assert!(f.vectors[i].tangency_residual(&q) < 1e-12);
        for j in 0..10 {
            let vj = f.vectors[j].left_coords(&q);
            let want = if i != j {
                0.0
            } else if i < 4 {
                1.0
            } else {
                0.5
            };
            let got = (vi.transpose() * g * vj)[0];
            assert!((got - want).abs() < 1e-12, "{i} {j} {got}");
        }
    }
}

#[test]
fn coordinates_round_trip() {
    for i in 0..40 {
        let t = 0.05 + (FRAC_PI_4 - 0.06) * (i as f64 / 39.0);
        let th = 0.05 + 3.0 * ((i * 7 % 40) as f64 / 40.0);
        let (a, p) = (sample_alpha(i), sample_p(i));
        let q = representative_point(t, th, a, p).unwrap();
        let c = coords_from_point(&Sp2Point { m: q.m, coords: None }).unwrap();
        assert!(
            (c.t - t).abs() < 1e-10 && (c.theta - th).abs() < 1e-10,
            "{t} {th} {c:?}"
        );
        assert!((c.alpha - a).norm() < 1e-10);
        assert!((c.p - p).norm() < 1e-10, "{:?} {:?}", c.p, p);
        let g = Quaternion::new(0.2, -0.4, 0.1, 0.7).normalize();
        let moved = act(Action::GromollMeyer, g, &q);
        let c2 = coords_from_point(&moved).unwrap();
        assert!((c2.t - t).abs() < 1e-10 && (c2.theta - th).abs() < 1e-10);
        let rep = representative_point(c2.t, c2.theta, c2.alpha, c2.p).unwrap();
        let back = Action::GromollMeyer.apply(
            (moved.m.b * rep.m.b.conj() + moved.m.d * rep.m.d.conj()).normalize(),
            &rep.m,
        );
        assert!((back - moved.m).norm() < 1e-10);
    }
}

#[test]
fn gm_projection_formula() {
    let (t, th) = (0.37, 1.1);
    let a = sample_alpha(3);
    let q = representative_point(t, th, a, sample_p(3)).unwrap();
    let y = gm_projection(&q);
    let want = Quaternion::ONE * (0.5 * (2.0 * th).sin() * (2.0 * t).cos()) - a * (0.5 * (2.0 * t).sin());
    assert!((y.q - want).norm() < 1e-14);
    assert!((y.r + 0.5 * (2.0 * th).cos() * (2.0 * t).cos()).abs() < 1e-14);
    assert!((y.norm() - 0.5).abs() < 1e-14);
}

#[test]
fn zeta_is_the_distance_gradient() {
    let g = lie::biinvariant_gram();
    for &(t, th) in &[(0.3, 0.0), (0.2, 0.5), (0.6, 1.2), (0.1, 2.0)] {
        let q = representative_point(t, th, sample_alpha(2), sample_p(5)).unwrap();
        let z = zeta_at(&q).unwrap().left_coords(&q);
        let zi = zeta_field(&q.m, &g).unwrap();
        assert!((z - zi).norm() < 1e-10, "{t} {th} {}", (z - zi).norm());
    }
}

#[test]
fn z_is_a_curvature_nullspace() {
    let nu = 0.3;
    let q = representative_point(0.3, 0.2, sample_alpha(4), sample_p(4)).unwrap();
    let (z, _) = z_split(&q.m, nu).unwrap();
    let g = lie::nu_gram(nu);
    let li = LeftInvariant::new(g);
    let zeta = zeta_field(&q.m, &g).unwrap();
    for k in 0..3 {
        let v = lie::Vec10::from_fn(|r, _| if r < 6 { z[(r, k)] } else { 0.0 });
        assert!(li.curv(&zeta, &v).abs() < 1e-8);
    }
}

#[test]
fn distribution_dimensions() {
    let q = representative_point(0.3, 0.2, sample_alpha(4), sample_p(4)).unwrap();
    let g = lie::nu_gram(0.5);
    let d = distributions_at(&q, &g, 0.5).unwrap();
    let f = d.fine.unwrap();
    let dims = [
        d.v1.len(),
        d.v2.len(),
        d.h.len(),
        f.delta_alpha.len(),
        f.v_gm.len(),
        f.h_gm.len(),
        f.z.len(),
        f.z_perp.len(),
    ];
    assert_eq!(dims, [3, 3, 4, 1, 3, 4, 3, 3]);
    assert!(!f.zv.is_empty());
    let kap = Action::GromollMeyer.killing_fields(&q.m);
    for v in f.v_gm.iter().chain(f.h_gm.iter()) {
        for k in &kap {
            assert!((v.transpose() * g * k)[0].abs() < 1e-10);
        }
    }
}
