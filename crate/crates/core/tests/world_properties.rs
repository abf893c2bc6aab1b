use proptest::prelude::*;
use telepath::geom::{point_segment_distance, OrientedRect, Vec2};
use telepath::vehicle::{footprint, VehicleParams, VehicleState};
use telepath::world::{load_map, save_map, Bounds, Obstacle, Pose, WorldMap};

fn map_with(obstacles: Vec<Obstacle>) -> WorldMap {
    WorldMap {
        name: "prop".into(),
        bounds: Bounds {
            min: Vec2::new(-100.0, -100.0),
            max: Vec2::new(100.0, 100.0),
        },
        start_pose: Pose {
            x: 0.0,
            y: 0.0,
            heading: 0.0,
        },
        finish_line: [Vec2::new(-1.0, -1.0), Vec2::new(-1.0, 1.0)],
        obstacles,
        reference_centerline: None,
    }
}

fn as_obstacle(r: &OrientedRect) -> Obstacle {
    Obstacle {
        center: r.center,
        half_extents: r.half_extents,
        rotation_rad: r.rotation,
    }
}

fn rect() -> impl Strategy<Value = OrientedRect> {
    (
        -3.0..3.0f64,
        -3.0..3.0f64,
        0.01..1.5f64,
        0.01..1.5f64,
        -3.2..3.2f64,
    )
        .prop_map(|(x, y, hx, hy, r)| OrientedRect::new(Vec2::new(x, y), Vec2::new(hx, hy), r))
}

fn moved(r: &OrientedRect, angle: f64, shift: Vec2) -> OrientedRect {
    OrientedRect::new(
        r.center.rotate(angle) + shift,
        r.half_extents,
        r.rotation + angle,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn collision_is_symmetric(a in rect(), b in rect()) {
        let ab = map_with(vec![as_obstacle(&b)]).collides(&a);
        let ba = map_with(vec![as_obstacle(&a)]).collides(&b);
        prop_assert_eq!(ab.is_empty(), ba.is_empty());
    }

    #[test]
    fn clearance_zero_iff_colliding(fp in rect(), obstacles in prop::collection::vec(rect(), 1..6)) {
        let map = map_with(obstacles.iter().map(as_obstacle).collect());
        let hits = map.collides(&fp);
        let clearance = map.clearance(&fp);
        prop_assert!(clearance >= 0.0);
        prop_assert_eq!(clearance == 0.0, !hits.is_empty(), "clearance {}", clearance);
    }

    #[test]
    fn clearance_bounded_by_sampled_points(fp in rect(), ob in rect()) {
        let map = map_with(vec![as_obstacle(&ob)]);
        let clearance = map.clearance(&fp);
        // Every pair of boundary points is at least the clearance apart.
        let boundary = |r: &OrientedRect| -> Vec<Vec2> {
            let c = r.corners();
            (0..4).flat_map(|i| (0..16).map(move |k| c[i].lerp(c[(i + 1) % 4], k as f64 / 16.0))).collect()
        };
        let (pa, pb) = (boundary(&fp), boundary(&ob));
        let sampled = pa.iter().flat_map(|p| pb.iter().map(move |q| p.distance(*q))).fold(f64::INFINITY, f64::min);
        if clearance > 0.0 {
            prop_assert!(sampled >= clearance - 1e-12);
            let edge = |r: &OrientedRect| 2.0 * r.half_extents.x.max(r.half_extents.y) / 16.0;
            prop_assert!(sampled <= clearance + edge(&fp) + edge(&ob));
        }
    }

    #[test]
    fn rigid_motion_invariance(
        fp in rect(),
        obstacles in prop::collection::vec(rect(), 1..6),
        angle in -3.2..3.2f64,
        dx in -40.0..40.0f64,
        dy in -40.0..40.0f64,
    ) {
        let shift = Vec2::new(dx, dy);
        let map = map_with(obstacles.iter().map(as_obstacle).collect());
        let map2 = map_with(obstacles.iter().map(|o| as_obstacle(&moved(o, angle, shift))).collect());
        let fp2 = moved(&fp, angle, shift);
        let (c1, c2) = (map.clearance(&fp), map2.clearance(&fp2));
        prop_assert!((c1 - c2).abs() < 1e-9, "{c1} vs {c2}");
        prop_assert_eq!(map.collides(&fp), map2.collides(&fp2));
    }

    #[test]
    fn save_load_is_identity(obstacles in prop::collection::vec(rect(), 0..8), name in "[a-z0-9 -]{1,12}") {
        let mut map = map_with(obstacles.iter().map(as_obstacle).collect());
        map.name = name;
        map.reference_centerline = Some(vec![Vec2::new(0.0, 0.0), Vec2::new(1.0 / 3.0, 0.1), Vec2::new(2.0, 0.7)]);
        let back = load_map(&save_map(&map)).unwrap();
        prop_assert_eq!(back, map);
    }
}

/// Closed point-in-rectangle test written from the corners, independent of the library's local-frame test.
fn inside(r: &OrientedRect, p: Vec2) -> bool {
    let c = r.corners();
    (0..4).all(|i| (c[(i + 1) % 4] - c[i]).cross(p - c[i]) >= -1e-12)
}

fn grid_overlap(a: &OrientedRect, b: &OrientedRect) -> bool {
    let all: Vec<Vec2> = a.corners().into_iter().chain(b.corners()).collect();
    let lo = all
        .iter()
        .fold(Vec2::new(f64::INFINITY, f64::INFINITY), |m, p| {
            Vec2::new(m.x.min(p.x), m.y.min(p.y))
        });
    let hi = all
        .iter()
        .fold(Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY), |m, p| {
            Vec2::new(m.x.max(p.x), m.y.max(p.y))
        });
    let step = 0.001;
    let nx = ((hi.x - lo.x) / step).ceil() as usize;
    let ny = ((hi.y - lo.y) / step).ceil() as usize;
    (0..=nx).any(|i| {
        (0..=ny).any(|j| {
            let p = Vec2::new(lo.x + i as f64 * step, lo.y + j as f64 * step);
            inside(a, p) && inside(b, p)
        })
    })
}

#[test]
fn corner_penetration_matches_grid_oracle() {
    let params = VehicleParams::default();
    let fp = footprint(&VehicleState::at_rest(0.0, 0.0, 0.0), &params);
    // Footprint spans x in [0, 0.5], y in [-0.1, 0.1]; its front-left corner is (0.5, 0.1).
    for (depth, expect) in [(0.01, true), (-0.01, false)] {
        let corner = Vec2::new(0.5 - depth, 0.1 - depth);
        let ob = Obstacle {
            center: corner + Vec2::new(0.1, 0.1),
            half_extents: Vec2::new(0.1, 0.1),
            rotation_rad: 0.0,
        };
        let map = map_with(vec![ob]);
        assert_eq!(grid_overlap(&fp, &ob.rect()), expect);
        assert_eq!(map.collides(&fp) == vec![0], expect, "depth {depth}");
    }

    // Same idea with the obstacle rotated so that only its corner pokes in.
    let tip = Vec2::new(0.5 - 0.01, 0.0);
    let half = 0.1;
    let ob = Obstacle {
        center: tip + Vec2::new(half * std::f64::consts::SQRT_2, 0.0),
        half_extents: Vec2::new(half, half),
        rotation_rad: std::f64::consts::FRAC_PI_4,
    };
    assert!(grid_overlap(&fp, &ob.rect()));
    assert_eq!(map_with(vec![ob]).collides(&fp), vec![0]);
}

#[test]
fn point_to_rotated_box_matches_analytic_distance() {
    let r = OrientedRect::new(
        Vec2::new(0.0, 0.0),
        Vec2::new(0.5, 0.5),
        std::f64::consts::FRAC_PI_4,
    );
    let h = 0.5 * std::f64::consts::SQRT_2;
    let corners = [
        Vec2::new(h, 0.0),
        Vec2::new(0.0, h),
        Vec2::new(-h, 0.0),
        Vec2::new(0.0, -h),
    ];
    let analytic = |p: Vec2| {
        (0..4)
            .map(|i| point_segment_distance(p, corners[i], corners[(i + 1) % 4]))
            .fold(f64::INFINITY, f64::min)
    };
    assert!((analytic(Vec2::new(0.0, 1.0)) - (1.0 - h)).abs() < 1e-12);
    assert!((analytic(Vec2::new(1.0, 1.0)) - (std::f64::consts::SQRT_2 - 0.5)).abs() < 1e-12);
    for k in 0..72 {
        let p = Vec2::from_angle(k as f64 * 5f64.to_radians()) * (0.9 + 0.01 * k as f64);
        let want = analytic(p);
        assert!((r.distance_to_point(p) - want).abs() < 1e-12, "{p:?}");
        let dot = OrientedRect::new(p, Vec2::new(1e-12, 1e-12), 0.0);
        let map = map_with(vec![as_obstacle(&r)]);
        assert!((map.clearance(&dot) - want).abs() < 1e-9, "{p:?}");
    }
}

#[test]
fn default_start_is_clear() {
    let map = WorldMap::builtin_default();
    let p = map.start_pose;
    let fp = footprint(
        &VehicleState::at_rest(p.x, p.y, p.heading),
        &VehicleParams::default(),
    );
    assert!(map.collides(&fp).is_empty());
    assert!(map.clearance(&fp) > 0.2);
}
