use super::point::arc_points;
use super::*;

/// Straight strip of width `d`: two collinear opposite channels with
/// coincident axis origins and an empty junction.
pub fn strip_geometry(d: f64, r0: f64) -> Geometry {
    let left = ChannelSpec {
        id: 0,
        width: d,
        origin: Point2::new(0.0, 0.0),
        axis: Point2::new(-1.0, 0.0),
        wall: WallKind::Dirichlet,
        profile: ChannelProfile::Uniform,
    };
    let right = ChannelSpec {
        id: 1,
        width: d,
        origin: Point2::new(0.0, 0.0),
        axis: Point2::new(1.0, 0.0),
        wall: WallKind::Dirichlet,
        profile: ChannelProfile::Uniform,
    };
    let lo = Point2::new(0.0, -0.5 * d);
    let hi = Point2::new(0.0, 0.5 * d);
    let chains = vec![
        TaggedChain { points: vec![lo, lo], wall: WallKind::Dirichlet },
        TaggedChain { points: vec![hi, hi], wall: WallKind::Dirichlet },
    ];
    build_geometry(vec![left, right], JunctionSpec { chains, holes: vec![], r0 }).unwrap()
}

/// Three channels 120° apart attached to a disk junction of radius `rho0`.
pub fn three_channel_disk(d: f64, rho0: f64, eps_geo: f64) -> Result<Geometry> {
    let angles = [90.0f64, 210.0, 330.0].map(|a| a.to_radians());
    let z_a = (rho0 * rho0 - 0.25 * d * d).sqrt();
    let mut channels = Vec::new();
    for (j, th) in angles.iter().enumerate() {
        channels.push(ChannelSpec {
            id: j,
            width: d,
            origin: Point2::new(0.0, 0.0),
            axis: Point2::new(th.cos(), th.sin()),
            wall: WallKind::Dirichlet,
            profile: ChannelProfile::Uniform,
        });
    }
    let mut chains = Vec::new();
    for j in 0..3 {
        let c = &channels[j];
        let k = &channels[(j + 1) % 3];
        let a_plus = c.point_at(z_a, d);
        let a_minus = k.point_at(z_a, 0.0);
        let th0 = a_plus.y.atan2(a_plus.x);
        let mut th1 = a_minus.y.atan2(a_minus.x);
        while th1 < th0 {
            th1 += std::f64::consts::TAU;
        }
        let mut pts = arc_points(Point2::new(0.0, 0.0), rho0, th0, th1, eps_geo);
        // force exact watertight endpoints
        *pts.first_mut().unwrap() = a_plus;
        *pts.last_mut().unwrap() = a_minus;
        chains.push(TaggedChain { points: pts, wall: WallKind::Dirichlet });
    }
    build_geometry(channels, JunctionSpec { chains, holes: vec![], r0: rho0 })
}

#[test]
fn strip_builds() {
    let g = strip_geometry(1.0, 0.5);
    match &g {
        Geometry::Junction(j) => {
            assert_eq!(j.channels.len(), 2);
            assert!(j.holes.is_empty());
        }
        _ => panic!("expected junction"),
    }
}

#[test]
fn three_channel_disk_builds() {
    let g = three_channel_disk(1.0, 3.0, 0.01).unwrap();
    assert_eq!(g.channel_count(), 3);
}

#[test]
fn overlapping_channels_rejected() {
    let a = ChannelSpec {
        id: 0,
        width: 1.0,
        origin: Point2::new(0.0, 0.0),
        axis: Point2::new(1.0, 0.0),
        wall: WallKind::Dirichlet,
        profile: ChannelProfile::Uniform,
    };
    let b = ChannelSpec {
        id: 1,
        width: 1.0,
        origin: Point2::new(0.0, 0.3),
        axis: Point2::new(1.0, 0.0),
        wall: WallKind::Dirichlet,
        profile: ChannelProfile::Uniform,
    };
    let lo = Point2::new(0.0, -0.5);
    let chains = vec![
        TaggedChain { points: vec![lo, lo], wall: WallKind::Dirichlet },
        TaggedChain { points: vec![lo, lo], wall: WallKind::Dirichlet },
    ];
    let err = build_geometry(vec![a, b], JunctionSpec { chains, holes: vec![], r0: 0.5 })
        .unwrap_err();
    assert!(matches!(err, GeometryError::OverlappingChannels(0, 1)));
}

#[test]
fn truncate_strip() {
    let g = strip_geometry(1.0, 0.5);
    let dom = truncate(&g, 3.0).unwrap();
    assert_eq!(dom.cuts.len(), 2);
    for c in &dom.cuts {
        assert!((c.length - 1.0).abs() < 1e-12);
    }
    let xs: Vec<f64> = dom.outer.iter().flat_map(|s| [s.a.x, s.b.x]).collect();
    let len = xs.iter().fold(f64::MIN, |a, &b| a.max(b)) - xs.iter().fold(f64::MAX, |a, &b| a.min(b));
    assert!((len - 6.0).abs() < 1e-12);
}

#[test]
fn truncate_three_channel() {
    let g = three_channel_disk(1.0, 3.0, 0.01).unwrap();
    let dom = truncate(&g, 6.0).unwrap();
    assert_eq!(dom.cuts.len(), 3);
    for c in &dom.cuts {
        assert!((c.length - 1.0).abs() < 1e-12);
        assert!((c.a.dist(c.b) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn truncate_rejects_small_r() {
    let g = strip_geometry(1.0, 0.5);
    let err = truncate(&g, 0.5).unwrap_err();
    assert!(matches!(err, GeometryError::RTooSmall { .. }));
}

#[test]
fn mesh_unit_square() {
    let g = strip_geometry(1.0, 0.25);
    let dom = truncate(&g, 0.5).unwrap();
    let mesh = generate_mesh(&dom, 0.1).unwrap();
    assert!(
        mesh.n_triangles() >= 200 && mesh.n_triangles() <= 400,
        "expected 200..400 triangles, got {}",
        mesh.n_triangles()
    );
    mesh.validate().unwrap();
    assert!(mesh.min_angle_deg() > 15.0);
    assert!((mesh.total_area() - 1.0).abs() < 1e-10);
}

#[test]
fn mesh_long_strip_trace_counts() {
    let g = strip_geometry(1.0, 0.5);
    let dom = truncate(&g, 3.0).unwrap();
    let mesh = generate_mesh(&dom, 0.05).unwrap();
    for (j, nodes) in mesh.cut_nodes.iter().enumerate() {
        assert!(nodes.len() >= 20, "trace has {} nodes", nodes.len());
        // ordered by x_perp along the cut direction a -> b
        let cut = &dom.cuts[j];
        let dir = (cut.b - cut.a).normalized();
        for w in nodes.windows(2) {
            let s0 = (mesh.vertices[w[0]] - cut.a).dot(dir);
            let s1 = (mesh.vertices[w[1]] - cut.a).dot(dir);
            assert!(s1 > s0);
        }
    }
}

#[test]
fn mesh_rejects_coarse_h() {
    let g = strip_geometry(1.0, 0.5);
    let dom = truncate(&g, 3.0).unwrap();
    assert!(matches!(generate_mesh(&dom, 1.0), Err(GeometryError::MeshFailure(_))));
}

#[test]
fn refinement_consistency() {
    let g = three_channel_disk(1.0, 3.0, 0.02).unwrap();
    let dom = truncate(&g, 4.0).unwrap();
    let m1 = generate_mesh(&dom, 0.2).unwrap();
    let m2 = generate_mesh(&dom, 0.1).unwrap();
    // fixed polygonal geometry: areas agree to rounding, well below h^2
    assert!((m1.total_area() - m2.total_area()).abs() < 0.2 * 0.2);
    assert!((m1.total_area() - m2.total_area()).abs() < 1e-9);
    let tags = |m: &Mesh| {
        let mut t: Vec<String> = m.boundary_edges.iter().map(|e| format!("{:?}", e.tag)).collect();
        t.sort();
        t.dedup();
        t
    };
    assert_eq!(tags(&m1), tags(&m2));
}

#[test]
fn grating_mesh_congruent_sides() {
    use std::f64::consts::PI;
    let bottom = TaggedChain {
        points: vec![
            Point2::new(-PI, 0.0),
            Point2::new(-1.2, 0.0),
            Point2::new(-1.2, -1.0),
            Point2::new(1.2, -1.0),
            Point2::new(1.2, 0.0),
            Point2::new(PI, 0.0),
        ],
        wall: WallKind::Dirichlet,
    };
    let g = build_grating(GratingSpec { period: 2.0 * PI, alpha: 0.25, bottom }).unwrap();
    let dom = truncate(&g, 2.0).unwrap();
    let mesh = generate_mesh(&dom, 0.25).unwrap();
    assert!(!mesh.qp_pairs.is_empty());
    for &(m, s) in &mesh.qp_pairs {
        let shifted = mesh.vertices[m] + Point2::new(2.0 * PI, 0.0);
        assert!(mesh.vertices[s].dist(shifted) < 1e-12 * 2.0 * PI);
    }
    assert_eq!(mesh.cut_nodes.len(), 1);
}
