//! Mesh generation driver: PSLG construction from a truncated domain,
//! structured seeding of the channel regions, Delaunay refinement, and
//! extraction into the [`Mesh`] value used by the solvers.
//!
//! Channel rectangles are seeded with structured layers aligned with `z`, so
//! the cut traces are uniform mesh lines; the junction region is filled by
//! the refiner.

use std::collections::HashMap;

use super::delaunay::Triangulator;
use super::point::{dist_sq_to_segment, signed_area2, Point2};
use super::{Geometry, GeometryError, Result, Tag, TruncatedDomain};

#[derive(Debug, Clone, Copy)]
pub struct MeshEdge {
    pub a: usize,
    pub b: usize,
    pub tag: Tag,
}

/// Conforming triangulation of a truncated domain with tagged boundary and
/// ordered per-cut trace node lists.
#[derive(Debug, Clone)]
pub struct Mesh {
    pub vertices: Vec<Point2>,
    /// Counter-clockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<MeshEdge>,
    /// Constrained internal edges (electrostatic conductors etc.).
    pub internal_edges: Vec<MeshEdge>,
    /// Per cut: node ids ordered by increasing `x_⊥`.
    pub cut_nodes: Vec<Vec<usize>>,
    /// Quasi-periodic node identification (master, slave), ordered by height.
    pub qp_pairs: Vec<(usize, usize)>,
    pub h: f64,
}

impl Mesh {
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        0.5 * signed_area2(self.vertices[a], self.vertices[b], self.vertices[c])
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    pub fn min_angle_deg(&self) -> f64 {
        let mut worst = f64::INFINITY;
        for tri in &self.triangles {
            let p = [self.vertices[tri[0]], self.vertices[tri[1]], self.vertices[tri[2]]];
            for i in 0..3 {
                let a = p[i];
                let b = p[(i + 1) % 3];
                let c = p[(i + 2) % 3];
                let u = b - a;
                let v = c - a;
                let ang = (u.dot(v) / (u.norm() * v.norm())).clamp(-1.0, 1.0).acos();
                worst = worst.min(ang.to_degrees());
            }
        }
        worst
    }

    /// Structural invariants: conforming edges, positive orientation,
    /// minimum angle, exactly one tag per boundary edge.
    pub fn validate(&self) -> Result<()> {
        let mut edge_use: HashMap<(usize, usize), usize> = HashMap::new();
        let key = |a: usize, b: usize| if a < b { (a, b) } else { (b, a) };
        for (t, tri) in self.triangles.iter().enumerate() {
            if self.triangle_area(t) <= 0.0 {
                return Err(GeometryError::MeshFailure(format!(
                    "triangle {t} is degenerate or negatively oriented"
                )));
            }
            for i in 0..3 {
                *edge_use.entry(key(tri[i], tri[(i + 1) % 3])).or_insert(0) += 1;
            }
        }
        for (e, n) in &edge_use {
            if *n > 2 {
                return Err(GeometryError::MeshFailure(format!(
                    "edge {e:?} is shared by {n} triangles"
                )));
            }
        }
        let mut tagged: HashMap<(usize, usize), usize> = HashMap::new();
        for be in &self.boundary_edges {
            let k = key(be.a, be.b);
            *tagged.entry(k).or_insert(0) += 1;
            match edge_use.get(&k) {
                Some(1) => {}
                other => {
                    return Err(GeometryError::MeshFailure(format!(
                        "boundary edge {k:?} is used by {other:?} triangles"
                    )))
                }
            }
        }
        if tagged.values().any(|&n| n != 1) {
            return Err(GeometryError::MeshFailure(
                "a boundary edge carries more than one tag".into(),
            ));
        }
        for (e, n) in &edge_use {
            if *n == 1 && !tagged.contains_key(e) {
                return Err(GeometryError::MeshFailure(format!(
                    "boundary edge {e:?} carries no tag"
                )));
            }
        }
        let min_angle = self.min_angle_deg();
        if min_angle <= 15.0 {
            return Err(GeometryError::MeshFailure(format!(
                "minimum angle {min_angle:.2}° is below 15°"
            )));
        }
        Ok(())
    }
}

/// Deduplicating point registry for the PSLG.
struct PointBank {
    points: Vec<Point2>,
    map: HashMap<(i64, i64), usize>,
    quantum: f64,
}

impl PointBank {
    fn new(quantum: f64) -> Self {
        PointBank { points: Vec::new(), map: HashMap::new(), quantum }
    }

    fn id(&mut self, p: Point2) -> usize {
        let k = ((p.x / self.quantum).round() as i64, (p.y / self.quantum).round() as i64);
        if let Some(&i) = self.map.get(&k) {
            return i;
        }
        let i = self.points.len();
        self.points.push(p);
        self.map.insert(k, i);
        i
    }
}

struct Pslg {
    points: Vec<Point2>,
    /// (a, b, tag, twin-group); twin-group pairs qp master/slave subsegments.
    segments: Vec<(usize, usize, Tag, i32)>,
    hole_seeds: Vec<Point2>,
    interior: Vec<Point2>,
}

fn subdivide_into(
    bank: &mut PointBank,
    segs: &mut Vec<(usize, usize, Tag, i32)>,
    a: Point2,
    b: Point2,
    pieces: usize,
    tag: Tag,
) -> Vec<usize> {
    let mut ids = Vec::with_capacity(pieces + 1);
    for i in 0..=pieces {
        ids.push(bank.id(a.lerp(b, i as f64 / pieces as f64)));
    }
    for w in ids.windows(2) {
        segs.push((w[0], w[1], tag, -1));
    }
    ids
}

fn build_pslg(domain: &TruncatedDomain, h: f64) -> Pslg {
    let mut bank = PointBank::new(1e-9);
    let mut segments = Vec::new();
    let mut interior: Vec<Point2> = Vec::new();

    // Boundary loop. Cut segments get a fixed uniform subdivision so traces
    // are uniform; everything else is split at ≤ h.
    let mut has_qp = false;
    for seg in &domain.outer {
        let len = seg.a.dist(seg.b);
        let pieces = match seg.tag {
            Tag::Cut(_) => ((len / h).ceil() as usize).max(8),
            _ => ((len / h).ceil() as usize).max(1),
        };
        has_qp |= matches!(seg.tag, Tag::QpMaster | Tag::QpSlave);
        subdivide_into(&mut bank, &mut segments, seg.a, seg.b, pieces, seg.tag);
    }
    // link qp twins by matching heights
    if has_qp {
        let mid_y = |bank: &PointBank, s: &(usize, usize)| {
            0.5 * (bank.points[s.0].y + bank.points[s.1].y)
        };
        let mut mi: Vec<usize> = Vec::new();
        let mut si: Vec<usize> = Vec::new();
        for (i, s) in segments.iter().enumerate() {
            match s.2 {
                Tag::QpMaster => mi.push(i),
                Tag::QpSlave => si.push(i),
                _ => {}
            }
        }
        mi.sort_by(|&a, &b| {
            mid_y(&bank, &(segments[a].0, segments[a].1))
                .partial_cmp(&mid_y(&bank, &(segments[b].0, segments[b].1)))
                .unwrap()
        });
        si.sort_by(|&a, &b| {
            mid_y(&bank, &(segments[a].0, segments[a].1))
                .partial_cmp(&mid_y(&bank, &(segments[b].0, segments[b].1)))
                .unwrap()
        });
        for (m, s) in mi.iter().zip(si.iter()) {
            segments[*m].3 = *s as i32;
            segments[*s].3 = *m as i32;
        }
    }

    let mut hole_seeds = Vec::new();
    for (loop_segs, seed) in &domain.holes {
        for seg in loop_segs {
            let len = seg.a.dist(seg.b);
            let pieces = ((len / h).ceil() as usize).max(1);
            subdivide_into(&mut bank, &mut segments, seg.a, seg.b, pieces, seg.tag);
        }
        hole_seeds.push(*seed);
    }

    // Structured seeding of channel rectangles. Rows at i = 0 may coincide
    // with a neighbour channel's mouth row for degenerate junctions; the
    // point bank deduplicates.
    match &domain.geometry {
        Geometry::Junction(g) => {
            for (j, c) in g.channels.iter().enumerate() {
                let z0 = domain.channel_struct_z[j];
                let w = c.width;
                let m = ((w / h).ceil() as usize).max(8);
                let hx = w / m as f64;
                let nz = (((domain.r - z0) / h).ceil() as usize).max(1);
                let hz = (domain.r - z0) / nz as f64;
                for i in 0..nz {
                    let z = z0 + i as f64 * hz;
                    for k in 1..m {
                        interior.push(c.point_at(z, k as f64 * hx));
                    }
                }
            }
        }
        Geometry::Grating(_) => {
            use std::f64::consts::PI;
            let z0 = domain.channel_struct_z[0];
            let m = ((2.0 * PI / h).ceil() as usize).max(8);
            let hx = 2.0 * PI / m as f64;
            let nz = (((domain.r - z0) / h).ceil() as usize).max(1);
            let hz = (domain.r - z0) / nz as f64;
            for i in 1..nz {
                let z = z0 + i as f64 * hz;
                for k in 1..m {
                    interior.push(Point2::new(-PI + k as f64 * hx, z));
                }
            }
        }
    }

    // Deduplicate interior seeds against boundary nodes and each other; a
    // fresh point lands at id == n_boundary + out.len().
    let n_boundary = bank.points.len();
    let mut interior_out = Vec::new();
    for p in interior {
        let id = bank.id(p);
        if id == n_boundary + interior_out.len() {
            interior_out.push(p);
        }
    }
    bank.points.truncate(n_boundary);

    Pslg { points: bank.points, segments, hole_seeds, interior: interior_out }
}

/// Generate a conforming triangular mesh with target element size `h`.
///
/// Preconditions: `h < min(channel width) / 4`. Fails with `MeshFailure` if
/// the geometry has features the refiner cannot resolve above `h/20`.
pub fn generate_mesh(domain: &TruncatedDomain, h: f64) -> Result<Mesh> {
    if h <= 0.0 || h >= domain.geometry.min_channel_width() / 4.0 {
        return Err(GeometryError::MeshFailure(format!(
            "target size h = {h} must be below min(channel width)/4 = {}",
            domain.geometry.min_channel_width() / 4.0
        )));
    }
    let pslg = build_pslg(domain, h);

    let outer_poly: Vec<Point2> = domain.outer.iter().map(|s| s.a).collect();
    let area_est = super::point::polygon_area(&outer_poly).abs();
    let max_points = ((8.0 * area_est / (h * h)) as usize + pslg.points.len() * 2).max(50_000);

    use std::f64::consts::PI;
    let qp_shift = Point2::new(2.0 * PI, 0.0);
    let mut tr = Triangulator::new(&pslg.points, h / 20.0, max_points, qp_shift);
    let mut vids = Vec::with_capacity(pslg.points.len());
    for p in &pslg.points {
        vids.push(tr.insert_vertex(*p)?);
    }
    for &(a, b, tag, _) in &pslg.segments {
        let _ = tr.add_subseg(vids[a], vids[b], tag, -1);
    }
    // twin links (indices into tr.subsegs match pslg.segments order)
    let base = tr.subsegs.len() - pslg.segments.len();
    for (i, &(_, _, _, twin)) in pslg.segments.iter().enumerate() {
        if twin >= 0 {
            tr.subsegs[base + i].twin = twin + base as i32;
        }
    }
    for p in &pslg.interior {
        tr.insert_vertex(*p)?;
    }
    tr.enforce_conformity()?;
    tr.carve(&pslg.hole_seeds)?;
    tr.refine(0.75 * h * h, 20.0)?;
    tr.assert_conforming()?;

    extract_mesh(&tr, &domain.cuts, h)
}

/// Mesh a closed polygonal domain (no cuts, no quasi-periodic sides), with
/// optional constrained internal curves — used for the electrostatic
/// handling-potential solve.
pub fn generate_closed_mesh(
    boundary: &[super::TaggedSegment],
    holes: &[(Vec<super::TaggedSegment>, Point2)],
    internal: &[(Vec<Point2>, usize)],
    h: f64,
) -> Result<Mesh> {
    if h <= 0.0 {
        return Err(GeometryError::MeshFailure("h must be positive".into()));
    }
    let mut bank = PointBank::new(1e-9);
    let mut segments = Vec::new();
    for seg in boundary {
        let pieces = ((seg.a.dist(seg.b) / h).ceil() as usize).max(1);
        subdivide_into(&mut bank, &mut segments, seg.a, seg.b, pieces, seg.tag);
    }
    let mut hole_seeds = Vec::new();
    for (loop_segs, seed) in holes {
        for seg in loop_segs {
            let pieces = ((seg.a.dist(seg.b) / h).ceil() as usize).max(1);
            subdivide_into(&mut bank, &mut segments, seg.a, seg.b, pieces, seg.tag);
        }
        hole_seeds.push(*seed);
    }
    for (polyline, group) in internal {
        for w in polyline.windows(2) {
            let pieces = ((w[0].dist(w[1]) / h).ceil() as usize).max(1);
            subdivide_into(&mut bank, &mut segments, w[0], w[1], pieces, Tag::InternalWall(*group));
        }
    }

    let outer_poly: Vec<Point2> = boundary.iter().map(|s| s.a).collect();
    let area_est = super::point::polygon_area(&outer_poly).abs();
    let max_points = ((8.0 * area_est / (h * h)) as usize + bank.points.len() * 2).max(50_000);

    let mut tr = Triangulator::new(&bank.points, h / 20.0, max_points, Point2::new(0.0, 0.0));
    let mut vids = Vec::with_capacity(bank.points.len());
    for p in &bank.points {
        vids.push(tr.insert_vertex(*p)?);
    }
    for &(a, b, tag, _) in &segments {
        let _ = tr.add_subseg(vids[a], vids[b], tag, -1);
    }
    tr.enforce_conformity()?;
    tr.carve(&hole_seeds)?;
    tr.refine(0.75 * h * h, 20.0)?;
    tr.assert_conforming()?;
    extract_mesh(&tr, &[], h)
}

fn extract_mesh(tr: &Triangulator, cuts: &[super::CutInfo], h: f64) -> Result<Mesh> {
    let live = tr.live_triangles();
    if live.is_empty() {
        return Err(GeometryError::MeshFailure("empty mesh after carving".into()));
    }
    let mut remap: HashMap<usize, usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut triangles = Vec::with_capacity(live.len());
    for tv in &live {
        let mut tri = [0usize; 3];
        for (i, &v) in tv.iter().enumerate() {
            let id = *remap.entry(v).or_insert_with(|| {
                vertices.push(tr.pts[v]);
                vertices.len() - 1
            });
            tri[i] = id;
        }
        // delaunay fans are ccw already; keep a guard for safety
        if signed_area2(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]) < 0.0 {
            tri.swap(1, 2);
        }
        triangles.push(tri);
    }

    let mut boundary_edges = Vec::new();
    let mut internal_edges = Vec::new();
    for (seg, live_flanks) in tr.boundary_subsegs() {
        let (Some(&a), Some(&b)) = (remap.get(&seg.a), remap.get(&seg.b)) else {
            continue;
        };
        match live_flanks {
            1 => boundary_edges.push(MeshEdge { a, b, tag: seg.tag }),
            2 => internal_edges.push(MeshEdge { a, b, tag: seg.tag }),
            _ => {}
        }
    }

    // ordered cut traces
    let mut cut_nodes: Vec<Vec<usize>> = vec![Vec::new(); cuts.len()];
    for be in &boundary_edges {
        if let Tag::Cut(j) = be.tag {
            for v in [be.a, be.b] {
                if !cut_nodes[j].contains(&v) {
                    cut_nodes[j].push(v);
                }
            }
        }
    }
    for (j, nodes) in cut_nodes.iter_mut().enumerate() {
        let cut = &cuts[j];
        let dir = (cut.b - cut.a).normalized();
        nodes.sort_by(|&p, &q| {
            let sp = (vertices[p] - cut.a).dot(dir);
            let sq = (vertices[q] - cut.a).dot(dir);
            sp.partial_cmp(&sq).unwrap()
        });
        if nodes.len() < 8 {
            return Err(GeometryError::MeshFailure(format!(
                "cut {j} has only {} trace nodes",
                nodes.len()
            )));
        }
        for &v in nodes.iter() {
            if dist_sq_to_segment(vertices[v], cut.a, cut.b) > (1e-10 * cut.length).powi(2) {
                return Err(GeometryError::MeshFailure(format!(
                    "cut {j} trace node strays from the cut segment"
                )));
            }
        }
    }

    // qp master/slave node pairing
    let mut qp_pairs = Vec::new();
    {
        let mut master: Vec<usize> = Vec::new();
        let mut slave: Vec<usize> = Vec::new();
        for be in &boundary_edges {
            match be.tag {
                Tag::QpMaster => {
                    for v in [be.a, be.b] {
                        if !master.contains(&v) {
                            master.push(v);
                        }
                    }
                }
                Tag::QpSlave => {
                    for v in [be.a, be.b] {
                        if !slave.contains(&v) {
                            slave.push(v);
                        }
                    }
                }
                _ => {}
            }
        }
        if master.len() != slave.len() {
            return Err(GeometryError::MeshFailure(format!(
                "quasi-periodic sides have {} vs {} nodes",
                master.len(),
                slave.len()
            )));
        }
        master.sort_by(|&p, &q| vertices[p].y.partial_cmp(&vertices[q].y).unwrap());
        slave.sort_by(|&p, &q| vertices[p].y.partial_cmp(&vertices[q].y).unwrap());
        use std::f64::consts::PI;
        for (&m, &s) in master.iter().zip(slave.iter()) {
            let expect = vertices[m] + Point2::new(2.0 * PI, 0.0);
            if vertices[s].dist(expect) > 1e-12 * 2.0 * PI {
                return Err(GeometryError::MeshFailure(
                    "quasi-periodic sides are not congruent".into(),
                ));
            }
            qp_pairs.push((m, s));
        }
    }

    let mesh = Mesh {
        vertices,
        triangles,
        boundary_edges,
        internal_edges,
        cut_nodes,
        qp_pairs,
        h,
    };
    mesh.validate()?;
    Ok(mesh)
}
