//! Channel-junction domains and quasi-periodic grating strips, their finite
//! truncations at `z_j = R`, and conforming triangular meshes.
//!
//! A junction geometry is a set of semi-infinite straight channels attached
//! to a bounded polygonal junction region. Channels are listed in
//! counter-clockwise order around the junction; the junction boundary is a
//! set of tagged chains, chain `j` connecting channel `j`'s "+" attach point
//! to channel `j+1`'s "−" attach point. Truncating at `R` closes the domain
//! with one cut segment per channel.
//!
//! Local channel coordinates: `z` runs along the axis (outward to infinity,
//! `z = 0` at the axis origin), `x_⊥ ∈ [0, w]` across the channel, with
//! `x_⊥ = w/2 + (p − origin)·perp` and `perp = rot90(axis)`.

pub mod delaunay;
pub mod mesh;
pub mod point;

pub use mesh::{generate_mesh, Mesh, MeshEdge};
pub use point::Point2;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("channels {0} and {1} overlap beyond the junction region")]
    OverlappingChannels(usize, usize),
    #[error("open boundary: {0}")]
    OpenBoundary(String),
    #[error("hole {0} is outside the domain or crosses its boundary")]
    HoleOutsideDomain(usize),
    #[error("truncation R = {r} must exceed R0 = {r0}")]
    RTooSmall { r: f64, r0: f64 },
    #[error("invalid geometry spec: {0}")]
    InvalidSpec(String),
    #[error("mesh generation failed: {0}")]
    MeshFailure(String),
}

pub type Result<T> = std::result::Result<T, GeometryError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WallKind {
    Dirichlet,
    Neumann,
}

/// Boundary tag carried by every mesh boundary edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tag {
    Wall(WallKind),
    Cut(usize),
    QpMaster,
    QpSlave,
    /// Constrained internal curve (electrostatic conductor); the index is a
    /// value group resolved by the caller.
    InternalWall(usize),
}

/// Cross-section profile of a channel. The profile must be constant in `z`
/// beyond the junction (that is what makes the separated modes exact).
#[derive(Debug, Clone)]
pub enum ChannelProfile {
    Uniform,
    /// Potential V(x_⊥) sampled uniformly over `[0, width]`, endpoints
    /// included; evaluated by linear interpolation.
    Potential(Vec<f64>),
}

#[derive(Debug, Clone)]
pub struct ChannelSpec {
    pub id: usize,
    pub width: f64,
    pub origin: Point2,
    /// Unit vector, outward to infinity.
    pub axis: Point2,
    pub wall: WallKind,
    pub profile: ChannelProfile,
}

impl ChannelSpec {
    pub fn perp(&self) -> Point2 {
        self.axis.perp()
    }

    pub fn z_of(&self, p: Point2) -> f64 {
        (p - self.origin).dot(self.axis)
    }

    /// Cross coordinate in `[0, width]` (0 on the "−" side).
    pub fn x_perp_of(&self, p: Point2) -> f64 {
        (p - self.origin).dot(self.perp()) + 0.5 * self.width
    }

    pub fn point_at(&self, z: f64, x_perp: f64) -> Point2 {
        self.origin + self.axis * z + self.perp() * (x_perp - 0.5 * self.width)
    }
}

#[derive(Debug, Clone)]
pub struct TaggedChain {
    pub points: Vec<Point2>,
    pub wall: WallKind,
}

#[derive(Debug, Clone)]
pub struct Hole {
    /// Closed polyline (first vertex not repeated).
    pub polyline: Vec<Point2>,
    pub wall: WallKind,
}

#[derive(Debug, Clone)]
pub struct JunctionSpec {
    /// `chains[j]` connects channel `j`'s "+" attach point to channel
    /// `(j+1) % n`'s "−" attach point, walking counter-clockwise.
    pub chains: Vec<TaggedChain>,
    pub holes: Vec<Hole>,
    /// Radius beyond which the medium is the background and all channel
    /// walls are straight.
    pub r0: f64,
}

#[derive(Debug, Clone)]
pub struct JunctionGeometry {
    pub channels: Vec<ChannelSpec>,
    pub chains: Vec<TaggedChain>,
    pub holes: Vec<Hole>,
    pub r0: f64,
    /// Per channel: z coordinates of the "−" and "+" attach points.
    pub attach_z: Vec<(f64, f64)>,
}

/// One period of a grating, reduced to the strip `y ∈ [−π, π]` (internally
/// the period coordinate is the global `x`, the outward direction the global
/// `y`). The groove boundary chain spans the full period and seals the strip
/// from below, leaving a single radiation channel above the grating.
#[derive(Debug, Clone)]
pub struct GratingSpec {
    pub period: f64,
    /// Quasi-momentum α of the Floquet condition `u(π) = e^{2πiα} u(−π)`.
    pub alpha: f64,
    /// Groove boundary from `y = −π` to `y = +π` in normalized coordinates;
    /// both endpoints must be at the same height.
    pub bottom: TaggedChain,
}

#[derive(Debug, Clone)]
pub struct GratingGeometry {
    pub alpha: f64,
    /// Original period divided by 2π (coordinates are stored normalized).
    pub period_scale: f64,
    pub bottom: TaggedChain,
    pub r0: f64,
}

#[derive(Debug, Clone)]
pub enum Geometry {
    Junction(JunctionGeometry),
    Grating(GratingGeometry),
}

impl Geometry {
    pub fn r0(&self) -> f64 {
        match self {
            Geometry::Junction(g) => g.r0,
            Geometry::Grating(g) => g.r0,
        }
    }

    /// Number of semi-infinite channels (a sealed grating has one).
    pub fn channel_count(&self) -> usize {
        match self {
            Geometry::Junction(g) => g.channels.len(),
            Geometry::Grating(_) => 1,
        }
    }

    pub fn min_channel_width(&self) -> f64 {
        match self {
            Geometry::Junction(g) => g
                .channels
                .iter()
                .map(|c| c.width)
                .fold(f64::INFINITY, f64::min),
            Geometry::Grating(_) => 2.0 * std::f64::consts::PI,
        }
    }
}

const WATERTIGHT_TOL: f64 = 1e-12;

fn close_to(a: Point2, b: Point2, scale: f64) -> bool {
    a.dist(b) <= WATERTIGHT_TOL * (1.0 + scale)
}

/// Validate channel + junction specs and assemble a junction geometry.
///
/// Checks: unit axes, positive widths, watertight chain/channel attachment,
/// simple chains and holes, pairwise non-overlapping channel strips (beyond
/// the junction region), and holes inside the domain.
pub fn build_geometry(
    channels: Vec<ChannelSpec>,
    junction: JunctionSpec,
) -> Result<Geometry> {
    if channels.is_empty() {
        return Err(GeometryError::InvalidSpec("no channels".into()));
    }
    if junction.chains.len() != channels.len() {
        return Err(GeometryError::InvalidSpec(format!(
            "expected {} junction chains, got {}",
            channels.len(),
            junction.chains.len()
        )));
    }
    let scale = channels
        .iter()
        .map(|c| c.origin.norm() + c.width)
        .fold(0.0, f64::max);

    for c in &channels {
        if (c.axis.norm() - 1.0).abs() > 1e-12 {
            return Err(GeometryError::InvalidSpec(format!(
                "channel {}: axis is not a unit vector",
                c.id
            )));
        }
        if c.width <= 0.0 {
            return Err(GeometryError::InvalidSpec(format!(
                "channel {}: width must be positive",
                c.id
            )));
        }
    }

    // Pairwise channel overlap, strips restricted to z beyond the junction
    // region (z ≥ R0; the junction itself may be shared).
    let n = channels.len();
    let strip_len = 100.0 * scale.max(1.0);
    for i in 0..n {
        for j in (i + 1)..n {
            let poly_of = |c: &ChannelSpec| -> Vec<Point2> {
                let z0 = junction.r0.max(0.0);
                vec![
                    c.point_at(z0, 0.0),
                    c.point_at(z0 + strip_len, 0.0),
                    c.point_at(z0 + strip_len, c.width),
                    c.point_at(z0, c.width),
                ]
            };
            let area = point::convex_intersection_area(&poly_of(&channels[i]), &poly_of(&channels[j]));
            if area > 1e-9 * channels[i].width * channels[j].width {
                return Err(GeometryError::OverlappingChannels(
                    channels[i].id,
                    channels[j].id,
                ));
            }
        }
    }

    // Watertight attachment: chain j runs from channel j's "+" wall to
    // channel (j+1)'s "−" wall; the endpoints must sit on those wall lines.
    let mut attach_z = vec![(f64::NAN, f64::NAN); n];
    for (j, chain) in junction.chains.iter().enumerate() {
        if chain.points.len() < 2 {
            return Err(GeometryError::InvalidSpec(format!(
                "junction chain {j} has fewer than 2 points"
            )));
        }
        let start = *chain.points.first().unwrap();
        let end = *chain.points.last().unwrap();
        let cj = &channels[j];
        let ck = &channels[(j + 1) % n];
        let xs = cj.x_perp_of(start);
        if (xs - cj.width).abs() > WATERTIGHT_TOL * (1.0 + scale) {
            return Err(GeometryError::OpenBoundary(format!(
                "chain {j} does not start on channel {}'s + wall (x_perp = {xs})",
                cj.id
            )));
        }
        let xe = ck.x_perp_of(end);
        if xe.abs() > WATERTIGHT_TOL * (1.0 + scale) {
            return Err(GeometryError::OpenBoundary(format!(
                "chain {j} does not end on channel {}'s − wall (x_perp = {xe})",
                ck.id
            )));
        }
        attach_z[j].1 = cj.z_of(start);
        attach_z[(j + 1) % n].0 = ck.z_of(end);
    }
    for (j, (zm, zp)) in attach_z.iter().enumerate() {
        if !zm.is_finite() || !zp.is_finite() {
            return Err(GeometryError::OpenBoundary(format!(
                "channel {j} has a dangling wall"
            )));
        }
        if zm.max(*zp) > junction.r0 + WATERTIGHT_TOL * (1.0 + scale) {
            return Err(GeometryError::InvalidSpec(format!(
                "channel {j} attaches at z = {} beyond R0 = {}",
                zm.max(*zp),
                junction.r0
            )));
        }
    }

    for chain in &junction.chains {
        // a 2-point chain with coincident points is an empty chain (the two
        // channel mouths touch), which is legal
        if chain.points.len() == 2 && close_to(chain.points[0], chain.points[1], scale) {
            continue;
        }
        for w in chain.points.windows(2) {
            if close_to(w[0], w[1], scale) {
                return Err(GeometryError::InvalidSpec(
                    "junction chain contains a degenerate segment".into(),
                ));
            }
        }
    }
    for (h, hole) in junction.holes.iter().enumerate() {
        if hole.polyline.len() < 3 {
            return Err(GeometryError::InvalidSpec(format!(
                "hole {h} has fewer than 3 vertices"
            )));
        }
        if point::polyline_self_intersects(&hole.polyline) {
            return Err(GeometryError::InvalidSpec(format!(
                "hole {h} is self-intersecting"
            )));
        }
    }

    let geometry = JunctionGeometry {
        channels,
        chains: junction.chains,
        holes: junction.holes,
        r0: junction.r0,
        attach_z,
    };

    // Validate the holes against a probe truncation: every hole vertex must
    // be inside the domain polygon and no hole edge may cross the boundary.
    let probe_r = geometry.r0 + geometry.channels.iter().map(|c| c.width).fold(0.0, f64::max);
    let domain = truncate_junction(&geometry, probe_r)?;
    let outer_poly: Vec<Point2> = domain.outer.iter().map(|s| s.a).collect();
    for (h, hole) in geometry.holes.iter().enumerate() {
        for p in &hole.polyline {
            if !point::point_in_polygon(*p, &outer_poly) {
                return Err(GeometryError::HoleOutsideDomain(h));
            }
        }
        let m = hole.polyline.len();
        for i in 0..m {
            let (a, b) = (hole.polyline[i], hole.polyline[(i + 1) % m]);
            for seg in &domain.outer {
                if point::segments_intersect(a, b, seg.a, seg.b) {
                    return Err(GeometryError::HoleOutsideDomain(h));
                }
            }
        }
    }

    Ok(Geometry::Junction(geometry))
}

/// Validate a grating spec and normalize the period to 2π.
pub fn build_grating(spec: GratingSpec) -> Result<Geometry> {
    use std::f64::consts::PI;
    if spec.period <= 0.0 {
        return Err(GeometryError::InvalidSpec("period must be positive".into()));
    }
    let s = 2.0 * PI / spec.period;
    let pts: Vec<Point2> = spec.bottom.points.iter().map(|p| *p * s).collect();
    if pts.len() < 2 {
        return Err(GeometryError::InvalidSpec("groove chain too short".into()));
    }
    let a = *pts.first().unwrap();
    let b = *pts.last().unwrap();
    if (a.x + PI).abs() > 1e-9 || (b.x - PI).abs() > 1e-9 {
        return Err(GeometryError::OpenBoundary(
            "groove chain must span the full period from y=−π to y=+π".into(),
        ));
    }
    if (a.y - b.y).abs() > WATERTIGHT_TOL * (1.0 + a.y.abs()) {
        return Err(GeometryError::InvalidSpec(
            "groove chain endpoints must be at equal height".into(),
        ));
    }
    for p in &pts {
        if p.x < -PI - 1e-9 || p.x > PI + 1e-9 {
            return Err(GeometryError::InvalidSpec(
                "groove geometry leaves the period strip".into(),
            ));
        }
    }
    let top = pts.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max);
    Ok(Geometry::Grating(GratingGeometry {
        alpha: spec.alpha,
        period_scale: 1.0 / s,
        bottom: TaggedChain { points: pts, wall: spec.bottom.wall },
        r0: top,
    }))
}

#[derive(Debug, Clone)]
pub struct TaggedSegment {
    pub a: Point2,
    pub b: Point2,
    pub tag: Tag,
}

#[derive(Debug, Clone)]
pub struct CutInfo {
    pub channel: usize,
    /// Endpoint at `x_⊥ = 0`.
    pub a: Point2,
    /// Endpoint at `x_⊥ = width`.
    pub b: Point2,
    pub length: f64,
}

/// Finite polygonal truncation of a geometry at `z_j = R`.
#[derive(Debug, Clone)]
pub struct TruncatedDomain {
    pub geometry: Geometry,
    pub r: f64,
    /// Closed ccw outer loop.
    pub outer: Vec<TaggedSegment>,
    /// Hole loops with an interior seed point each.
    pub holes: Vec<(Vec<TaggedSegment>, Point2)>,
    pub cuts: Vec<CutInfo>,
    /// Structured-meshing hints: per channel, the z where the straight
    /// channel part begins.
    pub channel_struct_z: Vec<f64>,
}

impl TruncatedDomain {
    pub fn r0(&self) -> f64 {
        self.geometry.r0()
    }

    pub fn is_grating(&self) -> bool {
        matches!(self.geometry, Geometry::Grating(_))
    }

    pub fn qp_alpha(&self) -> Option<f64> {
        match &self.geometry {
            Geometry::Grating(g) => Some(g.alpha),
            Geometry::Junction(_) => None,
        }
    }
}

/// Truncate all channels at `z_j = R`, producing a finite tagged polygon.
pub fn truncate(geometry: &Geometry, r: f64) -> Result<TruncatedDomain> {
    if r <= geometry.r0() {
        return Err(GeometryError::RTooSmall { r, r0: geometry.r0() });
    }
    match geometry {
        Geometry::Junction(g) => truncate_junction(g, r),
        Geometry::Grating(g) => truncate_grating(g, r),
    }
}

fn truncate_junction(g: &JunctionGeometry, r: f64) -> Result<TruncatedDomain> {
    let n = g.channels.len();
    let mut outer = Vec::new();
    let mut cuts = Vec::new();
    for j in 0..n {
        let c = &g.channels[j];
        let (z_m, z_p) = g.attach_z[j];
        if r <= z_m.max(z_p) {
            return Err(GeometryError::RTooSmall { r, r0: z_m.max(z_p) });
        }
        let cut_a = c.point_at(r, 0.0);
        let cut_b = c.point_at(r, c.width);
        // ccw: cut (− side to + side), then the + wall back to the junction.
        outer.push(TaggedSegment { a: cut_a, b: cut_b, tag: Tag::Cut(j) });
        let attach_p = c.point_at(z_p, c.width);
        if cut_b.dist(attach_p) > 1e-14 {
            outer.push(TaggedSegment { a: cut_b, b: attach_p, tag: Tag::Wall(c.wall) });
        }
        let chain = &g.chains[j];
        for w in chain.points.windows(2) {
            if w[0].dist(w[1]) < 1e-14 {
                continue;
            }
            outer.push(TaggedSegment { a: w[0], b: w[1], tag: Tag::Wall(chain.wall) });
        }
        let k = (j + 1) % n;
        let ck = &g.channels[k];
        let attach_m = ck.point_at(g.attach_z[k].0, 0.0);
        let cut_ka = ck.point_at(r, 0.0);
        if attach_m.dist(cut_ka) > 1e-14 {
            outer.push(TaggedSegment { a: attach_m, b: cut_ka, tag: Tag::Wall(ck.wall) });
        }
        cuts.push(CutInfo { channel: j, a: cut_a, b: cut_b, length: cut_a.dist(cut_b) });
    }

    let holes = g
        .holes
        .iter()
        .map(|h| {
            let m = h.polyline.len();
            let loop_segs: Vec<TaggedSegment> = (0..m)
                .map(|i| TaggedSegment {
                    a: h.polyline[i],
                    b: h.polyline[(i + 1) % m],
                    tag: Tag::Wall(h.wall),
                })
                .collect();
            let seed = polygon_interior_point(&h.polyline);
            (loop_segs, seed)
        })
        .collect();

    let channel_struct_z = g.attach_z.iter().map(|(a, b)| a.max(*b)).collect();

    Ok(TruncatedDomain {
        geometry: Geometry::Junction(g.clone()),
        r,
        outer,
        holes,
        cuts,
        channel_struct_z,
    })
}

fn truncate_grating(g: &GratingGeometry, r: f64) -> Result<TruncatedDomain> {
    use std::f64::consts::PI;
    let z_edge = g.bottom.points.first().unwrap().y;
    let mut outer = Vec::new();
    // ccw: groove chain left→right, slave side up, cut right→left, master
    // side down.
    for w in g.bottom.points.windows(2) {
        outer.push(TaggedSegment { a: w[0], b: w[1], tag: Tag::Wall(g.bottom.wall) });
    }
    let br = Point2::new(PI, z_edge);
    let tr = Point2::new(PI, r);
    let tl = Point2::new(-PI, r);
    let bl = Point2::new(-PI, z_edge);
    outer.push(TaggedSegment { a: br, b: tr, tag: Tag::QpSlave });
    outer.push(TaggedSegment { a: tr, b: tl, tag: Tag::Cut(0) });
    outer.push(TaggedSegment { a: tl, b: bl, tag: Tag::QpMaster });
    let cuts = vec![CutInfo { channel: 0, a: tl, b: tr, length: 2.0 * PI }];
    Ok(TruncatedDomain {
        geometry: Geometry::Grating(g.clone()),
        r,
        outer,
        holes: Vec::new(),
        cuts,
        channel_struct_z: vec![z_edge],
    })
}

/// A point strictly inside a simple polygon: centroid if that is interior,
/// otherwise a midpoint probe along a diagonal of the widest ear.
fn polygon_interior_point(poly: &[Point2]) -> Point2 {
    let n = poly.len();
    let mut cx = 0.0;
    let mut cy = 0.0;
    for p in poly {
        cx += p.x;
        cy += p.y;
    }
    let centroid = Point2::new(cx / n as f64, cy / n as f64);
    if point::point_in_polygon(centroid, poly) {
        return centroid;
    }
    // probe midpoints between each vertex and the centroid of its neighbours
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let c = poly[(i + 2) % n];
        let m = (a + c) * 0.5;
        let probe = b.mid(m);
        if point::point_in_polygon(probe, poly) {
            return probe;
        }
    }
    centroid
}

#[cfg(test)]
mod tests;
