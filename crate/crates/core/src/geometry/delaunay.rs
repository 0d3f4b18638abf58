//! Incremental constrained Delaunay triangulation with Ruppert-style
//! refinement (encroached-segment splitting + circumcenter insertion under
//! angle/area bounds).
//!
//! The triangulation is maintained by Bowyer–Watson insertion with exact
//! orientation/in-circle predicates. Cavities never cross constrained edges
//! (except the one edge being split), so constrained edges survive every
//! insertion. Quasi-periodic twin segments are split in lock-step so the
//! master/slave boundaries stay congruent.

use std::collections::HashMap;

use super::point::{incircle, orient2d, signed_area2, Point2};
use super::{GeometryError, Result, Tag};

const NONE: i32 = -1;

#[derive(Debug, Clone)]
struct Tri {
    v: [usize; 3],
    /// Neighbor across the edge opposite vertex `i`, i.e. the edge
    /// `(v[i+1], v[i+2])`.
    nb: [i32; 3],
    alive: bool,
}

#[derive(Debug, Clone)]
pub struct SubSeg {
    pub a: usize,
    pub b: usize,
    pub tag: Tag,
    pub twin: i32,
    pub alive: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Unset,
    Live,
    Dead,
}

pub struct Triangulator {
    pub pts: Vec<Point2>,
    tris: Vec<Tri>,
    region: Vec<Region>,
    /// Sorted vertex pair -> (triangle, side) for one incident triangle.
    edge_map: HashMap<(usize, usize), (usize, usize)>,
    pub subsegs: Vec<SubSeg>,
    subseg_map: HashMap<(usize, usize), usize>,
    hint: usize,
    h_min: f64,
    max_points: usize,
    /// Translation that maps the qp master boundary onto the slave boundary.
    qp_shift: Point2,
    carved: bool,
}

fn key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

enum Insert {
    Done(usize),
    Duplicate(usize),
    /// Insertion would have removed a constrained edge.
    Blocked(usize),
}

impl Triangulator {
    pub fn new(points: &[Point2], h_min: f64, max_points: usize, qp_shift: Point2) -> Self {
        // Bounding super-triangle, far enough that its circumcircles do not
        // interfere with interior Delaunay decisions in any meaningful way.
        let (mut lo, mut hi) = (Point2::new(f64::MAX, f64::MAX), Point2::new(f64::MIN, f64::MIN));
        for p in points {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        let c = lo.mid(hi);
        let l = 64.0 * ((hi - lo).norm() + 1.0);
        let sv = [
            Point2::new(c.x - 2.0 * l, c.y - l),
            Point2::new(c.x + 2.0 * l, c.y - l),
            Point2::new(c.x, c.y + 2.0 * l),
        ];
        let mut t = Triangulator {
            pts: sv.to_vec(),
            tris: vec![Tri { v: [0, 1, 2], nb: [NONE; 3], alive: true }],
            region: vec![Region::Unset],
            edge_map: HashMap::new(),
            subsegs: Vec::new(),
            subseg_map: HashMap::new(),
            hint: 0,
            h_min,
            max_points,
            qp_shift,
            carved: false,
        };
        for (i, s) in [(1usize, 2usize), (2, 0), (0, 1)].iter().enumerate() {
            let _ = s;
            t.edge_map.insert(key(t.tris[0].v[(i + 1) % 3], t.tris[0].v[(i + 2) % 3]), (0, i));
        }
        t
    }

    pub fn insert_vertex(&mut self, p: Point2) -> Result<usize> {
        match self.insert(p, NONE)? {
            Insert::Done(v) | Insert::Duplicate(v) => Ok(v),
            Insert::Blocked(_) => Err(GeometryError::MeshFailure(
                "vertex insertion blocked by a constrained edge".into(),
            )),
        }
    }

    pub fn add_subseg(&mut self, a: usize, b: usize, tag: Tag, twin: i32) -> usize {
        let id = self.subsegs.len();
        self.subsegs.push(SubSeg { a, b, tag, twin, alive: true });
        self.subseg_map.insert(key(a, b), id);
        id
    }

    fn tri_contains(&self, t: usize, p: Point2) -> bool {
        let v = &self.tris[t].v;
        (0..3).all(|i| orient2d(self.pts[v[i]], self.pts[v[(i + 1) % 3]], p) >= 0.0)
    }

    /// Visibility walk from the hint triangle.
    fn locate(&self, p: Point2) -> Option<usize> {
        let mut t = if self.tris[self.hint].alive { self.hint } else { 0 };
        if !self.tris[t].alive {
            t = (0..self.tris.len()).find(|&i| self.tris[i].alive)?;
        }
        let mut steps = 0usize;
        let max_steps = 4 * self.tris.len() + 64;
        loop {
            steps += 1;
            if steps > max_steps {
                // fall back to exhaustive scan (robust against walk cycles)
                return (0..self.tris.len())
                    .find(|&i| self.tris[i].alive && self.tri_contains(i, p));
            }
            let v = self.tris[t].v;
            let mut moved = false;
            for i in 0..3 {
                let a = self.pts[v[(i + 1) % 3]];
                let b = self.pts[v[(i + 2) % 3]];
                if orient2d(a, b, p) < 0.0 {
                    let nb = self.tris[t].nb[i];
                    if nb == NONE {
                        return None;
                    }
                    t = nb as usize;
                    moved = true;
                    break;
                }
            }
            if !moved {
                return Some(t);
            }
        }
    }

    /// Bowyer–Watson insertion. The cavity never crosses constrained edges,
    /// except `exempt` (the subsegment currently being split).
    fn insert(&mut self, p: Point2, exempt: i32) -> Result<Insert> {
        if self.pts.len() >= self.max_points {
            return Err(GeometryError::MeshFailure(format!(
                "refinement exceeded the point budget ({})",
                self.max_points
            )));
        }
        let t0 = self.locate(p).ok_or_else(|| {
            GeometryError::MeshFailure("point location left the triangulation".into())
        })?;

        // duplicate guard
        for &vi in &self.tris[t0].v {
            if self.pts[vi].dist(p) < 1e-12 * (1.0 + self.pts[vi].norm()) {
                return Ok(Insert::Duplicate(vi));
            }
        }

        // cavity BFS over triangles whose circumcircle strictly contains p
        let mut cavity = vec![t0];
        let mut in_cavity = HashMap::new();
        in_cavity.insert(t0, true);
        let mut queue = vec![t0];
        let mut blocked: Option<usize> = None;
        while let Some(t) = queue.pop() {
            for i in 0..3 {
                let nb = self.tris[t].nb[i];
                if nb == NONE {
                    continue;
                }
                let nb = nb as usize;
                if in_cavity.contains_key(&nb) {
                    continue;
                }
                let e = key(self.tris[t].v[(i + 1) % 3], self.tris[t].v[(i + 2) % 3]);
                let constrained = match self.subseg_map.get(&e) {
                    Some(&sid) => sid as i32 != exempt,
                    None => false,
                };
                if constrained {
                    continue;
                }
                let v = self.tris[nb].v;
                if incircle(self.pts[v[0]], self.pts[v[1]], self.pts[v[2]], p) > 0.0 {
                    in_cavity.insert(nb, true);
                    cavity.push(nb);
                    queue.push(nb);
                }
            }
        }

        // boundary ring of the cavity; reject if a constrained edge would be
        // removed (both flanks inside the cavity)
        let mut ring: Vec<(usize, usize, i32)> = Vec::new(); // (ea, eb, outer tri)
        for &t in &cavity {
            for i in 0..3 {
                let nb = self.tris[t].nb[i];
                let inside = nb != NONE && in_cavity.contains_key(&(nb as usize));
                let ea = self.tris[t].v[(i + 1) % 3];
                let eb = self.tris[t].v[(i + 2) % 3];
                if inside {
                    if let Some(&sid) = self.subseg_map.get(&key(ea, eb)) {
                        if sid as i32 != exempt {
                            blocked = Some(sid);
                        }
                    }
                } else {
                    ring.push((ea, eb, nb));
                }
            }
        }
        if let Some(sid) = blocked {
            return Ok(Insert::Blocked(sid));
        }

        // commit: new vertex + fan
        let vid = self.pts.len();
        self.pts.push(p);
        for &t in &cavity {
            for i in 0..3 {
                self.edge_map
                    .remove(&key(self.tris[t].v[(i + 1) % 3], self.tris[t].v[(i + 2) % 3]));
            }
        }
        let mut new_ids = Vec::with_capacity(ring.len());
        let mut by_first: HashMap<usize, usize> = HashMap::new(); // ea -> new tri
        let mut by_second: HashMap<usize, usize> = HashMap::new(); // eb -> new tri
        for &(ea, eb, _) in &ring {
            let id = self.tris.len();
            self.tris.push(Tri { v: [ea, eb, vid], nb: [NONE; 3], alive: true });
            self.region.push(Region::Unset);
            by_first.insert(ea, id);
            by_second.insert(eb, id);
            new_ids.push(id);
        }
        for (k2, &(ea, eb, outer)) in ring.iter().enumerate() {
            let id = new_ids[k2];
            // edge 2 of (ea, eb, vid) is (ea, eb): outer neighbor
            self.tris[id].nb[2] = outer;
            if outer != NONE {
                let o = outer as usize;
                for i in 0..3 {
                    let oa = self.tris[o].v[(i + 1) % 3];
                    let ob = self.tris[o].v[(i + 2) % 3];
                    if key(oa, ob) == key(ea, eb) {
                        self.tris[o].nb[i] = id as i32;
                    }
                }
            }
            // edge 0 is (eb, vid): neighbor = fan triangle starting at eb;
            // edge 1 is (vid, ea): neighbor = fan triangle ending at ea
            if let Some(&t2) = by_first.get(&eb) {
                self.tris[id].nb[0] = t2 as i32;
            }
            if let Some(&t2) = by_second.get(&ea) {
                self.tris[id].nb[1] = t2 as i32;
            }
        }
        for &id in &new_ids {
            for i in 0..3 {
                self.edge_map
                    .insert(key(self.tris[id].v[(i + 1) % 3], self.tris[id].v[(i + 2) % 3]), (id, i));
            }
        }

        // region inheritance by centroid containment in the removed cover
        if self.carved {
            for &id in &new_ids {
                let v = self.tris[id].v;
                let cen = Point2::new(
                    (self.pts[v[0]].x + self.pts[v[1]].x + self.pts[v[2]].x) / 3.0,
                    (self.pts[v[0]].y + self.pts[v[1]].y + self.pts[v[2]].y) / 3.0,
                );
                let mut best = Region::Unset;
                let mut best_q = f64::NEG_INFINITY;
                for &t in &cavity {
                    let tv = self.tris[t].v;
                    let q = (0..3)
                        .map(|i| signed_area2(self.pts[tv[i]], self.pts[tv[(i + 1) % 3]], cen))
                        .fold(f64::INFINITY, f64::min);
                    if q > best_q {
                        best_q = q;
                        best = self.region[t];
                    }
                }
                self.region[id] = best;
            }
        }

        for &t in &cavity {
            self.tris[t].alive = false;
        }
        if let Some(&id) = new_ids.first() {
            self.hint = id;
        }
        Ok(Insert::Done(vid))
    }

    /// Split subsegment `sid` at its midpoint (and its qp twin, if any).
    /// Returns the ids of the two children of `sid`.
    fn split_subseg(&mut self, sid: usize) -> Result<[usize; 2]> {
        let seg = self.subsegs[sid].clone();
        let (pa, pb) = (self.pts[seg.a], self.pts[seg.b]);
        if pa.dist(pb) < 2.0 * self.h_min {
            return Err(GeometryError::MeshFailure(format!(
                "refinement requires splitting a boundary feature below {:.3e}; \
                 the geometry has a feature smaller than the mesh can resolve",
                self.h_min
            )));
        }
        let mid = pa.mid(pb);
        let vid = loop {
            match self.insert(mid, sid as i32)? {
                Insert::Done(v) => break v,
                Insert::Duplicate(v) => break v,
                Insert::Blocked(other) => {
                    // a nearby constrained edge is in the way; split it first
                    self.split_subseg(other)?;
                }
            }
        };
        self.subsegs[sid].alive = false;
        self.subseg_map.remove(&key(seg.a, seg.b));
        let c1 = self.add_subseg(seg.a, vid, seg.tag, NONE);
        let c2 = self.add_subseg(vid, seg.b, seg.tag, NONE);

        if seg.twin != NONE {
            let tid = seg.twin as usize;
            let tseg = self.subsegs[tid].clone();
            // direction of the shift from this side to the twin side
            let shift = if (self.pts[tseg.a].x + self.pts[tseg.b].x)
                > (pa.x + pb.x)
            {
                self.qp_shift
            } else {
                -self.qp_shift
            };
            let tmid = mid + shift;
            let tvid = loop {
                match self.insert(tmid, tid as i32)? {
                    Insert::Done(v) => break v,
                    Insert::Duplicate(v) => break v,
                    Insert::Blocked(other) => {
                        self.split_subseg(other)?;
                    }
                }
            };
            self.subsegs[tid].alive = false;
            self.subseg_map.remove(&key(tseg.a, tseg.b));
            // match children by translated midpoints
            let t1 = self.add_subseg(tseg.a, tvid, tseg.tag, NONE);
            let t2 = self.add_subseg(tvid, tseg.b, tseg.tag, NONE);
            let pair = |s: &mut Triangulator, x: usize, y: usize| {
                s.subsegs[x].twin = y as i32;
                s.subsegs[y].twin = x as i32;
            };
            let m1 = self.pts[self.subsegs[c1].a].mid(self.pts[self.subsegs[c1].b]);
            let n1 = self.pts[self.subsegs[t1].a].mid(self.pts[self.subsegs[t1].b]);
            if m1.dist(n1 - shift) < m1.dist(self.pts[self.subsegs[t2].a].mid(self.pts[self.subsegs[t2].b]) - shift) {
                pair(self, c1, t1);
                pair(self, c2, t2);
            } else {
                pair(self, c1, t2);
                pair(self, c2, t1);
            }
        }
        Ok([c1, c2])
    }

    fn subseg_edge_present(&self, sid: usize) -> bool {
        let s = &self.subsegs[sid];
        self.edge_map.contains_key(&key(s.a, s.b))
    }

    /// Apex-based encroachment test (valid in a CDT).
    fn subseg_encroached(&self, sid: usize) -> bool {
        let s = &self.subsegs[sid];
        let e = key(s.a, s.b);
        let Some(&(t, side)) = self.edge_map.get(&e) else {
            return false;
        };
        let (pa, pb) = (self.pts[s.a], self.pts[s.b]);
        let len2 = (pb - pa).norm_sq();
        let check = |v: usize| -> bool {
            let p = self.pts[v];
            (pa - p).dot(pb - p) < -1e-12 * len2
        };
        if check(self.tris[t].v[side]) {
            return true;
        }
        let nb = self.tris[t].nb[side];
        if nb != NONE {
            let o = nb as usize;
            for i in 0..3 {
                let oa = self.tris[o].v[(i + 1) % 3];
                let ob = self.tris[o].v[(i + 2) % 3];
                if key(oa, ob) == e && check(self.tris[o].v[i]) {
                    return true;
                }
            }
        }
        false
    }

    /// Split missing/encroached subsegments until the triangulation conforms.
    pub fn enforce_conformity(&mut self) -> Result<()> {
        loop {
            let mut dirty = false;
            let ids: Vec<usize> =
                (0..self.subsegs.len()).filter(|&i| self.subsegs[i].alive).collect();
            for sid in ids {
                if !self.subsegs[sid].alive {
                    continue;
                }
                if !self.subseg_edge_present(sid) || self.subseg_encroached(sid) {
                    self.split_subseg(sid)?;
                    dirty = true;
                }
            }
            if !dirty {
                return Ok(());
            }
        }
    }

    /// Classify triangles into exterior/hole (dead) and interior (live) by
    /// flood fill across unconstrained edges.
    pub fn carve(&mut self, hole_seeds: &[Point2]) -> Result<()> {
        for r in self.region.iter_mut() {
            *r = Region::Unset;
        }
        let mut queue: Vec<usize> = Vec::new();
        for (i, t) in self.tris.iter().enumerate() {
            if t.alive && t.v.iter().any(|&v| v < 3) {
                queue.push(i);
            }
        }
        for seed in hole_seeds {
            let t = self.locate(*seed).ok_or_else(|| {
                GeometryError::MeshFailure("hole seed outside the triangulation".into())
            })?;
            queue.push(t);
        }
        while let Some(t) = queue.pop() {
            if self.region[t] == Region::Dead || !self.tris[t].alive {
                continue;
            }
            self.region[t] = Region::Dead;
            for i in 0..3 {
                let nb = self.tris[t].nb[i];
                if nb == NONE {
                    continue;
                }
                let e = key(self.tris[t].v[(i + 1) % 3], self.tris[t].v[(i + 2) % 3]);
                if self.subseg_map.contains_key(&e) {
                    continue;
                }
                let nb = nb as usize;
                if self.tris[nb].alive && self.region[nb] == Region::Unset {
                    queue.push(nb);
                }
            }
        }
        for i in 0..self.tris.len() {
            if self.tris[i].alive && self.region[i] == Region::Unset {
                self.region[i] = Region::Live;
            }
        }
        self.carved = true;
        Ok(())
    }

    fn circumcenter(&self, t: usize) -> Point2 {
        let v = self.tris[t].v;
        let (a, b, c) = (self.pts[v[0]], self.pts[v[1]], self.pts[v[2]]);
        let d = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
        let ux = (a.norm_sq() * (b.y - c.y) + b.norm_sq() * (c.y - a.y) + c.norm_sq() * (a.y - b.y)) / d;
        let uy = (a.norm_sq() * (c.x - b.x) + b.norm_sq() * (a.x - c.x) + c.norm_sq() * (b.x - a.x)) / d;
        Point2::new(ux, uy)
    }

    fn tri_quality(&self, t: usize) -> (f64, f64) {
        let v = self.tris[t].v;
        let (a, b, c) = (self.pts[v[0]], self.pts[v[1]], self.pts[v[2]]);
        let area = 0.5 * signed_area2(a, b, c);
        let la = b.dist(c);
        let lb = c.dist(a);
        let lc = a.dist(b);
        let lmin = la.min(lb).min(lc);
        // circumradius R = abc / (4 * area); ratio = R / shortest edge
        let r = la * lb * lc / (4.0 * area.abs().max(1e-300));
        (area, r / lmin)
    }

    /// Ruppert quality refinement over the live region.
    pub fn refine(&mut self, max_area: f64, min_angle_deg: f64) -> Result<()> {
        let ratio_bound = 0.5 / (min_angle_deg.to_radians()).sin();
        let mut queue: Vec<usize> =
            (0..self.tris.len()).filter(|&t| self.tris[t].alive && self.region[t] == Region::Live).collect();
        let mut deferred: HashMap<usize, u32> = HashMap::new();
        while let Some(t) = queue.pop() {
            if !self.tris[t].alive || self.region[t] != Region::Live {
                continue;
            }
            let (area, ratio) = self.tri_quality(t);
            let too_small_to_care = {
                let v = self.tris[t].v;
                let lmax = self.pts[v[0]]
                    .dist(self.pts[v[1]])
                    .max(self.pts[v[1]].dist(self.pts[v[2]]))
                    .max(self.pts[v[2]].dist(self.pts[v[0]]));
                lmax < 4.0 * self.h_min
            };
            if area <= max_area && (ratio <= ratio_bound || too_small_to_care) {
                continue;
            }
            let c = self.circumcenter(t);
            if !c.x.is_finite() || !c.y.is_finite() {
                continue;
            }
            // If the circumcenter escapes the live region, the blocking
            // constrained edge is encroached; split it instead.
            let loc = self.locate(c);
            let target_live = matches!(loc, Some(lt) if self.region[lt] == Region::Live);
            if !target_live {
                if !self.split_some_edge_encroached_by(t, c)? {
                    let n = deferred.entry(t).or_insert(0);
                    *n += 1;
                    if *n < 3 {
                        queue.push(t);
                    }
                }
                continue;
            }
            // reject circumcenters that encroach a constrained edge
            let enc = self.subsegs_encroached_by(c);
            if !enc.is_empty() {
                let tri_generation = self.tris.len();
                for sid in enc {
                    if self.subsegs[sid].alive {
                        self.split_subseg(sid)?;
                    }
                }
                for nt in tri_generation..self.tris.len() {
                    if self.tris[nt].alive && self.region[nt] == Region::Live {
                        queue.push(nt);
                    }
                }
                queue.push(t);
                continue;
            }
            let before = self.tris.len();
            match self.insert(c, NONE)? {
                Insert::Done(_) => {}
                Insert::Duplicate(_) => continue,
                Insert::Blocked(sid) => {
                    if self.subsegs[sid].alive {
                        self.split_subseg(sid)?;
                    }
                    queue.push(t);
                    continue;
                }
            }
            for nt in before..self.tris.len() {
                if self.tris[nt].alive && self.region[nt] == Region::Live {
                    queue.push(nt);
                }
            }
        }
        Ok(())
    }

    fn subsegs_encroached_by(&self, p: Point2) -> Vec<usize> {
        // Only segments near p can be encroached; scan is cheap enough at the
        // sizes this mesher is used for, and exact.
        let mut out = Vec::new();
        for (sid, s) in self.subsegs.iter().enumerate() {
            if !s.alive {
                continue;
            }
            let (pa, pb) = (self.pts[s.a], self.pts[s.b]);
            if (pa - p).dot(pb - p) < -1e-12 * (pb - pa).norm_sq() {
                out.push(sid);
            }
        }
        out
    }

    fn split_some_edge_encroached_by(&mut self, t: usize, c: Point2) -> Result<bool> {
        // Prefer a constrained edge of the triangle itself, then any segment
        // encroached by the circumcenter.
        for i in 0..3 {
            let e = key(self.tris[t].v[(i + 1) % 3], self.tris[t].v[(i + 2) % 3]);
            if let Some(&sid) = self.subseg_map.get(&e) {
                if self.subsegs[sid].alive
                    && self.pts[self.subsegs[sid].a].dist(self.pts[self.subsegs[sid].b])
                        >= 2.0 * self.h_min
                {
                    self.split_subseg(sid)?;
                    return Ok(true);
                }
            }
        }
        let enc = self.subsegs_encroached_by(c);
        for sid in enc {
            if self.subsegs[sid].alive
                && self.pts[self.subsegs[sid].a].dist(self.pts[self.subsegs[sid].b])
                    >= 2.0 * self.h_min
            {
                self.split_subseg(sid)?;
                return Ok(true);
            }
        }
        Ok(false)
    }

    pub fn live_triangles(&self) -> Vec<[usize; 3]> {
        (0..self.tris.len())
            .filter(|&t| self.tris[t].alive && self.region[t] == Region::Live)
            .map(|t| self.tris[t].v)
            .collect()
    }

    /// Alive subsegments with the number of live flanking triangles.
    pub fn boundary_subsegs(&self) -> Vec<(SubSeg, usize)> {
        let mut out = Vec::new();
        for s in &self.subsegs {
            if !s.alive {
                continue;
            }
            let e = key(s.a, s.b);
            let mut live = 0;
            if let Some(&(t, side)) = self.edge_map.get(&e) {
                if self.tris[t].alive && self.region[t] == Region::Live {
                    live += 1;
                }
                let nb = self.tris[t].nb[side];
                if nb != NONE {
                    let o = nb as usize;
                    if self.tris[o].alive && self.region[o] == Region::Live {
                        live += 1;
                    }
                }
            }
            out.push((s.clone(), live));
        }
        out
    }

    pub fn assert_conforming(&self) -> Result<()> {
        for (sid, s) in self.subsegs.iter().enumerate() {
            if s.alive && !self.subseg_edge_present(sid) {
                return Err(GeometryError::MeshFailure(
                    "a constrained edge is missing from the final triangulation".into(),
                ));
            }
        }
        Ok(())
    }
}
