//! 3D quickhull with outside-point lists.
//!
//! Facets are triangles with outward normals. Points within `eps` of a facet
//! plane count as on the hull, so coplanar input (a cube face, say) produces
//! coplanar triangles rather than merged polygons.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::math::{abs, centroid, Vec3};

/// Plane and affine-rank tolerance in meters.
pub const DEFAULT_HULL_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HullError {
    #[error("empty input")]
    Empty,
    #[error("non-finite coordinate at point {0}")]
    NonFinite(usize),
}

/// Triangle of a [`ConvexHull3`], indices into `vertices`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Facet {
    pub indices: [usize; 3],
    /// Unit outward normal.
    pub normal: Vec3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexHull3 {
    pub vertices: Vec<Vec3>,
    pub facets: Vec<Facet>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum HullOutcome {
    Solid(ConvexHull3),
    /// Affine rank below 3: 0 = single point, 1 = segment, 2 = planar.
    Degenerate { rank: u8 },
}

impl HullOutcome {
    pub fn solid(&self) -> Option<&ConvexHull3> {
        match self {
            HullOutcome::Solid(h) => Some(h),
            HullOutcome::Degenerate { .. } => None,
        }
    }
}

impl ConvexHull3 {
    pub fn facet_points(&self, k: usize) -> [Vec3; 3] {
        self.facets[k].indices.map(|i| self.vertices[i])
    }

    pub fn facet_area(&self, k: usize) -> f64 {
        let [a, b, c] = self.facet_points(k);
        0.5 * (b - a).cross(c - a).norm()
    }

    pub fn facet_centroid(&self, k: usize) -> Vec3 {
        let [a, b, c] = self.facet_points(k);
        (a + b + c) / 3.0
    }

    /// Mean of the hull vertices, an interior point of a solid hull.
    pub fn interior_point(&self) -> Vec3 {
        centroid(&self.vertices).unwrap_or(Vec3::ZERO)
    }

    /// Pyramid decomposition `1/3 * sum A_k d_k` about the vertex centroid,
    /// where `d_k` is the perpendicular distance from that point to facet k.
    pub fn volume(&self) -> f64 {
        let o = self.interior_point();
        (0..self.facets.len())
            .map(|k| {
                let d = self.facets[k].normal.dot(self.facet_centroid(k) - o);
                self.facet_area(k) * d
            })
            .sum::<f64>()
            / 3.0
    }

    /// Divergence-theorem volume `|1/6 * sum a . (b x c)|` taken about the raw origin.
    pub fn signed_volume_about_origin(&self) -> f64 {
        let s: f64 = (0..self.facets.len())
            .map(|k| {
                let [a, b, c] = self.facet_points(k);
                a.dot(b.cross(c))
            })
            .sum();
        abs(s / 6.0)
    }

    /// Signed distance of `p` above facet `k`'s plane (positive = outside).
    pub fn facet_distance(&self, k: usize, p: Vec3) -> f64 {
        let a = self.vertices[self.facets[k].indices[0]];
        self.facets[k].normal.dot(p - a)
    }

    pub fn contains(&self, p: Vec3, eps: f64) -> bool {
        (0..self.facets.len()).all(|k| self.facet_distance(k, p) <= eps)
    }
}

#[derive(Debug, Clone)]
struct Face {
    v: [usize; 3],
    normal: Vec3,
    offset: f64,
    /// neighbors[i] shares edge (v[i], v[i+1]).
    neighbors: [usize; 3],
    outside: Vec<usize>,
    alive: bool,
}

impl Face {
    fn new(points: &[Vec3], v: [usize; 3]) -> Face {
        let [a, b, c] = v.map(|i| points[i]);
        let normal = (b - a).cross(c - a).normalized().unwrap_or(Vec3::ZERO);
        Face { v, normal, offset: normal.dot(a), neighbors: [usize::MAX; 3], outside: Vec::new(), alive: true }
    }

    fn distance(&self, p: Vec3) -> f64 {
        self.normal.dot(p) - self.offset
    }

    fn edge_slot(&self, a: usize, b: usize) -> Option<usize> {
        (0..3).find(|&i| self.v[i] == a && self.v[(i + 1) % 3] == b)
    }
}

/// Convex hull of a point set, or its affine rank when it is flat.
pub fn convex_hull(points: &[Vec3]) -> Result<HullOutcome, HullError> {
    convex_hull_with_eps(points, DEFAULT_HULL_EPS)
}

pub fn convex_hull_with_eps(points: &[Vec3], eps: f64) -> Result<HullOutcome, HullError> {
    if points.is_empty() {
        return Err(HullError::Empty);
    }
    if let Some(i) = points.iter().position(|p| !p.is_finite()) {
        return Err(HullError::NonFinite(i));
    }

    let simplex = match initial_simplex(points, eps) {
        Ok(s) => s,
        Err(rank) => return Ok(HullOutcome::Degenerate { rank }),
    };

    let mut faces = seed_faces(points, simplex);
    let mut assigned = vec![false; points.len()];
    for &i in &simplex {
        assigned[i] = true;
    }
    let candidates: Vec<usize> = (0..points.len()).filter(|&i| !assigned[i]).collect();
    assign_outside(&mut faces, &[0, 1, 2, 3], &candidates, points, eps);

    let mut stack: Vec<usize> = (0..faces.len()).collect();
    while let Some(fi) = stack.pop() {
        if !faces[fi].alive || faces[fi].outside.is_empty() {
            continue;
        }
        let eye = *faces[fi]
            .outside
            .iter()
            .max_by(|&&a, &&b| {
                faces[fi].distance(points[a]).total_cmp(&faces[fi].distance(points[b]))
            })
            .expect("non-empty");
        let eye_p = points[eye];

        // visible region by flood fill from fi
        let mut visible = vec![fi];
        let mut is_visible = BTreeMap::new();
        is_visible.insert(fi, true);
        let mut k = 0;
        while k < visible.len() {
            let f = visible[k];
            k += 1;
            for &n in &faces[f].neighbors {
                if is_visible.contains_key(&n) {
                    continue;
                }
                let vis = faces[n].distance(eye_p) > eps;
                is_visible.insert(n, vis);
                if vis {
                    visible.push(n);
                }
            }
        }

        // horizon edges (a, b) with the hidden neighbor across them
        let mut horizon = Vec::new();
        for &f in &visible {
            for i in 0..3 {
                let n = faces[f].neighbors[i];
                if !is_visible[&n] {
                    horizon.push((faces[f].v[i], faces[f].v[(i + 1) % 3], n));
                }
            }
        }

        let mut orphans = Vec::new();
        for &f in &visible {
            faces[f].alive = false;
            orphans.extend(faces[f].outside.drain(..).filter(|&p| p != eye));
        }

        let first_new = faces.len();
        let mut by_start = BTreeMap::new();
        let mut by_end = BTreeMap::new();
        for &(a, b, hidden) in &horizon {
            let id = faces.len();
            let mut face = Face::new(points, [a, b, eye]);
            face.neighbors[0] = hidden;
            if let Some(slot) = faces[hidden].edge_slot(b, a) {
                faces[hidden].neighbors[slot] = id;
            }
            faces.push(face);
            by_start.insert(a, id);
            by_end.insert(b, id);
        }
        for id in first_new..faces.len() {
            let [a, b, _] = faces[id].v;
            // edge (b, eye) borders the new face starting at b; edge (eye, a) the one ending at a
            faces[id].neighbors[1] = by_start.get(&b).copied().unwrap_or(usize::MAX);
            faces[id].neighbors[2] = by_end.get(&a).copied().unwrap_or(usize::MAX);
        }
        let new_ids: Vec<usize> = (first_new..faces.len()).collect();
        assign_outside(&mut faces, &new_ids, &orphans, points, eps);
        stack.extend(new_ids);
    }

    Ok(HullOutcome::Solid(compact(points, &faces)))
}

fn assign_outside(faces: &mut [Face], ids: &[usize], candidates: &[usize], points: &[Vec3], eps: f64) {
    for &p in candidates {
        let mut best = None;
        let mut best_d = eps;
        for &f in ids {
            let d = faces[f].distance(points[p]);
            if d > best_d {
                best_d = d;
                best = Some(f);
            }
        }
        if let Some(f) = best {
            faces[f].outside.push(p);
        }
    }
}

/// Picks four affinely independent extreme points, or returns the affine rank.
fn initial_simplex(points: &[Vec3], eps: f64) -> Result<[usize; 4], u8> {
    let mut extremes = [0usize; 6];
    for (i, p) in points.iter().enumerate() {
        for axis in 0..3 {
            if p[axis] < points[extremes[2 * axis]][axis] {
                extremes[2 * axis] = i;
            }
            if p[axis] > points[extremes[2 * axis + 1]][axis] {
                extremes[2 * axis + 1] = i;
            }
        }
    }
    let mut best = (0.0, 0, 0);
    for i in 0..6 {
        for j in i + 1..6 {
            let d = points[extremes[i]].distance(points[extremes[j]]);
            if d > best.0 {
                best = (d, extremes[i], extremes[j]);
            }
        }
    }
    let (span, a, b) = best;
    if span <= eps {
        return Err(0);
    }
    let ab = points[b] - points[a];
    let line_dist = |p: Vec3| ab.cross(p - points[a]).norm() / span;
    let c = argmax(points, line_dist);
    if line_dist(points[c]) <= eps {
        return Err(1);
    }
    let n = ab.cross(points[c] - points[a]).normalized().ok_or(1u8)?;
    let plane_dist = |p: Vec3| abs(n.dot(p - points[a]));
    let d = argmax(points, plane_dist);
    if plane_dist(points[d]) <= eps {
        return Err(2);
    }
    Ok([a, b, c, d])
}

fn argmax(points: &[Vec3], f: impl Fn(Vec3) -> f64) -> usize {
    let mut best = (f64::NEG_INFINITY, 0);
    for (i, &p) in points.iter().enumerate() {
        let v = f(p);
        if v > best.0 {
            best = (v, i);
        }
    }
    best.1
}

fn seed_faces(points: &[Vec3], s: [usize; 4]) -> Vec<Face> {
    let inside = (points[s[0]] + points[s[1]] + points[s[2]] + points[s[3]]) / 4.0;
    let tris = [[s[0], s[1], s[2]], [s[0], s[1], s[3]], [s[0], s[2], s[3]], [s[1], s[2], s[3]]];
    let mut faces: Vec<Face> = tris
        .iter()
        .map(|&[a, b, c]| {
            let f = Face::new(points, [a, b, c]);
            if f.distance(inside) > 0.0 {
                Face::new(points, [a, c, b])
            } else {
                f
            }
        })
        .collect();
    for i in 0..4 {
        for e in 0..3 {
            let (a, b) = (faces[i].v[e], faces[i].v[(e + 1) % 3]);
            let j = (0..4).find(|&j| j != i && faces[j].edge_slot(b, a).is_some()).expect("closed tetrahedron");
            faces[i].neighbors[e] = j;
        }
    }
    faces
}

fn compact(points: &[Vec3], faces: &[Face]) -> ConvexHull3 {
    let mut remap = BTreeMap::new();
    let mut vertices = Vec::new();
    let mut facets = Vec::new();
    for f in faces.iter().filter(|f| f.alive) {
        let indices = f.v.map(|v| {
            *remap.entry(v).or_insert_with(|| {
                vertices.push(points[v]);
                vertices.len() - 1
            })
        });
        facets.push(Facet { indices, normal: f.normal });
    }
    ConvexHull3 { vertices, facets }
}
