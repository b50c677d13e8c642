//! Design curves built from equal circles around the points of a spherical
//! design.
//!
//! Each point `x` contributes the boundary circle of `B_r(x)`, traversed
//! counterclockwise seen from outside above `x`. Intersection points become
//! vertices of a directed graph whose edges are the arcs between them. Every
//! vertex is balanced, so a strongly connected graph has an Euler circuit,
//! and following it traces all circles as one closed curve.

use std::cmp::Ordering;
use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;

use crate::curve::{CircleArc, PiecewiseCurve, SegmentKind};
use crate::error::{Error, Result};
use crate::geometry::{
    cap_boundary_frame, cross3, distance3, dot3, normalize3, CircleFrame, SphericalCap, UnitVector,
};
use crate::points::{point_design_residual, DesignPointSet, CERTIFY_THRESHOLD};

/// Centers at distance within this of `2r` give tangent circles.
pub const DEFAULT_TANGENCY_TOL: f64 = 1e-9;

/// Intersection points closer than this (geodesic) are one vertex.
pub const CLUSTER_TOL: f64 = 1e-8;

const SAME_RADIUS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct OrientedCircle {
    pub id: usize,
    pub cap: SphericalCap,
    pub frame: CircleFrame,
    /// Always `+1` here: counterclockwise around the center.
    pub orientation: i8,
}

impl OrientedCircle {
    pub fn new(id: usize, cap: SphericalCap) -> Result<Self> {
        let frame = cap_boundary_frame(&cap)?;
        Ok(Self {
            id,
            cap,
            frame,
            orientation: 1,
        })
    }

    pub fn center(&self) -> [f64; 3] {
        self.frame.center
    }

    pub fn radius(&self) -> f64 {
        self.cap.radius()
    }
}

/// Circles of radius `r` around every point of `x`, with ids in point order.
pub fn circles_around(x: &DesignPointSet, r: f64) -> Result<Vec<OrientedCircle>> {
    x.points()
        .into_iter()
        .enumerate()
        .map(|(id, p)| OrientedCircle::new(id, SphericalCap::new(p, r)?))
        .collect()
}

/// Result of intersecting two equal circles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PairIntersection {
    Disjoint,
    Tangent([f64; 3]),
    Crossing([f64; 3], [f64; 3]),
}

impl PairIntersection {
    pub fn points(&self) -> Vec<[f64; 3]> {
        match *self {
            PairIntersection::Disjoint => vec![],
            PairIntersection::Tangent(p) => vec![p],
            PairIntersection::Crossing(p, q) => vec![p, q],
        }
    }
}

/// Solves `<x, z> = <y, z> = cos r`, `|z| = 1` as
/// `z = alpha (x + y) + gamma (x cross y)`.
pub fn intersect_pair(
    c1: &OrientedCircle,
    c2: &OrientedCircle,
    tangency_tol: f64,
) -> Result<PairIntersection> {
    let r = c1.radius();
    if (r - c2.radius()).abs() > SAME_RADIUS_TOL {
        return Err(Error::MixedRadii);
    }
    let (x, y) = (c1.center(), c2.center());
    let d = distance3(&x, &y);
    if d <= CLUSTER_TOL {
        return Err(Error::CoincidentCenters(c1.id, c2.id));
    }
    if d > 2.0 * r + tangency_tol {
        return Ok(PairIntersection::Disjoint);
    }
    let sum = [x[0] + y[0], x[1] + y[1], x[2] + y[2]];
    if (d - 2.0 * r).abs() <= tangency_tol {
        if dot3(&sum, &sum) < 1e-24 {
            return Err(Error::NearTangency(c1.id, c2.id));
        }
        return Ok(PairIntersection::Tangent(normalize3(&sum)));
    }
    let c = d.cos();
    let alpha = r.cos() / (1.0 + c);
    // cos d - cos 2r, written as a product to keep precision near tangency
    let num = 2.0 * (r + 0.5 * d).sin() * (r - 0.5 * d).sin();
    let gamma = (num / ((1.0 + c) * d.sin().powi(2))).sqrt();
    let w = cross3(&x, &y);
    let z = |g: f64| normalize3(&std::array::from_fn(|i| alpha * sum[i] + g * w[i]));
    let (p, q) = (z(gamma), z(-gamma));
    if distance3(&p, &q) <= CLUSTER_TOL {
        return Err(Error::NearTangency(c1.id, c2.id));
    }
    Ok(PairIntersection::Crossing(p, q))
}

/// Intersection points of two equal circles: none, one (tangent within
/// [`DEFAULT_TANGENCY_TOL`]) or two.
pub fn circle_pair_intersection(
    c1: &OrientedCircle,
    c2: &OrientedCircle,
) -> Result<Vec<UnitVector>> {
    intersect_pair(c1, c2, DEFAULT_TANGENCY_TOL)?
        .points()
        .into_iter()
        .map(UnitVector::from_xyz)
        .collect()
}

/// Undirected graph on the points of a set: edge iff `dist(x, y) <= 2r`.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborGraph {
    pub adjacency: Vec<Vec<usize>>,
}

impl NeighborGraph {
    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn is_connected(&self) -> bool {
        let n = self.adjacency.len();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &self.adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

pub fn neighbor_graph(x: &DesignPointSet, r: f64) -> Result<NeighborGraph> {
    if !(r > 0.0 && r < FRAC_PI_2) {
        return Err(Error::InvalidRadius(r));
    }
    let pts = x.xyz();
    let adjacency = (0..pts.len())
        .into_par_iter()
        .map(|i| {
            (0..pts.len())
                .filter(|&j| j != i && distance3(&pts[i], &pts[j]) <= 2.0 * r)
                .collect()
        })
        .collect();
    Ok(NeighborGraph { adjacency })
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntersectionVertex {
    pub point: [f64; 3],
    /// `(circle id, angle of the vertex on that circle)`, by circle id.
    pub incidences: Vec<(usize, f64)>,
}

/// A directed arc of one circle, from `theta_start` to `theta_end >
/// theta_start`.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphArc {
    pub circle: usize,
    /// Start and end vertex; `None` for a circle without vertices.
    pub endpoints: Option<(usize, usize)>,
    pub theta_start: f64,
    pub theta_end: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArcGraph {
    pub circles: Vec<OrientedCircle>,
    pub vertices: Vec<IntersectionVertex>,
    pub arcs: Vec<GraphArc>,
}

impl ArcGraph {
    pub fn out_degree(&self, v: usize) -> usize {
        self.arcs
            .iter()
            .filter(|a| a.endpoints.map(|e| e.0) == Some(v))
            .count()
    }

    pub fn in_degree(&self, v: usize) -> usize {
        self.arcs
            .iter()
            .filter(|a| a.endpoints.map(|e| e.1) == Some(v))
            .count()
    }

    fn out_arcs(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.vertices.len()];
        for (i, a) in self.arcs.iter().enumerate() {
            if let Some((from, _)) = a.endpoints {
                out[from].push(i);
            }
        }
        out
    }

    /// Sum of `sin r * (theta_end - theta_start)` over all arcs.
    pub fn total_length(&self) -> f64 {
        self.arcs
            .iter()
            .map(|a| self.circles[a.circle].frame.sin_r * (a.theta_end - a.theta_start))
            .sum()
    }
}

struct RawPoint {
    point: [f64; 3],
    circles: (usize, usize),
    crossing: bool,
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Groups raw points closer than [`CLUSTER_TOL`]; clusters are ordered by
/// their first member.
fn cluster(raw: &[RawPoint]) -> Vec<Vec<usize>> {
    let n = raw.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| raw[a].point[2].total_cmp(&raw[b].point[2]));
    let mut parent: Vec<usize> = (0..n).collect();
    for (pos, &a) in order.iter().enumerate() {
        for &b in &order[pos + 1..] {
            if raw[b].point[2] - raw[a].point[2] > CLUSTER_TOL {
                break;
            }
            if distance3(&raw[a].point, &raw[b].point) <= CLUSTER_TOL {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let root = find(&mut parent, i);
        if slot[root] == usize::MAX {
            slot[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[root]].push(i);
    }
    groups
}

/// Vertices are clustered pairwise intersections; each circle is cut at its
/// vertices into arcs running counterclockwise between consecutive angles.
pub fn build_arc_graph(circles: Vec<OrientedCircle>, tangency_tol: f64) -> Result<ArcGraph> {
    if circles.is_empty() {
        return Err(Error::InvalidArgument("no circles".into()));
    }
    if !(tangency_tol >= 0.0) {
        return Err(Error::InvalidArgument(
            "tangency tolerance must be non-negative".into(),
        ));
    }
    let r = circles[0].radius();
    if circles
        .iter()
        .any(|c| (c.radius() - r).abs() > SAME_RADIUS_TOL)
    {
        return Err(Error::MixedRadii);
    }
    let n = circles.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let hits: Vec<(usize, usize, PairIntersection)> = pairs
        .par_iter()
        .map(|&(i, j)| {
            Ok((
                i,
                j,
                intersect_pair(&circles[i], &circles[j], tangency_tol)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut raw = Vec::new();
    for (i, j, hit) in &hits {
        let crossing = matches!(hit, PairIntersection::Crossing(..));
        for p in hit.points() {
            raw.push(RawPoint {
                point: p,
                circles: (*i, *j),
                crossing,
            });
        }
    }

    let groups = cluster(&raw);
    let mut vertices = Vec::with_capacity(groups.len());
    let mut per_circle: Vec<Vec<(f64, usize)>> = vec![Vec::new(); n];
    for (v, group) in groups.iter().enumerate() {
        // both crossings of one pair merged into one vertex
        for (pos, &a) in group.iter().enumerate() {
            for &b in &group[pos + 1..] {
                if raw[a].crossing && raw[a].circles == raw[b].circles {
                    let (i, j) = raw[a].circles;
                    return Err(Error::NearTangency(circles[i].id, circles[j].id));
                }
            }
        }
        let point = raw[group[0]].point;
        let mut ids: Vec<usize> = group
            .iter()
            .flat_map(|&g| [raw[g].circles.0, raw[g].circles.1])
            .collect();
        ids.sort_unstable();
        ids.dedup();
        let incidences: Vec<(usize, f64)> = ids
            .iter()
            .map(|&c| (c, circles[c].frame.angle_of(&point)))
            .collect();
        for &(c, theta) in &incidences {
            per_circle[c].push((theta, v));
        }
        vertices.push(IntersectionVertex { point, incidences });
    }

    let mut arcs = Vec::new();
    for (c, inc) in per_circle.iter_mut().enumerate() {
        if inc.is_empty() {
            if n > 1 {
                return Err(Error::IsolatedCircle(circles[c].id));
            }
            arcs.push(GraphArc {
                circle: c,
                endpoints: None,
                theta_start: 0.0,
                theta_end: 2.0 * PI,
            });
            continue;
        }
        inc.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for k in 0..inc.len() {
            let (t0, v0) = inc[k];
            let (t1, v1) = if k + 1 < inc.len() {
                inc[k + 1]
            } else {
                (inc[0].0 + 2.0 * PI, inc[0].1)
            };
            arcs.push(GraphArc {
                circle: c,
                endpoints: Some((v0, v1)),
                theta_start: t0,
                theta_end: t1,
            });
        }
    }
    Ok(ArcGraph {
        circles,
        vertices,
        arcs,
    })
}

/// Every vertex reaches and is reached from every other vertex. A graph
/// without vertices is strongly connected iff it is one closed arc.
pub fn strong_connectivity(g: &ArcGraph) -> bool {
    let nv = g.vertices.len();
    if nv == 0 {
        return g.arcs.len() == 1;
    }
    if g.arcs.iter().any(|a| a.endpoints.is_none()) {
        return false;
    }
    let reach = |forward: bool| {
        let mut adj = vec![Vec::new(); nv];
        for a in &g.arcs {
            let (u, v) = a.endpoints.unwrap();
            if forward {
                adj[u].push(v);
            } else {
                adj[v].push(u);
            }
        }
        let mut seen = vec![false; nv];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    reach(true) && reach(false)
}

fn lex_cmp(a: &[f64; 3], b: &[f64; 3]) -> Ordering {
    a[0].total_cmp(&b[0])
        .then(a[1].total_cmp(&b[1]))
        .then(a[2].total_cmp(&b[2]))
}

/// Arc indices of an Euler circuit (Hierholzer), starting at the
/// lexicographically smallest vertex and taking out-arcs in arc order.
pub fn euler_circuit(g: &ArcGraph) -> Result<Vec<usize>> {
    if g.vertices.is_empty() {
        return if g.arcs.len() == 1 {
            Ok(vec![0])
        } else {
            Err(Error::NotStronglyConnected)
        };
    }
    let out = g.out_arcs();
    let mut indeg = vec![0usize; g.vertices.len()];
    for a in &g.arcs {
        if let Some((_, v)) = a.endpoints {
            indeg[v] += 1;
        }
    }
    if let Some(v) = (0..g.vertices.len()).find(|&v| indeg[v] != out[v].len()) {
        return Err(Error::Unbalanced(v));
    }
    if !strong_connectivity(g) {
        return Err(Error::NotStronglyConnected);
    }
    let start = (0..g.vertices.len())
        .min_by(|&a, &b| lex_cmp(&g.vertices[a].point, &g.vertices[b].point))
        .unwrap();
    let mut next = vec![0usize; g.vertices.len()];
    let mut stack: Vec<(usize, Option<usize>)> = vec![(start, None)];
    let mut circuit = Vec::with_capacity(g.arcs.len());
    while let Some(&(v, via)) = stack.last() {
        if next[v] < out[v].len() {
            let a = out[v][next[v]];
            next[v] += 1;
            stack.push((g.arcs[a].endpoints.unwrap().1, Some(a)));
        } else {
            stack.pop();
            if let Some(a) = via {
                circuit.push(a);
            }
        }
    }
    circuit.reverse();
    debug_assert_eq!(circuit.len(), g.arcs.len());
    Ok(circuit)
}

/// Assembled curve with the graph statistics that certify it.
#[derive(Debug, Clone)]
pub struct Assembly {
    pub curve: PiecewiseCurve,
    pub radius: f64,
    pub n_arcs: usize,
    pub n_vertices: usize,
    /// Residual of the point set at the requested degree.
    pub point_residual: f64,
}

/// Traces the circles of radius `r` around the points of `x` as one closed
/// curve. `r` defaults to the covering radius of `x`.
pub fn assemble_design_curve(x: &DesignPointSet, t: usize, r: Option<f64>) -> Result<Assembly> {
    let point_residual = point_design_residual(x, t).max_residual;
    if point_residual > CERTIFY_THRESHOLD {
        return Err(Error::Uncertified {
            degree: t,
            residual: point_residual,
        });
    }
    let r = match r {
        Some(r) => r,
        None => x.exact_covering_radius()?,
    };
    if !(r > 0.0 && r < FRAC_PI_2) {
        return Err(Error::InvalidRadius(r));
    }
    let graph = build_arc_graph(circles_around(x, r)?, DEFAULT_TANGENCY_TOL)?;
    let circuit = euler_circuit(&graph)?;
    let mut pieces = Vec::with_capacity(circuit.len());
    let mut weights = Vec::with_capacity(circuit.len());
    for &a in &circuit {
        let arc = &graph.arcs[a];
        let circle = &graph.circles[arc.circle];
        let piece = CircleArc::new(&circle.cap, circle.frame, arc.theta_start, arc.theta_end);
        weights.push(piece.length());
        pieces.push(SegmentKind::CircleArc(piece));
    }
    let curve = PiecewiseCurve::from_pieces(pieces, &weights, true)?;
    Ok(Assembly {
        curve,
        radius: r,
        n_arcs: graph.arcs.len(),
        n_vertices: graph.vertices.len(),
        point_residual,
    })
}
