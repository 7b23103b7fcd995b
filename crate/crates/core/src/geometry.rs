//! RTN graphs: vertices with a logical (bulk) leg, internal bonds contracted
//! against maximally entangled pairs, and external (boundary) legs.
//!
//! A [`Geometry`] is validated on construction and immutable afterwards.
//! Vertex ids are dense `0..n_v`; fusion re-indexes and returns a provenance
//! map. Builders emit external legs in cyclic boundary order so that
//! "contiguous region" has a meaning for [`mincut`].

pub mod mincut;
pub mod tiling;

use crate::{Error, Result};
use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

pub use mincut::{min_cut, CutResult};
pub use tiling::{
    asymptotic_rate, build_hyperbolic_patch, inflation_counts, Dual, HyperbolicPatch, Inflation,
    Seed, TilingSpec,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vertex {
    pub id: usize,
    pub d: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InternalEdge {
    pub u: usize,
    pub v: usize,
    pub b: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExternalLeg {
    pub vertex: usize,
    pub a: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct RawGeometry {
    vertices: Vec<Vertex>,
    internal_edges: Vec<InternalEdge>,
    external_legs: Vec<ExternalLeg>,
}

/// A connected tensor network graph. Parallel internal edges are allowed,
/// self-loops are not.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawGeometry", into = "RawGeometry")]
pub struct Geometry {
    vertices: Vec<Vertex>,
    internal_edges: Vec<InternalEdge>,
    external_legs: Vec<ExternalLeg>,
}

impl TryFrom<RawGeometry> for Geometry {
    type Error = Error;

    fn try_from(raw: RawGeometry) -> Result<Self> {
        Geometry::new(raw.vertices, raw.internal_edges, raw.external_legs)
    }
}

impl From<Geometry> for RawGeometry {
    fn from(g: Geometry) -> Self {
        RawGeometry {
            vertices: g.vertices,
            internal_edges: g.internal_edges,
            external_legs: g.external_legs,
        }
    }
}

impl Geometry {
    pub fn new(
        vertices: Vec<Vertex>,
        internal_edges: Vec<InternalEdge>,
        external_legs: Vec<ExternalLeg>,
    ) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::invalid("geometry needs at least one vertex"));
        }
        for (i, v) in vertices.iter().enumerate() {
            if v.id != i {
                return Err(Error::invalid(format!(
                    "vertex ids must be dense and ordered: position {i} holds id {}",
                    v.id
                )));
            }
            if v.d == 0 {
                return Err(Error::invalid(format!("vertex {i} has logical dimension 0")));
            }
        }
        let n = vertices.len();
        for (i, e) in internal_edges.iter().enumerate() {
            if e.u >= n || e.v >= n {
                return Err(Error::invalid(format!("edge {i} references a missing vertex")));
            }
            if e.u == e.v {
                return Err(Error::invalid(format!("edge {i} is a self-loop on vertex {}", e.u)));
            }
            if e.b == 0 {
                return Err(Error::invalid(format!("edge {i} has bond dimension 0")));
            }
        }
        for (i, l) in external_legs.iter().enumerate() {
            if l.vertex >= n {
                return Err(Error::invalid(format!("leg {i} references a missing vertex")));
            }
            if l.a == 0 {
                return Err(Error::invalid(format!("leg {i} has physical dimension 0")));
            }
        }
        let g = Geometry { vertices, internal_edges, external_legs };
        if !g.is_connected() {
            return Err(Error::invalid("graph of vertices and internal edges is not connected"));
        }
        Ok(g)
    }

    /// Builds from plain tuples: logical dims, `(u, v, b)` edges, `(vertex, a)` legs.
    pub fn from_parts(
        d: &[u64],
        edges: &[(usize, usize, u64)],
        legs: &[(usize, u64)],
    ) -> Result<Self> {
        Geometry::new(
            d.iter().enumerate().map(|(id, &d)| Vertex { id, d }).collect(),
            edges.iter().map(|&(u, v, b)| InternalEdge { u, v, b }).collect(),
            legs.iter().map(|&(vertex, a)| ExternalLeg { vertex, a }).collect(),
        )
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::invalid(format!("geometry JSON: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("geometry serializes")
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn internal_edges(&self) -> &[InternalEdge] {
        &self.internal_edges
    }

    pub fn external_legs(&self) -> &[ExternalLeg] {
        &self.external_legs
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_internal(&self) -> usize {
        self.internal_edges.len()
    }

    pub fn n_legs(&self) -> usize {
        self.external_legs.len()
    }

    pub fn logical_dim(&self, k: usize) -> u64 {
        self.vertices[k].d
    }

    /// Ids of internal edges touching `k`, ascending.
    pub fn incident_edges(&self, k: usize) -> Vec<usize> {
        (0..self.internal_edges.len())
            .filter(|&e| self.internal_edges[e].u == k || self.internal_edges[e].v == k)
            .collect()
    }

    /// Ids of external legs on `k`, ascending.
    pub fn legs_of(&self, k: usize) -> Vec<usize> {
        (0..self.external_legs.len()).filter(|&l| self.external_legs[l].vertex == k).collect()
    }

    /// Internal degree of `k`, parallel edges counted with multiplicity.
    pub fn degree(&self, k: usize) -> usize {
        self.internal_edges.iter().filter(|e| e.u == k || e.v == k).count()
    }

    /// Ids of all internal edges joining `j` and `k`.
    pub fn edges_between(&self, j: usize, k: usize) -> Vec<usize> {
        (0..self.internal_edges.len())
            .filter(|&e| {
                let ed = self.internal_edges[e];
                (ed.u == j && ed.v == k) || (ed.u == k && ed.v == j)
            })
            .collect()
    }

    pub fn other_end(&self, edge: usize, k: usize) -> usize {
        let e = self.internal_edges[edge];
        if e.u == k {
            e.v
        } else {
            e.u
        }
    }

    /// Total dimension q_k of the tensor at `k`: physical legs, logical leg and
    /// every internal leg multiplied together.
    pub fn tensor_dimension(&self, k: usize) -> BigUint {
        let mut q = BigUint::from(self.vertices[k].d);
        for l in &self.external_legs {
            if l.vertex == k {
                q *= l.a;
            }
        }
        for e in &self.internal_edges {
            if e.u == k || e.v == k {
                q *= e.b;
            }
        }
        q
    }

    /// Product of all external leg dimensions (a^n for uniform legs).
    pub fn boundary_dimension(&self) -> BigUint {
        self.external_legs.iter().fold(BigUint::one(), |acc, l| acc * l.a)
    }

    /// Product of all logical dimensions.
    pub fn bulk_dimension(&self) -> BigUint {
        self.vertices.iter().fold(BigUint::one(), |acc, v| acc * v.d)
    }

    pub fn uniform_a(&self) -> Option<u64> {
        uniform(self.external_legs.iter().map(|l| l.a))
    }

    pub fn uniform_b(&self) -> Option<u64> {
        uniform(self.internal_edges.iter().map(|e| e.b))
    }

    pub fn uniform_d(&self) -> Option<u64> {
        uniform(self.vertices.iter().map(|v| v.d))
    }

    /// Internal-edge neighbour lists (with multiplicity).
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for e in &self.internal_edges {
            adj[e.u].push(e.v);
            adj[e.v].push(e.u);
        }
        adj
    }

    fn is_connected(&self) -> bool {
        let adj = self.adjacency();
        let mut seen = vec![false; adj.len()];
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
    }

    /// Same graph with every leg dimension `a`, bond `b` and logical dim `d`.
    pub fn with_uniform_dims(&self, a: u64, b: u64, d: u64) -> Result<Self> {
        Geometry::new(
            self.vertices.iter().map(|v| Vertex { id: v.id, d }).collect(),
            self.internal_edges.iter().map(|e| InternalEdge { b, ..*e }).collect(),
            self.external_legs.iter().map(|l| ExternalLeg { a, ..*l }).collect(),
        )
    }

    /// Same graph with the logical dimension of vertex `k` replaced.
    pub fn with_logical_dim(&self, k: usize, d: u64) -> Result<Self> {
        let mut vertices = self.vertices.clone();
        vertices[k].d = d;
        Geometry::new(vertices, self.internal_edges.clone(), self.external_legs.clone())
    }

    /// Same graph with the bond dimension of edge `e` replaced.
    pub fn with_bond_dim(&self, e: usize, b: u64) -> Result<Self> {
        let mut edges = self.internal_edges.clone();
        edges[e].b = b;
        Geometry::new(self.vertices.clone(), edges, self.external_legs.clone())
    }
}

fn uniform(mut it: impl Iterator<Item = u64>) -> Option<u64> {
    let first = it.next()?;
    it.all(|x| x == first).then_some(first)
}

fn check_dims(a: u64, b: u64, d: u64) -> Result<()> {
    if a == 0 || b == 0 || d == 0 {
        return Err(Error::invalid("dimensions must be at least 1"));
    }
    Ok(())
}

/// Random tensor train: a chain of `n` tensors, each with one physical leg
/// `a` and logical dim `d`, joined by bonds `b`; `closed` adds the bond
/// `(n-1, 0)`, which for `n = 2` is a second parallel bond.
pub fn build_rtt(n: usize, closed: bool, a: u64, b: u64, d: u64) -> Result<Geometry> {
    if n < 2 {
        return Err(Error::invalid(format!("tensor train needs n >= 2, got {n}")));
    }
    check_dims(a, b, d)?;
    let mut edges: Vec<(usize, usize, u64)> = (0..n - 1).map(|k| (k, k + 1, b)).collect();
    if closed {
        edges.push((n - 1, 0, b));
    }
    let legs: Vec<(usize, u64)> = (0..n).map(|k| (k, a)).collect();
    Geometry::from_parts(&vec![d; n], &edges, &legs)
}

/// One tensor carrying all `n` physical legs.
pub fn build_single_tensor(n: usize, a: u64, d: u64) -> Result<Geometry> {
    if n < 1 {
        return Err(Error::invalid("single tensor needs n >= 1"));
    }
    check_dims(a, 1, d)?;
    Geometry::from_parts(&[d], &[], &vec![(0, a); n])
}

/// Open `rows × cols` square lattice with one physical leg per site.
pub fn build_grid(rows: usize, cols: usize, a: u64, b: u64, d: u64) -> Result<Geometry> {
    if rows == 0 || cols == 0 {
        return Err(Error::invalid("grid needs at least one row and column"));
    }
    check_dims(a, b, d)?;
    let id = |r: usize, c: usize| r * cols + c;
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                edges.push((id(r, c), id(r, c + 1), b));
            }
            if r + 1 < rows {
                edges.push((id(r, c), id(r + 1, c), b));
            }
        }
    }
    let legs: Vec<(usize, u64)> = (0..rows * cols).map(|k| (k, a)).collect();
    Geometry::from_parts(&vec![d; rows * cols], &edges, &legs)
}

/// How boundary legs are attached to a square-lattice disc.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiscLegs {
    /// One leg per perimeter vertex: n = 4R.
    BoundaryVertex,
    /// One leg per severed lattice bond: n = 8R + 4.
    CutBond,
}

/// Diamond (L1 ball) cut of the square lattice.
#[derive(Clone, Debug)]
pub struct SquareDisc {
    pub geometry: Geometry,
    pub radius: usize,
    pub coords: Vec<(i64, i64)>,
}

/// Diamond of radius R with exactly `n` boundary legs.
pub fn build_square_disc(n: usize, legs: DiscLegs, a: u64, b: u64, d: u64) -> Result<SquareDisc> {
    check_dims(a, b, d)?;
    let radius = match legs {
        DiscLegs::BoundaryVertex => {
            if n >= 4 && n % 4 == 0 {
                n / 4
            } else {
                let near = ((n + 2) / 4).max(1) * 4;
                return Err(Error::invalid(format!(
                    "no diamond has {n} perimeter vertices; nearest achievable n is {near}"
                )));
            }
        }
        DiscLegs::CutBond => {
            if n >= 4 && (n - 4) % 8 == 0 {
                (n - 4) / 8
            } else {
                let r = (n.saturating_sub(4) + 4) / 8;
                let near = 8 * r + 4;
                return Err(Error::invalid(format!(
                    "no diamond has {n} cut bonds; nearest achievable n is {near}"
                )));
            }
        }
    };
    let r = radius as i64;
    let mut coords = Vec::new();
    for y in -r..=r {
        for x in -r..=r {
            if x.abs() + y.abs() <= r {
                coords.push((x, y));
            }
        }
    }
    let index = |p: (i64, i64)| coords.iter().position(|&c| c == p);
    let mut edges = Vec::new();
    for (i, &(x, y)) in coords.iter().enumerate() {
        for nb in [(x + 1, y), (x, y + 1)] {
            if let Some(j) = index(nb) {
                edges.push((i, j, b));
            }
        }
    }
    // Legs sorted by polar angle of their anchor point.
    let mut anchored: Vec<(f64, usize)> = Vec::new();
    for (i, &(x, y)) in coords.iter().enumerate() {
        match legs {
            DiscLegs::BoundaryVertex => {
                if x.abs() + y.abs() == r {
                    anchored.push((angle(x as f64, y as f64), i));
                }
            }
            DiscLegs::CutBond => {
                for (dx, dy) in [(1, 0), (0, 1), (-1, 0), (0, -1)] {
                    if index((x + dx, y + dy)).is_none() {
                        let px = x as f64 + 0.5 * dx as f64;
                        let py = y as f64 + 0.5 * dy as f64;
                        anchored.push((angle(px, py), i));
                    }
                }
            }
        }
    }
    anchored.sort_by(|p, q| p.0.total_cmp(&q.0));
    let leg_list: Vec<(usize, u64)> = anchored.iter().map(|&(_, v)| (v, a)).collect();
    debug_assert_eq!(leg_list.len(), n);
    let geometry = Geometry::from_parts(&vec![d; coords.len()], &edges, &leg_list)?;
    Ok(SquareDisc { geometry, radius, coords })
}

fn angle(x: f64, y: f64) -> f64 {
    let t = y.atan2(x);
    if t < 0.0 {
        t + std::f64::consts::TAU
    } else {
        t
    }
}

/// Result of merging two vertices.
#[derive(Clone, Debug)]
pub struct Fusion {
    pub geometry: Geometry,
    /// Id of the merged vertex in the new geometry.
    pub merged: usize,
    /// For each new vertex id, the old vertex ids it came from.
    pub provenance: Vec<Vec<usize>>,
}

/// Merges the edge-connected vertices `j` and `k`.
///
/// The merged vertex takes id `min(j, k)` and logical dim `d_j d_k`; every
/// `j-k` edge disappears, all other edges and legs are redirected and keep
/// their relative order.
pub fn fuse_vertices(g: &Geometry, j: usize, k: usize) -> Result<Fusion> {
    let n = g.n_vertices();
    if j >= n || k >= n {
        return Err(Error::invalid("fusion references a missing vertex"));
    }
    if j == k {
        return Err(Error::invalid("cannot fuse a vertex with itself"));
    }
    if g.edges_between(j, k).is_empty() {
        return Err(Error::invalid(format!("vertices {j} and {k} share no internal edge")));
    }
    let (lo, hi) = (j.min(k), j.max(k));
    let remap = |v: usize| {
        if v == hi {
            lo
        } else if v > hi {
            v - 1
        } else {
            v
        }
    };
    let d = g.vertices[j]
        .d
        .checked_mul(g.vertices[k].d)
        .ok_or_else(|| Error::resource("fused logical dimension overflows u64"))?;
    let mut vertices = Vec::with_capacity(n - 1);
    let mut provenance = Vec::with_capacity(n - 1);
    for v in 0..n {
        if v == hi {
            continue;
        }
        let id = vertices.len();
        if v == lo {
            vertices.push(Vertex { id, d });
            provenance.push(vec![lo, hi]);
        } else {
            vertices.push(Vertex { id, d: g.vertices[v].d });
            provenance.push(vec![v]);
        }
    }
    let edges = g
        .internal_edges
        .iter()
        .filter(|e| !((e.u == j && e.v == k) || (e.u == k && e.v == j)))
        .map(|e| InternalEdge { u: remap(e.u), v: remap(e.v), b: e.b })
        .collect();
    let legs = g
        .external_legs
        .iter()
        .map(|l| ExternalLeg { vertex: remap(l.vertex), a: l.a })
        .collect();
    Ok(Fusion { geometry: Geometry::new(vertices, edges, legs)?, merged: lo, provenance })
}

/// Fuses `center` with each of its neighbours in turn, producing one large
/// "black hole" tensor in place of the neighbourhood.
pub fn fuse_neighbourhood(g: &Geometry, center: usize) -> Result<Fusion> {
    let mut current = g.clone();
    let mut provenance: Vec<Vec<usize>> = (0..g.n_vertices()).map(|v| vec![v]).collect();
    let mut c = center;
    let targets: Vec<usize> = {
        let mut t: Vec<usize> = g.adjacency()[center].clone();
        t.sort_unstable();
        t.dedup();
        t
    };
    for old in targets {
        let now = provenance.iter().position(|p| p.contains(&old)).expect("tracked vertex");
        if now == c {
            continue;
        }
        let f = fuse_vertices(&current, c, now)?;
        let mut next = Vec::with_capacity(f.provenance.len());
        for group in &f.provenance {
            let mut merged: Vec<usize> =
                group.iter().flat_map(|&v| provenance[v].iter().copied()).collect();
            merged.sort_unstable();
            next.push(merged);
        }
        provenance = next;
        c = f.merged;
        current = f.geometry;
    }
    Ok(Fusion { geometry: current, merged: c, provenance })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rtt_counts() {
        let g = build_rtt(3, false, 2, 2, 1).unwrap();
        assert_eq!((g.n_vertices(), g.n_internal(), g.n_legs()), (3, 2, 3));
        let g = build_rtt(5, true, 2, 2, 1).unwrap();
        assert_eq!((g.n_vertices(), g.n_internal()), (5, 5));
        let g = build_rtt(2, false, 2, 2, 1).unwrap();
        assert_eq!(g.internal_edges(), &[InternalEdge { u: 0, v: 1, b: 2 }]);
        let g = build_rtt(2, true, 2, 2, 1).unwrap();
        assert_eq!(g.edges_between(0, 1).len(), 2);
        assert!(build_rtt(1, false, 2, 2, 1).is_err());
    }

    #[test]
    fn single_tensor_counts() {
        let g = build_single_tensor(5, 2, 1).unwrap();
        assert_eq!((g.n_vertices(), g.n_internal(), g.n_legs()), (1, 0, 5));
        let g = build_single_tensor(20, 2, 2).unwrap();
        assert_eq!((g.n_legs(), g.logical_dim(0)), (20, 2));
        let g = build_single_tensor(1, 3, 1).unwrap();
        assert_eq!(g.n_legs(), 1);
    }

    #[test]
    fn tensor_dimensions() {
        let g = build_rtt(5, true, 2, 2, 1).unwrap();
        for k in 0..5 {
            assert_eq!(g.tensor_dimension(k), BigUint::from(8u32));
        }
        let g = build_rtt(4, false, 2, 2, 1).unwrap();
        assert_eq!(g.tensor_dimension(0), BigUint::from(4u32));
        assert_eq!(g.tensor_dimension(3), BigUint::from(4u32));
        let g = build_single_tensor(5, 2, 3).unwrap();
        assert_eq!(g.tensor_dimension(0), BigUint::from(96u32));
    }

    #[test]
    fn validation_rejects_bad_graphs() {
        assert!(Geometry::from_parts(&[1, 1], &[], &[(0, 2)]).is_err());
        assert!(Geometry::from_parts(&[1], &[(0, 0, 2)], &[]).is_err());
        assert!(Geometry::from_parts(&[1], &[], &[(1, 2)]).is_err());
        assert!(Geometry::from_parts(&[0], &[], &[]).is_err());
        assert!(Geometry::from_parts(&[1, 1], &[(0, 1, 0)], &[]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"vertices":[{"id":0,"d":1},{"id":1,"d":3}],"internal_edges":[{"u":0,"v":1,"b":2}],"external_legs":[{"vertex":0,"a":2}]}"#;
        let g = Geometry::from_json(text).unwrap();
        assert_eq!(g.to_json(), text);
        assert!(Geometry::from_json(r#"{"vertices":[{"id":1,"d":1}],"internal_edges":[],"external_legs":[]}"#).is_err());
    }

    #[test]
    fn square_disc_sizes() {
        let s = build_square_disc(4, DiscLegs::BoundaryVertex, 2, 2, 1).unwrap();
        assert_eq!(s.radius, 1);
        assert_eq!((s.geometry.n_vertices(), s.geometry.n_internal(), s.geometry.n_legs()), (5, 4, 4));
        let s = build_square_disc(8, DiscLegs::BoundaryVertex, 2, 2, 1).unwrap();
        assert_eq!((s.radius, s.geometry.n_vertices()), (2, 13));
        let s = build_square_disc(20, DiscLegs::BoundaryVertex, 2, 2, 1).unwrap();
        assert_eq!((s.radius, s.geometry.n_vertices()), (5, 61));
        let s = build_square_disc(20, DiscLegs::CutBond, 2, 2, 1).unwrap();
        assert_eq!((s.radius, s.geometry.n_vertices(), s.geometry.n_internal()), (2, 13, 16));
        let s = build_square_disc(4, DiscLegs::CutBond, 2, 2, 1).unwrap();
        assert_eq!((s.geometry.n_vertices(), s.geometry.n_legs()), (1, 4));
        let err = build_square_disc(10, DiscLegs::BoundaryVertex, 2, 2, 1).unwrap_err();
        assert!(err.to_string().contains("nearest achievable n is 12"), "{err}");
        let err = build_square_disc(18, DiscLegs::CutBond, 2, 2, 1).unwrap_err();
        assert!(err.to_string().contains("nearest achievable n is 20"), "{err}");
    }

    #[test]
    fn diamond_leg_counts_match_enumeration() {
        // Count perimeter vertices and missing bonds by brute force on a grid.
        for r in 0i64..6 {
            let inside = |x: i64, y: i64| x.abs() + y.abs() <= r;
            let mut perimeter = 0;
            let mut cut = 0;
            for x in -r..=r {
                for y in -r..=r {
                    if !inside(x, y) {
                        continue;
                    }
                    if x.abs() + y.abs() == r {
                        perimeter += 1;
                    }
                    cut += [(1, 0), (-1, 0), (0, 1), (0, -1)]
                        .iter()
                        .filter(|(dx, dy)| !inside(x + dx, y + dy))
                        .count();
                }
            }
            let s = build_square_disc(cut, DiscLegs::CutBond, 2, 2, 1).unwrap();
            assert_eq!(s.radius as i64, r);
            if r > 0 {
                let s = build_square_disc(perimeter, DiscLegs::BoundaryVertex, 2, 2, 1).unwrap();
                assert_eq!(s.radius as i64, r);
            }
        }
    }

    #[test]
    fn fusion_bookkeeping() {
        let g = build_rtt(2, false, 2, 2, 1).unwrap();
        let f = fuse_vertices(&g, 0, 1).unwrap();
        assert_eq!((f.geometry.n_vertices(), f.geometry.n_legs(), f.geometry.logical_dim(0)), (1, 2, 1));

        let g = build_rtt(5, true, 2, 2, 1).unwrap();
        let f = fuse_vertices(&g, 0, 1).unwrap();
        assert_eq!((f.geometry.n_vertices(), f.geometry.n_internal()), (4, 4));
        assert_eq!(f.provenance[0], vec![0, 1]);
        assert_eq!(f.provenance[1], vec![2]);
        // q_j q_k / b^2 = 8 * 8 / 4
        assert_eq!(f.geometry.tensor_dimension(0), BigUint::from(16u32));

        let g = build_rtt(5, true, 2, 2, 1).unwrap();
        assert!(fuse_vertices(&g, 0, 2).is_err());
        assert!(fuse_vertices(&g, 1, 1).is_err());
    }

    #[test]
    fn closed_pair_fusion_removes_both_bonds() {
        let g = build_rtt(2, true, 2, 3, 1).unwrap();
        let f = fuse_vertices(&g, 1, 0).unwrap();
        assert_eq!(f.geometry.n_internal(), 0);
        // (2*9) * (2*9) / 9^2
        assert_eq!(f.geometry.tensor_dimension(0), BigUint::from(4u32));
    }

    #[test]
    fn neighbourhood_fusion() {
        let s = build_square_disc(8, DiscLegs::BoundaryVertex, 2, 2, 1).unwrap();
        let center = s.coords.iter().position(|&c| c == (0, 0)).unwrap();
        let f = fuse_neighbourhood(&s.geometry, center).unwrap();
        assert_eq!(f.geometry.n_vertices(), 9);
        assert_eq!(f.provenance[f.merged].len(), 5);
        assert_eq!(f.geometry.n_legs(), 8);
    }
}
