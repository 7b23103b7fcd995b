//! Finite patches of hyperbolic {p,q} tilings grown by vertex inflation.
//!
//! The patch is grown combinatorially. The current boundary is a cycle of
//! tiling vertices, each knowing how many tiles already meet there. A layer
//! adds, at every boundary vertex, the `q - c(v)` missing tiles: one "edge
//! tile" across each boundary edge and `q - c(v) - 2` "corner tiles" touching
//! the boundary in a single vertex. Consecutive new tiles share one outward
//! edge. Edge tiles are the β type of the substitution rule, corner tiles the
//! γ type.

use super::Geometry;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Where growth starts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Seed {
    /// Layer 1 is the q tiles around one tiling vertex.
    Vertex,
    /// Layer 0 is a single tile; layer L adds one inflation step.
    Tile,
}

/// Which objects of the tiling carry tensors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dual {
    /// One tensor per tile, bonds across shared tile edges, legs on unshared edges.
    Tile,
    /// One tensor per tiling vertex, bonds along tiling edges, `q - deg` legs
    /// on each boundary vertex.
    Vertex,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TilingSpec {
    pub p: usize,
    pub q: usize,
    /// Number of layers; 0 always means the single seed tile.
    pub layers: usize,
    pub seed: Seed,
}

impl TilingSpec {
    pub fn new(p: usize, q: usize, layers: usize) -> Self {
        TilingSpec { p, q, layers, seed: Seed::Vertex }
    }

    pub fn validate(&self) -> Result<()> {
        check_inflatable(self.p, self.q)
    }
}

fn is_hyperbolic(p: usize, q: usize) -> bool {
    // 1/p + 1/q < 1/2  <=>  2(p + q) < pq
    p > 0 && q > 0 && 2 * (p + q) < p * q
}

fn check_inflatable(p: usize, q: usize) -> Result<()> {
    if p <= 3 || q <= 3 {
        return Err(Error::Unsupported(format!(
            "{{{p},{q}}}: vertex inflation needs p, q > 3"
        )));
    }
    if !is_hyperbolic(p, q) {
        return Err(Error::invalid(format!("{{{p},{q}}} is not a hyperbolic tiling")));
    }
    Ok(())
}

/// Asymptotic ratio of bulk tensors to boundary legs,
/// `1/sqrt((p-2)(p - 2q/(q-2)))`.
pub fn asymptotic_rate(p: usize, q: usize) -> Result<f64> {
    if p <= 3 || q < 3 || !is_hyperbolic(p, q) {
        return Err(Error::invalid(format!(
            "{{{p},{q}}}: rate defined for hyperbolic tilings with p > 3"
        )));
    }
    let (p, q) = (p as f64, q as f64);
    Ok(1.0 / ((p - 2.0) * (p - 2.0 * q / (q - 2.0))).sqrt())
}

/// Substitution matrix acting on (n_β, n_γ) column vectors.
pub fn substitution_matrix(p: usize, q: usize) -> Result<[[u64; 2]; 2]> {
    check_inflatable(p, q)?;
    let (p, q) = (p as u64, q as u64);
    Ok([[p - 3, p - 2], [(p - 3) * (q - 3) - 1, (p - 2) * (q - 3) - 1]])
}

/// Per-layer tile type counts and the asymptotic type ratio.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Inflation {
    pub matrix: [[u64; 2]; 2],
    /// `(n_β, n_γ)` for layers `0..=L`.
    pub layers: Vec<(u128, u128)>,
    pub dominant_eigenvalue: f64,
    /// n_β / n_γ along the dominant eigenvector.
    pub asymptotic_ratio: f64,
}

/// Tile type counts per layer.
///
/// Layer 0 is the seed: `(1, 0)` for a tile seed, `(0, 0)` for a vertex seed.
/// The first ring is `(p, p(q-3))` around a tile and `(0, q)` around a
/// vertex; every later ring is the substitution matrix applied to the previous
/// one.
pub fn inflation_counts(p: usize, q: usize, layers: usize, seed: Seed) -> Result<Inflation> {
    let m = substitution_matrix(p, q)?;
    let mut out: Vec<(u128, u128)> = Vec::with_capacity(layers + 1);
    out.push(match seed {
        Seed::Tile => (1, 0),
        Seed::Vertex => (0, 0),
    });
    let overflow = || Error::resource("layer counts overflow 128 bits");
    for l in 1..=layers {
        let next = if l == 1 {
            match seed {
                Seed::Tile => (p as u128, (p * (q - 3)) as u128),
                Seed::Vertex => (0, q as u128),
            }
        } else {
            let (b, g) = out[l - 1];
            let row = |r: [u64; 2]| -> Option<u128> {
                (r[0] as u128).checked_mul(b)?.checked_add((r[1] as u128).checked_mul(g)?)
            };
            (row(m[0]).ok_or_else(overflow)?, row(m[1]).ok_or_else(overflow)?)
        };
        out.push(next);
    }
    let [[a, b], [c, d]] = m.map(|r| r.map(|x| x as f64));
    let lambda = 0.5 * ((a + d) + ((a - d).powi(2) + 4.0 * b * c).sqrt());
    Ok(Inflation {
        matrix: m,
        layers: out,
        dominant_eigenvalue: lambda,
        asymptotic_ratio: b / (lambda - a),
    })
}

/// Combinatorial patch of the tiling.
#[derive(Clone, Debug, Default)]
struct Tiling {
    tiles: Vec<Vec<usize>>,
    tile_layer: Vec<usize>,
    tiles_at: Vec<usize>,
    boundary: Vec<usize>,
    edge_tiles: BTreeMap<(usize, usize), Vec<usize>>,
}

impl Tiling {
    fn new_vertex(&mut self) -> usize {
        self.tiles_at.push(0);
        self.tiles_at.len() - 1
    }

    fn fresh(&mut self, k: usize) -> Vec<usize> {
        (0..k).map(|_| self.new_vertex()).collect()
    }

    fn add_tile(&mut self, cycle: Vec<usize>, layer: usize) {
        let t = self.tiles.len();
        for i in 0..cycle.len() {
            let (u, v) = (cycle[i], cycle[(i + 1) % cycle.len()]);
            self.edge_tiles.entry((u.min(v), u.max(v))).or_default().push(t);
            self.tiles_at[u] += 1;
        }
        self.tiles.push(cycle);
        self.tile_layer.push(layer);
    }

    fn seed_tile(p: usize) -> Self {
        let mut t = Tiling::default();
        let cycle = t.fresh(p);
        t.boundary = cycle.clone();
        t.add_tile(cycle, 0);
        t
    }

    fn seed_vertex(p: usize, q: usize) -> Self {
        let mut t = Tiling::default();
        let z = t.new_vertex();
        let spokes = t.fresh(q);
        let mut boundary = Vec::new();
        for j in 0..q {
            let f = t.fresh(p - 3);
            let mut cycle = vec![z, spokes[j]];
            cycle.extend(&f);
            cycle.push(spokes[(j + 1) % q]);
            boundary.push(spokes[j]);
            boundary.extend(&f);
            t.add_tile(cycle, 1);
        }
        t.boundary = boundary;
        t
    }

    fn grow(&mut self, p: usize, q: usize, layer: usize) -> Result<()> {
        let ring = self.boundary.clone();
        let m = ring.len();
        let mut outward: Vec<Vec<usize>> = Vec::with_capacity(m);
        for &v in &ring {
            let k = q.checked_sub(self.tiles_at[v]).filter(|&k| k >= 2).ok_or_else(|| {
                Error::Unsupported(format!("boundary vertex {v} cannot take two new tiles"))
            })?;
            outward.push(self.fresh(k - 1));
        }
        let mut next = Vec::new();
        for i in 0..m {
            let v = ring[i];
            let w = outward[i].clone();
            for j in 0..w.len() - 1 {
                let f = self.fresh(p - 3);
                let mut cycle = vec![v, w[j]];
                cycle.extend(&f);
                cycle.push(w[j + 1]);
                next.push(w[j]);
                next.extend(&f);
                self.add_tile(cycle, layer);
            }
            let u = ring[(i + 1) % m];
            let w_last = *w.last().expect("at least one outward edge");
            let w_next = outward[(i + 1) % m][0];
            let f = self.fresh(p - 4);
            let mut cycle = vec![v, u, w_next];
            cycle.extend(f.iter().rev());
            cycle.push(w_last);
            next.push(w_last);
            next.extend(&f);
            self.add_tile(cycle, layer);
        }
        self.boundary = next;
        Ok(())
    }

    fn is_shared(&self, u: usize, v: usize) -> bool {
        self.edge_tiles[&(u.min(v), u.max(v))].len() == 2
    }

    /// `(n_β, n_γ)` per layer, classified by edges shared with the layer below.
    fn layer_types(&self) -> Result<Vec<(u128, u128)>> {
        let top = self.tile_layer.iter().copied().max().unwrap_or(0);
        let mut out = vec![(0u128, 0u128); top + 1];
        for (t, cycle) in self.tiles.iter().enumerate() {
            let l = self.tile_layer[t];
            if l == 0 {
                out[0].0 += 1;
                continue;
            }
            let inward = (0..cycle.len())
                .filter(|&i| {
                    let (u, v) = (cycle[i], cycle[(i + 1) % cycle.len()]);
                    self.edge_tiles[&(u.min(v), u.max(v))]
                        .iter()
                        .any(|&s| s != t && self.tile_layer[s] + 1 == l)
                })
                .count();
            match inward {
                1 => out[l].0 += 1,
                0 => out[l].1 += 1,
                n => {
                    return Err(Error::Unsupported(format!(
                        "tile {t} shares {n} edges with the previous layer"
                    )))
                }
            }
        }
        Ok(out)
    }
}

/// A built patch together with its bookkeeping.
#[derive(Clone, Debug)]
pub struct HyperbolicPatch {
    pub geometry: Geometry,
    pub spec: TilingSpec,
    pub dual: Dual,
    pub n_tiles: usize,
    pub n_tiling_vertices: usize,
    /// Tile types per layer measured on the built patch.
    pub layer_counts: Vec<(u128, u128)>,
    /// Tensor sitting on the seed vertex (vertex dual with a vertex seed only).
    pub center: Option<usize>,
}

/// Grows the patch and converts it to a tensor network geometry.
///
/// Output is deterministic for a given spec. External legs follow the patch
/// boundary cyclically.
pub fn build_hyperbolic_patch(
    spec: TilingSpec,
    dual: Dual,
    a: u64,
    b: u64,
    d: u64,
) -> Result<HyperbolicPatch> {
    spec.validate()?;
    if a == 0 || b == 0 || d == 0 {
        return Err(Error::invalid("dimensions must be at least 1"));
    }
    let (p, q) = (spec.p, spec.q);
    let mut t = if spec.layers == 0 {
        Tiling::seed_tile(p)
    } else {
        match spec.seed {
            Seed::Tile => Tiling::seed_tile(p),
            Seed::Vertex => Tiling::seed_vertex(p, q),
        }
    };
    let first_grown = match (spec.layers, spec.seed) {
        (0, _) => 1,
        (_, Seed::Tile) => 1,
        (_, Seed::Vertex) => 2,
    };
    for layer in first_grown..=spec.layers {
        if t.tiles.len() > 2_000_000 {
            return Err(Error::resource("hyperbolic patch exceeds two million tiles"));
        }
        t.grow(p, q, layer)?;
    }
    let layer_counts = t.layer_types()?;
    let ring = t.boundary.clone();
    let n_ring = ring.len();

    let (geometry, center) = match dual {
        Dual::Tile => {
            let mut edges = Vec::new();
            for tiles in t.edge_tiles.values() {
                if let [s, u] = tiles[..] {
                    edges.push((s, u, b));
                }
            }
            let mut legs = Vec::with_capacity(n_ring);
            for i in 0..n_ring {
                let (u, v) = (ring[i], ring[(i + 1) % n_ring]);
                debug_assert!(!t.is_shared(u, v));
                legs.push((t.edge_tiles[&(u.min(v), u.max(v))][0], a));
            }
            (Geometry::from_parts(&vec![d; t.tiles.len()], &edges, &legs)?, None)
        }
        Dual::Vertex => {
            let n_v = t.tiles_at.len();
            let mut deg = vec![0usize; n_v];
            let mut edges = Vec::new();
            for &(u, v) in t.edge_tiles.keys() {
                edges.push((u, v, b));
                deg[u] += 1;
                deg[v] += 1;
            }
            let mut legs = Vec::new();
            for &v in &ring {
                for _ in 0..q.saturating_sub(deg[v]) {
                    legs.push((v, a));
                }
            }
            let center = (spec.layers > 0 && spec.seed == Seed::Vertex).then_some(0);
            (Geometry::from_parts(&vec![d; n_v], &edges, &legs)?, center)
        }
    };
    Ok(HyperbolicPatch {
        geometry,
        spec,
        dual,
        n_tiles: t.tiles.len(),
        n_tiling_vertices: t.tiles_at.len(),
        layer_counts,
        center,
    })
}
