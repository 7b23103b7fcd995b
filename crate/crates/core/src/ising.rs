//! Rescaled classical Ising partition functions on RTN graphs.
//!
//! A spin `σ_k = ±1` sits on every vertex. An internal edge contributes 1 when
//! its spins agree and `1/b_e` otherwise; in the boundary-field variant every
//! external leg on a down spin contributes a further `1/a`. Values are exact
//! big rationals.
//!
//! Exact evaluation enumerates configurations in Gray-code order, tracking how
//! many anti-aligned terms each distinct weight has. The histogram of those
//! counts is folded into a rational once at the end, so the sum is exact and
//! independent of how the configuration space was split across threads.

use crate::exact::{self, frac, int, Rational};
use crate::geometry::{fuse_vertices, Geometry};
use crate::{Error, Result};
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashMap;

/// Largest vertex count accepted by default for exact enumeration.
pub const DEFAULT_CAP: usize = 24;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartitionValue {
    #[serde(serialize_with = "exact::serialize")]
    pub exact: Rational,
    /// Natural log of `exact`.
    pub log_value: f64,
}

impl PartitionValue {
    fn new(exact: Rational) -> Self {
        let log_value = exact::ln(&exact);
        PartitionValue { exact, log_value }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundPair {
    #[serde(serialize_with = "exact::serialize")]
    pub lower: Rational,
    #[serde(serialize_with = "exact::serialize")]
    pub upper: Rational,
}

impl BoundPair {
    pub fn contains(&self, x: &Rational) -> bool {
        &self.lower <= x && x <= &self.upper
    }
}

/// Spin model compiled from a geometry: neighbour lists tagged with a weight
/// class, plus per-vertex field terms.
struct SpinModel {
    n: usize,
    bonds: Vec<Vec<(usize, usize)>>,
    field: Vec<Vec<usize>>,
    weights: Vec<u64>,
    totals: Vec<u32>,
    symmetric: bool,
}

impl SpinModel {
    fn compile(g: &Geometry, with_field: bool) -> Self {
        let mut weights: Vec<u64> = g.internal_edges().iter().map(|e| e.b).collect();
        if with_field {
            weights.extend(g.external_legs().iter().map(|l| l.a));
        }
        weights.retain(|&w| w > 1);
        weights.sort_unstable();
        weights.dedup();
        let class = |w: u64| weights.binary_search(&w).ok();
        let mut totals = vec![0u32; weights.len()];
        let n = g.n_vertices();
        let mut bonds = vec![Vec::new(); n];
        for e in g.internal_edges() {
            if let Some(c) = class(e.b) {
                bonds[e.u].push((e.v, c));
                bonds[e.v].push((e.u, c));
                totals[c] += 1;
            }
        }
        let mut field = vec![Vec::new(); n];
        if with_field {
            for l in g.external_legs() {
                if let Some(c) = class(l.a) {
                    field[l.vertex].push(c);
                    totals[c] += 1;
                }
            }
        }
        let symmetric = field.iter().all(|f| f.is_empty());
        SpinModel { n, bonds, field, weights, totals, symmetric }
    }

    fn strides(&self) -> (Vec<usize>, Option<usize>) {
        let mut strides = Vec::with_capacity(self.totals.len());
        let mut size: Option<usize> = Some(1);
        for &t in &self.totals {
            strides.push(size.unwrap_or(0));
            size = size.and_then(|s| s.checked_mul(t as usize + 1));
        }
        (strides, size)
    }

    /// Anti-aligned term counts per class for a full configuration.
    fn counts(&self, down: &[bool]) -> Vec<u32> {
        let mut c = vec![0u32; self.totals.len()];
        for v in 0..self.n {
            for &(w, cl) in &self.bonds[v] {
                if v < w && down[v] != down[w] {
                    c[cl] += 1;
                }
            }
            if down[v] {
                for &cl in &self.field[v] {
                    c[cl] += 1;
                }
            }
        }
        c
    }

    /// Histogram of count vectors over all enumerated configurations.
    fn histogram(&self) -> HashMap<Vec<u32>, u64> {
        let free: Vec<usize> = if self.symmetric { (1..self.n).collect() } else { (0..self.n).collect() };
        let f = free.len();
        let top = f.min(8);
        let low = f - top;
        let (strides, size) = self.strides();
        let dense = size.filter(|&s| s <= 1 << 22);

        let chunk = |c: usize| -> HashMap<Vec<u32>, u64> {
            let mut down = vec![false; self.n];
            for (i, &v) in free[low..].iter().enumerate() {
                down[v] = (c >> i) & 1 == 1;
            }
            let mut counts = self.counts(&down);
            let flip = |v: usize, down: &mut [bool], counts: &mut [u32]| {
                for &(w, cl) in &self.bonds[v] {
                    if down[v] == down[w] {
                        counts[cl] += 1;
                    } else {
                        counts[cl] -= 1;
                    }
                }
                for &cl in &self.field[v] {
                    if down[v] {
                        counts[cl] -= 1;
                    } else {
                        counts[cl] += 1;
                    }
                }
                down[v] = !down[v];
            };
            match dense {
                Some(size) => {
                    let mut hist = vec![0u64; size];
                    let index = |counts: &[u32]| {
                        counts.iter().zip(&strides).map(|(&c, &s)| c as usize * s).sum::<usize>()
                    };
                    hist[index(&counts)] += 1;
                    for step in 1u64..(1u64 << low) {
                        let v = free[step.trailing_zeros() as usize];
                        flip(v, &mut down, &mut counts);
                        hist[index(&counts)] += 1;
                    }
                    let mut out = HashMap::new();
                    for (idx, &h) in hist.iter().enumerate() {
                        if h > 0 {
                            let key = strides
                                .iter()
                                .zip(&self.totals)
                                .map(|(&s, &t)| ((idx / s) % (t as usize + 1)) as u32)
                                .collect();
                            out.insert(key, h);
                        }
                    }
                    out
                }
                None => {
                    let mut out: HashMap<Vec<u32>, u64> = HashMap::new();
                    *out.entry(counts.clone()).or_default() += 1;
                    for step in 1u64..(1u64 << low) {
                        let v = free[step.trailing_zeros() as usize];
                        flip(v, &mut down, &mut counts);
                        *out.entry(counts.clone()).or_default() += 1;
                    }
                    out
                }
            }
        };

        let parts: Vec<HashMap<Vec<u32>, u64>> = (0..1usize << top).into_par_iter().map(chunk).collect();
        let mut total: HashMap<Vec<u32>, u64> = HashMap::new();
        for part in parts {
            for (k, v) in part {
                *total.entry(k).or_default() += v;
            }
        }
        total
    }

    fn evaluate(&self) -> Rational {
        let hist = self.histogram();
        let powers: Vec<Vec<BigUint>> = self
            .weights
            .iter()
            .zip(&self.totals)
            .map(|(&w, &t)| {
                let mut p = vec![BigUint::one()];
                for i in 0..t as usize {
                    let next = &p[i] * w;
                    p.push(next);
                }
                p
            })
            .collect();
        let mut numer = BigUint::zero();
        for (counts, mult) in &hist {
            let mut term = BigUint::from(*mult);
            for (c, (&k, &t)) in counts.iter().zip(&self.totals).enumerate() {
                term *= &powers[c][(t - k) as usize];
            }
            numer += term;
        }
        let denom = powers.iter().map(|p| p.last().unwrap().clone()).fold(BigUint::one(), |a, b| a * b);
        let factor = if self.symmetric { 2u32 } else { 1 };
        Rational::new(BigInt::from(numer * factor), BigInt::from(denom))
    }
}

fn check_cap(g: &Geometry, cap: usize) -> Result<()> {
    if g.n_vertices() > cap {
        return Err(Error::resource(format!(
            "{} vertices exceed the enumeration cap of {cap}; use the recursive bounds or a closed form",
            g.n_vertices()
        )));
    }
    Ok(())
}

/// Exact `Z = Σ_σ ∏_edges b_e^{(σ_u σ_v - 1)/2}` with the default cap.
pub fn partition_exact(g: &Geometry) -> Result<PartitionValue> {
    partition_exact_with_cap(g, DEFAULT_CAP)
}

pub fn partition_exact_with_cap(g: &Geometry, cap: usize) -> Result<PartitionValue> {
    check_cap(g, cap)?;
    Ok(PartitionValue::new(SpinModel::compile(g, false).evaluate()))
}

/// Partition function in which every external leg on a down spin pays `1/a`.
pub fn partition_with_boundary_field(g: &Geometry) -> Result<PartitionValue> {
    partition_with_boundary_field_with_cap(g, DEFAULT_CAP)
}

pub fn partition_with_boundary_field_with_cap(g: &Geometry, cap: usize) -> Result<PartitionValue> {
    check_cap(g, cap)?;
    Ok(PartitionValue::new(SpinModel::compile(g, true).evaluate()))
}

/// Vertex removal orders for [`bound_recursive`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrderKind {
    Natural,
    /// Repeatedly remove a vertex of least remaining degree (lowest id on ties).
    MinDegree,
    /// Repeatedly remove a vertex of greatest remaining degree.
    MaxDegree,
}

pub fn elimination_order(g: &Geometry, kind: OrderKind) -> Vec<usize> {
    let n = g.n_vertices();
    if kind == OrderKind::Natural {
        return (0..n).collect();
    }
    let adj = g.adjacency();
    let mut removed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let live_degree = |v: usize| adj[v].iter().filter(|&&w| !removed[w]).count();
        let candidates = (0..n).filter(|&v| !removed[v]);
        let v = match kind {
            OrderKind::MinDegree => candidates.min_by_key(|&v| (live_degree(v), v)),
            _ => candidates.max_by_key(|&v| (live_degree(v), std::cmp::Reverse(v))),
        }
        .expect("vertex left");
        removed[v] = true;
        order.push(v);
    }
    order
}

/// Bounds from removing vertices one at a time.
///
/// Removing a vertex with `m` edges into the not-yet-removed part multiplies
/// the remaining partition function by a factor between
/// `b^{-⌈m/2⌉} + b^{-⌊m/2⌋}` and `1 + b^{-m}`.
pub fn bound_recursive(g: &Geometry, order: &[usize]) -> Result<BoundPair> {
    let n = g.n_vertices();
    let mut seen = vec![false; n];
    if order.len() != n || order.iter().any(|&v| v >= n || std::mem::replace(&mut seen[v], true)) {
        return Err(Error::invalid("elimination order must be a permutation of the vertices"));
    }
    let b = match g.n_internal() {
        0 => 1,
        _ => g.uniform_b().ok_or_else(|| {
            Error::Unsupported("recursive bounds need a single bond dimension".into())
        })?,
    };
    let inv = |e: u64| Rational::one() / exact::pow(&int(b), e);
    let adj = g.adjacency();
    let mut removed = vec![false; n];
    let mut lower = int(1);
    let mut upper = int(1);
    for &k in order {
        let m = adj[k].iter().filter(|&&w| !removed[w]).count() as u64;
        lower *= inv(m.div_ceil(2)) + inv(m / 2);
        upper *= int(1) + inv(m);
        removed[k] = true;
    }
    Ok(BoundPair { lower, upper })
}

/// Closed-form bounds for the `L × L` open square lattice.
pub fn bound_square(l: usize, b: u64) -> Result<BoundPair> {
    if l < 2 {
        return Err(Error::invalid("square lattice bounds need L >= 2"));
    }
    if b == 0 {
        return Err(Error::invalid("bond dimension must be at least 1"));
    }
    let m = (l - 1) as u64;
    let edge = int(2) * exact::pow(&(int(1) + frac(1, b)), 2 * m);
    Ok(BoundPair {
        lower: &edge * exact::pow(&frac(2, b), m * m),
        upper: &edge * exact::pow(&(int(1) + frac(1, b * b)), m * m),
    })
}

/// Large-n bounds on `Z` for a {p,q} patch with `n` boundary legs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HyperbolicBound {
    /// ln of the {p,q}-specific bound.
    pub ln_specific: f64,
    /// ln of the universal bound (the {4,5} maximiser).
    pub ln_universal: f64,
    /// The smaller of the two.
    pub bound: f64,
}

/// Hyperbolic bounds; irrational exponents make these floating point.
pub fn bound_hyperbolic(p: usize, q: usize, n: usize, b: f64) -> Result<HyperbolicBound> {
    if p <= 3 || q <= 3 {
        return Err(Error::invalid(format!("{{{p},{q}}}: bounds need p, q > 3")));
    }
    let r = crate::geometry::asymptotic_rate(p, q)?;
    if !(b >= 1.0) {
        return Err(Error::invalid("bond dimension must be at least 1"));
    }
    let (l1, l2) = ((1.0 / b).ln_1p(), (1.0 / (b * b)).ln_1p());
    let pf = p as f64;
    let n = n as f64;
    let ln_specific = n * (0.5 * (r * (4.0 - pf) + 1.0) * l1 + 0.5 * (r * (pf - 2.0) - 1.0) * l2);
    let ln_universal = n * (0.5 * l1 + 0.5 * (3f64.sqrt() - 1.0) * l2);
    Ok(HyperbolicBound { ln_specific, ln_universal, bound: ln_specific.min(ln_universal).exp() })
}

/// Lower bound on `ΔZ/Z'` for fusing `j` and `k`, checked against enumeration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FusionDelta {
    #[serde(serialize_with = "exact::serialize")]
    pub bound: Rational,
    #[serde(serialize_with = "exact::serialize")]
    pub z: Rational,
    #[serde(serialize_with = "exact::serialize")]
    pub z_fused: Rational,
    /// `(Z - Z') / Z'`.
    #[serde(serialize_with = "exact::serialize")]
    pub delta_ratio: Rational,
    pub holds: bool,
}

/// `(q_j + q_k)/(B² + q_j q_k)` with `B` the product of all `j-k` bond
/// dimensions, together with the exact `ΔZ/Z'`.
pub fn fusion_delta_ratio_bound(g: &Geometry, j: usize, k: usize) -> Result<FusionDelta> {
    let fused = fuse_vertices(g, j, k)?;
    let bond: BigUint = g.edges_between(j, k).iter().map(|&e| BigUint::from(g.internal_edges()[e].b)).product();
    let (qj, qk) = (g.tensor_dimension(j), g.tensor_dimension(k));
    let bound = exact::from_biguint(&(&qj + &qk)) / exact::from_biguint(&(&bond * &bond + &qj * &qk));
    let z = partition_exact(g)?.exact;
    let z_fused = partition_exact(&fused.geometry)?.exact;
    let delta_ratio = (&z - &z_fused) / &z_fused;
    let holds = delta_ratio >= bound;
    Ok(FusionDelta { bound, z, z_fused, delta_ratio, holds })
}
