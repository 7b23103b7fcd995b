//! Inverse effective dimensions of RTN states.
//!
//! For product bulk and reference states the fourth-moment average collapses
//! to an Ising partition function:
//!
//! `1/D_eff = Z / a^n · ∏_k 1/(1 + 1/q_k)`
//!
//! with `a^n` the boundary Hilbert space dimension and `q_k` the tensor
//! dimensions. Everything here is exact rational arithmetic; tensor trains and
//! single tensors also have closed forms, which are kept as an independent
//! route to the same numbers.

use crate::exact::{self, frac, int, Rational};
use crate::geometry::{
    build_hyperbolic_patch, build_rtt, build_single_tensor, build_square_disc, fuse_neighbourhood,
    fuse_vertices, DiscLegs, Dual, Geometry, Seed, TilingSpec,
};
use crate::ising::{self, bound_recursive, elimination_order, partition_exact, OrderKind};
use crate::{Error, Result};
use num_bigint::BigUint;
use num_traits::One;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Enumeration,
    ClosedFormRttOpen,
    ClosedFormRttClosed,
    ClosedFormSingle,
    /// Cap exceeded: only an interval from the recursive partition bounds.
    RecursiveBounds,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GeometrySummary {
    pub n: usize,
    pub n_v: usize,
    pub n_int: usize,
    pub a: Option<u64>,
    pub b: Option<u64>,
    pub d: Option<u64>,
}

impl GeometrySummary {
    pub fn of(g: &Geometry) -> Self {
        GeometrySummary {
            n: g.n_legs(),
            n_v: g.n_vertices(),
            n_int: g.n_internal(),
            a: g.uniform_a(),
            b: g.uniform_b(),
            d: g.uniform_d(),
        }
    }
}

fn opt_rational<S: serde::Serializer>(x: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(x) => exact::serialize(x, s),
        None => s.serialize_none(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EffDimReport {
    /// Exact value; absent when only an interval is known.
    #[serde(serialize_with = "opt_rational")]
    pub inv_deff: Option<Rational>,
    #[serde(serialize_with = "exact::serialize")]
    pub lower: Rational,
    #[serde(serialize_with = "exact::serialize")]
    pub upper: Rational,
    pub inv_deff_float: f64,
    pub method: Method,
    pub geometry_summary: GeometrySummary,
    #[serde(serialize_with = "opt_rational")]
    pub limit_large_b: Option<Rational>,
    #[serde(serialize_with = "opt_rational")]
    pub limit_large_d: Option<Rational>,
}

impl EffDimReport {
    /// The exact value, or an error if only bounds are available.
    pub fn exact(&self) -> Result<&Rational> {
        self.inv_deff
            .as_ref()
            .ok_or_else(|| Error::resource("only an interval is available for this geometry"))
    }

    fn exact_value(g: &Geometry, value: Rational, method: Method, limit_d: Option<Rational>) -> Self {
        EffDimReport {
            inv_deff_float: exact::to_f64(&value),
            lower: value.clone(),
            upper: value.clone(),
            inv_deff: Some(value),
            method,
            geometry_summary: GeometrySummary::of(g),
            limit_large_b: limit_large_b(g).ok(),
            limit_large_d: limit_d,
        }
    }
}

/// `∏_k q_k/(q_k + 1)`.
fn tensor_factor(g: &Geometry) -> Rational {
    (0..g.n_vertices()).fold(Rational::one(), |acc, k| {
        let q = g.tensor_dimension(k);
        acc * exact::from_biguint(&q) / exact::from_biguint(&(q + 1u32))
    })
}

fn boundary(g: &Geometry) -> Rational {
    exact::from_biguint(&g.boundary_dimension())
}

/// `2/(a^n + 1)`, the smallest value any geometry can reach.
pub fn floor(g: &Geometry) -> Rational {
    int(2) / (boundary(g) + int(1))
}

/// Inverse effective dimension of `g` for product bulk and reference states.
///
/// Exact by enumeration up to the Ising cap; beyond it the report carries the
/// interval implied by the recursive partition bounds and `inv_deff = None`.
pub fn inverse_effdim_bound(g: &Geometry) -> Result<EffDimReport> {
    let scale = tensor_factor(g) / boundary(g);
    match partition_exact(g) {
        Ok(z) => {
            let limit_d = &z.exact / boundary(g);
            Ok(EffDimReport::exact_value(g, z.exact * scale, Method::Enumeration, Some(limit_d)))
        }
        Err(e) if e.is_resource_limit() => {
            let order = elimination_order(g, OrderKind::MinDegree);
            let bp = bound_recursive(g, &order)?;
            let lower = bp.lower * &scale;
            let upper = bp.upper * &scale;
            Ok(EffDimReport {
                inv_deff: None,
                inv_deff_float: exact::to_f64(&upper),
                lower,
                upper,
                method: Method::RecursiveBounds,
                geometry_summary: GeometrySummary::of(g),
                limit_large_b: limit_large_b(g).ok(),
                limit_large_d: None,
            })
        }
        Err(e) => Err(e),
    }
}

/// Closed form for tensor trains.
pub fn inverse_effdim_rtt(n: usize, a: u64, b: u64, d: u64, closed: bool) -> Result<Rational> {
    if n < 2 {
        return Err(Error::invalid("tensor train needs n >= 2"));
    }
    if a == 0 || b == 0 || d == 0 {
        return Err(Error::invalid("dimensions must be at least 1"));
    }
    let n64 = n as u64;
    let an = exact::pow(&int(a), n64);
    let one = int(1);
    let t1 = &one + frac(1, a * d * b);
    let t2 = &one + frac(1, a * d * b * b);
    if closed {
        let num = exact::pow(&(&one + frac(1, b)), n64) + exact::pow(&(&one - frac(1, b)), n64);
        Ok(num / (an * exact::pow(&t2, n64)))
    } else {
        let num = int(2) * exact::pow(&(&one + frac(1, b)), n64 - 1);
        Ok(num / (an * &t1 * &t1 * exact::pow(&t2, n64 - 2)))
    }
}

/// Closed form for one tensor with `n` legs: `2/(a^n + 1/d)`.
pub fn inverse_effdim_single(n: usize, a: u64, d: u64) -> Result<Rational> {
    if n < 1 {
        return Err(Error::invalid("single tensor needs n >= 1"));
    }
    if a == 0 || d == 0 {
        return Err(Error::invalid("dimensions must be at least 1"));
    }
    Ok(int(2) / (exact::pow(&int(a), n as u64) + frac(1, d)))
}

/// Recognises geometries laid out exactly as the builders emit tensor trains
/// and single tensors, and evaluates their closed form.
pub fn closed_form(g: &Geometry) -> Option<(Method, Rational)> {
    let a = g.uniform_a()?;
    let d = g.uniform_d()?;
    let n_v = g.n_vertices();
    if n_v == 1 {
        if g.n_legs() == 0 {
            return None;
        }
        return Some((Method::ClosedFormSingle, inverse_effdim_single(g.n_legs(), a, d).ok()?));
    }
    let b = g.uniform_b()?;
    if g.n_legs() != n_v || (0..n_v).any(|k| g.external_legs()[k].vertex != k) {
        return None;
    }
    let open = build_rtt(n_v, false, a, b, d).ok()?;
    let closed = build_rtt(n_v, true, a, b, d).ok()?;
    if g == &open {
        Some((Method::ClosedFormRttOpen, inverse_effdim_rtt(n_v, a, b, d, false).ok()?))
    } else if g == &closed {
        Some((Method::ClosedFormRttClosed, inverse_effdim_rtt(n_v, a, b, d, true).ok()?))
    } else {
        None
    }
}

/// Closed-form report, or `Unsupported` when the geometry has none.
pub fn inverse_effdim_closed_form(g: &Geometry) -> Result<EffDimReport> {
    let (method, value) = closed_form(g)
        .ok_or_else(|| Error::Unsupported("no closed form for this geometry".into()))?;
    Ok(EffDimReport::exact_value(g, value, method, None))
}

/// Large bond dimension limit `2/a^n`; every vertex must carry a bond.
pub fn limit_large_b(g: &Geometry) -> Result<Rational> {
    if let Some(k) = (0..g.n_vertices()).find(|&k| g.degree(k) == 0) {
        return Err(Error::Precondition(format!("vertex {k} has no internal edge")));
    }
    Ok(int(2) / boundary(g))
}

/// Large logical dimension limit `Z/a^n`.
pub fn limit_large_d(g: &Geometry) -> Result<Rational> {
    Ok(partition_exact(g)?.exact / boundary(g))
}

/// Exact `D_eff/D_eff'` for fusing `j` and `k`, with the upper bound
/// `(1+q_j)(1+q_k)/(B² - 1 + (1+q_j)(1+q_k))`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FusionRatio {
    #[serde(serialize_with = "exact::serialize")]
    pub ratio: Rational,
    #[serde(serialize_with = "exact::serialize")]
    pub bound: Rational,
    #[serde(serialize_with = "exact::serialize")]
    pub before: Rational,
    #[serde(serialize_with = "exact::serialize")]
    pub after: Rational,
    /// Product of the bond dimensions removed by the fusion.
    pub bond: u64,
}

pub fn fusion_ratio(g: &Geometry, j: usize, k: usize) -> Result<FusionRatio> {
    let fused = fuse_vertices(g, j, k)?;
    let bond: u64 = g.edges_between(j, k).iter().map(|&e| g.internal_edges()[e].b).product();
    let z = partition_exact(g)?.exact;
    let z_fused = partition_exact(&fused.geometry)?.exact;
    let qr = |x: BigUint| exact::from_biguint(&x);
    let (qj, qk) = (qr(g.tensor_dimension(j)), qr(g.tensor_dimension(k)));
    let qjk = qr(fused.geometry.tensor_dimension(fused.merged));
    let one = int(1);
    let ratio = &z_fused * (&one + &one / &qj) * (&one + &one / &qk) / (&z * (&one + &one / &qjk));
    let pj = &one + &qj;
    let pk = &one + &qk;
    let bb = int(bond) * int(bond);
    let bound = &pj * &pk / (bb - &one + &pj * &pk);
    let before = inverse_effdim_bound(g)?.exact()?.clone();
    let after = inverse_effdim_bound(&fused.geometry)?.exact()?.clone();
    Ok(FusionRatio { ratio, bound, before, after, bond })
}

/// The geometries compared in the hierarchy experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HierarchyGeometry {
    /// Closed tensor train.
    Rtt,
    /// Diamond cut of the square lattice.
    SquareDisc,
    /// {5,4} patch.
    HyperbolicPatch,
    /// The same patch with its central neighbourhood fused into one tensor.
    BlackHoleCenter,
    SingleTensor,
}

impl HierarchyGeometry {
    pub const ALL: [HierarchyGeometry; 5] = [
        HierarchyGeometry::Rtt,
        HierarchyGeometry::SquareDisc,
        HierarchyGeometry::HyperbolicPatch,
        HierarchyGeometry::BlackHoleCenter,
        HierarchyGeometry::SingleTensor,
    ];

    pub fn name(self) -> &'static str {
        match self {
            HierarchyGeometry::Rtt => "rtt",
            HierarchyGeometry::SquareDisc => "square-disc",
            HierarchyGeometry::HyperbolicPatch => "hyperbolic-patch",
            HierarchyGeometry::BlackHoleCenter => "black-hole-center",
            HierarchyGeometry::SingleTensor => "single-tensor",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|g| g.name() == name)
            .ok_or_else(|| Error::invalid(format!("unknown hierarchy geometry '{name}'")))
    }

    /// Builds the member of this family with `n` legs, a = b and d = 1.
    pub fn build(self, n: usize, b: u64) -> Result<Geometry> {
        match self {
            HierarchyGeometry::Rtt => build_rtt(n, true, b, b, 1),
            HierarchyGeometry::SingleTensor => build_single_tensor(n, b, 1),
            HierarchyGeometry::SquareDisc => {
                let legs = if n % 8 == 4 { DiscLegs::CutBond } else { DiscLegs::BoundaryVertex };
                Ok(build_square_disc(n, legs, b, b, 1)?.geometry)
            }
            HierarchyGeometry::HyperbolicPatch => hyperbolic_with_legs(n, b),
            HierarchyGeometry::BlackHoleCenter => {
                Ok(fuse_neighbourhood(&hyperbolic_with_legs(n, b)?, 0)?.geometry)
            }
        }
    }
}

/// Smallest {5,4} patch with exactly `n` legs over both duals and seeds.
fn hyperbolic_with_legs(n: usize, b: u64) -> Result<Geometry> {
    let mut best: Option<Geometry> = None;
    for layers in 1..=3 {
        for seed in [Seed::Vertex, Seed::Tile] {
            for dual in [Dual::Vertex, Dual::Tile] {
                let spec = TilingSpec { p: 5, q: 4, layers, seed };
                let g = build_hyperbolic_patch(spec, dual, b, b, 1)?.geometry;
                if g.n_legs() == n && best.as_ref().is_none_or(|h| g.n_vertices() < h.n_vertices()) {
                    best = Some(g);
                }
            }
        }
    }
    best.ok_or_else(|| Error::invalid(format!("no small {{5,4}} patch has exactly {n} legs")))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HierarchyRow {
    pub geometry_name: String,
    pub b: u64,
    pub a: u64,
    pub n: usize,
    pub n_v: usize,
    /// `a^n / D_eff`; the upper end of the interval when only bounds exist.
    #[serde(serialize_with = "exact::serialize")]
    pub inv_deff_scaled: Rational,
    pub scaled_float: f64,
    pub method: Method,
}

/// `a^n/D_eff` for every geometry and every `b` in `b_range`, with a = b and
/// d = 1.
pub fn hierarchy_table(
    n: usize,
    b_range: std::ops::RangeInclusive<u64>,
    geometries: &[HierarchyGeometry],
) -> Result<Vec<HierarchyRow>> {
    let jobs: Vec<(HierarchyGeometry, u64)> =
        geometries.iter().flat_map(|&g| b_range.clone().map(move |b| (g, b))).collect();
    jobs.par_iter()
        .map(|&(kind, b)| {
            let g = kind.build(n, b)?;
            let report = match kind {
                HierarchyGeometry::Rtt | HierarchyGeometry::SingleTensor => {
                    inverse_effdim_closed_form(&g)?
                }
                _ => inverse_effdim_bound(&g)?,
            };
            let scaled = &report.upper * boundary(&g);
            Ok(HierarchyRow {
                geometry_name: kind.name().to_string(),
                b,
                a: b,
                n: g.n_legs(),
                n_v: g.n_vertices(),
                scaled_float: exact::to_f64(&scaled),
                inv_deff_scaled: scaled,
                method: report.method,
            })
        })
        .collect()
}

/// Both sides of the tensor-train versus hyperbolic comparison at bond `b`:
/// `((1+1/b)^{1/2} (1+1/b²)^{(√3-1)/2}, (b+1)/(b + 1/(2b)))`.
pub fn crossover_sides(b: f64) -> (f64, f64) {
    let lhs = (1.0 + 1.0 / b).sqrt() * (1.0 + 1.0 / (b * b)).powf((3f64.sqrt() - 1.0) / 2.0);
    let rhs = (b + 1.0) / (b + 1.0 / (2.0 * b));
    (lhs, rhs)
}

/// Bond dimension above which the hyperbolic bound drops below the tensor
/// train value; bisection on [1, 3] to 1e-6.
pub fn rtt_hyperbolic_crossover() -> f64 {
    let f = |b: f64| {
        let (l, r) = crossover_sides(b);
        l - r
    };
    let (mut lo, mut hi) = (1.0, 3.0);
    assert!(f(lo) > 0.0 && f(hi) < 0.0, "crossover is not bracketed by [1, 3]");
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Fourth-moment constants of the two-tensor network with `q = abd`:
/// unitary tensors `2(b²+b)/(q²(q+1)²)`, real orthogonal tensors
/// `(3b²+6b)/(q²(q+2)²)`.
pub fn coe_two_tensor_constant(a: u64, b: u64, d: u64) -> (Rational, Rational) {
    let q = a * b * d;
    let cue = frac(2 * (b * b + b), q * q * (q + 1) * (q + 1));
    let coe = frac(3 * b * b + 6 * b, q * q * (q + 2) * (q + 2));
    (cue, coe)
}

/// Re-exported for callers that only need the partition function.
pub use ising::PartitionValue;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_examples() {
        let g = build_rtt(3, false, 2, 2, 1).unwrap();
        let r = inverse_effdim_bound(&g).unwrap();
        assert_eq!(r.exact().unwrap(), &frac(8, 25));
        assert_eq!(r.method, Method::Enumeration);
        let g = build_single_tensor(5, 2, 1).unwrap();
        assert_eq!(inverse_effdim_bound(&g).unwrap().exact().unwrap(), &frac(2, 33));
        let g = build_rtt(5, true, 2, 2, 1).unwrap();
        let r = inverse_effdim_bound(&g).unwrap();
        assert_eq!(r.exact().unwrap(), &frac(7808, 59049));
        assert!((r.inv_deff_float - 0.13222).abs() < 1e-5);
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(inverse_effdim_rtt(3, 2, 2, 1, false).unwrap(), frac(8, 25));
        assert_eq!(inverse_effdim_rtt(5, 2, 2, 1, true).unwrap(), frac(7808, 59049));
        assert_eq!(inverse_effdim_rtt(2, 2, 2, 1, false).unwrap(), frac(12, 25));
        assert_eq!(inverse_effdim_single(5, 2, 1).unwrap(), frac(2, 33));
        assert_eq!(inverse_effdim_single(1, 2, 1).unwrap(), frac(2, 3));
        let huge_d = inverse_effdim_single(5, 2, 1 << 40).unwrap();
        assert!((exact::to_f64(&huge_d) - 2.0 / 32.0).abs() < 1e-12);
        // b = 1: every bond is a product, Z = 2^n.
        let g = build_rtt(4, true, 3, 1, 2).unwrap();
        assert_eq!(
            inverse_effdim_rtt(4, 3, 1, 2, true).unwrap(),
            inverse_effdim_bound(&g).unwrap().exact().unwrap().clone()
        );
    }

    #[test]
    fn closed_form_recognition() {
        let g = build_rtt(6, true, 2, 3, 1).unwrap();
        let r = inverse_effdim_closed_form(&g).unwrap();
        assert_eq!(r.method, Method::ClosedFormRttClosed);
        assert_eq!(r.inv_deff, inverse_effdim_bound(&g).unwrap().inv_deff);
        let tri = Geometry::from_parts(&[1, 1, 1], &[(0, 1, 2), (0, 2, 2)], &[(0, 2), (1, 2), (2, 2)]).unwrap();
        assert!(inverse_effdim_closed_form(&tri).is_err());
    }

    #[test]
    fn limits() {
        let g = build_rtt(5, true, 2, 2, 1).unwrap();
        assert_eq!(limit_large_b(&g).unwrap(), frac(2, 32));
        let tri = Geometry::from_parts(&[1, 1, 1], &[(0, 1, 2), (1, 2, 2), (0, 2, 2)], &[(0, 2), (1, 2), (2, 2)]).unwrap();
        assert_eq!(limit_large_d(&tri).unwrap(), frac(7, 16));
        let single = build_single_tensor(5, 2, 1).unwrap();
        assert_eq!(limit_large_d(&single).unwrap(), frac(2, 32));
        assert!(matches!(limit_large_b(&single), Err(Error::Precondition(_))));
    }

    #[test]
    fn fusion_ratio_examples() {
        let g = build_rtt(2, false, 2, 2, 1).unwrap();
        let f = fusion_ratio(&g, 0, 1).unwrap();
        assert_eq!(f.before, frac(12, 25));
        assert_eq!(f.after, frac(2, 5));
        assert_eq!(f.ratio, frac(5, 6));
        assert_eq!(&f.after / &f.before, f.ratio);
        assert!(f.ratio <= f.bound);
        // A unit bond still changes the state distribution; the bound is 1.
        let g = build_rtt(2, false, 2, 1, 1).unwrap();
        let f = fusion_ratio(&g, 0, 1).unwrap();
        assert_eq!(f.bound, int(1));
        assert_eq!(f.ratio, frac(9, 10));
    }

    #[test]
    fn interval_beyond_cap() {
        let g = build_rtt(26, false, 2, 2, 1).unwrap();
        let r = inverse_effdim_bound(&g).unwrap();
        assert_eq!(r.method, Method::RecursiveBounds);
        assert!(r.inv_deff.is_none());
        // A chain has coinciding bounds, so the interval collapses on the closed form.
        let exact = inverse_effdim_rtt(26, 2, 2, 1, false).unwrap();
        assert_eq!(r.lower, exact);
        assert_eq!(r.upper, exact);
    }

    #[test]
    fn crossover() {
        let b = rtt_hyperbolic_crossover();
        assert!((b - 1.968).abs() < 1e-3, "{b}");
        let (l, r) = crossover_sides(2.0);
        assert!(l < r);
        let (l, r) = crossover_sides(1.5);
        assert!(l > r);
    }

    #[test]
    fn two_tensor_constants() {
        assert_eq!(coe_two_tensor_constant(2, 2, 1), (frac(3, 100), frac(1, 24)));
        let q = 5u64;
        assert_eq!(
            coe_two_tensor_constant(5, 1, 1),
            (frac(4, q * q * (q + 1) * (q + 1)), frac(9, q * q * (q + 2) * (q + 2)))
        );
    }

    #[test]
    fn hierarchy_small() {
        let rows = hierarchy_table(20, 2..=2, &HierarchyGeometry::ALL).unwrap();
        assert_eq!(rows.len(), 5);
        for r in &rows {
            assert_eq!(r.n, 20, "{}", r.geometry_name);
            assert!(r.scaled_float > 1.0);
        }
        let single = rows.iter().find(|r| r.geometry_name == "single-tensor").unwrap();
        let an = exact::pow(&int(2), 20);
        assert_eq!(single.inv_deff_scaled, int(2) * &an / (&an + int(1)));
    }
}
