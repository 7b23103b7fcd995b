//! Dense contraction of sampled random tensor networks and Monte-Carlo checks
//! of their Weingarten moments.
//!
//! Each vertex tensor is a normalised complex Gaussian vector of length `q_k`,
//! which has the law of the first column of a Haar unitary. The orthogonal
//! variant uses a real Gaussian vector instead (first column of a Haar
//! orthogonal matrix). Legs of a vertex tensor are ordered as: external legs
//! by ascending leg index, internal legs by ascending edge id, logical leg
//! last, with row-major strides. Internal edges are contracted against the
//! unnormalised pair `Σ_m |mm⟩`; logical legs are projected on `⟨Φ|`.
//!
//! The final state is indexed row-major over external legs in leg order, so
//! leg 0 is the most significant digit.

use crate::exact::{self, from_biguint, Rational};
use crate::geometry::Geometry;
use crate::ising::{partition_exact, partition_with_boundary_field};
use crate::rng::{self, Rng};
use crate::stats::Accumulator;
use crate::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::{One, ToPrimitive};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

pub type C64 = Complex64;

/// Largest dense tensor (in complex entries) built during a contraction.
pub const MAX_ENTRIES: usize = 1 << 26;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TensorKind {
    /// Column of a Haar unitary.
    #[default]
    Unitary,
    /// Column of a Haar orthogonal matrix.
    Orthogonal,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub enum BulkState {
    /// `|0⟩` on every logical leg.
    #[default]
    Product,
    /// Dense vector over the logical legs, vertex 0 most significant.
    Dense(Vec<C64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RtnSample {
    /// Unnormalised state over the external legs.
    pub state: Vec<C64>,
    pub leg_dims: Vec<usize>,
    pub seed: u64,
}

impl RtnSample {
    pub fn norm_sqr(&self) -> f64 {
        self.state.iter().map(|x| x.norm_sqr()).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Label {
    Ext(usize),
    Bond(usize),
    Logical(usize),
}

#[derive(Clone, Debug)]
struct Tensor {
    data: Vec<C64>,
    labels: Vec<Label>,
    dims: Vec<usize>,
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

impl Tensor {
    /// Reorders axes so that axis `i` of the result is axis `order[i]` of `self`.
    fn permute(&self, order: &[usize]) -> Tensor {
        if order.iter().enumerate().all(|(i, &o)| i == o) {
            return self.clone();
        }
        let old = strides(&self.dims);
        let dims: Vec<usize> = order.iter().map(|&o| self.dims[o]).collect();
        let step: Vec<usize> = order.iter().map(|&o| old[o]).collect();
        let mut data = Vec::with_capacity(self.data.len());
        let mut idx = vec![0usize; dims.len()];
        let mut offset = 0usize;
        for _ in 0..self.data.len() {
            data.push(self.data[offset]);
            for ax in (0..dims.len()).rev() {
                idx[ax] += 1;
                offset += step[ax];
                if idx[ax] < dims[ax] {
                    break;
                }
                offset -= step[ax] * dims[ax];
                idx[ax] = 0;
            }
        }
        Tensor { data, labels: order.iter().map(|&o| self.labels[o]).collect(), dims }
    }

    /// Fixes the last axis to index 0.
    fn drop_last_at_zero(self) -> Tensor {
        let d = *self.dims.last().expect("tensor has a logical leg");
        let data = self.data.into_iter().step_by(d).collect();
        let mut labels = self.labels;
        let mut dims = self.dims;
        labels.pop();
        dims.pop();
        Tensor { data, labels, dims }
    }
}

/// Sums over every label shared by `a` and `b`.
fn contract(a: &Tensor, b: &Tensor) -> Tensor {
    let shared: Vec<Label> = a.labels.iter().copied().filter(|l| b.labels.contains(l)).collect();
    let pos = |t: &Tensor, l: Label| t.labels.iter().position(|&x| x == l).expect("label present");
    let free_a: Vec<usize> = (0..a.labels.len()).filter(|&i| !shared.contains(&a.labels[i])).collect();
    let free_b: Vec<usize> = (0..b.labels.len()).filter(|&i| !shared.contains(&b.labels[i])).collect();
    let mut order_a = free_a.clone();
    order_a.extend(shared.iter().map(|&l| pos(a, l)));
    let mut order_b: Vec<usize> = shared.iter().map(|&l| pos(b, l)).collect();
    order_b.extend(&free_b);
    let pa = a.permute(&order_a);
    let pb = b.permute(&order_b);
    let s: usize = shared.iter().map(|&l| a.dims[pos(a, l)]).product();
    let m = pa.data.len() / s;
    let n = pb.data.len() / s;
    // Row-major (m×s) is column-major (s×m), so Cᵀ = Bᵀ Aᵀ in nalgebra's layout.
    let at = DMatrix::from_vec(s, m, pa.data);
    let bt = DMatrix::from_vec(n, s, pb.data);
    let ct = bt * at;
    let mut labels: Vec<Label> = free_a.iter().map(|&i| a.labels[i]).collect();
    labels.extend(free_b.iter().map(|&i| b.labels[i]));
    let mut dims: Vec<usize> = free_a.iter().map(|&i| a.dims[i]).collect();
    dims.extend(free_b.iter().map(|&i| b.dims[i]));
    Tensor { data: ct.data.into(), labels, dims }
}

/// Vertex visiting order and leg layout, validated once per geometry.
#[derive(Clone, Debug)]
pub struct ContractionPlan {
    order: Vec<usize>,
    /// Per vertex: labels and dims of its tensor in the fixed leg order.
    layouts: Vec<(Vec<Label>, Vec<usize>)>,
    leg_dims: Vec<usize>,
    bulk: BulkState,
    bulk_dims: Vec<usize>,
}

fn to_usize(x: u64, what: &str) -> Result<usize> {
    usize::try_from(x).map_err(|_| Error::resource(format!("{what} {x} does not fit in memory")))
}

impl ContractionPlan {
    pub fn new(g: &Geometry, bulk: BulkState) -> Result<Self> {
        let boundary = g.boundary_dimension();
        if boundary > MAX_ENTRIES.into() {
            return Err(Error::resource(format!(
                "state dimension {boundary} exceeds the dense limit of {MAX_ENTRIES} entries"
            )));
        }
        let bulk_dims: Vec<usize> =
            g.vertices().iter().map(|v| to_usize(v.d, "logical dimension")).collect::<Result<_>>()?;
        if let BulkState::Dense(v) = &bulk {
            if g.bulk_dimension() != v.len().into() {
                return Err(Error::invalid(format!(
                    "bulk state has {} entries, geometry needs {}",
                    v.len(),
                    g.bulk_dimension()
                )));
            }
        }
        let mut layouts = Vec::with_capacity(g.n_vertices());
        for k in 0..g.n_vertices() {
            let q = g.tensor_dimension(k);
            if q > MAX_ENTRIES.into() {
                return Err(Error::resource(format!("tensor {k} has dimension {q} over the dense limit")));
            }
            let mut labels = Vec::new();
            let mut dims = Vec::new();
            for l in g.legs_of(k) {
                labels.push(Label::Ext(l));
                dims.push(to_usize(g.external_legs()[l].a, "leg dimension")?);
            }
            for e in g.incident_edges(k) {
                labels.push(Label::Bond(e));
                dims.push(to_usize(g.internal_edges()[e].b, "bond dimension")?);
            }
            labels.push(Label::Logical(k));
            dims.push(bulk_dims[k]);
            layouts.push((labels, dims));
        }
        // Breadth-first from vertex 0 keeps the open boundary of the running
        // tensor small on chains and grids.
        let adj = g.adjacency();
        let mut seen = vec![false; g.n_vertices()];
        let mut order = vec![0];
        seen[0] = true;
        let mut head = 0;
        while head < order.len() {
            let v = order[head];
            head += 1;
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    order.push(w);
                }
            }
        }
        let leg_dims: Vec<usize> =
            g.external_legs().iter().map(|l| to_usize(l.a, "leg dimension")).collect::<Result<_>>()?;
        let plan = ContractionPlan { order, layouts, leg_dims, bulk, bulk_dims };
        plan.check_intermediates()?;
        Ok(plan)
    }

    fn keeps_logical(&self) -> bool {
        matches!(self.bulk, BulkState::Dense(_))
    }

    fn check_intermediates(&self) -> Result<()> {
        let mut open: Vec<(Label, usize)> = Vec::new();
        for &k in &self.order {
            let (labels, dims) = &self.layouts[k];
            for (&l, &d) in labels.iter().zip(dims) {
                if matches!(l, Label::Logical(_)) && !self.keeps_logical() {
                    continue;
                }
                if let Some(p) = open.iter().position(|&(x, _)| x == l) {
                    open.remove(p);
                } else {
                    open.push((l, d));
                }
            }
            let size = open.iter().try_fold(1usize, |acc, &(_, d)| acc.checked_mul(d));
            if size.is_none_or(|s| s > MAX_ENTRIES) {
                return Err(Error::resource(format!(
                    "intermediate tensor after vertex {k} exceeds {MAX_ENTRIES} entries"
                )));
            }
        }
        Ok(())
    }

    pub fn leg_dims(&self) -> &[usize] {
        &self.leg_dims
    }

    pub fn state_dim(&self) -> usize {
        self.leg_dims.iter().product()
    }

    fn sample_tensor(&self, k: usize, kind: TensorKind, rng: &mut Rng) -> Tensor {
        let (labels, dims) = &self.layouts[k];
        let q: usize = dims.iter().product();
        let mut data: Vec<C64> = match kind {
            TensorKind::Unitary => (0..q)
                .map(|_| C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
                .collect(),
            TensorKind::Orthogonal => (0..q).map(|_| C64::new(StandardNormal.sample(rng), 0.0)).collect(),
        };
        let norm = data.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        data.iter_mut().for_each(|x| *x /= norm);
        Tensor { data, labels: labels.clone(), dims: dims.clone() }
    }

    /// Draws every vertex tensor in vertex-id order, then contracts.
    pub fn sample(&self, kind: TensorKind, rng: &mut Rng) -> Vec<C64> {
        let tensors: Vec<Tensor> = (0..self.layouts.len()).map(|k| self.sample_tensor(k, kind, rng)).collect();
        self.contract_tensors(tensors)
    }

    fn contract_tensors(&self, mut tensors: Vec<Tensor>) -> Vec<C64> {
        if !self.keeps_logical() {
            tensors = tensors.into_iter().map(Tensor::drop_last_at_zero).collect();
        }
        let mut acc: Option<Tensor> = None;
        for &k in &self.order {
            let t = std::mem::replace(&mut tensors[k], Tensor { data: vec![], labels: vec![], dims: vec![] });
            acc = Some(match acc {
                None => t,
                Some(a) => contract(&a, &t),
            });
        }
        let mut acc = acc.expect("geometry has a vertex");
        if let BulkState::Dense(phi) = &self.bulk {
            let bra = Tensor {
                data: phi.iter().map(|x| x.conj()).collect(),
                labels: (0..self.bulk_dims.len()).map(Label::Logical).collect(),
                dims: self.bulk_dims.clone(),
            };
            acc = contract(&acc, &bra);
        }
        let mut order: Vec<usize> = (0..acc.labels.len()).collect();
        order.sort_by_key(|&i| acc.labels[i]);
        acc.permute(&order).data
    }
}

/// Contracts one sampled network. Deterministic in `seed`.
pub fn sample_rtn_state(g: &Geometry, kind: TensorKind, bulk: BulkState, seed: u64) -> Result<RtnSample> {
    let plan = ContractionPlan::new(g, bulk)?;
    let state = plan.sample(kind, &mut rng::stream(seed, 0));
    Ok(RtnSample { state, leg_dims: plan.leg_dims.clone(), seed })
}

fn tensor_product_q(g: &Geometry, f: impl Fn(&Rational) -> Rational) -> Rational {
    (0..g.n_vertices()).fold(Rational::one(), |acc, k| acc * f(&from_biguint(&g.tensor_dimension(k))))
}

fn bond_product(g: &Geometry) -> Rational {
    g.internal_edges().iter().fold(Rational::one(), |acc, e| acc * exact::int(e.b))
}

/// `E[⟨ψ|ψ⟩] = a^n ∏ b / ∏ q_k` for unitary or orthogonal tensors with a
/// normalised bulk state.
pub fn expected_norm(g: &Geometry) -> Rational {
    from_biguint(&g.boundary_dimension()) * bond_product(g) / tensor_product_q(g, |q| q.clone())
}

/// `E[⟨ψ|ψ⟩²] / E[⟨ψ|ψ⟩]² = Z_field ∏ q_k/(q_k + 1)` for unitary tensors and
/// a product bulk state.
pub fn expected_norm_second_moment_ratio(g: &Geometry) -> Result<Rational> {
    let z = partition_with_boundary_field(g)?.exact;
    Ok(z * tensor_product_q(g, |q| q / (q + Rational::one())))
}

/// `E[⟨ψ|ψ⟩²]` for unitary tensors and a product bulk state.
pub fn expected_norm_second_moment(g: &Geometry) -> Result<Rational> {
    let m = expected_norm(g);
    Ok(expected_norm_second_moment_ratio(g)? * &m * &m)
}

/// `E|⟨ψ|φ⟩|⁴ = ∏ b² · Z / ∏ q_k(q_k + 1)` for unitary tensors, product bulk
/// and a normalised product reference state.
pub fn expected_overlap4(g: &Geometry) -> Result<Rational> {
    let z = partition_exact(g)?.exact;
    let b = bond_product(g);
    Ok(&b * &b * z / tensor_product_q(g, |q| q * (q + Rational::one())))
}

/// Reference state `|φ⟩` for overlap runs.
#[derive(Clone, Debug, Default, PartialEq)]
pub enum Reference {
    /// `|0…0⟩`.
    #[default]
    Zero,
    /// Dense normalised vector over the external legs.
    Dense(Vec<C64>),
}

impl Reference {
    /// `|0⟩` on every leg except legs `i` and `j`, which hold the normalised
    /// maximally entangled pair `Σ_m |mm⟩/√a`.
    pub fn epr_pair(g: &Geometry, i: usize, j: usize) -> Result<Reference> {
        let n = g.n_legs();
        if i >= n || j >= n || i == j {
            return Err(Error::invalid(format!("legs {i}, {j} must be distinct and below {n}")));
        }
        let dims: Vec<usize> =
            g.external_legs().iter().map(|l| to_usize(l.a, "leg dimension")).collect::<Result<_>>()?;
        if dims[i] != dims[j] {
            return Err(Error::invalid("entangled legs must have equal dimension"));
        }
        let total: usize = dims.iter().product();
        if total > MAX_ENTRIES {
            return Err(Error::resource("reference state exceeds the dense limit"));
        }
        let st = strides(&dims);
        let mut v = vec![C64::new(0.0, 0.0); total];
        let amp = 1.0 / (dims[i] as f64).sqrt();
        for m in 0..dims[i] {
            v[m * st[i] + m * st[j]] = C64::new(amp, 0.0);
        }
        Ok(Reference::Dense(v))
    }

    fn overlap(&self, psi: &[C64]) -> Result<C64> {
        match self {
            Reference::Zero => Ok(psi[0].conj()),
            Reference::Dense(phi) if phi.len() == psi.len() => {
                Ok(psi.iter().zip(phi).map(|(x, y)| x.conj() * y).sum())
            }
            Reference::Dense(phi) => Err(Error::invalid(format!(
                "reference has {} entries, state has {}",
                phi.len(),
                psi.len()
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McStats {
    pub samples: usize,
    /// Mean of the sampled quantity: `⟨ψ|ψ⟩` for norm runs, `|⟨ψ|φ⟩|⁴` for
    /// overlap runs.
    pub mean: f64,
    pub std_error: f64,
    /// Mean of the square of the sampled quantity.
    pub second_moment: f64,
    pub second_moment_std_error: f64,
    /// Sample variance over squared sample mean.
    pub variance_ratio: f64,
    /// Norm runs: `E[x²]/E[x]²`. Overlap runs: `a^n E|⟨ψ|φ⟩|⁴ / E[⟨ψ|ψ⟩]²`.
    /// Both from sample means, with a delta-method standard error.
    pub ratio: f64,
    pub ratio_std_error: f64,
    pub norm_mean: f64,
    pub norm_std_error: f64,
}

/// `r = u/v²` and its delta-method standard error from the means, variances
/// and covariance of `u` and `v` over `n` samples.
fn ratio_with_error(n: f64, mu: f64, mv: f64, var_u: f64, var_v: f64, cov: f64) -> (f64, f64) {
    let r = mu / (mv * mv);
    let rel = var_u / (mu * mu) + 4.0 * var_v / (mv * mv) - 4.0 * cov / (mu * mv);
    (r, r.abs() * (rel.max(0.0) / n).sqrt())
}

/// Running sums of `x`, `x²`, `y` and the cross moments the ratios need.
#[derive(Clone, Copy, Debug, Default)]
struct Pair {
    x: Accumulator,
    x2: Accumulator,
    y: Accumulator,
    xy: f64,
    x3: f64,
}

impl Pair {
    fn push(&mut self, x: f64, y: f64) {
        self.x.push(x);
        self.x2.push(x * x);
        self.y.push(y);
        self.xy += x * y;
        self.x3 += x * x * x;
    }

    fn merge(&mut self, o: &Pair) {
        self.x.merge(&o.x);
        self.x2.merge(&o.x2);
        self.y.merge(&o.y);
        self.xy += o.xy;
        self.x3 += o.x3;
    }

    fn n(&self) -> f64 {
        self.x.n as f64
    }

    /// `x̄ / ȳ²`.
    fn overlap_ratio(&self) -> (f64, f64) {
        let n = self.n();
        let (mx, my) = (self.x.mean(), self.y.mean());
        let cov = (self.xy - n * mx * my) / (n - 1.0);
        ratio_with_error(n, mx, my, self.x.variance(), self.y.variance(), cov)
    }

    /// `mean(x²) / x̄²`.
    fn second_moment_ratio(&self) -> (f64, f64) {
        let n = self.n();
        let (m2, m1) = (self.x2.mean(), self.x.mean());
        let cov = (self.x3 - n * m2 * m1) / (n - 1.0);
        ratio_with_error(n, m2, m1, self.x2.variance(), self.x.variance(), cov)
    }

    fn stats(&self, samples: usize, (ratio, ratio_se): (f64, f64)) -> McStats {
        let m = self.x.mean();
        McStats {
            samples,
            mean: m,
            std_error: self.x.std_error(),
            second_moment: self.x2.mean(),
            second_moment_std_error: self.x2.std_error(),
            variance_ratio: self.x.variance() / (m * m),
            ratio,
            ratio_std_error: ratio_se,
            norm_mean: self.y.mean(),
            norm_std_error: self.y.std_error(),
        }
    }
}

fn check_samples(samples: usize) -> Result<()> {
    if samples < 2 {
        return Err(Error::invalid("Monte-Carlo runs need at least 2 samples"));
    }
    Ok(())
}

fn run<F>(plan: &ContractionPlan, kind: TensorKind, samples: usize, seed: u64, f: F) -> Result<Pair>
where
    F: Fn(&[C64]) -> Result<(f64, f64)> + Sync,
{
    check_samples(samples)?;
    let parts = rng::chunked(samples, seed, |rng, range| -> Result<Pair> {
        let mut p = Pair::default();
        for _ in range {
            let psi = plan.sample(kind, rng);
            let (x, y) = f(&psi)?;
            p.push(x, y);
        }
        Ok(p)
    });
    let mut total = Pair::default();
    for p in parts {
        total.merge(&p?);
    }
    Ok(total)
}

/// Norm statistics of `⟨ψ|ψ⟩` over `samples` draws with a product bulk.
pub fn mc_norm_stats(g: &Geometry, kind: TensorKind, samples: usize, seed: u64) -> Result<McStats> {
    let plan = ContractionPlan::new(g, BulkState::Product)?;
    let p = run(&plan, kind, samples, seed, |psi| {
        let nrm: f64 = psi.iter().map(|x| x.norm_sqr()).sum();
        Ok((nrm, nrm))
    })?;
    Ok(p.stats(samples, p.second_moment_ratio()))
}

/// Overlap statistics: `x = |⟨ψ|φ⟩|⁴`, `y = ⟨ψ|ψ⟩`, and the effective
/// dimension estimate `a^n x̄ / ȳ²`.
pub fn mc_overlap4(
    g: &Geometry,
    kind: TensorKind,
    bulk: BulkState,
    reference: &Reference,
    samples: usize,
    seed: u64,
) -> Result<McStats> {
    let plan = ContractionPlan::new(g, bulk)?;
    let p = run(&plan, kind, samples, seed, |psi| {
        let o = reference.overlap(psi)?.norm_sqr();
        Ok((o * o, psi.iter().map(|x| x.norm_sqr()).sum()))
    })?;
    let scale = boundary_dim_f64(g);
    let (r, se) = p.overlap_ratio();
    Ok(p.stats(samples, (scale * r, scale * se)))
}

/// `tr ρ_A²` of the unnormalised state for the legs in `region`.
pub fn purity(state: &[C64], leg_dims: &[usize], region: &[usize]) -> Result<f64> {
    if region.iter().any(|&l| l >= leg_dims.len()) {
        return Err(Error::invalid("region leg out of range"));
    }
    let mut order: Vec<usize> = region.to_vec();
    order.sort_unstable();
    order.dedup();
    let rest: Vec<usize> = (0..leg_dims.len()).filter(|l| !order.contains(l)).collect();
    let da: usize = order.iter().map(|&l| leg_dims[l]).product();
    order.extend(&rest);
    let t = Tensor {
        data: state.to_vec(),
        labels: (0..leg_dims.len()).map(Label::Ext).collect(),
        dims: leg_dims.to_vec(),
    }
    .permute(&order);
    let db = t.data.len() / da;
    // ρ_A = M M† with M the da×db reshaping; tr ρ_A² = ‖M M†‖_F².
    let m = DMatrix::from_row_slice(da, db, &t.data);
    let rho = &m * m.adjoint();
    Ok(rho.iter().map(|x| x.norm_sqr()).sum())
}

/// Convenience: the a^n scale factor as f64.
pub fn boundary_dim_f64(g: &Geometry) -> f64 {
    g.boundary_dimension().to_f64().unwrap_or(f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::frac;
    use crate::geometry::{build_rtt, build_single_tensor};

    #[test]
    fn expected_norm_examples() {
        let g = build_rtt(2, false, 2, 2, 1).unwrap();
        assert_eq!(expected_norm(&g), frac(1, 2));
        // d = 1, a = b, every vertex with l = 3 legs in total: b^{-n_int}.
        let closed = build_rtt(5, true, 3, 3, 1).unwrap();
        assert_eq!(expected_norm(&closed), frac(1, 243));
        let single = build_single_tensor(4, 3, 5).unwrap();
        assert_eq!(expected_norm(&single), frac(1, 5));
    }

    #[test]
    fn two_tensor_second_moment_expression() {
        for (a, b) in [(2u64, 2u64), (3, 2), (2, 5)] {
            let g = build_rtt(2, false, a, b, 1).unwrap();
            let q = a * b;
            let want = frac(a.pow(4) * b * b + a * a * b * b + 2 * a.pow(3) * b, q * q * (q + 1) * (q + 1));
            assert_eq!(expected_norm_second_moment(&g).unwrap(), want);
        }
    }

    #[test]
    fn overlap_matches_partition_bound() {
        for g in [build_rtt(2, false, 2, 2, 1).unwrap(), build_rtt(4, true, 2, 3, 2).unwrap()] {
            let inv = crate::effdim::inverse_effdim_bound(&g).unwrap();
            let m = expected_norm(&g);
            let via = from_biguint(&g.boundary_dimension()) * expected_overlap4(&g).unwrap() / (&m * &m);
            assert_eq!(&via, inv.exact().unwrap());
        }
    }

    #[test]
    fn sampling_is_deterministic_and_shaped() {
        let g = build_rtt(3, true, 2, 3, 2).unwrap();
        let s1 = sample_rtn_state(&g, TensorKind::Unitary, BulkState::Product, 4).unwrap();
        let s2 = sample_rtn_state(&g, TensorKind::Unitary, BulkState::Product, 4).unwrap();
        assert_eq!(s1, s2);
        assert_eq!(s1.state.len(), 8);
        assert!(s1.state.iter().all(|x| x.re.is_finite() && x.im.is_finite()));
        let s3 = sample_rtn_state(&g, TensorKind::Unitary, BulkState::Product, 5).unwrap();
        assert_ne!(s1, s3);
    }

    #[test]
    fn single_tensor_is_a_unit_vector() {
        let g = build_single_tensor(2, 2, 1).unwrap();
        let s = sample_rtn_state(&g, TensorKind::Unitary, BulkState::Product, 1).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    /// Two-vertex chain contracted by hand: ψ[i,j] = Σ_m T0[i,m] T1[j,m].
    #[test]
    fn contraction_matches_hand_assembly() {
        let g = build_rtt(2, false, 2, 3, 1).unwrap();
        let plan = ContractionPlan::new(&g, BulkState::Product).unwrap();
        let mut rng = rng::stream(8, 0);
        let t0 = plan.sample_tensor(0, TensorKind::Unitary, &mut rng);
        let t1 = plan.sample_tensor(1, TensorKind::Unitary, &mut rng);
        let psi = plan.sample(TensorKind::Unitary, &mut rng::stream(8, 0));
        for i in 0..2 {
            for j in 0..2 {
                let want: C64 = (0..3).map(|m| t0.data[i * 3 + m] * t1.data[j * 3 + m]).sum();
                assert!((psi[i * 2 + j] - want).norm() < 1e-14);
            }
        }
    }

    /// Dense bulk equal to |0…0⟩ reproduces the product-bulk state.
    #[test]
    fn dense_bulk_matches_product() {
        let g = build_rtt(3, false, 2, 2, 2).unwrap();
        let mut phi = vec![C64::new(0.0, 0.0); 8];
        phi[0] = C64::new(1.0, 0.0);
        let a = sample_rtn_state(&g, TensorKind::Unitary, BulkState::Product, 2).unwrap();
        let b = sample_rtn_state(&g, TensorKind::Unitary, BulkState::Dense(phi), 2).unwrap();
        for (x, y) in a.state.iter().zip(&b.state) {
            assert!((x - y).norm() < 1e-14);
        }
        assert!(sample_rtn_state(&g, TensorKind::Unitary, BulkState::Dense(vec![C64::new(1.0, 0.0)]), 2).is_err());
    }

    #[test]
    fn oversized_state_is_a_resource_error() {
        let g = build_single_tensor(27, 2, 1).unwrap();
        let e = sample_rtn_state(&g, TensorKind::Unitary, BulkState::Product, 0).unwrap_err();
        assert!(e.is_resource_limit());
    }

    #[test]
    fn mean_norm_within_five_se() {
        for g in [
            build_rtt(2, false, 2, 2, 1).unwrap(),
            build_rtt(3, true, 2, 2, 1).unwrap(),
            build_single_tensor(3, 2, 3).unwrap(),
        ] {
            let s = mc_norm_stats(&g, TensorKind::Unitary, 20_000, 3).unwrap();
            let want = exact::to_f64(&expected_norm(&g));
            assert!((s.mean - want).abs() < 5.0 * s.std_error, "{} vs {want} ± {}", s.mean, s.std_error);
        }
    }

    /// Swap test on a single tensor: E[tr ρ_A²] = (D_A + D_B)/(D + 1), the
    /// flip-pairing count.
    #[test]
    fn purity_matches_identity_flip_counting() {
        let g = build_single_tensor(4, 2, 1).unwrap();
        let plan = ContractionPlan::new(&g, BulkState::Product).unwrap();
        let mut rng = rng::stream(21, 0);
        let mut acc = Accumulator::default();
        for _ in 0..4000 {
            let psi = plan.sample(TensorKind::Unitary, &mut rng);
            acc.push(purity(&psi, plan.leg_dims(), &[0]).unwrap());
        }
        let want = (2.0 + 8.0) / 17.0;
        assert!((acc.mean() - want).abs() < 5.0 * acc.std_error());
        // Whole-system purity of a pure unit vector is 1.
        let psi = plan.sample(TensorKind::Unitary, &mut rng);
        assert!((purity(&psi, plan.leg_dims(), &[0, 1, 2, 3]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn standard_error_shrinks_with_samples() {
        let g = build_rtt(2, false, 2, 2, 1).unwrap();
        let small = mc_norm_stats(&g, TensorKind::Unitary, 3_000, 1).unwrap();
        let large = mc_norm_stats(&g, TensorKind::Unitary, 27_000, 1).unwrap();
        let r = small.std_error / large.std_error;
        assert!((r - 3.0).abs() < 0.5, "ratio {r}");
    }

    #[test]
    fn epr_reference_is_normalised() {
        let g = build_rtt(4, true, 2, 2, 1).unwrap();
        let Reference::Dense(v) = Reference::epr_pair(&g, 0, 2).unwrap() else { panic!() };
        let n: f64 = v.iter().map(|x| x.norm_sqr()).sum();
        assert!((n - 1.0).abs() < 1e-15);
        assert!(Reference::epr_pair(&g, 1, 1).is_err());
    }

    #[test]
    fn closed_chain_overlap_matches_closed_form() {
        let g = build_rtt(4, true, 2, 2, 1).unwrap();
        let want = exact::to_f64(&crate::effdim::inverse_effdim_rtt(4, 2, 2, 1, true).unwrap());
        let s = mc_overlap4(&g, TensorKind::Unitary, BulkState::Product, &Reference::Zero, 100_000, 6).unwrap();
        assert!((s.ratio - want).abs() < 3.0 * s.ratio_std_error, "{} ± {} vs {want}", s.ratio, s.ratio_std_error);
    }

    #[test]
    fn entangled_reference_stays_below_product_value() {
        let g = build_rtt(4, true, 2, 2, 1).unwrap();
        let product = exact::to_f64(&crate::effdim::inverse_effdim_rtt(4, 2, 2, 1, true).unwrap());
        let epr = Reference::epr_pair(&g, 0, 2).unwrap();
        let s = mc_overlap4(&g, TensorKind::Unitary, BulkState::Product, &epr, 100_000, 6).unwrap();
        assert!(s.ratio + 3.0 * s.ratio_std_error < product, "{} ± {} vs {product}", s.ratio, s.ratio_std_error);
    }

    /// With unit bonds the network is a product of independent single tensors,
    /// so the norm ratio factorises.
    #[test]
    fn unit_bonds_factorise_norm_fluctuations() {
        let g = build_rtt(3, false, 2, 1, 2).unwrap();
        let single = expected_norm_second_moment_ratio(&build_single_tensor(1, 2, 2).unwrap()).unwrap();
        let chain = expected_norm_second_moment_ratio(&g).unwrap();
        assert_eq!(chain, &single * &single * &single);
        let s = mc_norm_stats(&g, TensorKind::Unitary, 50_000, 2).unwrap();
        let want = exact::to_f64(&chain);
        assert!((s.ratio - want).abs() < 5.0 * s.ratio_std_error, "{} ± {} vs {want}", s.ratio, s.ratio_std_error);
    }
}
