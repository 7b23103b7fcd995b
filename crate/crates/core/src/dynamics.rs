//! Exact-diagonalisation dynamics of qubit-chain states.
//!
//! Basis states are indexed with site 0 as the most significant bit, matching
//! the leg order of contracted network states.

use crate::contraction::{sample_rtn_state, BulkState, TensorKind};
use crate::ensembles::{complex_gaussian, CMatrix, C64};
use crate::geometry::{build_rtt, Geometry};
use crate::rng;
use crate::{Error, Result};
use nalgebra::{DVector, SymmetricEigen};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

/// Largest chain accepted by [`build_hamiltonian`].
pub const MAX_SITES: usize = 14;
/// Level spacings or gap differences below this count as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    IsingClosed,
    IsingOpen,
    DenseRandomHermitian,
}

impl Model {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "ising-closed" => Ok(Model::IsingClosed),
            "ising-open" => Ok(Model::IsingOpen),
            "dense-random-hermitian" | "gue" => Ok(Model::DenseRandomHermitian),
            _ => Err(Error::invalid(format!("unknown hamiltonian '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianSpec {
    pub n_sites: usize,
    pub model: Model,
    pub coupling: f64,
    pub field: f64,
    /// Amplitude of the site-random longitudinal field `ε_k X_k`.
    pub disorder_eps: f64,
    pub seed: u64,
}

impl HamiltonianSpec {
    pub fn new(n_sites: usize, model: Model) -> Self {
        HamiltonianSpec { n_sites, model, coupling: 1.0, field: 1.0, disorder_eps: 0.0, seed: 0 }
    }
}

fn bit(state: usize, site: usize, n: usize) -> usize {
    (state >> (n - 1 - site)) & 1
}

/// `Z` on `site` of an `n`-qubit chain.
pub fn pauli_z(site: usize, n: usize) -> CMatrix {
    let dim = 1 << n;
    CMatrix::from_diagonal(&DVector::from_fn(dim, |s, _| {
        C64::new(if bit(s, site, n) == 0 { 1.0 } else { -1.0 }, 0.0)
    }))
}

/// `X` on `site` of an `n`-qubit chain.
pub fn pauli_x(site: usize, n: usize) -> CMatrix {
    let dim = 1 << n;
    let flip = 1 << (n - 1 - site);
    CMatrix::from_fn(dim, dim, |r, c| if r == c ^ flip { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
}

/// `Y` on `site` of an `n`-qubit chain.
pub fn pauli_y(site: usize, n: usize) -> CMatrix {
    let dim = 1 << n;
    let flip = 1 << (n - 1 - site);
    CMatrix::from_fn(dim, dim, |r, c| {
        if r != c ^ flip {
            return C64::new(0.0, 0.0);
        }
        // Y|0⟩ = i|1⟩, Y|1⟩ = -i|0⟩.
        if bit(c, site, n) == 0 {
            C64::new(0.0, 1.0)
        } else {
            C64::new(0.0, -1.0)
        }
    })
}

/// Parses `"X:1"`, `"Z:3"`, `"Y:2"` with a 1-based site index, or products
/// such as `"X:1*X:2"`.
pub fn parse_observable(text: &str, n: usize) -> Result<CMatrix> {
    let mut out = CMatrix::identity(1 << n, 1 << n);
    for factor in text.split('*') {
        let (p, s) = factor
            .trim()
            .split_once(':')
            .ok_or_else(|| Error::invalid(format!("observable '{factor}' must look like X:1")))?;
        let site: usize = s.parse().map_err(|_| Error::invalid(format!("bad site in '{factor}'")))?;
        if site == 0 || site > n {
            return Err(Error::invalid(format!("site {site} outside 1..={n}")));
        }
        let m = match p.to_ascii_uppercase().as_str() {
            "X" => pauli_x(site - 1, n),
            "Y" => pauli_y(site - 1, n),
            "Z" => pauli_z(site - 1, n),
            _ => return Err(Error::invalid(format!("unknown Pauli '{p}'"))),
        };
        out = out * m;
    }
    Ok(out)
}

/// Dense Hamiltonian for `spec`.
///
/// Ising models: `J Σ X_k X_{k+1} + g Σ Z_k + Σ ε_k X_k`, where the closed
/// chain adds the bond `(n-1, 0)` for `n ≥ 3` (on two sites the wrap-around
/// bond coincides with the open one). The disorder points along the coupling
/// axis: a random `Z` field keeps the chain free-fermionic, so its gaps stay
/// degenerate. Dense model: `(G + G†)/(2√N)` with `G` standard complex
/// Gaussian, plus the same disorder term.
pub fn build_hamiltonian(spec: &HamiltonianSpec) -> Result<CMatrix> {
    let n = spec.n_sites;
    if n == 0 {
        return Err(Error::invalid("a chain needs at least one site"));
    }
    if n > MAX_SITES {
        return Err(Error::resource(format!("{n} sites exceed the dense limit of {MAX_SITES}")));
    }
    if !(spec.disorder_eps >= 0.0) {
        return Err(Error::invalid("disorder amplitude must be non-negative"));
    }
    let dim = 1usize << n;
    let mut h = match spec.model {
        Model::IsingClosed | Model::IsingOpen => {
            let mut h = CMatrix::zeros(dim, dim);
            let mut bonds: Vec<(usize, usize)> = (0..n.saturating_sub(1)).map(|k| (k, k + 1)).collect();
            if spec.model == Model::IsingClosed && n >= 3 {
                bonds.push((n - 1, 0));
            }
            for (i, j) in bonds {
                h += (pauli_x(i, n) * pauli_x(j, n)) * C64::new(spec.coupling, 0.0);
            }
            for k in 0..n {
                h += pauli_z(k, n) * C64::new(spec.field, 0.0);
            }
            h
        }
        Model::DenseRandomHermitian => {
            let mut r = rng::stream(spec.seed, 2);
            let g = CMatrix::from_fn(dim, dim, |_, _| complex_gaussian(&mut r));
            (&g + g.adjoint()) / C64::new(2.0 * (dim as f64).sqrt(), 0.0)
        }
    };
    if spec.disorder_eps > 0.0 {
        let mut r = rng::stream(spec.seed, 1);
        for k in 0..n {
            let eps = r.random_range(-spec.disorder_eps..=spec.disorder_eps);
            h += pauli_x(k, n) * C64::new(eps, 0.0);
        }
    }
    Ok(h)
}

/// Uniform grid of `points` times on `[0, t_max]`, both ends included.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_max: f64,
    pub points: usize,
}

impl TimeGrid {
    /// 2000 points on `[0, 1000]`.
    pub const DEFAULT: TimeGrid = TimeGrid { t_max: 1000.0, points: 2000 };
    /// 10⁴ points on `[0, 10⁴]`.
    pub const ORACLE: TimeGrid = TimeGrid { t_max: 1.0e4, points: 10_000 };

    pub fn times(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![0.0];
        }
        (0..self.points).map(|i| self.t_max * i as f64 / (self.points - 1) as f64).collect()
    }

    fn validate(&self) -> Result<()> {
        if self.points == 0 || !(self.t_max >= 0.0) || !self.t_max.is_finite() {
            return Err(Error::invalid("time grid needs at least one point and a finite t_max >= 0"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DynamicsResult {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// `⟨j|ψ⟩` in the order of `eigenvalues`, as `[re, im]`.
    pub coefficients: Vec<[f64; 2]>,
    /// `Σ_j |c_j|⁴`.
    pub inv_deff_state: f64,
    /// `Σ_{j≠k} |c_j|²|c_k|²|A_jk|²`.
    pub fluct_exact: f64,
    pub time_grid: Vec<f64>,
    pub expvals: Vec<f64>,
    /// `Σ_j |c_j|² A_jj`.
    pub time_avg: f64,
    /// Mean of the series over the grid.
    pub grid_mean: f64,
    /// Standard deviation of the series over the grid.
    pub time_std: f64,
    pub loschmidt_avg: f64,
    /// Two eigenvalues closer than [`DEGENERACY_TOL`].
    pub degenerate_levels: bool,
    /// Two distinct gaps `E_j - E_k` closer than [`DEGENERACY_TOL`].
    pub degenerate_gaps: bool,
    /// Set when either flag is raised: the double sum then does not equal the
    /// infinite-time variance and `time_std` is the reference value.
    pub fluct_is_approximate: bool,
}

struct Eigen {
    values: Vec<f64>,
    vectors: CMatrix,
}

fn check_square(h: &CMatrix) -> Result<()> {
    if h.nrows() != h.ncols() || h.nrows() == 0 {
        return Err(Error::invalid("hamiltonian must be a non-empty square matrix"));
    }
    let scale = h.norm().max(1.0);
    if (h - h.adjoint()).norm() > 1e-12 * scale {
        return Err(Error::invalid("hamiltonian is not hermitian"));
    }
    Ok(())
}

fn eigen(h: &CMatrix) -> Result<Eigen> {
    check_square(h)?;
    let se = SymmetricEigen::new(h.clone());
    let mut idx: Vec<usize> = (0..h.nrows()).collect();
    idx.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let values = idx.iter().map(|&i| se.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(h.nrows(), h.nrows(), |r, c| se.eigenvectors[(r, idx[c])]);
    Ok(Eigen { values, vectors })
}

fn coefficients(state: &[C64], e: &Eigen) -> Result<DVector<C64>> {
    if state.len() != e.vectors.nrows() {
        return Err(Error::invalid(format!(
            "state has {} entries, hamiltonian acts on {}",
            state.len(),
            e.vectors.nrows()
        )));
    }
    let norm: f64 = state.iter().map(|x| x.norm_sqr()).sum();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::invalid(format!("state must be normalised, ⟨ψ|ψ⟩ = {norm}")));
    }
    Ok(e.vectors.adjoint() * DVector::from_column_slice(state))
}

/// Scales `state` to unit norm.
pub fn normalize(state: &[C64]) -> Result<Vec<C64>> {
    let norm = state.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return Err(Error::invalid("cannot normalise a zero state"));
    }
    Ok(state.iter().map(|x| x / norm).collect())
}

/// Spectral norm.
pub fn operator_norm(a: &CMatrix) -> f64 {
    a.clone().singular_values().max()
}

fn check_observable(a: &CMatrix, dim: usize, hermitian: bool) -> Result<()> {
    if a.nrows() != dim || a.ncols() != dim {
        return Err(Error::invalid(format!("observable must be {dim}×{dim}")));
    }
    if hermitian && (a - a.adjoint()).norm() > 1e-10 {
        return Err(Error::invalid("observable is not hermitian"));
    }
    let norm = operator_norm(a);
    if norm > 1.0 + 1e-10 {
        return Err(Error::invalid(format!("observable norm {norm} exceeds 1")));
    }
    Ok(())
}

fn degeneracy_flags(values: &[f64]) -> (bool, bool) {
    let levels = values.windows(2).any(|w| w[1] - w[0] < DEGENERACY_TOL);
    let mut gaps: Vec<f64> = Vec::new();
    for j in 0..values.len() {
        for k in 0..values.len() {
            if j != k {
                gaps.push(values[j] - values[k]);
            }
        }
    }
    gaps.sort_by(f64::total_cmp);
    let repeated = gaps.windows(2).any(|w| w[1] - w[0] < DEGENERACY_TOL);
    (levels, repeated)
}

/// `Σ_{j≠k} p_j p_k |B_jk|²` in the eigenbasis.
fn double_sum(p: &[f64], b: &CMatrix) -> f64 {
    let mut total = 0.0;
    for j in 0..p.len() {
        for k in 0..p.len() {
            if j != k {
                total += p[j] * p[k] * b[(j, k)].norm_sqr();
            }
        }
    }
    total
}

/// Full late-time analysis of `⟨A(t)⟩` for a normalised `state`.
pub fn analyze(state: &[C64], h: &CMatrix, a: &CMatrix, grid: TimeGrid) -> Result<DynamicsResult> {
    grid.validate()?;
    let e = eigen(h)?;
    check_observable(a, h.nrows(), true)?;
    let c = coefficients(state, &e)?;
    let p: Vec<f64> = c.iter().map(|x| x.norm_sqr()).collect();
    let ae = e.vectors.adjoint() * a * &e.vectors;
    let inv_deff_state: f64 = p.iter().map(|x| x * x).sum();
    let fluct_exact = double_sum(&p, &ae);
    let time_avg: f64 = p.iter().enumerate().map(|(j, pj)| pj * ae[(j, j)].re).sum();
    let times = grid.times();
    let expvals: Vec<f64> = times
        .iter()
        .map(|&t| {
            let w = DVector::from_fn(c.len(), |k, _| c[k] * C64::from_polar(1.0, -e.values[k] * t));
            (w.adjoint() * &ae * &w)[(0, 0)].re
        })
        .collect();
    let m = expvals.len() as f64;
    let grid_mean = expvals.iter().sum::<f64>() / m;
    let time_std = (expvals.iter().map(|x| (x - grid_mean).powi(2)).sum::<f64>() / m).sqrt();
    let (degenerate_levels, degenerate_gaps) = degeneracy_flags(&e.values);
    Ok(DynamicsResult {
        coefficients: c.iter().map(|x| [x.re, x.im]).collect(),
        eigenvalues: e.values,
        inv_deff_state,
        fluct_exact,
        time_grid: times,
        expvals,
        time_avg,
        grid_mean,
        time_std,
        loschmidt_avg: inv_deff_state,
        degenerate_levels,
        degenerate_gaps,
        fluct_is_approximate: degenerate_levels || degenerate_gaps,
    })
}

/// `1 / Σ_j |⟨j|ψ⟩|⁴`.
pub fn effdim_of_state(state: &[C64], h: &CMatrix) -> Result<f64> {
    Ok(1.0 / loschmidt_average(state, h)?)
}

/// Infinite-time average of the Loschmidt echo, `Σ_j |⟨j|ψ⟩|⁴`.
pub fn loschmidt_average(state: &[C64], h: &CMatrix) -> Result<f64> {
    let e = eigen(h)?;
    let c = coefficients(state, &e)?;
    Ok(c.iter().map(|x| x.norm_sqr().powi(2)).sum())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NPointFluctuation {
    /// `Σ_{j≠k} p_j p_k |B_jk|²` for `B = A_1 ⋯ A_m`.
    pub fluct: f64,
    /// `∏ ‖A_i‖² · Σ_j p_j²`.
    pub bound: f64,
    pub holds: bool,
}

/// Late-time fluctuation of the product of `observables`.
pub fn npoint_fluctuation(state: &[C64], h: &CMatrix, observables: &[CMatrix]) -> Result<NPointFluctuation> {
    if observables.is_empty() {
        return Err(Error::invalid("at least one observable is required"));
    }
    let e = eigen(h)?;
    let c = coefficients(state, &e)?;
    let dim = h.nrows();
    let mut b = CMatrix::identity(dim, dim);
    let mut norm_sq = 1.0;
    for a in observables {
        check_observable(a, dim, false)?;
        norm_sq *= operator_norm(a).powi(2);
        b *= a;
    }
    let p: Vec<f64> = c.iter().map(|x| x.norm_sqr()).collect();
    let be = e.vectors.adjoint() * b * &e.vectors;
    let fluct = double_sum(&p, &be);
    let bound = norm_sq * p.iter().map(|x| x * x).sum::<f64>();
    Ok(NPointFluctuation { fluct, bound, holds: fluct <= bound * (1.0 + 1e-12) + 1e-15 })
}

/// Normalised sampled network state on a qubit chain.
pub fn sample_chain_state(g: &Geometry, seed: u64) -> Result<Vec<C64>> {
    if g.external_legs().iter().any(|l| l.a != 2) {
        return Err(Error::invalid("dynamics needs a qubit chain: every leg must have a = 2"));
    }
    let s = sample_rtn_state(g, TensorKind::Unitary, BulkState::Product, seed)?;
    normalize(&s.state)
}

/// Samples a network state on `g` (one qubit per leg) and analyses it.
pub fn run_geometry(
    g: &Geometry,
    spec: &HamiltonianSpec,
    observable: &str,
    grid: TimeGrid,
    seed: u64,
) -> Result<DynamicsResult> {
    if spec.n_sites != g.n_legs() {
        return Err(Error::invalid(format!("hamiltonian has {} sites, geometry {} legs", spec.n_sites, g.n_legs())));
    }
    let psi = sample_chain_state(g, seed)?;
    let h = build_hamiltonian(spec)?;
    let a = parse_observable(observable, spec.n_sites)?;
    analyze(&psi, &h, &a, grid)
}

/// The five-site closed-chain experiment: closed tensor train with
/// `a = b = 2`, `d = 1`, closed Ising chain, observable `X` on site 1.
pub fn five_site_experiment(seed: u64, grid: TimeGrid, disorder_eps: f64) -> Result<DynamicsResult> {
    let g = build_rtt(5, true, 2, 2, 1)?;
    let mut spec = HamiltonianSpec::new(5, Model::IsingClosed);
    spec.disorder_eps = disorder_eps;
    spec.seed = seed;
    run_geometry(&g, &spec, "X:1", grid, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::haar_unitary;

    fn random_state(dim: usize, seed: u64) -> Vec<C64> {
        let mut r = rng::stream(seed, 7);
        normalize(&(0..dim).map(|_| complex_gaussian(&mut r)).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn two_site_closed_chain_by_hand() {
        let h = build_hamiltonian(&HamiltonianSpec::new(2, Model::IsingClosed)).unwrap();
        // X⊗X + Z⊗I + I⊗Z in the basis |00⟩, |01⟩, |10⟩, |11⟩.
        let want = [[2.0, 0.0, 0.0, 1.0], [0.0, 0.0, 1.0, 0.0], [0.0, 1.0, 0.0, 0.0], [1.0, 0.0, 0.0, -2.0]];
        for r in 0..4 {
            for c in 0..4 {
                assert_eq!(h[(r, c)], C64::new(want[r][c], 0.0));
            }
        }
        let open = build_hamiltonian(&HamiltonianSpec::new(2, Model::IsingOpen)).unwrap();
        assert_eq!(h, open);
    }

    #[test]
    fn one_site_is_pauli_z() {
        let h = build_hamiltonian(&HamiltonianSpec::new(1, Model::IsingClosed)).unwrap();
        let e = eigen(&h).unwrap();
        assert_eq!(e.values, vec![-1.0, 1.0]);
    }

    #[test]
    fn limits_and_validation() {
        assert!(build_hamiltonian(&HamiltonianSpec::new(15, Model::IsingOpen)).unwrap_err().is_resource_limit());
        assert!(build_hamiltonian(&HamiltonianSpec::new(0, Model::IsingOpen)).is_err());
        let h = build_hamiltonian(&HamiltonianSpec::new(3, Model::DenseRandomHermitian)).unwrap();
        assert!((&h - h.adjoint()).norm() < 1e-12);
        let (levels, gaps) = degeneracy_flags(&eigen(&h).unwrap().values);
        assert!(!levels && !gaps);
        assert!(parse_observable("X:0", 3).is_err());
        assert!(parse_observable("Q:1", 3).is_err());
        let xx = parse_observable("X:1*X:2", 3).unwrap();
        assert_eq!(xx, pauli_x(0, 3) * pauli_x(1, 3));
    }

    #[test]
    fn disorder_is_seeded_and_breaks_gap_degeneracy() {
        let mut spec = HamiltonianSpec::new(4, Model::IsingClosed);
        let clean = eigen(&build_hamiltonian(&spec).unwrap()).unwrap();
        assert!(degeneracy_flags(&clean.values).1);
        spec.disorder_eps = 0.3;
        spec.seed = 5;
        let mut z_only = build_hamiltonian(&HamiltonianSpec::new(4, Model::IsingClosed)).unwrap();
        let mut r = rng::stream(5, 1);
        for k in 0..4 {
            z_only += pauli_z(k, 4) * C64::new(r.random_range(-0.3..=0.3), 0.0);
        }
        assert!(degeneracy_flags(&eigen(&z_only).unwrap().values).1, "a Z field keeps gaps degenerate");
        let a = build_hamiltonian(&spec).unwrap();
        assert_eq!(a, build_hamiltonian(&spec).unwrap());
        let (levels, gaps) = degeneracy_flags(&eigen(&a).unwrap().values);
        assert!(!levels && !gaps);
    }

    #[test]
    fn eigenstate_does_not_move() {
        let h = build_hamiltonian(&HamiltonianSpec::new(3, Model::IsingOpen)).unwrap();
        let e = eigen(&h).unwrap();
        let psi: Vec<C64> = e.vectors.column(2).iter().copied().collect();
        let r = analyze(&psi, &h, &pauli_z(0, 3), TimeGrid { t_max: 50.0, points: 200 }).unwrap();
        assert!(r.fluct_exact < 1e-20);
        assert!(r.time_std < 1e-10);
        assert!((r.inv_deff_state - 1.0).abs() < 1e-10);
        assert!((effdim_of_state(&psi, &h).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn flat_superposition_counts_levels() {
        let h = build_hamiltonian(&HamiltonianSpec::new(3, Model::DenseRandomHermitian)).unwrap();
        let e = eigen(&h).unwrap();
        let m = 5;
        let mut psi = vec![C64::new(0.0, 0.0); 8];
        for j in 0..m {
            for (r, x) in psi.iter_mut().enumerate() {
                *x += e.vectors[(r, j)] / (m as f64).sqrt();
            }
        }
        assert!((effdim_of_state(&psi, &h).unwrap() - m as f64).abs() < 1e-9);
        assert!((loschmidt_average(&psi, &h).unwrap() - 1.0 / m as f64).abs() < 1e-12);
    }

    #[test]
    fn loschmidt_times_effdim_is_one() {
        let h = build_hamiltonian(&HamiltonianSpec::new(5, Model::DenseRandomHermitian)).unwrap();
        let psi = random_state(32, 3);
        let l = loschmidt_average(&psi, &h).unwrap();
        assert!((l * effdim_of_state(&psi, &h).unwrap() - 1.0).abs() < 1e-15);
        let r = analyze(&psi, &h, &pauli_x(0, 5), TimeGrid { t_max: 1.0, points: 2 }).unwrap();
        assert_eq!(r.loschmidt_avg, r.inv_deff_state);
        let sum: f64 = r.coefficients.iter().map(|c| c[0] * c[0] + c[1] * c[1]).sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn grid_variance_matches_double_sum() {
        let mut spec = HamiltonianSpec::new(3, Model::DenseRandomHermitian);
        spec.seed = 12;
        let h = build_hamiltonian(&spec).unwrap();
        let psi = random_state(8, 12);
        let proj = CMatrix::from_diagonal(&DVector::from_fn(8, |i, _| C64::new((i < 4) as u8 as f64, 0.0)));
        let r = analyze(&psi, &h, &proj, TimeGrid::ORACLE).unwrap();
        assert!(!r.fluct_is_approximate);
        let rel = (r.time_std.powi(2) - r.fluct_exact).abs() / r.fluct_exact;
        assert!(rel < 0.05, "grid {} vs exact {}", r.time_std.powi(2), r.fluct_exact);
    }

    #[test]
    fn fluctuation_bounded_by_inverse_effdim() {
        for seed in 0..10 {
            let h = build_hamiltonian(&HamiltonianSpec { seed, ..HamiltonianSpec::new(4, Model::DenseRandomHermitian) })
                .unwrap();
            let psi = random_state(16, seed);
            let r = analyze(&psi, &h, &pauli_x(1, 4), TimeGrid { t_max: 1.0, points: 2 }).unwrap();
            assert!(r.fluct_exact <= r.inv_deff_state + 1e-15);
        }
    }

    #[test]
    fn npoint_examples() {
        let h = build_hamiltonian(&HamiltonianSpec { disorder_eps: 0.2, seed: 1, ..HamiltonianSpec::new(5, Model::IsingClosed) })
            .unwrap();
        let psi = random_state(32, 4);
        let f = npoint_fluctuation(&psi, &h, &[pauli_x(0, 5), pauli_x(1, 5)]).unwrap();
        assert!(f.holds && f.fluct <= f.bound);
        let single = npoint_fluctuation(&psi, &h, &[pauli_x(0, 5)]).unwrap();
        let r = analyze(&psi, &h, &pauli_x(0, 5), TimeGrid { t_max: 1.0, points: 2 }).unwrap();
        assert!((single.fluct - r.fluct_exact).abs() < 1e-14);
        let id = npoint_fluctuation(&psi, &h, &[CMatrix::identity(32, 32)]).unwrap();
        assert!(id.fluct < 1e-24);
        let big = CMatrix::identity(32, 32) * C64::new(2.0, 0.0);
        assert!(npoint_fluctuation(&psi, &h, &[big]).is_err());
    }

    #[test]
    fn rejects_bad_inputs() {
        let h = build_hamiltonian(&HamiltonianSpec::new(2, Model::IsingOpen)).unwrap();
        let psi = vec![C64::new(1.0, 0.0); 4];
        assert!(analyze(&psi, &h, &pauli_x(0, 2), TimeGrid::DEFAULT).is_err());
        let ok = random_state(4, 0);
        assert!(analyze(&ok, &h, &(pauli_x(0, 2) * C64::new(1.5, 0.0)), TimeGrid::DEFAULT).is_err());
        assert!(analyze(&ok, &h, &(pauli_x(0, 2) * C64::new(0.0, 1.0)), TimeGrid::DEFAULT).is_err());
    }

    #[test]
    fn unitary_invariance() {
        let mut spec = HamiltonianSpec::new(3, Model::DenseRandomHermitian);
        spec.seed = 9;
        let h = build_hamiltonian(&spec).unwrap();
        let a = pauli_x(1, 3);
        let psi = random_state(8, 9);
        let w = haar_unitary(8, &mut rng::stream(99, 0));
        let h2 = &w * &h * w.adjoint();
        let a2 = &w * &a * w.adjoint();
        let psi2: Vec<C64> = (&w * DVector::from_column_slice(&psi)).iter().copied().collect();
        let grid = TimeGrid { t_max: 20.0, points: 50 };
        let r1 = analyze(&psi, &h, &a, grid).unwrap();
        let r2 = analyze(&psi2, &((&h2 + h2.adjoint()) * C64::new(0.5, 0.0)), &a2, grid).unwrap();
        assert!((r1.fluct_exact - r2.fluct_exact).abs() < 1e-10);
        assert!((r1.inv_deff_state - r2.inv_deff_state).abs() < 1e-10);
        assert!((r1.time_avg - r2.time_avg).abs() < 1e-10);
        for (x, y) in r1.expvals.iter().zip(&r2.expvals) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn five_site_experiment_runs() {
        let r = five_site_experiment(0, TimeGrid { t_max: 100.0, points: 400 }, 0.0).unwrap();
        assert_eq!(r.eigenvalues.len(), 32);
        assert!(r.degenerate_gaps);
        assert!(r.time_std <= (7808.0f64 / 59049.0).sqrt());
    }
}
