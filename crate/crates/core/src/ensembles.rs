//! Circular ensembles and low-order Weingarten moments.
//!
//! Haar unitaries come from a complex Gaussian matrix, Householder QR, and a
//! phase correction of the columns by `R_ii/|R_ii|`. Without the phase
//! correction the result is not Haar distributed.
//!
//! Besides Dyson's three circular ensembles the module samples the Haar
//! measure on the real orthogonal group O(N) and on the compact symplectic
//! group USp(N). Their moments are what the "orthogonal" and "symplectic"
//! fourth-moment formulas actually describe: the orthogonal-group averages
//! with the `A`/`B` Weingarten weights, and the state 2-design property of
//! symplectic columns. COE (`UᵀU`) and CSE (`U^R U`) matrices are sampled as
//! well and checked against their own exact moments.

use crate::rng::{self, Rng};
use crate::stats::Accumulator;
use crate::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ensemble {
    /// Haar measure on U(N).
    Cue,
    /// `UᵀU` with `U` Haar on U(N): symmetric unitary.
    Coe,
    /// `U^R U` with `U^R = J Uᵀ Jᵀ`: self-dual unitary, N even.
    Cse,
    /// Haar measure on O(N).
    Orthogonal,
    /// Haar measure on USp(N), N even.
    Symplectic,
}

impl Ensemble {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "cue" => Ok(Ensemble::Cue),
            "coe" => Ok(Ensemble::Coe),
            "cse" => Ok(Ensemble::Cse),
            "orthogonal" => Ok(Ensemble::Orthogonal),
            "symplectic" => Ok(Ensemble::Symplectic),
            _ => Err(Error::invalid(format!("unknown ensemble '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UnitarySample {
    pub matrix: CMatrix,
    pub ensemble: Ensemble,
}

pub fn gaussian(rng: &mut Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Standard complex Gaussian, `E|z|² = 1`.
pub fn complex_gaussian(rng: &mut Rng) -> C64 {
    C64::new(gaussian(rng), gaussian(rng)) * std::f64::consts::FRAC_1_SQRT_2
}

fn check_dim(n: usize, even: bool) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("matrix dimension must be at least 1"));
    }
    if even && n % 2 == 1 {
        return Err(Error::invalid(format!("symplectic ensembles need even N, got {n}")));
    }
    Ok(())
}

/// Haar unitary drawn from `rng`.
pub fn haar_unitary(n: usize, rng: &mut Rng) -> CMatrix {
    let z = CMatrix::from_fn(n, n, |_, _| complex_gaussian(rng));
    let qr = z.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Haar orthogonal matrix (real entries) drawn from `rng`.
pub fn haar_orthogonal(n: usize, rng: &mut Rng) -> CMatrix {
    let z = DMatrix::<f64>::from_fn(n, n, |_, _| gaussian(rng));
    let qr = z.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    q.map(|x| C64::new(x, 0.0))
}

/// `J x` for the block form `J = ⊕ [[0, 1], [-1, 0]]`.
fn apply_j(x: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); x.len()];
    for i in (0..x.len()).step_by(2) {
        out[i] = x[i + 1];
        out[i + 1] = -x[i];
    }
    out
}

/// The symplectic form as a matrix.
pub fn symplectic_form(n: usize) -> CMatrix {
    let mut j = CMatrix::zeros(n, n);
    for i in (0..n).step_by(2) {
        j[(i, i + 1)] = C64::new(1.0, 0.0);
        j[(i + 1, i)] = C64::new(-1.0, 0.0);
    }
    j
}

/// Haar element of USp(n) by quaternionic Gram-Schmidt: each Gaussian column
/// `v` is orthonormalised and paired with `Jᵀ v̄`, so `UᵀJU = J`.
pub fn haar_symplectic(n: usize, rng: &mut Rng) -> CMatrix {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v: Vec<C64> = (0..n).map(|_| complex_gaussian(rng)).collect();
        for _ in 0..2 {
            for c in &cols {
                let overlap: C64 = c.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                for (vi, ci) in v.iter_mut().zip(c) {
                    *vi -= overlap * ci;
                }
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-8 {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        let conj: Vec<C64> = v.iter().map(|x| x.conj()).collect();
        let partner: Vec<C64> = apply_j(&conj).into_iter().map(|x| -x).collect();
        cols.push(v);
        cols.push(partner);
    }
    CMatrix::from_fn(n, n, |i, j| cols[j][i])
}

/// `U^R = J Uᵀ Jᵀ`.
pub fn symplectic_dual(u: &CMatrix) -> CMatrix {
    let j = symplectic_form(u.nrows());
    &j * u.transpose() * j.transpose()
}

/// One sample of `ensemble` drawn from `rng`.
pub fn sample_with(ensemble: Ensemble, n: usize, rng: &mut Rng) -> Result<UnitarySample> {
    check_dim(n, matches!(ensemble, Ensemble::Cse | Ensemble::Symplectic))?;
    let matrix = match ensemble {
        Ensemble::Cue => haar_unitary(n, rng),
        Ensemble::Coe => {
            let u = haar_unitary(n, rng);
            u.transpose() * u
        }
        Ensemble::Cse => {
            let u = haar_unitary(n, rng);
            symplectic_dual(&u) * u
        }
        Ensemble::Orthogonal => haar_orthogonal(n, rng),
        Ensemble::Symplectic => haar_symplectic(n, rng),
    };
    Ok(UnitarySample { matrix, ensemble })
}

pub fn sample_cue(n: usize, seed: u64) -> Result<UnitarySample> {
    sample_with(Ensemble::Cue, n, &mut rng::stream(seed, 0))
}

pub fn sample_coe(n: usize, seed: u64) -> Result<UnitarySample> {
    sample_with(Ensemble::Coe, n, &mut rng::stream(seed, 0))
}

pub fn sample_cse(n: usize, seed: u64) -> Result<UnitarySample> {
    sample_with(Ensemble::Cse, n, &mut rng::stream(seed, 0))
}

pub fn sample_orthogonal(n: usize, seed: u64) -> Result<UnitarySample> {
    sample_with(Ensemble::Orthogonal, n, &mut rng::stream(seed, 0))
}

pub fn sample_symplectic(n: usize, seed: u64) -> Result<UnitarySample> {
    sample_with(Ensemble::Symplectic, n, &mut rng::stream(seed, 0))
}

/// Frobenius norm of `U†U - 1`.
pub fn unitarity_residual(u: &CMatrix) -> f64 {
    (u.adjoint() * u - CMatrix::identity(u.nrows(), u.ncols())).norm()
}

fn check_indices(idx: &[usize], n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    if let Some(&i) = idx.iter().find(|&&i| i >= n) {
        return Err(Error::invalid(format!("index {i} out of range for dimension {n}")));
    }
    Ok(())
}

fn delta(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

/// `E[U_{i1 j1} U*_{i2 j2}] = δ_{i1 i2} δ_{j1 j2} / N` (unitary and orthogonal).
pub fn moment2(i: [usize; 2], j: [usize; 2], n: usize) -> Result<f64> {
    check_indices(&i, n)?;
    check_indices(&j, n)?;
    Ok(delta(i[0], i[1]) * delta(j[0], j[1]) / n as f64)
}

/// `E[U_{i1 j1} U_{i2 j2} U*_{i3 j3} U*_{i4 j4}]` over Haar U(N).
///
/// Sum over permutations σ, τ of {1,2} of `δ(i_a, i_{2+σ(a)}) δ(j_a, j_{2+τ(a)})
/// Wg(στ⁻¹)` with `Wg(id) = 1/(N²-1)` and `Wg(swap) = -1/(N(N²-1))`. For
/// N = 1 every entry is a phase and the moment is 1.
pub fn moment4_cue_contraction(i: [usize; 4], j: [usize; 4], n: usize) -> Result<f64> {
    check_indices(&i, n)?;
    check_indices(&j, n)?;
    if n == 1 {
        return Ok(1.0);
    }
    let d = n as f64;
    let wg = |same: bool| if same { 1.0 / (d * d - 1.0) } else { -1.0 / (d * (d * d - 1.0)) };
    let perms: [[usize; 2]; 2] = [[2, 3], [3, 2]];
    let mut total = 0.0;
    for (s, sigma) in perms.iter().enumerate() {
        let di = delta(i[0], i[sigma[0]]) * delta(i[1], i[sigma[1]]);
        if di == 0.0 {
            continue;
        }
        for (t, tau) in perms.iter().enumerate() {
            let dj = delta(j[0], j[tau[0]]) * delta(j[1], j[tau[1]]);
            total += di * dj * wg(s == t);
        }
    }
    Ok(total)
}

/// The three pairings of {0,1,2,3}.
const PAIRINGS: [[(usize, usize); 2]; 3] = [[(0, 1), (2, 3)], [(0, 2), (1, 3)], [(0, 3), (1, 2)]];

/// `E[O_{i1 j1} O_{i2 j2} O_{i3 j3} O_{i4 j4}]` over Haar O(N): weight
/// `A = (N+1)/(N(N+2)(N-1))` when row and column pairings agree and
/// `B = -1/(N(N+2)(N-1))` otherwise. For N = 1 the entries are ±1 and the
/// moment is 1.
pub fn moment4_coe_contraction(i: [usize; 4], j: [usize; 4], n: usize) -> Result<f64> {
    check_indices(&i, n)?;
    check_indices(&j, n)?;
    if n == 1 {
        return Ok(1.0);
    }
    let d = n as f64;
    let a = (d + 1.0) / (d * (d + 2.0) * (d - 1.0));
    let b = -1.0 / (d * (d + 2.0) * (d - 1.0));
    let matches = |x: &[usize; 4], p: &[(usize, usize); 2]| p.iter().all(|&(u, v)| x[u] == x[v]);
    let mut total = 0.0;
    for (s, ps) in PAIRINGS.iter().enumerate() {
        if !matches(&i, ps) {
            continue;
        }
        for (t, pt) in PAIRINGS.iter().enumerate() {
            if matches(&j, pt) {
                total += if s == t { a } else { b };
            }
        }
    }
    Ok(total)
}

/// `E[S_{ab} S*_{cd}]` for `S = UᵀU`, obtained by summing the unitary fourth
/// moment over the contracted index: `Σ_{x,y} E[U_{xa} U_{xb} U*_{yc} U*_{yd}]`.
pub fn moment2_coe_dyson(a: usize, b: usize, c: usize, d: usize, n: usize) -> Result<f64> {
    let mut total = 0.0;
    for x in 0..n {
        for y in 0..n {
            total += moment4_cue_contraction([x, x, y, y], [a, b, c, d], n)?;
        }
    }
    Ok(total)
}

/// Second moment of a Haar state: `E[ψ_a ψ_b ψ*_c ψ*_d]` for the first
/// column of a Haar unitary.
pub fn moment4_state(a: usize, b: usize, c: usize, d: usize, n: usize) -> Result<f64> {
    moment4_cue_contraction([a, b, c, d], [0, 0, 0, 0], n)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentEntry {
    pub label: String,
    /// `[re, im]`.
    pub predicted: [f64; 2],
    pub estimated: [f64; 2],
    pub std_error: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentReport {
    pub ensemble: Ensemble,
    pub dim: usize,
    pub samples: usize,
    pub seed: u64,
    pub entries: Vec<MomentEntry>,
    /// Largest `‖U†U - 1‖_F` seen.
    pub max_unitarity_residual: f64,
    /// Largest `‖U - Uᵀ‖_F` (COE) or `‖U - U^R‖_F` (CSE, symplectic test group
    /// uses `‖UᵀJU - J‖_F`); zero otherwise.
    pub max_structure_residual: f64,
    pub all_pass: bool,
}

impl MomentReport {
    pub fn failures(&self) -> impl Iterator<Item = &MomentEntry> {
        self.entries.iter().filter(|e| !e.pass)
    }
}

/// One tracked quantity: a product of matrix entries (with conjugation flags)
/// and its analytic value.
struct Probe {
    label: String,
    /// `(row, col, conjugate)` factors.
    factors: Vec<(usize, usize, bool)>,
    predicted: f64,
}

impl Probe {
    fn eval(&self, m: &CMatrix) -> C64 {
        self.factors.iter().fold(C64::new(1.0, 0.0), |acc, &(r, c, conj)| {
            let x = m[(r, c)];
            acc * if conj { x.conj() } else { x }
        })
    }
}

fn unitary_panel(n: usize) -> Vec<([usize; 4], [usize; 4])> {
    let raw: [([usize; 4], [usize; 4]); 12] = [
        ([0, 0, 0, 0], [0, 0, 0, 0]),
        ([0, 1, 0, 1], [0, 1, 0, 1]),
        ([0, 1, 1, 0], [0, 1, 0, 1]),
        ([0, 1, 0, 1], [0, 0, 0, 0]),
        ([0, 0, 0, 0], [0, 1, 0, 1]),
        ([0, 1, 0, 1], [2, 3, 2, 3]),
        ([0, 1, 0, 1], [2, 3, 3, 2]),
        ([0, 0, 1, 1], [0, 1, 0, 1]),
        ([0, 1, 2, 3], [0, 1, 0, 1]),
        ([1, 2, 1, 2], [3, 3, 3, 3]),
        ([0, 1, 1, 0], [1, 0, 0, 1]),
        ([2, 2, 2, 2], [1, 3, 1, 3]),
    ];
    let mut out: Vec<([usize; 4], [usize; 4])> =
        raw.iter().map(|(i, j)| (i.map(|x| x % n), j.map(|x| x % n))).collect();
    out.dedup();
    out
}

fn orthogonal_panel(n: usize) -> Vec<([usize; 4], [usize; 4])> {
    let raw: [([usize; 4], [usize; 4]); 10] = [
        ([0, 0, 0, 0], [0, 0, 0, 0]),
        ([0, 0, 1, 1], [0, 0, 1, 1]),
        ([0, 0, 1, 1], [0, 1, 0, 1]),
        ([0, 1, 0, 1], [0, 1, 0, 1]),
        ([0, 0, 1, 1], [2, 2, 2, 2]),
        ([0, 0, 0, 0], [0, 0, 1, 1]),
        ([0, 1, 1, 0], [2, 3, 3, 2]),
        ([0, 1, 1, 0], [2, 3, 2, 3]),
        ([0, 0, 1, 2], [0, 0, 1, 1]),
        ([3, 3, 3, 3], [1, 2, 1, 2]),
    ];
    let mut out: Vec<([usize; 4], [usize; 4])> =
        raw.iter().map(|(i, j)| (i.map(|x| x % n), j.map(|x| x % n))).collect();
    out.dedup();
    out
}

fn probes(ensemble: Ensemble, n: usize) -> Result<Vec<Probe>> {
    let mut out = Vec::new();
    let quads = || {
        (0..n).flat_map(move |a| {
            (0..n).flat_map(move |b| (0..n).flat_map(move |c| (0..n).map(move |d| [a, b, c, d])))
        })
    };
    match ensemble {
        Ensemble::Cue => {
            for [i1, j1, i2, j2] in quads() {
                out.push(Probe {
                    label: format!("U[{i1},{j1}] U*[{i2},{j2}]"),
                    factors: vec![(i1, j1, false), (i2, j2, true)],
                    predicted: moment2([i1, i2], [j1, j2], n)?,
                });
            }
            for (i, j) in unitary_panel(n) {
                out.push(Probe {
                    label: format!("U U U* U* rows {i:?} cols {j:?}"),
                    factors: (0..4).map(|k| (i[k], j[k], k >= 2)).collect(),
                    predicted: moment4_cue_contraction(i, j, n)?,
                });
            }
        }
        Ensemble::Orthogonal => {
            for [i1, j1, i2, j2] in quads() {
                out.push(Probe {
                    label: format!("O[{i1},{j1}] O[{i2},{j2}]"),
                    factors: vec![(i1, j1, false), (i2, j2, false)],
                    predicted: moment2([i1, i2], [j1, j2], n)?,
                });
            }
            for (i, j) in orthogonal_panel(n) {
                out.push(Probe {
                    label: format!("O O O O rows {i:?} cols {j:?}"),
                    factors: (0..4).map(|k| (i[k], j[k], false)).collect(),
                    predicted: moment4_coe_contraction(i, j, n)?,
                });
            }
        }
        Ensemble::Coe => {
            for [a, b, c, d] in quads() {
                out.push(Probe {
                    label: format!("S[{a},{b}] S*[{c},{d}]"),
                    factors: vec![(a, b, false), (c, d, true)],
                    predicted: moment2_coe_dyson(a, b, c, d, n)?,
                });
            }
        }
        Ensemble::Cse | Ensemble::Symplectic => {
            // Column-0 state of a Haar symplectic matrix against Haar-state moments.
            for a in 0..n {
                for b in 0..n {
                    out.push(Probe {
                        label: format!("psi[{a}] psi*[{b}]"),
                        factors: vec![(a, 0, false), (b, 0, true)],
                        predicted: moment2([a, b], [0, 0], n)?,
                    });
                }
            }
            for [a, b, c, d] in quads() {
                out.push(Probe {
                    label: format!("psi[{a}] psi[{b}] psi*[{c}] psi*[{d}]"),
                    factors: vec![(a, 0, false), (b, 0, false), (c, 0, true), (d, 0, true)],
                    predicted: moment4_state(a, b, c, d, n)?,
                });
            }
        }
    }
    Ok(out)
}

struct ChunkStats {
    re: Vec<Accumulator>,
    im: Vec<Accumulator>,
    unitarity: f64,
    structure: f64,
}

/// Monte-Carlo check of second moments and a fixed fourth-moment panel.
///
/// `Cse` samples self-dual `U^R U` matrices for the structural checks and
/// runs the state 2-design test on columns of Haar symplectic matrices; the
/// self-dual matrices themselves are not state designs (`S_{10} = 0`).
pub fn verify_moments(ensemble: Ensemble, n: usize, samples: usize, seed: u64) -> Result<MomentReport> {
    if n == 0 || n > 8 {
        return Err(Error::invalid(format!("moment verification supports 1 <= N <= 8, got {n}")));
    }
    if samples < 1000 {
        return Err(Error::invalid("moment verification needs at least 1000 samples"));
    }
    check_dim(n, matches!(ensemble, Ensemble::Cse | Ensemble::Symplectic))?;
    let probes = probes(ensemble, n)?;
    let j = if n % 2 == 0 { symplectic_form(n) } else { CMatrix::zeros(n, n) };
    let chunks = rng::chunked(samples, seed, |rng, range| {
        let mut st = ChunkStats {
            re: vec![Accumulator::default(); probes.len()],
            im: vec![Accumulator::default(); probes.len()],
            unitarity: 0.0,
            structure: 0.0,
        };
        for _ in range {
            let s = sample_with(ensemble, n, rng).expect("validated dimension").matrix;
            st.unitarity = st.unitarity.max(unitarity_residual(&s));
            let probe_matrix = match ensemble {
                Ensemble::Coe => {
                    st.structure = st.structure.max((&s - s.transpose()).norm());
                    s
                }
                Ensemble::Cse => {
                    st.structure = st.structure.max((&s - symplectic_dual(&s)).norm());
                    let v = haar_symplectic(n, rng);
                    st.unitarity = st.unitarity.max(unitarity_residual(&v));
                    st.structure = st.structure.max((v.transpose() * &j * &v - &j).norm());
                    v
                }
                Ensemble::Symplectic => {
                    st.structure = st.structure.max((s.transpose() * &j * &s - &j).norm());
                    s
                }
                _ => s,
            };
            for (k, p) in probes.iter().enumerate() {
                let z = p.eval(&probe_matrix);
                st.re[k].push(z.re);
                st.im[k].push(z.im);
            }
        }
        st
    });
    let mut re = vec![Accumulator::default(); probes.len()];
    let mut im = vec![Accumulator::default(); probes.len()];
    let (mut unitarity, mut structure) = (0.0f64, 0.0f64);
    for c in &chunks {
        for k in 0..probes.len() {
            re[k].merge(&c.re[k]);
            im[k].merge(&c.im[k]);
        }
        unitarity = unitarity.max(c.unitarity);
        structure = structure.max(c.structure);
    }
    let entries: Vec<MomentEntry> = probes
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let est = [re[k].mean(), im[k].mean()];
            let se = re[k].std_error().hypot(im[k].std_error());
            let dev = (est[0] - p.predicted).hypot(est[1]);
            let pass = if se > 0.0 { dev <= 5.0 * se } else { dev <= 1e-12 };
            MomentEntry { label: p.label.clone(), predicted: [p.predicted, 0.0], estimated: est, std_error: se, pass }
        })
        .collect();
    let all_pass = entries.iter().all(|e| e.pass) && unitarity <= 1e-12 && structure <= 1e-12;
    Ok(MomentReport {
        ensemble,
        dim: n,
        samples,
        seed,
        entries,
        max_unitarity_residual: unitarity,
        max_structure_residual: structure,
        all_pass,
    })
}
