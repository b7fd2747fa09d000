//! Permutation-invariant evolution in the collective (Dicke) basis
//! tensored with the photon Fock space.
//!
//! A permutation-symmetric state of N identical emitters is block
//! diagonal over the collective-spin sectors j = N/2, N/2−1, …: one
//! representative matrix ρ^(j) per sector, repeated d_N(j) times, with
//! d_N(j) = C(N, N/2−j) − C(N, N/2−j−1). Storage is polynomial in N
//! where the computational basis is exponential.
//!
//! The Tavis–Cummings coupling and photon loss act within sectors via
//! the collective matrix elements ⟨j,m±1|J±|j,m⟩ = √(j(j+1) − m(m±1)).
//! Local decay and dephasing couple neighbouring sectors; their
//! coefficients come from the (N−1)⊗½ branching of each sector,
//! expressed through the Clebsch–Gordan amplitudes of a single spin-½
//! attached to an (N−1)-emitter core. Every coefficient is validated
//! against the exact backend before the large-N regime is trusted.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::liouvillian::ModelParams;
use crate::observables::{
    entropy_from_eigenvalues, observable_set, pair_from_correlators, ObservableSet,
    PairCorrelators, Quantity,
};
use crate::ode::{integrate, OdeState, StepperOpts};
use crate::propagator::{
    EvolveOptions, ObservableScope, PositivityCheck, TimeGrid, TrajectoryDiagnostics,
    TrajectoryResult, EIGENVALUE_FLOOR, TRACE_TOL,
};

/// Binomial coefficient; zero outside 0 ≤ k ≤ n.
fn binomial(n: usize, k: isize) -> u128 {
    if k < 0 || k as usize > n {
        return 0;
    }
    let k = (k as usize).min(n - k as usize);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Multiplicity of the spin-j sector of N spin-½ emitters.
fn degeneracy(n: usize, two_j: usize) -> u128 {
    let half = (n as isize - two_j as isize) / 2;
    binomial(n, half) - binomial(n, half - 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sector {
    pub two_j: usize,
    pub degeneracy: u128,
}

/// Sector layout of the collective representation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DickeBlocks {
    n_emitters: usize,
    fock_dim: usize,
    sectors: Vec<Sector>,
}

impl DickeBlocks {
    pub fn n_emitters(&self) -> usize {
        self.n_emitters
    }

    pub fn fock_dim(&self) -> usize {
        self.fock_dim
    }

    pub fn sectors(&self) -> &[Sector] {
        &self.sectors
    }

    /// Side length of the ρ^(j) block for sector index `s`.
    pub fn block_side(&self, s: usize) -> usize {
        (self.sectors[s].two_j + 1) * self.fock_dim
    }

    /// Σ_j d_N(j)·(2j+1); equals 2^N.
    pub fn total_multiplicity(&self) -> u128 {
        self.sectors
            .iter()
            .map(|s| s.degeneracy * (s.two_j + 1) as u128)
            .sum()
    }

    /// Complex entries stored across all blocks.
    pub fn state_entries(&self) -> usize {
        (0..self.sectors.len()).map(|s| self.block_side(s).pow(2)).sum()
    }
}

/// Enumerate the collective-spin sectors of N emitters with the given
/// photon-space dimension.
pub fn enumerate_blocks(n_emitters: usize, fock_dim: usize) -> Result<DickeBlocks> {
    if n_emitters < 1 {
        return Err(Error::Dimension("enumerate_blocks: N must be >= 1".into()));
    }
    if fock_dim < 1 {
        return Err(Error::Dimension("enumerate_blocks: fock_dim must be >= 1".into()));
    }
    let mut sectors = Vec::new();
    let mut two_j = n_emitters;
    loop {
        let d = degeneracy(n_emitters, two_j);
        debug_assert!(d > 0);
        sectors.push(Sector {
            two_j,
            degeneracy: d,
        });
        if two_j < 2 {
            break;
        }
        two_j -= 2;
    }
    Ok(DickeBlocks {
        n_emitters,
        fock_dim,
        sectors,
    })
}

/// Block-structured state: one representative matrix per sector, weighted
/// by the sector multiplicity in traces and expectations.
#[derive(Debug, Clone, PartialEq)]
pub struct DickeState {
    pub blocks: Vec<DMatrix<Complex64>>,
}

impl DickeState {
    pub fn zeros(blocks: &DickeBlocks) -> Self {
        Self {
            blocks: (0..blocks.sectors.len())
                .map(|s| DMatrix::zeros(blocks.block_side(s), blocks.block_side(s)))
                .collect(),
        }
    }

    /// Σ_j d_N(j) tr ρ^(j).
    pub fn weighted_trace(&self, blocks: &DickeBlocks) -> Complex64 {
        self.blocks
            .iter()
            .zip(&blocks.sectors)
            .map(|(b, s)| b.diagonal().sum() * Complex64::new(s.degeneracy as f64, 0.0))
            .sum()
    }
}

impl OdeState for DickeState {
    fn set_zero(&mut self) {
        for b in &mut self.blocks {
            b.fill(Complex64::ZERO);
        }
    }

    fn axpy(&mut self, a: f64, x: &Self) {
        for (dst, src) in self.blocks.iter_mut().zip(&x.blocks) {
            OdeState::axpy(dst, a, src);
        }
    }

    fn assign(&mut self, x: &Self) {
        for (dst, src) in self.blocks.iter_mut().zip(&x.blocks) {
            OdeState::assign(dst, src);
        }
    }

    fn error_ratio(err: &Self, y0: &Self, y1: &Self, atol: f64, rtol: f64) -> f64 {
        err.blocks
            .iter()
            .zip(&y0.blocks)
            .zip(&y1.blocks)
            .map(|((e, a), b)| DMatrix::error_ratio(e, a, b, atol, rtol))
            .fold(0.0, f64::max)
    }
}

/// All emitters de-excited (the m = −N/2 state of the fully symmetric
/// sector) with n_p photons.
pub fn initial_dicke_state(params: &ModelParams, blocks: &DickeBlocks) -> Result<DickeState> {
    params.validate()?;
    let np = params.n_photons_resolved()?;
    if np >= blocks.fock_dim {
        return Err(Error::Dimension(format!(
            "n_photons = {np} does not fit in fock_dim = {}",
            blocks.fock_dim
        )));
    }
    if params.n_emitters != blocks.n_emitters {
        return Err(Error::Dimension("params and blocks disagree on N".into()));
    }
    let mut state = DickeState::zeros(blocks);
    // top sector, k = 0 (m = −j), photon index n_p
    state.blocks[0][(np, np)] = Complex64::new(1.0, 0.0);
    Ok(state)
}

// Clebsch–Gordan amplitudes for coupling an (N−1)-core of spin j̄ with one
// spin-½ to total spin J (all angular momenta passed as twice their value):
//   cg_up   = ⟨j̄, m−½; ½, +½ | J, m⟩
//   cg_down = ⟨j̄, m+½; ½, −½ | J, m⟩
fn cg_up(two_j_total: usize, two_jbar: usize, two_m: isize) -> f64 {
    if two_m.unsigned_abs() as usize > two_j_total
        || (two_m - 1).unsigned_abs() as usize > two_jbar
    {
        return 0.0;
    }
    let denom = (2 * (two_jbar + 1)) as f64;
    if two_j_total == two_jbar + 1 {
        (((two_jbar as isize + two_m + 1) as f64) / denom).sqrt()
    } else if two_jbar > 0 && two_j_total == two_jbar - 1 {
        -(((two_jbar as isize - two_m + 1) as f64) / denom).sqrt()
    } else {
        0.0
    }
}

fn cg_down(two_j_total: usize, two_jbar: usize, two_m: isize) -> f64 {
    if two_m.unsigned_abs() as usize > two_j_total
        || (two_m + 1).unsigned_abs() as usize > two_jbar
    {
        return 0.0;
    }
    let denom = (2 * (two_jbar + 1)) as f64;
    if two_j_total == two_jbar + 1 {
        (((two_jbar as isize - two_m + 1) as f64) / denom).sqrt()
    } else if two_jbar > 0 && two_j_total == two_jbar - 1 {
        (((two_jbar as isize + two_m + 1) as f64) / denom).sqrt()
    } else {
        0.0
    }
}

/// ⟨j, m+1|J⁺|j, m⟩ with arguments as twice their value.
fn jp_element(two_j: usize, two_m: isize) -> f64 {
    let num = (two_j * (two_j + 2)) as f64 - (two_m * (two_m + 2)) as f64;
    (num / 4.0).max(0.0).sqrt()
}

/// One sector-to-sector sandwich contribution:
/// out^(t)[(k,n),(l,n')] += amp[k]·amp[l]·ρ^(s)[(k+off,n),(l+off,n')],
/// with the overall rate and branching weight folded into amp.
struct SectorPath {
    target: usize,
    source: usize,
    /// m-index offset into the source block; amp is zero wherever the
    /// shifted index would leave the source range.
    offset: isize,
    amp: Vec<f64>,
}

/// Collective-basis generator: per-sector Hamiltonian and photon loss,
/// plus cross-sector paths for the local channels.
pub struct DickeGenerator {
    blocks: DickeBlocks,
    kappa: f64,
    hamiltonians: Vec<crate::sparse::Sparse>,
    /// ½-anticommutator weights per sector: D[(k,n)] = γ(N/2+m) + κn + γφN.
    loss_diag: Vec<Vec<f64>>,
    decay_paths: Vec<SectorPath>,
    dephasing_paths: Vec<SectorPath>,
}

/// Assemble the permutation-invariant generator for the model.
pub fn build_dicke_generator(params: &ModelParams, blocks: &DickeBlocks) -> Result<DickeGenerator> {
    params.validate()?;
    if params.n_emitters != blocks.n_emitters {
        return Err(Error::Dimension("params and blocks disagree on N".into()));
    }
    let n = blocks.n_emitters;
    let f = blocks.fock_dim;

    let mut hamiltonians = Vec::with_capacity(blocks.sectors.len());
    let mut loss_diag = Vec::with_capacity(blocks.sectors.len());
    for sec in &blocks.sectors {
        let two_j = sec.two_j;
        let side = (two_j + 1) * f;
        let mut h = DMatrix::<Complex64>::zeros(side, side);
        let mut d = vec![0.0f64; side];
        for k in 0..=two_j {
            let two_m = 2 * k as isize - two_j as isize;
            let m = two_m as f64 / 2.0;
            for nn in 0..f {
                let r = k * f + nn;
                h[(r, r)] = Complex64::new(params.omega_q * m + params.omega_c * nn as f64, 0.0);
                d[r] = params.gamma * (n as f64 / 2.0 + m)
                    + params.kappa * nn as f64
                    + params.gamma_phi * n as f64;
                // g (J⁺a + J⁻a†): |m, n⟩ → √n·jp(m)·|m+1, n−1⟩ and h.c.
                if params.g != 0.0 && k < two_j && nn > 0 {
                    let amp = params.g * jp_element(two_j, two_m) * (nn as f64).sqrt();
                    let r2 = (k + 1) * f + (nn - 1);
                    h[(r2, r)] = Complex64::new(amp, 0.0);
                    h[(r, r2)] = Complex64::new(amp, 0.0);
                }
            }
        }
        hamiltonians.push(crate::sparse::Sparse::from_dense(&h));
        loss_diag.push(d);
    }

    // Cross-sector sandwich paths. For each target sector j' and source
    // sector j ∈ {j'−1, j', j'+1}, the branching over the (N−1)-core spin
    // j̄ contributes one separable kernel amp[k]·amp[l] per branch.
    let mut decay_paths = Vec::new();
    let mut dephasing_paths = Vec::new();
    let sector_index: BTreeMap<usize, usize> = blocks
        .sectors
        .iter()
        .enumerate()
        .map(|(i, s)| (s.two_j, i))
        .collect();
    for (t, tsec) in blocks.sectors.iter().enumerate() {
        let two_jt = tsec.two_j as isize;
        let d_target = tsec.degeneracy as f64;
        for two_js in [two_jt - 2, two_jt, two_jt + 2] {
            if two_js < 0 {
                continue;
            }
            let Some(&s) = sector_index.get(&(two_js as usize)) else {
                continue;
            };
            let two_js_u = blocks.sectors[s].two_j;
            for two_jbar in [two_jt - 1, two_jt + 1] {
                if two_jbar < 0
                    || two_jbar as usize > n - 1
                    || (two_js - two_jbar).abs() != 1
                {
                    continue;
                }
                let dbar = degeneracy(n - 1, two_jbar as usize);
                if dbar == 0 {
                    continue;
                }
                let branch_weight = n as f64 * (dbar as f64 / d_target);
                let two_jbar = two_jbar as usize;

                if params.gamma > 0.0 {
                    // Σ σ⁻ ρ σ⁺: amp[k] ∝ f(j, j̄, μ+1)·g(j', j̄, μ)
                    let scale = (params.gamma * branch_weight).sqrt();
                    let amp: Vec<f64> = (0..=tsec.two_j)
                        .map(|k| {
                            let two_mu = 2 * k as isize - two_jt;
                            scale
                                * cg_up(two_js_u, two_jbar, two_mu + 2)
                                * cg_down(tsec.two_j, two_jbar, two_mu)
                        })
                        .collect();
                    if amp.iter().any(|a| *a != 0.0) {
                        // the sandwich lowers m by one: source two_m = two_mu + 2
                        let offset = (two_js - two_jt) / 2 + 1;
                        decay_paths.push(SectorPath {
                            target: t,
                            source: s,
                            offset,
                            amp,
                        });
                    }
                }
                if params.gamma_phi > 0.0 {
                    // Σ σᶻ ρ σᶻ: amp[k] ∝ f(j',j̄,μ)f(j,j̄,μ) − g(j',j̄,μ)g(j,j̄,μ)
                    let scale = (params.gamma_phi * branch_weight).sqrt();
                    let amp: Vec<f64> = (0..=tsec.two_j)
                        .map(|k| {
                            let two_mu = 2 * k as isize - two_jt;
                            scale
                                * (cg_up(tsec.two_j, two_jbar, two_mu)
                                    * cg_up(two_js_u, two_jbar, two_mu)
                                    - cg_down(tsec.two_j, two_jbar, two_mu)
                                        * cg_down(two_js_u, two_jbar, two_mu))
                        })
                        .collect();
                    if amp.iter().any(|a| *a != 0.0) {
                        // m is unchanged; offset only re-centres the k index
                        let offset = (two_js - two_jt) / 2;
                        dephasing_paths.push(SectorPath {
                            target: t,
                            source: s,
                            offset,
                            amp,
                        });
                    }
                }
            }
        }
    }

    Ok(DickeGenerator {
        blocks: blocks.clone(),
        kappa: params.kappa,
        hamiltonians,
        loss_diag,
        decay_paths,
        dephasing_paths,
    })
}

impl DickeGenerator {
    pub fn blocks(&self) -> &DickeBlocks {
        &self.blocks
    }

    pub fn rhs_into(&self, state: &DickeState, out: &mut DickeState) {
        out.set_zero();
        let f = self.blocks.fock_dim;
        let minus_i = Complex64::new(0.0, -1.0);
        let plus_i = Complex64::new(0.0, 1.0);

        for (s, rho) in state.blocks.iter().enumerate() {
            let dst = &mut out.blocks[s];
            // −i[H, ρ]
            self.hamiltonians[s].left_mul_acc(minus_i, rho, dst);
            self.hamiltonians[s].right_mul_acc(plus_i, rho, dst);
            // −½{D, ρ} with diagonal D
            let d = &self.loss_diag[s];
            for c in 0..rho.ncols() {
                for r in 0..rho.nrows() {
                    let w = 0.5 * (d[r] + d[c]);
                    if w != 0.0 {
                        dst[(r, c)] -= Complex64::new(w, 0.0) * rho[(r, c)];
                    }
                }
            }
            // κ a ρ a†
            if self.kappa > 0.0 && f > 1 {
                let side_m = rho.nrows() / f;
                for kk in 0..side_m {
                    for ll in 0..side_m {
                        for nn in 0..f - 1 {
                            let an = ((nn + 1) as f64).sqrt();
                            for np in 0..f - 1 {
                                let w = self.kappa * an * ((np + 1) as f64).sqrt();
                                dst[(kk * f + nn, ll * f + np)] += Complex64::new(w, 0.0)
                                    * rho[(kk * f + nn + 1, ll * f + np + 1)];
                            }
                        }
                    }
                }
            }
        }

        for path in self.decay_paths.iter().chain(&self.dephasing_paths) {
            let rho = &state.blocks[path.source];
            let dst = &mut out.blocks[path.target];
            for (k, &ak) in path.amp.iter().enumerate() {
                if ak == 0.0 {
                    continue;
                }
                for (l, &al) in path.amp.iter().enumerate() {
                    if al == 0.0 {
                        continue;
                    }
                    let w = Complex64::new(ak * al, 0.0);
                    let src_k = (k as isize + path.offset) as usize * f;
                    let src_l = (l as isize + path.offset) as usize * f;
                    for nn in 0..f {
                        for np in 0..f {
                            dst[(k * f + nn, l * f + np)] += w * rho[(src_k + nn, src_l + np)];
                        }
                    }
                }
            }
        }
    }

    /// Collective expectations needed for the pair observables.
    fn collective_expectations(&self, state: &DickeState) -> CollectiveExpectations {
        let f = self.blocks.fock_dim;
        let mut out = CollectiveExpectations::default();
        for (s, rho) in state.blocks.iter().enumerate() {
            let sec = &self.blocks.sectors[s];
            let weight = sec.degeneracy as f64;
            let two_j = sec.two_j;
            let jj = two_j as f64 / 2.0;
            for k in 0..=two_j {
                let two_m = 2 * k as isize - two_j as isize;
                let m = two_m as f64 / 2.0;
                for nn in 0..f {
                    let r = k * f + nn;
                    let p = rho[(r, r)].re;
                    out.jz += weight * m * p;
                    out.jz2 += weight * m * m * p;
                    // (J⁺J⁻) diagonal element: j(j+1) − m(m−1)
                    out.jpjm += weight * (jj * (jj + 1.0) - m * (m - 1.0)) * p;
                    if k < two_j {
                        let a = jp_element(two_j, two_m);
                        let coh = rho[(r, (k + 1) * f + nn)];
                        out.jp += coh * (weight * a);
                        out.jpjz += coh * (weight * a * m);
                    }
                    if k + 1 < two_j {
                        let a2 = jp_element(two_j, two_m + 2) * jp_element(two_j, two_m);
                        out.jpjp += rho[(r, (k + 2) * f + nn)] * (weight * a2);
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct CollectiveExpectations {
    jz: f64,
    jz2: f64,
    jpjm: f64,
    jp: Complex64,
    jpjz: Complex64,
    jpjp: Complex64,
}

impl CollectiveExpectations {
    /// Exchangeable pair correlators from collective moments.
    fn pair_correlators(&self, n: usize) -> PairCorrelators {
        let nf = n as f64;
        let pairs = nf * (nf - 1.0);
        PairCorrelators {
            sz: 2.0 * self.jz / nf,
            sp: self.jp / nf,
            sp_sm: Complex64::new((self.jpjm - nf / 2.0 - self.jz) / pairs, 0.0),
            sp_sp: self.jpjp / pairs,
            sp_sz: (self.jpjz * 2.0 + self.jp) / pairs,
            sz_sz: (4.0 * self.jz2 - nf) / pairs,
        }
    }
}

/// The tracked quantities evaluated on a collective-basis state; the pair
/// state is reconstructed from permutation-symmetric correlators.
pub fn dicke_observables(gen: &DickeGenerator, state: &DickeState) -> Result<ObservableSet> {
    let n = gen.blocks.n_emitters;
    if n < 2 {
        return Err(Error::Dimension(
            "pair correlators are undefined for N < 2".into(),
        ));
    }
    let pair = pair_from_correlators(&gen.collective_expectations(state).pair_correlators(n));
    observable_set(&pair)
}

const POSITIVITY_AUTO_SIDE: usize = 256;
const POSITIVITY_STRIDE: usize = 10;

/// Integrate the collective-basis master equation over `grid`, recording
/// the standard observable series.
pub fn evolve_dicke(
    gen: &DickeGenerator,
    state0: &DickeState,
    grid: &TimeGrid,
    opts: &EvolveOptions,
) -> Result<TrajectoryResult> {
    let blocks = &gen.blocks;
    let n = blocks.n_emitters;
    let tr0 = state0.weighted_trace(blocks);
    if (tr0.re - 1.0).abs() > TRACE_TOL || tr0.im.abs() > TRACE_TOL {
        return Err(Error::StateCorruption {
            t: 0.0,
            what: format!("initial weighted trace = {tr0}"),
        });
    }

    let track_series = n >= 2;
    let times = grid.times();
    let stepper = StepperOpts::new(opts.rtol, opts.atol, 2.0 * grid.spacing());

    let check_positivity = match opts.positivity {
        PositivityCheck::On => true,
        PositivityCheck::Off => false,
        PositivityCheck::Auto => (0..blocks.sectors.len())
            .map(|s| blocks.block_side(s))
            .max()
            .unwrap_or(0) <= POSITIVITY_AUTO_SIDE,
    };

    let mut series: BTreeMap<Quantity, Vec<f64>> = BTreeMap::new();
    if track_series {
        for q in Quantity::ALL {
            series.insert(q, Vec::with_capacity(times.len()));
        }
    }
    let mut max_trace_drift = 0.0f64;
    let mut min_eigenvalue: Option<f64> = None;
    let mut first_error: Option<Error> = None;

    let rhs = |y: &DickeState, dy: &mut DickeState| gen.rhs_into(y, dy);
    let project = |y: &mut DickeState| -> f64 {
        let mut worst = 0.0f64;
        for b in &mut y.blocks {
            let side = b.nrows();
            for i in 0..side {
                for j in i..side {
                    let a = b[(i, j)];
                    let c = b[(j, i)].conj();
                    let avg = (a + c) * Complex64::new(0.5, 0.0);
                    worst = worst.max((a - avg).norm());
                    b[(i, j)] = avg;
                    b[(j, i)] = avg.conj();
                }
            }
        }
        worst
    };
    let emit = |idx: usize, t: f64, y: &DickeState| -> Result<()> {
        let tr = y.weighted_trace(blocks);
        let drift = (tr.re - 1.0).abs().max(tr.im.abs());
        max_trace_drift = max_trace_drift.max(drift);
        if drift > TRACE_TOL * 10.0 {
            first_error = Some(Error::StateCorruption {
                t,
                what: format!("trace drift {drift:.3e}"),
            });
            return Err(Error::Integration {
                t,
                reason: "state corruption".into(),
            });
        }
        if check_positivity && idx % POSITIVITY_STRIDE == 0 {
            let mut min = 0.0f64;
            for b in &y.blocks {
                let sym = (b + b.adjoint()) * Complex64::new(0.5, 0.0);
                let eig = SymmetricEigen::new(sym);
                min = eig.eigenvalues.iter().copied().fold(min, f64::min);
            }
            min_eigenvalue = Some(min_eigenvalue.map_or(min, |m: f64| m.min(min)));
            if min < EIGENVALUE_FLOOR {
                first_error = Some(Error::StateCorruption {
                    t,
                    what: format!("negative eigenvalue {min:.3e}"),
                });
                return Err(Error::Integration {
                    t,
                    reason: "state corruption".into(),
                });
            }
        }
        if track_series {
            let correlators = gen.collective_expectations(y).pair_correlators(n);
            let pair = pair_from_correlators(&correlators);
            let mut set = observable_set(&pair)?;
            if opts.scope == ObservableScope::Global {
                let (s_global, c_rel_global) = global_entropies(blocks, y);
                set.entropy = s_global;
                set.c_rel = c_rel_global;
            }
            for (q, v) in set.to_map() {
                series.get_mut(&q).expect("series preallocated").push(v);
            }
        }
        Ok(())
    };

    let ode = match integrate(rhs, project, state0, &times, &stepper, emit) {
        Ok(d) => d,
        Err(e) => return Err(first_error.unwrap_or(e)),
    };

    Ok(TrajectoryResult {
        times,
        series,
        diagnostics: TrajectoryDiagnostics {
            support_dim: blocks.state_entries(),
            full_dim: blocks.total_multiplicity().try_into().unwrap_or(usize::MAX),
            max_trace_drift,
            max_herm_correction: ode.max_projection,
            min_eigenvalue,
            ode,
        },
        snapshots: None,
    })
}

/// Global-state S and C_rel. The full spectrum is the union of the block
/// spectra with multiplicity d_N(j); the computational-basis diagonal is
/// uniform over same-excitation product states with weight d_N(j)/C(N, e).
fn global_entropies(blocks: &DickeBlocks, state: &DickeState) -> (f64, f64) {
    let mut s_global = 0.0;
    for (b, sec) in state.blocks.iter().zip(&blocks.sectors) {
        let sym = (b + b.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(sym);
        s_global +=
            sec.degeneracy as f64 * entropy_from_eigenvalues(eig.eigenvalues.iter().copied());
    }

    let n = blocks.n_emitters;
    let f = blocks.fock_dim;
    let mut s_diag = 0.0;
    for e in 0..=n {
        let two_m = 2 * e as isize - n as isize;
        let n_states = binomial(n, e as isize) as f64;
        for nn in 0..f {
            let mut p = 0.0;
            for (b, sec) in state.blocks.iter().zip(&blocks.sectors) {
                let two_j = sec.two_j as isize;
                if two_m.abs() > two_j {
                    continue;
                }
                let k = ((two_m + two_j) / 2) as usize;
                p += (sec.degeneracy as f64 / n_states) * b[(k * f + nn, k * f + nn)].re;
            }
            if p > crate::observables::EIGENVALUE_CLAMP {
                s_diag -= n_states * p * p.ln();
            }
        }
    }
    (s_global, (s_diag - s_global).max(0.0))
}
