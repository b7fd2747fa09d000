//! Tavis–Cummings Hamiltonian and Lindblad dissipators assembled into a
//! right-hand-side generator for dρ/dt.
//!
//! H = (ω_q/2) Σ_i σᶻ_i + g Σ_i (σ⁺_i a + σ⁻_i a†) + ω_c a†a
//!
//! dρ/dt = −i[H, ρ] + Σ_k k (L ρ L† − ½{L†L, ρ}) with one σ⁻ and one σᶻ
//! channel per emitter plus a single photon-loss channel:
//! L_γ = σ⁻_i, L_κ = a, L_γφ = σᶻ_i. ħ = 1; with g = 1 all rates and
//! times are in coupling units.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operators::{annihilation, embed_fock, embed_site, sigma_minus, sigma_z, HilbertDims, Operator};
use crate::sparse::Sparse;

/// Physical rates and sizes. Frequencies and rates share one unit system;
/// with `g = 1` (the default) times are dimensionless g·t.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub n_emitters: usize,
    /// Initial photon number; `None` means N/2 (even N only).
    pub n_photons: Option<usize>,
    pub omega_q: f64,
    pub omega_c: f64,
    pub g: f64,
    pub gamma: f64,
    pub kappa: f64,
    pub gamma_phi: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            n_emitters: 2,
            n_photons: None,
            omega_q: 0.0,
            omega_c: 0.0,
            g: 1.0,
            gamma: 0.1,
            kappa: 0.1,
            gamma_phi: 0.0225,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_emitters < 1 {
            return Err(Error::Config("n-emitters must be >= 1".into()));
        }
        // g = 0 is allowed for bare operator construction; time evolution
        // requires g > 0 (it fixes the unit system) and the harness
        // enforces that at the run boundary.
        if !(self.g >= 0.0) {
            return Err(Error::Config(format!("g must be >= 0, got {}", self.g)));
        }
        for (name, v) in [
            ("gamma", self.gamma),
            ("kappa", self.kappa),
            ("gamma-phi", self.gamma_phi),
        ] {
            if !(v >= 0.0) {
                return Err(Error::Config(format!("{name} must be >= 0, got {v}")));
            }
        }
        if !self.omega_q.is_finite() || !self.omega_c.is_finite() {
            return Err(Error::Config("omega-q and omega-c must be finite".into()));
        }
        Ok(())
    }

    /// Initial photon number, defaulting to N/2.
    ///
    /// Odd N has no half-integer default and demands an explicit value.
    pub fn n_photons_resolved(&self) -> Result<usize> {
        match self.n_photons {
            Some(n) => Ok(n),
            None => {
                if self.n_emitters % 2 == 0 {
                    Ok(self.n_emitters / 2)
                } else {
                    Err(Error::Config(format!(
                        "n-photons defaults to N/2, undefined for odd N = {}; set n-photons explicitly",
                        self.n_emitters
                    )))
                }
            }
        }
    }

    /// Composite dimensions with the exact Fock cutoff n_max = n_p.
    ///
    /// Total excitation is conserved by H and non-increasing under every
    /// dissipator, so the cutoff loses nothing.
    pub fn dims(&self) -> Result<HilbertDims> {
        self.validate()?;
        let np = self.n_photons_resolved()?;
        HilbertDims::new(self.n_emitters, np + 1)
    }
}

/// H = (ω_q/2) Σ σᶻ_i + g Σ (σ⁺_i a + σ⁻_i a†) + ω_c a†a, assembled
/// entry-wise (each term touches O(dim) entries).
pub fn build_hamiltonian(params: &ModelParams, dims: HilbertDims) -> Result<Operator> {
    params.validate()?;
    if dims.n_emitters() != params.n_emitters {
        return Err(Error::Dimension(format!(
            "params have {} emitters but dims have {}",
            params.n_emitters,
            dims.n_emitters()
        )));
    }
    let n = dims.n_emitters();
    let f = dims.fock_dim();
    let mut h = DMatrix::<Complex64>::zeros(dims.total_dim(), dims.total_dim());

    for idx in 0..dims.total_dim() {
        let bits = idx / f;
        let photon = idx % f;
        if params.omega_q != 0.0 || params.omega_c != 0.0 {
            // σᶻ eigenvalue is +1 for an excited site (bit set), −1 otherwise
            let excited = bits.count_ones() as f64;
            let sz_sum = 2.0 * excited - n as f64;
            h[(idx, idx)] = Complex64::new(
                params.omega_q / 2.0 * sz_sum + params.omega_c * photon as f64,
                0.0,
            );
        }
        // g σ⁺_i a: from (site i ground, photon ≥ 1) to (site i excited, photon − 1)
        if params.g != 0.0 && photon >= 1 {
            let amp = Complex64::new(params.g * (photon as f64).sqrt(), 0.0);
            for site in 0..n {
                let mask = 1usize << (n - 1 - site);
                if bits & mask == 0 {
                    let partner = (bits | mask) * f + photon - 1;
                    h[(partner, idx)] += amp;
                    h[(idx, partner)] += amp;
                }
            }
        }
    }
    Operator::new(h, dims)
}

/// The collapse channels of the model in a fixed order: N decay operators
/// (σ⁻_i, γ), then (a, κ), then N dephasing operators (σᶻ_i, γφ).
/// Channels with zero rate are omitted.
pub fn build_collapse_set(params: &ModelParams, dims: HilbertDims) -> Result<Vec<(Operator, f64)>> {
    collapse_descriptors(params)
        .map(|d| Ok((d.build(dims)?, d.rate)))
        .collect()
}

struct CollapseDescriptor {
    kind: CollapseKind,
    rate: f64,
}

enum CollapseKind {
    Decay(usize),
    PhotonLoss,
    Dephasing(usize),
}

impl CollapseDescriptor {
    fn build(&self, dims: HilbertDims) -> Result<Operator> {
        match self.kind {
            CollapseKind::Decay(site) => embed_site(&sigma_minus(), site, dims),
            CollapseKind::PhotonLoss => embed_fock(&annihilation(dims.fock_dim())?, dims),
            CollapseKind::Dephasing(site) => embed_site(&sigma_z(), site, dims),
        }
    }
}

fn collapse_descriptors(params: &ModelParams) -> impl Iterator<Item = CollapseDescriptor> + '_ {
    let n = params.n_emitters;
    let decay = (0..n).filter(|_| params.gamma > 0.0).map(move |site| CollapseDescriptor {
        kind: CollapseKind::Decay(site),
        rate: params.gamma,
    });
    let loss = (params.kappa > 0.0).then_some(CollapseDescriptor {
        kind: CollapseKind::PhotonLoss,
        rate: params.kappa,
    });
    let dephase = (0..n)
        .filter(|_| params.gamma_phi > 0.0)
        .map(move |site| CollapseDescriptor {
            kind: CollapseKind::Dephasing(site),
            rate: params.gamma_phi,
        });
    decay.chain(loss).chain(dephase)
}

struct CollapseTerm {
    op: Sparse,
    op_dag: Sparse,
    norm: Sparse, // L†L
    rate: f64,
}

/// Hamiltonian plus collapse set, compiled for repeated application.
pub struct Generator {
    dims: HilbertDims,
    hamiltonian: Sparse,
    collapse: Vec<CollapseTerm>,
}

const HERMITICITY_TOL: f64 = 1e-12;

impl Generator {
    /// Assemble from prebuilt dense operators; consumes them after
    /// compiling to sparse form.
    pub fn new(hamiltonian: Operator, collapse_set: Vec<(Operator, f64)>) -> Result<Self> {
        let dims = hamiltonian.dims;
        if hamiltonian.hermiticity_defect() > HERMITICITY_TOL {
            return Err(Error::Dimension(format!(
                "hamiltonian is not Hermitian (defect {:.3e})",
                hamiltonian.hermiticity_defect()
            )));
        }
        let h = Sparse::from_dense(&hamiltonian.matrix);
        drop(hamiltonian);
        let mut collapse = Vec::with_capacity(collapse_set.len());
        for (op, rate) in collapse_set {
            collapse.push(Self::compile_term(op, rate, dims)?);
        }
        Ok(Self {
            dims,
            hamiltonian: h,
            collapse,
        })
    }

    /// Build directly from model parameters, holding at most one dense
    /// operator at a time.
    pub fn from_params(params: &ModelParams, dims: HilbertDims) -> Result<Self> {
        let h = build_hamiltonian(params, dims)?;
        let hs = Sparse::from_dense(&h.matrix);
        drop(h);
        let mut collapse = Vec::new();
        for d in collapse_descriptors(params) {
            let op = d.build(dims)?;
            collapse.push(Self::compile_term(op, d.rate, dims)?);
        }
        Ok(Self {
            dims,
            hamiltonian: hs,
            collapse,
        })
    }

    fn compile_term(op: Operator, rate: f64, dims: HilbertDims) -> Result<CollapseTerm> {
        if op.dims != dims {
            return Err(Error::Dimension(
                "collapse operator dims differ from hamiltonian dims".into(),
            ));
        }
        if rate < 0.0 {
            return Err(Error::Dimension(format!("collapse rate must be >= 0, got {rate}")));
        }
        let sparse = Sparse::from_dense(&op.matrix);
        let dag = op.dagger();
        let norm = sparse.gram();
        Ok(CollapseTerm {
            op: sparse,
            op_dag: Sparse::from_dense(&dag.matrix),
            norm,
            rate,
        })
    }

    pub fn dims(&self) -> HilbertDims {
        self.dims
    }

    pub fn n_collapse(&self) -> usize {
        self.collapse.len()
    }

    pub fn hamiltonian_dense(&self) -> DMatrix<Complex64> {
        self.hamiltonian.to_dense()
    }

    /// dρ/dt = −i[H, ρ] + Σ_k k (L ρ L† − ½{L†L, ρ}).
    pub fn apply_rhs(&self, rho: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
        if rho.nrows() != self.dims.total_dim() || rho.ncols() != self.dims.total_dim() {
            return Err(Error::Dimension(format!(
                "state is {}x{} but generator dim is {}",
                rho.nrows(),
                rho.ncols(),
                self.dims.total_dim()
            )));
        }
        let mut out = DMatrix::zeros(rho.nrows(), rho.ncols());
        let mut scratch = DMatrix::zeros(rho.nrows(), rho.ncols());
        rhs_kernel(
            &self.hamiltonian,
            &self.collapse,
            rho,
            &mut out,
            &mut scratch,
        );
        Ok(out)
    }

    /// Restrict every operator to the support subspace `keep`.
    pub(crate) fn compile_on_support(&self, keep: &[usize], pos: &[u32]) -> CompiledRhs {
        CompiledRhs {
            dim: keep.len(),
            hamiltonian: self.hamiltonian.restrict(keep, pos),
            collapse: self
                .collapse
                .iter()
                .map(|t| CollapseTerm {
                    op: t.op.restrict(keep, pos),
                    op_dag: t.op_dag.restrict(keep, pos),
                    norm: t.norm.restrict(keep, pos),
                    rate: t.rate,
                })
                .collect(),
        }
    }

    /// Basis indices reachable from `seeds` under the generator's
    /// sparsity pattern. A state supported on the closure stays supported
    /// on it exactly, so evolution can be confined to this subspace with
    /// no approximation.
    pub(crate) fn support_closure(&self, seeds: &[usize]) -> Vec<usize> {
        let dim = self.dims.total_dim();
        let mut seen = vec![false; dim];
        let mut stack: Vec<usize> = Vec::new();
        for &s in seeds {
            if !seen[s] {
                seen[s] = true;
                stack.push(s);
            }
        }
        while let Some(i) = stack.pop() {
            let mut visit = |j: usize| {
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            };
            for &r in self.hamiltonian.rows_from_col(i) {
                visit(r);
            }
            for term in &self.collapse {
                for &r in term.op.rows_from_col(i) {
                    visit(r);
                }
                for &r in term.norm.rows_from_col(i) {
                    visit(r);
                }
            }
        }
        (0..dim).filter(|&i| seen[i]).collect()
    }
}

/// Generator restricted to a support subspace; same structure, smaller dim.
pub(crate) struct CompiledRhs {
    dim: usize,
    hamiltonian: Sparse,
    collapse: Vec<CollapseTerm>,
}

impl CompiledRhs {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rhs_into(
        &self,
        rho: &DMatrix<Complex64>,
        out: &mut DMatrix<Complex64>,
        scratch: &mut DMatrix<Complex64>,
    ) {
        out.fill(Complex64::ZERO);
        rhs_kernel(&self.hamiltonian, &self.collapse, rho, out, scratch);
    }
}

fn rhs_kernel(
    hamiltonian: &Sparse,
    collapse: &[CollapseTerm],
    rho: &DMatrix<Complex64>,
    out: &mut DMatrix<Complex64>,
    scratch: &mut DMatrix<Complex64>,
) {
    let minus_i = Complex64::new(0.0, -1.0);
    let plus_i = Complex64::new(0.0, 1.0);
    // −i(Hρ − ρH)
    hamiltonian.left_mul_acc(minus_i, rho, out);
    hamiltonian.right_mul_acc(plus_i, rho, out);
    for term in collapse {
        let rate = Complex64::new(term.rate, 0.0);
        let half_rate = Complex64::new(-0.5 * term.rate, 0.0);
        // L ρ L†
        scratch.fill(Complex64::ZERO);
        term.op.left_mul_acc(Complex64::new(1.0, 0.0), rho, scratch);
        term.op_dag.right_mul_acc(rate, scratch, out);
        // −½ k (L†L ρ + ρ L†L)
        term.norm.left_mul_acc(half_rate, rho, out);
        term.norm.right_mul_acc(half_rate, rho, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{expectation, total_excitation};
    use approx::assert_abs_diff_eq;
    use nalgebra::SymmetricEigen;

    fn max_norm(m: &DMatrix<Complex64>) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Straight dense evaluation of the Lindblad right-hand side, used as
    /// the independent oracle for the sparse kernel.
    fn dense_rhs(
        h: &DMatrix<Complex64>,
        collapse: &[(Operator, f64)],
        rho: &DMatrix<Complex64>,
    ) -> DMatrix<Complex64> {
        let i = Complex64::new(0.0, 1.0);
        let mut out = (h * rho - rho * h) * (-i);
        for (l, rate) in collapse {
            let ldag = l.matrix.adjoint();
            let norm = &ldag * &l.matrix;
            let sandwich = &l.matrix * rho * &ldag;
            let anti = &norm * rho + rho * &norm;
            out += (sandwich - anti * Complex64::new(0.5, 0.0)) * Complex64::new(*rate, 0.0);
        }
        out
    }

    fn random_hermitian(dim: usize, seed: u64) -> DMatrix<Complex64> {
        let mut state = seed;
        let mut next = move || {
            state = state.wrapping_add(0x9e3779b97f4a7c15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
            z = z ^ (z >> 31);
            (z as f64 / u64::MAX as f64) * 2.0 - 1.0
        };
        let m = DMatrix::from_fn(dim, dim, |_, _| Complex64::new(next(), next()));
        (&m + m.adjoint()) * Complex64::new(0.5, 0.0)
    }

    #[test]
    fn resonant_jaynes_cummings_splitting() {
        // N=1, ω_q=ω_c=0, g=1, fock_dim=2: the one-excitation doublet
        // splits to ±g√1 and the remaining states stay at zero.
        let params = ModelParams {
            n_emitters: 1,
            n_photons: Some(1),
            omega_q: 0.0,
            omega_c: 0.0,
            g: 1.0,
            gamma: 0.0,
            kappa: 0.0,
            gamma_phi: 0.0,
        };
        let dims = params.dims().unwrap();
        let h = build_hamiltonian(&params, dims).unwrap();
        let eig = SymmetricEigen::new(h.matrix.clone());
        let mut evs: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        evs.sort_by(f64::total_cmp);
        let expected = [-1.0, 0.0, 0.0, 1.0];
        for (got, want) in evs.iter().zip(expected) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn free_hamiltonian_diagonal() {
        // g=0, ω_q=2, ω_c=1, N=1, n_max=1: diag {−1, 0, 1, 2} over
        // {g0, g1, e0, e1}.
        let params = ModelParams {
            n_emitters: 1,
            n_photons: Some(1),
            omega_q: 2.0,
            omega_c: 1.0,
            g: 0.0,
            gamma: 0.0,
            kappa: 0.0,
            gamma_phi: 0.0,
        };
        let dims = params.dims().unwrap();
        let h = build_hamiltonian(&params, dims).unwrap();
        for (idx, want) in [(0usize, -1.0), (1, 0.0), (2, 1.0), (3, 2.0)] {
            assert_abs_diff_eq!(h.matrix[(idx, idx)].re, want, epsilon = 1e-12);
        }
        let mut off = h.matrix.clone();
        off.fill_diagonal(Complex64::ZERO);
        assert_eq!(max_norm(&off), 0.0);
    }

    #[test]
    fn hamiltonian_conserves_total_excitation() {
        let params = ModelParams {
            n_emitters: 2,
            n_photons: Some(1),
            omega_q: 0.7,
            omega_c: 0.3,
            g: 1.0,
            ..Default::default()
        };
        let dims = params.dims().unwrap();
        let h = build_hamiltonian(&params, dims).unwrap();
        let nexc = total_excitation(dims);
        let comm = &h.matrix * &nexc.matrix - &nexc.matrix * &h.matrix;
        assert!(max_norm(&comm) < 1e-12);
    }

    #[test]
    fn collapse_set_counts() {
        let dims = |p: &ModelParams| p.dims().unwrap();

        let silent = ModelParams {
            gamma: 0.0,
            kappa: 0.0,
            gamma_phi: 0.0,
            ..Default::default()
        };
        assert!(build_collapse_set(&silent, dims(&silent)).unwrap().is_empty());

        let full = ModelParams::default(); // N=2, all rates positive
        assert_eq!(build_collapse_set(&full, dims(&full)).unwrap().len(), 5);

        let no_dephasing = ModelParams {
            n_emitters: 4,
            gamma_phi: 0.0,
            ..Default::default()
        };
        assert_eq!(
            build_collapse_set(&no_dephasing, dims(&no_dephasing)).unwrap().len(),
            5
        );
    }

    #[test]
    fn rhs_single_emitter_decay() {
        // |e⟩⟨e| with H = 0 and γ only: d(ρ_ee)/dt = −γ.
        let params = ModelParams {
            n_emitters: 1,
            n_photons: Some(0),
            omega_q: 0.0,
            omega_c: 0.0,
            g: 1.0,
            gamma: 0.5,
            kappa: 0.0,
            gamma_phi: 0.0,
        };
        let dims = params.dims().unwrap();
        let gen = Generator::from_params(&params, dims).unwrap();
        let mut rho = DMatrix::zeros(2, 2);
        rho[(1, 1)] = Complex64::new(1.0, 0.0);
        let d = gen.apply_rhs(&rho).unwrap();
        assert_abs_diff_eq!(d[(1, 1)].re, -0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(d[(0, 0)].re, 0.5, epsilon = 1e-14);
    }

    #[test]
    fn rhs_photon_loss_rate() {
        // Cavity in |1⟩⟨1| with κ only: d⟨n⟩/dt = −κ⟨n⟩.
        let params = ModelParams {
            n_emitters: 1,
            n_photons: Some(1),
            omega_q: 0.0,
            omega_c: 0.0,
            g: 1.0,
            gamma: 0.0,
            kappa: 0.3,
            gamma_phi: 0.0,
        };
        let dims = params.dims().unwrap();
        let gen = Generator::from_params(&params, dims).unwrap();
        // |g, 1⟩ index = 1
        let mut rho = DMatrix::zeros(4, 4);
        rho[(1, 1)] = Complex64::new(1.0, 0.0);
        let d = gen.apply_rhs(&rho).unwrap();
        let n_op = crate::operators::photon_number(dims);
        let dn = expectation(&n_op.matrix, &d);
        assert_abs_diff_eq!(dn.re, -0.3, epsilon = 1e-13);
    }

    #[test]
    fn rhs_traceless_and_hermitian() {
        let params = ModelParams::default();
        let dims = params.dims().unwrap();
        let gen = Generator::from_params(&params, dims).unwrap();
        let dim = dims.total_dim();
        for seed in 0..3 {
            let mut rho = random_hermitian(dim, 99 + seed);
            let tr = rho.trace();
            rho /= tr; // unit trace, Hermitian (not necessarily positive)
            let d = gen.apply_rhs(&rho).unwrap();
            assert!(d.trace().norm() < 1e-12 * dim as f64);
            let anti = (&d - d.adjoint()) * Complex64::new(0.5, 0.0);
            assert!(max_norm(&anti) < 1e-12);
        }
    }

    #[test]
    fn sparse_rhs_matches_dense_oracle() {
        let params = ModelParams {
            n_emitters: 2,
            n_photons: Some(2),
            omega_q: 0.4,
            omega_c: 0.9,
            g: 1.3,
            gamma: 0.17,
            kappa: 0.08,
            gamma_phi: 0.05,
        };
        let dims = params.dims().unwrap();
        let gen = Generator::from_params(&params, dims).unwrap();
        let h = build_hamiltonian(&params, dims).unwrap();
        let collapse = build_collapse_set(&params, dims).unwrap();
        for seed in 0..3 {
            let rho = random_hermitian(dims.total_dim(), 7 + seed);
            let fast = gen.apply_rhs(&rho).unwrap();
            let slow = dense_rhs(&h.matrix, &collapse, &rho);
            assert!(max_norm(&(fast - slow)) < 1e-12);
        }
    }

    #[test]
    fn generator_rejects_non_hermitian_hamiltonian() {
        let dims = HilbertDims::new(1, 1).unwrap();
        let bad = Operator::new(
            DMatrix::from_row_slice(
                2,
                2,
                &[
                    Complex64::ZERO,
                    Complex64::new(1.0, 0.0),
                    Complex64::ZERO,
                    Complex64::ZERO,
                ],
            ),
            dims,
        )
        .unwrap();
        assert!(Generator::new(bad, vec![]).is_err());
    }

    #[test]
    fn support_closure_is_excitation_shell() {
        // From |gg, 1⟩ the reachable set is every state with at most one
        // excitation: gg0, gg1, ge0, eg0.
        let params = ModelParams::default();
        let dims = params.dims().unwrap();
        let gen = Generator::from_params(&params, dims).unwrap();
        let seed = 1usize; // |gg, 1⟩ with fock_dim 2
        let support = gen.support_closure(&[seed]);
        assert_eq!(support, vec![0, 1, 2, 4]);
    }
}
