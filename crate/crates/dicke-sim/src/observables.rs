//! The tracked quantities: correlated emission C₀ = ⟨σᵢ⁺σⱼ⁻⟩, correlated
//! dephasing C_zz = ⟨σᵢᶻσⱼᶻ⟩, von Neumann entropy S = −tr(ρ ln ρ),
//! relative entropy of coherence C_rel = S(ρ_diag) − S(ρ), and the
//! entanglement witness ⟨W⟩ = 1 − 4 Re C₀ + C_zz.
//!
//! S and C_rel are evaluated on the two-emitter reduced state by default
//! (photon mode and the other emitters traced out); a global-state variant
//! exists behind the observable-scope switch. The incoherent basis for
//! C_rel is the computational product basis.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operators::{kron, sigma_minus, sigma_plus, sigma_z, HilbertDims};
use crate::propagator::DensityMatrix;

/// Eigenvalues below this are treated as exact zeros inside entropies;
/// integration noise produces tiny negatives that would otherwise leak
/// NaNs through the logarithm.
pub const EIGENVALUE_CLAMP: f64 = 1e-12;

/// Fixed identifiers of the tracked series; the string forms double as
/// CSV column names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Quantity {
    CRel,
    C0Re,
    C0Im,
    Czz,
    W,
    S,
}

impl Quantity {
    pub const ALL: [Quantity; 6] = [
        Quantity::CRel,
        Quantity::C0Re,
        Quantity::C0Im,
        Quantity::Czz,
        Quantity::W,
        Quantity::S,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Quantity::CRel => "c_rel",
            Quantity::C0Re => "c0_re",
            Quantity::C0Im => "c0_im",
            Quantity::Czz => "czz",
            Quantity::W => "W",
            Quantity::S => "S",
        }
    }

    pub fn from_str(s: &str) -> Option<Self> {
        Quantity::ALL.iter().copied().find(|q| q.as_str() == s)
    }
}

impl std::fmt::Display for Quantity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One evaluation of the tracked quantities. The witness is recomputed
/// from c0 and czz on demand rather than stored, so the defining identity
/// cannot drift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservableSet {
    pub c0: Complex64,
    pub czz: f64,
    pub entropy: f64,
    pub c_rel: f64,
}

impl ObservableSet {
    pub fn witness(&self) -> f64 {
        witness(self.c0, self.czz)
    }

    pub fn to_map(&self) -> BTreeMap<Quantity, f64> {
        BTreeMap::from([
            (Quantity::CRel, self.c_rel),
            (Quantity::C0Re, self.c0.re),
            (Quantity::C0Im, self.c0.im),
            (Quantity::Czz, self.czz),
            (Quantity::W, self.witness()),
            (Quantity::S, self.entropy),
        ])
    }
}

/// Reduced state on a subset of emitters (and optionally the photon mode).
///
/// `keep_sites` must be distinct and in range; the reduced factors are laid
/// out in the order given. The photon mode is traced out unless
/// `keep_photon` is set.
pub fn partial_trace(
    rho: &DensityMatrix,
    keep_sites: &[usize],
    keep_photon: bool,
) -> Result<DensityMatrix> {
    let dims = rho.dims;
    if keep_sites.is_empty() {
        return Err(Error::Dimension("partial_trace: empty keep list".into()));
    }
    for (i, &s) in keep_sites.iter().enumerate() {
        if s >= dims.n_emitters() {
            return Err(Error::Dimension(format!(
                "partial_trace: site {s} out of range for {} emitters",
                dims.n_emitters()
            )));
        }
        if keep_sites[..i].contains(&s) {
            return Err(Error::Dimension(format!("partial_trace: duplicate site {s}")));
        }
    }

    let reduced_dims = HilbertDims::new(keep_sites.len(), if keep_photon { dims.fock_dim() } else { 1 })?;
    let k = reduced_dims.total_dim();

    // Global index = Σ_site bit·stride(site) + n. Kept and traced digits
    // occupy disjoint positions, so global = kept_offset + traced_offset.
    let kept_offsets = kept_offsets(dims, keep_sites, keep_photon);
    let traced_offsets = traced_offsets(dims, keep_sites, keep_photon);

    let mut out = DMatrix::<Complex64>::zeros(k, k);
    for (a, &ka) in kept_offsets.iter().enumerate() {
        for (b, &kb) in kept_offsets.iter().enumerate() {
            let mut acc = Complex64::ZERO;
            for &t in &traced_offsets {
                acc += rho.matrix[(ka + t, kb + t)];
            }
            out[(a, b)] = acc;
        }
    }
    Ok(DensityMatrix {
        matrix: out,
        dims: reduced_dims,
    })
}

/// Global-index contribution of each reduced basis state.
pub(crate) fn kept_offsets(dims: HilbertDims, keep_sites: &[usize], keep_photon: bool) -> Vec<usize> {
    let n_keep = keep_sites.len();
    let reduced_qubit_dim = 1usize << n_keep;
    let photon_dim = if keep_photon { dims.fock_dim() } else { 1 };
    let mut offsets = Vec::with_capacity(reduced_qubit_dim * photon_dim);
    for bits in 0..reduced_qubit_dim {
        let mut qubit_part = 0usize;
        for (pos, &site) in keep_sites.iter().enumerate() {
            let bit = (bits >> (n_keep - 1 - pos)) & 1;
            if bit == 1 {
                qubit_part += dims.site_stride(site);
            }
        }
        if keep_photon {
            for n in 0..photon_dim {
                offsets.push(qubit_part + n);
            }
        } else {
            offsets.push(qubit_part);
        }
    }
    offsets
}

/// Global-index contribution of each traced-out configuration.
pub(crate) fn traced_offsets(dims: HilbertDims, keep_sites: &[usize], keep_photon: bool) -> Vec<usize> {
    let traced_sites: Vec<usize> = (0..dims.n_emitters())
        .filter(|s| !keep_sites.contains(s))
        .collect();
    let photon_dim = if keep_photon { 1 } else { dims.fock_dim() };
    let mut offsets = Vec::with_capacity((1usize << traced_sites.len()) * photon_dim);
    for bits in 0..(1usize << traced_sites.len()) {
        let mut qubit_part = 0usize;
        for (pos, &site) in traced_sites.iter().enumerate() {
            if (bits >> pos) & 1 == 1 {
                qubit_part += dims.site_stride(site);
            }
        }
        for n in 0..photon_dim {
            offsets.push(qubit_part + n);
        }
    }
    offsets
}

fn require_two_qubit(rho: &DensityMatrix, what: &str) -> Result<()> {
    if rho.dims.n_emitters() != 2 || rho.dims.fock_dim() != 1 || rho.matrix.nrows() != 4 {
        return Err(Error::Dimension(format!(
            "{what}: expected a two-qubit state (4x4), got dim {}",
            rho.matrix.nrows()
        )));
    }
    Ok(())
}

/// C₀ = tr(ρ σ⁺ ⊗ σ⁻) on a two-qubit state.
pub fn correlated_emission(rho_pair: &DensityMatrix) -> Result<Complex64> {
    require_two_qubit(rho_pair, "correlated_emission")?;
    let op = kron(&sigma_plus(), &sigma_minus()).expect("2x2 factors");
    Ok(crate::operators::expectation(&op, &rho_pair.matrix))
}

/// C_zz = tr(ρ σᶻ ⊗ σᶻ) on a two-qubit state.
pub fn correlated_dephasing(rho_pair: &DensityMatrix) -> Result<f64> {
    require_two_qubit(rho_pair, "correlated_dephasing")?;
    let op = kron(&sigma_z(), &sigma_z()).expect("2x2 factors");
    Ok(crate::operators::expectation(&op, &rho_pair.matrix).re)
}

const ENTROPY_HERMITICITY_TOL: f64 = 1e-8;

/// S(ρ) = −Σ λ ln λ in nats, eigenvalues below the clamp treated as zero.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let defect = rho.hermiticity_defect();
    if defect > ENTROPY_HERMITICITY_TOL {
        return Err(Error::Dimension(format!(
            "von_neumann_entropy: state is not Hermitian (defect {defect:.3e})"
        )));
    }
    let sym = (&rho.matrix + rho.matrix.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    Ok(entropy_from_eigenvalues(eig.eigenvalues.iter().copied()))
}

pub(crate) fn entropy_from_eigenvalues(eigs: impl Iterator<Item = f64>) -> f64 {
    let mut s = 0.0;
    for lambda in eigs {
        if lambda > EIGENVALUE_CLAMP {
            s -= lambda * lambda.ln();
        }
    }
    // −0.0 keeps out of outputs
    if s == 0.0 {
        0.0
    } else {
        s
    }
}

/// C_rel = S(diag ρ) − S(ρ) ≥ 0, diagonal taken in the computational
/// product basis.
pub fn relative_coherence(rho: &DensityMatrix) -> Result<f64> {
    let s = von_neumann_entropy(rho)?;
    let s_diag = entropy_from_eigenvalues(rho.matrix.diagonal().iter().map(|z| z.re));
    Ok((s_diag - s).max(0.0))
}

/// ⟨W⟩ = 1 − 4 Re C₀ + C_zz; a negative value certifies entanglement.
pub fn witness(c0: Complex64, czz: f64) -> f64 {
    1.0 - 4.0 * c0.re + czz
}

/// All tracked quantities evaluated on a two-qubit reduced state.
pub fn observable_set(rho_pair: &DensityMatrix) -> Result<ObservableSet> {
    Ok(ObservableSet {
        c0: correlated_emission(rho_pair)?,
        czz: correlated_dephasing(rho_pair)?,
        entropy: von_neumann_entropy(rho_pair)?,
        c_rel: relative_coherence(rho_pair)?,
    })
}

/// Pair correlators that determine the two-emitter reduced state of an
/// exchangeable system: single-site ⟨σᶻ⟩ and ⟨σ⁺⟩ plus the symmetric
/// two-site ⟨σ⁺σ⁻⟩, ⟨σ⁺σ⁺⟩, ⟨σ⁺σᶻ⟩, ⟨σᶻσᶻ⟩ (i ≠ j throughout).
#[derive(Debug, Clone, Copy)]
pub struct PairCorrelators {
    pub sz: f64,
    pub sp: Complex64,
    pub sp_sm: Complex64,
    pub sp_sp: Complex64,
    pub sp_sz: Complex64,
    pub sz_sz: f64,
}

/// Reconstruct the two-emitter reduced density matrix from pair
/// correlators via the Pauli expansion ρ = ¼ Σ t_ab σ_a ⊗ σ_b.
pub fn pair_from_correlators(c: &PairCorrelators) -> DensityMatrix {
    let dims = HilbertDims::new(2, 1).expect("2 qubits");
    let id = crate::operators::identity2();
    let sx = crate::operators::sigma_x();
    let sy = crate::operators::sigma_y();
    let sz = sigma_z();

    // Single-site Bloch components.
    let tx = 2.0 * c.sp.re;
    let ty = -2.0 * c.sp.im;
    let tz = c.sz;

    // Two-site correlation matrix in the (x, y, z) basis. Swap symmetry of
    // the exchangeable pair gives ⟨σᵢ⁻σⱼ⁺⟩ = conj⟨σᵢ⁺σⱼ⁻⟩ and
    // ⟨σᵢ⁻σⱼ⁻⟩ = conj⟨σᵢ⁺σⱼ⁺⟩, so with σx = σ⁺+σ⁻ and σy = i(σ⁺−σ⁻):
    //   ⟨σxσx⟩ = 2 Re⟨σ⁺σ⁺⟩ + 2 Re⟨σ⁺σ⁻⟩
    //   ⟨σyσy⟩ = 2 Re⟨σ⁺σ⁻⟩ − 2 Re⟨σ⁺σ⁺⟩
    //   ⟨σxσy⟩ = −2 Im⟨σ⁺σ⁺⟩ + 2 Im⟨σ⁺σ⁻⟩
    //   ⟨σxσz⟩ = 2 Re⟨σ⁺σᶻ⟩,  ⟨σyσz⟩ = −2 Im⟨σ⁺σᶻ⟩
    let t_xx = 2.0 * (c.sp_sp.re + c.sp_sm.re);
    let t_yy = 2.0 * (c.sp_sm.re - c.sp_sp.re);
    let t_xy = -2.0 * c.sp_sp.im + 2.0 * c.sp_sm.im;
    let t_xz = 2.0 * c.sp_sz.re;
    let t_yz = -2.0 * c.sp_sz.im;
    let t_zz = c.sz_sz;

    let paulis = [&sx, &sy, &sz];
    let singles = [tx, ty, tz];
    let pairs = [
        [t_xx, t_xy, t_xz],
        [t_xy, t_yy, t_yz],
        [t_xz, t_yz, t_zz],
    ];

    let mut rho = kron(&id, &id).expect("2x2 factors");
    for (a, pa) in paulis.iter().enumerate() {
        let single = kron(pa, &id).expect("2x2") + kron(&id, pa).expect("2x2");
        rho += single * Complex64::new(singles[a], 0.0);
        for (b, pb) in paulis.iter().enumerate() {
            let w = pairs[a][b];
            if w != 0.0 {
                rho += kron(pa, pb).expect("2x2") * Complex64::new(w, 0.0);
            }
        }
    }
    rho *= Complex64::new(0.25, 0.0);
    DensityMatrix { matrix: rho, dims }
}
