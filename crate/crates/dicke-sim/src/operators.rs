//! Elementary and embedded operators on the composite Hilbert space of
//! `N` qubits tensored with a truncated photon Fock space.
//!
//! Basis conventions used throughout the crate:
//! - Qubit basis: |g⟩ = (1, 0), |e⟩ = (0, 1), so σᶻ|g⟩ = −|g⟩, σᶻ|e⟩ = +|e⟩
//!   and σ⁺|g⟩ = |e⟩.
//! - Tensor order: emitter qubits first (site 0 is the most significant
//!   factor), the photon Fock space last. A basis index decodes as
//!   `idx = (Σ_i bit_i · 2^(N−1−i)) · fock_dim + n`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Shape of the composite Hilbert space: `N` qubits ⊗ Fock space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HilbertDims {
    n_emitters: usize,
    fock_dim: usize,
    total_dim: usize,
}

impl HilbertDims {
    pub fn new(n_emitters: usize, fock_dim: usize) -> Result<Self> {
        if n_emitters < 1 {
            return Err(Error::Dimension("n_emitters must be >= 1".into()));
        }
        if fock_dim < 1 {
            return Err(Error::Dimension("fock_dim must be >= 1".into()));
        }
        let qubit_dim = 1usize
            .checked_shl(n_emitters as u32)
            .ok_or_else(|| Error::Dimension(format!("2^{n_emitters} overflows usize")))?;
        let total_dim = qubit_dim
            .checked_mul(fock_dim)
            .ok_or_else(|| Error::Dimension("total dimension overflows usize".into()))?;
        Ok(Self {
            n_emitters,
            fock_dim,
            total_dim,
        })
    }

    pub fn n_emitters(&self) -> usize {
        self.n_emitters
    }

    pub fn fock_dim(&self) -> usize {
        self.fock_dim
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    /// Weight of the qubit bit for `site` in a composite basis index.
    pub(crate) fn site_stride(&self, site: usize) -> usize {
        (1usize << (self.n_emitters - 1 - site)) * self.fock_dim
    }
}

/// Dense operator on the composite space, tagged with its dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    pub matrix: DMatrix<Complex64>,
    pub dims: HilbertDims,
}

impl Operator {
    pub fn new(matrix: DMatrix<Complex64>, dims: HilbertDims) -> Result<Self> {
        if matrix.nrows() != dims.total_dim() || matrix.ncols() != dims.total_dim() {
            return Err(Error::Dimension(format!(
                "operator is {}x{} but dims give total_dim {}",
                matrix.nrows(),
                matrix.ncols(),
                dims.total_dim()
            )));
        }
        Ok(Self { matrix, dims })
    }

    pub fn zeros(dims: HilbertDims) -> Self {
        Self {
            matrix: DMatrix::zeros(dims.total_dim(), dims.total_dim()),
            dims,
        }
    }

    pub fn identity(dims: HilbertDims) -> Self {
        Self {
            matrix: DMatrix::identity(dims.total_dim(), dims.total_dim()),
            dims,
        }
    }

    pub fn dagger(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
            dims: self.dims,
        }
    }

    /// Max-norm of the anti-Hermitian part.
    pub fn hermiticity_defect(&self) -> f64 {
        herm_defect(&self.matrix)
    }
}

/// Max-norm of (m − m†)/2.
pub fn herm_defect(m: &DMatrix<Complex64>) -> f64 {
    let mut worst = 0.0f64;
    let n = m.nrows();
    for i in 0..n {
        for j in i..n {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            worst = worst.max(d / 2.0);
        }
    }
    worst
}

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// σˣ in the (g, e) basis.
pub fn sigma_x() -> DMatrix<Complex64> {
    DMatrix::from_row_slice(2, 2, &[Complex64::ZERO, ONE, ONE, Complex64::ZERO])
}

/// σʸ in the (g, e) basis.
pub fn sigma_y() -> DMatrix<Complex64> {
    DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::ZERO,
            Complex64::new(0.0, -1.0),
            Complex64::new(0.0, 1.0),
            Complex64::ZERO,
        ],
    )
}

/// σᶻ with σᶻ|g⟩ = −|g⟩ in the (g, e) basis, i.e. diag(−1, +1).
pub fn sigma_z() -> DMatrix<Complex64> {
    DMatrix::from_row_slice(2, 2, &[-ONE, Complex64::ZERO, Complex64::ZERO, ONE])
}

/// σ⁺ = |e⟩⟨g|.
pub fn sigma_plus() -> DMatrix<Complex64> {
    DMatrix::from_row_slice(2, 2, &[Complex64::ZERO, Complex64::ZERO, ONE, Complex64::ZERO])
}

/// σ⁻ = |g⟩⟨e|.
pub fn sigma_minus() -> DMatrix<Complex64> {
    DMatrix::from_row_slice(2, 2, &[Complex64::ZERO, ONE, Complex64::ZERO, Complex64::ZERO])
}

pub fn identity2() -> DMatrix<Complex64> {
    DMatrix::identity(2, 2)
}

/// Kronecker product of two square matrices.
///
/// Entry ((i·p + r), (j·p + s)) = a[i,j]·b[r,s] for b of side p.
pub fn kron(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    if a.nrows() != a.ncols() {
        return Err(Error::Dimension(format!(
            "kron: left factor is {}x{}, expected square",
            a.nrows(),
            a.ncols()
        )));
    }
    if b.nrows() != b.ncols() {
        return Err(Error::Dimension(format!(
            "kron: right factor is {}x{}, expected square",
            b.nrows(),
            b.ncols()
        )));
    }
    Ok(a.kronecker(b))
}

/// Embed a single-qubit operator at `site`: I ⊗ … ⊗ op ⊗ … ⊗ I ⊗ I_fock.
pub fn embed_site(op2x2: &DMatrix<Complex64>, site: usize, dims: HilbertDims) -> Result<Operator> {
    if op2x2.nrows() != 2 || op2x2.ncols() != 2 {
        return Err(Error::Dimension(format!(
            "embed_site: operator is {}x{}, expected 2x2",
            op2x2.nrows(),
            op2x2.ncols()
        )));
    }
    if site >= dims.n_emitters() {
        return Err(Error::Dimension(format!(
            "embed_site: site {site} out of range for {} emitters",
            dims.n_emitters()
        )));
    }
    let left = 1usize << site;
    let right = (1usize << (dims.n_emitters() - 1 - site)) * dims.fock_dim();
    let stride = dims.site_stride(site);
    let mut out = DMatrix::zeros(dims.total_dim(), dims.total_dim());
    for p in 0..left {
        let base = p * 2 * stride;
        for (br, bc) in [(0usize, 0usize), (0, 1), (1, 0), (1, 1)] {
            let v = op2x2[(br, bc)];
            if v == Complex64::ZERO {
                continue;
            }
            for s in 0..right {
                out[(base + br * stride + s, base + bc * stride + s)] = v;
            }
        }
    }
    Operator::new(out, dims)
}

/// Bosonic annihilation operator on a Fock space of dimension `fock_dim`:
/// a[n−1, n] = √n.
pub fn annihilation(fock_dim: usize) -> Result<DMatrix<Complex64>> {
    if fock_dim < 1 {
        return Err(Error::Dimension("annihilation: fock_dim must be >= 1".into()));
    }
    let mut a = DMatrix::zeros(fock_dim, fock_dim);
    for n in 1..fock_dim {
        a[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    Ok(a)
}

/// Embed a Fock-space operator on the composite space: I_qubits ⊗ op.
pub fn embed_fock(op: &DMatrix<Complex64>, dims: HilbertDims) -> Result<Operator> {
    if op.nrows() != dims.fock_dim() || op.ncols() != dims.fock_dim() {
        return Err(Error::Dimension(format!(
            "embed_fock: operator is {}x{}, expected {0}x{0} with fock_dim {}",
            op.nrows(),
            op.ncols(),
            dims.fock_dim()
        )));
    }
    let qubit_dim = dims.total_dim() / dims.fock_dim();
    let f = dims.fock_dim();
    let mut out = DMatrix::zeros(dims.total_dim(), dims.total_dim());
    for q in 0..qubit_dim {
        for r in 0..f {
            for c in 0..f {
                let v = op[(r, c)];
                if v != Complex64::ZERO {
                    out[(q * f + r, q * f + c)] = v;
                }
            }
        }
    }
    Operator::new(out, dims)
}

/// Collective lowering operator J⁻ = Σ_i σ⁻_i on the composite space.
pub fn collective_lowering(dims: HilbertDims) -> Operator {
    let sm = sigma_minus();
    let mut out = Operator::zeros(dims);
    for site in 0..dims.n_emitters() {
        let term = embed_site(&sm, site, dims).expect("site in range by construction");
        out.matrix += term.matrix;
    }
    out
}

/// Photon number operator a†a embedded on the composite space.
pub fn photon_number(dims: HilbertDims) -> Operator {
    let f = dims.fock_dim();
    let mut n_op = DMatrix::zeros(f, f);
    for n in 0..f {
        n_op[(n, n)] = Complex64::new(n as f64, 0.0);
    }
    embed_fock(&n_op, dims).expect("dims match by construction")
}

/// Total excitation operator Σ_i (σᶻ_i + 1)/2 + a†a.
pub fn total_excitation(dims: HilbertDims) -> Operator {
    let mut out = photon_number(dims);
    let proj_e = DMatrix::from_row_slice(
        2,
        2,
        &[Complex64::ZERO, Complex64::ZERO, Complex64::ZERO, ONE],
    );
    for site in 0..dims.n_emitters() {
        let term = embed_site(&proj_e, site, dims).expect("site in range");
        out.matrix += term.matrix;
    }
    out
}

/// tr(op · rho) for dense matrices of equal side.
pub fn expectation(op: &DMatrix<Complex64>, rho: &DMatrix<Complex64>) -> Complex64 {
    let n = op.nrows();
    let mut acc = Complex64::ZERO;
    for i in 0..n {
        for j in 0..n {
            acc += op[(i, j)] * rho[(j, i)];
        }
    }
    acc
}
