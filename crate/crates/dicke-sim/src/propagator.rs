//! Time evolution of the density matrix from the model's initial
//! condition (all emitters de-excited, n_p photons in the cavity) over a
//! uniform output grid, with observables computed on the fly.
//!
//! Total excitation never increases under this generator, so the state
//! stays supported on the basis-index set reachable from the initial
//! support through the generator's sparsity pattern. Evolution runs on
//! that closed subspace; this is exact, not a truncation.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::liouvillian::{Generator, ModelParams};
use crate::observables::{
    entropy_from_eigenvalues, kept_offsets, observable_set, traced_offsets, ObservableSet,
    Quantity,
};
use crate::ode::{integrate, OdeDiagnostics, StepperOpts};
use crate::operators::{herm_defect, HilbertDims, Operator};

/// Hermitian, unit-trace, positive-semidefinite state on the composite space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub matrix: DMatrix<Complex64>,
    pub dims: HilbertDims,
}

pub const TRACE_TOL: f64 = 1e-9;
pub const HERMITICITY_TOL: f64 = 1e-10;
pub const EIGENVALUE_FLOOR: f64 = -1e-8;

impl DensityMatrix {
    pub fn new(matrix: DMatrix<Complex64>, dims: HilbertDims) -> Result<Self> {
        if matrix.nrows() != dims.total_dim() || matrix.ncols() != dims.total_dim() {
            return Err(Error::Dimension(format!(
                "state is {}x{} but dims give {}",
                matrix.nrows(),
                matrix.ncols(),
                dims.total_dim()
            )));
        }
        Ok(Self { matrix, dims })
    }

    pub fn hermiticity_defect(&self) -> f64 {
        herm_defect(&self.matrix)
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn purity(&self) -> f64 {
        let mut acc = 0.0;
        let n = self.matrix.nrows();
        for i in 0..n {
            for j in 0..n {
                acc += (self.matrix[(i, j)] * self.matrix[(j, i)]).re;
            }
        }
        acc
    }

    /// Check the density-matrix invariants. The positivity check runs an
    /// eigendecomposition and is skipped above `eig_dim_limit`.
    pub fn validate(&self, eig_dim_limit: usize) -> Result<()> {
        let tr = self.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::StateCorruption {
                t: 0.0,
                what: format!("trace = {tr} differs from 1"),
            });
        }
        let defect = self.hermiticity_defect();
        if defect > HERMITICITY_TOL {
            return Err(Error::StateCorruption {
                t: 0.0,
                what: format!("hermiticity defect {defect:.3e}"),
            });
        }
        if self.matrix.nrows() <= eig_dim_limit {
            let eig = SymmetricEigen::new(self.matrix.clone());
            let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
            if min < EIGENVALUE_FLOOR {
                return Err(Error::StateCorruption {
                    t: 0.0,
                    what: format!("negative eigenvalue {min:.3e}"),
                });
            }
        }
        Ok(())
    }
}

/// Uniform output grid over [0, t_max] including both endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_max: f64,
    pub n_points: usize,
}

impl TimeGrid {
    pub fn new(t_max: f64, n_points: usize) -> Result<Self> {
        if !(t_max > 0.0) {
            return Err(Error::Config(format!("t-max must be > 0, got {t_max}")));
        }
        if n_points < 2 {
            return Err(Error::Config(format!("n-points must be >= 2, got {n_points}")));
        }
        Ok(Self { t_max, n_points })
    }

    pub fn spacing(&self) -> f64 {
        self.t_max / (self.n_points - 1) as f64
    }

    pub fn times(&self) -> Vec<f64> {
        let dt = self.spacing();
        (0..self.n_points).map(|i| i as f64 * dt).collect()
    }
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self {
            t_max: 10.0,
            n_points: 2001,
        }
    }
}

/// Whether S and C_rel are taken on the two-emitter reduced state
/// (default, matches the per-pair quantities) or on the full state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ObservableScope {
    #[default]
    Reduced,
    Global,
}

/// Positivity spot checks cost an eigendecomposition each; `Auto` enables
/// them only when the evolving block is small.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PositivityCheck {
    #[default]
    Auto,
    On,
    Off,
}

const POSITIVITY_AUTO_DIM: usize = 400;
/// Positivity is spot-checked every this many grid points.
const POSITIVITY_STRIDE: usize = 10;

#[derive(Debug, Clone)]
pub struct EvolveOptions {
    pub rtol: f64,
    pub atol: f64,
    pub positivity: PositivityCheck,
    pub scope: ObservableScope,
    /// Retain a full state snapshot at every grid point.
    pub snapshots: bool,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-10,
            positivity: PositivityCheck::Auto,
            scope: ObservableScope::Reduced,
            snapshots: false,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct TrajectoryDiagnostics {
    pub support_dim: usize,
    pub full_dim: usize,
    pub max_trace_drift: f64,
    /// Largest re-Hermitization correction applied after an accepted step.
    pub max_herm_correction: f64,
    /// Smallest eigenvalue seen across positivity spot checks.
    pub min_eigenvalue: Option<f64>,
    pub ode: OdeDiagnostics,
}

/// Observable time series on a fixed grid.
#[derive(Debug, Clone)]
pub struct TrajectoryResult {
    pub times: Vec<f64>,
    pub series: BTreeMap<Quantity, Vec<f64>>,
    pub diagnostics: TrajectoryDiagnostics,
    pub snapshots: Option<Vec<DensityMatrix>>,
}

impl TrajectoryResult {
    pub fn get(&self, q: Quantity) -> Option<&[f64]> {
        self.series.get(&q).map(|v| v.as_slice())
    }
}

/// The product state |g⟩^⊗N ⊗ |n_p⟩⟨n_p| ⊗ ⟨g|^⊗N.
pub fn initial_state(params: &ModelParams, dims: HilbertDims) -> Result<DensityMatrix> {
    params.validate()?;
    let np = params.n_photons_resolved()?;
    if np >= dims.fock_dim() {
        return Err(Error::Dimension(format!(
            "n_photons = {np} does not fit in fock_dim = {}",
            dims.fock_dim()
        )));
    }
    if dims.n_emitters() != params.n_emitters {
        return Err(Error::Dimension("params and dims disagree on N".into()));
    }
    let mut m = DMatrix::zeros(dims.total_dim(), dims.total_dim());
    // all qubit bits 0 (ground), photon index n_p
    m[(np, np)] = Complex64::new(1.0, 0.0);
    Ok(DensityMatrix { matrix: m, dims })
}

/// Read-only view of the evolving state handed to observers; the state is
/// stored on its support subspace and embedded on demand.
pub struct StateView<'a> {
    dims: HilbertDims,
    support: &'a [usize],
    pos: &'a [u32],
    block: &'a DMatrix<Complex64>,
}

const ABSENT: u32 = u32::MAX;

impl<'a> StateView<'a> {
    pub fn dims(&self) -> HilbertDims {
        self.dims
    }

    pub fn support_dim(&self) -> usize {
        self.support.len()
    }

    pub fn trace(&self) -> Complex64 {
        self.block.diagonal().sum()
    }

    /// tr(O ρ) for a dense operator on the full space.
    pub fn expectation(&self, op: &Operator) -> Result<Complex64> {
        if op.dims != self.dims {
            return Err(Error::Dimension("expectation: operator dims differ from state".into()));
        }
        let k = self.support.len();
        let mut acc = Complex64::ZERO;
        for p in 0..k {
            let gp = self.support[p];
            for q in 0..k {
                let gq = self.support[q];
                acc += op.matrix[(gp, gq)] * self.block[(q, p)];
            }
        }
        Ok(acc)
    }

    /// Embed the compressed block back onto the full space.
    pub fn to_density_matrix(&self) -> DensityMatrix {
        let d = self.dims.total_dim();
        let mut m = DMatrix::zeros(d, d);
        for (p, &gp) in self.support.iter().enumerate() {
            for (q, &gq) in self.support.iter().enumerate() {
                m[(gp, gq)] = self.block[(p, q)];
            }
        }
        DensityMatrix {
            matrix: m,
            dims: self.dims,
        }
    }

    /// Reduced state on `keep_sites` (photon traced out unless kept).
    pub fn reduced(&self, keep_sites: &[usize], keep_photon: bool) -> Result<DensityMatrix> {
        let kept = kept_offsets(self.dims, keep_sites, keep_photon);
        let traced = traced_offsets(self.dims, keep_sites, keep_photon);
        let reduced_dims = HilbertDims::new(
            keep_sites.len(),
            if keep_photon { self.dims.fock_dim() } else { 1 },
        )?;
        Ok(DensityMatrix {
            matrix: self.reduce_with_tables(&kept, &traced),
            dims: reduced_dims,
        })
    }

    fn reduce_with_tables(&self, kept: &[usize], traced: &[usize]) -> DMatrix<Complex64> {
        let k = kept.len();
        let mut out = DMatrix::<Complex64>::zeros(k, k);
        for (a, &ka) in kept.iter().enumerate() {
            for (b, &kb) in kept.iter().enumerate() {
                let mut acc = Complex64::ZERO;
                for &t in traced {
                    let p = self.pos[ka + t];
                    let q = self.pos[kb + t];
                    if p != ABSENT && q != ABSENT {
                        acc += self.block[(p as usize, q as usize)];
                    }
                }
                out[(a, b)] = acc;
            }
        }
        out
    }

    /// Eigenvalues of the full state (zeros off the support suppressed).
    fn block_eigenvalues(&self) -> Vec<f64> {
        let sym = (self.block + self.block.adjoint()) * Complex64::new(0.5, 0.0);
        SymmetricEigen::new(sym).eigenvalues.iter().copied().collect()
    }
}

/// Integrate dρ/dt from `rho0` over `grid`, recording the standard
/// observable series (N ≥ 2) and invoking `observer` at every grid point.
pub fn evolve<F>(
    gen: &Generator,
    rho0: &DensityMatrix,
    grid: &TimeGrid,
    opts: &EvolveOptions,
    mut observer: F,
) -> Result<TrajectoryResult>
where
    F: FnMut(usize, f64, &StateView<'_>),
{
    let dims = gen.dims();
    if rho0.dims != dims {
        return Err(Error::Dimension("initial state dims differ from generator".into()));
    }
    rho0.validate(POSITIVITY_AUTO_DIM)?;

    // Support closure of the initial state under the generator pattern.
    let full_dim = dims.total_dim();
    let mut seeds = Vec::new();
    for i in 0..full_dim {
        let occupied = (0..full_dim)
            .any(|j| rho0.matrix[(i, j)] != Complex64::ZERO || rho0.matrix[(j, i)] != Complex64::ZERO);
        if occupied {
            seeds.push(i);
        }
    }
    let support = gen.support_closure(&seeds);
    let k = support.len();
    let mut pos = vec![ABSENT; full_dim];
    for (p, &g) in support.iter().enumerate() {
        pos[g] = p as u32;
    }

    let compiled = gen.compile_on_support(&support, &pos);
    let mut block0 = DMatrix::<Complex64>::zeros(k, k);
    for (p, &gp) in support.iter().enumerate() {
        for (q, &gq) in support.iter().enumerate() {
            block0[(p, q)] = rho0.matrix[(gp, gq)];
        }
    }

    let check_positivity = match opts.positivity {
        PositivityCheck::On => true,
        PositivityCheck::Off => false,
        PositivityCheck::Auto => k <= POSITIVITY_AUTO_DIM,
    };

    let track_series = dims.n_emitters() >= 2;
    let (pair_kept, pair_traced) = if track_series {
        (
            kept_offsets(dims, &[0, 1], false),
            traced_offsets(dims, &[0, 1], false),
        )
    } else {
        (Vec::new(), Vec::new())
    };
    let pair_dims = HilbertDims::new(2, 1)?;

    let times = grid.times();
    let stepper = StepperOpts::new(opts.rtol, opts.atol, 2.0 * grid.spacing());

    let mut series: BTreeMap<Quantity, Vec<f64>> = BTreeMap::new();
    if track_series {
        for q in Quantity::ALL {
            series.insert(q, Vec::with_capacity(times.len()));
        }
    }
    let mut snapshots = opts.snapshots.then(Vec::new);
    let mut max_trace_drift = 0.0f64;
    let mut min_eigenvalue: Option<f64> = None;

    let mut scratch = DMatrix::<Complex64>::zeros(k, k);
    let rhs = |y: &DMatrix<Complex64>, dy: &mut DMatrix<Complex64>| {
        compiled.rhs_into(y, dy, &mut scratch);
    };
    let project = |y: &mut DMatrix<Complex64>| -> f64 {
        let mut worst = 0.0f64;
        for i in 0..k {
            for j in i..k {
                let a = y[(i, j)];
                let b = y[(j, i)].conj();
                let avg = (a + b) * Complex64::new(0.5, 0.0);
                worst = worst.max((a - avg).norm());
                y[(i, j)] = avg;
                y[(j, i)] = avg.conj();
            }
        }
        worst
    };

    let mut first_error: Option<Error> = None;
    let emit = |idx: usize, t: f64, y: &DMatrix<Complex64>| -> Result<()> {
        let view = StateView {
            dims,
            support: &support,
            pos: &pos,
            block: y,
        };
        let drift = (view.trace().re - 1.0).abs().max(view.trace().im.abs());
        max_trace_drift = max_trace_drift.max(drift);
        if drift > TRACE_TOL * 10.0 {
            let err = Error::StateCorruption {
                t,
                what: format!("trace drift {drift:.3e}"),
            };
            first_error = Some(err);
            return Err(Error::Integration {
                t,
                reason: "state corruption".into(),
            });
        }
        if check_positivity && idx % POSITIVITY_STRIDE == 0 {
            let min = view
                .block_eigenvalues()
                .into_iter()
                .fold(f64::INFINITY, f64::min)
                .min(0.0);
            min_eigenvalue = Some(min_eigenvalue.map_or(min, |m: f64| m.min(min)));
            if min < EIGENVALUE_FLOOR {
                let err = Error::StateCorruption {
                    t,
                    what: format!("negative eigenvalue {min:.3e}"),
                };
                first_error = Some(err);
                return Err(Error::Integration {
                    t,
                    reason: "state corruption".into(),
                });
            }
        }
        if track_series {
            let pair = DensityMatrix {
                matrix: view.reduce_with_tables(&pair_kept, &pair_traced),
                dims: pair_dims,
            };
            let mut set = observable_set(&pair)?;
            if opts.scope == ObservableScope::Global {
                let eigs = view.block_eigenvalues();
                set.entropy = entropy_from_eigenvalues(eigs.into_iter());
                let diag_entropy =
                    entropy_from_eigenvalues(y.diagonal().iter().map(|z| z.re));
                set.c_rel = (diag_entropy - set.entropy).max(0.0);
            }
            for (q, v) in set.to_map() {
                series.get_mut(&q).expect("series preallocated").push(v);
            }
        }
        if let Some(snaps) = snapshots.as_mut() {
            snaps.push(view.to_density_matrix());
        }
        observer(idx, t, &view);
        Ok(())
    };

    let ode_result = integrate(rhs, project, &block0, &times, &stepper, emit);
    let ode = match ode_result {
        Ok(d) => d,
        Err(e) => return Err(first_error.unwrap_or(e)),
    };

    Ok(TrajectoryResult {
        times,
        series,
        diagnostics: TrajectoryDiagnostics {
            support_dim: k,
            full_dim,
            max_trace_drift,
            max_herm_correction: ode.max_projection,
            min_eigenvalue,
            ode,
        },
        snapshots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{embed_site, total_excitation};
    use approx::assert_abs_diff_eq;

    fn rabi_params() -> ModelParams {
        ModelParams {
            n_emitters: 1,
            n_photons: Some(1),
            omega_q: 0.0,
            omega_c: 0.0,
            g: 1.0,
            gamma: 0.0,
            kappa: 0.0,
            gamma_phi: 0.0,
        }
    }

    #[test]
    fn initial_state_two_emitters() {
        let params = ModelParams::default();
        let dims = params.dims().unwrap();
        let rho = initial_state(&params, dims).unwrap();
        // |gg⟩ ⊗ |1⟩ with fock_dim 2: index 1
        assert_abs_diff_eq!(rho.matrix[(1, 1)].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.trace().re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.purity(), 1.0, epsilon = 1e-15);
        rho.validate(64).unwrap();
    }

    #[test]
    fn initial_state_four_emitters_photon_default() {
        let params = ModelParams {
            n_emitters: 4,
            ..Default::default()
        };
        let dims = params.dims().unwrap();
        assert_eq!(dims.fock_dim(), 3);
        let rho = initial_state(&params, dims).unwrap();
        assert_abs_diff_eq!(rho.matrix[(2, 2)].re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn initial_state_odd_n_requires_explicit_photons() {
        let params = ModelParams {
            n_emitters: 3,
            ..Default::default()
        };
        assert!(matches!(params.dims(), Err(Error::Config(_))));
    }

    #[test]
    fn vacuum_rabi_oscillation() {
        // N=1 on resonance with one photon and no losses:
        // P_e(t) = sin²(g t) to better than 1e-6.
        let params = rabi_params();
        let dims = params.dims().unwrap();
        let gen = Generator::from_params(&params, dims).unwrap();
        let rho0 = initial_state(&params, dims).unwrap();
        let grid = TimeGrid::new(10.0, 2001).unwrap();
        let proj_e = embed_site(
            &nalgebra::DMatrix::from_row_slice(
                2,
                2,
                &[
                    Complex64::ZERO,
                    Complex64::ZERO,
                    Complex64::ZERO,
                    Complex64::new(1.0, 0.0),
                ],
            ),
            0,
            dims,
        )
        .unwrap();
        let mut worst = 0.0f64;
        let result = evolve(&gen, &rho0, &grid, &EvolveOptions::default(), |_, t, view| {
            let pe = view.expectation(&proj_e).unwrap().re;
            let exact = (t.sin()).powi(2);
            worst = worst.max((pe - exact).abs());
        })
        .unwrap();
        assert!(worst < 1e-6, "max |P_e − sin²| = {worst:.3e}");
        // N=1: no pair series
        assert!(result.series.is_empty());
        assert!(result.diagnostics.max_trace_drift < 1e-9);
    }

    #[test]
    fn exponential_emitter_decay() {
        // N=1, g effectively irrelevant (no photons), γ = 0.5:
        // P_e(t) = e^{−γt} to 1e-7.
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
        // start in |e, 0⟩ (index 1 with fock_dim 1)
        let mut m = DMatrix::zeros(2, 2);
        m[(1, 1)] = Complex64::new(1.0, 0.0);
        let rho0 = DensityMatrix::new(m, dims).unwrap();
        let grid = TimeGrid::new(10.0, 501).unwrap();
        let mut worst = 0.0f64;
        evolve(&gen, &rho0, &grid, &EvolveOptions::default(), |_, t, view| {
            let pe = view.to_density_matrix().matrix[(1, 1)].re;
            worst = worst.max((pe - (-0.5 * t).exp()).abs());
        })
        .unwrap();
        assert!(worst < 1e-7, "max error {worst:.3e}");
    }

    #[test]
    fn default_run_invariants_hold() {
        let params = ModelParams::default();
        let dims = params.dims().unwrap();
        let gen = Generator::from_params(&params, dims).unwrap();
        let rho0 = initial_state(&params, dims).unwrap();
        let grid = TimeGrid::new(10.0, 501).unwrap();
        let result = evolve(&gen, &rho0, &grid, &EvolveOptions::default(), |_, _, _| {}).unwrap();
        let d = &result.diagnostics;
        assert!(d.max_trace_drift < 1e-9, "trace drift {}", d.max_trace_drift);
        assert!(d.max_herm_correction < 1e-10, "herm {}", d.max_herm_correction);
        assert!(d.min_eigenvalue.unwrap() >= -1e-8);
        assert_eq!(d.support_dim, 4); // one-excitation shell of N=2
        for q in Quantity::ALL {
            assert_eq!(result.get(q).unwrap().len(), 501);
        }
    }

    #[test]
    fn closed_evolution_preserves_purity() {
        let params = ModelParams {
            gamma: 0.0,
            kappa: 0.0,
            gamma_phi: 0.0,
            ..Default::default()
        };
        let dims = params.dims().unwrap();
        let gen = Generator::from_params(&params, dims).unwrap();
        let rho0 = initial_state(&params, dims).unwrap();
        let grid = TimeGrid::new(5.0, 501).unwrap();
        let mut worst = 0.0f64;
        evolve(&gen, &rho0, &grid, &EvolveOptions::default(), |_, _, view| {
            let p = view.to_density_matrix().purity();
            worst = worst.max((p - 1.0).abs());
        })
        .unwrap();
        assert!(worst < 1e-7, "purity drift {worst:.3e}");
    }

    #[test]
    fn excitation_is_non_increasing() {
        let params = ModelParams::default();
        let dims = params.dims().unwrap();
        let gen = Generator::from_params(&params, dims).unwrap();
        let rho0 = initial_state(&params, dims).unwrap();
        let grid = TimeGrid::new(10.0, 201).unwrap();
        let nexc = total_excitation(dims);
        let mut prev = f64::INFINITY;
        evolve(&gen, &rho0, &grid, &EvolveOptions::default(), |_, _, view| {
            let e = view.expectation(&nexc).unwrap().re;
            assert!(e <= prev + 1e-9, "excitation grew: {prev} -> {e}");
            prev = e;
        })
        .unwrap();
    }

    #[test]
    fn tolerance_halving_changes_little() {
        // Halving rtol and atol moves every reported observable by < 1e-7.
        let params = ModelParams::default();
        let dims = params.dims().unwrap();
        let gen = Generator::from_params(&params, dims).unwrap();
        let rho0 = initial_state(&params, dims).unwrap();
        let grid = TimeGrid::default();
        let base = evolve(&gen, &rho0, &grid, &EvolveOptions::default(), |_, _, _| {}).unwrap();
        let tight_opts = EvolveOptions {
            rtol: 0.5e-8,
            atol: 0.5e-10,
            ..Default::default()
        };
        let tight = evolve(&gen, &rho0, &grid, &tight_opts, |_, _, _| {}).unwrap();
        for q in Quantity::ALL {
            let a = base.get(q).unwrap();
            let b = tight.get(q).unwrap();
            let worst = a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            assert!(worst < 1e-7, "{q}: tolerance sensitivity {worst:.3e}");
        }
    }

    #[test]
    fn snapshots_round_trip_through_support() {
        let params = ModelParams::default();
        let dims = params.dims().unwrap();
        let gen = Generator::from_params(&params, dims).unwrap();
        let rho0 = initial_state(&params, dims).unwrap();
        let grid = TimeGrid::new(1.0, 11).unwrap();
        let opts = EvolveOptions {
            snapshots: true,
            ..Default::default()
        };
        let result = evolve(&gen, &rho0, &grid, &opts, |_, _, _| {}).unwrap();
        let snaps = result.snapshots.unwrap();
        assert_eq!(snaps.len(), 11);
        assert_abs_diff_eq!(snaps[0].matrix[(1, 1)].re, 1.0, epsilon = 1e-12);
        for s in &snaps {
            assert!(s.hermiticity_defect() < 1e-10);
            assert_abs_diff_eq!(s.trace().re, 1.0, epsilon = 1e-9);
        }
    }
}
